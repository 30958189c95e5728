//! Eigenstates concentrating on a prescribed convex measure, and the tables
//! that track their convergence.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{hbar_schedule, FockState};
use crate::measures::{convex_integral, ConvexMeasure, TestFamily};
use crate::metaplectic::transport_reference;
use crate::symplectic::{transporter, Orbit};
use crate::weyl::{expectation, PolySymbol};

/// Errors at or below this size are rounding noise and count as converged.
pub const ROUNDING_FLOOR: f64 = 1e-13;

/// `g_n` together with the norm of the unnormalized sum.
#[derive(Clone, Debug)]
pub struct BuiltState {
    pub state: FockState,
    pub raw_norm: f64,
}

/// `g_n ∝ Σ_i √λ_i f_n^{A_i}` with `A_i` the transporter onto the `i`-th orbit.
pub fn build_state(mu: &ConvexMeasure, n: u32) -> Result<BuiltState> {
    let d = mu.dim();
    let mut sum = FockState::new(d, hbar_schedule(n, d))?;
    for (w, m) in mu.components() {
        let f = transport_reference(n, &transporter(m.orbit()));
        sum.axpy(C64::new(w.sqrt(), 0.0), f.state())?;
    }
    let sum = sum.pruned();
    let raw_norm = sum.norm();
    Ok(BuiltState { state: sum.normalized()?, raw_norm })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossTermRow {
    pub n: u32,
    pub symbol: String,
    pub value: C64,
}

/// `⟨a^w f_n^A, f_n^B⟩` for two distinct orbits.
pub fn cross_terms(
    first: &Orbit,
    second: &Orbit,
    family: &TestFamily,
    ns: &[u32],
) -> Result<Vec<CrossTermRow>> {
    if first.same_orbit(second) {
        return Err(Error::Precondition("cross terms need two distinct orbits".into()));
    }
    if first.dim() != family.dim() || second.dim() != family.dim() {
        return Err(Error::DimensionMismatch { expected: family.dim(), found: first.dim() });
    }
    let (ga, gb) = (transporter(first), transporter(second));
    let mut rows = Vec::with_capacity(ns.len() * family.len());
    for &n in ns {
        let fa = transport_reference(n, &ga);
        let fb = transport_reference(n, &gb);
        for (name, a) in family.entries() {
            rows.push(CrossTermRow { n, symbol: name.clone(), value: expectation(a, &fa, &fb)? });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: u32,
    pub hbar: f64,
    pub symbol: String,
    pub value: C64,
    pub target: C64,
    pub error: f64,
}

/// `⟨a^w g_n, g_n⟩` against `∫ a dμ` for every symbol and level.
pub fn convergence_table(
    mu: &ConvexMeasure,
    family: &[(String, PolySymbol)],
    ns: &[u32],
) -> Result<Vec<ConvergenceRow>> {
    let targets: Vec<C64> = family.iter().map(|(_, a)| convex_integral(a, mu)).collect();
    let mut rows = Vec::with_capacity(ns.len() * family.len());
    for &n in ns {
        let g = build_state(mu, n)?.state;
        for ((name, a), target) in family.iter().zip(&targets) {
            let value = expectation(a, &g, &g)?;
            rows.push(ConvergenceRow {
                n,
                hbar: g.hbar(),
                symbol: name.clone(),
                value,
                target: *target,
                error: (value - target).norm(),
            });
        }
    }
    Ok(rows)
}

/// Median of successive ratios `e_{i+1}/e_i` of an error column. A step out
/// of the rounding floor counts as `+∞` and a step within it as 0.
pub fn median_successive_ratio(errors: &[f64]) -> f64 {
    let mut ratios: Vec<f64> = errors
        .windows(2)
        .map(|w| {
            if w[0] > ROUNDING_FLOOR {
                w[1] / w[0]
            } else if w[1] > ROUNDING_FLOOR {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .collect();
    if ratios.is_empty() {
        return 0.0;
    }
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = ratios.len();
    if k % 2 == 1 {
        ratios[k / 2]
    } else {
        0.5 * (ratios[k / 2 - 1] + ratios[k / 2])
    }
}

/// Whether each entry is strictly below its predecessor, entries at the
/// rounding floor counting as converged.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0] || (w[0] <= ROUNDING_FLOOR && w[1] <= ROUNDING_FLOOR))
}
