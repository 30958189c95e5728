//! `‖a^w u‖` for Gaussian bumps `a`, through exact Gaussian Weyl calculus.
//!
//! In the rescaled variables `q = z/√h` a centered bump of width `w` is
//! `e^{-λ|q|²}` with `λ = h/w²`, which is the Weyl symbol of
//! `r^N / (1 + λ)` for `r = (1 - λ)/(1 + λ)` and the number operator `N`.
//! A shifted bump is conjugated by the displacement `D(β)`,
//! `β = (x_c + iξ_c)/√(2h)`, so per coordinate
//!
//! ```text
//! ‖a^w u‖² = amp² (1 + λ)^{-2d} ⟨ D(β) r^{2N} D(-β) u, u ⟩.
//! ```
//!
//! The matrix elements of `D` are Laguerre polynomials, evaluated in the log
//! domain. The sum over intermediate levels is truncated adaptively.

use std::collections::{BTreeSet, HashMap};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{same_hbar, hbar_schedule, FockState};
use crate::weyl::{BumpSymbol, Symbol};
use crate::wigner::{quadrature_expectation, QuadratureSpec};

/// Bumps must keep at least this many widths away from the unit sphere.
pub const SEPARATION_WIDTHS: f64 = 3.0;

const MAX_TRUNCATION: u32 = 1 << 13;

/// Checks that the bump stays clear of the unit sphere and that `u` is a
/// level-`n` state at `h_n`.
fn check_preconditions(a: &BumpSymbol, u: &FockState) -> Result<()> {
    if a.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: a.dim() });
    }
    let radius = a.center().norm_sqr().sqrt();
    let gap = (radius - 1.0).abs();
    if !(gap > SEPARATION_WIDTHS * a.width()) {
        return Err(Error::Precondition(format!(
            "bump at distance {gap} from the unit sphere overlaps it (width {})",
            a.width()
        )));
    }
    let Some(n) = u.homogeneous_level() else {
        return Err(Error::Precondition("state is not supported on a single level".into()));
    };
    let expected = hbar_schedule(n, u.dim());
    if !same_hbar(u.hbar(), expected) {
        return Err(Error::Precondition(format!(
            "level-{n} state carries h = {}, expected {expected}",
            u.hbar()
        )));
    }
    Ok(())
}

/// `‖a^w u‖` for an eigenstate `u` and a bump vanishing near the unit sphere.
pub fn microlocal_norm(a: &BumpSymbol, u: &FockState) -> Result<f64> {
    check_preconditions(a, u)?;
    Ok(bump_apply_norm(a, u))
}

/// `‖a^w u‖` without the geometric preconditions.
pub fn bump_apply_norm(a: &BumpSymbol, u: &FockState) -> f64 {
    let d = u.dim();
    let h = u.hbar();
    let lambda = h / (a.width() * a.width());
    let r = (1.0 - lambda) / (1.0 + lambda);
    let prefactor = a.amplitude().abs() * (1.0 + lambda).powi(-(d as i32));
    if u.is_zero() || prefactor == 0.0 {
        return 0.0;
    }
    let shifts: Vec<C64> = (0..d)
        .map(|j| -C64::new(a.center().x[j], a.center().xi[j]) / (2.0 * h).sqrt())
        .collect();
    let occupations: Vec<Vec<u32>> = (0..d)
        .map(|j| {
            let set: BTreeSet<u32> = u.coeffs().map(|(alpha, _)| alpha.get(j)).collect();
            set.into_iter().collect()
        })
        .collect();
    let l1: f64 = u.coeffs().map(|(_, c)| c.norm()).sum();
    let weight = r.abs();

    let mut m_trunc = 64u32;
    loop {
        let grams: Vec<Gram> = (0..d)
            .map(|j| Gram::new(shifts[j], &occupations[j], weight, m_trunc))
            .collect();
        let mut s = C64::new(0.0, 0.0);
        for (alpha, ua) in u.coeffs() {
            for (beta, ub) in u.coeffs() {
                let mut g = C64::new(1.0, 0.0);
                for (j, gram) in grams.iter().enumerate() {
                    g *= gram.get(alpha.get(j), beta.get(j));
                }
                s += ua.conj() * ub * g;
            }
        }
        let value = s.re.max(0.0);
        let tail = d as f64 * weight.powi(2 * (m_trunc as i32 + 1)) * l1 * l1;
        if weight == 0.0 || tail <= 1e-16 * value || m_trunc >= MAX_TRUNCATION {
            return prefactor * value.sqrt();
        }
        m_trunc *= 2;
    }
}

/// `G(m, m') = Σ_{k <= M} ρ^{2k} conj(D(k, m)) D(k, m')` for one coordinate,
/// with `D(k, m) = ⟨k| D(γ) |m⟩`.
struct Gram {
    index: HashMap<u32, usize>,
    values: Vec<C64>,
}

impl Gram {
    fn new(gamma: C64, occupations: &[u32], rho: f64, m_trunc: u32) -> Gram {
        let q = occupations.len();
        let index: HashMap<u32, usize> = occupations.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let top = occupations.iter().copied().max().unwrap_or(0).max(m_trunc);
        let ln_fact = ln_factorials(top);
        let mut values = vec![C64::new(0.0, 0.0); q * q];
        let mut column = vec![C64::new(0.0, 0.0); q];
        let mut rho_pow = 1.0;
        for k in 0..=m_trunc {
            for (i, &m) in occupations.iter().enumerate() {
                column[i] = displacement_element(gamma, k, m, &ln_fact);
            }
            let w = rho_pow * rho_pow;
            for a in 0..q {
                if column[a] == C64::new(0.0, 0.0) {
                    continue;
                }
                let ca = column[a].conj() * w;
                for b in 0..q {
                    values[a * q + b] += ca * column[b];
                }
            }
            rho_pow *= rho;
            if rho_pow == 0.0 {
                break;
            }
        }
        Gram { index, values }
    }

    fn get(&self, m: u32, mp: u32) -> C64 {
        let q = self.index.len();
        self.values[self.index[&m] * q + self.index[&mp]]
    }
}

fn ln_factorials(n: u32) -> Vec<f64> {
    let mut out = vec![0.0; n as usize + 1];
    for k in 1..=n as usize {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

/// `⟨k| D(γ) |m⟩` for the displacement `D(γ) = exp(γ a† - conj(γ) a)`.
pub fn displacement_element(gamma: C64, k: u32, m: u32, ln_fact: &[f64]) -> C64 {
    let x = gamma.norm_sqr();
    if x == 0.0 {
        return if k == m { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
    }
    let (low, high, base) = if k >= m { (m, k, gamma) } else { (k, m, -gamma.conj()) };
    let a = high - low;
    let (sign, ln_l) = ln_laguerre(low, a as f64, x);
    if sign == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let ln_mag = 0.5 * (ln_fact[low as usize] - ln_fact[high as usize]) + a as f64 * base.norm().ln()
        - 0.5 * x
        + ln_l;
    if ln_mag < -745.0 {
        return C64::new(0.0, 0.0);
    }
    C64::from_polar(sign * ln_mag.exp(), a as f64 * base.arg())
}

/// `(sign, ln |L_n^{(a)}(x)|)` by the three-term recurrence with rescaling.
fn ln_laguerre(n: u32, a: f64, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut cur = 1.0 + a - x;
    let mut ln_scale = 0.0;
    for i in 1..n {
        let fi = i as f64;
        let next = ((2.0 * fi + 1.0 + a - x) * cur - (fi + a) * prev) / (fi + 1.0);
        prev = cur;
        cur = next;
        let mag = cur.abs().max(prev.abs());
        if mag > 1e100 || (mag < 1e-100 && mag > 0.0) {
            cur /= mag;
            prev /= mag;
            ln_scale += mag.ln();
        }
    }
    if cur == 0.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    (cur.signum(), cur.abs().ln() + ln_scale)
}

/// The Moyal square `a # a` of a bump, again a bump: amplitude
/// `amp² (1 + λ²)^{-d}` and squared width `w²/2 + h²/(2w²)`.
pub fn bump_square(a: &BumpSymbol, hbar: f64) -> BumpSymbol {
    let w2 = a.width() * a.width();
    let lambda = hbar / w2;
    let width = (w2 / 2.0 + hbar * hbar / (2.0 * w2)).sqrt();
    let amplitude = a.amplitude().powi(2) * (1.0 + lambda * lambda).powi(-(a.dim() as i32));
    BumpSymbol::new(a.center().clone(), width, amplitude).expect("positive width")
}

/// `√⟨(a # a)^w u, u⟩` by phase-space quadrature; an independent check of
/// [`microlocal_norm`] valid down to the quadrature's absolute accuracy.
pub fn microlocal_norm_by_quadrature(a: &BumpSymbol, u: &FockState, spec: &QuadratureSpec) -> Result<f64> {
    check_preconditions(a, u)?;
    let sq = Symbol::Bump(bump_square(a, u.hbar()));
    let v = quadrature_expectation(&sq, u, u, spec)?;
    Ok(v.re.max(0.0).sqrt())
}
