//! Quantized ortho-symplectic maps on fixed oscillator levels.
//!
//! If `V` is the complex action of `g` (see
//! [`OrthoSymplectic::complex_action`]), the quantization `T` of `g` moves
//! normalized creation operators by `T a_j† T* = Σ_k V_kj a_k†` and fixes
//! the vacuum. Levels are preserved, so on each level `T` is the `n`-th
//! symmetric power of `V`. In particular the transported reference state has
//! amplitudes `√(n!/α!) Π_j V_{j1}^{α_j}`.

use std::ops::Deref;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{
    hbar_schedule, inner_product, ladder_apply, FockState, Ladder, MultiIndex,
};
use crate::symplectic::OrthoSymplectic;
use crate::weyl::{weyl_apply, Symbol};

/// Amplitudes below this are dropped from transported states.
const LOG_UNDERFLOW: f64 = -745.0;

/// A transported reference state together with its level and group element.
#[derive(Clone, Debug)]
pub struct TransportedState {
    state: FockState,
    level: u32,
    source: OrthoSymplectic,
}

impl TransportedState {
    pub fn state(&self) -> &FockState {
        &self.state
    }

    pub fn into_state(self) -> FockState {
        self.state
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn source(&self) -> &OrthoSymplectic {
        &self.source
    }
}

impl Deref for TransportedState {
    type Target = FockState;

    fn deref(&self) -> &FockState {
        &self.state
    }
}

/// `f_n^g = T f_n` at `h_n = 1/(2n + d)`.
pub fn transport_reference(n: u32, g: &OrthoSymplectic) -> TransportedState {
    transport_reference_with_hbar(n, g, hbar_schedule(n, g.dim()))
}

/// [`transport_reference`] tagged with an arbitrary `h`.
pub fn transport_reference_with_hbar(n: u32, g: &OrthoSymplectic, hbar: f64) -> TransportedState {
    let d = g.dim();
    let column: Vec<C64> = g.complex_action().column(0).iter().copied().collect();
    let support: Vec<usize> = (0..d).filter(|&j| column[j] != C64::new(0.0, 0.0)).collect();
    let mut state = FockState::new(d, hbar).expect("valid dimension and hbar");
    let ln_fact = LogFactorials::new(n);
    let powers: Vec<Vec<C64>> = if n <= 170 {
        column
            .iter()
            .map(|c| {
                let mut p = vec![C64::new(1.0, 0.0); n as usize + 1];
                for k in 1..=n as usize {
                    p[k] = p[k - 1] * c;
                }
                p
            })
            .collect()
    } else {
        Vec::new()
    };
    let mut exps = vec![0u32; support.len()];
    for_each_composition(&mut exps, 0, n, &mut |exps| {
        let mut entries = vec![0u32; d];
        for (&j, &e) in support.iter().zip(exps.iter()) {
            entries[j] = e;
        }
        let amp = if n <= 170 {
            let mut denom = 1.0;
            let mut z = C64::new(1.0, 0.0);
            for (&j, &e) in support.iter().zip(exps.iter()) {
                denom *= ln_fact.exact(e);
                z *= powers[j][e as usize];
            }
            z * (ln_fact.exact(n) / denom).sqrt()
        } else {
            let mut log_mag = 0.5 * ln_fact.ln(n);
            let mut phase = 0.0;
            for (&j, &e) in support.iter().zip(exps.iter()) {
                log_mag += -0.5 * ln_fact.ln(e) + e as f64 * column[j].norm().ln();
                phase += e as f64 * column[j].arg();
            }
            if log_mag < LOG_UNDERFLOW {
                C64::new(0.0, 0.0)
            } else {
                C64::from_polar(log_mag.exp(), phase)
            }
        };
        if amp != C64::new(0.0, 0.0) {
            state.add_coeff_unchecked(MultiIndex::new(entries), amp);
        }
    });
    TransportedState { state, level: n, source: g.clone() }
}

fn for_each_composition(exps: &mut [u32], pos: usize, remaining: u32, f: &mut impl FnMut(&[u32])) {
    if exps.is_empty() {
        return;
    }
    if pos == exps.len() - 1 {
        exps[pos] = remaining;
        f(exps);
        return;
    }
    for first in (0..=remaining).rev() {
        exps[pos] = first;
        for_each_composition(exps, pos + 1, remaining - first, f);
    }
}

/// `k!` as a float for small `k` and `ln k!` by summation for all `k <= n`.
struct LogFactorials {
    ln: Vec<f64>,
    exact: Vec<f64>,
}

impl LogFactorials {
    fn new(n: u32) -> Self {
        let mut ln = vec![0.0; n as usize + 1];
        for k in 1..=n as usize {
            ln[k] = ln[k - 1] + (k as f64).ln();
        }
        let top = n.min(170) as usize;
        let mut exact = vec![1.0; top + 1];
        for k in 1..=top {
            exact[k] = exact[k - 1] * k as f64;
        }
        LogFactorials { ln, exact }
    }

    fn ln(&self, k: u32) -> f64 {
        self.ln[k as usize]
    }

    fn exact(&self, k: u32) -> f64 {
        self.exact[k as usize]
    }
}

/// `T u` for an arbitrary finite state `u`.
///
/// Each basis vector `|α⟩ = Π_j (a_j†)^{α_j} / √(α_j!) |0⟩` is mapped by
/// replacing every `a_j†` with `Σ_k V_kj a_k†`.
pub fn metaplectic_apply(g: &OrthoSymplectic, u: &FockState) -> Result<FockState> {
    let d = u.dim();
    if g.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: g.dim() });
    }
    let v = g.complex_action();
    // a† = A*/√(2h) in this basis
    let unit = C64::new(1.0 / (2.0 * u.hbar()).sqrt(), 0.0);
    let mut out = FockState::new(d, u.hbar())?;
    for (alpha, c) in u.coeffs() {
        let mut image = FockState::vacuum(d, u.hbar())?;
        for j in 0..d {
            for m in 1..=alpha.get(j) {
                let mut next = FockState::new(d, u.hbar())?;
                for k in 0..d {
                    if v[(k, j)] == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let raised = ladder_apply(Ladder::Creation, k, &image)?;
                    next.axpy(v[(k, j)] * unit, &raised)?;
                }
                image = next.scaled(C64::new(1.0 / (m as f64).sqrt(), 0.0));
            }
        }
        out.axpy(*c, &image)?;
    }
    Ok(out.pruned())
}

/// `‖p^w u - u‖` with `p^w = Σ_j (A_j* A_j + h)` applied through the ladder
/// operators. `A_j* A_j` maps `|α⟩` back onto itself, so the lowering and
/// raising factors are composed per basis vector instead of materializing
/// the intermediate states; the floating-point operations are the same.
pub fn verify_eigen(state: &FockState) -> f64 {
    let two_h = 2.0 * state.hbar();
    let h = C64::new(state.hbar(), 0.0);
    let mut sum = 0.0;
    for (alpha, c) in state.coeffs() {
        let mut r = -c;
        for &k in alpha.entries() {
            if k > 0 {
                let lowered = c * (two_h * k as f64).sqrt();
                r += lowered * (two_h * k as f64).sqrt();
            }
            r += h * c;
        }
        sum += r.norm_sqr();
    }
    sum.sqrt()
}

/// `(⟨a^w T u, T v⟩, ⟨(a∘g)^w u, v⟩)`; the two agree when `T` quantizes `g`.
pub fn covariance_check(
    symbol: &Symbol,
    g: &OrthoSymplectic,
    u: &FockState,
    v: &FockState,
) -> Result<(C64, C64)> {
    let a = symbol.as_poly()?;
    u.check_compatible(v)?;
    if a.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: a.dim() });
    }
    let tu = metaplectic_apply(g, u)?;
    let tv = metaplectic_apply(g, v)?;
    let conjugated = inner_product(&weyl_apply(a, &tu)?, &tv)?;
    let pulled_back = a.compose_linear(&g.complex_action());
    let substituted = inner_product(&weyl_apply(&pulled_back, u)?, v)?;
    Ok((conjugated, substituted))
}
