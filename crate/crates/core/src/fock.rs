//! Fock basis of the d-dimensional harmonic oscillator in semiclassical scaling.
//!
//! With `A = h∂ + x` and `A* = -h∂ + x` one has `[A, A*] = 2h`, so on the
//! normalized basis
//!
//! ```text
//! A*|n⟩ = √(2h(n+1)) |n+1⟩        A|n⟩ = √(2hn) |n-1⟩
//! ```
//!
//! and `-h²Δ + |x|²` acts on `|α⟩` as `(2|α| + d) h`. States are finite maps
//! from multi-indices to complex amplitudes; every state carries the `h` it
//! was built for, because the ladder factors depend on it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Relative tolerance used to decide whether two states share the same `h`.
const HBAR_REL_TOL: f64 = 1e-14;

/// Occupation numbers `(α_1, …, α_d)` of a d-dimensional Fock basis vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// `n` quanta in coordinate `j`, none elsewhere.
    pub fn unit(dim: usize, j: usize, n: u32) -> Self {
        let mut entries = vec![0; dim];
        entries[j] = n;
        MultiIndex(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, j: usize) -> u32 {
        self.0[j]
    }

    /// Total number of quanta `|α|`.
    pub fn level(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Componentwise `self + other`.
    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise `self + raise - lower`, or `None` if an entry goes negative.
    pub fn shifted(&self, raise: &MultiIndex, lower: &MultiIndex) -> Option<MultiIndex> {
        let mut out = Vec::with_capacity(self.0.len());
        for ((&a, &r), &l) in self.0.iter().zip(&raise.0).zip(&lower.0) {
            out.push((a + r).checked_sub(l)?);
        }
        Some(MultiIndex(out))
    }

    /// All multi-indices of the given level, in descending lexicographic order:
    /// `(n,0,…)`, `(n-1,1,…)`, …, `(…,0,n)`.
    pub fn with_level(dim: usize, level: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut current = vec![0u32; dim];
        fill_compositions(&mut current, 0, level, &mut out);
        out
    }

    /// All multi-indices with `|α| <= max_level`, graded by level then
    /// descending lexicographic within a level.
    pub fn up_to_level(dim: usize, max_level: u32) -> Vec<MultiIndex> {
        (0..=max_level)
            .flat_map(|l| MultiIndex::with_level(dim, l))
            .collect()
    }
}

fn fill_compositions(current: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    let dim = current.len();
    if dim == 0 {
        if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if pos == dim - 1 {
        current[pos] = remaining;
        out.push(MultiIndex(current.clone()));
        return;
    }
    for first in (0..=remaining).rev() {
        current[pos] = first;
        fill_compositions(current, pos + 1, remaining - first, out);
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, a) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// `h_n = 1/(2n + d)`, the value at which the level-n eigenvalue is exactly 1.
pub fn hbar_schedule(n: u32, d: usize) -> f64 {
    1.0 / (2.0 * n as f64 + d as f64)
}

/// Planck-parameter schedule with an optional additive perturbation.
///
/// The perturbation exists only for robustness experiments; with `slack = 0`
/// this is exactly [`hbar_schedule`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanckSchedule {
    dim: usize,
    slack: f64,
}

impl PlanckSchedule {
    pub fn new(dim: usize) -> Self {
        PlanckSchedule { dim, slack: 0.0 }
    }

    pub fn with_slack(dim: usize, slack: f64) -> Self {
        PlanckSchedule { dim, slack }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn slack(&self) -> f64 {
        self.slack
    }

    pub fn hbar(&self, n: u32) -> f64 {
        hbar_schedule(n, self.dim) + self.slack
    }
}

/// Oscillator eigenvalue `(2|α| + d) h` of the basis vector `|α⟩`.
pub fn eigenvalue(alpha: &MultiIndex, h: f64) -> f64 {
    (2.0 * alpha.level() as f64 + alpha.dim() as f64) * h
}

/// Value at `x` of the L²-normalized eigenfunction `v_n^h`.
///
/// Uses the three-term recurrence on normalized functions with a running
/// logarithmic scale, so large `n` neither overflows nor loses the Gaussian
/// factor. Values below the double-precision range are returned as 0.
pub fn hermite_eval(n: u32, h: f64, x: f64) -> f64 {
    let mut last = 0.0;
    hermite_recurrence(n, h, x, |_, v| last = v);
    last
}

/// `v_0^h(x), …, v_{n_max}^h(x)` in one pass of the recurrence.
pub fn hermite_eval_all(n_max: u32, h: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max as usize + 1);
    hermite_recurrence(n_max, h, x, |_, v| out.push(v));
    out
}

fn hermite_recurrence(n_max: u32, h: f64, x: f64, mut sink: impl FnMut(u32, f64)) {
    assert!(h > 0.0, "hermite_eval requires h > 0");
    let t = x / h.sqrt();
    if !(t.abs() < 1e100) {
        for k in 0..=n_max {
            sink(k, 0.0);
        }
        return;
    }
    // v_k = mantissa_k * exp(log_scale)
    let mut log_scale = -0.5 * t * t - 0.25 * std::f64::consts::PI.ln() - 0.25 * h.ln();
    let mut prev = 0.0;
    let mut cur = 1.0;
    sink(0, cur * log_scale.exp());
    for k in 0..n_max {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * t * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        let mag = cur.abs();
        if mag > 1e100 {
            prev /= mag;
            cur /= mag;
            log_scale += mag.ln();
        }
        sink(k + 1, cur * log_scale.exp());
    }
}

/// Creation (`A*`) or annihilation (`A`) ladder operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Creation,
    Annihilation,
}

/// Finite superposition of Fock basis vectors at a fixed semiclassical parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    dim: usize,
    hbar: f64,
    coeffs: BTreeMap<MultiIndex, C64>,
}

impl FockState {
    /// The zero state.
    pub fn new(dim: usize, hbar: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        Ok(FockState { dim, hbar, coeffs: BTreeMap::new() })
    }

    /// The normalized basis vector `|α⟩`.
    pub fn basis(alpha: MultiIndex, hbar: f64) -> Result<Self> {
        let mut s = FockState::new(alpha.dim(), hbar)?;
        s.coeffs.insert(alpha, C64::new(1.0, 0.0));
        Ok(s)
    }

    pub fn vacuum(dim: usize, hbar: f64) -> Result<Self> {
        FockState::basis(MultiIndex::zeros(dim), hbar)
    }

    pub fn from_coeffs(
        dim: usize,
        hbar: f64,
        coeffs: impl IntoIterator<Item = (MultiIndex, C64)>,
    ) -> Result<Self> {
        let mut s = FockState::new(dim, hbar)?;
        for (alpha, c) in coeffs {
            s.add_coeff(alpha, c)?;
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Same amplitudes, relabelled with another semiclassical parameter.
    pub fn with_hbar(&self, hbar: f64) -> Result<Self> {
        let mut s = FockState::new(self.dim, hbar)?;
        s.coeffs = self.coeffs.clone();
        Ok(s)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&MultiIndex, &C64)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> C64 {
        self.coeffs.get(alpha).copied().unwrap_or_default()
    }

    /// Number of stored amplitudes.
    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| *c == C64::new(0.0, 0.0))
    }

    /// Adds `c` to the amplitude of `|α⟩`.
    pub fn add_coeff(&mut self, alpha: MultiIndex, c: C64) -> Result<()> {
        if alpha.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: alpha.dim() });
        }
        *self.coeffs.entry(alpha).or_default() += c;
        Ok(())
    }

    pub(crate) fn add_coeff_unchecked(&mut self, alpha: MultiIndex, c: C64) {
        *self.coeffs.entry(alpha).or_default() += c;
    }

    /// `self += c · other`.
    pub fn axpy(&mut self, c: C64, other: &FockState) -> Result<()> {
        self.check_compatible(other)?;
        for (alpha, v) in &other.coeffs {
            *self.coeffs.entry(alpha.clone()).or_default() += c * v;
        }
        Ok(())
    }

    pub fn scaled(&self, c: C64) -> FockState {
        FockState {
            dim: self.dim,
            hbar: self.hbar,
            coeffs: self.coeffs.iter().map(|(a, v)| (a.clone(), v * c)).collect(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<FockState> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= 1e-12
    }

    /// Levels carrying a nonzero amplitude.
    pub fn levels(&self) -> BTreeSet<u32> {
        self.coeffs
            .iter()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(a, _)| a.level())
            .collect()
    }

    /// `Some(n)` when every nonzero amplitude sits on level `n`.
    pub fn homogeneous_level(&self) -> Option<u32> {
        let levels = self.levels();
        if levels.len() == 1 {
            levels.into_iter().next()
        } else {
            None
        }
    }

    /// Largest occupation number of any coordinate in the support.
    pub fn max_occupation(&self) -> u32 {
        self.coeffs.keys().flat_map(|a| a.entries().iter().copied()).max().unwrap_or(0)
    }

    /// Drops amplitudes that are exactly zero.
    pub fn pruned(mut self) -> FockState {
        self.coeffs.retain(|_, c| *c != C64::new(0.0, 0.0));
        self
    }

    pub(crate) fn check_compatible(&self, other: &FockState) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        if !same_hbar(self.hbar, other.hbar) {
            return Err(Error::HbarMismatch { left: self.hbar, right: other.hbar });
        }
        Ok(())
    }
}

pub(crate) fn same_hbar(a: f64, b: f64) -> bool {
    (a - b).abs() <= HBAR_REL_TOL * a.abs().max(b.abs())
}

/// `⟨u, v⟩ = Σ_α u_α conj(v_α)`: linear in `u`, conjugate-linear in `v`.
pub fn inner_product(u: &FockState, v: &FockState) -> Result<C64> {
    u.check_compatible(v)?;
    let (small, large, conj_small) = if u.coeffs.len() <= v.coeffs.len() {
        (u, v, false)
    } else {
        (v, u, true)
    };
    let mut acc = C64::new(0.0, 0.0);
    for (alpha, a) in &small.coeffs {
        if let Some(b) = large.coeffs.get(alpha) {
            acc += if conj_small { b * a.conj() } else { a * b.conj() };
        }
    }
    Ok(acc)
}

/// Applies a creation or annihilation operator on coordinate `coordinate`
/// (0-based).
pub fn ladder_apply(kind: Ladder, coordinate: usize, state: &FockState) -> Result<FockState> {
    if coordinate >= state.dim {
        return Err(Error::CoordinateOutOfRange { coordinate, dim: state.dim });
    }
    let two_h = 2.0 * state.hbar;
    let mut out = FockState::new(state.dim, state.hbar)?;
    for (alpha, c) in &state.coeffs {
        let k = alpha.get(coordinate);
        let mut entries = alpha.entries().to_vec();
        let factor = match kind {
            Ladder::Creation => {
                entries[coordinate] = k + 1;
                (two_h * (k + 1) as f64).sqrt()
            }
            Ladder::Annihilation => {
                if k == 0 {
                    continue;
                }
                entries[coordinate] = k - 1;
                (two_h * k as f64).sqrt()
            }
        };
        out.add_coeff_unchecked(MultiIndex(entries), c * factor);
    }
    Ok(out)
}

/// `f_n = v_n ⊗ v_0 ⊗ … ⊗ v_0` at `h_n = 1/(2n + d)`.
pub fn reference_state(n: u32, d: usize) -> FockState {
    reference_state_with_hbar(n, d, hbar_schedule(n, d))
}

/// [`reference_state`] tagged with an arbitrary semiclassical parameter.
pub fn reference_state_with_hbar(n: u32, d: usize, hbar: f64) -> FockState {
    FockState::basis(MultiIndex::unit(d, 0, n), hbar).expect("d >= 1 and hbar > 0")
}
