//! Weyl quantization of polynomial symbols in `w = x + iξ` and `conj(w)`.
//!
//! Per coordinate, `w` quantizes to `A` and `conj(w)` to `A*`; a monomial
//! `conj(w)^β w^γ` quantizes to the average of all words with `β` factors
//! `A*` and `γ` factors `A`. Multiplying a Weyl-ordered operator by a linear
//! symbol is the Jordan product `(L b^w + b^w L)/2`, which gives the
//! degree-by-degree recursion used here:
//!
//! ```text
//! A*·N(j,k) ↦ N(j+1,k) + h k N(j,k-1)      A·N(j,k) ↦ N(j,k+1) + h j N(j-1,k)
//! ```
//!
//! with `N(j,k) = A*^j A^k` in normal order. Each monomial maps a basis
//! vector to a single basis vector, shifted by `β - γ`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{inner_product, ladder_apply, FockState, Ladder, MultiIndex};
use crate::symplectic::PhasePoint;

/// `Σ c_{βγ} Π_j conj(w_j)^{β_j} w_j^{γ_j}`, keyed by `(β, γ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySymbol {
    dim: usize,
    terms: BTreeMap<(MultiIndex, MultiIndex), C64>,
}

impl PolySymbol {
    /// The zero symbol.
    pub fn zero(dim: usize) -> Self {
        PolySymbol { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: C64) -> Self {
        PolySymbol::monomial(MultiIndex::zeros(dim), MultiIndex::zeros(dim), c)
    }

    /// `c · conj(w)^β w^γ`.
    pub fn monomial(beta: MultiIndex, gamma: MultiIndex, c: C64) -> Self {
        assert_eq!(beta.dim(), gamma.dim(), "monomial exponents of different dimension");
        let dim = beta.dim();
        let mut terms = BTreeMap::new();
        if c != C64::new(0.0, 0.0) {
            terms.insert((beta, gamma), c);
        }
        PolySymbol { dim, terms }
    }

    /// `w_j` (0-based).
    pub fn w(dim: usize, j: usize) -> Self {
        PolySymbol::monomial(MultiIndex::zeros(dim), MultiIndex::unit(dim, j, 1), C64::new(1.0, 0.0))
    }

    /// `conj(w_j)` (0-based).
    pub fn w_bar(dim: usize, j: usize) -> Self {
        PolySymbol::monomial(MultiIndex::unit(dim, j, 1), MultiIndex::zeros(dim), C64::new(1.0, 0.0))
    }

    /// `|w_j|²`.
    pub fn abs_sqr(dim: usize, j: usize) -> Self {
        let e = MultiIndex::unit(dim, j, 1);
        PolySymbol::monomial(e.clone(), e, C64::new(1.0, 0.0))
    }

    /// `p = |x|² + |ξ|² = Σ_j |w_j|²`.
    pub fn energy(dim: usize) -> Self {
        (0..dim).fold(PolySymbol::zero(dim), |acc, j| acc.add(&PolySymbol::abs_sqr(dim, j)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(MultiIndex, MultiIndex), &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `max |β| + |γ|` over the terms; 0 for the zero symbol.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(b, g)| b.level() + g.level()).max().unwrap_or(0)
    }

    /// Largest total exponent in any single coordinate.
    pub fn coordinate_degree(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|(b, g)| b.entries().iter().zip(g.entries()).map(|(x, y)| x + y))
            .max()
            .unwrap_or(0)
    }

    fn add_term(&mut self, key: (MultiIndex, MultiIndex), c: C64) {
        let entry = self.terms.entry(key.clone()).or_default();
        *entry += c;
        if *entry == C64::new(0.0, 0.0) {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &PolySymbol) -> PolySymbol {
        assert_eq!(self.dim, other.dim, "adding symbols of different dimension");
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), *c);
        }
        out
    }

    pub fn scale(&self, c: C64) -> PolySymbol {
        let mut out = PolySymbol::zero(self.dim);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v * c);
        }
        out
    }

    /// Pointwise product.
    pub fn mul(&self, other: &PolySymbol) -> PolySymbol {
        assert_eq!(self.dim, other.dim, "multiplying symbols of different dimension");
        let mut out = PolySymbol::zero(self.dim);
        for ((b1, g1), c1) in &self.terms {
            for ((b2, g2), c2) in &other.terms {
                out.add_term((b1.plus(b2), g1.plus(g2)), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> PolySymbol {
        (0..k).fold(PolySymbol::constant(self.dim, C64::new(1.0, 0.0)), |acc, _| acc.mul(self))
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> PolySymbol {
        let mut out = PolySymbol::zero(self.dim);
        for ((b, g), c) in &self.terms {
            out.add_term((g.clone(), b.clone()), c.conj());
        }
        out
    }

    /// `(a + conj(a)) / 2`.
    pub fn real_part(&self) -> PolySymbol {
        self.add(&self.conj()).scale(C64::new(0.5, 0.0))
    }

    /// Whether `c_{γβ} = conj(c_{βγ})` within `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.terms.iter().all(|((b, g), c)| {
            let mirror = self.terms.get(&(g.clone(), b.clone())).copied().unwrap_or_default();
            (mirror - c.conj()).norm() <= tol
        })
    }

    /// Value at the complex point `w`.
    pub fn eval(&self, w: &[C64]) -> C64 {
        assert_eq!(w.len(), self.dim, "evaluation point of wrong dimension");
        self.terms
            .iter()
            .map(|((b, g), c)| {
                let mut v = *c;
                for j in 0..self.dim {
                    v *= w[j].conj().powu(b.get(j)) * w[j].powu(g.get(j));
                }
                v
            })
            .sum()
    }

    pub fn eval_point(&self, z: &PhasePoint) -> C64 {
        let w: Vec<C64> = z.to_complex().iter().copied().collect();
        self.eval(&w)
    }

    /// The symbol `w ↦ a(V w)`.
    pub fn compose_linear(&self, v: &DMatrix<C64>) -> PolySymbol {
        assert_eq!(v.nrows(), self.dim, "substitution matrix of wrong size");
        let d = self.dim;
        let images: Vec<PolySymbol> = (0..d)
            .map(|j| {
                (0..d).fold(PolySymbol::zero(d), |acc, k| acc.add(&PolySymbol::w(d, k).scale(v[(j, k)])))
            })
            .collect();
        let conj_images: Vec<PolySymbol> = images.iter().map(PolySymbol::conj).collect();
        let mut out = PolySymbol::zero(d);
        for ((b, g), c) in &self.terms {
            let mut t = PolySymbol::constant(d, *c);
            for j in 0..d {
                t = t.mul(&conj_images[j].pow(b.get(j))).mul(&images[j].pow(g.get(j)));
            }
            out = out.add(&t);
        }
        out
    }

    /// The symbol transported by the flow, `a ∘ flow(t)`, i.e. `w ↦ a(e^{-2it} w)`.
    pub fn compose_flow(&self, t: f64) -> PolySymbol {
        let ph = C64::from_polar(1.0, -2.0 * t);
        let mut out = PolySymbol::zero(self.dim);
        for ((b, g), c) in &self.terms {
            let shift = g.level() as i32 - b.level() as i32;
            out.add_term((b.clone(), g.clone()), c * ph.powi(shift));
        }
        out
    }
}

impl fmt::Display for PolySymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, ((b, g), c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}{:+}i)*wbar^{}*w^{}", c.re, c.im, b, g)?;
        }
        Ok(())
    }
}

/// `amplitude · exp(-|z - center|² / width²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BumpSymbol {
    center: PhasePoint,
    width: f64,
    amplitude: f64,
}

impl BumpSymbol {
    pub fn new(center: PhasePoint, width: f64, amplitude: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidParameter(format!("bump width must be positive, got {width}")));
        }
        if !amplitude.is_finite() {
            return Err(Error::InvalidParameter("bump amplitude must be finite".into()));
        }
        Ok(BumpSymbol { center, width, amplitude })
    }

    pub fn center(&self) -> &PhasePoint {
        &self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn scaled(&self, s: f64) -> BumpSymbol {
        BumpSymbol { amplitude: self.amplitude * s, ..self.clone() }
    }

    pub fn eval_point(&self, z: &PhasePoint) -> f64 {
        self.amplitude * (-z.distance(&self.center).powi(2) / (self.width * self.width)).exp()
    }
}

/// Any symbol accepted by the quadrature path.
#[derive(Clone, Debug, PartialEq)]
pub enum Symbol {
    Poly(PolySymbol),
    Bump(BumpSymbol),
}

impl Symbol {
    pub fn dim(&self) -> usize {
        match self {
            Symbol::Poly(a) => a.dim(),
            Symbol::Bump(b) => b.dim(),
        }
    }

    pub fn as_poly(&self) -> Result<&PolySymbol> {
        match self {
            Symbol::Poly(a) => Ok(a),
            Symbol::Bump(_) => Err(Error::InvalidParameter(
                "operation requires a polynomial symbol".into(),
            )),
        }
    }
}

impl From<PolySymbol> for Symbol {
    fn from(a: PolySymbol) -> Self {
        Symbol::Poly(a)
    }
}

impl From<BumpSymbol> for Symbol {
    fn from(b: BumpSymbol) -> Self {
        Symbol::Bump(b)
    }
}

/// Normal-order expansion of the Weyl quantization of `conj(w)^β w^γ` in one
/// coordinate: entries `(j, k, c, p)` meaning `c h^p A*^j A^k`.
pub fn normal_order(beta: u32, gamma: u32) -> Vec<(u32, u32, f64, u32)> {
    let mut cur: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    cur.insert((0, 0), 1.0);
    for _ in 0..beta {
        let mut next = BTreeMap::new();
        for (&(j, k), &c) in &cur {
            *next.entry((j + 1, k)).or_insert(0.0) += c;
            if k > 0 {
                *next.entry((j, k - 1)).or_insert(0.0) += c * k as f64;
            }
        }
        cur = next;
    }
    for _ in 0..gamma {
        let mut next = BTreeMap::new();
        for (&(j, k), &c) in &cur {
            *next.entry((j, k + 1)).or_insert(0.0) += c;
            if j > 0 {
                *next.entry((j - 1, k)).or_insert(0.0) += c * j as f64;
            }
        }
        cur = next;
    }
    cur.into_iter()
        .map(|((j, k), c)| (j, k, c, (beta + gamma - j - k) / 2))
        .collect()
}

/// `A*^j A^k |m⟩ = (2h)^{(j+k)/2} s |m - k + j⟩`; returns `s`, which is an
/// integer when `j = k`.
fn ladder_word_scalar(j: u32, k: u32, m: u32) -> f64 {
    if k > m {
        return 0.0;
    }
    let lowered: f64 = (0..k).map(|i| (m - i) as f64).product();
    if j == k {
        return lowered;
    }
    let raised: f64 = (1..=j).map(|i| (m - k + i) as f64).product();
    (lowered * raised).sqrt()
}

/// Ladder words `(A*)^j A^k` with their scaled coefficients.
type WordList = Vec<(u32, u32, f64)>;

/// Per-coordinate Weyl-ordered monomials at a fixed `h`, memoized.
#[derive(Debug)]
pub struct WeylTable {
    hbar: f64,
    orders: HashMap<(u32, u32), WordList>,
}

impl WeylTable {
    pub fn new(hbar: f64) -> Self {
        WeylTable { hbar, orders: HashMap::new() }
    }

    /// `s` such that `(conj(w)^β w^γ)^w |m⟩ = s |m + β - γ⟩`.
    ///
    /// Every normal-ordered term carries the same power `h^{(β+γ)/2}`, which
    /// is factored out; on the diagonal the remaining sum is an exact integer.
    pub fn scalar(&mut self, beta: u32, gamma: u32, m: u32) -> f64 {
        if m + beta < gamma {
            return 0.0;
        }
        let terms = self.orders.entry((beta, gamma)).or_insert_with(|| {
            normal_order(beta, gamma)
                .into_iter()
                .map(|(j, k, c, _)| (j, k, c * 2f64.powi(((j + k) / 2) as i32)))
                .collect()
        });
        let sum: f64 = terms
            .iter()
            .map(|&(j, k, c)| {
                let odd = if (j + k) % 2 == 1 { std::f64::consts::SQRT_2 } else { 1.0 };
                c * odd * ladder_word_scalar(j, k, m)
            })
            .sum();
        let half = beta + gamma;
        let mut power = self.hbar.powi((half / 2) as i32);
        if half % 2 == 1 {
            power *= self.hbar.sqrt();
        }
        sum * power
    }
}

/// `a^w(x, hD) u`, with `h` taken from the state.
pub fn weyl_apply(a: &PolySymbol, u: &FockState) -> Result<FockState> {
    if a.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: a.dim() });
    }
    let mut table = WeylTable::new(u.hbar());
    let mut out = FockState::new(u.dim(), u.hbar())?;
    for ((beta, gamma), c) in a.terms() {
        for (alpha, x) in u.coeffs() {
            let Some(target) = alpha.shifted(beta, gamma) else { continue };
            let mut s = 1.0;
            for j in 0..u.dim() {
                if beta.get(j) == 0 && gamma.get(j) == 0 {
                    continue;
                }
                s *= table.scalar(beta.get(j), gamma.get(j), alpha.get(j));
                if s == 0.0 {
                    break;
                }
            }
            if s != 0.0 {
                out.add_coeff_unchecked(target, c * x * s);
            }
        }
    }
    Ok(out.pruned())
}

/// [`weyl_apply`] by averaging over every ordering of the ladder factors.
/// Cost grows like the binomial coefficients of the degree; meant as a
/// reference for low-degree symbols.
pub fn weyl_apply_by_words(a: &PolySymbol, u: &FockState) -> Result<FockState> {
    if a.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: a.dim() });
    }
    let mut out = FockState::new(u.dim(), u.hbar())?;
    for ((beta, gamma), c) in a.terms() {
        let mut part = u.clone();
        for j in 0..u.dim() {
            let words = distinct_words(beta.get(j), gamma.get(j));
            if words.len() == 1 && words[0].is_empty() {
                continue;
            }
            let mut acc = FockState::new(u.dim(), u.hbar())?;
            for word in &words {
                let mut s = part.clone();
                // rightmost factor acts first
                for op in word.iter().rev() {
                    s = ladder_apply(*op, j, &s)?;
                }
                acc.axpy(C64::new(1.0, 0.0), &s)?;
            }
            part = acc.scaled(C64::new(1.0 / words.len() as f64, 0.0));
        }
        out.axpy(*c, &part)?;
    }
    Ok(out.pruned())
}

fn distinct_words(creations: u32, annihilations: u32) -> Vec<Vec<Ladder>> {
    if creations == 0 && annihilations == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    if creations > 0 {
        for mut w in distinct_words(creations - 1, annihilations) {
            w.insert(0, Ladder::Creation);
            out.push(w);
        }
    }
    if annihilations > 0 {
        for mut w in distinct_words(creations, annihilations - 1) {
            w.insert(0, Ladder::Annihilation);
            out.push(w);
        }
    }
    out
}

/// `⟨a^w u, v⟩`.
pub fn expectation(a: &PolySymbol, u: &FockState, v: &FockState) -> Result<C64> {
    u.check_compatible(v)?;
    inner_product(&weyl_apply(a, u)?, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::hbar_schedule;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn binom(n: u32, k: u32) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn normal_order_matches_closed_form() {
        // k! C(β,k) C(γ,k) h^k A*^{β-k} A^{γ-k}
        for beta in 0..7 {
            for gamma in 0..7 {
                let terms = normal_order(beta, gamma);
                assert_eq!(terms.len() as u32, beta.min(gamma) + 1);
                for (j, k, coef, p) in terms {
                    let kk = beta - j;
                    assert_eq!(gamma - k, kk);
                    assert_eq!(p, kk);
                    let fact: f64 = (1..=kk).map(|i| i as f64).product();
                    let expected = fact * binom(beta, kk) * binom(gamma, kk);
                    assert!((coef - expected).abs() < 1e-9 * expected, "{beta} {gamma}");
                }
            }
        }
    }

    #[test]
    fn constant_is_identity() {
        let u = FockState::from_coeffs(
            2,
            0.1,
            [(MultiIndex::new(vec![3, 1]), C64::new(0.3, 0.1)), (MultiIndex::new(vec![0, 4]), c(0.9))],
        )
        .unwrap();
        assert_eq!(weyl_apply(&PolySymbol::constant(2, c(1.0)), &u).unwrap(), u);
    }

    #[test]
    fn energy_acts_as_eigenvalue() {
        let h = 0.13;
        for alpha in MultiIndex::up_to_level(3, 4) {
            let u = FockState::basis(alpha.clone(), h).unwrap();
            let out = weyl_apply(&PolySymbol::energy(3), &u).unwrap();
            let lam = (2.0 * alpha.level() as f64 + 3.0) * h;
            assert_eq!(out.support_len(), 1);
            assert!((out.coeff(&alpha) - c(lam)).norm() < 1e-14);
        }
    }

    #[test]
    fn w_is_annihilation() {
        let h = 0.05;
        for n in 0..10 {
            let u = FockState::basis(MultiIndex::new(vec![n]), h).unwrap();
            let via_symbol = weyl_apply(&PolySymbol::w(1, 0), &u).unwrap();
            let via_ladder = ladder_apply(Ladder::Annihilation, 0, &u).unwrap().pruned();
            assert_eq!(via_symbol.support_len(), via_ladder.support_len());
            for (k, v) in via_ladder.coeffs() {
                assert!((via_symbol.coeff(k) - v).norm() < 1e-15);
            }
            if n > 0 {
                let expected = (2.0 * h * n as f64).sqrt();
                assert!((via_symbol.coeff(&MultiIndex::new(vec![n - 1])) - c(expected)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn quartic_and_sextic_closed_forms() {
        for n in [0u32, 1, 5, 40, 128] {
            let h = hbar_schedule(n, 1);
            let u = FockState::basis(MultiIndex::new(vec![n]), h).unwrap();
            let p = PolySymbol::energy(1);
            let e4 = expectation(&p.pow(2), &u, &u).unwrap();
            let nn = n as f64;
            assert!((e4.re - h * h * ((2.0 * nn + 1.0).powi(2) + 1.0)).abs() < 1e-13);
            assert!((e4.re - (1.0 + h * h)).abs() < 1e-13);
            let e6 = expectation(&p.pow(3), &u, &u).unwrap();
            assert!((e6.re - (1.0 + 5.0 * h * h)).abs() < 1e-13);
            let rew2 = PolySymbol::w(1, 0).pow(2).real_part();
            assert_eq!(expectation(&rew2, &u, &u).unwrap(), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn recursion_matches_word_average() {
        let h = 0.07;
        let mut u = FockState::new(2, h).unwrap();
        for (k, alpha) in MultiIndex::up_to_level(2, 5).into_iter().enumerate() {
            u.add_coeff(alpha, C64::new(0.1 * k as f64, 0.3 - 0.02 * k as f64)).unwrap();
        }
        for beta in MultiIndex::up_to_level(2, 3) {
            for gamma in MultiIndex::up_to_level(2, 3) {
                if beta.level() + gamma.level() > 6 {
                    continue;
                }
                let a = PolySymbol::monomial(beta.clone(), gamma.clone(), C64::new(0.7, -0.2));
                let fast = weyl_apply(&a, &u).unwrap();
                let slow = weyl_apply_by_words(&a, &u).unwrap();
                let mut diff = fast.clone();
                diff.axpy(c(-1.0), &slow).unwrap();
                assert!(diff.norm() < 1e-12 * fast.norm().max(1.0), "{beta} {gamma}");
            }
        }
    }

    #[test]
    fn symbol_algebra() {
        let a = PolySymbol::w(2, 0).add(&PolySymbol::w_bar(2, 1).scale(C64::new(0.0, 2.0)));
        let w = [C64::new(0.3, -0.4), C64::new(1.1, 0.2)];
        assert!((a.eval(&w) - (w[0] + C64::new(0.0, 2.0) * w[1].conj())).norm() < 1e-15);
        let sq = a.mul(&a);
        assert!((sq.eval(&w) - a.eval(&w).powi(2)).norm() < 1e-14);
        assert_eq!(sq.degree(), 2);
        assert!(PolySymbol::energy(3).is_real(0.0));
        assert!(!PolySymbol::w(1, 0).is_real(1e-12));
        assert!(PolySymbol::w(1, 0).real_part().is_real(0.0));
        assert!((a.conj().eval(&w) - a.eval(&w).conj()).norm() < 1e-15);
        let v = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), C64::new(0.0, 1.0), c(0.0)]);
        let vw = [w[1], C64::new(0.0, 1.0) * w[0]];
        assert!((sq.compose_linear(&v).eval(&w) - sq.eval(&vw)).norm() < 1e-14);
        let t = 0.3;
        let fw: Vec<C64> = w.iter().map(|z| z * C64::from_polar(1.0, -2.0 * t)).collect();
        assert!((sq.compose_flow(t).eval(&w) - sq.eval(&fw)).norm() < 1e-14);
    }

    #[test]
    fn bump_validation() {
        let z = PhasePoint::new(vec![0.0], vec![0.0]).unwrap();
        assert!(BumpSymbol::new(z.clone(), 0.0, 1.0).is_err());
        let b = BumpSymbol::new(z.clone(), 0.5, 2.0).unwrap();
        assert_eq!(b.eval_point(&z), 2.0);
        assert!(Symbol::from(b).as_poly().is_err());
    }
}
