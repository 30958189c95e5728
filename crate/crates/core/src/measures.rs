//! Flow-invariant probability measures on the unit sphere.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fock::MultiIndex;
use crate::symplectic::{flow, orbit_through, random_sphere_point, Orbit, PhasePoint, ORBIT_TOL};
use crate::weyl::PolySymbol;

/// Weights of a convex measure must sum to 1 within this tolerance.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// The uniform probability measure on one orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitMeasure {
    orbit: Orbit,
}

impl OrbitMeasure {
    pub fn new(orbit: Orbit) -> Self {
        OrbitMeasure { orbit }
    }

    pub fn orbit(&self) -> &Orbit {
        &self.orbit
    }

    pub fn dim(&self) -> usize {
        self.orbit.dim()
    }
}

/// `Σ λ_i c_i` over pairwise distinct orbits, `λ_i > 0`, `Σ λ_i = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexMeasure {
    dim: usize,
    components: Vec<(f64, OrbitMeasure)>,
}

impl ConvexMeasure {
    pub fn new(components: Vec<(f64, OrbitMeasure)>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::InvalidMeasure("no components".into()));
        };
        let dim = first.1.dim();
        let mut total = 0.0;
        for (i, (w, m)) in components.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::InvalidMeasure(format!(
                    "component {i} has dimension {}, expected {dim}",
                    m.dim()
                )));
            }
            if !(*w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidMeasure(format!("component {i} has weight {w}")));
            }
            total += w;
            for (j, (_, earlier)) in components[..i].iter().enumerate() {
                if earlier.orbit().same_orbit(m.orbit()) {
                    return Err(Error::InvalidMeasure(format!(
                        "components {j} and {i} lie on the same orbit"
                    )));
                }
            }
        }
        if !((total - 1.0).abs() <= WEIGHT_SUM_TOL) {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        Ok(ConvexMeasure { dim, components })
    }

    pub fn single(orbit: Orbit) -> Self {
        ConvexMeasure { dim: orbit.dim(), components: vec![(1.0, OrbitMeasure::new(orbit))] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[(f64, OrbitMeasure)] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// `∫ a dc` in closed form: along `w(t) = e^{-2it} w0` a monomial
/// `conj(w)^β w^γ` averages to `conj(w0)^β w0^γ` when `|β| = |γ|` and to 0
/// otherwise.
pub fn orbit_integral(a: &PolySymbol, m: &OrbitMeasure) -> C64 {
    assert_eq!(a.dim(), m.dim(), "symbol and orbit of different dimension");
    let w0 = m.orbit().w0();
    a.terms()
        .filter(|((b, g), _)| b.level() == g.level())
        .map(|((b, g), c)| {
            let mut v = *c;
            for j in 0..a.dim() {
                v *= w0[j].conj().powu(b.get(j)) * w0[j].powu(g.get(j));
            }
            v
        })
        .sum()
}

/// Trapezoid rule for `∫ a dc` with `nodes` equispaced times in `[0, π)`;
/// exact once `nodes > degree(a)`.
pub fn orbit_integral_trapezoid(a: &PolySymbol, m: &OrbitMeasure, nodes: usize) -> C64 {
    assert!(nodes > 0, "trapezoid rule needs at least one node");
    let z = m.orbit().generator();
    let sum: C64 = (0..nodes)
        .map(|k| a.eval_point(&flow(PI * k as f64 / nodes as f64, z)))
        .sum();
    sum / nodes as f64
}

pub fn convex_integral(a: &PolySymbol, mu: &ConvexMeasure) -> C64 {
    mu.components().iter().map(|(w, m)| orbit_integral(a, m) * *w).sum()
}

/// Named polynomial test symbols with weights `2^{-k}`, `k = 1, 2, …`.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFamily {
    dim: usize,
    entries: Vec<(String, PolySymbol)>,
}

impl TestFamily {
    pub fn new(dim: usize, entries: Vec<(String, PolySymbol)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("empty test family".into()));
        }
        if let Some((name, _)) = entries.iter().find(|(_, a)| a.dim() != dim) {
            return Err(Error::InvalidParameter(format!("symbol {name} has the wrong dimension")));
        }
        Ok(TestFamily { dim, entries })
    }

    /// Every monomial `conj(w)^β w^γ` with `|β|, |γ| <= max_each`, scaled to
    /// unit supremum on the sphere, ordered by total degree and then
    /// lexicographically in `(β, γ)`.
    pub fn graded(dim: usize, max_each: u32) -> Self {
        let half = MultiIndex::up_to_level(dim, max_each);
        let mut pairs: Vec<(MultiIndex, MultiIndex)> = half
            .iter()
            .flat_map(|b| half.iter().map(move |g| (b.clone(), g.clone())))
            .collect();
        pairs.sort_by(|(b1, g1), (b2, g2)| {
            (b1.level() + g1.level())
                .cmp(&(b2.level() + g2.level()))
                .then_with(|| b2.cmp(b1))
                .then_with(|| g2.cmp(g1))
        });
        TestFamily::from_monomials(dim, pairs)
    }

    /// Every normalized monomial of total degree at most `degree`.
    pub fn up_to_degree(dim: usize, degree: u32) -> Self {
        let mut pairs = Vec::new();
        for total in 0..=degree {
            for b_level in 0..=total {
                for b in MultiIndex::with_level(dim, b_level) {
                    for g in MultiIndex::with_level(dim, total - b_level) {
                        pairs.push((b.clone(), g));
                    }
                }
            }
        }
        TestFamily::from_monomials(dim, pairs)
    }

    fn from_monomials(dim: usize, pairs: Vec<(MultiIndex, MultiIndex)>) -> Self {
        let entries = pairs
            .into_iter()
            .map(|(b, g)| {
                let scale = 1.0 / sphere_sup(&b, &g);
                let name = format!("wbar{b}w{g}");
                (name, PolySymbol::monomial(b, g, C64::new(scale, 0.0)))
            })
            .collect();
        TestFamily { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(String, PolySymbol)] {
        &self.entries
    }

    pub fn symbols(&self) -> impl Iterator<Item = &PolySymbol> {
        self.entries.iter().map(|(_, a)| a)
    }

    /// Weight of the `k`-th entry (0-based), `2^{-(k+1)}`.
    pub fn weight(k: usize) -> f64 {
        0.5f64.powi(k as i32 + 1)
    }

    /// `(∫ a_k dμ)_k`.
    pub fn measure_values(&self, mu: &ConvexMeasure) -> Vec<C64> {
        self.symbols().map(|a| convex_integral(a, mu)).collect()
    }
}

/// `sup_{|w| = 1} |conj(w)^β w^γ| = Π (k_j/K)^{k_j/2}` with `k = β + γ`.
fn sphere_sup(b: &MultiIndex, g: &MultiIndex) -> f64 {
    let k: Vec<u32> = b.entries().iter().zip(g.entries()).map(|(x, y)| x + y).collect();
    let total: u32 = k.iter().sum();
    if total == 0 {
        return 1.0;
    }
    k.iter()
        .filter(|&&kj| kj > 0)
        .map(|&kj| (kj as f64 / total as f64).powf(kj as f64 / 2.0))
        .product()
}

/// `Σ_k min(|v1_k - v2_k|, 2^{-k})`.
pub fn weak_star_distance(v1: &[C64], v2: &[C64], family: &TestFamily) -> Result<f64> {
    if v1.len() != family.len() {
        return Err(Error::DimensionMismatch { expected: family.len(), found: v1.len() });
    }
    if v2.len() != family.len() {
        return Err(Error::DimensionMismatch { expected: family.len(), found: v2.len() });
    }
    Ok(v1
        .iter()
        .zip(v2)
        .enumerate()
        .map(|(k, (a, b))| (a - b).norm().min(TestFamily::weight(k)))
        .sum())
}

/// Source of points distributed according to an invariant measure.
pub trait PointSampler {
    fn dim(&self) -> usize;
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PhasePoint;
}

/// Uniform measure on the sphere.
#[derive(Clone, Copy, Debug)]
pub struct UniformSphere {
    pub dim: usize,
}

impl PointSampler for UniformSphere {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PhasePoint {
        random_sphere_point(self.dim, rng)
    }
}

/// Finitely many points drawn with given probabilities.
#[derive(Clone, Debug)]
pub struct Atoms {
    points: Vec<PhasePoint>,
    cumulative: Vec<f64>,
}

impl Atoms {
    pub fn new(points: Vec<PhasePoint>, probabilities: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != probabilities.len() {
            return Err(Error::InvalidParameter("need one probability per atom".into()));
        }
        let dim = points[0].dim();
        if points.iter().any(|p| p.dim() != dim) {
            return Err(Error::InvalidParameter("atoms of different dimension".into()));
        }
        if probabilities.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidParameter("negative probability".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter("probabilities sum to 0".into()));
        }
        let mut acc = 0.0;
        let cumulative = probabilities
            .iter()
            .map(|p| {
                acc += p / total;
                acc
            })
            .collect();
        Ok(Atoms { points, cumulative })
    }
}

impl PointSampler for Atoms {
    fn dim(&self) -> usize {
        self.points[0].dim()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PhasePoint {
        let u: f64 = rng.random();
        let i = self.cumulative.iter().position(|c| u < *c).unwrap_or(self.points.len() - 1);
        self.points[i].clone()
    }
}

/// Empirical convex measure from `m` samples, with the weak-* distance of its
/// values to `reference` when given.
#[derive(Clone, Debug)]
pub struct Approximation {
    pub measure: ConvexMeasure,
    pub distance: Option<f64>,
}

/// Draws `m` points, replaces each by its orbit, and merges equal orbits.
pub fn approximate_invariant<S: PointSampler, R: Rng + ?Sized>(
    sampler: &S,
    m: usize,
    family: &TestFamily,
    reference: Option<&[C64]>,
    rng: &mut R,
) -> Result<Approximation> {
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let mut orbits: Vec<(Orbit, usize)> = Vec::new();
    // |w0_1| is constant along an orbit and moves by at most √(2·ORBIT_TOL)
    // between generators judged equal, so only a narrow window of this
    // sorted key needs to be compared.
    let mut by_key: Vec<(f64, usize)> = Vec::new();
    let window = 2.0 * (2.0 * ORBIT_TOL).sqrt();
    for _ in 0..m {
        let orbit = orbit_through(&sampler.sample(rng))?;
        let key = orbit.w0()[0].norm();
        let lo = by_key.partition_point(|(k, _)| *k < key - window);
        let hi = by_key.partition_point(|(k, _)| *k <= key + window);
        match by_key[lo..hi].iter().find(|(_, i)| orbits[*i].0.same_orbit(&orbit)) {
            Some(&(_, i)) => orbits[i].1 += 1,
            None => {
                by_key.insert(hi, (key, orbits.len()));
                orbits.push((orbit, 1));
            }
        }
    }
    let components = orbits
        .into_iter()
        .map(|(o, count)| (count as f64 / m as f64, OrbitMeasure::new(o)))
        .collect();
    let measure = ConvexMeasure::new(components)?;
    let distance = match reference {
        Some(r) => Some(weak_star_distance(&family.measure_values(&measure), r, family)?),
        None => None,
    };
    Ok(Approximation { measure, distance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::random_orbit;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn axis(d: usize, j: usize) -> OrbitMeasure {
        OrbitMeasure::new(orbit_through(&PhasePoint::basis(d, j)).unwrap())
    }

    #[test]
    fn orbit_integral_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let one = PolySymbol::constant(2, C64::new(1.0, 0.0));
        let m = OrbitMeasure::new(random_orbit(2, &mut rng));
        assert_eq!(orbit_integral(&one, &m), C64::new(1.0, 0.0));
        assert_eq!(orbit_integral(&PolySymbol::abs_sqr(2, 0), &axis(2, 0)), C64::new(1.0, 0.0));
        assert_eq!(orbit_integral(&PolySymbol::w(2, 0), &m), C64::new(0.0, 0.0));
        assert!(orbit_integral_trapezoid(&PolySymbol::w(2, 0), &m, 3).norm() < 1e-15);
    }

    #[test]
    fn trapezoid_agrees_with_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let family = TestFamily::up_to_degree(2, 8);
        for _ in 0..5 {
            let m = OrbitMeasure::new(random_orbit(2, &mut rng));
            for a in family.symbols() {
                let exact = orbit_integral(a, &m);
                let trap = orbit_integral_trapezoid(a, &m, 2 * a.degree() as usize + 1);
                assert!((exact - trap).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn flow_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let family = TestFamily::graded(3, 2);
        let m = OrbitMeasure::new(random_orbit(3, &mut rng));
        for a in family.symbols() {
            let t: f64 = rng.random_range(-3.0..3.0);
            assert!((orbit_integral(&a.compose_flow(t), &m) - orbit_integral(a, &m)).norm() < 1e-14);
        }
    }

    #[test]
    fn convex_examples() {
        let mu = ConvexMeasure::new(vec![(0.5, axis(2, 0)), (0.5, axis(2, 1))]).unwrap();
        assert_eq!(convex_integral(&PolySymbol::abs_sqr(2, 0), &mu), C64::new(0.5, 0.0));
        assert_eq!(convex_integral(&PolySymbol::constant(2, C64::new(1.0, 0.0)), &mu), C64::new(1.0, 0.0));
        let single = ConvexMeasure::single(axis(2, 1).orbit().clone());
        let a = PolySymbol::abs_sqr(2, 1);
        assert_eq!(convex_integral(&a, &single), orbit_integral(&a, &axis(2, 1)));
    }

    #[test]
    fn convex_validation() {
        assert!(ConvexMeasure::new(vec![]).is_err());
        assert!(ConvexMeasure::new(vec![(0.5, axis(2, 0)), (0.4, axis(2, 1))]).is_err());
        assert!(ConvexMeasure::new(vec![(1.5, axis(2, 0)), (-0.5, axis(2, 1))]).is_err());
        let flowed = OrbitMeasure::new(orbit_through(&flow(0.4, &PhasePoint::basis(2, 0))).unwrap());
        assert!(matches!(
            ConvexMeasure::new(vec![(0.5, axis(2, 0)), (0.5, flowed)]),
            Err(Error::InvalidMeasure(_))
        ));
        assert!(ConvexMeasure::new(vec![(0.5, axis(2, 0)), (0.5, axis(3, 1))]).is_err());
    }

    #[test]
    fn family_normalization_and_order() {
        let f = TestFamily::graded(2, 2);
        assert_eq!(f.len(), 36);
        assert_eq!(f.entries()[0].0, "wbar(0,0)w(0,0)");
        let degrees: Vec<u32> = f.symbols().map(|a| a.degree()).collect();
        assert!(degrees.windows(2).all(|w| w[0] <= w[1]));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for a in f.symbols() {
            let mut best: f64 = 0.0;
            for _ in 0..2000 {
                best = best.max(a.eval_point(&random_sphere_point(2, &mut rng)).norm());
            }
            assert!(best <= 1.0 + 1e-12);
            assert!(best > 0.8, "{a}");
        }
        assert_eq!(TestFamily::up_to_degree(1, 2).len(), 6);
    }

    #[test]
    fn weak_star_examples() {
        let f = TestFamily::graded(1, 2);
        let k = f.len();
        let zero = vec![C64::new(0.0, 0.0); k];
        let ones = vec![C64::new(1.0, 0.0); k];
        assert_eq!(weak_star_distance(&zero, &zero, &f).unwrap(), 0.0);
        let d = weak_star_distance(&zero, &ones, &f).unwrap();
        assert!((d - (1.0 - 0.5f64.powi(k as i32))).abs() < 1e-15);
        assert!(weak_star_distance(&zero[1..], &zero, &f).is_err());
    }

    #[test]
    fn sampling_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let family = TestFamily::graded(2, 1);
        let p = PhasePoint::from_slice(&[0.6, 0.0, 0.0, 0.8]).unwrap();
        let atoms = Atoms::new(vec![p.clone()], vec![1.0]).unwrap();
        let approx = approximate_invariant(&atoms, 17, &family, None, &mut rng).unwrap();
        assert_eq!(approx.measure.len(), 1);
        assert!(approximate_invariant(&atoms, 0, &family, None, &mut rng).is_err());

        let q = PhasePoint::basis(2, 1);
        let two = Atoms::new(vec![p, q], vec![0.3, 0.7]).unwrap();
        let m = 4000;
        let approx = approximate_invariant(&two, m, &family, None, &mut rng).unwrap();
        assert_eq!(approx.measure.len(), 2);
        let tol = 3.0 / (m as f64).sqrt();
        for (w, c) in approx.measure.components() {
            let expected = if c.orbit().w0()[0].norm() > 0.1 { 0.3 } else { 0.7 };
            assert!((w - expected).abs() < tol);
        }

        let uniform = UniformSphere { dim: 2 };
        let approx = approximate_invariant(&uniform, m, &family, None, &mut rng).unwrap();
        let v = convex_integral(&PolySymbol::abs_sqr(2, 0), &approx.measure);
        assert!((v.re - 0.5).abs() < tol);
    }
}
