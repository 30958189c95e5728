//! The ortho-symplectic group, its unitary picture, and the orbits of the
//! Hamiltonian flow of `|x|² + |ξ|²` on the unit sphere.
//!
//! A group element is stored through its blocks `A, B` of
//! `M = [[A, B], [-B, A]]`, which acts on column vectors `(x, ξ)`. In the
//! complex coordinate `w = x + iξ` this real action is multiplication by
//! `A - iB` (see [`OrthoSymplectic::complex_action`]); the unitary
//! `A + iB` of [`OrthoSymplectic::to_unitary`] is its complex conjugate.
//! The flow is `w ↦ e^{-2it} w`, so orbits on the sphere are the phase
//! circles `{e^{iθ} w0}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Tolerance of the group identities.
pub const GROUP_TOL: f64 = 1e-10;
/// Two unit generators lie on the same orbit when `|⟨w0', w0⟩| >= 1 - ORBIT_TOL`.
pub const ORBIT_TOL: f64 = 1e-10;
/// Relative singular-value threshold for numerical rank.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct OrthoSymplectic {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl OrthoSymplectic {
    /// Builds `M_{A,B}`, checking `AAᵀ + BBᵀ = I` and `ABᵀ` symmetric.
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        let g = OrthoSymplectic::from_blocks_unchecked(a, b)?;
        if g.deviation() > GROUP_TOL {
            return Err(Error::NotOrthoSymplectic { tol: GROUP_TOL });
        }
        Ok(g)
    }

    fn from_blocks_unchecked(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        let d = a.nrows();
        if a.ncols() != d || b.nrows() != d || b.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: b.nrows() });
        }
        Ok(OrthoSymplectic { a, b })
    }

    pub fn identity(d: usize) -> Self {
        OrthoSymplectic { a: DMatrix::identity(d, d), b: DMatrix::zeros(d, d) }
    }

    /// The flow map at time `t`: `A = cos(2t) I`, `B = sin(2t) I`.
    pub fn flow_map(t: f64, d: usize) -> Self {
        let (s, c) = (2.0 * t).sin_cos();
        OrthoSymplectic {
            a: DMatrix::identity(d, d) * c,
            b: DMatrix::identity(d, d) * s,
        }
    }

    pub fn from_matrix(m: &DMatrix<f64>, tol: f64) -> Result<Self> {
        if !is_ortho_symplectic(m, tol)? {
            return Err(Error::NotOrthoSymplectic { tol });
        }
        let d = m.nrows() / 2;
        Ok(OrthoSymplectic {
            a: m.view((0, 0), (d, d)).into_owned(),
            b: m.view((0, d), (d, d)).into_owned(),
        })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(2 * d, 2 * d);
        m.view_mut((0, 0), (d, d)).copy_from(&self.a);
        m.view_mut((0, d), (d, d)).copy_from(&self.b);
        m.view_mut((d, 0), (d, d)).copy_from(&(-&self.b));
        m.view_mut((d, d), (d, d)).copy_from(&self.a);
        m
    }

    /// `U = A + iB`.
    pub fn to_unitary(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| C64::new(self.a[(i, j)], self.b[(i, j)]))
    }

    /// `(Re U, Im U)` for a unitary `U`.
    pub fn from_unitary(u: &DMatrix<C64>) -> Result<Self> {
        let dev = unitarity_deviation(u);
        if !(dev <= GROUP_TOL) {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(OrthoSymplectic { a: u.map(|z| z.re), b: u.map(|z| z.im) })
    }

    /// Matrix of the real action in the coordinate `w = x + iξ`, i.e. `A - iB`.
    pub fn complex_action(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| C64::new(self.a[(i, j)], -self.b[(i, j)]))
    }

    /// Inverse of [`OrthoSymplectic::complex_action`].
    pub fn from_complex_action(v: &DMatrix<C64>) -> Result<Self> {
        OrthoSymplectic::from_unitary(&v.map(|z| z.conj()))
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &OrthoSymplectic) -> OrthoSymplectic {
        OrthoSymplectic {
            a: &self.a * &other.a - &self.b * &other.b,
            b: &self.a * &other.b + &self.b * &other.a,
        }
    }

    /// Inverse, which is the transpose `M_{Aᵀ, -Bᵀ}`.
    pub fn inverse(&self) -> OrthoSymplectic {
        OrthoSymplectic { a: self.a.transpose(), b: -self.b.transpose() }
    }

    pub fn apply(&self, z: &PhasePoint) -> PhasePoint {
        PhasePoint {
            x: &self.a * &z.x + &self.b * &z.xi,
            xi: -&self.b * &z.x + &self.a * &z.xi,
        }
    }

    /// Largest violation of `AAᵀ + BBᵀ = I` and `ABᵀ = (ABᵀ)ᵀ`.
    pub fn deviation(&self) -> f64 {
        block_deviation(&self.a, &self.b)
    }
}

fn block_deviation(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let d = a.nrows();
    let ortho = a * a.transpose() + b * b.transpose() - DMatrix::<f64>::identity(d, d);
    let abt = a * b.transpose();
    let sym = &abt - abt.transpose();
    ortho.amax().max(sym.amax())
}

fn unitarity_deviation(u: &DMatrix<C64>) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    let prod = u * u.adjoint() - DMatrix::<C64>::identity(n, n);
    prod.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Whether `m` has the block form `[[A, B], [-B, A]]` and satisfies the two
/// ortho-symplectic block identities, all within `tol`.
pub fn is_ortho_symplectic(m: &DMatrix<f64>, tol: f64) -> Result<bool> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch { expected: n, found: m.ncols() });
    }
    if !n.is_multiple_of(2) {
        return Err(Error::OddDimension(n));
    }
    let d = n / 2;
    let a = m.view((0, 0), (d, d));
    let b = m.view((0, d), (d, d));
    let c = m.view((d, 0), (d, d));
    let e = m.view((d, d), (d, d));
    let form = (a - e).amax().max((b + c).amax());
    if !(form <= tol) {
        return Ok(false);
    }
    Ok(block_deviation(&a.into_owned(), &b.into_owned()) <= tol)
}

/// A point `(x, ξ)` of phase space `R^{2d}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: DVector<f64>,
    pub xi: DVector<f64>,
}

impl PhasePoint {
    pub fn new(x: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        if x.len() != xi.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), found: xi.len() });
        }
        if x.is_empty() {
            return Err(Error::InvalidParameter("phase point of dimension 0".into()));
        }
        Ok(PhasePoint { x: DVector::from_vec(x), xi: DVector::from_vec(xi) })
    }

    /// From `2d` reals laid out as `(x_1, …, x_d, ξ_1, …, ξ_d)`.
    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        if !coords.len().is_multiple_of(2) {
            return Err(Error::OddDimension(coords.len()));
        }
        let d = coords.len() / 2;
        PhasePoint::new(coords[..d].to_vec(), coords[d..].to_vec())
    }

    /// `(e_j, 0)`.
    pub fn basis(d: usize, j: usize) -> Self {
        let mut x = DVector::zeros(d);
        x[j] = 1.0;
        PhasePoint { x, xi: DVector::zeros(d) }
    }

    pub fn from_complex(w: &DVector<C64>) -> Self {
        PhasePoint { x: w.map(|z| z.re), xi: w.map(|z| z.im) }
    }

    /// `w = x + iξ`.
    pub fn to_complex(&self) -> DVector<C64> {
        DVector::from_fn(self.dim(), |i, _| C64::new(self.x[i], self.xi[i]))
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x.norm_squared() + self.xi.norm_squared()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.x.iter().chain(self.xi.iter()).copied().collect()
    }

    pub fn distance(&self, other: &PhasePoint) -> f64 {
        ((&self.x - &other.x).norm_squared() + (&self.xi - &other.xi).norm_squared()).sqrt()
    }
}

/// Hamiltonian flow of `|x|² + |ξ|²` at time `t`.
pub fn flow(t: f64, z: &PhasePoint) -> PhasePoint {
    let (s, c) = (2.0 * t).sin_cos();
    PhasePoint { x: &z.x * c + &z.xi * s, xi: &z.xi * c - &z.x * s }
}

/// A closed trajectory of the flow on the unit sphere, represented by a unit
/// generator. Equality is equality of trajectories.
#[derive(Clone, Debug)]
pub struct Orbit {
    generator: PhasePoint,
    w0: DVector<C64>,
}

impl Orbit {
    /// The orbit `C_1` through `(e_1, 0)`.
    pub fn reference(d: usize) -> Self {
        orbit_through(&PhasePoint::basis(d, 0)).expect("nonzero generator")
    }

    pub fn generator(&self) -> &PhasePoint {
        &self.generator
    }

    /// Unit complex vector `w0 = x + iξ` of the generator.
    pub fn w0(&self) -> &DVector<C64> {
        &self.w0
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    /// `|⟨w0', w0⟩|`, equal to 1 exactly for the same orbit.
    pub fn overlap(&self, other: &Orbit) -> f64 {
        self.w0.dotc(&other.w0).norm()
    }

    pub fn same_orbit(&self, other: &Orbit) -> bool {
        self.dim() == other.dim() && self.overlap(other) >= 1.0 - ORBIT_TOL
    }
}

impl PartialEq for Orbit {
    fn eq(&self, other: &Self) -> bool {
        self.same_orbit(other)
    }
}

/// The orbit through `z`, after renormalizing `z` to the unit sphere.
pub fn orbit_through(z: &PhasePoint) -> Result<Orbit> {
    let n = z.norm_sqr().sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    let generator = PhasePoint { x: &z.x / n, xi: &z.xi / n };
    let w0 = generator.to_complex();
    Ok(Orbit { generator, w0 })
}

/// A group element carrying the reference orbit `C_1` onto `target`.
///
/// The complex action `V` of the result satisfies `V e_1 = w0`, so the
/// element maps `(e_1, 0)` to the target's generator. `V` is a Householder
/// reflection times a phase, with the reflection chosen against `-w0` rotated
/// to a nonnegative first entry; when that entry is 0 the phase is `+1`.
pub fn transporter(target: &Orbit) -> OrthoSymplectic {
    let w0 = target.w0();
    let d = w0.len();
    let lead = w0[0];
    let phase = if lead.norm() > 0.0 { lead / lead.norm() } else { C64::new(1.0, 0.0) };
    let y = w0.map(|z| z * phase.conj());
    let mut v = y.clone();
    v[0] += C64::new(1.0, 0.0);
    let vv = v.norm_squared();
    let reflection = DMatrix::<C64>::identity(d, d) - (&v * v.adjoint()) * C64::new(2.0 / vv, 0.0);
    let action = reflection * (-phase);
    OrthoSymplectic::from_complex_action(&action).expect("Householder reflections are unitary")
}

/// Dimension of the tangent space of the group at `g`, computed as the
/// nullity of the linearized constraints on `(M, N)`:
/// `A Nᵀ - B Mᵀ` symmetric and `A Mᵀ + B Nᵀ` antisymmetric.
pub fn tangent_dimension_check(g: &OrthoSymplectic) -> usize {
    let d = g.dim();
    let unknowns = 2 * d * d;
    let rows = d * d;
    let mut map = DMatrix::<f64>::zeros(rows, unknowns);
    for col in 0..unknowns {
        let mut m = DMatrix::<f64>::zeros(d, d);
        let mut n = DMatrix::<f64>::zeros(d, d);
        let k = col % (d * d);
        if col < d * d {
            m[(k / d, k % d)] = 1.0;
        } else {
            n[(k / d, k % d)] = 1.0;
        }
        let sym_part = g.a() * n.transpose() - g.b() * m.transpose();
        let skew_part = g.a() * m.transpose() + g.b() * n.transpose();
        let mut r = 0;
        for i in 0..d {
            for j in (i + 1)..d {
                map[(r, col)] = sym_part[(i, j)] - sym_part[(j, i)];
                r += 1;
            }
        }
        for i in 0..d {
            for j in i..d {
                map[(r, col)] = skew_part[(i, j)] + skew_part[(j, i)];
                r += 1;
            }
        }
    }
    unknowns - numerical_rank(map)
}

/// Real dimension of `{M Hermitian q×q : M u = 0}`.
pub fn hermitian_annihilator_dim(u: &[C64]) -> Result<usize> {
    let q = u.len();
    if q < 2 {
        return Err(Error::InvalidParameter(format!("need q >= 2, got {q}")));
    }
    if u.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::ZeroVector);
    }
    let mut basis: Vec<DMatrix<C64>> = Vec::with_capacity(q * q);
    for i in 0..q {
        let mut m = DMatrix::zeros(q, q);
        m[(i, i)] = C64::new(1.0, 0.0);
        basis.push(m);
    }
    for i in 0..q {
        for j in (i + 1)..q {
            let mut re = DMatrix::zeros(q, q);
            re[(i, j)] = C64::new(1.0, 0.0);
            re[(j, i)] = C64::new(1.0, 0.0);
            basis.push(re);
            let mut im = DMatrix::zeros(q, q);
            im[(i, j)] = C64::new(0.0, 1.0);
            im[(j, i)] = C64::new(0.0, -1.0);
            basis.push(im);
        }
    }
    let uv = DVector::from_column_slice(u);
    let mut map = DMatrix::<f64>::zeros(2 * q, q * q);
    for (col, m) in basis.iter().enumerate() {
        let image = m * &uv;
        for i in 0..q {
            map[(i, col)] = image[i].re;
            map[(q + i, col)] = image[i].im;
        }
    }
    Ok(q * q - numerical_rank(map))
}

fn numerical_rank(m: DMatrix<f64>) -> usize {
    let sv = m.singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > RANK_TOL * top).count()
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
/// of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<C64> {
    let z = DMatrix::<C64>::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) / 2f64.sqrt()
    });
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let ph = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}

pub fn random_ortho_symplectic<R: Rng + ?Sized>(d: usize, rng: &mut R) -> OrthoSymplectic {
    OrthoSymplectic::from_unitary(&haar_unitary(d, rng)).expect("QR factor is unitary")
}

/// Uniformly distributed point of `S^{2d-1}`.
pub fn random_sphere_point<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PhasePoint {
    loop {
        let coords: Vec<f64> = (0..2 * d).map(|_| rng.sample(StandardNormal)).collect();
        let n = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-12 {
            let unit: Vec<f64> = coords.iter().map(|c| c / n).collect();
            return PhasePoint::from_slice(&unit).expect("even length");
        }
    }
}

/// Orbit through a uniformly random point of the sphere.
pub fn random_orbit<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Orbit {
    orbit_through(&random_sphere_point(d, rng)).expect("unit point")
}
