//! Phase-space quadrature of `⟨a^w u, v⟩ = ∫ a W_{u,v}`.
//!
//! This path shares nothing with the ladder algebra except the basis
//! functions. States are evaluated in position space with
//! [`hermite_eval_all`], the cross-Wigner transform
//!
//! ```text
//! W_{m,m'}(x, ξ) = (2πh)^{-1} ∫ v_m(x + y/2) v_m'(x - y/2) e^{-iyξ/h} dy
//! ```
//!
//! is summed on a uniform offset grid, and the phase-space integral uses
//! scaled Gauss–Hermite nodes in `x` and `ξ`. Polynomial and Gaussian symbols
//! are products over coordinates, so every matrix element reduces to
//! one-dimensional pairs `(m, m')`, which are cached per grid.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{hermite_eval_all, FockState};
use crate::quadrature::GaussHermite;
use crate::weyl::Symbol;

/// Grid controls. The result is computed twice, the second time with twice
/// the phase-space nodes and half the offset step, and must agree within
/// `tol` (relative to `max(1, |value|)`).
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub tol: f64,
    /// Nodes beyond the minimum needed for polynomial exactness.
    pub extra_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { tol: 1e-6, extra_nodes: 8 }
    }
}

/// One-dimensional factor of a product symbol.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Factor {
    /// `conj(w)^β w^γ`
    Monomial(u32, u32),
    /// `exp(-((x - cx)² + (ξ - cξ)²) / width²)`
    Gaussian { cx: f64, cxi: f64, width: f64 },
}

impl Factor {
    fn eval(&self, x: f64, xi: f64) -> C64 {
        match *self {
            Factor::Monomial(b, g) => {
                let w = C64::new(x, xi);
                w.conj().powu(b) * w.powu(g)
            }
            Factor::Gaussian { cx, cxi, width } => {
                C64::new((-((x - cx).powi(2) + (xi - cxi).powi(2)) / (width * width)).exp(), 0.0)
            }
        }
    }

    /// Affine maps `t ↦ center + scale·t` for the `x` and `ξ` axes, chosen so
    /// that the Gaussian decay of the Wigner function times the factor is the
    /// Gauss–Hermite weight.
    fn axes(&self, hbar: f64) -> GridKey {
        match *self {
            Factor::Monomial(..) => GridKey::standard(hbar),
            Factor::Gaussian { cx, cxi, width } => {
                let precision = 1.0 / hbar + 1.0 / (width * width);
                let pull = 1.0 / (width * width) / precision;
                let scale = precision.sqrt().recip();
                GridKey { x: (cx * pull, scale), xi: (cxi * pull, scale) }
            }
        }
    }
}

/// `Σ_terms c Π_j factor_j`.
fn factorize(a: &Symbol) -> Vec<(C64, Vec<Factor>)> {
    match a {
        Symbol::Poly(p) => p
            .terms()
            .map(|((b, g), c)| {
                let f = (0..p.dim()).map(|j| Factor::Monomial(b.get(j), g.get(j))).collect();
                (*c, f)
            })
            .collect(),
        Symbol::Bump(bump) => {
            let f = (0..bump.dim())
                .map(|j| Factor::Gaussian {
                    cx: bump.center().x[j],
                    cxi: bump.center().xi[j],
                    width: bump.width(),
                })
                .collect();
            vec![(C64::new(bump.amplitude(), 0.0), f)]
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct GridKey {
    x: (f64, f64),
    xi: (f64, f64),
}

impl GridKey {
    fn standard(hbar: f64) -> Self {
        GridKey { x: (0.0, hbar.sqrt()), xi: (0.0, hbar.sqrt()) }
    }

    fn bits(&self) -> [u64; 4] {
        [self.x.0.to_bits(), self.x.1.to_bits(), self.xi.0.to_bits(), self.xi.1.to_bits()]
    }
}

struct Grid {
    hbar: f64,
    x_nodes: Vec<(f64, f64)>,
    xi_nodes: Vec<(f64, f64)>,
    offsets: Vec<f64>,
    dy: f64,
    /// `v_m(x_i + y_l/2)` for all m, indexed `[i][l][m]`.
    shifted: Vec<Vec<Vec<f64>>>,
    /// `(cos, sin)(y_l ξ_k / h)`, indexed `[k][l]`.
    phases: Vec<Vec<(f64, f64)>>,
    /// Cross-Wigner values `W_{m,m'}(x_i, ξ_k)` times the phase-space weights.
    cache: HashMap<(u32, u32), Vec<C64>>,
}

impl Grid {
    fn new(hbar: f64, m_max: u32, rule: &GaussHermite, key: GridKey, refine: usize) -> Grid {
        let map = |(center, scale): (f64, f64)| -> Vec<(f64, f64)> {
            rule.nodes()
                .iter()
                .zip(rule.flat_weights())
                .map(|(t, w)| (center + scale * t, scale * w))
                .collect()
        };
        let x_nodes = map(key.x);
        let xi_nodes = map(key.xi);
        let sh = hbar.sqrt();
        let turning = (2.0 * m_max as f64 + 1.0).sqrt();
        let span = 2.0 * sh * (turning + 10.0);
        let xi_max = xi_nodes.iter().map(|(xi, _)| xi.abs()).fold(0.0, f64::max);
        let bandwidth = (turning + 6.0) / sh + xi_max / hbar;
        let dy = PI / bandwidth / refine as f64;
        let half = (span / dy).ceil() as i64;
        let offsets: Vec<f64> = (-half..=half).map(|l| l as f64 * dy).collect();
        let shifted = x_nodes
            .iter()
            .map(|&(x, _)| offsets.iter().map(|y| hermite_eval_all(m_max, hbar, x + y / 2.0)).collect())
            .collect();
        let phases = xi_nodes
            .iter()
            .map(|&(xi, _)| offsets.iter().map(|y| (y * xi / hbar).sin_cos()).map(|(s, c)| (c, s)).collect())
            .collect();
        Grid { hbar, x_nodes, xi_nodes, offsets, dy, shifted, phases, cache: HashMap::new() }
    }

    fn fill_wigner(&mut self, m: u32, mp: u32) {
        if !self.cache.contains_key(&(m, mp)) {
            let nx = self.x_nodes.len();
            let nxi = self.xi_nodes.len();
            let len = self.offsets.len();
            let scale = self.dy / (2.0 * PI * self.hbar);
            let mut grid = vec![C64::new(0.0, 0.0); nx * nxi];
            let mut prod = vec![0.0; len];
            for i in 0..nx {
                for l in 0..len {
                    // x_i - y_l/2 = x_i + y_{len-1-l}/2 on the symmetric offset grid
                    prod[l] = self.shifted[i][l][m as usize] * self.shifted[i][len - 1 - l][mp as usize];
                }
                if prod.iter().all(|p| *p == 0.0) {
                    continue;
                }
                for k in 0..nxi {
                    let (mut re, mut im) = (0.0, 0.0);
                    for (p, (c, s)) in prod.iter().zip(&self.phases[k]) {
                        re += p * c;
                        im -= p * s;
                    }
                    let weight = self.x_nodes[i].1 * self.xi_nodes[k].1;
                    grid[i * nxi + k] = C64::new(re, im) * (scale * weight);
                }
            }
            self.cache.insert((m, mp), grid);
        }
    }

    /// `∬ f(x, ξ) W_{m,m'}(x, ξ) dx dξ`.
    fn matrix_element(&mut self, f: &Factor, m: u32, mp: u32) -> C64 {
        self.fill_wigner(m, mp);
        let w = &self.cache[&(m, mp)];
        let nxi = self.xi_nodes.len();
        let mut acc = C64::new(0.0, 0.0);
        for (i, &(x, _)) in self.x_nodes.iter().enumerate() {
            for (k, &(xi, _)) in self.xi_nodes.iter().enumerate() {
                let wv = w[i * nxi + k];
                if wv != C64::new(0.0, 0.0) {
                    acc += f.eval(x, xi) * wv;
                }
            }
        }
        acc
    }
}

/// Grids for one resolution level, one per distinct axis map.
struct Grids {
    hbar: f64,
    m_max: u32,
    rule: GaussHermite,
    refine: usize,
    grids: HashMap<[u64; 4], Grid>,
}

impl Grids {
    fn new(hbar: f64, m_max: u32, nodes: usize, refine: usize) -> Self {
        Grids { hbar, m_max, rule: GaussHermite::new(nodes * refine), refine, grids: HashMap::new() }
    }

    fn matrix_element(&mut self, f: &Factor, m: u32, mp: u32) -> C64 {
        let key = f.axes(self.hbar);
        let (hbar, m_max, refine) = (self.hbar, self.m_max, self.refine);
        let rule = &self.rule;
        self.grids
            .entry(key.bits())
            .or_insert_with(|| Grid::new(hbar, m_max, rule, key, refine))
            .matrix_element(f, m, mp)
    }
}

fn evaluate(
    terms: &[(C64, Vec<Factor>)],
    u: &FockState,
    v: &FockState,
    grids: &mut Grids,
) -> C64 {
    let d = u.dim();
    let mut memo: HashMap<(usize, usize, u32, u32), C64> = HashMap::new();
    let mut total = C64::new(0.0, 0.0);
    for (t, (c, factors)) in terms.iter().enumerate() {
        for (alpha, ua) in u.coeffs() {
            for (beta, vb) in v.coeffs() {
                let mut prod = *c * ua * vb.conj();
                for (j, f) in factors.iter().enumerate().take(d) {
                    let key = (t, j, alpha.get(j), beta.get(j));
                    let e = match memo.get(&key) {
                        Some(e) => *e,
                        None => {
                            let e = grids.matrix_element(f, alpha.get(j), beta.get(j));
                            memo.insert(key, e);
                            e
                        }
                    };
                    prod *= e;
                    if prod == C64::new(0.0, 0.0) {
                        break;
                    }
                }
                total += prod;
            }
        }
    }
    total
}

/// `⟨a^w u, v⟩` by phase-space quadrature, validated by grid doubling.
pub fn quadrature_expectation(
    a: &Symbol,
    u: &FockState,
    v: &FockState,
    spec: &QuadratureSpec,
) -> Result<C64> {
    u.check_compatible(v)?;
    if a.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: a.dim() });
    }
    let m_max = u.max_occupation().max(v.max_occupation());
    let degree = match a {
        Symbol::Poly(p) => p.coordinate_degree() as usize,
        Symbol::Bump(_) => 0,
    };
    let nodes = m_max as usize + degree / 2 + 1 + spec.extra_nodes;
    let terms = factorize(a);
    let coarse = evaluate(&terms, u, v, &mut Grids::new(u.hbar(), m_max, nodes, 1));
    let fine = evaluate(&terms, u, v, &mut Grids::new(u.hbar(), m_max, nodes, 2));
    let change = (fine - coarse).norm();
    if !(change <= spec.tol * fine.norm().max(1.0)) {
        return Err(Error::NotConverged(format!(
            "grid doubling changed the value by {change:e} (coarse {coarse}, fine {fine}, {nodes} nodes)"
        )));
    }
    Ok(fine)
}
