//! Property suites run from a configuration, with a CSV summary.

use std::io::Write;

use eigenlimit_core::construction::{median_successive_ratio, strictly_decreasing};
use eigenlimit_core::measures::orbit_integral_trapezoid;
use eigenlimit_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::error::Result;
use crate::family::resolve_family;
use crate::report::{fmt_f64, write_table, Metadata};

/// How an observed value is compared against its expectation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `|observed - expected| <= tolerance`
    Within,
    /// `observed < expected`
    Below,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub invariant: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub passed: bool,
}

impl Check {
    pub fn within(suite: &'static str, invariant: impl Into<String>, observed: f64, expected: f64, tolerance: f64) -> Self {
        let passed = (observed - expected).abs() <= tolerance;
        Check { suite, invariant: invariant.into(), observed, expected, tolerance, relation: Relation::Within, passed }
    }

    pub fn below(suite: &'static str, invariant: impl Into<String>, observed: f64, bound: f64) -> Self {
        let passed = observed < bound;
        Check { suite, invariant: invariant.into(), observed, expected: bound, tolerance: 0.0, relation: Relation::Below, passed }
    }

    /// `suite.invariant`, the name reported on failure.
    pub fn name(&self) -> String {
        format!("{}.{}", self.suite, self.invariant)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub metadata: Metadata,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn write<W: Write>(&self, out: &mut W) -> Result<()> {
        let rows: Vec<Vec<String>> = self
            .checks
            .iter()
            .map(|c| {
                vec![
                    c.suite.to_string(),
                    c.invariant.clone(),
                    fmt_f64(c.observed),
                    fmt_f64(c.expected),
                    fmt_f64(c.tolerance),
                    match c.relation {
                        Relation::Within => "within".into(),
                        Relation::Below => "below".into(),
                    },
                    c.passed.to_string(),
                ]
            })
            .collect();
        let header = ["suite", "invariant", "observed", "expected", "tolerance", "relation", "passed"];
        write_table(out, &self.metadata, &header, &rows)
    }
}

pub fn random_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Sum of `terms` random monomials of total degree at most `degree`.
pub fn random_poly_symbol<R: Rng + ?Sized>(d: usize, degree: u32, terms: usize, rng: &mut R) -> PolySymbol {
    let mut a = PolySymbol::zero(d);
    for _ in 0..terms {
        let total = rng.random_range(0..=degree);
        let left = rng.random_range(0..=total);
        let betas = MultiIndex::with_level(d, left);
        let gammas = MultiIndex::with_level(d, total - left);
        let beta = betas[rng.random_range(0..betas.len())].clone();
        let gamma = gammas[rng.random_range(0..gammas.len())].clone();
        a = a.add(&PolySymbol::monomial(beta, gamma, random_c64(rng)));
    }
    a
}

/// Normalized random state supported on `terms` basis vectors of level `n`.
pub fn random_level_state<R: Rng + ?Sized>(d: usize, n: u32, terms: usize, rng: &mut R) -> Result<FockState> {
    let basis = MultiIndex::with_level(d, n);
    let mut u = FockState::new(d, hbar_schedule(n, d))?;
    for _ in 0..terms {
        u.add_coeff(basis[rng.random_range(0..basis.len())].clone(), random_c64(rng))?;
    }
    if u.is_zero() {
        u.add_coeff(basis[0].clone(), C64::new(1.0, 0.0))?;
    }
    Ok(u.normalized()?)
}

/// Bump of the configured width centered at `radius · e_1`.
pub fn radial_bump(d: usize, radius: f64, width: f64, amplitude: f64) -> Result<BumpSymbol> {
    let mut center = vec![0.0; 2 * d];
    center[0] = radius;
    Ok(BumpSymbol::new(PhasePoint::from_slice(&center)?, width, amplitude)?)
}

fn suite_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn group_suite(config: &Config, checks: &mut Vec<Check>) -> Result<()> {
    let mut rng = suite_rng(config.seed, 1);
    let tol = config.tolerances.group;
    let mut product = OrthoSymplectic::identity(config.dim);
    let mut worst: f64 = 0.0;
    for _ in 0..config.samples.products {
        product = product.compose(&random_ortho_symplectic(config.dim, &mut rng));
        worst = worst.max(product.deviation());
    }
    checks.push(Check::within("gamma", "closure", worst, 0.0, tol));

    let mut dim_gap = 0.0f64;
    for d in 1..=3 {
        let g = random_ortho_symplectic(d, &mut rng);
        dim_gap = dim_gap.max((tangent_dimension_check(&g) as f64 - (d * d) as f64).abs());
    }
    checks.push(Check::within("gamma", "tangent_dimension", dim_gap, 0.0, 0.0));

    let mut ann_gap = 0.0f64;
    for q in 2..=4usize {
        for _ in 0..config.samples.annihilator_vectors {
            let v: Vec<C64> = (0..q).map(|_| random_c64(&mut rng)).collect();
            ann_gap = ann_gap.max((hermitian_annihilator_dim(&v)? as f64 - ((q - 1) * (q - 1)) as f64).abs());
        }
    }
    checks.push(Check::within("gamma", "annihilator_dimension", ann_gap, 0.0, 0.0));
    Ok(())
}

fn metaplectic_suite(config: &Config, checks: &mut Vec<Check>) -> Result<()> {
    let mut rng = suite_rng(config.seed, 2);
    let d = config.dim;
    let tol = &config.tolerances;
    let mut norm_gap = 0.0f64;
    let mut eigen = 0.0f64;
    for _ in 0..config.samples.orbits {
        let g = transporter(&random_orbit(d, &mut rng));
        for n in 0..=config.samples.unitarity_max_level {
            let f = transport_reference(n, &g);
            norm_gap = norm_gap.max((f.norm() - 1.0).abs());
            eigen = eigen.max(verify_eigen(&f));
        }
    }
    checks.push(Check::within("metaplectic", "unitarity", norm_gap, 0.0, tol.unitarity));
    checks.push(Check::within("metaplectic", "transported_eigen_residual", eigen, 0.0, tol.eigen));

    let max_level = config.samples.covariance_max_level;
    let levels = [0, 1, max_level / 2, max_level];
    let mut cov = 0.0f64;
    for _ in 0..config.samples.covariance_maps {
        let g = random_ortho_symplectic(d, &mut rng);
        let a = Symbol::from(random_poly_symbol(d, 4, 4, &mut rng));
        for &n in &levels {
            let u = random_level_state(d, n, 3, &mut rng)?;
            let v = random_level_state(d, n, 3, &mut rng)?;
            let (lhs, rhs) = covariance_check(&a, &g, &u, &v)?;
            cov = cov.max((lhs - rhs).norm());
        }
    }
    checks.push(Check::within("metaplectic", "covariance", cov, 0.0, tol.covariance));
    Ok(())
}

fn eigen_suite(config: &Config, mu: &ConvexMeasure, checks: &mut Vec<Check>) -> Result<()> {
    let d = config.dim;
    let schedule = PlanckSchedule::with_slack(d, config.hbar_slack);
    for &n in &config.n_list {
        let g = build_state(mu, n)?.state.with_hbar(schedule.hbar(n))?;
        let predicted = ((2 * n as usize + d) as f64 * config.hbar_slack).abs();
        checks.push(Check::within("eigen", format!("residual[n={n}]"), verify_eigen(&g), predicted, config.tolerances.eigen));
    }
    Ok(())
}

fn microlocal_suite(config: &Config, mu: &ConvexMeasure, checks: &mut Vec<Check>) -> Result<()> {
    let m = &config.microlocal;
    for &radius in &m.radii {
        let bump = radial_bump(config.dim, radius, m.width, m.amplitude)?;
        let norms = m
            .n_list
            .iter()
            .map(|&n| microlocal_norm(&bump, &build_state(mu, n)?.state))
            .collect::<eigenlimit_core::Result<Vec<f64>>>()?;
        let increases = norms.windows(2).filter(|w| w[1] >= w[0]).count() as f64;
        checks.push(Check::within("microlocal", format!("decreasing[r={radius}]"), increases, 0.0, 0.0));
        let last = norms.last().copied().unwrap_or(0.0);
        checks.push(Check::within("microlocal", format!("final_norm[r={radius}]"), last, 0.0, config.tolerances.microlocal));
    }
    Ok(())
}

fn measure_suite(config: &Config, mu: &ConvexMeasure, checks: &mut Vec<Check>) -> Result<()> {
    let mut rng = suite_rng(config.seed, 5);
    let d = config.dim;
    let tol = config.tolerances.orbit_integral;
    let mut flow_gap = 0.0f64;
    for (_, m) in mu.components() {
        for _ in 0..config.samples.orbits {
            let a = random_poly_symbol(d, 4, 6, &mut rng);
            let t = rng.random_range(-10.0..10.0);
            flow_gap = flow_gap.max((orbit_integral(&a.compose_flow(t), m) - orbit_integral(&a, m)).norm());
        }
    }
    checks.push(Check::within("measures", "flow_invariance", flow_gap, 0.0, tol));

    let mut trap_gap = 0.0f64;
    for _ in 0..config.samples.orbits {
        let m = OrbitMeasure::new(random_orbit(d, &mut rng));
        let a = random_poly_symbol(d, 8, 8, &mut rng);
        let trap = orbit_integral_trapezoid(&a, &m, 2 * a.degree() as usize + 1);
        trap_gap = trap_gap.max((trap - orbit_integral(&a, &m)).norm());
    }
    checks.push(Check::within("measures", "trapezoid_agreement", trap_gap, 0.0, tol));

    let one = PolySymbol::constant(d, C64::new(1.0, 0.0));
    checks.push(Check::within("measures", "total_mass", (convex_integral(&one, mu) - 1.0).norm(), 0.0, tol));

    let family = TestFamily::graded(d, 1);
    let tables: Vec<Vec<C64>> = (0..3).map(|_| (0..family.len()).map(|_| random_c64(&mut rng)).collect()).collect();
    let dist = |i: usize, j: usize| weak_star_distance(&tables[i], &tables[j], &family);
    let mut violations = 0.0;
    for i in 0..3 {
        if dist(i, i)? != 0.0 {
            violations += 1.0;
        }
        for j in 0..3 {
            if dist(i, j)? != dist(j, i)? || (i != j && dist(i, j)? <= 0.0) {
                violations += 1.0;
            }
            for k in 0..3 {
                if dist(i, k)? > dist(i, j)? + dist(j, k)? {
                    violations += 1.0;
                }
            }
        }
    }
    checks.push(Check::within("measures", "weak_star_metric_axioms", violations, 0.0, 0.0));
    Ok(())
}

fn quadrature_suite(config: &Config, checks: &mut Vec<Check>) -> Result<()> {
    let mut rng = suite_rng(config.seed, 6);
    let d = config.dim.min(2);
    let spec = QuadratureSpec::default();
    let mut gap = 0.0f64;
    for _ in 0..config.samples.quadrature_pairs {
        let n = rng.random_range(0..=6);
        let a = random_poly_symbol(d, 4, 3, &mut rng);
        let u = random_level_state(d, n, 2, &mut rng)?;
        let v = random_level_state(d, n, 2, &mut rng)?;
        let exact = expectation(&a, &u, &v)?;
        gap = gap.max((quadrature_expectation(&a.into(), &u, &v, &spec)? - exact).norm());
    }
    checks.push(Check::within("quantization", "dual_path_agreement", gap, 0.0, config.tolerances.quadrature));
    Ok(())
}

fn convergence_suite(config: &Config, mu: &ConvexMeasure, checks: &mut Vec<Check>) -> Result<()> {
    let family = resolve_family(&config.family, config.dim)?;
    let rows = convergence_table(mu, family.entries(), &config.n_list)?;
    let mut worst_final = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for (k, (name, _)) in family.entries().iter().enumerate() {
        let errors: Vec<f64> = rows.iter().skip(k).step_by(family.len()).map(|r| r.error).collect();
        debug_assert!(rows.iter().skip(k).step_by(family.len()).all(|r| &r.symbol == name));
        worst_final = worst_final.max(*errors.last().unwrap_or(&0.0));
        worst_ratio = worst_ratio.max(median_successive_ratio(&errors));
    }
    checks.push(Check::within("convergence", "final_error", worst_final, 0.0, config.tolerances.final_error));
    checks.push(Check::below("convergence", "median_successive_ratio", worst_ratio, 1.0));
    Ok(())
}

fn cross_term_suite(config: &Config, mu: &ConvexMeasure, checks: &mut Vec<Check>) -> Result<()> {
    if config.dim < 2 {
        return Ok(());
    }
    let mut rng = suite_rng(config.seed, 8);
    let (first, second) = if mu.len() >= 2 {
        (mu.components()[0].1.orbit().clone(), mu.components()[1].1.orbit().clone())
    } else {
        (random_orbit(config.dim, &mut rng), random_orbit(config.dim, &mut rng))
    };
    let family = resolve_family(&config.family, config.dim)?;
    let last = *config.n_list.iter().max().expect("n_list is non-empty");
    let rows = cross_terms(&first, &second, &family, &[last])?;
    let worst = rows.iter().map(|r| r.value.norm()).fold(0.0, f64::max);
    checks.push(Check::within("cross_terms", format!("final_magnitude[n={last}]"), worst, 0.0, config.tolerances.cross_term));
    Ok(())
}

/// Runs every suite. Failures are recorded as checks, not returned as errors.
pub fn run_suites(config: &Config) -> Result<SuiteReport> {
    let mu = config.measure()?;
    let mut checks = Vec::new();
    group_suite(config, &mut checks)?;
    metaplectic_suite(config, &mut checks)?;
    eigen_suite(config, &mu, &mut checks)?;
    microlocal_suite(config, &mu, &mut checks)?;
    measure_suite(config, &mu, &mut checks)?;
    quadrature_suite(config, &mut checks)?;
    convergence_suite(config, &mu, &mut checks)?;
    cross_term_suite(config, &mu, &mut checks)?;
    let mut metadata = Metadata::for_config(config, "suites");
    metadata.push("hbar_slack", fmt_f64(config.hbar_slack));
    Ok(SuiteReport { metadata, checks })
}

/// Microlocal norms of the bump over `ns`, together with whether they
/// decrease strictly.
pub fn microlocal_sweep(bump: &BumpSymbol, mu: &ConvexMeasure, ns: &[u32]) -> Result<(Vec<f64>, bool)> {
    let norms = ns
        .iter()
        .map(|&n| microlocal_norm(bump, &build_state(mu, n)?.state))
        .collect::<eigenlimit_core::Result<Vec<f64>>>()?;
    let decreasing = strictly_decreasing(&norms);
    Ok((norms, decreasing))
}
