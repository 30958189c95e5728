//! Acceptance run: one line per criterion, nonzero exit on any unexpected
//! verdict. Criterion 8 has a documented failing sub-check (the origin bump
//! is not monotone in n); its verdict is pinned rather than skipped.

use std::process::{Command, ExitCode};
use std::time::Instant;

use eigenlimit_cli::suites::{random_c64, random_level_state, random_poly_symbol, radial_bump};
use eigenlimit_core::construction::{median_successive_ratio, strictly_decreasing};
use eigenlimit_core::measures::{orbit_integral_trapezoid, Atoms};
use eigenlimit_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LEVELS: [u32; 5] = [8, 16, 32, 64, 128];

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_mix<R: Rng>(d: usize, parts: usize, rng: &mut R) -> ConvexMeasure {
    let mut orbits: Vec<Orbit> = Vec::new();
    while orbits.len() < parts {
        let o = random_orbit(d, rng);
        if orbits.iter().all(|p| !p.same_orbit(&o)) {
            orbits.push(o);
        }
    }
    let raw: Vec<f64> = (0..parts).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let head: f64 = weights[..parts - 1].iter().sum();
    weights[parts - 1] = 1.0 - head;
    ConvexMeasure::new(weights.into_iter().zip(orbits).map(|(w, o)| (w, OrbitMeasure::new(o))).collect()).unwrap()
}

/// Random pair of orbits whose generators overlap by at most 0.9.
fn separated_pair<R: Rng>(d: usize, rng: &mut R) -> (Orbit, Orbit) {
    loop {
        let (a, b) = (random_orbit(d, rng), random_orbit(d, rng));
        if a.overlap(&b) <= 0.9 {
            return (a, b);
        }
    }
}

/// Every monomial of total degree at most `degree`, each with a random coefficient.
fn full_symbol<R: Rng>(d: usize, degree: u32, rng: &mut R) -> PolySymbol {
    let mut a = PolySymbol::zero(d);
    for (_, m) in TestFamily::up_to_degree(d, degree).entries() {
        a = a.add(&m.scale(random_c64(rng)));
    }
    a
}

fn eigenfunction_property() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut r = rng(1);
    for d in 1..=3 {
        let maps: Vec<_> = (0..20).map(|_| transporter(&random_orbit(d, &mut r))).collect();
        let mixes: Vec<_> = (0..5).map(|k| random_mix(d, if d == 1 { 1 } else { 2 + k % 2 }, &mut r)).collect();
        for n in 0..=128 {
            for g in &maps {
                worst = worst.max(verify_eigen(&transport_reference(n, g)));
            }
            for mu in &mixes {
                worst = worst.max(verify_eigen(&build_state(mu, n).unwrap().state));
            }
        }
    }
    verdict(worst <= 1e-12, format!("max residual {worst:.2e} (tol 1e-12)"))
}

fn unitarity_and_covariance() -> Verdict {
    let mut r = rng(2);
    let mut norm_gap: f64 = 0.0;
    for d in 1..=3 {
        for _ in 0..5 {
            let g = random_ortho_symplectic(d, &mut r);
            for n in 0..=200 {
                norm_gap = norm_gap.max((transport_reference(n, &g).norm() - 1.0).abs());
            }
        }
    }
    let mut cov: f64 = 0.0;
    for k in 0..50 {
        let d = 1 + k % 3;
        let g = random_ortho_symplectic(d, &mut r);
        let n = r.random_range(0..=30);
        let u = random_level_state(d, n, 3, &mut r).unwrap();
        let v = random_level_state(d, n, 3, &mut r).unwrap();
        let a = Symbol::from(full_symbol(d, 4, &mut r));
        let (lhs, rhs) = covariance_check(&a, &g, &u, &v).unwrap();
        cov = cov.max((lhs - rhs).norm());
    }
    verdict(
        norm_gap <= 1e-12 && cov <= 1e-9,
        format!("max |‖f‖-1| {norm_gap:.2e} (tol 1e-12), covariance gap {cov:.2e} (tol 1e-9)"),
    )
}

fn ortho_symplectic_suite() -> Verdict {
    let mut r = rng(3);
    let mut closure = true;
    let mut worst: f64 = 0.0;
    for d in 1..=3 {
        let mut product = OrthoSymplectic::identity(d);
        for _ in 0..1000 {
            product = product.compose(&random_ortho_symplectic(d, &mut r));
            closure &= is_ortho_symplectic(&product.to_matrix(), 1e-10).unwrap();
            worst = worst.max(product.deviation());
        }
    }
    let tangent = (1..=3).all(|d| tangent_dimension_check(&random_ortho_symplectic(d, &mut r)) == d * d);
    let annihilator = (2..=4usize).all(|q| {
        (0..20).all(|_| {
            let v: Vec<C64> = (0..q).map(|_| random_c64(&mut r)).collect();
            hermitian_annihilator_dim(&v).unwrap() == (q - 1) * (q - 1)
        })
    });
    verdict(
        closure && tangent && annihilator,
        format!("closure deviation {worst:.2e} (tol 1e-10), tangent dims {tangent}, annihilator dims {annihilator}"),
    )
}

fn dual_path_oracle() -> Verdict {
    let mut r = rng(4);
    let spec = QuadratureSpec::default();
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let d = 1 + k % 2;
        let n = r.random_range(0..=20);
        let a = random_poly_symbol(d, 4, 3, &mut r);
        let u = random_level_state(d, n, 2, &mut r).unwrap();
        let v = random_level_state(d, n, 2, &mut r).unwrap();
        let exact = expectation(&a, &u, &v).unwrap();
        let quad = quadrature_expectation(&a.into(), &u, &v, &spec).unwrap();
        worst = worst.max((exact - quad).norm());
    }
    verdict(worst <= 1e-6, format!("max |ladder - quadrature| {worst:.2e} (tol 1e-6)"))
}

fn uniform_limit_1d() -> Verdict {
    let p = PolySymbol::abs_sqr(1, 0);
    let w = PolySymbol::w(1, 0);
    let symbols = [
        ("|w|^2", p.clone()),
        ("|w|^4", p.pow(2)),
        ("Re w^2", w.pow(2).real_part()),
        ("|w|^6", p.pow(3)),
    ];
    let circle = OrbitMeasure::new(orbit_through(&PhasePoint::basis(1, 0)).unwrap());
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, a) in &symbols {
        let target = orbit_integral(a, &circle);
        let errors: Vec<f64> = LEVELS
            .iter()
            .map(|&n| {
                let v = reference_state(n, 1);
                (expectation(a, &v, &v).unwrap() - target).norm()
            })
            .collect();
        let last = *errors.last().unwrap();
        let ok = if *name == "|w|^2" {
            errors.iter().all(|e| *e == 0.0)
        } else {
            strictly_decreasing(&errors) && last <= 5e-2
        };
        passed &= ok;
        parts.push(format!("{name} final {last:.2e}"));
    }
    verdict(passed, parts.join(", "))
}

fn multi_orbit_convergence() -> Verdict {
    let mut r = rng(6);
    let (first, second) = separated_pair(2, &mut r);
    let mu = ConvexMeasure::new(vec![(0.3, OrbitMeasure::new(first)), (0.7, OrbitMeasure::new(second))]).unwrap();
    let family = TestFamily::graded(2, 2);
    let rows = convergence_table(&mu, family.entries(), &LEVELS).unwrap();
    let mut worst_final: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    for k in 0..family.len() {
        let errors: Vec<f64> = rows.iter().skip(k).step_by(family.len()).map(|r| r.error).collect();
        worst_final = worst_final.max(*errors.last().unwrap());
        worst_ratio = worst_ratio.max(median_successive_ratio(&errors));
    }
    verdict(
        worst_final <= 5e-2 && worst_ratio < 1.0,
        format!("{} symbols, worst final error {worst_final:.2e} (tol 5e-2), worst median ratio {worst_ratio:.3}", family.len()),
    )
}

fn cross_term_decay() -> Verdict {
    let mut r = rng(7);
    let family = TestFamily::up_to_degree(2, 4);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (a, b) = separated_pair(2, &mut r);
        for row in cross_terms(&a, &b, &family, &[128]).unwrap() {
            worst = worst.max(row.value.norm());
        }
    }
    let axes = (orbit_through(&PhasePoint::basis(2, 0)).unwrap(), orbit_through(&PhasePoint::basis(2, 1)).unwrap());
    let exact_zero = cross_terms(&axes.0, &axes.1, &family, &LEVELS)
        .unwrap()
        .iter()
        .all(|row| row.value == C64::new(0.0, 0.0));
    verdict(
        worst <= 1e-2 && exact_zero,
        format!("max |cross term| at n = 128 {worst:.2e} (tol 1e-2), axis pairs exactly 0: {exact_zero}"),
    )
}

/// Returns the verdict and whether it matches the documented outcome.
fn microlocalization() -> (Verdict, bool) {
    let ns = [8, 16, 32, 64];
    let mut passed = true;
    let mut parts = Vec::new();
    let mut outcomes = Vec::new();
    for radius in [0.0, 2.0] {
        let bump = radial_bump(1, radius, 0.2, 1.0).unwrap();
        let norms: Vec<f64> = ns.iter().map(|&n| microlocal_norm(&bump, &reference_state(n, 1)).unwrap()).collect();
        let monotone = strictly_decreasing(&norms);
        let last = *norms.last().unwrap();
        passed &= monotone && last < 1e-3;
        outcomes.push((monotone, last < 1e-3));
        let shown: Vec<String> = norms.iter().map(|x| format!("{x:.2e}")).collect();
        parts.push(format!("|z| = {radius}: [{}] monotone {monotone}", shown.join(", ")));
    }
    // the origin bump is not monotone: exact values 7.0e-7, 9.8e-15, 3.9e-12, 1.0e-11
    let documented = outcomes == [(false, true), (true, true)];
    (verdict(passed, parts.join("; ")), documented)
}

fn measure_machinery() -> Verdict {
    let mut r = rng(9);
    let family = TestFamily::up_to_degree(2, 8);
    let mut trap: f64 = 0.0;
    for _ in 0..5 {
        let m = OrbitMeasure::new(random_orbit(2, &mut r));
        for a in family.symbols() {
            let t = orbit_integral_trapezoid(a, &m, 2 * a.degree() as usize + 1);
            trap = trap.max((t - orbit_integral(a, &m)).norm());
        }
    }

    let (a, b) = separated_pair(2, &mut r);
    let sampler = Atoms::new(vec![a.generator().clone(), b.generator().clone()], vec![0.3, 0.7]).unwrap();
    let small = TestFamily::graded(2, 1);
    let mut weights_ok = true;
    let mut worst_weight: f64 = 0.0;
    for m in [100usize, 1000, 10000] {
        let approx = approximate_invariant(&sampler, m, &small, None, &mut r).unwrap();
        let bound = 3.0 / (m as f64).sqrt();
        for (w, om) in approx.measure.components() {
            let expected = if om.orbit().same_orbit(&a) { 0.3 } else { 0.7 };
            worst_weight = worst_weight.max((w - expected).abs() * (m as f64).sqrt());
            weights_ok &= (w - expected).abs() <= bound;
        }
        weights_ok &= approx.measure.len() == 2;
    }

    let tables: Vec<Vec<C64>> = (0..6).map(|_| (0..small.len()).map(|_| random_c64(&mut r)).collect()).collect();
    let dist = |i: usize, j: usize| weak_star_distance(&tables[i], &tables[j], &small).unwrap();
    let mut axioms = true;
    for i in 0..6 {
        axioms &= dist(i, i) == 0.0;
        for j in 0..6 {
            axioms &= dist(i, j) == dist(j, i);
            axioms &= i == j || dist(i, j) > 0.0;
            for k in 0..6 {
                axioms &= dist(i, k) <= dist(i, j) + dist(j, k);
            }
        }
    }
    verdict(
        trap <= 1e-12 && weights_ok && axioms,
        format!("trapezoid gap {trap:.2e} (tol 1e-12), weight error ≤ {worst_weight:.2}/√m (tol 3/√m), metric axioms {axioms}"),
    )
}

fn determinism() -> Verdict {
    let dir = std::env::temp_dir().join(format!("eigenlimit-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let run = |name: &str| {
        let path = dir.join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_eigenlimit"))
            .args(["suites", "--seed", "42", "--out"])
            .arg(&path)
            .status()
            .unwrap();
        (status.success(), std::fs::read(&path).unwrap())
    };
    let (ok_a, a) = run("a.csv");
    let (ok_b, b) = run("b.csv");
    std::fs::remove_dir_all(&dir).ok();
    verdict(ok_a && ok_b && a == b && !a.is_empty(), format!("{} bytes, identical {}", a.len(), a == b))
}

/// Prints the verdict line; returns 1 when the verdict is not the expected one.
fn report(k: usize, name: &str, v: &Verdict, expected_pass: bool, start: Instant) -> usize {
    let tag = if v.passed { "PASS" } else { "FAIL" };
    println!("criterion {k:>2} {tag} {name}: {} [{:.1}s]", v.detail, start.elapsed().as_secs_f64());
    usize::from(v.passed != expected_pass)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("exact eigenfunction property", eigenfunction_property),
        ("metaplectic unitarity and covariance", unitarity_and_covariance),
        ("ortho-symplectic suite", ortho_symplectic_suite),
        ("dual-path quantization oracle", dual_path_oracle),
        ("one-dimensional uniform limit", uniform_limit_1d),
        ("multi-orbit convergence", multi_orbit_convergence),
        ("cross-term decay", cross_term_decay),
    ];
    let mut unexpected = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        unexpected += report(i + 1, name, &v, true, start);
    }
    let start = Instant::now();
    let (v, documented) = microlocalization();
    unexpected += report(8, "microlocalization", &v, false, start);
    if !documented {
        println!("criterion  8 outcome differs from the documented one (origin bump non-monotone, |z| = 2 bump passing)");
        unexpected += 1;
    }
    let start = Instant::now();
    unexpected += report(9, "measure machinery", &measure_machinery(), true, start);
    let start = Instant::now();
    unexpected += report(10, "determinism", &determinism(), true, start);
    if unexpected == 0 {
        println!("acceptance: all verdicts as expected (criterion 8 fails as documented)");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {unexpected} unexpected verdict(s)");
        ExitCode::FAILURE
    }
}
