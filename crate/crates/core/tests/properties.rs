use eigenlimit_core::measures::{orbit_integral_trapezoid, OrbitMeasure};
use eigenlimit_core::weyl::weyl_apply_by_words;
use eigenlimit_core::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_c64<R: Rng>(r: &mut R) -> C64 {
    C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

/// Random polynomial symbol with a few monomials of degree at most `deg`.
fn random_symbol<R: Rng>(d: usize, deg: u32, terms: usize, r: &mut R) -> PolySymbol {
    let mut a = PolySymbol::zero(d);
    for _ in 0..terms {
        let total = r.random_range(0..=deg);
        let b_level = r.random_range(0..=total);
        let bs = MultiIndex::with_level(d, b_level);
        let gs = MultiIndex::with_level(d, total - b_level);
        let b = bs[r.random_range(0..bs.len())].clone();
        let g = gs[r.random_range(0..gs.len())].clone();
        a = a.add(&PolySymbol::monomial(b, g, random_c64(r)));
    }
    a
}

fn random_level_state<R: Rng>(d: usize, n: u32, h: f64, terms: usize, r: &mut R) -> FockState {
    let basis = MultiIndex::with_level(d, n);
    let mut u = FockState::new(d, h).unwrap();
    for _ in 0..terms {
        u.add_coeff(basis[r.random_range(0..basis.len())].clone(), random_c64(r)).unwrap();
    }
    u.normalized().unwrap()
}

fn distance(u: &FockState, v: &FockState) -> f64 {
    let mut diff = u.clone();
    diff.axpy(C64::new(-1.0, 0.0), v).unwrap();
    diff.norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ladder_number_identities(n in 0u32..200, h in 0.001f64..2.0) {
        let s = FockState::basis(MultiIndex::new(vec![n]), h).unwrap();
        let up = ladder_apply(Ladder::Creation, 0, &s).unwrap();
        let aa_star = ladder_apply(Ladder::Annihilation, 0, &up).unwrap();
        let a_star_a = ladder_apply(Ladder::Creation, 0, &ladder_apply(Ladder::Annihilation, 0, &s).unwrap()).unwrap();
        let idx = MultiIndex::new(vec![n]);
        prop_assert!((aa_star.coeff(&idx).re - 2.0 * h * (n + 1) as f64).abs() <= 1e-12 * (n + 1) as f64 * h);
        prop_assert!((a_star_a.coeff(&idx).re - 2.0 * h * n as f64).abs() <= 1e-12 * (n + 1) as f64 * h);
        prop_assert_eq!(up.homogeneous_level(), Some(n + 1));
    }

    #[test]
    fn group_closure_and_inverse(seed in any::<u64>(), d in 1usize..=4) {
        let mut r = rng(seed);
        let g = random_ortho_symplectic(d, &mut r);
        let h = random_ortho_symplectic(d, &mut r);
        prop_assert!(is_ortho_symplectic(&g.compose(&h).to_matrix(), 1e-10).unwrap());
        prop_assert!(is_ortho_symplectic(&g.inverse().to_matrix(), 1e-10).unwrap());
        let prod = g.to_unitary() * h.to_unitary();
        let diff = g.compose(&h).to_unitary() - prod;
        prop_assert!(diff.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn flow_commutes_with_group(seed in any::<u64>(), d in 1usize..=4, t in -10.0f64..10.0) {
        let mut r = rng(seed);
        let g = random_ortho_symplectic(d, &mut r);
        let z = random_sphere_point(d, &mut r);
        prop_assert!(g.apply(&flow(t, &z)).distance(&flow(t, &g.apply(&z))) < 1e-12);
        prop_assert!((flow(t, &z).norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transporter_hits_target(seed in any::<u64>(), d in 1usize..=5) {
        let mut r = rng(seed);
        let target = random_orbit(d, &mut r);
        let g = transporter(&target);
        prop_assert!(is_ortho_symplectic(&g.to_matrix(), 1e-10).unwrap());
        let image = orbit_through(&g.apply(&PhasePoint::basis(d, 0))).unwrap();
        prop_assert_eq!(image, target);
    }

    #[test]
    fn transport_is_unitary(seed in any::<u64>(), d in 1usize..=3, n in 0u32..=200) {
        let g = random_ortho_symplectic(d, &mut rng(seed));
        let t = transport_reference(n, &g);
        prop_assert!((t.norm() - 1.0).abs() <= 1e-12);
        prop_assert_eq!(t.homogeneous_level(), Some(n));
        prop_assert!(verify_eigen(&t) <= 1e-12);
    }

    #[test]
    fn transport_depends_on_first_column_of_product(seed in any::<u64>(), d in 1usize..=3, n in 0u32..=40) {
        let mut r = rng(seed);
        let g = random_ortho_symplectic(d, &mut r);
        let h = random_ortho_symplectic(d, &mut r);
        let direct = transport_reference(n, &g.compose(&h));
        // an element with the same first column built from the product's column
        let column = (g.complex_action() * h.complex_action()).column(0).into_owned();
        let via_orbit = transport_reference(n, &transporter(&orbit_through(&PhasePoint::from_complex(&column)).unwrap()));
        // both are T f_n for maps sending e_1 to the same vector
        for (alpha, c) in direct.coeffs() {
            prop_assert!((via_orbit.coeff(alpha) - c).norm() <= 1e-12);
        }
        prop_assert_eq!(direct.support_len(), via_orbit.support_len());
    }

    #[test]
    fn weyl_apply_is_linear(seed in any::<u64>(), d in 1usize..=2, n in 0u32..12) {
        let mut r = rng(seed);
        let h = hbar_schedule(n, d);
        let a = random_symbol(d, 4, 3, &mut r);
        let b = random_symbol(d, 4, 3, &mut r);
        let u = random_level_state(d, n, h, 3, &mut r);
        let v = random_level_state(d, n, h, 3, &mut r);
        let (s, t) = (random_c64(&mut r), random_c64(&mut r));
        let combo = a.scale(s).add(&b.scale(t));
        let mut lhs_expected = weyl_apply(&a, &u).unwrap().scaled(s);
        lhs_expected.axpy(t, &weyl_apply(&b, &u).unwrap()).unwrap();
        prop_assert!(distance(&weyl_apply(&combo, &u).unwrap(), &lhs_expected) < 1e-12);
        let mut uv = u.scaled(s);
        uv.axpy(t, &v).unwrap();
        let mut rhs_expected = weyl_apply(&a, &u).unwrap().scaled(s);
        rhs_expected.axpy(t, &weyl_apply(&a, &v).unwrap()).unwrap();
        prop_assert!(distance(&weyl_apply(&a, &uv).unwrap(), &rhs_expected) < 1e-12);
    }

    #[test]
    fn real_symbols_are_self_adjoint(seed in any::<u64>(), d in 1usize..=3, n in 0u32..15) {
        let mut r = rng(seed);
        let h = hbar_schedule(n, d);
        let a = random_symbol(d, 4, 4, &mut r).real_part();
        let u = random_level_state(d, n, h, 4, &mut r);
        let v = random_level_state(d, n, h, 4, &mut r);
        let uv = expectation(&a, &u, &v).unwrap();
        let vu = expectation(&a, &v, &u).unwrap();
        prop_assert!((uv - vu.conj()).norm() <= 1e-12);
        prop_assert!(expectation(&a, &u, &u).unwrap().im.abs() <= 1e-12);
    }

    #[test]
    fn recursion_agrees_with_word_average(seed in any::<u64>(), d in 1usize..=2, n in 0u32..8) {
        let mut r = rng(seed);
        let a = random_symbol(d, 6, 3, &mut r);
        let u = random_level_state(d, n, 0.1, 3, &mut r);
        prop_assert!(distance(&weyl_apply(&a, &u).unwrap(), &weyl_apply_by_words(&a, &u).unwrap()) < 1e-12);
    }

    #[test]
    fn commutator_with_energy_vanishes_on_eigenstates(seed in any::<u64>(), d in 1usize..=3, n in 0u32..25) {
        let mut r = rng(seed);
        let h = hbar_schedule(n, d);
        let a = random_symbol(d, 4, 4, &mut r);
        let u = random_level_state(d, n, h, 4, &mut r);
        let p = PolySymbol::energy(d);
        let pa = weyl_apply(&p, &weyl_apply(&a, &u).unwrap()).unwrap();
        let ap = weyl_apply(&a, &weyl_apply(&p, &u).unwrap()).unwrap();
        let val = inner_product(&pa, &u).unwrap() - inner_product(&ap, &u).unwrap();
        prop_assert!(val.norm() <= 1e-12);
    }

    #[test]
    fn covariance_identity(seed in any::<u64>(), d in 1usize..=3, n in 0u32..=30) {
        let mut r = rng(seed);
        let h = hbar_schedule(n, d);
        let g = random_ortho_symplectic(d, &mut r);
        let a = Symbol::from(random_symbol(d, 4, 3, &mut r));
        let u = random_level_state(d, n, h, 2, &mut r);
        let v = random_level_state(d, n, h, 2, &mut r);
        let (lhs, rhs) = covariance_check(&a, &g, &u, &v).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn orbit_integrals_are_flow_invariant(seed in any::<u64>(), d in 1usize..=3, t in -5.0f64..5.0) {
        let mut r = rng(seed);
        let m = OrbitMeasure::new(random_orbit(d, &mut r));
        let a = random_symbol(d, 8, 5, &mut r);
        prop_assert!((orbit_integral(&a.compose_flow(t), &m) - orbit_integral(&a, &m)).norm() <= 1e-12);
        let trap = orbit_integral_trapezoid(&a, &m, 2 * a.degree() as usize + 1);
        prop_assert!((trap - orbit_integral(&a, &m)).norm() <= 1e-12);
    }

    #[test]
    fn weak_star_metric_axioms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let family = TestFamily::graded(2, 1);
        let k = family.len();
        let tables: Vec<Vec<C64>> = (0..3).map(|_| (0..k).map(|_| random_c64(&mut r)).collect()).collect();
        let dist = |i: usize, j: usize| weak_star_distance(&tables[i], &tables[j], &family).unwrap();
        prop_assert_eq!(dist(0, 0), 0.0);
        prop_assert_eq!(dist(0, 1), dist(1, 0));
        prop_assert!(dist(0, 1) > 0.0);
        prop_assert!(dist(0, 2) <= dist(0, 1) + dist(1, 2) + 1e-15);
    }
}

#[test]
fn swap_covariance_on_transported_states() {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let g = OrthoSymplectic::from_unitary(&DMatrix::from_row_slice(2, 2, &[z, o, o, z])).unwrap();
    for n in [1u32, 6, 20] {
        let u = transport_reference(n, &g).into_state();
        let (lhs, rhs) = covariance_check(&PolySymbol::w(2, 0).into(), &g, &u, &u).unwrap();
        assert!((lhs - rhs).norm() < 1e-9);
    }
}
