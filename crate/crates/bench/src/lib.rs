//! Seeded inputs shared by the benchmarks.

use eigenlimit_core::{random_ortho_symplectic, transport_reference, FockState, OrthoSymplectic, PolySymbol, TestFamily, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed)
}

pub fn element(d: usize) -> OrthoSymplectic {
    random_ortho_symplectic(d, &mut rng())
}

/// Transported reference state at level `n`.
pub fn transported(n: u32, d: usize) -> FockState {
    transport_reference(n, &element(d)).into_state()
}

/// All monomials of degree at most `degree` with random coefficients.
pub fn dense_symbol(d: usize, degree: u32) -> PolySymbol {
    let mut r = rng();
    TestFamily::up_to_degree(d, degree).symbols().fold(PolySymbol::zero(d), |acc, m| {
        acc.add(&m.scale(C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))))
    })
}
