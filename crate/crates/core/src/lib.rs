//! Harmonic-oscillator eigenfunctions with prescribed semiclassical limits.
//!
//! States live in the Fock basis of the d-dimensional oscillator at
//! `h_n = 1/(2n + d)`, where level `n` has eigenvalue exactly 1. Moving the
//! reference state `|n, 0, …, 0⟩` with quantized ortho-symplectic maps and
//! superposing the results gives eigenstates whose Weyl expectations converge
//! to integrals against any convex combination of flow orbits.

// negated comparisons are how parameter checks reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod construction;
pub mod error;
pub mod fock;
pub mod measures;
pub mod metaplectic;
pub mod microlocal;
pub mod quadrature;
pub mod symplectic;
pub mod weyl;
pub mod wigner;

/// Crate version, embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use construction::{build_state, convergence_table, cross_terms, BuiltState, ConvergenceRow, CrossTermRow};
pub use error::{Error, Result};
pub use fock::{
    eigenvalue, hbar_schedule, hermite_eval, hermite_eval_all, inner_product, ladder_apply,
    reference_state, reference_state_with_hbar, FockState, Ladder, MultiIndex, PlanckSchedule,
};
pub use measures::{
    approximate_invariant, convex_integral, orbit_integral, orbit_integral_trapezoid,
    weak_star_distance, ConvexMeasure, OrbitMeasure, PointSampler, TestFamily,
};
pub use metaplectic::{
    covariance_check, metaplectic_apply, transport_reference, transport_reference_with_hbar,
    verify_eigen, TransportedState,
};
pub use microlocal::{microlocal_norm, microlocal_norm_by_quadrature};
pub use num_complex::Complex64 as C64;
pub use quadrature::GaussHermite;
pub use symplectic::{
    flow, hermitian_annihilator_dim, is_ortho_symplectic, orbit_through, random_orbit,
    random_ortho_symplectic, random_sphere_point, tangent_dimension_check, transporter, Orbit,
    OrthoSymplectic, PhasePoint,
};
pub use weyl::{expectation, weyl_apply, BumpSymbol, PolySymbol, Symbol};
pub use wigner::{quadrature_expectation, QuadratureSpec};
