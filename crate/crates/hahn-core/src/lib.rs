//! Numerical engine for the Hahn symmetric quantum calculus.
//!
//! The calculus lives on the shift s(t) = q t + omega for 0 < q < 1 and
//! omega >= 0, whose fixed point is w0 = omega / (1 - q). This crate
//! provides:
//!
//! - [`lattice`]: validated parameters, shift orbits, and interval
//!   lattices;
//! - [`expr`]: a small expression language for integrands f(t) and
//!   Lagrangians L(t, u, v);
//! - [`function`]: real functions as host closures, parsed expressions,
//!   lattice tables, or piecewise-linear interpolants;
//! - [`calculus`]: the symmetric difference operator, the series-defined
//!   integral, and fundamental-theorem / integration-by-parts / norm
//!   checks;
//! - [`variational`]: Euler-Lagrange residuals, first variations,
//!   joint-convexity sampling, a fundamental-lemma oracle, and the direct
//!   method for the quadratic model problem.
//!
//! Everything is plain f64 and deterministic: equal inputs give bitwise
//! equal outputs.

// Validation guards are written as `!(x > 0.0)` on purpose: the negation
// must treat NaN as invalid, which `x <= 0.0` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod error;
pub mod expr;
pub mod function;
pub mod lattice;
pub mod util;
pub mod variational;

pub use calculus::{
    default_h0, derivative_fn, ftc_check, hahn_derivative, hahn_integral,
    hahn_integral_from_fixed_point, ibp_residual, norm_r, FtcReport, IbpVariant, SeriesResult,
    DEFAULT_MAX_TERMS, DEFAULT_TOL,
};
pub use error::{HahnError, Result};
pub use expr::{parse, Bindings, Expr, Var, VarSet};
pub use function::{LatticeTableFn, PiecewiseLinear, RealFn};
pub use lattice::{build_interval, HahnInterval, HahnParams};
pub use variational::{
    action, action_difference_quotient, el_residual, first_variation, fundamental_lemma_oracle,
    joint_convexity_check, leitmann_affine_solve, leitmann_gauge_residual, leitmann_gauge_value,
    leitmann_lagrangian, leitmann_reference_lagrangian, on_common_orbit, BoundaryConditions,
    Convexity, ConvexityReport, ElReport, GapSample, Lagrangian, LeitmannSolution, LemmaVerdict,
};
