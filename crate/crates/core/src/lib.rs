//! Numerical laboratory for shift-invariant spaces generated by refinable
//! functions and non-stationary subdivision schemes.
//!
//! Masks are Laurent polynomials whose coefficients sum to 2. A
//! [`MaskSchedule`] gives one mask per level; [`subdivision::run`] applies the
//! cascade, [`fourier`] evaluates the Fourier transform of the basic limit
//! function as an infinite product and classifies the decay of its samples,
//! and [`generation`] builds and verifies schedules that reproduce a space of
//! exponential polynomials.

pub mod difference;
pub mod error;
pub mod fourier;
pub mod generation;
pub mod io;
pub mod shift;
pub mod subdivision;
pub mod symbol;

pub use difference::{eliminate, nabla, nabla_power, ShiftableFunction};
pub use error::{Error, Result};
pub use fourier::{
    classify_decay, decay_sequence, h_lambda_basis, omega, omegas, phi_hat_derivs, DecayKind,
    DecaySequence, DecayVerdict, HBasis, HBasisOptions, PeriodicFunction,
};
pub use generation::{
    analytic_limit_audit, check_zero_conditions, construct_schedule, verify_generation,
    AuditReport, ExponentialSpace, GenerationReport, ZeroConditionTable,
};
pub use shift::{
    four_families_demo, is_invariant, minimal_invariant_subspace, BlockShiftOperator, Subspace,
};
pub use subdivision::{
    basic_limit, run, subdivide_step, support_bound, Interval, Mask, MaskSchedule,
    SampledFunction, TailRule,
};
pub use symbol::{lagrange_bound, LaurentPolynomial, NormalizationConvention, Symbol};

pub use num_complex::Complex64;
