//! Computes π as the attracting fixed point of
//! `S(x) = x + Σ_{k=1}^{P} c_k sin(x)^(2k−1)`, where the `c_k` are the
//! leading coefficients of the arcsin power series. The iteration
//! converges with order exactly `2P + 1`.
//!
//! Modules, bottom-up:
//! - [`numerics`]: decimal fixed-point arithmetic on big integers.
//! - [`series`]: coefficients, the sine kernel, `S` itself, and exact
//!   formal power series used to check the derivative structure at π.
//! - [`iterator`]: the driven iteration with precision ladder, ε
//!   termination and divergence detection.
//! - [`verify`]: Machin π oracle, digit agreement, order and
//!   error-constant estimators, and the exact theorem check.

pub mod iterator;
pub mod numerics;
pub mod series;
pub mod verify;

pub use iterator::{
    iterate, plan_precision_ladder, resume, IterateError, IterationTrace, Run, RunConfig,
    StepRecord, Termination,
};
pub use numerics::{BigFixed, NumericsError, Precision};
pub use rug::{Integer, Rational};
pub use series::{
    error_constant, make_coefficients, s_eval, s_eval_wide, sin_eval, sin_eval_wide, taylor_of_s,
    CoefficientTable, FormalSeries, SeriesError,
};
pub use verify::{
    count_matching_digits, estimate_error_constant, estimate_orders, machin_pi, verify_theorem,
    ConvergenceReport, OrderEstimate, TheoremCheck, VerifyError,
};
