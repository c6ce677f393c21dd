//! Independent checks on a run: a Machin-formula π oracle, digit
//! agreement, empirical order and error-constant estimates, and the exact
//! check of the derivatives of `S` at π.
//!
//! Nothing here calls the sine kernel, so agreement between the oracle and
//! an iteration is evidence about the iteration rather than a tautology.

use rug::ops::DivRounding;
use rug::{Integer, Rational};
use thiserror::Error;

use crate::iterator::{IterationTrace, Termination};
use crate::numerics::{pow10, BigFixed};
use crate::series::{error_constant, taylor_of_s, SeriesError};

/// Guard digits for the oracle's internal fixed-point sums.
const MACHIN_GUARD_DIGITS: usize = 10;

/// An error counts as resolved when it sits at least this many digits
/// above the coarser of the two precisions it was computed from.
const RESOLVED_MARGIN_DIGITS: i64 = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("need at least 3 steps with nonzero deltas, got {0}")]
    InsufficientData(usize),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// `arctan(1/m) · 10^digits`, truncated, by the alternating series.
fn arctan_inverse_scaled(m: u32, digits: usize) -> Integer {
    let m_sq = Integer::from(m) * m;
    let mut power = pow10(digits).div_trunc(Integer::from(m));
    let mut sum = power.clone();
    let mut k: u32 = 1;
    loop {
        power = power.div_trunc(&m_sq);
        if power.cmp0() == std::cmp::Ordering::Equal {
            break;
        }
        let term = Integer::from(&power / (2 * k + 1));
        if k % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        k += 1;
    }
    sum
}

/// π to `digits` places from `π/4 = 4 arctan(1/5) − arctan(1/239)`.
pub fn machin_pi(digits: usize) -> BigFixed {
    let work = digits.max(1) + MACHIN_GUARD_DIGITS;
    let a = arctan_inverse_scaled(5, work);
    let b = arctan_inverse_scaled(239, work);
    let quarter = (4 * a) - b;
    BigFixed::from_parts(quarter * 4, work).round_to(digits.max(1))
}

/// Largest `m` with `|a − b| < 10^(−m)`, capped at the coarser precision.
pub fn count_matching_digits(a: &BigFixed, b: &BigFixed) -> usize {
    let cap = a.frac_digits().min(b.frac_digits());
    match a.sub_exact(b).magnitude_exponent() {
        None => cap,
        Some(e) if e >= 0 => 0,
        Some(e) => ((-e - 1) as usize).min(cap),
    }
}

/// Order estimate from the step pair `(step, step + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderEstimate {
    pub step: usize,
    pub value: f64,
}

/// `q_n = log10 δ_{n+1} / log10 δ_n` for each consecutive pair of steps
/// whose deltas are nonzero and below one.
pub fn estimate_orders(trace: &IterationTrace) -> Result<Vec<OrderEstimate>, VerifyError> {
    let usable = trace
        .steps
        .iter()
        .filter(|s| s.delta_exponent.is_some())
        .count();
    if usable < 3 {
        return Err(VerifyError::InsufficientData(usable));
    }
    let estimates = trace
        .steps
        .windows(2)
        .filter_map(|pair| {
            let lo = pair[0].delta_log10()?;
            let hi = pair[1].delta_log10()?;
            (lo < 0.0).then(|| OrderEstimate {
                step: pair[0].index,
                value: hi / lo,
            })
        })
        .collect();
    Ok(estimates)
}

/// `|e_{n+1}| / |e_n|^(2P+1)` with `e_n = x_n − π_ref`, for the latest pair
/// of iterates whose errors are both resolved above the noise floor.
pub fn estimate_error_constant(
    trace: &IterationTrace,
    pi_ref: &BigFixed,
    order: usize,
) -> Result<f64, VerifyError> {
    if order == 0 {
        return Err(SeriesError::InvalidOrder.into());
    }
    if trace.terminated_by != Termination::Epsilon {
        return Err(VerifyError::InsufficientPrecision(format!(
            "run ended by {} rather than converging",
            trace.terminated_by
        )));
    }
    let log_errors: Vec<Option<f64>> = trace
        .iterates()
        .map(|x| {
            let floor = x.frac_digits().min(pi_ref.frac_digits()) as i64;
            let err = x.sub_exact(pi_ref);
            match err.magnitude_exponent() {
                Some(e) if e >= -floor + RESOLVED_MARGIN_DIGITS => err.log10_abs(),
                _ => None,
            }
        })
        .collect();
    let q = (2 * order + 1) as f64;
    log_errors
        .windows(2)
        .rev()
        .find_map(|pair| match (pair[0], pair[1]) {
            (Some(lo), Some(hi)) => Some(10f64.powf(hi - q * lo)),
            _ => None,
        })
        .ok_or_else(|| {
            VerifyError::InsufficientPrecision("no consecutive pair of resolved errors".into())
        })
}

/// Outcome of the coefficient check for a single order `P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderCheck {
    pub order: usize,
    /// `a_{2P+1}` of `S(π+t) − π`.
    pub leading: Rational,
    pub expected: Rational,
    /// Whether `a_1..a_{2P}` all vanish.
    pub lower_vanish: bool,
    pub passed: bool,
}

impl OrderCheck {
    /// `k = 2P + 1`.
    pub fn derivative_order(&self) -> usize {
        2 * self.order + 1
    }

    /// `k!`, the denominator of `a_k` written as `S^(k)(π)/k!`.
    pub fn factorial(&self) -> Integer {
        Integer::from(Integer::factorial(self.derivative_order() as u32))
    }

    /// `S^(k)(π) = k! · a_k`.
    pub fn derivative_at_pi(&self) -> Rational {
        Rational::from(&self.leading * self.factorial())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremCheck {
    pub passed: bool,
    pub details: Vec<OrderCheck>,
}

/// For every `P ≤ max_order`, expands `S(π+t) − π` exactly and checks that
/// the first `2P` coefficients vanish and `a_{2P+1}` equals the error
/// constant.
pub fn verify_theorem(max_order: usize) -> Result<TheoremCheck, VerifyError> {
    if max_order == 0 {
        return Err(SeriesError::InvalidOrder.into());
    }
    let details = std::thread::scope(|scope| {
        let handles: Vec<_> = (1..=max_order)
            .map(|p| scope.spawn(move || check_order(p)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("theorem check thread panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(TheoremCheck {
        passed: details.iter().all(|d| d.passed),
        details,
    })
}

fn check_order(order: usize) -> Result<OrderCheck, VerifyError> {
    let k = 2 * order + 1;
    let series = taylor_of_s(order, k)?;
    let lower_vanish = series.coeffs()[1..k]
        .iter()
        .all(|c| c.cmp0() == std::cmp::Ordering::Equal);
    let leading = series.coeff(k).clone();
    let expected = error_constant(order)?;
    Ok(OrderCheck {
        order,
        passed: lower_vanish && leading == expected,
        leading,
        expected,
        lower_vanish,
    })
}

/// Everything the verification side knows about one run.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub order_estimates: Vec<OrderEstimate>,
    pub error_constant_estimate: Option<f64>,
    pub error_constant_exact: Rational,
    /// Digits agreeing with the oracle, capped at the run's target;
    /// `None` when no oracle was supplied.
    pub matched_digits: Option<usize>,
    pub theorem_check_passed: bool,
}

impl ConvergenceReport {
    /// Gathers the report for `trace`; `pi_ref` enables the oracle-based
    /// fields.
    pub fn from_trace(
        trace: &IterationTrace,
        pi_ref: Option<&BigFixed>,
    ) -> Result<Self, VerifyError> {
        let order = trace.config.order;
        let order_estimates = estimate_orders(trace).unwrap_or_default();
        let error_constant_estimate =
            pi_ref.and_then(|pi| estimate_error_constant(trace, pi, order).ok());
        let matched_digits = pi_ref.map(|pi| {
            count_matching_digits(&trace.final_value, pi).min(trace.config.target_digits)
        });
        Ok(ConvergenceReport {
            order_estimates,
            error_constant_estimate,
            error_constant_exact: error_constant(order)?,
            matched_digits,
            theorem_check_passed: check_order(order)?.passed,
        })
    }
}
