//! The fixed-point function and everything it is built from.

mod formal;
mod sine;

use rug::{Integer, Rational};
use thiserror::Error;

use crate::numerics::{BigFixed, Precision};

pub use formal::{error_constant, taylor_of_s, FormalSeries};
pub use sine::{
    sin_eval, sin_eval_wide, sin_maclaurin, sin_reduced, SIN_MAX_ABS, SIN_WIDE_MAX_ABS,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("order P must be at least 1")]
    InvalidOrder,
    #[error("sine argument {0} outside [-4, 4]")]
    Domain(String),
    #[error("truncation order {requested} is below the required {required}")]
    InsufficientOrder { requested: usize, required: usize },
}

/// The arcsin coefficients `c_1..c_P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientTable {
    coeffs: Vec<Rational>,
}

impl CoefficientTable {
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// `c_k` for `k` in `1..=P`.
    pub fn get(&self, k: usize) -> &Rational {
        &self.coeffs[k - 1]
    }
}

/// `c_k = (∏_{ℓ<k} (2ℓ−1)/(2ℓ)) / (2k−1)` for `k = 1..=P`, via
/// `c_k = c_{k−1} (2k−3)² / ((2k−2)(2k−1))`.
pub fn make_coefficients(order: usize) -> Result<CoefficientTable, SeriesError> {
    if order == 0 {
        return Err(SeriesError::InvalidOrder);
    }
    let mut coeffs = Vec::with_capacity(order);
    let mut c = Rational::from(1);
    coeffs.push(c.clone());
    for k in 2..=order as u64 {
        let odd = 2 * k - 3;
        c *= Rational::from((odd * odd, (2 * k - 2) * (2 * k - 1)));
        coeffs.push(c.clone());
    }
    Ok(CoefficientTable { coeffs })
}

/// `S(x) = x + Σ c_k s^(2k−1)` with `s = sin(x)`, error at most
/// `3·10^(−prec)`.
pub fn s_eval(
    x: &BigFixed,
    table: &CoefficientTable,
    prec: Precision,
) -> Result<BigFixed, SeriesError> {
    s_eval_with(x, table, prec, sin_eval)
}

/// [`s_eval`] accepting `|x| ≤ 12`, for iterates that start or wander
/// past 4.
pub fn s_eval_wide(
    x: &BigFixed,
    table: &CoefficientTable,
    prec: Precision,
) -> Result<BigFixed, SeriesError> {
    s_eval_with(x, table, prec, sin_eval_wide)
}

fn s_eval_with(
    x: &BigFixed,
    table: &CoefficientTable,
    prec: Precision,
    sine: fn(&BigFixed, Precision) -> Result<BigFixed, SeriesError>,
) -> Result<BigFixed, SeriesError> {
    // one digit per decade of P on top of the base two keeps the
    // accumulated truncation of ~3P operations below one output ulp
    let guard = 2 + decimal_width(table.order());
    let work = prec.with_guard(guard);
    let skip_below = -(work.digits() as i64);

    let s = sine(x, work)?;
    let s2 = s.mul(&s, work);
    let mut power = s;
    let mut acc = BigFixed::zero(work.digits());
    for (i, c) in table.coeffs().iter().enumerate() {
        if i > 0 {
            power = power.mul(&s2, work);
        }
        // |c_k| ≤ 1 and |s| ≤ 1, so once a power falls below the working
        // ulp every later term does too
        match power.magnitude_exponent() {
            None => break,
            Some(e) if e < skip_below => break,
            _ => {}
        }
        let term = scale_by_rational(&power, c, work);
        acc = acc.add(&term, work);
    }
    Ok(x.add(&acc, prec))
}

/// `v · num / den` with exact integer multiply then a single truncating
/// divide.
fn scale_by_rational(v: &BigFixed, c: &Rational, prec: Precision) -> BigFixed {
    let scaled = BigFixed::from_parts(Integer::from(v.mantissa() * c.numer()), v.frac_digits());
    scaled
        .div_int(c.denom(), prec)
        .expect("rational denominators are positive")
}

fn decimal_width(n: usize) -> usize {
    n.to_string().len()
}
