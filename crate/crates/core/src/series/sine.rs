//! Sine on `[-4, 4]` to a requested number of decimal places.
//!
//! Two kernels share one contract (`|r − sin x| ≤ 10^(−D)` up to the final
//! truncation): a decimal Maclaurin sum whose cutoff uses the worst-case
//! bound `4^(2j+1)/(2j+1)!`, and a binary fixed-point kernel that divides
//! the argument by `3^k`, sums a short Maclaurin series, and rebuilds the
//! result with `sin 3y = 3 sin y − 4 sin³ y`.

use rug::ops::{DivRounding, Pow};
use rug::Integer;

use super::SeriesError;
use crate::numerics::{pow10, BigFixed, Precision};

/// Largest accepted `|x|`.
pub const SIN_MAX_ABS: i64 = 4;

/// Above this many digits `sin_eval` switches to the reduced kernel.
const MACLAURIN_MAX_DIGITS: usize = 2000;

const LOG2_10: f64 = std::f64::consts::LOG2_10;
const LOG10_4: f64 = 0.602_059_991_327_962_4;

fn check_domain(x: &BigFixed) -> Result<(), SeriesError> {
    let limit = BigFixed::from_int(SIN_MAX_ABS, 0);
    if x.abs() > limit {
        Err(SeriesError::Domain(x.to_decimal_string(12)))
    } else {
        Ok(())
    }
}

/// `sin(x)` truncated to `prec` fractional digits, for `|x| ≤ 4`.
pub fn sin_eval(x: &BigFixed, prec: Precision) -> Result<BigFixed, SeriesError> {
    if prec.digits() <= MACLAURIN_MAX_DIGITS {
        sin_maclaurin(x, prec)
    } else {
        sin_reduced(x, prec)
    }
}

/// Largest `|x|` accepted by [`sin_eval_wide`].
pub const SIN_WIDE_MAX_ABS: i64 = 12;

/// `sin(x)` for `|x| ≤ 12`: inside `[-4, 4]` this is [`sin_eval`]; beyond,
/// one step of `sin x = 3 sin(x/3) − 4 sin³(x/3)` brings the argument back
/// into range.
pub fn sin_eval_wide(x: &BigFixed, prec: Precision) -> Result<BigFixed, SeriesError> {
    let limit = BigFixed::from_int(SIN_MAX_ABS, 0);
    if x.abs() <= limit {
        return sin_eval(x, prec);
    }
    if x.abs() > BigFixed::from_int(SIN_WIDE_MAX_ABS, 0) {
        return Err(SeriesError::Domain(x.to_decimal_string(12)));
    }
    // the cubic amplifies errors by at most 9
    let work = prec.with_guard(3);
    let third = x
        .div_int(&Integer::from(3), work.with_guard(1))
        .expect("nonzero divisor");
    let s = sin_eval(&third, work)?;
    let cube = s.mul(&s, work).mul(&s, work);
    let three_s = s.mul_int(&Integer::from(3), work);
    let four_cube = cube.mul_int(&Integer::from(4), work);
    Ok(three_s.sub(&four_cube, prec))
}

/// Count of Maclaurin terms kept: term `j` is dropped once
/// `4^(2j+1)/(2j+1)! < 10^(−digits−2)`.
fn maclaurin_terms(digits: usize) -> usize {
    let threshold = -(digits as f64) - 2.0;
    let mut log_bound = LOG10_4;
    let mut j = 0usize;
    // the float log is accurate to far better than the margin
    while log_bound >= threshold - 1e-6 {
        j += 1;
        let n = (2 * j) as f64;
        log_bound += 2.0 * LOG10_4 - (n * (n + 1.0)).log10();
    }
    j
}

/// Direct decimal Maclaurin sum, evaluated with a few guard digits and
/// truncated to `prec`.
pub fn sin_maclaurin(x: &BigFixed, prec: Precision) -> Result<BigFixed, SeriesError> {
    check_domain(x)?;
    let terms = maclaurin_terms(prec.digits());
    // each term costs two truncations
    let work = prec.with_guard(3 + terms.to_string().len());

    let xw = x.round_to(work.digits());
    let x2 = xw.mul(&xw, work);
    let mut term = xw.clone();
    let mut sum = xw;
    for j in 1..terms {
        let denom = Integer::from((2 * j) as u64 * (2 * j + 1) as u64);
        term = term
            .mul(&x2, work)
            .div_int(&denom, work)
            .expect("nonzero denominator");
        sum = if j % 2 == 1 {
            sum.sub(&term, work)
        } else {
            sum.add(&term, work)
        };
    }
    Ok(sum.round_to(prec.digits()))
}

/// Plan for the reduced kernel: number of triplings and the binary working
/// precision including guard bits.
#[derive(Debug, Clone, Copy)]
struct ReducedPlan {
    triplings: u32,
    bits: u32,
}

impl ReducedPlan {
    fn for_digits(digits: usize) -> Self {
        let target = ((digits as f64 + 2.0) * LOG2_10).ceil();
        let log2_3 = 3f64.log2();
        let max_k = (4.0 * target.sqrt()) as u32 + 8;
        let mut best = (f64::INFINITY, 0u32, 0usize);
        for k in 0..=max_k {
            let terms = series_terms(2.0 - k as f64 * log2_3, target + 4.0 * k as f64);
            // one multiply per term, two per tripling
            let cost = terms as f64 + 2.0 * k as f64;
            if cost < best.0 {
                best = (cost, k, terms);
            }
        }
        let (_, k, terms) = best;
        // tripling can amplify an error by up to 9 and adds about 9 ulps
        let guard = (k as f64 * 9f64.log2()).ceil()
            + ((3 * terms + 9 * k as usize + 16) as f64).log2().ceil()
            + 8.0;
        ReducedPlan {
            triplings: k,
            bits: (target + guard) as u32,
        }
    }
}

/// Terms until `2^(log2_y (2j+1)) / (2j+1)!` drops below `2^(−bits)`.
fn series_terms(log2_y: f64, bits: f64) -> usize {
    let mut log_term = log2_y;
    let mut j = 0usize;
    while log_term > -bits {
        j += 1;
        let n = (2 * j) as f64;
        log_term += 2.0 * log2_y - (n * (n + 1.0)).log2();
        if j > 10_000_000 {
            break;
        }
    }
    j + 1
}

/// `(t · u) >> bits`, dropping the low limbs of both factors that cannot
/// reach the result. Both inputs are non-negative and below `2^bits`;
/// the error is at most 3 units.
fn mul_shifted(t: &Integer, u: &Integer, bits: u32) -> Integer {
    let t_room = bits.saturating_sub(t.significant_bits());
    let u_room = bits.saturating_sub(u.significant_bits());
    let dropped = t_room + u_room;
    if dropped >= bits {
        return Integer::new();
    }
    let t_cut = Integer::from(t >> u_room);
    let u_cut = Integer::from(u >> t_room);
    Integer::from(&t_cut * &u_cut) >> (bits - dropped)
}

/// Binary fixed-point kernel with argument reduction by `3^k`.
pub fn sin_reduced(x: &BigFixed, prec: Precision) -> Result<BigFixed, SeriesError> {
    check_domain(x)?;
    let plan = ReducedPlan::for_digits(prec.digits());
    let bits = plan.bits;

    let negative = x.signum() < 0;
    let abs_scaled = Integer::from(x.mantissa().abs_ref()) << bits;
    let xb = abs_scaled.div_trunc(pow10(x.frac_digits()));
    let y = xb.div_trunc(Integer::from(3).pow(plan.triplings));

    // Maclaurin sum for the reduced argument; terms shrink monotonically
    let y2 = Integer::from(&y * &y) >> bits;
    let mut term = y.clone();
    let mut sum = y;
    let mut j: u64 = 1;
    loop {
        term = mul_shifted(&term, &y2, bits) / Integer::from((2 * j) * (2 * j + 1));
        if term.cmp0() == std::cmp::Ordering::Equal {
            break;
        }
        if j % 2 == 1 {
            sum -= &term;
        } else {
            sum += &term;
        }
        j += 1;
    }

    let mut s = sum;
    for _ in 0..plan.triplings {
        let sq = Integer::from(&s * &s) >> bits;
        let cube = Integer::from(&sq * &s) >> bits;
        s = 3 * s - 4 * cube;
    }

    let digits = prec.digits();
    let mut mantissa = Integer::from(s.abs_ref()) * pow10(digits);
    mantissa >>= bits;
    if negative != (s.cmp0() == std::cmp::Ordering::Less)
        && mantissa.cmp0() != std::cmp::Ordering::Equal
    {
        mantissa = -mantissa;
    }
    Ok(BigFixed::from_parts(mantissa, digits))
}
