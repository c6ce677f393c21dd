//! Decimal fixed-point numbers backed by arbitrary-size integers.
//!
//! A [`BigFixed`] is `mantissa × 10^(−frac_digits)`. Every operation that
//! can produce more fractional digits than requested truncates toward zero,
//! so results are deterministic bit for bit. The one exception is
//! [`BigFixed::round_nearest`], which callers opt into explicitly.

use std::cmp::Ordering;
use std::fmt;

use rug::ops::{DivRounding, Pow};
use rug::Integer;
use thiserror::Error;

const LOG10_2: f64 = std::f64::consts::LOG10_2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericsError {
    #[error("malformed numeral: unexpected {found} at position {position}")]
    Parse { position: usize, found: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision must be at least one digit")]
    InvalidPrecision,
}

/// Number of decimal digits kept after the point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Precision(usize);

impl Precision {
    pub fn new(digits: usize) -> Result<Self, NumericsError> {
        if digits == 0 {
            Err(NumericsError::InvalidPrecision)
        } else {
            Ok(Precision(digits))
        }
    }

    pub fn digits(self) -> usize {
        self.0
    }

    /// Widens the precision by `extra` digits.
    pub fn with_guard(self, extra: usize) -> Self {
        Precision(self.0 + extra)
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `10^n` as an integer.
pub fn pow10(n: usize) -> Integer {
    Integer::from(10).pow(u32::try_from(n).expect("decimal exponent exceeds u32"))
}

/// Count of decimal digits in `|n|`; zero has no digits.
pub fn decimal_digit_count(n: &Integer) -> usize {
    if n.cmp0() == Ordering::Equal {
        return 0;
    }
    let bits = n.significant_bits() as usize;
    // 10^(d-1) <= |n| < 10^d; the float estimate is off by at most one.
    let mut d = ((bits - 1) as f64 * LOG10_2).floor() as usize + 1;
    let abs = n.clone().abs();
    if abs >= pow10(d) {
        d += 1;
    } else if d > 1 && abs < pow10(d - 1) {
        d -= 1;
    }
    d
}

/// Arbitrary-precision decimal fixed-point value.
#[derive(Clone, Debug)]
pub struct BigFixed {
    mantissa: Integer,
    frac_digits: usize,
}

impl BigFixed {
    pub fn from_parts(mantissa: Integer, frac_digits: usize) -> Self {
        BigFixed {
            mantissa,
            frac_digits,
        }
    }

    pub fn zero(frac_digits: usize) -> Self {
        Self::from_parts(Integer::new(), frac_digits)
    }

    pub fn from_int(value: i64, frac_digits: usize) -> Self {
        Self::from_parts(Integer::from(value) * pow10(frac_digits), frac_digits)
    }

    pub fn mantissa(&self) -> &Integer {
        &self.mantissa
    }

    pub fn frac_digits(&self) -> usize {
        self.frac_digits
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.cmp0() == Ordering::Equal
    }

    pub fn signum(&self) -> i32 {
        match self.mantissa.cmp0() {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Self::from_parts(self.mantissa.clone().abs(), self.frac_digits)
    }

    pub fn neg(&self) -> Self {
        Self::from_parts(-self.mantissa.clone(), self.frac_digits)
    }

    /// Parses a decimal numeral and truncates it toward zero at `prec` digits.
    ///
    /// Accepts an optional sign, integer digits, an optional fraction and an
    /// optional `e±k` exponent, e.g. `-3.25`, `.5`, `1.2488e-100`.
    pub fn parse(text: &str, prec: Precision) -> Result<Self, NumericsError> {
        let numeral = Numeral::scan(text)?;
        Ok(numeral.to_fixed(prec.digits()))
    }

    /// Parses a numeral keeping every fractional digit it carries.
    pub fn parse_exact(text: &str) -> Result<Self, NumericsError> {
        let numeral = Numeral::scan(text)?;
        let needed = numeral.exact_frac_digits();
        Ok(numeral.to_fixed(needed))
    }

    /// Re-expresses the value with `digits` fractional digits, truncating
    /// toward zero when digits are dropped.
    pub fn round_to(&self, digits: usize) -> Self {
        match digits.cmp(&self.frac_digits) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                Self::from_parts(&self.mantissa * pow10(digits - self.frac_digits), digits)
            }
            Ordering::Less => {
                let scale = pow10(self.frac_digits - digits);
                Self::from_parts(self.mantissa.clone().div_trunc(scale), digits)
            }
        }
    }

    /// Like [`round_to`](Self::round_to) but rounds to nearest, ties away
    /// from zero.
    pub fn round_nearest(&self, digits: usize) -> Self {
        if digits >= self.frac_digits {
            return self.round_to(digits);
        }
        let scale = pow10(self.frac_digits - digits);
        let half = Integer::from(&scale / 2u32);
        let biased = if self.mantissa.cmp0() == Ordering::Less {
            Integer::from(&self.mantissa - &half)
        } else {
            Integer::from(&self.mantissa + &half)
        };
        Self::from_parts(biased.div_trunc(scale), digits)
    }

    fn aligned(&self, other: &Self) -> (Integer, Integer, usize) {
        let d = self.frac_digits.max(other.frac_digits);
        (self.round_to(d).mantissa, other.round_to(d).mantissa, d)
    }

    /// Exact sum truncated to `prec`.
    pub fn add(&self, other: &Self, prec: Precision) -> Self {
        let (a, b, d) = self.aligned(other);
        Self::from_parts(a + b, d).round_to(prec.digits())
    }

    /// Exact difference truncated to `prec`.
    pub fn sub(&self, other: &Self, prec: Precision) -> Self {
        let (a, b, d) = self.aligned(other);
        Self::from_parts(a - b, d).round_to(prec.digits())
    }

    /// Exact difference at the finer of the two scales.
    pub fn sub_exact(&self, other: &Self) -> Self {
        let (a, b, d) = self.aligned(other);
        Self::from_parts(a - b, d)
    }

    /// Product truncated toward zero: `|r − a·b| < 10^(−prec)`.
    pub fn mul(&self, other: &Self, prec: Precision) -> Self {
        let product = Integer::from(&self.mantissa * &other.mantissa);
        Self::from_parts(product, self.frac_digits + other.frac_digits).round_to(prec.digits())
    }

    /// Multiplies by an integer exactly, then truncates to `prec`.
    pub fn mul_int(&self, factor: &Integer, prec: Precision) -> Self {
        Self::from_parts(Integer::from(&self.mantissa * factor), self.frac_digits)
            .round_to(prec.digits())
    }

    /// Quotient by an integer, truncated toward zero: `|r − a/m| < 10^(−prec)`.
    pub fn div_int(&self, divisor: &Integer, prec: Precision) -> Result<Self, NumericsError> {
        if divisor.cmp0() == Ordering::Equal {
            return Err(NumericsError::DivisionByZero);
        }
        let d = prec.digits();
        let scaled = if d >= self.frac_digits {
            &self.mantissa * pow10(d - self.frac_digits)
        } else {
            self.mantissa.clone().div_trunc(pow10(self.frac_digits - d))
        };
        Ok(Self::from_parts(scaled.div_trunc(divisor), d))
    }

    /// `floor(log10 |a|)`, or `None` for zero.
    pub fn magnitude_exponent(&self) -> Option<i64> {
        let digits = decimal_digit_count(&self.mantissa);
        if digits == 0 {
            None
        } else {
            Some(digits as i64 - 1 - self.frac_digits as i64)
        }
    }

    /// The first `count` significant digits of `|a|` (zero-padded when the
    /// mantissa is shorter) and the magnitude exponent.
    pub fn leading_digits(&self, count: usize) -> Option<(String, i64)> {
        let total = decimal_digit_count(&self.mantissa);
        if total == 0 {
            return None;
        }
        let abs = self.mantissa.clone().abs();
        let mut digits = if total > count {
            abs.div_trunc(pow10(total - count)).to_string()
        } else {
            abs.to_string()
        };
        while digits.len() < count {
            digits.push('0');
        }
        Some((digits, total as i64 - 1 - self.frac_digits as i64))
    }

    /// `log10 |a|` from the leading 17 digits, or `None` for zero.
    pub fn log10_abs(&self) -> Option<f64> {
        let (digits, exponent) = self.leading_digits(17)?;
        let lead: f64 = digits.parse::<f64>().ok()? / 1e16;
        Some(exponent as f64 + lead.log10())
    }

    /// Renders exactly `sig_digits` significant digits, truncated.
    ///
    /// Values with magnitude exponent in `[-3, sig_digits)` render
    /// positionally; everything else uses `d.ddd…e±k`.
    pub fn to_decimal_string(&self, sig_digits: usize) -> String {
        let sig = sig_digits.max(1);
        let Some((digits, exponent)) = self.leading_digits(sig) else {
            return "0".to_string();
        };
        let sign = if self.signum() < 0 { "-" } else { "" };
        if exponent < -3 || exponent >= sig as i64 {
            let mut out = format!("{sign}{}", &digits[..1]);
            if sig > 1 {
                out.push('.');
                out.push_str(&digits[1..]);
            }
            out.push_str(&format!("e{exponent}"));
            out
        } else if exponent >= 0 {
            let split = exponent as usize + 1;
            let (int_part, frac_part) = digits.split_at(split);
            if frac_part.is_empty() {
                format!("{sign}{int_part}")
            } else {
                format!("{sign}{int_part}.{frac_part}")
            }
        } else {
            let zeros = "0".repeat((-exponent - 1) as usize);
            format!("{sign}0.{zeros}{digits}")
        }
    }

    /// Positional rendering with all `frac_digits` digits.
    pub fn to_plain_string(&self) -> String {
        let sign = if self.signum() < 0 { "-" } else { "" };
        let abs = self.mantissa.clone().abs().to_string();
        if self.frac_digits == 0 {
            return format!("{sign}{abs}");
        }
        let padded = if abs.len() <= self.frac_digits {
            format!("{}{abs}", "0".repeat(self.frac_digits + 1 - abs.len()))
        } else {
            abs
        };
        let (int_part, frac_part) = padded.split_at(padded.len() - self.frac_digits);
        format!("{sign}{int_part}.{frac_part}")
    }

    /// Nearest `f64`; loses everything past ~17 digits.
    pub fn to_f64(&self) -> f64 {
        match self.log10_abs() {
            None => 0.0,
            Some(lg) => f64::from(self.signum()) * 10f64.powf(lg),
        }
    }
}

impl PartialEq for BigFixed {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for BigFixed {}

impl PartialOrd for BigFixed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BigFixed {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl fmt::Display for BigFixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_plain_string())
    }
}

/// A scanned numeral: sign, digit string, and the decimal exponent that
/// applies to the last digit.
struct Numeral {
    negative: bool,
    digits: String,
    exponent: i64,
}

impl Numeral {
    fn scan(text: &str) -> Result<Self, NumericsError> {
        let bytes = text.as_bytes();
        let err = |position: usize| NumericsError::Parse {
            position,
            found: match text[position..].chars().next() {
                Some(c) => format!("'{c}'"),
                None => "end of input".to_string(),
            },
        };

        let mut pos = 0;
        let mut negative = false;
        if let Some(&c) = bytes.first() {
            if c == b'+' || c == b'-' {
                negative = c == b'-';
                pos = 1;
            }
        }

        let mut digits = String::new();
        let mut frac_len = 0i64;
        let mut seen_point = false;
        while pos < bytes.len() {
            match bytes[pos] {
                c @ b'0'..=b'9' => {
                    digits.push(c as char);
                    if seen_point {
                        frac_len += 1;
                    }
                }
                b'.' if !seen_point => seen_point = true,
                b'e' | b'E' => break,
                _ => return Err(err(pos)),
            }
            pos += 1;
        }
        if digits.is_empty() {
            return Err(err(pos));
        }

        let mut exponent = 0i64;
        if pos < bytes.len() {
            // bytes[pos] is the exponent marker
            pos += 1;
            let exp_start = pos;
            if pos < bytes.len() && (bytes[pos] == b'+' || bytes[pos] == b'-') {
                pos += 1;
            }
            if pos == bytes.len() {
                return Err(err(pos));
            }
            while pos < bytes.len() {
                if !bytes[pos].is_ascii_digit() {
                    return Err(err(pos));
                }
                pos += 1;
            }
            exponent = text[exp_start..].parse().map_err(|_| err(exp_start))?;
        }

        Ok(Numeral {
            negative,
            digits,
            exponent: exponent - frac_len,
        })
    }

    fn exact_frac_digits(&self) -> usize {
        if self.exponent < 0 {
            (-self.exponent) as usize
        } else {
            0
        }
    }

    fn to_fixed(&self, frac_digits: usize) -> BigFixed {
        let raw: Integer = self.digits.parse().expect("scanned digits parse");
        // value = raw × 10^exponent; rescale to 10^(−frac_digits)
        let shift = self.exponent + frac_digits as i64;
        let mut mantissa = if shift >= 0 {
            raw * pow10(shift as usize)
        } else {
            raw.div_trunc(pow10((-shift) as usize))
        };
        if self.negative {
            mantissa = -mantissa;
        }
        BigFixed::from_parts(mantissa, frac_digits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn prec(d: usize) -> Precision {
        Precision::new(d).unwrap()
    }

    fn fx(text: &str) -> BigFixed {
        BigFixed::parse_exact(text).unwrap()
    }

    /// Schoolbook long multiplication on digit strings.
    fn long_multiply(a: &str, b: &str) -> String {
        let a: Vec<u32> = a.bytes().rev().map(|c| (c - b'0') as u32).collect();
        let b: Vec<u32> = b.bytes().rev().map(|c| (c - b'0') as u32).collect();
        let mut acc = vec![0u32; a.len() + b.len()];
        for (i, &x) in a.iter().enumerate() {
            let mut carry = 0;
            for (j, &y) in b.iter().enumerate() {
                let cur = acc[i + j] + x * y + carry;
                acc[i + j] = cur % 10;
                carry = cur / 10;
            }
            let mut k = i + b.len();
            while carry > 0 {
                let cur = acc[k] + carry;
                acc[k] = cur % 10;
                carry = cur / 10;
                k += 1;
            }
        }
        while acc.len() > 1 && *acc.last().unwrap() == 0 {
            acc.pop();
        }
        acc.iter()
            .rev()
            .map(|d| char::from(b'0' + *d as u8))
            .collect()
    }

    #[test]
    fn parse_integer() {
        let x = BigFixed::parse("3", prec(5)).unwrap();
        assert_eq!(*x.mantissa(), 300000);
        assert_eq!(x.frac_digits(), 5);
    }

    #[test]
    fn parse_optimised_start_value() {
        let x = BigFixed::parse("3.14159265358979324", prec(18)).unwrap();
        assert_eq!(x.frac_digits(), 18);
        assert_eq!(x.mantissa().to_string(), "3141592653589793240");
    }

    #[test]
    fn parse_exponent_shift() {
        let x = BigFixed::parse("1.2488e-100", prec(105)).unwrap();
        assert_eq!(x, BigFixed::from_parts(Integer::from(12488), 104));
        assert_eq!(*x.mantissa(), 124880);
    }

    #[test]
    fn parse_truncates_toward_zero() {
        let x = BigFixed::parse("-2.71828", prec(2)).unwrap();
        assert_eq!(*x.mantissa(), -271);
    }

    #[test]
    fn parse_errors_name_position() {
        let cases = [
            ("3.1x4", 3),
            ("", 0),
            ("-", 1),
            ("1.2e", 4),
            ("1.2e+q", 5),
            ("1..2", 2),
        ];
        for (text, position) in cases {
            match BigFixed::parse(text, prec(4)) {
                Err(NumericsError::Parse { position: p, .. }) => {
                    assert_eq!(p, position, "{text:?}")
                }
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn mul_exact_quarter() {
        let half = fx("0.5");
        let r = half.mul(&half, prec(10));
        assert_eq!(r, fx("0.25"));
        assert_eq!(r.frac_digits(), 10);
    }

    #[test]
    fn mul_identity_is_round_to() {
        let x = fx("3.14159265358979323846264338327950288");
        let one = BigFixed::from_int(1, 0);
        assert_eq!(x.mul(&one, prec(12)), x.round_to(12));
        assert_eq!(x.mul(&one, prec(12)).frac_digits(), 12);
    }

    #[test]
    fn mul_matches_long_multiplication() {
        let s = "141120008059867222100744802808";
        let a = BigFixed::parse(&format!("0.{s}"), prec(30)).unwrap();
        let r = a.mul(&a, prec(30));
        let full = long_multiply(s, s);
        // full product has 60 fractional digits; keep the leading 30
        let padded = format!("{}{full}", "0".repeat(60 - full.len()));
        let expected: Integer = padded[..30].parse().unwrap();
        assert_eq!(*r.mantissa(), expected);
    }

    #[test]
    fn div_by_zero_is_error() {
        let x = fx("1.5");
        assert_eq!(
            x.div_int(&Integer::new(), prec(4)),
            Err(NumericsError::DivisionByZero)
        );
    }

    #[test]
    fn div_small_integer() {
        let x = fx("1");
        let r = x.div_int(&Integer::from(3), prec(6)).unwrap();
        assert_eq!(r, fx("0.333333"));
    }

    #[test]
    fn magnitude_exponents() {
        assert_eq!(fx("0.1411200080598672221").magnitude_exponent(), Some(-1));
        assert_eq!(fx("9.0827001694215414e-34").magnitude_exponent(), Some(-34));
        assert_eq!(fx("0").magnitude_exponent(), None);
        assert_eq!(fx("-12.5").magnitude_exponent(), Some(1));
        assert_eq!(fx("1000").magnitude_exponent(), Some(3));
        assert_eq!(fx("0.001").magnitude_exponent(), Some(-3));
    }

    #[test]
    fn render_pi_forty_digits() {
        let pi = fx("3.14159265358979323846264338327950288419716939937510");
        assert_eq!(
            pi.to_decimal_string(40),
            "3.141592653589793238462643383279502884197"
        );
    }

    #[test]
    fn render_small_scientific() {
        let d = fx("0.0004726455123283366341437653327694668960596");
        assert_eq!(d.to_decimal_string(4), "4.726e-4");
    }

    #[test]
    fn render_negative_and_zero() {
        assert_eq!(fx("-1").to_decimal_string(3), "-1.00");
        assert_eq!(BigFixed::zero(10).to_decimal_string(5), "0");
        assert_eq!(fx("0.0123").to_decimal_string(2), "0.012");
        assert_eq!(fx("123456").to_decimal_string(3), "1.23e5");
        assert_eq!(fx("123").to_decimal_string(3), "123");
        assert_eq!(fx("0.5").to_decimal_string(1), "0.5");
        assert_eq!(fx("7e-9").to_decimal_string(1), "7e-9");
    }

    #[test]
    fn round_nearest_ties_away() {
        assert_eq!(fx("2.45").round_nearest(1), fx("2.5"));
        assert_eq!(fx("-2.45").round_nearest(1), fx("-2.5"));
        assert_eq!(fx("2.449").round_nearest(1), fx("2.4"));
        assert_eq!(fx("2.449").round_nearest(1).frac_digits(), 1);
    }

    #[test]
    fn equality_ignores_scale() {
        assert_eq!(fx("1.50"), fx("1.5"));
        assert!(fx("1.49") < fx("1.5"));
        assert_eq!(fx("-0.000"), BigFixed::zero(0));
    }

    #[test]
    fn plain_string() {
        assert_eq!(fx("-0.05").to_plain_string(), "-0.05");
        assert_eq!(fx("3.10").to_plain_string(), "3.10");
        assert_eq!(BigFixed::from_int(7, 0).to_plain_string(), "7");
    }

    #[test]
    fn digit_count_edges() {
        assert_eq!(decimal_digit_count(&Integer::new()), 0);
        assert_eq!(decimal_digit_count(&Integer::from(9)), 1);
        assert_eq!(decimal_digit_count(&Integer::from(10)), 2);
        assert_eq!(decimal_digit_count(&pow10(500)), 501);
        assert_eq!(decimal_digit_count(&(pow10(500) - 1)), 500);
    }

    proptest! {
        #[test]
        fn mul_error_below_one_ulp(
            a in -10_000_000i64..10_000_000,
            da in 0usize..8,
            b in -10_000_000i64..10_000_000,
            db in 0usize..8,
            d in 1usize..12,
        ) {
            let x = BigFixed::from_parts(Integer::from(a), da);
            let y = BigFixed::from_parts(Integer::from(b), db);
            let r = x.mul(&y, prec(d));
            let exact = rug::Rational::from((Integer::from(a) * b, pow10(da + db)));
            let got = rug::Rational::from((r.mantissa().clone(), pow10(d)));
            let err = (exact - got).abs();
            prop_assert!(err < rug::Rational::from((1, pow10(d))));
        }

        #[test]
        fn round_to_idempotent(m in any::<i64>(), from in 0usize..20, to in 0usize..20) {
            let x = BigFixed::from_parts(Integer::from(m), from);
            let once = x.round_to(to);
            prop_assert_eq!(once.frac_digits(), to);
            let twice = once.round_to(to);
            prop_assert_eq!(twice.mantissa(), once.mantissa());
        }

        #[test]
        fn magnitude_matches_digit_length(m in any::<i64>(), d in 0usize..30) {
            prop_assume!(m != 0);
            let x = BigFixed::from_parts(Integer::from(m), d);
            let len = m.unsigned_abs().to_string().len() as i64;
            prop_assert_eq!(x.magnitude_exponent(), Some(len - 1 - d as i64));
        }

        #[test]
        fn parse_render_round_trip(digits in "[1-9][0-9]{0,30}", point in 0usize..31, neg in any::<bool>()) {
            let point = point.min(digits.len() - 1);
            let text = format!(
                "{}{}.{}",
                if neg { "-" } else { "" },
                &digits[..=point],
                &digits[point + 1..]
            );
            let x = BigFixed::parse(&text, prec(digits.len())).unwrap();
            let rendered = x.to_decimal_string(digits.len());
            let back = BigFixed::parse_exact(&rendered).unwrap();
            prop_assert_eq!(back, x);
        }
    }
}
