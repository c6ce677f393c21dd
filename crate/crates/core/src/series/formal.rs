//! Truncated power series with exact rational coefficients.

use std::fmt;

use rug::{Integer, Rational};

use super::{make_coefficients, SeriesError};

/// `a_0 + a_1 t + … + a_K t^K`, dense.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalSeries {
    coeffs: Vec<Rational>,
}

impl FormalSeries {
    pub fn zero(truncation_order: usize) -> Self {
        FormalSeries {
            coeffs: vec![Rational::new(); truncation_order + 1],
        }
    }

    /// The monomial `t` truncated at `truncation_order`.
    pub fn variable(truncation_order: usize) -> Self {
        let mut s = Self::zero(truncation_order);
        if truncation_order >= 1 {
            s.coeffs[1] = Rational::from(1);
        }
        s
    }

    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least a_0");
        FormalSeries { coeffs }
    }

    pub fn truncation_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &Rational {
        &self.coeffs[k]
    }

    /// `sin t = Σ (−1)^j t^(2j+1)/(2j+1)!` up to `t^K`.
    pub fn sine(truncation_order: usize) -> Self {
        let mut s = Self::zero(truncation_order);
        let mut factorial = Integer::from(1);
        for n in 1..=truncation_order {
            factorial *= n as u32;
            if n % 2 == 1 {
                let sign = if (n / 2) % 2 == 0 { 1 } else { -1 };
                s.coeffs[n] = Rational::from((Integer::from(sign), factorial.clone()));
            }
        }
        s
    }

    pub fn add(&self, other: &Self) -> Self {
        let k = self.truncation_order().min(other.truncation_order());
        FormalSeries {
            coeffs: (0..=k)
                .map(|i| Rational::from(&self.coeffs[i] + &other.coeffs[i]))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let k = self.truncation_order().min(other.truncation_order());
        FormalSeries {
            coeffs: (0..=k)
                .map(|i| Rational::from(&self.coeffs[i] - &other.coeffs[i]))
                .collect(),
        }
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        FormalSeries {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| Rational::from(c * factor))
                .collect(),
        }
    }

    /// Cauchy product truncated at the smaller order.
    pub fn mul(&self, other: &Self) -> Self {
        let k = self.truncation_order().min(other.truncation_order());
        let mut out = Self::zero(k);
        for (i, a) in self.coeffs.iter().enumerate().take(k + 1) {
            if a.cmp0() == std::cmp::Ordering::Equal {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(k + 1 - i) {
                if b.cmp0() != std::cmp::Ordering::Equal {
                    out.coeffs[i + j] += Rational::from(a * b);
                }
            }
        }
        out
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs
            .iter()
            .position(|c| c.cmp0() != std::cmp::Ordering::Equal)
    }
}

impl fmt::Display for FormalSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.cmp0() == std::cmp::Ordering::Equal {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})t")?,
                _ => write!(f, "({c})t^{k}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " + O(t^{})", self.truncation_order() + 1)
    }
}

/// Exact expansion of `S(π + t) − π = t − Σ c_k sin(t)^(2k−1)` up to `t^K`.
pub fn taylor_of_s(order: usize, truncation_order: usize) -> Result<FormalSeries, SeriesError> {
    let table = make_coefficients(order)?;
    let required = 2 * order + 1;
    if truncation_order < required {
        return Err(SeriesError::InsufficientOrder {
            requested: truncation_order,
            required,
        });
    }
    let sine = FormalSeries::sine(truncation_order);
    let sine_sq = sine.mul(&sine);
    let mut power = sine;
    let mut result = FormalSeries::variable(truncation_order);
    for (i, c) in table.coeffs().iter().enumerate() {
        if i > 0 {
            power = power.mul(&sine_sq);
        }
        result = result.sub(&power.scale(c));
    }
    Ok(result)
}

/// `C = (∏_{ℓ=1}^{P} (2ℓ−1))² / (2P+1)!`.
pub fn error_constant(order: usize) -> Result<Rational, SeriesError> {
    if order == 0 {
        return Err(SeriesError::InvalidOrder);
    }
    let mut odd_product = Integer::from(1);
    for l in 1..=order as u32 {
        odd_product *= 2 * l - 1;
    }
    let mut factorial = Integer::from(1);
    for n in 1..=(2 * order + 1) as u32 {
        factorial *= n;
    }
    Ok(Rational::from((odd_product.square(), factorial)))
}
