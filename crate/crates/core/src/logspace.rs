//! Log-domain arithmetic for sums of huge-exponent monomials.

use serde::{Deserialize, Serialize};

/// A non-negative number stored as its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub log_magnitude: f64,
    pub is_zero: bool,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        log_magnitude: f64::NEG_INFINITY,
        is_zero: true,
    };

    pub fn from_ln(ln: f64) -> Self {
        if ln == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                log_magnitude: ln,
                is_zero: false,
            }
        }
    }

    /// `ln` of the value, `-inf` for zero.
    pub fn ln(&self) -> f64 {
        if self.is_zero {
            f64::NEG_INFINITY
        } else {
            self.log_magnitude
        }
    }

    /// The value itself; may underflow to 0 or overflow to `inf`.
    pub fn value(&self) -> f64 {
        if self.is_zero {
            0.0
        } else {
            self.log_magnitude.exp()
        }
    }
}

/// `ln t` for `t ∈ (0, 1]`. Near 1 the logarithm is taken through
/// `ln_1p(-(1 - t))`; `1 - t` is exact there, so relative accuracy holds
/// even for `t = 1 - 2^-33`.
pub fn ln_t(t: f64) -> f64 {
    if t > 0.9 {
        (-(1.0 - t)).ln_1p()
    } else {
        t.ln()
    }
}

/// Max-shifted `ln Σ exp(x_i)`. Returns `-inf` for an empty input.
pub fn log_sum_exp<I>(terms: I) -> f64
where
    I: IntoIterator<Item = f64>,
    I::IntoIter: Clone,
{
    let it = terms.into_iter();
    let max = it.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    let s: f64 = it.map(|x| (x - max).exp()).sum();
    max + s.ln()
}

/// `ln(exp(a) + exp(b))`.
pub fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}
