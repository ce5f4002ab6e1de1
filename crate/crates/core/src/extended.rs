//! Extended-precision evaluation of `g_S`, the density and the arctan ratio
//! at points given by their distance `u = 1 - t` from 1.
//!
//! The distance form matters: `t = 1 - 1/(2·2^32)` is exact in `f64`, but
//! `t^(2e)` for `e ~ 2^32` needs `ln t` to far more bits than a double holds
//! once the exponent multiplies it, so every quantity is recomputed here
//! with `digits` significant decimal digits.

use std::f64::consts::PI;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::BigInt;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::logspace::LogValue;
use crate::supportset::SupportSet;

pub const DEFAULT_PRECISION_DIGITS: u32 = 40;

const RM: RoundingMode = RoundingMode::ToEven;

/// Binary precision for `digits` decimal digits plus 32 guard bits.
pub fn bits_for_digits(digits: u32) -> usize {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 32
}

/// Nearest-ish `f64` (truncated to the top 64 mantissa bits first).
/// Values beyond the `f64` range saturate to `±inf` / `0`.
pub(crate) fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let Some((words, _, sign, exponent, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let top = *words.last().expect("nonempty mantissa") as f64 / 2f64.powi(64);
    let mag = if exponent > 1100 {
        f64::INFINITY
    } else if exponent < -1100 {
        0.0
    } else {
        top * 2f64.powi(exponent)
    };
    match sign {
        Sign::Neg => -mag,
        Sign::Pos => mag,
    }
}

/// Exact conversion when `p` covers the bit length of `c`.
pub(crate) fn from_bigint(c: &BigInt, p: usize) -> BigFloat {
    let p = p.max(c.bits() as usize + 64);
    let radix = BigFloat::from_f64(2f64.powi(64), p);
    let mut acc = BigFloat::from_word(0, p);
    for d in c.magnitude().to_u64_digits().iter().rev() {
        acc = acc.mul(&radix, p, RM).add(&BigFloat::from_u64(*d, p), p, RM);
    }
    if c.is_negative() {
        acc.neg()
    } else {
        acc
    }
}

/// Working state for one precision.
pub struct Extended {
    p: usize,
    cc: Consts,
}

impl Extended {
    pub fn new(digits: u32) -> Result<Self> {
        if digits < 16 {
            return Err(Error::domain(format!(
                "extended precision needs at least 16 digits, got {digits}"
            )));
        }
        let cc = Consts::new().map_err(|e| Error::domain(format!("precision setup: {e:?}")))?;
        Ok(Self {
            p: bits_for_digits(digits),
            cc,
        })
    }

    pub fn precision_bits(&self) -> usize {
        self.p
    }

    /// `ln t` for `t = 1 - u`.
    fn ln_t(&mut self, u: f64) -> Result<BigFloat> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!("distance {u} outside (0, 1)")));
        }
        let one = BigFloat::from_word(1, self.p);
        let t = one.sub(&BigFloat::from_f64(u, self.p), self.p, RM);
        Ok(t.ln(self.p, RM, &mut self.cc))
    }

    fn exp_f64(&mut self, x: &BigFloat) -> f64 {
        to_f64(&x.exp(self.p, RM, &mut self.cc))
    }

    /// `ln Σ exp(x_i)` with the max shift done in extended precision.
    fn log_sum_exp(&mut self, xs: &[BigFloat]) -> BigFloat {
        let max = xs
            .iter()
            .cloned()
            .reduce(|a, b| if a.cmp(&b).is_some_and(|c| c >= 0) { a } else { b })
            .expect("nonempty sum");
        let mut s = BigFloat::from_word(0, self.p);
        for x in xs {
            let e = x.sub(&max, self.p, RM).exp(self.p, RM, &mut self.cc);
            s = s.add(&e, self.p, RM);
        }
        max.add(&s.ln(self.p, RM, &mut self.cc), self.p, RM)
    }

    fn ln_g(&mut self, set: &SupportSet, lt: &BigFloat) -> BigFloat {
        let terms: Vec<BigFloat> = set
            .exponents()
            .iter()
            .map(|&e| BigFloat::from_u64(2 * e, self.p).mul(lt, self.p, RM))
            .collect();
        self.log_sum_exp(&terms)
    }

    /// `g_S(1 - u)` in log form.
    pub fn eval_g(&mut self, set: &SupportSet, u: f64) -> Result<LogValue> {
        let lt = self.ln_t(u)?;
        let lg = self.ln_g(set, &lt);
        Ok(LogValue::from_ln(to_f64(&lg)))
    }

    /// `ρ_S(1 - u)` through the sum-of-squares expression.
    pub fn density(&mut self, set: &SupportSet, u: f64) -> Result<f64> {
        let lt = self.ln_t(u)?;
        let e = set.exponents();
        if e.len() == 1 {
            return Ok(0.0);
        }
        let mut pair_terms = Vec::with_capacity(e.len() * (e.len() - 1) / 2);
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                let coef = BigFloat::from_u64(e[j] - e[i], self.p)
                    .ln(self.p, RM, &mut self.cc)
                    .mul(&BigFloat::from_word(2, self.p), self.p, RM);
                let pow = BigFloat::from_u64(2 * (e[i] + e[j]), self.p)
                    .sub(&BigFloat::from_word(2, self.p), self.p, RM)
                    .mul(&lt, self.p, RM);
                pair_terms.push(coef.add(&pow, self.p, RM));
            }
        }
        let lp = self.log_sum_exp(&pair_terms);
        let lg = self.ln_g(set, &lt);
        let half = BigFloat::from_f64(0.5, self.p);
        let l = half.mul(&lp, self.p, RM).sub(&lg, self.p, RM);
        Ok(self.exp_f64(&l) / PI)
    }

    /// `arctan sqrt(g1/g2)` at `1 - u`.
    pub fn arctan_ratio(&mut self, s1: &SupportSet, s2: &SupportSet, u: f64) -> Result<f64> {
        let lt = self.ln_t(u)?;
        let l1 = self.ln_g(s1, &lt);
        let l2 = self.ln_g(s2, &lt);
        let half = BigFloat::from_f64(0.5, self.p);
        let lg = half.mul(&l1.sub(&l2, self.p, RM), self.p, RM);
        let gamma = lg.exp(self.p, RM, &mut self.cc);
        Ok(to_f64(&gamma.atan(self.p, RM, &mut self.cc)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{eval_density, eval_g, DensityForm};

    fn set(v: &[u64]) -> SupportSet {
        SupportSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn conversions() {
        for x in [0.3, -12345.678, 1e-300, 7.0] {
            assert_eq!(to_f64(&BigFloat::from_f64(x, 128)), x);
        }
        let c: BigInt = BigInt::from(3u8).pow(200) * -1;
        let b = from_bigint(&c, 64);
        let expected = -(200.0 * 3f64.ln()).exp();
        assert!((to_f64(&b) - expected).abs() <= 1e-12 * expected.abs());
        assert!(bits_for_digits(40) >= 133);
        assert!(Extended::new(8).is_err());
    }

    #[test]
    fn agrees_with_double_where_double_is_accurate() {
        let s = set(&[0, 1, 4, 16]);
        let mut x = Extended::new(40).unwrap();
        for u in [0.5, 0.1, 1.0 / 32.0, 1e-3] {
            let ge = x.eval_g(&s, u).unwrap().ln();
            let gd = eval_g(&s, 1.0 - u).unwrap().ln();
            assert!((ge - gd).abs() < 1e-14, "{u}");
            let re = x.density(&s, u).unwrap();
            let rd = eval_density(&s, 1.0 - u, DensityForm::SumOfSquaresForm).unwrap();
            assert!((re - rd).abs() <= 1e-13 * rd, "{re} vs {rd}");
        }
    }

    #[test]
    fn pair_closed_form_at_huge_exponent() {
        // g_{0,a}(1 - 1/(2a)) = 1 + (1 - 1/(2a))^(2a) → 1 + e^(-1) as a → ∞;
        // at a = 2^32 the correction is −e^(−1)/(4a) + O(a^-2).
        let a = 1u64 << 32;
        let mut x = Extended::new(40).unwrap();
        let g = x.eval_g(&set(&[0, a]), 1.0 / (2.0 * a as f64)).unwrap().value();
        let e1 = (-1f64).exp();
        let expected = 1.0 + e1 - e1 / (4.0 * a as f64);
        assert!((g - expected).abs() < 1e-15, "{g} vs {expected}");
    }

    #[test]
    fn arctan_ratio_limits() {
        let mut x = Extended::new(30).unwrap();
        let v = x.arctan_ratio(&set(&[9]), &set(&[0, 1, 4]), 1e-12).unwrap();
        assert!((v - (1.0 / 3f64.sqrt()).atan()).abs() < 1e-9);
    }
}
