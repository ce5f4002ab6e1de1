//! Zero density of random polynomials supported on a [`SupportSet`].
//!
//! With `g_S(t) = Σ t^{2e}` (the squared norm of the moment curve
//! `(t^{e_1}, ..., t^{e_k})`), the expected number of real zeros of
//! `Σ a_i x^{e_i}` in an interval is the integral of
//!
//! ```text
//! ρ_S(t) = sqrt(I(g_S)(t)) / (2π),   I(g) = (g'/g)' + g'/(t g)
//! ```
//!
//! Three algebraically equal expressions for `ρ_S` are available, see
//! [`DensityForm`]. Everything is evaluated from `ln t`, so monomials like
//! `t^{2^33}` never have to be materialized.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::{ln_t, log_add, log_sum_exp, LogValue};
use crate::supportset::SupportSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DensityForm {
    /// `(1/π) sqrt(|v|²|v'|² - (v·v')²) / |v|²` on the moment curve `v`.
    NormForm,
    /// `sqrt((g'/g)' + g'/(t g)) / (2π)`.
    LogDerivForm,
    /// `(1/π) sqrt(Σ_{i<j} (e_i - e_j)² t^{2(e_i+e_j-1)}) / g`: a ratio of
    /// positive sums, free of cancellation.
    SumOfSquaresForm,
}

impl DensityForm {
    pub const ALL: [DensityForm; 3] = [
        DensityForm::NormForm,
        DensityForm::LogDerivForm,
        DensityForm::SumOfSquaresForm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DensityForm::NormForm => "norm",
            DensityForm::LogDerivForm => "logderiv",
            DensityForm::SumOfSquaresForm => "sos",
        }
    }
}

/// Precomputed log-coefficients for repeated density evaluation on one set.
///
/// The pair sum is grouped by `c = e_i + e_j - 1`; the grouped coefficient
/// `Σ (e_i - e_j)²` is accumulated exactly in `u128` before taking its log.
#[derive(Debug, Clone)]
pub struct DensityKernel {
    exps: Vec<f64>,
    /// `(2c, ln Σ (e_i - e_j)²)` per distinct pair degree `c`.
    pair_terms: Vec<(f64, f64)>,
    singleton: bool,
}

impl DensityKernel {
    pub fn new(set: &SupportSet) -> Self {
        let s = set.normalize();
        let e = s.exponents();
        let mut groups: BTreeMap<u64, u128> = BTreeMap::new();
        for (i, &ei) in e.iter().enumerate() {
            for &ej in &e[i + 1..] {
                let d = (ej - ei) as u128;
                *groups.entry(ei + ej - 1).or_insert(0) += d * d;
            }
        }
        let pair_terms = groups
            .into_iter()
            .map(|(c, coef)| (2.0 * c as f64, (coef as f64).ln()))
            .collect();
        Self {
            exps: e.iter().map(|&x| x as f64).collect(),
            pair_terms,
            singleton: e.len() == 1,
        }
    }

    /// `ln g(t)` given `ln t`.
    pub fn log_g(&self, lt: f64) -> f64 {
        log_sum_exp(self.exps.iter().map(|&e| 2.0 * e * lt))
    }

    /// `ln Σ_{i<j} (e_i - e_j)² t^{2(e_i+e_j-1)}`.
    fn log_pair_sum(&self, lt: f64) -> f64 {
        log_sum_exp(self.pair_terms.iter().map(|&(c2, lc)| lc + c2 * lt))
    }

    /// `ln I(g)(t)`, `-inf` where `I` vanishes.
    pub fn log_i(&self, t: f64) -> f64 {
        self.log_i_at_ln(ln_t(t))
    }

    pub fn log_i_at_ln(&self, lt: f64) -> f64 {
        if self.singleton {
            return f64::NEG_INFINITY;
        }
        4f64.ln() + self.log_pair_sum(lt) - 2.0 * self.log_g(lt)
    }

    /// `ρ(t)` through the sum-of-squares expression.
    pub fn density(&self, t: f64) -> f64 {
        self.density_at_ln(ln_t(t))
    }

    /// `ρ` at the point whose logarithm is `lt`; lets callers that track
    /// `1 - t` exactly pass `ln_1p(-(1 - t))` without rounding `t`.
    pub fn density_at_ln(&self, lt: f64) -> f64 {
        if self.singleton {
            return 0.0;
        }
        (0.5 * self.log_pair_sum(lt) - self.log_g(lt)).exp() / PI
    }

    pub fn density_with(&self, form: DensityForm, t: f64) -> f64 {
        if self.singleton {
            return 0.0;
        }
        match form {
            DensityForm::SumOfSquaresForm => self.density(t),
            DensityForm::NormForm => self.density_norm(t),
            DensityForm::LogDerivForm => self.density_logderiv(t),
        }
    }

    fn density_norm(&self, t: f64) -> f64 {
        let lt = ln_t(t);
        // |v|², |v'|², v·v'
        let la = self.log_g(lt);
        let lb = log_sum_exp(
            self.exps
                .iter()
                .filter(|&&e| e > 0.0)
                .map(|&e| 2.0 * e.ln() + (2.0 * e - 2.0) * lt),
        );
        let lc = log_sum_exp(
            self.exps
                .iter()
                .filter(|&&e| e > 0.0)
                .map(|&e| e.ln() + (2.0 * e - 1.0) * lt),
        );
        if lb == f64::NEG_INFINITY {
            return 0.0;
        }
        // |v|²|v'|² - (v·v')² = |v|²|v'|² (1 - r)
        let ln_r = 2.0 * lc - la - lb;
        let one_minus_r = (-ln_r.exp_m1()).max(0.0);
        (0.5 * (lb - la)).exp() * one_minus_r.sqrt() / PI
    }

    fn density_logderiv(&self, t: f64) -> f64 {
        let lt = ln_t(t);
        let lg = self.log_g(lt);
        let ld1 = log_sum_exp(
            self.exps
                .iter()
                .filter(|&&e| e > 0.0)
                .map(|&e| (2.0 * e).ln() + (2.0 * e - 1.0) * lt),
        ) - lg;
        let ld2 = log_sum_exp(
            self.exps
                .iter()
                .filter(|&&e| e > 0.0)
                .map(|&e| (2.0 * e * (2.0 * e - 1.0)).ln() + (2.0 * e - 2.0) * lt),
        ) - lg;
        // (g'/g)' + g'/(tg) = g''/g - (g'/g)² + g'/(tg)
        let positive = log_add(ld2, ld1 - lt);
        let ratio = -(2.0 * ld1 - positive).exp_m1();
        if !(ratio > 0.0) {
            return 0.0;
        }
        (0.5 * (positive + ratio.ln())).exp() / (2.0 * PI)
    }
}

fn check_open_unit(t: f64) -> Result<()> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("t = {t} is outside (0, 1)")))
    }
}

/// `g_S(t) = Σ_{e∈S} t^{2e}` for `t ∈ (0, 1]`.
pub fn eval_g(set: &SupportSet, t: f64) -> Result<LogValue> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::domain(format!("t = {t} is outside (0, 1]")));
    }
    let lt = ln_t(t);
    Ok(LogValue::from_ln(log_sum_exp(
        set.exponents().iter().map(|&e| 2.0 * e as f64 * lt),
    )))
}

/// Zero density `ρ_S(t)` for `t ∈ (0, 1)`.
pub fn eval_density(set: &SupportSet, t: f64, form: DensityForm) -> Result<f64> {
    check_open_unit(t)?;
    Ok(DensityKernel::new(set).density_with(form, t))
}

/// Uniform bound `(k+1)·max(S)/π` on `ρ_S` over `(0, 1)` for a set
/// containing 0.
///
/// Each pair term `(e_i - e_j)² t^{2c}` is at most `max(S)²` and there are
/// fewer than `(k+1)²` of them, while `g ≥ 1`. The `k + 1` (rather than a
/// tighter `sqrt(k(k-1)/2)`) matches the constant used for the boundary
/// layer estimates, where `k` counts the set after one more element is
/// added.
pub fn density_pointwise_cap(set: &SupportSet) -> Result<f64> {
    if !set.contains(0) {
        return Err(Error::domain("pointwise cap requires 0 in the set"));
    }
    if set.len() == 1 {
        return Ok(0.0);
    }
    Ok((set.len() as f64 + 1.0) * set.max() as f64 / PI)
}

/// Splitting of `I(g_{S1} + g_{S2})` for disjoint sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnionIntegrand {
    /// `g1/(g1+g2) · I(g1)`
    pub weighted_first: f64,
    /// `g2/(g1+g2) · I(g2)`
    pub weighted_second: f64,
    /// `(g2 g1' - g1 g2')² / (g1 g2 (g1+g2)²)`
    pub cross: f64,
}

impl UnionIntegrand {
    pub fn total(&self) -> f64 {
        self.weighted_first + self.weighted_second + self.cross
    }
}

/// `ln |g2 g1' - g1 g2'|` and its sign at `ln t`.
///
/// `g2 g1' - g1 g2' = Σ_{a∈S1, b∈S2} 2(a - b) t^{2a+2b-1}`.
pub(crate) fn log_cross_numerator(s1: &[u64], s2: &[u64], lt: f64) -> (f64, f64) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for &a in s1 {
        for &b in s2 {
            let (d, bucket) = if a > b {
                (a - b, &mut pos)
            } else {
                (b - a, &mut neg)
            };
            bucket.push((2.0 * d as f64).ln() + (2.0 * (a + b) as f64 - 1.0) * lt);
        }
    }
    let lp = log_sum_exp(pos);
    let ln = log_sum_exp(neg);
    if lp == ln {
        return (f64::NEG_INFINITY, 0.0);
    }
    let (hi, lo, sign) = if lp > ln { (lp, ln, 1.0) } else { (ln, lp, -1.0) };
    (hi + (-(lo - hi).exp()).ln_1p(), sign)
}

/// The three summands of `I(g_{S1 ⊔ S2})(t)`.
pub fn decompose_union_integrand(
    s1: &SupportSet,
    s2: &SupportSet,
    t: f64,
) -> Result<UnionIntegrand> {
    check_open_unit(t)?;
    if !s1.is_disjoint(s2) {
        return Err(Error::domain("union decomposition requires disjoint sets"));
    }
    Ok(decompose_at_ln(s1, s2, ln_t(t)))
}

pub(crate) fn decompose_at_ln(s1: &SupportSet, s2: &SupportSet, lt: f64) -> UnionIntegrand {
    let lg1 = log_sum_exp(s1.exponents().iter().map(|&e| 2.0 * e as f64 * lt));
    let lg2 = log_sum_exp(s2.exponents().iter().map(|&e| 2.0 * e as f64 * lt));
    let lsum = log_add(lg1, lg2);
    let li1 = DensityKernel::new(s1).log_i_at_ln(lt);
    let li2 = DensityKernel::new(s2).log_i_at_ln(lt);
    let (lh, _) = log_cross_numerator(s1.exponents(), s2.exponents(), lt);
    UnionIntegrand {
        weighted_first: (lg1 - lsum + li1).exp(),
        weighted_second: (lg2 - lsum + li2).exp(),
        cross: (2.0 * lh - lg1 - lg2 - 2.0 * lsum).exp(),
    }
}

/// Both sides of `((a+c)/(b+d))² = b/(b+d)·(a/b)² + d/(b+d)·(c/d)² - (bc-ad)²/(bd(b+d)²)`.
pub fn abcd_identity_sides(a: f64, b: f64, c: f64, d: f64) -> (f64, f64) {
    let lhs = ((a + c) / (b + d)).powi(2);
    let s = b + d;
    let rhs = (b / s) * (a / b).powi(2) + (d / s) * (c / d).powi(2)
        - ((b * c - a * d) / s).powi(2) / (b * d);
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_chacha::rand_core::{RngCore, SeedableRng};

    fn set(v: &[u64]) -> SupportSet {
        SupportSet::new(v.to_vec()).unwrap()
    }

    // Subnormal results carry too few bits for a relative comparison.
    fn rel(a: f64, b: f64) -> f64 {
        let (a, b) = (flush(a), flush(b));
        if a == b {
            0.0
        } else {
            (a - b).abs() / a.abs().max(b.abs())
        }
    }

    fn flush(x: f64) -> f64 {
        if x.abs() < f64::MIN_POSITIVE {
            0.0
        } else {
            x
        }
    }

    #[test]
    fn g_examples() {
        assert_eq!(eval_g(&set(&[0]), 0.7).unwrap().value(), 1.0);
        assert!((eval_g(&set(&[0, 1]), 0.5).unwrap().value() - 1.25).abs() < 1e-15);
        assert!((eval_g(&set(&[0, 2]), 0.5).unwrap().value() - 1.0625).abs() < 1e-15);
        assert!((eval_g(&set(&[0, 1, 5]), 1.0).unwrap().value() - 3.0).abs() < 1e-15);
        assert!(eval_g(&set(&[0]), 0.0).is_err());
        assert!(eval_g(&set(&[0]), 1.5).is_err());
    }

    #[test]
    fn g_lower_bounds() {
        let s = set(&[0, 3, 1 << 20]);
        for &t in &[0.01, 0.5, 0.999_999, 1.0] {
            let g = eval_g(&s, t).unwrap().value();
            assert!(g >= 1.0);
        }
        let s = set(&[7, 40]);
        let t: f64 = 0.9;
        assert!(eval_g(&s, t).unwrap().value() >= t.powi(80));
    }

    #[test]
    fn singleton_density_vanishes() {
        for form in DensityForm::ALL {
            assert_eq!(eval_density(&set(&[9]), 0.3, form).unwrap(), 0.0);
        }
    }

    #[test]
    fn pair_density_closed_form() {
        // sqrt(I) = 2 a t^{a-1} / (1 + t^{2a}) for S = {0, a}
        let closed = |a: f64, t: f64| 2.0 * a * t.powf(a - 1.0) / (1.0 + t.powf(2.0 * a)) / (2.0 * PI);
        let near_one = 1.0 - 1e-9;
        let v = eval_density(&set(&[0, 1]), near_one, DensityForm::SumOfSquaresForm).unwrap();
        assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-9);
        let v = eval_density(&set(&[0, 4]), 0.5, DensityForm::SumOfSquaresForm).unwrap();
        assert!((v - 0.158_535).abs() < 1e-6);
        assert!(rel(v, closed(4.0, 0.5)) < 1e-14);
        for a in [1u64, 3, 17, 250] {
            for &t in &[0.05, 0.4, 0.93, 0.9999] {
                for form in DensityForm::ALL {
                    let v = eval_density(&set(&[0, a]), t, form).unwrap();
                    assert!(rel(v, closed(a as f64, t)) < 1e-12, "a={a} t={t} {form:?}");
                }
            }
        }
    }

    #[test]
    fn density_domain() {
        assert!(eval_density(&set(&[0, 1]), 0.0, DensityForm::NormForm).is_err());
        assert!(eval_density(&set(&[0, 1]), 1.0, DensityForm::NormForm).is_err());
    }

    #[test]
    fn huge_exponent_near_one_is_finite() {
        let s = SupportSet::lower_bound_family(5).unwrap();
        let a = (1u64 << 32) as f64;
        let t = 1.0 - 1.0 / (2.0 * a);
        let v = eval_density(&s, t, DensityForm::SumOfSquaresForm).unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert!(v <= density_pointwise_cap(&s).unwrap());
    }

    #[test]
    fn cap_examples() {
        assert_eq!(density_pointwise_cap(&set(&[0])).unwrap(), 0.0);
        assert!((density_pointwise_cap(&set(&[0, 1])).unwrap() - 3.0 / PI).abs() < 1e-15);
        assert!((density_pointwise_cap(&set(&[0, 1, 4, 16])).unwrap() - 80.0 / PI).abs() < 1e-13);
        assert!(density_pointwise_cap(&set(&[1, 2])).is_err());
    }

    #[test]
    fn cap_dominates_density() {
        let sets = [set(&[0, 1]), set(&[0, 1, 4, 16]), set(&[0, 5, 6, 100]), SupportSet::dense(30)];
        for s in &sets {
            let cap = density_pointwise_cap(s).unwrap();
            let k = DensityKernel::new(s);
            for i in 1..2000 {
                let t = i as f64 / 2000.0;
                assert!(k.density(t) <= cap);
            }
        }
    }

    #[test]
    fn union_decomposition_reconstructs() {
        let s1 = set(&[0, 1]);
        let s2 = set(&[5]);
        let parts = decompose_union_integrand(&s1, &s2, 0.5).unwrap();
        let union = DensityKernel::new(&set(&[0, 1, 5])).log_i(0.5).exp();
        assert!(rel(parts.total(), union) < 1e-10);

        let parts = decompose_union_integrand(&set(&[0]), &set(&[6]), 0.7).unwrap();
        assert_eq!(parts.weighted_first, 0.0);
        assert_eq!(parts.weighted_second, 0.0);
        let union = DensityKernel::new(&set(&[0, 6])).log_i(0.7).exp();
        assert!(rel(parts.cross, union) < 1e-12);

        assert!(decompose_union_integrand(&set(&[0, 1]), &set(&[1]), 0.5).is_err());
    }

    #[test]
    fn union_decomposition_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let mut all: Vec<u64> = (0..8).map(|_| rng.next_u64() % 300).collect();
            all.push(0);
            let whole = SupportSet::new(all).unwrap();
            if whole.len() < 2 {
                continue;
            }
            let split = 1 + (rng.next_u32() as usize % (whole.len() - 1));
            let (a, b) = whole.exponents().split_at(split);
            let s1 = SupportSet::new(a.to_vec()).unwrap();
            let s2 = SupportSet::new(b.to_vec()).unwrap();
            let t = (rng.next_u32() as f64 + 0.5) / (u32::MAX as f64 + 1.0);
            let parts = decompose_union_integrand(&s1, &s2, t).unwrap();
            assert!(parts.cross >= 0.0);
            let direct = DensityKernel::new(&whole).log_i(t).exp();
            if direct > 1e-300 {
                assert!(rel(parts.total(), direct) < 1e-10, "{s1} | {s2} at {t}");
            }
        }
    }

    #[test]
    fn collision_free_sum_adds_integrands() {
        let cases = [(set(&[0, 1, 2]), set(&[0, 3])), (set(&[0, 1]), set(&[0, 10, 25])), (set(&[0, 4]), set(&[0, 1, 2, 3]))];
        for (a, b) in &cases {
            let (sum, cf) = a.sum_sets(b).unwrap();
            assert!(cf);
            for i in 1..100 {
                let t = i as f64 / 100.0;
                let lhs = DensityKernel::new(&sum).log_i(t).exp();
                let rhs = DensityKernel::new(a).log_i(t).exp() + DensityKernel::new(b).log_i(t).exp();
                assert!(rel(lhs, rhs) < 1e-10, "{a} + {b} at {t}");
            }
        }
    }

    #[test]
    fn forms_agree_on_grid() {
        let sets = [set(&[0, 1, 2]), set(&[0, 3, 7, 8, 100]), set(&[0, 1, 4, 16, 256]), set(&[0, 1000, 1 << 20]), SupportSet::dense(40)];
        for s in &sets {
            let k = DensityKernel::new(s);
            for i in 1..100 {
                let t = 0.01 * i as f64;
                let v = k.density(t);
                for form in [DensityForm::NormForm, DensityForm::LogDerivForm] {
                    let w = k.density_with(form, t);
                    assert!(rel(v, w) < 1e-9, "{s} t={t} {form:?}: {v} vs {w}");
                }
            }
        }
    }

    #[test]
    fn abcd_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut u = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        for _ in 0..10_000 {
            let a = 10.0 * u();
            let b = 0.1 + 10.0 * u();
            let c = 10.0 * u();
            let d = 0.1 + 10.0 * u();
            let (l, r) = abcd_identity_sides(a, b, c, d);
            assert!(rel(l, r) < 1e-12, "{a} {b} {c} {d}");
        }
    }

    proptest! {
        #[test]
        fn density_nonnegative(v in prop::collection::vec(0u64..5000, 1..8), t in 0.0001f64..0.9999) {
            let s = SupportSet::new(v).unwrap();
            for form in DensityForm::ALL {
                prop_assert!(eval_density(&s, t, form).unwrap() >= 0.0);
            }
        }

        #[test]
        fn density_shift_invariant(v in prop::collection::vec(0u64..500, 2..6), shift in 1u64..50, t in 0.05f64..0.95) {
            let s = SupportSet::new(v).unwrap();
            let shifted = SupportSet::new(s.exponents().iter().map(|e| e + shift).collect()).unwrap();
            let a = eval_density(&s, t, DensityForm::SumOfSquaresForm).unwrap();
            let b = eval_density(&shifted, t, DensityForm::SumOfSquaresForm).unwrap();
            prop_assert!(rel(a, b) < 1e-12);
        }
    }
}
