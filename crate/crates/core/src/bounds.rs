//! Closed-form bounds on the expected zero count, the union / sum calculus
//! with certified critical points, and the recursive dense bound.

use std::f64::consts::{FRAC_PI_2, PI};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::{ln_t, log_sum_exp};
use crate::sparse::{refine, IsolationMethod, SparsePoly};
use crate::supportset::SupportSet;

/// Constant term of the dense asymptotic expansion on the real line.
pub const KAC_C1: f64 = 0.6257358072;

/// Largest exponent accepted by [`critical_points_odd`].
pub const CRITICAL_POINTS_MAX_EXPONENT: u64 = 1 << 20;

/// Width to which critical points are refined before `γ` is evaluated.
pub const CRITICAL_POINT_WIDTH: f64 = 1e-12;

/// A named bound value with the hypotheses it relies on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub value: f64,
    pub assumptions: String,
    /// The inequality being evaluated, in words.
    pub statement: String,
}

impl BoundReport {
    fn new(name: &str, value: f64, assumptions: &str, statement: &str) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::domain(format!("bound {name} is not finite")));
        }
        Ok(Self {
            name: name.into(),
            value,
            assumptions: assumptions.into(),
            statement: statement.into(),
        })
    }
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::domain(msg()))
    }
}

/// `(2/π)√(k−1)` for a `k`-term support on `(0, 1)`.
pub fn sqrt_bound(k: u64) -> Result<f64> {
    require(k >= 1, || format!("k = {k} must be at least 1"))?;
    Ok(2.0 / PI * ((k - 1) as f64).sqrt())
}

/// `1/4 + (2/π)(√(k−1) − 1)`.
pub fn refined_sqrt_bound(k: u64) -> Result<f64> {
    require(k >= 2, || format!("k = {k} must be at least 2"))?;
    Ok(0.25 + 2.0 / PI * (((k - 1) as f64).sqrt() - 1.0))
}

/// `(1/π)√k ln k`, the earlier sparse bound.
pub fn bet_bound(k: u64) -> Result<f64> {
    require(k >= 2, || format!("k = {k} must be at least 2"))?;
    let k = k as f64;
    Ok(k.sqrt() * k.ln() / PI)
}

/// `(1/2π)(ln(2/ε) + 4/√ε − 4)`: zeros in `(0, 1−ε)` for any support.
pub fn tail_bound(epsilon: f64) -> Result<f64> {
    require(epsilon > 0.0 && epsilon < 1.0, || {
        format!("epsilon = {epsilon} outside (0, 1)")
    })?;
    Ok(((2.0 / epsilon).ln() + 4.0 / epsilon.sqrt() - 4.0) / (2.0 * PI))
}

/// `(2/π) ln n + C₁ + 2/(nπ)`: real zeros of the dense degree-`n` polynomial.
pub fn kac_dense_asymptotic(n: u64) -> Result<f64> {
    require(n >= 2, || format!("n = {n} must be at least 2"))?;
    let n = n as f64;
    Ok(2.0 / PI * n.ln() + KAC_C1 + 2.0 / (n * PI))
}

/// `(1/π) arctan(1/√k)`: the cost of adding one exponent above a `k`-term
/// support containing 0.
pub fn increment_bound(k: u64) -> Result<f64> {
    require(k >= 1, || format!("k = {k} must be at least 1"))?;
    Ok((1.0 / (k as f64).sqrt()).atan() / PI)
}

/// `z1 + z2` for a collision-free sum `S1 + S2`.
pub fn sum_bound(z1: f64, z2: f64) -> Result<f64> {
    require(z1.is_finite() && z2.is_finite() && z1 >= 0.0 && z2 >= 0.0, || {
        format!("zero counts ({z1}, {z2}) must be finite and non-negative")
    })?;
    Ok(z1 + z2)
}

/// Certified bound for `{0, …, n}` built the way the induction builds it:
/// `{0,1}` costs 1/4; odd `n = 2a+1` is the sum `{0..a} + {0, a+1}` (+1/4);
/// even `n = 2a` adds the top singleton to `{0..2a−1}` with no critical
/// points (+1/2).
pub fn dense_bound_recursive(n: u64) -> Result<f64> {
    require(n >= 1, || format!("n = {n} must be at least 1"))?;
    fn d(n: u64) -> f64 {
        match n {
            0 => 0.0,
            1 => 0.25,
            _ if n % 2 == 1 => d((n - 1) / 2) + 0.25,
            _ => d(n - 1) + 0.5,
        }
    }
    Ok(d(n))
}

/// One odd-multiplicity critical point of `g_{S1}/g_{S2}` with its parity
/// certificate: the numerator `h = g_{S2} g'_{S1} − g_{S1} g'_{S2}` has
/// certified opposite signs at the two dyadic endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub lo: f64,
    pub hi: f64,
    pub sign_before: i8,
    pub sign_after: i8,
}

impl CriticalPoint {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointList {
    pub points: Vec<CriticalPoint>,
    pub method: IsolationMethod,
}

impl CriticalPointList {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `h(t)·t = Σ_{a∈S1, b∈S2} 2(a−b) t^{2(a+b)}` with exact integer
/// coefficients; it has the sign of `(g_{S1}/g_{S2})'` on `(0, 1)`.
pub fn ratio_derivative_numerator(s1: &SupportSet, s2: &SupportSet) -> SparsePoly {
    let mut terms = Vec::with_capacity(s1.len() * s2.len());
    for &a in s1.exponents() {
        for &b in s2.exponents() {
            terms.push((2 * (a + b), BigInt::from(2) * (BigInt::from(a) - BigInt::from(b))));
        }
    }
    SparsePoly::new(terms)
}

/// Critical points of odd multiplicity of `g_{S1}/g_{S2}` in `(0, 1)`,
/// each isolated in a dyadic interval of width at most 1e-12.
pub fn critical_points_odd(s1: &SupportSet, s2: &SupportSet) -> Result<CriticalPointList> {
    require(s1.is_disjoint(s2), || "sets must be disjoint".into())?;
    let top = s1.max().max(s2.max());
    if top > CRITICAL_POINTS_MAX_EXPONENT {
        return Err(Error::unsupported(format!(
            "critical points need max exponent ≤ {CRITICAL_POINTS_MAX_EXPONENT}, got {top}"
        )));
    }
    let h = ratio_derivative_numerator(s1, s2);
    let (changes, method) = h.sign_changes()?;
    let points = changes
        .into_iter()
        .map(|c| {
            let r = refine(&h, c, CRITICAL_POINT_WIDTH)?;
            Ok(CriticalPoint {
                lo: r.lo,
                hi: r.hi,
                sign_before: r.sign_lo,
                sign_after: -r.sign_lo,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CriticalPointList { points, method })
}

/// Orders a disjoint pair so that `(g_{S1}/g_{S2})' ≥ 0` near 0, decided by
/// the exact lowest-order term of the derivative numerator. Returns whether
/// the inputs were swapped.
pub fn order_pair(s1: &SupportSet, s2: &SupportSet) -> Result<(SupportSet, SupportSet, bool)> {
    require(s1.is_disjoint(s2), || "sets must be disjoint".into())?;
    let h = ratio_derivative_numerator(s1, s2);
    let lowest = h.terms().next().map(|(_, c)| c.sign());
    if lowest == Some(num_bigint::Sign::Minus) {
        Ok((s2.clone(), s1.clone(), true))
    } else {
        Ok((s1.clone(), s2.clone(), false))
    }
}

/// `ln γ = ½ ln(g1/g2)` at `t ∈ (0, 1]`.
fn ln_gamma(s1: &SupportSet, s2: &SupportSet, t: f64) -> f64 {
    let lt = ln_t(t);
    let l1 = log_sum_exp(s1.exponents().iter().map(|&e| 2.0 * e as f64 * lt));
    let l2 = log_sum_exp(s2.exponents().iter().map(|&e| 2.0 * e as f64 * lt));
    0.5 * (l1 - l2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnionBoundReport {
    /// `z1 + z2 + R/π`.
    pub fine: BoundReport,
    /// `z1 + z2 + (m+1)/2`.
    pub coarse: BoundReport,
    pub m: usize,
    /// The arctan increments `T^i`, `i = 0..=m`; `R` is their sum.
    pub arctan_terms: Vec<f64>,
    pub critical_points: CriticalPointList,
    /// Whether the inputs were reordered so the ratio increases near 0.
    pub swapped: bool,
}

/// Upper bound on `z_{S1 ⊔ S2}` from `z1 = z_{S1}` and `z2 = z_{S2}`.
///
/// With `c_0 = 0 < c_1 < … < c_m < c_{m+1} = 1` the odd critical points and
/// `γ = √(g1/g2)`, `T^i` is `arctan γ(c_{i+1}) − arctan γ(c_i)` for even `i`
/// and `arctan(1/γ(c_{i+1})) − arctan(1/γ(c_i))` for odd `i`.
pub fn union_bound(s1: &SupportSet, s2: &SupportSet, z1: f64, z2: f64) -> Result<UnionBoundReport> {
    require(z1.is_finite() && z2.is_finite(), || "zero counts must be finite".into())?;
    let (a, b, swapped) = order_pair(s1, s2)?;
    let (za, zb) = if swapped { (z2, z1) } else { (z1, z2) };
    let crit = critical_points_odd(&a, &b)?;
    let m = crit.len();

    // ln γ at c_0..c_{m+1}; at 0 the ratio vanishes because S1 carries the
    // larger minimum exponent after ordering.
    let mut lg = Vec::with_capacity(m + 2);
    lg.push(f64::NEG_INFINITY);
    lg.extend(crit.points.iter().map(|p| ln_gamma(&a, &b, p.midpoint())));
    lg.push(ln_gamma(&a, &b, 1.0));
    let atan_g = |l: f64| l.exp().atan();
    let atan_inv = |l: f64| (-l).exp().atan();
    let terms: Vec<f64> = (0..=m)
        .map(|i| {
            if i % 2 == 0 {
                atan_g(lg[i + 1]) - atan_g(lg[i])
            } else {
                atan_inv(lg[i + 1]) - atan_inv(lg[i])
            }
        })
        .collect();
    let r: f64 = terms.iter().sum();
    debug_assert!(terms.iter().all(|&t| t <= FRAC_PI_2 + 1e-12));
    let fine = BoundReport::new(
        "union",
        za + zb + r / PI,
        "S1, S2 disjoint; S1 ordered so g1/g2 increases near 0",
        "z(S1 ⊔ S2) ≤ z(S1) + z(S2) + (1/π) Σ T^i",
    )?;
    let coarse = BoundReport::new(
        "union-coarse",
        za + zb + (m as f64 + 1.0) / 2.0,
        "S1, S2 disjoint; m odd-multiplicity critical points of g1/g2",
        "z(S1 ⊔ S2) ≤ z(S1) + z(S2) + (m + 1)/2",
    )?;
    Ok(UnionBoundReport {
        fine,
        coarse,
        m,
        arctan_terms: terms,
        critical_points: crit,
        swapped,
    })
}

/// Closed-form bound reports by kind name, for the command line.
pub fn closed_form_report(kind: &str, k: Option<u64>, epsilon: Option<f64>) -> Result<BoundReport> {
    let need_k = || k.ok_or_else(|| Error::domain(format!("bound {kind} needs k")));
    match kind {
        "sqrt" => BoundReport::new(
            kind,
            sqrt_bound(need_k()?)?,
            "k-term support, zeros in (0, 1)",
            "z ≤ (2/π)√(k−1)",
        ),
        "refined" => BoundReport::new(
            kind,
            refined_sqrt_bound(need_k()?)?,
            "k ≥ 2",
            "z ≤ 1/4 + (2/π)(√(k−1) − 1)",
        ),
        "bet" => BoundReport::new(
            kind,
            bet_bound(need_k()?)?,
            "k ≥ 2",
            "z ≤ (1/π)√k ln k",
        ),
        "tail" => {
            let eps = epsilon.ok_or_else(|| Error::domain("bound tail needs eps"))?;
            BoundReport::new(
                kind,
                tail_bound(eps)?,
                "any support, zeros in (0, 1−ε)",
                "z ≤ (1/2π)(ln(2/ε) + 4/√ε − 4)",
            )
        }
        "kac" => BoundReport::new(
            kind,
            kac_dense_asymptotic(need_k()?)?,
            "dense support {0..n}, real line, asymptotic up to O(1/n²)",
            "z ≈ (2/π) ln n + C₁ + 2/(nπ)",
        ),
        "increment" => BoundReport::new(
            kind,
            increment_bound(need_k()?)?,
            "0 ∈ S, |S| = k, a > max S",
            "z(S ∪ {a}) − z(S) ≤ (1/π) arctan(1/√k)",
        ),
        "dense-recursive" => BoundReport::new(
            kind,
            dense_bound_recursive(need_k()?)?,
            "dense support {0..n}, zeros in (0, 1)",
            "recursive sum / union certificate, ≤ (3/4) log₂ n",
        ),
        other => Err(Error::domain(format!("unknown bound kind {other}"))),
    }
}
