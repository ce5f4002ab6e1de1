//! Numerical checks of the lower-bound construction on the family
//! `S_k = {0, 1} ∪ {2^(2^i) : 1 ≤ i ≤ k}`.
//!
//! Each step adds `a = 2^(2^k)` to `S = S_k \ {a}`. Within `(1 - 1/(2a), 1)`
//! the cross term `W` of the union gains mass `boundary_mass`, while the
//! density of `S` alone can lose at most `tail_leak` there; `step_gain` is
//! their difference.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::sqrt_bound;
use crate::error::{Error, Result};
use crate::extended::{Extended, DEFAULT_PRECISION_DIGITS};
use crate::quadrature::{expected_zeros, OpenInterval, QuadratureResult};
use crate::supportset::{SupportSet, LOWER_BOUND_FAMILY_MAX_K};

/// Points, as distances from 1, at which the double-precision density of
/// the largest family member is compared with the extended evaluation.
const SPOT_CHECK_DISTANCES: [f64; 6] = [0.25, 1.0 / 512.0, 1.0 / 131_072.0, 1.5e-8, 1.0 / 8_589_934_592.0, 1e-11];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub k: u32,
    /// The set before the step.
    pub base: SupportSet,
    /// The element added by the step.
    pub a: u64,
    /// `(1/2π) ∫ sqrt(W)` over `(1 - 1/(2a), 1)`.
    pub boundary_mass: f64,
    /// `|S| max(S) / (π 2a)`: the bound on the mass of `ρ_S` near 1.
    pub tail_leak: f64,
    /// `(k + 1) / (2π 2^(2^(k-1)))`.
    pub tail_leak_cap: f64,
    /// `g_S(1 - 1/(2a))`.
    pub g_at_boundary: f64,
    /// `|S| - 1`, the lower bound `g_at_boundary` is checked against.
    pub g_lower_bound: f64,
    pub step_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub k: u32,
    pub set_size: usize,
    pub z: f64,
    pub abs_error_estimate: f64,
    /// `z / sqrt(k)`.
    pub ratio_sqrt_k: f64,
    /// `(2/π) sqrt(|S_k| - 1)`.
    pub upper_cap: f64,
    /// Largest relative gap between the double and extended densities at
    /// the spot-check points; `None` when no extended check ran.
    pub extended_rel_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTable {
    pub rows: Vec<GrowthRow>,
    pub strictly_increasing: bool,
    pub abs_tol: f64,
}

/// One mass check of `ρ_S` over `(1 - 1/b, 1)` against `(|S|+1) max(S)/(π b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearOneMass {
    pub b: f64,
    pub mass: f64,
    pub bound: f64,
}

fn check_k(k: u32) -> Result<()> {
    if !(1..=LOWER_BOUND_FAMILY_MAX_K).contains(&k) {
        return Err(Error::unsupported(format!(
            "lower-bound step k={k} outside 1..={LOWER_BOUND_FAMILY_MAX_K}"
        )));
    }
    Ok(())
}

/// `(S, a)` for step `k`.
pub fn step_sets(k: u32) -> Result<(SupportSet, u64)> {
    check_k(k)?;
    let family = SupportSet::lower_bound_family(k)?;
    let a = family.max();
    let base = family.without_max().expect("family has at least three elements");
    Ok((base, a))
}

pub fn step_report(k: u32) -> Result<StepReport> {
    step_report_with(k, DEFAULT_PRECISION_DIGITS)
}

pub fn step_report_with(k: u32, digits: u32) -> Result<StepReport> {
    let (base, a) = step_sets(k)?;
    let top = SupportSet::singleton(a);
    let u = 1.0 / (2.0 * a as f64);
    let mut ext = Extended::new(digits)?;
    // γ = sqrt(g_S/g_a) decreases from sqrt(|S|) at t = 1 as t moves left.
    let at_one = (base.len() as f64).sqrt().atan();
    let at_boundary = ext.arctan_ratio(&base, &top, u)?;
    let boundary_mass = (at_boundary - at_one).abs() / PI;
    let s = base.len() as f64;
    let tail_leak = s * base.max() as f64 / (PI * 2.0 * a as f64);
    let tail_leak_cap = (k as f64 + 1.0) / (2.0 * PI * 2f64.powi(1 << (k - 1)));
    let g_at_boundary = ext.eval_g(&base, u)?.value();
    Ok(StepReport {
        k,
        base,
        a,
        boundary_mass,
        tail_leak,
        tail_leak_cap,
        g_at_boundary,
        g_lower_bound: s - 1.0,
        step_gain: boundary_mass - tail_leak,
    })
}

/// Quadrature mass of `ρ_S` near 1 for `b ∈ {2a, 4a}` at step `k`.
pub fn near_one_mass(k: u32, abs_tol: f64) -> Result<Vec<NearOneMass>> {
    let (base, a) = step_sets(k)?;
    [2.0, 4.0]
        .iter()
        .map(|m| {
            let b = m * a as f64;
            let mass = expected_zeros(&base, &OpenInterval::new(1.0 - 1.0 / b, 1.0)?, abs_tol)?.value;
            let bound = (base.len() as f64 + 1.0) * base.max() as f64 / (PI * b);
            Ok(NearOneMass { b, mass, bound })
        })
        .collect()
}

/// Largest relative gap between the double-precision density and the
/// extended one at the spot-check points.
pub fn extended_density_gap(set: &SupportSet, digits: u32) -> Result<f64> {
    let kernel = crate::density::DensityKernel::new(set);
    let mut ext = Extended::new(digits)?;
    let mut worst: f64 = 0.0;
    for &u in &SPOT_CHECK_DISTANCES {
        let reference = ext.density(set, u)?;
        let double = kernel.density_at_ln((-u).ln_1p());
        let gap = (double - reference).abs() / reference.abs().max(f64::MIN_POSITIVE);
        worst = worst.max(gap);
    }
    Ok(worst)
}

/// `z_{S_k}` on `(0, 1)` for `k = 1..=k_max`.
pub fn verify_growth(k_max: u32, abs_tol: f64) -> Result<GrowthTable> {
    verify_growth_with(k_max, abs_tol, DEFAULT_PRECISION_DIGITS)
}

pub fn verify_growth_with(k_max: u32, abs_tol: f64, digits: u32) -> Result<GrowthTable> {
    if !(2..=LOWER_BOUND_FAMILY_MAX_K).contains(&k_max) {
        return Err(Error::unsupported(format!(
            "k_max={k_max} outside 2..={LOWER_BOUND_FAMILY_MAX_K}"
        )));
    }
    if !(abs_tol > 0.0) {
        return Err(Error::domain("abs_tol must be positive"));
    }
    let rows = (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let set = SupportSet::lower_bound_family(k)?;
            let QuadratureResult {
                value,
                abs_error_estimate,
                ..
            } = expected_zeros(&set, &OpenInterval::UNIT, abs_tol)?;
            let extended_rel_gap = if k == LOWER_BOUND_FAMILY_MAX_K {
                Some(extended_density_gap(&set, digits)?)
            } else {
                None
            };
            Ok(GrowthRow {
                k,
                set_size: set.len(),
                z: value,
                abs_error_estimate,
                ratio_sqrt_k: value / (k as f64).sqrt(),
                upper_cap: sqrt_bound(set.len() as u64)?,
                extended_rel_gap,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let strictly_increasing = rows.windows(2).all(|w| w[1].z > w[0].z);
    Ok(GrowthTable {
        rows,
        strictly_increasing,
        abs_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::eval_g;
    use crate::quadrature::{arctan_mass, cross_term_quadrature};

    #[test]
    fn step_sets_follow_the_family() {
        let (s, a) = step_sets(1).unwrap();
        assert_eq!(s.exponents(), &[0, 1]);
        assert_eq!(a, 4);
        let (s, a) = step_sets(2).unwrap();
        assert_eq!(s.exponents(), &[0, 1, 4]);
        assert_eq!(a, 16);
        assert_eq!(step_sets(5).unwrap().1, 1 << 32);
        assert!(matches!(step_sets(0), Err(Error::UnsupportedScale(_))));
        assert!(matches!(step_sets(6), Err(Error::UnsupportedScale(_))));
    }

    #[test]
    fn step_two_by_hand() {
        // S = {0,1,4}, a = 16, t = 31/32.
        let r = step_report(2).unwrap();
        let t: f64 = 31.0 / 32.0;
        let gs = 1.0 + t * t + t.powi(8);
        let ga = t.powi(32);
        let expected = ((1.0f64 / 3.0).sqrt().atan() - (ga / gs).sqrt().atan()) / PI;
        assert!((r.boundary_mass - expected).abs() < 1e-14, "{} vs {expected}", r.boundary_mass);
        assert!((r.g_at_boundary - gs).abs() < 1e-14);
        assert!((r.tail_leak - 12.0 / (32.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn report_invariants() {
        for k in 1..=5 {
            let r = step_report(k).unwrap();
            assert!(r.boundary_mass >= 0.0 && r.tail_leak >= 0.0);
            // Equal to the cap for k ≥ 2 up to rounding.
            assert!(r.tail_leak <= r.tail_leak_cap * (1.0 + 4.0 * f64::EPSILON), "k={k}");
            assert!(r.g_at_boundary >= r.g_lower_bound, "k={k}");
            // Double precision agrees at these points.
            let gd = eval_g(&r.base, 1.0 - 1.0 / (2.0 * r.a as f64)).unwrap().value();
            assert!((gd - r.g_at_boundary).abs() < 1e-12 * gd);
            let am = arctan_mass(&r.base, &SupportSet::singleton(r.a), 1.0 - 1.0 / (2.0 * r.a as f64), 1.0)
                .unwrap();
            assert!((am / (2.0 * PI) - r.boundary_mass).abs() < 1e-12, "k={k}");
        }
        assert!((step_report(4).unwrap().tail_leak_cap - 5.0 / (2.0 * PI * 256.0)).abs() < 1e-15);
    }

    #[test]
    fn boundary_mass_matches_cross_term_quadrature() {
        for k in 1..=5 {
            let r = step_report(k).unwrap();
            let q = cross_term_quadrature(
                &r.base,
                &SupportSet::singleton(r.a),
                1.0 - 1.0 / (2.0 * r.a as f64),
                1.0,
                1e-9,
            )
            .unwrap();
            assert!((q.value / (2.0 * PI) - r.boundary_mass).abs() < 1e-6, "k={k}");
        }
    }

    #[test]
    fn near_one_mass_respects_the_bound() {
        for k in 1..=5 {
            for m in near_one_mass(k, 1e-10).unwrap() {
                assert!(m.mass <= m.bound, "k={k} b={}: {} > {}", m.b, m.mass, m.bound);
            }
        }
    }

    #[test]
    fn growth_table_small() {
        let t = verify_growth(3, 1e-8).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert!(t.strictly_increasing);
        assert!(t.rows[0].z >= 0.25 - 1e-8);
        for r in &t.rows {
            assert!(r.z <= r.upper_cap + 1e-8);
            assert_eq!(r.set_size, r.k as usize + 2);
        }
        assert!(verify_growth(1, 1e-8).is_err());
        assert!(verify_growth(6, 1e-8).is_err());
    }

    #[test]
    fn double_density_matches_extended_on_largest_member() {
        let s = SupportSet::lower_bound_family(5).unwrap();
        assert!(extended_density_gap(&s, 40).unwrap() < 1e-10);
    }
}
