//! Adaptive integration of the zero density.
//!
//! Each panel is integrated with the nested 15-point Kronrod / 7-point Gauss
//! pair and bisected until `|K15 - G7| ≤ abs_tol · width / |I|`. Before the
//! adaptive pass the interval is pre-split so that no panel straddles a
//! monomial boundary layer:
//!
//! * at `1 - 1/(2e)` for every exponent `e ≥ 1`, and
//! * at the dyadic points `1 - 2^-j` down to a width well below
//!   `1/max(S)`, so every panel is at most half as wide as its distance to
//!   1.
//!
//! Without the dyadic points, a layer of width `2^-32` sitting next to a
//! unit-size panel would be invisible to every quadrature node.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::density::{decompose_at_ln, DensityKernel};
use crate::error::{Error, Result};
use crate::logspace::{ln_t, log_sum_exp};
use crate::supportset::SupportSet;

pub const DEFAULT_ABS_TOL: f64 = 1e-8;
/// Default tolerance for the double-exponential lower-bound family.
pub const FAMILY_ABS_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_EVALUATIONS: usize = 1_000_000;

// Kronrod abscissae (descending, last is the centre) and weights for the
// 7-point Gauss / 15-point Kronrod pair.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Open subinterval of `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpenInterval {
    lo: f64,
    hi: f64,
}

impl OpenInterval {
    pub const UNIT: OpenInterval = OpenInterval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && lo < hi && hi <= 1.0) {
            return Err(Error::domain(format!(
                "interval ({lo}, {hi}) is not an open subinterval of (0, 1)"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn contains_strictly(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    pub breakpoints: Vec<f64>,
}

impl QuadratureResult {
    fn zero() -> Self {
        Self {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 0,
            breakpoints: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub max_evaluations: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: DEFAULT_ABS_TOL,
            max_evaluations: DEFAULT_MAX_EVALUATIONS,
        }
    }
}

impl QuadratureOptions {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

struct Panel {
    value: f64,
    error: f64,
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Panel {
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Adaptive integration of `f` over `(lo, hi)` after splitting at
/// `breakpoints` (which must lie strictly inside and be sorted).
///
/// `f` is only ever sampled at interior Kronrod nodes.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    opts: &QuadratureOptions,
) -> Result<QuadratureResult> {
    if !(opts.abs_tol > 0.0) {
        return Err(Error::domain("abs_tol must be positive"));
    }
    let mut run = Adaptive::new(opts, hi - lo);
    let mut edges = Vec::with_capacity(breakpoints.len() + 2);
    edges.push(lo);
    edges.extend_from_slice(breakpoints);
    edges.push(hi);
    run.integrate(&f, &edges)?;
    run.finish(breakpoints.to_vec())
}

/// Shared state of one adaptive run, possibly over several coordinate
/// patches: the evaluation budget, the per-unit-width tolerance and the
/// accepted panels.
struct Adaptive {
    abs_tol: f64,
    density_tol: f64,
    max_evaluations: usize,
    evaluations: usize,
    value: f64,
    error: f64,
}

impl Adaptive {
    fn new(opts: &QuadratureOptions, total_width: f64) -> Self {
        Self {
            abs_tol: opts.abs_tol,
            density_tol: opts.abs_tol / total_width,
            max_evaluations: opts.max_evaluations,
            evaluations: 0,
            value: 0.0,
            error: 0.0,
        }
    }

    fn integrate<F: Fn(f64) -> f64>(&mut self, f: &F, edges: &[f64]) -> Result<()> {
        let mut accepted: Vec<(f64, Panel)> = Vec::new();
        let mut stack: Vec<(f64, f64)> = edges.windows(2).rev().map(|w| (w[0], w[1])).collect();
        while let Some((a, b)) = stack.pop() {
            if self.evaluations + 15 > self.max_evaluations {
                let (value, error) = sum_panels(&mut accepted);
                let remaining: f64 = stack.iter().map(|(x, y)| y - x).sum::<f64>() + (b - a);
                return Err(Error::NumericalFailure {
                    reason: format!("evaluation budget of {} exhausted", self.max_evaluations),
                    estimate: self.value + value,
                    error_bound: self.error + error + remaining * self.density_tol,
                });
            }
            let p = gauss_kronrod(f, a, b);
            self.evaluations += 15;
            let local_tol = self.density_tol * (b - a);
            // Relative floor so that rounding noise alone never forces a split.
            let noise = 50.0 * f64::EPSILON * p.value.abs();
            let mid = 0.5 * (a + b);
            let splittable = mid > a && mid < b;
            if p.error <= local_tol || p.error <= noise || !splittable {
                accepted.push((a, p));
            } else {
                stack.push((mid, b));
                stack.push((a, mid));
            }
        }
        let (value, error) = sum_panels(&mut accepted);
        self.value += value;
        self.error += error;
        Ok(())
    }

    fn finish(self, breakpoints: Vec<f64>) -> Result<QuadratureResult> {
        if self.error > self.abs_tol {
            return Err(Error::NumericalFailure {
                reason: "error estimate above tolerance at f64 resolution".into(),
                estimate: self.value,
                error_bound: self.error,
            });
        }
        Ok(QuadratureResult {
            value: self.value,
            abs_error_estimate: self.error,
            evaluations: self.evaluations,
            breakpoints,
        })
    }
}

fn sum_panels(panels: &mut [(f64, Panel)]) -> (f64, f64) {
    panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    panels
        .iter()
        .fold((0.0, 0.0), |(v, e), (_, p)| (v + p.value, e + p.error))
}

/// Breakpoints in the distance-to-one coordinate `u = 1 - t`:
/// `1/(2e)` for every exponent and `2^-j` down to `1/(8 max)`.
fn distance_breakpoints(set: &SupportSet, u_lo: f64, u_hi: f64) -> Vec<f64> {
    let max = set.max() - set.min();
    let mut pts: Vec<f64> = set
        .exponents()
        .iter()
        .map(|e| e - set.min())
        .filter(|&e| e >= 1)
        .map(|e| 1.0 / (2.0 * e as f64))
        .collect();
    if max >= 1 {
        let depth = 64 - (8 * max).leading_zeros();
        for j in 1..=depth {
            pts.push(2f64.powi(-(j as i32)));
        }
    }
    pts.retain(|&u| u > u_lo && u < u_hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Scale breakpoints of `S` inside `interval`, sorted and deduplicated.
pub fn scale_breakpoints(set: &SupportSet, interval: &OpenInterval) -> Vec<f64> {
    let mut pts: Vec<f64> = distance_breakpoints(set, 1.0 - interval.hi, 1.0 - interval.lo)
        .into_iter()
        .map(|u| 1.0 - u)
        .filter(|&t| interval.contains_strictly(t))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Integrates `f(ln t)` over `interval`. Below `t = 1/2` the nodes are
/// placed in `t`; above, in `u = 1 - t`, so that a node at distance `2^-40`
/// from 1 is represented exactly and `ln t = ln_1p(-u)` keeps full relative
/// accuracy. Placing those nodes in `t` would round them by up to an ulp of
/// 1, which near a layer of width `2^-32` perturbs the integrand by ~1e-7.
fn integrate_log_coordinate<F: Fn(f64) -> f64>(
    f: F,
    set: &SupportSet,
    interval: &OpenInterval,
    opts: &QuadratureOptions,
) -> Result<QuadratureResult> {
    if !(opts.abs_tol > 0.0) {
        return Err(Error::domain("abs_tol must be positive"));
    }
    let mut run = Adaptive::new(opts, interval.width());
    const SPLIT: f64 = 0.5;
    if interval.lo < SPLIT {
        let hi = interval.hi.min(SPLIT);
        run.integrate(&|t: f64| f(t.ln()), &[interval.lo, hi])?;
    }
    if interval.hi > SPLIT {
        // Exact: both ends lie in [1/2, 1].
        let u_lo = 1.0 - interval.hi;
        let u_hi = 1.0 - interval.lo.max(SPLIT);
        let mut edges = vec![u_lo];
        edges.extend(distance_breakpoints(set, u_lo, u_hi));
        edges.push(u_hi);
        run.integrate(&|u: f64| f((-u).ln_1p()), &edges)?;
    }
    run.finish(scale_breakpoints(set, interval))
}

/// Expected number of zeros of `f_S` in `interval ⊆ (0, 1)`.
pub fn expected_zeros(
    set: &SupportSet,
    interval: &OpenInterval,
    abs_tol: f64,
) -> Result<QuadratureResult> {
    expected_zeros_with(set, interval, &QuadratureOptions::with_tol(abs_tol))
}

pub fn expected_zeros_with(
    set: &SupportSet,
    interval: &OpenInterval,
    opts: &QuadratureOptions,
) -> Result<QuadratureResult> {
    if !(opts.abs_tol > 0.0) {
        return Err(Error::domain("abs_tol must be positive"));
    }
    let set = set.normalize();
    if set.len() == 1 {
        return Ok(QuadratureResult::zero());
    }
    let kernel = DensityKernel::new(&set);
    integrate_log_coordinate(|lt| kernel.density_at_ln(lt), &set, interval, opts)
}

/// Expected number of real zeros on the whole line: the four quarter-lines
/// `(-∞,-1), (-1,0), (0,1), (1,∞)` reduce to `(0,1)` for `S` and for its
/// reflection `{max(S) - e}`.
pub fn expected_zeros_real(set: &SupportSet, abs_tol: f64) -> Result<QuadratureResult> {
    let set = set.normalize();
    let inner = expected_zeros(&set, &OpenInterval::UNIT, abs_tol)?;
    let outer = expected_zeros(&set.reflect(set.max())?, &OpenInterval::UNIT, abs_tol)?;
    let mut breakpoints = inner.breakpoints.clone();
    breakpoints.extend(outer.breakpoints.iter().copied());
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    Ok(QuadratureResult {
        value: 2.0 * (inner.value + outer.value),
        abs_error_estimate: 2.0 * (inner.abs_error_estimate + outer.abs_error_estimate),
        evaluations: inner.evaluations + outer.evaluations,
        breakpoints,
    })
}

/// Expected number of zeros in `(0, 1 - epsilon)`.
pub fn tail_mass(set: &SupportSet, epsilon: f64, abs_tol: f64) -> Result<QuadratureResult> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon = {epsilon} outside (0, 1)")));
    }
    expected_zeros(set, &OpenInterval::new(0.0, 1.0 - epsilon)?, abs_tol)
}

/// `arctan sqrt(g1(t)/g2(t))`, including the one-sided limits at 0 and 1.
pub(crate) fn arctan_ratio(s1: &SupportSet, s2: &SupportSet, t: f64) -> f64 {
    if t == 0.0 {
        return match s1.min().cmp(&s2.min()) {
            std::cmp::Ordering::Greater => 0.0,
            std::cmp::Ordering::Less => PI / 2.0,
            std::cmp::Ordering::Equal => PI / 4.0,
        };
    }
    let lt = ln_t(t);
    let lg1 = log_sum_exp(s1.exponents().iter().map(|&e| 2.0 * e as f64 * lt));
    let lg2 = log_sum_exp(s2.exponents().iter().map(|&e| 2.0 * e as f64 * lt));
    (0.5 * (lg1 - lg2)).exp().atan()
}

/// `∫_α^β sqrt(W) dt` for a panel on which `g1/g2` is monotone:
/// `2 |arctan γ(β) - arctan γ(α)|` with `γ = sqrt(g1/g2)`.
pub fn arctan_mass(s1: &SupportSet, s2: &SupportSet, alpha: f64, beta: f64) -> Result<f64> {
    if !(0.0 <= alpha && alpha <= beta && beta <= 1.0) {
        return Err(Error::domain(format!(
            "panel ({alpha}, {beta}) is not inside [0, 1]"
        )));
    }
    if !s1.is_disjoint(s2) {
        return Err(Error::domain("arctan mass requires disjoint sets"));
    }
    if alpha == beta {
        return Ok(0.0);
    }
    Ok(2.0 * (arctan_ratio(s1, s2, beta) - arctan_ratio(s1, s2, alpha)).abs())
}

/// `∫_α^β sqrt(W) dt` by adaptive quadrature of the cross term, as an
/// independent check of [`arctan_mass`].
pub fn cross_term_quadrature(
    s1: &SupportSet,
    s2: &SupportSet,
    alpha: f64,
    beta: f64,
    abs_tol: f64,
) -> Result<QuadratureResult> {
    let union = s1.disjoint_union(s2)?;
    let interval = OpenInterval::new(alpha, beta)?;
    integrate_log_coordinate(
        |lt| decompose_at_ln(s1, s2, lt).cross.sqrt(),
        &union,
        &interval,
        &QuadratureOptions::with_tol(abs_tol),
    )
}
