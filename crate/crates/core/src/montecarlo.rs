//! Monte Carlo estimates of the expected zero count: Gaussian coefficients
//! from per-trial counter-based streams, exact root counts, and aggregation
//! that does not depend on how trials are scheduled.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::exactpoly::Dyadic;
use crate::quadrature::OpenInterval;
use crate::sparse::SparsePoly;
use crate::supportset::SupportSet;

pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_DEGREE_CAP: u64 = 2048;
/// Grid points per support element for [`CountMethod::GridSignChange`].
pub const GRID_POINTS_PER_TERM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    /// Exact count of distinct roots.
    ExactSturm,
    /// Sign changes on a fixed grid: a lower bound, flagged heuristic.
    GridSignChange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub seed: u64,
    pub trials: usize,
    pub interval: OpenInterval,
    pub degree_cap: u64,
    pub method: CountMethod,
}

impl TrialConfig {
    pub fn new(seed: u64, trials: usize, interval: OpenInterval) -> Self {
        Self {
            seed,
            trials,
            interval,
            degree_cap: DEFAULT_DEGREE_CAP,
            method: CountMethod::ExactSturm,
        }
    }

    pub fn with_method(mut self, method: CountMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_degree_cap(mut self, cap: u64) -> Self {
        self.degree_cap = cap;
        self
    }

    fn validate(&self, set: &SupportSet) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::domain("trials must be at least 1"));
        }
        if self.degree_cap == 0 {
            return Err(Error::domain("degree cap must be positive"));
        }
        if self.method == CountMethod::ExactSturm && set.max() > self.degree_cap {
            return Err(Error::unsupported(format!(
                "max exponent {} exceeds the exact-count degree cap {}",
                set.max(),
                self.degree_cap
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCReport {
    pub mean: f64,
    pub sample_variance: f64,
    pub ci95_halfwidth: f64,
    /// Zero count → number of trials with that count.
    pub histogram: BTreeMap<usize, usize>,
    pub trials_run: usize,
    pub method: CountMethod,
    /// True for grid counts, which only bound the true count from below.
    pub heuristic: bool,
}

/// The independent stream of trial `trial` under `seed`.
pub fn trial_stream(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// A standard normal by inversion of a uniform on the open unit interval.
pub fn standard_normal<R: RngCore>(rng: &mut R) -> f64 {
    let u = ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
    Normal::standard().inverse_cdf(u)
}

/// `|S|` i.i.d. standard normal coefficients, one per exponent in order.
pub fn sample_polynomial<R: RngCore>(set: &SupportSet, rng: &mut R) -> Vec<f64> {
    (0..set.len()).map(|_| standard_normal(rng)).collect()
}

/// The exact integer polynomial `2^s Σ a_i x^{e_i}`, `s` clearing all binary
/// denominators of the coefficients.
fn exact_polynomial(coeffs: &[f64], set: &SupportSet) -> Result<SparsePoly> {
    if coeffs.len() != set.len() {
        return Err(Error::domain(format!(
            "{} coefficients for {} exponents",
            coeffs.len(),
            set.len()
        )));
    }
    let dy = coeffs
        .iter()
        .map(|&c| Dyadic::from_f64(c))
        .collect::<Result<Vec<_>>>()?;
    let min_exp = dy
        .iter()
        .filter(|d| d.mantissa().bits() > 0)
        .map(|d| d.exponent())
        .min()
        .ok_or_else(|| Error::domain("zero polynomial"))?;
    Ok(SparsePoly::new(
        set.exponents()
            .iter()
            .zip(&dy)
            .map(|(&e, d)| {
                let shift = (d.exponent() - min_exp) as usize;
                (e, d.mantissa() << shift)
            })
            .collect::<Vec<(u64, BigInt)>>(),
    ))
}

/// Distinct real roots of `Σ a_i x^{e_i}` in the open interval.
pub fn count_real_roots_interval(
    coeffs: &[f64],
    set: &SupportSet,
    interval: &OpenInterval,
    method: CountMethod,
    degree_cap: u64,
) -> Result<usize> {
    let p = exact_polynomial(coeffs, set)?;
    match method {
        CountMethod::ExactSturm => {
            if set.max() > degree_cap {
                return Err(Error::unsupported(format!(
                    "max exponent {} exceeds the exact-count degree cap {degree_cap}",
                    set.max()
                )));
            }
            p.count_roots(interval.lo(), interval.hi())
        }
        CountMethod::GridSignChange => Ok(grid_sign_changes(&p, set, interval)),
    }
}

/// Grid for the heuristic count: uniform on `(0, 1/2]`, geometric in the
/// distance to 1 on `(1/2, 1)` down to `1/(64 max S)`.
fn heuristic_grid(set: &SupportSet, interval: &OpenInterval) -> Vec<f64> {
    let n = GRID_POINTS_PER_TERM * set.len();
    let half = n / 2;
    let mut pts: Vec<f64> = (1..=half).map(|i| 0.5 * i as f64 / half as f64).collect();
    let u_min = (1.0 / (64.0 * set.max().max(1) as f64)).max(1e-300);
    let ratio = (u_min / 0.5).powf(1.0 / (n - half) as f64);
    pts.extend((1..=n - half).map(|j| 1.0 - 0.5 * ratio.powi(j as i32)));
    pts.retain(|&t| t > interval.lo() && t < interval.hi());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Sign changes between consecutive grid points with certified signs; each
/// one brackets a distinct root, so this never exceeds the exact count.
fn grid_sign_changes(p: &SparsePoly, set: &SupportSet, interval: &OpenInterval) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for t in heuristic_grid(set, interval) {
        let s = p.sign_at(t).unwrap_or(0);
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Empirical mean zero count over `config.trials` independent polynomials.
pub fn estimate_expected_zeros(set: &SupportSet, config: &TrialConfig) -> Result<MCReport> {
    config.validate(set)?;
    let counts: Vec<usize> = (0..config.trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_stream(config.seed, i);
            let coeffs = sample_polynomial(set, &mut rng);
            count_real_roots_interval(
                &coeffs,
                set,
                &config.interval,
                config.method,
                config.degree_cap,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(&counts, config.method))
}

fn aggregate(counts: &[usize], method: CountMethod) -> MCReport {
    let n = counts.len();
    let mut histogram = BTreeMap::new();
    let mut sum = 0.0;
    for &c in counts {
        *histogram.entry(c).or_insert(0) += 1;
        sum += c as f64;
    }
    let mean = sum / n as f64;
    let sample_variance = if n > 1 {
        counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    MCReport {
        mean,
        sample_variance,
        ci95_halfwidth: 1.96 * (sample_variance / n as f64).sqrt(),
        histogram,
        trials_run: n,
        method,
        heuristic: method == CountMethod::GridSignChange,
    }
}
