//! Acceptance suite: one PASS/FAIL line per criterion, with runtimes.
//! Exits nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kacz::bounds::{
    critical_points_odd, dense_bound_recursive, increment_bound, kac_dense_asymptotic,
    refined_sqrt_bound, sqrt_bound, tail_bound, union_bound,
};
use kacz::density::eval_density;
use kacz::lowerbound::{step_report, verify_growth};
use kacz::montecarlo::{estimate_expected_zeros, TrialConfig};
use kacz::quadrature::{
    cross_term_quadrature, expected_zeros, expected_zeros_real, tail_mass, OpenInterval,
};
use kacz::{DensityForm, SupportSet};

const TOL: f64 = 1e-8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn z(set: &SupportSet) -> f64 {
    expected_zeros(set, &OpenInterval::UNIT, TOL).expect("quadrature").value
}

/// `0` plus `k - 1` (`k` drawn from the range) distinct exponents in `1..=max`.
fn random_normalized(rng: &mut ChaCha8Rng, k: std::ops::RangeInclusive<usize>, max: u64) -> SupportSet {
    let k = rng.random_range(k);
    let mut s = BTreeSet::from([0u64]);
    while s.len() < k {
        s.insert(rng.random_range(1..=max));
    }
    SupportSet::new(s.into_iter().collect()).unwrap()
}

/// `k` (drawn from the range) distinct exponents in `0..=max`.
fn random_set(rng: &mut ChaCha8Rng, k: std::ops::RangeInclusive<usize>, max: u64) -> SupportSet {
    let k = rng.random_range(k);
    let mut s = BTreeSet::new();
    while s.len() < k {
        s.insert(rng.random_range(0..=max));
    }
    SupportSet::new(s.into_iter().collect()).unwrap()
}

/// The 200-set battery: `2 ≤ k ≤ 20`, max exponent ≤ 10⁵, half of them with
/// small exponents so both regimes are covered.
fn battery() -> Vec<SupportSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (0..200)
        .map(|i| {
            let max = if i % 2 == 0 { 100_000 } else { 200 };
            random_normalized(&mut rng, 2..=20, max)
        })
        .collect()
}

fn pair_law() -> Outcome {
    let mut worst: f64 = 0.0;
    for a in [1u64, 2, 3, 10, 100, 1000] {
        worst = worst.max((z(&SupportSet::new(vec![0, a]).unwrap()) - 0.25).abs());
    }
    outcome(worst <= 1e-6, format!("max |z - 1/4| = {worst:.2e}"))
}

fn kac_dense() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [32u64, 64, 128, 256] {
        let q = expected_zeros_real(&SupportSet::dense(n), TOL).unwrap().value;
        worst = worst.max((q - kac_dense_asymptotic(n).unwrap()).abs());
    }
    outcome(worst <= 0.01, format!("max |z_real - asymptotic| = {worst:.2e}"))
}

fn sqrt_bounds() -> Outcome {
    let mut worst_sqrt = f64::NEG_INFINITY;
    let mut worst_refined = f64::NEG_INFINITY;
    for s in battery() {
        let k = s.len() as u64;
        let v = z(&s);
        worst_sqrt = worst_sqrt.max(v - sqrt_bound(k).unwrap());
        worst_refined = worst_refined.max(v - refined_sqrt_bound(k).unwrap());
    }
    outcome(
        worst_sqrt <= 1e-6 && worst_refined <= 1e-6,
        format!("max z - sqrt bound = {worst_sqrt:.3e}, max z - refined = {worst_refined:.3e}"),
    )
}

fn form_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let max = if i % 2 == 0 { 1 << 20 } else { 64 };
        let s = random_set(&mut rng, 2..=12, max);
        for j in 0..100 {
            // Half uniform, half geometric towards 1.
            let t: f64 = if j % 2 == 0 {
                rng.random_range(1e-3..1.0 - 1e-3)
            } else {
                1.0 - 10f64.powf(-rng.random_range(0.5..7.0))
            };
            let sos = eval_density(&s, t, DensityForm::SumOfSquaresForm).unwrap();
            if sos < 1e-200 {
                continue;
            }
            for form in [DensityForm::NormForm, DensityForm::LogDerivForm] {
                let v = eval_density(&s, t, form).unwrap();
                worst = worst.max((v - sos).abs() / sos);
            }
        }
    }
    outcome(worst <= 1e-9, format!("max relative gap = {worst:.2e}"))
}

fn monte_carlo() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for s in [&[0u64, 1][..], &[0, 7], &[0, 1, 2, 3], &[0, 2, 9, 27], &[0, 1, 5, 17, 91]] {
        let set = SupportSet::new(s.to_vec()).unwrap();
        let q = z(&set);
        let r = estimate_expected_zeros(&set, &TrialConfig::new(2024, 10_000, OpenInterval::UNIT)).unwrap();
        let dev = (r.mean - q).abs();
        pass &= dev <= 3.0 * r.ci95_halfwidth;
        lines.push(format!("{{{set}}}: {:.3}σ", dev / r.ci95_halfwidth));
    }
    outcome(pass, format!("|mean - z| / CI95: {}", lines.join(", ")))
}

fn tail() -> Outcome {
    let eps = [0.5, 0.2, 0.1, 0.05];
    let mut worst = f64::NEG_INFINITY;
    let dense: Vec<SupportSet> = [10u64, 100, 1000].iter().map(|&n| SupportSet::dense(n)).collect();
    for s in battery().iter().chain(&dense) {
        for &e in &eps {
            worst = worst.max(tail_mass(s, e, TOL).unwrap().value - tail_bound(e).unwrap());
        }
    }
    let mut spread: f64 = 0.0;
    let mut per_eps = Vec::new();
    for &e in &eps {
        let v: Vec<f64> = dense.iter().map(|s| tail_mass(s, e, TOL).unwrap().value).collect();
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        spread = spread.max(hi - lo);
        per_eps.push(format!("ε={e}: n=10,100,1000 → {:.4},{:.4},{:.4}", v[0], v[1], v[2]));
    }
    outcome(
        worst <= 1e-6 && spread <= 0.05,
        format!(
            "max tail - bound = {worst:.3e}, dense n-spread = {spread:.2e} ({})",
            per_eps.join("; ")
        ),
    )
}

fn union_and_sum() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let max = 1u64 << 12;
    let (mut worst_fine, mut worst_order) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut pairs = 0;
    while pairs < 50 {
        let s1 = random_set(&mut rng, 1..=6, max);
        let s2 = random_set(&mut rng, 1..=6, max);
        let Ok(union) = s1.disjoint_union(&s2) else { continue };
        pairs += 1;
        let r = union_bound(&s1, &s2, z(&s1), z(&s2)).unwrap();
        worst_fine = worst_fine.max(z(&union) - r.fine.value);
        worst_order = worst_order.max(r.fine.value - r.coarse.value);
    }
    let mut worst_sum = f64::NEG_INFINITY;
    let mut sums = 0;
    while sums < 50 {
        let s1 = random_normalized(&mut rng, 2..=5, max);
        let s2 = random_normalized(&mut rng, 2..=5, max);
        let (sum, collision_free) = s1.sum_sets(&s2).unwrap();
        if !collision_free {
            continue;
        }
        sums += 1;
        worst_sum = worst_sum.max(z(&sum) - z(&s1) - z(&s2));
    }
    let mut dominated_ok = true;
    for _ in 0..50 {
        let s1 = random_set(&mut rng, 1..=8, max);
        let a = s1.max() + rng.random_range(1..=max);
        dominated_ok &= critical_points_odd(&s1, &SupportSet::singleton(a)).unwrap().is_empty();
    }
    outcome(
        worst_fine <= 1e-6 && worst_order <= 1e-6 && worst_sum <= 2e-6 && dominated_ok,
        format!(
            "max z - fine = {worst_fine:.3e}, max fine - coarse = {worst_order:.3e}, \
             max z_sum - z1 - z2 = {worst_sum:.3e}, dominating singleton m=0: {dominated_ok}"
        ),
    )
}

fn dense_recursion() -> Outcome {
    let closed = (2..=1024u64).all(|n| dense_bound_recursive(n).unwrap() <= 0.75 * (n as f64).log2());
    let mut worst = f64::NEG_INFINITY;
    for n in [4u64, 16, 64, 256] {
        worst = worst.max(z(&SupportSet::dense(n)) - dense_bound_recursive(n).unwrap());
    }
    outcome(
        closed && worst <= 1e-6,
        format!("recursion ≤ (3/4)log2 n: {closed}, max z - recursion = {worst:.3e}"),
    )
}

fn lower_bound_family() -> Outcome {
    let table = verify_growth(5, TOL).unwrap();
    let mut gains = Vec::new();
    let (mut gain_ok, mut leak_ok, mut g_ok) = (true, true, true);
    let mut worst_arctan: f64 = 0.0;
    for k in 1..=5 {
        let r = step_report(k).unwrap();
        gain_ok &= r.step_gain > 0.0;
        gains.push(format!("{:+.4}", r.step_gain));
        leak_ok &= r.tail_leak <= r.tail_leak_cap * (1.0 + 4.0 * f64::EPSILON);
        g_ok &= r.g_at_boundary >= r.g_lower_bound;
        let q = cross_term_quadrature(
            &r.base,
            &SupportSet::singleton(r.a),
            1.0 - 1.0 / (2.0 * r.a as f64),
            1.0,
            1e-9,
        )
        .unwrap();
        worst_arctan = worst_arctan.max((q.value / (2.0 * PI) - r.boundary_mass).abs());
    }
    let arctan_ok = worst_arctan <= 1e-6;
    outcome(
        table.strictly_increasing && gain_ok && leak_ok && g_ok && arctan_ok,
        format!(
            "z increasing: {}, step_gain > 0: {gain_ok} [{}], tail_leak ≤ cap: {leak_ok}, \
             g ≥ |S|-1: {g_ok}, arctan vs quadrature {worst_arctan:.1e}",
            table.strictly_increasing,
            gains.join(", ")
        ),
    )
}

fn increment() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..50 {
        let max = if i % 2 == 0 { 1000 } else { 30 };
        let s = random_normalized(&mut rng, 1..=10, max);
        let a = s.max() + rng.random_range(1..=5 * max);
        let mut with_a = s.exponents().to_vec();
        with_a.push(a);
        let grown = SupportSet::new(with_a).unwrap();
        worst = worst.max(z(&grown) - z(&s) - increment_bound(s.len() as u64).unwrap());
    }
    outcome(worst <= 2e-6, format!("max z(S∪{{a}}) - z(S) - bound = {worst:.3e}"))
}

fn main() {
    type Criterion = (u32, &'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        (1, "pair law", Duration::from_secs(1), pair_law),
        (2, "Kac dense asymptotic", Duration::from_secs(30), kac_dense),
        (3, "sqrt bound", Duration::from_secs(120), sqrt_bounds),
        (4, "density form equivalence", Duration::from_secs(30), form_equivalence),
        (5, "Monte Carlo cross-check", Duration::from_secs(300), monte_carlo),
        (6, "tail bound", Duration::from_secs(120), tail),
        (7, "union/sum calculus", Duration::from_secs(300), union_and_sum),
        (8, "dense recursion", Duration::from_secs(60), dense_recursion),
        (9, "lower-bound family", Duration::from_secs(120), lower_bound_family),
        (10, "increment bound", Duration::from_secs(120), increment),
    ];
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let pass = o.pass && elapsed <= budget;
        failed += usize::from(!pass);
        println!(
            "criterion {id:>2} {}: {name} ({:.2}s, budget {}s) {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
