//! Sparse integer polynomials on `[0, 1]`: certified signs and isolation of
//! the points where the polynomial changes sign.
//!
//! Isolation follows Rolle's theorem on the term count rather than the
//! degree. After dividing out the lowest power, `Q = P / x^d0` has the sign
//! of `P` on `(0, 1]`, and `Q'` has one term fewer. Between consecutive sign
//! changes of `Q'` (found recursively) `Q` is strictly monotone, so it has
//! at most one root there, present exactly when the signs at the ends are
//! opposite. The sign of `Q` at each extremum is settled by shrinking the
//! derivative's isolating interval until `Q` provably keeps one sign on it.
//!
//! Signs come from a filter cascade: a double-precision log-domain sum with
//! a rigorous error bound, then the same sum in extended precision, then
//! exact integer evaluation for moderate degrees. A point where no stage can
//! decide (a true zero or a tangency) is reported as undecided, and the
//! caller falls back to exact dense Sturm sequences.

use std::f64::consts::LN_2;

use astro_float::{BigFloat, Consts, RoundingMode};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactpoly::{Dyadic, IntPoly, SturmChain};
use crate::extended::{from_bigint, to_f64};
use crate::logspace::{ln_t, log_sum_exp};

/// Largest degree handed to the dense exact fallback.
pub const DENSE_FALLBACK_MAX_DEGREE: u64 = 4096;

/// Largest `degree × mantissa bits` for exact evaluation of a single sign.
const EXACT_EVAL_MAX_BITS: u64 = 1 << 20;

const EXTENDED_PRECISIONS: [usize; 2] = [256, 1024];

#[derive(Debug, Clone, PartialEq)]
struct Term {
    exponent: u64,
    coef: BigInt,
    sign: i8,
    ln_abs: f64,
}

/// `Σ c_j x^{d_j}` with distinct exponents and nonzero integer coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePoly {
    terms: Vec<Term>,
}

/// An interval `(lo, hi)` containing exactly one point where the polynomial
/// changes sign, with certified nonzero signs of opposite parity at both
/// endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignChange {
    pub lo: f64,
    pub hi: f64,
    /// Sign at `lo`; the sign at `hi` is its negation.
    pub sign_lo: i8,
}

/// How the sign changes were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IsolationMethod {
    /// Certified sparse Rolle recursion.
    Sparse,
    /// Exact square-free part and Sturm sequence.
    DenseSturm,
}

struct Undecided;

fn ln_abs_big(c: &BigInt) -> f64 {
    let bits = c.bits();
    if bits <= 1000 {
        c.to_f64().expect("finite conversion").abs().ln()
    } else {
        let sh = bits - 64;
        (c.abs() >> sh).to_f64().expect("finite conversion").ln() + sh as f64 * LN_2
    }
}

fn sign_of(c: &BigInt) -> i8 {
    if c.is_positive() {
        1
    } else if c.is_negative() {
        -1
    } else {
        0
    }
}

/// A certified sign and a lower bound on `ln |value|` (`-inf` when the
/// value is exactly zero).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Certified {
    sign: i8,
    ln_lower: f64,
}

impl SparsePoly {
    /// Merges repeated exponents and drops zero coefficients.
    pub fn new(mut terms: Vec<(u64, BigInt)>) -> Self {
        terms.sort_by_key(|(e, _)| *e);
        let mut merged: Vec<(u64, BigInt)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            match merged.last_mut() {
                Some((le, lc)) if *le == e => *lc += c,
                _ => merged.push((e, c)),
            }
        }
        Self {
            terms: merged
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(exponent, coef)| Term {
                    exponent,
                    sign: sign_of(&coef),
                    ln_abs: ln_abs_big(&coef),
                    coef,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &BigInt)> {
        self.terms.iter().map(|t| (t.exponent, &t.coef))
    }

    pub fn min_exponent(&self) -> Option<u64> {
        self.terms.first().map(|t| t.exponent)
    }

    pub fn max_exponent(&self) -> Option<u64> {
        self.terms.last().map(|t| t.exponent)
    }

    /// `P / x^{min exponent}`; same sign as `P` on `(0, 1]`.
    pub fn shifted(&self) -> Self {
        let Some(d0) = self.min_exponent() else {
            return self.clone();
        };
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    exponent: t.exponent - d0,
                    ..t.clone()
                })
                .collect(),
        }
    }

    /// `Q' / x^{d_1 - 1}` for the shifted `Q`; same sign as `Q'` on `(0, 1]`.
    fn derivative_shifted(&self) -> Self {
        let q = self.shifted();
        Self::new(
            q.terms
                .iter()
                .filter(|t| t.exponent > 0)
                .map(|t| (t.exponent, &t.coef * BigInt::from(t.exponent)))
                .collect(),
        )
        .shifted()
    }

    pub fn to_dense(&self) -> IntPoly {
        IntPoly::from_terms(
            &self
                .terms
                .iter()
                .map(|t| (t.exponent, t.coef.clone()))
                .collect::<Vec<_>>(),
        )
    }

    /// Certified sign at `x ∈ [0, 1]`, or `None` when every filter stage is
    /// inconclusive.
    pub fn sign_at(&self, x: f64) -> Option<i8> {
        self.certified_sign(x).map(|c| c.sign)
    }

    fn certified_sign(&self, x: f64) -> Option<Certified> {
        if self.terms.is_empty() {
            return Some(Certified {
                sign: 0,
                ln_lower: f64::NEG_INFINITY,
            });
        }
        if x == 0.0 {
            let t = &self.terms[0];
            return Some(if t.exponent == 0 {
                Certified {
                    sign: t.sign,
                    ln_lower: t.ln_abs - 1e-9,
                }
            } else {
                Certified {
                    sign: 0,
                    ln_lower: f64::NEG_INFINITY,
                }
            });
        }
        if x == 1.0 {
            let s: BigInt = self.terms.iter().map(|t| &t.coef).sum();
            let sign = sign_of(&s);
            let ln_lower = if sign == 0 {
                f64::NEG_INFINITY
            } else {
                ln_abs_big(&s) - 1e-9
            };
            return Some(Certified { sign, ln_lower });
        }
        self.sign_double(x)
            .or_else(|| {
                EXTENDED_PRECISIONS
                    .iter()
                    .find_map(|&p| self.sign_extended(x, p))
            })
            .or_else(|| self.sign_exact(x))
    }

    /// Log-domain sum in `f64`. Each term `c x^d` is `exp(ln|c| + d ln x)`;
    /// the absolute error of that exponent is at most
    /// `4ε (1 + |ln|c|| + d |ln x|)`, which bounds the relative error of
    /// the term, and summation adds `n ε Σ|τ|`.
    fn sign_double(&self, x: f64) -> Option<Certified> {
        let eps = f64::EPSILON;
        let lx = ln_t(x);
        let logs: Vec<f64> = self
            .terms
            .iter()
            .map(|t| t.ln_abs + t.exponent as f64 * lx)
            .collect();
        let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        let mut bound = 0.0;
        let mut abs_sum = 0.0;
        for (t, &l) in self.terms.iter().zip(&logs) {
            let delta = 4.0 * eps * (1.0 + t.ln_abs.abs() + t.exponent as f64 * lx.abs())
                + eps * (l - m).abs()
                + eps;
            if delta > 1e-2 {
                return None;
            }
            let tau = (l - m).exp();
            sum += t.sign as f64 * tau;
            abs_sum += tau;
            bound += tau * 1.01 * delta;
        }
        // Underflowed terms are each below the smallest subnormal.
        bound += 1.01 * (self.terms.len() as f64 + 1.0) * eps * abs_sum
            + self.terms.len() as f64 * f64::from_bits(1);
        let margin = sum.abs() - 2.0 * bound;
        if margin > 0.0 {
            Some(Certified {
                sign: if sum > 0.0 { 1 } else { -1 },
                ln_lower: m + margin.ln() - 1e-9,
            })
        } else {
            None
        }
    }

    /// Direct sum `Σ c x^d` with `p`-bit arithmetic. Terms whose `f64` log
    /// estimate lies `p + 64` bits below the largest are dropped and bounded.
    fn sign_extended(&self, x: f64, p: usize) -> Option<Certified> {
        let rm = RoundingMode::ToEven;
        let lx = ln_t(x);
        let logs: Vec<f64> = self
            .terms
            .iter()
            .map(|t| t.ln_abs + t.exponent as f64 * lx)
            .collect();
        let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let cutoff = m - (p as f64 + 64.0) * LN_2;
        let xb = BigFloat::from_f64(x, p);
        let mut sum = BigFloat::from_word(0, p);
        let mut abs_sum = BigFloat::from_word(0, p);
        let mut dropped_rel = 0.0;
        let max_exp = self.max_exponent().unwrap_or(0).max(2);
        for (t, &l) in self.terms.iter().zip(&logs) {
            if l < cutoff {
                dropped_rel += (l - m + 1.0).exp();
                continue;
            }
            let pow = xb.powi(t.exponent as usize, p, rm);
            let term = from_bigint(&t.coef, p).mul(&pow, p, rm);
            abs_sum = abs_sum.add(&term.abs(), p, rm);
            sum = sum.add(&term, p, rm);
        }
        // Relative error per term ≤ (4 log2 d + 8) 2^-p, summation n 2^-p;
        // the largest retained term is within e of exp(m), so dropped terms
        // are bounded relative to the absolute sum.
        let kappa = 4.0 * (max_exp as f64).log2() + 8.0 + self.terms.len() as f64;
        let rel = 2.0 * (kappa * 2f64.powi(-(p as i32)) + 3.0 * dropped_rel);
        let bound = abs_sum.mul(&BigFloat::from_f64(rel, p), p, rm);
        let margin = sum.abs().sub(&bound, p, rm);
        if margin.is_positive() && !margin.is_zero() {
            let mut cc = Consts::new().ok()?;
            let ln_lower = to_f64(&margin.ln(64, rm, &mut cc)) - 1e-9;
            Some(Certified {
                sign: if sum.is_positive() { 1 } else { -1 },
                ln_lower,
            })
        } else {
            None
        }
    }

    /// Exact integer evaluation, for moderate degrees only.
    fn sign_exact(&self, x: f64) -> Option<Certified> {
        let d = Dyadic::from_f64(x).ok()?;
        let deg = self.max_exponent()?;
        if deg.saturating_mul(d.mantissa().bits().max(1)) > EXACT_EVAL_MAX_BITS {
            return None;
        }
        let sign = self.to_dense().sign_at(&d);
        // Only the sign is exact here; use the double estimate for size,
        // shrunk generously.
        let lx = ln_t(x);
        let est = log_sum_exp(self.terms.iter().map(|t| t.ln_abs + t.exponent as f64 * lx));
        Some(Certified {
            sign,
            ln_lower: if sign == 0 { f64::NEG_INFINITY } else { est - 700.0 },
        })
    }

    /// `ln` of an upper bound for `|Q'|` on `[0, r]`, where `Q` is the
    /// shifted polynomial: `Σ |c_j d_j| r^{d_j - 1}`.
    fn ln_derivative_bound(&self, r: f64) -> f64 {
        let lr = ln_t(r);
        let v = log_sum_exp(
            self.terms
                .iter()
                .filter(|t| t.exponent > 0)
                .map(|t| t.ln_abs + (t.exponent as f64).ln() + (t.exponent - 1) as f64 * lr),
        );
        v + 1e-6 * (1.0 + v.abs())
    }

    /// Points in `(0, 1)` where the polynomial changes sign, each in its own
    /// isolating interval. Falls back to exact dense Sturm sequences when
    /// a sign cannot be certified and the degree allows it.
    pub fn sign_changes(&self) -> Result<(Vec<SignChange>, IsolationMethod)> {
        if self.terms.is_empty() {
            return Err(Error::domain("zero polynomial"));
        }
        let q = self.shifted();
        match isolate(&q) {
            Ok(v) => Ok((v, IsolationMethod::Sparse)),
            Err(Undecided) => {
                let deg = q.max_exponent().unwrap_or(0);
                if deg > DENSE_FALLBACK_MAX_DEGREE {
                    return Err(Error::unsupported(format!(
                        "sign of a degree-{deg} sparse polynomial is undecidable in floating \
                         point (tangency) and the degree exceeds the exact fallback limit \
                         {DENSE_FALLBACK_MAX_DEGREE}"
                    )));
                }
                Ok((dense_sign_changes(&q)?, IsolationMethod::DenseSturm))
            }
        }
    }

    /// Distinct roots in the open interval `(lo, hi) ⊆ (0, 1)`, exactly.
    pub fn count_roots(&self, lo: f64, hi: f64) -> Result<usize> {
        if self.terms.is_empty() {
            return Err(Error::domain("zero polynomial"));
        }
        let q = self.shifted();
        if let Ok(changes) = isolate(&q) {
            if let Some(n) = count_in(&q, &changes, lo, hi) {
                return Ok(n);
            }
        }
        let deg = q.max_exponent().unwrap_or(0);
        if deg > DENSE_FALLBACK_MAX_DEGREE {
            return Err(Error::unsupported(format!(
                "degree {deg} exceeds the exact fallback limit {DENSE_FALLBACK_MAX_DEGREE}"
            )));
        }
        Ok(SturmChain::new(&q.to_dense())?.count_roots(lo, hi))
    }
}

/// Counts sign changes strictly inside `(lo, hi)`, splitting isolating
/// intervals at the bounds. `None` if a sign at a bound is undecidable.
fn count_in(q: &SparsePoly, changes: &[SignChange], lo: f64, hi: f64) -> Option<usize> {
    let mut n = 0;
    for c in changes {
        let mut c = *c;
        for b in [lo, hi] {
            if c.lo < b && b < c.hi {
                let s = q.sign_at(b)?;
                if s == 0 {
                    // Root exactly on a bound: excluded.
                    c.hi = c.lo;
                } else if s == c.sign_lo {
                    c.lo = b;
                } else {
                    c.hi = b;
                }
            }
        }
        if c.lo < c.hi && c.lo >= lo && c.hi <= hi {
            n += 1;
        }
    }
    Some(n)
}

/// A point near the middle of `(a, b)` with a certified nonzero sign.
fn probe(q: &SparsePoly, a: f64, b: f64) -> Option<(f64, i8)> {
    (0..12).find_map(|k| {
        let off = if k % 2 == 0 { k / 2 } else { -(k + 1) / 2 };
        let m = a + (b - a) * (0.5 + off as f64 / 32.0);
        if !(m > a && m < b) {
            return None;
        }
        match q.sign_at(m) {
            Some(s) if s != 0 => Some((m, s)),
            _ => None,
        }
    })
}

/// One bisection step on an isolating interval of `q`.
fn bisect(q: &SparsePoly, c: &mut SignChange) -> std::result::Result<(), Undecided> {
    let (m, s) = probe(q, c.lo, c.hi).ok_or(Undecided)?;
    if s == c.sign_lo {
        c.lo = m;
    } else {
        c.hi = m;
    }
    Ok(())
}

/// Sign changes of the shifted polynomial `q` in `(0, 1)`.
fn isolate(q: &SparsePoly) -> std::result::Result<Vec<SignChange>, Undecided> {
    if q.terms.len() <= 1 {
        return Ok(Vec::new());
    }
    let d = q.derivative_shifted();
    let crit = isolate(&d)?;
    let mut anchors: Vec<(f64, i8)> = Vec::with_capacity(2 * crit.len() + 2);
    anchors.push((0.0, q.terms[0].sign));
    for c in crit {
        let (l, r, s) = resolve_extremum(q, &d, c)?;
        anchors.push((l, s));
        anchors.push((r, s));
    }
    anchors.push((1.0, q.sign_at(1.0).ok_or(Undecided)?));
    Ok(anchors
        .chunks(2)
        .filter(|w| w[0].1 * w[1].1 < 0)
        .map(|w| SignChange {
            lo: w[0].0,
            hi: w[1].0,
            sign_lo: w[0].1,
        })
        .collect())
}

/// Shrinks the isolating interval `c` of a sign change of `q'` (represented
/// by `d`) until `q` has one certified nonzero sign on all of it.
fn resolve_extremum(
    q: &SparsePoly,
    d: &SparsePoly,
    mut c: SignChange,
) -> std::result::Result<(f64, f64, i8), Undecided> {
    // q' > 0 before the point: a maximum.
    let is_max = c.sign_lo > 0;
    for _ in 0..2000 {
        if let (Some(l), Some(r)) = (q.certified_sign(c.lo), q.certified_sign(c.hi)) {
            if l.sign != 0 && l.sign == r.sign {
                let s = l.sign;
                // A maximum with positive flanks (or minimum with negative
                // ones) has the same sign; otherwise bound the excursion
                // by width × sup |q'|.
                if (is_max && s > 0) || (!is_max && s < 0) {
                    return Ok((c.lo, c.hi, s));
                }
                let excursion = (c.hi - c.lo).ln() + q.ln_derivative_bound(c.hi);
                if excursion < l.ln_lower.min(r.ln_lower) {
                    return Ok((c.lo, c.hi, s));
                }
            }
        }
        bisect(d, &mut c)?;
    }
    Err(Undecided)
}

/// Exact fallback: roots of the square-free part, kept where `q` changes
/// sign across the isolating interval.
fn dense_sign_changes(q: &SparsePoly) -> Result<Vec<SignChange>> {
    let p = q.to_dense();
    let sf = p.square_free_part();
    let chain = SturmChain::new(&sf)?;
    let hi = if sf.sign_at_one() == 0 { 1f64.next_down() } else { 1.0 };
    let mut out = Vec::new();
    for (a, b) in chain.isolate(0.0, hi)? {
        let sa = if a == 1.0 { p.sign_at_one() } else { p.sign_at_f64(a) };
        let sb = if b == 1.0 { p.sign_at_one() } else { p.sign_at_f64(b) };
        if sa * sb < 0 {
            out.push(SignChange {
                lo: a,
                hi: b,
                sign_lo: sa,
            });
        }
    }
    Ok(out)
}

/// Narrows a sign change to width at most `width`, strictly inside `(0, 1)`.
pub fn refine(p: &SparsePoly, c: SignChange, width: f64) -> Result<SignChange> {
    let q = p.shifted();
    let mut c = c;
    while c.hi - c.lo > width || c.lo <= 0.0 || c.hi >= 1.0 {
        let before = (c.lo, c.hi);
        if bisect(&q, &mut c).is_err() {
            // Exact midpoint signs for moderate degree, else stop here.
            let m = 0.5 * (c.lo + c.hi);
            let s = q.sign_exact(m).map(|x| x.sign).unwrap_or(0);
            if s == 0 || !(m > c.lo && m < c.hi) {
                return Err(Error::unsupported(
                    "cannot refine isolating interval at f64 resolution",
                ));
            }
            if s == c.sign_lo {
                c.lo = m;
            } else {
                c.hi = m;
            }
        }
        if (c.lo, c.hi) == before {
            break;
        }
    }
    Ok(c)
}
