//! Dense integer polynomials with exact sign evaluation at dyadic points
//! (every finite `f64` is one), Sturm sequences and square-free parts.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Integer polynomial, coefficients from the constant term upwards with no
/// trailing zeros. The zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

/// `m · 2^e`, the exact value of a finite `f64`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

impl Dyadic {
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::domain(format!("{x} is not finite")));
        }
        if x == 0.0 {
            return Ok(Self {
                mantissa: BigInt::zero(),
                exponent: 0,
            });
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let tz = m.trailing_zeros();
        Ok(Self {
            mantissa: BigInt::from(sign) * BigInt::from(m >> tz),
            exponent: e + tz as i64,
        })
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }
}

fn sign_of(x: &BigInt) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// Builds `Σ c x^e` from `(e, c)` pairs; repeated exponents add up.
    pub fn from_terms(terms: &[(u64, BigInt)]) -> Self {
        let deg = terms.iter().map(|(e, _)| *e).max().unwrap_or(0) as usize;
        let mut coeffs = vec![BigInt::zero(); if terms.is_empty() { 0 } else { deg + 1 }];
        for (e, c) in terms {
            coeffs[*e as usize] += c;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn lc(&self) -> &BigInt {
        self.coeffs.last().expect("leading coefficient of zero polynomial")
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    fn scale_div(&self, d: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|c| c / d).collect())
    }

    /// Positive gcd of the coefficients (zero for the zero polynomial).
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Divides out the content, keeping the sign of every value.
    pub fn primitive_part(&self) -> Self {
        let c = self.content();
        if c.is_zero() || c.is_one() {
            self.clone()
        } else {
            self.scale_div(&c)
        }
    }

    /// Pseudo-remainder: `lc(g)^(deg f - deg g + 1) · f mod g`.
    fn prem(&self, g: &Self) -> Self {
        let dg = g.degree().expect("pseudo-division by zero polynomial");
        let mut r = self.coeffs.clone();
        let Some(df) = self.degree() else {
            return self.clone();
        };
        if df < dg {
            return self.clone();
        }
        let lcg = g.lc();
        let mut steps = df - dg + 1;
        let mut top = df;
        loop {
            // r ← lc(g)·r − r_top·x^(top−dg)·g
            let lead = std::mem::take(&mut r[top]);
            for c in r.iter_mut().take(top) {
                *c *= lcg;
            }
            if !lead.is_zero() {
                for (j, gj) in g.coeffs.iter().enumerate().take(dg) {
                    r[top - dg + j] -= &lead * gj;
                }
            }
            steps -= 1;
            if top == dg {
                break;
            }
            top -= 1;
        }
        // Remaining multiplications keep the lc(g)^(δ+1) normalisation.
        let mut out = Self::new(r);
        if steps > 0 {
            let f = lcg.pow(steps as u32);
            out.coeffs.iter_mut().for_each(|c| *c *= &f);
        }
        out
    }

    /// Exact sign of the polynomial at `x`.
    pub fn sign_at(&self, x: &Dyadic) -> i8 {
        let Some(d) = self.degree() else {
            return 0;
        };
        if x.mantissa.is_zero() {
            return sign_of(&self.coeffs[0]);
        }
        if x.exponent >= 0 {
            let xv = &x.mantissa << (x.exponent as usize);
            let mut acc = BigInt::zero();
            for c in self.coeffs.iter().rev() {
                acc = acc * &xv + c;
            }
            return sign_of(&acc);
        }
        // q^d · p(m/q) = Σ c_i m^i q^(d−i) with q = 2^s
        let s = (-x.exponent) as usize;
        let mut acc = self.coeffs[d].clone();
        for i in (0..d).rev() {
            acc = acc * &x.mantissa + (&self.coeffs[i] << (s * (d - i)));
        }
        sign_of(&acc)
    }

    pub fn sign_at_f64(&self, x: f64) -> i8 {
        self.sign_at(&Dyadic::from_f64(x).expect("finite evaluation point"))
    }

    /// Sign of `p(1)`, i.e. of the coefficient sum.
    pub fn sign_at_one(&self) -> i8 {
        sign_of(&self.coeffs.iter().sum::<BigInt>())
    }

    /// Sturm sequence `p, p', -rem(p, p'), …`, computed as a subresultant
    /// remainder sequence whose members are rescaled by positive factors
    /// only, so that sign variations are preserved.
    pub fn sturm_sequence(&self) -> Vec<IntPoly> {
        let mut chain = vec![self.clone()];
        let d1 = self.derivative();
        if self.is_zero() || d1.is_zero() {
            return chain;
        }
        chain.push(d1);
        // |c| of the subresultant recurrence, tracked in magnitude only.
        let mut c_abs: Option<BigInt> = None;
        loop {
            let f = &chain[chain.len() - 2];
            let g = &chain[chain.len() - 1];
            let (Some(n), Some(m)) = (f.degree(), g.degree()) else {
                break;
            };
            if m == 0 {
                break;
            }
            let delta = n - m;
            let lcg = g.lc().clone();
            let mut h = f.prem(g);
            if h.is_zero() {
                break;
            }
            // prem = lc(g)^(δ+1)·rem; the Sturm member is −rem up to a
            // positive factor.
            let mult_negative = lcg.is_negative() && (delta + 1) % 2 == 1;
            if !mult_negative {
                h.coeffs.iter_mut().for_each(|x| *x = -std::mem::take(x));
            }
            let b_abs = match &c_abs {
                None => BigInt::one(),
                Some(c) => f.lc().abs() * c.pow(delta as u32),
            };
            if !b_abs.is_one() {
                h = h.scale_div(&b_abs);
            }
            // Update |c| after using it: c ← (−lc g)^δ / c^(δ−1).
            c_abs = Some(match &c_abs {
                None => lcg.abs().pow(delta as u32),
                Some(c) => {
                    if delta > 1 {
                        lcg.abs().pow(delta as u32) / c.pow(delta as u32 - 1)
                    } else if delta == 1 {
                        lcg.abs()
                    } else {
                        c.clone()
                    }
                }
            });
            chain.push(h);
        }
        chain
    }

    /// Square-free part (primitive, same sign as `p` up to a positive factor
    /// on the interval where `gcd(p, p')` does not vanish).
    pub fn square_free_part(&self) -> Self {
        let d = self.derivative();
        if self.is_zero() || d.is_zero() {
            return self.primitive_part();
        }
        let chain = self.sturm_sequence();
        let g = chain.last().expect("nonempty chain").primitive_part();
        if g.degree() == Some(0) {
            return self.primitive_part();
        }
        self.exact_quotient(&g).primitive_part()
    }

    /// Quotient of an exact division over the rationals, scaled to integers.
    fn exact_quotient(&self, g: &Self) -> Self {
        let n = self.degree().expect("nonzero dividend");
        let m = g.degree().expect("nonzero divisor");
        let lcg = g.lc().clone();
        let k = (n - m + 1) as u32;
        // lc(g)^k · f = q · g exactly; long division over the integers.
        let scale = lcg.pow(k);
        let mut r: Vec<BigInt> = self.coeffs.iter().map(|c| c * &scale).collect();
        let mut q = vec![BigInt::zero(); n - m + 1];
        for i in (0..=n - m).rev() {
            let t = &r[i + m] / &lcg;
            for (j, gj) in g.coeffs.iter().enumerate() {
                r[i + j] -= &t * gj;
            }
            q[i] = t;
        }
        Self::new(q)
    }
}

/// Number of sign changes of a sequence of signs, zeros skipped.
fn variations(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

/// A Sturm sequence ready for sign-variation counts.
pub struct SturmChain {
    chain: Vec<IntPoly>,
}

impl SturmChain {
    pub fn new(p: &IntPoly) -> Result<Self> {
        if p.is_zero() {
            return Err(Error::domain("zero polynomial has no Sturm sequence"));
        }
        Ok(Self {
            chain: p.sturm_sequence(),
        })
    }

    pub fn polynomial(&self) -> &IntPoly {
        &self.chain[0]
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    pub fn variations_at(&self, x: f64) -> usize {
        if x == 1.0 {
            return variations(self.chain.iter().map(|p| p.sign_at_one()));
        }
        let d = Dyadic::from_f64(x).expect("finite point");
        variations(self.chain.iter().map(|p| p.sign_at(&d)))
    }

    /// Distinct real roots in the open interval `(lo, hi)`. An endpoint that
    /// is itself a root is moved inward by one ulp first, so it is not
    /// counted.
    pub fn count_roots(&self, lo: f64, hi: f64) -> usize {
        let p = self.polynomial();
        let lo = if p.sign_at_f64(lo) == 0 { lo.next_up() } else { lo };
        let hi = if p.sign_at_f64(hi) == 0 { hi.next_down() } else { hi };
        if lo >= hi {
            return 0;
        }
        self.variations_at(lo).saturating_sub(self.variations_at(hi))
    }

    /// Isolating intervals `(a, b)` with exactly one root each, endpoints
    /// not roots, for the roots strictly inside `(lo, hi)` where neither
    /// `lo` nor `hi` is a root.
    pub fn isolate(&self, lo: f64, hi: f64) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        let mut stack = vec![(lo, hi, self.variations_at(lo), self.variations_at(hi))];
        while let Some((a, b, va, vb)) = stack.pop() {
            let n = va.saturating_sub(vb);
            if n == 0 {
                continue;
            }
            if n == 1 {
                out.push((a, b));
                continue;
            }
            let m = self.split_point(a, b).ok_or_else(|| {
                Error::unsupported("roots closer than f64 resolution cannot be separated")
            })?;
            let vm = self.variations_at(m);
            stack.push((m, b, vm, vb));
            stack.push((a, m, va, vm));
        }
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(out)
    }

    /// A point strictly inside `(a, b)` that is not a root, near the middle.
    fn split_point(&self, a: f64, b: f64) -> Option<f64> {
        let p = self.polynomial();
        (0..16)
            .map(|k| {
                let off = if k % 2 == 0 { k / 2 } else { -(k + 1) / 2 };
                a + (b - a) * (0.5 + off as f64 / 64.0)
            })
            .find(|&m| m > a && m < b && p.sign_at_f64(m) != 0)
    }

    /// Narrows an isolating interval to width at most `width`.
    pub fn refine(&self, mut a: f64, mut b: f64, width: f64) -> (f64, f64) {
        let p = self.polynomial();
        let sa = p.sign_at_f64(a);
        while b - a > width {
            let Some(m) = self.split_point(a, b) else { break };
            if p.sign_at_f64(m) == sa {
                a = m;
            } else {
                b = m;
            }
        }
        (a, b)
    }
}
