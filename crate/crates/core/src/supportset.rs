//! Exponent sets of sparse polynomials.
//!
//! A [`SupportSet`] is the set of exponents `{e_1 < ... < e_k}` of a
//! polynomial `a_1 x^{e_1} + ... + a_k x^{e_k}`. Every constructor sorts
//! and deduplicates, so two sets with the same elements compare equal and
//! serialize identically.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `k` accepted by [`SupportSet::lower_bound_family`]; its top
/// element is `2^(2^5) = 2^32`.
pub const LOWER_BOUND_FAMILY_MAX_K: u32 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct SupportSet {
    exponents: Vec<u64>,
}

impl SupportSet {
    /// Builds a set from arbitrary exponents, sorting and deduplicating.
    pub fn new(mut exponents: Vec<u64>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::domain("support set must be nonempty"));
        }
        exponents.sort_unstable();
        exponents.dedup();
        Ok(Self { exponents })
    }

    /// The dense set `{0, 1, ..., n}`.
    pub fn dense(n: u64) -> Self {
        Self {
            exponents: (0..=n).collect(),
        }
    }

    pub fn singleton(e: u64) -> Self {
        Self { exponents: vec![e] }
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    /// Number of monomials `k = |S|`.
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> u64 {
        self.exponents[0]
    }

    pub fn max(&self) -> u64 {
        *self.exponents.last().expect("nonempty")
    }

    pub fn contains(&self, e: u64) -> bool {
        self.exponents.binary_search(&e).is_ok()
    }

    pub fn is_normalized(&self) -> bool {
        self.min() == 0
    }

    /// Shifts the set so that its minimum is 0. Dividing a polynomial by
    /// `x^min` does not move any of its nonzero roots.
    pub fn normalize(&self) -> Self {
        let m = self.min();
        Self {
            exponents: self.exponents.iter().map(|e| e - m).collect(),
        }
    }

    /// Minkowski sum `{a + b}`; the flag reports whether all `|S1|·|S2|`
    /// sums are distinct (collision-free).
    pub fn sum_sets(&self, other: &Self) -> Result<(Self, bool)> {
        let mut sums = Vec::with_capacity(self.len() * other.len());
        for &a in &self.exponents {
            for &b in &other.exponents {
                let s = a.checked_add(b).ok_or_else(|| {
                    Error::domain(format!("exponent sum {a} + {b} overflows 64 bits"))
                })?;
                sums.push(s);
            }
        }
        let expected = sums.len();
        let set = Self::new(sums)?;
        let collision_free = set.len() == expected;
        Ok((set, collision_free))
    }

    /// Merge of two disjoint sets.
    pub fn disjoint_union(&self, other: &Self) -> Result<Self> {
        if let Some(e) = self.first_common(other) {
            return Err(Error::domain(format!(
                "sets are not disjoint: collision at {e}"
            )));
        }
        let mut merged = Vec::with_capacity(self.len() + other.len());
        merged.extend_from_slice(&self.exponents);
        merged.extend_from_slice(&other.exponents);
        merged.sort_unstable();
        Ok(Self { exponents: merged })
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.first_common(other).is_none()
    }

    fn first_common(&self, other: &Self) -> Option<u64> {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.exponents, &other.exponents);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return Some(a[i]),
            }
        }
        None
    }

    /// `{n - e}`: the support of `x^n f(1/x)`, which maps roots in `(1, ∞)`
    /// to roots in `(0, 1)`.
    pub fn reflect(&self, n: u64) -> Result<Self> {
        if n < self.max() {
            return Err(Error::domain(format!(
                "reflection degree {n} is below max exponent {}",
                self.max()
            )));
        }
        let mut exps: Vec<u64> = self.exponents.iter().map(|e| n - e).collect();
        exps.reverse();
        Ok(Self { exponents: exps })
    }

    /// `{0, 1} ∪ {2^(2^i) : 1 ≤ i ≤ k}`, which has `k + 2` elements.
    pub fn lower_bound_family(k: u32) -> Result<Self> {
        if !(1..=LOWER_BOUND_FAMILY_MAX_K).contains(&k) {
            return Err(Error::domain(format!(
                "lower-bound family index k={k} outside 1..={LOWER_BOUND_FAMILY_MAX_K}"
            )));
        }
        let mut exps = vec![0, 1];
        exps.extend((1..=k).map(|i| 1u64 << (1u64 << i)));
        Ok(Self { exponents: exps })
    }

    /// The set with its largest element removed, or `None` for a singleton.
    pub fn without_max(&self) -> Option<Self> {
        (self.len() > 1).then(|| Self {
            exponents: self.exponents[..self.len() - 1].to_vec(),
        })
    }
}

impl TryFrom<Vec<u64>> for SupportSet {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SupportSet> for Vec<u64> {
    fn from(s: SupportSet) -> Self {
        s.exponents
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.exponents.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Parses `"0,1,4,16"` or the dense shorthand `"0..n"`.
impl FromStr for SupportSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((lo, hi)) = s.split_once("..") {
            let lo: u64 = parse_exponent(lo)?;
            let hi: u64 = parse_exponent(hi)?;
            if lo > hi {
                return Err(Error::Parse(format!("empty range {s:?}")));
            }
            return Self::new((lo..=hi).collect());
        }
        let exps = s
            .split(',')
            .map(parse_exponent)
            .collect::<Result<Vec<_>>>()?;
        Self::new(exps)
    }
}

fn parse_exponent(tok: &str) -> Result<u64> {
    let tok = tok.trim();
    tok.parse()
        .map_err(|_| Error::Parse(format!("invalid exponent {tok:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[u64]) -> SupportSet {
        SupportSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(set(&[3, 5, 9]).normalize(), set(&[0, 2, 6]));
        assert_eq!(set(&[0, 1]).normalize(), set(&[0, 1]));
        assert_eq!(set(&[7]).normalize(), set(&[0]));
    }

    #[test]
    fn constructor_sorts_and_dedups() {
        assert_eq!(set(&[9, 3, 3, 5]).exponents(), &[3, 5, 9]);
        assert!(SupportSet::new(vec![]).is_err());
    }

    #[test]
    fn sum_examples() {
        assert_eq!(
            set(&[0, 1, 2]).sum_sets(&set(&[0, 3])).unwrap(),
            (set(&[0, 1, 2, 3, 4, 5]), true)
        );
        assert_eq!(
            set(&[0, 1]).sum_sets(&set(&[0, 1])).unwrap(),
            (set(&[0, 1, 2]), false)
        );
        assert_eq!(
            set(&[0]).sum_sets(&set(&[0, 4, 9])).unwrap(),
            (set(&[0, 4, 9]), true)
        );
    }

    #[test]
    fn sum_overflow_is_domain_error() {
        let err = set(&[u64::MAX]).sum_sets(&set(&[1])).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn union_examples() {
        assert_eq!(set(&[0, 2]).disjoint_union(&set(&[5])).unwrap(), set(&[0, 2, 5]));
        assert_eq!(set(&[0]).disjoint_union(&set(&[1])).unwrap(), set(&[0, 1]));
        let err = set(&[0, 1]).disjoint_union(&set(&[1, 3])).unwrap_err();
        assert_eq!(err, Error::Domain("sets are not disjoint: collision at 1".into()));
    }

    #[test]
    fn reflect_examples() {
        assert_eq!(set(&[0, 2, 6]).reflect(6).unwrap(), set(&[0, 4, 6]));
        assert_eq!(set(&[0]).reflect(0).unwrap(), set(&[0]));
        assert_eq!(SupportSet::dense(5).reflect(5).unwrap(), SupportSet::dense(5));
        assert!(set(&[0, 9]).reflect(8).is_err());
    }

    #[test]
    fn lower_bound_family_examples() {
        assert_eq!(SupportSet::lower_bound_family(1).unwrap(), set(&[0, 1, 4]));
        assert_eq!(SupportSet::lower_bound_family(2).unwrap(), set(&[0, 1, 4, 16]));
        assert_eq!(
            SupportSet::lower_bound_family(3).unwrap(),
            set(&[0, 1, 4, 16, 256])
        );
        assert_eq!(SupportSet::lower_bound_family(5).unwrap().max(), 1 << 32);
        assert!(SupportSet::lower_bound_family(0).is_err());
        assert!(SupportSet::lower_bound_family(6).is_err());
    }

    #[test]
    fn text_forms() {
        assert_eq!("0,1,4,16".parse::<SupportSet>().unwrap(), set(&[0, 1, 4, 16]));
        assert_eq!("0..3".parse::<SupportSet>().unwrap(), set(&[0, 1, 2, 3]));
        assert_eq!(" 5 , 2 ".parse::<SupportSet>().unwrap(), set(&[2, 5]));
        assert!("0,-1".parse::<SupportSet>().is_err());
        assert!("3..1".parse::<SupportSet>().is_err());
        assert!("".parse::<SupportSet>().is_err());
        assert_eq!(set(&[0, 1, 4, 16]).to_string(), "0,1,4,16");
    }

    #[test]
    fn serde_rejects_empty() {
        assert!(serde_json::from_str::<SupportSet>("[]").is_err());
        let s: SupportSet = serde_json::from_str("[4,0,4]").unwrap();
        assert_eq!(s, set(&[0, 4]));
    }

    fn arb_set() -> impl Strategy<Value = SupportSet> {
        prop::collection::vec(0u64..1_000_000, 1..12).prop_map(|v| SupportSet::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn normalize_idempotent(s in arb_set()) {
            let n = s.normalize();
            prop_assert_eq!(n.normalize(), n.clone());
            prop_assert_eq!(n.len(), s.len());
            prop_assert!(n.contains(0));
        }

        #[test]
        fn reflect_involution(s in arb_set(), extra in 0u64..1000) {
            let n = s.max() + extra;
            prop_assert_eq!(s.reflect(n).unwrap().reflect(n).unwrap(), s);
        }

        #[test]
        fn sum_commutative_associative(a in arb_set(), b in arb_set(), c in arb_set()) {
            let (ab, _) = a.sum_sets(&b).unwrap();
            let (ba, _) = b.sum_sets(&a).unwrap();
            prop_assert_eq!(&ab, &ba);
            let (ab_c, _) = ab.sum_sets(&c).unwrap();
            let (bc, _) = b.sum_sets(&c).unwrap();
            let (a_bc, _) = a.sum_sets(&bc).unwrap();
            prop_assert_eq!(ab_c, a_bc);
        }

        #[test]
        fn union_cardinality(a in arb_set(), b in arb_set()) {
            if a.is_disjoint(&b) {
                prop_assert_eq!(a.disjoint_union(&b).unwrap().len(), a.len() + b.len());
            } else {
                prop_assert!(a.disjoint_union(&b).is_err());
            }
        }
    }

    #[test]
    fn family_shape() {
        for k in 1..=LOWER_BOUND_FAMILY_MAX_K {
            let s = SupportSet::lower_bound_family(k).unwrap();
            assert_eq!(s.len(), k as usize + 2);
            assert_eq!(&s.exponents()[..2], &[0, 1]);
        }
    }
}
