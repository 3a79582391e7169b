//! Sparse Laurent polynomials with integer coefficients over a monomial group.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{BuildHasher, Hash};

use rayon::prelude::*;
use rustc_hash::{FxBuildHasher, FxHashMap};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monomial::Monomial;

/// What a polynomial needs from its monomials.
pub trait Mon: Clone + Eq + Hash + Ord + Send + Sync + fmt::Display {
    fn one() -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    /// A total order compatible with multiplication.
    fn group_cmp(&self, o: &Self) -> Ordering;
}

impl Mon for Monomial {
    fn one() -> Self {
        Monomial::one()
    }
    fn mul(&self, o: &Self) -> Self {
        Monomial::mul(self, o)
    }
    fn div(&self, o: &Self) -> Self {
        Monomial::div(self, o)
    }
    fn group_cmp(&self, o: &Self) -> Ordering {
        Monomial::group_cmp(self, o)
    }
}

#[derive(Clone, Default)]
pub struct Poly<M: Mon> {
    terms: FxHashMap<M, i64>,
}

/// Products with more term pairs than this are split across threads.
const PAR_THRESHOLD: usize = 1 << 14;

#[inline]
fn add_coef(a: i64, b: i64) -> i64 {
    a.checked_add(b).expect("coefficient overflow")
}

impl<M: Mon> Poly<M> {
    pub fn zero() -> Self {
        Poly {
            terms: FxHashMap::default(),
        }
    }

    pub fn one() -> Self {
        Self::monomial(M::one())
    }

    pub fn monomial(m: M) -> Self {
        Self::from_terms([(m, 1)])
    }

    pub fn from_terms<I: IntoIterator<Item = (M, i64)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn with_capacity(n: usize) -> Self {
        Poly {
            terms: FxHashMap::with_capacity_and_hasher(n, Default::default()),
        }
    }

    pub fn add_term(&mut self, m: M, c: i64) {
        if c == 0 {
            return;
        }
        use std::collections::hash_map::Entry;
        match self.terms.entry(m) {
            Entry::Occupied(mut o) => {
                let v = add_coef(*o.get(), c);
                if v == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coef(&self, m: &M) -> i64 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn contains(&self, m: &M) -> bool {
        self.terms.contains_key(m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&M, i64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn monomials(&self) -> impl Iterator<Item = &M> {
        self.terms.keys()
    }

    /// Terms in canonical monomial order.
    pub fn sorted_terms(&self) -> Vec<(M, i64)> {
        let mut v: Vec<(M, i64)> = self.terms.iter().map(|(m, &c)| (m.clone(), c)).collect();
        v.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }

    pub fn add_assign(&mut self, o: &Self) {
        for (m, &c) in &o.terms {
            self.add_term(m.clone(), c);
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, &c) in &o.terms {
            r.add_term(m.clone(), -c);
        }
        r
    }

    pub fn scale(&self, k: i64) -> Self {
        if k == 0 {
            return Self::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| (m.clone(), c.checked_mul(k).expect("coefficient overflow")))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, m: &M) -> Self {
        Poly {
            terms: self.terms.iter().map(|(x, &c)| (x.mul(m), c)).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (a, b) = if self.len() <= o.len() {
            (self, o)
        } else {
            (o, self)
        };
        if a.is_empty() {
            return Self::zero();
        }
        if a.len() * b.len() < PAR_THRESHOLD {
            let mut r = Self::with_capacity(a.len() * b.len());
            for (ma, &ca) in &a.terms {
                for (mb, &cb) in &b.terms {
                    r.add_term(
                        ma.mul(mb),
                        ca.checked_mul(cb).expect("coefficient overflow"),
                    );
                }
            }
            return r;
        }
        // Each task multiplies a slice of `a` into hash-sharded maps; shard i of
        // every task is then merged independently.
        let shards = rayon::current_num_threads().max(1) * 2;
        let a_terms: Vec<(&M, i64)> = a.terms.iter().map(|(m, &c)| (m, c)).collect();
        let chunk = (a_terms.len() / (shards * 2)).max(1);
        let hasher = FxBuildHasher;
        let partial: Vec<Vec<FxHashMap<M, i64>>> = a_terms
            .par_chunks(chunk)
            .map(|slice| {
                let mut out: Vec<FxHashMap<M, i64>> =
                    (0..shards).map(|_| FxHashMap::default()).collect();
                for &(ma, ca) in slice {
                    for (mb, &cb) in &b.terms {
                        let m = ma.mul(mb);
                        let h = (hasher.hash_one(&m) >> 40) as usize % shards;
                        let e = out[h].entry(m).or_insert(0);
                        *e = add_coef(*e, ca.checked_mul(cb).expect("coefficient overflow"));
                    }
                }
                out
            })
            .collect();
        let mut columns: Vec<Vec<FxHashMap<M, i64>>> = (0..shards)
            .map(|_| Vec::with_capacity(partial.len()))
            .collect();
        for row in partial {
            for (i, m) in row.into_iter().enumerate() {
                columns[i].push(m);
            }
        }
        let merged: Vec<FxHashMap<M, i64>> = columns
            .into_par_iter()
            .map(|maps| {
                let mut it = maps.into_iter();
                let mut acc = it.next().unwrap_or_default();
                for m in it {
                    for (k, c) in m {
                        let e = acc.entry(k).or_insert(0);
                        *e = add_coef(*e, c);
                    }
                }
                acc.retain(|_, c| *c != 0);
                acc
            })
            .collect();
        let total = merged.iter().map(|m| m.len()).sum();
        let mut terms = FxHashMap::with_capacity_and_hasher(total, Default::default());
        for m in merged {
            terms.extend(m);
        }
        Poly { terms }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut r = Self::one();
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    /// Image under a monomial map (a ring homomorphism when `f` is multiplicative).
    pub fn map_monomials<N: Mon, F: Fn(&M) -> N>(&self, f: F) -> Poly<N> {
        let mut r = Poly::<N>::with_capacity(self.len());
        for (m, &c) in &self.terms {
            r.add_term(f(m), c);
        }
        r
    }

    pub fn filter<F: Fn(&M, i64) -> bool>(&self, f: F) -> Self {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, &c)| f(m, c))
                .map(|(m, &c)| (m.clone(), c))
                .collect(),
        }
    }

    /// Largest and smallest monomials in the group order.
    pub fn lead_trail(&self) -> Option<(&M, &M)> {
        let mut it = self.terms.keys();
        let first = it.next()?;
        let (mut hi, mut lo) = (first, first);
        for m in it {
            if m.group_cmp(hi) == Ordering::Greater {
                hi = m;
            }
            if m.group_cmp(lo) == Ordering::Less {
                lo = m;
            }
        }
        Some((hi, lo))
    }

    /// Exact quotient `self / d`; fails unless `d` divides `self` in the Laurent ring.
    pub fn exact_div(&self, d: &Self) -> Result<Self> {
        let (dl, dt) = d
            .lead_trail()
            .ok_or_else(|| Error::NonExactDivision("division by zero".into()))?;
        let (dl, dt) = (dl.clone(), dt.clone());
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let dl_c = d.coef(&dl);
        let floor = self.lead_trail().map(|(_, t)| t.div(&dt)).unwrap();
        let mut rem: BTreeMap<GroupKey<M>, i64> = self
            .terms
            .iter()
            .map(|(m, &c)| (GroupKey(m.clone()), c))
            .collect();
        let mut q = Self::zero();
        let cap = 4 * self.len() + 64;
        while let Some((lead, c)) = rem.pop_last() {
            if c % dl_c != 0 {
                return Err(Error::NonExactDivision(format!(
                    "coefficient {c} not divisible by {dl_c}"
                )));
            }
            let t = lead.0.div(&dl);
            if t.group_cmp(&floor) == Ordering::Less || q.len() > cap {
                return Err(Error::NonExactDivision(format!(
                    "remainder term {} cannot be cancelled",
                    lead.0
                )));
            }
            let qc = c / dl_c;
            for (m, &dc) in &d.terms {
                if *m == dl {
                    continue;
                }
                let key = GroupKey(m.mul(&t));
                let v = add_coef(
                    rem.get(&key).copied().unwrap_or(0),
                    -qc.checked_mul(dc).expect("coefficient overflow"),
                );
                if v == 0 {
                    rem.remove(&key);
                } else {
                    rem.insert(key, v);
                }
            }
            q.add_term(t, qc);
        }
        Ok(q)
    }

    pub fn to_json(&self) -> serde_json::Value
    where
        M: Serialize,
    {
        let terms: Vec<serde_json::Value> = self
            .sorted_terms()
            .into_iter()
            .map(|(m, c)| serde_json::json!({"m": m, "c": c}))
            .collect();
        serde_json::Value::Array(terms)
    }
}

impl<M: Mon> PartialEq for Poly<M> {
    fn eq(&self, o: &Self) -> bool {
        self.terms == o.terms
    }
}

impl<M: Mon> Eq for Poly<M> {}

#[derive(PartialEq, Eq)]
struct GroupKey<M: Mon>(M);

impl<M: Mon> PartialOrd for GroupKey<M> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl<M: Mon> Ord for GroupKey<M> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.group_cmp(&o.0)
    }
}

impl<M: Mon> fmt::Display for Poly<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.sorted_terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c == 1 {
                write!(f, "{m}")?;
            } else {
                write!(f, "{c}*{m}")?;
            }
        }
        Ok(())
    }
}

impl<M: Mon> fmt::Debug for Poly<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson<M> {
    m: M,
    c: i64,
}

impl<M: Mon + Serialize> Serialize for Poly<M> {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<TermJson<M>> = self
            .sorted_terms()
            .into_iter()
            .map(|(m, c)| TermJson { m, c })
            .collect();
        v.serialize(ser)
    }
}

impl<'de, M: Mon + Deserialize<'de>> Deserialize<'de> for Poly<M> {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<TermJson<M>> = Vec::deserialize(de)?;
        Ok(Poly::from_terms(v.into_iter().map(|t| (t.m, t.c))))
    }
}

pub type LaurentPoly = Poly<Monomial>;

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> LaurentPoly {
        Poly::from_terms(s.split('+').map(|t| {
            let t = t.trim();
            match t.split_once('*') {
                Some((c, m)) => (m.parse().unwrap(), c.parse().unwrap()),
                None => (t.parse().unwrap(), 1),
            }
        }))
    }

    #[test]
    fn ring_ops() {
        let a = p("1_0 + 1_2^-1");
        let b = p("1_0 + 2*1_2^-1");
        let ab = a.mul(&b);
        assert_eq!(ab, p("1_0^2 + 3*1_0 1_2^-1 + 2*1_2^-2"));
        assert!(a.sub(&a).is_zero());
        assert_eq!(a.add(&a), a.scale(2));
    }

    #[test]
    fn division() {
        let a = p("1_0 + 1_2^-1 + 2_1 1_4^-3");
        let b = p("1_0 2_0 + 1_2^-1 + 3*2_1");
        let ab = a.mul(&b);
        assert_eq!(ab.exact_div(&b).unwrap(), a);
        assert_eq!(ab.exact_div(&a).unwrap(), b);
        assert!(ab.add(&p("1_9")).exact_div(&a).is_err());
        assert!(p("1_0 + 1").exact_div(&p("1_0 + 1_1")).is_err());
    }

    #[test]
    fn large_parallel_product_matches_serial() {
        let a = LaurentPoly::from_terms((0..200).map(|i| {
            (
                Monomial::from_factors([(1, i % 17, 1), (2, i / 17, -1)]),
                1 + i as i64 % 3,
            )
        }));
        let b = LaurentPoly::from_terms(
            (0..150).map(|i| (Monomial::from_factors([(1, i % 13, -1), (3, i / 13, 2)]), 1)),
        );
        let big = a.mul(&b);
        let mut serial = LaurentPoly::zero();
        for (ma, ca) in a.iter() {
            for (mb, cb) in b.iter() {
                serial.add_term(ma.mul(mb), ca * cb);
            }
        }
        assert_eq!(big, serial);
    }

    #[test]
    fn json_roundtrip() {
        let a = p("1_0 + 2*1_2^-1");
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(serde_json::from_str::<LaurentPoly>(&s).unwrap(), a);
    }
}
