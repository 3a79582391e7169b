//! Monomials in the variables `Y_{i,s}` (written `i_s`), the `A_{i,s}`
//! lattice, dominance and the partial order `<=`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::cartan::CartanData;
use crate::error::{Error, Result};

const SHIFT_OFFSET: i64 = 1 << 15;

/// A factor `Y_{i,s}^e` packed as `key << 32 | e` where `key = i << 16 | (s + 2^15)`.
/// Sorting packed factors sorts by `(i, s)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Factor(u64);

impl Factor {
    #[inline]
    fn new(i: usize, s: i32, e: i32) -> Self {
        Factor(((Self::key(i, s) as u64) << 32) | (e as u32 as u64))
    }
    #[inline]
    fn key(i: usize, s: i32) -> u32 {
        let off = s as i64 + SHIFT_OFFSET;
        assert!(
            i < (1 << 16) && (0..(1 << 16)).contains(&off),
            "variable {i}_{s} out of packable range"
        );
        ((i as u32) << 16) | off as u32
    }
    #[inline]
    fn k(self) -> u32 {
        (self.0 >> 32) as u32
    }
    #[inline]
    fn node(self) -> usize {
        (self.0 >> 48) as usize
    }
    #[inline]
    fn shift(self) -> i32 {
        (((self.0 >> 32) & 0xffff) as i64 - SHIFT_OFFSET) as i32
    }
    #[inline]
    fn exp(self) -> i32 {
        self.0 as u32 as i32
    }
    #[inline]
    fn with_exp(self, e: i32) -> Self {
        Factor((self.0 & !0xffff_ffff) | (e as u32 as u64))
    }
}

/// Element of the free abelian group on `Y_{i,s}`; no zero exponents stored.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(SmallVec<[Factor; 6]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn y(i: usize, s: i32) -> Self {
        Self::y_pow(i, s, 1)
    }

    pub fn y_pow(i: usize, s: i32, e: i32) -> Self {
        let mut v = SmallVec::new();
        if e != 0 {
            v.push(Factor::new(i, s, e));
        }
        Monomial(v)
    }

    /// Builds from arbitrary `(i, s, e)` triples; repeated variables are combined.
    pub fn from_factors<I: IntoIterator<Item = (usize, i32, i32)>>(it: I) -> Self {
        let mut v: Vec<Factor> = it
            .into_iter()
            .map(|(i, s, e)| Factor::new(i, s, e))
            .collect();
        v.sort_unstable_by_key(|f| f.k());
        let mut out: SmallVec<[Factor; 6]> = SmallVec::with_capacity(v.len());
        for f in v {
            match out.last_mut() {
                Some(last) if last.k() == f.k() => {
                    let e = last.exp().checked_add(f.exp()).expect("exponent overflow");
                    *last = last.with_exp(e);
                }
                _ => out.push(f),
            }
        }
        out.retain(|f| f.exp() != 0);
        Monomial(out)
    }

    /// `(i, s, e)` in canonical order (i ascending, s ascending).
    pub fn factors(&self) -> impl ExactSizeIterator<Item = (usize, i32, i32)> + '_ {
        self.0.iter().map(|f| (f.node(), f.shift(), f.exp()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exp(&self, i: usize, s: i32) -> i32 {
        let k = Factor::key(i, s);
        match self.0.binary_search_by_key(&k, |f| f.k()) {
            Ok(p) => self.0[p].exp(),
            Err(_) => 0,
        }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        self.combine(other, 1)
    }

    pub fn div(&self, other: &Monomial) -> Monomial {
        self.combine(other, -1)
    }

    fn combine(&self, other: &Monomial, sign: i32) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out: SmallVec<[Factor; 6]> = SmallVec::with_capacity(a.len() + b.len());
        let (mut x, mut y) = (0, 0);
        while x < a.len() && y < b.len() {
            let (fa, fb) = (a[x], b[y]);
            match fa.k().cmp(&fb.k()) {
                Ordering::Less => {
                    out.push(fa);
                    x += 1;
                }
                Ordering::Greater => {
                    out.push(fb.with_exp(fb.exp().checked_mul(sign).expect("exponent overflow")));
                    y += 1;
                }
                Ordering::Equal => {
                    let e = fa
                        .exp()
                        .checked_add(fb.exp().checked_mul(sign).expect("exponent overflow"))
                        .expect("exponent overflow");
                    if e != 0 {
                        out.push(fa.with_exp(e));
                    }
                    x += 1;
                    y += 1;
                }
            }
        }
        out.extend_from_slice(&a[x..]);
        for &fb in &b[y..] {
            out.push(fb.with_exp(fb.exp().checked_mul(sign).expect("exponent overflow")));
        }
        Monomial(out)
    }

    pub fn inv(&self) -> Monomial {
        Monomial(self.0.iter().map(|f| f.with_exp(-f.exp())).collect())
    }

    pub fn pow(&self, k: i32) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        Monomial(
            self.0
                .iter()
                .map(|f| f.with_exp(f.exp().checked_mul(k).expect("exponent overflow")))
                .collect(),
        )
    }

    pub fn is_dominant(&self) -> bool {
        self.0.iter().all(|f| f.exp() >= 0)
    }

    pub fn is_antidominant(&self) -> bool {
        self.0.iter().all(|f| f.exp() <= 0)
    }

    pub fn is_j_dominant(&self, j: usize) -> bool {
        self.0
            .iter()
            .filter(|f| f.node() == j)
            .all(|f| f.exp() >= 0)
    }

    pub fn is_j_antidominant(&self, j: usize) -> bool {
        self.0
            .iter()
            .filter(|f| f.node() == j)
            .all(|f| f.exp() <= 0)
    }

    pub fn max_shift(&self) -> Option<i32> {
        self.0.iter().map(|f| f.shift()).max()
    }

    pub fn min_shift(&self) -> Option<i32> {
        self.0.iter().map(|f| f.shift()).min()
    }

    /// Right-negativity: at the largest occurring shift every exponent is <= 0.
    pub fn is_right_negative(&self) -> Result<bool> {
        let l = self
            .max_shift()
            .ok_or_else(|| Error::Undefined("right-negativity of the unit monomial".into()))?;
        Ok(self
            .0
            .iter()
            .filter(|f| f.shift() == l)
            .all(|f| f.exp() <= 0))
    }

    /// `i_s -> i_{s+delta}`.
    pub fn translate(&self, delta: i32) -> Monomial {
        Monomial::from_factors(self.factors().map(|(i, s, e)| (i, s + delta, e)))
    }

    /// `i_s -> i_{-s}`.
    pub fn negate_shifts(&self) -> Monomial {
        Monomial::from_factors(self.factors().map(|(i, s, e)| (i, -s, e)))
    }

    /// Total degree, i.e. the sum of all exponents.
    pub fn degree(&self) -> i64 {
        self.0.iter().map(|f| f.exp() as i64).sum()
    }

    /// Sum of exponents per node (the classical weight in the fundamental-weight basis).
    pub fn weight(&self, rank: usize) -> Vec<i64> {
        let mut w = vec![0i64; rank];
        for (i, _, e) in self.factors() {
            w[i - 1] += e as i64;
        }
        w
    }

    /// Factors of node `j` as `(s, e)`, ascending in `s`.
    pub fn node_factors(&self, j: usize) -> impl Iterator<Item = (i32, i32)> + '_ {
        self.0
            .iter()
            .filter(move |f| f.node() == j)
            .map(|f| (f.shift(), f.exp()))
    }

    pub fn max_node(&self) -> usize {
        self.0.iter().map(|f| f.node()).max().unwrap_or(0)
    }

    /// Comparison in a total order compatible with multiplication
    /// (lexicographic on exponent vectors, variables in canonical order).
    pub fn group_cmp(&self, other: &Monomial) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let (mut x, mut y) = (0, 0);
        loop {
            match (a.get(x), b.get(y)) {
                (None, None) => return Ordering::Equal,
                (Some(fa), None) => return sign_ord(fa.exp()),
                (None, Some(fb)) => return sign_ord(fb.exp()).reverse(),
                (Some(fa), Some(fb)) => match fa.k().cmp(&fb.k()) {
                    Ordering::Less => return sign_ord(fa.exp()),
                    Ordering::Greater => return sign_ord(fb.exp()).reverse(),
                    Ordering::Equal => {
                        if fa.exp() != fb.exp() {
                            return fa.exp().cmp(&fb.exp());
                        }
                        x += 1;
                        y += 1;
                    }
                },
            }
        }
    }
}

#[inline]
fn sign_ord(e: i32) -> Ordering {
    e.cmp(&0)
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, s, e) in self.factors() {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{i}_{s}")?;
            } else {
                write!(f, "{i}_{s}^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl FromStr for Monomial {
    type Err = Error;

    /// Parses `"3_-6 2_-1^2"`; `"1"` or the empty string is the unit.
    fn from_str(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.is_empty() || t == "1" {
            return Ok(Monomial::one());
        }
        let mut fs = vec![];
        for tok in t
            .split(|c: char| c.is_whitespace() || c == '*')
            .filter(|x| !x.is_empty())
        {
            let bad = || Error::Parse(format!("bad monomial token `{tok}`"));
            let (var, e) = match tok.split_once('^') {
                Some((v, e)) => (v, e.parse::<i32>().map_err(|_| bad())?),
                None => (tok, 1),
            };
            let (i, s) = var.split_once('_').ok_or_else(bad)?;
            let i = i.parse::<usize>().map_err(|_| bad())?;
            let s = s.parse::<i32>().map_err(|_| bad())?;
            if i == 0 {
                return Err(bad());
            }
            fs.push((i, s, e));
        }
        Ok(Monomial::from_factors(fs))
    }
}

#[derive(Serialize, Deserialize)]
struct FactorJson {
    i: usize,
    s: i32,
    e: i32,
}

#[derive(Serialize, Deserialize)]
struct MonomialJson {
    factors: Vec<FactorJson>,
}

impl Serialize for Monomial {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        MonomialJson {
            factors: self
                .factors()
                .map(|(i, s, e)| FactorJson { i, s, e })
                .collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Monomial {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let j = MonomialJson::deserialize(de)?;
        Ok(Monomial::from_factors(
            j.factors.into_iter().map(|f| (f.i, f.s, f.e)),
        ))
    }
}

/// `A_{i,s}` for the given Cartan data.
pub fn a_monomial(cd: &CartanData, i: usize, s: i32) -> Result<Monomial> {
    cd.check_node(i)?;
    Ok(a_monomial_unchecked(cd, i, s))
}

pub(crate) fn a_monomial_unchecked(cd: &CartanData, i: usize, s: i32) -> Monomial {
    let di = cd.di(i);
    let mut fs = vec![(i, s + di, 1), (i, s - di, 1)];
    for j in cd.nodes() {
        if j == i {
            continue;
        }
        match cd.cij(j, i) {
            0 => {}
            -1 => fs.push((j, s, -1)),
            -2 => {
                fs.push((j, s + 1, -1));
                fs.push((j, s - 1, -1));
            }
            -3 => {
                fs.push((j, s + 2, -1));
                fs.push((j, s, -1));
                fs.push((j, s - 2, -1));
            }
            other => panic!("unsupported Cartan entry {other}"),
        }
    }
    Monomial::from_factors(fs)
}

/// Multiplicities `v_{i,s}` of a monomial written as `prod A_{i,s}^{-v_{i,s}}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ALatticePoint {
    pub v: BTreeMap<(usize, i32), i64>,
}

impl ALatticePoint {
    pub fn total(&self) -> i64 {
        self.v.values().sum()
    }

    pub fn node_total(&self, i: usize) -> i64 {
        self.v
            .iter()
            .filter(|((j, _), _)| *j == i)
            .map(|(_, c)| *c)
            .sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.v.values().all(|&c| c >= 0)
    }

    /// `prod A_{i,s}^{-v_{i,s}}`.
    pub fn recompose(&self, cd: &CartanData) -> Monomial {
        let mut m = Monomial::one();
        for (&(i, s), &c) in &self.v {
            m = m.mul(&a_monomial_unchecked(cd, i, s).pow(-(c as i32)));
        }
        m
    }

    /// `(i, s)` positions carrying a nonzero multiplicity.
    pub fn support(&self) -> impl Iterator<Item = (usize, i32)> + '_ {
        self.v.keys().copied()
    }
}

/// Writes `m = prod A_{i,s}^{-v_{i,s}}` if possible.
///
/// `A_{i,s}` has its unique largest shift at `Y_{i,s+d_i}`, so peeling off the
/// top shift one layer at a time determines the multiplicities.
pub fn decompose_in_a_lattice(cd: &CartanData, m: &Monomial) -> Option<ALatticePoint> {
    let mut p = ALatticePoint::default();
    if m.is_one() {
        return Some(p);
    }
    if m.max_node() > cd.rank {
        return None;
    }
    let floor = m.min_shift()?;
    let mut r = m.clone();
    while let Some(top) = r.max_shift() {
        if top < floor {
            return None;
        }
        let layer: Vec<(usize, i32)> = r
            .factors()
            .filter(|&(_, s, _)| s == top)
            .map(|(i, _, e)| (i, e))
            .collect();
        for (i, e) in layer {
            let at = top - cd.di(i);
            // m contains A^{-v}; the top factor of A^{-v} has exponent -v.
            *p.v.entry((i, at)).or_insert(0) -= e as i64;
            r = r.mul(&a_monomial_unchecked(cd, i, at).pow(-e));
        }
    }
    p.v.retain(|_, c| *c != 0);
    Some(p)
}

/// `m <= m2` iff `m2 m^{-1}` is a product of `A_{i,s}` with nonnegative exponents.
pub fn leq(cd: &CartanData, m: &Monomial, m2: &Monomial) -> bool {
    // m = m2 * prod A^{-v}, v >= 0
    match decompose_in_a_lattice(cd, &m.div(m2)) {
        Some(p) => p.is_nonnegative(),
        None => false,
    }
}
