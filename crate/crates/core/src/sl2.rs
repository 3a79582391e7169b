//! Rank-one q-characters: strings, Kirillov–Reshetikhin characters and the
//! node restriction `beta_j`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::monomial::Monomial;
use crate::poly::{LaurentPoly, Mon, Poly};

/// Monomial in the rank-one variables `Y_s`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Sl2Monomial(Monomial);

impl Sl2Monomial {
    pub fn y(s: i32) -> Self {
        Sl2Monomial(Monomial::y(1, s))
    }

    pub fn y_pow(s: i32, e: i32) -> Self {
        Sl2Monomial(Monomial::y_pow(1, s, e))
    }

    pub fn from_shifts<I: IntoIterator<Item = (i32, i32)>>(it: I) -> Self {
        Sl2Monomial(Monomial::from_factors(
            it.into_iter().map(|(s, e)| (1, s, e)),
        ))
    }

    /// `(s, e)` ascending in `s`.
    pub fn shifts(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        self.0.factors().map(|(_, s, e)| (s, e))
    }

    pub fn exp(&self, s: i32) -> i32 {
        self.0.exp(1, s)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_dominant(&self) -> bool {
        self.0.is_dominant()
    }

    pub fn inv(&self) -> Self {
        Sl2Monomial(self.0.inv())
    }

    /// The same exponents placed on node `i` of a higher-rank monomial.
    pub fn lift(&self, i: usize) -> Monomial {
        Monomial::from_factors(self.shifts().map(|(s, e)| (i, s, e)))
    }
}

impl Mon for Sl2Monomial {
    fn one() -> Self {
        Sl2Monomial(Monomial::one())
    }
    fn mul(&self, o: &Self) -> Self {
        Sl2Monomial(self.0.mul(&o.0))
    }
    fn div(&self, o: &Self) -> Self {
        Sl2Monomial(self.0.div(&o.0))
    }
    fn group_cmp(&self, o: &Self) -> Ordering {
        self.0.group_cmp(&o.0)
    }
}

impl fmt::Display for Sl2Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .shifts()
            .map(|(s, e)| {
                if e == 1 {
                    format!("Y_{s}")
                } else {
                    format!("Y_{s}^{e}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl fmt::Debug for Sl2Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl Serialize for Sl2Monomial {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<(i32, i32)> = self.shifts().collect();
        v.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Sl2Monomial {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<(i32, i32)> = Vec::deserialize(de)?;
        Ok(Sl2Monomial::from_shifts(v))
    }
}

pub type Sl2Poly = Poly<Sl2Monomial>;

/// `A_b = Y_{b-1} Y_{b+1}`.
pub fn a_sl2(b: i32) -> Sl2Monomial {
    Sl2Monomial::from_shifts([(b - 1, 1), (b + 1, 1)])
}

/// The string `{a + k - 2i - 1 : 0 <= i < k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sl2String {
    pub a_shift: i32,
    pub length: u32,
}

impl Sl2String {
    pub fn new(a_shift: i32, length: u32) -> Self {
        Sl2String { a_shift, length }
    }

    pub fn from_top(top: i32, length: u32) -> Self {
        Sl2String {
            a_shift: top - length as i32 + 1,
            length,
        }
    }

    pub fn top(&self) -> i32 {
        self.a_shift + self.length as i32 - 1
    }

    pub fn bottom(&self) -> i32 {
        self.a_shift - self.length as i32 + 1
    }

    /// Members, descending.
    pub fn members(&self) -> Vec<i32> {
        (0..self.length as i32)
            .map(|i| self.a_shift + self.length as i32 - 2 * i - 1)
            .collect()
    }

    /// `X_k^{(a)}`, the product of the members.
    pub fn monomial(&self) -> Sl2Monomial {
        Sl2Monomial::from_shifts(self.members().into_iter().map(|s| (s, 1)))
    }

    fn contains(&self, o: &Sl2String) -> bool {
        let parity = (self.top() - o.top()).rem_euclid(2) == 0;
        parity && o.top() <= self.top() && o.bottom() >= self.bottom()
    }
}

/// q-character of the Kirillov–Reshetikhin module `W_k^{(a)}`.
pub fn kr_qchar(a_shift: i32, k: u32) -> Sl2Poly {
    let st = Sl2String::new(a_shift, k);
    let mut m = st.monomial();
    let mut p = Sl2Poly::monomial(m.clone());
    let k = k as i32;
    for j in 0..k {
        m = m.mul(&a_sl2(a_shift + k - 2 * j).inv());
        p.add_term(m.clone(), 1);
    }
    p
}

/// Two strings are in general position unless their union is a string that
/// contains neither of them.
pub fn general_position(s1: &Sl2String, s2: &Sl2String) -> bool {
    if s1.contains(s2) || s2.contains(s1) {
        return true;
    }
    let mut u: Vec<i32> = s1.members();
    u.extend(s2.members());
    u.sort_unstable();
    u.dedup();
    let is_string = u.windows(2).all(|w| w[1] - w[0] == 2);
    !is_string
}

/// Strings of a dominant monomial, peeled from the top: each string starts
/// at the largest remaining shift and runs down while points remain.
pub fn string_decompose(m: &Sl2Monomial) -> Result<Vec<Sl2String>> {
    if !m.is_dominant() {
        return Err(Error::NotDominant(m.to_string()));
    }
    let pts: Vec<(i32, i32)> = m.shifts().collect();
    let mut out: Vec<Sl2String> = strings_of_points(&pts, 1)
        .into_iter()
        .map(|(t, k)| Sl2String::from_top(t, k))
        .collect();
    out.sort_by(|a, b| b.top().cmp(&a.top()).then(b.length.cmp(&a.length)));
    Ok(out)
}

/// Greedy top-down strings with member spacing `2 d`; `(top, length)` pairs.
pub(crate) fn strings_of_points(pts: &[(i32, i32)], d: i32) -> Vec<(i32, u32)> {
    let mut left: BTreeMap<i32, i32> = pts.iter().copied().filter(|&(_, e)| e > 0).collect();
    let mut out = vec![];
    while let Some((&top, _)) = left.iter().next_back() {
        let mut len = 0u32;
        let mut s = top;
        while let Some(e) = left.get_mut(&s) {
            *e -= 1;
            if *e == 0 {
                left.remove(&s);
            }
            len += 1;
            s -= 2 * d;
        }
        out.push((top, len));
    }
    out
}

pub fn recompose(strings: &[Sl2String]) -> Sl2Monomial {
    strings
        .iter()
        .fold(Sl2Monomial::one(), |m, s| m.mul(&s.monomial()))
}

/// q-character of the simple rank-one module with the given dominant highest monomial.
pub fn sl2_qchar(m: &Sl2Monomial) -> Result<Sl2Poly> {
    let strings = string_decompose(m)?;
    Ok(strings
        .iter()
        .fold(Sl2Poly::one(), |p, s| p.mul(&kr_qchar(s.a_shift, s.length))))
}

/// Lowering data of a dominant rank-one monomial whose variables sit at
/// spacing `d` (`Y_{i,s}` of a node with symmetrizer `d`): each term of its
/// character is `m * prod_{b in positions} A_b^{-1}`, with a multiplicity.
pub(crate) fn lowering_terms(pts: &[(i32, i32)], d: i32) -> Vec<(SmallVec<[i32; 8]>, i64)> {
    let strings = strings_of_points(pts, d);
    let mut acc: BTreeMap<SmallVec<[i32; 8]>, i64> = BTreeMap::new();
    acc.insert(SmallVec::new(), 1);
    for (top, len) in strings {
        let mut next: BTreeMap<SmallVec<[i32; 8]>, i64> = BTreeMap::new();
        for (pos, c) in &acc {
            for i in 0..=len as i32 {
                let mut p = pos.clone();
                p.extend((0..i).map(|j| top + d - 2 * d * j));
                p.sort_unstable();
                *next.entry(p).or_insert(0) += c;
            }
        }
        acc = next;
    }
    acc.into_iter().collect()
}

pub fn beta_monomial(m: &Monomial, j: usize) -> Sl2Monomial {
    Sl2Monomial::from_shifts(m.node_factors(j))
}

/// Kills every `Y_{k,s}` with `k != j` and renames `Y_{j,s}` to `Y_s`.
pub fn beta(p: &LaurentPoly, j: usize) -> Sl2Poly {
    p.map_monomials(|m| beta_monomial(m, j))
}
