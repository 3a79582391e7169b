//! q-characters: the Frenkel–Mukhin algorithm with optional truncation, the
//! truncated-character certifier, the involution `iota` and restriction to
//! ordinary characters.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::cartan::CartanData;
use crate::error::{Error, Result};
use crate::monomial::{a_monomial_unchecked, decompose_in_a_lattice, ALatticePoint, Monomial};
use crate::poly::{LaurentPoly, Mon};
use crate::sl2::{beta_monomial, lowering_terms, Sl2Monomial, Sl2Poly};

/// Default cap on the number of monomials the FM loop may expand.
pub const DEFAULT_BUDGET: usize = 20_000_000;

/// A set `U` of positions `(i, s)`; `A_{i,s}^{-1}` may only be applied inside it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TruncationRegion {
    /// `I x {s <= bound}`.
    Global { bound: i32 },
    /// `{(i, s) : s <= bounds[i-1]}`.
    PerNode { bounds: Vec<i32> },
}

impl TruncationRegion {
    pub fn global(bound: i32) -> Self {
        TruncationRegion::Global { bound }
    }

    pub fn contains(&self, i: usize, s: i32) -> bool {
        match self {
            TruncationRegion::Global { bound } => s <= *bound,
            TruncationRegion::PerNode { bounds } => bounds.get(i - 1).is_some_and(|&b| s <= b),
        }
    }
}

impl fmt::Display for TruncationRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TruncationRegion::Global { bound } => write!(f, "s<={bound}"),
            TruncationRegion::PerNode { bounds } => {
                let b: Vec<String> = bounds.iter().map(|b| b.to_string()).collect();
                write!(f, "s<=[{}]", b.join(","))
            }
        }
    }
}

impl FromStr for TruncationRegion {
    type Err = Error;

    /// `s<=B` or `s<=[b1,..,bn]`.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let rest = t
            .strip_prefix("s<=")
            .ok_or_else(|| Error::Parse(format!("truncation must look like s<=B, got {s:?}")))?;
        if let Some(inner) = rest.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let bounds = inner
                .split(',')
                .map(|b| {
                    b.parse::<i32>()
                        .map_err(|_| Error::Parse(format!("bad bound {b:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TruncationRegion::PerNode { bounds })
        } else {
            let bound = rest
                .parse()
                .map_err(|_| Error::Parse(format!("bad bound {rest:?}")))?;
            Ok(TruncationRegion::Global { bound })
        }
    }
}

/// A (possibly truncated) q-character.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QCharacter {
    pub poly: LaurentPoly,
    pub highest: Monomial,
    pub truncation: Option<TruncationRegion>,
    /// No monomial was cut by the truncation.
    pub complete: bool,
    /// Every monomial cut by the truncation was right-negative, so everything
    /// outside the region is right-negative too.
    pub cut_right_negative: bool,
}

impl QCharacter {
    pub fn len(&self) -> usize {
        self.poly.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poly.is_empty()
    }

    /// Dimension of the (truncated) module: the sum of the coefficients.
    pub fn dim(&self) -> i64 {
        self.poly.iter().map(|(_, c)| c).sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "highest": self.highest,
            "terms": self.poly,
            "complete": self.complete,
            "cut_right_negative": self.cut_right_negative,
            "region": self.truncation,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            highest: Monomial,
            terms: LaurentPoly,
            complete: bool,
            #[serde(default)]
            cut_right_negative: bool,
            region: Option<TruncationRegion>,
        }
        let r: Raw = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(QCharacter {
            poly: r.terms,
            highest: r.highest,
            truncation: r.region,
            complete: r.complete,
            cut_right_negative: r.cut_right_negative || r.complete,
        })
    }
}

struct Entry {
    depth: u32,
    /// Coloured coefficients `s_i`: the part of the multiplicity already
    /// explained by `i`-strings from above.
    col: SmallVec<[i64; 4]>,
}

impl Entry {
    fn coef(&self, is_top: bool) -> i64 {
        let c = self.col.iter().copied().max().unwrap_or(0);
        if is_top {
            c.max(1)
        } else {
            c
        }
    }
}

struct Contribution {
    m: Monomial,
    node: usize,
    amount: i64,
    depth: u32,
}

#[derive(Default)]
struct Expansion {
    out: Vec<Contribution>,
    cut: usize,
    cut_all_right_negative: bool,
}

/// Runs the Frenkel–Mukhin algorithm from `m_plus`.
///
/// Monomials are processed by their distance from `m_plus` (number of
/// `A^{-1}` factors); a whole layer is final once the previous layers are
/// processed, so each layer is expanded in parallel.
pub fn frenkel_mukhin(
    cd: &CartanData,
    m_plus: &Monomial,
    region: Option<&TruncationRegion>,
    budget: usize,
) -> Result<QCharacter> {
    let mut poly = LaurentPoly::zero();
    let run = frenkel_mukhin_streaming(cd, m_plus, region, budget, |m, c| {
        poly.add_term(m.clone(), c)
    })?;
    Ok(QCharacter {
        poly,
        highest: m_plus.clone(),
        truncation: region.cloned(),
        complete: run.complete,
        cut_right_negative: run.cut_right_negative,
    })
}

/// Summary of a streaming run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamSummary {
    pub terms: usize,
    pub complete: bool,
    pub cut_right_negative: bool,
}

/// Frenkel–Mukhin run that hands every finished term to `sink` and then
/// forgets it, so memory is bounded by the widest few layers rather than by
/// the whole character.
pub fn frenkel_mukhin_streaming(
    cd: &CartanData,
    m_plus: &Monomial,
    region: Option<&TruncationRegion>,
    budget: usize,
    mut sink: impl FnMut(&Monomial, i64),
) -> Result<StreamSummary> {
    if !m_plus.is_dominant() {
        return Err(Error::NotDominant(m_plus.to_string()));
    }
    if m_plus.max_node() > cd.rank {
        return Err(Error::NodeOutOfRange {
            node: m_plus.max_node(),
            rank: cd.rank,
        });
    }
    let n = cd.rank;
    let mut map: FxHashMap<Monomial, Entry> = FxHashMap::default();
    let mut layers: BTreeMap<u32, Vec<Monomial>> = BTreeMap::new();
    map.insert(
        m_plus.clone(),
        Entry {
            depth: 0,
            col: SmallVec::from_elem(0, n),
        },
    );
    layers.insert(0, vec![m_plus.clone()]);
    let mut processed = 0usize;
    let mut cut = 0usize;
    let mut cut_rn = true;

    while let Some((&depth, _)) = layers.iter().next() {
        let mut layer = layers.remove(&depth).unwrap();
        layer.sort_unstable();
        processed += layer.len();
        if processed > budget {
            return Err(Error::BudgetExceeded(budget));
        }
        let expand = |m: &Monomial| expand_one(cd, &map, m_plus, m, depth, region);
        let results: Vec<Result<Expansion>> = if layer.len() >= 64 {
            layer.par_iter().map(expand).collect()
        } else {
            layer.iter().map(expand).collect()
        };
        for m in &layer {
            let e = map.remove(m).unwrap();
            sink(m, e.coef(m == m_plus));
        }
        for r in results {
            let ex = r?;
            cut += ex.cut;
            cut_rn &= ex.cut_all_right_negative;
            for c in ex.out {
                let e = map.entry(c.m.clone()).or_insert_with(|| {
                    layers.entry(c.depth).or_default().push(c.m.clone());
                    Entry {
                        depth: c.depth,
                        col: SmallVec::from_elem(0, n),
                    }
                });
                debug_assert_eq!(e.depth, c.depth);
                e.col[c.node - 1] += c.amount;
            }
        }
    }
    Ok(StreamSummary {
        terms: processed,
        complete: cut == 0,
        cut_right_negative: cut_rn,
    })
}

fn expand_one(
    cd: &CartanData,
    map: &FxHashMap<Monomial, Entry>,
    m_plus: &Monomial,
    m: &Monomial,
    depth: u32,
    region: Option<&TruncationRegion>,
) -> Result<Expansion> {
    let e = &map[m];
    let is_top = m == m_plus;
    let s = e.coef(is_top);
    // in rank one the whole character is a single 1-slice, so the colouring
    // rule alone is exact and further dominant monomials are harmless
    if !is_top && cd.rank > 1 && m.is_dominant() {
        return Err(Error::NonSpecialDetected(format!(
            "second dominant monomial {m} (coefficient {s})"
        )));
    }
    let mut ex = Expansion {
        cut_all_right_negative: true,
        ..Default::default()
    };
    for i in cd.nodes() {
        let si = e.col[i - 1];
        if !m.is_j_dominant(i) {
            if si != s {
                return Err(Error::NonSpecialDetected(format!(
                    "monomial {m} has coefficient {s} but its {i}-strings account for {si}"
                )));
            }
            continue;
        }
        let fresh = s - si;
        if fresh <= 0 {
            continue;
        }
        let pts: Vec<(i32, i32)> = m.node_factors(i).collect();
        for (positions, mult) in lowering_terms(&pts, cd.di(i)) {
            if positions.is_empty() {
                continue;
            }
            let mut a = Monomial::one();
            for &b in &positions {
                a = a.mul(&a_monomial_unchecked(cd, i, b));
            }
            let child = m.div(&a);
            if let Some(u) = region {
                if !positions.iter().all(|&b| u.contains(i, b)) {
                    ex.cut += 1;
                    if !child.is_right_negative().unwrap_or(false) {
                        ex.cut_all_right_negative = false;
                    }
                    continue;
                }
            }
            ex.out.push(Contribution {
                m: child,
                node: i,
                amount: fresh * mult,
                depth: depth + positions.len() as u32,
            });
        }
    }
    Ok(ex)
}

/// Number of dominant monomials, counted without multiplicity.
fn count_by(q: &QCharacter, pred: impl Fn(&Monomial) -> bool) -> usize {
    q.poly.monomials().filter(|m| pred(m)).count()
}

/// Exactly one dominant monomial.
pub fn is_special(q: &QCharacter) -> Result<bool> {
    let c = count_by(q, Monomial::is_dominant);
    if c > 1 {
        return Ok(false);
    }
    if !q.complete && !q.cut_right_negative {
        return Err(Error::IncompleteCharacter(
            "truncation cut monomials that are not right-negative".into(),
        ));
    }
    Ok(c == 1)
}

/// Exactly one anti-dominant monomial.
pub fn is_anti_special(q: &QCharacter) -> Result<bool> {
    let c = count_by(q, Monomial::is_antidominant);
    if c > 1 {
        return Ok(false);
    }
    if !q.complete {
        return Err(Error::IncompleteCharacter(
            "the lowest part of a truncated character is unknown".into(),
        ));
    }
    Ok(c == 1)
}

/// All dominant monomials with their coefficients, in canonical order.
pub fn enumerate_dominant(p: &LaurentPoly) -> Vec<(Monomial, i64)> {
    let mut v: Vec<(Monomial, i64)> = p
        .iter()
        .filter(|(m, _)| m.is_dominant())
        .map(|(m, c)| (m.clone(), c))
        .collect();
    v.sort();
    v
}

/// `Y_{i,s} -> Y_{i,2n-s+2}^{-1}`.
pub fn iota_monomial(m: &Monomial, n: usize) -> Monomial {
    let c = 2 * n as i32 + 2;
    Monomial::from_factors(m.factors().map(|(i, s, e)| (i, c - s, -e)))
}

pub fn iota(p: &LaurentPoly, n: usize) -> LaurentPoly {
    p.map_monomials(|m| iota_monomial(m, n))
}

/// Ordinary character: weights in the fundamental-weight basis with multiplicities.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalCharacter(pub BTreeMap<Vec<i64>, i64>);

impl ClassicalCharacter {
    pub fn add_term(&mut self, w: Vec<i64>, c: i64) {
        let e = self.0.entry(w.clone()).or_insert(0);
        *e = e.checked_add(c).expect("coefficient overflow");
        if *e == 0 {
            self.0.remove(&w);
        }
    }

    pub fn dim(&self) -> i64 {
        self.0.values().sum()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = ClassicalCharacter::default();
        for (w1, c1) in &self.0 {
            for (w2, c2) in &o.0 {
                let w: Vec<i64> = w1.iter().zip(w2).map(|(a, b)| a + b).collect();
                r.add_term(w, c1.checked_mul(*c2).expect("coefficient overflow"));
            }
        }
        r
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (w, c) in &o.0 {
            r.add_term(w.clone(), *c);
        }
        r
    }
}

/// Forgets the spectral parameter: `Y_{i,s} -> y_i`.
pub fn restrict_character(p: &LaurentPoly, rank: usize) -> ClassicalCharacter {
    let mut r = ClassicalCharacter::default();
    for (m, c) in p.iter() {
        r.add_term(m.weight(rank), c);
    }
    r
}

/// Lattice coordinates off one node: identifies an `i`-slice.
type SliceKey = Vec<((usize, i32), i64)>;

/// Result of checking a candidate truncated character.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub ok: bool,
    pub violations: Vec<String>,
}

/// Checks the four conditions under which `sum(candidate)` is the
/// q-character of `L(m_plus)` truncated to `region`.
///
/// Condition (iv) is checked against the `i`-dominant members of the
/// `i`-slice through each monomial, and the rank-one character of such a
/// member is truncated by keeping the terms whose `A_{i,b}^{-1}` factors all
/// lie in the region.
pub fn certify_truncation(
    cd: &CartanData,
    m_plus: &Monomial,
    region: &TruncationRegion,
    candidate: &[Monomial],
) -> Certificate {
    let mut viol = vec![];
    let mut seen = std::collections::HashSet::new();
    for m in candidate {
        if !seen.insert(m.clone()) {
            viol.push(format!("duplicate monomial {m}"));
        }
    }
    if !seen.contains(m_plus) {
        viol.push(format!("highest monomial {m_plus} missing"));
    }

    // (i)
    let mut pts: Vec<(Monomial, ALatticePoint)> = vec![];
    for m in seen.iter() {
        match decompose_in_a_lattice(cd, &m.div(m_plus)) {
            Some(p) if p.is_nonnegative() && p.support().all(|(i, s)| region.contains(i, s)) => {
                pts.push((m.clone(), p))
            }
            _ => viol.push(format!("(i) {m} is not in m_+ Q^-_U")),
        }
    }
    pts.sort();
    if !viol.is_empty() {
        return Certificate {
            ok: false,
            violations: viol,
        };
    }

    // (ii)
    for (m, _) in &pts {
        if m.is_dominant() && m != m_plus {
            viol.push(format!("(ii) second dominant monomial {m}"));
        }
    }

    // (iii): m'' = m A_{i,a}^{-1} A_{j,b} with (i,a) in U, (j,b) != (i,a), and m A_{i,a}^{-1} missing.
    for (m, p) in &pts {
        for (m2, p2) in &pts {
            if m == m2 {
                continue;
            }
            let mut plus = vec![];
            let mut minus = vec![];
            let mut keys: Vec<&(usize, i32)> = p.v.keys().chain(p2.v.keys()).collect();
            keys.sort();
            keys.dedup();
            for k in keys {
                let d = p2.v.get(k).copied().unwrap_or(0) - p.v.get(k).copied().unwrap_or(0);
                match d {
                    0 => {}
                    1 => plus.push(*k),
                    -1 => minus.push(*k),
                    _ => {
                        plus.clear();
                        minus.push(*k);
                        minus.push(*k);
                        break;
                    }
                }
            }
            if plus.len() == 1 && minus.len() == 1 {
                let (i, a) = plus[0];
                if region.contains(i, a) {
                    let step = m.div(&a_monomial_unchecked(cd, i, a));
                    if !seen.contains(&step) {
                        viol.push(format!(
                            "(iii) {m} A_{{{i},{a}}}^-1 is missing but {m2} is present"
                        ));
                    }
                }
            }
        }
    }

    // (iv)
    for i in cd.nodes() {
        let mut slices: HashMap<SliceKey, Vec<usize>> = HashMap::new();
        for (idx, (_, p)) in pts.iter().enumerate() {
            let key: SliceKey =
                p.v.iter()
                    .filter(|((j, _), _)| *j != i)
                    .map(|(k, c)| (*k, *c))
                    .collect();
            slices.entry(key).or_default().push(idx);
        }
        let mut keys: Vec<_> = slices.keys().cloned().collect();
        keys.sort();
        for key in keys {
            let members = &slices[&key];
            let mut target = Sl2Poly::zero();
            for &idx in members {
                target.add_term(beta_monomial(&pts[idx].0, i), 1);
            }
            let mut matches = 0;
            for &idx in members {
                let big_m = &pts[idx].0;
                if !big_m.is_j_dominant(i) {
                    continue;
                }
                if truncated_sl2(cd, big_m, i, region) == target {
                    matches += 1;
                }
            }
            if matches != 1 {
                let rep = &pts[members[0]].0;
                viol.push(format!("(iv) node {i}: the slice through {rep} has {matches} matching i-dominant monomials"));
            }
        }
    }

    Certificate {
        ok: viol.is_empty(),
        violations: viol,
    }
}

fn truncated_sl2(cd: &CartanData, m: &Monomial, i: usize, region: &TruncationRegion) -> Sl2Poly {
    let pts: Vec<(i32, i32)> = m.node_factors(i).collect();
    let top = beta_monomial(m, i);
    let mut p = Sl2Poly::zero();
    for (positions, mult) in lowering_terms(&pts, cd.di(i)) {
        if !positions.iter().all(|&b| region.contains(i, b)) {
            continue;
        }
        let mut a = Monomial::one();
        for &b in &positions {
            a = a.mul(&a_monomial_unchecked(cd, i, b));
        }
        let t: Sl2Monomial = top.mul(&beta_monomial(&a, i).inv());
        p.add_term(t, mult);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl2::sl2_qchar;

    fn mono(s: &str) -> Monomial {
        s.parse().unwrap()
    }

    fn c3() -> CartanData {
        CartanData::type_c(3).unwrap()
    }

    #[test]
    fn rank_one_matches_closed_formula() {
        let cd = CartanData::rank_one();
        let m = mono("1_-1 1_1 1_5");
        let q = frenkel_mukhin(&cd, &m, None, DEFAULT_BUDGET).unwrap();
        let want = sl2_qchar(&beta_monomial(&m, 1)).unwrap();
        assert_eq!(beta(&q.poly), want);
        assert!(q.complete);
    }

    fn beta(p: &LaurentPoly) -> Sl2Poly {
        crate::sl2::beta(p, 1)
    }

    #[test]
    fn fundamental_dims_c3() {
        let cd = c3();
        // classical dims 6, 14, 14
        for (m, d) in [("1_0", 6), ("2_0", 14), ("3_0", 14)] {
            let q = frenkel_mukhin(&cd, &mono(m), None, DEFAULT_BUDGET).unwrap();
            assert_eq!(q.dim(), d, "{m}");
            assert!(is_special(&q).unwrap());
        }
    }

    #[test]
    fn kr_module_is_special() {
        let q = frenkel_mukhin(&c3(), &mono("2_-3 2_-1"), None, DEFAULT_BUDGET).unwrap();
        assert_eq!(enumerate_dominant(&q.poly), vec![(mono("2_-3 2_-1"), 1)]);
        // restricts to V(2w_2) + V(2w_1) + V(0): 90 + 21 + 1
        assert_eq!(q.dim(), 112);
    }

    #[test]
    fn truncated_chain() {
        let cd = c3();
        let m = mono("3_0 2_5");
        let u = TruncationRegion::global(5);
        let q = frenkel_mukhin(&cd, &m, Some(&u), DEFAULT_BUDGET).unwrap();
        assert_eq!(q.len(), 2);
        assert!(!q.complete);
        let cands: Vec<Monomial> = q.poly.monomials().cloned().collect();
        assert!(certify_truncation(&cd, &m, &u, &cands).ok);
    }

    #[test]
    fn certificate_rejects_perturbations() {
        let cd = c3();
        let m = mono("3_0 2_5");
        let u = TruncationRegion::global(5);
        let child = m.div(&a_monomial_unchecked(&cd, 3, 2));
        assert!(certify_truncation(&cd, &m, &u, &[m.clone(), child.clone()]).ok);
        let missing = certify_truncation(&cd, &m, &u, std::slice::from_ref(&m));
        assert!(!missing.ok);
        assert!(missing.violations.iter().any(|v| v.starts_with("(iv)")));
    }

    #[test]
    fn iota_involution() {
        let m = mono("1_-2 2_3^-1 3_7^2");
        assert_eq!(iota_monomial(&iota_monomial(&m, 3), 3), m);
        assert_eq!(iota_monomial(&mono("1_6^-1"), 3), mono("1_2"));
    }

    #[test]
    fn region_parsing() {
        assert_eq!(
            "s<=7".parse::<TruncationRegion>().unwrap(),
            TruncationRegion::global(7)
        );
        assert_eq!(
            "s <= [1,2,-3]".parse::<TruncationRegion>().unwrap(),
            TruncationRegion::PerNode {
                bounds: vec![1, 2, -3]
            }
        );
        assert!("t<=3".parse::<TruncationRegion>().is_err());
    }

    #[test]
    fn restriction() {
        let r = restrict_character(&LaurentPoly::monomial(mono("1_-2")), 3);
        assert_eq!(
            r.0.into_iter().collect::<Vec<_>>(),
            vec![(vec![1, 0, 0], 1)]
        );
    }

    #[test]
    fn json_roundtrip() {
        let q = frenkel_mukhin(&c3(), &mono("1_0"), None, DEFAULT_BUDGET).unwrap();
        assert_eq!(QCharacter::from_json(&q.to_json()).unwrap(), q);
    }
}
