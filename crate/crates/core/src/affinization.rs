//! Minimal affinizations of type C_n: module labels and their highest
//! weights, the catalog of M-system equations and their duals, a memoizing
//! character engine, and the checks run on each equation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::cache::CharCache;
use crate::cartan::CartanData;
use crate::error::{Error, Result};
use crate::monomial::decompose_in_a_lattice;
use crate::monomial::{a_monomial_unchecked, Monomial};
use crate::poly::LaurentPoly;
use crate::qchar::{
    certify_truncation, enumerate_dominant, frenkel_mukhin, frenkel_mukhin_streaming, iota,
    restrict_character, ClassicalCharacter, TruncationRegion, DEFAULT_BUDGET,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    T,
    Ttilde,
    S,
    Stilde,
}

impl Variant {
    /// `T <-> T~`, `S <-> S~`.
    pub fn mirror(self) -> Variant {
        match self {
            Variant::T => Variant::Ttilde,
            Variant::Ttilde => Variant::T,
            Variant::S => Variant::Stilde,
            Variant::Stilde => Variant::S,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::T => "T",
            Variant::Ttilde => "Tt",
            Variant::S => "S",
            Variant::Stilde => "St",
        }
    }
}

/// `T^{(s)}_k`, `T~^{(s)}_k`, `S^{(s)}_k` or `S~^{(s)}_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModuleLabel {
    pub variant: Variant,
    pub s: i32,
    pub k: Vec<u32>,
}

impl ModuleLabel {
    pub fn new(variant: Variant, s: i32, k: Vec<u32>) -> Self {
        ModuleLabel { variant, s, k }
    }

    pub fn t(s: i32, k: Vec<u32>) -> Self {
        Self::new(Variant::T, s, k)
    }

    pub fn tt(s: i32, k: Vec<u32>) -> Self {
        Self::new(Variant::Ttilde, s, k)
    }

    pub fn st(s: i32, k: Vec<u32>) -> Self {
        Self::new(Variant::Stilde, s, k)
    }

    pub fn rank(&self) -> usize {
        self.k.len()
    }

    pub fn kn(&self) -> u32 {
        *self.k.last().unwrap_or(&0)
    }

    /// All-zero T/T~ labels denote the trivial module.
    pub fn is_trivial(&self) -> bool {
        matches!(self.variant, Variant::T | Variant::Ttilde) && self.k.iter().all(|&x| x == 0)
    }

    pub fn mirror(&self) -> ModuleLabel {
        ModuleLabel {
            variant: self.variant.mirror(),
            s: self.s,
            k: self.k.clone(),
        }
    }

    /// Human-readable form, e.g. `T~^(-2)_{0,0,1}`.
    pub fn pretty(&self) -> String {
        let v = match self.variant {
            Variant::T => "T",
            Variant::Ttilde => "T~",
            Variant::S => "S",
            Variant::Stilde => "S~",
        };
        let k: Vec<String> = self.k.iter().map(|x| x.to_string()).collect();
        format!("{v}^({})_{{{}}}", self.s, k.join(","))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.rank();
        if n < 2 {
            return Err(Error::InvalidLabel(format!(
                "{self}: rank must be at least 2"
            )));
        }
        if matches!(self.variant, Variant::S | Variant::Stilde) {
            if self.k[n - 1] != 0 {
                return Err(Error::InvalidLabel(format!(
                    "{self}: S labels need k_n = 0"
                )));
            }
            if self.k[n - 2] == 0 {
                return Err(Error::InvalidLabel(format!(
                    "{self}: S labels need k_(n-1) >= 1"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for ModuleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k: Vec<String> = self.k.iter().map(|x| x.to_string()).collect();
        write!(f, "{}:{}:{}", self.variant.name(), self.s, k.join(","))
    }
}

impl FromStr for ModuleLabel {
    type Err = Error;

    /// `VARIANT:s:k1,..,kn` with VARIANT one of `T`, `Tt`/`T~`/`Ttilde`, `S`, `St`/`S~`/`Stilde`.
    fn from_str(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.trim().split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidLabel(format!(
                "expected VARIANT:s:k1,..,kn, got {text:?}"
            )));
        }
        let variant = match parts[0] {
            "T" => Variant::T,
            "Tt" | "T~" | "Ttilde" => Variant::Ttilde,
            "S" => Variant::S,
            "St" | "S~" | "Stilde" => Variant::Stilde,
            other => return Err(Error::InvalidLabel(format!("unknown variant {other:?}"))),
        };
        let s = parts[1]
            .parse()
            .map_err(|_| Error::InvalidLabel(format!("bad shift {:?}", parts[1])))?;
        let k = parse_k(parts[2])
            .map_err(|_| Error::InvalidLabel(format!("bad k-vector {:?}", parts[2])))?;
        let l = ModuleLabel { variant, s, k };
        l.validate()?;
        Ok(l)
    }
}

/// `1,0,2` -> `[1, 0, 2]`.
pub fn parse_k(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad entry {x:?} in {s:?}")))
        })
        .collect()
}

fn ttilde_hw(s: i32, k: &[u32]) -> Monomial {
    let n = k.len();
    let kn = k[n - 1] as i32;
    let mut fs = vec![];
    for p in 0..kn {
        fs.push((n, s + 4 * p, 1));
    }
    let mut acc = 0i32;
    for j in 1..n {
        let node = n - j;
        let kj = k[node - 1] as i32;
        let base = s + 4 * kn + 2 * acc + j as i32;
        for i in 0..kj {
            fs.push((node, base + 2 * i, 1));
        }
        acc += kj;
    }
    Monomial::from_factors(fs)
}

/// Partner vector of an S label: the prefix `u = (k_1..k_{n-2})` loses two
/// units at its last nonzero entry `l` if `u_l >= 2`, and one unit at `l`
/// and one at the previous nonzero entry (if any) if `u_l = 1`.
pub fn s_partner(k: &[u32]) -> Vec<u32> {
    let n = k.len();
    let mut u: Vec<u32> = k[..n - 2].to_vec();
    if let Some(l) = u.iter().rposition(|&x| x != 0) {
        if u[l] >= 2 {
            u[l] -= 2;
        } else {
            u[l] = 0;
            if let Some(m) = u[..l].iter().rposition(|&x| x != 0) {
                u[m] -= 1;
            }
        }
    }
    u.extend([0, 0]);
    u
}

/// Highest monomial of the module named by `label`.
pub fn highest_weight(label: &ModuleLabel, cd: &CartanData) -> Result<Monomial> {
    label.validate()?;
    if label.rank() != cd.rank {
        return Err(Error::InvalidLabel(format!(
            "{label} has rank {} but the algebra has rank {}",
            label.rank(),
            cd.rank
        )));
    }
    let tilde = match label.variant {
        Variant::Ttilde => ttilde_hw(label.s, &label.k),
        Variant::T => return Ok(ttilde_hw(label.s, &label.k).negate_shifts()),
        Variant::Stilde | Variant::S => {
            let n = label.rank();
            let partner = s_partner(&label.k);
            let m = ttilde_hw(label.s, &label.k).mul(&ttilde_hw(
                label.s + 2 * label.k[n - 2] as i32 + 4,
                &partner,
            ));
            if label.variant == Variant::S {
                return Ok(m.negate_shifts());
            }
            m
        }
    };
    Ok(tilde)
}

/// Whether a label lies in one of the families known to be special
/// (T with `k_n = 0`; T~ and S~ under the prefix-sum condition).
pub fn in_special_theorem(label: &ModuleLabel) -> bool {
    let n = label.rank();
    let k = &label.k;
    match label.variant {
        Variant::T => k[n - 1] == 0,
        Variant::Ttilde => {
            if k[n - 1] == 0 {
                return false;
            }
            prefix_condition(&k[..n - 1], n)
        }
        Variant::Stilde => k[n - 1] == 0 && k[n - 2] >= 1 && prefix_condition(&k[..n - 2], n),
        Variant::S => false,
    }
}

/// With `l` the last nonzero index of `k` (1-based), `k_1 + .. + k_{l-1} <= n - l + 1`.
fn prefix_condition(k: &[u32], n: usize) -> bool {
    match k.iter().rposition(|&x| x != 0) {
        None => true,
        Some(l0) => {
            let l = l0 + 1;
            let sum: u32 = k[..l0].iter().sum();
            sum as usize <= n - l + 1
        }
    }
}

/// Whether a label is known to be anti-special (mirror image of the special families).
pub fn in_anti_special_theorem(label: &ModuleLabel) -> bool {
    match label.variant {
        Variant::T | Variant::S => in_special_theorem(&label.mirror()),
        Variant::Ttilde => label.kn() == 0,
        Variant::Stilde => false,
    }
}

/// All special-theorem labels of rank `n` at shift 0 with `sum(k) <= max_sum`,
/// excluding the trivial one.
pub fn special_family_labels(n: usize, max_sum: u32) -> Vec<ModuleLabel> {
    let mut out = vec![];
    for k in k_vectors(n, max_sum) {
        if k.iter().all(|&x| x == 0) {
            continue;
        }
        for v in [Variant::T, Variant::Ttilde, Variant::Stilde] {
            let l = ModuleLabel::new(v, 0, k.clone());
            if l.validate().is_ok() && in_special_theorem(&l) {
                out.push(l);
            }
        }
    }
    out.sort();
    out
}

/// Every `k` in `Z_{>=0}^n` with `sum(k) <= max_sum`.
pub fn k_vectors(n: usize, max_sum: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for x in 0..=left {
            cur.push(x);
            rec(n, left - x, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    rec(n, max_sum, &mut vec![], &mut out);
    out
}

// ---------------------------------------------------------------------------
// Equation catalog

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Eqn1,
    Eqn2,
    Eqn3,
    Eqn4,
    Eqn511,
    Eqn512,
    Eqn5211,
    Eqn5221,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Eqn1,
        Family::Eqn2,
        Family::Eqn3,
        Family::Eqn4,
        Family::Eqn511,
        Family::Eqn512,
        Family::Eqn5211,
        Family::Eqn5221,
    ];

    fn names(self) -> (&'static str, &'static str) {
        match self {
            Family::Eqn1 => ("eqn1", "eqn6"),
            Family::Eqn2 => ("eqn2", "eqn7"),
            Family::Eqn3 => ("eqn3", "eqn8"),
            Family::Eqn4 => ("eqn4", "eqn9"),
            Family::Eqn511 => ("eqn511", "eqn511d"),
            Family::Eqn512 => ("eqn512", "eqn512d"),
            Family::Eqn5211 => ("eqn5211", "eqn5211d"),
            Family::Eqn5221 => ("eqn5221", "eqn5221d"),
        }
    }

    /// Families whose modules carry `k_n >= 1` on the T~ side.
    pub fn is_tilde(self) -> bool {
        matches!(
            self,
            Family::Eqn511 | Family::Eqn512 | Family::Eqn5211 | Family::Eqn5221
        )
    }
}

/// A family of the system (`dual = false`) or of the dual system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FamilyId {
    pub family: Family,
    pub dual: bool,
}

impl FamilyId {
    pub fn primal(family: Family) -> Self {
        FamilyId {
            family,
            dual: false,
        }
    }

    pub fn dual(family: Family) -> Self {
        FamilyId { family, dual: true }
    }

    pub fn name(self) -> &'static str {
        let (p, d) = self.family.names();
        if self.dual {
            d
        } else {
            p
        }
    }

    pub fn all() -> Vec<FamilyId> {
        Family::ALL
            .iter()
            .flat_map(|&f| [FamilyId::primal(f), FamilyId::dual(f)])
            .collect()
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FamilyId::all()
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown family {s:?}")))
    }
}

/// Parameters of one equation. `k` is the k-vector of the second left-hand
/// module; the indices `i, j, l, m` are inferred from `k` when absent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqParams {
    pub n: usize,
    pub s: i32,
    pub k: Vec<u32>,
    pub i: Option<usize>,
    pub j: Option<usize>,
    pub l: Option<usize>,
    pub m: Option<usize>,
}

impl EqParams {
    pub fn new(s: i32, k: Vec<u32>) -> Self {
        EqParams {
            n: k.len(),
            s,
            k,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquationInstance {
    pub family: FamilyId,
    pub n: usize,
    pub s: i32,
    pub k: Vec<u32>,
    /// Resolved indices such as `("i", 2)`.
    pub indices: Vec<(String, usize)>,
    pub lhs: [ModuleLabel; 2],
    pub rhs_first: [ModuleLabel; 2],
    pub rhs_second: Vec<ModuleLabel>,
}

impl EquationInstance {
    pub fn labels(&self) -> Vec<&ModuleLabel> {
        self.lhs
            .iter()
            .chain(self.rhs_first.iter())
            .chain(self.rhs_second.iter())
            .collect()
    }

    /// Slot-by-slot image under the label mirror `T <-> T~`, `S <-> S~`.
    pub fn mirror(&self) -> EquationInstance {
        let mir = |l: &ModuleLabel| l.mirror();
        EquationInstance {
            family: FamilyId {
                family: self.family.family,
                dual: !self.family.dual,
            },
            n: self.n,
            s: self.s,
            k: self.k.clone(),
            indices: self.indices.clone(),
            lhs: [mir(&self.lhs[0]), mir(&self.lhs[1])],
            rhs_first: [mir(&self.rhs_first[0]), mir(&self.rhs_first[1])],
            rhs_second: self.rhs_second.iter().map(mir).collect(),
        }
    }

    pub fn pretty(&self) -> String {
        let b = |l: &ModuleLabel| format!("[{}]", l.pretty());
        let r2: Vec<String> = self.rhs_second.iter().map(b).collect();
        format!(
            "{}{} = {}{} + {}",
            b(&self.lhs[0]),
            b(&self.lhs[1]),
            b(&self.rhs_first[0]),
            b(&self.rhs_first[1]),
            r2.join("")
        )
    }
}

fn violated(msg: impl Into<String>) -> Error {
    Error::ConstraintViolated(msg.into())
}

fn with(k: &[u32], changes: &[(usize, i64)]) -> Result<Vec<u32>> {
    let mut v: Vec<i64> = k.iter().map(|&x| x as i64).collect();
    for &(pos, d) in changes {
        v[pos - 1] += d;
    }
    v.into_iter()
        .map(|x| {
            u32::try_from(x).map_err(|_| violated("an entry of a label would become negative"))
        })
        .collect()
}

fn set(k: &[u32], assigns: &[(usize, u32)]) -> Vec<u32> {
    let mut v = k.to_vec();
    for &(pos, x) in assigns {
        v[pos - 1] = x;
    }
    v
}

fn first_nonzero(k: &[u32], from: usize, to: usize) -> Option<usize> {
    (from..=to).find(|&p| k[p - 1] != 0)
}

fn last_nonzero(k: &[u32], from: usize, to: usize) -> Option<usize> {
    (from..=to).rev().find(|&p| p >= 1 && k[p - 1] != 0)
}

fn check_index(given: Option<usize>, inferred: Option<usize>, name: &str) -> Result<usize> {
    match (given, inferred) {
        (Some(g), Some(i)) if g == i => Ok(g),
        (Some(g), _) => Err(violated(format!(
            "index {name}={g} does not match the k-vector"
        ))),
        (None, Some(i)) => Ok(i),
        (None, None) => Err(violated(format!(
            "cannot determine index {name} from the k-vector"
        ))),
    }
}

/// Fills the six label slots of one equation.
pub fn make_equation(fid: FamilyId, p: &EqParams) -> Result<EquationInstance> {
    let n = p.n;
    if n < 3 {
        return Err(violated("the system needs n >= 3"));
    }
    if p.k.len() != n {
        return Err(violated(format!(
            "k has {} entries, expected {n}",
            p.k.len()
        )));
    }
    let k = &p.k;
    let s = p.s;
    let kk = |i: usize| k[i - 1];
    let t = |v: Vec<u32>| ModuleLabel::t(s, v);
    let mut idx = vec![];
    let (lhs, rhs_first, rhs_second) = match fid.family {
        Family::Eqn1 => {
            if kk(n) != 0 {
                return Err(violated("eqn1 needs k_n = 0"));
            }
            if kk(1) < 1 || kk(2) < 1 {
                return Err(violated("eqn1 needs k_1, k_2 >= 1"));
            }
            let mut r2b = set(k, &[(1, 0)]);
            r2b[1] = kk(1) + kk(2);
            (
                [t(with(k, &[(2, -1)])?), t(k.clone())],
                [t(with(k, &[(1, -1)])?), t(with(k, &[(1, 1), (2, -1)])?)],
                vec![t(set(&with(k, &[(2, -1)])?, &[(1, 0)])), t(r2b)],
            )
        }
        Family::Eqn2 => {
            if kk(n) != 0 {
                return Err(violated("eqn2 needs k_n = 0"));
            }
            let i = check_index(p.i, first_nonzero(k, 1, n - 1), "i")?;
            if !(1 < i && i <= n - 2) {
                return Err(violated(format!("eqn2 needs 1 < i <= n-2, got i={i}")));
            }
            if (1..i).any(|q| kk(q) != 0) || kk(i) < 1 || kk(i + 1) < 1 {
                return Err(violated(
                    "eqn2 needs k_1..k_(i-1) = 0 and k_i, k_(i+1) >= 1",
                ));
            }
            idx.push(("i".to_string(), i));
            (
                [t(with(k, &[(i + 1, -1)])?), t(k.clone())],
                [t(with(k, &[(i, 1), (i + 1, -1)])?), t(with(k, &[(i, -1)])?)],
                vec![
                    t(set(k, &[(i, 0), (i + 1, kk(i) + kk(i + 1))])),
                    t(set(k, &[(i - 1, kk(i)), (i, 0), (i + 1, kk(i + 1) - 1)])),
                ],
            )
        }
        Family::Eqn3 => {
            if kk(n) != 0 {
                return Err(violated("eqn3 needs k_n = 0"));
            }
            let j = check_index(p.j, first_nonzero(k, 2, n - 1), "j")?;
            if !(2 < j && j < n) {
                return Err(violated(format!("eqn3 needs 2 < j <= n-1, got j={j}")));
            }
            if (2..j).any(|q| kk(q) != 0) || kk(1) < 1 || kk(j) < 1 {
                return Err(violated("eqn3 needs k_1, k_j >= 1 and k_2..k_(j-1) = 0"));
            }
            idx.push(("j".to_string(), j));
            (
                [t(with(k, &[(j, -1)])?), t(k.clone())],
                [t(with(k, &[(1, 1), (j, -1)])?), t(with(k, &[(1, -1)])?)],
                vec![
                    t(set(k, &[(1, 0), (2, kk(1))])),
                    t(set(&with(k, &[(j, -1)])?, &[(1, 0)])),
                ],
            )
        }
        Family::Eqn4 => {
            if kk(n) != 0 {
                return Err(violated("eqn4 needs k_n = 0"));
            }
            let i = check_index(p.i, first_nonzero(k, 1, n - 1), "i")?;
            let j = check_index(p.j, first_nonzero(k, i + 1, n - 1), "j")?;
            if !(2 < i + 1 && i + 1 < j && j < n) {
                return Err(violated(format!(
                    "eqn4 needs 2 < i+1 < j <= n-1, got i={i}, j={j}"
                )));
            }
            if (1..i).chain(i + 1..j).any(|q| kk(q) != 0) || kk(i) < 1 || kk(j) < 1 {
                return Err(violated(
                    "eqn4 needs k_i, k_j >= 1 and zeros elsewhere before j",
                ));
            }
            idx.push(("i".to_string(), i));
            idx.push(("j".to_string(), j));
            (
                [t(with(k, &[(j, -1)])?), t(k.clone())],
                [t(with(k, &[(i, -1)])?), t(with(k, &[(i, 1), (j, -1)])?)],
                vec![
                    t(set(k, &[(i, 0), (i + 1, kk(i))])),
                    t(set(&with(k, &[(j, -1)])?, &[(i, 0), (i - 1, kk(i))])),
                ],
            )
        }
        Family::Eqn511 | Family::Eqn512 | Family::Eqn5211 | Family::Eqn5221 => {
            return tilde_equation(fid, p).map(|e| if fid.dual { e.mirror_into(fid) } else { e });
        }
    };
    let eq = EquationInstance {
        family: FamilyId::primal(fid.family),
        n,
        s,
        k: k.clone(),
        indices: idx,
        lhs,
        rhs_first,
        rhs_second,
    };
    Ok(if fid.dual { eq.mirror_into(fid) } else { eq })
}

impl EquationInstance {
    fn mirror_into(self, fid: FamilyId) -> EquationInstance {
        let mut e = self.mirror();
        e.family = fid;
        e
    }
}

fn tilde_equation(fid: FamilyId, p: &EqParams) -> Result<EquationInstance> {
    let n = p.n;
    let k = &p.k;
    let s = p.s;
    let kn = k[n - 1];
    if kn < 1 {
        return Err(violated(format!("{} needs k_n >= 1", fid.family.names().0)));
    }
    let kn_i = kn as i64;
    // k-vector built from a prefix of length n-2 and the last two entries.
    let full = |u: &[u32], a: u32, b: u32| -> Vec<u32> {
        let mut v = u.to_vec();
        v.push(a);
        v.push(b);
        v
    };
    let tt = |sh: i32, v: Vec<u32>| ModuleLabel::tt(sh, v);
    let u: Vec<u32> = k[..n - 2].to_vec();
    let mut idx = vec![];
    let (lhs, rhs_first, rhs_second) = match fid.family {
        Family::Eqn511 => {
            if k[n - 2] != 1 {
                return Err(violated("eqn511 needs k_(n-1) = 1"));
            }
            let sum: u32 = u.iter().sum();
            if sum > 2 {
                return Err(violated("eqn511 needs k_1 + .. + k_m <= 2"));
            }
            let v = drop_last_unit(&u, p.m, n - 2, &mut idx)?;
            (
                [tt(s, full(&v, 0, kn)), tt(s - 4, full(&u, 1, kn))],
                [tt(s, full(&u, 1, kn - 1)), tt(s - 4, full(&v, 0, kn + 1))],
                vec![
                    tt(s + 4 * kn as i32, full(&v, 0, 0)),
                    tt(s - 4, full(&u, 2 * kn + 1, 0)),
                ],
            )
        }
        Family::Eqn512 => {
            let c = k[n - 2];
            if c < 2 {
                return Err(violated("eqn512 needs k_(n-1) >= 2"));
            }
            let sum: u32 = u.iter().sum();
            if sum > 2 {
                return Err(violated("eqn512 needs k_1 + .. + k_m <= 2"));
            }
            (
                [tt(s, full(&u, c - 2, kn)), tt(s - 4, full(&u, c, kn))],
                [
                    tt(s, full(&u, c, kn - 1)),
                    tt(s - 4, full(&u, c - 2, kn + 1)),
                ],
                vec![
                    tt(s + 4 * kn as i32, full(&u, c - 2, 0)),
                    tt(s - 4, full(&u, 2 * kn + c, 0)),
                ],
            )
        }
        Family::Eqn5211 | Family::Eqn5221 => {
            if k[n - 2] != 0 {
                return Err(violated("this family needs k_(n-1) = 0"));
            }
            let l = check_index(p.l, last_nonzero(k, 1, n - 2), "l")?;
            if (l + 1..=n - 2).any(|q| k[q - 1] != 0) {
                return Err(violated("entries between l and n-1 must vanish"));
            }
            let kl = k[l - 1];
            let two = fid.family == Family::Eqn5221;
            if !two && kl != 1 {
                return Err(violated("eqn5211 needs k_l = 1"));
            }
            if two && kl < 2 {
                return Err(violated("eqn5221 needs k_l >= 2"));
            }
            let prefix: Vec<u32> = k[..l - 1].to_vec();
            let sum: u32 = prefix.iter().sum();
            if sum as usize > n - l + 1 {
                return Err(violated(format!(
                    "needs k_1 + .. + k_m <= n - l + 1 = {}",
                    n - l + 1
                )));
            }
            idx.push(("l".to_string(), l));
            let v: Vec<u32> = if two {
                let mut v = u.clone();
                v[l - 1] -= 2;
                if let Some(m) = p.m.or_else(|| last_nonzero(&prefix, 1, l - 1)) {
                    idx.push(("m".to_string(), m));
                }
                v
            } else {
                let mut pv = drop_last_unit(&prefix, p.m, l - 1, &mut idx)?;
                pv.resize(n - 2, 0);
                pv
            };
            (
                [tt(s, full(&v, 0, kn)), tt(s - 4, full(&u, 0, kn))],
                [tt(s, full(&u, 0, kn - 1)), tt(s - 4, full(&v, 0, kn + 1))],
                vec![ModuleLabel::st(s - 4, full(&u, 2 * kn, 0))],
            )
        }
        _ => unreachable!(),
    };
    let _ = kn_i;
    Ok(EquationInstance {
        family: FamilyId::primal(fid.family),
        n,
        s,
        k: k.clone(),
        indices: idx,
        lhs,
        rhs_first,
        rhs_second,
    })
}

/// `u - e_m` with `m` the last nonzero index of `u` (up to `to`); the zero
/// vector is returned unchanged (empty prefix).
fn drop_last_unit(
    u: &[u32],
    given: Option<usize>,
    to: usize,
    idx: &mut Vec<(String, usize)>,
) -> Result<Vec<u32>> {
    let inferred = last_nonzero(u, 1, to);
    if inferred.is_none() && given.is_none() {
        return Ok(u.to_vec());
    }
    let m = check_index(given, inferred, "m")?;
    idx.push(("m".to_string(), m));
    let mut v = u.to_vec();
    v[m - 1] -= 1;
    Ok(v)
}

// ---------------------------------------------------------------------------
// Printed example suites

/// One printed equation together with the catalog parameters it instantiates.
#[derive(Clone, Debug)]
pub struct PrintedEquation {
    pub family: FamilyId,
    pub params: EqParams,
    /// `[m][m]=[m][m]+[m]..` with monomials in the `i_s^e` syntax.
    pub printed: &'static str,
}

fn pe(family: FamilyId, s: i32, k: &[u32], printed: &'static str) -> PrintedEquation {
    PrintedEquation {
        family,
        params: EqParams::new(s, k.to_vec()),
        printed,
    }
}

pub fn c3_examples() -> Vec<PrintedEquation> {
    use Family::*;
    let p = FamilyId::primal;
    vec![
        pe(p(Eqn1), 0, &[1, 1, 0], "[1_-2][1_-4 2_-1]=[1_-4 1_-2][2_-1]+[2_-3 2_-1]"),
        pe(p(Eqn1), 0, &[2, 1, 0], "[1_-4 1_-2][1_-6 1_-4 2_-1]=[1_-4 2_-1][1_-6 1_-4 1_-2]+[2_-5 2_-3 2_-1]"),
        pe(p(Eqn511), -2, &[0, 1, 1], "[3_-2][3_-6 2_-1]=[2_-1][3_-6 3_-2]+[2_-5 2_-3 2_-1]"),
        pe(p(Eqn511), -6, &[0, 1, 2], "[3_-6 3_-2][3_-10 3_-6 2_-1]=[3_-6 2_-1][3_-10 3_-6 3_-2]+[2_-9 2_-7 2_-5 2_-3 2_-1]"),
        pe(p(Eqn5211), -2, &[1, 0, 1], "[3_-6 1_0][3_-2]=[1_0][3_-6 3_-2]+[2_-5 2_-3 1_0]"),
        pe(p(Eqn5211), -6, &[1, 0, 2], "[3_-6 3_-2][3_-10 3_-6 1_0]=[3_-6 1_0][3_-10 3_-6 3_-2]+[2_-3 2_-9 2_-7 2_-5 1_0]"),
        pe(p(Eqn511), -4, &[1, 1, 1], "[3_-4][3_-8 2_-3 1_0]=[2_-3 1_0][3_-8 3_-4]+[2_-7 2_-5 2_-3 1_0]"),
        pe(
            p(Eqn511),
            -8,
            &[1, 1, 2],
            "[3_-8 3_-4][3_-12 3_-8 2_-3 1_0]=[3_-8 2_-3 1_0][3_-12 3_-8 3_-4]+[2_-11 2_-9 2_-7 2_-5 2_-3 1_0]",
        ),
    ]
}

pub fn c4_examples() -> Vec<PrintedEquation> {
    let p = FamilyId::primal(Family::Eqn5211);
    vec![
        pe(p, -3, &[1, 0, 0, 1], "[4_-3][4_-7 1_0]=[1_0][4_-7 4_-3]+[3_-6 3_-4 1_0]"),
        pe(p, -5, &[1, 1, 0, 1], "[4_-5][4_-9 2_-3 1_0]=[2_-3 1_0][4_-9 4_-5]+[3_-8 3_-6 2_-3 1_0]"),
        pe(
            p,
            -7,
            &[2, 1, 0, 1],
            "[4_-7 1_0][4_-11 2_-5 1_-2 1_0]=[2_-5 1_-2 1_0][4_-11 4_-7 1_0]+[3_-10 3_-8 2_-5 1_-2 1_0^2]",
        ),
        pe(
            p,
            -9,
            &[3, 1, 0, 1],
            "[4_-9 1_-2 1_0][4_-13 2_-7 1_-4 1_-2 1_0]=[2_-7 1_-4 1_-2 1_0][4_-13 4_-9 1_-2 1_0]+[3_-12 3_-10 2_-7 1_-4 1_-2^2 1_0^2]",
        ),
    ]
}

/// The printed dual equations: mirrors of the eight C3 and first three C4 instances.
pub fn dual_examples() -> Vec<PrintedEquation> {
    let printed = [
        "[1_2][2_1 1_4]=[1_2 1_4][2_1]+[2_1 2_3]",
        "[1_2 1_4][2_1 1_4 1_6]=[2_1 1_4][1_2 1_4 1_6]+[2_1 2_3 2_5]",
        "[3_2][2_1 3_6]=[2_1][3_2 3_6]+[2_1 2_3 2_5]",
        "[3_2 3_6][2_1 3_6 3_10]=[2_1 3_6][3_2 3_6 3_10]+[2_1 2_3 2_5 2_7 2_9]",
        "[1_0 3_6][3_2]=[1_0][3_2 3_6]+[1_0 2_3 2_5]",
        "[3_2 3_6][1_0 3_6 3_10]=[1_0 3_6][3_2 3_6 3_10]+[1_0 2_3 2_5 2_7 2_9]",
        "[3_4][1_0 2_3 3_8]=[1_0 2_3][3_4 3_8]+[1_0 2_3 2_5 2_7]",
        "[3_4 3_8][1_0 2_3 3_8 3_12]=[1_0 2_3 3_8][3_4 3_8 3_12]+[1_0 2_3 2_5 2_7 2_9 2_11]",
        "[4_3][1_0 4_7]=[1_0][4_3 4_7]+[1_0 3_4 3_6]",
        "[4_5][1_0 2_3 4_9]=[1_0 2_3][4_5 4_9]+[1_0 2_3 3_6 3_8]",
        "[1_0 4_7][1_0 1_2 2_5 4_11]=[1_0 1_2 2_5][1_0 4_7 4_11]+[1_0^2 1_2 2_5 3_8 3_10]",
    ];
    let primal: Vec<PrintedEquation> = c3_examples()
        .into_iter()
        .chain(c4_examples().into_iter().take(3))
        .collect();
    primal
        .into_iter()
        .zip(printed)
        .map(|(p, text)| PrintedEquation {
            family: FamilyId::dual(p.family.family),
            params: p.params,
            printed: text,
        })
        .collect()
}

/// Instances at `n = 3, 4` with `sum(k) <= 3` covering every family, plus
/// the smallest `eqn4` instance (which needs `n = 5`).
pub fn table1_sample() -> Vec<(FamilyId, EqParams)> {
    use Family::*;
    let p = |f, s, k: &[u32]| (FamilyId::primal(f), EqParams::new(s, k.to_vec()));
    vec![
        p(Eqn1, 0, &[1, 1, 0]),
        p(Eqn1, 0, &[2, 1, 0]),
        p(Eqn1, 0, &[1, 2, 0]),
        p(Eqn511, 0, &[0, 1, 1]),
        p(Eqn511, 0, &[1, 1, 1]),
        p(Eqn511, 0, &[0, 1, 2]),
        p(Eqn512, 0, &[0, 2, 1]),
        p(Eqn5211, 0, &[1, 0, 1]),
        p(Eqn5211, 0, &[1, 0, 2]),
        p(Eqn5221, 0, &[2, 0, 1]),
        p(Eqn1, 0, &[1, 1, 0, 0]),
        p(Eqn2, 0, &[0, 1, 1, 0]),
        p(Eqn3, 0, &[1, 0, 1, 0]),
        p(Eqn511, 0, &[0, 0, 1, 1]),
        p(Eqn512, 0, &[0, 0, 2, 1]),
        p(Eqn5211, 0, &[1, 0, 0, 1]),
        p(Eqn5211, 0, &[1, 1, 0, 1]),
        p(Eqn5221, 0, &[0, 2, 0, 1]),
        p(Eqn5221, 0, &[2, 0, 0, 1]),
        p(Eqn4, 0, &[0, 1, 0, 1, 0]),
    ]
}

/// Parsed printed equation: monomials of the lhs, first rhs and second rhs brackets.
pub fn parse_printed(text: &str) -> Result<[Vec<Monomial>; 3]> {
    let (l, r) = text
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("no '=' in {text:?}")))?;
    let (r1, r2) = r
        .split_once('+')
        .ok_or_else(|| Error::Parse(format!("no '+' in {text:?}")))?;
    let brackets = |part: &str| -> Result<Vec<Monomial>> {
        part.split(']')
            .map(|b| b.trim().trim_start_matches('['))
            .filter(|b| !b.is_empty())
            .map(|b| {
                b.parse::<Monomial>()
                    .map_err(|e| Error::Parse(e.to_string()))
            })
            .collect()
    };
    Ok([brackets(l)?, brackets(r1)?, brackets(r2)?])
}

/// Checks that the catalog instance reproduces the printed highest weights
/// (as multisets per side, ignoring trivial factors).
pub fn matches_printed(eq: &EquationInstance, printed: &str, cd: &CartanData) -> Result<bool> {
    let want = parse_printed(printed)?;
    let groups: [Vec<&ModuleLabel>; 3] = [
        eq.lhs.iter().collect(),
        eq.rhs_first.iter().collect(),
        eq.rhs_second.iter().collect(),
    ];
    for (g, w) in groups.iter().zip(want.iter()) {
        let mut got: Vec<Monomial> = g
            .iter()
            .map(|l| highest_weight(l, cd))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|m| !m.is_one())
            .collect();
        let mut w: Vec<Monomial> = w.iter().filter(|m| !m.is_one()).cloned().collect();
        got.sort();
        w.sort();
        if got != w {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Character engine

/// How a character is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Frenkel–Mukhin from the highest monomial.
    Direct,
    /// `iota` applied to the Frenkel–Mukhin run of the shift-negated monomial.
    Mirror,
}

/// Computes and memoizes q-characters of simple modules. Characters are
/// stored up to translation of the spectral shift.
pub struct CharacterEngine {
    cd: CartanData,
    budget: usize,
    full_limit: u128,
    disk: Option<CharCache>,
    memo: Mutex<FxHashMap<Monomial, Arc<LaurentPoly>>>,
    classical: Mutex<FxHashMap<Monomial, Arc<ClassicalCharacter>>>,
}

/// Largest truncated character handed to the (quadratic) certificate.
pub const CERTIFY_LIMIT: usize = 2_000;

/// Where a truncated character came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationSource {
    /// Truncated run whose terms pass the truncation certificate.
    Certified,
    /// Truncated run of a module in one of the special families.
    SpecialFamily,
    /// Full character restricted to the region.
    Filtered,
}

/// Classical dimension above which `Auto` verification avoids full characters.
pub const DEFAULT_FULL_LIMIT: u128 = 1_000_000;

impl CharacterEngine {
    pub fn new(cd: CartanData) -> Self {
        CharacterEngine {
            cd,
            budget: DEFAULT_BUDGET,
            full_limit: DEFAULT_FULL_LIMIT,
            disk: None,
            memo: Mutex::new(FxHashMap::default()),
            classical: Mutex::new(FxHashMap::default()),
        }
    }

    pub fn with_full_limit(mut self, limit: u128) -> Self {
        self.full_limit = limit;
        self
    }

    /// Dimension of the classical module with the same highest weight; a
    /// lower bound for the size of the q-character.
    pub fn weyl_dimension(&self, m: &Monomial) -> u128 {
        self.cd.weyl_dimension(&m.weight(self.cd.rank))
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_disk_cache(mut self, c: Option<CharCache>) -> Self {
        self.disk = c;
        self
    }

    pub fn cartan(&self) -> &CartanData {
        &self.cd
    }

    /// Method guaranteed to apply for a label, if any.
    pub fn method_for(label: &ModuleLabel) -> Option<Method> {
        if in_special_theorem(label) {
            Some(Method::Direct)
        } else if in_anti_special_theorem(label) {
            Some(Method::Mirror)
        } else {
            None
        }
    }

    pub fn label_character(&self, label: &ModuleLabel) -> Result<Arc<LaurentPoly>> {
        let m = highest_weight(label, &self.cd)?;
        match Self::method_for(label) {
            Some(method) => self.character_with(&m, method),
            None => self.character(&m),
        }
    }

    /// Tries the direct run, then the mirrored one.
    pub fn character(&self, m: &Monomial) -> Result<Arc<LaurentPoly>> {
        match self.character_with(m, Method::Direct) {
            Err(Error::NonSpecialDetected(_)) => self.character_with(m, Method::Mirror),
            r => r,
        }
    }

    pub fn character_with(&self, m: &Monomial, method: Method) -> Result<Arc<LaurentPoly>> {
        if m.is_one() {
            return Ok(Arc::new(LaurentPoly::one()));
        }
        let shift = m.min_shift().unwrap();
        let base = m.translate(-shift);
        let cached = self.memo.lock().unwrap().get(&base).cloned();
        let base_char = match cached {
            Some(c) => c,
            None => {
                let c = Arc::new(self.compute(&base, method)?);
                self.memo.lock().unwrap().insert(base.clone(), c.clone());
                c
            }
        };
        if shift == 0 {
            Ok(base_char)
        } else {
            Ok(Arc::new(base_char.map_monomials(|x| x.translate(shift))))
        }
    }

    /// The terms of `chi(L(m))` whose `A^{-1}` factors all lie in `region`.
    ///
    /// A truncated Frenkel–Mukhin run agrees with the full run on the region
    /// (every ancestor of a monomial in the region is in the region), so it
    /// is used directly for labels of the special families. Other labels
    /// need a passing certificate, or fall back to filtering the full
    /// character.
    pub fn truncated_character(
        &self,
        label: &ModuleLabel,
        region: &TruncationRegion,
    ) -> Result<(LaurentPoly, TruncationSource)> {
        let m = highest_weight(label, &self.cd)?;
        if m.is_one() {
            return Ok((LaurentPoly::one(), TruncationSource::Certified));
        }
        let method = Self::method_for(label);
        if method != Some(Method::Mirror) {
            match frenkel_mukhin(&self.cd, &m, Some(region), self.budget) {
                Ok(q) => {
                    let multiplicity_free = q.poly.iter().all(|(_, c)| c == 1);
                    if multiplicity_free && q.len() <= CERTIFY_LIMIT {
                        let mons: Vec<Monomial> = q.poly.monomials().cloned().collect();
                        if certify_truncation(&self.cd, &m, region, &mons).ok {
                            return Ok((q.poly, TruncationSource::Certified));
                        }
                    }
                    if method == Some(Method::Direct) {
                        return Ok((q.poly, TruncationSource::SpecialFamily));
                    }
                }
                Err(Error::NonSpecialDetected(_)) if method.is_none() => {}
                Err(e) => return Err(e),
            }
        }
        let full = self.label_character(label)?;
        let filtered = full.filter(|t, _| {
            decompose_in_a_lattice(&self.cd, &t.div(&m))
                .is_some_and(|p| p.support().all(|(i, a)| region.contains(i, a)))
        });
        Ok((filtered, TruncationSource::Filtered))
    }

    /// Restriction of `chi(L(m))` to an ordinary character. Large modules are
    /// streamed and never stored.
    pub fn restricted_character(&self, label: &ModuleLabel) -> Result<Arc<ClassicalCharacter>> {
        let m = highest_weight(label, &self.cd)?;
        let n = self.cd.rank;
        let base = match m.min_shift() {
            Some(s) => m.translate(-s),
            None => {
                let mut c = ClassicalCharacter::default();
                c.add_term(vec![0; n], 1);
                return Ok(Arc::new(c));
            }
        };
        if let Some(c) = self.classical.lock().unwrap().get(&base).cloned() {
            return Ok(c);
        }
        let stored = self.memo.lock().unwrap().get(&base).cloned();
        let c = match stored {
            Some(q) => restrict_character(&q, n),
            None if self.weyl_dimension(&m) <= self.full_limit => {
                restrict_character(&*self.label_character(label)?, n)
            }
            None => {
                let stream = |mm: &Monomial, negate: bool| -> Result<ClassicalCharacter> {
                    let mut c = ClassicalCharacter::default();
                    frenkel_mukhin_streaming(&self.cd, mm, None, usize::MAX, |t, x| {
                        let mut w = t.weight(n);
                        if negate {
                            w.iter_mut().for_each(|v| *v = -*v);
                        }
                        c.add_term(w, x)
                    })?;
                    Ok(c)
                };
                match Self::method_for(label) {
                    Some(Method::Direct) => stream(&base, false)?,
                    Some(Method::Mirror) => stream(&base.negate_shifts(), true)?,
                    None => match stream(&base, false) {
                        Err(Error::NonSpecialDetected(_)) => stream(&base.negate_shifts(), true)?,
                        r => r?,
                    },
                }
            }
        };
        let c = Arc::new(c);
        self.classical.lock().unwrap().insert(base, c.clone());
        Ok(c)
    }

    fn compute(&self, base: &Monomial, method: Method) -> Result<LaurentPoly> {
        let key = CharCache::key(&self.cd, base, None);
        if let Some(d) = &self.disk {
            if let Some(q) = d.get(&key) {
                return Ok(q.poly);
            }
        }
        let q = match method {
            Method::Direct => frenkel_mukhin(&self.cd, base, None, self.budget)?,
            Method::Mirror => {
                let bar = base.negate_shifts();
                let q = frenkel_mukhin(&self.cd, &bar, None, self.budget)?;
                crate::qchar::QCharacter {
                    poly: iota(&q.poly, self.cd.rank),
                    highest: base.clone(),
                    ..q
                }
            }
        };
        if let Some(d) = &self.disk {
            d.put(&key, &q)?;
        }
        Ok(q.poly)
    }
}

// ---------------------------------------------------------------------------
// Verification

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DominantCensus {
    pub lhs: Vec<(String, i64)>,
    pub rhs_first: Vec<(String, i64)>,
    pub rhs_second: Vec<(String, i64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub family: String,
    pub n: usize,
    pub s: i32,
    pub k: Vec<u32>,
    pub equation: String,
    /// How the two sides were compared.
    pub mode: VerifyMode,
    /// Per slot: `full`, or the source of its truncated character.
    pub slot_sources: Vec<String>,
    /// Terms of the left-hand product (of its truncation in dominant mode).
    pub lhs_terms: usize,
    /// Monomials (dominant monomials in dominant mode) with nonzero
    /// coefficient in `lhs - rhs`.
    pub residual_terms: usize,
    /// At most ten residual terms, for diagnosis.
    pub residual_sample: Vec<(String, i64)>,
    pub dominant_census: DominantCensus,
    /// Restricted ordinary-character identity; `None` when not requested.
    pub classical_ok: Option<bool>,
    pub verdict: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    /// `Full` when every slot is small enough to store, `Dominant` otherwise.
    #[default]
    Auto,
    /// Every monomial of both sides.
    Full,
    /// Dominant monomials only, from certified truncated characters.
    Dominant,
}

impl FromStr for VerifyMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(VerifyMode::Auto),
            "full" => Ok(VerifyMode::Full),
            "dominant" => Ok(VerifyMode::Dominant),
            _ => Err(Error::Parse(format!(
                "unknown mode {s:?} (auto, full, dominant)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub mode: VerifyMode,
    pub classical: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            mode: VerifyMode::Auto,
            classical: true,
        }
    }
}

type Weight = Vec<i64>;

/// Terms of a character grouped by weight.
struct Graded(BTreeMap<Weight, Vec<(Monomial, i64)>>);

impl Graded {
    fn new(p: &LaurentPoly, n: usize) -> Self {
        let mut g: BTreeMap<Weight, Vec<(Monomial, i64)>> = BTreeMap::new();
        for (m, c) in p.iter() {
            g.entry(m.weight(n)).or_default().push((m.clone(), c));
        }
        Graded(g)
    }
}

/// Weight space `w` of the product of at most two graded characters.
fn weight_space(factors: &[Graded], w: &Weight) -> Result<FxHashMap<Monomial, i64>> {
    let mut out: FxHashMap<Monomial, i64> = FxHashMap::default();
    match factors {
        [] => {
            if w.iter().all(|&x| x == 0) {
                out.insert(Monomial::one(), 1);
            }
        }
        [a] => {
            if let Some(t) = a.0.get(w) {
                out.extend(t.iter().cloned());
            }
        }
        [a, b] => {
            for (w1, t1) in &a.0 {
                let w2: Weight = w.iter().zip(w1).map(|(x, y)| x - y).collect();
                if let Some(t2) = b.0.get(&w2) {
                    for (m1, c1) in t1 {
                        for (m2, c2) in t2 {
                            *out.entry(m1.mul(m2)).or_insert(0) += c1 * c2;
                        }
                    }
                }
            }
            out.retain(|_, c| *c != 0);
        }
        _ => {
            return Err(Error::Unsupported(
                "products of more than two nontrivial modules".into(),
            ))
        }
    }
    Ok(out)
}

fn target_weights(factors: &[Graded], into: &mut std::collections::BTreeSet<Weight>, n: usize) {
    match factors {
        [] => {
            into.insert(vec![0; n]);
        }
        [a] => into.extend(a.0.keys().cloned()),
        [a, b] => {
            for w1 in a.0.keys() {
                for w2 in b.0.keys() {
                    into.insert(w1.iter().zip(w2).map(|(x, y)| x + y).collect());
                }
            }
        }
        _ => {}
    }
}

/// Outcome of the weight-by-weight comparison of both sides.
struct Comparison {
    /// Per slot, how its character was obtained.
    sources: Vec<String>,
    lhs_terms: usize,
    residual_terms: usize,
    residual_sample: Vec<(Monomial, i64)>,
    dominant: [Vec<(Monomial, i64)>; 3],
}

/// Compares `lhs` with `rhs_first + rhs_second` one weight space at a time,
/// so that no full product is ever held in memory.
fn compare_full(eq: &EquationInstance, engine: &CharacterEngine) -> Result<Comparison> {
    let n = engine.cartan().rank;
    let labels = eq.labels();
    let chars: Vec<Arc<LaurentPoly>> = labels
        .iter()
        .map(|l| engine.label_character(l))
        .collect::<Result<Vec<_>>>()?;
    let group = |cs: &[Arc<LaurentPoly>]| -> Vec<Graded> {
        cs.iter()
            .filter(|c| !(c.len() == 1 && c.coef(&Monomial::one()) == 1))
            .map(|c| Graded::new(c, n))
            .collect()
    };
    let sides = [group(&chars[0..2]), group(&chars[2..4]), group(&chars[4..])];
    let mut targets = std::collections::BTreeSet::new();
    for side in &sides {
        target_weights(side, &mut targets, n);
    }
    let targets: Vec<Weight> = targets.into_iter().collect();

    let zero = || Comparison {
        sources: vec![],
        lhs_terms: 0,
        residual_terms: 0,
        residual_sample: vec![],
        dominant: [vec![], vec![], vec![]],
    };
    let merge = |mut a: Comparison, b: Comparison| {
        a.lhs_terms += b.lhs_terms;
        a.residual_terms += b.residual_terms;
        a.residual_sample.extend(b.residual_sample);
        a.residual_sample.sort();
        a.residual_sample.truncate(10);
        for (x, y) in a.dominant.iter_mut().zip(b.dominant) {
            x.extend(y);
        }
        a
    };
    let mut out = targets
        .par_iter()
        .map(|w| -> Result<Comparison> {
            let dominant_weight = w.iter().all(|&x| x >= 0);
            let mut spaces = vec![];
            for side in &sides {
                spaces.push(weight_space(side, w)?);
            }
            let mut c = zero();
            c.lhs_terms = spaces[0].len();
            if dominant_weight {
                for (d, sp) in c.dominant.iter_mut().zip(&spaces) {
                    d.extend(
                        sp.iter()
                            .filter(|(m, _)| m.is_dominant())
                            .map(|(m, &x)| (m.clone(), x)),
                    );
                }
            }
            let mut res = std::mem::take(&mut spaces[0]);
            for sp in &spaces[1..] {
                for (m, x) in sp {
                    *res.entry(m.clone()).or_insert(0) -= x;
                }
            }
            res.retain(|_, x| *x != 0);
            c.residual_terms = res.len();
            c.residual_sample = res.into_iter().collect();
            c.residual_sample.sort();
            c.residual_sample.truncate(10);
            Ok(c)
        })
        .try_reduce(zero, |a, b| Ok(merge(a, b)))?;
    for d in out.dominant.iter_mut() {
        d.sort();
    }
    out.sources = vec!["full".to_string(); labels.len()];
    Ok(out)
}

/// Compares the dominant monomials of both sides.
///
/// A virtual module vanishes exactly when every dominant monomial of its
/// q-character has coefficient zero (take a maximal simple constituent), so
/// this decides the identity. A dominant monomial `M prod A_{i,a}^{-1}` of a
/// product with highest monomial `M` has every `a <= max shift of M - d_i`,
/// because the rightmost variable of a product of `A^{-1}`'s is always
/// inverted; each factor is therefore only needed in that region.
fn compare_dominant(eq: &EquationInstance, engine: &CharacterEngine) -> Result<Comparison> {
    let cd = engine.cartan();
    let sides: [Vec<&ModuleLabel>; 3] = [
        eq.lhs.iter().collect(),
        eq.rhs_first.iter().collect(),
        eq.rhs_second.iter().collect(),
    ];
    let mut dominant: [Vec<(Monomial, i64)>; 3] = [vec![], vec![], vec![]];
    let mut lhs_terms = 0;
    let mut sources = vec![];
    for (idx, (side, out)) in sides.iter().zip(dominant.iter_mut()).enumerate() {
        let top = side.iter().try_fold(Monomial::one(), |acc, l| {
            Ok::<_, Error>(acc.mul(&highest_weight(l, cd)?))
        })?;
        let Some(b) = top.max_shift() else {
            sources.extend(side.iter().map(|_| "trivial".to_string()));
            *out = vec![(Monomial::one(), 1)];
            continue;
        };
        let region = TruncationRegion::PerNode {
            bounds: cd.nodes().map(|i| b - cd.di(i)).collect(),
        };
        let mut prod = LaurentPoly::one();
        for l in side {
            let (c, src) = engine.truncated_character(l, &region)?;
            sources.push(
                serde_json::to_value(src)
                    .unwrap()
                    .as_str()
                    .unwrap()
                    .to_string(),
            );
            prod = prod.mul(&c);
        }
        if idx == 0 {
            lhs_terms = prod.len();
        }
        *out = enumerate_dominant(&prod);
    }
    let mut res: BTreeMap<Monomial, i64> = BTreeMap::new();
    for (m, c) in &dominant[0] {
        *res.entry(m.clone()).or_insert(0) += c;
    }
    for (m, c) in dominant[1].iter().chain(&dominant[2]) {
        *res.entry(m.clone()).or_insert(0) -= c;
    }
    res.retain(|_, c| *c != 0);
    let residual_sample: Vec<(Monomial, i64)> =
        res.iter().take(10).map(|(m, c)| (m.clone(), *c)).collect();
    Ok(Comparison {
        sources,
        lhs_terms,
        residual_terms: res.len(),
        residual_sample,
        dominant,
    })
}

fn census(d: &[(Monomial, i64)]) -> Vec<(String, i64)> {
    d.iter().map(|(m, c)| (m.to_string(), *c)).collect()
}

/// Checks `lhs_1 lhs_2 = rhs_1 rhs_2 + rhs_3 (rhs_4)` exactly, and the
/// restricted identity of ordinary characters slot by slot.
pub fn verify_equation(
    eq: &EquationInstance,
    engine: &CharacterEngine,
) -> Result<VerificationReport> {
    verify_equation_with(eq, engine, VerifyOptions::default())
}

pub fn resolve_mode(
    eq: &EquationInstance,
    engine: &CharacterEngine,
    mode: VerifyMode,
) -> Result<VerifyMode> {
    if mode != VerifyMode::Auto {
        return Ok(mode);
    }
    for l in eq.labels() {
        if engine.weyl_dimension(&highest_weight(l, engine.cartan())?) > engine.full_limit {
            return Ok(VerifyMode::Dominant);
        }
    }
    Ok(VerifyMode::Full)
}

pub fn verify_equation_with(
    eq: &EquationInstance,
    engine: &CharacterEngine,
    opts: VerifyOptions,
) -> Result<VerificationReport> {
    let mode = resolve_mode(eq, engine, opts.mode)?;
    let pr = match mode {
        VerifyMode::Dominant => compare_dominant(eq, engine)?,
        _ => compare_full(eq, engine)?,
    };
    let sample: Vec<(String, i64)> = pr
        .residual_sample
        .iter()
        .map(|(m, c)| (m.to_string(), *c))
        .collect();
    let classical_ok = if opts.classical {
        Some(classical_identity(eq, engine)?)
    } else {
        None
    };

    Ok(VerificationReport {
        family: eq.family.name().to_string(),
        n: eq.n,
        s: eq.s,
        k: eq.k.clone(),
        equation: eq.pretty(),
        mode,
        slot_sources: pr.sources.clone(),
        lhs_terms: pr.lhs_terms,
        residual_terms: pr.residual_terms,
        residual_sample: sample,
        dominant_census: DominantCensus {
            lhs: census(&pr.dominant[0]),
            rhs_first: census(&pr.dominant[1]),
            rhs_second: census(&pr.dominant[2]),
        },
        classical_ok,
        verdict: pr.residual_terms == 0 && classical_ok != Some(false),
    })
}

/// The ordinary-character identity obtained by restricting every slot.
pub fn classical_identity(eq: &EquationInstance, engine: &CharacterEngine) -> Result<bool> {
    let n = engine.cartan().rank;
    let res: Vec<Arc<ClassicalCharacter>> = eq
        .labels()
        .into_iter()
        .map(|l| engine.restricted_character(l))
        .collect::<Result<_>>()?;
    let lhs = res[0].mul(&res[1]);
    let rhs = res[2]
        .mul(&res[3])
        .add(&res[4..].iter().fold(unit_classical(n), |a, c| a.mul(c)));
    Ok(lhs == rhs)
}

fn unit_classical(n: usize) -> ClassicalCharacter {
    let mut c = ClassicalCharacter::default();
    c.add_term(vec![0; n], 1);
    c
}

/// `M prod_{0 <= j <= r} A_{node, pos(j)}^{-1}` for `r = -1, .., r_max`.
fn chain(
    cd: &CartanData,
    m: &Monomial,
    node: usize,
    pos: impl Fn(i32) -> i32,
    r_max: i32,
) -> Vec<Monomial> {
    let mut out = vec![m.clone()];
    let mut cur = m.clone();
    for j in 0..=r_max {
        cur = cur.div(&a_monomial_unchecked(cd, node, pos(j)));
        out.push(cur.clone());
    }
    out
}

/// Predicted dominant monomials of the three summands (lhs product, first
/// rhs product, second rhs product), each with multiplicity one.
pub fn table1_prediction(eq: &EquationInstance, cd: &CartanData) -> Result<[Vec<Monomial>; 3]> {
    if eq.family.dual {
        return Err(Error::Unsupported(format!(
            "{} is not covered by the dominant-monomial table",
            eq.family
        )));
    }
    let hw = |ls: &[ModuleLabel]| -> Result<Monomial> {
        ls.iter().try_fold(Monomial::one(), |acc, l| {
            Ok(acc.mul(&highest_weight(l, cd)?))
        })
    };
    let m_l = hw(&eq.lhs)?;
    let m_r1 = hw(&eq.rhs_first)?;
    let m_r2 = hw(&eq.rhs_second)?;
    let n = eq.n as i32;
    let s = eq.s;
    let k: Vec<i32> = eq.k.iter().map(|&x| x as i32).collect();
    let kk = |i: usize| k[i - 1];
    let sum = |from: usize, to: usize| -> i32 { (from..=to).map(kk).sum() };
    let idx = |name: &str| {
        eq.indices
            .iter()
            .find(|(x, _)| x == name)
            .map(|(_, v)| *v)
            .unwrap()
    };
    let n_u = eq.n;
    let (node, pos, r_lhs): (usize, Box<dyn Fn(i32) -> i32>, i32) = match eq.family.family {
        Family::Eqn1 => {
            let c = -s - 2 * sum(2, n_u - 1) - n + 2;
            (1, Box::new(move |j| c - 2 * j), kk(1) - 1)
        }
        Family::Eqn2 => {
            let i = idx("i");
            let c = -s - 2 * sum(i + 1, n_u - 1) - n + i as i32 + 1;
            (i, Box::new(move |j| c - 2 * j), kk(i) - 1)
        }
        Family::Eqn3 => {
            let j0 = idx("j");
            let c = -s - 2 * sum(j0, n_u - 1) - n + 2;
            (1, Box::new(move |p| c - 2 * p), kk(1) - 1)
        }
        Family::Eqn4 => {
            let i = idx("i");
            let j0 = idx("j");
            let c = -s - 2 * sum(j0, n_u - 1) - n + i as i32 + 1;
            (i, Box::new(move |p| c - 2 * p), kk(i) - 1)
        }
        _ => {
            let kn = kk(n_u);
            (n_u, Box::new(move |j| s + 4 * kn - 4 * j - 6), kn - 1)
        }
    };
    Ok([
        chain(cd, &m_l, node, &pos, r_lhs),
        chain(cd, &m_r1, node, &pos, r_lhs - 1),
        vec![m_r2],
    ])
}

#[derive(Clone, Debug, Serialize)]
pub struct Table1Report {
    pub family: String,
    pub equation: String,
    pub predicted: [Vec<String>; 3],
    pub computed: [Vec<(String, i64)>; 3],
    pub ok: bool,
}

pub fn verify_table1(eq: &EquationInstance, engine: &CharacterEngine) -> Result<Table1Report> {
    let pred = table1_prediction(eq, engine.cartan())?;
    let computed = compare_dominant(eq, engine)?.dominant;
    let mut ok = true;
    for (p, c) in pred.iter().zip(computed.iter()) {
        let mut want: Vec<(Monomial, i64)> = p.iter().map(|m| (m.clone(), 1)).collect();
        want.sort();
        ok &= &want == c;
    }
    let show = |v: &Vec<Monomial>| v.iter().map(|m| m.to_string()).collect::<Vec<_>>();
    let show_c = |v: &Vec<(Monomial, i64)>| {
        v.iter()
            .map(|(m, c)| (m.to_string(), *c))
            .collect::<Vec<_>>()
    };
    Ok(Table1Report {
        family: eq.family.name().to_string(),
        equation: eq.pretty(),
        predicted: [show(&pred[0]), show(&pred[1]), show(&pred[2])],
        computed: [
            show_c(&computed[0]),
            show_c(&computed[1]),
            show_c(&computed[2]),
        ],
        ok,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SummandVerdict {
    pub summand: String,
    pub dominant_count: usize,
    pub verdict: String,
}

/// For each right-hand summand: a product with a single dominant monomial
/// is simple; otherwise specialness does not decide.
pub fn simplicity_census(
    eq: &EquationInstance,
    engine: &CharacterEngine,
) -> Result<Vec<SummandVerdict>> {
    let pr = compare_dominant(eq, engine)?;
    let mut out = vec![];
    for (name, d) in [
        ("rhs_first", &pr.dominant[1]),
        ("rhs_second", &pr.dominant[2]),
    ] {
        let verdict = if d.len() == 1 && d[0].1 == 1 {
            "unique dominant"
        } else {
            "not decided by specialness"
        };
        out.push(SummandVerdict {
            summand: name.to_string(),
            dominant_count: d.len(),
            verdict: verdict.to_string(),
        });
    }
    Ok(out)
}

/// Classical characters of each slot, keyed by label.
pub fn restricted_slots(
    eq: &EquationInstance,
    engine: &CharacterEngine,
) -> Result<BTreeMap<String, i64>> {
    let mut out = BTreeMap::new();
    for l in eq.labels() {
        let c = engine.label_character(l)?;
        out.insert(l.to_string(), restrict_character(&c, eq.n).dim());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(s: &str) -> Monomial {
        s.parse().unwrap()
    }

    fn c(n: usize) -> CartanData {
        CartanData::type_c(n).unwrap()
    }

    #[test]
    fn printed_highest_weights() {
        let cd = c(3);
        assert_eq!(
            highest_weight(&ModuleLabel::t(0, vec![1, 1, 0]), &cd).unwrap(),
            mono("1_-4 2_-1")
        );
        assert_eq!(
            highest_weight(&ModuleLabel::t(0, vec![0, 2, 0]), &cd).unwrap(),
            mono("2_-3 2_-1")
        );
        let cd4 = c(4);
        assert_eq!(
            highest_weight(&ModuleLabel::t(0, vec![0, 0, 0, 1]), &cd4).unwrap(),
            mono("4_0")
        );
        assert_eq!(
            highest_weight(&ModuleLabel::tt(-9, vec![2, 0, 0, 1]), &cd4).unwrap(),
            mono("4_-9 1_-2 1_0")
        );
    }

    #[test]
    fn mirror_negates_shifts() {
        let cd = c(4);
        for k in k_vectors(4, 3) {
            let l = ModuleLabel::tt(3, k);
            assert_eq!(
                highest_weight(&l.mirror(), &cd).unwrap(),
                highest_weight(&l, &cd).unwrap().negate_shifts()
            );
        }
    }

    #[test]
    fn s_partner_rule() {
        assert_eq!(s_partner(&[0, 3, 2, 0]), vec![0, 1, 0, 0]);
        assert_eq!(s_partner(&[2, 1, 2, 0]), vec![1, 0, 0, 0]);
        assert_eq!(s_partner(&[1, 0, 2, 0]), vec![0, 0, 0, 0]);
        assert_eq!(s_partner(&[0, 0, 2, 0]), vec![0, 0, 0, 0]);
    }

    #[test]
    fn label_parsing() {
        let l: ModuleLabel = "Tt:-2:0,0,1".parse().unwrap();
        assert_eq!(l, ModuleLabel::tt(-2, vec![0, 0, 1]));
        assert_eq!(l.to_string().parse::<ModuleLabel>().unwrap(), l);
        assert!(matches!(
            "X:0:1,0".parse::<ModuleLabel>(),
            Err(Error::InvalidLabel(_))
        ));
        assert!(matches!(
            "S:0:1,0,1".parse::<ModuleLabel>(),
            Err(Error::InvalidLabel(_))
        ));
    }

    #[test]
    fn printed_suites_match_catalog() {
        for (suite, n) in [(c3_examples(), 3), (c4_examples(), 4)] {
            let cd = c(n);
            for p in suite {
                let eq = make_equation(p.family, &p.params).unwrap();
                assert!(
                    matches_printed(&eq, p.printed, &cd).unwrap(),
                    "{} vs {}",
                    eq.pretty(),
                    p.printed
                );
            }
        }
        for p in dual_examples() {
            let cd = c(p.params.n);
            let eq = make_equation(p.family, &p.params).unwrap();
            assert!(
                matches_printed(&eq, p.printed, &cd).unwrap(),
                "{} vs {}",
                eq.pretty(),
                p.printed
            );
        }
    }

    #[test]
    fn constraint_violations() {
        let e = make_equation(
            FamilyId::primal(Family::Eqn1),
            &EqParams::new(0, vec![1, 0, 0]),
        );
        assert!(matches!(e, Err(Error::ConstraintViolated(_))));
        let e = make_equation(
            FamilyId::primal(Family::Eqn511),
            &EqParams::new(0, vec![3, 1, 1]),
        );
        assert!(matches!(e, Err(Error::ConstraintViolated(_))));
    }

    #[test]
    fn family_names_roundtrip() {
        for f in FamilyId::all() {
            assert_eq!(f.name().parse::<FamilyId>().unwrap(), f);
        }
    }

    #[test]
    fn first_c3_equation_holds() {
        let eng = CharacterEngine::new(c(3));
        let p = &c3_examples()[0];
        let eq = make_equation(p.family, &p.params).unwrap();
        let r = verify_equation(&eq, &eng).unwrap();
        assert!(r.verdict, "{r:?}");
    }

    #[test]
    fn special_family_membership() {
        assert!(in_special_theorem(&ModuleLabel::tt(0, vec![1, 1, 1])));
        assert!(in_special_theorem(&ModuleLabel::tt(0, vec![3, 1, 0, 1])));
        assert!(!in_special_theorem(&ModuleLabel::tt(0, vec![4, 1, 0, 1])));
        assert!(!in_special_theorem(&ModuleLabel::tt(0, vec![1, 1, 0])));
        assert!(in_anti_special_theorem(&ModuleLabel::tt(0, vec![1, 1, 0])));
    }
}
