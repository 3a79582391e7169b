//! Quivers, seeds and mutations for the cluster algebras attached to type
//! C_n, realized on a finite window of their infinite-rank quivers.
//!
//! The window is honest about its edge: a vertex whose state (variable or
//! incident arrows) may differ from the infinite quiver is *tainted*. Window
//! vertices with a neighbour outside the window start tainted, and mutating
//! a tainted vertex, or next to one, spreads the taint. A mutation at an
//! untainted vertex whose neighbours are all untainted is *exact*: its
//! exchange relation is the one of the infinite-rank algebra, whatever the
//! window depth.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::affinization::{
    highest_weight, make_equation, s_partner, verify_equation_with, CharacterEngine, EqParams,
    EquationInstance, FamilyId, ModuleLabel, Variant, VerifyMode, VerifyOptions,
};
use crate::cartan::CartanData;
use crate::error::{Error, Result};
use crate::monomial::{a_monomial, leq, Monomial};
use crate::poly::LaurentPoly;

/// `(node, row)`.
pub type Vertex = (usize, i32);

fn fmt_vertex(v: Vertex) -> String {
    format!("({},{})", v.0, v.1)
}

// ---------------------------------------------------------------------------
// Quiver

/// Finite quiver stored as a multiset of arrows between indexed vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quiver {
    vertices: Vec<Vertex>,
    index: BTreeMap<Vertex, usize>,
    arrows: BTreeMap<(usize, usize), u32>,
}

impl Quiver {
    pub fn new(vertices: Vec<Vertex>) -> Self {
        let index = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        Quiver {
            vertices,
            index,
            arrows: BTreeMap::new(),
        }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, v: Vertex) -> Option<usize> {
        self.index.get(&v).copied()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.index.contains_key(&v)
    }

    pub fn add_arrow(&mut self, from: Vertex, to: Vertex, mult: u32) -> Result<()> {
        let (a, b) = match (self.index_of(from), self.index_of(to)) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::BoundaryVertex(format!(
                    "arrow {} -> {} leaves the quiver",
                    fmt_vertex(from),
                    fmt_vertex(to)
                )))
            }
        };
        if mult > 0 {
            *self.arrows.entry((a, b)).or_insert(0) += mult;
        }
        Ok(())
    }

    /// Number of arrows `from -> to`.
    pub fn multiplicity(&self, from: Vertex, to: Vertex) -> u32 {
        match (self.index_of(from), self.index_of(to)) {
            (Some(a), Some(b)) => self.arrows.get(&(a, b)).copied().unwrap_or(0),
            _ => 0,
        }
    }

    /// `(from, to, multiplicity)` for every arrow, in vertex-index order.
    pub fn arrows(&self) -> Vec<(Vertex, Vertex, u32)> {
        self.arrows
            .iter()
            .map(|(&(a, b), &m)| (self.vertices[a], self.vertices[b], m))
            .collect()
    }

    pub fn arrow_count(&self) -> u32 {
        self.arrows.values().sum()
    }

    fn incoming(&self, k: usize) -> Vec<(usize, u32)> {
        self.arrows
            .iter()
            .filter(|(&(_, b), _)| b == k)
            .map(|(&(a, _), &m)| (a, m))
            .collect()
    }

    fn outgoing(&self, k: usize) -> Vec<(usize, u32)> {
        self.arrows
            .range((k, 0)..=(k, usize::MAX))
            .map(|(&(_, b), &m)| (b, m))
            .collect()
    }

    fn neighbours(&self, k: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .incoming(k)
            .into_iter()
            .chain(self.outgoing(k))
            .map(|(a, _)| a)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn has_loops(&self) -> bool {
        self.arrows.keys().any(|(a, b)| a == b)
    }

    /// Unordered vertex pairs joined by arrows in both directions.
    pub fn two_cycles(&self) -> Vec<(Vertex, Vertex)> {
        self.arrows
            .keys()
            .filter(|(a, b)| a < b && self.arrows.contains_key(&(*b, *a)))
            .map(|&(a, b)| (self.vertices[a], self.vertices[b]))
            .collect()
    }

    /// Quiver mutation at vertex index `k`: compose paths through `k`,
    /// reverse the arrows at `k`, then cancel 2-cycles.
    fn mutate_index(&mut self, k: usize) {
        let ins = self.incoming(k);
        let outs = self.outgoing(k);
        for &(i, a) in &ins {
            for &(j, b) in &outs {
                *self.arrows.entry((i, j)).or_insert(0) += a * b;
            }
        }
        for &(i, a) in &ins {
            self.arrows.remove(&(i, k));
            *self.arrows.entry((k, i)).or_insert(0) += a;
        }
        for &(j, b) in &outs {
            self.arrows.remove(&(k, j));
            *self.arrows.entry((j, k)).or_insert(0) += b;
        }
        for &(i, _) in &ins {
            for &(j, _) in &outs {
                let ij = self.arrows.get(&(i, j)).copied().unwrap_or(0);
                let ji = self.arrows.get(&(j, i)).copied().unwrap_or(0);
                let c = ij.min(ji);
                if c > 0 {
                    for key in [(i, j), (j, i)] {
                        let e = self.arrows.get_mut(&key).unwrap();
                        *e -= c;
                        if *e == 0 {
                            self.arrows.remove(&key);
                        }
                    }
                }
            }
        }
    }

    pub fn mutate(&mut self, v: Vertex) -> Result<()> {
        let k = self
            .index_of(v)
            .ok_or_else(|| Error::BoundaryVertex(format!("{} not in quiver", fmt_vertex(v))))?;
        self.mutate_index(k);
        Ok(())
    }

    /// GraphViz `digraph`; multiple arrows are labelled with their count.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph Q {\n");
        for &(i, r) in &self.vertices {
            s.push_str(&format!("  \"{i},{r}\";\n"));
        }
        for (a, b, m) in self.arrows() {
            let lab = if m > 1 {
                format!(" [label=\"{m}\"]")
            } else {
                String::new()
            };
            s.push_str(&format!(
                "  \"{},{}\" -> \"{},{}\"{lab};\n",
                a.0, a.1, b.0, b.1
            ));
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "vertices": self.vertices,
            "arrows": self.arrows().iter().map(|(a, b, m)| serde_json::json!([a, b, m])).collect::<Vec<_>>(),
        })
    }
}

// ---------------------------------------------------------------------------
// Algebras, windows and initial seeds

/// The algebra `A` (rows <= 0) or its dual `A~` (rows >= 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algebra {
    A,
    Atilde,
}

impl Algebra {
    /// `+1` for `A`, `-1` for `A~`: rows of `A~` are those of `A` negated.
    fn sign(self) -> i32 {
        match self {
            Algebra::A => 1,
            Algebra::Atilde => -1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algebra::A => "A",
            Algebra::Atilde => "Atilde",
        }
    }

    /// Label variants in the order used to name a highest monomial.
    pub fn preferred_variants(self) -> [Variant; 4] {
        match self {
            Algebra::A => [Variant::T, Variant::Ttilde, Variant::Stilde, Variant::S],
            Algebra::Atilde => [Variant::Ttilde, Variant::T, Variant::S, Variant::Stilde],
        }
    }

    fn label(self, l: ModuleLabel) -> ModuleLabel {
        match self {
            Algebra::A => l,
            Algebra::Atilde => l.mirror(),
        }
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algebra {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Algebra::A),
            "Atilde" | "atilde" | "A~" | "At" | "dual" => Ok(Algebra::Atilde),
            _ => Err(Error::Parse(format!("unknown algebra {s:?} (A, Atilde)"))),
        }
    }
}

fn parity(i: usize) -> i32 {
    (i % 2) as i32
}

/// Rows of column `c` (1..=n+1) in `A`, first vertex first: `(top, step)`.
fn column_shape(n: usize, c: usize) -> (usize, i32, i32) {
    if c < n {
        (c, parity(c) - 1, 2)
    } else {
        let top = if n % 2 == 1 { 0 } else { -1 };
        (n, if c == n { top } else { top - 2 }, 4)
    }
}

/// Whether `v` is a vertex of the infinite quiver.
pub fn in_vertex_set(algebra: Algebra, n: usize, v: Vertex) -> bool {
    let (i, r) = v;
    if i == 0 || i > n {
        return false;
    }
    let r = algebra.sign() * r;
    if r > 0 {
        return false;
    }
    if i < n {
        (r - (parity(i) - 1)) % 2 == 0
    } else {
        let top = if n % 2 == 1 { 0 } else { -1 };
        (top - r) % 2 == 0
    }
}

/// Which column (1..=n+1) a vertex belongs to.
pub fn column_of(algebra: Algebra, n: usize, v: Vertex) -> usize {
    let (i, r) = v;
    if i < n {
        return i;
    }
    let r = algebra.sign() * r;
    let top = if n % 2 == 1 { 0 } else { -1 };
    if (top - r) % 4 == 0 {
        n
    } else {
        n + 1
    }
}

/// Finitely many rows of every column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub algebra: Algebra,
    pub n: usize,
    /// Rows kept per column.
    pub depth: usize,
}

impl Window {
    /// Vertices of column `c`, in mutation order (first vertex first).
    pub fn column(&self, c: usize) -> Vec<Vertex> {
        let (node, top, step) = column_shape(self.n, c);
        let sg = self.algebra.sign();
        (0..self.depth as i32)
            .map(|p| (node, sg * (top - step * p)))
            .collect()
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        (1..=self.n + 1).flat_map(|c| self.column(c)).collect()
    }

    /// Row bounds `(column, first row, last row)`.
    pub fn bounds(&self) -> Vec<(usize, i32, i32)> {
        (1..=self.n + 1)
            .map(|c| {
                let col = self.column(c);
                (c, col[0].1, col[col.len() - 1].1)
            })
            .collect()
    }
}

/// Arrow offset from node `i` to node `j`, if `b_ij != 0`.
fn arrow_offset(algebra: Algebra, cd: &CartanData, i: usize, j: usize) -> Option<i32> {
    let b = cd.bij(i, j);
    if b == 0 {
        return None;
    }
    let off = b - cd.di(i) + cd.di(j);
    Some(algebra.sign() * off)
}

/// Neighbours of `v` in the infinite quiver: `(vertex, v is the source)`.
fn infinite_neighbours(algebra: Algebra, cd: &CartanData, v: Vertex) -> Vec<(Vertex, bool)> {
    let n = cd.rank;
    let mut out = vec![];
    for j in cd.nodes() {
        if let Some(off) = arrow_offset(algebra, cd, v.0, j) {
            let w = (j, v.1 + off);
            if in_vertex_set(algebra, n, w) {
                out.push((w, true));
            }
        }
        if let Some(off) = arrow_offset(algebra, cd, j, v.0) {
            let w = (j, v.1 - off);
            if in_vertex_set(algebra, n, w) {
                out.push((w, false));
            }
        }
    }
    out
}

/// Name of the module initially attached to a vertex.
pub fn initial_label(algebra: Algebra, n: usize, v: Vertex) -> ModuleLabel {
    let (i, r) = v;
    let r = algebra.sign() * r;
    let mut k = vec![0u32; n];
    let l = if i < n {
        let p = parity(i);
        k[i - 1] = ((p - 1 - r) / 2 + 1) as u32;
        ModuleLabel::t(-(n as i32) + i as i32 - p + 1, k)
    } else {
        let (_, top, _) = column_shape(n, column_of(Algebra::A, n, (i, r)));
        k[n - 1] = ((top - r) / 4 + 1) as u32;
        ModuleLabel::tt(r, k)
    };
    algebra.label(l)
}

fn initial_symbol(l: &ModuleLabel) -> String {
    let name = match l.variant {
        Variant::T => "t",
        Variant::Ttilde => "t~",
        Variant::S => "s",
        Variant::Stilde => "s~",
    };
    let k: Vec<String> = l.k.iter().map(|x| x.to_string()).collect();
    format!("{name}^({})_{{{}}}", l.s, k.join(","))
}

// ---------------------------------------------------------------------------
// Seeds and mutation

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterVar {
    /// Initial-seed symbol, or the pretty label of a mutated variable.
    pub symbol: String,
    pub label: Option<ModuleLabel>,
    /// Highest monomial, when known.
    pub hw: Option<Monomial>,
    #[serde(skip)]
    pub payload: Option<Arc<LaurentPoly>>,
}

impl ClusterVar {
    pub fn symbol(s: impl Into<String>) -> Self {
        ClusterVar {
            symbol: s.into(),
            label: None,
            hw: None,
            payload: None,
        }
    }

    pub fn with_payload(mut self, p: LaurentPoly) -> Self {
        self.payload = Some(Arc::new(p));
        self
    }

    fn without_payload(&self) -> ClusterVar {
        ClusterVar {
            payload: None,
            ..self.clone()
        }
    }

    fn unknown() -> Self {
        ClusterVar::symbol("?")
    }
}

/// A variable of an exchange relation with its arrow multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub vertex: Vertex,
    pub var: ClusterVar,
    pub mult: u32,
}

/// Which product of an exchange relation has the larger highest monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Incoming,
    Outgoing,
}

/// One mutation: `old * new = prod(incoming) + prod(outgoing)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExchangeRecord {
    pub step: usize,
    pub vertex: Vertex,
    pub provenance: String,
    /// The relation is that of the infinite-rank algebra.
    pub exact: bool,
    pub old: ClusterVar,
    pub new: ClusterVar,
    pub incoming: Vec<Factor>,
    pub outgoing: Vec<Factor>,
    pub leading: Option<Side>,
    /// The payload numerator was divided exactly.
    pub payload_divided: bool,
}

impl ExchangeRecord {
    fn product_hw(fs: &[Factor]) -> Option<Monomial> {
        let mut m = Monomial::one();
        for f in fs {
            m = m.mul(&f.var.hw.as_ref()?.pow(f.mult as i32));
        }
        Some(m)
    }

    pub fn incoming_hw(&self) -> Option<Monomial> {
        Self::product_hw(&self.incoming)
    }

    pub fn outgoing_hw(&self) -> Option<Monomial> {
        Self::product_hw(&self.outgoing)
    }

    pub fn pretty(&self) -> String {
        let name = |v: &ClusterVar| match &v.label {
            Some(l) => format!("[{}]", l.pretty()),
            None => format!("[{}]", v.symbol),
        };
        let prod = |fs: &[Factor]| -> String {
            if fs.is_empty() {
                return "1".into();
            }
            fs.iter()
                .map(|f| {
                    if f.mult > 1 {
                        format!("{}^{}", name(&f.var), f.mult)
                    } else {
                        name(&f.var)
                    }
                })
                .collect()
        };
        format!(
            "{}{} = {} + {}",
            name(&self.old),
            name(&self.new),
            prod(&self.incoming),
            prod(&self.outgoing)
        )
    }
}

#[derive(Clone, Debug)]
pub struct Seed {
    pub quiver: Quiver,
    pub vars: Vec<ClusterVar>,
    tainted: Vec<bool>,
    window: Option<Window>,
    cd: Option<CartanData>,
}

impl Seed {
    /// A seed on an arbitrary finite quiver; every vertex is treated as exact.
    pub fn new(quiver: Quiver, vars: Vec<ClusterVar>) -> Result<Self> {
        if vars.len() != quiver.len() {
            return Err(Error::ConstraintViolated(format!(
                "{} variables for {} vertices",
                vars.len(),
                quiver.len()
            )));
        }
        let n = quiver.len();
        Ok(Seed {
            quiver,
            vars,
            tainted: vec![false; n],
            window: None,
            cd: None,
        })
    }

    pub fn window(&self) -> Option<&Window> {
        self.window.as_ref()
    }

    pub fn var(&self, v: Vertex) -> Option<&ClusterVar> {
        self.quiver.index_of(v).map(|i| &self.vars[i])
    }

    pub fn is_tainted(&self, v: Vertex) -> bool {
        self.quiver
            .index_of(v)
            .map(|i| self.tainted[i])
            .unwrap_or(true)
    }

    /// Persistent mutation: returns the mutated seed and the record.
    pub fn mutate(&self, v: Vertex) -> Result<(Seed, ExchangeRecord)> {
        let mut s = self.clone();
        let rec = s.mutate_in_place(v, 0, "")?;
        Ok((s, rec))
    }

    pub fn mutate_in_place(
        &mut self,
        v: Vertex,
        step: usize,
        prov: &str,
    ) -> Result<ExchangeRecord> {
        let k = self
            .quiver
            .index_of(v)
            .ok_or_else(|| Error::BoundaryVertex(format!("{} not in the window", fmt_vertex(v))))?;
        let ins = self.quiver.incoming(k);
        let outs = self.quiver.outgoing(k);
        let nb = self.quiver.neighbours(k);
        let exact = !self.tainted[k] && nb.iter().all(|&u| !self.tainted[u]);
        let factors = |list: &[(usize, u32)]| -> Vec<Factor> {
            list.iter()
                .map(|&(u, m)| Factor {
                    vertex: self.quiver.vertices[u],
                    var: self.vars[u].clone(),
                    mult: m,
                })
                .collect()
        };
        let fin = factors(&ins);
        let fout = factors(&outs);
        let old = self.vars[k].clone();

        let mut leading = None;
        let mut new = ClusterVar::unknown();
        let mut divided = false;
        if exact {
            let h_in = ExchangeRecord::product_hw(&fin);
            let h_out = ExchangeRecord::product_hw(&fout);
            if let (Some(cd), Some(hi), Some(ho), Some(hy)) = (&self.cd, &h_in, &h_out, &old.hw) {
                let lead = if leq(cd, ho, hi) {
                    Some((Side::Incoming, hi))
                } else if leq(cd, hi, ho) {
                    Some((Side::Outgoing, ho))
                } else {
                    None
                };
                if let Some((side, h)) = lead {
                    let m = h.div(hy);
                    if m.is_dominant() {
                        leading = Some(side);
                        new.hw = Some(m);
                    }
                }
            }
            if let Some(p) = exchange_payload(&fin, &fout, &old)? {
                new.payload = Some(Arc::new(p));
                divided = true;
            }
            if let (Some(cd), Some(h), Some(w)) = (&self.cd, &new.hw, &self.window) {
                new.label = identify(h, cd, w.algebra);
            }
            new.symbol = match &new.label {
                Some(l) => l.pretty(),
                None => format!("y{step}"),
            };
        }

        self.quiver.mutate_index(k);
        if !exact {
            if self.tainted[k] {
                for &u in &nb {
                    self.tainted[u] = true;
                }
            }
            self.tainted[k] = true;
        }
        self.vars[k] = new.clone();
        // the record keeps the new payload for checking; factors do not
        let strip = |fs: Vec<Factor>| -> Vec<Factor> {
            fs.into_iter()
                .map(|f| Factor {
                    var: f.var.without_payload(),
                    ..f
                })
                .collect()
        };
        Ok(ExchangeRecord {
            step,
            vertex: v,
            provenance: prov.to_string(),
            exact,
            old: old.without_payload(),
            new,
            incoming: strip(fin),
            outgoing: strip(fout),
            leading,
            payload_divided: divided,
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let vars: Vec<serde_json::Value> = self
            .quiver
            .vertices()
            .iter()
            .zip(&self.vars)
            .zip(&self.tainted)
            .map(|((v, x), t)| {
                serde_json::json!({
                    "vertex": v,
                    "symbol": x.symbol,
                    "label": x.label.as_ref().map(|l| l.to_string()),
                    "hw": x.hw.as_ref().map(|m| m.to_string()),
                    "payload_terms": x.payload.as_ref().map(|p| p.len()),
                    "exact": !t,
                })
            })
            .collect();
        serde_json::json!({
            "window": self.window,
            "quiver": self.quiver.to_json(),
            "variables": vars,
        })
    }
}

fn payload_product(fs: &[Factor]) -> Option<LaurentPoly> {
    let mut p = LaurentPoly::one();
    for f in fs {
        let x = f.var.payload.as_ref()?;
        p = p.mul(&x.pow(f.mult));
    }
    Some(p)
}

fn exchange_payload(
    fin: &[Factor],
    fout: &[Factor],
    old: &ClusterVar,
) -> Result<Option<LaurentPoly>> {
    let (Some(a), Some(b), Some(y)) = (
        payload_product(fin),
        payload_product(fout),
        old.payload.as_ref(),
    ) else {
        return Ok(None);
    };
    a.add(&b).exact_div(y).map(Some)
}

/// Initial seed of `A` or `A~` on a window of `depth` rows per column.
/// With an engine, every variable carries its q-character as payload.
pub fn build_initial_seed(
    algebra: Algebra,
    cd: &CartanData,
    depth: usize,
    engine: Option<&CharacterEngine>,
) -> Result<Seed> {
    let n = cd.rank;
    if n < 2 {
        return Err(Error::InvalidRank(n));
    }
    if depth < 1 {
        return Err(Error::ConstraintViolated(
            "window depth must be >= 1".into(),
        ));
    }
    let w = Window { algebra, n, depth };
    let verts = w.vertices();
    let mut q = Quiver::new(verts.clone());
    let mut tainted = vec![false; verts.len()];
    for (idx, &v) in verts.iter().enumerate() {
        for (u, source) in infinite_neighbours(algebra, cd, v) {
            if !q.contains(u) {
                tainted[idx] = true;
            } else if source {
                q.add_arrow(v, u, 1)?;
            }
        }
    }
    let mut vars = Vec::with_capacity(verts.len());
    for &v in &verts {
        let l = initial_label(algebra, n, v);
        let hw = highest_weight(&l, cd)?;
        let payload = match engine {
            Some(e) => Some(e.label_character(&l)?),
            None => None,
        };
        vars.push(ClusterVar {
            symbol: initial_symbol(&l),
            label: Some(l),
            hw: Some(hw),
            payload,
        });
    }
    Ok(Seed {
        quiver: q,
        vars,
        tainted,
        window: Some(w),
        cd: Some(cd.clone()),
    })
}

// ---------------------------------------------------------------------------
// Naming highest monomials

fn node_counts(m: &Monomial, n: usize) -> Option<Vec<u32>> {
    let mut k = vec![0i64; n];
    for (i, _, e) in m.factors() {
        if i == 0 || i > n || e < 0 {
            return None;
        }
        k[i - 1] += e as i64;
    }
    Some(k.into_iter().map(|x| x as u32).collect())
}

fn try_shifts(h: &Monomial, cd: &CartanData, variant: Variant, k: Vec<u32>) -> Option<ModuleLabel> {
    let l0 = ModuleLabel::new(variant, 0, k);
    let hw0 = highest_weight(&l0, cd).ok()?;
    let d = h.min_shift()? - hw0.min_shift()?;
    [d, -d].into_iter().find_map(|s| {
        let l = ModuleLabel::new(variant, s, l0.k.clone());
        (highest_weight(&l, cd).ok()? == *h).then_some(l)
    })
}

/// A label whose highest monomial is `h`, trying variants in the order
/// preferred by `algebra`. The trivial monomial has no label.
pub fn identify(h: &Monomial, cd: &CartanData, algebra: Algebra) -> Option<ModuleLabel> {
    let n = cd.rank;
    let c = node_counts(h, n)?;
    if h.is_one() {
        return None;
    }
    for v in algebra.preferred_variants() {
        let found = match v {
            Variant::T | Variant::Ttilde => try_shifts(h, cd, v, c.clone()),
            Variant::S | Variant::Stilde => {
                if n < 3 || c[n - 1] != 0 || c[n - 2] == 0 {
                    None
                } else {
                    prefix_candidates(&c[..n - 2]).into_iter().find_map(|u| {
                        let mut k = u;
                        k.extend([c[n - 2], 0]);
                        let p = s_partner(&k);
                        if (0..n - 2).all(|q| k[q] + p[q] == c[q]) {
                            try_shifts(h, cd, v, k)
                        } else {
                            None
                        }
                    })
                }
            }
        };
        if found.is_some() {
            return found;
        }
    }
    None
}

fn prefix_candidates(c: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for &x in c {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u32>| {
                (0..=x).map(move |y| {
                    let mut w = v.clone();
                    w.push(y);
                    w
                })
            })
            .collect();
    }
    out
}

// ---------------------------------------------------------------------------
// Schedules

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    One,
    Two,
}

impl FromStr for Case {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Case::One),
            "2" => Ok(Case::Two),
            _ => Err(Error::Parse(format!("unknown case {s:?} (1, 2)"))),
        }
    }
}

/// One column mutation and the macro it came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnStep {
    pub column: usize,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationSchedule {
    pub case: Case,
    pub n: usize,
    pub k: Vec<u32>,
    pub steps: Vec<ColumnStep>,
    /// The module the schedule is built to reach (as named in `A`).
    pub target: ModuleLabel,
}

impl MutationSchedule {
    /// Every scheduled vertex of the window, in order, with provenance.
    pub fn vertices(&self, w: &Window) -> Vec<(Vertex, String)> {
        self.steps
            .iter()
            .flat_map(|st| {
                w.column(st.column)
                    .into_iter()
                    .map(move |v| (v, st.provenance.clone()))
            })
            .collect()
    }

    pub fn columns(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.column).collect()
    }

    /// Compact column notation, e.g. `C3 C4 C2 C3`.
    pub fn column_string(&self) -> String {
        self.steps
            .iter()
            .map(|s| format!("C{}", s.column))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn target_in(&self, algebra: Algebra) -> ModuleLabel {
        algebra.label(self.target.clone())
    }
}

fn push(steps: &mut Vec<ColumnStep>, cols: impl IntoIterator<Item = usize>, prov: &str) {
    for c in cols {
        steps.push(ColumnStep {
            column: c,
            provenance: prov.to_string(),
        });
    }
}

/// `M_l`: prefix of Case 1.
fn m_prefix(l: usize) -> Vec<usize> {
    let reps = match l {
        1 => 0,
        // the printed table leaves M_2 empty; the even-l product (= C_1) is
        // what reaches the targets
        _ if l % 2 == 1 => (l - 1) / 2,
        _ => l / 2,
    };
    (1..=reps).flat_map(|k| (1..=2 * k - 1).rev()).collect()
}

/// `N_{n,r}`: prefix of Case 2.
fn n_prefix(n: usize, r: usize) -> Vec<usize> {
    if r == n {
        return vec![];
    }
    if n % 2 == 1 && r == n - 1 {
        return vec![n];
    }
    let (reps, lead) = match (n % 2, r % 2) {
        (1, 1) => ((n - r) / 2, 2),
        (1, 0) => ((n - r).div_ceil(2), 2),
        (0, 1) => ((n - r - 1) / 2, 1),
        _ => ((n - r) / 2, 1),
    };
    let mut v = vec![];
    for k in 1..=reps {
        let first = n + lead - 2 * k;
        v.extend(first..n);
        v.push(n - (k % 2) + 1);
    }
    v
}

/// Alternation `X Y X Y ...` of length `len`.
fn alternate(a: &[usize], b: &[usize], len: u32) -> Vec<usize> {
    (0..len)
        .flat_map(|p| if p % 2 == 0 { a.to_vec() } else { b.to_vec() })
        .collect()
}

/// The column sequence realizing the variable with parameters `k`:
/// Case 1 needs `k_n = 0`, Case 2 needs `k_n >= 1`.
pub fn compile_schedule(case: Case, cd: &CartanData, k: &[u32]) -> Result<MutationSchedule> {
    let n = cd.rank;
    if n < 3 {
        return Err(Error::InvalidRank(n));
    }
    if k.len() != n {
        return Err(Error::ConstraintViolated(format!(
            "k has {} entries, expected {n}",
            k.len()
        )));
    }
    let mut steps = vec![];
    let target = match case {
        Case::One => {
            if k[n - 1] != 0 {
                return Err(Error::ConstraintViolated("case 1 needs k_n = 0".into()));
            }
            let l = k[..n - 1].iter().rposition(|&x| x != 0).ok_or_else(|| {
                Error::ConstraintViolated("case 1 needs some k_i >= 1, i < n".into())
            })? + 1;
            push(&mut steps, m_prefix(l), &format!("M_{l}"));
            for t in (2..=l).rev() {
                for rep in 0..k[t - 1] {
                    push(
                        &mut steps,
                        (1..t).rev(),
                        &format!("(C_{}..C_1)#{}", t - 1, rep + 1),
                    );
                }
            }
            let s = -(n as i32) + l as i32 - parity(l) + 1;
            ModuleLabel::t(s, k.to_vec())
        }
        Case::Two => {
            if k[n - 1] == 0 {
                return Err(Error::ConstraintViolated("case 2 needs k_n >= 1".into()));
            }
            let r = k[..n - 1].iter().position(|&x| x != 0).map_or(n, |p| p + 1);
            push(&mut steps, n_prefix(n, r), &format!("N_{n},{r}"));
            if r == n - 1 {
                let (a, b) = if n.is_multiple_of(2) {
                    (n, n + 1)
                } else {
                    (n + 1, n)
                };
                push(
                    &mut steps,
                    alternate(&[a], &[b], k[r - 1]),
                    &format!("alt_{r}"),
                );
            } else if r < n - 1 {
                let base = if n % 2 == r % 2 {
                    (n - r) / 2
                } else {
                    (n - r).div_ceil(2)
                } as u32;
                let mut h = base;
                for t in r..n {
                    let s_t: Vec<usize> = (t + 1..n).chain([n]).collect();
                    let s_t2: Vec<usize> = (t + 1..n).chain([n + 1]).collect();
                    let prime_first = (h % 2 == 1) != (n.is_multiple_of(2) && r % 2 == 1);
                    let (a, b) = if prime_first {
                        (&s_t2, &s_t)
                    } else {
                        (&s_t, &s_t2)
                    };
                    push(&mut steps, alternate(a, b, k[t - 1]), &format!("S_{t}"));
                    h += k[t - 1];
                }
            }
            let tail: u32 = k[r.min(n) - 1..n - 1].iter().sum();
            let s = -4 * k[n - 1] as i32 - 2 * tail as i32 - n as i32 + r as i32 + parity(r) + 1;
            ModuleLabel::tt(s, k.to_vec())
        }
    };
    Ok(MutationSchedule {
        case,
        n,
        k: k.to_vec(),
        steps,
        target,
    })
}

// ---------------------------------------------------------------------------
// Running schedules

#[derive(Clone, Debug)]
pub struct ScheduleRun {
    pub seed: Seed,
    pub records: Vec<ExchangeRecord>,
}

impl ScheduleRun {
    pub fn exact_records(&self) -> impl Iterator<Item = &ExchangeRecord> {
        self.records.iter().filter(|r| r.exact)
    }

    /// Whether the schedule's target appears as an exact variable, either
    /// produced by an exact mutation or untouched in the initial seed.
    pub fn reaches(&self, target: &Monomial) -> bool {
        self.exact_records()
            .any(|r| r.new.hw.as_ref() == Some(target))
            || self
                .seed
                .quiver
                .vertices()
                .iter()
                .zip(&self.seed.vars)
                .any(|(v, x)| !self.seed.is_tainted(*v) && x.hw.as_ref() == Some(target))
    }
}

/// Mutates the seed along the schedule; every record is kept in order.
pub fn run_schedule(seed: &Seed, schedule: &MutationSchedule) -> Result<ScheduleRun> {
    let w = seed
        .window
        .ok_or_else(|| Error::ConstraintViolated("schedules need a windowed seed".into()))?;
    if w.n != schedule.n {
        return Err(Error::ConstraintViolated(format!(
            "schedule for rank {} on a rank {} seed",
            schedule.n, w.n
        )));
    }
    let mut s = seed.clone();
    let mut records = vec![];
    for (step, (v, prov)) in schedule.vertices(&w).into_iter().enumerate() {
        records.push(s.mutate_in_place(v, step, &prov)?);
    }
    Ok(ScheduleRun { seed: s, records })
}

/// Smallest window depth at which the schedule's target is produced exactly
/// (label-only dry runs up to `max_depth`).
pub fn required_depth(
    algebra: Algebra,
    cd: &CartanData,
    schedule: &MutationSchedule,
    max_depth: usize,
) -> Result<usize> {
    let target = highest_weight(&schedule.target_in(algebra), cd)?;
    for d in 1..=max_depth {
        let seed = build_initial_seed(algebra, cd, d, None)?;
        if run_schedule(&seed, schedule)?.reaches(&target) {
            return Ok(d);
        }
    }
    Err(Error::WindowTooSmall {
        given: max_depth,
        required: max_depth + 1,
    })
}

/// `run_schedule` after checking that the seed's window reaches the target.
pub fn run_schedule_checked(seed: &Seed, schedule: &MutationSchedule) -> Result<ScheduleRun> {
    let w = seed
        .window
        .ok_or_else(|| Error::ConstraintViolated("schedules need a windowed seed".into()))?;
    let cd = seed.cd.as_ref().unwrap();
    let run = run_schedule(seed, schedule)?;
    let target = highest_weight(&schedule.target_in(w.algebra), cd)?;
    if run.reaches(&target) {
        return Ok(run);
    }
    let need = required_depth(w.algebra, cd, schedule, 4 * w.depth + 16)?;
    Err(Error::WindowTooSmall {
        given: w.depth,
        required: need,
    })
}

// ---------------------------------------------------------------------------
// Matching exchange relations with the M-system

/// The equation an exchange relation realizes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MsystemMatch {
    /// Catalog family name, or `kr` for a Kirillov–Reshetikhin T-system relation.
    pub family: String,
    pub instance: Option<EquationInstance>,
    pub lhs: [ModuleLabel; 2],
    pub rhs_first: Vec<ModuleLabel>,
    pub rhs_second: Vec<ModuleLabel>,
    /// Every slot matches a single factor of the relation (a slot may
    /// otherwise equal a product of two cluster variables).
    pub factorwise: bool,
}

impl MsystemMatch {
    pub fn pretty(&self) -> String {
        let b = |ls: &[ModuleLabel]| -> String {
            if ls.is_empty() {
                return "1".into();
            }
            ls.iter().map(|l| format!("[{}]", l.pretty())).collect()
        };
        format!(
            "{}: {} = {} + {}",
            self.family,
            b(&self.lhs),
            b(&self.rhs_first),
            b(&self.rhs_second)
        )
    }
}

fn sorted(mut v: Vec<Monomial>) -> Vec<Monomial> {
    v.sort_by_key(|m| m.to_string());
    v
}

fn factor_hws(fs: &[Factor]) -> Option<Vec<Monomial>> {
    let mut v = vec![];
    for f in fs {
        for _ in 0..f.mult {
            v.push(f.var.hw.clone()?);
        }
    }
    Some(sorted(v))
}

fn slot_hws(ls: &[ModuleLabel], cd: &CartanData) -> Result<Vec<Monomial>> {
    let mut v = vec![];
    for l in ls {
        if !l.is_trivial() {
            v.push(highest_weight(l, cd)?);
        }
    }
    Ok(sorted(v))
}

fn product(ms: &[Monomial]) -> Monomial {
    ms.iter().fold(Monomial::one(), |a, b| a.mul(b))
}

/// `(node, length, lowest shift)` if `m` is the highest monomial of a
/// Kirillov–Reshetikhin module.
fn kr_string(m: &Monomial, cd: &CartanData) -> Option<(usize, u32, i32)> {
    let fs: Vec<(usize, i32, i32)> = m.factors().collect();
    let i = fs.first()?.0;
    let step = 2 * cd.di(i);
    let a = fs.iter().map(|f| f.1).min()?;
    let mut shifts: Vec<i32> = fs.iter().map(|f| f.1).collect();
    shifts.sort_unstable();
    let ok = fs.iter().all(|f| f.0 == i && f.2 == 1)
        && shifts
            .iter()
            .enumerate()
            .all(|(p, &s)| s == a + step * p as i32);
    ok.then_some((i, fs.len() as u32, a))
}

fn kr_hw(i: usize, k: u32, a: i32, cd: &CartanData) -> Monomial {
    Monomial::from_factors((0..k as i32).map(|p| (i, a + 2 * cd.di(i) * p, 1)))
}

/// Finds the M-system equation realized by an exact exchange relation.
pub fn match_exchange_to_msystem(
    rec: &ExchangeRecord,
    cd: &CartanData,
    algebra: Algebra,
) -> Result<Option<MsystemMatch>> {
    let (Some(ho), Some(hn)) = (rec.old.hw.clone(), rec.new.hw.clone()) else {
        return Ok(None);
    };
    let (Some(fin), Some(fout)) = (factor_hws(&rec.incoming), factor_hws(&rec.outgoing)) else {
        return Ok(None);
    };
    let (pin, pout) = (product(&fin), product(&fout));
    let lhs_pair = sorted(vec![ho.clone(), hn.clone()]);

    let dual = algebra == Algebra::Atilde;
    let mut found: Vec<MsystemMatch> = vec![];
    for fid in FamilyId::all().into_iter().filter(|f| f.dual == dual) {
        for h in [&ho, &hn] {
            let Some(k) = node_counts(h, cd.rank) else {
                continue;
            };
            let Ok(eq0) = make_equation(fid, &EqParams::new(0, k.clone())) else {
                continue;
            };
            let hw0 = highest_weight(&eq0.lhs[1], cd)?;
            let (Some(a), Some(b)) = (h.min_shift(), hw0.min_shift()) else {
                continue;
            };
            for s in [a - b, b - a] {
                let Ok(eq) = make_equation(fid, &EqParams::new(s, k.clone())) else {
                    continue;
                };
                if let Some(m) = compare_instance(&eq, cd, &lhs_pair, (&pin, &fin), (&pout, &fout))?
                {
                    if !found.iter().any(|f| f.instance == m.instance) {
                        found.push(m);
                    }
                }
            }
        }
    }
    if found.len() > 1 {
        let best = found.iter().any(|m| m.factorwise);
        found.retain(|m| m.factorwise == best);
    }
    if found.len() > 1 {
        let key = |m: &MsystemMatch| -> Result<[Vec<Monomial>; 3]> {
            Ok([
                slot_hws(&m.lhs, cd)?,
                slot_hws(&m.rhs_first, cd)?,
                slot_hws(&m.rhs_second, cd)?,
            ])
        };
        let k0 = key(&found[0])?;
        for m in &found[1..] {
            if key(m)? != k0 {
                let names: Vec<String> = found.iter().map(|m| m.pretty()).collect();
                return Err(Error::AmbiguousMatch(names.join(" | ")));
            }
        }
    }
    if let Some(m) = found.into_iter().next() {
        return Ok(Some(m));
    }
    match_kr(cd, algebra, &ho, &hn, (&pin, &fin), (&pout, &fout))
}

fn compare_instance(
    eq: &EquationInstance,
    cd: &CartanData,
    lhs_pair: &[Monomial],
    side_in: (&Monomial, &[Monomial]),
    side_out: (&Monomial, &[Monomial]),
) -> Result<Option<MsystemMatch>> {
    if slot_hws(&eq.lhs, cd)? != lhs_pair {
        return Ok(None);
    }
    let r1 = slot_hws(&eq.rhs_first, cd)?;
    let r2 = slot_hws(&eq.rhs_second, cd)?;
    let (p1, p2) = (product(&r1), product(&r2));
    let factorwise = if (&p1, &p2) == (side_in.0, side_out.0) {
        r1 == side_in.1 && r2 == side_out.1
    } else if (&p1, &p2) == (side_out.0, side_in.0) {
        r1 == side_out.1 && r2 == side_in.1
    } else {
        return Ok(None);
    };
    Ok(Some(MsystemMatch {
        family: eq.family.name().to_string(),
        instance: Some(eq.clone()),
        lhs: eq.lhs.clone(),
        rhs_first: eq
            .rhs_first
            .iter()
            .filter(|l| !l.is_trivial())
            .cloned()
            .collect(),
        rhs_second: eq
            .rhs_second
            .iter()
            .filter(|l| !l.is_trivial())
            .cloned()
            .collect(),
        factorwise,
    }))
}

/// `W_{k,a} W_{k,a+2d} = W_{k+1,a} W_{k-1,a+2d} + (neighbour factors)`, with the
/// second term of highest monomial `W_{k,a} W_{k,a+2d} prod_p A_{i,a+d+2dp}^{-1}`.
fn match_kr(
    cd: &CartanData,
    algebra: Algebra,
    ho: &Monomial,
    hn: &Monomial,
    side_in: (&Monomial, &[Monomial]),
    side_out: (&Monomial, &[Monomial]),
) -> Result<Option<MsystemMatch>> {
    let (Some(x), Some(y)) = (kr_string(ho, cd), kr_string(hn, cd)) else {
        return Ok(None);
    };
    let (i, k) = (x.0, x.1);
    let d = cd.di(i);
    if y.0 != i || y.1 != k || (x.2 - y.2).abs() != 2 * d {
        return Ok(None);
    }
    let a = x.2.min(y.2);
    let lhs = ho.mul(hn);
    let mut first = vec![kr_hw(i, k + 1, a, cd)];
    if k > 1 {
        first.push(kr_hw(i, k - 1, a + 2 * d, cd));
    }
    let first = sorted(first);
    let mut second = lhs;
    for p in 0..k as i32 {
        second = second.mul(&a_monomial(cd, i, a + d + 2 * d * p)?.inv());
    }
    let (f1, f2) = if side_in.1 == first && side_out.0 == &second {
        (side_in.1, side_out.1)
    } else if side_out.1 == first && side_in.0 == &second {
        (side_out.1, side_in.1)
    } else {
        return Ok(None);
    };
    let name = |m: &Monomial| identify(m, cd, algebra);
    let labels = |ms: &[Monomial]| -> Option<Vec<ModuleLabel>> { ms.iter().map(name).collect() };
    let (Some(l0), Some(l1), Some(r1), Some(r2)) = (name(ho), name(hn), labels(f1), labels(f2))
    else {
        return Ok(None);
    };
    Ok(Some(MsystemMatch {
        family: "kr".into(),
        instance: None,
        lhs: [l0, l1],
        rhs_first: r1,
        rhs_second: r2,
        factorwise: true,
    }))
}

/// Whether a label names a module of the system realized by `algebra`:
/// in `A`, `T` with `k_n = 0` or `T~` with `k_n >= 1`; mirrored in `A~`.
pub fn in_system(label: &ModuleLabel, algebra: Algebra) -> bool {
    let l = match algebra {
        Algebra::A => label.clone(),
        Algebra::Atilde => label.mirror(),
    };
    match l.variant {
        Variant::T => l.kn() == 0,
        Variant::Ttilde => l.kn() >= 1 || l.k.iter().filter(|&&x| x != 0).count() == 1,
        _ => false,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordClass {
    /// Realizes an equation of the system (or a T-system relation).
    Matched,
    /// Creates a variable outside the system; not an M-system relation.
    Auxiliary,
    /// Creates a system variable by a relation outside the catalog.
    Unmatched,
    /// Not an exact relation of the infinite-rank algebra.
    Inexact,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classified {
    pub class: RecordClass,
    pub matched: Option<MsystemMatch>,
}

pub fn classify_record(
    rec: &ExchangeRecord,
    cd: &CartanData,
    algebra: Algebra,
) -> Result<Classified> {
    if !rec.exact {
        return Ok(Classified {
            class: RecordClass::Inexact,
            matched: None,
        });
    }
    if let Some(m) = match_exchange_to_msystem(rec, cd, algebra)? {
        return Ok(Classified {
            class: RecordClass::Matched,
            matched: Some(m),
        });
    }
    let system = rec
        .new
        .label
        .as_ref()
        .is_some_and(|l| in_system(l, algebra));
    Ok(Classified {
        class: if system {
            RecordClass::Unmatched
        } else {
            RecordClass::Auxiliary
        },
        matched: None,
    })
}

/// Checks the matched equation as an identity of q-characters.
pub fn verify_match(m: &MsystemMatch, engine: &CharacterEngine) -> Result<bool> {
    if let Some(eq) = &m.instance {
        let opts = VerifyOptions {
            mode: VerifyMode::Auto,
            classical: false,
        };
        return Ok(verify_equation_with(eq, engine, opts)?.verdict);
    }
    let prod = |ls: &[ModuleLabel]| -> Result<LaurentPoly> {
        let mut p = LaurentPoly::one();
        for l in ls {
            p = p.mul(&*engine.label_character(l)?);
        }
        Ok(p)
    };
    let lhs = prod(&m.lhs)?;
    let rhs = prod(&m.rhs_first)?.add(&prod(&m.rhs_second)?);
    Ok(lhs == rhs)
}

/// Whether a record's payload equals the q-character of its new variable
/// (`None` without a payload).
pub fn payload_matches(rec: &ExchangeRecord, engine: &CharacterEngine) -> Result<Option<bool>> {
    let (Some(h), Some(p)) = (&rec.new.hw, &rec.new.payload) else {
        return Ok(None);
    };
    Ok(Some(**p == *engine.character(h)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: usize) -> CartanData {
        CartanData::type_c(n).unwrap()
    }

    #[test]
    fn c3_vertices_and_arrows() {
        let cd = c(3);
        let s = build_initial_seed(Algebra::A, &cd, 4, None).unwrap();
        assert!(s.quiver.contains((2, -1)));
        assert!(!s.quiver.contains((2, 0)));
        assert_eq!(s.quiver.multiplicity((1, 0), (2, -1)), 1);
        assert_eq!(s.quiver.multiplicity((1, -2), (1, 0)), 1);
        assert!(s.quiver.two_cycles().is_empty());
        assert!(!s.quiver.has_loops());
        let w = s.window().unwrap();
        assert_eq!(w.column(3), vec![(3, 0), (3, -4), (3, -8), (3, -12)]);
        assert_eq!(w.column(4), vec![(3, -2), (3, -6), (3, -10), (3, -14)]);
    }

    #[test]
    fn initial_labels() {
        let cd = c(3);
        let s = build_initial_seed(Algebra::A, &cd, 3, None).unwrap();
        let hw = |v| s.var(v).unwrap().hw.clone().unwrap().to_string();
        assert_eq!(hw((1, 0)), "1_0");
        assert_eq!(hw((1, -2)), "1_-2 1_0");
        assert_eq!(hw((2, -3)), "2_-3 2_-1");
        assert_eq!(hw((3, -4)), "3_-4 3_0");
        assert_eq!(hw((3, -6)), "3_-6 3_-2");
        let d = build_initial_seed(Algebra::Atilde, &cd, 3, None).unwrap();
        assert_eq!(
            d.var((3, 4)).unwrap().hw.clone().unwrap().to_string(),
            "3_0 3_4"
        );
    }

    #[test]
    fn prefixes() {
        assert!(m_prefix(1).is_empty());
        assert_eq!(m_prefix(2), vec![1]);
        assert_eq!(m_prefix(3), vec![1]);
        assert_eq!(m_prefix(4), vec![1, 3, 2, 1]);
        assert!(n_prefix(3, 3).is_empty());
        assert_eq!(n_prefix(3, 2), vec![3]);
        assert_eq!(n_prefix(5, 4), vec![5]);
        assert_eq!(n_prefix(3, 1), vec![3]);
        assert_eq!(n_prefix(5, 3), vec![5]);
        assert_eq!(n_prefix(5, 1), vec![5, 3, 4, 6]);
        assert_eq!(n_prefix(4, 2), vec![3, 4]);
    }

    fn mono(s: &str) -> Monomial {
        s.parse().unwrap()
    }

    #[test]
    fn rank_two_toy() {
        let mut q = Quiver::new(vec![(1, 0), (2, 0)]);
        q.add_arrow((1, 0), (2, 0), 1).unwrap();
        let vars = vec![
            ClusterVar::symbol("y1").with_payload(LaurentPoly::monomial(mono("1_0"))),
            ClusterVar::symbol("y2").with_payload(LaurentPoly::monomial(mono("2_0"))),
        ];
        let seed = Seed::new(q, vars).unwrap();
        let (s1, rec) = seed.mutate((1, 0)).unwrap();
        let expect = LaurentPoly::from_terms([(mono("1_0^-1"), 1), (mono("1_0^-1 2_0"), 1)]);
        assert_eq!(**s1.var((1, 0)).unwrap().payload.as_ref().unwrap(), expect);
        assert!(rec.incoming.is_empty());
        assert_eq!(s1.quiver.multiplicity((2, 0), (1, 0)), 1);
        let cd = c(3);
        assert_eq!(
            match_exchange_to_msystem(&rec, &cd, Algebra::A).unwrap(),
            None
        );
        let (s2, _) = s1.mutate((1, 0)).unwrap();
        assert_eq!(s2.quiver, seed.quiver);
        assert_eq!(s2.vars[0].payload, seed.vars[0].payload);
    }

    #[test]
    fn mutation_is_involutive_on_c3_seed() {
        let cd = c(3);
        let seed = build_initial_seed(Algebra::A, &cd, 4, None).unwrap();
        for &v in seed.quiver.vertices() {
            let (s1, rec) = seed.mutate(v).unwrap();
            if !rec.exact {
                continue;
            }
            assert!(s1.quiver.two_cycles().is_empty() && !s1.quiver.has_loops());
            let (s2, _) = s1.mutate(v).unwrap();
            assert_eq!(s2.quiver, seed.quiver);
            let hws = |s: &Seed| s.vars.iter().map(|x| x.hw.clone()).collect::<Vec<_>>();
            assert_eq!(hws(&s2), hws(&seed), "at {v:?}");
        }
    }

    #[test]
    fn boundary_vertex_is_reported() {
        let cd = c(3);
        let seed = build_initial_seed(Algebra::A, &cd, 2, None).unwrap();
        assert!(matches!(
            seed.mutate((1, -40)),
            Err(Error::BoundaryVertex(_))
        ));
    }

    #[test]
    fn schedule_shapes() {
        let cd3 = c(3);
        let cd4 = c(4);
        let cols =
            |cd: &CartanData, case, k: &[u32]| compile_schedule(case, cd, k).unwrap().columns();
        assert!(cols(&cd3, Case::One, &[3, 0, 0]).is_empty());
        assert_eq!(cols(&cd3, Case::One, &[1, 2, 0]), vec![1, 1, 1]);
        assert!(cols(&cd3, Case::Two, &[0, 0, 2]).is_empty());
        assert_eq!(cols(&cd3, Case::Two, &[0, 1, 1]), vec![3, 4]);
        assert_eq!(cols(&cd3, Case::Two, &[0, 2, 1]), vec![3, 4, 3]);
        // n even, r = n-1: alternation starting and, for odd k_r, ending on C_n
        assert_eq!(cols(&cd4, Case::Two, &[0, 0, 3, 1]), vec![4, 5, 4]);
        assert_eq!(cols(&cd4, Case::Two, &[0, 0, 2, 1]), vec![4, 5]);
        assert!(compile_schedule(Case::One, &cd3, &[0, 0, 1]).is_err());
        assert!(compile_schedule(Case::Two, &cd3, &[1, 0, 0]).is_err());
        let t = compile_schedule(Case::Two, &cd3, &[0, 2, 1])
            .unwrap()
            .target;
        assert_eq!(t, ModuleLabel::tt(-8, vec![0, 2, 1]));
    }

    #[test]
    fn eqn1_record_and_payload() {
        let cd = c(3);
        let eng = CharacterEngine::new(cd.clone());
        let sch = compile_schedule(Case::One, &cd, &[1, 1, 0]).unwrap();
        let d = required_depth(Algebra::A, &cd, &sch, 20).unwrap();
        let seed = build_initial_seed(Algebra::A, &cd, d, Some(&eng)).unwrap();
        let run = run_schedule_checked(&seed, &sch).unwrap();
        let target = mono("1_-4 2_-1");
        let rec = run
            .exact_records()
            .find(|r| r.new.hw.as_ref() == Some(&target))
            .unwrap();
        assert_eq!(payload_matches(rec, &eng).unwrap(), Some(true));
        let m = match_exchange_to_msystem(rec, &cd, Algebra::A)
            .unwrap()
            .unwrap();
        assert_eq!(m.family, "eqn1");
        assert!(verify_match(&m, &eng).unwrap());
        let small = build_initial_seed(Algebra::A, &cd, d - 1, None).unwrap();
        assert!(matches!(
            run_schedule_checked(&small, &sch),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn eqn512_record() {
        let cd = c(3);
        let sch = compile_schedule(Case::Two, &cd, &[0, 2, 1]).unwrap();
        let seed = build_initial_seed(Algebra::A, &cd, 6, None).unwrap();
        let run = run_schedule_checked(&seed, &sch).unwrap();
        let target = highest_weight(&sch.target, &cd).unwrap();
        let rec = run
            .exact_records()
            .find(|r| r.new.hw.as_ref() == Some(&target))
            .unwrap();
        let m = match_exchange_to_msystem(rec, &cd, Algebra::A)
            .unwrap()
            .unwrap();
        assert_eq!(m.family, "eqn512");
    }
}
