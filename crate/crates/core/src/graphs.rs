//! Infinite vertex-transitive (or quasi-transitive) graphs behind one oracle
//! interface.
//!
//! Vertices are exact normal forms stored as `Vec<i64>`; two vertices are equal
//! iff their normal forms are equal. Each model also names a subgroup `H` of
//! automorphisms (by generators) together with its orbit labelling, which is
//! what height functions are tested against.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vertex = Vec<i64>;
pub type Label = u32;
pub type Symmetry = Arc<dyn Fn(&Vertex) -> Vertex + Send + Sync>;

pub const DEFAULT_MAX_VERTICES: usize = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid parameter for `{model}`: {reason}")]
    InvalidParameter { model: String, reason: String },
    #[error("invalid periodic graph: {0}")]
    InvalidPeriodicGraph(String),
    #[error("vertex budget of {limit} exceeded while building a ball of radius {radius}")]
    BudgetExceeded { limit: usize, radius: usize },
}

pub trait GraphOracle: Send + Sync {
    fn name(&self) -> String;

    fn root(&self) -> Vertex;

    /// Neighbours in a fixed order, each tagged with an index into `label_names`.
    fn neighbors(&self, v: &Vertex) -> Vec<(Vertex, Label)>;

    fn label_names(&self) -> Vec<String>;

    /// Orbit of `v` under the model's designated subgroup.
    fn orbit_label(&self, _v: &Vertex) -> usize {
        0
    }

    fn orbit_count(&self) -> usize {
        1
    }

    /// One vertex per orbit, indexed by orbit label.
    fn orbit_representatives(&self) -> Vec<Vertex> {
        vec![self.root()]
    }

    /// Generators of the designated automorphism subgroup.
    fn symmetries(&self) -> Vec<Symmetry>;

    fn canonical_key(&self, v: &Vertex) -> Vec<u8> {
        v.iter().flat_map(|x| x.to_be_bytes()).collect()
    }

    fn degree(&self, v: &Vertex) -> usize {
        self.neighbors(v).len()
    }
}

impl fmt::Debug for dyn GraphOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GraphOracle({})", self.name())
    }
}

// ---------------------------------------------------------------------------
// Catalog models

/// The hypercubic lattice `Z^d` with unit steps.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub dim: usize,
}

impl GraphOracle for Lattice {
    fn name(&self) -> String {
        format!("zd{}", self.dim)
    }
    fn root(&self) -> Vertex {
        vec![0; self.dim]
    }
    fn neighbors(&self, v: &Vertex) -> Vec<(Vertex, Label)> {
        let mut out = Vec::with_capacity(2 * self.dim);
        for sign in [1, -1] {
            for i in 0..self.dim {
                let mut w = v.clone();
                w[i] += sign;
                let label = if sign == 1 { i } else { self.dim + i };
                out.push((w, label as Label));
            }
        }
        out
    }
    fn label_names(&self) -> Vec<String> {
        const LOWER: [&str; 3] = ["x", "y", "z"];
        const UPPER: [&str; 3] = ["X", "Y", "Z"];
        if self.dim <= 3 {
            LOWER[..self.dim].iter().chain(&UPPER[..self.dim]).map(|s| s.to_string()).collect()
        } else {
            (1..=self.dim)
                .map(|i| format!("e{i}"))
                .chain((1..=self.dim).map(|i| format!("E{i}")))
                .collect()
        }
    }
    fn symmetries(&self) -> Vec<Symmetry> {
        (0..self.dim)
            .map(|i| {
                Arc::new(move |v: &Vertex| {
                    let mut w = v.clone();
                    w[i] += 1;
                    w
                }) as Symmetry
            })
            .collect()
    }
}

/// Cayley graph of the infinite dihedral group `<s1, s2 | s1^2, s2^2>`,
/// drawn as the integer line. The designated subgroup is the shift group.
#[derive(Debug, Clone)]
pub struct Dihedral;

fn dihedral_step(n: i64, generator: usize) -> i64 {
    let even = n.rem_euclid(2) == 0;
    match (generator, even) {
        (0, true) | (1, false) => n + 1,
        _ => n - 1,
    }
}

impl GraphOracle for Dihedral {
    fn name(&self) -> String {
        "dihedral".into()
    }
    fn root(&self) -> Vertex {
        vec![0]
    }
    fn neighbors(&self, v: &Vertex) -> Vec<(Vertex, Label)> {
        (0..2).map(|g| (vec![dihedral_step(v[0], g)], g as Label)).collect()
    }
    fn label_names(&self) -> Vec<String> {
        vec!["s1".into(), "s2".into()]
    }
    fn symmetries(&self) -> Vec<Symmetry> {
        vec![Arc::new(|v: &Vertex| vec![v[0] + 1])]
    }
}

/// Cayley graph of a free product of copies of `Z` and `Z/2`: a regular tree
/// whose vertices are freely reduced words.
#[derive(Debug, Clone)]
pub struct FreeProductTree {
    name: String,
    labels: Vec<String>,
    inverse: Vec<usize>,
}

impl FreeProductTree {
    pub fn new(name: &str, labels: &[&str], inverse: &[usize]) -> Self {
        assert_eq!(labels.len(), inverse.len());
        FreeProductTree {
            name: name.into(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            inverse: inverse.to_vec(),
        }
    }

    /// `<s1, s2, t | s1 t, s2^2>`, the 3-regular tree.
    pub fn tree3() -> Self {
        Self::new("tree3", &["s1", "s2", "t"], &[2, 1, 0])
    }

    /// Free group of rank two, the 4-regular tree.
    pub fn free2() -> Self {
        Self::new("free2", &["a", "b", "A", "B"], &[2, 3, 0, 1])
    }
}

impl GraphOracle for FreeProductTree {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn root(&self) -> Vertex {
        Vec::new()
    }
    fn neighbors(&self, v: &Vertex) -> Vec<(Vertex, Label)> {
        (0..self.labels.len())
            .map(|g| {
                let mut w = v.clone();
                if w.last() == Some(&(self.inverse[g] as i64)) {
                    w.pop();
                } else {
                    w.push(g as i64);
                }
                (w, g as Label)
            })
            .collect()
    }
    fn label_names(&self) -> Vec<String> {
        self.labels.clone()
    }
    fn symmetries(&self) -> Vec<Symmetry> {
        (0..self.labels.len())
            .map(|g| {
                let inv = self.inverse[g] as i64;
                Arc::new(move |v: &Vertex| {
                    if v.first() == Some(&inv) {
                        v[1..].to_vec()
                    } else {
                        let mut w = Vec::with_capacity(v.len() + 1);
                        w.push(g as i64);
                        w.extend_from_slice(v);
                        w
                    }
                }) as Symmetry
            })
            .collect()
    }
}

/// Discrete Heisenberg group; `(a, b, c)` is the unitriangular matrix
/// `[[1, a, c], [0, 1, b], [0, 0, 1]]`, generators act by right multiplication.
#[derive(Debug, Clone)]
pub struct Heisenberg;

impl GraphOracle for Heisenberg {
    fn name(&self) -> String {
        "heisenberg".into()
    }
    fn root(&self) -> Vertex {
        vec![0, 0, 0]
    }
    fn neighbors(&self, v: &Vertex) -> Vec<(Vertex, Label)> {
        let (a, b, c) = (v[0], v[1], v[2]);
        vec![
            (vec![a + 1, b, c], 0),
            (vec![a, b + 1, c + a], 1),
            (vec![a, b, c + 1], 2),
            (vec![a - 1, b, c], 3),
            (vec![a, b - 1, c - a], 4),
            (vec![a, b, c - 1], 5),
        ]
    }
    fn label_names(&self) -> Vec<String> {
        ["x", "y", "z", "X", "Y", "Z"].iter().map(|s| s.to_string()).collect()
    }
    fn symmetries(&self) -> Vec<Symmetry> {
        vec![
            Arc::new(|v: &Vertex| vec![v[0] + 1, v[1], v[2] + v[1]]),
            Arc::new(|v: &Vertex| vec![v[0], v[1] + 1, v[2]]),
            Arc::new(|v: &Vertex| vec![v[0], v[1], v[2] + 1]),
        ]
    }
}

/// Lamplighter group `Z/2 wr Z`; a vertex is `[marker, lit lamps ascending...]`.
#[derive(Debug, Clone)]
pub struct Lamplighter;

fn toggle_lamp(v: &Vertex, at: i64) -> Vertex {
    let mut lamps: Vec<i64> = v[1..].to_vec();
    match lamps.binary_search(&at) {
        Ok(i) => {
            lamps.remove(i);
        }
        Err(i) => lamps.insert(i, at),
    }
    let mut w = Vec::with_capacity(lamps.len() + 1);
    w.push(v[0]);
    w.extend(lamps);
    w
}

impl GraphOracle for Lamplighter {
    fn name(&self) -> String {
        "lamplighter".into()
    }
    fn root(&self) -> Vertex {
        vec![0]
    }
    fn neighbors(&self, v: &Vertex) -> Vec<(Vertex, Label)> {
        let mut t = v.clone();
        t[0] += 1;
        let mut u = v.clone();
        u[0] -= 1;
        vec![(toggle_lamp(v, v[0]), 0), (t, 1), (u, 2)]
    }
    fn label_names(&self) -> Vec<String> {
        vec!["a".into(), "t".into(), "u".into()]
    }
    fn symmetries(&self) -> Vec<Symmetry> {
        vec![
            Arc::new(|v: &Vertex| toggle_lamp(v, 0)),
            Arc::new(|v: &Vertex| v.iter().map(|x| x + 1).collect()),
        ]
    }
}

/// `Z x C_m`: the square lattice wrapped into a cylinder of circumference `m`.
#[derive(Debug, Clone)]
pub struct Cylinder {
    pub m: i64,
}

impl GraphOracle for Cylinder {
    fn name(&self) -> String {
        format!("cylinder{}", self.m)
    }
    fn root(&self) -> Vertex {
        vec![0, 0]
    }
    fn neighbors(&self, v: &Vertex) -> Vec<(Vertex, Label)> {
        let m = self.m;
        vec![
            (vec![v[0] + 1, v[1]], 0),
            (vec![v[0], (v[1] + 1).rem_euclid(m)], 1),
            (vec![v[0] - 1, v[1]], 2),
            (vec![v[0], (v[1] - 1).rem_euclid(m)], 3),
        ]
    }
    fn label_names(&self) -> Vec<String> {
        ["x", "y", "X", "Y"].iter().map(|s| s.to_string()).collect()
    }
    fn symmetries(&self) -> Vec<Symmetry> {
        let m = self.m;
        vec![
            Arc::new(|v: &Vertex| vec![v[0] + 1, v[1]]),
            Arc::new(move |v: &Vertex| vec![v[0], (v[1] + 1).rem_euclid(m)]),
        ]
    }
}

/// Cayley graph of `D_inf x J_m` with `J_m = <a, b | ab, a^m>`.
#[derive(Debug, Clone)]
pub struct LadderDihedral {
    pub m: i64,
}

impl GraphOracle for LadderDihedral {
    fn name(&self) -> String {
        format!("ladder_dihedral{}", self.m)
    }
    fn root(&self) -> Vertex {
        vec![0, 0]
    }
    fn neighbors(&self, v: &Vertex) -> Vec<(Vertex, Label)> {
        let m = self.m;
        vec![
            (vec![dihedral_step(v[0], 0), v[1]], 0),
            (vec![dihedral_step(v[0], 1), v[1]], 1),
            (vec![v[0], (v[1] + 1).rem_euclid(m)], 2),
            (vec![v[0], (v[1] - 1).rem_euclid(m)], 3),
        ]
    }
    fn label_names(&self) -> Vec<String> {
        ["s1", "s2", "a", "b"].iter().map(|s| s.to_string()).collect()
    }
    fn symmetries(&self) -> Vec<Symmetry> {
        let m = self.m;
        vec![
            Arc::new(|v: &Vertex| vec![v[0] + 1, v[1]]),
            Arc::new(move |v: &Vertex| vec![v[0], (v[1] + 1).rem_euclid(m)]),
        ]
    }
}

/// The 3-regular tree with a fixed end, plus an edge from every vertex to
/// its grandparent towards that end.
///
/// A vertex is `[j, w...]`: start at the `j`-th ancestor of the root and
/// descend along the child choices `w` (each 0 or 1). Child 0 of every
/// ancestor is the next vertex on the root's ray, so the normal form never
/// has `j > 0` with `w` starting at 0. The level (height towards the end) is
/// `j - |w|`.
#[derive(Debug, Clone)]
pub struct Grandparent;

impl Grandparent {
    pub fn normalize(mut v: Vertex) -> Vertex {
        let mut skip = 0;
        while v[0] > 0 && v.len() > 1 + skip && v[1 + skip] == 0 {
            v[0] -= 1;
            skip += 1;
        }
        if skip > 0 {
            v.drain(1..1 + skip);
        }
        v
    }

    pub fn level(v: &Vertex) -> i64 {
        v[0] - (v.len() as i64 - 1)
    }

    fn parent(v: &Vertex) -> Vertex {
        if v.len() > 1 {
            v[..v.len() - 1].to_vec()
        } else {
            vec![v[0] + 1]
        }
    }

    fn child(v: &Vertex, c: i64) -> Vertex {
        let mut w = v.clone();
        w.push(c);
        Self::normalize(w)
    }

    /// Translation one step towards the end along the root's ray.
    pub fn shift(v: &Vertex) -> Vertex {
        let mut w = v.clone();
        w[0] += 1;
        Self::normalize(w)
    }

    /// Swaps the two subtrees below the root.
    pub fn flip_root(v: &Vertex) -> Vertex {
        let mut w = v.clone();
        if w[0] == 0 && w.len() > 1 {
            w[1] = 1 - w[1];
        }
        w
    }
}

impl GraphOracle for Grandparent {
    fn name(&self) -> String {
        "grandparent".into()
    }
    fn root(&self) -> Vertex {
        vec![0]
    }
    fn neighbors(&self, v: &Vertex) -> Vec<(Vertex, Label)> {
        let p = Self::parent(v);
        let c0 = Self::child(v, 0);
        let c1 = Self::child(v, 1);
        vec![
            (p.clone(), 0),
            (c0.clone(), 1),
            (c1.clone(), 2),
            (Self::parent(&p), 3),
            (Self::child(&c0, 0), 4),
            (Self::child(&c0, 1), 5),
            (Self::child(&c1, 0), 6),
            (Self::child(&c1, 1), 7),
        ]
    }
    fn label_names(&self) -> Vec<String> {
        ["parent", "child0", "child1", "grandparent", "gc00", "gc01", "gc10", "gc11"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }
    fn symmetries(&self) -> Vec<Symmetry> {
        vec![Arc::new(Self::shift), Arc::new(Self::flip_root)]
    }
}

// ---------------------------------------------------------------------------
// Periodic (voltage) graphs

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VoltageEdge {
    pub from: usize,
    pub to: usize,
    pub shift: Vec<i64>,
    pub label: Option<String>,
}

/// Finite quotient multigraph with `Z^d` voltages. The cover has vertices
/// `(o, x)` and edges `(o1, x) ~ (o2, x + t)`. Orbits are 0-based internally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicGraph {
    orbits: usize,
    dim: usize,
    edges: Vec<VoltageEdge>,
    out: Vec<Vec<usize>>,
}

/// JSON form: 1-based orbits, optional `labels` holding a forward and a
/// reverse label per listed edge.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PeriodicGraphDocument {
    pub orbits: usize,
    pub dim: usize,
    pub edges: Vec<(usize, usize, Vec<i64>)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<[String; 2]>>,
}

pub fn parse_periodic_graph(text: &str) -> Result<PeriodicGraph, GraphError> {
    let doc: PeriodicGraphDocument = serde_json::from_str(text)
        .map_err(|e| GraphError::InvalidPeriodicGraph(e.to_string()))?;
    PeriodicGraph::from_document(&doc)
}

impl PeriodicGraph {
    pub fn from_document(doc: &PeriodicGraphDocument) -> Result<Self, GraphError> {
        let bad = |s: String| GraphError::InvalidPeriodicGraph(s);
        if doc.orbits == 0 {
            return Err(bad("no orbits".into()));
        }
        if let Some(labels) = &doc.labels {
            if labels.len() != doc.edges.len() {
                return Err(bad(format!(
                    "{} label pairs for {} edges",
                    labels.len(),
                    doc.edges.len()
                )));
            }
        }
        let mut edges: Vec<VoltageEdge> = Vec::new();
        let mut seen = HashSet::new();
        for (i, (o1, o2, t)) in doc.edges.iter().enumerate() {
            if *o1 == 0 || *o2 == 0 || *o1 > doc.orbits || *o2 > doc.orbits {
                return Err(bad(format!("edge {i}: orbit out of range 1..={}", doc.orbits)));
            }
            if t.len() != doc.dim {
                return Err(bad(format!("edge {i}: voltage has length {}", t.len())));
            }
            let (a, b) = (o1 - 1, o2 - 1);
            if a == b && t.iter().all(|&x| x == 0) {
                return Err(bad(format!("edge {i} is a loop")));
            }
            let rev: Vec<i64> = t.iter().map(|x| -x).collect();
            let (fwd_label, rev_label) = match &doc.labels {
                Some(l) => (Some(l[i][0].clone()), Some(l[i][1].clone())),
                None => (None, None),
            };
            if !seen.insert((a, b, t.clone())) {
                return Err(bad(format!("edge {i} repeats ({o1}, {o2}, {t:?})")));
            }
            edges.push(VoltageEdge { from: a, to: b, shift: t.clone(), label: fwd_label });
            if seen.insert((b, a, rev.clone())) {
                edges.push(VoltageEdge { from: b, to: a, shift: rev, label: rev_label });
            }
        }
        let mut out = vec![Vec::new(); doc.orbits];
        for (i, e) in edges.iter().enumerate() {
            out[e.from].push(i);
        }
        let pg = PeriodicGraph { orbits: doc.orbits, dim: doc.dim, edges, out };
        if pg.edges.iter().any(|e| e.label.is_some()) {
            pg.check_labels()?;
        }
        pg.check_connected()?;
        Ok(pg)
    }

    pub fn to_document(&self) -> PeriodicGraphDocument {
        // Emit one representative per reversal pair.
        let mut listed = HashSet::new();
        let mut edges = Vec::new();
        let mut labels = Vec::new();
        for e in &self.edges {
            let rev: Vec<i64> = e.shift.iter().map(|x| -x).collect();
            if listed.contains(&(e.to, e.from, rev.clone())) {
                continue;
            }
            listed.insert((e.from, e.to, e.shift.clone()));
            edges.push((e.from + 1, e.to + 1, e.shift.clone()));
            let back = self.edges.iter().find(|f| f.from == e.to && f.to == e.from && f.shift == rev);
            labels.push([
                e.label.clone().unwrap_or_default(),
                back.and_then(|f| f.label.clone()).unwrap_or_default(),
            ]);
        }
        let has_labels = self.edges.iter().any(|e| e.label.is_some());
        PeriodicGraphDocument {
            orbits: self.orbits,
            dim: self.dim,
            edges,
            labels: has_labels.then_some(labels),
        }
    }

    fn check_labels(&self) -> Result<(), GraphError> {
        if self.edges.iter().any(|e| e.label.is_none()) {
            return Err(GraphError::InvalidPeriodicGraph("some edges are unlabelled".into()));
        }
        for o in 0..self.orbits {
            let mut names = HashSet::new();
            for &i in &self.out[o] {
                if !names.insert(self.edges[i].label.clone()) {
                    return Err(GraphError::InvalidPeriodicGraph(format!(
                        "orbit {} has two out-edges labelled {:?}",
                        o + 1,
                        self.edges[i].label
                    )));
                }
            }
        }
        Ok(())
    }

    /// BFS on a bounded window: the cover is connected iff every orbit at the
    /// origin cell and every unit translate of the base vertex is reachable.
    fn check_connected(&self) -> Result<(), GraphError> {
        let origin = vec![0i64; self.dim];
        let mut targets: HashSet<Vertex> = (0..self.orbits).map(|o| self.vertex(o, &origin)).collect();
        for i in 0..self.dim {
            let mut x = origin.clone();
            x[i] = 1;
            targets.insert(self.vertex(0, &x));
        }
        let window = 4 + 2 * self.edges.iter().flat_map(|e| e.shift.iter()).map(|x| x.abs()).max().unwrap_or(0) * self.orbits as i64;
        let start = self.vertex(0, &origin);
        let mut seen: HashSet<Vertex> = HashSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            targets.remove(&v);
            if targets.is_empty() {
                return Ok(());
            }
            for (w, _) in self.cover_neighbors(&v) {
                if w[1..].iter().all(|x| x.abs() <= window) && seen.insert(w.clone()) {
                    queue.push_back(w);
                }
            }
        }
        Err(GraphError::InvalidPeriodicGraph("cover is not connected".into()))
    }

    pub fn orbits(&self) -> usize {
        self.orbits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Directed edges after reversal closure.
    pub fn edges(&self) -> &[VoltageEdge] {
        &self.edges
    }

    pub fn out_edges(&self, orbit: usize) -> impl Iterator<Item = &VoltageEdge> {
        self.out[orbit].iter().map(move |&i| &self.edges[i])
    }

    pub fn degree_of_orbit(&self, orbit: usize) -> usize {
        self.out[orbit].len()
    }

    fn vertex(&self, orbit: usize, x: &[i64]) -> Vertex {
        let mut v = Vec::with_capacity(1 + self.dim);
        v.push(orbit as i64);
        v.extend_from_slice(x);
        v
    }

    /// Cover vertex `(o, x)` for a 1-based orbit `o`.
    pub fn cover_vertex(&self, orbit: usize, x: &[i64]) -> Vertex {
        assert!((1..=self.orbits).contains(&orbit), "orbit {orbit} out of range");
        assert_eq!(x.len(), self.dim);
        self.vertex(orbit - 1, x)
    }

    pub fn cover_neighbors(&self, v: &Vertex) -> Vec<(Vertex, usize)> {
        let o = v[0] as usize;
        self.out[o]
            .iter()
            .map(|&i| {
                let e = &self.edges[i];
                let mut w = Vec::with_capacity(v.len());
                w.push(e.to as i64);
                w.extend(v[1..].iter().zip(&e.shift).map(|(a, b)| a + b));
                (w, i)
            })
            .collect()
    }
}

/// A periodic graph's cover as an oracle. The designated subgroup is the
/// translation group `Z^d`; orbits are the quotient vertices.
#[derive(Debug, Clone)]
pub struct PeriodicCover {
    name: String,
    pg: Arc<PeriodicGraph>,
    labels: Vec<String>,
    edge_label: Vec<Label>,
}

impl PeriodicCover {
    pub fn new(name: &str, pg: PeriodicGraph) -> Self {
        let mut labels: Vec<String> = Vec::new();
        let mut edge_label = Vec::new();
        for (i, e) in pg.edges.iter().enumerate() {
            let name = e.label.clone().unwrap_or_else(|| format!("e{i}"));
            let idx = match labels.iter().position(|l| *l == name) {
                Some(p) => p,
                None => {
                    labels.push(name);
                    labels.len() - 1
                }
            };
            edge_label.push(idx as Label);
        }
        PeriodicCover { name: name.into(), pg: Arc::new(pg), labels, edge_label }
    }

    pub fn periodic_graph(&self) -> &PeriodicGraph {
        &self.pg
    }
}

impl GraphOracle for PeriodicCover {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn root(&self) -> Vertex {
        self.pg.vertex(0, &vec![0; self.pg.dim])
    }
    fn neighbors(&self, v: &Vertex) -> Vec<(Vertex, Label)> {
        self.pg
            .cover_neighbors(v)
            .into_iter()
            .map(|(w, i)| (w, self.edge_label[i]))
            .collect()
    }
    fn label_names(&self) -> Vec<String> {
        self.labels.clone()
    }
    fn orbit_label(&self, v: &Vertex) -> usize {
        v[0] as usize
    }
    fn orbit_count(&self) -> usize {
        self.pg.orbits
    }
    fn orbit_representatives(&self) -> Vec<Vertex> {
        (0..self.pg.orbits).map(|o| self.pg.vertex(o, &vec![0; self.pg.dim])).collect()
    }
    fn symmetries(&self) -> Vec<Symmetry> {
        (0..self.pg.dim)
            .map(|i| {
                Arc::new(move |v: &Vertex| {
                    let mut w = v.clone();
                    w[1 + i] += 1;
                    w
                }) as Symmetry
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Catalog

/// Identifier of a catalog model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Model {
    Zd(usize),
    Dihedral,
    Tree3,
    Free2,
    Heisenberg,
    Lamplighter,
    Hexagonal,
    SquareOctagon,
    CylinderZd(i64),
    LadderDihedral(i64),
    Grandparent,
    DihedralLine,
}

impl Model {
    /// Accepts `zd2`, `zd(2)`, `cylinder8`, `cylinder_zd(8)`, `ladder_dihedral(5)`, ...
    pub fn parse(s: &str) -> Result<Model, GraphError> {
        let s = s.trim();
        let fixed = match s {
            "dihedral" => Some(Model::Dihedral),
            "tree3" => Some(Model::Tree3),
            "free2" => Some(Model::Free2),
            "heisenberg" => Some(Model::Heisenberg),
            "lamplighter" => Some(Model::Lamplighter),
            "hexagonal" => Some(Model::Hexagonal),
            "square_octagon" => Some(Model::SquareOctagon),
            "grandparent" => Some(Model::Grandparent),
            "dihedral_line" => Some(Model::DihedralLine),
            _ => None,
        };
        if let Some(m) = fixed {
            return Ok(m);
        }
        let (head, arg) = split_param(s);
        let param = |what: &str| -> Result<i64, GraphError> {
            arg.ok_or_else(|| GraphError::InvalidParameter {
                model: what.into(),
                reason: "missing parameter".into(),
            })?
            .parse::<i64>()
            .map_err(|e| GraphError::InvalidParameter { model: what.into(), reason: e.to_string() })
        };
        let model = match head {
            "zd" => {
                let d = param("zd")?;
                if d < 1 {
                    return Err(GraphError::InvalidParameter {
                        model: "zd".into(),
                        reason: "dimension must be at least 1".into(),
                    });
                }
                Model::Zd(d as usize)
            }
            "cylinder" | "cylinder_zd" => Model::CylinderZd(param("cylinder_zd")?),
            "ladder" | "ladder_dihedral" => Model::LadderDihedral(param("ladder_dihedral")?),
            _ => return Err(GraphError::UnknownPreset(s.into())),
        };
        if let Model::CylinderZd(m) | Model::LadderDihedral(m) = model {
            if m < 3 {
                return Err(GraphError::InvalidParameter {
                    model: head.into(),
                    reason: format!("cyclic factor needs m >= 3, got {m}"),
                });
            }
        }
        Ok(model)
    }

    pub fn name(&self) -> String {
        match self {
            Model::Zd(d) => format!("zd{d}"),
            Model::Dihedral => "dihedral".into(),
            Model::Tree3 => "tree3".into(),
            Model::Free2 => "free2".into(),
            Model::Heisenberg => "heisenberg".into(),
            Model::Lamplighter => "lamplighter".into(),
            Model::Hexagonal => "hexagonal".into(),
            Model::SquareOctagon => "square_octagon".into(),
            Model::CylinderZd(m) => format!("cylinder{m}"),
            Model::LadderDihedral(m) => format!("ladder_dihedral{m}"),
            Model::Grandparent => "grandparent".into(),
            Model::DihedralLine => "dihedral_line".into(),
        }
    }

    /// Name of the embedded presentation whose Cayley graph this model is.
    pub fn presentation_preset(&self) -> Option<&'static str> {
        Some(match self {
            Model::Zd(2) => "zd2",
            Model::Zd(3) => "zd3",
            Model::Dihedral => "dihedral",
            Model::Tree3 => "tree3",
            Model::Free2 => "free2",
            Model::Heisenberg => "heisenberg",
            Model::Lamplighter => "lamplighter",
            Model::Hexagonal => "hexagonal",
            Model::SquareOctagon => "square_octagon",
            _ => return None,
        })
    }
}

fn split_param(s: &str) -> (&str, Option<&str>) {
    if let Some(open) = s.find('(') {
        let arg = s[open + 1..].strip_suffix(')').unwrap_or(&s[open + 1..]);
        return (&s[..open], Some(arg));
    }
    let digits = s.trim_end_matches(|c: char| c.is_ascii_digit());
    if digits.len() < s.len() && !digits.is_empty() {
        (digits.trim_end_matches('_'), Some(&s[digits.len()..]))
    } else {
        (s, None)
    }
}

pub const MODEL_NAMES: &[&str] = &[
    "zd(d)",
    "dihedral",
    "tree3",
    "free2",
    "heisenberg",
    "lamplighter",
    "hexagonal",
    "square_octagon",
    "cylinder_zd(m)",
    "ladder_dihedral(m)",
    "grandparent",
    "dihedral_line",
];

pub fn catalog(model: &Model) -> Arc<dyn GraphOracle> {
    match model {
        Model::Zd(d) => Arc::new(Lattice { dim: *d }),
        Model::Dihedral => Arc::new(Dihedral),
        Model::Tree3 => Arc::new(FreeProductTree::tree3()),
        Model::Free2 => Arc::new(FreeProductTree::free2()),
        Model::Heisenberg => Arc::new(Heisenberg),
        Model::Lamplighter => Arc::new(Lamplighter),
        Model::Hexagonal => Arc::new(PeriodicCover::new("hexagonal", crate::presets::periodic("hexagonal"))),
        Model::SquareOctagon => Arc::new(PeriodicCover::new(
            "square_octagon",
            crate::presets::periodic("square_octagon"),
        )),
        Model::CylinderZd(m) => Arc::new(Cylinder { m: *m }),
        Model::LadderDihedral(m) => Arc::new(LadderDihedral { m: *m }),
        Model::Grandparent => Arc::new(Grandparent),
        Model::DihedralLine => Arc::new(PeriodicCover::new(
            "dihedral_line",
            crate::presets::periodic("dihedral_line"),
        )),
    }
}

/// Parses a model name and returns its oracle.
pub fn catalog_by_name(name: &str) -> Result<Arc<dyn GraphOracle>, GraphError> {
    Ok(catalog(&Model::parse(name)?))
}

// ---------------------------------------------------------------------------
// Balls

/// Induced subgraph on the vertices within distance `radius` of the center.
/// Vertices are sorted by (distance, canonical key); index 0 is the center.
#[derive(Debug, Clone)]
pub struct Ball {
    pub radius: usize,
    pub vertices: Vec<Vertex>,
    pub distances: Vec<usize>,
    pub orbits: Vec<usize>,
    /// Neighbours inside the ball, in the oracle's expansion order.
    pub adjacency: Vec<Vec<usize>>,
    /// Each undirected edge once, as `(i, j)` with `i < j`.
    pub edges: Vec<(usize, usize)>,
    index: HashMap<Vertex, usize>,
}

impl Ball {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, v: &Vertex) -> Option<usize> {
        self.index.get(v).copied()
    }

    /// Number of vertices at each distance.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.radius + 1];
        for &d in &self.distances {
            sizes[d] += 1;
        }
        sizes
    }
}

pub fn ball(g: &dyn GraphOracle, radius: usize, max_vertices: usize) -> Result<Ball, GraphError> {
    ball_around(g, &g.root(), radius, max_vertices)
}

pub fn ball_around(
    g: &dyn GraphOracle,
    center: &Vertex,
    radius: usize,
    max_vertices: usize,
) -> Result<Ball, GraphError> {
    let mut dist: HashMap<Vertex, usize> = HashMap::from([(center.clone(), 0)]);
    let mut frontier = vec![center.clone()];
    let mut expansions: HashMap<Vertex, Vec<Vertex>> = HashMap::new();
    for d in 0..=radius {
        let mut next = Vec::new();
        for v in &frontier {
            let nbrs: Vec<Vertex> = g.neighbors(v).into_iter().map(|(w, _)| w).collect();
            if d < radius {
                for w in &nbrs {
                    if !dist.contains_key(w) {
                        dist.insert(w.clone(), d + 1);
                        next.push(w.clone());
                    }
                }
                if dist.len() > max_vertices {
                    return Err(GraphError::BudgetExceeded { limit: max_vertices, radius });
                }
            }
            expansions.insert(v.clone(), nbrs);
        }
        frontier = next;
    }

    let mut order: Vec<(usize, Vec<u8>, Vertex)> =
        dist.iter().map(|(v, &d)| (d, g.canonical_key(v), v.clone())).collect();
    order.sort();
    let index: HashMap<Vertex, usize> =
        order.iter().enumerate().map(|(i, (_, _, v))| (v.clone(), i)).collect();
    let mut adjacency = Vec::with_capacity(order.len());
    let mut edges = Vec::new();
    for (i, (_, _, v)) in order.iter().enumerate() {
        let mut adj = Vec::new();
        for w in &expansions[v] {
            if let Some(&j) = index.get(w) {
                if !adj.contains(&j) && j != i {
                    adj.push(j);
                    if i < j {
                        edges.push((i, j));
                    }
                }
            }
        }
        adjacency.push(adj);
    }
    edges.sort_unstable();
    Ok(Ball {
        radius,
        distances: order.iter().map(|(d, _, _)| *d).collect(),
        orbits: order.iter().map(|(_, _, v)| g.orbit_label(v)).collect(),
        vertices: order.into_iter().map(|(_, _, v)| v).collect(),
        adjacency,
        edges,
        index,
    })
}
