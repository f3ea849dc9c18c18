//! Graph height functions: axiom checks, harmonic construction on periodic
//! graphs, and the parameters `d(h)` and `r(h, H)`.
//!
//! On a periodic graph every function whose differences are invariant under
//! the translation group is affine, `f(o) + <lambda, x>`, so the harmonic
//! construction is a finite linear system in `(lambda, f)`. All arithmetic is
//! exact over the rationals.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::graphs::{
    ball, ball_around, GraphError, GraphOracle, Grandparent, Model, PeriodicGraph,
    Symmetry, Vertex,
};
use crate::linalg::{self, q, Q};
use crate::presentations::{self, GroupHeightSpec, Presentation, Witness};
use crate::presets;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeightError {
    #[error("no harmonic solution for lambda = e{direction}")]
    NoSolution { direction: usize },
    #[error("harmonic extension is not unique ({dimension}-dimensional freedom); is the quotient connected?")]
    NotUnique { dimension: usize },
    #[error("boundary data is not the restriction of an affine function")]
    InconsistentBoundary,
    #[error("boundary data does not determine an affine function")]
    UnderdeterminedBoundary,
    #[error("orbit {0} out of range")]
    OrbitOutOfRange(usize),
    #[error("no height function found via this method: every solution is constant")]
    NoHeightFunction,
    #[error("no increasing combination with coefficients up to max-norm {bound}")]
    SearchExhausted { bound: u32 },
    #[error("height not evaluable at {0:?}")]
    NotEvaluable(Vertex),
    #[error("group height function is not well defined: {0}")]
    NotWellDefined(Witness),
    #[error("no group height function for this presentation")]
    NoGroupHeight,
    #[error("unknown height `{height}` for model `{model}`")]
    UnknownHeight { model: String, height: String },
    #[error("integer overflow in scaled height")]
    Overflow,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

// ---------------------------------------------------------------------------
// Subgroups and height functions

/// Automorphism subgroup `H` given by generators and an orbit labelling.
#[derive(Clone)]
pub struct Subgroup {
    pub name: String,
    pub generators: Vec<Symmetry>,
    pub orbit_count: usize,
    pub orbit_of: Arc<dyn Fn(&Vertex) -> usize + Send + Sync>,
    pub representatives: Vec<Vertex>,
}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Subgroup")
            .field("name", &self.name)
            .field("generators", &self.generators.len())
            .field("orbit_count", &self.orbit_count)
            .finish()
    }
}

impl Subgroup {
    /// The model's designated subgroup.
    pub fn of_oracle(g: &Arc<dyn GraphOracle>) -> Self {
        let oracle = Arc::clone(g);
        Subgroup {
            name: format!("H({})", g.name()),
            generators: g.symmetries(),
            orbit_count: g.orbit_count(),
            orbit_of: Arc::new(move |v| oracle.orbit_label(v)),
            representatives: g.orbit_representatives(),
        }
    }

    /// Translation group of a periodic graph.
    pub fn translations(pg: &PeriodicGraph) -> Self {
        let dim = pg.dim();
        Subgroup {
            name: format!("Z^{dim}"),
            generators: (0..dim)
                .map(|i| {
                    Arc::new(move |v: &Vertex| {
                        let mut w = v.clone();
                        w[1 + i] += 1;
                        w
                    }) as Symmetry
                })
                .collect(),
            orbit_count: pg.orbits(),
            orbit_of: Arc::new(|v| v[0] as usize),
            representatives: (0..pg.orbits())
                .map(|o| {
                    let mut v = vec![0; dim + 1];
                    v[0] = o as i64;
                    v
                })
                .collect(),
        }
    }

    pub fn transitive(&self) -> bool {
        self.orbit_count == 1
    }
}

type HeightFn = Arc<dyn Fn(&Vertex) -> Option<i64> + Send + Sync>;

/// An integer height function paired with the subgroup it is tested against.
#[derive(Clone)]
pub struct GraphHeightFunction {
    pub name: String,
    eval: HeightFn,
    pub subgroup: Subgroup,
}

impl fmt::Debug for GraphHeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GraphHeightFunction")
            .field("name", &self.name)
            .field("subgroup", &self.subgroup)
            .finish()
    }
}

impl GraphHeightFunction {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(&Vertex) -> Option<i64> + Send + Sync + 'static,
        subgroup: Subgroup,
    ) -> Self {
        GraphHeightFunction { name: name.into(), eval: Arc::new(eval), subgroup }
    }

    pub fn height(&self, v: &Vertex) -> Option<i64> {
        (self.eval)(v)
    }

    pub fn height_or_err(&self, v: &Vertex) -> Result<i64, HeightError> {
        self.height(v).ok_or_else(|| HeightError::NotEvaluable(v.clone()))
    }

    /// `h(v) = v[index]`.
    pub fn coordinate(g: &Arc<dyn GraphOracle>, index: usize) -> Self {
        Self::new(format!("coordinate{index}"), move |v| v.get(index).copied(), Subgroup::of_oracle(g))
    }

    /// Height towards the fixed end of the grandparent graph.
    pub fn grandparent_level() -> Self {
        let g: Arc<dyn GraphOracle> = Arc::new(Grandparent);
        Self::new("level", |v| Some(Grandparent::level(v)), Subgroup::of_oracle(&g))
    }

    /// Integer affine function `f(o) + <lambda, x>` on a periodic cover.
    pub fn periodic(pg: &PeriodicGraph, lambda: Vec<i64>, offsets: Vec<i64>) -> Self {
        let name = format!("affine{lambda:?}{offsets:?}");
        Self::new(
            name,
            move |v| {
                let o = *v.first()? as usize;
                let base = *offsets.get(o)?;
                Some(base + v[1..].iter().zip(&lambda).map(|(x, l)| x * l).sum::<i64>())
            },
            Subgroup::translations(pg),
        )
    }
}

/// Transports a group height function to a catalog model by following
/// labelled edges from the root, tabulating heights within `radius`.
pub fn ghf_height(
    g: &Arc<dyn GraphOracle>,
    p: &Presentation,
    spec: &GroupHeightSpec,
    radius: usize,
) -> Result<GraphHeightFunction, HeightError> {
    let table = presentations::spell_heights(spec, p, g.as_ref(), radius)
        .map_err(HeightError::NotWellDefined)?;
    Ok(GraphHeightFunction::new(
        format!("ghf{:?}", spec.gamma),
        move |v| table.get(v).copied(),
        Subgroup::of_oracle(g),
    ))
}

/// The natural height function of a catalog model, evaluable within `radius`.
pub fn default_height(model: &Model, radius: usize) -> Result<GraphHeightFunction, HeightError> {
    let g = crate::graphs::catalog(model);
    match model {
        Model::Zd(_) | Model::Dihedral | Model::CylinderZd(_) | Model::LadderDihedral(_) => {
            Ok(GraphHeightFunction::coordinate(&g, 0))
        }
        Model::Grandparent => Ok(GraphHeightFunction::grandparent_level()),
        Model::SquareOctagon | Model::DihedralLine => {
            let name = if *model == Model::SquareOctagon { "square_octagon" } else { "dihedral_line" };
            let pg = presets::periodic(name);
            let basis = solution_space(&pg)?;
            Ok(increase_repair(&pg, &basis, DEFAULT_REPAIR_BOUND)?.height_function(&pg))
        }
        _ => {
            let preset = model.presentation_preset().ok_or(HeightError::NoGroupHeight)?;
            let p = presets::presentation(preset);
            let spec = presentations::default_ghf(&p).ok_or(HeightError::NoGroupHeight)?;
            ghf_height(&g, &p, &spec, radius)
        }
    }
}

/// Looks up a height by name: `default`, `identity`/`x` (first coordinate),
/// `level`, `ghf`, or `harmonic`.
pub fn height_by_name(
    model: &Model,
    name: &str,
    radius: usize,
) -> Result<GraphHeightFunction, HeightError> {
    let unknown = || HeightError::UnknownHeight { model: model.name(), height: name.into() };
    match name {
        "default" => default_height(model, radius),
        "identity" | "x" => match model {
            Model::Zd(_) | Model::Dihedral | Model::CylinderZd(_) | Model::LadderDihedral(_) => {
                default_height(model, radius)
            }
            _ => Err(unknown()),
        },
        "level" if *model == Model::Grandparent => default_height(model, radius),
        "ghf" => {
            let preset = model.presentation_preset().ok_or_else(unknown)?;
            let p = presets::presentation(preset);
            let spec = presentations::default_ghf(&p).ok_or(HeightError::NoGroupHeight)?;
            ghf_height(&crate::graphs::catalog(model), &p, &spec, radius)
        }
        "harmonic" => match model {
            Model::SquareOctagon | Model::DihedralLine | Model::Hexagonal => {
                let pg = presets::periodic(match model {
                    Model::SquareOctagon => "square_octagon",
                    Model::DihedralLine => "dihedral_line",
                    _ => "hexagonal",
                });
                let basis = solution_space(&pg)?;
                Ok(increase_repair(&pg, &basis, DEFAULT_REPAIR_BOUND)?.height_function(&pg))
            }
            _ => Err(unknown()),
        },
        _ => Err(unknown()),
    }
}

// ---------------------------------------------------------------------------
// Harmonic solutions on periodic graphs

/// Rational affine function `f(o) + <lambda, x>` on a periodic cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarmonicSolution {
    pub lambda: Vec<Q>,
    pub offsets: Vec<Q>,
}

impl HarmonicSolution {
    pub fn value(&self, orbit: usize, x: &[i64]) -> Q {
        &self.offsets[orbit] + dot(&self.lambda, x)
    }

    /// Height change along a directed voltage edge.
    pub fn increment(&self, from: usize, to: usize, shift: &[i64]) -> Q {
        &self.offsets[to] - &self.offsets[from] + dot(&self.lambda, shift)
    }

    /// Per orbit: sum of increments over out-edges; zero iff harmonic there.
    pub fn residuals(&self, pg: &PeriodicGraph) -> Vec<Q> {
        (0..pg.orbits())
            .map(|o| pg.out_edges(o).map(|e| self.increment(e.from, e.to, &e.shift)).sum())
            .collect()
    }

    pub fn is_harmonic(&self, pg: &PeriodicGraph) -> bool {
        self.residuals(pg).iter().all(Zero::is_zero)
    }

    pub fn is_constant(&self) -> bool {
        self.lambda.iter().all(Zero::is_zero) && self.offsets.iter().all(|f| *f == self.offsets[0])
    }

    fn combine(coefficients: &[i64], basis: &[HarmonicSolution]) -> HarmonicSolution {
        let d = basis[0].lambda.len();
        let m = basis[0].offsets.len();
        let mut lambda = vec![Q::zero(); d];
        let mut offsets = vec![Q::zero(); m];
        for (c, s) in coefficients.iter().zip(basis) {
            let c = q(*c);
            for (l, x) in lambda.iter_mut().zip(&s.lambda) {
                *l += &c * x;
            }
            for (f, x) in offsets.iter_mut().zip(&s.offsets) {
                *f += &c * x;
            }
        }
        HarmonicSolution { lambda, offsets }
    }
}

fn dot(lambda: &[Q], x: &[i64]) -> Q {
    lambda.iter().zip(x).map(|(l, &xi)| l * q(xi)).sum()
}

/// Affine boundary data `F(base, x) = offset + <lambda, x>` on the base orbit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineBoundary {
    pub lambda: Vec<Q>,
    pub offset: Q,
}

impl AffineBoundary {
    pub fn new(lambda: Vec<Q>, offset: Q) -> Self {
        AffineBoundary { lambda, offset }
    }

    /// Recovers the affine function from sampled values `F(base, x)`.
    pub fn fit(samples: &[(Vec<i64>, Q)], dim: usize) -> Result<Self, HeightError> {
        // unknowns: offset, lambda_1..lambda_d
        let rows: Vec<Vec<Q>> = samples
            .iter()
            .map(|(x, _)| std::iter::once(Q::one()).chain(x.iter().map(|&xi| q(xi))).collect())
            .collect();
        if samples.iter().any(|(x, _)| x.len() != dim) {
            return Err(HeightError::InconsistentBoundary);
        }
        let rhs: Vec<Q> = samples.iter().map(|(_, v)| v.clone()).collect();
        let sol = linalg::solve(&rows, &rhs, dim + 1).ok_or(HeightError::InconsistentBoundary)?;
        if !sol.kernel.is_empty() {
            return Err(HeightError::UnderdeterminedBoundary);
        }
        Ok(AffineBoundary { offset: sol.particular[0].clone(), lambda: sol.particular[1..].to_vec() })
    }
}

/// The unique harmonic affine function agreeing with the boundary data on the
/// base orbit (0-based).
pub fn harmonic_extension(
    pg: &PeriodicGraph,
    base_orbit: usize,
    boundary: &AffineBoundary,
) -> Result<HarmonicSolution, HeightError> {
    let m = pg.orbits();
    if base_orbit >= m {
        return Err(HeightError::OrbitOutOfRange(base_orbit));
    }
    if boundary.lambda.len() != pg.dim() {
        return Err(HeightError::InconsistentBoundary);
    }
    // Unknowns are f(o) for o != base; one equation per non-base orbit.
    let unknowns: Vec<usize> = (0..m).filter(|&o| o != base_orbit).collect();
    let col = |o: usize| unknowns.iter().position(|&u| u == o);
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for &o in &unknowns {
        let mut row = vec![Q::zero(); unknowns.len()];
        let mut constant = Q::zero();
        for e in pg.out_edges(o) {
            constant += dot(&boundary.lambda, &e.shift);
            match col(e.to) {
                Some(c) => row[c] += Q::one(),
                None => constant += &boundary.offset,
            }
            match col(e.from) {
                Some(c) => row[c] -= Q::one(),
                None => constant -= &boundary.offset,
            }
        }
        rows.push(row);
        rhs.push(-constant);
    }
    let sol = linalg::solve(&rows, &rhs, unknowns.len()).ok_or(HeightError::NoSolution {
        direction: first_nonzero(&boundary.lambda),
    })?;
    if !sol.kernel.is_empty() {
        return Err(HeightError::NotUnique { dimension: sol.kernel.len() });
    }
    let mut offsets = vec![boundary.offset.clone(); m];
    for (i, &o) in unknowns.iter().enumerate() {
        offsets[o] = sol.particular[i].clone();
    }
    let s = HarmonicSolution { lambda: boundary.lambda.clone(), offsets };
    if !s.is_harmonic(pg) {
        return Err(HeightError::NoSolution { direction: first_nonzero(&boundary.lambda) });
    }
    Ok(s)
}

fn first_nonzero(v: &[Q]) -> usize {
    v.iter().position(|x| !x.is_zero()).unwrap_or(0)
}

/// A rational basis of the harmonic affine functions normalised by
/// `f(orbit 0) = 0`: one solution per unit direction of `lambda`, plus any
/// homogeneous solutions with `lambda = 0`.
pub fn solution_space(pg: &PeriodicGraph) -> Result<Vec<HarmonicSolution>, HeightError> {
    let d = pg.dim();
    let mut basis = Vec::new();
    for i in 0..d {
        let mut lambda = vec![Q::zero(); d];
        lambda[i] = Q::one();
        let s = harmonic_extension(pg, 0, &AffineBoundary::new(lambda, Q::zero())).map_err(|e| {
            match e {
                HeightError::NoSolution { .. } | HeightError::NotUnique { .. } => {
                    HeightError::NoSolution { direction: i }
                }
                other => other,
            }
        })?;
        basis.push(s);
    }
    // Homogeneous part: harmonic f on the finite quotient with lambda = 0.
    let m = pg.orbits();
    let mut rows = Vec::new();
    for o in 0..m {
        let mut row = vec![Q::zero(); m];
        for e in pg.out_edges(o) {
            row[e.to] += Q::one();
            row[e.from] -= Q::one();
        }
        rows.push(row);
    }
    let mut base_row = vec![Q::zero(); m];
    base_row[0] = Q::one();
    rows.push(base_row);
    for f in linalg::rational_kernel(&rows, m) {
        basis.push(HarmonicSolution { lambda: vec![Q::zero(); d], offsets: f });
    }
    Ok(basis)
}

pub const DEFAULT_REPAIR_BOUND: u32 = 8;

/// Integer-valued harmonic height function produced by `increase_repair`.
#[derive(Debug, Clone, PartialEq)]
pub struct RepairedHeight {
    pub coefficients: Vec<i64>,
    pub solution: HarmonicSolution,
    pub scale: BigInt,
    pub lambda: Vec<i64>,
    pub offsets: Vec<i64>,
    /// Per orbit: indices into `pg.edges()` of a strictly lower and a strictly
    /// higher neighbour.
    pub witnesses: Vec<(usize, usize)>,
}

impl RepairedHeight {
    pub fn height_function(&self, pg: &PeriodicGraph) -> GraphHeightFunction {
        GraphHeightFunction::periodic(pg, self.lambda.clone(), self.offsets.clone())
    }

    pub fn export(&self, pg: &PeriodicGraph) -> HeightExport {
        let edge = |i: usize| {
            let e = &pg.edges()[i];
            NeighborRef { orbit: e.to + 1, shift: e.shift.clone() }
        };
        HeightExport {
            lambda: self.solution.lambda.iter().map(Q::to_string).collect(),
            offsets: self.solution.offsets.iter().map(Q::to_string).collect(),
            coefficients: self.coefficients.clone(),
            scale: self.scale.to_string(),
            integer_lambda: self.lambda.clone(),
            integer_offsets: self.offsets.clone(),
            witnesses: self
                .witnesses
                .iter()
                .enumerate()
                .map(|(o, &(lo, hi))| IncreaseWitness { orbit: o + 1, lower: edge(lo), higher: edge(hi) })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct NeighborRef {
    pub orbit: usize,
    pub shift: Vec<i64>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct IncreaseWitness {
    pub orbit: usize,
    pub lower: NeighborRef,
    pub higher: NeighborRef,
}

/// JSON export of a repaired height function; fractions as `p/q` strings.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct HeightExport {
    pub lambda: Vec<String>,
    pub offsets: Vec<String>,
    pub coefficients: Vec<i64>,
    pub scale: String,
    pub integer_lambda: Vec<i64>,
    pub integer_offsets: Vec<i64>,
    pub witnesses: Vec<IncreaseWitness>,
}

/// Coefficient vectors in search order: by max-norm, then by L1 norm, then
/// lexicographically descending (so `(1, 0)` precedes `(0, 1)` and `(-1, 0)`).
fn coefficient_vectors(len: usize, norm: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![-norm; len];
    loop {
        if cur.iter().map(|c| c.abs()).max() == Some(norm) {
            out.push(cur.clone());
        }
        let mut i = len;
        loop {
            if i == 0 {
                out.sort_by(|a, b| {
                    let l1 = |v: &Vec<i64>| v.iter().map(|c| c.abs()).sum::<i64>();
                    l1(a).cmp(&l1(b)).then_with(|| b.cmp(a))
                });
                return out;
            }
            i -= 1;
            if cur[i] < norm {
                cur[i] += 1;
                for c in cur.iter_mut().skip(i + 1) {
                    *c = -norm;
                }
                break;
            }
        }
    }
}

/// Searches small integer combinations of the basis for one where every orbit
/// has a strictly lower and a strictly higher neighbour, then clears
/// denominators.
pub fn increase_repair(
    pg: &PeriodicGraph,
    basis: &[HarmonicSolution],
    max_norm: u32,
) -> Result<RepairedHeight, HeightError> {
    if basis.is_empty() || basis.iter().all(HarmonicSolution::is_constant) {
        return Err(HeightError::NoHeightFunction);
    }
    for norm in 1..=max_norm as i64 {
        for c in coefficient_vectors(basis.len(), norm) {
            let mut s = HarmonicSolution::combine(&c, basis);
            let base = s.offsets[0].clone();
            for f in s.offsets.iter_mut() {
                *f -= &base;
            }
            let Some(witnesses) = increase_witnesses(pg, &s) else {
                continue;
            };
            let scale = s
                .lambda
                .iter()
                .chain(&s.offsets)
                .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            let to_int = |x: &Q| -> Result<i64, HeightError> {
                (x * Q::from_integer(scale.clone())).to_integer().to_i64().ok_or(HeightError::Overflow)
            };
            return Ok(RepairedHeight {
                coefficients: c,
                lambda: s.lambda.iter().map(to_int).collect::<Result<_, _>>()?,
                offsets: s.offsets.iter().map(to_int).collect::<Result<_, _>>()?,
                solution: s,
                scale,
                witnesses,
            });
        }
    }
    Err(HeightError::SearchExhausted { bound: max_norm })
}

fn increase_witnesses(pg: &PeriodicGraph, s: &HarmonicSolution) -> Option<Vec<(usize, usize)>> {
    (0..pg.orbits())
        .map(|o| {
            let mut lower = None;
            let mut higher = None;
            for (i, e) in pg.edges().iter().enumerate().filter(|(_, e)| e.from == o) {
                let inc = s.increment(e.from, e.to, &e.shift);
                if inc.is_negative() && lower.is_none() {
                    lower = Some(i);
                }
                if inc.is_positive() && higher.is_none() {
                    higher = Some(i);
                }
            }
            Some((lower?, higher?))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Verification on balls

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum AxiomViolation {
    RootNotZero { height: i64 },
    NotEvaluable { vertex: Vertex },
    NoLowerNeighbor { vertex: Vertex },
    NoHigherNeighbor { vertex: Vertex },
    NotDifferenceInvariant { generator: usize, u: Vertex, v: Vertex },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub passed: bool,
    pub vertices_checked: usize,
    pub invariance_checks: usize,
    pub counterexample: Option<AxiomViolation>,
}

/// Checks `h(root) = 0`, difference-invariance under the subgroup generators
/// on every edge of the ball, and a strictly lower and higher neighbour at
/// every vertex of the ball.
pub fn verify_height_axioms(
    g: &dyn GraphOracle,
    h: &GraphHeightFunction,
    radius: usize,
    max_vertices: usize,
) -> Result<AxiomReport, HeightError> {
    let b = ball(g, radius, max_vertices)?;
    let fail = |v: AxiomViolation, checked: usize, inv: usize| AxiomReport {
        passed: false,
        vertices_checked: checked,
        invariance_checks: inv,
        counterexample: Some(v),
    };
    let root = g.root();
    match h.height(&root) {
        None => return Ok(fail(AxiomViolation::NotEvaluable { vertex: root }, 0, 0)),
        Some(0) => {}
        Some(x) => return Ok(fail(AxiomViolation::RootNotZero { height: x }, 0, 0)),
    }
    let mut checked = 0;
    for v in &b.vertices {
        let Some(hv) = h.height(v) else {
            return Ok(fail(AxiomViolation::NotEvaluable { vertex: v.clone() }, checked, 0));
        };
        let mut lower = false;
        let mut higher = false;
        for (w, _) in g.neighbors(v) {
            let Some(hw) = h.height(&w) else {
                return Ok(fail(AxiomViolation::NotEvaluable { vertex: w }, checked, 0));
            };
            lower |= hw < hv;
            higher |= hw > hv;
        }
        if !lower {
            return Ok(fail(AxiomViolation::NoLowerNeighbor { vertex: v.clone() }, checked, 0));
        }
        if !higher {
            return Ok(fail(AxiomViolation::NoHigherNeighbor { vertex: v.clone() }, checked, 0));
        }
        checked += 1;
    }
    let mut inv = 0;
    for &(i, j) in &b.edges {
        let (u, v) = (&b.vertices[i], &b.vertices[j]);
        let diff = h.height_or_err(u)? - h.height_or_err(v)?;
        for (k, s) in h.subgroup.generators.iter().enumerate() {
            let (su, sv) = (s(u), s(v));
            // Tabulated heights may not reach the images; those pairs are skipped.
            if let (Some(a), Some(c)) = (h.height(&su), h.height(&sv)) {
                inv += 1;
                if a - c != diff {
                    return Ok(fail(
                        AxiomViolation::NotDifferenceInvariant { generator: k, u: u.clone(), v: v.clone() },
                        checked,
                        inv,
                    ));
                }
            }
        }
    }
    Ok(AxiomReport { passed: true, vertices_checked: checked, invariance_checks: inv, counterexample: None })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarmonicReport {
    /// `h(v) - mean of h over neighbours`, per ball vertex in ball order.
    pub defects: Vec<(Vertex, Q)>,
    pub harmonic: bool,
}

impl HarmonicReport {
    pub fn distinct_defects(&self) -> Vec<Q> {
        let mut d: Vec<Q> = self.defects.iter().map(|(_, x)| x.clone()).collect();
        d.sort();
        d.dedup();
        d
    }
}

pub fn verify_harmonic(
    g: &dyn GraphOracle,
    h: &GraphHeightFunction,
    radius: usize,
    max_vertices: usize,
) -> Result<HarmonicReport, HeightError> {
    let b = ball(g, radius, max_vertices)?;
    let mut defects = Vec::with_capacity(b.len());
    for v in &b.vertices {
        let hv = h.height_or_err(v)?;
        let nbrs = g.neighbors(v);
        let mut sum = 0i64;
        for (w, _) in &nbrs {
            sum += h.height_or_err(w)?;
        }
        let avg = Q::new(BigInt::from(sum), BigInt::from(nbrs.len()));
        defects.push((v.clone(), q(hv) - avg));
    }
    let harmonic = defects.iter().all(|(_, d)| d.is_zero());
    Ok(HarmonicReport { defects, harmonic })
}

/// Largest `|h(u) - h(v)|` over edges of the ball.
pub fn compute_d(
    g: &dyn GraphOracle,
    h: &GraphHeightFunction,
    radius: usize,
    max_vertices: usize,
) -> Result<u64, HeightError> {
    let b = ball(g, radius, max_vertices)?;
    let mut d = 0;
    for v in &b.vertices {
        let hv = h.height_or_err(v)?;
        for (w, _) in g.neighbors(v) {
            d = d.max(hv.abs_diff(h.height_or_err(&w)?));
        }
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RValue {
    Exact(usize),
    ExceedsBound(usize),
}

/// `r(h, H)`: the least `r` such that from each orbit representative `u`
/// every other orbit has a translate `v'` above `u` reachable by a SAW of
/// length at most `r` whose interior lies strictly between `h(u)` and `h(v')`.
pub fn compute_r(
    g: &dyn GraphOracle,
    h: &GraphHeightFunction,
    bound: usize,
    max_vertices: usize,
) -> Result<RValue, HeightError> {
    let sub = &h.subgroup;
    if sub.transitive() {
        return Ok(RValue::Exact(0));
    }
    let mut r = 0;
    for u in &sub.representatives {
        let b = ball_around(g, u, bound, max_vertices)?;
        let heights: Vec<i64> =
            b.vertices.iter().map(|v| h.height_or_err(v)).collect::<Result<_, _>>()?;
        let orbits: Vec<usize> = b.vertices.iter().map(|v| (sub.orbit_of)(v)).collect();
        let own = orbits[0];
        let mut best: HashMap<usize, usize> = HashMap::new();
        let mut visited = vec![false; b.len()];
        visited[0] = true;
        shortest_climbs(&b.adjacency, &heights, &orbits, 0, heights[0], i64::MIN, 0, bound, &mut visited, &mut best);
        for o in (0..sub.orbit_count).filter(|&o| o != own) {
            match best.get(&o) {
                Some(&len) => r = r.max(len),
                None => return Ok(RValue::ExceedsBound(bound)),
            }
        }
    }
    Ok(RValue::Exact(r))
}

#[allow(clippy::too_many_arguments)]
fn shortest_climbs(
    adj: &[Vec<usize>],
    heights: &[i64],
    orbits: &[usize],
    at: usize,
    base: i64,
    interior_max: i64,
    depth: usize,
    bound: usize,
    visited: &mut [bool],
    best: &mut HashMap<usize, usize>,
) {
    if depth == bound {
        return;
    }
    for &w in &adj[at] {
        if visited[w] || heights[w] <= base {
            continue;
        }
        let len = depth + 1;
        if heights[w] > interior_max {
            let e = best.entry(orbits[w]).or_insert(usize::MAX);
            *e = (*e).min(len);
        }
        visited[w] = true;
        shortest_climbs(adj, heights, orbits, w, base, interior_max.max(heights[w]), len, bound, visited, best);
        visited[w] = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{catalog, PeriodicCover, DEFAULT_MAX_VERTICES};

    fn frac(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn z2_solution_space() {
        let pg = presets::periodic("zd2");
        let basis = solution_space(&pg).unwrap();
        assert_eq!(basis.len(), 2);
        assert_eq!(basis[0].lambda, vec![q(1), q(0)]);
        assert_eq!(basis[1].lambda, vec![q(0), q(1)]);
        assert!(basis.iter().all(|s| s.offsets == vec![q(0)]));
    }

    #[test]
    fn dihedral_line_solution() {
        let pg = presets::periodic("dihedral_line");
        let basis = solution_space(&pg).unwrap();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0].offsets, vec![q(0), frac(1, 2)]);
        let repaired = increase_repair(&pg, &basis, DEFAULT_REPAIR_BOUND).unwrap();
        assert_eq!(repaired.lambda, vec![2]);
        assert_eq!(repaired.offsets, vec![0, 1]);
        assert_eq!(repaired.scale, BigInt::from(2));
    }

    #[test]
    fn extension_matches_boundary_and_is_unique() {
        let pg = presets::periodic("dihedral_line");
        let s = harmonic_extension(&pg, 0, &AffineBoundary::new(vec![q(2)], q(0))).unwrap();
        assert_eq!(s.offsets, vec![q(0), q(1)]);
        let mut perturbed = s.clone();
        perturbed.offsets[1] += frac(1, 3);
        assert!(!perturbed.is_harmonic(&pg));
    }

    #[test]
    fn boundary_fit() {
        let b = AffineBoundary::fit(&[(vec![0], q(0)), (vec![1], q(2)), (vec![5], q(10))], 1).unwrap();
        assert_eq!(b, AffineBoundary::new(vec![q(2)], q(0)));
        assert_eq!(
            AffineBoundary::fit(&[(vec![0], q(0)), (vec![1], q(2)), (vec![2], q(5))], 1),
            Err(HeightError::InconsistentBoundary)
        );
        assert_eq!(
            AffineBoundary::fit(&[(vec![0, 0], q(0))], 2),
            Err(HeightError::UnderdeterminedBoundary)
        );
    }

    #[test]
    fn coefficient_order() {
        let v = coefficient_vectors(2, 1);
        assert_eq!(v[0], vec![1, 0]);
        assert_eq!(v[1], vec![0, 1]);
        assert_eq!(v.len(), 8);
        assert!(coefficient_vectors(3, 2).iter().all(|c| c.iter().map(|x| x.abs()).max() == Some(2)));
    }

    #[test]
    fn abs_value_fails_at_origin() {
        let g = catalog(&Model::Zd(2));
        let h = GraphHeightFunction::new("|x|", |v| Some(v[0].abs()), Subgroup::of_oracle(&g));
        let r = verify_height_axioms(g.as_ref(), &h, 2, DEFAULT_MAX_VERTICES).unwrap();
        assert!(!r.passed);
        assert_eq!(r.counterexample, Some(AxiomViolation::NoLowerNeighbor { vertex: vec![0, 0] }));
    }

    #[test]
    fn x_coordinate_on_z2() {
        let g = catalog(&Model::Zd(2));
        let h = GraphHeightFunction::coordinate(&g, 0);
        assert!(verify_height_axioms(g.as_ref(), &h, 3, DEFAULT_MAX_VERTICES).unwrap().passed);
        assert!(verify_harmonic(g.as_ref(), &h, 3, DEFAULT_MAX_VERTICES).unwrap().harmonic);
        assert_eq!(compute_d(g.as_ref(), &h, 2, DEFAULT_MAX_VERTICES).unwrap(), 1);
        assert_eq!(compute_r(g.as_ref(), &h, 4, DEFAULT_MAX_VERTICES).unwrap(), RValue::Exact(0));
    }

    #[test]
    fn dihedral_r_is_one() {
        let pg = presets::periodic("dihedral_line");
        let g: Arc<dyn GraphOracle> = Arc::new(PeriodicCover::new("dihedral_line", pg.clone()));
        let h = GraphHeightFunction::periodic(&pg, vec![2], vec![0, 1]);
        assert_eq!(compute_r(g.as_ref(), &h, 4, DEFAULT_MAX_VERTICES).unwrap(), RValue::Exact(1));
    }

    #[test]
    fn invariance_violation_detected() {
        let g = catalog(&Model::Zd(2));
        // x + [y > 0]: has lower and higher neighbours everywhere but is not
        // difference-invariant under vertical translation.
        let h = GraphHeightFunction::new("bent", |v| Some(v[0] + i64::from(v[1] > 0)), Subgroup::of_oracle(&g));
        let r = verify_height_axioms(g.as_ref(), &h, 2, DEFAULT_MAX_VERTICES).unwrap();
        assert!(matches!(r.counterexample, Some(AxiomViolation::NotDifferenceInvariant { .. })));
    }

    #[test]
    fn constant_basis_is_rejected() {
        let pg = presets::periodic("zd2");
        let constant = HarmonicSolution { lambda: vec![q(0), q(0)], offsets: vec![q(0)] };
        assert_eq!(increase_repair(&pg, &[constant], 3), Err(HeightError::NoHeightFunction));
        assert_eq!(increase_repair(&pg, &[], 3), Err(HeightError::NoHeightFunction));
    }
}
