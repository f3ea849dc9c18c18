//! Exact enumeration of self-avoiding walks and bridges.
//!
//! Walks of length at most `n` from a start vertex stay inside the radius-`n`
//! ball, so enumeration runs on the ball's index graph. The search tree is cut
//! at a fixed prefix depth into independent tasks that run on a rayon pool.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use num_bigint::BigUint;
use num_traits::{One, Pow, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graphs::{ball_around, Ball, GraphError, GraphOracle, Vertex, DEFAULT_MAX_VERTICES};
use crate::heights::GraphHeightFunction;

pub const DEFAULT_NODE_BUDGET: u64 = 2_000_000_000;
pub const DEFAULT_PREFIX_DEPTH: usize = 3;
pub const DEFAULT_PRECISION: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountKind {
    Saw,
    Bridge,
}

/// Exact counts `c_0..c_{n_max}` from a start vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub model: String,
    pub height: Option<String>,
    pub kind: CountKind,
    pub counts: Vec<BigUint>,
}

impl CountTable {
    pub fn n_max(&self) -> usize {
        self.counts.len().saturating_sub(1)
    }

    pub fn get(&self, n: usize) -> Option<&BigUint> {
        self.counts.get(n)
    }
}

#[derive(Debug, Error)]
pub enum SawError {
    #[error("node budget of {budget} exceeded; counts complete up to n = {}", partial.n_max())]
    BudgetExceeded { budget: u64, partial: Box<CountTable> },
    #[error("height not evaluable at {0:?}")]
    HeightNotEvaluable(Vertex),
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone)]
pub struct EnumerationConfig {
    /// Worker threads; `None` uses the machine's parallelism.
    pub threads: Option<usize>,
    /// Maximum number of search-tree nodes expanded per run.
    pub node_budget: u64,
    pub max_vertices: usize,
    pub prefix_depth: usize,
    /// Start vertex; defaults to the oracle's root.
    pub start: Option<Vertex>,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        EnumerationConfig {
            threads: None,
            node_budget: DEFAULT_NODE_BUDGET,
            max_vertices: DEFAULT_MAX_VERTICES,
            prefix_depth: DEFAULT_PREFIX_DEPTH,
            start: None,
        }
    }
}

impl EnumerationConfig {
    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.node_budget = budget;
        self
    }
}

pub fn count_saws(g: &dyn GraphOracle, n_max: usize, cfg: &EnumerationConfig) -> Result<CountTable, SawError> {
    count(g, None, n_max, cfg)
}

/// Counts walks with `h(w_0) < h(w_i) <= h(w_n)` for `1 <= i <= n`.
pub fn count_bridges(
    g: &dyn GraphOracle,
    h: &GraphHeightFunction,
    n_max: usize,
    cfg: &EnumerationConfig,
) -> Result<CountTable, SawError> {
    count(g, Some(h), n_max, cfg)
}

fn count(
    g: &dyn GraphOracle,
    h: Option<&GraphHeightFunction>,
    n_max: usize,
    cfg: &EnumerationConfig,
) -> Result<CountTable, SawError> {
    let mut n = n_max;
    loop {
        match count_exact(g, h, n, cfg)? {
            Ok(table) if n == n_max => return Ok(table),
            Ok(partial) => {
                return Err(SawError::BudgetExceeded {
                    budget: cfg.node_budget,
                    partial: Box::new(partial),
                })
            }
            Err(_) if n == 0 => unreachable!("a zero-length count expands no nodes"),
            Err(_) => n -= 1,
        }
    }
}

struct Search<'a> {
    adjacency: &'a [Vec<usize>],
    heights: Option<&'a [i64]>,
    n_max: usize,
    budget: u64,
    expanded: &'a AtomicU64,
    aborted: &'a AtomicBool,
}

struct Task {
    path: Vec<usize>,
    running_max: i64,
}

impl Search<'_> {
    /// Whether stepping to `w` keeps the walk a bridge candidate.
    fn admissible(&self, w: usize) -> bool {
        match self.heights {
            Some(hs) => hs[w] > hs[0],
            None => true,
        }
    }

    fn counts(&self, w: usize, running_max: i64) -> bool {
        match self.heights {
            Some(hs) => hs[w] >= running_max,
            None => true,
        }
    }

    fn run(&self, task: &Task, out: &mut [u64]) {
        let mut visited = vec![false; self.adjacency.len()];
        for &v in &task.path {
            visited[v] = true;
        }
        let depth = task.path.len() - 1;
        self.dfs(*task.path.last().unwrap(), depth, task.running_max, &mut visited, out);
    }

    fn dfs(&self, at: usize, depth: usize, running_max: i64, visited: &mut [bool], out: &mut [u64]) {
        if depth == self.n_max || self.aborted.load(Ordering::Relaxed) {
            return;
        }
        if self.expanded.fetch_add(1, Ordering::Relaxed) >= self.budget {
            self.aborted.store(true, Ordering::Relaxed);
            return;
        }
        for &w in &self.adjacency[at] {
            if visited[w] || !self.admissible(w) {
                continue;
            }
            let hw = self.heights.map_or(0, |hs| hs[w]);
            if self.counts(w, running_max) {
                out[depth + 1] += 1;
            }
            visited[w] = true;
            self.dfs(w, depth + 1, running_max.max(hw), visited, out);
            visited[w] = false;
        }
    }
}

/// Inner result is `Err(())` when the node budget ran out.
fn count_exact(
    g: &dyn GraphOracle,
    h: Option<&GraphHeightFunction>,
    n_max: usize,
    cfg: &EnumerationConfig,
) -> Result<Result<CountTable, ()>, SawError> {
    let start = cfg.start.clone().unwrap_or_else(|| g.root());
    let b = ball_around(g, &start, n_max, cfg.max_vertices)?;
    let heights = match h {
        Some(h) => Some(ball_heights(&b, h)?),
        None => None,
    };
    let expanded = AtomicU64::new(0);
    let aborted = AtomicBool::new(false);
    let search = Search {
        adjacency: &b.adjacency,
        heights: heights.as_deref(),
        n_max,
        budget: cfg.node_budget,
        expanded: &expanded,
        aborted: &aborted,
    };

    let mut totals = vec![BigUint::zero(); n_max + 1];
    totals[0] = BigUint::one();
    let prefix_depth = cfg.prefix_depth.min(n_max);
    let mut tasks = Vec::new();
    let mut short = vec![0u64; n_max + 1];
    collect_prefixes(&search, vec![0], i64::MIN, prefix_depth, &mut tasks, &mut short);
    for (t, s) in totals.iter_mut().zip(&short).skip(1) {
        *t += *s;
    }

    let run_all = || -> Vec<Vec<u64>> {
        tasks
            .par_iter()
            .map(|task| {
                let mut out = vec![0u64; n_max + 1];
                search.run(task, &mut out);
                out
            })
            .collect()
    };
    let per_task = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| SawError::ThreadPool(e.to_string()))?
            .install(run_all),
        None => run_all(),
    };
    if aborted.load(Ordering::Relaxed) {
        return Ok(Err(()));
    }
    for out in per_task {
        for (t, c) in totals.iter_mut().zip(out).skip(1) {
            *t += c;
        }
    }
    Ok(Ok(CountTable {
        model: g.name(),
        height: h.map(|h| h.name.clone()),
        kind: if h.is_some() { CountKind::Bridge } else { CountKind::Saw },
        counts: totals,
    }))
}

/// Enumerates walks of length `depth` sequentially, counting the shorter ones.
fn collect_prefixes(
    search: &Search<'_>,
    path: Vec<usize>,
    running_max: i64,
    depth: usize,
    tasks: &mut Vec<Task>,
    counts: &mut [u64],
) {
    let len = path.len() - 1;
    if len == depth {
        tasks.push(Task { path, running_max });
        return;
    }
    let at = *path.last().unwrap();
    for &w in &search.adjacency[at] {
        if path.contains(&w) || !search.admissible(w) {
            continue;
        }
        if search.counts(w, running_max) {
            counts[len + 1] += 1;
        }
        let hw = search.heights.map_or(0, |hs| hs[w]);
        let mut next = path.clone();
        next.push(w);
        collect_prefixes(search, next, running_max.max(hw), depth, tasks, counts);
    }
}

fn ball_heights(b: &Ball, h: &GraphHeightFunction) -> Result<Vec<i64>, SawError> {
    b.vertices
        .iter()
        .map(|v| h.height(v).ok_or_else(|| SawError::HeightNotEvaluable(v.clone())))
        .collect()
}

// ---------------------------------------------------------------------------
// Reference enumerator

/// Slow enumeration straight on the oracle, with path membership checks.
pub fn naive_counts(g: &dyn GraphOracle, h: Option<&GraphHeightFunction>, n_max: usize) -> Vec<BigUint> {
    fn go(
        g: &dyn GraphOracle,
        h: Option<&GraphHeightFunction>,
        path: &mut Vec<Vertex>,
        n_max: usize,
        out: &mut Vec<BigUint>,
    ) {
        let n = path.len() - 1;
        if n >= 1 {
            let ok = match h {
                None => true,
                Some(h) => {
                    let hs: Vec<i64> = path.iter().map(|v| h.height(v).expect("evaluable")).collect();
                    hs[1..].iter().all(|&x| x > hs[0]) && hs.iter().all(|&x| x <= hs[n])
                }
            };
            if ok {
                out[n] += 1u32;
            }
        }
        if n == n_max {
            return;
        }
        for (w, _) in g.neighbors(path.last().unwrap()) {
            if !path.contains(&w) {
                path.push(w);
                go(g, h, path, n_max, out);
                path.pop();
            }
        }
    }
    let mut out = vec![BigUint::zero(); n_max + 1];
    out[0] = BigUint::one();
    go(g, h, &mut vec![g.root()], n_max, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Multiplicativity and bounds

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MultiplicativityReport {
    pub kind: CountKind,
    pub pairs_checked: usize,
    /// Pairs `(m, n)` with `m <= n` violating the inequality.
    pub violations: Vec<(usize, usize)>,
}

/// Checks `c_{m+n} <= c_m c_n` for SAW tables and `c_{m+n} >= c_m c_n` for
/// bridge tables, for `1 <= m <= n` with `m + n <= n_max`.
pub fn check_multiplicativity(table: &CountTable) -> MultiplicativityReport {
    let c = &table.counts;
    let mut pairs = 0;
    let mut violations = Vec::new();
    for m in 1..c.len() {
        for n in m..c.len() {
            if m + n >= c.len() {
                break;
            }
            pairs += 1;
            let prod = &c[m] * &c[n];
            let ok = match table.kind {
                CountKind::Saw => c[m + n] <= prod,
                CountKind::Bridge => c[m + n] >= prod,
            };
            if !ok {
                violations.push((m, n));
            }
        }
    }
    MultiplicativityReport { kind: table.kind, pairs_checked: pairs, violations }
}

/// `floor(c^{1/n} * 10^p)` and whether the root is exact at that precision.
fn scaled_root(c: &BigUint, n: usize, precision: usize) -> (BigUint, bool) {
    let scaled = c * Pow::pow(BigUint::from(10u32), precision * n);
    let r = scaled.nth_root(n as u32);
    let exact = Pow::pow(&r, n) == scaled;
    (r, exact)
}

fn render(scaled: &BigUint, precision: usize) -> String {
    let digits = scaled.to_string();
    let digits = format!("{digits:0>width$}", width = precision + 1);
    let (int, frac) = digits.split_at(digits.len() - precision);
    if precision == 0 {
        int.to_string()
    } else {
        format!("{int}.{frac}")
    }
}

/// `c^{1/n}` rounded down to `precision` decimals.
pub fn root_floor(c: &BigUint, n: usize, precision: usize) -> String {
    render(&scaled_root(c, n, precision).0, precision)
}

/// `c^{1/n}` rounded up to `precision` decimals.
pub fn root_ceil(c: &BigUint, n: usize, precision: usize) -> String {
    let (r, exact) = scaled_root(c, n, precision);
    render(&if exact { r } else { r + 1u32 }, precision)
}

/// Exact comparison of `a^{1/m}` with `b^{1/n}`.
pub fn cmp_roots(a: &BigUint, m: usize, b: &BigUint, n: usize) -> std::cmp::Ordering {
    Pow::pow(a, n).cmp(&Pow::pow(b, m))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundsRow {
    pub n: usize,
    pub sigma_n: String,
    pub b_n: String,
    pub lower_root: String,
    pub upper_root: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BestBound {
    pub n: usize,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundsReport {
    pub model: String,
    pub height: Option<String>,
    pub precision: usize,
    pub rows: Vec<BoundsRow>,
    /// Largest `b_n^{1/n}` over `n = 1, 2, 4, 8, ...`.
    pub best_lower: BestBound,
    /// Smallest `sigma_n^{1/n}` over all `n >= 1`.
    pub best_upper: BestBound,
}

impl BoundsReport {
    /// `best_upper - best_lower` as exact decimals at the report precision.
    pub fn gap(&self) -> String {
        let parse = |s: &str| -> BigUint { s.replace('.', "").parse().expect("decimal") };
        let hi = parse(&self.best_upper.value);
        let lo = parse(&self.best_lower.value);
        if hi >= lo {
            render(&(hi - lo), self.precision)
        } else {
            format!("-{}", render(&(lo - hi), self.precision))
        }
    }
}

/// Per-`n` roots (lower rounded down, upper rounded up) and best bounds.
/// Uses `n = 1..min(n_max)` of the two tables; both must reach `n = 1`.
pub fn mu_bounds(sigma: &CountTable, bridges: &CountTable, precision: usize) -> BoundsReport {
    let n_max = sigma.n_max().min(bridges.n_max());
    assert!(n_max >= 1, "bound tables must reach n = 1");
    let rows = (1..=n_max)
        .map(|n| BoundsRow {
            n,
            sigma_n: sigma.counts[n].to_string(),
            b_n: bridges.counts[n].to_string(),
            lower_root: root_floor(&bridges.counts[n], n, precision),
            upper_root: root_ceil(&sigma.counts[n], n, precision),
        })
        .collect();
    let mut lower_n = 1;
    let mut n = 2;
    while n <= n_max {
        if cmp_roots(&bridges.counts[n], n, &bridges.counts[lower_n], lower_n).is_gt() {
            lower_n = n;
        }
        n *= 2;
    }
    let mut upper_n = 1;
    for n in 2..=n_max {
        if cmp_roots(&sigma.counts[n], n, &sigma.counts[upper_n], upper_n).is_lt() {
            upper_n = n;
        }
    }
    BoundsReport {
        model: sigma.model.clone(),
        height: bridges.height.clone(),
        precision,
        rows,
        best_lower: BestBound { n: lower_n, value: root_floor(&bridges.counts[lower_n], lower_n, precision) },
        best_upper: BestBound { n: upper_n, value: root_ceil(&sigma.counts[upper_n], upper_n, precision) },
    }
}

/// `b_n^{1/n}` is non-decreasing along `n = 1, 2, 4, ...`.
pub fn doubling_lower_monotone(bridges: &CountTable) -> bool {
    let mut n = 1;
    while 2 * n <= bridges.n_max() {
        if cmp_roots(&bridges.counts[2 * n], 2 * n, &bridges.counts[n], n).is_lt() {
            return false;
        }
        n *= 2;
    }
    true
}

// ---------------------------------------------------------------------------
// Output

/// Rows `n = 1..n_max` with whichever columns are present.
#[derive(Debug, Clone, Serialize)]
pub struct TableDocument {
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height: Option<String>,
    pub rows: Vec<TableRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_lower: Option<BestBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_upper: Option<BestBound>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_n: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_n: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_root: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_root: Option<String>,
}

impl TableDocument {
    pub fn from_counts(table: &CountTable) -> Self {
        let rows = (1..=table.n_max())
            .map(|n| {
                let c = Some(table.counts[n].to_string());
                let (sigma_n, b_n) = match table.kind {
                    CountKind::Saw => (c, None),
                    CountKind::Bridge => (None, c),
                };
                TableRow { n, sigma_n, b_n, lower_root: None, upper_root: None }
            })
            .collect();
        TableDocument { model: table.model.clone(), height: table.height.clone(), rows, best_lower: None, best_upper: None }
    }

    pub fn from_bounds(report: &BoundsReport) -> Self {
        let rows = report
            .rows
            .iter()
            .map(|r| TableRow {
                n: r.n,
                sigma_n: Some(r.sigma_n.clone()),
                b_n: Some(r.b_n.clone()),
                lower_root: Some(r.lower_root.clone()),
                upper_root: Some(r.upper_root.clone()),
            })
            .collect();
        TableDocument {
            model: report.model.clone(),
            height: report.height.clone(),
            rows,
            best_lower: Some(report.best_lower.clone()),
            best_upper: Some(report.best_upper.clone()),
        }
    }

    pub fn to_csv(&self) -> String {
        let Some(first) = self.rows.first() else {
            return "n\n".to_string();
        };
        let mut header = vec!["n"];
        let present = [
            ("sigma_n", first.sigma_n.is_some()),
            ("b_n", first.b_n.is_some()),
            ("lower_root", first.lower_root.is_some()),
            ("upper_root", first.upper_root.is_some()),
        ];
        header.extend(present.iter().filter(|(_, p)| *p).map(|(h, _)| *h));
        let mut out = header.join(",");
        out.push('\n');
        for r in &self.rows {
            let mut cells = vec![r.n.to_string()];
            cells.extend(
                [&r.sigma_n, &r.b_n, &r.lower_root, &r.upper_root].into_iter().flatten().cloned(),
            );
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("table serializes")
    }
}

/// Hex SHA-256 of a table's CSV rendering.
pub fn table_digest(table: &CountTable) -> String {
    let csv = TableDocument::from_counts(table).to_csv();
    Sha256::digest(csv.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Counts as `u64` where they fit, for quick comparisons in tests and reports.
pub fn small_counts(table: &CountTable) -> Vec<Option<u64>> {
    table.counts.iter().map(|c| c.to_u64()).collect()
}
