//! Rooted ball isomorphism, the locality radius `K(G, G')`, and count
//! agreement scans over quotient families.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graphs::{ball, catalog, Ball, GraphError, GraphOracle, Model, Vertex};
use crate::heights::{compute_d, compute_r, default_height, HeightError, RValue};
use crate::presentations::{coefficient_matrix, rank_exact};
use crate::presets;
use crate::saw::{count_bridges, count_saws, mu_bounds, CountTable, EnumerationConfig, SawError, TableDocument};

pub const DEFAULT_SEARCH_BUDGET: u64 = 50_000_000;

#[derive(Debug, Error)]
pub enum LocalityError {
    #[error("isomorphism search exceeded {0} steps")]
    SearchBudget(u64),
    #[error("unknown family `{0}`; expected cylinder or ladder_dihedral")]
    UnknownFamily(String),
    #[error("family parameter m = {0} is below 3")]
    BadParameter(i64),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Height(#[from] HeightError),
    #[error(transparent)]
    Saw(#[from] SawError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl LocalityError {
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            LocalityError::SearchBudget(_)
                | LocalityError::Graph(GraphError::BudgetExceeded { .. })
                | LocalityError::Saw(SawError::BudgetExceeded { .. })
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoResult {
    pub isomorphic: bool,
    /// `witness[i]` is the image in the second ball of vertex `i` of the first.
    pub witness: Option<Vec<usize>>,
}

/// Decides whether the radius-`k` rooted balls are isomorphic.
pub fn ball_iso(
    g1: &dyn GraphOracle,
    g2: &dyn GraphOracle,
    k: usize,
    max_vertices: usize,
    search_budget: u64,
) -> Result<(IsoResult, Ball, Ball), LocalityError> {
    let b1 = ball(g1, k, max_vertices)?;
    let b2 = ball(g2, k, max_vertices)?;
    let r = iso_balls(&b1, &b2, search_budget)?;
    Ok((r, b1, b2))
}

fn not_iso() -> IsoResult {
    IsoResult { isomorphic: false, witness: None }
}

/// Rooted isomorphism of two balls; roots are index 0 in both.
pub fn iso_balls(b1: &Ball, b2: &Ball, search_budget: u64) -> Result<IsoResult, LocalityError> {
    if b1.len() != b2.len() || b1.edges.len() != b2.edges.len() || b1.layer_sizes() != b2.layer_sizes() {
        return Ok(not_iso());
    }
    let (c1, c2) = refine(b1, b2);
    let histogram = |c: &[usize]| {
        let mut h = c.to_vec();
        h.sort_unstable();
        h
    };
    if histogram(&c1) != histogram(&c2) {
        return Ok(not_iso());
    }
    let sorted = |b: &Ball| -> Vec<Vec<usize>> {
        b.adjacency
            .iter()
            .map(|a| {
                let mut a = a.clone();
                a.sort_unstable();
                a
            })
            .collect()
    };
    let (adj1, adj2) = (sorted(b1), sorted(b2));
    let n = b1.len();
    // Every non-root vertex has a neighbour one layer closer, mapped earlier.
    let parent: Vec<usize> = (0..n)
        .map(|i| {
            if i == 0 {
                0
            } else {
                *adj1[i].iter().find(|&&j| b1.distances[j] + 1 == b1.distances[i]).expect("ball is connected")
            }
        })
        .collect();

    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut cursor: Vec<usize> = Vec::with_capacity(n);
    let mut steps = 0u64;
    let mut i = 0;
    candidates.push(vec![0]);
    cursor.push(0);
    loop {
        steps += 1;
        if steps > search_budget {
            return Err(LocalityError::SearchBudget(search_budget));
        }
        // Try the next candidate for position i.
        let mut placed = false;
        while cursor[i] < candidates[i].len() {
            let v = candidates[i][cursor[i]];
            cursor[i] += 1;
            if consistent(i, v, &adj1, &adj2, &map, &used) {
                map[i] = v;
                used[v] = true;
                placed = true;
                break;
            }
        }
        if placed {
            i += 1;
            if i == n {
                return Ok(IsoResult { isomorphic: true, witness: Some(map) });
            }
            let p = map[parent[i]];
            let cands: Vec<usize> = adj2[p].iter().copied().filter(|&v| !used[v] && c2[v] == c1[i]).collect();
            candidates.push(cands);
            cursor.push(0);
        } else {
            candidates.pop();
            cursor.pop();
            if i == 0 {
                return Ok(not_iso());
            }
            i -= 1;
            used[map[i]] = false;
            map[i] = usize::MAX;
        }
    }
}

fn consistent(i: usize, v: usize, adj1: &[Vec<usize>], adj2: &[Vec<usize>], map: &[usize], used: &[bool]) -> bool {
    let mut mapped = 0;
    for &w in &adj1[i] {
        if map[w] != usize::MAX {
            if adj2[v].binary_search(&map[w]).is_err() {
                return false;
            }
            mapped += 1;
        }
    }
    adj2[v].iter().filter(|&&u| used[u]).count() == mapped
}

/// Joint colour refinement starting from (distance, degree).
fn refine(b1: &Ball, b2: &Ball) -> (Vec<usize>, Vec<usize>) {
    let initial = |b: &Ball| -> Vec<(usize, usize)> { (0..b.len()).map(|i| (b.distances[i], b.adjacency[i].len())).collect() };
    let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for key in initial(b1).into_iter().chain(initial(b2)) {
        let next = ids.len();
        ids.entry(key).or_insert(next);
    }
    let mut c1: Vec<usize> = initial(b1).iter().map(|k| ids[k]).collect();
    let mut c2: Vec<usize> = initial(b2).iter().map(|k| ids[k]).collect();
    let mut classes = ids.len();
    loop {
        let signature = |b: &Ball, c: &[usize]| -> Vec<(usize, Vec<usize>)> {
            (0..b.len())
                .map(|i| {
                    let mut s: Vec<usize> = b.adjacency[i].iter().map(|&j| c[j]).collect();
                    s.sort_unstable();
                    (c[i], s)
                })
                .collect()
        };
        let (s1, s2) = (signature(b1, &c1), signature(b2, &c2));
        let mut ids: BTreeMap<&(usize, Vec<usize>), usize> = BTreeMap::new();
        for s in s1.iter().chain(&s2) {
            let next = ids.len();
            ids.entry(s).or_insert(next);
        }
        let n1: Vec<usize> = s1.iter().map(|s| ids[s]).collect();
        let n2: Vec<usize> = s2.iter().map(|s| ids[s]).collect();
        let stable = ids.len() == classes;
        classes = ids.len();
        c1 = n1;
        c2 = n2;
        if stable {
            return (c1, c2);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KValue {
    Exact(usize),
    /// Balls isomorphic up to the bound; the true value may be larger.
    AtLeast(usize),
    /// A resource budget ran out while testing radius `k + 1`.
    BudgetHit(usize),
}

impl KValue {
    /// Largest radius known to give isomorphic balls.
    pub fn lower(&self) -> usize {
        match *self {
            KValue::Exact(k) | KValue::AtLeast(k) | KValue::BudgetHit(k) => k,
        }
    }
}

impl std::fmt::Display for KValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KValue::Exact(k) => write!(f, "{k}"),
            KValue::AtLeast(k) => write!(f, ">= {k}"),
            KValue::BudgetHit(k) => write!(f, ">= {k} (budget hit)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoRadiusResult {
    pub k: KValue,
    pub verdicts: Vec<(usize, bool)>,
    /// Vertex pairs of the witness at the largest isomorphic radius.
    pub witness: Vec<(Vertex, Vertex)>,
}

/// `K(G, G')`, testing radii `0..=bound` until the first failure.
pub fn iso_radius(
    g1: &dyn GraphOracle,
    g2: &dyn GraphOracle,
    bound: usize,
    max_vertices: usize,
    search_budget: u64,
) -> Result<IsoRadiusResult, LocalityError> {
    let mut verdicts = Vec::new();
    let mut witness = Vec::new();
    for k in 0..=bound {
        let (r, b1, b2) = match ball_iso(g1, g2, k, max_vertices, search_budget) {
            Ok(x) => x,
            Err(e) if e.is_budget() && k > 0 => {
                return Ok(IsoRadiusResult { k: KValue::BudgetHit(k - 1), verdicts, witness })
            }
            Err(e) => return Err(e),
        };
        verdicts.push((k, r.isomorphic));
        match r.witness {
            Some(map) => {
                witness = map.iter().enumerate().map(|(i, &j)| (b1.vertices[i].clone(), b2.vertices[j].clone())).collect();
            }
            None => {
                // Rooted balls always agree at radius 0.
                return Ok(IsoRadiusResult { k: KValue::Exact(k.saturating_sub(1)), verdicts, witness });
            }
        }
    }
    Ok(IsoRadiusResult { k: KValue::AtLeast(bound), verdicts, witness })
}

// ---------------------------------------------------------------------------
// Family scans

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Cylinder,
    LadderDihedral,
}

impl Family {
    pub fn parse(s: &str) -> Result<Family, LocalityError> {
        match s {
            "cylinder" | "cylinder_zd" => Ok(Family::Cylinder),
            "ladder" | "ladder_dihedral" => Ok(Family::LadderDihedral),
            other => Err(LocalityError::UnknownFamily(other.into())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Cylinder => "cylinder_zd",
            Family::LadderDihedral => "ladder_dihedral",
        }
    }

    pub fn member(&self, m: i64) -> Result<Model, LocalityError> {
        if m < 3 {
            return Err(LocalityError::BadParameter(m));
        }
        Ok(match self {
            Family::Cylinder => Model::CylinderZd(m),
            Family::LadderDihedral => Model::LadderDihedral(m),
        })
    }

    /// Both families approximate the square lattice.
    pub fn base(&self) -> Model {
        Model::Zd(2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankPrecondition {
    pub presentation: String,
    pub rank: usize,
    pub generators: usize,
    /// `rank < generators - 1`.
    pub satisfied: bool,
}

pub fn rank_precondition(preset: &str) -> RankPrecondition {
    let p = presets::presentation(preset);
    let rank = rank_exact(&coefficient_matrix(&p));
    let generators = p.generators().len();
    RankPrecondition { presentation: preset.into(), rank, generators, satisfied: rank + 1 < generators }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanRecord {
    pub m: i64,
    #[serde(rename = "K")]
    pub k: KValue,
    pub table_digest: String,
    /// Largest `n` such that both tables agree with the base for all `n' <= n`.
    pub agree_up_to: usize,
    /// `n <= K` where counts differ from the base.
    pub discrepancies: Vec<usize>,
    pub sigma: Vec<String>,
    pub bridges: Vec<String>,
    pub lower_bound: String,
    pub upper_bound: String,
    pub d: u64,
    pub r: RValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanReport {
    pub base: String,
    pub family: String,
    pub n_max: usize,
    pub precision: usize,
    pub base_sigma: Vec<String>,
    pub base_bridges: Vec<String>,
    pub base_lower_bound: String,
    pub base_upper_bound: String,
    pub rank_precondition: RankPrecondition,
    pub records: Vec<ScanRecord>,
}

impl ScanReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,K,agree_up_to,discrepancies,lower_bound,upper_bound,d,r,table_digest\n");
        for r in &self.records {
            let rv = match r.r {
                RValue::Exact(x) => x.to_string(),
                RValue::ExceedsBound(b) => format!(">{b}"),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.m,
                r.k,
                r.agree_up_to,
                r.discrepancies.len(),
                r.lower_bound,
                r.upper_bound,
                r.d,
                rv,
                r.table_digest
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub enumeration: EnumerationConfig,
    pub precision: usize,
    pub search_budget: u64,
    /// Radius for `d` and search bound for `r`.
    pub dr_radius: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            enumeration: EnumerationConfig::default(),
            precision: crate::saw::DEFAULT_PRECISION,
            search_budget: DEFAULT_SEARCH_BUDGET,
            dr_radius: 4,
        }
    }
}

fn tables(model: &Model, n_max: usize, cfg: &EnumerationConfig) -> Result<(CountTable, CountTable), LocalityError> {
    let g = catalog(model);
    let h = default_height(model, n_max)?;
    Ok((count_saws(g.as_ref(), n_max, cfg)?, count_bridges(g.as_ref(), &h, n_max, cfg)?))
}

fn strings(t: &CountTable) -> Vec<String> {
    t.counts.iter().map(|c| c.to_string()).collect()
}

pub fn locality_scan(family: Family, n_max: usize, m_list: &[i64], cfg: &ScanConfig) -> Result<ScanReport, LocalityError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.enumeration.threads.unwrap_or(0))
        .build()
        .map_err(|e| LocalityError::ThreadPool(e.to_string()))?;
    let inner = EnumerationConfig { threads: None, ..cfg.enumeration.clone() };
    pool.install(|| scan_in_pool(family, n_max, m_list, cfg, &inner))
}

fn scan_in_pool(
    family: Family,
    n_max: usize,
    m_list: &[i64],
    cfg: &ScanConfig,
    inner: &EnumerationConfig,
) -> Result<ScanReport, LocalityError> {
    let base = family.base();
    let g = catalog(&base);
    let (base_sigma, base_bridges) = tables(&base, n_max, inner)?;
    let base_bounds = mu_bounds(&base_sigma, &base_bridges, cfg.precision);

    let records = m_list
        .par_iter()
        .map(|&m| -> Result<ScanRecord, LocalityError> {
            let model = family.member(m)?;
            let gm = catalog(&model);
            let k = iso_radius(g.as_ref(), gm.as_ref(), n_max, inner.max_vertices, cfg.search_budget)?.k;
            let (sigma, bridges) = tables(&model, n_max, inner)?;
            let agrees = |n: usize| sigma.counts[n] == base_sigma.counts[n] && bridges.counts[n] == base_bridges.counts[n];
            let agree_up_to = (0..=n_max).take_while(|&n| agrees(n)).last().unwrap_or(0);
            let discrepancies = (0..=k.lower().min(n_max)).filter(|&n| !agrees(n)).collect();
            let bounds = mu_bounds(&sigma, &bridges, cfg.precision);
            let h = default_height(&model, cfg.dr_radius)?;
            let d = compute_d(gm.as_ref(), &h, cfg.dr_radius, inner.max_vertices)?;
            let r = compute_r(gm.as_ref(), &h, cfg.dr_radius, inner.max_vertices)?;
            let mut digest = Sha256::new();
            digest.update(TableDocument::from_counts(&sigma).to_csv());
            digest.update(TableDocument::from_counts(&bridges).to_csv());
            Ok(ScanRecord {
                m,
                k,
                table_digest: digest.finalize().iter().map(|b| format!("{b:02x}")).collect(),
                agree_up_to,
                discrepancies,
                sigma: strings(&sigma),
                bridges: strings(&bridges),
                lower_bound: bounds.best_lower.value,
                upper_bound: bounds.best_upper.value,
                d,
                r,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(ScanReport {
        base: base.name(),
        family: family.name().into(),
        n_max,
        precision: cfg.precision,
        base_sigma: strings(&base_sigma),
        base_bridges: strings(&base_bridges),
        base_lower_bound: base_bounds.best_lower.value,
        base_upper_bound: base_bounds.best_upper.value,
        rank_precondition: rank_precondition("zd2"),
        records,
    })
}
