//! Finite presentations, their coefficient matrices, and group height functions.
//!
//! A relator is a plain word over the generator symbols; inverses are separate
//! symbols tied together by `inverse_pairs`. The coefficient matrix has one row
//! of letter counts per relator. Infinite relator families whose letter counts
//! are affine in the family index contribute two rows, the constant part `u0`
//! and the slope `u1`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphs::GraphOracle;
use crate::linalg;

/// Reserved symbol for the identity element; never a generator.
pub const IDENTITY_TOKEN: &str = "1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresentationError {
    #[error("invalid presentation document: {0}")]
    Json(String),
    #[error("generator list is empty")]
    NoGenerators,
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("`{0}` is reserved for the identity and cannot be a generator")]
    IdentityGenerator(String),
    #[error("unknown symbol `{symbol}` in {context}")]
    UnknownSymbol { symbol: String, context: String },
    #[error("symbol `{0}` appears in more than one inverse pair")]
    RepeatedInversePair(String),
    #[error("relator {0} is empty")]
    EmptyRelator(usize),
    #[error("malformed counts in relator family {family}: {reason}")]
    MalformedFamily { family: usize, reason: String },
    #[error("height vector has length {got}, expected {expected}")]
    WrongLength { got: usize, expected: usize },
    #[error("height vector is zero")]
    ZeroGamma,
    #[error("kernel entry does not fit in 64 bits")]
    Overflow,
}

/// Relator family `{u0 + n*u1 : n >= 0}` given by letter-count vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamRelatorFamily {
    pub u0: Vec<i64>,
    pub u1: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    pub name: Option<String>,
    generators: Vec<String>,
    inverse_pairs: Vec<(usize, usize)>,
    relators: Vec<Vec<usize>>,
    relator_families: Vec<ParamRelatorFamily>,
}

/// JSON form of a presentation.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PresentationDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub generators: Vec<String>,
    #[serde(default)]
    pub inverse_pairs: Vec<[String; 2]>,
    #[serde(default)]
    pub relators: Vec<String>,
    #[serde(default)]
    pub relator_families: Vec<FamilyDocument>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FamilyDocument {
    #[serde(default)]
    pub u0: BTreeMap<String, i64>,
    #[serde(default)]
    pub u1: BTreeMap<String, i64>,
}

pub fn parse_presentation(text: &str) -> Result<Presentation, PresentationError> {
    let doc: PresentationDocument =
        serde_json::from_str(text).map_err(|e| PresentationError::Json(e.to_string()))?;
    Presentation::from_document(&doc)
}

impl Presentation {
    pub fn from_document(doc: &PresentationDocument) -> Result<Self, PresentationError> {
        if doc.generators.is_empty() {
            return Err(PresentationError::NoGenerators);
        }
        let mut index = HashMap::new();
        for (i, g) in doc.generators.iter().enumerate() {
            if g == IDENTITY_TOKEN {
                return Err(PresentationError::IdentityGenerator(g.clone()));
            }
            if g.is_empty() || g.chars().any(char::is_whitespace) {
                return Err(PresentationError::UnknownSymbol {
                    symbol: g.clone(),
                    context: "generator list".into(),
                });
            }
            if index.insert(g.as_str(), i).is_some() {
                return Err(PresentationError::DuplicateGenerator(g.clone()));
            }
        }
        let lookup = |s: &str, context: String| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| PresentationError::UnknownSymbol { symbol: s.to_string(), context })
        };

        let mut paired = vec![false; doc.generators.len()];
        let mut inverse_pairs = Vec::new();
        for [a, b] in &doc.inverse_pairs {
            let ia = lookup(a, "inverse pair".into())?;
            let ib = lookup(b, "inverse pair".into())?;
            for (i, s) in [(ia, a), (ib, b)] {
                if paired[i] && !(ia == ib && s == b) {
                    return Err(PresentationError::RepeatedInversePair(s.clone()));
                }
                paired[i] = true;
            }
            inverse_pairs.push((ia, ib));
        }

        let mut relators = Vec::new();
        for (k, word) in doc.relators.iter().enumerate() {
            let letters = word
                .split_whitespace()
                .map(|s| lookup(s, format!("relator {k}")))
                .collect::<Result<Vec<_>, _>>()?;
            if letters.is_empty() {
                return Err(PresentationError::EmptyRelator(k));
            }
            relators.push(letters);
        }

        let n = doc.generators.len();
        let mut relator_families = Vec::new();
        for (f, fam) in doc.relator_families.iter().enumerate() {
            let counts = |m: &BTreeMap<String, i64>| -> Result<Vec<i64>, PresentationError> {
                let mut v = vec![0; n];
                for (s, &c) in m {
                    let i = index.get(s.as_str()).copied().ok_or_else(|| {
                        PresentationError::MalformedFamily {
                            family: f,
                            reason: format!("unknown symbol `{s}`"),
                        }
                    })?;
                    if c < 0 {
                        return Err(PresentationError::MalformedFamily {
                            family: f,
                            reason: format!("negative count for `{s}`"),
                        });
                    }
                    v[i] = c;
                }
                Ok(v)
            };
            let u0 = counts(&fam.u0)?;
            let u1 = counts(&fam.u1)?;
            if u0.iter().chain(&u1).all(|&c| c == 0) {
                return Err(PresentationError::MalformedFamily {
                    family: f,
                    reason: "all counts are zero".into(),
                });
            }
            relator_families.push(ParamRelatorFamily { u0, u1 });
        }

        Ok(Presentation {
            name: doc.name.clone(),
            generators: doc.generators.clone(),
            inverse_pairs,
            relators,
            relator_families,
        })
    }

    pub fn to_document(&self) -> PresentationDocument {
        let counts = |v: &[i64]| {
            v.iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(i, &c)| (self.generators[i].clone(), c))
                .collect()
        };
        PresentationDocument {
            name: self.name.clone(),
            generators: self.generators.clone(),
            inverse_pairs: self
                .inverse_pairs
                .iter()
                .map(|&(a, b)| [self.generators[a].clone(), self.generators[b].clone()])
                .collect(),
            relators: (0..self.relators.len()).map(|i| self.relator_word(i)).collect(),
            relator_families: self
                .relator_families
                .iter()
                .map(|f| FamilyDocument { u0: counts(&f.u0), u1: counts(&f.u1) })
                .collect(),
        }
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn inverse_pairs(&self) -> &[(usize, usize)] {
        &self.inverse_pairs
    }

    pub fn relators(&self) -> &[Vec<usize>] {
        &self.relators
    }

    pub fn relator_families(&self) -> &[ParamRelatorFamily] {
        &self.relator_families
    }

    pub fn symbol_index(&self, s: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == s)
    }

    pub fn relator_word(&self, i: usize) -> String {
        self.relators[i]
            .iter()
            .map(|&g| self.generators[g].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses a space-separated word into generator indices.
    pub fn parse_word(&self, word: &str) -> Result<Vec<usize>, PresentationError> {
        word.split_whitespace()
            .map(|s| {
                self.symbol_index(s).ok_or_else(|| PresentationError::UnknownSymbol {
                    symbol: s.to_string(),
                    context: "word".into(),
                })
            })
            .collect()
    }

    /// Adds the relator `word^m`, as when quotienting by a power of an element.
    pub fn with_power_relator(&self, word: &[usize], m: usize) -> Presentation {
        let mut p = self.clone();
        p.relators.push(word.iter().copied().cycle().take(word.len() * m).collect());
        p
    }
}

/// Which row of the coefficient matrix a relator-derived constraint came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowSource {
    Relator(usize),
    FamilyConstant(usize),
    FamilySlope(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientMatrix {
    pub rows: Vec<Vec<i64>>,
    pub sources: Vec<RowSource>,
    pub columns: usize,
}

impl CoefficientMatrix {
    pub fn big_rows(&self) -> Vec<Vec<BigInt>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }
}

pub fn coefficient_matrix(p: &Presentation) -> CoefficientMatrix {
    let n = p.generators.len();
    let mut rows = Vec::new();
    let mut sources = Vec::new();
    for (i, rel) in p.relators.iter().enumerate() {
        let mut row = vec![0i64; n];
        for &g in rel {
            row[g] += 1;
        }
        rows.push(row);
        sources.push(RowSource::Relator(i));
    }
    for (i, fam) in p.relator_families.iter().enumerate() {
        rows.push(fam.u0.clone());
        sources.push(RowSource::FamilyConstant(i));
        rows.push(fam.u1.clone());
        sources.push(RowSource::FamilySlope(i));
    }
    CoefficientMatrix { rows, sources, columns: n }
}

pub fn rank_exact(c: &CoefficientMatrix) -> usize {
    linalg::rank(&c.big_rows())
}

/// Integer basis of the null space of `C`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelBasis {
    pub vectors: Vec<Vec<BigInt>>,
}

pub fn integer_kernel_basis(c: &CoefficientMatrix) -> KernelBasis {
    KernelBasis { vectors: linalg::integer_kernel(&c.big_rows(), c.columns) }
}

pub fn ghf_exists(p: &Presentation) -> bool {
    rank_exact(&coefficient_matrix(p)) < p.generators.len()
}

/// First Betti number `|S| - rank(C)`.
pub fn betti(p: &Presentation) -> usize {
    p.generators.len() - rank_exact(&coefficient_matrix(p))
}

/// Integer weights on generators defining a candidate group height function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupHeightSpec {
    pub gamma: Vec<i64>,
}

impl GroupHeightSpec {
    pub fn new(p: &Presentation, gamma: Vec<i64>) -> Result<Self, PresentationError> {
        if gamma.len() != p.generators.len() {
            return Err(PresentationError::WrongLength {
                got: gamma.len(),
                expected: p.generators.len(),
            });
        }
        if gamma.iter().all(|&g| g == 0) {
            return Err(PresentationError::ZeroGamma);
        }
        Ok(GroupHeightSpec { gamma })
    }

    pub fn from_kernel_vector(p: &Presentation, v: &[BigInt]) -> Result<Self, PresentationError> {
        let gamma = v
            .iter()
            .map(|x| x.to_i64().ok_or(PresentationError::Overflow))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(p, gamma)
    }

    /// Sum of weights along a space-separated word.
    pub fn evaluate(&self, p: &Presentation, word: &str) -> Result<i64, PresentationError> {
        Ok(self.evaluate_letters(&p.parse_word(word)?))
    }

    pub fn evaluate_letters(&self, letters: &[usize]) -> i64 {
        letters.iter().map(|&g| self.gamma[g]).sum()
    }

    /// `d(h)`: largest height change across an edge of the Cayley graph.
    pub fn d(&self) -> u64 {
        self.gamma.iter().map(|g| g.unsigned_abs()).max().unwrap_or(0)
    }
}

/// First primitive kernel vector as a height spec, if any exists.
pub fn default_ghf(p: &Presentation) -> Option<GroupHeightSpec> {
    let k = integer_kernel_basis(&coefficient_matrix(p));
    k.vectors
        .first()
        .and_then(|v| GroupHeightSpec::from_kernel_vector(p, v).ok())
}

pub fn d_of_ghf(spec: &GroupHeightSpec) -> u64 {
    spec.d()
}

/// Why a height spec failed to be well defined.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Witness {
    /// A coefficient row with non-zero weight sum.
    Row { source: RowSource, word: String, sum: i64 },
    /// Two spellings of the same vertex of a catalog model disagree.
    Spelling { vertex: Vec<i64>, first: i64, second: i64 },
    /// An edge label of the model is not a generator of the presentation.
    UnknownLabel(String),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Row { word, sum, .. } => write!(f, "relator `{word}` has weight {sum}"),
            Witness::Spelling { vertex, first, second } => {
                write!(f, "vertex {vertex:?} spelled with heights {first} and {second}")
            }
            Witness::UnknownLabel(l) => write!(f, "edge label `{l}` is not a generator"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WellDefinedReport {
    pub well_defined: bool,
    pub witness: Option<Witness>,
    pub vertices_checked: usize,
}

/// Checks that the weights annihilate every coefficient row, and optionally
/// that every spelling of every vertex within `depth` of the identity in a
/// catalog model gets the same height.
pub fn verify_well_defined(
    spec: &GroupHeightSpec,
    p: &Presentation,
    model: Option<&dyn GraphOracle>,
    depth: usize,
) -> WellDefinedReport {
    let c = coefficient_matrix(p);
    for (row, source) in c.rows.iter().zip(&c.sources) {
        let sum: i64 = row.iter().zip(&spec.gamma).map(|(a, b)| a * b).sum();
        if sum != 0 {
            let word = match *source {
                RowSource::Relator(i) => p.relator_word(i),
                RowSource::FamilyConstant(i) => format!("family {i} (constant part)"),
                RowSource::FamilySlope(i) => format!("family {i} (slope)"),
            };
            return WellDefinedReport {
                well_defined: false,
                witness: Some(Witness::Row { source: *source, word, sum }),
                vertices_checked: 0,
            };
        }
    }
    let Some(model) = model else {
        return WellDefinedReport { well_defined: true, witness: None, vertices_checked: 0 };
    };
    match spell_heights(spec, p, model, depth) {
        Ok(table) => WellDefinedReport {
            well_defined: true,
            witness: None,
            vertices_checked: table.len(),
        },
        Err(w) => WellDefinedReport { well_defined: false, witness: Some(w), vertices_checked: 0 },
    }
}

/// Heights of all vertices within `depth` of the root, obtained by following
/// labelled edges from the identity. Every edge inside the ball is checked
/// against the weight of its label, which compares all spellings at once.
pub fn spell_heights(
    spec: &GroupHeightSpec,
    p: &Presentation,
    model: &dyn GraphOracle,
    depth: usize,
) -> Result<HashMap<Vec<i64>, i64>, Witness> {
    let weights = model
        .label_names()
        .iter()
        .map(|l| {
            p.symbol_index(l)
                .map(|i| spec.gamma[i])
                .ok_or_else(|| Witness::UnknownLabel(l.clone()))
        })
        .collect::<Result<Vec<i64>, _>>()?;
    let root = model.root();
    let mut heights: HashMap<Vec<i64>, i64> = HashMap::new();
    heights.insert(root.clone(), 0);
    let mut frontier = vec![root];
    for level in 0..=depth {
        let mut next = Vec::new();
        for v in &frontier {
            let hv = heights[v];
            for (w, label) in model.neighbors(v) {
                let hw = hv + weights[label as usize];
                match heights.get(&w) {
                    Some(&old) if old != hw => {
                        return Err(Witness::Spelling { vertex: w, first: old, second: hw });
                    }
                    Some(_) => {}
                    None if level < depth => {
                        heights.insert(w.clone(), hw);
                        next.push(w);
                    }
                    None => {}
                }
            }
        }
        frontier = next;
    }
    Ok(heights)
}

/// Summary row for the presentation-level report.
#[derive(Debug, Clone, Serialize)]
pub struct GhfReport {
    pub name: Option<String>,
    pub generators: usize,
    pub relators: usize,
    pub relator_families: usize,
    pub rank: usize,
    pub betti: usize,
    pub exists: bool,
    pub kernel: Vec<Vec<String>>,
    pub gamma: Option<Vec<i64>>,
    pub d: Option<u64>,
}

pub fn ghf_report(p: &Presentation) -> GhfReport {
    let c = coefficient_matrix(p);
    let rank = rank_exact(&c);
    let kernel = integer_kernel_basis(&c);
    let spec = default_ghf(p);
    GhfReport {
        name: p.name.clone(),
        generators: p.generators.len(),
        relators: p.relators.len(),
        relator_families: p.relator_families.len(),
        rank,
        betti: p.generators.len() - rank,
        exists: rank < p.generators.len(),
        kernel: kernel
            .vectors
            .iter()
            .map(|v| v.iter().map(|x| x.to_string()).collect())
            .collect(),
        d: spec.as_ref().map(GroupHeightSpec::d),
        gamma: spec.map(|s| s.gamma),
    }
}
