//! Tree-to-character translation: rectify a predicted tree to the closest
//! lexicon tree, then pick one character among those sharing it by cosine
//! similarity against support-sample features.

use std::io::{self, Read, Write};

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::Lexicon;
use crate::metric::{combine, MetricParams, PreparedTree, TOLERANCE};
use crate::tree::Rsst;

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("lexicon is empty")]
    EmptyLexicon,
    #[error("{0} candidates share the rectified tree but no features were supplied")]
    MissingFeature(usize),
    #[error("no support vectors for {0}")]
    MissingSupport(String),
    #[error("dimension mismatch: {expected} vs {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("non-finite feature value")]
    NonFinite,
    #[error("feature file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(Vec<f32>);

impl FeatureVector {
    pub fn new(values: Vec<f32>) -> Result<Self, TranslateError> {
        if values.is_empty() {
            return Err(TranslateError::DimensionMismatch { expected: 1, found: 0 });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(TranslateError::NonFinite);
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f32] {
        &self.0
    }

    pub fn scaled(&self, c: f32) -> Result<Self, TranslateError> {
        Self::new(self.0.iter().map(|v| v * c).collect())
    }
}

pub fn cosine_similarity(f: &FeatureVector, g: &FeatureVector) -> Result<f64, TranslateError> {
    if f.dim() != g.dim() {
        return Err(TranslateError::DimensionMismatch { expected: f.dim(), found: g.dim() });
    }
    let (mut dot, mut ff, mut gg) = (0.0f64, 0.0f64, 0.0f64);
    for (&a, &b) in f.0.iter().zip(&g.0) {
        let (a, b) = (f64::from(a), f64::from(b));
        dot += a * b;
        ff += a * a;
        gg += b * b;
    }
    if ff == 0.0 || gg == 0.0 {
        return Err(TranslateError::ZeroVector);
    }
    Ok((dot / (ff.sqrt() * gg.sqrt())).clamp(-1.0, 1.0))
}

/// Support-sample feature vectors per codepoint, all of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStore {
    dim: usize,
    entries: IndexMap<String, Vec<FeatureVector>>,
}

const MAGIC: &[u8; 8] = b"RSSTFEAT";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct JsonStore {
    dim: usize,
    records: Vec<JsonRecord>,
}

#[derive(Serialize, Deserialize)]
struct JsonRecord {
    codepoint: String,
    vectors: Vec<FeatureVector>,
}

impl FeatureStore {
    pub fn new(dim: usize) -> Self {
        Self { dim, entries: IndexMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, codepoint: &str, vector: FeatureVector) -> Result<(), TranslateError> {
        if vector.dim() != self.dim {
            return Err(TranslateError::DimensionMismatch { expected: self.dim, found: vector.dim() });
        }
        self.entries.entry(codepoint.to_owned()).or_default().push(vector);
        Ok(())
    }

    pub fn support(&self, codepoint: &str) -> Option<&[FeatureVector]> {
        self.entries.get(codepoint).map(Vec::as_slice)
    }

    /// Binary layout, little-endian: `RSSTFEAT`, u32 version, u32 dim,
    /// u32 record count, then per record a u32-length-prefixed UTF-8
    /// codepoint, u32 vector count and `dim` f32 values per vector.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<(), TranslateError> {
        let u32_of = |n: usize| u32::try_from(n).map_err(|_| TranslateError::Format(format!("{n} exceeds u32")));
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&u32_of(self.dim)?.to_le_bytes())?;
        w.write_all(&u32_of(self.entries.len())?.to_le_bytes())?;
        for (codepoint, vectors) in &self.entries {
            w.write_all(&u32_of(codepoint.len())?.to_le_bytes())?;
            w.write_all(codepoint.as_bytes())?;
            w.write_all(&u32_of(vectors.len())?.to_le_bytes())?;
            for v in vectors {
                for x in &v.0 {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self, TranslateError> {
        fn u32_le<R: Read>(r: &mut R) -> Result<u32, TranslateError> {
            let mut b = [0u8; 4];
            r.read_exact(&mut b)?;
            Ok(u32::from_le_bytes(b))
        }
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(TranslateError::Format("bad magic".into()));
        }
        let version = u32_le(&mut r)?;
        if version != VERSION {
            return Err(TranslateError::Format(format!("unsupported version {version}")));
        }
        let dim = u32_le(&mut r)? as usize;
        if dim == 0 {
            return Err(TranslateError::Format("zero dimension".into()));
        }
        let records = u32_le(&mut r)?;
        let mut store = Self::new(dim);
        for _ in 0..records {
            let len = u32_le(&mut r)? as usize;
            let mut name = vec![0u8; len];
            r.read_exact(&mut name)?;
            let codepoint = String::from_utf8(name).map_err(|e| TranslateError::Format(e.to_string()))?;
            let count = u32_le(&mut r)?;
            store.entries.entry(codepoint.clone()).or_default();
            for _ in 0..count {
                let mut values = Vec::with_capacity(dim);
                for _ in 0..dim {
                    let mut b = [0u8; 4];
                    r.read_exact(&mut b)?;
                    values.push(f32::from_le_bytes(b));
                }
                store.insert(&codepoint, FeatureVector::new(values)?)?;
            }
        }
        Ok(store)
    }

    pub fn to_json(&self) -> Result<String, TranslateError> {
        let doc = JsonStore {
            dim: self.dim,
            records: self
                .entries
                .iter()
                .map(|(c, v)| JsonRecord { codepoint: c.clone(), vectors: v.clone() })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self, TranslateError> {
        let doc: JsonStore = serde_json::from_str(text)?;
        let mut store = Self::new(doc.dim);
        for rec in doc.records {
            store.entries.entry(rec.codepoint.clone()).or_default();
            for v in rec.vectors {
                store.insert(&rec.codepoint, FeatureVector::new(v.0)?)?;
            }
        }
        Ok(store)
    }

    /// Reads either format, sniffing the binary magic.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, TranslateError> {
        if bytes.starts_with(MAGIC) {
            Self::read_binary(bytes)
        } else {
            let text = std::str::from_utf8(bytes).map_err(|e| TranslateError::Format(e.to_string()))?;
            Self::from_json(text)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RectifyResult {
    #[serde(serialize_with = "serialize_tree")]
    pub rectified: Rsst,
    pub distance: f64,
    pub candidates: Vec<String>,
    pub exact_match: bool,
}

fn serialize_tree<S: serde::Serializer>(tree: &Rsst, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&tree.serialize())
}

/// Which terms of the combined metric drive the candidate ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    Combined,
    TreeOnly,
    StrokeOnly,
}

impl DistanceKind {
    pub(crate) fn score(self, tree: f64, stroke: usize, beta: f64) -> f64 {
        match self {
            DistanceKind::Combined => combine(tree, stroke, beta),
            DistanceKind::TreeOnly => tree,
            DistanceKind::StrokeOnly => stroke as f64,
        }
    }
}

/// Rectifies `m` under the combined metric.
pub fn rectify(m: &Rsst, lex: &Lexicon, params: MetricParams) -> Result<RectifyResult, TranslateError> {
    rectify_with(m, lex, params, DistanceKind::Combined)
}

pub fn rectify_with(
    m: &Rsst,
    lex: &Lexicon,
    params: MetricParams,
    kind: DistanceKind,
) -> Result<RectifyResult, TranslateError> {
    if lex.is_empty() {
        return Err(TranslateError::EmptyLexicon);
    }
    if let Some(bucket) = lex.bucket(&m.serialize()) {
        return Ok(RectifyResult {
            rectified: m.clone(),
            distance: 0.0,
            candidates: bucket.into_iter().map(str::to_owned).collect(),
            exact_match: true,
        });
    }
    let query = PreparedTree::new(m, params.alpha);
    let mut best: Option<(f64, &Rsst, Vec<&str>)> = None;
    for (tree, codepoints) in lex.distinct_trees() {
        let cand = PreparedTree::new(tree, params.alpha);
        let stroke = query.stroke_distance(&cand);
        // the stroke term alone already loses: skip the tree DP
        if let Some((b, ..)) = &best {
            let bound = match kind {
                DistanceKind::Combined => params.beta * stroke as f64,
                DistanceKind::StrokeOnly => stroke as f64,
                DistanceKind::TreeOnly => 0.0,
            };
            if bound > b + TOLERANCE {
                continue;
            }
        }
        let d = match kind {
            DistanceKind::StrokeOnly => stroke as f64,
            _ => kind.score(query.weighted_edit_distance(&cand), stroke, params.beta),
        };
        if best.as_ref().map_or(true, |(b, ..)| d < b - TOLERANCE) {
            best = Some((d, tree, codepoints));
        }
    }
    let (distance, tree, codepoints) = best.expect("non-empty lexicon");
    Ok(RectifyResult {
        rectified: tree.clone(),
        distance,
        candidates: codepoints.into_iter().map(str::to_owned).collect(),
        exact_match: false,
    })
}

/// Same result as [`rectify_with`], with candidate distances computed on the
/// rayon pool. The argmin runs sequentially in lexicon order.
pub fn rectify_par(
    m: &Rsst,
    lex: &Lexicon,
    params: MetricParams,
    kind: DistanceKind,
) -> Result<RectifyResult, TranslateError> {
    if lex.is_empty() {
        return Err(TranslateError::EmptyLexicon);
    }
    if lex.bucket(&m.serialize()).is_some() {
        return rectify_with(m, lex, params, kind);
    }
    let query = PreparedTree::new(m, params.alpha);
    let trees: Vec<(&Rsst, Vec<&str>)> = lex.distinct_trees().collect();
    let distances: Vec<f64> = trees
        .par_iter()
        .map(|(tree, _)| {
            let cand = PreparedTree::new(tree, params.alpha);
            kind.score(query.weighted_edit_distance(&cand), query.stroke_distance(&cand), params.beta)
        })
        .collect();
    let mut best = 0;
    for (i, &d) in distances.iter().enumerate().skip(1) {
        if d < distances[best] - TOLERANCE {
            best = i;
        }
    }
    let (tree, codepoints) = &trees[best];
    Ok(RectifyResult {
        rectified: (*tree).clone(),
        distance: distances[best],
        candidates: codepoints.iter().map(|c| c.to_string()).collect(),
        exact_match: false,
    })
}

/// Picks the final character. A single candidate is returned directly;
/// otherwise the candidate whose best support vector is most similar to the
/// query wins, ties going to the earlier candidate.
pub fn match_character(
    res: &RectifyResult,
    query_feature: Option<&FeatureVector>,
    store: Option<&FeatureStore>,
) -> Result<String, TranslateError> {
    match res.candidates.as_slice() {
        [] => Err(TranslateError::EmptyLexicon),
        [only] => Ok(only.clone()),
        many => {
            let (Some(query), Some(store)) = (query_feature, store) else {
                return Err(TranslateError::MissingFeature(many.len()));
            };
            if query.dim() != store.dim() {
                return Err(TranslateError::DimensionMismatch { expected: store.dim(), found: query.dim() });
            }
            let mut best: Option<(f64, &String)> = None;
            for cand in many {
                let support = store
                    .support(cand)
                    .filter(|s| !s.is_empty())
                    .ok_or_else(|| TranslateError::MissingSupport(cand.clone()))?;
                let mut score = f64::NEG_INFINITY;
                for v in support {
                    score = score.max(cosine_similarity(query, v)?);
                }
                if best.map_or(true, |(b, _)| score > b) {
                    best = Some((score, cand));
                }
            }
            Ok(best.expect("at least two candidates").1.clone())
        }
    }
}

pub fn translate(
    m: &Rsst,
    lex: &Lexicon,
    params: MetricParams,
    query_feature: Option<&FeatureVector>,
    store: Option<&FeatureStore>,
) -> Result<(String, RectifyResult), TranslateError> {
    let res = rectify(m, lex, params)?;
    let codepoint = match_character(&res, query_feature, store)?;
    Ok((codepoint, res))
}
