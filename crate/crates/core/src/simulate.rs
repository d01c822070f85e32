//! Synthetic lexicons, a stochastic tree corruption model and the harness
//! that scores rectification under the combined metric and its two
//! single-term ablations.
//!
//! The noise model is synthetic: it stands in for recognizer errors and is
//! not fitted to any real decoder.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{Lexicon, LexiconRecord};
use crate::metric::{MetricParams, PreparedTree, TOLERANCE};
use crate::translator::{translate, DistanceKind, FeatureStore, FeatureVector, TranslateError};
use crate::tree::{Rsst, RsstNode, StrokeAlphabet, StrokeSymbol, StructureOp};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("lexicon is empty")]
    EmptyLexicon,
    #[error("trial count must be positive")]
    NoTrials,
    #[error("probability {name} = {value} outside [0, 1]")]
    Probability { name: &'static str, value: f64 },
    #[error("stroke alphabet must be non-empty")]
    Alphabet,
    #[error(transparent)]
    Translate(#[from] TranslateError),
}

fn default_alphabet() -> u8 {
    StrokeAlphabet::default().size()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    pub p_sub: f64,
    pub p_del: f64,
    pub p_ins: f64,
    pub p_struct: f64,
    pub seed: u64,
    #[serde(default = "default_alphabet")]
    pub alphabet: u8,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self { p_sub: 0.0, p_del: 0.0, p_ins: 0.0, p_struct: 0.0, seed: 42, alphabet: default_alphabet() }
    }
}

impl PerturbationConfig {
    /// The desk-scale benchmark setting.
    pub fn standard() -> Self {
        Self { p_sub: 0.05, p_del: 0.05, p_struct: 0.05, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (name, value) in [
            ("p_sub", self.p_sub),
            ("p_del", self.p_del),
            ("p_ins", self.p_ins),
            ("p_struct", self.p_struct),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SimError::Probability { name, value });
            }
        }
        if self.alphabet == 0 {
            return Err(SimError::Alphabet);
        }
        Ok(())
    }

    fn stroke_alphabet(&self) -> StrokeAlphabet {
        StrokeAlphabet::new(self.alphabet).unwrap_or_default()
    }
}

const STREAM_SAMPLE: u64 = 0;
const STREAM_PERTURB: u64 = 1;

/// Independent random stream per `(seed, trial, purpose)`, so trials can run
/// in any order.
fn trial_rng(seed: u64, trial: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial.wrapping_mul(2).wrapping_add(purpose));
    rng
}

fn random_symbol<R: Rng>(rng: &mut R, alphabet: StrokeAlphabet) -> StrokeSymbol {
    alphabet.symbol(rng.gen_range(1..=u32::from(alphabet.size()))).expect("in range")
}

fn other_symbol<R: Rng>(rng: &mut R, s: StrokeSymbol, alphabet: StrokeAlphabet) -> StrokeSymbol {
    let k = u32::from(alphabet.size());
    if k < 2 {
        return s;
    }
    let mut code = rng.gen_range(1..k);
    if code >= u32::from(s.code()) {
        code += 1;
    }
    alphabet.symbol(code).expect("in range")
}

/// Corrupts `tree` deterministically for `(cfg.seed, trial_index)`.
pub fn perturb(tree: &Rsst, cfg: &PerturbationConfig, trial_index: u64) -> Rsst {
    let mut rng = trial_rng(cfg.seed, trial_index, STREAM_PERTURB);
    perturb_with(tree, cfg, &mut rng)
}

/// Operator swaps first (pre-order), then stroke edits leaf by leaf.
pub fn perturb_with<R: Rng>(tree: &Rsst, cfg: &PerturbationConfig, rng: &mut R) -> Rsst {
    let mut root = tree.root().clone();
    swap_operators(&mut root, cfg.p_struct, rng);
    edit_leaves(&mut root, cfg, rng);
    Rsst::new(root).expect("perturbation preserves validity")
}

fn swap_operators<R: Rng>(node: &mut RsstNode, p: f64, rng: &mut R) {
    if let RsstNode::Internal { op, children } = node {
        if rng.gen_bool(p) {
            let alternatives: Vec<StructureOp> = op.same_arity_alternatives().collect();
            *op = *alternatives.choose(rng).expect("every arity has two operators");
        }
        children.iter_mut().for_each(|c| swap_operators(c, p, rng));
    }
}

fn edit_leaves<R: Rng>(node: &mut RsstNode, cfg: &PerturbationConfig, rng: &mut R) {
    match node {
        RsstNode::Internal { children, .. } => children.iter_mut().for_each(|c| edit_leaves(c, cfg, rng)),
        RsstNode::Leaf { strokes, .. } => *strokes = edit_strokes(strokes, cfg, rng),
    }
}

fn edit_strokes<R: Rng>(strokes: &[StrokeSymbol], cfg: &PerturbationConfig, rng: &mut R) -> Vec<StrokeSymbol> {
    let alphabet = cfg.stroke_alphabet();
    let mut out = Vec::with_capacity(strokes.len() + 2);
    for (i, &s) in strokes.iter().enumerate() {
        if rng.gen_bool(cfg.p_ins) {
            out.push(random_symbol(rng, alphabet));
        }
        let last = i + 1 == strokes.len();
        if rng.gen_bool(cfg.p_del) {
            if !(last && out.is_empty()) {
                continue;
            }
            // would empty the leaf: substitute instead
            out.push(other_symbol(rng, s, alphabet));
        } else if rng.gen_bool(cfg.p_sub) {
            out.push(other_symbol(rng, s, alphabet));
        } else {
            out.push(s);
        }
    }
    if rng.gen_bool(cfg.p_ins) {
        out.push(random_symbol(rng, alphabet));
    }
    out
}

/// Random tree with between 1 and `max_leaves` leaves and 1..=`max_strokes`
/// strokes per leaf. Ternary operators appear whenever three or more leaves
/// remain to be placed.
pub fn random_tree<R: Rng>(rng: &mut R, max_leaves: usize, max_strokes: usize, alphabet: StrokeAlphabet) -> Rsst {
    let leaves = rng.gen_range(1..=max_leaves.max(1));
    let root = random_node(rng, leaves, max_strokes.max(1), alphabet);
    Rsst::new(root).expect("generator builds valid trees")
}

fn random_node<R: Rng>(rng: &mut R, leaves: usize, max_strokes: usize, alphabet: StrokeAlphabet) -> RsstNode {
    if leaves == 1 {
        let n = rng.gen_range(1..=max_strokes);
        let strokes = (0..n).map(|_| random_symbol(rng, alphabet)).collect();
        let id = format!("r{}", rng.gen_range(0..8));
        return RsstNode::leaf(&id, strokes);
    }
    let ops: Vec<StructureOp> = StructureOp::ALL.into_iter().filter(|op| op.arity() <= leaves).collect();
    let op = *ops.choose(rng).expect("binary operators always fit");
    // split the leaf budget into `arity` positive parts
    let arity = op.arity();
    let mut parts = vec![1; arity];
    for _ in 0..leaves - arity {
        parts[rng.gen_range(0..arity)] += 1;
    }
    let children = parts.into_iter().map(|n| random_node(rng, n, max_strokes, alphabet)).collect();
    RsstNode::internal(op, children)
}

/// Deterministic synthetic lexicon. Characters compose radicals drawn with a
/// skewed frequency from a shared inventory, so radicals recur across
/// characters and identical or stroke-identical trees occur naturally.
pub fn synth_lexicon(count: usize, seed: u64, max_depth: u32, alphabet: StrokeAlphabet) -> Lexicon {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inventory_size = (count / 3).max(8);
    let inventory: Vec<(String, Vec<StrokeSymbol>)> = (0..inventory_size)
        .map(|i| {
            let n = rng.gen_range(1..=6);
            (format!("r{i:03}"), (0..n).map(|_| random_symbol(&mut rng, alphabet)).collect())
        })
        .collect();
    let records = (0..count).map(|i| {
        let root = synth_node(&mut rng, 0, max_depth, &inventory);
        LexiconRecord {
            codepoint: format!("U+{:04X}", 0xE000 + i),
            tree: Rsst::new(root).expect("generator builds valid trees"),
        }
    });
    Lexicon::from_records(records.collect::<Vec<_>>()).expect("generated codepoints are unique")
}

fn synth_node<R: Rng>(rng: &mut R, depth: u32, max_depth: u32, inventory: &[(String, Vec<StrokeSymbol>)]) -> RsstNode {
    let p_internal = if depth == 0 { 0.85 } else { 0.3 };
    if depth < max_depth && rng.gen_bool(p_internal) {
        let op = StructureOp::ALL[rng.gen_range(0..StructureOp::ALL.len())];
        let children = (0..op.arity())
            .map(|_| synth_node(rng, depth + 1, max_depth, inventory))
            .collect();
        return RsstNode::internal(op, children);
    }
    // squaring a uniform draw skews toward the front of the inventory
    let u: f64 = rng.gen();
    let idx = ((u * u) * inventory.len() as f64) as usize;
    let (id, strokes) = &inventory[idx.min(inventory.len() - 1)];
    RsstNode::leaf(id, strokes.clone())
}

/// One random unit-scale support vector per character.
pub fn synthetic_features(lex: &Lexicon, dim: usize, seed: u64) -> FeatureStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f00d);
    let mut store = FeatureStore::new(dim);
    for r in lex.records() {
        let values = loop {
            let v: Vec<f32> = (0..dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
            if v.iter().any(|x| *x != 0.0) {
                break v;
            }
        };
        let v = FeatureVector::new(values).expect("finite");
        store.insert(&r.codepoint, v).expect("dimension matches");
    }
    store
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub trials: u64,
    pub top1_combined: f64,
    pub top1_tree_only: f64,
    pub top1_stroke_only: f64,
    pub exact_match_rate: f64,
    pub mean_distance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top1_translate: Option<f64>,
    pub config: PerturbationConfig,
    pub params: MetricParams,
    pub noise_model: String,
}

struct Candidate {
    tree: PreparedTree,
    key: String,
}

struct Outcome {
    exact: bool,
    correct: [bool; 3],
    distance: f64,
    translated: Option<bool>,
}

const KINDS: [DistanceKind; 3] = [DistanceKind::Combined, DistanceKind::TreeOnly, DistanceKind::StrokeOnly];

struct Harness<'a> {
    lex: &'a Lexicon,
    cfg: &'a PerturbationConfig,
    params: MetricParams,
    candidates: Vec<Candidate>,
    features: Option<(FeatureStore, f32)>,
}

impl Harness<'_> {
    fn trial(&self, t: u64) -> Result<Outcome, SimError> {
        let mut rng = trial_rng(self.cfg.seed, t, STREAM_SAMPLE);
        let record = &self.lex.records()[rng.gen_range(0..self.lex.len())];
        let truth = record.tree.serialize();
        let query = perturb(&record.tree, self.cfg, t);
        let key = query.serialize();

        let (exact, picks, distance) = if self.lex.bucket(&key).is_some() {
            (true, [&key; 3], 0.0)
        } else {
            let q = PreparedTree::new(&query, self.params.alpha);
            let mut best: [Option<(f64, &String)>; 3] = [None; 3];
            for cand in &self.candidates {
                let tree = q.weighted_edit_distance(&cand.tree);
                let stroke = q.stroke_distance(&cand.tree);
                for (slot, kind) in best.iter_mut().zip(KINDS) {
                    let d = kind.score(tree, stroke, self.params.beta);
                    if slot.map_or(true, |(b, _)| d < b - TOLERANCE) {
                        *slot = Some((d, &cand.key));
                    }
                }
            }
            let [c, tr, st] = best.map(|b| b.expect("non-empty lexicon"));
            (false, [c.1, tr.1, st.1], c.0)
        };

        let translated = match &self.features {
            None => None,
            Some((store, noise)) => {
                let support = &store.support(&record.codepoint).expect("feature per character")[0];
                let values = support.values().iter().map(|v| v + noise * rng.gen_range(-1.0f32..1.0)).collect();
                let feature = FeatureVector::new(values).map_err(SimError::Translate)?;
                let (cp, _) = translate(&query, self.lex, self.params, Some(&feature), Some(store))?;
                Some(cp == record.codepoint)
            }
        };
        Ok(Outcome { exact, correct: picks.map(|p| *p == truth), distance, translated })
    }

    fn run(&self, trials: u64) -> Result<EvalReport, SimError> {
        let outcomes: Vec<Outcome> = (0..trials)
            .into_par_iter()
            .map(|t| self.trial(t))
            .collect::<Result<_, _>>()?;
        let n = trials as f64;
        let rate = |f: &dyn Fn(&Outcome) -> bool| outcomes.iter().filter(|o| f(o)).count() as f64 / n;
        let distance_sum: f64 = outcomes.iter().map(|o| o.distance).sum();
        Ok(EvalReport {
            trials,
            top1_combined: rate(&|o| o.correct[0]),
            top1_tree_only: rate(&|o| o.correct[1]),
            top1_stroke_only: rate(&|o| o.correct[2]),
            exact_match_rate: rate(&|o| o.exact),
            mean_distance: distance_sum / n,
            top1_translate: self.features.as_ref().map(|_| rate(&|o| o.translated == Some(true))),
            config: *self.cfg,
            params: self.params,
            noise_model: "synthetic".to_owned(),
        })
    }
}

fn harness<'a>(
    lex: &'a Lexicon,
    cfg: &'a PerturbationConfig,
    trials: u64,
    params: MetricParams,
) -> Result<Harness<'a>, SimError> {
    if lex.is_empty() {
        return Err(SimError::EmptyLexicon);
    }
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    cfg.validate()?;
    let candidates = lex
        .distinct_trees()
        .map(|(tree, _)| Candidate { tree: PreparedTree::new(tree, params.alpha), key: tree.serialize() })
        .collect();
    Ok(Harness { lex, cfg, params, candidates, features: None })
}

/// Samples a character per trial, corrupts it and scores top-1 tree recovery
/// under the combined metric, the tree term alone (`beta = 0`) and the
/// stroke term alone. Trials run on the rayon pool; the report does not
/// depend on the thread count.
pub fn evaluate(
    lex: &Lexicon,
    cfg: &PerturbationConfig,
    trials: u64,
    params: MetricParams,
) -> Result<EvalReport, SimError> {
    harness(lex, cfg, trials, params)?.run(trials)
}

/// Like [`evaluate`], additionally translating each query to a codepoint with
/// synthetic support features; the query feature is the true character's
/// support vector plus uniform noise of amplitude `noise`.
pub fn evaluate_end_to_end(
    lex: &Lexicon,
    cfg: &PerturbationConfig,
    trials: u64,
    params: MetricParams,
    feature_dim: usize,
    noise: f32,
) -> Result<EvalReport, SimError> {
    let mut h = harness(lex, cfg, trials, params)?;
    h.features = Some((synthetic_features(lex, feature_dim.max(1), cfg.seed), noise));
    h.run(trials)
}
