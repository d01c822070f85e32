use serde::Serialize;

use rsst::metric::{self, wed_table, WedTable};
use rsst::simulate::{perturb, synth_lexicon, PerturbationConfig};
use rsst::translator::rectify;
use rsst::tree::Token;
use rsst::{parse_tree_expr, Lexicon, MetricParams, Rsst, StrokeAlphabet};

#[derive(Serialize)]
struct Element {
    token: String,
    level: u32,
    weight: f64,
    leaf: bool,
}

#[derive(Serialize)]
struct DistanceView {
    elements_a: Vec<Element>,
    elements_b: Vec<Element>,
    table: WedTable,
    d_tree: f64,
    d_stroke: usize,
    d_combined: f64,
}

#[derive(Serialize)]
struct Ranked {
    tree: String,
    codepoints: Vec<String>,
    d_tree: f64,
    d_stroke: usize,
    d_combined: f64,
}

#[derive(Serialize)]
struct RectifyView {
    rectified: String,
    distance: f64,
    exact_match: bool,
    candidates: Vec<String>,
    ranking: Vec<Ranked>,
}

fn parse(expr: &str) -> Result<Rsst, String> {
    parse_tree_expr(expr).map_err(|e| e.to_string())
}

fn params(alpha: f64, beta: f64) -> Result<MetricParams, String> {
    MetricParams::new(alpha, beta).map_err(|e| e.to_string())
}

fn elements(tree: &Rsst, alpha: f64) -> Vec<Element> {
    tree.dfs_elements(alpha)
        .into_iter()
        .map(|e| Element {
            token: match e.token {
                Token::Structure(op) => op.to_string(),
                Token::LeafStrokes(s) => s.iter().map(|x| char::from(b'0' + x.code())).collect(),
            },
            level: e.level,
            weight: e.weight,
            leaf: matches!(e.token, Token::LeafStrokes(_)),
        })
        .collect()
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn distance_table(a: &str, b: &str, alpha: f64, beta: f64) -> Result<String, String> {
    let p = params(alpha, beta)?;
    let (ta, tb) = (parse(a)?, parse(b)?);
    let table = wed_table(&ta, &tb, p);
    let d_stroke = metric::stroke_distance(&ta, &tb);
    to_json(&DistanceView {
        elements_a: elements(&ta, alpha),
        elements_b: elements(&tb, alpha),
        d_tree: table.distance(),
        d_combined: metric::combined_distance(&ta, &tb, p),
        table,
        d_stroke,
    })
}

pub fn rectify_ranked(expr: &str, lexicon: &str, alpha: f64, beta: f64, top_k: usize) -> Result<String, String> {
    let p = params(alpha, beta)?;
    let query = parse(expr)?;
    let lex = Lexicon::parse(lexicon).map_err(|e| e.to_string())?;
    let res = rectify(&query, &lex, p).map_err(|e| e.to_string())?;
    let mut ranking: Vec<Ranked> = lex
        .distinct_trees()
        .map(|(tree, cps)| Ranked {
            tree: tree.serialize(),
            codepoints: cps.into_iter().map(str::to_owned).collect(),
            d_tree: metric::weighted_edit_distance(&query, tree, p),
            d_stroke: metric::stroke_distance(&query, tree),
            d_combined: metric::combined_distance(&query, tree, p),
        })
        .collect();
    ranking.sort_by(|x, y| x.d_combined.total_cmp(&y.d_combined));
    ranking.truncate(top_k.max(1));
    to_json(&RectifyView {
        rectified: res.rectified.serialize(),
        distance: res.distance,
        exact_match: res.exact_match,
        candidates: res.candidates,
        ranking,
    })
}

pub fn perturb_expr(
    expr: &str,
    p_sub: f64,
    p_del: f64,
    p_ins: f64,
    p_struct: f64,
    seed: u64,
    trial: u64,
) -> Result<String, String> {
    let cfg = PerturbationConfig { p_sub, p_del, p_ins, p_struct, seed, ..Default::default() };
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(perturb(&parse(expr)?, &cfg, trial).serialize_with(true))
}

pub fn sample_lexicon(count: usize, seed: u64) -> String {
    synth_lexicon(count.max(1), seed, 2, StrokeAlphabet::default()).to_text()
}
