//! Distances between stroke trees.
//!
//! `D_tree` is a weighted edit distance over the depth-first element
//! sequences of two trees. Element `k` levels below the root weighs
//! `alpha^k`. Deleting or inserting an element costs its weight; substituting
//! element `i` of the prediction by element `j` of the candidate costs
//! `ED(i, j) * w'_j / Len(j)`, where leaves compare as stroke sequences and
//! operators as single symbols. Operators and strokes never match each other.
//!
//! `D_stroke` is the plain edit distance of the concatenated leaf strokes and
//! the combined metric is `D_tree + beta * D_stroke`.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::{Rsst, StrokeSymbol, StructureOp, Token};

/// Distances below this are treated as equal when ranking candidates.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self { alpha: 0.5, beta: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("alpha must lie in (0, 1], got {0}")]
    Alpha(f64),
    #[error("beta must be finite and non-negative, got {0}")]
    Beta(f64),
    #[error("oracle limited to {limit} combined elements, got {found}")]
    SizeLimit { limit: usize, found: usize },
}

impl MetricParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, MetricError> {
        let p = Self { alpha, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(MetricError::Alpha(self.alpha));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(MetricError::Beta(self.beta));
        }
        Ok(())
    }
}

/// Levenshtein distance with unit costs.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    const STACK: usize = 64;
    if b.len() < STACK {
        let mut row = [0usize; STACK];
        levenshtein_rows(a, b, &mut row[..=b.len()])
    } else {
        let mut row = vec![0usize; b.len() + 1];
        levenshtein_rows(a, b, &mut row)
    }
}

fn levenshtein_rows<T: PartialEq>(a: &[T], b: &[T], row: &mut [usize]) -> usize {
    for (j, cell) in row.iter_mut().enumerate() {
        *cell = j;
    }
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag } else { 1 + diag.min(up).min(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Elem {
    Op(StructureOp),
    Leaf { start: u32, end: u32 },
}

/// A tree flattened once for repeated distance queries: DFS elements with
/// weights, and the leaf strokes concatenated in DFS order.
#[derive(Debug, Clone)]
pub struct PreparedTree {
    elems: Vec<Elem>,
    weights: Vec<f64>,
    strokes: Vec<StrokeSymbol>,
}

impl PreparedTree {
    pub fn new(tree: &Rsst, alpha: f64) -> Self {
        let dfs = tree.dfs_elements(alpha);
        let mut elems = Vec::with_capacity(dfs.len());
        let mut weights = Vec::with_capacity(dfs.len());
        let mut strokes = Vec::new();
        for e in dfs {
            weights.push(e.weight);
            elems.push(match e.token {
                Token::Structure(op) => Elem::Op(op),
                Token::LeafStrokes(s) => {
                    let start = strokes.len() as u32;
                    strokes.extend_from_slice(s);
                    Elem::Leaf { start, end: strokes.len() as u32 }
                }
            });
        }
        Self { elems, weights, strokes }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn stroke_concat(&self) -> &[StrokeSymbol] {
        &self.strokes
    }

    fn leaf(&self, r: Range<u32>) -> &[StrokeSymbol] {
        &self.strokes[r.start as usize..r.end as usize]
    }

    fn elem_len(&self, j: usize) -> usize {
        match self.elems[j] {
            Elem::Op(_) => 1,
            Elem::Leaf { start, end } => (end - start) as usize,
        }
    }

    /// Substitution cost of element `i` of `self` by element `j` of `other`.
    fn substitution(&self, i: usize, other: &PreparedTree, j: usize) -> f64 {
        let ed = match (self.elems[i], other.elems[j]) {
            (Elem::Op(a), Elem::Op(b)) => usize::from(a != b),
            (Elem::Leaf { start: s1, end: e1 }, Elem::Leaf { start: s2, end: e2 }) => {
                edit_distance(self.leaf(s1..e1), other.leaf(s2..e2))
            }
            (Elem::Op(_), Elem::Leaf { start, end }) | (Elem::Leaf { start, end }, Elem::Op(_)) => {
                ((end - start) as usize).max(1)
            }
        };
        if ed == 0 {
            0.0
        } else {
            ed as f64 * other.weights[j] / other.elem_len(j) as f64
        }
    }

    pub fn weighted_edit_distance(&self, other: &PreparedTree) -> f64 {
        let mut row: Vec<f64> = Vec::with_capacity(other.len() + 1);
        row.push(0.0);
        for j in 0..other.len() {
            row.push(row[j] + other.weights[j]);
        }
        for i in 0..self.len() {
            let mut diag = row[0];
            row[0] += self.weights[i];
            for j in 0..other.len() {
                let up = row[j + 1];
                let delete = up + self.weights[i];
                let insert = row[j] + other.weights[j];
                let substitute = diag + self.substitution(i, other, j);
                row[j + 1] = delete.min(insert).min(substitute);
                diag = up;
            }
        }
        row[other.len()]
    }

    pub fn stroke_distance(&self, other: &PreparedTree) -> usize {
        edit_distance(&self.strokes, &other.strokes)
    }
}

/// Full dynamic-programming table of the weighted edit distance, row-major
/// with `rows = Len(M) + 1` and `cols = Len(M') + 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WedTable {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<f64>,
}

impl WedTable {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.cols + j]
    }

    pub fn distance(&self) -> f64 {
        self.cells[self.cells.len() - 1]
    }
}

pub fn wed_table(m: &Rsst, m_prime: &Rsst, params: MetricParams) -> WedTable {
    let a = PreparedTree::new(m, params.alpha);
    let b = PreparedTree::new(m_prime, params.alpha);
    let (rows, cols) = (a.len() + 1, b.len() + 1);
    let mut cells = vec![0.0; rows * cols];
    for i in 1..rows {
        cells[i * cols] = cells[(i - 1) * cols] + a.weights[i - 1];
    }
    for j in 1..cols {
        cells[j] = cells[j - 1] + b.weights[j - 1];
    }
    for i in 1..rows {
        for j in 1..cols {
            let delete = cells[(i - 1) * cols + j] + a.weights[i - 1];
            let insert = cells[i * cols + j - 1] + b.weights[j - 1];
            let substitute = cells[(i - 1) * cols + j - 1] + a.substitution(i - 1, &b, j - 1);
            cells[i * cols + j] = delete.min(insert).min(substitute);
        }
    }
    WedTable { rows, cols, cells }
}

/// `D_tree`: weighted edit distance from prediction `m` to candidate `m_prime`.
/// Not symmetric: substitution is normalized by the candidate element.
pub fn weighted_edit_distance(m: &Rsst, m_prime: &Rsst, params: MetricParams) -> f64 {
    PreparedTree::new(m, params.alpha).weighted_edit_distance(&PreparedTree::new(m_prime, params.alpha))
}

/// `D_stroke`: edit distance between the concatenated leaf strokes.
pub fn stroke_distance(m: &Rsst, m_prime: &Rsst) -> usize {
    edit_distance(&m.leaf_stroke_concat(), &m_prime.leaf_stroke_concat())
}

/// `D' = D_tree + beta * D_stroke`.
pub fn combined_distance(m: &Rsst, m_prime: &Rsst, params: MetricParams) -> f64 {
    let a = PreparedTree::new(m, params.alpha);
    let b = PreparedTree::new(m_prime, params.alpha);
    combine(a.weighted_edit_distance(&b), a.stroke_distance(&b), params.beta)
}

pub(crate) fn combine(tree: f64, stroke: usize, beta: f64) -> f64 {
    if beta == 0.0 {
        tree
    } else {
        tree + beta * stroke as f64
    }
}

pub use oracle::{brute_force_wed, ORACLE_LIMIT};

mod oracle {
    //! Exhaustive reference for the weighted edit distance. Enumerates every
    //! edit script over the two element sequences and sums its cost; shares
    //! no code with the dynamic program.

    use super::MetricError;
    use crate::metric::MetricParams;
    use crate::tree::{Rsst, StrokeSymbol, Token};

    pub const ORACLE_LIMIT: usize = 14;

    #[derive(Clone, PartialEq)]
    enum Sym {
        Op(char),
        Stroke(u8),
    }

    struct Item {
        syms: Vec<Sym>,
        weight: f64,
    }

    fn items(tree: &Rsst, alpha: f64) -> Vec<Item> {
        tree.dfs_elements(alpha)
            .into_iter()
            .map(|e| Item {
                syms: match e.token {
                    Token::Structure(op) => vec![Sym::Op(op.symbol())],
                    Token::LeafStrokes(s) => s.iter().map(|x: &StrokeSymbol| Sym::Stroke(x.code())).collect(),
                },
                weight: e.weight,
            })
            .collect()
    }

    fn levenshtein(a: &[Sym], b: &[Sym]) -> usize {
        let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in t.iter_mut().enumerate() {
            row[0] = i;
        }
        for j in 0..=b.len() {
            t[0][j] = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let sub = t[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
                t[i][j] = sub.min(t[i - 1][j] + 1).min(t[i][j - 1] + 1);
            }
        }
        t[a.len()][b.len()]
    }

    #[derive(Clone, Copy)]
    enum Edit {
        Delete,
        Insert,
        Substitute,
    }

    fn script_cost(script: &[Edit], a: &[Item], b: &[Item]) -> f64 {
        let (mut i, mut j, mut cost) = (0, 0, 0.0);
        for edit in script {
            match edit {
                Edit::Delete => {
                    cost += a[i].weight;
                    i += 1;
                }
                Edit::Insert => {
                    cost += b[j].weight;
                    j += 1;
                }
                Edit::Substitute => {
                    let ed = levenshtein(&a[i].syms, &b[j].syms) as f64;
                    cost += ed * b[j].weight / b[j].syms.len() as f64;
                    i += 1;
                    j += 1;
                }
            }
        }
        cost
    }

    fn enumerate(i: usize, j: usize, a: &[Item], b: &[Item], script: &mut Vec<Edit>, best: &mut f64) {
        if i == a.len() && j == b.len() {
            *best = best.min(script_cost(script, a, b));
            return;
        }
        if i < a.len() {
            script.push(Edit::Delete);
            enumerate(i + 1, j, a, b, script, best);
            script.pop();
        }
        if j < b.len() {
            script.push(Edit::Insert);
            enumerate(i, j + 1, a, b, script, best);
            script.pop();
        }
        if i < a.len() && j < b.len() {
            script.push(Edit::Substitute);
            enumerate(i + 1, j + 1, a, b, script, best);
            script.pop();
        }
    }

    /// Minimum cost over all edit scripts. Exponential; refuses inputs with
    /// more than [`ORACLE_LIMIT`] elements in total.
    pub fn brute_force_wed(m: &Rsst, m_prime: &Rsst, params: MetricParams) -> Result<f64, MetricError> {
        let a = items(m, params.alpha);
        let b = items(m_prime, params.alpha);
        let found = a.len() + b.len();
        if found > ORACLE_LIMIT {
            return Err(MetricError::SizeLimit { limit: ORACLE_LIMIT, found });
        }
        let mut best = f64::INFINITY;
        enumerate(0, 0, &a, &b, &mut Vec::new(), &mut best);
        Ok(best)
    }
}
