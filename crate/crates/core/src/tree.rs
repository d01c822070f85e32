//! Radical-structured stroke trees.
//!
//! Internal nodes are ideographic structure operators, leaves are radicals
//! carrying a non-empty stroke sequence. Trees are written in a whitespace
//! separated prefix form:
//!
//! ```text
//! ⿰ a:12 ⿱ b:3 c:45
//! ```
//!
//! Leaves are `radicalId:strokes`; the id may be empty. Strokes are single
//! digits, or comma separated codes (`r:1,12,25`) for alphabets larger than 9.

use std::fmt;

use thiserror::Error;

/// Default number of basic stroke categories.
pub const DEFAULT_ALPHABET: u8 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at token {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("operator {op} expects {expected} children, found {found}")]
    Arity { op: StructureOp, expected: usize, found: usize },
    #[error("leaf at token {position} has no strokes")]
    EmptyLeaf { position: usize },
    #[error("stroke code {code} outside alphabet 1..={alphabet}")]
    Alphabet { code: u32, alphabet: u8 },
}

/// The stroke alphabet size `K`. Stroke codes run from 1 to `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StrokeAlphabet(u8);

impl StrokeAlphabet {
    pub fn new(size: u8) -> Option<Self> {
        (size > 0).then_some(Self(size))
    }

    pub fn size(self) -> u8 {
        self.0
    }

    pub fn symbols(self) -> impl Iterator<Item = StrokeSymbol> {
        (1..=self.0).map(StrokeSymbol)
    }

    pub fn symbol(self, code: u32) -> Result<StrokeSymbol, ParseError> {
        if code >= 1 && code <= u32::from(self.0) {
            Ok(StrokeSymbol(code as u8))
        } else {
            Err(ParseError::Alphabet { code, alphabet: self.0 })
        }
    }
}

impl Default for StrokeAlphabet {
    fn default() -> Self {
        Self(DEFAULT_ALPHABET)
    }
}

/// One stroke. Codes 1..=5 of the default alphabet are horizontal, vertical,
/// left-falling, right-falling and turning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StrokeSymbol(u8);

impl StrokeSymbol {
    pub fn new(code: u8, alphabet: StrokeAlphabet) -> Result<Self, ParseError> {
        alphabet.symbol(u32::from(code))
    }

    pub fn code(self) -> u8 {
        self.0
    }
}

/// Convenience for tests and fixtures: builds symbols without an alphabet check.
/// Panics on code 0.
pub fn strokes(codes: &[u8]) -> Vec<StrokeSymbol> {
    codes
        .iter()
        .map(|&c| {
            assert!(c > 0, "stroke code 0");
            StrokeSymbol(c)
        })
        .collect()
}

/// The twelve ideographic description operators, U+2FF0..=U+2FFB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StructureOp {
    LeftRight,
    AboveBelow,
    LeftMiddleRight,
    AboveMiddleBelow,
    FullSurround,
    SurroundFromAbove,
    SurroundFromBelow,
    SurroundFromLeft,
    SurroundFromUpperLeft,
    SurroundFromUpperRight,
    SurroundFromLowerLeft,
    Overlaid,
}

impl StructureOp {
    pub const ALL: [StructureOp; 12] = [
        StructureOp::LeftRight,
        StructureOp::AboveBelow,
        StructureOp::LeftMiddleRight,
        StructureOp::AboveMiddleBelow,
        StructureOp::FullSurround,
        StructureOp::SurroundFromAbove,
        StructureOp::SurroundFromBelow,
        StructureOp::SurroundFromLeft,
        StructureOp::SurroundFromUpperLeft,
        StructureOp::SurroundFromUpperRight,
        StructureOp::SurroundFromLowerLeft,
        StructureOp::Overlaid,
    ];

    pub fn arity(self) -> usize {
        match self {
            StructureOp::LeftMiddleRight | StructureOp::AboveMiddleBelow => 3,
            _ => 2,
        }
    }

    pub fn symbol(self) -> char {
        char::from_u32(0x2FF0 + self as u32).expect("IDC range")
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        let code = c as u32;
        (0x2FF0..=0x2FFB)
            .contains(&code)
            .then(|| Self::ALL[(code - 0x2FF0) as usize])
    }

    /// Operators other than `self` with the same arity.
    pub fn same_arity_alternatives(self) -> impl Iterator<Item = StructureOp> {
        let arity = self.arity();
        Self::ALL
            .into_iter()
            .filter(move |op| *op != self && op.arity() == arity)
    }
}

impl fmt::Display for StructureOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RsstNode {
    Internal { op: StructureOp, children: Vec<RsstNode> },
    Leaf { radical_id: Option<String>, strokes: Vec<StrokeSymbol> },
}

impl RsstNode {
    pub fn leaf(radical_id: &str, strokes: Vec<StrokeSymbol>) -> Self {
        RsstNode::Leaf {
            radical_id: (!radical_id.is_empty()).then(|| radical_id.to_owned()),
            strokes,
        }
    }

    pub fn internal(op: StructureOp, children: Vec<RsstNode>) -> Self {
        RsstNode::Internal { op, children }
    }

    fn validate(&self) -> Result<(), ParseError> {
        match self {
            RsstNode::Internal { op, children } => {
                if children.len() != op.arity() {
                    return Err(ParseError::Arity {
                        op: *op,
                        expected: op.arity(),
                        found: children.len(),
                    });
                }
                children.iter().try_for_each(RsstNode::validate)
            }
            RsstNode::Leaf { strokes, .. } if strokes.is_empty() => {
                Err(ParseError::EmptyLeaf { position: 0 })
            }
            RsstNode::Leaf { .. } => Ok(()),
        }
    }

    /// Equal ignoring radical ids.
    pub fn same_shape(&self, other: &RsstNode) -> bool {
        match (self, other) {
            (
                RsstNode::Internal { op: a, children: ca },
                RsstNode::Internal { op: b, children: cb },
            ) => a == b && ca.len() == cb.len() && ca.iter().zip(cb).all(|(x, y)| x.same_shape(y)),
            (RsstNode::Leaf { strokes: a, .. }, RsstNode::Leaf { strokes: b, .. }) => a == b,
            _ => false,
        }
    }
}

/// A validated radical-structured stroke tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rsst {
    root: RsstNode,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Token<'a> {
    Structure(StructureOp),
    LeafStrokes(&'a [StrokeSymbol]),
}

/// One element of the depth-first linearization.
#[derive(Debug, Clone, PartialEq)]
pub struct DfsElement<'a> {
    pub token: Token<'a>,
    pub level: u32,
    pub weight: f64,
}

impl DfsElement<'_> {
    /// Normalization length: stroke count for leaves, 1 for operators.
    pub fn len(&self) -> usize {
        match self.token {
            Token::Structure(_) => 1,
            Token::LeafStrokes(s) => s.len(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.token, Token::LeafStrokes(_))
    }
}

impl Rsst {
    pub fn new(root: RsstNode) -> Result<Self, ParseError> {
        root.validate()?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &RsstNode {
        &self.root
    }

    pub fn into_root(self) -> RsstNode {
        self.root
    }

    pub fn same_shape(&self, other: &Rsst) -> bool {
        self.root.same_shape(&other.root)
    }

    /// Pre-order element sequence; element weights are `alpha^level` with the
    /// root at level 0.
    pub fn dfs_elements(&self, alpha: f64) -> Vec<DfsElement<'_>> {
        let mut out = Vec::new();
        self.visit(|node, level| {
            let token = match node {
                RsstNode::Internal { op, .. } => Token::Structure(*op),
                RsstNode::Leaf { strokes, .. } => Token::LeafStrokes(strokes),
            };
            out.push(DfsElement { token, level, weight: alpha.powi(level as i32) });
        });
        out
    }

    /// Pre-order walk with node depth.
    pub fn visit<'a>(&'a self, mut f: impl FnMut(&'a RsstNode, u32)) {
        let mut stack = vec![(&self.root, 0u32)];
        while let Some((node, level)) = stack.pop() {
            f(node, level);
            if let RsstNode::Internal { children, .. } = node {
                stack.extend(children.iter().rev().map(|c| (c, level + 1)));
            }
        }
    }

    pub fn leaves(&self) -> Vec<&RsstNode> {
        let mut out = Vec::new();
        self.visit(|node, _| {
            if matches!(node, RsstNode::Leaf { .. }) {
                out.push(node);
            }
        });
        out
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().len()
    }

    pub fn element_count(&self) -> usize {
        let mut n = 0;
        self.visit(|_, _| n += 1);
        n
    }

    /// All leaf stroke sequences concatenated in DFS order.
    pub fn leaf_stroke_concat(&self) -> Vec<StrokeSymbol> {
        concat_strokes(&self.root)
    }

    /// Canonical text form with radical ids dropped.
    pub fn serialize(&self) -> String {
        self.serialize_with(false)
    }

    pub fn serialize_with(&self, include_radical_ids: bool) -> String {
        let mut out = String::new();
        self.visit(|node, _| {
            if !out.is_empty() {
                out.push(' ');
            }
            match node {
                RsstNode::Internal { op, .. } => out.push(op.symbol()),
                RsstNode::Leaf { radical_id, strokes } => {
                    if include_radical_ids {
                        if let Some(id) = radical_id {
                            out.push_str(id);
                        }
                    }
                    out.push(':');
                    write_strokes(&mut out, strokes);
                }
            }
        });
        out
    }
}

impl fmt::Display for Rsst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize_with(true))
    }
}

pub(crate) fn concat_strokes(node: &RsstNode) -> Vec<StrokeSymbol> {
    fn go(node: &RsstNode, out: &mut Vec<StrokeSymbol>) {
        match node {
            RsstNode::Internal { children, .. } => children.iter().for_each(|c| go(c, out)),
            RsstNode::Leaf { strokes, .. } => out.extend_from_slice(strokes),
        }
    }
    let mut out = Vec::new();
    go(node, &mut out);
    out
}

fn write_strokes(out: &mut String, strokes: &[StrokeSymbol]) {
    use std::fmt::Write;
    if strokes.iter().all(|s| s.0 <= 9) {
        strokes.iter().for_each(|s| out.push(char::from(b'0' + s.0)));
    } else {
        for (i, s) in strokes.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", s.0);
        }
    }
}

/// Parses a prefix tree expression over the default five-stroke alphabet.
pub fn parse_tree_expr(text: &str) -> Result<Rsst, ParseError> {
    parse_tree_expr_with(text, StrokeAlphabet::default())
}

pub fn parse_tree_expr_with(text: &str, alphabet: StrokeAlphabet) -> Result<Rsst, ParseError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let mut pos = 0;
    let root = parse_node(&tokens, &mut pos, alphabet)?;
    if pos != tokens.len() {
        return Err(ParseError::Syntax {
            position: pos,
            message: format!("trailing input starting at {:?}", tokens[pos]),
        });
    }
    Ok(Rsst { root })
}

fn parse_node(tokens: &[&str], pos: &mut usize, alphabet: StrokeAlphabet) -> Result<RsstNode, ParseError> {
    let Some(&token) = tokens.get(*pos) else {
        return Err(ParseError::Syntax { position: *pos, message: "unexpected end of input".into() });
    };
    let at = *pos;
    *pos += 1;

    let mut chars = token.chars();
    if let (Some(c), None) = (chars.next(), chars.next()) {
        if let Some(op) = StructureOp::from_symbol(c) {
            let mut children = Vec::with_capacity(op.arity());
            for _ in 0..op.arity() {
                if *pos >= tokens.len() {
                    return Err(ParseError::Arity { op, expected: op.arity(), found: children.len() });
                }
                children.push(parse_node(tokens, pos, alphabet)?);
            }
            return Ok(RsstNode::Internal { op, children });
        }
    }

    let Some((id, stroke_text)) = token.rsplit_once(':') else {
        return Err(ParseError::Syntax {
            position: at,
            message: format!("expected structure operator or leaf, found {token:?}"),
        });
    };
    if id.chars().any(|c| StructureOp::from_symbol(c).is_some()) {
        return Err(ParseError::Syntax {
            position: at,
            message: format!("structure operator inside radical id {id:?}"),
        });
    }
    if stroke_text.is_empty() {
        return Err(ParseError::EmptyLeaf { position: at });
    }
    let strokes = parse_strokes(stroke_text, at, alphabet)?;
    Ok(RsstNode::leaf(id, strokes))
}

fn parse_strokes(text: &str, at: usize, alphabet: StrokeAlphabet) -> Result<Vec<StrokeSymbol>, ParseError> {
    let bad = |message: String| ParseError::Syntax { position: at, message };
    if text.contains(',') {
        text.split(',')
            .map(|part| {
                let code: u32 = part.parse().map_err(|_| bad(format!("invalid stroke code {part:?}")))?;
                alphabet.symbol(code)
            })
            .collect()
    } else {
        text.chars()
            .map(|c| {
                let code = c.to_digit(10).ok_or_else(|| bad(format!("invalid stroke digit {c:?}")))?;
                alphabet.symbol(code)
            })
            .collect()
    }
}
