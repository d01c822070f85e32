//! Supervision targets for the radical and stroke decoders.

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::lexicon::{Lexicon, LexiconError};
use crate::tree::{concat_strokes, Rsst, RsstNode, StrokeSymbol, StructureOp};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RadicalToken {
    Structure(StructureOp),
    /// 1-based position of the leaf among all leaves in DFS order.
    RadicalRef { order: usize },
    ExplicitRadical { radical_id: String },
}

impl Serialize for RadicalToken {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            RadicalToken::Structure(op) => s.collect_str(op),
            RadicalToken::RadicalRef { order } => s.serialize_u64(*order as u64),
            RadicalToken::ExplicitRadical { radical_id } => s.serialize_str(radical_id),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelMode {
    #[default]
    Implicit,
    Explicit,
}

/// DFS token stream of structures and radicals. Implicit mode replaces each
/// radical by its order of appearance.
pub fn radical_sequence(tree: &Rsst, mode: LabelMode) -> Result<Vec<RadicalToken>, LexiconError> {
    let mut out = Vec::new();
    let mut order = 0;
    let mut missing = false;
    tree.visit(|node, _| match node {
        RsstNode::Internal { op, .. } => out.push(RadicalToken::Structure(*op)),
        RsstNode::Leaf { radical_id, .. } => {
            order += 1;
            match (mode, radical_id) {
                (LabelMode::Implicit, _) => out.push(RadicalToken::RadicalRef { order }),
                (LabelMode::Explicit, Some(id)) => {
                    out.push(RadicalToken::ExplicitRadical { radical_id: id.clone() })
                }
                (LabelMode::Explicit, None) => missing = true,
            }
        }
    });
    if missing {
        return Err(LexiconError::MissingRadicalId(tree.serialize()));
    }
    Ok(out)
}

/// Per-element stroke targets, one list per DFS element: a structure gets
/// every stroke of its subtree, a radical its own strokes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrokeTargetSequence {
    pub per_step: Vec<Vec<StrokeSymbol>>,
}

pub fn stroke_targets(tree: &Rsst) -> StrokeTargetSequence {
    let mut per_step = Vec::new();
    tree.visit(|node, _| per_step.push(concat_strokes(node)));
    StrokeTargetSequence { per_step }
}

/// Teacher-forcing pair: the decoder input is shifted right behind `bos`,
/// the target ends with `eos`.
pub fn shifted_pair<T: Clone>(tokens: &[T], bos: T, eos: T) -> (Vec<T>, Vec<T>) {
    let mut input = Vec::with_capacity(tokens.len() + 1);
    input.push(bos);
    input.extend_from_slice(tokens);
    let mut target = tokens.to_vec();
    target.push(eos);
    (input, target)
}

/// One JSON-lines record of the label export.
#[derive(Debug, Clone)]
pub struct LabelRecord {
    pub codepoint: String,
    pub radical_tokens: Vec<RadicalToken>,
    pub stroke_targets: StrokeTargetSequence,
}

impl Serialize for LabelRecord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let targets: Vec<Vec<u8>> = self
            .stroke_targets
            .per_step
            .iter()
            .map(|step| step.iter().map(|x| x.code()).collect())
            .collect();
        let mut st = s.serialize_struct("LabelRecord", 3)?;
        st.serialize_field("codepoint", &self.codepoint)?;
        st.serialize_field("radical_tokens", &self.radical_tokens)?;
        st.serialize_field("stroke_targets", &targets)?;
        st.end()
    }
}

pub fn label_records(lex: &Lexicon, mode: LabelMode) -> Result<Vec<LabelRecord>, LexiconError> {
    lex.records()
        .iter()
        .map(|r| {
            let radical_tokens = radical_sequence(&r.tree, mode)
                .map_err(|_| LexiconError::MissingRadicalId(r.codepoint.clone()))?;
            Ok(LabelRecord {
                codepoint: r.codepoint.clone(),
                radical_tokens,
                stroke_targets: stroke_targets(&r.tree),
            })
        })
        .collect()
}

pub fn labels_jsonl(lex: &Lexicon, mode: LabelMode) -> Result<String, LexiconError> {
    let mut out = String::new();
    for rec in label_records(lex, mode)? {
        out.push_str(&serde_json::to_string(&rec).expect("label records serialize"));
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{parse_tree_expr, strokes};

    use RadicalToken::*;

    fn t(s: &str) -> Rsst {
        parse_tree_expr(s).unwrap()
    }

    #[test]
    fn implicit_and_explicit_sequences() {
        let tree = t("⿰ a:1 ⿱ b:2 c:3");
        assert_eq!(
            radical_sequence(&tree, LabelMode::Implicit).unwrap(),
            vec![
                Structure(StructureOp::LeftRight),
                RadicalRef { order: 1 },
                Structure(StructureOp::AboveBelow),
                RadicalRef { order: 2 },
                RadicalRef { order: 3 },
            ]
        );
        assert_eq!(radical_sequence(&t("a:1"), LabelMode::Implicit).unwrap(), vec![RadicalRef { order: 1 }]);
        let explicit = radical_sequence(&tree, LabelMode::Explicit).unwrap();
        let ids: Vec<String> = explicit
            .iter()
            .map(|x| serde_json::to_value(x).unwrap().as_str().unwrap().to_owned())
            .collect();
        assert_eq!(ids, vec!["⿰", "a", "⿱", "b", "c"]);
        assert!(radical_sequence(&t("⿰ a:1 :2"), LabelMode::Explicit).is_err());
        assert!(radical_sequence(&t("⿰ a:1 :2"), LabelMode::Implicit).is_ok());
    }

    #[test]
    fn stroke_target_rules() {
        assert_eq!(stroke_targets(&t("a:12")).per_step, vec![strokes(&[1, 2])]);
        assert_eq!(
            stroke_targets(&t("⿰ a:1 b:2")).per_step,
            vec![strokes(&[1, 2]), strokes(&[1]), strokes(&[2])]
        );
        assert_eq!(
            stroke_targets(&t("⿰ a:5 ⿱ b:4 c:3")).per_step,
            vec![strokes(&[5, 4, 3]), strokes(&[5]), strokes(&[4, 3]), strokes(&[4]), strokes(&[3])]
        );
    }

    #[test]
    fn shifted_pairs() {
        assert_eq!(shifted_pair::<i32>(&[], -1, -2), (vec![-1], vec![-2]));
        assert_eq!(shifted_pair(&[7], -1, -2), (vec![-1, 7], vec![7, -2]));
    }

    #[test]
    fn jsonl_export() {
        let lex = Lexicon::parse("丹\t⿰ a:1 ⿱ b:2 c:34\n").unwrap();
        let line = labels_jsonl(&lex, LabelMode::Implicit).unwrap();
        assert_eq!(
            line,
            "{\"codepoint\":\"丹\",\"radical_tokens\":[\"⿰\",1,\"⿱\",2,3],\
             \"stroke_targets\":[[1,2,3,4],[1],[2,3,4],[2],[3,4]]}\n"
        );
        let explicit = labels_jsonl(&lex, LabelMode::Explicit).unwrap();
        assert!(explicit.contains("\"radical_tokens\":[\"⿰\",\"a\",\"⿱\",\"b\",\"c\"]"));
    }
}
