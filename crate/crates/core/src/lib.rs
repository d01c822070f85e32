//! Radical-structured stroke trees (RSST) for Chinese character recognition.
//!
//! A character is a tree whose internal nodes are ideographic structure
//! operators and whose leaves are radicals carrying stroke sequences. This
//! crate parses and serializes such trees, measures distances between them,
//! rectifies noisy predicted trees against a lexicon, builds the supervision
//! labels used to train tree decoders, and simulates corrupted predictions to
//! compare distance variants.
//!
//! ```
//! use rsst::{metric, parse_tree_expr, MetricParams};
//!
//! let a = parse_tree_expr("⿰ a:1 b:2").unwrap();
//! let b = parse_tree_expr("⿱ a:1 b:2").unwrap();
//! let p = MetricParams::default();
//! assert_eq!(metric::weighted_edit_distance(&a, &b, p), 1.0);
//! assert_eq!(metric::stroke_distance(&a, &b), 0);
//! ```

pub mod labelgen;
pub mod lexicon;
pub mod metric;
pub mod simulate;
pub mod translator;
pub mod tree;

pub use lexicon::{Lexicon, LexiconError};
pub use metric::MetricParams;
pub use tree::{parse_tree_expr, parse_tree_expr_with, ParseError, Rsst, RsstNode, StrokeAlphabet, StrokeSymbol, StructureOp};
