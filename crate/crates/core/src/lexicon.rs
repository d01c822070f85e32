//! The tree lexicon, confusable groups and zero-shot splits.
//!
//! Lexicon files are UTF-8, one `<codepoint>\t<tree-expression>` record per
//! line. Blank lines and lines starting with `#` are skipped.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write;

use indexmap::IndexMap;
use thiserror::Error;

use crate::tree::{parse_tree_expr_with, ParseError, Rsst, RsstNode, StrokeAlphabet, StrokeSymbol};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LexiconError {
    #[error("line {line}: {source}")]
    Parse { line: usize, source: ParseError },
    #[error("line {line}: expected `<codepoint>\\t<tree>`")]
    Format { line: usize },
    #[error("duplicate codepoint {0}")]
    DuplicateCodepoint(String),
    #[error("train size {m} plus test size {n_last} exceeds alphabet of {alphabet}")]
    Overlap { m: usize, n_last: usize, alphabet: usize },
    #[error("split sizes must be positive")]
    EmptySplit,
    #[error("codepoint {0} is not in the lexicon")]
    UnknownCodepoint(String),
    #[error("character {0} has a leaf without a radical id")]
    MissingRadicalId(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexiconRecord {
    pub codepoint: String,
    pub tree: Rsst,
}

/// Characters with their canonical trees, in input order, indexed by the
/// id-free serialization of each tree.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    records: Vec<LexiconRecord>,
    index: IndexMap<String, Vec<usize>>,
    by_codepoint: HashMap<String, usize>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: impl IntoIterator<Item = LexiconRecord>) -> Result<Self, LexiconError> {
        let mut lex = Self::new();
        for r in records {
            lex.push(r)?;
        }
        Ok(lex)
    }

    pub fn push(&mut self, record: LexiconRecord) -> Result<(), LexiconError> {
        if self.by_codepoint.contains_key(&record.codepoint) {
            return Err(LexiconError::DuplicateCodepoint(record.codepoint));
        }
        let idx = self.records.len();
        self.by_codepoint.insert(record.codepoint.clone(), idx);
        self.index.entry(record.tree.serialize()).or_default().push(idx);
        self.records.push(record);
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        Self::parse_with(text, StrokeAlphabet::default())
    }

    pub fn parse_with(text: &str, alphabet: StrokeAlphabet) -> Result<Self, LexiconError> {
        let mut lex = Self::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (codepoint, expr) = raw.split_once('\t').ok_or(LexiconError::Format { line })?;
            let codepoint = codepoint.trim();
            if codepoint.is_empty() {
                return Err(LexiconError::Format { line });
            }
            let tree = parse_tree_expr_with(expr, alphabet).map_err(|source| LexiconError::Parse { line, source })?;
            lex.push(LexiconRecord { codepoint: codepoint.to_owned(), tree })?;
        }
        Ok(lex)
    }

    /// Canonical file form, radical ids included.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let _ = writeln!(out, "{}\t{}", r.codepoint, r.tree.serialize_with(true));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[LexiconRecord] {
        &self.records
    }

    pub fn get(&self, codepoint: &str) -> Option<&LexiconRecord> {
        self.by_codepoint.get(codepoint).map(|&i| &self.records[i])
    }

    pub fn position(&self, codepoint: &str) -> Option<usize> {
        self.by_codepoint.get(codepoint).copied()
    }

    /// Codepoints whose tree serializes to `key`.
    pub fn bucket(&self, key: &str) -> Option<Vec<&str>> {
        self.index.get(key).map(|ids| self.codepoints(ids))
    }

    pub fn bucket_count(&self) -> usize {
        self.index.len()
    }

    /// Distinct trees in first-occurrence order, with their codepoints.
    pub fn distinct_trees(&self) -> impl Iterator<Item = (&Rsst, Vec<&str>)> + '_ {
        self.index
            .values()
            .map(|ids| (&self.records[ids[0]].tree, self.codepoints(ids)))
    }

    fn codepoints(&self, ids: &[usize]) -> Vec<&str> {
        ids.iter().map(|&i| self.records[i].codepoint.as_str()).collect()
    }
}

pub type ConfusableGroups = Vec<Vec<String>>;

/// Groups of two or more characters sharing a tree (radical ids ignored).
pub fn confusable_set(lex: &Lexicon) -> ConfusableGroups {
    lex.index
        .values()
        .filter(|ids| ids.len() >= 2)
        .map(|ids| lex.codepoints(ids).into_iter().map(str::to_owned).collect())
        .collect()
}

/// Groups of two or more characters sharing the concatenated stroke sequence.
pub fn confusable_set_stroke_level(lex: &Lexicon) -> ConfusableGroups {
    let mut groups: IndexMap<Vec<StrokeSymbol>, Vec<String>> = IndexMap::new();
    for r in &lex.records {
        groups.entry(r.tree.leaf_stroke_concat()).or_default().push(r.codepoint.clone());
    }
    groups.into_values().filter(|g| g.len() >= 2).collect()
}

pub fn confusable_character_count(groups: &ConfusableGroups) -> usize {
    groups.iter().map(Vec::len).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitSpec {
    CharZeroShot { m: usize, n_last: usize },
    RadicalZeroShot { n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Split {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

impl Split {
    /// `<codepoint>\t<train|test>` lines, train first.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.train {
            let _ = writeln!(out, "{c}\ttrain");
        }
        for c in &self.test {
            let _ = writeln!(out, "{c}\ttest");
        }
        out
    }
}

/// Train on the first `m` classes of `alphabet`, test on the last `n_last`.
pub fn char_zero_shot_split(
    lex: &Lexicon,
    alphabet: &[String],
    m: usize,
    n_last: usize,
) -> Result<Split, LexiconError> {
    if m == 0 || n_last == 0 {
        return Err(LexiconError::EmptySplit);
    }
    if m + n_last > alphabet.len() {
        return Err(LexiconError::Overlap { m, n_last, alphabet: alphabet.len() });
    }
    if let Some(missing) = alphabet.iter().find(|c| lex.get(c).is_none()) {
        return Err(LexiconError::UnknownCodepoint(missing.clone()));
    }
    Ok(Split {
        train: alphabet[..m].to_vec(),
        test: alphabet[alphabet.len() - n_last..].to_vec(),
    })
}

fn radical_ids<'a>(record: &'a LexiconRecord) -> Result<Vec<&'a str>, LexiconError> {
    record
        .tree
        .leaves()
        .into_iter()
        .map(|leaf| match leaf {
            RsstNode::Leaf { radical_id: Some(id), .. } => Ok(id.as_str()),
            _ => Err(LexiconError::MissingRadicalId(record.codepoint.clone())),
        })
        .collect()
}

/// Number of characters containing each radical (a character counts once).
pub fn radical_frequency(lex: &Lexicon) -> Result<BTreeMap<String, usize>, LexiconError> {
    let mut freq = BTreeMap::new();
    for r in &lex.records {
        let distinct: HashSet<&str> = radical_ids(r)?.into_iter().collect();
        for id in distinct {
            *freq.entry(id.to_owned()).or_insert(0) += 1;
        }
    }
    Ok(freq)
}

/// A character is held out for testing iff one of its radicals occurs in at
/// most `n` characters.
pub fn radical_zero_shot_split(lex: &Lexicon, n: usize) -> Result<Split, LexiconError> {
    let freq = radical_frequency(lex)?;
    let mut split = Split::default();
    for r in &lex.records {
        let rare = radical_ids(r)?.into_iter().any(|id| freq[id] <= n);
        let side = if rare { &mut split.test } else { &mut split.train };
        side.push(r.codepoint.clone());
    }
    Ok(split)
}

pub fn split(lex: &Lexicon, alphabet: &[String], spec: SplitSpec) -> Result<Split, LexiconError> {
    match spec {
        SplitSpec::CharZeroShot { m, n_last } => char_zero_shot_split(lex, alphabet, m, n_last),
        SplitSpec::RadicalZeroShot { n } => radical_zero_shot_split(lex, n),
    }
}
