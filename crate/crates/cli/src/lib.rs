//! `rsst` command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors. Errors go
//! to stderr as `error[<code>]: <message>`.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use rsst::labelgen::{labels_jsonl, LabelMode};
use rsst::lexicon::{self, confusable_character_count, confusable_set, confusable_set_stroke_level, Lexicon};
use rsst::metric::{self, edit_distance};
use rsst::simulate::{self, evaluate, evaluate_end_to_end, PerturbationConfig};
use rsst::translator::{self, FeatureStore, FeatureVector, RectifyResult};
use rsst::{parse_tree_expr_with, MetricParams, Rsst, StrokeAlphabet};

#[derive(Debug, Parser)]
#[command(name = "rsst", version, about = "Radical-structured stroke tree tools")]
pub struct Cli {
    #[command(flatten)]
    pub config: CliConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CliConfig {
    /// Level attenuation of the tree distance.
    #[arg(long, global = true, default_value_t = 0.5)]
    pub alpha: f64,
    /// Weight of the stroke distance in the combined metric.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub beta: f64,
    /// Lexicon file (`<codepoint>\t<tree>` per line).
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    /// Support feature file, binary or JSON.
    #[arg(long = "features", global = true)]
    pub feature_path: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Stroke alphabet size.
    #[arg(long = "alphabet-size", global = true, default_value_t = 5)]
    pub alphabet_size: u8,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate and canonicalize a lexicon.
    Build {
        /// Write the canonical lexicon here and print statistics to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distances between two tree expressions.
    Dist { a: String, b: String },
    /// Rectify a predicted tree against the lexicon.
    Rectify { expr: String },
    /// Rectify and pick a character, using features when ambiguous.
    Translate {
        expr: String,
        /// Query feature as comma separated values.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        query: Option<Vec<f32>>,
    },
    /// Characters sharing a representation.
    Confusables {
        #[arg(long)]
        stroke_level: bool,
    },
    /// Zero-shot train/test split.
    Split {
        #[command(subcommand)]
        kind: SplitKind,
    },
    /// Decoder supervision labels as JSON lines.
    Labels {
        #[arg(long, conflicts_with = "explicit")]
        implicit: bool,
        #[arg(long)]
        explicit: bool,
    },
    /// Score rectification on perturbed lexicon trees.
    Eval {
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0.0)]
        p_sub: f64,
        #[arg(long, default_value_t = 0.0)]
        p_del: f64,
        #[arg(long, default_value_t = 0.0)]
        p_ins: f64,
        #[arg(long, default_value_t = 0.0)]
        p_struct: f64,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Also translate with synthetic features of this dimension.
        #[arg(long)]
        feature_dim: Option<usize>,
    },
    /// Generate a synthetic lexicon.
    Synth {
        #[arg(long, default_value_t = 500)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        max_depth: u32,
    },
}

#[derive(Debug, Subcommand)]
pub enum SplitKind {
    /// First `m` classes train, last `n_last` test.
    Char {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n_last: usize,
        /// Class order, one codepoint per line (default: lexicon order).
        #[arg(long)]
        alphabet: Option<PathBuf>,
    },
    /// Characters with a radical used at most `n` times are held out.
    Radical {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
    pub exit: i32,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: "usage", message: message.into(), exit: 1 }
    }

    fn data(code: &'static str, message: impl ToString) -> Self {
        Self { code, message: message.to_string(), exit: 2 }
    }
}

/// `dist` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistReport {
    pub ed_concat: usize,
    pub d_tree: f64,
    pub d_stroke: usize,
    pub d_combined: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// `build` statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildStats {
    pub records: usize,
    pub distinct_trees: usize,
    pub confusable_groups: usize,
    pub confusable_characters: usize,
    pub stroke_confusable_groups: usize,
    pub stroke_confusable_characters: usize,
}

/// `rectify` output; mirrors the library result with the tree serialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectifyOutput {
    pub rectified: String,
    pub distance: f64,
    pub candidates: Vec<String>,
    pub exact_match: bool,
}

impl From<&RectifyResult> for RectifyOutput {
    fn from(r: &RectifyResult) -> Self {
        Self {
            rectified: r.rectified.serialize(),
            distance: r.distance,
            candidates: r.candidates.clone(),
            exact_match: r.exact_match,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateOutput {
    pub codepoint: String,
    pub rectify: RectifyOutput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusablesOutput {
    pub level: String,
    pub groups: Vec<Vec<String>>,
    pub characters: usize,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {}", e.code, e.message);
            e.exit
        }
    }
}

fn params(cfg: &CliConfig) -> Result<MetricParams, CliError> {
    MetricParams::new(cfg.alpha, cfg.beta).map_err(|e| CliError::usage(e.to_string()))
}

fn alphabet(cfg: &CliConfig) -> Result<StrokeAlphabet, CliError> {
    StrokeAlphabet::new(cfg.alphabet_size).ok_or_else(|| CliError::usage("--alphabet-size must be positive"))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::data("io", format!("{}: {e}", path.display())))
}

fn load_lexicon(cfg: &CliConfig) -> Result<Lexicon, CliError> {
    let path = cfg.lexicon.as_deref().ok_or_else(|| CliError::usage("--lexicon is required"))?;
    Lexicon::parse_with(&read(path)?, alphabet(cfg)?).map_err(|e| CliError::data("lexicon", e))
}

fn tree(cfg: &CliConfig, expr: &str) -> Result<Rsst, CliError> {
    parse_tree_expr_with(expr, alphabet(cfg)?).map_err(|e| CliError::data("parse", e))
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output types serialize") + "\n"
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::data("io", e))
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let cfg = &cli.config;
    let format = |default| cfg.format.unwrap_or(default);
    match &cli.command {
        Command::Build { out: target } => {
            let lex = load_lexicon(cfg)?;
            let tree_groups = confusable_set(&lex);
            let stroke_groups = confusable_set_stroke_level(&lex);
            let stats = BuildStats {
                records: lex.len(),
                distinct_trees: lex.bucket_count(),
                confusable_groups: tree_groups.len(),
                confusable_characters: confusable_character_count(&tree_groups),
                stroke_confusable_groups: stroke_groups.len(),
                stroke_confusable_characters: confusable_character_count(&stroke_groups),
            };
            let stats_text = match format(Format::Text) {
                Format::Json => json(&stats),
                Format::Text => format!(
                    "records\t{}\ndistinct_trees\t{}\nconfusable_groups\t{}\nconfusable_characters\t{}\n\
                     stroke_confusable_groups\t{}\nstroke_confusable_characters\t{}\n",
                    stats.records,
                    stats.distinct_trees,
                    stats.confusable_groups,
                    stats.confusable_characters,
                    stats.stroke_confusable_groups,
                    stats.stroke_confusable_characters
                ),
            };
            match target {
                Some(path) => {
                    fs::write(path, lex.to_text()).map_err(|e| CliError::data("io", e))?;
                    emit(out, &stats_text)
                }
                None => {
                    let _ = err.write_all(stats_text.as_bytes());
                    emit(out, &lex.to_text())
                }
            }
        }
        Command::Dist { a, b } => {
            let p = params(cfg)?;
            let (a, b) = (tree(cfg, a)?, tree(cfg, b)?);
            let d_stroke = metric::stroke_distance(&a, &b);
            let report = DistReport {
                ed_concat: edit_distance(&a.leaf_stroke_concat(), &b.leaf_stroke_concat()),
                d_tree: metric::weighted_edit_distance(&a, &b, p),
                d_stroke,
                d_combined: metric::combined_distance(&a, &b, p),
                alpha: p.alpha,
                beta: p.beta,
            };
            match format(Format::Text) {
                Format::Json => emit(out, &json(&report)),
                Format::Text => emit(
                    out,
                    &format!(
                        "ed_concat\t{}\nd_tree\t{}\nd_stroke\t{}\nd_combined\t{}\n",
                        report.ed_concat, report.d_tree, report.d_stroke, report.d_combined
                    ),
                ),
            }
        }
        Command::Rectify { expr } => {
            let p = params(cfg)?;
            let lex = load_lexicon(cfg)?;
            let res = translator::rectify(&tree(cfg, expr)?, &lex, p).map_err(|e| CliError::data("translate", e))?;
            let o = RectifyOutput::from(&res);
            match format(Format::Json) {
                Format::Json => emit(out, &json(&o)),
                Format::Text => emit(
                    out,
                    &format!(
                        "rectified\t{}\ndistance\t{}\ncandidates\t{}\nexact_match\t{}\n",
                        o.rectified,
                        o.distance,
                        o.candidates.join(" "),
                        o.exact_match
                    ),
                ),
            }
        }
        Command::Translate { expr, query } => {
            let p = params(cfg)?;
            let lex = load_lexicon(cfg)?;
            let store = match &cfg.feature_path {
                Some(path) => {
                    let bytes = fs::read(path).map_err(|e| CliError::data("io", format!("{}: {e}", path.display())))?;
                    Some(FeatureStore::from_bytes(&bytes).map_err(|e| CliError::data("features", e))?)
                }
                None => None,
            };
            let query = match query {
                Some(values) => Some(FeatureVector::new(values.clone()).map_err(|e| CliError::usage(e.to_string()))?),
                None => None,
            };
            let (codepoint, res) = translator::translate(&tree(cfg, expr)?, &lex, p, query.as_ref(), store.as_ref())
                .map_err(|e| CliError::data("translate", e))?;
            match format(Format::Text) {
                Format::Json => emit(out, &json(&TranslateOutput { codepoint, rectify: RectifyOutput::from(&res) })),
                Format::Text => emit(out, &format!("{codepoint}\n")),
            }
        }
        Command::Confusables { stroke_level } => {
            let lex = load_lexicon(cfg)?;
            let groups = if *stroke_level { confusable_set_stroke_level(&lex) } else { confusable_set(&lex) };
            let o = ConfusablesOutput {
                level: if *stroke_level { "stroke" } else { "tree" }.to_owned(),
                characters: confusable_character_count(&groups),
                groups,
            };
            match format(Format::Text) {
                Format::Json => emit(out, &json(&o)),
                Format::Text => {
                    let mut s = String::new();
                    for g in &o.groups {
                        let _ = writeln!(s, "{}", g.join("\t"));
                    }
                    let _ = writeln!(err, "{} groups, {} characters", o.groups.len(), o.characters);
                    emit(out, &s)
                }
            }
        }
        Command::Split { kind } => {
            let lex = load_lexicon(cfg)?;
            let split = match kind {
                SplitKind::Char { m, n_last, alphabet } => {
                    let order: Vec<String> = match alphabet {
                        Some(path) => read(path)?
                            .lines()
                            .map(str::trim)
                            .filter(|l| !l.is_empty() && !l.starts_with('#'))
                            .map(str::to_owned)
                            .collect(),
                        None => lex.records().iter().map(|r| r.codepoint.clone()).collect(),
                    };
                    lexicon::char_zero_shot_split(&lex, &order, *m, *n_last)
                }
                SplitKind::Radical { n } => lexicon::radical_zero_shot_split(&lex, *n),
            }
            .map_err(|e| CliError::data("split", e))?;
            match format(Format::Text) {
                Format::Json => emit(out, &json(&serde_json::json!({ "train": split.train, "test": split.test }))),
                Format::Text => emit(out, &split.to_text()),
            }
        }
        Command::Labels { explicit, .. } => {
            let lex = load_lexicon(cfg)?;
            let mode = if *explicit { LabelMode::Explicit } else { LabelMode::Implicit };
            let text = labels_jsonl(&lex, mode).map_err(|e| CliError::data("labels", e))?;
            emit(out, &text)
        }
        Command::Eval { trials, p_sub, p_del, p_ins, p_struct, threads, feature_dim } => {
            let p = params(cfg)?;
            let lex = load_lexicon(cfg)?;
            let pc = PerturbationConfig {
                p_sub: *p_sub,
                p_del: *p_del,
                p_ins: *p_ins,
                p_struct: *p_struct,
                seed: cfg.seed.unwrap_or(42),
                alphabet: cfg.alphabet_size,
            };
            pc.validate().map_err(|e| CliError::usage(e.to_string()))?;
            let job = || match feature_dim {
                Some(dim) => evaluate_end_to_end(&lex, &pc, *trials, p, *dim, 0.05),
                None => evaluate(&lex, &pc, *trials, p),
            };
            let report = match threads {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(*n)
                    .build()
                    .map_err(|e| CliError::usage(e.to_string()))?
                    .install(job),
                None => job(),
            }
            .map_err(|e| CliError::data("eval", e))?;
            match format(Format::Json) {
                Format::Json => emit(out, &json(&report)),
                Format::Text => emit(
                    out,
                    &format!(
                        "noise_model\tsynthetic\ntrials\t{}\ntop1_combined\t{}\ntop1_tree_only\t{}\n\
                         top1_stroke_only\t{}\nexact_match_rate\t{}\nmean_distance\t{}\n",
                        report.trials,
                        report.top1_combined,
                        report.top1_tree_only,
                        report.top1_stroke_only,
                        report.exact_match_rate,
                        report.mean_distance
                    ),
                ),
            }
        }
        Command::Synth { count, max_depth } => {
            if *count == 0 {
                return Err(CliError::usage("--count must be positive"));
            }
            let lex = simulate::synth_lexicon(*count, cfg.seed.unwrap_or(42), *max_depth, alphabet(cfg)?);
            emit(out, &lex.to_text())
        }
    }
}
