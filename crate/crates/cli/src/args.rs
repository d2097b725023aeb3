use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};

use crate::config::PipelineConfig;

#[derive(Debug, Parser)]
#[command(
    name = "docspan",
    version,
    about = "Document-level translation pipeline tools"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Upper bound on concurrent backend connections.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub separator: Option<String>,
    /// Corpus format: blank-line or docid-tsv.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Where to write the run manifest (defaults next to the outputs).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build context-augmented training sequences.
    Augment(AugmentArgs),
    /// Dump the window plan of a document corpus as JSON lines.
    Plan(PlanArgs),
    /// Translate documents with overlapping or non-overlapping windows.
    TranslateDoc(TranslateDocArgs),
    /// Translate documents with positional contexts and a validity cascade.
    TranslatePos(TranslatePosArgs),
    /// Remove phrase repetitions and convert quotes in a line stream.
    Postprocess(PostprocessArgs),
    /// Find lexical-consistency divergences between two systems.
    Consistency(ConsistencyArgs),
    /// Serve the mock translator over TCP or standard input/output.
    ServeMock(ServeMockArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Augment(_) => "augment",
            Self::Plan(_) => "plan",
            Self::TranslateDoc(_) => "translate-doc",
            Self::TranslatePos(_) => "translate-pos",
            Self::Postprocess(_) => "postprocess",
            Self::Consistency(_) => "consistency",
            Self::ServeMock(_) => "serve-mock",
        }
    }
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// Authentic source corpus.
    #[arg(long)]
    pub src: Option<PathBuf>,
    /// Authentic target corpus.
    #[arg(long)]
    pub tgt: Option<PathBuf>,
    #[arg(long)]
    pub synthetic_src: Option<PathBuf>,
    #[arg(long)]
    pub synthetic_tgt: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Character budget per sequence.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub upsample: Option<usize>,
    /// Drop sequences longer than this many units.
    #[arg(long)]
    pub max_units: Option<usize>,
    /// chars or est-subwords.
    #[arg(long)]
    pub unit_mode: Option<String>,
    /// source or max.
    #[arg(long)]
    pub budget_side: Option<String>,
    /// Also write per-sentence occurrence counts (occurrences.jsonl).
    #[arg(long)]
    pub report: bool,
}

#[derive(Debug, Args, Default)]
pub struct WindowArgs {
    /// windows or nonoverlap.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub pre: Option<usize>,
    #[arg(long)]
    pub main: Option<usize>,
    #[arg(long)]
    pub total: Option<usize>,
    /// Character limit for non-overlapping windows.
    #[arg(long)]
    pub limit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub windows: WindowArgs,
}

#[derive(Debug, Args, Default)]
pub struct PostprocessFlags {
    /// Collapse runaway phrase repetitions.
    #[arg(long)]
    pub repetitions: bool,
    /// Convert straight double quotes to typographic ones.
    #[arg(long)]
    pub quotes: bool,
    /// Copies kept when a run is collapsed.
    #[arg(long)]
    pub keep_runs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TranslateDocArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub windows: WindowArgs,
    /// Backend spec: mock:<spec>, tcp:<host>:<port> or cmd:<program> [args].
    #[arg(long)]
    pub backend: Option<String>,
    /// Write the sentences that took the single-sentence path as JSON lines.
    #[arg(long)]
    pub backup_log: Option<PathBuf>,
    #[command(flatten)]
    pub post: PostprocessFlags,
}

#[derive(Debug, Args)]
pub struct TranslatePosArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Comma-separated label preference, e.g. "2/3,1/3,2/2,1/2,1/1".
    #[arg(long)]
    pub cascade: Option<String>,
    #[arg(long)]
    pub max_repeats: Option<usize>,
    #[arg(long)]
    pub max_wordlen: Option<usize>,
    #[arg(long)]
    pub backend: Option<String>,
    /// Per-label backend, LABEL=SPEC (repeatable).
    #[arg(long, value_name = "LABEL=SPEC")]
    pub backend_for: Vec<String>,
    /// Per-label usage statistics as JSON lines.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Chosen label per sentence as JSON lines.
    #[arg(long)]
    pub choices: Option<PathBuf>,
    #[command(flatten)]
    pub post: PostprocessFlags,
}

#[derive(Debug, Args)]
pub struct PostprocessArgs {
    /// Input lines; `-` for standard input.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output lines; `-` for standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub post: PostprocessFlags,
    /// Restart quote pairing after every separator token.
    #[arg(long)]
    pub per_segment: bool,
}

#[derive(Debug, Args)]
pub struct ConsistencyArgs {
    #[arg(long)]
    pub source_tokens: Option<PathBuf>,
    #[arg(long)]
    pub source_lemmas: Option<PathBuf>,
    /// Document ranges: doc_id<TAB>start<TAB>end per line.
    #[arg(long)]
    pub docs: Option<PathBuf>,
    #[arg(long)]
    pub a_tokens: Option<PathBuf>,
    #[arg(long)]
    pub a_lemmas: Option<PathBuf>,
    /// Source-to-target Pharaoh alignments of system A.
    #[arg(long)]
    pub a_fwd: Option<PathBuf>,
    /// Target-to-source Pharaoh alignments of system A.
    #[arg(long)]
    pub a_rev: Option<PathBuf>,
    #[arg(long)]
    pub b_tokens: Option<PathBuf>,
    #[arg(long)]
    pub b_lemmas: Option<PathBuf>,
    #[arg(long)]
    pub b_fwd: Option<PathBuf>,
    #[arg(long)]
    pub b_rev: Option<PathBuf>,
    #[arg(long)]
    pub name_a: Option<String>,
    #[arg(long)]
    pub name_b: Option<String>,
    /// Source lemmata to ignore, one per line.
    #[arg(long)]
    pub stoplist: Option<PathBuf>,
    #[arg(long)]
    pub skip_punctuation: bool,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeMockArgs {
    /// TCP address to listen on, e.g. 127.0.0.1:7001.
    #[arg(long, conflicts_with = "stdio")]
    pub listen: Option<String>,
    /// Serve a single session on standard input/output.
    #[arg(long)]
    pub stdio: bool,
    /// Mock spec, e.g. identity or word-reverse?fault=drop-separator&every=50.
    #[arg(long, default_value = "identity")]
    pub mock: String,
}

fn set<T: Clone>(slot: &mut T, value: &Option<T>) {
    if let Some(v) = value {
        *slot = v.clone();
    }
}

impl GlobalArgs {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        set(&mut cfg.seed, &self.seed);
        set(&mut cfg.workers, &self.workers);
        set(&mut cfg.separator, &self.separator);
        set(&mut cfg.format, &self.format);
    }
}

impl WindowArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        let w = &mut cfg.windows;
        set(&mut w.mode, &self.mode);
        set(&mut w.pre, &self.pre);
        set(&mut w.main, &self.main);
        set(&mut w.total, &self.total);
        set(&mut w.limit, &self.limit);
    }
}

impl PostprocessFlags {
    fn apply(&self, cfg: &mut PipelineConfig) {
        let p = &mut cfg.postprocess;
        p.repetitions |= self.repetitions;
        p.quotes |= self.quotes;
        set(&mut p.keep_runs, &self.keep_runs);
    }
}

impl Command {
    /// Folds subcommand flags into the configuration.
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        match self {
            Self::Augment(a) => {
                let s = &mut cfg.augment;
                set(&mut s.budget, &a.budget);
                set(&mut s.upsample, &a.upsample);
                if a.max_units.is_some() {
                    s.max_units = a.max_units;
                }
                set(&mut s.unit_mode, &a.unit_mode);
                set(&mut s.budget_side, &a.budget_side);
            }
            Self::Plan(a) => a.windows.apply(cfg),
            Self::TranslateDoc(a) => {
                a.windows.apply(cfg);
                set(&mut cfg.backend.default, &a.backend);
                a.post.apply(cfg);
            }
            Self::TranslatePos(a) => {
                let p = &mut cfg.positional;
                set(&mut p.cascade, &a.cascade);
                set(&mut p.max_repeats, &a.max_repeats);
                set(&mut p.max_wordlen, &a.max_wordlen);
                set(&mut cfg.backend.default, &a.backend);
                for entry in &a.backend_for {
                    let (label, spec) = entry.split_once('=').unwrap_or((entry, ""));
                    cfg.backend
                        .per_label
                        .insert(label.to_string(), spec.to_string());
                }
                a.post.apply(cfg);
            }
            Self::Postprocess(a) => {
                a.post.apply(cfg);
                cfg.postprocess.per_segment |= a.per_segment;
            }
            Self::Consistency(a) => {
                let c = &mut cfg.consistency;
                c.skip_punctuation |= a.skip_punctuation;
                set(&mut c.name_a, &a.name_a);
                set(&mut c.name_b, &a.name_b);
            }
            Self::ServeMock(_) => {}
        }
    }
}
