use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use docspan_core::augment::{augment_corpus, upsampling_report};
use docspan_core::consistency::{
    analyze_system, check_token_counts, compare_systems, parse_doc_ranges, parse_lemma_lines,
    parse_pharaoh, parse_token_lines, render_review, MapOptions, ReviewTexts,
};
use docspan_core::corpus::{pair_documents, parse_document_corpus, serialize_document_corpus};
use docspan_core::schedule::{plan_nonoverlapping_windows, plan_records, plan_windows, run_plans};
use docspan_core::strategy::{run_document_positional, PositionalBackends, UsageStats};
use docspan_core::translate::{serve_mock, serve_stdio, BackendSpec, MockSpec, Session};
use docspan_core::{Document, Sentence, SeparatorToken};
use serde::Serialize;

use crate::args::{
    AugmentArgs, Cli, Command, ConsistencyArgs, PlanArgs, PostprocessArgs, ServeMockArgs,
    TranslateDocArgs, TranslatePosArgs,
};
use crate::config::{DecodeMode, PipelineConfig};
use crate::error::CliError;
use crate::manifest::{FileEntry, Manifest};
use crate::output::OutputSet;

const STDIO: &str = "-";

fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == STDIO
}

/// Inputs read, outputs staged and counts collected during one run.
struct Run {
    command: &'static str,
    cfg: PipelineConfig,
    manifest_path: Option<PathBuf>,
    inputs: Vec<FileEntry>,
    outputs: OutputSet,
    stdout: Option<String>,
    counts: BTreeMap<String, u64>,
}

impl Run {
    fn new(command: &'static str, cfg: PipelineConfig, manifest_path: Option<PathBuf>) -> Self {
        Self {
            command,
            cfg,
            manifest_path,
            inputs: Vec::new(),
            outputs: OutputSet::default(),
            stdout: None,
            counts: BTreeMap::new(),
        }
    }

    fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = if is_stdio(path) {
            let mut buf = Vec::new();
            std::io::stdin()
                .read_to_end(&mut buf)
                .map_err(|e| CliError::input(path, e))?;
            buf
        } else {
            std::fs::read(path).map_err(|e| CliError::input(path, e))?
        };
        self.inputs.push(FileEntry::describe(path, &bytes));
        String::from_utf8(bytes).map_err(|e| CliError::input(path, e))
    }

    fn write(&mut self, path: &Path, content: String) {
        if is_stdio(path) {
            self.stdout = Some(content);
        } else {
            self.outputs.add(path, content);
        }
    }

    fn count(&mut self, key: impl Into<String>, n: impl TryInto<u64>) {
        let n = n.try_into().unwrap_or(u64::MAX);
        self.counts.insert(key.into(), n);
    }

    fn finish(mut self) -> Result<(), CliError> {
        let outputs: Vec<FileEntry> = self
            .outputs
            .files()
            .map(|(p, b)| FileEntry::describe(p, b))
            .collect();
        if let Some(path) = self.manifest_path.take() {
            let manifest = Manifest {
                command: self.command.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed: self.cfg.seed,
                config_hash: self.cfg.hash(),
                config: self.cfg,
                inputs: self.inputs,
                outputs,
                counts: self.counts,
            };
            self.outputs.add(path, manifest.to_json());
        }
        self.outputs.commit()?;
        if let Some(text) = self.stdout {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|source| CliError::Output {
                    path: PathBuf::from(STDIO),
                    source,
                })?;
        }
        Ok(())
    }
}

fn sibling_manifest(output: &Path) -> Option<PathBuf> {
    if is_stdio(output) {
        return None;
    }
    let mut name = output.file_name()?.to_os_string();
    name.push(".manifest.json");
    Some(output.with_file_name(name))
}

fn json_lines<T: Serialize>(items: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(&item).expect("record serializes"));
        out.push('\n');
    }
    out
}

fn lines_to_string<S: AsRef<str>>(lines: &[S]) -> String {
    let mut out = String::new();
    for l in lines {
        out.push_str(l.as_ref());
        out.push('\n');
    }
    out
}

/// Parses a backend spec; mock backends inherit the pipeline separator
/// unless the spec sets one.
fn backend_session(spec: &str, cfg: &PipelineConfig) -> Result<Session, CliError> {
    let mut backend: BackendSpec = spec.parse()?;
    if let BackendSpec::Mock(mock) = &mut backend {
        if !spec.contains("sep=") {
            mock.separator = cfg.separator_token()?;
        }
    }
    Ok(Session::new(backend.connect(&cfg.client_options()?)))
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.global.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    cli.global.apply(&mut cfg);
    cli.command.apply(&mut cfg);
    let manifest = cli
        .global
        .manifest
        .clone()
        .or_else(|| cfg.paths.get("manifest").cloned());
    match &cli.command {
        Command::Augment(a) => augment(a, cfg, manifest),
        Command::Plan(a) => plan(a, cfg, manifest),
        Command::TranslateDoc(a) => translate_doc(a, cfg, manifest),
        Command::TranslatePos(a) => translate_pos(a, cfg, manifest),
        Command::Postprocess(a) => postprocess(a, cfg, manifest),
        Command::Consistency(a) => consistency(a, cfg, manifest),
        Command::ServeMock(a) => serve(a, &cfg),
    }
}

fn read_corpus(
    run: &mut Run,
    path: &Path,
    sep: &SeparatorToken,
) -> Result<Vec<Document>, CliError> {
    let format = run.cfg.corpus_format()?;
    let text = run.read(path)?;
    parse_document_corpus(&text, format, sep).map_err(|e| CliError::input(path, e))
}

fn augment(
    a: &AugmentArgs,
    cfg: PipelineConfig,
    manifest: Option<PathBuf>,
) -> Result<(), CliError> {
    let config = cfg.augment_config()?;
    let src = cfg.path(&a.src, "src")?;
    let tgt = cfg.path(&a.tgt, "tgt")?;
    let syn_src = cfg.optional_path(&a.synthetic_src, "synthetic_src");
    let syn_tgt = cfg.optional_path(&a.synthetic_tgt, "synthetic_tgt");
    let out_dir = cfg.path(&a.out_dir, "out_dir")?;
    if syn_src.is_some() != syn_tgt.is_some() {
        return Err(CliError::Config(
            "synthetic source and target must be given together".into(),
        ));
    }
    let mut run = Run::new(
        "augment",
        cfg,
        manifest.or_else(|| Some(out_dir.join("manifest.json"))),
    );
    let sep = &config.separator;

    let load_pair = |run: &mut Run, s: &Path, t: &Path| -> Result<_, CliError> {
        let sd = read_corpus(run, s, sep)?;
        let td = read_corpus(run, t, sep)?;
        pair_documents(sd, td)
            .map_err(|e| CliError::Input(format!("{} / {}: {e}", s.display(), t.display())))
    };
    let authentic = load_pair(&mut run, &src, &tgt)?;
    let synthetic = match (&syn_src, &syn_tgt) {
        (Some(s), Some(t)) => load_pair(&mut run, s, t)?,
        _ => Vec::new(),
    };

    let corpus = augment_corpus(&authentic, &synthetic, &config)
        .map_err(|e| CliError::Input(e.to_string()))?;
    run.count("documents.authentic", authentic.len());
    run.count("documents.synthetic", synthetic.len());
    for (name, c) in [
        ("authentic", corpus.authentic_counts),
        ("synthetic", corpus.synthetic_counts),
    ] {
        run.count(format!("sequences.{name}.enumerated"), c.enumerated);
        run.count(format!("sequences.{name}.after_filter"), c.after_filter);
        run.count(format!("sequences.{name}.emitted"), c.emitted);
    }
    run.write(
        &out_dir.join("authentic.src"),
        lines_to_string(&corpus.authentic.source),
    );
    run.write(
        &out_dir.join("authentic.tgt"),
        lines_to_string(&corpus.authentic.target),
    );
    run.write(
        &out_dir.join("synthetic.src"),
        lines_to_string(&corpus.synthetic.source),
    );
    run.write(
        &out_dir.join("synthetic.tgt"),
        lines_to_string(&corpus.synthetic.target),
    );
    if a.report {
        let report = upsampling_report(&authentic, config.char_budget);
        run.write(&out_dir.join("occurrences.jsonl"), json_lines(&report));
    }
    run.finish()
}

fn plan_document(
    doc: &Document,
    mode: DecodeMode,
    cfg: &PipelineConfig,
) -> Result<Vec<docspan_core::schedule::WindowPlan>, CliError> {
    Ok(match mode {
        DecodeMode::Windows => plan_windows(doc, &cfg.window_limits()?)?,
        DecodeMode::NonOverlap => plan_nonoverlapping_windows(doc, cfg.windows.limit)?,
    })
}

fn plan(a: &PlanArgs, cfg: PipelineConfig, manifest: Option<PathBuf>) -> Result<(), CliError> {
    let mode = cfg.decode_mode()?;
    cfg.window_limits()?;
    let sep = cfg.separator_token()?;
    let input = cfg.path(&a.input, "input")?;
    let output = cfg.path(&a.output, "output")?;
    let mut run = Run::new("plan", cfg, manifest.or_else(|| sibling_manifest(&output)));
    let docs = read_corpus(&mut run, &input, &sep)?;

    let mut records = Vec::new();
    let mut oversized = 0;
    for doc in &docs {
        let plans = plan_document(doc, mode, &run.cfg)?;
        oversized += plans.iter().filter(|p| p.oversized).count();
        records.extend(plan_records(doc, &plans));
    }
    run.count("documents", docs.len());
    run.count("sentences", docs.iter().map(Document::len).sum::<usize>());
    run.count("windows", records.len());
    run.count("oversized", oversized);
    run.write(&output, json_lines(&records));
    run.finish()
}

#[derive(Serialize)]
struct BackupEntry<'a> {
    doc_id: &'a str,
    index: usize,
}

fn translate_doc(
    a: &TranslateDocArgs,
    cfg: PipelineConfig,
    manifest: Option<PathBuf>,
) -> Result<(), CliError> {
    let mode = cfg.decode_mode()?;
    cfg.window_limits()?;
    let sep = cfg.separator_token()?;
    let post = cfg.postprocess_options()?;
    let format = cfg.corpus_format()?;
    let input = cfg.path(&a.input, "input")?;
    let output = cfg.path(&a.output, "output")?;
    let backup_log = cfg.optional_path(&a.backup_log, "backup_log");
    let session = backend_session(&cfg.backend.default, &cfg)?;
    let mut run = Run::new(
        "translate-doc",
        cfg,
        manifest.or_else(|| sibling_manifest(&output)),
    );
    let docs = read_corpus(&mut run, &input, &sep)?;

    let mut translated = Vec::with_capacity(docs.len());
    let (mut windows, mut backups, mut unpaired) = (0usize, 0usize, 0usize);
    let mut backup_entries = Vec::new();
    for doc in &docs {
        let plans = plan_document(doc, mode, &run.cfg)?;
        windows += plans.len();
        let stitched = run_plans(doc, &plans, &session, &sep)?;
        backups += stitched.backup_indices.len();
        backup_entries.extend(stitched.backup_indices.iter().map(|&index| BackupEntry {
            doc_id: &doc.doc_id,
            index,
        }));
        let mut sentences = Vec::with_capacity(stitched.sentences.len());
        for text in stitched.sentences {
            let (text, bad_quotes) = post.apply(&text);
            unpaired += usize::from(bad_quotes);
            sentences.push(Sentence::new(text).map_err(|e| CliError::Backend(e.to_string()))?);
        }
        translated.push(Document::new(doc.doc_id.clone(), sentences));
    }
    run.count("documents", docs.len());
    run.count("sentences", docs.iter().map(Document::len).sum::<usize>());
    run.count("windows", windows);
    run.count("backups", backups);
    run.count("requests", session.request_count());
    run.count("unpaired_quotes", unpaired);
    tracing::info!(backups, windows, "translation finished");
    run.write(&output, serialize_document_corpus(&translated, format));
    if let Some(path) = backup_log {
        let log = json_lines(&backup_entries);
        run.write(&path, log);
    }
    run.finish()
}

#[derive(Serialize)]
struct ChoiceEntry<'a> {
    doc_id: &'a str,
    index: usize,
    label: String,
}

fn translate_pos(
    a: &TranslatePosArgs,
    cfg: PipelineConfig,
    manifest: Option<PathBuf>,
) -> Result<(), CliError> {
    let sep = cfg.separator_token()?;
    let rules = cfg.validity_rules()?;
    let cascade = cfg.cascade()?;
    let post = cfg.postprocess_options()?;
    let format = cfg.corpus_format()?;
    let input = cfg.path(&a.input, "input")?;
    let output = cfg.path(&a.output, "output")?;
    let stats_path = cfg.optional_path(&a.stats, "stats");
    let choices_path = cfg.optional_path(&a.choices, "choices");
    let mut backends = PositionalBackends::single(backend_session(&cfg.backend.default, &cfg)?);
    cfg.label_backends()?;
    for (label, spec) in &cfg.backend.per_label {
        let label = label
            .parse()
            .map_err(|e| CliError::Config(format!("{e}")))?;
        backends = backends.with_label(label, backend_session(spec, &cfg)?);
    }
    let mut run = Run::new(
        "translate-pos",
        cfg,
        manifest.or_else(|| sibling_manifest(&output)),
    );
    let docs = read_corpus(&mut run, &input, &sep)?;

    let mut stats = UsageStats::default();
    let mut translated = Vec::with_capacity(docs.len());
    let mut choices = Vec::new();
    let mut unpaired = 0usize;
    for doc in &docs {
        let result = run_document_positional(doc, &backends, &rules, &cascade, &sep)?;
        stats.merge(&result.stats);
        choices.extend(
            result
                .chosen
                .iter()
                .enumerate()
                .map(|(index, label)| ChoiceEntry {
                    doc_id: &doc.doc_id,
                    index,
                    label: label.to_string(),
                }),
        );
        let mut sentences = Vec::with_capacity(result.sentences.len());
        for text in &result.sentences {
            let (text, bad_quotes) = post.apply(text);
            unpaired += usize::from(bad_quotes);
            sentences.push(Sentence::new(text).map_err(|e| CliError::Backend(e.to_string()))?);
        }
        translated.push(Document::new(doc.doc_id.clone(), sentences));
    }
    run.count("documents", docs.len());
    run.count("sentences", docs.iter().map(Document::len).sum::<usize>());
    run.count("requests", backends.request_count());
    run.count("candidates.validated", stats.total_validated());
    run.count("candidates.chosen", stats.total_chosen());
    for (label, usage) in &stats.per_label {
        run.count(format!("chosen.{label}"), usage.chosen);
    }
    run.count("unpaired_quotes", unpaired);
    eprint!("{}", stats.to_table());
    run.write(&output, serialize_document_corpus(&translated, format));
    if let Some(path) = stats_path {
        run.write(&path, stats.to_json_lines());
    }
    if let Some(path) = choices_path {
        let text = json_lines(&choices);
        run.write(&path, text);
    }
    run.finish()
}

fn postprocess(
    a: &PostprocessArgs,
    cfg: PipelineConfig,
    manifest: Option<PathBuf>,
) -> Result<(), CliError> {
    let options = cfg.postprocess_options()?;
    let sep = cfg.separator_token()?;
    let per_segment = cfg.postprocess.per_segment;
    let input = cfg
        .optional_path(&a.input, "input")
        .unwrap_or_else(|| PathBuf::from(STDIO));
    let output = cfg
        .optional_path(&a.output, "output")
        .unwrap_or_else(|| PathBuf::from(STDIO));
    if options.is_noop() {
        tracing::warn!("neither --repetitions nor --quotes given; copying input unchanged");
    }
    let mut run = Run::new(
        "postprocess",
        cfg,
        manifest.or_else(|| sibling_manifest(&output)),
    );
    let text = run.read(&input)?;

    let (mut lines, mut changed, mut unpaired) = (0usize, 0usize, 0usize);
    let mut out = String::with_capacity(text.len());
    for raw in text.lines() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let (result, bad_quotes) = options.apply_with(line, per_segment.then_some(&sep));
        unpaired += usize::from(bad_quotes);
        lines += 1;
        changed += usize::from(result != line);
        out.push_str(&result);
        out.push('\n');
    }
    run.count("lines", lines);
    run.count("changed_lines", changed);
    run.count("unpaired_quotes", unpaired);
    run.write(&output, out);
    run.finish()
}

fn consistency(
    a: &ConsistencyArgs,
    cfg: PipelineConfig,
    manifest: Option<PathBuf>,
) -> Result<(), CliError> {
    let src_tokens_path = cfg.path(&a.source_tokens, "source_tokens")?;
    let src_lemmas_path = cfg.path(&a.source_lemmas, "source_lemmas")?;
    let docs_path = cfg.path(&a.docs, "docs")?;
    let system_paths =
        |prefix: &str, flags: [&Option<PathBuf>; 4]| -> Result<[PathBuf; 4], CliError> {
            let keys = ["tokens", "lemmas", "fwd", "rev"];
            let mut out: [PathBuf; 4] = Default::default();
            for ((slot, flag), key) in out.iter_mut().zip(flags).zip(keys) {
                *slot = cfg.path(flag, &format!("{prefix}_{key}"))?;
            }
            Ok(out)
        };
    let paths_a = system_paths("a", [&a.a_tokens, &a.a_lemmas, &a.a_fwd, &a.a_rev])?;
    let paths_b = system_paths("b", [&a.b_tokens, &a.b_lemmas, &a.b_fwd, &a.b_rev])?;
    let stoplist_path = cfg.optional_path(&a.stoplist, "stoplist");
    let out_dir = cfg.path(&a.out_dir, "out_dir")?;
    let mut run = Run::new(
        "consistency",
        cfg,
        manifest.or_else(|| Some(out_dir.join("manifest.json"))),
    );

    let src_tokens = parse_token_lines(&run.read(&src_tokens_path)?);
    let src_lemmas = parse_lemma_lines(&run.read(&src_lemmas_path)?);
    check_token_counts("source", &src_tokens, &src_lemmas)
        .map_err(|e| CliError::input(&src_lemmas_path, e))?;
    let docs_text = run.read(&docs_path)?;
    let docs = parse_doc_ranges(&docs_text, src_tokens.len())
        .map_err(|e| CliError::input(&docs_path, e))?;
    let mut options = MapOptions {
        skip_punctuation: run.cfg.consistency.skip_punctuation,
        ..MapOptions::default()
    };
    if let Some(path) = &stoplist_path {
        let text = run.read(path)?;
        options = options.with_stoplist(text.lines().map(str::trim).filter(|l| !l.is_empty()));
    }

    let load_system = |run: &mut Run, [tokens_p, lemmas_p, fwd_p, rev_p]: &[PathBuf; 4]| {
        let tokens = parse_token_lines(&run.read(tokens_p)?);
        let lemmas = parse_lemma_lines(&run.read(lemmas_p)?);
        check_token_counts("target", &tokens, &lemmas).map_err(|e| CliError::input(lemmas_p, e))?;
        let fwd = parse_pharaoh(&run.read(fwd_p)?).map_err(|e| CliError::input(fwd_p, e))?;
        let rev = parse_pharaoh(&run.read(rev_p)?).map_err(|e| CliError::input(rev_p, e))?;
        let analysis =
            analyze_system(&docs, &fwd, &rev, &src_lemmas, &lemmas, &options).map_err(|e| {
                CliError::Input(format!("{} / {}: {e}", fwd_p.display(), rev_p.display()))
            })?;
        Ok::<_, CliError>((tokens, analysis))
    };
    let (tokens_a, analysis_a) = load_system(&mut run, &paths_a)?;
    let (tokens_b, analysis_b) = load_system(&mut run, &paths_b)?;

    let entries = compare_systems(&analysis_a, &analysis_b);
    let names = (
        run.cfg.consistency.name_a.clone(),
        run.cfg.consistency.name_b.clone(),
    );
    let review = render_review(
        &entries,
        &analysis_a,
        &analysis_b,
        &ReviewTexts {
            source: &src_tokens,
            system_a: &tokens_a,
            system_b: &tokens_b,
            name_a: &names.0,
            name_b: &names.1,
        },
    );
    run.count("documents", docs.len());
    run.count("sentences", src_tokens.len());
    run.count("divergences.a", analysis_a.records.len());
    run.count("divergences.b", analysis_b.records.len());
    run.count("compared", entries.len());
    run.write(
        &out_dir.join("divergences_a.jsonl"),
        json_lines(&analysis_a.records),
    );
    run.write(
        &out_dir.join("divergences_b.jsonl"),
        json_lines(&analysis_b.records),
    );
    run.write(&out_dir.join("comparison.jsonl"), json_lines(&entries));
    run.write(&out_dir.join("review.txt"), review);
    run.finish()
}

fn serve(a: &ServeMockArgs, cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut spec: MockSpec = a
        .mock
        .parse()
        .map_err(|e| CliError::Config(format!("mock spec {:?}: {e}", a.mock)))?;
    if !a.mock.contains("sep=") {
        spec.separator = cfg.separator_token()?;
    }
    if a.stdio {
        return serve_stdio(spec).map_err(|e| CliError::Backend(e.to_string()));
    }
    let listen = a
        .listen
        .as_deref()
        .ok_or_else(|| CliError::Config("serve-mock needs --listen <addr> or --stdio".into()))?;
    let server = serve_mock(listen, spec)?;
    println!("listening on {}", server.local_addr());
    std::io::stdout().flush().ok();
    server.wait();
    Ok(())
}
