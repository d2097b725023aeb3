//! Lexical-consistency analysis of document translations.
//!
//! Word alignments in both directions are intersected, aligned tokens are
//! mapped to lemmata, and a *divergence* is recorded whenever one source
//! lemma is aligned to two or more distinct target lemmata inside a single
//! document. Comparing the divergence profiles of two systems over the same
//! source yields the pool of examples for manual review.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConsistencyError {
    #[error("line {line}: malformed alignment pair {token:?}")]
    MalformedPair { line: usize, token: String },
    #[error("{what}: expected {expected} sentences, found {found}")]
    SentenceCountMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("sentence {sentence}: link {src}-{tgt} exceeds lemma counts ({src_len} source, {tgt_len} target)")]
    IndexOutOfRange {
        sentence: usize,
        src: usize,
        tgt: usize,
        src_len: usize,
        tgt_len: usize,
    },
    #[error("sentence {sentence}: {what} has {lemmas} lemmata for {tokens} tokens")]
    TokenCountMismatch {
        sentence: usize,
        what: String,
        lemmas: usize,
        tokens: usize,
    },
    #[error("line {line}: malformed document range {text:?}")]
    MalformedRange { line: usize, text: String },
    #[error("document ranges must be contiguous from 0 and cover {sentences} sentences")]
    RangeCoverage { sentences: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AlignmentLink {
    pub src_index: usize,
    pub tgt_index: usize,
}

impl AlignmentLink {
    pub fn new(src_index: usize, tgt_index: usize) -> Self {
        Self {
            src_index,
            tgt_index,
        }
    }

    pub fn reversed(self) -> Self {
        Self::new(self.tgt_index, self.src_index)
    }
}

pub type SentenceLinks = Vec<AlignmentLink>;

/// Parses Pharaoh `i-j` alignments, one line per sentence.
pub fn parse_pharaoh(text: &str) -> Result<Vec<SentenceLinks>, ConsistencyError> {
    text.lines()
        .enumerate()
        .map(|(idx, line)| {
            line.split_whitespace()
                .map(|tok| {
                    let bad = || ConsistencyError::MalformedPair {
                        line: idx + 1,
                        token: tok.to_string(),
                    };
                    let (i, j) = tok.split_once('-').ok_or_else(bad)?;
                    let num = |s: &str| {
                        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
                            return Err(bad());
                        }
                        s.parse::<usize>().map_err(|_| bad())
                    };
                    Ok(AlignmentLink::new(num(i)?, num(j)?))
                })
                .collect()
        })
        .collect()
}

pub fn format_pharaoh(links: &[SentenceLinks]) -> String {
    let mut out = String::new();
    for sent in links {
        let pairs: Vec<String> = sent
            .iter()
            .map(|l| format!("{}-{}", l.src_index, l.tgt_index))
            .collect();
        out.push_str(&pairs.join(" "));
        out.push('\n');
    }
    out
}

/// Per sentence, links present in both `fwd` (source-to-target) and `rev`.
/// `rev` holds target-to-source pairs as written by the reverse aligner and
/// is flipped before comparing. Output is sorted and deduplicated.
pub fn intersect_alignments(
    fwd: &[SentenceLinks],
    rev: &[SentenceLinks],
) -> Result<Vec<SentenceLinks>, ConsistencyError> {
    if fwd.len() != rev.len() {
        return Err(ConsistencyError::SentenceCountMismatch {
            what: "reverse alignments".to_string(),
            expected: fwd.len(),
            found: rev.len(),
        });
    }
    Ok(fwd
        .iter()
        .zip(rev)
        .map(|(f, r)| {
            let f: BTreeSet<AlignmentLink> = f.iter().copied().collect();
            let r: BTreeSet<AlignmentLink> = r.iter().map(|l| l.reversed()).collect();
            f.intersection(&r).copied().collect()
        })
        .collect())
}

/// Lemmata of one tokenized sentence, one per token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaSentence {
    pub lemmas: Vec<String>,
}

impl LemmaSentence {
    pub fn from_line(line: &str) -> Self {
        Self {
            lemmas: line.split_whitespace().map(str::to_string).collect(),
        }
    }
}

pub fn parse_lemma_lines(text: &str) -> Vec<LemmaSentence> {
    text.lines().map(LemmaSentence::from_line).collect()
}

pub fn parse_token_lines(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect()
}

pub fn check_token_counts(
    what: &str,
    tokens: &[Vec<String>],
    lemmas: &[LemmaSentence],
) -> Result<(), ConsistencyError> {
    if tokens.len() != lemmas.len() {
        return Err(ConsistencyError::SentenceCountMismatch {
            what: format!("{what} lemmata"),
            expected: tokens.len(),
            found: lemmas.len(),
        });
    }
    for (i, (t, l)) in tokens.iter().zip(lemmas).enumerate() {
        if t.len() != l.lemmas.len() {
            return Err(ConsistencyError::TokenCountMismatch {
                sentence: i,
                what: what.to_string(),
                lemmas: l.lemmas.len(),
                tokens: t.len(),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Occurrence {
    pub sentence_index: usize,
    pub src_index: usize,
    pub tgt_index: usize,
    pub tgt_lemma: String,
}

/// Case-folded source lemma to every aligned occurrence (multiset).
pub type LemmaMap = BTreeMap<String, Vec<Occurrence>>;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapOptions {
    /// Case-folded source lemmata to ignore.
    pub stoplist: BTreeSet<String>,
    /// Ignore links whose source or target lemma has no alphanumeric
    /// character.
    pub skip_punctuation: bool,
}

impl MapOptions {
    pub fn with_stoplist<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.stoplist
            .extend(words.into_iter().map(|w| fold(w.as_ref())));
        self
    }
}

fn fold(s: &str) -> String {
    s.to_lowercase()
}

fn is_punctuation(s: &str) -> bool {
    !s.chars().any(char::is_alphanumeric)
}

/// Collects `src lemma -> tgt lemma` occurrences for every link of one
/// document. `first_sentence` offsets the reported sentence indices.
pub fn build_lemma_map(
    links: &[SentenceLinks],
    src_lemmas: &[LemmaSentence],
    tgt_lemmas: &[LemmaSentence],
    first_sentence: usize,
    options: &MapOptions,
) -> Result<LemmaMap, ConsistencyError> {
    for (what, found) in [
        ("source lemmata", src_lemmas.len()),
        ("target lemmata", tgt_lemmas.len()),
    ] {
        if found != links.len() {
            return Err(ConsistencyError::SentenceCountMismatch {
                what: what.to_string(),
                expected: links.len(),
                found,
            });
        }
    }
    let mut map = LemmaMap::new();
    for (i, ((sent_links, src), tgt)) in links.iter().zip(src_lemmas).zip(tgt_lemmas).enumerate() {
        let sentence_index = first_sentence + i;
        for link in sent_links {
            let (Some(s), Some(t)) = (
                src.lemmas.get(link.src_index),
                tgt.lemmas.get(link.tgt_index),
            ) else {
                return Err(ConsistencyError::IndexOutOfRange {
                    sentence: sentence_index,
                    src: link.src_index,
                    tgt: link.tgt_index,
                    src_len: src.lemmas.len(),
                    tgt_len: tgt.lemmas.len(),
                });
            };
            let (s, t) = (fold(s), fold(t));
            if options.stoplist.contains(&s)
                || (options.skip_punctuation && (is_punctuation(&s) || is_punctuation(&t)))
            {
                continue;
            }
            map.entry(s).or_default().push(Occurrence {
                sentence_index,
                src_index: link.src_index,
                tgt_index: link.tgt_index,
                tgt_lemma: t,
            });
        }
    }
    Ok(map)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivergenceRecord {
    pub doc_id: String,
    pub src_lemma: String,
    pub tgt_lemmas: BTreeSet<String>,
    pub occurrences: Vec<Occurrence>,
}

fn distinct_targets(occurrences: &[Occurrence]) -> BTreeSet<String> {
    occurrences.iter().map(|o| o.tgt_lemma.clone()).collect()
}

/// Source lemmata aligned to at least two distinct target lemmata within a
/// document, sorted by document id then lemma.
pub fn find_divergences(docs: &[(String, LemmaMap)]) -> Vec<DivergenceRecord> {
    let mut records: Vec<DivergenceRecord> = docs
        .iter()
        .flat_map(|(doc_id, map)| {
            map.iter().filter_map(move |(lemma, occ)| {
                let tgt_lemmas = distinct_targets(occ);
                (tgt_lemmas.len() >= 2).then(|| DivergenceRecord {
                    doc_id: doc_id.clone(),
                    src_lemma: lemma.clone(),
                    tgt_lemmas,
                    occurrences: occ.clone(),
                })
            })
        })
        .collect();
    records.sort_by(|a, b| (&a.doc_id, &a.src_lemma).cmp(&(&b.doc_id, &b.src_lemma)));
    records
}

/// Contiguous sentence range `[start, end)` belonging to one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocRange {
    pub doc_id: String,
    pub start: usize,
    pub end: usize,
}

/// Parses `doc_id<TAB>start<TAB>end` lines (end exclusive) and checks they
/// tile `[0, sentences)`.
pub fn parse_doc_ranges(text: &str, sentences: usize) -> Result<Vec<DocRange>, ConsistencyError> {
    let mut ranges = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || ConsistencyError::MalformedRange {
            line: idx + 1,
            text: line.to_string(),
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let [doc_id, start, end] = fields[..] else {
            return Err(bad());
        };
        let start: usize = start.trim().parse().map_err(|_| bad())?;
        let end: usize = end.trim().parse().map_err(|_| bad())?;
        if doc_id.is_empty() || end < start {
            return Err(bad());
        }
        ranges.push(DocRange {
            doc_id: doc_id.to_string(),
            start,
            end,
        });
    }
    let mut expected = 0;
    for r in &ranges {
        if r.start != expected {
            return Err(ConsistencyError::RangeCoverage { sentences });
        }
        expected = r.end;
    }
    if expected != sentences {
        return Err(ConsistencyError::RangeCoverage { sentences });
    }
    Ok(ranges)
}

/// Divergences and per-`(doc, lemma)` distinct-target counts of one system.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemAnalysis {
    pub maps: Vec<(String, LemmaMap)>,
    pub records: Vec<DivergenceRecord>,
}

impl SystemAnalysis {
    /// Distinct aligned target lemmata; 0 when the lemma is unaligned.
    pub fn distinct_count(&self, doc_id: &str, lemma: &str) -> usize {
        self.maps
            .iter()
            .find(|(d, _)| d == doc_id)
            .and_then(|(_, m)| m.get(lemma))
            .map_or(0, |occ| distinct_targets(occ).len())
    }

    pub fn occurrences(&self, doc_id: &str, lemma: &str) -> &[Occurrence] {
        self.maps
            .iter()
            .find(|(d, _)| d == doc_id)
            .and_then(|(_, m)| m.get(lemma))
            .map_or(&[], Vec::as_slice)
    }
}

/// Runs the pipeline for one system over the whole corpus.
pub fn analyze_system(
    docs: &[DocRange],
    fwd: &[SentenceLinks],
    rev: &[SentenceLinks],
    src_lemmas: &[LemmaSentence],
    tgt_lemmas: &[LemmaSentence],
    options: &MapOptions,
) -> Result<SystemAnalysis, ConsistencyError> {
    let links = intersect_alignments(fwd, rev)?;
    let mut maps = Vec::with_capacity(docs.len());
    for d in docs {
        if d.end > links.len() || d.end > src_lemmas.len() || d.end > tgt_lemmas.len() {
            return Err(ConsistencyError::SentenceCountMismatch {
                what: format!("inputs for document {}", d.doc_id),
                expected: d.end,
                found: links.len().min(src_lemmas.len()).min(tgt_lemmas.len()),
            });
        }
        let map = build_lemma_map(
            &links[d.start..d.end],
            &src_lemmas[d.start..d.end],
            &tgt_lemmas[d.start..d.end],
            d.start,
            options,
        )?;
        maps.push((d.doc_id.clone(), map));
    }
    let records = find_divergences(&maps);
    Ok(SystemAnalysis { maps, records })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub doc_id: String,
    pub src_lemma: String,
    pub count_a: usize,
    pub count_b: usize,
}

/// `(doc, lemma)` pairs that diverge in at least one system and whose
/// distinct-target counts differ between the systems, sorted by document id
/// then lemma.
pub fn compare_systems(a: &SystemAnalysis, b: &SystemAnalysis) -> Vec<ComparisonEntry> {
    let keys: BTreeSet<(&str, &str)> = a
        .records
        .iter()
        .chain(&b.records)
        .map(|r| (r.doc_id.as_str(), r.src_lemma.as_str()))
        .collect();
    keys.into_iter()
        .filter_map(|(doc_id, lemma)| {
            let (count_a, count_b) = (
                a.distinct_count(doc_id, lemma),
                b.distinct_count(doc_id, lemma),
            );
            (count_a != count_b).then(|| ComparisonEntry {
                doc_id: doc_id.to_string(),
                src_lemma: lemma.to_string(),
                count_a,
                count_b,
            })
        })
        .collect()
}

/// Tokenized sentences of the three texts being compared.
pub struct ReviewTexts<'a> {
    pub source: &'a [Vec<String>],
    pub system_a: &'a [Vec<String>],
    pub system_b: &'a [Vec<String>],
    pub name_a: &'a str,
    pub name_b: &'a str,
}

fn highlight(tokens: &[String], marked: &BTreeSet<usize>) -> String {
    tokens
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if marked.contains(&i) {
                format!("[[{t}]]")
            } else {
                t.clone()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Plain-text review sheet: entries with the most distinct target lemmata
/// first, every affected sentence shown with aligned tokens in `[[..]]`.
pub fn render_review(
    entries: &[ComparisonEntry],
    a: &SystemAnalysis,
    b: &SystemAnalysis,
    texts: &ReviewTexts<'_>,
) -> String {
    let mut ordered: Vec<&ComparisonEntry> = entries.iter().collect();
    ordered.sort_by(|x, y| {
        y.count_a
            .max(y.count_b)
            .cmp(&x.count_a.max(x.count_b))
            .then_with(|| (&x.doc_id, &x.src_lemma).cmp(&(&y.doc_id, &y.src_lemma)))
    });
    let mut out = String::new();
    for e in ordered {
        let occ_a = a.occurrences(&e.doc_id, &e.src_lemma);
        let occ_b = b.occurrences(&e.doc_id, &e.src_lemma);
        let lemmas = |occ: &[Occurrence]| {
            distinct_targets(occ)
                .into_iter()
                .collect::<Vec<_>>()
                .join(", ")
        };
        let _ = writeln!(
            out,
            "== {} | {} | {}={} {{{}}} | {}={} {{{}}}",
            e.doc_id,
            e.src_lemma,
            texts.name_a,
            e.count_a,
            lemmas(occ_a),
            texts.name_b,
            e.count_b,
            lemmas(occ_b)
        );
        let sentences: BTreeSet<usize> = occ_a
            .iter()
            .chain(occ_b)
            .map(|o| o.sentence_index)
            .collect();
        for s in sentences {
            let pick = |occ: &[Occurrence], src: bool| -> BTreeSet<usize> {
                occ.iter()
                    .filter(|o| o.sentence_index == s)
                    .map(|o| if src { o.src_index } else { o.tgt_index })
                    .collect()
            };
            let src_marks: BTreeSet<usize> = pick(occ_a, true)
                .union(&pick(occ_b, true))
                .copied()
                .collect();
            let empty = Vec::new();
            let line = |toks: &[Vec<String>]| toks.get(s).unwrap_or(&empty).clone();
            let _ = writeln!(
                out,
                "  [{s}] source: {}",
                highlight(&line(texts.source), &src_marks)
            );
            let _ = writeln!(
                out,
                "  [{s}] {}: {}",
                texts.name_a,
                highlight(&line(texts.system_a), &pick(occ_a, false))
            );
            let _ = writeln!(
                out,
                "  [{s}] {}: {}",
                texts.name_b,
                highlight(&line(texts.system_b), &pick(occ_b, false))
            );
        }
        out.push('\n');
    }
    out
}
