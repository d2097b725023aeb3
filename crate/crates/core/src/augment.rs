//! Context-augmented training data: every run of consecutive sentences
//! that fits a character budget becomes one source/target sequence pair,
//! encoded with separator tokens between sentences.
//!
//! Authentic and synthetic (back-translated) material are kept in separate
//! streams from enumeration to output; concat back-translation happens in
//! the training pipeline.

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{span_char_length, ParallelDocument, Sentence, SeparatorToken};

pub const DEFAULT_CHAR_BUDGET: usize = 1000;
/// Average number of subwords per whitespace word assumed by
/// [`UnitMode::EstSubwords`], expressed as a ratio (3/2).
const SUBWORDS_PER_WORD: (usize, usize) = (3, 2);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AugmentError {
    #[error("character budget must be at least 1")]
    ZeroBudget,
    #[error("upsample factor must be at least 1")]
    ZeroUpsample,
    #[error("length filter max_units must be at least 1")]
    ZeroMaxUnits,
    #[error("document {doc_id:?}: sentence contains the separator token {separator:?}")]
    SeparatorCollision { doc_id: String, separator: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Authentic,
    Synthetic,
}

/// Which side of a span is measured against the character budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetSide {
    #[default]
    Source,
    /// The longer of source and target must fit.
    Max,
}

impl FromStr for BudgetSide {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "source" => Ok(Self::Source),
            "max" => Ok(Self::Max),
            other => Err(format!(
                "unknown budget side {other:?} (expected source or max)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitMode {
    Chars,
    EstSubwords,
}

impl FromStr for UnitMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "chars" => Ok(Self::Chars),
            "est-subwords" | "est_subwords" => Ok(Self::EstSubwords),
            other => Err(format!(
                "unknown unit mode {other:?} (expected chars or est-subwords)"
            )),
        }
    }
}

impl fmt::Display for UnitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Chars => "chars",
            Self::EstSubwords => "est-subwords",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthFilter {
    pub max_units: usize,
    pub unit_mode: UnitMode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentConfig {
    pub char_budget: usize,
    pub separator: SeparatorToken,
    pub seed: u64,
    pub upsample_factor: usize,
    pub length_filter: Option<LengthFilter>,
    #[serde(default)]
    pub budget_side: BudgetSide,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            char_budget: DEFAULT_CHAR_BUDGET,
            separator: SeparatorToken::default(),
            seed: 0,
            upsample_factor: 1,
            length_filter: None,
            budget_side: BudgetSide::Source,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<(), AugmentError> {
        if self.char_budget == 0 {
            return Err(AugmentError::ZeroBudget);
        }
        if self.upsample_factor == 0 {
            return Err(AugmentError::ZeroUpsample);
        }
        if matches!(self.length_filter, Some(f) if f.max_units == 0) {
            return Err(AugmentError::ZeroMaxUnits);
        }
        Ok(())
    }
}

/// A run of consecutive sentences from one parallel document.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SequencePair {
    pub doc_id: String,
    pub start: usize,
    pub src_sentences: Vec<Sentence>,
    pub tgt_sentences: Vec<Sentence>,
    pub origin: Origin,
}

impl SequencePair {
    pub fn len(&self) -> usize {
        self.src_sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.src_sentences.is_empty()
    }
}

/// All spans of `doc` whose source side fits in `budget` characters, in
/// `(start, len)` order.
pub fn enumerate_sequences(doc: &ParallelDocument, budget: usize) -> Vec<SequencePair> {
    enumerate_sequences_with(doc, budget, BudgetSide::Source, Origin::Authentic)
}

pub fn enumerate_sequences_with(
    doc: &ParallelDocument,
    budget: usize,
    side: BudgetSide,
    origin: Origin,
) -> Vec<SequencePair> {
    let src = doc.source();
    let tgt = doc.target();
    let mut out = Vec::new();
    for start in 0..src.len() {
        for end in start + 1..=src.len() {
            let measured = match side {
                BudgetSide::Source => span_char_length(&src[start..end]),
                BudgetSide::Max => {
                    span_char_length(&src[start..end]).max(span_char_length(&tgt[start..end]))
                }
            };
            // span length grows with `end`, so nothing longer fits either
            if measured > budget {
                break;
            }
            out.push(SequencePair {
                doc_id: doc.doc_id().to_string(),
                start,
                src_sentences: src[start..end].to_vec(),
                tgt_sentences: tgt[start..end].to_vec(),
                origin,
            });
        }
    }
    out
}

/// Joins sentence texts with `" SEP "`.
pub fn encode_sentences<'a, I>(sentences: I, sep: &SeparatorToken) -> String
where
    I: IntoIterator<Item = &'a str>,
{
    let join = sep.join_str();
    let mut out = String::new();
    for (i, s) in sentences.into_iter().enumerate() {
        if i > 0 {
            out.push_str(&join);
        }
        out.push_str(s);
    }
    out
}

/// Splits an encoded line back into sentences. Exactly one space is
/// stripped on each side of every separator when present, so this inverts
/// [`encode_sentences`] exactly and tolerates decoders that drop the
/// surrounding spaces.
pub fn split_on_separator(line: &str, sep: &SeparatorToken) -> Vec<String> {
    let parts: Vec<&str> = line.split(sep.as_str()).collect();
    let last = parts.len() - 1;
    parts
        .iter()
        .enumerate()
        .map(|(i, part)| {
            let mut p = *part;
            if i > 0 {
                p = p.strip_prefix(' ').unwrap_or(p);
            }
            if i < last {
                p = p.strip_suffix(' ').unwrap_or(p);
            }
            p.to_string()
        })
        .collect()
}

pub fn encode_sequence(
    seq: &SequencePair,
    sep: &SeparatorToken,
) -> Result<(String, String), AugmentError> {
    let collides = seq
        .src_sentences
        .iter()
        .chain(&seq.tgt_sentences)
        .any(|s| sep.occurs_in(s.text()));
    if collides {
        return Err(AugmentError::SeparatorCollision {
            doc_id: seq.doc_id.clone(),
            separator: sep.as_str().to_string(),
        });
    }
    Ok((
        encode_sentences(seq.src_sentences.iter().map(Sentence::text), sep),
        encode_sentences(seq.tgt_sentences.iter().map(Sentence::text), sep),
    ))
}

fn word_count(sentences: &[Sentence]) -> usize {
    sentences
        .iter()
        .map(|s| s.text().split_whitespace().count())
        .sum()
}

/// Estimated subword count: `ceil(1.5 * words)`.
pub fn estimate_subwords(words: usize) -> usize {
    let (num, den) = SUBWORDS_PER_WORD;
    (words * num).div_ceil(den)
}

pub fn measure_units(sentences: &[Sentence], mode: UnitMode) -> usize {
    match mode {
        UnitMode::Chars => span_char_length(sentences),
        UnitMode::EstSubwords => estimate_subwords(word_count(sentences)),
    }
}

/// Keeps pairs whose longer side measures at most `max_units`.
pub fn filter_by_length(
    pairs: Vec<SequencePair>,
    max_units: usize,
    mode: UnitMode,
) -> Vec<SequencePair> {
    pairs
        .into_iter()
        .filter(|p| {
            let longer =
                measure_units(&p.src_sentences, mode).max(measure_units(&p.tgt_sentences, mode));
            longer <= max_units
        })
        .collect()
}

/// Repeats the whole list `factor` times.
pub fn upsample<T: Clone>(items: &[T], factor: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(items.len() * factor);
    for _ in 0..factor {
        out.extend_from_slice(items);
    }
    out
}

const AUTHENTIC_STREAM: u64 = 0;
const SYNTHETIC_STREAM: u64 = 1;

/// Uniform integer in `[0, bound)` by Lemire's multiply-and-reject method.
fn uniform_below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let threshold = bound.wrapping_neg() % bound;
    loop {
        let wide = u128::from(rng.next_u64()) * u128::from(bound);
        if (wide as u64) >= threshold {
            return (wide >> 64) as u64;
        }
    }
}

fn fisher_yates<T>(items: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let j = uniform_below(rng, i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

fn shuffle_stream<T>(mut items: Vec<T>, seed: u64, stream: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    fisher_yates(&mut items, &mut rng);
    items
}

/// Seeded permutation: ChaCha8 keyed by `seed` driving a descending
/// Fisher-Yates pass. Stable across platforms and runs.
pub fn shuffle_corpus<T>(items: Vec<T>, seed: u64) -> Vec<T> {
    shuffle_stream(items, seed, AUTHENTIC_STREAM)
}

/// Shuffles authentic and synthetic material independently; the two
/// outputs never mix.
pub fn shuffle_streams<T>(authentic: Vec<T>, synthetic: Vec<T>, seed: u64) -> (Vec<T>, Vec<T>) {
    (
        shuffle_stream(authentic, seed, AUTHENTIC_STREAM),
        shuffle_stream(synthetic, seed, SYNTHETIC_STREAM),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentOccurrences {
    pub doc_id: String,
    /// For each sentence, the number of emitted sequences containing it.
    pub counts: Vec<usize>,
}

/// Measures the implicit upsampling of sentences from long documents.
pub fn upsampling_report(docs: &[ParallelDocument], budget: usize) -> Vec<DocumentOccurrences> {
    docs.iter()
        .map(|doc| {
            let mut counts = vec![0usize; doc.len()];
            for seq in enumerate_sequences(doc, budget) {
                for c in &mut counts[seq.start..seq.start + seq.len()] {
                    *c += 1;
                }
            }
            DocumentOccurrences {
                doc_id: doc.doc_id().to_string(),
                counts,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EncodedStream {
    pub source: Vec<String>,
    pub target: Vec<String>,
}

impl EncodedStream {
    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamCounts {
    pub enumerated: usize,
    pub after_filter: usize,
    pub emitted: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AugmentedCorpus {
    pub authentic: EncodedStream,
    pub synthetic: EncodedStream,
    pub authentic_counts: StreamCounts,
    pub synthetic_counts: StreamCounts,
}

fn build_stream(
    docs: &[ParallelDocument],
    origin: Origin,
    config: &AugmentConfig,
) -> (Vec<SequencePair>, StreamCounts) {
    let mut pairs: Vec<SequencePair> = docs
        .iter()
        .flat_map(|d| enumerate_sequences_with(d, config.char_budget, config.budget_side, origin))
        .collect();
    let enumerated = pairs.len();
    if let Some(filter) = config.length_filter {
        pairs = filter_by_length(pairs, filter.max_units, filter.unit_mode);
    }
    let after_filter = pairs.len();
    let pairs = upsample(&pairs, config.upsample_factor);
    let counts = StreamCounts {
        enumerated,
        after_filter,
        emitted: pairs.len(),
    };
    (pairs, counts)
}

fn encode_stream(
    pairs: &[SequencePair],
    sep: &SeparatorToken,
) -> Result<EncodedStream, AugmentError> {
    let mut stream = EncodedStream::default();
    for p in pairs {
        let (s, t) = encode_sequence(p, sep)?;
        stream.source.push(s);
        stream.target.push(t);
    }
    Ok(stream)
}

/// Full augmentation: enumerate, filter, upsample, shuffle and encode each
/// stream separately.
pub fn augment_corpus(
    authentic: &[ParallelDocument],
    synthetic: &[ParallelDocument],
    config: &AugmentConfig,
) -> Result<AugmentedCorpus, AugmentError> {
    config.validate()?;
    let (auth_pairs, authentic_counts) = build_stream(authentic, Origin::Authentic, config);
    let (syn_pairs, synthetic_counts) = build_stream(synthetic, Origin::Synthetic, config);
    let (auth_pairs, syn_pairs) = shuffle_streams(auth_pairs, syn_pairs, config.seed);
    Ok(AugmentedCorpus {
        authentic: encode_stream(&auth_pairs, &config.separator)?,
        synthetic: encode_stream(&syn_pairs, &config.separator)?,
        authentic_counts,
        synthetic_counts,
    })
}
