//! Windowed document decoding.
//!
//! A document is cut into consecutive *main* spans. Each window sent to the
//! translator is `pre-context + main + post-context`; only the main part of
//! the output is kept. The pre-context is a word-boundary suffix of the text
//! before the main span and may start mid-sentence; the post-context is made
//! of whole sentences. Windows whose output cannot be sentence-aligned fall
//! back to translating their main sentences one at a time.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::{encode_sentences, split_on_separator};
use crate::corpus::{span_char_length, Document, Sentence, SeparatorToken};
use crate::translate::{Session, TranslateError};

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("main_max must be at least 1")]
    InvalidLimits,
    #[error("non-overlapping limit must be at least 1")]
    InvalidLimit,
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error("document {doc_id:?}: backup translation of sentence {index} failed: {message}")]
    BackupFailed {
        doc_id: String,
        index: usize,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowLimits {
    pub pre_max: usize,
    pub main_max: usize,
    pub total_max: usize,
}

impl Default for WindowLimits {
    fn default() -> Self {
        Self {
            pre_max: 200,
            main_max: 500,
            total_max: 900,
        }
    }
}

impl WindowLimits {
    pub fn validate(&self) -> Result<(), ScheduleError> {
        if self.main_max == 0 {
            return Err(ScheduleError::InvalidLimits);
        }
        Ok(())
    }
}

pub const DEFAULT_NONOVERLAP_LIMIT: usize = 700;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SentenceSpan {
    pub start: usize,
    pub len: usize,
}

impl SentenceSpan {
    pub fn new(start: usize, len: usize) -> Self {
        Self { start, len }
    }

    pub fn end(&self) -> usize {
        self.start + self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.end()
    }
}

/// Where the pre-context starts: a sentence index and a character offset
/// inside it (0 means the whole sentence is included).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreStart {
    pub sentence: usize,
    pub char_offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowPlan {
    pub doc_id: String,
    pub pre: Option<PreStart>,
    pub pre_text: String,
    /// Number of separator-delimited segments the pre-context contributes.
    pub pre_segments: usize,
    pub main: SentenceSpan,
    pub post: SentenceSpan,
    /// The main span is one sentence longer than `main_max`.
    pub oversized: bool,
}

impl WindowPlan {
    fn main_only(doc_id: &str, main: SentenceSpan, oversized: bool) -> Self {
        Self {
            doc_id: doc_id.to_string(),
            pre: None,
            pre_text: String::new(),
            pre_segments: 0,
            main,
            post: SentenceSpan::new(main.end(), 0),
            oversized,
        }
    }

    pub fn pre_len(&self) -> usize {
        self.pre_text.chars().count()
    }

    /// Segments a perfectly sentence-aligned translation has.
    pub fn expected_segments(&self) -> usize {
        self.pre_segments + self.main.len + self.post.len
    }

    /// Separator-delimited segments of the decoder input: an optional
    /// leading fragment, whole pre-context sentences, main, post.
    pub fn segments<'a>(&self, doc: &'a Document) -> Vec<std::borrow::Cow<'a, str>> {
        use std::borrow::Cow;
        let mut out = Vec::with_capacity(self.expected_segments());
        if let Some(pre) = self.pre {
            let first = doc.sentences[pre.sentence].text();
            if pre.char_offset == 0 {
                out.push(Cow::Borrowed(first));
            } else {
                let byte = first
                    .char_indices()
                    .nth(pre.char_offset)
                    .map_or(first.len(), |(b, _)| b);
                out.push(Cow::Borrowed(&first[byte..]));
            }
            for s in &doc.sentences[pre.sentence + 1..self.main.start] {
                out.push(Cow::Borrowed(s.text()));
            }
        }
        for s in &doc.sentences[self.main.range()] {
            out.push(Cow::Borrowed(s.text()));
        }
        for s in &doc.sentences[self.post.range()] {
            out.push(Cow::Borrowed(s.text()));
        }
        out
    }

    pub fn encode(&self, doc: &Document, sep: &SeparatorToken) -> String {
        let segments = self.segments(doc);
        encode_sentences(segments.iter().map(|s| s.as_ref()), sep)
    }
}

/// Greedy left-to-right packing of whole sentences into spans of at most
/// `limit` characters; a sentence longer than `limit` gets its own span.
fn greedy_spans(sentences: &[Sentence], limit: usize) -> Vec<(SentenceSpan, bool)> {
    let mut spans = Vec::new();
    let mut start = 0;
    while start < sentences.len() {
        let mut end = start + 1;
        while end < sentences.len() && span_char_length(&sentences[start..=end]) <= limit {
            end += 1;
        }
        let oversized = end == start + 1 && sentences[start].char_len() > limit;
        spans.push((SentenceSpan::new(start, end - start), oversized));
        start = end;
    }
    spans
}

pub fn plan_nonoverlapping(
    doc: &Document,
    limit: usize,
) -> Result<Vec<SentenceSpan>, ScheduleError> {
    if limit == 0 {
        return Err(ScheduleError::InvalidLimit);
    }
    Ok(greedy_spans(&doc.sentences, limit)
        .into_iter()
        .map(|(s, _)| s)
        .collect())
}

/// Plans with main content only, one per non-overlapping span.
pub fn plan_nonoverlapping_windows(
    doc: &Document,
    limit: usize,
) -> Result<Vec<WindowPlan>, ScheduleError> {
    if limit == 0 {
        return Err(ScheduleError::InvalidLimit);
    }
    Ok(greedy_spans(&doc.sentences, limit)
        .into_iter()
        .map(|(span, oversized)| WindowPlan::main_only(&doc.doc_id, span, oversized))
        .collect())
}

/// Longest word-boundary suffix (at most `pre_max` chars) of the text
/// preceding sentence `main_start`, sentences joined by single spaces.
fn pre_context(
    sentences: &[Sentence],
    main_start: usize,
    pre_max: usize,
) -> Option<(PreStart, String, usize)> {
    if main_start == 0 || pre_max == 0 {
        return None;
    }
    // only the last pre_max + 1 characters can matter
    let mut first = main_start - 1;
    while first > 0 && span_char_length(&sentences[first..main_start]) <= pre_max {
        first -= 1;
    }
    let mut chars: Vec<char> = Vec::new();
    // (index into `chars` where each sentence starts, sentence index)
    let mut starts: Vec<(usize, usize)> = Vec::new();
    for (i, s) in sentences[first..main_start].iter().enumerate() {
        if i > 0 {
            chars.push(' ');
        }
        starts.push((chars.len(), first + i));
        chars.extend(s.text().chars());
    }
    let total = chars.len();
    let lowest = total.saturating_sub(pre_max);
    let at_doc_start = first == 0;
    let boundary = (lowest..total).find(|&p| {
        !chars[p].is_whitespace()
            && if p == 0 {
                at_doc_start
            } else {
                chars[p - 1].is_whitespace()
            }
    })?;
    let (sent_char_start, sentence) = starts
        .iter()
        .rev()
        .find(|(offset, _)| *offset <= boundary)
        .copied()
        .expect("boundary lies inside the joined text");
    let start = PreStart {
        sentence,
        char_offset: boundary - sent_char_start,
    };
    let text: String = chars[boundary..].iter().collect();
    let segments = main_start - sentence;
    Some((start, text, segments))
}

/// Overlapping windows: greedy main spans within `main_max`, a
/// word-boundary pre-context of at most `pre_max` characters and a
/// whole-sentence post-context filling what is left of `total_max`.
pub fn plan_windows(
    doc: &Document,
    limits: &WindowLimits,
) -> Result<Vec<WindowPlan>, ScheduleError> {
    limits.validate()?;
    let sentences = &doc.sentences;
    let mut plans = Vec::new();
    for (main, oversized) in greedy_spans(sentences, limits.main_max) {
        let mut plan = WindowPlan::main_only(&doc.doc_id, main, oversized);
        if let Some((start, text, segments)) = pre_context(sentences, main.start, limits.pre_max) {
            plan.pre = Some(start);
            plan.pre_text = text;
            plan.pre_segments = segments;
        }
        let used = plan.pre_len() + span_char_length(&sentences[main.range()]);
        let post_budget = limits.total_max.saturating_sub(used);
        let mut post_len = 0;
        while main.end() + post_len < sentences.len()
            && span_char_length(&sentences[main.end()..main.end() + post_len + 1]) <= post_budget
        {
            post_len += 1;
        }
        plan.post = SentenceSpan::new(main.end(), post_len);
        plans.push(plan);
    }
    Ok(plans)
}

/// One line of the plan dump. Character ranges are half-open offsets into
/// the document text with sentences joined by single spaces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub doc_id: String,
    pub window: usize,
    pub pre_chars: [usize; 2],
    pub pre_segments: usize,
    pub main: [usize; 2],
    pub post: [usize; 2],
    pub expected_segments: usize,
    pub oversized: bool,
}

pub fn plan_records(doc: &Document, plans: &[WindowPlan]) -> Vec<PlanRecord> {
    let mut offsets = Vec::with_capacity(doc.len() + 1);
    let mut acc = 0;
    for s in &doc.sentences {
        offsets.push(acc);
        acc += s.char_len() + 1;
    }
    plans
        .iter()
        .enumerate()
        .map(|(window, p)| {
            let pre_chars = match p.pre {
                Some(start) => {
                    let a = offsets[start.sentence] + start.char_offset;
                    [a, a + p.pre_len()]
                }
                None => {
                    let at = offsets[p.main.start].saturating_sub(1);
                    [at, at]
                }
            };
            PlanRecord {
                doc_id: p.doc_id.clone(),
                window,
                pre_chars,
                pre_segments: p.pre_segments,
                main: [p.main.start, p.main.len],
                post: [p.post.start, p.post.len],
                expected_segments: p.expected_segments(),
                oversized: p.oversized,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StitchedTranslation {
    pub doc_id: String,
    pub sentences: Vec<String>,
    /// Sentences whose window could not be sentence-aligned.
    pub backup_indices: BTreeSet<usize>,
}

/// Pulls each window's main-content translations out of its decoded
/// output. A window is usable only when the output splits into exactly the
/// expected number of segments (and is not blank for a non-blank input);
/// otherwise its main sentences are left empty and listed in
/// `backup_indices`.
pub fn stitch(
    doc: &Document,
    plans: &[WindowPlan],
    translations: &[Result<String, String>],
    sep: &SeparatorToken,
) -> StitchedTranslation {
    assert_eq!(
        plans.len(),
        translations.len(),
        "one translation per window"
    );
    let mut sentences = vec![String::new(); doc.len()];
    let mut backup_indices = BTreeSet::new();
    for (plan, decoded) in plans.iter().zip(translations) {
        let parts = match decoded {
            Ok(text) => {
                let blank = text.trim().is_empty() && !plan.encode(doc, sep).trim().is_empty();
                let parts = split_on_separator(text, sep);
                (!blank && parts.len() == plan.expected_segments()).then_some(parts)
            }
            Err(message) => {
                tracing::debug!(doc = %doc.doc_id, %message, "window translation failed");
                None
            }
        };
        match parts {
            Some(parts) => {
                let main = &parts[plan.pre_segments..plan.pre_segments + plan.main.len];
                for (slot, text) in sentences[plan.main.range()].iter_mut().zip(main) {
                    slot.clone_from(text);
                }
            }
            None => backup_indices.extend(plan.main.range()),
        }
    }
    StitchedTranslation {
        doc_id: doc.doc_id.clone(),
        sentences,
        backup_indices,
    }
}

/// Translates planned windows, stitches the main contents, then fills every
/// backup index with a single-sentence translation.
pub fn run_plans(
    doc: &Document,
    plans: &[WindowPlan],
    session: &Session,
    sep: &SeparatorToken,
) -> Result<StitchedTranslation, ScheduleError> {
    let inputs: Vec<String> = plans.iter().map(|p| p.encode(doc, sep)).collect();
    let outputs = session.translate(&inputs)?;
    let mut stitched = stitch(doc, plans, &outputs, sep);
    if !stitched.backup_indices.is_empty() {
        let indices: Vec<usize> = stitched.backup_indices.iter().copied().collect();
        tracing::info!(doc = %doc.doc_id, count = indices.len(), "single-sentence backup");
        let singles: Vec<String> = indices
            .iter()
            .map(|&i| doc.sentences[i].text().to_string())
            .collect();
        for (index, outcome) in indices.into_iter().zip(session.translate(&singles)?) {
            stitched.sentences[index] = outcome.map_err(|message| ScheduleError::BackupFailed {
                doc_id: doc.doc_id.clone(),
                index,
                message,
            })?;
        }
    }
    Ok(stitched)
}

pub fn run_document(
    doc: &Document,
    limits: &WindowLimits,
    session: &Session,
    sep: &SeparatorToken,
) -> Result<StitchedTranslation, ScheduleError> {
    let plans = plan_windows(doc, limits)?;
    run_plans(doc, &plans, session, sep)
}
