//! Positional-context decoding.
//!
//! Every sentence is translated inside short context windows of one to
//! three consecutive sentences, at every position it can occupy (`2nd/3`
//! is the sentence in the middle of a three-sentence window). The final
//! translation comes from the first label in a preference cascade whose
//! output is valid: right sentence count, no runaway word repetition, no
//! absurdly long word.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::{encode_sentences, split_on_separator};
use crate::corpus::{Document, SeparatorToken};
use crate::schedule::SentenceSpan;
use crate::translate::{Session, TranslateError};

pub const MAX_CONTEXT: u8 = 3;

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("invalid position label {0:?}")]
    InvalidLabel(String),
    #[error("validity thresholds must be at least 1")]
    InvalidRules,
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error("document {doc_id:?}: no valid candidate for sentence {sentence_index}")]
    NoValidCandidate {
        doc_id: String,
        sentence_index: usize,
    },
}

/// `position`-th sentence (1-based) of a `context_size`-sentence window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PositionLabel {
    position: u8,
    context_size: u8,
}

impl PositionLabel {
    pub fn new(position: u8, context_size: u8) -> Result<Self, StrategyError> {
        if position == 0 || position > context_size || context_size > MAX_CONTEXT {
            return Err(StrategyError::InvalidLabel(format!(
                "{position}/{context_size}"
            )));
        }
        Ok(Self {
            position,
            context_size,
        })
    }

    pub const fn position(&self) -> u8 {
        self.position
    }

    pub const fn context_size(&self) -> u8 {
        self.context_size
    }

    /// Context span for the sentence at `index`, if it fits in a document
    /// of `doc_len` sentences.
    pub fn span_for(&self, index: usize, doc_len: usize) -> Option<SentenceSpan> {
        let start = index.checked_sub(usize::from(self.position) - 1)?;
        let span = SentenceSpan::new(start, usize::from(self.context_size));
        (span.end() <= doc_len).then_some(span)
    }

    /// All six labels: 1st/3, 2nd/3, 3rd/3, 1st/2, 2nd/2, 1st/1.
    pub fn all() -> Vec<PositionLabel> {
        (1..=MAX_CONTEXT)
            .rev()
            .flat_map(|size| {
                (1..=size).map(move |pos| PositionLabel {
                    position: pos,
                    context_size: size,
                })
            })
            .collect()
    }
}

impl fmt::Display for PositionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let suffix = match self.position {
            1 => "st",
            2 => "nd",
            _ => "rd",
        };
        write!(f, "{}{}/{}", self.position, suffix, self.context_size)
    }
}

impl FromStr for PositionLabel {
    type Err = StrategyError;

    /// Accepts `2/3` as well as `2nd/3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || StrategyError::InvalidLabel(s.to_string());
        let (pos, size) = s.trim().split_once('/').ok_or_else(bad)?;
        let pos = pos.trim_end_matches(|c: char| c.is_ascii_alphabetic());
        let position = pos.parse::<u8>().map_err(|_| bad())?;
        let context_size = size.parse::<u8>().map_err(|_| bad())?;
        Self::new(position, context_size).map_err(|_| bad())
    }
}

impl TryFrom<String> for PositionLabel {
    type Error = StrategyError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<PositionLabel> for String {
    fn from(value: PositionLabel) -> Self {
        value.to_string()
    }
}

/// Ordered preference list of labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cascade(pub Vec<PositionLabel>);

impl Default for Cascade {
    /// 2nd/3, 1st/3, 2nd/2, 1st/2, 1st/1. 3rd/3 is left out.
    fn default() -> Self {
        Self(
            [(2, 3), (1, 3), (2, 2), (1, 2), (1, 1)]
                .into_iter()
                .map(|(p, c)| PositionLabel {
                    position: p,
                    context_size: c,
                })
                .collect(),
        )
    }
}

impl FromStr for Cascade {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let labels = s
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()?;
        if labels.is_empty() {
            return Err(StrategyError::InvalidLabel(s.to_string()));
        }
        Ok(Self(labels))
    }
}

impl fmt::Display for Cascade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|l| format!("{}/{}", l.position, l.context_size))
            .collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityRules {
    pub max_word_repeats: usize,
    pub max_word_len: usize,
}

impl Default for ValidityRules {
    fn default() -> Self {
        Self {
            max_word_repeats: 20,
            max_word_len: 49,
        }
    }
}

impl ValidityRules {
    pub fn validate(&self) -> Result<(), StrategyError> {
        if self.max_word_repeats == 0 || self.max_word_len == 0 {
            return Err(StrategyError::InvalidRules);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum InvalidReason {
    SentenceCount { expected: usize, found: usize },
    WordRepeat { word: String, count: usize },
    WordLength { word: String, chars: usize },
    TranslationFailed { message: String },
}

impl InvalidReason {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::SentenceCount { .. } => "sentence-count",
            Self::WordRepeat { .. } => "repeat",
            Self::WordLength { .. } => "word-len",
            Self::TranslationFailed { .. } => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Valid,
    Invalid(InvalidReason),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Self::Valid)
    }
}

/// Checks, in order: separator-delimited sentence count, per-word repeat
/// count over the whole output, and word length. Words are maximal
/// whitespace-delimited tokens (case-sensitive); separator tokens are not
/// words.
pub fn check_validity(
    decoded: &str,
    expected_sentences: usize,
    rules: &ValidityRules,
    sep: &SeparatorToken,
) -> Verdict {
    let found = decoded.matches(sep.as_str()).count() + 1;
    if found != expected_sentences {
        return Verdict::Invalid(InvalidReason::SentenceCount {
            expected: expected_sentences,
            found,
        });
    }
    let words: Vec<&str> = decoded
        .split_whitespace()
        .filter(|w| *w != sep.as_str())
        .collect();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for w in &words {
        *counts.entry(w).or_default() += 1;
    }
    if let Some(w) = words.iter().find(|w| counts[*w] > rules.max_word_repeats) {
        return Verdict::Invalid(InvalidReason::WordRepeat {
            word: (*w).to_string(),
            count: counts[w],
        });
    }
    if let Some(w) = words
        .iter()
        .find(|w| w.chars().count() > rules.max_word_len)
    {
        return Verdict::Invalid(InvalidReason::WordLength {
            word: (*w).to_string(),
            chars: w.chars().count(),
        });
    }
    Verdict::Valid
}

/// Every feasible `(label, span)` for the sentence at `index`, 3rd/3
/// included.
pub fn build_candidates(doc: &Document, index: usize) -> Vec<(PositionLabel, SentenceSpan)> {
    candidates_for(doc.len(), index)
}

pub fn candidates_for(doc_len: usize, index: usize) -> Vec<(PositionLabel, SentenceSpan)> {
    if index >= doc_len {
        return Vec::new();
    }
    PositionLabel::all()
        .into_iter()
        .filter_map(|label| label.span_for(index, doc_len).map(|span| (label, span)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateTranslation {
    pub sentence_index: usize,
    pub label: PositionLabel,
    pub span: SentenceSpan,
    pub decoded: String,
    /// Present iff `verdict` is valid.
    pub extracted: Option<String>,
    pub verdict: Verdict,
}

impl CandidateTranslation {
    /// Validates `outcome` and extracts the sentence at the label position.
    pub fn evaluate(
        sentence_index: usize,
        label: PositionLabel,
        span: SentenceSpan,
        outcome: &Result<String, String>,
        rules: &ValidityRules,
        sep: &SeparatorToken,
    ) -> Self {
        let (decoded, verdict) = match outcome {
            Ok(text) => (text.clone(), check_validity(text, span.len, rules, sep)),
            Err(message) => (
                String::new(),
                Verdict::Invalid(InvalidReason::TranslationFailed {
                    message: message.clone(),
                }),
            ),
        };
        let extracted = verdict.is_valid().then(|| {
            split_on_separator(&decoded, sep).swap_remove(usize::from(label.position()) - 1)
        });
        Self {
            sentence_index,
            label,
            span,
            decoded,
            extracted,
            verdict,
        }
    }
}

/// The extracted sentence of the first cascade label that has a valid
/// candidate, with that label. `None` when nothing in the cascade is valid.
pub fn select_final<'a>(
    candidates: &'a [CandidateTranslation],
    cascade: &Cascade,
) -> Option<(&'a str, PositionLabel)> {
    cascade.0.iter().find_map(|label| {
        candidates
            .iter()
            .find(|c| c.label == *label)
            .and_then(|c| c.extracted.as_deref())
            .map(|s| (s, *label))
    })
}

/// Sessions per label; labels without an explicit backend use the default.
pub struct PositionalBackends {
    sessions: Vec<Session>,
    by_label: HashMap<PositionLabel, usize>,
}

impl PositionalBackends {
    pub fn single(session: Session) -> Self {
        Self {
            sessions: vec![session],
            by_label: HashMap::new(),
        }
    }

    pub fn with_label(mut self, label: PositionLabel, session: Session) -> Self {
        self.sessions.push(session);
        self.by_label.insert(label, self.sessions.len() - 1);
        self
    }

    fn index_for(&self, label: PositionLabel) -> usize {
        self.by_label.get(&label).copied().unwrap_or(0)
    }

    pub fn request_count(&self) -> u64 {
        self.sessions.iter().map(Session::request_count).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelUsage {
    pub chosen: usize,
    pub validated: usize,
    /// Invalid verdicts by reason kind.
    pub invalid: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageStats {
    pub per_label: BTreeMap<PositionLabel, LabelUsage>,
}

impl UsageStats {
    pub fn merge(&mut self, other: &UsageStats) {
        for (label, usage) in &other.per_label {
            let entry = self.per_label.entry(*label).or_default();
            entry.chosen += usage.chosen;
            entry.validated += usage.validated;
            for (k, v) in &usage.invalid {
                *entry.invalid.entry(k.clone()).or_default() += v;
            }
        }
    }

    pub fn total_chosen(&self) -> usize {
        self.per_label.values().map(|u| u.chosen).sum()
    }

    pub fn total_validated(&self) -> usize {
        self.per_label.values().map(|u| u.validated).sum()
    }

    /// Labels in descending context size, then ascending position.
    fn ordered(&self) -> Vec<(&PositionLabel, &LabelUsage)> {
        let mut rows: Vec<_> = self.per_label.iter().collect();
        rows.sort_by_key(|(l, _)| (std::cmp::Reverse(l.context_size()), l.position()));
        rows
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for (label, usage) in self.ordered() {
            let row = serde_json::json!({
                "label": label.to_string(),
                "chosen": usage.chosen,
                "validated": usage.validated,
                "invalid": usage.invalid,
            });
            out.push_str(&row.to_string());
            out.push('\n');
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<6} {:>8} {:>10} {:>8} {:>7} {:>9} {:>7}\n",
            "label", "chosen", "validated", "count", "repeat", "word-len", "failed"
        );
        for (label, u) in self.ordered() {
            let inv = |k: &str| u.invalid.get(k).copied().unwrap_or(0);
            out.push_str(&format!(
                "{:<6} {:>8} {:>10} {:>8} {:>7} {:>9} {:>7}\n",
                label.to_string(),
                u.chosen,
                u.validated,
                inv("sentence-count"),
                inv("repeat"),
                inv("word-len"),
                inv("failed"),
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionalTranslation {
    pub doc_id: String,
    pub sentences: Vec<String>,
    pub chosen: Vec<PositionLabel>,
    pub stats: UsageStats,
}

/// Translates every context span needed by `cascade` (each distinct span
/// once per backend), validates all candidates and picks per sentence.
pub fn run_document_positional(
    doc: &Document,
    backends: &PositionalBackends,
    rules: &ValidityRules,
    cascade: &Cascade,
    sep: &SeparatorToken,
) -> Result<PositionalTranslation, StrategyError> {
    rules.validate()?;
    let n = doc.len();
    let plan: Vec<Vec<(PositionLabel, SentenceSpan)>> = (0..n)
        .map(|i| {
            candidates_for(n, i)
                .into_iter()
                .filter(|(label, _)| cascade.0.contains(label))
                .collect()
        })
        .collect();

    // distinct (backend, span) pairs, in a stable order
    let mut unique: BTreeMap<(usize, usize, usize), Option<Result<String, String>>> =
        BTreeMap::new();
    for (label, span) in plan.iter().flatten() {
        unique.insert((backends.index_for(*label), span.start, span.len), None);
    }
    for (backend, session) in backends.sessions.iter().enumerate() {
        let keys: Vec<(usize, usize, usize)> =
            unique.keys().filter(|k| k.0 == backend).copied().collect();
        if keys.is_empty() {
            continue;
        }
        let texts: Vec<String> = keys
            .iter()
            .map(|&(_, start, len)| encode_sentences(doc.texts().skip(start).take(len), sep))
            .collect();
        for (key, outcome) in keys.into_iter().zip(session.translate(&texts)?) {
            unique.insert(key, Some(outcome));
        }
    }

    let mut stats = UsageStats::default();
    let mut sentences = Vec::with_capacity(n);
    let mut chosen = Vec::with_capacity(n);
    for (i, candidates) in plan.into_iter().enumerate() {
        let evaluated: Vec<CandidateTranslation> = candidates
            .into_iter()
            .map(|(label, span)| {
                let key = (backends.index_for(label), span.start, span.len);
                let outcome = unique[&key].as_ref().expect("every span was translated");
                CandidateTranslation::evaluate(i, label, span, outcome, rules, sep)
            })
            .collect();
        for c in &evaluated {
            let usage = stats.per_label.entry(c.label).or_default();
            usage.validated += 1;
            if let Verdict::Invalid(reason) = &c.verdict {
                *usage.invalid.entry(reason.kind().to_string()).or_default() += 1;
            }
        }
        let (text, label) =
            select_final(&evaluated, cascade).ok_or_else(|| StrategyError::NoValidCandidate {
                doc_id: doc.doc_id.clone(),
                sentence_index: i,
            })?;
        stats.per_label.entry(label).or_default().chosen += 1;
        sentences.push(text.to_string());
        chosen.push(label);
    }
    Ok(PositionalTranslation {
        doc_id: doc.doc_id.clone(),
        sentences,
        chosen,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::translate::{FaultKind, FaultTrigger, MockSpec, MockTranslator, Transform};
    use std::sync::Arc;

    fn label(s: &str) -> PositionLabel {
        s.parse().unwrap()
    }

    fn labels_of(cands: &[(PositionLabel, SentenceSpan)]) -> Vec<String> {
        cands.iter().map(|(l, _)| l.to_string()).collect()
    }

    #[test]
    fn labels_parse_and_print() {
        assert_eq!(label("2/3").to_string(), "2nd/3");
        assert_eq!(label("3rd/3"), label("3/3"));
        assert_eq!(label("1st/1").to_string(), "1st/1");
        for bad in ["0/3", "4/3", "1/4", "x/3", "2"] {
            assert!(bad.parse::<PositionLabel>().is_err(), "{bad}");
        }
        assert_eq!(Cascade::default().to_string(), "2/3,1/3,2/2,1/2,1/1");
        assert_eq!(
            "2/3,1/3,2/2,1/2,1/1".parse::<Cascade>().unwrap(),
            Cascade::default()
        );
    }

    #[test]
    fn candidate_feasibility() {
        assert_eq!(
            labels_of(&candidates_for(5, 0)),
            vec!["1st/3", "1st/2", "1st/1"]
        );
        assert_eq!(candidates_for(5, 2).len(), 6);
        assert_eq!(
            labels_of(&candidates_for(5, 4)),
            vec!["3rd/3", "2nd/2", "1st/1"]
        );
        assert_eq!(labels_of(&candidates_for(1, 0)), vec!["1st/1"]);
        let mid = candidates_for(5, 2);
        let (_, span) = mid.iter().find(|(l, _)| *l == label("2/3")).unwrap();
        assert_eq!(*span, SentenceSpan::new(1, 3));
    }

    #[test]
    fn validity_sentence_count() {
        let sep = SeparatorToken::default();
        let rules = ValidityRules::default();
        assert!(check_validity("a <SEP> b <SEP> c", 3, &rules, &sep).is_valid());
        assert_eq!(
            check_validity("a <SEP> b", 3, &rules, &sep),
            Verdict::Invalid(InvalidReason::SentenceCount {
                expected: 3,
                found: 2
            })
        );
    }

    #[test]
    fn validity_boundaries() {
        let sep = SeparatorToken::default();
        let rules = ValidityRules::default();
        let rep = |n: usize| vec!["la"; n].join(" ");
        assert!(check_validity(&rep(20), 1, &rules, &sep).is_valid());
        assert!(matches!(
            check_validity(&rep(21), 1, &rules, &sep),
            Verdict::Invalid(InvalidReason::WordRepeat { count: 21, .. })
        ));
        assert!(check_validity(&"é".repeat(49), 1, &rules, &sep).is_valid());
        assert!(matches!(
            check_validity(&"é".repeat(50), 1, &rules, &sep),
            Verdict::Invalid(InvalidReason::WordLength { chars: 50, .. })
        ));
    }

    #[test]
    fn validity_reason_order() {
        let sep = SeparatorToken::default();
        let rules = ValidityRules::default();
        let both = format!("{} {}", vec!["la"; 21].join(" "), "x".repeat(60));
        assert!(matches!(
            check_validity(&both, 1, &rules, &sep),
            Verdict::Invalid(InvalidReason::WordRepeat { .. })
        ));
        assert!(matches!(
            check_validity(&both, 2, &rules, &sep),
            Verdict::Invalid(InvalidReason::SentenceCount { .. })
        ));
        // separators are not words
        let many_seps = ["w"; 3].join(" <SEP> ");
        assert!(check_validity(
            &many_seps,
            3,
            &ValidityRules {
                max_word_repeats: 3,
                max_word_len: 49
            },
            &sep
        )
        .is_valid());
    }

    fn cand(label_s: &str, valid: bool) -> CandidateTranslation {
        let l = label(label_s);
        let span = SentenceSpan::new(0, usize::from(l.context_size()));
        let text = (0..span.len)
            .map(|i| format!("{label_s}#{i}"))
            .collect::<Vec<_>>()
            .join(" <SEP> ");
        // four segments never match a context of at most three
        let outcome = if valid {
            Ok(text)
        } else {
            Ok(String::from("a <SEP> b <SEP> c <SEP> d"))
        };
        CandidateTranslation::evaluate(
            0,
            l,
            span,
            &outcome,
            &ValidityRules::default(),
            &SeparatorToken::default(),
        )
    }

    #[test]
    fn cascade_selection() {
        let cascade = Cascade::default();
        let all_valid: Vec<_> = ["1/3", "2/3", "3/3", "1/2", "2/2", "1/1"]
            .iter()
            .map(|l| cand(l, true))
            .collect();
        let (text, l) = select_final(&all_valid, &cascade).unwrap();
        assert_eq!(l, label("2/3"));
        assert_eq!(text, "2/3#1");

        let mut no_mid = all_valid.clone();
        no_mid[1] = cand("2/3", false);
        assert_eq!(select_final(&no_mid, &cascade).unwrap().1, label("1/3"));

        let only_single: Vec<_> = ["1/3", "2/3", "3/3", "1/2", "2/2"]
            .iter()
            .map(|l| cand(l, false))
            .chain([cand("1/1", true)])
            .collect();
        assert_eq!(
            select_final(&only_single, &cascade).unwrap().1,
            label("1/1")
        );

        let none: Vec<_> = ["3/3", "1/1"].iter().map(|l| cand(l, false)).collect();
        assert!(select_final(&none, &cascade).is_none());
        // 3rd/3 is never taken by the default cascade, even when it is the only valid one
        let third = vec![cand("3/3", true), cand("1/1", false)];
        assert!(select_final(&third, &cascade).is_none());
    }

    fn backends(spec: MockSpec) -> PositionalBackends {
        PositionalBackends::single(Session::new(Arc::new(MockTranslator::new(spec))))
    }

    #[test]
    fn identity_document() {
        let doc = Document::from_texts("d", &["One.", "Two.", "Three.", "Four."]);
        let out = run_document_positional(
            &doc,
            &backends(MockSpec::new(Transform::Identity)),
            &ValidityRules::default(),
            &Cascade::default(),
            &SeparatorToken::default(),
        )
        .unwrap();
        assert_eq!(out.sentences, doc.texts().collect::<Vec<_>>());
        let chosen: Vec<String> = out.chosen.iter().map(ToString::to_string).collect();
        assert_eq!(chosen, vec!["1st/3", "2nd/3", "2nd/3", "2nd/2"]);
        assert_eq!(out.stats.total_chosen(), 4);
    }

    #[test]
    fn three_sentence_contexts_corrupted() {
        let doc = Document::from_texts("d", &["a.", "b.", "c.", "d.", "e."]);
        let spec = MockSpec::new(Transform::Identity).with_fault(
            FaultKind::WordLoop(25),
            FaultTrigger::MinSegments(3),
            0,
        );
        let out = run_document_positional(
            &doc,
            &backends(spec),
            &ValidityRules::default(),
            &Cascade::default(),
            &SeparatorToken::default(),
        )
        .unwrap();
        assert_eq!(out.sentences, doc.texts().collect::<Vec<_>>());
        assert!(out.chosen.iter().all(|l| l.context_size() < 3));
        assert_eq!(out.chosen[0], label("1/2"));
        assert_eq!(out.chosen[2], label("2/2"));
        assert_eq!(out.stats.per_label[&label("2/3")].invalid["repeat"], 3);
    }

    #[test]
    fn two_sentence_document() {
        let doc = Document::from_texts("d", &["x.", "y."]);
        let out = run_document_positional(
            &doc,
            &backends(MockSpec::new(Transform::Identity)),
            &ValidityRules::default(),
            &Cascade::default(),
            &SeparatorToken::default(),
        )
        .unwrap();
        let allowed = [label("1/2"), label("2/2"), label("1/1")];
        assert!(out.chosen.iter().all(|l| allowed.contains(l)));
        assert_eq!(out.stats.total_chosen(), 2);
    }

    #[test]
    fn no_valid_candidate_is_an_error() {
        let doc = Document::from_texts("d", &["x."]);
        let spec = MockSpec::new(Transform::Identity).with_fault(
            FaultKind::LongWord(80),
            FaultTrigger::Every(1),
            0,
        );
        let err = run_document_positional(
            &doc,
            &backends(spec),
            &ValidityRules::default(),
            &Cascade::default(),
            &SeparatorToken::default(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            StrategyError::NoValidCandidate {
                sentence_index: 0,
                ..
            }
        ));
    }

    #[test]
    fn per_label_backend() {
        let doc = Document::from_texts("d", &["a b.", "c d.", "e f."]);
        let bk = PositionalBackends::single(Session::new(Arc::new(MockTranslator::new(
            MockSpec::new(Transform::Identity),
        ))))
        .with_label(
            label("2/3"),
            Session::new(Arc::new(MockTranslator::new(MockSpec::new(
                Transform::WordReverse,
            )))),
        );
        let out = run_document_positional(
            &doc,
            &bk,
            &ValidityRules::default(),
            &Cascade::default(),
            &SeparatorToken::default(),
        )
        .unwrap();
        assert_eq!(out.sentences, vec!["a b.", "d. c", "e f."]);
    }
}
