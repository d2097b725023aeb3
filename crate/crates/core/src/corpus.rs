//! Document-delimited corpora: sentences, documents, parallel documents and
//! the two on-disk interchange formats.
//!
//! Every character budget in the toolkit is measured with
//! [`span_char_length`]: Unicode scalar values of the sentences plus one
//! per single-space join. Separator tokens never count.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_SEPARATOR: &str = "<SEP>";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("separator token must be non-empty and contain no whitespace, got {0:?}")]
    InvalidSeparator(String),
    #[error("sentence text contains a newline")]
    EmbeddedNewline,
    #[error("line {line}: sentence contains the separator token {separator:?}")]
    SeparatorCollision { line: usize, separator: String },
    #[error("line {line}: expected `doc_id<TAB>sentence`")]
    MalformedLine { line: usize },
    #[error("line {line}: document {doc_id:?} is not contiguous")]
    NonContiguousDocument { line: usize, doc_id: String },
    #[error("corpus lengths differ: {source_docs} source vs {target_docs} target documents")]
    LengthMismatch {
        source_docs: usize,
        target_docs: usize,
    },
    #[error("document {source_id:?} is paired with target document {target_id:?}")]
    DocIdMismatch {
        source_id: String,
        target_id: String,
    },
    #[error(
        "document {doc_id:?}: {source_sentences} source vs {target_sentences} target sentences"
    )]
    SentenceCountMismatch {
        doc_id: String,
        source_sentences: usize,
        target_sentences: usize,
    },
}

/// Reserved token placed between sentences of an encoded sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SeparatorToken(String);

impl SeparatorToken {
    pub fn new(token: impl Into<String>) -> Result<Self, CorpusError> {
        let token = token.into();
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(CorpusError::InvalidSeparator(token));
        }
        Ok(Self(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The string placed between two sentences: space, token, space.
    pub fn join_str(&self) -> String {
        format!(" {} ", self.0)
    }

    pub fn occurs_in(&self, text: &str) -> bool {
        text.contains(self.0.as_str())
    }
}

impl Default for SeparatorToken {
    fn default() -> Self {
        Self(DEFAULT_SEPARATOR.to_string())
    }
}

impl fmt::Display for SeparatorToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for SeparatorToken {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

impl TryFrom<String> for SeparatorToken {
    type Error = CorpusError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<SeparatorToken> for String {
    fn from(value: SeparatorToken) -> Self {
        value.0
    }
}

/// A single line of text; the atomic unit of every context computation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Sentence {
    text: String,
    char_len: usize,
}

impl Sentence {
    pub fn new(text: impl Into<String>) -> Result<Self, CorpusError> {
        let text = text.into();
        if text.contains('\n') {
            return Err(CorpusError::EmbeddedNewline);
        }
        let char_len = text.chars().count();
        Ok(Self { text, char_len })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Number of Unicode scalar values in the text.
    pub fn char_len(&self) -> usize {
        self.char_len
    }

    pub fn into_text(self) -> String {
        self.text
    }
}

impl TryFrom<String> for Sentence {
    type Error = CorpusError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<Sentence> for String {
    fn from(value: Sentence) -> Self {
        value.text
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub sentences: Vec<Sentence>,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, sentences: Vec<Sentence>) -> Self {
        Self {
            doc_id: doc_id.into(),
            sentences,
        }
    }

    /// Builds a document from plain strings. Panics on embedded newlines;
    /// meant for fixtures and tests.
    pub fn from_texts<S: AsRef<str>>(doc_id: impl Into<String>, texts: &[S]) -> Self {
        let sentences = texts
            .iter()
            .map(|t| Sentence::new(t.as_ref()).expect("fixture sentence contains a newline"))
            .collect();
        Self::new(doc_id, sentences)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().map(Sentence::text)
    }
}

/// Source and target sides of one document with equal sentence counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelDocument {
    doc_id: String,
    source: Vec<Sentence>,
    target: Vec<Sentence>,
}

impl ParallelDocument {
    pub fn new(
        doc_id: impl Into<String>,
        source: Vec<Sentence>,
        target: Vec<Sentence>,
    ) -> Result<Self, CorpusError> {
        let doc_id = doc_id.into();
        if source.len() != target.len() {
            return Err(CorpusError::SentenceCountMismatch {
                doc_id,
                source_sentences: source.len(),
                target_sentences: target.len(),
            });
        }
        Ok(Self {
            doc_id,
            source,
            target,
        })
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn source(&self) -> &[Sentence] {
        &self.source
    }

    pub fn target(&self) -> &[Sentence] {
        &self.target
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    /// One sentence per line, one or more blank lines between documents.
    #[default]
    BlankLine,
    /// `doc_id<TAB>sentence` per line, documents contiguous.
    #[serde(rename = "docid-tsv")]
    DocIdTsv,
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "blank" | "blank-line" => Ok(Self::BlankLine),
            "tsv" | "docid-tsv" => Ok(Self::DocIdTsv),
            other => Err(format!(
                "unknown corpus format {other:?} (expected blank-line or docid-tsv)"
            )),
        }
    }
}

/// Identifier given to the `index`-th document of a blank-line corpus.
pub fn positional_doc_id(index: usize) -> String {
    format!("doc{index}")
}

fn check_separator(text: &str, sep: &SeparatorToken, line: usize) -> Result<(), CorpusError> {
    if sep.occurs_in(text) {
        return Err(CorpusError::SeparatorCollision {
            line,
            separator: sep.as_str().to_string(),
        });
    }
    Ok(())
}

/// Parses a corpus in the given format. Lines are stripped of a trailing
/// carriage return only; any sentence containing `sep` is rejected.
pub fn parse_document_corpus(
    input: &str,
    format: CorpusFormat,
    sep: &SeparatorToken,
) -> Result<Vec<Document>, CorpusError> {
    match format {
        CorpusFormat::BlankLine => parse_blank_line(input, sep),
        CorpusFormat::DocIdTsv => parse_docid_tsv(input, sep),
    }
}

fn parse_blank_line(input: &str, sep: &SeparatorToken) -> Result<Vec<Document>, CorpusError> {
    let mut docs = Vec::new();
    let mut current: Vec<Sentence> = Vec::new();
    let mut blank_run = 0usize;
    for (idx, raw) in input.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            if !current.is_empty() {
                docs.push(Document::new(
                    positional_doc_id(docs.len()),
                    std::mem::take(&mut current),
                ));
            }
            blank_run += 1;
            if blank_run == 2 {
                tracing::warn!(
                    line = idx + 1,
                    "consecutive blank lines; empty document skipped"
                );
            }
            continue;
        }
        blank_run = 0;
        check_separator(line, sep, idx + 1)?;
        current.push(Sentence::new(line)?);
    }
    if !current.is_empty() {
        docs.push(Document::new(positional_doc_id(docs.len()), current));
    }
    Ok(docs)
}

fn parse_docid_tsv(input: &str, sep: &SeparatorToken) -> Result<Vec<Document>, CorpusError> {
    let mut docs: Vec<Document> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (idx, raw) in input.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            continue;
        }
        let (doc_id, text) = line
            .split_once('\t')
            .ok_or(CorpusError::MalformedLine { line: idx + 1 })?;
        if doc_id.is_empty() {
            return Err(CorpusError::MalformedLine { line: idx + 1 });
        }
        check_separator(text, sep, idx + 1)?;
        let sentence = Sentence::new(text)?;
        match docs.last_mut() {
            Some(doc) if doc.doc_id == doc_id => doc.sentences.push(sentence),
            _ => {
                if !seen.insert(doc_id.to_string()) {
                    return Err(CorpusError::NonContiguousDocument {
                        line: idx + 1,
                        doc_id: doc_id.to_string(),
                    });
                }
                docs.push(Document::new(doc_id, vec![sentence]));
            }
        }
    }
    Ok(docs)
}

/// Inverse of [`parse_document_corpus`]. The blank-line format does not
/// carry document ids; they are reassigned positionally on re-parse.
pub fn serialize_document_corpus(docs: &[Document], format: CorpusFormat) -> String {
    let mut out = String::new();
    match format {
        CorpusFormat::BlankLine => {
            for (i, doc) in docs.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                for s in &doc.sentences {
                    out.push_str(s.text());
                    out.push('\n');
                }
            }
        }
        CorpusFormat::DocIdTsv => {
            for doc in docs {
                for s in &doc.sentences {
                    out.push_str(&doc.doc_id);
                    out.push('\t');
                    out.push_str(s.text());
                    out.push('\n');
                }
            }
        }
    }
    out
}

/// Pairs source and target documents positionally. Document ids must agree
/// (they always do for blank-line corpora).
pub fn pair_documents(
    src: Vec<Document>,
    tgt: Vec<Document>,
) -> Result<Vec<ParallelDocument>, CorpusError> {
    if src.len() != tgt.len() {
        return Err(CorpusError::LengthMismatch {
            source_docs: src.len(),
            target_docs: tgt.len(),
        });
    }
    src.into_iter()
        .zip(tgt)
        .map(|(s, t)| {
            if s.doc_id != t.doc_id {
                return Err(CorpusError::DocIdMismatch {
                    source_id: s.doc_id,
                    target_id: t.doc_id,
                });
            }
            ParallelDocument::new(s.doc_id, s.sentences, t.sentences)
        })
        .collect()
}

/// Character length of a contiguous span: scalar counts plus one per
/// single-space join between adjacent sentences.
pub fn span_char_length(sentences: &[Sentence]) -> usize {
    let chars: usize = sentences.iter().map(Sentence::char_len).sum();
    chars + sentences.len().saturating_sub(1)
}
