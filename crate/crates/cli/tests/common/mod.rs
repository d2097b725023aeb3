#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use docspan_core::corpus::{serialize_document_corpus, CorpusFormat};
use docspan_core::schedule::{WindowLimits, WindowPlan};
use docspan_core::{Document, ParallelDocument, Sentence};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LETTERS: &[char] = &[
    'a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i', 'j', 'k', 'l', 'm', 'n', 'o', 'p', 'r', 's', 't',
    'u', 'v', 'y', 'z', 'č', 'ř', 'ž', 'é', 'á',
];

pub struct Gen(ChaCha8Rng);

impl Gen {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.below(hi - lo + 1)
    }

    pub fn word(&mut self) -> String {
        let len = self.range(3, 10);
        (0..len)
            .map(|_| LETTERS[self.below(LETTERS.len())])
            .collect()
    }

    pub fn sentence(&mut self, max_words: usize) -> String {
        let n = self.range(1, max_words);
        let mut s = (0..n).map(|_| self.word()).collect::<Vec<_>>().join(" ");
        s.push('.');
        s
    }

    pub fn document(&mut self, id: &str, lo: usize, hi: usize) -> Document {
        let n = self.range(lo, hi);
        let texts: Vec<String> = (0..n)
            .map(|_| {
                let max_words = if self.below(25) == 0 { 90 } else { 25 };
                self.sentence(max_words)
            })
            .collect();
        Document::from_texts(id, &texts)
    }

    pub fn parallel(&mut self, id: &str, lo: usize, hi: usize) -> ParallelDocument {
        let src = self.document(id, lo, hi);
        let tgt: Vec<Sentence> = (0..src.len())
            .map(|_| Sentence::new(self.sentence(20)).unwrap())
            .collect();
        ParallelDocument::new(id, src.sentences, tgt).unwrap()
    }

    /// Blank-line corpus documents get positional ids.
    pub fn corpus(&mut self, docs: usize, lo: usize, hi: usize) -> Vec<Document> {
        (0..docs)
            .map(|i| self.document(&format!("doc{i}"), lo, hi))
            .collect()
    }
}

pub fn write_corpus(path: &Path, docs: &[Document]) {
    std::fs::write(
        path,
        serialize_document_corpus(docs, CorpusFormat::BlankLine),
    )
    .unwrap();
}

pub fn docspan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_docspan"))
        .args(args)
        .stdin(Stdio::null())
        .output()
        .expect("docspan runs")
}

pub fn docspan_ok(args: &[&str]) -> Output {
    let out = docspan(args);
    assert!(
        out.status.success(),
        "docspan {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/table5")
}

pub fn manifest_counts(path: &Path) -> serde_json::Map<String, serde_json::Value> {
    let text = std::fs::read_to_string(path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["counts"].as_object().unwrap().clone()
}

pub fn count(counts: &serde_json::Map<String, serde_json::Value>, key: &str) -> u64 {
    counts[key]
        .as_u64()
        .unwrap_or_else(|| panic!("count {key} missing"))
}

pub fn nonempty_lines(path: &Path) -> usize {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.is_empty())
        .count()
}

fn chars(s: &str) -> usize {
    s.chars().count()
}

fn joined(doc: &Document, range: std::ops::Range<usize>) -> String {
    doc.sentences[range]
        .iter()
        .map(|s| s.text())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Independent checker for overlapping-window plans.
pub fn window_violations(
    doc: &Document,
    plans: &[WindowPlan],
    limits: &WindowLimits,
) -> Vec<String> {
    let mut out = Vec::new();
    let mut owner = vec![0usize; doc.len()];
    for (w, p) in plans.iter().enumerate() {
        for i in p.main.range() {
            owner[i] += 1;
        }
        let main_len = chars(&joined(doc, p.main.range()));
        if main_len > limits.main_max && !(p.main.len == 1 && p.oversized) {
            out.push(format!("{} window {w}: main {main_len} chars", doc.doc_id));
        }
        if p.post.start != p.main.end() {
            out.push(format!(
                "{} window {w}: post does not follow main",
                doc.doc_id
            ));
        }
        let pre_len = chars(&p.pre_text);
        if pre_len > limits.pre_max {
            out.push(format!("{} window {w}: pre {pre_len} chars", doc.doc_id));
        }
        if !p.pre_text.is_empty() {
            let before = joined(doc, 0..p.main.start);
            match before.strip_suffix(p.pre_text.as_str()) {
                None => out.push(format!(
                    "{} window {w}: pre is not a suffix of the preceding text",
                    doc.doc_id
                )),
                Some(head) => {
                    if !(head.is_empty() || head.ends_with(' ')) || p.pre_text.starts_with(' ') {
                        out.push(format!(
                            "{} window {w}: pre starts inside a word",
                            doc.doc_id
                        ));
                    }
                }
            }
        }
        if p.post.len > 0 {
            let post_len = chars(&joined(doc, p.post.range()));
            if pre_len + main_len + post_len > limits.total_max {
                out.push(format!(
                    "{} window {w}: total {}",
                    doc.doc_id,
                    pre_len + main_len + post_len
                ));
            }
        }
    }
    for (i, n) in owner.iter().enumerate() {
        if *n != 1 {
            out.push(format!("{} sentence {i} in {n} main spans", doc.doc_id));
        }
    }
    out
}
