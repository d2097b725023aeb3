//! Deterministic in-process translator with optional fault injection.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{TranslateError, TranslationRequest, TranslationResponse, Translator};
use crate::corpus::SeparatorToken;

pub const DEFAULT_LOOP_REPEATS: usize = 21;
pub const DEFAULT_LONG_WORD_LEN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    Identity,
    Uppercase,
    /// Reverses the whitespace-delimited words of each separator-delimited
    /// sentence.
    WordReverse,
}

impl FromStr for Transform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(Self::Identity),
            "uppercase" => Ok(Self::Uppercase),
            "word-reverse" | "word-reverse-per-sentence" => Ok(Self::WordReverse),
            other => Err(format!("unknown mock transform {other:?}")),
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Identity => "identity",
            Self::Uppercase => "uppercase",
            Self::WordReverse => "word-reverse",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultKind {
    /// Removes the first separator (and one adjoining space).
    DropSeparator,
    /// Appends the last output word this many more times.
    WordLoop(usize),
    /// Appends a word of this many characters.
    LongWord(usize),
    Empty,
}

/// Deterministic predicate selecting which requests get faulted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultTrigger {
    /// Every request whose id is a positive multiple of `n`.
    Every(u64),
    Id(u64),
    /// Requests whose seeded content hash is divisible by `n`.
    Hash(u64),
    /// Requests with at least this many separator-delimited sentences.
    MinSegments(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fault {
    pub kind: FaultKind,
    pub trigger: FaultTrigger,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockSpec {
    pub transform: Transform,
    pub fault: Option<Fault>,
    pub separator: SeparatorToken,
}

impl MockSpec {
    pub fn new(transform: Transform) -> Self {
        Self {
            transform,
            fault: None,
            separator: SeparatorToken::default(),
        }
    }

    pub fn with_fault(mut self, kind: FaultKind, trigger: FaultTrigger, seed: u64) -> Self {
        self.fault = Some(Fault {
            kind,
            trigger,
            seed,
        });
        self
    }

    pub fn with_separator(mut self, separator: SeparatorToken) -> Self {
        self.separator = separator;
        self
    }
}

impl fmt::Display for MockSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.transform)?;
        let mut params = Vec::new();
        if let Some(fault) = &self.fault {
            params.push(match fault.kind {
                FaultKind::DropSeparator => "fault=drop-separator".to_string(),
                FaultKind::WordLoop(n) => format!("fault=word-loop&n={n}"),
                FaultKind::LongWord(len) => format!("fault=long-word&len={len}"),
                FaultKind::Empty => "fault=empty".to_string(),
            });
            params.push(match fault.trigger {
                FaultTrigger::Every(n) => format!("every={n}"),
                FaultTrigger::Id(id) => format!("id={id}"),
                FaultTrigger::Hash(n) => format!("hash={n}"),
                FaultTrigger::MinSegments(k) => format!("min-segments={k}"),
            });
            params.push(format!("seed={}", fault.seed));
        }
        if self.separator != SeparatorToken::default() {
            params.push(format!("sep={}", self.separator));
        }
        if !params.is_empty() {
            write!(f, "?{}", params.join("&"))?;
        }
        Ok(())
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("parameter {key}={value:?} is not a valid number"))
}

impl FromStr for MockSpec {
    type Err = String;

    /// Parses `transform[?key=value&...]`, for example
    /// `word-reverse?fault=drop-separator&every=50&seed=9`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (transform, query) = s.split_once('?').unwrap_or((s, ""));
        let mut spec = MockSpec::new(transform.parse()?);
        let mut kind = None;
        let mut trigger = None;
        let mut seed = 0u64;
        let mut repeats = DEFAULT_LOOP_REPEATS;
        let mut long_len = DEFAULT_LONG_WORD_LEN;
        for pair in query.split('&').filter(|p| !p.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| format!("parameter {pair:?} is not key=value"))?;
            match key {
                "fault" => kind = Some(value.to_string()),
                "every" => {
                    let n: u64 = parse_num(key, value)?;
                    if n == 0 {
                        return Err("every must be at least 1".to_string());
                    }
                    trigger = Some(FaultTrigger::Every(n));
                }
                "id" => trigger = Some(FaultTrigger::Id(parse_num(key, value)?)),
                "hash" => {
                    let n: u64 = parse_num(key, value)?;
                    if n == 0 {
                        return Err("hash modulus must be at least 1".to_string());
                    }
                    trigger = Some(FaultTrigger::Hash(n));
                }
                "min-segments" => trigger = Some(FaultTrigger::MinSegments(parse_num(key, value)?)),
                "seed" => seed = parse_num(key, value)?,
                "n" => repeats = parse_num(key, value)?,
                "len" => long_len = parse_num(key, value)?,
                "sep" => {
                    spec.separator = SeparatorToken::new(value).map_err(|e| e.to_string())?;
                }
                other => return Err(format!("unknown mock parameter {other:?}")),
            }
        }
        if let Some(kind) = kind {
            let kind = match kind.as_str() {
                "drop-separator" => FaultKind::DropSeparator,
                "word-loop" => FaultKind::WordLoop(repeats),
                "long-word" => FaultKind::LongWord(long_len),
                "empty" => FaultKind::Empty,
                other => return Err(format!("unknown fault kind {other:?}")),
            };
            spec.fault = Some(Fault {
                kind,
                trigger: trigger.unwrap_or(FaultTrigger::Every(1)),
                seed,
            });
        } else if trigger.is_some() {
            return Err("fault trigger given without fault=<kind>".to_string());
        }
        Ok(spec)
    }
}

/// 64-bit FNV-1a over the seed bytes followed by the text.
fn seeded_hash(seed: u64, text: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    for byte in seed.to_le_bytes().iter().chain(text.as_bytes()) {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(PRIME);
    }
    hash
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MockTranslator {
    spec: MockSpec,
}

impl MockTranslator {
    pub fn new(spec: MockSpec) -> Self {
        Self { spec }
    }

    pub fn spec(&self) -> &MockSpec {
        &self.spec
    }

    fn transform(&self, text: &str) -> String {
        let sep = self.spec.separator.as_str();
        match self.spec.transform {
            Transform::Identity => text.to_string(),
            Transform::Uppercase => text
                .split(sep)
                .map(str::to_uppercase)
                .collect::<Vec<_>>()
                .join(sep),
            Transform::WordReverse => text
                .split(sep)
                .map(|segment| {
                    let mut words: Vec<&str> = segment.split_whitespace().collect();
                    words.reverse();
                    words.join(" ")
                })
                .collect::<Vec<_>>()
                .join(&self.spec.separator.join_str()),
        }
    }

    fn triggered(&self, fault: &Fault, id: u64, text: &str) -> bool {
        match fault.trigger {
            FaultTrigger::Every(n) => id > 0 && id.is_multiple_of(n),
            FaultTrigger::Id(target) => id == target,
            FaultTrigger::Hash(n) => seeded_hash(fault.seed, text).is_multiple_of(n),
            FaultTrigger::MinSegments(k) => {
                text.matches(self.spec.separator.as_str()).count() + 1 >= k
            }
        }
    }

    fn inject(&self, kind: FaultKind, mut out: String) -> String {
        let sep = self.spec.separator.as_str();
        match kind {
            FaultKind::DropSeparator => {
                let spaced = self.spec.separator.join_str();
                if let Some(pos) = out.find(&spaced) {
                    out.replace_range(pos..pos + spaced.len(), " ");
                } else if let Some(pos) = out.find(sep) {
                    out.replace_range(pos..pos + sep.len(), "");
                }
                out
            }
            FaultKind::WordLoop(n) => {
                let word = out.split_whitespace().last().unwrap_or("loop").to_string();
                for _ in 0..n {
                    out.push(' ');
                    out.push_str(&word);
                }
                out
            }
            FaultKind::LongWord(len) => {
                out.push(' ');
                out.extend(std::iter::repeat_n('x', len));
                out
            }
            FaultKind::Empty => String::new(),
        }
    }

    /// Translates a single request. Pure in `(spec, id, text)`.
    pub fn translate_one(&self, id: u64, text: &str) -> String {
        let out = self.transform(text);
        match &self.spec.fault {
            Some(fault) if self.triggered(fault, id, text) => self.inject(fault.kind, out),
            _ => out,
        }
    }
}

impl Translator for MockTranslator {
    fn translate_batch(
        &self,
        requests: &[TranslationRequest],
    ) -> Result<Vec<TranslationResponse>, TranslateError> {
        Ok(requests
            .iter()
            .map(|r| TranslationResponse {
                id: r.id,
                outcome: Ok(self.translate_one(r.id, &r.text)),
            })
            .collect())
    }
}
