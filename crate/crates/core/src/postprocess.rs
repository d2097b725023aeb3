//! Output clean-up: collapsing runaway phrase repetitions and converting
//! straight double quotes to Czech typographic quotes („…“).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::SeparatorToken;

pub const LOW_QUOTE: char = '\u{201E}';
pub const HIGH_QUOTE: char = '\u{201C}';

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuleError {
    #[error("phrase lengths must satisfy 1 <= min <= max")]
    PhraseLengths,
    #[error("max_allowed_runs must be at least 1")]
    AllowedRuns,
    #[error("keep must be between 1 and max_allowed_runs")]
    Keep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepetitionRule {
    pub min_phrase_words: usize,
    pub max_phrase_words: usize,
    /// Runs longer than this are collapsed.
    pub max_allowed_runs: usize,
    /// Copies left after collapsing a run.
    pub keep: usize,
}

impl Default for RepetitionRule {
    fn default() -> Self {
        Self {
            min_phrase_words: 1,
            max_phrase_words: 4,
            max_allowed_runs: 2,
            keep: 1,
        }
    }
}

impl RepetitionRule {
    pub fn validate(&self) -> Result<(), RuleError> {
        if self.min_phrase_words == 0 || self.min_phrase_words > self.max_phrase_words {
            return Err(RuleError::PhraseLengths);
        }
        if self.max_allowed_runs == 0 {
            return Err(RuleError::AllowedRuns);
        }
        if self.keep == 0 || self.keep > self.max_allowed_runs {
            return Err(RuleError::Keep);
        }
        Ok(())
    }
}

/// Byte ranges of the whitespace-delimited tokens of `text`.
fn token_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                spans.push((s, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

/// One left-to-right pass. Returns `None` if nothing was collapsed.
fn collapse_pass(text: &str, rule: &RepetitionRule) -> Option<String> {
    let spans = token_spans(text);
    let tokens: Vec<&str> = spans.iter().map(|&(a, b)| &text[a..b]).collect();
    let mut out = String::with_capacity(text.len());
    let mut last_end = 0;
    let mut changed = false;
    let mut i = 0;
    while i < tokens.len() {
        let mut collapsed = false;
        for len in (rule.min_phrase_words..=rule.max_phrase_words).rev() {
            if i + len > tokens.len() {
                continue;
            }
            let phrase = &tokens[i..i + len];
            let mut runs = 1;
            while i + (runs + 1) * len <= tokens.len()
                && tokens[i + runs * len..i + (runs + 1) * len] == *phrase
            {
                runs += 1;
            }
            if runs > rule.max_allowed_runs {
                out.push_str(&text[last_end..spans[i].0]);
                let kept = vec![phrase.join(" "); rule.keep];
                out.push_str(&kept.join(" "));
                i += runs * len;
                last_end = spans[i - 1].1;
                collapsed = true;
                changed = true;
                break;
            }
        }
        if !collapsed {
            out.push_str(&text[last_end..spans[i].1]);
            last_end = spans[i].1;
            i += 1;
        }
    }
    out.push_str(&text[last_end..]);
    changed.then_some(out)
}

/// Collapses every run of more than `max_allowed_runs` adjacent copies of a
/// 1..=4 word phrase down to `keep` copies, longest phrases first. Passes
/// repeat until nothing changes, so the result is a fixed point. Whitespace
/// outside collapsed regions is left as it was.
pub fn remove_repetitions(text: &str, rule: &RepetitionRule) -> String {
    let mut current = text.to_string();
    while let Some(next) = collapse_pass(&current, rule) {
        current = next;
    }
    current
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuoteConversion {
    pub text: String,
    /// An odd number of straight quotes was seen in some sentence.
    pub unpaired: bool,
}

fn convert_segment(segment: &str, out: &mut String) -> bool {
    let mut open = false;
    for c in segment.chars() {
        if c == '"' {
            out.push(if open { HIGH_QUOTE } else { LOW_QUOTE });
            open = !open;
        } else {
            out.push(c);
        }
    }
    open
}

/// Straight double quotes alternate „ / “ within the line.
pub fn convert_quotes(text: &str) -> String {
    convert_quotes_checked(text, None).text
}

/// Like [`convert_quotes`], restarting the alternation after every
/// separator token when one is given.
pub fn convert_quotes_checked(text: &str, sep: Option<&SeparatorToken>) -> QuoteConversion {
    let mut out = String::with_capacity(text.len() + 8);
    let mut unpaired = false;
    match sep {
        Some(sep) => {
            for (i, segment) in text.split(sep.as_str()).enumerate() {
                if i > 0 {
                    out.push_str(sep.as_str());
                }
                unpaired |= convert_segment(segment, &mut out);
            }
        }
        None => unpaired = convert_segment(text, &mut out),
    }
    if unpaired {
        tracing::warn!(line = %text, "unpaired straight quote");
    }
    QuoteConversion {
        text: out,
        unpaired,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PostprocessOptions {
    pub repetitions: Option<RepetitionRule>,
    pub quotes: bool,
}

impl PostprocessOptions {
    /// Windowed-decoding pipelines: both rules.
    pub fn windowed() -> Self {
        Self {
            repetitions: Some(RepetitionRule::default()),
            quotes: true,
        }
    }

    /// Positional-decoding pipelines: quote conversion only.
    pub fn positional() -> Self {
        Self {
            repetitions: None,
            quotes: true,
        }
    }

    pub fn is_noop(&self) -> bool {
        self.repetitions.is_none() && !self.quotes
    }

    pub fn apply(&self, line: &str) -> (String, bool) {
        self.apply_with(line, None)
    }

    /// Quotes are converted before repetitions are removed: conversion can
    /// turn alternating straight quotes into a run of identical tokens,
    /// while removal never introduces a straight quote, so this order makes
    /// the combined pass idempotent. With `sep`, quote pairing restarts
    /// after every separator token.
    pub fn apply_with(&self, line: &str, sep: Option<&SeparatorToken>) -> (String, bool) {
        let (text, unpaired) = if self.quotes {
            let conv = convert_quotes_checked(line, sep);
            (conv.text, conv.unpaired)
        } else {
            (line.to_string(), false)
        };
        let text = match &self.repetitions {
            Some(rule) => remove_repetitions(&text, rule),
            None => text,
        };
        (text, unpaired)
    }
}
