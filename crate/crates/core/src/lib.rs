//! Document-level machine translation orchestration.
//!
//! The crate wraps a sentence/sequence translator with the machinery needed
//! to train and decode with cross-sentence context:
//!
//! * [`corpus`]: document-delimited corpora and character accounting
//! * [`augment`]: context-augmented training sequences
//! * [`schedule`]: overlapping-window decoding with single-sentence backup
//! * [`strategy`]: positional-context decoding with a validity cascade
//! * [`translate`]: translator backends and the line protocol
//! * [`postprocess`]: repetition removal and quote conversion
//! * [`consistency`]: lexical-consistency analysis over word alignments

pub mod augment;
pub mod consistency;
pub mod corpus;
pub mod postprocess;
pub mod schedule;
pub mod strategy;
pub mod translate;

pub use corpus::{Document, ParallelDocument, Sentence, SeparatorToken};
