#![allow(dead_code)]

use docspan_core::{Document, ParallelDocument, Sentence};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LETTERS: &[char] = &[
    'a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i', 'j', 'k', 'l', 'm', 'n', 'o', 'p', 'r', 's', 't',
    'u', 'v', 'y', 'z', 'č', 'ř', 'ž', 'é', 'á',
];

/// Small seeded generator for synthetic documents.
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

    /// Document of `lo..=hi` sentences, mostly short with the occasional
    /// very long sentence.
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
}
