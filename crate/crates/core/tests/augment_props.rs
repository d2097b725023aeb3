mod common;

use docspan_core::augment::{
    augment_corpus, encode_sentences, enumerate_sequences, enumerate_sequences_with,
    filter_by_length, shuffle_corpus, split_on_separator, upsample, AugmentConfig, BudgetSide,
    Origin, UnitMode,
};
use docspan_core::corpus::{
    parse_document_corpus, serialize_document_corpus, span_char_length, CorpusFormat,
};
use docspan_core::{Document, ParallelDocument, Sentence, SeparatorToken};
use proptest::prelude::*;

use common::Gen;

/// Every `(start, len)` whose space-joined source text fits the budget.
fn brute_force_spans(
    doc: &ParallelDocument,
    budget: usize,
    side: BudgetSide,
) -> Vec<(usize, usize)> {
    let joined = |s: &[Sentence]| {
        s.iter()
            .map(Sentence::text)
            .collect::<Vec<_>>()
            .join(" ")
            .chars()
            .count()
    };
    let n = doc.len();
    let mut out = Vec::new();
    for start in 0..n {
        for len in 1..=n - start {
            let src = joined(&doc.source()[start..start + len]);
            let measured = match side {
                BudgetSide::Source => src,
                BudgetSide::Max => src.max(joined(&doc.target()[start..start + len])),
            };
            if measured <= budget {
                out.push((start, len));
            }
        }
    }
    out
}

fn spans(doc: &ParallelDocument, budget: usize, side: BudgetSide) -> Vec<(usize, usize)> {
    enumerate_sequences_with(doc, budget, side, Origin::Authentic)
        .iter()
        .map(|p| (p.start, p.len()))
        .collect()
}

#[test]
fn enumerate_matches_oracle_on_random_documents() {
    let mut gen = Gen::new(11);
    for i in 0..300 {
        let doc = gen.parallel(&format!("d{i}"), 1, 12);
        let budget = gen.range(5, 1200);
        for side in [BudgetSide::Source, BudgetSide::Max] {
            assert_eq!(
                spans(&doc, budget, side),
                brute_force_spans(&doc, budget, side),
                "doc {i} budget {budget}"
            );
        }
    }
}

#[test]
fn enumerated_pairs_carry_matching_text() {
    let mut gen = Gen::new(12);
    let doc = gen.parallel("d", 8, 8);
    for p in enumerate_sequences(&doc, 400) {
        assert_eq!(p.src_sentences, doc.source()[p.start..p.start + p.len()]);
        assert_eq!(p.tgt_sentences, doc.target()[p.start..p.start + p.len()]);
        assert!(span_char_length(&p.src_sentences) <= 400);
    }
}

#[test]
fn uniform_sentences_reach_fifteen() {
    let text = "x".repeat(65);
    let doc = ParallelDocument::new(
        "d",
        vec![Sentence::new(text.clone()).unwrap(); 40],
        vec![Sentence::new(text).unwrap(); 40],
    )
    .unwrap();
    let longest = enumerate_sequences(&doc, 1000)
        .iter()
        .map(|p| p.len())
        .max()
        .unwrap();
    // 15 * 65 + 14 = 989, 16 * 65 + 15 = 1055
    assert_eq!(longest, 15);
}

#[test]
fn length_filter_keeps_short_sequences() {
    let mut gen = Gen::new(13);
    let doc = gen.parallel("d", 10, 10);
    let pairs = enumerate_sequences(&doc, 1000);
    let kept = filter_by_length(pairs.clone(), 40, UnitMode::EstSubwords);
    let expected: Vec<_> = pairs
        .into_iter()
        .filter(|p| {
            let words = |s: &[Sentence]| {
                s.iter()
                    .map(|x| x.text().split_whitespace().count())
                    .sum::<usize>()
            };
            let est = |w: usize| (3 * w).div_ceil(2);
            est(words(&p.src_sentences)) <= 40 && est(words(&p.tgt_sentences)) <= 40
        })
        .collect();
    assert_eq!(kept, expected);
}

#[test]
fn augmentation_keeps_streams_apart_and_is_seeded() {
    let mut gen = Gen::new(14);
    let auth: Vec<_> = (0..5)
        .map(|i| gen.parallel(&format!("a{i}"), 2, 6))
        .collect();
    let syn: Vec<_> = (0..5)
        .map(|i| gen.parallel(&format!("s{i}"), 2, 6))
        .collect();
    let cfg = AugmentConfig {
        seed: 42,
        upsample_factor: 2,
        ..AugmentConfig::default()
    };
    let a = augment_corpus(&auth, &syn, &cfg).unwrap();
    let b = augment_corpus(&auth, &syn, &cfg).unwrap();
    assert_eq!(a, b);
    let other = augment_corpus(
        &auth,
        &syn,
        &AugmentConfig {
            seed: 43,
            ..cfg.clone()
        },
    )
    .unwrap();
    assert_ne!(a.authentic.source, other.authentic.source);

    let sep = SeparatorToken::default();
    let mut expected_auth: Vec<String> = auth
        .iter()
        .flat_map(|d| enumerate_sequences(d, 1000))
        .map(|p| encode_sentences(p.src_sentences.iter().map(Sentence::text), &sep))
        .collect();
    expected_auth = upsample(&expected_auth, 2);
    let mut got = a.authentic.source.clone();
    got.sort();
    expected_auth.sort();
    assert_eq!(got, expected_auth);
    assert_eq!(a.synthetic_counts.emitted, a.synthetic.len());
}

fn arb_sentence() -> impl Strategy<Value = String> {
    "[a-zčř\"]{1,8}( [a-zčř\"]{1,8}){0,6}"
}

proptest! {
    #[test]
    fn encode_then_split_is_identity(sentences in prop::collection::vec(arb_sentence(), 1..10)) {
        let sep = SeparatorToken::default();
        let line = encode_sentences(sentences.iter().map(String::as_str), &sep);
        prop_assert_eq!(split_on_separator(&line, &sep), sentences);
    }

    #[test]
    fn span_length_is_additive(sentences in prop::collection::vec(arb_sentence(), 2..10), cut in 1usize..9) {
        let s: Vec<Sentence> = sentences.iter().map(|t| Sentence::new(t.as_str()).unwrap()).collect();
        let cut = cut.min(s.len() - 1);
        prop_assert_eq!(
            span_char_length(&s),
            span_char_length(&s[..cut]) + span_char_length(&s[cut..]) + 1
        );
    }

    #[test]
    fn corpus_round_trips(docs in prop::collection::vec(prop::collection::vec(arb_sentence(), 1..6), 1..6), tsv in any::<bool>()) {
        let format = if tsv { CorpusFormat::DocIdTsv } else { CorpusFormat::BlankLine };
        let sep = SeparatorToken::default();
        let docs: Vec<Document> = docs
            .iter()
            .enumerate()
            .map(|(i, texts)| Document::from_texts(format!("doc{i}"), texts))
            .collect();
        let text = serialize_document_corpus(&docs, format);
        let parsed = parse_document_corpus(&text, format, &sep).unwrap();
        prop_assert_eq!(&parsed, &docs);
        prop_assert_eq!(serialize_document_corpus(&parsed, format), text);
    }

    #[test]
    fn shuffle_is_a_seeded_permutation(n in 0usize..200, seed in any::<u64>()) {
        let items: Vec<usize> = (0..n).collect();
        let a = shuffle_corpus(items.clone(), seed);
        prop_assert_eq!(&a, &shuffle_corpus(items.clone(), seed));
        let mut sorted = a;
        sorted.sort_unstable();
        prop_assert_eq!(sorted, items);
    }
}
