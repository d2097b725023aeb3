mod common;

use docspan_core::postprocess::{
    convert_quotes, remove_repetitions, PostprocessOptions, RepetitionRule,
};
use proptest::prelude::*;

use common::Gen;

/// Lines built from a tiny vocabulary so that repetitions and quotes are
/// frequent.
fn fuzz_line(gen: &mut Gen) -> String {
    const VOCAB: &[&str] = &[
        "so", "very", "good", "\"", "a", "b", "\"x", "y\"", "the cat", "„", "“",
    ];
    let n = gen.range(0, 30);
    let mut words = Vec::new();
    while words.len() < n {
        let w = VOCAB[gen.below(VOCAB.len())];
        let reps = if gen.below(4) == 0 {
            gen.range(2, 6)
        } else {
            1
        };
        for _ in 0..reps {
            words.push(w);
        }
    }
    words.join(" ")
}

#[test]
fn both_rules_are_idempotent_on_fuzz_corpus() {
    let mut gen = Gen::new(41);
    let opts = PostprocessOptions::windowed();
    let keep_two = RepetitionRule {
        keep: 2,
        ..RepetitionRule::default()
    };
    for _ in 0..10_000 {
        let line = fuzz_line(&mut gen);
        let once = remove_repetitions(&line, &RepetitionRule::default());
        assert_eq!(
            remove_repetitions(&once, &RepetitionRule::default()),
            once,
            "{line:?}"
        );
        let once2 = remove_repetitions(&line, &keep_two);
        assert_eq!(remove_repetitions(&once2, &keep_two), once2, "{line:?}");
        let quoted = convert_quotes(&line);
        assert!(!quoted.contains('"'));
        assert_eq!(convert_quotes(&quoted), quoted);
        let (both, _) = opts.apply(&line);
        assert_eq!(opts.apply(&both).0, both);
    }
}

#[test]
fn documented_examples() {
    let rule = RepetitionRule::default();
    assert_eq!(
        remove_repetitions("very very good", &rule),
        "very very good"
    );
    assert_eq!(remove_repetitions("so so so good", &rule), "so good");
    assert_eq!(
        remove_repetitions("the cat the cat the cat sat", &rule),
        "the cat sat"
    );
    assert_eq!(
        convert_quotes("He said \"hi\" and \"bye\""),
        "He said „hi“ and „bye“"
    );
}

proptest! {
    #[test]
    fn repetition_removal_never_grows(line in "(so |very |good |a b ){0,20}") {
        let out = remove_repetitions(line.trim(), &RepetitionRule::default());
        prop_assert!(out.split_whitespace().count() <= line.split_whitespace().count());
    }

    #[test]
    fn quotes_only_touch_straight_quotes(line in "[a-z \"]{0,40}") {
        let out = convert_quotes(&line);
        prop_assert_eq!(out.chars().count(), line.chars().count());
        for (a, b) in line.chars().zip(out.chars()) {
            if a == '"' {
                prop_assert!(b == '„' || b == '“');
            } else {
                prop_assert_eq!(a, b);
            }
        }
    }
}
