use headvote_core::bow_svm::featurize;
use headvote_core::corpus::{parse_headline, DatasetSpec, Headline, Vocabulary};
use headvote_core::embeddings::extract_ngrams;
use headvote_core::ensemble::plurality_vote;
use headvote_core::eval::{compute_metrics, confusion};
use headvote_core::Prediction;
use proptest::prelude::*;

fn spec() -> DatasetSpec {
    DatasetSpec::new(["体育", "财经", "科技"]).unwrap()
}

fn token() -> impl Strategy<Value = String> {
    "[a-z大家好中国人]{1,4}"
}

fn votes() -> impl Strategy<Value = Vec<Prediction>> {
    prop::collection::vec(
        (0usize..3, 0u32..=4).prop_map(|(l, c)| Prediction {
            label: l,
            confidence: c as f64 / 4.0,
        }),
        1..8,
    )
}

proptest! {
    #[test]
    fn headline_round_trips(label in 0usize..3, tokens in prop::collection::vec(token(), 1..10)) {
        let spec = spec();
        let h = Headline { label, tokens };
        prop_assert_eq!(parse_headline(&h.to_line(&spec), &spec, 1).unwrap(), h);
    }

    #[test]
    fn vocabulary_ignores_sentence_order(mut lines in prop::collection::vec(prop::collection::vec(token(), 1..6), 1..8)) {
        let a = Vocabulary::build(&lines, 1).unwrap();
        lines.reverse();
        let b = Vocabulary::build(&lines, 1).unwrap();
        prop_assert_eq!(a.tokens(), b.tokens());
        for (i, t) in a.tokens().iter().enumerate() {
            prop_assert_eq!(a.get(t), Some(i));
        }
    }

    #[test]
    fn ids_preserve_length(tokens in prop::collection::vec(token(), 0..12)) {
        let vocab = Vocabulary::from_entries([("大家".to_string(), 2), ("a".to_string(), 1)], 1);
        prop_assert_eq!(vocab.ids(&tokens).len(), tokens.len());
    }

    #[test]
    fn plurality_ignores_input_order(mut v in votes(), seed in any::<u64>()) {
        let before = plurality_vote(&v).unwrap();
        let n = v.len();
        v.rotate_left((seed as usize) % n);
        v.reverse();
        prop_assert_eq!(plurality_vote(&v).unwrap(), before);
    }

    #[test]
    fn strict_majority_wins(label in 0usize..3, majority in 3usize..6, v in votes()) {
        let mut all: Vec<Prediction> = (0..majority).map(|_| Prediction { label, confidence: 0.0 }).collect();
        all.extend(v.into_iter().filter(|p| p.label != label).take(majority - 1));
        prop_assert_eq!(plurality_vote(&all).unwrap().label, label);
    }

    #[test]
    fn scaling_confidences_keeps_the_winner(v in votes(), scale in 0.01f64..=1.0) {
        let scaled: Vec<Prediction> = v.iter().map(|p| Prediction { label: p.label, confidence: p.confidence * scale }).collect();
        prop_assert_eq!(plurality_vote(&v).unwrap().label, plurality_vote(&scaled).unwrap().label);
    }

    #[test]
    fn featurize_ignores_repeats(tokens in prop::collection::vec(token(), 0..10)) {
        let vocab = Vocabulary::build([&tokens, &vec!["x".to_string()]], 1).unwrap();
        let mut dedup = tokens.clone();
        dedup.sort();
        dedup.dedup();
        prop_assert_eq!(featurize(&tokens, &vocab), featurize(&dedup, &vocab));
    }

    #[test]
    fn accuracy_survives_relabelling(pairs in prop::collection::vec((0usize..4, 0usize..4), 1..50), perm in Just([2usize, 0, 3, 1])) {
        let (g, p): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let a = compute_metrics(&confusion(&g, &p, 4).unwrap()).accuracy;
        let g2: Vec<usize> = g.iter().map(|&x| perm[x]).collect();
        let p2: Vec<usize> = p.iter().map(|&x| perm[x]).collect();
        prop_assert_eq!(compute_metrics(&confusion(&g2, &p2, 4).unwrap()).accuracy, a);
    }

    #[test]
    fn unigram_bigram_count(word in "[大家好中国人ab]{1,8}") {
        let l = word.chars().count();
        prop_assert_eq!(extract_ngrams(&word, 1, 2).unwrap().len(), (l + 2) + (l + 1));
    }

    #[test]
    fn self_prediction_is_perfect(labels in prop::collection::vec(0usize..3, 1..40)) {
        let m = compute_metrics(&confusion(&labels, &labels, 3).unwrap());
        prop_assert_eq!(m.accuracy, 1.0);
        let present = (0..3).filter(|k| labels.contains(k)).count();
        if present == 3 {
            prop_assert_eq!(m.macro_f1, 1.0);
        }
    }
}
