use std::fs;

use headvote_core::corpus::chars_of;
use headvote_core::embeddings::{
    load_embeddings, nearest_neighbors, save_embeddings, single_char_audit, train_embeddings,
    EmbeddingTrainConfig, Variant,
};
use headvote_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn corpus() -> Vec<Vec<String>> {
    ["大家 好 高兴", "中国 人 高兴", "大 中国 好", "人 大家 开心"]
        .iter()
        .map(|s| s.split(' ').map(String::from).collect())
        .collect()
}

fn config(variant: Variant) -> EmbeddingTrainConfig {
    EmbeddingTrainConfig {
        variant,
        dim: 10,
        min_count: 1,
        epochs: 3,
        ..Default::default()
    }
}

#[test]
fn cluster_choice_matches_exhaustive_argmax() {
    let mut cfg = config(Variant::CweCluster);
    cfg.clusters = 5;
    let set = train_embeddings(&corpus(), &cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let c = *['大', '家', '中', '国', '人', '高', '兴']
            .get(rng.gen_range(0..7))
            .unwrap();
        let context: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sims: Vec<f64> = (0..5)
            .map(|s| {
                let key = format!("{c}#{s}");
                let row = set.subwords().get(&key).unwrap();
                let v = set.subwords().vectors().row(row);
                let dot: f64 = v.iter().zip(&context).map(|(a, b)| a * b).sum();
                let n1 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                let n2 = context.iter().map(|x| x * x).sum::<f64>().sqrt();
                dot / (n1 * n2)
            })
            .collect();
        let mut best = 0;
        for s in 1..5 {
            if sims[s] > sims[best] {
                best = s;
            }
        }
        assert_eq!(set.assign_cluster(c, &context).unwrap(), best);
    }
    assert_eq!(set.assign_cluster('大', &[0.0; 10]).unwrap(), 0);
    assert!(matches!(
        set.assign_cluster('猫', &[1.0; 10]),
        Err(Error::UnknownCharacter('猫'))
    ));
}

#[test]
fn every_in_vocabulary_word_composes_finitely() {
    for variant in Variant::ALL {
        let set = train_embeddings(&corpus(), &config(variant)).unwrap();
        for token in set.vocab().tokens() {
            let v = set.compose_word_vector(token, None).unwrap();
            assert_eq!(v.len(), 10);
            assert!(v.iter().all(|x| x.is_finite()));
        }
    }
}

#[test]
fn duplicate_vector_is_the_top_neighbour() {
    let mut set = train_embeddings(&corpus(), &config(Variant::Sgns)).unwrap();
    let a = set.vocab().get("高兴").unwrap();
    let b = set.vocab().get("开心").unwrap();
    let row = set.input().row(a).to_vec();
    set.input_mut().row_mut(b).copy_from_slice(&row);
    let top = nearest_neighbors(&set, "高兴", 1).unwrap();
    assert_eq!(top[0].0, "开心");
    assert!((top[0].1 - 1.0).abs() < 1e-12);
    let all = nearest_neighbors(&set, "高兴", 100).unwrap();
    assert_eq!(all.len(), set.vocab().num_tokens() - 1);
    assert!(nearest_neighbors(&set, "不在", 3).is_err());
}

#[test]
fn zero_query_is_an_error() {
    let mut set = train_embeddings(&corpus(), &config(Variant::Sgns)).unwrap();
    let a = set.vocab().get("好").unwrap();
    set.input_mut().row_mut(a).fill(0.0);
    assert!(matches!(
        nearest_neighbors(&set, "好", 3),
        Err(Error::ZeroNorm(_))
    ));
}

#[test]
fn audit_counts_constructed_single_characters() {
    let neighbours: Vec<(String, f64)> = [
        "好", "大家", "人", "中国", "大", "高兴", "开心", "a", "bc", "de",
    ]
    .iter()
    .map(|t| (t.to_string(), 0.5))
    .collect();
    assert_eq!(single_char_audit(&neighbours), 4);
    assert_eq!(chars_of("好").unwrap().len(), 1);
}

#[test]
fn loaded_vectors_are_within_print_precision() {
    let dir = tempfile::tempdir().unwrap();
    for variant in Variant::ALL {
        let set = train_embeddings(&corpus(), &config(variant)).unwrap();
        let path = dir.path().join(format!("{variant}.vec"));
        save_embeddings(&set, &path).unwrap();
        let loaded = load_embeddings(&path).unwrap();
        for token in set.vocab().tokens() {
            let a = set.compose_word_vector(token, None).unwrap();
            let b = loaded.compose_word_vector(token, None).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-5, "{variant} {token}");
            }
        }
    }
}

#[test]
fn short_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.vec");
    fs::write(&path, "3 2\na 0.1 0.2\nb 0.3 0.4\n").unwrap();
    assert!(load_embeddings(&path).is_err());
    fs::write(&path, "2 2\na 0.1 0.2\nb 0.3\n").unwrap();
    let err = load_embeddings(&path).unwrap_err().to_string();
    assert!(err.contains('3'), "{err}");
}
