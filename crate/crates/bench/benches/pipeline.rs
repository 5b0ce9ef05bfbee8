use std::collections::HashMap;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use headvote_core::bow_svm::{train_svm, SvmConfig};
use headvote_core::corpus::Vocabulary;
use headvote_core::embeddings::{train_embeddings, EmbeddingTrainConfig, Variant};
use headvote_core::ensemble::{build_paper_topology, paper_system_ids};
use headvote_core::nets::{init_model, loss_and_grad, Arch, Example, NetConfig};
use headvote_core::synthetic::{equivalence_corpus, keyword_task};
use headvote_core::Prediction;

fn embeddings(c: &mut Criterion) {
    let corpus = equivalence_corpus(20, 1);
    let mut group = c.benchmark_group("embedding_epoch");
    group.sample_size(10);
    for variant in Variant::ALL {
        let config = EmbeddingTrainConfig {
            variant,
            dim: 100,
            epochs: 1,
            min_count: 1,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(variant), &config, |b, cfg| {
            b.iter(|| train_embeddings(&corpus, cfg).unwrap())
        });
    }
    group.finish();
}

fn networks(c: &mut Criterion) {
    let task = keyword_task(18, 64, 18, 1);
    let vocab = Vocabulary::build(task.train.iter().map(|h| &h.tokens), 1).unwrap();
    let mut group = c.benchmark_group("net_batch_gradient");
    for arch in Arch::ALL {
        let model = init_model(&NetConfig::new(arch, 18), &task.spec, &vocab, None).unwrap();
        let batch: Vec<Example> = task
            .train
            .iter()
            .map(|h| Example::from_headline(&model, h))
            .collect();
        group.bench_function(BenchmarkId::from_parameter(arch), |b| {
            b.iter(|| loss_and_grad(&model, &batch).unwrap())
        });
    }
    group.finish();
}

fn svm(c: &mut Criterion) {
    let task = keyword_task(18, 2000, 10, 1);
    let vocab = Vocabulary::build(task.train.iter().map(|h| &h.tokens), 1).unwrap();
    let mut group = c.benchmark_group("svm");
    group.sample_size(10);
    group.bench_function("train_18_class", |b| {
        b.iter(|| train_svm(&task.train, &vocab, &task.spec, &SvmConfig::default()).unwrap())
    });
    group.finish();
}

fn voting(c: &mut Criterion) {
    let tree = build_paper_topology(&paper_system_ids()).unwrap();
    let preds: HashMap<String, Prediction> = paper_system_ids()
        .into_iter()
        .enumerate()
        .map(|(i, id)| {
            (
                id,
                Prediction {
                    label: i % 4,
                    confidence: 0.5 + (i % 3) as f64 / 10.0,
                },
            )
        })
        .collect();
    c.bench_function("default_tree_vote", |b| {
        b.iter(|| tree.eval(&preds).unwrap())
    });
}

criterion_group!(benches, embeddings, networks, svm, voting);
criterion_main!(benches);
