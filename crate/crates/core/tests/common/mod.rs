//! Finite-difference gradient checks shared by the test targets.
#![allow(dead_code)]

use headvote_core::bow_svm::{hinge_objective, hinge_subgradient, SparseVector};
use headvote_core::corpus::{DatasetSpec, Vocabulary};
use headvote_core::embeddings::{
    pair_gradients, pair_loss, train_embeddings, EmbeddingSet, EmbeddingTrainConfig, Param, Variant,
};
use headvote_core::math::Matrix;
use headvote_core::nets::{self, init_model, loss_and_grad, Arch, Example, NetConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEP: f64 = 1e-5;
/// Gradients smaller than this are compared absolutely.
pub const FLOOR: f64 = 1e-6;

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR)
}

fn central<F: FnMut(f64) -> f64>(x: f64, mut f: F) -> f64 {
    (f(x + STEP) - f(x - STEP)) / (2.0 * STEP)
}

fn randomise(m: &mut Matrix, scale: f64, rng: &mut ChaCha8Rng) {
    for v in m.as_mut_slice() {
        *v = rng.gen_range(-scale..scale);
    }
}

/// Small random classifier and batch: dim 8, 4 filters, 6 hidden units, 3
/// classes. Sequences of length 1–6 exercise CNN padding.
pub fn random_net(arch: Arch, seed: u64) -> (nets::ClassifierModel, Vec<Example>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = DatasetSpec::new(["a", "b", "c"]).unwrap();
    let vocab = Vocabulary::from_entries((0..10).map(|i| (format!("t{i}"), 1)), 1);
    let config = NetConfig {
        dim: 8,
        num_filters: 4,
        hidden: 6,
        seed,
        ..NetConfig::new(arch, 3)
    };
    let mut model = init_model(&config, &spec, &vocab, None).unwrap();
    let pad = model.pad_index();
    for (_, m) in model.params.tensors_mut() {
        randomise(m, 0.5, &mut rng);
    }
    model.params.embedding.row_mut(pad).fill(0.0);
    let batch = (0..3)
        .map(|_| {
            let len = rng.gen_range(1..=6);
            Example {
                ids: (0..len).map(|_| rng.gen_range(0..vocab.len())).collect(),
                label: rng.gen_range(0..3),
            }
        })
        .collect();
    (model, batch)
}

/// Max relative error over every parameter of a random model.
pub fn check_net(arch: Arch, seed: u64) -> f64 {
    let (model, batch) = random_net(arch, seed);
    let (_, grads) = loss_and_grad(&model, &batch).unwrap();
    let pad = model.pad_index();
    let mut worst: f64 = 0.0;
    let mut probe = model.clone();
    for t in 0..7 {
        let len = model.params.tensors()[t].1.as_slice().len();
        let cols = model.params.tensors()[t].1.cols().max(1);
        for i in 0..len {
            if t == 0 && i / cols == pad {
                continue;
            }
            let x = model.params.tensors()[t].1.as_slice()[i];
            let numeric = central(x, |v| {
                probe.params.tensors_mut()[t].1.as_mut_slice()[i] = v;
                loss_and_grad(&probe, &batch).unwrap().0
            });
            probe.params.tensors_mut()[t].1.as_mut_slice()[i] = x;
            let analytic = grads.params.tensors()[t].1.as_slice()[i];
            worst = worst.max(rel_err(analytic, numeric));
        }
    }
    worst
}

/// Cross-entropy over a softmax of random logits.
pub fn check_softmax(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(2..=6);
    let logits: Vec<f64> = (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let label = rng.gen_range(0..k);
    let (_, grad) = nets::softmax_cross_entropy(&logits, label);
    let mut worst: f64 = 0.0;
    for i in 0..k {
        let mut probe = logits.clone();
        let numeric = central(logits[i], |v| {
            probe[i] = v;
            nets::softmax_cross_entropy(&probe, label).0
        });
        worst = worst.max(rel_err(grad[i], numeric));
    }
    worst
}

/// Random small embedding set for `variant` with all rows randomised.
pub fn random_embeddings(variant: Variant, seed: u64) -> EmbeddingSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chars: Vec<char> = "天地人和风雨山".chars().collect();
    let words: Vec<String> = (0..8)
        .map(|_| {
            let len = rng.gen_range(1..=3);
            (0..len).map(|_| *chars.choose(&mut rng).unwrap()).collect()
        })
        .collect();
    let corpus: Vec<Vec<String>> = (0..6)
        .map(|_| {
            (0..5)
                .map(|_| words.choose(&mut rng).unwrap().clone())
                .collect()
        })
        .collect();
    let config = EmbeddingTrainConfig {
        dim: 6,
        epochs: 0,
        min_count: 1,
        variant,
        clusters: 3,
        min_n: 1,
        max_n: 3,
        seed,
        ..Default::default()
    };
    let mut set = train_embeddings(&corpus, &config).unwrap();
    randomise(set.input_mut(), 0.5, &mut rng);
    randomise(set.output_mut(), 0.5, &mut rng);
    randomise(set.subwords_mut().vectors_mut(), 0.5, &mut rng);
    set
}

/// Skip-gram pair loss through the variant's composition, checked on every
/// word, character/cluster/n-gram and context row it touches.
pub fn check_sgns(variant: Variant, seed: u64) -> f64 {
    let mut set = random_embeddings(variant, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
    let n = set.vocab().num_tokens();
    let center = set.vocab().token(rng.gen_range(0..n)).to_string();
    let positive = rng.gen_range(0..n);
    let negatives: Vec<usize> = (0..3).map(|_| rng.gen_range(0..n)).collect();
    let context: Vec<f64> = (0..set.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let ctx = (variant == Variant::CweCluster).then_some(context.as_slice());
    let grads = pair_gradients(&set, &center, ctx, positive, &negatives).unwrap();
    let mut worst: f64 = 0.0;
    for (param, g) in &grads.composed {
        for d in 0..set.dim() {
            let x = set.param_row(*param)[d];
            let numeric = central(x, |v| {
                set.param_row_mut(*param)[d] = v;
                pair_loss(&set, &center, ctx, positive, &negatives).unwrap()
            });
            set.param_row_mut(*param)[d] = x;
            worst = worst.max(rel_err(g[d], numeric));
        }
    }
    for (row, g) in &grads.output {
        for d in 0..set.dim() {
            let x = set.output().row(*row)[d];
            let numeric = central(x, |v| {
                set.output_mut().row_mut(*row)[d] = v;
                pair_loss(&set, &center, ctx, positive, &negatives).unwrap()
            });
            set.output_mut().row_mut(*row)[d] = x;
            worst = worst.max(rel_err(g[d], numeric));
        }
    }
    worst
}

/// Which kinds of rows a composition gradient reaches, for coverage checks.
pub fn touched_kinds(variant: Variant, seed: u64) -> (bool, bool) {
    let set = random_embeddings(variant, seed);
    let center = set.vocab().token(0).to_string();
    let g = pair_gradients(&set, &center, Some(&vec![0.1; set.dim()]), 1, &[0]).unwrap();
    (
        g.composed.iter().any(|(p, _)| matches!(p, Param::Word(_))),
        g.composed.iter().any(|(p, _)| matches!(p, Param::Sub(_))),
    )
}

/// Hinge objective at a random point where no margin sits near 1.
pub fn check_hinge(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 5;
    loop {
        let examples: Vec<SparseVector> = (0..6)
            .map(|_| {
                let mut entries = Vec::new();
                for i in 0..dim {
                    if rng.gen_bool(0.6) {
                        entries.push((i, rng.gen_range(0.5..2.0)));
                    }
                }
                SparseVector::new(dim, entries).unwrap()
            })
            .collect();
        let targets: Vec<f64> = (0..6)
            .map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        let mut w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut b = rng.gen_range(-1.0..1.0);
        let c = rng.gen_range(0.5..2.0);
        let near_kink = examples
            .iter()
            .zip(&targets)
            .any(|(x, y)| (y * (x.dot(&w) + b) - 1.0).abs() < 1e-3);
        if near_kink {
            continue;
        }
        let (gw, gb) = hinge_subgradient(&w, b, &examples, &targets, c);
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            let x = w[i];
            let numeric = central(x, |v| {
                w[i] = v;
                hinge_objective(&w, b, &examples, &targets, c)
            });
            w[i] = x;
            worst = worst.max(rel_err(gw[i], numeric));
        }
        let x = b;
        let numeric = central(x, |v| {
            b = v;
            hinge_objective(&w, b, &examples, &targets, c)
        });
        b = x;
        let _ = b;
        worst = worst.max(rel_err(gb, numeric));
        return worst;
    }
}
