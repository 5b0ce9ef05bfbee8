use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    cluster_key, extract_ngrams, position_key, CharPosition, Composition, EmbeddingSet,
    EmbeddingTrainConfig, NegativeSamplingTable, Param, SubwordTable, Variant,
};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::math::{axpy, dot, sigmoid, Matrix};

const MAX_RESAMPLE: usize = 100;
const MIN_LR_FRACTION: f64 = 1e-4;
/// Cluster vectors start at the character's base vector plus noise of this
/// fraction of the initialisation bound.
const CLUSTER_JITTER: f64 = 0.1;

/// Trains one embedding set on tokenized sentences.
pub fn train_embeddings<S: AsRef<[String]>>(
    corpus: &[S],
    config: &EmbeddingTrainConfig,
) -> Result<EmbeddingSet> {
    config.validate()?;
    if corpus.iter().all(|s| s.as_ref().is_empty()) {
        return Err(Error::Empty("corpus"));
    }
    let vocab = Vocabulary::build(corpus.iter().map(|s| s.as_ref()), config.min_count)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut set = initialise(vocab, config, &mut rng)?;
    let table = NegativeSamplingTable::new(set.vocab())?;

    let sentences: Vec<Vec<usize>> = corpus
        .iter()
        .map(|s| s.as_ref().iter().filter_map(|t| set.vocab.get(t)).collect())
        .collect();
    let plan = Plan::new(&set, config)?;
    let total_tokens: usize = sentences.iter().map(Vec::len).sum();
    let schedule = Schedule {
        lr0: config.lr0,
        total: (config.epochs * total_tokens).max(1) as f64,
    };

    if config.workers == 1 {
        let mut processed = 0usize;
        for _ in 0..config.epochs {
            let keep = keep_probabilities(&set.vocab, config.subsample);
            train_pass(
                &mut set,
                &plan,
                &table,
                &sentences,
                config,
                &schedule,
                &keep,
                &mut rng,
                &mut processed,
                1,
            );
        }
    } else {
        let shard_len = sentences.len().div_ceil(config.workers);
        let keep = keep_probabilities(&set.vocab, config.subsample);
        for epoch in 0..config.epochs {
            let start = epoch * total_tokens;
            let shards: Vec<EmbeddingSet> = sentences
                .chunks(shard_len.max(1))
                .enumerate()
                .collect::<Vec<_>>()
                .into_par_iter()
                .map(|(w, shard)| {
                    let mut local = set.clone();
                    let stream = config.seed
                        ^ ((epoch * config.workers + w) as u64 + 1)
                            .wrapping_mul(0x9E37_79B9_7F4A_7C15);
                    let mut rng = ChaCha8Rng::seed_from_u64(stream);
                    let mut processed = start;
                    train_pass(
                        &mut local,
                        &plan,
                        &table,
                        shard,
                        config,
                        &schedule,
                        &keep,
                        &mut rng,
                        &mut processed,
                        config.workers,
                    );
                    local
                })
                .collect();
            average_into(&mut set, &shards);
        }
    }
    Ok(set)
}

fn average_into(set: &mut EmbeddingSet, shards: &[EmbeddingSet]) {
    let n = shards.len() as f64;
    let avg = |get: &dyn Fn(&EmbeddingSet) -> &[f64], out: &mut [f64]| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for s in shards {
            axpy(1.0 / n, get(s), out);
        }
    };
    avg(&|s| s.input.as_slice(), set.input.as_mut_slice());
    avg(&|s| s.output.as_slice(), set.output.as_mut_slice());
    avg(
        &|s| s.sub.vectors.as_slice(),
        set.sub.vectors.as_mut_slice(),
    );
}

struct Schedule {
    lr0: f64,
    total: f64,
}

impl Schedule {
    fn lr(&self, processed: usize) -> f64 {
        self.lr0 * (1.0 - processed as f64 / self.total).max(MIN_LR_FRACTION)
    }
}

fn keep_probabilities(vocab: &Vocabulary, threshold: Option<f64>) -> Option<Vec<f64>> {
    let t = threshold?;
    let total: u64 = vocab.counts().iter().sum();
    Some(
        vocab
            .counts()
            .iter()
            .map(|&c| {
                let f = c as f64 / total as f64;
                ((t / f).sqrt() + t / f).min(1.0)
            })
            .collect(),
    )
}

/// Precomputed compositions for every vocabulary word; the cluster variant
/// keeps character bases instead since its slots depend on context.
struct Plan {
    fixed: Vec<Composition>,
    char_bases: Vec<Vec<usize>>,
}

impl Plan {
    fn new(set: &EmbeddingSet, config: &EmbeddingTrainConfig) -> Result<Self> {
        let mut fixed = Vec::new();
        let mut char_bases = Vec::new();
        for token in set.vocab.tokens() {
            if config.variant == Variant::CweCluster {
                let bases = token
                    .chars()
                    .map(|c| set.sub.char_base(c).ok_or(Error::UnknownCharacter(c)))
                    .collect::<Result<Vec<_>>>()?;
                char_bases.push(bases);
            } else {
                fixed.push(set.composition(token, None)?);
            }
        }
        Ok(Plan { fixed, char_bases })
    }

    fn composition(&self, set: &EmbeddingSet, word: usize, context: &[f64]) -> Composition {
        if self.char_bases.is_empty() {
            return self.fixed[word].clone();
        }
        let bases = &self.char_bases[word];
        let weight = 0.5 / bases.len() as f64;
        let mut parts = Vec::with_capacity(bases.len() + 1);
        parts.push((Param::Word(word), 0.5));
        for &base in bases {
            parts.push((Param::Sub(base + best_cluster(set, base, context)), weight));
        }
        Composition { parts }
    }
}

fn best_cluster(set: &EmbeddingSet, base: usize, context: &[f64]) -> usize {
    let mut best = 0;
    let mut best_sim = f64::NEG_INFINITY;
    for s in 0..set.config.clusters {
        let sim = crate::math::cosine(context, set.sub.vectors.row(base + s));
        if sim > best_sim {
            best = s;
            best_sim = sim;
        }
    }
    best
}

#[allow(clippy::too_many_arguments)]
fn train_pass(
    set: &mut EmbeddingSet,
    plan: &Plan,
    table: &NegativeSamplingTable,
    sentences: &[Vec<usize>],
    config: &EmbeddingTrainConfig,
    schedule: &Schedule,
    keep: &Option<Vec<f64>>,
    rng: &mut ChaCha8Rng,
    processed: &mut usize,
    stride: usize,
) {
    let dim = config.dim;
    let mut grad = vec![0.0; dim];
    let mut context_mean = vec![0.0; dim];
    let mut kept = Vec::new();
    for sentence in sentences {
        let sentence: &[usize] = match keep {
            Some(p) => {
                kept.clear();
                kept.extend(
                    sentence
                        .iter()
                        .copied()
                        .filter(|&w| rng.gen::<f64>() < p[w]),
                );
                &kept
            }
            None => sentence,
        };
        for t in 0..sentence.len() {
            let lr = schedule.lr(*processed);
            *processed += stride;
            let b = rng.gen_range(1..=config.window);
            let lo = t.saturating_sub(b);
            let hi = (t + b).min(sentence.len() - 1);
            if lo == hi {
                continue;
            }
            let composition = if config.variant == Variant::CweCluster {
                context_mean.iter_mut().for_each(|v| *v = 0.0);
                let n = (hi - lo) as f64;
                for c in (lo..=hi).filter(|&c| c != t) {
                    axpy(1.0 / n, set.input.row(sentence[c]), &mut context_mean);
                }
                plan.composition(set, sentence[t], &context_mean)
            } else {
                plan.composition(set, sentence[t], &[])
            };
            let v = set.compose(&composition);
            grad.iter_mut().for_each(|g| *g = 0.0);
            for c in (lo..=hi).filter(|&c| c != t) {
                sgns_pair_update(
                    &v,
                    sentence[c],
                    &mut set.output,
                    table,
                    lr,
                    config.negatives,
                    rng,
                    &mut grad,
                );
            }
            for &(p, w) in &composition.parts {
                axpy(w, &grad, set.param_row_mut(p));
            }
        }
    }
}

/// Draws up to `count` negatives, redrawing any that equal `positive`. A
/// negative that still collides after 100 draws is dropped.
pub fn sample_negatives<R: Rng>(
    table: &NegativeSamplingTable,
    rng: &mut R,
    positive: usize,
    count: usize,
) -> Vec<usize> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        for _ in 0..MAX_RESAMPLE {
            let n = table.sample(rng);
            if n != positive {
                out.push(n);
                break;
            }
        }
    }
    out
}

/// One skip-gram step with fixed negatives. Context rows are updated in
/// place; the ascent direction for `v` (already scaled by `lr`) is added to
/// `grad` for the caller to spread over the composition.
pub fn apply_pair_update(
    v: &[f64],
    positive: usize,
    negatives: &[usize],
    output: &mut Matrix,
    lr: f64,
    grad: &mut [f64],
) {
    let targets = std::iter::once((positive, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0)));
    for (target, label) in targets {
        let u = output.row_mut(target);
        let g = lr * (label - sigmoid(dot(u, v)));
        axpy(g, u, grad);
        axpy(g, v, u);
    }
}

#[allow(clippy::too_many_arguments)]
pub fn sgns_pair_update<R: Rng>(
    v: &[f64],
    context: usize,
    output: &mut Matrix,
    table: &NegativeSamplingTable,
    lr: f64,
    negatives: usize,
    rng: &mut R,
    grad: &mut [f64],
) {
    let negs = sample_negatives(table, rng, context, negatives);
    apply_pair_update(v, context, &negs, output, lr, grad);
}

/// `-[ln σ(u_o·x) + Σ ln σ(-u_n·x)]` for the composed vector `x` of `center`.
pub fn pair_loss(
    set: &EmbeddingSet,
    center: &str,
    context_mean: Option<&[f64]>,
    positive: usize,
    negatives: &[usize],
) -> Result<f64> {
    let x = set.compose_word_vector(center, context_mean)?;
    let mut loss = -log_sigmoid(dot(set.output.row(positive), &x));
    for &n in negatives {
        loss -= log_sigmoid(-dot(set.output.row(n), &x));
    }
    Ok(loss)
}

fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

/// Gradients of [`pair_loss`] with respect to every row it touches.
#[derive(Clone, Debug, Default)]
pub struct PairGradients {
    /// Word and sub-table rows, keyed by the composition's parameters.
    pub composed: Vec<(Param, Vec<f64>)>,
    /// Context (output) rows.
    pub output: Vec<(usize, Vec<f64>)>,
}

pub fn pair_gradients(
    set: &EmbeddingSet,
    center: &str,
    context_mean: Option<&[f64]>,
    positive: usize,
    negatives: &[usize],
) -> Result<PairGradients> {
    let composition = set.composition(center, context_mean)?;
    let x = set.compose(&composition);
    let dim = x.len();
    let mut gx = vec![0.0; dim];
    let mut output: Vec<(usize, Vec<f64>)> = Vec::new();
    let add_output = |row: usize, coef: f64, output: &mut Vec<(usize, Vec<f64>)>| match output
        .iter_mut()
        .find(|(r, _)| *r == row)
    {
        Some((_, g)) => axpy(coef, &x, g),
        None => {
            let mut g = vec![0.0; dim];
            axpy(coef, &x, &mut g);
            output.push((row, g));
        }
    };
    let u = set.output.row(positive);
    let coef = sigmoid(dot(u, &x)) - 1.0;
    axpy(coef, u, &mut gx);
    add_output(positive, coef, &mut output);
    for &n in negatives {
        let u = set.output.row(n);
        let coef = sigmoid(dot(u, &x));
        axpy(coef, u, &mut gx);
        add_output(n, coef, &mut output);
    }
    let mut composed: HashMap<Param, Vec<f64>> = HashMap::new();
    for &(p, w) in &composition.parts {
        axpy(w, &gx, composed.entry(p).or_insert_with(|| vec![0.0; dim]));
    }
    let mut composed: Vec<_> = composed.into_iter().collect();
    composed.sort_by_key(|(p, _)| *p);
    Ok(PairGradients { composed, output })
}

fn initialise<R: Rng>(
    vocab: Vocabulary,
    config: &EmbeddingTrainConfig,
    rng: &mut R,
) -> Result<EmbeddingSet> {
    let dim = config.dim;
    let bound = 0.5 / dim as f64;
    let input = Matrix::uniform(vocab.len(), dim, bound, rng);
    let output = Matrix::zeros(vocab.len(), dim);

    let mut keys: Vec<String> = Vec::new();
    let mut rows: Vec<f64> = Vec::new();
    let mut push = |key: String, row: &[f64], keys: &mut Vec<String>| {
        keys.push(key);
        rows.extend_from_slice(row);
    };
    match config.variant {
        Variant::Sgns => {}
        Variant::CwePosition | Variant::CweCluster => {
            let mut seen = std::collections::HashSet::new();
            for token in vocab.tokens() {
                for c in token.chars() {
                    if !seen.insert(c) {
                        continue;
                    }
                    if config.variant == Variant::CwePosition {
                        for pos in [CharPosition::Begin, CharPosition::Middle, CharPosition::End] {
                            let row = uniform_row(dim, bound, rng);
                            push(position_key(c, pos), &row, &mut keys);
                        }
                    } else {
                        let base = uniform_row(dim, bound, rng);
                        for s in 0..config.clusters {
                            let row: Vec<f64> = base
                                .iter()
                                .map(|b| b + rng.gen_range(-1.0..=1.0) * CLUSTER_JITTER * bound)
                                .collect();
                            push(cluster_key(c, s), &row, &mut keys);
                        }
                    }
                }
            }
        }
        Variant::FastText => {
            let mut seen = std::collections::HashSet::new();
            for token in vocab.tokens() {
                for g in extract_ngrams(token, config.min_n, config.max_n)? {
                    if seen.insert(g.clone()) {
                        let row = uniform_row(dim, bound, rng);
                        push(g, &row, &mut keys);
                    }
                }
            }
        }
    }
    let vectors = Matrix::from_vec(keys.len(), dim, rows);
    let sub = if keys.is_empty() {
        SubwordTable::empty(dim)
    } else {
        SubwordTable::from_parts(keys, vectors, config.variant)?
    };
    Ok(EmbeddingSet::from_parts(
        vocab,
        input,
        output,
        sub,
        config.clone(),
        false,
    ))
}

fn uniform_row<R: Rng>(dim: usize, bound: f64, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-bound..=bound)).collect()
}
