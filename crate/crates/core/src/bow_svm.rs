//! Bag-of-words features and a one-vs-rest linear SVM.
//!
//! Each binary problem minimises `½‖w‖² + C Σ max(0, 1 − y(w·x + b))` with
//! Pegasos-style stochastic subgradient steps of size `1/(λt)`, `λ = 1/(Cn)`.
//! The bias is handled as the weight of a constant feature.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::{DatasetSpec, Headline, Vocabulary};
use crate::error::{Error, Result};
use crate::math::{argmax, sigmoid, Matrix};
use crate::persist::{expect_shape, Reader, Writer};

/// Sorted, duplicate-free `(index, value)` pairs with non-zero values.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn new(dim: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        for w in entries.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::Config(
                    "sparse indices must be strictly increasing".into(),
                ));
            }
        }
        if let Some(&(i, _)) = entries.last() {
            if i >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: i + 1,
                });
            }
        }
        if entries.iter().any(|&(_, v)| v == 0.0 || !v.is_finite()) {
            return Err(Error::Config(
                "sparse values must be finite and non-zero".into(),
            ));
        }
        Ok(SparseVector { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * dense[i]).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Weighting {
    /// 1.0 for every distinct in-vocabulary token.
    #[default]
    Binary,
    /// Number of occurrences.
    Counts,
}

impl Weighting {
    fn tag(self) -> &'static str {
        match self {
            Weighting::Binary => "binary",
            Weighting::Counts => "counts",
        }
    }
}

impl std::str::FromStr for Weighting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(Weighting::Binary),
            "counts" => Ok(Weighting::Counts),
            _ => Err(Error::Config(format!("unknown weighting `{s}`"))),
        }
    }
}

/// Word-occurrence features over the vocabulary's real tokens; unknown
/// tokens are dropped.
pub fn featurize<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> SparseVector {
    featurize_with(tokens, vocab, Weighting::Binary)
}

pub fn featurize_with<S: AsRef<str>>(
    tokens: &[S],
    vocab: &Vocabulary,
    weighting: Weighting,
) -> SparseVector {
    let mut ids: Vec<usize> = tokens
        .iter()
        .filter_map(|t| vocab.get(t.as_ref()))
        .collect();
    ids.sort_unstable();
    let mut entries: Vec<(usize, f64)> = Vec::with_capacity(ids.len());
    for id in ids {
        match entries.last_mut() {
            Some((last, v)) if *last == id => {
                if weighting == Weighting::Counts {
                    *v += 1.0;
                }
            }
            _ => entries.push((id, 1.0)),
        }
    }
    SparseVector {
        dim: vocab.num_tokens(),
        entries,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvmConfig {
    /// Trade-off between margin width and hinge loss.
    pub c: f64,
    pub epochs: usize,
    pub seed: u64,
    pub weighting: Weighting,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            epochs: 20,
            seed: 1,
            weighting: Weighting::Binary,
        }
    }
}

/// A trained binary separator.
#[derive(Clone, Debug, PartialEq)]
pub struct BinarySvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Objective of the retained solution after each epoch.
    pub objectives: Vec<f64>,
    /// Objective of the current iterate after each epoch; not monotone.
    pub raw_objectives: Vec<f64>,
}

/// `½(‖w‖² + b²) + C Σ max(0, 1 − y(w·x + b))`.
pub fn hinge_objective(
    weights: &[f64],
    bias: f64,
    examples: &[SparseVector],
    targets: &[f64],
    c: f64,
) -> f64 {
    let reg = 0.5 * (weights.iter().map(|w| w * w).sum::<f64>() + bias * bias);
    let hinge: f64 = examples
        .iter()
        .zip(targets)
        .map(|(x, &y)| (1.0 - y * (x.dot(weights) + bias)).max(0.0))
        .sum();
    reg + c * hinge
}

/// A subgradient of [`hinge_objective`]; examples with margin ≥ 1
/// contribute nothing.
pub fn hinge_subgradient(
    weights: &[f64],
    bias: f64,
    examples: &[SparseVector],
    targets: &[f64],
    c: f64,
) -> (Vec<f64>, f64) {
    let mut gw = weights.to_vec();
    let mut gb = bias;
    for (x, &y) in examples.iter().zip(targets) {
        if y * (x.dot(weights) + bias) < 1.0 {
            for &(i, v) in x.entries() {
                gw[i] -= c * y * v;
            }
            gb -= c * y;
        }
    }
    (gw, gb)
}

/// Weight vector kept as `scale · v` so that the per-step shrink is O(1).
struct ScaledWeights {
    v: Vec<f64>,
    bias_v: f64,
    scale: f64,
    norm_sq_v: f64,
}

impl ScaledWeights {
    fn dot(&self, x: &SparseVector) -> f64 {
        self.scale * (x.dot(&self.v) + self.bias_v)
    }

    fn shrink(&mut self, factor: f64) {
        if factor == 0.0 {
            self.v.iter_mut().for_each(|x| *x = 0.0);
            self.bias_v = 0.0;
            self.norm_sq_v = 0.0;
            self.scale = 1.0;
        } else {
            self.scale *= factor;
        }
    }

    fn add(&mut self, alpha: f64, x: &SparseVector) {
        let step = alpha / self.scale;
        for &(i, val) in x.entries() {
            let old = self.v[i];
            let new = old + step * val;
            self.norm_sq_v += new * new - old * old;
            self.v[i] = new;
        }
        let old = self.bias_v;
        self.bias_v += step;
        self.norm_sq_v += self.bias_v * self.bias_v - old * old;
    }

    fn norm_sq(&self) -> f64 {
        self.scale * self.scale * self.norm_sq_v.max(0.0)
    }

    fn materialise(&self) -> (Vec<f64>, f64) {
        (
            self.v.iter().map(|x| x * self.scale).collect(),
            self.bias_v * self.scale,
        )
    }
}

/// Trains one binary problem with targets in {−1, +1}.
pub fn train_binary(
    examples: &[SparseVector],
    targets: &[f64],
    dim: usize,
    config: &SvmConfig,
) -> Result<BinarySvm> {
    if examples.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if examples.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: examples.len(),
            actual: targets.len(),
        });
    }
    if !(config.c > 0.0) {
        return Err(Error::Config("C must be positive".into()));
    }
    let n = examples.len();
    let lambda = 1.0 / (config.c * n as f64);
    let radius_sq = 1.0 / lambda;
    let mut w = ScaledWeights {
        v: vec![0.0; dim],
        bias_v: 0.0,
        scale: 1.0,
        norm_sq_v: 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut objectives = Vec::with_capacity(config.epochs);
    let mut raw_objectives = Vec::with_capacity(config.epochs);
    let mut best = w.materialise();
    let mut best_objective = hinge_objective(&best.0, best.1, examples, targets, config.c);
    let mut t = 0u64;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let x = &examples[i];
            let y = targets[i];
            let margin = y * w.dot(x);
            w.shrink(1.0 - 1.0 / t as f64);
            if margin < 1.0 {
                w.add(eta * y, x);
            }
            let norm_sq = w.norm_sq();
            if norm_sq > radius_sq {
                w.shrink((radius_sq / norm_sq).sqrt());
            }
        }
        // epoch-end Pegasos iterates oscillate; keep the best one seen
        let current = w.materialise();
        let objective = hinge_objective(&current.0, current.1, examples, targets, config.c);
        raw_objectives.push(objective);
        if objective < best_objective {
            best_objective = objective;
            best = current;
        }
        objectives.push(best_objective);
    }
    let (weights, bias) = best;
    Ok(BinarySvm {
        weights,
        bias,
        objectives,
        raw_objectives,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvmModel {
    pub spec: DatasetSpec,
    pub vocab: Vocabulary,
    /// One row per class.
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub config: SvmConfig,
}

/// Binary targets for class `k` against the rest.
pub fn one_vs_rest_targets(labels: &[usize], k: usize) -> Vec<f64> {
    labels
        .iter()
        .map(|&l| if l == k { 1.0 } else { -1.0 })
        .collect()
}

pub fn train_svm(
    train: &[Headline],
    vocab: &Vocabulary,
    spec: &DatasetSpec,
    config: &SvmConfig,
) -> Result<SvmModel> {
    let k = spec.num_classes();
    let mut present = vec![false; k];
    for h in train {
        if h.label >= k {
            return Err(Error::LabelOutOfRange {
                label: h.label,
                classes: k,
            });
        }
        present[h.label] = true;
    }
    if let Some(missing) = present.iter().position(|p| !p) {
        return Err(Error::MissingClass(spec.class_name(missing).to_string()));
    }
    let examples: Vec<SparseVector> = train
        .iter()
        .map(|h| featurize_with(&h.tokens, vocab, config.weighting))
        .collect();
    let labels: Vec<usize> = train.iter().map(|h| h.label).collect();
    let dim = vocab.num_tokens();
    let per_class = (0..k)
        .into_par_iter()
        .map(|class| train_binary(&examples, &one_vs_rest_targets(&labels, class), dim, config))
        .collect::<Result<Vec<_>>>()?;
    let mut weights = Matrix::zeros(k, dim);
    let mut bias = Vec::with_capacity(k);
    for (class, b) in per_class.into_iter().enumerate() {
        weights.row_mut(class).copy_from_slice(&b.weights);
        bias.push(b.bias);
    }
    Ok(SvmModel {
        spec: spec.clone(),
        vocab: vocab.clone(),
        weights,
        bias,
        config: config.clone(),
    })
}

/// Raw decision values `w_k·x + b_k` and the winning class (smallest index
/// on ties).
pub fn predict_svm(model: &SvmModel, features: &SparseVector) -> Result<(usize, Vec<f64>)> {
    if features.dim() != model.weights.cols() {
        return Err(Error::DimensionMismatch {
            expected: model.weights.cols(),
            actual: features.dim(),
        });
    }
    let scores: Vec<f64> = (0..model.weights.rows())
        .map(|k| features.dot(model.weights.row(k)) + model.bias[k])
        .collect();
    Ok((argmax(&scores), scores))
}

impl SvmModel {
    pub fn num_classes(&self) -> usize {
        self.weights.rows()
    }

    /// Label and per-class logistic-squashed scores, used as vote
    /// confidences.
    pub fn predict_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> (usize, Vec<f64>) {
        let x = featurize_with(tokens, &self.vocab, self.config.weighting);
        let (label, scores) =
            predict_svm(self, &x).expect("features built from the model vocabulary");
        (label, scores.into_iter().map(sigmoid).collect())
    }

    pub fn to_text(&self) -> String {
        let mut bias = Matrix::zeros(1, self.bias.len());
        bias.row_mut(0).copy_from_slice(&self.bias);
        Writer::new(SVM_MAGIC)
            .field("classes", self.num_classes())
            .field("features", self.weights.cols())
            .field("c", self.config.c)
            .field("epochs", self.config.epochs)
            .field("seed", self.config.seed)
            .field("weighting", self.config.weighting.tag())
            .list("labels", self.spec.class_names())
            .list("vocab", self.vocab.tokens())
            .tensor("weights", &self.weights)
            .tensor("bias", &bias)
            .finish()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Reader::new(text, SVM_MAGIC)?;
        let classes: usize = r.field("classes")?;
        let features: usize = r.field("features")?;
        let config = SvmConfig {
            c: r.field("c")?,
            epochs: r.field("epochs")?,
            seed: r.field("seed")?,
            weighting: r.field("weighting")?,
        };
        let labels = r.list("labels")?;
        if labels.len() != classes {
            return Err(Error::field("labels", format!("expected {classes} labels")));
        }
        let spec = DatasetSpec::new(labels).map_err(|e| Error::field("labels", e.to_string()))?;
        let tokens = r.list("vocab")?;
        if tokens.len() != features {
            return Err(Error::field("vocab", format!("expected {features} tokens")));
        }
        let vocab = Vocabulary::from_entries(tokens.into_iter().map(|t| (t, 1)), 1);
        let weights = r.tensor("weights")?;
        expect_shape("weights", &weights, classes, features)?;
        let bias = r.tensor("bias")?;
        expect_shape("bias", &bias, 1, classes)?;
        r.finish()?;
        Ok(SvmModel {
            spec,
            vocab,
            weights,
            bias: bias.row(0).to_vec(),
            config,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

pub const SVM_MAGIC: &str = "headvote-svm 1";
