//! Word-embedding training and lookup.
//!
//! Every variant represents a word as a weighted sum of parameter rows: the
//! word's own input vector plus, depending on the variant, character vectors
//! (per position or per sense cluster) or character n-gram vectors. Training
//! pushes the gradient of a composed vector back into each of those rows with
//! the same weights used to build it.

mod io;
mod neighbors;
mod ngrams;
mod sampling;
mod train;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::math::{axpy, cosine, Matrix};

pub use io::{format_sidecar, format_word_vectors, load_embeddings, save_embeddings, sidecar_path};
pub use neighbors::{nearest_neighbors, single_char_audit};
pub use ngrams::extract_ngrams;
pub use sampling::NegativeSamplingTable;
pub use train::{
    apply_pair_update, pair_gradients, pair_loss, sample_negatives, sgns_pair_update,
    train_embeddings, PairGradients,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Plain skip-gram with negative sampling.
    Sgns,
    /// Characters contribute begin/middle/end vectors.
    CwePosition,
    /// Characters contribute one of several cluster vectors chosen by context.
    CweCluster,
    /// Boundary-marked character n-grams contribute one vector each.
    FastText,
}

impl Variant {
    pub fn tag(self) -> &'static str {
        match self {
            Variant::Sgns => "sgns",
            Variant::CwePosition => "cwe-p",
            Variant::CweCluster => "cwe-l",
            Variant::FastText => "fasttext",
        }
    }

    pub const ALL: [Variant; 4] = [
        Variant::Sgns,
        Variant::CwePosition,
        Variant::CweCluster,
        Variant::FastText,
    ];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgns" => Ok(Variant::Sgns),
            "cwe-p" => Ok(Variant::CwePosition),
            "cwe-l" => Ok(Variant::CweCluster),
            "fasttext" => Ok(Variant::FastText),
            other => Err(Error::Config(format!(
                "unknown embedding variant `{other}` (expected sgns, cwe-p, cwe-l or fasttext)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTrainConfig {
    pub dim: usize,
    /// Maximum context offset; the effective window is drawn from `1..=window`.
    pub window: usize,
    pub epochs: usize,
    pub negatives: usize,
    pub min_count: u64,
    pub lr0: f64,
    pub variant: Variant,
    /// Cluster vectors per character (cluster variant only).
    pub clusters: usize,
    pub min_n: usize,
    pub max_n: usize,
    /// Frequent-word subsampling threshold; `None` keeps every token.
    pub subsample: Option<f64>,
    /// Parallel shards per epoch. One worker is fully deterministic.
    pub workers: usize,
    pub seed: u64,
}

impl Default for EmbeddingTrainConfig {
    fn default() -> Self {
        EmbeddingTrainConfig {
            dim: 300,
            window: 5,
            epochs: 5,
            negatives: 5,
            min_count: 5,
            lr0: 0.025,
            variant: Variant::Sgns,
            clusters: 3,
            min_n: 1,
            max_n: 3,
            subsample: None,
            workers: 1,
            seed: 1,
        }
    }
}

impl EmbeddingTrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.dim < 1 {
            return fail("dim must be at least 1");
        }
        if self.window < 1 {
            return fail("window must be at least 1");
        }
        if self.negatives < 1 {
            return fail("negatives must be at least 1");
        }
        if self.min_count < 1 {
            return fail("min_count must be at least 1");
        }
        if self.min_n < 1 || self.min_n > self.max_n {
            return fail("n-gram bounds must satisfy 1 <= min_n <= max_n");
        }
        if self.clusters < 1 {
            return fail("clusters must be at least 1");
        }
        if self.workers < 1 {
            return fail("workers must be at least 1");
        }
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return fail("lr0 must be positive");
        }
        if let Some(t) = self.subsample {
            if !(t > 0.0) {
                return fail("subsample threshold must be positive");
            }
        }
        Ok(())
    }
}

/// Character positions used by the position variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CharPosition {
    Begin,
    Middle,
    End,
}

impl CharPosition {
    /// Position of character `k` in a word of `n` characters. A lone
    /// character counts as `Begin`.
    pub fn of(k: usize, n: usize) -> Self {
        if k == 0 {
            CharPosition::Begin
        } else if k + 1 == n {
            CharPosition::End
        } else {
            CharPosition::Middle
        }
    }

    fn slot(self) -> usize {
        self as usize
    }

    const SUFFIX: [&'static str; 3] = ["B", "M", "E"];
}

/// Extra parameter rows owned by a variant: character or n-gram vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SubwordTable {
    keys: Vec<String>,
    index: HashMap<String, usize>,
    /// First row of each character's block (character variants).
    char_base: HashMap<char, usize>,
    vectors: Matrix,
}

impl SubwordTable {
    pub fn empty(dim: usize) -> Self {
        SubwordTable {
            keys: Vec::new(),
            index: HashMap::new(),
            char_base: HashMap::new(),
            vectors: Matrix::zeros(0, dim),
        }
    }

    pub(crate) fn from_parts(keys: Vec<String>, vectors: Matrix, variant: Variant) -> Result<Self> {
        assert_eq!(keys.len(), vectors.rows());
        let mut index = HashMap::with_capacity(keys.len());
        let mut char_base = HashMap::new();
        for (i, key) in keys.iter().enumerate() {
            if index.insert(key.clone(), i).is_some() {
                return Err(Error::field(key.as_str(), "duplicate sub-table key"));
            }
            if matches!(variant, Variant::CwePosition | Variant::CweCluster) {
                let sep = if variant == Variant::CwePosition {
                    '@'
                } else {
                    '#'
                };
                let (head, _) = key
                    .rsplit_once(sep)
                    .ok_or_else(|| Error::field(key.as_str(), "missing slot suffix"))?;
                let mut chars = head.chars();
                let (Some(c), None) = (chars.next(), chars.next()) else {
                    return Err(Error::field(key.as_str(), "key is not a single character"));
                };
                char_base.entry(c).or_insert(i);
            }
        }
        Ok(SubwordTable {
            keys,
            index,
            char_base,
            vectors,
        })
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn get(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn char_base(&self, c: char) -> Option<usize> {
        self.char_base.get(&c).copied()
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn vectors_mut(&mut self) -> &mut Matrix {
        &mut self.vectors
    }
}

pub(crate) fn position_key(c: char, pos: CharPosition) -> String {
    format!("{c}@{}", CharPosition::SUFFIX[pos.slot()])
}

pub(crate) fn cluster_key(c: char, s: usize) -> String {
    format!("{c}#{s}")
}

/// A parameter row referenced by a composition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    Word(usize),
    Sub(usize),
}

/// A composed vector as `Σ weight · row`.
#[derive(Clone, Debug, PartialEq)]
pub struct Composition {
    pub parts: Vec<(Param, f64)>,
}

/// Trained (or loaded) embeddings with the variant's composition rule.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSet {
    vocab: Vocabulary,
    input: Matrix,
    output: Matrix,
    sub: SubwordTable,
    config: EmbeddingTrainConfig,
    /// Input rows already hold composed vectors (sets read back from disk).
    precomposed: bool,
}

impl EmbeddingSet {
    pub(crate) fn from_parts(
        vocab: Vocabulary,
        input: Matrix,
        output: Matrix,
        sub: SubwordTable,
        config: EmbeddingTrainConfig,
        precomposed: bool,
    ) -> Self {
        debug_assert_eq!(input.rows(), vocab.len());
        EmbeddingSet {
            vocab,
            input,
            output,
            sub,
            config,
            precomposed,
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn variant(&self) -> Variant {
        self.config.variant
    }

    pub fn config(&self) -> &EmbeddingTrainConfig {
        &self.config
    }

    pub fn is_precomposed(&self) -> bool {
        self.precomposed
    }

    /// Word (input) vectors, one row per vocabulary index including UNK.
    pub fn input(&self) -> &Matrix {
        &self.input
    }

    pub fn input_mut(&mut self) -> &mut Matrix {
        &mut self.input
    }

    /// Context (output) vectors.
    pub fn output(&self) -> &Matrix {
        &self.output
    }

    pub fn output_mut(&mut self) -> &mut Matrix {
        &mut self.output
    }

    pub fn subwords(&self) -> &SubwordTable {
        &self.sub
    }

    pub fn subwords_mut(&mut self) -> &mut SubwordTable {
        &mut self.sub
    }

    pub fn param_row(&self, p: Param) -> &[f64] {
        match p {
            Param::Word(i) => self.input.row(i),
            Param::Sub(i) => self.sub.vectors.row(i),
        }
    }

    pub fn param_row_mut(&mut self, p: Param) -> &mut [f64] {
        match p {
            Param::Word(i) => self.input.row_mut(i),
            Param::Sub(i) => self.sub.vectors.row_mut(i),
        }
    }

    /// Picks the cluster vector of `c` most cosine-similar to `context_mean`.
    /// Ties and a zero context go to cluster 0.
    pub fn assign_cluster(&self, c: char, context_mean: &[f64]) -> Result<usize> {
        if self.variant() != Variant::CweCluster {
            return Err(Error::Config(format!(
                "cluster assignment needs the cwe-l variant, not {}",
                self.variant()
            )));
        }
        let base = self.sub.char_base(c).ok_or(Error::UnknownCharacter(c))?;
        let mut best = 0;
        let mut best_sim = f64::NEG_INFINITY;
        for s in 0..self.config.clusters {
            let sim = cosine(context_mean, self.sub.vectors.row(base + s));
            if sim > best_sim {
                best = s;
                best_sim = sim;
            }
        }
        Ok(best)
    }

    /// The rows and weights that make up `word`'s vector.
    ///
    /// `context` is only consulted by the cluster variant; without it every
    /// character uses cluster 0.
    pub fn composition(&self, word: &str, context: Option<&[f64]>) -> Result<Composition> {
        let index = self.vocab.get(word);
        if self.precomposed {
            return match index {
                Some(i) => Ok(Composition {
                    parts: vec![(Param::Word(i), 1.0)],
                }),
                None if self.variant() == Variant::FastText => self.oov_ngram_composition(word),
                None => Err(Error::OutOfVocabulary(word.to_string())),
            };
        }
        match self.variant() {
            Variant::Sgns => {
                let i = index.ok_or_else(|| Error::OutOfVocabulary(word.to_string()))?;
                Ok(Composition {
                    parts: vec![(Param::Word(i), 1.0)],
                })
            }
            Variant::CwePosition | Variant::CweCluster => {
                let i = index.ok_or_else(|| Error::OutOfVocabulary(word.to_string()))?;
                let chars: Vec<char> = word.chars().collect();
                let n = chars.len();
                let weight = 0.5 / n as f64;
                let mut parts = Vec::with_capacity(n + 1);
                parts.push((Param::Word(i), 0.5));
                for (k, &c) in chars.iter().enumerate() {
                    let base = self.sub.char_base(c).ok_or(Error::UnknownCharacter(c))?;
                    let slot = match self.variant() {
                        Variant::CwePosition => CharPosition::of(k, n).slot(),
                        _ => match context {
                            Some(ctx) => self.assign_cluster(c, ctx)?,
                            None => 0,
                        },
                    };
                    parts.push((Param::Sub(base + slot), weight));
                }
                Ok(Composition { parts })
            }
            Variant::FastText => match index {
                Some(i) => {
                    let grams = extract_ngrams(word, self.config.min_n, self.config.max_n)?;
                    let mut rows = Vec::with_capacity(grams.len() + 1);
                    rows.push(Param::Word(i));
                    for g in &grams {
                        let r = self
                            .sub
                            .get(g)
                            .ok_or_else(|| Error::field(g.as_str(), "n-gram missing from table"))?;
                        rows.push(Param::Sub(r));
                    }
                    let weight = 1.0 / rows.len() as f64;
                    Ok(Composition {
                        parts: rows.into_iter().map(|p| (p, weight)).collect(),
                    })
                }
                None => self.oov_ngram_composition(word),
            },
        }
    }

    fn oov_ngram_composition(&self, word: &str) -> Result<Composition> {
        let grams = extract_ngrams(word, self.config.min_n, self.config.max_n)?;
        let rows: Vec<Param> = grams
            .iter()
            .filter_map(|g| self.sub.get(g).map(Param::Sub))
            .collect();
        if rows.is_empty() {
            return Err(Error::OutOfVocabulary(word.to_string()));
        }
        let weight = 1.0 / rows.len() as f64;
        Ok(Composition {
            parts: rows.into_iter().map(|p| (p, weight)).collect(),
        })
    }

    pub fn compose(&self, composition: &Composition) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for &(p, w) in &composition.parts {
            axpy(w, self.param_row(p), &mut out);
        }
        out
    }

    /// The vector a downstream model sees for `word`.
    pub fn compose_word_vector(&self, word: &str, context: Option<&[f64]>) -> Result<Vec<f64>> {
        let c = self.composition(word, context)?;
        Ok(self.compose(&c))
    }

    /// Composed vectors for every real vocabulary token, in index order.
    pub fn composed_matrix(&self) -> Matrix {
        let dim = self.dim();
        let mut m = Matrix::zeros(self.vocab.num_tokens(), dim);
        for (i, token) in self.vocab.tokens().iter().enumerate() {
            let v = self
                .compose_word_vector(token, None)
                .expect("vocabulary tokens always compose");
            m.row_mut(i).copy_from_slice(&v);
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.input.is_finite() && self.output.is_finite() && self.sub.vectors.is_finite()
    }
}
