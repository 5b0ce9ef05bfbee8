//! Neural bag-of-words, single-layer CNN and LSTM classifiers.
//!
//! All three share one pipeline: embedding lookup, an encoder that turns the
//! token sequence into a fixed-width vector, and a softmax output layer.
//! Gradients are computed by hand.

mod encoder;
mod io;
mod train;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{split_chars, DatasetSpec, Vocabulary};
use crate::embeddings::EmbeddingSet;
use crate::error::{Error, Result};
use crate::math::{argmax, softmax, Matrix};

pub use encoder::{backward, forward, loss_and_grad, softmax_cross_entropy, Cache, Gradients};
pub use io::NET_MAGIC;
pub use train::{accuracy, train, Adam, EpochStats, Example, TrainReport};

/// Range of the uniform initialisation for random parameters.
pub const INIT_RANGE: f64 = 0.05;
/// Initial bias of the LSTM forget gate.
pub const FORGET_BIAS: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arch {
    Nbow,
    Cnn,
    Lstm,
}

impl Arch {
    pub fn tag(self) -> &'static str {
        match self {
            Arch::Nbow => "nbow",
            Arch::Cnn => "cnn",
            Arch::Lstm => "lstm",
        }
    }

    pub const ALL: [Arch; 3] = [Arch::Nbow, Arch::Cnn, Arch::Lstm];
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Arch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nbow" => Ok(Arch::Nbow),
            "cnn" => Ok(Arch::Cnn),
            "lstm" => Ok(Arch::Lstm),
            _ => Err(Error::Config(format!("unknown architecture `{s}`"))),
        }
    }
}

/// Whether the model reads words or the characters of words.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Granularity {
    #[default]
    Word,
    Char,
}

impl Granularity {
    pub fn tag(self) -> &'static str {
        match self {
            Granularity::Word => "word",
            Granularity::Char => "char",
        }
    }

    /// Applies the granularity to a word sequence.
    pub fn tokenize<S: AsRef<str>>(self, tokens: &[S]) -> Vec<String> {
        match self {
            Granularity::Word => tokens.iter().map(|t| t.as_ref().to_string()).collect(),
            Granularity::Char => split_chars(tokens),
        }
    }
}

impl FromStr for Granularity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word" => Ok(Granularity::Word),
            "char" => Ok(Granularity::Char),
            _ => Err(Error::Config(format!("unknown granularity `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Init {
    /// Rows copied from composed pre-trained vectors.
    Pretrained,
    #[default]
    RandomWord,
    /// Random vectors over characters; implies character granularity.
    RandomChar,
}

impl Init {
    pub fn tag(self) -> &'static str {
        match self {
            Init::Pretrained => "pretrained",
            Init::RandomWord => "random-word",
            Init::RandomChar => "random-char",
        }
    }
}

impl FromStr for Init {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pretrained" => Ok(Init::Pretrained),
            "random-word" => Ok(Init::RandomWord),
            "random-char" => Ok(Init::RandomChar),
            _ => Err(Error::Config(format!("unknown init `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetConfig {
    pub arch: Arch,
    pub dim: usize,
    pub num_classes: usize,
    pub filter_width: usize,
    pub num_filters: usize,
    pub hidden: usize,
    pub max_len: usize,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub fine_tune_embeddings: bool,
    pub init: Init,
    pub granularity: Granularity,
}

impl NetConfig {
    pub fn new(arch: Arch, num_classes: usize) -> Self {
        NetConfig {
            arch,
            dim: 300,
            num_classes,
            filter_width: 3,
            num_filters: 128,
            hidden: 128,
            max_len: 30,
            lr: 1e-3,
            epochs: 10,
            batch_size: 64,
            seed: 1,
            fine_tune_embeddings: true,
            init: Init::RandomWord,
            granularity: Granularity::Word,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.num_classes < 2 {
            return fail("need at least 2 classes".into());
        }
        if self.dim < 1 || self.max_len < 1 || self.batch_size < 1 {
            return fail("dim, max_len and batch_size must be positive".into());
        }
        if self.filter_width < 1 {
            return fail("filter_width must be at least 1".into());
        }
        if self.arch == Arch::Cnn && (self.num_filters < 1 || self.max_len < self.filter_width) {
            return fail(format!(
                "cnn needs num_filters >= 1 and max_len >= filter_width ({} < {})",
                self.max_len, self.filter_width
            ));
        }
        if self.arch == Arch::Lstm && self.hidden < 1 {
            return fail("hidden must be at least 1".into());
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return fail("lr must be non-negative".into());
        }
        if self.init == Init::RandomChar && self.granularity != Granularity::Char {
            return fail("random-char init requires char granularity".into());
        }
        if self.init == Init::RandomWord && self.granularity != Granularity::Word {
            return fail("random-word init requires word granularity".into());
        }
        Ok(())
    }

    /// Width of the sentence vector fed to the output layer.
    pub fn encoder_width(&self) -> usize {
        match self.arch {
            Arch::Nbow => self.dim,
            Arch::Cnn => self.num_filters,
            Arch::Lstm => self.hidden,
        }
    }
}

/// Every trainable tensor. Tensors an architecture does not use are empty.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    /// One row per vocabulary index (UNK included) plus a trailing pad row
    /// that stays zero.
    pub embedding: Matrix,
    /// `F × (width · dim)`, window rows laid out position-major.
    pub conv_w: Matrix,
    pub conv_b: Matrix,
    /// `4H × (dim + H)`, gate blocks in input, forget, output, candidate order.
    pub lstm_w: Matrix,
    pub lstm_b: Matrix,
    pub out_w: Matrix,
    pub out_b: Matrix,
}

impl Params {
    pub const NAMES: [&'static str; 7] = [
        "embedding",
        "conv_w",
        "conv_b",
        "lstm_w",
        "lstm_b",
        "out_w",
        "out_b",
    ];

    pub fn zeros_like(other: &Params) -> Params {
        let z = |m: &Matrix| Matrix::zeros(m.rows(), m.cols());
        Params {
            embedding: z(&other.embedding),
            conv_w: z(&other.conv_w),
            conv_b: z(&other.conv_b),
            lstm_w: z(&other.lstm_w),
            lstm_b: z(&other.lstm_b),
            out_w: z(&other.out_w),
            out_b: z(&other.out_b),
        }
    }

    pub fn tensors(&self) -> [(&'static str, &Matrix); 7] {
        [
            ("embedding", &self.embedding),
            ("conv_w", &self.conv_w),
            ("conv_b", &self.conv_b),
            ("lstm_w", &self.lstm_w),
            ("lstm_b", &self.lstm_b),
            ("out_w", &self.out_w),
            ("out_b", &self.out_b),
        ]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, &mut Matrix); 7] {
        [
            ("embedding", &mut self.embedding),
            ("conv_w", &mut self.conv_w),
            ("conv_b", &mut self.conv_b),
            ("lstm_w", &mut self.lstm_w),
            ("lstm_b", &mut self.lstm_b),
            ("out_w", &mut self.out_w),
            ("out_b", &mut self.out_b),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, m)| m.is_finite())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierModel {
    pub config: NetConfig,
    pub spec: DatasetSpec,
    pub vocab: Vocabulary,
    pub params: Params,
}

impl ClassifierModel {
    pub fn pad_index(&self) -> usize {
        self.vocab.len()
    }

    /// Token ids after granularity splitting and truncation to `max_len`.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        let tokens = self.config.granularity.tokenize(tokens);
        let mut ids = self.vocab.ids(&tokens);
        ids.truncate(self.config.max_len);
        ids
    }

    /// Label (smallest index on ties) and class probabilities.
    pub fn predict<S: AsRef<str>>(&self, tokens: &[S]) -> Result<(usize, Vec<f64>)> {
        self.predict_ids(&self.encode(tokens))
    }

    pub fn predict_ids(&self, ids: &[usize]) -> Result<(usize, Vec<f64>)> {
        let (logits, _) = forward(self, ids)?;
        let probs = softmax(&logits);
        Ok((argmax(&probs), probs))
    }
}

/// Builds a model with seeded random parameters; with `pretrained`, the
/// embedding rows of tokens the set can compose are copied from it.
pub fn init_model(
    config: &NetConfig,
    spec: &DatasetSpec,
    vocab: &Vocabulary,
    pretrained: Option<&EmbeddingSet>,
) -> Result<ClassifierModel> {
    config.validate()?;
    if config.num_classes != spec.num_classes() {
        return Err(Error::DimensionMismatch {
            expected: spec.num_classes(),
            actual: config.num_classes,
        });
    }
    match (config.init, pretrained) {
        (Init::Pretrained, None) => {
            return Err(Error::Config(
                "pretrained init needs an embedding set".into(),
            ))
        }
        (Init::RandomWord | Init::RandomChar, Some(_)) => {
            return Err(Error::Config(
                "random init does not take an embedding set".into(),
            ))
        }
        (_, Some(set)) if set.dim() != config.dim => {
            return Err(Error::DimensionMismatch {
                expected: config.dim,
                actual: set.dim(),
            })
        }
        _ => {}
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dim = config.dim;
    let k = config.num_classes;
    let rows = vocab.len() + 1;
    let mut embedding = Matrix::uniform(rows, dim, INIT_RANGE, &mut rng);
    embedding.row_mut(rows - 1).fill(0.0);
    if let Some(set) = pretrained {
        for (i, token) in vocab.tokens().iter().enumerate() {
            if let Ok(v) = set.compose_word_vector(token, None) {
                embedding.row_mut(i).copy_from_slice(&v);
            }
        }
    }
    let empty = || Matrix::zeros(0, 0);
    let (conv_w, conv_b, lstm_w, lstm_b) = match config.arch {
        Arch::Nbow => (empty(), empty(), empty(), empty()),
        Arch::Cnn => {
            let f = config.num_filters;
            (
                Matrix::uniform(f, config.filter_width * dim, INIT_RANGE, &mut rng),
                Matrix::uniform(1, f, INIT_RANGE, &mut rng),
                empty(),
                empty(),
            )
        }
        Arch::Lstm => {
            let h = config.hidden;
            let w = Matrix::uniform(4 * h, dim + h, INIT_RANGE, &mut rng);
            let mut b = Matrix::uniform(1, 4 * h, INIT_RANGE, &mut rng);
            b.row_mut(0)[h..2 * h].fill(FORGET_BIAS);
            (empty(), empty(), w, b)
        }
    };
    let enc = config.encoder_width();
    let params = Params {
        embedding,
        conv_w,
        conv_b,
        lstm_w,
        lstm_b,
        out_w: Matrix::uniform(k, enc, INIT_RANGE, &mut rng),
        out_b: Matrix::uniform(1, k, INIT_RANGE, &mut rng),
    };
    Ok(ClassifierModel {
        config: config.clone(),
        spec: spec.clone(),
        vocab: vocab.clone(),
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::{train_embeddings, EmbeddingTrainConfig, Variant};

    fn spec() -> DatasetSpec {
        DatasetSpec::new(["a", "b", "c"]).unwrap()
    }

    fn vocab() -> Vocabulary {
        Vocabulary::from_entries(["大家", "好", "高兴"].iter().map(|t| (t.to_string(), 1)), 1)
    }

    fn small(arch: Arch) -> NetConfig {
        NetConfig {
            dim: 6,
            num_filters: 4,
            hidden: 5,
            ..NetConfig::new(arch, 3)
        }
    }

    #[test]
    fn random_init_is_bounded_and_seeded() {
        for arch in Arch::ALL {
            let a = init_model(&small(arch), &spec(), &vocab(), None).unwrap();
            let b = init_model(&small(arch), &spec(), &vocab(), None).unwrap();
            assert_eq!(a, b);
            for (name, m) in a.params.tensors() {
                let bound = if name == "lstm_b" {
                    FORGET_BIAS
                } else {
                    INIT_RANGE
                };
                assert!(m.as_slice().iter().all(|v| v.abs() <= bound), "{name}");
            }
            assert!(a
                .params
                .embedding
                .row(a.pad_index())
                .iter()
                .all(|&v| v == 0.0));
        }
    }

    #[test]
    fn pretrained_rows_are_composed_vectors() {
        let corpus: Vec<Vec<String>> = vec![
            vec!["大家".into(), "好".into(), "高兴".into()],
            vec!["好".into(), "大家".into()],
        ];
        let set = train_embeddings(
            &corpus,
            &EmbeddingTrainConfig {
                dim: 6,
                epochs: 1,
                min_count: 1,
                variant: Variant::CwePosition,
                ..Default::default()
            },
        )
        .unwrap();
        let mut cfg = small(Arch::Nbow);
        cfg.init = Init::Pretrained;
        let model = init_model(&cfg, &spec(), &vocab(), Some(&set)).unwrap();
        for (i, t) in vocab().tokens().iter().enumerate() {
            assert_eq!(
                model.params.embedding.row(i),
                set.compose_word_vector(t, None).unwrap().as_slice()
            );
        }
        cfg.dim = 7;
        assert!(matches!(
            init_model(&cfg, &spec(), &vocab(), Some(&set)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn init_mode_must_match_inputs() {
        let mut cfg = small(Arch::Nbow);
        cfg.init = Init::Pretrained;
        assert!(init_model(&cfg, &spec(), &vocab(), None).is_err());
        cfg.init = Init::RandomChar;
        assert!(init_model(&cfg, &spec(), &vocab(), None).is_err());
        cfg.granularity = Granularity::Char;
        assert!(init_model(&cfg, &spec(), &vocab(), None).is_ok());
        let mut cnn = small(Arch::Cnn);
        cnn.max_len = 2;
        assert!(init_model(&cnn, &spec(), &vocab(), None).is_err());
    }

    #[test]
    fn zero_model_predicts_first_class_uniformly() {
        for arch in Arch::ALL {
            let mut m = init_model(&small(arch), &spec(), &vocab(), None).unwrap();
            for (_, t) in m.params.tensors_mut() {
                t.fill(0.0);
            }
            let (label, probs) = m.predict(&["好", "大家"]).unwrap();
            assert_eq!(label, 0);
            for p in probs {
                assert!((p - 1.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn predict_is_pure_and_shift_invariant() {
        let mut m = init_model(&small(Arch::Lstm), &spec(), &vocab(), None).unwrap();
        let a = m.predict(&["高兴", "好"]).unwrap();
        assert_eq!(a, m.predict(&["高兴", "好"]).unwrap());
        m.params
            .out_b
            .as_mut_slice()
            .iter_mut()
            .for_each(|b| *b += 3.0);
        let b = m.predict(&["高兴", "好"]).unwrap();
        assert_eq!(a.0, b.0);
        for (p, q) in a.1.iter().zip(&b.1) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn char_granularity_splits_words() {
        let mut cfg = small(Arch::Nbow);
        cfg.init = Init::RandomChar;
        cfg.granularity = Granularity::Char;
        let chars = Vocabulary::from_entries(["大", "家"].iter().map(|t| (t.to_string(), 1)), 1);
        let m = init_model(&cfg, &spec(), &chars, None).unwrap();
        assert_eq!(m.encode(&["大家", "好"]), vec![0, 1, chars.unk_index()]);
    }
}
