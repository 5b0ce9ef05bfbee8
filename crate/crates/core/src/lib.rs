//! Short-text classification toolkit.
//!
//! The pipeline trains character-enhanced word embeddings (skip-gram with
//! negative sampling, position- and cluster-based character composition,
//! and fastText-style n-gram composition), feeds them to three neural
//! classifiers (neural bag-of-words, a single-layer CNN and an LSTM), adds a
//! bag-of-words linear SVM, and combines everything with a two-level
//! plurality vote. Evaluation reports accuracy and macro-averaged
//! precision, recall and F1.
//!
//! All training paths are deterministic for a fixed seed.

pub mod bow_svm;
pub mod corpus;
pub mod embeddings;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod math;
pub mod nets;
pub mod persist;
pub mod predictions;
pub mod synthetic;
pub mod textfmt;

pub use bow_svm::{SparseVector, SvmConfig, SvmModel};
pub use corpus::{DatasetSpec, Headline, Vocabulary};
pub use embeddings::{EmbeddingSet, EmbeddingTrainConfig, NegativeSamplingTable, Variant};
pub use ensemble::{Prediction, VoteRule, VoteTree};
pub use error::{Error, Result};
pub use eval::{ConfusionMatrix, Metrics};
pub use math::Matrix;
pub use nets::{Arch, ClassifierModel, Granularity, NetConfig, TrainReport};
