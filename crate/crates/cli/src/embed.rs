use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use headvote_core::corpus::load_corpus;
use headvote_core::embeddings::{
    format_sidecar, format_word_vectors, sidecar_path, train_embeddings, EmbeddingSet,
    EmbeddingTrainConfig, Variant,
};

use crate::output::{require_file, Outputs};

#[derive(Args, Debug, Clone)]
pub struct EmbedArgs {
    /// Tokenised corpus, one sentence per line.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output vector file; sub-vectors go to `<out>.sub`.
    #[arg(long)]
    pub out: PathBuf,
    /// sgns, cwe-p, cwe-l or fasttext.
    #[arg(long, default_value = "sgns")]
    pub variant: Variant,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, default_value_t = 300)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 5)]
    pub min_count: u64,
    /// Initial learning rate, decayed linearly.
    #[arg(long, default_value_t = 0.025)]
    pub lr: f64,
    /// Cluster vectors per character (cwe-l).
    #[arg(long, default_value_t = 3)]
    pub clusters: usize,
    /// Shortest character n-gram (fasttext).
    #[arg(long, default_value_t = 1)]
    pub min_n: usize,
    /// Longest character n-gram (fasttext).
    #[arg(long, default_value_t = 3)]
    pub max_n: usize,
    /// Frequent-word subsampling threshold; off when absent.
    #[arg(long)]
    pub subsample: Option<f64>,
    /// Parallel shards per epoch; only 1 is reproducible.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl EmbedArgs {
    pub fn config(&self) -> EmbeddingTrainConfig {
        EmbeddingTrainConfig {
            dim: self.dim,
            window: self.window,
            epochs: self.epochs,
            negatives: self.negatives,
            min_count: self.min_count,
            lr0: self.lr,
            variant: self.variant,
            clusters: self.clusters,
            min_n: self.min_n,
            max_n: self.max_n,
            subsample: self.subsample,
            workers: self.workers,
            seed: self.seed,
        }
    }
}

pub fn wide_fasttext_warning(variant: Variant, window: usize) -> Option<String> {
    (variant == Variant::FastText && window > 5).then(|| {
        format!(
            "warning: fasttext vectors trained with window {window} tend to rank many \
             single-character words among a word's nearest neighbours; inspect them with \
             `headvote nn` before relying on them"
        )
    })
}

pub fn stage(set: &EmbeddingSet, out: &PathBuf, outputs: &mut Outputs) -> Result<()> {
    outputs.add(out, &format_word_vectors(set))?;
    if let Some(sidecar) = format_sidecar(set) {
        outputs.add(sidecar_path(out), &sidecar)?;
    }
    Ok(())
}

pub fn run(args: &EmbedArgs) -> Result<()> {
    require_file(&args.corpus, "corpus")?;
    let config = args.config();
    config.validate()?;
    if let Some(w) = wide_fasttext_warning(args.variant, args.window) {
        eprintln!("{w}");
    }
    let corpus = load_corpus(&args.corpus)?;
    let set = train_embeddings(&corpus, &config).context("training embeddings")?;
    let mut outputs = Outputs::new();
    stage(&set, &args.out, &mut outputs)?;
    outputs.commit()?;
    eprintln!(
        "{} vectors of dimension {} written to {}",
        set.vocab().num_tokens(),
        set.dim(),
        args.out.display()
    );
    Ok(())
}
