use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::Args;
use headvote_core::bow_svm::{train_svm, SvmConfig, SvmModel, Weighting};
use headvote_core::corpus::{load_dataset, DatasetSpec, Headline, Vocabulary};
use headvote_core::embeddings::{load_embeddings, EmbeddingSet};
use headvote_core::nets::{self, init_model, Arch, Example, Granularity, Init, NetConfig};

use crate::output::{require_file, Outputs};

/// A network architecture or the bag-of-words SVM.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum System {
    Net(Arch),
    BowSvm,
}

impl FromStr for System {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "bow-svm" {
            return Ok(System::BowSvm);
        }
        s.parse()
            .map(System::Net)
            .map_err(|_| format!("unknown architecture `{s}` (nbow, cnn, lstm, bow-svm)"))
    }
}

#[derive(Args, Debug, Clone)]
pub struct TrainArgs {
    /// nbow, cnn, lstm or bow-svm.
    #[arg(long)]
    pub arch: System,
    /// Class list, one name per line.
    #[arg(long)]
    pub classes: PathBuf,
    /// Training set, `label<TAB>tokens` per line.
    #[arg(long)]
    pub train: PathBuf,
    /// Development set used to pick the best epoch.
    #[arg(long)]
    pub dev: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch report; defaults to `<out>.report.tsv`.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Pre-trained vectors for the embedding layer.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Embed characters instead of words, with random vectors.
    #[arg(long)]
    pub char_level: bool,
    /// Embedding size; defaults to the pre-trained size, else 300.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub filter_width: usize,
    #[arg(long, default_value_t = 128)]
    pub filters: usize,
    #[arg(long, default_value_t = 128)]
    pub hidden: usize,
    #[arg(long, default_value_t = 30)]
    pub max_len: usize,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    /// Defaults to 10 for networks and 20 for the SVM.
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    /// Keep pre-trained embedding rows fixed.
    #[arg(long)]
    pub freeze_embeddings: bool,
    /// Minimum training count for the model vocabulary.
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
    /// SVM regularisation trade-off.
    #[arg(long, default_value_t = 1.0)]
    pub svm_c: f64,
    /// Use token counts instead of occurrence as SVM features.
    #[arg(long)]
    pub svm_counts: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

pub struct Trained {
    pub model_text: String,
    pub report: String,
    pub best_dev_accuracy: f64,
}

fn report_path(args: &TrainArgs) -> PathBuf {
    args.report.clone().unwrap_or_else(|| {
        let mut s = args.out.clone().into_os_string();
        s.push(".report.tsv");
        s.into()
    })
}

fn svm_dev_accuracy(model: &SvmModel, dev: &[Headline]) -> f64 {
    let correct = dev
        .iter()
        .filter(|h| model.predict_tokens(&h.tokens).0 == h.label)
        .count();
    correct as f64 / dev.len() as f64
}

pub fn train_system(
    args: &TrainArgs,
    spec: &DatasetSpec,
    train: &[Headline],
    dev: &[Headline],
    pretrained: Option<&EmbeddingSet>,
) -> Result<Trained> {
    if train.is_empty() || dev.is_empty() {
        bail!("training and development sets must both be non-empty");
    }
    match args.arch {
        System::BowSvm => {
            let vocab = Vocabulary::build(train.iter().map(|h| &h.tokens), args.min_count)?;
            let config = SvmConfig {
                c: args.svm_c,
                epochs: args.epochs.unwrap_or(20),
                seed: args.seed,
                weighting: if args.svm_counts {
                    Weighting::Counts
                } else {
                    Weighting::Binary
                },
            };
            let model = train_svm(train, &vocab, spec, &config)?;
            let acc = svm_dev_accuracy(&model, dev);
            Ok(Trained {
                model_text: model.to_text(),
                report: format!("dev_accuracy\t{acc:.6}\n"),
                best_dev_accuracy: acc,
            })
        }
        System::Net(arch) => {
            if pretrained.is_some() && args.char_level {
                bail!("--char-level uses random character vectors and takes no --embeddings");
            }
            let granularity = if args.char_level {
                Granularity::Char
            } else {
                Granularity::Word
            };
            let init = match (&pretrained, args.char_level) {
                (Some(_), _) => Init::Pretrained,
                (None, true) => Init::RandomChar,
                (None, false) => Init::RandomWord,
            };
            let dim = args.dim.or(pretrained.map(|p| p.dim())).unwrap_or(300);
            let defaults = NetConfig::new(arch, spec.num_classes());
            let config = NetConfig {
                dim,
                filter_width: args.filter_width,
                num_filters: args.filters,
                hidden: args.hidden,
                max_len: args.max_len,
                lr: args.lr,
                epochs: args.epochs.unwrap_or(defaults.epochs),
                batch_size: args.batch_size,
                seed: args.seed,
                fine_tune_embeddings: !args.freeze_embeddings,
                init,
                granularity,
                ..defaults
            };
            let tokens: Vec<Vec<String>> = train
                .iter()
                .map(|h| granularity.tokenize(&h.tokens))
                .collect();
            let vocab = Vocabulary::build(&tokens, args.min_count)?;
            let model = init_model(&config, spec, &vocab, pretrained)?;
            let encode = |d: &[Headline]| -> Vec<Example> {
                d.iter()
                    .map(|h| Example::from_headline(&model, h))
                    .collect()
            };
            let (train_set, dev_set) = (encode(train), encode(dev));
            let (best, report) = nets::train(model, &train_set, &dev_set)?;
            Ok(Trained {
                model_text: best.to_text(),
                report: report.to_tsv(),
                best_dev_accuracy: report.best_dev_accuracy,
            })
        }
    }
}

pub fn run(args: &TrainArgs) -> Result<()> {
    require_file(&args.classes, "class list")?;
    require_file(&args.train, "training set")?;
    require_file(&args.dev, "development set")?;
    if let Some(p) = &args.embeddings {
        require_file(p, "embedding file")?;
        if args.arch == System::BowSvm {
            bail!("bow-svm does not use embeddings");
        }
    }
    let spec = DatasetSpec::load(&args.classes)?;
    let train = load_dataset(&args.train, &spec)?;
    let dev = load_dataset(&args.dev, &spec)?;
    let pretrained = args
        .embeddings
        .as_ref()
        .map(|p| load_embeddings(p).with_context(|| format!("loading {}", p.display())))
        .transpose()?;
    let trained = train_system(args, &spec, &train, &dev, pretrained.as_ref())?;
    let mut outputs = Outputs::new();
    outputs.add(&args.out, &trained.model_text)?;
    outputs.add(report_path(args), &trained.report)?;
    outputs.commit()?;
    eprintln!("best dev accuracy {:.4}", trained.best_dev_accuracy);
    Ok(())
}
