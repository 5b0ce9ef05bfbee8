use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use headvote_core::bow_svm::SVM_MAGIC;
use headvote_core::corpus::{parse_token_lines, DatasetSpec};
use headvote_core::nets::NET_MAGIC;
use headvote_core::predictions::{format_predictions, PredictionRow};
use headvote_core::{ClassifierModel, SvmModel};

use crate::output::{require_file, write_one};

#[derive(Args, Debug, Clone)]
pub struct PredictArgs {
    /// Model written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Headlines, one per line; a leading `label<TAB>` column is ignored.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

pub enum AnyModel {
    Net(ClassifierModel),
    Svm(SvmModel),
}

impl AnyModel {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let first = text.lines().next().unwrap_or_default();
        let model = if first == NET_MAGIC {
            AnyModel::Net(ClassifierModel::from_text(&text)?)
        } else if first == SVM_MAGIC {
            AnyModel::Svm(SvmModel::from_text(&text)?)
        } else {
            bail!(
                "{}: not a model file (first line `{first}`)",
                path.display()
            );
        };
        Ok(model)
    }

    pub fn spec(&self) -> &DatasetSpec {
        match self {
            AnyModel::Net(m) => &m.spec,
            AnyModel::Svm(m) => &m.spec,
        }
    }

    pub fn predict(&self, tokens: &[String]) -> Result<PredictionRow> {
        let (label, scores) = match self {
            AnyModel::Net(m) => m.predict(tokens)?,
            AnyModel::Svm(m) => m.predict_tokens(tokens),
        };
        Ok(PredictionRow { label, scores })
    }

    /// Prediction-file text for `lines`.
    pub fn predict_all(&self, lines: &[Vec<String>]) -> Result<String> {
        let rows = lines
            .iter()
            .enumerate()
            .map(|(i, t)| {
                self.predict(t)
                    .with_context(|| format!("input line {}", i + 1))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(format_predictions(&rows, self.spec()))
    }
}

pub fn run(args: &PredictArgs) -> Result<()> {
    require_file(&args.model, "model")?;
    require_file(&args.input, "input")?;
    let model = AnyModel::load(&args.model)
        .with_context(|| format!("loading model {}", args.model.display()))?;
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let lines = parse_token_lines(&text)?;
    write_one(&args.out, &model.predict_all(&lines)?)
}
