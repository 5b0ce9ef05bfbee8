use std::path::PathBuf;

use anyhow::{ensure, Result};
use clap::Args;
use headvote_core::corpus::{load_dataset, DatasetSpec};
use headvote_core::eval::{compute_metrics_with, confusion, MacroF1, Metrics};
use headvote_core::predictions::load_predictions;

use crate::output::{require_file, Outputs};

#[derive(Args, Debug, Clone)]
pub struct EvaluateArgs {
    /// Class list, one name per line.
    #[arg(long)]
    pub classes: PathBuf,
    /// Labelled set, `label<TAB>tokens` per line.
    #[arg(long)]
    pub gold: PathBuf,
    /// Prediction file, one line per gold line.
    #[arg(long)]
    pub pred: PathBuf,
    /// Write the `key<TAB>value` report here.
    #[arg(long)]
    pub out_tsv: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    pub out_json: Option<PathBuf>,
    /// Macro-F1 as the harmonic mean of macro precision and recall.
    #[arg(long)]
    pub f1_harmonic: bool,
}

pub fn evaluate(
    spec: &DatasetSpec,
    golds: &[usize],
    preds: &[usize],
    harmonic: bool,
) -> Result<Metrics> {
    ensure!(
        golds.len() == preds.len(),
        "{} gold lines but {} predictions",
        golds.len(),
        preds.len()
    );
    ensure!(!golds.is_empty(), "nothing to evaluate");
    let cm = confusion(golds, preds, spec.num_classes())?;
    let rule = if harmonic {
        MacroF1::HarmonicOfMacro
    } else {
        MacroF1::MeanOfClassF1
    };
    Ok(compute_metrics_with(&cm, rule))
}

pub fn run(args: &EvaluateArgs) -> Result<()> {
    require_file(&args.classes, "class list")?;
    require_file(&args.gold, "gold file")?;
    require_file(&args.pred, "prediction file")?;
    let spec = DatasetSpec::load(&args.classes)?;
    let golds: Vec<usize> = load_dataset(&args.gold, &spec)?
        .iter()
        .map(|h| h.label)
        .collect();
    let preds: Vec<usize> = load_predictions(&args.pred, &spec)?
        .iter()
        .map(|r| r.label)
        .collect();
    let metrics = evaluate(&spec, &golds, &preds, args.f1_harmonic)?;
    let tsv = metrics.to_tsv(&spec);
    let mut outputs = Outputs::new();
    if let Some(p) = &args.out_tsv {
        outputs.add(p, &tsv)?;
    }
    if let Some(p) = &args.out_json {
        outputs.add(p, &metrics.to_json(&spec))?;
    }
    outputs.commit()?;
    print!("{tsv}");
    Ok(())
}
