//! The full 16-system chain: five embedding sets, three networks on each,
//! the bag-of-words SVM, a two-level vote and evaluation.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::Args;
use headvote_core::corpus::{load_corpus, load_dataset, DatasetSpec, Headline};
use headvote_core::embeddings::{load_embeddings, train_embeddings, EmbeddingSet, Variant};
use headvote_core::ensemble::{
    build_paper_topology, paper_system_ids, BOW_SYSTEM, PAPER_ARCHS, PAPER_EMBEDDINGS,
};
use headvote_core::predictions::{format_predictions, parse_predictions};
use headvote_core::VoteRule;

use crate::embed::{self, EmbedArgs};
use crate::evaluate::evaluate;
use crate::output::{require_file, write_one, Outputs};
use crate::predict::AnyModel;
use crate::train::{train_system, System, TrainArgs};
use crate::vote::{vote_rows, PRED_EXT};

#[derive(Args, Debug, Clone)]
pub struct PaperRunArgs {
    /// Unlabelled corpus for the embeddings.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub classes: PathBuf,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub dev: PathBuf,
    /// Optional test set, predicted and scored like the dev set.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Directory for every artifact of the run.
    #[arg(long)]
    pub work_dir: PathBuf,
    #[arg(long, default_value_t = 300)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub emb_epochs: usize,
    #[arg(long, default_value_t = 5)]
    pub emb_min_count: u64,
    #[arg(long, default_value_t = 10)]
    pub net_epochs: usize,
    #[arg(long, default_value_t = 128)]
    pub filters: usize,
    #[arg(long, default_value_t = 128)]
    pub hidden: usize,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// `cwe-l-w11` → (cwe-l, 11).
fn parse_embedding_id(id: &str) -> Result<(Variant, usize)> {
    let (tag, window) = id
        .rsplit_once("-w")
        .ok_or_else(|| anyhow!("embedding id `{id}` lacks a window"))?;
    Ok((tag.parse()?, window.parse()?))
}

fn train_args(args: &PaperRunArgs, arch: System, out: PathBuf) -> TrainArgs {
    TrainArgs {
        arch,
        classes: args.classes.clone(),
        train: args.train.clone(),
        dev: args.dev.clone(),
        out,
        report: None,
        embeddings: None,
        char_level: false,
        dim: Some(args.dim),
        filter_width: 3,
        filters: args.filters,
        hidden: args.hidden,
        max_len: 30,
        lr: 0.001,
        epochs: (arch != System::BowSvm).then_some(args.net_epochs),
        batch_size: 64,
        freeze_embeddings: false,
        min_count: 1,
        svm_c: 1.0,
        svm_counts: false,
        seed: args.seed,
    }
}

struct Split {
    name: &'static str,
    gold: Vec<Headline>,
    tokens: Vec<Vec<String>>,
}

fn with_ext(dir: &Path, id: &str, ext: &str) -> PathBuf {
    dir.join(format!("{id}.{ext}"))
}

pub fn run(args: &PaperRunArgs) -> Result<()> {
    require_file(&args.corpus, "corpus")?;
    require_file(&args.classes, "class list")?;
    require_file(&args.train, "training set")?;
    require_file(&args.dev, "development set")?;
    if let Some(t) = &args.test {
        require_file(t, "test set")?;
    }
    let spec = DatasetSpec::load(&args.classes)?;
    let train = load_dataset(&args.train, &spec)?;
    let dev = load_dataset(&args.dev, &spec)?;
    let mut splits = Vec::new();
    for (name, data) in [
        ("dev", Some(dev.clone())),
        (
            "test",
            args.test
                .as_ref()
                .map(|t| load_dataset(t, &spec))
                .transpose()?,
        ),
    ] {
        if let Some(gold) = data {
            let tokens = gold.iter().map(|h| h.tokens.clone()).collect();
            splits.push(Split { name, gold, tokens });
        }
    }
    let corpus = load_corpus(&args.corpus)?;

    let emb_dir = args.work_dir.join("embeddings");
    let model_dir = args.work_dir.join("models");
    for dir in [&emb_dir, &model_dir] {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    for split in &splits {
        let dir = args.work_dir.join("predictions").join(split.name);
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    }

    let mut accuracy = HashMap::new();
    let mut run_system =
        |id: &str, arch: System, pretrained: Option<&EmbeddingSet>| -> Result<()> {
            let model_path = with_ext(&model_dir, id, "model");
            let targs = train_args(args, arch, model_path.clone());
            let trained = train_system(&targs, &spec, &train, &dev, pretrained)
                .with_context(|| format!("training {id}"))?;
            let mut outputs = Outputs::new();
            outputs.add(&model_path, &trained.model_text)?;
            outputs.add(with_ext(&model_dir, id, "report.tsv"), &trained.report)?;
            outputs.commit()?;
            let model = AnyModel::load(&model_path)?;
            for split in &splits {
                let dir = args.work_dir.join("predictions").join(split.name);
                write_one(
                    with_ext(&dir, id, PRED_EXT),
                    &model.predict_all(&split.tokens)?,
                )?;
            }
            eprintln!("{id}: best dev accuracy {:.4}", trained.best_dev_accuracy);
            accuracy.insert(id.to_string(), trained.best_dev_accuracy);
            Ok(())
        };

    for emb_id in PAPER_EMBEDDINGS {
        let (variant, window) = parse_embedding_id(emb_id)?;
        let eargs = EmbedArgs {
            corpus: args.corpus.clone(),
            out: with_ext(&emb_dir, emb_id, "vec"),
            variant,
            window,
            dim: args.dim,
            negatives: 5,
            epochs: args.emb_epochs,
            min_count: args.emb_min_count,
            lr: 0.025,
            clusters: 3,
            min_n: 1,
            max_n: 3,
            subsample: None,
            workers: args.workers,
            seed: args.seed,
        };
        let set = train_embeddings(&corpus, &eargs.config())
            .with_context(|| format!("training embeddings {emb_id}"))?;
        let mut outputs = Outputs::new();
        embed::stage(&set, &eargs.out, &mut outputs)?;
        outputs.commit()?;
        eprintln!("{emb_id}: {} vectors", set.vocab().num_tokens());
        let loaded = load_embeddings(&eargs.out)?;
        for arch in PAPER_ARCHS {
            let system = System::Net(arch.parse()?);
            run_system(&format!("{arch}-{emb_id}"), system, Some(&loaded))?;
        }
    }
    run_system(BOW_SYSTEM, System::BowSvm, None)?;

    let tree = build_paper_topology(&paper_system_ids())?;
    let mut outputs = Outputs::new();
    outputs.add(args.work_dir.join("ensemble.tree"), &tree.to_text())?;
    let mut summary = String::from("system\tbest_dev_accuracy\n");
    for id in paper_system_ids() {
        summary.push_str(&format!("{id}\t{:.6}\n", accuracy[&id]));
    }
    for split in &splits {
        let dir = args.work_dir.join("predictions").join(split.name);
        let mut systems = HashMap::new();
        for id in tree.leaves() {
            let text = fs::read_to_string(with_ext(&dir, id, PRED_EXT))?;
            systems.insert(id.to_string(), parse_predictions(&text, &spec)?);
        }
        let rows = vote_rows(&tree, &systems, VoteRule::Plurality, spec.num_classes())?;
        outputs.add(
            with_ext(&dir, "ensemble", PRED_EXT),
            &format_predictions(&rows, &spec),
        )?;
        let golds: Vec<usize> = split.gold.iter().map(|h| h.label).collect();
        let preds: Vec<usize> = rows.iter().map(|r| r.label).collect();
        let metrics = evaluate(&spec, &golds, &preds, false)?;
        let base = args.work_dir.join(format!("metrics-{}", split.name));
        outputs.add(base.with_extension("tsv"), &metrics.to_tsv(&spec))?;
        outputs.add(base.with_extension("json"), &metrics.to_json(&spec))?;
        summary.push_str(&format!(
            "ensemble-{}\t{:.6}\n",
            split.name, metrics.accuracy
        ));
    }
    outputs.add(args.work_dir.join("summary.tsv"), &summary)?;
    outputs.commit()?;
    print!("{summary}");
    Ok(())
}
