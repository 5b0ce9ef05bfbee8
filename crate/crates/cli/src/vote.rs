use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use headvote_core::corpus::DatasetSpec;
use headvote_core::ensemble::{build_paper_topology, flat_topology, paper_system_ids};
use headvote_core::predictions::{format_predictions, load_predictions, PredictionRow};
use headvote_core::{Prediction, VoteRule, VoteTree};

use crate::output::{require_file, write_one};

/// Extension of per-system prediction files inside a prediction directory.
pub const PRED_EXT: &str = "pred";

#[derive(Args, Debug, Clone)]
pub struct VoteArgs {
    /// Vote tree file; defaults to the two-level 16-system topology.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Class list, one name per line.
    #[arg(long)]
    pub classes: PathBuf,
    /// Prediction file for one system, as `ID=PATH`. Repeatable.
    #[arg(long = "source", value_name = "ID=PATH")]
    pub sources: Vec<String>,
    /// Directory holding `<ID>.pred` for systems not given by --source.
    #[arg(long)]
    pub pred_dir: Option<PathBuf>,
    /// Vote once over all leaves instead of level by level.
    #[arg(long)]
    pub flat: bool,
    /// Sum confidences instead of counting votes.
    #[arg(long)]
    pub soft: bool,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn load_tree(spec: Option<&Path>, flat: bool) -> Result<VoteTree> {
    let tree = match spec {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            VoteTree::parse(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => build_paper_topology(&paper_system_ids())?,
    };
    if flat {
        Ok(flat_topology(&tree.leaves())?)
    } else {
        Ok(tree)
    }
}

/// Maps every leaf of `tree` to an existing prediction file.
pub fn resolve_sources(
    tree: &VoteTree,
    sources: &[String],
    pred_dir: Option<&Path>,
) -> Result<Vec<(String, PathBuf)>> {
    let mut explicit = HashMap::new();
    for s in sources {
        let (id, path) = s
            .split_once('=')
            .ok_or_else(|| anyhow!("--source `{s}` is not of the form ID=PATH"))?;
        explicit.insert(id.to_string(), PathBuf::from(path));
    }
    let mut out = Vec::new();
    for leaf in tree.leaves() {
        let path = match (explicit.get(leaf), pred_dir) {
            (Some(p), _) => p.clone(),
            (None, Some(dir)) => dir.join(format!("{leaf}.{PRED_EXT}")),
            (None, None) => bail!("no prediction file given for system `{leaf}`"),
        };
        require_file(&path, &format!("predictions for system `{leaf}`"))?;
        out.push((leaf.to_string(), path));
    }
    Ok(out)
}

/// Votes line by line over per-system prediction rows.
pub fn vote_rows(
    tree: &VoteTree,
    systems: &HashMap<String, Vec<PredictionRow>>,
    rule: VoteRule,
    classes: usize,
) -> Result<Vec<PredictionRow>> {
    let mut lengths = systems.iter().map(|(id, rows)| (id, rows.len()));
    let Some((first_id, n)) = lengths.next() else {
        bail!("no prediction sources");
    };
    if let Some((id, m)) = lengths.find(|(_, m)| *m != n) {
        bail!("system `{id}` has {m} predictions but `{first_id}` has {n}");
    }
    (0..n)
        .map(|i| {
            let line: HashMap<String, Prediction> = systems
                .iter()
                .map(|(id, rows)| (id.clone(), rows[i].to_prediction()))
                .collect();
            let p = tree.eval_with(&line, rule)?;
            Ok(PredictionRow::from_vote(p, classes))
        })
        .collect()
}

pub fn run(args: &VoteArgs) -> Result<()> {
    require_file(&args.classes, "class list")?;
    if let Some(s) = &args.spec {
        require_file(s, "vote tree")?;
    }
    let spec = DatasetSpec::load(&args.classes)?;
    let tree = load_tree(args.spec.as_deref(), args.flat)?;
    let files = resolve_sources(&tree, &args.sources, args.pred_dir.as_deref())?;
    let mut systems = HashMap::new();
    for (id, path) in files {
        let rows = load_predictions(&path, &spec)
            .with_context(|| format!("predictions for system `{id}`"))?;
        systems.insert(id, rows);
    }
    let rule = if args.soft {
        VoteRule::ConfidenceSum
    } else {
        VoteRule::Plurality
    };
    let rows = vote_rows(&tree, &systems, rule, spec.num_classes())?;
    write_one(&args.out, &format_predictions(&rows, &spec))
}
