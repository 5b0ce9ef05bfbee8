use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use headvote_core::embeddings::{load_embeddings, nearest_neighbors, single_char_audit};

use crate::output::require_file;

#[derive(Args, Debug, Clone)]
pub struct NnArgs {
    /// Vector file written by `embed`.
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub token: String,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
}

/// Neighbour rows followed by the single-character count line.
pub fn report(args: &NnArgs) -> Result<String> {
    require_file(&args.embeddings, "embedding file")?;
    let set = load_embeddings(&args.embeddings)
        .with_context(|| format!("loading {}", args.embeddings.display()))?;
    let neighbours = nearest_neighbors(&set, &args.token, args.k)?;
    let mut out = String::new();
    for (token, sim) in &neighbours {
        out.push_str(&format!("{token}\t{sim:.6}\n"));
    }
    out.push_str(&format!(
        "single_char_in_top{}={}\n",
        args.k,
        single_char_audit(&neighbours)
    ));
    Ok(out)
}

pub fn run(args: &NnArgs) -> Result<()> {
    print!("{}", report(args)?);
    Ok(())
}
