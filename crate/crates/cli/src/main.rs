//! `headvote`: train embeddings and classifiers, predict, vote and score.

mod embed;
mod evaluate;
mod nn;
mod output;
mod paper_run;
mod predict;
mod train;
mod vote;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "headvote",
    version,
    about = "Headline classification with voted baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train word embeddings on a tokenised corpus.
    Embed(embed::EmbedArgs),
    /// Train a classifier and write it with a per-epoch report.
    Train(train::TrainArgs),
    /// Write one prediction line per input line.
    Predict(predict::PredictArgs),
    /// Combine per-system prediction files through a vote tree.
    Vote(vote::VoteArgs),
    /// Score predictions against gold labels.
    Evaluate(evaluate::EvaluateArgs),
    /// Print a token's nearest neighbours and count single characters.
    Nn(nn::NnArgs),
    /// Run every stage for all 16 systems and vote.
    PaperRun(paper_run::PaperRunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Embed(a) => embed::run(a),
        Command::Train(a) => train::run(a),
        Command::Predict(a) => predict::run(a),
        Command::Vote(a) => vote::run(a),
        Command::Evaluate(a) => evaluate::run(a),
        Command::Nn(a) => nn::run(a),
        Command::PaperRun(a) => paper_run::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
