use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wdbc::experiment::{cmd_compare, cmd_cv, cmd_inspect, cmd_roc, ExperimentConfig, VblrVariant};
use wdbc::knn::SelfMatch;
use wdbc::Error;

#[derive(Parser)]
#[command(
    name = "wdbc",
    version,
    about = "Compare SVM, variational Bayesian LR, LR and KNN on WDBC"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every method and write report.json plus ROC and accuracy CSVs.
    Compare(Common),
    /// Print the test-split ROC CSV for one method.
    Roc {
        #[arg(long)]
        method: String,
        #[command(flatten)]
        common: Common,
    },
    /// Print case and class counts and per-feature ranges.
    Inspect {
        #[arg(long)]
        data: PathBuf,
    },
    /// Cross-validate one method over a grid such as `c=1,10;gamma=0.01,0.1`.
    Cv {
        #[arg(long)]
        method: String,
        #[arg(long, default_value = "")]
        grid: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.8)]
    split: f64,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    stratified: bool,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long = "mc-samples", default_value_t = 2000)]
    mc_samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// fixed | hierarchical
    #[arg(long, default_value = "hierarchical")]
    vblr: String,
    /// Exclude each training point from its own KNN neighbours when scoring the training split.
    #[arg(long)]
    knn_exclude_self: bool,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = ExperimentConfig::new(&self.data, self.seed);
        cfg.train_fraction = self.split;
        cfg.stratified = self.stratified;
        cfg.cv_folds = self.folds;
        cfg.mc_samples = self.mc_samples;
        cfg.out_dir = self.out.clone();
        cfg.vblr_variant = self.vblr.parse::<VblrVariant>()?;
        if self.knn_exclude_self {
            cfg.knn_training_neighbors = SelfMatch::Exclude;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Compare(common) => {
            let report = cmd_compare(&common.config()?)?;
            print!("{}", report.table());
            if report.all_failed() {
                return Ok(ExitCode::from(3));
            }
        }
        Command::Roc { method, common } => print!("{}", cmd_roc(&common.config()?, &method)?),
        Command::Inspect { data } => print!("{}", cmd_inspect(data)?),
        Command::Cv {
            method,
            grid,
            common,
        } => {
            let report = cmd_cv(&common.config()?, &method, &grid)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
