//! Command-line driver: data generation, edge sampling, inference,
//! cross-validation, evaluation curves, release comparison, and bound
//! diagnostics. Every run is fully determined by its flags and seed, and
//! every output file starts with a comment header recording them.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 solver
//! non-convergence (artifacts are still written).

mod labels;
mod ops;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "netprior", version, about = "Network reconstruction via degree-prior matrix completion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic preferential-attachment network.
    Generate(GenerateArgs),
    /// Sample an observation mask from a network.
    Sample(SampleArgs),
    /// Fit a model and write ranked edge predictions.
    Infer(InferArgs),
    /// Grid-search hyperparameters by held-out tuning edges.
    Cv(CvArgs),
    /// Score a prediction file against ground truth at several budgets.
    Eval(EvalArgs),
    /// Predict from an older release and score against a newer one.
    Releases(ReleasesArgs),
    /// Evaluate the recovery-error bound components.
    Bound(BoundArgs),
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Node count.
    #[arg(long)]
    pub p: usize,
    /// Edges attached per new node.
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output edge-list path.
    #[arg(long)]
    pub out: String,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Ground-truth edge list.
    #[arg(long)]
    pub input: String,
    /// uniform | over | under
    #[arg(long, default_value = "uniform")]
    pub mode: String,
    #[arg(long, default_value_t = 0.9)]
    pub rate_hub: f64,
    #[arg(long, default_value_t = 0.9)]
    pub rate_nonhub: f64,
    #[arg(long, default_value_t = 0.2)]
    pub hub_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output mask path; a sampling report goes to <out>.report.
    #[arg(long)]
    pub out: String,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 0.3)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.5)]
    pub c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 40)]
    pub rank: usize,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 50)]
    pub outer_iters: usize,
}

#[derive(Args, Debug)]
pub struct InferArgs {
    /// Observation mask file.
    #[arg(long)]
    pub mask: String,
    /// Prediction budget as a count.
    #[arg(long, conflicts_with = "k_fraction")]
    pub k: Option<usize>,
    /// Prediction budget as a fraction of p(p-1)/2.
    #[arg(long)]
    pub k_fraction: Option<f64>,
    /// tri | tri_l1 | tri_degree
    #[arg(long, default_value = "tri_degree")]
    pub method: String,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output predictions TSV (u, v, score, rank).
    #[arg(long)]
    pub out: String,
}

#[derive(Args, Debug)]
pub struct CvArgs {
    #[arg(long)]
    pub mask: String,
    #[arg(long, conflicts_with = "k_fraction")]
    pub k: Option<usize>,
    #[arg(long)]
    pub k_fraction: Option<f64>,
    #[arg(long, default_value = "tri_degree")]
    pub method: String,
    /// Grid CSV with columns rho,lambda,c,alpha (one cell per line);
    /// defaults to the built-in grid.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    pub holdout: f64,
    #[arg(long, default_value_t = 5)]
    pub n_seeds: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output per-cell CSV; the chosen cell goes to <out>.best.
    #[arg(long)]
    pub out: String,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Predictions TSV produced by `infer`.
    #[arg(long)]
    pub input: String,
    /// Ground-truth edge list.
    #[arg(long)]
    pub truth: String,
    /// Observation mask the predictions were computed from.
    #[arg(long)]
    pub mask: String,
    /// Comma-separated budgets as counts.
    #[arg(long, conflicts_with = "k_fraction")]
    pub k: Option<String>,
    /// Comma-separated budgets as fractions of p(p-1)/2.
    #[arg(long)]
    pub k_fraction: Option<String>,
    /// Label-to-id mapping produced by an earlier command, for
    /// string-labeled truth/mask files.
    #[arg(long)]
    pub id_map: Option<String>,
    /// Output curve CSV (k, fraction_of_pairs, correct).
    #[arg(long)]
    pub out: String,
}

#[derive(Args, Debug)]
pub struct ReleasesArgs {
    /// Older release edge list (becomes the observation mask).
    #[arg(long)]
    pub old: String,
    /// Newer release edge list (test set).
    #[arg(long)]
    pub new: String,
    /// Restrict to one method; default runs tri, tri_l1 and tri_degree.
    #[arg(long)]
    pub method: Option<String>,
    /// Budget as a count; default is 0.05 * p(p-1)/2 of the older release.
    #[arg(long, conflicts_with = "k_fraction")]
    pub k: Option<usize>,
    #[arg(long)]
    pub k_fraction: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Optional output file; ratios always print to stdout.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    /// Nuclear-norm bound t.
    #[arg(long)]
    pub t: f64,
    /// Prior bound r.
    #[arg(long)]
    pub r: f64,
    /// Total degree s = 2|E|.
    #[arg(long)]
    pub s: f64,
    #[arg(long)]
    pub d_star_max: f64,
    #[arg(long)]
    pub d_max: f64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub rho: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub delta: f64,
    /// The theory's unspecified universal constant.
    #[arg(long, default_value_t = 1.0)]
    pub c_universal: f64,
    /// Optional output file; diagnostics always print to stdout.
    #[arg(long)]
    pub out: Option<String>,
}

/// Whether every solver invocation met its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Success,
    SolverDidNotConverge,
}

impl RunStatus {
    fn code(self) -> i32 {
        match self {
            RunStatus::Success => 0,
            RunStatus::SolverDidNotConverge => 3,
        }
    }
}

fn exit_code_for(err: &netprior::Error) -> i32 {
    use netprior::Error::*;
    match err {
        Parse { .. } | SelfLoop(_) | NodeOutOfRange { .. } | Io(_) | NonFinite(_) => 2,
        InvalidParam(_) | DimensionMismatch(_) | InfeasibleDegrees(_) | EmptyObservation
        | DegenerateSplit(_) => 1,
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match ops::run(cli.command) {
        Ok(status) => std::process::exit(status.code()),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code_for(&err));
        }
    }
}
