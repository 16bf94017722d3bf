//! `subfr`: command-line front end for training, enrollment, matching and evaluation.

mod commands;
mod runlog;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "subfr", version, about = "Subspace face recognition toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Crop, align and equalize the faces of an image manifest into a vector manifest.
    Normalize(NormalizeArgs),
    /// Split a manifest by subject (train/test) or per subject (gallery/probe).
    Split(SplitArgs),
    /// Train a subspace model.
    Train(TrainArgs),
    /// Project gallery samples and store them as templates.
    Enroll(EnrollArgs),
    /// Identify every probe of a manifest against an enrolled gallery.
    Identify(IdentifyArgs),
    /// Check live captures against one enrolled subject.
    Verify(VerifyArgs),
    /// Run the gallery/probe protocol and write report files.
    Evaluate(EvaluateArgs),
    /// Rank-1 rate over a range of feature counts.
    Sweep(SweepArgs),
    /// Generate a synthetic clustered dataset.
    Synth(SynthArgs),
}

#[derive(Args, Serialize)]
pub struct NormalizeArgs {
    /// Image manifest (`path,subject_id,left_eye_x,left_eye_y,right_eye_x,right_eye_y,tag`).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Skip histogram equalization.
    #[arg(long)]
    pub no_hist_eq: bool,
    /// Output directory; receives `vectors.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct SplitArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Subjects assigned to `train.csv`; the rest go to `test.csv`.
    #[arg(long, conflicts_with = "gallery_k", required_unless_present = "gallery_k")]
    pub train_subjects: Option<usize>,
    /// Samples per subject assigned to `gallery.csv`; the rest go to `probe.csv`.
    #[arg(long)]
    pub gallery_k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// One of pca, lda, ere, wssda.
    #[arg(long, default_value = "wssda")]
    pub method: String,
    /// Feature rows to keep (default: all available).
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long, default_value_t = 8)]
    pub max_leaf: usize,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    /// Recorded for provenance; training itself is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write a JSON copy of the model next to the binary one.
    #[arg(long)]
    pub json: bool,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct EnrollArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    /// Features per template (default: the model's row count).
    #[arg(long)]
    pub q: Option<usize>,
    /// Gallery file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct IdentifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub gallery: PathBuf,
    /// Probe manifest.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Rejection threshold on cosine distance.
    #[arg(long, conflicts_with = "calibration")]
    pub tau: Option<f64>,
    /// Genuine probes used to set the threshold as `theta` times their largest distance.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    #[arg(long, default_value_t = 0.85)]
    pub theta: f64,
    /// Output directory; receives `matches.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub gallery: PathBuf,
    /// Claimed identity.
    #[arg(long)]
    pub subject: String,
    /// Live captures.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub tau: f64,
    /// Output directory; receives `verify.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Subjects to enroll and probe.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Subjects that must be rejected as unknown.
    #[arg(long)]
    pub imposters: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    pub gallery_k: usize,
    /// Ascending feature counts (default: the model's row count).
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.85")]
    pub theta: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.001,0.01,0.1,1")]
    pub far: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub max_rank: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for the report files.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value_t = 7)]
    pub gallery_k: usize,
    /// Largest feature count (default: the model's row count).
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub step: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; receives `rate_vs_q.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    pub subjects: usize,
    #[arg(long, default_value_t = 2)]
    pub clusters: usize,
    #[arg(long, default_value_t = 50)]
    pub dim: usize,
    /// Samples per subject.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, default_value_t = 5.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; receives `dataset.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Normalize(a) => commands::normalize(a),
        Command::Split(a) => commands::split(a),
        Command::Train(a) => commands::train(a),
        Command::Enroll(a) => commands::enroll(a),
        Command::Identify(a) => commands::identify(a),
        Command::Verify(a) => commands::verify(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Synth(a) => commands::synth(a),
    };
    match outcome {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("subfr: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
