use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};

use signscreen::classifier::{Activation, ModelKind};
use signscreen::elbow::ElbowVariant;
use signscreen::evaluation::SplitMode;
use signscreen::pipeline::{self, PipelineConfig, ThresholdMode, Workspace};
use signscreen::trajectory::{DEFAULT_PLOT_HEIGHT, DEFAULT_PLOT_WIDTH};

/// Sign-space motion features and shallow classifiers for MCI screening.
#[derive(Parser, Debug)]
#[command(name = "signscreen", version)]
struct Cli {
    /// Master seed; every stage derives its own stream from it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Flat TOML file of pipeline settings; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory that holds every artefact of the run.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a labelled synthetic cohort of keypoint files.
    Synth(SynthArgs),
    /// Segment recordings into clips and write the features table.
    Extract(ExtractArgs),
    /// Write trajectory plots, elbow histograms and QQ data per clip.
    Render(RenderArgs),
    /// Split the features table and train a classifier.
    Train(TrainArgs),
    /// Score the held-out clips with the trained model.
    Eval(EvalArgs),
    /// Build the report bundle from a predictions CSV.
    Report(ReportArgs),
    /// Print the effective configuration as TOML.
    Config,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Number of participants.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    mci_fraction: Option<f64>,
    /// Recording length in seconds.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    fps: Option<f64>,
    /// Profile preset (default, hard, identical) or a profile TOML file.
    #[arg(long)]
    profile: Option<String>,
    /// Shorthand for `--profile hard`.
    #[arg(long, conflicts_with = "profile")]
    hard: bool,
    /// Keypoint position noise in pixels.
    #[arg(long)]
    jitter: Option<f64>,
}

#[derive(Args, Debug)]
struct FeatureArgs {
    /// Clip length in seconds.
    #[arg(long)]
    clip_len: Option<f64>,
    /// Speed below which a wrist counts as paused, px/s.
    #[arg(long)]
    pause_eps: Option<f64>,
    /// Longest run of missing frames filled by interpolation.
    #[arg(long)]
    max_gap: Option<usize>,
    /// euclidean or midpoint.
    #[arg(long)]
    elbow_variant: Option<ElbowVariant>,
    /// Elbow histogram bins.
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    /// Keypoint directory (default: <out>/keypoints).
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    features: FeatureArgs,
    /// Append a 32x32 thumbnail of the stacked trajectory image.
    #[arg(long)]
    image_features: bool,
    /// Fixed expression threshold on d3 instead of the cohort median.
    #[arg(long)]
    facial_threshold: Option<f64>,
    /// Skip unreadable files instead of failing.
    #[arg(long)]
    keep_going: bool,
}

#[derive(Args, Debug)]
struct RenderArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    features: FeatureArgs,
    /// Only clips of this participant id, or this one clip id.
    #[arg(long)]
    only: Option<String>,
    #[arg(long, default_value_t = DEFAULT_PLOT_WIDTH)]
    width: usize,
    #[arg(long, default_value_t = DEFAULT_PLOT_HEIGHT)]
    height: usize,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Features table (default: <out>/features.csv).
    #[arg(long)]
    features: Option<PathBuf>,
    /// logistic, mlp80 or linear_svm.
    #[arg(long)]
    model: Option<ModelKind>,
    /// clip_level or participant_level.
    #[arg(long)]
    split_mode: Option<SplitMode>,
    #[arg(long)]
    split_ratio: Option<f64>,
    /// Apply the split ratio within each class.
    #[arg(long)]
    stratify: bool,
    /// Participant ids excluded from both sides of the split.
    #[arg(long, value_delimiter = ',')]
    holdout: Option<Vec<String>>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Hidden-layer activation of mlp80: sigmoid, tanh or relu.
    #[arg(long)]
    activation: Option<Activation>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    features: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Predictions CSV (default: <out>/eval/predictions.csv).
    #[arg(long)]
    predictions: Option<PathBuf>,
}

fn apply_features(cfg: &mut PipelineConfig, a: &FeatureArgs) {
    if let Some(v) = a.clip_len {
        cfg.clip_len = v;
    }
    if let Some(v) = a.pause_eps {
        cfg.pause_eps = v;
    }
    if let Some(v) = a.max_gap {
        cfg.max_gap = v;
    }
    if let Some(v) = a.elbow_variant {
        cfg.elbow_variant = v;
    }
    if let Some(v) = a.bins {
        cfg.n_bins = v;
    }
}

fn apply_train(cfg: &mut PipelineConfig, a: &TrainArgs) {
    if let Some(v) = a.model {
        cfg.model = v;
    }
    if let Some(v) = a.split_mode {
        cfg.split_mode = v;
    }
    if let Some(v) = a.split_ratio {
        cfg.split_ratio = v;
    }
    if a.stratify {
        cfg.stratify = true;
    }
    if let Some(v) = &a.holdout {
        cfg.holdout.clone_from(v);
    }
    if let Some(v) = a.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = a.dropout {
        cfg.dropout_rate = v;
    }
    if let Some(v) = a.patience {
        cfg.patience = v;
    }
    if let Some(v) = a.max_epochs {
        cfg.max_epochs = v;
    }
    if let Some(v) = a.learning_rate {
        cfg.learning_rate = v;
    }
    if let Some(v) = a.activation {
        cfg.activation = v;
    }
}

fn run(cli: Cli, out: PathBuf) -> signscreen::Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    match cli.command {
        Command::Synth(a) => {
            if let Some(v) = a.n {
                cfg.n_participants = v;
            }
            if let Some(v) = a.mci_fraction {
                cfg.mci_fraction = v;
            }
            if let Some(v) = a.duration {
                cfg.duration = v;
            }
            if let Some(v) = a.fps {
                cfg.fps = v;
            }
            if let Some(v) = a.profile {
                cfg.profile = v;
            }
            if a.hard {
                cfg.profile = "hard".into();
            }
            if let Some(v) = a.jitter {
                cfg.jitter_sigma = v;
            }
            pipeline::cmd_synth(&Workspace::new(out, cfg))?;
        }
        Command::Extract(a) => {
            apply_features(&mut cfg, &a.features);
            if a.image_features {
                cfg.image_features = true;
            }
            if let Some(t) = a.facial_threshold {
                cfg.facial_threshold_mode = ThresholdMode::Fixed;
                cfg.facial_threshold = t;
            }
            let outcome = pipeline::cmd_extract(&Workspace::new(out, cfg), a.input.as_deref(), a.keep_going)?;
            if !outcome.skipped.is_empty() {
                eprintln!("{} file(s) skipped", outcome.skipped.len());
            }
        }
        Command::Render(a) => {
            apply_features(&mut cfg, &a.features);
            pipeline::cmd_render(&Workspace::new(out, cfg), a.input.as_deref(), a.only.as_deref(), a.width, a.height)?;
        }
        Command::Train(a) => {
            apply_train(&mut cfg, &a);
            pipeline::cmd_train(&Workspace::new(out, cfg), a.features.as_deref())?;
        }
        Command::Eval(a) => {
            let report = pipeline::cmd_eval(&Workspace::new(out, cfg), a.features.as_deref())?;
            println!("accuracy {:.4}", report.accuracy);
            match report.auc {
                Some(auc) => println!("auc {auc:.4}"),
                None => println!("auc undefined ({})", report.roc_error.unwrap_or_default()),
            }
        }
        Command::Report(a) => {
            let summary = pipeline::cmd_report(&Workspace::new(out, cfg), a.predictions.as_deref())?;
            for p in &summary.participants {
                println!(
                    "{}\t{}\tmean p_mci {:.4}\tmean p_healthy {:.4}",
                    p.participant_id, p.decision, p.mean_p_mci, p.mean_p_healthy
                );
            }
        }
        Command::Config => print!("{}", cfg.to_toml()?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let out = match (&cli.command, &cli.out) {
        (_, Some(out)) => out.clone(),
        (Command::Config, None) => PathBuf::from("."),
        (_, None) => Cli::command()
            .error(ErrorKind::MissingRequiredArgument, "the following required argument was not provided: --out <DIR>")
            .exit(),
    };
    match run(cli, out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
