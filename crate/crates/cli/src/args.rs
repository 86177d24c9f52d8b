use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lie_eqgnn::autodiff::QuantumGrad;
use lie_eqgnn::model::Variant;

#[derive(Debug, Parser)]
#[command(name = "lie-eqgnn", version, about = "Lorentz-equivariant quantum GNN for quark/gluon jet tagging")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write balanced synthetic jets as JSONL.
    SynthData(SynthArgs),
    /// Train one variant; writes metrics.csv, checkpoint.bin and config.json to --out-dir.
    Train(TrainArgs),
    /// Loss and accuracy of a checkpoint on a dataset.
    Eval(EvalArgs),
    /// Maximum logit change under random Lorentz transforms.
    EquivarianceTest(EquivarianceArgs),
    /// Compare backward gradients with central finite differences.
    GradCheck(GradCheckArgs),
    /// Trainable parameter breakdown.
    ParamCount(ParamCountArgs),
    /// Render a metrics CSV as an SVG with loss and accuracy panels.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub n_per_class: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct LoadArgs {
    /// Jets with fewer particles are dropped.
    #[arg(long, default_value_t = 10)]
    pub min_particles: usize,
    /// Keep at most this many highest-pt particles per jet.
    #[arg(long, default_value_t = 16)]
    pub max_particles: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GradMethod {
    ParameterShift,
    Adjoint,
}

impl From<GradMethod> for QuantumGrad {
    fn from(m: GradMethod) -> Self {
        match m {
            GradMethod::ParameterShift => QuantumGrad::ParameterShift,
            GradMethod::Adjoint => QuantumGrad::Adjoint,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_parser = parse_variant, default_value = "classical")]
    pub variant: Variant,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 5)]
    pub warmup_epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    /// Seeds initialization, shuffling and (unless --split-seed is given) the split.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub split_seed: Option<u64>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub weight_decay: f64,
    /// Aggregation constant of the block updates.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub n_train: Option<usize>,
    #[arg(long)]
    pub n_val: Option<usize>,
    #[arg(long)]
    pub n_test: Option<usize>,
    #[command(flatten)]
    pub load: LoadArgs,
    /// Zero the particle-mass feature.
    #[arg(long)]
    pub no_mass: bool,
    /// Write 0 in the seconds column so metrics files are byte-comparable.
    #[arg(long)]
    pub no_wall_clock: bool,
    #[arg(long, value_enum, default_value_t = GradMethod::Adjoint)]
    pub quantum_grad: GradMethod,
    /// Continue from a checkpoint written by a previous run; model and optimizer settings
    /// come from the checkpoint, data and split from the flags.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Stop after this many total completed epochs (the schedule still spans --epochs).
    #[arg(long)]
    pub stop_after: Option<usize>,
    /// Print one line per epoch.
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub load: LoadArgs,
}

#[derive(Debug, Args)]
pub struct EquivarianceArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 1.0)]
    pub max_rapidity: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    /// Jets to transform; synthetic jets are used when absent.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub load: LoadArgs,
}

#[derive(Debug, Args)]
pub struct GradCheckArgs {
    #[arg(long, value_parser = parse_variant, default_value = "classical")]
    pub variant: Variant,
    /// Relative tolerance; the per-coordinate bound is max(abs-tolerance, tolerance·|grad|).
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub abs_tolerance: f64,
    #[arg(long, default_value_t = 20)]
    pub n_params: usize,
    #[arg(long, default_value_t = 4)]
    pub batch: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub step: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = GradMethod::ParameterShift)]
    pub quantum_grad: GradMethod,
}

#[derive(Debug, Args)]
pub struct ParamCountArgs {
    /// All variants when omitted.
    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<Variant>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub metrics: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: lie_eqgnn::Error| e.to_string())
}
