//! Command-line syntax.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "wtahash", version, about = "Sparse binary projections trained with winner-take-all hashing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an artificial train/test dataset with known codes.
    Gen(GenArgs),
    /// Train a projection matrix and save it as a model file.
    Train(TrainArgs),
    /// Hash dense inputs into fixed-weight codes with a saved model.
    Hash(HashArgs),
    /// Benchmark algorithms by neighbor-overlap accuracy.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Dense dimension.
    #[arg(long, default_value_t = 200)]
    pub d: usize,
    /// Code dimension.
    #[arg(long = "dout", default_value_t = 400)]
    pub d_out: usize,
    /// Ones per code.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = 2000)]
    pub n_train: usize,
    #[arg(long, default_value_t = 2000)]
    pub n_test: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; receives train.fvecs, train.wtay, test.fvecs, test.wtay.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Closed-form training against given codes.
    Sup,
    /// Alternating training from the inputs alone.
    Unsup,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value_t = Mode::Sup)]
    pub mode: Mode,
    /// Training inputs (.fvecs or .csv).
    #[arg(long)]
    pub data: PathBuf,
    /// Training codes (.wtay); required in sup mode.
    #[arg(long)]
    pub codes: Option<PathBuf>,
    /// Code dimension; taken from the codes file in sup mode.
    #[arg(long = "dout")]
    pub d_out: Option<usize>,
    /// Ones per code; taken from the codes file in sup mode.
    #[arg(long)]
    pub k: Option<usize>,
    /// Ones per projection row [default: floor(0.1 d), at least 1].
    #[arg(long)]
    pub c: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads [default: available parallelism].
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub max_iterations: usize,
    /// Subtract each sample's mean before training.
    #[arg(long)]
    pub normalize: bool,
    /// Field delimiter for CSV inputs.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct HashArgs {
    /// Model file (.wtah).
    #[arg(long)]
    pub model: PathBuf,
    /// Inputs to hash (.fvecs or .csv).
    #[arg(long)]
    pub input: PathBuf,
    /// Ones per code [default: the model's k].
    #[arg(long)]
    pub k: Option<usize>,
    /// Subtract each sample's mean before hashing.
    #[arg(long)]
    pub normalize: bool,
    /// Samples hashed per batch.
    #[arg(long, default_value_t = 4096)]
    pub batch: usize,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// Code file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// JSON run configuration; replaces the dataset and algorithm flags.
    #[arg(long, conflicts_with_all = [
        "d", "d_out", "k", "sweep_k", "c", "seed", "repeats", "r", "n_train", "n_test",
        "algorithms", "train", "test", "train_codes", "max_iterations", "normalize",
    ])]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long = "dout")]
    pub d_out: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Comma-separated hash lengths, e.g. 2,4,8,16,32.
    #[arg(long, value_delimiter = ',', conflicts_with = "k")]
    pub sweep_k: Option<Vec<usize>>,
    #[arg(long)]
    pub c: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Neighbors per query.
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub n_train: Option<usize>,
    #[arg(long)]
    pub n_test: Option<usize>,
    /// Comma-separated subset of sup,unsup,lsh,fjl,fly,random.
    #[arg(long, value_delimiter = ',')]
    pub algorithms: Option<Vec<String>>,
    /// Training inputs (.fvecs or .csv) instead of generated data.
    #[arg(long, requires = "test")]
    pub train: Option<PathBuf>,
    /// Test inputs (.fvecs or .csv).
    #[arg(long, requires = "train")]
    pub test: Option<PathBuf>,
    /// Training codes (.wtay) for sup.
    #[arg(long, requires = "train")]
    pub train_codes: Option<PathBuf>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub workers: Option<usize>,
    /// CSV report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Leave the timing columns of the CSV empty.
    #[arg(long)]
    pub no_timing: bool,
}
