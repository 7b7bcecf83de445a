//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Exit code for bad arguments or configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for an internal consistency failure.
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] tritter_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use tritter_core::Error as E;
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Core(E::AmbiguousPattern { .. }) => EXIT_INTERNAL,
            Self::Core(
                E::InvalidDimension(_)
                | E::IndexOutOfRange { .. }
                | E::Domain { .. }
                | E::InvalidParameter(_),
            ) => EXIT_CONFIG,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "tritter",
    version,
    about = "Multiport entangled-state discrimination simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the entangled states available at a dimension.
    ListStates(ListStatesArgs),
    /// Print the DFT interferometer and its two-port decomposition as JSON.
    DescribeTritter(DescribeTritterArgs),
    /// Monte-Carlo discrimination of one input state.
    Discriminate(DiscriminateArgs),
    /// Qutrit teleportation of Haar-random targets.
    Teleport(TeleportArgs),
    /// Prepare-and-measure qutrit MDI-QKD.
    Mdiqkd(MdiqkdArgs),
    /// Key-rate table, or efficiency thresholds.
    Keyrate(KeyrateArgs),
}

#[derive(Debug, Args)]
pub struct ListStatesArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Print one state's amplitudes as JSON instead of the list.
    #[arg(long, value_name = "NAME")]
    pub dump_state: Option<String>,
}

#[derive(Debug, Args)]
pub struct DescribeTritterArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
}

#[derive(Debug, Args)]
pub struct DiscriminateArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Input state, `psiN` (d = 3 only) or `phiN`.
    #[arg(long, default_value = "psi0")]
    pub state: String,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    /// Parity device efficiency.
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TeleportArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct MdiqkdArgs {
    #[arg(long, default_value_t = 10000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Probability of a random phase ramp on Bob's photon.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Per-trial records; stdout when absent. With a path, a JSON summary
    /// goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
#[command(args_conflicts_with_subcommands = true)]
pub struct KeyrateArgs {
    #[command(subcommand)]
    pub sub: Option<KeyrateSub>,
    #[command(flatten)]
    pub table: KeyrateTableArgs,
}

#[derive(Debug, Args)]
pub struct KeyrateTableArgs {
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,8")]
    pub d: Vec<usize>,
    #[arg(long, default_value_t = 0.12)]
    pub q_max: f64,
    #[arg(long, default_value_t = 0.002)]
    pub q_step: f64,
    /// Multiply R_total by eta^d.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum KeyrateSub {
    /// Parity-device efficiency at which the measurement matches a Bell filter.
    Thresholds {
        #[arg(long, default_value_t = 10)]
        d_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match commands::execute(&cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
