use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

mod commands;
mod report;

use report::CliError;

#[derive(Debug, Parser)]
#[command(name = "supersim", version, about = "Superposition of unknown quantum states: simulations and obstruction audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Output {
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Seeded {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Vector tomography of a state file.
    Tomo {
        #[arg(long)]
        state: PathBuf,
        /// Shots per measurement setting.
        #[arg(long)]
        shots: u64,
        /// Use exact Born probabilities instead of sampled counts.
        #[arg(long)]
        exact: bool,
        /// Reference state for distance-to-truth diagnostics.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[command(flatten)]
        seeded: Seeded,
    },
    /// Random (or entangled) superposition of two state files.
    Superpose {
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        v: PathBuf,
        /// `RE,IM` or `RE`.
        #[arg(long, allow_hyphen_values = true, value_parser = commands::parse_complex)]
        alpha: num_complex::Complex64,
        #[arg(long, allow_hyphen_values = true, value_parser = commands::parse_complex)]
        beta: num_complex::Complex64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        exact: bool,
        /// Report the block state over all index pairs.
        #[arg(long)]
        entangled: bool,
        /// Pipeline runs estimating the block weights.
        #[arg(long, default_value_t = 256, requires = "entangled")]
        trials: usize,
        #[command(flatten)]
        seeded: Seeded,
    },
    /// Winding and loop-error audit of a built-in candidate map.
    Audit {
        #[arg(long, value_parser = ["ideal", "mollified", "constant"])]
        candidate: String,
        #[arg(long, allow_hyphen_values = true, value_parser = commands::parse_complex)]
        alpha: num_complex::Complex64,
        #[arg(long, allow_hyphen_values = true, value_parser = commands::parse_complex)]
        beta: num_complex::Complex64,
        /// Qubit base point; `|0⟩` when absent.
        #[arg(long)]
        x0: Option<PathBuf>,
        /// Loop samples.
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        /// Dimension the qubit pair is padded into.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Directory for `(t, value)` CSV plot data.
        #[arg(long)]
        plot_dir: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Euclidean jump of the canonical vec across the discontinuity.
    Probe {
        #[arg(long)]
        eps: f64,
        /// Directory for `(t, value)` CSV plot data.
        #[arg(long)]
        plot_dir: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Bra-ket circuit identities on random qubit states.
    Identities {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[command(flatten)]
        seeded: Seeded,
    },
    /// Many-outcome versus single-outcome meta-check.
    Table1 {
        /// Sampled pipeline runs.
        #[arg(long, default_value_t = 50)]
        runs: usize,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        /// Loop samples for the audits.
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        #[command(flatten)]
        seeded: Seeded,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    commands::check_env()?;
    let (report, out) = match cli.command {
        Command::Tomo { state, shots, exact, truth, seeded } => {
            (commands::tomo(&state, shots, exact, truth.as_deref(), seeded.seed)?, seeded.output.out)
        }
        Command::Superpose { u, v, alpha, beta, eps, exact, entangled, trials, seeded } => {
            let trials = entangled.then_some(trials);
            (commands::superpose(&u, &v, alpha, beta, eps, exact, trials, seeded.seed)?, seeded.output.out)
        }
        Command::Audit { candidate, alpha, beta, x0, samples, dim, plot_dir, output } => {
            (commands::audit(&candidate, alpha, beta, x0.as_deref(), samples, dim, plot_dir.as_deref())?, output.out)
        }
        Command::Probe { eps, plot_dir, output } => (commands::probe(eps, plot_dir.as_deref())?, output.out),
        Command::Identities { samples, seeded } => (commands::identities(samples, seeded.seed)?, seeded.output.out),
        Command::Table1 { runs, eps, samples, seeded } => (commands::table1(runs, eps, samples, seeded.seed)?, seeded.output.out),
    };
    report::emit(&report, out.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return CliError::validation(e.render().to_string().trim_end()).exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.exit(),
    }
}
