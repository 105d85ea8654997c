use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lipmaps::{parse_config_for, CliError, ExperimentKind};

#[derive(Parser)]
#[command(name = "lipmaps", version, about = "Experiments on iterated random Lipschitz maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Moment function, Cramér exponent and m_α.
    Cramer(Common),
    /// Stationary samples by backward iteration.
    Simulate(Common),
    /// Survival curve, Hill estimate and tail constant.
    Tail(Common),
    /// Normalized Birkhoff sums and their characteristic function.
    Limit(Common),
    /// Fixed points of contracting words and sample coverage.
    Support(Common),
    /// Sampled checks of the model assumptions.
    Check(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(kind: ExperimentKind, args: Common) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.clone(),
        source,
    })?;
    let mut cfg = parse_config_for(&text, Some(kind))?;
    if let Some(seed) = args.seed {
        cfg.set_seed(seed);
    }
    if let Some(out) = args.out {
        cfg.set_output_dir(out);
    }
    let files = lipmaps::run(&cfg, args.threads)?;
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Cramer(a) => (ExperimentKind::Cramer, a),
        Command::Simulate(a) => (ExperimentKind::Simulate, a),
        Command::Tail(a) => (ExperimentKind::Tail, a),
        Command::Limit(a) => (ExperimentKind::Limit, a),
        Command::Support(a) => (ExperimentKind::Support, a),
        Command::Check(a) => (ExperimentKind::Check, a),
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lipmaps: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
