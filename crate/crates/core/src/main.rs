use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nlslab::experiment::verify::Suite;
use nlslab::experiment::{cmd_cauchy, cmd_report, cmd_run, cmd_verify, ExperimentConfig, ExperimentError};

#[derive(Parser)]
#[command(name = "nlslab", version, about = "Regularized NLS schemes and convergence experiments")]
struct Cli {
    /// Worker threads for sample and family parallelism (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the seed of the document.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory of the document.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Randomized property suites.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One evolution.
    Run(ConfigArgs),
    /// Family sweep over the truncation levels of the document.
    Cauchy(ConfigArgs),
    /// Check the digests of an output directory.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(args: &ConfigArgs) -> Result<(ExperimentConfig, PathBuf), ExperimentError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output = out.clone();
    }
    let out = cfg.output.clone();
    Ok((cfg, out))
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn execute(command: Command) -> Result<bool, ExperimentError> {
    match command {
        Command::Verify { suite, samples, seed, out } => {
            let report = cmd_verify(suite, samples, seed, out.as_deref())?;
            print_json(&report);
            Ok(report.passed)
        }
        Command::Run(args) => {
            let (cfg, out) = load(&args)?;
            let summary = cmd_run(&cfg, &out)?;
            print_json(&summary);
            Ok(true)
        }
        Command::Cauchy(args) => {
            let (cfg, out) = load(&args)?;
            let summary = cmd_cauchy(&cfg, &out)?;
            print_json(&summary);
            Ok(summary.pass)
        }
        Command::Report { out } => {
            let report = cmd_report(Path::new(&out))?;
            print_json(&report);
            Ok(report.consistent)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ ExperimentError::Failed(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
