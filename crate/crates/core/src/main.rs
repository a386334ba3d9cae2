use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use specbox::report::{report_json, run, write_outputs, RunConfig, Task, DEFAULT_SEED};

#[derive(Parser)]
#[command(
    name = "specbox",
    version,
    about = "Spectra, heat traces and spectral invariants of Schrödinger operators on boxes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of the box problem.
    Spectrum(Common),
    /// Heat trace on a time grid.
    HeatTrace(Common),
    /// Fit heat-trace coefficients and compare them with predictions.
    Fit(Common),
    /// Directional decomposition of the potential.
    Decompose(Common),
    /// Spectral invariant bundle and separability diagnosis.
    Invariants(Common),
    /// Compare the invariant bundles of two potentials.
    Compare(Common),
    /// Run the identity suite.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the JSON report and CSV data.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Offset of the sample-point sequence.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

impl Command {
    fn split(self) -> (Task, Common) {
        match self {
            Command::Spectrum(c) => (Task::Spectrum, c),
            Command::HeatTrace(c) => (Task::HeatTrace, c),
            Command::Fit(c) => (Task::Fit, c),
            Command::Decompose(c) => (Task::Decompose, c),
            Command::Invariants(c) => (Task::Invariants, c),
            Command::Compare(c) => (Task::Compare, c),
            Command::Verify(c) => (Task::Verify, c),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let (task, args) = Cli::parse().command.split();

    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(1);
        }
    }

    let config = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    let out = match run(&config, task, args.seed) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {task}: {e}");
            return ExitCode::from(1);
        }
    };

    match args.out.or_else(|| config.output.clone()) {
        Some(dir) => match write_outputs(&dir, &config, &out, args.seed) {
            Ok(paths) => {
                for p in paths {
                    log::info!("wrote {}", p.display());
                }
            }
            Err(e) => {
                eprintln!("error: writing {}: {e}", dir.display());
                return ExitCode::from(1);
            }
        },
        None => {
            let doc = report_json(&config, &out, args.seed);
            let text = serde_json::to_string_pretty(&doc).expect("report serializes");
            // A closed pipe downstream is not an error of ours.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
        }
    }
    if out.exit_code() != 0 {
        eprintln!("{task}: verification failed");
    }
    ExitCode::from(out.exit_code() as u8)
}
