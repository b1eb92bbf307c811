use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mvsde::experiments::{describe, emit_outputs, run_experiment, ExperimentConfig, EXPERIMENTS};

#[derive(Parser)]
#[command(
    name = "mvsde",
    version,
    about = "Run named experiments for path-dependent multivalued McKean-Vlasov SDEs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: `output.dir` from the config, else `out/<name>`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `[experiment] seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the known experiment names.
    ListExperiments,
    /// Parse and validate a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(config: PathBuf, out: Option<PathBuf>, seed: Option<u64>, threads: Option<usize>) -> mvsde::Result<bool> {
    let mut cfg = ExperimentConfig::from_file(&config)?;
    if let Some(seed) = seed {
        cfg.experiment.seed = seed;
        cfg.validate()?;
    }
    let dir = out
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.experiment.name));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| mvsde::Error::InvalidArgument(e.to_string()))?;
    let output = pool.install(|| run_experiment(&cfg))?;
    emit_outputs(&output, &dir)?;
    for r in &output.records {
        let status = match (r.target, r.passed) {
            (None, _) => "info",
            (Some(_), true) => "pass",
            (Some(_), false) => "FAIL",
        };
        println!("{status:>4}  {:<28} {:.6e}", r.metric, r.value);
    }
    println!("wrote {} ({:.1} s)", dir.display(), output.seconds);
    Ok(output.all_passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            seed,
            threads,
        } => run(config, out, seed, threads),
        Command::ListExperiments => {
            for name in EXPERIMENTS {
                println!("{name:<24} {}", describe(name).unwrap_or(""));
            }
            Ok(true)
        }
        Command::Validate { config } => ExperimentConfig::from_file(&config).map(|cfg| {
            println!("ok: {}", cfg.experiment.name);
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
