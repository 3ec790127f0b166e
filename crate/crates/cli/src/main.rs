use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rdes_cli::{
    cmd_gen_fbm, cmd_hurst, cmd_kernel_convergence, cmd_logsig, cmd_missing_data, cmd_run_dataset, cmd_timing,
    exit_code, CliError, ExperimentConfig, ExperimentKind, RunReport, EXIT_CONFIG_ERROR, EXIT_RUN_ERROR,
};

#[derive(Parser)]
#[command(name = "rdes", version, about = "Random CDE/RDE reservoirs: experiments and tools")]
struct Cli {
    /// Worker threads for batch extraction and Gram matrices.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML experiment config; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's global seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for report.txt and summary.json (or generated data).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo kernel estimates against the PDE oracle over a width ladder.
    KernelConvergence(Common),
    /// Fractional Brownian motion Hurst classification.
    Hurst(Common),
    /// Hurst task with a corrupted, re-imputed test split.
    MissingData(Common),
    /// Extraction time against path length.
    Timing(Common),
    /// Grid search and evaluation on dataset files.
    Run(Common),
    /// Write the Hurst train/test splits as dataset files.
    GenFbm(Common),
    /// Print the log-signature of a path or dataset file.
    Logsig {
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        level: usize,
        /// Sample index when `input` is a dataset.
        #[arg(long, default_value_t = 0)]
        sample: usize,
    },
}

fn load(common: &Common, kind: ExperimentKind) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.out = Some(o.clone());
    }
    cfg.resolve(kind)
}

fn run(common: &Common, kind: ExperimentKind, f: fn(&ExperimentConfig) -> Result<RunReport, CliError>) -> i32 {
    let outcome = load(common, kind).and_then(|cfg| {
        let mut report = f(&cfg)?;
        if let Some(dir) = &cfg.out {
            report.write(dir)?;
        }
        Ok(report)
    });
    finish(outcome)
}

fn finish(outcome: Result<RunReport, CliError>) -> i32 {
    match &outcome {
        Ok(report) => print!("{}", report.to_key_value()),
        Err(e) => eprintln!("{e}"),
    }
    exit_code(&outcome)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("config error: --threads: {e}");
            return ExitCode::from(EXIT_CONFIG_ERROR as u8);
        }
    }
    let code = match &cli.command {
        Command::KernelConvergence(c) => run(c, ExperimentKind::KernelConvergence, cmd_kernel_convergence),
        Command::Hurst(c) => run(c, ExperimentKind::Hurst, cmd_hurst),
        Command::MissingData(c) => run(c, ExperimentKind::MissingData, cmd_missing_data),
        Command::Timing(c) => run(c, ExperimentKind::Timing, cmd_timing),
        Command::Run(c) => run(c, ExperimentKind::CustomDataset, cmd_run_dataset),
        Command::GenFbm(c) => {
            // Writes data rather than a report; the config's hurst section sizes it.
            let outcome = load(c, ExperimentKind::Hurst).and_then(|cfg| {
                let out = cfg
                    .out
                    .clone()
                    .ok_or_else(|| CliError::Config("out: gen-fbm needs --out <dir>".into()))?;
                cmd_gen_fbm(&cfg, &out)
            });
            finish(outcome)
        }
        Command::Logsig { input, level, sample } => match cmd_logsig(input, *level, *sample) {
            Ok(coords) => {
                for (w, c) in coords {
                    println!("{w}={c:e}");
                }
                0
            }
            Err(e) => {
                eprintln!("{e}");
                match e {
                    CliError::Config(_) => EXIT_CONFIG_ERROR,
                    CliError::Run(_) => EXIT_RUN_ERROR,
                }
            }
        },
    };
    ExitCode::from(code as u8)
}
