use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mhlab_cli::config::{parse_suites, Suite};
use mhlab_cli::{
    emit_reports, parse_config, preset_text, run, CliError, CliResult, EXIT_CONFIG, EXIT_FAIL,
    EXIT_PASS, THREADS_ENV,
};

#[derive(Parser)]
#[command(
    name = "mhlab",
    version,
    about = "Exact Metropolis–Hastings verification suites"
)]
struct Cli {
    /// Worker threads for the sampler ensemble.
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites of a config or preset and write reports.
    Run(RunArgs),
    /// Print the config text of a built-in preset.
    Preset { name: String },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// two-point, grid-gaussian-rw or disconnected-negative-control
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Suite list, e.g. `spectral,convergence` or `all`.
    #[arg(long)]
    suite: Option<String>,
}

fn execute(args: RunArgs) -> CliResult<bool> {
    let text = match (&args.config, &args.preset) {
        (Some(path), _) => fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
        (None, Some(name)) => preset_text(name)?.to_string(),
        (None, None) => unreachable!("clap requires one of --config and --preset"),
    };
    let mut config = parse_config(&text)?;
    if let Some(seed) = args.seed {
        config.run.seed = seed;
    }
    if let Some(steps) = args.steps {
        config.run.steps = Some(steps);
    }
    if let Some(s) = &args.suite {
        config.run.suites = parse_suites(s).ok_or_else(|| CliError::Key {
            key: "--suite".into(),
            message: format!(
                "unknown suite list `{s}`; expected all or {}",
                suite_names()
            ),
        })?;
    }
    let report = run(&config)?;
    emit_reports(&report, &args.out)?;
    println!("{}", report.summary_line());
    Ok(report.passed())
}

fn suite_names() -> String {
    Suite::ALL.map(|s| s.name()).join(", ")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot size thread pool: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    match cli.command {
        Command::Preset { name } => match preset_text(&name) {
            Ok(text) => {
                print!("{text}");
                ExitCode::from(EXIT_PASS)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_CONFIG)
            }
        },
        Command::Run(args) => match execute(args) {
            Ok(true) => ExitCode::from(EXIT_PASS),
            Ok(false) => ExitCode::from(EXIT_FAIL),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_CONFIG)
            }
        },
    }
}
