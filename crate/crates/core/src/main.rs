use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gridnav::config::ExperimentConfig;
use gridnav::error::GridNavError;
use gridnav::runner::{cmd_generate, cmd_report, cmd_run, cmd_sweep, logs_dir, sweep_dir};

#[derive(Parser)]
#[command(
    name = "gridnav",
    about = "Bounded-rational navigation experiments on 2D occupancy grids"
)]
struct Cli {
    /// Experiment config file (TOML). Defaults apply if omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the config's output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for batch runs (0 = automatic).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Print the full default config as TOML and exit.
    #[arg(long, global = true)]
    print_defaults: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate map files and a manifest from the config's scenarios.
    Generate,
    /// Run one episode per (map, predictor, trial); skips existing logs.
    Run,
    /// Run episodes across the config's reveal_fractions.
    Sweep,
    /// Run with all three learned-map predictors (ci, cn, cg).
    Compare,
    /// Emit summary CSV tables from a directory of episode logs.
    Report {
        /// Log directory; defaults to <out_dir>/logs.
        #[arg(long)]
        logs: Option<PathBuf>,
        /// Use <out_dir>/sweep as the log directory.
        #[arg(long, conflicts_with = "logs")]
        sweep: bool,
    },
}

fn load_config(cli: &Cli) -> Result<(ExperimentConfig, PathBuf), GridNavError> {
    let (mut cfg, base) = match &cli.config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path)?;
            let base = path.parent().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
            (cfg, base)
        }
        None => (ExperimentConfig::default(), PathBuf::from(".")),
    };
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    Ok((cfg, base))
}

fn run(cli: Cli) -> Result<bool, GridNavError> {
    if cli.print_defaults {
        print!("{}", ExperimentConfig::print_defaults());
        return Ok(true);
    }
    let command = cli
        .command
        .as_ref()
        .ok_or_else(|| GridNavError::Config("a subcommand is required (see --help)".into()))?;
    let (mut cfg, base) = load_config(&cli)?;

    match command {
        Command::Generate => {
            let manifest = cmd_generate(&cfg, &base)?;
            println!("generated {} maps in {}", manifest.maps.len(), cfg.out_dir.join("maps").display());
            Ok(true)
        }
        Command::Run | Command::Compare => {
            if matches!(command, Command::Compare) {
                cfg.predictors = vec!["ci".into(), "cn".into(), "cg".into()];
            }
            let report = cmd_run(&cfg, cli.jobs)?;
            println!(
                "run: {} written, {} skipped, {} errors",
                report.written,
                report.skipped,
                report.errors.len()
            );
            for e in &report.errors {
                eprintln!("error: {e}");
            }
            Ok(report.errors.is_empty())
        }
        Command::Sweep => {
            let report = cmd_sweep(&cfg, cli.jobs)?;
            println!(
                "sweep: {} written, {} skipped, {} errors",
                report.written,
                report.skipped,
                report.errors.len()
            );
            for e in &report.errors {
                eprintln!("error: {e}");
            }
            Ok(report.errors.is_empty())
        }
        Command::Report { logs, sweep } => {
            let dir = match (logs, sweep) {
                (Some(d), _) => d.clone(),
                (None, true) => sweep_dir(&cfg),
                (None, false) => logs_dir(&cfg),
            };
            let out = cfg.out_dir.join("report");
            let files = cmd_report(&dir, &out)?;
            for f in &files {
                println!("wrote {}", f.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ GridNavError::Config(_)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
