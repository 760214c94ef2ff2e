use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use elastocauchy_cli::output::{self, Metadata};
use elastocauchy_cli::{experiments, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "elastocauchy",
    version,
    about = "Elastodynamic Cauchy problem experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run(Common),
    /// Rerun an experiment for several grid sizes and tabulate log10 errors.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Ascending grid sizes, e.g. 8,16,32,64.
        #[arg(long = "M", value_delimiter = ',', required = true)]
        m: Vec<usize>,
    },
}

#[derive(Args)]
struct Common {
    config: PathBuf,
    /// CSV destination; overrides the config, stdout when neither is given.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Noise seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write `M label n_or_t log10_error` lines to this file.
    #[arg(long)]
    emit_plot_data: Option<PathBuf>,
}

fn load(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::from_path(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (common, command, reports, rows, cfg) = match cli.command {
        Command::Run(common) => {
            let cfg = load(&common)?;
            let report = experiments::run(&cfg)?;
            let rows = report.rows.clone();
            (common, "run", vec![(cfg.m, report)], rows, cfg)
        }
        Command::Sweep { common, m } => {
            let cfg = load(&common)?;
            let reports: Vec<_> = m
                .iter()
                .copied()
                .zip(experiments::sweep(&cfg, &m)?)
                .collect();
            let rows = output::sweep_rows(&reports);
            (common, "sweep", reports, rows, cfg)
        }
    };
    let csv = output::csv_string(&rows)?;
    let grid_sizes: Vec<usize> = reports.iter().map(|(m, _)| *m).collect();
    match common.output.clone().or_else(|| cfg.output.clone()) {
        Some(path) => {
            output::write_file(&path, csv.as_bytes())?;
            let meta = Metadata::new(command, cfg.seed, &grid_sizes, &cfg);
            output::write_file(
                &output::metadata_path(&path),
                serde_json::to_string_pretty(&meta)?.as_bytes(),
            )?;
            log::info!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => print!("{csv}"),
    }
    if let Some(path) = &common.emit_plot_data {
        output::write_file(path, output::plot_data(&reports).as_bytes())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
