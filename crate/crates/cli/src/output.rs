//! CSV tables, metadata sidecars and plot data.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiments::{Report, ResultRow};

pub const HEADER: [&str; 11] = [
    "experiment",
    "n_or_t",
    "M",
    "kappa",
    "alpha",
    "delta",
    "seed",
    "component",
    "computed",
    "exact",
    "error",
];

/// Shortest round-trip decimal; exponent form outside `[1e-5, 1e16)`, no trailing `.0`.
fn number(v: f64) -> String {
    let s = format!("{v:?}");
    match s.strip_suffix(".0") {
        Some(integral) => integral.to_string(),
        None => s,
    }
}

fn optional(v: Option<f64>) -> String {
    v.map(number).unwrap_or_default()
}

fn record(row: &ResultRow) -> [String; 11] {
    [
        row.experiment.clone(),
        number(row.n_or_t),
        row.m.to_string(),
        number(row.kappa),
        number(row.alpha),
        number(row.delta),
        row.seed.to_string(),
        row.component.clone(),
        number(row.computed),
        optional(row.exact),
        optional(row.error),
    ]
}

pub fn write_csv<W: Write>(writer: W, rows: &[ResultRow]) -> Result<(), CliError> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(HEADER)?;
    for row in rows {
        csv.write_record(record(row))?;
    }
    csv.flush().map_err(|source| CliError::Io {
        path: PathBuf::from("<csv>"),
        source,
    })?;
    Ok(())
}

pub fn csv_string(rows: &[ResultRow]) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// `log10` of every error measure, one row per grid size and measure.
pub fn sweep_rows(reports: &[(usize, Report)]) -> Vec<ResultRow> {
    reports
        .iter()
        .flat_map(|(m, report)| {
            let template = report.rows.first().cloned();
            report.errors.iter().filter_map(move |e| {
                let mut row = template.clone()?;
                row.m = *m;
                row.n_or_t = e.n_or_t;
                row.component = format!("log10({})", e.label);
                row.computed = e.error.log10();
                row.exact = None;
                row.error = None;
                Some(row)
            })
        })
        .collect()
}

/// Whitespace-separated `M label n_or_t log10_error` lines.
pub fn plot_data(reports: &[(usize, Report)]) -> String {
    let mut out = String::from("# M label n_or_t log10_error\n");
    for (m, report) in reports {
        for e in &report.errors {
            out.push_str(&format!(
                "{m} {} {} {}\n",
                e.label,
                number(e.n_or_t),
                number(e.error.log10())
            ));
        }
    }
    out
}

#[derive(Debug, Serialize)]
pub struct Metadata<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub seed: u64,
    pub noise_generator: &'static str,
    pub noise_model: &'static str,
    pub grid_sizes: &'a [usize],
    pub config: &'a ExperimentConfig,
}

impl<'a> Metadata<'a> {
    pub fn new(
        command: &'a str,
        seed: u64,
        grid_sizes: &'a [usize],
        config: &'a ExperimentConfig,
    ) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            noise_generator: elastocauchy::cauchy_solver::NOISE_GENERATOR,
            noise_model: "g + delta |g| / |v| v on the outer-curve traction data, independent draws per scalar component, one stream through all orders",
            grid_sizes,
            config,
        }
    }
}

/// `<output>.meta.json`
pub fn metadata_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = File::create(path).map_err(io)?;
    file.write_all(contents).map_err(io)
}
