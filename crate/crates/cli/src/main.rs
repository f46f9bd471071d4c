//! `bautin`: command-line front end for the Bautin analysis pipeline.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use bautin_core::dde_sim::{integrate, two_cycle_scan, ScanRow, ScanSpec, SimConfig};
use bautin_core::lyapunov::{bautin_candidates, bautin_report, l1_closed_form, l1_from_cascade};
use bautin_core::manifold::{CascadeOrder, CenterManifold, W31Boundary};
use bautin_core::spectrum::{spectrum_summary, ModelParams};
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "bautin", version, about = "Bautin bifurcation analysis of x' = a x(t-r) + x^2 + c x x(t-r)")]
struct Cli {
    /// Write the primary output here (atomically) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Leading eigenvalue pair and certified root count (JSON).
    Spectrum {
        #[arg(long, allow_hyphen_values = true, value_parser = finite)]
        a: f64,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2, value_parser = finite)]
        r: f64,
        #[arg(long, default_value_t = -0.125, allow_hyphen_values = true, value_parser = finite)]
        sigma: f64,
    },
    /// Center-manifold coefficient table at `c` (JSON).
    Coeffs {
        #[arg(long, allow_hyphen_values = true, value_parser = finite)]
        c: f64,
        /// Highest total order, 2 to 5.
        #[arg(long, default_value_t = 5)]
        order: u32,
        #[arg(long, value_enum, default_value_t = W31Arg::Matching)]
        w31_boundary: W31Arg,
    },
    /// Closed-form and cascade l1 on a grid of c (CSV).
    L1 {
        #[arg(long, allow_hyphen_values = true, value_parser = finite)]
        c_min: f64,
        #[arg(long, allow_hyphen_values = true, value_parser = finite)]
        c_max: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Bifurcation report at a candidate (JSON).
    Report {
        /// `c1`, `c2` or a number.
        #[arg(long, allow_hyphen_values = true)]
        c_star: CStar,
    },
    /// Integrates from a constant history (CSV of t, x).
    Simulate {
        #[arg(long, allow_hyphen_values = true, value_parser = finite)]
        a: f64,
        #[arg(long, allow_hyphen_values = true, value_parser = finite)]
        c: f64,
        #[arg(long, allow_hyphen_values = true, value_parser = finite)]
        amp: f64,
        #[arg(long = "T", value_parser = finite)]
        t: f64,
        #[arg(long = "N", default_value_t = 200)]
        n: usize,
        /// Same as `--out`.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Nested-cycle search next to a candidate (CSV table, JSON summary).
    Scan {
        #[arg(long, allow_hyphen_values = true)]
        c_star: CStar,
        #[arg(long, default_value_t = 4)]
        rows: usize,
        #[arg(long, default_value_t = 0.2, value_parser = finite)]
        c_span: f64,
        #[arg(long, default_value_t = 0.5, value_parser = finite)]
        mu_fraction: f64,
        /// Minimum integration horizon per run.
        #[arg(long, default_value_t = 4000.0, value_parser = finite)]
        horizon: f64,
        #[arg(long = "N", default_value_t = 200)]
        n: usize,
        /// Write the JSON summary here; stderr otherwise.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum W31Arg {
    Matching,
    Printed,
}

#[derive(Debug, Clone, Copy)]
enum CStar {
    C1,
    C2,
    Value(f64),
}

impl FromStr for CStar {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "c1" => Ok(Self::C1),
            "c2" => Ok(Self::C2),
            _ => finite(s).map(Self::Value),
        }
    }
}

impl CStar {
    fn value(self) -> f64 {
        let (c1, c2) = bautin_candidates::<f64>();
        match self {
            Self::C1 => c1,
            Self::C2 => c2,
            Self::Value(v) => v,
        }
    }
}

fn finite(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(format!("{s} is not a finite number")),
        Err(e) => Err(format!("{s}: {e}")),
    }
}

/// Exit 1: bad invocation; exit 2: the analysis rejected the input.
#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] bautin_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            _ => 2,
        }
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    let Some(path) = path else {
        io::stdout().lock().write_all(bytes)?;
        return Ok(());
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn json_bytes<S: Serialize>(v: &S) -> Result<Vec<u8>, Failure> {
    let mut out = serde_json::to_vec_pretty(v)?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Serialize)]
struct L1Row {
    c: f64,
    l1_closed: f64,
    l1_cascade: f64,
}

#[derive(Serialize)]
struct SimRow {
    t: f64,
    x: f64,
}

/// Flat CSV view of a scan row.
#[derive(Serialize)]
struct ScanCsvRow {
    a: f64,
    c: f64,
    mu: f64,
    l1: f64,
    l2: f64,
    predicted_inner: Option<f64>,
    predicted_outer: Option<f64>,
    inner_amp: Option<f64>,
    inner_period: Option<f64>,
    inner_attracting: Option<bool>,
    outer_amp: Option<f64>,
    outer_stability: Option<&'static str>,
    flags: String,
}

impl From<&ScanRow<f64>> for ScanCsvRow {
    fn from(r: &ScanRow<f64>) -> Self {
        Self {
            a: r.a,
            c: r.c,
            mu: r.mu,
            l1: r.l1,
            l2: r.l2,
            predicted_inner: r.predicted_inner,
            predicted_outer: r.predicted_outer,
            inner_amp: r.inner_amp,
            inner_period: r.inner_period,
            inner_attracting: r.inner_attracting,
            outer_amp: r.outer_amp,
            outer_stability: r.outer_stability.map(|_| "repelling_estimated"),
            flags: r.flags.join("; "),
        }
    }
}

#[derive(Serialize)]
struct ScanSummary {
    c_star: f64,
    spec: ScanSpec<f64>,
    config: SimConfig<f64>,
    rows: usize,
    ok_rows: usize,
    flagged: Vec<usize>,
}

fn csv_bytes<S: Serialize>(rows: impl IntoIterator<Item = S>) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Failure::Io(e.into_error()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Spectrum { a, r, sigma } => {
            let params = ModelParams::new(a, 0.0, r)?;
            write_output(out, &json_bytes(&spectrum_summary(&params, sigma)?)?)
        }
        Command::Coeffs { c, order, w31_boundary } => {
            let order = CascadeOrder::from_total(order)?;
            let boundary = match w31_boundary {
                W31Arg::Matching => W31Boundary::Matching,
                W31Arg::Printed => W31Boundary::Printed,
            };
            let table = CenterManifold::new()?.with_w31_boundary(boundary).build(c, order)?;
            write_output(out, &json_bytes(&table)?)
        }
        Command::L1 { c_min, c_max, steps } => {
            if steps < 2 || !(c_min < c_max) {
                return Err(Failure::Usage("l1 needs --steps >= 2 and --c-min < --c-max".into()));
            }
            let mut rows = Vec::with_capacity(steps);
            for k in 0..steps {
                let c = c_min + (c_max - c_min) * k as f64 / (steps - 1) as f64;
                rows.push(L1Row {
                    c,
                    l1_closed: l1_closed_form(c),
                    l1_cascade: l1_from_cascade(c)?,
                });
            }
            write_output(out, &csv_bytes(rows)?)
        }
        Command::Report { c_star } => write_output(out, &json_bytes(&bautin_report(c_star.value())?)?),
        Command::Simulate { a, c, amp, t, n, csv } => {
            let params = ModelParams::with_default_delay(a, c);
            let traj = integrate(&params, amp, t, n)?;
            let start = traj.steps_per_delay;
            let rows = traj.x[start..]
                .iter()
                .enumerate()
                .map(|(k, &x)| SimRow { t: traj.time(start + k), x });
            let bytes = csv_bytes(rows)?;
            if let Some(at) = traj.truncated_at {
                eprintln!("diverged: |x| exceeded the cutoff at t = {at}");
            }
            write_output(csv.as_deref().or(out), &bytes)
        }
        Command::Scan { c_star, rows, c_span, mu_fraction, horizon, n, summary } => {
            let spec = ScanSpec { rows, c_span, mu_fraction };
            let cfg = SimConfig { steps_per_delay: n, horizon, ..SimConfig::default() };
            let c = c_star.value();
            let table = two_cycle_scan(c, &spec, &cfg)?;
            let info = ScanSummary {
                c_star: c,
                spec,
                config: cfg,
                rows: table.len(),
                ok_rows: table.iter().filter(|r| r.ok()).count(),
                flagged: table.iter().enumerate().filter(|(_, r)| !r.ok()).map(|(k, _)| k).collect(),
            };
            write_output(out, &csv_bytes(table.iter().map(ScanCsvRow::from))?)?;
            let info = json_bytes(&info)?;
            match summary {
                Some(p) => write_output(Some(&p), &info),
                None => Ok(io::stderr().lock().write_all(&info)?),
            }
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("BAUTIN_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("BAUTIN_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            eprint!("{text}");
            if !text.contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(1);
        }
    };
    if let Err(e) = configure_threads().and_then(|_| run(cli)) {
        eprintln!("error: {e}");
        if e.code() == 1 {
            eprintln!("{}", Cli::command().render_usage());
        }
        return ExitCode::from(e.code());
    }
    ExitCode::SUCCESS
}
