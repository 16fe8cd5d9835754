//! Command-line front end: single runs, sweeps, simulation-vs-closed-form
//! validation and plot data.
//!
//! Exit codes: 0 success, 1 validation failure or I/O error, 2 usage error,
//! 3 domain error (degenerate parameters).

pub mod config;
pub mod figure;
pub mod format;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};
use rayon::prelude::*;

use crate::analytics::{AnalyticsError, ClosedFormReport};
use crate::protocol::{self, ProtocolError, ProtocolParams, T2};
use format::{csv_line, num, opt_num};

#[derive(Debug, Parser)]
#[command(
    name = "spe-amp",
    version,
    about = "Heralded amplification and concentration of single-photon entanglement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one parameter point and compare with the closed forms.
    Run(RunArgs),
    /// Sweep one of t1, a2, eta and write a CSV row per point.
    Sweep(SweepArgs),
    /// Write the data behind plot 2 (matched t2), 3 (t1 threshold),
    /// 4 (gain) or 5 (total success probability) as CSV.
    Figure(FigureArgs),
    /// Check simulation against closed forms over a grid.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct PointArgs {
    /// Single-photon weight of the lossy input, in [0, 1].
    #[arg(long)]
    eta: Option<String>,
    /// Squared amplitude a^2 of the a-side branch, in [0, 1].
    #[arg(long)]
    a2: Option<String>,
    /// Horizontal amplitude of the polarization qubit; beta = sqrt(1 - alpha^2).
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Transmission of the first variable beam splitter, in (0, 1).
    #[arg(long)]
    t1: Option<String>,
    /// Transmission of the second variable beam splitter, or `auto` for the matched value.
    #[arg(long)]
    t2: Option<String>,
    /// File of key=value lines; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Also write the comparison as a one-row CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Swept variable: t1, a2 or eta.
    #[arg(long)]
    var: Option<String>,
    #[arg(long)]
    start: Option<String>,
    #[arg(long)]
    stop: Option<String>,
    /// Number of grid points including both ends (at least 2).
    #[arg(long)]
    steps: Option<String>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FigureArgs {
    /// Plot number: 2, 3, 4 or 5.
    n: u8,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Comma-separated eta values (default 0.1..0.9 step 0.1).
    #[arg(long)]
    eta: Option<String>,
    /// Comma-separated a^2 values (default 0.1..0.9 step 0.1).
    #[arg(long)]
    a2: Option<String>,
    /// Comma-separated t1 values (default 0.05..0.60 step 0.05).
    #[arg(long)]
    t1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Largest accepted absolute deviation (default 1e-10).
    #[arg(long)]
    tolerance: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m)
            | CliError::Domain(m)
            | CliError::Validation(m)
            | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::InvalidParameter { .. } => CliError::Usage(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<AnalyticsError> for CliError {
    fn from(e: AnalyticsError) -> Self {
        CliError::Domain(e.to_string())
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Parse `args` (program name first), run the command, and return the exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let (name, result) = match cli.command {
        Command::Run(a) => ("run", cmd_run(a, stdout)),
        Command::Sweep(a) => ("sweep", cmd_sweep(a, stdout)),
        Command::Figure(a) => ("figure", cmd_figure(a, stdout)),
        Command::Validate(a) => ("validate", cmd_validate(a, stdout)),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if let CliError::Usage(_) = e {
                let mut cmd = Cli::command();
                if let Some(sub) = cmd.find_subcommand_mut(name) {
                    let _ = writeln!(stderr, "\n{}", sub.render_usage());
                }
            }
            e.exit_code()
        }
    }
}

/// Flag values layered over an optional config file.
struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    fn load(
        config: Option<&Path>,
        allowed: &[&str],
        flags: &[(&str, &Option<String>)],
    ) -> Result<Self, CliError> {
        let mut values = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
                config::parse(&text)
                    .map_err(|m| CliError::Usage(format!("{}: {m}", path.display())))?
            }
            None => BTreeMap::new(),
        };
        if let Some(key) = values.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(CliError::Usage(format!("unknown config key {key:?}")));
        }
        for (key, value) in flags {
            if let Some(v) = value {
                values.insert(key.to_string(), v.clone());
            }
        }
        Ok(Settings { values })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.raw(key).map(|v| parse_f64(key, v)).transpose()
    }

    fn required_f64(&self, key: &str) -> Result<f64, CliError> {
        self.f64(key)?
            .ok_or_else(|| CliError::Usage(format!("missing --{key}")))
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    v.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CliError::Usage(format!("invalid value for --{key}: {v:?}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    v.split(',').map(|s| parse_f64(key, s)).collect()
}

const POINT_KEYS: [&str; 5] = ["eta", "a2", "alpha", "t1", "t2"];

fn point_flags(p: &PointArgs) -> [(&'static str, &Option<String>); 5] {
    [
        ("eta", &p.eta),
        ("a2", &p.a2),
        ("alpha", &p.alpha),
        ("t1", &p.t1),
        ("t2", &p.t2),
    ]
}

fn parse_t2(s: &Settings) -> Result<T2, CliError> {
    match s.raw("t2") {
        None => Ok(T2::Matched),
        Some(v) if v.trim().eq_ignore_ascii_case("auto") => Ok(T2::Matched),
        Some(v) => Ok(T2::Fixed(parse_f64("t2", v)?)),
    }
}

fn polarization(alpha: Option<f64>) -> Result<(f64, f64), CliError> {
    let alpha = alpha.unwrap_or(1.0);
    if !(-1.0..=1.0).contains(&alpha) {
        return Err(CliError::Usage(format!(
            "--alpha {alpha} must lie in [-1, 1]"
        )));
    }
    Ok((alpha, (1.0 - alpha * alpha).max(0.0).sqrt()))
}

/// `eta p1 + ...` figures of merit from one source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub p1: f64,
    pub p2: f64,
    pub p_total: f64,
    pub eta_out: Option<f64>,
    pub gain: Option<f64>,
}

pub const METRIC_NAMES: [&str; 5] = ["p1", "p2", "p_total", "eta_out", "gain"];

impl Metrics {
    fn values(&self) -> [Option<f64>; 5] {
        [
            Some(self.p1),
            Some(self.p2),
            Some(self.p_total),
            self.eta_out,
            self.gain,
        ]
    }
}

/// Simulation and closed form side by side at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub eta: f64,
    pub a2: f64,
    pub t1: f64,
    pub t2: f64,
    pub simulated: Metrics,
    pub closed: Metrics,
}

impl Comparison {
    /// Absolute differences per metric; `inf` when only one side is defined.
    pub fn deviations(&self) -> [f64; 5] {
        let (s, c) = (self.simulated.values(), self.closed.values());
        std::array::from_fn(|i| match (s[i], c[i]) {
            (Some(x), Some(y)) => (x - y).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        })
    }

    /// Largest deviation and the metric it belongs to.
    pub fn worst(&self) -> (f64, &'static str) {
        self.deviations()
            .into_iter()
            .zip(METRIC_NAMES)
            .fold((0.0, METRIC_NAMES[0]), |best, cur| {
                if cur.0 > best.0 {
                    cur
                } else {
                    best
                }
            })
    }
}

pub fn compare(params: &ProtocolParams) -> Result<Comparison, CliError> {
    let out = protocol::run(params)?;
    let a2 = params.a2();
    let report = match params.t2 {
        T2::Matched => ClosedFormReport::evaluate(params.eta, a2, params.t1)?,
        T2::Fixed(t2) => ClosedFormReport::evaluate_with_t2(params.eta, a2, params.t1, t2)?,
    };
    Ok(Comparison {
        eta: params.eta,
        a2,
        t1: params.t1,
        t2: out.t2,
        simulated: Metrics {
            p1: out.p1,
            p2: out.p2,
            p_total: out.p_total,
            eta_out: out.eta_out,
            gain: out.gain,
        },
        closed: Metrics {
            p1: report.p1,
            p2: report.p2,
            p_total: report.p_total,
            eta_out: report.eta_out,
            gain: report.gain,
        },
    })
}

pub const SWEEP_HEADER: [&str; 14] = [
    "t1",
    "t2",
    "a2",
    "eta",
    "p1_sim",
    "p1_closed",
    "p2_sim",
    "p2_closed",
    "pt_sim",
    "pt_closed",
    "eta_out_sim",
    "eta_out_closed",
    "gain_sim",
    "gain_closed",
];

fn csv_header() -> String {
    csv_line(&SWEEP_HEADER.map(String::from))
}

fn csv_row(c: &Comparison) -> String {
    let (s, k) = (c.simulated, c.closed);
    csv_line(&[
        num(c.t1),
        num(c.t2),
        num(c.a2),
        num(c.eta),
        num(s.p1),
        num(k.p1),
        num(s.p2),
        num(k.p2),
        num(s.p_total),
        num(k.p_total),
        opt_num(s.eta_out),
        opt_num(k.eta_out),
        opt_num(s.gain),
        opt_num(k.gain),
    ])
}

fn write_output(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| io_error(p, e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn shown(x: Option<f64>) -> String {
    x.map(num).unwrap_or_else(|| "undefined".into())
}

fn diff_shown(a: Option<f64>, b: Option<f64>) -> String {
    match (a, b) {
        (Some(x), Some(y)) => num((x - y).abs()),
        _ => "-".into(),
    }
}

fn cmd_run(args: RunArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut allowed = POINT_KEYS.to_vec();
    allowed.push("out");
    let s = Settings::load(
        args.point.config.as_deref(),
        &allowed,
        &point_flags(&args.point),
    )?;
    let (alpha, beta) = polarization(s.f64("alpha")?)?;
    let params = ProtocolParams::from_a2(
        s.required_f64("eta")?,
        s.required_f64("a2")?,
        alpha,
        beta,
        s.required_f64("t1")?,
        parse_t2(&s)?,
    )?;
    let c = compare(&params)?;

    let mut text = String::new();
    let mode = if params.t2 == T2::Matched {
        "matched"
    } else {
        "fixed"
    };
    text.push_str(&format!(
        "eta = {}  a2 = {}  alpha = {}  beta = {}  t1 = {}  t2 = {} ({mode})\n\n",
        num(c.eta),
        num(c.a2),
        num(alpha),
        num(beta),
        num(c.t1),
        num(c.t2)
    ));
    text.push_str(&format!(
        "{:<8} {:>22} {:>22} {:>22}\n",
        "metric", "simulation", "closed_form", "abs_diff"
    ));
    for (i, name) in METRIC_NAMES.iter().enumerate() {
        let (x, y) = (c.simulated.values()[i], c.closed.values()[i]);
        text.push_str(&format!(
            "{name:<8} {:>22} {:>22} {:>22}\n",
            shown(x),
            shown(y),
            diff_shown(x, y)
        ));
    }
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| CliError::Io(format!("stdout: {e}")))?;

    let out = args.out.or_else(|| s.raw("out").map(PathBuf::from));
    if let Some(path) = out {
        write_output(Some(&path), &(csv_header() + &csv_row(&c)), stdout)?;
    }
    Ok(())
}

/// Evenly spaced grid with both ends included.
pub fn linspace(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    let span = stop - start;
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                stop
            } else {
                start + span * i as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

fn cmd_sweep(args: SweepArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut allowed = POINT_KEYS.to_vec();
    allowed.extend(["var", "start", "stop", "steps", "out"]);
    let mut flags = point_flags(&args.point).to_vec();
    flags.extend([
        ("var", &args.var),
        ("start", &args.start),
        ("stop", &args.stop),
        ("steps", &args.steps),
    ]);
    let s = Settings::load(args.point.config.as_deref(), &allowed, &flags)?;

    let var = s
        .raw("var")
        .ok_or_else(|| CliError::Usage("missing --var".into()))?
        .trim();
    let start = s.required_f64("start")?;
    let stop = s.required_f64("stop")?;
    let steps_raw = s
        .raw("steps")
        .ok_or_else(|| CliError::Usage("missing --steps".into()))?;
    let steps: usize = steps_raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid value for --steps: {steps_raw:?}")))?;
    if steps < 2 {
        return Err(CliError::Usage(format!(
            "--steps must be at least 2, got {steps}"
        )));
    }
    if start >= stop {
        return Err(CliError::Usage(format!(
            "--start {start} must be below --stop {stop}"
        )));
    }
    let in_domain = match var {
        "t1" => start > 0.0 && stop < 1.0,
        "a2" | "eta" => start >= 0.0 && stop <= 1.0,
        other => {
            return Err(CliError::Usage(format!(
                "--var must be t1, a2 or eta, got {other:?}"
            )))
        }
    };
    if !in_domain {
        return Err(CliError::Usage(format!(
            "range [{start}, {stop}] leaves the domain of {var}"
        )));
    }

    let fixed = |key: &str| -> Result<f64, CliError> {
        if key == var {
            Ok(0.0)
        } else {
            s.required_f64(key)
        }
    };
    let (eta, a2, t1) = (fixed("eta")?, fixed("a2")?, fixed("t1")?);
    let (alpha, beta) = polarization(s.f64("alpha")?)?;
    let t2 = parse_t2(&s)?;

    let params = linspace(start, stop, steps)
        .into_iter()
        .map(|x| {
            let pick = |key: &str, v: f64| if key == var { x } else { v };
            ProtocolParams::from_a2(
                pick("eta", eta),
                pick("a2", a2),
                alpha,
                beta,
                pick("t1", t1),
                t2,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Result<String, CliError>> = params
        .par_iter()
        .map(|p| compare(p).map(|c| csv_row(&c)))
        .collect();
    let mut text = csv_header();
    for row in rows {
        text.push_str(&row?);
    }
    let out = args.out.or_else(|| s.raw("out").map(PathBuf::from));
    write_output(out.as_deref(), &text, stdout)
}

fn cmd_figure(args: FigureArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = figure::figure_csv(args.n).map_err(|e| match e {
        figure::FigureError::Unknown(_) => CliError::Usage(e.to_string()),
        other => CliError::Domain(other.to_string()),
    })?;
    write_output(args.out.as_deref(), &text, stdout)
}

/// `0.1, 0.2, ..., 0.9`.
pub fn default_eta_grid() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

/// `0.1, 0.2, ..., 0.9`.
pub fn default_a2_grid() -> Vec<f64> {
    default_eta_grid()
}

/// `0.05, 0.10, ..., 0.60`.
pub fn default_t1_grid() -> Vec<f64> {
    (1..=12).map(|k| k as f64 / 20.0).collect()
}

/// Outcome of a grid validation.
#[derive(Debug, Clone)]
pub struct GridReport {
    pub points: Vec<Comparison>,
    pub tolerance: f64,
}

impl GridReport {
    /// Point and metric with the largest deviation.
    pub fn worst(&self) -> Option<(&Comparison, f64, &'static str)> {
        self.points
            .iter()
            .map(|c| {
                let (d, m) = c.worst();
                (c, d, m)
            })
            .fold(
                None,
                |best: Option<(&Comparison, f64, &'static str)>, cur| match best {
                    Some(b) if b.1 >= cur.1 => Some(b),
                    _ => Some(cur),
                },
            )
    }

    pub fn offenders(&self) -> Vec<&Comparison> {
        self.points
            .iter()
            .filter(|c| {
                let d = c.worst().0;
                d.is_nan() || d > self.tolerance
            })
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.offenders().is_empty()
    }
}

/// Compare simulation and closed forms over `eta x a2 x t1` (matched `t2`),
/// in that nesting order.
pub fn validate_grid(
    etas: &[f64],
    a2s: &[f64],
    t1s: &[f64],
    alpha: f64,
    tolerance: f64,
) -> Result<GridReport, CliError> {
    let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
    let mut params = Vec::with_capacity(etas.len() * a2s.len() * t1s.len());
    for &eta in etas {
        for &a2 in a2s {
            for &t1 in t1s {
                params.push(ProtocolParams::from_a2(
                    eta,
                    a2,
                    alpha,
                    beta,
                    t1,
                    T2::Matched,
                )?);
            }
        }
    }
    let points = params
        .par_iter()
        .map(compare)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GridReport { points, tolerance })
}

fn point_label(c: &Comparison) -> String {
    format!("eta={} a2={} t1={}", num(c.eta), num(c.a2), num(c.t1))
}

const LISTED_OFFENDERS: usize = 20;
const DETAILED_POINTS: usize = 8;

fn cmd_validate(args: ValidateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let flags = [
        ("eta", &args.eta),
        ("a2", &args.a2),
        ("t1", &args.t1),
        ("alpha", &args.alpha),
        ("tolerance", &args.tolerance),
    ];
    let s = Settings::load(args.config.as_deref(), &flags.map(|f| f.0), &flags)?;
    let grid =
        |key: &str, default: Vec<f64>| s.raw(key).map_or(Ok(default), |v| parse_list(key, v));
    let etas = grid("eta", default_eta_grid())?;
    let a2s = grid("a2", default_a2_grid())?;
    let t1s = grid("t1", default_t1_grid())?;
    let tolerance = s.f64("tolerance")?.unwrap_or(1e-10);
    if tolerance <= 0.0 {
        return Err(CliError::Usage(format!(
            "--tolerance must be positive, got {tolerance}"
        )));
    }
    let (alpha, _) = polarization(s.f64("alpha")?)?;
    let report = validate_grid(&etas, &a2s, &t1s, alpha, tolerance)?;

    let mut text = format!(
        "grid: {} eta x {} a2 x {} t1 = {} points, tolerance {tolerance:e}\n",
        etas.len(),
        a2s.len(),
        t1s.len(),
        report.points.len()
    );
    if report.points.len() <= DETAILED_POINTS {
        for c in &report.points {
            text.push_str(&format!("\n{}  t2={}\n", point_label(c), num(c.t2)));
            text.push_str(&format!(
                "{:<8} {:>22} {:>22} {:>22}\n",
                "metric", "simulation", "closed_form", "abs_diff"
            ));
            for (i, name) in METRIC_NAMES.iter().enumerate() {
                let (x, y) = (c.simulated.values()[i], c.closed.values()[i]);
                text.push_str(&format!(
                    "{name:<8} {:>22} {:>22} {:>22}\n",
                    shown(x),
                    shown(y),
                    diff_shown(x, y)
                ));
            }
        }
        text.push('\n');
    }
    if let Some((c, d, metric)) = report.worst() {
        text.push_str(&format!(
            "worst deviation: {d:e} ({metric}) at {}\n",
            point_label(c)
        ));
    }
    let offenders = report.offenders();
    let result = if offenders.is_empty() {
        text.push_str("PASS\n");
        Ok(())
    } else {
        text.push_str(&format!(
            "FAIL: {} of {} points exceed tolerance\n",
            offenders.len(),
            report.points.len()
        ));
        for c in offenders.iter().take(LISTED_OFFENDERS) {
            let (d, metric) = c.worst();
            text.push_str(&format!("  {}  {metric} deviation {d:e}\n", point_label(c)));
        }
        if offenders.len() > LISTED_OFFENDERS {
            text.push_str(&format!(
                "  ... and {} more\n",
                offenders.len() - LISTED_OFFENDERS
            ));
        }
        Err(CliError::Validation(format!(
            "{} grid points deviate by more than {tolerance:e}",
            offenders.len()
        )))
    };
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
    result
}
