//! Command-line front end and result persistence.
//!
//! Every command turns its arguments into an [`ExperimentConfig`], validates
//! it, and writes plot-ready data. Curve commands emit one file per
//! `(M, n, m)` in the [`CSV_HEADER`](crate::curve::CSV_HEADER) layout; table commands emit their own
//! header. Each data file gets a JSON sidecar (`*.meta.json`) holding the
//! full configuration, so `phasequant rerun <sidecar>` regenerates it.
//! Files are write-once: names carry a UNIX timestamp unless `--overwrite`.

use std::f64::consts::PI;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analytic::{
    asymptotic_sep_qpsk, dvo_fit, dvo_theoretical, error_floor, phi_penalty_at_sep, psi_penalty,
    sep_bounds, sep_p_components, sep_qpsk_rayleigh, sep_qpsk_rayleigh_2bit_closed, QuadratureSettings,
    SepQuery,
};
use crate::curve::{curves_to_csv, Method, Resolution, SepCurve};
use crate::detector::{ml_detect_geometric, DetectionContext};
use crate::error::{Error, Result};
use crate::geometry::{ModulationSpec, QuantizerSpec, MAX_BITS};
use crate::montecarlo::{simulate_sep, sweep_sep, SepEstimate, SimPlan};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PHASEQUANT_OUT_DIR";

/// `|z|` above which `compare` flags a row.
pub const Z_FLAG: f64 = 4.0;

const MAX_TABLE_BITS: u32 = 8;

#[derive(Debug, Parser)]
#[command(name = "phasequant", version, about = "M-PSK error probability under n-bit phase quantization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo SEP curves, one file per (M, n, m).
    Simulate(CommonArgs),
    /// Quadrature SEP curves (requires n >= log2 M).
    Analytic {
        #[command(flatten)]
        common: CommonArgs,
        /// Add the p1..p4 component curves.
        #[arg(long)]
        components: bool,
        /// Add high-SNR QPSK Rayleigh asymptotes (M = 4, m = 1; n may be `inf`).
        #[arg(long)]
        asymptotic: bool,
    },
    /// Lower bound, exact value and upper bound curves.
    Bounds(CommonArgs),
    /// Error floor table for n < log2 M.
    Floor {
        #[command(flatten)]
        common: CommonArgs,
        /// Probability of the least likely symbol; defaults to 1/M.
        #[arg(long)]
        p_min: Option<f64>,
    },
    /// Fitted against predicted diversity order.
    Dvo {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = Engine::Analytic)]
        engine: Engine,
    },
    /// Quantization penalty tables (QPSK, Rayleigh).
    Penalty {
        #[command(flatten)]
        common: CommonArgs,
        /// Target SEP values for the transmit-power penalty.
        #[arg(long, value_delimiter = ',', default_value = "0.015")]
        sep: Vec<f64>,
    },
    /// ML decision for every quantizer output on a grid of channel phases.
    DetectorTable {
        #[command(flatten)]
        common: CommonArgs,
        /// Channel phase grid step in degrees.
        #[arg(long, default_value_t = 10.0)]
        phase_step_deg: f64,
    },
    /// Monte Carlo against quadrature with z-scores.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Shape used by the analytic side (defaults to the simulated m).
        #[arg(long)]
        analytic_m: Option<f64>,
    },
    /// Re-executes the configuration stored in a sidecar or config file.
    Rerun {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        overwrite: bool,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Constellation sizes.
    #[arg(long = "M", value_delimiter = ',')]
    pub orders: Option<Vec<usize>>,
    /// Quantizer bits (`inf` where supported).
    #[arg(long = "n", value_delimiter = ',')]
    pub bits: Option<Vec<Resolution>>,
    /// Nakagami shapes.
    #[arg(long = "m", value_delimiter = ',')]
    pub shapes: Option<Vec<f64>>,
    /// SNR grid `start:stop:step` in dB.
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    pub snr_db: Option<SnrGrid>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Maximum Monte Carlo trials per point.
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    /// Target relative standard error of Monte Carlo points.
    #[arg(long, default_value_t = 0.02)]
    pub ci: f64,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = "results")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Reuse fixed file names instead of timestamped ones.
    #[arg(long)]
    pub overwrite: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Analytic,
    Montecarlo,
}

/// Inclusive SNR grid in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrGrid {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl SnrGrid {
    pub fn new(start_db: f64, stop_db: f64, step_db: f64) -> Self {
        Self {
            start_db,
            stop_db,
            step_db,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let Self {
            start_db,
            stop_db,
            step_db,
        } = *self;
        if !(start_db.is_finite() && stop_db.is_finite() && step_db.is_finite()) {
            return Err(Error::config("SNR grid bounds must be finite"));
        }
        if step_db <= 0.0 {
            return Err(Error::config(format!("SNR grid step {step_db} dB must be positive")));
        }
        if stop_db < start_db {
            return Err(Error::config(format!(
                "SNR grid {start_db}:{stop_db}:{step_db} is empty (stop below start)"
            )));
        }
        if (stop_db - start_db) / step_db > 10_000.0 {
            return Err(Error::config("SNR grid has more than 10000 points"));
        }
        Ok(())
    }

    /// Grid points, rounded to 1e-9 dB so decimal steps print cleanly.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop_db - self.start_db) / self.step_db + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| ((self.start_db + i as f64 * self.step_db) * 1e9).round() / 1e9)
            .collect()
    }
}

impl std::str::FromStr for SnrGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad SNR value {t:?} in {s:?}")))
        };
        match parts.as_slice() {
            [a] => {
                let v = num(a)?;
                Ok(Self::new(v, v, 1.0))
            }
            [a, b, c] => Ok(Self::new(num(a)?, num(b)?, num(c)?)),
            _ => Err(Error::Parse(format!("SNR grid {s:?} is not start:stop:step"))),
        }
    }
}

/// A fully resolved experiment. Serialized into every sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: CommandSpec,
    pub orders: Vec<usize>,
    pub bits: Vec<Resolution>,
    pub shapes: Vec<f64>,
    pub snr_db: SnrGrid,
    pub seed: u64,
    pub max_trials: u64,
    pub target_rel_ci: f64,
    pub rel_tol: f64,
    pub out_dir: PathBuf,
    pub format: Format,
    pub overwrite: bool,
}

/// Command plus its specific options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum CommandSpec {
    Simulate,
    Analytic { components: bool, asymptotic: bool },
    Bounds,
    Floor { p_min: Option<f64> },
    Dvo { engine: Engine },
    Penalty { sep: Vec<f64> },
    DetectorTable { phase_step_deg: f64 },
    Compare { analytic_m: Option<f64> },
}

impl CommandSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CommandSpec::Simulate => "simulate",
            CommandSpec::Analytic { .. } => "analytic",
            CommandSpec::Bounds => "bounds",
            CommandSpec::Floor { .. } => "floor",
            CommandSpec::Dvo { .. } => "dvo",
            CommandSpec::Penalty { .. } => "penalty",
            CommandSpec::DetectorTable { .. } => "detector-table",
            CommandSpec::Compare { .. } => "compare",
        }
    }
}

impl ExperimentConfig {
    /// Fills per-command defaults for everything the user left out.
    pub fn from_args(command: CommandSpec, a: &CommonArgs) -> Self {
        let (default_bits, default_grid) = match command {
            CommandSpec::Dvo { .. } => (vec![Resolution::Bits(2)], SnrGrid::new(30.0, 50.0, 5.0)),
            CommandSpec::Penalty { .. } => (
                vec![2, 3, 4].into_iter().map(Resolution::Bits).chain([Resolution::Infinite]).collect(),
                SnrGrid::new(18.0, 18.0, 1.0),
            ),
            CommandSpec::Floor { .. } => (vec![Resolution::Bits(2)], SnrGrid::new(40.0, 40.0, 1.0)),
            _ => (vec![Resolution::Bits(2)], SnrGrid::new(0.0, 40.0, 5.0)),
        };
        Self {
            command,
            orders: a.orders.clone().unwrap_or_else(|| vec![4]),
            bits: a.bits.clone().unwrap_or(default_bits),
            shapes: a.shapes.clone().unwrap_or_else(|| vec![1.0]),
            snr_db: a.snr_db.unwrap_or(default_grid),
            seed: a.seed,
            max_trials: a.trials,
            target_rel_ci: a.ci,
            rel_tol: a.tol,
            out_dir: a.out.clone(),
            format: a.format,
            overwrite: a.overwrite,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.orders.is_empty() {
            return Err(Error::config("no constellation size given (--M)"));
        }
        for &m in &self.orders {
            if m < 2 || !m.is_power_of_two() || m > 1 << MAX_BITS {
                return Err(Error::config(format!("--M {m}: must be a power of two in [2, 2^{MAX_BITS}]")));
            }
        }
        if self.bits.is_empty() {
            return Err(Error::config("no bit count given (--n)"));
        }
        let infinite_ok = matches!(
            self.command,
            CommandSpec::Penalty { .. } | CommandSpec::Analytic { asymptotic: true, .. }
        );
        for &b in &self.bits {
            match b {
                Resolution::Bits(n) if n == 0 || n > MAX_BITS => {
                    return Err(Error::config(format!("--n {n}: must be in [1, {MAX_BITS}]")))
                }
                Resolution::Infinite if !infinite_ok => {
                    return Err(Error::config(format!(
                        "--n inf is only accepted by `penalty` and `analytic --asymptotic`, not `{}`",
                        self.command.name()
                    )))
                }
                _ => {}
            }
        }
        if self.shapes.is_empty() {
            return Err(Error::config("no Nakagami shape given (--m)"));
        }
        for &m in &self.shapes {
            if !(m.is_finite() && m >= 0.5) {
                return Err(Error::config(format!("--m {m}: Nakagami shape must be at least 0.5")));
            }
        }
        self.snr_db.validate()?;
        if self.max_trials == 0 {
            return Err(Error::config("--trials must be at least 1"));
        }
        if !(self.target_rel_ci > 0.0 && self.target_rel_ci.is_finite()) {
            return Err(Error::config(format!("--ci {}: must be positive", self.target_rel_ci)));
        }
        self.settings().validate().map_err(|e| match e {
            Error::Config(msg) => Error::config(format!("--tol: {msg}")),
            other => other,
        })?;
        match &self.command {
            CommandSpec::Floor { p_min: Some(p) } => {
                if let Some(&m) = self.orders.iter().find(|&&m| !(*p > 0.0 && *p <= 1.0 / m as f64)) {
                    return Err(Error::config(format!("--p-min {p}: must lie in (0, 1/M] for M = {m}")));
                }
            }
            CommandSpec::Penalty { sep } => {
                if let Some(s) = sep.iter().find(|s| !(**s > 0.0 && **s < 1.0)) {
                    return Err(Error::config(format!("--sep {s}: must lie in (0, 1)")));
                }
                if let Some(b) = self.bits.iter().find(|b| matches!(b, Resolution::Bits(n) if *n < 2)) {
                    return Err(Error::config(format!("--n {b}: penalties need n >= 2")));
                }
                if self.snr_db.start_db < -100.0 {
                    return Err(Error::config("--snr-db: penalty SNR below -100 dB"));
                }
            }
            CommandSpec::DetectorTable { phase_step_deg } => {
                if !(*phase_step_deg > 0.0 && *phase_step_deg <= 360.0) {
                    return Err(Error::config(format!(
                        "--phase-step-deg {phase_step_deg}: must be in (0, 360]"
                    )));
                }
                if let Some(b) = self.bits.iter().find(|b| matches!(b, Resolution::Bits(n) if *n > MAX_TABLE_BITS)) {
                    return Err(Error::config(format!(
                        "--n {b}: detector tables are limited to n <= {MAX_TABLE_BITS}"
                    )));
                }
            }
            CommandSpec::Compare { analytic_m: Some(m) } if !(m.is_finite() && *m >= 0.5) => {
                return Err(Error::config(format!("--analytic-m {m}: must be at least 0.5")));
            }
            _ => {}
        }
        if matches!(
            self.command,
            CommandSpec::Analytic { .. } | CommandSpec::Bounds | CommandSpec::Compare { .. }
        ) || matches!(self.command, CommandSpec::Dvo { engine: Engine::Analytic })
        {
            for (order, bits) in self.finite_pairs() {
                if bits < order.trailing_zeros() {
                    return Err(Error::config(format!(
                        "M = {order}, n = {bits}: the quadrature SEP only covers n >= log2 M; \
                         below that the SEP has an error floor, use `simulate` or `floor`"
                    )));
                }
            }
        }
        if matches!(self.command, CommandSpec::Bounds) && self.orders.contains(&2) {
            return Err(Error::config("`bounds` needs M >= 4"));
        }
        Ok(())
    }

    fn finite_pairs(&self) -> Vec<(usize, u32)> {
        let mut v = Vec::new();
        for &o in &self.orders {
            for b in &self.bits {
                if let Resolution::Bits(n) = *b {
                    v.push((o, n));
                }
            }
        }
        v
    }

    pub fn settings(&self) -> QuadratureSettings {
        QuadratureSettings {
            rel_tol: self.rel_tol,
            ..QuadratureSettings::default()
        }
    }

    fn plan(&self, q: SepQuery) -> SimPlan {
        SimPlan {
            max_trials: self.max_trials,
            target_rel_ci: self.target_rel_ci,
            chunk_size: self.max_trials.min(4096),
            ..SimPlan::new(q, self.seed)
        }
    }

    /// `(M, n, m)` triples in argument order, finite resolutions only.
    fn configs(&self) -> Vec<(usize, u32, f64)> {
        let mut v = Vec::new();
        for (o, n) in self.finite_pairs() {
            for &m in &self.shapes {
                v.push((o, n, m));
            }
        }
        v
    }
}

/// Files produced by a command plus a human-readable summary.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
    /// Rows flagged by `compare`.
    pub flagged: usize,
}

/// Data destined for one output file.
enum Payload {
    Curves(Vec<SepCurve>),
    Table { header: Vec<String>, rows: Vec<Vec<String>> },
}

impl Payload {
    fn csv(&self) -> String {
        match self {
            Payload::Curves(c) => curves_to_csv(c),
            Payload::Table { header, rows } => {
                let mut out = header.join(",");
                out.push('\n');
                for r in rows {
                    out.push_str(&r.join(","));
                    out.push('\n');
                }
                out
            }
        }
    }

    fn json(&self) -> Result<Value> {
        Ok(match self {
            Payload::Curves(c) => serde_json::to_value(c)?,
            Payload::Table { header, rows } => Value::Array(
                rows.iter()
                    .map(|r| {
                        let obj = header
                            .iter()
                            .zip(r)
                            .map(|(h, cell)| {
                                let v = cell
                                    .parse::<f64>()
                                    .ok()
                                    .filter(|x| x.is_finite())
                                    .and_then(|x| serde_json::Number::from_f64(x).map(Value::Number))
                                    .unwrap_or_else(|| Value::String(cell.clone()));
                                (h.clone(), v)
                            })
                            .collect();
                        Value::Object(obj)
                    })
                    .collect(),
            ),
        })
    }
}

fn unix_time() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn open_target(path: &Path, overwrite: bool) -> Result<File> {
    if overwrite {
        Ok(File::create(path)?)
    } else {
        Ok(OpenOptions::new().write(true).create_new(true).open(path)?)
    }
}

/// Writes a payload (and, for CSV, its sidecar) under a fresh or fixed name.
fn persist(cfg: &ExperimentConfig, stem: &str, payload: &Payload, extra: Value) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&cfg.out_dir)?;
    let timestamp = unix_time();
    let data_ext = match cfg.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let names = |suffix: &str| {
        let base = format!("{stem}{suffix}");
        (
            cfg.out_dir.join(format!("{base}.{data_ext}")),
            cfg.out_dir.join(format!("{base}.meta.json")),
        )
    };
    let (data_path, meta_path) = if cfg.overwrite {
        names("")
    } else {
        (0..)
            .map(|i| {
                if i == 0 {
                    names(&format!("_{timestamp}"))
                } else {
                    names(&format!("_{timestamp}-{i}"))
                }
            })
            .find(|(d, m)| !d.exists() && !m.exists())
            .expect("unbounded search")
    };
    let meta = json!({
        "command": cfg.command.name(),
        "config": cfg,
        "seed": cfg.seed,
        "timestamp": timestamp,
        "data_file": data_path.file_name().map(|f| f.to_string_lossy().into_owned()),
        "details": extra,
    });
    match cfg.format {
        Format::Csv => {
            open_target(&data_path, cfg.overwrite)?.write_all(payload.csv().as_bytes())?;
            let mut f = open_target(&meta_path, cfg.overwrite)?;
            f.write_all(serde_json::to_string_pretty(&meta)?.as_bytes())?;
            f.write_all(b"\n")?;
            Ok(vec![data_path, meta_path])
        }
        Format::Json => {
            let doc = json!({ "meta": meta, "data": payload.json()? });
            let mut f = open_target(&data_path, cfg.overwrite)?;
            f.write_all(serde_json::to_string_pretty(&doc)?.as_bytes())?;
            f.write_all(b"\n")?;
            Ok(vec![data_path])
        }
    }
}

fn config_stem(command: &str, order: usize, bits: impl std::fmt::Display, shape: f64) -> String {
    format!("{command}_M{order}_n{bits}_m{shape}")
}

/// Reads a config from a sidecar, a JSON-format result or a bare config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let v: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let cfg = v
        .pointer("/meta/config")
        .or_else(|| v.get("config"))
        .cloned()
        .unwrap_or(v);
    Ok(serde_json::from_value(cfg)?)
}

/// Validates and executes a configuration.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    match &cfg.command {
        CommandSpec::Simulate => cmd_simulate(cfg),
        CommandSpec::Analytic {
            components,
            asymptotic,
        } => cmd_analytic(cfg, *components, *asymptotic),
        CommandSpec::Bounds => cmd_bounds(cfg),
        CommandSpec::Floor { p_min } => cmd_floor(cfg, *p_min),
        CommandSpec::Dvo { engine } => cmd_dvo(cfg, *engine),
        CommandSpec::Penalty { sep } => cmd_penalty(cfg, sep),
        CommandSpec::DetectorTable { phase_step_deg } => cmd_detector_table(cfg, *phase_step_deg),
        CommandSpec::Compare { analytic_m } => cmd_compare(cfg, *analytic_m),
    }
}

fn cmd_simulate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let grid = cfg.snr_db.points();
    for (order, bits, shape) in cfg.configs() {
        let template = cfg.plan(SepQuery::new(order, bits, shape, 1.0)?);
        let (curve, estimates) = sweep_sep(&template, &grid)?;
        let stem = config_stem("simulate", order, bits, shape);
        out.files
            .extend(persist(cfg, &stem, &Payload::Curves(vec![curve.clone()]), json!({ "estimates": estimates }))?);
        for (p, e) in curve.points.iter().zip(&estimates) {
            out.summary.push_str(&format!(
                "M={order} n={bits} m={shape} {:>6} dB  p={:.6e} ± {:.2e}  ({} trials)\n",
                p.snr_db, p.value, p.uncertainty, e.trials
            ));
        }
    }
    Ok(out)
}

fn quadrature_curve(
    order: usize,
    bits: u32,
    shape: f64,
    grid: &[f64],
    s: &QuadratureSettings,
    components: bool,
) -> Result<Vec<SepCurve>> {
    let r = Resolution::Bits(bits);
    let mut total = SepCurve::new(order, r, shape, Method::Theorem3);
    let mut parts: Vec<SepCurve> = [Method::P1, Method::P2, Method::P3, Method::P4]
        .into_iter()
        .map(|m| SepCurve::new(order, r, shape, m))
        .collect();
    for &db in grid {
        let q = SepQuery::from_db(order, bits, shape, db)?;
        let c = sep_p_components(&q, s)?;
        let value = if order == 2 { c.p2.clamp(0.0, 1.0) } else { c.total() };
        total.push(db, value, c.abs_error);
        for (curve, v) in parts.iter_mut().zip([c.p1, c.p2, c.p3, c.p4]) {
            curve.push(db, v, c.abs_error);
        }
    }
    let mut out = vec![total];
    if components {
        out.extend(parts);
    }
    Ok(out)
}

fn cmd_analytic(cfg: &ExperimentConfig, components: bool, asymptotic: bool) -> Result<Outcome> {
    let s = cfg.settings();
    let grid = cfg.snr_db.points();
    let mut out = Outcome::default();
    for &order in &cfg.orders {
        for &res in &cfg.bits {
            for &shape in &cfg.shapes {
                let qpsk_rayleigh = order == 4 && shape == 1.0;
                let mut curves = Vec::new();
                if let Resolution::Bits(bits) = res {
                    curves.extend(quadrature_curve(order, bits, shape, &grid, &s, components)?);
                    if qpsk_rayleigh {
                        let mut c = SepCurve::new(order, res, shape, Method::QpskRayleigh);
                        for &db in &grid {
                            c.push(db, sep_qpsk_rayleigh(crate::db_to_linear(db), bits, &s)?, s.rel_tol);
                        }
                        curves.push(c);
                        if bits == 2 {
                            let mut c = SepCurve::new(order, res, shape, Method::QpskClosed);
                            for &db in &grid {
                                c.push(db, sep_qpsk_rayleigh_2bit_closed(crate::db_to_linear(db)), 0.0);
                            }
                            curves.push(c);
                        }
                    }
                }
                if asymptotic {
                    if !qpsk_rayleigh {
                        return Err(Error::config(format!(
                            "--asymptotic covers QPSK over Rayleigh fading only (got M = {order}, m = {shape})"
                        )));
                    }
                    let mut c = SepCurve::new(order, res, shape, Method::Asymptotic);
                    for &db in &grid {
                        c.push(db, asymptotic_sep_qpsk(crate::db_to_linear(db), res)?, 0.0);
                    }
                    curves.push(c);
                }
                for c in &curves {
                    if let Some(p) = c.points.last() {
                        out.summary.push_str(&format!(
                            "M={order} n={res} m={shape} {:<13} at {} dB: {:.6e}\n",
                            c.method, p.snr_db, p.value
                        ));
                    }
                }
                let stem = config_stem("analytic", order, res, shape);
                out.files.extend(persist(cfg, &stem, &Payload::Curves(curves), Value::Null)?);
            }
        }
    }
    Ok(out)
}

fn cmd_bounds(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = cfg.settings();
    let grid = cfg.snr_db.points();
    let mut out = Outcome::default();
    for (order, bits, shape) in cfg.configs() {
        let r = Resolution::Bits(bits);
        let mut exact = quadrature_curve(order, bits, shape, &grid, &s, false)?;
        let mut lower = SepCurve::new(order, r, shape, Method::LowerBound);
        let mut upper = SepCurve::new(order, r, shape, Method::UpperBound);
        for &db in &grid {
            let (l, u) = sep_bounds(&SepQuery::from_db(order, bits, shape, db)?, &s)?;
            lower.push(db, l, s.rel_tol);
            upper.push(db, u, s.rel_tol);
        }
        let exact = exact.remove(0);
        for ((l, p), u) in lower.points.iter().zip(&exact.points).zip(&upper.points) {
            out.summary.push_str(&format!(
                "M={order} n={bits} m={shape} {:>6} dB  L={:.4e} p={:.4e} U={:.4e}\n",
                p.snr_db, l.value, p.value, u.value
            ));
        }
        let stem = config_stem("bounds", order, bits, shape);
        out.files
            .extend(persist(cfg, &stem, &Payload::Curves(vec![lower, exact, upper]), Value::Null)?);
    }
    Ok(out)
}

fn cmd_floor(cfg: &ExperimentConfig, p_min: Option<f64>) -> Result<Outcome> {
    let header = ["M", "n", "p_min", "floor", "regions", "symbols_without_region"];
    let mut rows = Vec::new();
    for (order, bits) in cfg.finite_pairs() {
        let p = p_min.unwrap_or(1.0 / order as f64);
        let floor = error_floor(order, bits, p)?;
        let regions = 1u64 << bits;
        let orphaned = (order as u64).saturating_sub(regions);
        rows.push(vec![
            order.to_string(),
            bits.to_string(),
            p.to_string(),
            floor.to_string(),
            regions.to_string(),
            orphaned.to_string(),
        ]);
    }
    table_outcome(cfg, "floor", &header, rows)
}

fn table_outcome(cfg: &ExperimentConfig, stem: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<Outcome> {
    let payload = Payload::Table {
        header: header.iter().map(|s| s.to_string()).collect(),
        rows,
    };
    let summary = payload.csv();
    Ok(Outcome {
        files: persist(cfg, stem, &payload, Value::Null)?,
        summary,
        flagged: 0,
    })
}

fn cmd_dvo(cfg: &ExperimentConfig, engine: Engine) -> Result<Outcome> {
    let grid = cfg.snr_db.points();
    let window = (cfg.snr_db.start_db, cfg.snr_db.stop_db);
    let s = cfg.settings();
    let header = ["M", "n", "m", "window_lo_db", "window_hi_db", "engine", "fitted", "theoretical", "residual"];
    let mut rows = Vec::new();
    for (order, bits, shape) in cfg.configs() {
        let curve = match engine {
            Engine::Analytic => quadrature_curve(order, bits, shape, &grid, &s, false)?.remove(0),
            Engine::Montecarlo => sweep_sep(&cfg.plan(SepQuery::new(order, bits, shape, 1.0)?), &grid)?.0,
        };
        let fit = dvo_fit(&curve, window)?;
        rows.push(vec![
            order.to_string(),
            bits.to_string(),
            shape.to_string(),
            window.0.to_string(),
            window.1.to_string(),
            format!("{engine:?}").to_lowercase(),
            format!("{:.6}", fit.slope),
            dvo_theoretical(order, bits, shape)?.to_string(),
            format!("{:.3e}", fit.residual),
        ]);
    }
    table_outcome(cfg, "dvo", &header, rows)
}

fn cmd_penalty(cfg: &ExperimentConfig, seps: &[f64]) -> Result<Outcome> {
    let header = ["penalty", "n", "at", "at_unit", "value_db"];
    let mut rows = Vec::new();
    for &res in &cfg.bits {
        for db in cfg.snr_db.points() {
            let v = psi_penalty(crate::db_to_linear(db), res)?;
            rows.push(vec!["psi".into(), res.to_string(), db.to_string(), "snr_db".into(), format!("{v:.6}")]);
        }
    }
    for &res in &cfg.bits {
        if matches!(res, Resolution::Bits(2)) {
            continue;
        }
        for &sep in seps {
            let v = phi_penalty_at_sep(sep, res)?;
            rows.push(vec!["phi".into(), res.to_string(), sep.to_string(), "sep".into(), format!("{v:.6}")]);
        }
    }
    table_outcome(cfg, "penalty", &header, rows)
}

fn cmd_detector_table(cfg: &ExperimentConfig, step_deg: f64) -> Result<Outcome> {
    let mut out = Outcome::default();
    for (order, bits) in cfg.finite_pairs() {
        let modulation = ModulationSpec::new(order)?;
        let quantizer = QuantizerSpec::new(bits)?;
        let mut header = vec!["M".to_string(), "n".into(), "arg_h_deg".into(), "partition".into()];
        header.extend((0..quantizer.region_count()).map(|k| format!("k{k}")));
        let mut rows = Vec::new();
        let steps = (360.0 / step_deg - 1e-9).ceil() as usize;
        for j in 0..steps {
            let deg = ((j as f64 * step_deg) * 1e9).round() / 1e9;
            let h = Complex64::from_polar(1.0, deg * PI / 180.0);
            let ctx = DetectionContext::new(&modulation, quantizer, h, 1.0)?;
            let mut row = vec![
                order.to_string(),
                bits.to_string(),
                deg.to_string(),
                quantizer.fading_partition_index(h)?.to_string(),
            ];
            for k in 0..quantizer.region_count() {
                row.push(ml_detect_geometric(&ctx, k)?.to_string());
            }
            rows.push(row);
        }
        let payload = Payload::Table { header, rows };
        out.summary.push_str(&payload.csv());
        let stem = format!("detector-table_M{order}_n{bits}");
        out.files.extend(persist(cfg, &stem, &payload, Value::Null)?);
    }
    Ok(out)
}

fn cmd_compare(cfg: &ExperimentConfig, analytic_m: Option<f64>) -> Result<Outcome> {
    let s = cfg.settings();
    let header = [
        "M", "n", "m", "snr_db", "p_mc", "stderr", "trials", "m_analytic", "p_analytic", "z", "flag",
    ];
    let mut rows = Vec::new();
    let mut flagged = 0;
    for (order, bits, shape) in cfg.configs() {
        let shape_a = analytic_m.unwrap_or(shape);
        for db in cfg.snr_db.points() {
            let est: SepEstimate = simulate_sep(&cfg.plan(SepQuery::from_db(order, bits, shape, db)?))?;
            let q = SepQuery::from_db(order, bits, shape_a, db)?;
            let c = sep_p_components(&q, &s)?;
            let p = if order == 2 { c.p2.clamp(0.0, 1.0) } else { c.total() };
            // Spread under the analytic value, so an error-free run still scores.
            let sd = (p * (1.0 - p) / est.trials as f64).sqrt().max(c.abs_error);
            let z = if sd > 0.0 { (est.p_hat - p) / sd } else { 0.0 };
            let flag = z.abs() > Z_FLAG;
            flagged += flag as usize;
            rows.push(vec![
                order.to_string(),
                bits.to_string(),
                shape.to_string(),
                db.to_string(),
                est.p_hat.to_string(),
                est.stderr.to_string(),
                est.trials.to_string(),
                shape_a.to_string(),
                p.to_string(),
                format!("{z:.3}"),
                if flag { "FLAG".into() } else { "ok".into() },
            ]);
        }
    }
    let mut out = table_outcome(cfg, "compare", &header, rows)?;
    out.flagged = flagged;
    out.summary.push_str(&format!("{flagged} row(s) with |z| > {Z_FLAG}\n"));
    Ok(out)
}

/// Maps parsed arguments to a configuration.
pub fn config_from_cli(cli: &Cli) -> Result<ExperimentConfig> {
    let cfg = match &cli.command {
        Command::Simulate(a) => ExperimentConfig::from_args(CommandSpec::Simulate, a),
        Command::Analytic {
            common,
            components,
            asymptotic,
        } => ExperimentConfig::from_args(
            CommandSpec::Analytic {
                components: *components,
                asymptotic: *asymptotic,
            },
            common,
        ),
        Command::Bounds(a) => ExperimentConfig::from_args(CommandSpec::Bounds, a),
        Command::Floor { common, p_min } => ExperimentConfig::from_args(CommandSpec::Floor { p_min: *p_min }, common),
        Command::Dvo { common, engine } => ExperimentConfig::from_args(CommandSpec::Dvo { engine: *engine }, common),
        Command::Penalty { common, sep } => {
            ExperimentConfig::from_args(CommandSpec::Penalty { sep: sep.clone() }, common)
        }
        Command::DetectorTable {
            common,
            phase_step_deg,
        } => ExperimentConfig::from_args(
            CommandSpec::DetectorTable {
                phase_step_deg: *phase_step_deg,
            },
            common,
        ),
        Command::Compare { common, analytic_m } => ExperimentConfig::from_args(
            CommandSpec::Compare {
                analytic_m: *analytic_m,
            },
            common,
        ),
        Command::Rerun { path, out, overwrite } => {
            let mut cfg = load_config(path)?;
            if let Some(o) = out {
                cfg.out_dir = o.clone();
            }
            cfg.overwrite |= *overwrite;
            cfg
        }
    };
    Ok(cfg)
}

/// Entry point of the `phasequant` binary; returns the process exit code.
pub fn run(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match config_from_cli(&cli).and_then(|cfg| execute(&cfg)) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            0
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> ExperimentConfig {
        let cli = Cli::try_parse_from(std::iter::once("phasequant").chain(args.iter().copied())).unwrap();
        config_from_cli(&cli).unwrap()
    }

    #[test]
    fn grid_parsing_and_points() {
        let g: SnrGrid = "0:1:0.1".parse().unwrap();
        let p = g.points();
        assert_eq!(p.len(), 11);
        assert_eq!(p[3], 0.3);
        assert_eq!("-5:5:5".parse::<SnrGrid>().unwrap().points(), vec![-5.0, 0.0, 5.0]);
        assert_eq!("18".parse::<SnrGrid>().unwrap().points(), vec![18.0]);
        assert!("1:2".parse::<SnrGrid>().is_err());
        assert!(SnrGrid::new(10.0, 0.0, 5.0).validate().is_err());
        assert!(SnrGrid::new(0.0, 10.0, 0.0).validate().is_err());
    }

    #[test]
    fn per_command_defaults() {
        let c = parse(&["penalty"]);
        assert_eq!(c.bits.len(), 4);
        assert_eq!(c.snr_db.points(), vec![18.0]);
        let c = parse(&["dvo", "--n", "3"]);
        assert_eq!(c.snr_db.points(), vec![30.0, 35.0, 40.0, 45.0, 50.0]);
        let c = parse(&["simulate", "--M", "4,8", "--n", "2,3", "--m", "0.5,2", "--snr-db", "0:20:10"]);
        assert_eq!(c.configs().len(), 8);
    }

    #[test]
    fn validation_messages_name_the_flag() {
        let msg = |args: &[&str]| parse(args).validate().unwrap_err().to_string();
        assert!(msg(&["simulate", "--M", "6"]).contains("--M 6"));
        assert!(msg(&["simulate", "--m", "0.2"]).contains("--m 0.2"));
        assert!(msg(&["simulate", "--n", "inf"]).contains("--n inf"));
        assert!(msg(&["analytic", "--M", "8", "--n", "2"]).contains("n >= log2 M"));
        assert!(msg(&["simulate", "--snr-db", "10:0:1"]).contains("empty"));
        assert!(msg(&["simulate", "--ci", "0"]).contains("--ci"));
        assert!(msg(&["analytic", "--tol", "2"]).contains("--tol"));
        assert!(msg(&["floor", "--M", "8", "--p-min", "0.5"]).contains("--p-min"));
    }
}
