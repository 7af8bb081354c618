//! `qbatt` command line: named figures, custom sweeps and the validation
//! suite, writing CSV and SVG artifacts.
//!
//! Settings resolve as flags > config file > `QBATT_SEED` (seed only) >
//! defaults. Exit codes: 0 success, 1 a validate check failed, 2 a bad
//! configuration or any other error (in which case nothing is written).

pub mod csv;
pub mod svg;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{QbattError, Result};
use crate::model::ModelParams;
use crate::noise::NoiseKind;
use crate::optimizer::{OptimizerConfig, ReadoutOrder};
use crate::protocol::Measurement;
use crate::scenarios::{run_appendix_d, Axis, Grid, InitialChoice, Series, Sweep, SweepResult};
use crate::validation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Command {
    #[serde(rename = "fig1")]
    Fig1,
    #[serde(rename = "fig2")]
    Fig2,
    #[serde(rename = "fig3")]
    Fig3,
    #[serde(rename = "accessible")]
    Accessible,
    #[value(name = "appendixD")]
    #[serde(rename = "appendixD")]
    AppendixD,
    #[serde(rename = "custom")]
    Custom,
    #[serde(rename = "validate")]
    Validate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
}

#[derive(Parser, Debug)]
#[command(name = "qbatt", version, about = "Stochastic energy extraction from a qubit battery")]
pub struct Args {
    pub command: Command,
    /// Output directory (default `results`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Optimizer and sampling seed; `QBATT_SEED` is the fallback.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Comma-separated subset of `csv,svg`.
    #[arg(long, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub l: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    #[arg(long)]
    pub noise: Option<NoiseKind>,
    /// Sets all three couplings `J_BA`, `J_AE`, `J_AX`.
    #[arg(long = "J", allow_hyphen_values = true)]
    pub j: Option<f64>,
    #[arg(long = "hB", allow_hyphen_values = true)]
    pub h_b: Option<f64>,
    #[arg(long)]
    pub restarts: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseOverride {
    pub kind: Option<NoiseKind>,
    pub k: Option<f64>,
}

/// A swept axis: explicit `values`, or `start`/`stop`/`points`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub axis: Axis,
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
}

impl AxisConfig {
    fn grid(&self) -> Result<Grid> {
        if let Some(v) = &self.values {
            if self.start.is_some() || self.stop.is_some() || self.points.is_some() {
                return Err(QbattError::Config(format!(
                    "axis {}: give either values or start/stop/points",
                    self.axis
                )));
            }
            return Ok(Grid {
                axis: self.axis,
                values: v.clone(),
            });
        }
        match (self.start, self.stop, self.points) {
            (Some(a), Some(b), Some(n)) => Ok(Grid::linspace(self.axis, a, b, n)),
            _ => Err(QbattError::Config(format!(
                "axis {} needs values or all of start, stop, points",
                self.axis
            ))),
        }
    }
}

/// The JSON configuration file. Every field is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<Command>,
    pub out: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub params: Option<ModelParams>,
    pub noise: Option<NoiseOverride>,
    pub initial: Option<InitialChoice>,
    pub optimizer: Option<OptimizerConfig>,
    pub readout: Option<ReadoutOrder>,
    pub entangler_t: Option<f64>,
    pub axes: Option<Vec<AxisConfig>>,
    /// Series labels such as `povm[bit-flip]` or `npovm1`.
    pub families: Option<Vec<String>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| QbattError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| QbattError::Config(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved settings of one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    pub seed: u64,
    pub workers: Option<usize>,
    pub sweep: Sweep,
}

fn base_sweep(command: Command) -> Sweep {
    match command {
        Command::Fig1 => Sweep::fig1(),
        Command::Fig2 => Sweep::fig2(),
        Command::Fig3 => Sweep::fig3(),
        Command::Accessible => Sweep::accessible(),
        Command::AppendixD => {
            let mut s = Sweep::fig3();
            s.name = "appendixD".into();
            s.axes = vec![Grid::linspace(Axis::K, 0.0, 1.0, 11)];
            s.series = vec![Series::new(Measurement::Npovm1, None)];
            s
        }
        Command::Custom | Command::Validate => {
            let mut s = Sweep::fig1();
            s.name = command_name(command).into();
            s.series = vec![Series::new(Measurement::Povm, None), Series::new(Measurement::Npovm1, None)];
            s
        }
    }
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Fig1 => "fig1",
        Command::Fig2 => "fig2",
        Command::Fig3 => "fig3",
        Command::Accessible => "accessible",
        Command::AppendixD => "appendixD",
        Command::Custom => "custom",
        Command::Validate => "validate",
    }
}

/// A scalar override collapses a swept axis to that single value.
fn set_scalar(sweep: &mut Sweep, axis: Axis, v: f64) {
    if let Some(g) = sweep.axes.iter_mut().find(|g| g.axis == axis) {
        g.values = vec![v];
        return;
    }
    match axis {
        Axis::K => sweep.noise.k = v,
        Axis::T => sweep.params.t = v,
        Axis::L => sweep.initial = InitialChoice::Ghz { l: v },
    }
}

fn set_noise(sweep: &mut Sweep, kind: NoiseKind) {
    sweep.noise.kind = kind;
    if sweep.series.iter().any(|s| s.noise.is_some()) {
        let mut kept: Vec<Series> = Vec::new();
        for s in &sweep.series {
            let s = Series::new(s.measurement, s.noise.map(|_| kind));
            if !kept.contains(&s) {
                kept.push(s);
            }
        }
        sweep.series = kept;
    }
}

impl RunConfig {
    /// Merges flags, file and environment over the command defaults.
    pub fn resolve(args: &Args, file: Option<FileConfig>, env_seed: Option<&str>) -> Result<Self> {
        let file = file.unwrap_or_default();
        let command = args.command;
        let mut sweep = base_sweep(command);

        if let Some(p) = file.params {
            sweep.params = p;
        }
        if let Some(n) = &file.noise {
            if let Some(k) = n.k {
                sweep.noise.k = k;
            }
            if let Some(kind) = n.kind {
                set_noise(&mut sweep, kind);
            }
        }
        if let Some(init) = file.initial {
            sweep.initial = init;
        }
        if let Some(o) = file.optimizer {
            sweep.optimizer = o;
        }
        if let Some(r) = file.readout {
            sweep.readout = r;
        }
        if file.entangler_t.is_some() {
            sweep.entangler_t = file.entangler_t;
        }
        if let Some(axes) = &file.axes {
            sweep.axes = axes.iter().map(AxisConfig::grid).collect::<Result<_>>()?;
        }
        if let Some(f) = &file.families {
            sweep.series = f.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        } else if command == Command::Custom && matches!(sweep.initial, InitialChoice::Ghz { .. }) {
            sweep.series = vec![Series::new(Measurement::Povm, None), Series::new(Measurement::Npovm2, None)];
        }

        if let Some(kind) = args.noise {
            set_noise(&mut sweep, kind);
        }
        if let Some(v) = args.k {
            set_scalar(&mut sweep, Axis::K, v);
        }
        if let Some(v) = args.l {
            set_scalar(&mut sweep, Axis::L, v);
        }
        if let Some(v) = args.t {
            set_scalar(&mut sweep, Axis::T, v);
        }
        if let Some(j) = args.j {
            sweep.params.j_ba = j;
            sweep.params.j_ae = j;
            sweep.params.j_ax = j;
        }
        if let Some(h) = args.h_b {
            sweep.params.h_b = h;
        }
        if let Some(r) = args.restarts {
            sweep.optimizer.restarts = r;
        }

        let env_seed = match env_seed {
            Some(s) => Some(
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| QbattError::Config(format!("QBATT_SEED is not an integer: '{s}'")))?,
            ),
            None => None,
        };
        let seed = args.seed.or(file.seed).or(env_seed).unwrap_or(sweep.optimizer.seed);
        sweep.optimizer.seed = seed;

        let workers = args.workers.or(file.workers);
        if workers == Some(0) {
            return Err(QbattError::Config("--workers must be at least 1".into()));
        }
        let mut formats = args
            .format
            .clone()
            .or(file.formats)
            .unwrap_or_else(|| vec![Format::Csv, Format::Svg]);
        formats.dedup();
        if formats.is_empty() {
            return Err(QbattError::Config("no output format selected".into()));
        }

        if command == Command::AppendixD {
            if sweep.axes.len() != 1 || sweep.axes[0].axis != Axis::K {
                return Err(QbattError::Config("appendixD sweeps k only".into()));
            }
            sweep.params.validate()?;
        } else if command != Command::Validate {
            sweep.validate().map_err(|e| QbattError::Config(e.to_string()))?;
            for s in &sweep.series {
                if s.measurement == Measurement::Npovm2 && !matches!(sweep.initial, InitialChoice::Ghz { .. }) {
                    return Err(QbattError::Config("npovm2 needs a GHZ initial state".into()));
                }
            }
            if !(0.0..=1.0).contains(&sweep.noise.k) {
                return Err(QbattError::NoiseStrength(sweep.noise.k));
            }
        }

        Ok(Self {
            command,
            out: args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("results")),
            formats,
            seed,
            workers,
            sweep,
        })
    }
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    let io = |source| QbattError::Io {
        path: dir.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(io)?;
    let probe = dir.join(".qbatt-write-test");
    fs::write(&probe, b"").map_err(io)?;
    fs::remove_file(&probe).map_err(io)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| QbattError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Rendered artifacts, written only once everything rendered.
struct Outputs {
    files: Vec<(PathBuf, String)>,
    failed: Option<String>,
    summary: String,
}

fn sweep_outputs(cfg: &RunConfig, result: &SweepResult, name: &str) -> Result<Outputs> {
    let mut files = Vec::new();
    if cfg.formats.contains(&Format::Csv) {
        files.push((cfg.out.join(format!("{name}.csv")), csv::render(result)?));
    }
    if cfg.formats.contains(&Format::Svg) {
        let text = if result.axes.len() == 2 {
            let family = result
                .series
                .iter()
                .find(|s| result.rows_for(s).any(|r| r.gap.is_some()))
                .ok_or_else(|| QbattError::Plot("no series carries a gap".into()))?;
            svg::render_heatmap(result, family)?
        } else {
            let q = if result.rows.iter().all(|r| !r.s_max.is_finite()) {
                svg::Quantity::Gap
            } else {
                svg::Quantity::Value
            };
            svg::render_lines(result, q)?
        };
        files.push((cfg.out.join(format!("{name}.svg")), text));
    }
    let mut summary = format!("{name}: {} rows\n", result.rows.len());
    for (label, lo, hi, mean) in result.summary() {
        summary.push_str(&format!("  {label}: min {lo:.6e} max {hi:.6e} mean {mean:.6e}\n"));
    }
    let nc = result.nonconverged().len();
    if nc > 0 {
        summary.push_str(&format!("  {nc} rows flagged nonconverged\n"));
    }
    Ok(Outputs {
        files,
        failed: None,
        summary,
    })
}

fn compute(cfg: &RunConfig) -> Result<Outputs> {
    match cfg.command {
        Command::Validate => {
            let (report, arts) = validation::run_suite(cfg.seed)?;
            let mut files = Vec::new();
            if cfg.formats.contains(&Format::Csv) {
                for (name, r) in arts.named() {
                    files.push((cfg.out.join(format!("{name}.csv")), csv::render(&r)?));
                }
            }
            let text = report.render();
            files.push((cfg.out.join("validate_report.txt"), text.clone()));
            let failed = if report.passed() {
                None
            } else {
                let mut diff = String::from("validation failed:\n");
                for c in report.failures() {
                    diff.push_str(&format!("  {}: {}\n", c.id, c.detail));
                }
                Some(diff)
            };
            Ok(Outputs {
                files,
                failed,
                summary: text,
            })
        }
        Command::AppendixD => {
            let s = &cfg.sweep;
            let rep = run_appendix_d(&s.axes[0].values, s.noise.kind, s.params)?;
            let result = rep.to_sweep_result();
            let mut out = sweep_outputs(cfg, &result, "appendixD")?;
            for p in &rep.points {
                out.summary.push_str(&format!(
                    "  k={:.3} compatible={} max gap={:.3e} rank(rho_AE)={}\n",
                    p.k, p.report.compatible, p.report.max_gap, p.rank_ae
                ));
            }
            Ok(out)
        }
        _ => {
            let result = cfg.sweep.run()?;
            sweep_outputs(cfg, &result, &cfg.sweep.name)
        }
    }
}

/// Parses `args` (including the program name) and runs, reporting to the
/// given streams. Returns the process exit code.
pub fn run_with<I, T>(args: I, env_seed: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    let file = match &args.config {
        Some(p) => match FileConfig::load(p) {
            Ok(f) => Some(f),
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                return 2;
            }
        },
        None => None,
    };
    let cfg = match RunConfig::resolve(&args, file, env_seed).and_then(|c| prepare_out_dir(&c.out).map(|_| c)) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    };
    let pool = match cfg.workers {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(p) => Some(p),
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                return 2;
            }
        },
        None => None,
    };
    let outputs = match &pool {
        Some(p) => p.install(|| compute(&cfg)),
        None => compute(&cfg),
    };
    let outputs = match outputs {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    };
    for (path, text) in &outputs.files {
        if let Err(e) = write_file(path, text) {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    }
    let _ = write!(stdout, "{}", outputs.summary);
    for (path, _) in &outputs.files {
        let _ = writeln!(stdout, "wrote {}", path.display());
    }
    match outputs.failed {
        Some(diff) => {
            let _ = write!(stderr, "{diff}");
            1
        }
        None => 0,
    }
}

/// Entry point used by the binary.
pub fn run() -> i32 {
    let env_seed = std::env::var("QBATT_SEED").ok();
    run_with(
        std::env::args_os(),
        env_seed.as_deref(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(v: &[&str]) -> Args {
        Args::try_parse_from(std::iter::once("qbatt").chain(v.iter().copied())).unwrap()
    }

    #[test]
    fn precedence_flags_file_env_default() {
        let file = FileConfig {
            seed: Some(11),
            ..Default::default()
        };
        let c = RunConfig::resolve(&args(&["fig1"]), None, None).unwrap();
        assert_eq!(c.seed, 7);
        let c = RunConfig::resolve(&args(&["fig1"]), None, Some("5")).unwrap();
        assert_eq!(c.seed, 5);
        let c = RunConfig::resolve(&args(&["fig1"]), Some(file.clone()), Some("5")).unwrap();
        assert_eq!(c.seed, 11);
        let c = RunConfig::resolve(&args(&["fig1", "--seed", "3"]), Some(file), Some("5")).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.sweep.optimizer.seed, 3);
    }

    #[test]
    fn scalar_overrides() {
        let c = RunConfig::resolve(&args(&["fig1", "--k", "0.3", "--J", "1.5", "--hB", "0.5"]), None, None).unwrap();
        assert_eq!(c.sweep.axes[0].values, vec![0.3]);
        assert_eq!(c.sweep.params.j_ae, 1.5);
        assert_eq!(c.sweep.params.h_b, 0.5);
        let c = RunConfig::resolve(&args(&["fig3", "--k", "0.2", "--t", "1.0"]), None, None).unwrap();
        assert_eq!(c.sweep.noise.k, 0.2);
        assert_eq!(c.sweep.axes[0].values, vec![1.0]);
        let c = RunConfig::resolve(&args(&["fig1", "--noise", "bit-flip"]), None, None).unwrap();
        assert_eq!(c.sweep.series.len(), 2);
        let c = RunConfig::resolve(&args(&["fig2", "--l", "-0.5"]), None, None).unwrap();
        assert_eq!(c.sweep.axes[1].values, vec![-0.5]);
    }

    #[test]
    fn bad_values_are_config_errors() {
        assert!(RunConfig::resolve(&args(&["fig3", "--k", "1.5"]), None, None).is_err());
        assert!(RunConfig::resolve(&args(&["fig1", "--workers", "0"]), None, None).is_err());
        assert!(RunConfig::resolve(&args(&["fig1"]), None, Some("x")).is_err());
        assert!(RunConfig::resolve(&args(&["accessible", "--restarts", "0"]), None, None).is_err());
        let f: std::result::Result<FileConfig, _> = serde_json::from_str(r#"{"bogus": 1}"#);
        assert!(f.is_err());
        let f: FileConfig = serde_json::from_str(r#"{"families": ["povm[nope]"]}"#).unwrap();
        assert!(RunConfig::resolve(&args(&["custom"]), Some(f), None).is_err());
    }

    #[test]
    fn custom_file_config() {
        let f: FileConfig = serde_json::from_str(
            r#"{"noise": {"kind": "bit-flip"}, "axes": [{"axis": "k", "start": 0, "stop": 1, "points": 101}],
                "params": {"t": 0.2}}"#,
        )
        .unwrap();
        let c = RunConfig::resolve(&args(&["custom"]), Some(f), None).unwrap();
        assert_eq!(c.sweep.noise.kind, NoiseKind::BitFlip);
        assert_eq!(c.sweep.axes[0].values.len(), 101);
        assert_eq!(c.sweep.params.t, 0.2);
        assert_eq!(c.sweep.params.j_ba, 2.0);
    }
}
