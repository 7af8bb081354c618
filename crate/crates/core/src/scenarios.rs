//! Parameter sweeps that regenerate each figure.
//!
//! A [`Sweep`] is a scenario template, up to two swept axes from `{k, l, t}`
//! and a list of series (measurement family plus noise). Grid points are
//! evaluated in parallel; rows come back in grid order, then series order.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QbattError, Result};
use crate::hilbert::{unitary_from_hamiltonian, Subsystem};
use crate::model::{coupling_hamiltonian, GhzSpec, InitialState, ModelParams};
use crate::noise::{NoiseKind, NoiseSpec};
use crate::optimizer::{accessible_energy, OptimizerConfig, Probe, ReadoutOrder};
use crate::protocol::{evolve, spectra_compare, EvolvedSystem, Family, Measurement, Scenario, SpectraReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    K,
    L,
    T,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::K => "k",
            Axis::L => "l",
            Axis::T => "t",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub axis: Axis,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn linspace(axis: Axis, start: f64, stop: f64, points: usize) -> Self {
        Self {
            axis,
            values: linspace(start, stop, points),
        }
    }

    fn describe(&self) -> String {
        match (self.values.first(), self.values.last()) {
            (Some(a), Some(b)) => format!("{}=[{a}, {b}] x{}", self.axis, self.values.len()),
            _ => format!("{}=[]", self.axis),
        }
    }
}

/// `points` evenly spaced values with exact end points.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![start],
        n => (0..n)
            .map(|i| {
                if i == n - 1 {
                    stop
                } else {
                    start + (stop - start) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Initial-state choice at sweep level. For the GHZ start the party count
/// follows the family: 4 (`BAEX`) for `npovm2`, 3 (`BAE` plus prescribed
/// `ρ_X`) otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InitialChoice {
    ProductExcited,
    Ghz { l: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Series {
    pub measurement: Measurement,
    /// Overrides the template noise kind when set.
    pub noise: Option<NoiseKind>,
}

impl Series {
    pub fn new(measurement: Measurement, noise: Option<NoiseKind>) -> Self {
        Self { measurement, noise }
    }

    pub fn label(&self) -> String {
        match self.noise {
            Some(n) => format!("{}[{}]", self.measurement, n),
            None => self.measurement.to_string(),
        }
    }
}

impl std::str::FromStr for Series {
    type Err = QbattError;

    /// `povm`, `npovm1[bit-flip]`, `accessible-povm[dephasing]`, ...
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('[') {
            None => Ok(Series::new(s.parse()?, None)),
            Some((m, rest)) => {
                let noise = rest
                    .strip_suffix(']')
                    .ok_or_else(|| QbattError::Config(format!("unterminated noise in '{s}'")))?;
                Ok(Series::new(m.parse()?, Some(noise.parse()?)))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub name: String,
    pub initial: InitialChoice,
    pub params: ModelParams,
    pub noise: NoiseSpec,
    pub optimizer: OptimizerConfig,
    pub readout: ReadoutOrder,
    /// Time of the entangler used by accessible readouts; defaults to `params.t`.
    pub entangler_t: Option<f64>,
    pub axes: Vec<Grid>,
    pub series: Vec<Series>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub k: f64,
    pub l: Option<f64>,
    pub t: f64,
    pub family: String,
    pub s_max: f64,
    pub s_acc: Option<f64>,
    pub p: Option<f64>,
    pub delta_e: Option<f64>,
    pub gap: Option<f64>,
    pub converged: bool,
}

impl Row {
    /// `s_acc` when present, else `s_max`.
    pub fn value(&self) -> f64 {
        self.s_acc.unwrap_or(self.s_max)
    }

    pub fn axis(&self, axis: Axis) -> Option<f64> {
        match axis {
            Axis::K => Some(self.k),
            Axis::L => self.l,
            Axis::T => Some(self.t),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub name: String,
    pub axes: Vec<Grid>,
    pub series: Vec<String>,
    pub rows: Vec<Row>,
    pub metadata: Vec<(String, String)>,
}

impl SweepResult {
    pub fn rows_for<'a>(&'a self, family: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.family == family)
    }

    /// Values of one series along the sweep, in grid order.
    pub fn values(&self, family: &str) -> Vec<f64> {
        self.rows_for(family).map(Row::value).collect()
    }

    pub fn nonconverged(&self) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.converged)
            .map(|(i, _)| i)
            .collect()
    }

    /// Per-series `(label, min, max, mean)`; series without values report
    /// their gap column instead.
    pub fn summary(&self) -> Vec<(String, f64, f64, f64)> {
        self.series
            .iter()
            .map(|s| {
                let mut label = s.clone();
                let mut v: Vec<f64> = self.values(s).into_iter().filter(|x| x.is_finite()).collect();
                if v.is_empty() {
                    label.push_str(" gap");
                    v = self.rows_for(s).filter_map(|r| r.gap).collect();
                }
                let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mean = v.iter().sum::<f64>() / v.len().max(1) as f64;
                (label, min, max, mean)
            })
            .collect()
    }
}

impl Sweep {
    fn base(name: &str, axes: Vec<Grid>, series: Vec<Series>) -> Self {
        Self {
            name: name.into(),
            initial: InitialChoice::ProductExcited,
            params: ModelParams::default(),
            noise: NoiseSpec {
                kind: NoiseKind::AmplitudeDamping,
                k: 0.5,
            },
            optimizer: OptimizerConfig::default(),
            readout: ReadoutOrder::default(),
            entangler_t: None,
            axes,
            series,
        }
    }

    /// S^P for each noise and S^NP1 against `k` at `t = 0.15`.
    pub fn fig1() -> Self {
        use NoiseKind::*;
        Self::base(
            "fig1",
            vec![Grid::linspace(Axis::K, 0.0, 1.0, 101)],
            vec![
                Series::new(Measurement::Povm, Some(BitFlip)),
                Series::new(Measurement::Povm, Some(AmplitudeDamping)),
                Series::new(Measurement::Povm, Some(Dephasing)),
                Series::new(Measurement::Npovm1, None),
            ],
        )
    }

    /// GHZ-class start, amplitude damping: S^P against S^NP2 over `(k, l)`.
    pub fn fig2() -> Self {
        let mut s = Self::base(
            "fig2",
            vec![
                Grid::linspace(Axis::K, 0.0, 1.0, 101),
                Grid::linspace(Axis::L, -1.0, 1.0, 81),
            ],
            vec![Series::new(Measurement::Povm, None), Series::new(Measurement::Npovm2, None)],
        );
        s.initial = InitialChoice::Ghz { l: 0.0 };
        s
    }

    /// S^P and S^NP1 against interaction time at `k = 0.5`.
    pub fn fig3() -> Self {
        Self::base(
            "fig3",
            vec![Grid::linspace(Axis::T, 0.0, 3.0, 301)],
            vec![Series::new(Measurement::Povm, None), Series::new(Measurement::Npovm1, None)],
        )
    }

    /// Accessible energies for both families and all three noises.
    pub fn accessible() -> Self {
        let mut series = Vec::new();
        for m in [Measurement::AccessiblePovm, Measurement::AccessibleNpovm1] {
            for n in [NoiseKind::BitFlip, NoiseKind::AmplitudeDamping, NoiseKind::Dephasing] {
                series.push(Series::new(m, Some(n)));
            }
        }
        Self::base("accessible", vec![Grid::linspace(Axis::K, 0.0, 1.0, 101)], series)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.optimizer.validate()?;
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(QbattError::Scenario("a sweep needs one or two axes".into()));
        }
        for (i, g) in self.axes.iter().enumerate() {
            if g.values.is_empty() {
                return Err(QbattError::Scenario(format!("axis {} has an empty grid", g.axis)));
            }
            if !g.values.windows(2).all(|w| w[0] < w[1]) {
                return Err(QbattError::Scenario(format!("axis {} is not increasing", g.axis)));
            }
            if self.axes[..i].iter().any(|o| o.axis == g.axis) {
                return Err(QbattError::Scenario(format!("axis {} repeated", g.axis)));
            }
            let ok = match g.axis {
                Axis::K => g.values.iter().all(|k| (0.0..=1.0).contains(k)),
                Axis::L => g.values.iter().all(|l| l.abs() <= 1.0),
                Axis::T => g.values.iter().all(|t| t.is_finite()),
            };
            if !ok {
                return Err(QbattError::Scenario(format!("axis {} grid out of range", g.axis)));
            }
            if g.axis == Axis::L && self.initial == InitialChoice::ProductExcited {
                return Err(QbattError::Scenario("the l axis needs a GHZ initial state".into()));
            }
        }
        if self.series.is_empty() {
            return Err(QbattError::Scenario("no series selected".into()));
        }
        for s in &self.series {
            if s.measurement == Measurement::Npovm2 && self.initial == InitialChoice::ProductExcited {
                return Err(QbattError::Scenario("npovm2 needs the GHZ initial state".into()));
            }
        }
        Ok(())
    }

    fn points(&self) -> Vec<Vec<f64>> {
        let mut pts: Vec<Vec<f64>> = vec![vec![]];
        for g in &self.axes {
            pts = pts
                .into_iter()
                .flat_map(|p| {
                    g.values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        pts
    }

    /// Evaluates every grid point. Rows are ordered by grid index.
    pub fn run(&self) -> Result<SweepResult> {
        self.validate()?;
        let per_point: Vec<Vec<Row>> = self
            .points()
            .par_iter()
            .map(|p| self.evaluate_point(p))
            .collect::<Result<_>>()?;
        let rows: Vec<Row> = per_point.into_iter().flatten().collect();
        Ok(SweepResult {
            name: self.name.clone(),
            axes: self.axes.clone(),
            series: self.series.iter().map(Series::label).collect(),
            rows,
            metadata: self.metadata(),
        })
    }

    fn metadata(&self) -> Vec<(String, String)> {
        let grids: Vec<String> = self.axes.iter().map(Grid::describe).collect();
        vec![
            ("scenario".into(), self.name.clone()),
            ("version".into(), env!("CARGO_PKG_VERSION").into()),
            ("seed".into(), self.optimizer.seed.to_string()),
            ("grids".into(), grids.join("; ")),
            (
                "initial".into(),
                serde_json::to_string(&self.initial).unwrap_or_default(),
            ),
            ("params".into(), serde_json::to_string(&self.params).unwrap_or_default()),
            ("noise".into(), serde_json::to_string(&self.noise).unwrap_or_default()),
            (
                "optimizer".into(),
                serde_json::to_string(&self.optimizer).unwrap_or_default(),
            ),
            (
                "readout".into(),
                serde_json::to_string(&self.readout).unwrap_or_default(),
            ),
            (
                "entangler_t".into(),
                self.entangler_t.map(|t| t.to_string()).unwrap_or_else(|| "t".into()),
            ),
        ]
    }

    fn evaluate_point(&self, point: &[f64]) -> Result<Vec<Row>> {
        let mut params = self.params;
        let mut k = self.noise.k;
        let mut l = match self.initial {
            InitialChoice::Ghz { l } => Some(l),
            InitialChoice::ProductExcited => None,
        };
        for (g, &v) in self.axes.iter().zip(point) {
            match g.axis {
                Axis::K => k = v,
                Axis::L => l = Some(v),
                Axis::T => params.t = v,
            }
        }
        let mut rows = Vec::with_capacity(self.series.len());
        let mut cache: Vec<((NoiseKind, Option<usize>), EvolvedSystem)> = Vec::new();
        for s in &self.series {
            let kind = s.noise.unwrap_or(self.noise.kind);
            let initial = match l {
                None => InitialState::ProductExcited,
                Some(l) => {
                    let n = if s.measurement == Measurement::Npovm2 { 4 } else { 3 };
                    InitialState::Ghz(GhzSpec::new(n, l)?)
                }
            };
            let key = (kind, if let InitialState::Ghz(g) = initial { Some(g.n) } else { None });
            let idx = match cache.iter().position(|(c, _)| *c == key) {
                Some(i) => i,
                None => {
                    let scenario = Scenario {
                        initial,
                        params,
                        noise: NoiseSpec::new(kind, k)?,
                        measurement: s.measurement,
                    };
                    cache.push((key, evolve(&scenario)?));
                    cache.len() - 1
                }
            };
            let sys = &cache[idx].1;
            rows.push(self.evaluate_series(sys, s, &params, k, l)?);
        }
        fill_gaps(&mut rows, &self.series);
        Ok(rows)
    }

    fn evaluate_series(&self, sys: &EvolvedSystem, s: &Series, params: &ModelParams, k: f64, l: Option<f64>) -> Result<Row> {
        let family = s.measurement.family();
        let ext = sys.extract(family)?;
        let mut row = Row {
            k,
            l,
            t: params.t,
            family: s.label(),
            s_max: ext.s_max,
            s_acc: None,
            p: Some(ext.outcome.p),
            delta_e: ext.outcome.delta_e,
            gap: None,
            converged: true,
        };
        if s.measurement.is_accessible() {
            let b = sys.b_operator(family)?;
            let probe = self.probe(family, params)?;
            let acc = accessible_energy(&b, &probe, &self.optimizer)?;
            let outcome = sys.stochastic_energy(family, &acc.projector)?;
            row.s_acc = Some(acc.s_acc);
            row.p = Some(outcome.p);
            row.delta_e = outcome.delta_e;
            row.converged = acc.converged;
        }
        Ok(row)
    }

    /// Readout for the restricted family: the coupling Hamiltonian of the
    /// measured pair run for `entangler_t` (or `t`).
    pub fn probe(&self, family: Family, params: &ModelParams) -> Result<Probe> {
        let t = self.entangler_t.unwrap_or(params.t);
        let h = match family {
            Family::Povm => coupling_hamiltonian(params.h_a, params.h_x, params.j_ax, (Subsystem::A, Subsystem::X)),
            Family::Npovm1 => coupling_hamiltonian(params.h_a, params.h_e, params.j_ae, (Subsystem::A, Subsystem::E)),
            Family::Npovm2 => {
                return Err(QbattError::Scenario(
                    "accessible energy is defined for povm and npovm1 only".into(),
                ))
            }
        };
        let w = unitary_from_hamiltonian(&h, t)?;
        Probe::for_order(self.readout, &w)
    }
}

/// On positive-measurement rows, `gap` is the matching non-positive value
/// minus this row's value (same noise when that series exists).
fn fill_gaps(rows: &mut [Row], series: &[Series]) {
    let partner = |i: usize| -> Option<usize> {
        let s = series[i];
        let wanted: &[Measurement] = match s.measurement {
            Measurement::Povm => &[Measurement::Npovm1, Measurement::Npovm2],
            Measurement::AccessiblePovm => &[Measurement::AccessibleNpovm1],
            _ => return None,
        };
        let same_noise = series
            .iter()
            .position(|o| wanted.contains(&o.measurement) && o.noise == s.noise);
        same_noise.or_else(|| series.iter().position(|o| wanted.contains(&o.measurement) && o.noise.is_none()))
    };
    for i in 0..rows.len() {
        if let Some(j) = partner(i) {
            rows[i].gap = Some(rows[j].value() - rows[i].value());
        }
    }
}

pub fn run_fig1() -> Result<SweepResult> {
    Sweep::fig1().run()
}

pub fn run_fig2() -> Result<SweepResult> {
    Sweep::fig2().run()
}

pub fn run_fig3_appendix() -> Result<SweepResult> {
    Sweep::fig3().run()
}

pub fn run_fig_accessible() -> Result<SweepResult> {
    Sweep::accessible().run()
}

#[derive(Clone, Debug)]
pub struct SpectraPoint {
    pub k: f64,
    pub report: SpectraReport,
    /// Rank of `ρ_AE²` (eigenvalues above 1e-9).
    pub rank_ae: usize,
}

#[derive(Clone, Debug)]
pub struct AppendixDReport {
    pub params: ModelParams,
    pub noise: NoiseKind,
    pub points: Vec<SpectraPoint>,
}

impl AppendixDReport {
    pub fn to_sweep_result(&self) -> SweepResult {
        let rows = self
            .points
            .iter()
            .map(|p| Row {
                k: p.k,
                l: None,
                t: self.params.t,
                family: "spectra[ae-vs-ax]".into(),
                s_max: f64::NAN,
                s_acc: None,
                p: None,
                delta_e: None,
                gap: Some(p.report.max_gap),
                converged: true,
            })
            .collect();
        SweepResult {
            name: "appendixD".into(),
            axes: vec![Grid {
                axis: Axis::K,
                values: self.points.iter().map(|p| p.k).collect(),
            }],
            series: vec!["spectra[ae-vs-ax]".into()],
            rows,
            metadata: vec![
                ("scenario".into(), "appendixD".into()),
                ("version".into(), env!("CARGO_PKG_VERSION").into()),
                ("noise".into(), self.noise.to_string()),
                ("params".into(), serde_json::to_string(&self.params).unwrap_or_default()),
                ("gap".into(), "max |eig(rho_AE) - eig(rho_A x rho_X)|".into()),
            ],
        }
    }
}

/// Spectrum comparison of `ρ_AE²` and `ρ_A² ⊗ ρ_X` along a `k` grid.
pub fn run_appendix_d(ks: &[f64], noise: NoiseKind, params: ModelParams) -> Result<AppendixDReport> {
    let points = ks
        .par_iter()
        .map(|&k| {
            let sys = evolve(&Scenario {
                initial: InitialState::ProductExcited,
                params,
                noise: NoiseSpec::new(noise, k)?,
                measurement: Measurement::Npovm1,
            })?;
            let (ae, ax) = sys.measured_pair_states()?;
            let report = spectra_compare(&ae, &ax)?;
            let rank_ae = report.first.iter().filter(|v| v.abs() > 1e-9).count();
            Ok(SpectraPoint { k, report, rank_ae })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AppendixDReport { params, noise, points })
}

/// Spectrum comparison on `k = 0, 0.1, …, 1` with amplitude damping.
pub fn run_appendix_d_default() -> Result<AppendixDReport> {
    run_appendix_d(&linspace(0.0, 1.0, 11), NoiseKind::AmplitudeDamping, ModelParams::default())
}
