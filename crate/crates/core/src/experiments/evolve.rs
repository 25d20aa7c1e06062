//! Single nonlinear evolutions with stored trajectories.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::RunDir;
use crate::error::{domain, Error, Result};
use crate::exponents::{classify_regime, Regime, RegimeParams};
use crate::radial::least_squares;
use crate::solver::{run_observed, RunResult, SolverConfig, State, Status};
use crate::spectral::{make_initial_data, read_spectrum, write_spectrum, GridSpec, InitialData, SpectrumField};

pub const INITIAL_FILE: &str = "initial.bin";
pub const SNAPSHOT_FILE: &str = "snapshots.bin";
pub const META_FILE: &str = "meta.json";

/// Default `(N, L)` per grid dimension.
pub fn default_grid(dim: usize) -> (usize, f64) {
    match dim {
        1 => (16384, 800.0 * PI),
        2 => (1024, 200.0 * PI),
        _ => (128, 50.0 * PI),
    }
}

fn default_theta() -> f64 {
    1e8
}
fn default_growth() -> f64 {
    2.0
}
fn default_dt_min_ratio() -> f64 {
    1e-10
}
fn default_samples() -> usize {
    64
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct EvolveConfig {
    pub dim: usize,
    #[serde(rename = "N", default)]
    pub points: Option<usize>,
    #[serde(rename = "L", default)]
    pub length: Option<f64>,
    pub p: f64,
    pub eps: f64,
    pub gamma: f64,
    pub s: f64,
    pub dt: f64,
    pub tend: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_growth")]
    pub growth_factor: f64,
    #[serde(default = "default_dt_min_ratio")]
    pub dt_min_ratio: f64,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Profile used for both `u0` and `u1`; `PaperProfile` with
    /// amplitude 1 and the run's `gamma` when absent.
    #[serde(default)]
    pub data: Option<InitialData>,
    #[serde(default = "default_true")]
    pub nonlinear: bool,
    #[serde(default)]
    pub seed: u64,
}

impl EvolveConfig {
    pub fn new(dim: usize, p: f64, eps: f64, gamma: f64, s: f64, dt: f64, tend: f64) -> Self {
        Self {
            dim,
            points: None,
            length: None,
            p,
            eps,
            gamma,
            s,
            dt,
            tend,
            theta: default_theta(),
            growth_factor: default_growth(),
            dt_min_ratio: default_dt_min_ratio(),
            dealias: true,
            samples: default_samples(),
            data: None,
            nonlinear: true,
            seed: 0,
        }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let (n, l) = default_grid(self.dim);
        GridSpec::new(self.dim, self.length.unwrap_or(l), self.points.unwrap_or(n))
    }

    pub fn initial_data(&self) -> InitialData {
        self.data.unwrap_or(InitialData::PaperProfile {
            eps1: 1.0,
            gamma: self.gamma,
        })
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            p: self.p,
            eps: self.eps,
            dt: self.dt,
            t_end: self.tend,
            dealias: self.dealias,
            theta: self.theta,
            growth_factor: self.growth_factor,
            dt_min_ratio: self.dt_min_ratio,
            samples: self.samples,
            nonlinear: self.nonlinear,
        }
    }

    pub fn params(&self) -> RegimeParams {
        RegimeParams::new(self.dim as f64, self.gamma, self.s, self.p).with_eps(self.eps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveReport {
    pub config: EvolveConfig,
    pub grid: GridSpec,
    pub regime: Option<Regime>,
    pub status: Status,
    pub blow_up_time: Option<f64>,
    pub weighted_sup: f64,
    pub steps: usize,
    pub rejected: usize,
    #[serde(skip)]
    pub result: Option<RunResult>,
}

fn write_snapshot<W: Write>(w: &mut W, t: f64, field: &SpectrumField) -> Result<()> {
    w.write_all(&t.to_le_bytes())?;
    write_spectrum(&mut *w, field)
}

/// Run one evolution; with a directory, store `meta.json`, `curves.csv`,
/// the initial state and one displacement snapshot per history sample.
pub fn run_evolve(config: &EvolveConfig, dir: Option<&RunDir>) -> Result<EvolveReport> {
    let started = Instant::now();
    let grid = config.grid()?;
    let solver = config.solver();
    solver.validate()?;
    if !(config.gamma > 0.0 && config.s >= 0.0) {
        return domain("gamma must be positive and s nonnegative");
    }
    let profile = make_initial_data(&config.initial_data(), &grid)?;

    let mut snapshots = match dir {
        Some(d) => {
            let transform = crate::spectral::Transform::new(grid);
            let init = State::from_physical(&transform, &profile, &profile, config.eps)?;
            let mut w = BufWriter::new(File::create(d.file(INITIAL_FILE))?);
            write_spectrum(&mut w, &init.u_hat)?;
            write_spectrum(&mut w, &init.ut_hat)?;
            w.flush()?;
            Some(BufWriter::new(File::create(d.file(SNAPSHOT_FILE))?))
        }
        None => None,
    };
    let mut observer = |state: &State| -> Result<()> {
        if let Some(w) = snapshots.as_mut() {
            write_snapshot(w, state.t, &state.u_hat)?;
        }
        Ok(())
    };
    let result = run_observed(
        &solver,
        &profile,
        &profile,
        &grid,
        config.s,
        config.gamma,
        Some(&mut observer),
    )?;
    if let Some(mut w) = snapshots {
        w.flush()?;
    }

    let report = EvolveReport {
        config: config.clone(),
        grid,
        regime: classify_regime(&config.params()).ok().map(|v| v.regime),
        status: result.status,
        blow_up_time: result.status.lifespan(),
        weighted_sup: result.weighted_sup,
        steps: result.steps,
        rejected: result.rejected,
        result: Some(result),
    };
    if let Some(d) = dir {
        d.write_json("config.json", config)?;
        d.write_text("curves.csv", &report.result.as_ref().expect("set above").history_csv())?;
        d.write_json(META_FILE, &report)?;
        d.write_timing(started.elapsed().as_secs_f64())?;
    }
    Ok(report)
}

/// Initial displacement and velocity stored by [`run_evolve`].
pub fn read_initial(dir: &Path) -> Result<(SpectrumField, SpectrumField)> {
    let mut r = BufReader::new(File::open(dir.join(INITIAL_FILE))?);
    let u = read_spectrum(&mut r)?;
    let ut = read_spectrum(&mut r)?;
    Ok((u, ut))
}

/// All `(t, û)` snapshots stored by [`run_evolve`].
pub fn read_snapshots(dir: &Path) -> Result<Vec<(f64, SpectrumField)>> {
    let mut r = BufReader::new(File::open(dir.join(SNAPSHOT_FILE))?);
    let mut out = Vec::new();
    loop {
        let mut word = [0u8; 8];
        match r.read_exact(&mut word) {
            Ok(()) => {}
            Err(e) if e.kind() == ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        }
        let t = f64::from_le_bytes(word);
        out.push((t, read_spectrum(&mut r)?));
    }
    Ok(out)
}

pub fn read_meta(dir: &Path) -> Result<EvolveReport> {
    let file = File::open(dir.join(META_FILE))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

/// Fitted decay rates of a nonlinear run against its linear counterpart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateComparison {
    pub window: (f64, f64),
    pub l2_slope: f64,
    pub hs_slope: f64,
    pub linear_l2_slope: f64,
    pub linear_hs_slope: f64,
    pub predicted_l2: f64,
    pub predicted_hs: f64,
    /// Largest slope difference to the linear run.
    pub max_deviation: f64,
    pub within_linear: bool,
    pub within_prediction: bool,
}

fn history_slope(result: &RunResult, window: (f64, f64), pick: impl Fn(&crate::solver::HistoryRow) -> f64) -> Result<f64> {
    let rows: Vec<_> = result
        .history
        .iter()
        .filter(|r| r.t >= window.0 && r.t <= window.1)
        .collect();
    if rows.len() < 8 {
        return domain(format!(
            "rate window [{}, {}] holds {} history samples, need 8",
            window.0,
            window.1,
            rows.len()
        ));
    }
    if rows.iter().any(|r| !(pick(r) > 0.0)) {
        return Err(Error::InsufficientData("nonpositive norm inside the rate window".into()));
    }
    let x: Vec<f64> = rows.iter().map(|r| r.t.ln_1p()).collect();
    let y: Vec<f64> = rows.iter().map(|r| pick(r).ln()).collect();
    Ok(least_squares(&x, &y).0)
}

/// Compare `L²` and `Ḣ^s` rates of `nonlinear` and `linear` histories.
pub fn compare_rates(
    nonlinear: &RunResult,
    linear: &RunResult,
    s: f64,
    gamma: f64,
    window: (f64, f64),
    slack: f64,
) -> Result<RateComparison> {
    let l2 = history_slope(nonlinear, window, |r| r.l2)?;
    let hs = history_slope(nonlinear, window, |r| r.hs)?;
    let ll2 = history_slope(linear, window, |r| r.l2)?;
    let lhs = history_slope(linear, window, |r| r.hs)?;
    let (pl2, phs) = (-gamma / 2.0, -(s + gamma) / 2.0);
    let dev = (l2 - ll2).abs().max((hs - lhs).abs());
    Ok(RateComparison {
        window,
        l2_slope: l2,
        hs_slope: hs,
        linear_l2_slope: ll2,
        linear_hs_slope: lhs,
        predicted_l2: pl2,
        predicted_hs: phs,
        max_deviation: dev,
        within_linear: dev <= slack,
        within_prediction: l2 <= pl2 + slack && hs <= phs + slack,
    })
}
