//! Lifespan scaling sweeps `T(ε)`.

use serde::{Deserialize, Serialize};

use super::evolve::default_grid;
use super::in_pool;
use crate::error::{domain, Error, Result};
use crate::exponents::{lifespan_exponent, p_crit, sharp_lifespan_admissible, Admissibility, RegimeParams};
use crate::radial::least_squares;
use crate::solver::{run, SolverConfig, Status};
use crate::spectral::{make_initial_data, GridSpec, InitialData};

/// Fewest blow-up rows accepted for a fit.
pub const MIN_FIT_ROWS: usize = 4;

fn default_s() -> f64 {
    1.0
}
fn default_factor() -> f64 {
    // 8 points per decade
    10f64.powf(-1.0 / 8.0)
}
fn default_count() -> usize {
    8
}
fn default_dt() -> f64 {
    0.25
}
fn default_tend() -> f64 {
    1e5
}
fn default_theta() -> f64 {
    1e8
}
fn default_growth() -> f64 {
    2.0
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SweepConfig {
    pub dim: usize,
    pub gamma: f64,
    #[serde(default = "default_s")]
    pub s: f64,
    pub p: f64,
    pub eps_start: f64,
    #[serde(default = "default_factor")]
    pub eps_factor: f64,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(rename = "N", default)]
    pub points: Option<usize>,
    #[serde(rename = "L", default)]
    pub length: Option<f64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_tend")]
    pub tend: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// Second threshold for the robustness rerun of every blow-up row.
    #[serde(default)]
    pub theta_check: Option<f64>,
    #[serde(default = "default_growth")]
    pub growth_factor: f64,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default)]
    pub data: Option<InitialData>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl SweepConfig {
    pub fn new(dim: usize, gamma: f64, p: f64, eps_start: f64) -> Self {
        Self {
            dim,
            gamma,
            s: default_s(),
            p,
            eps_start,
            eps_factor: default_factor(),
            count: default_count(),
            points: None,
            length: None,
            dt: default_dt(),
            tend: default_tend(),
            theta: default_theta(),
            theta_check: None,
            growth_factor: default_growth(),
            dealias: true,
            data: None,
            workers: None,
            seed: 0,
        }
    }

    pub fn schedule(&self) -> Vec<f64> {
        (0..self.count)
            .map(|k| self.eps_start * self.eps_factor.powi(k as i32))
            .collect()
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let (n, l) = default_grid(self.dim);
        GridSpec::new(self.dim, self.length.unwrap_or(l), self.points.unwrap_or(n))
    }

    fn solver(&self, theta: f64) -> SolverConfig {
        SolverConfig {
            theta,
            growth_factor: self.growth_factor,
            dealias: self.dealias,
            ..SolverConfig::new(self.p, self.eps_start, self.dt, self.tend)
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps_start > 0.0) {
            return domain(format!("eps-start must be positive, got {}", self.eps_start));
        }
        if !(self.eps_factor > 0.0 && self.eps_factor != 1.0 && self.eps_factor.is_finite()) {
            return domain(format!("eps-factor must be positive and != 1, got {}", self.eps_factor));
        }
        if self.count < 2 {
            return domain(format!("a sweep needs at least 2 points, got {}", self.count));
        }
        if !(self.gamma > 0.0) {
            return domain(format!("gamma must be positive, got {}", self.gamma));
        }
        if let Some(t) = self.theta_check {
            if !(t > 1.0) {
                return domain(format!("theta-check must exceed 1, got {t}"));
            }
        }
        self.solver(self.theta).validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    /// `None` when the run reached the horizon.
    pub lifespan: Option<f64>,
    pub status: Status,
    /// Lifespan under `theta_check`, when requested.
    pub lifespan_check: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub rows: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVerdict {
    Fitted,
    GlobalExistenceConsistent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub verdict: SweepVerdict,
    pub fit: Option<SweepFit>,
    pub predicted_slope: Option<f64>,
    pub relative_deviation: Option<f64>,
    /// Adjacent pairs where a larger `ε` lives longer.
    pub monotone_violations: usize,
    /// Largest relative lifespan change under `theta_check`.
    pub theta_shift: Option<f64>,
    pub admissibility: Admissibility,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,lifespan,status,lifespan_check\n");
        let fmt = |v: Option<f64>| v.map_or_else(|| "inf".to_string(), |t| format!("{t:e}"));
        for r in &self.rows {
            out.push_str(&format!(
                "{:e},{},{},{}\n",
                r.eps,
                fmt(r.lifespan),
                r.status.name(),
                r.lifespan_check.map_or_else(String::new, |t| format!("{t:e}"))
            ));
        }
        out
    }
}

/// Least-squares slope of `log T` against `log ε`.
pub fn fit_sweep(eps: &[f64], lifespans: &[f64]) -> Result<SweepFit> {
    if eps.len() != lifespans.len() {
        return Err(Error::Contract("eps and lifespan columns differ in length".into()));
    }
    if eps.len() < MIN_FIT_ROWS {
        return Err(Error::InsufficientData(format!(
            "{} blow-up rows, need at least {MIN_FIT_ROWS}",
            eps.len()
        )));
    }
    if eps.iter().chain(lifespans).any(|v| !(*v > 0.0 && v.is_finite())) {
        return domain("sweep fit needs positive finite eps and lifespans");
    }
    let x: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = lifespans.iter().map(|t| t.ln()).collect();
    let (slope, intercept, residual) = least_squares(&x, &y);
    Ok(SweepFit {
        slope,
        intercept,
        residual,
        rows: eps.len(),
    })
}

/// Count pairs that break `T` nonincreasing in `ε`; a finite lifespan never
/// exceeds an infinite one.
pub fn monotone_violations(rows: &[SweepRow]) -> usize {
    let mut sorted: Vec<&SweepRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    let t = |r: &SweepRow| r.lifespan.unwrap_or(f64::INFINITY);
    sorted.windows(2).filter(|w| t(w[1]) > t(w[0])).count()
}

/// Measure `T(ε)` over the schedule and fit the power law.
pub fn run_lifespan_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let grid = config.grid()?;
    let n = config.dim as f64;
    let data = config.data.unwrap_or(InitialData::PaperProfile {
        eps1: 1.0,
        gamma: config.gamma,
    });
    let profile = make_initial_data(&data, &grid)?;
    let params = RegimeParams::new(n, config.gamma, config.s, config.p);
    let admissibility = sharp_lifespan_admissible(&params);
    let subcritical = config.p < p_crit(n, config.gamma)?;

    let lifespan_at = |eps: f64, theta: f64| -> Result<Status> {
        let cfg = SolverConfig {
            eps,
            ..config.solver(theta)
        };
        Ok(run(&cfg, &profile, &profile, &grid, 0.0, 0.0)?.status)
    };
    let schedule = config.schedule();
    let rows = in_pool(config.workers, &schedule, |&eps| {
        let status = lifespan_at(eps, config.theta)?;
        let check = match (status.lifespan(), config.theta_check) {
            (Some(_), Some(theta)) => lifespan_at(eps, theta)?.lifespan(),
            _ => None,
        };
        Ok(SweepRow {
            eps,
            lifespan: status.lifespan(),
            status,
            lifespan_check: check,
        })
    })?;

    let theta_shift = config.theta_check.map(|_| {
        rows.iter()
            .filter_map(|r| Some((r.lifespan?, r.lifespan_check?)))
            .map(|(a, b)| ((b - a) / a).abs())
            .fold(0.0, f64::max)
    });
    let violations = monotone_violations(&rows);
    let (eps, times): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| Some((r.eps, r.lifespan?)))
        .unzip();
    let predicted = if subcritical {
        lifespan_exponent(config.p, n, config.gamma).ok()
    } else {
        None
    };

    if eps.is_empty() && !subcritical {
        return Ok(SweepResult {
            rows,
            verdict: SweepVerdict::GlobalExistenceConsistent,
            fit: None,
            predicted_slope: None,
            relative_deviation: None,
            monotone_violations: violations,
            theta_shift,
            admissibility,
        });
    }
    let fit = fit_sweep(&eps, &times)?;
    let deviation = predicted.map(|p| ((fit.slope - p) / p).abs());
    Ok(SweepResult {
        rows,
        verdict: SweepVerdict::Fitted,
        fit: Some(fit),
        predicted_slope: predicted,
        relative_deviation: deviation,
        monotone_violations: violations,
        theta_shift,
        admissibility,
    })
}
