//! Time integration of `u_tt - Δu + u_t = |u|^p` on a periodic grid.
//!
//! Each step propagates the linear part exactly with the propagator matrix and
//! treats the Duhamel integral of the source with an explicit
//! predictor/trapezoid corrector. Because `K̂1(0) = 0` the displacement row
//! needs only the source at the start of the step.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::propagator::{propagator_unchecked, PropagatorMatrix};
use crate::spectral::{GridSpec, SpectrumField, Transform};

/// Number of propagator tables kept per run.
const PROPAGATOR_CACHE: usize = 8;

/// Step-size control only watches amplitudes above this level.
const GROWTH_FLOOR: f64 = 1.0;

fn default_true() -> bool {
    true
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

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub p: f64,
    pub eps: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_growth")]
    pub growth_factor: f64,
    #[serde(default = "default_dt_min_ratio")]
    pub dt_min_ratio: f64,
    /// Minimum number of geometric history samples.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Switch the source term off to obtain the linear flow.
    #[serde(default = "default_true")]
    pub nonlinear: bool,
}

impl SolverConfig {
    pub fn new(p: f64, eps: f64, dt: f64, t_end: f64) -> Self {
        Self {
            p,
            eps,
            dt,
            t_end,
            dealias: true,
            theta: default_theta(),
            growth_factor: default_growth(),
            dt_min_ratio: default_dt_min_ratio(),
            samples: default_samples(),
            nonlinear: true,
        }
    }

    pub fn linear(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return domain(format!("exponent p must be > 1, got {}", self.p));
        }
        // eps = 0 is admitted: it is the zero-forcing reference run
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return domain(format!("data size eps must be >= 0, got {}", self.eps));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return domain(format!("time step must be positive, got {}", self.dt));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return domain(format!("horizon must be positive, got {}", self.t_end));
        }
        if !(self.theta > 1.0) {
            return domain(format!("blow-up threshold must exceed 1, got {}", self.theta));
        }
        if !(self.growth_factor > 1.0) {
            return domain(format!("growth factor must exceed 1, got {}", self.growth_factor));
        }
        if !(self.dt_min_ratio > 0.0 && self.dt_min_ratio < 1.0) {
            return domain(format!("dt_min_ratio must lie in (0, 1), got {}", self.dt_min_ratio));
        }
        if self.samples < 64 {
            return domain(format!("at least 64 history samples are required, got {}", self.samples));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub u_hat: SpectrumField,
    pub ut_hat: SpectrumField,
    pub t: f64,
    pub diverged: bool,
}

impl State {
    /// Spectral state for physical data `(eps u0, eps u1)`.
    pub fn from_physical(transform: &Transform, u0: &[f64], u1: &[f64], eps: f64) -> Result<Self> {
        let scale = |f: &[f64]| f.iter().map(|x| eps * x).collect::<Vec<_>>();
        Ok(Self {
            u_hat: transform.forward(&scale(u0))?,
            ut_hat: transform.forward(&scale(u1))?,
            t: 0.0,
            diverged: false,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.u_hat.grid
    }

    pub fn is_finite(&self) -> bool {
        self.u_hat.is_finite() && self.ut_hat.is_finite()
    }
}

/// `½(‖u_t‖² + ‖∇u‖²)`.
pub fn energy(state: &State) -> f64 {
    let radial = state.grid().radial_wavenumbers();
    let sum: f64 = state
        .u_hat
        .coeffs
        .iter()
        .zip(&state.ut_hat.coeffs)
        .zip(radial)
        .map(|((u, ut), k)| ut.norm_sqr() + k * k * u.norm_sqr())
        .sum();
    0.5 * sum
}

/// Pointwise `|u|^p`; the flag reports non-finite input.
pub fn nonlinearity(u: &[f64], p: f64) -> (Vec<f64>, bool) {
    let diverged = u.iter().any(|x| !x.is_finite());
    let out = if p == 2.0 {
        u.iter().map(|x| x * x).collect()
    } else if p == 3.0 {
        u.iter().map(|x| x.abs() * x * x).collect()
    } else {
        u.iter().map(|x| x.abs().powf(p)).collect()
    };
    (out, diverged)
}

/// Per-run workspace: transform plans, wavenumbers, dealias mask and a small
/// propagator table cache.
pub struct Stepper {
    transform: Transform,
    radial: Vec<f64>,
    mask: Option<Vec<bool>>,
    p: f64,
    nonlinear: bool,
    cache: HashMap<u64, Vec<PropagatorMatrix>>,
    buf: Vec<Complex64>,
}

impl fmt::Debug for Stepper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Stepper")
            .field("grid", self.transform.grid())
            .field("p", &self.p)
            .finish()
    }
}

impl Stepper {
    pub fn new(grid: GridSpec, config: &SolverConfig) -> Self {
        Self::with_transform(Transform::new(grid), config)
    }

    pub fn with_transform(transform: Transform, config: &SolverConfig) -> Self {
        let grid = *transform.grid();
        Self {
            radial: grid.radial_wavenumbers(),
            mask: config.dealias.then(|| grid.dealias_mask()),
            transform,
            p: config.p,
            nonlinear: config.nonlinear,
            cache: HashMap::new(),
            buf: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    fn table(&mut self, h: f64) -> &[PropagatorMatrix] {
        let key = h.to_bits();
        if !self.cache.contains_key(&key) {
            if self.cache.len() >= PROPAGATOR_CACHE {
                self.cache.clear();
            }
            let table = self.radial.iter().map(|&r| propagator_unchecked(h, r)).collect();
            self.cache.insert(key, table);
        }
        &self.cache[&key]
    }

    /// Physical samples of the (dealiased) displacement.
    pub fn physical(&mut self, u_hat: &SpectrumField) -> Vec<f64> {
        self.buf.copy_from_slice(&u_hat.coeffs);
        if let Some(mask) = &self.mask {
            for (c, keep) in self.buf.iter_mut().zip(mask) {
                if !keep {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
        }
        self.transform.inverse_in_place(&mut self.buf);
        self.buf.iter().map(|c| c.re).collect()
    }

    /// Transformed and dealiased source; `None` when the input is not finite.
    fn source(&mut self, u: &[f64]) -> Option<Vec<Complex64>> {
        let (values, diverged) = nonlinearity(u, self.p);
        if diverged {
            return None;
        }
        let mut data: Vec<Complex64> = values.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        self.transform.forward_in_place(&mut data);
        if let Some(mask) = &self.mask {
            for (c, keep) in data.iter_mut().zip(mask) {
                if !keep {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
        }
        Some(data)
    }

    /// One step of length `h` given the physical displacement `u` at the
    /// start of the step. Returns the new state and its physical displacement.
    pub fn advance(&mut self, state: &State, u: &[f64], h: f64) -> (State, Vec<f64>) {
        let grid = *state.grid();
        let diverged = |t| {
            (
                State {
                    u_hat: state.u_hat.clone(),
                    ut_hat: state.ut_hat.clone(),
                    t,
                    diverged: true,
                },
                Vec::new(),
            )
        };
        let n0 = if self.nonlinear {
            match self.source(u) {
                Some(n) => Some(n),
                None => return diverged(state.t),
            }
        } else {
            None
        };

        let table = self.table(h).to_vec();
        let len = grid.len();
        let mut lin_u = Vec::with_capacity(len);
        let mut lin_ut = Vec::with_capacity(len);
        for ((a, b), m) in state.u_hat.coeffs.iter().zip(&state.ut_hat.coeffs).zip(&table) {
            let (x, y) = m.apply(*a, *b);
            lin_u.push(x);
            lin_ut.push(y);
        }

        let (new_u, new_ut) = match n0 {
            None => (lin_u, lin_ut),
            Some(n0) => {
                let pred: Vec<Complex64> = lin_u
                    .iter()
                    .zip(&n0)
                    .zip(&table)
                    .map(|((l, n), m)| l + n * (h * m.k01))
                    .collect();
                let pred = SpectrumField { grid, coeffs: pred };
                let up = self.physical(&pred);
                let nh = match self.source(&up) {
                    Some(n) => n,
                    None => return diverged(state.t),
                };
                let half = 0.5 * h;
                let new_u = lin_u
                    .iter()
                    .zip(&n0)
                    .zip(&table)
                    .map(|((l, n), m)| l + n * (half * m.k01))
                    .collect();
                let new_ut = lin_ut
                    .iter()
                    .zip(n0.iter().zip(&nh))
                    .zip(&table)
                    .map(|((l, (a, b)), m)| l + (a * m.k11 + b) * half)
                    .collect();
                (new_u, new_ut)
            }
        };
        let next = State {
            u_hat: SpectrumField { grid, coeffs: new_u },
            ut_hat: SpectrumField { grid, coeffs: new_ut },
            t: state.t + h,
            diverged: false,
        };
        let u_next = self.physical(&next.u_hat);
        let finite = u_next.iter().all(|x| x.is_finite()) && next.is_finite();
        if !finite {
            return diverged(state.t);
        }
        (next, u_next)
    }
}

/// Single step with a one-off workspace.
pub fn step(state: &State, h: f64, config: &SolverConfig) -> Result<State> {
    if !(h > 0.0 && h.is_finite()) {
        return domain(format!("step must be positive, got {h}"));
    }
    if !state.is_finite() {
        return domain("cannot step a non-finite state");
    }
    let mut stepper = Stepper::new(*state.grid(), config);
    let u = stepper.physical(&state.u_hat);
    Ok(stepper.advance(state, &u, h).0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "time", rename_all = "snake_case")]
pub enum Status {
    Completed,
    BlowUp(f64),
    StepUnderflow(f64),
}

impl Status {
    /// Blow-up time for either failure mode.
    pub fn lifespan(&self) -> Option<f64> {
        match *self {
            Status::Completed => None,
            Status::BlowUp(t) | Status::StepUnderflow(t) => Some(t),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Status::Completed => "completed",
            Status::BlowUp(_) => "blow_up",
            Status::StepUnderflow(_) => "step_underflow",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub t: f64,
    pub l2: f64,
    pub hs: f64,
    /// `Ḣ^{-γ}` norm of the mean-removed field.
    pub hneg: f64,
    pub maxabs: f64,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub status: Status,
    pub history: Vec<HistoryRow>,
    pub weighted_sup: f64,
    pub steps: usize,
    pub rejected: usize,
}

impl RunResult {
    pub fn history_csv(&self) -> String {
        let mut out = String::from("t,l2,hs,hneg,maxabs,energy\n");
        for r in &self.history {
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e},{:e},{:e}\n",
                r.t, r.l2, r.hs, r.hneg, r.maxabs, r.energy
            ));
        }
        out
    }
}

/// History times: `0` followed by at least `count` geometric points ending at
/// `t_end`, with 16 points per decade when the span is wide.
pub fn sample_times(t_end: f64, count: usize) -> Vec<f64> {
    let t_lo = (t_end / 10.0).min(1.0);
    let decades = (t_end / t_lo).log10();
    let k = count.max((16.0 * decades).ceil() as usize);
    let mut out = vec![0.0];
    out.extend((0..k).map(|i| {
        if i + 1 == k {
            t_end
        } else {
            t_lo * (t_end / t_lo).powf(i as f64 / (k - 1) as f64)
        }
    }));
    out
}

/// Receives the state at every history sample.
pub trait Observer {
    fn sample(&mut self, state: &State) -> Result<()>;
}

impl<F: FnMut(&State) -> Result<()>> Observer for F {
    fn sample(&mut self, state: &State) -> Result<()> {
        self(state)
    }
}

fn record(state: &State, u: &[f64], s: f64, gamma: f64) -> HistoryRow {
    HistoryRow {
        t: state.t,
        l2: state.u_hat.l2_norm(),
        hs: state.u_hat.sobolev_norm_mean_removed(s),
        hneg: state.u_hat.sobolev_norm_mean_removed(-gamma),
        maxabs: u.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        energy: energy(state),
    }
}

fn weight(row: &HistoryRow, s: f64, gamma: f64) -> f64 {
    (1.0 + row.t).powf(gamma / 2.0) * row.l2 + (1.0 + row.t).powf((s + gamma) / 2.0) * row.hs
}

/// Evolve data `(eps u0, eps u1)` to `t_end` or blow-up.
pub fn run(
    config: &SolverConfig,
    u0: &[f64],
    u1: &[f64],
    grid: &GridSpec,
    s: f64,
    gamma: f64,
) -> Result<RunResult> {
    run_observed(config, u0, u1, grid, s, gamma, None)
}

pub fn run_observed(
    config: &SolverConfig,
    u0: &[f64],
    u1: &[f64],
    grid: &GridSpec,
    s: f64,
    gamma: f64,
    mut observer: Option<&mut dyn Observer>,
) -> Result<RunResult> {
    config.validate()?;
    if u0.len() != grid.len() || u1.len() != grid.len() {
        return Err(Error::Contract("initial data do not match the grid".into()));
    }
    if u0.iter().chain(u1).any(|x| !x.is_finite()) {
        return domain("initial data must be finite");
    }
    let mut stepper = Stepper::new(*grid, config);
    let mut state = State::from_physical(stepper.transform(), u0, u1, config.eps)?;
    let mut u = stepper.physical(&state.u_hat);

    let samples = sample_times(config.t_end, config.samples);
    let mut history = Vec::with_capacity(samples.len());
    let mut weighted_sup = 0.0f64;
    let row = record(&state, &u, s, gamma);
    weighted_sup = weighted_sup.max(weight(&row, s, gamma));
    history.push(row);
    if let Some(obs) = observer.as_deref_mut() {
        obs.sample(&state)?;
    }

    let h_min = config.dt * config.dt_min_ratio;
    let mut h = config.dt;
    let mut steps = 0usize;
    let mut rejected = 0usize;
    let mut max_u = history[0].maxabs;
    let mut next = 1usize;
    let status = loop {
        if max_u > config.theta {
            break Status::BlowUp(state.t);
        }
        if next == samples.len() {
            break Status::Completed;
        }
        if h < h_min {
            break Status::StepUnderflow(state.t);
        }
        let target = samples[next];
        let remaining = target - state.t;
        let lands = h >= remaining * (1.0 - 1e-12);
        let h_eff = if lands { remaining } else { h };

        let (mut cand, u_cand) = stepper.advance(&state, &u, h_eff);
        if cand.diverged {
            rejected += 1;
            h *= 0.5;
            continue;
        }
        let cand_max = u_cand.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if cand_max > GROWTH_FLOOR && cand_max > config.growth_factor * max_u.max(GROWTH_FLOOR) {
            rejected += 1;
            h *= 0.5;
            continue;
        }
        steps += 1;
        if lands {
            cand.t = target;
        }
        state = cand;
        u = u_cand;
        max_u = cand_max;
        if lands {
            let row = record(&state, &u, s, gamma);
            if max_u <= config.theta {
                weighted_sup = weighted_sup.max(weight(&row, s, gamma));
            }
            history.push(row);
            if let Some(obs) = observer.as_deref_mut() {
                obs.sample(&state)?;
            }
            next += 1;
        }
        if h < config.dt {
            h = (2.0 * h).min(config.dt);
        }
    };
    Ok(RunResult {
        status,
        history,
        weighted_sup,
        steps,
        rejected,
    })
}

/// Blow-up time of the run at size `eps`, or `f64::INFINITY` when the run
/// completes.
pub fn measure_lifespan(
    template: &SolverConfig,
    u0: &[f64],
    u1: &[f64],
    grid: &GridSpec,
    eps: f64,
) -> Result<f64> {
    let config = SolverConfig {
        eps,
        ..template.clone()
    };
    let result = run(&config, u0, u1, grid, 0.0, 0.0)?;
    Ok(result.status.lifespan().unwrap_or(f64::INFINITY))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::apply_linear;
    use crate::spectral::{make_initial_data, InitialData};

    fn grid() -> GridSpec {
        GridSpec::new(1, 40.0, 256).unwrap()
    }

    #[test]
    fn nonlinearity_examples() {
        let (v, d) = nonlinearity(&[-2.0; 4], 3.0);
        assert_eq!(v, vec![8.0; 4]);
        assert!(!d);
        assert_eq!(nonlinearity(&[0.0; 3], 1.7).0, vec![0.0; 3]);
        let u = [0.3, -1.7, 2.5e3, -4e-9];
        let (v, _) = nonlinearity(&u, 2.0);
        for (a, b) in u.iter().zip(v) {
            assert_eq!(a * a, b);
        }
        assert!(nonlinearity(&[f64::NAN], 2.0).1);
    }

    #[test]
    fn zero_data_step_is_linear() {
        let g = grid();
        let data = make_initial_data(&InitialData::Gaussian { amplitude: 1.0, width: 2.0 }, &g).unwrap();
        let t = Transform::new(g);
        let state = State::from_physical(&t, &data, &data, 1.0).unwrap();
        let cfg = SolverConfig::new(2.0, 0.0, 0.1, 1.0).linear();
        let next = step(&state, 0.3, &cfg).unwrap();
        let (lu, lut) = apply_linear(&state.u_hat, &state.ut_hat, 0.3).unwrap();
        for (a, b) in next.u_hat.coeffs.iter().zip(&lu.coeffs) {
            assert!((a - b).norm() < 1e-14);
        }
        for (a, b) in next.ut_hat.coeffs.iter().zip(&lut.coeffs) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_eps_completes() {
        let g = grid();
        let data = make_initial_data(&InitialData::Gaussian { amplitude: 1.0, width: 2.0 }, &g).unwrap();
        let cfg = SolverConfig::new(2.0, 0.0, 0.5, 5.0);
        let r = run(&cfg, &data, &data, &g, 1.0, 0.5).unwrap();
        assert_eq!(r.status, Status::Completed);
        assert!(r.history.iter().all(|h| h.l2 == 0.0));
        assert!(r.history.len() >= 65);
    }

    #[test]
    fn sample_times_are_geometric_and_land_on_horizon() {
        let s = sample_times(1000.0, 64);
        assert_eq!(s[0], 0.0);
        assert_eq!(*s.last().unwrap(), 1000.0);
        assert!(s.len() >= 65);
        assert!(s.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn invalid_configs() {
        let g = grid();
        let d = vec![0.0; g.len()];
        for cfg in [
            SolverConfig::new(1.0, 1.0, 0.1, 1.0),
            SolverConfig::new(2.0, -1.0, 0.1, 1.0),
            SolverConfig::new(2.0, 1.0, 0.0, 1.0),
            SolverConfig::new(2.0, 1.0, 0.1, 0.0),
            SolverConfig { theta: 1.0, ..SolverConfig::new(2.0, 1.0, 0.1, 1.0) },
        ] {
            assert!(matches!(run(&cfg, &d, &d, &g, 0.0, 0.0), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn large_data_blows_up() {
        let g = grid();
        let data = make_initial_data(&InitialData::Gaussian { amplitude: 1.0, width: 3.0 }, &g).unwrap();
        let cfg = SolverConfig::new(2.0, 5.0, 0.05, 50.0);
        let r = run(&cfg, &data, &data, &g, 0.0, 0.0).unwrap();
        let t = r.status.lifespan().expect("blow-up");
        assert!(t > 0.0 && t < 50.0);
    }
}
