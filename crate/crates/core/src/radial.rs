//! Linear experiments in arbitrary (real) dimension on radial spectral data.
//!
//! Norms are evaluated through radial Plancherel,
//! `||v||²_{Ḣ^s} = σ_{n-1} ∫ r^{2s+n-1} |v̂(r)|² dr`, on a log-uniform grid.
//! The integral is taken in `log r` with composite Simpson weights and an
//! analytic power-law continuation below the first node.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::propagator::{heat_multiplier, propagator_unchecked};

pub const DEFAULT_R_MIN: f64 = 1e-6;
pub const DEFAULT_R_MAX: f64 = 1e3;
pub const DEFAULT_POINTS: usize = 4096;

/// Default rate-fit window.
pub const DEFAULT_WINDOW: (f64, f64) = (1e2, 1e4);

/// Below this share of the total, an endpoint value is ignored.
const ENDPOINT_NEGLIGIBLE: f64 = 1e-14;

/// A log-uniform radial frequency grid `r_i = 10^(a + i (b - a)/(N - 1))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    r: Vec<f64>,
    log_step: f64,
}

impl RadialGrid {
    pub fn log_spaced(r_min: f64, r_max: f64, points: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
            return domain(format!("need 0 < r_min < r_max, got [{r_min}, {r_max}]"));
        }
        if points < 8 {
            return domain(format!("radial grid needs at least 8 points, got {points}"));
        }
        let (a, b) = (r_min.log10(), r_max.log10());
        let steps = (points - 1) as f64;
        // exact decades stay exact nodes: 10^(a + i (b - a)/steps)
        let r = (0..points)
            .map(|i| 10f64.powf(a + (b - a) * i as f64 / steps))
            .collect();
        Ok(Self {
            r,
            log_step: (b - a) / steps * std::f64::consts::LN_10,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.r
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Index of the node equal to `r` (relative tolerance 1e-12).
    pub fn node_index(&self, r: f64) -> Option<usize> {
        self.r
            .iter()
            .position(|&x| (x - r).abs() <= 1e-12 * r.abs().max(1e-300))
    }
}

impl Default for RadialGrid {
    fn default() -> Self {
        Self::log_spaced(DEFAULT_R_MIN, DEFAULT_R_MAX, DEFAULT_POINTS).expect("valid default grid")
    }
}

/// Sampled radial spectral function `r -> v̂(r)` in dimension `n`.
///
/// Profiles with compact support carry the number of nodes in their support;
/// the support edge is always a grid node and values beyond it are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    pub dim: f64,
    pub grid: RadialGrid,
    pub values: Vec<Complex64>,
    support_len: usize,
}

impl RadialProfile {
    pub fn from_values(dim: f64, grid: RadialGrid, values: Vec<Complex64>) -> Result<Self> {
        if !(dim >= 1.0 && dim.is_finite()) {
            return domain(format!("dimension must be >= 1, got {dim}"));
        }
        if values.len() != grid.len() {
            return Err(Error::Contract(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return domain("radial profile values must be finite");
        }
        let support_len = grid.len();
        Ok(Self {
            dim,
            grid,
            values,
            support_len,
        })
    }

    pub fn from_fn(dim: f64, grid: RadialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| Complex64::new(f(r), 0.0)).collect();
        Self::from_values(dim, grid, values)
    }

    /// `r^{-a}` on `(0, cutoff]`, zero beyond; `cutoff` must be a grid node.
    pub fn power_law(dim: f64, a: f64, cutoff: f64, grid: RadialGrid) -> Result<Self> {
        let edge = grid.node_index(cutoff).ok_or_else(|| {
            Error::Domain(format!("support edge {cutoff} is not a node of the radial grid"))
        })?;
        let mut p = Self::from_fn(dim, grid, |r| if r <= cutoff { r.powf(-a) } else { 0.0 })?;
        p.support_len = edge + 1;
        Ok(p)
    }

    /// `exp(-w r²)`.
    pub fn gaussian(dim: f64, w: f64, grid: RadialGrid) -> Result<Self> {
        if !(w > 0.0) {
            return domain(format!("gaussian width parameter must be positive, got {w}"));
        }
        Self::from_fn(dim, grid, |r| (-w * r * r).exp())
    }

    pub fn zeros_like(other: &Self) -> Self {
        Self {
            dim: other.dim,
            grid: other.grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); other.grid.len()],
            support_len: 0,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn support_len(&self) -> usize {
        self.support_len
    }

    fn check_pair(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.dim != other.dim {
            return Err(Error::Contract("radial profiles must share grid and dimension".into()));
        }
        Ok(())
    }

    /// Pointwise `a(r) self + b(r) other`.
    fn combine(&self, other: &Self, coef: impl Fn(f64) -> (f64, f64)) -> Self {
        let values = self
            .grid
            .nodes()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(&r, (x, y))| {
                let (a, b) = coef(r);
                x * a + y * b
            })
            .collect();
        Self {
            dim: self.dim,
            grid: self.grid.clone(),
            values,
            support_len: self.support_len.max(other.support_len),
        }
    }
}

/// Surface area of the unit sphere in `R^n`, `2 pi^{n/2} / Gamma(n/2)`.
pub fn sphere_area(n: f64) -> f64 {
    2.0 * PI.powf(n / 2.0) / statrs::function::gamma::gamma(n / 2.0)
}

/// `∫ F(u) du` over uniformly spaced samples, Simpson with a 3/8 tail.
fn simpson(f: &[f64], h: f64) -> f64 {
    let m = f.len();
    match m {
        0 | 1 => 0.0,
        2 => 0.5 * h * (f[0] + f[1]),
        3 => h / 3.0 * (f[0] + 4.0 * f[1] + f[2]),
        _ => {
            let intervals = m - 1;
            let (simpson_end, tail) = if intervals.is_multiple_of(2) {
                (m - 1, 0.0)
            } else {
                let k = m - 4;
                (k, 3.0 * h / 8.0 * (f[k] + 3.0 * f[k + 1] + 3.0 * f[k + 2] + f[k + 3]))
            };
            let mut acc = f[0] + f[simpson_end];
            for (i, v) in f.iter().enumerate().take(simpson_end).skip(1) {
                acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            h / 3.0 * acc + tail
        }
    }
}

/// Radial Sobolev norm `(σ_{n-1} ∫ r^{2s+n-1} |v̂|² dr)^{1/2}`.
pub fn norm_radial(profile: &RadialProfile, s: f64) -> Result<f64> {
    let nodes = profile.grid.nodes();
    let m = profile.support_len;
    if m == 0 {
        return Ok(0.0);
    }
    let expo = 2.0 * s + profile.dim;
    // integrand against d(log r)
    let f: Vec<f64> = nodes[..m]
        .iter()
        .zip(&profile.values[..m])
        .map(|(&r, v)| r.powf(expo) * v.norm_sqr())
        .collect();
    let h = profile.grid.log_step;
    let mut total = simpson(&f, h);
    if !(total.is_finite()) {
        return Err(Error::Accuracy("radial integrand is not finite".into()));
    }

    // continuation below r_min: F(u) ~ F0 e^{κ (u - u0)} contributes F0/κ
    if m >= 2 && f[0] > ENDPOINT_NEGLIGIBLE * total {
        let kappa = (f[1] / f[0]).ln() / h;
        if !(kappa > 0.0) {
            return Err(Error::Accuracy(format!(
                "integrand r^(2s+n)|v|^2 grows toward r = 0 (log-slope {kappa:.3}); \
                 the norm of order {s} diverges"
            )));
        }
        total += f[0] / kappa;
    }
    // the open upper end must already have decayed
    if m == nodes.len() {
        let last = f[m - 1];
        if last > 1e-8 * total.max(f64::MIN_POSITIVE) {
            return Err(Error::Accuracy(format!(
                "integrand has not decayed at r_max = {} (relative size {:.2e})",
                nodes[m - 1],
                last / total
            )));
        }
    }
    Ok((sphere_area(profile.dim) * total).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Damped,
    Heat,
    Difference,
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurveKind::Damped => "damped",
            CurveKind::Heat => "heat",
            CurveKind::Difference => "difference",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub s: f64,
    pub gamma: f64,
    pub kind: CurveKind,
}

impl DecayCurve {
    /// CSV with columns `t,norm,s,gamma,kind`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,norm,s,gamma,kind\n");
        for (t, v) in self.times.iter().zip(&self.norms) {
            out.push_str(&format!("{t:e},{v:e},{},{},{}\n", self.s, self.gamma, self.kind));
        }
        out
    }
}

/// `count` log-spaced times on `[t_lo, t_hi]`.
pub fn log_times(t_lo: f64, t_hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (t_lo.ln(), t_hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1).max(1) as f64).exp())
        .collect()
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return domain("sample times must be finite and >= 0");
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return domain("sample times must be strictly increasing");
    }
    Ok(())
}

fn curve(
    times: &[f64],
    s: f64,
    gamma: f64,
    kind: CurveKind,
    at: impl Fn(f64) -> RadialProfile + Sync,
) -> Result<DecayCurve> {
    check_times(times)?;
    // evaluated in parallel, collected in time order
    let norms = times
        .par_iter()
        .map(|&t| norm_radial(&at(t), s))
        .collect::<Result<Vec<_>>>()?;
    Ok(DecayCurve {
        times: times.to_vec(),
        norms,
        s,
        gamma,
        kind,
    })
}

/// Damped-wave solution `K̂0 v̂0 + K̂1 v̂1` at each time.
pub fn damped_profile(v0: &RadialProfile, v1: &RadialProfile, t: f64) -> RadialProfile {
    v0.combine(v1, |r| {
        let m = propagator_unchecked(t, r);
        (m.k00, m.k01)
    })
}

/// Heat solution `e^{-r² t}(v̂0 + v̂1)`.
pub fn heat_profile(v0: &RadialProfile, v1: &RadialProfile, t: f64) -> RadialProfile {
    v0.combine(v1, |r| {
        let e = heat_multiplier(t, r);
        (e, e)
    })
}

/// Difference of damped-wave and heat solutions, `K̂0 v̂0 + K̂1 v̂1 - e^{-r² t}(v̂0 + v̂1)`.
pub fn difference_profile(v0: &RadialProfile, v1: &RadialProfile, t: f64) -> RadialProfile {
    let values = v0
        .grid
        .nodes()
        .iter()
        .zip(v0.values.iter().zip(&v1.values))
        .map(|(&r, (x, y))| {
            let m = propagator_unchecked(t, r);
            (x * m.k00 + y * m.k01) - (x + y) * heat_multiplier(t, r)
        })
        .collect();
    RadialProfile {
        dim: v0.dim,
        grid: v0.grid.clone(),
        values,
        support_len: v0.support_len.max(v1.support_len),
    }
}

pub fn evolve_damped(
    v0: &RadialProfile,
    v1: &RadialProfile,
    times: &[f64],
    s: f64,
    gamma: f64,
) -> Result<DecayCurve> {
    v0.check_pair(v1)?;
    curve(times, s, gamma, CurveKind::Damped, |t| damped_profile(v0, v1, t))
}

pub fn evolve_heat(
    v0: &RadialProfile,
    v1: &RadialProfile,
    times: &[f64],
    s: f64,
    gamma: f64,
) -> Result<DecayCurve> {
    v0.check_pair(v1)?;
    curve(times, s, gamma, CurveKind::Heat, |t| heat_profile(v0, v1, t))
}

pub fn diffusion_difference(
    v0: &RadialProfile,
    v1: &RadialProfile,
    times: &[f64],
    s: f64,
    gamma: f64,
) -> Result<DecayCurve> {
    v0.check_pair(v1)?;
    curve(times, s, gamma, CurveKind::Difference, |t| {
        difference_profile(v0, v1, t)
    })
}

/// Least-squares fit of `log(norm)` against `log(1 + t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub samples: usize,
    /// Rate the fit is compared against, when one is known.
    pub predicted_rate: Option<f64>,
}

/// Least squares `y = slope x + intercept`; returns `(slope, intercept, rms residual)`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

pub fn fit_rate(curve: &DecayCurve, window: (f64, f64)) -> Result<RateFit> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return domain(format!("empty fit window [{lo}, {hi}]"));
    }
    let picked: Vec<(f64, f64)> = curve
        .times
        .iter()
        .zip(&curve.norms)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(&t, &v)| (t, v))
        .collect();
    if picked.len() < 8 {
        return domain(format!(
            "fit window [{lo}, {hi}] holds {} samples, need at least 8",
            picked.len()
        ));
    }
    if picked.iter().any(|(_, v)| !(*v > 0.0)) {
        return domain("fit needs strictly positive norms");
    }
    let x: Vec<f64> = picked.iter().map(|(t, _)| t.ln_1p()).collect();
    let y: Vec<f64> = picked.iter().map(|(_, v)| v.ln()).collect();
    let (slope, intercept, residual) = least_squares(&x, &y);
    Ok(RateFit {
        slope,
        intercept,
        t_lo: lo,
        t_hi: hi,
        residual,
        samples: picked.len(),
        predicted_rate: None,
    })
}
