//! Test-function functional on stored trajectories.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::evolve::{read_initial, read_meta, read_snapshots};
use crate::error::{domain, Result};
use crate::exponents::{conjugate_exponent, contradiction_gate};
use crate::solver::nonlinearity;
use crate::spectral::{GridSpec, Transform};

fn psi(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth cutoff: `1` on `[0, 1/2]`, `0` on `[1, ∞)`, monotone in between.
pub fn eta(t: f64) -> f64 {
    if t <= 0.5 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let a = psi(1.0 - t);
        a / (a + psi(t - 0.5))
    }
}

/// `η_R(t) = η(t / R²)`.
pub fn eta_r(t: f64, r: f64) -> f64 {
    eta(t / (r * r))
}

/// `φ_R(x) = <x/R>^{-n}`.
pub fn phi_r(x: &[f64], r: f64, n: f64) -> f64 {
    let q: f64 = x.iter().map(|v| (v / r) * (v / r)).sum();
    (1.0 + q).powf(-n / 2.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionSpec {
    pub radius: f64,
}

impl TestFunctionSpec {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius >= 1.0 && radius.is_finite()) {
            return domain(format!("test-function radius must be >= 1, got {radius}"));
        }
        Ok(Self { radius })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusRow {
    pub radius: f64,
    /// `∫∫ |u|^p φ_R η_R dx dt`.
    pub functional: f64,
    /// `ε ∫ (u0 + u1) φ_R dx`.
    pub data_term: f64,
    /// `(C/p') R^{n+2-2p'}`.
    pub bound_term: f64,
    pub contradiction: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFnReport {
    pub n: f64,
    pub gamma: f64,
    pub p: f64,
    /// `n + 2 - 2p'`.
    pub bound_exponent: f64,
    /// `n/2 - γ`.
    pub data_exponent: f64,
    /// `n + 2 - 2p' < n/2 - γ`.
    pub gate: bool,
    /// Constant matched so that the data and bound terms agree at the first radius.
    pub calibrated_c: f64,
    pub rows: Vec<RadiusRow>,
}

/// `∫ f φ_R dx` as a Riemann sum over grid samples.
fn weighted_integral(samples: &[f64], grid: &GridSpec, r: f64) -> f64 {
    let n = grid.dim as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, v)| v * phi_r(&grid.position(i)[..grid.dim], r, n))
        .sum::<f64>()
        * grid.cell_volume()
}

/// Evaluate `I_R`, the data term and the calibrated bound term for every radius.
pub fn evaluate_testfn_functional(run_dir: &Path, specs: &[TestFunctionSpec]) -> Result<TestFnReport> {
    if specs.is_empty() {
        return domain("at least one test-function radius is required");
    }
    let meta = read_meta(run_dir)?;
    let grid = meta.grid;
    let n = grid.dim as f64;
    let (gamma, p) = (meta.config.gamma, meta.config.p);
    let transform = Transform::new(grid);
    let snapshots = read_snapshots(run_dir)?;
    let t_last = snapshots.last().map_or(0.0, |s| s.0);
    for spec in specs {
        TestFunctionSpec::new(spec.radius)?;
        if spec.radius * spec.radius > t_last {
            return domain(format!(
                "trajectory ends at t = {t_last}, radius {} needs coverage up to {}",
                spec.radius,
                spec.radius * spec.radius
            ));
        }
    }

    // spatial integrals of |u|^p φ_R per snapshot and radius
    let mut source = Vec::with_capacity(snapshots.len());
    for (t, field) in &snapshots {
        let (values, _) = nonlinearity(&transform.inverse(field)?, p);
        source.push((*t, values));
    }
    let (u0, u1) = read_initial(run_dir)?;
    let mut data = transform.inverse(&u0)?;
    for (a, b) in data.iter_mut().zip(transform.inverse(&u1)?) {
        *a += b;
    }

    let pp = conjugate_exponent(p)?;
    let bound_exponent = n + 2.0 - 2.0 * pp;
    let gate = contradiction_gate(n, gamma, p)?;

    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let r = spec.radius;
        let horizon = r * r;
        let mut functional = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        for (t, values) in &source {
            if *t > horizon {
                break;
            }
            let f = weighted_integral(values, &grid, r) * eta_r(*t, r);
            if let Some((t0, f0)) = prev {
                functional += 0.5 * (t - t0) * (f + f0);
            }
            prev = Some((*t, f));
        }
        rows.push(RadiusRow {
            radius: r,
            functional,
            data_term: weighted_integral(&data, &grid, r),
            bound_term: 0.0,
            contradiction: false,
        });
    }

    let (r1, d1) = (rows[0].radius, rows[0].data_term);
    let calibrated_c = pp * d1 / r1.powf(bound_exponent);
    for row in &mut rows {
        row.bound_term = calibrated_c / pp * row.radius.powf(bound_exponent);
        row.contradiction = row.data_term > row.bound_term;
    }
    Ok(TestFnReport {
        n,
        gamma,
        p,
        bound_exponent,
        data_exponent: n / 2.0 - gamma,
        gate,
        calibrated_c,
        rows,
    })
}
