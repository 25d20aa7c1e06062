//! Fourier multipliers of `v_tt - Δv + v_t = 0` and of the heat semigroup.
//!
//! For a radial frequency `r` the symbol satisfies `λ² + λ + r² = 0`. The
//! kernels are written through `δ = sqrt(1 - 4r²)/2` and the entire functions
//! `g(z) = sinh(√z)/√z`, `h(z) = cosh(√z)`, `z = (δt)²`, which continue
//! through `z <= 0` as `sin`/`cos`. Near the double root `r = 1/2` the even
//! power series are summed directly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::spectral::SpectrumField;

/// `|z|` below which the power series for `g` and `h` are used.
pub const SERIES_THRESHOLD: f64 = 1e-2;
const SERIES_TERMS: usize = 12;

/// Entries below this magnitude are flushed to zero.
pub const UNDERFLOW_CLAMP: f64 = 1e-300;

/// Constants of the pointwise envelope check: decay rate `c`, prefactors `C0`, `C1`.
pub const BOUND_RATE: f64 = 0.25;
pub const BOUND_C0: f64 = 8.0;
pub const BOUND_C1: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenPair {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
}

/// Roots of `λ² + λ + r² = 0`, with `λ1` the one closer to zero.
pub fn eigenvalues(r: f64) -> Result<EigenPair> {
    if !(r >= 0.0) {
        return domain(format!("radial frequency must be >= 0, got {r}"));
    }
    let disc = 1.0 - 4.0 * r * r;
    if disc >= 0.0 {
        let root = disc.sqrt();
        // (-1 + root)/2 written without cancellation
        let l1 = -2.0 * r * r / (1.0 + root);
        let l2 = -0.5 * (1.0 + root);
        Ok(EigenPair {
            lambda1: Complex64::new(l1, 0.0),
            lambda2: Complex64::new(l2, 0.0),
        })
    } else {
        let w = 0.5 * (-disc).sqrt();
        Ok(EigenPair {
            lambda1: Complex64::new(-0.5, w),
            lambda2: Complex64::new(-0.5, -w),
        })
    }
}

/// The 2x2 fundamental matrix mapping `(v̂(0), v̂_t(0))` to `(v̂(t), v̂_t(t))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorMatrix {
    /// `K̂0`
    pub k00: f64,
    /// `K̂1`
    pub k01: f64,
    /// `∂t K̂0`
    pub k10: f64,
    /// `∂t K̂1`
    pub k11: f64,
    /// Some entry was flushed to zero.
    pub underflow: bool,
}

impl PropagatorMatrix {
    pub const IDENTITY: Self = Self {
        k00: 1.0,
        k01: 0.0,
        k10: 0.0,
        k11: 1.0,
        underflow: false,
    };

    pub fn det(&self) -> f64 {
        self.k00 * self.k11 - self.k01 * self.k10
    }

    /// Matrix product `self * rhs`.
    pub fn compose(&self, rhs: &Self) -> Self {
        Self {
            k00: self.k00 * rhs.k00 + self.k01 * rhs.k10,
            k01: self.k00 * rhs.k01 + self.k01 * rhs.k11,
            k10: self.k10 * rhs.k00 + self.k11 * rhs.k10,
            k11: self.k10 * rhs.k01 + self.k11 * rhs.k11,
            underflow: self.underflow || rhs.underflow,
        }
    }

    /// Apply to a column `(a, b)`.
    #[inline]
    pub fn apply<T>(&self, a: T, b: T) -> (T, T)
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        (a * self.k00 + b * self.k01, a * self.k10 + b * self.k11)
    }

    fn flush(mut self) -> Self {
        for v in [&mut self.k00, &mut self.k01, &mut self.k10, &mut self.k11] {
            if v.abs() < UNDERFLOW_CLAMP && *v != 0.0 {
                *v = 0.0;
                self.underflow = true;
            }
        }
        self
    }
}

/// `(g(z), h(z))` from their power series.
fn series_gh(z: f64) -> (f64, f64) {
    // g = sum z^j/(2j+1)!, h = sum z^j/(2j)!
    let mut g = 0.0;
    let mut h = 0.0;
    let mut zj = 1.0;
    let mut fact_even = 1.0; // (2j)!
    for j in 0..SERIES_TERMS {
        let fact_odd = fact_even * (2 * j + 1) as f64;
        h += zj / fact_even;
        g += zj / fact_odd;
        zj *= z;
        fact_even = fact_odd * (2 * j + 2) as f64;
    }
    (g, h)
}

/// Evaluate the propagator at time `t` and radial frequency `r`.
pub fn propagator(t: f64, r: f64) -> Result<PropagatorMatrix> {
    if !(t >= 0.0) {
        return domain(format!("time must be >= 0, got {t}"));
    }
    if !(r >= 0.0) {
        return domain(format!("radial frequency must be >= 0, got {r}"));
    }
    Ok(propagator_unchecked(t, r))
}

pub(crate) fn propagator_unchecked(t: f64, r: f64) -> PropagatorMatrix {
    if t == 0.0 {
        return PropagatorMatrix::IDENTITY;
    }
    let r2 = r * r;
    let disc = 1.0 - 4.0 * r2;
    // z = (δt)² with δ² = disc/4
    let z = 0.25 * disc * t * t;
    let m = if z.abs() < SERIES_THRESHOLD {
        let (g, h) = series_gh(z);
        let decay = (-0.5 * t).exp();
        let k01 = decay * t * g;
        PropagatorMatrix {
            k00: decay * (h + 0.5 * t * g),
            k01,
            k10: -r2 * k01,
            k11: decay * (h - 0.5 * t * g),
            underflow: false,
        }
    } else if disc > 0.0 {
        // distinct real roots; the decay factor is folded into each exponential
        let root = disc.sqrt();
        let delta = 0.5 * root;
        let l1 = -2.0 * r2 / (1.0 + root);
        let l2 = -0.5 * (1.0 + root);
        let e1 = (l1 * t).exp();
        // e^{λ1 t} - e^{λ2 t} = e^{λ1 t} (1 - e^{-2δt})
        let k01 = e1 * -(-2.0 * delta * t).exp_m1() / (2.0 * delta);
        let e2 = (l2 * t).exp();
        PropagatorMatrix {
            k00: (l1 * e2 - l2 * e1) / (2.0 * delta),
            k01,
            k10: -r2 * k01,
            k11: (l1 * e1 - l2 * e2) / (2.0 * delta),
            underflow: false,
        }
    } else {
        let w = 0.5 * (-disc).sqrt();
        let decay = (-0.5 * t).exp();
        let (sn, cs) = (w * t).sin_cos();
        let k01 = decay * sn / w;
        PropagatorMatrix {
            k00: decay * (cs + 0.5 * sn / w),
            k01,
            k10: -r2 * k01,
            k11: decay * (cs - 0.5 * sn / w),
            underflow: false,
        }
    };
    m.flush()
}

/// Heat multiplier `exp(-r² t)`.
pub fn heat_multiplier(t: f64, r: f64) -> f64 {
    (-r * r * t).exp()
}

/// Propagate `(û, û_t)` by the exact linear flow for time `t`.
pub fn apply_linear(
    u: &SpectrumField,
    ut: &SpectrumField,
    t: f64,
) -> Result<(SpectrumField, SpectrumField)> {
    if u.grid != ut.grid {
        return Err(Error::Contract("displacement and velocity live on different grids".into()));
    }
    if !(t >= 0.0) {
        return domain(format!("time must be >= 0, got {t}"));
    }
    let radial = u.grid.radial_wavenumbers();
    let mut out_u = Vec::with_capacity(radial.len());
    let mut out_ut = Vec::with_capacity(radial.len());
    for ((a, b), r) in u.coeffs.iter().zip(&ut.coeffs).zip(radial) {
        let (x, y) = propagator_unchecked(t, r).apply(*a, *b);
        out_u.push(x);
        out_ut.push(y);
    }
    Ok((
        SpectrumField { grid: u.grid, coeffs: out_u },
        SpectrumField { grid: u.grid, coeffs: out_ut },
    ))
}

/// Envelope check of the kernels against
/// `|K̂0| <= C0 (r² e^{-ct} + e^{-c r² t})` and
/// `|K̂1| <= C1 min(1, 1/r) (e^{-ct} + e^{-c r² t})`.
pub fn pointwise_bound_check(t: f64, r: f64) -> bool {
    if !(t >= 0.0 && r >= 0.0) {
        return false;
    }
    let m = propagator_unchecked(t, r);
    let fast = (-BOUND_RATE * t).exp();
    let slow = (-BOUND_RATE * r * r * t).exp();
    let k0_ok = m.k00.abs() <= BOUND_C0 * (r * r * fast + slow);
    let k1_ok = m.k01.abs() <= BOUND_C1 * (1.0f64).min(1.0 / r) * (fast + slow);
    k0_ok && k1_ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    /// Direct evaluation from the eigenvalues in complex arithmetic.
    fn reference(t: f64, r: f64) -> (f64, f64) {
        let EigenPair { lambda1: l1, lambda2: l2 } = eigenvalues(r).unwrap();
        let e1 = (l1 * t).exp();
        let e2 = (l2 * t).exp();
        let k0 = (l1 * e2 - l2 * e1) / (l1 - l2);
        let k1 = (e1 - e2) / (l1 - l2);
        (k0.re, k1.re)
    }

    #[test]
    fn eigenvalue_examples() {
        let e = eigenvalues(0.0).unwrap();
        assert_eq!(e.lambda1, Complex64::new(0.0, 0.0));
        assert_eq!(e.lambda2, Complex64::new(-1.0, 0.0));
        let e = eigenvalues(0.5).unwrap();
        assert_eq!(e.lambda1, e.lambda2);
        assert_eq!(e.lambda1.re, -0.5);
        let e = eigenvalues(1.0).unwrap();
        assert_abs_diff_eq!(e.lambda1.re, -0.5);
        assert_abs_diff_eq!(e.lambda1.im, 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert!(eigenvalues(-1.0).is_err());
    }

    #[test]
    fn vieta_and_asymptotics() {
        for r in [0.0, 1e-3, 0.1, 0.3, 0.49, 0.5, 0.51, 1.0, 10.0, 1e3] {
            let e = eigenvalues(r).unwrap();
            assert!((e.lambda1 + e.lambda2 + 1.0).norm() < 1e-12);
            assert!((e.lambda1 * e.lambda2 - r * r).norm() < 1e-12 * (1.0 + r * r));
        }
        let r: f64 = 1e-3;
        let slow = eigenvalues(r).unwrap().lambda1.re;
        assert!((slow + r * r).abs() < 2.0 * r.powi(4));
    }

    #[test]
    fn propagator_examples() {
        let m = propagator(1.0, 0.0).unwrap();
        assert_relative_eq!(m.k01, 1.0 - (-1.0f64).exp(), max_relative = 1e-14);
        let m = propagator(2.0, 0.5).unwrap();
        assert_relative_eq!(m.k01, 2.0 * (-1.0f64).exp(), max_relative = 1e-14);
        for r in [0.0, 0.3, 0.5, 2.0] {
            assert_eq!(propagator(0.0, r).unwrap(), PropagatorMatrix::IDENTITY);
        }
        assert!(propagator(-1.0, 1.0).is_err());
    }

    #[test]
    fn agrees_with_complex_reference() {
        for &t in &[0.3, 1.0, 5.0, 20.0] {
            for &r in &[0.0, 0.05, 0.2, 0.45, 0.55, 1.0, 3.0] {
                let m = propagator(t, r).unwrap();
                let (k0, k1) = reference(t, r);
                assert_abs_diff_eq!(m.k00, k0, epsilon = 1e-12);
                assert_abs_diff_eq!(m.k01, k1, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn long_times_stay_finite() {
        for r in [0.0, 1e-6, 0.01, 0.4, 0.5, 2.0] {
            let m = propagator(1e6, r).unwrap();
            assert!(m.k00.is_finite() && m.k01.is_finite() && m.k11.is_finite());
        }
        let m = propagator(1e4, 5.0).unwrap();
        assert!(m.underflow || m.k00 == 0.0);
    }

    #[test]
    fn heat_examples() {
        assert_eq!(heat_multiplier(0.0, 3.0), 1.0);
        let r = 0.7;
        assert_relative_eq!(heat_multiplier(2f64.ln() / (r * r), r), 0.5, max_relative = 1e-14);
        assert_relative_eq!(heat_multiplier(1.0, 1.0), (-1.0f64).exp());
    }

    #[test]
    fn bound_check_examples() {
        assert!(pointwise_bound_check(10.0, 0.01));
        assert!(pointwise_bound_check(10.0, 10.0));
        assert!(pointwise_bound_check(0.0, 1.0));
    }

    #[test]
    fn bound_check_sampled() {
        // the calibration claim: every lattice point passes
        for i in 0..=200 {
            let t = 100.0 * i as f64 / 200.0;
            for j in 0..=300 {
                let r = if j == 0 { 0.0 } else { 10f64.powf(-4.0 + 7.0 * j as f64 / 300.0) };
                assert!(pointwise_bound_check(t, r), "t={t} r={r}");
            }
        }
    }
}
