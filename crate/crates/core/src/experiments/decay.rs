//! Linear decay and diffusion-phenomenon suites on the radial lab.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::radial::{
    diffusion_difference, evolve_damped, evolve_heat, fit_rate, log_times, CurveKind, DecayCurve,
    RadialGrid, RadialProfile, RateFit, DEFAULT_R_MAX, DEFAULT_R_MIN, DEFAULT_WINDOW,
};

/// Slack allowed above the predicted (upper-bound) rate.
pub const RATE_SLACK: f64 = 0.05;

/// Largest admissible gain of the difference curve over the damped curve.
pub const GAIN_CEILING: f64 = -0.85;

/// Radial spectral data families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ProfileSpec {
    /// `r^{-a}` on `[0, 1]`, zero beyond.
    PowerLaw { a: f64 },
    /// `exp(-w r²)`.
    Gaussian { w: f64 },
}

impl ProfileSpec {
    pub fn build(&self, n: f64, grid: RadialGrid) -> Result<RadialProfile> {
        match *self {
            ProfileSpec::PowerLaw { a } => RadialProfile::power_law(n, a, 1.0, grid),
            ProfileSpec::Gaussian { w } => RadialProfile::gaussian(n, w, grid),
        }
    }

    /// Exact long-time `Ḣ^s` rate of the heat flow of this profile.
    pub fn heat_rate(&self, n: f64, s: f64) -> f64 {
        match *self {
            ProfileSpec::PowerLaw { a } => -(s + n / 2.0 - a) / 2.0,
            ProfileSpec::Gaussian { .. } => -(2.0 * s + n) / 4.0,
        }
    }

    /// Check that the data lie in `Ḣ^{-γ}`.
    pub fn check_negative_order(&self, n: f64, gamma: f64) -> Result<()> {
        if let ProfileSpec::PowerLaw { a } = *self {
            if !(2.0 * a < n - 2.0 * gamma) {
                return domain(format!(
                    "power-law exponent a = {a} is not in the negative Sobolev space of order {gamma} \
                     in dimension {n} (need a < n/2 - gamma)"
                ));
            }
        }
        Ok(())
    }
}

impl fmt::Display for ProfileSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileSpec::PowerLaw { a } => write!(f, "powerlaw:a={a}"),
            ProfileSpec::Gaussian { w } => write!(f, "gaussian:w={w}"),
        }
    }
}

impl FromStr for ProfileSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("unrecognised profile {s:?}; use powerlaw:a=<x> or gaussian:w=<x>"));
        let (family, rest) = s.split_once(':').ok_or_else(bad)?;
        let (key, value) = rest.split_once('=').ok_or_else(bad)?;
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        match (family.trim(), key.trim()) {
            ("powerlaw", "a") => Ok(ProfileSpec::PowerLaw { a: value }),
            ("gaussian", "w") if value > 0.0 => Ok(ProfileSpec::Gaussian { w: value }),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for ProfileSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ProfileSpec> for String {
    fn from(p: ProfileSpec) -> String {
        p.to_string()
    }
}

/// Choice of velocity data relative to the displacement profile.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Velocity {
    #[default]
    Zero,
    Same,
    Opposite,
}

fn default_t0() -> f64 {
    1.0
}
fn default_t1() -> f64 {
    1e4
}
fn default_samples() -> usize {
    64
}
fn default_points() -> usize {
    crate::radial::DEFAULT_POINTS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct DecayConfig {
    pub n: f64,
    pub gamma: f64,
    pub s: f64,
    pub profile: ProfileSpec,
    #[serde(default)]
    pub velocity: Velocity,
    #[serde(default = "default_t0")]
    pub t0: f64,
    #[serde(default = "default_t1")]
    pub t1: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub window_lo: Option<f64>,
    #[serde(default)]
    pub window_hi: Option<f64>,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub seed: u64,
}

impl DecayConfig {
    pub fn new(n: f64, gamma: f64, s: f64, profile: ProfileSpec) -> Self {
        Self {
            n,
            gamma,
            s,
            profile,
            velocity: Velocity::Zero,
            t0: default_t0(),
            t1: default_t1(),
            samples: default_samples(),
            window_lo: None,
            window_hi: None,
            points: default_points(),
            seed: 0,
        }
    }

    pub fn window(&self) -> (f64, f64) {
        (
            self.window_lo.unwrap_or(DEFAULT_WINDOW.0),
            self.window_hi.unwrap_or(DEFAULT_WINDOW.1),
        )
    }

    fn validate(&self) -> Result<()> {
        if !(self.n >= 1.0 && self.n.is_finite()) {
            return domain(format!("dimension must be >= 1, got {}", self.n));
        }
        if !(self.gamma > 0.0 && self.gamma < self.n / 2.0) {
            return domain(format!("gamma must lie in (0, n/2), got {}", self.gamma));
        }
        if !(self.s >= 0.0 && self.s.is_finite()) {
            return domain(format!("order s must be >= 0, got {}", self.s));
        }
        if !(self.t0 > 0.0 && self.t1 > self.t0) {
            return domain(format!("need 0 < t0 < t1, got [{}, {}]", self.t0, self.t1));
        }
        self.profile.check_negative_order(self.n, self.gamma)
    }

    fn data(&self) -> Result<(RadialProfile, RadialProfile)> {
        let grid = RadialGrid::log_spaced(DEFAULT_R_MIN, DEFAULT_R_MAX, self.points)?;
        let v0 = self.profile.build(self.n, grid)?;
        let v1 = match self.velocity {
            Velocity::Zero => RadialProfile::zeros_like(&v0),
            Velocity::Same => v0.clone(),
            Velocity::Opposite => v0.scaled(-1.0),
        };
        Ok((v0, v1))
    }

    fn times(&self) -> Vec<f64> {
        log_times(self.t0, self.t1, self.samples)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub kind: CurveKind,
    pub s: f64,
    #[serde(flatten)]
    pub fit: RateFit,
    /// Exact long-time rate of the chosen data, when known in closed form.
    pub exact_rate: Option<f64>,
    /// `slope <= predicted + RATE_SLACK`.
    pub within_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub n: f64,
    pub gamma: f64,
    pub fits: Vec<FitEntry>,
    /// `slope(difference) - slope(damped)` for the diffusion suite.
    pub gain: Option<f64>,
    pub gain_ok: Option<bool>,
    #[serde(skip)]
    pub curves: Vec<DecayCurve>,
}

impl DecayReport {
    pub fn curves_csv(&self) -> String {
        let mut out = String::from("t,norm,s,gamma,kind\n");
        for c in &self.curves {
            let csv = c.to_csv();
            out.push_str(csv.split_once('\n').map_or("", |(_, body)| body));
        }
        out
    }

    pub fn fit(&self, kind: CurveKind, s: f64) -> Option<&FitEntry> {
        self.fits.iter().find(|f| f.kind == kind && f.s == s)
    }
}

fn entry(config: &DecayConfig, curve: &DecayCurve, predicted: f64, exact: Option<f64>) -> Result<FitEntry> {
    let mut fit = fit_rate(curve, config.window())?;
    fit.predicted_rate = Some(predicted);
    Ok(FitEntry {
        kind: curve.kind,
        s: curve.s,
        within_bound: fit.slope <= predicted + RATE_SLACK,
        exact_rate: exact,
        fit,
    })
}

/// Damped-wave decay fits for `s = 0` and the configured `s`.
pub fn run_decay_suite(config: &DecayConfig) -> Result<DecayReport> {
    config.validate()?;
    let (v0, v1) = config.data()?;
    let times = config.times();
    let mut orders = vec![0.0];
    if config.s != 0.0 {
        orders.push(config.s);
    }
    let mut fits = Vec::new();
    let mut curves = Vec::new();
    for s in orders {
        let curve = evolve_damped(&v0, &v1, &times, s, config.gamma)?;
        let exact = (config.velocity != Velocity::Opposite).then(|| config.profile.heat_rate(config.n, s));
        fits.push(entry(config, &curve, -(s + config.gamma) / 2.0, exact)?);
        curves.push(curve);
    }
    Ok(DecayReport {
        n: config.n,
        gamma: config.gamma,
        fits,
        gain: None,
        gain_ok: None,
        curves,
    })
}

/// Damped, heat and difference fits at the configured `s`.
pub fn run_diffusion_suite(config: &DecayConfig) -> Result<DecayReport> {
    config.validate()?;
    let (v0, v1) = config.data()?;
    let times = config.times();
    let (s, gamma) = (config.s, config.gamma);
    let rate = -(s + gamma) / 2.0;
    let exact = config.profile.heat_rate(config.n, s);
    let heat_zero = config.velocity == Velocity::Opposite;

    let damped = evolve_damped(&v0, &v1, &times, s, gamma)?;
    let heat = evolve_heat(&v0, &v1, &times, s, gamma)?;
    let diff = diffusion_difference(&v0, &v1, &times, s, gamma)?;

    let f_damped = entry(config, &damped, rate, (!heat_zero).then_some(exact))?;
    let mut fits = vec![f_damped];
    // w ≡ 0 has no decay rate to fit
    if !heat_zero {
        fits.push(entry(config, &heat, rate, Some(exact))?);
    }
    let f_diff = entry(config, &diff, rate - 1.0, (!heat_zero).then_some(exact - 1.0))?;
    let gain = f_diff.fit.slope - fits[0].fit.slope;
    fits.push(f_diff);
    Ok(DecayReport {
        n: config.n,
        gamma,
        fits,
        gain: Some(gain),
        gain_ok: Some(gain <= GAIN_CEILING),
        curves: vec![damped, heat, diff],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_spec_round_trip() {
        let p: ProfileSpec = "powerlaw:a=0.25".parse().unwrap();
        assert_eq!(p, ProfileSpec::PowerLaw { a: 0.25 });
        assert_eq!(p.to_string().parse::<ProfileSpec>().unwrap(), p);
        let g: ProfileSpec = "gaussian:w=1.5".parse().unwrap();
        assert_eq!(g, ProfileSpec::Gaussian { w: 1.5 });
        assert!("gaussian:w=-1".parse::<ProfileSpec>().is_err());
        assert!("cosine:k=1".parse::<ProfileSpec>().is_err());
        assert!("powerlaw".parse::<ProfileSpec>().is_err());
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, "\"powerlaw:a=0.25\"");
    }

    #[test]
    fn rejects_data_outside_negative_space() {
        let cfg = DecayConfig::new(2.0, 0.7, 0.0, ProfileSpec::PowerLaw { a: 0.35 });
        assert!(matches!(run_decay_suite(&cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn gaussian_decays_at_least_as_fast_as_bound() {
        let cfg = DecayConfig::new(2.0, 0.7, 0.0, ProfileSpec::Gaussian { w: 1.0 });
        let r = run_decay_suite(&cfg).unwrap();
        let f = r.fit(CurveKind::Damped, 0.0).unwrap();
        assert!(f.fit.slope <= -0.35);
        assert!((f.fit.slope + 0.5).abs() < 0.02);
        assert!(f.within_bound);
    }

    #[test]
    fn opposite_velocity_gives_identical_curves() {
        let mut cfg = DecayConfig::new(2.0, 0.7, 0.0, ProfileSpec::PowerLaw { a: 0.25 });
        cfg.velocity = Velocity::Opposite;
        let r = run_diffusion_suite(&cfg).unwrap();
        assert_eq!(r.curves[0].norms, r.curves[2].norms);
        assert!(r.curves[1].norms.iter().all(|v| *v == 0.0));
    }
}
