//! Exponent arithmetic for the semilinear damped wave equation with data in
//! homogeneous Sobolev spaces of negative order.
//!
//! Everything here is a pure function on `f64` values. The regime classifier
//! combines the global existence conditions (including the technical cap
//! `p <= n/(n-2s)` that comes from the fractional Gagliardo-Nirenberg step)
//! with the blow-up region `1 < p < p_crit(n, gamma)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Denominators smaller than this in magnitude are treated as zero.
const DENOM_EPS: f64 = 1e-14;

/// Relative tolerance used to decide `p == p_crit`.
const CRITICAL_RTOL: f64 = 1e-12;

fn checked_div(num: f64, den: f64, what: &str) -> Result<f64> {
    if den.abs() <= DENOM_EPS {
        return domain(format!("{what}: denominator vanishes"));
    }
    Ok(num / den)
}

fn check_dimension(n: f64) -> Result<()> {
    if !(n.is_finite() && n >= 1.0) {
        return domain(format!("dimension must be >= 1, got {n}"));
    }
    Ok(())
}

/// Fujita exponent `1 + 2/n`.
pub fn p_fujita(n: f64) -> Result<f64> {
    if !(n.is_finite() && n > 0.0) {
        return domain(format!("Fujita exponent needs n > 0, got {n}"));
    }
    Ok(1.0 + 2.0 / n)
}

/// Critical exponent `1 + 4/(n + 2 gamma)`.
///
/// The formal endpoint `gamma = n/2` is accepted here (it reproduces the
/// Fujita exponent); the classifier rejects it.
pub fn p_crit(n: f64, gamma: f64) -> Result<f64> {
    check_dimension(n)?;
    if !(gamma.is_finite() && gamma > 0.0) {
        return domain(format!("gamma must be > 0, got {gamma}"));
    }
    Ok(1.0 + checked_div(4.0, n + 2.0 * gamma, "p_crit")?)
}

/// Positive root of `2 g^2 + n g - 2n = 0`.
pub fn gamma_tilde(n: f64) -> Result<f64> {
    check_dimension(n)?;
    // (sqrt(n^2 + 16n) - n)/4 rewritten to avoid cancellation for large n
    Ok(4.0 * n / ((n * n + 16.0 * n).sqrt() + n))
}

/// Conjugate exponent `p/(p-1)`.
pub fn conjugate_exponent(p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return domain(format!("conjugate exponent needs p > 1, got {p}"));
    }
    checked_div(p, p - 1.0, "conjugate exponent")
}

fn check_subcritical(p: f64, n: f64, gamma: f64) -> Result<f64> {
    let pc = p_crit(n, gamma)?;
    if !(p > 1.0) {
        return domain(format!("need p > 1, got {p}"));
    }
    if p >= pc * (1.0 - CRITICAL_RTOL) {
        return domain(format!(
            "need p < p_crit(n={n}, gamma={gamma}) = {pc}, got p = {p}"
        ));
    }
    Ok(pc)
}

/// Lifespan exponent `-2/(2p' - 2 - n/2 - gamma)` so that `T ~ eps^exponent`.
pub fn lifespan_exponent(p: f64, n: f64, gamma: f64) -> Result<f64> {
    check_subcritical(p, n, gamma)?;
    let pp = conjugate_exponent(p)?;
    let den = 2.0 * pp - 2.0 - n / 2.0 - gamma;
    if den <= DENOM_EPS {
        return domain(format!(
            "2p' - 2 - n/2 - gamma = {den} must be positive (p below p_crit)"
        ));
    }
    Ok(-2.0 / den)
}

/// Same exponent written as `-2(p-1)/(2 - (n/2 + gamma)(p-1))`.
pub fn lifespan_exponent_rational(p: f64, n: f64, gamma: f64) -> Result<f64> {
    check_subcritical(p, n, gamma)?;
    let den = 2.0 - (n / 2.0 + gamma) * (p - 1.0);
    if den <= DENOM_EPS {
        return domain(format!("2 - (n/2 + gamma)(p-1) = {den} must be positive"));
    }
    Ok(-2.0 * (p - 1.0) / den)
}

/// Bootstrap exponent `alpha0 = -(gamma/2 + n/4) p + gamma/2 + n/4 + 1`.
pub fn alpha0(p: f64, n: f64, gamma: f64) -> Result<f64> {
    check_subcritical(p, n, gamma)?;
    let a = -(gamma / 2.0 + n / 4.0) * p + gamma / 2.0 + n / 4.0 + 1.0;
    if !(a > 0.0 && a < 1.0) {
        return domain(format!("alpha0 = {a} outside (0, 1)"));
    }
    Ok(a)
}

/// Lebesgue index `m = 2n/(n + 2 gamma)` of the Hardy-Littlewood-Sobolev pairing.
pub fn hls_pair(gamma: f64, n: f64) -> Result<f64> {
    check_dimension(n)?;
    if !(gamma > 0.0 && gamma < n / 2.0) {
        return domain(format!(
            "HLS pairing needs gamma in (0, n/2) = (0, {}), got {gamma}",
            n / 2.0
        ));
    }
    checked_div(2.0 * n, n + 2.0 * gamma, "hls_pair")
}

/// An interpolation weight together with its admissibility in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    pub value: f64,
    pub admissible: bool,
}

impl Weight {
    fn new(value: f64) -> Self {
        Self {
            value,
            admissible: (0.0..=1.0).contains(&value),
        }
    }
}

fn check_regularity(s: f64) -> Result<()> {
    if !(s > 0.0 && s <= 1.0) {
        return domain(format!("regularity s must lie in (0, 1], got {s}"));
    }
    Ok(())
}

/// `beta1 = n/(2s) (1 - 1/p)`, the weight bounding `|u|^p` in `L^2`.
pub fn gn_beta1(n: f64, s: f64, p: f64) -> Result<Weight> {
    check_dimension(n)?;
    check_regularity(s)?;
    if !(p > 1.0) {
        return domain(format!("need p > 1, got {p}"));
    }
    Ok(Weight::new(n / (2.0 * s) * (1.0 - 1.0 / p)))
}

/// `beta2 = n/s (1/2 - 1/(m p))`, the weight bounding `|u|^p` in `H^{-gamma}`.
pub fn gn_beta2(n: f64, s: f64, p: f64, gamma: f64) -> Result<Weight> {
    check_dimension(n)?;
    check_regularity(s)?;
    if !(p > 1.0) {
        return domain(format!("need p > 1, got {p}"));
    }
    let m = hls_pair(gamma, n)?;
    Ok(Weight::new(n / s * (0.5 - 1.0 / (m * p))))
}

/// Gate of the test-function argument: `n + 2 - 2p' < n/2 - gamma`.
///
/// Equality is reported as `false`.
pub fn contradiction_gate(n: f64, gamma: f64, p: f64) -> Result<bool> {
    check_dimension(n)?;
    let pp = conjugate_exponent(p)?;
    let lhs = n + 2.0 - 2.0 * pp;
    let rhs = n / 2.0 - gamma;
    let scale = 1.0 + lhs.abs().max(rhs.abs());
    Ok(rhs - lhs > 1e-12 * scale)
}

/// Parameters governing every hypothesis: dimension, Sobolev orders, power and data size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub n: f64,
    pub gamma: f64,
    pub s: f64,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

impl RegimeParams {
    pub fn new(n: f64, gamma: f64, s: f64, p: f64) -> Self {
        Self {
            n,
            gamma,
            s,
            p,
            eps: None,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = Some(eps);
        self
    }

    fn validate(&self) -> Result<()> {
        check_dimension(self.n)?;
        if !(self.gamma > 0.0 && self.gamma < self.n / 2.0) {
            return domain(format!(
                "gamma must lie in (0, n/2) = (0, {}), got {}",
                self.n / 2.0,
                self.gamma
            ));
        }
        if !(self.p.is_finite() && self.p > 1.0) {
            return domain(format!("p must be > 1, got {}", self.p));
        }
        check_regularity(self.s)?;
        if let Some(eps) = self.eps {
            if !(eps > 0.0) {
                return domain(format!("eps must be > 0, got {eps}"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    GlobalExistence,
    BlowUp,
    CriticalOpen,
    OutsideTheory,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::GlobalExistence => "GlobalExistence",
            Regime::BlowUp => "BlowUp",
            Regime::CriticalOpen => "CriticalOpen",
            Regime::OutsideTheory => "OutsideTheory",
        }
    }
}

/// One evaluated condition: `lhs` compared against `rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reason {
    pub name: String,
    pub passed: bool,
    pub lhs: f64,
    pub rhs: f64,
}

impl Reason {
    fn new(name: &str, passed: bool, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.to_string(),
            passed,
            lhs,
            rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeVerdict {
    pub regime: Regime,
    pub reasons: Vec<Reason>,
}

/// Technical cap `n/(n-2s)`, or `None` when `n <= 2s`.
pub fn technical_cap(n: f64, s: f64) -> Option<f64> {
    (n > 2.0 * s).then(|| n / (n - 2.0 * s))
}

fn is_critical(p: f64, pc: f64) -> bool {
    (p - pc).abs() <= CRITICAL_RTOL * pc
}

/// Classify `(n, gamma, s, p)` into the global existence, blow-up, critical or
/// uncovered region.
pub fn classify_regime(params: &RegimeParams) -> Result<RegimeVerdict> {
    params.validate()?;
    let RegimeParams { n, gamma, s, p, .. } = *params;
    let pc = p_crit(n, gamma)?;
    let gt = gamma_tilde(n)?;
    let lower = 1.0 + 2.0 * gamma / n;

    let mut reasons = Vec::new();
    if is_critical(p, pc) {
        reasons.push(Reason::new("p == p_crit(n,gamma)", true, p, pc));
        return Ok(RegimeVerdict {
            regime: Regime::CriticalOpen,
            reasons,
        });
    }
    if p < pc {
        reasons.push(Reason::new("1 < p < p_crit(n,gamma)", true, p, pc));
        return Ok(RegimeVerdict {
            regime: Regime::BlowUp,
            reasons,
        });
    }

    reasons.push(Reason::new("p > p_crit(n,gamma)", true, p, pc));
    let condition_p = if gamma <= gt {
        reasons.push(Reason::new("gamma <= gamma_tilde(n)", true, gamma, gt));
        true
    } else {
        reasons.push(Reason::new("gamma <= gamma_tilde(n)", false, gamma, gt));
        let ok = p >= lower;
        reasons.push(Reason::new("p >= 1 + 2 gamma/n", ok, p, lower));
        ok
    };
    let cap_ok = match technical_cap(n, s) {
        Some(cap) => {
            let ok = p <= cap;
            reasons.push(Reason::new("p <= n/(n-2s)", ok, p, cap));
            ok
        }
        None => {
            reasons.push(Reason::new("n <= 2s (no technical cap)", true, n, 2.0 * s));
            true
        }
    };
    let regime = if condition_p && cap_ok {
        Regime::GlobalExistence
    } else {
        Regime::OutsideTheory
    };
    Ok(RegimeVerdict { regime, reasons })
}

/// Result of the sharp-lifespan admissibility check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub reasons: Vec<Reason>,
}

/// Whether `(n, gamma, p)` lies where upper and lower lifespan bounds meet:
/// `gamma < min(2, n/2)`, `1 < p < p_crit` and `1 + 2gamma/n <= p <= n/(n-2)_+`.
///
/// The formal endpoint `gamma = n/2` is admitted (it is the `L^1`-data limit
/// used by the one-dimensional lifespan experiments).
pub fn sharp_lifespan_admissible(params: &RegimeParams) -> Admissibility {
    let RegimeParams { n, gamma, p, .. } = *params;
    let mut reasons = Vec::new();
    let gamma_cap = 2.0_f64.min(n / 2.0);
    let gamma_ok = gamma > 0.0 && gamma < 2.0 && gamma <= n / 2.0;
    reasons.push(Reason::new("0 < gamma < min(2, n/2]", gamma_ok, gamma, gamma_cap));

    let pc = p_crit(n, gamma).unwrap_or(f64::NAN);
    let sub_ok = p > 1.0 && p < pc && !is_critical(p, pc);
    reasons.push(Reason::new("1 < p < p_crit(n,gamma)", sub_ok, p, pc));

    let lower = 1.0 + 2.0 * gamma / n;
    let lower_ok = p >= lower * (1.0 - 1e-15);
    reasons.push(Reason::new("p >= 1 + 2 gamma/n", lower_ok, p, lower));

    let cap_ok = if n > 2.0 {
        let cap = n / (n - 2.0);
        let ok = p <= cap;
        reasons.push(Reason::new("p <= n/(n-2)", ok, p, cap));
        ok
    } else {
        reasons.push(Reason::new("n <= 2 (no cap)", true, n, 2.0));
        true
    };

    Admissibility {
        admissible: gamma_ok && sub_ok && lower_ok && cap_ok,
        reasons,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fujita_values() {
        assert_eq!(p_fujita(2.0).unwrap(), 2.0);
        assert_eq!(p_fujita(1.0).unwrap(), 3.0);
        assert_eq!(p_fujita(4.0).unwrap(), 1.5);
        assert!(p_fujita(0.0).is_err());
        assert!(p_fujita(-1.0).is_err());
    }

    #[test]
    fn critical_values() {
        assert_eq!(p_crit(2.0, 1.0).unwrap(), 2.0);
        assert_eq!(p_crit(2.0, 1.0).unwrap(), p_fujita(2.0).unwrap());
        assert_eq!(p_crit(3.0, 0.5).unwrap(), 2.0);
        assert_eq!(p_crit(1.0, 0.5).unwrap(), 3.0);
        assert!(p_crit(2.0, 0.0).is_err());
        assert!(p_crit(2.0, -0.1).is_err());
    }

    #[test]
    fn gamma_tilde_roots() {
        // quadratic formula evaluated independently
        for (n, expected) in [(4.0, 5f64.sqrt() - 1.0), (1.0, (-1.0 + 17f64.sqrt()) / 4.0)] {
            let g = gamma_tilde(n).unwrap();
            assert_abs_diff_eq!(g, expected, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(gamma_tilde(4.0).unwrap(), 1.2360680, epsilon = 1e-7);
        assert_abs_diff_eq!(gamma_tilde(1.0).unwrap(), 0.7807764, epsilon = 1e-7);
        for n in 1..=10 {
            assert!(gamma_tilde(n as f64).unwrap() < 2.0);
        }
    }

    #[test]
    fn conjugates() {
        assert_eq!(conjugate_exponent(2.0).unwrap(), 2.0);
        assert_eq!(conjugate_exponent(3.0).unwrap(), 1.5);
        assert_abs_diff_eq!(conjugate_exponent(1.5).unwrap(), 3.0, epsilon = 1e-15);
        assert!(conjugate_exponent(1.0).is_err());
        assert!(conjugate_exponent(0.5).is_err());
    }

    #[test]
    fn lifespan_exponent_examples() {
        assert_abs_diff_eq!(lifespan_exponent(2.0, 1.0, 0.5).unwrap(), -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            lifespan_exponent_rational(2.0, 1.0, 0.5).unwrap(),
            -2.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(lifespan_exponent(1.5, 2.0, 0.5).unwrap(), -0.8, epsilon = 1e-14);
        assert_abs_diff_eq!(
            lifespan_exponent_rational(1.5, 2.0, 0.5).unwrap(),
            -0.8,
            epsilon = 1e-14
        );
    }

    #[test]
    fn lifespan_exponent_rejects_supercritical() {
        let err = lifespan_exponent(5.0, 1.0, 0.3).unwrap_err().to_string();
        assert!(err.contains("p_crit"), "{err}");
        assert!(lifespan_exponent(2.0, 3.0, 0.5).is_err()); // critical
    }

    #[test]
    fn alpha0_examples() {
        assert_abs_diff_eq!(alpha0(2.0, 1.0, 0.5).unwrap(), 0.5, epsilon = 1e-15);
        let a = alpha0(1.5, 2.0, 0.5).unwrap();
        assert_abs_diff_eq!(a, 0.625, epsilon = 1e-15);
        assert_abs_diff_eq!(a, (2.0 - (1.0 + 0.5) * 0.5) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(0.5 / a, -lifespan_exponent(1.5, 2.0, 0.5).unwrap(), epsilon = 1e-14);
        assert!(alpha0(3.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn hls_examples() {
        assert_abs_diff_eq!(hls_pair(0.5, 2.0).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hls_pair(1.0, 4.0).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
        let m = hls_pair(1.0 - 1e-9, 2.0).unwrap();
        assert!(m > 1.0 && m - 1.0 < 1e-8);
        assert!(hls_pair(1.0, 2.0).is_err());
        assert!(hls_pair(0.0, 2.0).is_err());
    }

    #[test]
    fn beta_weights() {
        let b = gn_beta1(2.0, 1.0, 2.0).unwrap();
        assert_eq!(b, Weight { value: 0.5, admissible: true });
        let b = gn_beta1(3.0, 1.0, 3.0).unwrap();
        assert_abs_diff_eq!(b.value, 1.0, epsilon = 1e-15);
        assert!(b.admissible);
        let b = gn_beta1(3.0, 1.0, 4.0).unwrap();
        assert_abs_diff_eq!(b.value, 1.125, epsilon = 1e-15);
        assert!(!b.admissible);

        let b = gn_beta2(2.0, 1.0, 2.0, 0.5).unwrap();
        assert_abs_diff_eq!(b.value, 0.25, epsilon = 1e-15);
        let b = gn_beta2(2.0, 1.0, 1.5, 0.5).unwrap();
        assert_abs_diff_eq!(b.value, 0.0, epsilon = 1e-15);
        let b = gn_beta2(2.0, 1.0, 1.2, 0.5).unwrap();
        assert!(b.value < 0.0 && !b.admissible);
    }

    #[test]
    fn classify_examples() {
        let v = classify_regime(&RegimeParams::new(1.0, 0.25, 1.0, 2.0)).unwrap();
        assert_eq!(v.regime, Regime::BlowUp);
        assert_abs_diff_eq!(v.reasons[0].rhs, 11.0 / 3.0, epsilon = 1e-14);
        let v = classify_regime(&RegimeParams::new(2.0, 0.5, 1.0, 3.0)).unwrap();
        assert_eq!(v.regime, Regime::GlobalExistence);
        let v = classify_regime(&RegimeParams::new(3.0, 0.5, 1.0, 2.0)).unwrap();
        assert_eq!(v.regime, Regime::CriticalOpen);
        assert!(!v.reasons.is_empty());
    }

    #[test]
    fn classify_outside_theory() {
        // above the technical cap n/(n-2s) = 3
        let v = classify_regime(&RegimeParams::new(3.0, 0.5, 1.0, 3.5)).unwrap();
        assert_eq!(v.regime, Regime::OutsideTheory);
        // gamma > gamma_tilde, p between p_crit and 1 + 2gamma/n
        let n = 4.0;
        let gamma = 1.8; // gamma_tilde(4) ~ 1.236
        let pc = p_crit(n, gamma).unwrap();
        let lower = 1.0 + 2.0 * gamma / n;
        let p = 0.5 * (pc + lower);
        let v = classify_regime(&RegimeParams::new(n, gamma, 1.0, p)).unwrap();
        assert_eq!(v.regime, Regime::OutsideTheory);
        let v = classify_regime(&RegimeParams::new(n, gamma, 1.0, lower)).unwrap();
        assert_eq!(v.regime, Regime::GlobalExistence);
    }

    #[test]
    fn classify_rejects_invalid() {
        assert!(classify_regime(&RegimeParams::new(2.0, 1.0, 1.0, 2.0)).is_err()); // gamma = n/2
        assert!(classify_regime(&RegimeParams::new(2.0, 0.5, 1.0, 1.0)).is_err());
        assert!(classify_regime(&RegimeParams::new(2.0, 0.5, 1.5, 2.0)).is_err());
        assert!(classify_regime(&RegimeParams::new(2.0, 0.5, 1.0, 2.0).with_eps(0.0)).is_err());
    }

    #[test]
    fn verdict_json_shape() {
        let v = classify_regime(&RegimeParams::new(2.0, 0.5, 1.0, 3.0)).unwrap();
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["regime"], "GlobalExistence");
        let r = &json["reasons"][0];
        for key in ["name", "passed", "lhs", "rhs"] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn sharp_lifespan_examples() {
        assert!(sharp_lifespan_admissible(&RegimeParams::new(1.0, 0.5, 1.0, 2.0)).admissible);
        let a = sharp_lifespan_admissible(&RegimeParams::new(5.0, 0.5, 1.0, 2.0));
        assert!(!a.admissible);
        assert!(a.reasons.iter().any(|r| r.name == "p <= n/(n-2)" && !r.passed));
        assert!(!sharp_lifespan_admissible(&RegimeParams::new(4.0, 2.0, 1.0, 2.0)).admissible);
    }

    #[test]
    fn gate_matches_subcritical() {
        assert!(contradiction_gate(1.0, 0.5, 2.0).unwrap());
        assert!(!contradiction_gate(1.0, 0.3, 5.0).unwrap());
        assert!(!contradiction_gate(3.0, 0.5, 2.0).unwrap()); // equality
    }
}
