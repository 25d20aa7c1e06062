//! Regime maps over the `(γ, p)` plane.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::exponents::{classify_regime, gamma_tilde, p_crit, technical_cap, Regime, RegimeParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, steps: usize) -> Self {
        Self { min, max, steps }
    }

    /// Inclusive linear spacing.
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        (0..self.steps)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub gamma: f64,
    pub p: f64,
    pub regime: Regime,
    pub p_crit: f64,
    /// `1 + 2γ/n`.
    pub p_lower: f64,
    /// `n/(n-2s)` when `n > 2s`.
    pub p_cap: Option<f64>,
    pub gamma_tilde: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub n: f64,
    pub s: f64,
    pub cells: Vec<PhaseCell>,
}

impl PhaseDiagram {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("gamma,p,regime,p_crit,p_lower,p_cap,gamma_tilde\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                c.gamma,
                c.p,
                c.regime.as_str(),
                c.p_crit,
                c.p_lower,
                c.p_cap.map_or_else(String::new, |v| v.to_string()),
                c.gamma_tilde
            ));
        }
        out
    }

    pub fn count(&self, regime: Regime) -> usize {
        self.cells.iter().filter(|c| c.regime == regime).count()
    }

    pub fn cell(&self, gamma: f64, p: f64) -> Option<&PhaseCell> {
        self.cells
            .iter()
            .find(|c| (c.gamma - gamma).abs() < 1e-12 && (c.p - p).abs() < 1e-12)
    }
}

/// Classify every `(γ, p)` grid point.
pub fn emit_phase_diagram(n: f64, s: f64, gamma: Axis, p: Axis) -> Result<PhaseDiagram> {
    if gamma.steps == 0 || p.steps == 0 {
        return domain("phase-diagram axes need at least one step");
    }
    if !(gamma.min > 0.0 && gamma.max < n / 2.0 && gamma.min <= gamma.max) {
        return domain(format!("gamma range must lie inside (0, {})", n / 2.0));
    }
    if !(p.min > 1.0 && p.min <= p.max && p.max.is_finite()) {
        return domain("p range must lie inside (1, inf)");
    }
    let gt = gamma_tilde(n)?;
    let cap = technical_cap(n, s);
    let mut cells = Vec::with_capacity(gamma.steps * p.steps);
    for g in gamma.values() {
        let pc = p_crit(n, g)?;
        for q in p.values() {
            let verdict = classify_regime(&RegimeParams::new(n, g, s, q))?;
            cells.push(PhaseCell {
                gamma: g,
                p: q,
                regime: verdict.regime,
                p_crit: pc,
                p_lower: 1.0 + 2.0 * g / n,
                p_cap: cap,
                gamma_tilde: gt,
            });
        }
    }
    Ok(PhaseDiagram { n, s, cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_dimensions_have_no_gap_below_critical() {
        let d = emit_phase_diagram(2.0, 1.0, Axis::new(0.05, 0.95, 19), Axis::new(1.05, 4.0, 60)).unwrap();
        for c in &d.cells {
            if c.p < c.p_crit {
                assert_eq!(c.regime, Regime::BlowUp);
            }
        }
    }

    #[test]
    fn four_dimensions_capped_at_two() {
        let d = emit_phase_diagram(4.0, 1.0, Axis::new(0.1, 1.9, 10), Axis::new(1.1, 3.0, 40)).unwrap();
        for c in d.cells.iter().filter(|c| c.regime == Regime::GlobalExistence) {
            assert!(c.p <= 2.0);
        }
        assert!(d.count(Regime::GlobalExistence) > 0);
    }

    #[test]
    fn critical_line_is_tagged() {
        // gamma = 0.5, n = 2: p_crit = 1 + 4/3
        let pc = 1.0 + 4.0 / 3.0;
        let d = emit_phase_diagram(2.0, 1.0, Axis::new(0.5, 0.5, 1), Axis::new(pc, pc, 1)).unwrap();
        assert_eq!(d.cells[0].regime, Regime::CriticalOpen);
    }

    #[test]
    fn invalid_ranges() {
        assert!(emit_phase_diagram(2.0, 1.0, Axis::new(0.0, 0.5, 3), Axis::new(1.5, 2.0, 3)).is_err());
        assert!(emit_phase_diagram(2.0, 1.0, Axis::new(0.1, 0.5, 3), Axis::new(1.0, 2.0, 3)).is_err());
    }
}
