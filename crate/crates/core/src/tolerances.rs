use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical tolerances shared by every solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Local error per unit length of the ODE integrator.
    pub integrator: f64,
    /// Target bracket width for eigenvalue refinement.
    pub bisection: f64,
    /// Ratio operations refuse λ with `|Δ(λ)| ≤ 2 + ratio_margin`.
    pub ratio_margin: f64,
    /// Interface eigenvalues closer than this to a gap edge are edge-absorbed.
    pub edge_margin: f64,
    /// `|ψ|` below this (unit-normalized state) flags a pole of a ratio.
    pub pole_threshold: f64,
    /// Gaps narrower than this are reported closed.
    pub closed_gap: f64,
    /// Band edges must coincide with a Dirichlet/Neumann eigenvalue to this accuracy.
    pub edge_certify: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            integrator: 1e-10,
            bisection: 1e-10,
            ratio_margin: 1e-11,
            edge_margin: 1e-8,
            pole_threshold: 1e-9,
            closed_gap: 1e-7,
            edge_certify: 1e-7,
        }
    }
}

impl Tolerances {
    /// Looser integration for quick exploratory scans.
    pub fn fast() -> Self {
        Self {
            integrator: 1e-8,
            ratio_margin: 1e-9,
            ..Self::default()
        }
    }

    pub fn strict() -> Self {
        Self {
            integrator: 1e-12,
            bisection: 1e-12,
            ratio_margin: 1e-12,
            ..Self::default()
        }
    }

    pub fn profile(name: &str) -> Option<Self> {
        match name {
            "default" => Some(Self::default()),
            "fast" => Some(Self::fast()),
            "strict" => Some(Self::strict()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1e-14..=1e-3).contains(&self.integrator) {
            return Err(Error::InvalidTolerance(self.integrator));
        }
        for v in [
            self.bisection,
            self.ratio_margin,
            self.edge_margin,
            self.pole_threshold,
            self.closed_gap,
            self.edge_certify,
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidTolerance(v));
            }
        }
        Ok(())
    }
}
