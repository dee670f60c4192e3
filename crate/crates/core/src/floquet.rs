//! Initial-value problems for `−ψ″ + V(x)ψ = λψ`: state propagation, the
//! monodromy matrix, its trace (the discriminant) and the Prüfer angle.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ode::{Dopri5, ErrorScale};
use crate::potential::PeriodicPotential;

/// `(ψ, ψ′)` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub psi: f64,
    pub dpsi: f64,
}

impl StateVector {
    pub const fn new(psi: f64, dpsi: f64) -> Self {
        Self { psi, dpsi }
    }

    pub fn norm(&self) -> f64 {
        self.psi.hypot(self.dpsi)
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self::new(self.psi / n, self.dpsi / n)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(c * self.psi, c * self.dpsi)
    }

    /// Wronskian `ψ₁ψ₂′ − ψ₁′ψ₂`.
    pub fn wronskian(&self, other: &Self) -> f64 {
        self.psi * other.dpsi - self.dpsi * other.psi
    }

    fn to_array(self) -> [f64; 2] {
        [self.psi, self.dpsi]
    }

    fn from_array(a: [f64; 2]) -> Self {
        Self::new(a[0], a[1])
    }
}

/// Propagator of `(ψ, ψ′)` over one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
    pub lambda: f64,
}

impl TransferMatrix {
    pub fn determinant(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn apply(&self, y: StateVector) -> StateVector {
        StateVector::new(
            self.m11 * y.psi + self.m12 * y.dpsi,
            self.m21 * y.psi + self.m22 * y.dpsi,
        )
    }
}

/// Polar form `ψ = ρ sin θ`, `ψ′ = ρ cos θ`. The amplitude is kept as `ln ρ`,
/// since it grows like `e^{κx}` in deep gaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruferState {
    pub theta: f64,
    pub log_rho: f64,
}

impl PruferState {
    pub fn new(theta: f64, rho: f64) -> Self {
        assert!(rho > 0.0, "Prüfer amplitude must be positive");
        Self {
            theta,
            log_rho: rho.ln(),
        }
    }

    pub fn rho(&self) -> f64 {
        self.log_rho.exp()
    }

    /// Angle taken in `(−π, π]`.
    pub fn from_state(y: StateVector) -> Self {
        Self::new(y.psi.atan2(y.dpsi), y.norm())
    }

    pub fn to_state(&self) -> StateVector {
        let (s, c) = self.theta.sin_cos();
        StateVector::new(self.rho() * s, self.rho() * c)
    }
}

fn stepper<'a>(
    p: &'a PeriodicPotential,
    lambda: f64,
    tol: f64,
) -> Result<Dopri5<2, impl Fn(f64, &[f64; 2]) -> [f64; 2] + 'a>> {
    Dopri5::new(
        move |x, y: &[f64; 2]| [y[1], (p.eval(x) - lambda) * y[0]],
        tol,
        ErrorScale::StateNorm,
    )
}

/// Propagates `y0` at `x0` to `x1`.
pub fn integrate(
    p: &PeriodicPotential,
    lambda: f64,
    x0: f64,
    x1: f64,
    y0: StateVector,
    tol: f64,
) -> Result<StateVector> {
    let mut s = stepper(p, lambda, tol)?;
    Ok(StateVector::from_array(s.advance(x0, y0.to_array(), x1)?))
}

/// States at every point of `xs`, starting from `y0` at `xs[0]`. The grid may
/// run in either direction but must be monotone.
pub fn integrate_sampled(
    p: &PeriodicPotential,
    lambda: f64,
    xs: &[f64],
    y0: StateVector,
    tol: f64,
) -> Result<Vec<StateVector>> {
    let mut s = stepper(p, lambda, tol)?;
    let mut out = Vec::with_capacity(xs.len());
    let Some(&first) = xs.first() else {
        return Ok(out);
    };
    let mut y = y0.to_array();
    let mut x = first;
    out.push(y0);
    for &xn in &xs[1..] {
        y = s.advance(x, y, xn)?;
        x = xn;
        out.push(StateVector::from_array(y));
    }
    Ok(out)
}

/// Monodromy over `[0, d]` of `p` (including its shift).
pub fn monodromy(p: &PeriodicPotential, lambda: f64, tol: f64) -> Result<TransferMatrix> {
    let d = p.period();
    let c1 = integrate(p, lambda, 0.0, d, StateVector::new(1.0, 0.0), tol)?;
    let c2 = integrate(p, lambda, 0.0, d, StateVector::new(0.0, 1.0), tol)?;
    Ok(TransferMatrix {
        m11: c1.psi,
        m12: c2.psi,
        m21: c1.dpsi,
        m22: c2.dpsi,
        lambda,
    })
}

/// `Δ(λ) = tr M(λ)`; `λ` lies in the spectrum iff `|Δ(λ)| ≤ 2`.
pub fn discriminant(p: &PeriodicPotential, lambda: f64, tol: f64) -> Result<f64> {
    Ok(monodromy(p, lambda, tol)?.trace())
}

fn prufer_rhs(p: &PeriodicPotential, lambda: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
    move |x, y: &[f64; 2]| {
        let (s, c) = y[0].sin_cos();
        let q = lambda - p.eval(x) - 1.0;
        [1.0 + q * s * s, -q * s * c]
    }
}

/// Integrates the Prüfer system; `θ` is an ODE variable, hence continuous.
pub fn prufer_integrate(
    p: &PeriodicPotential,
    lambda: f64,
    x0: f64,
    x1: f64,
    init: PruferState,
    tol: f64,
) -> Result<PruferState> {
    let mut s = Dopri5::new(prufer_rhs(p, lambda), tol, ErrorScale::Mixed)?;
    let y = s.advance(x0, [init.theta, init.log_rho], x1)?;
    Ok(PruferState {
        theta: y[0],
        log_rho: y[1],
    })
}

/// Prüfer states at every point of `xs`, starting from `init` at `xs[0]`.
pub fn prufer_sampled(
    p: &PeriodicPotential,
    lambda: f64,
    xs: &[f64],
    init: PruferState,
    tol: f64,
) -> Result<Vec<PruferState>> {
    let mut s = Dopri5::new(prufer_rhs(p, lambda), tol, ErrorScale::Mixed)?;
    let mut out = Vec::with_capacity(xs.len());
    let Some(&first) = xs.first() else {
        return Ok(out);
    };
    let mut y = [init.theta, init.log_rho];
    let mut x = first;
    out.push(init);
    for &xn in &xs[1..] {
        y = s.advance(x, y, xn)?;
        x = xn;
        out.push(PruferState {
            theta: y[0],
            log_rho: y[1],
        });
    }
    Ok(out)
}

/// Angle-only Prüfer integration, used for eigenvalue counting.
pub fn prufer_angle(
    p: &PeriodicPotential,
    lambda: f64,
    x0: f64,
    x1: f64,
    theta0: f64,
    tol: f64,
) -> Result<f64> {
    let rhs = move |x: f64, y: &[f64; 1]| {
        let s = y[0].sin();
        [1.0 + (lambda - p.eval(x) - 1.0) * s * s]
    };
    let mut s = Dopri5::new(rhs, tol, ErrorScale::Mixed)?;
    Ok(s.advance(x0, [theta0], x1)?[0])
}

/// Initial angle for Dirichlet data `(0, 1)`.
pub const DIRICHLET_ANGLE: f64 = 0.0;
/// Initial angle for Neumann data `(1, 0)`.
pub const NEUMANN_ANGLE: f64 = FRAC_PI_2;
