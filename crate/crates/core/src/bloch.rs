//! Bloch solutions decaying into one half-line, their decay rate, and the
//! logarithmic-derivative ratios `R±(λ) = ψ±′(0)/ψ±(0)` and `R(t;λ)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{self, StateVector, TransferMatrix};
use crate::potential::PeriodicPotential;
use crate::spectrum::SpectralGap;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// Decays as `x → +∞`.
    Right,
    /// Decays as `x → −∞`.
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FloquetSign {
    Periodic,
    AntiPeriodic,
}

/// Solution of `−ψ″ + Vψ = λψ` that decays into one half-line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayingBlochState {
    pub lambda: f64,
    pub side: Side,
    /// `(ψ(0), ψ′(0))` with unit Euclidean norm.
    pub init: StateVector,
    /// Decay rate, `−ln|multiplier| / d`.
    pub kappa: f64,
    /// Factor by which the state shrinks per period in the decaying direction.
    pub multiplier: f64,
    pub sign: FloquetSign,
    pub period: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioValue {
    pub lambda: f64,
    pub value: f64,
    pub is_pole: bool,
}

/// Lower truncation of the semi-infinite gap: `min V − max(25, 10‖V‖∞)`.
pub fn semi_infinite_cutoff(p: &PeriodicPotential) -> f64 {
    p.lower_bound() - (10.0 * p.sup_bound()).max(25.0)
}

/// Eigenvector of `m` for the eigenvalue `r`, from whichever row of `M − rI`
/// is larger.
fn eigenvector(m: &TransferMatrix, r: f64) -> StateVector {
    let a = StateVector::new(m.m12, r - m.m11);
    let b = StateVector::new(r - m.m22, m.m21);
    let v = if a.norm() >= b.norm() { a } else { b };
    let v = v.normalized();
    if v.psi < 0.0 || (v.psi == 0.0 && v.dpsi < 0.0) {
        v.scaled(-1.0)
    } else {
        v
    }
}

/// Multipliers `(ρ_small, ρ_big)` of a monodromy matrix in a gap.
fn multipliers(m: &TransferMatrix, margin: f64) -> Result<(f64, f64)> {
    let delta = m.trace();
    if !(delta.abs() > 2.0 + margin) {
        return Err(Error::NotInGap {
            lambda: m.lambda,
            discriminant: delta,
        });
    }
    let big = 0.5 * (delta + delta.signum() * (delta * delta - 4.0).sqrt());
    Ok((1.0 / big, big))
}

/// Decaying state from a precomputed monodromy matrix of `p`.
pub fn decaying_state_from_monodromy(
    p: &PeriodicPotential,
    m: &TransferMatrix,
    side: Side,
    tol: &Tolerances,
) -> Result<DecayingBlochState> {
    let (small, big) = multipliers(m, tol.ratio_margin)?;
    let d = p.period();
    let init = match side {
        Side::Right => eigenvector(m, small),
        Side::Left if p.shift() == 0.0 => {
            // even potential: ψ₋(x) = ψ₊(−x)
            let r = eigenvector(m, small);
            StateVector::new(r.psi, -r.dpsi)
        }
        Side::Left => eigenvector(m, big),
    };
    Ok(DecayingBlochState {
        lambda: m.lambda,
        side,
        init,
        kappa: big.abs().ln() / d,
        multiplier: small,
        sign: if big > 0.0 {
            FloquetSign::Periodic
        } else {
            FloquetSign::AntiPeriodic
        },
        period: d,
    })
}

/// Decaying Bloch state at the origin of `p` (shift included).
pub fn decaying_state(
    p: &PeriodicPotential,
    lambda: f64,
    side: Side,
    tol: &Tolerances,
) -> Result<DecayingBlochState> {
    let m = floquet::monodromy(p, lambda, tol.integrator)?;
    decaying_state_from_monodromy(p, &m, side, tol)
}

fn ratio_of(state: &DecayingBlochState, tol: &Tolerances) -> RatioValue {
    RatioValue {
        lambda: state.lambda,
        value: state.init.dpsi / state.init.psi,
        is_pole: state.init.psi.abs() < tol.pole_threshold,
    }
}

/// `R±(λ) = ψ±′(0)/ψ±(0)`.
pub fn ratio(p: &PeriodicPotential, lambda: f64, side: Side, tol: &Tolerances) -> Result<RatioValue> {
    Ok(ratio_of(&decaying_state(p, lambda, side, tol)?, tol))
}

/// `R(t;λ) = ψ₊′(t)/ψ₊(t)` for the right-decaying state `ψ₊` of `p`.
///
/// The decaying solution of `V(· + t)` is `ψ₊(· + t)` up to scale, so the value
/// comes from the monodromy of the shifted potential rather than from
/// propagating `ψ₊` forward, which would amplify the growing solution.
pub fn ratio_shifted(p: &PeriodicPotential, t: f64, lambda: f64, tol: &Tolerances) -> Result<RatioValue> {
    let q = p.unshifted().shifted(t);
    let m = floquet::monodromy(&q, lambda, tol.integrator)?;
    Ok(ratio_of(&decaying_state_from_monodromy(&q, &m, Side::Right, tol)?, tol))
}

/// Uniform samples of `R(t;·)` across a gap plus the located pole, if any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioProfile {
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
    pub values: Vec<RatioValue>,
    pub pole: Option<f64>,
}

/// Finite search interval of a gap: the semi-infinite gap is cut at `cutoff`.
pub(crate) fn search_interval(gap: &SpectralGap, cutoff: f64) -> Result<(f64, f64)> {
    let lo = gap.lower_or(cutoff);
    if !(lo < gap.upper) {
        return Err(Error::InvalidArgument(format!(
            "cutoff {cutoff} is not below the gap's upper edge {}",
            gap.upper
        )));
    }
    Ok((lo, gap.upper))
}

/// Probe points accumulating at each finite gap edge, down to `margin` away.
pub(crate) fn edge_probes(lo: f64, hi: f64, lo_is_edge: bool, margin: f64) -> Vec<f64> {
    let w = hi - lo;
    let mut out = Vec::new();
    let mut delta = w / 8.0;
    while delta > margin {
        if lo_is_edge {
            out.push(lo + delta);
        }
        out.push(hi - delta);
        delta *= 0.5;
    }
    if lo_is_edge {
        out.push(lo + margin);
    }
    out.push(hi - margin);
    out
}

/// Sorted λ grid inside `(lo, hi)`: uniform points plus probes accumulating at
/// the finite edges. The lower end itself is included when it is a cutoff
/// rather than an edge.
pub(crate) fn gap_grid(lo: f64, hi: f64, lo_is_edge: bool, uniform: usize, margin: f64) -> Vec<f64> {
    let mut xs: Vec<f64> = (1..=uniform)
        .map(|i| lo + (hi - lo) * i as f64 / (uniform + 1) as f64)
        .collect();
    xs.extend(edge_probes(lo, hi, lo_is_edge, margin));
    if !lo_is_edge {
        xs.push(lo);
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// `R(t;λ)` on a λ grid; `None` where the ratio is refused because `λ` is
/// too close to a band for the discriminant margin.
pub(crate) fn sample_ratios(
    p: &PeriodicPotential,
    t: f64,
    xs: &[f64],
    tol: &Tolerances,
) -> Result<Vec<Option<RatioValue>>> {
    xs.par_iter()
        .map(|&lam| match ratio_shifted(p, t, lam, tol) {
            Ok(r) => Ok(Some(r)),
            Err(Error::NotInGap { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

/// Samples of `R(t;·)` on [`gap_grid`], refused points dropped.
pub(crate) fn gap_samples(
    p: &PeriodicPotential,
    t: f64,
    lo: f64,
    hi: f64,
    lo_is_edge: bool,
    uniform: usize,
    tol: &Tolerances,
) -> Result<Vec<RatioValue>> {
    let xs = gap_grid(lo, hi, lo_is_edge, uniform, tol.edge_margin);
    Ok(sample_ratios(p, t, &xs, tol)?.into_iter().flatten().collect())
}

/// Locates the pole of `R(t;·)` between two samples where `R` drops. `R`
/// increases on both sides of the pole and every value left of it exceeds
/// every value right of it.
pub(crate) fn refine_pole(
    p: &PeriodicPotential,
    t: f64,
    left: RatioValue,
    right: RatioValue,
    tol: &Tolerances,
) -> Result<f64> {
    let (mut lo, mut hi) = (left.lambda, right.lambda);
    let r_lo = left.value;
    while hi - lo > tol.bisection {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let r = ratio_shifted(p, t, mid, tol)?;
        if r.is_pole {
            return Ok(mid);
        }
        if r.value > r_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Index `i` such that the pole lies between samples `i` and `i + 1`.
pub(crate) fn pole_bracket(samples: &[RatioValue], gap_index: usize) -> Result<Option<usize>> {
    let drops: Vec<usize> = samples
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].value < w[0].value)
        .map(|(i, _)| i)
        .collect();
    match drops.len() {
        0 => Ok(None),
        1 => Ok(Some(drops[0])),
        count => Err(Error::TooManyPoles { gap_index, count }),
    }
}

/// `R(t;·)` on `samples` uniform points strictly inside `gap`. The pole, if
/// any, is located from the uniform samples together with probes that
/// accumulate at the gap edges, and refined by bisection.
pub fn ratio_profile(
    p: &PeriodicPotential,
    gap: &SpectralGap,
    t: f64,
    samples: usize,
    cutoff: f64,
    tol: &Tolerances,
) -> Result<RatioProfile> {
    if samples == 0 {
        return Err(Error::InvalidArgument("profile needs at least one sample".into()));
    }
    let (lo, hi) = search_interval(gap, cutoff)?;
    let values: Vec<RatioValue> = (1..=samples)
        .into_par_iter()
        .map(|i| ratio_shifted(p, t, lo + (hi - lo) * i as f64 / (samples + 1) as f64, tol))
        .collect::<Result<_>>()?;
    let dense = gap_samples(p, t, lo, hi, !gap.is_semi_infinite(), samples, tol)?;
    let pole = match pole_bracket(&dense, gap.index)? {
        Some(i) => Some(refine_pole(p, t, dense[i], dense[i + 1], tol)?),
        None => None,
    };
    Ok(RatioProfile {
        t,
        lower: lo,
        upper: hi,
        values,
        pole,
    })
}
