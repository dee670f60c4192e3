//! Spectrum of the periodic operator: Dirichlet and Neumann eigenpairs on one
//! period cell, band edges as roots of `Δ(λ) ∓ 2`, gaps and their polarity.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{self, StateVector, DIRICHLET_ANGLE, NEUMANN_ANGLE};
use crate::potential::{
    monotonicity_on_half_period, MonotonicityReport, PeriodicPotential,
    DEFAULT_MONOTONICITY_GRID,
};
use crate::roots;
use crate::tolerances::Tolerances;

/// Default number of sample intervals per period for eigenfunctions.
pub const DEFAULT_EIGENFUNCTION_INTERVALS: usize = 4096;

/// Grid size used to fit the quadratic envelope in [`vbar_condition`].
pub const VBAR_GRID: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    DN,
    ND,
}

impl Polarity {
    pub fn opposite(self) -> Self {
        match self {
            Polarity::DN => Polarity::ND,
            Polarity::ND => Polarity::DN,
        }
    }
}

/// Symmetry with respect to reflection about `d/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HalfPeriodParity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Periodicity {
    Periodic,
    AntiPeriodic,
}

/// Symmetries of the `k`-th Dirichlet or Neumann eigenfunction of an even
/// potential.
pub fn expected_symmetry(kind: BoundaryKind, index: usize) -> (HalfPeriodParity, Periodicity) {
    let odd_index = index % 2 == 1;
    match (kind, odd_index) {
        (BoundaryKind::Dirichlet, true) => (HalfPeriodParity::Even, Periodicity::AntiPeriodic),
        (BoundaryKind::Dirichlet, false) => (HalfPeriodParity::Odd, Periodicity::Periodic),
        (BoundaryKind::Neumann, true) => (HalfPeriodParity::Even, Periodicity::Periodic),
        (BoundaryKind::Neumann, false) => (HalfPeriodParity::Odd, Periodicity::AntiPeriodic),
    }
}

/// One gap `Gₙ = (s₂ₙ, s₂ₙ₊₁)`; `G₀ = (−∞, s₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGap {
    pub index: usize,
    /// `−∞` for the semi-infinite gap.
    pub lower: f64,
    pub upper: f64,
    /// `None` for the semi-infinite gap.
    pub lower_edge_kind: Option<BoundaryKind>,
    pub upper_edge_kind: BoundaryKind,
    pub polarity: Polarity,
    /// False when the polarity is only numerically determined (gaps above
    /// `G₁`, or `G₁` of a potential that is not monotone on the half period).
    pub theorem_backed: bool,
}

impl SpectralGap {
    pub fn is_semi_infinite(&self) -> bool {
        self.lower == f64::NEG_INFINITY
    }

    pub fn contains(&self, lambda: f64) -> bool {
        lambda > self.lower && lambda < self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// The same gap for the potential `V + c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            lower: self.lower + c,
            upper: self.upper + c,
            ..*self
        }
    }

    /// Open intersection with another gap, if nonempty.
    pub fn overlap(&self, other: &Self) -> Option<(f64, f64)> {
        let lo = self.lower.max(other.lower);
        let hi = self.upper.min(other.upper);
        (lo < hi).then_some((lo, hi))
    }

    /// Lower end, with the semi-infinite gap truncated at `cutoff`.
    pub fn lower_or(&self, cutoff: f64) -> f64 {
        if self.is_semi_infinite() {
            cutoff
        } else {
            self.lower
        }
    }
}

/// Dirichlet or Neumann eigenpair on `[0, d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEigenpair {
    pub kind: BoundaryKind,
    /// 1-based.
    pub index: usize,
    pub lambda: f64,
    pub period: f64,
    /// `ψ` on the uniform grid `x_i = d·i/n`, `i = 0..=n`, normalized to
    /// `max|ψ| = 1`.
    pub samples: Vec<f64>,
    /// `ψ′` on the same grid and with the same normalization.
    pub derivative_samples: Vec<f64>,
    pub parity_about_half_period: HalfPeriodParity,
    pub periodicity: Periodicity,
}

impl BoundaryEigenpair {
    pub fn intervals(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn x(&self, i: usize) -> f64 {
        self.period * i as f64 / self.intervals() as f64
    }
}

fn target_angle(kind: BoundaryKind, k: usize) -> f64 {
    match kind {
        BoundaryKind::Dirichlet => k as f64 * PI,
        BoundaryKind::Neumann => NEUMANN_ANGLE + (k as f64 - 1.0) * PI,
    }
}

fn start_angle(kind: BoundaryKind) -> f64 {
    match kind {
        BoundaryKind::Dirichlet => DIRICHLET_ANGLE,
        BoundaryKind::Neumann => NEUMANN_ANGLE,
    }
}

fn start_state(kind: BoundaryKind) -> StateVector {
    match kind {
        BoundaryKind::Dirichlet => StateVector::new(0.0, 1.0),
        BoundaryKind::Neumann => StateVector::new(1.0, 0.0),
    }
}

/// Prüfer angle at `x = d` for the given boundary data at `x = 0`.
fn end_angle(p: &PeriodicPotential, kind: BoundaryKind, lambda: f64, tol: f64) -> Result<f64> {
    floquet::prufer_angle(p, lambda, 0.0, p.period(), start_angle(kind), tol)
}

/// Number of Dirichlet (Neumann) eigenvalues strictly below `lambda`.
pub fn count_below(
    p: &PeriodicPotential,
    kind: BoundaryKind,
    lambda: f64,
    tol: &Tolerances,
) -> Result<usize> {
    let theta = end_angle(p, kind, lambda, tol.integrator)?;
    let shifted = theta - start_angle(kind);
    Ok(match kind {
        BoundaryKind::Dirichlet => (theta / PI).floor().max(0.0) as usize,
        BoundaryKind::Neumann => ((shifted / PI).floor() + 1.0).max(0.0) as usize,
    })
}

/// `k`-th eigenvalue (1-based) of the given kind, searched above `floor`.
pub fn boundary_eigenvalue(
    p: &PeriodicPotential,
    kind: BoundaryKind,
    k: usize,
    floor: Option<f64>,
    tol: &Tolerances,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("eigenvalue index is 1-based".into()));
    }
    let target = target_angle(kind, k);
    let g = |lam: f64| end_angle(p, kind, lam, tol.integrator).map(|th| th - target);

    let free = match kind {
        BoundaryKind::Dirichlet => (k as f64 * PI / p.period()).powi(2),
        BoundaryKind::Neumann => ((k as f64 - 1.0) * PI / p.period()).powi(2),
    };
    let ceiling = free + p.upper_bound() + 1.0;
    let mut lo = p.lower_bound() - 1.0;
    if let Some(f) = floor {
        lo = lo.max(f);
    }
    let mut glo = g(lo)?;
    if glo >= 0.0 {
        // the floor hint was not below the eigenvalue; fall back to the safe bound
        lo = p.lower_bound() - 1.0;
        glo = g(lo)?;
    }
    let ghi = g(ceiling)?;
    if !(glo < 0.0 && ghi > 0.0) {
        return Err(Error::BracketFailure {
            what: format!("{kind:?} eigenvalue {k}"),
            ceiling,
        });
    }
    let bracket = 1e-3 * tol.bisection;
    roots::illinois_root(g, lo, ceiling, glo, ghi, bracket)
}

/// First `count` eigenvalues of the given kind.
pub fn boundary_eigenvalues(
    p: &PeriodicPotential,
    kind: BoundaryKind,
    count: usize,
    tol: &Tolerances,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    for k in 1..=count {
        let floor = out.last().copied();
        out.push(boundary_eigenvalue(p, kind, k, floor, tol)?);
    }
    Ok(out)
}

/// All eigenvalues of the given kind that are `≤ lambda_max`.
pub fn boundary_eigenvalues_below(
    p: &PeriodicPotential,
    kind: BoundaryKind,
    lambda_max: f64,
    tol: &Tolerances,
) -> Result<Vec<f64>> {
    let n = count_below(p, kind, lambda_max, tol)?;
    let mut vals = boundary_eigenvalues(p, kind, n, tol)?;
    // the count is taken strictly below, an eigenvalue sitting at lambda_max is
    // picked up by looking one further
    let next = boundary_eigenvalue(p, kind, n + 1, vals.last().copied(), tol)?;
    if next <= lambda_max {
        vals.push(next);
    }
    Ok(vals)
}

fn eigenpair(
    p: &PeriodicPotential,
    kind: BoundaryKind,
    index: usize,
    lambda: f64,
    intervals: usize,
    tol: &Tolerances,
) -> Result<BoundaryEigenpair> {
    let d = p.period();
    let xs: Vec<f64> = (0..=intervals).map(|i| d * i as f64 / intervals as f64).collect();
    let states = floquet::integrate_sampled(p, lambda, &xs, start_state(kind), tol.integrator)?;
    let amp = states.iter().fold(0.0f64, |m, s| m.max(s.psi.abs()));
    let samples: Vec<f64> = states.iter().map(|s| s.psi / amp).collect();
    let derivative_samples: Vec<f64> = states.iter().map(|s| s.dpsi / amp).collect();

    let n = intervals;
    let (mut e_even, mut e_odd) = (0.0f64, 0.0f64);
    for i in 0..=n {
        e_even = e_even.max((samples[i] - samples[n - i]).abs());
        e_odd = e_odd.max((samples[i] + samples[n - i]).abs());
    }
    let parity = if e_even <= e_odd {
        HalfPeriodParity::Even
    } else {
        HalfPeriodParity::Odd
    };
    let ratio = match kind {
        BoundaryKind::Dirichlet => derivative_samples[n] * derivative_samples[0],
        BoundaryKind::Neumann => samples[n] * samples[0],
    };
    let periodicity = if ratio > 0.0 {
        Periodicity::Periodic
    } else {
        Periodicity::AntiPeriodic
    };
    Ok(BoundaryEigenpair {
        kind,
        index,
        lambda,
        period: d,
        samples,
        derivative_samples,
        parity_about_half_period: parity,
        periodicity,
    })
}

fn eigenpairs(
    p: &PeriodicPotential,
    kind: BoundaryKind,
    count: usize,
    intervals: usize,
    tol: &Tolerances,
) -> Result<Vec<BoundaryEigenpair>> {
    let p = p.unshifted();
    let values = boundary_eigenvalues(&p, kind, count, tol)?;
    values
        .into_iter()
        .enumerate()
        .map(|(i, lam)| eigenpair(&p, kind, i + 1, lam, intervals, tol))
        .collect()
}

/// First `count` Dirichlet eigenpairs on `[0, d]`, sampled on 4096 intervals.
pub fn dirichlet_eigenvalues(
    p: &PeriodicPotential,
    count: usize,
    tol: &Tolerances,
) -> Result<Vec<BoundaryEigenpair>> {
    eigenpairs(p, BoundaryKind::Dirichlet, count, DEFAULT_EIGENFUNCTION_INTERVALS, tol)
}

/// First `count` Neumann eigenpairs on `[0, d]`, sampled on 4096 intervals.
pub fn neumann_eigenvalues(
    p: &PeriodicPotential,
    count: usize,
    tol: &Tolerances,
) -> Result<Vec<BoundaryEigenpair>> {
    eigenpairs(p, BoundaryKind::Neumann, count, DEFAULT_EIGENFUNCTION_INTERVALS, tol)
}

/// Eigenpairs with a caller-chosen sample resolution.
pub fn boundary_eigenpairs(
    p: &PeriodicPotential,
    kind: BoundaryKind,
    count: usize,
    intervals: usize,
    tol: &Tolerances,
) -> Result<Vec<BoundaryEigenpair>> {
    if intervals < 2 || intervals % 2 == 1 {
        return Err(Error::InvalidArgument(
            "sample intervals must be even and at least 2".into(),
        ));
    }
    eigenpairs(p, kind, count, intervals, tol)
}

/// Band edge labeled by the boundary problem it solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandEdge {
    pub lambda: f64,
    pub kind: BoundaryKind,
    /// Index `k` of the matching `μ_k` or `ν_k`.
    pub index: usize,
}

/// Everything [`band_edges`], [`gaps`] and [`alpha_star`] derive from one scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandStructure {
    pub lambda_max: f64,
    pub dirichlet: Vec<f64>,
    pub neumann: Vec<f64>,
    /// `s₁ < s₂ ≤ s₃ < …` up to `lambda_max`, closed gaps removed.
    pub edges: Vec<f64>,
    /// `edges` with the boundary problem each one solves.
    pub labeled_edges: Vec<BandEdge>,
    pub gaps: Vec<SpectralGap>,
    /// Open gaps whose edge labels were ambiguous and which were dropped.
    pub ambiguous_gaps: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Region {
    Upper,
    Lower,
    Band,
}

fn region(delta: f64) -> Region {
    if delta > 2.0 {
        Region::Upper
    } else if delta < -2.0 {
        Region::Lower
    } else {
        Region::Band
    }
}

impl BandStructure {
    pub fn compute(p: &PeriodicPotential, lambda_max: f64, tol: &Tolerances) -> Result<Self> {
        let p = p.unshifted();
        let pad = 0.1;
        let ceiling = lambda_max + pad;
        let dirichlet = boundary_eigenvalues_below(&p, BoundaryKind::Dirichlet, ceiling, tol)?;
        let neumann = boundary_eigenvalues_below(&p, BoundaryKind::Neumann, ceiling, tol)?;
        let s1 = neumann
            .first()
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!(
                "lambda_max {lambda_max} lies below the spectrum"
            )))?;
        if lambda_max < s1 {
            return Err(Error::InvalidArgument(format!(
                "lambda_max {lambda_max} lies below the spectrum (s1 = {s1})"
            )));
        }

        // scan points strictly between consecutive Dirichlet/Neumann values
        let mut knots: Vec<f64> = dirichlet.iter().chain(&neumann).copied().collect();
        knots.push(ceiling);
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let mut samples = vec![s1 - 1.0];
        for w in knots.windows(2) {
            let len = w[1] - w[0];
            if len <= 0.0 {
                continue;
            }
            let step = (len / 4.0).min(0.05);
            let m = (len / step).ceil().max(4.0) as usize;
            samples.extend((1..m).map(|j| w[0] + len * j as f64 / m as f64));
        }
        let deltas: Vec<f64> = samples
            .par_iter()
            .map(|&lam| floquet::discriminant(&p, lam, tol.integrator))
            .collect::<Result<_>>()?;

        let mut raw_edges = Vec::new();
        for i in 1..samples.len() {
            let (ra, rb) = (region(deltas[i - 1]), region(deltas[i]));
            if ra == rb {
                continue;
            }
            if ra != Region::Band && rb != Region::Band {
                return Err(Error::BracketFailure {
                    what: format!("band between {} and {}", samples[i - 1], samples[i]),
                    ceiling,
                });
            }
            let target = if ra == Region::Upper || rb == Region::Upper {
                2.0
            } else {
                -2.0
            };
            let f = |lam: f64| floquet::discriminant(&p, lam, tol.integrator).map(|d| d - target);
            let root = roots::illinois_root(
                f,
                samples[i - 1],
                samples[i],
                deltas[i - 1] - target,
                deltas[i] - target,
                1e-3 * tol.bisection,
            )?;
            raw_edges.push(root);
        }

        // certify and label every edge
        let label = |s: f64| -> Result<BandEdge> {
            let nearest = |vals: &[f64]| {
                vals.iter()
                    .enumerate()
                    .map(|(i, &v)| (i + 1, v, (v - s).abs()))
                    .min_by(|a, b| a.2.total_cmp(&b.2))
            };
            let d = nearest(&dirichlet);
            let n = nearest(&neumann);
            let best = match (d, n) {
                (Some(d), Some(n)) if d.2 < n.2 => (BoundaryKind::Dirichlet, d),
                (Some(d), None) => (BoundaryKind::Dirichlet, d),
                (_, Some(n)) => (BoundaryKind::Neumann, n),
                (None, None) => unreachable!("neumann list is nonempty"),
            };
            let scale = s.abs().max(1.0);
            if best.1 .2 > tol.edge_certify * scale {
                return Err(Error::EdgeCertification {
                    edge: s,
                    nearest: best.1 .1,
                    tol: tol.edge_certify * scale,
                });
            }
            // the boundary eigenvalue is better conditioned than the root of
            // Δ ∓ 2 near a closed gap, so report it
            Ok(BandEdge {
                lambda: best.1 .1,
                kind: best.0,
                index: best.1 .0,
            })
        };

        let labeled: Vec<BandEdge> = raw_edges.iter().map(|&s| label(s)).collect::<Result<_>>()?;
        let keep = |s: f64| s <= lambda_max + 1e-9 * lambda_max.abs().max(1.0);
        let label_tol = |s: f64| 1e-6 * s.abs().max(1.0);
        let ambiguous = |s: f64| {
            dirichlet.iter().any(|v| (v - s).abs() < label_tol(s))
                && neumann.iter().any(|v| (v - s).abs() < label_tol(s))
        };
        let monotone =
            monotonicity_on_half_period(&p, DEFAULT_MONOTONICITY_GRID).is_strictly_monotone();

        // s₁ first, then gap edges in pairs
        let s1_edge = labeled[0];
        let mut edges = vec![s1_edge];
        let mut gaps = vec![SpectralGap {
            index: 0,
            lower: f64::NEG_INFINITY,
            upper: s1_edge.lambda,
            lower_edge_kind: None,
            upper_edge_kind: s1_edge.kind,
            polarity: Polarity::DN,
            theorem_backed: true,
        }];
        let mut ambiguous_gaps = Vec::new();
        for (n, pair) in labeled[1..].chunks(2).enumerate() {
            let gap_index = n + 1;
            let lo = pair[0];
            if !keep(lo.lambda) {
                break;
            }
            let Some(&hi) = pair.get(1) else {
                // partner lies above the scanned range
                edges.push(lo);
                break;
            };
            if hi.lambda - lo.lambda < tol.closed_gap {
                continue;
            }
            edges.push(lo);
            if !keep(hi.lambda) {
                break;
            }
            edges.push(hi);
            if ambiguous(lo.lambda) || ambiguous(hi.lambda) || lo.kind == hi.kind {
                ambiguous_gaps.push((lo.lambda, hi.lambda));
                continue;
            }
            let polarity = if lo.kind == BoundaryKind::Dirichlet {
                Polarity::DN
            } else {
                Polarity::ND
            };
            gaps.push(SpectralGap {
                index: gap_index,
                lower: lo.lambda,
                upper: hi.lambda,
                lower_edge_kind: Some(lo.kind),
                upper_edge_kind: hi.kind,
                polarity,
                theorem_backed: gap_index == 1 && monotone,
            });
        }
        Ok(Self {
            lambda_max,
            dirichlet: dirichlet.into_iter().filter(|&v| v <= ceiling).collect(),
            neumann: neumann.into_iter().filter(|&v| v <= ceiling).collect(),
            edges: edges.iter().map(|e| e.lambda).collect(),
            labeled_edges: edges,
            gaps,
            ambiguous_gaps,
        })
    }

    /// Bands `[s₂ₙ₋₁, s₂ₙ]` with both edges at or below `lambda_max`.
    pub fn complete_bands(&self) -> Vec<(f64, f64)> {
        self.edges
            .chunks_exact(2)
            .map(|c| (c[0], c[1]))
            .collect()
    }
}

/// Band edges `s₁ < s₂ ≤ s₃ < …` up to `lambda_max`.
pub fn band_edges(p: &PeriodicPotential, lambda_max: f64, tol: &Tolerances) -> Result<Vec<f64>> {
    Ok(BandStructure::compute(p, lambda_max, tol)?.edges)
}

/// Semi-infinite gap followed by every open gap whose upper edge is `≤ lambda_max`.
pub fn gaps(p: &PeriodicPotential, lambda_max: f64, tol: &Tolerances) -> Result<Vec<SpectralGap>> {
    Ok(BandStructure::compute(p, lambda_max, tol)?.gaps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaStar {
    pub value: f64,
    pub bands_used: usize,
}

/// Smallest width among complete bands below `lambda_max`. Without any complete
/// band (every finite gap closed, as for `V ≡ 0`) the value is 0.
pub fn alpha_star(p: &PeriodicPotential, lambda_max: f64, tol: &Tolerances) -> Result<AlphaStar> {
    let bands = BandStructure::compute(p, lambda_max, tol)?.complete_bands();
    let value = bands
        .iter()
        .map(|(a, b)| b - a)
        .fold(f64::INFINITY, f64::min);
    Ok(if bands.is_empty() {
        AlphaStar {
            value: 0.0,
            bands_used: 0,
        }
    } else {
        AlphaStar {
            value,
            bands_used: bands.len(),
        }
    })
}

/// Monotonicity of a sampled eigenfunction on `[0, d/2]`, with the extremum
/// refined by a quadratic fit through the three samples around it.
pub fn eigenfunction_monotonicity(e: &BoundaryEigenpair) -> Result<MonotonicityReport> {
    let n = e.intervals();
    if n < 1024 || e.derivative_samples.len() != e.samples.len() {
        return Err(Error::InvalidArgument(
            "eigenfunction needs at least 1024 sample intervals".into(),
        ));
    }
    let half = n / 2;
    let dmax = e.derivative_samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // samples are normalized to max|ψ| = 1, so 1/d is the natural slope unit
    let noise = 1e-9 * dmax.max(1.0 / e.period);
    let signed: Vec<(usize, f64)> = (1..half)
        .map(|i| (i, e.derivative_samples[i]))
        .filter(|(_, v)| v.abs() > noise)
        .collect();
    if signed.is_empty() {
        return Ok(MonotonicityReport {
            increasing_on_half_period: false,
            decreasing_on_half_period: false,
            extremum_location: None,
            degenerate: true,
        });
    }
    let changes: Vec<usize> = signed
        .windows(2)
        .filter(|w| (w[0].1 > 0.0) != (w[1].1 > 0.0))
        .map(|w| w[0].0)
        .collect();
    match changes.len() {
        0 => {
            let up = signed[0].1 > 0.0;
            Ok(MonotonicityReport {
                increasing_on_half_period: up,
                decreasing_on_half_period: !up,
                extremum_location: None,
                degenerate: false,
            })
        }
        1 => {
            let i = changes[0];
            let psi = &e.samples;
            // centre on the sample with the more extreme value
            let maximum = e.derivative_samples[i] > 0.0;
            let j = if (psi[i + 1] > psi[i]) == maximum { i + 1 } else { i };
            let j = j.clamp(1, n - 1);
            let h = e.period / n as f64;
            let denom = psi[j + 1] - 2.0 * psi[j] + psi[j - 1];
            let offset = if denom != 0.0 {
                (0.5 * h * (psi[j - 1] - psi[j + 1]) / denom).clamp(-h, h)
            } else {
                0.0
            };
            Ok(MonotonicityReport {
                increasing_on_half_period: false,
                decreasing_on_half_period: false,
                extremum_location: Some(e.x(j) + offset),
                degenerate: false,
            })
        }
        count => Err(Error::MultipleMonotonicityChanges { count }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VbarCase {
    /// `V` increasing on `[0, d/2]`: `V̄ = β + (α−β)(2x/d − 1)²`, `β = V(d/2)`.
    Increasing,
    /// `V` decreasing on `[0, d/2]`: `V̄ = β + (α−β)(2x/d)²`, `β = V(0)`.
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VbarReport {
    pub case: VbarCase,
    pub beta: f64,
    /// Smallest `α` with `V ≤ V̄` on the grid.
    pub alpha: f64,
    /// `(β − α)d²`.
    pub gamma: f64,
    pub threshold: f64,
    pub satisfied: bool,
}

/// `80(13 − 2√37)`.
pub fn vbar_threshold() -> f64 {
    80.0 * (13.0 - 2.0 * 37f64.sqrt())
}

/// Fits the quadratic envelope `V̄ ≥ V` on `[0, d/2]` with the largest
/// `γ = (β − α)d²` and compares it with `80(13 − 2√37)`.
pub fn vbar_condition(p: &PeriodicPotential) -> Result<VbarReport> {
    let p = p.unshifted();
    let report = monotonicity_on_half_period(&p, DEFAULT_MONOTONICITY_GRID);
    let case = if report.increasing_on_half_period {
        VbarCase::Increasing
    } else if report.decreasing_on_half_period {
        VbarCase::Decreasing
    } else {
        return Err(Error::NonMonotonePotential);
    };
    let d = p.period();
    let beta = match case {
        VbarCase::Increasing => p.eval(0.5 * d),
        VbarCase::Decreasing => p.eval(0.0),
    };
    // V ≤ β + (α − β)u  ⇔  α ≥ β + (V − β)/u  wherever u > 0
    let mut alpha = f64::NEG_INFINITY;
    for i in 0..=VBAR_GRID {
        let x = 0.5 * d * i as f64 / VBAR_GRID as f64;
        let u = match case {
            VbarCase::Increasing => (2.0 * x / d - 1.0).powi(2),
            VbarCase::Decreasing => (2.0 * x / d).powi(2),
        };
        if u > 0.0 {
            alpha = alpha.max(beta + (p.eval(x) - beta) / u);
        }
    }
    let gamma = (beta - alpha) * d * d;
    let threshold = vbar_threshold();
    Ok(VbarReport {
        case,
        beta,
        alpha,
        gamma,
        threshold,
        satisfied: gamma > threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn zero() -> PeriodicPotential {
        PeriodicPotential::zero(10.0).unwrap()
    }

    fn sin2() -> PeriodicPotential {
        PeriodicPotential::new(10.0, vec![0.5, -0.5]).unwrap()
    }

    fn cos2() -> PeriodicPotential {
        PeriodicPotential::new(10.0, vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn free_dirichlet_and_neumann() {
        let mu = boundary_eigenvalues(&zero(), BoundaryKind::Dirichlet, 4, &tol()).unwrap();
        for (k, m) in mu.iter().enumerate() {
            let want = ((k + 1) as f64 * PI / 10.0).powi(2);
            assert!((m - want).abs() < 1e-9, "{m} {want}");
        }
        let nu = boundary_eigenvalues(&zero(), BoundaryKind::Neumann, 3, &tol()).unwrap();
        for (k, v) in nu.iter().enumerate() {
            let want = (k as f64 * PI / 10.0).powi(2);
            assert!((v - want).abs() < 1e-9, "{v} {want}");
        }
    }

    #[test]
    fn counts_below() {
        let p = sin2();
        assert_eq!(count_below(&p, BoundaryKind::Dirichlet, 0.5, &tol()).unwrap(), 0);
        assert_eq!(count_below(&p, BoundaryKind::Dirichlet, 0.8, &tol()).unwrap(), 1);
        assert_eq!(count_below(&p, BoundaryKind::Neumann, 0.1, &tol()).unwrap(), 0);
        assert_eq!(count_below(&p, BoundaryKind::Neumann, 0.285, &tol()).unwrap(), 1);
        assert_eq!(count_below(&p, BoundaryKind::Neumann, 0.3, &tol()).unwrap(), 2);
    }

    #[test]
    fn sin2_ordering_and_symmetries() {
        let tol = tol();
        let mu = dirichlet_eigenvalues(&sin2(), 4, &tol).unwrap();
        let nu = neumann_eigenvalues(&sin2(), 4, &tol).unwrap();
        assert!(nu[1].lambda < mu[0].lambda);
        for e in mu.iter().chain(&nu) {
            let (parity, period) = expected_symmetry(e.kind, e.index);
            assert_eq!(e.parity_about_half_period, parity, "{:?} {}", e.kind, e.index);
            assert_eq!(e.periodicity, period, "{:?} {}", e.kind, e.index);
        }
        assert!(mu[0].samples[0].abs() < 1e-12 && mu[0].samples.last().unwrap().abs() < 1e-7);
        let cmu = boundary_eigenvalues(&cos2(), BoundaryKind::Dirichlet, 1, &tol).unwrap();
        let cnu = boundary_eigenvalues(&cos2(), BoundaryKind::Neumann, 2, &tol).unwrap();
        assert!(cmu[0] < cnu[1]);
    }

    #[test]
    fn free_particle_has_only_first_edge() {
        let bs = BandStructure::compute(&zero(), 2.0, &tol()).unwrap();
        assert_eq!(bs.edges.len(), 1);
        assert!(bs.edges[0].abs() < 1e-9);
        assert_eq!(bs.gaps.len(), 1);
        let a = alpha_star(&zero(), 2.0, &tol()).unwrap();
        assert_eq!(a, AlphaStar { value: 0.0, bands_used: 0 });
    }

    #[test]
    fn sin2_gap_polarities() {
        let g = gaps(&sin2(), 2.5, &tol()).unwrap();
        assert_eq!(g[0].polarity, Polarity::DN);
        assert_eq!(g[1].polarity, Polarity::ND);
        assert_eq!(g[1].lower_edge_kind, Some(BoundaryKind::Neumann));
        assert!(g[1].theorem_backed);
        assert_eq!(g[2].polarity, Polarity::DN);
        assert!(!g[2].theorem_backed);
        let c = gaps(&cos2(), 2.5, &tol()).unwrap();
        assert!(c.iter().all(|g| g.polarity == Polarity::DN));
    }

    #[test]
    fn gap_helpers() {
        let g = SpectralGap {
            index: 1,
            lower: 1.0,
            upper: 2.0,
            lower_edge_kind: Some(BoundaryKind::Dirichlet),
            upper_edge_kind: BoundaryKind::Neumann,
            polarity: Polarity::DN,
            theorem_backed: true,
        };
        let h = g.shifted(0.5);
        assert_eq!(g.overlap(&h), Some((1.5, 2.0)));
        assert_eq!(g.overlap(&g.shifted(1.0)), None);
        assert!(g.contains(1.5) && !g.contains(2.0));
        assert_eq!(g.lower_or(-5.0), 1.0);
    }

    #[test]
    fn eigenfunction_monotonicity_reports() {
        let mu = dirichlet_eigenvalues(&sin2(), 1, &tol()).unwrap();
        let r = eigenfunction_monotonicity(&mu[0]).unwrap();
        let d0 = r.extremum_location.unwrap();
        assert!((d0 - 2.16).abs() < 0.05, "d0 = {d0}");

        let nu = neumann_eigenvalues(&sin2(), 2, &tol()).unwrap();
        let r = eigenfunction_monotonicity(&nu[1]).unwrap();
        assert!(r.is_strictly_monotone());

        let nu = neumann_eigenvalues(&zero(), 1, &tol()).unwrap();
        assert!(eigenfunction_monotonicity(&nu[0]).unwrap().degenerate);
    }

    #[test]
    fn vbar_examples() {
        let r = vbar_condition(&sin2()).unwrap();
        assert_eq!(r.case, VbarCase::Increasing);
        assert!((r.beta - 1.0).abs() < 1e-14);
        assert!(r.gamma >= 70.0 && r.satisfied);
        let r = vbar_condition(&cos2()).unwrap();
        assert_eq!(r.case, VbarCase::Decreasing);
        assert!(r.gamma >= 70.0 && r.satisfied);
        let tiny = PeriodicPotential::new(10.0, vec![0.5, -0.01]).unwrap();
        let r = vbar_condition(&tiny).unwrap();
        assert!((r.gamma - 2.0).abs() < 1e-3 && !r.satisfied);
        let bumpy = PeriodicPotential::new(10.0, vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(vbar_condition(&bumpy), Err(Error::NonMonotonePotential));
    }
}
