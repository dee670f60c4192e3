//! Localized eigenvalues of operators glued at `x = 0` from two even periodic
//! half-line potentials: general pairs, additive jumps `V₀ | V₀ + α`, and
//! dislocations `V₀(x − t) | V₀(x + t)` or `V₀ | V₀(x + t)`.
//!
//! An eigenvalue is a `λ` in a common gap at which the right-decaying state of
//! `V₊` and the left-decaying state of `V₋` have equal logarithmic derivative
//! at the origin. Root finding only ever brackets on segments where the
//! matching function is monotone.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{self, Side};
use crate::error::{Error, Result};
use crate::floquet::{self, StateVector};
use crate::potential::{self, PeriodicPotential};
use crate::roots;
use crate::spectrum::{self, BandStructure, BoundaryKind, SpectralGap};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterfaceKind {
    TwoPotential,
    Additive,
    DislocationSymmetric,
    DislocationOneSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DislocationMode {
    Symmetric,
    OneSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::None => "none",
        }
    }
}

/// `V(x) = V₋(x)` for `x < 0` and `V₊(x)` for `x ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceProblem {
    pub kind: InterfaceKind,
    pub left: PeriodicPotential,
    pub right: PeriodicPotential,
    pub alpha: Option<f64>,
    /// Right shift, reduced to `[0, d)`.
    pub t: Option<f64>,
    /// Left shift.
    pub s: Option<f64>,
}

fn require_even(p: &PeriodicPotential, which: &str) -> Result<()> {
    if p.shift() != 0.0 {
        return Err(Error::InvalidProblem(format!(
            "{which} potential must be even (shift 0), got shift {}",
            p.shift()
        )));
    }
    Ok(())
}

fn reduce_shift(t: f64, d: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("dislocation shift {t} is not finite")));
    }
    let r = t.rem_euclid(d);
    // rem_euclid can round up to d itself
    Ok(if r >= d { 0.0 } else { r })
}

impl InterfaceProblem {
    pub fn two_potential(left: PeriodicPotential, right: PeriodicPotential) -> Result<Self> {
        require_even(&left, "left")?;
        require_even(&right, "right")?;
        Ok(Self {
            kind: InterfaceKind::TwoPotential,
            left,
            right,
            alpha: None,
            t: None,
            s: None,
        })
    }

    pub fn additive(p: &PeriodicPotential, alpha: f64) -> Result<Self> {
        require_even(p, "base")?;
        if !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("alpha {alpha} is not finite")));
        }
        Ok(Self {
            kind: InterfaceKind::Additive,
            left: p.clone(),
            right: p.offset(alpha),
            alpha: Some(alpha),
            t: None,
            s: None,
        })
    }

    /// Left `V₀(x − t)`, right `V₀(x + t)`.
    pub fn dislocation_symmetric(p: &PeriodicPotential, t: f64) -> Result<Self> {
        require_even(p, "base")?;
        let t = reduce_shift(t, p.period())?;
        Ok(Self {
            kind: InterfaceKind::DislocationSymmetric,
            left: p.shifted(-t),
            right: p.shifted(t),
            alpha: None,
            t: Some(t),
            s: Some(-t),
        })
    }

    /// Left `V₀`, right `V₀(x + t)`.
    pub fn dislocation_one_sided(p: &PeriodicPotential, t: f64) -> Result<Self> {
        require_even(p, "base")?;
        let t = reduce_shift(t, p.period())?;
        Ok(Self {
            kind: InterfaceKind::DislocationOneSided,
            left: p.clone(),
            right: p.shifted(t),
            alpha: None,
            t: Some(t),
            s: Some(0.0),
        })
    }

    pub fn dislocation(p: &PeriodicPotential, mode: DislocationMode, t: f64) -> Result<Self> {
        match mode {
            DislocationMode::Symmetric => Self::dislocation_symmetric(p, t),
            DislocationMode::OneSided => Self::dislocation_one_sided(p, t),
        }
    }

    /// Checks the relation between the two halves that the kind promises.
    pub fn validate(&self) -> Result<()> {
        let grid = 257;
        let agree = |f: &dyn Fn(f64) -> f64, g: &dyn Fn(f64) -> f64, d: f64| {
            (0..grid).all(|i| {
                let x = d * i as f64 / (grid - 1) as f64;
                (f(x) - g(x)).abs() <= 1e-12 * (1.0 + f(x).abs())
            })
        };
        match self.kind {
            InterfaceKind::TwoPotential => {
                require_even(&self.left, "left")?;
                require_even(&self.right, "right")
            }
            InterfaceKind::Additive => {
                let alpha = self
                    .alpha
                    .ok_or_else(|| Error::InvalidProblem("additive interface needs alpha".into()))?;
                let d = self.left.period();
                if self.right.period() != d
                    || !agree(&|x| self.right.eval(x), &|x| self.left.eval(x) + alpha, d)
                {
                    return Err(Error::InvalidProblem("right half is not left + alpha".into()));
                }
                Ok(())
            }
            InterfaceKind::DislocationSymmetric | InterfaceKind::DislocationOneSided => {
                let (t, s) = match (self.t, self.s) {
                    (Some(t), Some(s)) => (t, s),
                    _ => return Err(Error::InvalidProblem("dislocation needs t and s".into())),
                };
                let d = self.left.period();
                if !(0.0..d).contains(&t) {
                    return Err(Error::InvalidProblem(format!("t = {t} outside [0, {d})")));
                }
                let want_s = if self.kind == InterfaceKind::DislocationSymmetric { -t } else { 0.0 };
                if s != want_s {
                    return Err(Error::InvalidProblem(format!("s = {s}, expected {want_s}")));
                }
                let base = self.left.unshifted();
                if self.right.period() != d
                    || !agree(&|x| self.left.eval(x), &|x| base.eval(x + s), d)
                    || !agree(&|x| self.right.eval(x), &|x| base.eval(x + t), d)
                {
                    return Err(Error::InvalidProblem(
                        "halves are not shifts of one potential by s and t".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// The glued potential.
    pub fn potential(&self, x: f64) -> f64 {
        if x < 0.0 {
            self.left.eval(x)
        } else {
            self.right.eval(x)
        }
    }
}

/// Knobs of the interface solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    /// Uniform λ samples per gap, on top of the edge probes.
    pub uniform_samples: usize,
    /// Assembled eigenfunctions cover this many periods on each side.
    pub window_periods: usize,
    pub samples_per_period: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            uniform_samples: 32,
            window_periods: 8,
            samples_per_period: 128,
        }
    }
}

impl SolveOptions {
    fn check(&self) -> Result<()> {
        if self.uniform_samples == 0 || self.window_periods == 0 || self.samples_per_period < 2 {
            return Err(Error::InvalidArgument(format!("degenerate solver options {self:?}")));
        }
        Ok(())
    }
}

/// Samples of an assembled eigenfunction on `[−X₋, X₊]`, normalized to
/// `max |ψ| = 1`. The grid contains `x = 0`, where the stored state is the
/// right half's; `left_at_zero` is the left half's limit there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenfunction {
    pub xs: Vec<f64>,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
    pub left_at_zero: StateVector,
}

impl Eigenfunction {
    fn zero_index(&self) -> usize {
        self.xs.iter().position(|&x| x == 0.0).expect("grid contains the origin")
    }

    pub fn max_abs(&self) -> f64 {
        self.psi.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `|(ψ, ψ′)(0−) − (ψ, ψ′)(0+)|` relative to `|(ψ, ψ′)(0+)|`.
    pub fn continuity_defect(&self) -> f64 {
        let i = self.zero_index();
        let right = StateVector::new(self.psi[i], self.dpsi[i]);
        StateVector::new(right.psi - self.left_at_zero.psi, right.dpsi - self.left_at_zero.dpsi).norm()
            / right.norm()
    }

    /// `(|ψ(−X₋)|, |ψ(X₊)|)`.
    pub fn tails(&self) -> (f64, f64) {
        (self.psi[0].abs(), self.psi[self.psi.len() - 1].abs())
    }

    /// `(max |ψ(x) − ψ(−x)|, max |ψ(x) + ψ(−x)|)`, or `None` when the grid is
    /// not symmetric about the origin.
    pub fn parity_defects(&self) -> Option<(f64, f64)> {
        let n = self.xs.len();
        if n % 2 == 0 {
            return None;
        }
        let mut even: f64 = 0.0;
        let mut odd: f64 = 0.0;
        for i in 0..n / 2 {
            let j = n - 1 - i;
            if (self.xs[i] + self.xs[j]).abs() > 1e-9 * self.xs[j].abs() {
                return None;
            }
            even = even.max((self.psi[i] - self.psi[j]).abs());
            odd = odd.max((self.psi[i] + self.psi[j]).abs());
        }
        let mid = self.psi[n / 2].abs();
        Some((even, odd.max(2.0 * mid)))
    }

    /// Re-integrates `−ψ″ + Vψ = λψ` across every sample interval from the
    /// stored state and returns the largest mismatch against the next stored
    /// state, relative to the largest stored state norm.
    pub fn ode_residual(
        &self,
        left: &PeriodicPotential,
        right: &PeriodicPotential,
        lambda: f64,
        tol: f64,
    ) -> Result<f64> {
        let z = self.zero_index();
        let states: Vec<StateVector> =
            (0..self.xs.len()).map(|i| StateVector::new(self.psi[i], self.dpsi[i])).collect();
        let scale = states.iter().fold(0.0f64, |m, s| m.max(s.norm()));
        let worst = (0..self.xs.len() - 1)
            .into_par_iter()
            .map(|i| {
                let p = if i < z { left } else { right };
                let y = floquet::integrate(p, lambda, self.xs[i], self.xs[i + 1], states[i], tol)?;
                let next = states[i + 1];
                Ok(StateVector::new(y.psi - next.psi, y.dpsi - next.dpsi).norm())
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        Ok(worst / scale)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceEigenvalue {
    pub lambda: f64,
    pub left_gap_index: usize,
    pub right_gap_index: usize,
    /// `|W(u₋, u₊)|` of the unit decaying states at the origin.
    pub matching_residual: f64,
    pub parity: Parity,
    pub kappa_left: f64,
    pub kappa_right: f64,
    pub eigenfunction: Eigenfunction,
}

fn period_grid(d: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| d * i as f64 / n as f64).collect()
}

struct Assembled {
    eigenfunction: Eigenfunction,
    kappa_left: f64,
    kappa_right: f64,
    matching_residual: f64,
}

/// Glues the decaying states of both halves at `λ`. Each half is integrated
/// over one period in its growing direction and extended by powers of its
/// Floquet multiplier.
fn assemble(
    left: &PeriodicPotential,
    right: &PeriodicPotential,
    lambda: f64,
    opts: &SolveOptions,
    tol: &Tolerances,
) -> Result<Assembled> {
    let sr = bloch::decaying_state(right, lambda, Side::Right, tol)?;
    let sl = bloch::decaying_state(left, lambda, Side::Left, tol)?;
    let (n, periods) = (opts.samples_per_period, opts.window_periods);

    let dr = right.period();
    let mut back = period_grid(dr, n);
    back.reverse();
    let mut one_r = floquet::integrate_sampled(right, lambda, &back, sr.init.scaled(sr.multiplier), tol.integrator)?;
    one_r.reverse();

    let dl = left.period();
    let fwd: Vec<f64> = period_grid(dl, n).into_iter().map(|x| x - dl).collect();
    let one_l = floquet::integrate_sampled(left, lambda, &fwd, sl.init.scaled(sl.multiplier), tol.integrator)?;

    let at0 = one_r[0];
    let l0 = one_l[n];
    let c = (at0.psi * l0.psi + at0.dpsi * l0.dpsi) / (l0.psi * l0.psi + l0.dpsi * l0.dpsi);

    let total = 2 * periods * n + 1;
    let (mut xs, mut psi, mut dpsi) = (
        Vec::with_capacity(total),
        Vec::with_capacity(total),
        Vec::with_capacity(total),
    );
    let hl = dl / n as f64;
    for k in (0..periods).rev() {
        let f = c * sl.multiplier.powi(k as i32);
        for (j, y) in one_l.iter().take(n).enumerate() {
            xs.push(-(((k + 1) * n - j) as f64) * hl);
            psi.push(f * y.psi);
            dpsi.push(f * y.dpsi);
        }
    }
    let hr = dr / n as f64;
    for k in 0..periods {
        let f = sr.multiplier.powi(k as i32);
        for (j, y) in one_r.iter().take(n).enumerate() {
            xs.push((k * n + j) as f64 * hr);
            psi.push(f * y.psi);
            dpsi.push(f * y.dpsi);
        }
    }
    let f = sr.multiplier.powi(periods as i32);
    xs.push((periods * n) as f64 * hr);
    psi.push(f * one_r[0].psi);
    dpsi.push(f * one_r[0].dpsi);

    let (imax, _) = psi
        .iter()
        .enumerate()
        .fold((0, 0.0), |(bi, bv), (i, v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) });
    let scale = 1.0 / psi[imax];
    psi.iter_mut().for_each(|v| *v *= scale);
    dpsi.iter_mut().for_each(|v| *v *= scale);

    Ok(Assembled {
        eigenfunction: Eigenfunction {
            xs,
            psi,
            dpsi,
            left_at_zero: l0.scaled(c * scale),
        },
        kappa_left: sl.kappa,
        kappa_right: sr.kappa,
        matching_residual: sl.init.wronskian(&sr.init).abs(),
    })
}

fn eigenvalue_at(
    left: &PeriodicPotential,
    right: &PeriodicPotential,
    lambda: f64,
    gaps: (usize, usize),
    parity: Parity,
    opts: &SolveOptions,
    tol: &Tolerances,
) -> Result<InterfaceEigenvalue> {
    let a = assemble(left, right, lambda, opts, tol)?;
    Ok(InterfaceEigenvalue {
        lambda,
        left_gap_index: gaps.0,
        right_gap_index: gaps.1,
        matching_residual: a.matching_residual,
        parity,
        kappa_left: a.kappa_left,
        kappa_right: a.kappa_right,
        eigenfunction: a.eigenfunction,
    })
}

/// Roots of a function that increases on each side of at most one pole, where
/// it jumps from `+∞` to `−∞`. `fs` samples `f` on the sorted grid `xs`.
///
/// A root next to the pole is located with a predicate that tells the two
/// sides of the pole apart by value, so the pole location itself is never
/// needed for it: left of the pole `f` exceeds `f(x_i)`, right of it `f` stays
/// below `f(x_{i+1})`.
fn matching_crossings<F>(
    xs: &[f64],
    fs: &[f64],
    gap_index: usize,
    f: F,
    bisection: f64,
) -> Result<(Vec<f64>, Option<(usize, f64, f64)>)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let drops: Vec<usize> = (0..fs.len().saturating_sub(1)).filter(|&i| fs[i + 1] < fs[i]).collect();
    if drops.len() > 1 {
        return Err(Error::TooManyPoles {
            gap_index,
            count: drops.len(),
        });
    }
    let pole = drops.first().copied();

    let mut brackets = Vec::new();
    for i in 0..fs.len().saturating_sub(1) {
        if Some(i) == pole {
            continue;
        }
        if fs[i] < 0.0 && fs[i + 1] >= 0.0 {
            brackets.push(i);
        }
    }
    let mut roots: Vec<f64> = brackets
        .par_iter()
        .map(|&i| {
            if fs[i + 1] == 0.0 {
                return Ok(xs[i + 1]);
            }
            roots::illinois_root(&f, xs[i], xs[i + 1], fs[i], fs[i + 1], bisection)
        })
        .collect::<Result<_>>()?;

    let mut pole_bracket = None;
    if let Some(i) = pole {
        let (a, b, fa, fb) = (xs[i], xs[i + 1], fs[i], fs[i + 1]);
        pole_bracket = Some((i, a, b));
        let search = |right_of_root: &dyn Fn(f64) -> bool| -> Result<f64> {
            let (mut lo, mut hi) = (a, b);
            while hi - lo > bisection {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let v = f(mid)?;
                if right_of_root(v) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        };
        if fa < 0.0 {
            // zero between x_i and the pole
            roots.push(search(&|v| !(v > fa && v < 0.0))?);
        }
        if fb > 0.0 {
            // zero between the pole and x_{i+1}
            roots.push(search(&|v| v > 0.0 && v < fb)?);
        }
    }
    roots.sort_by(f64::total_cmp);
    Ok((roots, pole_bracket))
}

/// Polarity criterion for a pair of overlapping gaps: an interface eigenvalue
/// exists in the overlap iff the polarities differ.
pub fn predict_two_potential(left_gap: &SpectralGap, right_gap: &SpectralGap) -> Result<bool> {
    if left_gap.overlap(right_gap).is_none() {
        return Err(Error::EmptyOverlap);
    }
    Ok(left_gap.polarity != right_gap.polarity)
}

/// Samples `(λ, F(λ))` with refused points dropped.
fn sample_function<F>(xs: &[f64], f: F) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64) -> Result<Option<f64>> + Sync,
{
    let vals: Vec<Option<f64>> = xs.par_iter().map(|&x| f(x)).collect::<Result<_>>()?;
    Ok(xs
        .iter()
        .zip(vals)
        .filter_map(|(&x, v)| v.map(|v| (x, v)))
        .unzip())
}

fn refused_as_none(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::NotInGap { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Result of solving one gap overlap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapOutcome {
    Eigenvalue(InterfaceEigenvalue),
    /// The root lies within the edge margin of this overlap end and is not
    /// reported as an eigenvalue.
    EdgeAbsorbed { edge: f64 },
    Empty,
}

/// Unique root of `F(λ) = R₊(λ; V₊) − R₋(λ; V₋)` in the overlap of a gap of
/// each half, or `None` when `F` keeps one sign there. Disagreement with
/// [`predict_two_potential`] is an error.
pub fn solve_two_potential(
    prob: &InterfaceProblem,
    left_gap: &SpectralGap,
    right_gap: &SpectralGap,
    opts: &SolveOptions,
    tol: &Tolerances,
) -> Result<Option<InterfaceEigenvalue>> {
    Ok(match solve_overlap(prob, left_gap, right_gap, opts, tol)? {
        OverlapOutcome::Eigenvalue(e) => Some(e),
        _ => None,
    })
}

/// As [`solve_two_potential`], but tells an edge-absorbed root apart from an
/// empty overlap. A predicted root counts as absorbed when the sign of `F` at
/// the sample nearest an overlap end places it between that sample and the
/// end.
pub fn solve_overlap(
    prob: &InterfaceProblem,
    left_gap: &SpectralGap,
    right_gap: &SpectralGap,
    opts: &SolveOptions,
    tol: &Tolerances,
) -> Result<OverlapOutcome> {
    opts.check()?;
    if !matches!(prob.kind, InterfaceKind::TwoPotential | InterfaceKind::Additive) {
        return Err(Error::InvalidProblem("dislocations have their own solvers".into()));
    }
    prob.validate()?;
    let predicted = predict_two_potential(left_gap, right_gap)?;
    let (lo, hi) = overlap_interval(prob, left_gap, right_gap)?;
    let lo_is_edge = !(left_gap.is_semi_infinite() && right_gap.is_semi_infinite());
    let (left, right) = (&prob.left, &prob.right);
    let f = |lam: f64| -> Result<f64> {
        let rp = bloch::ratio(right, lam, Side::Right, tol)?;
        let rm = bloch::ratio(left, lam, Side::Left, tol)?;
        Ok(rp.value - rm.value)
    };
    let grid = bloch::gap_grid(lo, hi, lo_is_edge, opts.uniform_samples, tol.edge_margin);
    let (xs, fs) = sample_function(&grid, |x| refused_as_none(f(x)))?;
    let (roots, _) = matching_crossings(&xs, &fs, left_gap.index, f, tol.bisection)?;
    if roots.len() > 1 {
        return Err(Error::TooManyEigenvalues {
            gap_index: left_gap.index,
            count: roots.len(),
        });
    }
    let found = !roots.is_empty();
    if !found && predicted {
        match (fs.first(), fs.last()) {
            (Some(&a), _) if lo_is_edge && a > 0.0 => return Ok(OverlapOutcome::EdgeAbsorbed { edge: lo }),
            (_, Some(&b)) if b < 0.0 => return Ok(OverlapOutcome::EdgeAbsorbed { edge: hi }),
            _ => {}
        }
    }
    if found != predicted {
        return Err(Error::PredictionMismatch {
            predicted,
            found,
            lo,
            hi,
        });
    }
    match roots.first() {
        Some(&lam) => Ok(OverlapOutcome::Eigenvalue(eigenvalue_at(
            left,
            right,
            lam,
            (left_gap.index, right_gap.index),
            Parity::None,
            opts,
            tol,
        )?)),
        None => Ok(OverlapOutcome::Empty),
    }
}

fn overlap_interval(prob: &InterfaceProblem, gl: &SpectralGap, gr: &SpectralGap) -> Result<(f64, f64)> {
    let (lo, hi) = gl.overlap(gr).ok_or(Error::EmptyOverlap)?;
    if lo.is_finite() {
        return Ok((lo, hi));
    }
    let cutoff = bloch::semi_infinite_cutoff(&prob.left).min(bloch::semi_infinite_cutoff(&prob.right));
    Ok((cutoff.min(hi - 1.0), hi))
}

/// One overlap of a gap of `V₀` with a gap of `V₀ + α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapResult {
    pub left_gap: SpectralGap,
    pub right_gap: SpectralGap,
    pub lower: f64,
    pub upper: f64,
    pub predicted: bool,
    pub eigenvalue: Option<InterfaceEigenvalue>,
    /// Overlap end that absorbed a predicted root.
    pub edge_absorbed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditiveScanPoint {
    pub alpha: f64,
    /// Overlaps whose lower end lies below `lambda_max`, ordered by that end.
    pub overlaps: Vec<OverlapResult>,
}

impl AdditiveScanPoint {
    /// Eigenvalues not above `lambda_max`, in increasing order.
    pub fn eigenvalues(&self, lambda_max: f64) -> Vec<&InterfaceEigenvalue> {
        self.overlaps
            .iter()
            .filter_map(|o| o.eigenvalue.as_ref())
            .filter(|e| e.lambda <= lambda_max)
            .collect()
    }
}

/// Solves every gap overlap of `V₀ | V₀ + α` below `lambda_max` for each `α`.
/// The gaps of `V₀ + α` are those of `V₀` shifted by `α`.
pub fn additive_scan(
    p: &PeriodicPotential,
    alpha_grid: &[f64],
    lambda_max: f64,
    opts: &SolveOptions,
    tol: &Tolerances,
) -> Result<Vec<AdditiveScanPoint>> {
    require_even(p, "base")?;
    let reach = alpha_grid.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let gaps = spectrum::gaps(p, lambda_max + reach + 2.0, tol)?;
    alpha_grid
        .par_iter()
        .map(|&alpha| {
            let mut overlaps = Vec::new();
            if alpha == 0.0 {
                return Ok(AdditiveScanPoint { alpha, overlaps });
            }
            let prob = InterfaceProblem::additive(p, alpha)?;
            for gl in &gaps {
                for gr in gaps.iter().map(|g| g.shifted(alpha)) {
                    let Some((lo, hi)) = gl.overlap(&gr) else { continue };
                    if lo >= lambda_max {
                        continue;
                    }
                    let (eigenvalue, edge_absorbed) = match solve_overlap(&prob, gl, &gr, opts, tol)? {
                        OverlapOutcome::Eigenvalue(e) => (Some(e), None),
                        OverlapOutcome::EdgeAbsorbed { edge } => (None, Some(edge)),
                        OverlapOutcome::Empty => (None, None),
                    };
                    overlaps.push(OverlapResult {
                        left_gap: *gl,
                        right_gap: gr,
                        lower: lo,
                        upper: hi,
                        predicted: predict_two_potential(gl, &gr)?,
                        eigenvalue,
                        edge_absorbed,
                    });
                }
            }
            overlaps.sort_by(|a, b| a.lower.total_cmp(&b.lower));
            Ok(AdditiveScanPoint { alpha, overlaps })
        })
        .collect()
}

fn gap_bounds(gap: &SpectralGap, cutoff: f64) -> Result<(f64, f64)> {
    bloch::search_interval(gap, cutoff)
}

/// Zeros (even eigenfunctions) and the pole (odd eigenfunction) of `R(t;·)`
/// inside `gap` for the dislocation `V₀(x − t) | V₀(x + t)`.
pub fn solve_dislocation_symmetric(
    p: &PeriodicPotential,
    t: f64,
    gap: &SpectralGap,
    lambda_min_cutoff: f64,
    opts: &SolveOptions,
    tol: &Tolerances,
) -> Result<Vec<InterfaceEigenvalue>> {
    opts.check()?;
    let prob = InterfaceProblem::dislocation_symmetric(p, t)?;
    let t = prob.t.unwrap_or(0.0);
    if t == 0.0 {
        return Ok(Vec::new());
    }
    let (lo, hi) = gap_bounds(gap, lambda_min_cutoff)?;
    let grid = bloch::gap_grid(lo, hi, !gap.is_semi_infinite(), opts.uniform_samples, tol.edge_margin);
    let samples: Vec<_> = bloch::sample_ratios(p, t, &grid, tol)?.into_iter().flatten().collect();
    let xs: Vec<f64> = samples.iter().map(|r| r.lambda).collect();
    let fs: Vec<f64> = samples.iter().map(|r| r.value).collect();
    let r = |lam: f64| Ok(bloch::ratio_shifted(p, t, lam, tol)?.value);
    let (zeros, pole) = matching_crossings(&xs, &fs, gap.index, r, tol.bisection)?;

    let mut found: Vec<(f64, Parity)> = zeros.into_iter().map(|z| (z, Parity::Even)).collect();
    if let Some((i, _, _)) = pole {
        found.push((bloch::refine_pole(p, t, samples[i], samples[i + 1], tol)?, Parity::Odd));
    }
    if found.len() > 2 {
        return Err(Error::TooManyEigenvalues {
            gap_index: gap.index,
            count: found.len(),
        });
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    found
        .into_iter()
        .map(|(lam, parity)| eigenvalue_at(&prob.left, &prob.right, lam, (gap.index, gap.index), parity, opts, tol))
        .collect()
}

/// Roots of `R(t;λ) − R₋(0;λ) = R(t;λ) + R(0;λ)` inside `gap` for the
/// dislocation `V₀ | V₀(x + t)`, one per monotone segment at most.
pub fn solve_dislocation_one_sided(
    p: &PeriodicPotential,
    t: f64,
    gap: &SpectralGap,
    lambda_min_cutoff: f64,
    opts: &SolveOptions,
    tol: &Tolerances,
) -> Result<Vec<InterfaceEigenvalue>> {
    opts.check()?;
    let prob = InterfaceProblem::dislocation_one_sided(p, t)?;
    let t = prob.t.unwrap_or(0.0);
    if t == 0.0 {
        return Ok(Vec::new());
    }
    let (lo, hi) = gap_bounds(gap, lambda_min_cutoff)?;
    let grid = bloch::gap_grid(lo, hi, !gap.is_semi_infinite(), opts.uniform_samples, tol.edge_margin);
    let f = |lam: f64| -> Result<f64> {
        let a = bloch::ratio_shifted(p, t, lam, tol)?;
        let b = bloch::ratio_shifted(p, 0.0, lam, tol)?;
        Ok(a.value + b.value)
    };
    let (xs, fs) = sample_function(&grid, |x| refused_as_none(f(x)))?;
    let (roots, _) = matching_crossings(&xs, &fs, gap.index, f, tol.bisection)?;
    if roots.len() > 2 {
        return Err(Error::TooManyEigenvalues {
            gap_index: gap.index,
            count: roots.len(),
        });
    }
    roots
        .into_iter()
        .map(|lam| eigenvalue_at(&prob.left, &prob.right, lam, (gap.index, gap.index), Parity::None, opts, tol))
        .collect()
}

pub fn solve_dislocation(
    p: &PeriodicPotential,
    mode: DislocationMode,
    t: f64,
    gap: &SpectralGap,
    lambda_min_cutoff: f64,
    opts: &SolveOptions,
    tol: &Tolerances,
) -> Result<Vec<InterfaceEigenvalue>> {
    match mode {
        DislocationMode::Symmetric => solve_dislocation_symmetric(p, t, gap, lambda_min_cutoff, opts, tol),
        DislocationMode::OneSided => solve_dislocation_one_sided(p, t, gap, lambda_min_cutoff, opts, tol),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DislocationPoint {
    pub t: f64,
    /// All eigenvalues below `lambda_max`, ordered by `λ`.
    pub eigenvalues: Vec<InterfaceEigenvalue>,
    /// Number of eigenvalues in each gap of [`DislocationScan::gaps`].
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DislocationScan {
    pub mode: DislocationMode,
    pub gaps: Vec<SpectralGap>,
    pub points: Vec<DislocationPoint>,
}

/// Solves every gap below `lambda_max` at each `t` of the grid.
pub fn dislocation_scan(
    p: &PeriodicPotential,
    mode: DislocationMode,
    t_grid: &[f64],
    lambda_max: f64,
    opts: &SolveOptions,
    tol: &Tolerances,
) -> Result<DislocationScan> {
    require_even(p, "base")?;
    let gaps: Vec<SpectralGap> = BandStructure::compute(p, lambda_max, tol)?
        .gaps
        .into_iter()
        .filter(|g| g.lower_or(f64::NEG_INFINITY) < lambda_max)
        .collect();
    let cutoff = bloch::semi_infinite_cutoff(p);
    let points = t_grid
        .par_iter()
        .map(|&t| {
            let mut eigenvalues = Vec::new();
            let mut counts = Vec::with_capacity(gaps.len());
            for g in &gaps {
                let found: Vec<_> = solve_dislocation(p, mode, t, g, cutoff, opts, tol)?
                    .into_iter()
                    .filter(|e| e.lambda <= lambda_max)
                    .collect();
                counts.push(found.len());
                eigenvalues.extend(found);
            }
            Ok(DislocationPoint {
                t,
                eigenvalues,
                counts,
            })
        })
        .collect::<Result<_>>()?;
    Ok(DislocationScan { mode, gaps, points })
}

/// Data behind the dislocation count tables for a potential that is strictly
/// monotone on the half period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DislocationTheory {
    pub period: f64,
    pub increasing: bool,
    /// Where the first Dirichlet eigenfunction (increasing `V`) or the second
    /// Neumann eigenfunction (decreasing `V`) turns on `(0, d/2)`; `None` when
    /// it is monotone there.
    pub d0: Option<f64>,
}

impl DislocationTheory {
    pub fn new(p: &PeriodicPotential, tol: &Tolerances) -> Result<Self> {
        require_even(p, "base")?;
        let m = potential::monotonicity_on_half_period(p, potential::DEFAULT_MONOTONICITY_GRID);
        if !m.is_strictly_monotone() {
            return Err(Error::NonMonotonePotential);
        }
        let increasing = m.increasing_on_half_period;
        let (kind, index) = if increasing {
            (BoundaryKind::Dirichlet, 1)
        } else {
            (BoundaryKind::Neumann, 2)
        };
        let pairs = match kind {
            BoundaryKind::Dirichlet => spectrum::dirichlet_eigenvalues(p, index, tol)?,
            BoundaryKind::Neumann => spectrum::neumann_eigenvalues(p, index, tol)?,
        };
        let report = spectrum::eigenfunction_monotonicity(&pairs[index - 1])?;
        Ok(Self {
            period: p.period(),
            increasing,
            d0: report.extremum_location,
        })
    }

    /// Predicted number of eigenvalues in `G₀` or `G₁` at shift `t`.
    pub fn count(&self, mode: DislocationMode, gap_index: usize, t: f64) -> Result<usize> {
        if gap_index > 1 {
            return Err(Error::InvalidArgument(format!(
                "count tables cover the gaps 0 and 1 only, got {gap_index}"
            )));
        }
        let d = self.period;
        let t = reduce_shift(t, d)?;
        if t == 0.0 {
            return Ok(0);
        }
        let half = 0.5 * d;
        let n = match (gap_index, mode, self.increasing, self.d0) {
            (0, _, true, _) => usize::from(t > half),
            (0, _, false, _) => usize::from(t < half),
            (_, DislocationMode::Symmetric, _, None) => usize::from(t != half),
            (_, DislocationMode::Symmetric, true, Some(d0)) => {
                if t < d0 {
                    1
                } else if t <= half {
                    0
                } else if t < d - d0 {
                    2
                } else {
                    1
                }
            }
            (_, DislocationMode::Symmetric, false, Some(d0)) => {
                if t < d0 {
                    2
                } else if t < half {
                    1
                } else if t == half {
                    0
                } else if t < d - d0 {
                    1
                } else {
                    0
                }
            }
            (_, DislocationMode::OneSided, true, _) => 1,
            (_, DislocationMode::OneSided, false, None) => 1,
            (_, DislocationMode::OneSided, false, Some(d0)) => {
                if t < d0 {
                    2
                } else if t < d - d0 {
                    1
                } else {
                    0
                }
            }
        };
        Ok(n)
    }
}

/// Theorem-predicted eigenvalue count in `G₀` or `G₁`.
pub fn predict_dislocation_count(
    p: &PeriodicPotential,
    mode: DislocationMode,
    gap_index: usize,
    t: f64,
    tol: &Tolerances,
) -> Result<usize> {
    DislocationTheory::new(p, tol)?.count(mode, gap_index, t)
}
