//! Even, periodic potentials represented as finite cosine series.
//!
//! `V(x) = a₀ + Σⱼ aⱼ cos(2πj(x + shift)/d)`. With `shift = 0` the potential is
//! even and `d`-periodic by construction, and all derivatives are available in
//! closed form.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of sample points used by [`monotonicity_on_half_period`].
pub const DEFAULT_MONOTONICITY_GRID: usize = 2048;

/// JSON form of a potential: `{"period": 10.0, "cosine_coeffs": [0.5, -0.5], "shift": 0.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialDescriptor {
    pub period: f64,
    pub cosine_coeffs: Vec<f64>,
    #[serde(default)]
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialDescriptor", into = "PotentialDescriptor")]
pub struct PeriodicPotential {
    period: f64,
    coeffs: Vec<f64>,
    shift: f64,
}

impl PeriodicPotential {
    /// Builds `a₀ + Σ aⱼ cos(2πjx/d)` with zero shift.
    pub fn new(period: f64, cosine_coeffs: Vec<f64>) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidPeriod(period));
        }
        if cosine_coeffs.is_empty() {
            return Err(Error::EmptyCoefficients);
        }
        if cosine_coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFiniteCoefficient);
        }
        Ok(Self {
            period,
            coeffs: cosine_coeffs,
            shift: 0.0,
        })
    }

    /// The free particle `V ≡ 0` with the given period.
    pub fn zero(period: f64) -> Result<Self> {
        Self::new(period, vec![0.0])
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor serialization cannot fail")
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn cosine_coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Potential evaluating to `self(x + s)`.
    pub fn shifted(&self, s: f64) -> Self {
        Self {
            period: self.period,
            coeffs: self.coeffs.clone(),
            shift: self.shift + s,
        }
    }

    /// Potential `self + c` (the additive interface adds `α` to `a₀`).
    pub fn offset(&self, c: f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] += c;
        Self {
            period: self.period,
            coeffs,
            shift: self.shift,
        }
    }

    /// Same coefficients, zero shift.
    pub fn unshifted(&self) -> Self {
        Self {
            period: self.period,
            coeffs: self.coeffs.clone(),
            shift: 0.0,
        }
    }

    fn wavenumber(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn eval(&self, x: f64) -> f64 {
        let a = &self.coeffs;
        if a.len() == 1 {
            return a[0];
        }
        let phase = self.wavenumber() * (x + self.shift);
        let c1 = phase.cos();
        // cos(jφ) by the Chebyshev recurrence
        let mut sum = a[0] + a[1] * c1;
        let (mut prev, mut cur) = (1.0, c1);
        for &aj in &a[2..] {
            let next = 2.0 * c1 * cur - prev;
            sum += aj * next;
            prev = cur;
            cur = next;
        }
        sum
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let a = &self.coeffs;
        if a.len() == 1 {
            return 0.0;
        }
        let k = self.wavenumber();
        let phase = k * (x + self.shift);
        let (s1, c1) = phase.sin_cos();
        // sin(jφ) = U_{j-1}(cos φ) sin φ
        let mut sum = 0.0;
        let (mut u_prev, mut u_cur) = (0.0, 1.0);
        for (j, &aj) in a.iter().enumerate().skip(1) {
            sum -= aj * (j as f64) * u_cur;
            let next = 2.0 * c1 * u_cur - u_prev;
            u_prev = u_cur;
            u_cur = next;
        }
        sum * k * s1
    }

    /// `Σ|aⱼ|`, an upper bound for `|V|`.
    pub fn sup_bound(&self) -> f64 {
        self.coeffs.iter().map(|a| a.abs()).sum()
    }

    /// Lower bound `a₀ − Σⱼ≥1 |aⱼ|` for `V`.
    pub fn lower_bound(&self) -> f64 {
        self.coeffs[0] - self.coeffs[1..].iter().map(|a| a.abs()).sum::<f64>()
    }

    /// Upper bound `a₀ + Σⱼ≥1 |aⱼ|` for `V`.
    pub fn upper_bound(&self) -> f64 {
        self.coeffs[0] + self.coeffs[1..].iter().map(|a| a.abs()).sum::<f64>()
    }

    /// Minimum of `V` over a dense sample of one period.
    pub fn sampled_min(&self, samples: usize) -> f64 {
        let n = samples.max(2);
        (0..n)
            .map(|i| self.eval(self.period * i as f64 / n as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// True when all harmonics vanish.
    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|&a| a == 0.0)
    }

    /// Largest `|V'|` bound, `Σ j·|aⱼ|·2π/d`.
    pub(crate) fn derivative_bound(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, a)| j as f64 * a.abs())
            .sum::<f64>()
            * self.wavenumber()
    }
}

impl TryFrom<PotentialDescriptor> for PeriodicPotential {
    type Error = Error;

    fn try_from(desc: PotentialDescriptor) -> Result<Self> {
        if !desc.shift.is_finite() {
            return Err(Error::NonFiniteCoefficient);
        }
        Ok(Self::new(desc.period, desc.cosine_coeffs)?.shifted(desc.shift))
    }
}

impl From<PeriodicPotential> for PotentialDescriptor {
    fn from(p: PeriodicPotential) -> Self {
        Self {
            period: p.period,
            cosine_coeffs: p.coeffs,
            shift: p.shift,
        }
    }
}

/// Strict monotonicity of a function on `[0, d/2]`, or the location of its
/// single interior extremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub increasing_on_half_period: bool,
    pub decreasing_on_half_period: bool,
    pub extremum_location: Option<f64>,
    /// The derivative vanished on every sample.
    pub degenerate: bool,
}

impl MonotonicityReport {
    pub(crate) fn degenerate() -> Self {
        Self {
            increasing_on_half_period: false,
            decreasing_on_half_period: false,
            extremum_location: None,
            degenerate: true,
        }
    }

    pub fn is_strictly_monotone(&self) -> bool {
        self.increasing_on_half_period || self.decreasing_on_half_period
    }
}

/// Decides strict monotonicity of `V` on `[0, d/2]` from the analytic derivative
/// sampled at `grid_points` interior points.
pub fn monotonicity_on_half_period(p: &PeriodicPotential, grid_points: usize) -> MonotonicityReport {
    let p = p.unshifted();
    let half = 0.5 * p.period();
    let n = grid_points.max(2);
    let noise = 1e-12 * p.derivative_bound().max(f64::MIN_POSITIVE);
    let xs: Vec<f64> = (1..=n).map(|i| half * i as f64 / (n + 1) as f64).collect();
    let ds: Vec<f64> = xs.iter().map(|&x| p.derivative(x)).collect();

    let positive = ds.iter().filter(|&&v| v > noise).count();
    let negative = ds.iter().filter(|&&v| v < -noise).count();
    if positive == 0 && negative == 0 {
        return MonotonicityReport::degenerate();
    }
    if negative == 0 && positive == n {
        return MonotonicityReport {
            increasing_on_half_period: true,
            decreasing_on_half_period: false,
            extremum_location: None,
            degenerate: false,
        };
    }
    if positive == 0 && negative == n {
        return MonotonicityReport {
            increasing_on_half_period: false,
            decreasing_on_half_period: true,
            extremum_location: None,
            degenerate: false,
        };
    }

    // locate the first sign change of V' and refine it
    let mut extremum = None;
    let mut last: Option<(f64, f64)> = None;
    for (&x, &v) in xs.iter().zip(&ds) {
        if v.abs() <= noise {
            continue;
        }
        if let Some((xl, vl)) = last {
            if vl.signum() != v.signum() {
                let f = |t: f64| p.derivative(t);
                extremum = Some(crate::roots::bisect(f, xl, x, 1e-14 * half));
                break;
            }
        }
        last = Some((x, v));
    }
    MonotonicityReport {
        increasing_on_half_period: false,
        decreasing_on_half_period: false,
        extremum_location: extremum,
        degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sin2() -> PeriodicPotential {
        PeriodicPotential::new(10.0, vec![0.5, -0.5]).unwrap()
    }

    fn cos2() -> PeriodicPotential {
        PeriodicPotential::new(10.0, vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn constructs_named_potentials() {
        let p = sin2();
        for i in 0..50 {
            let x = -7.0 + 0.37 * i as f64;
            let want = (PI * x / 10.0).sin().powi(2);
            assert!((p.eval(x) - want).abs() < 1e-14);
            let want = (PI * x / 10.0).cos().powi(2);
            assert!((cos2().eval(x) - want).abs() < 1e-14);
        }
        let z = PeriodicPotential::zero(10.0).unwrap();
        assert_eq!(z.eval(3.3), 0.0);
        assert_eq!(z.derivative(3.3), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            PeriodicPotential::new(0.0, vec![1.0]),
            Err(Error::InvalidPeriod(0.0))
        );
        assert_eq!(
            PeriodicPotential::new(-1.0, vec![1.0]),
            Err(Error::InvalidPeriod(-1.0))
        );
        assert_eq!(PeriodicPotential::new(1.0, vec![]), Err(Error::EmptyCoefficients));
        assert!(PeriodicPotential::new(1.0, vec![f64::NAN]).is_err());
    }

    #[test]
    fn half_period_shift_swaps_sin_and_cos() {
        let s = sin2().shifted(5.0);
        let c = cos2();
        for i in 0..100 {
            let x = -20.0 + 0.41 * i as f64;
            assert!((s.eval(x) - c.eval(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn shift_by_period_and_zero_are_identities() {
        let p = PeriodicPotential::new(3.0, vec![0.2, -1.0, 0.4, 0.05]).unwrap();
        let q = p.shifted(3.0);
        let r = p.shifted(0.0);
        for i in 0..200 {
            let x = -5.0 + 0.05 * i as f64;
            assert!((q.eval(x) - p.eval(x)).abs() < 1e-13);
            assert_eq!(r.eval(x), p.eval(x));
        }
    }

    #[test]
    fn even_and_periodic_by_construction() {
        let p = PeriodicPotential::new(2.5, vec![0.1, 0.7, -0.3, 0.2]).unwrap();
        for i in 0..100 {
            let x = 0.123 * i as f64;
            assert!((p.eval(-x) - p.eval(x)).abs() < 1e-13);
            assert!((p.eval(x + 2.5) - p.eval(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = PeriodicPotential::new(4.0, vec![0.3, 0.7, -0.3, 0.2, 0.1])
            .unwrap()
            .shifted(0.3);
        for i in 0..40 {
            let x = -3.0 + 0.17 * i as f64;
            let h = 1e-5;
            let fd = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
            assert!((p.derivative(x) - fd).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn monotonicity_reports() {
        let r = monotonicity_on_half_period(&sin2(), DEFAULT_MONOTONICITY_GRID);
        assert!(r.increasing_on_half_period && !r.decreasing_on_half_period);
        assert_eq!(r.extremum_location, None);

        let r = monotonicity_on_half_period(&cos2(), DEFAULT_MONOTONICITY_GRID);
        assert!(r.decreasing_on_half_period && !r.increasing_on_half_period);

        let r = monotonicity_on_half_period(&PeriodicPotential::zero(10.0).unwrap(), 64);
        assert!(r.degenerate && !r.is_strictly_monotone());
        assert_eq!(r.extremum_location, None);

        // second harmonic only: extremum at d/4
        let p = PeriodicPotential::new(8.0, vec![0.0, 0.0, 1.0]).unwrap();
        let r = monotonicity_on_half_period(&p, 2048);
        assert!(!r.is_strictly_monotone() && !r.degenerate);
        assert!((r.extremum_location.unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn json_descriptor_round_trip() {
        let p = PeriodicPotential::from_json(
            r#"{"period": 10.0, "cosine_coeffs": [0.5, -0.5], "shift": 0.0}"#,
        )
        .unwrap();
        assert_eq!(p, sin2());
        let q = PeriodicPotential::from_json(&p.shifted(1.5).to_json()).unwrap();
        assert_eq!(q.shift(), 1.5);
        assert!(PeriodicPotential::from_json(r#"{"period": -1, "cosine_coeffs": [1]}"#).is_err());
        let no_shift =
            PeriodicPotential::from_json(r#"{"period": 2, "cosine_coeffs": [1]}"#).unwrap();
        assert_eq!(no_shift.shift(), 0.0);
    }
}
