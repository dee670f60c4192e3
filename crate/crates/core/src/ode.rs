//! Dormand–Prince 5(4) integrator with local error control per unit step.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// difference between 5th and embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEPS: usize = 5_000_000;

/// How the error estimate is scaled before comparison with the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorScale {
    /// Relative to the sup-norm of the whole state. Suited to linear systems,
    /// whose solutions may be rescaled arbitrarily.
    StateNorm,
    /// `1 + |yᵢ|` per component (angles and logarithms).
    Mixed,
}

/// Adaptive stepper that remembers its last accepted step size, so repeated
/// calls along a sample grid do not restart the step-size search.
pub struct Dopri5<const N: usize, F> {
    rhs: F,
    tol: f64,
    scale: ErrorScale,
    h: f64,
    steps: usize,
}

impl<const N: usize, F> Dopri5<N, F>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(rhs: F, tol: f64, scale: ErrorScale) -> Result<Self> {
        if !(1e-14..=1e-3).contains(&tol) {
            return Err(Error::InvalidTolerance(tol));
        }
        Ok(Self {
            rhs,
            tol,
            scale,
            h: 0.0,
            steps: 0,
        })
    }

    /// Total accepted and rejected steps so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Integrates from `(x0, y0)` to `x1` (either direction).
    pub fn advance(&mut self, x0: f64, y0: [f64; N], x1: f64) -> Result<[f64; N]> {
        let span = x1 - x0;
        if span == 0.0 {
            return Ok(y0);
        }
        let dir = span.signum();
        let mut h = if self.h > 0.0 {
            self.h
        } else {
            self.initial_step(x0, &y0, span.abs())
        };
        let mut x = x0;
        let mut y = y0;
        let mut k1 = (self.rhs)(x, &y);
        let mut local_steps = 0usize;
        loop {
            let remaining = (x1 - x) * dir;
            if remaining <= 0.0 {
                break;
            }
            let last = h >= remaining;
            let hs = if last { remaining } else { h };
            let hd = hs * dir;
            let (ynew, k7, err) = self.step(x, &y, &k1, hd);
            local_steps += 1;
            self.steps += 1;
            if local_steps > MAX_STEPS {
                return Err(Error::TooManySteps {
                    steps: MAX_STEPS,
                    target: x1,
                });
            }
            if err <= 1.0 {
                x = if last { x1 } else { x + hd };
                y = ynew;
                k1 = k7;
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-0.25)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // a short final step says nothing about the natural step size
                if !last || hs >= 0.5 * h {
                    h = hs * factor;
                }
            } else {
                let factor = (SAFETY * err.powf(-0.25)).clamp(MIN_FACTOR, 1.0);
                h = hs * factor;
                if h < 1e-14 * x.abs().max(1.0) {
                    return Err(Error::StepUnderflow { x, h });
                }
            }
        }
        self.h = h;
        Ok(y)
    }

    fn initial_step(&self, x0: f64, y0: &[f64; N], span: f64) -> f64 {
        let f0 = (self.rhs)(x0, y0);
        let ny = y0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let nf = f0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let rate = if ny > 0.0 { nf / ny } else { nf };
        let h = if rate > 0.0 { 0.01 / rate } else { 0.01 };
        h.min(span).min(0.1)
    }

    fn step(&self, x: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> ([f64; N], [f64; N], f64) {
        let f = &self.rhs;
        let comb = |terms: &[(f64, &[f64; N])]| -> [f64; N] {
            let mut out = *y;
            for i in 0..N {
                let mut s = 0.0;
                for (c, k) in terms {
                    s += c * k[i];
                }
                out[i] += h * s;
            }
            out
        };
        let k2 = f(x + C2 * h, &comb(&[(A21, k1)]));
        let k3 = f(x + C3 * h, &comb(&[(A31, k1), (A32, &k2)]));
        let k4 = f(x + C4 * h, &comb(&[(A41, k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            x + C5 * h,
            &comb(&[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            x + h,
            &comb(&[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let ynew = comb(&[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(x + h, &ynew);

        let norm = |v: &[f64; N]| v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let state_scale = norm(y).max(norm(&ynew)).max(f64::MIN_POSITIVE);
        let mut err = 0.0f64;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = match self.scale {
                ErrorScale::StateNorm => state_scale,
                ErrorScale::Mixed => 1.0 + y[i].abs().max(ynew[i].abs()),
            };
            err = err.max(e.abs() / (self.tol * h.abs() * sc));
        }
        (ynew, k7, err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let mut s = Dopri5::new(|_, y: &[f64; 1]| [y[0]], 1e-12, ErrorScale::StateNorm).unwrap();
        let y = s.advance(0.0, [1.0], 5.0).unwrap();
        assert!((y[0] / 5f64.exp() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_backwards() {
        let rhs = |_: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut s = Dopri5::new(rhs, 1e-12, ErrorScale::StateNorm).unwrap();
        let y = s.advance(0.0, [0.0, 1.0], -3.0).unwrap();
        assert!((y[0] - (-3f64).sin()).abs() < 1e-10);
        assert!((y[1] - 3f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn stepper_is_reusable_across_grid() {
        let rhs = |_: f64, y: &[f64; 2]| [y[1], -4.0 * y[0]];
        let mut s = Dopri5::new(rhs, 1e-11, ErrorScale::StateNorm).unwrap();
        let mut y = [1.0, 0.0];
        let mut x = 0.0;
        for i in 1..=100 {
            let xn = 0.05 * i as f64;
            y = s.advance(x, y, xn).unwrap();
            x = xn;
            assert!((y[0] - (2.0 * x).cos()).abs() < 1e-9);
        }
        assert_eq!(s.advance(x, y, x).unwrap(), y);
    }

    #[test]
    fn rejects_tolerance_out_of_range() {
        let rhs = |_: f64, y: &[f64; 1]| *y;
        assert!(Dopri5::new(rhs, 1e-2, ErrorScale::Mixed).is_err());
        assert!(Dopri5::new(rhs, 1e-15, ErrorScale::Mixed).is_err());
    }

    #[test]
    fn singular_rhs_underflows() {
        // y' = 1/(1-x) blows up at x = 1
        let rhs = |x: f64, _: &[f64; 1]| [1.0 / (1.0 - x)];
        let mut s = Dopri5::new(rhs, 1e-10, ErrorScale::Mixed).unwrap();
        let r = s.advance(0.0, [0.0], 2.0);
        assert!(matches!(
            r,
            Err(Error::StepUnderflow { .. }) | Err(Error::TooManySteps { .. })
        ));
    }
}
