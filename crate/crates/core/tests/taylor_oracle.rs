//! Checks the adaptive integrator against a fixed-step Taylor series method.
//! `V` is a trigonometric polynomial, so its Taylor coefficients at any point
//! are known exactly and `ψ` follows from the recurrence
//! `(k+2)(k+1)c_{k+2} = Σⱼ vⱼ c_{k−j} − λ c_k`.

use gapmodes::floquet::{self, StateVector};
use gapmodes::PeriodicPotential;

const ORDER: usize = 40;

/// Taylor coefficients of `V` at `x0`.
fn potential_series(a: &[f64], d: f64, x0: f64) -> Vec<f64> {
    let mut v = vec![0.0; ORDER + 1];
    v[0] = a[0];
    for (j, &aj) in a.iter().enumerate().skip(1) {
        let w = 2.0 * std::f64::consts::PI * j as f64 / d;
        let (s, c) = (w * x0).sin_cos();
        // n-th derivative of cos(w x) cycles through cos, −sin, −cos, sin
        let mut scale = 1.0;
        for (n, vn) in v.iter_mut().enumerate() {
            let deriv = match n % 4 {
                0 => c,
                1 => -s,
                2 => -c,
                _ => s,
            };
            *vn += aj * deriv * scale;
            scale *= w / (n + 1) as f64;
        }
    }
    v
}

fn taylor_step(a: &[f64], d: f64, lambda: f64, x0: f64, h: f64, y: StateVector) -> StateVector {
    let v = potential_series(a, d, x0);
    let mut c = vec![0.0; ORDER + 3];
    c[0] = y.psi;
    c[1] = y.dpsi;
    for k in 0..=ORDER {
        let conv: f64 = (0..=k).map(|j| v[j] * c[k - j]).sum();
        c[k + 2] = (conv - lambda * c[k]) / ((k + 2) * (k + 1)) as f64;
    }
    let mut psi = 0.0;
    let mut dpsi = 0.0;
    for k in (0..=ORDER + 2).rev() {
        psi = psi * h + c[k];
    }
    for k in (1..=ORDER + 2).rev() {
        dpsi = dpsi * h + k as f64 * c[k];
    }
    StateVector::new(psi, dpsi)
}

fn taylor_monodromy(a: &[f64], d: f64, lambda: f64) -> [StateVector; 2] {
    let steps = (d / 0.1).ceil() as usize;
    let h = d / steps as f64;
    [StateVector::new(1.0, 0.0), StateVector::new(0.0, 1.0)].map(|mut y| {
        for i in 0..steps {
            y = taylor_step(a, d, lambda, i as f64 * h, h, y);
        }
        y
    })
}

#[test]
fn monodromy_matches_taylor_series() {
    let cases: [(f64, &[f64]); 4] = [
        (10.0, &[0.5, -0.5]),
        (10.0, &[0.5, 0.5]),
        (3.0, &[0.2, 1.0, -0.6]),
        (6.5, &[-0.3, 0.4, 0.8, -1.1]),
    ];
    for (d, a) in cases {
        let p = PeriodicPotential::new(d, a.to_vec()).unwrap();
        for lambda in [-0.5, 0.0, 0.3, 0.8, 1.7, 4.0] {
            let m = floquet::monodromy(&p, lambda, 1e-11).unwrap();
            let [c, s] = taylor_monodromy(a, d, lambda);
            let scale = 1.0 + c.norm().max(s.norm());
            for (got, want) in [(m.m11, c.psi), (m.m21, c.dpsi), (m.m12, s.psi), (m.m22, s.dpsi)] {
                assert!((got - want).abs() <= 1e-8 * scale, "d = {d}, λ = {lambda}: {got} vs {want}");
            }
        }
    }
}
