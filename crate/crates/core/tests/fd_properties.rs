use gapmodes::fd_oracle::{self, FdOptions};
use gapmodes::interface::InterfaceProblem;
use gapmodes::{spectrum, PeriodicPotential, Tolerances};
use proptest::prelude::*;

fn sin2() -> PeriodicPotential {
    PeriodicPotential::new(10.0, vec![0.5, -0.5]).unwrap()
}

fn cos2() -> PeriodicPotential {
    PeriodicPotential::new(10.0, vec![0.5, 0.5]).unwrap()
}

/// Problems with well-separated localized modes, and a window holding them.
fn cases() -> Vec<(&'static str, InterfaceProblem, f64, f64)> {
    let p = sin2();
    let g = spectrum::gaps(&p, 1.2, &Tolerances::default()).unwrap();
    vec![
        ("symmetric t=6", InterfaceProblem::dislocation_symmetric(&p, 6.0).unwrap(), g[1].lower, g[1].upper),
        ("one-sided t=3", InterfaceProblem::dislocation_one_sided(&p, 3.0).unwrap(), g[1].lower, g[1].upper),
        ("additive 1.2", InterfaceProblem::additive(&p, 1.2).unwrap(), g[1].lower, g[1].upper),
        ("additive -0.7", InterfaceProblem::additive(&p, -0.7).unwrap(), -0.5, g[1].upper),
    ]
}

fn kept(prob: &InterfaceProblem, periods: usize, h: f64, lo: f64, hi: f64, opts: &FdOptions) -> Vec<f64> {
    let x = periods as f64 * prob.left.period();
    let op = fd_oracle::assemble(prob, x, h, opts.jump_correction).unwrap();
    let pairs = fd_oracle::eigenvalues_in_window(&op, lo, hi, opts).unwrap();
    fd_oracle::localized_filter(pairs, &op).0.into_iter().map(|p| p.lambda).collect()
}

#[test]
fn doubling_the_domain_leaves_localized_modes_in_place() {
    let opts = FdOptions::default();
    for (name, prob, lo, hi) in cases() {
        let a = kept(&prob, 40, 0.05, lo, hi, &opts);
        let b = kept(&prob, 80, 0.05, lo, hi, &opts);
        assert!(!a.is_empty(), "{name}");
        assert_eq!(a.len(), b.len(), "{name}: {a:?} vs {b:?}");
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-6, "{name}: {x} vs {y}");
        }
    }
}

/// Least-squares slope of `log |λ(h) − λ(h/2)|` against `log h`.
fn fitted_order(hs: &[f64], lambdas: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = lambdas
        .windows(2)
        .zip(hs)
        .map(|(w, h)| (h.ln(), (w[0] - w[1]).abs().ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn halving_the_step_converges_at_fourth_order() {
    let opts = FdOptions {
        bisection: 1e-13,
        ..FdOptions::default()
    };
    let hs = [0.2, 0.1, 0.05, 0.025];
    for (name, prob, lo, hi) in cases() {
        let levels: Vec<Vec<f64>> = hs.iter().map(|&h| kept(&prob, 12, h, lo, hi, &opts)).collect();
        for k in 0..levels[0].len() {
            let track: Vec<f64> = levels.iter().map(|l| l[k]).collect();
            let order = fitted_order(&hs, &track);
            println!("{name} mode {k}: order {order:.2}");
            assert!(order >= 3.5, "{name} mode {k}: order {order:.2} from {track:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn symmetric_dislocation_modes_are_even_or_odd(cos in any::<bool>(), t in 0.2f64..9.8) {
        let p = if cos { cos2() } else { sin2() };
        let prob = InterfaceProblem::dislocation_symmetric(&p, t).unwrap();
        let g = spectrum::gaps(&p, 1.2, &Tolerances::default()).unwrap();
        let opts = FdOptions::default();
        let op = fd_oracle::assemble_default(&prob, &opts).unwrap();
        let pairs = fd_oracle::eigenvalues_in_window(&op, -1.0, g[1].upper, &opts).unwrap();
        for pair in fd_oracle::localized_filter(pairs, &op).0 {
            let v = &pair.vector;
            let n = v.len();
            let amp = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let even = (0..n).map(|i| (v[i] - v[n - 1 - i]).abs()).fold(0.0, f64::max);
            let odd = (0..n).map(|i| (v[i] + v[n - 1 - i]).abs()).fold(0.0, f64::max);
            prop_assert!(even.min(odd) <= 1e-4 * amp, "λ = {}: even {even:e}, odd {odd:e}", pair.lambda);
        }
    }
}
