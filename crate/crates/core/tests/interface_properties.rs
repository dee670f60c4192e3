use gapmodes::bloch::{self, Side};
use gapmodes::interface::{self, DislocationMode, InterfaceProblem, Parity, SolveOptions};
use gapmodes::spectrum::{self, BandStructure, BoundaryKind};
use gapmodes::{PeriodicPotential, Tolerances};
use proptest::prelude::*;

fn sin2() -> PeriodicPotential {
    PeriodicPotential::new(10.0, vec![0.5, -0.5]).unwrap()
}

fn cos2() -> PeriodicPotential {
    PeriodicPotential::new(10.0, vec![0.5, 0.5]).unwrap()
}

fn either() -> impl Strategy<Value = PeriodicPotential> {
    any::<bool>().prop_map(|s| if s { sin2() } else { cos2() })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn symmetric_dislocation_parity_law(p in either(), t in 0.05f64..9.95) {
        let tol = Tolerances::default();
        let gaps = spectrum::gaps(&p, 1.2, &tol).unwrap();
        let cutoff = bloch::semi_infinite_cutoff(&p);
        let prob = InterfaceProblem::dislocation_symmetric(&p, t).unwrap();
        for g in &gaps[..2] {
            let found = interface::solve_dislocation_symmetric(&p, t, g, cutoff, &SolveOptions::default(), &tol).unwrap();
            for e in &found {
                let ef = &e.eigenfunction;
                let (even, odd) = ef.parity_defects().unwrap();
                match e.parity {
                    Parity::Even => prop_assert!(even < 1e-6 * ef.max_abs(), "even defect {even} at t = {t}"),
                    Parity::Odd => prop_assert!(odd < 1e-6 * ef.max_abs(), "odd defect {odd} at t = {t}"),
                    Parity::None => prop_assert!(false, "untagged symmetric eigenvalue"),
                }
                let r = ef.ode_residual(&prob.left, &prob.right, e.lambda, 1e-11).unwrap();
                prop_assert!(r < 1e-5, "residual {r}");
            }
        }
    }

    #[test]
    fn one_sided_dislocation_eigenfunctions_solve_the_ode(p in either(), t in 0.05f64..9.95) {
        let tol = Tolerances::default();
        let gaps = spectrum::gaps(&p, 1.2, &tol).unwrap();
        let cutoff = bloch::semi_infinite_cutoff(&p);
        let prob = InterfaceProblem::dislocation_one_sided(&p, t).unwrap();
        for g in &gaps[..2] {
            for e in interface::solve_dislocation_one_sided(&p, t, g, cutoff, &SolveOptions::default(), &tol).unwrap() {
                prop_assert!(e.matching_residual < 1e-8);
                prop_assert!(e.eigenfunction.continuity_defect() < 1e-7);
                let r = e.eigenfunction.ode_residual(&prob.left, &prob.right, e.lambda, 1e-11).unwrap();
                prop_assert!(r < 1e-5, "residual {r}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // a second root in one overlap surfaces as an error from the scan
    #[test]
    fn additive_overlaps_hold_at_most_one_eigenvalue(alpha in -3.0f64..3.0) {
        prop_assume!(alpha.abs() > 1e-3);
        let tol = Tolerances::default();
        let p = sin2();
        let s4 = spectrum::band_edges(&p, 2.0, &tol).unwrap()[3];
        let scan = interface::additive_scan(&p, &[alpha], s4, &SolveOptions::default(), &tol).unwrap();
        let prob = InterfaceProblem::additive(&p, alpha).unwrap();
        for o in &scan[0].overlaps {
            prop_assert_eq!(o.eigenvalue.is_some() || o.edge_absorbed.is_some(), o.predicted);
            if let Some(e) = &o.eigenvalue {
                prop_assert!(e.lambda > o.lower && e.lambda < o.upper);
                let r = e.eigenfunction.ode_residual(&prob.left, &prob.right, e.lambda, 1e-11).unwrap();
                prop_assert!(r < 1e-5, "residual {r}");
            }
        }
    }
}

// |R| ~ c·δ^{∓1/2} at distance δ from a Dirichlet/Neumann edge, with c
// shrinking as the gap narrows; the fixed thresholds are checked on the wide
// gaps and the rate on all of them
#[test]
fn edge_limits_follow_the_edge_label() {
    let tol = Tolerances::default();
    for p in [sin2(), cos2()] {
        let bs = BandStructure::compute(&p, 3.0, &tol).unwrap();
        for g in bs.gaps.iter().filter(|g| !g.is_semi_infinite()) {
            let ends = [(g.lower, 1.0, g.lower_edge_kind.unwrap()), (g.upper, -1.0, g.upper_edge_kind)];
            for (edge, dir, kind) in ends {
                let r = |delta: f64| bloch::ratio(&p, edge + dir * delta, Side::Right, &tol).unwrap().value;
                let rate = (r(1e-7) / r(1e-5)).abs();
                match kind {
                    BoundaryKind::Dirichlet => assert!((rate - 10.0).abs() < 1.0, "gap {} edge {edge}: rate {rate}", g.index),
                    BoundaryKind::Neumann => assert!((rate - 0.1).abs() < 0.01, "gap {} edge {edge}: rate {rate}", g.index),
                }
                if g.width() < 1e-2 {
                    continue;
                }
                match kind {
                    BoundaryKind::Dirichlet => {
                        let peak = [1e-6, 1e-7, 1e-8, 1e-9].iter().map(|&h| r(h).abs()).fold(0.0, f64::max);
                        assert!(peak > 1e3, "gap {} edge {edge}: |R| peaks at {peak}", g.index);
                    }
                    BoundaryKind::Neumann => {
                        let v = r(1e-6);
                        assert!(v.abs() < 1e-2, "gap {} edge {edge}: R = {v}", g.index);
                    }
                }
            }
        }
    }
}

/// θ′ of the edge eigenfunction along one period, from `θ′ = cos²θ + (λ − V) sin²θ`.
fn angle_rate(p: &PeriodicPotential, kind: BoundaryKind, index: usize) -> Vec<f64> {
    let tol = Tolerances::default();
    let pairs = spectrum::boundary_eigenpairs(p, kind, index, 4096, &tol).unwrap();
    let e = &pairs[index - 1];
    (0..=e.intervals())
        .map(|i| {
            let (y, dy) = (e.samples[i], e.derivative_samples[i]);
            (dy * dy + (e.lambda - p.eval(e.x(i))) * y * y) / (y * y + dy * dy)
        })
        .collect()
}

#[test]
fn angle_changes_monotonicity_at_most_once_per_half_period() {
    let p = sin2();
    // s₁ = ν₁
    for (kind, index) in [(BoundaryKind::Neumann, 1), (BoundaryKind::Dirichlet, 1), (BoundaryKind::Neumann, 2)] {
        let rate = angle_rate(&p, kind, index);
        let n = rate.len() - 1;
        let scale = rate.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let signs: Vec<f64> = rate[..=n / 2]
            .iter()
            .filter(|v| v.abs() > 1e-9 * scale)
            .map(|v| v.signum())
            .collect();
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        assert!(changes <= 1, "{kind:?} {index}: {changes} changes");
        for s in 0..=n / 2 {
            assert!((rate[n / 2 + s] - rate[n / 2 - s]).abs() <= 1e-6 * scale, "{kind:?} {index} mirror at {s}");
        }
    }
}

#[test]
fn dislocation_counts_match_theory_on_a_coarse_grid() {
    let tol = Tolerances::default();
    for p in [sin2(), cos2()] {
        for mode in [DislocationMode::Symmetric, DislocationMode::OneSided] {
            let grid: Vec<f64> = (0..10).map(|i| 0.5 + i as f64).collect();
            let scan = interface::dislocation_scan(&p, mode, &grid, 0.8, &SolveOptions::default(), &tol).unwrap();
            for pt in &scan.points {
                for gi in 0..2 {
                    let want = interface::predict_dislocation_count(&p, mode, gi, pt.t, &tol).unwrap();
                    assert_eq!(pt.counts[gi], want, "{mode:?} t = {} gap {gi}", pt.t);
                }
            }
        }
    }
}
