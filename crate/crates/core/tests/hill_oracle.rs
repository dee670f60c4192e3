//! Cross-checks shooting results against a truncated Fourier (Hill) method
//! solved with a dense symmetric eigensolver.

use gapmodes::spectrum::{self, BandStructure, BoundaryKind};
use gapmodes::{PeriodicPotential, Tolerances};
use nalgebra::DMatrix;
use std::f64::consts::PI;

const MODES: usize = 80;

fn coeff(a: &[f64], j: usize) -> f64 {
    a.get(j).copied().unwrap_or(0.0)
}

/// Dirichlet eigenvalues on [0, d] in the basis sin(mπx/d).
fn hill_dirichlet(p: &PeriodicPotential) -> Vec<f64> {
    let (a, d) = (p.cosine_coeffs(), p.period());
    let h = DMatrix::from_fn(MODES, MODES, |i, k| {
        let (m, n) = (i + 1, k + 1);
        let mut v = if m == n { (m as f64 * PI / d).powi(2) + a[0] } else { 0.0 };
        let diff = m.abs_diff(n);
        if diff % 2 == 0 && diff > 0 {
            v += 0.5 * coeff(a, diff / 2);
        }
        if (m + n) % 2 == 0 {
            v -= 0.5 * coeff(a, (m + n) / 2);
        }
        v
    });
    sorted(h.symmetric_eigenvalues().iter().copied().collect())
}

/// Neumann eigenvalues on [0, d] in the orthonormal cosine basis.
fn hill_neumann(p: &PeriodicPotential) -> Vec<f64> {
    let (a, d) = (p.cosine_coeffs(), p.period());
    let h = DMatrix::from_fn(MODES, MODES, |m, n| {
        let mut v = if m == n { (m as f64 * PI / d).powi(2) + a[0] } else { 0.0 };
        let diff = m.abs_diff(n);
        let w = if m == 0 || n == 0 { 1.0 / 2f64.sqrt() } else { 0.5 };
        if diff % 2 == 0 && diff > 0 {
            v += w * coeff(a, diff / 2);
        }
        if (m + n) % 2 == 0 && m > 0 && n > 0 {
            v += 0.5 * coeff(a, (m + n) / 2);
        }
        v
    });
    sorted(h.symmetric_eigenvalues().iter().copied().collect())
}

/// Periodic (`odd = false`) or antiperiodic eigenvalues in the basis e^{iπkx/d}.
fn hill_edges(p: &PeriodicPotential, odd: bool) -> Vec<f64> {
    let (a, d) = (p.cosine_coeffs(), p.period());
    let ks: Vec<i64> = (-(MODES as i64)..=MODES as i64)
        .filter(|k| (k.rem_euclid(2) == 1) == odd)
        .collect();
    let n = ks.len();
    let h = DMatrix::from_fn(n, n, |i, j| {
        let diff = (ks[i] - ks[j]).unsigned_abs() as usize / 2;
        let mut v = if diff == 0 { a[0] } else { 0.5 * coeff(a, diff) };
        if i == j {
            v += (ks[i] as f64 * PI / d).powi(2);
        }
        v
    });
    sorted(h.symmetric_eigenvalues().iter().copied().collect())
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn potentials() -> Vec<PeriodicPotential> {
    vec![
        PeriodicPotential::new(10.0, vec![0.5, -0.5]).unwrap(),
        PeriodicPotential::new(10.0, vec![0.5, 0.5]).unwrap(),
        PeriodicPotential::new(6.0, vec![0.2, 1.3, -0.4]).unwrap(),
        PeriodicPotential::new(3.0, vec![-1.0, -2.0, 0.3, 0.2]).unwrap(),
    ]
}

#[test]
fn dirichlet_and_neumann_match_fourier() {
    let tol = Tolerances::default();
    for p in potentials() {
        let mu = spectrum::boundary_eigenvalues(&p, BoundaryKind::Dirichlet, 8, &tol).unwrap();
        let nu = spectrum::boundary_eigenvalues(&p, BoundaryKind::Neumann, 8, &tol).unwrap();
        let hd = hill_dirichlet(&p);
        let hn = hill_neumann(&p);
        for k in 0..8 {
            assert!((mu[k] - hd[k]).abs() < 1e-8, "mu{} {} vs {}", k + 1, mu[k], hd[k]);
            assert!((nu[k] - hn[k]).abs() < 1e-8, "nu{} {} vs {}", k + 1, nu[k], hn[k]);
        }
    }
}

#[test]
fn band_edges_match_fourier() {
    let tol = Tolerances::default();
    for p in potentials() {
        let lambda_max = 4.0;
        let bs = BandStructure::compute(&p, lambda_max, &tol).unwrap();
        // merge periodic and antiperiodic spectra; drop closed-gap duplicates
        let mut all: Vec<f64> = hill_edges(&p, false)
            .into_iter()
            .chain(hill_edges(&p, true))
            .filter(|&v| v <= lambda_max)
            .collect();
        all = sorted(all);
        let mut open = vec![all[0]];
        let mut i = 1;
        while i + 1 < all.len() {
            if all[i + 1] - all[i] >= tol.closed_gap {
                open.push(all[i]);
                open.push(all[i + 1]);
            }
            i += 2;
        }
        if i < all.len() {
            open.push(all[i]);
        }
        assert_eq!(bs.edges.len(), open.len(), "{:?} vs {:?}", bs.edges, open);
        for (s, h) in bs.edges.iter().zip(&open) {
            assert!((s - h).abs() < 1e-8, "{s} vs {h}");
        }
    }
}

#[test]
fn frozen_sin2_reference_values() {
    // values computed once with an 80-mode Fourier method
    let edges = [
        0.283170112157,
        0.290518061631,
        0.746767946710,
        0.843394840883,
        1.056846912428,
        1.406864979698,
        1.450478160271,
        2.098843626064,
        2.102217942588,
        2.980584383860,
        2.980721256390,
    ];
    let p = PeriodicPotential::new(10.0, vec![0.5, -0.5]).unwrap();
    let got = spectrum::band_edges(&p, 4.0, &Tolerances::default()).unwrap();
    assert_eq!(got.len(), edges.len());
    for (g, e) in got.iter().zip(edges) {
        assert!((g - e).abs() < 1e-9, "{g} vs {e}");
    }
}
