//! Independent eigenvalue oracle: the fourth-order five-point discretization
//! of `−ψ″ + Vψ` on `[−X, X]` with Dirichlet ends, eigenvalues by inertia
//! counting and bisection, eigenvectors by inverse iteration.
//!
//! Near a jump of `V` (or of `V′`) at the origin the plain stencil is only
//! second-order accurate. With `jump_correction` the three matrix rows around
//! the origin get a symmetric correction that cancels the `h²` and `h³`
//! eigenvalue error terms of the jump, which restores fourth order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interface::InterfaceProblem;

/// Symmetric pentadiagonal matrix with Dirichlet truncation. Unknowns are the
/// interior nodes `x_i = −X + (i + 1)h`, `i = 0..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdOperator {
    pub half_width: f64,
    pub step: f64,
    pub xs: Vec<f64>,
    pub diag: Vec<f64>,
    /// `A[i][i+1]`.
    pub off1: Vec<f64>,
    /// `A[i][i+2]`.
    pub off2: Vec<f64>,
    pub jump_corrected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdOptions {
    /// `X` in periods of the left potential.
    pub half_width_periods: usize,
    /// Grid points per period of the left potential.
    pub points_per_period: usize,
    pub jump_correction: bool,
    pub bisection: f64,
    pub seed: u64,
    pub inverse_iterations: usize,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self {
            half_width_periods: 40,
            points_per_period: 200,
            jump_correction: true,
            bisection: 1e-10,
            seed: 0x5eed,
            inverse_iterations: 3,
        }
    }
}

fn is_multiple(x: f64, unit: f64) -> bool {
    let r = x / unit;
    (r - r.round()).abs() <= 1e-9 * r.max(1.0) && r.round() >= 1.0
}

impl FdOperator {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Index of the node at `x = 0`.
    pub fn center(&self) -> usize {
        self.len() / 2
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i + 1 < n {
                    s += self.off1[i] * x[i + 1];
                }
                if i + 2 < n {
                    s += self.off2[i] * x[i + 2];
                }
                if i >= 1 {
                    s += self.off1[i - 1] * x[i - 1];
                }
                if i >= 2 {
                    s += self.off2[i - 2] * x[i - 2];
                }
                s
            })
            .collect()
    }

    /// Number of eigenvalues below `sigma` (negative pivots of `A − σI`).
    /// Returns `None` if a pivot is too small to trust.
    fn negative_count(&self, sigma: f64) -> Option<usize> {
        let n = self.len();
        let scale = 30.0 / (12.0 * self.step * self.step) + sigma.abs();
        let tiny = 1e-14 * scale;
        let (mut d1, mut d2) = (0.0f64, 0.0f64); // d_{k−1}, d_{k−2}
        let (mut l1_prev, mut l2_prev2, mut l2_prev) = (0.0f64, 0.0f64, 0.0f64);
        // l1_prev = L[k][k−1], l2_prev2 = L[k][k−2], l2_prev = L[k+1][k−1]
        let mut neg = 0;
        for k in 0..n {
            let d = self.diag[k] - sigma - l1_prev * l1_prev * d1 - l2_prev2 * l2_prev2 * d2;
            if d.abs() < tiny {
                return None;
            }
            if d < 0.0 {
                neg += 1;
            }
            let a1 = if k + 1 < n { self.off1[k] } else { 0.0 };
            let a2 = if k + 2 < n { self.off2[k] } else { 0.0 };
            let l1 = (a1 - l2_prev * l1_prev * d1) / d;
            let l2 = a2 / d;
            d2 = d1;
            d1 = d;
            l2_prev2 = l2_prev;
            l1_prev = l1;
            l2_prev = l2;
        }
        Some(neg)
    }

    /// Inertia count at `sigma`, nudging the shift when the factorization
    /// breaks down.
    pub fn inertia(&self, sigma: f64) -> Result<usize> {
        let mut s = sigma;
        let nudge = 1e-13 * (1.0 + sigma.abs());
        for k in 0..8 {
            if let Some(c) = self.negative_count(s) {
                return Ok(c);
            }
            s = sigma + nudge * (k + 1) as f64 * if k % 2 == 0 { 1.0 } else { -1.0 };
        }
        Err(Error::FactorizationBreakdown { shift: sigma })
    }

    /// Fraction of `Σ v²` carried by nodes with `|x| > 0.8X`.
    pub fn outer_mass_fraction(&self, v: &[f64]) -> f64 {
        let cut = 0.8 * self.half_width;
        let (mut outer, mut total) = (0.0, 0.0);
        for (x, y) in self.xs.iter().zip(v) {
            let m = y * y;
            total += m;
            if x.abs() > cut {
                outer += m;
            }
        }
        outer / total
    }
}

/// Discretizes the glued operator of `prob` on `[−X, X]` with step `h`.
pub fn assemble(prob: &InterfaceProblem, half_width: f64, step: f64, jump_correction: bool) -> Result<FdOperator> {
    if !(step > 0.0 && half_width > 0.0 && step.is_finite() && half_width.is_finite()) {
        return Err(Error::InvalidGrid(format!("step {step} and half width {half_width}")));
    }
    if !is_multiple(half_width, step) {
        return Err(Error::InvalidGrid(format!("step {step} does not divide half width {half_width}")));
    }
    for p in [&prob.left, &prob.right] {
        if !is_multiple(half_width, p.period()) {
            return Err(Error::InvalidGrid(format!(
                "half width {half_width} is not a whole number of periods {}",
                p.period()
            )));
        }
    }
    let m = (half_width / step).round() as usize;
    if m < 3 {
        return Err(Error::InvalidGrid("fewer than three points per half line".into()));
    }
    let n = 2 * m - 1;
    let h2 = 12.0 * step * step;
    let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0 - m as f64) * step).collect();
    let c = m - 1;
    let mut diag: Vec<f64> = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let v = if i == c {
                0.5 * (prob.left.eval(0.0) + prob.right.eval(0.0))
            } else {
                prob.potential(x)
            };
            30.0 / h2 + v
        })
        .collect();
    // odd reflection of the ghost node behind each Dirichlet end
    diag[0] -= 1.0 / h2;
    diag[n - 1] -= 1.0 / h2;
    let mut off1 = vec![-16.0 / h2; n - 1];
    let off2 = vec![1.0 / h2; n - 2];
    if jump_correction {
        let jump = prob.right.eval(0.0) - prob.left.eval(0.0);
        let kink = prob.right.derivative(0.0) - prob.left.derivative(0.0);
        off1[c] += jump / 24.0;
        off1[c - 1] -= jump / 24.0;
        diag[c] += step * kink / 12.0 - step * step * jump * jump / 48.0;
    }
    Ok(FdOperator {
        half_width,
        step,
        xs,
        diag,
        off1,
        off2,
        jump_corrected: jump_correction,
    })
}

/// Assembles with `X` and `h` taken from `opts` in units of the left period.
pub fn assemble_default(prob: &InterfaceProblem, opts: &FdOptions) -> Result<FdOperator> {
    let d = prob.left.period();
    assemble(
        prob,
        opts.half_width_periods as f64 * d,
        d / opts.points_per_period as f64,
        opts.jump_correction,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdEigenpair {
    pub lambda: f64,
    /// Unit Euclidean norm, largest entry positive.
    pub vector: Vec<f64>,
}

/// Splits `(lo, hi)` until each piece holds exactly one eigenvalue (or a
/// cluster narrower than `tol`), then bisects each to width `tol`.
fn isolate(op: &FdOperator, lo: f64, hi: f64, n_lo: usize, n_hi: usize, tol: f64, out: &mut Vec<(f64, f64, usize)>) -> Result<()> {
    let k = n_hi - n_lo;
    if k == 0 {
        return Ok(());
    }
    if k == 1 || hi - lo <= tol {
        out.push((lo, hi, k));
        return Ok(());
    }
    let mid = 0.5 * (lo + hi);
    let n_mid = op.inertia(mid)?;
    isolate(op, lo, mid, n_lo, n_mid, tol, out)?;
    isolate(op, mid, hi, n_mid, n_hi, tol, out)
}

fn refine(op: &FdOperator, mut lo: f64, mut hi: f64, n_lo: usize, tol: f64) -> Result<f64> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if op.inertia(mid)? > n_lo {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Banded LU with partial pivoting of `A − σI` (two sub-, four super-diagonals
/// after fill-in).
struct BandLu {
    n: usize,
    /// Row `i` holds `U[i][i..i+5]`.
    u: Vec<[f64; 5]>,
    /// Multipliers of elimination step `k` for rows `k+1`, `k+2`.
    l: Vec<[f64; 2]>,
    /// Row swapped into position `k` at step `k`, relative offset 0..=2.
    piv: Vec<usize>,
}

impl BandLu {
    fn factor(op: &FdOperator, sigma: f64) -> Self {
        let n = op.len();
        // rows stored from column i−2 to i+4: index j ↦ column i − 2 + j
        let mut rows: Vec<[f64; 7]> = (0..n)
            .map(|i| {
                let mut r = [0.0; 7];
                if i >= 2 {
                    r[0] = op.off2[i - 2];
                }
                if i >= 1 {
                    r[1] = op.off1[i - 1];
                }
                r[2] = op.diag[i] - sigma;
                if i + 1 < n {
                    r[3] = op.off1[i];
                }
                if i + 2 < n {
                    r[4] = op.off2[i];
                }
                r
            })
            .collect();
        let get = |rows: &Vec<[f64; 7]>, i: usize, col: usize| -> f64 {
            let j = col as isize - i as isize + 2;
            if (0..7).contains(&j) {
                rows[i][j as usize]
            } else {
                0.0
            }
        };
        let mut u = vec![[0.0; 5]; n];
        let mut l = vec![[0.0; 2]; n];
        let mut piv = vec![0; n];
        for k in 0..n {
            let last = (k + 2).min(n - 1);
            let mut p = k;
            let mut best = get(&rows, k, k).abs();
            for i in k + 1..=last {
                let v = get(&rows, i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p - k;
            if p != k {
                // both rows span columns k..k+4 here; re-align storage
                let a: Vec<f64> = (k..k + 5).map(|c| get(&rows, k, c)).collect();
                let b: Vec<f64> = (k..k + 5).map(|c| get(&rows, p, c)).collect();
                for (j, c) in (k..k + 5).enumerate() {
                    set(&mut rows, k, c, b[j]);
                    set(&mut rows, p, c, a[j]);
                }
            }
            let mut pivot = get(&rows, k, k);
            if pivot == 0.0 {
                pivot = f64::EPSILON * (1.0 + sigma.abs());
                set(&mut rows, k, k, pivot);
            }
            for (j, c) in (k..k + 5).enumerate() {
                u[k][j] = if c < n { get(&rows, k, c) } else { 0.0 };
            }
            for (s, i) in (k + 1..=last).enumerate() {
                let f = get(&rows, i, k) / pivot;
                l[k][s] = f;
                set(&mut rows, i, k, 0.0);
                for c in k + 1..(k + 5).min(n) {
                    let v = get(&rows, i, c) - f * u[k][c - k];
                    set(&mut rows, i, c, v);
                }
            }
        }
        BandLu { n, u, l, piv }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            let p = k + self.piv[k];
            b.swap(k, p);
            for s in 0..2 {
                if k + 1 + s < n {
                    b[k + 1 + s] -= self.l[k][s] * b[k];
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in 1..5 {
                if k + j < n {
                    s -= self.u[k][j] * b[k + j];
                }
            }
            b[k] = s / self.u[k][0];
        }
    }
}

fn set(rows: &mut [[f64; 7]], i: usize, col: usize, v: f64) {
    let j = col as isize - i as isize + 2;
    if (0..7).contains(&j) {
        rows[i][j as usize] = v;
    } else if v != 0.0 {
        unreachable!("fill outside the band at ({i}, {col})");
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (imax, _) = v
        .iter()
        .enumerate()
        .fold((0, 0.0), |(bi, bv), (i, x)| if x.abs() > bv { (i, x.abs()) } else { (bi, bv) });
    let s = if v[imax] < 0.0 { -1.0 / n } else { 1.0 / n };
    v.iter_mut().for_each(|x| *x *= s);
}

fn inverse_iteration(op: &FdOperator, lambda: f64, seed: u64, iterations: usize) -> Vec<f64> {
    let shift = lambda + 1e-10 * (1.0 + lambda.abs());
    let lu = BandLu::factor(op, shift);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..op.len()).map(|_| rng.gen::<f64>() - 0.5).collect();
    for _ in 0..iterations.max(1) {
        lu.solve(&mut v);
        normalize(&mut v);
    }
    v
}

/// All eigenvalues in `(lo, hi)` with eigenvectors. Eigenvalues closer than
/// `1e-6` are treated as a cluster and their vectors orthogonalized.
pub fn eigenvalues_in_window(op: &FdOperator, lo: f64, hi: f64, opts: &FdOptions) -> Result<Vec<FdEigenpair>> {
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!("empty window ({lo}, {hi})")));
    }
    let (n_lo, n_hi) = (op.inertia(lo)?, op.inertia(hi)?);
    let mut pieces = Vec::new();
    isolate(op, lo, hi, n_lo, n_hi, opts.bisection, &mut pieces)?;
    let mut lambdas = Vec::new();
    for (a, b, k) in pieces {
        let n_a = op.inertia(a)?;
        let lam = refine(op, a, b, n_a, opts.bisection)?;
        lambdas.extend(std::iter::repeat(lam).take(k));
    }
    let mut vectors: Vec<Vec<f64>> = lambdas
        .par_iter()
        .enumerate()
        .map(|(i, &lam)| inverse_iteration(op, lam, opts.seed.wrapping_add(i as u64), opts.inverse_iterations))
        .collect();
    for i in 0..vectors.len() {
        for j in 0..i {
            if (lambdas[i] - lambdas[j]).abs() < 1e-6 {
                let dot: f64 = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum();
                let vj = vectors[j].clone();
                vectors[i].iter_mut().zip(&vj).for_each(|(a, b)| *a -= dot * b);
                normalize(&mut vectors[i]);
            }
        }
    }
    Ok(lambdas
        .into_iter()
        .zip(vectors)
        .map(|(lambda, vector)| FdEigenpair { lambda, vector })
        .collect())
}

/// Largest outer-mass fraction of a mode counted as localized.
pub const LOCALIZED_MASS: f64 = 1e-4;

/// Localized eigenpairs and boundary artifacts, in that order.
pub fn localized_filter(pairs: Vec<FdEigenpair>, op: &FdOperator) -> (Vec<FdEigenpair>, Vec<FdEigenpair>) {
    pairs.into_iter().partition(|p| op.outer_mass_fraction(&p.vector) < LOCALIZED_MASS)
}

/// Localized eigenvalues of `prob` in `(lo, hi)` with the default grid.
pub fn localized_eigenvalues(prob: &InterfaceProblem, lo: f64, hi: f64, opts: &FdOptions) -> Result<Vec<FdEigenpair>> {
    let op = assemble_default(prob, opts)?;
    Ok(localized_filter(eigenvalues_in_window(&op, lo, hi, opts)?, &op).0)
}
