//! Independent reference implementations shared by the integration tests.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use geoseg::solver::aos::HalfPointCoefficients;
use geoseg::solver::penalty::{in_jump_interval, jump_slope};
use geoseg::{GridIndex, ScalarGrid, SolverParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gaussian elimination with partial pivoting on a dense row-major matrix.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let m = a[row][col] / a[col][col];
            if m == 0.0 {
                continue;
            }
            let pivot_row = a[col].clone();
            for (x, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= m * p;
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Random diagonally dominant tridiagonal system `(lower, diag, upper, rhs)`.
pub fn random_tridiagonal(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let mut lower: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    let mut upper: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    lower[0] = 0.0;
    upper[n - 1] = 0.0;
    let diag = (0..n)
        .map(|k| lower[k].abs() + upper[k].abs() + r.random_range(0.5..2.0))
        .collect();
    let rhs = (0..n).map(|_| r.random_range(-5.0..5.0)).collect();
    (lower, diag, upper, rhs)
}

pub fn tridiagonal_to_dense(lower: &[f64], diag: &[f64], upper: &[f64]) -> Vec<Vec<f64>> {
    let n = diag.len();
    let mut a = vec![vec![0.0; n]; n];
    for k in 0..n {
        a[k][k] = diag[k];
        if k > 0 {
            a[k][k - 1] = lower[k];
        }
        if k + 1 < n {
            a[k][k + 1] = upper[k];
        }
    }
    a
}

/// One AOS step computed with dense matrices built from the operator
/// definition: `Q = I - 2τμ (I + B̃)⁻¹ A` per line, `A` the 1D flux
/// divergence with the given half-point couplings.
pub fn dense_aos_step(
    u: &ScalarGrid,
    c: &HalfPointCoefficients,
    f: &ScalarGrid,
    p: &SolverParams,
    alpha: f64,
) -> ScalarGrid {
    let (w, h) = (u.width(), u.height());
    let b = jump_slope(p.eps_heaviside);
    let damp = |v: f64| {
        if in_jump_interval(v, p.zeta) {
            p.tau * alpha * b
        } else {
            0.0
        }
    };
    let line = |idx: &[(usize, usize)], back: &ScalarGrid, fwd: &ScalarGrid| -> Vec<f64> {
        let n = idx.len();
        let mut a = vec![vec![0.0; n]; n];
        let mut rhs = vec![0.0; n];
        for (k, &(i, j)) in idx.iter().enumerate() {
            let inv = 1.0 / (1.0 + damp(u.get(i, j)));
            // (A v)_k = fwd (v_{k+1} - v_k) - back (v_k - v_{k-1})
            let (bk, fk) = (back.get(i, j), fwd.get(i, j));
            let s = 2.0 * p.tau * p.mu * inv;
            a[k][k] = 1.0 + s * (bk + fk);
            if k > 0 {
                a[k][k - 1] = -s * bk;
            }
            if k + 1 < n {
                a[k][k + 1] = -s * fk;
            }
            rhs[k] = u.get(i, j) - p.tau * inv * f.get(i, j);
        }
        dense_solve(a, rhs)
    };
    let mut out = ScalarGrid::filled(w, h, 0.0);
    for j in 0..h {
        let idx: Vec<_> = (0..w).map(|i| (i, j)).collect();
        for (i, v) in line(&idx, &c.west, &c.east).into_iter().enumerate() {
            out.set(i, j, out.get(i, j) + 0.5 * v);
        }
    }
    for i in 0..w {
        let idx: Vec<_> = (0..h).map(|j| (i, j)).collect();
        for (j, v) in line(&idx, &c.north, &c.south).into_iter().enumerate() {
            out.set(i, j, out.get(i, j) + 0.5 * v);
        }
    }
    out
}

/// Shortest paths on the 4-neighbour graph where stepping onto a node costs
/// that node's cost times the grid spacing.
pub fn dijkstra_upper(cost: &ScalarGrid, seeds: &[GridIndex]) -> ScalarGrid {
    let (w, h) = (cost.width(), cost.height());
    let (hx, hy) = cost.spacing();
    let mut dist = vec![f64::INFINITY; w * h];
    let mut heap = BinaryHeap::new();
    for s in seeds {
        let k = s.j * w + s.i;
        dist[k] = 0.0;
        heap.push(Reverse((OrdF64(0.0), k)));
    }
    while let Some(Reverse((OrdF64(d), k))) = heap.pop() {
        if d > dist[k] {
            continue;
        }
        let (i, j) = (k % w, k / w);
        let mut relax = |ni: usize, nj: usize, step: f64| {
            let nk = nj * w + ni;
            let nd = d + cost.get(ni, nj) * step;
            if nd < dist[nk] {
                dist[nk] = nd;
                heap.push(Reverse((OrdF64(nd), nk)));
            }
        };
        if i > 0 {
            relax(i - 1, j, hx);
        }
        if i + 1 < w {
            relax(i + 1, j, hx);
        }
        if j > 0 {
            relax(i, j - 1, hy);
        }
        if j + 1 < h {
            relax(i, j + 1, hy);
        }
    }
    ScalarGrid::new(w, h, dist).unwrap()
}

/// `min(cost) ×` Euclidean distance to the nearest seed, by brute force.
pub fn continuous_lower(cost: &ScalarGrid, seeds: &[GridIndex]) -> ScalarGrid {
    let c_min = cost.min();
    let (hx, hy) = cost.spacing();
    ScalarGrid::from_fn(cost.width(), cost.height(), |i, j| {
        let d = seeds
            .iter()
            .map(|s| {
                let dx = (i as f64 - s.i as f64) * hx;
                let dy = (j as f64 - s.j as f64) * hy;
                (dx * dx + dy * dy).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        c_min * d
    })
}

/// Brute-force Euclidean distance to the nearest seed in pixels.
pub fn brute_edt(w: usize, h: usize, seeds: &[GridIndex]) -> ScalarGrid {
    continuous_lower(&ScalarGrid::filled(w, h, 1.0), seeds)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
