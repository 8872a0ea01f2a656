//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are still executed and printed as
//! FAIL; the process exits non-zero if any other criterion fails or if a
//! known failure starts passing.

mod common;

use std::process::ExitCode;
use std::sync::Mutex;
use std::time::Instant;

use geoseg::distance::solve_eikonal;
use geoseg::solver::aos::{aos_step, diffusivity_half_points, line_systems, Axis};
use geoseg::solver::penalty::{penalty_nu, penalty_nu_prime};
use geoseg::solver::{segment_observed, thomas_solve};
use geoseg::{
    generate_synthetic, normalize, segment, tanimoto, DistanceBundle, DistanceConfig, GridIndex,
    MarkerSet, Mode, ScalarGrid, SegmentationResult, SolverParams, Synthetic, SyntheticKind,
};
use rand::Rng;
use rayon::prelude::*;

use common::*;

const SIZE: usize = 128;
const SEED: u64 = 1;

/// Criteria that fail with the faithful scheme; see the project notes.
const KNOWN_FAILURES: &[u32] = &[9];

/// Energies `(initial, final)` of every segmentation run, checked by
/// criterion 8.
static ENERGIES: Mutex<Vec<(String, f64, f64)>> = Mutex::new(Vec::new());

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn record(label: String, r: &SegmentationResult) {
    let first = r.energy_history[0];
    let last = *r.energy_history.last().unwrap();
    ENERGIES.lock().unwrap().push((label, first, last));
}

fn synthetic(kind: SyntheticKind, noise: f64) -> (Synthetic, ScalarGrid) {
    let s = generate_synthetic(kind, SIZE, noise, SEED).unwrap();
    let img = normalize(&s.image);
    (s, img)
}

fn run(
    label: String,
    img: &ScalarGrid,
    bundle: &DistanceBundle,
    params: &SolverParams,
    u0: &ScalarGrid,
) -> SegmentationResult {
    let r = segment(img, bundle, params, u0).unwrap();
    record(label, &r);
    r
}

fn criterion_1() -> Outcome {
    let (s, img) = synthetic(SyntheticKind::CircleAmongShapes, 0.0);
    let bundle = DistanceBundle::build(&img, &s.markers, &DistanceConfig::default()).unwrap();
    let eps2_values = [1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 1.0, 1e2, 1e4];
    let rows: Vec<(f64, f64, f64)> = eps2_values
        .par_iter()
        .map(|&eps2| {
            let params = SolverParams {
                theta: 2.0,
                eps2,
                ..SolverParams::default().with_lambda(2.0)
            };
            let start = Instant::now();
            let r = run(format!("c1 eps2={eps2:e}"), &img, &bundle, &params, &img);
            (
                eps2,
                tanimoto(&r.mask, &s.ground_truth).unwrap(),
                start.elapsed().as_secs_f64(),
            )
        })
        .collect();
    let pass = rows.iter().all(|&(_, tc, secs)| tc >= 0.99 && secs < 60.0);
    let min_tc = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let max_secs = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    outcome(
        pass,
        format!("min TC {min_tc:.5} over 8 eps2 values, slowest run {max_secs:.1}s"),
    )
}

fn off_target_blob(s: &Synthetic) -> ScalarGrid {
    let (cx, cy, r) = s.target;
    let (bx, by) = (SIZE as f64 - cx, SIZE as f64 - cy);
    ScalarGrid::from_fn(SIZE, SIZE, |i, j| {
        let d2 = (i as f64 - bx).powi(2) + (j as f64 - by).powi(2);
        if d2 <= (0.5 * r).powi(2) {
            1.0
        } else {
            0.0
        }
    })
}

fn criterion_2() -> Outcome {
    let rows: Vec<(SyntheticKind, f64)> = SyntheticKind::ALL
        .par_iter()
        .map(|&kind| {
            let (s, img) = synthetic(kind, 0.0);
            let bundle =
                DistanceBundle::build(&img, &s.markers, &DistanceConfig::default()).unwrap();
            let params = SolverParams::default();
            let a = run(format!("c2 {kind} image"), &img, &bundle, &params, &img);
            let b = run(
                format!("c2 {kind} blob"),
                &img,
                &bundle,
                &params,
                &off_target_blob(&s),
            );
            (kind, tanimoto(&a.mask, &b.mask).unwrap())
        })
        .collect();
    let pass = rows.iter().all(|r| r.1 >= 0.99);
    let detail = rows
        .iter()
        .map(|(k, tc)| format!("{k} {tc:.4}"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(pass, format!("mutual TC: {detail}"))
}

fn criterion_3() -> Outcome {
    let (s, img) = synthetic(SyntheticKind::CircleAmongShapes, 0.0);
    let (cx, cy, r) = s.target;
    let at = |x: f64, y: f64| GridIndex::new(x.round() as usize, y.round() as usize);
    let three = MarkerSet::new(
        vec![
            at(cx, cy),
            at(cx - 0.4 * r, cy - 0.2 * r),
            at(cx + 0.3 * r, cy + 0.4 * r),
        ],
        vec![],
    );
    let cfg = DistanceConfig::default();
    let b1 = DistanceBundle::build(&img, &s.markers, &cfg).unwrap();
    let b3 = DistanceBundle::build(&img, &three, &cfg).unwrap();
    let d_diff = b1.marker_geodesic.max_abs_diff(&b3.marker_geodesic);
    let params = SolverParams::default();
    let r1 = run("c3 one marker".into(), &img, &b1, &params, &img);
    let r3 = run("c3 three markers".into(), &img, &b3, &params, &img);
    let tc = tanimoto(&r1.mask, &r3.mask).unwrap();
    outcome(
        d_diff <= 0.05 && tc >= 0.99,
        format!("max |D_M1 - D_M3| {d_diff:.4}, mutual TC {tc:.4}"),
    )
}

fn grid_tcs(kind: SyntheticKind, mode: Mode) -> Vec<(f64, f64, f64)> {
    let (s, img) = synthetic(kind, 0.0);
    let bundle = DistanceBundle::build(&img, &s.markers, &DistanceConfig::default()).unwrap();
    let points: Vec<(f64, f64)> = [2.0, 5.0, 10.0, 20.0]
        .into_iter()
        .flat_map(|l| [1.0, 2.0, 5.0, 10.0].into_iter().map(move |t| (l, t)))
        .collect();
    points
        .par_iter()
        .map(|&(lambda, theta)| {
            let params = SolverParams {
                theta,
                mode,
                ..SolverParams::default().with_lambda(lambda)
            };
            let label = format!("c4 {kind} {mode} l={lambda} t={theta}");
            let r = run(label, &img, &bundle, &params, &img);
            (lambda, theta, tanimoto(&r.mask, &s.ground_truth).unwrap())
        })
        .collect()
}

fn criterion_4() -> Outcome {
    let circle = grid_tcs(SyntheticKind::CircleAmongShapes, Mode::Geodesic);
    let worst = circle
        .iter()
        .copied()
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .unwrap();
    let bridge = SyntheticKind::TwoTouchingCirclesBlurredBridge;
    let best = |rows: Vec<(f64, f64, f64)>| rows.iter().map(|r| r.2).fold(f64::MIN, f64::max);
    let geo = best(grid_tcs(bridge, Mode::Geodesic));
    let euc = best(grid_tcs(bridge, Mode::EuclideanPenalty));
    outcome(
        worst.2 >= 0.95 && geo - euc >= 0.05,
        format!(
            "circle min TC {:.4} at λ={} θ={}; bridge max TC geodesic {geo:.4} vs euclidean {euc:.4}",
            worst.2, worst.0, worst.1
        ),
    )
}

fn criterion_5() -> Outcome {
    let params = SolverParams {
        theta: 3.0,
        ..SolverParams::default().with_lambda(5.0)
    };
    let rows: Vec<(f64, f64, f64)> = [0.1, 0.2]
        .par_iter()
        .map(|&noise| {
            let (s, img) = synthetic(SyntheticKind::CircleAmongShapes, noise);
            let tc_with = |smoothing_iterations: usize| {
                let cfg = DistanceConfig {
                    smoothing_iterations,
                    ..DistanceConfig::default()
                };
                let bundle = DistanceBundle::build(&img, &s.markers, &cfg).unwrap();
                let label = format!("c5 noise={noise} k={smoothing_iterations}");
                let r = run(label, &img, &bundle, &params, &img);
                tanimoto(&r.mask, &s.ground_truth).unwrap()
            };
            (noise, tc_with(100), tc_with(0))
        })
        .collect();
    let pass = rows.iter().all(|&(_, sm, un)| sm >= un - 0.01) && rows[0].1 >= 0.90;
    let detail = rows
        .iter()
        .map(|(n, sm, un)| format!("σ={n}: smoothed {sm:.4} unsmoothed {un:.4}"))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(pass, detail)
}

fn criterion_6() -> Outcome {
    let mut worst_low: f64 = f64::INFINITY;
    let mut worst_high: f64 = f64::INFINITY;
    let mut r = rng(6);
    for _ in 0..20 {
        let cost = ScalarGrid::from_fn(16, 16, |_, _| r.random_range(0.1..10.0));
        let n_seeds = r.random_range(1..=3);
        let seeds: Vec<GridIndex> = (0..n_seeds)
            .map(|_| GridIndex::new(r.random_range(0..16), r.random_range(0..16)))
            .collect();
        let d = solve_eikonal(&cost, &seeds).unwrap();
        let lo = continuous_lower(&cost, &seeds);
        let hi = dijkstra_upper(&cost, &seeds);
        for k in 0..d.len() {
            worst_low = worst_low.min(d.values()[k] - lo.values()[k]);
            worst_high = worst_high.min(hi.values()[k] + 1e-9 - d.values()[k]);
        }
    }
    let ones = ScalarGrid::filled(16, 16, 1.0);
    let seed = GridIndex::new(5, 9);
    let d = solve_eikonal(&ones, &[seed]).unwrap();
    let mut axis_err: f64 = 0.0;
    for k in 0..16 {
        axis_err = axis_err.max((d.get(k, 9) - (k as f64 - 5.0).abs()).abs());
        axis_err = axis_err.max((d.get(5, k) - (k as f64 - 9.0).abs()).abs());
    }
    outcome(
        worst_low >= 0.0 && worst_high >= 0.0 && axis_err <= 1e-12,
        format!(
            "min margin above lower bound {worst_low:.3e}, below upper bound {worst_high:.3e}, axis error {axis_err:.1e}"
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut thomas_err: f64 = 0.0;
    for (n, seed) in [(1, 1), (2, 2), (17, 3), (200, 4)] {
        let (lo, di, up, rhs) = random_tridiagonal(n, seed);
        let x = thomas_solve(&lo, &di, &up, &rhs).unwrap();
        let y = dense_solve(tridiagonal_to_dense(&lo, &di, &up), rhs);
        for (a, b) in x.iter().zip(&y) {
            thomas_err = thomas_err.max((a - b).abs());
        }
    }
    let mut aos_err: f64 = 0.0;
    let mut r = rng(7);
    for _ in 0..5 {
        let u = ScalarGrid::from_fn(8, 8, |_, _| r.random_range(-0.2..1.2));
        let edge = ScalarGrid::from_fn(8, 8, |_, _| r.random_range(0.05..1.0));
        let f = ScalarGrid::from_fn(8, 8, |_, _| r.random_range(-3.0..3.0));
        let params = SolverParams::default();
        let alpha = r.random_range(0.5..5.0);
        let c = diffusivity_half_points(&edge, &u, params.eps2);
        let fast = aos_step(&u, &c, &f, &params, alpha).unwrap();
        let dense = dense_aos_step(&u, &c, &f, &params, alpha);
        aos_err = aos_err.max(fast.max_abs_diff(&dense));
    }
    outcome(
        thomas_err <= 1e-10 && aos_err <= 1e-10,
        format!("Thomas vs dense {thomas_err:.1e}, AOS step vs dense {aos_err:.1e}"),
    )
}

fn criterion_8() -> Outcome {
    let (s, img) = synthetic(SyntheticKind::CircleAmongShapes, 0.0);
    let bundle = DistanceBundle::build(&img, &s.markers, &DistanceConfig::default()).unwrap();
    let params = SolverParams::default();
    let c = diffusivity_half_points(&bundle.edge_map, &img, params.eps2);
    let f = img.map(|v| v - 0.5);
    let mut row_err: f64 = 0.0;
    for axis in [Axis::X, Axis::Y] {
        for sys in line_systems(&img, &c, &f, &params, 3.0, axis) {
            let n = sys.diag.len();
            for k in 0..n {
                let lo = if k > 0 { sys.lower[k] } else { 0.0 };
                let up = if k + 1 < n { sys.upper[k] } else { 0.0 };
                row_err = row_err.max((lo + sys.diag[k] + up - 1.0).abs());
            }
        }
    }

    let mut monotone = true;
    let mut fd_err: f64 = 0.0;
    for eps in [1.0, 0.1] {
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=3000 {
            let u = -1.0 + k as f64 * 1e-3;
            let d = penalty_nu_prime(u, eps);
            monotone &= d >= prev;
            prev = d;
            let h = 1e-6;
            let fd = (penalty_nu(u + h, eps) - penalty_nu(u - h, eps)) / (2.0 * h);
            fd_err = fd_err.max((d - fd).abs());
        }
    }

    let energies = ENERGIES.lock().unwrap();
    let rising: Vec<&String> = energies
        .iter()
        .filter(|(_, first, last)| last > first)
        .map(|(label, ..)| label)
        .collect();
    outcome(
        row_err <= 1e-12 && monotone && fd_err <= 1e-6 && rising.is_empty(),
        format!(
            "row sums ±{row_err:.1e}, ν′ monotone {monotone}, ν′ vs FD {fd_err:.1e}, \
             energy final > initial in {}/{} runs {:?}",
            rising.len(),
            energies.len(),
            rising
        ),
    )
}

fn criterion_9() -> Outcome {
    let (s, img) = synthetic(SyntheticKind::CircleAmongShapes, 0.0);
    let bundle = DistanceBundle::build(&img, &s.markers, &DistanceConfig::default()).unwrap();
    let params = SolverParams {
        tau: 1.0,
        ..SolverParams::default()
    };
    let (mut lo, mut hi) = (img.min(), img.max());
    let r = segment_observed(&img, &bundle, &params, &img, |_, u| {
        lo = lo.min(u.min());
        hi = hi.max(u.max());
    })
    .unwrap();
    let bounded = lo >= -1.0 && hi <= 2.0;
    outcome(
        r.converged && bounded,
        format!(
            "converged {} after {} iterations, iterates in [{lo:.3}, {hi:.3}]",
            r.converged, r.iterations
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (1, "circle TC over eps2 sweep", criterion_1),
        (2, "initialization independence", criterion_2),
        (3, "marker robustness", criterion_3),
        (4, "parameter robustness", criterion_4),
        (5, "noise study", criterion_5),
        (6, "eikonal oracle", criterion_6),
        (7, "linear-algebra oracles", criterion_7),
        (8, "structural invariants", criterion_8),
        (9, "large time step stability", criterion_9),
    ];
    let mut unexpected = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let o = check();
        let known = KNOWN_FAILURES.contains(&id);
        let status = match (o.pass, known) {
            (true, false) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (known)",
            (true, true) => "PASS (unexpected)",
        };
        if o.pass == known {
            unexpected += 1;
        }
        println!(
            "criterion {id} [{status}] {name}: {} ({:.1}s)",
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
