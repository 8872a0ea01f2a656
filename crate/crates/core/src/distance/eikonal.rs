//! First-order fast marching for `|∇D| = cost`, `D = 0` on the seeds.
//!
//! Each trial value comes from the Godunov upwind update on the
//! 4-neighbourhood: with `a` the smaller accepted horizontal neighbour and
//! `b` the smaller accepted vertical neighbour, solve
//!
//! ```text
//! (d - a)² / h_x² + (d - b)² / h_y² = cost²
//! ```
//!
//! and fall back to the one-sided value when the root lies below
//! `max(a, b)`. The cost is sampled at the node being updated. Nodes are
//! accepted in order of tentative value with ties broken by row-major index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::grid::{GridIndex, ScalarGrid};

#[derive(Debug, Clone, Copy)]
struct Trial {
    dist: f64,
    idx: usize,
}

impl PartialEq for Trial {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Trial {}

impl PartialOrd for Trial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Trial {
    // BinaryHeap is a max-heap: invert so the smallest (dist, idx) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

/// Upwind quadratic update from the best accepted horizontal (`a`) and
/// vertical (`b`) neighbour values; either may be infinite.
pub fn upwind_update(a: f64, b: f64, cost: f64, hx: f64, hy: f64) -> f64 {
    let via_a = a + cost * hx;
    let via_b = b + cost * hy;
    if !a.is_finite() {
        return via_b;
    }
    if !b.is_finite() {
        return via_a;
    }
    let (wa, wb) = (1.0 / (hx * hx), 1.0 / (hy * hy));
    let disc = (wa + wb) * cost * cost - wa * wb * (a - b) * (a - b);
    if disc >= 0.0 {
        let d = (wa * a + wb * b + disc.sqrt()) / (wa + wb);
        if d >= a.max(b) {
            return d;
        }
    }
    via_a.min(via_b)
}

/// Arrival times of the front started at `seeds` through a strictly
/// positive `cost` field. Runs in O(N log N).
pub fn solve_eikonal(cost: &ScalarGrid, seeds: &[GridIndex]) -> Result<ScalarGrid> {
    if seeds.is_empty() {
        return Err(Error::EmptyMarkers);
    }
    if let Some((index, &value)) = cost
        .values()
        .iter()
        .enumerate()
        .find(|(_, &c)| !(c > 0.0 && c.is_finite()))
    {
        return Err(Error::DegenerateCost { index, value });
    }

    let (w, h) = (cost.width(), cost.height());
    let (hx, hy) = cost.spacing();
    let n = w * h;
    let mut dist = vec![f64::INFINITY; n];
    let mut accepted = vec![false; n];
    let mut heap = BinaryHeap::with_capacity(n / 4 + seeds.len());

    for s in seeds {
        if s.i >= w || s.j >= h {
            return Err(Error::MarkerOutOfBounds {
                i: s.i,
                j: s.j,
                width: w,
                height: h,
            });
        }
        let k = s.j * w + s.i;
        if dist[k] != 0.0 {
            dist[k] = 0.0;
            heap.push(Trial { dist: 0.0, idx: k });
        }
    }

    let cost = cost.values();
    while let Some(Trial { dist: d, idx }) = heap.pop() {
        if accepted[idx] || d > dist[idx] {
            continue;
        }
        accepted[idx] = true;
        let (i, j) = (idx % w, idx / w);

        let mut neighbours = [usize::MAX; 4];
        if i > 0 {
            neighbours[0] = idx - 1;
        }
        if i + 1 < w {
            neighbours[1] = idx + 1;
        }
        if j > 0 {
            neighbours[2] = idx - w;
        }
        if j + 1 < h {
            neighbours[3] = idx + w;
        }

        for &nb in neighbours.iter().filter(|&&nb| nb != usize::MAX) {
            if accepted[nb] {
                continue;
            }
            let (ni, nj) = (nb % w, nb / w);
            let known = |k: usize| if accepted[k] { dist[k] } else { f64::INFINITY };
            let mut a = f64::INFINITY;
            if ni > 0 {
                a = a.min(known(nb - 1));
            }
            if ni + 1 < w {
                a = a.min(known(nb + 1));
            }
            let mut b = f64::INFINITY;
            if nj > 0 {
                b = b.min(known(nb - w));
            }
            if nj + 1 < h {
                b = b.min(known(nb + w));
            }
            let candidate = upwind_update(a, b, cost[nb], hx, hy);
            if candidate < dist[nb] {
                dist[nb] = candidate;
                heap.push(Trial {
                    dist: candidate,
                    idx: nb,
                });
            }
        }
    }

    let mut out = ScalarGrid::like(
        crate::grid::GridShape {
            width: w,
            height: h,
            spacing_x: hx,
            spacing_y: hy,
        },
        0.0,
    );
    out.values_mut().copy_from_slice(&dist);
    Ok(out)
}
