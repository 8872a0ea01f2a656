//! Exact Euclidean distance transform (Felzenszwalb–Huttenlocher lower
//! envelope of parabolas), separable over columns then rows.

use crate::error::{Error, Result};
use crate::grid::{GridIndex, GridShape, ScalarGrid};

/// 1D squared-distance transform of `f` with sample spacing `h`:
/// `out[p] = min_q f[q] + h² (p - q)²`. Infinite entries never become
/// envelope apexes; an all-infinite input stays infinite.
fn squared_distance_1d(f: &[f64], h: f64, out: &mut [f64]) {
    let n = f.len();
    let h2 = h * h;
    let mut apex = Vec::with_capacity(n);
    let mut bounds: Vec<f64> = Vec::with_capacity(n + 1);

    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        let qf = q as f64;
        loop {
            match apex.last() {
                None => {
                    apex.push(q);
                    bounds.clear();
                    bounds.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&r) => {
                    let rf = r as f64;
                    let s =
                        ((f[q] + h2 * qf * qf) - (f[r] + h2 * rf * rf)) / (2.0 * h2 * (qf - rf));
                    if s <= *bounds.last().unwrap() {
                        apex.pop();
                        bounds.pop();
                        continue;
                    }
                    apex.push(q);
                    bounds.push(s);
                    break;
                }
            }
        }
    }

    if apex.is_empty() {
        out.iter_mut().for_each(|v| *v = f64::INFINITY);
        return;
    }
    bounds.push(f64::INFINITY);
    let mut k = 0;
    for (p, slot) in out.iter_mut().enumerate() {
        let pf = p as f64;
        while bounds[k + 1] < pf {
            k += 1;
        }
        let q = apex[k] as f64;
        *slot = h2 * (pf - q) * (pf - q) + f[apex[k]];
    }
}

/// Unnormalized Euclidean distance (in spacing units) to the nearest seed.
pub fn euclidean_distance_raw(shape: GridShape, seeds: &[GridIndex]) -> Result<ScalarGrid> {
    if seeds.is_empty() {
        return Err(Error::EmptyMarkers);
    }
    let (w, h) = (shape.width, shape.height);
    let mut sq = vec![f64::INFINITY; w * h];
    for s in seeds {
        if !shape.contains(*s) {
            return Err(Error::MarkerOutOfBounds {
                i: s.i,
                j: s.j,
                width: w,
                height: h,
            });
        }
        sq[shape.index(s.i, s.j)] = 0.0;
    }

    let mut col = vec![0.0; h];
    let mut col_out = vec![0.0; h];
    for i in 0..w {
        for j in 0..h {
            col[j] = sq[j * w + i];
        }
        squared_distance_1d(&col, shape.spacing_y, &mut col_out);
        for j in 0..h {
            sq[j * w + i] = col_out[j];
        }
    }
    let mut row_out = vec![0.0; w];
    for j in 0..h {
        squared_distance_1d(&sq[j * w..(j + 1) * w], shape.spacing_x, &mut row_out);
        sq[j * w..(j + 1) * w].copy_from_slice(&row_out);
    }

    let mut grid = ScalarGrid::like(shape, 0.0);
    for (dst, v) in grid.values_mut().iter_mut().zip(sq) {
        *dst = v.sqrt();
    }
    Ok(grid)
}

/// Euclidean distance to the nearest seed divided by its maximum over the
/// grid, so values lie in [0, 1] with 0 on the seeds.
pub fn euclidean_distance(shape: GridShape, seeds: &[GridIndex]) -> Result<ScalarGrid> {
    Ok(normalize_by_max(euclidean_distance_raw(shape, seeds)?))
}

/// Divides by the grid maximum; an all-zero grid stays zero.
pub fn normalize_by_max(grid: ScalarGrid) -> ScalarGrid {
    let max = grid.max();
    if max > 0.0 {
        grid.map(|v| v / max)
    } else {
        grid.map(|_| 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(shape: GridShape, seeds: &[GridIndex]) -> Vec<f64> {
        let mut out = Vec::new();
        for j in 0..shape.height {
            for i in 0..shape.width {
                let d = seeds
                    .iter()
                    .map(|s| {
                        let dx = (i as f64 - s.i as f64) * shape.spacing_x;
                        let dy = (j as f64 - s.j as f64) * shape.spacing_y;
                        (dx * dx + dy * dy).sqrt()
                    })
                    .fold(f64::INFINITY, f64::min);
                out.push(d);
            }
        }
        out
    }

    #[test]
    fn single_centre_seed_normalizes_corner_to_one() {
        let d = euclidean_distance(GridShape::new(5, 5), &[GridIndex::new(2, 2)]).unwrap();
        assert_eq!(d.get(0, 0), 1.0);
        assert_eq!(d.get(4, 4), 1.0);
        assert_eq!(d.get(2, 2), 0.0);
        let raw = euclidean_distance_raw(GridShape::new(5, 5), &[GridIndex::new(2, 2)]).unwrap();
        assert!((raw.get(0, 0) - 8f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn seeds_everywhere_give_zeros() {
        let shape = GridShape::new(4, 3);
        let seeds: Vec<_> = (0..3)
            .flat_map(|j| (0..4).map(move |i| GridIndex::new(i, j)))
            .collect();
        let d = euclidean_distance(shape, &seeds).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_seeds_match_brute_force() {
        let shape = GridShape::new(7, 7);
        let seeds = [GridIndex::new(1, 5), GridIndex::new(6, 0)];
        let d = euclidean_distance_raw(shape, &seeds).unwrap();
        for (a, b) in d.values().iter().zip(brute_force(shape, &seeds)) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn anisotropic_spacing_matches_brute_force() {
        let shape = GridShape {
            width: 11,
            height: 9,
            spacing_x: 0.7,
            spacing_y: 1.9,
        };
        let seeds = [
            GridIndex::new(0, 0),
            GridIndex::new(8, 4),
            GridIndex::new(3, 8),
        ];
        let d = euclidean_distance_raw(shape, &seeds).unwrap();
        for (a, b) in d.values().iter().zip(brute_force(shape, &seeds)) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            euclidean_distance(GridShape::new(4, 4), &[]),
            Err(Error::EmptyMarkers)
        ));
        assert!(matches!(
            euclidean_distance(GridShape::new(4, 4), &[GridIndex::new(4, 0)]),
            Err(Error::MarkerOutOfBounds { .. })
        ));
    }
}
