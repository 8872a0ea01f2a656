//! Convex selective-segmentation solver.
//!
//! Minimizes
//!
//! ```text
//! ∫ [λ₁(z - c₁)² - λ₂(z - c₂)²] u + μ ∫ g |∇u| + θ ∫ D u + α ∫ ν_ε(u)
//! ```
//!
//! over a relaxed indicator `u` by damped AOS steps, alternating with the
//! closed-form region means `c₁`, `c₂`. `D` is `D_G`, or `D_E` in
//! [`Mode::EuclideanPenalty`].

pub mod aos;
pub mod energy;
pub mod penalty;
pub mod thomas;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distance::DistanceBundle;
use crate::error::{invalid, Error, Result};
use crate::grid::{Mask, ScalarGrid};

pub use aos::{
    aos_step, diffusivity_half_points, line_systems, Axis, HalfPointCoefficients, LineSystem,
};
pub use energy::{energy_from_residual, weighted_tv};
pub use penalty::{heaviside, jump_slope, penalty_nu, penalty_nu_prime, penalty_nu_second};
pub use thomas::{thomas_in_place, thomas_solve};

/// Model variant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Geodesic penalty `D_G` (markers and anti-markers).
    #[default]
    #[serde(rename = "geodesic")]
    Geodesic,
    /// Euclidean distance `D_E` to the markers instead of `D_G`.
    #[serde(rename = "euclidean")]
    EuclideanPenalty,
    /// `D_G` penalty plus fitting terms weighted by `ω² = (1 - D_G g)²`.
    #[serde(rename = "weighted")]
    WeightedFitting,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Geodesic => "geodesic",
            Mode::EuclideanPenalty => "euclidean",
            Mode::WeightedFitting => "weighted",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geodesic" => Ok(Mode::Geodesic),
            "euclidean" => Ok(Mode::EuclideanPenalty),
            "weighted" => Ok(Mode::WeightedFitting),
            other => Err(invalid(
                "mode",
                format!("expected geodesic, euclidean or weighted, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub theta: f64,
    pub mu: f64,
    pub tau: f64,
    pub eps_heaviside: f64,
    pub eps2: f64,
    pub zeta: f64,
    pub gamma_threshold: f64,
    pub tol: f64,
    pub max_iterations: usize,
    pub mode: Mode,
    pub c_freeze_tol: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            lambda1: 5.0,
            lambda2: 5.0,
            theta: 5.0,
            mu: 1.0,
            tau: 1e-2,
            eps_heaviside: 0.01,
            eps2: 1e-6,
            zeta: 0.1,
            gamma_threshold: 0.5,
            tol: 1e-6,
            max_iterations: 5000,
            mode: Mode::Geodesic,
            c_freeze_tol: 1e-4,
        }
    }
}

impl SolverParams {
    /// Sets `λ₁ = λ₂ = lambda`.
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda1 = lambda;
        self.lambda2 = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tau", self.tau),
            ("eps_heaviside", self.eps_heaviside),
            ("eps2", self.eps2),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be > 0, got {v}")));
            }
        }
        let non_negative = [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("theta", self.theta),
            ("mu", self.mu),
            ("tol", self.tol),
            ("c_freeze_tol", self.c_freeze_tol),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be >= 0, got {v}")));
            }
        }
        if !(self.gamma_threshold > 0.0 && self.gamma_threshold < 1.0) {
            return Err(invalid("gamma_threshold", "must lie in (0, 1)"));
        }
        if !(self.zeta > 0.0 && self.zeta < 0.5) {
            return Err(invalid("zeta", "must lie in (0, 0.5)"));
        }
        Ok(())
    }
}

/// `(c₁, c₂)`, the `u`- and `(1 - u)`-weighted means of `z`, with `u`
/// clamped to `[0, 1]`.
pub fn region_means(z: &ScalarGrid, u: &ScalarGrid) -> Result<(f64, f64)> {
    z.ensure_same_shape(u)?;
    let (hx, hy) = z.spacing();
    let area = hx * hy;
    let (mut w1, mut s1, mut w2, mut s2) = (0.0, 0.0, 0.0, 0.0);
    for (&zk, &uk) in z.values().iter().zip(u.values()) {
        let v = uk.clamp(0.0, 1.0);
        w1 += v;
        s1 += v * zk;
        w2 += 1.0 - v;
        s2 += (1.0 - v) * zk;
    }
    let (w1, w2) = (w1 * area, w2 * area);
    if w1 < 1e-12 {
        return Err(Error::DegenerateRegion(w1));
    }
    if w2 < 1e-12 {
        return Err(Error::DegenerateRegion(w2));
    }
    Ok((s1 * area / w1, s2 * area / w2))
}

/// Mode-dependent inputs of the residual: the distance penalty `d` and, for
/// [`Mode::WeightedFitting`], the squared fitting weight `ω²`.
#[derive(Debug, Clone)]
pub struct ModeFields {
    pub distance: ScalarGrid,
    pub fit_weight: Option<ScalarGrid>,
}

impl ModeFields {
    pub fn new(bundle: &DistanceBundle, mode: Mode) -> Result<Self> {
        Ok(match mode {
            Mode::Geodesic => Self {
                distance: bundle.combined.clone(),
                fit_weight: None,
            },
            Mode::EuclideanPenalty => Self {
                distance: bundle.euclidean.clone(),
                fit_weight: None,
            },
            Mode::WeightedFitting => {
                let w = bundle.combined.zip_map(&bundle.edge_map, |d, g| {
                    let omega = 1.0 - d * g;
                    omega * omega
                })?;
                Self {
                    distance: bundle.combined.clone(),
                    fit_weight: Some(w),
                }
            }
        })
    }
}

/// `r = ω² [λ₁(z - c₁)² - λ₂(z - c₂)²] + θ d`, with `ω² ≡ 1` when
/// `fit_weight` is `None`.
pub fn fitting_residual(
    z: &ScalarGrid,
    c1: f64,
    c2: f64,
    distance: &ScalarGrid,
    fit_weight: Option<&ScalarGrid>,
    params: &SolverParams,
) -> Result<ScalarGrid> {
    z.ensure_same_shape(distance)?;
    if let Some(w) = fit_weight {
        z.ensure_same_shape(w)?;
    }
    let mut r = z.clone();
    for (k, slot) in r.values_mut().iter_mut().enumerate() {
        let zk = z.values()[k];
        let a = zk - c1;
        let b = zk - c2;
        let mut fit = params.lambda1 * a * a - params.lambda2 * b * b;
        if let Some(w) = fit_weight {
            fit *= w.values()[k];
        }
        *slot = fit + params.theta * distance.values()[k];
    }
    Ok(r)
}

/// Strict threshold `u > gamma`.
pub fn threshold(u: &ScalarGrid, gamma: f64) -> Mask {
    Mask::from_fn(u.width(), u.height(), |i, j| u.get(i, j) > gamma)
}

/// Energy of `u` for the given region means and penalty weight.
pub fn energy(
    u: &ScalarGrid,
    z: &ScalarGrid,
    c1: f64,
    c2: f64,
    bundle: &DistanceBundle,
    params: &SolverParams,
    alpha: f64,
) -> Result<f64> {
    let fields = ModeFields::new(bundle, params.mode)?;
    let r = fitting_residual(
        z,
        c1,
        c2,
        &fields.distance,
        fields.fit_weight.as_ref(),
        params,
    )?;
    u.ensure_same_shape(&r)?;
    Ok(energy_from_residual(
        u,
        &r,
        &bundle.edge_map,
        params.mu,
        alpha,
        params.eps_heaviside,
        params.eps2,
    ))
}

#[derive(Debug, Clone)]
pub struct SegmentationResult {
    /// Relaxed indicator at the last iterate.
    pub u: ScalarGrid,
    pub mask: Mask,
    pub c1: f64,
    pub c2: f64,
    /// `(c₁, c₂)` used in each iteration.
    pub c_history: Vec<(f64, f64)>,
    /// `‖u^{k+1} - u^k‖₂ / ‖u^k‖₂` per iteration.
    pub residual_history: Vec<f64>,
    /// Energy of `u⁰` followed by the energy after each step.
    pub energy_history: Vec<f64>,
    pub iterations: usize,
    pub alpha: f64,
    pub converged: bool,
}

impl SegmentationResult {
    /// Smallest and largest value `u` took over the run's final iterate.
    pub fn u_range(&self) -> (f64, f64) {
        (self.u.min(), self.u.max())
    }
}

/// Runs the alternating minimization from `u_init` until the relative
/// change drops below `params.tol` or `params.max_iterations` is reached.
pub fn segment(
    image: &ScalarGrid,
    bundle: &DistanceBundle,
    params: &SolverParams,
    u_init: &ScalarGrid,
) -> Result<SegmentationResult> {
    segment_observed(image, bundle, params, u_init, |_, _| {})
}

/// [`segment`] with a callback receiving each new iterate and its index.
pub fn segment_observed(
    image: &ScalarGrid,
    bundle: &DistanceBundle,
    params: &SolverParams,
    u_init: &ScalarGrid,
    mut observe: impl FnMut(usize, &ScalarGrid),
) -> Result<SegmentationResult> {
    params.validate()?;
    image.ensure_same_shape(u_init)?;
    image.ensure_same_shape(&bundle.combined)?;
    let fields = ModeFields::new(bundle, params.mode)?;
    let eps = params.eps_heaviside;

    let mut u = u_init.clone();
    let (mut c1, mut c2) = region_means(image, &u).map_err(|_| Error::EmptyRegion)?;
    let mut frozen = false;
    let mut c_history = Vec::new();
    let mut residual_history = Vec::new();
    let mut energy_history = Vec::new();
    let mut alpha = 0.0;
    let mut converged = false;
    let mut iterations = 0;

    let residual_for = |c1, c2| {
        fitting_residual(
            image,
            c1,
            c2,
            &fields.distance,
            fields.fit_weight.as_ref(),
            params,
        )
    };
    let energy_of = |u: &ScalarGrid, r: &ScalarGrid, alpha| {
        energy_from_residual(u, r, &bundle.edge_map, params.mu, alpha, eps, params.eps2)
    };

    for k in 0..params.max_iterations {
        if k > 0 && !frozen {
            if let Ok((n1, n2)) = region_means(image, &u) {
                if (n1 - c1).abs() + (n2 - c2).abs() < params.c_freeze_tol {
                    frozen = true;
                }
                c1 = n1;
                c2 = n2;
            }
        }
        c_history.push((c1, c2));
        let r = residual_for(c1, c2)?;
        alpha = r.sup_norm();
        if k == 0 {
            energy_history.push(energy_of(&u, &r, alpha));
        }
        let mut f = r.clone();
        for (slot, &uk) in f.values_mut().iter_mut().zip(u.values()) {
            *slot += alpha * penalty_nu_prime(uk, eps);
        }
        let coeffs = diffusivity_half_points(&bundle.edge_map, &u, params.eps2);
        let next = aos_step(&u, &coeffs, &f, params, alpha)?;

        let (mut diff, mut norm) = (0.0, 0.0);
        for (&a, &b) in next.values().iter().zip(u.values()) {
            diff += (a - b) * (a - b);
            norm += b * b;
        }
        let rel = if norm > 0.0 {
            (diff / norm).sqrt()
        } else {
            diff.sqrt()
        };
        residual_history.push(rel);
        energy_history.push(energy_of(&next, &r, alpha));
        u = next;
        iterations = k + 1;
        observe(k, &u);
        if rel < params.tol {
            converged = true;
            break;
        }
    }

    Ok(SegmentationResult {
        mask: threshold(&u, params.gamma_threshold),
        u,
        c1,
        c2,
        c_history,
        residual_history,
        energy_history,
        iterations,
        alpha,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_names_round_trip() {
        for m in [
            Mode::Geodesic,
            Mode::EuclideanPenalty,
            Mode::WeightedFitting,
        ] {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.as_str()));
        }
        assert!("m7".parse::<Mode>().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(SolverParams::default().validate().is_ok());
        let bad = [
            SolverParams {
                tau: 0.0,
                ..Default::default()
            },
            SolverParams {
                eps2: -1.0,
                ..Default::default()
            },
            SolverParams {
                gamma_threshold: 1.0,
                ..Default::default()
            },
            SolverParams {
                zeta: 0.5,
                ..Default::default()
            },
            SolverParams {
                theta: -1.0,
                ..Default::default()
            },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }

    #[test]
    fn params_json_fills_defaults() {
        let p: SolverParams = serde_json::from_str(r#"{"theta": 2, "mode": "euclidean"}"#).unwrap();
        assert_eq!(p.theta, 2.0);
        assert_eq!(p.mode, Mode::EuclideanPenalty);
        assert_eq!(p.tau, 1e-2);
    }

    #[test]
    fn region_means_examples() {
        let z = ScalarGrid::from_fn(6, 6, |i, j| ((i + j) % 2) as f64);
        let u = z.clone();
        assert_eq!(region_means(&z, &u).unwrap(), (1.0, 0.0));
        let half = ScalarGrid::filled(6, 6, 0.5);
        let (c1, c2) = region_means(&z, &half).unwrap();
        assert!((c1 - 0.5).abs() < 1e-15 && (c2 - 0.5).abs() < 1e-15);
        assert!(matches!(
            region_means(&z, &ScalarGrid::filled(6, 6, 0.0)),
            Err(Error::DegenerateRegion(_))
        ));
        assert!(region_means(&z, &ScalarGrid::filled(6, 6, 1.3)).is_err());
    }

    #[test]
    fn residual_examples() {
        let z = ScalarGrid::filled(3, 3, 0.4);
        let zero = ScalarGrid::filled(3, 3, 0.0);
        let p = SolverParams {
            theta: 0.0,
            ..Default::default()
        };
        let r = fitting_residual(&z, 0.4, 0.4, &zero, None, &p).unwrap();
        assert!(r.values().iter().all(|&v| v == 0.0));

        let z = ScalarGrid::filled(3, 3, 1.0);
        let d = ScalarGrid::filled(3, 3, 0.5);
        let p = SolverParams {
            theta: 2.0,
            ..Default::default()
        }
        .with_lambda(5.0);
        let r = fitting_residual(&z, 1.0, 0.0, &d, None, &p).unwrap();
        assert!(r.values().iter().all(|&v| v == -4.0));

        let w = ScalarGrid::filled(3, 3, 0.0);
        let one = ScalarGrid::filled(3, 3, 1.0);
        let r = fitting_residual(&z, 0.2, 0.9, &one, Some(&w), &p).unwrap();
        assert!(r.values().iter().all(|&v| v == 2.0));
    }

    #[test]
    fn threshold_is_strict() {
        assert_eq!(threshold(&ScalarGrid::filled(3, 3, 0.7), 0.5).count(), 9);
        assert_eq!(threshold(&ScalarGrid::filled(3, 3, 0.5), 0.5).count(), 0);
    }
}
