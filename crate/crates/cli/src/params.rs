//! Tunable parameters shared by the command line flags and the service's
//! params document. Unset fields keep the library defaults.

use clap::Args;
use geoseg::{DistanceConfig, Mode, PipelineConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Sets both fitting weights λ₁ and λ₂.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    /// Distance penalty weight θ.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Regularization weight μ.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// geodesic, euclidean or weighted.
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-iters")]
    pub max_iters: Option<usize>,
    /// Pre-smoother sweeps k (0 disables smoothing).
    #[arg(long = "smooth-iters")]
    pub smooth_iters: Option<usize>,
    #[arg(long = "beta-g")]
    pub beta_g: Option<f64>,
    #[arg(long = "eps-d")]
    pub eps_d: Option<f64>,
    #[arg(long)]
    pub vartheta: Option<f64>,
    #[arg(long = "alpha-tilde")]
    pub alpha_tilde: Option<f64>,
    /// Threshold γ̃ applied to u.
    #[arg(long)]
    pub threshold: Option<f64>,
}

/// The distance subset of [`Params`].
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct DistanceFlags {
    /// Pre-smoother sweeps k (0 disables smoothing).
    #[arg(long = "smooth-iters")]
    pub smooth_iters: Option<usize>,
    #[arg(long = "beta-g")]
    pub beta_g: Option<f64>,
    #[arg(long = "eps-d")]
    pub eps_d: Option<f64>,
    #[arg(long)]
    pub vartheta: Option<f64>,
    #[arg(long = "alpha-tilde")]
    pub alpha_tilde: Option<f64>,
}

impl DistanceFlags {
    pub fn config(&self) -> DistanceConfig {
        let mut d = DistanceConfig::default();
        set(&mut d.smoothing_iterations, self.smooth_iters);
        set(&mut d.beta_g, self.beta_g);
        set(&mut d.eps_d, self.eps_d);
        set(&mut d.vartheta, self.vartheta);
        set(&mut d.alpha_tilde, self.alpha_tilde);
        d
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Params {
    pub fn distance_flags(&self) -> DistanceFlags {
        DistanceFlags {
            smooth_iters: self.smooth_iters,
            beta_g: self.beta_g,
            eps_d: self.eps_d,
            vartheta: self.vartheta,
            alpha_tilde: self.alpha_tilde,
        }
    }

    /// Library defaults overridden by every field that is set. `lambda1`
    /// and `lambda2` take precedence over `lambda`.
    pub fn config(&self) -> geoseg::Result<PipelineConfig> {
        let mut s = PipelineConfig::default().solver;
        if let Some(l) = self.lambda {
            s = s.with_lambda(l);
        }
        set(&mut s.lambda1, self.lambda1);
        set(&mut s.lambda2, self.lambda2);
        set(&mut s.theta, self.theta);
        set(&mut s.mu, self.mu);
        set(&mut s.tau, self.tau);
        set(&mut s.mode, self.mode);
        set(&mut s.tol, self.tol);
        set(&mut s.max_iterations, self.max_iters);
        set(&mut s.gamma_threshold, self.threshold);
        let cfg = PipelineConfig {
            distance: self.distance_flags().config(),
            solver: s,
        };
        cfg.solver.validate()?;
        cfg.distance.validate()?;
        Ok(cfg)
    }
}
