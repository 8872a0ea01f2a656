//! Smoothed exact penalty `ν_ε` keeping the relaxed indicator near [0, 1].
//!
//! ```text
//! s(u)   = sqrt((2u - 1)² + ε) - 1
//! H_ε(t) = 1/2 + atan(t / ε) / π
//! ν_ε(u) = H_ε(s(u)) · s(u)
//! ```
//!
//! `ν_ε` is even about `u = 1/2`, so `ν_ε'` is odd about it and
//! `ν_ε''(0) = ν_ε''(1)`.

use std::f64::consts::PI;

/// Smoothed Heaviside `1/2 + atan(t/ε)/π`.
#[inline]
pub fn heaviside(t: f64, eps: f64) -> f64 {
    0.5 + (t / eps).atan() / PI
}

#[inline]
fn heaviside_d1(t: f64, eps: f64) -> f64 {
    eps / (PI * (eps * eps + t * t))
}

#[inline]
fn heaviside_d2(t: f64, eps: f64) -> f64 {
    let q = eps * eps + t * t;
    -2.0 * eps * t / (PI * q * q)
}

#[inline]
pub fn penalty_nu(u: f64, eps: f64) -> f64 {
    let w = 2.0 * u - 1.0;
    let s = (w * w + eps).sqrt() - 1.0;
    heaviside(s, eps) * s
}

/// `dν_ε/du`.
#[inline]
pub fn penalty_nu_prime(u: f64, eps: f64) -> f64 {
    let w = 2.0 * u - 1.0;
    let q = (w * w + eps).sqrt();
    let s = q - 1.0;
    let ds = 2.0 * w / q;
    (heaviside_d1(s, eps) * s + heaviside(s, eps)) * ds
}

/// `d²ν_ε/du²`.
pub fn penalty_nu_second(u: f64, eps: f64) -> f64 {
    let w = 2.0 * u - 1.0;
    let q = (w * w + eps).sqrt();
    let s = q - 1.0;
    let ds = 2.0 * w / q;
    let d2s = 4.0 * eps / (q * q * q);
    let outer_d1 = heaviside_d1(s, eps) * s + heaviside(s, eps);
    let outer_d2 = heaviside_d2(s, eps) * s + 2.0 * heaviside_d1(s, eps);
    outer_d2 * ds * ds + outer_d1 * d2s
}

/// Linear Taylor coefficient `b` of `ν_ε'` at `u = 0` and `u = 1` (equal by
/// symmetry).
pub fn jump_slope(eps: f64) -> f64 {
    penalty_nu_second(1.0, eps)
}

/// `true` when `u` lies in `[-ζ, ζ] ∪ [1 - ζ, 1 + ζ]`.
#[inline]
pub fn in_jump_interval(u: f64, zeta: f64) -> bool {
    u.abs() <= zeta || (u - 1.0).abs() <= zeta
}
