//! Critical points of `φ(v,x) = g(x) − ⟨v,x⟩` on the hexagonal symbol,
//! classification of degenerate ones, and the curves `Σ₀`, `Σ₁²`, `Σ₂′`.
//!
//! Everything here is specific to the hexagonal triangulation and works in
//! double precision.

mod certify;
mod classify;
mod critical;
mod curves;

pub use certify::{certify_appendix, CertificationReport, CertifyOptions, OffendingRoot};
pub use classify::{
    classify_singularity, local_taylor, sweep, CaseLabel, NormalForm, SingularityReport,
    SweepReport, TaylorCoefficients, UnclassifiedPoint, VelocityReport,
};
pub use critical::{find_critical_points, polish_degenerate, project_to_sigma0, CriticalPoint};
pub use curves::{trace_curve, CurveLabel, CurvePoint, CurveSet};

use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// `|D(x)|` at or below this is treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Newton stops once `‖∇g(x) − v‖` falls below this.
pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;
/// Converged roots must satisfy `‖∇g(x) − v‖` below this.
pub const ACCEPT_TOL: f64 = 1e-10;
/// Roots closer than this (on the torus) are merged.
pub const DEDUP_TOL: f64 = 1e-6;

/// Representative of `x` in `[0, 2π)²`.
pub fn wrap(x: [f64; 2]) -> [f64; 2] {
    let w = |a: f64| {
        let r = a.rem_euclid(TAU);
        if r >= TAU {
            0.0
        } else {
            r
        }
    };
    [w(x[0]), w(x[1])]
}

/// Euclidean distance on the flat torus `(R/2πZ)²`.
pub fn torus_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = |p: f64, q: f64| {
        let r = (p - q).rem_euclid(TAU);
        r.min(TAU - r)
    };
    d(a[0], b[0]).hypot(d(a[1], b[1]))
}

/// The four points `(π/2 + k₁π, π/2 + k₂π)` of the fundamental domain.
pub const HALF_PERIOD_POINTS: [[f64; 2]; 4] = [
    [FRAC_PI_2, FRAC_PI_2],
    [FRAC_PI_2, PI + FRAC_PI_2],
    [PI + FRAC_PI_2, FRAC_PI_2],
    [PI + FRAC_PI_2, PI + FRAC_PI_2],
];

/// Torus distance to the nearest half-period point.
pub fn half_period_distance(x: [f64; 2]) -> f64 {
    HALF_PERIOD_POINTS
        .iter()
        .map(|&p| torus_distance(x, p))
        .fold(f64::INFINITY, f64::min)
}
