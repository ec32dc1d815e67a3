use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curves::CurveLabel;
use super::{half_period_distance, torus_distance, wrap, HALF_PERIOD_POINTS};
use crate::error::{Error, Result};

/// Hits farther than this many cells from a half-period point are offending.
pub const HIT_RADIUS_CELLS: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub grid_n: usize,
    pub epsilon: f64,
    /// Negative control: use the `Σ₁²` function in place of `Σ₂′`.
    pub sabotage: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            grid_n: 2048,
            epsilon: 1e-3,
            sabotage: false,
        }
    }
}

/// An offending hit refined by Newton on the pair of curve functions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffendingRoot {
    pub x: [f64; 2],
    pub residuals: [f64; 2],
    pub lambda: f64,
    pub discriminant: f64,
    /// Distance to the nearest half-period point, in grid cells.
    pub distance_cells: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub grid_n: usize,
    pub epsilon: f64,
    pub sabotage: bool,
    /// `[x1, x2, res1, res2]` for every node with both residuals below `epsilon`.
    pub hits: Vec<[f64; 4]>,
    pub pass: bool,
    /// Hits farther than four cells from every half-period point.
    pub offending: Vec<[f64; 4]>,
    /// Nodes on all three curves with `λ > 0`, away from the half-period points.
    pub triple_hits: Vec<[f64; 2]>,
    pub roots: Vec<OffendingRoot>,
    /// Largest hit distance to a half-period point, in cells.
    pub max_distance_cells: f64,
}

impl CertificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `Err(CertificationFailed)` unless the run passed.
    pub fn check(&self) -> Result<()> {
        if self.pass {
            Ok(())
        } else {
            Err(Error::CertificationFailed {
                count: self.offending.len() + self.triple_hits.len(),
            })
        }
    }
}

fn lambda(x: [f64; 2]) -> f64 {
    -x[1].cos() / x[0].cos()
}

/// Newton on `(F₁, F₂) = 0` from `x`.
fn refine(f1: CurveLabel, f2: CurveLabel, mut x: [f64; 2]) -> [f64; 2] {
    for _ in 0..60 {
        let r = [f1.value(x), f2.value(x)];
        if r[0].abs().max(r[1].abs()) < 1e-15 {
            break;
        }
        let (a, b) = (f1.gradient(x), f2.gradient(x));
        let det = a[0] * b[1] - a[1] * b[0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = [(b[1] * r[0] - a[1] * r[1]) / det, (a[0] * r[1] - b[0] * r[0]) / det];
        if dx[0].hypot(dx[1]) > 0.1 {
            break;
        }
        x = [x[0] - dx[0], x[1] - dx[1]];
    }
    wrap(x)
}

/// Floating-point check that `Σ₁²` and `Σ₂′` meet only at the half-period
/// points, and that no node lies on all three curves with `λ > 0`.
///
/// Residuals are first-order distances `|F|/‖∇F‖` at the grid nodes, so a
/// hit means the node is within about `epsilon` of both curves.
pub fn certify_appendix(options: CertifyOptions) -> Result<CertificationReport> {
    let CertifyOptions {
        grid_n,
        epsilon,
        sabotage,
    } = options;
    if grid_n < 512 {
        return Err(Error::InvalidInput(format!(
            "certification needs at least 512 cells per axis, got {grid_n}"
        )));
    }
    if !(epsilon > 0.0 && epsilon <= 1e-2) {
        return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1e-2], got {epsilon}")));
    }
    let h = TAU / grid_n as f64;
    let radius = HIT_RADIUS_CELLS * h;
    let f1 = CurveLabel::Sigma1_2;
    let f2 = if sabotage {
        CurveLabel::Sigma1_2
    } else {
        CurveLabel::Sigma2prime
    };

    let per_row: Vec<(Vec<[f64; 4]>, Vec<[f64; 2]>)> = (0..grid_n)
        .into_par_iter()
        .map(|i| {
            let mut hits = Vec::new();
            let mut triple = Vec::new();
            for j in 0..grid_n {
                let x = [i as f64 * h, j as f64 * h];
                let r1 = f1.normalized_residual(x);
                if r1 >= epsilon {
                    continue;
                }
                let r2 = f2.normalized_residual(x);
                if r2 >= epsilon {
                    continue;
                }
                hits.push([x[0], x[1], r1, r2]);
                if CurveLabel::Sigma0.normalized_residual(x) < epsilon
                    && lambda(x) > 0.0
                    && half_period_distance(x) > radius
                {
                    triple.push(x);
                }
            }
            (hits, triple)
        })
        .collect();

    let mut hits = Vec::new();
    let mut triple_hits = Vec::new();
    for (h_row, t_row) in per_row {
        hits.extend(h_row);
        triple_hits.extend(t_row);
    }
    let offending: Vec<[f64; 4]> = hits
        .iter()
        .copied()
        .filter(|hit| half_period_distance([hit[0], hit[1]]) > radius)
        .collect();
    let max_distance_cells = hits
        .iter()
        .map(|hit| half_period_distance([hit[0], hit[1]]) / h)
        .fold(0.0, f64::max);

    // Refinement is only informative for genuine crossings; in sabotage mode
    // the two functions coincide and Newton is singular.
    let mut roots: Vec<OffendingRoot> = Vec::new();
    if !sabotage {
        for hit in &offending {
            let x = refine(f1, f2, [hit[0], hit[1]]);
            if roots.iter().any(|r| torus_distance(r.x, x) < 1e-6) {
                continue;
            }
            roots.push(OffendingRoot {
                x,
                residuals: [f1.value(x).abs(), f2.value(x).abs()],
                lambda: lambda(x),
                discriminant: crate::symbols::hex_discriminant(x),
                distance_cells: half_period_distance(x) / h,
            });
        }
        roots.sort_by(|a, b| a.x.partial_cmp(&b.x).expect("finite roots"));
    }

    debug_assert!(HALF_PERIOD_POINTS
        .iter()
        .all(|&p| f1.value(p).abs() < 1e-12 && f2.value(p).abs() < 1e-12));

    let pass = offending.is_empty() && triple_hits.is_empty();
    Ok(CertificationReport {
        grid_n,
        epsilon,
        sabotage,
        hits,
        pass,
        offending,
        triple_hits,
        roots,
        max_distance_cells,
    })
}
