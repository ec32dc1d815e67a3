use std::f64::consts::{FRAC_PI_2, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{torus_distance, wrap, ACCEPT_TOL, DEDUP_TOL, NEWTON_MAX_ITER, NEWTON_TOL};
use crate::error::{Error, Result};
use crate::symbols::{hex_discriminant, hex_discriminant_grad, DispersionSymbol};

const HEX: DispersionSymbol = DispersionSymbol::HEX;

/// Roots with `|D|` below this are candidates for degenerate polishing.
const POLISH_BAND: f64 = 1e-3;
/// Largest displacement polishing may apply to a Newton root.
const POLISH_RADIUS: f64 = 1e-3;

/// A solution of `∇g(x) = v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub v: [f64; 2],
    pub x: [f64; 2],
    /// `‖∇g(x) − v‖`.
    pub grad_norm: f64,
    /// `D(x)`.
    pub discriminant: f64,
}

impl CriticalPoint {
    pub fn at(x: [f64; 2], v: [f64; 2]) -> Self {
        let x = wrap(x);
        Self {
            v,
            x,
            grad_norm: norm(residual(x, v)),
            discriminant: hex_discriminant(x),
        }
    }
}

fn residual(x: [f64; 2], v: [f64; 2]) -> [f64; 2] {
    let g = HEX.grad(x);
    [g[0] - v[0], g[1] - v[1]]
}

fn norm(r: [f64; 2]) -> f64 {
    r[0].hypot(r[1])
}

fn newton(mut x: [f64; 2], v: [f64; 2]) -> Option<[f64; 2]> {
    for _ in 0..NEWTON_MAX_ITER {
        let r = residual(x, v);
        if norm(r) < NEWTON_TOL {
            break;
        }
        let h = HEX.hessian(x);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let mut dx = [
            (h[1][1] * r[0] - h[0][1] * r[1]) / det,
            (h[0][0] * r[1] - h[1][0] * r[0]) / det,
        ];
        // Near the fold the Hessian is nearly singular; cap wild steps.
        let len = norm(dx);
        if len > 1.0 {
            dx = [dx[0] / len, dx[1] / len];
        }
        x = [x[0] - dx[0], x[1] - dx[1]];
    }
    (norm(residual(x, v)) < ACCEPT_TOL).then(|| wrap(x))
}

/// Moves a near-degenerate root onto the exact degenerate critical point
/// nearby, if one exists: first by snapping to the `π/2` lattice, then by
/// Gauss–Newton on the overdetermined system `∇g(x) = v, D(x) = 0`.
pub fn polish_degenerate(x: [f64; 2], v: [f64; 2]) -> Option<[f64; 2]> {
    let snapped = wrap([
        (x[0] / FRAC_PI_2).round() * FRAC_PI_2,
        (x[1] / FRAC_PI_2).round() * FRAC_PI_2,
    ]);
    if torus_distance(x, snapped) < POLISH_RADIUS && norm(residual(snapped, v)) < ACCEPT_TOL {
        return Some(snapped);
    }
    let start = x;
    let mut x = x;
    for _ in 0..100 {
        let r = residual(x, v);
        let d = hex_discriminant(x);
        if norm(r) < ACCEPT_TOL && d.abs() < 1e-13 {
            return (torus_distance(start, x) < POLISH_RADIUS).then(|| wrap(x));
        }
        let h = HEX.hessian(x);
        let gd = hex_discriminant_grad(x);
        let rows = [[h[0][0], h[0][1]], [h[1][0], h[1][1]], gd];
        let res = [r[0], r[1], d];
        let mut a = [[0.0; 2]; 2];
        let mut b = [0.0; 2];
        for (row, &ri) in rows.iter().zip(&res) {
            for i in 0..2 {
                b[i] += row[i] * ri;
                for j in 0..2 {
                    a[i][j] += row[i] * row[j];
                }
            }
        }
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = [
            (a[1][1] * b[0] - a[0][1] * b[1]) / det,
            (a[0][0] * b[1] - a[1][0] * b[0]) / det,
        ];
        x = [x[0] - dx[0], x[1] - dx[1]];
        if torus_distance(start, x) > POLISH_RADIUS {
            return None;
        }
    }
    None
}

/// Newton projection of `x0` onto `Σ₀ = {D = 0}` along `∇D`.
pub fn project_to_sigma0(x0: [f64; 2]) -> Option<[f64; 2]> {
    let mut x = x0;
    for _ in 0..NEWTON_MAX_ITER {
        let d = hex_discriminant(x);
        if d.abs() < 1e-15 {
            return Some(wrap(x));
        }
        let g = hex_discriminant_grad(x);
        let n2 = g[0] * g[0] + g[1] * g[1];
        if n2 < 1e-20 {
            return None;
        }
        x = [x[0] - d * g[0] / n2, x[1] - d * g[1] / n2];
    }
    (hex_discriminant(x).abs() < 1e-13).then(|| wrap(x))
}

/// Roots of `∇g(x) = v` reached by Newton from a `grid_seeds²` grid of
/// starting points, polished near `Σ₀`, deduplicated and sorted.
pub fn find_critical_points(v: [f64; 2], grid_seeds: usize) -> Result<Vec<CriticalPoint>> {
    if grid_seeds < 16 {
        return Err(Error::InvalidInput(format!(
            "at least 16 seeds per axis required, got {grid_seeds}"
        )));
    }
    let h = TAU / grid_seeds as f64;
    let roots: Vec<[f64; 2]> = (0..grid_seeds * grid_seeds)
        .into_par_iter()
        .filter_map(|k| {
            let seed = [(k / grid_seeds) as f64 * h + 0.5 * h, (k % grid_seeds) as f64 * h + 0.5 * h];
            let x = newton(seed, v)?;
            if hex_discriminant(x).abs() < POLISH_BAND {
                if let Some(p) = polish_degenerate(x, v) {
                    return Some(p);
                }
            }
            Some(x)
        })
        .collect();
    let mut out: Vec<CriticalPoint> = Vec::new();
    for x in roots {
        let cp = CriticalPoint::at(x, v);
        match out.iter_mut().find(|p| torus_distance(p.x, cp.x) < DEDUP_TOL) {
            Some(p) => {
                if cp.grad_norm < p.grad_norm {
                    *p = cp;
                }
            }
            None => out.push(cp),
        }
    }
    out.sort_by(|a, b| a.x.partial_cmp(&b.x).expect("finite roots"));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn contains(points: &[CriticalPoint], x: [f64; 2]) -> bool {
        points.iter().any(|p| torus_distance(p.x, x) < 1e-8)
    }

    #[test]
    fn stationary_points_at_rest() {
        let pts = find_critical_points([0.0, 0.0], 16).unwrap();
        assert!(contains(&pts, [0.0, 0.0]));
        assert!(contains(&pts, [2.0 * PI / 3.0, 2.0 * PI / 3.0]));
        assert!(contains(&pts, [4.0 * PI / 3.0, 4.0 * PI / 3.0]));
        assert!(contains(&pts, [PI, 0.0]));
        assert!(contains(&pts, [0.0, PI]));
        assert!(contains(&pts, [PI, PI]));
        assert_eq!(pts.len(), 6);
        assert!(pts.iter().all(|p| p.grad_norm < ACCEPT_TOL));
    }

    #[test]
    fn degenerate_point_is_found_exactly() {
        let pts = find_critical_points([2.0, 2.0], 16).unwrap();
        let p = pts
            .iter()
            .find(|p| torus_distance(p.x, [FRAC_PI_2, FRAC_PI_2]) < 1e-6)
            .expect("cusp root");
        assert!(p.discriminant.abs() < 1e-15);
    }

    #[test]
    fn no_roots_outside_range() {
        assert!(find_critical_points([10.0, 10.0], 16).unwrap().is_empty());
        assert!(find_critical_points([1.0, 1.0], 8).is_err());
    }

    #[test]
    fn fold_points_are_polished() {
        for x0 in [[0.3, 2.0], [2.5, 4.0], [5.0, 1.2]] {
            let x = project_to_sigma0(x0).unwrap();
            let v = HEX.grad(x);
            let pts = find_critical_points(v, 24).unwrap();
            let p = pts.iter().find(|p| torus_distance(p.x, x) < 1e-6).expect("fold root");
            assert!(p.discriminant.abs() < 1e-12, "{p:?}");
            assert!(p.grad_norm < ACCEPT_TOL);
        }
    }

    #[test]
    fn projection_lands_on_sigma0() {
        let x = project_to_sigma0([1.0, 1.0]).unwrap();
        assert!(hex_discriminant(x).abs() < 1e-13);
        assert!(torus_distance(x, [1.0, 1.0]) < 0.5);
    }
}
