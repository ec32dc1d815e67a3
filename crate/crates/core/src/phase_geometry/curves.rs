use std::f64::consts::TAU;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbols::{hex_discriminant, hex_discriminant_grad};

/// Emitted points satisfy `|F| <` this.
pub const CURVE_RESIDUAL_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveLabel {
    /// `D(x) = 0`.
    Sigma0,
    /// `(c₁+c₂)³ + c₁² + c₂² − c₁c₂ cos(x₁−x₂) = 0`.
    Sigma1_2,
    /// `c₁²c₂² cos²a − sin²a (cos²a + sin²b)² = 0`, `a = (x₁−x₂)/2`, `b = (x₁+x₂)/2`.
    Sigma2prime,
}

impl CurveLabel {
    pub const ALL: [CurveLabel; 3] = [CurveLabel::Sigma0, CurveLabel::Sigma1_2, CurveLabel::Sigma2prime];

    pub fn tag(self) -> &'static str {
        match self {
            CurveLabel::Sigma0 => "sigma0",
            CurveLabel::Sigma1_2 => "sigma1_2",
            CurveLabel::Sigma2prime => "sigma2prime",
        }
    }

    /// Defining function `F`.
    pub fn value(self, x: [f64; 2]) -> f64 {
        match self {
            CurveLabel::Sigma0 => hex_discriminant(x),
            CurveLabel::Sigma1_2 => {
                let (c1, c2) = (x[0].cos(), x[1].cos());
                let s = c1 + c2;
                s * s * s + c1 * c1 + c2 * c2 - c1 * c2 * (x[0] - x[1]).cos()
            }
            CurveLabel::Sigma2prime => {
                let (c1, c2) = (x[0].cos(), x[1].cos());
                let (sa, ca) = (0.5 * (x[0] - x[1])).sin_cos();
                let sb = (0.5 * (x[0] + x[1])).sin();
                let w = ca * ca + sb * sb;
                c1 * c1 * c2 * c2 * ca * ca - sa * sa * w * w
            }
        }
    }

    /// Analytic gradient of [`CurveLabel::value`].
    pub fn gradient(self, x: [f64; 2]) -> [f64; 2] {
        match self {
            CurveLabel::Sigma0 => hex_discriminant_grad(x),
            CurveLabel::Sigma1_2 => {
                let (s1, c1) = x[0].sin_cos();
                let (s2, c2) = x[1].sin_cos();
                let (sd, cd) = (x[0] - x[1]).sin_cos();
                let q = 3.0 * (c1 + c2) * (c1 + c2);
                [
                    -q * s1 - 2.0 * c1 * s1 + s1 * c2 * cd + c1 * c2 * sd,
                    -q * s2 - 2.0 * c2 * s2 + c1 * s2 * cd - c1 * c2 * sd,
                ]
            }
            CurveLabel::Sigma2prime => {
                let (s1, c1) = x[0].sin_cos();
                let (s2, c2) = x[1].sin_cos();
                let (sa, ca) = (0.5 * (x[0] - x[1])).sin_cos();
                let (sb, cb) = (0.5 * (x[0] + x[1])).sin_cos();
                let w = ca * ca + sb * sb;
                let p = c1 * c1 * c2 * c2;
                // ∂a/∂x = (1/2, −1/2), ∂b/∂x = (1/2, 1/2).
                let dw = [-ca * sa + sb * cb, ca * sa + sb * cb];
                let dsa2 = [sa * ca, -sa * ca];
                let dca2 = [-sa * ca, sa * ca];
                let dp = [-2.0 * c1 * s1 * c2 * c2, -2.0 * c2 * s2 * c1 * c1];
                let mut g = [0.0; 2];
                for i in 0..2 {
                    g[i] = dp[i] * ca * ca + p * dca2[i] - dsa2[i] * w * w - sa * sa * 2.0 * w * dw[i];
                }
                g
            }
        }
    }

    /// First-order distance estimate `|F| / ‖∇F‖`.
    pub fn normalized_residual(self, x: [f64; 2]) -> f64 {
        let f = self.value(x).abs();
        // Below this `F` is rounding noise; at the half-period points both
        // `F` and `∇F` vanish.
        if f < 1e-14 {
            return 0.0;
        }
        let g = self.gradient(x);
        let n = g[0].hypot(g[1]);
        if n == 0.0 {
            f64::INFINITY
        } else {
            f / n
        }
    }
}

impl fmt::Display for CurveLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for CurveLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sigma0" | "s0" => Ok(CurveLabel::Sigma0),
            "sigma1_2" | "sigma12" | "s1" => Ok(CurveLabel::Sigma1_2),
            "sigma2prime" | "sigma2'" | "s2" => Ok(CurveLabel::Sigma2prime),
            _ => Err(Error::InvalidInput(format!("unknown curve '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: [f64; 2],
    /// `|F(x)|`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSet {
    pub label: CurveLabel,
    pub grid_n: usize,
    pub points: Vec<CurvePoint>,
}

impl CurveSet {
    /// CSV with columns `x1,x2,residual`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x1,x2,residual")?;
        for p in &self.points {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", p.x[0], p.x[1], p.residual)?;
        }
        Ok(())
    }

    /// Smallest Euclidean distance from `target` to an emitted point.
    pub fn distance_to(&self, target: [f64; 2]) -> f64 {
        self.points
            .iter()
            .map(|p| (p.x[0] - target[0]).hypot(p.x[1] - target[1]))
            .fold(f64::INFINITY, f64::min)
    }
}

fn bisect(f: impl Fn([f64; 2]) -> f64, a: [f64; 2], b: [f64; 2], fa: f64) -> [f64; 2] {
    let (mut lo, mut hi, mut flo) = (a, b, fa);
    for _ in 0..80 {
        let mid = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
        let fm = f(mid);
        if fm == 0.0 || (mid == lo || mid == hi) {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])]
}

/// Local minimiser of `|F|` reached by Gauss–Newton steps from `x`, kept only
/// if it stays inside the cell and reaches the residual tolerance. Finds
/// isolated real points where `F` touches zero without changing sign.
fn touch_point(label: CurveLabel, x: [f64; 2], cell: ([f64; 2], f64)) -> Option<[f64; 2]> {
    let mut x = x;
    for _ in 0..60 {
        let f = label.value(x);
        if f.abs() < 1e-14 {
            break;
        }
        let g = label.gradient(x);
        let n2 = g[0] * g[0] + g[1] * g[1];
        if n2 == 0.0 {
            break;
        }
        x = [x[0] - f * g[0] / n2, x[1] - f * g[1] / n2];
    }
    let (origin, h) = cell;
    let inside = (0..2).all(|i| x[i] >= origin[i] && x[i] <= origin[i] + h);
    (inside && label.value(x).abs() < CURVE_RESIDUAL_TOL).then_some(x)
}

/// Marching-squares extraction of `{F = 0}` on `[0, 2π]²` with `grid_n`
/// cells per axis. Sign changes along cell edges are refined by bisection;
/// cells without a sign change but with a small first-order residual are
/// searched for touching zeros.
pub fn trace_curve(label: CurveLabel, grid_n: usize) -> Result<CurveSet> {
    if grid_n < 256 {
        return Err(Error::InvalidInput(format!(
            "curve tracing needs at least 256 cells per axis, got {grid_n}"
        )));
    }
    let h = TAU / grid_n as f64;
    let node = |i: usize, j: usize| [i as f64 * h, j as f64 * h];
    let f = |x: [f64; 2]| label.value(x);
    let values: Vec<f64> = (0..=grid_n)
        .into_par_iter()
        .flat_map_iter(|i| (0..=grid_n).map(move |j| f(node(i, j))))
        .collect();
    let at = |i: usize, j: usize| values[i * (grid_n + 1) + j];

    let rows: Vec<Vec<[f64; 2]>> = (0..=grid_n)
        .into_par_iter()
        .map(|i| {
            let mut pts = Vec::new();
            for j in 0..=grid_n {
                let v = at(i, j);
                if v.abs() < CURVE_RESIDUAL_TOL {
                    pts.push(node(i, j));
                }
                if j < grid_n {
                    let w = at(i, j + 1);
                    if v != 0.0 && w != 0.0 && (v < 0.0) != (w < 0.0) {
                        pts.push(bisect(f, node(i, j), node(i, j + 1), v));
                    }
                }
                if i < grid_n {
                    let w = at(i + 1, j);
                    if v != 0.0 && w != 0.0 && (v < 0.0) != (w < 0.0) {
                        pts.push(bisect(f, node(i, j), node(i + 1, j), v));
                    }
                }
                if i < grid_n && j < grid_n {
                    let corners = [v, at(i, j + 1), at(i + 1, j), at(i + 1, j + 1)];
                    let same_sign = corners.iter().all(|c| *c > 0.0) || corners.iter().all(|c| *c < 0.0);
                    if same_sign {
                        let centre = [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h];
                        if label.normalized_residual(centre) < h {
                            if let Some(p) = touch_point(label, centre, (node(i, j), h)) {
                                pts.push(p);
                            }
                        }
                    }
                }
            }
            pts
        })
        .collect();

    let mut points: Vec<CurvePoint> = Vec::new();
    for x in rows.into_iter().flatten() {
        let residual = f(x).abs();
        if residual >= CURVE_RESIDUAL_TOL {
            continue;
        }
        if let Some(last) = points.last() {
            if (last.x[0] - x[0]).abs() < 1e-12 && (last.x[1] - x[1]).abs() < 1e-12 {
                continue;
            }
        }
        points.push(CurvePoint { x, residual });
    }
    Ok(CurveSet {
        label,
        grid_n,
        points,
    })
}
