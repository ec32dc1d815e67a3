//! Direct quadrature of the lattice kernel and decay series.
//!
//! The tensor trapezoid rule on the torus is the same finite sum as the
//! inverse DFT used by [`crate::propagator`], so the two are independent
//! implementations of one number and serve as oracles for each other.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decay_fit::{Backend, DecaySample, DecaySeries};
use crate::error::{Error, Result};
use crate::propagator::{kernel_fft, min_box_size};
use crate::scalar::Real;
use crate::symbols::{DispersionSymbol, LatticeKind};

/// Light-cone radius used for velocity sampling, `4√2 + 1`.
pub const VELOCITY_RADIUS: f64 = 4.0 * std::f64::consts::SQRT_2 + 1.0;

/// Default largest box side handed to the FFT backend.
pub const DEFAULT_FFT_BUDGET: usize = 4096;

/// Points per axis for [`kernel_quadrature`]: four samples per period of the
/// fastest phase oscillation, at least 16.
pub fn nyquist_points(t: f64, l: [i64; 2]) -> usize {
    let lmax = l[0].abs().max(l[1].abs()).max((l[0] + l[1]).abs()) as f64;
    let per = ((4.0 * t.abs() + lmax) / std::f64::consts::PI).ceil() as usize;
    (4 * per).max(16)
}

/// `(1/m²) Σ_{j,k} e^{-itg(x) + i⟨l,x⟩}` with `x = 2π(j,k)/m`.
///
/// Rows are summed in parallel and combined in row order, so the result does
/// not depend on the thread count.
pub fn kernel_quadrature<T: Real>(
    symbol: DispersionSymbol,
    l: [i64; 2],
    t: T,
    m: usize,
) -> Result<Complex<T>> {
    let required = nyquist_points(t.as_f64(), l);
    if m < required {
        return Err(Error::InsufficientResolution { m, required });
    }
    let two_pi_m = T::lit(2.0 * std::f64::consts::PI) / T::lit(m as f64);
    let cosines: Vec<T> = (0..m)
        .map(|j| (two_pi_m * T::lit(j as f64)).cos())
        .collect();
    let mi = m as i64;
    let l0 = l[0].rem_euclid(mi);
    let l1 = l[1].rem_euclid(mi);
    let hex = symbol.lattice == LatticeKind::HexTriangulation;
    let (six, four, two) = (T::lit(6.0), T::lit(4.0), T::lit(2.0));
    let rows: Vec<Complex<T>> = (0..m)
        .into_par_iter()
        .map(|j| {
            let c1 = cosines[j];
            let base = (l0 * j as i64) % mi;
            let mut acc = Complex::new(T::zero(), T::zero());
            for (k, &c2) in cosines.iter().enumerate() {
                let g = if hex {
                    six - two * (c1 + c2 + cosines[(j + k) % m])
                } else {
                    four - two * (c1 + c2)
                };
                // ⟨l,x⟩ reduced exactly modulo 2π through integer arithmetic.
                let r = (base + l1 * k as i64) % mi;
                let phase = two_pi_m * T::lit(r as f64) - t * g;
                let (s, c) = phase.sin_cos();
                acc = acc + Complex::new(c, s);
            }
            acc
        })
        .collect();
    let total = rows
        .into_iter()
        .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b);
    let norm = T::lit((m * m) as f64);
    Ok(total / norm)
}

/// Site set over which the supremum of `|K(·,t)|` is taken.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocitySampling {
    /// Every site of the FFT box.
    AllSites,
    /// Sites `l = round(t·v)` for the listed velocities.
    Points(Vec<[f64; 2]>),
}

impl VelocitySampling {
    /// Velocities of a `k×k` grid over `[-R, R]²` kept inside the disc of
    /// radius `R = 4√2 + 1`.
    pub fn grid(k: usize) -> Self {
        Self::Points(velocity_grid(k, VELOCITY_RADIUS))
    }

    pub fn describe(&self) -> String {
        match self {
            VelocitySampling::AllSites => "all_sites".into(),
            VelocitySampling::Points(v) => format!("velocity_points:{}", v.len()),
        }
    }
}

/// `k×k` grid over `[-radius, radius]²`, restricted to the closed disc.
pub fn velocity_grid(k: usize, radius: f64) -> Vec<[f64; 2]> {
    if k == 0 {
        return Vec::new();
    }
    if k == 1 {
        return vec![[0.0, 0.0]];
    }
    let coord = |i: usize| radius * ((2 * i) as f64 / (k - 1) as f64 - 1.0);
    let mut out = Vec::new();
    for i in 0..k {
        for j in 0..k {
            let v = [coord(i), coord(j)];
            if v[0].hypot(v[1]) <= radius * (1.0 + 1e-12) {
                out.push(v);
            }
        }
    }
    out
}

/// Options for [`decay_series`].
#[derive(Clone, Debug)]
pub struct DecayOptions {
    pub sampling: VelocitySampling,
    /// Largest box side the FFT backend may use.
    pub fft_budget: usize,
}

impl Default for DecayOptions {
    fn default() -> Self {
        Self {
            sampling: VelocitySampling::AllSites,
            fft_budget: DEFAULT_FFT_BUDGET,
        }
    }
}

fn sites_for(velocities: &[[f64; 2]], t: f64) -> Vec<[i64; 2]> {
    let mut sites: Vec<[i64; 2]> = velocities
        .iter()
        .map(|v| [(t * v[0]).round() as i64, (t * v[1]).round() as i64])
        .collect();
    sites.sort_unstable();
    sites.dedup();
    sites
}

/// `sup |K(l,t)|` for each time, from the FFT kernel when
/// `min_box_size(t) ≤ fft_budget` and by quadrature otherwise.
pub fn decay_series<T: Real>(
    symbol: DispersionSymbol,
    times: &[f64],
    options: &DecayOptions,
) -> Result<DecaySeries> {
    let mut series = DecaySeries::new(symbol.lattice, options.sampling.describe());
    for &t in times {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidInput(format!("time {t} must be nonnegative")));
        }
        let n = min_box_size(t);
        let (value, argmax, backend) = if n <= options.fft_budget {
            let k = kernel_fft(symbol, n, T::lit(t))?;
            let (value, argmax) = match &options.sampling {
                VelocitySampling::AllSites => k.sup(),
                VelocitySampling::Points(v) => sup_over(
                    sites_for(v, t)
                        .into_iter()
                        .map(|l| Ok((l, k.get(l).unwrap_or_else(|| Complex::new(T::zero(), T::zero()))))),
                )?,
            };
            (value.as_f64(), argmax, Backend::Fft)
        } else {
            let v = match &options.sampling {
                VelocitySampling::Points(v) => v,
                VelocitySampling::AllSites => {
                    return Err(Error::Unsupported(format!(
                        "all-site supremum at t = {t} needs a {n} box, above the budget {}",
                        options.fft_budget
                    )))
                }
            };
            let (value, argmax) = sup_over(sites_for(v, t).into_iter().map(|l| {
                let m = nyquist_points(t, l);
                kernel_quadrature(symbol, l, T::lit(t), m).map(|z| (l, z))
            }))?;
            (value.as_f64(), argmax, Backend::Quadrature)
        };
        series.push(DecaySample {
            t,
            value,
            argmax,
            backend,
        })?;
    }
    Ok(series)
}

fn sup_over<T: Real>(
    values: impl Iterator<Item = Result<([i64; 2], Complex<T>)>>,
) -> Result<(T, [i64; 2])> {
    let mut best = (T::zero(), [0, 0]);
    for item in values {
        let (l, z) = item?;
        if z.norm() > best.0 {
            best = (z.norm(), l);
        }
    }
    Ok(best)
}
