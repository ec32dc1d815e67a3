//! Small-data nonlinear evolution `i∂ₜu + Δu + |u|^{2σ}u = 0` on the periodic
//! box, by Strang splitting, with a Duhamel–Picard iteration as an independent
//! short-time oracle.
//!
//! Both splitting substeps preserve `|u|` in `ℓ²` exactly: the linear one is
//! unitary and the nonlinear one `u ← u·e^{iτ|u|^{2σ}}` is a pointwise phase.

use std::io::Write;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decay_fit::mixed_norm;
use crate::error::{Error, Result};
use crate::propagator::{min_box_size, LinearPropagator, WaveField};
use crate::scalar::Real;
use crate::symbols::DispersionSymbol;

/// Time exponent of the recorded Strichartz norm.
pub const STRICHARTZ_Q: f64 = 4.0;
/// Space exponent of the recorded Strichartz norm.
pub const STRICHARTZ_R: f64 = 6.0;

/// `u ← u·exp(iτ|u|^{2σ})`, the exact flow of `i∂ₜu + |u|^{2σ}u = 0`.
pub fn nonlinear_phase<T: Real>(field: &mut WaveField<T>, tau: f64, sigma: f64) {
    let integer_power = (sigma.fract() == 0.0 && sigma <= 16.0).then_some(sigma as i32);
    let tau = T::lit(tau);
    let sigma = T::lit(sigma);
    // Below this angle the truncated series are exact in double precision.
    let small = T::lit(1e-4);
    let (c6, c12, c20) = (T::lit(1.0 / 6.0), T::lit(1.0 / 12.0), T::lit(1.0 / 20.0));
    let half = T::lit(0.5);
    field.data_mut().par_iter_mut().for_each(|z| {
        let m = z.norm_sqr();
        if m > T::zero() {
            let p = match integer_power {
                Some(k) => m.powi(k),
                None => m.powf(sigma),
            };
            let theta = tau * p;
            let (s, c) = if theta.abs() < small {
                let t2 = theta * theta;
                (
                    theta * (T::one() - t2 * c6 * (T::one() - t2 * c20)),
                    T::one() - t2 * half * (T::one() - t2 * c12),
                )
            } else {
                theta.sin_cos()
            };
            *z = *z * Complex::new(c, s);
        }
    });
}

fn check_step(dt: f64, sigma: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
    }
    if !(sigma >= 1.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("nonlinearity power must be at least 1, got {sigma}")));
    }
    Ok(())
}

/// One Strang step `N(dt/2) L(dt) N(dt/2)`.
///
/// Builds a fresh propagator; use [`evolve_dnls`] for many steps.
pub fn step_strang<T: Real>(
    field: &WaveField<T>,
    symbol: DispersionSymbol,
    dt: f64,
    sigma: f64,
) -> Result<WaveField<T>> {
    check_step(dt, sigma)?;
    let prop = LinearPropagator::new(symbol, field.n(), T::lit(dt))?;
    let mut u = field.clone();
    nonlinear_phase(&mut u, 0.5 * dt, sigma);
    prop.apply(&mut u);
    nonlinear_phase(&mut u, 0.5 * dt, sigma);
    Ok(u)
}

/// What to do when the initial box is below `min_box_size(T)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxPolicy {
    /// Refuse with `BoxTooSmall`.
    #[default]
    Fixed,
    /// Embed the field into larger boxes as the light cone grows, so that
    /// the box side is at least `min_box_size(t)` at every step end.
    Grow,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DnlsOptions {
    pub dt: f64,
    /// Nonlinearity exponent `σ` in `|u|^{2σ}u`.
    pub sigma: f64,
    /// Time between snapshots; must be a multiple of `dt`.
    pub snapshot_every: f64,
    pub box_policy: BoxPolicy,
    /// Keep every snapshot field, not only the last one.
    pub keep_fields: bool,
}

impl Default for DnlsOptions {
    fn default() -> Self {
        Self {
            dt: 1e-2,
            sigma: 2.0,
            snapshot_every: 1.0,
            box_policy: BoxPolicy::Fixed,
            keep_fields: true,
        }
    }
}

/// Norms recorded at a snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    pub n: usize,
    pub mass: f64,
    pub linf: f64,
    pub l4: f64,
    pub l6: f64,
    /// `‖u‖_{L⁴ℓ⁶}` over `[0, t]`, trapezoid rule on the snapshots.
    pub strichartz_partial: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub diagnostics: Vec<Diagnostics>,
    /// Snapshot fields (all of them, or just the last, per `keep_fields`).
    pub fields: Vec<(f64, WaveField<T>)>,
    pub steps: usize,
}

impl<T: Real> Trajectory<T> {
    pub fn final_field(&self) -> &WaveField<T> {
        &self.fields.last().expect("trajectory holds a field").1
    }

    /// Largest `|mass(t) − mass(0)| / mass(0)` over the snapshots.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.diagnostics[0].mass;
        if m0 == 0.0 {
            return 0.0;
        }
        self.diagnostics
            .iter()
            .map(|d| (d.mass - m0).abs() / m0)
            .fold(0.0, f64::max)
    }

    /// CSV with columns `t,mass,linf,l4,l6,strichartz_partial`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,mass,linf,l4,l6,strichartz_partial")?;
        for d in &self.diagnostics {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                d.t, d.mass, d.linf, d.l4, d.l6, d.strichartz_partial
            )?;
        }
        Ok(())
    }
}

fn ratio_steps(span: f64, dt: f64, what: &str) -> Result<usize> {
    let k = (span / dt).round();
    if k < 1.0 || ((span - k * dt).abs() > 1e-9 * span.max(dt)) {
        return Err(Error::InvalidInput(format!("time step {dt} does not divide the {what} {span}")));
    }
    Ok(k as usize)
}

fn diagnostics<T: Real>(t: f64, u: &WaveField<T>, history: &[Diagnostics]) -> Result<Diagnostics> {
    let l6 = u.norm_lr(STRICHARTZ_R).as_f64();
    let mut times: Vec<f64> = history.iter().map(|d| d.t).collect();
    let mut norms: Vec<f64> = history.iter().map(|d| d.l6).collect();
    times.push(t);
    norms.push(l6);
    let strichartz_partial = if times.len() == 1 {
        0.0
    } else {
        mixed_norm(&times, &norms, STRICHARTZ_Q)?
    };
    Ok(Diagnostics {
        t,
        n: u.n(),
        mass: u.mass().as_f64(),
        linf: u.sup_norm().as_f64(),
        l4: u.norm_lr(4.0).as_f64(),
        l6,
        strichartz_partial,
    })
}

/// Strang evolution from `psi` to time `t_end`, with snapshots every
/// `options.snapshot_every` (the first at `t = 0`).
///
/// Between snapshots consecutive nonlinear half steps are merged, so each
/// step costs one FFT pair.
pub fn evolve_dnls<T: Real>(
    psi: &WaveField<T>,
    symbol: DispersionSymbol,
    t_end: f64,
    options: &DnlsOptions,
) -> Result<Trajectory<T>> {
    let DnlsOptions {
        dt,
        sigma,
        snapshot_every,
        box_policy,
        keep_fields,
    } = *options;
    check_step(dt, sigma)?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidInput(format!("final time must be positive, got {t_end}")));
    }
    let per_snapshot = ratio_steps(snapshot_every, dt, "snapshot interval")?;
    let total = ratio_steps(t_end, dt, "final time")?;
    if total % per_snapshot != 0 {
        return Err(Error::InvalidInput(format!(
            "snapshot interval {snapshot_every} does not divide the final time {t_end}"
        )));
    }
    let needed = min_box_size(t_end);
    if box_policy == BoxPolicy::Fixed && psi.n() < needed {
        return Err(Error::BoxTooSmall {
            n: psi.n(),
            min: needed,
            t: t_end,
        });
    }

    let mut u = psi.clone();
    if box_policy == BoxPolicy::Grow && u.n() < min_box_size(0.0) {
        u = u.embed(min_box_size(0.0))?;
    }
    let mut prop = LinearPropagator::new(symbol, u.n(), T::lit(dt))?;
    let mut diags = vec![diagnostics(0.0, &u, &[])?];
    let mut fields = Vec::new();
    if keep_fields {
        fields.push((0.0, u.clone()));
    }

    let mut step = 0usize;
    while step < total {
        nonlinear_phase(&mut u, 0.5 * dt, sigma);
        for k in 0..per_snapshot {
            if box_policy == BoxPolicy::Grow {
                let want = min_box_size((step + k + 1) as f64 * dt);
                if want > u.n() {
                    u = u.embed(want)?;
                    prop = LinearPropagator::new(symbol, want, T::lit(dt))?;
                }
            }
            prop.apply(&mut u);
            let tau = if k + 1 == per_snapshot { 0.5 * dt } else { dt };
            nonlinear_phase(&mut u, tau, sigma);
        }
        step += per_snapshot;
        let t = step as f64 * dt;
        diags.push(diagnostics(t, &u, &diags)?);
        if keep_fields || step == total {
            fields.push((t, u.clone()));
        }
    }
    Ok(Trajectory {
        diagnostics: diags,
        fields,
        steps: total,
    })
}

#[derive(Clone, Debug)]
pub struct PicardResult<T> {
    /// Last iterate at the final time.
    pub field: WaveField<T>,
    /// `max_j ‖u_{k+1}(t_j) − u_k(t_j)‖₂` for each iteration `k`.
    pub increments: Vec<f64>,
}

/// Fixed-point iteration of the Duhamel map
/// `u ↦ e^{itΔ}ψ + i∫₀ᵗ e^{i(t−s)Δ}|u|^{2σ}u(s) ds`
/// on `quad_steps` uniform time nodes, trapezoid rule in `s`.
///
/// Iterate 0 is the free evolution. Fails with `Diverged` as soon as an
/// increment exceeds the previous one.
pub fn duhamel_picard<T: Real>(
    psi: &WaveField<T>,
    symbol: DispersionSymbol,
    t_end: f64,
    iterations: usize,
    sigma: f64,
    quad_steps: usize,
) -> Result<PicardResult<T>> {
    if !(t_end > 0.0 && t_end <= 1.0) {
        return Err(Error::InvalidInput(format!("Picard horizon must lie in (0, 1], got {t_end}")));
    }
    if iterations == 0 || quad_steps == 0 {
        return Err(Error::InvalidInput("need at least one iteration and one time node".into()));
    }
    check_step(t_end / quad_steps as f64, sigma)?;
    let needed = min_box_size(t_end);
    if psi.n() < needed {
        return Err(Error::BoxTooSmall {
            n: psi.n(),
            min: needed,
            t: t_end,
        });
    }
    let h = t_end / quad_steps as f64;
    let prop = LinearPropagator::new(symbol, psi.n(), T::lit(h))?;
    let half_h = Complex::new(T::lit(0.5 * h), T::zero());
    let i_unit = Complex::new(T::zero(), T::one());

    let nonlinear = |u: &WaveField<T>| {
        let mut out = u.clone();
        let sigma = T::lit(sigma);
        out.data_mut()
            .par_iter_mut()
            .for_each(|z| *z = *z * z.norm_sqr().powf(sigma));
        out
    };

    // Free evolution at every node.
    let mut free = Vec::with_capacity(quad_steps + 1);
    free.push(psi.clone());
    for j in 1..=quad_steps {
        let mut u = free[j - 1].clone();
        prop.apply(&mut u);
        free.push(u);
    }

    let mut current = free.clone();
    let mut increments = Vec::with_capacity(iterations);
    for iteration in 1..=iterations {
        // D_j = e^{ihΔ}(D_{j−1} + h/2 N_{j−1}) + h/2 N_j.
        let mut next = Vec::with_capacity(quad_steps + 1);
        next.push(psi.clone());
        let mut duhamel = WaveField::<T>::zeros(psi.n())?;
        let mut prev_n = nonlinear(&current[0]);
        let mut increment = 0.0f64;
        for j in 1..=quad_steps {
            let nj = nonlinear(&current[j]);
            for (d, p) in duhamel.data_mut().iter_mut().zip(prev_n.data()) {
                *d = *d + half_h * p;
            }
            prop.apply(&mut duhamel);
            for (d, p) in duhamel.data_mut().iter_mut().zip(nj.data()) {
                *d = *d + half_h * p;
            }
            let mut u = free[j].clone();
            for (z, d) in u.data_mut().iter_mut().zip(duhamel.data()) {
                *z = *z + i_unit * d;
            }
            increment = increment.max(u.l2_distance(&current[j]).as_f64());
            next.push(u);
            prev_n = nj;
        }
        if !increment.is_finite() || increments.last().is_some_and(|&last| increment > last) {
            return Err(Error::Diverged { iteration, increment });
        }
        increments.push(increment);
        current = next;
    }
    Ok(PicardResult {
        field: current.pop().expect("final node"),
        increments,
    })
}
