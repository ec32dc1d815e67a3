//! Power-law exponent estimation and Strichartz space-time norms.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagator::WaveField;
use crate::scalar::Real;
use crate::symbols::LatticeKind;

/// Minimum number of samples a fit window must hold.
pub const MIN_FIT_SAMPLES: usize = 8;

/// Which computation produced a decay sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Fft,
    Quadrature,
    /// Values supplied from outside (synthetic data, files).
    External,
}

impl Backend {
    pub fn tag(self) -> &'static str {
        match self {
            Backend::Fft => "fft",
            Backend::Quadrature => "quadrature",
            Backend::External => "external",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fft" => Ok(Backend::Fft),
            "quadrature" => Ok(Backend::Quadrature),
            "external" => Ok(Backend::External),
            _ => Err(Error::InvalidInput(format!("unknown backend '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub t: f64,
    pub value: f64,
    pub argmax: [i64; 2],
    pub backend: Backend,
}

/// Time series of `sup_l |K(l,t)|` (or any nonnegative decaying quantity).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySeries {
    pub lattice: LatticeKind,
    /// Human-readable description of the sampled site set.
    pub sampling: String,
    samples: Vec<DecaySample>,
}

impl DecaySeries {
    pub fn new(lattice: LatticeKind, sampling: impl Into<String>) -> Self {
        Self {
            lattice,
            sampling: sampling.into(),
            samples: Vec::new(),
        }
    }

    /// Series from bare `(t, value)` pairs.
    pub fn from_values(lattice: LatticeKind, times: &[f64], values: &[f64]) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        let mut s = Self::new(lattice, "external");
        for (&t, &value) in times.iter().zip(values) {
            s.push(DecaySample {
                t,
                value,
                argmax: [0, 0],
                backend: Backend::External,
            })?;
        }
        Ok(s)
    }

    /// Appends a sample; times must increase strictly and values be nonnegative.
    pub fn push(&mut self, sample: DecaySample) -> Result<()> {
        if !(sample.value >= 0.0) || !sample.value.is_finite() {
            return Err(Error::InvalidInput(format!(
                "sample value {} at t = {} is not a nonnegative number",
                sample.value, sample.t
            )));
        }
        if let Some(last) = self.samples.last() {
            if !(sample.t > last.t) {
                return Err(Error::InvalidInput(format!(
                    "times must increase strictly ({} after {})",
                    sample.t, last.t
                )));
            }
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn samples(&self) -> &[DecaySample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// CSV with columns `t,sup_abs,argmax_l1,argmax_l2,backend`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,sup_abs,argmax_l1,argmax_l2,backend")?;
        for s in &self.samples {
            writeln!(
                w,
                "{:.16e},{:.16e},{},{},{}",
                s.t, s.value, s.argmax[0], s.argmax[1], s.backend
            )?;
        }
        Ok(())
    }

    /// Reads the format produced by [`DecaySeries::write_csv`].
    pub fn read_csv<R: BufRead>(lattice: LatticeKind, r: R) -> Result<Self> {
        let mut series = Self::new(lattice, "file");
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let bad = || Error::InvalidInput(format!("malformed decay row {}: '{line}'", i + 1));
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() < 2 {
                return Err(bad());
            }
            let t = cols[0].parse().map_err(|_| bad())?;
            let value = cols[1].parse().map_err(|_| bad())?;
            let argmax = if cols.len() >= 4 {
                [cols[2].parse().map_err(|_| bad())?, cols[3].parse().map_err(|_| bad())?]
            } else {
                [0, 0]
            };
            let backend = match cols.get(4) {
                Some(b) => b.parse()?,
                None => Backend::External,
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
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    Direct,
    /// Each dyadic block `[2^k, 2^{k+1})` is replaced by its largest sample.
    DyadicEnvelope,
}

impl FromStr for FitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(FitMethod::Direct),
            "dyadic_envelope" | "dyadic-envelope" | "envelope" => Ok(FitMethod::DyadicEnvelope),
            _ => Err(Error::InvalidInput(format!("unknown fit method '{s}'"))),
        }
    }
}

/// `log value ≈ intercept + slope · log t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub method: FitMethod,
    pub n_samples: usize,
}

impl PowerLawFit {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit serialises")
    }

    /// Model value `e^{intercept} t^{slope}`.
    pub fn predict(&self, t: f64) -> f64 {
        (self.intercept + self.slope * t.ln()).exp()
    }
}

/// Least-squares power law over the samples with `t` in `window`.
pub fn fit_power_law(
    series: &DecaySeries,
    window: (f64, f64),
    method: FitMethod,
) -> Result<PowerLawFit> {
    let (t_min, t_max) = window;
    let inside: Vec<&DecaySample> = series
        .samples()
        .iter()
        .filter(|s| s.t >= t_min && s.t <= t_max)
        .collect();
    if inside.len() < MIN_FIT_SAMPLES {
        return Err(Error::DegenerateWindow {
            t_min,
            t_max,
            found: inside.len(),
            needed: MIN_FIT_SAMPLES,
        });
    }
    for s in &inside {
        if !(s.value > 0.0) || !(s.t > 0.0) {
            return Err(Error::ZeroValue {
                t: s.t,
                value: s.value,
            });
        }
    }
    let points: Vec<(f64, f64)> = match method {
        FitMethod::Direct => inside.iter().map(|s| (s.t, s.value)).collect(),
        FitMethod::DyadicEnvelope => dyadic_envelope(&inside),
    };
    if points.len() < 2 {
        return Err(Error::DegenerateWindow {
            t_min,
            t_max,
            found: points.len(),
            needed: 2,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, r_squared) = least_squares(&xs, &ys);
    Ok(PowerLawFit {
        slope,
        intercept,
        r_squared,
        window,
        method,
        n_samples: inside.len(),
    })
}

fn dyadic_envelope(samples: &[&DecaySample]) -> Vec<(f64, f64)> {
    let mut out: Vec<(i32, f64, f64)> = Vec::new();
    for s in samples {
        let block = s.t.log2().floor() as i32;
        match out.last_mut() {
            Some(last) if last.0 == block => {
                if s.value > last.2 {
                    *last = (block, s.t, s.value);
                }
            }
            _ => out.push((block, s.t, s.value)),
        }
    }
    out.into_iter().map(|(_, t, v)| (t, v)).collect()
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (slope, intercept, r2.clamp(0.0, 1.0))
}

/// Exponent triple `(q, r, σ)` with `1/q + σ/r = σ/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissiblePair {
    pub q: f64,
    pub r: f64,
    pub sigma: f64,
}

impl AdmissiblePair {
    pub fn new(q: f64, r: f64, sigma: f64) -> Result<Self> {
        if is_admissible(q, r, sigma) {
            Ok(Self { q, r, sigma })
        } else {
            Err(Error::InvalidInput(format!(
                "(q, r, σ) = ({q}, {r}, {sigma}) is not admissible"
            )))
        }
    }

    /// The admissible pair with the given time exponent `q`.
    pub fn with_q(q: f64, sigma: f64) -> Result<Self> {
        let inv_r = 0.5 - 1.0 / (q * sigma);
        let r = if inv_r == 0.0 { f64::INFINITY } else { 1.0 / inv_r };
        Self::new(q, r, sigma)
    }
}

fn recip(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

/// `2 ≤ q, r ≤ ∞`, `1/q + σ/r = σ/2` and `(q, r, σ) ≠ (2, ∞, 1)`.
pub fn is_admissible(q: f64, r: f64, sigma: f64) -> bool {
    if !(sigma > 0.0) || !(q >= 2.0) || !(r >= 2.0) {
        return false;
    }
    if q == 2.0 && r.is_infinite() && sigma == 1.0 {
        return false;
    }
    (recip(q) + sigma * recip(r) - sigma / 2.0).abs() <= 1e-12
}

/// `(∫ n(t)^q dt)^{1/q}` by the composite trapezoid rule at the given
/// sampling; `q = ∞` gives `max n(t)`.
pub fn mixed_norm(times: &[f64], norms: &[f64], q: f64) -> Result<f64> {
    if times.is_empty() || times.len() != norms.len() {
        return Err(Error::EmptyTrajectory);
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("trajectory times must increase".into()));
    }
    if q.is_infinite() {
        return Ok(norms.iter().copied().fold(0.0, f64::max));
    }
    if !(q >= 1.0) {
        return Err(Error::InvalidInput(format!("time exponent {q} below 1")));
    }
    let integral: f64 = times
        .windows(2)
        .zip(norms.windows(2))
        .map(|(t, n)| 0.5 * (t[1] - t[0]) * (n[0].powf(q) + n[1].powf(q)))
        .sum();
    Ok(integral.powf(1.0 / q))
}

/// `‖u‖_{L^q ℓ^r}` over a sampled trajectory.
pub fn strichartz_norm<T: Real>(trajectory: &[(f64, WaveField<T>)], q: f64, r: f64) -> Result<f64> {
    if trajectory.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if !(r >= 1.0) {
        return Err(Error::InvalidInput(format!("space exponent {r} below 1")));
    }
    let times: Vec<f64> = trajectory.iter().map(|(t, _)| *t).collect();
    let norms: Vec<f64> = trajectory.iter().map(|(_, u)| u.norm_lr(r).as_f64()).collect();
    mixed_norm(&times, &norms, q)
}
