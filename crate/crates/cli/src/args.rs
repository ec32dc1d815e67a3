//! Command-line flags and the matching TOML config tables.
//!
//! Every flag is optional at parse time so that a config file can supply it;
//! explicit flags win over config values, which win over built-in defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "hexlat", version, about = "Numerical lab for the discrete Schrödinger equation on the hexagonal triangulation")]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (defaults to $HEXLAT_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// TOML file with defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed of the ChaCha8 generator used for random sweeps.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kernel K(·,t) on a periodic box.
    Kernel(KernelArgs),
    /// Sup-norm decay series and its power-law fit.
    Decay(DecayArgs),
    /// Power-law fit of an existing decay CSV.
    Fit(FitArgs),
    /// Critical-point classification sweep over velocities.
    Phase(PhaseArgs),
    /// Marching-squares export of the curves Σ0, Σ1², Σ2'.
    Curves(CurvesArgs),
    /// Grid certification that Σ1² and Σ2' meet only at half periods.
    Certify(CertifyArgs),
    /// Newton polyhedron and exponent bound of a Taylor support.
    Newton(NewtonArgs),
    /// Small-data nonlinear evolution.
    Dnls(DnlsArgs),
    /// Collects the JSON reports in the output directory.
    Report(ReportArgs),
}

/// Top-level layout of the config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub kernel: KernelArgs,
    #[serde(default)]
    pub decay: DecayArgs,
    #[serde(default)]
    pub fit: FitArgs,
    #[serde(default)]
    pub phase: PhaseArgs,
    #[serde(default)]
    pub curves: CurvesArgs,
    #[serde(default)]
    pub certify: CertifyArgs,
    #[serde(default)]
    pub newton: NewtonArgs,
    #[serde(default)]
    pub dnls: DnlsArgs,
    #[serde(default)]
    pub report: ReportArgs,
}

/// Fills unset fields of `self` from `base`.
pub trait Overlay {
    fn overlay(self, base: Self) -> Self;
}

macro_rules! overlay {
    ($ty:ident { $($field:ident),* $(,)? }) => {
        impl Overlay for $ty {
            fn overlay(self, base: Self) -> Self {
                Self { $($field: self.$field.or(base.$field)),* }
            }
        }
    };
}

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelArgs {
    /// `hex` or `z2`.
    #[arg(long)]
    pub lattice: Option<String>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Box side; defaults to the anti-aliasing minimum for t.
    #[arg(long)]
    pub n: Option<usize>,
    /// `csv` or `bin`.
    #[arg(long)]
    pub format: Option<String>,
}
overlay!(KernelArgs { lattice, t, n, format });

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayArgs {
    #[arg(long)]
    pub lattice: Option<String>,
    /// Time grid, e.g. `20:200:log16` or `50:500:10`.
    #[arg(long)]
    pub t: Option<String>,
    /// Sample only l = round(t·v) on a k×k velocity grid instead of every site.
    #[arg(long)]
    pub vgrid: Option<usize>,
    /// Largest FFT box; later times fall back to quadrature.
    #[arg(long)]
    pub fft_budget: Option<usize>,
    /// Fit window `a:b`; defaults to the whole grid.
    #[arg(long)]
    pub window: Option<String>,
    /// `dyadic_envelope` or `direct`.
    #[arg(long)]
    pub method: Option<String>,
}
overlay!(DecayArgs { lattice, t, vgrid, fft_budget, window, method });

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitArgs {
    /// Decay CSV as written by `decay`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub lattice: Option<String>,
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long)]
    pub method: Option<String>,
}
overlay!(FitArgs { input, lattice, window, method });

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseArgs {
    /// A single velocity `v1,v2`; disables the random sweep.
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<String>,
    /// Velocities drawn uniformly from the disc of radius 4√2+1.
    #[arg(long)]
    pub random: Option<usize>,
    /// Velocities ∇g(x) for random x on Σ0.
    #[arg(long)]
    pub caustic: Option<usize>,
    /// Include the half-period velocities (±2,±2), (±2,0), (0,±2).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub special: Option<bool>,
    /// Newton seeds per axis.
    #[arg(long)]
    pub seeds: Option<usize>,
}
overlay!(PhaseArgs { v, random, caustic, special, seeds });

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvesArgs {
    /// `sigma0`, `sigma1_2`, `sigma2prime` or `all`.
    #[arg(long)]
    pub curve: Option<String>,
    #[arg(long)]
    pub grid: Option<usize>,
}
overlay!(CurvesArgs { curve, grid });

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyArgs {
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Negative control: compare Σ1² with itself.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub sabotage: Option<bool>,
}
overlay!(CertifyArgs { grid, eps, sabotage });

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonArgs {
    /// Support `i,j;i,j;…` with optional `:coefficient` per term.
    #[arg(long)]
    pub support: Option<String>,
}
overlay!(NewtonArgs { support });

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DnlsArgs {
    #[arg(long)]
    pub lattice: Option<String>,
    /// Initial datum amplitude · δ₀.
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Time between diagnostics rows.
    #[arg(long)]
    pub snapshot: Option<f64>,
    /// `grow` or `fixed`.
    #[arg(long = "box")]
    #[serde(rename = "box")]
    pub box_policy: Option<String>,
    /// Initial box side.
    #[arg(long)]
    pub n: Option<usize>,
    /// Also run the Duhamel–Picard oracle with this many iterations.
    #[arg(long)]
    pub picard: Option<usize>,
    #[arg(long)]
    pub picard_t: Option<f64>,
    #[arg(long)]
    pub picard_steps: Option<usize>,
}
overlay!(DnlsArgs {
    lattice,
    amplitude,
    sigma,
    t_end,
    dt,
    snapshot,
    box_policy,
    n,
    picard,
    picard_t,
    picard_steps,
});

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportArgs {
    /// Report file name inside the output directory.
    #[arg(long)]
    pub name: Option<String>,
}
overlay!(ReportArgs { name });
