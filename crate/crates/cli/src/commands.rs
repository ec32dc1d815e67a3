use std::f64::consts::TAU;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use hexlat::newton_poly::check_r_nondegenerate;
use hexlat::oscillatory::VELOCITY_RADIUS;
use hexlat::phase_geometry::project_to_sigma0;
use hexlat::{
    build_polyhedron, certify_appendix, decay_series, duhamel_picard, evolve_dnls, fit_power_law,
    kernel_fft, min_box_size, sweep, varchenko_bound, BoxPolicy, CertifyOptions, Complex64,
    CurveLabel, DecayOptions, DecaySeries, DispersionSymbol, DnlsOptions, ExponentPair, Field,
    FitMethod, LatticeKind, TaylorSupport, VelocitySampling,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::*;
use crate::grid::{parse_pair, parse_time_grid};

/// Seed used when neither `--seed` nor the config sets one.
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const GENERATOR: &str = "ChaCha8";

/// Velocities `∇g(π/2 + k₁π, π/2 + k₂π)` and their relatives on the axes.
pub const SPECIAL_VELOCITIES: [[f64; 2]; 8] = [
    [2.0, 2.0],
    [-2.0, -2.0],
    [2.0, -2.0],
    [-2.0, 2.0],
    [2.0, 0.0],
    [-2.0, 0.0],
    [0.0, 2.0],
    [0.0, -2.0],
];

#[derive(Debug)]
pub enum Failure {
    /// Bad input or configuration.
    Invalid(String),
    /// The computation ran and its check failed.
    CheckFailed(String),
}

impl From<hexlat::Error> for Failure {
    fn from(e: hexlat::Error) -> Self {
        match e {
            hexlat::Error::CertificationFailed { .. }
            | hexlat::Error::Unclassified { .. }
            | hexlat::Error::Diverged { .. } => Failure::CheckFailed(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

pub struct Context {
    pub out: PathBuf,
    pub seed: u64,
}

#[derive(Serialize)]
struct Meta<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    generator: &'static str,
    seed: u64,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    meta: Meta<'a>,
    result: &'a T,
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>, Failure> {
        fs::create_dir_all(&self.out)?;
        Ok(BufWriter::new(File::create(self.path(name))?))
    }

    fn write_with(
        &self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> hexlat::Result<()>,
    ) -> Result<(), Failure> {
        let mut w = self.create(name)?;
        f(&mut w)?;
        w.flush()?;
        Ok(())
    }

    fn write_json<T: Serialize>(&self, name: &str, command: &str, result: &T) -> Result<(), Failure> {
        let env = Envelope {
            meta: Meta {
                tool: "hexlat",
                version: env!("CARGO_PKG_VERSION"),
                command,
                generator: GENERATOR,
                seed: self.seed,
            },
            result,
        };
        let mut text = serde_json::to_string_pretty(&env).map_err(|e| invalid(e.to_string()))?;
        text.push('\n');
        let mut w = self.create(name)?;
        w.write_all(text.as_bytes())?;
        w.flush()?;
        Ok(())
    }
}

fn lattice(s: Option<&str>) -> Result<LatticeKind, Failure> {
    Ok(s.unwrap_or("hex").parse::<LatticeKind>()?)
}

fn fit_method(s: Option<&str>) -> Result<FitMethod, Failure> {
    Ok(s.unwrap_or("dyadic_envelope").parse::<FitMethod>()?)
}

fn window(s: Option<&str>, times: &[f64]) -> Result<(f64, f64), Failure> {
    match s {
        Some(w) => {
            let [a, b] = parse_pair(w).map_err(Failure::Invalid)?;
            Ok((a, b))
        }
        None => match (times.first(), times.last()) {
            (Some(&a), Some(&b)) => Ok((a, b)),
            _ => Err(invalid("empty time grid")),
        },
    }
}

#[derive(Serialize)]
struct KernelSummary {
    lattice: LatticeKind,
    t: f64,
    n: usize,
    sup: f64,
    argmax: [i64; 2],
    mass: f64,
}

pub fn kernel(ctx: &Context, a: KernelArgs) -> Result<(), Failure> {
    let lattice = lattice(a.lattice.as_deref())?;
    let t = a.t.ok_or_else(|| invalid("kernel needs --t"))?;
    let n = a.n.unwrap_or_else(|| min_box_size(t));
    let k = kernel_fft::<f64>(DispersionSymbol::new(lattice), n, t)?;
    match a.format.as_deref().unwrap_or("csv") {
        "csv" => ctx.write_with("kernel.csv", |w| k.field().write_csv(w))?,
        "bin" => ctx.write_with("kernel.bin", |w| k.field().write_binary(w))?,
        other => return Err(invalid(format!("unknown kernel format '{other}'"))),
    }
    let (sup, argmax) = k.sup();
    let summary = KernelSummary {
        lattice,
        t,
        n,
        sup,
        argmax,
        mass: k.field().mass(),
    };
    ctx.write_json("kernel.json", "kernel", &summary)
}

pub fn decay(ctx: &Context, a: DecayArgs) -> Result<(), Failure> {
    let lattice = lattice(a.lattice.as_deref())?;
    let times = parse_time_grid(a.t.as_deref().unwrap_or("20:200:log16")).map_err(Failure::Invalid)?;
    let sampling = match a.vgrid {
        Some(k) => VelocitySampling::grid(k),
        None => VelocitySampling::AllSites,
    };
    let options = DecayOptions {
        sampling,
        fft_budget: a.fft_budget.unwrap_or(DecayOptions::default().fft_budget),
    };
    let series = decay_series::<f64>(DispersionSymbol::new(lattice), &times, &options)?;
    ctx.write_with("decay.csv", |w| series.write_csv(w))?;
    let fit = fit_power_law(&series, window(a.window.as_deref(), &times)?, fit_method(a.method.as_deref())?)?;
    ctx.write_json("fit.json", "decay", &fit)
}

pub fn fit(ctx: &Context, a: FitArgs) -> Result<(), Failure> {
    let lattice = lattice(a.lattice.as_deref())?;
    let input = a.input.ok_or_else(|| invalid("fit needs --input"))?;
    let series = DecaySeries::read_csv(lattice, BufReader::new(File::open(&input)?))?;
    let times: Vec<f64> = series.samples().iter().map(|s| s.t).collect();
    let fit = fit_power_law(&series, window(a.window.as_deref(), &times)?, fit_method(a.method.as_deref())?)?;
    ctx.write_json("fit.json", "fit", &fit)
}

/// The velocity set of a classification sweep: optional half-period
/// velocities, then `n_caustic` caustic velocities `∇g(x)` with `x` projected
/// onto `Σ₀`, then `n_random` velocities uniform in the disc of radius
/// `4√2 + 1`, all drawn from one ChaCha8 stream.
pub fn sweep_velocities(seed: u64, n_random: usize, n_caustic: usize, special: bool) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<[f64; 2]> = if special {
        SPECIAL_VELOCITIES.to_vec()
    } else {
        Vec::new()
    };
    let mut found = 0;
    let mut attempts = 0;
    while found < n_caustic && attempts < 100 * n_caustic.max(1) {
        attempts += 1;
        let x0 = [rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)];
        if let Some(x) = project_to_sigma0(x0) {
            out.push(DispersionSymbol::HEX.grad(x));
            found += 1;
        }
    }
    for _ in 0..n_random {
        let r = VELOCITY_RADIUS * rng.random::<f64>().sqrt();
        let theta = rng.random_range(0.0..TAU);
        out.push([r * theta.cos(), r * theta.sin()]);
    }
    out
}

pub fn phase(ctx: &Context, a: PhaseArgs) -> Result<(), Failure> {
    let velocities = match a.v.as_deref() {
        Some(v) => vec![parse_pair(v).map_err(Failure::Invalid)?],
        None => sweep_velocities(
            ctx.seed,
            a.random.unwrap_or(96),
            a.caustic.unwrap_or(96),
            a.special.unwrap_or(true),
        ),
    };
    let report = sweep(&velocities, a.seeds.unwrap_or(64))?;
    ctx.write_json("sweep.json", "phase", &report)?;
    if report.unclassified_count > 0 {
        return Err(Failure::CheckFailed(format!(
            "{} critical points could not be classified",
            report.unclassified_count
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct CurveSummary {
    label: CurveLabel,
    grid_n: usize,
    points: usize,
    max_residual: f64,
}

pub fn curves(ctx: &Context, a: CurvesArgs) -> Result<(), Failure> {
    let labels = match a.curve.as_deref().unwrap_or("all") {
        "all" => CurveLabel::ALL.to_vec(),
        one => vec![one.parse::<CurveLabel>()?],
    };
    let grid = a.grid.unwrap_or(1024);
    let mut summary = Vec::new();
    for label in labels {
        let set = hexlat::trace_curve(label, grid)?;
        ctx.write_with(&format!("curve_{}.csv", label.tag()), |w| set.write_csv(w))?;
        summary.push(CurveSummary {
            label,
            grid_n: grid,
            points: set.points.len(),
            max_residual: set.points.iter().map(|p| p.residual).fold(0.0, f64::max),
        });
    }
    ctx.write_json("curves.json", "curves", &summary)
}

pub fn certify(ctx: &Context, a: CertifyArgs) -> Result<(), Failure> {
    let options = CertifyOptions {
        grid_n: a.grid.unwrap_or(2048),
        epsilon: a.eps.unwrap_or(1e-3),
        sabotage: a.sabotage.unwrap_or(false),
    };
    let report = certify_appendix(options)?;
    ctx.write_json("certify.json", "certify", &report)?;
    Ok(report.check()?)
}

#[derive(Serialize)]
struct NewtonSummary {
    support: String,
    distance: String,
    bound: ExponentPair,
    r_nondegenerate: Option<bool>,
    polyhedron: hexlat::newton_poly::PolyhedronReport,
}

pub fn newton(ctx: &Context, a: NewtonArgs) -> Result<(), Failure> {
    let text = a.support.ok_or_else(|| invalid("newton needs --support"))?;
    let support: TaylorSupport = text.parse()?;
    let poly = build_polyhedron(&support)?;
    let r_nondegenerate = match check_r_nondegenerate(&support) {
        Ok(b) => Some(b),
        Err(hexlat::Error::Unsupported(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let summary = NewtonSummary {
        support: text,
        distance: poly.distance.to_string(),
        bound: varchenko_bound(&poly),
        r_nondegenerate,
        polyhedron: poly.report(),
    };
    ctx.write_json("newton.json", "newton", &summary)
}

#[derive(Serialize)]
struct PicardSummary {
    iterations: usize,
    t: f64,
    quad_steps: usize,
    increments: Vec<f64>,
    distance_to_splitting: Option<f64>,
    diverged: Option<String>,
}

#[derive(Serialize)]
struct DnlsSummary {
    lattice: LatticeKind,
    amplitude: f64,
    sigma: f64,
    t_end: f64,
    dt: f64,
    steps: usize,
    final_n: usize,
    mass_drift: f64,
    linf_initial: f64,
    linf_final: f64,
    strichartz_l4_l6: f64,
    picard: Option<PicardSummary>,
}

pub fn dnls(ctx: &Context, a: DnlsArgs) -> Result<(), Failure> {
    let lattice = lattice(a.lattice.as_deref())?;
    let symbol = DispersionSymbol::new(lattice);
    let amplitude = a.amplitude.unwrap_or(0.01);
    let t_end = a.t_end.unwrap_or(100.0);
    let box_policy = match a.box_policy.as_deref().unwrap_or("grow") {
        "grow" => BoxPolicy::Grow,
        "fixed" => BoxPolicy::Fixed,
        other => return Err(invalid(format!("unknown box policy '{other}'"))),
    };
    let options = DnlsOptions {
        dt: a.dt.unwrap_or(0.01),
        sigma: a.sigma.unwrap_or(2.0),
        snapshot_every: a.snapshot.unwrap_or(1.0),
        box_policy,
        keep_fields: false,
    };
    let n = a.n.unwrap_or_else(|| match box_policy {
        BoxPolicy::Grow => min_box_size(0.0),
        BoxPolicy::Fixed => min_box_size(t_end),
    });
    let psi = Field::delta(n, Complex64::new(amplitude, 0.0))?;
    let traj = evolve_dnls(&psi, symbol, t_end, &options)?;
    ctx.write_with("dnls.csv", |w| traj.write_csv(w))?;

    let mut diverged = None;
    let picard = match a.picard {
        None => None,
        Some(iterations) => {
            let t = a.picard_t.unwrap_or(0.5);
            let quad_steps = a.picard_steps.unwrap_or(200);
            let start = psi.embed(psi.n().max(min_box_size(t)))?;
            let short = DnlsOptions {
                snapshot_every: t,
                box_policy: BoxPolicy::Fixed,
                ..options
            };
            let reference = evolve_dnls(&start, symbol, t, &short)?;
            let summary = match duhamel_picard(&start, symbol, t, iterations, options.sigma, quad_steps) {
                Ok(p) => PicardSummary {
                    iterations,
                    t,
                    quad_steps,
                    distance_to_splitting: Some(p.field.l2_distance(reference.final_field())),
                    increments: p.increments,
                    diverged: None,
                },
                Err(e @ hexlat::Error::Diverged { .. }) => {
                    diverged = Some(e.to_string());
                    PicardSummary {
                        iterations,
                        t,
                        quad_steps,
                        increments: Vec::new(),
                        distance_to_splitting: None,
                        diverged: Some(e.to_string()),
                    }
                }
                Err(e) => return Err(e.into()),
            };
            Some(summary)
        }
    };
    let first = traj.diagnostics.first().expect("initial diagnostics");
    let last = traj.diagnostics.last().expect("final diagnostics");
    let summary = DnlsSummary {
        lattice,
        amplitude,
        sigma: options.sigma,
        t_end,
        dt: options.dt,
        steps: traj.steps,
        final_n: last.n,
        mass_drift: traj.mass_drift(),
        linf_initial: first.linf,
        linf_final: last.linf,
        strichartz_l4_l6: last.strichartz_partial,
        picard,
    };
    ctx.write_json("dnls.json", "dnls", &summary)?;
    match diverged {
        Some(msg) => Err(Failure::CheckFailed(msg)),
        None => Ok(()),
    }
}

pub fn report(ctx: &Context, a: ReportArgs) -> Result<(), Failure> {
    let name = a.name.unwrap_or_else(|| "report.json".into());
    let mut files = serde_json::Map::new();
    if ctx.out.is_dir() {
        let mut paths: Vec<PathBuf> = fs::read_dir(&ctx.out)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .filter(|p| p.file_name().is_some_and(|f| f != name.as_str()))
            .collect();
        paths.sort();
        for p in paths {
            let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&p)?)
                .map_err(|e| invalid(format!("{}: {e}", p.display())))?;
            files.insert(file_name(&p), value);
        }
    }
    ctx.write_json(&name, "report", &files)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default()
}
