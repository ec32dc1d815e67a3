//! Numerical tools for the discrete Schrödinger equation on the hexagonal
//! triangulation and on the square lattice.

pub mod decay_fit;
pub mod dnls;
pub mod error;
pub mod newton_poly;
pub mod oscillatory;
pub mod phase_geometry;
pub mod propagator;
pub mod scalar;
pub mod symbols;

pub use decay_fit::{fit_power_law, is_admissible, strichartz_norm, AdmissiblePair, Backend, DecaySample, DecaySeries, FitMethod, PowerLawFit};
pub use dnls::{duhamel_picard, evolve_dnls, step_strang, BoxPolicy, Diagnostics, DnlsOptions, PicardResult, Trajectory};
pub use error::{Error, Result};
pub use num_complex::Complex;
pub use newton_poly::{build_polyhedron, varchenko_bound, ExponentPair, NewtonPolyhedron, Rational, TaylorSupport};
pub use oscillatory::{decay_series, kernel_quadrature, nyquist_points, DecayOptions, VelocitySampling};
pub use phase_geometry::{certify_appendix, classify_singularity, find_critical_points, sweep, trace_curve, CaseLabel, CertificationReport, CertifyOptions, CriticalPoint, CurveLabel, CurveSet, NormalForm, SingularityReport, SweepReport};
pub use propagator::{kernel_fft, min_box_size, propagate_linear, KernelGrid, LinearPropagator, WaveField};
pub use scalar::Real;
pub use symbols::{DispersionSymbol, LatticeKind, PhaseFunction};

/// Double-precision complex amplitude.
pub type Complex64 = Complex<f64>;
/// Double-precision wave field.
pub type Field = WaveField<f64>;
