use thiserror::Error;

/// Errors raised by the numerical operations of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("box side {n} is below the anti-aliasing minimum {min} for t = {t}")]
    BoxTooSmall { n: usize, min: usize, t: f64 },

    #[error("box side {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("{m} quadrature points per axis is below the Nyquist policy of {required}")]
    InsufficientResolution { m: usize, required: usize },

    #[error("fit window [{t_min}, {t_max}] holds {found} usable samples, need at least {needed}")]
    DegenerateWindow {
        t_min: f64,
        t_max: f64,
        found: usize,
        needed: usize,
    },

    #[error("non-positive sample value {value} at t = {t}")]
    ZeroValue { t: f64, value: f64 },

    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error(
        "unclassified singularity at ({}, {}): cubic coefficient {cubic:e}, quartic discriminant {quartic_discriminant:e}",
        x[0], x[1]
    )]
    Unclassified {
        x: [f64; 2],
        cubic: f64,
        quartic_discriminant: f64,
    },

    #[error("certification failed: {count} offending cells")]
    CertificationFailed { count: usize },

    #[error("monomial {exponent:?} has weighted degree {degree} < 1")]
    SubprincipalMonomial { exponent: (u32, u32), degree: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("Duhamel iteration diverged at iterate {iteration} (increment {increment:e})")]
    Diverged { iteration: usize, increment: f64 },

    #[error("operation requires the {expected} lattice")]
    WrongLattice { expected: &'static str },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
