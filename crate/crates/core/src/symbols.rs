//! Dispersion symbols of the supported lattices.
//!
//! With `Δf(u) = Σ_{v~u} (f(v) - f(u))` and unit weights, the Fourier
//! multiplier of `-Δ` is `g(x) = Σ_h (1 - cos⟨h, x⟩)` over the neighbour
//! offsets `h`. The linear flow `e^{itΔ}` therefore multiplies the
//! frequency-side amplitude by `e^{-itg(x)}`.

use std::fmt;
use std::str::FromStr;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const HEX_OFFSETS: [(i64, i64); 6] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)];
const SQUARE_OFFSETS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Lattice realised on `Z²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    /// Degree-6 triangulation: offsets `±(1,0), ±(0,1), ±(1,1)`.
    HexTriangulation,
    /// Square lattice: offsets `±(1,0), ±(0,1)`.
    SquareZ2,
}

impl LatticeKind {
    pub fn neighbor_offsets(self) -> &'static [(i64, i64)] {
        match self {
            LatticeKind::HexTriangulation => &HEX_OFFSETS,
            LatticeKind::SquareZ2 => &SQUARE_OFFSETS,
        }
    }

    pub fn degree(self) -> usize {
        self.neighbor_offsets().len()
    }

    /// Short tag used in file names and CSV metadata.
    pub fn tag(self) -> &'static str {
        match self {
            LatticeKind::HexTriangulation => "hex",
            LatticeKind::SquareZ2 => "z2",
        }
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for LatticeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hex" | "hexagonal" | "triangulation" => Ok(LatticeKind::HexTriangulation),
            "z2" | "square" => Ok(LatticeKind::SquareZ2),
            other => Err(Error::InvalidInput(format!("unknown lattice `{other}`"))),
        }
    }
}

/// Closed-form evaluator for the symbol `g` of a lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DispersionSymbol {
    pub lattice: LatticeKind,
}

impl DispersionSymbol {
    pub const HEX: DispersionSymbol = DispersionSymbol {
        lattice: LatticeKind::HexTriangulation,
    };
    pub const SQUARE: DispersionSymbol = DispersionSymbol {
        lattice: LatticeKind::SquareZ2,
    };

    pub fn new(lattice: LatticeKind) -> Self {
        Self { lattice }
    }

    /// `g(x)`; `6 - 2cos x₁ - 2cos x₂ - 2cos(x₁+x₂)` on the hexagonal lattice,
    /// `4 - 2cos x₁ - 2cos x₂` on `Z²`.
    pub fn eval<T: Float>(&self, x: [T; 2]) -> T {
        let two = T::one() + T::one();
        let base = two * (T::one() - x[0].cos()) + two * (T::one() - x[1].cos());
        match self.lattice {
            LatticeKind::HexTriangulation => base + two * (T::one() - (x[0] + x[1]).cos()),
            LatticeKind::SquareZ2 => base,
        }
    }

    pub fn grad<T: Float>(&self, x: [T; 2]) -> [T; 2] {
        let two = T::one() + T::one();
        match self.lattice {
            LatticeKind::HexTriangulation => {
                let s12 = (x[0] + x[1]).sin();
                [two * (x[0].sin() + s12), two * (x[1].sin() + s12)]
            }
            LatticeKind::SquareZ2 => [two * x[0].sin(), two * x[1].sin()],
        }
    }

    /// Hessian of `g`, which is also the Hessian of every phase `g(x) - ⟨v,x⟩`.
    pub fn hessian<T: Float>(&self, x: [T; 2]) -> [[T; 2]; 2] {
        let two = T::one() + T::one();
        let (c1, c2) = (x[0].cos(), x[1].cos());
        match self.lattice {
            LatticeKind::HexTriangulation => {
                let c12 = (x[0] + x[1]).cos();
                [
                    [two * (c12 + c1), two * c12],
                    [two * c12, two * (c12 + c2)],
                ]
            }
            LatticeKind::SquareZ2 => [[two * c1, T::zero()], [T::zero(), two * c2]],
        }
    }

    pub fn hessian_det<T: Float>(&self, x: [T; 2]) -> T {
        let h = self.hessian(x);
        h[0][0] * h[1][1] - h[0][1] * h[1][0]
    }

    /// Reduced discriminant `D(x) = (cos x₁ + cos x₂)cos(x₁+x₂) + cos x₁ cos x₂`
    /// of the hexagonal symbol. `det Hess g = 4 D(x)`.
    pub fn hessian_discriminant<T: Float>(&self, x: [T; 2]) -> Result<T> {
        match self.lattice {
            LatticeKind::HexTriangulation => Ok(hex_discriminant(x)),
            LatticeKind::SquareZ2 => Err(Error::WrongLattice { expected: "hex" }),
        }
    }

    /// Supremum of `‖∇g‖` over the torus: `4√2` (hex) or `2√2` (`Z²`).
    pub fn max_group_speed(&self) -> f64 {
        match self.lattice {
            LatticeKind::HexTriangulation => 4.0 * std::f64::consts::SQRT_2,
            LatticeKind::SquareZ2 => 2.0 * std::f64::consts::SQRT_2,
        }
    }

    /// Bound on `|∂g/∂xᵢ|` along one axis (4 for hex, 2 for `Z²`).
    pub fn max_axis_speed(&self) -> f64 {
        match self.lattice {
            LatticeKind::HexTriangulation => 4.0,
            LatticeKind::SquareZ2 => 2.0,
        }
    }
}

/// `D(x)` for the hexagonal symbol.
pub fn hex_discriminant<T: Float>(x: [T; 2]) -> T {
    let (c1, c2, c12) = (x[0].cos(), x[1].cos(), (x[0] + x[1]).cos());
    (c1 + c2) * c12 + c1 * c2
}

/// Gradient of [`hex_discriminant`].
pub fn hex_discriminant_grad<T: Float>(x: [T; 2]) -> [T; 2] {
    let (c1, c2, c12) = (x[0].cos(), x[1].cos(), (x[0] + x[1]).cos());
    let (s1, s2, s12) = (x[0].sin(), x[1].sin(), (x[0] + x[1]).sin());
    [
        -s1 * c12 - (c1 + c2) * s12 - s1 * c2,
        -s2 * c12 - (c1 + c2) * s12 - c1 * s2,
    ]
}

/// `φ(v, x) = g(x) - ⟨v, x⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseFunction<T> {
    pub symbol: DispersionSymbol,
    /// Velocity in lattice sites per unit time.
    pub velocity: [T; 2],
}

impl<T: Float> PhaseFunction<T> {
    pub fn new(symbol: DispersionSymbol, velocity: [T; 2]) -> Self {
        Self { symbol, velocity }
    }

    pub fn eval(&self, x: [T; 2]) -> T {
        self.symbol.eval(x) - self.velocity[0] * x[0] - self.velocity[1] * x[1]
    }

    pub fn grad(&self, x: [T; 2]) -> [T; 2] {
        let g = self.symbol.grad(x);
        [g[0] - self.velocity[0], g[1] - self.velocity[1]]
    }

    pub fn hessian(&self, x: [T; 2]) -> [[T; 2]; 2] {
        self.symbol.hessian(x)
    }
}
