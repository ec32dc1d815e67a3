use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::critical::{find_critical_points, CriticalPoint};
use super::DEGENERACY_TOL;
use crate::error::{Error, Result};
use crate::newton_poly::{Coefficient, ExponentPair, TaylorSupport};

/// `|cos xᵢ|` below this counts as zero when selecting the case.
const COS_ZERO_TOL: f64 = 1e-12;
/// Threshold for the cubic coefficient and the quartic discriminant.
const COEFF_TOL: f64 = 1e-8;
/// Input points must be critical to this accuracy.
const CRITICAL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    /// `cos x₁ = cos x₂ = 0`.
    A,
    /// `λ = 0`.
    B,
    /// `λ > 0`.
    C,
    /// `λ < 0`.
    D,
    Nondegenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormalForm {
    /// `a20 u₁² + a12 u₁u₂² + a04 u₂⁴` with vanishing cubic.
    Normal1,
    /// `b20 u₁² + b03 u₂³`.
    Normal2,
    Morse,
}

impl NormalForm {
    pub fn exponent_pair(self) -> ExponentPair {
        match self {
            NormalForm::Normal1 => ExponentPair::NORMAL1,
            NormalForm::Normal2 => ExponentPair::NORMAL2,
            NormalForm::Morse => ExponentPair::MORSE,
        }
    }
}

/// Coefficients of `u₁², u₁u₂², u₂³, u₂⁴` in the adapted coordinates.
/// For the cubic normal form `b20 = a20` and `b03 = a03`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorCoefficients {
    pub a20: f64,
    pub a12: f64,
    pub a03: f64,
    pub a04: f64,
}

impl TaylorCoefficients {
    pub fn quartic_discriminant(&self) -> f64 {
        self.a12 * self.a12 - 4.0 * self.a20 * self.a04
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub point: CriticalPoint,
    pub lambda: Option<f64>,
    pub case_label: CaseLabel,
    pub normal_form: NormalForm,
    pub coeffs: Option<TaylorCoefficients>,
    pub exponent_pair: ExponentPair,
    /// The coordinates were exchanged because `cos x₁ = 0 ≠ cos x₂`.
    pub swapped: bool,
    /// Case D coefficients mirror Case C under `λ → −λ`.
    pub by_analogy: bool,
}

impl SingularityReport {
    /// Linear map `x' = M u` to the adapted coordinates.
    pub fn adapted_basis(&self) -> [[f64; 2]; 2] {
        let x = self.canonical_x();
        basis_for(self.case_label, self.lambda, x)
    }

    fn canonical_x(&self) -> [f64; 2] {
        let x = self.point.x;
        if self.swapped {
            [x[1], x[0]]
        } else {
            x
        }
    }

    /// Taylor support up to degree four in the adapted coordinates, with
    /// coefficients below `1e-10` relative to the largest one dropped.
    pub fn taylor_support(&self) -> TaylorSupport {
        let c = local_taylor(self.canonical_x(), self.adapted_basis());
        let scale = c
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let mut s = TaylorSupport::new();
        for (i, row) in c.iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                if (2..=4).contains(&(i + j)) && a.abs() > 1e-10 * scale {
                    s.insert((i as u32, j as u32), Coefficient::Real(a));
                }
            }
        }
        s
    }
}

fn basis_for(case: CaseLabel, lambda: Option<f64>, x: [f64; 2]) -> [[f64; 2]; 2] {
    match case {
        CaseLabel::A => [[1.0, -1.0], [0.0, 1.0]],
        CaseLabel::B => [[1.0, 0.0], [0.0, 1.0]],
        CaseLabel::C => {
            let l = lambda.expect("case C has λ");
            [[l.sqrt(), -l], [0.0, 1.0]]
        }
        CaseLabel::D => {
            let mu = -lambda.expect("case D has λ");
            [[mu.sqrt(), mu], [0.0, 1.0]]
        }
        CaseLabel::Nondegenerate => {
            // Eigenvectors of the Hessian diagonalise the quadratic part.
            let (c1, c2, c12) = (x[0].cos(), x[1].cos(), (x[0] + x[1]).cos());
            let (a, b, d) = (c12 + c1, c12, c12 + c2);
            if b.abs() < 1e-15 {
                return [[1.0, 0.0], [0.0, 1.0]];
            }
            let theta = 0.5 * (2.0 * b).atan2(a - d);
            let (s, c) = theta.sin_cos();
            [[c, -s], [s, c]]
        }
    }
}

/// Coefficients `c[i][j]` of `u₁^i u₂^j` (total degree ≤ 4) in the Taylor
/// expansion of `g(x + M u)`, computed term by term from the three cosines.
pub fn local_taylor(x: [f64; 2], m: [[f64; 2]; 2]) -> [[f64; 5]; 5] {
    let mut c = [[0.0; 5]; 5];
    c[0][0] = crate::symbols::DispersionSymbol::HEX.eval(x);
    for w in [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]] {
        let theta = w[0] * x[0] + w[1] * x[1];
        // ⟨w, M u⟩ = p u₁ + q u₂.
        let p = w[0] * m[0][0] + w[1] * m[1][0];
        let q = w[0] * m[0][1] + w[1] * m[1][1];
        // k-th derivative of −2 cos, divided by k!.
        let (s, co) = theta.sin_cos();
        let deriv = [0.0, 2.0 * s, 2.0 * co / 2.0, -2.0 * s / 6.0, -2.0 * co / 24.0];
        for (k, &dk) in deriv.iter().enumerate().skip(1) {
            for i in 0..=k {
                let binom = [1.0, 1.0, 2.0, 6.0, 24.0][k] / ([1.0, 1.0, 2.0, 6.0, 24.0][i] * [1.0, 1.0, 2.0, 6.0, 24.0][k - i]);
                c[i][k - i] += dk * binom * p.powi(i as i32) * q.powi((k - i) as i32);
            }
        }
    }
    c
}

fn closed_form(case: CaseLabel, x: [f64; 2], lambda: f64) -> TaylorCoefficients {
    let (s1, c1) = x[0].sin_cos();
    let (s2, c2) = x[1].sin_cos();
    let (s12, c12) = (x[0] + x[1]).sin_cos();
    match case {
        CaseLabel::A => TaylorCoefficients {
            a20: c12,
            a12: -s1,
            a03: -(s2 - s1) / 3.0,
            a04: 0.0,
        },
        CaseLabel::B => TaylorCoefficients {
            a20: c1,
            a12: -s12,
            a03: -(s2 + s12) / 3.0,
            a04: 0.0,
        },
        CaseLabel::C | CaseLabel::D => {
            let l = lambda;
            let r = if case == CaseLabel::C { l.sqrt() } else { (-l).sqrt() };
            let a20 = if case == CaseLabel::C { c12 } else { -c12 };
            TaylorCoefficients {
                a20,
                a12: -s12 * r * (1.0 - l).powi(2) - s1 * r * l * l,
                a03: -(s12 * (1.0 - l).powi(3) - s1 * l.powi(3) + s2) / 3.0,
                a04: -(c12 * (1.0 - l).powi(4) + c1 * l.powi(4) + c2) / 12.0,
            }
        }
        CaseLabel::Nondegenerate => unreachable!("no normal form coefficients for Morse points"),
    }
}

/// Case selection and normal form of the critical point `x` of `φ(v,·)`.
pub fn classify_singularity(x: [f64; 2], v: [f64; 2]) -> Result<SingularityReport> {
    let point = CriticalPoint::at(x, v);
    if !(point.grad_norm < CRITICAL_TOL) {
        return Err(Error::InvalidInput(format!(
            "({}, {}) is not a critical point for v = ({}, {}): residual {:e}",
            x[0], x[1], v[0], v[1], point.grad_norm
        )));
    }
    if point.discriminant.abs() > DEGENERACY_TOL {
        return Ok(SingularityReport {
            point,
            lambda: None,
            case_label: CaseLabel::Nondegenerate,
            normal_form: NormalForm::Morse,
            coeffs: None,
            exponent_pair: ExponentPair::MORSE,
            swapped: false,
            by_analogy: false,
        });
    }
    let (c1, c2) = (point.x[0].cos(), point.x[1].cos());
    let swapped = c1.abs() < COS_ZERO_TOL && c2.abs() >= COS_ZERO_TOL;
    let xc = if swapped { [point.x[1], point.x[0]] } else { point.x };
    let (c1, c2) = if swapped { (c2, c1) } else { (c1, c2) };
    let (case, lambda) = if c1.abs() < COS_ZERO_TOL {
        (CaseLabel::A, None)
    } else {
        let l = -c2 / c1;
        let case = if l.abs() < COS_ZERO_TOL {
            CaseLabel::B
        } else if l > 0.0 {
            CaseLabel::C
        } else {
            CaseLabel::D
        };
        (case, Some(l))
    };
    let coeffs = closed_form(case, xc, lambda.unwrap_or(0.0));
    let normal_form = if coeffs.a03.abs() > COEFF_TOL {
        NormalForm::Normal2
    } else if coeffs.a20.abs() > COEFF_TOL && coeffs.quartic_discriminant().abs() > COEFF_TOL {
        NormalForm::Normal1
    } else {
        return Err(Error::Unclassified {
            x: point.x,
            cubic: coeffs.a03,
            quartic_discriminant: coeffs.quartic_discriminant(),
        });
    };
    Ok(SingularityReport {
        point,
        lambda,
        case_label: case,
        normal_form,
        coeffs: Some(coeffs),
        exponent_pair: normal_form.exponent_pair(),
        swapped,
        by_analogy: case == CaseLabel::D,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnclassifiedPoint {
    pub x: [f64; 2],
    pub cubic: f64,
    pub quartic_discriminant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityReport {
    pub v: [f64; 2],
    pub reports: Vec<SingularityReport>,
    pub unclassified: Vec<UnclassifiedPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub grid_seeds: usize,
    pub velocities: usize,
    pub critical_points: usize,
    pub degenerate_points: usize,
    pub unclassified_count: usize,
    /// Slowest-decaying exponent pair over all classified points.
    pub worst: Option<ExponentPair>,
    pub entries: Vec<VelocityReport>,
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep report serialises")
    }
}

/// Classifies every critical point of every velocity in the list.
pub fn sweep(velocities: &[[f64; 2]], grid_seeds: usize) -> Result<SweepReport> {
    let entries: Vec<VelocityReport> = velocities
        .par_iter()
        .map(|&v| -> Result<VelocityReport> {
            let mut reports = Vec::new();
            let mut unclassified = Vec::new();
            for cp in find_critical_points(v, grid_seeds)? {
                match classify_singularity(cp.x, v) {
                    Ok(r) => reports.push(r),
                    Err(Error::Unclassified {
                        x,
                        cubic,
                        quartic_discriminant,
                    }) => unclassified.push(UnclassifiedPoint {
                        x,
                        cubic,
                        quartic_discriminant,
                    }),
                    Err(e) => return Err(e),
                }
            }
            Ok(VelocityReport {
                v,
                reports,
                unclassified,
            })
        })
        .collect::<Result<_>>()?;
    let mut worst: Option<ExponentPair> = None;
    for r in entries.iter().flat_map(|e| &e.reports) {
        if worst.is_none_or(|w| r.exponent_pair.worse_than(&w)) {
            worst = Some(r.exponent_pair);
        }
    }
    Ok(SweepReport {
        grid_seeds,
        velocities: velocities.len(),
        critical_points: entries.iter().map(|e| e.reports.len() + e.unclassified.len()).sum(),
        degenerate_points: entries
            .iter()
            .flat_map(|e| &e.reports)
            .filter(|r| r.normal_form != NormalForm::Morse)
            .count()
            + entries.iter().map(|e| e.unclassified.len()).sum::<usize>(),
        unclassified_count: entries.iter().map(|e| e.unclassified.len()).sum(),
        worst,
        entries,
    })
}
