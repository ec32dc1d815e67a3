//! Newton polyhedra of bivariate phases and Varchenko's exponent bound.
//!
//! Exponents are integers, so the hull, the Newton distance and the bound
//! are computed exactly in `Ratio<i64>`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Exponent `(i, j)` of the monomial `u₁^i u₂^j`.
pub type Exponent = (u32, u32);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficient {
    Exact(#[serde(with = "ratio_serde")] Rational),
    Real(f64),
}

impl Coefficient {
    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Exact(r) => r.is_zero(),
            Coefficient::Real(x) => *x == 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Coefficient::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Coefficient::Real(x) => *x,
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Exact(r) => write!(f, "{r}"),
            Coefficient::Real(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Coefficient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(r) = s.parse::<Rational>() {
            return Ok(Coefficient::Exact(r));
        }
        s.parse::<f64>()
            .map(Coefficient::Real)
            .map_err(|_| Error::InvalidInput(format!("bad coefficient '{s}'")))
    }
}

/// Monomials with nonzero coefficients, keyed by exponent.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TaylorSupport {
    monomials: BTreeMap<Exponent, Coefficient>,
}

impl TaylorSupport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Support with unit coefficients.
    pub fn from_exponents(exponents: &[Exponent]) -> Self {
        let mut s = Self::new();
        for &e in exponents {
            s.insert(e, Coefficient::Exact(Rational::one()));
        }
        s
    }

    /// Inserts a monomial; zero coefficients remove it.
    pub fn insert(&mut self, exponent: Exponent, coefficient: Coefficient) {
        if coefficient.is_zero() {
            self.monomials.remove(&exponent);
        } else {
            self.monomials.insert(exponent, coefficient);
        }
    }

    pub fn coefficient(&self, exponent: Exponent) -> Option<Coefficient> {
        self.monomials.get(&exponent).copied()
    }

    pub fn exponents(&self) -> impl Iterator<Item = Exponent> + '_ {
        self.monomials.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Exponent, Coefficient)> + '_ {
        self.monomials.iter().map(|(e, c)| (*e, *c))
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Support with the two variables exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            monomials: self.monomials.iter().map(|(&(i, j), &c)| ((j, i), c)).collect(),
        }
    }
}

impl FromStr for TaylorSupport {
    type Err = Error;

    /// Parses `"i,j;i,j;…"`, each term optionally followed by `:coefficient`.
    fn from_str(s: &str) -> Result<Self> {
        let mut out = Self::new();
        for term in s.split(';').map(str::trim).filter(|t| !t.is_empty()) {
            let bad = || Error::InvalidInput(format!("bad monomial '{term}'"));
            let (exp, coeff) = match term.split_once(':') {
                Some((e, c)) => (e, c.parse()?),
                None => (term, Coefficient::Exact(Rational::one())),
            };
            let (i, j) = exp.split_once(',').ok_or_else(bad)?;
            let e = (
                i.trim().parse().map_err(|_| bad())?,
                j.trim().parse().map_err(|_| bad())?,
            );
            if out.monomials.contains_key(&e) {
                return Err(Error::InvalidInput(format!("repeated exponent {e:?}")));
            }
            out.insert(e, coeff);
        }
        Ok(out)
    }
}

/// The convex hull of `⋃ (α + R₊²)` over the support.
#[derive(Clone, Debug, PartialEq)]
pub struct NewtonPolyhedron {
    /// Vertices ordered by increasing first coordinate.
    pub vertices: Vec<Exponent>,
    /// Compact edges as index pairs into `vertices`.
    pub edges: Vec<(usize, usize)>,
    pub distance: Rational,
    pub principal_face: PrincipalFace,
}

/// Minimal face containing the diagonal point `(d, d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrincipalFace {
    Vertex(usize),
    Edge(usize, usize),
    /// The unbounded vertical face `{x = α₁, y ≥ α₂}` at a vertex.
    VerticalRay(usize),
    /// The unbounded horizontal face `{y = α₂, x ≥ α₁}` at a vertex.
    HorizontalRay(usize),
}

impl PrincipalFace {
    pub fn dim(&self) -> u32 {
        match self {
            PrincipalFace::Vertex(_) => 0,
            _ => 1,
        }
    }
}

impl NewtonPolyhedron {
    pub fn face_dim(&self) -> u32 {
        self.principal_face.dim()
    }

    /// `k = 2 − dim` of the principal face.
    pub fn multiplicity(&self) -> u32 {
        2 - self.face_dim()
    }

    /// Whether a lattice point lies in the closed polyhedron.
    pub fn contains(&self, p: Exponent) -> bool {
        let (x, y) = (p.0 as i64, p.1 as i64);
        let first = self.vertices[0];
        let last = *self.vertices.last().expect("nonempty");
        if x < first.0 as i64 || y < last.1 as i64 {
            return false;
        }
        self.edges.iter().all(|&(a, b)| {
            let (a, b) = (self.vertices[a], self.vertices[b]);
            let (ax, ay, bx, by) = (a.0 as i64, a.1 as i64, b.0 as i64, b.1 as i64);
            // The polyhedron lies to the upper right of each edge.
            (bx - ax) * (y - ay) - (by - ay) * (x - ax) >= 0
        })
    }

    /// Exponents of the support lying on the principal face.
    pub fn principal_part(&self, support: &TaylorSupport) -> TaylorSupport {
        let on_face = |(x, y): Exponent| -> bool {
            match self.principal_face {
                PrincipalFace::Vertex(i) => (x, y) == self.vertices[i],
                PrincipalFace::VerticalRay(i) => x == self.vertices[i].0,
                PrincipalFace::HorizontalRay(i) => y == self.vertices[i].1,
                PrincipalFace::Edge(a, b) => {
                    let (a, b) = (self.vertices[a], self.vertices[b]);
                    let (ax, ay, bx, by) = (a.0 as i64, a.1 as i64, b.0 as i64, b.1 as i64);
                    (bx - ax) * (y as i64 - ay) == (by - ay) * (x as i64 - ax)
                }
            }
        };
        let mut out = TaylorSupport::new();
        for (e, c) in support.iter().filter(|(e, _)| on_face(*e)) {
            out.insert(e, c);
        }
        out
    }

    pub fn report(&self) -> PolyhedronReport {
        let bound = varchenko_bound(self);
        PolyhedronReport {
            vertices: self.vertices.iter().map(|&(i, j)| [i, j]).collect(),
            edges: self.edges.clone(),
            distance_num: *self.distance.numer(),
            distance_den: *self.distance.denom(),
            face_dim: self.face_dim(),
            bound_beta_num: *bound.beta.numer(),
            bound_beta_den: *bound.beta.denom(),
            bound_p: bound.p,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyhedronReport {
    pub vertices: Vec<[u32; 2]>,
    pub edges: Vec<(usize, usize)>,
    pub distance_num: i64,
    pub distance_den: i64,
    pub face_dim: u32,
    pub bound_beta_num: i64,
    pub bound_beta_den: i64,
    pub bound_p: u32,
}

impl PolyhedronReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Oscillation index and multiplicity `(β, p)`: the integral decays like
/// `t^β (log t)^p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExponentPair {
    #[serde(with = "ratio_serde")]
    pub beta: Rational,
    pub p: u32,
}

impl ExponentPair {
    pub fn new(beta: Rational, p: u32) -> Self {
        Self { beta, p }
    }

    pub const MORSE: ExponentPair = ExponentPair {
        beta: Ratio::new_raw(-1, 1),
        p: 0,
    };
    pub const NORMAL1: ExponentPair = ExponentPair {
        beta: Ratio::new_raw(-3, 4),
        p: 0,
    };
    pub const NORMAL2: ExponentPair = ExponentPair {
        beta: Ratio::new_raw(-5, 6),
        p: 0,
    };

    /// Slower decay compares greater: larger `β`, then larger `p`.
    pub fn worse_than(&self, other: &Self) -> bool {
        (self.beta, self.p) > (other.beta, other.p)
    }
}

impl fmt::Display for ExponentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.beta, self.p)
    }
}

mod ratio_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Rational;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        r.to_string().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Lower-left staircase hull of the support.
pub fn build_polyhedron(support: &TaylorSupport) -> Result<NewtonPolyhedron> {
    if support.is_empty() {
        return Err(Error::InvalidInput("empty Taylor support".into()));
    }
    if support.coefficient((0, 0)).is_some() {
        return Err(Error::InvalidInput(
            "constant term in the support: Newton distance would vanish".into(),
        ));
    }
    // Pareto-minimal points, sorted by x ascending (hence y descending).
    let mut pts: Vec<Exponent> = support.exponents().collect();
    pts.sort_unstable();
    let mut stairs: Vec<Exponent> = Vec::new();
    for p in pts {
        if stairs.last().is_none_or(|q| p.1 < q.1) {
            stairs.push(p);
        }
    }
    // Lower convex chain.
    let cross = |o: Exponent, a: Exponent, b: Exponent| -> i64 {
        (a.0 as i64 - o.0 as i64) * (b.1 as i64 - o.1 as i64)
            - (a.1 as i64 - o.1 as i64) * (b.0 as i64 - o.0 as i64)
    };
    let mut vertices: Vec<Exponent> = Vec::new();
    for p in stairs {
        while vertices.len() >= 2 && cross(vertices[vertices.len() - 2], vertices[vertices.len() - 1], p) <= 0 {
            vertices.pop();
        }
        vertices.push(p);
    }
    let edges: Vec<(usize, usize)> = (1..vertices.len()).map(|i| (i - 1, i)).collect();

    let r = |v: u32| Rational::from_integer(v as i64);
    let first = vertices[0];
    let last = *vertices.last().expect("nonempty");
    let (distance, principal_face) = if first.0 >= first.1 {
        let face = if first.0 == first.1 {
            PrincipalFace::Vertex(0)
        } else {
            PrincipalFace::VerticalRay(0)
        };
        (r(first.0), face)
    } else if last.1 >= last.0 {
        let i = vertices.len() - 1;
        let face = if last.0 == last.1 {
            PrincipalFace::Vertex(i)
        } else {
            PrincipalFace::HorizontalRay(i)
        };
        (r(last.1), face)
    } else {
        // x − y is increasing along the chain; find the sign change.
        let mut found = None;
        for (k, &(a, b)) in edges.iter().enumerate() {
            let (p, q) = (vertices[a], vertices[b]);
            let dp = p.0 as i64 - p.1 as i64;
            let dq = q.0 as i64 - q.1 as i64;
            if dp < 0 && dq >= 0 {
                found = Some((k, p, q, dp, dq));
                break;
            }
        }
        let (k, p, q, dp, dq) = found.expect("diagonal crosses the chain");
        if dq == 0 {
            (r(q.0), PrincipalFace::Vertex(edges[k].1))
        } else {
            let s = Rational::new(-dp, dq - dp);
            let d = r(p.0) + s * (r(q.0) - r(p.0));
            (d, PrincipalFace::Edge(edges[k].0, edges[k].1))
        }
    };
    Ok(NewtonPolyhedron {
        vertices,
        edges,
        distance,
        principal_face,
    })
}

/// `(−1/d, k − 1)`.
pub fn varchenko_bound(poly: &NewtonPolyhedron) -> ExponentPair {
    ExponentPair::new(-poly.distance.recip(), poly.multiplicity() - 1)
}

/// Nondegeneracy of `a20 u₁² + a12 u₁u₂² + a04 u₂⁴`: `a20 ≠ 0` and
/// `a12² − 4 a20 a04 ≠ 0`.
pub fn check_r_nondegenerate_quartic<T: Num + Copy>(a20: T, a12: T, a04: T) -> bool {
    let four = T::one() + T::one() + T::one() + T::one();
    !a20.is_zero() && !(a12 * a12 - four * a20 * a04).is_zero()
}

/// R-nondegeneracy of the principal part, for the two normal-form families
/// `a20 u₁² + a12 u₁u₂² + a04 u₂⁴` and `b20 u₁² + b03 u₂³`.
pub fn check_r_nondegenerate(support: &TaylorSupport) -> Result<bool> {
    let poly = build_polyhedron(support)?;
    let principal = poly.principal_part(support);
    let exps: Vec<Exponent> = principal.exponents().collect();
    let quartic = [(0, 4), (1, 2), (2, 0)];
    if exps.contains(&(2, 0)) && exps.len() >= 2 && exps.iter().all(|e| quartic.contains(e)) {
        let c = |e| principal.coefficient(e).map_or(0.0, |c: Coefficient| c.to_f64());
        return Ok(check_r_nondegenerate_quartic(c((2, 0)), c((1, 2)), c((0, 4))));
    }
    if exps == [(0, 3), (2, 0)] {
        return Ok(true);
    }
    Err(Error::Unsupported(format!(
        "R-nondegeneracy check for principal part {exps:?}"
    )))
}

/// Splits monomials by weighted degree `⟨w, α⟩`: equal to 1 (principal) or
/// above 1 (higher order).
pub fn quasi_homogeneous_filter(
    support: &TaylorSupport,
    weight: (Rational, Rational),
) -> Result<(TaylorSupport, TaylorSupport)> {
    if !weight.0.is_positive() || !weight.1.is_positive() {
        return Err(Error::InvalidInput(format!(
            "weights must be positive, got ({}, {})",
            weight.0, weight.1
        )));
    }
    let mut principal = TaylorSupport::new();
    let mut higher = TaylorSupport::new();
    for (e, c) in support.iter() {
        let deg = weight.0 * Rational::from_integer(e.0 as i64)
            + weight.1 * Rational::from_integer(e.1 as i64);
        if deg < Rational::one() {
            return Err(Error::SubprincipalMonomial {
                exponent: e,
                degree: deg.to_f64().unwrap_or(f64::NAN),
            });
        }
        if deg == Rational::one() {
            principal.insert(e, c);
        } else {
            higher.insert(e, c);
        }
    }
    Ok((principal, higher))
}

/// Exponent pair after adding `m` nondegenerate quadratic variables.
pub fn dimensional_reduction(pair: ExponentPair, m: u32) -> ExponentPair {
    ExponentPair::new(pair.beta - Rational::new(m as i64, 2), pair.p)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn support(s: &str) -> TaylorSupport {
        s.parse().unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    /// Smallest `max(p)` over segments between support points.
    fn brute_distance(exps: &[Exponent]) -> Rational {
        let r = |v: u32| Rational::from_integer(v as i64);
        let mut best: Option<Rational> = None;
        let mut consider = |d: Rational| {
            if best.is_none_or(|b| d < b) {
                best = Some(d);
            }
        };
        for &a in exps {
            consider(r(a.0.max(a.1)));
            for &b in exps {
                let da = r(a.0) - r(a.1);
                let db = r(b.0) - r(b.1);
                if da < Rational::zero() && db > Rational::zero() {
                    let s = -da / (db - da);
                    consider(r(a.0) + s * (r(b.0) - r(a.0)));
                }
            }
        }
        best.unwrap()
    }

    #[test]
    fn table_rows() {
        let p = build_polyhedron(&support("2,0;1,2;0,4")).unwrap();
        assert_eq!(p.distance, q(4, 3));
        assert_eq!(p.vertices, vec![(0, 4), (2, 0)]);
        assert_eq!(p.principal_face, PrincipalFace::Edge(0, 1));
        assert_eq!(p.multiplicity(), 1);
        assert_eq!(varchenko_bound(&p), ExponentPair::new(q(-3, 4), 0));

        let p = build_polyhedron(&support("2,0;0,3")).unwrap();
        assert_eq!(p.distance, q(6, 5));
        assert_eq!(p.face_dim(), 1);
        assert_eq!(varchenko_bound(&p), ExponentPair::new(q(-5, 6), 0));

        let p = build_polyhedron(&support("2,0;0,2")).unwrap();
        assert_eq!(p.distance, q(1, 1));
        assert_eq!(p.face_dim(), 1);
        assert_eq!(varchenko_bound(&p), ExponentPair::MORSE);
    }

    #[test]
    fn vertex_and_ray_faces() {
        let p = build_polyhedron(&support("4,0;1,1;0,4")).unwrap();
        assert_eq!(p.principal_face, PrincipalFace::Vertex(1));
        assert_eq!(p.distance, q(1, 1));
        assert_eq!(varchenko_bound(&p), ExponentPair::new(q(-1, 1), 1));

        // A collinear middle monomial is not a vertex.
        let p = build_polyhedron(&support("4,0;2,2;0,4")).unwrap();
        assert_eq!(p.principal_face, PrincipalFace::Edge(0, 1));
        assert_eq!(p.distance, q(2, 1));

        let p = build_polyhedron(&support("3,1")).unwrap();
        assert_eq!(p.principal_face, PrincipalFace::VerticalRay(0));
        assert_eq!(p.distance, q(3, 1));
        let p = build_polyhedron(&support("1,3;5,0")).unwrap();
        assert_eq!(p.principal_face, PrincipalFace::Edge(0, 1));
        assert_eq!(p.distance, q(15, 7));
    }

    #[test]
    fn rejects_degenerate_supports() {
        assert!(build_polyhedron(&TaylorSupport::new()).is_err());
        assert!(build_polyhedron(&support("0,0;1,1")).is_err());
    }

    #[test]
    fn parsing() {
        let s = support("2,0:-1;1,2:1/3;0,4:0.5");
        assert_eq!(s.coefficient((2, 0)), Some(Coefficient::Exact(q(-1, 1))));
        assert_eq!(s.coefficient((1, 2)), Some(Coefficient::Exact(q(1, 3))));
        assert_eq!(s.coefficient((0, 4)), Some(Coefficient::Real(0.5)));
        assert!("2,0;2,0".parse::<TaylorSupport>().is_err());
        assert!("2;0".parse::<TaylorSupport>().is_err());
        assert_eq!(support("2,0:0;0,3").len(), 1);
    }

    #[test]
    fn quartic_nondegeneracy() {
        assert!(check_r_nondegenerate_quartic(1.0, 1.0, 0.0));
        assert!(!check_r_nondegenerate_quartic(1.0, 2.0, 1.0));
        assert!(check_r_nondegenerate_quartic(-1.0, -1.0, 0.0));
        assert!(!check_r_nondegenerate_quartic(q(1, 1), q(2, 1), q(1, 1)));
        assert!(!check_r_nondegenerate_quartic(0.0, 1.0, 1.0));
    }

    #[test]
    fn family_nondegeneracy() {
        assert!(check_r_nondegenerate(&support("2,0;1,2;0,4;0,5")).unwrap());
        assert!(!check_r_nondegenerate(&support("2,0:1;1,2:2;0,4:1")).unwrap());
        assert!(check_r_nondegenerate(&support("2,0;0,3;1,2")).unwrap());
        assert!(matches!(
            check_r_nondegenerate(&support("3,0;0,3")),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn filter_examples() {
        let (p, h) = quasi_homogeneous_filter(&support("2,0;1,2;0,4;0,5"), (q(1, 2), q(1, 4))).unwrap();
        assert_eq!(p.exponents().collect::<Vec<_>>(), vec![(0, 4), (1, 2), (2, 0)]);
        assert_eq!(h.exponents().collect::<Vec<_>>(), vec![(0, 5)]);

        let (p, h) = quasi_homogeneous_filter(&support("2,0;0,3;1,2"), (q(1, 2), q(1, 3))).unwrap();
        assert_eq!(p.exponents().collect::<Vec<_>>(), vec![(0, 3), (2, 0)]);
        assert_eq!(h.exponents().collect::<Vec<_>>(), vec![(1, 2)]);

        let err = quasi_homogeneous_filter(&support("1,0"), (q(1, 2), q(1, 3))).unwrap_err();
        assert!(matches!(err, Error::SubprincipalMonomial { exponent: (1, 0), .. }));
    }

    #[test]
    fn dimensional_reduction_shifts_beta() {
        let p = dimensional_reduction(ExponentPair::NORMAL1, 1);
        assert_eq!(p, ExponentPair::new(q(-5, 4), 0));
        assert_eq!(dimensional_reduction(ExponentPair::MORSE, 0), ExponentPair::MORSE);
    }

    #[test]
    fn report_json() {
        let p = build_polyhedron(&support("2,0;0,3")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&p.report().to_json()).unwrap();
        assert_eq!(v["distance_num"], 6);
        assert_eq!(v["distance_den"], 5);
        assert_eq!(v["face_dim"], 1);
        assert_eq!(v["bound_beta_num"], -5);
        assert_eq!(v["bound_beta_den"], 6);
        assert_eq!(v["bound_p"], 0);
        assert_eq!(v["vertices"], serde_json::json!([[0, 3], [2, 0]]));
    }

    #[test]
    fn exponent_ordering() {
        assert!(ExponentPair::NORMAL1.worse_than(&ExponentPair::NORMAL2));
        assert!(ExponentPair::NORMAL2.worse_than(&ExponentPair::MORSE));
        let json = serde_json::to_string(&ExponentPair::NORMAL1).unwrap();
        assert_eq!(json, r#"{"beta":"-3/4","p":0}"#);
    }

    fn exps() -> impl Strategy<Value = Vec<Exponent>> {
        prop::collection::vec((0u32..8, 0u32..8), 1..7)
            .prop_filter("no constant term", |v| !v.contains(&(0, 0)))
    }

    proptest! {
        #[test]
        fn distance_matches_brute_force(e in exps()) {
            let p = build_polyhedron(&TaylorSupport::from_exponents(&e)).unwrap();
            prop_assert_eq!(p.distance, brute_distance(&e));
            let d = p.distance;
            // (d,d) lies on the boundary.
            if *d.denom() == 1 {
                let k = *d.numer() as u32;
                prop_assert!(p.contains((k, k)));
                if k > 0 {
                    prop_assert!(!p.contains((k - 1, k - 1)));
                }
            }
        }

        #[test]
        fn swap_symmetry(e in exps()) {
            let s = TaylorSupport::from_exponents(&e);
            let a = build_polyhedron(&s).unwrap();
            let b = build_polyhedron(&s.swapped()).unwrap();
            prop_assert_eq!(a.distance, b.distance);
            prop_assert_eq!(a.face_dim(), b.face_dim());
        }

        #[test]
        fn interior_monomials_are_invisible(e in exps(), extra in (0u32..10, 0u32..10)) {
            let s = TaylorSupport::from_exponents(&e);
            let a = build_polyhedron(&s).unwrap();
            let on_boundary = a.vertices.contains(&extra)
                || a.edges.iter().any(|&(i, j)| {
                    let (p, q) = (a.vertices[i], a.vertices[j]);
                    (q.0 as i64 - p.0 as i64) * (extra.1 as i64 - p.1 as i64)
                        == (q.1 as i64 - p.1 as i64) * (extra.0 as i64 - p.0 as i64)
                });
            prop_assume!(a.contains(extra) && !on_boundary
                && extra.0 > a.vertices[0].0 && extra.1 > a.vertices.last().unwrap().1);
            let mut s2 = s.clone();
            s2.insert(extra, Coefficient::Real(1.0));
            let b = build_polyhedron(&s2).unwrap();
            prop_assert_eq!(&a.vertices, &b.vertices);
            prop_assert_eq!(a.distance, b.distance);
            prop_assert_eq!(a.principal_face, b.principal_face);
        }
    }
}
