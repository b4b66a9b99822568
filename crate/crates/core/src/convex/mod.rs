//! Algebraic cores, closures, gauges, normal cones, separation and
//! Hahn–Banach extension for polyhedral data.

mod hahn_banach;
mod separation;

pub use hahn_banach::{
    check_domination, extension_certified, hahn_banach_extend, hahn_banach_via_separation,
};
pub use separation::{
    properly_separate, separate_point, strict_on_first, SeparationOutcome, SeparationResult,
};

use serde::{Deserialize, Serialize};

use crate::arith::{QVector, Rational};
use crate::error::{Error, Result};
use crate::polyhedra::{Cone, Constraint, HPolyhedron};

/// A linear functional `x ↦ coeffs·x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Functional {
    pub coeffs: QVector,
}

impl Functional {
    pub fn new(coeffs: QVector) -> Self {
        Functional { coeffs }
    }

    pub fn eval(&self, x: &QVector) -> Rational {
        self.coeffs.dot(x)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.dim()
    }
}

/// `p(x) = maxᵢ cᵢ·x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SublinearFunc {
    pieces: Vec<QVector>,
}

impl SublinearFunc {
    pub fn new(pieces: Vec<QVector>) -> Result<Self> {
        let Some(first) = pieces.first() else {
            return Err(Error::InvalidInput(
                "a sublinear function needs at least one piece".into(),
            ));
        };
        let dim = first.dim();
        if let Some(p) = pieces.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        Ok(SublinearFunc { pieces })
    }

    pub fn from_ints(pieces: &[&[i64]]) -> Self {
        Self::new(pieces.iter().map(|p| QVector::from_ints(p)).collect()).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].dim()
    }

    pub fn pieces(&self) -> &[QVector] {
        &self.pieces
    }

    pub fn eval(&self, x: &QVector) -> Rational {
        self.pieces.iter().map(|c| c.dot(x)).max().unwrap()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSublinear {
    pieces: Vec<QVector>,
}

impl<'de> Deserialize<'de> for SublinearFunc {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSublinear::deserialize(d)?;
        SublinearFunc::new(raw.pieces).map_err(serde::de::Error::custom)
    }
}

/// The algebraic core. Nonempty exactly when the all-strict system is
/// feasible; then it is the open set cut out by the irredundant rows of the
/// closure.
pub fn core_of(s: &HPolyhedron) -> Result<HPolyhedron> {
    let empty = HPolyhedron::empty(s.dim()).strict_version();
    if s.is_marked_empty() || s.interior_point()?.is_none() {
        return Ok(empty);
    }
    Ok(s.closure().remove_redundant()?.strict_version())
}

/// The algebraic closure of a nonempty set: strict rows relaxed.
pub fn lin_of(s: &HPolyhedron) -> Result<HPolyhedron> {
    if s.is_empty()? {
        return Err(Error::EmptyInput("lin_of"));
    }
    Ok(s.closure())
}

/// `0 ∈ core(S)`.
pub fn is_absorbing(s: &HPolyhedron) -> Result<bool> {
    core_of(s)?.contains_point(&QVector::zeros(s.dim()))
}

/// Minkowski gauge `inf{λ > 0 : x ∈ λS}` of an absorbing set.
pub fn gauge_eval(s: &HPolyhedron, x: &QVector) -> Result<Rational> {
    if x.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: x.dim(),
        });
    }
    if !is_absorbing(s)? {
        return Err(Error::NotAbsorbing);
    }
    let mut best = Rational::zero();
    for c in s.constraints() {
        let v = c.a.dot(x) / &c.b;
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

/// `{x : p(x) < 1}`.
pub fn sublevel_open(p: &SublinearFunc) -> HPolyhedron {
    let cons = p
        .pieces()
        .iter()
        .map(|c| Constraint::lt(c.clone(), Rational::one()))
        .collect();
    HPolyhedron::open(p.dim(), cons).unwrap()
}

/// Result of a normal-cone query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum NormalCone {
    Cone {
        cone: Cone,
    },
    /// `x̄` lies outside the set; the normal cone is empty by convention.
    NotAMember,
}

impl NormalCone {
    pub fn cone(&self) -> Option<&Cone> {
        match self {
            NormalCone::Cone { cone } => Some(cone),
            NormalCone::NotAMember => None,
        }
    }
}

/// `N(x̄; S) = {f : f·(x - x̄) ≤ 0 on S}`, generated by the active
/// irredundant rows of the closure.
pub fn normal_cone(s: &HPolyhedron, xbar: &QVector) -> Result<NormalCone> {
    if xbar.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: xbar.dim(),
        });
    }
    if s.is_empty()? {
        return Ok(NormalCone::NotAMember);
    }
    let closure = s.closure();
    if !closure.contains_point(xbar)? {
        return Ok(NormalCone::NotAMember);
    }
    let irr = closure.remove_redundant()?;
    let gens = irr
        .constraints()
        .iter()
        .filter(|c| c.a.dot(xbar) == c.b)
        .map(|c| c.a.clone())
        .collect();
    Ok(NormalCone::Cone {
        cone: Cone::new(s.dim(), gens)?,
    })
}

/// Definitional normal-cone test: `max_S f·x = f·x̄` by LP.
pub fn is_normal_definitional(s: &HPolyhedron, xbar: &QVector, f: &QVector) -> Result<bool> {
    Ok(match s.maximize(f)? {
        Some(Some((v, _))) => v == f.dot(xbar),
        _ => false,
    })
}

/// `max_S f > min_S f` (either side unbounded also counts).
pub fn is_nonconstant_on(s: &HPolyhedron, f: &QVector) -> Result<bool> {
    let hi = s.maximize(f)?;
    let lo = s.maximize(&f.neg())?;
    Ok(match (hi, lo) {
        (None, _) | (_, None) => false,
        (Some(None), _) | (_, Some(None)) => true,
        (Some(Some((h, _))), Some(Some((l, _)))) => h > -l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, qv};
    use crate::polyhedra::set_eq;

    fn square() -> HPolyhedron {
        HPolyhedron::cube(2, q(-1, 1), q(1, 1))
    }

    #[test]
    fn core_examples() {
        let c = core_of(&square()).unwrap();
        assert!(c.contains_point(&qv(&[0, 0])).unwrap());
        assert!(!c.contains_point(&qv(&[1, 0])).unwrap());
        assert_eq!(c, square().strict_version());
        let seg = HPolyhedron::from_ints(
            2,
            &[(&[0, 1], 0), (&[0, -1], 0), (&[1, 0], 1), (&[-1, 0], 0)],
        );
        assert!(core_of(&seg).unwrap().is_empty().unwrap());
        assert_eq!(core_of(&c).unwrap(), c);
    }

    #[test]
    fn lin_examples() {
        let o = square().strict_version();
        assert_eq!(lin_of(&o).unwrap(), square());
        assert_eq!(lin_of(&square()).unwrap(), square());
        // {y = 0, x < 0}
        let s = HPolyhedron::new(
            2,
            vec![
                Constraint::le(qv(&[0, 1]), q(0, 1)),
                Constraint::ge(qv(&[0, 1]), q(0, 1)),
                Constraint::lt(qv(&[1, 0]), q(0, 1)),
            ],
        )
        .unwrap();
        let l = lin_of(&s).unwrap();
        assert_eq!(
            l,
            HPolyhedron::from_ints(2, &[(&[0, 1], 0), (&[0, -1], 0), (&[1, 0], 0)])
        );
        // [w, b) ⊂ S for w = (-1, 0), b = (0, 0)
        for t in [q(0, 1), q(1, 4), q(1, 2), q(99, 100)] {
            let x = qv(&[-1, 0]).add_scaled(&t, &qv(&[1, 0]));
            assert!(s.contains_point(&x).unwrap());
        }
        assert!(!s.contains_point(&qv(&[0, 0])).unwrap());
        assert!(l.contains_point(&qv(&[0, 0])).unwrap());
        assert!(lin_of(&HPolyhedron::empty(2)).is_err());
    }

    #[test]
    fn absorbing_examples() {
        assert!(is_absorbing(&square()).unwrap());
        assert!(!is_absorbing(&HPolyhedron::cube(2, q(0, 1), q(2, 1))).unwrap());
        let h = HPolyhedron::open(1, vec![Constraint::le(qv(&[1]), q(1, 1))]).unwrap();
        assert!(is_absorbing(&h).unwrap());
    }

    #[test]
    fn gauge_examples() {
        assert_eq!(gauge_eval(&square(), &qv(&[2, 1])).unwrap(), q(2, 1));
        assert_eq!(gauge_eval(&square(), &qv(&[0, 0])).unwrap(), q(0, 1));
        let h = HPolyhedron::open(1, vec![Constraint::le(qv(&[1]), q(1, 1))]).unwrap();
        assert_eq!(gauge_eval(&h, &qv(&[-3])).unwrap(), q(0, 1));
        assert_eq!(gauge_eval(&h, &qv(&[2])).unwrap(), q(2, 1));
        assert_eq!(
            gauge_eval(&lin_of(&h).unwrap(), &qv(&[2])).unwrap(),
            q(2, 1)
        );
        assert_eq!(
            gauge_eval(&HPolyhedron::cube(2, q(0, 1), q(2, 1)), &qv(&[1, 1])),
            Err(Error::NotAbsorbing)
        );
    }

    #[test]
    fn sublevel_examples() {
        let p = SublinearFunc::from_ints(&[&[1], &[-1]]);
        assert_eq!(
            sublevel_open(&p),
            HPolyhedron::cube(1, q(-1, 1), q(1, 1)).strict_version()
        );
        let l1 = SublinearFunc::from_ints(&[&[1, 1], &[1, -1], &[-1, 1], &[-1, -1]]);
        let o = sublevel_open(&l1);
        assert!(o.contains_point(&qv(&[0, 0])).unwrap());
        assert!(!o.contains_point(&qv(&[1, 0])).unwrap());
        assert!(set_eq(&core_of(&o).unwrap(), &o).unwrap());
        let z = sublevel_open(&SublinearFunc::from_ints(&[&[0, 0]]));
        assert_eq!(z, HPolyhedron::universe(2).strict_version());
    }

    #[test]
    fn normal_cone_examples() {
        let n = normal_cone(&square(), &qv(&[1, 1])).unwrap();
        assert_eq!(n.cone().unwrap().generators(), &[qv(&[0, 1]), qv(&[1, 0])]);
        let n = normal_cone(&square(), &qv(&[0, 0])).unwrap();
        assert!(n.cone().unwrap().is_trivial());
        let h = HPolyhedron::from_ints(2, &[(&[1, 0], 0)]);
        let n = normal_cone(&h, &qv(&[0, 5])).unwrap();
        assert_eq!(n.cone().unwrap().generators(), &[qv(&[1, 0])]);
        assert_eq!(
            normal_cone(&square(), &qv(&[3, 0])).unwrap(),
            NormalCone::NotAMember
        );
        assert!(is_normal_definitional(&square(), &qv(&[1, 1]), &qv(&[1, 2])).unwrap());
        assert!(!is_normal_definitional(&square(), &qv(&[1, 1]), &qv(&[1, -2])).unwrap());
    }

    #[test]
    fn nonconstancy() {
        assert!(is_nonconstant_on(&square(), &qv(&[0, 1])).unwrap());
        let seg = HPolyhedron::from_ints(
            2,
            &[(&[0, 1], 0), (&[0, -1], 0), (&[1, 0], 1), (&[-1, 0], 0)],
        );
        assert!(!is_nonconstant_on(&seg, &qv(&[0, 1])).unwrap());
    }
}
