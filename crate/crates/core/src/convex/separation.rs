use serde::Serialize;

use super::{core_of, Functional};
use crate::arith::{QVector, Rational};
use crate::error::{Error, Result};
use crate::polyhedra::{difference, h_to_v, strict_point, Constraint, HPolyhedron};

/// A proper separation: `f ≤ level` on the first set, `f ≥ upper_level`
/// on the second (with `level ≤ upper_level`), and
/// `f(witness_lo) < f(witness_hi)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeparationResult {
    pub functional: Functional,
    pub level: Rational,
    pub upper_level: Rational,
    pub witness_lo: QVector,
    pub witness_hi: QVector,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum SeparationOutcome {
    Separated(SeparationResult),
    Inseparable,
}

impl SeparationOutcome {
    pub fn separated(&self) -> Option<&SeparationResult> {
        match self {
            SeparationOutcome::Separated(r) => Some(r),
            SeparationOutcome::Inseparable => None,
        }
    }
}

fn require_core(s: &HPolyhedron, what: &str) -> Result<QVector> {
    match s.interior_point()? {
        Some(p) if !s.is_marked_empty() => Ok(p),
        _ => Err(Error::PreconditionUnmet(format!("{what} has empty core"))),
    }
}

/// Separates `S` from `{x₀}`. The functional is the irredundant closure row
/// with the largest excess `a·x₀ - b` (first in canonical order on ties);
/// the level is its bound. Fails exactly when `x₀ ∈ core(S)`.
pub fn separate_point(s: &HPolyhedron, x0: &QVector) -> Result<SeparationOutcome> {
    if x0.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: x0.dim(),
        });
    }
    let inner = require_core(s, "S")?;
    let core = core_of(s)?;
    if core.contains_point(x0)? {
        return Ok(SeparationOutcome::Inseparable);
    }
    let mut best: Option<(&Constraint, Rational)> = None;
    for c in core.constraints() {
        let excess = c.a.dot(x0) - &c.b;
        if best.as_ref().is_none_or(|(_, e)| excess > *e) {
            best = Some((c, excess));
        }
    }
    let (c, _) = best.expect("a nonempty proper core has rows");
    Ok(SeparationOutcome::Separated(SeparationResult {
        functional: Functional::new(c.a.clone()),
        level: c.b.clone(),
        upper_level: c.a.dot(x0),
        witness_lo: inner,
        witness_hi: x0.clone(),
    }))
}

/// `f(x) < f(x₀)` on all of `S`: the face `{f = f(x₀)} ∩ S` together with
/// `{f > f(x₀)} ∩ S` is empty, decided by margin LPs.
pub fn strict_on_first(s: &HPolyhedron, r: &SeparationResult) -> Result<bool> {
    let f = &r.functional.coeffs;
    let top = f.dot(&r.witness_hi);
    let face = strict_point(s.dim(), s.constraints(), &[(f.clone(), top.clone())])?;
    let mut above = s.constraints().to_vec();
    above.push(Constraint::gt(f.clone(), top));
    let beyond = strict_point(s.dim(), &above, &[])?;
    Ok(face.is_none() && beyond.is_none())
}

/// Proper separation of two sets with nonempty cores. Succeeds exactly
/// when the cores are disjoint. The functional separates 0 from the
/// generator-form difference `lin S1 ⊖ lin S2`.
pub fn properly_separate(s1: &HPolyhedron, s2: &HPolyhedron) -> Result<SeparationOutcome> {
    if s1.dim() != s2.dim() {
        return Err(Error::DimensionMismatch {
            expected: s1.dim(),
            found: s2.dim(),
        });
    }
    let n = s1.dim();
    let c1 = require_core(s1, "S1")?;
    let c2 = require_core(s2, "S2")?;
    let mut joint: Vec<Constraint> = Vec::new();
    for c in s1.constraints().iter().chain(s2.constraints()) {
        joint.push(Constraint::lt(c.a.clone(), c.b.clone()));
    }
    if strict_point(n, &joint, &[])?.is_some() {
        return Ok(SeparationOutcome::Inseparable);
    }

    let v1 = h_to_v(&s1.closure())?;
    let v2 = h_to_v(&s2.closure())?;
    let d = difference(&v1, &v2)?.to_h();
    let zero = QVector::zeros(n);
    let mut best: Option<(&Constraint, Rational)> = None;
    for c in d.constraints() {
        let excess = -c.b.clone();
        if best.as_ref().is_none_or(|(_, e)| excess > *e) {
            best = Some((c, excess));
        }
    }
    let (c, excess) = best.expect("difference of disjoint-core sets is not the whole space");
    debug_assert!(!excess.is_negative());
    debug_assert!(c.a.dot(&zero) >= c.b);
    let f = c.a.clone();

    let level = match s1.maximize(&f)? {
        Some(Some((v, _))) => v,
        _ => unreachable!("f is bounded above on S1 by separation"),
    };
    let upper_level = match s2.maximize(&f.neg())? {
        Some(Some((v, _))) => -v,
        _ => unreachable!("f is bounded below on S2 by separation"),
    };

    let (witness_lo, witness_hi) = properness_witnesses(s1, s2, &f, &v1, &v2)?.unwrap_or((c1, c2));
    Ok(SeparationOutcome::Separated(SeparationResult {
        functional: Functional::new(f),
        level,
        upper_level,
        witness_lo,
        witness_hi,
    }))
}

/// Deterministic witness search: vertices of S2 by descending `f`, then
/// vertices of S1 by ascending `f`, then rays. Each candidate is tested by
/// one margin LP forcing the opposite witness strictly past it.
fn properness_witnesses(
    s1: &HPolyhedron,
    s2: &HPolyhedron,
    f: &QVector,
    v1: &crate::polyhedra::VPolyhedron,
    v2: &crate::polyhedra::VPolyhedron,
) -> Result<Option<(QVector, QVector)>> {
    let n = s1.dim();
    let mut hi: Vec<&QVector> = v2.vertices().iter().collect();
    hi.sort_by_key(|v| std::cmp::Reverse(f.dot(v)));
    for v in hi {
        if !s2.contains_point(v)? {
            continue;
        }
        let mut cons = s1.constraints().to_vec();
        cons.push(Constraint::lt(f.clone(), f.dot(v)));
        if let Some(x) = strict_point(n, &cons, &[])? {
            return Ok(Some((x, v.clone())));
        }
    }
    let mut lo: Vec<&QVector> = v1.vertices().iter().collect();
    lo.sort_by_key(|a| f.dot(a));
    for v in lo {
        if !s1.contains_point(v)? {
            continue;
        }
        let mut cons = s2.constraints().to_vec();
        cons.push(Constraint::gt(f.clone(), f.dot(v)));
        if let Some(x) = strict_point(n, &cons, &[])? {
            return Ok(Some((v.clone(), x)));
        }
    }
    for r in v2.rays() {
        if f.dot(r).is_positive() {
            if let Some(base) = s2.relative_point()? {
                let top = base.add(r);
                let mut cons = s1.constraints().to_vec();
                cons.push(Constraint::lt(f.clone(), f.dot(&top)));
                if let Some(x) = strict_point(n, &cons, &[])? {
                    return Ok(Some((x, top)));
                }
            }
        }
    }
    for r in v1.rays() {
        if f.dot(r).is_negative() {
            if let Some(base) = s1.relative_point()? {
                let bottom = base.add(r);
                let mut cons = s2.constraints().to_vec();
                cons.push(Constraint::gt(f.clone(), f.dot(&bottom)));
                if let Some(x) = strict_point(n, &cons, &[])? {
                    return Ok(Some((bottom, x)));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, qv};

    fn square() -> HPolyhedron {
        HPolyhedron::cube(2, q(-1, 1), q(1, 1))
    }

    fn check(s1: &HPolyhedron, s2_point: Option<&QVector>, r: &SeparationResult) {
        let f = &r.functional.coeffs;
        assert!(!f.is_zero());
        assert!(f.dot(&r.witness_lo) < f.dot(&r.witness_hi));
        assert!(r.level <= r.upper_level);
        match s1.maximize(f).unwrap() {
            Some(Some((v, _))) => assert!(v <= r.level),
            other => panic!("unexpected {other:?}"),
        }
        if let Some(p) = s2_point {
            assert!(f.dot(p) >= r.level);
        }
    }

    #[test]
    fn point_outside() {
        let out = separate_point(&square(), &qv(&[2, 0])).unwrap();
        let r = out.separated().unwrap();
        assert_eq!(r.functional.coeffs, qv(&[1, 0]));
        assert_eq!(r.level, q(1, 1));
        check(&square(), Some(&qv(&[2, 0])), r);
    }

    #[test]
    fn point_on_boundary() {
        let out = separate_point(&square(), &qv(&[1, 0])).unwrap();
        let r = out.separated().unwrap();
        assert_eq!(r.functional.coeffs, qv(&[1, 0]));
        check(&square(), Some(&qv(&[1, 0])), r);
        // strict on the open square
        let o = square().strict_version();
        let r = separate_point(&o, &qv(&[1, 0])).unwrap();
        assert!(strict_on_first(&o, r.separated().unwrap()).unwrap());
        // but not on the closed one
        assert!(!strict_on_first(&square(), out.separated().unwrap()).unwrap());
    }

    #[test]
    fn interior_point_inseparable() {
        assert_eq!(
            separate_point(&square(), &qv(&[0, 0])).unwrap(),
            SeparationOutcome::Inseparable
        );
    }

    #[test]
    fn empty_core_rejected() {
        let seg = HPolyhedron::from_ints(2, &[(&[0, 1], 0), (&[0, -1], 0)]);
        assert!(matches!(
            separate_point(&seg, &qv(&[0, 1])),
            Err(Error::PreconditionUnmet(_))
        ));
    }

    #[test]
    fn halfspaces_with_gap() {
        let a = HPolyhedron::from_ints(2, &[(&[1, 0], 0)]);
        let b = HPolyhedron::from_ints(2, &[(&[-1, 0], -1)]);
        let r = properly_separate(&a, &b).unwrap();
        let r = r.separated().unwrap();
        assert_eq!(r.functional.coeffs, qv(&[1, 0]));
        assert_eq!(r.level, q(0, 1));
        assert_eq!(r.upper_level, q(1, 1));
        assert!(b.contains_point(&r.witness_hi).unwrap());
        assert!(a.contains_point(&r.witness_lo).unwrap());
    }

    #[test]
    fn touching_halfspaces() {
        let a = HPolyhedron::from_ints(2, &[(&[1, 0], 0)]);
        let b = HPolyhedron::from_ints(2, &[(&[-1, 0], 0)]);
        let r = properly_separate(&a, &b).unwrap();
        let r = r.separated().unwrap();
        assert_eq!(r.functional.coeffs, qv(&[1, 0]));
        assert_eq!(r.level, q(0, 1));
        assert_eq!(r.upper_level, q(0, 1));
        let f = &r.functional.coeffs;
        assert!(f.dot(&r.witness_lo) < f.dot(&r.witness_hi));
    }

    #[test]
    fn overlapping_squares() {
        let a = square();
        let b = HPolyhedron::cube(2, q(0, 1), q(2, 1));
        assert_eq!(
            properly_separate(&a, &b).unwrap(),
            SeparationOutcome::Inseparable
        );
    }

    #[test]
    fn bounded_pair_uses_vertex_witness() {
        let a = square();
        let b = HPolyhedron::cube(2, q(1, 1), q(3, 1));
        let r = properly_separate(&a, &b).unwrap();
        let r = r.separated().unwrap();
        let f = &r.functional.coeffs;
        assert!(f.dot(&r.witness_lo) < f.dot(&r.witness_hi));
        assert!(a.contains_point(&r.witness_lo).unwrap());
        assert!(b.contains_point(&r.witness_hi).unwrap());
        assert!(r.level <= r.upper_level);
    }
}
