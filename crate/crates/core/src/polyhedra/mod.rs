//! Convex polyhedra in constraint and generator form.

mod dd;
mod fm;
mod hpoly;
mod vpoly;

pub use fm::{eliminate_variables, eliminate_with_limit, fm_limit, DEFAULT_FM_LIMIT};
pub use hpoly::{Constraint, HPolyhedron, Openness};
pub use vpoly::{
    convert_representation, h_to_v, in_hull, minkowski_sum, Cone, Representation, VPolyhedron,
};

use crate::arith::{QMatrix, QVector};
use crate::error::{Error, Result};

#[allow(unused_imports)]
pub(crate) use hpoly::strict_point;

/// `Q ⊆ P` for closed polyhedra: every generator of `Q` satisfies `P`.
pub fn includes(p: &HPolyhedron, q: &HPolyhedron) -> Result<bool> {
    if !p.is_closed() || !q.is_closed() {
        return Err(Error::OpenInput("includes"));
    }
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let v = h_to_v(q)?;
    Ok(v_within(p, &v))
}

/// Every vertex and ray of `v` satisfies the closure of `p`.
pub fn v_within(p: &HPolyhedron, v: &VPolyhedron) -> bool {
    if v.is_empty() {
        return true;
    }
    p.constraints().iter().all(|c| {
        v.vertices().iter().all(|x| c.a.dot(x) <= c.b)
            && v.rays().iter().all(|r| !c.a.dot(r).is_positive())
    })
}

/// Equality of closed polyhedra by mutual inclusion.
pub fn closed_eq(p: &HPolyhedron, q: &HPolyhedron) -> Result<bool> {
    Ok(includes(p, q)? && includes(q, p)?)
}

/// Equality of open polyhedra: equal closures and both nonempty, or both
/// empty.
pub fn open_eq(p: &HPolyhedron, q: &HPolyhedron) -> Result<bool> {
    let pe = p.is_empty()?;
    let qe = q.is_empty()?;
    if pe || qe {
        return Ok(pe && qe);
    }
    closed_eq(&p.closure(), &q.closure())
}

/// Set equality for closed or open operands (mixed operands compare as
/// open sets: nonempty with equal closures).
pub fn set_eq(p: &HPolyhedron, q: &HPolyhedron) -> Result<bool> {
    if p.is_closed() && q.is_closed() {
        closed_eq(p, q)
    } else {
        open_eq(p, q)
    }
}

/// Image of a closed polyhedron under `x ↦ A·x + shift`, on generators.
pub fn affine_image(p: &HPolyhedron, a: &QMatrix, shift: &QVector) -> Result<VPolyhedron> {
    if a.col_count() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: a.col_count(),
        });
    }
    h_to_v(p)?.affine_image(a, shift)
}

/// `{x - y : x ∈ P, y ∈ Q}`.
pub fn difference(p: &VPolyhedron, q: &VPolyhedron) -> Result<VPolyhedron> {
    minkowski_sum(p, &q.neg())
}

/// Image under `x ↦ A·x + shift` by projection, keeping strictness:
/// eliminate `x` from `{(y, x) : x ∈ P, y - A·x = shift}`.
pub fn affine_image_h(p: &HPolyhedron, a: &QMatrix, shift: &QVector) -> Result<HPolyhedron> {
    if a.col_count() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: a.col_count(),
        });
    }
    if shift.dim() != a.row_count() {
        return Err(Error::DimensionMismatch {
            expected: a.row_count(),
            found: shift.dim(),
        });
    }
    let (k, n) = (a.row_count(), p.dim());
    let mut cons: Vec<Constraint> = p
        .constraints()
        .iter()
        .map(|c| Constraint {
            a: QVector::zeros(k).concat(&c.a),
            b: c.b.clone(),
            strict: c.strict,
        })
        .collect();
    for i in 0..k {
        let row = QVector::unit(k, i).concat(&a.row(i).neg());
        cons.push(Constraint::le(row.clone(), shift[i].clone()));
        cons.push(Constraint::ge(row, shift[i].clone()));
    }
    eliminate_variables(
        &HPolyhedron::new(k + n, cons)?,
        &(k..k + n).collect::<Vec<_>>(),
    )
}

/// `P ⊕ Q` by projection, keeping strictness: eliminate `x` from
/// `{(z, x) : x ∈ P, z - x ∈ Q}`.
pub fn minkowski_sum_h(p: &HPolyhedron, q: &HPolyhedron) -> Result<HPolyhedron> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let n = p.dim();
    let mut cons: Vec<Constraint> = Vec::new();
    for c in p.constraints() {
        cons.push(Constraint {
            a: QVector::zeros(n).concat(&c.a),
            b: c.b.clone(),
            strict: c.strict,
        });
    }
    for c in q.constraints() {
        cons.push(Constraint {
            a: c.a.concat(&c.a.neg()),
            b: c.b.clone(),
            strict: c.strict,
        });
    }
    eliminate_variables(
        &HPolyhedron::new(2 * n, cons)?,
        &(n..2 * n).collect::<Vec<_>>(),
    )
}

/// `P ⊖ Q = P ⊕ (-Q)` by projection, keeping strictness.
pub fn difference_h(p: &HPolyhedron, q: &HPolyhedron) -> Result<HPolyhedron> {
    let n = q.dim();
    let rows: Vec<QVector> = (0..n).map(|i| QVector::unit(n, i).neg()).collect();
    let neg = q.preimage(&QMatrix::with_cols(rows, n)?, &QVector::zeros(n))?;
    minkowski_sum_h(p, &neg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, qv};

    #[test]
    fn projected_images_keep_strictness() {
        let open = HPolyhedron::cube(2, q(-1, 1), q(1, 1)).strict_version();
        let a = QMatrix::from_ints(&[&[1, 1]]);
        let img = affine_image_h(&open, &a, &qv(&[1])).unwrap();
        assert_eq!(
            img,
            HPolyhedron::cube(1, q(-1, 1), q(3, 1)).strict_version()
        );
        let seg = HPolyhedron::cube(2, q(0, 1), q(1, 1));
        let sum = minkowski_sum_h(&open, &seg).unwrap();
        assert_eq!(
            sum,
            HPolyhedron::cube(2, q(-1, 1), q(2, 1)).strict_version()
        );
        let diff = difference_h(&seg, &seg).unwrap();
        assert_eq!(diff, HPolyhedron::cube(2, q(-1, 1), q(1, 1)));
    }

    #[test]
    fn inclusion_examples() {
        let s = HPolyhedron::cube(2, q(-1, 1), q(1, 1));
        let s2 = HPolyhedron::cube(2, q(-2, 1), q(2, 1));
        assert!(includes(&s2, &s).unwrap());
        assert!(!includes(&s, &s2).unwrap());
        assert!(includes(&s, &s).unwrap());
        assert!(includes(&s.strict_version(), &s).is_err());
    }

    #[test]
    fn unbounded_inclusion_uses_rays() {
        let h = HPolyhedron::from_ints(2, &[(&[1, 0], 0)]);
        let q = HPolyhedron::from_ints(2, &[(&[1, 0], -1), (&[0, 1], 0), (&[0, -1], 0)]);
        assert!(includes(&h, &q).unwrap());
        assert!(!includes(&q, &h).unwrap());
    }

    #[test]
    fn open_equality() {
        let s = HPolyhedron::cube(2, q(-1, 1), q(1, 1)).strict_version();
        assert!(set_eq(&s, &s).unwrap());
        let seg = HPolyhedron::from_ints(2, &[(&[0, 1], 0), (&[0, -1], 0)]).strict_version();
        assert!(!set_eq(&s, &seg).unwrap());
        assert!(set_eq(&seg, &HPolyhedron::empty(2)).unwrap());
    }

    #[test]
    fn image_of_square() {
        let s = HPolyhedron::cube(2, q(-1, 1), q(1, 1));
        let img = affine_image(&s, &QMatrix::from_ints(&[&[1, 0]]), &qv(&[0])).unwrap();
        assert_eq!(img.to_h(), HPolyhedron::cube(1, q(-1, 1), q(1, 1)));
    }
}
