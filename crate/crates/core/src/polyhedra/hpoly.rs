use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arith::{QMatrix, QVector, Rational};
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpConstraint, LpProblem, LpStatus, Sense};

/// A halfspace `a·x ≤ b`, or `a·x < b` when `strict`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Constraint {
    pub a: QVector,
    pub b: Rational,
    #[serde(default)]
    pub strict: bool,
}

impl Constraint {
    pub fn le(a: QVector, b: Rational) -> Self {
        Constraint {
            a,
            b,
            strict: false,
        }
    }

    pub fn lt(a: QVector, b: Rational) -> Self {
        Constraint { a, b, strict: true }
    }

    /// `a·x ≥ b`.
    pub fn ge(a: QVector, b: Rational) -> Self {
        Constraint::le(a.neg(), -b)
    }

    /// `a·x > b`.
    pub fn gt(a: QVector, b: Rational) -> Self {
        Constraint::lt(a.neg(), -b)
    }

    pub fn satisfied_by(&self, x: &QVector) -> bool {
        let v = self.a.dot(x);
        if self.strict {
            v < self.b
        } else {
            v <= self.b
        }
    }

    pub fn relaxed(&self) -> Constraint {
        Constraint::le(self.a.clone(), self.b.clone())
    }

    pub fn to_lp(&self) -> LpConstraint {
        LpConstraint::le(self.a.clone(), self.b.clone())
    }
}

/// Strictness mode of an [`HPolyhedron`].
///
/// `Mixed` allows per-constraint strictness; it arises for inputs such as
/// `{y = 0, x < 0}` and as the intermediate form inside projections.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Openness {
    Closed,
    Open,
    Mixed,
}

/// A convex polyhedron given by finitely many (possibly strict) halfspaces.
///
/// Constructors normalize every row to a primitive integer normal, merge
/// parallel rows and sort lexicographically. Zero rows are dropped when
/// trivially true; an unsatisfiable zero row collapses the set to the
/// canonical empty marker `0·x ≤ -1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HPolyhedron {
    dim: usize,
    constraints: Vec<Constraint>,
    openness: Openness,
}

enum Normalized {
    Row(Constraint),
    Trivial,
    Infeasible,
}

fn normalize_row(c: Constraint) -> Normalized {
    if c.a.is_zero() {
        let ok = if c.strict {
            c.b.is_positive()
        } else {
            !c.b.is_negative()
        };
        return if ok {
            Normalized::Trivial
        } else {
            Normalized::Infeasible
        };
    }
    let s = c.a.primitive_factor();
    if s.is_one() {
        Normalized::Row(c)
    } else {
        Normalized::Row(Constraint {
            a: c.a.scale(&s),
            b: &c.b * &s,
            strict: c.strict,
        })
    }
}

fn infer_openness(cons: &[Constraint]) -> Openness {
    if cons.iter().all(|c| !c.strict) {
        Openness::Closed
    } else if cons.iter().all(|c| c.strict) {
        Openness::Open
    } else {
        Openness::Mixed
    }
}

impl HPolyhedron {
    /// Builds a polyhedron; openness is inferred from the strictness flags
    /// (no strict rows: closed; all strict: open; otherwise mixed).
    pub fn new(dim: usize, constraints: Vec<Constraint>) -> Result<Self> {
        for c in &constraints {
            if c.a.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.a.dim(),
                });
            }
        }
        let openness = infer_openness(&constraints);
        Ok(Self::assemble(dim, constraints, openness))
    }

    /// Builds a polyhedron with an explicit openness mode. `Closed` rejects
    /// strict rows; `Open` rejects non-strict rows.
    pub fn with_openness(
        dim: usize,
        constraints: Vec<Constraint>,
        openness: Openness,
    ) -> Result<Self> {
        for c in &constraints {
            if c.a.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.a.dim(),
                });
            }
            match openness {
                Openness::Closed if c.strict => {
                    return Err(Error::InvalidInput(
                        "strict constraint in a closed polyhedron".into(),
                    ))
                }
                Openness::Open if !c.strict => {
                    return Err(Error::InvalidInput(
                        "non-strict constraint in an open polyhedron".into(),
                    ))
                }
                _ => {}
            }
        }
        Ok(Self::assemble(dim, constraints, openness))
    }

    /// All rows taken non-strict.
    pub fn closed(dim: usize, constraints: Vec<Constraint>) -> Result<Self> {
        let cons = constraints.into_iter().map(|c| c.relaxed()).collect();
        Self::with_openness(dim, cons, Openness::Closed)
    }

    /// All rows taken strict.
    pub fn open(dim: usize, constraints: Vec<Constraint>) -> Result<Self> {
        let cons = constraints
            .into_iter()
            .map(|c| Constraint::lt(c.a, c.b))
            .collect();
        Self::with_openness(dim, cons, Openness::Open)
    }

    /// Closed polyhedron from integer rows `(a, b)` meaning `a·x ≤ b`.
    pub fn from_ints(dim: usize, rows: &[(&[i64], i64)]) -> Self {
        let cons = rows
            .iter()
            .map(|(a, b)| Constraint::le(QVector::from_ints(a), Rational::from_integer(*b)))
            .collect();
        Self::closed(dim, cons).expect("row dimension")
    }

    pub fn universe(dim: usize) -> Self {
        HPolyhedron {
            dim,
            constraints: Vec::new(),
            openness: Openness::Closed,
        }
    }

    pub fn empty(dim: usize) -> Self {
        Self::empty_with(dim, Openness::Closed)
    }

    fn empty_with(dim: usize, openness: Openness) -> Self {
        HPolyhedron {
            dim,
            constraints: vec![Constraint {
                a: QVector::zeros(dim),
                b: -Rational::one(),
                strict: openness == Openness::Open,
            }],
            openness,
        }
    }

    /// The closed box `lo ≤ xᵢ ≤ hi` in every coordinate.
    pub fn cube(dim: usize, lo: Rational, hi: Rational) -> Self {
        let mut cons = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            cons.push(Constraint::le(QVector::unit(dim, i), hi.clone()));
            cons.push(Constraint::ge(QVector::unit(dim, i), lo.clone()));
        }
        Self::closed(dim, cons).unwrap()
    }

    /// `{x : a·x = b}` as a closed pair.
    pub fn hyperplane(a: QVector, b: Rational) -> Self {
        let dim = a.dim();
        Self::closed(
            dim,
            vec![Constraint::le(a.clone(), b.clone()), Constraint::ge(a, b)],
        )
        .unwrap()
    }

    fn assemble(dim: usize, constraints: Vec<Constraint>, openness: Openness) -> Self {
        let mut rows: BTreeMap<QVector, (Rational, bool)> = BTreeMap::new();
        for c in constraints {
            match normalize_row(c) {
                Normalized::Trivial => {}
                Normalized::Infeasible => return Self::empty_with(dim, openness),
                Normalized::Row(c) => match rows.get_mut(&c.a) {
                    None => {
                        rows.insert(c.a, (c.b, c.strict));
                    }
                    Some((b, strict)) => {
                        if c.b < *b {
                            *b = c.b;
                            *strict = c.strict;
                        } else if c.b == *b {
                            *strict |= c.strict;
                        }
                    }
                },
            }
        }
        let constraints = rows
            .into_iter()
            .map(|(a, (b, strict))| Constraint { a, b, strict })
            .collect();
        HPolyhedron {
            dim,
            constraints,
            openness,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn openness(&self) -> Openness {
        self.openness
    }

    pub fn is_closed(&self) -> bool {
        self.constraints.iter().all(|c| !c.strict)
    }

    /// True when the constraint list is the canonical empty marker.
    pub fn is_marked_empty(&self) -> bool {
        self.constraints.iter().any(|c| c.a.is_zero())
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: d,
            });
        }
        Ok(())
    }

    pub fn contains_point(&self, x: &QVector) -> Result<bool> {
        self.check_dim(x.dim())?;
        Ok(self.constraints.iter().all(|c| c.satisfied_by(x)))
    }

    /// Relaxes every strict row; the result is closed.
    pub fn closure(&self) -> HPolyhedron {
        HPolyhedron {
            dim: self.dim,
            constraints: self.constraints.iter().map(Constraint::relaxed).collect(),
            openness: Openness::Closed,
        }
    }

    /// Makes every row strict; the result is open.
    pub fn strict_version(&self) -> HPolyhedron {
        HPolyhedron {
            dim: self.dim,
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint::lt(c.a.clone(), c.b.clone()))
                .collect(),
            openness: Openness::Open,
        }
    }

    /// LP rows of the closure.
    pub fn lp_constraints(&self) -> Vec<LpConstraint> {
        self.constraints.iter().map(Constraint::to_lp).collect()
    }

    /// A point satisfying every row with its own strictness, if any exists.
    pub fn relative_point(&self) -> Result<Option<QVector>> {
        strict_point(self.dim, &self.constraints, &[])
    }

    /// A point satisfying every row strictly, if any exists.
    pub fn interior_point(&self) -> Result<Option<QVector>> {
        let strict: Vec<Constraint> = self
            .constraints
            .iter()
            .map(|c| Constraint::lt(c.a.clone(), c.b.clone()))
            .collect();
        strict_point(self.dim, &strict, &[])
    }

    pub fn is_empty(&self) -> Result<bool> {
        if self.is_marked_empty() {
            return Ok(true);
        }
        Ok(self.relative_point()?.is_none())
    }

    /// `sup f·x` over the closure: `None` if empty, `Some(None)` if unbounded.
    pub fn maximize(&self, f: &QVector) -> Result<Option<Option<(Rational, QVector)>>> {
        self.check_dim(f.dim())?;
        crate::lp::maximize(f, &self.lp_constraints())
    }

    pub fn intersect(&self, other: &HPolyhedron) -> Result<HPolyhedron> {
        other.check_dim(self.dim)?;
        let mut cons = self.constraints.clone();
        cons.extend(other.constraints.iter().cloned());
        Self::new(self.dim, cons)
    }

    /// Adds one row.
    pub fn with_constraint(&self, c: Constraint) -> Result<HPolyhedron> {
        let mut cons = self.constraints.clone();
        cons.push(c);
        Self::new(self.dim, cons)
    }

    /// Cartesian product, block-diagonal constraints.
    pub fn product(&self, other: &HPolyhedron) -> HPolyhedron {
        let (n, m) = (self.dim, other.dim);
        let zn = QVector::zeros(n);
        let zm = QVector::zeros(m);
        let empty = self.is_marked_empty() || other.is_marked_empty();
        let mut cons = Vec::with_capacity(self.constraints.len() + other.constraints.len());
        for c in &self.constraints {
            cons.push(Constraint {
                a: c.a.concat(&zm),
                b: c.b.clone(),
                strict: c.strict,
            });
        }
        for c in &other.constraints {
            cons.push(Constraint {
                a: zn.concat(&c.a),
                b: c.b.clone(),
                strict: c.strict,
            });
        }
        let openness = match (self.openness, other.openness) {
            (a, b) if a == b => a,
            _ => infer_openness(&cons),
        };
        if empty {
            return Self::empty_with(n + m, openness);
        }
        Self::assemble(n + m, cons, openness)
    }

    /// `{x : M·x + c ∈ self}`.
    pub fn preimage(&self, m: &QMatrix, c: &QVector) -> Result<HPolyhedron> {
        self.check_dim(m.row_count())?;
        self.check_dim(c.dim())?;
        let mt = m.transpose();
        let cons = self
            .constraints
            .iter()
            .map(|k| {
                Ok(Constraint {
                    a: mt.mul_vec(&k.a)?,
                    b: &k.b - k.a.dot(c),
                    strict: k.strict,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let openness = if self.openness == Openness::Mixed {
            infer_openness(&cons)
        } else {
            self.openness
        };
        Ok(Self::assemble(m.col_count(), cons, openness))
    }

    /// Fixes the coordinates in `fixed` to the given values and returns the
    /// slice in the remaining coordinates (in order).
    pub fn slice(&self, fixed: &[(usize, Rational)]) -> Result<HPolyhedron> {
        let keep: Vec<usize> = (0..self.dim)
            .filter(|i| !fixed.iter().any(|(j, _)| j == i))
            .collect();
        let mut cols = vec![QVector::zeros(self.dim); keep.len()];
        for (k, &i) in keep.iter().enumerate() {
            cols[k][i] = Rational::one();
        }
        let m = QMatrix::from_columns(&cols, self.dim);
        let mut shift = QVector::zeros(self.dim);
        for (j, v) in fixed {
            if *j >= self.dim {
                return Err(Error::InvalidInput(format!("coordinate {j} out of range")));
            }
            shift[*j] = v.clone();
        }
        self.preimage(&m, &shift)
    }

    /// Drops rows implied by the others. Each test is one LP over the
    /// closure of the remaining rows; a strict row whose bound is attained
    /// on the closure is kept only if the face it cuts off meets the set.
    pub fn remove_redundant(&self) -> Result<HPolyhedron> {
        if self.is_empty()? {
            return Ok(Self::empty_with(self.dim, self.openness));
        }
        let mut kept = self.constraints.clone();
        let mut i = 0;
        while i < kept.len() {
            let c = kept[i].clone();
            let rest: Vec<Constraint> = kept
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, k)| k.clone())
                .collect();
            let p = LpProblem {
                dim: self.dim,
                objective: c.a.clone(),
                sense: Sense::Max,
                constraints: rest.iter().map(Constraint::to_lp).collect(),
            };
            let r = solve_lp(&p)?;
            let redundant = match r.status {
                LpStatus::Unbounded => false,
                LpStatus::Infeasible => true,
                LpStatus::Optimal => {
                    let v = r.optimum.unwrap();
                    if v < c.b {
                        true
                    } else if v > c.b {
                        false
                    } else if !c.strict {
                        true
                    } else {
                        strict_point(self.dim, &rest, &[(c.a.clone(), c.b.clone())])?.is_none()
                    }
                }
            };
            if redundant {
                kept.remove(i);
            } else {
                i += 1;
            }
        }
        Ok(HPolyhedron {
            dim: self.dim,
            constraints: kept,
            openness: self.openness,
        })
    }

    /// Row pairs `a·x ≤ b`, `-a·x ≤ -b` that are implied equalities of the
    /// closure, detected by LP (`min a·x = b`). Returns the row indices.
    pub fn implicit_equalities(&self) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        if self.closure().is_empty()? {
            return Ok(out);
        }
        let rows = self.lp_constraints();
        for (i, c) in self.constraints.iter().enumerate() {
            match crate::lp::maximize(&c.a.neg(), &rows)? {
                Some(Some((ref v, _))) if -v == c.b => out.push(i),
                _ => {}
            }
        }
        Ok(out)
    }
}

/// Solves the max-margin LP: maximize `t ≤ 1` subject to `a·x + t ≤ b` on
/// strict rows, `a·x ≤ b` on the others and the equalities. Returns a point
/// when the optimum is positive, i.e. the mixed system is feasible.
pub(crate) fn strict_point(
    dim: usize,
    constraints: &[Constraint],
    equalities: &[(QVector, Rational)],
) -> Result<Option<QVector>> {
    if constraints
        .iter()
        .any(|c| c.a.is_zero() && !c.satisfied_by(&QVector::zeros(dim)))
    {
        return Ok(None);
    }
    let mut obj = QVector::zeros(dim + 1);
    obj[dim] = Rational::one();
    let mut p = LpProblem::new(obj, Sense::Max);
    let one = QVector::from_ints(&[1]);
    let zero = QVector::zeros(1);
    for c in constraints {
        let tail = if c.strict { &one } else { &zero };
        p.push(LpConstraint::le(c.a.concat(tail), c.b.clone()));
    }
    for (a, b) in equalities {
        p.push(LpConstraint::eq(a.concat(&zero), b.clone()));
    }
    p.push(LpConstraint::le(
        QVector::unit(dim + 1, dim),
        Rational::one(),
    ));
    let r = solve_lp(&p)?;
    match r.status {
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => unreachable!("margin is capped"),
        LpStatus::Optimal => {
            if r.optimum.as_ref().unwrap().is_positive() {
                Ok(Some(r.witness.unwrap().slice(0..dim)))
            } else {
                Ok(None)
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraint {
    a: QVector,
    b: Rational,
    strict: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHPolyhedron {
    dim: usize,
    #[serde(default)]
    openness: Option<Openness>,
    constraints: Vec<RawConstraint>,
}

impl Serialize for HPolyhedron {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("HPolyhedron", 3)?;
        st.serialize_field("dim", &self.dim)?;
        st.serialize_field("openness", &self.openness)?;
        st.serialize_field("constraints", &self.constraints)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for HPolyhedron {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawHPolyhedron::deserialize(d)?;
        let openness = raw.openness.unwrap_or(Openness::Closed);
        let cons = raw
            .constraints
            .into_iter()
            .map(|c| Constraint {
                a: c.a,
                b: c.b,
                strict: c.strict.unwrap_or(openness == Openness::Open),
            })
            .collect();
        HPolyhedron::with_openness(raw.dim, cons, openness).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, qv};

    pub(crate) fn square() -> HPolyhedron {
        HPolyhedron::cube(2, q(-1, 1), q(1, 1))
    }

    #[test]
    fn membership() {
        let s = square();
        assert!(s.contains_point(&qv(&[0, 0])).unwrap());
        assert!(s.contains_point(&qv(&[1, 0])).unwrap());
        assert!(!s.strict_version().contains_point(&qv(&[1, 0])).unwrap());
        assert!(s.contains_point(&qv(&[0])).is_err());
    }

    #[test]
    fn normalization_merges_parallel_rows() {
        let p = HPolyhedron::from_ints(1, &[(&[2], 4), (&[1], 3), (&[0], 5)]);
        assert_eq!(p.constraints(), &[Constraint::le(qv(&[1]), q(2, 1))]);
        let e = HPolyhedron::from_ints(1, &[(&[0], -1), (&[1], 3)]);
        assert!(e.is_marked_empty());
        assert!(e.is_empty().unwrap());
    }

    #[test]
    fn product_examples() {
        let i = HPolyhedron::cube(1, q(-1, 1), q(1, 1));
        assert_eq!(i.product(&i), square());
        let oi = i.strict_version();
        assert_eq!(oi.product(&oi).openness(), Openness::Open);
        let pt = HPolyhedron::hyperplane(qv(&[1]), q(3, 1));
        let e = i.product(&pt);
        assert!(e.contains_point(&qv(&[1, 3])).unwrap());
        assert!(!e.contains_point(&qv(&[1, 2])).unwrap());
    }

    #[test]
    fn redundancy_and_emptiness() {
        let p = HPolyhedron::from_ints(
            2,
            &[
                (&[1, 0], 1),
                (&[1, 0], 1),
                (&[1, 1], 5),
                (&[-1, 0], 1),
                (&[0, 1], 1),
                (&[0, -1], 1),
            ],
        );
        let r = p.remove_redundant().unwrap();
        assert_eq!(r.constraints().len(), 4);
        let e = HPolyhedron::from_ints(1, &[(&[1], 0), (&[-1], -1)]);
        assert!(e.is_empty().unwrap());
        assert!(e.remove_redundant().unwrap().is_marked_empty());
        // open interval (0,1) with a redundant strict copy x < 1 kept once
        let o = HPolyhedron::open(
            1,
            vec![
                Constraint::le(qv(&[1]), q(1, 1)),
                Constraint::ge(qv(&[1]), q(0, 1)),
            ],
        )
        .unwrap();
        assert_eq!(o.remove_redundant().unwrap().constraints().len(), 2);
    }

    #[test]
    fn strict_redundancy_with_touching_face() {
        // {x ≤ 0, x < 1}: the strict row is redundant
        let p = HPolyhedron::new(
            1,
            vec![
                Constraint::le(qv(&[1]), q(0, 1)),
                Constraint::lt(qv(&[2]), q(2, 1)),
            ],
        )
        .unwrap();
        assert_eq!(p.remove_redundant().unwrap().constraints().len(), 1);
        // {x ≤ 0, x < 0}: x < 0 is not implied
        let p = HPolyhedron::new(
            1,
            vec![
                Constraint::le(qv(&[1]), q(0, 1)),
                Constraint::lt(qv(&[1]), q(0, 1)),
            ],
        )
        .unwrap();
        assert_eq!(p.constraints().len(), 1);
        assert!(p.constraints()[0].strict);
    }

    #[test]
    fn implicit_equalities_detected() {
        let seg = HPolyhedron::from_ints(
            2,
            &[(&[0, 1], 0), (&[0, -1], 0), (&[1, 0], 1), (&[-1, 0], 0)],
        );
        assert_eq!(seg.implicit_equalities().unwrap().len(), 2);
        assert!(seg.interior_point().unwrap().is_none());
        assert!(square().interior_point().unwrap().is_some());
    }

    #[test]
    fn json_round_trip() {
        let s = square().strict_version();
        let j = serde_json::to_string(&s).unwrap();
        let back: HPolyhedron = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"dim":1,"openness":"closed","constraints":[{"a":[1],"b":1,"strict":true}]}"#;
        assert!(serde_json::from_str::<HPolyhedron>(bad).is_err());
        let open = r#"{"dim":1,"openness":"open","constraints":[{"a":[1],"b":"1/2"}]}"#;
        let p: HPolyhedron = serde_json::from_str(open).unwrap();
        assert!(p.constraints()[0].strict);
    }

    #[test]
    fn slicing() {
        // {y ≥ x, y ≤ 1} at x = 0 -> [0, 1]
        let g = HPolyhedron::from_ints(2, &[(&[1, -1], 0), (&[0, 1], 1)]);
        let s = g.slice(&[(0, q(0, 1))]).unwrap();
        assert_eq!(s, HPolyhedron::cube(1, q(0, 1), q(1, 1)));
    }
}
