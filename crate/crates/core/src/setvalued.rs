//! Set-valued maps with polyhedral convex graphs.

use serde::{Deserialize, Serialize};

use crate::arith::{QMatrix, QVector, Rational};
use crate::convex::{normal_cone, NormalCone};
use crate::error::{Error, Result};
use crate::polyhedra::{eliminate_variables, h_to_v, minkowski_sum, Constraint, HPolyhedron};

/// `F: ℚⁿ ⇉ ℚᵐ` stored as its graph in `ℚⁿ⁺ᵐ` (x first, then y).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SetValuedMap {
    dim_x: usize,
    dim_y: usize,
    graph: HPolyhedron,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    dim_x: usize,
    dim_y: usize,
    graph: HPolyhedron,
}

impl<'de> Deserialize<'de> for SetValuedMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawMap::deserialize(d)?;
        SetValuedMap::new(raw.dim_x, raw.dim_y, raw.graph).map_err(serde::de::Error::custom)
    }
}

/// Block matrix selecting coordinates `idx` of a `dim`-vector.
pub(crate) fn selector(idx: &[usize], dim: usize) -> QMatrix {
    QMatrix::new(idx.iter().map(|&i| QVector::unit(dim, i)).collect())
        .ok()
        .filter(|m| m.row_count() > 0)
        .unwrap_or_else(|| QMatrix::with_cols(Vec::new(), dim).unwrap())
}

/// `{z ∈ ℚ^dim : z[idx] ∈ p}`.
pub(crate) fn embed(p: &HPolyhedron, idx: &[usize], dim: usize) -> Result<HPolyhedron> {
    p.preimage(&selector(idx, dim), &QVector::zeros(idx.len()))
}

impl SetValuedMap {
    pub fn new(dim_x: usize, dim_y: usize, graph: HPolyhedron) -> Result<Self> {
        if graph.dim() != dim_x + dim_y {
            return Err(Error::DimensionMismatch {
                expected: dim_x + dim_y,
                found: graph.dim(),
            });
        }
        Ok(SetValuedMap {
            dim_x,
            dim_y,
            graph,
        })
    }

    pub fn dim_x(&self) -> usize {
        self.dim_x
    }

    pub fn dim_y(&self) -> usize {
        self.dim_y
    }

    pub fn graph(&self) -> &HPolyhedron {
        &self.graph
    }

    fn y_block(&self) -> Vec<usize> {
        (self.dim_x..self.dim_x + self.dim_y).collect()
    }

    pub fn point(&self, x: &QVector, y: &QVector) -> QVector {
        x.concat(y)
    }
}

pub fn domain_of(f: &SetValuedMap) -> Result<HPolyhedron> {
    eliminate_variables(&f.graph, &f.y_block())
}

/// `F(x̄)` as a polyhedron in `ℚᵐ`.
pub fn value_at(f: &SetValuedMap, xbar: &QVector) -> Result<HPolyhedron> {
    if xbar.dim() != f.dim_x {
        return Err(Error::DimensionMismatch {
            expected: f.dim_x,
            found: xbar.dim(),
        });
    }
    let fixed: Vec<(usize, Rational)> = xbar.iter().cloned().enumerate().collect();
    f.graph.slice(&fixed)
}

fn check_same_dims(f1: &SetValuedMap, f2: &SetValuedMap) -> Result<()> {
    if f1.dim_x != f2.dim_x {
        return Err(Error::DimensionMismatch {
            expected: f1.dim_x,
            found: f2.dim_x,
        });
    }
    if f1.dim_y != f2.dim_y {
        return Err(Error::DimensionMismatch {
            expected: f1.dim_y,
            found: f2.dim_y,
        });
    }
    Ok(())
}

/// Graph of `F1 + F2`: `{(x, y) : y = y₁ + y₂, y₁ ∈ F1(x), y₂ ∈ F2(x)}`,
/// eliminating `y₁` after substituting `y₂ = y - y₁`.
pub fn map_sum(f1: &SetValuedMap, f2: &SetValuedMap) -> Result<SetValuedMap> {
    check_same_dims(f1, f2)?;
    let (n, m) = (f1.dim_x, f1.dim_y);
    // coordinates: (x, y₁, y)
    let total = n + 2 * m;
    let g1 = embed(&f1.graph, &(0..n + m).collect::<Vec<_>>(), total)?;
    let mut rows: Vec<QVector> = (0..n).map(|i| QVector::unit(total, i)).collect();
    for j in 0..m {
        let mut r = QVector::unit(total, n + m + j);
        r[n + j] = -Rational::one();
        rows.push(r);
    }
    let g2 = f2
        .graph
        .preimage(&QMatrix::new(rows)?, &QVector::zeros(n + m))?;
    let joint = g1.intersect(&g2)?;
    let graph = eliminate_variables(&joint, &(n..n + m).collect::<Vec<_>>())?;
    SetValuedMap::new(n, m, graph)
}

/// `{(y₁, y₂) : y₁ + y₂ = ȳ, y₁ ∈ F1(x̄), y₂ ∈ F2(x̄)}`.
pub fn sum_decompositions(
    f1: &SetValuedMap,
    f2: &SetValuedMap,
    xbar: &QVector,
    ybar: &QVector,
) -> Result<HPolyhedron> {
    check_same_dims(f1, f2)?;
    let m = f1.dim_y;
    if ybar.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: ybar.dim(),
        });
    }
    let v1 = embed(&value_at(f1, xbar)?, &(0..m).collect::<Vec<_>>(), 2 * m)?;
    let v2 = embed(&value_at(f2, xbar)?, &(m..2 * m).collect::<Vec<_>>(), 2 * m)?;
    let mut cons = Vec::new();
    for j in 0..m {
        let mut a = QVector::unit(2 * m, j);
        a[m + j] = Rational::one();
        cons.push(Constraint::le(a.clone(), ybar[j].clone()));
        cons.push(Constraint::ge(a, ybar[j].clone()));
    }
    v1.intersect(&v2)?
        .intersect(&HPolyhedron::new(2 * m, cons)?)
}

/// Graph of `G∘F`: eliminate `y` from `{(x, y, z) : (x, y) ∈ gph F, (y, z) ∈ gph G}`.
pub fn map_compose(g: &SetValuedMap, f: &SetValuedMap) -> Result<SetValuedMap> {
    if f.dim_y != g.dim_x {
        return Err(Error::DimensionMismatch {
            expected: f.dim_y,
            found: g.dim_x,
        });
    }
    let (n, m, k) = (f.dim_x, f.dim_y, g.dim_y);
    let total = n + m + k;
    let a = embed(&f.graph, &(0..n + m).collect::<Vec<_>>(), total)?;
    let b = embed(&g.graph, &(n..total).collect::<Vec<_>>(), total)?;
    let graph = eliminate_variables(&a.intersect(&b)?, &(n..n + m).collect::<Vec<_>>())?;
    SetValuedMap::new(n, k, graph)
}

/// `{y : (x̄, y) ∈ gph F, (y, z̄) ∈ gph G}`.
pub fn composition_middle(
    g: &SetValuedMap,
    f: &SetValuedMap,
    xbar: &QVector,
    zbar: &QVector,
) -> Result<HPolyhedron> {
    let fy = value_at(f, xbar)?;
    let fixed: Vec<(usize, Rational)> = zbar
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, v)| (g.dim_x + i, v))
        .collect();
    let gy = g.graph.slice(&fixed)?;
    fy.intersect(&gy)
}

/// Constraint form of `N((x̄, ȳ); gph F)` in `ℚⁿ⁺ᵐ`, or `None` when the
/// point is outside the graph closure.
pub fn graph_normal_cone_h(
    f: &SetValuedMap,
    xbar: &QVector,
    ybar: &QVector,
) -> Result<Option<HPolyhedron>> {
    let p = f.point(xbar, ybar);
    match normal_cone(&f.graph, &p)? {
        NormalCone::NotAMember => Ok(None),
        NormalCone::Cone { cone } => Ok(Some(cone.to_h())),
    }
}

/// `D*F(x̄, ȳ)(g) = {f : (f, -g) ∈ N((x̄, ȳ); gph F)}`; `None` when
/// `(x̄, ȳ)` is outside the graph closure.
pub fn coderivative(
    f: &SetValuedMap,
    xbar: &QVector,
    ybar: &QVector,
    g: &QVector,
) -> Result<Option<HPolyhedron>> {
    if g.dim() != f.dim_y {
        return Err(Error::DimensionMismatch {
            expected: f.dim_y,
            found: g.dim(),
        });
    }
    let Some(n) = graph_normal_cone_h(f, xbar, ybar)? else {
        return Ok(None);
    };
    let fixed: Vec<(usize, Rational)> = g
        .iter()
        .enumerate()
        .map(|(j, v)| (f.dim_x + j, -v))
        .collect();
    Ok(Some(n.slice(&fixed)?))
}

/// `A ⊕ B` for closed polyhedra, through generator form.
pub fn closed_sum(a: &HPolyhedron, b: &HPolyhedron) -> Result<HPolyhedron> {
    Ok(minkowski_sum(&h_to_v(a)?, &h_to_v(b)?)?.to_h())
}

/// Right side of the coderivative chain rule:
/// `{f : ∃g, (f, -g) ∈ N(gph F), (g, -h) ∈ N(gph G)}` as one projection.
pub fn chain_rule_rhs(
    g_map: &SetValuedMap,
    f_map: &SetValuedMap,
    xbar: &QVector,
    ybar: &QVector,
    zbar: &QVector,
    h: &QVector,
) -> Result<Option<HPolyhedron>> {
    let (n, m) = (f_map.dim_x, f_map.dim_y);
    let Some(nf) = graph_normal_cone_h(f_map, xbar, ybar)? else {
        return Ok(None);
    };
    let Some(ng) = graph_normal_cone_h(g_map, ybar, zbar)? else {
        return Ok(None);
    };
    // variables (f, g): nf applied to (f, -g); ng applied to (g, -h).
    let mut rows: Vec<QVector> = (0..n).map(|i| QVector::unit(n + m, i)).collect();
    rows.extend((0..m).map(|j| QVector::unit(n + m, n + j).neg()));
    let a = nf.preimage(&QMatrix::new(rows)?, &QVector::zeros(n + m))?;
    let fixed: Vec<(usize, Rational)> = h.iter().enumerate().map(|(j, v)| (m + j, -v)).collect();
    let b = embed(&ng.slice(&fixed)?, &(n..n + m).collect::<Vec<_>>(), n + m)?;
    Ok(Some(eliminate_variables(
        &a.intersect(&b)?,
        &(n..n + m).collect::<Vec<_>>(),
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, qv};
    use crate::polyhedra::set_eq;

    fn map(rows: &[(&[i64], i64)]) -> SetValuedMap {
        SetValuedMap::new(1, 1, HPolyhedron::from_ints(2, rows)).unwrap()
    }

    fn interval(lo: i64, hi: i64) -> HPolyhedron {
        HPolyhedron::cube(1, q(lo, 1), q(hi, 1))
    }

    #[test]
    fn domain_examples() {
        let f = map(&[(&[1, -1], 0), (&[0, 1], 1)]);
        assert_eq!(
            domain_of(&f).unwrap(),
            HPolyhedron::from_ints(1, &[(&[1], 1)])
        );
        let whole = SetValuedMap::new(1, 1, HPolyhedron::universe(2)).unwrap();
        assert_eq!(domain_of(&whole).unwrap(), HPolyhedron::universe(1));
        let empty = SetValuedMap::new(1, 1, HPolyhedron::empty(2)).unwrap();
        assert!(domain_of(&empty).unwrap().is_empty().unwrap());
    }

    #[test]
    fn value_examples() {
        let f = map(&[(&[1, -1], 0), (&[0, 1], 1)]);
        assert_eq!(value_at(&f, &qv(&[0])).unwrap(), interval(0, 1));
        assert!(value_at(&f, &qv(&[2])).unwrap().is_empty().unwrap());
        let id = map(&[(&[1, -1], 0), (&[-1, 1], 0)]);
        assert_eq!(value_at(&id, &qv(&[3])).unwrap(), interval(3, 3));
    }

    #[test]
    fn sum_examples() {
        let f1 = map(&[(&[1, -1], 0)]);
        let f2 = map(&[(&[-1, -1], 0)]);
        let s = map_sum(&f1, &f2).unwrap();
        assert_eq!(s.graph(), &HPolyhedron::from_ints(2, &[(&[0, -1], 0)]));
        let zero = map(&[(&[0, 1], 0), (&[0, -1], 0)]);
        assert!(set_eq(map_sum(&f1, &zero).unwrap().graph(), f1.graph()).unwrap());
        let e = SetValuedMap::new(1, 1, HPolyhedron::empty(2)).unwrap();
        assert!(map_sum(&e, &e).unwrap().graph().is_empty().unwrap());
    }

    #[test]
    fn decomposition_examples() {
        let f1 = map(&[(&[1, -1], 0)]);
        let f2 = map(&[(&[-1, -1], 0)]);
        let d = sum_decompositions(&f1, &f2, &qv(&[0]), &qv(&[0])).unwrap();
        let v = h_to_v(&d).unwrap();
        assert_eq!(v.vertices(), &[qv(&[0, 0])]);
        assert!(v.rays().is_empty());
        let d = sum_decompositions(&f1, &f2, &qv(&[0]), &qv(&[2])).unwrap();
        let v = h_to_v(&d).unwrap();
        assert_eq!(v.vertices(), &[qv(&[0, 2]), qv(&[2, 0])]);
        assert!(sum_decompositions(&f1, &f2, &qv(&[0]), &qv(&[-1]))
            .unwrap()
            .is_empty()
            .unwrap());
    }

    #[test]
    fn composition_examples() {
        let f = map(&[(&[1, -1], 0)]);
        let g = map(&[(&[2, -1], 0)]);
        let c = map_compose(&g, &f).unwrap();
        assert_eq!(c.graph(), &HPolyhedron::from_ints(2, &[(&[2, -1], 0)]));
        let id = map(&[(&[1, -1], 0), (&[-1, 1], 0)]);
        assert!(set_eq(map_compose(&id, &f).unwrap().graph(), f.graph()).unwrap());
        let e = SetValuedMap::new(1, 1, HPolyhedron::empty(2)).unwrap();
        assert!(map_compose(&g, &e).unwrap().graph().is_empty().unwrap());
    }

    #[test]
    fn coderivative_examples() {
        let f = map(&[(&[1, -1], 0)]);
        let o = qv(&[0]);
        let d = coderivative(&f, &o, &o, &qv(&[1])).unwrap().unwrap();
        assert_eq!(d, interval(1, 1));
        let d = coderivative(&f, &o, &o, &qv(&[-1])).unwrap().unwrap();
        assert!(d.is_empty().unwrap());
        let d = coderivative(&f, &o, &qv(&[5]), &qv(&[1])).unwrap().unwrap();
        assert!(d.is_empty().unwrap());
        let d = coderivative(&f, &o, &qv(&[5]), &qv(&[0])).unwrap().unwrap();
        assert_eq!(d, interval(0, 0));
        assert!(coderivative(&f, &qv(&[1]), &qv(&[0]), &qv(&[1]))
            .unwrap()
            .is_none());
    }

    #[test]
    fn chain_rhs_on_compose_example() {
        let f = map(&[(&[1, -1], 0)]);
        let g = map(&[(&[2, -1], 0)]);
        let o = qv(&[0]);
        let rhs = chain_rule_rhs(&g, &f, &o, &o, &o, &qv(&[1]))
            .unwrap()
            .unwrap();
        let lhs = coderivative(&map_compose(&g, &f).unwrap(), &o, &o, &qv(&[1]))
            .unwrap()
            .unwrap();
        assert!(set_eq(&lhs, &rhs).unwrap());
        assert_eq!(lhs, interval(2, 2));
    }
}
