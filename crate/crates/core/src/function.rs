//! Polyhedral convex functions stored by their epigraphs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{QMatrix, QVector, Rational};
use crate::convex::{normal_cone, NormalCone};
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpConstraint, LpProblem, LpStatus, Sense};
use crate::polyhedra::{
    eliminate_variables, h_to_v, strict_point, Constraint, HPolyhedron, VPolyhedron,
};
use crate::setvalued::{embed, graph_normal_cone_h, SetValuedMap};

/// `φ: ℚⁿ → ℚ ∪ {+∞}` with closed epigraph in `ℚⁿ⁺¹` (last coordinate t).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolyhedralFunction {
    dim: usize,
    epigraph: HPolyhedron,
}

/// An affine piece `g·x + c`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffinePiece {
    pub g: QVector,
    pub c: Rational,
}

/// A value in `ℚ ∪ {±∞}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtValue {
    Finite(Rational),
    PosInf,
    NegInf,
}

impl ExtValue {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtValue::Finite(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtValue::Finite(v) => write!(f, "{v}"),
            ExtValue::PosInf => write!(f, "+inf"),
            ExtValue::NegInf => write!(f, "-inf"),
        }
    }
}

impl Serialize for ExtValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtValue::Finite(v) => v.serialize(s),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl PolyhedralFunction {
    /// Validates closedness and upward recession (`t`-coefficients ≤ 0), and
    /// rejects epigraphs containing a downward vertical line.
    pub fn from_epigraph(dim: usize, epigraph: HPolyhedron) -> Result<Self> {
        if epigraph.dim() != dim + 1 {
            return Err(Error::DimensionMismatch {
                expected: dim + 1,
                found: epigraph.dim(),
            });
        }
        if !epigraph.is_closed() {
            return Err(Error::OpenInput("epigraph"));
        }
        if epigraph
            .constraints()
            .iter()
            .any(|c| c.a[dim].is_positive())
        {
            return Err(Error::InvalidInput(
                "epigraph must be closed upward in t".into(),
            ));
        }
        let f = PolyhedralFunction { dim, epigraph };
        if f.takes_neg_inf()? {
            return Err(Error::UnboundedBelow);
        }
        Ok(f)
    }

    /// Same checks as `from_epigraph` except the `-∞` test, so that
    /// `evaluate` can report `-∞` on such inputs.
    pub fn from_epigraph_unchecked(dim: usize, epigraph: HPolyhedron) -> Result<Self> {
        match Self::from_epigraph(dim, epigraph.clone()) {
            Err(Error::UnboundedBelow) => Ok(PolyhedralFunction { dim, epigraph }),
            other => other,
        }
    }

    /// `max_i (gᵢ·x + cᵢ)` restricted to `domain` (whole space if omitted).
    pub fn max_affine(
        dim: usize,
        pieces: &[AffinePiece],
        domain: Option<&HPolyhedron>,
    ) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidInput(
                "max_affine needs at least one piece".into(),
            ));
        }
        let mut cons = Vec::with_capacity(pieces.len());
        for p in pieces {
            if p.g.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.g.dim(),
                });
            }
            let mut a = p.g.clone();
            a.push(-Rational::one());
            cons.push(Constraint::le(a, -p.c.clone()));
        }
        let mut epi = HPolyhedron::closed(dim + 1, cons)?;
        if let Some(d) = domain {
            if d.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d.dim(),
                });
            }
            if !d.is_closed() {
                return Err(Error::OpenInput("function domain"));
            }
            epi = epi.intersect(&d.product(&HPolyhedron::universe(1)))?;
        }
        Self::from_epigraph(dim, epi)
    }

    /// Integer shorthand for `max_affine` on the whole space.
    pub fn from_int_pieces(dim: usize, pieces: &[(&[i64], i64)]) -> Self {
        let ps: Vec<AffinePiece> = pieces
            .iter()
            .map(|(g, c)| AffinePiece {
                g: QVector::from_ints(g),
                c: Rational::from_integer(*c),
            })
            .collect();
        Self::max_affine(dim, &ps, None).unwrap()
    }

    /// `δ_Ω`: zero on `Ω`, `+∞` elsewhere.
    pub fn indicator(omega: &HPolyhedron) -> Result<Self> {
        let d = omega.dim();
        Self::max_affine(
            d,
            &[AffinePiece {
                g: QVector::zeros(d),
                c: Rational::zero(),
            }],
            Some(omega),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn epigraph(&self) -> &HPolyhedron {
        &self.epigraph
    }

    pub fn is_proper(&self) -> Result<bool> {
        Ok(!self.epigraph.is_empty()?)
    }

    /// `-e_t` is a recession direction of a nonempty epigraph.
    fn takes_neg_inf(&self) -> Result<bool> {
        if self
            .epigraph
            .constraints()
            .iter()
            .any(|c| !c.a[self.dim].is_zero())
        {
            return Ok(false);
        }
        Ok(!self.epigraph.is_empty()?)
    }

    /// `dom φ`, the projection of the epigraph.
    pub fn domain(&self) -> Result<HPolyhedron> {
        eliminate_variables(&self.epigraph, &[self.dim])
    }

    fn check_point(&self, x: &QVector) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunction {
    dim: usize,
    epigraph: Option<HPolyhedron>,
    max_affine: Option<Vec<AffinePiece>>,
    domain: Option<HPolyhedron>,
}

impl<'de> Deserialize<'de> for PolyhedralFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawFunction::deserialize(d)?;
        match (raw.epigraph, raw.max_affine) {
            (Some(epi), None) => {
                if raw.domain.is_some() {
                    return Err(D::Error::custom(
                        "`domain` is only allowed with `max_affine`",
                    ));
                }
                PolyhedralFunction::from_epigraph(raw.dim, epi).map_err(D::Error::custom)
            }
            (None, Some(pieces)) => {
                PolyhedralFunction::max_affine(raw.dim, &pieces, raw.domain.as_ref())
                    .map_err(D::Error::custom)
            }
            _ => Err(D::Error::custom(
                "expected exactly one of `epigraph` or `max_affine`",
            )),
        }
    }
}

/// `φ(x̄)` by LP: `min t` over the epigraph slice.
pub fn evaluate(phi: &PolyhedralFunction, xbar: &QVector) -> Result<ExtValue> {
    phi.check_point(xbar)?;
    let fixed: Vec<(usize, Rational)> = xbar.iter().cloned().enumerate().collect();
    let slice = phi.epigraph.slice(&fixed)?;
    Ok(match slice.maximize(&QVector::from_ints(&[-1]))? {
        None => ExtValue::PosInf,
        Some(None) => ExtValue::NegInf,
        Some(Some((v, _))) => ExtValue::Finite(-v),
    })
}

fn finite_value(phi: &PolyhedralFunction, xbar: &QVector) -> Result<Rational> {
    match evaluate(phi, xbar)? {
        ExtValue::Finite(v) => Ok(v),
        ExtValue::NegInf => Err(Error::UnboundedBelow),
        ExtValue::PosInf => Err(Error::InfiniteValue),
    }
}

/// `∂φ(x̄)` together with its base point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Subdifferential {
    pub at: QVector,
    pub set: HPolyhedron,
}

/// `∂φ(x̄) = {f : (f, -1) ∈ N((x̄, φ(x̄)); epi φ)}`.
pub fn subdifferential(phi: &PolyhedralFunction, xbar: &QVector) -> Result<Subdifferential> {
    let v = finite_value(phi, xbar)?;
    let mut p = xbar.clone();
    p.push(v);
    let cone = match normal_cone(&phi.epigraph, &p)? {
        NormalCone::Cone { cone } => cone,
        NormalCone::NotAMember => unreachable!("(x̄, φ(x̄)) lies on the epigraph"),
    };
    let set = cone.to_h().slice(&[(phi.dim, -Rational::one())])?;
    Ok(Subdifferential {
        at: xbar.clone(),
        set,
    })
}

/// Definitional test: `min_{epi} (t - f·x) = φ(x̄) - f·x̄`.
pub fn check_subgradient_definitional(
    phi: &PolyhedralFunction,
    xbar: &QVector,
    f: &QVector,
) -> Result<bool> {
    let v = finite_value(phi, xbar)?;
    if f.dim() != phi.dim {
        return Err(Error::DimensionMismatch {
            expected: phi.dim,
            found: f.dim(),
        });
    }
    let mut obj = f.clone();
    obj.push(-Rational::one());
    let target = v - f.dot(xbar);
    Ok(match phi.epigraph.maximize(&obj)? {
        Some(Some((m, _))) => -m == target,
        _ => false,
    })
}

/// `φ1 + φ2`: eliminate `t₁` from `{(x, t₁, t) : (x, t₁) ∈ epi φ1, (x, t - t₁) ∈ epi φ2}`.
pub fn func_sum(
    phi1: &PolyhedralFunction,
    phi2: &PolyhedralFunction,
) -> Result<PolyhedralFunction> {
    if phi1.dim != phi2.dim {
        return Err(Error::DimensionMismatch {
            expected: phi1.dim,
            found: phi2.dim,
        });
    }
    let n = phi1.dim;
    let total = n + 2;
    let e1 = embed(&phi1.epigraph, &(0..=n).collect::<Vec<_>>(), total)?;
    let mut rows: Vec<QVector> = (0..n).map(|i| QVector::unit(total, i)).collect();
    let mut last = QVector::unit(total, n + 1);
    last[n] = -Rational::one();
    rows.push(last);
    let e2 = phi2
        .epigraph
        .preimage(&QMatrix::new(rows)?, &QVector::zeros(n + 1))?;
    let epi = eliminate_variables(&e1.intersect(&e2)?, &[n])?;
    PolyhedralFunction::from_epigraph(n, epi)
}

/// `φ∘A` with `epi = {(x, t) : (Ax, t) ∈ epi φ}`.
pub fn precompose_linear(phi: &PolyhedralFunction, a: &QMatrix) -> Result<PolyhedralFunction> {
    if a.row_count() != phi.dim {
        return Err(Error::DimensionMismatch {
            expected: phi.dim,
            found: a.row_count(),
        });
    }
    let n = a.col_count();
    let mut rows: Vec<QVector> = a
        .rows()
        .iter()
        .map(|r| r.concat(&QVector::zeros(1)))
        .collect();
    rows.push(QVector::unit(n + 1, n));
    let m = QMatrix::with_cols(rows, n + 1)?;
    let epi = phi.epigraph.preimage(&m, &QVector::zeros(phi.dim + 1))?;
    PolyhedralFunction::from_epigraph(n, epi)
}

/// `A*(S) = {Aᵀ g : g ∈ S}` for closed `S` in the dual of A's target.
pub fn adjoint_image(a: &QMatrix, s: &HPolyhedron) -> Result<HPolyhedron> {
    if s.dim() != a.row_count() {
        return Err(Error::DimensionMismatch {
            expected: a.row_count(),
            found: s.dim(),
        });
    }
    let at = a.transpose();
    let at = if at.row_count() == 0 {
        QMatrix::with_cols(Vec::new(), a.row_count())?
    } else {
        at
    };
    Ok(h_to_v(s)?
        .affine_image(&at, &QVector::zeros(a.col_count()))?
        .to_h())
}

/// The joint system `epi φ ∩ (gph F × ℚ)` in `(x, y, t)`.
fn marginal_system(phi: &PolyhedralFunction, f: &SetValuedMap) -> Result<HPolyhedron> {
    let (n, m) = (f.dim_x(), f.dim_y());
    if phi.dim != n + m {
        return Err(Error::DimensionMismatch {
            expected: n + m,
            found: phi.dim,
        });
    }
    let g = f.graph().product(&HPolyhedron::universe(1));
    phi.epigraph.intersect(&g)
}

/// Some `(0, dy, -1)` is a recession direction of a nonempty system.
fn marginal_unbounded(system: &HPolyhedron, n: usize, m: usize) -> Result<bool> {
    if system.is_empty()? {
        return Ok(false);
    }
    let total = n + m + 1;
    let mut lp = LpProblem::new(QVector::zeros(total), Sense::Max);
    for c in system.constraints() {
        lp.push(LpConstraint::le(c.a.clone(), Rational::zero()));
    }
    for i in 0..n {
        lp.push(LpConstraint::eq(QVector::unit(total, i), Rational::zero()));
    }
    lp.push(LpConstraint::eq(
        QVector::unit(total, n + m),
        -Rational::one(),
    ));
    Ok(solve_lp(&lp)?.status != LpStatus::Infeasible)
}

/// `μ(x) = inf{φ(x, y) : y ∈ F(x)}`, by projecting the joint system.
pub fn marginal_function(phi: &PolyhedralFunction, f: &SetValuedMap) -> Result<PolyhedralFunction> {
    let (n, m) = (f.dim_x(), f.dim_y());
    let sys = marginal_system(phi, f)?;
    if marginal_unbounded(&sys, n, m)? {
        return Err(Error::UnboundedBelow);
    }
    let epi = eliminate_variables(&sys, &(n..n + m).collect::<Vec<_>>())?;
    PolyhedralFunction::from_epigraph(n, epi)
}

/// `μ(x̄)` by one LP over the joint system.
pub fn marginal_value(
    phi: &PolyhedralFunction,
    f: &SetValuedMap,
    xbar: &QVector,
) -> Result<ExtValue> {
    let (n, m) = (f.dim_x(), f.dim_y());
    if xbar.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: xbar.dim(),
        });
    }
    let sys = marginal_system(phi, f)?;
    let fixed: Vec<(usize, Rational)> = xbar.iter().cloned().enumerate().collect();
    let slice = sys.slice(&fixed)?;
    Ok(match slice.maximize(&QVector::unit(m + 1, m).neg())? {
        None => ExtValue::PosInf,
        Some(None) => ExtValue::NegInf,
        Some(Some((v, _))) => ExtValue::Finite(-v),
    })
}

/// `S(x̄) = {y ∈ F(x̄) : φ(x̄, y) ≤ μ(x̄)}`.
pub fn argmin_set(
    phi: &PolyhedralFunction,
    f: &SetValuedMap,
    xbar: &QVector,
) -> Result<HPolyhedron> {
    let mu = match marginal_value(phi, f, xbar)? {
        ExtValue::Finite(v) => v,
        ExtValue::NegInf => return Err(Error::UnboundedBelow),
        ExtValue::PosInf => return Err(Error::InfiniteValue),
    };
    let (n, m) = (f.dim_x(), f.dim_y());
    let sys = marginal_system(phi, f)?;
    let mut fixed: Vec<(usize, Rational)> = xbar.iter().cloned().enumerate().collect();
    fixed.push((n + m, mu));
    sys.slice(&fixed)
}

/// `core(dom φ) ∩ core(gph F) ≠ ∅`.
pub fn marginal_qualified(phi: &PolyhedralFunction, f: &SetValuedMap) -> Result<bool> {
    let dom = phi.domain()?;
    let mut cons: Vec<Constraint> = Vec::new();
    for c in dom.constraints().iter().chain(f.graph().constraints()) {
        cons.push(Constraint::lt(c.a.clone(), c.b.clone()));
    }
    Ok(strict_point(dom.dim(), &cons, &[])?.is_some())
}

/// `∂μ(x̄) = ⋃_{(f, g) ∈ ∂φ(x̄, ȳ)} f + D*F(x̄, ȳ)(g)`, checking the
/// qualification first.
pub fn marginal_subdifferential(
    phi: &PolyhedralFunction,
    f: &SetValuedMap,
    xbar: &QVector,
    ybar: &QVector,
) -> Result<HPolyhedron> {
    if !marginal_qualified(phi, f)? {
        return Err(Error::PreconditionUnmet(
            "core(dom φ) and core(gph F) do not meet".into(),
        ));
    }
    marginal_subdifferential_unchecked(phi, f, xbar, ybar)
}

/// The union formula without the qualification check. Variables are
/// `(h, f₂, g)` with `h = f + f₂`: the `∂φ` rows act on `(h - f₂, g)`, the
/// graph normal-cone rows on `(f₂, -g)`; then `f₂` and `g` are eliminated.
pub fn marginal_subdifferential_unchecked(
    phi: &PolyhedralFunction,
    f: &SetValuedMap,
    xbar: &QVector,
    ybar: &QVector,
) -> Result<HPolyhedron> {
    let (n, m) = (f.dim_x(), f.dim_y());
    if ybar.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: ybar.dim(),
        });
    }
    let mu = match marginal_value(phi, f, xbar)? {
        ExtValue::Finite(v) => v,
        ExtValue::NegInf => return Err(Error::UnboundedBelow),
        ExtValue::PosInf => return Err(Error::InfiniteValue),
    };
    let xy = xbar.concat(ybar);
    let in_graph = f.graph().contains_point(&xy)?;
    let optimal = in_graph && evaluate(phi, &xy)? == ExtValue::Finite(mu);
    if !optimal {
        return Err(Error::InvalidInput("ȳ is not a minimizer at x̄".into()));
    }
    let dphi = subdifferential(phi, &xy)?.set;
    let nf = graph_normal_cone_h(f, xbar, ybar)?.expect("ȳ ∈ F(x̄)");
    let total = 2 * n + m;
    // (f, g) = (h - f₂, g)
    let mut rows: Vec<QVector> = Vec::with_capacity(n + m);
    for i in 0..n {
        let mut r = QVector::unit(total, i);
        r[n + i] = -Rational::one();
        rows.push(r);
    }
    for j in 0..m {
        rows.push(QVector::unit(total, 2 * n + j));
    }
    let a = dphi.preimage(&QMatrix::new(rows)?, &QVector::zeros(n + m))?;
    // (f₂, -g)
    let mut rows: Vec<QVector> = (0..n).map(|i| QVector::unit(total, n + i)).collect();
    rows.extend((0..m).map(|j| QVector::unit(total, 2 * n + j).neg()));
    let b = nf.preimage(&QMatrix::new(rows)?, &QVector::zeros(n + m))?;
    eliminate_variables(&a.intersect(&b)?, &(n..total).collect::<Vec<_>>())
}

/// Generators of a closed set, for vertex-based checks.
pub fn vertices_of(s: &HPolyhedron) -> Result<VPolyhedron> {
    h_to_v(s)
}
