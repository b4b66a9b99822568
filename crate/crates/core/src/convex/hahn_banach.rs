use super::{separate_point, sublevel_open, Functional, SeparationOutcome, SublinearFunc};
use crate::arith::{
    complement_basis, kernel, rank_of_vectors, solve_linear_system, QMatrix, QVector, Rational,
};
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpConstraint, LpProblem, LpStatus, Sense};
use crate::polyhedra::{in_hull, minkowski_sum, HPolyhedron, VPolyhedron};

fn validate(p: &SublinearFunc, basis: &QMatrix, g: &QVector) -> Result<Vec<QVector>> {
    let n = p.dim();
    if basis.row_count() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: basis.row_count(),
        });
    }
    if g.dim() != basis.col_count() {
        return Err(Error::DimensionMismatch {
            expected: basis.col_count(),
            found: g.dim(),
        });
    }
    let cols = basis.columns();
    if rank_of_vectors(&cols, n) != cols.len() {
        return Err(Error::InvalidInput(
            "basis of Y is linearly dependent".into(),
        ));
    }
    Ok(cols)
}

/// `g(Bz) ≤ p(Bz)` for all `z`: one homogeneous LP in `(z, s)`,
/// `max g·z - s` with `s ≥ cᵢ·Bz`. A positive direction is returned as the
/// violating point `Bz` of `Y`.
pub fn check_domination(
    p: &SublinearFunc,
    basis: &QMatrix,
    g: &QVector,
) -> Result<Option<QVector>> {
    let cols = validate(p, basis, g)?;
    let d = cols.len();
    if d == 0 {
        return Ok(None);
    }
    let mut obj = g.clone();
    obj.push(-Rational::one());
    let mut lp = LpProblem::new(obj, Sense::Max);
    for c in p.pieces() {
        let mut row: QVector = cols.iter().map(|b| c.dot(b)).collect();
        row.push(-Rational::one());
        lp.push(LpConstraint::le(row, Rational::zero()));
    }
    let r = solve_lp(&lp)?;
    match r.status {
        LpStatus::Optimal if !r.optimum.as_ref().unwrap().is_positive() => Ok(None),
        LpStatus::Infeasible => unreachable!("z = 0 is feasible"),
        _ => {
            let z = match r.ray {
                Some(ray) => ray,
                None => r.witness.unwrap(),
            };
            let y = (0..d).fold(QVector::zeros(p.dim()), |acc, j| {
                acc.add_scaled(&z[j], &cols[j])
            });
            Ok(Some(y))
        }
    }
}

/// `f∘B = g` exactly and `f ∈ conv(pieces)` (equivalently `f ≤ p`).
pub fn extension_certified(
    p: &SublinearFunc,
    basis: &QMatrix,
    g: &QVector,
    f: &Functional,
) -> Result<bool> {
    let cols = validate(p, basis, g)?;
    if f.dim() != p.dim() {
        return Ok(false);
    }
    if cols.iter().zip(g.iter()).any(|(b, gj)| f.eval(b) != *gj) {
        return Ok(false);
    }
    in_hull(&f.coeffs, p.pieces(), &[])
}

fn one_sided_bound(
    p: &SublinearFunc,
    w: &[QVector],
    gw: &QVector,
    v: &QVector,
    upper: bool,
) -> Result<Rational> {
    // lower: sup_z g(Wz) - p(Wz - v); upper: inf_z p(Wz + v) - g(Wz),
    // i.e. minus sup_z g(Wz) - p(Wz + v).
    let r = w.len();
    let mut obj = gw.clone();
    obj.push(-Rational::one());
    let mut lp = LpProblem::new(obj, Sense::Max);
    for c in p.pieces() {
        let mut row: QVector = w.iter().map(|b| c.dot(b)).collect();
        row.push(-Rational::one());
        let cv = c.dot(v);
        lp.push(LpConstraint::le(row, if upper { -cv } else { cv }));
    }
    let res = solve_lp(&lp)?;
    let val = match res.status {
        LpStatus::Optimal => res.optimum.unwrap(),
        _ => unreachable!("two-sided estimate bounds both sides (dim W = {r})"),
    };
    Ok(if upper { -val } else { val })
}

/// Extends `g` from `Y = range(B)` to all of ℚⁿ below `p`, one
/// complementary standard direction at a time, taking the midpoint of the
/// admissible interval for each new value.
pub fn hahn_banach_extend(p: &SublinearFunc, basis: &QMatrix, g: &QVector) -> Result<Functional> {
    let cols = validate(p, basis, g)?;
    if let Some(witness) = check_domination(p, basis, g)? {
        return Err(Error::DominationViolated { witness });
    }
    let n = p.dim();
    let mut w = cols.clone();
    let mut vals = g.clone();
    for v in complement_basis(&cols, n) {
        let lo = one_sided_bound(p, &w, &vals, &v, false)?;
        let hi = one_sided_bound(p, &w, &vals, &v, true)?;
        debug_assert!(lo <= hi);
        let mid = (lo + hi) / Rational::from_integer(2);
        w.push(v);
        vals.push(mid);
    }
    solve_basis(&w, &vals, n)
}

fn solve_basis(w: &[QVector], vals: &QVector, n: usize) -> Result<Functional> {
    let wt = QMatrix::with_cols(w.to_vec(), n)?;
    match solve_linear_system(&wt, vals)? {
        Some(f) => Ok(Functional::new(f)),
        None => Err(Error::InvalidInput("extension basis is singular".into())),
    }
}

/// Extension via separation: with `ℓ` the first piece, shift to
/// `p' = p - ℓ ≥ 0` and `g' = g - ℓ|Y`, separate `y₀` (`g'(y₀) = 1`) from
/// `Λ = {p' < 1} + ker(g'|Y)`, rescale to `f'(y₀) = 1`, and return `f' + ℓ`.
pub fn hahn_banach_via_separation(
    p: &SublinearFunc,
    basis: &QMatrix,
    g: &QVector,
) -> Result<Functional> {
    let cols = validate(p, basis, g)?;
    if g.is_zero() {
        return Err(Error::PreconditionUnmet("g vanishes on Y".into()));
    }
    if let Some(witness) = check_domination(p, basis, g)? {
        return Err(Error::DominationViolated { witness });
    }
    let ell = p.pieces()[0].clone();
    let shifted = SublinearFunc::new(p.pieces().iter().map(|c| c.sub(&ell)).collect())?;
    let g_shift: QVector = cols
        .iter()
        .zip(g.iter())
        .map(|(b, gj)| gj - ell.dot(b))
        .collect();
    if g_shift.is_zero() {
        return Ok(Functional::new(ell));
    }
    let f = separate_from_kernel(&shifted, &cols, &g_shift)?;
    Ok(Functional::new(f.coeffs.add(&ell)))
}

/// The unshifted construction on `(p, g)` directly; requires `p ≥ 0`
/// for the result to stay below `p`.
fn separate_from_kernel(p: &SublinearFunc, cols: &[QVector], g: &QVector) -> Result<Functional> {
    let n = p.dim();
    let j = g.iter().position(|x| !x.is_zero()).expect("g nonzero");
    let y0 = cols[j].scale(&g[j].recip());
    let gm = QMatrix::with_cols(vec![g.clone()], g.dim())?;
    let ker: Vec<QVector> = kernel(&gm)
        .iter()
        .map(|k| (0..cols.len()).fold(QVector::zeros(n), |acc, i| acc.add_scaled(&k[i], &cols[i])))
        .collect();
    let omega = crate::polyhedra::h_to_v(&sublevel_open(p).closure())?;
    let mut lines = Vec::new();
    for k in &ker {
        lines.push(k.clone());
        lines.push(k.neg());
    }
    let sub = VPolyhedron::new(n, vec![QVector::zeros(n)], lines)?;
    let lambda_closure = minkowski_sum(&omega, &sub)?.to_h();
    let lambda: HPolyhedron = lambda_closure.strict_version();
    let sep = separate_point(&lambda, &y0)?;
    let r = match sep {
        SeparationOutcome::Separated(r) => r,
        SeparationOutcome::Inseparable => unreachable!("y0 lies outside Λ when g ≤ p"),
    };
    let h = r.functional.coeffs;
    let hy = h.dot(&y0);
    debug_assert!(hy.is_positive());
    Ok(Functional::new(h.scale(&hy.recip())))
}
