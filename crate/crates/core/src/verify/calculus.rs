use super::sample::{boundary_points, inner_point, members, probe_points, vertices};
use super::sets::{randomly_strict, thin};
use super::Ctx;
use crate::arith::{QMatrix, QVector, Rational};
use crate::convex::{core_of, is_normal_definitional, normal_cone, NormalCone};
use crate::error::{Error, Result};
use crate::function::{
    adjoint_image, argmin_set, check_subgradient_definitional, evaluate, func_sum,
    marginal_function, marginal_qualified, marginal_subdifferential, precompose_linear,
    subdifferential, AffinePiece, ExtValue, PolyhedralFunction,
};
use crate::oracle::{check_core_definitional, Gen};
use crate::polyhedra::{closed_eq, includes, strict_point, Cone, Constraint, HPolyhedron};
use crate::setvalued::{
    chain_rule_rhs, closed_sum, coderivative, composition_middle, domain_of, map_compose, map_sum,
    sum_decompositions, value_at, SetValuedMap,
};

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).unwrap_or_default()
}

/// Members of `s` to use as base points: vertices first, then exit points,
/// then an inner point when nothing else is found.
fn base_points(g: &mut Gen, s: &HPolyhedron, k: usize) -> Result<Vec<QVector>> {
    let mut out = Vec::new();
    let mut cands = vertices(s, k)?;
    cands.extend(boundary_points(g, s, k)?);
    for p in cands {
        if out.len() < k && !out.contains(&p) && s.contains_point(&p)? {
            out.push(p);
        }
    }
    if out.is_empty() {
        if let Some(c) = inner_point(s)? {
            out.push(c);
        }
    }
    Ok(out)
}

/// Vertices of a closed set, or one member when it has none.
fn extreme_or_any(s: &HPolyhedron, k: usize) -> Result<Vec<QVector>> {
    let v = vertices(s, k)?;
    if !v.is_empty() {
        return Ok(v);
    }
    Ok(s.relative_point()?.into_iter().collect())
}

/// `x ↦ {b·x + e}`: a map whose graph is a hyperplane (empty core).
fn affine_map(g: &mut Gen, n: usize) -> SetValuedMap {
    let mut a = g.int_vec(n);
    a.push(-Rational::one());
    let e = Rational::from_integer(g.int(-1, 1));
    SetValuedMap::new(n, 1, HPolyhedron::hyperplane(a, -e)).expect("graph dims")
}

fn nonzero_scalar(g: &mut Gen) -> QVector {
    let v = *g.pick(&[-2i64, -1, 1, 2]);
    QVector::from_ints(&[v])
}

pub(super) fn graph_core(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let cx = g.small_point(dim);
    let cy = g.small_point(1);
    let mut f = g.map_around(&cx, &cy);
    if g.chance(1, 3) {
        f = SetValuedMap::new(dim, 1, randomly_strict(g, f.graph()))?;
    }
    ctx.record("F", &f);
    let core_g = core_of(f.graph())?;
    let dom_core = core_of(&domain_of(&f)?)?;
    let mut points = probe_points(g, f.graph())?;
    points.extend(members(g, f.graph())?);
    for p in points {
        let x = p.slice(0..dim);
        let y = p.slice(dim..dim + 1);
        let lhs = core_g.contains_point(&p)?;
        let rhs =
            dom_core.contains_point(&x)? && core_of(&value_at(&f, &x)?)?.contains_point(&y)?;
        let def = check_core_definitional(f.graph(), &p)?;
        ctx.check(lhs == rhs && lhs == def, || {
            format!("at {p}: core(gph) {lhs}, product of cores {rhs}, definitional {def}")
        });
    }
    Ok(())
}

pub(super) fn epigraph_core(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let omega = g.set(dim);
    let piece = AffinePiece {
        g: g.int_vec(dim),
        c: Rational::from_integer(g.int(-2, 2)),
    };
    let psi = PolyhedralFunction::max_affine(dim, std::slice::from_ref(&piece), Some(&omega))?;
    ctx.record("Omega", &omega);
    ctx.record("piece", &piece);
    let core_e = core_of(psi.epigraph())?;
    let core_o = core_of(&omega)?;
    let mut xs = probe_points(g, &omega)?;
    xs.extend(members(g, &omega)?);
    for x in xs {
        let val = evaluate(&psi, &x)?;
        let lambdas: Vec<Rational> = match &val {
            ExtValue::Finite(v) => [(-1, 1), (0, 1), (1, 2), (1, 1)]
                .iter()
                .map(|&(n, d)| v + &Rational::new(n, d))
                .collect(),
            _ => vec![Rational::zero(), Rational::from_integer(3)],
        };
        for l in lambdas {
            let mut p = x.clone();
            p.push(l.clone());
            let lhs = core_e.contains_point(&p)?;
            let above = matches!(&val, ExtValue::Finite(v) if l > *v);
            let rhs = core_o.contains_point(&x)? && above;
            let def = check_core_definitional(psi.epigraph(), &p)?;
            ctx.check(lhs == rhs && lhs == def, || {
                format!("at ({x}, {l}): core(epi) {lhs}, formula {rhs}, definitional {def}")
            });
        }
    }
    Ok(())
}

fn cone_at(s: &HPolyhedron, x: &QVector) -> Result<Option<Cone>> {
    Ok(match normal_cone(s, x)? {
        NormalCone::Cone { cone } => Some(cone),
        NormalCone::NotAMember => None,
    })
}

fn cone_sum_at(sets: &[HPolyhedron], x: &QVector) -> Result<Option<Cone>> {
    let mut acc = Cone::trivial(x.dim());
    for s in sets {
        match cone_at(s, x)? {
            Some(c) => acc = acc.sum(&c)?,
            None => return Ok(None),
        }
    }
    Ok(Some(acc))
}

pub(super) fn intersection_rule(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let m = if g.chance(1, 2) { 2 } else { 3 };
    let c = g.small_point(dim);
    let sets: Vec<HPolyhedron> = (0..m).map(|_| g.set_with_center(&c)).collect();
    ctx.record("sets", &sets);
    ctx.record("shared", &c);
    for s in &sets {
        ctx.check(check_core_definitional(s, &c)?, || {
            "shared point not in every core".into()
        });
    }
    let mut x = sets[0].clone();
    for s in &sets[1..] {
        x = x.intersect(s)?;
    }
    let xbars = base_points(g, &x, 4)?;
    ctx.record("xbars", &xbars);
    for xb in &xbars {
        let (Some(lhs), Some(rhs)) = (cone_at(&x, xb)?, cone_sum_at(&sets, xb)?) else {
            ctx.check(false, || format!("{xb} reported outside a set"));
            continue;
        };
        ctx.check(lhs.set_eq(&rhs)?, || {
            format!("N(∩Ω) = {} but ΣN(Ωᵢ) = {} at {xb}", json(&lhs), json(&rhs))
        });
        for gen in lhs.generators() {
            ctx.check(is_normal_definitional(&x, xb, gen)?, || {
                format!("generator {gen} fails the normal LP")
            });
        }
        for _ in 0..3 {
            let f = g.int_vec(dim);
            let a = lhs.contains(&f)?;
            let b = is_normal_definitional(&x, xb, &f)?;
            ctx.check(a == b, || {
                format!("cone membership {a} vs normal LP {b} for {f}")
            });
        }
    }
    // The inclusion ⊇ on a pair touching along a face.
    let f = g.nonzero_int_vec(dim);
    if let Some(Some((v, _))) = sets[0].maximize(&f)? {
        let touching = HPolyhedron::closed(dim, vec![Constraint::ge(f.clone(), v)])?;
        let pair = vec![sets[0].clone(), touching];
        let face = pair[0].intersect(&pair[1])?;
        ctx.record("unqualified", &pair);
        for xb in extreme_or_any(&face, 3)? {
            if let (Some(lhs), Some(rhs)) = (cone_at(&face, &xb)?, cone_sum_at(&pair, &xb)?) {
                let mut ok = true;
                for gen in rhs.generators() {
                    ok &= lhs.contains(gen)?;
                }
                ctx.unqualified_check(ok, || format!("ΣN(Ωᵢ) ⊄ N(∩Ω) at {xb}"));
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sum_rule_at(
    ctx: &mut Ctx,
    f1: &SetValuedMap,
    f2: &SetValuedMap,
    sum: &SetValuedMap,
    xb: &QVector,
    yb: &QVector,
    g: &QVector,
    qualified: bool,
) -> Result<()> {
    let Some(lhs) = coderivative(sum, xb, yb, g)? else {
        ctx.check(false, || format!("({xb}, {yb}) not in gph(F1+F2)"));
        return Ok(());
    };
    let decomps = sum_decompositions(f1, f2, xb, yb)?;
    let pairs = extreme_or_any(&decomps, 3)?;
    ctx.check(!pairs.is_empty(), || {
        format!("no decomposition at ({xb}, {yb})")
    });
    let mut first: Option<HPolyhedron> = None;
    for pair in pairs {
        let m = yb.dim();
        let (y1, y2) = (pair.slice(0..m), pair.slice(m..2 * m));
        let (Some(r1), Some(r2)) = (coderivative(f1, xb, &y1, g)?, coderivative(f2, xb, &y2, g)?)
        else {
            ctx.check(false, || {
                format!("decomposition ({y1}, {y2}) outside a graph")
            });
            continue;
        };
        let rhs = closed_sum(&r1, &r2)?;
        if qualified {
            ctx.check(closed_eq(&lhs, &rhs)?, || {
                format!(
                    "D*(F1+F2) = {} but sum = {} at x={xb}, y1={y1}, y2={y2}, g={g}",
                    json(&lhs),
                    json(&rhs)
                )
            });
            if let Some(prev) = &first {
                ctx.check(closed_eq(prev, &rhs)?, || {
                    format!("right side depends on the decomposition ({y1}, {y2})")
                });
            } else {
                first = Some(rhs);
            }
        } else {
            ctx.unqualified_check(includes(&lhs, &rhs)?, || {
                format!("sum ⊄ D*(F1+F2) at x={xb}, y1={y1}, y2={y2}, g={g}")
            });
        }
    }
    Ok(())
}

pub(super) fn coderivative_sum_rule(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let cx = g.small_point(dim);
    let (c1, c2) = (g.small_point(1), g.small_point(1));
    let f1 = g.map_around(&cx, &c1);
    let f2 = g.map_around(&cx, &c2);
    ctx.record("F1", &f1);
    ctx.record("F2", &f2);
    let qualified = check_core_definitional(f1.graph(), &cx.concat(&c1))?
        && check_core_definitional(f2.graph(), &cx.concat(&c2))?;
    if !qualified {
        ctx.unmet("graphical core qualification fails");
        return Ok(());
    }
    let sum = map_sum(&f1, &f2)?;
    let pts = base_points(g, sum.graph(), 3)?;
    for p in &pts {
        let (xb, yb) = (p.slice(0..dim), p.slice(dim..dim + 1));
        for gv in [nonzero_scalar(g), QVector::zeros(1)] {
            sum_rule_at(ctx, &f1, &f2, &sum, &xb, &yb, &gv, true)?;
        }
    }
    let f3 = affine_map(g, dim);
    ctx.record("F2_unqualified", &f3);
    let sum3 = map_sum(&f1, &f3)?;
    for p in base_points(g, sum3.graph(), 2)? {
        let (xb, yb) = (p.slice(0..dim), p.slice(dim..dim + 1));
        let gv = nonzero_scalar(g);
        sum_rule_at(ctx, &f1, &f3, &sum3, &xb, &yb, &gv, false)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn chain_rule_at(
    ctx: &mut Ctx,
    gm: &SetValuedMap,
    fm: &SetValuedMap,
    comp: &SetValuedMap,
    xb: &QVector,
    zb: &QVector,
    h: &QVector,
    qualified: bool,
) -> Result<()> {
    let Some(lhs) = coderivative(comp, xb, zb, h)? else {
        ctx.check(false, || format!("({xb}, {zb}) not in gph(G∘F)"));
        return Ok(());
    };
    let mid = composition_middle(gm, fm, xb, zb)?;
    let ys = extreme_or_any(&mid, 3)?;
    ctx.check(!ys.is_empty(), || format!("M({xb}, {zb}) is empty"));
    let mut first: Option<HPolyhedron> = None;
    for yb in ys {
        let Some(rhs) = chain_rule_rhs(gm, fm, xb, &yb, zb, h)? else {
            ctx.check(false, || format!("ȳ = {yb} outside a graph"));
            continue;
        };
        if qualified {
            ctx.check(closed_eq(&lhs, &rhs)?, || {
                format!(
                    "D*(G∘F) = {} but D*F∘D*G = {} at x={xb}, y={yb}, z={zb}, h={h}",
                    json(&lhs),
                    json(&rhs)
                )
            });
            if let Some(prev) = &first {
                ctx.check(closed_eq(prev, &rhs)?, || {
                    format!("right side depends on ȳ = {yb}")
                });
            } else {
                first = Some(rhs);
            }
        } else {
            ctx.unqualified_check(includes(&lhs, &rhs)?, || {
                format!("D*F∘D*G ⊄ D*(G∘F) at x={xb}, y={yb}, z={zb}, h={h}")
            });
        }
    }
    Ok(())
}

pub(super) fn coderivative_chain_rule(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let cx = g.small_point(dim);
    let cy = g.small_point(1);
    let cz = g.small_point(1);
    let fm = g.map_around(&cx, &cy);
    let gm = g.map_around(&cy, &cz);
    ctx.record("F", &fm);
    ctx.record("G", &gm);
    let qualified = check_core_definitional(fm.graph(), &cx.concat(&cy))?
        && check_core_definitional(gm.graph(), &cy.concat(&cz))?;
    if !qualified {
        ctx.unmet("graphical core qualification fails");
        return Ok(());
    }
    let comp = map_compose(&gm, &fm)?;
    for p in base_points(g, comp.graph(), 3)? {
        let (xb, zb) = (p.slice(0..dim), p.slice(dim..dim + 1));
        for h in [nonzero_scalar(g), QVector::zeros(1)] {
            chain_rule_at(ctx, &gm, &fm, &comp, &xb, &zb, &h, true)?;
        }
    }
    let fa = affine_map(g, dim);
    ctx.record("F_unqualified", &fa);
    let comp2 = map_compose(&gm, &fa)?;
    for p in base_points(g, comp2.graph(), 2)? {
        let (xb, zb) = (p.slice(0..dim), p.slice(dim..dim + 1));
        let h = nonzero_scalar(g);
        chain_rule_at(ctx, &gm, &fa, &comp2, &xb, &zb, &h, false)?;
    }
    Ok(())
}

/// Agreement of a computed subdifferential with the definitional LP on its
/// vertices and on random candidates.
fn subgradient_oracle(
    ctx: &mut Ctx,
    g: &mut Gen,
    phi: &PolyhedralFunction,
    xb: &QVector,
    set: &HPolyhedron,
) -> Result<()> {
    for v in vertices(set, 4)? {
        ctx.check(check_subgradient_definitional(phi, xb, &v)?, || {
            format!("vertex {v} of ∂φ({xb}) fails the LP test")
        });
    }
    for _ in 0..10 {
        let f = g.point(phi.dim(), 3);
        let a = check_subgradient_definitional(phi, xb, &f)?;
        let b = set.contains_point(&f)?;
        ctx.check(a == b, || {
            format!("LP test {a} vs ∂φ({xb}) membership {b} for {f}")
        });
    }
    Ok(())
}

fn epi_cores_meet(a: &PolyhedralFunction, b: &PolyhedralFunction) -> Result<bool> {
    let cons: Vec<Constraint> = a
        .epigraph()
        .constraints()
        .iter()
        .chain(b.epigraph().constraints())
        .map(|c| Constraint::lt(c.a.clone(), c.b.clone()))
        .collect();
    Ok(strict_point(a.dim() + 1, &cons, &[])?.is_some())
}

pub(super) fn subdifferential_sum_rule(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let c = g.small_point(dim);
    let p1 = g.function_around(&c);
    let p2 = g.function_around(&c);
    ctx.record("phi1", &p1);
    ctx.record("phi2", &p2);
    if !epi_cores_meet(&p1, &p2)? {
        ctx.unmet("epigraph cores do not meet");
        return Ok(());
    }
    let sum = func_sum(&p1, &p2)?;
    let common = p1.domain()?.intersect(&p2.domain()?)?;
    let mut xs = base_points(g, &common, 3)?;
    if let Some(ci) = inner_point(&common)? {
        if !xs.contains(&ci) {
            xs.push(ci);
        }
    }
    for xb in &xs {
        let lhs = subdifferential(&sum, xb)?.set;
        let rhs = closed_sum(
            &subdifferential(&p1, xb)?.set,
            &subdifferential(&p2, xb)?.set,
        )?;
        ctx.check(closed_eq(&lhs, &rhs)?, || {
            format!(
                "∂(φ1+φ2) = {} but ∂φ1 ⊕ ∂φ2 = {} at {xb}",
                json(&lhs),
                json(&rhs)
            )
        });
        subgradient_oracle(ctx, g, &sum, xb, &lhs)?;
    }
    // ⊇ with an indicator of a thin set (empty epigraph core).
    let wide = g.set_with_center(&c);
    let thin_dom = thin(g, &wide)?;
    let p3 = PolyhedralFunction::max_affine(dim, &g.affine_pieces(dim, 1), Some(&thin_dom))?;
    ctx.record("phi2_unqualified", &p3);
    let sum3 = func_sum(&p1, &p3)?;
    let common3 = p1.domain()?.intersect(&thin_dom)?;
    for xb in extreme_or_any(&common3, 2)? {
        let lhs = subdifferential(&sum3, &xb)?.set;
        let rhs = closed_sum(
            &subdifferential(&p1, &xb)?.set,
            &subdifferential(&p3, &xb)?.set,
        )?;
        ctx.unqualified_check(includes(&lhs, &rhs)?, || {
            format!("∂φ1 ⊕ ∂φ2 ⊄ ∂(φ1+φ2) at {xb}")
        });
    }
    Ok(())
}

pub(super) fn subdifferential_chain_rule(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let k = g.int(1, dim as i64) as usize;
    let rows: Vec<QVector> = (0..k).map(|_| g.int_vec(dim)).collect();
    let a = QMatrix::with_cols(rows, dim)?;
    let x0 = g.small_point(dim);
    let y0 = a.mul_vec(&x0)?;
    let phi = g.function_around(&y0);
    ctx.record("A", &a);
    ctx.record("phi", &phi);
    let dom = phi.domain()?;
    let range_meets_core = check_core_definitional(&dom, &y0)?;
    let epi_core = phi.epigraph().interior_point()?.is_some();
    if !(range_meets_core && epi_core) {
        ctx.unmet("range of A misses core(dom φ) or core(epi φ) is empty");
        return Ok(());
    }
    let comp = precompose_linear(&phi, &a)?;
    let mut xs = vec![x0];
    xs.extend(base_points(g, &comp.domain()?, 3)?);
    xs.dedup();
    for xb in &xs {
        let lhs = subdifferential(&comp, xb)?.set;
        let rhs = adjoint_image(&a, &subdifferential(&phi, &a.mul_vec(xb)?)?.set)?;
        ctx.check(closed_eq(&lhs, &rhs)?, || {
            format!("∂(φ∘A) = {} but A*∂φ = {} at {xb}", json(&lhs), json(&rhs))
        });
        subgradient_oracle(ctx, g, &comp, xb, &lhs)?;
    }
    Ok(())
}

fn coercive_function(g: &mut Gen, n: usize, center: &QVector) -> Result<PolyhedralFunction> {
    let total = n + 1;
    let k = g.int(0, 2) as usize;
    let mut pieces = g.affine_pieces(total, k);
    for s in [1, -1] {
        let mut gv = g.int_vec(n);
        gv.push(Rational::from_integer(s * g.int(1, 2)));
        pieces.push(AffinePiece {
            g: gv,
            c: Rational::from_integer(g.int(-2, 2)),
        });
    }
    let domain = if g.chance(1, 2) {
        Some(g.set_with_center(center))
    } else {
        None
    };
    PolyhedralFunction::max_affine(total, &pieces, domain.as_ref())
}

pub(super) fn marginal_rule(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let mut found = None;
    for _ in 0..8 {
        let cx = g.small_point(dim);
        let cy = g.small_point(1);
        let f = g.map_around(&cx, &cy);
        let phi = coercive_function(g, dim, &cx.concat(&cy))?;
        match marginal_function(&phi, &f) {
            Ok(mu) => {
                found = Some((phi, f, mu));
                break;
            }
            Err(Error::UnboundedBelow) => continue,
            Err(e) => return Err(e),
        }
    }
    let Some((phi, f, mu)) = found else {
        ctx.unmet("no instance with μ > -∞");
        return Ok(());
    };
    ctx.record("phi", &phi);
    ctx.record("F", &f);
    if !marginal_qualified(&phi, &f)? {
        ctx.unmet("core(dom φ) ∩ core(gph F) is empty");
        return Ok(());
    }
    let dom = mu.domain()?;
    let mut xs = base_points(g, &dom, 3)?;
    if let Some(c) = inner_point(&dom)? {
        if !xs.contains(&c) {
            xs.push(c);
        }
    }
    for xb in &xs {
        let direct = subdifferential(&mu, xb)?.set;
        subgradient_oracle(ctx, g, &mu, xb, &direct)?;
        let s = argmin_set(&phi, &f, xb)?;
        let ys = extreme_or_any(&s, 3)?;
        ctx.check(!ys.is_empty(), || format!("argmin set empty at {xb}"));
        for yb in ys {
            let formula = marginal_subdifferential(&phi, &f, xb, &yb)?;
            ctx.check(closed_eq(&formula, &direct)?, || {
                format!(
                    "union formula {} but ∂μ = {} at x={xb}, y={yb}",
                    json(&formula),
                    json(&direct)
                )
            });
        }
    }
    Ok(())
}
