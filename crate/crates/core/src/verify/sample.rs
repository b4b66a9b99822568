use crate::arith::{QVector, Rational};
use crate::error::Result;
use crate::oracle::Gen;
use crate::polyhedra::{h_to_v, HPolyhedron};

fn push_unique(out: &mut Vec<QVector>, p: QVector) {
    if !out.contains(&p) {
        out.push(p);
    }
}

/// A point well inside the closure, or any member when the set is thin.
pub fn inner_point(s: &HPolyhedron) -> Result<Option<QVector>> {
    match s.closure().interior_point()? {
        Some(p) => Ok(Some(p)),
        None => s.closure().relative_point(),
    }
}

/// `c + t*·d` with `t*` the exit time of the ray from `c` through the closure.
pub fn exit_point(s: &HPolyhedron, c: &QVector, d: &QVector) -> Option<QVector> {
    let mut best: Option<Rational> = None;
    for r in s.constraints() {
        let rate = r.a.dot(d);
        if rate.is_positive() {
            let t = (&r.b - &r.a.dot(c)) / rate;
            if best.as_ref().is_none_or(|b| t < *b) {
                best = Some(t);
            }
        }
    }
    best.map(|t| c.add(&d.scale(&t)))
}

/// Points where random rays from an inner point leave the closure.
pub fn boundary_points(g: &mut Gen, s: &HPolyhedron, k: usize) -> Result<Vec<QVector>> {
    let mut out = Vec::new();
    let Some(c) = inner_point(s)? else {
        return Ok(out);
    };
    for _ in 0..4 * k {
        if out.len() >= k {
            break;
        }
        let d = g.nonzero_int_vec(s.dim());
        if let Some(p) = exit_point(s, &c, &d) {
            push_unique(&mut out, p);
        }
    }
    Ok(out)
}

/// Up to `k` vertices of the closure, in canonical order.
pub fn vertices(s: &HPolyhedron, k: usize) -> Result<Vec<QVector>> {
    Ok(h_to_v(&s.closure())?
        .vertices()
        .iter()
        .take(k)
        .cloned()
        .collect())
}

/// A mix of inner, vertex, boundary and free points, for membership probes.
pub fn probe_points(g: &mut Gen, s: &HPolyhedron) -> Result<Vec<QVector>> {
    let n = s.dim();
    let mut out = Vec::new();
    if let Some(c) = inner_point(s)? {
        push_unique(&mut out, c);
    }
    for v in vertices(s, 3)? {
        push_unique(&mut out, v);
    }
    for p in boundary_points(g, s, 2)? {
        push_unique(&mut out, p);
    }
    for _ in 0..3 {
        push_unique(&mut out, g.point(n, 3));
    }
    Ok(out)
}

/// Members of `s`: inner point, contained vertices and exit points, and
/// midpoints towards them.
pub fn members(g: &mut Gen, s: &HPolyhedron) -> Result<Vec<QVector>> {
    let mut cands = Vec::new();
    let inner = inner_point(s)?;
    if let Some(c) = &inner {
        cands.push(c.clone());
    }
    cands.extend(vertices(s, 3)?);
    cands.extend(boundary_points(g, s, 2)?);
    if let Some(c) = &inner {
        let extra: Vec<QVector> = cands
            .iter()
            .skip(1)
            .map(|p| p.add(c).scale(&Rational::new(1, 2)))
            .collect();
        cands.extend(extra);
    }
    let mut out = Vec::new();
    for p in cands {
        if s.contains_point(&p)? {
            push_unique(&mut out, p);
        }
    }
    Ok(out)
}
