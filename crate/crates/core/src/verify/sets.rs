use super::sample::{exit_point, inner_point, members, probe_points, vertices};
use super::Ctx;
use crate::arith::{QVector, Rational};
use crate::convex::{
    core_of, gauge_eval, is_nonconstant_on, lin_of, properly_separate, separate_point,
    strict_on_first, sublevel_open, SeparationOutcome, SeparationResult,
};
use crate::error::Result;
use crate::oracle::{check_core_definitional, Gen};
use crate::polyhedra::{
    affine_image, affine_image_h, closed_eq, difference, difference_h, h_to_v, minkowski_sum,
    minkowski_sum_h, open_eq, Constraint, HPolyhedron,
};

const LAMBDAS: [(i64, i64); 3] = [(1, 4), (1, 2), (3, 4)];

/// Marks each row strict with probability 1/3.
pub(super) fn randomly_strict(g: &mut Gen, s: &HPolyhedron) -> HPolyhedron {
    let cons: Vec<Constraint> = s
        .constraints()
        .iter()
        .map(|c| Constraint {
            strict: g.chance(1, 3),
            ..c.clone()
        })
        .collect();
    HPolyhedron::new(s.dim(), cons).expect("same rows")
}

/// `S ∩ {a·x = a·c}` through an inner point `c`: a set with empty core.
pub(super) fn thin(g: &mut Gen, s: &HPolyhedron) -> Result<HPolyhedron> {
    let c = inner_point(s)?.expect("nonempty set");
    let a = g.nonzero_int_vec(s.dim());
    let b = a.dot(&c);
    s.with_constraint(Constraint::le(a.clone(), b.clone()))?
        .with_constraint(Constraint::ge(a, b))
}

fn sup(s: &HPolyhedron, f: &QVector) -> Result<Option<Rational>> {
    Ok(match s.maximize(f)? {
        Some(Some((v, _))) => Some(v),
        _ => None,
    })
}

fn combo(a: &QVector, b: &QVector, (n, d): (i64, i64)) -> QVector {
    let l = Rational::new(n, d);
    a.scale(&l).add(&b.scale(&(Rational::one() - l)))
}

fn segments_stay_in_core(
    ctx: &mut Ctx,
    s: &HPolyhedron,
    bs: &[QVector],
    g: &mut Gen,
) -> Result<()> {
    let core = core_of(s)?;
    let as_ = members(g, &core)?;
    ctx.check(!as_.is_empty(), || "generated set has empty core".into());
    for a in &as_ {
        for b in bs {
            for l in LAMBDAS {
                let p = combo(a, b, l);
                let in_core = core.contains_point(&p)?;
                let definitional = check_core_definitional(s, &p)?;
                ctx.check(in_core && definitional, || {
                    format!("{}/{} a + rest b left the core: a={a}, b={b} (core_of {in_core}, definitional {definitional})", l.0, l.1)
                });
            }
        }
    }
    Ok(())
}

pub(super) fn segment_property(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let base = g.set(dim);
    let s = if g.chance(1, 2) {
        randomly_strict(g, &base)
    } else {
        base
    };
    ctx.record("S", &s);
    let bs = members(g, &s)?;
    segments_stay_in_core(ctx, &s, &bs, g)
}

pub(super) fn interval_inclusion(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let base = g.set(dim);
    let s = if g.chance(1, 2) {
        base.strict_version()
    } else {
        randomly_strict(g, &base)
    };
    ctx.record("S", &s);
    let bs = members(g, &lin_of(&s)?)?;
    segments_stay_in_core(ctx, &s, &bs, g)
}

/// `x + δv ∈ S` for some `δ > 0`, with `δ` half the exit time along `v`.
fn one_sided_step(s: &HPolyhedron, x: &QVector, v: &QVector) -> Result<bool> {
    let step = match exit_point(s, x, v) {
        None => x.add(v),
        Some(p) => {
            if p == *x {
                return Ok(false);
            }
            p.add(x).scale(&Rational::new(1, 2))
        }
    };
    s.contains_point(&step)
}

pub(super) fn one_sided_criterion(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let base = g.set(dim);
    let s = if g.chance(1, 2) {
        randomly_strict(g, &base)
    } else {
        base
    };
    ctx.record("S", &s);
    let core = core_of(&s)?;
    let mut points = probe_points(g, &s)?;
    points.extend(vertices(&s, 4)?);
    for x in &points {
        let mut criterion = s.contains_point(x)?;
        for c in s.constraints() {
            if !criterion {
                break;
            }
            criterion = one_sided_step(&s, x, &c.a)? && one_sided_step(&s, x, &c.a.neg())?;
        }
        let in_core = core.contains_point(x)?;
        ctx.check(criterion == in_core, || {
            format!("one-sided criterion {criterion} but core membership {in_core} at {x}")
        });
    }
    Ok(())
}

pub(super) fn core_idempotent(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let base = g.set(dim);
    let s = match g.int(0, 2) {
        0 => base,
        1 => randomly_strict(g, &base),
        _ => thin(g, &base)?,
    };
    ctx.record("S", &s);
    let c1 = core_of(&s)?;
    let c2 = core_of(&c1)?;
    ctx.record("core", &c1);
    ctx.check(open_eq(&c1, &c2)?, || {
        format!(
            "core of core differs: {}",
            serde_json::to_string(&c2).unwrap()
        )
    });
    for x in probe_points(g, &s)? {
        let a = c1.contains_point(&x)?;
        let b = check_core_definitional(&s, &x)?;
        let c = c2.contains_point(&x)?;
        ctx.check(a == b && b == c, || {
            format!("membership at {x}: core {a}, definitional {b}, core∘core {c}")
        });
    }
    Ok(())
}

pub(super) fn open_shift(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let s = core_of(&g.set(dim))?;
    let t = g.polytope(dim);
    ctx.record("S", &s);
    ctx.record("T", &t);
    let sum = minkowski_sum_h(&s, &t)?;
    ctx.record("sum", &sum);
    ctx.check(open_eq(&core_of(&sum)?, &sum)?, || {
        "core(S ⊕ T) ≠ S ⊕ T".into()
    });
    let gen_sum = minkowski_sum(&h_to_v(&s.closure())?, &h_to_v(&t)?)?.to_h();
    ctx.check(closed_eq(&sum.closure(), &gen_sum)?, || {
        "projected sum disagrees with generator sum".into()
    });
    let tv = vertices(&t, 4)?;
    for a in members(g, &s)? {
        for v in &tv {
            let p = a.add(v);
            ctx.check(check_core_definitional(&sum, &p)?, || {
                format!("{p} = a + t is not absorbing in S ⊕ T")
            });
        }
    }
    Ok(())
}

pub(super) fn nonconstancy(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let s = g.set(dim);
    let f = g.nonzero_int_vec(dim);
    ctx.record("S", &s);
    ctx.record("f", &f);
    let hi = sup(&s, &f)?;
    let lo = sup(&s, &f.neg())?.map(|v| -v);
    if let (Some(hi), Some(lo)) = (&hi, &lo) {
        ctx.check(hi > lo, || format!("max {hi} ≤ min {lo}"));
    }
    let c = inner_point(&s)?.expect("full-dimensional set");
    let fc = f.dot(&c);
    for d in [f.clone(), f.neg()] {
        if let Some(p) = exit_point(&s, &c, &d) {
            let moved = f.dot(&p) != fc;
            ctx.check(moved, || format!("f constant along {d} from {c}"));
        }
    }
    ctx.check(is_nonconstant_on(&s, &f)?, || {
        "is_nonconstant_on reported constant".into()
    });
    Ok(())
}

pub(super) fn product_rule(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let (d1, d2) = if dim == 1 { (1, 1) } else { (dim - 1, 1) };
    let mut s1 = g.set(d1);
    let mut s2 = g.set(d2);
    match g.int(0, 3) {
        0 if d1 > 1 => s1 = thin(g, &s1)?,
        1 => s2 = randomly_strict(g, &s2),
        2 => s1 = randomly_strict(g, &s1),
        _ => {}
    }
    ctx.record("S1", &s1);
    ctx.record("S2", &s2);
    let prod = s1.product(&s2);
    let lhs = core_of(&prod)?;
    let rhs = core_of(&s1)?.product(&core_of(&s2)?);
    ctx.check(open_eq(&lhs, &rhs)?, || {
        format!(
            "core of product {} vs product of cores {}",
            serde_json::to_string(&lhs).unwrap(),
            serde_json::to_string(&rhs).unwrap()
        )
    });
    for x in probe_points(g, &prod)? {
        let a = lhs.contains_point(&x)?;
        let b = check_core_definitional(&prod, &x)?;
        ctx.check(a == b, || {
            format!("core(S1×S2) membership {a}, definitional {b} at {x}")
        });
    }
    Ok(())
}

/// `f ≠ 0`, `f ≤ level` on `S`, `f(x₀) ≥ level`, `witness_lo ∈ S`,
/// `witness_hi = x₀`, `f(lo) < f(hi)`.
fn check_point_separation(
    ctx: &mut Ctx,
    s: &HPolyhedron,
    x0: &QVector,
    r: &SeparationResult,
) -> Result<()> {
    let f = &r.functional.coeffs;
    ctx.check(!f.is_zero(), || "zero functional".into());
    match sup(&s.closure(), f)? {
        Some(v) => ctx.check(v <= r.level, || {
            format!("sup_S f = {v} above level {}", r.level)
        }),
        None => ctx.check(false, || "f unbounded above on S".into()),
    }
    ctx.check(f.dot(x0) >= r.level, || {
        format!("f(x0) = {} below level {}", f.dot(x0), r.level)
    });
    ctx.check(s.contains_point(&r.witness_lo)?, || {
        format!("witness_lo {} outside S", r.witness_lo)
    });
    ctx.check(r.witness_hi == *x0, || "witness_hi is not x0".into());
    ctx.check(f.dot(&r.witness_lo) < f.dot(&r.witness_hi), || {
        "witnesses do not certify properness".into()
    });
    Ok(())
}

pub(super) fn separation_is_proper(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let base = g.set(dim);
    let s = if g.chance(1, 2) {
        randomly_strict(g, &base)
    } else {
        base
    };
    ctx.record("S", &s);
    let closure_rows = s.closure().remove_redundant()?;
    for x0 in probe_points(g, &s)? {
        match separate_point(&s, &x0)? {
            SeparationOutcome::Separated(r) => check_point_separation(ctx, &s, &x0, &r)?,
            SeparationOutcome::Inseparable => ctx.check(check_core_definitional(&s, &x0)?, || {
                format!("inseparable at non-core {x0}")
            }),
        }
        for c in closure_rows.constraints() {
            if c.a.dot(&x0) >= c.b {
                ctx.check(is_nonconstant_on(&s, &c.a)?, || {
                    format!("separating {} is constant on S", c.a)
                });
            }
        }
    }
    Ok(())
}

pub(super) fn point_separation(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let s = g.set(dim);
    let open = core_of(&s)?;
    ctx.record("S", &s);
    let mut seen = 0;
    for x0 in probe_points(g, &s)? {
        if open.contains_point(&x0)? {
            continue;
        }
        seen += 1;
        match separate_point(&open, &x0)? {
            SeparationOutcome::Separated(r) => {
                check_point_separation(ctx, &open, &x0, &r)?;
                ctx.check(strict_on_first(&open, &r)?, || {
                    format!("not strict on core(S) at {x0}")
                });
            }
            SeparationOutcome::Inseparable => ctx.check(false, || {
                format!("x0 = {x0} ∉ core(S) reported inseparable")
            }),
        }
        if !s.contains_point(&x0)? {
            match separate_point(&s, &x0)? {
                SeparationOutcome::Separated(r) => check_point_separation(ctx, &s, &x0, &r)?,
                SeparationOutcome::Inseparable => {
                    ctx.check(false, || format!("exterior {x0} reported inseparable"))
                }
            }
        }
    }
    ctx.check(seen > 0, || "no probe outside the core".into());
    Ok(())
}

pub(super) fn separation_trichotomy(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let base = g.set(dim);
    let s = if g.chance(1, 2) {
        randomly_strict(g, &base)
    } else {
        base
    };
    ctx.record("S", &s);
    let mut points = probe_points(g, &s)?;
    points.extend(members(g, &s)?);
    for x0 in points {
        let in_core = check_core_definitional(&s, &x0)?;
        match separate_point(&s, &x0)? {
            SeparationOutcome::Separated(r) => {
                ctx.check(!in_core, || format!("separated a core point {x0}"));
                check_point_separation(ctx, &s, &x0, &r)?;
            }
            SeparationOutcome::Inseparable => {
                ctx.check(in_core, || format!("inseparable at non-core {x0}"))
            }
        }
    }
    Ok(())
}

pub(super) fn gauge_round_trip(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let k = g.int(1, 3) as usize;
    let p = g.sublinear(dim, k, true);
    ctx.record("p", &p);
    let omega = sublevel_open(&p);
    let closed = lin_of(&omega)?;
    let mut xs: Vec<QVector> = (0..4).map(|_| g.point(dim, 3)).collect();
    xs.push(QVector::zeros(dim));
    for x in &xs {
        let v = gauge_eval(&omega, x)?;
        ctx.check(v == p.eval(x), || {
            format!("gauge {v} ≠ p(x) = {} at {x}", p.eval(x))
        });
        let w = gauge_eval(&closed, x)?;
        ctx.check(w == v, || format!("closure gauge {w} ≠ {v} at {x}"));
    }
    // gauge laws on a second absorbing set
    let s = g.set_with_center(&QVector::zeros(dim));
    ctx.record("S", &s);
    for (i, x) in xs.iter().enumerate() {
        let px = gauge_eval(&s, x)?;
        for (n, d) in [(0, 1), (1, 1), (2, 1), (1, 3)] {
            let l = Rational::new(n, d);
            let lhs = gauge_eval(&s, &x.scale(&l))?;
            ctx.check(lhs == &l * &px, || {
                format!("p({l}·x) = {lhs} ≠ {l}·{px} at {x}")
            });
        }
        let y = &xs[(i + 1) % xs.len()];
        let sum = gauge_eval(&s, &x.add(y))?;
        let bound = &px + &gauge_eval(&s, y)?;
        ctx.check(sum <= bound, || format!("subadditivity fails at {x}, {y}"));
    }
    Ok(())
}

pub(super) fn surjective_image(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let s = g.set(dim);
    let k = g.int(1, dim as i64) as usize;
    let a = g.full_rank_matrix(k, dim);
    let c = g.small_point(k);
    ctx.record("S", &s);
    ctx.record("A", &a);
    ctx.record("shift", &c);
    let lhs = affine_image_h(&core_of(&s)?, &a, &c)?;
    let img = affine_image(&s, &a, &c)?.to_h();
    let rhs = core_of(&img)?;
    ctx.check(open_eq(&lhs, &rhs)?, || {
        format!(
            "A(core S) = {} but core(A S) = {}",
            serde_json::to_string(&lhs).unwrap(),
            serde_json::to_string(&rhs).unwrap()
        )
    });
    for x in members(g, &core_of(&s)?)? {
        let y = a.mul_vec(&x)?.add(&c);
        ctx.check(check_core_definitional(&img, &y)?, || {
            format!("image {y} of core point {x} not in core(A S)")
        });
    }
    Ok(())
}

pub(super) fn difference_rule(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let s1 = g.set(dim);
    let s2 = g.set(dim);
    ctx.record("S1", &s1);
    ctx.record("S2", &s2);
    let lhs = core_of(&difference(&h_to_v(&s1)?, &h_to_v(&s2)?)?.to_h())?;
    let rhs = difference_h(&core_of(&s1)?, &core_of(&s2)?)?;
    ctx.check(open_eq(&lhs, &rhs)?, || {
        format!(
            "core(S1 ⊖ S2) = {} but core S1 ⊖ core S2 = {}",
            serde_json::to_string(&lhs).unwrap(),
            serde_json::to_string(&rhs).unwrap()
        )
    });
    Ok(())
}

pub(super) fn proper_separation_criterion(g: &mut Gen, dim: usize, ctx: &mut Ctx) -> Result<()> {
    let c1 = g.small_point(dim);
    let s1 = g.set_with_center(&c1);
    let s2 = match g.int(0, 2) {
        0 => g.set_with_center(&c1),
        1 => {
            let w = g.nonzero_int_vec(dim).scale(&Rational::from_integer(2));
            g.set_with_center(&c1.add(&w))
        }
        _ => {
            let f = g.nonzero_int_vec(dim);
            match sup(&s1, &f)? {
                Some(v) => {
                    let half =
                        HPolyhedron::closed(dim, vec![Constraint::ge(f.clone(), v.clone())])?;
                    if g.chance(1, 2) {
                        half
                    } else {
                        // Center beyond the touching hyperplane so the cut keeps a core.
                        let t = (&v - &f.dot(&c1) + Rational::one()) / f.dot(&f);
                        let c2 = c1.add(&f.scale(&t));
                        let extra = g.int(0, 2) as usize;
                        half.intersect(&g.set_around(&c2, extra, true))?
                    }
                }
                None => g.set(dim),
            }
        }
    };
    ctx.record("S1", &s1);
    ctx.record("S2", &s2);
    if s2.interior_point()?.is_none() {
        ctx.unmet("S2 has empty core");
        return Ok(());
    }
    match properly_separate(&s1, &s2)? {
        SeparationOutcome::Separated(r) => {
            let f = &r.functional.coeffs;
            ctx.check(!f.is_zero(), || "zero functional".into());
            match sup(&s1, f)? {
                Some(v) => ctx.check(v <= r.level, || {
                    format!("sup over S1 {v} above level {}", r.level)
                }),
                None => ctx.check(false, || "f unbounded on S1".into()),
            }
            match sup(&s2, &f.neg())? {
                Some(v) => ctx.check(-v >= r.upper_level, || {
                    format!("inf over S2 below {}", r.upper_level)
                }),
                None => ctx.check(false, || "f unbounded below on S2".into()),
            }
            ctx.check(r.level <= r.upper_level, || "levels out of order".into());
            ctx.check(s1.contains_point(&r.witness_lo)?, || {
                "witness_lo outside S1".into()
            });
            ctx.check(s2.contains_point(&r.witness_hi)?, || {
                "witness_hi outside S2".into()
            });
            ctx.check(f.dot(&r.witness_lo) < f.dot(&r.witness_hi), || {
                "separation not proper".into()
            });
        }
        SeparationOutcome::Inseparable => {
            let common = core_of(&s1)?.intersect(&core_of(&s2)?)?;
            match common.relative_point()? {
                Some(x) => {
                    let ok = check_core_definitional(&s1, &x)? && check_core_definitional(&s2, &x)?;
                    ctx.check(ok, || format!("common point {x} is not in both cores"));
                }
                None => ctx.check(false, || "inseparable but the cores are disjoint".into()),
            }
        }
    }
    Ok(())
}
