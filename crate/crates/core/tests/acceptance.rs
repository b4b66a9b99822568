//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::time::Instant;

use ccx_core::convex::{
    extension_certified, hahn_banach_extend, hahn_banach_via_separation, separate_point,
    Functional, SeparationOutcome, SublinearFunc,
};
use ccx_core::function::{
    argmin_set, marginal_function, marginal_subdifferential, subdifferential, PolyhedralFunction,
};
use ccx_core::lp::{solve_lp, LpProblem, LpStatus, Sense};
use ccx_core::oracle::{
    check_core_definitional, enumerate_vertices_bruteforce, generate_instance, Gen, Instance,
    InstanceKind, InstanceSpec, Seed,
};
use ccx_core::polyhedra::{h_to_v, set_eq, HPolyhedron};
use ccx_core::setvalued::SetValuedMap;
use ccx_core::verify::{verify_theorem, verify_theorem_with, Exec, THEOREM_IDS};
use ccx_core::{q, qv, QMatrix, QVector, Rational, Result};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn theorem_suites() -> Result<Outcome> {
    let mut jobs: Vec<(&str, usize)> = THEOREM_IDS.iter().map(|id| (*id, 2)).collect();
    jobs.extend([("T5.4", 3), ("T6.1", 3), ("T8.1", 3)]);
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut runs = 0;
    for (id, dim) in jobs {
        for seed in 1..=50 {
            let v = verify_theorem(id, seed, 50, dim)?;
            runs += 1;
            if !v.passed() {
                bad.push(format!(
                    "{id}/dim {dim}/seed {seed}: {}/{} passes, {} violations",
                    v.passes, v.instances_run, v.violations
                ));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = bad.is_empty() && secs < 600.0;
    let mut detail = format!("{runs} batches of 50 in {secs:.1}s");
    if !bad.is_empty() {
        detail.push_str(&format!("; {}", bad.join("; ")));
    }
    Ok(outcome(ok, detail))
}

fn worked_marginal() -> Result<Outcome> {
    let phi = PolyhedralFunction::from_int_pieces(2, &[(&[0, 1], 0)]);
    let f = SetValuedMap::new(
        1,
        1,
        HPolyhedron::from_ints(2, &[(&[1, -1], 0), (&[-1, -1], 0)]),
    )?;
    let abs = PolyhedralFunction::from_int_pieces(1, &[(&[1], 0), (&[-1], 0)]);
    let interval = HPolyhedron::cube(1, q(-1, 1), q(1, 1));
    let mu = marginal_function(&phi, &f)?;
    let mu_ok = set_eq(mu.epigraph(), abs.epigraph())?;
    let argmin_ok = set_eq(
        &argmin_set(&phi, &f, &qv(&[0]))?,
        &HPolyhedron::cube(1, q(0, 1), q(0, 1)),
    )?;
    let via_rule = marginal_subdifferential(&phi, &f, &qv(&[0]), &qv(&[0]))?;
    let direct = subdifferential(&mu, &qv(&[0]))?.set;
    let rule_ok = set_eq(&via_rule, &interval)?;
    let direct_ok = set_eq(&direct, &interval)?;
    let same = set_eq(&via_rule, &direct)?;
    Ok(outcome(
        mu_ok && argmin_ok && rule_ok && direct_ok && same,
        format!(
            "μ=|x| {mu_ok}, argmin {argmin_ok}, rule {rule_ok}, direct {direct_ok}, equal {same}"
        ),
    ))
}

/// `sup a·x ≤ b` over `p` for every row of `q`, by LP.
fn lp_includes(q: &HPolyhedron, p: &HPolyhedron) -> Result<bool> {
    for c in q.constraints() {
        match p.maximize(&c.a)? {
            None => return Ok(true),
            Some(None) => return Ok(false),
            Some(Some((v, _))) if v > c.b => return Ok(false),
            Some(Some(_)) => {}
        }
    }
    Ok(true)
}

fn round_trip() -> Result<Outcome> {
    let mut bad = Vec::new();
    let mut pointed = 0;
    for i in 0..100u64 {
        let dim = 1 + (i % 3) as usize;
        let spec = InstanceSpec {
            dim,
            constraint_budget: 10,
            coeff_bound: 3,
            kind: InstanceKind::Set,
        };
        let Instance::Set { set: p } = generate_instance(&spec, Seed(1000 + i))? else {
            unreachable!("set spec")
        };
        let v = h_to_v(&p)?;
        let back = v.to_h();
        if !(lp_includes(&back, &p)? && lp_includes(&p, &back)?) {
            bad.push(format!("#{i}: H→V→H changed the set"));
        }
        let brute = enumerate_vertices_bruteforce(&p)?;
        if brute.lineality {
            let has_line = v.rays().iter().any(|r| v.rays().contains(&r.neg()));
            if !v.vertices().is_empty() && !has_line {
                bad.push(format!("#{i}: lineality without a line"));
            }
        } else {
            pointed += 1;
            if brute.vertices != v.vertices() {
                bad.push(format!("#{i}: vertex sets differ"));
            }
        }
    }
    Ok(outcome(
        bad.is_empty(),
        format!("100 polyhedra, {pointed} pointed; {}", summary(&bad)),
    ))
}

fn lp_oracle() -> Result<Outcome> {
    let mut bad = Vec::new();
    for i in 0..100u64 {
        let mut g = Gen::new(i, "acceptance-lp", 0);
        let dim = g.int(1, 3) as usize;
        let p = g.polytope(dim);
        let c = g.int_vec(dim);
        let mut lp = LpProblem::new(c.clone(), Sense::Max);
        for r in p.lp_constraints() {
            lp.push(r);
        }
        let res = solve_lp(&lp)?;
        let brute = enumerate_vertices_bruteforce(&p)?;
        let best = brute.vertices.iter().map(|x| c.dot(x)).max();
        match (res.status, res.optimum, best) {
            (LpStatus::Optimal, Some(opt), Some(b)) if opt == b => {}
            (st, opt, b) => bad.push(format!("#{i}: simplex {st:?} {opt:?} vs brute {b:?}")),
        }
    }
    Ok(outcome(
        bad.is_empty(),
        format!("100 LPs; {}", summary(&bad)),
    ))
}

fn hahn_banach() -> Result<Outcome> {
    let mut bad = Vec::new();
    for i in 0..50u64 {
        let mut g = Gen::new(i, "acceptance-hb", 0);
        let n = g.int(2, 3) as usize;
        let p = g.norm_like(n);
        let k = g.int(1, n as i64 - 1) as usize;
        let basis = QMatrix::from_columns(g.full_rank_matrix(k, n).rows(), n);
        // g = f₀∘B with f₀ a convex combination of pieces, hence dominated by p
        let w: Vec<i64> = p.pieces().iter().map(|_| g.int(0, 3)).collect();
        let total: i64 = w.iter().sum::<i64>().max(1);
        let f0 = p
            .pieces()
            .iter()
            .zip(&w)
            .fold(QVector::zeros(n), |acc, (c, &wi)| {
                acc.add_scaled(&Rational::new(wi, total), c)
            });
        let f0 = if w.iter().all(|&x| x == 0) {
            p.pieces()[0].clone()
        } else {
            f0
        };
        let gy: QVector = basis.columns().iter().map(|b| f0.dot(b)).collect();
        let a = hahn_banach_extend(&p, &basis, &gy)?;
        if !extension_certified(&p, &basis, &gy, &a)? {
            bad.push(format!("#{i}: midpoint extension not certified"));
        }
        if !gy.is_zero() {
            let b = hahn_banach_via_separation(&p, &basis, &gy)?;
            if !extension_certified(&p, &basis, &gy, &b)? {
                bad.push(format!("#{i}: separation extension not certified"));
            }
        }
    }
    let l1 = SublinearFunc::from_ints(&[&[1, 1], &[1, -1], &[-1, 1], &[-1, -1]]);
    let e1 = QMatrix::from_columns(&[qv(&[1, 0])], 2);
    let mid = hahn_banach_extend(&l1, &e1, &qv(&[1]))?;
    let sep = hahn_banach_via_separation(&l1, &e1, &qv(&[1]))?;
    let mid_ok = mid == Functional::new(qv(&[1, 0]));
    let sep_ok = extension_certified(&l1, &e1, &qv(&[1]), &sep)?
        && sep.coeffs[1] >= q(-1, 1)
        && sep.coeffs[1] <= q(1, 1);
    if !mid_ok {
        bad.push(format!("ℓ₁ midpoint gave {}", mid.coeffs));
    }
    if !sep_ok {
        bad.push(format!("ℓ₁ separation gave {}", sep.coeffs));
    }
    Ok(outcome(
        bad.is_empty(),
        format!("50 triples + ℓ₁ case; {}", summary(&bad)),
    ))
}

fn separation_pairs() -> Result<Outcome> {
    let mut bad = Vec::new();
    let (mut sep, mut insep) = (0, 0);
    for i in 0..200u64 {
        let mut g = Gen::new(i, "acceptance-sep", 0);
        let dim = g.int(1, 3) as usize;
        let c = g.small_point(dim);
        let base = g.set_with_center(&c);
        let s = if g.chance(1, 2) {
            HPolyhedron::open(dim, base.constraints().to_vec())?
        } else {
            base.clone()
        };
        let x0 = match g.int(0, 3) {
            0 => c.clone(),
            1 => g.point(dim, 3),
            2 => match h_to_v(&base)?.vertices().first() {
                Some(v) => v.clone(),
                None => g.point(dim, 3),
            },
            _ => {
                // a boundary point on a ray from the center
                let d = g.nonzero_int_vec(dim);
                let exit = base
                    .constraints()
                    .iter()
                    .filter(|r| r.a.dot(&d).is_positive())
                    .map(|r| (&r.b - &r.a.dot(&c)) / r.a.dot(&d))
                    .min();
                match exit {
                    Some(t) => c.add(&d.scale(&t)),
                    None => g.point(dim, 3),
                }
            }
        };
        let in_core = check_core_definitional(&s, &x0)?;
        match separate_point(&s, &x0)? {
            SeparationOutcome::Inseparable => {
                insep += 1;
                if !in_core {
                    bad.push(format!("#{i}: inseparable but {x0} is not a core point"));
                }
            }
            SeparationOutcome::Separated(r) => {
                sep += 1;
                let f = &r.functional.coeffs;
                let sup_ok = match s.maximize(f)? {
                    Some(Some((v, _))) => v <= r.level,
                    _ => false,
                };
                let valid = !in_core
                    && !f.is_zero()
                    && sup_ok
                    && f.dot(&x0) >= r.level
                    && s.contains_point(&r.witness_lo)?
                    && r.witness_hi == x0
                    && f.dot(&r.witness_lo) < f.dot(&r.witness_hi);
                if !valid {
                    bad.push(format!("#{i}: invalid separation of {x0}"));
                }
            }
        }
    }
    Ok(outcome(
        bad.is_empty() && sep > 0 && insep > 0,
        format!(
            "200 pairs, {sep} separated, {insep} inseparable; {}",
            summary(&bad)
        ),
    ))
}

fn determinism() -> Result<Outcome> {
    let mut bad = Vec::new();
    for id in THEOREM_IDS {
        let a =
            serde_json::to_string(&verify_theorem_with(id, 17, 12, 2, Exec::Parallel)?).unwrap();
        let b =
            serde_json::to_string(&verify_theorem_with(id, 17, 12, 2, Exec::Parallel)?).unwrap();
        let c =
            serde_json::to_string(&verify_theorem_with(id, 17, 12, 2, Exec::Sequential)?).unwrap();
        if a != b || a != c {
            bad.push(id.to_string());
        }
    }
    Ok(outcome(
        bad.is_empty(),
        format!("22 suites rerun; {}", summary(&bad)),
    ))
}

fn summary(bad: &[String]) -> String {
    if bad.is_empty() {
        "no failures".into()
    } else {
        format!("{} failures: {}", bad.len(), bad.join("; "))
    }
}

fn main() {
    type Criterion = (&'static str, fn() -> Result<Outcome>);
    let criteria: [Criterion; 7] = [
        ("theorem suites", theorem_suites),
        ("worked marginal example", worked_marginal),
        ("representation round trip", round_trip),
        ("LP vs brute-force vertices", lp_oracle),
        ("Hahn-Banach extensions", hahn_banach),
        ("separation trichotomy", separation_pairs),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        let tag = if o.ok { "PASS" } else { "FAIL" };
        println!(
            "criterion {}: {tag}  {name} ({}; {:.1}s)",
            n + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!o.ok);
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
