//! Fourier–Motzkin projection with strictness propagation.

use std::sync::OnceLock;

use super::hpoly::{Constraint, HPolyhedron};
use crate::arith::{QVector, Rational};
use crate::error::{Error, Result};

pub const DEFAULT_FM_LIMIT: usize = 4096;

/// Constraint cap read once from `CCX_MAX_FM_CONSTRAINTS`.
pub fn fm_limit() -> usize {
    static LIMIT: OnceLock<usize> = OnceLock::new();
    *LIMIT.get_or_init(|| {
        std::env::var("CCX_MAX_FM_CONSTRAINTS")
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_FM_LIMIT)
    })
}

/// Projects `p` onto the coordinates not listed in `drop`, keeping their
/// order. Explicit equality pairs are used for substitution first; the
/// remaining variables are eliminated cheapest-first with LP redundancy
/// removal after each step.
pub fn eliminate_variables(p: &HPolyhedron, drop: &[usize]) -> Result<HPolyhedron> {
    eliminate_with_limit(p, drop, fm_limit())
}

pub fn eliminate_with_limit(p: &HPolyhedron, drop: &[usize], limit: usize) -> Result<HPolyhedron> {
    let n = p.dim();
    if let Some(&j) = drop.iter().find(|&&j| j >= n) {
        return Err(Error::InvalidInput(format!(
            "coordinate {j} out of range for dimension {n}"
        )));
    }
    let mut pending: Vec<usize> = drop.to_vec();
    pending.sort_unstable();
    pending.dedup();
    let keep: Vec<usize> = (0..n)
        .filter(|i| pending.binary_search(i).is_err())
        .collect();
    let openness = p.openness();

    let mut cur = p.remove_redundant()?;
    while !pending.is_empty() && !cur.is_marked_empty() {
        let cons = cur.constraints().to_vec();
        if let Some((var, eq)) = find_equality(&cons, &pending) {
            let e = &cons[eq];
            let ej = e.a[var].clone();
            let mut out = Vec::with_capacity(cons.len());
            for c in &cons {
                if c.a[var].is_zero() {
                    out.push(c.clone());
                    continue;
                }
                let f = &c.a[var] / &ej;
                let a = c.a.add_scaled(&-f.clone(), &e.a);
                let b = &c.b - &f * &e.b;
                out.push(Constraint {
                    a,
                    b,
                    strict: c.strict,
                });
            }
            pending.retain(|&v| v != var);
            cur = HPolyhedron::new(n, out)?.remove_redundant()?;
            continue;
        }

        let (var, cost) = pending
            .iter()
            .map(|&v| {
                let pos = cons.iter().filter(|c| c.a[v].is_positive()).count();
                let neg = cons.iter().filter(|c| c.a[v].is_negative()).count();
                let zero = cons.len() - pos - neg;
                (v, pos * neg + zero)
            })
            .min_by_key(|&(v, c)| (c, v))
            .unwrap();
        if cost > limit {
            return Err(Error::FmLimitExceeded { limit });
        }
        let mut out: Vec<Constraint> = Vec::with_capacity(cost);
        for c in cons.iter().filter(|c| c.a[var].is_zero()) {
            out.push(c.clone());
        }
        for cp in cons.iter().filter(|c| c.a[var].is_positive()) {
            for cn in cons.iter().filter(|c| c.a[var].is_negative()) {
                let alpha = &cp.a[var];
                let beta = -&cn.a[var];
                let mut a = cp.a.scale(&beta).add_scaled(alpha, &cn.a);
                a[var] = Rational::zero();
                let b = &cp.b * &beta + alpha * &cn.b;
                out.push(Constraint {
                    a,
                    b,
                    strict: cp.strict || cn.strict,
                });
            }
        }
        pending.retain(|&v| v != var);
        cur = HPolyhedron::new(n, out)?.remove_redundant()?;
    }

    let m = keep.len();
    if cur.is_marked_empty() {
        return Ok(empty_like(m, openness));
    }
    let cons = cur
        .constraints()
        .iter()
        .map(|c| Constraint {
            a: keep.iter().map(|&i| c.a[i].clone()).collect(),
            b: c.b.clone(),
            strict: c.strict,
        })
        .collect();
    HPolyhedron::new(m, cons)
}

fn empty_like(dim: usize, openness: super::Openness) -> HPolyhedron {
    if openness == super::Openness::Open {
        HPolyhedron::empty(dim).strict_version()
    } else {
        HPolyhedron::empty(dim)
    }
}

/// A pending variable with nonzero coefficient in an explicit non-strict
/// pair `a·x ≤ b`, `-a·x ≤ -b`; returns the variable and one row index.
fn find_equality(cons: &[Constraint], pending: &[usize]) -> Option<(usize, usize)> {
    for (i, c) in cons.iter().enumerate() {
        if c.strict {
            continue;
        }
        let Some(&v) = pending.iter().find(|&&v| !c.a[v].is_zero()) else {
            continue;
        };
        let na: QVector = c.a.neg();
        let nb = -c.b.clone();
        if cons.iter().any(|d| !d.strict && d.a == na && d.b == nb) {
            return Some((v, i));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, qv};

    #[test]
    fn chained_bound() {
        // 0 ≤ y ≤ 1, x ≤ y; drop y -> x ≤ 1
        let p = HPolyhedron::from_ints(2, &[(&[0, -1], 0), (&[0, 1], 1), (&[1, -1], 0)]);
        let r = eliminate_variables(&p, &[1]).unwrap();
        assert_eq!(r, HPolyhedron::from_ints(1, &[(&[1], 1)]));
    }

    #[test]
    fn abs_epigraph() {
        // (x, y, t): y ≥ x, y ≥ -x, t ≥ y; drop y -> t ≥ x, t ≥ -x
        let p = HPolyhedron::from_ints(3, &[(&[1, -1, 0], 0), (&[-1, -1, 0], 0), (&[0, 1, -1], 0)]);
        let r = eliminate_variables(&p, &[1]).unwrap();
        assert_eq!(
            r,
            HPolyhedron::from_ints(2, &[(&[1, -1], 0), (&[-1, -1], 0)])
        );
    }

    #[test]
    fn drop_nothing_is_redundancy_removal() {
        let p = HPolyhedron::from_ints(1, &[(&[1], 1), (&[1], 2), (&[1], 3)]);
        assert_eq!(
            eliminate_variables(&p, &[]).unwrap(),
            HPolyhedron::from_ints(1, &[(&[1], 1)])
        );
    }

    #[test]
    fn strictness_propagates() {
        // x < y, y ≤ 1 -> x < 1
        let p = HPolyhedron::new(
            2,
            vec![
                Constraint::lt(qv(&[1, -1]), q(0, 1)),
                Constraint::le(qv(&[0, 1]), q(1, 1)),
            ],
        )
        .unwrap();
        let r = eliminate_variables(&p, &[1]).unwrap();
        assert_eq!(r.constraints(), &[Constraint::lt(qv(&[1]), q(1, 1))]);
    }

    #[test]
    fn equality_substitution() {
        // y = x + 1, 0 ≤ y ≤ 2 -> -1 ≤ x ≤ 1
        let p = HPolyhedron::from_ints(
            2,
            &[(&[-1, 1], 1), (&[1, -1], -1), (&[0, 1], 2), (&[0, -1], 0)],
        );
        let r = eliminate_variables(&p, &[1]).unwrap();
        assert_eq!(r, HPolyhedron::cube(1, q(-1, 1), q(1, 1)));
    }

    #[test]
    fn empty_projection() {
        let p = HPolyhedron::from_ints(2, &[(&[0, 1], 0), (&[0, -1], -1), (&[1, 0], 1)]);
        assert!(eliminate_variables(&p, &[1]).unwrap().is_marked_empty());
    }

    #[test]
    fn limit_is_enforced() {
        let mut rows: Vec<(Vec<i64>, i64)> = Vec::new();
        for k in 1..=4 {
            rows.push((vec![k, 1], 10));
            rows.push((vec![-k, 1], 10));
            rows.push((vec![k, -1], 10));
            rows.push((vec![-k, -1], 10));
        }
        let rr: Vec<(&[i64], i64)> = rows.iter().map(|(a, b)| (a.as_slice(), *b)).collect();
        let p = HPolyhedron::from_ints(2, &rr);
        assert!(matches!(
            eliminate_with_limit(&p, &[1], 3),
            Err(Error::FmLimitExceeded { limit: 3 })
        ));
    }
}
