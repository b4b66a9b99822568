//! Exact rational linear programming.
//!
//! A dense two-phase tableau simplex with Bland's rule. Variables are free;
//! internally each is split into a difference of two nonnegative columns and
//! every equality becomes a pair of inequalities, so there is a single pivot
//! code path. Strict inequalities are not part of this interface.

use crate::arith::{QVector, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpConstraint {
    pub a: QVector,
    pub b: Rational,
    pub rel: Relation,
}

impl LpConstraint {
    pub fn le(a: QVector, b: Rational) -> Self {
        LpConstraint {
            a,
            b,
            rel: Relation::Le,
        }
    }

    pub fn ge(a: QVector, b: Rational) -> Self {
        LpConstraint {
            a: a.neg(),
            b: -b,
            rel: Relation::Le,
        }
    }

    pub fn eq(a: QVector, b: Rational) -> Self {
        LpConstraint {
            a,
            b,
            rel: Relation::Eq,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpProblem {
    pub dim: usize,
    pub objective: QVector,
    pub sense: Sense,
    pub constraints: Vec<LpConstraint>,
}

impl LpProblem {
    pub fn new(objective: QVector, sense: Sense) -> Self {
        LpProblem {
            dim: objective.dim(),
            objective,
            sense,
            constraints: Vec::new(),
        }
    }

    /// A pure feasibility problem: zero objective.
    pub fn feasibility(dim: usize) -> Self {
        Self::new(QVector::zeros(dim), Sense::Max)
    }

    pub fn with(mut self, c: LpConstraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn push(&mut self, c: LpConstraint) {
        self.constraints.push(c);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpResult {
    pub status: LpStatus,
    pub optimum: Option<Rational>,
    /// Optimal point, or a feasible point when unbounded.
    pub witness: Option<QVector>,
    /// Recession direction that strictly improves the objective.
    pub ray: Option<QVector>,
}

impl LpResult {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn is_feasible(&self) -> bool {
        self.status != LpStatus::Infeasible
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced costs of the current (maximization) objective.
    cost: Vec<Rational>,
    cost_value: Rational,
}

enum Outcome {
    Optimal,
    Unbounded(usize),
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        if !inv.is_one() {
            for x in self.rows[r].iter_mut() {
                if !x.is_zero() {
                    *x *= &inv;
                }
            }
            self.rhs[r] *= &inv;
        }
        let nz: Vec<usize> = (0..self.rows[r].len())
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        let prow = std::mem::take(&mut self.rows[r]);
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for &j in &nz {
                let d = &f * &prow[j];
                self.rows[i][j] -= d;
            }
            if !prhs.is_zero() {
                self.rhs[i] -= &f * &prhs;
            }
        }
        if !self.cost[c].is_zero() {
            let f = self.cost[c].clone();
            for &j in &nz {
                let d = &f * &prow[j];
                self.cost[j] -= d;
            }
            self.cost_value += &f * &prhs;
        }
        self.rows[r] = prow;
        self.basis[r] = c;
    }

    /// Runs Bland's rule until optimality or an unbounded column turns up.
    /// Columns `>= active_cols` never enter.
    fn run(&mut self, active_cols: usize) -> Outcome {
        loop {
            let Some(c) = (0..active_cols).find(|&j| self.cost[j].is_positive()) else {
                return Outcome::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let t = &self.rows[i][c];
                if !t.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / t;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return Outcome::Unbounded(c),
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }

    fn set_objective(&mut self, c: &[Rational]) {
        self.cost = c.to_vec();
        self.cost_value = Rational::zero();
        for i in 0..self.rows.len() {
            let cb = &c[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (j, x) in self.rows[i].iter().enumerate() {
                if !x.is_zero() {
                    self.cost[j] -= cb * x;
                }
            }
            self.cost_value += cb * &self.rhs[i];
        }
    }

    fn values(&self, ncols: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < ncols {
                v[b] = self.rhs[i].clone();
            }
        }
        v
    }
}

/// Solves the linear program exactly.
pub fn solve_lp(p: &LpProblem) -> Result<LpResult> {
    if p.objective.dim() != p.dim {
        return Err(Error::DimensionMismatch {
            expected: p.dim,
            found: p.objective.dim(),
        });
    }
    if let Some(c) = p.constraints.iter().find(|c| c.a.dim() != p.dim) {
        return Err(Error::DimensionMismatch {
            expected: p.dim,
            found: c.a.dim(),
        });
    }
    let n = p.dim;

    let mut ineqs: Vec<(&QVector, Rational, bool)> = Vec::new();
    for c in &p.constraints {
        ineqs.push((&c.a, c.b.clone(), false));
        if c.rel == Relation::Eq {
            ineqs.push((&c.a, -c.b.clone(), true));
        }
    }
    let m = ineqs.len();
    // Columns: u (n), v (n), slack (m), artificial (k).
    let nat = 2 * n + m;
    let art_rows: Vec<usize> = (0..m).filter(|&i| ineqs[i].1.is_negative()).collect();
    let ncols = nat + art_rows.len();

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for (i, (a, b, negated)) in ineqs.iter().enumerate() {
        let mut row = vec![Rational::zero(); ncols];
        let sign_a = if *negated { -1 } else { 1 };
        let flip = b.is_negative();
        let s = if flip { -sign_a } else { sign_a };
        for j in 0..n {
            if a[j].is_zero() {
                continue;
            }
            let coef = if s > 0 { a[j].clone() } else { -a[j].clone() };
            row[n + j] = -coef.clone();
            row[j] = coef;
        }
        row[2 * n + i] = if flip {
            -Rational::one()
        } else {
            Rational::one()
        };
        let bv = if flip { -b.clone() } else { b.clone() };
        if flip {
            let k = art_rows.iter().position(|&r| r == i).unwrap();
            row[nat + k] = Rational::one();
            basis.push(nat + k);
        } else {
            basis.push(2 * n + i);
        }
        rows.push(row);
        rhs.push(bv);
    }

    let mut t = Tableau {
        rows,
        rhs,
        basis,
        cost: vec![Rational::zero(); ncols],
        cost_value: Rational::zero(),
    };

    if !art_rows.is_empty() {
        let mut c1 = vec![Rational::zero(); ncols];
        for x in c1.iter_mut().skip(nat) {
            *x = -Rational::one();
        }
        t.set_objective(&c1);
        match t.run(ncols) {
            Outcome::Optimal => {}
            Outcome::Unbounded(_) => unreachable!("phase one is bounded"),
        }
        // Phase-one optimum is -(sum of artificials).
        if t.cost_value.is_negative() {
            return Ok(LpResult {
                status: LpStatus::Infeasible,
                optimum: None,
                witness: None,
                ray: None,
            });
        }
        // Drive artificials out of the basis; drop rows that are redundant.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= nat {
                if let Some(c) = (0..nat).find(|&j| !t.rows[i][j].is_zero()) {
                    t.pivot(i, c);
                    i += 1;
                } else {
                    t.rows.remove(i);
                    t.rhs.remove(i);
                    t.basis.remove(i);
                }
            } else {
                i += 1;
            }
        }
        for row in t.rows.iter_mut() {
            row.truncate(nat);
        }
    }

    let sign = match p.sense {
        Sense::Max => Rational::one(),
        Sense::Min => -Rational::one(),
    };
    let mut c2 = vec![Rational::zero(); nat];
    for j in 0..n {
        let cj = &p.objective[j] * &sign;
        c2[n + j] = -cj.clone();
        c2[j] = cj;
    }
    t.set_objective(&c2);
    let outcome = t.run(nat);

    let vals = t.values(nat);
    let witness: QVector = (0..n).map(|j| &vals[j] - &vals[n + j]).collect();
    match outcome {
        Outcome::Optimal => {
            let optimum = p.objective.dot(&witness);
            debug_assert_eq!(&optimum * &sign, t.cost_value);
            Ok(LpResult {
                status: LpStatus::Optimal,
                optimum: Some(optimum),
                witness: Some(witness),
                ray: None,
            })
        }
        Outcome::Unbounded(c) => {
            let mut d = vec![Rational::zero(); nat];
            d[c] = Rational::one();
            for (i, &b) in t.basis.iter().enumerate() {
                d[b] = -t.rows[i][c].clone();
            }
            let mut ray: QVector = (0..n).map(|j| &d[j] - &d[n + j]).collect();
            // Normalise the direction to keep numbers small.
            if let Some(first) = ray.iter().find(|x| !x.is_zero()).cloned() {
                ray = ray.scale(&first.abs().recip());
            }
            Ok(LpResult {
                status: LpStatus::Unbounded,
                optimum: None,
                witness: Some(witness),
                ray: Some(ray),
            })
        }
    }
}

/// `max c·x` over the constraints; `None` when infeasible, `Some(None)` when
/// unbounded.
pub fn maximize(
    c: &QVector,
    constraints: &[LpConstraint],
) -> Result<Option<Option<(Rational, QVector)>>> {
    let p = LpProblem {
        dim: c.dim(),
        objective: c.clone(),
        sense: Sense::Max,
        constraints: constraints.to_vec(),
    };
    let r = solve_lp(&p)?;
    Ok(match r.status {
        LpStatus::Infeasible => None,
        LpStatus::Unbounded => Some(None),
        LpStatus::Optimal => Some(Some((r.optimum.unwrap(), r.witness.unwrap()))),
    })
}
