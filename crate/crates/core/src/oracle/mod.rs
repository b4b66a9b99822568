//! Seeded instances and checks that share no code with the main pipeline.

mod gen;

pub use gen::{fnv1a, Gen};

use serde::{Deserialize, Serialize};

use crate::arith::{q, rank, solve_linear_system, QMatrix, QVector};
use crate::error::{Error, Result};
pub use crate::function::check_subgradient_definitional;
use crate::function::PolyhedralFunction;
use crate::polyhedra::HPolyhedron;
use crate::setvalued::SetValuedMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InstanceKind {
    Set,
    Map,
    Function,
    MultiSetSharedCore { count: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub dim: usize,
    pub constraint_budget: usize,
    pub coeff_bound: i64,
    pub kind: InstanceKind,
}

impl InstanceSpec {
    pub fn new(dim: usize, kind: InstanceKind) -> Self {
        InstanceSpec {
            dim,
            constraint_budget: 16,
            coeff_bound: 3,
            kind,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Instance {
    Set {
        set: HPolyhedron,
    },
    Map {
        map: SetValuedMap,
    },
    Function {
        function: PolyhedralFunction,
    },
    MultiSetSharedCore {
        sets: Vec<HPolyhedron>,
        shared: QVector,
    },
}

const MAX_RETRIES: u64 = 8;

/// Deterministic instance for `(spec, seed)`; rows beyond the budget or an
/// uncertified core trigger a retry on the next substream, and after
/// `MAX_RETRIES` the generator falls back to a plain box.
pub fn generate_instance(spec: &InstanceSpec, seed: Seed) -> Result<Instance> {
    if spec.dim == 0 || spec.dim > 4 {
        return Err(Error::InvalidInput(format!(
            "instance dim {} outside 1..=4",
            spec.dim
        )));
    }
    if spec.constraint_budget == 0 || spec.constraint_budget > 16 {
        return Err(Error::InvalidInput(
            "constraint budget outside 1..=16".into(),
        ));
    }
    let n = spec.dim;
    for attempt in 0..MAX_RETRIES {
        let mut g = Gen::new(seed.0, "instance", attempt).with_coeff_bound(spec.coeff_bound);
        let inst = match spec.kind {
            InstanceKind::Set => Instance::Set { set: g.set(n) },
            InstanceKind::Map => {
                let (cx, cy) = (g.small_point(n), g.small_point(1));
                Instance::Map {
                    map: g.map_around(&cx, &cy),
                }
            }
            InstanceKind::Function => {
                let c = g.small_point(n);
                Instance::Function {
                    function: g.function_around(&c),
                }
            }
            InstanceKind::MultiSetSharedCore { count } => {
                let c = g.small_point(n);
                let sets = (0..count.max(1)).map(|_| g.set_with_center(&c)).collect();
                Instance::MultiSetSharedCore { sets, shared: c }
            }
        };
        if within_budget(&inst, spec.constraint_budget) && certified(&inst)? {
            return Ok(inst);
        }
    }
    let boxed = HPolyhedron::cube(n, q(-2, 1), q(2, 1));
    Ok(match spec.kind {
        InstanceKind::Set => Instance::Set { set: boxed },
        InstanceKind::Map => Instance::Map {
            map: SetValuedMap::new(n, 1, HPolyhedron::cube(n + 1, q(-2, 1), q(2, 1)))?,
        },
        InstanceKind::Function => Instance::Function {
            function: PolyhedralFunction::indicator(&boxed)?,
        },
        InstanceKind::MultiSetSharedCore { count } => Instance::MultiSetSharedCore {
            sets: vec![boxed; count.max(1)],
            shared: QVector::zeros(n),
        },
    })
}

fn within_budget(inst: &Instance, budget: usize) -> bool {
    match inst {
        Instance::Set { set } => set.constraints().len() <= budget,
        Instance::Map { map } => map.graph().constraints().len() <= budget,
        Instance::Function { function } => function.epigraph().constraints().len() <= budget,
        Instance::MultiSetSharedCore { sets, .. } => {
            sets.iter().all(|s| s.constraints().len() <= budget)
        }
    }
}

fn certified(inst: &Instance) -> Result<bool> {
    Ok(match inst {
        Instance::Set { set } => set.interior_point()?.is_some(),
        Instance::Map { map } => map.graph().interior_point()?.is_some(),
        Instance::Function { function } => function.epigraph().interior_point()?.is_some(),
        Instance::MultiSetSharedCore { sets, shared } => {
            let mut ok = true;
            for s in sets {
                ok &= check_core_definitional(s, shared)?;
            }
            ok
        }
    })
}

/// Vertices found by solving every `dim`-subset of rows as equalities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BruteVertices {
    pub vertices: Vec<QVector>,
    /// The rows do not span the space, so the set has no vertex.
    pub lineality: bool,
}

pub const BRUTE_MAX_DIM: usize = 3;
pub const BRUTE_MAX_ROWS: usize = 12;

pub fn enumerate_vertices_bruteforce(p: &HPolyhedron) -> Result<BruteVertices> {
    if !p.is_closed() {
        return Err(Error::OpenInput("brute-force vertex enumeration"));
    }
    let n = p.dim();
    let rows = p.constraints();
    if n > BRUTE_MAX_DIM || rows.len() > BRUTE_MAX_ROWS {
        return Err(Error::BudgetExceeded(format!(
            "brute force takes dim ≤ {BRUTE_MAX_DIM} and ≤ {BRUTE_MAX_ROWS} rows, got {n} and {}",
            rows.len()
        )));
    }
    let all = QMatrix::with_cols(rows.iter().map(|c| c.a.clone()).collect(), n)?;
    if rank(&all) < n {
        return Ok(BruteVertices {
            vertices: Vec::new(),
            lineality: true,
        });
    }
    let mut found: Vec<QVector> = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a = QMatrix::with_cols(idx.iter().map(|&i| rows[i].a.clone()).collect(), n)?;
        if rank(&a) == n {
            let b: QVector = idx.iter().map(|&i| rows[i].b.clone()).collect();
            if let Some(x) = solve_linear_system(&a, &b)? {
                if rows.iter().all(|c| c.a.dot(&x) <= c.b) {
                    found.push(x);
                }
            }
        }
        if !next_subset(&mut idx, rows.len()) {
            break;
        }
    }
    found.sort();
    found.dedup();
    Ok(BruteVertices {
        vertices: found,
        lineality: false,
    })
}

/// Advances to the next `k`-subset of `0..m` in lexicographic order.
fn next_subset(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < m - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// `x ∈ S` and every direction `±aᵢ` admits a symmetric step: for each
/// direction `v` and row `j`, either row `j` has slack at `x` or `aⱼ·v = 0`.
pub fn check_core_definitional(s: &HPolyhedron, x: &QVector) -> Result<bool> {
    if x.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: x.dim(),
        });
    }
    if !s.contains_point(x)? {
        return Ok(false);
    }
    let rows = s.constraints();
    for d in rows {
        for v in [d.a.clone(), d.a.neg()] {
            let absorbs = rows
                .iter()
                .all(|c| c.a.dot(x) < c.b || c.a.dot(&v).is_zero());
            if !absorbs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
