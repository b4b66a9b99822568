//! Seeded theorem suites with deterministic reports.

mod calculus;
mod sample;
mod sets;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::oracle::Gen;

pub const THEOREM_IDS: [&str; 22] = [
    "P2.2", "P2.3", "P2.4", "P2.5", "P2.6", "E2.3", "P3.1", "T3.3", "T3.4", "L3.5", "T3.7", "L4.1",
    "T4.2", "L5.1", "L5.2", "L5.3", "T5.4", "T6.1", "T6.2", "T7.1", "T7.2", "T8.1",
];

pub const MAX_DIM: usize = 4;

/// Scheduling for a batch. Reports do not depend on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViolationReport {
    pub index: usize,
    pub failures: Vec<String>,
    pub instance: Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnmetReport {
    pub index: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub theorem_id: String,
    pub seed: u64,
    pub dim: usize,
    pub instances_run: usize,
    pub passes: usize,
    pub precondition_unmet: usize,
    pub violations: usize,
    /// Individual assertions evaluated over all instances.
    pub checks: usize,
    /// Checks run on instances built to violate the qualification
    /// condition (inclusion directions only).
    pub unqualified_checks: usize,
    pub violation_reports: Vec<ViolationReport>,
    pub unmet_reports: Vec<UnmetReport>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.passes == self.instances_run
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Outcome {
    Pass {
        checks: usize,
        unqualified_checks: usize,
    },
    Unmet {
        checks: usize,
        reason: String,
    },
    Violation {
        checks: usize,
        failures: Vec<String>,
        instance: Value,
    },
}

/// Per-instance record: inputs for the dump plus failed checks.
pub(crate) struct Ctx {
    instance: Map<String, Value>,
    failures: Vec<String>,
    unmet: Option<String>,
    checks: usize,
    unqualified: usize,
}

impl Ctx {
    fn new() -> Self {
        Ctx {
            instance: Map::new(),
            failures: Vec::new(),
            unmet: None,
            checks: 0,
            unqualified: 0,
        }
    }

    pub(crate) fn record<T: Serialize + ?Sized>(&mut self, key: &str, v: &T) {
        let v = serde_json::to_value(v)
            .unwrap_or_else(|e| Value::String(format!("unserializable: {e}")));
        self.instance.insert(key.to_string(), v);
    }

    pub(crate) fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub(crate) fn unmet(&mut self, why: impl Into<String>) {
        if self.unmet.is_none() {
            self.unmet = Some(why.into());
        }
    }

    pub(crate) fn unqualified_check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.unqualified += 1;
        self.check(ok, what);
    }

    fn finish(self) -> Outcome {
        let checks = self.checks;
        if !self.failures.is_empty() {
            Outcome::Violation {
                checks,
                failures: self.failures,
                instance: Value::Object(self.instance),
            }
        } else if let Some(reason) = self.unmet {
            Outcome::Unmet { checks, reason }
        } else {
            Outcome::Pass {
                checks,
                unqualified_checks: self.unqualified,
            }
        }
    }
}

type Suite = fn(&mut Gen, usize, &mut Ctx) -> Result<()>;

fn suite(id: &str) -> Option<Suite> {
    Some(match id {
        "P2.2" => sets::segment_property,
        "P2.3" => sets::one_sided_criterion,
        "P2.4" => sets::core_idempotent,
        "P2.5" => sets::open_shift,
        "P2.6" => sets::nonconstancy,
        "E2.3" => sets::product_rule,
        "P3.1" => sets::separation_is_proper,
        "T3.3" => sets::point_separation,
        "T3.4" => sets::separation_trichotomy,
        "L3.5" => sets::gauge_round_trip,
        "T3.7" => sets::interval_inclusion,
        "L4.1" => sets::surjective_image,
        "L5.1" => sets::difference_rule,
        "L5.2" => sets::proper_separation_criterion,
        "T4.2" => calculus::graph_core,
        "L5.3" => calculus::epigraph_core,
        "T5.4" => calculus::intersection_rule,
        "T6.1" => calculus::coderivative_sum_rule,
        "T6.2" => calculus::subdifferential_sum_rule,
        "T7.1" => calculus::coderivative_chain_rule,
        "T7.2" => calculus::subdifferential_chain_rule,
        "T8.1" => calculus::marginal_rule,
        _ => return None,
    })
}

fn run_one(run: Suite, id: &str, seed: u64, dim: usize, index: usize) -> Result<Outcome> {
    let mut g = Gen::new(seed, id, index as u64);
    let mut ctx = Ctx::new();
    ctx.record("seed", &seed);
    ctx.record("index", &index);
    match run(&mut g, dim, &mut ctx) {
        Ok(()) => Ok(ctx.finish()),
        Err(e @ Error::FmLimitExceeded { .. }) => Err(e),
        Err(e) if e.is_domain() => {
            ctx.unmet(e.to_string());
            Ok(ctx.finish())
        }
        Err(e) => {
            ctx.failures.push(format!("internal error: {e}"));
            Ok(ctx.finish())
        }
    }
}

pub fn verify_theorem(id: &str, seed: u64, count: usize, dim: usize) -> Result<Verdict> {
    verify_theorem_with(id, seed, count, dim, Exec::default())
}

/// Runs instances `0..count` of suite `id`; each instance draws from its own
/// stream `(seed, id, index)`, so the report is independent of `exec`.
pub fn verify_theorem_with(
    id: &str,
    seed: u64,
    count: usize,
    dim: usize,
    exec: Exec,
) -> Result<Verdict> {
    let run = suite(id).ok_or_else(|| Error::InvalidInput(format!("unknown theorem id {id:?}")))?;
    if count == 0 {
        return Err(Error::InvalidInput("count must be at least 1".into()));
    }
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "dim must lie in 1..={MAX_DIM}"
        )));
    }
    let outcomes: Vec<Result<Outcome>> = match exec {
        Exec::Sequential => (0..count).map(|i| run_one(run, id, seed, dim, i)).collect(),
        Exec::Parallel => parallel_map(count, |i| run_one(run, id, seed, dim, i)),
    };
    let mut v = Verdict {
        theorem_id: id.to_string(),
        seed,
        dim,
        instances_run: count,
        passes: 0,
        precondition_unmet: 0,
        violations: 0,
        checks: 0,
        unqualified_checks: 0,
        violation_reports: Vec::new(),
        unmet_reports: Vec::new(),
    };
    for (index, o) in outcomes.into_iter().enumerate() {
        match o? {
            Outcome::Pass {
                checks,
                unqualified_checks,
            } => {
                v.passes += 1;
                v.checks += checks;
                v.unqualified_checks += unqualified_checks;
            }
            Outcome::Unmet { checks, reason } => {
                v.precondition_unmet += 1;
                v.checks += checks;
                v.unmet_reports.push(UnmetReport { index, reason });
            }
            Outcome::Violation {
                checks,
                failures,
                instance,
            } => {
                v.violations += 1;
                v.checks += checks;
                v.violation_reports.push(ViolationReport {
                    index,
                    failures,
                    instance,
                });
            }
        }
    }
    Ok(v)
}

#[cfg(feature = "parallel")]
fn parallel_map<T: Send>(count: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T: Send>(count: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..count).map(f).collect()
}
