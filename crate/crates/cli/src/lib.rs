//! `ccx` command line: JSON problems in, exact JSON results out.
//!
//! Exit codes: 0 success, 1 malformed input or usage error, 2 a typed
//! mathematical outcome (inseparable, precondition unmet, ...), 3 a resource
//! limit (Fourier–Motzkin growth, brute-force budget), 4 a `verify` run
//! with violations.

use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use ccx_core::convex::{
    core_of, gauge_eval, hahn_banach_extend, hahn_banach_via_separation, lin_of, normal_cone,
    properly_separate, separate_point, SeparationOutcome, SublinearFunc,
};
use ccx_core::function::{
    argmin_set, evaluate, marginal_subdifferential, marginal_value, subdifferential, ExtValue,
    PolyhedralFunction,
};
use ccx_core::polyhedra::HPolyhedron;
use ccx_core::setvalued::{coderivative, SetValuedMap};
use ccx_core::verify::{verify_theorem_with, Exec};
use ccx_core::{Error, QMatrix, QVector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;
pub const EXIT_VIOLATIONS: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "ccx",
    version,
    about = "Exact convex calculus on rational polyhedra"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Input {
    /// JSON request file; `-` or absent reads standard input.
    #[arg(long = "in", value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// JSON file holding the set, instead of a `set` field.
    #[arg(long, value_name = "FILE")]
    pub set: Option<PathBuf>,
    /// The point as a JSON array, e.g. "[1,-1/2]".
    #[arg(long, value_name = "JSON", allow_hyphen_values = true)]
    pub point: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Algebraic core of a set.
    Core(Input),
    /// Algebraic closure of a set.
    Lin(Input),
    /// Minkowski gauge of an absorbing set at a point.
    Gauge(Input),
    /// Separate a set from a point, or two sets properly.
    Separate(Input),
    /// Extend a dominated functional from a subspace.
    HahnBanach(Input),
    /// Normal cone of a set at a point.
    NormalCone(Input),
    /// Coderivative of a set-valued map.
    Coderivative(Input),
    /// Subdifferential of a polyhedral function.
    Subdiff(Input),
    /// Optimal value function: value, minimizers and subdifferential.
    Marginal(Input),
    /// Run a seeded theorem suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub theorem: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Run instances one after another instead of on the thread pool.
    #[arg(long)]
    pub sequential: bool,
}

/// Output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Core(Error),
    Outcome(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Out = std::result::Result<(i32, Value), Failure>;

fn ok(v: Value) -> Out {
    Ok((EXIT_OK, v))
}

fn to_json<T: serde::Serialize + ?Sized>(v: &T) -> Value {
    serde_json::to_value(v).expect("core types serialize")
}

struct Source<'a> {
    input: &'a Input,
    stdin: &'a mut dyn Read,
}

impl Source<'_> {
    fn read_request(&mut self) -> std::result::Result<String, Failure> {
        match &self.input.input {
            Some(p) if p.as_os_str() != "-" => read_file(p),
            _ => {
                let mut s = String::new();
                self.stdin
                    .read_to_string(&mut s)
                    .map_err(|e| Failure::Usage(format!("reading standard input: {e}")))?;
                Ok(s)
            }
        }
    }

    /// The request object, or an empty one when `--set`/`--point` carry
    /// everything and no `--in` was given.
    fn request(&mut self) -> std::result::Result<Value, Failure> {
        if self.input.input.is_none() && (self.input.set.is_some() || self.input.point.is_some()) {
            return Ok(json!({}));
        }
        parse::<Value>(&self.read_request()?, "request")
    }

    fn field<T: DeserializeOwned>(
        &mut self,
        req: &Value,
        name: &str,
        flag: Option<String>,
    ) -> std::result::Result<T, Failure> {
        if let Some(text) = flag {
            return parse(&text, name);
        }
        match req.get(name) {
            Some(v) => parse(&v.to_string(), name),
            None => Err(Failure::Usage(format!("missing field `{name}`"))),
        }
    }

    fn set(&mut self, req: &Value) -> std::result::Result<HPolyhedron, Failure> {
        let flag = self.input.set.as_ref().map(read_file).transpose()?;
        self.field(req, "set", flag)
    }

    fn point(&mut self, req: &Value, name: &str) -> std::result::Result<QVector, Failure> {
        let flag = self.input.point.clone();
        self.field(req, name, flag)
    }

    /// A bare set: `--set`, or the whole request, or its `set` field.
    fn bare_set(&mut self) -> std::result::Result<HPolyhedron, Failure> {
        if let Some(p) = &self.input.set {
            return parse(&read_file(p)?, "set");
        }
        let text = self.read_request()?;
        let v: Value = parse(&text, "request")?;
        match v.get("set") {
            Some(s) => parse(&s.to_string(), "set"),
            None => parse(&text, "set"),
        }
    }
}

fn read_file(p: &PathBuf) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("reading {}: {e}", p.display())))
}

/// Deserializes with the offending JSON path in the diagnostic.
fn parse<T: DeserializeOwned>(text: &str, what: &str) -> std::result::Result<T, Failure> {
    let mut de = serde_json::Deserializer::from_str(text);
    let v = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let at = if path == "." {
            what.to_string()
        } else {
            format!("{what}.{path}")
        };
        Failure::Usage(format!("malformed input at `{at}`: {}", e.inner()))
    })?;
    de.end()
        .map_err(|e| Failure::Usage(format!("malformed input in `{what}`: {e}")))?;
    Ok(v)
}

fn separation_json(o: &SeparationOutcome) -> Out {
    match o {
        SeparationOutcome::Separated(r) => ok(json!({
            "f": to_json(&r.functional.coeffs),
            "level": to_json(&r.level),
            "upper_level": to_json(&r.upper_level),
            "witness_lo": to_json(&r.witness_lo),
            "witness_hi": to_json(&r.witness_hi),
        })),
        SeparationOutcome::Inseparable => Err(Failure::Outcome(json!({"outcome": "inseparable"}))),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HahnBanachRequest {
    p: SublinearFunc,
    /// Spanning vectors of the subspace `Y`.
    basis: Vec<QVector>,
    /// Values of `g` on the basis vectors.
    g: QVector,
    #[serde(default)]
    method: HahnBanachMethod,
}

#[derive(Deserialize, Default, Clone, Copy)]
#[serde(rename_all = "kebab-case")]
enum HahnBanachMethod {
    #[default]
    Midpoint,
    Separation,
}

fn ext_json(v: &ExtValue) -> Value {
    to_json(v)
}

fn dispatch(cmd: &Command, stdin: &mut dyn Read) -> Out {
    match cmd {
        Command::Core(i) => {
            let s = Source { input: i, stdin }.bare_set()?;
            ok(to_json(&core_of(&s)?))
        }
        Command::Lin(i) => {
            let s = Source { input: i, stdin }.bare_set()?;
            ok(to_json(&lin_of(&s)?))
        }
        Command::Gauge(i) => {
            let mut src = Source { input: i, stdin };
            let req = src.request()?;
            let s = src.set(&req)?;
            let x = src.point(&req, "point")?;
            ok(json!({"value": to_json(&gauge_eval(&s, &x)?)}))
        }
        Command::Separate(i) => {
            let mut src = Source { input: i, stdin };
            let req = src.request()?;
            if req.get("first").is_some() || req.get("second").is_some() {
                let a: HPolyhedron = src.field(&req, "first", None)?;
                let b: HPolyhedron = src.field(&req, "second", None)?;
                return separation_json(&properly_separate(&a, &b)?);
            }
            let s = src.set(&req)?;
            let x = src.point(&req, "point")?;
            separation_json(&separate_point(&s, &x)?)
        }
        Command::HahnBanach(i) => {
            let mut src = Source { input: i, stdin };
            let r: HahnBanachRequest = parse(&src.read_request()?, "request")?;
            let n = r.p.dim();
            if let Some(bad) = r.basis.iter().find(|b| b.dim() != n) {
                return Err(Failure::Core(Error::DimensionMismatch {
                    expected: n,
                    found: bad.dim(),
                }));
            }
            let basis = QMatrix::from_columns(&r.basis, n);
            let f = match r.method {
                HahnBanachMethod::Midpoint => hahn_banach_extend(&r.p, &basis, &r.g)?,
                HahnBanachMethod::Separation => hahn_banach_via_separation(&r.p, &basis, &r.g)?,
            };
            ok(json!({"f": to_json(&f.coeffs)}))
        }
        Command::NormalCone(i) => {
            let mut src = Source { input: i, stdin };
            let req = src.request()?;
            let s = src.set(&req)?;
            let x = src.point(&req, "point")?;
            match normal_cone(&s, &x)?.cone() {
                Some(c) => ok(
                    json!({"generators": to_json(c.generators()), "constraints": to_json(&c.to_h())}),
                ),
                None => Err(Failure::Outcome(json!({"outcome": "not-a-member"}))),
            }
        }
        Command::Coderivative(i) => {
            let mut src = Source { input: i, stdin };
            let req = src.request()?;
            let m: SetValuedMap = src.field(&req, "map", None)?;
            let x: QVector = src.field(&req, "x", None)?;
            let y: QVector = src.field(&req, "y", None)?;
            let g: QVector = src.field(&req, "g", None)?;
            match coderivative(&m, &x, &y, &g)? {
                Some(set) => ok(to_json(&set)),
                None => Err(Failure::Outcome(json!({"outcome": "not-in-graph"}))),
            }
        }
        Command::Subdiff(i) => {
            let mut src = Source { input: i, stdin };
            let req = src.request()?;
            let phi: PolyhedralFunction = src.field(&req, "function", None)?;
            let x = src.point(&req, "point")?;
            let d = subdifferential(&phi, &x)?;
            ok(
                json!({"at": to_json(&d.at), "value": ext_json(&evaluate(&phi, &x)?), "set": to_json(&d.set)}),
            )
        }
        Command::Marginal(i) => {
            let mut src = Source { input: i, stdin };
            let req = src.request()?;
            let phi: PolyhedralFunction = src.field(&req, "function", None)?;
            let m: SetValuedMap = src.field(&req, "map", None)?;
            let x = src.point(&req, "x")?;
            let value = marginal_value(&phi, &m, &x)?;
            if value.finite().is_none() {
                return Err(Failure::Outcome(
                    json!({"outcome": "infinite-value", "value": ext_json(&value)}),
                ));
            }
            let argmin = argmin_set(&phi, &m, &x)?;
            let y: QVector = match req.get("y") {
                Some(_) => src.field(&req, "y", None)?,
                None => argmin.relative_point()?.ok_or_else(|| {
                    Failure::Core(Error::PreconditionUnmet(
                        "the infimum is not attained".into(),
                    ))
                })?,
            };
            let sub = marginal_subdifferential(&phi, &m, &x, &y)?;
            ok(json!({
                "value": ext_json(&value),
                "argmin": to_json(&argmin),
                "y": to_json(&y),
                "subdifferential": to_json(&sub),
            }))
        }
        Command::Verify(a) => {
            let exec = if a.sequential {
                Exec::Sequential
            } else {
                Exec::default()
            };
            let v = verify_theorem_with(&a.theorem, a.seed, a.count, a.dim, exec)?;
            let code = if v.violations > 0 {
                EXIT_VIOLATIONS
            } else {
                EXIT_OK
            };
            Ok((code, to_json(&v)))
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::DimensionMismatch { .. } => "dimension-mismatch",
        Error::OpenInput(_) => "open-input",
        Error::EmptyInput(_) => "empty-input",
        Error::InvalidInput(_) => "invalid-input",
        Error::PreconditionUnmet(_) => "precondition-unmet",
        Error::NotAbsorbing => "not-absorbing",
        Error::DominationViolated { .. } => "domination-violated",
        Error::UnboundedBelow => "unbounded-below",
        Error::InfiniteValue => "infinite-value",
        Error::FmLimitExceeded { .. } => "fm-limit-exceeded",
        Error::BudgetExceeded(_) => "budget-exceeded",
    }
}

fn line(v: &Value) -> String {
    let mut s = serde_json::to_string(v).expect("json values serialize");
    s.push('\n');
    s
}

/// Runs `argv` (including the program name) against `stdin`.
pub fn run<I, S>(argv: I, stdin: &mut dyn Read) -> Response
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let (stdout, stderr) = if e.use_stderr() {
                (String::new(), text)
            } else {
                (text, String::new())
            };
            return Response {
                code,
                stdout,
                stderr,
            };
        }
    };
    match dispatch(&cli.command, stdin) {
        Ok((code, v)) => Response {
            code,
            stdout: line(&v),
            stderr: String::new(),
        },
        Err(Failure::Outcome(v)) => Response {
            code: EXIT_DOMAIN,
            stdout: line(&v),
            stderr: String::new(),
        },
        Err(Failure::Usage(msg)) => Response {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(Failure::Core(e)) => {
            let body = json!({"outcome": error_kind(&e), "message": e.to_string()});
            if e.is_domain() {
                Response {
                    code: EXIT_DOMAIN,
                    stdout: line(&body),
                    stderr: String::new(),
                }
            } else {
                let code = match e {
                    Error::FmLimitExceeded { .. } | Error::BudgetExceeded(_) => EXIT_LIMIT,
                    _ => EXIT_USAGE,
                };
                Response {
                    code,
                    stdout: String::new(),
                    stderr: format!("error: {e}\n"),
                }
            }
        }
    }
}
