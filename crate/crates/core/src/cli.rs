//! Command-line front end: JSON for reports, CSV for curves.
//!
//! Exit codes: 0 success, 1 usage, 2 numerical failure, 3 domain error or
//! unsupported scale. Defaults live in [`Defaults`]; each can be overridden
//! by an environment variable and, with higher precedence, by a flag.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{closed_form_report, sum_bound, union_bound};
use crate::density::{eval_density, DensityForm};
use crate::error::Error;
use crate::extended::DEFAULT_PRECISION_DIGITS;
use crate::lowerbound::{near_one_mass, step_report_with, verify_growth_with};
use crate::montecarlo::{estimate_expected_zeros, CountMethod, TrialConfig};
use crate::quadrature::{expected_zeros, expected_zeros_real, OpenInterval, DEFAULT_ABS_TOL};
use crate::supportset::SupportSet;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

pub const ENV_TOL: &str = "KACZ_TOL";
pub const ENV_TRIALS: &str = "KACZ_TRIALS";
pub const ENV_PRECISION_DIGITS: &str = "KACZ_PRECISION_DIGITS";
/// Fixes the manifest timestamp (seconds since the epoch) for
/// byte-reproducible output.
pub const ENV_SOURCE_DATE_EPOCH: &str = "SOURCE_DATE_EPOCH";

/// Central defaults.
pub struct Defaults;

impl Defaults {
    pub const TOL: f64 = DEFAULT_ABS_TOL;
    pub const TRIALS: usize = crate::montecarlo::DEFAULT_TRIALS;
    pub const DEGREE_CAP: u64 = crate::montecarlo::DEFAULT_DEGREE_CAP;
    pub const PRECISION_DIGITS: u32 = DEFAULT_PRECISION_DIGITS;
    pub const SAMPLES: usize = 200;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: BTreeMap<String, Value>,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub timestamp: String,
}

impl RunManifest {
    fn new(command: &str, arguments: BTreeMap<String, Value>, seed: Option<u64>) -> Self {
        Self {
            command: command.into(),
            arguments,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed,
            timestamp: timestamp(),
        }
    }
}

fn timestamp() -> String {
    let fixed = std::env::var(ENV_SOURCE_DATE_EPOCH)
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|s| chrono::DateTime::from_timestamp(s, 0));
    fixed
        .unwrap_or_else(chrono::Utc::now)
        .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

#[derive(Debug, Parser)]
#[command(name = "kacz", version, about = "Expected real zeros of random sparse polynomials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    Sos,
    Norm,
    Logderiv,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundKind {
    Sqrt,
    Refined,
    Bet,
    Tail,
    Kac,
    Increment,
    Union,
    Sum,
    DenseRecursive,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expected zeros by quadrature of the density.
    Zeros(ZerosArgs),
    /// Closed-form and certificate-based upper bounds.
    Bound(BoundArgs),
    /// Monte Carlo estimate of the expected zero count.
    Mc(McArgs),
    /// Density samples on (0, 1).
    DensityCurve(CurveArgs),
    /// Checks on the lower-bound family.
    Lowerbound(LowerboundArgs),
}

#[derive(Debug, Args)]
pub struct ZerosArgs {
    /// Exponents, e.g. "0,1,4,16" or "0..64".
    #[arg(long)]
    pub set: String,
    /// "unit", "real" or "(a,b)" with 0 ≤ a < b ≤ 1.
    #[arg(long, default_value = "unit")]
    pub interval: String,
    #[arg(long, env = ENV_TOL, default_value_t = Defaults::TOL)]
    pub tol: f64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long, value_enum)]
    pub kind: BoundKind,
    /// Support size, or `n` for the dense kinds.
    #[arg(long, visible_alias = "n")]
    pub k: Option<u64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub s1: Option<String>,
    #[arg(long)]
    pub s2: Option<String>,
    /// Quadrature tolerance for the zero counts the union and sum kinds need.
    #[arg(long, env = ENV_TOL, default_value_t = Defaults::TOL)]
    pub tol: f64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long)]
    pub set: String,
    /// "unit" or "(a,b)" with 0 ≤ a < b ≤ 1.
    #[arg(long, default_value = "unit")]
    pub interval: String,
    #[arg(long, env = ENV_TRIALS, default_value_t = Defaults::TRIALS)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "exact")]
    pub method: Method,
    #[arg(long, default_value_t = Defaults::DEGREE_CAP)]
    pub degree_cap: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub set: String,
    #[arg(long, default_value_t = Defaults::SAMPLES)]
    pub samples: usize,
    #[arg(long, value_enum, default_value = "sos")]
    pub form: FormArg,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct LowerboundArgs {
    #[arg(long)]
    pub kmax: u32,
    #[arg(long, env = ENV_TOL, default_value_t = Defaults::TOL)]
    pub tol: f64,
    #[arg(long, env = ENV_PRECISION_DIGITS, default_value_t = Defaults::PRECISION_DIGITS)]
    pub precision_digits: u32,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

/// Result of one invocation: exit code plus what goes to stdout / stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(m) => Failure::Usage(m),
            other => Failure::Lib(other),
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) => EXIT_USAGE,
        Error::NumericalFailure { .. } => EXIT_NUMERICAL,
        Error::Domain(_) | Error::UnsupportedScale(_) => EXIT_DOMAIN,
    }
}

/// Parses and runs one command line (`args[0]` is the program name).
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let result = match cli.command {
        Command::Zeros(a) => cmd_zeros(&a),
        Command::Bound(a) => cmd_bound(&a),
        Command::Mc(a) => cmd_mc(&a),
        Command::DensityCurve(a) => cmd_density_curve(&a),
        Command::Lowerbound(a) => cmd_lowerbound(&a),
    };
    match result {
        Ok((code, stdout)) => Outcome { code, stdout, stderr: String::new() },
        Err(Failure::Usage(m)) => Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {m}\n"),
        },
        Err(Failure::Lib(e)) => Outcome {
            code: exit_code(&e),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

type CmdResult = std::result::Result<(i32, String), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn parse_set(spec: &str) -> std::result::Result<SupportSet, Failure> {
    spec.parse::<SupportSet>().map_err(|e| match e {
        Error::Domain(m) => usage(m),
        other => other.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum IntervalArg {
    Open(OpenInterval),
    Real,
}

fn parse_interval(spec: &str) -> std::result::Result<IntervalArg, Failure> {
    let s = spec.trim();
    match s {
        "unit" => return Ok(IntervalArg::Open(OpenInterval::UNIT)),
        "real" => return Ok(IntervalArg::Real),
        _ => {}
    }
    let inner = s
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| usage(format!("interval {spec:?}: expected unit, real or (a,b)")))?;
    let (a, b) = inner
        .split_once(',')
        .ok_or_else(|| usage(format!("interval {spec:?}: expected (a,b)")))?;
    let parse = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|_| usage(format!("interval {spec:?}: invalid endpoint {x:?}")))
    };
    let (a, b) = (parse(a)?, parse(b)?);
    OpenInterval::new(a, b)
        .map(IntervalArg::Open)
        .map_err(|_| usage(format!("interval {spec:?} is not an open subinterval of (0,1)")))
}

fn check_tol(tol: f64) -> std::result::Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("tolerance {tol} must be positive")))
    }
}

fn args_map(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn emit_json(manifest: RunManifest, mut payload: Value) -> String {
    payload["manifest"] = serde_json::to_value(manifest).expect("manifest serializes");
    let mut s = serde_json::to_string_pretty(&payload).expect("payload serializes");
    s.push('\n');
    s
}

fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

fn cmd_zeros(a: &ZerosArgs) -> CmdResult {
    let set = parse_set(&a.set)?;
    let interval = parse_interval(&a.interval)?;
    check_tol(a.tol)?;
    let r = match interval {
        IntervalArg::Open(iv) => expected_zeros(&set, &iv, a.tol)?,
        IntervalArg::Real => expected_zeros_real(&set, a.tol)?,
    };
    let out = match a.format {
        Format::Json => emit_json(
            RunManifest::new(
                "zeros",
                args_map(&[
                    ("set", json!(set.to_string())),
                    ("interval", json!(a.interval)),
                    ("tol", json!(a.tol)),
                ]),
                None,
            ),
            json!({
                "value": r.value,
                "abs_error_estimate": r.abs_error_estimate,
                "evaluations": r.evaluations,
            }),
        ),
        Format::Csv => csv(
            &["value", "abs_error_estimate", "evaluations"],
            &[vec![r.value.to_string(), r.abs_error_estimate.to_string(), r.evaluations.to_string()]],
        ),
    };
    Ok((EXIT_OK, out))
}

fn need_set(v: &Option<String>, name: &str) -> std::result::Result<SupportSet, Failure> {
    parse_set(v.as_deref().ok_or_else(|| usage(format!("--{name} is required")))?)
}

fn cmd_bound(a: &BoundArgs) -> CmdResult {
    check_tol(a.tol)?;
    let kind = a.kind.to_possible_value().expect("named").get_name().to_string();
    let mut arguments = args_map(&[("kind", json!(kind))]);
    let payload = match a.kind {
        BoundKind::Union => {
            let (s1, s2) = (need_set(&a.s1, "s1")?, need_set(&a.s2, "s2")?);
            let z1 = expected_zeros(&s1, &OpenInterval::UNIT, a.tol)?.value;
            let z2 = expected_zeros(&s2, &OpenInterval::UNIT, a.tol)?.value;
            let r = union_bound(&s1, &s2, z1, z2)?;
            arguments.insert("s1".into(), json!(s1.to_string()));
            arguments.insert("s2".into(), json!(s2.to_string()));
            arguments.insert("tol".into(), json!(a.tol));
            json!({
                "value": r.fine.value,
                "fine": r.fine,
                "coarse": r.coarse,
                "m": r.m,
                "arctan_terms": r.arctan_terms,
                "critical_points": r.critical_points,
                "z1": z1,
                "z2": z2,
            })
        }
        BoundKind::Sum => {
            let (s1, s2) = (need_set(&a.s1, "s1")?, need_set(&a.s2, "s2")?);
            let (sum, collision_free) = s1.sum_sets(&s2)?;
            if !collision_free {
                return Err(Error::domain("S1 + S2 has colliding sums").into());
            }
            let z1 = expected_zeros(&s1, &OpenInterval::UNIT, a.tol)?.value;
            let z2 = expected_zeros(&s2, &OpenInterval::UNIT, a.tol)?.value;
            arguments.insert("s1".into(), json!(s1.to_string()));
            arguments.insert("s2".into(), json!(s2.to_string()));
            arguments.insert("tol".into(), json!(a.tol));
            json!({
                "value": sum_bound(z1, z2)?,
                "z1": z1,
                "z2": z2,
                "sum_set_size": sum.len(),
            })
        }
        _ => {
            let r = closed_form_report(&kind, a.k, a.eps)?;
            if let Some(k) = a.k {
                arguments.insert("k".into(), json!(k));
            }
            if let Some(e) = a.eps {
                arguments.insert("eps".into(), json!(e));
            }
            let mut v = serde_json::to_value(&r).expect("report serializes");
            v["value"] = json!(r.value);
            v
        }
    };
    let out = match a.format {
        Format::Json => emit_json(RunManifest::new("bound", arguments, None), payload),
        Format::Csv => csv(&["kind", "value"], &[vec![kind, payload["value"].to_string()]]),
    };
    Ok((EXIT_OK, out))
}

fn cmd_mc(a: &McArgs) -> CmdResult {
    let set = parse_set(&a.set)?;
    let interval = match parse_interval(&a.interval)? {
        IntervalArg::Open(iv) => iv,
        IntervalArg::Real => return Err(usage("mc supports only subintervals of (0,1)")),
    };
    if a.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let method = match a.method {
        Method::Exact => CountMethod::ExactSturm,
        Method::Grid => CountMethod::GridSignChange,
    };
    let cfg = TrialConfig::new(a.seed, a.trials, interval)
        .with_method(method)
        .with_degree_cap(a.degree_cap);
    let r = estimate_expected_zeros(&set, &cfg)?;
    let out = match a.format {
        Format::Json => emit_json(
            RunManifest::new(
                "mc",
                args_map(&[
                    ("set", json!(set.to_string())),
                    ("interval", json!(a.interval)),
                    ("trials", json!(a.trials)),
                    ("method", json!(method)),
                    ("degree_cap", json!(a.degree_cap)),
                ]),
                Some(a.seed),
            ),
            serde_json::to_value(&r).expect("report serializes"),
        ),
        Format::Csv => csv(
            &["mean", "sample_variance", "ci95_halfwidth", "trials_run", "heuristic"],
            &[vec![
                r.mean.to_string(),
                r.sample_variance.to_string(),
                r.ci95_halfwidth.to_string(),
                r.trials_run.to_string(),
                r.heuristic.to_string(),
            ]],
        ),
    };
    Ok((EXIT_OK, out))
}

fn cmd_density_curve(a: &CurveArgs) -> CmdResult {
    let set = parse_set(&a.set)?;
    if a.samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    let forms: Vec<DensityForm> = match a.form {
        FormArg::Sos => vec![DensityForm::SumOfSquaresForm],
        FormArg::Norm => vec![DensityForm::NormForm],
        FormArg::Logderiv => vec![DensityForm::LogDerivForm],
        FormArg::All => DensityForm::ALL.to_vec(),
    };
    let n = a.samples as f64;
    let mut rows = Vec::with_capacity(a.samples);
    for i in 0..a.samples {
        let t = (i as f64 + 0.5) / n;
        let rhos = forms
            .iter()
            .map(|&f| eval_density(&set, t, f))
            .collect::<crate::Result<Vec<_>>>()?;
        rows.push((t, rhos));
    }
    let names: Vec<String> = if forms.len() == 1 {
        vec!["rho".into()]
    } else {
        forms.iter().map(|f| format!("rho_{}", f.name())).collect()
    };
    let out = match a.format {
        Format::Csv => {
            let mut s = String::from("t");
            for n in &names {
                write!(s, ",{n}").expect("string write");
            }
            s.push('\n');
            for (t, rhos) in &rows {
                write!(s, "{t}").expect("string write");
                for r in rhos {
                    write!(s, ",{r}").expect("string write");
                }
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let forms_json: Vec<&str> = forms.iter().map(|f| f.name()).collect();
            emit_json(
                RunManifest::new(
                    "density-curve",
                    args_map(&[
                        ("set", json!(set.to_string())),
                        ("samples", json!(a.samples)),
                        ("form", json!(forms_json)),
                    ]),
                    None,
                ),
                json!({
                    "columns": names,
                    "t": rows.iter().map(|r| r.0).collect::<Vec<_>>(),
                    "rho": rows.iter().map(|r| r.1.clone()).collect::<Vec<_>>(),
                }),
            )
        }
    };
    Ok((EXIT_OK, out))
}

fn cmd_lowerbound(a: &LowerboundArgs) -> CmdResult {
    check_tol(a.tol)?;
    let table = verify_growth_with(a.kmax, a.tol, a.precision_digits)?;
    let steps = (1..=a.kmax)
        .map(|k| step_report_with(k, a.precision_digits))
        .collect::<crate::Result<Vec<_>>>()?;
    let near_one = (1..=a.kmax)
        .map(|k| near_one_mass(k, a.tol))
        .collect::<crate::Result<Vec<_>>>()?;
    let code = if table.strictly_increasing { EXIT_OK } else { EXIT_NUMERICAL };
    let out = match a.format {
        Format::Json => emit_json(
            RunManifest::new(
                "lowerbound",
                args_map(&[
                    ("kmax", json!(a.kmax)),
                    ("tol", json!(a.tol)),
                    ("precision_digits", json!(a.precision_digits)),
                ]),
                None,
            ),
            json!({
                "growth": table,
                "steps": steps,
                "near_one_mass": near_one,
            }),
        ),
        Format::Csv => csv(
            &["k", "z", "ratio_sqrt_k", "upper_cap", "boundary_mass", "tail_leak", "tail_leak_cap", "g_at_boundary", "step_gain"],
            &table
                .rows
                .iter()
                .zip(&steps)
                .map(|(r, s)| {
                    vec![
                        r.k.to_string(),
                        r.z.to_string(),
                        r.ratio_sqrt_k.to_string(),
                        r.upper_cap.to_string(),
                        s.boundary_mass.to_string(),
                        s.tail_leak.to_string(),
                        s.tail_leak_cap.to_string(),
                        s.g_at_boundary.to_string(),
                        s.step_gain.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
    };
    Ok((code, out))
}
