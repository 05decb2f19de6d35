//! Command line front end.
//!
//! Exit codes: 0 when every requested claim holds, 1 when a checked claim
//! fails, 2 for usage, parse and input errors, 3 when a quadrature did not
//! converge. Settings are resolved as explicit flag, then the
//! `SYMMCONV_QUAD_TOL` environment variable (quadrature tolerance only), then
//! the `--config` file, then built-in defaults.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{
    check_p_convex, check_p_symmetric_weight, check_symmetrized_p_convex, crosscheck_composition,
    u_grid, ConvexityVerdict, GridSpec,
};
use crate::corpus;
use crate::error::Error;
use crate::expr::{BoundExpr, FuncExpr, ParamBindings, Univariate};
use crate::inequalities::{
    fejer_fractional, fejer_weighted, hh_subinterval_chain, hh_symmetrized,
    pconvex_double_refinement, refinement_integral, reflected_pair_bound, transform_bounds,
    transform_extrema, InequalityReport, Term, CHAIN_TOL,
};
use crate::integrate::{frac_integral_left, frac_integral_right, FracOrder, QuadConfig};
use crate::meanspace::{p_antisym_transform, p_sym_transform, Interval, PParam};
use crate::report::{Envelope, OutputFormat};

pub const QUAD_TOL_ENV: &str = "SYMMCONV_QUAD_TOL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "symmconv",
    version,
    about = "Numerical checks of p-convexity, symmetrized p-convexity and Hermite–Hadamard type inequalities"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML file with default settings; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Absolute and relative quadrature tolerance.
    #[arg(long, global = true)]
    pub quad_tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_subdivisions: Option<usize>,
    #[arg(long, global = true)]
    pub grid_xy: Option<usize>,
    #[arg(long, global = true)]
    pub grid_t: Option<usize>,
    #[arg(long, global = true)]
    pub refine_rounds: Option<usize>,
    /// Record wall-clock time in the report (makes output non-reproducible).
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ProblemArgs {
    /// Function of x, e.g. "x^2" or "-ln(x)".
    #[arg(long = "f", allow_hyphen_values = true)]
    pub f: Option<String>,
    /// Weight function of x.
    #[arg(long = "w", allow_hyphen_values = true)]
    pub w: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    /// Interval endpoints as "a,b".
    #[arg(long, value_parser = parse_pair)]
    pub interval: Option<Pair>,
    /// Fractional order.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub y: Option<f64>,
    /// Parameter binding "name=value"; may be repeated.
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<Param>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair(pub f64, pub f64);

#[derive(Debug, Clone, PartialEq)]
pub struct Param(pub String, pub f64);

fn parse_pair(s: &str) -> Result<Pair, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => {
            let a = a
                .parse::<f64>()
                .map_err(|e| format!("bad endpoint {a:?}: {e}"))?;
            let b = b
                .parse::<f64>()
                .map_err(|e| format!("bad endpoint {b:?}: {e}"))?;
            Ok(Pair(a, b))
        }
        _ => Err(format!("expected \"a,b\", got {s:?}")),
    }
}

fn parse_param(s: &str) -> Result<Param, String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got {s:?}"))?;
    let value = value
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("bad value for {name}: {e}"))?;
    Ok(Param(name.trim().to_string(), value))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide p-convexity, symmetrized p-convexity or weight p-symmetry.
    Check {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Check the p-symmetrical transform (same as --kind symmetrized).
        #[arg(long, conflicts_with = "kind")]
        symmetrized: bool,
        #[arg(long, value_enum)]
        kind: Option<Check>,
    },
    /// Evaluate an inequality chain.
    Verify {
        #[arg(value_enum)]
        chain: Check,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Also decide symmetrized p-convexity of f and record the outcome.
        #[arg(long)]
        check_hypothesis: bool,
    },
    /// Tabulate f and its (anti) p-symmetrical transforms.
    Transform {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Left or right fractional integral of h.
    Fracint {
        #[arg(long, allow_hyphen_values = true)]
        h: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        base: f64,
        #[arg(long, allow_negative_numbers = true)]
        at: f64,
        #[arg(long, value_enum)]
        side: Side,
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<Param>,
    },
    /// Run every fixture in a directory (or the built-in corpus).
    Corpus {
        dir: Option<PathBuf>,
        #[arg(long, conflicts_with = "dir")]
        builtin: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Pconvex,
    Symmetrized,
    Weight,
    Crosscheck,
    Hh,
    Bounds,
    Extrema,
    Fejer,
    Chain,
    Reflected,
    Refinement,
    Double,
    Fracfejer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub f: Option<String>,
    pub w: Option<String>,
    pub p: Option<f64>,
    pub interval: Option<[f64; 2]>,
    pub alpha: Option<f64>,
    pub x: Option<f64>,
    pub y: Option<f64>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub quad_tol: Option<f64>,
    pub max_subdivisions: Option<usize>,
    pub grid_xy: Option<usize>,
    pub grid_t: Option<usize>,
    pub refine_rounds: Option<usize>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(Error),
    Io(String),
    Corpus(corpus::CorpusError),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Lib(e) => e.kind(),
            CliError::Io(_) => "io",
            CliError::Corpus(_) => "corpus",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Corpus(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<crate::expr::EvalError> for CliError {
    fn from(e: crate::expr::EvalError) -> Self {
        CliError::Lib(e.into())
    }
}

/// Settings shared by every command after merging flags, environment and
/// config file.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub grid: GridSpec,
    pub quad: QuadConfig,
    pub output_format: OutputFormat,
}

/// Fully resolved inputs of a single check or chain.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ProblemSpec {
    pub function_source: Option<String>,
    pub weight_source: Option<String>,
    pub params: BTreeMap<String, f64>,
    pub interval: Option<[f64; 2]>,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub x: Option<f64>,
    pub y: Option<f64>,
}

/// Validated problem ready for evaluation.
pub struct Problem {
    pub f: Option<BoundExpr>,
    pub w: Option<BoundExpr>,
    pub interval: Interval,
    pub p: PParam,
    pub alpha: Option<FracOrder>,
    pub x: Option<f64>,
    pub y: Option<f64>,
}

impl Problem {
    /// Parses and binds the expressions. `p`, `a`, `b` and `alpha` are bound
    /// from the run settings when an expression uses them and no explicit
    /// parameter of that name is given.
    pub fn build(spec: &ProblemSpec) -> Result<Problem, CliError> {
        let [a, b] = spec
            .interval
            .ok_or_else(|| CliError::Usage("missing --interval a,b".into()))?;
        let interval = Interval::new(a, b)?;
        let p = PParam::new(
            spec.p
                .ok_or_else(|| CliError::Usage("missing --p".into()))?,
        )?;
        let alpha = spec.alpha.map(FracOrder::new).transpose()?;
        let mut auto = vec![("p", p.value()), ("a", a), ("b", b)];
        if let Some(al) = alpha {
            auto.push(("alpha", al.value()));
        }
        let bind = |src: &Option<String>| -> Result<Option<BoundExpr>, CliError> {
            src.as_deref()
                .map(|s| bind_expression(s, &spec.params, &auto))
                .transpose()
        };
        Ok(Problem {
            f: bind(&spec.function_source)?,
            w: bind(&spec.weight_source)?,
            interval,
            p,
            alpha,
            x: spec.x,
            y: spec.y,
        })
    }

    fn f(&self) -> Result<&BoundExpr, CliError> {
        self.f
            .as_ref()
            .ok_or_else(|| CliError::Usage("missing --f".into()))
    }

    fn w(&self) -> Result<&BoundExpr, CliError> {
        self.w
            .as_ref()
            .ok_or_else(|| CliError::Usage("missing --w (weight function)".into()))
    }

    fn x(&self) -> Result<f64, CliError> {
        self.x.ok_or_else(|| CliError::Usage("missing --x".into()))
    }

    fn y(&self) -> Result<f64, CliError> {
        self.y.ok_or_else(|| CliError::Usage("missing --y".into()))
    }

    fn alpha(&self) -> Result<FracOrder, CliError> {
        self.alpha
            .ok_or_else(|| CliError::Usage("missing --alpha".into()))
    }
}

pub fn bind_expression(
    source: &str,
    explicit: &BTreeMap<String, f64>,
    auto: &[(&str, f64)],
) -> Result<BoundExpr, CliError> {
    let expr = FuncExpr::parse(source).map_err(Error::from)?;
    let used = expr.params();
    let mut bindings = ParamBindings::new();
    for (k, v) in explicit {
        bindings.insert(k, *v).map_err(Error::from)?;
    }
    for (k, v) in auto {
        if used.contains(*k) && !bindings.contains(k) {
            bindings.insert(k, *v).map_err(Error::from)?;
        }
    }
    Ok(expr.bind(&bindings)?)
}

/// Numbers produced by one check or chain, ready for the envelope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub terms: Vec<Term>,
    pub margins: Vec<f64>,
    pub holds: bool,
    pub converged: bool,
    pub witness: Option<Value>,
    pub details: Value,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn from_report(report: InequalityReport) -> Outcome {
        let witness = report
            .margins
            .iter()
            .position(|&m| m < -CHAIN_TOL)
            .map(|i| {
                json!({
                    "link": i,
                    "left": report.terms[i].label,
                    "right": report.terms[i + 1].label,
                    "margin": report.margins[i],
                })
            });
        let mut warnings = Vec::new();
        if !report.converged {
            warnings.push("a quadrature did not reach the requested tolerance".to_string());
        }
        if report.hypothesis_verified == Some(false) {
            warnings
                .push("hypothesis not verified: f is not symmetrized p-convex on the grid".into());
        }
        Outcome {
            terms: report.terms.clone(),
            margins: report.margins.clone(),
            holds: report.holds,
            converged: report.converged,
            witness,
            details: to_value(&report),
            warnings,
        }
    }

    fn from_verdict(verdict: ConvexityVerdict) -> Outcome {
        Outcome {
            terms: vec![term("worst_defect", verdict.worst_defect)],
            margins: Vec::new(),
            holds: verdict.holds,
            converged: true,
            witness: verdict.witness.map(|w| to_value(&w)),
            details: to_value(&verdict),
            warnings: Vec::new(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        if !self.converged {
            EXIT_NONCONVERGENCE
        } else if !self.holds {
            EXIT_FAILED
        } else {
            EXIT_OK
        }
    }
}

fn term(label: &str, value: f64) -> Term {
    Term {
        label: label.to_string(),
        value,
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// Runs one check or chain on a validated problem.
pub fn evaluate(
    check: Check,
    problem: &Problem,
    settings: &Settings,
    check_hypothesis: bool,
) -> Result<Outcome, CliError> {
    let (i, p, grid, quad) = (&problem.interval, problem.p, &settings.grid, &settings.quad);
    let report = match check {
        Check::Pconvex => {
            return Ok(Outcome::from_verdict(check_p_convex(
                problem.f()?,
                i,
                p,
                grid,
            )?))
        }
        Check::Symmetrized => {
            return Ok(Outcome::from_verdict(check_symmetrized_p_convex(
                problem.f()?,
                i,
                p,
                grid,
            )?))
        }
        Check::Weight => {
            let v = check_p_symmetric_weight(problem.w()?, i, p, grid)?;
            return Ok(Outcome {
                terms: vec![term("worst_asymmetry", v.worst_asymmetry)],
                margins: Vec::new(),
                holds: v.holds,
                converged: true,
                witness: v.witness.map(|x| json!({ "x": x })),
                details: to_value(&v),
                warnings: Vec::new(),
            });
        }
        Check::Crosscheck => {
            let c = crosscheck_composition(problem.f()?, i, p, grid)?;
            return Ok(Outcome {
                terms: vec![
                    term("direct_worst_defect", c.direct.worst_defect),
                    term("composed_worst_defect", c.composed.worst_defect),
                ],
                margins: Vec::new(),
                holds: c.agree,
                converged: true,
                witness: None,
                details: to_value(&c),
                warnings: Vec::new(),
            });
        }
        Check::Extrema => {
            let e = transform_extrema(problem.f()?, i, p, grid)?;
            let terms = vec![
                term("f(p_midpoint)", e.expected_inf),
                term("grid_inf_P", e.inf),
                term("grid_sup_P", e.sup),
                term("endpoint_average", e.expected_sup),
            ];
            let margins: Vec<f64> = terms.windows(2).map(|w| w[1].value - w[0].value).collect();
            let holds = margins.iter().all(|&m| m >= -CHAIN_TOL);
            return Ok(Outcome {
                terms,
                margins,
                holds,
                converged: true,
                witness: None,
                details: to_value(&e),
                warnings: Vec::new(),
            });
        }
        Check::Hh => hh_symmetrized(problem.f()?, i, p, quad)?,
        Check::Bounds => transform_bounds(problem.f()?, i, p, problem.x()?)?,
        Check::Fejer => fejer_weighted(problem.f()?, problem.w()?, i, p, quad, grid)?,
        Check::Chain => hh_subinterval_chain(problem.f()?, i, p, problem.x()?, problem.y()?, quad)?,
        Check::Reflected => reflected_pair_bound(problem.f()?, i, p, problem.x()?, quad)?,
        Check::Refinement => refinement_integral(problem.f()?, i, p, quad)?,
        Check::Double => pconvex_double_refinement(problem.f()?, i, p, quad)?,
        Check::Fracfejer => fejer_fractional(
            problem.f()?,
            problem.w()?,
            i,
            p,
            problem.alpha()?,
            quad,
            grid,
        )?,
    };
    let report = if check_hypothesis {
        let verdict = check_symmetrized_p_convex(problem.f()?, i, p, grid)?;
        report.with_hypothesis(verdict.holds)
    } else {
        report
    };
    Ok(Outcome::from_report(report))
}

fn load_config(path: &Option<PathBuf>) -> Result<ConfigFile, CliError> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| {
        CliError::Usage(format!(
            "{}: {}",
            path.display(),
            corpus::describe_toml_error(&text, &e)
        ))
    })
}

fn env_quad_tol() -> Result<Option<f64>, CliError> {
    match std::env::var(QUAD_TOL_ENV) {
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .map(Some)
            .map_err(|e| CliError::Usage(format!("{QUAD_TOL_ENV}={v:?}: {e}"))),
        Err(_) => Ok(None),
    }
}

pub fn resolve_settings(global: &GlobalArgs, file: &ConfigFile) -> Result<Settings, CliError> {
    let defaults = GridSpec::default();
    let grid = GridSpec::new(
        global
            .grid_xy
            .or(file.grid_xy)
            .unwrap_or(defaults.xy_points),
        global.grid_t.or(file.grid_t).unwrap_or(defaults.t_points),
        global
            .refine_rounds
            .or(file.refine_rounds)
            .unwrap_or(defaults.refine_rounds),
    )?;
    let default_quad = QuadConfig::default();
    let tol = match global.quad_tol {
        Some(t) => Some(t),
        None => env_quad_tol()?.or(file.quad_tol),
    };
    let max_sub = global
        .max_subdivisions
        .or(file.max_subdivisions)
        .unwrap_or(default_quad.max_subdivisions);
    let quad = match tol {
        Some(t) => QuadConfig::new(t, t, max_sub)?,
        None => QuadConfig::new(default_quad.abs_tol, default_quad.rel_tol, max_sub)?,
    };
    Ok(Settings {
        grid,
        quad,
        output_format: global.format.or(file.format).unwrap_or(OutputFormat::Json),
    })
}

fn merge_problem(args: &ProblemArgs, file: &ConfigFile) -> ProblemSpec {
    let mut params = file.params.clone();
    for Param(k, v) in &args.params {
        params.insert(k.clone(), *v);
    }
    ProblemSpec {
        function_source: args.f.clone().or_else(|| file.f.clone()),
        weight_source: args.w.clone().or_else(|| file.w.clone()),
        params,
        interval: args.interval.map(|Pair(a, b)| [a, b]).or(file.interval),
        p: args.p.or(file.p),
        alpha: args.alpha.or(file.alpha),
        x: args.x.or(file.x),
        y: args.y.or(file.y),
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Check { .. } => "check",
        Command::Verify { .. } => "verify",
        Command::Transform { .. } => "transform",
        Command::Fracint { .. } => "fracint",
        Command::Corpus { .. } => "corpus",
    }
}

/// Result of running one CLI invocation.
pub struct Run {
    pub envelope: Envelope,
    pub format: OutputFormat,
    pub exit_code: i32,
    pub output: Option<PathBuf>,
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Run {
    let name = command_name(&cli.command);
    let started = Instant::now();
    let mut format = cli.global.format.unwrap_or(OutputFormat::Json);
    let result = load_config(&cli.global.config).and_then(|file| {
        let settings = resolve_settings(&cli.global, &file)?;
        format = settings.output_format;
        execute(&cli.command, &file, &settings)
    });
    let (mut envelope, exit_code) = match result {
        Ok(pair) => pair,
        Err(e) => {
            let code = EXIT_USAGE;
            (
                Envelope::failure(name, Value::Null, e.kind(), e.to_string()),
                code,
            )
        }
    };
    if cli.global.timings {
        envelope.timings_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    }
    Run {
        envelope,
        format,
        exit_code,
        output: cli.global.output.clone(),
    }
}

fn execute(
    command: &Command,
    file: &ConfigFile,
    settings: &Settings,
) -> Result<(Envelope, i32), CliError> {
    let name = command_name(command);
    match command {
        Command::Check {
            problem,
            symmetrized,
            kind,
        } => {
            let check = match (kind, symmetrized) {
                (Some(k), _) => *k,
                (None, true) => Check::Symmetrized,
                (None, false) => Check::Pconvex,
            };
            let spec = merge_problem(problem, file);
            single(name, check, &spec, settings, false)
        }
        Command::Verify {
            chain,
            problem,
            check_hypothesis,
        } => {
            let spec = merge_problem(problem, file);
            single(name, *chain, &spec, settings, *check_hypothesis)
        }
        Command::Transform { problem, points } => {
            let spec = merge_problem(problem, file);
            transform_curve(&spec, settings, *points)
        }
        Command::Fracint {
            h,
            alpha,
            base,
            at,
            side,
            params,
        } => {
            let explicit: BTreeMap<String, f64> =
                params.iter().map(|Param(k, v)| (k.clone(), *v)).collect();
            let order = FracOrder::new(*alpha)?;
            let h_expr = bind_expression(h, &explicit, &[("alpha", *alpha)])?;
            let integral = match side {
                Side::Left => frac_integral_left(&h_expr, *base, *at, order, &settings.quad)?,
                Side::Right => frac_integral_right(&h_expr, *base, *at, order, &settings.quad)?,
            };
            let config = json!({
                "command": name,
                "h": h,
                "params": explicit,
                "alpha": alpha,
                "base": base,
                "at": at,
                "side": side,
                "quad": settings.quad,
                "output_format": settings.output_format,
            });
            let mut env = Envelope::new(name, config);
            env.terms = vec![term("value", integral.value)];
            env.details = to_value(&integral);
            let code = if integral.converged {
                EXIT_OK
            } else {
                env.warnings
                    .push("the quadrature did not reach the requested tolerance".into());
                EXIT_NONCONVERGENCE
            };
            Ok((env, code))
        }
        Command::Corpus { dir, builtin } => {
            let sources = match (dir, builtin) {
                (Some(d), _) => corpus::load_dir(d).map_err(CliError::Corpus)?,
                (None, true) => corpus::builtin(),
                (None, false) => {
                    return Err(CliError::Usage(
                        "corpus needs a directory or --builtin".into(),
                    ))
                }
            };
            let results = corpus::run_sources(&sources, settings).map_err(CliError::Corpus)?;
            let failed = results.iter().filter(|r| !r.pass).count();
            let config = json!({
                "command": name,
                "source": dir.as_ref().map(|d| d.display().to_string()).unwrap_or_else(|| "builtin".into()),
                "grid": settings.grid,
                "quad": settings.quad,
                "output_format": settings.output_format,
            });
            let mut env = Envelope::new(name, config);
            env.terms = vec![
                term("fixtures", results.len() as f64),
                term("passed", (results.len() - failed) as f64),
                term("failed", failed as f64),
            ];
            env.holds = Some(failed == 0);
            env.details = json!({ "fixtures": results });
            Ok((env, if failed == 0 { EXIT_OK } else { EXIT_FAILED }))
        }
    }
}

fn problem_config(
    name: &str,
    check: Option<Check>,
    spec: &ProblemSpec,
    settings: &Settings,
) -> Value {
    json!({
        "command": name,
        "check": check,
        "function_source": spec.function_source,
        "weight_source": spec.weight_source,
        "params": spec.params,
        "interval": spec.interval,
        "p": spec.p,
        "alpha": spec.alpha,
        "x": spec.x,
        "y": spec.y,
        "grid": settings.grid,
        "quad": settings.quad,
        "output_format": settings.output_format,
    })
}

fn single(
    name: &str,
    check: Check,
    spec: &ProblemSpec,
    settings: &Settings,
    check_hypothesis: bool,
) -> Result<(Envelope, i32), CliError> {
    let config = problem_config(name, Some(check), spec, settings);
    let problem = Problem::build(spec)?;
    let outcome = evaluate(check, &problem, settings, check_hypothesis)?;
    let code = outcome.exit_code();
    let mut env = Envelope::new(name, config);
    env.terms = outcome.terms;
    env.margins = outcome.margins;
    env.holds = Some(outcome.holds);
    env.witness = outcome.witness;
    env.details = outcome.details;
    env.warnings = outcome.warnings;
    Ok((env, code))
}

fn transform_curve(
    spec: &ProblemSpec,
    settings: &Settings,
    points: usize,
) -> Result<(Envelope, i32), CliError> {
    if points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let config = problem_config("transform", None, spec, settings);
    let problem = Problem::build(spec)?;
    let f = problem.f()?;
    let sym = p_sym_transform(f, problem.interval, problem.p);
    let anti = p_antisym_transform(f, problem.interval, problem.p);
    let mut rows = Vec::with_capacity(points);
    for (x, _) in u_grid(&problem.interval, problem.p, points) {
        rows.push(json!({
            "x": x,
            "f": f.eval(x)?,
            "P": sym.eval(x)?,
            "AP": anti.eval(x)?,
        }));
    }
    let mut env = Envelope::new("transform", config);
    env.details = json!({ "curve": rows });
    Ok((env, EXIT_OK))
}

/// Parses arguments, runs, writes output. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            eprint!("{e}");
            let env = Envelope::failure("", Value::Null, "usage", e.kind().to_string());
            print!("{}", env.render(OutputFormat::Json));
            return EXIT_USAGE;
        }
    };
    let outcome = run(&cli);
    if let Some(err) = &outcome.envelope.error {
        eprintln!("error: {}", err.message);
    }
    let text = outcome.envelope.render(outcome.format);
    match &outcome.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
        }
        None => print!("{text}"),
    }
    outcome.exit_code
}
