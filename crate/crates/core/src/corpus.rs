//! Regression corpus of TOML fixtures.
//!
//! Each `*.toml` file describes one fixture:
//!
//! ```toml
//! check = "hh"          # pconvex, symmetrized, weight, crosscheck, hh, bounds,
//!                       # extrema, fejer, chain, reflected, refinement, double,
//!                       # fracfejer
//! expect = "holds"      # or "fails"
//! f = "x^2"
//! p = 1.0
//! a = 1.0
//! b = 3.0
//! # optional: w, alpha, x, y, name, description, [params]
//! ```
//!
//! Fixtures run in parallel; results are reported in file-name order.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::cli::{evaluate, Check, CliError, Problem, ProblemSpec, Settings, EXIT_OK};
use crate::inequalities::Term;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    Holds,
    Fails,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureFile {
    name: Option<String>,
    #[allow(dead_code)]
    description: Option<String>,
    check: Check,
    expect: Expect,
    f: Option<Spanned<String>>,
    w: Option<Spanned<String>>,
    p: f64,
    a: f64,
    b: f64,
    alpha: Option<f64>,
    x: Option<f64>,
    y: Option<f64>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
}

/// A fixture that could not be read or understood.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusError {
    pub file: String,
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for CorpusError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.file, line, self.message),
            None => write!(f, "{}: {}", self.file, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureResult {
    pub file: String,
    pub name: String,
    pub check: Check,
    pub expect: Expect,
    /// `holds`, `fails`, `nonconverged` or `error`.
    pub outcome: String,
    pub pass: bool,
    pub terms: Vec<Term>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn key_line(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|l| {
            l.trim_start()
                .strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
}

/// `line N: message` for a TOML error.
pub fn describe_toml_error(text: &str, err: &toml::de::Error) -> String {
    match err.span() {
        Some(span) => format!("line {}: {}", line_of(text, span.start), err.message()),
        None => err.message().to_string(),
    }
}

struct Prepared {
    file: String,
    name: String,
    check: Check,
    expect: Expect,
    problem: Problem,
}

fn prepare(file: &str, text: &str) -> Result<Prepared, CorpusError> {
    let err = |line: Option<usize>, message: String| CorpusError {
        file: file.to_string(),
        line,
        message,
    };
    let fx: FixtureFile = toml::from_str(text).map_err(|e| {
        err(
            e.span().map(|s| line_of(text, s.start)),
            e.message().to_string(),
        )
    })?;
    let spec = ProblemSpec {
        function_source: fx.f.as_ref().map(|s| s.get_ref().clone()),
        weight_source: fx.w.as_ref().map(|s| s.get_ref().clone()),
        params: fx.params.clone(),
        interval: Some([fx.a, fx.b]),
        p: Some(fx.p),
        alpha: fx.alpha,
        x: fx.x,
        y: fx.y,
    };
    let problem = Problem::build(&spec).map_err(|e| {
        let line = match &e {
            CliError::Lib(crate::Error::Parse(_)) | CliError::Lib(crate::Error::Binding(_)) => {
                // Attribute expression errors to whichever expression fails to parse.
                [&fx.f, &fx.w]
                    .into_iter()
                    .flatten()
                    .find(|s| crate::FuncExpr::parse(s.get_ref()).is_err())
                    .or(fx.f.as_ref())
                    .map(|s| line_of(text, s.span().start))
            }
            CliError::Lib(crate::Error::InvalidInterval { .. }) => key_line(text, "a"),
            CliError::Lib(crate::Error::InvalidP(_)) => key_line(text, "p"),
            CliError::Lib(crate::Error::InvalidOrder(_)) => key_line(text, "alpha"),
            _ => None,
        };
        err(line, e.to_string())
    })?;
    Ok(Prepared {
        file: file.to_string(),
        name: fx
            .name
            .unwrap_or_else(|| file.trim_end_matches(".toml").to_string()),
        check: fx.check,
        expect: fx.expect,
        problem,
    })
}

/// Reads every `*.toml` file of a directory, sorted by file name.
pub fn load_dir(dir: &Path) -> Result<Vec<(String, String)>, CorpusError> {
    let io = |message: String| CorpusError {
        file: dir.display().to_string(),
        line: None,
        message,
    };
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| io(e.to_string()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "toml"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let text = std::fs::read_to_string(&path).map_err(|e| CorpusError {
                file: name.clone(),
                line: None,
                message: e.to_string(),
            })?;
            Ok((name, text))
        })
        .collect()
}

macro_rules! builtin_fixtures {
    ($($file:literal),* $(,)?) => {
        vec![$(($file.to_string(), include_str!(concat!("../corpus/", $file)).to_string())),*]
    };
}

/// Fixtures shipped with the crate (the same files as `corpus/`).
pub fn builtin() -> Vec<(String, String)> {
    builtin_fixtures![
        "chain_x2_classical.toml",
        "crosscheck_neg_ln_harmonic.toml",
        "crosscheck_sin_classical.toml",
        "crosscheck_x2_p2.toml",
        "double_power_equality.toml",
        "double_shifted_square_p2.toml",
        "double_x2_classical.toml",
        "extrema_neg_ln_harmonic.toml",
        "extrema_quadratic_classical.toml",
        "family_mirrored_p2.toml",
        "family_p3_alpha4.toml",
        "family_p2_alpha3.toml",
        "family_sum_symmetrized.toml",
        "family_sum_weight.toml",
        "fejer_symmetric_weight.toml",
        "fracfejer_kernel_weight.toml",
        "fracfejer_unit_harmonic.toml",
        "fracfejer_unit_weight.toml",
        "hh_neg_ln_harmonic.toml",
        "hh_power_equality.toml",
        "hh_x2_classical.toml",
        "hh_x2_harmonic.toml",
        "bounds_cubic_p2.toml",
        "bounds_neg_ln_harmonic.toml",
        "pconvex_ln_harmonic.toml",
        "pconvex_neg_ln_harmonic.toml",
        "reflected_neg_ln_harmonic.toml",
        "refinement_neg_ln_harmonic.toml",
        "refinement_x2_classical.toml",
        "symmetrized_identity.toml",
        "symmetrized_neg_ln_harmonic.toml",
        "symmetrized_sin_classical.toml",
        "weight_identity_fails.toml",
    ]
}

/// Parses and runs fixtures. A malformed fixture aborts the run; failures of
/// individual checks are reported per fixture.
pub fn run_sources(
    sources: &[(String, String)],
    settings: &Settings,
) -> Result<Vec<FixtureResult>, CorpusError> {
    let mut sorted: Vec<&(String, String)> = sources.iter().collect();
    sorted.sort_by(|x, y| x.0.cmp(&y.0));
    let prepared = sorted
        .iter()
        .map(|(file, text)| prepare(file, text))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(prepared
        .par_iter()
        .map(|fx| run_one(fx, settings))
        .collect())
}

fn run_one(fx: &Prepared, settings: &Settings) -> FixtureResult {
    let mut result = FixtureResult {
        file: fx.file.clone(),
        name: fx.name.clone(),
        check: fx.check,
        expect: fx.expect,
        outcome: String::new(),
        pass: false,
        terms: Vec::new(),
        message: None,
    };
    match evaluate(fx.check, &fx.problem, settings, false) {
        Ok(outcome) => {
            let code = outcome.exit_code();
            result.terms = outcome.terms;
            result.outcome = if !outcome.converged {
                "nonconverged".into()
            } else if code == EXIT_OK {
                "holds".into()
            } else {
                "fails".into()
            };
            result.pass = matches!(
                (fx.expect, result.outcome.as_str()),
                (Expect::Holds, "holds") | (Expect::Fails, "fails")
            );
        }
        Err(e) => {
            result.outcome = "error".into();
            result.message = Some(e.to_string());
        }
    }
    result
}
