//! Hermite–Hadamard and Fejér type chains evaluated as numbers.
//!
//! Every function returns an [`InequalityReport`] whose `terms` are listed from
//! the smallest side of the chain to the largest. A chain holds when every
//! consecutive margin (right minus left) is at least `-CHAIN_TOL`.
//!
//! The nested integrals are evaluated in u-space (`u = x^p`), where the
//! measure `p x^(p-1) dx` becomes `du` and the p-reflection becomes
//! `u -> a^p + b^p - u`.

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    check_p_symmetric_weight, u_grid, weight_minimum, GridSpec, SymmetryVerdict,
};
use crate::error::{Error, Result};
use crate::expr::{from_fn, EvalError, Univariate};
use crate::integrate::{
    frac_integral_left, frac_integral_right, integrate_adaptive, p_measure_integral,
    p_weighted_integral, FracOrder, GaussLegendre, Integral, QuadConfig,
};
use crate::meanspace::{p_midpoint, p_reflect, p_sym_transform, Interval, PParam};

pub const CHAIN_TOL: f64 = 1e-7;
/// Radius (in u-space) around the p-midpoint where the reflected-pair mean is
/// replaced by its limit `f(p_midpoint)`.
pub const MIDPOINT_BAND: f64 = 1e-4;
/// Half-width (in u-space) of the diagonal band of the double integrals.
pub const DIAGONAL_BAND: f64 = 1e-6;
pub const MIN_SUBINTERVAL: f64 = 1e-12;
pub const MIN_REFLECTED_GAP: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub label: String,
    pub value: f64,
}

fn term(label: &str, value: f64) -> Term {
    Term {
        label: label.to_string(),
        value,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub terms: Vec<Term>,
    pub margins: Vec<f64>,
    pub holds: bool,
    pub tolerance_used: f64,
    /// Intermediate integrals, kept for audit.
    pub integrals: Vec<Term>,
    /// False when some quadrature exhausted its subdivision budget.
    pub converged: bool,
    /// Whether the hypothesis of the chain was checked and passed. `None`
    /// when it was not checked.
    pub hypothesis_verified: Option<bool>,
    pub notes: Vec<String>,
}

impl InequalityReport {
    fn new(name: &str, terms: Vec<Term>) -> Self {
        let margins: Vec<f64> = terms.windows(2).map(|w| w[1].value - w[0].value).collect();
        let holds = margins.iter().all(|&m| m >= -CHAIN_TOL);
        InequalityReport {
            name: name.to_string(),
            terms,
            margins,
            holds,
            tolerance_used: CHAIN_TOL,
            integrals: Vec::new(),
            converged: true,
            hypothesis_verified: None,
            notes: Vec::new(),
        }
    }

    fn with_integral(mut self, label: &str, integral: &Integral) -> Self {
        self.integrals.push(term(label, integral.value));
        self.converged &= integral.converged;
        self
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// Records the outcome of a hypothesis check.
    pub fn with_hypothesis(mut self, verified: bool) -> Self {
        self.hypothesis_verified = Some(verified);
        self
    }

    pub fn term_values(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.value).collect()
    }

    pub fn max_abs_margin(&self) -> f64 {
        self.margins.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `s -> f(s^(1/p))` on the u-space image of the interval.
fn u_space<'a, F: Univariate + ?Sized>(
    f: &'a F,
    interval: &'a Interval,
    p: PParam,
) -> impl Univariate + 'a {
    from_fn(move |s: f64| f.eval(p.root(s).clamp(interval.a(), interval.b())))
}

fn endpoint_average<F: Univariate + ?Sized>(f: &F, interval: &Interval) -> Result<f64> {
    Ok(0.5 * (f.eval(interval.a())? + f.eval(interval.b())?))
}

/// `f(M) <= p/(b^p - a^p) ∫ f(x) x^(p-1) dx <= (f(a) + f(b))/2` for
/// p-convex `f`.
pub fn hh_p_convex<F: Univariate + ?Sized>(
    f: &F,
    interval: &Interval,
    p: PParam,
    cfg: &QuadConfig,
) -> Result<InequalityReport> {
    hh_chain("hh_p_convex", f, interval, p, cfg)
}

/// The same chain as [`hh_p_convex`], valid for symmetrized p-convex `f`.
pub fn hh_symmetrized<F: Univariate + ?Sized>(
    f: &F,
    interval: &Interval,
    p: PParam,
    cfg: &QuadConfig,
) -> Result<InequalityReport> {
    hh_chain("hh_symmetrized", f, interval, p, cfg)
}

fn hh_chain<F: Univariate + ?Sized>(
    name: &str,
    f: &F,
    interval: &Interval,
    p: PParam,
    cfg: &QuadConfig,
) -> Result<InequalityReport> {
    let mid = f.eval(p_midpoint(interval, p))?;
    let mean = p_weighted_integral(f, interval, p, cfg)?;
    let ends = endpoint_average(f, interval)?;
    Ok(InequalityReport::new(
        name,
        vec![
            term("f(p_midpoint)", mid),
            term("p_weighted_mean", mean.value),
            term("endpoint_average", ends),
        ],
    )
    .with_integral("p_weighted_mean", &mean))
}

/// `f(M) <= P(x) <= (f(a) + f(b))/2` at a single point.
pub fn transform_bounds<F: Univariate + ?Sized>(
    f: &F,
    interval: &Interval,
    p: PParam,
    x: f64,
) -> Result<InequalityReport> {
    interval.check(x)?;
    let transform = p_sym_transform(f, *interval, p);
    Ok(InequalityReport::new(
        "transform_bounds",
        vec![
            term("f(p_midpoint)", f.eval(p_midpoint(interval, p))?),
            term("P(x)", transform.eval(x)?),
            term("endpoint_average", endpoint_average(f, interval)?),
        ],
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrema {
    pub inf: f64,
    pub argmin: f64,
    pub sup: f64,
    pub argmax: f64,
    /// `f(p_midpoint)`, the infimum for symmetrized p-convex `f`.
    pub expected_inf: f64,
    /// `(f(a) + f(b))/2`, the supremum for symmetrized p-convex `f`.
    pub expected_sup: f64,
}

/// Grid infimum and supremum of the p-symmetrical transform.
pub fn transform_extrema<F: Univariate + ?Sized>(
    f: &F,
    interval: &Interval,
    p: PParam,
    grid: &GridSpec,
) -> Result<Extrema> {
    let transform = p_sym_transform(f, *interval, p);
    let mid = p_midpoint(interval, p);
    let mut points: Vec<f64> = u_grid(interval, p, grid.line_points())
        .into_iter()
        .map(|(x, _)| x)
        .collect();
    points.push(mid);
    let mut ext = Extrema {
        inf: f64::INFINITY,
        argmin: mid,
        sup: f64::NEG_INFINITY,
        argmax: mid,
        expected_inf: f.eval(mid)?,
        expected_sup: endpoint_average(f, interval)?,
    };
    for x in points {
        let v = transform.eval(x)?;
        if v < ext.inf {
            ext.inf = v;
            ext.argmin = x;
        }
        if v > ext.sup {
            ext.sup = v;
            ext.argmax = x;
        }
    }
    Ok(ext)
}

/// Fejér chain
/// `f(M) ∫ w x^(p-1) <= ∫ w g x^(p-1) <= (f(a) + f(b))/2 ∫ w x^(p-1)`, where
/// `g = f` when `w` is p-symmetric and `g = P` otherwise.
pub fn fejer_weighted<F, W>(
    f: &F,
    w: &W,
    interval: &Interval,
    p: PParam,
    cfg: &QuadConfig,
    grid: &GridSpec,
) -> Result<InequalityReport>
where
    F: Univariate + ?Sized,
    W: Univariate + ?Sized,
{
    require_nonnegative(w, interval, p, grid)?;
    let symmetry = check_p_symmetric_weight(w, interval, p, grid)?;
    let weight_mass = p_measure_integral(w, interval.a(), interval.b(), p, cfg)?;
    let (label, middle) = if symmetry.holds {
        let wf = from_fn(|x: f64| Ok(w.eval(x)? * f.eval(x)?));
        (
            "weighted_integral_f",
            p_measure_integral(&wf, interval.a(), interval.b(), p, cfg)?,
        )
    } else {
        let transform = p_sym_transform(f, *interval, p);
        let wp = from_fn(|x: f64| Ok(w.eval(x)? * transform.eval(x)?));
        (
            "weighted_integral_P",
            p_measure_integral(&wp, interval.a(), interval.b(), p, cfg)?,
        )
    };
    let mid = f.eval(p_midpoint(interval, p))?;
    let ends = endpoint_average(f, interval)?;
    let report = InequalityReport::new(
        "fejer_weighted",
        vec![
            term("f(p_midpoint)*weight_mass", mid * weight_mass.value),
            term(label, middle.value),
            term("endpoint_average*weight_mass", ends * weight_mass.value),
        ],
    )
    .with_integral("weight_mass", &weight_mass)
    .with_integral(label, &middle);
    Ok(with_symmetry_note(report, &symmetry))
}

fn with_symmetry_note(report: InequalityReport, symmetry: &SymmetryVerdict) -> InequalityReport {
    if symmetry.holds {
        report.with_note("weight is p-symmetric")
    } else {
        report.with_note(format!(
            "weight is not p-symmetric (relative asymmetry {:e}); middle term uses P",
            symmetry.worst_asymmetry
        ))
    }
}

fn require_nonnegative<W: Univariate + ?Sized>(
    w: &W,
    interval: &Interval,
    p: PParam,
    grid: &GridSpec,
) -> Result<()> {
    let (value, x) = weight_minimum(w, interval, p, grid)?;
    if value < 0.0 {
        return Err(Error::NegativeWeight { x, value });
    }
    Ok(())
}

/// Chain over `[x, y]` and its reflected interval.
pub fn hh_subinterval_chain<F: Univariate + ?Sized>(
    f: &F,
    interval: &Interval,
    p: PParam,
    x: f64,
    y: f64,
    cfg: &QuadConfig,
) -> Result<InequalityReport> {
    interval.check(x)?;
    interval.check(y)?;
    let (ux, uy) = (p.pow(x), p.pow(y));
    if (uy - ux).abs() < MIN_SUBINTERVAL {
        return Err(Error::Degenerate(format!(
            "|y^p - x^p| = {:e} is below {MIN_SUBINTERVAL:e}",
            (uy - ux).abs()
        )));
    }
    let (ua, ub) = interval.image(p);
    let sum = ua + ub;
    let half = 0.5 * (ux + uy);
    let clamp = |u: f64| p.root(u).clamp(interval.a(), interval.b());
    let left = 0.5 * (f.eval(clamp(half))? + f.eval(clamp(sum - half))?);

    let (rx, ry) = (p_reflect(x, interval, p)?, p_reflect(y, interval, p)?);
    let direct = p_measure_integral(f, x, y, p, cfg)?;
    let reflected = p_measure_integral(f, ry, rx, p, cfg)?;
    let middle = p.value() / (2.0 * (uy - ux)) * (direct.value + reflected.value);
    let right = 0.25 * (f.eval(x)? + f.eval(y)? + f.eval(rx)? + f.eval(ry)?);
    Ok(InequalityReport::new(
        "hh_subinterval_chain",
        vec![
            term("midpoint_pair_average", left),
            term("two_integral_average", middle),
            term("four_point_average", right),
        ],
    )
    .with_integral("integral_x_y", &direct)
    .with_integral("integral_reflected", &reflected))
}

/// `f(M) <= p/(a^p + b^p - 2x^p) ∫_x^reflect(x) f(t) t^(p-1) dt <= P(x)`.
pub fn reflected_pair_bound<F: Univariate + ?Sized>(
    f: &F,
    interval: &Interval,
    p: PParam,
    x: f64,
    cfg: &QuadConfig,
) -> Result<InequalityReport> {
    interval.check(x)?;
    let (ua, ub) = interval.image(p);
    let gap = ua + ub - 2.0 * p.pow(x);
    if gap.abs() < MIN_REFLECTED_GAP {
        return Err(Error::Degenerate(format!(
            "x = {x} is within {MIN_REFLECTED_GAP:e} of the p-midpoint in u-space"
        )));
    }
    let rx = p_reflect(x, interval, p)?;
    let integral = p_measure_integral(f, x, rx, p, cfg)?;
    let transform = p_sym_transform(f, *interval, p);
    Ok(InequalityReport::new(
        "reflected_pair_bound",
        vec![
            term("f(p_midpoint)", f.eval(p_midpoint(interval, p))?),
            term("reflected_pair_mean", p.value() / gap * integral.value),
            term("P(x)", transform.eval(x)?),
        ],
    )
    .with_integral("integral_x_reflect_x", &integral))
}

/// Integrates the reflected-pair mean against the p-measure:
/// `f(M) <= p^2/(b^p - a^p) ∫ x^(p-1)/(a^p + b^p - 2x^p) ∫_x^reflect(x) f t^(p-1) dt dx
/// <= p/(b^p - a^p) ∫ f x^(p-1)`.
pub fn refinement_integral<F: Univariate + ?Sized>(
    f: &F,
    interval: &Interval,
    p: PParam,
    cfg: &QuadConfig,
) -> Result<InequalityReport> {
    let phi = u_space(f, interval, p);
    let (lo, hi) = interval.ordered_image(p);
    let sum = lo + hi;
    let f_mid = f.eval(p_midpoint(interval, p))?;

    let inner_converged = std::sync::atomic::AtomicBool::new(true);
    let pair_mean = from_fn(|u: f64| {
        let gap = sum - 2.0 * u;
        if gap.abs() < 2.0 * MIDPOINT_BAND {
            return Ok(f_mid);
        }
        let inner = integrate_adaptive(&phi, u, sum - u, cfg).map_err(eval_error(u))?;
        if !inner.converged {
            inner_converged.store(false, std::sync::atomic::Ordering::Relaxed);
        }
        Ok(inner.value / gap)
    });
    let outer = integrate_adaptive(&pair_mean, lo, hi, cfg)?;
    let refined = outer.value / (hi - lo);
    let mean = p_weighted_integral(f, interval, p, cfg)?;

    let mut report = InequalityReport::new(
        "refinement_integral",
        vec![
            term("f(p_midpoint)", f_mid),
            term("refined_mean", refined),
            term("p_weighted_mean", mean.value),
        ],
    )
    .with_integral("refined_mean", &outer)
    .with_integral("p_weighted_mean", &mean)
    .with_note(format!(
        "inner mean replaced by f(p_midpoint) within {MIDPOINT_BAND:e} of the midpoint in u-space"
    ));
    report.converged &= inner_converged.into_inner();
    Ok(report)
}

fn eval_error(x: f64) -> impl Fn(Error) -> EvalError {
    move |e| match e {
        Error::Eval(inner) => inner,
        other => EvalError::domain(other.to_string(), x),
    }
}

/// Four-term refinement for p-convex `f`, built from double integrals over
/// `[a, b]^2` against `(xy)^(p-1)` with a 64 x 64 Gauss–Legendre rule.
pub fn pconvex_double_refinement<F: Univariate + ?Sized>(
    f: &F,
    interval: &Interval,
    p: PParam,
    cfg: &QuadConfig,
) -> Result<InequalityReport> {
    let phi = u_space(f, interval, p);
    let (lo, hi) = interval.ordered_image(p);
    let sum = lo + hi;
    let nodes = GaussLegendre::n64().mapped(lo, hi);
    let sym = |m: f64| -> Result<f64, EvalError> { Ok(0.5 * (phi.eval(m)? + phi.eval(sum - m)?)) };

    // Row i accumulates columns j >= i; off-diagonal cells count twice.
    let rows: Vec<Result<(f64, f64, bool)>> = (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            let (u, wu) = nodes[i];
            let (mut midpoint_part, mut integral_part, mut converged) = (0.0, 0.0, true);
            for &(v, wv) in &nodes[i..] {
                let weight = if v == u { wu * wv } else { 2.0 * wu * wv };
                let m = 0.5 * (u + v);
                let at_mid = sym(m)?;
                midpoint_part += weight * at_mid;
                let mean = if (v - u).abs() < DIAGONAL_BAND {
                    at_mid
                } else {
                    let direct = integrate_adaptive(&phi, u, v, cfg)?;
                    let reflected = integrate_adaptive(&phi, sum - v, sum - u, cfg)?;
                    converged &= direct.converged && reflected.converged;
                    (direct.value + reflected.value) / (2.0 * (v - u))
                };
                integral_part += weight * mean;
            }
            Ok((midpoint_part, integral_part, converged))
        })
        .collect();
    let (mut midpoint_part, mut integral_part, mut converged) = (0.0, 0.0, true);
    for row in rows {
        let (a, b, c) = row?;
        midpoint_part += a;
        integral_part += b;
        converged &= c;
    }
    let area = (hi - lo) * (hi - lo);
    let mean = p_weighted_integral(f, interval, p, cfg)?;

    let mut report = InequalityReport::new(
        "pconvex_double_refinement",
        vec![
            term("f(p_midpoint)", f.eval(p_midpoint(interval, p))?),
            term("double_midpoint_mean", midpoint_part / area),
            term("double_integral_mean", integral_part / area),
            term("p_weighted_mean", mean.value),
        ],
    )
    .with_integral("double_midpoint_integral", &plain(midpoint_part, converged))
    .with_integral("double_integral", &plain(integral_part, converged))
    .with_integral("p_weighted_mean", &mean)
    .with_note("the third term carries the factor p^3/(2(b^p - a^p)^2)")
    .with_note(format!(
        "diagonal cells with |y^p - x^p| < {DIAGONAL_BAND:e} use P at the p-mean of x and y"
    ));
    report.converged &= converged;
    Ok(report)
}

fn plain(value: f64, converged: bool) -> Integral {
    Integral {
        value,
        abs_error: f64::NAN,
        converged,
        evaluations: 0,
    }
}

/// Fractional Fejér chain on the u-space image `[L, R]` of the interval:
/// `f(M) S(w) <= S(f w) <= (f(a) + f(b))/2 S(w)`, with
/// `S(h) = J_{L+}^α (h∘g)(R) + J_{R-}^α (h∘g)(L)` and `g(u) = u^(1/p)`.
pub fn fejer_fractional<F, W>(
    f: &F,
    w: &W,
    interval: &Interval,
    p: PParam,
    alpha: FracOrder,
    cfg: &QuadConfig,
    grid: &GridSpec,
) -> Result<InequalityReport>
where
    F: Univariate + ?Sized,
    W: Univariate + ?Sized,
{
    require_nonnegative(w, interval, p, grid)?;
    let symmetry = check_p_symmetric_weight(w, interval, p, grid)?;
    if !symmetry.holds {
        return Err(Error::AsymmetricWeight {
            x: symmetry.witness.unwrap_or(interval.a()),
            asymmetry: symmetry.worst_asymmetry,
        });
    }
    let (lo, hi) = interval.ordered_image(p);
    let w_u = u_space(w, interval, p);
    let fw = from_fn(|x: f64| Ok(f.eval(x)? * w.eval(x)?));
    let fw_u = u_space(&fw, interval, p);

    let pair = |h: &dyn Univariate| -> Result<(Integral, Integral)> {
        Ok((
            frac_integral_left(h, lo, hi, alpha, cfg)?,
            frac_integral_right(h, hi, lo, alpha, cfg)?,
        ))
    };
    let (w_left, w_right) = pair(&w_u)?;
    let (fw_left, fw_right) = pair(&fw_u)?;
    let weight_sum = w_left.value + w_right.value;
    let middle = fw_left.value + fw_right.value;

    let mid = f.eval(p_midpoint(interval, p))?;
    let ends = endpoint_average(f, interval)?;
    let case = if p.value() > 0.0 {
        "case (i): left integral based at a^p, right integral based at b^p"
    } else {
        "case (ii): left integral based at b^p, right integral based at a^p"
    };
    Ok(InequalityReport::new(
        "fejer_fractional",
        vec![
            term("f(p_midpoint)*J_w", mid * weight_sum),
            term("J_fw", middle),
            term("endpoint_average*J_w", ends * weight_sum),
        ],
    )
    .with_integral("J_left_w", &w_left)
    .with_integral("J_right_w", &w_right)
    .with_integral("J_left_fw", &fw_left)
    .with_integral("J_right_fw", &fw_right)
    .with_note(case)
    .with_hypothesis(true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{FuncExpr, ParamBindings};
    use crate::integrate::gamma;

    fn p(v: f64) -> PParam {
        PParam::new(v).unwrap()
    }

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    fn expr(src: &str, pairs: &[(&str, f64)]) -> crate::expr::BoundExpr {
        let mut b = ParamBindings::new();
        for (k, v) in pairs {
            b.insert(k, *v).unwrap();
        }
        FuncExpr::parse(src).unwrap().bind(&b).unwrap()
    }

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Composite Simpson rule, used as an independent oracle.
    fn simpson(g: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (hi - lo) / n as f64;
        let mut s = g(lo) + g(hi);
        for k in 1..n {
            let c = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += c * g(lo + k as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn classical_hh_closed_form() {
        let r = hh_p_convex(&expr("x^2", &[]), &iv(1.0, 3.0), p(1.0), &cfg()).unwrap();
        let v = r.term_values();
        assert!(close(v[0], 4.0, 1e-12));
        assert!(close(v[1], 13.0 / 3.0, 1e-12));
        assert!(close(v[2], 5.0, 1e-12));
        assert!(r.holds && r.converged);
        assert_eq!(r.margins.len(), 2);
    }

    #[test]
    fn harmonic_hh_against_simpson() {
        let f = expr("x^2", &[]);
        let r = hh_p_convex(&f, &iv(1.0, 2.0), p(-1.0), &cfg()).unwrap();
        let v = r.term_values();
        // ab/(b-a) ∫ f/x^2 = 2 ∫_1^2 dx = 2.
        let oracle = 2.0 * simpson(|x| x * x / (x * x), 1.0, 2.0, 200);
        assert!(close(v[0], 16.0 / 9.0, 1e-12));
        assert!(close(v[1], oracle, 1e-10));
        assert!(close(v[2], 2.5, 1e-12));
        assert!(r.holds);
    }

    #[test]
    fn power_function_gives_equality_chains() {
        let i = iv(1.0, 3.0);
        for pv in [-2.0, -1.0, 0.5, 1.0, 2.0, 3.0] {
            let f = expr("x^p", &[("p", pv)]);
            let q = p(pv);
            let expected = 0.5 * (q.pow(1.0) + q.pow(3.0));
            let reports = [
                hh_p_convex(&f, &i, q, &cfg()).unwrap(),
                hh_subinterval_chain(&f, &i, q, 1.4, 2.6, &cfg()).unwrap(),
                reflected_pair_bound(&f, &i, q, 1.2, &cfg()).unwrap(),
                refinement_integral(&f, &i, q, &cfg()).unwrap(),
                pconvex_double_refinement(&f, &i, q, &cfg()).unwrap(),
            ];
            for r in &reports {
                assert!(r.max_abs_margin() <= 1e-9, "p = {pv}: {r:?}");
                assert!(r.holds && r.converged);
            }
            assert!(close(reports[0].terms[0].value, expected, 1e-12));
        }
    }

    #[test]
    fn transform_bounds_endpoint_and_midpoint_equalities() {
        let f = expr("x^3 - 2*x", &[]);
        let i = iv(1.0, 3.0);
        let q = p(2.0);
        let at_a = transform_bounds(&f, &i, q, 1.0).unwrap();
        assert_eq!(at_a.terms[1].value, at_a.terms[2].value);
        let mid = p_midpoint(&i, q);
        let at_mid = transform_bounds(&f, &i, q, mid).unwrap();
        assert!(close(at_mid.terms[0].value, at_mid.terms[1].value, 1e-12));
        assert!(transform_bounds(&f, &i, q, 3.5).is_err());
    }

    #[test]
    fn transform_extrema_examples() {
        let grid = GridSpec::default();
        let e = transform_extrema(&expr("x", &[]), &iv(1.0, 3.0), p(1.0), &grid).unwrap();
        assert!(close(e.inf, 2.0, 1e-15) && close(e.sup, 2.0, 1e-15));
        let g = expr("(x-1)^2 + (3-x)^2", &[]);
        let e = transform_extrema(&g, &iv(1.0, 3.0), p(1.0), &grid).unwrap();
        assert!(close(e.inf, 2.0, 1e-12) && close(e.sup, 4.0, 1e-12));
        assert!(close(e.inf, e.expected_inf, 1e-12) && close(e.sup, e.expected_sup, 1e-12));
    }

    #[test]
    fn negative_log_transform_is_extremal_the_other_way() {
        // P(x) = ln(u (3/2 - u))/2 with u = 1/x peaks at the midpoint.
        let f = expr("-ln(x)", &[]);
        let e = transform_extrema(&f, &iv(1.0, 2.0), p(-1.0), &GridSpec::default()).unwrap();
        assert!(close(e.sup, -(4.0f64 / 3.0).ln(), 1e-12));
        assert!(close(e.inf, -(2.0f64.ln()) / 2.0, 1e-12));
        let r = hh_symmetrized(&f, &iv(1.0, 2.0), p(-1.0), &cfg()).unwrap();
        assert!(!r.holds);
    }

    #[test]
    fn fejer_with_unit_weight_reduces_to_hh() {
        let f = expr("exp(x) - x", &[]);
        let i = iv(1.0, 3.0);
        for pv in [-1.0, 1.0, 2.0] {
            let q = p(pv);
            let hh = hh_symmetrized(&f, &i, q, &cfg()).unwrap().term_values();
            let fj =
                fejer_weighted(&f, &expr("1", &[]), &i, q, &cfg(), &GridSpec::default()).unwrap();
            let mass = fj.integrals[0].value;
            assert!(close(mass, (q.pow(3.0) - q.pow(1.0)) / pv, 1e-12));
            for (k, t) in fj.terms.iter().enumerate() {
                assert!(close(t.value / mass, hh[k], 1e-10), "p = {pv}");
            }
        }
    }

    #[test]
    fn fejer_symmetric_weight_example() {
        let f = expr("x^2", &[]);
        let w = expr("(x-1)^2 + (3-x)^2", &[]);
        let r =
            fejer_weighted(&f, &w, &iv(1.0, 3.0), p(1.0), &cfg(), &GridSpec::default()).unwrap();
        assert!(r.holds);
        assert_eq!(r.terms[1].label, "weighted_integral_f");
        let oracle = simpson(
            |x| x * x * ((x - 1.0).powi(2) + (3.0 - x).powi(2)),
            1.0,
            3.0,
            400,
        );
        assert!(close(r.terms[1].value, oracle, 1e-9));
    }

    #[test]
    fn fejer_rejects_negative_weight() {
        let w = expr("x - 2", &[]);
        let err = fejer_weighted(
            &expr("x", &[]),
            &w,
            &iv(1.0, 3.0),
            p(1.0),
            &cfg(),
            &GridSpec::default(),
        );
        assert!(matches!(err, Err(Error::NegativeWeight { .. })));
    }

    #[test]
    fn fejer_asymmetric_weight_uses_transform() {
        let r = fejer_weighted(
            &expr("x^2", &[]),
            &expr("x", &[]),
            &iv(1.0, 3.0),
            p(1.0),
            &cfg(),
            &GridSpec::default(),
        )
        .unwrap();
        assert_eq!(r.terms[1].label, "weighted_integral_P");
        // ∫_1^3 x (x^2 + (4-x)^2)/2 dx
        let oracle = simpson(|x| x * (x * x + (4.0 - x) * (4.0 - x)) / 2.0, 1.0, 3.0, 400);
        assert!(close(r.terms[1].value, oracle, 1e-9));
    }

    #[test]
    fn subinterval_chain_reductions() {
        let f = expr("exp(x) + 1/x", &[]);
        let i = iv(1.0, 3.0);
        for pv in [-2.0, -1.0, 1.0, 2.0] {
            let q = p(pv);
            let hh = hh_symmetrized(&f, &i, q, &cfg()).unwrap().term_values();
            let sub = hh_subinterval_chain(&f, &i, q, 1.0, 3.0, &cfg())
                .unwrap()
                .term_values();
            let pair = reflected_pair_bound(&f, &i, q, 1.0, &cfg())
                .unwrap()
                .term_values();
            for k in 0..3 {
                assert!(close(sub[k], hh[k], 1e-10), "p = {pv}, term {k}");
            }
            assert!(close(pair[0], hh[0], 1e-12));
            assert!(close(pair[1], hh[1], 1e-10));
            assert!(close(pair[2], hh[2], 1e-12));
        }
    }

    #[test]
    fn subinterval_chain_classical_example() {
        let f = expr("x^2", &[]);
        let r = hh_subinterval_chain(&f, &iv(1.0, 3.0), p(1.0), 1.5, 2.0, &cfg()).unwrap();
        let v = r.term_values();
        let oracle =
            (simpson(|t| t * t, 1.5, 2.0, 100) + simpson(|t| t * t, 2.0, 2.5, 100)) / (2.0 * 0.5);
        assert!(close(
            v[0],
            0.5 * (1.75f64.powi(2) + 2.25f64.powi(2)),
            1e-12
        ));
        assert!(close(v[1], oracle, 1e-10));
        assert!(close(v[2], 0.25 * (2.25 + 4.0 + 6.25 + 4.0), 1e-12));
        assert!(r.holds);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let f = expr("x", &[]);
        let i = iv(1.0, 3.0);
        assert!(matches!(
            hh_subinterval_chain(&f, &i, p(1.0), 2.0, 2.0, &cfg()),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            reflected_pair_bound(&f, &i, p(1.0), 2.0, &cfg()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn refinement_is_sandwiched() {
        let f = expr("x^2", &[]);
        let r = refinement_integral(&f, &iv(1.0, 3.0), p(1.0), &cfg()).unwrap();
        let v = r.term_values();
        assert!(v[1] >= 4.0 - 1e-7 && v[1] <= 13.0 / 3.0 + 1e-7);
        // Inner mean of x^2 over [x, 4-x] is (x^2 + x(4-x) + (4-x)^2)/3.
        let oracle = simpson(
            |x| (x * x + x * (4.0 - x) + (4.0 - x).powi(2)) / 3.0,
            1.0,
            3.0,
            400,
        ) / 2.0;
        assert!(close(v[1], oracle, 1e-9), "{} vs {oracle}", v[1]);
    }

    #[test]
    fn double_refinement_classical_example() {
        let f = expr("x^2", &[]);
        let r = pconvex_double_refinement(&f, &iv(1.0, 3.0), p(1.0), &cfg()).unwrap();
        let v = r.term_values();
        assert!(close(v[0], 4.0, 1e-12));
        assert!(close(v[3], 13.0 / 3.0, 1e-12));
        // E[((x+y)/2)^2 + (4-(x+y)/2)^2]/2 for x, y uniform on [1, 3].
        assert!(close(v[1], 4.0 + 1.0 / 6.0, 1e-10));
        assert!(r.holds);
        let g = expr("(x^p-a^p)^2", &[("p", 2.0), ("a", 1.0)]);
        assert!(
            pconvex_double_refinement(&g, &iv(1.0, 2.0), p(2.0), &cfg())
                .unwrap()
                .holds
        );
    }

    #[test]
    fn fractional_unit_weight_order_one_reduces_to_hh() {
        let f = expr("x^3 + sin(x)", &[]);
        let i = iv(1.0, 3.0);
        for pv in [-1.0, 1.0, 2.0] {
            let q = p(pv);
            let hh = hh_symmetrized(&f, &i, q, &cfg()).unwrap().term_values();
            let r = fejer_fractional(
                &f,
                &expr("1", &[]),
                &i,
                q,
                FracOrder::new(1.0).unwrap(),
                &cfg(),
                &GridSpec::default(),
            )
            .unwrap();
            let norm = r.terms[0].value / hh[0];
            for (t, h) in r.terms.iter().zip(hh) {
                assert!(close(t.value / norm, h, 1e-8), "p = {pv}");
            }
        }
    }

    #[test]
    fn kernel_weight_gives_pure_fractional_hh() {
        // w = (x^p - a^p)^(α-1) + (b^p - x^p)^(α-1) turns the weighted chain
        // into a fractional one with factor Γ(α+1)/(2 (b^p - a^p)^α).
        let (a, b, pv, alpha) = (1.0, 2.0, 2.0, 2.5);
        let i = iv(a, b);
        let q = p(pv);
        let w = expr(
            "(x^p-a^p)^(alpha-1) + (b^p-x^p)^(alpha-1)",
            &[("p", pv), ("a", a), ("b", b), ("alpha", alpha)],
        );
        let f = expr("x^2 + 1/x", &[]);
        let r = fejer_weighted(&f, &w, &i, q, &cfg(), &GridSpec::default()).unwrap();
        assert!(r.holds);
        assert_eq!(r.terms[1].label, "weighted_integral_f");

        let (lo, hi) = (a * a, b * b);
        let order = FracOrder::new(alpha).unwrap();
        let phi = u_space(&f, &i, q);
        let j_sum = frac_integral_left(&phi, lo, hi, order, &cfg())
            .unwrap()
            .value
            + frac_integral_right(&phi, hi, lo, order, &cfg())
                .unwrap()
                .value;
        let g = gamma(alpha).unwrap();
        assert!(close(r.terms[1].value, g / pv * j_sum, 1e-9));

        let scaled = gamma(alpha + 1.0).unwrap() / (2.0 * (hi - lo).powf(alpha)) * j_sum;
        let mid = f.eval(p_midpoint(&i, q)).unwrap();
        let ends = 0.5 * (f.eval(a).unwrap() + f.eval(b).unwrap());
        assert!(mid <= scaled && scaled <= ends);
        let oracle = simpson(
            |t| ((t - lo).powf(alpha - 1.0) + (hi - t).powf(alpha - 1.0)) * (t + 1.0 / t.sqrt()),
            lo,
            hi,
            2000,
        ) * alpha
            / (2.0 * (hi - lo).powf(alpha));
        assert!(close(scaled, oracle, 1e-9), "{scaled} vs {oracle}");
    }

    #[test]
    fn fractional_rejects_asymmetric_weight() {
        let r = fejer_fractional(
            &expr("x", &[]),
            &expr("x", &[]),
            &iv(1.0, 3.0),
            p(1.0),
            FracOrder::new(0.5).unwrap(),
            &cfg(),
            &GridSpec::default(),
        );
        assert!(matches!(r, Err(Error::AsymmetricWeight { .. })));
    }
}
