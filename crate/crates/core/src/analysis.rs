//! Numerical deciders for p-convexity, symmetrized p-convexity and weight
//! p-symmetry.
//!
//! The deciders are one-sided. A failing verdict carries a witness `(x, y, t)`
//! at which the defect can be recomputed. A passing verdict only means that no
//! violation above [`DEFECT_TOL`] was found at the grid resolution.
//!
//! Grids are uniform in u-space (`u = x^p`) where p-convexity becomes ordinary
//! convexity. Rows of the grid are scanned in parallel and merged with a total
//! order (largest defect, then lexicographically smallest `(x, y, t)`), so
//! the verdict does not depend on the number of threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{EvalError, Univariate};
use crate::meanspace::{p_reflect, p_sym_transform, power_mean, Interval, PParam};

/// A grid point whose defect exceeds this is a violation.
pub const DEFECT_TOL: f64 = 1e-9;
/// Relative tolerance for weight p-symmetry.
pub const SYM_TOL: f64 = 1e-9;
/// Upper bound on defect evaluations for a single decision.
pub const MAX_DEFECT_SAMPLES: usize = 3_000_000;

const ZOOM: f64 = 5.0;
const LOCAL_HALF_WIDTH: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub xy_points: usize,
    pub t_points: usize,
    pub refine_rounds: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            xy_points: 41,
            t_points: 21,
            refine_rounds: 3,
        }
    }
}

impl GridSpec {
    pub fn new(xy_points: usize, t_points: usize, refine_rounds: usize) -> Result<Self> {
        let grid = GridSpec {
            xy_points,
            t_points,
            refine_rounds,
        };
        if xy_points < 3 || t_points < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 points per axis (xy_points = {xy_points}, t_points = {t_points})"
            )));
        }
        if grid.defect_budget() > MAX_DEFECT_SAMPLES {
            return Err(Error::InvalidGrid(format!(
                "{} defect evaluations exceed the limit of {MAX_DEFECT_SAMPLES}",
                grid.defect_budget()
            )));
        }
        Ok(grid)
    }

    fn defect_budget(&self) -> usize {
        let local = (2 * LOCAL_HALF_WIDTH + 1).pow(3) as usize;
        self.xy_points
            .saturating_mul(self.xy_points)
            .saturating_mul(self.t_points)
            .saturating_add(self.refine_rounds.saturating_mul(local))
    }

    /// Resolution of one-dimensional scans (weight symmetry, transform extrema).
    pub fn line_points(&self) -> usize {
        (self.xy_points - 1) * (self.t_points - 1) + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityVerdict {
    pub holds: bool,
    pub worst_defect: f64,
    pub witness: Option<Witness>,
    pub samples_checked: usize,
    pub defect_tol: f64,
}

/// `f(M_p(x, y; t)) - [t f(x) + (1 - t) f(y)]`; positive values violate
/// p-convexity.
pub fn defect<F: Univariate + ?Sized>(
    f: &F,
    x: f64,
    y: f64,
    t: f64,
    p: PParam,
) -> Result<f64, EvalError> {
    let m = power_mean(x, y, t, p);
    let chord = t * f.eval(x)? + (1.0 - t) * f.eval(y)?;
    Ok(f.eval(m)? - chord)
}

/// Points `x_0 = a < ... < x_{n-1} = b`, uniform in u-space.
pub fn u_grid(interval: &Interval, p: PParam, n: usize) -> Vec<(f64, f64)> {
    let (ua, ub) = interval.image(p);
    (0..n)
        .map(|i| {
            if i == 0 {
                (interval.a(), ua)
            } else if i == n - 1 {
                (interval.b(), ub)
            } else {
                let u = ua + (ub - ua) * (i as f64 / (n - 1) as f64);
                (to_x(u, interval, p), u)
            }
        })
        .collect()
}

fn to_x(u: f64, interval: &Interval, p: PParam) -> f64 {
    p.root(u).clamp(interval.a(), interval.b())
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    defect: f64,
    x: f64,
    y: f64,
    t: f64,
    ux: f64,
    uy: f64,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        match self.defect.total_cmp(&other.defect) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => {
                (self.x, self.y, self.t).partial_cmp(&(other.x, other.y, other.t))
                    == Some(std::cmp::Ordering::Less)
            }
        }
    }
}

fn merge(acc: Option<Candidate>, next: Candidate) -> Option<Candidate> {
    match acc {
        Some(best) if !next.better_than(&best) => Some(best),
        _ => Some(next),
    }
}

/// Reduces per-row results in row order: the first error wins, then the
/// best candidate.
fn reduce_rows(
    rows: Vec<Result<(Option<Candidate>, usize), EvalError>>,
) -> Result<(Candidate, usize)> {
    let mut best: Option<Candidate> = None;
    let mut count = 0;
    for row in rows {
        let (cand, n) = row?;
        count += n;
        if let Some(c) = cand {
            best = merge(best, c);
        }
    }
    best.map(|b| (b, count))
        .ok_or_else(|| Error::InvalidGrid("grid produced no samples".into()))
}

/// Searches `[a, b]^2 x [0, 1]` for a violation of p-convexity.
pub fn check_p_convex<F: Univariate + ?Sized>(
    f: &F,
    interval: &Interval,
    p: PParam,
    grid: &GridSpec,
) -> Result<ConvexityVerdict> {
    let xs = u_grid(interval, p, grid.xy_points);
    let ts: Vec<f64> = (0..grid.t_points)
        .map(|k| k as f64 / (grid.t_points - 1) as f64)
        .collect();

    // Pairs i < j suffice: the t grid is symmetric under t -> 1 - t.
    let rows: Vec<_> = (0..xs.len())
        .into_par_iter()
        .map(|i| {
            let (x, ux) = xs[i];
            let mut best = None;
            let mut n = 0;
            for &(y, uy) in &xs[i + 1..] {
                for &t in &ts {
                    let d = defect(f, x, y, t, p)?;
                    n += 1;
                    best = merge(
                        best,
                        Candidate {
                            defect: d,
                            x,
                            y,
                            t,
                            ux,
                            uy,
                        },
                    );
                }
            }
            Ok((best, n))
        })
        .collect();
    let (mut best, mut samples) = reduce_rows(rows)?;

    let (u_lo, u_hi) = interval.ordered_image(p);
    let mut step_u = (u_hi - u_lo) / (grid.xy_points - 1) as f64;
    let mut step_t = 1.0 / (grid.t_points - 1) as f64;
    for _ in 0..grid.refine_rounds {
        step_u /= ZOOM;
        step_t /= ZOOM;
        let centre = best;
        let offsets: Vec<i32> = (-LOCAL_HALF_WIDTH..=LOCAL_HALF_WIDTH).collect();
        let rows: Vec<_> = offsets
            .par_iter()
            .map(|&kx| {
                let ux = (centre.ux + kx as f64 * step_u).clamp(u_lo, u_hi);
                let x = snap(ux, centre.x, kx, interval, p);
                let mut best = None;
                let mut n = 0;
                for &ky in &offsets {
                    let uy = (centre.uy + ky as f64 * step_u).clamp(u_lo, u_hi);
                    let y = snap(uy, centre.y, ky, interval, p);
                    for &kt in &offsets {
                        let t = (centre.t + kt as f64 * step_t).clamp(0.0, 1.0);
                        let d = defect(f, x, y, t, p)?;
                        n += 1;
                        best = merge(
                            best,
                            Candidate {
                                defect: d,
                                x,
                                y,
                                t,
                                ux,
                                uy,
                            },
                        );
                    }
                }
                Ok((best, n))
            })
            .collect();
        let (local, n) = reduce_rows(rows)?;
        samples += n;
        if local.better_than(&best) {
            best = local;
        }
    }

    let holds = best.defect <= DEFECT_TOL;
    Ok(ConvexityVerdict {
        holds,
        worst_defect: best.defect,
        witness: (!holds).then_some(Witness {
            x: best.x,
            y: best.y,
            t: best.t,
        }),
        samples_checked: samples,
        defect_tol: DEFECT_TOL,
    })
}

// Keeps the centre point bit-identical so zero offsets reproduce it exactly.
fn snap(u: f64, centre: f64, offset: i32, interval: &Interval, p: PParam) -> f64 {
    if offset == 0 {
        centre
    } else {
        to_x(u, interval, p)
    }
}

/// p-convexity of the p-symmetrical transform of `f`.
pub fn check_symmetrized_p_convex<F: Univariate + ?Sized>(
    f: &F,
    interval: &Interval,
    p: PParam,
    grid: &GridSpec,
) -> Result<ConvexityVerdict> {
    let transform = p_sym_transform(f, *interval, p);
    check_p_convex(&transform, interval, p, grid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryVerdict {
    pub holds: bool,
    /// `max |w(x) - w(reflect(x))| / max(1, sup |w|)` over the scan.
    pub worst_asymmetry: f64,
    pub witness: Option<f64>,
    pub samples_checked: usize,
    pub sym_tol: f64,
}

/// Checks `w(x) = w(reflect(x))` on a u-uniform scan of `[a, b]`.
pub fn check_p_symmetric_weight<F: Univariate + ?Sized>(
    w: &F,
    interval: &Interval,
    p: PParam,
    grid: &GridSpec,
) -> Result<SymmetryVerdict> {
    let xs = u_grid(interval, p, grid.line_points());
    let mut sup: f64 = 0.0;
    let mut worst = (0.0, xs[0].0);
    for &(x, _) in &xs {
        let wx = w.eval(x)?;
        let wr = w.eval(p_reflect(x, interval, p)?)?;
        sup = sup.max(wx.abs());
        let gap = (wx - wr).abs();
        if gap > worst.0 {
            worst = (gap, x);
        }
    }
    let rel = worst.0 / sup.max(1.0);
    let holds = rel <= SYM_TOL;
    Ok(SymmetryVerdict {
        holds,
        worst_asymmetry: rel,
        witness: (!holds).then_some(worst.1),
        samples_checked: xs.len(),
        sym_tol: SYM_TOL,
    })
}

/// Smallest value of `w` on the scan and where it occurs.
pub fn weight_minimum<F: Univariate + ?Sized>(
    w: &F,
    interval: &Interval,
    p: PParam,
    grid: &GridSpec,
) -> Result<(f64, f64)> {
    let mut min = (f64::INFINITY, interval.a());
    for (x, _) in u_grid(interval, p, grid.line_points()) {
        let v = w.eval(x)?;
        if v < min.0 {
            min = (v, x);
        }
    }
    Ok(min)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub agree: bool,
    /// Symmetrized p-convexity of `f` on `[a, b]`.
    pub direct: ConvexityVerdict,
    /// Symmetrized convexity of `u -> f(u^(1/p))` on the u-space image.
    pub composed: ConvexityVerdict,
    pub image: (f64, f64),
}

/// Decides symmetrized p-convexity of `f` on `[a, b]` and symmetrized
/// convexity of `f ∘ u^(1/p)` on `[a^p, b^p]` (ordered ascending), and
/// reports whether the two verdicts agree.
pub fn crosscheck_composition<F: Univariate + ?Sized>(
    f: &F,
    interval: &Interval,
    p: PParam,
    grid: &GridSpec,
) -> Result<CrossCheck> {
    let direct = check_symmetrized_p_convex(f, interval, p, grid)?;
    let (lo, hi) = interval.ordered_image(p);
    let image = Interval::new(lo, hi)?;
    let composed_fn = crate::expr::from_fn(|u: f64| f.eval(to_x(u, interval, p)));
    let one = PParam::new(1.0)?;
    let composed = check_symmetrized_p_convex(&composed_fn, &image, one, grid)?;
    Ok(CrossCheck {
        agree: direct.holds == composed.holds,
        direct,
        composed,
        image: (lo, hi),
    })
}
