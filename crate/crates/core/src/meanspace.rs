//! p-power means, the p-reflection of an interval and the p-symmetrical
//! transforms built on it.
//!
//! Throughout, "u-space" means the image of `[a, b]` under `x -> x^p`. The
//! p-power mean is the ordinary weighted mean in u-space and the p-reflection
//! is the ordinary reflection `u -> a^p + b^p - u`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{EvalError, Univariate};

/// Smallest admissible `|p|`.
pub const MIN_ABS_P: f64 = 1e-8;

/// Reflected points landing outside `[a, b]` by at most this relative amount
/// are clamped onto the endpoint.
pub const REFLECT_CLAMP_REL: f64 = 1e-12;

/// The exponent selecting the convexity class, `p != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PParam(f64);

impl PParam {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p.abs() >= MIN_ABS_P {
            Ok(PParam(p))
        } else {
            Err(Error::InvalidP(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `x^p` for `x > 0`.
    #[inline]
    pub fn pow(self, x: f64) -> f64 {
        x.powf(self.0)
    }

    /// `u^(1/p)`, the inverse of [`PParam::pow`].
    #[inline]
    pub fn root(self, u: f64) -> f64 {
        if self.0 == 1.0 {
            u
        } else {
            u.powf(1.0 / self.0)
        }
    }
}

/// A closed interval `[a, b]` with `0 < a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a.is_finite() && b.is_finite() && 0.0 < a && a < b {
            Ok(Interval { a, b })
        } else {
            Err(Error::InvalidInterval { a, b })
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }

    /// `(a^p, b^p)`; descending when `p < 0`.
    pub fn image(&self, p: PParam) -> (f64, f64) {
        (p.pow(self.a), p.pow(self.b))
    }

    /// The u-space image ordered ascending.
    pub fn ordered_image(&self, p: PParam) -> (f64, f64) {
        let (ua, ub) = self.image(p);
        (ua.min(ub), ua.max(ub))
    }

    /// Errors unless `x` lies in `[a, b]`.
    pub fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideInterval {
                x,
                a: self.a,
                b: self.b,
            })
        }
    }
}

/// Weighted p-power mean `[t x^p + (1 - t) y^p]^(1/p)`.
///
/// Requires `x, y > 0` and `t` in `[0, 1]`. The result is clamped into
/// `[min(x, y), max(x, y)]`.
pub fn power_mean(x: f64, y: f64, t: f64, p: PParam) -> f64 {
    debug_assert!(x > 0.0 && y > 0.0 && (0.0..=1.0).contains(&t));
    if t == 1.0 || x == y {
        return x;
    }
    if t == 0.0 {
        return y;
    }
    let u = t * p.pow(x) + (1.0 - t) * p.pow(y);
    p.root(u).clamp(x.min(y), x.max(y))
}

/// The p-midpoint `[(a^p + b^p) / 2]^(1/p)`, fixed point of [`p_reflect`].
pub fn p_midpoint(interval: &Interval, p: PParam) -> f64 {
    power_mean(interval.a, interval.b, 0.5, p)
}

/// The involution `x -> [a^p + b^p - x^p]^(1/p)` of `[a, b]`.
pub fn p_reflect(x: f64, interval: &Interval, p: PParam) -> Result<f64> {
    interval.check(x)?;
    let (a, b) = (interval.a, interval.b);
    if x == a {
        return Ok(b);
    }
    if x == b {
        return Ok(a);
    }
    let (ua, ub) = interval.image(p);
    // (a^p - x^p) first: exact cancellation when x is near a.
    let u = ub + (ua - p.pow(x));
    let r = p.root(u);
    if interval.contains(r) {
        Ok(r)
    } else if r < a && a - r <= REFLECT_CLAMP_REL * b {
        Ok(a)
    } else if r > b && r - b <= REFLECT_CLAMP_REL * b {
        Ok(b)
    } else {
        Err(Error::OutsideInterval { x: r, a, b })
    }
}

pub(crate) fn reflect_eval(x: f64, interval: &Interval, p: PParam) -> Result<f64, EvalError> {
    p_reflect(x, interval, p).map_err(|e| EvalError::domain(e.to_string(), x))
}

/// `P(x) = (f(x) + f(reflect(x))) / 2`.
#[derive(Debug, Clone)]
pub struct PSymmetrical<F> {
    f: F,
    interval: Interval,
    p: PParam,
}

/// `AP(x) = (f(x) - f(reflect(x))) / 2`.
#[derive(Debug, Clone)]
pub struct AntiPSymmetrical<F> {
    f: F,
    interval: Interval,
    p: PParam,
}

pub fn p_sym_transform<F: Univariate>(f: F, interval: Interval, p: PParam) -> PSymmetrical<F> {
    PSymmetrical { f, interval, p }
}

pub fn p_antisym_transform<F: Univariate>(
    f: F,
    interval: Interval,
    p: PParam,
) -> AntiPSymmetrical<F> {
    AntiPSymmetrical { f, interval, p }
}

impl<F> PSymmetrical<F> {
    pub fn inner(&self) -> &F {
        &self.f
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn p(&self) -> PParam {
        self.p
    }
}

impl<F: Univariate> Univariate for PSymmetrical<F> {
    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let r = reflect_eval(x, &self.interval, self.p)?;
        Ok(0.5 * (self.f.eval(x)? + self.f.eval(r)?))
    }
}

impl<F: Univariate> Univariate for AntiPSymmetrical<F> {
    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let r = reflect_eval(x, &self.interval, self.p)?;
        Ok(0.5 * (self.f.eval(x)? - self.f.eval(r)?))
    }
}
