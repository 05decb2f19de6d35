//! Quadrature backend.
//!
//! Everything funnels through [`integrate_adaptive`], a globally adaptive
//! Gauss–Kronrod 7/15 scheme that always bisects the segment with the largest
//! error estimate. Fractional integrals with order `alpha < 1` are regularized
//! by a power substitution so the weakly singular kernel disappears before the
//! integrand reaches the quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Univariate;
use crate::meanspace::{Interval, PParam};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let ok_tol = |t: f64| t.is_finite() && t > 0.0;
        if !ok_tol(abs_tol) || !ok_tol(rel_tol) {
            return Err(Error::InvalidQuad(format!(
                "tolerances must be positive and finite (abs_tol = {abs_tol}, rel_tol = {rel_tol})"
            )));
        }
        if max_subdivisions < 1 {
            return Err(Error::InvalidQuad("max_subdivisions must be >= 1".into()));
        }
        Ok(QuadConfig {
            abs_tol,
            rel_tol,
            max_subdivisions,
        })
    }

    /// Same tolerance for the absolute and relative criteria.
    pub fn with_tolerance(tol: f64) -> Result<Self> {
        QuadConfig::new(tol, tol, QuadConfig::default().max_subdivisions)
    }
}

/// Result of a quadrature. A non-converged estimate is still the best
/// available value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub converged: bool,
    pub evaluations: usize,
}

impl Integral {
    fn exact(value: f64) -> Self {
        Integral {
            value,
            abs_error: 0.0,
            converged: true,
            evaluations: 0,
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Integral {
            value: self.value * factor,
            abs_error: self.abs_error * factor.abs(),
            ..self
        }
    }

    /// Sum of two estimates; converged only if both are.
    pub fn plus(self, other: Integral) -> Self {
        Integral {
            value: self.value + other.value,
            abs_error: self.abs_error + other.abs_error,
            converged: self.converged && other.converged,
            evaluations: self.evaluations + other.evaluations,
        }
    }
}

// Kronrod abscissae and weights (QUADPACK qk15); the Gauss 7-point weights
// belong to the odd-indexed abscissae.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    seq: usize,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    // Max-heap on error; older segments first on ties.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One 15-point Kronrod panel: (estimate, error estimate).
fn gk15<F: Univariate + ?Sized>(f: &F, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f.eval(center)?;
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f.eval(center - dx)?;
        let f2 = f.eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = (res_k - res_g) * half;
    let habs = half.abs();
    Ok((
        res_k * half,
        rescale_error(err, res_abs * habs, res_asc * habs),
    ))
}

/// Integrates `g` over `[lo, hi]` (reverse orientation negates).
///
/// Stops when the summed error estimate is at most
/// `max(abs_tol, rel_tol * |estimate|)`, or flags the result as not converged
/// once `max_subdivisions` segments exist.
pub fn integrate_adaptive<F: Univariate + ?Sized>(
    g: &F,
    lo: f64,
    hi: f64,
    cfg: &QuadConfig,
) -> Result<Integral> {
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Degenerate(format!(
            "integration limits must be finite ({lo}, {hi})"
        )));
    }
    if lo == hi {
        return Ok(Integral::exact(0.0));
    }
    if lo > hi {
        return integrate_adaptive(g, hi, lo, cfg).map(|r| r.scaled(-1.0));
    }

    let (value, error) = gk15(g, lo, hi)?;
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        lo,
        hi,
        value,
        error,
        seq: 0,
    });
    let mut seq = 1;
    let mut total = value;
    let mut total_err = error;
    let mut converged = false;

    loop {
        if total_err <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
            converged = true;
            break;
        }
        if heap.len() >= cfg.max_subdivisions {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(g, worst.lo, mid)?;
        let (v2, e2) = gk15(g, mid, worst.hi)?;
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        for (l, h, v, e) in [(worst.lo, mid, v1, e1), (mid, worst.hi, v2, e2)] {
            heap.push(Segment {
                lo: l,
                hi: h,
                value: v,
                error: e,
                seq,
            });
            seq += 1;
        }
    }

    // Re-sum in positional order so the result does not carry the
    // incremental update's rounding.
    let mut segments = heap.into_vec();
    segments.sort_by(|s, t| s.lo.total_cmp(&t.lo));
    let value = segments.iter().map(|s| s.value).sum();
    let abs_error = segments.iter().map(|s| s.error).sum();
    Ok(Integral {
        value,
        abs_error,
        converged,
        evaluations,
    })
}

/// `(p / (b^p - a^p)) * ∫_a^b f(x) x^(p-1) dx`, the p-weighted mean of `f`.
pub fn p_weighted_integral<F: Univariate + ?Sized>(
    f: &F,
    interval: &Interval,
    p: PParam,
    cfg: &QuadConfig,
) -> Result<Integral> {
    let (ua, ub) = interval.image(p);
    let raw = p_measure_integral(f, interval.a(), interval.b(), p, cfg)?;
    Ok(raw.scaled(p.value() / (ub - ua)))
}

/// `∫_lo^hi g(x) x^(p-1) dx` (unnormalized; `lo > hi` allowed).
pub fn p_measure_integral<F: Univariate + ?Sized>(
    g: &F,
    lo: f64,
    hi: f64,
    p: PParam,
    cfg: &QuadConfig,
) -> Result<Integral> {
    let exponent = p.value() - 1.0;
    let integrand = crate::expr::from_fn(|x: f64| {
        let gx = g.eval(x)?;
        Ok(if exponent == 0.0 {
            gx
        } else {
            gx * x.powf(exponent)
        })
    });
    integrate_adaptive(&integrand, lo, hi, cfg)
}

// ---------------------------------------------------------------------------
// Fractional integrals

/// Order `alpha > 0` of a fractional integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 {
            Ok(FracOrder(alpha))
        } else {
            Err(Error::InvalidOrder(alpha))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

fn frac_integral<F: Univariate + ?Sized>(
    h: &F,
    lo: f64,
    hi: f64,
    side: Side,
    alpha: FracOrder,
    cfg: &QuadConfig,
) -> Result<Integral> {
    let a = alpha.value();
    // The kernel is singular at `hi` for the left operator, at `lo` for the
    // right one.
    let singular_end = match side {
        Side::Left => hi,
        Side::Right => lo,
    };
    if a < 1.0 {
        // u = |singular_end - t|^alpha turns the kernel into the constant 1/alpha.
        let span = (hi - lo).powf(a);
        let inv = 1.0 / a;
        let substituted = crate::expr::from_fn(|u: f64| {
            let offset = u.powf(inv);
            let t = match side {
                Side::Left => singular_end - offset,
                Side::Right => singular_end + offset,
            };
            h.eval(t.clamp(lo, hi))
        });
        let inner = integrate_adaptive(&substituted, 0.0, span, cfg)?;
        Ok(inner.scaled(1.0 / gamma(a + 1.0)?))
    } else {
        let kernel_exp = a - 1.0;
        let integrand = crate::expr::from_fn(|t: f64| {
            let d = (singular_end - t).abs();
            let k = if kernel_exp == 0.0 {
                1.0
            } else {
                d.powf(kernel_exp)
            };
            Ok(k * h.eval(t)?)
        });
        let raw = integrate_adaptive(&integrand, lo, hi, cfg)?;
        Ok(raw.scaled(1.0 / gamma(a)?))
    }
}

/// Left-sided integral `J_{base+}^alpha h(at) = (1/Γ(α)) ∫_base^at (at - t)^(α-1) h(t) dt`.
pub fn frac_integral_left<F: Univariate + ?Sized>(
    h: &F,
    base: f64,
    at: f64,
    alpha: FracOrder,
    cfg: &QuadConfig,
) -> Result<Integral> {
    if !base.is_finite() || !at.is_finite() || base >= at {
        return Err(Error::Degenerate(format!(
            "left fractional integral needs base < at (base = {base}, at = {at})"
        )));
    }
    frac_integral(h, base, at, Side::Left, alpha, cfg)
}

/// Right-sided integral `J_{base-}^alpha h(at) = (1/Γ(α)) ∫_at^base (t - at)^(α-1) h(t) dt`.
pub fn frac_integral_right<F: Univariate + ?Sized>(
    h: &F,
    base: f64,
    at: f64,
    alpha: FracOrder,
    cfg: &QuadConfig,
) -> Result<Integral> {
    if !base.is_finite() || !at.is_finite() || at >= base {
        return Err(Error::Degenerate(format!(
            "right fractional integral needs at < base (base = {base}, at = {at})"
        )));
    }
    frac_integral(h, at, base, Side::Right, alpha, cfg)
}

// ---------------------------------------------------------------------------
// Gamma

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for `x > 0` by the Lanczos approximation (g = 7, 9 terms), with the
/// reflection formula below 1/2.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::GammaDomain(x));
    }
    let value = if x < 0.5 {
        PI / ((PI * x).sin() * lanczos(1.0 - x))
    } else {
        lanczos(x)
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::GammaDomain(x))
    }
}

fn lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let mut sum = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    // t^(z + 1/2) split in two halves to postpone overflow.
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * sum
}

// ---------------------------------------------------------------------------
// Gauss–Legendre

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (pn, d) = legendre_with_derivative(n, x);
                dp = d;
                let step = pn / d;
                x -= step;
                if step.abs() <= 1e-16 {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared 64-point rule.
    pub fn n64() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(64))
    }

    /// Nodes and weights mapped onto `[lo, hi]`.
    pub fn mapped(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| (c + h * x, h * w))
            .collect()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let pn = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * pn - p0) / (x * x - 1.0);
    (pn, d)
}
