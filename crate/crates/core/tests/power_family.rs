//! Weighted and fractional chains built from the power family
//! `(x^p - a^p)^(α-1)` and its mirror.

use symmconv::analysis::GridSpec;
use symmconv::expr::{BoundExpr, FuncExpr, ParamBindings, Univariate};
use symmconv::inequalities::{fejer_fractional, fejer_weighted};
use symmconv::integrate::{frac_integral_left, frac_integral_right, gamma, FracOrder, QuadConfig};
use symmconv::meanspace::{Interval, PParam};

fn bind(src: &str, p: f64, a: f64, b: f64, alpha: f64) -> BoundExpr {
    let bindings = ParamBindings::new()
        .with("p", p)
        .unwrap()
        .with("a", a)
        .unwrap()
        .with("b", b)
        .unwrap()
        .with("alpha", alpha)
        .unwrap();
    FuncExpr::parse(src).unwrap().bind(&bindings).unwrap()
}

/// `J_{A+}^α (h∘g)(B) + J_{B-}^α (h∘g)(A)` with `g(u) = u^(1/p)`.
fn j_sum<H: Univariate>(h: &H, a: f64, b: f64, p: f64, alpha: f64) -> f64 {
    let (lo, hi) = (a.powf(p).min(b.powf(p)), a.powf(p).max(b.powf(p)));
    let hg = symmconv::expr::from_fn(|u: f64| h.eval(u.powf(1.0 / p).clamp(a, b)));
    let order = FracOrder::new(alpha).unwrap();
    let cfg = QuadConfig::default();
    frac_integral_left(&hg, lo, hi, order, &cfg).unwrap().value
        + frac_integral_right(&hg, hi, lo, order, &cfg).unwrap().value
}

fn simpson(g: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut s = g(lo) + g(hi);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * g(lo + k as f64 * h);
    }
    s * h / 3.0
}

const CASES: [(f64, f64, f64, f64); 4] = [
    (1.0, 1.0, 2.0, 2.0),
    (2.0, 1.0, 2.0, 3.0),
    (0.5, 1.0, 3.0, 2.5),
    (3.0, 1.0, 1.5, 4.0),
];

#[test]
fn power_family_with_arbitrary_weight() {
    // Any nonnegative weight: the chain divided by (b^p - a^p)^(α-1) reads
    // W / 2^(α-1) <= Γ(α) / (2p (b^p - a^p)^(α-1)) J(w) <= W / 2.
    for (p, a, b, alpha) in CASES {
        let f = bind("(x^p-a^p)^(alpha-1)", p, a, b, alpha);
        let w = bind("x + sin(3*x)^2", p, a, b, alpha);
        let r = fejer_weighted(
            &f,
            &w,
            &Interval::new(a, b).unwrap(),
            PParam::new(p).unwrap(),
            &QuadConfig::default(),
            &GridSpec::default(),
        )
        .unwrap();
        assert_eq!(r.terms[1].label, "weighted_integral_P");
        assert!(r.holds, "{r:?}");

        let span = b.powf(p) - a.powf(p);
        let mass = r.integrals[0].value;
        let scaled =
            gamma(alpha).unwrap() / (2.0 * p * span.powf(alpha - 1.0)) * j_sum(&w, a, b, p, alpha);
        let middle = r.terms[1].value / span.powf(alpha - 1.0);
        assert!(
            (middle - scaled).abs() < 1e-9 * mass,
            "p = {p}: {middle} vs {scaled}"
        );
        assert!(mass / 2f64.powf(alpha - 1.0) <= scaled + 1e-9);
        assert!(scaled <= mass / 2.0 + 1e-9);
    }
}

#[test]
fn kernel_weight_gives_fractional_hermite_hadamard() {
    for (p, a, b, alpha) in CASES {
        let w = bind("(x^p-a^p)^(alpha-1) + (b^p-x^p)^(alpha-1)", p, a, b, alpha);
        let f = bind("exp(x^p) + x^(2*p)", p, a, b, alpha);
        let r = fejer_weighted(
            &f,
            &w,
            &Interval::new(a, b).unwrap(),
            PParam::new(p).unwrap(),
            &QuadConfig::default(),
            &GridSpec::default(),
        )
        .unwrap();
        assert_eq!(r.terms[1].label, "weighted_integral_f");
        let span = b.powf(p) - a.powf(p);
        let j = j_sum(&f, a, b, p, alpha);
        assert!(
            (r.terms[1].value - gamma(alpha).unwrap() / p * j).abs()
                < 1e-9 * r.terms[1].value.abs()
        );

        let middle = gamma(alpha + 1.0).unwrap() / (2.0 * span.powf(alpha)) * j;
        let mid = f
            .eval(((a.powf(p) + b.powf(p)) / 2.0).powf(1.0 / p))
            .unwrap();
        let ends = (f.eval(a).unwrap() + f.eval(b).unwrap()) / 2.0;
        assert!(mid <= middle && middle <= ends, "p = {p}");

        // Independent oracle: Simpson in u-space of the kernel-weighted mean.
        let (lo, hi) = (a.powf(p), b.powf(p));
        let oracle = simpson(
            |u| ((u - lo).powf(alpha - 1.0) + (hi - u).powf(alpha - 1.0)) * (u.exp() + u * u),
            lo,
            hi,
            4000,
        ) * alpha
            / (2.0 * span.powf(alpha));
        assert!(
            (middle - oracle).abs() < 1e-8,
            "p = {p}: {middle} vs {oracle}"
        );
    }
}

#[test]
fn symmetric_factor_reproduces_fractional_fejer() {
    // w = [(x^p - a^p)^(α-1) + (b^p - x^p)^(α-1)] φ with φ p-symmetric turns
    // the weighted chain into Γ(α)/p times the fractional Fejér chain of φ.
    for (p, a, b, alpha) in CASES {
        let phi_src = "1 + (x^p - (a^p+b^p)/2)^2";
        let phi = bind(phi_src, p, a, b, alpha);
        let w = bind(
            &format!("((x^p-a^p)^(alpha-1) + (b^p-x^p)^(alpha-1)) * ({phi_src})"),
            p,
            a,
            b,
            alpha,
        );
        let f = bind("x^3 + 1/x", p, a, b, alpha);
        let i = Interval::new(a, b).unwrap();
        let q = PParam::new(p).unwrap();
        let cfg = QuadConfig::default();
        let grid = GridSpec::default();
        let weighted = fejer_weighted(&f, &w, &i, q, &cfg, &grid).unwrap();
        let fractional =
            fejer_fractional(&f, &phi, &i, q, FracOrder::new(alpha).unwrap(), &cfg, &grid).unwrap();
        let factor = gamma(alpha).unwrap() / p;
        for k in 0..3 {
            let lhs = weighted.terms[k].value;
            let rhs = factor * fractional.terms[k].value;
            assert!(
                (lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0),
                "p = {p}, term {k}: {lhs} vs {rhs}"
            );
        }
        assert!(weighted.holds && fractional.holds);
    }
}

#[test]
fn negative_p_uses_mirrored_operator_placement() {
    let (p, a, b, alpha) = (-1.0, 1.0, 2.0, 1.5);
    let f = bind("x^2", p, a, b, alpha);
    let one = bind("1", p, a, b, alpha);
    let r = fejer_fractional(
        &f,
        &one,
        &Interval::new(a, b).unwrap(),
        PParam::new(p).unwrap(),
        FracOrder::new(alpha).unwrap(),
        &QuadConfig::default(),
        &GridSpec::default(),
    )
    .unwrap();
    assert!(r.notes.iter().any(|n| n.starts_with("case (ii)")));
    assert!(r.holds);
    // J sum of 1 over [1/2, 1] is 2 (1/2)^α / Γ(α+1).
    let expected = 2.0 * 0.5f64.powf(alpha) / gamma(alpha + 1.0).unwrap();
    let mid = f.eval(4.0 / 3.0).unwrap();
    assert!((r.terms[0].value / mid - expected).abs() < 1e-10);
}
