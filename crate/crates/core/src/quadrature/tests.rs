use std::f64::consts::PI;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

/// Plain Monte Carlo for ∫∫ (1+x1+x2)^−2 (x1 x2)^−1/2 after x = tan²(πu/2):
/// the transformed integrand is bounded, so 10⁶ samples give ~1e-3 accuracy.
fn mc_beta_oracle(n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0.0;
    for _ in 0..n {
        let (u1, u2): (f64, f64) = (rng.random(), rng.random());
        let (y1, y2) = ((PI * u1 / 2.0).tan(), (PI * u2 / 2.0).tan());
        let jac = (PI / 2.0).powi(2) * (1.0 + y1 * y1) * (1.0 + y2 * y2);
        acc += 4.0 * (1.0 + y1 * y1 + y2 * y2).powi(-2) * jac;
    }
    acc / n as f64
}

#[test]
fn separable_exponential() {
    let r = integrate_halfline_m(|x: &[f64]| (-x[0] - x[1]).exp(), &[0.0, 0.0], &cfg()).unwrap();
    assert!(r.is_converged());
    assert!((r.value - 1.0).abs() < 1e-8, "{r:?}");
}

#[test]
fn beta_identity_integral_matches_pi_and_monte_carlo() {
    let r = integrate_halfline_m(|x: &[f64]| (1.0 + x[0] + x[1]).powi(-2), &[-0.5, -0.5], &cfg()).unwrap();
    assert!(r.is_converged(), "{r:?}");
    assert!((r.value - PI).abs() < 1e-7, "{r:?}");
    let mc = mc_beta_oracle(1_000_000, 42);
    assert!((mc - PI).abs() < 1e-2, "mc oracle {mc}");
    assert!((r.value - mc).abs() < 1e-2);
}

#[test]
fn log_divergence_is_flagged() {
    let r = integrate_halfline_m(|x: &[f64]| (1.0 + x[0] + x[1]).powi(-2), &[-1.0, -0.5], &cfg()).unwrap();
    assert_eq!(r.verdict, Verdict::Diverging);
    assert!(r.value.is_infinite());
}

#[test]
fn weight_exponents_out_of_range_are_rejected() {
    let e = integrate_halfline_m(|_: &[f64]| 1.0, &[-1.5, 0.0], &cfg()).unwrap_err();
    assert_eq!(e, Error::WeightExponent(-1.5));
    assert!(integrate_halfline_m(|_: &[f64]| 1.0, &[0.5, 0.0], &cfg()).is_err());
}

#[test]
fn one_dimensional_examples() {
    let r = integrate_halfline_1(|x: f64| (-x).exp(), &cfg()).unwrap();
    assert!(r.is_converged() && (r.value - 1.0).abs() < 1e-10, "{r:?}");
    let r = integrate_halfline_1(|x: f64| if x <= 1.0 { 1.0 } else { 0.0 }, &cfg()).unwrap();
    assert!((r.value - 1.0).abs() < 1e-12, "{r:?}");
    let r = integrate_axis(Axis::new(0.0, 1.0).with_lo_exponent(-0.5), |x: f64| x.powf(-0.5), &cfg()).unwrap();
    assert!(r.is_converged() && (r.value - 2.0).abs() < 1e-8, "{r:?}");
}

#[test]
fn invalid_config_is_rejected() {
    let bad = QuadratureConfig { rel_tol: 0.0, ..cfg() };
    assert!(matches!(integrate_halfline_1(|x: f64| x, &bad), Err(Error::Config(_))));
    let bad = QuadratureConfig { max_evals: 10, ..cfg() };
    assert!(bad.validate().is_err());
    let bad = QuadratureConfig { abs_tol: 1.0, ..cfg() };
    assert!(bad.validate().is_err());
}

#[test]
fn exhausted_budget_is_inconclusive() {
    let tight = QuadratureConfig { max_evals: 100, rel_tol: 1e-14, divergence_probe: false, ..cfg() };
    let r = integrate_halfline_m(|x: &[f64]| (1.0 + x[0] + x[1]).powi(-2), &[-0.5, -0.5], &tight).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive);
    assert!(r.value.is_finite() && r.n_evals > 0);
}

#[test]
fn nonfinite_nodes_are_reported() {
    let r = integrate_halfline_1(|x: f64| if (x - 1.0).abs() < 0.2 { f64::NAN } else { (-x).exp() }, &cfg()).unwrap();
    assert!(r.nonfinite > 0);
    assert_eq!(r.verdict, Verdict::Inconclusive);
}

#[test]
fn linearity() {
    let f = |x: &[f64]| (1.0 + x[0] + x[1]).powi(-3);
    let c = cfg().without_probe();
    let base = integrate_halfline_m(f, &[-0.25, -0.5], &c).unwrap().value;
    for alpha in [2.0, 10.0] {
        let scaled = integrate_halfline_m(|x: &[f64]| alpha * f(x), &[-0.25, -0.5], &c).unwrap().value;
        assert!(((scaled - alpha * base) / (alpha * base)).abs() < 1e-12);
    }
}

#[test]
fn tensor_and_quasi_monte_carlo_agree() {
    let tensor = cfg().without_probe();
    let qmc = QuadratureConfig { method: Method::QuasiMonteCarlo, rel_tol: 1e-3, seed: 9, ..tensor };
    type Smoke = (fn(&[f64]) -> f64, Vec<f64>);
    let cases: Vec<Smoke> = vec![
        (|x| (-x[0] - 2.0 * x[1]).exp(), vec![0.0, -0.5]),
        (|x| (1.0 + x[0] + x[1]).powi(-3), vec![-0.5, -0.25]),
        (|x| (1.0 + x[0] + x[1] + x[2]).powi(-4), vec![-0.5, -0.5, -0.5]),
        (|x| (-(x[0] + x[1] + x[2])).exp() * (1.0 + x[0] * x[1]), vec![0.0, 0.0, -0.3]),
    ];
    for (f, w) in cases {
        let a = integrate_halfline_m(f, &w, &tensor).unwrap();
        let b = integrate_halfline_m(f, &w, &qmc).unwrap();
        let diff = (a.value - b.value).abs();
        assert!(diff <= 3.0 * (a.abs_error + b.abs_error), "{a:?} vs {b:?}");
    }
}

#[test]
fn quasi_monte_carlo_four_dimensions() {
    // ∫ (1+Σx)^−4 ∏ x_j^−1/2 = Γ(1/2)^4 Γ(2) / Γ(4) = π²/6
    let c = cfg();
    let r = integrate_halfline_m(|x: &[f64]| (1.0 + x.iter().sum::<f64>()).powi(-4), &[-0.5; 4], &c).unwrap();
    let exact = PI * PI / 6.0;
    assert!((r.value - exact).abs() <= 4.0 * r.abs_error + 1e-3, "{r:?}");
    let again = integrate_halfline_m(|x: &[f64]| (1.0 + x.iter().sum::<f64>()).powi(-4), &[-0.5; 4], &c).unwrap();
    assert_eq!(r.value.to_bits(), again.value.to_bits());
}

#[test]
fn error_estimates_are_honest_on_oracle_suite() {
    let c = cfg().without_probe();
    // (integrand, weights, exact value)
    type Case = (Box<dyn Fn(&[f64]) -> f64 + Sync>, Vec<f64>, f64);
    let g = crate::special::gamma::<f64>;
    let dirichlet = |a: &[f64], s: f64| a.iter().map(|&v| g(v)).product::<f64>() * g(s - a.iter().sum::<f64>()) / g(s);
    let mut cases: Vec<Case> = Vec::new();
    for &(p1, p2) in &[(2.0, 2.0), (4.0, 4.0), (3.0, 6.0), (1.5, 5.0), (1.25, 1.25), (8.0, 1.2)] {
        let w = vec![-1.0 / p1, -1.0 / p2];
        let exact = dirichlet(&[1.0 - 1.0 / p1, 1.0 - 1.0 / p2], 2.0);
        cases.push((Box::new(|x: &[f64]| (1.0 + x[0] + x[1]).powi(-2)), w, exact));
    }
    for &(a, b) in &[(0.5, 0.5), (0.25, 0.9), (1.0, 1.0)] {
        let exact = dirichlet(&[a, b], 3.0);
        cases.push((Box::new(|x: &[f64]| (1.0 + x[0] + x[1]).powi(-3)), vec![a - 1.0, b - 1.0], exact));
    }
    for &(a, b) in &[(0.5, 0.7), (1.0, 0.2)] {
        let exact = g(a) * g(b);
        cases.push((Box::new(|x: &[f64]| (-x[0] - x[1]).exp()), vec![a - 1.0, b - 1.0], exact));
    }
    cases.push((Box::new(|x: &[f64]| (1.0 + x[0] + x[1] + x[2]).powi(-3)), vec![-0.5; 3], PI * PI / 4.0));
    cases.push((Box::new(|x: &[f64]| if x[0] <= 1.0 && x[1] <= 1.0 { 1.0 } else { 0.0 }), vec![-0.5, -0.75], 8.0));
    let mut honest = 0;
    for (f, w, exact) in &cases {
        let r = integrate_halfline_m(f, w, &c).unwrap();
        if (r.value - exact).abs() <= 5.0 * r.abs_error.max(1e-15 * exact) {
            honest += 1;
        }
    }
    assert!(honest * 100 >= 95 * cases.len(), "{honest}/{}", cases.len());
}

#[test]
fn summation_is_reproducible_bit_for_bit() {
    let f = |x: &[f64]| (1.0 + x[0] + 2.0 * x[1]).powi(-2) * (1.0 + x[0]).ln_1p();
    let a = integrate_halfline_m(f, &[-0.3, -0.6], &cfg()).unwrap();
    let b = integrate_halfline_m(f, &[-0.3, -0.6], &cfg()).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.abs_error.to_bits(), b.abs_error.to_bits());
}

#[test]
fn single_precision_path() {
    let c = QuadratureConfig { rel_tol: 1e-5, abs_tol: 1e-7, ..cfg() };
    let r = integrate_halfline_1(|x: f32| (-x).exp(), &c).unwrap();
    assert!((r.value - 1.0).abs() < 1e-5, "{r:?}");
    let r = integrate_halfline_m(|x: &[f32]| (1.0 + x[0] + x[1]).powi(-2), &[-0.5f32, -0.5], &c).unwrap();
    assert!((r.value - std::f32::consts::PI).abs() < 1e-3, "{r:?}");
}

#[test]
fn empty_axis_integrates_to_zero() {
    let r = integrate_axis(Axis::new(1.0, 1.0), |_: f64| 1.0, &cfg()).unwrap();
    assert_eq!(r.value, 0.0);
    assert!(r.is_converged());
}

#[test]
fn slow_convergence_is_not_mistaken_for_divergence() {
    let r = integrate_axis(Axis::new(0.0, 1.0).with_lo_exponent(-0.9), |x: f64| x.powf(-0.9), &cfg()).unwrap();
    assert!(r.is_converged(), "{r:?}");
    assert!((r.value - 10.0).abs() < 1e-6, "{r:?}");
    let r = integrate_axis(Axis::new(0.0, 1.0).with_lo_exponent(-1.0), |x: f64| x.recip(), &cfg()).unwrap();
    assert_eq!(r.verdict, Verdict::Diverging);
}

#[test]
fn wide_finite_segments_use_log_scale() {
    // ∫_0^{1e25} (1+x)^−2 = 1 − 1/(1+1e25)
    let axis = Axis::new(0.0, 1e25).with_breaks(vec![1.0]);
    let r = integrate_axis(axis, |x: f64| (1.0 + x).powi(-2), &cfg()).unwrap();
    assert!(r.is_converged() && (r.value - 1.0).abs() < 1e-10, "{r:?}");
    let r = integrate_axis(Axis::new(2.0, 3e6), |x: f64| x.recip(), &cfg()).unwrap();
    assert!((r.value - (1.5e6f64).ln()).abs() < 1e-10, "{r:?}");
}
