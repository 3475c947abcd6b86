//! The multilinear operator M[Q](f⃗)(x) = ∫ Q(x; x⃗) ∏ f_j(x_j) dx⃗, its
//! L_p norm, the inequality ‖M[Q](f⃗)‖_p ≤ Θ_m(p⃗) ∏‖f_j‖_{p_j}, and a
//! numerical probe of its sharpness.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gls::{lp_norm, Shape, TestFunction};
use crate::kernel::{HomogeneousKernel, KernelSource};
use crate::quadrature::{integrate_product, Axis, IntegralEstimate, QuadratureConfig, Verdict};
use crate::scalar::Scalar;
use crate::theta::{theta, ExponentVector, Membership};

fn check_operands<T: Scalar>(k: &HomogeneousKernel<T>, fs: &[TestFunction<T>]) -> Result<()> {
    if !k.passes_gate() {
        return Err(Error::HomogeneityGate);
    }
    if fs.len() != k.arity() {
        return Err(Error::Dimension(format!("kernel has m = {}, got {} functions", k.arity(), fs.len())));
    }
    Ok(())
}

/// Builtin kernels are bounded near 0 in reduced coordinates and decay at
/// infinity, so compactly supported, locally integrable functions give a
/// finite M(x); the divergence probe is skipped then.
fn known_finite<T: Scalar>(k: &HomogeneousKernel<T>, fs: &[TestFunction<T>]) -> bool {
    matches!(k.source(), KernelSource::Builtin(_))
        && fs.iter().all(|f| {
            let (lo, hi) = f.support();
            hi.is_finite()
                && match f.shape() {
                    Shape::Power { alpha, .. } => lo > T::zero() || *alpha < T::one(),
                    Shape::Expr { .. } => false,
                }
        })
}

fn not_a_number<T: Scalar>(v: T) -> IntegralEstimate<T> {
    IntegralEstimate { value: v, abs_error: T::infinity(), n_evals: 1, verdict: Verdict::Diverging, nonfinite: 0 }
}

/// M[Q](f⃗)(x) through the reduced form: x_j = x·y_j turns the integral into
/// ∫ Q(1, y⃗) ∏ f_j(x·y_j) dy⃗.
pub fn apply_operator<T: Scalar>(k: &HomogeneousKernel<T>, fs: &[TestFunction<T>], x: T, cfg: &QuadratureConfig) -> Result<IntegralEstimate<T>> {
    check_operands(k, fs)?;
    if !(x > T::zero() && x.is_finite()) {
        return Err(Error::InvalidParameter(format!("apply_operator needs x > 0, got {x}")));
    }
    let probe = cfg.divergence_probe && !known_finite(k, fs);
    apply_reduced(k, fs, x, &QuadratureConfig { divergence_probe: probe, ..*cfg })
}

fn apply_reduced<T: Scalar>(k: &HomogeneousKernel<T>, fs: &[TestFunction<T>], x: T, cfg: &QuadratureConfig) -> Result<IntegralEstimate<T>> {
    if fs.iter().any(TestFunction::is_zero) {
        return Ok(IntegralEstimate::zero());
    }
    let upper = k.reduced_support_upper();
    let mut breaks = k.reduced_breakpoints();
    breaks.push(T::one());
    let mut axes = Vec::with_capacity(fs.len());
    for f in fs {
        let (lo, hi) = f.support();
        let (lo, mut hi) = (lo / x, hi / x);
        if let Some(u) = upper {
            hi = hi.min(u);
        }
        if !(hi > lo) {
            return Ok(IntegralEstimate::zero());
        }
        let mut axis = Axis::new(lo, hi).with_breaks(breaks.clone());
        if let Some(e) = f.lo_exponent() {
            axis = axis.with_lo_exponent(e.max(-T::one()));
        }
        axes.push(axis);
    }
    integrate_product(&axes, |j, y| fs[j].eval(x * y), |y: &[T]| k.reduced_eval(y), cfg)
}

const ERROR_LEVEL: u32 = 4;

/// ‖M[Q](f⃗)‖_p by nested quadrature; the inner integrals run ten times
/// tighter than the outer one. Quasi-norms (0 < p < 1) are admitted since
/// resultant exponents below 1 occur for m ≥ 3.
pub fn operator_lp_norm<T: Scalar>(k: &HomogeneousKernel<T>, fs: &[TestFunction<T>], p: T, cfg: &QuadratureConfig) -> Result<IntegralEstimate<T>> {
    check_operands(k, fs)?;
    cfg.validate()?;
    if !(p > T::zero() && p.is_finite()) {
        return Err(Error::InvalidExponent(format!("operator norm needs 0 < p < ∞, got {p}")));
    }
    if fs.iter().any(TestFunction::is_zero) {
        return Ok(IntegralEstimate::zero());
    }
    let finite = known_finite(k, fs);
    let inner = QuadratureConfig {
        rel_tol: cfg.rel_tol / 10.0,
        abs_tol: cfg.abs_tol / 10.0,
        divergence_probe: cfg.divergence_probe && !finite,
        ..*cfg
    };
    let outer = QuadratureConfig { divergence_probe: cfg.divergence_probe && !finite, ..*cfg };
    let mut breaks = vec![T::one()];
    for f in fs {
        let (lo, hi) = f.support();
        breaks.extend([lo, hi].into_iter().filter(|v| *v > T::zero() && v.is_finite()));
    }
    let mut axis = Axis::half_line().with_breaks(breaks);
    if fs.iter().all(|f| f.support().1.is_finite()) {
        // M(x) ~ C x^−m beyond the supports
        let decay = T::from_usize_lossy(fs.len()) * p - T::one();
        if decay > T::zero() {
            axis = axis.with_tail_decay(decay);
        }
    }
    let singular: Option<T> = fs.iter().map(|f| f.lo_exponent()).sum();
    if let Some(e) = singular {
        axis = axis.with_lo_exponent((e * p).max(-T::one()).min(T::zero()));
    }

    // inner results per outer node; the error pass below revisits the same nodes
    let cache: Mutex<HashMap<u64, (T, T, Verdict)>> = Mutex::new(HashMap::new());
    let inner_at = |x: T| -> (T, T, Verdict) {
        let key = x.as_f64().to_bits();
        if let Some(&hit) = cache.lock().unwrap().get(&key) {
            return hit;
        }
        let r = match apply_reduced(k, fs, x, &inner) {
            Ok(m) => (m.value.abs(), m.abs_error, m.verdict),
            Err(_) => (T::nan(), T::infinity(), Verdict::Inconclusive),
        };
        cache.lock().unwrap().insert(key, r);
        r
    };
    let est = integrate_product(&[axis.clone()], |_, _| T::one(), |x: &[T]| inner_at(x[0]).0.powf(p), &outer)?;
    let diverging = cache.lock().unwrap().values().any(|r| r.2 == Verdict::Diverging);
    if est.verdict == Verdict::Diverging || diverging {
        return Ok(not_a_number(T::infinity()));
    }
    // first-order propagation of the inner errors: δ∫M^p ≈ ∫ p M^{p−1} δM,
    // on a coarse level whose nodes are already cached
    let loose = QuadratureConfig { rel_tol: 1e-2, level_cap: ERROR_LEVEL, divergence_probe: false, ..outer };
    let propagated = integrate_product(
        &[axis],
        |_, _| T::one(),
        |x: &[T]| {
            let (v, e, _) = inner_at(x[0]);
            if v > T::zero() {
                p * v.powf(p - T::one()) * e
            } else if e > T::zero() {
                e.powf(p)
            } else {
                T::zero()
            }
        },
        &loose,
    )?;
    let inner_err = if propagated.value.is_finite() { propagated.value.abs() + propagated.abs_error } else { T::infinity() };
    let err_p = est.abs_error + inner_err;
    let value = est.value.max(T::zero()).powf(p.recip());
    let abs_error = if est.value > T::zero() { value * err_p / (p * est.value) } else { err_p.powf(p.recip()) };
    let tol = T::lit(cfg.abs_tol).max(T::lit(cfg.rel_tol) * value);
    let verdict = if est.verdict == Verdict::Converged && abs_error <= tol {
        Verdict::Converged
    } else {
        Verdict::Inconclusive
    };
    Ok(IntegralEstimate { value, abs_error, verdict, n_evals: est.n_evals + propagated.n_evals, nonfinite: est.nonfinite })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Θ_m(p⃗) = ∞: the inequality holds trivially and says nothing.
    Vacuous,
    /// Some component did not converge.
    Unknown,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Vacuous => "vacuous",
            CheckStatus::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport<T> {
    pub lhs: T,
    pub lhs_err: T,
    pub rhs: T,
    pub rhs_err: T,
    /// (rhs − lhs)/rhs; 0 when rhs = 0.
    pub margin: T,
    pub status: CheckStatus,
}

/// lhs ≤ rhs·(1 + tol) with tol aggregating both error estimates.
pub fn compare<T: Scalar>(lhs: T, lhs_err: T, rhs: T, rhs_err: T) -> bool {
    if rhs == T::zero() {
        return lhs <= lhs_err;
    }
    let tol = (lhs_err + rhs_err) / rhs + T::lit(1e-12);
    lhs <= rhs * (T::one() + tol)
}

fn margin<T: Scalar>(lhs: T, rhs: T) -> T {
    if rhs == T::zero() || !rhs.is_finite() {
        T::zero()
    } else {
        (rhs - lhs) / rhs
    }
}

/// ‖M[Q](f⃗)‖_p ≤ Θ_m(p⃗) ∏ ‖f_j‖_{p_j} at the resultant exponent p.
pub fn check_inequality<T: Scalar>(
    k: &HomogeneousKernel<T>,
    fs: &[TestFunction<T>],
    p: &ExponentVector<T>,
    cfg: &QuadratureConfig,
) -> Result<InequalityReport<T>> {
    check_operands(k, fs)?;
    let th = theta(k, p, cfg)?;
    let mut norms = Vec::with_capacity(fs.len());
    for (f, &pj) in fs.iter().zip(p.as_slice()) {
        norms.push(lp_norm(f, pj, cfg)?);
    }
    let lhs = operator_lp_norm(k, fs, p.resultant(), cfg)?;
    let prod: T = norms.iter().map(|n| n.value).product();
    let rel_norms: T = norms.iter().map(|n| if n.value > T::zero() { n.abs_error / n.value } else { T::zero() }).sum();
    let (rhs, rhs_err) = match th.membership {
        Membership::InDm => {
            let rhs = th.theta * prod;
            (rhs, rhs * (th.abs_error() / th.theta + rel_norms))
        }
        _ => (th.theta, T::infinity()),
    };
    let all_converged = lhs.is_converged() && norms.iter().all(|n| n.is_converged());
    let status = match th.membership {
        Membership::NotInDm => CheckStatus::Vacuous,
        Membership::Unknown => CheckStatus::Unknown,
        Membership::InDm if !all_converged || !rhs.is_finite() => CheckStatus::Unknown,
        Membership::InDm => {
            if compare(lhs.value, lhs.abs_error, rhs, rhs_err) {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            }
        }
    };
    Ok(InequalityReport { lhs: lhs.value, lhs_err: lhs.abs_error, rhs, rhs_err, margin: margin(lhs.value, rhs), status })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessProbe<T> {
    pub eps: Vec<T>,
    /// ‖M(f⃗^ε)‖_p / ∏‖f_j^ε‖_{p_j} per ε.
    pub ratios: Vec<T>,
    pub ratio_errs: Vec<T>,
    pub target: T,
    pub target_err: T,
    /// L of the fit ratio(ε) ≈ L − c·ε^γ through the last three ε.
    pub extrapolated: T,
    pub gamma: T,
    /// Largest relative deviation of the fitted curve from all ratios; zero
    /// with exactly three ε, where the fit interpolates.
    pub fit_residual: T,
    /// Ratios nondecreasing as ε decreases, within 3× their errors.
    pub monotone: bool,
}

/// Near-extremal family f_j^ε(x) = x^{−(1+ε)/p_j} 𝟙_{[1,∞)}(x), with
/// ‖f_j^ε‖_{p_j} = ε^{−1/p_j}.
///
/// Then M(x) = x^{−(1+ε)/p} G(1/x) with G(δ) = ∫_{[δ,∞)^m} Q(1,y⃗) ∏ y_j^{−(1+ε)/p_j} dy⃗,
/// and substituting δ = 1/x,
///   ε‖M‖_p^p = G(0)^p + ε ∫_0^1 δ^{ε−1}(G(δ)^p − G(0)^p) dδ + ε ∫_1^∞ δ^{ε−1} G(δ)^p dδ,
/// so the ratio (ε‖M‖_p^p)^{1/p} tends to G(0) → Θ_m(p⃗). The leading term is
/// taken analytically; only the bounded remainders are integrated.
pub fn sharpness_probe<T: Scalar>(k: &HomogeneousKernel<T>, p: &ExponentVector<T>, eps: &[T], cfg: &QuadratureConfig) -> Result<SharpnessProbe<T>> {
    if !k.passes_gate() {
        return Err(Error::HomogeneityGate);
    }
    if eps.len() < 3 {
        return Err(Error::InvalidParameter("sharpness needs at least three ε values".into()));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) || eps.iter().any(|&e| !(e > T::zero() && e <= T::lit(0.5))) {
        return Err(Error::InvalidParameter("ε must be decreasing values in (0, 0.5]".into()));
    }
    let th = theta(k, p, cfg)?;
    if th.membership != Membership::InDm {
        return Err(Error::InvalidExponent(format!("Θ is not finite at {p}")));
    }
    let ps = p.as_slice();
    if let Some(&e) = eps.iter().find(|&&e| ps.iter().any(|&pj| (T::one() + e) / pj >= T::one())) {
        return Err(Error::InvalidParameter(format!("ε = {e} makes some (1+ε)/p_j ≥ 1")));
    }
    let mut ratios = Vec::with_capacity(eps.len());
    let mut ratio_errs = Vec::with_capacity(eps.len());
    for &e in eps {
        let (r, err) = sharpness_ratio(k, p, e, cfg)?;
        let tol = T::lit(1e-6) + (err + th.abs_error()) / th.theta;
        if r > th.theta * (T::one() + tol) {
            return Err(Error::SharpnessViolation { ratio: r.as_f64(), target: th.theta.as_f64() });
        }
        ratios.push(r);
        ratio_errs.push(err);
    }
    let n = eps.len();
    let (l, gamma) = richardson(&eps[n - 3..], &ratios[n - 3..]);
    let c = if gamma.is_finite() { (l - ratios[n - 1]) / eps[n - 1].powf(gamma) } else { T::zero() };
    let fit_residual = eps
        .iter()
        .zip(&ratios)
        .map(|(&e, &r)| ((l - c * e.powf(gamma)) - r).abs() / l.abs())
        .fold(T::zero(), T::max);
    let monotone = ratios.windows(2).zip(ratio_errs.windows(2)).all(|(r, e)| r[1] >= r[0] - T::lit(3.0) * (e[0] + e[1]));
    Ok(SharpnessProbe {
        eps: eps.to_vec(),
        ratios,
        ratio_errs,
        target: th.theta,
        target_err: th.abs_error(),
        extrapolated: l,
        gamma,
        fit_residual,
        monotone,
    })
}

/// Fits r(ε) = L − c ε^γ through three points (ε decreasing). Falls back to
/// γ = 1 through the last two when the increments do not shrink geometrically.
fn richardson<T: Scalar>(e: &[T], r: &[T]) -> (T, T) {
    let (d1, d2) = (r[1] - r[0], r[2] - r[1]);
    let linear = |g: T| {
        let c = (r[2] - r[1]) / (e[1].powf(g) - e[2].powf(g));
        (r[2] + c * e[2].powf(g), g)
    };
    if d1 == T::zero() || d2 == T::zero() || (d1 > T::zero()) != (d2 > T::zero()) {
        return linear(T::one());
    }
    let target = d1 / d2;
    let ratio = |g: T| (e[0].powf(g) - e[1].powf(g)) / (e[1].powf(g) - e[2].powf(g));
    let (mut lo, mut hi) = (T::lit(0.05), T::lit(5.0));
    // ratio(γ) increases in γ for decreasing ε
    if !(ratio(lo) <= target && target <= ratio(hi)) {
        return linear(T::one());
    }
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if ratio(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    linear((lo + hi) / T::lit(2.0))
}

/// (ratio, abs error) for one ε.
fn sharpness_ratio<T: Scalar>(k: &HomogeneousKernel<T>, p: &ExponentVector<T>, eps: T, cfg: &QuadratureConfig) -> Result<(T, T)> {
    let ps = p.as_slice();
    let pr = p.resultant();
    let expo: Vec<T> = ps.iter().map(|&pj| -(T::one() + eps) / pj).collect();
    let inner = QuadratureConfig { rel_tol: cfg.rel_tol / 10.0, abs_tol: cfg.abs_tol / 10.0, divergence_probe: false, ..*cfg };
    let mut breaks = k.reduced_breakpoints();
    breaks.push(T::one());
    let worst = Mutex::new((T::zero(), true));
    let g = |delta: T| -> T {
        let axes: Vec<Axis<T>> = expo
            .iter()
            .map(|&a| {
                let hi = k.reduced_support_upper().map_or(T::infinity(), |u| u.max(delta));
                let base = Axis::new(delta, hi).with_breaks(breaks.clone());
                if delta == T::zero() {
                    base.with_lo_exponent(a)
                } else {
                    base
                }
            })
            .collect();
        match integrate_product(&axes, |j, y| y.powf(expo[j]), |y: &[T]| k.reduced_eval(y), &inner) {
            Ok(est) => {
                let mut w = worst.lock().unwrap();
                w.1 &= est.is_converged();
                if est.value != T::zero() {
                    w.0 = w.0.max(est.abs_error / est.value.abs());
                }
                est.value.abs()
            }
            Err(_) => T::nan(),
        }
    };
    let g0 = g(T::zero());
    let g0p = g0.powf(pr);
    // ∫_0^1 δ^{ε−1}(G^p − G0^p): the difference vanishes like δ^{min a_j}
    let a_min = expo.iter().fold(T::infinity(), |m, &a| m.min(T::one() + a));
    let near_cfg = QuadratureConfig { divergence_probe: false, ..*cfg };
    let near = integrate_product(
        &[Axis::new(T::zero(), T::one()).with_lo_exponent((eps - T::one() + a_min).min(T::zero()))],
        |_, d| d.powf(eps - T::one()),
        |d: &[T]| g(d[0]).powf(pr) - g0p,
        &near_cfg,
    )?;
    // ∫_1^∞ δ^{ε−1} G^p: G(δ) decays like δ^{−(1+ε)/p}, so the integrand like δ^{−2}
    let far = if k.reduced_support_upper().is_some_and(|u| u <= T::one()) {
        IntegralEstimate::zero()
    } else {
        integrate_product(
            &[Axis::new(T::one(), T::infinity()).with_tail_decay(T::one())],
            |_, d| d.powf(eps - T::one()),
            |d: &[T]| g(d[0]).powf(pr),
            &near_cfg,
        )?
    };
    let (inner_rel, inner_ok) = worst.into_inner().unwrap();
    if !(near.is_converged() && far.is_converged() && inner_ok) {
        return Err(Error::Unsupported(format!("sharpness quadrature did not converge at ε = {eps}")));
    }
    let total = g0p + eps * (near.value + far.value);
    let ratio = total.powf(pr.recip());
    let err = ratio / pr * ((eps * (near.abs_error + far.abs_error)) / total + pr * inner_rel);
    Ok((ratio, err))
}
