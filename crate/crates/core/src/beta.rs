//! The composite generating function
//!   β(p) = inf { Θ_m(p⃗) ∏ ‖f_j‖_{Gψ_j} ψ_j(p_j) : Σ 1/p_j = 1/p, p_j ∈ [a_j, b_j) }
//! and the certification ‖M[Q](f⃗)‖_p ≤ β(p) on a grid of p.
//!
//! The norms are constants under the infimum, so the minimization runs with
//! unit norms and the product is applied afterwards.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gls::{gls_norm, GeneratingFunction, TestFunction};
use crate::kernel::HomogeneousKernel;
use crate::optimize::NelderMead;
use crate::quadrature::QuadratureConfig;
use crate::scalar::Scalar;
use crate::theta::{theta, ExponentVector, Membership};
use crate::verify::{compare, operator_lp_norm};

/// Cells per free coordinate of the initial slice grid.
pub const GRID_CELLS: usize = 17;
/// Reciprocal exponents closer than this to the box boundary are moved inward.
pub const BOUNDARY_CLAMP: f64 = 1e-6;
/// Θ cache resolution in u.
const QUANTUM: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaStatus {
    Finite,
    /// The slice Σ 1/p_j = 1/p misses the box.
    Infeasible,
    /// Θ (or ψ) infinite at every probed point.
    ThetaInfinite,
    /// Finite, but Θ at the minimizer did not converge.
    Inconclusive,
}

impl BetaStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BetaStatus::Finite => "finite",
            BetaStatus::Infeasible => "infeasible",
            BetaStatus::ThetaInfinite => "theta_infinite",
            BetaStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaPoint<T> {
    pub p: T,
    /// β(p) including the norm factors; +∞ unless finite or inconclusive.
    pub value: T,
    /// Minimizing p⃗*; empty when infeasible.
    pub argmin: Vec<T>,
    /// Relative error of Θ at the minimizer.
    pub rel_error: T,
    pub status: BetaStatus,
}

impl<T: Scalar> BetaPoint<T> {
    pub fn is_finite(&self) -> bool {
        self.status == BetaStatus::Finite
    }

    fn infinite(p: T, status: BetaStatus) -> Self {
        Self { p, value: T::infinity(), argmin: Vec::new(), rel_error: T::zero(), status }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaCurve<T> {
    pub samples: Vec<BetaPoint<T>>,
    /// (min, max) of the grid points with finite β.
    pub finiteness_interval: Option<(T, T)>,
    /// False when finite points are separated by non-finite ones.
    pub contiguous: bool,
    pub norm_factors: Vec<T>,
}

#[derive(Clone, Copy)]
struct ThetaValue<T> {
    value: T,
    rel_error: T,
    settled: bool,
}

/// Minimizer over the exponent slice with a shared Θ cache, so a curve
/// reuses Θ values across grid points.
pub struct BetaSolver<'a, T> {
    kernel: &'a HomogeneousKernel<T>,
    psis: &'a [GeneratingFunction<T>],
    cfg: QuadratureConfig,
    cache: Mutex<HashMap<Vec<i64>, ThetaValue<T>>>,
    optimizer: NelderMead,
}

/// Box in u = 1/p for one coordinate; `fixed` for the extremal family.
#[derive(Clone, Copy)]
struct Bounds<T> {
    lo: T,
    hi: T,
    fixed: bool,
}

impl<'a, T: Scalar> BetaSolver<'a, T> {
    pub fn new(kernel: &'a HomogeneousKernel<T>, psis: &'a [GeneratingFunction<T>], cfg: &QuadratureConfig) -> Result<Self> {
        if !kernel.passes_gate() {
            return Err(Error::HomogeneityGate);
        }
        if psis.len() != kernel.arity() {
            return Err(Error::Dimension(format!("kernel has m = {}, got {} generating functions", kernel.arity(), psis.len())));
        }
        cfg.validate()?;
        Ok(Self { kernel, psis, cfg: *cfg, cache: Mutex::new(HashMap::new()), optimizer: NelderMead::default() })
    }

    fn bounds(&self) -> Vec<Bounds<T>> {
        let clamp = T::lit(BOUNDARY_CLAMP);
        self.psis
            .iter()
            .map(|psi| match psi.extremal_point() {
                Some(r) => Bounds { lo: r.recip(), hi: r.recip(), fixed: true },
                None => {
                    let (a, b) = psi.domain();
                    let lo = if b.is_finite() { b.recip() } else { T::zero() };
                    Bounds { lo: lo + clamp, hi: a.recip() - clamp, fixed: false }
                }
            })
            .collect()
    }

    /// Θ at the quantized point, so cached and fresh values agree bit for bit;
    /// extremal coordinates keep their exact r.
    fn theta_at(&self, u: &[T], bounds: &[Bounds<T>]) -> ThetaValue<T> {
        let key: Vec<i64> = u.iter().map(|&v| (v.as_f64() * QUANTUM).round() as i64).collect();
        if let Some(&hit) = self.cache.lock().unwrap().get(&key) {
            return hit;
        }
        let ps: Vec<T> = key
            .iter()
            .zip(bounds)
            .zip(self.psis)
            .map(|((&q, b), psi)| if b.fixed { psi.extremal_point().unwrap() } else { T::lit(QUANTUM / q as f64) })
            .collect();
        let value = match ExponentVector::new(ps).and_then(|p| theta(self.kernel, &p, &self.cfg)) {
            Ok(th) => match th.membership {
                Membership::InDm => ThetaValue { value: th.theta, rel_error: th.abs_error() / th.theta, settled: true },
                Membership::NotInDm => ThetaValue { value: T::infinity(), rel_error: T::zero(), settled: true },
                Membership::Unknown => ThetaValue {
                    value: th.theta,
                    rel_error: if th.theta.is_finite() { th.abs_error() / th.theta } else { T::zero() },
                    settled: !th.theta.is_finite(),
                },
            },
            Err(_) => ThetaValue { value: T::infinity(), rel_error: T::zero(), settled: true },
        };
        self.cache.lock().unwrap().insert(key, value);
        value
    }

    /// Θ(p⃗)·∏ψ_j(p_j) with unit norms, at reciprocal exponents `u`.
    fn objective(&self, u: &[T], bounds: &[Bounds<T>]) -> (T, ThetaValue<T>) {
        let mut psi_prod = T::one();
        for ((psi, &v), b) in self.psis.iter().zip(u).zip(bounds) {
            let pj = if b.fixed { psi.extremal_point().unwrap() } else { v.recip() };
            psi_prod = psi_prod * psi.eval(pj);
        }
        if !psi_prod.is_finite() {
            return (T::infinity(), ThetaValue { value: T::nan(), rel_error: T::zero(), settled: true });
        }
        let th = self.theta_at(u, bounds);
        (th.value * psi_prod, th)
    }

    /// Unit-norm β at p; multiply `value` by ∏ norms for the composite curve.
    pub fn at(&self, p: T) -> BetaPoint<T> {
        if !(p > T::zero() && p.is_finite()) {
            return BetaPoint::infinite(p, BetaStatus::Infeasible);
        }
        let bounds = self.bounds();
        let target = p.recip();
        let fixed_sum: T = bounds.iter().filter(|b| b.fixed).map(|b| b.lo).sum();
        let free: Vec<usize> = (0..bounds.len()).filter(|&j| !bounds[j].fixed).collect();
        let rest = target - fixed_sum;
        let slack = T::lit(1e-12) * target;
        let lo_sum: T = free.iter().map(|&j| bounds[j].lo).sum();
        let hi_sum: T = free.iter().map(|&j| bounds[j].hi).sum();
        let feasible = if free.is_empty() {
            rest.abs() <= slack
        } else {
            free.iter().all(|&j| bounds[j].lo <= bounds[j].hi) && lo_sum <= rest && rest <= hi_sum
        };
        if !feasible {
            return BetaPoint::infinite(p, BetaStatus::Infeasible);
        }
        let q = free.len();
        // unit cube [0,1]^{q−1} onto the slice, one coordinate at a time
        let embed = |w: &[T]| -> Vec<T> {
            let mut u: Vec<T> = bounds.iter().map(|b| b.lo).collect();
            let mut remaining = rest;
            for (i, &j) in free.iter().enumerate() {
                if i + 1 == q {
                    u[j] = remaining.max(bounds[j].lo).min(bounds[j].hi);
                    break;
                }
                let after = &free[i + 1..];
                let after_lo: T = after.iter().map(|&k| bounds[k].lo).sum();
                let after_hi: T = after.iter().map(|&k| bounds[k].hi).sum();
                let lo = bounds[j].lo.max(remaining - after_hi);
                let hi = bounds[j].hi.min(remaining - after_lo);
                u[j] = lo + w[i] * (hi - lo).max(T::zero());
                remaining = remaining - u[j];
            }
            u
        };
        let dim = q.saturating_sub(1);
        let cells = GRID_CELLS;
        let starts: Vec<Vec<T>> = (0..cells.pow(dim as u32))
            .map(|mut idx| {
                (0..dim)
                    .map(|_| {
                        let c = idx % cells;
                        idx /= cells;
                        (T::from_usize_lossy(c) + T::lit(0.5)) / T::from_usize_lossy(cells)
                    })
                    .collect()
            })
            .collect();
        let values: Vec<T> = starts.par_iter().map(|w| self.objective(&embed(w), &bounds).0).collect();
        let best = values
            .iter()
            .enumerate()
            .fold(None, |acc: Option<(usize, T)>, (i, &v)| match acc {
                Some((_, bv)) if !(v < bv) => acc,
                _ if v.is_nan() => acc,
                _ => Some((i, v)),
            });
        let Some((i0, v0)) = best.filter(|(_, v)| v.is_finite()) else {
            return BetaPoint::infinite(p, BetaStatus::ThetaInfinite);
        };
        let w_best = if dim == 0 {
            starts[i0].clone()
        } else {
            let m = self.optimizer.minimize(|w: &[T]| self.objective(&embed(w), &bounds).0, &starts[i0], T::one() / T::from_usize_lossy(cells));
            if m.value < v0 {
                m.x
            } else {
                starts[i0].clone()
            }
        };
        let u = embed(&w_best);
        let (value, th) = self.objective(&u, &bounds);
        let argmin: Vec<T> = u.iter().zip(&bounds).zip(self.psis).map(|((&v, b), psi)| if b.fixed { psi.extremal_point().unwrap() } else { v.recip() }).collect();
        let status = if th.settled { BetaStatus::Finite } else { BetaStatus::Inconclusive };
        BetaPoint { p, value, argmin, rel_error: th.rel_error, status }
    }
}

fn check_norms<T: Scalar>(norms: &[T], m: usize) -> Result<()> {
    if norms.len() != m {
        return Err(Error::Dimension(format!("expected {m} norms, got {}", norms.len())));
    }
    if let Some(n) = norms.iter().find(|n| !(**n >= T::zero() && n.is_finite())) {
        return Err(Error::InvalidParameter(format!("norms must be finite and ≥ 0, got {n}")));
    }
    Ok(())
}

fn scale_point<T: Scalar>(mut pt: BetaPoint<T>, norms: &[T]) -> BetaPoint<T> {
    if pt.value.is_finite() {
        let prod: T = norms.iter().copied().product();
        pt.value = if prod == T::zero() { T::zero() } else { prod * pt.value };
    }
    pt
}

/// β(p) with the given norm factors.
pub fn beta_at<T: Scalar>(
    k: &HomogeneousKernel<T>,
    psis: &[GeneratingFunction<T>],
    norms: &[T],
    p: T,
    cfg: &QuadratureConfig,
) -> Result<BetaPoint<T>> {
    check_norms(norms, k.arity())?;
    let solver = BetaSolver::new(k, psis, cfg)?;
    Ok(scale_point(solver.at(p), norms))
}

pub fn beta_curve<T: Scalar>(
    k: &HomogeneousKernel<T>,
    psis: &[GeneratingFunction<T>],
    norms: &[T],
    p_grid: &[T],
    cfg: &QuadratureConfig,
) -> Result<BetaCurve<T>> {
    check_norms(norms, k.arity())?;
    if p_grid.is_empty() || p_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("p grid must be nonempty and strictly increasing".into()));
    }
    let solver = BetaSolver::new(k, psis, cfg)?;
    let samples: Vec<BetaPoint<T>> = p_grid.iter().map(|&p| scale_point(solver.at(p), norms)).collect();
    let finite: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].value.is_finite()).collect();
    let finiteness_interval = match (finite.first(), finite.last()) {
        (Some(&a), Some(&b)) => Some((samples[a].p, samples[b].p)),
        _ => None,
    };
    let contiguous = finite.windows(2).all(|w| w[1] == w[0] + 1);
    Ok(BetaCurve { samples, finiteness_interval, contiguous, norm_factors: norms.to_vec() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertifyStatus {
    Pass,
    Fail,
    /// β(p) = ∞: nothing to check.
    Unconstrained,
    Unknown,
}

impl CertifyStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CertifyStatus::Pass => "pass",
            CertifyStatus::Fail => "fail",
            CertifyStatus::Unconstrained => "unconstrained",
            CertifyStatus::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyRow<T> {
    pub p: T,
    pub beta: T,
    pub lhs: T,
    pub lhs_err: T,
    pub status: CertifyStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyReport<T> {
    pub norms: Vec<T>,
    pub curve: BetaCurve<T>,
    pub rows: Vec<CertifyRow<T>>,
    /// Fail if any row fails, else Unknown if any row is unknown, else Pass.
    pub status: CertifyStatus,
}

impl<T> CertifyReport<T> {
    pub fn constrained_points(&self) -> usize {
        self.rows.iter().filter(|r| r.status != CertifyStatus::Unconstrained).count()
    }
}

/// ‖M[Q](f⃗)‖_p ≤ β(p) at every grid point with finite β.
pub fn certify_theorem<T: Scalar>(
    k: &HomogeneousKernel<T>,
    fs: &[TestFunction<T>],
    psis: &[GeneratingFunction<T>],
    p_grid: &[T],
    cfg: &QuadratureConfig,
) -> Result<CertifyReport<T>> {
    if fs.len() != k.arity() {
        return Err(Error::Dimension(format!("kernel has m = {}, got {} functions", k.arity(), fs.len())));
    }
    let mut norms = Vec::with_capacity(fs.len());
    for (j, (f, psi)) in fs.iter().zip(psis).enumerate() {
        let n = gls_norm(f, psi, cfg)?;
        if !n.is_finite() {
            return Err(Error::TestFunction(format!("f{} has no finite norm under ψ{} ({})", j + 1, j + 1, n.status.as_str())));
        }
        norms.push(n.value);
    }
    let curve = beta_curve(k, psis, &norms, p_grid, cfg)?;
    let mut rows = Vec::with_capacity(curve.samples.len());
    for s in &curve.samples {
        let row = if !s.value.is_finite() {
            CertifyRow { p: s.p, beta: s.value, lhs: T::nan(), lhs_err: T::nan(), status: CertifyStatus::Unconstrained }
        } else {
            let lhs = operator_lp_norm(k, fs, s.p, cfg)?;
            let status = if !lhs.is_converged() || s.status != BetaStatus::Finite {
                CertifyStatus::Unknown
            } else if compare(lhs.value, lhs.abs_error, s.value, s.value * s.rel_error) {
                CertifyStatus::Pass
            } else {
                CertifyStatus::Fail
            };
            CertifyRow { p: s.p, beta: s.value, lhs: lhs.value, lhs_err: lhs.abs_error, status }
        };
        rows.push(row);
    }
    let status = if rows.iter().any(|r| r.status == CertifyStatus::Fail) {
        CertifyStatus::Fail
    } else if rows.iter().any(|r| r.status == CertifyStatus::Unknown) {
        CertifyStatus::Unknown
    } else {
        CertifyStatus::Pass
    };
    Ok(CertifyReport { norms, curve, rows, status })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::kernel::KernelFamily;
    use crate::theta::theta_closed_form;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn hilbert() -> HomogeneousKernel<f64> {
        HomogeneousKernel::from_family(KernelFamily::Hilbert, 2).unwrap()
    }

    /// Independent objective: closed-form Θ, u on the slice u1 + u2 = 1/p.
    fn closed_objective(psis: &[GeneratingFunction<f64>], u1: f64, p: f64) -> f64 {
        let u = [u1, 1.0 / p - u1];
        let ps = ExponentVector::new(vec![1.0 / u[0], 1.0 / u[1]]).unwrap();
        theta_closed_form(KernelFamily::Hilbert, &ps) * psis[0].eval(1.0 / u[0]) * psis[1].eval(1.0 / u[1])
    }

    fn dense_oracle(psis: &[GeneratingFunction<f64>], p: f64, lo: f64, hi: f64) -> f64 {
        let n = 10_000;
        (0..n).map(|i| closed_objective(psis, lo + (hi - lo) * (i as f64 + 0.5) / n as f64, p)).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn hilbert_with_linear_psi_is_four_pi() {
        let psis = vec![GeneratingFunction::power(1.0).unwrap(); 2];
        let b = beta_at(&hilbert(), &psis, &[1.0, 1.0], 1.0, &cfg()).unwrap();
        let oracle = dense_oracle(&psis, 1.0, 0.0, 1.0);
        assert_eq!(b.status, BetaStatus::Finite);
        assert!(((b.value - oracle) / oracle).abs() < 1e-4, "{b:?} vs {oracle}");
        assert!(((b.value - 4.0 * PI) / (4.0 * PI)).abs() < 1e-8);
        assert!((b.argmin[0] - 2.0).abs() < 1e-3 && (b.argmin[1] - 2.0).abs() < 1e-3);
        assert!((b.argmin.iter().map(|p| 1.0 / p).sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn asymmetric_two_sided_matches_dense_oracle() {
        let psis = vec![GeneratingFunction::two_sided(1.0, 4.0, 0.5, 1.0).unwrap(), GeneratingFunction::two_sided(1.0, 6.0, 0.2, 0.3).unwrap()];
        for p in [0.8, 1.0, 1.3] {
            let b = beta_at(&hilbert(), &psis, &[1.0, 1.0], p, &cfg()).unwrap();
            // u1 ∈ (1/4, 1) ∩ (1/p − 1, 1/p − 1/6)
            let lo = 0.25f64.max(1.0 / p - 1.0) + 1e-6;
            let hi = 1.0f64.min(1.0 / p - 1.0 / 6.0) - 1e-6;
            let oracle = dense_oracle(&psis, p, lo, hi);
            assert!(((b.value - oracle) / oracle).abs() < 1e-4, "p={p}: {b:?} vs {oracle}");
            assert!(b.value <= oracle * (1.0 + 1e-9));
        }
    }

    #[test]
    fn extremal_psi_gives_single_point() {
        let psis = vec![GeneratingFunction::extremal(3.0).unwrap(), GeneratingFunction::extremal(6.0).unwrap()];
        let norms = [1.5, 0.25];
        let b = beta_at(&hilbert(), &psis, &norms, 2.0, &cfg()).unwrap();
        let th = theta(&hilbert(), &ExponentVector::new(vec![3.0, 6.0]).unwrap(), &cfg()).unwrap();
        assert_eq!(b.value, 1.5 * 0.25 * th.theta);
        assert_eq!(b.argmin, vec![3.0, 6.0]);
        for p in [1.9, 2.1] {
            assert_eq!(beta_at(&hilbert(), &psis, &norms, p, &cfg()).unwrap().status, BetaStatus::Infeasible);
        }
    }

    #[test]
    fn factorization_and_zero_norms() {
        let psis = vec![GeneratingFunction::two_sided(1.0, 4.0, 0.5, 0.5).unwrap(); 2];
        let unit = beta_at(&hilbert(), &psis, &[1.0, 1.0], 1.0, &cfg()).unwrap();
        let scaled = beta_at(&hilbert(), &psis, &[2.5, 0.3], 1.0, &cfg()).unwrap();
        assert!(((scaled.value - 0.75 * unit.value) / scaled.value).abs() < 1e-10);
        let zero = beta_at(&hilbert(), &psis, &[0.0, 1.0], 1.0, &cfg()).unwrap();
        assert_eq!(zero.value, 0.0);
        assert!(beta_at(&hilbert(), &psis, &[-1.0, 1.0], 1.0, &cfg()).is_err());
    }

    #[test]
    fn minimum_is_below_random_feasible_points() {
        let psis = vec![GeneratingFunction::two_sided(1.0, 4.0, 0.5, 0.5).unwrap(); 2];
        let p = 1.0;
        let b = beta_at(&hilbert(), &psis, &[1.0, 1.0], p, &cfg()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let u1: f64 = rng.random_range(0.25..0.75);
            let v = closed_objective(&psis, u1, p);
            assert!(b.value <= v * (1.0 + 1e-8), "u1={u1}: {} > {v}", b.value);
        }
    }

    #[test]
    fn psi_rescaling() {
        let psis = vec![GeneratingFunction::two_sided(1.0, 4.0, 0.5, 0.5).unwrap(); 2];
        let scaled = vec![psis[0].clone().scaled(3.0).unwrap(), psis[1].clone()];
        let b1 = beta_at(&hilbert(), &psis, &[1.0, 1.0], 1.0, &cfg()).unwrap().value;
        let b3 = beta_at(&hilbert(), &scaled, &[1.0, 1.0], 1.0, &cfg()).unwrap().value;
        assert!(((b3 - 3.0 * b1) / b3).abs() < 1e-8);
        // norms recomputed from f: ‖f‖_{G(cψ)} = ‖f‖_{Gψ}/c cancels
        let f = TestFunction::truncated_power(0.1).unwrap();
        let n = gls_norm(&f, &psis[0], &cfg()).unwrap().value;
        let n3 = gls_norm(&f, &scaled[0], &cfg()).unwrap().value;
        let a = beta_at(&hilbert(), &psis, &[n, n], 1.0, &cfg()).unwrap().value;
        let c = beta_at(&hilbert(), &scaled, &[n3, n], 1.0, &cfg()).unwrap().value;
        assert!(((a - c) / a).abs() < 1e-8);
    }

    #[test]
    fn curve_finiteness_follows_the_slice() {
        let psis = vec![GeneratingFunction::two_sided(1.0, 4.0, 0.0, 1.0).unwrap(); 2];
        let grid: Vec<f64> = (1..=12).map(|i| 0.25 * i as f64).collect();
        let c = beta_curve(&hilbert(), &psis, &[1.0, 1.0], &grid, &cfg()).unwrap();
        // Σu ∈ (1/2, 2) ⇔ p ∈ (1/2, 2)
        for s in &c.samples {
            assert_eq!(s.is_finite(), s.p > 0.5 && s.p < 2.0, "{s:?}");
        }
        assert_eq!(c.finiteness_interval, Some((0.75, 1.75)));
        assert!(c.contiguous);
    }

    #[test]
    fn certify_extremal_indicators() {
        let psis = vec![GeneratingFunction::extremal(2.0).unwrap(); 2];
        let fs = vec![TestFunction::indicator(0.0, 1.0).unwrap(); 2];
        let cfg = QuadratureConfig { rel_tol: 1e-6, ..cfg() };
        let rep = certify_theorem(&hilbert(), &fs, &psis, &[0.5, 1.0, 1.5], &cfg).unwrap();
        assert_eq!(rep.status, CertifyStatus::Pass);
        assert_eq!(rep.constrained_points(), 1);
        let row = &rep.rows[1];
        assert!((row.lhs - 2.0 * 2f64.ln()).abs() < 1e-5 && (row.beta - PI).abs() < 1e-6);
        assert_eq!(rep.rows[0].status, CertifyStatus::Unconstrained);
        let zero = vec![TestFunction::zero(); 2];
        let rep = certify_theorem(&hilbert(), &zero, &psis, &[1.0], &cfg).unwrap();
        assert_eq!(rep.status, CertifyStatus::Pass);
        assert_eq!((rep.rows[0].lhs, rep.rows[0].beta), (0.0, 0.0));
    }
}
