//! Θ_m(p⃗) = ∫_{ℝ₊^m} |Q(1, x⃗)| ∏ x_j^{−1/p_j} dx⃗ and membership in D_m.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{HomogeneousKernel, KernelFamily};
use crate::quadrature::{integrate_product, Axis, IntegralEstimate, QuadratureConfig, Verdict};
use crate::scalar::Scalar;
use crate::special::gamma;

/// p⃗ = (p_1, …, p_m) with every p_j ∈ [1, ∞).
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentVector<T> {
    p: Vec<T>,
}

impl<T: Scalar> ExponentVector<T> {
    pub fn new(p: Vec<T>) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::Arity(p.len()));
        }
        if let Some(bad) = p.iter().find(|&&pj| !(pj >= T::one() && pj.is_finite())) {
            return Err(Error::InvalidExponent(format!("p_j must lie in [1, ∞), got {bad}")));
        }
        Ok(Self { p })
    }

    pub fn arity(&self) -> usize {
        self.p.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.p
    }

    /// (Σ 1/p_j)^−1, recomputed on every call.
    pub fn resultant(&self) -> T {
        self.p.iter().map(|&pj| pj.recip()).sum::<T>().recip()
    }
}

impl<T: Scalar> fmt::Display for ExponentVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, pj) in self.p.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{pj}")?;
        }
        write!(f, ")")
    }
}

pub fn resultant_exponent<T: Scalar>(p: &ExponentVector<T>) -> T {
    p.resultant()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    #[serde(rename = "in_Dm")]
    InDm,
    #[serde(rename = "not_in_Dm")]
    NotInDm,
    #[serde(rename = "unknown")]
    Unknown,
}

impl Membership {
    pub fn as_str(self) -> &'static str {
        match self {
            Membership::InDm => "in_Dm",
            Membership::NotInDm => "not_in_Dm",
            Membership::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaEstimate<T> {
    /// +∞ when Θ is known or detected to diverge, NaN when undecided.
    pub theta: T,
    /// `None` when the analytic predicate settled divergence without
    /// integrating.
    pub estimate: Option<IntegralEstimate<T>>,
    pub membership: Membership,
}

impl<T: Scalar> ThetaEstimate<T> {
    pub fn abs_error(&self) -> T {
        match &self.estimate {
            Some(e) if self.theta.is_finite() => e.abs_error,
            _ => T::infinity(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.membership == Membership::InDm
    }

    fn divergent() -> Self {
        Self { theta: T::infinity(), estimate: None, membership: Membership::NotInDm }
    }
}

/// Integration axes for Θ: each coordinate runs over (0, ∞), or (0, 1] when
/// the reduced kernel vanishes beyond 1, with the kernel's kinks as breaks.
pub(crate) fn theta_axes<T: Scalar>(k: &HomogeneousKernel<T>, p: &[T]) -> Vec<Axis<T>> {
    let breaks = k.reduced_breakpoints();
    p.iter()
        .map(|&pj| {
            let base = match k.reduced_support_upper() {
                Some(hi) => Axis::new(T::zero(), hi),
                None => Axis::half_line(),
            };
            base.with_breaks(breaks.clone()).with_lo_exponent(-pj.recip())
        })
        .collect()
}

pub fn theta<T: Scalar>(k: &HomogeneousKernel<T>, p: &ExponentVector<T>, cfg: &QuadratureConfig) -> Result<ThetaEstimate<T>> {
    if !k.passes_gate() {
        return Err(Error::HomogeneityGate);
    }
    if p.arity() != k.arity() {
        return Err(Error::Dimension(format!("kernel has m = {}, exponent vector has {}", k.arity(), p.arity())));
    }
    let predicate = k.domain_predicate(p.as_slice());
    if predicate == Some(false) {
        return Ok(ThetaEstimate::divergent());
    }
    let cfg = QuadratureConfig { divergence_probe: cfg.divergence_probe && predicate.is_none(), ..*cfg };
    let est = if k.kinks_on_diagonals() {
        let mut acc = theta_cone(k, p, 0, &cfg)?;
        for c in 1..k.arity() {
            acc = combine(acc, theta_cone(k, p, c, &cfg)?);
        }
        acc
    } else {
        let weights: Vec<T> = p.as_slice().iter().map(|&pj| -pj.recip()).collect();
        let axes = theta_axes(k, p.as_slice());
        integrate_product(&axes, |j, x| x.powf(weights[j]), |x: &[T]| k.reduced_eval(x).abs(), &cfg)?
    };
    let (theta, membership) = match est.verdict {
        Verdict::Converged => (est.value, Membership::InDm),
        // the heuristic cannot certify divergence
        Verdict::Diverging => (T::infinity(), Membership::Unknown),
        Verdict::Inconclusive => (est.value, Membership::Unknown),
    };
    Ok(ThetaEstimate { theta, estimate: Some(est), membership })
}

/// Part of Θ over the cone where coordinate `c` is the largest, in the
/// coordinates x_c = t, x_j = t·s_j (s_j ∈ (0, 1), Jacobian t^{m−1}).
fn theta_cone<T: Scalar>(k: &HomogeneousKernel<T>, p: &ExponentVector<T>, c: usize, cfg: &QuadratureConfig) -> Result<IntegralEstimate<T>> {
    let ps = p.as_slice();
    let m = ps.len();
    let others: Vec<usize> = (0..m).filter(|&j| j != c).collect();
    let t_exp = T::from_usize_lossy(m - 1) - p.resultant().recip();
    let mut axes = vec![Axis::half_line().with_breaks(vec![T::one()]).with_lo_exponent(t_exp.min(T::zero()))];
    axes.extend(others.iter().map(|&j| Axis::new(T::zero(), T::one()).with_lo_exponent(-ps[j].recip())));
    let weight = |i: usize, v: T| if i == 0 { v.powf(t_exp) } else { v.powf(-ps[others[i - 1]].recip()) };
    let f = |y: &[T]| {
        let mut x = vec![y[0]; m];
        for (i, &j) in others.iter().enumerate() {
            x[j] = y[0] * y[i + 1];
        }
        k.reduced_eval(&x).abs()
    };
    integrate_product(&axes, weight, f, cfg)
}

fn combine<T: Scalar>(a: IntegralEstimate<T>, b: IntegralEstimate<T>) -> IntegralEstimate<T> {
    let verdict = match (a.verdict, b.verdict) {
        (Verdict::Diverging, _) | (_, Verdict::Diverging) => Verdict::Diverging,
        (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
        _ => Verdict::Converged,
    };
    IntegralEstimate {
        value: a.value + b.value,
        abs_error: a.abs_error + b.abs_error,
        n_evals: a.n_evals + b.n_evals,
        verdict,
        nonfinite: a.nonfinite + b.nonfinite,
    }
}

/// Closed forms for the built-in families; +∞ outside D_m.
///
/// hilbert: Dirichlet's integral ∫(1+Σx)^−m ∏x^{a_j−1} = ∏Γ(a_j)·Γ(m−Σa_j)/Γ(m)
/// with a_j = 1 − 1/p_j.
/// hardy: ∏ p_j/(p_j − 1).
/// max: splitting by the coordinate that attains the maximum gives
/// m·p·∏ p_j/(p_j − 1), p the resultant exponent.
pub fn theta_closed_form<T: Scalar>(family: KernelFamily, p: &ExponentVector<T>) -> T {
    let ps = p.as_slice();
    if ps.iter().any(|&pj| pj <= T::one()) {
        return T::infinity();
    }
    let m = T::from_usize_lossy(ps.len());
    let hardy: T = ps.iter().map(|&pj| pj / (pj - T::one())).product();
    match family {
        KernelFamily::Hilbert => {
            let a: Vec<T> = ps.iter().map(|&pj| T::one() - pj.recip()).collect();
            let sum_a: T = a.iter().copied().sum();
            a.iter().map(|&aj| gamma(aj)).product::<T>() * gamma(m - sum_a) / gamma(m)
        }
        KernelFamily::Hardy => hardy,
        KernelFamily::Max => m * p.resultant() * hardy,
    }
}

#[derive(Debug, Clone)]
pub struct DmScan<T> {
    /// Grid values per coordinate.
    pub axes: Vec<Vec<T>>,
    /// Row-major over `axes`, last coordinate fastest.
    pub points: Vec<(Vec<T>, ThetaEstimate<T>)>,
    /// Some grid point has its full 3^m neighbourhood inside D_m.
    pub open_box: bool,
}

fn unravel(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for j in (0..dims.len()).rev() {
        out[j] = idx % dims[j];
        idx /= dims[j];
    }
    out
}

fn ravel(ix: &[usize], dims: &[usize]) -> usize {
    ix.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i)
}

/// Membership verdicts over a tensor grid of exponent vectors.
pub fn dm_scan<T: Scalar>(k: &HomogeneousKernel<T>, axes: &[Vec<T>], cfg: &QuadratureConfig) -> Result<DmScan<T>> {
    if axes.len() != k.arity() {
        return Err(Error::Dimension(format!("kernel has m = {}, grid has {} axes", k.arity(), axes.len())));
    }
    let dims: Vec<usize> = axes.iter().map(Vec::len).collect();
    let total: usize = dims.iter().product();
    let points: Vec<Vec<T>> = (0..total)
        .map(|i| unravel(i, &dims).iter().enumerate().map(|(j, &ij)| axes[j][ij]).collect())
        .collect();
    let evs = points
        .iter()
        .map(|p| ExponentVector::new(p.clone()))
        .collect::<Result<Vec<_>>>()?;
    let thetas = evs.par_iter().map(|p| theta(k, p, cfg)).collect::<Result<Vec<_>>>()?;
    let inside = |ix: &[usize]| thetas[ravel(ix, &dims)].membership == Membership::InDm;
    let open_box = (0..total).any(|i| {
        let centre = unravel(i, &dims);
        if centre.iter().zip(&dims).any(|(&c, &d)| c == 0 || c + 1 >= d) {
            return false;
        }
        let m = dims.len();
        (0..3usize.pow(m as u32)).all(|n| {
            let off = unravel(n, &vec![3; m]);
            let ix: Vec<usize> = centre.iter().zip(&off).map(|(&c, &o)| c + o - 1).collect();
            inside(&ix)
        })
    });
    Ok(DmScan { axes: axes.to_vec(), points: points.into_iter().zip(thetas).collect(), open_box })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn ev(p: &[f64]) -> ExponentVector<f64> {
        ExponentVector::new(p.to_vec()).unwrap()
    }

    fn kernel(f: KernelFamily, m: usize) -> HomogeneousKernel<f64> {
        HomogeneousKernel::from_family(f, m).unwrap()
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn resultant_examples() {
        assert_eq!(resultant_exponent(&ev(&[2.0, 2.0])), 1.0);
        assert!((resultant_exponent(&ev(&[3.0, 6.0])) - 2.0).abs() < 1e-15);
        assert!((resultant_exponent(&ev(&[2.0, 2.0, 2.0])) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exponent_vector_validation() {
        assert_eq!(ExponentVector::new(vec![2.0]).unwrap_err(), Error::Arity(1));
        assert!(ExponentVector::new(vec![2.0, 0.5]).is_err());
        assert!(ExponentVector::new(vec![2.0, f64::INFINITY]).is_err());
        assert!(ExponentVector::new(vec![1.0, 3.0]).is_ok());
    }

    #[test]
    fn closed_forms() {
        // Γ(1/2)² = π; Γ(3/4)²Γ(1/2) and Γ(2/3)Γ(5/6)Γ(1/2) frozen from mpmath
        let h = |p: &[f64]| theta_closed_form(KernelFamily::Hilbert, &ev(p));
        assert!((h(&[2.0, 2.0]) - PI).abs() < 1e-13);
        assert!((h(&[4.0, 4.0]) - 2.661_598_403_213_911_3).abs() < 1e-12);
        assert!((h(&[3.0, 6.0]) - 2.709_214_795_102_746).abs() < 1e-12);
        assert!((h(&[2.0, 2.0, 2.0]) - PI * PI / 4.0).abs() < 1e-12);
        assert!((theta_closed_form(KernelFamily::Hardy, &ev(&[2.0, 3.0, 4.0])) - 4.0).abs() < 1e-14);
        assert!(theta_closed_form(KernelFamily::Hardy, &ev(&[1.0, 2.0])).is_infinite());
        assert!((theta_closed_form(KernelFamily::Max, &ev(&[2.0, 2.0])) - 8.0).abs() < 1e-14);
    }

    #[test]
    fn quadrature_matches_closed_forms_m2() {
        for fam in [KernelFamily::Hilbert, KernelFamily::Hardy, KernelFamily::Max] {
            for p in [[2.0, 2.0], [4.0, 4.0], [3.0, 6.0], [1.5, 5.0]] {
                let t = theta(&kernel(fam, 2), &ev(&p), &cfg()).unwrap();
                let exact = theta_closed_form(fam, &ev(&p));
                let e = t.estimate.unwrap();
                assert_eq!(t.membership, Membership::InDm);
                assert!((t.theta - exact).abs() <= (1e-6 * exact).max(5.0 * e.abs_error), "{fam} {p:?}: {t:?} vs {exact}");
            }
        }
    }

    #[test]
    fn quadrature_matches_closed_forms_m3() {
        for fam in [KernelFamily::Hilbert, KernelFamily::Hardy, KernelFamily::Max] {
            let p = ev(&[2.0, 3.0, 4.0]);
            let t = theta(&kernel(fam, 3), &p, &QuadratureConfig { rel_tol: 1e-6, ..cfg() }).unwrap();
            let exact = theta_closed_form(fam, &p);
            assert!(((t.theta - exact) / exact).abs() < 1e-3, "{fam}: {} vs {exact}", t.theta);
        }
    }

    #[test]
    fn predicate_short_circuits_divergence() {
        let t = theta(&kernel(KernelFamily::Hardy, 2), &ev(&[1.0, 2.0]), &cfg()).unwrap();
        assert_eq!(t.membership, Membership::NotInDm);
        assert!(t.theta.is_infinite() && t.estimate.is_none());
    }

    #[test]
    fn parsed_kernel_needs_gate_and_yields_numeric_membership() {
        let k = HomogeneousKernel::<f64>::parse("1/(x+x1+x2)^2", 2).unwrap();
        assert_eq!(theta(&k, &ev(&[2.0, 2.0]), &cfg()).unwrap_err(), Error::HomogeneityGate);
        let (k, _) = k.certify(100, &[0.5, 2.0, 10.0], 1e-10, 1).unwrap();
        let t = theta(&k, &ev(&[2.0, 2.0]), &cfg()).unwrap();
        assert_eq!(t.membership, Membership::InDm);
        assert!((t.theta - PI).abs() < 1e-6);
        // p_1 = 1: the heuristic flags divergence but cannot certify it
        let t = theta(&k, &ev(&[1.0, 2.0]), &cfg()).unwrap();
        assert_eq!(t.membership, Membership::Unknown);
        assert!(t.theta.is_infinite());
    }

    #[test]
    fn scaling_is_linear() {
        let p = ev(&[3.0, 6.0]);
        let base = theta(&kernel(KernelFamily::Hilbert, 2), &p, &cfg()).unwrap().theta;
        for c in [2.0, 10.0, 0.5] {
            let k = kernel(KernelFamily::Hilbert, 2).scaled(c).unwrap();
            let t = theta(&k, &p, &cfg()).unwrap().theta;
            assert!(((t - c * base) / (c * base)).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_under_permutation() {
        for fam in [KernelFamily::Hilbert, KernelFamily::Max] {
            let a = theta(&kernel(fam, 2), &ev(&[3.0, 6.0]), &cfg()).unwrap();
            let b = theta(&kernel(fam, 2), &ev(&[6.0, 3.0]), &cfg()).unwrap();
            assert!((a.theta - b.theta).abs() <= 3.0 * (a.abs_error() + b.abs_error()) + 1e-12);
        }
    }

    #[test]
    fn hardy_decreases_in_each_exponent() {
        let k = kernel(KernelFamily::Hardy, 2);
        let grid = [1.25, 1.5, 2.0, 3.0, 4.0];
        for &p2 in &grid {
            let vals: Vec<f64> = grid.iter().map(|&p1| theta(&k, &ev(&[p1, p2]), &cfg()).unwrap().theta).collect();
            assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
        }
    }

    #[test]
    fn dm_scan_examples() {
        let grid = vec![1.25, 1.5, 2.0, 3.0, 4.0];
        let scan = dm_scan(&kernel(KernelFamily::Hilbert, 2), &[grid.clone(), grid.clone()], &cfg()).unwrap();
        assert_eq!(scan.points.len(), 25);
        assert!(scan.points.iter().all(|(_, t)| t.membership == Membership::InDm));
        assert!(scan.open_box);

        let with_one = vec![1.0, 2.0, 3.0];
        let scan = dm_scan(&kernel(KernelFamily::Hardy, 2), &[with_one.clone(), vec![2.0, 3.0, 4.0]], &cfg()).unwrap();
        for (p, t) in &scan.points {
            assert_eq!(t.membership == Membership::NotInDm, p[0] == 1.0);
        }
        // the only interior point (2, 3) has neighbours with p_1 = 1
        assert!(!scan.open_box);
    }

    #[test]
    fn membership_invariant_holds() {
        let k = kernel(KernelFamily::Hilbert, 2);
        let tight = QuadratureConfig { max_evals: 200, rel_tol: 1e-12, ..cfg() };
        let t = theta(&k, &ev(&[2.0, 2.0]), &tight).unwrap();
        assert_eq!(t.membership, Membership::Unknown);
        let t = theta(&k, &ev(&[2.0, 2.0]), &cfg()).unwrap();
        assert!(t.membership != Membership::InDm || (t.theta.is_finite() && t.estimate.unwrap().is_converged()));
    }
}
