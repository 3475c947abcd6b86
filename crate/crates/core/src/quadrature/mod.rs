//! Quadrature over products of half-lines and intervals with algebraic
//! endpoint singularities.
//!
//! Each axis is cut at its breakpoints into segments. Finite segments use the
//! tanh-sinh rule; the unbounded last segment composes the tanh-sinh node t
//! with x = t/(1−t), which collapses to the offset exp(π sinh s). Up to three
//! dimensions the rules are tensorized level by level (step h = 2^−L); from
//! four dimensions on, a randomly shifted Sobol sequence with per-axis
//! importance sampling is used instead.

mod probe;
mod qmc;
mod rule;
mod tensor;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use rule::Axis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Tensor tanh-sinh up to m = 3, randomized Sobol above.
    #[default]
    Auto,
    Tensor,
    QuasiMonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
    /// Finest tanh-sinh level (step 2^−level_cap).
    pub level_cap: u32,
    /// Seed for the random shifts of the low-discrepancy path.
    pub seed: u64,
    pub method: Method,
    /// Run the nested-box growth test for divergence.
    pub divergence_probe: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            max_evals: 50_000_000,
            level_cap: 12,
            seed: 0,
            method: Method::Auto,
            divergence_probe: true,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::Config(format!("rel_tol must lie in (0, 1), got {}", self.rel_tol)));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol < 1.0) {
            return Err(Error::Config(format!("abs_tol must lie in (0, 1), got {}", self.abs_tol)));
        }
        if self.max_evals < 100 {
            return Err(Error::Config(format!("max_evals must be ≥ 100, got {}", self.max_evals)));
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn without_probe(mut self) -> Self {
        self.divergence_probe = false;
        self
    }

    pub fn tolerance_for(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    Diverging,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralEstimate<T> {
    pub value: T,
    pub abs_error: T,
    pub n_evals: usize,
    pub verdict: Verdict,
    /// Nodes where the integrand was NaN or infinite; they are excluded from
    /// the sum and force an inconclusive verdict.
    pub nonfinite: usize,
}

impl<T: Scalar> IntegralEstimate<T> {
    pub fn is_converged(&self) -> bool {
        self.verdict == Verdict::Converged
    }

    pub(crate) fn zero() -> Self {
        Self { value: T::zero(), abs_error: T::zero(), n_evals: 1, verdict: Verdict::Converged, nonfinite: 0 }
    }
}

/// ∫ f(x⃗) ∏ w_j(x_j) dx⃗ over the product of `axes`.
///
/// `weight(j, x)` is folded into the per-axis node weights before the tensor
/// sum; returning zero prunes the node.
pub fn integrate_product<T, W, F>(axes: &[Axis<T>], weight: W, f: F, cfg: &QuadratureConfig) -> Result<IntegralEstimate<T>>
where
    T: Scalar,
    W: Fn(usize, T) -> T + Sync,
    F: Fn(&[T]) -> T + Sync,
{
    cfg.validate()?;
    if axes.is_empty() {
        return Err(Error::Dimension("at least one axis is required".into()));
    }
    for a in axes {
        a.validate()?;
    }
    if axes.iter().any(|a| a.is_empty()) {
        return Ok(IntegralEstimate::zero());
    }
    let use_qmc = match cfg.method {
        Method::Auto => axes.len() >= 4,
        Method::Tensor => false,
        Method::QuasiMonteCarlo => true,
    };
    let main = if use_qmc {
        qmc::integrate(axes, &weight, &f, cfg)
    } else {
        tensor::integrate(axes, &weight, &f, cfg)
    };
    if !cfg.divergence_probe || use_qmc || main.nonfinite > 0 {
        return Ok(main);
    }
    let probe = probe::nested_boxes(axes, &weight, &f, cfg);
    Ok(probe.apply(main))
}

/// ∫_{ℝ₊^m} f(x⃗) ∏ x_j^{w_j} dx⃗ with each w_j ∈ [−1, 0].
///
/// An exponent of exactly −1 is accepted so that the divergence test can
/// classify it; anything below is rejected outright.
pub fn integrate_halfline_m<T, F>(f: F, weights: &[T], cfg: &QuadratureConfig) -> Result<IntegralEstimate<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> T + Sync,
{
    for &w in weights {
        if !(w >= -T::one() && w <= T::zero()) {
            return Err(Error::WeightExponent(w.as_f64()));
        }
    }
    let axes: Vec<Axis<T>> = weights
        .iter()
        .map(|&w| Axis::half_line().with_breaks(vec![T::one()]).with_lo_exponent(w))
        .collect();
    integrate_product(&axes, |j, x| if weights[j] == T::zero() { T::one() } else { x.powf(weights[j]) }, f, cfg)
}

/// ∫_0^∞ f(x) dx.
pub fn integrate_halfline_1<T, F>(f: F, cfg: &QuadratureConfig) -> Result<IntegralEstimate<T>>
where
    T: Scalar,
    F: Fn(T) -> T + Sync,
{
    let axes = [Axis::half_line().with_breaks(vec![T::one()])];
    integrate_product(&axes, |_, _| T::one(), |x: &[T]| f(x[0]), cfg)
}

/// One-dimensional convenience wrapper over a single axis.
pub fn integrate_axis<T, F>(axis: Axis<T>, f: F, cfg: &QuadratureConfig) -> Result<IntegralEstimate<T>>
where
    T: Scalar,
    F: Fn(T) -> T + Sync,
{
    integrate_product(&[axis], |_, _| T::one(), |x: &[T]| f(x[0]), cfg)
}

#[cfg(test)]
mod tests;
