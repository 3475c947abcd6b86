use super::rule::Axis;
use super::{tensor, IntegralEstimate, QuadratureConfig, Verdict};
use crate::scalar::Scalar;

const LEVELS: i32 = 6;
const GROWTH: f64 = 1.05;
/// Convergent power singularities x^(a−1) add increments shrinking by 10^−a
/// per decade; a logarithmic divergence adds constant ones.
const STALL: f64 = 0.95;

pub(super) struct Probe<T> {
    partials: Vec<T>,
}

impl<T: Scalar> Probe<T> {
    pub(super) fn diverging(&self) -> bool {
        let n = self.partials.len();
        if n < 3 {
            return false;
        }
        let (a, b, c) = (self.partials[n - 3].abs(), self.partials[n - 2].abs(), self.partials[n - 1].abs());
        let g = T::lit(GROWTH);
        a > T::zero() && b > a * g && c > b * g && (c - b) >= T::lit(STALL) * (b - a)
    }

    pub(super) fn apply(&self, main: IntegralEstimate<T>) -> IntegralEstimate<T> {
        if !self.diverging() {
            return main;
        }
        let last = *self.partials.last().unwrap();
        IntegralEstimate {
            value: if last < T::zero() { T::neg_infinity() } else { T::infinity() },
            abs_error: T::infinity(),
            verdict: Verdict::Diverging,
            ..main
        }
    }
}

/// Integrates on the nested boxes [10^−k, 10^k] (only the open ends are
/// cut) for k = 1..6 and records the partial values.
pub(super) fn nested_boxes<T, W, F>(axes: &[Axis<T>], weight: &W, f: &F, cfg: &QuadratureConfig) -> Probe<T>
where
    T: Scalar,
    W: Fn(usize, T) -> T + Sync,
    F: Fn(&[T]) -> T + Sync,
{
    let open = axes.iter().any(|a| a.lo == T::zero() || a.hi.is_infinite());
    if !open {
        return Probe { partials: Vec::new() };
    }
    let sub_cfg = QuadratureConfig {
        rel_tol: cfg.rel_tol.max(1e-6),
        max_evals: cfg.max_evals / 8,
        level_cap: cfg.level_cap.min(8),
        divergence_probe: false,
        ..*cfg
    };
    let partials = (1..=LEVELS)
        .map(|k| {
            let eps = T::lit(10f64.powi(-k));
            let big = T::lit(10f64.powi(k));
            let boxed: Vec<Axis<T>> = axes
                .iter()
                .map(|a| {
                    let lo = if a.lo == T::zero() { eps } else { a.lo };
                    let hi = if a.hi.is_infinite() { big.max(lo * big) } else { a.hi };
                    Axis::new(lo, hi).with_breaks(a.breaks.clone())
                })
                .collect();
            tensor::integrate(&boxed, weight, f, &sub_cfg).value
        })
        .collect();
    Probe { partials }
}
