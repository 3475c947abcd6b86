use rayon::prelude::*;

use super::rule::{Axis, Segment};
use super::{IntegralEstimate, QuadratureConfig, Verdict};
use crate::scalar::{CompensatedSum, Scalar};

type Node<T> = (T, T, bool);

fn axis_nodes<T: Scalar, W: Fn(usize, T) -> T>(
    j: usize,
    segs: &[Segment<T>],
    level: u32,
    weight: &W,
    nonfinite: &mut usize,
) -> Vec<Node<T>> {
    let mut raw = Vec::new();
    for s in segs {
        s.nodes(level, &mut raw);
    }
    raw.into_iter()
        .filter_map(|(x, w, odd)| {
            let wx = w * weight(j, x);
            if !wx.is_finite() {
                *nonfinite += 1;
                None
            } else if wx == T::zero() {
                None
            } else {
                Some((x, wx, odd))
            }
        })
        .collect()
}

struct Partial<T> {
    sum: CompensatedSum<T>,
    evals: usize,
    nonfinite: usize,
}

#[allow(clippy::too_many_arguments)]
fn accumulate<T: Scalar, F: Fn(&[T]) -> T>(
    dim: usize,
    nodes: &[Vec<Node<T>>],
    point: &mut [T],
    wprod: T,
    any_odd: bool,
    include_all: bool,
    f: &F,
    out: &mut Partial<T>,
) {
    let last = dim + 1 == nodes.len();
    for &(x, w, odd) in &nodes[dim] {
        point[dim] = x;
        let odd = any_odd || odd;
        if last {
            if !(include_all || odd) {
                continue;
            }
            out.evals += 1;
            let v = f(point) * (wprod * w);
            if v.is_finite() {
                out.sum.add(v);
            } else {
                out.nonfinite += 1;
            }
        } else {
            accumulate(dim + 1, nodes, point, wprod * w, odd, include_all, f, out);
        }
    }
}

/// Raw (unscaled) sum over the level's new tensor points, partitioned by the
/// first-axis node so the result is independent of the thread count.
fn level_sum<T: Scalar, F: Fn(&[T]) -> T + Sync>(nodes: &[Vec<Node<T>>], include_all: bool, f: &F) -> Partial<T> {
    let m = nodes.len();
    let one_slice = |&(x, w, odd): &Node<T>| {
        let mut out = Partial { sum: CompensatedSum::new(), evals: 0, nonfinite: 0 };
        let mut point = vec![T::zero(); m];
        point[0] = x;
        if m == 1 {
            if include_all || odd {
                out.evals = 1;
                let v = f(&point) * w;
                if v.is_finite() {
                    out.sum.add(v);
                } else {
                    out.nonfinite = 1;
                }
            }
        } else {
            accumulate(1, nodes, &mut point, w, odd, include_all, f, &mut out);
        }
        out
    };
    let total: usize = nodes.iter().map(Vec::len).product();
    // one-dimensional integrands are parallelized too: they are either cheap
    // or themselves inner integrals
    let partials: Vec<Partial<T>> = if total >= 4096 || (m == 1 && total >= 64) {
        nodes[0].par_iter().map(one_slice).collect()
    } else {
        nodes[0].iter().map(one_slice).collect()
    };
    let mut acc = Partial { sum: CompensatedSum::new(), evals: 0, nonfinite: 0 };
    for p in partials {
        acc.sum.add(p.sum.value());
        acc.evals += p.evals;
        acc.nonfinite += p.nonfinite;
    }
    acc
}

pub(super) fn integrate<T, W, F>(axes: &[Axis<T>], weight: &W, f: &F, cfg: &QuadratureConfig) -> IntegralEstimate<T>
where
    T: Scalar,
    W: Fn(usize, T) -> T + Sync,
    F: Fn(&[T]) -> T + Sync,
{
    let m = axes.len();
    let segs: Vec<Vec<Segment<T>>> = axes.iter().map(Axis::segments).collect();
    let min_level = if m == 1 { 3 } else { 2 };
    let mut raw = CompensatedSum::new();
    let mut evals = 0usize;
    let mut nonfinite = 0usize;
    let mut prev: Option<T> = None;
    let mut last = (T::zero(), T::infinity());
    for level in 0..=cfg.level_cap {
        let mut nf = 0;
        let nodes: Vec<Vec<Node<T>>> =
            segs.iter().enumerate().map(|(j, s)| axis_nodes(j, s, level, weight, &mut nf)).collect();
        let full: usize = nodes.iter().map(Vec::len).product();
        let old: usize =
            if level == 0 { 0 } else { nodes.iter().map(|n| n.iter().filter(|t| !t.2).count()).product() };
        if evals > 0 && evals + (full - old) > cfg.max_evals {
            break;
        }
        nonfinite += nf;
        let part = level_sum(&nodes, level == 0, f);
        evals += part.evals;
        nonfinite += part.nonfinite;
        raw.add(part.sum.value());
        let h = T::lit(0.5f64.powi(level as i32));
        let value = raw.value() * h.powi(m as i32);
        if let Some(p) = prev {
            let err = (value - p).abs();
            last = (value, err);
            let tol = T::lit(cfg.abs_tol).max(T::lit(cfg.rel_tol) * value.abs());
            if level >= min_level && err <= tol && nonfinite == 0 {
                let (tail, tail_evals) = truncation_tail(axes, &nodes, h, weight, f);
                let abs_error = err + tail;
                let verdict = if abs_error <= tol { Verdict::Converged } else { Verdict::Inconclusive };
                return IntegralEstimate { value, abs_error, n_evals: evals + tail_evals, verdict, nonfinite };
            }
        } else {
            last = (value, value.abs());
        }
        prev = Some(value);
    }
    IntegralEstimate {
        value: last.0,
        abs_error: last.1,
        n_evals: evals.max(1),
        verdict: Verdict::Inconclusive,
        nonfinite,
    }
}

/// Mass cut off at hinted endpoints. Near `lo` the integrand is taken to
/// behave like C·(x − lo)^α, so the neglected piece is F(x_e)(x_e − lo)/(1+α)
/// with F the marginal at the innermost node x_e; beyond the outermost node
/// of an unbounded axis with tail decay δ it is F(x_e)·x_e/δ.
fn truncation_tail<T, W, F>(axes: &[Axis<T>], nodes: &[Vec<Node<T>>], h: T, weight: &W, f: &F) -> (T, usize)
where
    T: Scalar,
    W: Fn(usize, T) -> T + Sync,
    F: Fn(&[T]) -> T + Sync,
{
    let mut tail = T::zero();
    let mut evals = 0;
    for (j, axis) in axes.iter().enumerate() {
        let xs = nodes[j].iter().map(|n| n.0);
        let (Some(x_min), Some(x_max)) = (xs.clone().reduce(T::min), xs.reduce(T::max)) else {
            continue;
        };
        if let Some(alpha) = axis.lo_exponent {
            if alpha <= -T::one() {
                return (T::infinity(), evals);
            }
            let (marginal, n) = slice(j, x_min, nodes, h, weight, f);
            evals += n;
            tail += marginal.abs() * (x_min - axis.lo) / (alpha + T::one());
        }
        if let (true, Some(delta)) = (axis.hi.is_infinite(), axis.tail_decay) {
            if delta > T::zero() {
                let (marginal, n) = slice(j, x_max, nodes, h, weight, f);
                evals += n;
                tail += marginal.abs() * x_max / delta;
            }
        }
    }
    (if tail.is_nan() { T::infinity() } else { tail }, evals)
}

/// Integrand marginal at x_j = `x`: the other axes summed with their level
/// nodes, times the axis weight at `x`.
fn slice<T, W, F>(j: usize, x: T, nodes: &[Vec<Node<T>>], h: T, weight: &W, f: &F) -> (T, usize)
where
    T: Scalar,
    W: Fn(usize, T) -> T + Sync,
    F: Fn(&[T]) -> T + Sync,
{
    let m = nodes.len();
    let mut sub: Vec<Vec<Node<T>>> = nodes.to_vec();
    sub[j] = vec![(x, T::one(), false)];
    sub.swap(0, j);
    // the swapped-in first axis is restored inside the integrand
    let g = |pt: &[T]| {
        let mut q = pt.to_vec();
        q.swap(0, j);
        f(&q)
    };
    let part = level_sum(&sub, true, &g);
    let value = part.sum.value() * h.powi(m as i32 - 1) * weight(j, x);
    (value, part.evals)
}
