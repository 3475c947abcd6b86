//! Supremum of a one-dimensional objective over an exponent range [a, b):
//! log-spaced grid scan followed by golden-section refinement. Shared by the
//! Grand Lebesgue norm and the Young–Fenchel transform.

use rayon::prelude::*;

use crate::scalar::Scalar;

pub const GRID_POINTS: usize = 256;
/// Largest exponent scanned when b = ∞.
pub const P_CAP: f64 = 1e3;
/// Relative width at which golden-section refinement stops.
pub const REL_WIDTH: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupResult<T> {
    /// +∞ when the objective is unbounded or still increasing at the cap.
    pub value: T,
    pub argmax: T,
    /// Largest objective value actually observed; a lower bound for the sup.
    pub scanned: T,
    /// The scan hit P_CAP on an unbounded range with the objective still
    /// increasing over the last decade.
    pub capped: bool,
}

/// Scan points: `GRID_POINTS` log-spaced values from a towards b (excluded)
/// or up to P_CAP (included) when b = ∞.
pub fn grid<T: Scalar>(a: T, b: T) -> Vec<T> {
    let cap = T::lit(P_CAP);
    let n = GRID_POINTS;
    if b.is_finite() {
        let ratio = (b / a).ln();
        (0..n).map(|i| a * (ratio * T::from_usize_lossy(i) / T::from_usize_lossy(n)).exp()).collect()
    } else {
        let hi = cap.max(a * T::lit(10.0));
        let ratio = (hi / a).ln();
        (0..n)
            .map(|i| if i + 1 == n { hi } else { a * (ratio * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1)).exp() })
            .collect()
    }
}

/// Maximizes `f` over [a, b) (1 ≤ a < b ≤ ∞). NaN values are ignored.
pub fn maximize<T: Scalar, F: Fn(T) -> T + Sync>(f: F, a: T, b: T) -> SupResult<T> {
    let pts = grid(a, b);
    let vals: Vec<T> = pts.par_iter().map(|&p| f(p)).collect();
    let best = vals
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .fold(None, |acc: Option<(usize, T)>, (i, &v)| match acc {
            Some((_, bv)) if bv >= v => acc,
            _ => Some((i, v)),
        });
    let Some((i, v)) = best else {
        return SupResult { value: T::nan(), argmax: T::nan(), scanned: T::nan(), capped: false };
    };
    if v == T::infinity() {
        return SupResult { value: v, argmax: pts[i], scanned: v, capped: false };
    }
    let n = pts.len();
    if b.is_infinite() && i + 1 == n {
        // increasing over the last decade: the sup is not attained below the cap
        let decade = pts[n - 1] / T::lit(10.0);
        let j = pts.iter().position(|&p| p >= decade).unwrap_or(0);
        if vals[j].is_nan() || vals[n - 1] > vals[j] {
            return SupResult { value: T::infinity(), argmax: pts[i], scanned: v, capped: true };
        }
    }
    let lo = if i == 0 { pts[0] } else { pts[i - 1] };
    let hi = if i + 1 < n { pts[i + 1] } else if b.is_finite() { b } else { pts[i] };
    let (p_ref, v_ref) = golden(&f, lo, hi);
    if v_ref > v {
        SupResult { value: v_ref, argmax: p_ref, scanned: v_ref, capped: false }
    } else {
        SupResult { value: v, argmax: pts[i], scanned: v, capped: false }
    }
}

/// Golden-section search for a maximum on [lo, hi] in log p.
fn golden<T: Scalar, F: Fn(T) -> T>(f: &F, lo: T, hi: T) -> (T, T) {
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let eval = |s: T| {
        let v = f(s.exp());
        if v.is_nan() {
            T::neg_infinity()
        } else {
            v
        }
    };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    let width = T::lit(REL_WIDTH);
    while b - a > width {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d);
        }
    }
    if fc >= fd {
        (c.exp(), fc)
    } else {
        (d.exp(), fd)
    }
}
