//! Young–Fenchel transform h*(v) = sup_p (p·v − p·ln ψ(p)) and the tail
//! bound T(t) ≤ exp(−h*(ln t)) for unit-norm functions, t ≥ e.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gls::{gls_norm, GeneratingFunction, GlsStatus, TestFunction};
use crate::quadrature::QuadratureConfig;
use crate::scalar::Scalar;
use crate::sup::{self, SupResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conjugate<T> {
    /// h*(v); +∞ when unbounded on the scanned range.
    pub value: T,
    pub argmax: T,
    /// Largest value actually attained on the scan, a lower bound for h*(v).
    pub scanned: T,
    pub capped: bool,
}

impl<T: Scalar> From<SupResult<T>> for Conjugate<T> {
    fn from(s: SupResult<T>) -> Self {
        Self { value: s.value, argmax: s.argmax, scanned: s.scanned, capped: s.capped }
    }
}

/// h*(v) over the finiteness set of ψ, with the same grid + golden-section
/// engine and P_CAP policy as the Grand Lebesgue norm.
pub fn young_fenchel<T: Scalar>(psi: &GeneratingFunction<T>, v: T) -> Conjugate<T> {
    if let Some(r) = psi.extremal_point() {
        let value = r * (v - psi.eval(r).ln());
        return Conjugate { value, argmax: r, scanned: value, capped: false };
    }
    let (a, b) = psi.domain();
    let objective = |p: T| {
        let ps = psi.eval(p);
        if ps.is_infinite() {
            T::neg_infinity()
        } else {
            p * (v - ps.ln())
        }
    };
    sup::maximize(objective, a, b).into()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound<T> {
    pub t: T,
    /// exp(−h*(ln t)) clamped to [0, 1].
    pub bound: T,
    pub h_star: Conjugate<T>,
    /// ‖f‖_{Gψ} used to rescale f to unit norm.
    pub norm: T,
}

/// Bound on T_υ(t) = μ{|υ| ≥ t} for υ = f/‖f‖_{Gψ}.
///
/// When h*(ln t) is capped the scanned lower bound is used, which keeps the
/// bound valid (if weaker).
pub fn tail_bound<T: Scalar>(f: &TestFunction<T>, psi: &GeneratingFunction<T>, t: T, cfg: &QuadratureConfig) -> Result<TailBound<T>> {
    let norm = gls_norm(f, psi, cfg)?;
    if !(norm.status == GlsStatus::Finite && norm.value > T::zero()) {
        return Err(Error::TailNorm(norm.value.as_f64()));
    }
    tail_bound_with_norm(psi, norm.value, t)
}

pub fn tail_bound_with_norm<T: Scalar>(psi: &GeneratingFunction<T>, norm: T, t: T) -> Result<TailBound<T>> {
    if !(t >= T::E()) {
        return Err(Error::TailBelowE(t.as_f64()));
    }
    if !(norm > T::zero() && norm.is_finite()) {
        return Err(Error::TailNorm(norm.as_f64()));
    }
    let h_star = young_fenchel(psi, t.ln());
    let h = if h_star.capped { h_star.scanned } else { h_star.value };
    let bound = (-h).exp().min(T::one()).max(T::zero());
    Ok(TailBound { t, bound, h_star, norm })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailRow {
    pub t: f64,
    pub bound: f64,
    pub measured_tail: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    pub norm: f64,
    pub rows: Vec<TailRow>,
    /// Requested levels below e, which the bound does not cover.
    pub skipped: Vec<f64>,
    pub pass: bool,
}

/// Absolute slack for comparing the measured tail with the bound.
const TAIL_TOL: f64 = 1e-9;

/// Checks μ{|υ| ≥ t} ≤ exp(−h*(ln t)) on the levels of `t_grid` that are ≥ e.
pub fn tail_check<T: Scalar>(f: &TestFunction<T>, psi: &GeneratingFunction<T>, t_grid: &[T], cfg: &QuadratureConfig) -> Result<TailReport> {
    let norm = gls_norm(f, psi, cfg)?;
    if !(norm.status == GlsStatus::Finite && norm.value > T::zero()) {
        return Err(Error::TailNorm(norm.value.as_f64()));
    }
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &t in t_grid {
        if !(t >= T::E()) {
            skipped.push(t.as_f64());
            continue;
        }
        let b = tail_bound_with_norm(psi, norm.value, t)?;
        let measured = f.tail_measure(t * norm.value)?;
        let pass = measured <= b.bound * (T::one() + T::lit(1e-6)) + T::lit(TAIL_TOL);
        rows.push(TailRow { t: t.as_f64(), bound: b.bound.as_f64(), measured_tail: measured.as_f64(), pass });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(TailReport { norm: norm.value.as_f64(), rows, skipped, pass })
}
