//! Homogeneous kernels Q(x; x1, …, xm) of degree −m on the positive half-line.
//!
//! Built-in families are stored through their reduced form Q(1, ·) and the full
//! kernel is rebuilt from the scaling law Q(x; x⃗) = x^(−m) Q(1, x⃗/x), so they
//! are homogeneous by construction. Parsed kernels are full-form expressions in
//! `x, x1, …, xm` and must pass [`check_homogeneity`] before the integral
//! routines accept them.

use std::fmt;
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{EvalError, Expression, ParseError, VarTable};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    /// (x + Σ x_j)^(−m)
    Hilbert,
    /// x^(−m) 𝟙{max_j x_j ≤ x}
    Hardy,
    /// max(x, x_1, …, x_m)^(−m)
    Max,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Hilbert => "hilbert",
            KernelFamily::Hardy => "hardy",
            KernelFamily::Max => "max",
        }
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hilbert" => Ok(KernelFamily::Hilbert),
            "hardy" => Ok(KernelFamily::Hardy),
            "max" => Ok(KernelFamily::Max),
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Full-form kernel expression over `x` (alias `x0`) and `x1..xm`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelExpression<T> {
    expr: Expression<T>,
    m: usize,
}

impl<T: Scalar> KernelExpression<T> {
    pub fn arity(&self) -> usize {
        self.m
    }

    pub fn expression(&self) -> &Expression<T> {
        &self.expr
    }

    /// Evaluates Q(x; x⃗) with `point = [x, x1, …, xm]`.
    pub fn eval(&self, point: &[T]) -> std::result::Result<T, EvalError> {
        self.expr.eval(point)
    }
}

impl<T: Scalar> fmt::Display for KernelExpression<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.fmt(f)
    }
}

pub fn parse_kernel<T: Scalar>(text: &str, m: usize) -> std::result::Result<KernelExpression<T>, ParseError> {
    Ok(KernelExpression { expr: Expression::parse(text, VarTable::kernel(m))?, m })
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSource<T> {
    Builtin(KernelFamily),
    Parsed(KernelExpression<T>),
}

/// Status of the homogeneity gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    ByConstruction,
    Passed,
    /// Accepted without checking (`--unchecked`).
    Assumed,
    Pending,
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousKernel<T> {
    m: usize,
    scale: T,
    source: KernelSource<T>,
    gate: Gate,
}

impl<T: Scalar> HomogeneousKernel<T> {
    pub fn from_family(family: KernelFamily, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Arity(m));
        }
        Ok(Self { m, scale: T::one(), source: KernelSource::Builtin(family), gate: Gate::ByConstruction })
    }

    /// Built-in family by name. The optional single parameter is a positive
    /// multiplicative scale.
    pub fn builtin(name: &str, m: usize, params: &[T]) -> Result<Self> {
        let family: KernelFamily = name.parse()?;
        if params.len() > 1 {
            return Err(Error::ParamCount { family: name.to_string(), max: 1, got: params.len() });
        }
        let k = Self::from_family(family, m)?;
        match params.first() {
            Some(&c) => k.scaled(c),
            None => Ok(k),
        }
    }

    pub fn from_expression(expr: KernelExpression<T>) -> Result<Self> {
        if expr.m < 2 {
            return Err(Error::Arity(expr.m));
        }
        Ok(Self { m: expr.m, scale: T::one(), source: KernelSource::Parsed(expr), gate: Gate::Pending })
    }

    pub fn parse(text: &str, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Arity(m));
        }
        Self::from_expression(parse_kernel(text, m)?)
    }

    /// c·Q for c > 0.
    pub fn scaled(mut self, c: T) -> Result<Self> {
        if !(c > T::zero() && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("kernel scale must be positive and finite, got {c}")));
        }
        self.scale *= c;
        Ok(self)
    }

    pub fn arity(&self) -> usize {
        self.m
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn source(&self) -> &KernelSource<T> {
        &self.source
    }

    pub fn family(&self) -> Option<KernelFamily> {
        match self.source {
            KernelSource::Builtin(f) => Some(f),
            KernelSource::Parsed(_) => None,
        }
    }

    pub fn gate(&self) -> Gate {
        self.gate
    }

    pub fn passes_gate(&self) -> bool {
        matches!(self.gate, Gate::ByConstruction | Gate::Passed | Gate::Assumed)
    }

    pub fn assume_homogeneous(mut self) -> Self {
        if self.gate != Gate::ByConstruction {
            self.gate = Gate::Assumed;
        }
        self
    }

    /// Runs [`check_homogeneity`] and records the outcome in the gate.
    pub fn certify(mut self, n_samples: usize, deltas: &[T], tol: T, seed: u64) -> Result<(Self, HomogeneityReport<T>)> {
        let report = check_homogeneity(&self, n_samples, deltas, tol, seed)?;
        if self.gate != Gate::ByConstruction {
            self.gate = if report.pass { Gate::Passed } else { Gate::Failed };
        }
        Ok((self, report))
    }

    /// Q(1, x⃗); NaN marks a non-finite evaluation.
    pub fn reduced_eval(&self, xs: &[T]) -> T {
        debug_assert_eq!(xs.len(), self.m);
        match &self.source {
            KernelSource::Builtin(f) => self.scale * builtin_reduced(*f, self.m, xs),
            KernelSource::Parsed(e) => {
                let mut point = Vec::with_capacity(self.m + 1);
                point.push(T::one());
                point.extend_from_slice(xs);
                self.scale * e.expr.eval_or_nan(&point)
            }
        }
    }

    /// Q(x; x⃗) for x > 0.
    pub fn full_eval(&self, x: T, xs: &[T]) -> T {
        debug_assert_eq!(xs.len(), self.m);
        match &self.source {
            KernelSource::Builtin(f) => {
                if !(x > T::zero()) {
                    return T::nan();
                }
                let reduced: Vec<T> = xs.iter().map(|&xj| xj / x).collect();
                self.scale * x.powi(self.m as i32).recip() * builtin_reduced(*f, self.m, &reduced)
            }
            KernelSource::Parsed(e) => {
                let mut point = Vec::with_capacity(self.m + 1);
                point.push(x);
                point.extend_from_slice(xs);
                self.scale * e.expr.eval_or_nan(&point)
            }
        }
    }

    /// Analytic membership rule for D_m, when known: all three built-in
    /// families have finite Θ exactly when every p_j > 1.
    pub fn domain_predicate(&self, p: &[T]) -> Option<bool> {
        match self.source {
            KernelSource::Builtin(_) => Some(p.iter().all(|&pj| pj > T::one() && pj.is_finite())),
            KernelSource::Parsed(_) => None,
        }
    }

    /// Reduced coordinates where Q(1, ·) has kinks or jumps along an axis.
    pub fn reduced_breakpoints(&self) -> Vec<T> {
        match self.source {
            KernelSource::Builtin(KernelFamily::Hilbert) => Vec::new(),
            _ => vec![T::one()],
        }
    }

    /// Upper bound of the reduced support along every axis, if finite.
    pub fn reduced_support_upper(&self) -> Option<T> {
        match self.source {
            KernelSource::Builtin(KernelFamily::Hardy) => Some(T::one()),
            _ => None,
        }
    }

    /// Q(1, ·) is smooth inside each cone {x_k = max_j x_j} but kinks across
    /// the diagonals between them.
    pub fn kinks_on_diagonals(&self) -> bool {
        matches!(self.source, KernelSource::Builtin(KernelFamily::Max))
    }

    /// Invariance under permutations of x1..xm.
    pub fn is_symmetric(&self) -> bool {
        matches!(self.source, KernelSource::Builtin(_))
    }
}

impl<T: Scalar> fmt::Display for HomogeneousKernel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            KernelSource::Builtin(fam) => write!(f, "{fam}(m={})", self.m)?,
            KernelSource::Parsed(e) => write!(f, "{e}")?,
        }
        if self.scale != T::one() {
            write!(f, " × {}", self.scale)?;
        }
        Ok(())
    }
}

fn builtin_reduced<T: Scalar>(family: KernelFamily, m: usize, xs: &[T]) -> T {
    match family {
        KernelFamily::Hilbert => {
            let s = xs.iter().fold(T::one(), |acc, &x| acc + x);
            s.powi(m as i32).recip()
        }
        KernelFamily::Hardy => {
            if xs.iter().all(|&x| x <= T::one()) {
                T::one()
            } else {
                T::zero()
            }
        }
        KernelFamily::Max => {
            let mx = xs.iter().fold(T::one(), |acc, &x| acc.max(x));
            mx.powi(m as i32).recip()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneityReport<T> {
    pub max_violation: T,
    pub pass: bool,
    /// (x, x⃗, δ) triples whose evaluation was non-finite.
    pub skipped: Vec<(Vec<T>, T)>,
    pub n_checked: usize,
}

/// Samples Q(δx; δx⃗) against δ^(−m) Q(x; x⃗) on log-uniform points of
/// [1e-3, 1e3]^(m+1).
pub fn check_homogeneity<T: Scalar>(
    k: &HomogeneousKernel<T>,
    n_samples: usize,
    deltas: &[T],
    tol: T,
    seed: u64,
) -> Result<HomogeneityReport<T>> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be ≥ 1".into()));
    }
    if deltas.iter().any(|&d| !(d > T::zero() && d.is_finite())) {
        return Err(Error::InvalidParameter("every δ must be positive and finite".into()));
    }
    let m = k.arity();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, span) = (1e-3f64.ln(), 1e6f64.ln());
    let floor = T::min_positive_value();
    let mut max_violation = T::zero();
    let mut skipped = Vec::new();
    let mut n_checked = 0;
    let mut scaled = vec![T::zero(); m];
    for _ in 0..n_samples {
        let point: Vec<T> = (0..=m).map(|_| T::lit((lo + span * rng.random::<f64>()).exp())).collect();
        let base = k.full_eval(point[0], &point[1..]);
        for &delta in deltas {
            for (s, &xj) in scaled.iter_mut().zip(&point[1..]) {
                *s = delta * xj;
            }
            let lhs = k.full_eval(delta * point[0], &scaled);
            let rhs = delta.powi(-(m as i32)) * base;
            if !(lhs.is_finite() && rhs.is_finite()) {
                skipped.push((point.clone(), delta));
                continue;
            }
            n_checked += 1;
            let v = (lhs - rhs).abs() / (rhs.abs() + floor);
            if v > max_violation {
                max_violation = v;
            }
        }
    }
    if n_checked == 0 {
        return Err(Error::AllSamplesNonFinite);
    }
    Ok(HomogeneityReport { max_violation, pass: max_violation <= tol, skipped, n_checked })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_examples() {
        let h = HomogeneousKernel::<f64>::builtin("hilbert", 2, &[]).unwrap();
        assert!((h.reduced_eval(&[1.0, 1.0]) - 1.0 / 9.0).abs() < 1e-17);
        let hardy = HomogeneousKernel::<f64>::builtin("hardy", 2, &[]).unwrap();
        assert_eq!(hardy.reduced_eval(&[0.5, 0.9]), 1.0);
        assert_eq!(hardy.reduced_eval(&[0.5, 1.1]), 0.0);
        let h3 = HomogeneousKernel::<f64>::builtin("hilbert", 3, &[]).unwrap();
        assert!((h3.full_eval(2.0, &[2.0, 2.0, 2.0]) - 1.0 / 512.0).abs() < 1e-18);
        let mx = HomogeneousKernel::<f64>::builtin("max", 2, &[]).unwrap();
        assert_eq!(mx.full_eval(2.0, &[4.0, 1.0]), 1.0 / 16.0);
    }

    #[test]
    fn builtin_errors() {
        assert_eq!(
            HomogeneousKernel::<f64>::builtin("gauss", 2, &[]).unwrap_err(),
            Error::UnknownFamily("gauss".into())
        );
        assert_eq!(HomogeneousKernel::<f64>::builtin("hilbert", 1, &[]).unwrap_err(), Error::Arity(1));
        assert!(matches!(
            HomogeneousKernel::<f64>::builtin("hardy", 2, &[1.0, 2.0]),
            Err(Error::ParamCount { .. })
        ));
        assert!(HomogeneousKernel::<f64>::builtin("hardy", 2, &[-1.0]).is_err());
    }

    #[test]
    fn identity_delta_has_zero_violation() {
        for text in ["1/(x+x1+x2)^2", "1/(1+x1+x2)^3", "exp(-x1)/x^2"] {
            let k = HomogeneousKernel::<f64>::parse(text, 2).unwrap();
            let r = check_homogeneity(&k, 50, &[1.0], 0.0, 3).unwrap();
            assert_eq!(r.max_violation, 0.0);
            assert!(r.pass);
        }
    }

    #[test]
    fn builtins_pass_homogeneity() {
        for fam in [KernelFamily::Hilbert, KernelFamily::Hardy, KernelFamily::Max] {
            for m in 2..=4 {
                let k = HomogeneousKernel::<f64>::from_family(fam, m).unwrap();
                let r = check_homogeneity(&k, 1000, &[0.5, 2.0, 10.0], 1e-12, 7).unwrap();
                assert!(r.pass, "{fam} m={m}: {}", r.max_violation);
            }
        }
    }

    #[test]
    fn inhomogeneous_expression_is_flagged() {
        // at (1; 1, 1), δ = 2: Q(2; 2, 2) = 1/125 while 2^-2 Q(1; 1, 1) = 1/108
        let k = HomogeneousKernel::<f64>::parse("1/(1+x1+x2)^3", 2).unwrap();
        let lhs = k.full_eval(2.0, &[2.0, 2.0]);
        let rhs = 0.25 * k.full_eval(1.0, &[1.0, 1.0]);
        assert!((lhs - 1.0 / 125.0).abs() < 1e-17 && (rhs - 1.0 / 108.0).abs() < 1e-17);
        let (k, r) = k.certify(100, &[0.5, 2.0, 10.0], 1e-10, 1).unwrap();
        assert!(!r.pass);
        assert_eq!(k.gate(), Gate::Failed);
        assert!(!k.passes_gate());

        // wrong degree: −3 declared as m = 2
        let k = HomogeneousKernel::<f64>::parse("max(1,x1,x2)^(-3)", 2).unwrap();
        let r = check_homogeneity(&k, 100, &[2.0], 1e-10, 1).unwrap();
        assert!(!r.pass);
        let k = HomogeneousKernel::<f64>::parse("max(x,x1,x2)^(-3)", 2).unwrap();
        assert!(!check_homogeneity(&k, 100, &[2.0], 1e-10, 1).unwrap().pass);
    }

    #[test]
    fn homogeneous_expression_passes_gate() {
        let k = HomogeneousKernel::<f64>::parse("1/(x+x1+x2)^2", 2).unwrap();
        assert_eq!(k.gate(), Gate::Pending);
        let (k, r) = k.certify(1000, &[0.5, 2.0, 10.0], 1e-12, 11).unwrap();
        assert!(r.pass, "{}", r.max_violation);
        assert!(k.passes_gate());
        let h = HomogeneousKernel::<f64>::builtin("hilbert", 2, &[]).unwrap();
        assert!((k.reduced_eval(&[0.3, 2.0]) - h.reduced_eval(&[0.3, 2.0])).abs() < 1e-16);
    }

    #[test]
    fn nonfinite_samples_are_skipped_and_all_nonfinite_is_an_error() {
        let k = HomogeneousKernel::<f64>::parse("1/(x-x)", 2).unwrap();
        assert_eq!(check_homogeneity(&k, 5, &[2.0], 1e-10, 1).unwrap_err(), Error::AllSamplesNonFinite);
        let k = HomogeneousKernel::<f64>::parse("log(x1 - 1) / x^2", 2).unwrap();
        let r = check_homogeneity(&k, 200, &[2.0], 1e-10, 1).unwrap();
        assert!(!r.skipped.is_empty());
        assert!(r.n_checked > 0);
    }

    #[test]
    fn reduced_and_full_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for fam in [KernelFamily::Hilbert, KernelFamily::Max] {
            let k = HomogeneousKernel::<f64>::from_family(fam, 3).unwrap();
            for _ in 0..1000 {
                let x: f64 = (rng.random::<f64>() * 6.0 - 3.0).exp();
                let xs: Vec<f64> = (0..3).map(|_| (rng.random::<f64>() * 6.0 - 3.0).exp()).collect();
                let red: Vec<f64> = xs.iter().map(|v| v / x).collect();
                let full = k.full_eval(x, &xs);
                let via = x.powi(-3) * k.reduced_eval(&red);
                assert!(((full - via) / via).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn kernel_values_are_bit_deterministic() {
        let k = HomogeneousKernel::<f64>::parse("exp(-x1)*log(1+x2)/(x+x1)^2", 2).unwrap();
        let a = k.reduced_eval(&[0.37, 1.9]);
        let b = k.reduced_eval(&[0.37, 1.9]);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn f32_kernels() {
        let k = HomogeneousKernel::<f32>::builtin("hilbert", 2, &[]).unwrap();
        assert!((k.reduced_eval(&[1.0, 1.0]) - 1.0 / 9.0).abs() < 1e-7);
    }
}
