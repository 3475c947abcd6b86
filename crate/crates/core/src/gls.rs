//! Generating functions ψ, Lebesgue–Riesz norms and the Grand Lebesgue norm
//! ‖f‖_{Gψ} = sup_{p∈[a,b)} ‖f‖_p / ψ(p).

use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expression, VarTable};
use crate::quadrature::{integrate_axis, Axis, IntegralEstimate, QuadratureConfig, Verdict};
use crate::scalar::Scalar;
use crate::sup;

#[derive(Debug, Clone, PartialEq)]
pub enum PsiFamily<T> {
    /// p^{1/m} on [1, ∞).
    Power { m: T },
    /// (p − a)^−α (b − p)^−β on (a, b).
    TwoSided { alpha: T, beta: T },
    /// 1 at p = r, +∞ elsewhere.
    Extremal { r: T },
    Custom { expr: Expression<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingFunction<T> {
    family: PsiFamily<T>,
    a: T,
    b: T,
    scale: T,
}

impl<T: Scalar> GeneratingFunction<T> {
    pub fn power(m: T) -> Result<Self> {
        if !(m > T::zero() && m.is_finite()) {
            return Err(Error::GeneratingFunction(format!("power family needs m > 0, got {m}")));
        }
        Ok(Self { family: PsiFamily::Power { m }, a: T::one(), b: T::infinity(), scale: T::one() })
    }

    pub fn two_sided(a: T, b: T, alpha: T, beta: T) -> Result<Self> {
        check_range(a, b)?;
        if !(alpha >= T::zero() && beta >= T::zero() && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::GeneratingFunction(format!("two_sided needs α, β ≥ 0, got α = {alpha}, β = {beta}")));
        }
        if b.is_infinite() && beta > T::zero() {
            return Err(Error::GeneratingFunction("two_sided with b = ∞ requires β = 0".into()));
        }
        if b.is_infinite() && alpha > T::zero() {
            return Err(Error::GeneratingFunction("two_sided with b = ∞ and α > 0 has inf ψ = 0".into()));
        }
        Ok(Self { family: PsiFamily::TwoSided { alpha, beta }, a, b, scale: T::one() })
    }

    pub fn extremal(r: T) -> Result<Self> {
        if !(r >= T::one() && r.is_finite()) {
            return Err(Error::GeneratingFunction(format!("extremal family needs r ∈ [1, ∞), got {r}")));
        }
        Ok(Self { family: PsiFamily::Extremal { r }, a: r, b: r, scale: T::one() })
    }

    /// ψ given as an expression in `p` on [a, b). Positivity and inf ψ > 0
    /// are checked on the scan grid.
    pub fn custom(text: &str, a: T, b: T) -> Result<Self> {
        check_range(a, b)?;
        let expr = Expression::parse(text, VarTable::single("p"))?;
        let psi = Self { family: PsiFamily::Custom { expr }, a, b, scale: T::one() };
        let mut finite_seen = false;
        let mut inf = T::infinity();
        for p in sup::grid(a, b) {
            let v = psi.eval(p);
            if v.is_nan() || v <= T::zero() {
                return Err(Error::GeneratingFunction(format!("ψ({p}) = {v} is not positive")));
            }
            if v.is_finite() {
                finite_seen = true;
                inf = inf.min(v);
            }
        }
        if !finite_seen {
            return Err(Error::GeneratingFunction("ψ is +∞ on the whole scan grid".into()));
        }
        if !(inf > T::zero()) {
            return Err(Error::GeneratingFunction("inf ψ must be positive".into()));
        }
        Ok(psi)
    }

    /// c·ψ for c > 0.
    pub fn scaled(mut self, c: T) -> Result<Self> {
        if !(c > T::zero() && c.is_finite()) {
            return Err(Error::GeneratingFunction(format!("scale must be positive and finite, got {c}")));
        }
        self.scale *= c;
        Ok(self)
    }

    pub fn family(&self) -> &PsiFamily<T> {
        &self.family
    }

    /// (a, b); a = b = r for the extremal family.
    pub fn domain(&self) -> (T, T) {
        (self.a, self.b)
    }

    pub fn extremal_point(&self) -> Option<T> {
        match self.family {
            PsiFamily::Extremal { r } => Some(r),
            _ => None,
        }
    }

    /// ψ(p); +∞ outside the domain and wherever the formula is non-finite.
    pub fn eval(&self, p: T) -> T {
        let raw = match &self.family {
            PsiFamily::Extremal { r } => {
                return if p == *r { self.scale } else { T::infinity() };
            }
            _ if !(p >= self.a && p < self.b) => return T::infinity(),
            PsiFamily::Power { m } => p.powf(m.recip()),
            PsiFamily::TwoSided { alpha, beta } => {
                let left = if *alpha == T::zero() { T::one() } else { (p - self.a).powf(-*alpha) };
                let right = if *beta == T::zero() { T::one() } else { (self.b - p).powf(-*beta) };
                left * right
            }
            PsiFamily::Custom { expr } => match expr.eval(&[p]) {
                Ok(v) if v.is_finite() => v,
                _ => T::infinity(),
            },
        };
        if raw.is_nan() {
            T::infinity()
        } else {
            self.scale * raw
        }
    }

    /// Minimum of ψ over the scan grid (the extremal family: its value at r).
    pub fn grid_infimum(&self) -> T {
        match self.family {
            PsiFamily::Extremal { r } => self.eval(r),
            _ => sup::grid(self.a, self.b).into_iter().map(|p| self.eval(p)).fold(T::infinity(), T::min),
        }
    }
}

fn check_range<T: Scalar>(a: T, b: T) -> Result<()> {
    if !(a >= T::one() && a.is_finite() && b > a) {
        return Err(Error::GeneratingFunction(format!("need 1 ≤ a < b ≤ ∞, got a = {a}, b = {b}")));
    }
    Ok(())
}

impl<T: Scalar> fmt::Display for GeneratingFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            PsiFamily::Power { m } => write!(f, "power(m={m})")?,
            PsiFamily::TwoSided { alpha, beta } => {
                write!(f, "two_sided(a={}, b={}, alpha={alpha}, beta={beta})", self.a, self.b)?
            }
            PsiFamily::Extremal { r } => write!(f, "extremal(r={r})")?,
            PsiFamily::Custom { expr } => write!(f, "{expr} on [{}, {})", self.a, self.b)?,
        }
        if self.scale != T::one() {
            write!(f, " × {}", self.scale)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    #[default]
    HalfLine,
    UnitInterval,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape<T> {
    /// c·x^−α.
    Power { c: T, alpha: T },
    /// c·e(x) for an expression e in `x`.
    Expr { c: T, expr: Expression<T> },
}

/// f supported on (lo, hi] ⊂ ℝ₊ (or (0, 1) for the unit interval).
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction<T> {
    shape: Shape<T>,
    lo: T,
    hi: T,
    space: Space,
}

impl<T: Scalar> TestFunction<T> {
    pub fn new(shape: Shape<T>, lo: T, hi: T, space: Space) -> Result<Self> {
        if !(lo >= T::zero() && lo.is_finite() && hi >= lo) {
            return Err(Error::TestFunction(format!("need 0 ≤ lo ≤ hi, got ({lo}, {hi}]")));
        }
        if space == Space::UnitInterval && hi > T::one() {
            return Err(Error::TestFunction(format!("support ({lo}, {hi}] leaves the unit interval")));
        }
        if let Shape::Power { c, alpha } = &shape {
            if !c.is_finite() || !alpha.is_finite() {
                return Err(Error::TestFunction("power family needs finite c and α".into()));
            }
        }
        Ok(Self { shape, lo, hi, space })
    }

    pub fn power(c: T, alpha: T, lo: T, hi: T) -> Result<Self> {
        Self::new(Shape::Power { c, alpha }, lo, hi, Space::HalfLine)
    }

    /// 𝟙_(lo, hi].
    pub fn indicator(lo: T, hi: T) -> Result<Self> {
        Self::power(T::one(), T::zero(), lo, hi)
    }

    /// x^−α on (0, 1].
    pub fn truncated_power(alpha: T) -> Result<Self> {
        Self::power(T::one(), alpha, T::zero(), T::one())
    }

    pub fn zero() -> Self {
        Self { shape: Shape::Power { c: T::zero(), alpha: T::zero() }, lo: T::zero(), hi: T::one(), space: Space::HalfLine }
    }

    pub fn expr(text: &str, lo: T, hi: T, space: Space) -> Result<Self> {
        let expr = Expression::parse(text, VarTable::single("x"))?;
        Self::new(Shape::Expr { c: T::one(), expr }, lo, hi, space)
    }

    pub fn scaled(mut self, k: T) -> Self {
        match &mut self.shape {
            Shape::Power { c, .. } | Shape::Expr { c, .. } => *c *= k,
        }
        self
    }

    pub fn shape(&self) -> &Shape<T> {
        &self.shape
    }

    pub fn support(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.shape, Shape::Power { c, .. } if c == T::zero()) || self.lo == self.hi
    }

    /// Exponent of the power-law singularity at the lower end of the support.
    pub fn lo_exponent(&self) -> Option<T> {
        match self.shape {
            Shape::Power { alpha, .. } if self.lo == T::zero() => Some(-alpha),
            _ => None,
        }
    }

    pub fn eval(&self, x: T) -> T {
        if !(x > self.lo && x <= self.hi) {
            return T::zero();
        }
        match &self.shape {
            Shape::Power { c, alpha } => {
                if *alpha == T::zero() {
                    *c
                } else {
                    *c * x.powf(-*alpha)
                }
            }
            Shape::Expr { c, expr } => *c * expr.eval_or_nan(&[x]),
        }
    }

    /// Closed-form ‖f‖_p for the power family; +∞ when it diverges.
    pub fn known_lp(&self, p: T) -> Option<T> {
        let Shape::Power { c, alpha } = self.shape else {
            return None;
        };
        if c == T::zero() || self.lo == self.hi {
            return Some(T::zero());
        }
        let e = T::one() - alpha * p;
        let integral = if e == T::zero() {
            (self.hi / self.lo).ln()
        } else if (self.lo == T::zero() && e < T::zero()) || (self.hi.is_infinite() && e > T::zero()) {
            T::infinity()
        } else {
            (self.hi.powf(e) - self.lo.powf(e)) / e
        };
        if integral.is_nan() {
            return Some(T::infinity());
        }
        Some(c.abs() * integral.powf(p.recip()))
    }

    /// μ{|f| ≥ t}: closed form for the power family, a monotone crossing
    /// search for expressions, otherwise unsupported.
    pub fn tail_measure(&self, t: T) -> Result<T> {
        if !(t > T::zero()) {
            return Err(Error::InvalidParameter(format!("tail level must be positive, got {t}")));
        }
        let (lo, hi) = (self.lo, self.hi);
        match self.shape {
            Shape::Power { c, alpha } => {
                let c = c.abs();
                if c == T::zero() {
                    return Ok(T::zero());
                }
                if alpha == T::zero() {
                    return Ok(if c >= t { hi - lo } else { T::zero() });
                }
                // c·x^−α ≥ t ⇔ x ≤ (c/t)^{1/α} for α > 0, x ≥ … for α < 0
                let x_star = (c / t).powf(alpha.recip());
                let len = if alpha > T::zero() { x_star.min(hi) - lo } else { hi - x_star.max(lo) };
                Ok(len.max(T::zero()))
            }
            Shape::Expr { .. } => self.monotone_level_set(t),
        }
    }

    fn monotone_level_set(&self, t: T) -> Result<T> {
        let (lo, hi) = (self.lo, self.hi);
        if hi.is_infinite() {
            return Err(Error::Unsupported("tail measure of an expression on an unbounded support".into()));
        }
        let n = 1024;
        let xs: Vec<T> = (1..=n).map(|i| lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(n)).collect();
        let vals: Vec<T> = xs.iter().map(|&x| self.eval(x).abs()).collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Unsupported("tail measure: |f| is not finite on the probe grid".into()));
        }
        let dec = vals.windows(2).all(|w| w[1] <= w[0]);
        let inc = vals.windows(2).all(|w| w[1] >= w[0]);
        if !(dec || inc) {
            return Err(Error::Unsupported("tail measure needs |f| monotone on its support".into()));
        }
        let above = |x: T| self.eval(x).abs() >= t;
        // bisection for the crossing between the last grid point above t and the next
        let (mut a, mut b) = if dec { (lo, hi) } else { (hi, lo) };
        if above(b) {
            return Ok(hi - lo);
        }
        if !vals.iter().any(|&v| v >= t) && !above(a + (b - a) * T::lit(1e-12)) {
            return Ok(T::zero());
        }
        for _ in 0..200 {
            let mid = (a + b) / T::lit(2.0);
            if above(mid) {
                a = mid;
            } else {
                b = mid;
            }
        }
        let x_star = (a + b) / T::lit(2.0);
        Ok(if dec { x_star - lo } else { hi - x_star })
    }
}

impl<T: Scalar> fmt::Display for TestFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.shape {
            Shape::Power { c, alpha } => write!(f, "{c}·x^(-{alpha})")?,
            Shape::Expr { c, expr } if *c == T::one() => write!(f, "{expr}")?,
            Shape::Expr { c, expr } => write!(f, "{c}·{expr}")?,
        }
        write!(f, " on ({}, {}]", self.lo, self.hi)
    }
}

/// ‖f‖_p = (∫|f|^p)^{1/p} by quadrature, for p ≥ 1.
///
/// The returned estimate carries the norm itself; its error is propagated
/// from the integral through d(I^{1/p}) = I^{1/p−1} dI / p.
pub fn lp_norm<T: Scalar>(f: &TestFunction<T>, p: T, cfg: &QuadratureConfig) -> Result<IntegralEstimate<T>> {
    if !(p >= T::one() && p.is_finite()) {
        return Err(Error::InvalidExponent(format!("lp_norm needs p ∈ [1, ∞), got {p}")));
    }
    norm_of(f, p, cfg)
}

/// Same as [`lp_norm`] but also admits 0 < p < 1 (quasi-norms).
pub(crate) fn norm_of<T: Scalar>(f: &TestFunction<T>, p: T, cfg: &QuadratureConfig) -> Result<IntegralEstimate<T>> {
    if f.is_zero() {
        return Ok(IntegralEstimate::zero());
    }
    let known = f.known_lp(p);
    if known.is_some_and(|v| v.is_infinite()) {
        return Ok(IntegralEstimate {
            value: T::infinity(),
            abs_error: T::infinity(),
            n_evals: 1,
            verdict: Verdict::Diverging,
            nonfinite: 0,
        });
    }
    let (lo, hi) = f.support();
    let mut axis = Axis::new(lo, hi);
    if let Some(e) = f.lo_exponent() {
        axis = axis.with_lo_exponent((e * p).max(-T::one()));
    }
    if let (Shape::Power { alpha, .. }, true) = (f.shape(), hi.is_infinite()) {
        axis = axis.with_tail_decay(*alpha * p - T::one());
    }
    if lo < T::one() && hi > T::one() {
        axis = axis.with_breaks(vec![T::one()]);
    }
    // the power family's finiteness is decided above, so the probe is moot
    let cfg = QuadratureConfig { divergence_probe: cfg.divergence_probe && known.is_none(), ..*cfg };
    let est = integrate_axis(axis, |x| f.eval(x).abs().powf(p), &cfg)?;
    if est.verdict == Verdict::Diverging {
        return Ok(est);
    }
    if let (Verdict::Inconclusive, Some(exact)) = (est.verdict, known) {
        // near-critical power singularities keep most of their mass below the
        // smallest representable abscissa; the closed form is exact there
        return Ok(IntegralEstimate { value: exact, abs_error: T::zero(), verdict: Verdict::Converged, ..est });
    }
    let value = est.value.max(T::zero()).powf(p.recip());
    let abs_error = if est.value > T::zero() { value / est.value * est.abs_error / p } else { est.abs_error.powf(p.recip()) };
    Ok(IntegralEstimate { value, abs_error, ..est })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlsStatus {
    Finite,
    /// ‖f‖_p = ∞ at a point where ψ(p) < ∞.
    Infinite,
    /// Still increasing at P_CAP: sup not attained below the cap.
    Capped,
    /// Some L_p quadrature did not converge.
    Inconclusive,
}

impl GlsStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            GlsStatus::Finite => "finite",
            GlsStatus::Infinite => "infinite",
            GlsStatus::Capped => "capped",
            GlsStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlsNorm<T> {
    pub value: T,
    pub argmax: T,
    pub status: GlsStatus,
}

impl<T: Scalar> GlsNorm<T> {
    pub fn is_finite(&self) -> bool {
        self.status == GlsStatus::Finite
    }
}

/// ‖f‖_{Gψ}. For the extremal ψ_r this is exactly ‖f‖_r / ψ(r).
pub fn gls_norm<T: Scalar>(f: &TestFunction<T>, psi: &GeneratingFunction<T>, cfg: &QuadratureConfig) -> Result<GlsNorm<T>> {
    cfg.validate()?;
    if let Some(r) = psi.extremal_point() {
        let n = lp_norm(f, r, cfg)?;
        let status = match n.verdict {
            Verdict::Converged => GlsStatus::Finite,
            Verdict::Diverging => GlsStatus::Infinite,
            Verdict::Inconclusive => GlsStatus::Inconclusive,
        };
        return Ok(GlsNorm { value: n.value / psi.eval(r), argmax: r, status });
    }
    let failed: std::sync::Mutex<Option<Error>> = std::sync::Mutex::new(None);
    let unconverged = AtomicBool::new(false);
    let (a, b) = psi.domain();
    let objective = |p: T| {
        let ps = psi.eval(p);
        if ps.is_infinite() {
            return T::zero();
        }
        match lp_norm(f, p, cfg) {
            Ok(n) => {
                if n.verdict == Verdict::Inconclusive {
                    unconverged.store(true, Ordering::Relaxed);
                }
                n.value / ps
            }
            Err(e) => {
                failed.lock().unwrap().get_or_insert(e);
                T::nan()
            }
        }
    };
    let s = sup::maximize(objective, a, b);
    if let Some(e) = failed.into_inner().unwrap() {
        return Err(e);
    }
    let status = if s.capped {
        GlsStatus::Capped
    } else if s.value.is_infinite() {
        GlsStatus::Infinite
    } else if unconverged.load(Ordering::Relaxed) {
        GlsStatus::Inconclusive
    } else {
        GlsStatus::Finite
    };
    Ok(GlsNorm { value: s.value, argmax: s.argmax, status })
}
