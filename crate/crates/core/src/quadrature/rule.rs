use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Truncation target for hinted endpoints: the neglected mass near an
/// endpoint or in the tail is of this order.
const TRUNC_EPS: f64 = 1e-20;
/// Distance kept from endpoints without a singularity hint.
const DEFAULT_D_MIN: f64 = 1e-30;
/// Largest tail offset without a decay hint.
const DEFAULT_X_MAX: f64 = 1e30;
/// Finite segments [a, b] with b/a beyond this ratio are integrated in ln x.
const LOG_SPAN: f64 = 1e3;

/// One integration axis: `[lo, hi]` (hi may be +∞) cut at `breaks`.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis<T> {
    pub lo: T,
    pub hi: T,
    pub breaks: Vec<T>,
    /// The integrand behaves like (x − lo)^α near `lo`.
    pub lo_exponent: Option<T>,
    /// The mass beyond X decays like X^(−δ).
    pub tail_decay: Option<T>,
}

impl<T: Scalar> Axis<T> {
    pub fn half_line() -> Self {
        Self::new(T::zero(), T::infinity())
    }

    pub fn new(lo: T, hi: T) -> Self {
        Self { lo, hi, breaks: Vec::new(), lo_exponent: None, tail_decay: None }
    }

    pub fn with_breaks(mut self, breaks: Vec<T>) -> Self {
        self.breaks = breaks;
        self
    }

    pub fn with_lo_exponent(mut self, alpha: T) -> Self {
        self.lo_exponent = Some(alpha);
        self
    }

    pub fn with_tail_decay(mut self, delta: T) -> Self {
        self.tail_decay = Some(delta);
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !self.lo.is_finite() || self.hi.is_nan() {
            return Err(Error::Dimension(format!("invalid axis [{}, {}]", self.lo, self.hi)));
        }
        if self.hi < self.lo {
            return Err(Error::Dimension(format!("axis upper limit {} below lower limit {}", self.hi, self.lo)));
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        !(self.hi > self.lo)
    }

    /// Segment endpoints: lo, the sorted interior breaks, hi.
    pub(crate) fn cut_points(&self) -> Vec<T> {
        let mut pts = vec![self.lo];
        let mut inner: Vec<T> = self.breaks.iter().copied().filter(|&b| b > self.lo && b < self.hi).collect();
        inner.sort_by(|a, b| a.partial_cmp(b).unwrap());
        inner.dedup();
        pts.extend(inner);
        pts.push(self.hi);
        pts
    }

    pub(crate) fn segments(&self) -> Vec<Segment<T>> {
        let pts = self.cut_points();
        let n = pts.len() - 1;
        let default_d = T::lit(DEFAULT_D_MIN);
        let lo_d = match self.lo_exponent {
            Some(alpha) => endpoint_distance(alpha),
            None => default_d,
        };
        (0..n)
            .map(|i| {
                let (a, b) = (pts[i], pts[i + 1]);
                let d_left = if i == 0 { lo_d } else { default_d };
                if b.is_infinite() {
                    let x_max = match self.tail_decay {
                        Some(delta) if delta > T::zero() => T::lit(TRUNC_EPS).powf(-delta.recip()),
                        _ => T::lit(DEFAULT_X_MAX),
                    };
                    Segment::infinite(a, d_left, x_max)
                } else if a > T::zero() && b / a > T::lit(LOG_SPAN) {
                    Segment::log_finite(a, b, default_d)
                } else {
                    Segment::finite(a, b, d_left, default_d)
                }
            })
            .collect()
    }
}

/// tanh-sinh node on [a, b] at abscissa s, measured from the nearer end to
/// keep full relative precision next to it.
fn tanh_sinh<T: Scalar>(a: T, b: T, s: T) -> Option<(T, T)> {
    let len = b - a;
    let u = T::PI() * T::lit(0.5) * s.sinh();
    let e = (-T::lit(2.0) * u.abs()).exp();
    let frac = e / (T::one() + e);
    let x = if s >= T::zero() { b - len * frac } else { a + len * frac };
    let w = len * T::PI() * s.cosh() * e / ((T::one() + e) * (T::one() + e));
    (w > T::zero() && x > a && x < b).then_some((x, w))
}

fn endpoint_distance<T: Scalar>(alpha: T) -> T {
    let one = T::one();
    if alpha + one <= T::lit(1e-3) {
        return T::tiny();
    }
    let d = T::lit(TRUNC_EPS).powf((alpha + one).recip());
    d.min(T::lit(DEFAULT_D_MIN)).max(T::tiny())
}

/// `asinh(ln(1/d)/π)`: abscissa where the double-exponential map reaches a
/// relative distance `d` from its endpoint.
fn s_limit<T: Scalar>(d: T) -> T {
    (d.recip().ln() / T::PI()).asinh()
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Segment<T> {
    Finite { a: T, b: T, s_left: T, s_right: T },
    Infinite { a: T, scale: T, s_left: T, s_right: T },
    /// tanh-sinh in z = ln x over [ln a, ln b].
    LogFinite { la: T, lb: T, s_left: T, s_right: T },
}

impl<T: Scalar> Segment<T> {
    fn finite(a: T, b: T, d_left: T, d_right: T) -> Self {
        Segment::Finite { a, b, s_left: s_limit(d_left.max(T::tiny())), s_right: s_limit(d_right.max(T::tiny())) }
    }

    fn log_finite(a: T, b: T, d: T) -> Self {
        let s = s_limit(d.max(T::tiny()));
        Segment::LogFinite { la: a.ln(), lb: b.ln(), s_left: s, s_right: s }
    }

    fn infinite(a: T, d_left: T, x_max: T) -> Self {
        let scale = if a > T::zero() { a } else { T::one() };
        let x_max = x_max.min(T::huge() / scale);
        Segment::Infinite {
            a,
            scale,
            s_left: s_limit(d_left.max(T::tiny())),
            s_right: (x_max.ln() / T::PI()).asinh(),
        }
    }

    /// Nodes of step h = 2^(−level): `(x, w, odd)` triples.
    pub(crate) fn nodes(&self, level: u32, out: &mut Vec<(T, T, bool)>) {
        let h = T::lit(0.5f64.powi(level as i32));
        let (s_left, s_right) = match *self {
            Segment::Finite { s_left, s_right, .. }
            | Segment::Infinite { s_left, s_right, .. }
            | Segment::LogFinite { s_left, s_right, .. } => (s_left, s_right),
        };
        let k_min = -((s_left / h).floor().to_i64().unwrap_or(0));
        let k_max = (s_right / h).floor().to_i64().unwrap_or(0);
        for k in k_min..=k_max {
            let s = T::lit(k as f64) * h;
            let odd = level > 0 && k % 2 != 0;
            if let Some((x, w)) = self.node(s) {
                out.push((x, w, odd));
            }
        }
    }

    fn node(&self, s: T) -> Option<(T, T)> {
        let pi = T::PI();
        match *self {
            Segment::Finite { a, b, .. } => tanh_sinh(a, b, s),
            Segment::LogFinite { la, lb, .. } => {
                let (z, wz) = tanh_sinh(la, lb, s)?;
                let x = z.exp();
                (x.is_finite() && x > T::zero()).then_some((x, wz * x))
            }
            Segment::Infinite { a, scale, .. } => {
                let off = scale * (pi * s.sinh()).exp();
                let w = pi * s.cosh() * off;
                (w.is_finite() && off > T::zero()).then_some((a + off, w))
            }
        }
    }
}
