//! Derivative-free minimization on the unit cube (Nelder–Mead with
//! projection onto the box).

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub max_iter: usize,
    /// Stop once the simplex spread in f is below ftol·|f_best|…
    pub ftol: f64,
    /// …and its diameter below xtol.
    pub xtol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { max_iter: 400, ftol: 1e-12, xtol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum<T> {
    pub x: Vec<T>,
    pub value: T,
    pub evals: usize,
}

fn clamp01<T: Scalar>(x: &mut [T]) {
    for v in x {
        *v = v.max(T::zero()).min(T::one());
    }
}

impl NelderMead {
    /// Minimizes `f` over [0, 1]^d starting from `x0` with initial edge `step`.
    pub fn minimize<T: Scalar, F: FnMut(&[T]) -> T>(&self, mut f: F, x0: &[T], step: T) -> Minimum<T> {
        let d = x0.len();
        let mut evals = 0;
        let mut eval = |x: &[T], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                T::infinity()
            } else {
                v
            }
        };
        if d == 0 {
            let value = eval(x0, &mut evals);
            return Minimum { x: Vec::new(), value, evals };
        }
        let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(d + 1);
        let mut start = x0.to_vec();
        clamp01(&mut start);
        let v0 = eval(&start, &mut evals);
        simplex.push((start.clone(), v0));
        for i in 0..d {
            let mut x = start.clone();
            // step away from the nearer face so the vertex stays inside
            x[i] = if x[i] + step <= T::one() { x[i] + step } else { x[i] - step };
            clamp01(&mut x);
            let v = eval(&x, &mut evals);
            simplex.push((x, v));
        }
        let two = T::lit(2.0);
        let half = T::lit(0.5);
        for _ in 0..self.max_iter {
            simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
            let best = simplex[0].1;
            let worst = simplex[d].1;
            let diameter = simplex[1..]
                .iter()
                .map(|(x, _)| x.iter().zip(&simplex[0].0).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs())))
                .fold(T::zero(), T::max);
            let spread_ok = best.is_finite() && (worst - best).abs() <= T::lit(self.ftol) * best.abs().max(T::min_positive_value());
            if spread_ok && diameter <= T::lit(self.xtol) || diameter <= T::lit(self.xtol * 1e-3) {
                break;
            }
            let centroid: Vec<T> = (0..d)
                .map(|i| simplex[..d].iter().map(|(x, _)| x[i]).sum::<T>() / T::from_usize_lossy(d))
                .collect();
            let along = |t: T| {
                let mut x: Vec<T> = centroid.iter().zip(&simplex[d].0).map(|(&c, &w)| c + t * (c - w)).collect();
                clamp01(&mut x);
                x
            };
            let xr = along(T::one());
            let fr = eval(&xr, &mut evals);
            if fr < simplex[0].1 {
                let xe = along(two);
                let fe = eval(&xe, &mut evals);
                simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[d - 1].1 {
                simplex[d] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[d].1 {
                    let x = along(half);
                    let v = eval(&x, &mut evals);
                    (x, v)
                } else {
                    let x = along(-half);
                    let v = eval(&x, &mut evals);
                    (x, v)
                };
                if fc < simplex[d].1.min(fr) {
                    simplex[d] = (xc, fc);
                } else {
                    // shrink towards the best vertex
                    let x0 = simplex[0].0.clone();
                    for (x, v) in simplex.iter_mut().skip(1) {
                        for (xi, &bi) in x.iter_mut().zip(&x0) {
                            *xi = bi + half * (*xi - bi);
                        }
                        *v = eval(x, &mut evals);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let (x, value) = simplex.swap_remove(0);
        Minimum { x, value, evals }
    }
}
