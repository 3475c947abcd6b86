//! Gamma function family used by the closed-form oracles.

use crate::scalar::Scalar;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum<T: Scalar>(z: T) -> T {
    // z is the shifted argument x - 1
    let mut acc = T::lit(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += T::lit(c) / (z + T::from_usize_lossy(i));
    }
    acc
}

/// Γ(x) for real `x`; poles at non-positive integers return NaN.
pub fn gamma<T: Scalar>(x: T) -> T {
    let half = T::lit(0.5);
    if x <= T::zero() && x == x.floor() {
        return T::nan();
    }
    if x < half {
        // reflection
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma(T::one() - x));
    }
    if x == x.floor() && x <= T::lit(25.0) {
        let mut acc = T::one();
        let mut k = T::lit(2.0);
        while k < x {
            acc *= k;
            k += T::one();
        }
        return acc;
    }
    let z = x - T::one();
    let t = z + T::lit(LANCZOS_G) + half;
    let sqrt_two_pi = (T::lit(2.0) * T::PI()).sqrt();
    // t^(z+1/2) split to delay overflow
    let pow_half = t.powf((z + half) * half);
    sqrt_two_pi * pow_half * (pow_half * (-t).exp()) * lanczos_sum(z)
}

/// ln|Γ(x)|.
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    let half = T::lit(0.5);
    if x <= T::zero() && x == x.floor() {
        return T::infinity();
    }
    if x < half {
        let pi = T::PI();
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let z = x - T::one();
    let t = z + T::lit(LANCZOS_G) + half;
    half * (T::lit(2.0) * T::PI()).ln() + (z + half) * t.ln() - t + lanczos_sum(z).ln()
}

/// Euler Beta function B(a, b) = Γ(a)Γ(b)/Γ(a+b).
pub fn beta_fn<T: Scalar>(a: T, b: T) -> T {
    if a + b > T::lit(100.0) {
        (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
    } else {
        gamma(a) * gamma(b) / gamma(a + b)
    }
}
