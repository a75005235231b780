//! Small special-function helpers used by oracles and closed forms.

use num_complex::Complex64;

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Elementary symmetric polynomials e_0, …, e_m of the given values.
pub fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (i, &v) in values.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += v * e[k - 1];
        }
    }
    e
}

/// J_ν(z) for integer ν ≥ 0 and complex z by its power series, summed until
/// the terms stop contributing.
pub fn bessel_j(nu: usize, z: Complex64) -> Complex64 {
    let half = z / 2.0;
    let q = -(half * half);
    let mut term = half.powu(nu as u32) / factorial(nu);
    let mut sum = term;
    for k in 1..400 {
        term = term * q / (k as f64 * (k + nu) as f64);
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() && k > 2 {
            break;
        }
    }
    sum
}

/// I_ν(z) for integer ν ≥ 0 by its power series.
pub fn bessel_i(nu: usize, z: Complex64) -> Complex64 {
    bessel_j(nu, z * Complex64::new(0.0, 1.0)) * Complex64::new(0.0, -1.0).powu(nu as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_and_gamma() {
        assert_eq!(factorial(5), 120.0);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        assert!((ln_gamma(10.0) - factorial(9).ln()).abs() < 1e-12);
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(2, 5), 0.0);
    }

    #[test]
    fn symmetric_polynomials() {
        let e = elementary_symmetric(&[2.0, 1.0, 1.0]);
        assert_eq!(e, vec![1.0, 4.0, 5.0, 2.0]);
    }

    #[test]
    fn bessel_known_values() {
        // J_0(1) and I_0(2)
        let j0 = bessel_j(0, Complex64::new(1.0, 0.0));
        assert!((j0.re - 0.765_197_686_557_966_6).abs() < 1e-15);
        let i0 = bessel_i(0, Complex64::new(2.0, 0.0));
        assert!((i0.re - 2.279_585_302_336_067).abs() < 1e-14);
        assert!(i0.im.abs() < 1e-15);
    }
}
