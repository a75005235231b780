use std::f64::consts::PI;

use chiral_susy::quadrature::{integrate, integrate_2d, Domain, QuadratureRule, NODE_CAP};
use chiral_susy::Complex64;
use proptest::prelude::*;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn legendre_is_exact_to_degree_2m_minus_1(m in 1usize..=24, k in 0u32..48) {
        prop_assume!((k as usize) < 2 * m);
        let rule = QuadratureRule::gauss_legendre(m);
        let got = rule.apply(|x| re(x.powi(k as i32))).re;
        let want = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
        prop_assert!((got - want).abs() < 1e-13, "{got} vs {want}");
    }

    #[test]
    fn circle_picks_the_constant_fourier_mode(a in -0.9..0.9f64, b in -0.9..0.9f64) {
        // 1/(1 − z e^{iθ}) averages to 1 for |z| < 1
        let z = Complex64::new(a, b);
        prop_assume!(z.norm() < 0.9);
        let f = |t: f64| 1.0 / (1.0 - z * Complex64::from_polar(1.0, t));
        let r = integrate(f, Domain::Circle, 1e-12).unwrap();
        prop_assert!((r.value - 1.0).norm() < 1e-11);
    }

    #[test]
    fn half_line_exponential_moments(rate in 0.3..4.0f64, k in 0i32..5) {
        let r = integrate(|x| re(x.powi(k) * (-rate * x).exp()), Domain::HalfLine, 1e-11).unwrap();
        let want = (1..=k).map(f64::from).product::<f64>() / rate.powi(k + 1);
        prop_assert!((r.value.re - want).abs() < 1e-9 * want, "{} vs {want}", r.value.re);
    }

    #[test]
    fn interval_and_line_agree_with_closed_forms(a in -3.0..0.0f64, w in 0.1..3.0f64, s in 0.5..3.0f64) {
        let b = a + w;
        let r = integrate(|x| Complex64::new(x.cos(), x.sin()), Domain::Interval(a, b), 1e-12).unwrap();
        let want = Complex64::new(b.sin() - a.sin(), a.cos() - b.cos());
        prop_assert!((r.value - want).norm() < 1e-11);
        let g = integrate(|x| re((-s * x * x).exp()), Domain::Line { half_width: 12.0 }, 1e-12).unwrap();
        prop_assert!((g.value.re - (PI / s).sqrt()).abs() < 1e-10);
    }
}

#[test]
fn product_integral_over_disk_coordinates() {
    // ∫₀¹ r dr ∫ dθ/2π |1 + r e^{iθ}|² = ∫₀¹ r(1 + r²) dr = 3/4
    let f = |r: f64, t: f64| re(r * (1.0 + Complex64::from_polar(r, t)).norm_sqr());
    let v = integrate_2d(f, Domain::Interval(0.0, 1.0), 1e-12, NODE_CAP).unwrap();
    assert!((v.value.re - 0.75).abs() < 1e-12);
}

#[test]
fn oscillating_integrand_hits_the_cap() {
    let r = chiral_susy::quadrature::integrate_capped(|x| re((1e5 * x).sin().signum()), Domain::Interval(0.0, 1.0), 1e-14, 256);
    assert!(r.is_err());
}
