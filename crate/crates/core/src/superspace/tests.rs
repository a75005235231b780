use num_complex::Complex64;

use super::*;
use crate::special::{bessel_j, binomial, elementary_symmetric};

fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn src(k1: &[Complex64], k2: &[Complex64]) -> SourcePack {
    SourcePack::from_squared(k1, k2).unwrap()
}

fn gaussian(n: usize) -> SuperWeight {
    SuperWeight::Gaussian { scale: n as f64 }
}

/// E[det(WW† − κ²)] for the left-correlated Gaussian, exact.
fn left_sum(n: usize, nu: usize, c: &[f64], k2: Complex64) -> Complex64 {
    let e = elementary_symmetric(c);
    (0..=n)
        .map(|k| {
            let falling: f64 = ((n + nu - k + 1)..=(n + nu)).map(|j| j as f64).product();
            (-k2).powi((n - k) as i32) * e[k] * falling / (n as f64).powi(k as i32)
        })
        .sum()
}

/// E[1/(t − κ²)] for t with density t^a e^{−s t}, by quadrature.
fn inverse_moment(a: usize, s: f64, k1: Complex64) -> Complex64 {
    let w = |t: f64| t.powi(a as i32) * (-s * t).exp();
    let num = quadrature::integrate(|t| w(t) / (t - k1), Domain::HalfLine, 1e-13).unwrap();
    let den = quadrature::integrate(|t| Complex64::new(w(t), 0.0), Domain::HalfLine, 1e-13).unwrap();
    num.value / den.value
}

#[test]
fn single_entry_fermionic() {
    let z = z_super(&gaussian(1), DysonIndex::Unitary, 1, 0, &src(&[], &[cz(0.0, 2.0)]), &QuadConfig::default()).unwrap();
    assert!((z.value - cz(1.0, -2.0)).norm() < 1e-12, "{}", z.value);
}

#[test]
fn fermionic_gaussian_matches_laguerre_sum() {
    let cfg = QuadConfig::default();
    for (n, nu) in [(2, 0), (3, 1), (4, 2)] {
        for k2 in [cz(0.7, 0.0), cz(-0.5, 1.3), cz(2.0, -0.4)] {
            let z = z_super(&gaussian(n), DysonIndex::Unitary, n, nu, &src(&[], &[k2]), &cfg).unwrap();
            let expect = left_sum(n, nu, &vec![1.0; n], k2);
            assert!((z.value - expect).norm() < 1e-10 * expect.norm().max(1.0), "n={n} ν={nu}: {} vs {expect}", z.value);
        }
    }
}

#[test]
fn bosonic_single_entry() {
    let cfg = QuadConfig::default();
    for (nu, k1) in [(0, cz(0.3, 0.8)), (1, cz(-1.0, -0.5)), (2, cz(1.5, 0.2))] {
        let z = z_super(&gaussian(1), DysonIndex::Unitary, 1, nu, &src(&[k1], &[]), &cfg).unwrap();
        let expect = inverse_moment(nu, 1.0, k1);
        assert!((z.value - expect).norm() < 1e-9 * expect.norm(), "ν={nu}: {} vs {expect}", z.value);
    }
}

#[test]
fn mixed_single_entry() {
    // E[(t − a)/(t − b)] = 1 + (b − a)E[1/(t − b)]
    let cfg = QuadConfig::default();
    let (b, a) = (cz(0.4, 0.9), cz(-0.3, 0.5));
    for nu in [0, 1] {
        let z = z_super(&gaussian(1), DysonIndex::Unitary, 1, nu, &src(&[b], &[a]), &cfg).unwrap();
        let expect = 1.0 + (b - a) * inverse_moment(nu, 1.0, b);
        assert!((z.value - expect).norm() < 1e-8, "ν={nu}: {} vs {expect}", z.value);
    }
}

#[test]
fn supersymmetric_point_is_one() {
    let cfg = QuadConfig::default();
    let k = cz(0.6, 0.7);
    let n = 2;
    let weights = [
        gaussian(n),
        SuperWeight::NormDependent {
            p: RadialWeight::Exponential { rate: 1.5 },
        },
        SuperWeight::Lorentz { gamma: 1.2, mu: 6.0 },
        SuperWeight::Quartic { alpha: 0.3, alpha_hat: 1.0 },
    ];
    for w in &weights {
        let z = z_super(w, DysonIndex::Unitary, n, 1, &src(&[k], &[k]), &cfg).unwrap();
        assert!((z.value - 1.0).norm() < 1e-8, "{}: {}", w.name(), z.value);
    }
}

#[test]
fn exponential_profile_equals_gaussian() {
    let cfg = QuadConfig::default();
    let n = 2;
    let profile = SuperWeight::NormDependent {
        p: RadialWeight::Exponential { rate: n as f64 },
    };
    let cases = [
        src(&[], &[cz(0.5, 0.5)]),
        src(&[cz(0.2, 0.6)], &[]),
        src(&[cz(0.2, 0.6)], &[cz(1.0, -0.3)]),
    ];
    for s in &cases {
        let a = z_super(&gaussian(n), DysonIndex::Unitary, n, 1, s, &cfg).unwrap();
        let b = z_super(&profile, DysonIndex::Unitary, n, 1, s, &cfg).unwrap();
        assert!((a.value - b.value).norm() < 1e-8 * a.value.norm(), "{} vs {}", a.value, b.value);
    }
}

#[test]
fn lorentz_single_entry_mean() {
    // E[t] = Γ²(ν+1)/(μ−ν−2) for density t^ν (Γ²+t)^{−μ}
    let cfg = QuadConfig::default();
    let (gamma, mu) = (1.3, 4.5);
    let k2 = cz(0.2, -1.0);
    for nu in [0, 1] {
        let w = SuperWeight::Lorentz { gamma, mu };
        let z = z_super(&w, DysonIndex::Unitary, 1, nu, &src(&[], &[k2]), &cfg).unwrap();
        let mean = gamma * gamma * (nu as f64 + 1.0) / (mu - nu as f64 - 2.0);
        assert!((z.value - (mean - k2)).norm() < 1e-9, "ν={nu}: {}", z.value);
    }
    let too_heavy = SuperWeight::Lorentz { gamma, mu: 1.5 };
    assert!(z_super(&too_heavy, DysonIndex::Unitary, 1, 0, &src(&[], &[k2]), &cfg).is_err());
}

#[test]
fn rejects_unsupported_requests() {
    let cfg = QuadConfig::default();
    let s = src(&[], &[cz(1.0, 0.0)]);
    assert!(matches!(
        z_super(&gaussian(2), DysonIndex::Orthogonal, 2, 0, &s, &cfg),
        Err(Error::Capability(_))
    ));
    assert!(matches!(SourcePack::from_squared(&[cz(0.5, 0.0)], &[]), Err(Error::Input(_))));
    let two = src(&[], &[cz(1.0, 0.0), cz(2.0, 0.0)]);
    assert!(matches!(
        z_super(&gaussian(2), DysonIndex::Unitary, 2, 0, &two, &cfg),
        Err(Error::Capability(_))
    ));
}

#[test]
fn correlated_left_matches_exact_sum() {
    let cfg = QuadConfig::default();
    let k2 = cz(0.4, 0.8);
    let (n, nu) = (3, 1);
    let c = [0.5, 1.0, 2.5];
    let z = z_correlated_left(&gaussian(n), n, nu, &c, &src(&[], &[k2]), &cfg).unwrap();
    let expect = left_sum(n, nu, &c, k2);
    assert!((z.value - expect).norm() < 1e-10 * expect.norm(), "{} vs {expect}", z.value);
    let plain = z_super(&gaussian(n), DysonIndex::Unitary, n, nu, &src(&[], &[k2]), &cfg).unwrap();
    let unit = z_correlated_left(&gaussian(n), n, nu, &[1.0; 3], &src(&[], &[k2]), &cfg).unwrap();
    assert!((plain.value - unit.value).norm() < 1e-11 * plain.value.norm());
}

#[test]
fn correlated_right_matches_exact_sum() {
    let cfg = QuadConfig::default();
    let k2 = cz(-0.3, 1.1);
    let (n, nu) = (3, 2);
    let c = [0.4, 0.9, 1.0, 1.7, 3.0];
    let z = z_correlated_right(n, nu, &c, &src(&[], &[k2]), &cfg).unwrap();
    let e = elementary_symmetric(&c);
    let expect: Complex64 = (0..=n)
        .map(|k| {
            (-k2).powi((n - k) as i32) * binomial(n, k) * factorial(k) * e[k] / (n as f64).powi(k as i32)
        })
        .sum();
    assert!((z.value - expect).norm() < 1e-10 * expect.norm(), "{} vs {expect}", z.value);
    let unit = z_correlated_right(n, nu, &[1.0; 5], &src(&[], &[k2]), &cfg).unwrap();
    let plain = z_super(&gaussian(n), DysonIndex::Unitary, n, nu, &src(&[], &[k2]), &cfg).unwrap();
    assert!((plain.value - unit.value).norm() < 1e-10 * plain.value.norm());
}

#[test]
fn fermionic_micro_is_bessel() {
    let cfg = QuadConfig::default();
    for nu in 0..3 {
        for xi in [cz(0.5, 0.0), cz(2.0, 0.3), cz(-1.0, 1.0)] {
            let z = z_micro(&MicroWeight::Gaussian, nu, &[], &[xi], &cfg).unwrap();
            let expect = Complex64::i().powi(-(nu as i32)) * bessel_j(nu, 2.0 * xi);
            assert!((z - expect).norm() < 1e-10, "ν={nu} ξ={xi}: {z} vs {expect}");
        }
    }
}

#[test]
fn bosonic_micro_is_even_in_source() {
    let cfg = QuadConfig::default();
    let xi = cz(0.4, 1.2);
    let a = z_micro(&MicroWeight::Gaussian, 1, &[xi], &[], &cfg).unwrap();
    let b = z_micro(&MicroWeight::Gaussian, 1, &[-xi], &[], &cfg).unwrap();
    assert!((a - b).norm() < 1e-10 * a.norm());
    assert!(z_micro(&MicroWeight::Gaussian, 0, &[cz(1.0, 0.0)], &[], &cfg).is_err());
}

#[test]
fn mixed_micro_limit_of_finite_size() {
    let cfg = QuadConfig::default();
    let (xi1, xi2) = (cz(0.3, 1.0), cz(1.5, 0.2));
    let micro = z_micro(&MicroWeight::Gaussian, 0, &[xi1], &[xi2], &cfg).unwrap();
    let same = z_micro(&MicroWeight::Gaussian, 0, &[xi1], &[xi1], &cfg).unwrap();
    assert!((same - 1.0).norm() < 1e-10);
    let mut prev = f64::INFINITY;
    for n in [8, 32] {
        let nf = n as f64;
        let s = src(&[xi1 * xi1 / (nf * nf)], &[xi2 * xi2 / (nf * nf)]);
        let z = z_super(&gaussian(n), DysonIndex::Unitary, n, 0, &s, &cfg).unwrap();
        let gap = (z.value - micro).norm();
        // finite-size corrections fall off like 1/n
        assert!(gap < prev / 3.0, "n={n}: {} vs {micro}", z.value);
        prev = gap;
    }
    assert!(prev < 0.1 * micro.norm(), "gap {prev}");
}

#[test]
fn heavy_tail_polynomial_case() {
    // integer μ̃−1 = e: Σ_{j≥ν} C(e,j) Γ^{2(e−j)} (−ξ)^{j−ν}/(j−ν)! over the ξ = 0 term
    let cfg = QuadConfig::default();
    let (gamma, e, nu) = (1.5_f64, 3usize, 1usize);
    let w = MicroWeight::HeavyTailLorentz {
        gamma,
        mu_tilde: e as f64 + 1.0,
    };
    let poly = |xi: Complex64| -> Complex64 {
        (nu..=e)
            .map(|j| binomial(e, j) * gamma.powi(2 * (e - j) as i32) * (-xi).powi((j - nu) as i32) / factorial(j - nu))
            .sum()
    };
    for xi in [cz(0.7, 0.0), cz(-1.0, 2.0)] {
        let z = z_micro(&w, nu, &[], &[xi], &cfg).unwrap();
        let expect = poly(xi) / poly(cz(0.0, 0.0));
        assert!((z - expect).norm() < 1e-10 * expect.norm().max(1.0), "{z} vs {expect}");
    }
    assert!(z_micro(&w, 0, &[cz(0.0, 1.0)], &[], &cfg).is_err());
}

#[test]
fn unquenched_micro_decouples_for_heavy_mass() {
    // μ → ∞: the flavor decouples and the ratio in ξ follows J_ν(2ξ)
    let cfg = QuadConfig::default();
    let nu = 1;
    let mu = 60.0;
    let f = |xi: Complex64| z_micro_unquenched(nu, xi, mu, &cfg).unwrap();
    let quenched = |xi: Complex64| bessel_j(nu, 2.0 * xi);
    let (a, b) = (cz(0.5, 0.0), cz(1.0, 0.5));
    let got = f(a) / f(b);
    let expect = quenched(a) / quenched(b);
    assert!((got / expect - 1.0).norm() < 0.05, "{got} vs {expect}");
}

#[test]
fn lagrangian_at_zero_source() {
    let cfg = QuadConfig::default();
    let mu = 2.0;
    let phi = 0.7;
    let l = chiral_lagrangian_split(phi, mu, cz(0.0, 0.0), 0, &cfg).unwrap();
    let big = Complex64::from_polar(1.0, phi);
    let expect = mu * (big + 1.0 / big) - (mu * big).ln();
    assert!((l - expect).norm() < 1e-10, "{l} vs {expect}");
    assert!(chiral_lagrangian_split(phi, -1.0, cz(0.0, 0.0), 0, &cfg).is_err());
}
