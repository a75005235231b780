use num_complex::Complex64;

use super::CosetPoint;
use crate::dyson::DysonIndex;
use crate::ensembles::RadialWeight;
use crate::error::{Error, Result};
use crate::quadrature::{self, Domain, NODE_CAP};
use crate::superalg::{even_det, lift_scalar, GrassmannElement};

/// Largest n for which the auxiliary-matrix integral of the quartic weight
/// is expanded directly.
pub const MAX_QUARTIC_N: usize = 6;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Number of nonzero powers of the soul, i.e. the Taylor order needed to
/// lift a scalar function onto `x`.
fn nilpotent_order(x: &GrassmannElement) -> usize {
    let soul = x.soul();
    let mut power = soul.clone();
    let mut k = 0;
    while !power.is_zero() {
        k += 1;
        power = &power * &soul;
    }
    k
}

/// exp(−scale·str Û).
pub fn q_gaussian(pt: &CosetPoint, scale: f64) -> Result<GrassmannElement> {
    pt.matrix().str().scale(c(-scale)).exp()
}

/// Superfunction of a norm-dependent weight p(tr W†W):
///
/// Q(Û) = ½∫₀^∞ dt t^{D/2−1} p(t + str Û),  D = β(n + γ̃(k2−k1))(n+ν),
///
/// which is ∫dr r^{D−1} p(r² + str Û). For D = 0 the radial integral is
/// absent and Q = p(str Û). Derivatives of the radial integral are
/// integrated alongside so that Q can be lifted to nilpotent arguments.
pub fn q_norm_dependent(
    p: &RadialWeight,
    pt: &CosetPoint,
    dyson: DysonIndex,
    n: usize,
    nu: usize,
    rel_tol: f64,
) -> Result<GrassmannElement> {
    p.validate()?;
    let excess = pt.coset().excess();
    let rows = n as isize + dyson.gamma_tilde() as isize * excess;
    if rows < 0 {
        return Err(Error::input("γ̃k1 exceeds γ̃k2 + n"));
    }
    let dim = dyson.beta() as usize * rows as usize * (n + nu);
    let s = pt.matrix().str();
    let order = nilpotent_order(&s);
    if dim == 0 {
        return lift_scalar(|z, k| p.derivatives(z, k), &s);
    }
    let body = s.body();
    let h = dim as f64 / 2.0 - 1.0;
    let (derivs, _) = quadrature::integrate_vec(
        |t| {
            if t <= 0.0 {
                return vec![c(0.0); order + 1];
            }
            let jac = 0.5 * t.powf(h);
            p.derivatives(body + t, order).into_iter().map(|d| d * jac).collect()
        },
        Domain::HalfLine,
        rel_tol,
        NODE_CAP,
    )?;
    lift_scalar(|_, _| derivs.clone(), &s)
}

/// Closed-form Lorentz superfunction sdet^{n/γ̃ + (k2−k1) − μ}(Γ²·1 + Û).
pub fn q_lorentz(
    pt: &CosetPoint,
    dyson: DysonIndex,
    n: usize,
    nu: usize,
    gamma: f64,
    mu: f64,
) -> Result<GrassmannElement> {
    let excess = pt.coset().excess();
    let gt = dyson.gamma_tilde() as f64;
    let bound = (n + nu) as f64 / gt + excess.max(0) as f64;
    if mu <= bound {
        return Err(Error::input(format!(
            "Lorentz exponent μ = {mu} must exceed {bound} for the integrals to converge"
        )));
    }
    let exponent = n as f64 / gt + excess as f64 - mu;
    pt.matrix().shift(c(gamma * gamma)).sdet()?.powf(exponent)
}

/// sdet^{−1}(a·1 + b·Û) in closed form on each coset.
fn shifted_inverse_sdet(pt: &CosetPoint, a: Complex64, b: f64) -> Result<GrassmannElement> {
    match *pt {
        CosetPoint::Fermionic { u } => Ok(GrassmannElement::scalar(0, a + b * u)),
        CosetPoint::Bosonic { x } => Ok(GrassmannElement::scalar(0, (a + b * x).inv())),
        // sdet⁻¹ = D/A + b²η₀η₁/A² with A = a + bx, D = a + by
        CosetPoint::Mixed { x, y } => {
            let big_a = a + b * x;
            let big_d = a + b * y;
            if big_a.norm() == 0.0 {
                return Err(Error::Singular("a + bx vanishes".into()));
            }
            GrassmannElement::from_terms(2, [(0, big_d / big_a), (0b11, b * b / (big_a * big_a))])
        }
    }
}

/// Quartic superfunction for P(W) ∝ exp(−α tr(W†W)² − α̂ tr W†W), β = 2.
///
/// The quartic term is linearized by a Hermitian m×m matrix H,
/// m = n + k2 − k1, leaving
///
/// Q(Û) ∝ e^{−α str Û² − α̂ str Û} ∫dH e^{−tr(H − i(1−α̂))²/(4α)}
///        det^{−N̂}(1 + iH) sdet^{−1}((1+iH)⊗1 + 1⊗2αÛ),
///
/// with N̂ = n + ν + k2 − k1. The H integrand factorizes over eigenvalues,
/// so by Andréief's identity the integral is the Hankel determinant of the
/// one-eigenvalue moments μ_j = ∫dE E^j w(E). The moments are taken on the
/// line Im E = s through the saddle (or at distance ½ from the pole of
/// (1+iE)^{−N̂}) with the trapezoid rule in t = (Re E)/√(2α), which
/// converges exponentially; the Hankel determinant is translation and scale
/// covariant, so the substitution only changes a Û-independent constant.
pub fn q_quartic(
    pt: &CosetPoint,
    dyson: DysonIndex,
    n: usize,
    nu: usize,
    alpha: f64,
    alpha_hat: f64,
    rel_tol: f64,
) -> Result<GrassmannElement> {
    if dyson != DysonIndex::Unitary {
        return Err(Error::Capability("quartic eigenvalue reduction needs β = 2".into()));
    }
    if alpha <= 0.0 {
        return Err(Error::input("quartic α must be positive"));
    }
    if n > MAX_QUARTIC_N {
        return Err(Error::Capability(format!(
            "direct expansion limited to n ≤ {MAX_QUARTIC_N}; sample H by Monte Carlo instead"
        )));
    }
    let u = pt.matrix();
    let ng = u.num_generators();
    let excess = pt.coset().excess();
    let m = n as isize + excess;
    let nhat = (n + nu) as isize + excess;
    if m < 0 || nhat < 0 {
        return Err(Error::input("γ̃k1 exceeds γ̃k2 + n"));
    }
    let m = m as usize;
    let prefactor = (&u.mul(&u)?.str().scale(c(-alpha)) - &u.str().scale(c(alpha_hat))).exp()?;
    if m == 0 {
        return Ok(prefactor);
    }
    let masks: Vec<u32> = (0u32..1 << ng).filter(|k| k.count_ones() % 2 == 0).collect();
    let moments = 2 * m - 1;
    let s_c = 1.0 - alpha_hat;
    let s = if alpha_hat >= 0.5 { s_c } else { 0.5 };
    let sigma = (2.0 * alpha).sqrt();
    let i = Complex64::i();
    let (values, _) = quadrature::integrate_vec(
        |t| {
            let e = Complex64::new(sigma * t, s);
            let a = c(1.0) + i * e;
            // |exp(−(E−is_c)²/4α)| = e^{−t²/2 + (s−s_c)²/4α}; the constant is dropped
            let shift = Complex64::new(sigma * t, s - s_c);
            let base = (-shift * shift / (4.0 * alpha) - (s - s_c).powi(2) / (4.0 * alpha)).exp() * a.powi(-(nhat as i32));
            let f = shifted_inverse_sdet(pt, a, 2.0 * alpha).expect("pole lies off the line");
            let mut out = Vec::with_capacity(moments * masks.len());
            let mut tk = c(1.0);
            for _ in 0..moments {
                for &mask in &masks {
                    out.push(base * tk * f.coeff(mask));
                }
                tk *= t;
            }
            out
        },
        Domain::Line { half_width: 14.0 },
        rel_tol,
        NODE_CAP,
    )?;
    let moment = |k: usize| {
        let terms = masks
            .iter()
            .enumerate()
            .map(|(j, &mask)| (mask, values[k * masks.len() + j]));
        GrassmannElement::from_terms(ng, terms).expect("even masks")
    };
    let hankel: Vec<Vec<GrassmannElement>> = (0..m).map(|j| (0..m).map(|k| moment(j + k)).collect()).collect();
    Ok(&prefactor * &even_det(&hankel, ng)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superalg::lift_scalar;

    const B: DysonIndex = DysonIndex::Unitary;

    fn fermionic(u: Complex64) -> CosetPoint {
        CosetPoint::Fermionic { u }
    }

    #[test]
    fn gaussian_profile_matches_closed_form() {
        // ½∫t^{D/2−1}e^{−r(t+s)}dt ∝ e^{−r s} on every coset, with one
        // constant per coset
        let p = RadialWeight::Exponential { rate: 3.0 };
        let families = [
            vec![fermionic(Complex64::new(0.3, 0.4)), fermionic(Complex64::new(-0.7, 0.1))],
            vec![CosetPoint::Bosonic { x: 0.8 }, CosetPoint::Bosonic { x: 2.5 }],
            vec![
                CosetPoint::Mixed { x: 0.6, y: Complex64::new(0.2, -0.5) },
                CosetPoint::Mixed { x: 1.9, y: Complex64::new(-0.3, 0.1) },
            ],
        ];
        for (n, nu) in [(1, 0), (2, 1), (3, 2)] {
            for pts in &families {
                let ratios: Vec<Complex64> = pts
                    .iter()
                    .map(|pt| {
                        let q = q_norm_dependent(&p, pt, B, n, nu, 1e-13).unwrap();
                        let g = q_gaussian(pt, 3.0).unwrap();
                        assert!(q.distance(&g.scale(q.body() / g.body())) < 1e-12 * q.body().norm());
                        q.body() / g.body()
                    })
                    .collect();
                assert!((ratios[1] / ratios[0] - 1.0).norm() < 1e-9, "{n} {nu} {ratios:?}");
            }
        }
    }

    #[test]
    fn decoupled_moment_integral() {
        // str Û = 0 at u = 0 in (0|1): Q = ½∫t^{D/2−1}e^{−t}dt = Γ(D/2)/2
        let p = RadialWeight::Exponential { rate: 1.0 };
        let q = q_norm_dependent(&p, &fermionic(c(0.0)), B, 1, 0, 1e-13).unwrap();
        // D = 2·2·1 = 4
        assert!((q.body() - 0.5).norm() < 1e-12);
        // D = 0 in (1|0) at n = 1: Q = p(x)
        let q = q_norm_dependent(&p, &CosetPoint::Bosonic { x: 0.7 }, B, 1, 3, 1e-13).unwrap();
        assert!((q.body() - (-0.7f64).exp()).norm() < 1e-15);
    }

    #[test]
    fn narrow_profile_approaches_fixed_trace() {
        // with D = 4, ½∫t p(t+s) → ½(c−s) as the width shrinks
        let s_pt = fermionic(Complex64::new(0.2, 0.1));
        let s = -Complex64::new(0.2, 0.1);
        let exact = 0.5 * (c(3.0) - s);
        let mut last = f64::INFINITY;
        for width in [0.2, 0.1, 0.05] {
            let p = RadialWeight::NarrowGaussian { center: 3.0, width };
            let norm = width * (2.0 * std::f64::consts::PI).sqrt();
            let q = q_norm_dependent(&p, &s_pt, B, 1, 0, 1e-12).unwrap().body() / norm;
            let err = (q - exact).norm();
            assert!(err <= last + 1e-12);
            last = err;
        }
        assert!(last < 1e-6, "{last}");
    }

    #[test]
    fn lorentz_fermionic_closed_form() {
        let (gamma, mu, n) = (1.3, 5.5, 2);
        let u = Complex64::from_polar(0.8, 1.1);
        let q = q_lorentz(&fermionic(u), B, n, 1, gamma, mu).unwrap();
        let expect = (gamma * gamma + u).powf(mu - n as f64 - 1.0);
        assert!((q.body() - expect).norm() < 1e-13 * expect.norm());
        assert!(q_lorentz(&fermionic(u), B, n, 1, gamma, 3.5).is_err());
        // (1|0): positive and decreasing in x for a negative exponent
        let a = q_lorentz(&CosetPoint::Bosonic { x: 0.5 }, B, n, 1, gamma, mu).unwrap().body();
        let b = q_lorentz(&CosetPoint::Bosonic { x: 1.5 }, B, n, 1, gamma, mu).unwrap().body();
        assert!(a.im == 0.0 && b.re > 0.0 && a.re > b.re);
    }

    #[test]
    fn lift_of_profile_on_mixed_point_matches_monomials() {
        // p(r² + str Û) on (1|1): str Û = x − y has no soul, so the lift of
        // any profile is its value; a deformed Û with a soul on the diagonal
        // is expanded by hand instead
        let p = RadialWeight::Power { shift: 2.0, exponent: 1.5 };
        let g = |i| GrassmannElement::generator(2, i);
        let eps = &g(0) * &g(1);
        let arg = eps.scale(c(0.4)).add_scalar(Complex64::new(1.2, 0.3));
        let lifted = lift_scalar(|z, k| p.derivatives(z, k), &arg).unwrap();
        let d = p.derivatives(Complex64::new(1.2, 0.3), 1);
        assert!((lifted.body() - d[0]).norm() < 1e-15);
        assert!((lifted.coeff(0b11) - 0.4 * d[1]).norm() < 1e-15);
    }

    fn poly_fit_residual(xs: &[Complex64], ys: &[Complex64], degree: usize) -> f64 {
        use nalgebra::{DMatrix, DVector};
        let a = DMatrix::from_fn(xs.len(), degree + 1, |i, j| xs[i].powi(j as i32));
        let b = DVector::from_column_slice(ys);
        let sol = a.clone().svd(true, true).solve(&b, 1e-14).unwrap();
        let r = &a * sol - &b;
        r.norm() / b.norm()
    }

    #[test]
    fn quartic_is_polynomial_of_degree_m() {
        let (n, nu, alpha, alpha_hat) = (2, 0, 1.0, 0.0);
        let us: Vec<Complex64> = (0..9).map(|k| Complex64::from_polar(0.9, 0.7 * k as f64)).collect();
        let ys: Vec<Complex64> = us
            .iter()
            .map(|&u| {
                let q = q_quartic(&fermionic(u), B, n, nu, alpha, alpha_hat, 1e-13).unwrap().body();
                q / (alpha * u * u + alpha_hat * u).exp()
            })
            .collect();
        assert!(poly_fit_residual(&us, &ys, n + 1) < 1e-9);
        assert!(poly_fit_residual(&us, &ys, n) > 1e-4);
    }

    #[test]
    fn quartic_small_alpha_limit() {
        let alpha_hat = 1.0;
        let p = RadialWeight::Exponential { rate: alpha_hat };
        let (n, nu) = (2, 1);
        let u0 = fermionic(Complex64::new(0.3, 0.0));
        for u in [Complex64::new(0.7, 0.2), Complex64::new(-0.4, 0.5)] {
            let q = |pt: &CosetPoint| q_quartic(pt, B, n, nu, 1e-8, alpha_hat, 1e-12).unwrap().body();
            let r = |pt: &CosetPoint| q_norm_dependent(&p, pt, B, n, nu, 1e-12).unwrap().body();
            let a = q(&fermionic(u)) / q(&u0);
            let b = r(&fermionic(u)) / r(&u0);
            assert!((a / b - 1.0).norm() < 1e-4, "{a} {b}");
        }
    }

    #[test]
    fn quartic_size_cap() {
        let r = q_quartic(&fermionic(c(0.5)), B, 7, 0, 1.0, 0.0, 1e-10);
        assert!(matches!(r, Err(Error::Capability(_))));
    }

    #[test]
    fn mixed_shifted_sdet_closed_form() {
        let pt = CosetPoint::Mixed {
            x: 0.7,
            y: Complex64::from_polar(0.9, 1.1),
        };
        let u = pt.matrix();
        let a = Complex64::new(1.0, -0.4);
        let fast = shifted_inverse_sdet(&pt, a, 0.6).unwrap();
        let slow = u.scale(c(0.6)).shift(a).sdet().unwrap().inverse().unwrap();
        assert!(fast.distance(&slow) < 1e-14);
    }
}
