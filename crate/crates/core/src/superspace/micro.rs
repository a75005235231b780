use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{adapted_radius, coset_integral, diagonal, Coset, CosetPoint, QuadConfig, RadiusChoice};
use crate::error::{Error, Result};
use crate::quadrature::{self, Domain};
use crate::superalg::GrassmannElement;

/// Weight families with a microscopic limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MicroWeight {
    /// Gaussian weight; the argument is ξ = nκ.
    Gaussian,
    /// Lorentz weight with μ = n + μ̃ at fixed μ̃. Here the limit is taken at
    /// fixed ξ = nκ² and depends on Γ and μ̃ (no universality).
    HeavyTailLorentz { gamma: f64, mu_tilde: f64 },
}

fn circle_radius(cfg: &QuadConfig, f: &impl Fn(Complex64) -> Complex64, hi: f64) -> f64 {
    match cfg.radius {
        RadiusChoice::Fixed(r) => r,
        RadiusChoice::Adapted => adapted_radius(f, 1e-4, hi),
    }
}

/// Microscopic partition function at rescaled chiral sources ξ = nκ.
///
/// Gaussian weight, integrand exp(iσ str ξ(Û + Û^{−1})) sdet^{ν}Û over the
/// coset with σ = ±1 the sign of Im ξ₁ (σ = +1 without bosonic source):
///
/// * (0|1): ∮dθ/2π e^{−iξ(u+1/u)} u^{−ν} = (−i)^ν J_ν(2ξ), equal to 1 at
///   ξ = 0, ν = 0;
/// * (1|0): ∫dx/x x^ν e^{iσξ(x+1/x)}, a Macdonald function; its constant
///   is not fixed by any normalization point, so only ratios in ξ carry
///   meaning;
/// * (1|1): normalized by its value at ξ₂ = ξ₁, so the supersymmetric point
///   gives 1.
///
/// For [`MicroWeight::HeavyTailLorentz`] only (0|1) is available and the
/// result is ∮(Γ²+u)^{μ̃−1} e^{−ξ/u} u^{−ν} divided by its ξ = 0 value, with
/// ξ = nκ².
pub fn z_micro(
    weight: &MicroWeight,
    nu: usize,
    xi1: &[Complex64],
    xi2: &[Complex64],
    cfg: &QuadConfig,
) -> Result<Complex64> {
    let coset = Coset::from_counts(xi1.len(), xi2.len())?;
    match weight {
        MicroWeight::Gaussian => match coset {
            Coset::Fermionic => micro_fermionic(nu, xi2[0], cfg),
            Coset::Bosonic => micro_bosonic(nu, xi1[0], cfg),
            Coset::Mixed => {
                let num = micro_mixed(nu, xi1[0], xi2[0], cfg)?;
                let den = micro_mixed(nu, xi1[0], xi1[0], cfg)?;
                Ok(num / den)
            }
        },
        MicroWeight::HeavyTailLorentz { gamma, mu_tilde } => {
            if coset != Coset::Fermionic {
                return Err(Error::Capability("heavy-tail limit is tabulated for (0|1) only".into()));
            }
            heavy_tail(nu, xi2[0], *gamma, *mu_tilde, cfg)
        }
    }
}

fn micro_fermionic(nu: usize, xi: Complex64, cfg: &QuadConfig) -> Result<Complex64> {
    let i = Complex64::i();
    let f = |u: Complex64| (-i * xi * (u + 1.0 / u)).exp() * u.powi(-(nu as i32));
    let r = circle_radius(cfg, &f, 1e4);
    let out = quadrature::integrate_capped(|th| f(Complex64::from_polar(r, th)), Domain::Circle, cfg.rel_tol, cfg.max_nodes)?;
    Ok(out.value)
}

fn orientation(xi1: Complex64) -> Result<f64> {
    if xi1.im == 0.0 {
        return Err(Error::input("bosonic source must have a nonzero imaginary part"));
    }
    Ok(xi1.im.signum())
}

fn micro_bosonic(nu: usize, xi: Complex64, cfg: &QuadConfig) -> Result<Complex64> {
    let sigma = orientation(xi)?;
    let decay = (sigma * xi).im;
    // x = e^t: the integrand decays like exp(−2 Im(σξ) cosh t + νt)
    let mut half_width: f64 = 1.0;
    for _ in 0..4 {
        half_width = ((45.0 + nu as f64 * half_width) / (2.0 * decay)).max(1.0).acosh().max(1.0);
    }
    let i = Complex64::i();
    let out = quadrature::integrate_capped(
        |t| (nu as f64 * t).exp() * (i * sigma * xi * 2.0 * t.cosh()).exp(),
        Domain::Line { half_width },
        cfg.rel_tol,
        cfg.max_nodes,
    )?;
    Ok(out.value)
}

fn micro_mixed(nu: usize, xi1: Complex64, xi2: Complex64, cfg: &QuadConfig) -> Result<Complex64> {
    let sigma = orientation(xi1)?;
    let phase = Complex64::new(0.0, sigma);
    let g = |pt: &CosetPoint| -> Result<GrassmannElement> {
        let u = pt.matrix();
        let ng = u.num_generators();
        let inv = u.inverse()?;
        let arg = diagonal(&[xi1], &[xi2], ng).mul(&u.add(&inv)?)?.str().scale(phase);
        Ok(&arg.exp()? * &u.sdet()?.powi(nu as i32)?)
    };
    let r = match cfg.radius {
        RadiusChoice::Fixed(r) => r,
        RadiusChoice::Adapted => 1.0,
    };
    Ok(coset_integral(Coset::Mixed, g, r, cfg)?.value)
}

fn heavy_tail(nu: usize, xi: Complex64, gamma: f64, mu_tilde: f64, cfg: &QuadConfig) -> Result<Complex64> {
    let g2 = gamma * gamma;
    let e = mu_tilde - 1.0;
    let hi = if e >= 0.0 && e.fract() == 0.0 { 1e4 } else { 0.9 * g2 };
    let integral = |xi: Complex64| -> Result<Complex64> {
        let f = |u: Complex64| (g2 + u).powf(e) * (-xi / u).exp() * u.powi(-(nu as i32));
        let r = circle_radius(cfg, &f, hi);
        Ok(quadrature::integrate_capped(|th| f(Complex64::from_polar(r, th)), Domain::Circle, cfg.rel_tol, cfg.max_nodes)?.value)
    };
    let den = integral(Complex64::new(0.0, 0.0))?;
    if den.norm() < 1e-300 {
        return Err(Error::numeric("heavy-tail normalization vanishes for μ̃ − 1 < ν integer"));
    }
    Ok(integral(xi)? / den)
}

/// Radius of the flavor circle: the saddle |V| = 1 of the mass term, pushed
/// out when needed so that the pole V = −ξv/μ of the coupling stays inside
/// for |v| = 1.
fn flavor_radius(xi: Complex64, mu: f64) -> f64 {
    ((xi.norm() + 1.0) / mu).max(1.0)
}

fn coupled_inner(nu: usize, xi: Complex64, mu: f64, big: Complex64, cfg: &QuadConfig) -> Result<Complex64> {
    let out = quadrature::integrate_capped(
        |th| {
            let v = Complex64::from_polar(1.0, th);
            (xi * (v - 1.0 / v)).exp() * v.powi(-(nu as i32)) / (xi * v + mu * big)
        },
        Domain::Circle,
        cfg.inner_tol,
        cfg.max_nodes,
    )?;
    Ok(out.value)
}

fn flavor_denominator(nu: usize, mu: f64, cfg: &QuadConfig) -> Result<Complex64> {
    let out = quadrature::integrate_capped(
        |phi| {
            let big = Complex64::from_polar(1.0, phi);
            (mu * (big + 1.0 / big)).exp() * big.powi(nu as i32)
        },
        Domain::Circle,
        cfg.rel_tol,
        cfg.max_nodes,
    )?;
    Ok(out.value)
}

/// Chiral Lagrangian of the flavor phase at rescaled mass μ = nm and source
/// ξ = nκ: the mass term μ(V + 1/V) + ν ln V plus the logarithm of the
/// source integral ∮dθ/2π e^{ξ(v−1/v)} v^{−ν}/(ξv + μV), with
/// V = r e^{iφ} on the flavor circle. At ξ = 0 and ν = 0 the source integral
/// is 1/(μV), so L is the mass term minus ln(μV).
pub fn chiral_lagrangian_split(phase: f64, mu: f64, xi: Complex64, nu: usize, cfg: &QuadConfig) -> Result<Complex64> {
    if mu <= 0.0 {
        return Err(Error::input("rescaled mass must be positive"));
    }
    let big = Complex64::from_polar(flavor_radius(xi, mu), phase);
    let inner = coupled_inner(nu, xi, mu, big, cfg)?;
    if inner.norm() == 0.0 {
        return Err(Error::numeric("source integral vanishes"));
    }
    Ok(mu * (big + 1.0 / big) + nu as f64 * big.ln() + inner.ln())
}

/// Microscopic partially quenched partition function with one flavor:
/// ∮∮ e^{μ(V+1/V)} V^ν e^{ξ(v−1/v)} v^{−ν}/(ξv + μV) over ∮ e^{μ(V+1/V)} V^ν.
/// As for the bosonic microscopic function only ratios in ξ carry meaning.
pub fn z_micro_unquenched(nu: usize, xi: Complex64, mu: f64, cfg: &QuadConfig) -> Result<Complex64> {
    if mu <= 0.0 {
        return Err(Error::input("rescaled mass must be positive"));
    }
    let fail = std::cell::RefCell::new(None);
    let num = quadrature::integrate_capped(
        |phi| match chiral_lagrangian_split(phi, mu, xi, nu, cfg) {
            Ok(l) => l.exp(),
            Err(e) => {
                fail.borrow_mut().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
        Domain::Circle,
        cfg.rel_tol,
        cfg.max_nodes,
    );
    if let Some(e) = fail.into_inner() {
        return Err(e);
    }
    Ok(num?.value / flavor_denominator(nu, mu, cfg)?)
}
