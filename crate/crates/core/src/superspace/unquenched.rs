use num_complex::Complex64;

use super::{z_super, CosetPoint, QuadConfig, SuperValue, SuperWeight};
use crate::dyson::DysonIndex;
use crate::error::{Error, Result};
use crate::quadrature::{self, Domain};
use crate::sources::SourcePack;
use crate::superalg::GrassmannElement;

/// Radius of the U circle for a given |u|: either small enough that the
/// coupling pole U = −(u + m²) stays outside (r_u + r_U < m²), or pushed
/// beyond it (r_U > r_u + m²). Both choices give the same partition
/// function; they differ by a residue that integrates to zero over u.
fn inner_radius(ru: f64, m2: f64) -> f64 {
    if ru + 1.0 < 0.8 * m2 {
        1.0
    } else {
        (ru + m2 + 0.25 * (1.0 + ru)).max(1.0)
    }
}

/// Superfunction of the Gaussian weight with one massive flavor, (0|1):
///
/// Q(u) = e^{nu} ∮dφ/2π e^{nU} U^ν (1 + m²/U)^{n+ν+1} / (u + U + m²).
///
/// The inner contour carries the flavor variable U; the factor
/// 1/(u + U + m²) is the coupling superdeterminant of Û and U + m².
pub fn q_unquenched(pt: &CosetPoint, n: usize, nu: usize, mass: f64, rel_tol: f64) -> Result<GrassmannElement> {
    let CosetPoint::Fermionic { u } = *pt else {
        return Err(Error::Capability("the unquenched weight is evaluated in (0|1) only".into()));
    };
    let m2 = mass * mass;
    let r = inner_radius(u.norm(), m2);
    let nf = n as f64;
    let inner = quadrature::integrate(
        |phi| {
            let big = Complex64::from_polar(r, phi);
            (nf * big).exp() * big.powi(nu as i32) * (1.0 + m2 / big).powi((n + nu + 1) as i32) / (u + big + m2)
        },
        Domain::Circle,
        rel_tol,
    )?;
    Ok(GrassmannElement::scalar(0, (nf * u).exp() * inner.value))
}

/// Partially quenched partition function with Nf = 1 flavor of mass m and
/// one fermionic source, Gaussian weight, β = 2:
///
/// Z = E[det(WW†−κ²) det(WW†+m²)] / E[det(WW†+m²)].
pub fn z_unquenched_super(
    masses: &[f64],
    dyson: DysonIndex,
    n: usize,
    nu: usize,
    src: &SourcePack,
    cfg: &QuadConfig,
) -> Result<SuperValue> {
    let [mass] = masses else {
        return Err(Error::Capability(format!(
            "quadrature path needs exactly one flavor, got {}",
            masses.len()
        )));
    };
    z_super(&SuperWeight::Unquenched { mass: *mass }, dyson, n, nu, src, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_small_case() {
        // n=2, ν=1, m=½, κ²=2i from two-eigenvalue quadrature
        let src = SourcePack::from_squared(&[], &[Complex64::new(0.0, 2.0)]).unwrap();
        let z = z_unquenched_super(&[0.5], DysonIndex::Unitary, 2, 1, &src, &QuadConfig::default()).unwrap();
        let expect = Complex64::new(-1.364_864_864_864_864_9, -7.621_621_621_621_621);
        assert!((z.value - expect).norm() < 1e-9, "{}", z.value);
    }

    #[test]
    fn both_radius_regimes_agree() {
        let cfg = QuadConfig::default();
        let u = Complex64::from_polar(0.3, 0.4);
        let src = SourcePack::from_squared(&[], &[Complex64::new(1.0, 1.0)]).unwrap();
        for mass in [0.5, 2.0] {
            let a = z_unquenched_super(&[mass], DysonIndex::Unitary, 2, 0, &src, &cfg).unwrap();
            let fixed = QuadConfig {
                radius: super::super::RadiusChoice::Fixed(0.3),
                ..cfg.clone()
            };
            let b = z_unquenched_super(&[mass], DysonIndex::Unitary, 2, 0, &src, &fixed).unwrap();
            assert!((a.value - b.value).norm() < 1e-9 * a.value.norm());
        }
        assert!(q_unquenched(&CosetPoint::Bosonic { x: 1.0 }, 1, 0, 1.0, 1e-10).is_err());
        assert!(q_unquenched(&CosetPoint::Fermionic { u }, 1, 0, 1.0, 1e-10).is_ok());
    }

    #[test]
    fn heavy_mass_decouples() {
        let cfg = QuadConfig::default();
        let src = SourcePack::from_squared(&[], &[Complex64::new(0.5, 1.0)]).unwrap();
        let quenched = z_super(&SuperWeight::Gaussian { scale: 2.0 }, DysonIndex::Unitary, 2, 1, &src, &cfg).unwrap();
        let heavy = z_unquenched_super(&[100.0], DysonIndex::Unitary, 2, 1, &src, &cfg).unwrap();
        assert!((heavy.value / quenched.value - 1.0).norm() < 1e-3);
        assert!(z_unquenched_super(&[1.0, 2.0], DysonIndex::Unitary, 2, 1, &src, &cfg).is_err());
    }
}
