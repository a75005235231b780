//! Reference values computed along code paths that share nothing with the
//! superspace evaluators: three-term recurrences, eigenvalue-measure
//! quadrature through Andréief's identity, power series, finite sums and a
//! brute-force Monte Carlo of the auxiliary-matrix integral.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, Domain, QuadratureRule};
use crate::sources::SourcePack;
use crate::special::{binomial, elementary_symmetric, factorial};
use crate::superspace::SuperWeight;

/// Monic orthogonal polynomial of degree n for the weight x^ν e^{−s x} on
/// x > 0, evaluated at κ² by the generalized Laguerre recurrence
/// p_{k+1} = (x − (2k+ν+1)/s) p_k − k(k+ν)/s² p_{k−1}.
///
/// Up to the sign (−1)^n this is E[det(WW† − κ²)] for the Gaussian weight
/// exp(−s tr WW†), β = 2; the sign is applied on return.
pub fn laguerre_char_poly(n: usize, nu: usize, scale: f64, kappa_sq: Complex64) -> Complex64 {
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let a = (2 * k + nu + 1) as f64 / scale;
        let b = (k * (k + nu)) as f64 / (scale * scale);
        let next = (kappa_sq - a) * cur - b * prev;
        prev = cur;
        cur = next;
    }
    if n % 2 == 1 {
        -cur
    } else {
        cur
    }
}

/// E[∏_i f(x_i)] over the β = 2 eigenvalue measure Δ(x)² ∏ w(x_i), x > 0,
/// with n eigenvalues, as det[∫x^{j+k} w f] / det[∫x^{j+k} w].
///
/// Moments use the scaled monomials (x/c)^j with c the mean of w; the ratio
/// of determinants does not depend on that choice.
pub fn eigenvalue_average<W, F>(n: usize, w: W, f: F, rel_tol: f64) -> Result<Complex64>
where
    W: Fn(f64) -> f64,
    F: Fn(f64) -> Complex64,
{
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let (mass, _) = quadrature::integrate_vec(|x| vec![Complex64::new(w(x), 0.0), Complex64::new(x * w(x), 0.0)], Domain::HalfLine, rel_tol, quadrature::NODE_CAP)?;
    let c = (mass[1] / mass[0]).re;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::numeric("weight has no finite mean"));
    }
    let k = 2 * n - 1;
    let (mom, _) = quadrature::integrate_vec(
        |x| {
            let wx = w(x);
            let fx = f(x);
            let mut out = Vec::with_capacity(2 * k);
            let mut p = 1.0;
            for _ in 0..k {
                out.push(Complex64::new(p * wx, 0.0));
                out.push(p * wx * fx);
                p *= x / c;
            }
            out
        },
        Domain::HalfLine,
        rel_tol,
        quadrature::NODE_CAP,
    )?;
    let plain = DMatrix::from_fn(n, n, |i, j| mom[2 * (i + j)]);
    let dressed = DMatrix::from_fn(n, n, |i, j| mom[2 * (i + j) + 1]);
    let den = plain.determinant();
    if den.norm() == 0.0 {
        return Err(Error::numeric("singular moment matrix"));
    }
    Ok(dressed.determinant() / den)
}

/// One-eigenvalue weight x^ν·(weight factor) for the factorizable
/// superweights, with the unquenched flavor determinant det(x + m²) folded in.
fn eigen_weight(weight: &SuperWeight, n: usize, nu: usize) -> Result<Box<dyn Fn(f64) -> f64>> {
    let nu = nu as i32;
    let nf = n as f64;
    Ok(match *weight {
        SuperWeight::Gaussian { scale } => Box::new(move |x: f64| x.powi(nu) * (-scale * x).exp()),
        SuperWeight::Lorentz { gamma, mu } => Box::new(move |x: f64| x.powi(nu) * (gamma * gamma + x).powf(-mu)),
        SuperWeight::Quartic { alpha, alpha_hat } => {
            Box::new(move |x: f64| x.powi(nu) * (-alpha * x * x - alpha_hat * x).exp())
        }
        SuperWeight::Unquenched { mass } => Box::new(move |x: f64| x.powi(nu) * (-nf * x).exp() * (x + mass * mass)),
        SuperWeight::NormDependent { .. } => {
            return Err(Error::Capability("norm-dependent weights do not factorize over eigenvalues".into()))
        }
    })
}

/// Reduced partition function E[∏det(WW†−κ2²)/∏det(WW†−κ1²)] for a weight
/// that factorizes over the eigenvalues of WW† (β = 2), by
/// [`eigenvalue_average`].
pub fn eigenvalue_z(weight: &SuperWeight, n: usize, nu: usize, src: &SourcePack, rel_tol: f64) -> Result<Complex64> {
    let w = eigen_weight(weight, n, nu)?;
    let (k1, k2) = (src.squared1(), src.squared2());
    let f = |x: f64| {
        let num: Complex64 = k2.iter().map(|k| x - k).product();
        let den: Complex64 = k1.iter().map(|k| x - k).product();
        num / den
    };
    eigenvalue_average(n, w, f, rel_tol)
}

/// Power series of ∮dθ/2π e^{−iξ(u+1/u)} u^{−ν}, u = e^{iθ}:
/// Σ_k (−iξ)^{2k+ν} / (k!(k+ν)!).
pub fn micro_series(nu: usize, xi: Complex64) -> Complex64 {
    let z = Complex64::new(0.0, -1.0) * xi;
    let mut term = z.powu(nu as u32) / factorial(nu);
    let mut sum = term;
    for k in 1..500 {
        term *= z * z / (k as f64 * (k + nu) as f64);
        sum += term;
        if term.norm() < 1e-18 * sum.norm().max(1e-300) {
            break;
        }
    }
    sum
}

/// E[det(WW† − κ²)] for the Gaussian weight exp(−n tr C^{−1}WW†) with
/// left correlation eigenvalues c (n of them):
/// Σ_k (−κ²)^{n−k} e_k(c) (n+ν)!/((n+ν−k)! n^k).
pub fn correlated_left_sum(n: usize, nu: usize, c: &[f64], kappa_sq: Complex64) -> Complex64 {
    let e = elementary_symmetric(c);
    (0..=n.min(c.len()))
        .map(|k| {
            let falling = factorial(n + nu) / factorial(n + nu - k);
            (-kappa_sq).powu((n - k) as u32) * e[k] * falling / (n as f64).powi(k as i32)
        })
        .sum()
}

/// E[det(WW† − κ²)] for the Gaussian weight exp(−n tr W C^{−1} W†) with
/// right correlation eigenvalues c (n+ν of them), by Cauchy–Binet:
/// Σ_k (−κ²)^{n−k} C(n,k) k! e_k(c) / n^k.
pub fn correlated_right_sum(n: usize, c: &[f64], kappa_sq: Complex64) -> Complex64 {
    let e = elementary_symmetric(c);
    (0..=n.min(c.len()))
        .map(|k| (-kappa_sq).powu((n - k) as u32) * binomial(n, k) * factorial(k) * e[k] / (n as f64).powi(k as i32))
        .sum()
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: Complex64,
    pub err: f64,
}

/// Brute-force Monte Carlo of the quartic superfunction on the (0|1) coset
/// from the defining integral over the Grassmann-free block: with
/// B = Ŵ₁Ŵ₁† (m×m, m = n+1, Ŵ₁ with N̂ = n+ν+1 columns),
///
/// Q(u) ∝ e^{αu² + α̂u} ∫dŴ₁ e^{−α tr B² − α̂ tr B} E_t det(t − α̂ − 2αu − 2αB),
///
/// t ~ N(0, 2α). Ŵ₁ is drawn from exp(−tr B) and reweighted; E_t is exact
/// by Gauss–Hermite. Returns Q(u_j)/Q(u_0) with delete-one-chunk jackknife
/// errors, all ratios computed from the same samples.
pub fn quartic_projection_mc(
    n: usize,
    nu: usize,
    alpha: f64,
    alpha_hat: f64,
    us: &[Complex64],
    samples: u64,
    seed: u64,
) -> Result<Vec<Estimate>> {
    if us.is_empty() || alpha <= 0.0 {
        return Err(Error::input("need at least one û and α > 0"));
    }
    let m = n + 1;
    let cols = n + nu + 1;
    let rule = QuadratureRule::gauss_hermite(m + 1);
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let ts: Vec<(f64, f64)> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(z, w)| (2.0 * alpha.sqrt() * z, w / sqrt_pi))
        .collect();
    let chunks = 32u64;
    let per = (samples / chunks).max(1);
    let mut sums = vec![vec![Complex64::new(0.0, 0.0); us.len()]; chunks as usize];
    for (k, slot) in sums.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        for _ in 0..per {
            let w = DMatrix::from_fn(m, cols, |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            });
            let b = &w * w.adjoint();
            let tr1 = b.trace().re;
            let tr2 = (&b * &b).trace().re;
            let reweight = (-alpha * tr2 - (alpha_hat - 1.0) * tr1).exp();
            for (j, u) in us.iter().enumerate() {
                let shift = alpha_hat + 2.0 * alpha * u;
                let mut e_t = Complex64::new(0.0, 0.0);
                for &(t, wt) in &ts {
                    let mat = DMatrix::from_fn(m, m, |i, l| {
                        let diag = if i == l { t - shift } else { Complex64::new(0.0, 0.0) };
                        diag - 2.0 * alpha * b[(i, l)]
                    });
                    e_t += wt * mat.determinant();
                }
                slot[j] += reweight * e_t * (alpha * u * u + alpha_hat * u).exp();
            }
        }
    }
    let total: Vec<Complex64> = (0..us.len()).map(|j| sums.iter().map(|s| s[j]).sum()).collect();
    if total[0].norm() == 0.0 {
        return Err(Error::numeric("reference value vanishes"));
    }
    let g = chunks as f64;
    Ok((0..us.len())
        .map(|j| {
            let value = total[j] / total[0];
            let loo: Vec<Complex64> = sums.iter().map(|s| (total[j] - s[j]) / (total[0] - s[0])).collect();
            let bar: Complex64 = loo.iter().sum::<Complex64>() / g;
            let var = (g - 1.0) / g * loo.iter().map(|t| (t - bar).norm_sqr()).sum::<f64>();
            Estimate { value, err: var.sqrt() }
        })
        .collect())
}
