use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{correlation_matrix, ChiralSample, EnsembleSpec, RadialWeight};
use crate::dyson::DysonIndex;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Fills a γn × γ(n+ν) matrix from real standard normals scaled by `sd`.
pub(crate) fn gaussian_matrix<R: Rng + ?Sized>(
    dyson: DysonIndex,
    n: usize,
    nu: usize,
    sd: f64,
    rng: &mut R,
) -> CMatrix {
    let cols = n + nu;
    match dyson {
        DysonIndex::Orthogonal => CMatrix::from_fn(n, cols, |_, _| Complex64::new(sd * normal(rng), 0.0)),
        DysonIndex::Unitary => {
            CMatrix::from_fn(n, cols, |_, _| Complex64::new(sd * normal(rng), sd * normal(rng)))
        }
        DysonIndex::Symplectic => {
            let mut w = CMatrix::zeros(2 * n, 2 * cols);
            for i in 0..n {
                for j in 0..cols {
                    let q: [f64; 4] = std::array::from_fn(|_| sd * normal(rng));
                    let a = Complex64::new(q[0], q[3]);
                    let b = Complex64::new(q[2], q[1]);
                    w[(2 * i, 2 * j)] = a;
                    w[(2 * i, 2 * j + 1)] = b;
                    w[(2 * i + 1, 2 * j)] = -b.conj();
                    w[(2 * i + 1, 2 * j + 1)] = a.conj();
                }
            }
            w
        }
    }
}

/// Standard deviation of each real coordinate under exp(−scale·tr W†W/γ̃).
pub(crate) fn coordinate_sd(dyson: DysonIndex, scale: f64) -> f64 {
    let var = match dyson {
        DysonIndex::Orthogonal => 1.0 / scale,
        DysonIndex::Unitary => 1.0 / (2.0 * scale),
        DysonIndex::Symplectic => 1.0 / (4.0 * scale),
    };
    var.sqrt()
}

/// Direct draw from the Gaussian weight exp(−scale·tr W†W/γ̃).
pub fn sample_gaussian<R: Rng + ?Sized>(
    dyson: DysonIndex,
    n: usize,
    nu: usize,
    scale: f64,
    rng: &mut R,
) -> ChiralSample {
    let w = gaussian_matrix(dyson, n, nu, coordinate_sd(dyson, scale), rng);
    ChiralSample::new(dyson, n, nu, w).expect("shape by construction")
}

/// Draw from δ(tr W†W − c·n): a Gaussian draw projected radially onto the
/// sphere, which is uniform on it by rotation invariance.
pub fn sample_fixed_trace<R: Rng + ?Sized>(
    dyson: DysonIndex,
    n: usize,
    nu: usize,
    c: f64,
    rng: &mut R,
) -> Result<ChiralSample> {
    if c <= 0.0 {
        return Err(Error::input("fixed trace needs c > 0"));
    }
    loop {
        let mut s = sample_gaussian(dyson, n, nu, n as f64, rng);
        let t = s.trace_norm();
        if t > 0.0 {
            s.w *= Complex64::new((c * n as f64 / t).sqrt(), 0.0);
            return Ok(s);
        }
    }
}

/// Right factor R with W → W·R: Lᵀ, or Lᵀ⊗1₂ for quaternions.
pub(crate) fn dressing_matrix(l: &DMatrix<f64>, dyson: DysonIndex) -> CMatrix {
    let lt = l.transpose();
    let g = dyson.gamma();
    let m = lt.nrows();
    CMatrix::from_fn(g * m, g * m, |i, j| {
        if i % g == j % g {
            Complex64::new(lt[(i / g, j / g)], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Dresses W → W·C^{1/2} with the lower Cholesky factor L of C (C^{1/2}
/// meaning Lᵀ), so that the columns of W acquire covariance C. The Jacobian
/// det C^{βn/2} of the map is added to `log_jacobian`.
pub fn apply_correlation(s: &ChiralSample, c: &DMatrix<f64>) -> Result<ChiralSample> {
    if c.nrows() != s.n + s.nu {
        return Err(Error::input(format!(
            "correlation matrix of size {} for n + ν = {}",
            c.nrows(),
            s.n + s.nu
        )));
    }
    let l = linalg::cholesky(c)?;
    let ln_det_c: f64 = 2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let mut out = s.clone();
    out.w = &s.w * dressing_matrix(&l, s.dyson);
    out.log_jacobian += s.dyson.beta() as f64 * s.n as f64 / 2.0 * ln_det_c;
    Ok(out)
}

/// Draws from weights that admit exact sampling; see
/// [`EnsembleSpec::has_direct_sampler`].
pub fn sample_direct<R: Rng + ?Sized>(
    spec: &EnsembleSpec,
    dyson: DysonIndex,
    n: usize,
    nu: usize,
    rng: &mut R,
) -> Result<ChiralSample> {
    match spec {
        EnsembleSpec::Gaussian { scale } => Ok(sample_gaussian(dyson, n, nu, scale.unwrap_or(n as f64), rng)),
        EnsembleSpec::FixedTrace { c } => sample_fixed_trace(dyson, n, nu, *c, rng),
        EnsembleSpec::NormDependent {
            p: RadialWeight::Exponential { rate },
        } => Ok(sample_gaussian(dyson, n, nu, rate * dyson.gamma_tilde() as f64, rng)),
        EnsembleSpec::Correlated { base, c } => {
            let bare = sample_direct(base, dyson, n, nu, rng)?;
            apply_correlation(&bare, &correlation_matrix(c, n + nu)?)
        }
        other => Err(Error::Capability(format!(
            "no direct sampler for the {} weight",
            other.name()
        ))),
    }
}
