//! Probability weights for the rectangular matrix W, direct samplers, and a
//! Metropolis chain for weights without a direct sampler.
//!
//! W is stored as a complex matrix of size γn × γ(n+ν). Real (β=1) samples
//! have zero imaginary parts; quaternion (β=4) samples are embedded as 2×2
//! blocks [[a, b], [−b*, a*]].

mod mcmc;
mod sampling;

pub use mcmc::{autocorrelation_time, Chain, ChainConfig};
pub use sampling::{apply_correlation, sample_direct, sample_fixed_trace, sample_gaussian};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyson::DysonIndex;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// One realization of W together with the bookkeeping needed downstream.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiralSample {
    pub dyson: DysonIndex,
    pub n: usize,
    pub nu: usize,
    pub w: CMatrix,
    /// log of the Jacobian recorded by [`apply_correlation`], zero otherwise.
    pub log_jacobian: f64,
}

impl ChiralSample {
    pub fn new(dyson: DysonIndex, n: usize, nu: usize, w: CMatrix) -> Result<Self> {
        let g = dyson.gamma();
        if w.nrows() != g * n || w.ncols() != g * (n + nu) {
            return Err(Error::Structure(format!(
                "W is {}×{}, expected {}×{}",
                w.nrows(),
                w.ncols(),
                g * n,
                g * (n + nu)
            )));
        }
        Ok(Self {
            dyson,
            n,
            nu,
            w,
            log_jacobian: 0.0,
        })
    }

    /// Builds a sample from W of arbitrary index sign: a matrix with more
    /// rows than columns is transposed (ν < 0 maps onto ν > 0).
    pub fn from_any_shape(dyson: DysonIndex, w: CMatrix) -> Result<Self> {
        let g = dyson.gamma();
        let w = if w.nrows() > w.ncols() { w.transpose() } else { w };
        if w.nrows() % g != 0 || w.ncols() % g != 0 {
            return Err(Error::Structure("W does not consist of full blocks".into()));
        }
        let n = w.nrows() / g;
        let nu = w.ncols() / g - n;
        Self::new(dyson, n, nu, w)
    }

    /// W W†, of size γn.
    pub fn wishart(&self) -> CMatrix {
        &self.w * self.w.adjoint()
    }

    /// W† W, of size γ(n+ν).
    pub fn wishart_dual(&self) -> CMatrix {
        self.w.adjoint() * &self.w
    }

    /// tr W†W over the complex embedding.
    pub fn trace_norm(&self) -> f64 {
        self.w.iter().map(|z| z.norm_sqr()).sum()
    }

    /// The Hermitian chiral matrix [[0, W], [W†, 0]].
    pub fn chiral_matrix(&self) -> CMatrix {
        let r = self.w.nrows();
        let c = self.w.ncols();
        let mut h = CMatrix::zeros(r + c, r + c);
        h.view_mut((0, r), (r, c)).copy_from(&self.w);
        h.view_mut((r, 0), (c, r)).copy_from(&self.w.adjoint());
        h
    }

    /// Largest violation of the quaternion condition W* = (−iτ₂) W (iτ₂)
    /// over all 2×2 blocks; zero for β ≠ 4.
    pub fn quaternion_defect(&self) -> f64 {
        if self.dyson != DysonIndex::Symplectic {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for bi in 0..self.n {
            for bj in 0..self.n + self.nu {
                let a = self.w[(2 * bi, 2 * bj)];
                let b = self.w[(2 * bi, 2 * bj + 1)];
                let c = self.w[(2 * bi + 1, 2 * bj)];
                let d = self.w[(2 * bi + 1, 2 * bj + 1)];
                worst = worst.max((c + b.conj()).norm()).max((d - a.conj()).norm());
            }
        }
        worst
    }
}

/// Radial profile p of a norm-dependent weight P(W) = p(tr W†W).
///
/// The profile must be analytic, because superspace evaluation lifts it to
/// complex and nilpotent arguments; every variant therefore supplies all
/// of its derivatives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialWeight {
    /// p(t) = e^{−rate·t}.
    Exponential { rate: f64 },
    /// p(t) = (shift + t)^{−exponent}.
    Power { shift: f64, exponent: f64 },
    /// p(t) = exp(−(t − center)²/(2 width²)), a smooth stand-in for δ(t − center).
    NarrowGaussian { center: f64, width: f64 },
}

impl RadialWeight {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Exponential { rate } => rate > 0.0,
            Self::Power { shift, exponent } => shift > 0.0 && exponent > 0.0,
            Self::NarrowGaussian { width, .. } => width > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::input(format!("invalid radial weight {self:?}")))
        }
    }

    /// p(t), p'(t), …, p^{(k)}(t).
    pub fn derivatives(&self, t: Complex64, k: usize) -> Vec<Complex64> {
        match *self {
            Self::Exponential { rate } => {
                let v = (-rate * t).exp();
                (0..=k).map(|j| v * (-rate).powi(j as i32)).collect()
            }
            Self::Power { shift, exponent } => {
                let base = t + shift;
                let mut coeff = 1.0;
                (0..=k)
                    .map(|j| {
                        let e = -exponent - j as f64;
                        let v = base.powf(e) * coeff;
                        coeff *= e;
                        v
                    })
                    .collect()
            }
            Self::NarrowGaussian { center, width } => {
                let scale = 1.0 / (std::f64::consts::SQRT_2 * width);
                let s = (t - center) * scale;
                let g = (-s * s).exp();
                let mut out = Vec::with_capacity(k + 1);
                let mut h_prev = Complex64::new(0.0, 0.0);
                let mut h = Complex64::new(1.0, 0.0);
                for j in 0..=k {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    out.push(h * g * sign * scale.powi(j as i32));
                    let next = s * h * 2.0 - h_prev * (2.0 * j as f64);
                    h_prev = h;
                    h = next;
                }
                out
            }
        }
    }

    pub fn value(&self, t: Complex64) -> Complex64 {
        self.derivatives(t, 0)[0]
    }

    /// ln p(t) at real t.
    pub fn ln_value(&self, t: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => -rate * t,
            Self::Power { shift, exponent } => -exponent * (shift + t).ln(),
            Self::NarrowGaussian { center, width } => -(t - center).powi(2) / (2.0 * width * width),
        }
    }
}

/// Probability weight of W.
/// Smallest μ for which det^{−μ}(Γ² + W†W) times the source ratio is
/// integrable. One eigenvalue x of W†W far out carries
/// x^{(β/2)(2n+ν−1)−1} from the measure, so normalization needs
/// μ > (β/2)(2n+ν−1); each net fermionic source adds one power of x per
/// eigenvalue (two for β = 4, where eigenvalues are doubly degenerate).
pub fn lorentz_bound(dyson: DysonIndex, n: usize, nu: usize, k1: usize, k2: usize) -> f64 {
    let per_source = if dyson == DysonIndex::Symplectic { 2.0 } else { 1.0 };
    dyson.beta() as f64 / 2.0 * (2 * n + nu) as f64 - dyson.beta() as f64 / 2.0
        + per_source * k2.saturating_sub(k1) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleSpec {
    /// exp(−scale·tr W†W/γ̃); `scale` defaults to n.
    Gaussian {
        #[serde(default)]
        scale: Option<f64>,
    },
    /// det^{−μ}(Γ² + W†W).
    Lorentz { gamma: f64, mu: f64 },
    /// exp(−α tr (WW†)² − α̂ tr WW†).
    Quartic { alpha: f64, alpha_hat: f64 },
    /// p(tr W†W).
    NormDependent { p: RadialWeight },
    /// δ(tr W†W − c·n).
    FixedTrace { c: f64 },
    /// The base weight with W replaced by W·C^{−1/2} (column covariance C).
    Correlated {
        base: Box<EnsembleSpec>,
        c: Vec<Vec<f64>>,
    },
}

impl EnsembleSpec {
    pub fn gaussian() -> Self {
        Self::Gaussian { scale: None }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian { .. } => "gaussian",
            Self::Lorentz { .. } => "lorentz",
            Self::Quartic { .. } => "quartic",
            Self::NormDependent { .. } => "norm_dependent",
            Self::FixedTrace { .. } => "fixed_trace",
            Self::Correlated { .. } => "correlated",
        }
    }

    pub fn gaussian_scale(&self, n: usize) -> Option<f64> {
        match self {
            Self::Gaussian { scale } => Some(scale.unwrap_or(n as f64)),
            _ => None,
        }
    }

    /// Parameter checks that do not depend on the sources.
    pub fn validate(&self, dyson: DysonIndex, n: usize, nu: usize) -> Result<()> {
        match self {
            Self::Gaussian { scale } => {
                if scale.is_some_and(|s| s <= 0.0 || !s.is_finite()) {
                    return Err(Error::input("Gaussian scale must be positive"));
                }
            }
            Self::Lorentz { gamma, mu } => {
                if *gamma <= 0.0 || !mu.is_finite() {
                    return Err(Error::input("Lorentz width must be positive"));
                }
                let bound = lorentz_bound(dyson, n, nu, 0, 0);
                if *mu <= bound {
                    return Err(Error::input(format!(
                        "Lorentz weight with μ = {mu} is not normalizable (need μ > {bound})"
                    )));
                }
            }
            Self::Quartic { alpha, alpha_hat } => {
                if *alpha <= 0.0 || !alpha_hat.is_finite() {
                    return Err(Error::input("quartic weight needs α > 0"));
                }
            }
            Self::NormDependent { p } => p.validate()?,
            Self::FixedTrace { c } => {
                if *c <= 0.0 {
                    return Err(Error::input("fixed trace needs c > 0"));
                }
            }
            Self::Correlated { base, c } => {
                if matches!(**base, Self::Correlated { .. }) {
                    return Err(Error::input("nested correlations are not supported"));
                }
                base.validate(dyson, n, nu)?;
                let m = correlation_matrix(c, n + nu)?;
                linalg::cholesky(&m)?;
            }
        }
        Ok(())
    }

    /// Lorentz convergence bound, see [`lorentz_bound`], checked before
    /// partition-function runs.
    pub fn check_convergence(&self, dyson: DysonIndex, n: usize, nu: usize, k1: usize, k2: usize) -> Result<()> {
        if let Self::Lorentz { mu, .. } = self {
            let bound = lorentz_bound(dyson, n, nu, k1, k2);
            if *mu <= bound {
                return Err(Error::input(format!(
                    "Lorentz exponent μ = {mu} must exceed {bound} for convergence"
                )));
            }
        }
        if let Self::Correlated { base, .. } = self {
            base.check_convergence(dyson, n, nu, k1, k2)?;
        }
        Ok(())
    }

    /// True when [`sample_direct`] applies, false when a chain is needed.
    pub fn has_direct_sampler(&self) -> bool {
        match self {
            Self::Gaussian { .. } | Self::FixedTrace { .. } => true,
            Self::NormDependent { p } => matches!(p, RadialWeight::Exponential { .. }),
            Self::Correlated { base, .. } => base.has_direct_sampler(),
            _ => false,
        }
    }
}

/// Converts nested rows into a square matrix of the expected size.
pub fn correlation_matrix(rows: &[Vec<f64>], size: usize) -> Result<DMatrix<f64>> {
    if rows.len() != size || rows.iter().any(|r| r.len() != size) {
        return Err(Error::input(format!("correlation matrix must be {size}×{size}")));
    }
    Ok(DMatrix::from_fn(size, size, |i, j| rows[i][j]))
}

/// Log-determinant of Γ² + W†W, with the quaternion determinant (square root
/// of the complex one) for β = 4.
fn lorentz_log_det(s: &ChiralSample, gamma: f64) -> Result<f64> {
    let m = s.wishart_dual() + CMatrix::identity(s.w.ncols(), s.w.ncols()) * Complex64::new(gamma * gamma, 0.0);
    let ld = linalg::log_det(&m)?.ln_abs;
    Ok(ld / s.dyson.gamma() as f64)
}

/// Unnormalized log-density of `spec` at the sample.
pub fn log_density(spec: &EnsembleSpec, s: &ChiralSample) -> Result<f64> {
    let gt = s.dyson.gamma_tilde() as f64;
    let value = match spec {
        EnsembleSpec::Gaussian { scale } => -scale.unwrap_or(s.n as f64) * s.trace_norm() / gt,
        EnsembleSpec::Lorentz { gamma, mu } => -mu * lorentz_log_det(s, *gamma)?,
        EnsembleSpec::Quartic { alpha, alpha_hat } => {
            let ww = s.wishart();
            let t1 = ww.trace().re;
            let t2 = (&ww * &ww).trace().re;
            -alpha * t2 - alpha_hat * t1
        }
        EnsembleSpec::NormDependent { p } => p.ln_value(s.trace_norm()),
        EnsembleSpec::FixedTrace { c } => {
            let target = c * s.n as f64;
            if (s.trace_norm() - target).abs() <= 1e-9 * target {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        }
        EnsembleSpec::Correlated { base, c } => {
            let m = correlation_matrix(c, s.n + s.nu)?;
            let l = linalg::cholesky(&m)?;
            let undress = sampling::dressing_matrix(&l, s.dyson)
                .try_inverse()
                .ok_or_else(|| Error::numeric("Cholesky factor not invertible"))?;
            let mut bare = s.clone();
            bare.w = &s.w * undress;
            return log_density(base, &bare);
        }
    };
    if value.is_nan() || value == f64::INFINITY {
        return Err(Error::numeric(format!(
            "log-density of {} is {value} at tr W†W = {}",
            spec.name(),
            s.trace_norm()
        )));
    }
    Ok(value)
}
