//! Monte Carlo estimates of characteristic-polynomial ratios in ordinary
//! matrix space, plus spectral histograms.
//!
//! Samples are drawn in fixed-size chunks; chunk `k` uses the ChaCha stream
//! `k` of the run seed, and chunk accumulators are merged in chunk order.
//! Results are therefore identical for any number of worker threads.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyson::DysonIndex;
use crate::ensembles::{
    autocorrelation_time, log_density, sample_direct, Chain, ChainConfig, ChiralSample, EnsembleSpec,
};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, LogDet};
use crate::sources::SourcePack;

/// ∏ det(Hχ − κ2) / ∏ det(Hχ − κ1) over the full chiral matrix.
pub fn char_ratio(s: &ChiralSample, src: &SourcePack) -> Result<Complex64> {
    let h = s.chiral_matrix();
    let d = h.nrows();
    let mut acc = LogDet::one();
    for k in &src.kappa2 {
        acc = acc.mul(linalg::log_det(&(&h - linalg::identity(d) * *k))?);
    }
    for k in &src.kappa1 {
        acc = acc.div(linalg::log_det(&(&h - linalg::identity(d) * *k))?);
    }
    Ok(acc.value())
}

/// ∏ det(WW† − κ2²) / ∏ det(WW† − κ1²), the reduced ratio.
pub fn char_ratio_squared(s: &ChiralSample, src: &SourcePack) -> Result<Complex64> {
    Ok(reduced_log_ratio(&s.wishart(), src)?.value())
}

fn reduced_log_ratio(ww: &CMatrix, src: &SourcePack) -> Result<LogDet> {
    let d = ww.nrows();
    let mut acc = LogDet::one();
    for k in src.squared2() {
        acc = acc.mul(linalg::log_det(&(ww - linalg::identity(d) * k))?);
    }
    for k in src.squared1() {
        acc = acc.div(linalg::log_det(&(ww - linalg::identity(d) * k))?);
    }
    Ok(acc)
}

/// Factor relating the two forms: char_ratio = prefactor · char_ratio_squared,
/// with prefactor (−1)^{γ(n+ν)(k2−k1)} (∏κ2 / ∏κ1)^{γν}.
pub fn chiral_prefactor(dyson: DysonIndex, n: usize, nu: usize, src: &SourcePack) -> Complex64 {
    let g = dyson.gamma();
    let dk = src.k2() as i64 - src.k1() as i64;
    let sign = if (g as i64 * (n + nu) as i64 * dk).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    };
    let ratio: Complex64 = src.kappa2.iter().product::<Complex64>() / src.kappa1.iter().product::<Complex64>();
    ratio.powu((g * nu) as u32) * sign
}

/// Streaming mean and variance of complex samples (Welford), mergeable
/// with the pairwise formula of Chan et al.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Welford {
    pub count: u64,
    pub mean: Complex64,
    pub m2_re: f64,
    pub m2_im: f64,
}

impl Welford {
    pub fn push(&mut self, z: Complex64) {
        self.count += 1;
        let d = z - self.mean;
        self.mean += d / self.count as f64;
        let d2 = z - self.mean;
        self.m2_re += d.re * d2.re;
        self.m2_im += d.im * d2.im;
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let n = self.count + other.count;
        let d = other.mean - self.mean;
        let fa = self.count as f64;
        let fb = other.count as f64;
        let w = fa * fb / n as f64;
        Self {
            count: n,
            mean: self.mean + d * (fb / n as f64),
            m2_re: self.m2_re + other.m2_re + d.re * d.re * w,
            m2_im: self.m2_im + other.m2_im + d.im * d.im * w,
        }
    }

    pub fn var_re(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2_re / (self.count - 1) as f64
        }
    }

    pub fn var_im(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2_im / (self.count - 1) as f64
        }
    }
}

/// Complex Monte Carlo result. `stderr` is the standard error of the
/// complex mean, √((var_re + var_im)/ess).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: Complex64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub ess: f64,
    pub var_re: f64,
    pub var_im: f64,
    /// False when the effective sample size is below 100.
    pub reliable: bool,
    /// Samples dropped because a determinant was singular.
    pub rejected: u64,
}

/// Minimum effective sample size for a reliable estimate.
pub const MIN_ESS: f64 = 100.0;

impl MCEstimate {
    fn from_welford(w: &Welford, ess: f64, seed: u64, rejected: u64) -> Self {
        let (vr, vi) = (w.var_re(), w.var_im());
        Self {
            mean: w.mean,
            stderr: ((vr + vi) / ess.max(1.0)).sqrt(),
            n_samples: w.count,
            seed,
            ess,
            var_re: vr,
            var_im: vi,
            reliable: ess >= MIN_ESS,
            rejected,
        }
    }

    fn welford(&self) -> Welford {
        let m = self.n_samples.saturating_sub(1) as f64;
        Welford {
            count: self.n_samples,
            mean: self.mean,
            m2_re: self.var_re * m,
            m2_im: self.var_im * m,
        }
    }

    /// Pools two independent estimates of the same quantity.
    pub fn merge(&self, other: &Self) -> Self {
        let w = self.welford().merge(&other.welford());
        let mut out = Self::from_welford(&w, self.ess + other.ess, self.seed, self.rejected + other.rejected);
        if self.ess != self.n_samples as f64 || other.ess != other.n_samples as f64 {
            out.stderr = ((w.var_re() + w.var_im()) / out.ess.max(1.0)).sqrt();
        }
        out
    }

    /// Complex z-score |mean − reference| / √(stderr² + ref_err²).
    pub fn z_score(&self, reference: Complex64, ref_err: f64) -> f64 {
        let s = (self.stderr * self.stderr + ref_err * ref_err).sqrt();
        (self.mean - reference).norm() / s
    }
}

/// Sampling settings shared by all estimators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McConfig {
    pub n_samples: u64,
    pub seed: u64,
    /// Samples per RNG stream for direct sampling.
    pub chunk_size: u64,
    /// Independent chains for weights without a direct sampler.
    pub chains: usize,
    pub chain: ChainConfig,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            seed: 1,
            chunk_size: 2048,
            chains: 8,
            chain: ChainConfig::default(),
        }
    }
}

fn chunk_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn chunk_sizes(total: u64, chunk: u64) -> Vec<u64> {
    let chunk = chunk.max(1);
    let full = total / chunk;
    let mut v = vec![chunk; full as usize];
    if total % chunk != 0 {
        v.push(total % chunk);
    }
    v
}

/// Runs `observable` on direct samples, chunk by chunk.
fn direct_chunks<F>(
    spec: &EnsembleSpec,
    dyson: DysonIndex,
    n: usize,
    nu: usize,
    cfg: &McConfig,
    observable: F,
) -> Result<Vec<(Welford, u64)>>
where
    F: Fn(&ChiralSample) -> Result<Complex64> + Sync,
{
    chunk_sizes(cfg.n_samples, cfg.chunk_size)
        .into_par_iter()
        .enumerate()
        .map(|(k, size)| {
            let mut rng = chunk_rng(cfg.seed, k as u64);
            let mut acc = Welford::default();
            let mut rejected = 0;
            for _ in 0..size {
                let s = sample_direct(spec, dyson, n, nu, &mut rng)?;
                match observable(&s) {
                    Ok(v) => acc.push(v),
                    Err(Error::Singular(_)) => rejected += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok((acc, rejected))
        })
        .collect()
}

/// Runs `observable` along independent chains; returns per-chain series.
fn chain_series<F>(
    spec: &EnsembleSpec,
    dyson: DysonIndex,
    n: usize,
    nu: usize,
    cfg: &McConfig,
    observable: F,
) -> Result<Vec<(Vec<Complex64>, u64)>>
where
    F: Fn(&ChiralSample) -> Result<Complex64> + Sync,
{
    let chains = cfg.chains.max(1) as u64;
    (0..chains)
        .into_par_iter()
        .map(|c| {
            let len = cfg.n_samples / chains + u64::from(c < cfg.n_samples % chains);
            let mut chain = Chain::new(spec, dyson, n, nu, &cfg.chain, chunk_rng(cfg.seed, c))?;
            let mut series = Vec::with_capacity(len as usize);
            let mut rejected = 0;
            for _ in 0..len {
                let s = chain.next_sample()?;
                match observable(&s) {
                    Ok(v) => series.push(v),
                    Err(Error::Singular(_)) => rejected += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok((series, rejected))
        })
        .collect()
}

fn series_ess(series: &[Complex64]) -> f64 {
    let re: Vec<f64> = series.iter().map(|z| z.re).collect();
    let im: Vec<f64> = series.iter().map(|z| z.im).collect();
    let tau = autocorrelation_time(&re).max(autocorrelation_time(&im));
    series.len() as f64 / tau
}

/// Average of an arbitrary per-sample observable under `spec`, using direct
/// sampling when available and independent Metropolis chains otherwise.
pub fn estimate_observable<F>(
    spec: &EnsembleSpec,
    dyson: DysonIndex,
    n: usize,
    nu: usize,
    cfg: &McConfig,
    observable: F,
) -> Result<MCEstimate>
where
    F: Fn(&ChiralSample) -> Result<Complex64> + Sync,
{
    spec.validate(dyson, n, nu)?;
    if cfg.n_samples < 2 {
        return Err(Error::input("at least two samples are needed"));
    }
    if spec.has_direct_sampler() {
        let chunks = direct_chunks(spec, dyson, n, nu, cfg, observable)?;
        let (acc, rejected) = chunks
            .iter()
            .fold((Welford::default(), 0), |(a, r), (w, k)| (a.merge(w), r + k));
        Ok(MCEstimate::from_welford(&acc, acc.count as f64, cfg.seed, rejected))
    } else {
        let runs = chain_series(spec, dyson, n, nu, cfg, observable)?;
        let mut acc = Welford::default();
        let mut ess = 0.0;
        let mut rejected = 0;
        for (series, r) in &runs {
            let mut w = Welford::default();
            series.iter().for_each(|z| w.push(*z));
            acc = acc.merge(&w);
            ess += series_ess(series);
            rejected += r;
        }
        Ok(MCEstimate::from_welford(&acc, ess, cfg.seed, rejected))
    }
}

/// Monte Carlo estimate of the reduced partition function
/// E[∏ det(WW† − κ2²) / ∏ det(WW† − κ1²)].
pub fn estimate_z(
    spec: &EnsembleSpec,
    dyson: DysonIndex,
    n: usize,
    nu: usize,
    src: &SourcePack,
    cfg: &McConfig,
) -> Result<MCEstimate> {
    spec.check_convergence(dyson, n, nu, src.k1(), src.k2())?;
    estimate_observable(spec, dyson, n, nu, cfg, |s| char_ratio_squared(s, src))
}

/// [`estimate_z`] for the base weight with columns of W correlated by C.
pub fn estimate_z_correlated(
    base: &EnsembleSpec,
    c: &[Vec<f64>],
    dyson: DysonIndex,
    n: usize,
    nu: usize,
    src: &SourcePack,
    cfg: &McConfig,
) -> Result<MCEstimate> {
    let spec = EnsembleSpec::Correlated {
        base: Box::new(base.clone()),
        c: c.to_vec(),
    };
    estimate_z(&spec, dyson, n, nu, src, cfg)
}

/// ln ∏_j det(W†W + m_j²) − Σ_j dim·ln m_j², scaled so that heavy masses do
/// not overflow.
fn log_mass_factor(s: &ChiralSample, masses: &[f64]) -> Result<LogDet> {
    let wd = s.wishart_dual();
    let d = wd.nrows();
    let mut acc = LogDet::one();
    for m in masses {
        let m2 = m * m;
        let ld = linalg::log_det(&(&wd + linalg::identity(d) * Complex64::new(m2, 0.0)))?;
        acc = acc.mul(LogDet {
            ln_abs: ld.ln_abs - d as f64 * m2.ln(),
            phase: ld.phase,
        });
    }
    Ok(acc)
}

/// Partially quenched estimate
/// E[ratio · ∏ det(W†W + m²)] / E[∏ det(W†W + m²)] under the Gaussian weight.
///
/// Numerator and denominator share samples; the ratio of means is biased at
/// O(1/N) but consistent, and its error bar comes from a delete-one-chunk
/// jackknife.
pub fn estimate_z_unquenched(
    masses: &[f64],
    dyson: DysonIndex,
    n: usize,
    nu: usize,
    src: &SourcePack,
    cfg: &McConfig,
) -> Result<MCEstimate> {
    if masses.is_empty() || masses.iter().any(|m| *m <= 0.0 || !m.is_finite()) {
        return Err(Error::input("at least one positive mass is required"));
    }
    let spec = EnsembleSpec::gaussian();
    let sizes = chunk_sizes(cfg.n_samples, cfg.chunk_size);
    if sizes.len() < 2 {
        return Err(Error::input("the jackknife needs at least two chunks"));
    }
    let sums: Vec<(Complex64, Complex64, u64, u64)> = sizes
        .into_par_iter()
        .enumerate()
        .map(|(k, size)| {
            let mut rng = chunk_rng(cfg.seed, k as u64);
            let (mut num, mut den) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            let (mut used, mut rejected) = (0, 0);
            for _ in 0..size {
                let s = sample_direct(&spec, dyson, n, nu, &mut rng)?;
                let mass = log_mass_factor(&s, masses)?;
                match reduced_log_ratio(&s.wishart(), src) {
                    Ok(r) => {
                        num += r.mul(mass).value();
                        den += mass.value();
                        used += 1;
                    }
                    Err(Error::Singular(_)) => rejected += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok((num, den, used, rejected))
        })
        .collect::<Result<_>>()?;
    let total_num: Complex64 = sums.iter().map(|s| s.0).sum();
    let total_den: Complex64 = sums.iter().map(|s| s.1).sum();
    let used: u64 = sums.iter().map(|s| s.2).sum();
    let rejected: u64 = sums.iter().map(|s| s.3).sum();
    let mean = total_num / total_den;
    let g = sums.len() as f64;
    let leave_out: Vec<Complex64> = sums
        .iter()
        .map(|s| (total_num - s.0) / (total_den - s.1))
        .collect();
    let bar: Complex64 = leave_out.iter().sum::<Complex64>() / g;
    let var_re = (g - 1.0) / g * leave_out.iter().map(|t| (t.re - bar.re).powi(2)).sum::<f64>();
    let var_im = (g - 1.0) / g * leave_out.iter().map(|t| (t.im - bar.im).powi(2)).sum::<f64>();
    let stderr = (var_re + var_im).sqrt();
    let nf = used as f64;
    Ok(MCEstimate {
        mean,
        stderr,
        n_samples: used,
        seed: cfg.seed,
        ess: nf,
        var_re: var_re * nf,
        var_im: var_im * nf,
        reliable: nf >= MIN_ESS,
        rejected,
    })
}

/// Which spectrum a histogram is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    /// Eigenvalues of WW† (γn per sample).
    Wishart,
    /// Non-zero eigenvalues of Hχ; the γν exact zero modes are counted
    /// separately.
    Chiral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramConfig {
    pub bins: usize,
    /// Histogram range; `None` takes the sampled extremes.
    pub range: Option<(f64, f64)>,
    pub kind: SpectrumKind,
    /// Multiply eigenvalues by n (chiral) or n² (Wishart).
    pub microscopic: bool,
}

/// Normalized eigenvalue histogram.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// counts / (in-range total · bin width), integrating to one.
    pub density: Vec<f64>,
    pub zero_modes: u64,
    pub out_of_range: u64,
    pub n_matrices: u64,
    /// All collected eigenvalues, sorted (useful for distribution tests).
    pub eigenvalues: Vec<f64>,
}

/// Collects eigenvalues over `cfg.n_samples` matrices and bins them.
pub fn spectral_density(
    spec: &EnsembleSpec,
    dyson: DysonIndex,
    n: usize,
    nu: usize,
    cfg: &McConfig,
    hist: &HistogramConfig,
) -> Result<Histogram> {
    spec.validate(dyson, n, nu)?;
    if hist.bins == 0 {
        return Err(Error::input("need at least one bin"));
    }
    let collect = |s: &ChiralSample| -> (Vec<f64>, u64) {
        match hist.kind {
            SpectrumKind::Wishart => {
                let scale = if hist.microscopic { (n * n) as f64 } else { 1.0 };
                (linalg::hermitian_eigenvalues(&s.wishart()).iter().map(|x| x * scale).collect(), 0)
            }
            SpectrumKind::Chiral => {
                let scale = if hist.microscopic { n as f64 } else { 1.0 };
                let mut ev = linalg::hermitian_eigenvalues(&s.chiral_matrix());
                let zeros = dyson.gamma() * nu;
                // the γν eigenvalues closest to zero are the zero modes
                ev.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
                let rest = ev.split_off(zeros);
                (rest.iter().map(|x| x * scale).collect(), zeros as u64)
            }
        }
    };
    let mut values = Vec::new();
    let mut zero_modes = 0;
    if spec.has_direct_sampler() {
        for (k, size) in chunk_sizes(cfg.n_samples, cfg.chunk_size).into_iter().enumerate() {
            let mut rng = chunk_rng(cfg.seed, k as u64);
            for _ in 0..size {
                let (v, z) = collect(&sample_direct(spec, dyson, n, nu, &mut rng)?);
                values.extend(v);
                zero_modes += z;
            }
        }
    } else {
        let chains = cfg.chains.max(1) as u64;
        for c in 0..chains {
            let len = cfg.n_samples / chains + u64::from(c < cfg.n_samples % chains);
            let mut chain = Chain::new(spec, dyson, n, nu, &cfg.chain, chunk_rng(cfg.seed, c))?;
            for _ in 0..len {
                let s = chain.next_sample()?;
                log_density(spec, &s)?;
                let (v, z) = collect(&s);
                values.extend(v);
                zero_modes += z;
            }
        }
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let (lo, hi) = match hist.range {
        Some(r) => r,
        None => {
            let lo = *values.first().unwrap_or(&0.0);
            let hi = *values.last().unwrap_or(&1.0);
            (lo, if hi > lo { hi * (1.0 + 1e-12) + 1e-300 } else { lo + 1.0 })
        }
    };
    if !(hi > lo) {
        return Err(Error::input("histogram range is empty"));
    }
    let width = (hi - lo) / hist.bins as f64;
    let mut counts = vec![0u64; hist.bins];
    let mut out_of_range = 0;
    for &v in &values {
        if v < lo || v >= hi {
            out_of_range += 1;
            continue;
        }
        let b = (((v - lo) / width) as usize).min(hist.bins - 1);
        counts[b] += 1;
    }
    let inside: u64 = counts.iter().sum();
    let density = counts
        .iter()
        .map(|&c| if inside == 0 { 0.0 } else { c as f64 / (inside as f64 * width) })
        .collect();
    Ok(Histogram {
        edges: (0..=hist.bins).map(|i| lo + i as f64 * width).collect(),
        counts,
        density,
        zero_modes,
        out_of_range,
        n_matrices: cfg.n_samples,
        eigenvalues: values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::sample_gaussian;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn empty_sources_give_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = sample_gaussian(DysonIndex::Unitary, 3, 1, 3.0, &mut rng);
        let r = char_ratio(&s, &SourcePack::empty()).unwrap();
        assert!((r - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn scalar_chiral_determinant() {
        let w = CMatrix::from_element(1, 1, c(0.6, -0.8));
        let s = ChiralSample::new(DysonIndex::Unitary, 1, 0, w).unwrap();
        let y = 1.7;
        let src = SourcePack::new(vec![], vec![c(0.0, y)]).unwrap();
        let r = char_ratio(&s, &src).unwrap();
        assert!((r - c(-(y * y + 1.0), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn two_forms_agree_per_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let src = SourcePack::new(vec![c(0.3, 0.9)], vec![c(-0.2, 0.5), c(1.1, 0.0)]).unwrap();
        for _ in 0..100 {
            let s = sample_gaussian(DysonIndex::Unitary, 3, 1, 3.0, &mut rng);
            let a = char_ratio(&s, &src).unwrap();
            let b = chiral_prefactor(DysonIndex::Unitary, 3, 1, &src) * char_ratio_squared(&s, &src).unwrap();
            assert!((a - b).norm() < 1e-10 * a.norm().max(1.0));
        }
    }

    #[test]
    fn welford_merge_is_exact_split() {
        let data: Vec<Complex64> = (0..100).map(|i| c((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let mut whole = Welford::default();
        data.iter().for_each(|z| whole.push(*z));
        let (mut a, mut b) = (Welford::default(), Welford::default());
        data[..37].iter().for_each(|z| a.push(*z));
        data[37..].iter().for_each(|z| b.push(*z));
        let m = a.merge(&b);
        assert!((m.mean - whole.mean).norm() < 1e-14);
        assert!((m.m2_re - whole.m2_re).abs() < 1e-12);
        assert!((m.m2_im - whole.m2_im).abs() < 1e-12);
    }

    #[test]
    fn supersymmetric_ratio_cancels() {
        let k = SourcePack::from_squared(&[c(0.4, 1.0)], &[c(0.4, 1.0)]).unwrap();
        let cfg = McConfig {
            n_samples: 500,
            ..McConfig::default()
        };
        let e = estimate_z(&EnsembleSpec::gaussian(), DysonIndex::Unitary, 2, 1, &k, &cfg).unwrap();
        assert!((e.mean - c(1.0, 0.0)).norm() < 1e-12);
        assert!(e.stderr < 1e-12);
    }

    #[test]
    fn exponential_moment_example() {
        let src = SourcePack::from_squared(&[], &[c(0.0, 2.0)]).unwrap();
        let cfg = McConfig {
            n_samples: 20_000,
            seed: 3,
            ..McConfig::default()
        };
        let e = estimate_z(&EnsembleSpec::gaussian(), DysonIndex::Unitary, 1, 0, &src, &cfg).unwrap();
        assert!(e.z_score(c(1.0, -2.0), 0.0) < 3.0, "{e:?}");
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let src = SourcePack::from_squared(&[c(0.5, 1.0)], &[]).unwrap();
        let cfg = McConfig {
            n_samples: 5000,
            seed: 17,
            chunk_size: 512,
            ..McConfig::default()
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_z(&EnsembleSpec::gaussian(), DysonIndex::Unitary, 2, 0, &src, &cfg).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn conjugate_sources_conjugate_estimate() {
        let src = SourcePack::from_squared(&[c(0.5, 1.0)], &[c(-1.0, 0.3)]).unwrap();
        let cfg = McConfig {
            n_samples: 3000,
            ..McConfig::default()
        };
        let a = estimate_z(&EnsembleSpec::gaussian(), DysonIndex::Unitary, 2, 1, &src, &cfg).unwrap();
        let b = estimate_z(&EnsembleSpec::gaussian(), DysonIndex::Unitary, 2, 1, &src.conj(), &cfg).unwrap();
        assert!((a.mean - b.mean.conj()).norm() < 1e-12);
    }

    #[test]
    fn unquenched_trivial_normalization() {
        let cfg = McConfig {
            n_samples: 4096,
            chunk_size: 1024,
            ..McConfig::default()
        };
        let e = estimate_z_unquenched(&[0.7], DysonIndex::Unitary, 1, 0, &SourcePack::empty(), &cfg).unwrap();
        assert!((e.mean - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn histogram_normalization_and_zero_modes() {
        let cfg = McConfig {
            n_samples: 200,
            ..McConfig::default()
        };
        let h = spectral_density(
            &EnsembleSpec::gaussian(),
            DysonIndex::Unitary,
            4,
            2,
            &cfg,
            &HistogramConfig {
                bins: 30,
                range: None,
                kind: SpectrumKind::Chiral,
                microscopic: false,
            },
        )
        .unwrap();
        assert_eq!(h.zero_modes, 2 * 200);
        let w = h.edges[1] - h.edges[0];
        let total: f64 = h.density.iter().map(|d| d * w).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(h.out_of_range, 0);
    }
}
