use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::sampling::{apply_correlation, coordinate_sd, gaussian_matrix};
use super::{correlation_matrix, log_density, ChiralSample, EnsembleSpec};
use crate::dyson::DysonIndex;
use crate::error::{Error, Result};

/// Settings of the random-walk Metropolis chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    /// Sweeps discarded at the start, during which the step size adapts.
    pub burn_in: usize,
    /// Sweeps after burn-in used to measure the autocorrelation time.
    pub pilot: usize,
    /// Fixed thinning; `None` uses ⌈τ⌉ from the pilot run.
    pub thinning: Option<usize>,
    pub target_acceptance: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            burn_in: 5000,
            pilot: 2000,
            thinning: None,
            target_acceptance: 0.35,
        }
    }
}

/// Integrated autocorrelation time τ = 1 + 2 Σ ρ(t) with Sokal's automatic
/// window (smallest M with M ≥ 5 τ(M)).
pub fn autocorrelation_time(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return 1.0;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0 = centered.iter().map(|x| x * x).sum::<f64>() / n as f64;
    // a constant series (up to rounding of the mean) has no correlation
    if c0 <= (1e-12 * mean.abs()).powi(2) {
        return 1.0;
    }
    let mut tau = 1.0;
    for lag in 1..n / 2 {
        let c: f64 = centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64;
        tau += 2.0 * c / c0;
        if lag as f64 >= 5.0 * tau {
            break;
        }
    }
    tau.max(1.0)
}

/// Metropolis chain with single-coordinate Gaussian proposals on the real
/// coordinates of W.
pub struct Chain<R: Rng> {
    spec: EnsembleSpec,
    dressing: Option<DMatrix<f64>>,
    current: ChiralSample,
    logp: f64,
    step: f64,
    thinning: usize,
    pilot_tau: f64,
    accepted: u64,
    proposed: u64,
    rng: R,
}

fn num_coords(dyson: DysonIndex, n: usize, nu: usize) -> usize {
    dyson.beta() as usize * n * (n + nu)
}

fn read_coord(s: &ChiralSample, k: usize) -> f64 {
    let cols = s.n + s.nu;
    match s.dyson {
        DysonIndex::Orthogonal => s.w[(k / cols, k % cols)].re,
        DysonIndex::Unitary => {
            let z = s.w[((k / 2) / cols, (k / 2) % cols)];
            if k % 2 == 0 {
                z.re
            } else {
                z.im
            }
        }
        DysonIndex::Symplectic => {
            let e = k / 4;
            let (i, j) = (2 * (e / cols), 2 * (e % cols));
            let a = s.w[(i, j)];
            let b = s.w[(i, j + 1)];
            [a.re, b.im, b.re, a.im][k % 4]
        }
    }
}

fn write_coord(s: &mut ChiralSample, k: usize, v: f64) {
    let cols = s.n + s.nu;
    match s.dyson {
        DysonIndex::Orthogonal => s.w[(k / cols, k % cols)] = Complex64::new(v, 0.0),
        DysonIndex::Unitary => {
            let z = &mut s.w[((k / 2) / cols, (k / 2) % cols)];
            if k % 2 == 0 {
                z.re = v
            } else {
                z.im = v
            }
        }
        DysonIndex::Symplectic => {
            let e = k / 4;
            let (i, j) = (2 * (e / cols), 2 * (e % cols));
            let mut q = [s.w[(i, j)].re, s.w[(i, j + 1)].im, s.w[(i, j + 1)].re, s.w[(i, j)].im];
            q[k % 4] = v;
            let a = Complex64::new(q[0], q[3]);
            let b = Complex64::new(q[2], q[1]);
            s.w[(i, j)] = a;
            s.w[(i, j + 1)] = b;
            s.w[(i + 1, j)] = -b.conj();
            s.w[(i + 1, j + 1)] = a.conj();
        }
    }
}

impl<R: Rng> Chain<R> {
    /// Starts a chain at a Gaussian draw, runs burn-in with Robbins–Monro
    /// adaptation of the log step size, then a pilot run that fixes the
    /// thinning.
    pub fn new(
        spec: &EnsembleSpec,
        dyson: DysonIndex,
        n: usize,
        nu: usize,
        cfg: &ChainConfig,
        mut rng: R,
    ) -> Result<Self> {
        spec.validate(dyson, n, nu)?;
        let (target, dressing) = match spec {
            EnsembleSpec::Correlated { base, c } => ((**base).clone(), Some(correlation_matrix(c, n + nu)?)),
            EnsembleSpec::FixedTrace { .. } => {
                return Err(Error::Capability(
                    "the fixed-trace weight is sampled by projection, not by a chain".into(),
                ))
            }
            other => (other.clone(), None),
        };
        let sd = coordinate_sd(dyson, n as f64);
        let w = gaussian_matrix(dyson, n, nu, sd, &mut rng);
        let current = ChiralSample::new(dyson, n, nu, w)?;
        let logp = log_density(&target, &current)?;
        if !logp.is_finite() {
            return Err(Error::Sampler("initial point outside the support".into()));
        }
        let mut chain = Self {
            spec: target,
            dressing,
            current,
            logp,
            step: sd,
            thinning: 1,
            pilot_tau: 1.0,
            accepted: 0,
            proposed: 0,
            rng,
        };
        let mut ln_step = sd.ln();
        let mut recent = (0u64, 0u64);
        let tail = (cfg.burn_in / 10).max(1);
        for t in 0..cfg.burn_in {
            let (acc, prop) = chain.sweep()?;
            let rate = acc as f64 / prop as f64;
            ln_step += (rate - cfg.target_acceptance) / (1.0 + t as f64).powf(0.6);
            chain.step = ln_step.exp();
            if t + tail >= cfg.burn_in {
                recent.0 += acc;
                recent.1 += prop;
            }
        }
        if cfg.burn_in > 0 && (recent.0 as f64) < 0.01 * recent.1 as f64 {
            return Err(Error::Sampler(format!(
                "acceptance {:.4} after adaptation, step {:.3e}",
                recent.0 as f64 / recent.1 as f64,
                chain.step
            )));
        }
        chain.accepted = 0;
        chain.proposed = 0;
        let mut trace = Vec::with_capacity(cfg.pilot);
        for _ in 0..cfg.pilot {
            chain.sweep()?;
            trace.push(chain.current.trace_norm());
        }
        chain.pilot_tau = autocorrelation_time(&trace);
        chain.thinning = cfg.thinning.unwrap_or(chain.pilot_tau.ceil() as usize).max(1);
        Ok(chain)
    }

    /// One pass of single-coordinate updates; returns (accepted, proposed).
    pub fn sweep(&mut self) -> Result<(u64, u64)> {
        let m = num_coords(self.current.dyson, self.current.n, self.current.nu);
        let mut acc = 0;
        for k in 0..m {
            let old = read_coord(&self.current, k);
            let z: f64 = StandardNormal.sample(&mut self.rng);
            write_coord(&mut self.current, k, old + self.step * z);
            let lp = log_density(&self.spec, &self.current)?;
            let u: f64 = self.rng.random();
            if lp > f64::NEG_INFINITY && u.ln() < lp - self.logp {
                self.logp = lp;
                acc += 1;
            } else {
                write_coord(&mut self.current, k, old);
            }
        }
        // Global dilation W → λW with ln λ ~ N(0, 1/m); the Jacobian λ^m
        // enters the acceptance. Single-coordinate moves alone cross the
        // decades of a heavy-tailed radial distribution very slowly.
        let z: f64 = StandardNormal.sample(&mut self.rng);
        let ln_lambda = z / (m as f64).sqrt();
        let old_w = self.current.w.clone();
        self.current.w *= Complex64::new(ln_lambda.exp(), 0.0);
        let lp = log_density(&self.spec, &self.current)?;
        let u: f64 = self.rng.random();
        if lp > f64::NEG_INFINITY && u.ln() < lp - self.logp + m as f64 * ln_lambda {
            self.logp = lp;
        } else {
            self.current.w = old_w;
        }
        self.accepted += acc;
        self.proposed += m as u64;
        Ok((acc, m as u64))
    }

    /// Advances by the thinning interval and returns the (dressed) state.
    pub fn next_sample(&mut self) -> Result<ChiralSample> {
        for _ in 0..self.thinning {
            self.sweep()?;
        }
        match &self.dressing {
            Some(c) => apply_correlation(&self.current, c),
            None => Ok(self.current.clone()),
        }
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    pub fn step_size(&self) -> f64 {
        self.step
    }

    pub fn thinning(&self) -> usize {
        self.thinning
    }

    /// Autocorrelation time of tr W†W measured in the pilot run, in sweeps.
    pub fn pilot_tau(&self) -> f64 {
        self.pilot_tau
    }
}
