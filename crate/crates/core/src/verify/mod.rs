//! Oracle harness: calibration, comparisons between ordinary-space Monte
//! Carlo, superspace quadrature and independent reference values, and the
//! algebraic identity suite.
//!
//! Each scenario produces a [`ComparisonReport`] made of individual
//! [`Check`]s. Deterministic checks pass when the deviation is within a
//! tolerance; stochastic checks when the complex z-score is within the σ
//! threshold.

mod identities;
pub mod oracles;
mod scenarios;

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyson::DysonIndex;
use crate::error::{Error, Result};
use crate::sources::SourcePack;
use crate::superspace::{z_super, Coset, QuadConfig, SuperWeight};

pub use identities::{
    berezin_conventions, cauchy_instance, duality_deviation, identity_suite, sdet_multiplicativity,
    supertrace_cyclicity,
};
pub use scenarios::{run_scenario, ScenarioConfig, SCENARIOS};

/// A value produced by one method, with its error estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodValue {
    pub method: String,
    pub value: Complex64,
    pub err: f64,
}

impl MethodValue {
    pub fn new(method: &str, value: Complex64, err: f64) -> Self {
        Self {
            method: method.to_string(),
            value,
            err,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckKind {
    /// Absolute deviation against a tolerance.
    Deterministic { deviation: f64, tol: f64 },
    /// |a − b|/|b| against a tolerance.
    Relative { rel_err: f64, tol: f64 },
    /// |a − b|/√(σa² + σb²) against a threshold.
    Stochastic { z: f64, threshold: f64 },
    /// A yes/no property with a description of what was observed.
    Condition { detail: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub kind: CheckKind,
    pub values: Vec<MethodValue>,
    pub passed: bool,
}

impl Check {
    pub fn deterministic(label: &str, deviation: f64, tol: f64) -> Self {
        Self {
            label: label.to_string(),
            passed: deviation <= tol,
            kind: CheckKind::Deterministic { deviation, tol },
            values: Vec::new(),
        }
    }

    pub fn relative(label: &str, value: Complex64, reference: Complex64, tol: f64) -> Self {
        let rel_err = (value - reference).norm() / reference.norm().max(f64::MIN_POSITIVE);
        Self {
            label: label.to_string(),
            passed: rel_err <= tol,
            kind: CheckKind::Relative { rel_err, tol },
            values: vec![
                MethodValue::new("computed", value, 0.0),
                MethodValue::new("reference", reference, 0.0),
            ],
        }
    }

    pub fn stochastic(label: &str, a: MethodValue, b: MethodValue, threshold: f64) -> Self {
        let s = (a.err * a.err + b.err * b.err).sqrt();
        let z = if s > 0.0 {
            (a.value - b.value).norm() / s
        } else if a.value == b.value {
            0.0
        } else {
            f64::INFINITY
        };
        Self {
            label: label.to_string(),
            passed: z <= threshold,
            kind: CheckKind::Stochastic { z, threshold },
            values: vec![a, b],
        }
    }

    pub fn condition(label: &str, passed: bool, detail: String) -> Self {
        Self {
            label: label.to_string(),
            passed,
            kind: CheckKind::Condition { detail },
            values: Vec::new(),
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self.kind, CheckKind::Stochastic { .. })
    }

    /// One-line summary.
    pub fn summary(&self) -> String {
        let verdict = if self.passed { "ok" } else { "FAILED" };
        let detail = match &self.kind {
            CheckKind::Deterministic { deviation, tol } => format!("deviation {deviation:.2e} (tol {tol:.0e})"),
            CheckKind::Relative { rel_err, tol } => format!("rel err {rel_err:.2e} (tol {tol:.0e})"),
            CheckKind::Stochastic { z, threshold } => format!("|z| = {z:.2} (≤ {threshold})"),
            CheckKind::Condition { detail } => detail.clone(),
        };
        format!("{verdict:>6}  {}: {detail}", self.label)
    }
}

/// Outcome of one scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario: String,
    pub checks: Vec<Check>,
    /// Fraction of stochastic checks that must pass; deterministic checks
    /// must always pass.
    pub stochastic_quorum: f64,
    pub passed: bool,
    pub runtime_s: f64,
    pub seeds: Vec<u64>,
    pub notes: Vec<String>,
}

impl ComparisonReport {
    pub fn new(scenario: &str, checks: Vec<Check>, seeds: Vec<u64>, start: Instant) -> Self {
        let mut r = Self {
            scenario: scenario.to_string(),
            checks,
            stochastic_quorum: 1.0,
            passed: false,
            runtime_s: start.elapsed().as_secs_f64(),
            seeds,
            notes: Vec::new(),
        };
        r.evaluate();
        r
    }

    pub fn with_quorum(mut self, quorum: f64) -> Self {
        self.stochastic_quorum = quorum;
        self.evaluate();
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    fn evaluate(&mut self) {
        let hard_ok = self.checks.iter().filter(|c| !c.is_stochastic()).all(|c| c.passed);
        let stoch: Vec<&Check> = self.checks.iter().filter(|c| c.is_stochastic()).collect();
        let fraction = if stoch.is_empty() {
            1.0
        } else {
            stoch.iter().filter(|c| c.passed).count() as f64 / stoch.len() as f64
        };
        self.passed = hard_ok && fraction >= self.stochastic_quorum;
    }

    /// Fraction of stochastic checks within threshold, if any.
    pub fn stochastic_pass_fraction(&self) -> Option<f64> {
        let stoch: Vec<&Check> = self.checks.iter().filter(|c| c.is_stochastic()).collect();
        (!stoch.is_empty()).then(|| stoch.iter().filter(|c| c.passed).count() as f64 / stoch.len() as f64)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Numeric(format!("report serialization: {e}")))
    }
}

/// Reference value of the reduced partition function from an independent
/// oracle: the Laguerre recurrence for the Gaussian (0|1) case, exactly 1 at
/// the supersymmetric point, eigenvalue-measure quadrature otherwise.
pub fn oracle_z(weight: &SuperWeight, n: usize, nu: usize, src: &SourcePack) -> Result<Complex64> {
    let (k1, k2) = (src.squared1(), src.squared2());
    if !k1.is_empty() && k1 == k2 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    match (weight, k1.len(), k2.len()) {
        (SuperWeight::Gaussian { scale }, 0, 1) => Ok(oracles::laguerre_char_poly(n, nu, *scale, k2[0])),
        _ => oracles::eigenvalue_z(weight, n, nu, src, 1e-13),
    }
}

/// Comparison of a calibrated value with the oracle at one source point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transfer {
    pub kappa1_sq: Vec<Complex64>,
    pub kappa2_sq: Vec<Complex64>,
    pub calibrated: Complex64,
    pub oracle: Complex64,
    pub rel_err: f64,
}

/// Multiplicative constant of the raw coset integral, fixed at a reference
/// source point and checked at other points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub weight: SuperWeight,
    pub n: usize,
    pub nu: usize,
    pub coset: Coset,
    pub constant: Complex64,
    pub transfers: Vec<Transfer>,
    pub max_rel_err: f64,
}

impl Calibration {
    /// Calibrated partition function c·I at a source point of the same coset.
    pub fn apply(&self, src: &SourcePack, cfg: &QuadConfig) -> Result<Complex64> {
        if Coset::from_counts(src.k1(), src.k2())? != self.coset {
            return Err(Error::input("calibration was made for a different coset"));
        }
        let raw = z_super(&self.weight, DysonIndex::Unitary, self.n, self.nu, src, cfg)?.raw;
        Ok(self.constant * raw.value)
    }
}

/// Calibration protocol: c = oracle / I at `reference`, where I is the raw
/// source integral, then c·I compared with the oracle at every `transfer`
/// point. A mismatch beyond `tol` is a calibration failure, which signals a
/// formula error rather than a normalization issue.
pub fn calibrate(
    weight: &SuperWeight,
    n: usize,
    nu: usize,
    reference: &SourcePack,
    transfer: &[SourcePack],
    tol: f64,
    cfg: &QuadConfig,
) -> Result<Calibration> {
    let coset = Coset::from_counts(reference.k1(), reference.k2())?;
    let raw = z_super(weight, DysonIndex::Unitary, n, nu, reference, cfg)?.raw.value;
    if raw.norm() == 0.0 {
        return Err(Error::numeric("raw integral vanishes at the calibration point"));
    }
    let mut cal = Calibration {
        weight: weight.clone(),
        n,
        nu,
        coset,
        constant: oracle_z(weight, n, nu, reference)? / raw,
        transfers: Vec::new(),
        max_rel_err: 0.0,
    };
    for src in transfer {
        let calibrated = cal.apply(src, cfg)?;
        let oracle = oracle_z(weight, n, nu, src)?;
        let rel_err = (calibrated - oracle).norm() / oracle.norm().max(f64::MIN_POSITIVE);
        cal.max_rel_err = cal.max_rel_err.max(rel_err);
        cal.transfers.push(Transfer {
            kappa1_sq: src.squared1(),
            kappa2_sq: src.squared2(),
            calibrated,
            oracle,
            rel_err,
        });
    }
    if cal.max_rel_err > tol {
        return Err(Error::Calibration(format!(
            "constant fixed at the reference misses the oracle elsewhere by {:.2e} (tol {tol:.0e})",
            cal.max_rel_err
        )));
    }
    Ok(cal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::RadialWeight;

    fn cz(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fermionic(k: Complex64) -> SourcePack {
        SourcePack::from_squared(&[], &[k]).unwrap()
    }

    #[test]
    fn gaussian_fermionic_calibration_transfers() {
        let w = SuperWeight::Gaussian { scale: 2.0 };
        let others: Vec<SourcePack> = [cz(2.0, 0.0), cz(1.0, 1.0), cz(-0.5, 2.0)].map(fermionic).to_vec();
        let cal = calibrate(&w, 2, 1, &fermionic(cz(0.0, 0.0)), &others, 1e-9, &QuadConfig::default()).unwrap();
        assert_eq!(cal.transfers.len(), 3);
        assert!(cal.max_rel_err < 1e-9);
    }

    #[test]
    fn single_entry_examples() {
        let cfg = QuadConfig::default();
        let w = SuperWeight::Gaussian { scale: 1.0 };
        // monic E[x] − 0 = 1
        let cal = calibrate(&w, 1, 0, &fermionic(cz(0.0, 0.0)), &[], 1e-9, &cfg).unwrap();
        assert!((cal.apply(&fermionic(cz(0.0, 0.0)), &cfg).unwrap() - 1.0).norm() < 1e-12);
        // ∫e^{−x}/(x−i)dx at κ² = i
        let b = |k: Complex64| SourcePack::from_squared(&[k], &[]).unwrap();
        let cal = calibrate(&w, 1, 0, &b(cz(0.0, 1.0)), &[b(cz(0.5, -1.0)), b(cz(-2.0, 0.1))], 1e-8, &cfg).unwrap();
        assert!(cal.max_rel_err < 1e-8);
        // supersymmetric point
        let m = |a: Complex64, b: Complex64| SourcePack::from_squared(&[a], &[b]).unwrap();
        let cal = calibrate(&w, 1, 0, &m(cz(0.3, 0.4), cz(0.3, 0.4)), &[m(cz(0.3, 0.4), cz(1.0, 0.5))], 1e-8, &cfg).unwrap();
        assert!(cal.max_rel_err < 1e-8);
    }

    #[test]
    fn calibration_detects_wrong_weight() {
        // a constant fixed for one weight cannot fit the oracle of another
        let cfg = QuadConfig::default();
        let wrong = SuperWeight::NormDependent {
            p: RadialWeight::Exponential { rate: 3.0 },
        };
        let mut cal = calibrate(&SuperWeight::Gaussian { scale: 3.0 }, 3, 0, &fermionic(cz(0.0, 0.0)), &[], 1e-9, &cfg).unwrap();
        cal.weight = SuperWeight::Gaussian { scale: 2.0 };
        let off = cal.apply(&fermionic(cz(1.0, 1.0)), &cfg).unwrap();
        let truth = oracle_z(&SuperWeight::Gaussian { scale: 3.0 }, 3, 0, &fermionic(cz(1.0, 1.0))).unwrap();
        assert!((off - truth).norm() > 1e-3);
        assert!(matches!(
            calibrate(&wrong, 3, 0, &fermionic(cz(0.0, 0.0)), &[fermionic(cz(1.0, 1.0))], 1e-9, &cfg),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn report_round_trips_through_json() {
        let r = ComparisonReport::new(
            "demo",
            vec![
                Check::relative("a", cz(1.0, 0.0), cz(1.0, 1e-12), 1e-9),
                Check::stochastic(
                    "b",
                    MethodValue::new("mc", cz(1.0, 0.0), 0.1),
                    MethodValue::new("quad", cz(1.5, 0.0), 0.0),
                    3.0,
                ),
                Check::stochastic(
                    "c",
                    MethodValue::new("mc", cz(1.0, 0.0), 0.1),
                    MethodValue::new("quad", cz(1.1, 0.0), 0.0),
                    3.0,
                ),
            ],
            vec![3],
            Instant::now(),
        );
        assert!(!r.passed);
        let r = r.with_quorum(0.5);
        assert!(r.passed);
        let back: ComparisonReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
