//! The JSON run configuration. Command-line flags override file values; the
//! resolved configuration is written next to every output.

use std::path::{Path, PathBuf};

use chiral_susy::ensembles::EnsembleSpec;
use chiral_susy::ordinary_mc::{HistogramConfig, McConfig, SpectrumKind};
use chiral_susy::superspace::{MicroWeight, QuadConfig};
use chiral_susy::{Complex64, DysonIndex, SourcePack};
use serde::{Deserialize, Serialize};

use crate::complex::{format_complex, Cx};
use crate::error::{CliError, CliResult};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "CHIRAL_SUSY_OUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Sample,
    Ordinary,
    Super,
    Micro,
    Unquenched,
    Density,
    Verify,
}

impl Method {
    pub fn command(self) -> &'static str {
        match self {
            Self::Sample => "sample",
            Self::Ordinary => "z-ordinary",
            Self::Super => "z-super",
            Self::Micro => "z-micro",
            Self::Unquenched => "z-unquenched",
            Self::Density => "density",
            Self::Verify => "verify",
        }
    }
}

/// Linear path of the primary source from `from` to `to`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub from: Cx,
    pub to: Cx,
    pub points: usize,
}

impl Sweep {
    pub fn parse(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [from, to, points] = parts.as_slice() else {
            return Err(format!("sweep {s:?} is not FROM:TO:POINTS"));
        };
        Ok(Self {
            from: Cx(crate::complex::parse_complex(from)?),
            to: Cx(crate::complex::parse_complex(to)?),
            points: points.trim().parse().map_err(|_| format!("bad point count in sweep {s:?}"))?,
        })
    }

    pub fn values(&self) -> Vec<Complex64> {
        if self.points == 1 {
            return vec![self.from.0];
        }
        (0..self.points)
            .map(|k| {
                let t = k as f64 / (self.points - 1) as f64;
                self.from.0 + (self.to.0 - self.from.0) * t
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Super,
    MonteCarlo,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HistogramSettings {
    pub bins: usize,
    pub range: Option<(f64, f64)>,
    pub kind: SpectrumKind,
    pub microscopic: bool,
}

impl Default for HistogramSettings {
    fn default() -> Self {
        Self {
            bins: 40,
            range: None,
            kind: SpectrumKind::Chiral,
            microscopic: false,
        }
    }
}

impl HistogramSettings {
    pub fn to_core(&self) -> HistogramConfig {
        HistogramConfig {
            bins: self.bins,
            range: self.range,
            kind: self.kind,
            microscopic: self.microscopic,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySettings {
    /// "identities" or "all".
    pub suite: Option<String>,
    pub scenarios: Vec<String>,
    pub samples: Option<u64>,
    pub mcmc_samples: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    pub dir: Option<PathBuf>,
    /// File stem of the outputs; defaults to the subcommand name.
    pub name: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub method: Option<Method>,
    pub ensemble: EnsembleSpec,
    pub beta: u8,
    pub n: usize,
    pub nu: usize,
    /// Bosonic sources (denominator).
    pub kappa1: Vec<Cx>,
    /// Fermionic sources (numerator).
    pub kappa2: Vec<Cx>,
    /// Sources are κ itself rather than κ².
    pub chiral_sources: bool,
    pub sweep: Option<Sweep>,
    pub masses: Vec<f64>,
    pub estimator: Estimator,
    pub micro_weight: MicroWeight,
    /// Authoritative seed; copied into `mc.seed`.
    pub seed: u64,
    pub mc: McConfig,
    pub quad: QuadConfig,
    pub histogram: HistogramSettings,
    pub verify: VerifySettings,
    pub output: OutputSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            method: None,
            ensemble: EnsembleSpec::gaussian(),
            beta: 2,
            n: 1,
            nu: 0,
            kappa1: Vec::new(),
            kappa2: Vec::new(),
            chiral_sources: false,
            sweep: None,
            masses: Vec::new(),
            estimator: Estimator::Both,
            micro_weight: MicroWeight::Gaussian,
            seed: 1,
            mc: McConfig::default(),
            quad: QuadConfig::default(),
            histogram: HistogramSettings::default(),
            verify: VerifySettings::default(),
            output: OutputSettings::default(),
        }
    }
}

/// One evaluation point: the displayed primary source and the full pack.
pub struct SourcePoint {
    pub primary: Complex64,
    pub kappa1: Vec<Complex64>,
    pub kappa2: Vec<Complex64>,
}

impl SourcePoint {
    pub fn pack(&self, chiral: bool) -> CliResult<SourcePack> {
        let pack = if chiral {
            SourcePack::new(self.kappa1.clone(), self.kappa2.clone())
        } else {
            SourcePack::from_squared(&self.kappa1, &self.kappa2)
        };
        pack.map_err(|e| CliError::config(format!("sources at {}: {e}", format_complex(self.primary))))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("config {}: {e}", path.display())))
    }

    pub fn dyson(&self) -> CliResult<DysonIndex> {
        DysonIndex::from_beta(self.beta).map_err(|e| CliError::config(e.to_string()))
    }

    /// Claims the config for a subcommand; a file written for another
    /// method is rejected.
    pub fn claim(&mut self, method: Method) -> CliResult<()> {
        match self.method {
            Some(m) if m != method => Err(CliError::config(format!(
                "config is for `{}`, not `{}`",
                m.command(),
                method.command()
            ))),
            _ => {
                self.method = Some(method);
                self.mc.seed = self.seed;
                Ok(())
            }
        }
    }

    /// Checks source counts against the optional explicit counts.
    pub fn check_counts(&self, k1: Option<usize>, k2: Option<usize>) -> CliResult<()> {
        let sweep_fills_k2 = self.sweep.is_some() && self.kappa2.is_empty();
        let sweep_fills_k1 = self.sweep.is_some() && !sweep_fills_k2 && self.kappa1.is_empty();
        let check = |name: &str, want: Option<usize>, have: usize, filled: bool| match want {
            Some(w) if w != have + filled as usize => Err(CliError::config(format!(
                "--{name} {w} but {} source value(s) given",
                have + filled as usize
            ))),
            _ => Ok(()),
        };
        // the sweep fills the primary slot only when that slot is empty and
        // was asked for
        let fills2 = sweep_fills_k2 && k2.unwrap_or(0) > 0;
        let fills1 = !fills2 && sweep_fills_k1 && k1.unwrap_or(0) > 0;
        check("k1", k1, self.kappa1.len(), fills1)?;
        check("k2", k2, self.kappa2.len(), fills2)?;
        if self.sweep.is_some() && !fills1 && !fills2 && self.kappa1.is_empty() && self.kappa2.is_empty() {
            return Err(CliError::config("a sweep needs a source slot; pass --k1 1 or --k2 1"));
        }
        Ok(())
    }

    /// Evaluation points; a sweep replaces (or fills) the first fermionic
    /// source, or the first bosonic one when there is no fermionic source.
    pub fn source_points(&self, k1: Option<usize>, k2: Option<usize>) -> CliResult<Vec<SourcePoint>> {
        self.check_counts(k1, k2)?;
        let base1: Vec<Complex64> = self.kappa1.iter().map(|c| c.0).collect();
        let base2: Vec<Complex64> = self.kappa2.iter().map(|c| c.0).collect();
        let Some(sweep) = &self.sweep else {
            let primary = base2.first().or(base1.first()).copied().unwrap_or_default();
            return Ok(vec![SourcePoint { primary, kappa1: base1, kappa2: base2 }]);
        };
        if sweep.points == 0 {
            return Err(CliError::config("a sweep needs at least one point"));
        }
        let on_fermionic = !base2.is_empty() || k2.unwrap_or(0) > 0;
        Ok(sweep
            .values()
            .into_iter()
            .map(|v| {
                let (mut a, mut b) = (base1.clone(), base2.clone());
                let slot = if on_fermionic { &mut b } else { &mut a };
                if slot.is_empty() {
                    slot.push(v);
                } else {
                    slot[0] = v;
                }
                SourcePoint { primary: v, kappa1: a, kappa2: b }
            })
            .collect())
    }

    pub fn validate(&self) -> CliResult<()> {
        let dyson = self.dyson()?;
        if self.n == 0 {
            return Err(CliError::config("n must be at least 1"));
        }
        if self.masses.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(CliError::config("masses must be positive"));
        }
        if self.histogram.bins == 0 {
            return Err(CliError::config("histogram needs at least one bin"));
        }
        if let Some((a, b)) = self.histogram.range {
            if !(a < b) {
                return Err(CliError::config("histogram range must be increasing"));
            }
        }
        self.ensemble
            .validate(dyson, self.n, self.nu)
            .map_err(|e| CliError::config(format!("ensemble: {e}")))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output
            .dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn stem(&self) -> String {
        self.output
            .name
            .clone()
            .unwrap_or_else(|| self.method.map_or("run", |m| m.command()).to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"n": 2, "samples": 10}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"n": 2, "kappa2": ["0+2i"], "mc": {"n_samples": 10}}"#).unwrap();
        assert_eq!(c.kappa2, vec![Cx(Complex64::new(0.0, 2.0))]);
        assert_eq!(c.mc.n_samples, 10);
    }

    #[test]
    fn resolved_config_round_trips() {
        let mut c = RunConfig::default();
        c.kappa1.push(Cx(Complex64::new(-1.0, 0.5)));
        c.sweep = Some(Sweep::parse("0+1i:0+3i:5").unwrap());
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn sweep_fills_the_fermionic_slot() {
        let mut c = RunConfig::default();
        c.sweep = Some(Sweep::parse("1i:3i:3").unwrap());
        let pts = c.source_points(None, Some(1)).unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[1].kappa2, vec![Complex64::new(0.0, 2.0)]);
        assert!(pts[1].kappa1.is_empty());
        assert!(c.source_points(None, None).is_err());
        assert!(c.source_points(Some(2), Some(1)).is_err());
    }

    #[test]
    fn method_mismatch_is_a_config_error() {
        let mut c = RunConfig { method: Some(Method::Super), ..RunConfig::default() };
        assert!(c.claim(Method::Ordinary).is_err());
        assert!(c.claim(Method::Super).is_ok());
    }
}
