use std::fs;
use std::path::{Path, PathBuf};

use chiral_susy::ensembles::{sample_direct, Chain, EnsembleSpec};
use chiral_susy::linalg::hermitian_eigenvalues;
use chiral_susy::ordinary_mc::{estimate_z, estimate_z_unquenched, spectral_density, Histogram, SpectrumKind};
use chiral_susy::quadrature::{integrate, Domain};
use chiral_susy::superspace::{z_micro as micro_value, z_super as super_value, z_unquenched_super, MicroWeight, SuperWeight};
use chiral_susy::verify::{identity_suite, run_scenario, CheckKind, ComparisonReport, ScenarioConfig, SCENARIOS};
use chiral_susy::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Estimator, RunConfig};
use crate::error::{CliError, CliResult};

/// Collects rows with a fixed header, then writes `<stem>.csv` and
/// `<stem>.config.json` and echoes the table to stdout.
struct Table {
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &'static [&'static str]) -> Self {
        Self { header, rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        // writing into memory cannot fail
        w.write_record(self.header).expect("csv header");
        for r in &self.rows {
            w.write_record(r).expect("csv row");
        }
        w.into_inner().expect("csv flush")
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

pub fn output_path(cfg: &RunConfig, suffix: &str) -> CliResult<PathBuf> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).map_err(|source| CliError::Write {
        path: dir.display().to_string(),
        source,
    })?;
    Ok(dir.join(format!("{}{suffix}", cfg.stem())))
}

fn emit(cfg: &RunConfig, table: &Table) -> CliResult<()> {
    let bytes = table.to_bytes();
    let csv_path = output_path(cfg, ".csv")?;
    write_file(&csv_path, &bytes)?;
    let json = serde_json::to_string_pretty(cfg).map_err(|e| CliError::config(e.to_string()))?;
    write_file(&output_path(cfg, ".config.json")?, json.as_bytes())?;
    print!("{}", String::from_utf8_lossy(&bytes));
    eprintln!("wrote {}", csv_path.display());
    Ok(())
}

/// Shortest round-trip form, in exponent notation outside [1e-4, 1e15).
fn f(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

pub fn sample(cfg: &RunConfig) -> CliResult<()> {
    let dyson = cfg.dyson()?;
    let mut table = Table::new(&["sample", "index", "eigenvalue"]);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut chain = if cfg.ensemble.has_direct_sampler() {
        None
    } else {
        Some(Chain::new(&cfg.ensemble, dyson, cfg.n, cfg.nu, &cfg.mc.chain, ChaCha8Rng::seed_from_u64(cfg.seed))?)
    };
    for k in 0..cfg.mc.n_samples {
        let s = match chain.as_mut() {
            Some(c) => c.next_sample()?,
            None => sample_direct(&cfg.ensemble, dyson, cfg.n, cfg.nu, &mut rng)?,
        };
        for (i, ev) in hermitian_eigenvalues(&s.wishart()).into_iter().enumerate() {
            table.push(vec![k.to_string(), i.to_string(), f(ev)]);
        }
    }
    emit(cfg, &table)
}

pub fn z_ordinary(cfg: &RunConfig, k1: Option<usize>, k2: Option<usize>) -> CliResult<()> {
    let dyson = cfg.dyson()?;
    let mut table = Table::new(&[
        "ensemble", "beta", "n", "nu", "k1", "k2", "kappa_re", "kappa_im", "mean_re", "mean_im", "stderr", "n_samples",
        "seed",
    ]);
    for pt in cfg.source_points(k1, k2)? {
        let src = pt.pack(cfg.chiral_sources)?;
        let est = estimate_z(&cfg.ensemble, dyson, cfg.n, cfg.nu, &src, &cfg.mc)?;
        if !est.reliable {
            eprintln!("warning: effective sample size {:.0} is small at κ = {}", est.ess, pt.primary);
        }
        table.push(vec![
            cfg.ensemble.name().into(),
            cfg.beta.to_string(),
            cfg.n.to_string(),
            cfg.nu.to_string(),
            src.k1().to_string(),
            src.k2().to_string(),
            f(pt.primary.re),
            f(pt.primary.im),
            f(est.mean.re),
            f(est.mean.im),
            f(est.stderr),
            est.n_samples.to_string(),
            est.seed.to_string(),
        ]);
    }
    emit(cfg, &table)
}

const VALUE_HEADER: &[&str] = &[
    "representation", "ensemble", "beta", "n", "nu", "k1", "k2", "kappa_re", "kappa_im", "value_re", "value_im", "err",
];

pub fn z_super(cfg: &RunConfig, k1: Option<usize>, k2: Option<usize>) -> CliResult<()> {
    let dyson = cfg.dyson()?;
    let weight = SuperWeight::from_ensemble(&cfg.ensemble, cfg.n)?;
    let mut table = Table::new(VALUE_HEADER);
    for pt in cfg.source_points(k1, k2)? {
        let src = pt.pack(cfg.chiral_sources)?;
        let v = super_value(&weight, dyson, cfg.n, cfg.nu, &src, &cfg.quad)?;
        table.push(vec![
            "superspace".into(),
            cfg.ensemble.name().into(),
            cfg.beta.to_string(),
            cfg.n.to_string(),
            cfg.nu.to_string(),
            src.k1().to_string(),
            src.k2().to_string(),
            f(pt.primary.re),
            f(pt.primary.im),
            f(v.value.re),
            f(v.value.im),
            f(v.err),
        ]);
    }
    emit(cfg, &table)
}

pub fn z_micro(cfg: &RunConfig, k1: Option<usize>, k2: Option<usize>) -> CliResult<()> {
    let weight_name = match cfg.micro_weight {
        MicroWeight::Gaussian => "gaussian",
        MicroWeight::HeavyTailLorentz { .. } => "heavy_tail_lorentz",
    };
    let mut table = Table::new(&["representation", "weight", "nu", "k1", "k2", "xi_re", "xi_im", "value_re", "value_im"]);
    for pt in cfg.source_points(k1, k2)? {
        let v = micro_value(&cfg.micro_weight, cfg.nu, &pt.kappa1, &pt.kappa2, &cfg.quad)?;
        table.push(vec![
            "microscopic".into(),
            weight_name.into(),
            cfg.nu.to_string(),
            pt.kappa1.len().to_string(),
            pt.kappa2.len().to_string(),
            f(pt.primary.re),
            f(pt.primary.im),
            f(v.re),
            f(v.im),
        ]);
    }
    emit(cfg, &table)
}

pub fn z_unquenched(cfg: &RunConfig, k1: Option<usize>, k2: Option<usize>) -> CliResult<()> {
    if cfg.masses.is_empty() {
        return Err(CliError::config("z-unquenched needs at least one --mass"));
    }
    let dyson = cfg.dyson()?;
    let masses = cfg.masses.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
    let mut table = Table::new(&[
        "representation", "n", "nu", "masses", "k1", "k2", "kappa_re", "kappa_im", "value_re", "value_im", "err",
    ]);
    for pt in cfg.source_points(k1, k2)? {
        let src = pt.pack(cfg.chiral_sources)?;
        let mut rows = Vec::new();
        if cfg.estimator != Estimator::MonteCarlo {
            let v = z_unquenched_super(&cfg.masses, dyson, cfg.n, cfg.nu, &src, &cfg.quad)?;
            rows.push(("superspace", v.value, v.err));
        }
        if cfg.estimator != Estimator::Super {
            let e = estimate_z_unquenched(&cfg.masses, dyson, cfg.n, cfg.nu, &src, &cfg.mc)?;
            rows.push(("ordinary_mc", e.mean, e.stderr));
        }
        for (rep, v, err) in rows {
            table.push(vec![
                rep.into(),
                cfg.n.to_string(),
                cfg.nu.to_string(),
                masses.clone(),
                src.k1().to_string(),
                src.k2().to_string(),
                f(pt.primary.re),
                f(pt.primary.im),
                f(v.re),
                f(v.im),
                f(err),
            ]);
        }
    }
    emit(cfg, &table)
}

/// Microscopic Bessel density of the positive chiral eigenvalues in the
/// variable x = 2nλ for exp(−n tr W†W) at β = 2:
/// ρ(x) = x/2 (J_ν(x)² − J_{ν+1}(x) J_{ν−1}(x)).
fn bessel_density(nu: usize, x: f64) -> f64 {
    let j = |k: i32| libm::jn(k, x);
    let nu = nu as i32;
    let below = j(nu - 1);
    x / 2.0 * (j(nu) * j(nu) - j(nu + 1) * below)
}

/// Expected histogram density from the microscopic law, in the same
/// normalization as the sampled histogram (eigenvalues u = nλ of both
/// signs, normalized over the in-range count).
fn micro_prediction(cfg: &RunConfig, h: &Histogram) -> CliResult<Option<Vec<f64>>> {
    let applies = cfg.beta == 2
        && cfg.histogram.microscopic
        && cfg.histogram.kind == SpectrumKind::Chiral
        && cfg.ensemble.gaussian_scale(cfg.n) == Some(cfg.n as f64)
        && !matches!(cfg.ensemble, EnsembleSpec::Correlated { .. });
    let in_range: u64 = h.counts.iter().sum();
    if !applies || in_range == 0 {
        return Ok(None);
    }
    let per_matrix = h.n_matrices as f64 / in_range as f64;
    let mut out = Vec::with_capacity(h.counts.len());
    for e in h.edges.windows(2) {
        // density in u = nλ is 2ρ(2|u|)
        let mass = integrate(
            |u| Complex64::new(2.0 * bessel_density(cfg.nu, 2.0 * u.abs()), 0.0),
            Domain::Interval(e[0], e[1]),
            1e-10,
        )?;
        out.push(per_matrix * mass.value.re / (e[1] - e[0]));
    }
    Ok(Some(out))
}

pub fn density(cfg: &RunConfig) -> CliResult<()> {
    let dyson = cfg.dyson()?;
    let h = spectral_density(&cfg.ensemble, dyson, cfg.n, cfg.nu, &cfg.mc, &cfg.histogram.to_core())?;
    let micro = micro_prediction(cfg, &h)?;
    let mut table = Table::new(&["bin_lo", "bin_hi", "count", "density", "micro_density"]);
    for (k, e) in h.edges.windows(2).enumerate() {
        table.push(vec![
            f(e[0]),
            f(e[1]),
            h.counts[k].to_string(),
            f(h.density[k]),
            micro.as_ref().map_or(String::new(), |m| f(m[k])),
        ]);
    }
    if h.out_of_range > 0 {
        eprintln!("{} eigenvalues fell outside the histogram range", h.out_of_range);
    }
    emit(cfg, &table)
}

pub fn list_scenarios() {
    for (name, about) in SCENARIOS {
        println!("{name:<19} {about}");
    }
}

fn check_rows(report: &ComparisonReport, table: &mut Table) {
    for c in &report.checks {
        let (kind, metric, tol) = match &c.kind {
            CheckKind::Deterministic { deviation, tol } => ("deterministic", f(*deviation), f(*tol)),
            CheckKind::Relative { rel_err, tol } => ("relative", f(*rel_err), f(*tol)),
            CheckKind::Stochastic { z, threshold } => ("stochastic", f(*z), f(*threshold)),
            CheckKind::Condition { detail } => ("condition", detail.clone(), String::new()),
        };
        table.push(vec![
            report.scenario.clone(),
            c.label.clone(),
            kind.into(),
            metric,
            tol,
            c.passed.to_string(),
        ]);
    }
}

pub fn verify(cfg: &RunConfig) -> CliResult<()> {
    let v = &cfg.verify;
    let mut names: Vec<String> = v.scenarios.clone();
    let mut identities = false;
    match v.suite.as_deref() {
        None => {}
        Some("identities") => identities = true,
        Some("all") => names.extend(SCENARIOS.iter().map(|(n, _)| n.to_string())),
        Some(other) => return Err(CliError::config(format!("unknown suite {other:?}; use identities or all"))),
    }
    if !identities && names.is_empty() {
        return Err(CliError::config("nothing to verify; pass --suite or --scenario"));
    }
    let defaults = ScenarioConfig::default();
    let scfg = ScenarioConfig {
        samples: v.samples.unwrap_or(defaults.samples),
        mcmc_samples: v.mcmc_samples.unwrap_or(defaults.mcmc_samples),
        seed: cfg.seed,
        quad: cfg.quad.clone(),
        ..defaults
    };
    let mut reports = Vec::new();
    if identities {
        reports.push(identity_suite(cfg.seed)?);
    }
    for name in &names {
        reports.push(run_scenario(name, &scfg)?);
    }
    let mut table = Table::new(&["scenario", "check", "kind", "metric", "tolerance", "passed"]);
    for r in &reports {
        check_rows(r, &mut table);
        eprintln!("{} {} ({:.1}s)", if r.passed { "PASS" } else { "FAIL" }, r.scenario, r.runtime_s);
        for c in r.checks.iter().filter(|c| !c.passed) {
            eprintln!("    {}", c.summary());
        }
    }
    let json = serde_json::to_string_pretty(&reports).map_err(|e| CliError::config(e.to_string()))?;
    write_file(&output_path(cfg, ".report.json")?, json.as_bytes())?;
    emit(cfg, &table)?;
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.scenario.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_density_tends_to_the_bulk_value() {
        // the microscopic density approaches 1/π away from the origin
        for nu in [0, 1, 2] {
            let avg: f64 = (0..200).map(|k| bessel_density(nu, 60.0 + 0.05 * k as f64)).sum::<f64>() / 200.0;
            assert!((avg - 1.0 / std::f64::consts::PI).abs() < 5e-3, "ν={nu}: {avg}");
        }
        assert!(bessel_density(0, 0.0).abs() < 1e-15);
    }
}
