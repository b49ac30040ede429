//! Oracle-equivalence checks runnable from the command line.

use ncwitness_core::analytic::analytic_trace;
use ncwitness_core::{
    adaptive_dim, build_density, g_trace, joint_evolution, joint_evolution_naive, period_grid, OscillatorStateSpec,
    QubitInit, TruncationPolicy, C64,
};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};

const POINTS: usize = 201;
const BETA: f64 = 0.5;

pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, value: f64, tol: f64) -> Check {
    Check { name: name.into(), passed: value <= tol, detail: format!("{value:.3e} (tol {tol:e})") }
}

fn failed(name: impl Into<String>, err: impl std::fmt::Display) -> Check {
    Check { name: name.into(), passed: false, detail: err.to_string() }
}

fn named_states() -> Vec<(OscillatorStateSpec, f64)> {
    vec![
        (OscillatorStateSpec::coherent(C64::new(1.0, 0.5)).unwrap(), 1e-7),
        (OscillatorStateSpec::thermal(1.0).unwrap(), 1e-8),
        (OscillatorStateSpec::fock(1), 1e-8),
        (OscillatorStateSpec::fock(10), 1e-8),
        (OscillatorStateSpec::vacuum_subtracted_thermal(), 1e-8),
        (OscillatorStateSpec::cat(2.0).unwrap(), 1e-8),
    ]
}

fn equivalence(spec: &OscillatorStateSpec, tol: f64) -> Vec<Check> {
    let run = || -> ncwitness_core::Result<Vec<Check>> {
        let times = period_grid(1.0, POINTS)?;
        let analytic = analytic_trace(spec, BETA, 1.0, &times)?;
        let dim = adaptive_dim(spec, BETA, &TruncationPolicy::default())?;
        let rho = build_density(spec, dim)?;
        let g = g_trace(&rho, BETA, 1.0, &times)?;
        let joint = joint_evolution(&rho, QubitInit::plus_x(), BETA, 1.0, 1.0, &times)?;
        Ok(vec![
            check(format!("{spec} g_trace vs closed form (dim {dim})"), g.trace.max_deviation(&analytic), tol),
            check(format!("{spec} joint vs closed form"), joint.oracle.trace.max_deviation(&analytic), tol),
            check(format!("{spec} joint vs g_trace"), joint.oracle.trace.max_deviation(&g.trace), 1e-9),
            check(format!("{spec} z conservation"), joint.z_drift(0.5), 1e-10),
        ])
    };
    run().unwrap_or_else(|e| vec![failed(format!("{spec} equivalence"), e)])
}

fn structural() -> Vec<Check> {
    let run = || -> ncwitness_core::Result<Vec<Check>> {
        let times = period_grid(1.0, POINTS)?;
        let spec = OscillatorStateSpec::fock(2);
        let rho = build_density(&spec, 24)?;
        let blocks = joint_evolution(&rho, QubitInit::plus_x(), BETA, 1.0, 1.0, &times)?;
        let naive = joint_evolution_naive(&rho, QubitInit::plus_x(), BETA, 1.0, 1.0, &times)?;
        let mut omega0 = 0.0f64;
        let other = QubitInit::new(0.3, C64::new(0.1, -0.2))?;
        for w0 in [0.0, 10.0] {
            let j = joint_evolution(&rho, QubitInit::plus_x(), BETA, 1.0, w0, &times)?;
            omega0 = omega0.max(j.oracle.trace.max_deviation(&blocks.oracle.trace));
        }
        let j = joint_evolution(&rho, other, BETA, 1.0, 1.0, &times)?;
        let qubit = j.oracle.trace.max_deviation(&blocks.oracle.trace);
        let flat = g_trace(&rho, 0.0, 1.0, &times)?;
        Ok(vec![
            check(
                "naive joint vs block joint (fock(N=2), dim 24)",
                naive.oracle.trace.max_deviation(&blocks.oracle.trace),
                1e-10,
            ),
            check("omega0 independence {0, 1, 10}", omega0, 1e-9),
            check("qubit initial state independence", qubit, 1e-9),
            check("beta = 0 gives |W| = 1", flat.trace.max_deviation_from(|_| 1.0), 1e-12),
        ])
    };
    run().unwrap_or_else(|e| vec![failed("structural checks", e)])
}

pub fn run_checks() -> Vec<Check> {
    let mut checks: Vec<Check> =
        named_states().par_iter().flat_map_iter(|(spec, tol)| equivalence(spec, *tol)).collect();
    checks.extend(structural());
    checks
}

pub fn cmd_selftest() -> CliResult<()> {
    let checks = run_checks();
    let failures = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("selftest: {} passed, {failures} failed", checks.len() - failures);
    if failures == 0 {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("{failures} selftest checks failed")))
    }
}
