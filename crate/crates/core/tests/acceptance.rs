//! Acceptance criteria, one PASS/FAIL line each. Runs under `cargo test`.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use ncwitness_core::analytic::{analytic_trace, w_cat, w_cat_half_normalized, w_fock, w_thermal, w_vsth};
use ncwitness_core::oracle::{TRACE_THRESHOLD, UNITARITY_THRESHOLD};
use ncwitness_core::scanner::ThresholdSearch;
use ncwitness_core::states::mixture_density;
use ncwitness_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn lib<T>(r: ncwitness_core::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn default_times() -> Vec<f64> {
    period_grid(1.0, 2001).unwrap()
}

fn coarse_times() -> Vec<f64> {
    period_grid(1.0, 101).unwrap()
}

fn converged_density(spec: &OscillatorStateSpec, beta: f64) -> std::result::Result<FockMatrix, String> {
    let dim = lib(adaptive_dim(spec, beta, &TruncationPolicy::default()))?;
    lib(build_density(spec, dim))
}

/// max_t ||W(t)| - 1| <= 1e-7 for coherent states, three methods.
fn ac1() -> Outcome {
    let times = default_times();
    let mut worst = 0.0f64;
    for alpha in [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(2.0, 1.0)] {
        let spec = lib(OscillatorStateSpec::coherent(alpha))?;
        for beta in [0.25, 0.5] {
            let rho = converged_density(&spec, beta)?;
            let traces = [
                lib(analytic_trace(&spec, beta, 1.0, &times))?,
                lib(g_trace(&rho, beta, 1.0, &times))?.trace,
                lib(joint_evolution(&rho, QubitInit::plus_x(), beta, 1.0, 1.0, &times))?.oracle.trace,
            ];
            for tr in &traces {
                let dev = tr.max_deviation_from(|_| 1.0);
                worst = worst.max(dev);
                ensure(dev <= 1e-7, format!("{spec} beta={beta} {}: deviation {dev:e}", tr.method))?;
            }
        }
    }
    Ok(format!("max ||W|-1| = {worst:.2e} (tol 1e-7)"))
}

/// Thermal oracle vs closed form within 1e-8; spot value e^{-4} at omega t = pi.
fn ac2() -> Outcome {
    let times = coarse_times();
    let mut worst = 0.0f64;
    for nbar in [0.5, 1.0, 3.0] {
        let spec = lib(OscillatorStateSpec::thermal(nbar))?;
        let rho = converged_density(&spec, 0.5)?;
        let tr = lib(g_trace(&rho, 0.5, 1.0, &times))?.trace;
        let dev = tr.max_deviation_from(|t| w_thermal(nbar, 0.5, 1.0, t).unwrap());
        worst = worst.max(dev);
        ensure(dev <= 1e-8, format!("nbar={nbar}: deviation {dev:e}"))?;
    }
    let spec = lib(OscillatorStateSpec::thermal(1.0))?;
    let oracle = lib(GTraceOracle::new(&converged_density(&spec, 0.5)?, 0.5, 1.0))?;
    let spot = oracle.witness(PI);
    let closed = lib(w_thermal(1.0, 0.5, 1.0, PI))?;
    ensure((closed - (-4.0f64).exp()).abs() <= 1e-15, format!("closed form at pi = {closed}"))?;
    ensure((spot - (-4.0f64).exp()).abs() <= 1e-8, format!("oracle at pi = {spot}"))?;
    ensure((spot - 1.8316e-2).abs() <= 1e-6, format!("spot {spot} vs 1.8316e-2"))?;
    Ok(format!("max deviation {worst:.2e} (tol 1e-8), |W(pi)| = {spot:.6e}"))
}

/// Fock oracle vs |L_N| within 1e-8; violation set; N = 1 peak = 3.
fn ac3() -> Outcome {
    let times = default_times();
    let opts = ScanOptions::default();
    let mut worst = 0.0f64;
    let mut violating = Vec::new();
    for n in [0usize, 1, 2, 5, 10, 15] {
        let spec = OscillatorStateSpec::fock(n);
        let rho = converged_density(&spec, 0.5)?;
        let tr = lib(g_trace(&rho, 0.5, 1.0, &times))?.trace;
        let dev = tr.max_deviation_from(|t| w_fock(n, 0.5, 1.0, t));
        worst = worst.max(dev);
        ensure(dev <= 1e-8, format!("N={n}: deviation {dev:e}"))?;

        let ra = lib(scan_period(&spec, 0.5, 1.0, Method::Analytic, &opts))?;
        let ro = lib(scan_period(&spec, 0.5, 1.0, Method::GTrace, &opts))?;
        ensure(ra.violated == ro.violated, format!("N={n}: analytic and oracle verdicts differ"))?;
        if ra.violated {
            violating.push(n);
        }
        if n == 1 {
            ensure((ra.max_w - 3.0).abs() <= 1e-8, format!("analytic N=1 peak {}", ra.max_w))?;
            ensure((ro.max_w - 3.0).abs() <= 1e-8, format!("oracle N=1 peak {}", ro.max_w))?;
        }
    }
    for n in [1, 10] {
        ensure(violating.contains(&n), format!("N={n} should violate"))?;
    }
    for n in [0, 15] {
        ensure(!violating.contains(&n), format!("N={n} should not violate"))?;
    }
    Ok(format!("max deviation {worst:.2e} (tol 1e-8), violating N = {violating:?}"))
}

/// Vacuum-subtracted thermal: oracle vs closed form, max over period = 1.
fn ac4() -> Outcome {
    let times = default_times();
    let spec = OscillatorStateSpec::vacuum_subtracted_thermal();
    let opts = ScanOptions::default();
    let mut worst = 0.0f64;
    for beta in [0.25, 0.5, 1.0] {
        let rho = converged_density(&spec, beta)?;
        let tr = lib(g_trace(&rho, beta, 1.0, &times))?.trace;
        let dev = tr.max_deviation_from(|t| w_vsth(beta, 1.0, t));
        worst = worst.max(dev);
        ensure(dev <= 1e-8, format!("beta={beta}: deviation {dev:e}"))?;
        for method in [Method::Analytic, Method::GTrace] {
            let r = lib(scan_period(&spec, beta, 1.0, method, &opts))?;
            ensure(!r.violated, format!("beta={beta} {method}: violated"))?;
            ensure((r.max_w - 1.0).abs() <= 1e-8, format!("beta={beta} {method}: max {}", r.max_w))?;
            ensure(classify(&r) == Verdict::NoCertificate, "verdict")?;
        }
    }
    ensure(spec.classical_claim() == ClassicalClaim::Nonclassical, "claim")?;
    Ok(format!("max deviation {worst:.2e} (tol 1e-8), no violation at beta 0.25/0.5/1"))
}

/// Cat states: corrected closed form certified by the oracle; half-normalized form rejected.
fn ac5() -> Outcome {
    let times = default_times();
    let opts = ScanOptions::default();
    let mut worst = 0.0f64;
    let mut violating = Vec::new();
    for alpha in [0.0, 1.0, 2.0, 5.0] {
        let spec = lib(OscillatorStateSpec::cat(alpha))?;
        let rho = converged_density(&spec, 0.5)?;
        let tr = lib(g_trace(&rho, 0.5, 1.0, &times))?.trace;
        let dev = tr.max_deviation_from(|t| w_cat(alpha, 0.5, 1.0, t));
        worst = worst.max(dev);
        ensure(dev <= 1e-8, format!("alpha={alpha}: deviation {dev:e}"))?;
        if alpha == 0.0 {
            let flat = tr.max_deviation_from(|_| 1.0);
            ensure(flat <= 1e-8, format!("alpha=0 oracle deviates from 1 by {flat:e}"))?;
            ensure(times.iter().all(|&t| w_cat(0.0, 0.5, 1.0, t) == 1.0), "alpha=0 closed form not exactly 1")?;

            // the half-normalized expression must fail the same check by a factor ~2
            let bad = tr.max_deviation_from(|t| w_cat_half_normalized(0.0, 0.5, 1.0, t));
            ensure(bad > 1e-8, "half-normalized cat form unexpectedly passes")?;
            let ratio = tr.values[1000] / w_cat_half_normalized(0.0, 0.5, 1.0, times[1000]);
            ensure((ratio - 2.0).abs() < 1e-6, format!("oracle / half-normalized = {ratio}"))?;
        }
        let ra = lib(scan_period(&spec, 0.5, 1.0, Method::Analytic, &opts))?;
        let ro = lib(scan_period(&spec, 0.5, 1.0, Method::GTrace, &opts))?;
        ensure(ra.violated == ro.violated, format!("alpha={alpha}: verdicts differ"))?;
        if ra.violated {
            violating.push(alpha);
        }
    }
    ensure(violating == vec![1.0, 2.0], format!("violating alphas {violating:?}, expected [1, 2]"))?;
    Ok(format!(
        "max deviation {worst:.2e} (tol 1e-8), violating alpha0 = {violating:?}, half-normalized form fails by factor 2"
    ))
}

fn random_density(rng: &mut ChaCha8Rng, dim: usize) -> FockMatrix {
    let g = nalgebra::DMatrix::from_fn(dim, dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let mut rho = &g * g.adjoint();
    let tr = rho.trace();
    rho /= tr;
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    FockMatrix::density(rho).unwrap()
}

/// Oracle-vs-oracle, z conservation, omega0 and qubit independence, residuals, beta = 0.
fn ac6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let times = coarse_times();
    let (mut agree, mut z_drift, mut omega0_dev, mut qubit_dev, mut flat_dev) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut unit, mut trace) = (0.0f64, 0.0f64);
    let cases = 60;
    for case in 0..cases {
        let dim = rng.gen_range(2..=32);
        let beta = rng.gen_range(0.0..1.0);
        let rho = random_density(&mut rng, dim);
        let z0: f64 = rng.gen_range(0.05..0.95);
        let r = (z0 * (1.0 - z0)).sqrt() * rng.gen_range(0.2..1.0);
        let qubit = lib(QubitInit::new(z0, C64::from_polar(r, rng.gen_range(0.0..TAU))))?;

        let g = lib(g_trace(&rho, beta, 1.0, &times))?;
        unit = unit.max(g.residuals.unitarity);
        trace = trace.max(g.residuals.trace);
        let base = lib(joint_evolution(&rho, QubitInit::plus_x(), beta, 1.0, 0.0, &times))?;
        for omega0 in [0.0, 1.0, 10.0] {
            let j = lib(joint_evolution(&rho, qubit, beta, 1.0, omega0, &times))?;
            unit = unit.max(j.oracle.residuals.unitarity);
            trace = trace.max(j.oracle.residuals.trace);
            agree = agree.max(j.oracle.trace.max_deviation(&g.trace));
            z_drift = z_drift.max(j.z_drift(z0));
            omega0_dev = omega0_dev.max(j.oracle.trace.max_deviation(&base.oracle.trace));
        }
        let other = lib(QubitInit::new(0.5, C64::new(0.0, -0.5)))?;
        let j2 = lib(joint_evolution(&rho, other, beta, 1.0, 0.0, &times))?;
        qubit_dev = qubit_dev.max(j2.oracle.trace.max_deviation(&base.oracle.trace));

        if case % 3 == 0 {
            let naive = lib(joint_evolution_naive(&rho, qubit, beta, 1.0, 1.0, &times))?;
            agree = agree.max(naive.oracle.trace.max_deviation(&g.trace));
        }
        let flat = lib(g_trace(&rho, 0.0, 1.0, &times))?;
        flat_dev = flat_dev.max(flat.trace.max_deviation_from(|_| 1.0));
        let flat_j = lib(joint_evolution(&rho, qubit, 0.0, 1.0, 1.0, &times))?;
        flat_dev = flat_dev.max(flat_j.oracle.trace.max_deviation_from(|_| 1.0));
    }
    // beta = 0 for every named family, closed form and oracle
    for spec in [
        lib(OscillatorStateSpec::coherent(C64::new(1.0, 1.0)))?,
        lib(OscillatorStateSpec::thermal(1.0))?,
        OscillatorStateSpec::fock(3),
        OscillatorStateSpec::vacuum_subtracted_thermal(),
        lib(OscillatorStateSpec::cat(2.0))?,
    ] {
        let a = lib(analytic_trace(&spec, 0.0, 1.0, &times))?;
        flat_dev = flat_dev.max(a.max_deviation_from(|_| 1.0));
        let rho = converged_density(&spec, 0.0)?;
        let o = lib(g_trace(&rho, 0.0, 1.0, &times))?;
        flat_dev = flat_dev.max(o.trace.max_deviation_from(|_| 1.0));
    }
    ensure(agree <= 1e-9, format!("oracle disagreement {agree:e}"))?;
    ensure(z_drift <= 1e-10, format!("z drift {z_drift:e}"))?;
    ensure(omega0_dev <= 1e-9, format!("omega0 dependence {omega0_dev:e}"))?;
    ensure(qubit_dev <= 1e-9, format!("qubit-state dependence {qubit_dev:e}"))?;
    ensure(unit <= UNITARITY_THRESHOLD && trace <= TRACE_THRESHOLD, format!("residuals {unit:e} / {trace:e}"))?;
    ensure(flat_dev <= 1e-9, format!("beta=0 deviation {flat_dev:e}"))?;
    Ok(format!(
        "{cases} random densities: oracle gap {agree:.1e}, z drift {z_drift:.1e}, omega0 {omega0_dev:.1e}, qubit {qubit_dev:.1e}, beta=0 {flat_dev:.1e}"
    ))
}

/// Random classical states never exceed the bound (quadrature and oracle).
fn ac7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let times = period_grid(1.0, 401).unwrap();
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for _ in 0..40 {
        let k = rng.gen_range(1..=5);
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let atoms: Vec<(C64, f64)> = raw
            .iter()
            .map(|w| (C64::from_polar(rng.gen_range(0.0..2.0), rng.gen_range(0.0..TAU)), w / total))
            .collect();
        let atoms = normalize_exact(atoms);
        let samples = lib(WeightedSamples::new(atoms))?;
        let beta = rng.gen_range(0.1..1.0);
        let q = classical_quadrature_w(&samples, beta, 1.0, &times);
        let rho = lib(mixture_density(&samples, 64))?;
        let o = lib(g_trace(&rho, beta, 1.0, &times))?.trace;
        let m = q.max().1.max(o.max().1);
        worst = worst.max(m);
        ensure(m <= 1.0 + 1e-7, format!("coherent mixture exceeds bound: {m}"))?;
        count += 1;
    }
    for _ in 0..12 {
        let nbar = rng.gen_range(0.0..3.0);
        let beta = rng.gen_range(0.1..1.0);
        let spec = lib(OscillatorStateSpec::thermal(nbar))?;
        let q = classical_quadrature_w(&lib(classical_p_sampler(&spec))?, beta, 1.0, &times);
        let rho = lib(build_density(&spec, 192))?;
        let o = lib(g_trace(&rho, beta, 1.0, &times))?.trace;
        let m = q.max().1.max(o.max().1);
        worst = worst.max(m);
        ensure(m <= 1.0 + 1e-7, format!("thermal nbar={nbar} exceeds bound: {m}"))?;
        count += 1;
    }
    Ok(format!("{count} random classical states, max |W| = {worst:.12} (bound 1 + 1e-7)"))
}

/// Weights summing to 1 up to the last ulp.
fn normalize_exact(mut atoms: Vec<(C64, f64)>) -> Vec<(C64, f64)> {
    let head: f64 = atoms[..atoms.len() - 1].iter().map(|a| a.1).sum();
    let last = atoms.len() - 1;
    atoms[last].1 = 1.0 - head;
    atoms
}

/// Fock N = 1 threshold bracket contains 1/sqrt(8).
fn ac8() -> Outcome {
    let exact = 1.0 / 8f64.sqrt();
    let mut lines = Vec::new();
    for method in [Method::Analytic, Method::GTrace] {
        let res = lib(beta_threshold(
            &OscillatorStateSpec::fock(1),
            ThresholdSearch::new(0.05, 0.5, 1e-4),
            method,
            &ScanOptions::default(),
        ))?;
        match res.outcome {
            ThresholdOutcome::Bracket { beta_lo, beta_hi } => {
                ensure(beta_hi - beta_lo <= 1e-4, "bracket wider than resolution")?;
                ensure(
                    beta_lo <= exact && exact <= beta_hi,
                    format!("{method}: [{beta_lo}, {beta_hi}] misses {exact}"),
                )?;
                lines.push(format!("{method} [{beta_lo:.6}, {beta_hi:.6}]"));
            }
            other => return Err(format!("{method}: no bracket ({other:?})")),
        }
    }
    Ok(format!("{} contain 1/sqrt(8) = {exact:.6}", lines.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("AC1", "coherent-bound saturation", ac1),
        ("AC2", "thermal closed form", ac2),
        ("AC3", "Fock/Laguerre equivalence", ac3),
        ("AC4", "vacuum-subtracted thermal", ac4),
        ("AC5", "cat-state normalization", ac5),
        ("AC6", "structural invariants", ac6),
        ("AC7", "classical-bound property suite", ac7),
        ("AC8", "threshold regression", ac8),
    ];
    let mut failed = 0;
    for (id, title, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {id} {title}: {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id} {title}: {why} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
