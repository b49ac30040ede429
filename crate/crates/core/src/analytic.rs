//! Closed-form `|W(t)|` for the state families with known P distributions.
//!
//! All functions take the unreduced time `t` and reduce the phase `omega t`
//! modulo `2 pi` before evaluating, so every trace is exactly periodic.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{Result, WitnessError};
use crate::fock::C64;
use crate::states::{OscillatorStateSpec, StateFamily};
use crate::trace::{Method, TraceParams, WitnessTrace};

fn reduced_phase(omega: f64, t: f64) -> f64 {
    (omega * t).rem_euclid(TAU)
}

/// `sin^2(omega t / 2)`.
pub fn half_angle_sin2(omega: f64, t: f64) -> f64 {
    let s = (0.5 * reduced_phase(omega, t)).sin();
    s * s
}

/// Laguerre polynomial `L_n(x)` by the three-term recurrence
/// `L_{k+1} = ((2k + 1 - x) L_k - k L_{k-1}) / (k + 1)`.
pub fn laguerre(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `f(alpha, t) = exp(-4 i beta (alpha e^{-i omega t/2} + alpha* e^{i omega t/2}) sin(omega t/2))`.
///
/// The exponent is purely imaginary, so `|f| = 1`.
pub fn coherent_phase(alpha: C64, beta: f64, omega: f64, t: f64) -> C64 {
    let phase = reduced_phase(omega, t);
    let rotated = alpha * C64::from_polar(1.0, -0.5 * phase);
    let arg = -8.0 * beta * rotated.re * (0.5 * phase).sin();
    C64::from_polar(1.0, arg)
}

/// Coherent states sit exactly on the bound.
pub fn w_coherent(_alpha: C64, _beta: f64, _omega: f64, _t: f64) -> f64 {
    1.0
}

/// `exp(-16 nbar beta^2 sin^2(omega t / 2))`.
pub fn w_thermal(nbar: f64, beta: f64, omega: f64, t: f64) -> Result<f64> {
    if nbar.is_nan() || nbar < 0.0 {
        return Err(WitnessError::Domain(format!("thermal mean occupation must be >= 0, got {nbar}")));
    }
    Ok((-16.0 * nbar * beta * beta * half_angle_sin2(omega, t)).exp())
}

/// `|L_N(16 beta^2 sin^2(omega t / 2))|`.
pub fn w_fock(n: usize, beta: f64, omega: f64, t: f64) -> f64 {
    laguerre(n, 16.0 * beta * beta * half_angle_sin2(omega, t)).abs()
}

/// Vacuum-subtracted unit thermal state: `|2 exp(-16 beta^2 sin^2(omega t/2)) - 1|`.
pub fn w_vsth(beta: f64, omega: f64, t: f64) -> f64 {
    (2.0 * (-16.0 * beta * beta * half_angle_sin2(omega, t)).exp() - 1.0).abs()
}

/// Even cat state, real amplitude `alpha`:
/// `|cos(4 beta alpha sin(omega t)) + e^{-2 alpha^2} cosh(8 beta alpha sin^2(omega t/2))| / (1 + e^{-2 alpha^2})`.
pub fn w_cat(alpha: f64, beta: f64, omega: f64, t: f64) -> f64 {
    let overlap = (-2.0 * alpha * alpha).exp();
    cat_bracket(alpha, beta, omega, t).abs() / (1.0 + overlap)
}

/// The cat expression with prefactor `1 / (2 (1 + e^{-2 alpha^2}))`.
///
/// This gives `1/2` at `alpha = 0`, where the state is the vacuum and `|W|`
/// must equal one; it is off by exactly a factor of two everywhere. Kept only
/// so the discrepancy stays under regression.
pub fn w_cat_half_normalized(alpha: f64, beta: f64, omega: f64, t: f64) -> f64 {
    0.5 * w_cat(alpha, beta, omega, t)
}

fn cat_bracket(alpha: f64, beta: f64, omega: f64, t: f64) -> f64 {
    let phase = reduced_phase(omega, t);
    let s2 = half_angle_sin2(omega, t);
    let x = 8.0 * beta * alpha * s2;
    let two_a2 = 2.0 * alpha * alpha;
    // e^{-2a^2} cosh(x) without overflowing cosh
    let damped_cosh = 0.5 * ((x - two_a2).exp() + (-x - two_a2).exp());
    (4.0 * beta * alpha * phase.sin()).cos() + damped_cosh
}

/// Closed-form `|W(t)|` for any family except custom densities.
pub fn analytic_value(spec: &OscillatorStateSpec, beta: f64, omega: f64, t: f64) -> Result<f64> {
    match spec.family() {
        StateFamily::Coherent { alpha } => Ok(w_coherent(*alpha, beta, omega, t)),
        StateFamily::Thermal { nbar } => w_thermal(*nbar, beta, omega, t),
        StateFamily::Fock { n } => Ok(w_fock(*n, beta, omega, t)),
        StateFamily::VacuumSubtractedThermal => Ok(w_vsth(beta, omega, t)),
        StateFamily::Cat { alpha } => Ok(w_cat(*alpha, beta, omega, t)),
        StateFamily::CustomDensity(_) => {
            Err(WitnessError::ContractViolation("custom densities have no closed-form witness".into()))
        }
    }
}

pub fn analytic_trace(spec: &OscillatorStateSpec, beta: f64, omega: f64, times: &[f64]) -> Result<WitnessTrace> {
    // surfaces domain errors before the parallel map
    analytic_value(spec, beta, omega, 0.0)?;
    let values = times.par_iter().map(|&t| analytic_value(spec, beta, omega, t)).collect::<Result<Vec<_>>>()?;
    Ok(WitnessTrace {
        times: times.to_vec(),
        values,
        method: Method::Analytic,
        params: TraceParams { beta, omega, family: spec.label() },
    })
}
