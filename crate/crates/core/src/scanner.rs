//! Violation search over one oscillator period and coupling thresholds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::analytic_value;
use crate::error::{Result, WitnessError};
use crate::oracle::{GTraceOracle, JointOracle, QuadratureSource, Residuals, WitnessSource};
use crate::states::{build_density, classical_p_sampler, OscillatorStateSpec, QubitInit};
use crate::trace::{period, period_grid, Method, DEFAULT_GRID_POINTS};
use crate::truncation::{adaptive_dim, TruncationPolicy};

/// Violation margin for closed-form traces.
pub const ANALYTIC_DECISION_MARGIN: f64 = 1e-9;
/// Violation margin for numerically simulated traces.
pub const ORACLE_DECISION_MARGIN: f64 = 1e-7;

pub fn default_decision_margin(method: Method) -> f64 {
    match method {
        Method::Analytic => ANALYTIC_DECISION_MARGIN,
        _ => ORACLE_DECISION_MARGIN,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanOptions {
    pub grid_points: usize,
    pub policy: TruncationPolicy,
    pub omega0: f64,
    pub qubit: QubitInit,
    /// Overrides the per-method default when set.
    pub decision_margin: Option<f64>,
    /// Route joint evolution through the full `2 dim` propagator.
    pub naive_joint: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            grid_points: DEFAULT_GRID_POINTS,
            policy: TruncationPolicy::default(),
            omega0: 1.0,
            qubit: QubitInit::plus_x(),
            decision_margin: None,
            naive_joint: false,
        }
    }
}

/// Closed-form witness as a [`WitnessSource`].
#[derive(Clone, Debug)]
pub struct AnalyticSource {
    spec: OscillatorStateSpec,
    beta: f64,
    omega: f64,
}

impl AnalyticSource {
    pub fn new(spec: &OscillatorStateSpec, beta: f64, omega: f64) -> Result<Self> {
        analytic_value(spec, beta, omega, 0.0)?;
        Ok(Self { spec: spec.clone(), beta, omega })
    }
}

impl WitnessSource for AnalyticSource {
    fn method(&self) -> Method {
        Method::Analytic
    }

    fn witness(&self, t: f64) -> f64 {
        analytic_value(&self.spec, self.beta, self.omega, t).unwrap_or(f64::NAN)
    }
}

/// Resolves the truncation (for oracle methods) and prepares an evaluator.
pub fn build_source(
    spec: &OscillatorStateSpec,
    beta: f64,
    omega: f64,
    method: Method,
    opts: &ScanOptions,
) -> Result<Box<dyn WitnessSource>> {
    if !beta.is_finite() {
        return Err(WitnessError::Domain(format!("beta must be finite, got {beta}")));
    }
    match method {
        Method::Analytic => Ok(Box::new(AnalyticSource::new(spec, beta, omega)?)),
        Method::Quadrature => Ok(Box::new(QuadratureSource::new(classical_p_sampler(spec)?, beta, omega))),
        Method::GTrace | Method::Joint => {
            let dim = adaptive_dim(spec, beta, &opts.policy)?;
            let rho = build_density(spec, dim)?;
            if method == Method::GTrace {
                Ok(Box::new(GTraceOracle::new(&rho, beta, omega)?))
            } else if opts.naive_joint {
                Ok(Box::new(JointOracle::naive(&rho, opts.qubit, beta, omega, opts.omega0)?))
            } else {
                Ok(Box::new(JointOracle::new(&rho, opts.qubit, beta, omega, opts.omega0)?))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub family: String,
    pub beta: f64,
    pub omega: f64,
    pub method: Method,
    pub max_w: f64,
    pub argmax_t: f64,
    /// `max_w > 1 + decision_margin`
    pub violated: bool,
    /// `max_w - 1`
    pub margin: f64,
    pub decision_margin: f64,
    pub dim: Option<usize>,
    pub residuals: Option<Residuals>,
}

/// Maximizes `f` on `[lo, hi]` by golden-section search. Returns `(x, f(x))`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).abs() <= xtol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Grid maximum over one period, refined within one grid step on each side.
pub fn scan_source(
    source: &dyn WitnessSource,
    family: &str,
    beta: f64,
    omega: f64,
    grid_points: usize,
    decision_margin: f64,
) -> Result<ViolationReport> {
    let times = period_grid(omega, grid_points)?;
    let values: Vec<f64> = times.par_iter().map(|&t| source.witness(t)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(WitnessError::Domain("witness trace contains non-finite values".into()));
    }
    let (mut best_i, mut best_v) = (0, values[0]);
    for (i, &v) in values.iter().enumerate() {
        if v > best_v {
            best_i = i;
            best_v = v;
        }
    }
    let mut argmax_t = times[best_i];
    let lo = times[best_i.saturating_sub(1)];
    let hi = times[(best_i + 1).min(times.len() - 1)];
    let (t_ref, v_ref) = golden_section_max(|t| source.witness(t), lo, hi, 1e-12 * period(omega), 200);
    if v_ref > best_v {
        best_v = v_ref;
        argmax_t = t_ref.clamp(0.0, period(omega));
    }
    Ok(ViolationReport {
        family: family.to_string(),
        beta,
        omega,
        method: source.method(),
        max_w: best_v,
        argmax_t,
        violated: best_v - 1.0 > decision_margin,
        margin: best_v - 1.0,
        decision_margin,
        dim: source.dim(),
        residuals: source.residuals(),
    })
}

pub fn scan_period(
    spec: &OscillatorStateSpec,
    beta: f64,
    omega: f64,
    method: Method,
    opts: &ScanOptions,
) -> Result<ViolationReport> {
    let source = build_source(spec, beta, omega, method, opts)?;
    let margin = opts.decision_margin.unwrap_or_else(|| default_decision_margin(method));
    scan_source(source.as_ref(), &spec.label(), beta, omega, opts.grid_points, margin)
}

/// A violation certifies non-classicality; its absence certifies nothing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedNonclassical,
    NoCertificate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::CertifiedNonclassical => "certified-nonclassical",
            Verdict::NoCertificate => "no-certificate",
        }
    }
}

pub fn classify(report: &ViolationReport) -> Verdict {
    if report.violated {
        Verdict::CertifiedNonclassical
    } else {
        Verdict::NoCertificate
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdSearch {
    pub beta_min: f64,
    pub beta_max: f64,
    pub resolution: f64,
    pub coarse_points: usize,
}

impl ThresholdSearch {
    pub fn new(beta_min: f64, beta_max: f64, resolution: f64) -> Self {
        Self { beta_min, beta_max, resolution, coarse_points: 41 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdOutcome {
    /// `violated(beta_lo) = false`, `violated(beta_hi) = true`, `beta_hi - beta_lo <= resolution`.
    Bracket { beta_lo: f64, beta_hi: f64 },
    /// No false→true transition on the coarse grid; `violated` is the verdict at the low end.
    NoFlip { violated: bool },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub outcome: ThresholdOutcome,
    pub scan_grid: Vec<f64>,
    pub scan_verdicts: Vec<bool>,
    pub resolution: f64,
}

/// Smallest coupling in range at which the witness starts to be violated.
///
/// Scans a coarse grid first (max |W| need not be monotone in beta), then
/// bisects the first false→true pair.
pub fn beta_threshold(
    spec: &OscillatorStateSpec,
    search: ThresholdSearch,
    method: Method,
    opts: &ScanOptions,
) -> Result<ThresholdResult> {
    let ThresholdSearch { beta_min, beta_max, resolution, coarse_points } = search;
    if !(beta_min >= 0.0 && beta_max > beta_min && beta_max.is_finite()) {
        return Err(WitnessError::Domain(format!("invalid beta range [{beta_min}, {beta_max}]")));
    }
    if resolution.is_nan() || resolution <= 0.0 || coarse_points < 2 {
        return Err(WitnessError::Domain("resolution must be positive and the coarse grid needs 2 points".into()));
    }
    let violated = |beta: f64| scan_period(spec, beta, 1.0, method, opts).map(|r| r.violated);

    let step = (beta_max - beta_min) / (coarse_points - 1) as f64;
    let scan_grid: Vec<f64> = (0..coarse_points)
        .map(|k| if k + 1 == coarse_points { beta_max } else { beta_min + step * k as f64 })
        .collect();
    let scan_verdicts = scan_grid.iter().map(|&b| violated(b)).collect::<Result<Vec<_>>>()?;

    let flip = scan_verdicts.windows(2).position(|w| !w[0] && w[1]);
    let outcome = match flip {
        None => ThresholdOutcome::NoFlip { violated: scan_verdicts[0] },
        Some(i) => {
            let (mut lo, mut hi) = (scan_grid[i], scan_grid[i + 1]);
            while hi - lo > resolution {
                let mid = 0.5 * (lo + hi);
                if violated(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            ThresholdOutcome::Bracket { beta_lo: lo, beta_hi: hi }
        }
    };
    Ok(ThresholdResult { outcome, scan_grid, scan_verdicts, resolution })
}
