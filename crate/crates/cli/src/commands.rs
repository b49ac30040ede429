use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ncwitness_core::analytic::analytic_trace;
use ncwitness_core::{
    adaptive_dim, build_density, classify, g_trace, joint_evolution, joint_evolution_naive, period_grid, scan_period,
    FockMatrix, Method, OscillatorStateSpec, QubitInit, Residuals, ViolationReport,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{parse_values, FamilyName, FileConfig, Format, MethodChoice, RunConfig, StateParams};
use crate::error::{config_err, CliResult};
use crate::output::{fmt_num, fmt_opt_num, fmt_opt_usize, open_sink, write_csv, write_json};

/// `|W(t)|` from one method, with the truncation it used.
#[derive(Clone, Debug, Serialize)]
pub struct MethodTrace {
    pub method: Method,
    pub dim: Option<usize>,
    pub residuals: Option<Residuals>,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn compute_traces(
    cfg: &RunConfig,
    spec: &OscillatorStateSpec,
    methods: &[Method],
    times: &[f64],
) -> CliResult<Vec<MethodTrace>> {
    let rho: Option<FockMatrix> = if methods.iter().any(|&m| m != Method::Analytic) {
        let dim = adaptive_dim(spec, cfg.beta, &cfg.policy)?;
        Some(build_density(spec, dim)?)
    } else {
        None
    };
    let (beta, omega) = (cfg.beta, cfg.omega);
    methods
        .iter()
        .map(|&method| {
            let oracle = match (method, &rho) {
                (Method::Analytic, _) => {
                    let tr = analytic_trace(spec, beta, omega, times)?;
                    return Ok(MethodTrace { method, dim: None, residuals: None, times: tr.times, values: tr.values });
                }
                (Method::GTrace, Some(rho)) => g_trace(rho, beta, omega, times)?,
                (Method::Joint, Some(rho)) => {
                    let run = if cfg.naive_joint { joint_evolution_naive } else { joint_evolution };
                    run(rho, QubitInit::plus_x(), beta, omega, cfg.omega0, times)?.oracle
                }
                _ => return Err(config_err(format!("method {method} is not available here"))),
            };
            Ok(MethodTrace {
                method,
                dim: Some(oracle.dim_used),
                residuals: Some(oracle.residuals),
                times: oracle.trace.times,
                values: oracle.trace.values,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct TraceDocument<'a> {
    command: &'static str,
    config: &'a RunConfig,
    state: String,
    traces: Vec<TraceJson>,
}

#[derive(Serialize)]
struct TraceJson {
    method: Method,
    dim: Option<usize>,
    residuals: Option<Residuals>,
    t: Vec<f64>,
    phase: Vec<f64>,
    w: Vec<f64>,
}

fn phase(omega: f64, t: f64) -> f64 {
    omega * t / TAU
}

pub fn cmd_trace(cfg: &RunConfig) -> CliResult<()> {
    let spec = cfg.state.build()?;
    let times = period_grid(cfg.omega, cfg.grid_points)?;
    let traces = compute_traces(cfg, &spec, &cfg.methods(), &times)?;
    let sink = open_sink(cfg.output.as_deref())?;
    match cfg.format {
        Format::Csv => {
            let mut rows = Vec::new();
            for tr in &traces {
                for (&t, &w) in tr.times.iter().zip(&tr.values) {
                    rows.push(vec![
                        fmt_num(t),
                        fmt_num(phase(cfg.omega, t)),
                        fmt_num(w),
                        tr.method.to_string(),
                        fmt_opt_usize(tr.dim),
                        fmt_opt_num(tr.residuals.map(|r| r.unitarity)),
                        fmt_opt_num(tr.residuals.map(|r| r.trace)),
                    ]);
                }
            }
            write_csv(sink, &["t", "phase", "w", "method", "dim", "unitarity_residual", "trace_residual"], &rows)
        }
        Format::Json => {
            let doc = TraceDocument {
                command: "trace",
                config: cfg,
                state: spec.label(),
                traces: traces
                    .into_iter()
                    .map(|tr| TraceJson {
                        method: tr.method,
                        dim: tr.dim,
                        residuals: tr.residuals,
                        phase: tr.times.iter().map(|&t| phase(cfg.omega, t)).collect(),
                        t: tr.times,
                        w: tr.values,
                    })
                    .collect(),
            };
            write_json(sink, &doc)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    N,
    Nbar,
    Alpha,
    Beta,
}

impl FromStr for SweepParam {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "n" => Ok(Self::N),
            "nbar" => Ok(Self::Nbar),
            "alpha" | "alpha0" => Ok(Self::Alpha),
            "beta" => Ok(Self::Beta),
            other => Err(format!("cannot sweep '{other}' (expected N, nbar, alpha or beta)")),
        }
    }
}

impl SweepParam {
    fn name(self) -> &'static str {
        match self {
            SweepParam::N => "N",
            SweepParam::Nbar => "nbar",
            SweepParam::Alpha => "alpha",
            SweepParam::Beta => "beta",
        }
    }

    /// Family implied when none was given, and the families the parameter applies to.
    fn families(self) -> (Option<FamilyName>, &'static [FamilyName]) {
        use FamilyName::*;
        match self {
            SweepParam::N => (Some(Fock), &[Fock]),
            SweepParam::Nbar => (Some(Thermal), &[Thermal]),
            SweepParam::Alpha => (Some(Cat), &[Cat, Coherent]),
            SweepParam::Beta => (None, &[Coherent, Thermal, Fock, Vst, Cat, Custom]),
        }
    }
}

/// One sweep cell: a parameter value and the state/coupling it produces.
struct Cell {
    value: f64,
    state: StateParams,
    beta: f64,
}

fn sweep_cells(cfg: &RunConfig, param: SweepParam, values: &[f64]) -> CliResult<Vec<Cell>> {
    let (implied, allowed) = param.families();
    let mut base = cfg.state.clone();
    if !base.family_given {
        if let Some(f) = implied {
            base.family = f;
        }
    }
    if !allowed.contains(&base.family) {
        return Err(config_err(format!("sweeping {} does not apply to the {:?} family", param.name(), base.family)));
    }
    values
        .iter()
        .map(|&value| {
            let mut state = base.clone();
            let mut beta = cfg.beta;
            match param {
                SweepParam::N => {
                    if value < 0.0 || value.fract() != 0.0 {
                        return Err(config_err(format!("N must be a non-negative integer, got {value}")));
                    }
                    state.n = value as usize;
                }
                SweepParam::Nbar => state.nbar = value,
                SweepParam::Alpha => state.alpha = value,
                SweepParam::Beta => beta = value,
            }
            state.build()?;
            if !beta.is_finite() {
                return Err(config_err("beta must be finite"));
            }
            Ok(Cell { value, state, beta })
        })
        .collect()
}

#[derive(Serialize)]
struct ScanRow {
    index: usize,
    value: f64,
    verdict: &'static str,
    report: ViolationReport,
}

#[derive(Serialize)]
struct ScanDocument<'a> {
    command: &'static str,
    config: &'a RunConfig,
    parameter: &'static str,
    values: Vec<f64>,
    rows: Vec<ScanRow>,
}

pub fn cmd_scan(cfg: &RunConfig, file: &FileConfig, sweep: Option<String>, values: Option<String>) -> CliResult<()> {
    let param: SweepParam =
        sweep.or(file.get("sweep")?).ok_or_else(|| config_err("scan needs --sweep"))?.parse().map_err(config_err)?;
    let values = parse_values(&values.or(file.get("values")?).ok_or_else(|| config_err("scan needs --values"))?)?;
    let cells = sweep_cells(cfg, param, &values)?;
    let methods = cfg.methods();
    if methods.contains(&Method::Analytic) && cells.iter().any(|c| c.state.family == FamilyName::Custom) {
        return Err(config_err("method analytic has no closed form for custom densities"));
    }
    let opts = cfg.scan_options();

    let jobs: Vec<(usize, &Cell, Method)> =
        cells.iter().enumerate().flat_map(|(i, c)| methods.iter().map(move |&m| (i, c, m))).collect();
    // collect keeps sweep order whatever the completion order
    let results: Vec<CliResult<ScanRow>> = jobs
        .par_iter()
        .map(|&(index, cell, method)| {
            let spec = cell.state.build()?;
            let report = scan_period(&spec, cell.beta, cfg.omega, method, &opts)?;
            Ok(ScanRow { index, value: cell.value, verdict: classify(&report).as_str(), report })
        })
        .collect();
    let rows = results.into_iter().collect::<CliResult<Vec<_>>>()?;

    let sink = open_sink(cfg.output.as_deref())?;
    match cfg.format {
        Format::Csv => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let rep = &r.report;
                    vec![
                        r.index.to_string(),
                        param.name().to_string(),
                        fmt_num(r.value),
                        rep.family.clone(),
                        fmt_num(rep.beta),
                        fmt_num(rep.omega),
                        rep.method.to_string(),
                        fmt_num(rep.max_w),
                        fmt_num(rep.argmax_t),
                        fmt_num(phase(rep.omega, rep.argmax_t)),
                        fmt_num(rep.margin),
                        fmt_num(rep.decision_margin),
                        rep.violated.to_string(),
                        r.verdict.to_string(),
                        fmt_opt_usize(rep.dim),
                        fmt_opt_num(rep.residuals.map(|x| x.unitarity)),
                        fmt_opt_num(rep.residuals.map(|x| x.trace)),
                    ]
                })
                .collect();
            write_csv(
                sink,
                &[
                    "index",
                    "parameter",
                    "value",
                    "family",
                    "beta",
                    "omega",
                    "method",
                    "max_w",
                    "argmax_t",
                    "argmax_phase",
                    "margin",
                    "decision_margin",
                    "violated",
                    "verdict",
                    "dim",
                    "unitarity_residual",
                    "trace_residual",
                ],
                &table,
            )
        }
        Format::Json => {
            write_json(sink, &ScanDocument { command: "scan", config: cfg, parameter: param.name(), values, rows })
        }
    }
}

pub const FOCK_FIGURE_LEVELS: [usize; 4] = [0, 1, 10, 15];
pub const CAT_FIGURE_AMPLITUDES: [f64; 4] = [0.0, 1.0, 2.0, 5.0];

#[derive(Serialize)]
struct Series {
    label: String,
    state: String,
    dim: Option<usize>,
    residuals: Option<Residuals>,
    w: Vec<f64>,
}

#[derive(Serialize)]
struct FigureDocument<'a> {
    command: &'static str,
    figure: &'static str,
    config: &'a RunConfig,
    method: Method,
    t: Vec<f64>,
    phase: Vec<f64>,
    bound: f64,
    series: Vec<Series>,
}

/// Writes `fig1` (Fock levels) and `fig2` (cat amplitudes) into `dir`. Returns the paths.
pub fn cmd_figures(cfg: &RunConfig, file: &FileConfig, output_dir: Option<PathBuf>) -> CliResult<Vec<PathBuf>> {
    let dir = match output_dir {
        Some(d) => d,
        None => file.get::<PathBuf>("output_dir")?.unwrap_or_else(|| PathBuf::from(".")),
    };
    std::fs::create_dir_all(&dir)?;
    let method = match cfg.method {
        MethodChoice::Analytic => Method::Analytic,
        MethodChoice::GTrace => Method::GTrace,
        MethodChoice::Joint => Method::Joint,
        MethodChoice::All => return Err(config_err("figures take a single method")),
    };
    let times = period_grid(cfg.omega, cfg.grid_points)?;

    let fock: Vec<(String, StateParams)> = FOCK_FIGURE_LEVELS
        .iter()
        .map(|&n| (format!("w_N{n}"), StateParams { family: FamilyName::Fock, n, ..cfg.state.clone() }))
        .collect();
    let cat: Vec<(String, StateParams)> = CAT_FIGURE_AMPLITUDES
        .iter()
        .map(|&a| (format!("w_alpha{a}"), StateParams { family: FamilyName::Cat, alpha: a, ..cfg.state.clone() }))
        .collect();

    let mut written = Vec::new();
    for (name, members) in [("fig1", fock), ("fig2", cat)] {
        let series: Vec<CliResult<Series>> = members
            .par_iter()
            .map(|(label, state)| {
                let spec = state.build()?;
                let tr = compute_traces(cfg, &spec, &[method], &times)?.remove(0);
                Ok(Series {
                    label: label.clone(),
                    state: spec.label(),
                    dim: tr.dim,
                    residuals: tr.residuals,
                    w: tr.values,
                })
            })
            .collect();
        let series = series.into_iter().collect::<CliResult<Vec<_>>>()?;
        let ext = match cfg.format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        let path = dir.join(format!("{name}.{ext}"));
        write_figure(&path, cfg, name, method, &times, series)?;
        written.push(path);
    }
    Ok(written)
}

fn write_figure(
    path: &Path,
    cfg: &RunConfig,
    name: &'static str,
    method: Method,
    times: &[f64],
    series: Vec<Series>,
) -> CliResult<()> {
    let sink = open_sink(Some(path))?;
    match cfg.format {
        Format::Csv => {
            let mut header = vec!["t", "phase"];
            header.extend(series.iter().map(|s| s.label.as_str()));
            header.push("bound");
            let rows: Vec<Vec<String>> = times
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    let mut row = vec![fmt_num(t), fmt_num(phase(cfg.omega, t))];
                    row.extend(series.iter().map(|s| fmt_num(s.w[i])));
                    row.push(fmt_num(1.0));
                    row
                })
                .collect();
            write_csv(sink, &header, &rows)
        }
        Format::Json => write_json(
            sink,
            &FigureDocument {
                command: "figures",
                figure: name,
                config: cfg,
                method,
                phase: times.iter().map(|&t| phase(cfg.omega, t)).collect(),
                t: times.to_vec(),
                bound: 1.0,
                series,
            },
        ),
    }
}
