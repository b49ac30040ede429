//! Run configuration: flags layered over an optional `key = value` file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use ncwitness_core::trace::DEFAULT_GRID_POINTS;
use ncwitness_core::{FockMatrix, Method, OscillatorStateSpec, ScanOptions, TruncationPolicy, C64};
use serde::Serialize;

#[cfg(test)]
use crate::error::CliError;
use crate::error::{config_err, CliResult};

/// Caps the worker count regardless of `--workers`.
pub const MAX_WORKERS_ENV: &str = "NCWITNESS_MAX_WORKERS";

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// Flat `key = value` file; flags override its entries
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// coherent, thermal, fock, vst, cat or custom
    #[arg(long)]
    pub family: Option<String>,
    /// Coherent or cat amplitude (real part)
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Imaginary part of the coherent amplitude
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_im: Option<f64>,
    /// Thermal mean occupation
    #[arg(long)]
    pub nbar: Option<f64>,
    /// Fock level
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// JSON density matrix (rows of numbers or [re, im] pairs) for the custom family
    #[arg(long)]
    pub density: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega0: Option<f64>,
    /// analytic, g_trace, joint or all
    #[arg(long)]
    pub method: Option<String>,
    /// Samples over one period (>= 3)
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub initial_dim: Option<usize>,
    #[arg(long)]
    pub max_dim: Option<usize>,
    #[arg(long)]
    pub tail_tolerance: Option<f64>,
    /// Overrides the per-method violation margin
    #[arg(long)]
    pub decision_margin: Option<f64>,
    /// Use the full two-sector propagator for the joint method
    #[arg(long)]
    pub naive_joint: bool,
    /// csv or json
    #[arg(long)]
    pub format: Option<String>,
    /// Output file (stdout when absent)
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    pub workers: Option<usize>,
}

const KNOWN_KEYS: &[&str] = &[
    "family",
    "alpha",
    "alpha_im",
    "nbar",
    "n",
    "density",
    "beta",
    "omega",
    "omega0",
    "method",
    "grid_points",
    "initial_dim",
    "max_dim",
    "tail_tolerance",
    "decision_margin",
    "naive_joint",
    "format",
    "output",
    "workers",
    "sweep",
    "values",
    "output_dir",
];

/// Parsed config file. Keys are normalized to `snake_case`.
#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    entries: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("config line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(config_err(format!("config line {}: unknown key '{key}'", lineno + 1)));
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.entries
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| config_err(format!("config key '{key}' = '{v}': {e}"))))
            .transpose()
    }
}

fn layer<T: FromStr>(flag: Option<T>, file: &FileConfig, key: &str) -> CliResult<Option<T>>
where
    T::Err: fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Coherent,
    Thermal,
    Fock,
    Vst,
    Cat,
    Custom,
}

impl FromStr for FamilyName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "coherent" => Ok(Self::Coherent),
            "thermal" => Ok(Self::Thermal),
            "fock" => Ok(Self::Fock),
            "vst" | "vacuum_subtracted_thermal" => Ok(Self::Vst),
            "cat" => Ok(Self::Cat),
            "custom" => Ok(Self::Custom),
            other => Err(format!("unknown family '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    Analytic,
    GTrace,
    Joint,
    All,
}

impl FromStr for MethodChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "analytic" => Ok(Self::Analytic),
            "g_trace" | "gtrace" => Ok(Self::GTrace),
            "joint" => Ok(Self::Joint),
            "all" => Ok(Self::All),
            other => Err(format!("unknown method '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format '{other}'")),
        }
    }
}

/// Parameters of a state family; irrelevant entries are ignored by [`StateParams::build`].
#[derive(Clone, Debug, Serialize)]
pub struct StateParams {
    pub family: FamilyName,
    pub alpha: f64,
    pub alpha_im: f64,
    pub nbar: f64,
    pub n: usize,
    pub density: Option<PathBuf>,
    #[serde(skip)]
    pub custom: Option<FockMatrix>,
    /// Whether the family was set explicitly (a sweep may otherwise imply one).
    #[serde(skip)]
    pub family_given: bool,
}

impl StateParams {
    pub fn build(&self) -> CliResult<OscillatorStateSpec> {
        Ok(match self.family {
            FamilyName::Coherent => OscillatorStateSpec::coherent(C64::new(self.alpha, self.alpha_im))?,
            FamilyName::Thermal => OscillatorStateSpec::thermal(self.nbar)?,
            FamilyName::Fock => OscillatorStateSpec::fock(self.n),
            FamilyName::Vst => OscillatorStateSpec::vacuum_subtracted_thermal(),
            FamilyName::Cat => OscillatorStateSpec::cat(self.alpha)?,
            FamilyName::Custom => {
                let rho = self.custom.clone().ok_or_else(|| config_err("custom family needs --density"))?;
                OscillatorStateSpec::custom(rho).map_err(|e| config_err(e.to_string()))?
            }
        })
    }
}

/// Fully resolved settings shared by every subcommand.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub state: StateParams,
    pub beta: f64,
    pub omega: f64,
    pub omega0: f64,
    pub method: MethodChoice,
    pub grid_points: usize,
    pub policy: TruncationPolicy,
    pub decision_margin: Option<f64>,
    pub naive_joint: bool,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub workers: usize,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> CliResult<(Self, FileConfig)> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let named: Option<FamilyName> =
            layer(args.family.clone(), &file, "family")?.map(|s: String| s.parse().map_err(config_err)).transpose()?;
        let family = named.unwrap_or(FamilyName::Coherent);
        let density: Option<PathBuf> = layer(args.density.clone(), &file, "density")?;
        let custom = match (family, &density) {
            (FamilyName::Custom, Some(p)) => Some(load_density(p)?),
            (FamilyName::Custom, None) => return Err(config_err("custom family needs --density")),
            _ => None,
        };
        let state = StateParams {
            family,
            alpha: layer(args.alpha, &file, "alpha")?.unwrap_or(0.0),
            alpha_im: layer(args.alpha_im, &file, "alpha_im")?.unwrap_or(0.0),
            nbar: layer(args.nbar, &file, "nbar")?.unwrap_or(1.0),
            n: layer(args.n, &file, "n")?.unwrap_or(0),
            density,
            custom,
            family_given: named.is_some(),
        };

        let method = match layer(args.method.clone(), &file, "method")? {
            Some(s) => s.parse::<MethodChoice>().map_err(config_err)?,
            None if family == FamilyName::Custom => MethodChoice::GTrace,
            None => MethodChoice::Analytic,
        };
        if method == MethodChoice::Analytic && family == FamilyName::Custom {
            return Err(config_err("method analytic has no closed form for custom densities"));
        }
        let grid_points = layer(args.grid_points, &file, "grid_points")?.unwrap_or(DEFAULT_GRID_POINTS);
        if grid_points < 3 {
            return Err(config_err(format!("grid_points must be >= 3, got {grid_points}")));
        }
        let defaults = TruncationPolicy::default();
        let policy = TruncationPolicy::new(
            layer(args.initial_dim, &file, "initial_dim")?.unwrap_or(defaults.initial_dim),
            layer(args.tail_tolerance, &file, "tail_tolerance")?.unwrap_or(defaults.tail_tolerance),
            layer(args.max_dim, &file, "max_dim")?.unwrap_or(defaults.max_dim),
            defaults.growth_factor,
        )?;
        let format = match layer(args.format.clone(), &file, "format")? {
            Some(s) => s.parse::<Format>().map_err(config_err)?,
            None => Format::Csv,
        };
        let beta = layer(args.beta, &file, "beta")?.unwrap_or(0.5);
        let omega = layer(args.omega, &file, "omega")?.unwrap_or(1.0);
        let omega0 = layer(args.omega0, &file, "omega0")?.unwrap_or(1.0);
        for (name, v) in [("beta", beta), ("omega0", omega0)] {
            if !v.is_finite() {
                return Err(config_err(format!("{name} must be finite")));
            }
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(config_err(format!("omega must be positive, got {omega}")));
        }
        let decision_margin = layer(args.decision_margin, &file, "decision_margin")?;
        if let Some(m) = decision_margin {
            if !(m >= 0.0 && m.is_finite()) {
                return Err(config_err(format!("decision_margin must be non-negative, got {m}")));
            }
        }
        let naive_joint = args.naive_joint || file.get::<bool>("naive_joint")?.unwrap_or(false);
        let workers = resolve_workers(layer(args.workers, &file, "workers")?)?;

        let cfg = RunConfig {
            state,
            beta,
            omega,
            omega0,
            method,
            grid_points,
            policy,
            decision_margin,
            naive_joint,
            format,
            output: layer(args.output.clone(), &file, "output")?,
            workers,
        };
        // surface domain errors (negative nbar, ...) as config errors up front
        cfg.state.build()?;
        Ok((cfg, file))
    }

    /// Concrete methods, in output order. `all` skips the closed form for custom densities.
    pub fn methods(&self) -> Vec<Method> {
        match self.method {
            MethodChoice::Analytic => vec![Method::Analytic],
            MethodChoice::GTrace => vec![Method::GTrace],
            MethodChoice::Joint => vec![Method::Joint],
            MethodChoice::All if self.state.family == FamilyName::Custom => vec![Method::GTrace, Method::Joint],
            MethodChoice::All => vec![Method::Analytic, Method::GTrace, Method::Joint],
        }
    }

    pub fn scan_options(&self) -> ScanOptions {
        ScanOptions {
            grid_points: self.grid_points,
            policy: self.policy,
            omega0: self.omega0,
            decision_margin: self.decision_margin,
            naive_joint: self.naive_joint,
            ..ScanOptions::default()
        }
    }
}

fn resolve_workers(requested: Option<usize>) -> CliResult<usize> {
    if requested == Some(0) {
        return Err(config_err("workers must be >= 1"));
    }
    let default = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let mut workers = requested.unwrap_or(default);
    if let Ok(raw) = std::env::var(MAX_WORKERS_ENV) {
        let cap: usize = raw
            .trim()
            .parse()
            .map_err(|_| config_err(format!("{MAX_WORKERS_ENV}='{raw}' is not a positive integer")))?;
        if cap == 0 {
            return Err(config_err(format!("{MAX_WORKERS_ENV} must be >= 1")));
        }
        workers = workers.min(cap);
    }
    Ok(workers)
}

fn load_density(path: &Path) -> CliResult<FockMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read density {}: {e}", path.display())))?;
    let rows: Vec<Vec<serde_json::Value>> =
        serde_json::from_str(&text).map_err(|e| config_err(format!("density {}: {e}", path.display())))?;
    let dim = rows.len();
    if dim == 0 || rows.iter().any(|r| r.len() != dim) {
        return Err(config_err("density must be a non-empty square matrix"));
    }
    let entry = |v: &serde_json::Value| -> CliResult<C64> {
        match v {
            serde_json::Value::Number(x) => Ok(C64::new(x.as_f64().unwrap_or(f64::NAN), 0.0)),
            serde_json::Value::Array(p) if p.len() == 2 => match (p[0].as_f64(), p[1].as_f64()) {
                (Some(re), Some(im)) => Ok(C64::new(re, im)),
                _ => Err(config_err("density entries must be numbers")),
            },
            _ => Err(config_err("density entries must be numbers or [re, im] pairs")),
        }
    };
    let mut data = nalgebra::DMatrix::zeros(dim, dim);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            data[(i, j)] = entry(v)?;
        }
    }
    FockMatrix::density(data).map_err(|e| config_err(format!("density {}: {e}", path.display())))
}

/// Parses a sweep value list: `a,b,c`, inclusive integer range `lo..hi`, or `start:stop:count`.
pub fn parse_values(spec: &str) -> CliResult<Vec<f64>> {
    let spec = spec.trim();
    let num = |s: &str| -> CliResult<f64> {
        s.trim().parse::<f64>().map_err(|_| config_err(format!("'{s}' is not a number")))
    };
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: i64 = lo.trim().parse().map_err(|_| config_err(format!("range start '{lo}' is not an integer")))?;
        let hi: i64 = hi.trim().parse().map_err(|_| config_err(format!("range end '{hi}' is not an integer")))?;
        if hi < lo {
            return Err(config_err(format!("empty range {lo}..{hi}")));
        }
        return Ok((lo..=hi).map(|v| v as f64).collect());
    }
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() == 3 {
        let (start, stop) = (num(parts[0])?, num(parts[1])?);
        let count: usize = parts[2].trim().parse().map_err(|_| config_err("linspace count must be an integer"))?;
        return match count {
            0 => Err(config_err("linspace count must be >= 1")),
            1 => Ok(vec![start]),
            _ => Ok((0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect()),
        };
    }
    if parts.len() != 1 {
        return Err(config_err(format!("cannot parse values '{spec}'")));
    }
    let values = spec.split(',').map(num).collect::<CliResult<Vec<_>>>()?;
    if values.is_empty() {
        return Err(config_err("no sweep values"));
    }
    Ok(values)
}
