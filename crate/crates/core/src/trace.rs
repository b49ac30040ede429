use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WitnessError};

/// Default number of samples over one oscillator period.
pub const DEFAULT_GRID_POINTS: usize = 2001;

/// How a witness value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Analytic,
    GTrace,
    Joint,
    Quadrature,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::GTrace => "g_trace",
            Method::Joint => "joint",
            Method::Quadrature => "quadrature",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceParams {
    pub beta: f64,
    pub omega: f64,
    pub family: String,
}

/// `|W(t)|` sampled on an ascending time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub method: Method,
    pub params: TraceParams,
}

impl WitnessTrace {
    pub fn max(&self) -> (f64, f64) {
        self.times
            .iter()
            .zip(&self.values)
            .fold((f64::NAN, f64::NEG_INFINITY), |best, (&t, &v)| if v > best.1 { (t, v) } else { best })
    }

    /// `max_i |self_i - other_i|`; the grids must coincide.
    pub fn max_deviation(&self, other: &WitnessTrace) -> f64 {
        assert_eq!(self.times.len(), other.times.len(), "traces sampled on different grids");
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn max_deviation_from(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.times.iter().zip(&self.values).map(|(&t, &v)| (v - f(t)).abs()).fold(0.0, f64::max)
    }
}

/// Oscillator period `2 pi / omega`.
pub fn period(omega: f64) -> f64 {
    TAU / omega
}

/// `points` uniform samples on `[0, 2 pi / omega]`, endpoints included.
pub fn period_grid(omega: f64, points: usize) -> Result<Vec<f64>> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(WitnessError::Domain(format!("omega must be positive, got {omega}")));
    }
    if points < 2 {
        return Err(WitnessError::Domain(format!("time grid needs at least 2 points, got {points}")));
    }
    let t_end = period(omega);
    let last = (points - 1) as f64;
    Ok((0..points).map(|k| if k + 1 == points { t_end } else { t_end * k as f64 / last }).collect())
}
