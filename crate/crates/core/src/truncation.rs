//! Choosing how many Fock levels a state needs.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WitnessError};
use crate::oracle::{GTraceOracle, WitnessSource};
use crate::states::{build_density, OscillatorStateSpec};
use crate::trace::period_grid;

/// Grid used for the convergence-under-doubling check.
const COARSE_POINTS: usize = 101;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub initial_dim: usize,
    /// Largest admissible population in the top 10% of levels, and largest
    /// admissible change of `|W(t)|` (sup over the coarse grid) when the dimension doubles.
    pub tail_tolerance: f64,
    pub max_dim: usize,
    pub growth_factor: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { initial_dim: 16, tail_tolerance: 1e-10, max_dim: 512, growth_factor: 2 }
    }
}

impl TruncationPolicy {
    pub fn new(initial_dim: usize, tail_tolerance: f64, max_dim: usize, growth_factor: usize) -> Result<Self> {
        let p = Self { initial_dim, tail_tolerance, max_dim, growth_factor };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial_dim < 2 {
            return Err(WitnessError::Domain(format!("initial_dim must be >= 2, got {}", self.initial_dim)));
        }
        if self.initial_dim > self.max_dim {
            return Err(WitnessError::Domain(format!(
                "initial_dim {} exceeds max_dim {}",
                self.initial_dim, self.max_dim
            )));
        }
        if !(self.tail_tolerance > 0.0 && self.tail_tolerance < 1.0) {
            return Err(WitnessError::Domain(format!(
                "tail_tolerance must lie in (0, 1), got {}",
                self.tail_tolerance
            )));
        }
        if self.growth_factor < 2 {
            return Err(WitnessError::Domain(format!("growth_factor must be >= 2, got {}", self.growth_factor)));
        }
        Ok(())
    }
}

fn coarse_trace(spec: &OscillatorStateSpec, beta: f64, dim: usize, times: &[f64]) -> Result<Vec<f64>> {
    let rho = build_density(spec, dim)?;
    let oracle = GTraceOracle::new(&rho, beta, 1.0)?;
    Ok(times.iter().map(|&t| oracle.witness(t)).collect())
}

/// Smallest tried dimension `d` whose tail population is below tolerance and for
/// which going to `2d` moves `|W(t)|` (g-trace, coarse grid, sup norm) by less than tolerance.
///
/// Candidates are `initial_dim * growth_factor^k`; the doubled check dimension must
/// also fit within `max_dim`.
pub fn adaptive_dim(spec: &OscillatorStateSpec, beta: f64, policy: &TruncationPolicy) -> Result<usize> {
    policy.validate()?;
    let times = period_grid(1.0, COARSE_POINTS)?;
    let tol = policy.tail_tolerance;
    let mut dim = policy.initial_dim;
    let mut residual = f64::INFINITY;
    let mut last_tried = dim;

    while dim <= policy.max_dim {
        last_tried = dim;
        let tail = spec.tail_mass(dim);
        if tail >= tol {
            residual = tail;
        } else if 2 * dim <= policy.max_dim {
            // densities that cannot be built at this size count as unconverged
            match (coarse_trace(spec, beta, dim, &times), coarse_trace(spec, beta, 2 * dim, &times)) {
                (Ok(here), Ok(doubled)) => {
                    residual = here.iter().zip(&doubled).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    if residual < tol {
                        return Ok(dim);
                    }
                }
                (Err(WitnessError::TruncationFailure { residual: r, .. }), _) => residual = r,
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        } else {
            break;
        }
        dim = match dim.checked_mul(policy.growth_factor) {
            Some(d) => d,
            None => break,
        };
    }
    Err(WitnessError::TruncationFailure { dim: last_tried, residual })
}
