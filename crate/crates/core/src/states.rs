//! Oscillator state families and the qubit probe state.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Result, WitnessError};
use crate::fock::{FockMatrix, MatrixKind, C64};
use crate::quadrature::gauss_laguerre;

/// Truncated trace a state must keep before renormalization.
pub const MIN_TRUNCATED_TRACE: f64 = 1.0 - 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum StateFamily {
    Coherent {
        alpha: C64,
    },
    Thermal {
        nbar: f64,
    },
    Fock {
        n: usize,
    },
    /// Unit-mean thermal state with the vacuum removed: weights `2^{-N}`, `N >= 1`.
    VacuumSubtractedThermal,
    /// `(|a> + |-a>)/sqrt(2(1 + e^{-2a^2}))` with real `a`.
    Cat {
        alpha: f64,
    },
    CustomDensity(FockMatrix),
}

/// What Glauber's criterion says about a family. `Unknown` only for custom input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalClaim {
    Classical,
    Nonclassical,
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OscillatorStateSpec {
    family: StateFamily,
}

/// Fock-basis representation of a state before truncation.
enum Content {
    Pure(Vec<C64>),
    Diagonal(Vec<f64>),
    Matrix(DMatrix<C64>),
}

impl OscillatorStateSpec {
    pub fn coherent(alpha: C64) -> Result<Self> {
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(WitnessError::Domain("coherent amplitude must be finite".into()));
        }
        Ok(Self { family: StateFamily::Coherent { alpha } })
    }

    pub fn thermal(nbar: f64) -> Result<Self> {
        if !(nbar >= 0.0 && nbar.is_finite()) {
            return Err(WitnessError::Domain(format!("thermal mean occupation must be >= 0, got {nbar}")));
        }
        Ok(Self { family: StateFamily::Thermal { nbar } })
    }

    pub fn fock(n: usize) -> Self {
        Self { family: StateFamily::Fock { n } }
    }

    pub fn vacuum_subtracted_thermal() -> Self {
        Self { family: StateFamily::VacuumSubtractedThermal }
    }

    pub fn cat(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(WitnessError::Domain("cat amplitude must be finite".into()));
        }
        Ok(Self { family: StateFamily::Cat { alpha } })
    }

    /// Any density-tagged matrix.
    pub fn custom(rho: FockMatrix) -> Result<Self> {
        if rho.kind() != MatrixKind::Density {
            return Err(WitnessError::ContractViolation("custom state must be a density matrix".into()));
        }
        Ok(Self { family: StateFamily::CustomDensity(rho) })
    }

    pub fn family(&self) -> &StateFamily {
        &self.family
    }

    pub fn classical_claim(&self) -> ClassicalClaim {
        match &self.family {
            StateFamily::Coherent { .. } | StateFamily::Thermal { .. } => ClassicalClaim::Classical,
            StateFamily::Fock { n: 0 } => ClassicalClaim::Classical,
            StateFamily::Fock { .. } => ClassicalClaim::Nonclassical,
            StateFamily::VacuumSubtractedThermal => ClassicalClaim::Nonclassical,
            StateFamily::Cat { alpha } if *alpha == 0.0 => ClassicalClaim::Classical,
            StateFamily::Cat { .. } => ClassicalClaim::Nonclassical,
            StateFamily::CustomDensity(_) => ClassicalClaim::Unknown,
        }
    }

    /// Short label used in reports and output files.
    pub fn label(&self) -> String {
        self.to_string()
    }

    fn content(&self, dim: usize) -> Content {
        match &self.family {
            StateFamily::Coherent { alpha } => Content::Pure(coherent_amplitudes(*alpha, dim)),
            StateFamily::Thermal { nbar } => {
                let ratio = nbar / (nbar + 1.0);
                let mut p = 1.0 / (nbar + 1.0);
                let pops = (0..dim)
                    .map(|_| {
                        let cur = p;
                        p *= ratio;
                        cur
                    })
                    .collect();
                Content::Diagonal(pops)
            }
            StateFamily::Fock { n } => {
                let pops = (0..dim).map(|k| if k == *n { 1.0 } else { 0.0 }).collect();
                Content::Diagonal(pops)
            }
            StateFamily::VacuumSubtractedThermal => {
                let pops = (0..dim).map(|k| if k == 0 { 0.0 } else { 0.5f64.powi(k as i32) }).collect();
                Content::Diagonal(pops)
            }
            StateFamily::Cat { alpha } => Content::Pure(cat_amplitudes(*alpha, dim)),
            StateFamily::CustomDensity(rho) => {
                let n = rho.dim().min(dim);
                let mut m = DMatrix::zeros(dim, dim);
                m.view_mut((0, 0), (n, n)).copy_from(&rho.matrix().view((0, 0), (n, n)));
                Content::Matrix(m)
            }
        }
    }

    /// Untruncated Fock populations of levels `0..levels`.
    pub fn populations(&self, levels: usize) -> Vec<f64> {
        match self.content(levels) {
            Content::Pure(amps) => amps.iter().map(|c| c.norm_sqr()).collect(),
            Content::Diagonal(p) => p,
            Content::Matrix(m) => m.diagonal().iter().map(|z| z.re).collect(),
        }
    }

    /// Population mass in levels `n >= 0.9 * dim`, including everything beyond `dim`.
    pub fn tail_mass(&self, dim: usize) -> f64 {
        let cutoff = (0.9 * dim as f64).ceil() as usize;
        let kept: f64 = self.populations(cutoff).iter().sum();
        (1.0 - kept).max(0.0)
    }
}

impl fmt::Display for OscillatorStateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            StateFamily::Coherent { alpha } => write!(f, "coherent(alpha={}{:+}i)", alpha.re, alpha.im),
            StateFamily::Thermal { nbar } => write!(f, "thermal(nbar={nbar})"),
            StateFamily::Fock { n } => write!(f, "fock(N={n})"),
            StateFamily::VacuumSubtractedThermal => write!(f, "vacuum_subtracted_thermal"),
            StateFamily::Cat { alpha } => write!(f, "cat(alpha={alpha})"),
            StateFamily::CustomDensity(rho) => write!(f, "custom(dim={})", rho.dim()),
        }
    }
}

/// `<n|alpha>` for `n < dim`.
pub fn coherent_amplitudes(alpha: C64, dim: usize) -> Vec<C64> {
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    let mut out = Vec::with_capacity(dim);
    for n in 0..dim {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        out.push(c);
    }
    out
}

/// Normalized cat amplitudes, `∝ (1 + (-1)^n) alpha^n / sqrt(n!)`.
fn cat_amplitudes(alpha: f64, dim: usize) -> Vec<C64> {
    let norm = 1.0 / (2.0 * (1.0 + (-2.0 * alpha * alpha).exp())).sqrt();
    coherent_amplitudes(C64::new(alpha, 0.0), dim)
        .into_iter()
        .enumerate()
        .map(|(n, c)| if n % 2 == 0 { c * (2.0 * norm) } else { C64::new(0.0, 0.0) })
        .collect()
}

fn finish_density(mut m: DMatrix<C64>, dim: usize) -> Result<FockMatrix> {
    let trace = m.trace().re;
    if trace < MIN_TRUNCATED_TRACE {
        return Err(WitnessError::TruncationFailure { dim, residual: 1.0 - trace });
    }
    m /= C64::new(trace, 0.0);
    FockMatrix::density(m)
}

/// Density matrix of `spec` on `dim` levels, renormalized to unit trace.
pub fn build_density(spec: &OscillatorStateSpec, dim: usize) -> Result<FockMatrix> {
    if dim == 0 {
        return Err(WitnessError::InvalidDimension { dim, reason: "dimension must be at least 1" });
    }
    let m = match spec.content(dim) {
        Content::Pure(amps) => DMatrix::from_fn(dim, dim, |i, j| amps[i] * amps[j].conj()),
        Content::Diagonal(p) => {
            DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(dim, p.into_iter().map(|x| C64::new(x, 0.0))))
        }
        Content::Matrix(m) => m,
    };
    finish_density(m, dim)
}

/// Non-negative weighted atoms `{(alpha_i, w_i)}` with `sum w_i = 1`: a discrete P measure.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSamples {
    atoms: Vec<(C64, f64)>,
}

impl WeightedSamples {
    pub fn new(atoms: Vec<(C64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(WitnessError::Domain("sample set is empty".into()));
        }
        if atoms.iter().any(|(a, w)| !(*w >= 0.0 && w.is_finite() && a.re.is_finite() && a.im.is_finite())) {
            return Err(WitnessError::Domain("weights must be finite and non-negative".into()));
        }
        let total: f64 = atoms.iter().map(|p| p.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(WitnessError::Domain(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { atoms })
    }

    pub fn atom(alpha: C64) -> Self {
        Self { atoms: vec![(alpha, 1.0)] }
    }

    pub fn atoms(&self) -> &[(C64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|p| p.1).sum()
    }
}

/// Node counts for the thermal P quadrature (Gauss-Laguerre radial × uniform angular).
///
/// The default is accurate to ~1e-14 for `beta^2 nbar <= 10`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThermalQuadrature {
    pub radial: usize,
    pub angular: usize,
}

impl Default for ThermalQuadrature {
    fn default() -> Self {
        Self { radial: 96, angular: 128 }
    }
}

pub fn classical_p_sampler(spec: &OscillatorStateSpec) -> Result<WeightedSamples> {
    classical_p_sampler_with(spec, ThermalQuadrature::default())
}

/// Atoms or quadrature nodes for families whose P distribution is a probability measure.
pub fn classical_p_sampler_with(spec: &OscillatorStateSpec, order: ThermalQuadrature) -> Result<WeightedSamples> {
    let zero = C64::new(0.0, 0.0);
    match spec.family() {
        StateFamily::Coherent { alpha } => Ok(WeightedSamples::atom(*alpha)),
        StateFamily::Fock { n: 0 } => Ok(WeightedSamples::atom(zero)),
        StateFamily::Cat { alpha } if *alpha == 0.0 => Ok(WeightedSamples::atom(zero)),
        StateFamily::Thermal { nbar } if *nbar == 0.0 => Ok(WeightedSamples::atom(zero)),
        StateFamily::Thermal { nbar } => {
            // P_th d^2alpha = e^{-u} du dtheta / 2pi with u = |alpha|^2 / nbar
            let radial = gauss_laguerre(order.radial.max(1));
            let m = order.angular.max(1);
            let mut atoms = Vec::with_capacity(radial.len() * m);
            for &(u, wu) in &radial {
                let r = (nbar * u).sqrt();
                for k in 0..m {
                    let theta = 2.0 * PI * k as f64 / m as f64;
                    atoms.push((C64::from_polar(r, theta), wu / m as f64));
                }
            }
            WeightedSamples::new(atoms)
        }
        _ => Err(WitnessError::UnsupportedFamily(format!("{spec}: P distribution is not a probability measure"))),
    }
}

/// `sum_i w_i |alpha_i><alpha_i|` on `dim` levels, renormalized.
pub fn mixture_density(samples: &WeightedSamples, dim: usize) -> Result<FockMatrix> {
    if dim == 0 {
        return Err(WitnessError::InvalidDimension { dim, reason: "dimension must be at least 1" });
    }
    let mut m = DMatrix::zeros(dim, dim);
    for &(alpha, w) in samples.atoms() {
        let amps = coherent_amplitudes(alpha, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] += amps[i] * amps[j].conj() * w;
            }
        }
    }
    finish_density(m, dim)
}

/// Qubit initial state `[[z0, w0], [w0*, 1 - z0]]` in the `sigma_z` basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitInit {
    z0: f64,
    w0: C64,
}

impl QubitInit {
    pub fn new(z0: f64, w0: C64) -> Result<Self> {
        if !(0.0..=1.0).contains(&z0) {
            return Err(WitnessError::Domain(format!("z0 = {z0} outside [0, 1]")));
        }
        if w0.norm_sqr() > z0 * (1.0 - z0) + 1e-15 {
            return Err(WitnessError::Domain("qubit state is not positive semidefinite".into()));
        }
        Ok(Self { z0, w0 })
    }

    /// `|+x>`: maximal coherence.
    pub fn plus_x() -> Self {
        Self { z0: 0.5, w0: C64::new(0.5, 0.0) }
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn w0(&self) -> C64 {
        self.w0
    }

    pub fn density(&self) -> Matrix2<C64> {
        Matrix2::new(C64::new(self.z0, 0.0), self.w0, self.w0.conj(), C64::new(1.0 - self.z0, 0.0))
    }
}

impl Default for QubitInit {
    fn default() -> Self {
        Self::plus_x()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_specs() -> Vec<OscillatorStateSpec> {
        vec![
            OscillatorStateSpec::coherent(C64::new(1.2, -0.7)).unwrap(),
            OscillatorStateSpec::thermal(0.0).unwrap(),
            OscillatorStateSpec::thermal(1.5).unwrap(),
            OscillatorStateSpec::fock(0),
            OscillatorStateSpec::fock(4),
            OscillatorStateSpec::vacuum_subtracted_thermal(),
            OscillatorStateSpec::cat(0.0).unwrap(),
            OscillatorStateSpec::cat(1.7).unwrap(),
        ]
    }

    #[test]
    fn claims_follow_family() {
        use ClassicalClaim::*;
        let claims: Vec<_> = all_specs().iter().map(|s| s.classical_claim()).collect();
        assert_eq!(
            claims,
            vec![Classical, Classical, Classical, Classical, Nonclassical, Nonclassical, Classical, Nonclassical]
        );
        let rho = build_density(&OscillatorStateSpec::fock(1), 3).unwrap();
        assert_eq!(OscillatorStateSpec::custom(rho).unwrap().classical_claim(), Unknown);
    }

    #[test]
    fn constructor_domains() {
        assert!(OscillatorStateSpec::thermal(-0.1).is_err());
        assert!(OscillatorStateSpec::thermal(f64::NAN).is_err());
        assert!(OscillatorStateSpec::cat(f64::INFINITY).is_err());
        let general = FockMatrix::identity(2).unwrap();
        assert!(OscillatorStateSpec::custom(general).is_err());
    }

    #[test]
    fn densities_are_valid() {
        for spec in all_specs() {
            let rho = build_density(&spec, 48).unwrap();
            assert_eq!(rho.kind(), MatrixKind::Density);
            assert!((rho.trace().re - 1.0).abs() < 1e-12, "{spec}");
            assert!(rho.min_eigenvalue() >= -1e-10, "{spec}");
        }
    }

    #[test]
    fn fock_density_single_entry() {
        let rho = build_density(&OscillatorStateSpec::fock(2), 8).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let expected = if i == 2 && j == 2 { 1.0 } else { 0.0 };
                assert_eq!(rho.get(i, j), C64::new(expected, 0.0));
            }
        }
    }

    #[test]
    fn fock_level_outside_truncation_fails() {
        let err = build_density(&OscillatorStateSpec::fock(8), 8).unwrap_err();
        assert!(matches!(err, WitnessError::TruncationFailure { dim: 8, .. }));
    }

    #[test]
    fn unit_thermal_is_geometric() {
        let rho = build_density(&OscillatorStateSpec::thermal(1.0).unwrap(), 64).unwrap();
        for n in 0..40 {
            let expected = 0.5f64.powi(n as i32 + 1);
            assert!(((rho.get(n, n).re - expected) / expected).abs() < 1e-10);
        }
    }

    #[test]
    fn thermal_diagonal_formula() {
        let nbar = 2.3;
        let rho = build_density(&OscillatorStateSpec::thermal(nbar).unwrap(), 160).unwrap();
        for n in 0..60 {
            let expected = nbar.powi(n as i32) / (nbar + 1.0).powi(n as i32 + 1);
            assert!(((rho.get(n, n).re - expected) / expected).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn cat_at_zero_is_vacuum() {
        let cat = build_density(&OscillatorStateSpec::cat(0.0).unwrap(), 12).unwrap();
        let vac = build_density(&OscillatorStateSpec::fock(0), 12).unwrap();
        assert_eq!(cat, vac);
    }

    #[test]
    fn cat_has_only_even_levels() {
        let alpha = 2.0f64;
        let rho = build_density(&OscillatorStateSpec::cat(alpha).unwrap(), 40).unwrap();
        let norm2 = 1.0 / (2.0 * (1.0 + (-2.0 * alpha * alpha).exp()));
        let mut fact = 1.0;
        for n in 0..20 {
            if n > 0 {
                fact *= n as f64;
            }
            let expected =
                if n % 2 == 0 { 4.0 * norm2 * (-alpha * alpha).exp() * alpha.powi(2 * n as i32) / fact } else { 0.0 };
            assert!((rho.get(n, n).re - expected).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn tail_mass_of_vacuum_is_zero() {
        assert_eq!(OscillatorStateSpec::coherent(C64::new(0.0, 0.0)).unwrap().tail_mass(4), 0.0);
        let t = OscillatorStateSpec::thermal(1.0).unwrap().tail_mass(10);
        assert!((t - 0.5f64.powi(9)).abs() < 1e-15);
    }

    #[test]
    fn sampler_atoms_and_refusals() {
        let alpha = C64::new(0.3, 1.1);
        let s = classical_p_sampler(&OscillatorStateSpec::coherent(alpha).unwrap()).unwrap();
        assert_eq!(s.atoms(), &[(alpha, 1.0)]);
        let v = classical_p_sampler(&OscillatorStateSpec::fock(0)).unwrap();
        assert_eq!(v.atoms(), &[(C64::new(0.0, 0.0), 1.0)]);

        for spec in [
            OscillatorStateSpec::fock(1),
            OscillatorStateSpec::vacuum_subtracted_thermal(),
            OscillatorStateSpec::cat(1.0).unwrap(),
        ] {
            assert!(matches!(classical_p_sampler(&spec), Err(WitnessError::UnsupportedFamily(_))));
        }
    }

    #[test]
    fn thermal_sampler_weights_and_moment() {
        let s = classical_p_sampler(&OscillatorStateSpec::thermal(1.0).unwrap()).unwrap();
        assert!((s.total_weight() - 1.0).abs() < 1e-12);
        // <|alpha|^2>_P = nbar
        let m2: f64 = s.atoms().iter().map(|(a, w)| w * a.norm_sqr()).sum();
        assert!((m2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixture_of_one_atom_is_coherent_state() {
        let alpha = C64::new(-0.4, 0.9);
        let mix = mixture_density(&WeightedSamples::atom(alpha), 30).unwrap();
        let coh = build_density(&OscillatorStateSpec::coherent(alpha).unwrap(), 30).unwrap();
        assert!(mix.max_abs_diff(&coh) < 1e-15);
        assert!(WeightedSamples::new(vec![(alpha, 0.5)]).is_err());
        assert!(WeightedSamples::new(vec![(alpha, 1.5), (alpha, -0.5)]).is_err());
    }

    #[test]
    fn wide_dynamic_range_densities_validate() {
        let small = WeightedSamples::atom(C64::new(-0.0455, -0.1454));
        assert!(mixture_density(&small, 64).is_ok());
        let cat = OscillatorStateSpec::cat(5.0).unwrap();
        let rho = build_density(&cat, 256).unwrap();
        assert!(rho.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn qubit_init_validation() {
        assert!(QubitInit::new(0.5, C64::new(0.5, 0.0)).is_ok());
        assert!(QubitInit::new(0.5, C64::new(0.6, 0.0)).is_err());
        assert!(QubitInit::new(1.2, C64::new(0.0, 0.0)).is_err());
        let q = QubitInit::new(0.7, C64::new(0.1, -0.2)).unwrap();
        let d = q.density();
        assert_eq!(d[(0, 1)], C64::new(0.1, -0.2));
        assert_eq!(d[(1, 0)], C64::new(0.1, 0.2));
    }
}
