//! First-principles `|W(t)|` on a truncated Fock space.
//!
//! Two independent routes:
//!
//! * [`GTraceOracle`] evaluates the oscillator factor
//!   `g(t) = Tr{exp(-i H+ t) rho exp(i H- t)}` in the joint eigenbasis of the
//!   two displaced Hamiltonians, so after one setup each time point is `O(dim^2)`.
//! * [`JointOracle`] evolves the full qubit-oscillator density matrix under
//!   `H = (omega0/2) sz + omega a†a + omega beta (a + a†) sz`, traces out the
//!   oscillator and reads `w(t)` off the Pauli expectations. The default path
//!   uses the `sz` block structure; the naive path diagonalizes the full
//!   `2 dim` Hamiltonian.
//!
//! [`classical_quadrature_w`] integrates `f(alpha, t)` against a discrete
//! probability P measure.

use nalgebra::{DMatrix, Matrix2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{coherent_phase, half_angle_sin2};
use crate::error::{Result, WitnessError};
use crate::fock::{displaced_hamiltonian, FockMatrix, HermitianSpectrum, MatrixKind, Sector, C64};
use crate::states::{QubitInit, WeightedSamples};
use crate::trace::{Method, TraceParams, WitnessTrace};

pub const UNITARITY_THRESHOLD: f64 = 1e-10;
pub const TRACE_THRESHOLD: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub unitarity: f64,
    pub trace: f64,
}

impl Residuals {
    fn check(self) -> Result<Self> {
        if self.unitarity > UNITARITY_THRESHOLD
            || self.trace > TRACE_THRESHOLD
            || self.unitarity.is_nan()
            || self.trace.is_nan()
        {
            return Err(WitnessError::OracleRejection { unitarity: self.unitarity, trace: self.trace });
        }
        Ok(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub trace: WitnessTrace,
    pub dim_used: usize,
    pub residuals: Residuals,
}

/// Implemented by everything that can produce `|W(t)|` at an arbitrary time.
pub trait WitnessSource: Sync {
    fn method(&self) -> Method;
    fn witness(&self, t: f64) -> f64;
    fn dim(&self) -> Option<usize> {
        None
    }
    fn residuals(&self) -> Option<Residuals> {
        None
    }
}

/// `e^{8 beta^2 sin^2(omega t/2)}`: undoes the universal decay of the qubit coherence.
fn rescale(beta: f64, omega: f64, t: f64) -> f64 {
    (8.0 * beta * beta * half_angle_sin2(omega, t)).exp()
}

fn require_density(rho: &FockMatrix) -> Result<()> {
    if rho.kind() != MatrixKind::Density {
        return Err(WitnessError::ContractViolation("oracle input must be a density matrix".into()));
    }
    if rho.dim() < 2 {
        return Err(WitnessError::InvalidDimension { dim: rho.dim(), reason: "dimension must be at least 2" });
    }
    Ok(())
}

fn real_trace(m: &DMatrix<C64>) -> f64 {
    m.trace().re
}

/// Precomputed `g(t)` evaluator.
///
/// With `H± = V± diag(l±) V±^dagger`,
/// `g(t) = sum_jk e^{-i l+_j t} K_jk e^{i l-_k t}` where
/// `K_jk = (V+^dagger rho V-)_jk (V-^dagger V+)_kj`.
#[derive(Clone, Debug)]
pub struct GTraceOracle {
    beta: f64,
    omega: f64,
    dim: usize,
    plus: Vec<f64>,
    minus: Vec<f64>,
    kernel: DMatrix<C64>,
    residuals: Residuals,
}

impl GTraceOracle {
    pub fn new(rho: &FockMatrix, beta: f64, omega: f64) -> Result<Self> {
        require_density(rho)?;
        let dim = rho.dim();
        let hp = HermitianSpectrum::new(&displaced_hamiltonian(Sector::Plus, beta, omega, dim)?)?;
        let hm = HermitianSpectrum::new(&displaced_hamiltonian(Sector::Minus, beta, omega, dim)?)?;
        let (vp, vm) = (hp.eigenvectors(), hm.eigenvectors());

        let sandwich = vp.adjoint() * rho.matrix() * vm;
        let overlap = vm.adjoint() * vp;
        let kernel = DMatrix::from_fn(dim, dim, |j, k| sandwich[(j, k)] * overlap[(k, j)]);

        let tr = real_trace(rho.matrix());
        let conj_plus = real_trace(&(vp.adjoint() * rho.matrix() * vp));
        let conj_minus = real_trace(&(vm.adjoint() * rho.matrix() * vm));
        let g0 = kernel.iter().copied().sum::<C64>();
        let trace_defect =
            [(tr - 1.0).abs(), (conj_plus - tr).abs(), (conj_minus - tr).abs(), (g0 - C64::new(1.0, 0.0)).norm()]
                .into_iter()
                .fold(0.0, f64::max);
        let residuals =
            Residuals { unitarity: hp.unitarity_defect().max(hm.unitarity_defect()), trace: trace_defect }.check()?;

        Ok(Self {
            beta,
            omega,
            dim,
            plus: hp.eigenvalues().to_vec(),
            minus: hm.eigenvalues().to_vec(),
            kernel,
            residuals,
        })
    }

    pub fn g(&self, t: f64) -> C64 {
        let right: Vec<C64> = self.minus.iter().map(|&l| C64::from_polar(1.0, l * t)).collect();
        let mut total = C64::new(0.0, 0.0);
        for (j, &l) in self.plus.iter().enumerate() {
            let row = self.kernel.row(j);
            let inner: C64 = row.iter().zip(&right).map(|(k, r)| k * r).sum();
            total += C64::from_polar(1.0, -l * t) * inner;
        }
        total
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn residuals(&self) -> Residuals {
        self.residuals
    }
}

impl WitnessSource for GTraceOracle {
    fn method(&self) -> Method {
        Method::GTrace
    }

    fn witness(&self, t: f64) -> f64 {
        rescale(self.beta, self.omega, t) * self.g(t).norm()
    }

    fn dim(&self) -> Option<usize> {
        Some(self.dim)
    }

    fn residuals(&self) -> Option<Residuals> {
        Some(self.residuals)
    }
}

fn sample_source(source: &(impl WitnessSource + ?Sized), times: &[f64]) -> Vec<f64> {
    times.par_iter().map(|&t| source.witness(t)).collect()
}

/// `|W(t)| = e^{8 beta^2 sin^2(omega t/2)} |g(t)|` on `times`.
pub fn g_trace(rho: &FockMatrix, beta: f64, omega: f64, times: &[f64]) -> Result<OracleResult> {
    let oracle = GTraceOracle::new(rho, beta, omega)?;
    let values = sample_source(&oracle, times);
    Ok(OracleResult {
        trace: WitnessTrace {
            times: times.to_vec(),
            values,
            method: Method::GTrace,
            params: TraceParams { beta, omega, family: format!("density(dim={})", rho.dim()) },
        },
        dim_used: oracle.dim,
        residuals: oracle.residuals,
    })
}

/// Reduced qubit state at one instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitSample {
    pub t: f64,
    /// `(<sz> + 1)/2`
    pub z: f64,
    /// `(<sx> - i <sy>)/2`
    pub w: C64,
    /// `Tr rho_q(t)`
    pub trace: f64,
}

fn pauli_readout(t: f64, q: &Matrix2<C64>) -> QubitSample {
    let i = C64::new(0.0, 1.0);
    let sx = Matrix2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    let sy = Matrix2::new(C64::new(0.0, 0.0), -i, i, C64::new(0.0, 0.0));
    let sz = Matrix2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0));
    let ex = (q * sx).trace();
    let ey = (q * sy).trace();
    let ez = (q * sz).trace().re;
    QubitSample { t, z: 0.5 * (ez + 1.0), w: 0.5 * (ex - i * ey), trace: q.trace().re }
}

/// Frobenius pairing `Tr(A B^dagger)`.
fn pair(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

#[derive(Clone, Debug)]
enum JointPath {
    /// Sector Hamiltonians `±omega0/2 + H±`.
    Blocks { plus: HermitianSpectrum, minus: HermitianSpectrum },
    /// Full `2 dim` Hamiltonian, qubit-major ordering `|q> ⊗ |n>` with `q = 0` the `sz = +1` level.
    Naive { full: HermitianSpectrum, initial: DMatrix<C64> },
}

/// Unitary evolution of `rho_q ⊗ rho_o` under the longitudinal coupling Hamiltonian.
#[derive(Clone, Debug)]
pub struct JointOracle {
    beta: f64,
    omega: f64,
    dim: usize,
    rho: DMatrix<C64>,
    qubit: QubitInit,
    path: JointPath,
    unitarity: f64,
    oscillator_trace_defect: f64,
}

/// `omega a†a + sign omega beta (a + a†) + sign omega0/2`.
fn sector_hamiltonian(sector: Sector, beta: f64, omega: f64, omega0: f64, dim: usize) -> Result<FockMatrix> {
    let mut h = displaced_hamiltonian(sector, beta, omega, dim)?.into_matrix();
    for n in 0..dim {
        h[(n, n)] += C64::new(0.5 * sector.sign() * omega0, 0.0);
    }
    FockMatrix::hermitian(h)
}

/// Full joint Hamiltonian built from Kronecker products.
pub fn joint_hamiltonian(beta: f64, omega: f64, omega0: f64, dim: usize) -> Result<FockMatrix> {
    let eye_q = DMatrix::<C64>::identity(2, 2);
    let sz = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]));
    let a = crate::fock::annihilation(dim)?.into_matrix();
    let x = &a + a.adjoint();
    let num = a.adjoint() * &a;
    let eye_o = DMatrix::<C64>::identity(dim, dim);
    let c = |v: f64| C64::new(v, 0.0);
    let h =
        sz.kronecker(&eye_o) * c(0.5 * omega0) + eye_q.kronecker(&num) * c(omega) + sz.kronecker(&x) * c(omega * beta);
    FockMatrix::hermitian(h)
}

impl JointOracle {
    pub fn new(rho: &FockMatrix, qubit: QubitInit, beta: f64, omega: f64, omega0: f64) -> Result<Self> {
        Self::build(rho, qubit, beta, omega, omega0, false)
    }

    /// Same physics through the full `2 dim` dense propagator.
    pub fn naive(rho: &FockMatrix, qubit: QubitInit, beta: f64, omega: f64, omega0: f64) -> Result<Self> {
        Self::build(rho, qubit, beta, omega, omega0, true)
    }

    fn build(rho: &FockMatrix, qubit: QubitInit, beta: f64, omega: f64, omega0: f64, naive: bool) -> Result<Self> {
        require_density(rho)?;
        if qubit.w0() == C64::new(0.0, 0.0) {
            return Err(WitnessError::DivisionUndefined);
        }
        let dim = rho.dim();
        let (path, unitarity) = if naive {
            let full = HermitianSpectrum::new(&joint_hamiltonian(beta, omega, omega0, dim)?)?;
            let q = qubit.density();
            let qd = DMatrix::from_fn(2, 2, |i, j| q[(i, j)]);
            let initial = qd.kronecker(rho.matrix());
            let u = full.unitarity_defect();
            (JointPath::Naive { full, initial }, u)
        } else {
            let plus = HermitianSpectrum::new(&sector_hamiltonian(Sector::Plus, beta, omega, omega0, dim)?)?;
            let minus = HermitianSpectrum::new(&sector_hamiltonian(Sector::Minus, beta, omega, omega0, dim)?)?;
            let u = plus.unitarity_defect().max(minus.unitarity_defect());
            (JointPath::Blocks { plus, minus }, u)
        };
        let oscillator_trace_defect = (real_trace(rho.matrix()) - 1.0).abs();
        Residuals { unitarity, trace: oscillator_trace_defect }.check()?;
        Ok(Self { beta, omega, dim, rho: rho.matrix().clone(), qubit, path, unitarity, oscillator_trace_defect })
    }

    /// Reduced qubit density matrix `Tr_o{U rho_qo U^dagger}` at time `t`.
    pub fn reduced_qubit(&self, t: f64) -> Matrix2<C64> {
        match &self.path {
            JointPath::Blocks { plus, minus } => {
                let up = plus.propagator(t);
                let um = minus.propagator(t);
                let xp = &up * &self.rho;
                let xm = &um * &self.rho;
                // block (a, b) evolves as U_a (q_ab rho) U_b^dagger; its trace is q_ab Tr(X_a U_b^dagger)
                let q = self.qubit.density();
                Matrix2::new(
                    q[(0, 0)] * pair(&xp, &up),
                    q[(0, 1)] * pair(&xp, &um),
                    q[(1, 0)] * pair(&xm, &up),
                    q[(1, 1)] * pair(&xm, &um),
                )
            }
            JointPath::Naive { full, initial } => {
                let u = full.propagator(t);
                let evolved = &u * initial * u.adjoint();
                let d = self.dim;
                let mut q = Matrix2::zeros();
                for a in 0..2 {
                    for b in 0..2 {
                        q[(a, b)] = (0..d).map(|n| evolved[(a * d + n, b * d + n)]).sum();
                    }
                }
                q
            }
        }
    }

    pub fn sample(&self, t: f64) -> QubitSample {
        pauli_readout(t, &self.reduced_qubit(t))
    }

    fn witness_from(&self, s: &QubitSample) -> f64 {
        rescale(self.beta, self.omega, s.t) * (s.w / self.qubit.w0()).norm()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_naive(&self) -> bool {
        matches!(self.path, JointPath::Naive { .. })
    }
}

impl WitnessSource for JointOracle {
    fn method(&self) -> Method {
        Method::Joint
    }

    fn witness(&self, t: f64) -> f64 {
        self.witness_from(&self.sample(t))
    }

    fn dim(&self) -> Option<usize> {
        Some(self.dim)
    }

    fn residuals(&self) -> Option<Residuals> {
        Some(Residuals { unitarity: self.unitarity, trace: self.oscillator_trace_defect })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointResult {
    pub oracle: OracleResult,
    pub qubit_path: Vec<QubitSample>,
}

impl JointResult {
    /// `max_t |z(t) - z(0)|` against the prepared `z0`.
    pub fn z_drift(&self, z0: f64) -> f64 {
        self.qubit_path.iter().map(|s| (s.z - z0).abs()).fold(0.0, f64::max)
    }
}

fn run_joint(oracle: JointOracle, times: &[f64]) -> Result<JointResult> {
    let qubit_path: Vec<QubitSample> = times.par_iter().map(|&t| oracle.sample(t)).collect();
    let values = qubit_path.iter().map(|s| oracle.witness_from(s)).collect();
    let trace_defect = qubit_path.iter().map(|s| (s.trace - 1.0).abs()).fold(oracle.oscillator_trace_defect, f64::max);
    let residuals = Residuals { unitarity: oracle.unitarity, trace: trace_defect }.check()?;
    Ok(JointResult {
        oracle: OracleResult {
            trace: WitnessTrace {
                times: times.to_vec(),
                values,
                method: Method::Joint,
                params: TraceParams {
                    beta: oracle.beta,
                    omega: oracle.omega,
                    family: format!("density(dim={})", oracle.dim),
                },
            },
            dim_used: oracle.dim,
            residuals,
        },
        qubit_path,
    })
}

/// `|W(t)| = e^{8 beta^2 sin^2(omega t/2)} |w(t)/w(0)|` from the evolved joint state.
pub fn joint_evolution(
    rho: &FockMatrix,
    qubit: QubitInit,
    beta: f64,
    omega: f64,
    omega0: f64,
    times: &[f64],
) -> Result<JointResult> {
    run_joint(JointOracle::new(rho, qubit, beta, omega, omega0)?, times)
}

/// [`joint_evolution`] through the full `2 dim` dense propagator.
pub fn joint_evolution_naive(
    rho: &FockMatrix,
    qubit: QubitInit,
    beta: f64,
    omega: f64,
    omega0: f64,
    times: &[f64],
) -> Result<JointResult> {
    run_joint(JointOracle::naive(rho, qubit, beta, omega, omega0)?, times)
}

/// Discrete P measure as a witness source: `W(t) = sum_i w_i f(alpha_i, t)`.
#[derive(Clone, Debug)]
pub struct QuadratureSource {
    samples: WeightedSamples,
    beta: f64,
    omega: f64,
}

impl QuadratureSource {
    pub fn new(samples: WeightedSamples, beta: f64, omega: f64) -> Self {
        Self { samples, beta, omega }
    }

    pub fn w(&self, t: f64) -> C64 {
        self.samples.atoms().iter().map(|&(alpha, wt)| coherent_phase(alpha, self.beta, self.omega, t) * wt).sum()
    }
}

impl WitnessSource for QuadratureSource {
    fn method(&self) -> Method {
        Method::Quadrature
    }

    fn witness(&self, t: f64) -> f64 {
        self.w(t).norm()
    }
}

pub fn classical_quadrature_w(samples: &WeightedSamples, beta: f64, omega: f64, times: &[f64]) -> WitnessTrace {
    let source = QuadratureSource::new(samples.clone(), beta, omega);
    WitnessTrace {
        times: times.to_vec(),
        values: sample_source(&source, times),
        method: Method::Quadrature,
        params: TraceParams { beta, omega, family: format!("p_measure(atoms={})", samples.len()) },
    }
}
