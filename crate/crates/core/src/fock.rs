//! Dense linear algebra over a truncated Fock basis `|0>, ..., |dim-1>`.
//!
//! Units are `hbar = 1`. Everything here is a pure function of its inputs.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Result, WitnessError};

pub type C64 = Complex<f64>;

/// Entrywise absolute tolerance on `A - A^dagger` for a matrix to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Allowed gap between a density matrix's trace and its declared mass.
pub const DENSITY_TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue a density matrix may carry.
pub const DENSITY_EIGEN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixKind {
    General,
    Hermitian,
    Density,
}

/// Square complex matrix indexed by Fock labels.
#[derive(Clone, Debug, PartialEq)]
pub struct FockMatrix {
    data: DMatrix<C64>,
    kind: MatrixKind,
}

impl FockMatrix {
    pub fn new(data: DMatrix<C64>) -> Result<Self> {
        if data.nrows() == 0 {
            return Err(WitnessError::InvalidDimension { dim: 0, reason: "matrix must be at least 1x1" });
        }
        if data.nrows() != data.ncols() {
            return Err(WitnessError::InvalidDimension { dim: data.nrows(), reason: "matrix must be square" });
        }
        Ok(Self { data, kind: MatrixKind::General })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim, 1)?;
        Self::new(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim, 1)?;
        Ok(Self { data: DMatrix::identity(dim, dim), kind: MatrixKind::Hermitian })
    }

    /// Builds a matrix and tags it Hermitian after checking `max|A - A^dagger| <= 1e-12`.
    pub fn hermitian(data: DMatrix<C64>) -> Result<Self> {
        let mut m = Self::new(data)?;
        let defect = m.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(WitnessError::ContractViolation(format!("matrix is not Hermitian (defect {defect:e})")));
        }
        m.kind = MatrixKind::Hermitian;
        Ok(m)
    }

    /// Unit-trace density matrix.
    pub fn density(data: DMatrix<C64>) -> Result<Self> {
        Self::density_with_mass(data, 1.0)
    }

    /// Density matrix whose trace is `mass` (positive semidefinite, Hermitian).
    pub fn density_with_mass(data: DMatrix<C64>, mass: f64) -> Result<Self> {
        let mut m = Self::hermitian(data)?;
        let tr = m.trace().re;
        if (tr - mass).abs() > DENSITY_TRACE_TOL {
            return Err(WitnessError::ContractViolation(format!(
                "density trace {tr} differs from declared mass {mass}"
            )));
        }
        let min_eig = m.min_eigenvalue();
        if min_eig.is_nan() || min_eig < -DENSITY_EIGEN_TOL {
            return Err(WitnessError::ContractViolation(format!("density has negative eigenvalue {min_eig:e}")));
        }
        m.kind = MatrixKind::Density;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    /// Real parts of the diagonal.
    pub fn populations(&self) -> Vec<f64> {
        self.data.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn adjoint(&self) -> FockMatrix {
        Self { data: self.data.adjoint(), kind: self.kind }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[(i, j)] - self.data[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= HERMITIAN_TOL
    }

    /// Smallest eigenvalue of the Hermitian part `(A + A^dagger)/2`.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = flush_negligible((&self.data + self.data.adjoint()) * C64::new(0.5, 0.0));
        let eig = SymmetricEigen::new(herm).eigenvalues;
        if eig.iter().any(|x| x.is_nan()) {
            return f64::NAN;
        }
        eig.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &FockMatrix) -> f64 {
        max_abs_diff(&self.data, &other.data)
    }

    pub fn mul(&self, other: &FockMatrix) -> Result<FockMatrix> {
        if self.dim() != other.dim() {
            return Err(WitnessError::InvalidDimension { dim: other.dim(), reason: "operand dimensions differ" });
        }
        Ok(Self { data: &self.data * &other.data, kind: MatrixKind::General })
    }

    pub fn commutator(&self, other: &FockMatrix) -> Result<FockMatrix> {
        let ab = self.mul(other)?;
        let ba = other.mul(self)?;
        Ok(Self { data: ab.data - ba.data, kind: MatrixKind::General })
    }

    /// `self` embedded in (or cut down to) `dim` levels. Tags are dropped.
    pub fn resized(&self, dim: usize) -> Result<FockMatrix> {
        check_dim(dim, 1)?;
        let n = self.dim().min(dim);
        let mut out = DMatrix::zeros(dim, dim);
        out.view_mut((0, 0), (n, n)).copy_from(&self.data.view((0, 0), (n, n)));
        Self::new(out)
    }
}

/// Zeroes entries below `1e-40` of the largest one. Entries spanning more than
/// ~100 decades make the Householder reduction produce NaN eigenvalues.
fn flush_negligible(mut m: DMatrix<C64>) -> DMatrix<C64> {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let floor = scale * 1e-40;
    m.iter_mut().filter(|z| z.norm() < floor).for_each(|z| *z = C64::new(0.0, 0.0));
    m
}

pub(crate) fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub(crate) fn max_identity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

fn check_dim(dim: usize, min: usize) -> Result<()> {
    if dim < min {
        return Err(WitnessError::InvalidDimension {
            dim,
            reason: if min == 1 { "dimension must be at least 1" } else { "dimension must be at least 2" },
        });
    }
    Ok(())
}

/// Lowering operator `a` with `<n|a|n+1> = sqrt(n+1)`.
pub fn annihilation(dim: usize) -> Result<FockMatrix> {
    check_dim(dim, 1)?;
    let mut m = DMatrix::zeros(dim, dim);
    for n in 0..dim.saturating_sub(1) {
        m[(n, n + 1)] = C64::new(((n + 1) as f64).sqrt(), 0.0);
    }
    FockMatrix::new(m)
}

pub fn creation(dim: usize) -> Result<FockMatrix> {
    Ok(annihilation(dim)?.adjoint())
}

/// `a^dagger a`, exact on every level including the last.
pub fn number(dim: usize) -> Result<FockMatrix> {
    check_dim(dim, 1)?;
    let diag = nalgebra::DVector::from_iterator(dim, (0..dim).map(|n| C64::new(n as f64, 0.0)));
    FockMatrix::hermitian(DMatrix::from_diagonal(&diag))
}

/// The two `sigma_z` sectors of the qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    Plus,
    Minus,
}

impl Sector {
    pub fn sign(self) -> f64 {
        match self {
            Sector::Plus => 1.0,
            Sector::Minus => -1.0,
        }
    }
}

/// `H± = omega (a^dagger a ± beta (a + a^dagger))`.
pub fn displaced_hamiltonian(sector: Sector, beta: f64, omega: f64, dim: usize) -> Result<FockMatrix> {
    check_dim(dim, 2)?;
    let coupling = sector.sign() * beta * omega;
    let mut m = DMatrix::zeros(dim, dim);
    for n in 0..dim {
        m[(n, n)] = C64::new(omega * n as f64, 0.0);
        if n + 1 < dim {
            let x = C64::new(coupling * ((n + 1) as f64).sqrt(), 0.0);
            m[(n, n + 1)] = x;
            m[(n + 1, n)] = x;
        }
    }
    FockMatrix::hermitian(m)
}

/// Eigendecomposition `H = V diag(lambda) V^dagger` of a Hermitian matrix.
///
/// One decomposition serves every time point of a propagator sweep.
#[derive(Clone, Debug)]
pub struct HermitianSpectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<C64>,
}

impl HermitianSpectrum {
    pub fn new(h: &FockMatrix) -> Result<Self> {
        let defect = h.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(WitnessError::ContractViolation(format!(
                "exponent generator is not Hermitian (defect {defect:e})"
            )));
        }
        let m = flush_negligible(h.matrix().clone());
        // Real symmetric input takes the cheaper real solver.
        if m.iter().all(|z| z.im == 0.0) {
            let real = m.map(|z| z.re);
            let eig = SymmetricEigen::new(real);
            Ok(Self {
                eigenvalues: eig.eigenvalues.iter().copied().collect(),
                eigenvectors: eig.eigenvectors.map(|x| C64::new(x, 0.0)),
            })
        } else {
            let eig = SymmetricEigen::new(m);
            Ok(Self { eigenvalues: eig.eigenvalues.iter().copied().collect(), eigenvectors: eig.eigenvectors })
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    /// `exp(scale * H)`.
    pub fn exp(&self, scale: C64) -> DMatrix<C64> {
        let mut scaled = self.eigenvectors.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let phase = (scale * lambda).exp();
            for x in scaled.column_mut(j).iter_mut() {
                *x *= phase;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// `exp(-i H t)`.
    pub fn propagator(&self, t: f64) -> DMatrix<C64> {
        self.exp(C64::new(0.0, -t))
    }

    /// `max|V V^dagger - I|`; bounds the unitarity defect of every propagator built from `V`.
    pub fn unitarity_defect(&self) -> f64 {
        max_identity_defect(&(&self.eigenvectors * self.eigenvectors.adjoint()))
    }
}

/// `exp(scale * H)` for Hermitian `H`, via eigendecomposition.
pub fn herm_expm(h: &FockMatrix, scale: C64) -> Result<FockMatrix> {
    let spectrum = HermitianSpectrum::new(h)?;
    FockMatrix::new(spectrum.exp(scale))
}
