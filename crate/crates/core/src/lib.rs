//! Qubit-probed non-classicality witness for a harmonic oscillator.
//!
//! A qubit coupled longitudinally to the oscillator,
//! `H = (omega0/2) sz + omega a†a + omega beta (a + a†) sz`, loses coherence as
//! `w(t) = e^{-i omega0 t} g(t) w(0)`. The rescaled modulus
//! `|W(t)| = e^{8 beta^2 sin^2(omega t/2)} |w(t)/w(0)|` never exceeds one when the
//! oscillator's Glauber P distribution is a probability measure, so any
//! `|W(t)| > 1` certifies a non-classical oscillator state.
//!
//! * [`analytic`]: closed forms for coherent, thermal, Fock, vacuum-subtracted
//!   thermal and cat states.
//! * [`oracle`]: the same quantity simulated on a truncated Fock space, two ways.
//! * [`scanner`]: per-period violation reports and coupling thresholds.

pub mod analytic;
pub mod error;
pub mod fock;
pub mod oracle;
pub mod quadrature;
pub mod scanner;
pub mod states;
pub mod trace;
pub mod truncation;

pub use error::{Result, WitnessError};
pub use fock::{FockMatrix, MatrixKind, Sector, C64};
pub use oracle::{
    classical_quadrature_w, g_trace, joint_evolution, joint_evolution_naive, GTraceOracle, JointOracle, JointResult,
    OracleResult, QubitSample, Residuals, WitnessSource,
};
pub use scanner::{
    beta_threshold, classify, scan_period, ScanOptions, ThresholdOutcome, ThresholdResult, ThresholdSearch, Verdict,
    ViolationReport,
};
pub use states::{
    build_density, classical_p_sampler, ClassicalClaim, OscillatorStateSpec, QubitInit, StateFamily, WeightedSamples,
};
pub use trace::{period_grid, Method, WitnessTrace};
pub use truncation::{adaptive_dim, TruncationPolicy};
