//! Classical joint distributions, singlet amplitude calculus, and the
//! certificates that separate them.
//!
//! - [`classical`]: distributions over the 16 outcome quadruples of
//!   `(A, A', B, B')`, marginals, correlators, the CHSH functional.
//! - [`quantum`]: singlet ket, basis rotations, branch amplitudes, coherent
//!   pair probabilities, `chsh_quantum` and its optimizer.
//! - [`analysis`]: Malus-cascade joint, cascade vs coherent discrepancy,
//!   marginal-matching feasibility with CHSH and phase-1 certificates.
//! - [`montecarlo`]: seeded samplers and estimators for both models.

pub mod analysis;
pub mod classical;
pub mod error;
pub mod montecarlo;
pub mod numfmt;
pub mod quantum;
pub mod simplex;

pub use analysis::{
    cascade_joint, discrepancy, kolmogorov_vs_quantum_or, marginal_match_feasibility,
    phase1_feasibility, quantum_targets, Certificate, CertificateKind, DiscrepancyReport,
    FeasibilityResult, FeasibilityStatus, OrComparison,
};
pub use classical::{
    chsh, correlator, deterministic_joint, joint_from_weights, kolmogorov_or,
    max_chsh_deterministic, pair_marginal, random_joint, CorrelatorSet, JointDistribution16,
    OutcomeQuadruple, OutcomeSign, PairDistribution, SettingPair, SignPattern,
};
pub use error::{Error, Result};
pub use montecarlo::{
    estimate_chsh, estimate_correlator, sample_cascade, sample_pair_quantum, EstimateWithError,
    Model, TrialCounts,
};
pub use quantum::{
    amplitude_or, branch_amplitudes, chsh_quantum, correlation_quantum, optimize_chsh,
    pair_probability, pair_probability_closed, rotate_photon_basis, singlet_ket, Angle, BasisLabel,
    BranchAmplitudeTable, DirectionConfig, OptimizeResult, Photon, TwoPhotonKet,
};
