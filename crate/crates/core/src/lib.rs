//! Oracle-efficient online and private learning over finite, separated
//! function classes.
//!
//! The crate is organised around a dense [`FunctionClass`] (rows are
//! functions, columns are domain points) and the canonical Gaussian process
//! it induces on a point set `Z_1..Z_m`:
//!
//! ```text
//! omega(f) = m^(-1/2) * sum_i xi_i * f(Z_i),   xi_i ~ N(0, 1)
//! ```
//!
//! * [`fclass`]: classes, measures and separation certificates.
//! * [`perturb`]: the Gaussian perturbation, its kernel, Gaussian complexity.
//! * [`oracle`]: the brute-force perturbed ERM oracle with call accounting.
//! * [`online`]: Gaussian follow-the-perturbed-leader, environments, regret
//!   ledgers, bound evaluators and the be-the-leader diagnostic.
//! * [`privacy`]: perturbed ERM as an (epsilon, delta)-DP learner, sample size
//!   calculators and an empirical privacy auditor.
//! * [`stability`]: Monte-Carlo verification of Gaussian-process argmin
//!   stability.
//!
//! Randomness is always driven by explicit seeds; see [`rng`].

pub mod error;
pub mod fclass;
pub mod fixtures;
pub mod online;
pub mod oracle;
pub mod perturb;
pub mod privacy;
pub mod rng;
pub mod stability;
pub mod stats;

pub use error::{Error, Result};
pub use fclass::{
    gamma_to_rho, hadamard_class, is_separator_set, pairwise_separation, sample_separating_set,
    separation_from_singular_value, BinaryAlphabet, CertificateKind, DiscreteMeasure, FunctionClass, HadamardDomain,
    Separation, SeparationCertificate,
};
pub use online::{
    btl_check, btl_check_tuned, regret_bound_competitor, regret_bound_gaussian, run_ftpl, run_ftpl_laplace, tune_eta,
    BtlReport, Environment, EtaPolicy, Trace,
};
pub use oracle::{perturbed_erm, perturbed_erm_dataset, Example, LossKind, LossSpec, OracleAccount};
pub use perturb::{covariance_kernel, gaussian_complexity, perturbation_values, McEstimate, PerturbationDraw};
pub use privacy::{
    accuracy_required_samples, audit_privacy, audit_privacy_with_eta, privacy_epsilon, privacy_eta, private_learn,
    required_samples, AuditReport, PrivacyBudget, SeparationSource,
};
pub use stability::{
    check_conditioned_stability, check_distributional_stability, conditioned_eta_threshold,
    distributional_eta_threshold, kernel_from_class, sample_argmin_distribution, FiniteGp, GpPair, StabilityFixture,
    StabilityVerdict,
};
