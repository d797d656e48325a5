//! The Dirichlet mechanism for differentially private release of vectors on
//! the probability simplex, with closed-form privacy accounting.

pub mod accounting;
pub mod empirical;
pub mod error;
pub mod mechanism;
pub mod quadrature;
pub mod rng;
pub mod simplex;
pub mod special;

pub use accounting::{
    calibrate_gamma, delta_identity, epsilon_average, epsilon_identity, epsilon_identity_approx,
    omega1_probability, privacy_report, DeltaResult, DivisorConvention, GammaCalibration, GammaChoice,
    Omega1Estimate, Omega1Method, PartitionParam, PrivacyReport, QueryKind,
};
pub use empirical::{audit_pair, run_average_experiment, AuditConfig, AuditResult};
pub use error::{Error, Result};
pub use mechanism::{log_density, privacy_loss, sample, sample_many, DirichletSampler, MechanismConfig};
pub use rng::{ExecutionMode, RngSeed};
pub use simplex::{
    are_b_adjacent, average, collection_adjacency, in_restricted_domain, AdjacencyParams, Collection,
    CollectionAdjacency, DomainSpec, SimplexVector,
};
