//! Origin-cluster statistics in a finite box.

mod audit;
mod cluster;
mod decay;
mod ghost;

pub use audit::{
    inequality_audit, AuditConfig, AuditReport, InequalityCheck, StencilEstimate, DEFAULT_BATCHES,
    DEFAULT_STEP,
};
pub use cluster::{
    sample_distribution, sample_key, sample_origin_cluster, ClusterDistribution, ClusterExplorer,
    ClusterSample, DistributionMeta,
};
pub use decay::{
    decay_fit, regime_exponents, DecayFit, DecayReport, DecayVerdict, MIN_BIN_COUNT,
    MIN_TAIL_BINS, PARAMETER_PENALTY, WINDOW_QUANTILE,
};
pub use ghost::{ghost_chi, ghost_theta, ghost_theta_stderr};
