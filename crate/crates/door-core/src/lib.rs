//! DOOR probability estimation and hypothesis testing for cluster randomized
//! trials.
//!
//! The crate is organized around the analysis pipeline:
//!
//! - [`kernel`]: validated trial data and the per-cluster tie-corrected
//!   Wilcoxon-Mann-Whitney DOOR probability with its variance components.
//! - [`estimators`]: trial-level within-cluster estimators (inverse-variance
//!   and sample-size weighted), the between-cluster U-statistic with its
//!   influence-function variance, and their joint covariance.
//! - [`inference`]: Wald tests and intervals, the between-vs-within
//!   variability test, the familywise error-controlling max test with
//!   simultaneous intervals, the weighted hybrid test, and method selection.
//! - [`numerics`]: scalar normal/t distributions, bivariate normal and
//!   bivariate t rectangle probabilities, and the critical-value solver.
//! - [`simulation`]: the latent random-effects generator, randomization
//!   schemes, a Monte Carlo truth oracle, and the operating-characteristics
//!   driver.

pub mod estimators;
pub mod inference;
pub mod kernel;
pub mod numerics;
pub mod simulation;

pub use estimators::{
    between, joint_covariance, pairwise_phi, within_ivw, within_ssw, DfMode, DoorEstimate,
    EstimateKind, EstimatorError, JointCovariance, SswVariance, VarianceMethod,
};
pub use inference::{
    max_test, select_methods, select_methods_forced, test_marginal, test_variability,
    wald_ci, weighted_test,
    BetweenMethod, Calibration, HybridEstimate, InferenceError, MethodSelection, Sided,
    SimultaneousCi, TestResult, WithinMethod,
};
pub use kernel::{
    cluster_rank_dist, door_wmw, sigma_components, summarize_cluster, validate_trial, Arm, Cluster,
    ClusterSummary, Design, DoorRank, KernelError, RankDistribution, TrialData,
};
pub use simulation::{
    assign_arms, generate_trial, make_model, run_scenario, true_door_oracle, LatentModel,
    MethodSet, MethodSummary, OperatingCharacteristics, OracleKind, OracleValue, SimScenario,
    SimulationError, DEFAULT_CONTROL_PROPS,
};
