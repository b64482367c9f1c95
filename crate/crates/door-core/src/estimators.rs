//! Trial-level DOOR probability estimators: the inverse-variance and
//! sample-size weighted within-cluster estimators (three variance methods),
//! the between-cluster U-statistic with its influence-function variance, and
//! the joint covariance of the two.

use crate::kernel::{pair_phi_sum, phi, Cluster, ClusterCounts, ClusterSummary, TrialData};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EstimatorError {
    #[error("no two-arm cluster: the within-cluster DOOR probability is not estimable")]
    NoTwoArmCluster,
    #[error(
        "ivw-unavailable: cluster {cluster_index} has a zero variance estimate; \
         use the sample-size weighted estimator instead"
    )]
    IvwUnavailable { cluster_index: usize },
    #[error("small-sample correction needs at least 3 contributing clusters, got {0}")]
    TooFewClustersForCorrection(usize),
    #[error("no cross-cluster treatment/control pair: the between-cluster denominator is {0}")]
    NoBetweenPairs(f64),
    #[error("influence vectors have different lengths ({0} vs {1})")]
    MismatchedInfluence(usize, usize),
}

/// Which estimand/weighting produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    WithinIvw,
    WithinSsw,
    Between,
    Hybrid,
}

/// How the variance was estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceMethod {
    /// Inverse of the summed inverse per-cluster variances (fixed-effects
    /// meta-analysis).
    Ivw,
    /// Empirical dispersion of the cluster estimates around the pooled one.
    Type1,
    /// Plug-in per-cluster asymptotic variances.
    Type2,
    /// Type 1 inflated by n/(n-2), calibrated against t(n-1).
    Type3,
    /// Mean squared empirical influence over n^2.
    Influence,
    /// Influence variance inflated by n/(n-2), calibrated against t(n-1).
    InfluenceCorrected,
}

impl VarianceMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            VarianceMethod::Ivw => "ivw",
            VarianceMethod::Type1 => "type1",
            VarianceMethod::Type2 => "type2",
            VarianceMethod::Type3 => "type3",
            VarianceMethod::Influence => "influence",
            VarianceMethod::InfluenceCorrected => "influence_corrected",
        }
    }
}

/// Reference distribution for Wald intervals and tests on this estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfMode {
    Normal,
    /// Student t with n-1 degrees of freedom.
    T {
        df: usize,
    },
}

/// A trial-level DOOR probability estimate with its variance and per-cluster
/// empirical influence values (zero entries for non-contributing clusters).
#[derive(Debug, Clone, PartialEq)]
pub struct DoorEstimate {
    pub kind: EstimateKind,
    pub estimate: f64,
    pub variance: f64,
    pub influence: Vec<f64>,
    pub df_mode: DfMode,
    pub variance_method: VarianceMethod,
    pub n_contributing: usize,
}

impl DoorEstimate {
    pub fn se(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn n(&self) -> usize {
        self.influence.len()
    }

    pub fn is_small_sample(&self) -> bool {
        matches!(self.df_mode, DfMode::T { .. })
    }

    /// Applies the small-sample correction: variance inflated by n/(n-2) and
    /// critical values taken from t(n-1). Valid for influence-based variances
    /// (between, within type 1).
    pub fn with_small_sample_correction(&self) -> Result<DoorEstimate, EstimatorError> {
        let n = self.n();
        if n < 3 {
            return Err(EstimatorError::TooFewClustersForCorrection(n));
        }
        let mut out = self.clone();
        out.variance = self.variance * n as f64 / (n as f64 - 2.0);
        out.df_mode = DfMode::T { df: n - 1 };
        out.variance_method = match self.variance_method {
            VarianceMethod::Type1 => VarianceMethod::Type3,
            _ => VarianceMethod::InfluenceCorrected,
        };
        Ok(out)
    }
}

/// Variance method for the sample-size weighted estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SswVariance {
    Type1,
    Type2,
    Type3,
}

// ---------------------------------------------------------------------------
// Within-cluster estimators
// ---------------------------------------------------------------------------

/// Inverse-variance weighted within-cluster estimator: weights are
/// proportional to 1/Var(D_wi); the variance is 1 over the summed inverse
/// variances. Fails when any two-arm cluster's variance estimate is zero.
pub fn within_ivw(summaries: &[ClusterSummary]) -> Result<DoorEstimate, EstimatorError> {
    let n = summaries.len();
    let mut inv_sum = 0.0;
    let mut weighted = 0.0;
    let mut contributing = 0usize;
    for (i, s) in summaries.iter().enumerate() {
        if !s.is_two_arm() {
            continue;
        }
        let var = s.var_dwi.expect("two-arm summary has var_dwi");
        if var <= 0.0 {
            return Err(EstimatorError::IvwUnavailable { cluster_index: i });
        }
        contributing += 1;
        inv_sum += 1.0 / var;
        weighted += s.d_wi.unwrap() / var;
    }
    if contributing == 0 {
        return Err(EstimatorError::NoTwoArmCluster);
    }
    let estimate = weighted / inv_sum;
    let mut influence = vec![0.0; n];
    for (i, s) in summaries.iter().enumerate() {
        if let (Some(d), Some(var)) = (s.d_wi, s.var_dwi) {
            let w = (1.0 / var) / inv_sum;
            influence[i] = n as f64 * w * (d - estimate);
        }
    }
    Ok(DoorEstimate {
        kind: EstimateKind::WithinIvw,
        estimate,
        variance: 1.0 / inv_sum,
        influence,
        df_mode: DfMode::Normal,
        variance_method: VarianceMethod::Ivw,
        n_contributing: contributing,
    })
}

/// Sample-size weighted within-cluster estimator: cluster weights are
/// proportional to the number of treated x control pairs. The point estimate
/// is the pooled pairwise win fraction, so it matches pair enumeration
/// exactly. One-group clusters get weight 0 and influence 0.
pub fn within_ssw(
    summaries: &[ClusterSummary],
    method: SswVariance,
) -> Result<DoorEstimate, EstimatorError> {
    let n = summaries.len();
    let contributing = summaries.iter().filter(|s| s.is_two_arm()).count();
    if contributing == 0 {
        return Err(EstimatorError::NoTwoArmCluster);
    }
    if method == SswVariance::Type3 && contributing < 3 {
        return Err(EstimatorError::TooFewClustersForCorrection(contributing));
    }
    let total_pairs: f64 = summaries.iter().map(|s| s.pair_count()).sum();
    let phi_total: f64 = summaries.iter().filter_map(|s| s.pair_phi_sum).sum();
    let estimate = phi_total / total_pairs;

    let nf = n as f64;
    let mut influence = vec![0.0; n];
    let mut type1 = 0.0;
    let mut type2 = 0.0;
    for (i, s) in summaries.iter().enumerate() {
        if !s.is_two_arm() {
            continue;
        }
        let w = s.pair_count() / total_pairs;
        let dev = s.d_wi.unwrap() - estimate;
        influence[i] = nf * w * dev;
        type1 += w * w * dev * dev;
        type2 += w * w * s.var_dwi.unwrap();
    }
    let (variance, variance_method, df_mode) = match method {
        SswVariance::Type1 => (type1, VarianceMethod::Type1, DfMode::Normal),
        SswVariance::Type2 => (type2, VarianceMethod::Type2, DfMode::Normal),
        SswVariance::Type3 => (
            type1 * nf / (nf - 2.0),
            VarianceMethod::Type3,
            DfMode::T { df: n - 1 },
        ),
    };
    Ok(DoorEstimate {
        kind: EstimateKind::WithinSsw,
        estimate,
        variance,
        influence,
        df_mode,
        variance_method,
        n_contributing: contributing,
    })
}

// ---------------------------------------------------------------------------
// Between-cluster estimator
// ---------------------------------------------------------------------------

/// Pairwise win sum between the treated subjects of `ci` and the control
/// subjects of `ck`. Empty sides contribute 0.
pub fn pairwise_phi(ci: &Cluster, ck: &Cluster) -> f64 {
    let mut sum = 0.0;
    for &t in &ci.ranks_treatment {
        for &c in &ck.ranks_control {
            sum += phi(t, c);
        }
    }
    sum
}

/// Between-cluster DOOR probability estimator with its influence-function
/// variance.
///
/// The cross-cluster sums are accumulated through trial-wide level counts
/// (the pair kernel is linear in the opposing cluster's counts), which gives
/// the exact same half-integer sums as the O(n^2) pair loop in O(nK).
pub fn between(trial: &TrialData) -> Result<DoorEstimate, EstimatorError> {
    let n = trial.n();
    let k = trial.k_levels();
    let counts: Vec<ClusterCounts> = trial
        .clusters()
        .iter()
        .map(|c| ClusterCounts::from_cluster(c, k))
        .collect();

    let mut t_all = vec![0.0; k];
    let mut c_all = vec![0.0; k];
    for cc in &counts {
        for j in 0..k {
            t_all[j] += cc.treatment[j];
            c_all[j] += cc.control[j];
        }
    }
    let n1: f64 = t_all.iter().sum();
    let n2: f64 = c_all.iter().sum();
    let within_pairs: f64 = trial
        .clusters()
        .iter()
        .map(|c| (c.m1() * c.m2()) as f64)
        .sum();
    let denom = n1 * n2 - within_pairs;
    if n < 2 || denom <= 0.0 {
        return Err(EstimatorError::NoBetweenPairs(denom));
    }

    // cross[i] = sum_{k != i} (Phi_ik + Phi_ki)
    let mut cross = vec![0.0; n];
    let mut others_c = vec![0.0; k];
    let mut others_t = vec![0.0; k];
    for (i, cc) in counts.iter().enumerate() {
        for j in 0..k {
            others_c[j] = c_all[j] - cc.control[j];
            others_t[j] = t_all[j] - cc.treatment[j];
        }
        cross[i] = pair_phi_sum(&cc.treatment, &others_c) + pair_phi_sum(&others_t, &cc.control);
    }
    let total: f64 = cross.iter().sum::<f64>() * 0.5;
    let estimate = total / denom;

    // psi_i = (2/(n-1)) sum_{k != i} h(Y_i, Y_k) - 2 D_b, with
    // h = C(n,2) (Phi_ik + Phi_ki) / denom; the combinatorial factors cancel
    // to n * cross_i / denom.
    let nf = n as f64;
    let influence: Vec<f64> = cross
        .iter()
        .map(|&ci| nf * ci / denom - 2.0 * estimate)
        .collect();
    let variance = influence.iter().map(|p| p * p).sum::<f64>() / (nf * nf);

    Ok(DoorEstimate {
        kind: EstimateKind::Between,
        estimate,
        variance,
        influence,
        df_mode: DfMode::Normal,
        variance_method: VarianceMethod::Influence,
        n_contributing: n,
    })
}

// ---------------------------------------------------------------------------
// Joint covariance
// ---------------------------------------------------------------------------

/// Empirical covariance of the (between, within) influence pairs, scaled so
/// that `sigma / n` estimates the covariance of the estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCovariance {
    /// 2x2 matrix in (between, within) order.
    pub sigma: [[f64; 2]; 2],
    /// Influence correlation, clamped to [-1, 1]; 0 when a marginal variance
    /// vanishes.
    pub rho: f64,
    pub n: usize,
}

impl JointCovariance {
    /// Variance of the contrast `D_b - D_w` on the estimate scale.
    pub fn contrast_variance(&self) -> f64 {
        (self.sigma[0][0] + self.sigma[1][1] - 2.0 * self.sigma[0][1]) / self.n as f64
    }
}

/// Joint covariance of the between- and within-cluster estimators from their
/// per-cluster influence pairs. Both estimates must come from the same trial
/// (equal cluster count and order).
pub fn joint_covariance(
    between_est: &DoorEstimate,
    within_est: &DoorEstimate,
) -> Result<JointCovariance, EstimatorError> {
    let n = between_est.influence.len();
    if n != within_est.influence.len() {
        return Err(EstimatorError::MismatchedInfluence(
            n,
            within_est.influence.len(),
        ));
    }
    let nf = n as f64;
    let mean_b: f64 = between_est.influence.iter().sum::<f64>() / nf;
    let mean_w: f64 = within_est.influence.iter().sum::<f64>() / nf;
    let mut s11 = 0.0;
    let mut s22 = 0.0;
    let mut s12 = 0.0;
    for i in 0..n {
        let b = between_est.influence[i] - mean_b;
        let w = within_est.influence[i] - mean_w;
        s11 += b * b;
        s22 += w * w;
        s12 += b * w;
    }
    s11 /= nf;
    s22 /= nf;
    s12 /= nf;
    let rho = if s11 <= 0.0 || s22 <= 0.0 {
        0.0
    } else {
        (s12 / (s11 * s22).sqrt()).clamp(-1.0, 1.0)
    };
    Ok(JointCovariance {
        sigma: [[s11, s12], [s12, s22]],
        rho,
        n,
    })
}
