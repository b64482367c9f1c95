//! Hypothesis tests and confidence intervals: marginal Wald tests of
//! D = 0.5, the between-vs-within variability test, the familywise
//! error-controlling max test with simultaneous intervals, the optimally
//! weighted hybrid test, and the method-selection guidance.

use crate::estimators::{DfMode, DoorEstimate, JointCovariance};
use crate::kernel::Design;
use crate::numerics::{
    bvn_rect, bvt_rect, solve_symmetric_critical, std_normal_cdf, std_normal_quantile,
    student_t_cdf, student_t_quantile, Rectangle,
};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum InferenceError {
    #[error("test-unavailable: the estimate has zero variance")]
    ZeroVariance,
    #[error("test-unavailable: the contrast variance is not positive ({0})")]
    DegenerateContrast(f64),
    #[error("the joint covariance is singular or ill-conditioned; fall back to the max test")]
    SingularCovariance,
    #[error("alpha must lie strictly inside (0, 1), got {0}")]
    InvalidAlpha(f64),
}

/// Sidedness of a test; one-sided means H1: D > 0.5 (treatment better).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sided {
    TwoSided,
    OneSidedGreater,
}

impl Sided {
    pub fn as_str(self) -> &'static str {
        match self {
            Sided::TwoSided => "two_sided",
            Sided::OneSidedGreater => "one_sided_greater",
        }
    }
}

/// Reference distribution used for the critical value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Calibration {
    Normal,
    T { df: usize },
    Bvn,
    Bvt { df: usize },
}

impl Calibration {
    pub fn describe(self) -> String {
        match self {
            Calibration::Normal => "normal".to_string(),
            Calibration::T { df } => format!("t({df})"),
            Calibration::Bvn => "bvn".to_string(),
            Calibration::Bvt { df } => format!("bvt({df})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub critical_value: f64,
    pub p_value: Option<f64>,
    pub reject: bool,
    pub alpha: f64,
    pub sided: Sided,
    pub calibration: Calibration,
}

/// Simultaneous confidence intervals from the max-test critical value.
#[derive(Debug, Clone, PartialEq)]
pub struct SimultaneousCi {
    pub ci_within: (f64, f64),
    pub ci_between: (f64, f64),
    pub joint_level: f64,
}

/// The data-driven weighted average of the within and between estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridEstimate {
    /// Weight on the within-cluster estimate.
    pub weight_within: f64,
    /// Weight on the between-cluster estimate.
    pub weight_between: f64,
    pub estimate: f64,
    pub variance: f64,
}

fn check_alpha(alpha: f64) -> Result<(), InferenceError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(InferenceError::InvalidAlpha(alpha))
    }
}

fn scalar_quantile(p: f64, df_mode: DfMode) -> f64 {
    match df_mode {
        DfMode::Normal => std_normal_quantile(p).unwrap(),
        DfMode::T { df } => student_t_quantile(p, df as f64).unwrap(),
    }
}

fn scalar_cdf(x: f64, df_mode: DfMode) -> f64 {
    match df_mode {
        DfMode::Normal => std_normal_cdf(x),
        DfMode::T { df } => student_t_cdf(x, df as f64).unwrap(),
    }
}

// ---------------------------------------------------------------------------
// Marginal inference
// ---------------------------------------------------------------------------

/// Two-sided Wald interval for the estimate at level 1 - alpha, clamped to
/// [0, 1]; quantiles follow the estimate's df mode.
pub fn wald_ci(est: &DoorEstimate, alpha: f64) -> Result<(f64, f64), InferenceError> {
    check_alpha(alpha)?;
    if est.variance == 0.0 {
        return Ok((est.estimate, est.estimate));
    }
    let q = scalar_quantile(1.0 - alpha / 2.0, est.df_mode);
    let half = q * est.se();
    Ok((
        (est.estimate - half).max(0.0),
        (est.estimate + half).min(1.0),
    ))
}

/// Wald test of H0: D = 0.5.
pub fn test_marginal(
    est: &DoorEstimate,
    alpha: f64,
    sided: Sided,
) -> Result<TestResult, InferenceError> {
    check_alpha(alpha)?;
    if est.variance <= 0.0 {
        return Err(InferenceError::ZeroVariance);
    }
    let statistic = (est.estimate - 0.5) / est.se();
    let calibration = match est.df_mode {
        DfMode::Normal => Calibration::Normal,
        DfMode::T { df } => Calibration::T { df },
    };
    let (critical_value, reject, p_value) = match sided {
        Sided::TwoSided => {
            let c = scalar_quantile(1.0 - alpha / 2.0, est.df_mode);
            let p = 2.0 * (1.0 - scalar_cdf(statistic.abs(), est.df_mode));
            (c, statistic.abs() > c, p)
        }
        Sided::OneSidedGreater => {
            let c = scalar_quantile(1.0 - alpha, est.df_mode);
            let p = 1.0 - scalar_cdf(statistic, est.df_mode);
            (c, statistic > c, p)
        }
    };
    Ok(TestResult {
        statistic,
        critical_value,
        p_value: Some(p_value.clamp(0.0, 1.0)),
        reject,
        alpha,
        sided,
        calibration,
    })
}

/// Wald test of H0: D_b - D_w = 0 (no between-cluster variability), using the
/// influence-based contrast variance. Two-sided; t(n-1) when either input
/// carries the small-sample mode.
pub fn test_variability(
    between_est: &DoorEstimate,
    within_est: &DoorEstimate,
    cov: &JointCovariance,
    alpha: f64,
) -> Result<TestResult, InferenceError> {
    check_alpha(alpha)?;
    let var = cov.contrast_variance();
    if var <= 0.0 {
        return Err(InferenceError::DegenerateContrast(var));
    }
    let statistic = (between_est.estimate - within_est.estimate) / var.sqrt();
    let df_mode = joint_df_mode(between_est, within_est, cov.n);
    let c = scalar_quantile(1.0 - alpha / 2.0, df_mode);
    let p = 2.0 * (1.0 - scalar_cdf(statistic.abs(), df_mode));
    Ok(TestResult {
        statistic,
        critical_value: c,
        p_value: Some(p.clamp(0.0, 1.0)),
        reject: statistic.abs() > c,
        alpha,
        sided: Sided::TwoSided,
        calibration: match df_mode {
            DfMode::Normal => Calibration::Normal,
            DfMode::T { df } => Calibration::T { df },
        },
    })
}

/// Small-sample rule for joint tests: t / bivariate-t with n-1 degrees of
/// freedom whenever either marginal estimate was corrected.
fn joint_df_mode(a: &DoorEstimate, b: &DoorEstimate, n: usize) -> DfMode {
    if a.is_small_sample() || b.is_small_sample() {
        DfMode::T {
            df: n.saturating_sub(1).max(1),
        }
    } else {
        DfMode::Normal
    }
}

// ---------------------------------------------------------------------------
// Max test
// ---------------------------------------------------------------------------

/// L-infinity test of H0: D_b = D_w = 0.5 controlling the familywise error
/// rate, with simultaneous confidence intervals from the same critical value.
///
/// The critical value solves the bivariate rectangle probability (normal, or
/// t(n-1) when the small-sample mode is on) at the influence correlation.
pub fn max_test(
    between_est: &DoorEstimate,
    within_est: &DoorEstimate,
    cov: &JointCovariance,
    alpha: f64,
    sided: Sided,
) -> Result<(TestResult, SimultaneousCi), InferenceError> {
    check_alpha(alpha)?;
    if between_est.variance <= 0.0 || within_est.variance <= 0.0 {
        return Err(InferenceError::ZeroVariance);
    }
    let se_b = between_est.se();
    let se_w = within_est.se();
    let wb = (between_est.estimate - 0.5) / se_b;
    let ww = (within_est.estimate - 0.5) / se_w;
    let rho = cov.rho;
    let df_mode = joint_df_mode(between_est, within_est, cov.n);

    let rect = |c: f64| match sided {
        Sided::TwoSided => Rectangle::symmetric(c, rho).unwrap(),
        Sided::OneSidedGreater => Rectangle::upper_corner(c, rho).unwrap(),
    };
    let prob = |c: f64| match df_mode {
        DfMode::Normal => bvn_rect(&rect(c)),
        DfMode::T { df } => bvt_rect(&rect(c), df).unwrap(),
    };
    let c = solve_symmetric_critical(prob, 1.0 - alpha)
        .expect("rectangle probability is continuous and reaches any level in (0,1)");

    let statistic = match sided {
        Sided::TwoSided => wb.abs().max(ww.abs()),
        Sided::OneSidedGreater => wb.max(ww),
    };
    let p_value = (1.0 - prob(statistic)).clamp(0.0, 1.0);

    let ci = |est: &DoorEstimate| match sided {
        Sided::TwoSided => (
            (est.estimate - c * est.se()).max(0.0),
            (est.estimate + c * est.se()).min(1.0),
        ),
        Sided::OneSidedGreater => ((est.estimate - c * est.se()).max(0.0), 1.0),
    };

    Ok((
        TestResult {
            statistic,
            critical_value: c,
            p_value: Some(p_value),
            reject: statistic > c,
            alpha,
            sided,
            calibration: match df_mode {
                DfMode::Normal => Calibration::Bvn,
                DfMode::T { df } => Calibration::Bvt { df },
            },
        },
        SimultaneousCi {
            ci_within: ci(within_est),
            ci_between: ci(between_est),
            joint_level: 1.0 - alpha,
        },
    ))
}

// ---------------------------------------------------------------------------
// Weighted hybrid test
// ---------------------------------------------------------------------------

/// Test of H0: D_b = D_w = 0.5 based on the variance-minimizing weighted
/// average of the two estimates. Weights come from the influence covariance;
/// a negative unconstrained weight is clamped to the boundary, picking the
/// smaller-variance estimator. Errors with `SingularCovariance` when the
/// covariance cannot be inverted (callers fall back to the max test).
pub fn weighted_test(
    between_est: &DoorEstimate,
    within_est: &DoorEstimate,
    cov: &JointCovariance,
    alpha: f64,
    sided: Sided,
) -> Result<(HybridEstimate, TestResult), InferenceError> {
    check_alpha(alpha)?;
    let s11 = cov.sigma[0][0];
    let s22 = cov.sigma[1][1];
    let s12 = cov.sigma[0][1];
    if s11 <= 0.0 || s22 <= 0.0 {
        return Err(InferenceError::SingularCovariance);
    }
    // eigenvalues of the symmetric 2x2
    let tr = s11 + s22;
    let disc = ((s11 - s22) * (s11 - s22) + 4.0 * s12 * s12).sqrt();
    let lam_max = 0.5 * (tr + disc);
    let lam_min = 0.5 * (tr - disc);
    if lam_min <= 0.0 || lam_max / lam_min > 1e12 {
        return Err(InferenceError::SingularCovariance);
    }

    let n = cov.n as f64;
    let det = s11 * s22 - s12 * s12;
    let denom = s11 + s22 - 2.0 * s12; // j' adj(Sigma) j / det cancels below
    let raw_between = (s22 - s12) / denom;
    let raw_within = (s11 - s12) / denom;
    let (weight_within, weight_between, variance) = if raw_between < 0.0 || raw_within < 0.0 {
        // boundary: keep the smaller-variance estimate alone
        if s22 <= s11 {
            (1.0, 0.0, s22 / n)
        } else {
            (0.0, 1.0, s11 / n)
        }
    } else {
        (raw_within, raw_between, det / (denom * n))
    };

    let estimate = weight_within * within_est.estimate + weight_between * between_est.estimate;
    let df_mode = joint_df_mode(between_est, within_est, cov.n);
    let variance = match df_mode {
        DfMode::Normal => variance,
        DfMode::T { .. } => variance * n / (n - 2.0),
    };
    let hybrid = HybridEstimate {
        weight_within,
        weight_between,
        estimate,
        variance,
    };

    let statistic = (estimate - 0.5) / variance.sqrt();
    let (critical_value, reject, p) = match sided {
        Sided::TwoSided => {
            let c = scalar_quantile(1.0 - alpha / 2.0, df_mode);
            let p = 2.0 * (1.0 - scalar_cdf(statistic.abs(), df_mode));
            (c, statistic.abs() > c, p)
        }
        Sided::OneSidedGreater => {
            let c = scalar_quantile(1.0 - alpha, df_mode);
            let p = 1.0 - scalar_cdf(statistic, df_mode);
            (c, statistic > c, p)
        }
    };
    Ok((
        hybrid,
        TestResult {
            statistic,
            critical_value,
            p_value: Some(p.clamp(0.0, 1.0)),
            reject,
            alpha,
            sided,
            calibration: match df_mode {
                DfMode::Normal => Calibration::Normal,
                DfMode::T { df } => Calibration::T { df },
            },
        },
    ))
}

// ---------------------------------------------------------------------------
// Method selection
// ---------------------------------------------------------------------------

/// Within-cluster estimator choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WithinMethod {
    Ivw,
    SswType1,
    SswType2,
    SswType3,
}

impl WithinMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            WithinMethod::Ivw => "within_ivw",
            WithinMethod::SswType1 => "within_ssw_type1",
            WithinMethod::SswType2 => "within_ssw_type2",
            WithinMethod::SswType3 => "within_ssw_type3",
        }
    }
}

/// Between-cluster estimator choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetweenMethod {
    Influence,
    InfluenceCorrected,
}

impl BetweenMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            BetweenMethod::Influence => "between",
            BetweenMethod::InfluenceCorrected => "between_corrected",
        }
    }
}

/// Deterministic method recommendation by cluster count, cluster sizes, and
/// design. Small trials (n < 15) get plug-in within variances, the corrected
/// between estimator, and t / bivariate-t calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSelection {
    pub within: Option<WithinMethod>,
    pub within_alternatives: Vec<WithinMethod>,
    pub between: BetweenMethod,
    pub small_sample: bool,
}

pub fn select_methods(n: usize, cluster_sizes: &[usize], design: Design) -> MethodSelection {
    select_methods_forced(n < 15, cluster_sizes, design)
}

/// The same mapping with the small-sample switch forced rather than derived
/// from the cluster count (for callers exposing an on/off override).
pub fn select_methods_forced(
    small: bool,
    cluster_sizes: &[usize],
    design: Design,
) -> MethodSelection {
    let median_size = median(cluster_sizes);
    let within = if design == Design::OneGroup {
        None
    } else if small {
        Some(WithinMethod::SswType2)
    } else {
        Some(WithinMethod::SswType1)
    };
    let within_alternatives = if design == Design::OneGroup {
        Vec::new()
    } else if small {
        // large clusters also support the corrected influence variance and,
        // when per-cluster variances stay positive, inverse-variance weights
        if median_size >= 30 {
            vec![WithinMethod::SswType3, WithinMethod::Ivw]
        } else {
            vec![WithinMethod::SswType3]
        }
    } else {
        Vec::new()
    };
    MethodSelection {
        within,
        within_alternatives,
        between: if small {
            BetweenMethod::InfluenceCorrected
        } else {
            BetweenMethod::Influence
        },
        small_sample: small,
    }
}

fn median(sizes: &[usize]) -> usize {
    if sizes.is_empty() {
        return 0;
    }
    let mut v = sizes.to_vec();
    v.sort_unstable();
    v[v.len() / 2]
}
