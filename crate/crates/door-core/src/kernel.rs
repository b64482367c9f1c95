//! Domain types, input validation, and per-cluster DOOR statistics: the
//! tie-corrected Wilcoxon-Mann-Whitney estimator of the cluster DOOR
//! probability and its variance components.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("no records supplied")]
    EmptyInput,
    #[error("record {record}: DOOR rank must be at least 1, got {value}")]
    RankBelowOne { record: usize, value: i64 },
    #[error("record {record}: DOOR rank {value} exceeds the configured number of levels {k}")]
    RankAboveK { record: usize, value: i64, k: usize },
    #[error("record {record}: arm label must be 0 (control) or 1 (treatment), got {label}")]
    ArmLabelInvalid { record: usize, label: i64 },
    #[error("the {0} arm has no subjects anywhere in the trial")]
    ArmEmptyTrialWide(&'static str),
    #[error("number of DOOR levels must be at least 2, got {0}")]
    TooFewLevels(usize),
    #[error("both arms of the cluster must be nonempty")]
    EmptyArm,
    #[error("rank distribution absent for the {0} arm")]
    DistributionAbsent(&'static str),
}

/// A DOOR rank: 1 is the most desirable outcome level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DoorRank(u32);

impl DoorRank {
    pub fn new(value: u32) -> Result<Self, KernelError> {
        if value < 1 {
            return Err(KernelError::RankBelowOne {
                record: 0,
                value: value as i64,
            });
        }
        Ok(DoorRank(value))
    }

    pub fn value(self) -> u32 {
        self.0
    }

    /// Zero-based level index.
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }
}

/// Treatment indicator; the trial has exactly two arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arm {
    Control,
    Treatment,
}

impl Arm {
    pub fn from_label(label: i64) -> Option<Arm> {
        match label {
            0 => Some(Arm::Control),
            1 => Some(Arm::Treatment),
            _ => None,
        }
    }

    pub fn label(self) -> u8 {
        match self {
            Arm::Control => 0,
            Arm::Treatment => 1,
        }
    }
}

/// How treatment was assigned across clusters, derived from the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Design {
    /// Every cluster is entirely treatment or entirely control.
    OneGroup,
    /// Every cluster contains subjects from both arms.
    TwoGroup,
    /// Some clusters are one-group, some two-group.
    Mixture,
}

impl Design {
    pub fn as_str(self) -> &'static str {
        match self {
            Design::OneGroup => "one_group",
            Design::TwoGroup => "two_group",
            Design::Mixture => "mixture",
        }
    }
}

/// One cluster's subjects, partitioned by arm. A one-group cluster (either
/// side empty) is legal; its within-cluster DOOR probability is inestimable.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub id: String,
    pub ranks_treatment: Vec<DoorRank>,
    pub ranks_control: Vec<DoorRank>,
}

impl Cluster {
    pub fn m1(&self) -> usize {
        self.ranks_treatment.len()
    }

    pub fn m2(&self) -> usize {
        self.ranks_control.len()
    }

    pub fn size(&self) -> usize {
        self.m1() + self.m2()
    }

    pub fn is_two_arm(&self) -> bool {
        self.m1() >= 1 && self.m2() >= 1
    }

    fn max_rank(&self) -> u32 {
        self.ranks_treatment
            .iter()
            .chain(self.ranks_control.iter())
            .map(|r| r.value())
            .max()
            .unwrap_or(1)
    }
}

/// A validated trial: clusters in input order plus the trial-wide number of
/// DOOR levels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialData {
    clusters: Vec<Cluster>,
    k_levels: usize,
}

impl TrialData {
    /// Builds a trial from clusters, inferring K as the maximum observed rank
    /// (at least 2) unless `k_override` is given.
    pub fn new(clusters: Vec<Cluster>, k_override: Option<usize>) -> Result<Self, KernelError> {
        if clusters.is_empty() || clusters.iter().all(|c| c.size() == 0) {
            return Err(KernelError::EmptyInput);
        }
        let max_rank = clusters.iter().map(|c| c.max_rank()).max().unwrap() as usize;
        let k_levels = match k_override {
            Some(k) => {
                if k < 2 {
                    return Err(KernelError::TooFewLevels(k));
                }
                if max_rank > k {
                    return Err(KernelError::RankAboveK {
                        record: 0,
                        value: max_rank as i64,
                        k,
                    });
                }
                k
            }
            None => max_rank.max(2),
        };
        let trial = TrialData { clusters, k_levels };
        if trial.n_treatment() == 0 {
            return Err(KernelError::ArmEmptyTrialWide("treatment"));
        }
        if trial.n_control() == 0 {
            return Err(KernelError::ArmEmptyTrialWide("control"));
        }
        Ok(trial)
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn k_levels(&self) -> usize {
        self.k_levels
    }

    /// Number of clusters.
    pub fn n(&self) -> usize {
        self.clusters.len()
    }

    /// Total treatment-arm subjects.
    pub fn n_treatment(&self) -> usize {
        self.clusters.iter().map(|c| c.m1()).sum()
    }

    /// Total control-arm subjects.
    pub fn n_control(&self) -> usize {
        self.clusters.iter().map(|c| c.m2()).sum()
    }

    pub fn n_subjects(&self) -> usize {
        self.clusters.iter().map(|c| c.size()).sum()
    }

    pub fn design(&self) -> Design {
        let two_arm = self.clusters.iter().filter(|c| c.is_two_arm()).count();
        if two_arm == 0 {
            Design::OneGroup
        } else if two_arm == self.n() {
            Design::TwoGroup
        } else {
            Design::Mixture
        }
    }

    /// The arm-swapped trial (treatment and control exchanged everywhere).
    pub fn arm_swapped(&self) -> TrialData {
        let clusters = self
            .clusters
            .iter()
            .map(|c| Cluster {
                id: c.id.clone(),
                ranks_treatment: c.ranks_control.clone(),
                ranks_control: c.ranks_treatment.clone(),
            })
            .collect();
        TrialData {
            clusters,
            k_levels: self.k_levels,
        }
    }
}

/// Groups raw `(cluster_id, arm, rank)` records into a validated trial.
/// Clusters keep first-appearance order; all downstream sums iterate in that
/// order, so results are reproducible bit-for-bit.
pub fn validate_trial(
    records: &[(String, i64, i64)],
    k_override: Option<usize>,
) -> Result<TrialData, KernelError> {
    if records.is_empty() {
        return Err(KernelError::EmptyInput);
    }
    let mut order: Vec<String> = Vec::new();
    let mut clusters: Vec<Cluster> = Vec::new();
    for (idx, (cluster_id, arm_label, rank)) in records.iter().enumerate() {
        let arm = Arm::from_label(*arm_label).ok_or(KernelError::ArmLabelInvalid {
            record: idx,
            label: *arm_label,
        })?;
        if *rank < 1 {
            return Err(KernelError::RankBelowOne {
                record: idx,
                value: *rank,
            });
        }
        if let Some(k) = k_override {
            if *rank > k as i64 {
                return Err(KernelError::RankAboveK {
                    record: idx,
                    value: *rank,
                    k,
                });
            }
        }
        let rank = DoorRank::new(*rank as u32)?;
        let pos = match order.iter().position(|id| id == cluster_id) {
            Some(p) => p,
            None => {
                order.push(cluster_id.clone());
                clusters.push(Cluster {
                    id: cluster_id.clone(),
                    ranks_treatment: Vec::new(),
                    ranks_control: Vec::new(),
                });
                clusters.len() - 1
            }
        };
        match arm {
            Arm::Treatment => clusters[pos].ranks_treatment.push(rank),
            Arm::Control => clusters[pos].ranks_control.push(rank),
        }
    }
    TrialData::new(clusters, k_override)
}

// ---------------------------------------------------------------------------
// Per-cluster DOOR statistics
// ---------------------------------------------------------------------------

/// Win kernel for a single pair: 1 if the treated rank is more desirable
/// (lower), 1/2 on a tie, 0 otherwise.
#[inline]
pub fn phi(treated: DoorRank, control: DoorRank) -> f64 {
    if treated.value() < control.value() {
        1.0
    } else if treated.value() == control.value() {
        0.5
    } else {
        0.0
    }
}

/// Tie-corrected Wilcoxon-Mann-Whitney DOOR probability for one treated and
/// one control sample: the mean of `phi` over all pairs.
pub fn door_wmw(ranks_t: &[DoorRank], ranks_c: &[DoorRank]) -> Result<f64, KernelError> {
    if ranks_t.is_empty() || ranks_c.is_empty() {
        return Err(KernelError::EmptyArm);
    }
    let mut sum = 0.0;
    for &t in ranks_t {
        for &c in ranks_c {
            sum += phi(t, c);
        }
    }
    Ok(sum / (ranks_t.len() as f64 * ranks_c.len() as f64))
}

/// Observed level frequencies per arm; a side is absent when its arm is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct RankDistribution {
    pub p1: Option<Vec<f64>>,
    pub p2: Option<Vec<f64>>,
}

/// Per-arm level frequencies for a cluster, over `k` levels.
pub fn cluster_rank_dist(cluster: &Cluster, k: usize) -> RankDistribution {
    debug_assert!(k as u32 >= cluster.max_rank());
    let freq = |ranks: &[DoorRank]| -> Option<Vec<f64>> {
        if ranks.is_empty() {
            return None;
        }
        let mut counts = vec![0.0; k];
        for r in ranks {
            counts[r.index()] += 1.0;
        }
        let m = ranks.len() as f64;
        Some(counts.into_iter().map(|c| c / m).collect())
    };
    RankDistribution {
        p1: freq(&cluster.ranks_treatment),
        p2: freq(&cluster.ranks_control),
    }
}

/// Variance components of the per-cluster WMW estimator from the level
/// frequencies: `sigma10` is the variance induced by the treated draw,
/// `sigma01` by the control draw. Tiny negative values from floating-point
/// cancellation are clamped to zero.
pub fn sigma_components(dist: &RankDistribution, d_wi: f64) -> Result<(f64, f64), KernelError> {
    let p1 = dist
        .p1
        .as_ref()
        .ok_or(KernelError::DistributionAbsent("treatment"))?;
    let p2 = dist
        .p2
        .as_ref()
        .ok_or(KernelError::DistributionAbsent("control"))?;
    debug_assert_eq!(p1.len(), p2.len());

    let sigma10 = one_sided_component(p1, p2) - d_wi * d_wi;
    let sigma01 = one_sided_component(p2, p1) - (1.0 - d_wi) * (1.0 - d_wi);
    Ok((clamp_variance(sigma10), clamp_variance(sigma01)))
}

/// `sum_j a[j] * S_b(j) * S_b(j+1) + (1/4) sum_j a[j] * b[j]^2` with
/// `S_b(j) = sum_{l >= j} b[l]`; equals `E_a[g^2]` for the conditional win
/// probability `g(j) = S_b(j+1) + b[j]/2`.
fn one_sided_component(a: &[f64], b: &[f64]) -> f64 {
    let k = a.len();
    let mut total = 0.0;
    let mut suffix = 0.0; // S_b(j+1), running from the top level down
    for j in (0..k).rev() {
        let s_next = suffix;
        let s_here = suffix + b[j];
        total += a[j] * s_here * s_next + 0.25 * a[j] * b[j] * b[j];
        suffix = s_here;
    }
    total
}

fn clamp_variance(x: f64) -> f64 {
    debug_assert!(x > -1e-9, "variance component far below zero: {x}");
    if x < 0.0 {
        0.0
    } else {
        x
    }
}

/// Per-cluster summary: the DOOR probability estimate, its variance
/// components, and the finite-sample variance
/// `sigma10/m1 + sigma01/m2`. All fields except the arm sizes are absent for
/// one-group clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSummary {
    pub d_wi: Option<f64>,
    pub sigma10_sq: Option<f64>,
    pub sigma01_sq: Option<f64>,
    pub var_dwi: Option<f64>,
    pub m1: usize,
    pub m2: usize,
    /// Raw pairwise win sum `sum phi` over the cluster's treated x control
    /// pairs; kept so pooled estimators reproduce pair enumeration exactly.
    pub pair_phi_sum: Option<f64>,
}

impl ClusterSummary {
    pub fn is_two_arm(&self) -> bool {
        self.m1 >= 1 && self.m2 >= 1
    }

    pub fn pair_count(&self) -> f64 {
        (self.m1 * self.m2) as f64
    }
}

/// Summarizes a cluster over `k` levels; within fields are absent for
/// one-group clusters.
pub fn summarize_cluster(cluster: &Cluster, k: usize) -> ClusterSummary {
    let m1 = cluster.m1();
    let m2 = cluster.m2();
    if !cluster.is_two_arm() {
        return ClusterSummary {
            d_wi: None,
            sigma10_sq: None,
            sigma01_sq: None,
            var_dwi: None,
            m1,
            m2,
            pair_phi_sum: None,
        };
    }
    let counts = ClusterCounts::from_cluster(cluster, k);
    let phi_sum = pair_phi_sum(&counts.treatment, &counts.control);
    let d_wi = phi_sum / (m1 as f64 * m2 as f64);
    let dist = cluster_rank_dist(cluster, k);
    let (s10, s01) = sigma_components(&dist, d_wi).expect("two-arm cluster has both distributions");
    let var_dwi = s10 / m1 as f64 + s01 / m2 as f64;
    ClusterSummary {
        d_wi: Some(d_wi),
        sigma10_sq: Some(s10),
        sigma01_sq: Some(s01),
        var_dwi: Some(var_dwi),
        m1,
        m2,
        pair_phi_sum: Some(phi_sum),
    }
}

/// Per-level subject counts for one cluster. Counts are held as f64 so the
/// pairwise win sums (all multiples of 1/2, far below 2^52) stay exact.
#[derive(Debug, Clone)]
pub struct ClusterCounts {
    pub treatment: Vec<f64>,
    pub control: Vec<f64>,
}

impl ClusterCounts {
    pub fn from_cluster(cluster: &Cluster, k: usize) -> Self {
        let mut treatment = vec![0.0; k];
        let mut control = vec![0.0; k];
        for r in &cluster.ranks_treatment {
            treatment[r.index()] += 1.0;
        }
        for r in &cluster.ranks_control {
            control[r.index()] += 1.0;
        }
        ClusterCounts { treatment, control }
    }
}

/// `sum_{j,l} t[j] c[l] phi(j, l)` over level counts: each treated subject at
/// level j wins against every control subject above j and half-wins ties.
pub fn pair_phi_sum(t_counts: &[f64], c_counts: &[f64]) -> f64 {
    debug_assert_eq!(t_counts.len(), c_counts.len());
    let mut total = 0.0;
    let mut suffix = 0.0; // control subjects strictly above level j
    for j in (0..t_counts.len()).rev() {
        total += t_counts[j] * (suffix + 0.5 * c_counts[j]);
        suffix += c_counts[j];
    }
    total
}
