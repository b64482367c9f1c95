//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured values (run with `--nocapture` to see them).
//!
//! The Monte Carlo criteria run 2,000 replicates by default; set
//! DOOR_FULL_SCALE=1 to run the full 10,000-replicate versions.

use door_cli::commands::cmd_oracle;
use door_core::numerics::{bvn_cdf, bvn_rect, solve_symmetric_critical, std_normal_cdf, Rectangle};
use door_core::{
    between, make_model, run_scenario, summarize_cluster, within_ssw, BetweenMethod, Cluster,
    Design, DoorRank, EstimatorError, MethodSet, OperatingCharacteristics, Sided, SimScenario,
    SswVariance, TrialData, WithinMethod, DEFAULT_CONTROL_PROPS,
};
use rand::Rng;

fn replicates() -> usize {
    if std::env::var("DOOR_FULL_SCALE").as_deref() == Ok("1") {
        10_000
    } else {
        2_000
    }
}

fn scenario(
    n: usize,
    m: usize,
    design: Design,
    beta: f64,
    rho_c: f64,
    seed: u64,
    methods: MethodSet,
) -> SimScenario {
    SimScenario {
        n_clusters: n,
        cluster_size: m,
        design,
        model: make_model(beta, rho_c, &DEFAULT_CONTROL_PROPS).unwrap(),
        replicates: replicates(),
        seed,
        methods,
        alpha: 0.05,
        sided: Sided::TwoSided,
        oracle_draws: 4_000_000,
    }
}

fn rejection(oc: &OperatingCharacteristics, method: &str) -> (f64, f64) {
    let row = oc
        .row(method)
        .unwrap_or_else(|| panic!("missing row {method}"));
    (
        row.rejection
            .unwrap_or_else(|| panic!("no rejections for {method}")),
        row.rejection_mc_se.unwrap(),
    )
}

/// Criterion 1: the Monte Carlo oracle reproduces the reference true values
/// of D_b and D_w at beta = 0.1 across the six correlation levels, within
/// +-0.0008 at 2e7 pair draws per value.
#[test]
fn criterion_1_oracle_truth_reproduction() {
    let rhos = [0.001, 0.02, 0.06, 0.1, 0.3, 0.5];
    let expect_db = [0.5266, 0.5263, 0.5258, 0.5252, 0.5223, 0.5188];
    let expect_dw = [0.5266, 0.5266, 0.5265, 0.5264, 0.5257, 0.5246];
    let rows = cmd_oracle(0.1, &rhos, &DEFAULT_CONTROL_PROPS, 20_000_000, 0xACC1).unwrap();
    for (i, row) in rows.iter().enumerate() {
        assert!(
            (row.d_b - expect_db[i]).abs() <= 0.0008,
            "D_b at rho_c={}: got {:.5}, expected {}",
            rhos[i],
            row.d_b,
            expect_db[i]
        );
        assert!(
            (row.d_w - expect_dw[i]).abs() <= 0.0008,
            "D_w at rho_c={}: got {:.5}, expected {}",
            rhos[i],
            row.d_w,
            expect_dw[i]
        );
    }
    println!(
        "ACCEPTANCE 1 (oracle truth reproduction): PASS — max |D_b err| {:.1e}, max |D_w err| {:.1e}",
        rows.iter()
            .enumerate()
            .map(|(i, r)| (r.d_b - expect_db[i]).abs())
            .fold(0.0f64, f64::max),
        rows.iter()
            .enumerate()
            .map(|(i, r)| (r.d_w - expect_dw[i]).abs())
            .fold(0.0f64, f64::max)
    );
}

// --- criterion 2 machinery: independent pair-enumeration oracles ----------

fn phi_raw(t: u32, c: u32) -> f64 {
    if t < c {
        1.0
    } else if t == c {
        0.5
    } else {
        0.0
    }
}

struct BruteTrial {
    // (treated ranks, control ranks) per cluster
    clusters: Vec<(Vec<u32>, Vec<u32>)>,
}

impl BruteTrial {
    fn dwi(&self, i: usize) -> Option<f64> {
        let (t, c) = &self.clusters[i];
        if t.is_empty() || c.is_empty() {
            return None;
        }
        let mut sum = 0.0;
        for &a in t {
            for &b in c {
                sum += phi_raw(a, b);
            }
        }
        Some(sum / (t.len() * c.len()) as f64)
    }

    fn ssw(&self) -> Option<f64> {
        let mut sum = 0.0;
        let mut pairs = 0usize;
        for (t, c) in &self.clusters {
            for &a in t {
                for &b in c {
                    sum += phi_raw(a, b);
                }
            }
            pairs += t.len() * c.len();
        }
        if pairs == 0 {
            return None;
        }
        Some(sum / pairs as f64)
    }

    fn between(&self) -> Option<f64> {
        let mut sum = 0.0;
        let mut pairs = 0usize;
        for (i, (t, _)) in self.clusters.iter().enumerate() {
            for (k, (_, c)) in self.clusters.iter().enumerate() {
                if i == k {
                    continue;
                }
                for &a in t {
                    for &b in c {
                        sum += phi_raw(a, b);
                    }
                }
                pairs += t.len() * c.len();
            }
        }
        if pairs == 0 {
            return None;
        }
        Some(sum / pairs as f64)
    }
}

/// Criterion 2: on the grid of trial shapes with n <= 3 clusters, cluster
/// sizes m_i <= 4, and K <= 3 levels, the cluster estimates, the pooled
/// sample-size weighted estimate, and the between estimate equal independent
/// pair-enumeration oracles bit for bit. Shapes are exhaustive; rank
/// assignments are exhaustive up to 3^7 combinations per shape and seeded
/// samples beyond that (full exhaustion over 3^12 assignments per shape is
/// not feasible in the 30 s budget).
#[test]
fn criterion_2_estimator_exactness() {
    let mut shapes: Vec<Vec<(usize, usize)>> = Vec::new(); // (m1, m2) per cluster
    let mut cluster_shapes = Vec::new();
    for m in 1..=4usize {
        for m1 in 0..=m {
            cluster_shapes.push((m1, m - m1));
        }
    }
    for n in 1..=3usize {
        let mut idx = vec![0usize; n];
        loop {
            shapes.push(idx.iter().map(|&i| cluster_shapes[i]).collect());
            // odometer over cluster shapes
            let mut pos = 0;
            loop {
                idx[pos] += 1;
                if idx[pos] < cluster_shapes.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
                if pos == n {
                    break;
                }
            }
            if pos == n {
                break;
            }
        }
    }

    let mut trials_checked = 0u64;
    let mut exact_checks = 0u64;
    for (shape_idx, shape) in shapes.iter().enumerate() {
        let total: usize = shape.iter().map(|&(a, b)| a + b).sum();
        if total == 0 {
            continue;
        }
        let exhaustive = 3usize.pow(total as u32) <= 2187;
        let assignments: Box<dyn Iterator<Item = Vec<u32>>> = if exhaustive {
            let count = 3usize.pow(total as u32);
            Box::new((0..count).map(move |mut code| {
                (0..total)
                    .map(|_| {
                        let r = (code % 3) as u32 + 1;
                        code /= 3;
                        r
                    })
                    .collect()
            }))
        } else {
            Box::new((0..150).map(move |i| {
                let mut rng =
                    door_core::simulation::stream_rng(0xACC3, (shape_idx as u64) << 16 | i);
                (0..total).map(|_| rng.random_range(1..=3u32)).collect()
            }))
        };

        for ranks in assignments {
            let mut offset = 0usize;
            let mut clusters = Vec::new();
            let mut brute_clusters = Vec::new();
            for (ci, &(m1, m2)) in shape.iter().enumerate() {
                let t: Vec<u32> = ranks[offset..offset + m1].to_vec();
                offset += m1;
                let c: Vec<u32> = ranks[offset..offset + m2].to_vec();
                offset += m2;
                clusters.push(Cluster {
                    id: format!("c{ci}"),
                    ranks_treatment: t.iter().map(|&v| DoorRank::new(v).unwrap()).collect(),
                    ranks_control: c.iter().map(|&v| DoorRank::new(v).unwrap()).collect(),
                });
                brute_clusters.push((t, c));
            }
            let brute = BruteTrial {
                clusters: brute_clusters,
            };
            let trial = match TrialData::new(clusters, Some(3)) {
                Ok(t) => t,
                Err(_) => continue, // an arm empty trial-wide
            };
            trials_checked += 1;

            let k = trial.k_levels();
            let summaries: Vec<_> = trial
                .clusters()
                .iter()
                .map(|c| summarize_cluster(c, k))
                .collect();
            for (i, s) in summaries.iter().enumerate() {
                match (s.d_wi, brute.dwi(i)) {
                    (Some(a), Some(b)) => {
                        assert!(a == b, "D_wi mismatch: {a} vs {b}");
                        exact_checks += 1;
                    }
                    (None, None) => {}
                    (a, b) => panic!("availability mismatch: {a:?} vs {b:?}"),
                }
            }
            match (within_ssw(&summaries, SswVariance::Type1), brute.ssw()) {
                (Ok(est), Some(b)) => {
                    assert!(est.estimate == b, "ssw mismatch: {} vs {b}", est.estimate);
                    exact_checks += 1;
                }
                (Err(EstimatorError::NoTwoArmCluster), None) => {}
                (a, b) => panic!("ssw availability mismatch: {a:?} vs {b:?}"),
            }
            match (between(&trial), brute.between()) {
                (Ok(est), Some(b)) => {
                    assert!(
                        est.estimate == b,
                        "between mismatch: {} vs {b}",
                        est.estimate
                    );
                    exact_checks += 1;
                }
                (Err(EstimatorError::NoBetweenPairs(_)), None) => {}
                (a, b) => panic!("between availability mismatch: {a:?} vs {b:?}"),
            }
        }
    }
    println!(
        "ACCEPTANCE 2 (estimator exactness): PASS — {trials_checked} trials, {exact_checks} exact comparisons"
    );
}

/// Criterion 3: large-sample Type I error at beta = 0 for the three paired
/// (n, m) settings under one-group (between test) and two-group (within,
/// between, max, weighted) randomization, all within [0.037, 0.068].
#[test]
fn criterion_3_type_i_error_large_sample() {
    let mut lines = Vec::new();
    for (i, &(n, m)) in [(200usize, 4usize), (100, 8), (50, 16)].iter().enumerate() {
        let s = scenario(
            n,
            m,
            Design::TwoGroup,
            0.0,
            0.1,
            0xACC4 + i as u64,
            MethodSet::large_sample(),
        );
        let oc = run_scenario(&s).unwrap();
        for method in ["within_ssw_type1", "between", "max_test", "weighted_test"] {
            let (rate, _) = rejection(&oc, method);
            assert!(
                (0.037..=0.068).contains(&rate),
                "two_group (n={n}, m={m}) {method}: Type I error {rate}"
            );
            lines.push(format!("two_group n={n} m={m} {method}={rate:.4}"));
        }

        let s = scenario(
            n,
            m,
            Design::OneGroup,
            0.0,
            0.1,
            0xACC5 + i as u64,
            MethodSet::between_only(),
        );
        let oc = run_scenario(&s).unwrap();
        let (rate, _) = rejection(&oc, "between");
        assert!(
            (0.037..=0.068).contains(&rate),
            "one_group (n={n}, m={m}) between: Type I error {rate}"
        );
        lines.push(format!("one_group n={n} m={m} between={rate:.4}"));
    }
    println!(
        "ACCEPTANCE 3 (large-sample Type I error in [0.037, 0.068]): PASS — {}",
        lines.join(", ")
    );
}

/// Criterion 4: at n = 10, m = 60 the uncorrected type-1 within test is
/// anticonservative (> 0.07) while the type-2 and type-3 (t(9)) corrected
/// versions control the Type I error within [0.03, 0.07].
#[test]
fn criterion_4_small_sample_correction_effect() {
    let s = scenario(
        10,
        60,
        Design::TwoGroup,
        0.0,
        0.1,
        0xACC6,
        MethodSet {
            within: vec![
                WithinMethod::SswType1,
                WithinMethod::SswType2,
                WithinMethod::SswType3,
            ],
            between: Some(BetweenMethod::InfluenceCorrected),
            joint_tests: false,
        },
    );
    let oc = run_scenario(&s).unwrap();
    let (t1, _) = rejection(&oc, "within_ssw_type1");
    let (t2, _) = rejection(&oc, "within_ssw_type2");
    let (t3, _) = rejection(&oc, "within_ssw_type3");
    assert!(
        t1 > 0.07,
        "uncorrected type 1 Type I error {t1} not inflated"
    );
    assert!((0.03..=0.07).contains(&t2), "type 2 Type I error {t2}");
    assert!((0.03..=0.07).contains(&t3), "type 3 Type I error {t3}");
    println!(
        "ACCEPTANCE 4 (small-sample correction): PASS — type1={t1:.4} (>0.07), type2={t2:.4}, type3={t3:.4} (in [0.03, 0.07])"
    );
}

/// Criterion 5: under mixture randomization at beta = 0.25 the weighted test
/// has the highest power; the max test sits at or above the weaker marginal.
/// Ties are allowed within two MC standard errors.
#[test]
fn criterion_5_power_ordering_mixture() {
    let s = scenario(
        50,
        16,
        Design::Mixture,
        0.25,
        0.06,
        0xACC7,
        MethodSet::large_sample(),
    );
    let oc = run_scenario(&s).unwrap();
    let (p_w, se_w) = rejection(&oc, "within_ssw_type1");
    let (p_b, se_b) = rejection(&oc, "between");
    let (p_max, se_max) = rejection(&oc, "max_test");
    let (p_wt, se_wt) = rejection(&oc, "weighted_test");

    let slack = |a: f64, b: f64| 2.0 * (a * a + b * b).sqrt();
    assert!(
        p_wt >= p_max - slack(se_wt, se_max),
        "weighted ({p_wt}) below max ({p_max})"
    );
    assert!(
        p_max >= p_w.min(p_b) - slack(se_max, se_w.max(se_b)),
        "max ({p_max}) below weaker marginal ({})",
        p_w.min(p_b)
    );
    for (name, p, se) in [
        ("within", p_w, se_w),
        ("between", p_b, se_b),
        ("max", p_max, se_max),
    ] {
        assert!(
            p_wt >= p - slack(se_wt, se),
            "weighted ({p_wt}) not the maximum: {name} at {p}"
        );
    }
    println!(
        "ACCEPTANCE 5 (mixture power ordering): PASS — within={p_w:.3}, between={p_b:.3}, max={p_max:.3}, weighted={p_wt:.3}"
    );
}

/// Criterion 6: 95% CI coverage of the type-1 within estimator and the
/// between estimator at the Table-1 setting, both within [0.93, 0.97].
#[test]
fn criterion_6_coverage() {
    let s = scenario(
        100,
        8,
        Design::TwoGroup,
        0.1,
        0.1,
        0xACC8,
        MethodSet {
            within: vec![WithinMethod::SswType1],
            between: Some(BetweenMethod::Influence),
            joint_tests: false,
        },
    );
    let oc = run_scenario(&s).unwrap();
    let cov_w = oc.row("within_ssw_type1").unwrap().coverage.unwrap();
    let cov_b = oc.row("between").unwrap().coverage.unwrap();
    assert!((0.93..=0.97).contains(&cov_w), "within coverage {cov_w}");
    assert!((0.93..=0.97).contains(&cov_b), "between coverage {cov_b}");
    println!(
        "ACCEPTANCE 6 (coverage in [0.93, 0.97]): PASS — within={cov_w:.4}, between={cov_b:.4} (truth D_w={:.4}, D_b={:.4})",
        oc.truth_within.unwrap().value,
        oc.truth_between.unwrap().value
    );
}

/// Criterion 7: numerics identities — the bivariate normal orthant formula,
/// factorization at rho = 0, and the closed-form max-test critical values.
#[test]
fn criterion_7_numerics_identities() {
    for i in -9..=9 {
        let rho = i as f64 / 10.0;
        let expect = 0.25 + rho.asin() / (2.0 * std::f64::consts::PI);
        let got = bvn_cdf(0.0, 0.0, rho);
        assert!(
            (got - expect).abs() <= 1e-8,
            "orthant at rho={rho}: {got} vs {expect}"
        );
    }

    let rect = Rectangle::new((-0.8, -1.7), (1.2, 0.4), 0.0).unwrap();
    let product =
        (std_normal_cdf(1.2) - std_normal_cdf(-0.8)) * (std_normal_cdf(0.4) - std_normal_cdf(-1.7));
    assert!((bvn_rect(&rect) - product).abs() <= 1e-10);

    let two_sided =
        solve_symmetric_critical(|c| bvn_rect(&Rectangle::symmetric(c, 0.0).unwrap()), 0.95)
            .unwrap();
    assert!(
        (two_sided - 2.2365).abs() <= 1e-4,
        "two-sided c at rho=0: {two_sided}"
    );
    let one_sided = solve_symmetric_critical(
        |c| bvn_rect(&Rectangle::upper_corner(c, 0.0).unwrap()),
        0.95,
    )
    .unwrap();
    assert!(
        (one_sided - 1.9545).abs() <= 1e-4,
        "one-sided c at rho=0: {one_sided}"
    );
    println!(
        "ACCEPTANCE 7 (numerics identities): PASS — c_two_sided={two_sided:.5}, c_one_sided={one_sided:.5}"
    );
}

/// Exact P(var_dwi = 0) for a 2 treated + 2 control cluster with i.i.d.
/// ranks from the default control proportions: enumerate all 5^4 rank
/// configurations and test the variance estimate each produces.
fn exact_degenerate_cluster_probability() -> f64 {
    let props = DEFAULT_CONTROL_PROPS;
    let k = props.len();
    let mut p_degenerate = 0.0;
    for t1 in 0..k {
        for t2 in 0..k {
            for c1 in 0..k {
                for c2 in 0..k {
                    let weight = props[t1] * props[t2] * props[c1] * props[c2];
                    let cl = Cluster {
                        id: "e".into(),
                        ranks_treatment: vec![
                            DoorRank::new(t1 as u32 + 1).unwrap(),
                            DoorRank::new(t2 as u32 + 1).unwrap(),
                        ],
                        ranks_control: vec![
                            DoorRank::new(c1 as u32 + 1).unwrap(),
                            DoorRank::new(c2 as u32 + 1).unwrap(),
                        ],
                    };
                    if summarize_cluster(&cl, k).var_dwi.unwrap() <= 0.0 {
                        p_degenerate += weight;
                    }
                }
            }
        }
    }
    p_degenerate
}

/// Criterion 8: equivalence under no clustering at (n=200, m=4): the MC means
/// of the between, inverse-variance within, and sample-size within estimators
/// agree pairwise within 0.004.
///
/// The between <-> sample-size-weighted agreement holds. The inverse-variance
/// legs cannot be evaluated at this design: a 2+2 cluster has a zero variance
/// estimate with probability ~0.21 (computed exactly below by enumerating the
/// 5^4 rank configurations), so P(ivw available) = (1 - 0.21)^200 ~= 2e-21
/// per replicate — the estimator's documented failure mode at small cluster
/// sizes. The assertions stand as specified and the ivw legs fail with that
/// diagnostic rather than being weakened.
#[test]
fn criterion_8_equivalence_under_no_clustering() {
    let s = scenario(
        200,
        4,
        Design::TwoGroup,
        0.1,
        0.0,
        0xACC9,
        MethodSet {
            within: vec![WithinMethod::Ivw, WithinMethod::SswType1],
            between: Some(BetweenMethod::Influence),
            joint_tests: false,
        },
    );
    let oc = run_scenario(&s).unwrap();
    let ivw = oc.row("within_ivw").unwrap();
    let ssw = oc.row("within_ssw_type1").unwrap();
    let btw = oc.row("between").unwrap();

    let mean_ssw = ssw.mean_estimate.unwrap();
    let mean_btw = btw.mean_estimate.unwrap();
    assert!(
        (mean_btw - mean_ssw).abs() <= 0.004,
        "between vs ssw means: {mean_btw} vs {mean_ssw}"
    );
    let q = exact_degenerate_cluster_probability();
    let p_available = (1.0 - q).powi(200);
    println!(
        "ACCEPTANCE 8 (zero-clustering equivalence): between={mean_btw:.4} vs ssw={mean_ssw:.4} agree; \
         ivw available on {}/{} replicates (exact P(zero-variance 2+2 cluster)={q:.4}, so \
         P(ivw available per replicate)=(1-{q:.4})^200={p_available:.1e})",
        ivw.n_estimates, oc.replicates
    );
    match ivw.mean_estimate {
        Some(mean_ivw) if ivw.n_estimates * 100 >= oc.replicates => {
            // evaluable: assert the two ivw legs as specified
            assert!(
                (mean_ivw - mean_ssw).abs() <= 0.004,
                "ivw vs ssw means: {mean_ivw} vs {mean_ssw}"
            );
            assert!(
                (mean_ivw - mean_btw).abs() <= 0.004,
                "ivw vs between means: {mean_ivw} vs {mean_btw}"
            );
            println!(
                "ACCEPTANCE 8 (zero-clustering equivalence): PASS — all three estimators agree"
            );
        }
        _ => {
            println!(
                "ACCEPTANCE 8 (zero-clustering equivalence): FAIL — the inverse-variance estimator is \
                 unavailable at m=4 (zero-variance clusters occur with exact probability {q:.4} per \
                 cluster), so its MC mean does not exist; this leg of the criterion is unattainable \
                 as specified"
            );
            panic!(
                "criterion 8 ivw legs unattainable: ivw available on {}/{} replicates at (n=200, m=4); \
                 P(available per replicate) = {p_available:.1e}",
                ivw.n_estimates, oc.replicates
            );
        }
    }
}

/// Criterion 9: the between-cluster fallacy fixtures show the documented
/// directional behavior of D_w and D_b.
#[test]
fn criterion_9_between_cluster_fallacy_fixtures() {
    let ranks = |values: &[u32]| -> Vec<DoorRank> {
        values.iter().map(|&v| DoorRank::new(v).unwrap()).collect()
    };
    let cluster = |id: &str, t: &[u32], c: &[u32]| Cluster {
        id: id.to_string(),
        ranks_treatment: ranks(t),
        ranks_control: ranks(c),
    };
    let analyze = |clusters: Vec<Cluster>| {
        let trial = TrialData::new(clusters, Some(4)).unwrap();
        let k = trial.k_levels();
        let summaries: Vec<_> = trial
            .clusters()
            .iter()
            .map(|c| summarize_cluster(c, k))
            .collect();
        let dw = within_ssw(&summaries, SswVariance::Type1)
            .ok()
            .map(|e| e.estimate);
        let db = between(&trial).unwrap().estimate;
        (dw, db)
    };

    // top-left: a clear within-cluster effect, but cluster 2 systematically
    // better regardless of arm -> the between comparison washes out (false
    // negative)
    let (dw, db) = analyze(vec![
        cluster("worse", &[3, 3, 3, 3], &[4, 4, 4, 4]),
        cluster("better", &[1, 1, 1, 1], &[2, 2, 2, 2]),
    ]);
    let dw = dw.unwrap();
    assert!(dw > 0.55, "top-left: D_w = {dw} should exceed 0.5");
    assert!(
        (db - 0.5).abs() <= 0.02,
        "top-left: D_b = {db} should sit near 0.5"
    );
    let tl = (dw, db);

    // top-right: no within-cluster effect, but arm imbalance across clusters
    // plus a cluster-level shift -> a spurious between effect (false
    // positive)
    let (dw, db) = analyze(vec![
        cluster("worse", &[3, 3], &[3, 3, 3, 3, 3, 3]),
        cluster("better", &[1, 1, 1, 1, 1, 1], &[1, 1]),
    ]);
    let dw = dw.unwrap();
    assert!(
        (dw - 0.5).abs() <= 0.02,
        "top-right: D_w = {dw} should sit near 0.5"
    );
    assert!(db > 0.55, "top-right: D_b = {db} should exceed 0.5");
    let tr = (dw, db);

    // bottom-left: parallel design where a real treatment benefit is exactly
    // masked by the cluster-level shift (false negative); within is
    // inestimable
    let (dw, db) = analyze(vec![
        cluster("treated", &[2, 2, 2, 2], &[]),
        cluster("control", &[], &[2, 2, 2, 2]),
    ]);
    assert!(dw.is_none(), "bottom-left: within must be inestimable");
    assert!((db - 0.5).abs() <= 0.02, "bottom-left: D_b = {db}");

    // bottom-right: parallel design with no treatment effect where the
    // cluster-level shift masquerades as one (false positive)
    let (dw, db) = analyze(vec![
        cluster("control", &[], &[4, 4, 4, 4]),
        cluster("treated", &[1, 1, 1, 1], &[]),
    ]);
    assert!(dw.is_none(), "bottom-right: within must be inestimable");
    assert!(db > 0.55, "bottom-right: D_b = {db}");

    println!(
        "ACCEPTANCE 9 (fallacy fixtures): PASS — top-left D_w={:.3}/D_b={:.3}, top-right D_w={:.3}/D_b={:.3}, parallel panels D_b=0.5/1.0",
        tl.0, tl.1, tr.0, tr.1
    );
}
