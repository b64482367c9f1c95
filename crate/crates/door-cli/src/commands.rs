//! The three commands: `analyze` (one dataset, estimates + tests + report),
//! `simulate` (operating characteristics over a scenario grid), and `oracle`
//! (true DOOR probabilities under the latent model).

use crate::config::{
    parse_between_method, parse_within_method, AnalysisConfig, ConfigError, MethodsSpec,
    ScenarioCell,
};
use crate::io::{read_trial_csv, IoError};
use crate::report::{
    AnalysisReport, ConfigEcho, EstimateReport, InputProvenance, JointReport, SelectionEcho,
    SimCiReport, TestReport, WeightedReport, REPORT_FORMAT_VERSION,
};
use door_core::{
    between, joint_covariance, make_model, max_test, run_scenario, select_methods_forced,
    test_marginal,
    test_variability, true_door_oracle, wald_ci, weighted_test, within_ivw, within_ssw,
    BetweenMethod, Design, DfMode, DoorEstimate, InferenceError, MethodSummary, OracleKind,
    SswVariance, TestResult, WithinMethod,
};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("simulation: {0}")]
    Simulation(#[from] door_core::SimulationError),
    #[error("cannot write {path}: {source}")]
    WriteOutput {
        path: String,
        source: std::io::Error,
    },
}

/// Whether every requested method could be computed; drives the exit code
/// (0 = complete, 2 = partial report written).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalysisStatus {
    Complete,
    Partial,
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct WithinSlot {
    method: WithinMethod,
    estimate: Option<DoorEstimate>,
    note: Option<String>,
}

pub fn cmd_analyze(
    data_path: &Path,
    config: &AnalysisConfig,
) -> Result<(AnalysisReport, AnalysisStatus), CommandError> {
    let loaded = read_trial_csv(data_path, config.k_levels)?;
    let trial = &loaded.trial;
    let design = trial.design();
    let sizes: Vec<usize> = trial.clusters().iter().map(|c| c.size()).collect();
    let small = config.small_sample_mode.resolve(trial.n());

    let mut warnings: Vec<String> = Vec::new();

    // resolve the estimator set
    let selection = select_methods_forced(small, &sizes, design);
    let (within_methods, between_method, selection_echo) = match &config.methods {
        MethodsSpec::Auto => {
            let between = if small {
                BetweenMethod::InfluenceCorrected
            } else {
                BetweenMethod::Influence
            };
            (
                selection.within.into_iter().collect::<Vec<_>>(),
                Some(between),
                Some(SelectionEcho {
                    within: selection.within.map(|w| w.as_str().to_string()),
                    within_alternatives: selection
                        .within_alternatives
                        .iter()
                        .map(|w| w.as_str().to_string())
                        .collect(),
                    between: between.as_str().to_string(),
                }),
            )
        }
        MethodsSpec::Explicit(names) => {
            let mut within = Vec::new();
            let mut between_m = None;
            for name in names {
                if let Some(w) = parse_within_method(name) {
                    within.push(w);
                } else if let Some(b) = parse_between_method(name) {
                    between_m = Some(b);
                } else {
                    return Err(ConfigError::UnknownMethod(name.clone()).into());
                }
            }
            (within, between_m, None)
        }
    };

    // between estimate
    let mut between_est: Option<DoorEstimate> = None;
    let mut between_note: Option<String> = None;
    let mut between_label = String::new();
    if let Some(method) = between_method {
        between_label = method.as_str().to_string();
        match between(trial) {
            Ok(est) => {
                between_est = Some(if method == BetweenMethod::InfluenceCorrected {
                    match est.with_small_sample_correction() {
                        Ok(corrected) => corrected,
                        Err(e) => {
                            warnings.push(format!(
                                "between correction unavailable ({e}); reporting the uncorrected estimator"
                            ));
                            between_label = BetweenMethod::Influence.as_str().to_string();
                            est
                        }
                    }
                } else {
                    est
                });
            }
            Err(e) => {
                between_note = Some(e.to_string());
                warnings.push(format!("between estimator unavailable: {e}"));
            }
        }
    }

    // within estimates
    let k = trial.k_levels();
    let summaries: Vec<_> = trial
        .clusters()
        .iter()
        .map(|c| door_core::summarize_cluster(c, k))
        .collect();
    let mut within_slots: Vec<WithinSlot> = Vec::new();
    for method in within_methods {
        let result = match method {
            WithinMethod::Ivw => within_ivw(&summaries),
            WithinMethod::SswType1 => within_ssw(&summaries, SswVariance::Type1),
            WithinMethod::SswType2 => within_ssw(&summaries, SswVariance::Type2),
            WithinMethod::SswType3 => within_ssw(&summaries, SswVariance::Type3),
        };
        match result {
            Ok(est) => within_slots.push(WithinSlot {
                method,
                estimate: Some(est),
                note: None,
            }),
            Err(e) => {
                warnings.push(format!("{} unavailable: {e}", method.as_str()));
                within_slots.push(WithinSlot {
                    method,
                    estimate: None,
                    note: Some(e.to_string()),
                });
            }
        }
    }
    if design == Design::OneGroup && within_slots.is_empty() {
        warnings.push(
            "all clusters are one-group: the within-cluster DOOR probability is not estimable"
                .to_string(),
        );
    }

    // estimate + marginal test rows
    let mut estimates = Vec::new();
    let mut tests = Vec::new();
    for slot in &within_slots {
        estimates.push(estimate_report(
            slot.method.as_str(),
            slot.estimate.as_ref(),
            slot.note.clone(),
            config,
        ));
        if let Some(est) = &slot.estimate {
            tests.push(marginal_report(slot.method.as_str(), est, config));
        }
    }
    if between_method.is_some() {
        estimates.push(estimate_report(
            &between_label,
            between_est.as_ref(),
            between_note.clone(),
            config,
        ));
        if let Some(est) = &between_est {
            tests.push(marginal_report(&between_label, est, config));
        }
    }

    // joint inference per available within estimate
    let mut joint = Vec::new();
    if let Some(b) = &between_est {
        for slot in &within_slots {
            let Some(w) = &slot.estimate else { continue };
            joint.push(joint_report(
                slot.method.as_str(),
                &between_label,
                b,
                w,
                config,
                &mut warnings,
            ));
        }
    }

    let requested = within_slots.len() + usize::from(between_method.is_some());
    let computed = within_slots.iter().filter(|s| s.estimate.is_some()).count()
        + usize::from(between_est.is_some());
    let status = if computed == requested {
        AnalysisStatus::Complete
    } else {
        AnalysisStatus::Partial
    };

    let report = AnalysisReport {
        report_format_version: REPORT_FORMAT_VERSION,
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        input: InputProvenance {
            path: data_path.display().to_string(),
            sha256: loaded.sha256,
            n_rows: loaded.n_rows,
            n_clusters: trial.n(),
            n_subjects: trial.n_subjects(),
            n_treatment: trial.n_treatment(),
            n_control: trial.n_control(),
            k_levels: trial.k_levels(),
            design: design.as_str().to_string(),
        },
        config: ConfigEcho {
            alpha: config.alpha,
            sided: config.sided.as_str().to_string(),
            small_sample_mode: config.small_sample_mode.as_str().to_string(),
            small_sample_active: small,
            methods: match &config.methods {
                MethodsSpec::Auto => "auto".to_string(),
                MethodsSpec::Explicit(names) => names.join(","),
            },
            k_levels_override: config.k_levels,
        },
        selection: selection_echo,
        estimates,
        tests,
        joint,
        warnings,
    };
    Ok((report, status))
}

fn df_mode_label(df: DfMode) -> String {
    match df {
        DfMode::Normal => "normal".to_string(),
        DfMode::T { df } => format!("t({df})"),
    }
}

fn estimate_report(
    method: &str,
    est: Option<&DoorEstimate>,
    note: Option<String>,
    config: &AnalysisConfig,
) -> EstimateReport {
    match est {
        None => EstimateReport {
            method: method.to_string(),
            available: false,
            estimate: None,
            se: None,
            ci_lower: None,
            ci_upper: None,
            ci_level: 1.0 - config.alpha,
            df_mode: None,
            variance_method: None,
            n_contributing: None,
            note,
        },
        Some(est) => {
            let (lo, hi) = wald_ci(est, config.alpha).expect("alpha validated");
            EstimateReport {
                method: method.to_string(),
                available: true,
                estimate: Some(est.estimate),
                se: Some(est.se()),
                ci_lower: Some(lo),
                ci_upper: Some(hi),
                ci_level: 1.0 - config.alpha,
                df_mode: Some(df_mode_label(est.df_mode)),
                variance_method: Some(est.variance_method.as_str().to_string()),
                n_contributing: Some(est.n_contributing),
                note,
            }
        }
    }
}

fn test_report(name: &str, result: Result<TestResult, InferenceError>) -> TestReport {
    match result {
        Ok(t) => TestReport {
            name: name.to_string(),
            available: true,
            statistic: Some(t.statistic),
            critical_value: Some(t.critical_value),
            p_value: t.p_value,
            reject: Some(t.reject),
            alpha: t.alpha,
            sided: t.sided.as_str().to_string(),
            calibration: Some(t.calibration.describe()),
            note: None,
        },
        Err(e) => TestReport {
            name: name.to_string(),
            available: false,
            statistic: None,
            critical_value: None,
            p_value: None,
            reject: None,
            alpha: 0.0,
            sided: String::new(),
            calibration: None,
            note: Some(e.to_string()),
        },
    }
}

fn marginal_report(method: &str, est: &DoorEstimate, config: &AnalysisConfig) -> TestReport {
    let mut t = test_report(
        &format!("marginal_{method}"),
        test_marginal(est, config.alpha, config.sided),
    );
    if !t.available {
        t.alpha = config.alpha;
        t.sided = config.sided.as_str().to_string();
    }
    t
}

fn joint_report(
    within_label: &str,
    between_label: &str,
    b: &DoorEstimate,
    w: &DoorEstimate,
    config: &AnalysisConfig,
    warnings: &mut Vec<String>,
) -> JointReport {
    let cov = match joint_covariance(b, w) {
        Ok(c) => c,
        Err(e) => {
            warnings.push(format!(
                "joint covariance unavailable for {within_label}: {e}"
            ));
            return JointReport {
                within_method: within_label.to_string(),
                between_method: between_label.to_string(),
                rho: None,
                variability: None,
                max_test: None,
                simultaneous_ci: None,
                weighted: None,
            };
        }
    };

    let variability = Some(test_report(
        &format!("variability_{within_label}"),
        test_variability(b, w, &cov, config.alpha),
    ));

    let (max_report, sim_ci) = match max_test(b, w, &cov, config.alpha, config.sided) {
        Ok((t, ci)) => {
            let crit = t.critical_value;
            (
                Some(test_report(&format!("max_{within_label}"), Ok(t))),
                Some(SimCiReport {
                    within_lower: ci.ci_within.0,
                    within_upper: ci.ci_within.1,
                    between_lower: ci.ci_between.0,
                    between_upper: ci.ci_between.1,
                    joint_level: ci.joint_level,
                    critical_value: crit,
                }),
            )
        }
        Err(e) => (
            Some(test_report(&format!("max_{within_label}"), Err(e))),
            None,
        ),
    };

    let weighted = match weighted_test(b, w, &cov, config.alpha, config.sided) {
        Ok((h, t)) => Some(WeightedReport {
            weight_within: h.weight_within,
            weight_between: h.weight_between,
            estimate: h.estimate,
            se: h.variance.sqrt(),
            test: test_report(&format!("weighted_{within_label}"), Ok(t)),
        }),
        Err(e) => {
            warnings.push(format!(
                "weighted test unavailable for {within_label} ({e}); the max test above is the fallback"
            ));
            None
        }
    };

    JointReport {
        within_method: within_label.to_string(),
        between_method: between_label.to_string(),
        rho: Some(cov.rho),
        variability,
        max_test: max_report,
        simultaneous_ci: sim_ci,
        weighted,
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct CellResult {
    pub n: usize,
    pub m: usize,
    pub design: String,
    pub beta: f64,
    pub rho_c: f64,
    pub replicates: usize,
    pub seed: u64,
    pub alpha: f64,
    pub truth_within: Option<f64>,
    pub truth_within_mc_se: Option<f64>,
    pub truth_between: Option<f64>,
    pub truth_between_mc_se: Option<f64>,
    pub methods: Vec<MethodSummary2>,
}

/// Serializable mirror of the core method summary.
#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary2 {
    pub method: String,
    pub n_estimates: usize,
    pub n_tests: usize,
    pub mean_estimate: Option<f64>,
    pub bias: Option<f64>,
    pub bias_mc_se: Option<f64>,
    pub sd: Option<f64>,
    pub sd_mc_se: Option<f64>,
    pub mean_se: Option<f64>,
    pub mean_se_mc_se: Option<f64>,
    pub coverage: Option<f64>,
    pub coverage_mc_se: Option<f64>,
    pub rejection: Option<f64>,
    pub rejection_mc_se: Option<f64>,
}

impl From<&MethodSummary> for MethodSummary2 {
    fn from(m: &MethodSummary) -> Self {
        MethodSummary2 {
            method: m.method.clone(),
            n_estimates: m.n_estimates,
            n_tests: m.n_tests,
            mean_estimate: m.mean_estimate,
            bias: m.bias,
            bias_mc_se: m.bias_mc_se,
            sd: m.sd,
            sd_mc_se: m.sd_mc_se,
            mean_se: m.mean_se,
            mean_se_mc_se: m.mean_se_mc_se,
            coverage: m.coverage,
            coverage_mc_se: m.coverage_mc_se,
            rejection: m.rejection,
            rejection_mc_se: m.rejection_mc_se,
        }
    }
}

pub fn run_cells(cells: &[ScenarioCell]) -> Result<Vec<CellResult>, CommandError> {
    let mut out = Vec::new();
    for cell in cells {
        let oc = run_scenario(&cell.scenario)?;
        out.push(CellResult {
            n: cell.label.n,
            m: cell.label.m,
            design: cell.label.design.as_str().to_string(),
            beta: cell.label.beta,
            rho_c: cell.label.rho_c,
            replicates: oc.replicates,
            seed: cell.scenario.seed,
            alpha: cell.scenario.alpha,
            truth_within: oc.truth_within.map(|o| o.value),
            truth_within_mc_se: oc.truth_within.map(|o| o.mc_se),
            truth_between: oc.truth_between.map(|o| o.value),
            truth_between_mc_se: oc.truth_between.map(|o| o.mc_se),
            methods: oc.rows.iter().map(MethodSummary2::from).collect(),
        });
    }
    Ok(out)
}

fn csv_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

/// One CSV row per (cell, method); plot-ready.
pub fn cells_to_csv(results: &[CellResult]) -> String {
    let mut out = String::from(
        "n,m,design,beta,rho_c,replicates,seed,alpha,truth_within,truth_between,method,\
         n_estimates,n_tests,mean_estimate,bias,bias_mc_se,sd,sd_mc_se,mean_se,mean_se_mc_se,\
         coverage,coverage_mc_se,rejection,rejection_mc_se\n",
    );
    for cell in results {
        for m in &cell.methods {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                cell.n,
                cell.m,
                cell.design,
                cell.beta,
                cell.rho_c,
                cell.replicates,
                cell.seed,
                cell.alpha,
                csv_opt(cell.truth_within),
                csv_opt(cell.truth_between),
                m.method,
                m.n_estimates,
                m.n_tests,
                csv_opt(m.mean_estimate),
                csv_opt(m.bias),
                csv_opt(m.bias_mc_se),
                csv_opt(m.sd),
                csv_opt(m.sd_mc_se),
                csv_opt(m.mean_se),
                csv_opt(m.mean_se_mc_se),
                csv_opt(m.coverage),
                csv_opt(m.coverage_mc_se),
                csv_opt(m.rejection),
                csv_opt(m.rejection_mc_se),
            );
        }
    }
    out
}

pub fn cells_to_table(results: &[CellResult]) -> String {
    let mut out = String::new();
    for cell in results {
        let _ = writeln!(
            out,
            "scenario n={} m={} design={} beta={} rho_c={} ({} replicates, seed {})",
            cell.n, cell.m, cell.design, cell.beta, cell.rho_c, cell.replicates, cell.seed
        );
        if let Some(t) = cell.truth_within {
            let _ = writeln!(
                out,
                "  true D_w = {t:.4} (mc se {:.1e})",
                cell.truth_within_mc_se.unwrap_or(0.0)
            );
        }
        if let Some(t) = cell.truth_between {
            let _ = writeln!(
                out,
                "  true D_b = {t:.4} (mc se {:.1e})",
                cell.truth_between_mc_se.unwrap_or(0.0)
            );
        }
        let _ = writeln!(
            out,
            "  {:<20} {:>6} {:>9} {:>9} {:>9} {:>9} {:>9}",
            "method", "avail", "bias", "sd", "mean_se", "coverage", "rejection"
        );
        for m in &cell.methods {
            let _ = writeln!(
                out,
                "  {:<20} {:>6} {:>9} {:>9} {:>9} {:>9} {:>9}",
                m.method,
                if m.n_estimates > 0 {
                    m.n_estimates
                } else {
                    m.n_tests
                },
                csv_opt(m.bias),
                csv_opt(m.sd),
                csv_opt(m.mean_se),
                csv_opt(m.coverage),
                csv_opt(m.rejection),
            );
        }
        out.push('\n');
    }
    out
}

pub fn write_simulation_outputs(
    results: &[CellResult],
    out_dir: &Path,
) -> Result<(), CommandError> {
    std::fs::create_dir_all(out_dir).map_err(|source| CommandError::WriteOutput {
        path: out_dir.display().to_string(),
        source,
    })?;
    let csv_path = out_dir.join("results.csv");
    std::fs::write(&csv_path, cells_to_csv(results)).map_err(|source| {
        CommandError::WriteOutput {
            path: csv_path.display().to_string(),
            source,
        }
    })?;
    let json_path = out_dir.join("summary.json");
    let json = serde_json::to_string_pretty(results).expect("results serialize");
    std::fs::write(&json_path, json).map_err(|source| CommandError::WriteOutput {
        path: json_path.display().to_string(),
        source,
    })?;
    Ok(())
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub beta: f64,
    pub rho_c: f64,
    pub d_w: f64,
    pub d_w_mc_se: f64,
    pub d_b: f64,
    pub d_b_mc_se: f64,
    pub draws: u64,
}

pub fn cmd_oracle(
    beta: f64,
    rho_values: &[f64],
    control_props: &[f64],
    draws: u64,
    seed: u64,
) -> Result<Vec<OracleRow>, CommandError> {
    let mut rows = Vec::new();
    for (i, &rho_c) in rho_values.iter().enumerate() {
        let model = make_model(beta, rho_c, control_props)?;
        let w = true_door_oracle(&model, OracleKind::Within, draws, seed ^ (2 * i as u64 + 1));
        let b = true_door_oracle(
            &model,
            OracleKind::Between,
            draws,
            seed ^ (2 * i as u64 + 2),
        );
        rows.push(OracleRow {
            beta,
            rho_c,
            d_w: w.value,
            d_w_mc_se: w.mc_se,
            d_b: b.value,
            d_b_mc_se: b.mc_se,
            draws,
        });
    }
    Ok(rows)
}

pub fn oracle_to_table(rows: &[OracleRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>8} {:>8} {:>9} {:>10} {:>9} {:>10} {:>12}",
        "beta", "rho_c", "D_w", "(mc se)", "D_b", "(mc se)", "draws"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>8} {:>8} {:>9.4} {:>10.1e} {:>9.4} {:>10.1e} {:>12}",
            r.beta, r.rho_c, r.d_w, r.d_w_mc_se, r.d_b, r.d_b_mc_se, r.draws
        );
    }
    out
}

pub fn oracle_to_csv(rows: &[OracleRow]) -> String {
    let mut out = String::from("beta,rho_c,d_w,d_w_mc_se,d_b,d_b_mc_se,draws\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.2e},{:.6},{:.2e},{}",
            r.beta, r.rho_c, r.d_w, r.d_w_mc_se, r.d_b, r.d_b_mc_se, r.draws
        );
    }
    out
}
