//! Machine-readable analysis reports with input provenance, plus the table
//! rendering. Serialization is versioned through `report_format_version`;
//! reports carry no timestamps so a fixed input and config reproduce the
//! same bytes.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AnalysisReport {
    pub report_format_version: u32,
    pub software_version: String,
    pub input: InputProvenance,
    pub config: ConfigEcho,
    pub selection: Option<SelectionEcho>,
    pub estimates: Vec<EstimateReport>,
    pub tests: Vec<TestReport>,
    pub joint: Vec<JointReport>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct InputProvenance {
    pub path: String,
    pub sha256: String,
    pub n_rows: usize,
    pub n_clusters: usize,
    pub n_subjects: usize,
    pub n_treatment: usize,
    pub n_control: usize,
    pub k_levels: usize,
    pub design: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConfigEcho {
    pub alpha: f64,
    pub sided: String,
    pub small_sample_mode: String,
    pub small_sample_active: bool,
    pub methods: String,
    pub k_levels_override: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SelectionEcho {
    pub within: Option<String>,
    pub within_alternatives: Vec<String>,
    pub between: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EstimateReport {
    pub method: String,
    pub available: bool,
    pub estimate: Option<f64>,
    pub se: Option<f64>,
    pub ci_lower: Option<f64>,
    pub ci_upper: Option<f64>,
    pub ci_level: f64,
    pub df_mode: Option<String>,
    pub variance_method: Option<String>,
    pub n_contributing: Option<usize>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TestReport {
    pub name: String,
    pub available: bool,
    pub statistic: Option<f64>,
    pub critical_value: Option<f64>,
    pub p_value: Option<f64>,
    pub reject: Option<bool>,
    pub alpha: f64,
    pub sided: String,
    pub calibration: Option<String>,
    pub note: Option<String>,
}

/// Joint inference pairing one within estimator with the between estimator:
/// the variability test, the max test with its simultaneous intervals, and
/// the weighted hybrid.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct JointReport {
    pub within_method: String,
    pub between_method: String,
    pub rho: Option<f64>,
    pub variability: Option<TestReport>,
    pub max_test: Option<TestReport>,
    pub simultaneous_ci: Option<SimCiReport>,
    pub weighted: Option<WeightedReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SimCiReport {
    pub within_lower: f64,
    pub within_upper: f64,
    pub between_lower: f64,
    pub between_upper: f64,
    pub joint_level: f64,
    pub critical_value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WeightedReport {
    pub weight_within: f64,
    pub weight_between: f64,
    pub estimate: f64,
    pub se: f64,
    pub test: TestReport,
}

fn fmt_opt(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v:.4}"),
        None => "-".to_string(),
    }
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Flat CSV with one row per estimate and per test.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("kind,name,available,estimate,se,ci_lower,ci_upper,statistic,critical_value,p_value,reject,calibration,note\n");
        for e in &self.estimates {
            let _ = writeln!(
                out,
                "estimate,{},{},{},{},{},{},,,,,{},{}",
                e.method,
                e.available,
                fmt_opt(e.estimate),
                fmt_opt(e.se),
                fmt_opt(e.ci_lower),
                fmt_opt(e.ci_upper),
                e.df_mode.clone().unwrap_or_default(),
                e.note.clone().unwrap_or_default().replace(',', ";"),
            );
        }
        let mut tests: Vec<&TestReport> = self.tests.iter().collect();
        for j in &self.joint {
            if let Some(t) = &j.variability {
                tests.push(t);
            }
            if let Some(t) = &j.max_test {
                tests.push(t);
            }
            if let Some(w) = &j.weighted {
                tests.push(&w.test);
            }
        }
        for t in tests {
            let _ = writeln!(
                out,
                "test,{},{},,,,,{},{},{},{},{},{}",
                t.name,
                t.available,
                fmt_opt(t.statistic),
                fmt_opt(t.critical_value),
                fmt_opt(t.p_value),
                t.reject.map(|r| r.to_string()).unwrap_or_default(),
                t.calibration.clone().unwrap_or_default(),
                t.note.clone().unwrap_or_default().replace(',', ";"),
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "DOOR analysis report (format v{}, doorcrt {})",
            self.report_format_version, self.software_version
        );
        let i = &self.input;
        let _ = writeln!(
            out,
            "input: {}  clusters={} subjects={} (T={} C={}) K={} design={}",
            i.path, i.n_clusters, i.n_subjects, i.n_treatment, i.n_control, i.k_levels, i.design
        );
        let _ = writeln!(out, "input sha256: {}", i.sha256);
        let c = &self.config;
        let _ = writeln!(
            out,
            "config: alpha={} sided={} small_sample={} ({}) methods={}",
            c.alpha,
            c.sided,
            c.small_sample_mode,
            if c.small_sample_active {
                "active"
            } else {
                "inactive"
            },
            c.methods
        );
        if let Some(sel) = &self.selection {
            let _ = writeln!(
                out,
                "selected: within={} between={}{}",
                sel.within.as_deref().unwrap_or("(not estimable)"),
                sel.between,
                if sel.within_alternatives.is_empty() {
                    String::new()
                } else {
                    format!(" (alternatives: {})", sel.within_alternatives.join(", "))
                }
            );
        }

        let _ = writeln!(
            out,
            "\nestimates (CI level {:.0}%)",
            100.0 * (1.0 - c.alpha)
        );
        let _ = writeln!(
            out,
            "  {:<22} {:>9} {:>9} {:>9} {:>9}  {:<10} note",
            "method", "estimate", "se", "ci_low", "ci_high", "calib"
        );
        for e in &self.estimates {
            let _ = writeln!(
                out,
                "  {:<22} {:>9} {:>9} {:>9} {:>9}  {:<10} {}",
                e.method,
                fmt_opt(e.estimate),
                fmt_opt(e.se),
                fmt_opt(e.ci_lower),
                fmt_opt(e.ci_upper),
                e.df_mode.clone().unwrap_or_else(|| "-".into()),
                e.note.clone().unwrap_or_default()
            );
        }

        if !self.tests.is_empty() {
            let _ = writeln!(out, "\ntests of H0: D = 0.5 ({})", c.sided);
            let _ = writeln!(
                out,
                "  {:<22} {:>9} {:>9} {:>9} {:>7}  {:<9} note",
                "test", "statistic", "crit", "p", "reject", "calib"
            );
            for t in &self.tests {
                let _ = writeln!(
                    out,
                    "  {:<22} {:>9} {:>9} {:>9} {:>7}  {:<9} {}",
                    t.name,
                    fmt_opt(t.statistic),
                    fmt_opt(t.critical_value),
                    fmt_opt(t.p_value),
                    t.reject
                        .map(|r| r.to_string())
                        .unwrap_or_else(|| "-".into()),
                    t.calibration.clone().unwrap_or_else(|| "-".into()),
                    t.note.clone().unwrap_or_default()
                );
            }
        }

        for j in &self.joint {
            let _ = writeln!(
                out,
                "\njoint inference: {} vs {} (influence correlation {})",
                j.within_method,
                j.between_method,
                fmt_opt(j.rho)
            );
            if let Some(t) = &j.variability {
                let _ = writeln!(
                    out,
                    "  variability H0 D_b=D_w: W_v={} crit={} p={} reject={}",
                    fmt_opt(t.statistic),
                    fmt_opt(t.critical_value),
                    fmt_opt(t.p_value),
                    t.reject
                        .map(|r| r.to_string())
                        .unwrap_or_else(|| "-".into())
                );
            }
            if let Some(t) = &j.max_test {
                let _ = writeln!(
                    out,
                    "  max test H0 D_b=D_w=0.5: W_max={} crit={} ({}) p={} reject={}",
                    fmt_opt(t.statistic),
                    fmt_opt(t.critical_value),
                    t.calibration.clone().unwrap_or_else(|| "-".into()),
                    fmt_opt(t.p_value),
                    t.reject
                        .map(|r| r.to_string())
                        .unwrap_or_else(|| "-".into())
                );
            }
            if let Some(s) = &j.simultaneous_ci {
                let _ = writeln!(
                    out,
                    "  simultaneous {:.0}% CIs: within [{:.4}, {:.4}], between [{:.4}, {:.4}]",
                    100.0 * s.joint_level,
                    s.within_lower,
                    s.within_upper,
                    s.between_lower,
                    s.between_upper
                );
            }
            if let Some(w) = &j.weighted {
                let _ = writeln!(
                    out,
                    "  weighted: a_within={:.4} a_between={:.4} estimate={:.4} se={:.4} W_wt={} p={} reject={}",
                    w.weight_within,
                    w.weight_between,
                    w.estimate,
                    w.se,
                    fmt_opt(w.test.statistic),
                    fmt_opt(w.test.p_value),
                    w.test.reject.map(|r| r.to_string()).unwrap_or_else(|| "-".into())
                );
            }
        }

        if !self.warnings.is_empty() {
            let _ = writeln!(out, "\nwarnings:");
            for w in &self.warnings {
                let _ = writeln!(out, "  - {w}");
            }
        }
        out
    }
}
