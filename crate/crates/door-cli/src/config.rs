//! Analysis configuration and the scenario file format.
//!
//! Scenario files are TOML key/value documents. `rho_c`, `beta`, and
//! `design` accept either one value or a list (lists are crossed into a
//! grid); `n` and `m` accept equal-length lists that are paired setting by
//! setting.

use door_core::{make_model, BetweenMethod, Design, MethodSet, Sided, SimScenario, WithinMethod};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid scenario file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("unknown design `{0}` (expected one_group, two_group, or mixture)")]
    UnknownDesign(String),
    #[error("model: {0}")]
    Model(#[from] door_core::SimulationError),
}

/// How the small-sample corrections are switched for analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SmallSampleMode {
    #[default]
    Auto,
    On,
    Off,
}

impl SmallSampleMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SmallSampleMode::Auto => "auto",
            SmallSampleMode::On => "on",
            SmallSampleMode::Off => "off",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "auto" => Ok(SmallSampleMode::Auto),
            "on" => Ok(SmallSampleMode::On),
            "off" => Ok(SmallSampleMode::Off),
            other => Err(ConfigError::Invalid(format!(
                "small_sample_mode must be auto/on/off, got `{other}`"
            ))),
        }
    }

    /// Resolves against the small-trial threshold (n < 15).
    pub fn resolve(self, n_clusters: usize) -> bool {
        match self {
            SmallSampleMode::Auto => n_clusters < 15,
            SmallSampleMode::On => true,
            SmallSampleMode::Off => false,
        }
    }
}

/// Estimator methods requested for an analysis.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum MethodsSpec {
    /// Apply the method-selection guidance.
    #[default]
    Auto,
    /// An explicit list of method names.
    Explicit(Vec<String>),
}

/// Configuration for `analyze`.
#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub alpha: f64,
    pub sided: Sided,
    pub small_sample_mode: SmallSampleMode,
    pub methods: MethodsSpec,
    pub k_levels: Option<usize>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            alpha: 0.05,
            sided: Sided::TwoSided,
            small_sample_mode: SmallSampleMode::Auto,
            methods: MethodsSpec::Auto,
            k_levels: None,
        }
    }
}

pub fn parse_sided(s: &str) -> Result<Sided, ConfigError> {
    match s {
        "two_sided" | "two-sided" => Ok(Sided::TwoSided),
        "one_sided_greater" | "greater" => Ok(Sided::OneSidedGreater),
        other => Err(ConfigError::Invalid(format!(
            "sided must be two-sided or greater, got `{other}`"
        ))),
    }
}

pub fn parse_design(s: &str) -> Result<Design, ConfigError> {
    match s {
        "one_group" => Ok(Design::OneGroup),
        "two_group" => Ok(Design::TwoGroup),
        "mixture" => Ok(Design::Mixture),
        other => Err(ConfigError::UnknownDesign(other.to_string())),
    }
}

pub fn parse_within_method(s: &str) -> Option<WithinMethod> {
    match s {
        "within_ivw" | "ivw" => Some(WithinMethod::Ivw),
        "within_ssw_type1" | "ssw_type1" => Some(WithinMethod::SswType1),
        "within_ssw_type2" | "ssw_type2" => Some(WithinMethod::SswType2),
        "within_ssw_type3" | "ssw_type3" => Some(WithinMethod::SswType3),
        _ => None,
    }
}

pub fn parse_between_method(s: &str) -> Option<BetweenMethod> {
    match s {
        "between" => Some(BetweenMethod::Influence),
        "between_corrected" => Some(BetweenMethod::InfluenceCorrected),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn values(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(vs) => vs.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub n: OneOrMany<usize>,
    pub m: OneOrMany<usize>,
    pub design: OneOrMany<String>,
    pub beta: OneOrMany<f64>,
    pub rho_c: OneOrMany<f64>,
    pub control_props: Option<Vec<f64>>,
    pub replicates: usize,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub sided: Option<String>,
    pub methods: Option<OneOrMany<String>>,
    pub small_sample_mode: Option<String>,
    pub oracle_draws: Option<u64>,
}

/// One expanded grid cell, ready to run.
#[derive(Debug, Clone)]
pub struct ScenarioCell {
    pub label: CellLabel,
    pub scenario: SimScenario,
}

#[derive(Debug, Clone)]
pub struct CellLabel {
    pub n: usize,
    pub m: usize,
    pub design: Design,
    pub beta: f64,
    pub rho_c: f64,
}

pub fn load_scenario_file(path: &std::path::Path) -> Result<ScenarioFile, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    Ok(toml::from_str(&text)?)
}

pub fn expand_scenarios(file: &ScenarioFile) -> Result<Vec<ScenarioCell>, ConfigError> {
    if file.replicates < 1 {
        return Err(ConfigError::Invalid("replicates must be at least 1".into()));
    }
    let ns = file.n.values();
    let ms = file.m.values();
    if ns.len() != ms.len() {
        return Err(ConfigError::Invalid(format!(
            "n and m must pair up (got {} vs {} values)",
            ns.len(),
            ms.len()
        )));
    }
    let designs = file
        .design
        .values()
        .iter()
        .map(|d| parse_design(d))
        .collect::<Result<Vec<_>, _>>()?;
    let betas = file.beta.values();
    let rhos = file.rho_c.values();
    let props = file
        .control_props
        .clone()
        .unwrap_or_else(|| door_core::DEFAULT_CONTROL_PROPS.to_vec());
    let alpha = file.alpha.unwrap_or(0.05);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ConfigError::Invalid(format!(
            "alpha must be in (0,1), got {alpha}"
        )));
    }
    let sided = match &file.sided {
        Some(s) => parse_sided(s)?,
        None => Sided::TwoSided,
    };
    let small_mode = match &file.small_sample_mode {
        Some(s) => SmallSampleMode::parse(s)?,
        None => SmallSampleMode::Auto,
    };
    let base_seed = file.seed.unwrap_or(20_260_401);
    let oracle_draws = file.oracle_draws.unwrap_or(4_000_000);

    let mut cells = Vec::new();
    let mut index = 0u64;
    for (&n, &m) in ns.iter().zip(&ms) {
        for &design in &designs {
            for &beta in &betas {
                for &rho_c in &rhos {
                    let model = make_model(beta, rho_c, &props)?;
                    let methods = resolve_methods(&file.methods, n, design, small_mode)?;
                    // one independent seed per cell so cells do not share
                    // replicate streams
                    let seed = base_seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
                    index += 1;
                    cells.push(ScenarioCell {
                        label: CellLabel {
                            n,
                            m,
                            design,
                            beta,
                            rho_c,
                        },
                        scenario: SimScenario {
                            n_clusters: n,
                            cluster_size: m,
                            design,
                            model,
                            replicates: file.replicates,
                            seed,
                            methods,
                            alpha,
                            sided,
                            oracle_draws,
                        },
                    });
                }
            }
        }
    }
    Ok(cells)
}

fn resolve_methods(
    spec: &Option<OneOrMany<String>>,
    n: usize,
    design: Design,
    small_mode: SmallSampleMode,
) -> Result<MethodSet, ConfigError> {
    let names: Vec<String> = match spec {
        None => vec!["auto".to_string()],
        Some(s) => s.values(),
    };
    if names.len() == 1 && names[0] == "auto" {
        let small = small_mode.resolve(n);
        return Ok(if design == Design::OneGroup {
            MethodSet {
                between: Some(if small {
                    BetweenMethod::InfluenceCorrected
                } else {
                    BetweenMethod::Influence
                }),
                ..MethodSet::between_only()
            }
        } else if small {
            MethodSet::small_sample()
        } else {
            MethodSet::large_sample()
        });
    }
    let mut within = Vec::new();
    let mut between = None;
    for name in &names {
        if let Some(w) = parse_within_method(name) {
            within.push(w);
        } else if let Some(b) = parse_between_method(name) {
            between = Some(b);
        } else {
            return Err(ConfigError::UnknownMethod(name.clone()));
        }
    }
    if design == Design::OneGroup && !within.is_empty() {
        return Err(ConfigError::Invalid(
            "within methods are not estimable under one_group randomization".into(),
        ));
    }
    let joint_tests = !within.is_empty() && between.is_some();
    Ok(MethodSet {
        within,
        between,
        joint_tests,
    })
}
