//! `doorcrt`: DOOR probability analysis and simulation for cluster
//! randomized trials.

use clap::{Parser, Subcommand};
use door_cli::commands::{
    cells_to_csv, cells_to_table, cmd_analyze, cmd_oracle, oracle_to_csv, oracle_to_table,
    run_cells, write_simulation_outputs, AnalysisStatus,
};
use door_cli::config::{
    expand_scenarios, load_scenario_file, parse_sided, AnalysisConfig, MethodsSpec, SmallSampleMode,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "doorcrt",
    version,
    about = "Within- and between-cluster DOOR probability estimation, testing, and simulation for cluster randomized trials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a subject-level CSV (cluster_id,subject_id,arm,door_rank).
    Analyze {
        /// Input CSV path.
        data: PathBuf,
        /// Significance level for tests and intervals.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// two-sided | greater
        #[arg(long, default_value = "two-sided")]
        sided: String,
        /// auto, or a comma list of ivw, ssw_type1, ssw_type2, ssw_type3,
        /// between, between_corrected.
        #[arg(long, default_value = "auto")]
        methods: String,
        /// auto | on | off (auto switches corrections on below 15 clusters).
        #[arg(long = "small-sample", default_value = "auto")]
        small_sample: String,
        /// Override the number of DOOR levels (default: max observed rank).
        #[arg(long = "k-levels")]
        k_levels: Option<usize>,
        /// Write the JSON report here in addition to stdout output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// table | csv | json
        #[arg(long, default_value = "table")]
        format: String,
    },
    /// Run the operating-characteristics study described by a scenario file.
    Simulate {
        /// Scenario TOML path.
        scenario: PathBuf,
        /// Directory for results.csv and summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the scenario's replicate count.
        #[arg(long)]
        replicates: Option<usize>,
        /// Override the scenario's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// table | csv | json
        #[arg(long, default_value = "table")]
        format: String,
    },
    /// Print the true within/between DOOR probabilities under the latent
    /// model (Monte Carlo, with standard errors).
    Oracle {
        /// Conditional treatment effect on the latent scale.
        #[arg(long)]
        beta: f64,
        /// One or more within-cluster correlations (comma separated).
        #[arg(long = "rho-c", value_delimiter = ',', required = true)]
        rho_c: Vec<f64>,
        /// Control-arm DOOR level proportions (comma separated; default
        /// 0.10,0.20,0.30,0.25,0.15).
        #[arg(long = "control-props", value_delimiter = ',')]
        control_props: Option<Vec<f64>>,
        /// Monte Carlo pair draws per value.
        #[arg(long, default_value_t = 20_000_000)]
        draws: u64,
        #[arg(long, default_value_t = 20_260_401)]
        seed: u64,
        /// table | csv | json
        #[arg(long, default_value = "table")]
        format: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Analyze {
            data,
            alpha,
            sided,
            methods,
            small_sample,
            k_levels,
            out,
            format,
        } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(format!("alpha must lie in (0,1), got {alpha}").into());
            }
            let config = AnalysisConfig {
                alpha,
                sided: parse_sided(&sided)?,
                small_sample_mode: SmallSampleMode::parse(&small_sample)?,
                methods: if methods == "auto" {
                    MethodsSpec::Auto
                } else {
                    MethodsSpec::Explicit(
                        methods.split(',').map(|s| s.trim().to_string()).collect(),
                    )
                },
                k_levels,
            };
            let (report, status) = cmd_analyze(&data, &config)?;
            match format.as_str() {
                "table" => print!("{}", report.to_table()),
                "csv" => print!("{}", report.to_csv()),
                "json" => println!("{}", report.to_json()),
                other => return Err(format!("unknown format `{other}`").into()),
            }
            if let Some(path) = out {
                std::fs::write(&path, report.to_json())?;
            }
            Ok(match status {
                AnalysisStatus::Complete => ExitCode::from(0),
                AnalysisStatus::Partial => ExitCode::from(2),
            })
        }
        Command::Simulate {
            scenario,
            out,
            replicates,
            seed,
            format,
        } => {
            let mut file = load_scenario_file(&scenario)?;
            if let Some(r) = replicates {
                file.replicates = r;
            }
            if let Some(s) = seed {
                file.seed = Some(s);
            }
            let cells = expand_scenarios(&file)?;
            let results = run_cells(&cells)?;
            match format.as_str() {
                "table" => print!("{}", cells_to_table(&results)),
                "csv" => print!("{}", cells_to_csv(&results)),
                "json" => println!("{}", serde_json::to_string_pretty(&results)?),
                other => return Err(format!("unknown format `{other}`").into()),
            }
            if let Some(dir) = out {
                write_simulation_outputs(&results, &dir)?;
            }
            Ok(ExitCode::from(0))
        }
        Command::Oracle {
            beta,
            rho_c,
            control_props,
            draws,
            seed,
            format,
        } => {
            let props = control_props.unwrap_or_else(|| door_core::DEFAULT_CONTROL_PROPS.to_vec());
            let rows = cmd_oracle(beta, &rho_c, &props, draws, seed)?;
            match format.as_str() {
                "table" => print!("{}", oracle_to_table(&rows)),
                "csv" => print!("{}", oracle_to_csv(&rows)),
                "json" => println!("{}", serde_json::to_string_pretty(&rows)?),
                other => return Err(format!("unknown format `{other}`").into()),
            }
            Ok(ExitCode::from(0))
        }
    }
}
