//! Regenerates data/minvi_synthetic.csv: a synthetic multicenter dataset in
//! the shape of a cluster randomized crossover trial's DOOR endpoint
//! (10 centers with 34..289 newborns each, 6 ordinal levels, both arms
//! present in every center). Deterministic; run from the workspace root:
//!
//! ```bash
//! cargo run -p door-cli --example generate_example_data
//! ```

use door_cli::io::write_trial_csv;
use door_core::kernel::{Cluster, TrialData};
use door_core::simulation::{make_model, sample_latent_scores, stream_rng};
use rand::Rng;

fn main() {
    // center enrollments, largest to smallest, totalling 1524
    let sizes = [289usize, 243, 211, 187, 156, 131, 104, 89, 80, 34];
    // outcome mix dominated by "alive without events", with a thin tail of
    // severe outcomes
    let props = [0.60, 0.10, 0.23, 0.03, 0.025, 0.015];
    let model = make_model(0.18, 0.015, &props).unwrap();

    let mut rng = stream_rng(0xD002_2026, 0);
    let clusters: Vec<Cluster> = sizes
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let scores = sample_latent_scores(&model, m, &mut rng);
            // crossover periods: roughly half of each center per arm, with a
            // little imbalance from period enrollment
            let jitter = rng.random_range(0..=(m / 10).max(1)) as i64 - (m / 20) as i64;
            let m1 = (m as i64 / 2 + jitter).clamp(1, m as i64 - 1) as usize;
            let mut ranks_treatment = Vec::new();
            let mut ranks_control = Vec::new();
            for (j, &base) in scores.iter().enumerate() {
                let treated = j < m1;
                let shift = if treated { -model.beta } else { 0.0 };
                let rank = model.rank_of(base + shift);
                if treated {
                    ranks_treatment.push(rank);
                } else {
                    ranks_control.push(rank);
                }
            }
            Cluster {
                id: format!("center_{:02}", i + 1),
                ranks_treatment,
                ranks_control,
            }
        })
        .collect();

    let trial = TrialData::new(clusters, Some(6)).unwrap();
    let path = std::path::Path::new("data/minvi_synthetic.csv");
    std::fs::create_dir_all("data").unwrap();
    write_trial_csv(&trial, path).unwrap();
    println!(
        "wrote {} ({} clusters, {} subjects)",
        path.display(),
        trial.n(),
        trial.n_subjects()
    );
}
