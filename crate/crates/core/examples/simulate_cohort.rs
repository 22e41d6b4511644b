//! Simulates a small cohort and writes its logs.
//!
//! `cargo run --release --example simulate_cohort [OUT_DIR]`

use std::path::PathBuf;

use wfslab::session::{run_cohort, CohortConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("wfslab_cohort"));
    let cfg = CohortConfig {
        participants: 3,
        wfs_first: 2,
        ..CohortConfig::default()
    };
    for s in run_cohort(&cfg, &out)? {
        println!(
            "{} seed {} first {}: wfs {:.3} m, stereo {:.3} m -> {}",
            s.participant,
            s.seed,
            s.first_system,
            s.mean_score_wfs.unwrap_or(f64::NAN),
            s.mean_score_stereo.unwrap_or(f64::NAN),
            s.dir.display()
        );
    }
    Ok(())
}
