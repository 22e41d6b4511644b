//! Simulates two participants, reads the logs back and writes the analysis
//! bundle; prints the summary statistics and the manifest entries.
//!
//! `cargo run --release --example analyze_bundle [OUT_DIR]`

use std::path::PathBuf;

use wfslab::analysis::{
    export_analysis, fraction_below, mean_scores, participant_slopes, ConditionFilter, Dimension,
    ExportOptions, Manifest,
};
use wfslab::logging::read_cohort;
use wfslab::session::{run_cohort, CohortConfig, System};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("wfslab_analysis"));
    let cfg = CohortConfig {
        participants: 2,
        wfs_first: 1,
        ..CohortConfig::default()
    };
    run_cohort(&cfg, &root.join("logs"))?;
    let sessions = read_cohort(&root.join("logs"))?;

    for g in mean_scores(
        &sessions,
        &[Dimension::System, Dimension::Movement],
        &ConditionFilter::all(),
    ) {
        println!(
            "{:<20} mean {:.3} m over {} trials",
            g.key.join("/"),
            g.mean_score,
            g.n
        );
    }
    for &system in System::ALL {
        let f = fraction_below(&sessions, 0.2, &ConditionFilter::system(system))?;
        println!("{system}: {:.0}% of guesses within 20 cm", f * 100.0);
    }
    for s in participant_slopes(&sessions) {
        println!(
            "{} {}: slope {:+.4} m/trial{}",
            s.participant,
            s.system,
            s.slope,
            if s.improving { " (improving)" } else { "" }
        );
    }

    let dir = root.join("analysis");
    let manifest = export_analysis(&sessions, &dir, &ExportOptions::default())?;
    println!("wrote {}", manifest.display());
    for e in Manifest::load(&dir)?.entries {
        println!("{:<36} {}", e.file, e.plot.as_deref().unwrap_or("table"));
    }
    Ok(())
}
