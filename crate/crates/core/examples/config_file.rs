//! Loads a cohort configuration file and shows the resolved settings.
//!
//! `cargo run --example config_file [FILE]`

use std::path::{Path, PathBuf};

use wfslab::config::SimulationConfig;

fn main() {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/small_cohort.ini"));
    match SimulationConfig::load(&path) {
        Ok(cfg) => {
            let c = &cfg.cohort;
            println!(
                "participants {} (wfs first {}), base seed {}",
                c.participants, c.wfs_first, c.base_seed
            );
            println!(
                "render mode {:?}, cue model {:?}",
                c.session.mode, c.session.cue_model
            );
            println!("agent {:?}", c.session.agent);
            println!("out {:?}", cfg.out_dir);
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    }

    // errors carry the file and line
    let bad = SimulationConfig::parse(Path::new("inline.ini"), "[agent]\nwalk_speed = fast\n");
    println!("{}", bad.unwrap_err());
}
