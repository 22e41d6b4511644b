//! Generates one participant's 54-trial plan and prints it as CSV.
//!
//! `cargo run --example generate_session`

use wfslab::session::{generate_session, write_plan, PlanGeometry, System};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plan = generate_session("P01", 1000, System::Wfs, &PlanGeometry::default(), true)?;
    plan.validate(&PlanGeometry::default())?;
    for (i, block) in plan.blocks().iter().enumerate() {
        let h = block[0];
        eprintln!(
            "block {}: {} {} {} x{}",
            i + 1,
            h.system,
            h.environment,
            h.movement,
            block.len()
        );
    }
    write_plan(&plan, std::io::stdout().lock())?;
    Ok(())
}
