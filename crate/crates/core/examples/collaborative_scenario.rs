// Two vehicles sharing a detection over a lossy link, then the coverage
// matrix of the shipped checks.
//
// ```bash
// cargo run -p tds --example collaborative_scenario
// ```

use tds::harness::{
    collaborative_detection, run_builtin_suite, run_scenario, taxonomy_report, BusConfig, CollaborativeOptions,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for drop_probability in [0.0, 1.0] {
        let scenario = collaborative_detection(CollaborativeOptions {
            bus: BusConfig {
                drop_probability,
                ..CollaborativeOptions::default().bus
            },
            ..Default::default()
        })?;
        let report = run_scenario(&scenario, None)?;
        println!("drop probability {drop_probability}: passed={}", report.passed());
        for a in &report.agents {
            println!(
                "  {} yaw {:.2} deg after {} reorientation(s)",
                a.id, a.yaw_deg, a.reorientations
            );
        }
        println!("  bus {:?}", report.bus);
    }

    let coverage = taxonomy_report(&run_builtin_suite());
    print!("{}", coverage.to_table());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
