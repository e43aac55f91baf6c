//! Loads the bundled wind scenarios, wraps the planned path in flow pipes
//! fattened by the certified tracking-error set, and checks them against
//! the building footprints: 1 m/s wind clears, 5 m/s does not.

use loglin::flowpipe::PipeConfig;
use loglin::pipeline::verify_scenario;
use loglin::scenario::Scenario;

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios");
    for name in ["uam_w1.json", "uam_w5.json"] {
        let sc = Scenario::from_path(format!("{dir}/{name}")).unwrap();
        let artifacts = verify_scenario(&sc, false, &PipeConfig::default()).unwrap();
        let reach = artifacts
            .pipe
            .windows
            .iter()
            .flat_map(|w| w.region.vertices().iter().map(|v| v.y.abs()))
            .fold(0.0f64, f64::max);
        println!(
            "{:8}: wind {:?} m/s, {} windows, lateral reach {:.2} m -> {:?}",
            sc.name,
            &sc.disturbance[..2],
            artifacts.pipe.windows.len(),
            reach,
            artifacts.report.verdict,
        );
        for hit in &artifacts.report.hits {
            let w = &artifacts.pipe.windows[hit.window];
            println!("  contact with obstacle {} during [{:.1}, {:.1}] s", hit.obstacle, w.t0, w.t1);
        }
    }
}
