//! Joint photon-count statistics of all eight detectors for the signal
//! branch, and how much of it the sixteen success patterns capture.
//!
//! cargo run --example photon_counting

use spe_amp::detection::{
    enumerate_success_patterns, failure_probability, outcome_distribution, project, DetectorMap,
};
use spe_amp::protocol::{evolve_branch, prepare_ancilla, signal_state, t2_matched};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (a2, t1) = (0.5f64, 0.25);
    let t2 = t2_matched(t1, a2)?;
    let state = evolve_branch(
        &signal_state(a2.sqrt(), 1.0, 0.0)?,
        &prepare_ancilla(t1, t2)?,
    )?;
    let map = DetectorMap::standard();
    println!("{} Fock terms before detection", state.len());

    let labels: Vec<String> = map
        .assignments()
        .iter()
        .map(|(l, _)| l.to_string())
        .collect();
    println!("detectors: {}", labels.join(" "));
    let dist = outcome_distribution(&state, &map)?;
    let total: f64 = dist.values().sum();
    println!(
        "{} distinct count vectors, total probability {total:.15}",
        dist.len()
    );
    let mut top: Vec<_> = dist.iter().collect();
    top.sort_by(|a, b| b.1.total_cmp(a.1));
    for (counts, p) in top.iter().take(8) {
        println!("  {counts:?} {p:.6e}");
    }

    let records = enumerate_success_patterns()
        .iter()
        .map(|p| project(&state, p, &map))
        .collect::<Result<Vec<_>, _>>()?;
    println!(
        "success probability {:.10}",
        1.0 - failure_probability(&records)
    );
    println!("failure probability {:.10}", failure_probability(&records));
    Ok(())
}
