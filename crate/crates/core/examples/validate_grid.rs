//! Simulate the 9 x 9 x 12 parameter grid and compare every point with the
//! closed forms.
//!
//! cargo run --release --example validate_grid

use spe_amp::cli::{
    default_a2_grid, default_eta_grid, default_t1_grid, validate_grid, METRIC_NAMES,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let start = std::time::Instant::now();
    let report = validate_grid(
        &default_eta_grid(),
        &default_a2_grid(),
        &default_t1_grid(),
        1.0,
        1e-10,
    )
    .map_err(|e| e.to_string())?;
    println!("{} points in {:.2?}", report.points.len(), start.elapsed());

    let mut per_metric = [0.0f64; 5];
    for c in &report.points {
        for (acc, d) in per_metric.iter_mut().zip(c.deviations()) {
            *acc = acc.max(d);
        }
    }
    for (name, d) in METRIC_NAMES.iter().zip(per_metric) {
        println!("max |sim - closed| for {name:<8} {d:.3e}");
    }
    if let Some((c, d, metric)) = report.worst() {
        println!(
            "worst: {d:.3e} ({metric}) at eta={} a2={} t1={}",
            c.eta, c.a2, c.t1
        );
    }
    println!("{}", if report.passed() { "PASS" } else { "FAIL" });
    Ok(())
}
