//! One protocol run: per-pattern probabilities and the heralded output.
//!
//! cargo run --example single_run

use spe_amp::protocol::{maximally_entangled_output, run, ProtocolParams, T2};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (eta, a2, t1) = (0.6, 0.5, 0.25);
    let (alpha, beta) = (0.6, 0.8);
    let params = ProtocolParams::from_a2(eta, a2, alpha, beta, t1, T2::Matched)?;
    let out = run(&params)?;

    println!(
        "eta = {eta}, a^2 = {a2}, t1 = {t1}, matched t2 = {:.10}",
        out.t2
    );
    println!(
        "{:<14} {:>14} {:>14} {:>14}",
        "pattern", "p(lossy)", "p(signal)", "p(vacuum)"
    );
    for o in &out.per_pattern {
        println!(
            "{:<14} {:>14.6e} {:>14.6e} {:>14.6e}",
            o.pattern.to_string(),
            o.probability,
            o.signal_probability,
            o.vacuum_probability
        );
    }
    println!();
    println!(
        "P1 = {:.10}  P2 = {:.10}  Pt = {:.10}",
        out.p1, out.p2, out.p_total
    );
    println!("failure probability = {:.10}", out.failure_probability());
    let eta_out = out.eta_out.expect("nonzero success probability");
    println!(
        "eta' = {eta_out:.10}  g = {:.10}",
        out.gain.unwrap_or(f64::NAN)
    );

    let target = maximally_entangled_output(alpha, beta)?;
    let state = out.output_state.expect("nonzero success probability");
    println!("output branches: {}", state.branches().len());
    for (w, s) in state.branches() {
        println!("weight {w:.10}");
        print!("{s}");
    }
    println!(
        "fidelity with the maximally entangled state = {:.10}",
        state.fidelity_with(&target)?
    );
    Ok(())
}
