//! The gain as a function of input fidelity: the output fidelity after a
//! successful herald for several eta at fixed a^2 and t1.
//!
//! cargo run --example lossy_input

use spe_amp::analytics::{g_limit, t1_threshold};
use spe_amp::protocol::{run, ProtocolParams, T2};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a2 = 0.5;
    println!(
        "a^2 = {a2}: amplification needs t1 < {:.6}",
        t1_threshold(a2)?
    );
    for t1 in [0.01, 0.1, 0.3, 0.5, 0.6] {
        println!("\nt1 = {t1}");
        println!(
            "{:>6} {:>12} {:>12} {:>12} {:>12}",
            "eta", "eta'", "gain", "1/eta", "Pt"
        );
        for eta in [0.2, 0.4, 0.6, 0.8, 1.0] {
            let out = run(&ProtocolParams::from_a2(
                eta,
                a2,
                1.0,
                0.0,
                t1,
                T2::Matched,
            )?)?;
            println!(
                "{eta:>6.2} {:>12.8} {:>12.8} {:>12.8} {:>12.4e}",
                out.eta_out.unwrap_or(f64::NAN),
                out.gain.unwrap_or(f64::NAN),
                g_limit(eta)?,
                out.p_total
            );
        }
    }
    Ok(())
}
