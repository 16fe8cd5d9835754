//! Away from the matched transmission the heralded state keeps the
//! polarization qubit but the c3/d3 weights become unequal.
//!
//! cargo run --example unmatched_t2

use spe_amp::analytics::{p1_general, p2_general};
use spe_amp::protocol::{maximally_entangled_output, run, t2_matched, ProtocolParams, T2};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (a2, t1, eta) = (0.3, 0.2, 0.8);
    let matched = t2_matched(t1, a2)?;
    let target = maximally_entangled_output(1.0, 0.0)?;
    println!("a^2 = {a2}, t1 = {t1}, matched t2 = {matched:.10}");
    println!(
        "{:>8} {:>14} {:>14} {:>14} {:>12}",
        "t2", "P1 sim", "P1 closed", "P2 closed", "fidelity"
    );
    for t2 in [0.1, 0.2, 0.3, matched, 0.5, 0.7, 0.9] {
        let out = run(&ProtocolParams::from_a2(
            eta,
            a2,
            1.0,
            0.0,
            t1,
            T2::Fixed(t2),
        )?)?;
        let signal = out.per_pattern[0]
            .signal_state
            .as_ref()
            .expect("pattern occurs");
        println!(
            "{t2:>8.4} {:>14.6e} {:>14.6e} {:>14.6e} {:>12.8}",
            out.p1,
            p1_general(a2, t1, t2)?,
            p2_general(t1, t2)?,
            signal.fidelity(&target)?
        );
    }
    Ok(())
}
