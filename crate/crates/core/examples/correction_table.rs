//! The local correction applied after each of the sixteen success patterns,
//! found by searching flip/phase compositions against the target state.
//!
//! cargo run --example correction_table

use spe_amp::protocol::correction_table;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = correction_table()?;
    for (pattern, correction) in table.entries() {
        println!("{:<14} {correction}", pattern.to_string());
    }
    Ok(())
}
