//! Write the closed-form data behind plots 2 to 5 as CSV files.
//!
//! cargo run --example figure_data -- [output-dir]

use std::path::PathBuf;

use spe_amp::cli::figure::figure_csv;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&dir)?;
    for n in 2..=5 {
        let csv = figure_csv(n).map_err(|e| e.to_string())?;
        let path = dir.join(format!("figure{n}.csv"));
        std::fs::write(&path, &csv)?;
        println!("{} ({} rows)", path.display(), csv.lines().count() - 1);
    }
    Ok(())
}
