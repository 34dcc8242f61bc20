//! Regenerates the tomography calibration table.
//!
//! `cargo run --release -p supersim-core --example calibrate [max_dim]`

use supersim_core::rng::SeedStream;
use supersim_core::tomo::{calibrate_cells, CALIBRATION_FAILURE_RATE, CALIBRATION_SEED, CALIBRATION_SHOTS, CALIBRATION_STATES};

fn main() -> supersim_core::Result<()> {
    let max_dim: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(16);
    let mut table = Vec::new();
    for d in 2..=max_dim {
        let cells = calibrate_cells(d, &CALIBRATION_SHOTS, CALIBRATION_STATES, CALIBRATION_FAILURE_RATE, SeedStream::new(CALIBRATION_SEED))?;
        for c in &cells {
            eprintln!("d={:2} N={:>8} C={:.4} fail={:.3}", c.dim, c.shots, c.constant, c.failure_rate);
        }
        table.push(cells.iter().map(|c| c.constant).fold(0.0, f64::max));
    }
    let entries: Vec<String> = table.iter().map(|c| format!("{:.4}", (c * 1e4).ceil() / 1e4)).collect();
    println!("[{}]", entries.join(", "));
    Ok(())
}
