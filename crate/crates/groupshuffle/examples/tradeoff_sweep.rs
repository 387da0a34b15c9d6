//! The privacy/utility trade-off in one table: sweep the grouping radius and
//! budget, reporting attack success (rho) and learnability error (lambda)
//! per cell as CSV.
//!
//! Run with: cargo run --release --example tradeoff_sweep

use groupshuffle::data::generate_syn;
use groupshuffle::eval::{sweep, sweep_csv_header, AttackConfig};

fn main() -> groupshuffle::Result<()> {
    let dataset = generate_syn(2000, 13)?;
    let cfg = AttackConfig {
        k_neighbors: 25,
        trials: 25,
        success_threshold: 0.9,
        epsilon: 2.5,
        r_star: 0.3,
    };
    let radii = [0.0, 0.02, 0.06, 1e9];
    let alphas = [0.5, 1.0];
    let rows = sweep(&dataset, &radii, &alphas, &cfg, 99)?;
    println!("{}", sweep_csv_header());
    for row in rows {
        println!("{}", row.to_csv());
    }
    Ok(())
}
