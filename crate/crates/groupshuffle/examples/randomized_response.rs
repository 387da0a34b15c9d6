//! The local randomizer: keep the true category with probability
//! e^eps / (e^eps + k - 1), otherwise report a uniform other category.
//! Shows the channel matrix, the tightness audit, and frequency debiasing.
//!
//! Run with: cargo run --example randomized_response

use groupshuffle::ldp::{debias_frequencies, ldp_ratio_audit, randomize, RandomizerConfig};
use groupshuffle::seeds;

fn main() -> groupshuffle::Result<()> {
    let cfg = RandomizerConfig::new(2.5, 4)?;
    println!("keep probability: {:.4}", cfg.keep_probability());
    println!("channel matrix:");
    for row in cfg.channel() {
        let cells: Vec<String> = row.iter().map(|p| format!("{p:.4}")).collect();
        println!("  [{}]", cells.join(", "));
    }

    // The worst-case log-ratio over the channel equals epsilon exactly.
    println!("ratio audit: {:.12} (epsilon = {})", ldp_ratio_audit(&cfg), cfg.epsilon);

    // Randomize a skewed population and invert the channel on the observed
    // frequencies.
    let truth = [0.55, 0.25, 0.15, 0.05];
    let n = 200_000;
    let mut rng = seeds::rng(11, "rr-example");
    let mut observed = vec![0.0f64; 4];
    for i in 0..n {
        let x = match i % 20 {
            0..=10 => 0,
            11..=15 => 1,
            16..=18 => 2,
            _ => 3,
        };
        observed[randomize(&cfg, x, &mut rng)?] += 1.0;
    }
    observed.iter_mut().for_each(|c| *c /= n as f64);
    let estimate = debias_frequencies(&cfg, &observed)?;
    println!("true frequencies:      {truth:?}");
    println!("observed frequencies:  {observed:.3?}");
    println!("debiased estimate:     {estimate:.3?}");
    Ok(())
}
