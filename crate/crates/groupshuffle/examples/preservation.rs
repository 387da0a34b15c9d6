//! Subset preservation: how much of a subset survives shuffling. Compares
//! the exact combinatorial route against brute-force enumeration, then runs
//! the Monte Carlo estimator across widths.
//!
//! Run with: cargo run --release --example preservation

use groupshuffle::groups::GroupAssignment;
use groupshuffle::preserve::{
    brute_force_delta_hamming, estimate_preservation, exact_delta_hamming,
};
use groupshuffle::{Metric, RankDistance, ShufflePlan};

fn main() -> groupshuffle::Result<()> {
    // Exact vs brute force at enumerable scale.
    for (n, theta, ls, eta) in [(7usize, 0.5f64, 3usize, 1.0f64), (8, 0.5, 4, 0.75)] {
        let subset: Vec<usize> = (0..ls).collect();
        let exact = exact_delta_hamming(theta, n, ls, eta)?;
        let brute = brute_force_delta_hamming(theta, n, &subset, eta)?;
        println!(
            "n={n} theta={theta} |S|={ls} eta={eta}: exact delta {exact:.12}, \
             brute force {brute:.12}, diff {:.2e}",
            (exact - brute).abs()
        );
    }

    // Monte Carlo across widths at a fixed budget: wider plans preserve less.
    let n = 400;
    let subset: Vec<usize> = (150..250).collect();
    println!("\nwidth sweep at alpha = 3, |S| = {} of {n}:", subset.len());
    for block in [5usize, 15, 40] {
        let mut groups: Vec<Vec<usize>> = Vec::with_capacity(n);
        for i in 0..n {
            let start = i - (i % block);
            let end = (start + block).min(n);
            groups.push((start..end).collect());
        }
        let assignment = GroupAssignment::from_groups(groups, block as f64, Metric::Euclidean)?;
        let plan = ShufflePlan::from_assignment(assignment, 3.0, RankDistance::KendallTau)?;
        let report = estimate_preservation(&plan, &subset, 0.9, 0.01, 500, 17)?;
        println!(
            "  width {:>3}: delta at eta=0.9 is {:.3}; largest eta kept by 99% of trials: {:.3}",
            plan.width(),
            report.delta,
            report.eta_at_delta.unwrap()
        );
    }
    Ok(())
}
