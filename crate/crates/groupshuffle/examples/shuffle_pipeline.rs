//! The full data path: generate clustered data, randomize it locally, plan
//! from the public coordinates, and shuffle. Shows how the plan reacts to
//! the similarity threshold.
//!
//! Run with: cargo run --release --example shuffle_pipeline

use groupshuffle::data::generate_syn;
use groupshuffle::ldp::{randomize_all, RandomizerConfig};
use groupshuffle::mechanism::shuffle;
use groupshuffle::seeds;
use groupshuffle::{Metric, RankDistance, ShufflePlan};

fn main() -> groupshuffle::Result<()> {
    let seed = 42;
    let dataset = generate_syn(2000, seed)?;
    let rr = RandomizerConfig::new(2.5, dataset.label_arity)?;
    let mut rng = seeds::rng(seed, "pipeline-ldp");
    let y = randomize_all(&rr, &dataset.x, &mut rng)?;

    for r in [0.0, 0.03, 0.1, f64::INFINITY] {
        let plan = ShufflePlan::build(
            &dataset.aux,
            r,
            1.0,
            Metric::Euclidean,
            RankDistance::KendallTau,
        )?;
        let outcome = shuffle(&plan, &y, seed)?;
        let moved = outcome
            .sigma_star
            .mapping()
            .iter()
            .enumerate()
            .filter(|(k, &v)| *k != v)
            .count();
        println!(
            "r = {r:>8.2}: width {:>5}, sensitivity {:>12.0}, theta {:>9.2e}, \
             displaced {} of {} positions (plan {})",
            plan.width(),
            plan.sensitivity(),
            plan.theta(),
            moved,
            plan.len(),
            outcome.plan_digest,
        );
    }
    Ok(())
}
