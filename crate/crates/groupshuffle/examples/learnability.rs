//! Learnability: can an analyst still estimate local category distributions
//! from the released sequence? Scores a neighborhood histogram estimator
//! (debiased through the randomizer channel) against the true local
//! distributions, normalized by uniform guessing.
//!
//! Run with: cargo run --release --example learnability

use groupshuffle::data::generate_syn;
use groupshuffle::eval::{run_learnability, DebiasedBallHistogram, GlobalHistogram};
use groupshuffle::{Metric, RankDistance, ShufflePlan};

fn main() -> groupshuffle::Result<()> {
    let dataset = generate_syn(2000, 9)?;
    let epsilon = 2.5;
    let r_star = 0.3;
    let ball = DebiasedBallHistogram { epsilon };
    let global = GlobalHistogram { epsilon };

    println!("lambda < 1 means the estimator beats uniform guessing\n");
    for r in [0.0, 0.02, 0.06, f64::INFINITY] {
        let plan = ShufflePlan::build(
            &dataset.aux,
            r,
            1.0,
            Metric::Euclidean,
            RankDistance::KendallTau,
        )?;
        let local = run_learnability(&dataset, &plan, r_star, epsilon, &ball, 5)?;
        let baseline = run_learnability(&dataset, &plan, r_star, epsilon, &global, 5)?;
        println!(
            "r = {r:>8.2}: lambda(neighborhood) = {:.3}, lambda(global histogram) = {:.3}",
            local.lambda, baseline.lambda
        );
    }
    Ok(())
}
