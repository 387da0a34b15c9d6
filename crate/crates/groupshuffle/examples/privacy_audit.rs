//! Exhaustive privacy audits on a small instance: the mechanism's output
//! law, the strong-adversary posterior gap, joint releases, and the raw
//! randomizer fallback. Everything is enumerated, nothing sampled.
//!
//! Run with: cargo run --release --example privacy_audit

use groupshuffle::audit::{
    audit_composition, audit_dsigma, audit_ldp_weak_dsigma, audit_semantic, SemanticPrior,
};
use groupshuffle::groups::GroupAssignment;
use groupshuffle::{Metric, RankDistance, ShufflePlan};

fn main() -> groupshuffle::Result<()> {
    // Five records, one correlated trio, one correlated pair.
    let assignment = GroupAssignment::from_groups(
        vec![
            vec![0, 1, 2],
            vec![0, 1, 2],
            vec![0, 1, 2],
            vec![3, 4],
            vec![3, 4],
        ],
        1.0,
        Metric::Euclidean,
    )?;

    for alpha in [0.5, 1.0, 2.0] {
        let plan =
            ShufflePlan::from_assignment(assignment.clone(), alpha, RankDistance::KendallTau)?;
        let report = audit_dsigma(&plan)?;
        println!(
            "alpha = {alpha}: max log-ratio {:.9} over {} neighboring pairs -> {}",
            report.max_log_ratio_observed,
            report.neighbor_pairs_checked,
            if report.pass { "pass" } else { "VIOLATION" }
        );
    }

    // Strong adversary: knows the bag of grouped values and all values
    // outside the group; the posterior gap stays within the budget for any
    // prior over the grouped records. Record 2 shares the target's group
    // but not its household, which makes the arrangement informative.
    let n4 = GroupAssignment::from_groups(
        vec![vec![0, 1, 2], vec![0, 1, 2], vec![0, 1, 2], vec![3]],
        1.0,
        Metric::Euclidean,
    )?;
    let plan4 = ShufflePlan::from_assignment(n4.clone(), 1.0, RankDistance::KendallTau)?;
    let household = SemanticPrior::household(4, &[0, 1], 0.15, 0.5)?;
    println!(
        "posterior gap, correlated household prior: {:.6} (budget 1.0)",
        audit_semantic(&plan4, &household, 0)?
    );
    let product = SemanticPrior::product(&[0.3, 0.7, 0.5, 0.5])?;
    println!(
        "posterior gap, independent prior:          {:.6}",
        audit_semantic(&plan4, &product, 0)?
    );

    // Two independent releases on the same grouping spend their budgets
    // additively.
    let a = ShufflePlan::from_assignment(n4.clone(), 0.5, RankDistance::KendallTau)?;
    let b = ShufflePlan::from_assignment(n4.clone(), 0.5, RankDistance::KendallTau)?;
    let joint = audit_composition(&a, &b)?;
    println!(
        "joint release: max log-ratio {:.9} vs combined budget {}",
        joint.max_log_ratio_observed, joint.alpha_claimed
    );

    // Without any shuffling, an epsilon randomizer still bounds the ratio by
    // (largest group size) * epsilon.
    let weak = audit_ldp_weak_dsigma(1.0, &assignment)?;
    println!(
        "unshuffled randomizer: observed {:.6} <= bound {} -> {}",
        weak.max_log_ratio_observed,
        weak.bound,
        if weak.pass { "pass" } else { "VIOLATION" }
    );
    Ok(())
}
