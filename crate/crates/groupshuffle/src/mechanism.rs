//! Plan execution: draw a permutation calibrated to the plan and reorder the
//! data accordingly.
//!
//! The draw happens in the reference frame. An identity-referenced insertion
//! draw `rho` nudges adjacent visit ranks, so members that the reference
//! permutation `sigma0` placed together (same group) trade places with high
//! probability. The sampled permutation is `sigma_hat(k) = sigma0(rho(k))`
//! ("rank k now holds the member that was at rank rho(k)") and the applied
//! permutation is `sigma_star = sigma0^-1 sigma_hat`, i.e.
//! `sigma_star(k) = sigma_hat(sigma0^-1(k))`, which carries the draw back to
//! the original data order. Everything here is independent of the data
//! values; only `(plan, seed)` determine `sigma_star`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::groups::{RankDistance, ShufflePlan};
use crate::mallows::InsertionTable;
use crate::perm::Permutation;
use crate::seeds;

/// Result of one mechanism run.
#[derive(Debug, Clone)]
pub struct ShuffleOutcome<T> {
    pub z: Vec<T>,
    pub sigma_star: Permutation,
    pub plan_digest: String,
    pub seed: u64,
}

/// Draw the applied permutation for `(plan, seed)` without touching data.
pub fn draw_sigma_star(plan: &ShufflePlan, seed: u64) -> Result<Permutation> {
    let n = plan.len();
    if plan.is_identity_shuffle() {
        return Permutation::identity(n);
    }
    if plan.rank_distance() != RankDistance::KendallTau {
        return Err(Error::InvalidParameter(
            "shuffling requires the Kendall's-tau rank distance".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(seed, "mechanism-draw"));
    let table = InsertionTable::new(plan.theta(), n)?;
    let rho = table.sample_identity(&mut rng);
    let sigma_hat = rho.compose(plan.sigma0())?; // sigma_hat(k) = sigma0(rho(k))
    sigma_star_from_draw(plan, &sigma_hat)
}

fn sigma_star_from_draw(plan: &ShufflePlan, sigma_hat: &Permutation) -> Result<Permutation> {
    plan.sigma0().inverse().compose(sigma_hat)
}

/// Run the mechanism: sample, invert the reference, reorder.
pub fn shuffle<T: Clone>(plan: &ShufflePlan, y: &[T], seed: u64) -> Result<ShuffleOutcome<T>> {
    if y.len() != plan.len() {
        return Err(Error::DimensionMismatch {
            expected: plan.len(),
            got: y.len(),
        });
    }
    let sigma_star = draw_sigma_star(plan, seed)?;
    let z = sigma_star.apply(y)?;
    Ok(ShuffleOutcome {
        z,
        sigma_star,
        plan_digest: plan.digest(),
        seed,
    })
}

/// Deterministic path: run the mechanism with a supplied draw instead of
/// sampling. Used by worked-example tests and the audits.
pub fn shuffle_with_fixed_draw<T: Clone>(
    plan: &ShufflePlan,
    y: &[T],
    sigma_hat: &Permutation,
) -> Result<ShuffleOutcome<T>> {
    if y.len() != plan.len() {
        return Err(Error::DimensionMismatch {
            expected: plan.len(),
            got: y.len(),
        });
    }
    let sigma_star = sigma_star_from_draw(plan, sigma_hat)?;
    let z = sigma_star.apply(y)?;
    Ok(ShuffleOutcome {
        z,
        sigma_star,
        plan_digest: plan.digest(),
        seed: 0,
    })
}
