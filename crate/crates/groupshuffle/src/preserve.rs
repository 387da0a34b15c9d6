//! Subset-preservation analysis: with what probability does at least an
//! `eta` fraction of a subset's positions map back into the subset after
//! shuffling?
//!
//! Three routes are provided. The Monte Carlo estimator works for any plan
//! and is the production path. The exact path evaluates the closed
//! combinatorial formula for the Hamming-distance Mallows law (whose applied
//! permutation is identity-centered in Hamming distance, so only `n`,
//! `theta`, the subset size and `eta` matter). The brute-force path
//! enumerates all of `S_n` and is the oracle the exact path is validated
//! against.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::ShufflePlan;
use crate::mechanism::draw_sigma_star;
use crate::perm::{enumerate_permutations, Permutation};
use crate::seeds;

/// Largest n for which exact wide-integer combinatorics are offered.
pub const MAX_EXACT_N: usize = 20;

/// Largest n for which the brute-force enumeration oracle is offered.
pub const MAX_BRUTE_N: usize = 8;

/// Largest argument accepted by [`derangements`].
pub const MAX_DERANGEMENT_N: usize = 20;

/// Largest `p + m` accepted by [`f_table`].
pub const MAX_F_TABLE_TOTAL: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreservationMethod {
    MonteCarlo,
    ExactHamming,
    BruteForce,
}

/// Result of a preservation query.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreservationReport {
    pub subset: Vec<usize>,
    pub eta: f64,
    /// Probability that fewer than `eta * |S|` of the subset's positions map
    /// back into the subset.
    pub delta: f64,
    /// Largest eta attained by at least a `1 - delta_target` fraction of
    /// trials (Monte Carlo only).
    pub eta_at_delta: Option<f64>,
    pub method: PreservationMethod,
    pub trials: usize,
}

/// Fraction of `subset`'s positions whose images stay in `subset`:
/// `|S_sigma ∩ S| / |S|` with `S_sigma = { sigma(i) : i in S }`.
pub fn overlap_fraction(sigma: &Permutation, subset: &[usize]) -> Result<f64> {
    Ok(overlap_count(sigma, subset)? as f64 / subset.len() as f64)
}

fn overlap_count(sigma: &Permutation, subset: &[usize]) -> Result<usize> {
    if subset.is_empty() {
        return Err(Error::InvalidParameter("subset must be nonempty".into()));
    }
    let n = sigma.len();
    let mut in_subset = vec![false; n];
    for &i in subset {
        if i >= n {
            return Err(Error::InvalidParameter(format!(
                "subset index {i} out of range for n = {n}"
            )));
        }
        in_subset[i] = true;
    }
    Ok(subset
        .iter()
        .filter(|&&i| in_subset[sigma.image(i)])
        .count())
}

/// Number of positions allowed to escape the subset before the preservation
/// event fails: `floor((1 - eta) * |S|)`, so failure means strictly more
/// than that escape (equivalently, overlap < eta * |S|).
fn max_escapes(subset_len: usize, eta: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!(
            "eta must lie in [0, 1], got {eta}"
        )));
    }
    Ok((((1.0 - eta) * subset_len as f64) + 1e-9).floor() as usize)
}

/// Monte Carlo preservation estimate for any plan: sample the applied
/// permutation `trials` times and report the failure fraction, plus the
/// largest eta attained by at least `1 - delta_target` of trials.
pub fn estimate_preservation(
    plan: &ShufflePlan,
    subset: &[usize],
    eta: f64,
    delta_target: f64,
    trials: usize,
    seed: u64,
) -> Result<PreservationReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    if !(0.0..=1.0).contains(&delta_target) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in [0, 1], got {delta_target}"
        )));
    }
    let allowed = max_escapes(subset.len(), eta)?;
    let counts: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let sigma =
                draw_sigma_star(plan, seeds::derive_indexed(seed, "preserve-trial", t as u64))?;
            overlap_count(&sigma, subset)
        })
        .collect::<Result<_>>()?;
    let failures = counts
        .iter()
        .filter(|&&c| subset.len() - c > allowed)
        .count();

    // Inverse query: sort overlaps ascending, skip the delta_target tail.
    let mut sorted = counts;
    sorted.sort_unstable();
    let skip = ((delta_target * trials as f64).floor() as usize).min(trials - 1);
    let eta_at_delta = sorted[skip] as f64 / subset.len() as f64;

    Ok(PreservationReport {
        subset: subset.to_vec(),
        eta,
        delta: failures as f64 / trials as f64,
        eta_at_delta: Some(eta_at_delta),
        method: PreservationMethod::MonteCarlo,
        trials,
    })
}

/// Exact derangement count, by the standard recurrence.
pub fn derangements(p: usize) -> Result<u128> {
    if p > MAX_DERANGEMENT_N {
        return Err(Error::UnsupportedScale {
            what: "derangement count",
            limit: MAX_DERANGEMENT_N,
            got: p,
        });
    }
    Ok(derangements_unchecked(p))
}

fn derangements_unchecked(p: usize) -> u128 {
    match p {
        0 => 1,
        1 => 0,
        _ => {
            let (mut prev2, mut prev1) = (1u128, 0u128);
            for i in 2..=p {
                let cur = (i as u128 - 1) * (prev1 + prev2);
                prev2 = prev1;
                prev1 = cur;
            }
            prev1
        }
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `f(p, m)`: arrangements of `p + m` labeled objects into their `p + m`
/// original positions where none of the `p` constrained objects stays at its
/// own position and the `m` free objects go anywhere. `f(p, 0)` is the
/// derangement count, `f(0, m) = m!`.
pub fn f_table(p: usize, m: usize) -> Result<u128> {
    if p + m > MAX_F_TABLE_TOTAL {
        return Err(Error::UnsupportedScale {
            what: "constrained-arrangement table",
            limit: MAX_F_TABLE_TOTAL,
            got: p + m,
        });
    }
    let mut memo = HashMap::new();
    Ok(f_count(p, m, &mut memo))
}

fn f_count(p: usize, m: usize, memo: &mut HashMap<(usize, usize), u128>) -> u128 {
    if m == 0 {
        return derangements_unchecked(p);
    }
    if p == 0 {
        return factorial(m);
    }
    if let Some(&v) = memo.get(&(p, m)) {
        return v;
    }
    // Place the m free objects first: q of them onto constrained origins,
    // m - q onto free origins, in any order; the p constrained objects then
    // fill the rest with q of the leftover positions unconstrained for them.
    let mut total = 0u128;
    for q in 0..=p.min(m) {
        total += binomial(p, q) * binomial(m, m - q) * factorial(m) * f_count(p - q, q, memo);
    }
    memo.insert((p, m), total);
    total
}

/// Count, for each Hamming distance `h` from the reference, the permutations
/// that fail to preserve an `eta` fraction of a size-`subset_len` subset.
/// Indices escaping the subset pair up with indices entering it, so counts
/// are zero until `h = 2 * (allowed escapes + 1)`.
pub fn hamming_failure_counts(n: usize, subset_len: usize, eta: f64) -> Result<Vec<u128>> {
    if n > MAX_EXACT_N {
        return Err(Error::UnsupportedScale {
            what: "exact preservation combinatorics",
            limit: MAX_EXACT_N,
            got: n,
        });
    }
    if subset_len == 0 || subset_len > n {
        return Err(Error::InvalidParameter(format!(
            "subset size {subset_len} out of range for n = {n}"
        )));
    }
    let allowed = max_escapes(subset_len, eta)?;
    let ls = subset_len;
    let mut memo = HashMap::new();
    let mut counts = vec![0u128; n + 1];
    let lower = 2 * (allowed + 1);
    #[allow(clippy::needless_range_loop)] // h is the distance being counted
    for h in lower..=n {
        let mut c_h = 0u128;
        // j = escaped subset values = entering outside values.
        let j_hi = ls.min(n - ls).min(h / 2);
        for j in (allowed + 1)..=j_hi {
            let choose_sets = binomial(ls, j) * binomial(n - ls, j);
            if choose_sets == 0 {
                continue;
            }
            let mut inner = 0u128;
            // i = subset values displaced but still inside the subset.
            for i in 0..=(ls - j).min(h - 2 * j) {
                let d = h - 2 * j - i; // outside values displaced among outside
                inner += binomial(ls - j, i)
                    * f_count(i, j, &mut memo)
                    * binomial(n - ls - j, d)
                    * f_count(d, j, &mut memo);
            }
            c_h += choose_sets * inner;
        }
        counts[h] = c_h;
    }
    Ok(counts)
}

/// Normalizer of the Hamming-distance Mallows law at scale `n`.
pub fn psi_hamming(theta: f64, n: usize) -> Result<f64> {
    if n > MAX_EXACT_N {
        return Err(Error::UnsupportedScale {
            what: "Hamming normalizer",
            limit: MAX_EXACT_N,
            got: n,
        });
    }
    Ok((0..=n)
        .map(|h| (binomial(n, h) * derangements_unchecked(h)) as f64 * (-theta * h as f64).exp())
        .sum())
}

/// Exact failure probability for the Hamming-distance Mallows law: the
/// weighted fraction of permutations that move more than the allowed number
/// of subset positions out of the subset.
pub fn exact_delta_hamming(theta: f64, n: usize, subset_len: usize, eta: f64) -> Result<f64> {
    if theta.is_nan() || theta < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "dispersion must be >= 0, got {theta}"
        )));
    }
    let counts = hamming_failure_counts(n, subset_len, eta)?;
    let psi = psi_hamming(theta, n)?;
    let weighted: f64 = counts
        .iter()
        .enumerate()
        .map(|(h, &c)| c as f64 * (-theta * h as f64).exp())
        .sum();
    Ok(weighted / psi)
}

/// Brute-force oracle: enumerate all of `S_n`, weight by
/// `exp(-theta * hamming distance to identity)`, and sum the failures.
pub fn brute_force_delta_hamming(
    theta: f64,
    n: usize,
    subset: &[usize],
    eta: f64,
) -> Result<f64> {
    if n > MAX_BRUTE_N {
        return Err(Error::UnsupportedScale {
            what: "brute-force preservation",
            limit: MAX_BRUTE_N,
            got: n,
        });
    }
    let allowed = max_escapes(subset.len(), eta)?;
    let identity = Permutation::identity(n)?;
    let mut psi = 0.0f64;
    let mut failed = 0.0f64;
    for sigma in enumerate_permutations(n)? {
        let w = (-theta * sigma.hamming(&identity)? as f64).exp();
        psi += w;
        if subset.len() - overlap_count(&sigma, subset)? > allowed {
            failed += w;
        }
    }
    Ok(failed / psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{GroupAssignment, Metric, RankDistance};

    #[test]
    fn overlap_worked_example() {
        // S = {1,4,5,7,8}, sigma = (5 3 2 6 7 9 8 1 4 10): 4 of 5 preserved.
        let sigma = Permutation::from_one_based(&[5, 3, 2, 6, 7, 9, 8, 1, 4, 10]).unwrap();
        let subset = [0usize, 3, 4, 6, 7];
        assert!((overlap_fraction(&sigma, &subset).unwrap() - 0.8).abs() < 1e-12);

        let id = Permutation::identity(10).unwrap();
        assert_eq!(overlap_fraction(&id, &subset).unwrap(), 1.0);
        let everything: Vec<usize> = (0..10).collect();
        assert_eq!(overlap_fraction(&sigma, &everything).unwrap(), 1.0);
        assert!(overlap_fraction(&sigma, &[]).is_err());
    }

    #[test]
    fn derangement_values() {
        assert_eq!(derangements(0).unwrap(), 1);
        assert_eq!(derangements(1).unwrap(), 0);
        // Enumerated: permutations of 3 and 4 elements with no fixed point.
        let count3 = enumerate_permutations(3)
            .unwrap()
            .filter(|s| s.support_size() == 3)
            .count() as u128;
        assert_eq!(derangements(3).unwrap(), count3);
        assert_eq!(derangements(3).unwrap(), 2);
        assert_eq!(derangements(4).unwrap(), 9);
        // Closed form floor(p!/e + 1/2) agrees through 12 (for p >= 1;
        // at p = 0 the convention is 1 and the rounding formula gives 0).
        for p in 1..=12usize {
            let closed = ((factorial(p) as f64 / std::f64::consts::E) + 0.5).floor() as u128;
            assert_eq!(derangements(p).unwrap(), closed, "p = {p}");
        }
        assert!(derangements(21).is_err());
    }

    /// Direct enumeration of f(p, m): place p+m labeled objects on their own
    /// positions, forbidding the first p from their origins.
    fn f_brute(p: usize, m: usize) -> u128 {
        enumerate_permutations(p + m)
            .unwrap()
            .filter(|sigma| (0..p).all(|k| sigma.image(k) != k))
            .count() as u128
    }

    #[test]
    fn f_table_matches_enumeration() {
        for p in 0..=6 {
            assert_eq!(f_table(p, 0).unwrap(), derangements(p).unwrap());
        }
        for m in 1..=6 {
            assert_eq!(f_table(0, m).unwrap(), factorial(m));
        }
        assert_eq!(f_table(2, 1).unwrap(), f_brute(2, 1));
        assert_eq!(f_table(2, 1).unwrap(), 3);
        for p in 0..=4 {
            for m in 0..=4 {
                if p + m >= 1 && p + m <= 7 {
                    assert_eq!(f_table(p, m).unwrap(), f_brute(p, m), "f({p},{m})");
                }
            }
        }
        assert!(f_table(7, 6).is_err());
    }

    #[test]
    fn failure_counts_respect_parity_floor() {
        for (n, ls, eta) in [(8usize, 4usize, 0.75f64), (7, 3, 0.5), (6, 3, 1.0)] {
            let counts = hamming_failure_counts(n, ls, eta).unwrap();
            let allowed = (((1.0 - eta) * ls as f64) + 1e-9).floor() as usize;
            for (h, &c) in counts.iter().enumerate() {
                if h <= 2 * allowed + 1 {
                    assert_eq!(c, 0, "count at h={h} should vanish");
                }
            }
            assert_eq!(counts[1], 0);
        }
    }

    #[test]
    fn psi_matches_enumeration() {
        let id = Permutation::identity(6).unwrap();
        for theta in [0.0, 0.5, 1.0] {
            let brute: f64 = enumerate_permutations(6)
                .unwrap()
                .map(|s| (-theta * s.hamming(&id).unwrap() as f64).exp())
                .sum();
            let closed = psi_hamming(theta, 6).unwrap();
            assert!((closed - brute).abs() < 1e-10 * brute);
        }
    }

    #[test]
    fn eta_zero_never_fails() {
        assert_eq!(exact_delta_hamming(0.5, 8, 4, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn exact_matches_brute_force_spot_checks() {
        let subset6: Vec<usize> = vec![0, 1, 2];
        let exact = exact_delta_hamming(0.0, 6, 3, 1.0).unwrap();
        let brute = brute_force_delta_hamming(0.0, 6, &subset6, 1.0).unwrap();
        assert!(
            (exact - brute).abs() < 1e-12,
            "n=6 uniform: exact {exact} vs brute {brute}"
        );

        let exact = exact_delta_hamming(0.5, 8, 4, 0.75).unwrap();
        let brute = brute_force_delta_hamming(0.5, 8, &[0, 1, 2, 3], 0.75).unwrap();
        assert!(
            (exact - brute).abs() < 1e-12,
            "n=8: exact {exact} vs brute {brute}"
        );

        // The subset's identity does not matter, only its size.
        let brute2 = brute_force_delta_hamming(0.5, 8, &[1, 3, 5, 7], 0.75).unwrap();
        assert!((brute - brute2).abs() < 1e-12);
    }

    #[test]
    fn delta_monotone_in_theta_and_eta() {
        let mut last = f64::INFINITY;
        for theta in [0.0, 0.25, 0.5, 1.0, 2.0] {
            let d = exact_delta_hamming(theta, 10, 5, 0.8).unwrap();
            assert!(d <= last + 1e-12, "delta should not increase with theta");
            last = d;
        }
        let mut last = -1.0;
        for eta in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0] {
            let d = exact_delta_hamming(0.5, 10, 5, eta).unwrap();
            assert!(d >= last - 1e-12, "delta should not decrease with eta");
            last = d;
        }
    }

    fn contiguous_block_plan(n: usize, block: usize, alpha: f64) -> ShufflePlan {
        // Groups are disjoint contiguous blocks, giving width block - 1.
        let mut groups: Vec<Vec<usize>> = Vec::with_capacity(n);
        for i in 0..n {
            let start = i - (i % block);
            let end = (start + block).min(n);
            groups.push((start..end).collect());
        }
        let assignment = GroupAssignment::from_groups(groups, 1.0, Metric::Euclidean).unwrap();
        ShufflePlan::from_assignment(assignment, alpha, RankDistance::KendallTau).unwrap()
    }

    #[test]
    fn high_dispersion_preserves_everything() {
        let plan = contiguous_block_plan(40, 4, 5000.0);
        let subset: Vec<usize> = (10..20).collect();
        let report = estimate_preservation(&plan, &subset, 1.0, 0.01, 200, 9).unwrap();
        assert_eq!(report.delta, 0.0);
        assert_eq!(report.eta_at_delta, Some(1.0));
    }

    #[test]
    fn uniform_shuffle_preserves_half_of_half() {
        // theta = 0 over one full group: eta at delta = 0.01 concentrates
        // near |S| / n = 0.5.
        let n = 1000;
        let assignment = GroupAssignment::from_groups(
            vec![(0..n).collect::<Vec<_>>(); n],
            f64::INFINITY,
            Metric::Euclidean,
        )
        .unwrap();
        let plan =
            ShufflePlan::from_assignment(assignment, 0.0, RankDistance::KendallTau).unwrap();
        let subset: Vec<usize> = (0..n / 2).collect();
        let report = estimate_preservation(&plan, &subset, 0.5, 0.01, 400, 11).unwrap();
        let eta = report.eta_at_delta.unwrap();
        assert!((eta - 0.5).abs() <= 0.05, "eta at 1% was {eta}");
    }

    #[test]
    fn preservation_declines_with_width() {
        // Same budget, growing width: the middle subset keeps less.
        let n = 200;
        let subset: Vec<usize> = (75..125).collect();
        let mut last = f64::INFINITY;
        for block in [4usize, 10, 25] {
            let plan = contiguous_block_plan(n, block, 3.0);
            let report = estimate_preservation(&plan, &subset, 0.9, 0.01, 300, 21).unwrap();
            let eta = report.eta_at_delta.unwrap();
            assert!(
                eta <= last + 0.02,
                "eta should not grow with width: block {block} gave {eta}, previous {last}"
            );
            last = eta;
        }
    }
}
