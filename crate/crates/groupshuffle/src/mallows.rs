//! Mallows model over permutations: exact log-probabilities, normalizers,
//! and an exact O(n^2) sampler for the Kendall's-tau distance built on
//! repeated insertion.
//!
//! The insertion sampler places item `i` (0-based, inserted in increasing
//! label order) at slot `j` of the current prefix with probability
//! proportional to `exp(-theta * (i - j))`; the `i - j` items displaced to
//! the right of the new item are exactly the inversions it contributes, so
//! the finished draw has probability `exp(-theta * inversions) / psi`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::groups::RankDistance;
use crate::perm::{enumerate_permutations, Permutation};

/// Largest n for which the Hamming normalizer is offered here.
pub const MAX_HAMMING_LOGPROB_N: usize = 8;

/// Parameters of a Mallows distribution.
#[derive(Debug, Clone)]
pub struct MallowsParams {
    pub theta: f64,
    pub sigma0: Permutation,
    pub rank_distance: RankDistance,
}

impl MallowsParams {
    pub fn new(theta: f64, sigma0: Permutation, rank_distance: RankDistance) -> Result<Self> {
        if theta.is_nan() || theta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dispersion must be >= 0, got {theta}"
            )));
        }
        Ok(Self {
            theta,
            sigma0,
            rank_distance,
        })
    }

    pub fn len(&self) -> usize {
        self.sigma0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma0.is_empty()
    }
}

/// ln of the Kendall's-tau normalizer: psi = prod_{i=1..n} (1 - e^{-i theta}) / (1 - e^{-theta}).
pub fn kendall_log_normalizer(theta: f64, n: usize) -> f64 {
    if theta == 0.0 {
        return (1..=n).map(|i| (i as f64).ln()).sum();
    }
    let log_denom = (-(-theta).exp_m1()).ln();
    (1..=n)
        .map(|i| (-(-theta * i as f64).exp_m1()).ln() - log_denom)
        .sum()
}

/// ln of the Hamming normalizer, from the count of permutations at each
/// distance: psi = sum_h C(n, h) * derangements(h) * e^{-theta h}.
pub fn hamming_log_normalizer(theta: f64, n: usize) -> Result<f64> {
    if n > MAX_HAMMING_LOGPROB_N {
        return Err(Error::UnsupportedScale {
            what: "Hamming-distance Mallows normalizer",
            limit: MAX_HAMMING_LOGPROB_N,
            got: n,
        });
    }
    let mut psi = 0.0f64;
    for h in 0..=n {
        let count = binomial_u128(n, h) * derangements_u128(h);
        psi += count as f64 * (-theta * h as f64).exp();
    }
    Ok(psi.ln())
}

fn binomial_u128(n: usize, k: usize) -> u128 {
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

fn derangements_u128(n: usize) -> u128 {
    match n {
        0 => 1,
        1 => 0,
        _ => {
            let (mut prev2, mut prev1) = (1u128, 0u128);
            for i in 2..=n {
                let current = (i as u128 - 1) * (prev1 + prev2);
                prev2 = prev1;
                prev1 = current;
            }
            prev1
        }
    }
}

/// Exact log-probability of `sigma` under the model.
pub fn log_prob(params: &MallowsParams, sigma: &Permutation) -> Result<f64> {
    let n = params.len();
    if sigma.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: sigma.len(),
        });
    }
    let (distance, log_psi) = match params.rank_distance {
        RankDistance::KendallTau => (
            sigma.kendall_tau(&params.sigma0)? as f64,
            kendall_log_normalizer(params.theta, n),
        ),
        RankDistance::Hamming => (
            sigma.hamming(&params.sigma0)? as f64,
            hamming_log_normalizer(params.theta, n)?,
        ),
    };
    Ok(-params.theta * distance - log_psi)
}

/// Precomputed insertion weights: row `i` (0-based) has `i + 1` slots and
/// sums to one. Shared read-only across draws.
#[derive(Debug, Clone)]
pub struct InsertionTable {
    /// cumulative[i][j] = P(slot <= j) at insertion step i.
    cumulative: Vec<Vec<f64>>,
}

impl InsertionTable {
    pub fn new(theta: f64, n: usize) -> Result<Self> {
        if theta.is_nan() || theta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dispersion must be >= 0, got {theta}"
            )));
        }
        if n == 0 {
            return Err(Error::EmptyPermutation);
        }
        let mut cumulative = Vec::with_capacity(n);
        for i in 0..n {
            let slots = i + 1;
            let mut row = Vec::with_capacity(slots);
            let mut acc = 0.0f64;
            for j in 0..slots {
                acc += (-theta * (i - j) as f64).exp();
                row.push(acc);
            }
            let total = acc;
            for v in &mut row {
                *v /= total;
            }
            cumulative.push(row);
        }
        Ok(Self { cumulative })
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    /// Normalized weight row for insertion step `i` (0-based).
    pub fn row(&self, i: usize) -> Vec<f64> {
        let cum = &self.cumulative[i];
        let mut prev = 0.0;
        cum.iter()
            .map(|&c| {
                let p = c - prev;
                prev = c;
                p
            })
            .collect()
    }

    /// One identity-referenced draw: probability `exp(-theta * inversions) / psi`.
    pub fn sample_identity(&self, rng: &mut ChaCha8Rng) -> Permutation {
        let n = self.cumulative.len();
        let mut order: Vec<usize> = Vec::with_capacity(n);
        for i in 0..n {
            let u: f64 = rng.random();
            let row = &self.cumulative[i];
            let slot = match row.iter().position(|&c| u < c) {
                Some(s) => s,
                None => i,
            };
            order.insert(slot, i);
        }
        Permutation::from_mapping(order).expect("insertion builds a bijection")
    }
}

/// Table of per-step insertion weights (row `i` has `i + 1` entries).
pub fn insertion_probabilities(theta: f64, n: usize) -> Result<Vec<Vec<f64>>> {
    let table = InsertionTable::new(theta, n)?;
    Ok((0..n).map(|i| table.row(i)).collect())
}

/// An identity-referenced Kendall's-tau Mallows draw.
pub fn sample_identity(theta: f64, n: usize, rng: &mut ChaCha8Rng) -> Result<Permutation> {
    Ok(InsertionTable::new(theta, n)?.sample_identity(rng))
}

/// One draw from the model. Exact for Kendall's tau: an identity-referenced
/// insertion draw `rho` is turned into `sigma` with
/// `sigma(k) = rho(sigma0(k))`, which preserves the distance
/// (`d(sigma, sigma0) = inversions(rho)`). Hamming sampling is unsupported.
pub fn sample(params: &MallowsParams, rng: &mut ChaCha8Rng) -> Result<Permutation> {
    sample_with_table(params, &InsertionTable::new(params.theta, params.len())?, rng)
}

/// Same as [`sample`] with a caller-cached insertion table.
pub fn sample_with_table(
    params: &MallowsParams,
    table: &InsertionTable,
    rng: &mut ChaCha8Rng,
) -> Result<Permutation> {
    if params.rank_distance != RankDistance::KendallTau {
        return Err(Error::InvalidParameter(
            "exact sampling is only available for the Kendall's-tau distance".into(),
        ));
    }
    if table.len() != params.len() {
        return Err(Error::DimensionMismatch {
            expected: params.len(),
            got: table.len(),
        });
    }
    let rho = table.sample_identity(rng);
    params.sigma0.compose(&rho)
}

/// Exact pmf over all of S_n by enumeration (test oracle, n <= 10).
pub fn enumerate_pmf(params: &MallowsParams) -> Result<Vec<(Permutation, f64)>> {
    let n = params.len();
    let mut entries = Vec::new();
    let mut total = 0.0;
    for sigma in enumerate_permutations(n)? {
        let d = match params.rank_distance {
            RankDistance::KendallTau => sigma.kendall_tau(&params.sigma0)? as f64,
            RankDistance::Hamming => sigma.hamming(&params.sigma0)? as f64,
        };
        let w = (-params.theta * d).exp();
        total += w;
        entries.push((sigma, w));
    }
    for (_, w) in &mut entries {
        *w /= total;
    }
    Ok(entries)
}
