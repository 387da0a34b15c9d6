//! Exhaustive small-n privacy audits.
//!
//! Everything here enumerates: the neighbor relation over orderings, the
//! mechanism's exact output law, the strong-adversary posterior gap, joint
//! releases, and the raw randomized-response channel. No sampling, so every
//! pass/fail decision is reproducible bit for bit.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{group_supported_permutations, GroupAssignment, RankDistance, ShufflePlan};
use crate::ldp::RandomizerConfig;
use crate::mallows::kendall_log_normalizer;
use crate::mechanism::shuffle_with_fixed_draw;
use crate::perm::{enumerate_permutations, Permutation};

/// Slack on log-ratio comparisons; all quantities are assembled from exact
/// inversion counts, so this only absorbs double-precision arithmetic.
pub const AUDIT_TOLERANCE: f64 = 1e-9;

/// Largest n the pairwise audits accept (n! squared pairs).
pub const MAX_AUDIT_N: usize = 6;

/// Largest n the semantic and composition audits accept.
pub const MAX_JOINT_AUDIT_N: usize = 5;

const ORIENTATION_NOTE: &str = "sensitivity orientation: within-group rearrangements are scored \
in the reference frame (inversions of sigma0 . rearrangement . sigma0^-1), the reading under \
which the width bound holds exhaustively";

/// Outcome of an exhaustive log-ratio audit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditReport {
    pub n: usize,
    pub alpha_claimed: f64,
    pub max_log_ratio_observed: f64,
    pub witness: Option<AuditWitness>,
    pub neighbor_pairs_checked: usize,
    pub pass: bool,
    pub orientation_note: String,
}

/// The configuration achieving the observed maximum (1-based notation).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditWitness {
    pub sigma: String,
    pub sigma_prime: String,
    pub output: String,
}

impl AuditReport {
    fn new(n: usize, alpha: f64, max_ratio: f64, witness: Option<AuditWitness>, pairs: usize) -> Self {
        AuditReport {
            n,
            alpha_claimed: alpha,
            max_log_ratio_observed: max_ratio,
            witness,
            neighbor_pairs_checked: pairs,
            pass: max_ratio <= alpha + AUDIT_TOLERANCE,
            orientation_note: ORIENTATION_NOTE.to_string(),
        }
    }
}

/// All ordered pairs of orderings that agree outside some group. Includes
/// the diagonal pairs. Deduplicated and deterministically ordered.
pub fn neighboring_pairs(
    assignment: &GroupAssignment,
) -> Result<Vec<(Permutation, Permutation)>> {
    let n = assignment.len();
    if n > MAX_AUDIT_N {
        return Err(Error::UnsupportedScale {
            what: "neighboring-pair enumeration",
            limit: MAX_AUDIT_N,
            got: n,
        });
    }
    let mut pairs: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for sigma in enumerate_permutations(n)? {
        for g in assignment.groups() {
            for rearrangement in group_supported_permutations(n, g)? {
                // sigma2(k) = sigma(rearrangement(k)): values at the group's
                // positions permuted among themselves, all else untouched.
                let sigma2 = rearrangement.compose(&sigma)?;
                pairs.push((sigma.mapping().to_vec(), sigma2.mapping().to_vec()));
            }
        }
    }
    pairs.sort();
    pairs.dedup();
    pairs
        .into_iter()
        .map(|(a, b)| Ok((Permutation::from_mapping(a)?, Permutation::from_mapping(b)?)))
        .collect()
}

/// Index for fast lookup of enumerated permutations.
struct PermIndex {
    perms: Vec<Permutation>,
    by_mapping: HashMap<Vec<usize>, usize>,
}

impl PermIndex {
    fn new(n: usize) -> Result<Self> {
        let perms: Vec<Permutation> = enumerate_permutations(n)?.collect();
        let by_mapping = perms
            .iter()
            .enumerate()
            .map(|(i, p)| (p.mapping().to_vec(), i))
            .collect();
        Ok(Self { perms, by_mapping })
    }

    fn index_of(&self, p: &Permutation) -> usize {
        self.by_mapping[p.mapping()]
    }
}

/// Exact output law of the mechanism run on `apply(input_perm, sentinels)`.
/// Distinct sentinel values make every output sequence identify the overall
/// permutation, so the law is a pmf over `S_n`.
pub fn mechanism_output_dist(
    plan: &ShufflePlan,
    input_perm: &Permutation,
) -> Result<Vec<(Permutation, f64)>> {
    let n = plan.len();
    if n > MAX_AUDIT_N {
        return Err(Error::UnsupportedScale {
            what: "mechanism output enumeration",
            limit: MAX_AUDIT_N,
            got: n,
        });
    }
    if input_perm.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: input_perm.len(),
        });
    }
    let sentinels: Vec<usize> = (0..n).collect();
    let w = input_perm.apply(&sentinels)?;
    if plan.is_identity_shuffle() {
        return Ok(vec![(input_perm.clone(), 1.0)]);
    }
    if plan.rank_distance() != RankDistance::KendallTau {
        return Err(Error::InvalidParameter(
            "output-law enumeration requires the Kendall's-tau distance".into(),
        ));
    }
    let log_psi = kendall_log_normalizer(plan.theta(), n);
    let mut out = Vec::with_capacity(1);
    let mut acc: HashMap<Vec<usize>, f64> = HashMap::new();
    for rho in enumerate_permutations(n)? {
        let p = (-plan.theta() * rho.inversions() as f64 - log_psi).exp();
        let sigma_hat = rho.compose(plan.sigma0())?;
        let outcome = shuffle_with_fixed_draw(plan, &w, &sigma_hat)?;
        *acc.entry(outcome.z).or_insert(0.0) += p;
    }
    for (mapping, p) in acc {
        out.push((Permutation::from_mapping(mapping)?, p));
    }
    out.sort_by(|a, b| a.0.mapping().cmp(b.0.mapping()));
    Ok(out)
}

/// Per-input table of output log-probabilities, indexed by the shared
/// permutation enumeration.
fn output_log_table(plan: &ShufflePlan, index: &PermIndex) -> Result<Vec<Vec<f64>>> {
    let count = index.perms.len();
    let mut table = vec![vec![f64::NEG_INFINITY; count]; count];
    for (i, input) in index.perms.iter().enumerate() {
        for (tau, p) in mechanism_output_dist(plan, input)? {
            table[i][index.index_of(&tau)] = p.ln();
        }
    }
    Ok(table)
}

/// Exhaustive check of the order-privacy guarantee for one plan: the largest
/// log-likelihood ratio over all neighboring orderings and all outputs must
/// stay within the plan's budget.
pub fn audit_dsigma(plan: &ShufflePlan) -> Result<AuditReport> {
    let n = plan.len();
    let index = PermIndex::new(n)?;
    let table = output_log_table(plan, &index)?;
    let pairs = neighboring_pairs(plan.assignment())?;

    let mut max_ratio = f64::NEG_INFINITY;
    let mut witness = None;
    for (sigma, sigma_prime) in &pairs {
        let row_a = &table[index.index_of(sigma)];
        let row_b = &table[index.index_of(sigma_prime)];
        for (t, (&la, &lb)) in row_a.iter().zip(row_b.iter()).enumerate() {
            if la == f64::NEG_INFINITY && lb == f64::NEG_INFINITY {
                continue;
            }
            let ratio = if la == f64::NEG_INFINITY {
                continue; // numerator zero bounds nothing
            } else if lb == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                la - lb
            };
            if ratio > max_ratio {
                max_ratio = ratio;
                witness = Some(AuditWitness {
                    sigma: sigma.to_string(),
                    sigma_prime: sigma_prime.to_string(),
                    output: index.perms[t].to_string(),
                });
            }
        }
    }
    let max_ratio = if max_ratio == f64::NEG_INFINITY { 0.0 } else { max_ratio };
    Ok(AuditReport::new(n, plan.alpha(), max_ratio, witness, pairs.len()))
}

/// Joint release of two independent mechanism runs on the same grouping:
/// the budgets add. Refuses plans over different groupings.
pub fn audit_composition(plan_a: &ShufflePlan, plan_b: &ShufflePlan) -> Result<AuditReport> {
    if plan_a.assignment() != plan_b.assignment() {
        return Err(Error::MixedGroupingComposition);
    }
    let n = plan_a.len();
    if n > MAX_JOINT_AUDIT_N {
        return Err(Error::UnsupportedScale {
            what: "composition audit",
            limit: MAX_JOINT_AUDIT_N,
            got: n,
        });
    }
    let index = PermIndex::new(n)?;
    let table_a = output_log_table(plan_a, &index)?;
    let table_b = output_log_table(plan_b, &index)?;
    let pairs = neighboring_pairs(plan_a.assignment())?;

    // The joint law is a product, so the worst pair of outputs decomposes
    // into the worst output per mechanism.
    let mut max_ratio = f64::NEG_INFINITY;
    let mut witness = None;
    for (sigma, sigma_prime) in &pairs {
        let ia = index.index_of(sigma);
        let ib = index.index_of(sigma_prime);
        let best = |table: &Vec<Vec<f64>>| -> (f64, usize) {
            let mut best_ratio = f64::NEG_INFINITY;
            let mut best_t = 0;
            for (t, (&la, &lb)) in table[ia].iter().zip(table[ib].iter()).enumerate() {
                if la == f64::NEG_INFINITY {
                    continue;
                }
                let r = if lb == f64::NEG_INFINITY {
                    f64::INFINITY
                } else {
                    la - lb
                };
                if r > best_ratio {
                    best_ratio = r;
                    best_t = t;
                }
            }
            (best_ratio, best_t)
        };
        let (ra, ta) = best(&table_a);
        let (rb, tb) = best(&table_b);
        let joint = ra + rb;
        if joint > max_ratio {
            max_ratio = joint;
            witness = Some(AuditWitness {
                sigma: sigma.to_string(),
                sigma_prime: sigma_prime.to_string(),
                output: format!(
                    "({}, {})",
                    index.perms[ta],
                    index.perms[tb]
                ),
            });
        }
    }
    let alpha = plan_a.alpha() + plan_b.alpha();
    Ok(AuditReport::new(n, alpha, max_ratio, witness, pairs.len()))
}

/// Adversary prior for the strong-adversary audit: for each value of the
/// target record's private input, an explicit pmf over binary noisy
/// sequences (indexed by bitmask, bit j = record j's value).
#[derive(Debug, Clone)]
pub struct SemanticPrior {
    per_value: [Vec<f64>; 2],
}

impl SemanticPrior {
    pub fn new(given_zero: Vec<f64>, given_one: Vec<f64>) -> Result<Self> {
        for table in [&given_zero, &given_one] {
            if table.is_empty() || !table.len().is_power_of_two() {
                return Err(Error::InvalidParameter(
                    "prior table length must be 2^n".into(),
                ));
            }
            let total: f64 = table.iter().sum();
            if (total - 1.0).abs() > 1e-9 || table.iter().any(|&p| p < 0.0) {
                return Err(Error::InvalidParameter(
                    "prior tables must be normalized pmfs".into(),
                ));
            }
        }
        if given_zero.len() != given_one.len() {
            return Err(Error::DimensionMismatch {
                expected: given_zero.len(),
                got: given_one.len(),
            });
        }
        Ok(Self {
            per_value: [given_zero, given_one],
        })
    }

    pub fn n(&self) -> usize {
        self.per_value[0].len().trailing_zeros() as usize
    }

    /// A prior under which the target's value carries no information about
    /// the noisy sequence: identical product tables for both values.
    pub fn product(marginal_one: &[f64]) -> Result<Self> {
        let n = marginal_one.len();
        if n == 0 || n > 20 {
            return Err(Error::InvalidParameter("need 1..=20 marginals".into()));
        }
        let size = 1usize << n;
        let mut table = vec![0.0; size];
        for (mask, slot) in table.iter_mut().enumerate() {
            let mut p = 1.0;
            for (j, &q) in marginal_one.iter().enumerate() {
                p *= if mask >> j & 1 == 1 { q } else { 1.0 - q };
            }
            *slot = p;
        }
        Self::new(table.clone(), table)
    }

    /// A correlated prior: records in `household` share the target's value and
    /// then pass through a flip channel; everyone else is an independent coin.
    pub fn household(
        n: usize,
        household: &[usize],
        flip_prob: f64,
        outside_one_prob: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&flip_prob) || !(0.0..=1.0).contains(&outside_one_prob) {
            return Err(Error::InvalidParameter("probabilities must be in [0,1]".into()));
        }
        let size = 1usize << n;
        let mut tables = [vec![0.0; size], vec![0.0; size]];
        for (a, table) in tables.iter_mut().enumerate() {
            for (mask, slot) in table.iter_mut().enumerate() {
                let mut p = 1.0;
                for j in 0..n {
                    let bit = mask >> j & 1;
                    if household.contains(&j) {
                        p *= if bit == a { 1.0 - flip_prob } else { flip_prob };
                    } else {
                        p *= if bit == 1 {
                            outside_one_prob
                        } else {
                            1.0 - outside_one_prob
                        };
                    }
                }
                *slot = p;
            }
        }
        let [zero, one] = tables;
        Self::new(zero, one)
    }

    /// Random strictly-positive tables (for randomized audits).
    pub fn random(n: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Result<Self> {
        use rand::Rng;
        let size = 1usize << n;
        let mut tables = [vec![0.0; size], vec![0.0; size]];
        for table in &mut tables {
            let mut total = 0.0;
            for slot in table.iter_mut() {
                let v: f64 = rng.random::<f64>() + 1e-3;
                *slot = v;
                total += v;
            }
            for slot in table.iter_mut() {
                *slot /= total;
            }
        }
        let [zero, one] = tables;
        Self::new(zero, one)
    }
}

/// Strong-adversary audit: the adversary knows the bag of in-group values and
/// every value outside the group, and weighs arrangements by the prior. The
/// returned gap is the largest absolute log-ratio of output likelihoods
/// between the two target values, over all contexts and outputs.
pub fn audit_semantic(plan: &ShufflePlan, prior: &SemanticPrior, group_index: usize) -> Result<f64> {
    let n = plan.len();
    if n > MAX_JOINT_AUDIT_N {
        return Err(Error::UnsupportedScale {
            what: "semantic audit",
            limit: MAX_JOINT_AUDIT_N,
            got: n,
        });
    }
    if prior.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: prior.n(),
        });
    }
    if group_index >= n {
        return Err(Error::InvalidParameter(format!(
            "group index {group_index} out of range"
        )));
    }
    let group = plan.assignment().group(group_index);
    let group_mask: usize = group.iter().map(|&j| 1usize << j).sum();
    let size = 1usize << n;

    // Exact channel: out_law[y][z] = P(output bits z | input bits y).
    let out_law = binary_output_law(plan)?;

    // Context = (count of ones inside the group, exact bits outside).
    let context_of = |y: usize| -> (u32, usize) { ((y & group_mask).count_ones(), y & !group_mask) };
    let mut contexts: HashMap<(u32, usize), Vec<usize>> = HashMap::new();
    for y in 0..size {
        contexts.entry(context_of(y)).or_default().push(y);
    }

    let mut max_gap = 0.0f64;
    for members in contexts.values() {
        let mass = |a: usize| -> f64 { members.iter().map(|&y| prior.per_value[a][y]).sum() };
        let mass_zero = mass(0);
        let mass_one = mass(1);
        if mass_zero <= 0.0 || mass_one <= 0.0 {
            continue; // context impossible under one hypothesis: no posterior defined
        }
        #[allow(clippy::needless_range_loop)] // z is the output bitmask itself
        for z in 0..size {
            let likelihood = |a: usize, total: f64| -> f64 {
                members
                    .iter()
                    .map(|&y| prior.per_value[a][y] / total * out_law[y][z])
                    .sum()
            };
            let p0 = likelihood(0, mass_zero);
            let p1 = likelihood(1, mass_one);
            if p0 == 0.0 && p1 == 0.0 {
                continue;
            }
            if p0 == 0.0 || p1 == 0.0 {
                return Ok(f64::INFINITY);
            }
            max_gap = max_gap.max((p0.ln() - p1.ln()).abs());
        }
    }
    Ok(max_gap)
}

/// Exact law of the mechanism on binary sequences: a `2^n x 2^n` matrix.
fn binary_output_law(plan: &ShufflePlan) -> Result<Vec<Vec<f64>>> {
    let n = plan.len();
    let size = 1usize << n;
    let mut law = vec![vec![0.0; size]; size];
    if plan.is_identity_shuffle() {
        for (y, row) in law.iter_mut().enumerate() {
            row[y] = 1.0;
        }
        return Ok(law);
    }
    let log_psi = kendall_log_normalizer(plan.theta(), n);
    for rho in enumerate_permutations(n)? {
        let p = (-plan.theta() * rho.inversions() as f64 - log_psi).exp();
        let sigma_hat = rho.compose(plan.sigma0())?;
        let sigma_star = plan.sigma0().inverse().compose(&sigma_hat)?;
        for (y, row) in law.iter_mut().enumerate() {
            let mut z = 0usize;
            for k in 0..n {
                if y >> sigma_star.image(k) & 1 == 1 {
                    z |= 1 << k;
                }
            }
            row[z] += p;
        }
    }
    Ok(law)
}

/// Report of the weak guarantee a raw (unshuffled) randomizer run provides.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LdpWeakReport {
    pub epsilon: f64,
    pub max_group_size: usize,
    pub bound: f64,
    pub max_log_ratio_observed: f64,
    pub pass: bool,
}

/// Exhaustively verify that an epsilon randomizer applied record-wise, with
/// no shuffling, keeps every neighboring-reordering log-ratio within
/// `max |G_i| * epsilon`.
pub fn audit_ldp_weak_dsigma(epsilon: f64, assignment: &GroupAssignment) -> Result<LdpWeakReport> {
    let n = assignment.len();
    if n > MAX_JOINT_AUDIT_N {
        return Err(Error::UnsupportedScale {
            what: "weak-guarantee audit",
            limit: MAX_JOINT_AUDIT_N,
            got: n,
        });
    }
    let cfg = RandomizerConfig::new(epsilon, 2)?;
    let l_keep = cfg.keep_probability().ln();
    let l_flip = cfg.flip_probability().ln();
    let log_chan = |out: usize, input: usize| if out == input { l_keep } else { l_flip };

    let pairs = neighboring_pairs(assignment)?;
    let size = 1usize << n;
    let mut max_ratio = 0.0f64;
    for (sigma, sigma_prime) in &pairs {
        for x in 0..size {
            let bit = |mask: usize, j: usize| mask >> j & 1;
            for out in 0..size {
                let mut lr = 0.0;
                for k in 0..n {
                    lr += log_chan(bit(out, k), bit(x, sigma.image(k)))
                        - log_chan(bit(out, k), bit(x, sigma_prime.image(k)));
                }
                max_ratio = max_ratio.max(lr);
            }
        }
    }
    let bound = assignment.max_group_size() as f64 * epsilon;
    Ok(LdpWeakReport {
        epsilon,
        max_group_size: assignment.max_group_size(),
        bound,
        max_log_ratio_observed: max_ratio,
        pass: max_ratio <= bound + AUDIT_TOLERANCE,
    })
}
