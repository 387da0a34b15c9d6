//! Inference-attack and learnability harness.
//!
//! The attack predicts each record's private category by a plurality vote
//! over the released values at the positions of nearby records (by public
//! auxiliary distance, refined by privileged information when present). A
//! record is vulnerable when the attack succeeds in at least a threshold
//! fraction of independent randomization trials; the released permutation is
//! drawn once and reused across trials.
//!
//! Learnability scores how well a local estimator trained on the released
//! sequence predicts the true local category distribution, normalized by the
//! error of guessing uniformly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::groups::{compute_groups, AuxInfo, Metric, ShufflePlan};
use crate::ldp::{debias_frequencies, randomize_all, RandomizerConfig};
use crate::mechanism::draw_sigma_star;
use crate::seeds;

/// Attack protocol parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackConfig {
    pub k_neighbors: usize,
    pub trials: usize,
    pub success_threshold: f64,
    pub epsilon: f64,
    /// Radius of the candidate neighborhood in auxiliary distance.
    pub r_star: f64,
}

impl AttackConfig {
    pub fn new(r_star: f64) -> Self {
        AttackConfig {
            k_neighbors: 25,
            trials: 50,
            success_threshold: 0.9,
            epsilon: 2.5,
            r_star,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k_neighbors == 0 {
            return Err(Error::InvalidParameter("need at least one neighbor".into()));
        }
        if !(0.0 < self.success_threshold && self.success_threshold <= 1.0) {
            return Err(Error::InvalidParameter(
                "success threshold must lie in (0, 1]".into(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("need at least one trial".into()));
        }
        Ok(())
    }
}

/// Attack outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackReport {
    /// Fraction of records whose success rate reached the threshold.
    pub rho: f64,
    pub per_record_success: Vec<f64>,
    /// Fraction of votes that ended in a tie (broken toward the smaller
    /// category index).
    pub tie_frequency: f64,
    /// Records with fewer candidates than requested neighbors; the vote used
    /// everyone available.
    pub short_candidate_records: usize,
    /// All true categories identical: success is trivial, interpret rho
    /// accordingly.
    pub degenerate_ground_truth: bool,
    pub config: AttackConfig,
    pub seed: u64,
    pub plan_digest: String,
}

fn auto_metric(aux: &AuxInfo) -> Metric {
    match aux {
        AuxInfo::Points(_) => Metric::Euclidean,
        AuxInfo::Graph(_) => Metric::PathLength,
    }
}

/// Plurality vote with ties broken toward the smaller category. Returns the
/// prediction and whether a tie occurred.
pub(crate) fn plurality(counts: &[u32]) -> (usize, bool) {
    let mut best = 0usize;
    let mut best_count = counts[0];
    let mut tied = false;
    for (v, &c) in counts.iter().enumerate().skip(1) {
        if c > best_count {
            best = v;
            best_count = c;
            tied = false;
        } else if c == best_count {
            tied = true;
        }
    }
    (best, tied)
}

/// One trial's predictions for every record given the released sequence.
pub(crate) fn majority_predictions(
    z: &[usize],
    voters: &[Vec<usize>],
    arity: usize,
) -> (Vec<usize>, usize) {
    let mut ties = 0usize;
    let predictions = voters
        .iter()
        .map(|vs| {
            let mut counts = vec![0u32; arity];
            for &j in vs {
                counts[z[j]] += 1;
            }
            let (pred, tied) = plurality(&counts);
            if tied {
                ties += 1;
            }
            pred
        })
        .collect();
    (predictions, ties)
}

/// Candidate neighborhoods within `r_star`, excluding the record itself.
fn candidate_sets(aux: &AuxInfo, r_star: f64) -> Result<Vec<Vec<usize>>> {
    let assignment = compute_groups(aux, r_star, auto_metric(aux))?;
    Ok(assignment
        .groups()
        .iter()
        .enumerate()
        .map(|(i, g)| g.iter().copied().filter(|&j| j != i).collect())
        .collect())
}

/// Fix each record's voters: the `k` candidates most similar in privileged
/// information, or a seeded draw without replacement when none is available.
fn select_voters(
    dataset: &Dataset,
    candidates: &[Vec<usize>],
    k: usize,
    seed: u64,
) -> Vec<Vec<usize>> {
    candidates
        .iter()
        .enumerate()
        .map(|(i, cands)| {
            if cands.len() <= k {
                return cands.clone();
            }
            match &dataset.privileged {
                Some(tp) => {
                    let mut ranked = cands.clone();
                    ranked.sort_by(|&a, &b| {
                        let da = (tp[a] - tp[i]).abs();
                        let db = (tp[b] - tp[i]).abs();
                        da.partial_cmp(&db).unwrap().then(a.cmp(&b))
                    });
                    ranked.truncate(k);
                    ranked
                }
                None => {
                    use rand::Rng;
                    let mut rng = seeds::rng_indexed(seed, "attack-voters", i as u64);
                    let mut pool = cands.clone();
                    // partial Fisher-Yates: first k slots
                    for s in 0..k {
                        let j = rng.random_range(s..pool.len());
                        pool.swap(s, j);
                    }
                    pool.truncate(k);
                    pool
                }
            }
        })
        .collect()
}

/// Run the majority-vote attack under a plan.
pub fn run_attack(
    dataset: &Dataset,
    plan: &ShufflePlan,
    cfg: &AttackConfig,
    seed: u64,
) -> Result<AttackReport> {
    cfg.validate()?;
    dataset.validate()?;
    let n = dataset.len();
    if plan.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: plan.len(),
        });
    }
    let rr = RandomizerConfig::new(cfg.epsilon, dataset.label_arity)?;
    let candidates = candidate_sets(&dataset.aux, cfg.r_star)?;
    let short_candidate_records = candidates
        .iter()
        .filter(|c| c.len() < cfg.k_neighbors)
        .count();
    let voters = select_voters(dataset, &candidates, cfg.k_neighbors, seed);

    // One mechanism draw per experiment, reused across randomization trials.
    let sigma_star = draw_sigma_star(plan, seeds::derive(seed, "attack-mechanism"))?;

    let per_trial: Vec<(Vec<bool>, usize)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeds::rng_indexed(seed, "attack-ldp", t as u64);
            let y = randomize_all(&rr, &dataset.x, &mut rng)?;
            let z = sigma_star.apply(&y)?;
            let (predictions, ties) = majority_predictions(&z, &voters, dataset.label_arity);
            let correct = predictions
                .iter()
                .zip(&dataset.x)
                .map(|(p, x)| p == x)
                .collect();
            Ok((correct, ties))
        })
        .collect::<Result<_>>()?;

    let mut successes = vec![0usize; n];
    let mut ties = 0usize;
    for (correct, trial_ties) in &per_trial {
        ties += trial_ties;
        for (i, &c) in correct.iter().enumerate() {
            if c {
                successes[i] += 1;
            }
        }
    }
    let per_record_success: Vec<f64> = successes
        .iter()
        .map(|&s| s as f64 / cfg.trials as f64)
        .collect();
    let rho = per_record_success
        .iter()
        .filter(|&&s| s >= cfg.success_threshold - 1e-12)
        .count() as f64
        / n as f64;
    let first = dataset.x[0];
    Ok(AttackReport {
        rho,
        per_record_success,
        tie_frequency: ties as f64 / (cfg.trials * n) as f64,
        short_candidate_records,
        degenerate_ground_truth: dataset.x.iter().all(|&v| v == first),
        config: cfg.clone(),
        seed,
        plan_digest: plan.digest(),
    })
}

/// Maps a neighborhood of released values to a distribution over categories.
pub trait DistributionEstimator: Sync {
    fn predict(&self, neighborhood: &[usize], z: &[usize], arity: usize) -> Vec<f64>;
}

/// Histogram of released values in the neighborhood, inverted through the
/// randomizer channel.
pub struct DebiasedBallHistogram {
    pub epsilon: f64,
}

impl DistributionEstimator for DebiasedBallHistogram {
    fn predict(&self, neighborhood: &[usize], z: &[usize], arity: usize) -> Vec<f64> {
        histogram_estimate(self.epsilon, neighborhood.iter().map(|&j| z[j]), arity)
    }
}

/// Debiased histogram over the whole release, ignoring locality. The natural
/// baseline for fully shuffled data.
pub struct GlobalHistogram {
    pub epsilon: f64,
}

impl DistributionEstimator for GlobalHistogram {
    fn predict(&self, _neighborhood: &[usize], z: &[usize], arity: usize) -> Vec<f64> {
        histogram_estimate(self.epsilon, z.iter().copied(), arity)
    }
}

fn histogram_estimate(
    epsilon: f64,
    values: impl Iterator<Item = usize>,
    arity: usize,
) -> Vec<f64> {
    let mut counts = vec![0.0f64; arity];
    let mut total = 0.0;
    for v in values {
        counts[v] += 1.0;
        total += 1.0;
    }
    if total == 0.0 {
        return vec![1.0 / arity as f64; arity];
    }
    for c in &mut counts {
        *c /= total;
    }
    match RandomizerConfig::new(epsilon, arity).and_then(|cfg| debias_frequencies(&cfg, &counts)) {
        Ok(est) => est,
        Err(_) => counts,
    }
}

/// Learnability outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LearnabilityReport {
    /// Mean total-variation error of the estimator, normalized by the error
    /// of guessing the uniform distribution everywhere.
    pub lambda: f64,
    pub per_point_tv: Vec<f64>,
    pub mean_tv: f64,
    pub baseline_tv: f64,
    pub skipped_points: usize,
    pub seed: u64,
    pub plan_digest: String,
}

fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
}

/// Score a local estimator against ground-truth local distributions.
pub fn run_learnability(
    dataset: &Dataset,
    plan: &ShufflePlan,
    r_star: f64,
    epsilon: f64,
    estimator: &dyn DistributionEstimator,
    seed: u64,
) -> Result<LearnabilityReport> {
    dataset.validate()?;
    let n = dataset.len();
    if plan.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: plan.len(),
        });
    }
    let arity = dataset.label_arity;
    let rr = RandomizerConfig::new(epsilon, arity)?;
    let assignment = compute_groups(&dataset.aux, r_star, auto_metric(&dataset.aux))?;
    let balls = assignment.groups();

    let sigma_star = draw_sigma_star(plan, seeds::derive(seed, "learn-mechanism"))?;
    let mut rng = seeds::rng(seed, "learn-ldp");
    let y = randomize_all(&rr, &dataset.x, &mut rng)?;
    let z = sigma_star.apply(&y)?;

    let uniform = vec![1.0 / arity as f64; arity];
    let mut per_point_tv = Vec::with_capacity(n);
    let mut baseline_sum = 0.0;
    let mut skipped = 0usize;
    for (i, ball) in balls.iter().enumerate() {
        if ball.is_empty() {
            skipped += 1;
            continue;
        }
        let mut truth = vec![0.0f64; arity];
        for &j in ball {
            truth[dataset.x[j]] += 1.0;
        }
        let total: f64 = truth.iter().sum();
        truth.iter_mut().for_each(|v| *v /= total);

        let predicted = estimator.predict(ball, &z, arity);
        per_point_tv.push(total_variation(&predicted, &truth));
        baseline_sum += total_variation(&uniform, &truth);
        let _ = i;
    }
    if per_point_tv.is_empty() {
        return Err(Error::InvalidParameter(
            "every neighborhood was empty; increase the radius".into(),
        ));
    }
    let mean_tv = per_point_tv.iter().sum::<f64>() / per_point_tv.len() as f64;
    let baseline_tv = baseline_sum / per_point_tv.len() as f64;
    let lambda = if baseline_tv > 1e-12 {
        mean_tv / baseline_tv
    } else if mean_tv <= 1e-12 {
        1.0
    } else {
        f64::INFINITY
    };
    Ok(LearnabilityReport {
        lambda,
        per_point_tv,
        mean_tv,
        baseline_tv,
        skipped_points: skipped,
        seed,
        plan_digest: plan.digest(),
    })
}

/// One sweep cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    pub alpha: f64,
    pub rho: f64,
    pub lambda: f64,
    pub omega: usize,
    pub delta_sensitivity: f64,
    pub seed: u64,
}

pub fn sweep_csv_header() -> &'static str {
    "r,alpha,rho,lambda,omega,delta_sensitivity,seed"
}

impl SweepRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.r, self.alpha, self.rho, self.lambda, self.omega, self.delta_sensitivity, self.seed
        )
    }
}

/// Grid evaluation over radii and budgets. Each cell runs the attack and the
/// learnability protocol with the same seed a direct call would use, so a
/// one-cell sweep reproduces the direct outputs exactly.
pub fn sweep(
    dataset: &Dataset,
    radii: &[f64],
    alphas: &[f64],
    cfg: &AttackConfig,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if radii.is_empty() || alphas.is_empty() {
        return Err(Error::InvalidParameter("sweep grids must be nonempty".into()));
    }
    let mut rows = Vec::with_capacity(radii.len() * alphas.len());
    for &r in radii {
        for &alpha in alphas {
            let plan = ShufflePlan::build(
                &dataset.aux,
                r,
                alpha,
                auto_metric(&dataset.aux),
                crate::groups::RankDistance::KendallTau,
            )?;
            let attack = run_attack(dataset, &plan, cfg, seed)?;
            let estimator = DebiasedBallHistogram {
                epsilon: cfg.epsilon,
            };
            let learn =
                run_learnability(dataset, &plan, cfg.r_star, cfg.epsilon, &estimator, seed)?;
            rows.push(SweepRow {
                r,
                alpha,
                rho: attack.rho,
                lambda: learn.lambda,
                omega: plan.width(),
                delta_sensitivity: plan.sensitivity(),
                seed,
            });
        }
    }
    Ok(rows)
}
