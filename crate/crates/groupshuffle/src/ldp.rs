//! Local randomizers: k-ary randomized response, its channel matrix, the
//! tightness audit, and the standard debiasing helper for frequency
//! estimates.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Randomized-response configuration over `k` categories.
#[derive(Debug, Clone, Copy)]
pub struct RandomizerConfig {
    pub epsilon: f64,
    pub domain_size: usize,
}

impl RandomizerConfig {
    pub fn new(epsilon: f64, domain_size: usize) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be finite and positive, got {epsilon}"
            )));
        }
        if domain_size < 2 {
            return Err(Error::InvalidParameter(format!(
                "domain size must be at least 2, got {domain_size}"
            )));
        }
        Ok(Self {
            epsilon,
            domain_size,
        })
    }

    /// Probability of reporting the true category: `e^eps / (e^eps + k - 1)`.
    pub fn keep_probability(&self) -> f64 {
        let e = self.epsilon.exp();
        e / (e + self.domain_size as f64 - 1.0)
    }

    /// Probability of reporting one specific other category.
    pub fn flip_probability(&self) -> f64 {
        let e = self.epsilon.exp();
        1.0 / (e + self.domain_size as f64 - 1.0)
    }

    /// Row-stochastic channel matrix: `channel[x][y] = P(report y | true x)`.
    pub fn channel(&self) -> Vec<Vec<f64>> {
        let k = self.domain_size;
        let keep = self.keep_probability();
        let flip = self.flip_probability();
        (0..k)
            .map(|x| (0..k).map(|y| if x == y { keep } else { flip }).collect())
            .collect()
    }
}

/// Randomize one category.
pub fn randomize(cfg: &RandomizerConfig, x: usize, rng: &mut ChaCha8Rng) -> Result<usize> {
    let k = cfg.domain_size;
    if x >= k {
        return Err(Error::InvalidParameter(format!(
            "category {x} out of domain [0, {k})"
        )));
    }
    if rng.random::<f64>() < cfg.keep_probability() {
        Ok(x)
    } else {
        // Uniform over the other k - 1 categories.
        let draw = rng.random_range(0..k - 1);
        Ok(if draw >= x { draw + 1 } else { draw })
    }
}

/// Randomize a whole sequence.
pub fn randomize_all(cfg: &RandomizerConfig, xs: &[usize], rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    xs.iter().map(|&x| randomize(cfg, x, rng)).collect()
}

/// Largest log-ratio over all input pairs and outputs of the closed-form
/// channel. Randomized response is tight, so this equals epsilon.
pub fn ldp_ratio_audit(cfg: &RandomizerConfig) -> f64 {
    let channel = cfg.channel();
    let k = cfg.domain_size;
    let mut max_ratio = f64::NEG_INFINITY;
    for x in 0..k {
        for x2 in 0..k {
            for (y, &p) in channel[x].iter().enumerate() {
                let ratio = p.ln() - channel[x2][y].ln();
                max_ratio = max_ratio.max(ratio);
            }
        }
    }
    max_ratio
}

/// Invert the randomized-response channel on observed frequencies:
/// `estimate[v] = (observed[v] - flip) / (keep - flip)`. Estimates are
/// clamped at zero and renormalized.
pub fn debias_frequencies(cfg: &RandomizerConfig, observed: &[f64]) -> Result<Vec<f64>> {
    if observed.len() != cfg.domain_size {
        return Err(Error::DimensionMismatch {
            expected: cfg.domain_size,
            got: observed.len(),
        });
    }
    let keep = cfg.keep_probability();
    let flip = cfg.flip_probability();
    let mut est: Vec<f64> = observed
        .iter()
        .map(|&o| ((o - flip) / (keep - flip)).max(0.0))
        .collect();
    let total: f64 = est.iter().sum();
    if total > 0.0 {
        for v in &mut est {
            *v /= total;
        }
    } else {
        let uniform = 1.0 / cfg.domain_size as f64;
        est.iter_mut().for_each(|v| *v = uniform);
    }
    Ok(est)
}
