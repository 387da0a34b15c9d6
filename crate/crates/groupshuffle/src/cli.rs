//! Command-line surface: one subcommand per capability, all deterministic
//! given `--seed`.
//!
//! Exit codes: 0 on success, 2 on validation or I/O errors, 3 when the
//! `audit` subcommand finds a violation (a finding, not a crash).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::audit::{audit_dsigma, audit_ldp_weak_dsigma};
use crate::data::{self, Dataset};
use crate::error::{Error, Result};
use crate::eval::{
    run_attack, run_learnability, sweep, sweep_csv_header, AttackConfig, DebiasedBallHistogram,
    DistributionEstimator, GlobalHistogram,
};
use crate::groups::{compute_groups, AuxInfo, GroupAssignment, Metric, RankDistance, ShufflePlan};
use crate::ldp::{randomize_all, RandomizerConfig};
use crate::mechanism::shuffle;
use crate::preserve::{
    brute_force_delta_hamming, estimate_preservation, exact_delta_hamming, PreservationMethod,
    PreservationReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_AUDIT_FAILURE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, ValueEnum)]
pub enum LogLevel {
    Error,
    Warn,
    Info,
    Debug,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Euclidean,
    Manhattan,
    PathLength,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::Euclidean => Metric::Euclidean,
            MetricArg::Manhattan => Metric::Manhattan,
            MetricArg::PathLength => Metric::PathLength,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RankDistanceArg {
    Kendall,
    Hamming,
}

impl From<RankDistanceArg> for RankDistance {
    fn from(r: RankDistanceArg) -> RankDistance {
        match r {
            RankDistanceArg::Kendall => RankDistance::KendallTau,
            RankDistanceArg::Hamming => RankDistance::Hamming,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EstimatorArg {
    /// Debiased histogram over the released values near the query point.
    Ball,
    /// Debiased histogram over the whole release, ignoring locality.
    Global,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PreserveMethodArg {
    MonteCarlo,
    Exact,
    Brute,
}

#[derive(Parser, Debug)]
#[command(
    name = "groupshuffle",
    version,
    about = "Group-calibrated partial shuffling of locally randomized data: \
             plan, shuffle, audit, and evaluate"
)]
pub struct Cli {
    /// Master seed; every randomized component derives its own stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for parallel sections (default: all cores). Results
    /// do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = LogLevel::Info)]
    pub log_level: LogLevel,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate the synthetic clustered dataset (8 labels: two clusters,
    /// two interleaved crescents each, light/dark shades).
    GenSyn {
        /// Number of records (>= 8).
        #[arg(long)]
        n: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },

    /// Randomize categories with k-ary randomized response: keep the true
    /// value with probability e^eps / (e^eps + k - 1).
    Ldp {
        /// Input CSV with header id,x (a full dataset CSV also works).
        #[arg(long)]
        input: PathBuf,
        /// Output CSV (id,y).
        #[arg(long)]
        output: PathBuf,
        /// Per-record privacy parameter of the randomizer.
        #[arg(long)]
        epsilon: f64,
        /// Category count; inferred from the data when omitted.
        #[arg(long)]
        k: Option<usize>,
    },

    /// Plan and run the shuffling mechanism: group by auxiliary distance,
    /// build the reference order, sample at dispersion theta = alpha /
    /// sensitivity, and reorder the input.
    Shuffle {
        /// Values to shuffle: CSV with header id,<name>.
        #[arg(long)]
        input: PathBuf,
        /// Auxiliary info: points CSV (id,t_1,..), dataset CSV, or edge list.
        #[arg(long)]
        aux: PathBuf,
        /// Privacy budget: bound on the output's log-likelihood ratio
        /// between within-group reorderings of the input.
        #[arg(long)]
        alpha: f64,
        /// Similarity threshold: records within distance r share a group.
        #[arg(long)]
        r: f64,
        #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
        metric: MetricArg,
        #[arg(long = "rank-distance", value_enum, default_value_t = RankDistanceArg::Kendall)]
        rank_distance: RankDistanceArg,
        /// Output CSV (id,z).
        #[arg(long)]
        out: PathBuf,
        /// Also record the applied permutation in the sidecar.
        #[arg(long, default_value_t = false)]
        emit_permutation: bool,
    },

    /// Exhaustively audit a small plan: the largest log-likelihood ratio
    /// over neighboring orderings must stay within alpha. Exits 3 on
    /// violation.
    Audit {
        /// Instance size (n <= 6; pairwise enumeration is factorial).
        #[arg(long)]
        n: usize,
        /// Claimed budget to audit against.
        #[arg(long)]
        alpha: f64,
        /// Similarity threshold recorded with the grouping.
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        /// Grouping as JSON lines {"i":..,"members":[..]}; mutually
        /// exclusive with --aux.
        #[arg(long = "grouping-file")]
        grouping_file: Option<PathBuf>,
        /// Auxiliary info file to derive the grouping from.
        #[arg(long)]
        aux: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
        metric: MetricArg,
        /// Audit with this dispersion instead of alpha / sensitivity
        /// (useful to demonstrate violations).
        #[arg(long = "theta-override")]
        theta_override: Option<f64>,
        /// Also verify the unshuffled randomizer's fallback guarantee at
        /// this epsilon: bound max|G_i| * epsilon.
        #[arg(long = "ldp-epsilon")]
        ldp_epsilon: Option<f64>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Preservation analysis: probability that at least an eta fraction of
    /// a subset's positions map back into the subset.
    Preserve {
        #[arg(long, value_enum, default_value_t = PreserveMethodArg::MonteCarlo)]
        method: PreserveMethodArg,
        /// Instance size (exact/brute methods, or Monte Carlo without aux).
        #[arg(long)]
        n: Option<usize>,
        /// Dispersion of the sampling distribution (exact/brute methods).
        #[arg(long)]
        theta: Option<f64>,
        /// Preserved fraction to test.
        #[arg(long)]
        eta: f64,
        /// Failure-probability target for the inverse query.
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        /// Subset size (defaults to n / 2).
        #[arg(long = "subset-size")]
        subset_size: Option<usize>,
        /// Subset as a file of whitespace-separated 0-based indices.
        #[arg(long = "subset-file")]
        subset_file: Option<PathBuf>,
        /// Monte Carlo trials.
        #[arg(long, default_value_t = 400)]
        trials: usize,
        /// Monte Carlo plan: auxiliary info file.
        #[arg(long)]
        aux: Option<PathBuf>,
        /// Monte Carlo plan: similarity threshold.
        #[arg(long)]
        r: Option<f64>,
        /// Monte Carlo plan: privacy budget.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
        metric: MetricArg,
        /// Sweep a block-structured plan over these widths and emit CSV
        /// rows (axis,value,eta) instead of a single report.
        #[arg(long = "sweep-widths", value_delimiter = ',')]
        sweep_widths: Option<Vec<usize>>,
        /// Sweep over subset sizes.
        #[arg(long = "sweep-sizes", value_delimiter = ',')]
        sweep_sizes: Option<Vec<usize>>,
        /// Sweep over privacy budgets.
        #[arg(long = "sweep-alphas", value_delimiter = ',')]
        sweep_alphas: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Majority-vote inference attack: fraction of records recoverable from
    /// the released sequence across randomization trials.
    Attack {
        /// Dataset CSV (id,x,t_1,..[,t_p]).
        #[arg(long)]
        input: PathBuf,
        /// Graph auxiliary info as an edge list (overrides coordinates).
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        r: f64,
        /// Attack radius: candidates lie within r-star of the target.
        #[arg(long = "r-star")]
        r_star: f64,
        #[arg(long = "k-neighbors", default_value_t = 25)]
        k_neighbors: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long = "success-threshold", default_value_t = 0.9)]
        success_threshold: f64,
        #[arg(long, default_value_t = 2.5)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Learnability: normalized total-variation error of a local estimator
    /// trained on the released sequence.
    Learn {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        r: f64,
        #[arg(long = "r-star")]
        r_star: f64,
        #[arg(long, default_value_t = 2.5)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = EstimatorArg::Ball)]
        estimator: EstimatorArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Grid evaluation over similarity thresholds and budgets; emits CSV
    /// rows (r,alpha,rho,lambda,omega,delta_sensitivity,seed).
    Sweep {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        radii: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
        #[arg(long = "r-star")]
        r_star: f64,
        #[arg(long = "k-neighbors", default_value_t = 25)]
        k_neighbors: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long = "success-threshold", default_value_t = 0.9)]
        success_threshold: f64,
        #[arg(long, default_value_t = 2.5)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parse arguments and dispatch, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own usage text; --help/--version are success.
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(threads) = cli.threads {
        // Ignore failure: the global pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_VALIDATION
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let seed = cli.seed;
    let verbose = cli.log_level >= LogLevel::Info;
    match &cli.command {
        Command::GenSyn { n, out } => {
            let dataset = data::generate_syn(*n, seed)?;
            data::write_csv(&dataset, out)?;
            if verbose {
                eprintln!("wrote {} records to {}", n, out.display());
            }
            Ok(EXIT_OK)
        }

        Command::Ldp {
            input,
            output,
            epsilon,
            k,
        } => {
            let xs = load_values_csv(input)?;
            let arity = k.unwrap_or_else(|| xs.iter().max().map_or(1, |&m| m + 1));
            let cfg = RandomizerConfig::new(*epsilon, arity)?;
            let mut rng = crate::seeds::rng(seed, "cli-ldp");
            let ys = randomize_all(&cfg, &xs, &mut rng)?;
            write_values_csv(output, "y", &ys)?;
            if verbose {
                eprintln!(
                    "randomized {} records (k = {arity}, keep probability {:.4})",
                    xs.len(),
                    cfg.keep_probability()
                );
            }
            Ok(EXIT_OK)
        }

        Command::Shuffle {
            input,
            aux,
            alpha,
            r,
            metric,
            rank_distance,
            out,
            emit_permutation,
        } => {
            let ys = load_values_csv(input)?;
            let aux_info = load_aux(aux, ys.len())?;
            let plan = ShufflePlan::build(
                &aux_info,
                *r,
                *alpha,
                (*metric).into(),
                (*rank_distance).into(),
            )?;
            let outcome = shuffle(&plan, &ys, seed)?;
            write_values_csv(out, "z", &outcome.z)?;

            #[derive(Serialize)]
            struct Sidecar {
                plan: crate::groups::PlanSummary,
                seed: u64,
                #[serde(skip_serializing_if = "Option::is_none")]
                sigma_star: Option<String>,
            }
            let sidecar = Sidecar {
                plan: plan.summary(),
                seed,
                sigma_star: emit_permutation.then(|| outcome.sigma_star.to_string()),
            };
            let sidecar_path = out.with_extension("plan.json");
            data::write_json_report(&sidecar, &sidecar_path)?;
            if verbose {
                eprintln!(
                    "shuffled {} values (width {}, sensitivity {}, theta {:.6}); sidecar {}",
                    ys.len(),
                    plan.width(),
                    plan.sensitivity(),
                    plan.theta(),
                    sidecar_path.display()
                );
            }
            Ok(EXIT_OK)
        }

        Command::Audit {
            n,
            alpha,
            r,
            grouping_file,
            aux,
            metric,
            theta_override,
            ldp_epsilon,
            out,
        } => {
            let assignment = match (grouping_file, aux) {
                (Some(path), _) => {
                    let text = fs::read_to_string(path)?;
                    GroupAssignment::from_json_lines(&text, *r, (*metric).into())?
                }
                (None, Some(path)) => {
                    let aux_info = load_aux(path, *n)?;
                    compute_groups(&aux_info, *r, (*metric).into())?
                }
                (None, None) => {
                    return Err(Error::InvalidParameter(
                        "audit needs --grouping-file or --aux".into(),
                    ))
                }
            };
            if assignment.len() != *n {
                return Err(Error::DimensionMismatch {
                    expected: *n,
                    got: assignment.len(),
                });
            }
            let plan = match theta_override {
                None => ShufflePlan::from_assignment(
                    assignment.clone(),
                    *alpha,
                    RankDistance::KendallTau,
                )?,
                Some(theta) => {
                    // Audit a mechanism run at an arbitrary dispersion
                    // against the claimed alpha.
                    let base = ShufflePlan::from_assignment(
                        assignment.clone(),
                        0.0,
                        RankDistance::KendallTau,
                    )?;
                    let implied_alpha = theta * base.sensitivity();
                    let plan = ShufflePlan::from_assignment(
                        assignment.clone(),
                        implied_alpha,
                        RankDistance::KendallTau,
                    )?;
                    // Report against the *claimed* alpha, not the implied one.
                    let mut report = audit_dsigma(&plan)?;
                    report.alpha_claimed = *alpha;
                    report.pass =
                        report.max_log_ratio_observed <= *alpha + crate::audit::AUDIT_TOLERANCE;
                    return finish_audit(report, ldp_epsilon, &assignment, out.as_deref(), verbose);
                }
            };
            let report = audit_dsigma(&plan)?;
            finish_audit(report, ldp_epsilon, &assignment, out.as_deref(), verbose)
        }

        Command::Preserve {
            method,
            n,
            theta,
            eta,
            delta,
            subset_size,
            subset_file,
            trials,
            aux,
            r,
            alpha,
            metric,
            sweep_widths,
            sweep_sizes,
            sweep_alphas,
            out,
        } => {
            if sweep_widths.is_some() || sweep_sizes.is_some() || sweep_alphas.is_some() {
                let csv = preserve_sweep_csv(
                    n.unwrap_or(2000),
                    *eta,
                    *delta,
                    *trials,
                    alpha.unwrap_or(3.0),
                    subset_size,
                    sweep_widths.as_deref(),
                    sweep_sizes.as_deref(),
                    sweep_alphas.as_deref(),
                    seed,
                )?;
                write_text(out.as_deref(), &csv)?;
                return Ok(EXIT_OK);
            }

            let report: PreservationReport = match method {
                PreserveMethodArg::Exact | PreserveMethodArg::Brute => {
                    let n = n.ok_or_else(|| {
                        Error::InvalidParameter("exact/brute methods need --n".into())
                    })?;
                    let theta = theta.ok_or_else(|| {
                        Error::InvalidParameter("exact/brute methods need --theta".into())
                    })?;
                    let subset = load_subset(subset_file.as_deref(), subset_size, n)?;
                    let delta_value = match method {
                        PreserveMethodArg::Exact => {
                            exact_delta_hamming(theta, n, subset.len(), *eta)?
                        }
                        _ => brute_force_delta_hamming(theta, n, &subset, *eta)?,
                    };
                    PreservationReport {
                        subset,
                        eta: *eta,
                        delta: delta_value,
                        eta_at_delta: None,
                        method: match method {
                            PreserveMethodArg::Exact => PreservationMethod::ExactHamming,
                            _ => PreservationMethod::BruteForce,
                        },
                        trials: 0,
                    }
                }
                PreserveMethodArg::MonteCarlo => {
                    let aux_path = aux.as_ref().ok_or_else(|| {
                        Error::InvalidParameter("monte-carlo needs --aux".into())
                    })?;
                    let r = r.ok_or_else(|| {
                        Error::InvalidParameter("monte-carlo needs --r".into())
                    })?;
                    let alpha = alpha.ok_or_else(|| {
                        Error::InvalidParameter("monte-carlo needs --alpha".into())
                    })?;
                    let aux_info = load_aux(aux_path, n.unwrap_or(0))?;
                    let plan = ShufflePlan::build(
                        &aux_info,
                        r,
                        alpha,
                        (*metric).into(),
                        RankDistance::KendallTau,
                    )?;
                    let subset =
                        load_subset(subset_file.as_deref(), subset_size, aux_info.len())?;
                    estimate_preservation(&plan, &subset, *eta, *delta, *trials, seed)?
                }
            };
            write_report(out.as_deref(), &report)?;
            Ok(EXIT_OK)
        }

        Command::Attack {
            input,
            graph,
            alpha,
            r,
            r_star,
            k_neighbors,
            trials,
            success_threshold,
            epsilon,
            out,
        } => {
            let dataset = load_dataset(input, graph.as_deref())?;
            let plan = plan_for_dataset(&dataset, *r, *alpha)?;
            let cfg = AttackConfig {
                k_neighbors: *k_neighbors,
                trials: *trials,
                success_threshold: *success_threshold,
                epsilon: *epsilon,
                r_star: *r_star,
            };
            let report = run_attack(&dataset, &plan, &cfg, seed)?;
            if verbose {
                eprintln!(
                    "rho = {:.4} over {} records (ties in {:.2}% of votes)",
                    report.rho,
                    dataset.len(),
                    report.tie_frequency * 100.0
                );
            }
            write_report(out.as_deref(), &report)?;
            Ok(EXIT_OK)
        }

        Command::Learn {
            input,
            graph,
            alpha,
            r,
            r_star,
            epsilon,
            estimator,
            out,
        } => {
            let dataset = load_dataset(input, graph.as_deref())?;
            let plan = plan_for_dataset(&dataset, *r, *alpha)?;
            let est: Box<dyn DistributionEstimator> = match estimator {
                EstimatorArg::Ball => Box::new(DebiasedBallHistogram { epsilon: *epsilon }),
                EstimatorArg::Global => Box::new(GlobalHistogram { epsilon: *epsilon }),
            };
            let report =
                run_learnability(&dataset, &plan, *r_star, *epsilon, est.as_ref(), seed)?;
            if verbose {
                eprintln!(
                    "lambda = {:.4} (mean TV {:.4}, uniform baseline {:.4})",
                    report.lambda, report.mean_tv, report.baseline_tv
                );
            }
            write_report(out.as_deref(), &report)?;
            Ok(EXIT_OK)
        }

        Command::Sweep {
            input,
            graph,
            radii,
            alphas,
            r_star,
            k_neighbors,
            trials,
            success_threshold,
            epsilon,
            out,
        } => {
            let dataset = load_dataset(input, graph.as_deref())?;
            let cfg = AttackConfig {
                k_neighbors: *k_neighbors,
                trials: *trials,
                success_threshold: *success_threshold,
                epsilon: *epsilon,
                r_star: *r_star,
            };
            let rows = sweep(&dataset, radii, alphas, &cfg, seed)?;
            let mut csv = String::from(sweep_csv_header());
            csv.push('\n');
            for row in &rows {
                csv.push_str(&row.to_csv());
                csv.push('\n');
            }
            write_text(out.as_deref(), &csv)?;
            Ok(EXIT_OK)
        }
    }
}

fn finish_audit(
    report: crate::audit::AuditReport,
    ldp_epsilon: &Option<f64>,
    assignment: &GroupAssignment,
    out: Option<&Path>,
    verbose: bool,
) -> Result<i32> {
    #[derive(Serialize)]
    struct FullReport {
        mechanism: crate::audit::AuditReport,
        #[serde(skip_serializing_if = "Option::is_none")]
        ldp_fallback: Option<crate::audit::LdpWeakReport>,
    }
    let ldp_fallback = match ldp_epsilon {
        Some(eps) => Some(audit_ldp_weak_dsigma(*eps, assignment)?),
        None => None,
    };
    let pass = report.pass && ldp_fallback.as_ref().is_none_or(|r| r.pass);
    let full = FullReport {
        mechanism: report,
        ldp_fallback,
    };
    write_report(out, &full)?;
    if verbose {
        eprintln!(
            "audit {} (max log-ratio {:.9} vs budget {})",
            if pass { "passed" } else { "FAILED" },
            full.mechanism.max_log_ratio_observed,
            full.mechanism.alpha_claimed
        );
    }
    Ok(if pass { EXIT_OK } else { EXIT_AUDIT_FAILURE })
}

#[allow(clippy::too_many_arguments)]
fn preserve_sweep_csv(
    n: usize,
    eta: f64,
    delta: f64,
    trials: usize,
    alpha: f64,
    subset_size: &Option<usize>,
    widths: Option<&[usize]>,
    sizes: Option<&[usize]>,
    alphas: Option<&[f64]>,
    seed: u64,
) -> Result<String> {
    let subset_len = subset_size.unwrap_or(n / 2).max(1).min(n);
    let mut csv = String::from("axis,value,eta\n");
    let mid_subset = |len: usize| -> Vec<usize> {
        let start = (n - len) / 2;
        (start..start + len).collect()
    };
    if let Some(widths) = widths {
        for &w in widths {
            let plan = block_plan(n, w + 1, alpha)?;
            let report =
                estimate_preservation(&plan, &mid_subset(subset_len), eta, delta, trials, seed)?;
            csv.push_str(&format!("omega,{w},{}\n", report.eta_at_delta.unwrap()));
        }
    }
    if let Some(sizes) = sizes {
        for &len in sizes {
            let plan = block_plan(n, 11, alpha)?;
            let report = estimate_preservation(&plan, &mid_subset(len), eta, delta, trials, seed)?;
            csv.push_str(&format!("subset_size,{len},{}\n", report.eta_at_delta.unwrap()));
        }
    }
    if let Some(alphas) = alphas {
        for &a in alphas {
            let plan = block_plan(n, 11, a)?;
            let report =
                estimate_preservation(&plan, &mid_subset(subset_len), eta, delta, trials, seed)?;
            csv.push_str(&format!("alpha,{a},{}\n", report.eta_at_delta.unwrap()));
        }
    }
    Ok(csv)
}

/// Disjoint contiguous blocks of the given size: a plan with width
/// `block - 1` regardless of data.
fn block_plan(n: usize, block: usize, alpha: f64) -> Result<ShufflePlan> {
    let mut groups: Vec<Vec<usize>> = Vec::with_capacity(n);
    for i in 0..n {
        let start = i - (i % block);
        let end = (start + block).min(n);
        groups.push((start..end).collect());
    }
    let assignment = GroupAssignment::from_groups(groups, block as f64, Metric::Euclidean)?;
    ShufflePlan::from_assignment(assignment, alpha, RankDistance::KendallTau)
}

fn load_subset(
    subset_file: Option<&Path>,
    subset_size: &Option<usize>,
    n: usize,
) -> Result<Vec<usize>> {
    match subset_file {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            let mut subset = Vec::new();
            for tok in text.split_whitespace() {
                subset.push(tok.parse::<usize>().map_err(|e| {
                    Error::InvalidParameter(format!("bad subset index {tok:?}: {e}"))
                })?);
            }
            if subset.is_empty() {
                return Err(Error::InvalidParameter("subset file is empty".into()));
            }
            Ok(subset)
        }
        None => {
            let len = subset_size.unwrap_or(n / 2).max(1).min(n);
            let start = (n - len) / 2;
            Ok((start..start + len).collect())
        }
    }
}

fn load_dataset(input: &Path, graph: Option<&Path>) -> Result<Dataset> {
    match graph {
        Some(graph_path) => data::load_csv_with_graph(input, graph_path, None),
        None => data::load_csv(input, None),
    }
}

fn plan_for_dataset(dataset: &Dataset, r: f64, alpha: f64) -> Result<ShufflePlan> {
    let metric = match &dataset.aux {
        AuxInfo::Points(_) => Metric::Euclidean,
        AuxInfo::Graph(_) => Metric::PathLength,
    };
    ShufflePlan::build(&dataset.aux, r, alpha, metric, RankDistance::KendallTau)
}

/// Two-column CSV (id,<any name>) of nonnegative integers, in id order.
fn load_values_csv(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Dataset("empty file".into()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.len() < 2 || columns[0] != "id" {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header id,<value> got {header:?}"),
        });
    }
    let mut rows: Vec<(usize, usize)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(Error::Parse {
                line: line_no,
                message: "field count mismatch".into(),
            });
        }
        let id: usize = fields[0].parse().map_err(|e| Error::Parse {
            line: line_no,
            message: format!("bad id: {e}"),
        })?;
        if !seen.insert(id) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate id {id}"),
            });
        }
        let value: usize = fields[1].parse().map_err(|e| Error::Parse {
            line: line_no,
            message: format!("bad value: {e}"),
        })?;
        rows.push((id, value));
    }
    rows.sort_by_key(|r| r.0);
    for (expect, row) in rows.iter().enumerate() {
        if row.0 != expect {
            return Err(Error::Dataset(format!("missing id {expect}")));
        }
    }
    Ok(rows.into_iter().map(|r| r.1).collect())
}

fn write_values_csv(path: &Path, name: &str, values: &[usize]) -> Result<()> {
    let mut out = format!("id,{name}\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{i},{v}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Auxiliary info from a file: points CSV (`id,t_1,..`), dataset CSV
/// (`id,x,t_1,..`, coordinates extracted), or an edge list.
fn load_aux(path: &Path, expected_n: usize) -> Result<AuxInfo> {
    let text = fs::read_to_string(path)?;
    let first = text.lines().next().unwrap_or("");
    let columns: Vec<&str> = first.split(',').map(str::trim).collect();
    if columns.first() == Some(&"id") {
        if columns.get(1) == Some(&"x") {
            let dataset = data::load_csv(path, None)?;
            return Ok(dataset.aux);
        }
        // Points CSV: id plus coordinate columns.
        let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
        for (idx, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != columns.len() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: "field count mismatch".into(),
                });
            }
            let id: usize = fields[0].parse().map_err(|e| Error::Parse {
                line: idx + 1,
                message: format!("bad id: {e}"),
            })?;
            let coords = fields[1..]
                .iter()
                .map(|f| {
                    f.parse::<f64>().map_err(|e| Error::Parse {
                        line: idx + 1,
                        message: format!("bad coordinate: {e}"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push((id, coords));
        }
        rows.sort_by_key(|r| r.0);
        return Ok(AuxInfo::Points(rows.into_iter().map(|r| r.1).collect()));
    }
    // Edge list; the node count comes from the caller.
    if expected_n == 0 {
        return Err(Error::InvalidParameter(
            "edge-list auxiliary info needs a known record count".into(),
        ));
    }
    data::load_edge_list(path, expected_n)
}

fn write_report<T: Serialize>(out: Option<&Path>, report: &T) -> Result<()> {
    match out {
        Some(path) => data::write_json_report(report, path),
        None => {
            println!("{}", serde_json::to_string_pretty(report)?);
            Ok(())
        }
    }
}

fn write_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
