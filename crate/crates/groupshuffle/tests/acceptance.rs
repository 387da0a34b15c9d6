//! End-to-end acceptance suite. Each test prints one PASS line when its
//! criterion holds (run with `--nocapture` to see them).

use std::collections::HashMap;

use groupshuffle::audit::{
    audit_composition, audit_dsigma, audit_semantic, SemanticPrior, AUDIT_TOLERANCE,
};
use groupshuffle::data::generate_syn;
use groupshuffle::eval::{sweep, AttackConfig};
use groupshuffle::groups::{
    bfs_reference, build_group_graph, compute_groups, select_root, width, GroupAssignment,
};
use groupshuffle::ldp::{ldp_ratio_audit, RandomizerConfig};
use groupshuffle::mallows::{
    enumerate_pmf, kendall_log_normalizer, sample_with_table, InsertionTable, MallowsParams,
};
use groupshuffle::mechanism::{draw_sigma_star, shuffle, shuffle_with_fixed_draw};
use groupshuffle::perm::enumerate_permutations;
use groupshuffle::preserve::{
    brute_force_delta_hamming, exact_delta_hamming, hamming_failure_counts,
};
use groupshuffle::seeds;
use groupshuffle::{AuxInfo, Metric, Permutation, RankDistance, ShufflePlan};

/// The 8-record worked instance: groups are closed graph neighborhoods.
fn worked_example_groups() -> GroupAssignment {
    let aux = AuxInfo::from_edges(
        8,
        &[(4, 1), (4, 2), (4, 7), (4, 3), (7, 2), (3, 6), (1, 0), (1, 5)],
    )
    .unwrap();
    compute_groups(&aux, 1.0, Metric::PathLength).unwrap()
}

#[test]
fn criterion_01_worked_example_reproduces() {
    let groups = worked_example_groups();

    // Root is the largest group, the one containing five members.
    let root = select_root(&groups);
    assert_eq!(root, 4, "root should be record 5 (1-based)");

    // Pipeline reference permutation: widths, sensitivity, dispersion.
    let graph = build_group_graph(&groups);
    let sigma0 = bfs_reference(&graph, root);
    let rank_of = |sigma: &Permutation, member: usize| sigma.inverse().image(member);
    let spread = |sigma: &Permutation, members: &[usize]| {
        let ranks: Vec<usize> = members.iter().map(|&m| rank_of(sigma, m)).collect();
        ranks.iter().max().unwrap() - ranks.iter().min().unwrap()
    };
    assert_eq!(spread(&sigma0, groups.group(4)), 4, "width of the root group");
    assert_eq!(spread(&sigma0, groups.group(3)), 7, "width of group 4 (1-based)");
    let alpha = 1.0;
    let plan = ShufflePlan::from_assignment(groups.clone(), alpha, RankDistance::KendallTau)
        .unwrap();
    assert_eq!(plan.width(), 7);
    assert_eq!(plan.sensitivity(), 28.0);
    assert!((plan.theta() - alpha / 28.0).abs() < 1e-15);

    // Exact release: the traversal order shown in the worked example is a
    // valid BFS of the same graph with identical widths; the quoted draw
    // must produce the quoted output.
    let sigma0_worked = Permutation::from_one_based(&[5, 2, 3, 8, 4, 1, 6, 7]).unwrap();
    assert_eq!(spread(&sigma0_worked, groups.group(4)), 4);
    assert_eq!(spread(&sigma0_worked, groups.group(3)), 7);
    let plan_worked =
        ShufflePlan::from_parts(groups, sigma0_worked, alpha, RankDistance::KendallTau).unwrap();
    assert_eq!(plan_worked.sensitivity(), 28.0);
    let sigma_hat = Permutation::from_one_based(&[3, 2, 5, 4, 8, 1, 7, 6]).unwrap();
    let y = ["y1", "y2", "y3", "y4", "y5", "y6", "y7", "y8"];
    let outcome = shuffle_with_fixed_draw(&plan_worked, &y, &sigma_hat).unwrap();
    assert_eq!(
        outcome.z,
        vec!["y1", "y2", "y5", "y8", "y3", "y7", "y6", "y4"]
    );
    println!("criterion 1 PASS: worked example reproduces (root 5, widths 4/7, sensitivity 28, exact release)");
}

#[test]
fn criterion_02_rank_distance_goldens() {
    let sigma = Permutation::identity(10).unwrap();
    let pi = Permutation::from_one_based(&[1, 2, 3, 6, 5, 4, 7, 8, 9, 10]).unwrap();
    assert_eq!(sigma.kendall_tau(&pi).unwrap(), 3);
    assert_eq!(sigma.hamming(&pi).unwrap(), 2);

    let wide = Permutation::from_one_based(&[1, 3, 7, 8, 6, 4, 5, 2, 9, 10]).unwrap();
    let mut groups: Vec<Vec<usize>> = (0..10).map(|i| vec![i]).collect();
    let g1 = vec![0usize, 1, 4, 5, 6, 7];
    for &m in &g1 {
        groups[m] = g1.clone();
    }
    let assignment = GroupAssignment::from_groups(groups, 2.0, Metric::PathLength).unwrap();
    assert_eq!(width(&wide, &assignment).unwrap(), 7);
    println!("criterion 2 PASS: rank-distance goldens (tau 3, hamming 2, width 7)");
}

#[test]
fn criterion_03_mallows_sampler_exactness() {
    // Closed-form normalizer vs enumeration, n <= 6, to 1e-12 relative.
    for n in 2..=6usize {
        for theta in [0.0, 0.5, 2.0] {
            let id = Permutation::identity(n).unwrap();
            let brute: f64 = enumerate_permutations(n)
                .unwrap()
                .map(|s| (-theta * s.kendall_tau(&id).unwrap() as f64).exp())
                .sum();
            let closed = kendall_log_normalizer(theta, n).exp();
            assert!(
                (closed - brute).abs() <= 1e-12 * brute,
                "normalizer mismatch at n={n}, theta={theta}"
            );
        }
    }

    // 200k draws vs the enumerated pmf at n = 5, total variation <= 0.01.
    let sigma0 = Permutation::from_one_based(&[2, 4, 1, 5, 3]).unwrap();
    for theta in [0.0, 0.5, 2.0] {
        let params =
            MallowsParams::new(theta, sigma0.clone(), RankDistance::KendallTau).unwrap();
        let exact: HashMap<Vec<usize>, f64> = enumerate_pmf(&params)
            .unwrap()
            .into_iter()
            .map(|(p, v)| (p.mapping().to_vec(), v))
            .collect();
        let table = InsertionTable::new(theta, 5).unwrap();
        let mut rng = seeds::rng(3, "acceptance-mallows-tv");
        let draws = 200_000usize;
        let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
        for _ in 0..draws {
            let s = sample_with_table(&params, &table, &mut rng).unwrap();
            *counts.entry(s.mapping().to_vec()).or_insert(0) += 1;
        }
        let tv: f64 = exact
            .iter()
            .map(|(k, p)| {
                let emp = counts.get(k).copied().unwrap_or(0) as f64 / draws as f64;
                (emp - p).abs()
            })
            .sum::<f64>()
            / 2.0;
        assert!(tv <= 0.01, "TV {tv} at theta={theta}");
    }
    println!("criterion 3 PASS: sampler matches enumerated pmf (TV <= 0.01) and closed-form normalizer (1e-12)");
}

#[test]
fn criterion_04_privacy_audit_over_random_configurations() {
    use rand::Rng;
    let mut rng = seeds::rng(2024, "acceptance-audit-configs");
    let alphas = [0.5, 1.0, 2.0];
    for config in 0..20 {
        // Random 5-node graph; groups are hop balls of radius 1 or 2.
        let mut edges = Vec::new();
        for a in 0..5usize {
            for b in (a + 1)..5 {
                if rng.random::<f64>() < 0.35 {
                    edges.push((a, b));
                }
            }
        }
        let aux = AuxInfo::from_edges(5, &edges).unwrap();
        let r = if rng.random::<bool>() { 1.0 } else { 2.0 };
        let alpha = alphas[config % alphas.len()];
        let plan = ShufflePlan::build(&aux, r, alpha, Metric::PathLength, RankDistance::KendallTau)
            .unwrap();
        let report = audit_dsigma(&plan).unwrap();
        assert!(
            report.pass,
            "config {config}: observed {} exceeds alpha {} (+{AUDIT_TOLERANCE})",
            report.max_log_ratio_observed, alpha
        );
        assert!(report.max_log_ratio_observed <= alpha + AUDIT_TOLERANCE);
    }
    println!("criterion 4 PASS: exhaustive privacy audit within budget on 20 random configurations");
}

#[test]
fn criterion_05_semantic_guarantee_audit() {
    // n = 4, binary domain, correlated pair {0,1}; audits target record 0.
    let assignment = GroupAssignment::from_groups(
        vec![vec![0, 1], vec![0, 1], vec![2], vec![3]],
        1.0,
        Metric::Euclidean,
    )
    .unwrap();
    let alpha = 1.0;
    let plan =
        ShufflePlan::from_assignment(assignment, alpha, RankDistance::KendallTau).unwrap();

    let mut rng = seeds::rng(7, "acceptance-semantic-priors");
    for trial in 0..5 {
        let prior = SemanticPrior::random(4, &mut rng).unwrap();
        let gap = audit_semantic(&plan, &prior, 0).unwrap();
        assert!(
            gap <= alpha + AUDIT_TOLERANCE,
            "prior {trial}: posterior gap {gap} exceeds {alpha}"
        );
    }

    let product = SemanticPrior::product(&[0.3, 0.6, 0.5, 0.8]).unwrap();
    let gap = audit_semantic(&plan, &product, 0).unwrap();
    assert!(gap <= 1e-9, "independent prior should give zero gap, got {gap}");
    println!("criterion 5 PASS: strong-adversary posterior gap within budget (5 random priors; zero for product prior)");
}

#[test]
fn criterion_06_composition_audit() {
    let assignment = GroupAssignment::from_groups(
        vec![vec![0, 1, 2], vec![0, 1, 2], vec![0, 1, 2], vec![3]],
        1.0,
        Metric::Euclidean,
    )
    .unwrap();
    let a = ShufflePlan::from_assignment(assignment.clone(), 0.5, RankDistance::KendallTau)
        .unwrap();
    let b = ShufflePlan::from_assignment(assignment, 0.5, RankDistance::KendallTau).unwrap();
    let report = audit_composition(&a, &b).unwrap();
    assert!((report.alpha_claimed - 1.0).abs() < 1e-12);
    assert!(
        report.pass,
        "joint release observed {} over budget {}",
        report.max_log_ratio_observed, report.alpha_claimed
    );
    println!(
        "criterion 6 PASS: joint release stays within summed budget (observed {:.9} <= 1.0)",
        report.max_log_ratio_observed
    );
}

#[test]
fn criterion_07_preservation_formula_matches_brute_force() {
    let mut cells = 0;
    for n in [6usize, 7, 8] {
        for theta in [0.0, 0.5, 1.0] {
            for ls in 2..n {
                for eta in [0.5, 0.75, 1.0] {
                    let subset: Vec<usize> = (0..ls).collect();
                    let exact = exact_delta_hamming(theta, n, ls, eta).unwrap();
                    let brute = brute_force_delta_hamming(theta, n, &subset, eta).unwrap();
                    assert!(
                        (exact - brute).abs() <= 1e-12,
                        "n={n} theta={theta} ls={ls} eta={eta}: {exact} vs {brute}"
                    );
                    cells += 1;

                    // Structural: counts vanish through twice the allowed
                    // escapes plus one.
                    let counts = hamming_failure_counts(n, ls, eta).unwrap();
                    let allowed = (((1.0 - eta) * ls as f64) + 1e-9).floor() as usize;
                    for (h, &c) in counts.iter().enumerate() {
                        if h <= 2 * allowed + 1 {
                            assert_eq!(c, 0, "n={n} ls={ls} eta={eta} h={h}");
                        }
                    }
                }
            }
        }
    }
    println!("criterion 7 PASS: exact preservation formula equals brute force on {cells} grid cells (1e-12)");
}

#[test]
fn criterion_08_endpoint_behavior() {
    // Zero sensitivity: the release is the input.
    let aux = AuxInfo::Points(vec![vec![0.0], vec![5.0], vec![9.0], vec![14.0]]);
    let plan = ShufflePlan::build(&aux, 0.0, 1.0, Metric::Euclidean, RankDistance::KendallTau)
        .unwrap();
    assert!(plan.is_identity_shuffle());
    let y = [10u32, 20, 30, 40];
    let outcome = shuffle(&plan, &y, 77).unwrap();
    assert_eq!(outcome.z, y);

    // theta = 0 over one full group: the applied permutation is uniform.
    let full = GroupAssignment::from_groups(
        vec![(0..5).collect::<Vec<_>>(); 5],
        f64::INFINITY,
        Metric::Euclidean,
    )
    .unwrap();
    let plan = ShufflePlan::from_assignment(full, 0.0, RankDistance::KendallTau).unwrap();
    assert_eq!(plan.theta(), 0.0);
    let draws = 200_000usize;
    let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
    for t in 0..draws {
        let s = draw_sigma_star(&plan, seeds::derive_indexed(3, "endpoint-uniform", t as u64))
            .unwrap();
        *counts.entry(s.mapping().to_vec()).or_insert(0) += 1;
    }
    assert_eq!(counts.len(), 120);
    let tv: f64 = counts
        .values()
        .map(|&c| (c as f64 / draws as f64 - 1.0 / 120.0).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv <= 0.01, "TV from uniform was {tv}");
    println!("criterion 8 PASS: endpoints behave (zero-sensitivity identity; theta=0 uniform, TV {tv:.4})");
}

#[test]
fn criterion_09_trend_reproduction_on_synthetic_data() {
    let dataset = generate_syn(5000, 1).unwrap();
    let cfg = AttackConfig {
        k_neighbors: 25,
        trials: 50,
        success_threshold: 0.9,
        epsilon: 2.5,
        r_star: 0.3,
    };
    let radii = [0.0, 0.05, 0.08, 1e9];
    let rows = sweep(&dataset, &radii, &[1.0], &cfg, 1).unwrap();
    assert_eq!(rows.len(), 4);

    let rhos: Vec<f64> = rows.iter().map(|r| r.rho).collect();
    let lambdas: Vec<f64> = rows.iter().map(|r| r.lambda).collect();

    // Attack success must not grow with the radius, allowing one inversion
    // of at most 0.02.
    let mut rho_inversions = 0;
    for pair in rhos.windows(2) {
        if pair[1] > pair[0] {
            assert!(pair[1] - pair[0] <= 0.02, "rho inversion too large: {pair:?}");
            rho_inversions += 1;
        }
    }
    assert!(rho_inversions <= 1, "rho inverted {rho_inversions} times: {rhos:?}");

    // Learnability error must not shrink with the radius, same slack.
    let mut lambda_inversions = 0;
    for pair in lambdas.windows(2) {
        if pair[1] < pair[0] {
            assert!(pair[0] - pair[1] <= 0.02, "lambda inversion too large: {pair:?}");
            lambda_inversions += 1;
        }
    }
    assert!(
        lambda_inversions <= 1,
        "lambda inverted {lambda_inversions} times: {lambdas:?}"
    );

    // No shuffling must be clearly more vulnerable than global shuffling.
    assert!(
        rhos[0] - rhos[3] >= 0.2,
        "attack gap too small: {} vs {}",
        rhos[0],
        rhos[3]
    );
    println!(
        "criterion 9 PASS: rho {:?} nonincreasing, lambda {:?} nondecreasing, endpoint gap {:.3}",
        rhos,
        lambdas,
        rhos[0] - rhos[3]
    );
}

#[test]
fn criterion_10_randomizer_audit_is_tight() {
    for k in [2usize, 5] {
        for epsilon in [0.5, 1.0, 2.5] {
            let cfg = RandomizerConfig::new(epsilon, k).unwrap();
            let observed = ldp_ratio_audit(&cfg);
            assert!(
                (observed - epsilon).abs() <= 1e-12,
                "k={k}, eps={epsilon}: audit gave {observed}"
            );
        }
    }
    println!("criterion 10 PASS: channel log-ratio equals epsilon to 1e-12 for all (k, epsilon)");
}
