//! Similarity-group assignment from public auxiliary information, the group
//! graph, the BFS reference permutation, and the width/sensitivity numbers
//! that calibrate how much shuffling a privacy budget buys.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{enumerate_permutations, Permutation};
use crate::seeds::fnv1a64;

/// Public auxiliary information about the n records.
#[derive(Debug, Clone)]
pub enum AuxInfo {
    /// One coordinate vector per record; all vectors share a dimension.
    Points(Vec<Vec<f64>>),
    /// Undirected adjacency list, no self loops, node ids in `[0, n)`.
    Graph(Vec<Vec<usize>>),
}

impl AuxInfo {
    pub fn len(&self) -> usize {
        match self {
            AuxInfo::Points(rows) => rows.len(),
            AuxInfo::Graph(adj) => adj.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Build the graph variant from an undirected edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Dataset(format!(
                    "edge ({a}, {b}) out of range for {n} nodes"
                )));
            }
            if a == b {
                return Err(Error::Dataset(format!("self loop at node {a}")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(AuxInfo::Graph(adj))
    }
}

/// Distance over auxiliary information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    Euclidean,
    Manhattan,
    /// Unweighted shortest-path hop count on the auxiliary graph.
    PathLength,
}

/// Rank distance over permutations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankDistance {
    KendallTau,
    Hamming,
}

/// Per-record similarity groups `G_i = { j : d(t_i, t_j) <= r }`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAssignment {
    groups: Vec<Vec<usize>>,
    threshold_r: f64,
    metric: Metric,
}

impl GroupAssignment {
    /// Build directly from membership lists (used by tests and audit fixtures).
    /// Enforces reflexivity and symmetry.
    pub fn from_groups(groups: Vec<Vec<usize>>, threshold_r: f64, metric: Metric) -> Result<Self> {
        let n = groups.len();
        if n == 0 {
            return Err(Error::Dataset("empty group assignment".into()));
        }
        let mut sorted = groups;
        for (i, g) in sorted.iter_mut().enumerate() {
            g.sort_unstable();
            g.dedup();
            if g.iter().any(|&j| j >= n) {
                return Err(Error::Dataset(format!("group {i} has out-of-range member")));
            }
            if !g.contains(&i) {
                return Err(Error::Dataset(format!("group {i} does not contain itself")));
            }
        }
        for i in 0..n {
            for &j in &sorted[i] {
                if !sorted[j].contains(&i) {
                    return Err(Error::Dataset(format!(
                        "asymmetric membership: {j} in group {i} but not vice versa"
                    )));
                }
            }
        }
        Ok(Self {
            groups: sorted,
            threshold_r,
            metric,
        })
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn group(&self, i: usize) -> &[usize] {
        &self.groups[i]
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn threshold(&self) -> f64 {
        self.threshold_r
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn max_group_size(&self) -> usize {
        self.groups.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Are all groups singletons (the no-shuffle endpoint)?
    pub fn all_singletons(&self) -> bool {
        self.groups.iter().all(|g| g.len() == 1)
    }

    /// Parse the JSON-lines export produced by [`Self::to_json_lines`].
    pub fn from_json_lines(text: &str, threshold_r: f64, metric: Metric) -> Result<Self> {
        #[derive(Deserialize)]
        struct Line {
            i: usize,
            members: Vec<usize>,
        }
        let mut entries: Vec<Line> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let parsed: Line = serde_json::from_str(line).map_err(|e| Error::Parse {
                line: idx + 1,
                message: format!("bad group line: {e}"),
            })?;
            entries.push(parsed);
        }
        if entries.is_empty() {
            return Err(Error::Dataset("no groups in file".into()));
        }
        entries.sort_by_key(|e| e.i);
        let n = entries.len();
        let mut groups = vec![Vec::new(); n];
        for (expect, entry) in entries.into_iter().enumerate() {
            if entry.i != expect {
                return Err(Error::Dataset(format!(
                    "group indices must cover 0..n; missing {expect}"
                )));
            }
            groups[expect] = entry.members;
        }
        Self::from_groups(groups, threshold_r, metric)
    }

    /// One JSON object per line: `{"i": .., "members": [..]}`.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for (i, g) in self.groups.iter().enumerate() {
            let members: Vec<String> = g.iter().map(|m| m.to_string()).collect();
            out.push_str(&format!(
                "{{\"i\": {}, \"members\": [{}]}}\n",
                i,
                members.join(", ")
            ));
        }
        out
    }

    fn canonical_bytes(&self) -> Vec<u8> {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&(self.groups.len() as u64).to_le_bytes());
        bytes.extend_from_slice(&self.threshold_r.to_bits().to_le_bytes());
        bytes.push(match self.metric {
            Metric::Euclidean => 0,
            Metric::Manhattan => 1,
            Metric::PathLength => 2,
        });
        for g in &self.groups {
            bytes.extend_from_slice(&(g.len() as u64).to_le_bytes());
            for &m in g {
                bytes.extend_from_slice(&(m as u64).to_le_bytes());
            }
        }
        bytes
    }
}

/// Compute `G_i = { j : d(t_i, t_j) <= r }` for every record.
pub fn compute_groups(aux: &AuxInfo, r: f64, metric: Metric) -> Result<GroupAssignment> {
    if aux.is_empty() {
        return Err(Error::Dataset("auxiliary information is empty".into()));
    }
    if r.is_nan() || r < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "distance threshold must be >= 0, got {r}"
        )));
    }
    let n = aux.len();
    let groups: Vec<Vec<usize>> = if r.is_infinite() {
        vec![(0..n).collect(); n]
    } else {
        match (aux, metric) {
            (AuxInfo::Points(rows), Metric::Euclidean | Metric::Manhattan) => {
                let dim = rows[0].len();
                if rows.iter().any(|row| row.len() != dim) {
                    return Err(Error::Dataset("inconsistent point dimensions".into()));
                }
                rows.par_iter()
                    .map(|a| {
                        rows.iter()
                            .enumerate()
                            .filter(|(_, b)| point_distance(a, b, metric) <= r)
                            .map(|(j, _)| j)
                            .collect()
                    })
                    .collect()
            }
            (AuxInfo::Graph(adj), Metric::PathLength) => {
                let depth = r.floor() as usize;
                (0..n)
                    .into_par_iter()
                    .map(|i| hop_ball(adj, i, depth))
                    .collect()
            }
            (AuxInfo::Points(_), Metric::PathLength) => {
                return Err(Error::InvalidParameter(
                    "path-length metric requires graph auxiliary information".into(),
                ))
            }
            (AuxInfo::Graph(_), _) => {
                return Err(Error::InvalidParameter(
                    "point metrics require coordinate auxiliary information".into(),
                ))
            }
        }
    };
    GroupAssignment::from_groups(groups, r, metric)
}

fn point_distance(a: &[f64], b: &[f64], metric: Metric) -> f64 {
    match metric {
        Metric::Euclidean => a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt(),
        Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        Metric::PathLength => unreachable!("path length is not a point metric"),
    }
}

/// Nodes within `depth` hops of `start`, including `start`.
fn hop_ball(adj: &[Vec<usize>], start: usize, depth: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut members = vec![start];
    while let Some(u) = queue.pop_front() {
        if dist[u] == depth {
            continue;
        }
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                members.push(v);
                queue.push_back(v);
            }
        }
    }
    members.sort_unstable();
    members
}

/// Undirected graph with vertex set `[0, n)` and an edge `(i, j)` whenever
/// `j` belongs to `G_i` (and `i != j`). Neighbor lists are sorted.
#[derive(Debug, Clone)]
pub struct GroupGraph {
    adjacency: Vec<Vec<usize>>,
}

impl GroupGraph {
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }
}

pub fn build_group_graph(assignment: &GroupAssignment) -> GroupGraph {
    let n = assignment.len();
    let mut adjacency = vec![Vec::new(); n];
    for (i, list) in adjacency.iter_mut().enumerate() {
        for &j in assignment.group(i) {
            if i != j {
                list.push(j);
            }
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
        list.dedup();
    }
    GroupGraph { adjacency }
}

/// Index of a largest group, ties broken by lowest index.
pub fn select_root(assignment: &GroupAssignment) -> usize {
    let mut best = 0;
    let mut best_size = assignment.group(0).len();
    for i in 1..assignment.len() {
        let size = assignment.group(i).len();
        if size > best_size {
            best = i;
            best_size = size;
        }
    }
    best
}

/// Breadth-first visit order as a permutation: position `k` holds the `k`-th
/// node visited. Unvisited neighbors enqueue in ascending node order;
/// disconnected components follow in ascending order of their smallest node.
pub fn bfs_reference(graph: &GroupGraph, root: usize) -> Permutation {
    let n = graph.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();

    let mut start = Some(root);
    while order.len() < n {
        let s = match start.take() {
            Some(s) => s,
            None => (0..n).find(|&v| !visited[v]).expect("unvisited node exists"),
        };
        visited[s] = true;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in graph.neighbors(u) {
                if !visited[v] {
                    visited[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    Permutation::from_mapping(order).expect("BFS order is a bijection")
}

/// Width of the assignment under `sigma`: the largest index spread of any
/// group's members in the visit order.
pub fn width(sigma: &Permutation, assignment: &GroupAssignment) -> Result<usize> {
    if sigma.len() != assignment.len() {
        return Err(Error::DimensionMismatch {
            expected: assignment.len(),
            got: sigma.len(),
        });
    }
    let inverse = sigma.inverse();
    let mut widest = 0;
    for g in assignment.groups() {
        let mut lo = usize::MAX;
        let mut hi = 0;
        for &member in g {
            let rank = inverse.image(member);
            lo = lo.min(rank);
            hi = hi.max(rank);
        }
        widest = widest.max(hi - lo);
    }
    Ok(widest)
}

/// Largest scale the Hamming sensitivity enumeration accepts.
pub const MAX_HAMMING_SENSITIVITY_N: usize = 8;

/// Worst-case change in rank distance to the reference over all neighboring
/// re-orderings.
///
/// For Kendall's tau this is the closed form `w(w+1)/2` in the width `w` of
/// `sigma0`. For Hamming there is no closed form; all within-group
/// rearrangements are enumerated (guarded to small n) and each one is scored
/// in the reference frame, where a rearrangement `p` supported on a group
/// displaces exactly the positions of `sigma0^-1 p sigma0`.
pub fn sensitivity(
    sigma0: &Permutation,
    assignment: &GroupAssignment,
    rank_distance: RankDistance,
) -> Result<f64> {
    match rank_distance {
        RankDistance::KendallTau => {
            let w = width(sigma0, assignment)? as f64;
            Ok(w * (w + 1.0) / 2.0)
        }
        RankDistance::Hamming => {
            let n = assignment.len();
            if n > MAX_HAMMING_SENSITIVITY_N {
                return Err(Error::UnsupportedScale {
                    what: "Hamming sensitivity enumeration",
                    limit: MAX_HAMMING_SENSITIVITY_N,
                    got: n,
                });
            }
            if sigma0.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: sigma0.len(),
                });
            }
            let mut max_displaced = 0u64;
            let inv0 = sigma0.inverse();
            for g in assignment.groups() {
                for rearrangement in group_supported_permutations(n, g)? {
                    // The rearrangement as seen in the reference frame: rank k
                    // is displaced exactly when the member at rank k moves.
                    let framed = sigma0.compose(&rearrangement)?.compose(&inv0)?;
                    max_displaced = max_displaced.max(framed.support_size() as u64);
                }
            }
            Ok(max_displaced as f64)
        }
    }
}

/// All permutations of `[0, n)` that fix every position outside `members`.
pub(crate) fn group_supported_permutations(
    n: usize,
    members: &[usize],
) -> Result<Vec<Permutation>> {
    let k = members.len();
    let mut out = Vec::new();
    if k == 0 {
        return Ok(out);
    }
    for inner in enumerate_permutations(k)? {
        let mut mapping: Vec<usize> = (0..n).collect();
        for (slot, &member) in members.iter().enumerate() {
            mapping[member] = members[inner.image(slot)];
        }
        out.push(Permutation::from_mapping(mapping)?);
    }
    Ok(out)
}

/// Data-independent state of the shuffling mechanism: assignment, reference
/// permutation, width, sensitivity and the dispersion implied by the budget.
#[derive(Debug, Clone)]
pub struct ShufflePlan {
    assignment: GroupAssignment,
    sigma0: Permutation,
    width: usize,
    sensitivity: f64,
    alpha: f64,
    theta: f64,
    rank_distance: RankDistance,
}

/// Serializable summary written next to shuffle outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanSummary {
    pub n: usize,
    pub threshold_r: f64,
    pub alpha: f64,
    pub theta: f64,
    pub width: usize,
    pub sensitivity: f64,
    pub identity_shuffle: bool,
    pub digest: String,
}

impl ShufflePlan {
    /// Steps 1-6 of the mechanism: groups, graph, root, BFS reference,
    /// sensitivity, dispersion.
    pub fn build(aux: &AuxInfo, r: f64, alpha: f64, metric: Metric, rank_distance: RankDistance) -> Result<Self> {
        let assignment = compute_groups(aux, r, metric)?;
        Self::from_assignment(assignment, alpha, rank_distance)
    }

    /// Build from a precomputed assignment (grouping files, audits).
    pub fn from_assignment(
        assignment: GroupAssignment,
        alpha: f64,
        rank_distance: RankDistance,
    ) -> Result<Self> {
        let graph = build_group_graph(&assignment);
        let root = select_root(&assignment);
        let sigma0 = bfs_reference(&graph, root);
        Self::from_parts(assignment, sigma0, alpha, rank_distance)
    }

    /// Build around an explicit reference permutation.
    pub fn from_parts(
        assignment: GroupAssignment,
        sigma0: Permutation,
        alpha: f64,
        rank_distance: RankDistance,
    ) -> Result<Self> {
        if alpha < 0.0 || alpha.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "privacy budget must be >= 0, got {alpha}"
            )));
        }
        let w = width(&sigma0, &assignment)?;
        let delta = sensitivity(&sigma0, &assignment, rank_distance)?;
        // Zero sensitivity means every group is a singleton: the mechanism
        // degenerates to the identity shuffle and theta is flagged infinite.
        let theta = if delta > 0.0 { alpha / delta } else { f64::INFINITY };
        Ok(Self {
            assignment,
            sigma0,
            width: w,
            sensitivity: delta,
            alpha,
            theta,
            rank_distance,
        })
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn assignment(&self) -> &GroupAssignment {
        &self.assignment
    }

    pub fn sigma0(&self) -> &Permutation {
        &self.sigma0
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn rank_distance(&self) -> RankDistance {
        self.rank_distance
    }

    /// True when the plan degenerates to returning the input unchanged.
    pub fn is_identity_shuffle(&self) -> bool {
        self.sensitivity == 0.0
    }

    /// Stable content hash binding reports to the exact mechanism state.
    pub fn digest(&self) -> String {
        let mut bytes = self.assignment.canonical_bytes();
        for &v in self.sigma0.mapping() {
            bytes.extend_from_slice(&(v as u64).to_le_bytes());
        }
        bytes.extend_from_slice(&self.alpha.to_bits().to_le_bytes());
        bytes.extend_from_slice(&self.theta.to_bits().to_le_bytes());
        bytes.push(match self.rank_distance {
            RankDistance::KendallTau => 0,
            RankDistance::Hamming => 1,
        });
        format!("{:016x}", fnv1a64(&bytes))
    }

    pub fn summary(&self) -> PlanSummary {
        PlanSummary {
            n: self.len(),
            threshold_r: self.assignment.threshold(),
            alpha: self.alpha,
            theta: self.theta,
            width: self.width,
            sensitivity: self.sensitivity,
            identity_shuffle: self.is_identity_shuffle(),
            digest: self.digest(),
        }
    }
}

/// Budget this plan provides under a different group assignment:
/// `alpha' = alpha * sensitivity(sigma0, g2) / sensitivity(sigma0, g)`.
pub fn transferred_alpha(plan: &ShufflePlan, other: &GroupAssignment) -> Result<f64> {
    if plan.sensitivity() == 0.0 {
        return Err(Error::InvalidParameter(
            "transferred budget is undefined for a zero-sensitivity plan".into(),
        ));
    }
    let other_delta = sensitivity(plan.sigma0(), other, plan.rank_distance())?;
    Ok(plan.alpha() * other_delta / plan.sensitivity())
}
