//! Dataset ingestion, the synthetic clustered generator, and report
//! persistence.
//!
//! CSV schema: `id,x,t_1,...,t_d[,t_p]` with integer ids and categories and
//! float coordinates. Graph-shaped auxiliary information lives in a separate
//! edge-list file (two 0-based ids per line, `#` starts a comment).

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::groups::AuxInfo;
use crate::seeds;

/// A dataset: sensitive categories, public auxiliary information, optional
/// privileged per-record scalar.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Vec<usize>,
    pub aux: AuxInfo,
    pub privileged: Option<Vec<f64>>,
    pub label_arity: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.x.len();
        if self.aux.len() != n {
            return Err(Error::Dataset(format!(
                "auxiliary info covers {} records, data has {n}",
                self.aux.len()
            )));
        }
        if let Some(p) = &self.privileged {
            if p.len() != n {
                return Err(Error::Dataset(format!(
                    "privileged column covers {} records, data has {n}",
                    p.len()
                )));
            }
        }
        if let Some(&bad) = self.x.iter().find(|&&v| v >= self.label_arity) {
            return Err(Error::Dataset(format!(
                "category {bad} exceeds arity {}",
                self.label_arity
            )));
        }
        Ok(())
    }
}

/// Load a `id,x,t_*[,t_p]` CSV. When `label_arity` is `None` it is inferred
/// as `max(x) + 1`.
pub fn load_csv(path: &Path, label_arity: Option<usize>) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    parse_csv(&text, label_arity)
}

fn parse_csv(text: &str, label_arity: Option<usize>) -> Result<Dataset> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Dataset("empty file".into()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.len() < 3 || columns[0] != "id" || columns[1] != "x" {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header id,x,t_1,...  got {header:?}"),
        });
    }
    let has_privileged = *columns.last().unwrap() == "t_p";
    let coord_count = columns.len() - 2 - usize::from(has_privileged);
    if coord_count == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "need at least one coordinate column".into(),
        });
    }

    let mut seen_ids = std::collections::HashSet::new();
    let mut rows: Vec<(usize, usize, Vec<f64>, Option<f64>)> = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {} fields, got {}", columns.len(), fields.len()),
            });
        }
        let id: usize = fields[0].parse().map_err(|e| Error::Parse {
            line: line_no,
            message: format!("bad id {:?}: {e}", fields[0]),
        })?;
        if !seen_ids.insert(id) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate id {id}"),
            });
        }
        let x: usize = fields[1].parse().map_err(|e| Error::Parse {
            line: line_no,
            message: format!("bad category {:?}: {e}", fields[1]),
        })?;
        let mut coords = Vec::with_capacity(coord_count);
        for f in &fields[2..2 + coord_count] {
            coords.push(f.parse::<f64>().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("bad coordinate {f:?}: {e}"),
            })?);
        }
        let privileged = if has_privileged {
            Some(
                fields[columns.len() - 1]
                    .parse::<f64>()
                    .map_err(|e| Error::Parse {
                        line: line_no,
                        message: format!("bad privileged value: {e}"),
                    })?,
            )
        } else {
            None
        };
        rows.push((id, x, coords, privileged));
    }
    if rows.is_empty() {
        return Err(Error::Dataset("no data rows".into()));
    }
    rows.sort_by_key(|r| r.0);
    for (expect, row) in rows.iter().enumerate() {
        if row.0 != expect {
            return Err(Error::Dataset(format!(
                "ids must cover 0..n contiguously; missing id {expect}"
            )));
        }
    }

    let x: Vec<usize> = rows.iter().map(|r| r.1).collect();
    let points: Vec<Vec<f64>> = rows.iter().map(|r| r.2.clone()).collect();
    let privileged: Option<Vec<f64>> = if has_privileged {
        Some(rows.iter().map(|r| r.3.unwrap()).collect())
    } else {
        None
    };
    let arity = label_arity.unwrap_or_else(|| x.iter().max().map_or(1, |&m| m + 1));
    let dataset = Dataset {
        x,
        aux: AuxInfo::Points(points),
        privileged,
        label_arity: arity,
    };
    dataset.validate()?;
    Ok(dataset)
}

/// Write a dataset back to the CSV schema accepted by [`load_csv`].
pub fn write_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let points = match &dataset.aux {
        AuxInfo::Points(p) => p,
        AuxInfo::Graph(_) => {
            return Err(Error::Dataset(
                "graph-shaped auxiliary info is written as an edge list, not CSV".into(),
            ))
        }
    };
    let dim = points.first().map_or(0, Vec::len);
    let mut out = String::from("id,x");
    for d in 1..=dim {
        out.push_str(&format!(",t_{d}"));
    }
    if dataset.privileged.is_some() {
        out.push_str(",t_p");
    }
    out.push('\n');
    for i in 0..dataset.len() {
        out.push_str(&format!("{},{}", i, dataset.x[i]));
        for c in &points[i] {
            out.push_str(&format!(",{c}"));
        }
        if let Some(p) = &dataset.privileged {
            out.push_str(&format!(",{}", p[i]));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Load `id,x` categories plus a graph edge list as auxiliary information.
pub fn load_csv_with_graph(
    x_path: &Path,
    graph_path: &Path,
    label_arity: Option<usize>,
) -> Result<Dataset> {
    let text = fs::read_to_string(x_path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Dataset("empty file".into()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns != ["id", "x"] {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header id,x got {header:?}"),
        });
    }
    let mut seen = std::collections::HashSet::new();
    let mut rows: Vec<(usize, usize)> = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: "expected id,x".into(),
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
        let x: usize = fields[1].parse().map_err(|e| Error::Parse {
            line: line_no,
            message: format!("bad category: {e}"),
        })?;
        rows.push((id, x));
    }
    rows.sort_by_key(|r| r.0);
    let x: Vec<usize> = rows.iter().map(|r| r.1).collect();
    let aux = load_edge_list(graph_path, x.len())?;
    let arity = label_arity.unwrap_or_else(|| x.iter().max().map_or(1, |&m| m + 1));
    let dataset = Dataset {
        x,
        aux,
        privileged: None,
        label_arity: arity,
    };
    dataset.validate()?;
    Ok(dataset)
}

/// Edge-list reader: two 0-based ids per line, `#` comments.
pub fn load_edge_list(path: &Path, n: usize) -> Result<AuxInfo> {
    let text = fs::read_to_string(path)?;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected two node ids, got {line:?}"),
            });
        }
        let a: usize = parts[0].parse().map_err(|e| Error::Parse {
            line: idx + 1,
            message: format!("bad node id: {e}"),
        })?;
        let b: usize = parts[1].parse().map_err(|e| Error::Parse {
            line: idx + 1,
            message: format!("bad node id: {e}"),
        })?;
        edges.push((a, b));
    }
    AuxInfo::from_edges(n, &edges)
}

/// Write an edge list for graph-shaped auxiliary info.
pub fn write_edge_list(aux: &AuxInfo, path: &Path) -> Result<()> {
    let adj = match aux {
        AuxInfo::Graph(adj) => adj,
        AuxInfo::Points(_) => {
            return Err(Error::Dataset(
                "point auxiliary info has no edge list".into(),
            ))
        }
    };
    let mut out = String::new();
    for (a, neighbors) in adj.iter().enumerate() {
        for &b in neighbors {
            if a < b {
                out.push_str(&format!("{a} {b}\n"));
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Crescent geometry constants for the synthetic dataset.
pub const SYN_RADIUS: f64 = 1.0;
pub const SYN_OFFSET: f64 = 0.5;
pub const SYN_NOISE: f64 = 0.08;
/// Horizontal gap between the two clusters; large enough that a
/// nearest-centroid rule separates them essentially perfectly.
pub const SYN_CLUSTER_GAP: f64 = 6.0;

/// Synthetic clustered dataset with three nested label granularities: two
/// well-separated clusters, two interleaved crescents per cluster, and a
/// light/dark shade per half-arc. Labels are `cluster * 4 + crescent * 2 +
/// shade`, positions are the public auxiliary coordinates.
pub fn generate_syn(n: usize, seed: u64) -> Result<Dataset> {
    if n < 8 {
        return Err(Error::InvalidParameter(format!(
            "need at least 8 records to populate all strata, got {n}"
        )));
    }
    let mut rng = seeds::rng(seed, "syn-generator");
    let mut x = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    for record in 0..n {
        let label = record % 8;
        let cluster = label >> 2;
        let crescent = (label >> 1) & 1;
        let shade = label & 1;

        // Shades split each crescent along its arc.
        let half = std::f64::consts::FRAC_PI_2;
        let t = if shade == 0 {
            rng.random::<f64>() * half
        } else {
            half + rng.random::<f64>() * half
        };
        let (mut px, mut py) = if crescent == 0 {
            (SYN_RADIUS * t.cos(), SYN_RADIUS * t.sin())
        } else {
            (
                SYN_RADIUS * (1.0 - t.cos()),
                SYN_OFFSET - SYN_RADIUS * t.sin(),
            )
        };
        px += gaussian(&mut rng) * SYN_NOISE + cluster as f64 * SYN_CLUSTER_GAP;
        py += gaussian(&mut rng) * SYN_NOISE;
        x.push(label);
        points.push(vec![px, py]);
    }
    // Deterministic interleave so record order carries no label signal.
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let dataset = Dataset {
        x: order.iter().map(|&i| x[i]).collect(),
        aux: AuxInfo::Points(order.iter().map(|&i| points[i].clone()).collect()),
        privileged: None,
        label_arity: 8,
    };
    dataset.validate()?;
    Ok(dataset)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; u clamped away from zero for the logarithm.
    let u: f64 = rng.random::<f64>().max(1e-12);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

/// Pretty-printed JSON with the struct's declared field order.
pub fn write_json_report<T: serde::Serialize>(report: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_small_file() {
        let text = "id,x,t_1,t_2\n0,1,0.5,1.5\n1,0,2.0,3.0\n2,1,4.0,5.0\n";
        let d = parse_csv(text, None).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.x, vec![1, 0, 1]);
        assert!(d.privileged.is_none());
        assert_eq!(d.label_arity, 2);
    }

    #[test]
    fn privileged_column_detected() {
        let text = "id,x,t_1,t_p\n0,0,0.0,9.5\n1,1,1.0,8.5\n";
        let d = parse_csv(text, None).unwrap();
        assert_eq!(d.privileged, Some(vec![9.5, 8.5]));
    }

    #[test]
    fn duplicate_id_rejected_with_line() {
        let text = "id,x,t_1\n0,0,0.0\n0,1,1.0\n";
        match parse_csv(text, None) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("duplicate"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn csv_round_trip_is_field_identical() {
        let dir = std::env::temp_dir().join("groupshuffle-data-test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("round_trip.csv");
        let d = generate_syn(64, 3).unwrap();
        write_csv(&d, &path).unwrap();
        let back = load_csv(&path, Some(8)).unwrap();
        assert_eq!(back.x, d.x);
        match (&back.aux, &d.aux) {
            (AuxInfo::Points(a), AuxInfo::Points(b)) => assert_eq!(a, b),
            _ => panic!("expected points"),
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let dir = std::env::temp_dir().join("groupshuffle-data-test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("edges.txt");
        fs::write(&path, "# comment\n0 1\n1 2  # trailing\n\n3 0\n").unwrap();
        let aux = load_edge_list(&path, 4).unwrap();
        match &aux {
            AuxInfo::Graph(adj) => {
                assert_eq!(adj[0], vec![1, 3]);
                assert_eq!(adj[1], vec![0, 2]);
            }
            _ => panic!("expected graph"),
        }
        let out = dir.join("edges_out.txt");
        write_edge_list(&aux, &out).unwrap();
        let again = load_edge_list(&out, 4).unwrap();
        match (&aux, &again) {
            (AuxInfo::Graph(a), AuxInfo::Graph(b)) => assert_eq!(a, b),
            _ => panic!("expected graphs"),
        }
    }

    #[test]
    fn category_csv_plus_edge_list_pair() {
        let dir = std::env::temp_dir().join("groupshuffle-data-test");
        fs::create_dir_all(&dir).unwrap();
        let xp = dir.join("xs.csv");
        let gp = dir.join("pair_edges.txt");
        fs::write(&xp, "id,x\n0,1\n1,0\n2,1\n3,2\n").unwrap();
        fs::write(&gp, "0 1\n2 3\n").unwrap();
        let d = load_csv_with_graph(&xp, &gp, None).unwrap();
        assert_eq!(d.x, vec![1, 0, 1, 2]);
        assert_eq!(d.label_arity, 3);
        match &d.aux {
            AuxInfo::Graph(adj) => {
                assert_eq!(adj[0], vec![1]);
                assert_eq!(adj[3], vec![2]);
            }
            _ => panic!("expected graph"),
        }
        // Edge out of range is a dataset error.
        fs::write(&gp, "0 9\n").unwrap();
        assert!(load_csv_with_graph(&xp, &gp, None).is_err());
    }

    #[test]
    fn syn_marginals_are_balanced() {
        let d = generate_syn(20_000, 7).unwrap();
        let mut counts = [0usize; 8];
        for &label in &d.x {
            counts[label] += 1;
        }
        for &c in &counts {
            let frac = c as f64 / 20_000.0;
            assert!((frac - 0.125).abs() <= 0.02, "marginal {frac}");
        }
    }

    #[test]
    fn syn_is_deterministic_and_hierarchical() {
        let a = generate_syn(256, 11).unwrap();
        let b = generate_syn(256, 11).unwrap();
        assert_eq!(a.x, b.x);
        for &label in &a.x {
            assert!(label < 8);
            // shade refines crescent refines cluster by bit layout
            let cluster = label >> 2;
            let crescent = (label >> 1) & 1;
            assert_eq!(label, cluster * 4 + crescent * 2 + (label & 1));
        }
        let c = generate_syn(256, 12).unwrap();
        assert_ne!(a.x, c.x);
    }

    #[test]
    fn syn_clusters_are_linearly_separable() {
        let d = generate_syn(4000, 5).unwrap();
        let points = match &d.aux {
            AuxInfo::Points(p) => p,
            _ => unreachable!(),
        };
        // Nearest-centroid rule on the cluster bit.
        let mut centroids = [[0.0f64; 2]; 2];
        let mut counts = [0usize; 2];
        for (p, &label) in points.iter().zip(&d.x) {
            let c = label >> 2;
            centroids[c][0] += p[0];
            centroids[c][1] += p[1];
            counts[c] += 1;
        }
        for c in 0..2 {
            centroids[c][0] /= counts[c] as f64;
            centroids[c][1] /= counts[c] as f64;
        }
        let mut correct = 0usize;
        for (p, &label) in points.iter().zip(&d.x) {
            let dist = |c: &[f64; 2]| (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
            let pred = if dist(&centroids[0]) <= dist(&centroids[1]) {
                0
            } else {
                1
            };
            if pred == label >> 2 {
                correct += 1;
            }
        }
        assert!(correct as f64 / points.len() as f64 >= 0.99);
    }

    #[test]
    fn syn_too_small_rejected() {
        assert!(generate_syn(7, 0).is_err());
    }
}
