//! Permutations on `[0, n)` with the rank distances used throughout the crate.
//!
//! A [`Permutation`] stores its one-line form: `mapping[k]` is the (0-based)
//! image of position `k`. All file formats and display output use 1-based
//! indices; storage is 0-based.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` for which full enumeration of `S_n` is allowed (10! ≈ 3.6M).
pub const MAX_ENUMERATION_N: usize = 10;

/// A bijection on `[0, n)` in one-line notation.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.mapping)
    }
}

impl fmt::Display for Permutation {
    /// One whitespace-separated line of 1-based indices.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for &v in &self.mapping {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{}", v + 1)?;
            first = false;
        }
        Ok(())
    }
}

impl Permutation {
    /// The identity permutation on `n` elements.
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyPermutation);
        }
        Ok(Self {
            mapping: (0..n).collect(),
        })
    }

    /// Build from a 0-based one-line mapping, validating the bijection.
    pub fn from_mapping(mapping: Vec<usize>) -> Result<Self> {
        if mapping.is_empty() {
            return Err(Error::EmptyPermutation);
        }
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &v in &mapping {
            if v >= n {
                return Err(Error::InvalidPermutation(format!(
                    "index {v} out of range for size {n}"
                )));
            }
            if seen[v] {
                return Err(Error::InvalidPermutation(format!("duplicate index {v}")));
            }
            seen[v] = true;
        }
        Ok(Self { mapping })
    }

    /// Build from 1-based indices (the notation used in reports and files).
    pub fn from_one_based(indices: &[usize]) -> Result<Self> {
        let mapping = indices
            .iter()
            .map(|&v| {
                v.checked_sub(1).ok_or_else(|| {
                    Error::InvalidPermutation("1-based index 0 encountered".into())
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_mapping(mapping)
    }

    /// Parse one whitespace-separated line of 1-based indices.
    pub fn parse_line(line: &str) -> Result<Self> {
        let indices = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>().map_err(|e| {
                    Error::InvalidPermutation(format!("bad index {tok:?}: {e}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_one_based(&indices)
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(k, &v)| k == v)
    }

    /// Image of position `k` (0-based).
    pub fn image(&self, k: usize) -> usize {
        self.mapping[k]
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.mapping.iter().map(|&v| v + 1).collect()
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(())
    }

    /// Reorder a sequence: `result[k] == xs[self(k)]`.
    pub fn apply<T: Clone>(&self, xs: &[T]) -> Result<Vec<T>> {
        if xs.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: xs.len(),
            });
        }
        Ok(self.mapping.iter().map(|&v| xs[v].clone()).collect())
    }

    /// The inverse bijection: `inverse(self)(self(k)) == k`.
    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (k, &v) in self.mapping.iter().enumerate() {
            inv[v] = k;
        }
        Self { mapping: inv }
    }

    /// Composition under the crate-wide convention: applying the result to a
    /// sequence equals applying `other` first and `self` second, i.e.
    /// `apply(compose(a, b), x) == apply(a, apply(b, x))`, so
    /// `compose(a, b)(k) == b(a(k))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        Ok(Self {
            mapping: self.mapping.iter().map(|&v| other.mapping[v]).collect(),
        })
    }

    /// Kendall's tau distance: the number of position pairs whose relative
    /// order disagrees between the two permutations. Computed in
    /// O(n log n) by counting inversions of the relabeled sequence.
    pub fn kendall_tau(&self, other: &Self) -> Result<u64> {
        self.check_len(other)?;
        // d(self, other) == inversions of self ∘ other⁻¹ (positions relabeled
        // so that `other` becomes the identity).
        let inv_other = other.inverse();
        let mut seq: Vec<usize> = (0..self.len())
            .map(|k| self.mapping[inv_other.mapping[k]])
            .collect();
        Ok(count_inversions(&mut seq))
    }

    /// Hamming distance: the number of positions where the images differ.
    pub fn hamming(&self, other: &Self) -> Result<u64> {
        self.check_len(other)?;
        Ok(self
            .mapping
            .iter()
            .zip(&other.mapping)
            .filter(|(a, b)| a != b)
            .count() as u64)
    }

    /// Number of inversions, i.e. Kendall's tau distance to the identity.
    pub fn inversions(&self) -> u64 {
        let mut seq = self.mapping.clone();
        count_inversions(&mut seq)
    }

    /// Positions that are not fixed points.
    pub fn support_size(&self) -> usize {
        self.mapping.iter().enumerate().filter(|(k, &v)| *k != v).count()
    }
}

/// Merge-sort inversion counting; consumes the scratch buffer.
fn count_inversions(seq: &mut [usize]) -> u64 {
    let n = seq.len();
    if n < 2 {
        return 0;
    }
    let mut buf = vec![0usize; n];
    merge_count(seq, &mut buf)
}

fn merge_count(seq: &mut [usize], buf: &mut [usize]) -> u64 {
    let n = seq.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = seq.split_at_mut(mid);
    let mut count = merge_count(left, &mut buf[..mid]) + merge_count(right, &mut buf[mid..]);
    let (mut i, mut j) = (0, 0);
    for slot in buf[..n].iter_mut() {
        if i < left.len() && (j >= right.len() || left[i] <= right[j]) {
            *slot = left[i];
            i += 1;
        } else {
            if i < left.len() {
                count += (left.len() - i) as u64;
            }
            *slot = right[j];
            j += 1;
        }
    }
    seq.copy_from_slice(&buf[..n]);
    count
}

/// Iterate over all `n!` permutations of `[0, n)` in lexicographic order.
/// Refuses `n > MAX_ENUMERATION_N`.
pub fn enumerate_permutations(n: usize) -> Result<PermutationIter> {
    if n == 0 {
        return Err(Error::EmptyPermutation);
    }
    if n > MAX_ENUMERATION_N {
        return Err(Error::UnsupportedScale {
            what: "permutation enumeration",
            limit: MAX_ENUMERATION_N,
            got: n,
        });
    }
    Ok(PermutationIter {
        next: Some((0..n).collect()),
    })
}

pub struct PermutationIter {
    next: Option<Vec<usize>>,
}

impl Iterator for PermutationIter {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let out = Permutation {
            mapping: current.clone(),
        };
        self.next = next_lexicographic(current);
        Some(out)
    }
}

fn next_lexicographic(mut v: Vec<usize>) -> Option<Vec<usize>> {
    let n = v.len();
    if n < 2 {
        return None;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return None;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    Some(v)
}


#[cfg(test)]
mod tests {
    use super::*;
    use test_support::kendall_tau_reference;

    fn p(one_based: &[usize]) -> Permutation {
        Permutation::from_one_based(one_based).unwrap()
    }

    #[test]
    fn identity_basics() {
        let id = Permutation::identity(3).unwrap();
        assert_eq!(id.to_one_based(), vec![1, 2, 3]);
        assert!(matches!(Permutation::identity(0), Err(Error::EmptyPermutation)));

        let xs = [10, 20, 30, 40, 50];
        let id5 = Permutation::identity(5).unwrap();
        assert_eq!(id5.apply(&xs).unwrap(), xs.to_vec());
        let id4 = Permutation::identity(4).unwrap();
        assert_eq!(id4.kendall_tau(&id4).unwrap(), 0);
    }

    #[test]
    fn apply_matches_worked_examples() {
        // σ=(1 3 5 4 2) applied to ⟨21,33,45,65,67⟩ gives ⟨21,45,67,65,33⟩.
        let sigma = p(&[1, 3, 5, 4, 2]);
        let xs = [21, 33, 45, 65, 67];
        assert_eq!(sigma.apply(&xs).unwrap(), vec![21, 45, 67, 65, 33]);

        // σ=(4 5 2 3 1) reorders ⟨y1..y5⟩ to ⟨y4,y5,y2,y3,y1⟩.
        let sigma = p(&[4, 5, 2, 3, 1]);
        let ys = ["y1", "y2", "y3", "y4", "y5"];
        assert_eq!(
            sigma.apply(&ys).unwrap(),
            vec!["y4", "y5", "y2", "y3", "y1"]
        );
    }

    #[test]
    fn inverse_worked_example() {
        let sigma = p(&[1, 3, 5, 4, 2]);
        assert_eq!(sigma.inverse(), p(&[1, 5, 2, 4, 3]));
        let id = Permutation::identity(7).unwrap();
        assert_eq!(id.inverse(), id);
    }

    #[test]
    fn double_inverse_is_identity_map() {
        // 50 pseudo-random σ at n=8 via enumeration stride.
        let all: Vec<_> = enumerate_permutations(8).unwrap().collect();
        for idx in (0..all.len()).step_by(all.len() / 50).take(50) {
            let sigma = &all[idx];
            assert_eq!(&sigma.inverse().inverse(), sigma);
            let composed = sigma.compose(&sigma.inverse()).unwrap();
            assert!(composed.is_identity());
        }
    }

    #[test]
    fn compose_identities() {
        let sigma = p(&[3, 1, 4, 2]);
        let id = Permutation::identity(4).unwrap();
        assert_eq!(sigma.compose(&id).unwrap(), sigma);
        assert!(sigma.inverse().compose(&sigma).unwrap().is_identity());
    }

    #[test]
    fn compose_applies_second_argument_first() {
        let a = p(&[2, 3, 1, 4]);
        let b = p(&[4, 3, 2, 1]);
        let xs = [100, 200, 300, 400];
        let two_step = a.apply(&b.apply(&xs).unwrap()).unwrap();
        let one_step = a.compose(&b).unwrap().apply(&xs).unwrap();
        assert_eq!(two_step, one_step);
    }

    #[test]
    fn kendall_tau_worked_example() {
        let sigma = Permutation::identity(10).unwrap();
        let pi = p(&[1, 2, 3, 6, 5, 4, 7, 8, 9, 10]);
        assert_eq!(sigma.kendall_tau(&pi).unwrap(), 3);
        assert_eq!(pi.kendall_tau(&sigma).unwrap(), 3);
        assert_eq!(pi.kendall_tau(&pi).unwrap(), 0);
        // Full reversal at n=3 disagrees on all 3 pairs.
        assert_eq!(p(&[1, 2, 3]).kendall_tau(&p(&[3, 2, 1])).unwrap(), 3);
    }

    #[test]
    fn hamming_worked_example() {
        let sigma = Permutation::identity(10).unwrap();
        let pi = p(&[1, 2, 3, 6, 5, 4, 7, 8, 9, 10]);
        assert_eq!(sigma.hamming(&pi).unwrap(), 2);
        assert_eq!(pi.hamming(&pi).unwrap(), 0);
    }

    #[test]
    fn hamming_one_is_impossible() {
        let id = Permutation::identity(4).unwrap();
        let mut histogram = [0usize; 7];
        for sigma in enumerate_permutations(4).unwrap() {
            histogram[sigma.hamming(&id).unwrap() as usize] += 1;
        }
        assert_eq!(histogram[1], 0);
        assert_eq!(histogram.iter().sum::<usize>(), 24);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_permutations(3).unwrap().count(), 6);
        let all: Vec<_> = enumerate_permutations(5).unwrap().collect();
        assert_eq!(all.len(), 120);
        let distinct: std::collections::HashSet<_> =
            all.iter().map(|s| s.mapping().to_vec()).collect();
        assert_eq!(distinct.len(), 120);
        assert!(enumerate_permutations(11).is_err());
    }

    #[test]
    fn derangement_count_at_n4() {
        let fixed_point_free = enumerate_permutations(4)
            .unwrap()
            .filter(|s| s.support_size() == 4)
            .count();
        assert_eq!(fixed_point_free, 9);
    }

    #[test]
    fn kendall_fast_matches_reference_at_n6() {
        let all: Vec<_> = enumerate_permutations(6).unwrap().collect();
        for (i, a) in all.iter().enumerate().step_by(17) {
            let b = &all[(i * 31 + 7) % all.len()];
            assert_eq!(a.kendall_tau(b).unwrap(), kendall_tau_reference(a, b));
        }
    }

    #[test]
    fn triangle_inequality_exhaustive_n4() {
        let all: Vec<_> = enumerate_permutations(4).unwrap().collect();
        for a in &all {
            for b in &all {
                let dk_ab = a.kendall_tau(b).unwrap();
                let dh_ab = a.hamming(b).unwrap();
                for c in &all {
                    assert!(dk_ab <= a.kendall_tau(c).unwrap() + c.kendall_tau(b).unwrap());
                    assert!(dh_ab <= a.hamming(c).unwrap() + c.hamming(b).unwrap());
                }
            }
        }
    }

    #[test]
    fn parse_and_display_round_trip() {
        let sigma = p(&[3, 1, 2]);
        let line = sigma.to_string();
        assert_eq!(line, "3 1 2");
        assert_eq!(Permutation::parse_line(&line).unwrap(), sigma);
        assert!(Permutation::parse_line("1 1 2").is_err());
        assert!(Permutation::parse_line("0 1 2").is_err());
    }
}
