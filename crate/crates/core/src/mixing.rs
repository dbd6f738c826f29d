// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Block partitions and target mixing matrices.
//!
//! A mixing matrix `F` stores, for every pair of blocks `(I, J)`, the expected
//! number of links between them. The diagonal holds *twice* the number of
//! intra-block links, so that every row sums to the total degree of its block.
//! The parametric family built here interpolates between disassortative
//! (`rho = -1`) and assortative (`rho = 1`) mixing, with `q` controlling how
//! fast connectivity decays away from the diagonal.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::textio;

/// Assignment of `N` nodes to `n` non-empty, contiguously numbered blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    block_of: Vec<usize>,
    sizes: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl BlockPartition {
    /// Builds a partition from a node → block map.
    ///
    /// Block ids must be contiguous `0..n` and every block must be non-empty.
    pub fn from_assignment(block_of: Vec<usize>) -> Result<Self> {
        let n = block_of.iter().copied().max().map_or(0, |m| m + 1);
        let mut members = vec![Vec::new(); n];
        for (node, &b) in block_of.iter().enumerate() {
            members[b].push(node);
        }
        if let Some(empty) = members.iter().position(Vec::is_empty) {
            return Err(Error::domain(format!(
                "block ids must be contiguous: block {empty} has no nodes"
            )));
        }
        let sizes = members.iter().map(Vec::len).collect();
        Ok(Self {
            block_of,
            sizes,
            members,
        })
    }

    /// Total number of nodes `N`.
    pub fn num_nodes(&self) -> usize {
        self.block_of.len()
    }

    /// Number of blocks `n`.
    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn block_of(&self, node: usize) -> usize {
        self.block_of[node]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.block_of
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, block: usize) -> usize {
        self.sizes[block]
    }

    /// Node ids of `block`, in increasing order.
    pub fn members(&self, block: usize) -> &[usize] {
        &self.members[block]
    }

    /// Writes the partition as CSV with header `node,block`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("node,block\n");
        for (node, b) in self.block_of.iter().enumerate() {
            let _ = writeln!(out, "{node},{b}");
        }
        textio::write_text(path, &out)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let lines = textio::read_lines(path)?;
        let mut rows: Vec<(usize, usize)> = Vec::new();
        let mut seen_header = false;
        for (lineno, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !seen_header {
                seen_header = true;
                if line.replace(' ', "") != "node,block" {
                    return Err(Error::parse(path, lineno, "expected header `node,block`"));
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 2 {
                return Err(Error::parse(path, lineno, "expected two fields `node,block`"));
            }
            let node = textio::parse_usize(path, lineno, fields[0])?;
            let block = textio::parse_usize(path, lineno, fields[1])?;
            rows.push((node, block));
        }
        let n_nodes = rows.len();
        let mut block_of = vec![usize::MAX; n_nodes];
        for &(node, block) in &rows {
            if node >= n_nodes || block_of[node] != usize::MAX {
                return Err(Error::parse(
                    path,
                    0,
                    format!("node ids must be a permutation of 0..{n_nodes}; offending node {node}"),
                ));
            }
            block_of[node] = block;
        }
        Self::from_assignment(block_of).map_err(|e| Error::parse(path, 0, e.to_string()))
    }
}

/// Splits `num_nodes` nodes into `num_blocks` blocks of contiguous ids.
///
/// Without explicit sizes, the first `N mod n` blocks receive `ceil(N/n)`
/// nodes and the others `floor(N/n)`.
pub fn make_partition(
    num_nodes: usize,
    num_blocks: usize,
    sizes: Option<&[usize]>,
) -> Result<BlockPartition> {
    if num_blocks == 0 {
        return Err(Error::domain("the number of blocks must be at least 1"));
    }
    if num_blocks > num_nodes {
        return Err(Error::domain(format!(
            "cannot split {num_nodes} nodes into {num_blocks} non-empty blocks"
        )));
    }
    let sizes: Vec<usize> = match sizes {
        Some(s) => {
            if s.len() != num_blocks {
                return Err(Error::domain(format!(
                    "{} explicit sizes given for {num_blocks} blocks",
                    s.len()
                )));
            }
            if s.contains(&0) {
                return Err(Error::domain("explicit block sizes must be positive"));
            }
            if s.iter().sum::<usize>() != num_nodes {
                return Err(Error::domain(format!(
                    "explicit block sizes sum to {} instead of {num_nodes}",
                    s.iter().sum::<usize>()
                )));
            }
            s.to_vec()
        }
        None => {
            let base = num_nodes / num_blocks;
            let extra = num_nodes % num_blocks;
            (0..num_blocks)
                .map(|b| base + usize::from(b < extra))
                .collect()
        }
    };
    let block_of = sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
        .collect();
    BlockPartition::from_assignment(block_of)
}

/// Dense square matrix indexed by block pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    n: usize,
    data: Vec<f64>,
}

impl BlockMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds a matrix from rows; every row must have length `rows.len()`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::contract("matrix rows must all have length n"));
        }
        Ok(Self {
            n,
            data: rows.concat(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    /// Sum of all `n²` entries.
    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            (0..i).all(|j| {
                let (a, b) = (self.get(i, j), self.get(j, i));
                (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
            })
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Writes the matrix as CSV preceded by a `# <tag>` line.
    pub fn write_csv(&self, path: &Path, tag: &str) -> Result<()> {
        let mut out = format!("# {tag}\n");
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|v| textio::fmt_f64(*v)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        textio::write_text(path, &out)
    }

    /// Reads a matrix CSV; returns the matrix and the header tag (without `#`).
    pub fn read_csv(path: &Path) -> Result<(Self, Option<String>)> {
        let lines = textio::read_lines(path)?;
        let mut tag = None;
        let mut rows = Vec::new();
        for (lineno, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if tag.is_none() && rows.is_empty() {
                    tag = Some(rest.trim().to_string());
                }
                continue;
            }
            let row = line
                .split(',')
                .map(|f| textio::parse_f64(path, lineno, f))
                .collect::<Result<Vec<f64>>>()?;
            rows.push((lineno, row));
        }
        let n = rows.len();
        if let Some((lineno, _)) = rows.iter().find(|(_, r)| r.len() != n) {
            return Err(Error::parse(path, *lineno, format!("expected {n} columns")));
        }
        let rows: Vec<Vec<f64>> = rows.into_iter().map(|(_, r)| r).collect();
        Ok((Self::from_rows(&rows)?, tag))
    }
}

/// Scale convention of a [`MixingMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// Entries sum to 2.
    Normalized,
    /// Entries sum to `N * k` (twice the expected number of links).
    EdgeCounts,
}

impl Convention {
    pub fn tag(self) -> &'static str {
        match self {
            Convention::Normalized => "normalized",
            Convention::EdgeCounts => "edge-counts",
        }
    }
}

/// Symmetric, non-negative block mixing matrix with the doubled diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    entries: BlockMatrix,
    convention: Convention,
}

impl MixingMatrix {
    pub fn new(entries: BlockMatrix, convention: Convention) -> Result<Self> {
        if entries.as_slice().iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::contract("mixing matrix entries must be finite and non-negative"));
        }
        if !entries.is_symmetric(1e-12) {
            return Err(Error::contract("mixing matrix must be symmetric"));
        }
        Ok(Self {
            entries,
            convention,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], convention: Convention) -> Result<Self> {
        Self::new(BlockMatrix::from_rows(rows)?, convention)
    }

    pub fn dim(&self) -> usize {
        self.entries.dim()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(i, j)
    }

    pub fn entries(&self) -> &BlockMatrix {
        &self.entries
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Sum of all entries; the diagonal is doubled by convention, so for
    /// edge counts this is twice the number of links.
    pub fn total(&self) -> f64 {
        self.entries.total()
    }

    /// Row sums: total degree of each block.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries.row(i).iter().sum()).collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.entries.write_csv(path, self.convention.tag())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let (entries, tag) = BlockMatrix::read_csv(path)?;
        let convention = match tag.as_deref() {
            Some("normalized") => Convention::Normalized,
            Some("edge-counts") => Convention::EdgeCounts,
            other => {
                return Err(Error::parse(
                    path,
                    1,
                    format!("missing or unknown convention line {other:?}; expected `# normalized` or `# edge-counts`"),
                ))
            }
        };
        Self::new(entries, convention).map_err(|e| Error::parse(path, 0, e.to_string()))
    }
}

/// Parameters of the assortativity family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingParams {
    pub n: usize,
    pub rho: f64,
    pub q: f64,
}

impl MixingParams {
    pub fn new(n: usize, rho: f64, q: f64) -> Result<Self> {
        let p = Self { n, rho, q };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("n must be at least 1"));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::domain(format!("rho = {} outside [-1, 1]", self.rho)));
        }
        if !(self.q > 0.0 && self.q <= 1.0) {
            return Err(Error::domain(format!("q = {} outside (0, 1]", self.q)));
        }
        Ok(())
    }
}

/// Builds the normalized mixing matrix
/// `F = (rho+1)/n * I + (1-rho) / (2 * sum_{i=1..n} (n-i) q^i) * T`,
/// with `T[I][J] = q^|I-J|` off the diagonal and zero on it.
///
/// For `n = 1` the off-diagonal normalizer is an empty sum, so only
/// `rho = 1` is accepted and the result is `[[2]]`.
pub fn build_normalized_mixing(params: MixingParams) -> Result<MixingMatrix> {
    params.validate()?;
    let MixingParams { n, rho, q } = params;
    if n == 1 {
        if rho != 1.0 {
            return Err(Error::domain(
                "a single block has no off-diagonal mass: n = 1 requires rho = 1",
            ));
        }
        return MixingMatrix::from_rows(&[vec![2.0]], Convention::Normalized);
    }
    let diag = (rho + 1.0) / n as f64;
    let denom: f64 = (1..=n).map(|i| (n - i) as f64 * q.powi(i as i32)).sum();
    let off = (1.0 - rho) / (2.0 * denom);
    let mut m = BlockMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let v = if i == j {
                diag
            } else {
                off * q.powi(i.abs_diff(j) as i32)
            };
            m.set(i, j, v);
        }
    }
    MixingMatrix::new(m, Convention::Normalized)
}

/// Rescales a normalized matrix to edge counts: every entry is multiplied by
/// `M = N * k / 2`, so the result sums to `N * k`.
pub fn scale_mixing_to_edges(
    normalized: &MixingMatrix,
    num_nodes: usize,
    avg_degree: f64,
) -> Result<MixingMatrix> {
    if normalized.convention() != Convention::Normalized {
        return Err(Error::contract("expected a matrix in normalized form"));
    }
    if (normalized.total() - 2.0).abs() > 1e-9 {
        return Err(Error::contract(format!(
            "normalized mixing matrix sums to {} instead of 2",
            normalized.total()
        )));
    }
    if !(avg_degree.is_finite() && avg_degree >= 0.0) {
        return Err(Error::domain("average degree must be finite and non-negative"));
    }
    let m = num_nodes as f64 * avg_degree / 2.0;
    MixingMatrix::new(normalized.entries().scaled(m), Convention::EdgeCounts)
}

/// Kind of target infeasibility found by [`validate_targets`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `F_IJ > N_I N_J` for `I != J`.
    InterBlockOverflow { i: usize, j: usize, target: f64, capacity: f64 },
    /// `F_II > N_I (N_I - 1)` (doubled diagonal).
    IntraBlockOverflow { block: usize, target: f64, capacity: f64 },
    /// `f_i F_IJ` is at least the number of admissible neighbours of `i` in `J`.
    BlockDegreeSaturated { node: usize, block: usize, target: f64, available: usize },
    /// `f_i sum_J F_IJ >= N - 1`.
    DegreeSaturated { node: usize, target: f64, available: usize },
    /// `f_i sum_J F_IJ` exceeds the most links node `i` can have without
    /// breaking a block link target: `min(N_I - 1, F_II / 2)` inside its
    /// block plus `min(N_J, F_IJ)` towards every other block.
    DegreeUnreachable { node: usize, target: f64, capacity: f64 },
    NonPositiveShare { node: usize, share: f64 },
    /// The shares of a block do not sum to one.
    ShareNormalization { block: usize, sum: f64 },
}

impl Violation {
    /// Hard violations make a target impossible on its own. Warnings mark
    /// targets that calibration cannot meet jointly; it still runs and
    /// reports the residual floor.
    pub fn is_hard(&self) -> bool {
        !matches!(
            self,
            Violation::BlockDegreeSaturated { .. } | Violation::DegreeUnreachable { .. }
        )
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::InterBlockOverflow { i, j, target, capacity } => {
                write!(f, "F[{i}][{j}] = {target} exceeds N_I*N_J = {capacity}")
            }
            Violation::IntraBlockOverflow { block, target, capacity } => {
                write!(f, "F[{block}][{block}] = {target} exceeds N_I*(N_I-1) = {capacity}")
            }
            Violation::BlockDegreeSaturated { node, block, target, available } => write!(
                f,
                "node {node}: target degree {target:.3} towards block {block} reaches available {available}"
            ),
            Violation::DegreeSaturated { node, target, available } => write!(
                f,
                "node {node}: target degree {target:.3} reaches available {available}"
            ),
            Violation::DegreeUnreachable { node, target, capacity } => write!(
                f,
                "node {node}: target degree {target:.3} exceeds reachable {capacity:.3}"
            ),
            Violation::NonPositiveShare { node, share } => {
                write!(f, "node {node}: share {share} is not positive")
            }
            Violation::ShareNormalization { block, sum } => {
                write!(f, "block {block}: shares sum to {sum} instead of 1")
            }
        }
    }
}

/// Outcome of [`validate_targets`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_hard(&self) -> bool {
        self.violations.iter().any(Violation::is_hard)
    }

    pub fn hard(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.is_hard())
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| !v.is_hard())
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for v in &self.violations {
            let level = if v.is_hard() { "error" } else { "warning" };
            writeln!(f, "{level}: {v}")?;
        }
        Ok(())
    }
}

/// Checks edge-count targets and node shares for feasibility.
pub fn validate_targets(
    targets: &MixingMatrix,
    partition: &BlockPartition,
    shares: &[f64],
) -> ValidationReport {
    let mut violations = Vec::new();
    let n = partition.num_blocks();
    let sizes = partition.sizes();
    for i in 0..n.min(targets.dim()) {
        for j in i..n.min(targets.dim()) {
            let target = targets.get(i, j);
            if i == j {
                let capacity = (sizes[i] * (sizes[i] - 1)) as f64;
                if target > capacity {
                    violations.push(Violation::IntraBlockOverflow { block: i, target, capacity });
                }
            } else {
                let capacity = (sizes[i] * sizes[j]) as f64;
                if target > capacity {
                    violations.push(Violation::InterBlockOverflow { i, j, target, capacity });
                }
            }
        }
    }
    for block in 0..n {
        let sum: f64 = partition.members(block).iter().map(|&v| shares[v]).sum();
        if (sum - 1.0).abs() > 1e-9 {
            violations.push(Violation::ShareNormalization { block, sum });
        }
    }
    let row_sums = targets.row_sums();
    let num_nodes = partition.num_nodes();
    for (node, &share) in shares.iter().enumerate() {
        if share <= 0.0 {
            violations.push(Violation::NonPositiveShare { node, share });
            continue;
        }
        let own = partition.block_of(node);
        let total = share * row_sums[own];
        if total >= (num_nodes - 1) as f64 {
            violations.push(Violation::DegreeSaturated {
                node,
                target: total,
                available: num_nodes - 1,
            });
        } else {
            let capacity: f64 = sizes
                .iter()
                .enumerate()
                .map(|(block, &size)| {
                    let f = targets.get(own, block);
                    if block == own {
                        ((size - 1) as f64).min(f / 2.0)
                    } else {
                        (size as f64).min(f)
                    }
                })
                .sum();
            if total > capacity {
                violations.push(Violation::DegreeUnreachable { node, target: total, capacity });
            }
        }
        for (block, &size) in sizes.iter().enumerate() {
            let target = share * targets.get(own, block);
            let available = size - usize::from(block == own);
            if target > 0.0 && target >= available as f64 {
                violations.push(Violation::BlockDegreeSaturated { node, block, target, available });
            }
        }
    }
    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn assortative_limit_is_diagonal() {
        let f = build_normalized_mixing(MixingParams::new(4, 1.0, 0.5).unwrap()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 0.5 } else { 0.0 };
                assert_eq!(f.get(i, j), want);
            }
        }
    }

    #[test]
    fn uniform_two_blocks() {
        let f = build_normalized_mixing(MixingParams::new(2, 0.0, 1.0).unwrap()).unwrap();
        for v in f.entries().as_slice() {
            assert_abs_diff_eq!(*v, 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn disassortative_three_blocks() {
        let f = build_normalized_mixing(MixingParams::new(3, -1.0, 0.5).unwrap()).unwrap();
        assert_abs_diff_eq!(f.get(0, 0), 0.0);
        assert_abs_diff_eq!(f.get(0, 1), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(f.get(1, 2), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(f.get(0, 2), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(f.total(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn single_block_requires_rho_one() {
        let f = build_normalized_mixing(MixingParams::new(1, 1.0, 0.3).unwrap()).unwrap();
        assert_eq!(f.entries().as_slice(), &[2.0]);
        assert!(matches!(
            build_normalized_mixing(MixingParams { n: 1, rho: 0.5, q: 1.0 }),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn out_of_range_parameters() {
        assert!(MixingParams::new(3, 1.5, 1.0).is_err());
        assert!(MixingParams::new(3, 0.0, 0.0).is_err());
        assert!(MixingParams::new(3, 0.0, 1.01).is_err());
        assert!(MixingParams::new(0, 0.0, 1.0).is_err());
    }

    #[test]
    fn scaling_examples() {
        let f = MixingMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]], Convention::Normalized)
            .unwrap();
        let s = scale_mixing_to_edges(&f, 3000, 10.0).unwrap();
        assert_eq!(s.entries().as_slice(), &[7500.0; 4]);
        assert_eq!(s.convention(), Convention::EdgeCounts);

        let z = scale_mixing_to_edges(&f, 0, 10.0).unwrap();
        assert_eq!(z.total(), 0.0);

        let one = MixingMatrix::from_rows(&[vec![2.0]], Convention::Normalized).unwrap();
        let s = scale_mixing_to_edges(&one, 1000, 5.0).unwrap();
        assert_eq!(s.get(0, 0), 5000.0);
    }

    #[test]
    fn scaling_rejects_unnormalized() {
        let f = MixingMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]], Convention::Normalized)
            .unwrap();
        assert!(matches!(scale_mixing_to_edges(&f, 10, 2.0), Err(Error::Contract(_))));
        let e = MixingMatrix::from_rows(&[vec![2.0]], Convention::EdgeCounts).unwrap();
        assert!(matches!(scale_mixing_to_edges(&e, 10, 2.0), Err(Error::Contract(_))));
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let r = MixingMatrix::from_rows(&[vec![1.0, 0.2], vec![0.3, 1.0]], Convention::Normalized);
        assert!(r.is_err());
    }

    #[test]
    fn partition_defaults() {
        assert_eq!(make_partition(10, 3, None).unwrap().sizes(), &[4, 3, 3]);
        assert_eq!(make_partition(3000, 10, None).unwrap().sizes(), &[300; 10]);
        let p = make_partition(5, 5, None).unwrap();
        assert_eq!(p.sizes(), &[1; 5]);
        assert_eq!(p.assignment(), &[0, 1, 2, 3, 4]);
        let p = make_partition(10, 3, None).unwrap();
        assert_eq!(p.assignment(), &[0, 0, 0, 0, 1, 1, 1, 2, 2, 2]);
        assert_eq!(p.members(1), &[4, 5, 6]);
    }

    #[test]
    fn partition_errors() {
        assert!(make_partition(3, 4, None).is_err());
        assert!(make_partition(10, 2, Some(&[5, 4])).is_err());
        assert!(make_partition(10, 2, Some(&[10, 0])).is_err());
        assert_eq!(make_partition(10, 2, Some(&[7, 3])).unwrap().sizes(), &[7, 3]);
        assert!(BlockPartition::from_assignment(vec![0, 2, 2]).is_err());
    }

    #[test]
    fn inter_block_capacity_boundary() {
        let part = make_partition(4, 2, None).unwrap();
        let f = vec![0.5; 4];
        let ok = MixingMatrix::from_rows(&[vec![0.0, 4.0], vec![4.0, 0.0]], Convention::EdgeCounts)
            .unwrap();
        let report = validate_targets(&ok, &part, &f);
        assert!(!report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::InterBlockOverflow { .. })));
        let bad = MixingMatrix::from_rows(&[vec![0.0, 5.0], vec![5.0, 0.0]], Convention::EdgeCounts)
            .unwrap();
        let report = validate_targets(&bad, &part, &f);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::InterBlockOverflow { i: 0, j: 1, .. })));
        assert!(report.has_hard());
    }

    #[test]
    fn hub_beyond_block_budgets_is_unreachable() {
        // Node 0 wants 0.7 * 24 = 16.8 links but can have at most
        // min(9, 20 / 2) inside its block and min(10, 4) towards block 1.
        let part = make_partition(20, 2, None).unwrap();
        let mut f = vec![0.3 / 9.0; 10];
        f[0] = 0.7;
        f.extend([0.1; 10]);
        let targets =
            MixingMatrix::from_rows(&[vec![20.0, 4.0], vec![4.0, 20.0]], Convention::EdgeCounts)
                .unwrap();
        let report = validate_targets(&targets, &part, &f);
        let hit = report.violations.iter().find_map(|v| match v {
            Violation::DegreeUnreachable { node: 0, target, capacity } => Some((*target, *capacity)),
            _ => None,
        });
        let (target, capacity) = hit.expect("node 0 is unreachable");
        assert_abs_diff_eq!(target, 16.8, epsilon = 1e-12);
        assert_abs_diff_eq!(capacity, 13.0, epsilon = 1e-12);
        assert!(!report.has_hard());
        assert_eq!(report.violations.iter().filter(|v| matches!(v, Violation::DegreeUnreachable { .. })).count(), 1);
    }

    #[test]
    fn saturated_block_degree_is_a_warning() {
        // Block 0 = {0, 1} with shares 0.9 / 0.1, block 1 has 5 nodes.
        let part = make_partition(7, 2, Some(&[2, 5])).unwrap();
        let f = vec![0.9, 0.1, 0.2, 0.2, 0.2, 0.2, 0.2];
        let targets =
            MixingMatrix::from_rows(&[vec![0.0, 6.0], vec![6.0, 0.0]], Convention::EdgeCounts)
                .unwrap();
        let report = validate_targets(&targets, &part, &f);
        let hit = report.violations.iter().find_map(|v| match v {
            Violation::BlockDegreeSaturated { node: 0, block: 1, target, available } => {
                Some((*target, *available))
            }
            _ => None,
        });
        let (target, available) = hit.expect("node 0 should saturate block 1");
        assert_abs_diff_eq!(target, 5.4, epsilon = 1e-12);
        assert_eq!(available, 5);
        assert!(!report.has_hard(), "{report}");
    }

    #[test]
    fn intra_capacity_and_bad_shares() {
        let part = make_partition(4, 2, None).unwrap();
        let targets =
            MixingMatrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 2.0]], Convention::EdgeCounts)
                .unwrap();
        let report = validate_targets(&targets, &part, &[0.5, 0.5, 1.0, 0.0]);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::IntraBlockOverflow { block: 0, .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NonPositiveShare { node: 3, .. })));
    }

    #[test]
    fn matrix_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mixing.csv");
        let f = build_normalized_mixing(MixingParams::new(5, 0.3, 0.75).unwrap()).unwrap();
        f.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# normalized\n"));
        assert_eq!(MixingMatrix::read_csv(&path).unwrap(), f);

        let ppath = dir.path().join("partition.csv");
        let p = make_partition(11, 4, None).unwrap();
        p.write_csv(&ppath).unwrap();
        assert_eq!(BlockPartition::read_csv(&ppath).unwrap(), p);
    }
}
