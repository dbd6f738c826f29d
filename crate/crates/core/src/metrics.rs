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

//! Empirical graph statistics and the reconstruction error metrics.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mixing::{BlockMatrix, BlockPartition, Convention, MixingMatrix};

/// Realized mixing matrix: `L_IJ` inter-block edges for `I != J`, twice the
/// intra-block edges on the diagonal.
pub fn empirical_mixing(g: &Graph, partition: &BlockPartition) -> Result<MixingMatrix> {
    if g.num_nodes() > partition.num_nodes() {
        return Err(Error::contract(format!(
            "node {} is not covered by the partition of {} nodes",
            g.num_nodes() - 1,
            partition.num_nodes()
        )));
    }
    let n = partition.num_blocks();
    let mut m = BlockMatrix::zeros(n);
    for &(i, j) in g.edges() {
        let (a, b) = (partition.block_of(i), partition.block_of(j));
        m.set(a, b, m.get(a, b) + 1.0);
        m.set(b, a, m.get(b, a) + 1.0);
    }
    MixingMatrix::new(m, Convention::EdgeCounts)
}

pub fn degree_sequence(g: &Graph) -> Vec<usize> {
    let mut deg = vec![0; g.num_nodes()];
    for &(i, j) in g.edges() {
        deg[i] += 1;
        deg[j] += 1;
    }
    deg
}

/// Number of triangles through each node, by sorted-adjacency intersection.
pub fn triangles_per_node(g: &Graph) -> Vec<usize> {
    let adj = g.adjacency();
    let mut t = vec![0; g.num_nodes()];
    for &(i, j) in g.edges() {
        // Common neighbours k > j: each triangle i < j < k is seen once.
        let (a, b) = (&adj[i], &adj[j]);
        let (mut x, mut y) = (a.partition_point(|&k| k <= j), b.partition_point(|&k| k <= j));
        while x < a.len() && y < b.len() {
            match a[x].cmp(&b[y]) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    t[i] += 1;
                    t[j] += 1;
                    t[a[x]] += 1;
                    x += 1;
                    y += 1;
                }
            }
        }
    }
    t
}

/// Transitivity: `3 × triangles / paths of length two`; 0 without such paths.
pub fn global_clustering(g: &Graph) -> f64 {
    let triangles: usize = triangles_per_node(g).iter().sum::<usize>() / 3;
    let triplets: usize = degree_sequence(g)
        .iter()
        .map(|&d| d * d.saturating_sub(1) / 2)
        .sum();
    if triplets == 0 {
        0.0
    } else {
        3.0 * triangles as f64 / triplets as f64
    }
}

/// How nodes of degree below two enter the average local clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LowDegreeNodes {
    /// Count them with `c_i = 0`.
    #[default]
    AsZero,
    /// Leave them out of the mean.
    Excluded,
}

/// Mean of `c_i = 2 t_i / (d_i (d_i - 1))` over all nodes (nodes with
/// `d_i < 2` contribute zero).
pub fn average_local_clustering(g: &Graph) -> f64 {
    average_local_clustering_with(g, LowDegreeNodes::AsZero)
}

pub fn average_local_clustering_with(g: &Graph, low: LowDegreeNodes) -> f64 {
    let t = triangles_per_node(g);
    let d = degree_sequence(g);
    let mut sum = 0.0;
    let mut count = 0usize;
    for (&ti, &di) in t.iter().zip(&d) {
        if di < 2 {
            if low == LowDegreeNodes::AsZero {
                count += 1;
            }
            continue;
        }
        sum += 2.0 * ti as f64 / (di * (di - 1)) as f64;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// `‖F_out - F_in‖₁ / ‖F_in‖₁` with the entrywise L1 norm.
pub fn mixing_relative_error(out: &MixingMatrix, input: &MixingMatrix) -> Result<f64> {
    if out.dim() != input.dim() {
        return Err(Error::contract(format!(
            "mixing matrices of size {} and {}",
            out.dim(),
            input.dim()
        )));
    }
    if out.convention() != input.convention() {
        return Err(Error::contract("mixing matrices use different conventions"));
    }
    let denom: f64 = input.entries().as_slice().iter().map(|v| v.abs()).sum();
    if denom == 0.0 {
        return Err(Error::domain("reference mixing matrix is zero"));
    }
    let num: f64 = out
        .entries()
        .as_slice()
        .iter()
        .zip(input.entries().as_slice())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(num / denom)
}

/// `|C - C_in| / C_in`.
pub fn clustering_relative_error(c: f64, c_in: f64) -> Result<f64> {
    if !(c_in > 0.0) {
        return Err(Error::domain(format!("reference clustering {c_in} must be positive")));
    }
    Ok((c - c_in).abs() / c_in)
}

/// Summary statistics of one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub num_nodes: usize,
    pub num_edges: usize,
    pub mixing: MixingMatrix,
    pub degrees: Vec<usize>,
    pub global_clustering: f64,
    pub average_local_clustering: f64,
    pub mean_degree: f64,
    pub isolated_nodes: usize,
}

impl StatsReport {
    pub fn compute(g: &Graph, partition: &BlockPartition) -> Result<Self> {
        let degrees = degree_sequence(g);
        let mean_degree = if g.num_nodes() == 0 {
            0.0
        } else {
            2.0 * g.num_edges() as f64 / g.num_nodes() as f64
        };
        Ok(Self {
            num_nodes: g.num_nodes(),
            num_edges: g.num_edges(),
            mixing: empirical_mixing(g, partition)?,
            isolated_nodes: degrees.iter().filter(|&&d| d == 0).count(),
            degrees,
            global_clustering: global_clustering(g),
            average_local_clustering: average_local_clustering(g),
            mean_degree,
        })
    }

    pub const CSV_HEADER: &'static str =
        "nodes,edges,mean_degree,isolated_nodes,global_clustering,average_local_clustering";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.num_nodes,
            self.num_edges,
            self.mean_degree,
            self.isolated_nodes,
            self.global_clustering,
            self.average_local_clustering
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::CSV_HEADER, self.csv_row())
    }
}
