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

//! Evaluation of externally inferred `S^D` embeddings.
//!
//! An embedding gives every node a hidden degree `κ_i` and a unit vector in
//! `D + 1` dimensions, plus global `β`, `μ` and sphere radius `R`. Pairs
//! connect with `p_ij = 1 / (1 + (R Δθ_ij / (μ κ_i κ_j)^{1/D})^β)`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generate::{connection_probability, sample_with, S1Params};
use crate::graph::Graph;
use crate::mixing::{BlockMatrix, BlockPartition, Convention, MixingMatrix};
use crate::rng::CounterRng;
use crate::textio;

/// Norm deviation accepted (and corrected) when loading positions.
pub const NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSD {
    dim: usize,
    kappa: Vec<f64>,
    /// Row-major `N × (D + 1)`.
    positions: Vec<f64>,
    beta: f64,
    mu: f64,
    radius: f64,
}

/// `Γ(k/2)` for a positive integer `k`.
fn gamma_half_integer(k: usize) -> f64 {
    let mut x = if k % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut arg = if k % 2 == 0 { 1.0 } else { 0.5 };
    let target = k as f64 / 2.0;
    while arg < target {
        x *= arg;
        arg += 1.0;
    }
    x
}

/// Radius giving unit node density on `S^D`: `(N / |S^D|)^{1/D}` with
/// `|S^D| = 2 π^{(D+1)/2} / Γ((D+1)/2)`.
pub fn default_sphere_radius(num_nodes: usize, dim: usize) -> f64 {
    let area = 2.0 * PI.powf((dim + 1) as f64 / 2.0) / gamma_half_integer(dim + 1);
    (num_nodes as f64 / area).powf(1.0 / dim as f64)
}

impl EmbeddingSD {
    /// Checks every invariant; positions must already have unit norm within 1e-9.
    pub fn new(dim: usize, kappa: Vec<f64>, positions: Vec<f64>, beta: f64, mu: f64, radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("embedding dimension must be at least 1"));
        }
        if positions.len() != kappa.len() * (dim + 1) {
            return Err(Error::contract(format!(
                "{} coordinates for {} nodes in dimension {dim}",
                positions.len(),
                kappa.len()
            )));
        }
        if let Some(i) = kappa.iter().position(|&k| !(k > 0.0 && k.is_finite())) {
            return Err(Error::domain(format!("hidden degree of node {i} must be positive")));
        }
        if !(beta > dim as f64 && beta > 1.0 && beta.is_finite()) {
            return Err(Error::domain(format!("beta = {beta} must exceed max(D, 1) = {}", dim.max(1))));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::domain(format!("mu = {mu} must be positive")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!("radius = {radius} must be positive")));
        }
        for (i, p) in positions.chunks(dim + 1).enumerate() {
            let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
                return Err(Error::contract(format!("position of node {i} has norm {norm}")));
            }
        }
        Ok(Self {
            dim,
            kappa,
            positions,
            beta,
            mu,
            radius,
        })
    }

    /// A `D = 1` embedding equivalent to a one-dimensional parameter set with
    /// the given angles.
    pub fn from_s1(params: &S1Params, theta: &[f64]) -> Result<Self> {
        if theta.len() != params.num_nodes() {
            return Err(Error::contract("one angle per node is required"));
        }
        let positions = theta.iter().flat_map(|t| [t.cos(), t.sin()]).collect();
        Self::new(1, params.kappa.clone(), positions, params.beta, params.mu, params.radius)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_nodes(&self) -> usize {
        self.kappa.len()
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * (self.dim + 1)..(i + 1) * (self.dim + 1)]
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    #[inline]
    fn pair_probability(&self, i: usize, j: usize) -> f64 {
        let dot: f64 = self
            .position(i)
            .iter()
            .zip(self.position(j))
            .map(|(a, b)| a * b)
            .sum();
        let distance = self.radius * dot.clamp(-1.0, 1.0).acos();
        let scale = (self.mu * self.kappa[i] * self.kappa[j]).powf(1.0 / self.dim as f64);
        connection_probability(distance, scale, self.beta)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = format!(
            "# D={} beta={} mu={} R={}\nnode,kappa",
            self.dim,
            textio::fmt_f64(self.beta),
            textio::fmt_f64(self.mu),
            textio::fmt_f64(self.radius)
        );
        for c in 1..=self.dim + 1 {
            let _ = write!(out, ",x{c}");
        }
        out.push('\n');
        for i in 0..self.num_nodes() {
            let _ = write!(out, "{i},{}", textio::fmt_f64(self.kappa[i]));
            for x in self.position(i) {
                let _ = write!(out, ",{}", textio::fmt_f64(*x));
            }
            out.push('\n');
        }
        textio::write_text(path, &out)
    }
}

/// Renormalizes a position read from `path:line`, rejecting large deviations.
fn unit_position(path: &Path, line: usize, mut p: Vec<f64>) -> Result<Vec<f64>> {
    let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::parse(path, line, format!("position has norm {norm}, expected 1")));
    }
    for x in &mut p {
        *x /= norm;
    }
    Ok(p)
}

/// Reads the embedding CSV: a `# D=.. beta=.. mu=.. R=..` line (R optional),
/// a `node,kappa,x1,...,x{D+1}` header and one row per node.
pub fn load_embedding(path: &Path) -> Result<EmbeddingSD> {
    let lines = textio::read_lines(path)?;
    let (mut dim, mut beta, mut mu, mut radius) = (None, None, None, None);
    let mut rows: Vec<(usize, usize, f64, Vec<f64>)> = Vec::new();
    let mut seen_header = false;
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            for (k, v) in textio::parse_kv_tokens(rest) {
                match k.as_str() {
                    "D" => dim = Some(textio::parse_usize(path, lineno, &v)?),
                    "beta" => beta = Some(textio::parse_f64(path, lineno, &v)?),
                    "mu" => mu = Some(textio::parse_f64(path, lineno, &v)?),
                    "R" => radius = Some(textio::parse_f64(path, lineno, &v)?),
                    _ => {}
                }
            }
            continue;
        }
        let d = dim.ok_or_else(|| Error::parse(path, lineno, "missing `# D=..` header before data"))?;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !seen_header {
            seen_header = true;
            if fields.first() == Some(&"node") {
                if fields.len() != d + 3 {
                    return Err(Error::parse(path, lineno, format!("expected {} columns for D={d}", d + 3)));
                }
                continue;
            }
        }
        if fields.len() != d + 3 {
            return Err(Error::parse(path, lineno, format!("expected {} fields, got {}", d + 3, fields.len())));
        }
        let node = textio::parse_usize(path, lineno, fields[0])?;
        let kappa = textio::parse_f64(path, lineno, fields[1])?;
        if !(kappa > 0.0) {
            return Err(Error::parse(path, lineno, format!("hidden degree {kappa} must be positive")));
        }
        let pos = fields[2..]
            .iter()
            .map(|f| textio::parse_f64(path, lineno, f))
            .collect::<Result<Vec<f64>>>()?;
        rows.push((lineno, node, kappa, unit_position(path, lineno, pos)?));
    }
    let dim = dim.ok_or_else(|| Error::parse(path, 1, "missing D in header"))?;
    let beta = beta.ok_or_else(|| Error::parse(path, 1, "missing beta in header"))?;
    let mu = mu.ok_or_else(|| Error::parse(path, 1, "missing mu in header"))?;
    assemble(path, dim, beta, mu, radius, rows)
}

fn assemble(
    path: &Path,
    dim: usize,
    beta: f64,
    mu: f64,
    radius: Option<f64>,
    rows: Vec<(usize, usize, f64, Vec<f64>)>,
) -> Result<EmbeddingSD> {
    let n = rows.len();
    let mut kappa = vec![0.0; n];
    let mut positions = vec![0.0; n * (dim + 1)];
    let mut seen = vec![false; n];
    for (lineno, node, k, pos) in rows {
        if node >= n || seen[node] {
            return Err(Error::parse(
                path,
                lineno,
                format!("node ids must be a permutation of 0..{n}; offending node {node}"),
            ));
        }
        seen[node] = true;
        kappa[node] = k;
        positions[node * (dim + 1)..(node + 1) * (dim + 1)].copy_from_slice(&pos);
    }
    let radius = radius.unwrap_or_else(|| default_sphere_radius(n, dim));
    EmbeddingSD::new(dim, kappa, positions, beta, mu, radius).map_err(|e| Error::parse(path, 0, e.to_string()))
}

/// Converts a whitespace-separated coordinate file in the layout written by
/// common `S^D` embedders: `#` comment lines carrying `beta:`, `mu:` and
/// `radius...:` entries, then rows `vertex kappa hyperbolic_radius x1 .. x{D+1}`.
/// Vertex labels must be the integer node ids of the embedded graph.
pub fn convert_embedder_coordinates(path: &Path, dim: usize) -> Result<EmbeddingSD> {
    let lines = textio::read_lines(path)?;
    let (mut beta, mut mu, mut radius) = (None, None, None);
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim().trim_start_matches('-').trim();
            if let Some((key, value)) = rest.split_once(':') {
                let key = key.trim().to_ascii_lowercase();
                let Ok(v) = value.trim().parse::<f64>() else { continue };
                if key == "beta" {
                    beta = Some(v);
                } else if key == "mu" {
                    mu = Some(v);
                } else if key.starts_with("radius") {
                    radius = Some(v);
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != dim + 4 {
            return Err(Error::parse(path, lineno, format!("expected {} columns, got {}", dim + 4, fields.len())));
        }
        let node = textio::parse_usize(path, lineno, fields[0])?;
        let kappa = textio::parse_f64(path, lineno, fields[1])?;
        let pos = fields[3..]
            .iter()
            .map(|f| textio::parse_f64(path, lineno, f))
            .collect::<Result<Vec<f64>>>()?;
        rows.push((lineno, node, kappa, unit_position(path, lineno, pos)?));
    }
    let beta = beta.ok_or_else(|| Error::parse(path, 1, "no `beta:` entry in comments"))?;
    let mu = mu.ok_or_else(|| Error::parse(path, 1, "no `mu:` entry in comments"))?;
    assemble(path, dim, beta, mu, radius, rows)
}

/// Probability of the pair `(i, j)`; `Δθ = arccos⟨u_i, u_j⟩` with the dot
/// product clamped to `[-1, 1]`.
pub fn sd_edge_probability(e: &EmbeddingSD, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::contract(format!("no self-pairs: i = j = {i}")));
    }
    if i.max(j) >= e.num_nodes() {
        return Err(Error::contract(format!("pair ({i}, {j}) outside 0..{}", e.num_nodes())));
    }
    Ok(e.pair_probability(i, j))
}

/// Expected degree of each node towards each block, `N × n` row-major.
fn expected_block_sums(e: &EmbeddingSD, partition: &BlockPartition) -> Vec<f64> {
    let n_blocks = partition.num_blocks();
    let mut data = vec![0.0; e.num_nodes() * n_blocks];
    data.par_chunks_mut(n_blocks.max(1)).enumerate().for_each(|(i, row)| {
        for j in 0..e.num_nodes() {
            if j != i {
                row[partition.block_of(j)] += e.pair_probability(i, j);
            }
        }
    });
    data
}

/// `F_out[I][J] = Σ_{i∈I, j∈J, i≠j} p_ij`; intra-block pairs are counted in
/// both orders, giving the doubled diagonal.
pub fn expected_mixing_from_embedding(e: &EmbeddingSD, partition: &BlockPartition) -> Result<MixingMatrix> {
    if partition.num_nodes() != e.num_nodes() {
        return Err(Error::contract(format!(
            "partition has {} nodes, embedding {}",
            partition.num_nodes(),
            e.num_nodes()
        )));
    }
    let n = partition.num_blocks();
    let sums = expected_block_sums(e, partition);
    let mut m = BlockMatrix::zeros(n);
    for i in 0..e.num_nodes() {
        let a = partition.block_of(i);
        for b in 0..n {
            m.set(a, b, m.get(a, b) + sums[i * n + b]);
        }
    }
    // Row-wise sums are symmetric only up to rounding.
    for a in 0..n {
        for b in a + 1..n {
            let v = 0.5 * (m.get(a, b) + m.get(b, a));
            m.set(a, b, v);
            m.set(b, a, v);
        }
    }
    MixingMatrix::new(m, Convention::EdgeCounts)
}

/// `⟨deg_i⟩ = Σ_{j≠i} p_ij`.
pub fn expected_degrees_from_embedding(e: &EmbeddingSD) -> Vec<f64> {
    (0..e.num_nodes())
        .into_par_iter()
        .map(|i| {
            (0..e.num_nodes())
                .filter(|&j| j != i)
                .map(|j| e.pair_probability(i, j))
                .sum()
        })
        .collect()
}

/// `count` independent graphs; graph `k` uses the seed derived from `(rng, k)`.
pub fn sample_graphs_from_embedding(e: &EmbeddingSD, count: usize, rng: &CounterRng) -> Result<Vec<Graph>> {
    if count == 0 {
        return Err(Error::domain("at least one sample is required"));
    }
    Ok((0..count)
        .map(|k| sample_with(e.num_nodes(), &rng.derive(k as u64), |i, j| e.pair_probability(i, j)))
        .collect())
}
