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

//! Graph sampling from latent states.
//!
//! All samplers draw one Bernoulli variable per unordered pair, using the
//! pair-keyed uniforms of [`CounterRng`]. The direct and the blockwise
//! constructions therefore produce identical edge sets for the same seed.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::calibration::LatentState;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::CounterRng;

/// Shortest arc between two angles, in `[0, π]`.
#[inline]
pub fn angular_separation(a: f64, b: f64) -> f64 {
    PI - (PI - (a - b).abs()).abs()
}

/// `1 / (1 + (distance/scale)^β)`, the Fermi–Dirac-like connection law.
#[inline]
pub fn connection_probability(distance: f64, scale: f64, beta: f64) -> f64 {
    if !(scale > 0.0) {
        return 0.0;
    }
    if distance <= 0.0 {
        return 1.0;
    }
    let r = distance / scale;
    let t = if beta == 2.0 { r * r } else { r.powf(beta) };
    1.0 / (1.0 + t)
}

/// Edge probability of the pair `(i, j)` in `state`.
pub fn edge_probability(i: usize, j: usize, state: &LatentState) -> Result<f64> {
    if i == j {
        return Err(Error::contract(format!("no self-pairs: i = j = {i}")));
    }
    let n = state.num_nodes();
    if i >= n || j >= n {
        return Err(Error::contract(format!("pair ({i}, {j}) outside 0..{n}")));
    }
    Ok(pair_probability(state, i, j))
}

#[inline]
fn pair_probability(state: &LatentState, i: usize, j: usize) -> f64 {
    let theta = state.theta();
    let distance = state.radius() * angular_separation(theta[i], theta[j]);
    connection_probability(distance, state.pair_scale(i, j), state.beta())
}

/// Samples a graph with independent edges, pair `(i, j)` present when its
/// keyed uniform falls below `prob(i, j)`.
pub fn sample_with<F>(num_nodes: usize, rng: &CounterRng, prob: F) -> Graph
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let rows: Vec<Vec<(usize, usize)>> = (0..num_nodes)
        .into_par_iter()
        .map(|i| {
            let mut row = rng.pair_row(i);
            let mut out = Vec::new();
            for j in i + 1..num_nodes {
                if row.uniform_at(j) < prob(i, j) {
                    out.push((i, j));
                }
            }
            out
        })
        .collect();
    Graph::from_sorted_unchecked(num_nodes, rows.concat())
}

/// Direct sampler: every pair once, with its state probability.
pub fn sample_graph(state: &LatentState, rng: &CounterRng) -> Graph {
    sample_with(state.num_nodes(), rng, |i, j| pair_probability(state, i, j))
}

/// Edges of the mono- (`a == b`) or bipartite (`a != b`) subgraph between
/// blocks `a` and `b`, sharing the state's angles and fitnesses.
pub fn sample_block_pair(state: &LatentState, a: usize, b: usize, rng: &CounterRng) -> Vec<(usize, usize)> {
    let part = state.partition();
    let mut edges = Vec::new();
    let mut scan = |rows: &[usize], cols: &[usize]| {
        for &i in rows {
            let mut row = rng.pair_row(i);
            for &j in cols.iter().filter(|&&j| j > i) {
                if row.uniform_at(j) < pair_probability(state, i, j) {
                    edges.push((i, j));
                }
            }
        }
    };
    scan(part.members(a), part.members(b));
    if a != b {
        scan(part.members(b), part.members(a));
    }
    edges
}

/// Blockwise sampler: union over block pairs `I ≤ J` of the per-pair subgraphs.
pub fn sample_graph_blockwise(state: &LatentState, rng: &CounterRng) -> Graph {
    let n = state.partition().num_blocks();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
    let mut edges: Vec<(usize, usize)> = pairs
        .par_iter()
        .map(|&(a, b)| sample_block_pair(state, a, b, rng))
        .collect::<Vec<_>>()
        .concat();
    edges.sort_unstable();
    Graph::from_sorted_unchecked(state.num_nodes(), edges)
}

/// Parameters of the one-dimensional geometric baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct S1Params {
    pub kappa: Vec<f64>,
    pub beta: f64,
    pub mu: f64,
    pub radius: f64,
}

impl S1Params {
    pub fn new(kappa: Vec<f64>, beta: f64, mu: f64, radius: f64) -> Result<Self> {
        if let Some(i) = kappa.iter().position(|&k| !(k > 0.0 && k.is_finite())) {
            return Err(Error::domain(format!("hidden degree of node {i} must be positive")));
        }
        if !(beta > 1.0 && beta.is_finite()) {
            return Err(Error::domain(format!("beta = {beta} must exceed 1")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::domain(format!("mu = {mu} must be positive")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!("radius = {radius} must be positive")));
        }
        Ok(Self {
            kappa,
            beta,
            mu,
            radius,
        })
    }

    /// Unit density (`R = N/2π`) and `μ = β sin(π/β) / (2π ⟨κ⟩)`, so that
    /// expected degrees approach the hidden degrees for large `N`.
    pub fn with_default_density(kappa: Vec<f64>, beta: f64) -> Result<Self> {
        let n = kappa.len();
        if n == 0 {
            return Err(Error::domain("at least one node is required"));
        }
        let mean = kappa.iter().sum::<f64>() / n as f64;
        let mu = beta * (PI / beta).sin() / (TAU * mean);
        Self::new(kappa, beta, mu, n as f64 / TAU)
    }

    pub fn num_nodes(&self) -> usize {
        self.kappa.len()
    }

    /// `p_ij = 1 / (1 + (R Δθ / (μ κ_i κ_j))^β)`.
    pub fn edge_probability(&self, theta: &[f64], i: usize, j: usize) -> f64 {
        let distance = self.radius * angular_separation(theta[i], theta[j]);
        connection_probability(distance, self.mu * self.kappa[i] * self.kappa[j], self.beta)
    }
}

/// Samples the one-dimensional geometric baseline.
pub fn sample_s1_graph(params: &S1Params, theta: &[f64], rng: &CounterRng) -> Result<Graph> {
    if theta.len() != params.num_nodes() {
        return Err(Error::contract(format!(
            "{} angles for {} nodes",
            theta.len(),
            params.num_nodes()
        )));
    }
    Ok(sample_with(params.num_nodes(), rng, |i, j| {
        params.edge_probability(theta, i, j)
    }))
}
