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

//! Latent node features and the finite-size calibration of fitnesses and
//! block forces.
//!
//! In the large-`N` limit the fitness of node `i` equals its share `f_i` of
//! its block's total degree and the block force `Φ_IJ` equals the target link
//! count `F_IJ`. For finite `N` the self-pair exclusion and the saturation of
//! the connection kernel bias the expected degrees, so [`calibrate`] corrects
//! `(φ, Φ)` by fixed-point iteration on the angularly averaged expectations.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::Path;

use rand::distr::{Distribution, Uniform};
use rand_distr::Pareto;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::AngularKernel;
use crate::mixing::{validate_targets, BlockMatrix, BlockPartition, MixingMatrix, Violation};
use crate::rng::{CounterRng, Domain};
use crate::textio;

/// Tolerance on the per-block fitness normalization.
pub const GAUGE_TOL: f64 = 1e-9;

/// Default circle radius: unit node density on the circle.
pub fn default_radius(num_nodes: usize) -> f64 {
    num_nodes as f64 / TAU
}

/// `μ̃ = R β sin(π/β)`.
pub fn mu_tilde(beta: f64, radius: f64) -> f64 {
    radius * beta * (PI / beta).sin()
}

/// Angles, fitnesses, block forces and global parameters of a graph ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentState {
    theta: Vec<f64>,
    phi: Vec<f64>,
    forces: BlockMatrix,
    beta: f64,
    radius: f64,
    mu_tilde: f64,
    partition: BlockPartition,
}

impl LatentState {
    /// Builds a state and checks every invariant, including the per-block
    /// gauge `Σ_{i∈I} φ_i = 1`.
    pub fn new(
        theta: Vec<f64>,
        phi: Vec<f64>,
        forces: BlockMatrix,
        beta: f64,
        radius: f64,
        partition: BlockPartition,
    ) -> Result<Self> {
        let state = Self::new_ungauged(theta, phi, forces, beta, radius, partition)?;
        for block in 0..state.partition.num_blocks() {
            let sum = state.block_fitness_sum(block);
            if (sum - 1.0).abs() > GAUGE_TOL {
                return Err(Error::contract(format!(
                    "fitnesses of block {block} sum to {sum} instead of 1"
                )));
            }
        }
        Ok(state)
    }

    /// Like [`LatentState::new`] but without the gauge check, for states whose
    /// fitness scale is deliberately moved between `φ` and `Φ`.
    pub fn new_ungauged(
        theta: Vec<f64>,
        phi: Vec<f64>,
        forces: BlockMatrix,
        beta: f64,
        radius: f64,
        partition: BlockPartition,
    ) -> Result<Self> {
        let n_nodes = partition.num_nodes();
        if theta.len() != n_nodes || phi.len() != n_nodes {
            return Err(Error::contract(format!(
                "expected {n_nodes} angles and fitnesses, got {} and {}",
                theta.len(),
                phi.len()
            )));
        }
        if forces.dim() != partition.num_blocks() {
            return Err(Error::contract("force matrix dimension differs from block count"));
        }
        if !(beta > 1.0 && beta.is_finite()) {
            return Err(Error::domain(format!("beta = {beta} must exceed 1")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!("radius = {radius} must be positive")));
        }
        if let Some(i) = phi.iter().position(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::contract(format!("fitness of node {i} must be positive")));
        }
        if theta.iter().any(|t| !(0.0..TAU).contains(t)) {
            return Err(Error::contract("angles must lie in [0, 2π)"));
        }
        if forces.as_slice().iter().any(|v| !(v.is_finite() && *v >= 0.0))
            || !forces.is_symmetric(1e-12)
        {
            return Err(Error::contract("block forces must be symmetric and non-negative"));
        }
        Ok(Self {
            theta,
            phi,
            forces,
            beta,
            radius,
            mu_tilde: mu_tilde(beta, radius),
            partition,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.phi.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn forces(&self) -> &BlockMatrix {
        &self.forces
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn mu_tilde(&self) -> f64 {
        self.mu_tilde
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn block_fitness_sum(&self, block: usize) -> f64 {
        self.partition.members(block).iter().map(|&i| self.phi[i]).sum()
    }

    /// Connection scale `μ̃ φ_i φ_j Φ_{I_i I_j}` of the pair.
    #[inline]
    pub fn pair_scale(&self, i: usize, j: usize) -> f64 {
        let (bi, bj) = (self.partition.block_of(i), self.partition.block_of(j));
        self.mu_tilde * self.phi[i] * self.phi[j] * self.forces.get(bi, bj)
    }

    /// Same state with `φ_i → c φ_i` for `i ∈ block` and `Φ_{block,J} → Φ/c`.
    /// Edge probabilities are unchanged; the gauge is not.
    pub fn rescaled_block(&self, block: usize, c: f64) -> Result<Self> {
        let mut phi = self.phi.clone();
        for &i in self.partition.members(block) {
            phi[i] *= c;
        }
        let mut forces = self.forces.clone();
        for other in 0..forces.dim() {
            let divisor = if other == block { c * c } else { c };
            forces.set(block, other, self.forces.get(block, other) / divisor);
            forces.set(other, block, self.forces.get(other, block) / divisor);
        }
        Self::new_ungauged(
            self.theta.clone(),
            phi,
            forces,
            self.beta,
            self.radius,
            self.partition.clone(),
        )
    }

    /// Lagrange multipliers `(λ_i, η_IJ)` of the maximum-entropy form
    /// `p = 1/(1 + (x e^{(λ_i+λ_j+η_IJ)/β})^β)` matching this state, with the
    /// free additive constant fixed by `⟨e^{-λ/β}⟩ = 1` in the large-`N` limit:
    /// `λ_i = -β ln(φ_i N_I)` and `η_IJ = -β ln(μ̃ Φ_IJ / (N_I N_J))`.
    pub fn multipliers(&self) -> (Vec<f64>, BlockMatrix) {
        let sizes = self.partition.sizes();
        let lambda = self
            .phi
            .iter()
            .enumerate()
            .map(|(i, &p)| -self.beta * (p * sizes[self.partition.block_of(i)] as f64).ln())
            .collect();
        let n = self.forces.dim();
        let mut eta = BlockMatrix::zeros(n);
        for a in 0..n {
            for b in 0..n {
                let v = self.mu_tilde * self.forces.get(a, b) / (sizes[a] * sizes[b]) as f64;
                eta.set(a, b, if v > 0.0 { -self.beta * v.ln() } else { f64::INFINITY });
            }
        }
        (lambda, eta)
    }

    /// Writes `node,block,theta,phi` to `path` and the forces to `forces_path`.
    pub fn write_csv(&self, path: &Path, forces_path: &Path, seed: u64) -> Result<()> {
        let mut out = format!(
            "# beta={} R={} seed={seed}\nnode,block,theta,phi\n",
            textio::fmt_f64(self.beta),
            textio::fmt_f64(self.radius)
        );
        for i in 0..self.num_nodes() {
            let _ = writeln!(
                out,
                "{i},{},{},{}",
                self.partition.block_of(i),
                textio::fmt_f64(self.theta[i]),
                textio::fmt_f64(self.phi[i])
            );
        }
        textio::write_text(path, &out)?;
        self.forces.write_csv(forces_path, "forces")
    }

    /// Reads a state written by [`LatentState::write_csv`]; returns it with its seed.
    pub fn read_csv(path: &Path, forces_path: &Path) -> Result<(Self, Option<u64>)> {
        let lines = textio::read_lines(path)?;
        let mut beta = None;
        let mut radius = None;
        let mut seed = None;
        let mut rows = Vec::new();
        let mut seen_header = false;
        for (lineno, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for (k, v) in textio::parse_kv_tokens(rest) {
                    match k.as_str() {
                        "beta" => beta = Some(textio::parse_f64(path, lineno, &v)?),
                        "R" => radius = Some(textio::parse_f64(path, lineno, &v)?),
                        "seed" => seed = v.parse().ok(),
                        _ => {}
                    }
                }
                continue;
            }
            if !seen_header {
                seen_header = true;
                if line.replace(' ', "") != "node,block,theta,phi" {
                    return Err(Error::parse(path, lineno, "expected header `node,block,theta,phi`"));
                }
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(Error::parse(path, lineno, "expected 4 fields"));
            }
            rows.push((
                lineno,
                textio::parse_usize(path, lineno, f[0])?,
                textio::parse_usize(path, lineno, f[1])?,
                textio::parse_f64(path, lineno, f[2])?,
                textio::parse_f64(path, lineno, f[3])?,
            ));
        }
        let beta = beta.ok_or_else(|| Error::parse(path, 1, "missing beta in header"))?;
        let radius = radius.ok_or_else(|| Error::parse(path, 1, "missing R in header"))?;
        let n = rows.len();
        let mut block_of = vec![0; n];
        let mut theta = vec![0.0; n];
        let mut phi = vec![0.0; n];
        let mut seen = vec![false; n];
        for (lineno, node, block, t, p) in rows {
            if node >= n || seen[node] {
                return Err(Error::parse(path, lineno, format!("duplicate or out-of-range node {node}")));
            }
            seen[node] = true;
            block_of[node] = block;
            theta[node] = t;
            phi[node] = p;
        }
        let partition = BlockPartition::from_assignment(block_of)?;
        let (forces, _) = BlockMatrix::read_csv(forces_path)?;
        Ok((Self::new(theta, phi, forces, beta, radius, partition)?, seed))
    }
}

/// Raw fitness draws from a Pareto law with minimum 1 and density exponent
/// `gamma` (tail `P(X > x) = x^{1-γ}`). Node `i` always receives the same
/// draw for a given seed, whatever `num_nodes` is.
pub fn sample_raw_fitness(num_nodes: usize, gamma: f64, rng: &CounterRng) -> Result<Vec<f64>> {
    if !(gamma > 2.0 && gamma.is_finite()) {
        return Err(Error::domain(format!(
            "gamma = {gamma}: fitness exponents <= 2 have infinite mean and are unsupported"
        )));
    }
    let pareto = Pareto::new(1.0, gamma - 1.0).map_err(|e| Error::domain(e.to_string()))?;
    Ok((0..num_nodes)
        .map(|i| pareto.sample(&mut rng.node_rng(Domain::Fitness, i)))
        .collect())
}

/// Normalizes raw values per block so that each block's shares sum to one.
pub fn normalize_shares(raw: &[f64], partition: &BlockPartition) -> Vec<f64> {
    let mut shares = raw.to_vec();
    for block in 0..partition.num_blocks() {
        let members = partition.members(block);
        let sum: f64 = members.iter().map(|&i| raw[i]).sum();
        for &i in members {
            shares[i] = raw[i] / sum;
        }
    }
    shares
}

/// Block-normalized power-law fitness shares `f_i`.
pub fn sample_fitness(partition: &BlockPartition, gamma: f64, rng: &CounterRng) -> Result<Vec<f64>> {
    let raw = sample_raw_fitness(partition.num_nodes(), gamma, rng)?;
    Ok(normalize_shares(&raw, partition))
}

/// I.i.d. uniform angles on `[0, 2π)`.
pub fn sample_angles(num_nodes: usize, rng: &CounterRng) -> Vec<f64> {
    let uniform = Uniform::new(0.0, TAU).expect("valid range");
    (0..num_nodes)
        .map(|i| uniform.sample(&mut rng.node_rng(Domain::Angles, i)))
        .collect()
}

/// Expected degree of every node towards every block, stored row-major `N × n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDegrees {
    n_blocks: usize,
    data: Vec<f64>,
}

impl BlockDegrees {
    #[inline]
    pub fn get(&self, node: usize, block: usize) -> f64 {
        self.data[node * self.n_blocks + block]
    }

    pub fn row(&self, node: usize) -> &[f64] {
        &self.data[node * self.n_blocks..(node + 1) * self.n_blocks]
    }

    pub fn num_nodes(&self) -> usize {
        self.data.len().checked_div(self.n_blocks).unwrap_or(0)
    }

    pub fn num_blocks(&self) -> usize {
        self.n_blocks
    }

    /// `⟨deg_i⟩ = Σ_J ⟨deg_iJ⟩`.
    pub fn totals(&self) -> Vec<f64> {
        (0..self.num_nodes()).map(|i| self.row(i).iter().sum()).collect()
    }

    /// `⟨L_IJ⟩ = Σ_{i∈I} ⟨deg_iJ⟩`; the diagonal counts intra links twice.
    pub fn block_links(&self, partition: &BlockPartition) -> BlockMatrix {
        let n = self.n_blocks;
        let mut links = BlockMatrix::zeros(n);
        for a in 0..n {
            for &i in partition.members(a) {
                for b in 0..n {
                    links.set(a, b, links.get(a, b) + self.get(i, b));
                }
            }
        }
        links
    }
}

/// `⟨deg_iJ⟩ = Σ_{j∈J, j≠i} g(μ̃ φ_i φ_j Φ_{I_i J})` with the angular-average kernel.
pub fn expected_block_degrees(state: &LatentState) -> BlockDegrees {
    let kernel = AngularKernel::new(state.beta, state.radius).expect("state parameters are valid");
    expected_block_degrees_with(state, &kernel)
}

/// [`expected_block_degrees`] with a prebuilt kernel for the state's `(β, R)`.
///
/// Rows are computed independently and summed in node order, so the result
/// does not depend on the thread schedule.
pub fn expected_block_degrees_with(state: &LatentState, kernel: &AngularKernel) -> BlockDegrees {
    let part = &state.partition;
    let n_blocks = part.num_blocks();
    let mut data = vec![0.0; state.num_nodes() * n_blocks];
    let pairs: Vec<(usize, usize)> = (0..n_blocks)
        .flat_map(|a| (a..n_blocks).map(move |b| (a, b)))
        .collect();
    // Each unordered node pair is evaluated once; per-block-pair partial sums
    // are merged in a fixed order so the result does not depend on scheduling.
    let partials: Vec<(Vec<f64>, Vec<f64>)> = pairs
        .par_iter()
        .map(|&(a, b)| block_pair_sums(state, kernel, a, b))
        .collect();
    for (&(a, b), (rows, cols)) in pairs.iter().zip(&partials) {
        for (&i, v) in part.members(a).iter().zip(rows) {
            data[i * n_blocks + b] += v;
        }
        if a != b {
            for (&j, v) in part.members(b).iter().zip(cols) {
                data[j * n_blocks + a] += v;
            }
        }
    }
    BlockDegrees { n_blocks, data }
}

/// Sums of `g` over `J = b` for every node of `a` and over `a` for every node
/// of `b`. For `a == b` both go into the first vector.
fn block_pair_sums(state: &LatentState, kernel: &AngularKernel, a: usize, b: usize) -> (Vec<f64>, Vec<f64>) {
    let (ma, mb) = (state.partition.members(a), state.partition.members(b));
    let mut rows = vec![0.0; ma.len()];
    let mut cols = vec![0.0; if a == b { 0 } else { mb.len() }];
    let force = state.forces.get(a, b);
    if force == 0.0 {
        return (rows, cols);
    }
    let phi = &state.phi;
    for (x, &i) in ma.iter().enumerate() {
        let c = state.mu_tilde * phi[i] * force;
        if a == b {
            let mut sum = 0.0;
            for (y, &j) in ma.iter().enumerate().skip(x + 1) {
                let g = kernel.eval(c * phi[j]);
                sum += g;
                rows[y] += g;
            }
            rows[x] += sum;
        } else {
            let mut sum = 0.0;
            for (y, &j) in mb.iter().enumerate() {
                let g = kernel.eval(c * phi[j]);
                sum += g;
                cols[y] += g;
            }
            rows[x] = sum;
        }
    }
    (rows, cols)
}

/// Settings of [`calibrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Weight of the new fitness estimate in each sweep.
    pub damping: f64,
    /// Stop after this many sweeps without a relative improvement of 1e-3
    /// in the best residual; 0 never stops early.
    pub stall_sweeps: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-2,
            max_iter: 1000,
            damping: 0.5,
            stall_sweeps: 50,
        }
    }
}

/// Residuals of the expected degrees against their targets.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    /// `max_i |⟨deg_i⟩ - f_i Σ_J F_IJ| / (f_i Σ_J F_IJ)`.
    pub degree: f64,
    /// `max_IJ |⟨L_IJ⟩ - F_IJ| / F_IJ` over positive targets.
    pub block: f64,
    /// `max_{i,J} |⟨deg_iJ⟩ - f_i F_IJ| / (f_i F_IJ)` over positive targets.
    pub block_degree: f64,
}

impl Residuals {
    /// The quantity driven below the tolerance by [`calibrate`].
    pub fn controlling(&self) -> f64 {
        self.degree.max(self.block)
    }
}

/// Outcome of [`calibrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    /// Number of update sweeps performed.
    pub iterations: usize,
    pub tol: f64,
    pub max_degree_residual: f64,
    pub max_block_residual: f64,
    /// Residual of the per-node, per-block targets `f_i F_IJ`; diagnostic only.
    pub max_block_degree_residual: f64,
    pub converged: bool,
    /// Nodes whose degree target exceeds what the block link targets allow;
    /// with any present the residual has a floor above zero.
    pub unreachable_nodes: Vec<usize>,
    /// Residuals before each sweep, and after the last one.
    pub trace: Vec<Residuals>,
}

impl CalibrationReport {
    pub fn to_key_values(&self) -> String {
        format!(
            "converged={}\ninfeasible={}\niterations={}\ntol={}\nmax_degree_residual={}\nmax_block_residual={}\nmax_block_degree_residual={}\nunreachable_nodes={}\n",
            self.converged,
            self.is_infeasible(),
            self.iterations,
            self.tol,
            self.max_degree_residual,
            self.max_block_residual,
            self.max_block_degree_residual,
            self.unreachable_nodes
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        )
    }

    pub fn is_infeasible(&self) -> bool {
        !self.unreachable_nodes.is_empty()
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from("sweep,degree_residual,block_residual,block_degree_residual\n");
        for (s, r) in self.trace.iter().enumerate() {
            let _ = writeln!(out, "{s},{},{},{}", r.degree, r.block, r.block_degree);
        }
        out
    }

    pub fn write(&self, path: &Path, trace_path: &Path) -> Result<()> {
        textio::write_text(path, &self.to_key_values())?;
        textio::write_text(trace_path, &self.trace_csv())
    }
}

/// Residuals of `degrees` against shares and edge-count targets.
pub fn residuals(
    degrees: &BlockDegrees,
    shares: &[f64],
    targets: &MixingMatrix,
    partition: &BlockPartition,
) -> Residuals {
    let row_sums = targets.row_sums();
    let mut r = Residuals::default();
    for (i, &share) in shares.iter().enumerate() {
        let own = partition.block_of(i);
        let row = degrees.row(i);
        let want = share * row_sums[own];
        if want > 0.0 {
            let got: f64 = row.iter().sum();
            r.degree = r.degree.max((got - want).abs() / want);
        }
        for (block, &got) in row.iter().enumerate() {
            let want = share * targets.get(own, block);
            if want > 0.0 {
                r.block_degree = r.block_degree.max((got - want).abs() / want);
            }
        }
    }
    let links = degrees.block_links(partition);
    for a in 0..targets.dim() {
        for b in 0..targets.dim() {
            let want = targets.get(a, b);
            if want > 0.0 {
                r.block = r.block.max((links.get(a, b) - want).abs() / want);
            }
        }
    }
    r
}

/// Solves for `(φ, Φ)` so that the expected total degree of every node is
/// `f_i Σ_J F_IJ` and the expected link count of every block pair is `F_IJ`.
///
/// Starts from `φ = f`, `Φ = F`. Each sweep rescales the forces by
/// `F_IJ / ⟨L_IJ⟩`, moves each fitness a `damping` fraction towards its
/// degree target (using the degrees implied by the new forces), then restores
/// `Σ_{i∈I} φ_i = 1` with a compensating rescale of `Φ`. Returns the best state
/// seen; `converged` is false when `max_iter` sweeps were not enough or the
/// residual stalled, and `unreachable_nodes` lists hubs whose targets cannot
/// be met together with the block link targets.
pub fn calibrate(
    shares: &[f64],
    targets: &MixingMatrix,
    beta: f64,
    radius: f64,
    partition: &BlockPartition,
    theta: Vec<f64>,
    options: CalibrationOptions,
) -> Result<(LatentState, CalibrationReport)> {
    if !(options.tol > 0.0) {
        return Err(Error::domain("calibration tolerance must be positive"));
    }
    if !(options.damping > 0.0 && options.damping <= 1.0) {
        return Err(Error::domain("damping must lie in (0, 1]"));
    }
    if targets.dim() != partition.num_blocks() || shares.len() != partition.num_nodes() {
        return Err(Error::contract("targets, shares and partition disagree in size"));
    }
    let validation = validate_targets(targets, partition, shares);
    if validation.has_hard() {
        return Err(Error::Infeasible(validation.to_string()));
    }
    let kernel = AngularKernel::new(beta, radius)?;
    let mut state = LatentState::new(
        theta,
        shares.to_vec(),
        targets.entries().clone(),
        beta,
        radius,
        partition.clone(),
    )?;
    let n = partition.num_blocks();
    let row_sums = targets.row_sums();

    let mut trace = Vec::new();
    let mut best: Option<(f64, LatentState, Residuals)> = None;
    let mut iterations = 0;
    let mut last_gain = 0;
    loop {
        let degrees = expected_block_degrees_with(&state, &kernel);
        let res = residuals(&degrees, shares, targets, partition);
        trace.push(res);
        match &best {
            Some((b, _, _)) if res.controlling() >= *b => {}
            Some((b, _, _)) => {
                if res.controlling() < *b * (1.0 - 1e-3) {
                    last_gain = iterations;
                }
                best = Some((res.controlling(), state.clone(), res));
            }
            None => best = Some((res.controlling(), state.clone(), res)),
        }
        let stalled = options.stall_sweeps > 0 && iterations - last_gain >= options.stall_sweeps;
        if res.controlling() <= options.tol || iterations >= options.max_iter || stalled {
            break;
        }
        iterations += 1;

        // Forces: match block link counts.
        let links = degrees.block_links(partition);
        let mut ratio = BlockMatrix::zeros(n);
        for a in 0..n {
            for b in 0..n {
                let (want, got) = (targets.get(a, b), links.get(a, b));
                ratio.set(a, b, if want > 0.0 && got > 0.0 { want / got } else { 1.0 });
            }
        }
        let mut forces = state.forces.clone();
        for a in 0..n {
            for b in 0..n {
                forces.set(a, b, forces.get(a, b) * ratio.get(a, b));
            }
        }

        // Fitnesses: damped move towards the total degree target.
        let mut phi = state.phi.clone();
        for (i, p) in phi.iter_mut().enumerate() {
            let own = partition.block_of(i);
            let want = shares[i] * row_sums[own];
            let got: f64 = (0..n).map(|b| degrees.get(i, b) * ratio.get(own, b)).sum();
            if want > 0.0 && got > 0.0 {
                *p *= 1.0 - options.damping + options.damping * want / got;
            }
        }

        // Gauge.
        let sums: Vec<f64> = (0..n)
            .map(|b| partition.members(b).iter().map(|&i| phi[i]).sum())
            .collect();
        for (i, p) in phi.iter_mut().enumerate() {
            *p /= sums[partition.block_of(i)];
        }
        for a in 0..n {
            for b in 0..n {
                forces.set(a, b, forces.get(a, b) * sums[a] * sums[b]);
            }
        }
        state = LatentState::new(state.theta, phi, forces, beta, radius, partition.clone())?;
    }

    let (_, state, res) = best.expect("at least one evaluation");
    let report = CalibrationReport {
        iterations,
        tol: options.tol,
        max_degree_residual: res.degree,
        max_block_residual: res.block,
        max_block_degree_residual: res.block_degree,
        converged: res.controlling() <= options.tol,
        unreachable_nodes: validation
            .warnings()
            .filter_map(|v| match v {
                Violation::DegreeUnreachable { node, .. } => Some(*node),
                _ => None,
            })
            .collect(),
        trace,
    };
    Ok((state, report))
}

/// `|φ_i - f_i| / f_i` for every node.
pub fn fitness_deviation(state: &LatentState, shares: &[f64]) -> Vec<f64> {
    state
        .phi
        .iter()
        .zip(shares)
        .map(|(p, f)| (p - f).abs() / f)
        .collect()
}

/// Median of a slice (mean of the two central values for even lengths).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}
