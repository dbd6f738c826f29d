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

//! Experiment configuration, the end-to-end pipeline, parameter sweeps and
//! the file artifacts behind the `rhbm` command line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::calibration::{
    calibrate, default_radius, fitness_deviation, median, sample_angles, sample_fitness,
    CalibrationOptions, CalibrationReport, LatentState,
};
use crate::embedding::{
    expected_degrees_from_embedding, expected_mixing_from_embedding, load_embedding,
    sample_graphs_from_embedding,
};
use crate::error::{Error, Result};
use crate::generate::sample_graph;
use crate::graph::{Graph, GraphMetadata};
use crate::metrics::{
    average_local_clustering, clustering_relative_error, degree_sequence, global_clustering,
    mixing_relative_error, StatsReport,
};
use crate::mixing::{
    build_normalized_mixing, make_partition, scale_mixing_to_edges, validate_targets,
    BlockPartition, MixingMatrix, MixingParams, ValidationReport,
};
use crate::rng::CounterRng;
use crate::textio;

/// Parameters of one generated network.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub nodes: usize,
    pub avg_degree: f64,
    pub gamma: f64,
    pub beta: f64,
    pub communities: usize,
    pub rho: f64,
    pub q: f64,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub out: PathBuf,
    pub samples: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            nodes: 3000,
            avg_degree: 10.0,
            gamma: 2.5,
            beta: 2.0,
            communities: 10,
            rho: 0.5,
            q: 1.0,
            seed: 1,
            tol: 1e-2,
            max_iter: 1000,
            out: PathBuf::from("out"),
            samples: 10,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        MixingParams::new(self.communities, self.rho, self.q)?;
        if self.communities > self.nodes {
            return Err(Error::domain("more communities than nodes"));
        }
        if !(self.avg_degree > 0.0 && self.avg_degree.is_finite()) {
            return Err(Error::domain("average degree must be positive"));
        }
        if !(self.gamma > 2.0) {
            return Err(Error::domain("gamma must exceed 2"));
        }
        if !(self.beta > 1.0 && self.beta.is_finite()) {
            return Err(Error::domain("beta must exceed 1"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::domain("tol must be positive"));
        }
        if self.samples == 0 {
            return Err(Error::domain("samples must be at least 1"));
        }
        Ok(())
    }

    /// Sets one field from its command-line / config-file name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::domain(format!("invalid value {value:?} for {key}"));
        let f = || value.trim().parse::<f64>().map_err(|_| bad());
        let u = || value.trim().parse::<usize>().map_err(|_| bad());
        match key.trim().replace('_', "-").as_str() {
            "nodes" => self.nodes = u()?,
            "avg-degree" => self.avg_degree = f()?,
            "gamma" => self.gamma = f()?,
            "beta" => self.beta = f()?,
            "communities" => self.communities = u()?,
            "rho" => self.rho = f()?,
            "q" => self.q = f()?,
            "seed" => self.seed = value.trim().parse().map_err(|_| bad())?,
            "tol" => self.tol = f()?,
            "max-iter" => self.max_iter = u()?,
            "out" => self.out = PathBuf::from(value.trim()),
            "samples" => self.samples = u()?,
            other => return Err(Error::domain(format!("unknown configuration key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a flat `key=value` file; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        for (lineno, line) in textio::read_lines(path)? {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, lineno, "expected key=value"))?;
            self.set(k, v).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        }
        Ok(())
    }

    /// Canonical `key=value` listing of the model parameters (no output path).
    pub fn canonical(&self) -> String {
        format!(
            "nodes={}\navg-degree={}\ngamma={}\nbeta={}\ncommunities={}\nrho={}\nq={}\nseed={}\ntol={}\nmax-iter={}\n",
            self.nodes,
            self.avg_degree,
            self.gamma,
            self.beta,
            self.communities,
            self.rho,
            self.q,
            self.seed,
            self.tol,
            self.max_iter
        )
    }

    /// First 16 hex digits of the SHA-256 of [`ExperimentConfig::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(8).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn calibration_options(&self) -> CalibrationOptions {
        CalibrationOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            ..CalibrationOptions::default()
        }
    }
}

/// Targets derived from a configuration, before calibration.
#[derive(Debug, Clone)]
pub struct Targets {
    pub partition: BlockPartition,
    pub normalized: MixingMatrix,
    pub edge_counts: MixingMatrix,
    pub shares: Vec<f64>,
    pub theta: Vec<f64>,
    pub validation: ValidationReport,
}

pub fn build_targets(config: &ExperimentConfig) -> Result<Targets> {
    config.validate()?;
    let rng = CounterRng::new(config.seed);
    let partition = make_partition(config.nodes, config.communities, None)?;
    let normalized =
        build_normalized_mixing(MixingParams::new(config.communities, config.rho, config.q)?)?;
    let edge_counts = scale_mixing_to_edges(&normalized, config.nodes, config.avg_degree)?;
    let shares = sample_fitness(&partition, config.gamma, &rng)?;
    let theta = sample_angles(config.nodes, &rng);
    let validation = validate_targets(&edge_counts, &partition, &shares);
    Ok(Targets {
        partition,
        normalized,
        edge_counts,
        shares,
        theta,
        validation,
    })
}

/// Everything produced by one run of the model.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub targets: Targets,
    pub state: LatentState,
    pub report: CalibrationReport,
    pub graph: Graph,
    pub stats: StatsReport,
    pub mixing_error: f64,
}

/// Targets → calibration → one sampled graph → statistics.
pub fn run_model(config: &ExperimentConfig) -> Result<RunOutcome> {
    let targets = build_targets(config)?;
    if targets.validation.has_hard() {
        return Err(Error::Infeasible(targets.validation.to_string()));
    }
    let (state, report) = calibrate(
        &targets.shares,
        &targets.edge_counts,
        config.beta,
        default_radius(config.nodes),
        &targets.partition,
        targets.theta.clone(),
        config.calibration_options(),
    )?;
    let graph = sample_graph(&state, &CounterRng::new(config.seed));
    let stats = StatsReport::compute(&graph, &targets.partition)?;
    let mixing_error = mixing_relative_error(&stats.mixing, &targets.edge_counts)?;
    Ok(RunOutcome {
        targets,
        state,
        report,
        graph,
        stats,
        mixing_error,
    })
}

/// File names written by [`cmd_generate`] inside the output directory.
pub mod files {
    pub const MIXING: &str = "mixing.csv";
    pub const PARTITION: &str = "partition.csv";
    pub const LATENT: &str = "latent.csv";
    pub const FORCES: &str = "forces.csv";
    pub const CALIBRATION: &str = "calibration.txt";
    pub const CALIBRATION_TRACE: &str = "calibration_trace.csv";
    pub const EDGES: &str = "edges.txt";
    pub const EDGES_META: &str = "edges.meta";
    pub const STATS: &str = "stats.csv";
    pub const STATS_MIXING: &str = "stats_mixing.csv";
    pub const CONFIG: &str = "config.txt";
}

/// Runs the model and writes its artifacts to `config.out`.
///
/// Infeasible targets produce [`Error::Infeasible`] after the mixing target,
/// partition and validation report have been written.
pub fn cmd_generate(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    let dir = &config.out;
    let targets = build_targets(config)?;
    textio::write_text(&dir.join(files::CONFIG), &config.canonical())?;
    targets.edge_counts.write_csv(&dir.join(files::MIXING))?;
    targets.partition.write_csv(&dir.join(files::PARTITION))?;
    if targets.validation.has_hard() {
        textio::write_text(&dir.join("validation.txt"), &targets.validation.to_string())?;
        return Err(Error::Infeasible(targets.validation.to_string()));
    }
    let outcome = run_model(config)?;
    outcome
        .state
        .write_csv(&dir.join(files::LATENT), &dir.join(files::FORCES), config.seed)?;
    outcome
        .report
        .write(&dir.join(files::CALIBRATION), &dir.join(files::CALIBRATION_TRACE))?;
    outcome.graph.write_edge_list(&dir.join(files::EDGES))?;
    GraphMetadata {
        num_nodes: config.nodes,
        seed: config.seed,
        model: "rhbm".into(),
        config_hash: config.hash(),
        isolated_nodes: outcome.stats.isolated_nodes,
    }
    .write(&dir.join(files::EDGES_META))?;
    write_stats(&outcome.stats, &dir.join(files::STATS), &dir.join(files::STATS_MIXING))?;
    Ok(outcome)
}

pub fn write_stats(stats: &StatsReport, path: &Path, mixing_path: &Path) -> Result<()> {
    textio::write_text(path, &stats.to_csv())?;
    stats.mixing.write_csv(mixing_path)
}

/// Statistics of an edge list against a partition file.
pub fn cmd_stats(edges: &Path, partition: &Path) -> Result<StatsReport> {
    let partition = BlockPartition::read_csv(partition)?;
    let graph = Graph::read_edge_list(edges, Some(partition.num_nodes()))?;
    StatsReport::compute(&graph, &partition)
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Nodes,
    AvgDegree,
    Communities,
    Rho,
    Q,
    Beta,
}

impl SweepParam {
    pub const ALL: [SweepParam; 6] = [
        SweepParam::Nodes,
        SweepParam::AvgDegree,
        SweepParam::Communities,
        SweepParam::Rho,
        SweepParam::Q,
        SweepParam::Beta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Nodes => "nodes",
            SweepParam::AvgDegree => "avg-degree",
            SweepParam::Communities => "communities",
            SweepParam::Rho => "rho",
            SweepParam::Q => "q",
            SweepParam::Beta => "beta",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::domain(format!("unknown sweep parameter {name:?}")))
    }

    /// Values used in the reference grid.
    pub fn grid(self) -> Vec<f64> {
        match self {
            SweepParam::Nodes => vec![1000.0, 3000.0, 5000.0],
            SweepParam::AvgDegree => vec![5.0, 10.0, 20.0],
            SweepParam::Communities => vec![2.0, 10.0, 100.0],
            SweepParam::Rho => vec![-0.5, 0.0, 0.5],
            SweepParam::Q => vec![0.5, 0.75, 1.0],
            SweepParam::Beta => vec![2.0, 5.0, 10.0],
        }
    }

    pub fn apply(self, config: &mut ExperimentConfig, value: f64) -> Result<()> {
        let integer = || {
            if value >= 1.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::domain(format!("{} must be a positive integer, got {value}", self.name())))
            }
        };
        match self {
            SweepParam::Nodes => config.nodes = integer()?,
            SweepParam::AvgDegree => config.avg_degree = value,
            SweepParam::Communities => config.communities = integer()?,
            SweepParam::Rho => config.rho = value,
            SweepParam::Q => config.q = value,
            SweepParam::Beta => config.beta = value,
        }
        Ok(())
    }
}

/// One-parameter-at-a-time sweep around a base configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub seeds: usize,
    pub parallel: bool,
}

impl SweepSpec {
    pub fn new(param: SweepParam) -> Self {
        Self {
            param,
            values: param.grid(),
            seeds: 10,
            parallel: false,
        }
    }

    /// The six reference sweeps.
    pub fn full_grid(seeds: usize) -> Vec<SweepSpec> {
        SweepParam::ALL
            .into_iter()
            .map(|p| SweepSpec {
                seeds,
                ..SweepSpec::new(p)
            })
            .collect()
    }
}

/// Result of one `(value, seed)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    pub config: ExperimentConfig,
    pub converged: bool,
    pub iterations: usize,
    pub degree_residual: f64,
    pub block_residual: f64,
    pub mixing_relative_error: f64,
    pub mean_degree: f64,
    pub mean_degree_error: f64,
    pub global_clustering: f64,
    pub local_clustering: f64,
    pub median_fitness_deviation: f64,
    pub wall_time_s: f64,
    /// Set when the cell could not be calibrated at all.
    pub error: Option<String>,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "param,value,seed,nodes,avg_degree,gamma,beta,communities,rho,q,converged,iterations,degree_residual,block_residual,mixing_relative_error,mean_degree,mean_degree_error,global_clustering,local_clustering,median_fitness_deviation,wall_time_s";

    pub fn csv_row(&self) -> String {
        let c = &self.config;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.3}",
            self.param.name(),
            self.value,
            c.seed,
            c.nodes,
            c.avg_degree,
            c.gamma,
            c.beta,
            c.communities,
            c.rho,
            c.q,
            self.converged,
            self.iterations,
            self.degree_residual,
            self.block_residual,
            self.mixing_relative_error,
            self.mean_degree,
            self.mean_degree_error,
            self.global_clustering,
            self.local_clustering,
            self.median_fitness_deviation,
            self.wall_time_s
        )
    }
}

fn run_cell(param: SweepParam, value: f64, config: ExperimentConfig) -> SweepRow {
    let start = Instant::now();
    let mut row = SweepRow {
        param,
        value,
        config: config.clone(),
        converged: false,
        iterations: 0,
        degree_residual: f64::NAN,
        block_residual: f64::NAN,
        mixing_relative_error: f64::NAN,
        mean_degree: f64::NAN,
        mean_degree_error: f64::NAN,
        global_clustering: f64::NAN,
        local_clustering: f64::NAN,
        median_fitness_deviation: f64::NAN,
        wall_time_s: 0.0,
        error: None,
    };
    match run_model(&config) {
        Ok(out) => {
            row.converged = out.report.converged;
            row.iterations = out.report.iterations;
            row.degree_residual = out.report.max_degree_residual;
            row.block_residual = out.report.max_block_residual;
            row.mixing_relative_error = out.mixing_error;
            row.mean_degree = out.stats.mean_degree;
            row.mean_degree_error = (out.stats.mean_degree - config.avg_degree).abs() / config.avg_degree;
            row.global_clustering = out.stats.global_clustering;
            row.local_clustering = out.stats.average_local_clustering;
            row.median_fitness_deviation = median(&fitness_deviation(&out.state, &out.targets.shares));
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row.wall_time_s = start.elapsed().as_secs_f64();
    row
}

/// Runs every `(value, seed)` cell of `spec`; seeds are `base.seed + s`.
/// Cells that fail calibration are kept with `converged = false`.
pub fn cmd_sweep(spec: &SweepSpec, base: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let mut cells = Vec::with_capacity(spec.values.len() * spec.seeds);
    for &value in &spec.values {
        for s in 0..spec.seeds {
            let mut config = base.clone();
            spec.param.apply(&mut config, value)?;
            config.seed = base.seed.wrapping_add(s as u64);
            config.validate()?;
            cells.push((value, config));
        }
    }
    let rows = if spec.parallel {
        cells
            .into_par_iter()
            .map(|(v, c)| run_cell(spec.param, v, c))
            .collect()
    } else {
        cells.into_iter().map(|(v, c)| run_cell(spec.param, v, c)).collect()
    };
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{}\n", SweepRow::CSV_HEADER);
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Comparison of an embedding against the graph it was inferred from.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingEvaluation {
    pub dim: usize,
    pub mixing_relative_error: f64,
    pub mean_degree_error: f64,
    pub global_clustering_error_mean: f64,
    pub global_clustering_error_std: f64,
    pub local_clustering_error_mean: f64,
    pub local_clustering_error_std: f64,
    /// `(observed degree, expected degree)` per node.
    pub degree_pairs: Vec<(usize, f64)>,
    pub samples: usize,
}

impl EmbeddingEvaluation {
    pub const CSV_HEADER: &'static str = "D,mixing_relative_error,mean_degree_error,global_clustering_error_mean,global_clustering_error_std,local_clustering_error_mean,local_clustering_error_std,samples";

    pub fn to_csv(&self) -> String {
        format!(
            "{}\n{},{},{},{},{},{},{},{}\n",
            Self::CSV_HEADER,
            self.dim,
            self.mixing_relative_error,
            self.mean_degree_error,
            self.global_clustering_error_mean,
            self.global_clustering_error_std,
            self.local_clustering_error_mean,
            self.local_clustering_error_std,
            self.samples
        )
    }

    pub fn degree_csv(&self) -> String {
        let mut out = String::from("node,degree,expected_degree\n");
        for (i, (d, e)) in self.degree_pairs.iter().enumerate() {
            let _ = writeln!(out, "{i},{d},{e}");
        }
        out
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Evaluates an embedding file against the input graph.
///
/// The mixing reference is `target` when given, otherwise the empirical
/// mixing of the input graph.
pub fn cmd_eval_embedding(
    edges: &Path,
    partition: &Path,
    embedding: &Path,
    samples: usize,
    seed: u64,
    target: Option<&Path>,
) -> Result<EmbeddingEvaluation> {
    let partition = BlockPartition::read_csv(partition)?;
    let graph = Graph::read_edge_list(edges, Some(partition.num_nodes()))?;
    let emb = load_embedding(embedding)?;
    if emb.num_nodes() != partition.num_nodes() {
        return Err(Error::contract(format!(
            "node sets differ: embedding has {} nodes, partition {}",
            emb.num_nodes(),
            partition.num_nodes()
        )));
    }
    let reference = match target {
        Some(p) => MixingMatrix::read_csv(p)?,
        None => crate::metrics::empirical_mixing(&graph, &partition)?,
    };
    let expected_mixing = expected_mixing_from_embedding(&emb, &partition)?;
    let mixing_error = mixing_relative_error(&expected_mixing, &reference)?;

    let observed = degree_sequence(&graph);
    let expected = expected_degrees_from_embedding(&emb);
    let n = observed.len().max(1) as f64;
    let mean_obs = observed.iter().sum::<usize>() as f64 / n;
    let mean_exp = expected.iter().sum::<f64>() / n;
    let mean_degree_error = if mean_obs > 0.0 {
        (mean_exp - mean_obs).abs() / mean_obs
    } else {
        f64::NAN
    };

    let c_global = global_clustering(&graph);
    let c_local = average_local_clustering(&graph);
    let sampled = sample_graphs_from_embedding(&emb, samples, &CounterRng::new(seed))?;
    let mut global_err = Vec::with_capacity(samples);
    let mut local_err = Vec::with_capacity(samples);
    for g in &sampled {
        global_err.push(clustering_relative_error(global_clustering(g), c_global)?);
        local_err.push(clustering_relative_error(average_local_clustering(g), c_local)?);
    }
    let (gm, gs) = mean_std(&global_err);
    let (lm, ls) = mean_std(&local_err);
    Ok(EmbeddingEvaluation {
        dim: emb.dim(),
        mixing_relative_error: mixing_error,
        mean_degree_error,
        global_clustering_error_mean: gm,
        global_clustering_error_std: gs,
        local_clustering_error_mean: lm,
        local_clustering_error_std: ls,
        degree_pairs: observed.into_iter().zip(expected).collect(),
        samples: sampled.len(),
    })
}
