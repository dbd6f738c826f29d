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

//! Undirected simple graphs stored as sorted edge lists.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::textio;

/// Undirected simple graph on nodes `0..N`; edges are `(i, j)` with `i < j`,
/// sorted and unique.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn empty(num_nodes: usize) -> Self {
        Self {
            num_nodes,
            edges: Vec::new(),
        }
    }

    /// Builds a graph from arbitrary unordered pairs.
    ///
    /// Pairs are normalized to `i < j` and deduplicated; self-loops and
    /// endpoints outside `0..num_nodes` are rejected.
    pub fn from_edges(num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut list = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::contract(format!("self-loop on node {a}")));
            }
            if a >= num_nodes || b >= num_nodes {
                return Err(Error::contract(format!(
                    "edge ({a}, {b}) has an endpoint outside 0..{num_nodes}"
                )));
            }
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        list.dedup();
        Ok(Self {
            num_nodes,
            edges: list,
        })
    }

    /// Wraps edges that are already sorted, unique and have `i < j < N`.
    pub(crate) fn from_sorted_unchecked(num_nodes: usize, edges: Vec<(usize, usize)>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(edges.iter().all(|&(i, j)| i < j && j < num_nodes));
        Self { num_nodes, edges }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.binary_search(&(i.min(j), i.max(j))).is_ok()
    }

    /// Sorted neighbour lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Writes one `i j` line per edge, no header.
    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        let mut out = String::with_capacity(self.edges.len() * 12);
        for &(i, j) in &self.edges {
            let _ = writeln!(out, "{i} {j}");
        }
        textio::write_text(path, &out)
    }

    /// Reads a whitespace-separated edge list. Lines starting with `#` are
    /// skipped. `num_nodes` defaults to one past the largest id.
    pub fn read_edge_list(path: &Path, num_nodes: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_id = None;
        for (lineno, line) in textio::read_lines(path)? {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 2 {
                return Err(Error::parse(path, lineno, "expected `i j`"));
            }
            let i = textio::parse_usize(path, lineno, fields[0])?;
            let j = textio::parse_usize(path, lineno, fields[1])?;
            if i == j {
                return Err(Error::parse(path, lineno, format!("self-loop on node {i}")));
            }
            if let Some(n) = num_nodes {
                if i.max(j) >= n {
                    return Err(Error::parse(
                        path,
                        lineno,
                        format!("node {} is not among the {n} nodes", i.max(j)),
                    ));
                }
            }
            max_id = Some(max_id.unwrap_or(0).max(i.max(j)));
            edges.push((i, j));
        }
        let n = num_nodes.unwrap_or_else(|| max_id.map_or(0, |m| m + 1));
        Self::from_edges(n, edges)
    }
}

/// Key=value sidecar describing how a graph was produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphMetadata {
    pub num_nodes: usize,
    pub seed: u64,
    pub model: String,
    pub config_hash: String,
    pub isolated_nodes: usize,
}

impl GraphMetadata {
    pub fn to_key_values(&self) -> String {
        format!(
            "N={}\nseed={}\nmodel={}\nconfig_hash={}\nisolated_nodes={}\n",
            self.num_nodes, self.seed, self.model, self.config_hash, self.isolated_nodes
        )
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        textio::write_text(path, &self.to_key_values())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut meta = GraphMetadata {
            num_nodes: 0,
            seed: 0,
            model: String::new(),
            config_hash: String::new(),
            isolated_nodes: 0,
        };
        for (lineno, line) in textio::read_lines(path)? {
            let Some((k, v)) = line.split_once('=') else { continue };
            match k.trim() {
                "N" => meta.num_nodes = textio::parse_usize(path, lineno, v)?,
                "seed" => {
                    meta.seed = v.trim().parse().map_err(|_| Error::parse(path, lineno, "bad seed"))?
                }
                "model" => meta.model = v.trim().to_string(),
                "config_hash" => meta.config_hash = v.trim().to_string(),
                "isolated_nodes" => meta.isolated_nodes = textio::parse_usize(path, lineno, v)?,
                _ => {}
            }
        }
        Ok(meta)
    }
}
