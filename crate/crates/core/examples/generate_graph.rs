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

//! Runs the full pipeline for one configuration and writes every artifact
//! (targets, latent state, edge list, statistics) to a directory.
//!
//! ```text
//! cargo run --release --example generate_graph -- [out-dir]
//! ```

use rhbm::experiment::{cmd_generate, ExperimentConfig};

fn main() -> rhbm::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "rhbm-example".into());
    let mut config = ExperimentConfig {
        nodes: 2000,
        communities: 8,
        seed: 3,
        out: out.into(),
        ..ExperimentConfig::default()
    };
    config.set("rho", "0.7")?;

    let run = cmd_generate(&config)?;
    println!("config hash {}", config.hash());
    println!(
        "{} nodes, {} edges, mean degree {:.3}",
        run.stats.num_nodes, run.stats.num_edges, run.stats.mean_degree
    );
    println!(
        "converged {} in {} sweeps, mixing error {:.4}",
        run.report.converged, run.report.iterations, run.mixing_error
    );
    println!(
        "clustering: global {:.4}, local {:.4}",
        run.stats.global_clustering, run.stats.average_local_clustering
    );
    if !run.report.unreachable_nodes.is_empty() {
        println!("hubs beyond reach: {:?}", run.report.unreachable_nodes);
    }
    println!("artifacts in {}", config.out.display());
    Ok(())
}
