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

//! Sweeps the intra-block fraction rho over a few values and seeds and
//! prints the resulting table.
//!
//! ```text
//! cargo run --release --example parameter_sweep
//! ```

use rhbm::experiment::{cmd_sweep, sweep_csv, ExperimentConfig, SweepParam, SweepSpec};

fn main() -> rhbm::Result<()> {
    let base = ExperimentConfig {
        nodes: 800,
        communities: 4,
        avg_degree: 8.0,
        ..ExperimentConfig::default()
    };
    let spec = SweepSpec {
        values: vec![-0.5, 0.0, 0.5, 0.9],
        seeds: 3,
        parallel: true,
        ..SweepSpec::new(SweepParam::Rho)
    };
    let rows = cmd_sweep(&spec, &base)?;
    print!("{}", sweep_csv(&rows));

    for v in &spec.values {
        let cell: Vec<_> = rows.iter().filter(|r| r.value == *v).collect();
        let clustering = cell.iter().map(|r| r.local_clustering).sum::<f64>() / cell.len() as f64;
        let converged = cell.iter().filter(|r| r.converged).count();
        println!("rho = {v:5}: local clustering {clustering:.4}, converged {converged}/{}", cell.len());
    }
    Ok(())
}
