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

//! Calibrates fitnesses and block forces so that expected degrees and block
//! link counts hit their targets, then prints the residual trace.
//!
//! ```text
//! cargo run --release --example calibrate_model
//! ```

use rhbm::calibration::default_radius;
use rhbm::{
    build_normalized_mixing, calibrate, make_partition, sample_angles, sample_fitness,
    scale_mixing_to_edges, CalibrationOptions, CounterRng, MixingParams,
};

fn main() -> rhbm::Result<()> {
    let (nodes, blocks, beta) = (1200, 4, 2.0);
    let rng = CounterRng::new(3);

    let partition = make_partition(nodes, blocks, None)?;
    let targets = scale_mixing_to_edges(
        &build_normalized_mixing(MixingParams::new(blocks, 0.4, 0.8)?)?,
        nodes,
        10.0,
    )?;
    let shares = sample_fitness(&partition, 2.5, &rng)?;
    let theta = sample_angles(nodes, &rng);

    let (state, report) = calibrate(
        &shares,
        &targets,
        beta,
        default_radius(nodes),
        &partition,
        theta,
        CalibrationOptions::default(),
    )?;

    println!("sweep  degree_residual  block_residual");
    for (k, r) in report.trace.iter().enumerate() {
        println!("{k:5}  {:15.3e}  {:14.3e}", r.degree, r.block);
    }
    print!("{}", report.to_key_values());

    println!("block forces:");
    for a in 0..blocks {
        let row: Vec<String> = (0..blocks).map(|b| format!("{:10.3}", state.forces().get(a, b))).collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}
