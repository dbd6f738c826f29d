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

//! Builds the assortativity family of mixing matrices and scales one to edge
//! counts for a concrete network size.
//!
//! ```text
//! cargo run --example mixing_matrices
//! ```

use rhbm::mixing::{validate_targets, MixingMatrix};
use rhbm::{
    build_normalized_mixing, make_partition, sample_fitness, scale_mixing_to_edges, CounterRng,
    MixingParams,
};

fn print(m: &MixingMatrix) {
    for i in 0..m.dim() {
        let row: Vec<String> = (0..m.dim()).map(|j| format!("{:8.4}", m.get(i, j))).collect();
        println!("  {}", row.join(" "));
    }
}

fn main() -> rhbm::Result<()> {
    for (rho, q) in [(1.0, 1.0), (0.5, 1.0), (0.0, 0.5), (-1.0, 1.0)] {
        let m = build_normalized_mixing(MixingParams::new(4, rho, q)?)?;
        println!("rho = {rho}, q = {q} (sum {:.3})", m.total());
        print(&m);
    }

    // 1000 nodes of mean degree 8: the entries become expected link counts,
    // diagonal entries counting each intra-block link twice.
    let normalized = build_normalized_mixing(MixingParams::new(4, 0.5, 1.0)?)?;
    let targets = scale_mixing_to_edges(&normalized, 1000, 8.0)?;
    println!("edge-count targets for N = 1000, k = 8:");
    print(&targets);

    let partition = make_partition(1000, 4, None)?;
    let shares = sample_fitness(&partition, 2.5, &CounterRng::new(1))?;
    let report = validate_targets(&targets, &partition, &shares);
    println!("hard violations: {}", report.hard().count());
    for w in report.warnings() {
        println!("warning: {w}");
    }
    Ok(())
}
