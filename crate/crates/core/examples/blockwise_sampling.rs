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

//! Samples the same latent state with the direct all-pairs sampler and the
//! blockwise sampler, which only ever looks at one block pair at a time.
//! Both draw each pair from the same counter-based stream, so the edge sets
//! coincide exactly.
//!
//! ```text
//! cargo run --release --example blockwise_sampling
//! ```

use std::time::Instant;

use rhbm::experiment::{run_model, ExperimentConfig};
use rhbm::generate::sample_block_pair;
use rhbm::{sample_graph, sample_graph_blockwise, CounterRng};

fn main() -> rhbm::Result<()> {
    let config = ExperimentConfig {
        nodes: 1500,
        communities: 5,
        seed: 3,
        ..ExperimentConfig::default()
    };
    let state = run_model(&config)?.state;

    for seed in 0..3 {
        let rng = CounterRng::new(seed);
        let t = Instant::now();
        let direct = sample_graph(&state, &rng);
        let t_direct = t.elapsed();
        let t = Instant::now();
        let blockwise = sample_graph_blockwise(&state, &rng);
        let t_block = t.elapsed();
        println!(
            "seed {seed}: {} edges, identical {}, direct {t_direct:.2?}, blockwise {t_block:.2?}",
            direct.num_edges(),
            direct == blockwise
        );
    }

    // A single block pair can be drawn on its own.
    let links = sample_block_pair(&state, 0, 1, &CounterRng::new(0));
    println!("links between blocks 0 and 1: {}", links.len());
    Ok(())
}
