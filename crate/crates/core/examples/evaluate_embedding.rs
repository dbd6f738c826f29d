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

//! Evaluates how well an S^D embedding reproduces the mesoscale structure of
//! its graph. Here the graph comes from the S^1 model itself and the
//! embedding is the generating one, so errors are sampling noise only.
//!
//! ```text
//! cargo run --release --example evaluate_embedding
//! ```

use rhbm::calibration::sample_raw_fitness;
use rhbm::embedding::{expected_mixing_from_embedding, EmbeddingSD};
use rhbm::experiment::cmd_eval_embedding;
use rhbm::metrics::{empirical_mixing, mixing_relative_error};
use rhbm::{make_partition, sample_angles, sample_s1_graph, CounterRng, S1Params};

fn main() -> rhbm::Result<()> {
    let n = 1500;
    let rng = CounterRng::new(11);
    let raw = sample_raw_fitness(n, 2.5, &rng)?;
    let mean = raw.iter().sum::<f64>() / n as f64;
    let kappa = raw.iter().map(|x| 8.0 * x / mean).collect();
    let theta = sample_angles(n, &rng);
    let params = S1Params::with_default_density(kappa, 2.5)?;
    let graph = sample_s1_graph(&params, &theta, &rng)?;
    let embedding = EmbeddingSD::from_s1(&params, &theta)?;
    let partition = make_partition(n, 6, None)?;

    let expected = expected_mixing_from_embedding(&embedding, &partition)?;
    let observed = empirical_mixing(&graph, &partition)?;
    println!("analytic mixing error {:.4}", mixing_relative_error(&expected, &observed)?);

    // The same evaluation through files, as the command line does it.
    let dir = std::env::temp_dir().join("rhbm-eval-embedding");
    std::fs::create_dir_all(&dir).map_err(|e| rhbm::Error::Io { path: dir.clone(), source: e })?;
    let (edges, part, emb) = (dir.join("edges.txt"), dir.join("partition.csv"), dir.join("embedding.csv"));
    graph.write_edge_list(&edges)?;
    partition.write_csv(&part)?;
    embedding.write_csv(&emb)?;
    let eval = cmd_eval_embedding(&edges, &part, &emb, 10, 1, None)?;
    print!("{}", eval.to_csv());
    Ok(())
}
