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

//! Reads an edge list and a partition and reports the empirical mixing
//! matrix, degrees and clustering. Without arguments it writes and reads back
//! a small ring lattice.
//!
//! ```text
//! cargo run --example graph_stats -- [edges.txt partition.csv]
//! ```

use std::path::PathBuf;

use rhbm::experiment::cmd_stats;
use rhbm::{make_partition, Graph};

fn main() -> rhbm::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (edges, partition) = match args.as_slice() {
        [e, p] => (PathBuf::from(e), PathBuf::from(p)),
        _ => {
            let dir = std::env::temp_dir().join("rhbm-graph-stats");
            std::fs::create_dir_all(&dir).map_err(|e| rhbm::Error::Io { path: dir.clone(), source: e })?;
            // Each node links to its two nearest neighbours on either side.
            let n = 40;
            let ring = Graph::from_edges(n, (0..n).flat_map(|i| [(i, (i + 1) % n), (i, (i + 2) % n)]))?;
            ring.write_edge_list(&dir.join("edges.txt"))?;
            make_partition(n, 4, None)?.write_csv(&dir.join("partition.csv"))?;
            (dir.join("edges.txt"), dir.join("partition.csv"))
        }
    };

    let stats = cmd_stats(&edges, &partition)?;
    print!("{}", stats.to_csv());
    println!("mixing matrix (diagonal counts intra-block links twice):");
    let m = &stats.mixing;
    for i in 0..m.dim() {
        let row: Vec<String> = (0..m.dim()).map(|j| format!("{:6}", m.get(i, j))).collect();
        println!("  {}", row.join(" "));
    }
    let max = stats.degrees.iter().max().copied().unwrap_or(0);
    println!("max degree {max}");
    Ok(())
}
