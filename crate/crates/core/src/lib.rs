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

//! Random Hyperbolic Block Model.
//!
//! Geometric random graphs on the circle whose block-to-block link counts
//! follow an arbitrary target mixing matrix. The crate covers the whole
//! workflow:
//!
//! * [`mixing`]: block partitions, the parametric mixing-matrix family and
//!   feasibility checks;
//! * [`calibration`]: fitness and angle sampling, the angular connection
//!   kernel and the finite-size calibration of fitnesses and block forces;
//! * [`generate`]: direct, blockwise and plain one-dimensional samplers;
//! * [`metrics`]: empirical mixing, degrees, clustering and error metrics;
//! * [`embedding`]: evaluation of embeddings produced by external `S^D` tools;
//! * [`experiment`]: configuration, parameter sweeps and on-disk artifacts.

pub mod calibration;
pub mod embedding;
pub mod error;
pub mod experiment;
pub mod generate;
pub mod graph;
pub mod kernel;
pub mod metrics;
pub mod mixing;
pub mod rng;
mod textio;

pub use calibration::{
    calibrate, expected_block_degrees, sample_angles, sample_fitness, CalibrationOptions,
    CalibrationReport, LatentState,
};
pub use embedding::{load_embedding, EmbeddingSD};
pub use error::{Error, Result};
pub use generate::{edge_probability, sample_graph, sample_graph_blockwise, sample_s1_graph, S1Params};
pub use graph::Graph;
pub use kernel::{angular_connection_kernel, AngularKernel};
pub use metrics::StatsReport;
pub use mixing::{
    build_normalized_mixing, make_partition, scale_mixing_to_edges, validate_targets, BlockPartition,
    MixingMatrix, MixingParams,
};
pub use rng::CounterRng;
