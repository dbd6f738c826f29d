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

//! Counter-based random streams.
//!
//! Every random value is addressed by `(seed, domain, stream, position)` in a
//! ChaCha8 keystream, so a draw depends only on what it is for and never on
//! the order in which draws are made. Edge draws use `stream = i` and
//! `position = j` for the pair `i < j`, which makes graph sampling
//! independent of iteration order and thread schedule.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Purpose of a random stream; different domains never share keystream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Edges,
    Fitness,
    Angles,
    /// Free-form domain for callers needing extra independent streams.
    Other(u64),
}

impl Domain {
    fn code(self) -> u64 {
        match self {
            Domain::Edges => 1,
            Domain::Fitness => 2,
            Domain::Angles => 3,
            Domain::Other(c) => 0x1000_0000_0000_0000 | c,
        }
    }
}

/// A 64-bit seed from which every random stream is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// An independent seed for the `index`-th replicate.
    pub fn derive(&self, index: u64) -> CounterRng {
        CounterRng::new(splitmix64(self.seed ^ splitmix64(index.wrapping_add(0x5EED))))
    }

    fn keyed(&self, domain: Domain) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&domain.code().to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }

    /// Sequential generator private to one node in one domain.
    pub fn node_rng(&self, domain: Domain, node: usize) -> ChaCha8Rng {
        let mut rng = self.keyed(domain);
        rng.set_stream(node as u64);
        rng
    }

    /// Random-access view of the edge uniforms for pairs `(row, j)`.
    pub fn pair_row(&self, row: usize) -> PairRow {
        let mut rng = self.keyed(Domain::Edges);
        rng.set_stream(row as u64);
        PairRow { rng, next: 0 }
    }

    /// Uniform in `[0, 1)` for the unordered pair `{i, j}`.
    pub fn pair_uniform(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        self.pair_row(lo).uniform_at(hi)
    }
}

/// Uniforms of one row of the pair table, cheap when read in increasing order.
pub struct PairRow {
    rng: ChaCha8Rng,
    next: usize,
}

impl PairRow {
    #[inline]
    pub fn uniform_at(&mut self, col: usize) -> f64 {
        if col != self.next {
            self.rng.set_word_pos(2 * col as u128);
        }
        self.next = col + 1;
        unit_f64(self.rng.next_u64())
    }
}

#[inline]
fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
