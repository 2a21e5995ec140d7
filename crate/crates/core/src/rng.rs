//! Counter-based random streams.
//!
//! A trajectory owns one ChaCha8 stream `(key, stream)`. Inside it, the word
//! position addresses a macro step and a node of the dyadic Brownian-bridge
//! tree below that step, so every increment is a pure function of
//! `(master seed, trajectory index, step, node)` regardless of evaluation order
//! or worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const STEP_BITS: u32 = 24;
const NODE_BITS: u32 = 24;
const WORD_BITS: u32 = 20;

/// Largest supported number of macro steps per trajectory.
pub const MAX_STEPS: u64 = 1 << STEP_BITS;
/// Deepest bridge refinement below a macro step.
pub const MAX_BRIDGE_DEPTH: u32 = NODE_BITS - 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoisePath {
    pub seed: u64,
    pub stream: u64,
}

impl NoisePath {
    /// Path of trajectory `index` in an ensemble keyed by `master_seed`.
    pub fn new(master_seed: u64, index: u64) -> Self {
        Self {
            seed: master_seed,
            stream: index,
        }
    }

    /// Generator for `node` of the bridge tree under macro step `step`.
    /// The root node is 1 and node `i` has children `2i` and `2i + 1`.
    pub fn node_rng(&self, step: u64, node: u64) -> ChaCha8Rng {
        debug_assert!(step < MAX_STEPS && node < (1 << NODE_BITS));
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        let pos = ((step as u128) << (NODE_BITS + WORD_BITS)) | ((node as u128) << WORD_BITS);
        rng.set_word_pos(pos);
        rng
    }
}
