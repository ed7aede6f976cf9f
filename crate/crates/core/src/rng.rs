//! Seed discipline: one root seed, one independent ChaCha stream per
//! (node, purpose) pair. Changing how often one purpose draws never shifts
//! another purpose's sequence, so runs that differ only in beacon settings
//! share identical mobility.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Placement = 1,
    Mobility = 2,
    BeaconSelection = 3,
    Phase = 4,
}

pub fn stream(seed: u64, node: NodeId, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((u64::from(node.0) << 8) | purpose as u64);
    rng
}
