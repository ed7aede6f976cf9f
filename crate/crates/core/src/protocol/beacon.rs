use rand::seq::index;
use rand::Rng;

use crate::error::BeaconError;
use crate::geometry::Vec2;
use crate::model::{NodeId, NodeRole, NodeState};

use super::db::NeighborDatabase;

/// Chain membership advertised by a relay, prospection node or endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainFields {
    pub successor: Option<NodeId>,
    pub predecessor: Option<NodeId>,
    pub destination: NodeId,
    /// Set when the emitter asks the node named as `successor` to join the chain.
    pub insertion_requested: bool,
}

/// The chain's believed endpoint positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointFields {
    pub source_pos: Vec2,
    pub dest_pos: Vec2,
}

/// One node record: what its subject node looked like at `timestamp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeaconEntry {
    pub node: NodeId,
    pub role: NodeRole,
    pub pos: Vec2,
    pub vel: Vec2,
    /// Generation time of the information, s.
    pub timestamp: f64,
    pub chain: Option<ChainFields>,
    pub endpoints: Option<EndpointFields>,
}

impl BeaconEntry {
    /// Position dead-reckoned from the record's velocity to time `t`.
    pub fn position_at(&self, t: f64) -> Vec2 {
        self.pos + self.vel * (t - self.timestamp).max(0.0)
    }

    /// A bare self-description of `node` at time `now`.
    pub fn describe(node: &NodeState, now: f64) -> Self {
        Self {
            node: node.id,
            role: node.role,
            pos: node.pos,
            vel: node.vel,
            timestamp: now,
            chain: None,
            endpoints: None,
        }
    }
}

/// A multi-entry beacon. The first entry always describes the emitter.
#[derive(Debug, Clone, PartialEq)]
pub struct Beacon {
    entries: Vec<BeaconEntry>,
}

impl Beacon {
    pub fn new(entries: Vec<BeaconEntry>) -> Result<Self, BeaconError> {
        if entries.is_empty() {
            return Err(BeaconError::Empty);
        }
        for (i, e) in entries.iter().enumerate() {
            if entries[..i].iter().any(|o| o.node == e.node) {
                return Err(BeaconError::DuplicateEntry(e.node));
            }
        }
        Ok(Self { entries })
    }

    /// Skips validation; for exercising the receive-side checks.
    pub fn new_unchecked(entries: Vec<BeaconEntry>) -> Self {
        Self { entries }
    }

    pub fn emitter(&self) -> &BeaconEntry {
        &self.entries[0]
    }

    pub fn entries(&self) -> &[BeaconEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn validate(&self) -> Result<(), BeaconError> {
        Beacon::new(self.entries.clone()).map(|_| ())
    }
}

/// How the slots after the emitter's own entry are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Uniformly at random among known records.
    Random,
    /// Largest timestamps first, ties to the lower id.
    Fresh,
}

/// Assembles a beacon of at most `cs` entries starting with `own`.
pub fn build_beacon<R: Rng + ?Sized>(
    own: BeaconEntry,
    db: &NeighborDatabase,
    selection: Selection,
    cs: usize,
    rng: &mut R,
) -> Beacon {
    let slots = cs.saturating_sub(1);
    let mut entries = Vec::with_capacity(cs.max(1));
    entries.push(own);
    if slots > 0 {
        let mut candidates: Vec<&BeaconEntry> = db.iter().filter(|e| e.node != own.node).collect();
        let take = slots.min(candidates.len());
        match selection {
            Selection::Random => {
                if take == candidates.len() {
                    entries.extend(candidates.into_iter().copied());
                } else {
                    let picked = index::sample(rng, candidates.len(), take);
                    entries.extend(picked.iter().map(|i| *candidates[i]));
                }
            }
            Selection::Fresh => {
                candidates.sort_by(|a, b| {
                    b.timestamp
                        .total_cmp(&a.timestamp)
                        .then_with(|| a.node.cmp(&b.node))
                });
                entries.extend(candidates.into_iter().take(take).copied());
            }
        }
    }
    Beacon { entries }
}
