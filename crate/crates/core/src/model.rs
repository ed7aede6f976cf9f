//! Node identity, roles and per-node state.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::geometry::Vec2;

/// Identifier of a node, unique and stable for the lifetime of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The four node types of the swarm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeRole {
    /// Traffic endpoint carried by a person on the ground.
    Traffic,
    /// Explorer roaming the zone and gossiping what it has seen.
    Surveillance,
    /// Intermediate member of a communication chain.
    Relay,
    /// Apex of a chain that is still growing.
    Prospection,
}

impl NodeRole {
    pub fn code(self) -> u8 {
        match self {
            NodeRole::Traffic => 0,
            NodeRole::Surveillance => 1,
            NodeRole::Relay => 2,
            NodeRole::Prospection => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<NodeRole> {
        Some(match code {
            0 => NodeRole::Traffic,
            1 => NodeRole::Surveillance,
            2 => NodeRole::Relay,
            3 => NodeRole::Prospection,
            _ => return None,
        })
    }

    /// True for roles whose motion is driven by the virtual force system.
    pub fn is_controlled(self) -> bool {
        matches!(self, NodeRole::Relay | NodeRole::Prospection)
    }

    pub fn can_become(self, next: NodeRole) -> bool {
        use NodeRole::*;
        matches!(
            (self, next),
            (Surveillance, Relay)
                | (Surveillance, Prospection)
                | (Prospection, Relay)
                | (Prospection, Surveillance)
                | (Relay, Surveillance)
        )
    }

    /// Validates a lifecycle transition.
    pub fn transition(self, next: NodeRole) -> Result<NodeRole, ModelError> {
        if self.can_become(next) {
            Ok(next)
        } else {
            Err(ModelError::IllegalTransition {
                from: self,
                to: next,
            })
        }
    }
}

/// Position of a node inside the single (source, destination) chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainLinks {
    pub predecessor: Option<NodeId>,
    pub successor: Option<NodeId>,
    pub source: NodeId,
    pub destination: NodeId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub id: NodeId,
    pub role: NodeRole,
    pub pos: Vec2,
    pub vel: Vec2,
    /// kg
    pub mass: f64,
    pub chain: Option<ChainLinks>,
    /// Current random-waypoint target, for nodes moving under RWP.
    pub waypoint: Option<Vec2>,
    pub waypoint_speed: f64,
}

impl NodeState {
    pub fn new(id: NodeId, role: NodeRole, pos: Vec2) -> Self {
        Self {
            id,
            role,
            pos,
            vel: Vec2::ZERO,
            mass: 1.0,
            chain: None,
            waypoint: None,
            waypoint_speed: 0.0,
        }
    }

    /// Changes role, refusing transitions outside the lifecycle graph.
    pub fn set_role(&mut self, next: NodeRole) -> Result<(), ModelError> {
        self.role = self.role.transition(next)?;
        Ok(())
    }

    pub fn speed(&self) -> f64 {
        self.vel.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use NodeRole::*;

    const ALL: [NodeRole; 4] = [Traffic, Surveillance, Relay, Prospection];

    #[test]
    fn lifecycle_graph() {
        let legal = [
            (Surveillance, Relay),
            (Surveillance, Prospection),
            (Prospection, Relay),
            (Prospection, Surveillance),
            (Relay, Surveillance),
        ];
        for from in ALL {
            for to in ALL {
                let expect = legal.contains(&(from, to));
                assert_eq!(from.transition(to).is_ok(), expect, "{from:?} -> {to:?}");
            }
        }
    }

    #[test]
    fn traffic_never_changes() {
        let mut n = NodeState::new(NodeId(0), Traffic, Vec2::ZERO);
        for to in ALL {
            assert!(n.set_role(to).is_err());
        }
        assert_eq!(n.role, Traffic);
    }

    #[test]
    fn role_codes_round_trip() {
        for r in ALL {
            assert_eq!(NodeRole::from_code(r.code()), Some(r));
        }
        assert_eq!(NodeRole::from_code(9), None);
    }
}
