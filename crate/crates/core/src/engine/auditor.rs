//! Structural consistency checks on relay chains.

use std::fmt;

use crate::model::{NodeId, NodeRole, NodeState};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainViolation {
    /// Role and chain membership disagree (e.g. a relay without links).
    RoleMismatch(NodeId),
    /// `a` points to `b` but `b` does not point back.
    BrokenLink { a: NodeId, b: NodeId },
    /// Following successors from the source does not visit every member exactly once.
    NotALine(NodeId),
}

impl fmt::Display for ChainViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainViolation::RoleMismatch(n) => {
                write!(f, "node {n}: role inconsistent with chain links")
            }
            ChainViolation::BrokenLink { a, b } => write!(f, "link {a} -> {b} is not reciprocated"),
            ChainViolation::NotALine(s) => write!(f, "chain of source {s} is not a simple path"),
        }
    }
}

/// Checks every chain in `nodes` (indexed by id).
pub fn audit_chains(nodes: &[NodeState]) -> Vec<ChainViolation> {
    let mut out = Vec::new();
    let links = |id: NodeId| nodes.get(id.index()).and_then(|n| n.chain);
    for n in nodes {
        let shape_ok = match (n.role, n.chain) {
            (NodeRole::Surveillance, c) => c.is_none(),
            (NodeRole::Relay, Some(c)) => c.predecessor.is_some() && c.successor.is_some(),
            (NodeRole::Prospection, Some(c)) => c.predecessor.is_some() && c.successor.is_none(),
            (NodeRole::Traffic, Some(c)) => {
                (n.id == c.source && c.predecessor.is_none())
                    || (n.id == c.destination && c.successor.is_none())
            }
            (NodeRole::Traffic, None) => true,
            (_, None) => false,
        };
        if !shape_ok {
            out.push(ChainViolation::RoleMismatch(n.id));
        }
        let Some(c) = n.chain else { continue };
        if let Some(s) = c.successor {
            if links(s).is_none_or(|sc| sc.predecessor != Some(n.id) || sc.source != c.source) {
                out.push(ChainViolation::BrokenLink { a: n.id, b: s });
            }
        }
        if let Some(p) = c.predecessor {
            if links(p).is_none_or(|pc| pc.successor != Some(n.id) || pc.source != c.source) {
                out.push(ChainViolation::BrokenLink { a: n.id, b: p });
            }
        }
    }

    let mut sources: Vec<NodeId> = nodes
        .iter()
        .filter_map(|n| n.chain.map(|c| c.source))
        .collect();
    sources.sort();
    sources.dedup();
    for src in sources {
        let members = nodes
            .iter()
            .filter(|n| n.chain.is_some_and(|c| c.source == src))
            .count();
        let mut seen = 0;
        let mut cur = Some(src);
        while let Some(id) = cur {
            seen += 1;
            if seen > members {
                break;
            }
            cur = links(id).and_then(|c| c.successor);
        }
        if seen != members {
            out.push(ChainViolation::NotALine(src));
        }
    }
    out
}
