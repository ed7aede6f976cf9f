//! Chain lifecycle decisions.
//!
//! Every decision is taken locally by the node concerned, from its own view
//! of the world: the source bootstraps, the apex extends or completes, every
//! member checks its links and its own usefulness. Decisions are returned as
//! a [`ChainDirective`] and applied by the simulation engine.

use crate::force::ForceParams;
use crate::geometry::{distance, Vec2};
use crate::model::{ChainLinks, NodeId, NodeRole, NodeState};

use super::beacon::BeaconEntry;
use super::db::{LinkTable, NeighborDatabase};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub radio_range: f64,
    /// Records older than this are not trusted for recruiting or completion, s.
    pub record_freshness: f64,
    /// A chain neighbour unheard for longer than this is lost, s.
    pub link_lifetime: f64,
    pub force: ForceParams,
}

/// A chain change decided by one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChainDirective {
    None,
    /// Turn surveillance node `target` into `to` with the given links.
    Promote {
        target: NodeId,
        to: NodeRole,
        links: ChainLinks,
    },
    /// `target` leaves the chain and resumes exploring; its neighbours re-link.
    Demote {
        target: NodeId,
    },
    /// The deciding node reaches the destination; `links` are its links afterwards.
    Complete {
        links: ChainLinks,
    },
    /// The chain is lost; every member reverts to exploring.
    Teardown,
}

fn fresh(e: &BeaconEntry, now: f64, p: &ProtocolParams) -> bool {
    now - e.timestamp <= p.record_freshness
}

/// Fresh surveillance records satisfying `accept`, minimising `score`; ties
/// go to the lowest id.
fn best_candidate(
    db: &NeighborDatabase,
    now: f64,
    p: &ProtocolParams,
    accept: impl Fn(&BeaconEntry) -> bool,
    score: impl Fn(&BeaconEntry) -> f64,
) -> Option<NodeId> {
    let mut best: Option<(f64, NodeId)> = None;
    for e in db.iter() {
        if e.role != NodeRole::Surveillance || !fresh(e, now, p) || !accept(e) {
            continue;
        }
        let s = score(e);
        if best.is_none_or(|(b, _)| s < b) {
            best = Some((s, e.node));
        }
    }
    best.map(|(_, id)| id)
}

/// Source-side chain start.
///
/// Requires some record of the destination. Completes immediately when the
/// destination is within radio range, otherwise recruits the nearest
/// surveillance node in range as the first apex.
pub fn chain_bootstrap(
    source: &NodeState,
    destination: NodeId,
    db: &NeighborDatabase,
    p: &ProtocolParams,
    now: f64,
) -> ChainDirective {
    if source.role != NodeRole::Traffic || source.chain.is_some() {
        return ChainDirective::None;
    }
    let Some(dest) = db.get(destination) else {
        return ChainDirective::None;
    };
    let base = ChainLinks {
        predecessor: None,
        successor: None,
        source: source.id,
        destination,
    };
    if fresh(dest, now, p) && distance(source.pos, dest.position_at(now)) <= p.radio_range {
        return ChainDirective::Complete {
            links: ChainLinks {
                successor: Some(destination),
                ..base
            },
        };
    }
    let here = source.pos;
    match best_candidate(
        db,
        now,
        p,
        |e| distance(here, e.position_at(now)) <= p.radio_range,
        |e| distance(here, e.position_at(now)),
    ) {
        Some(target) => ChainDirective::Promote {
            target,
            to: NodeRole::Prospection,
            links: ChainLinks {
                predecessor: Some(source.id),
                ..base
            },
        },
        None => ChainDirective::None,
    }
}

/// Apex-side growth.
///
/// Completes when a fresh record puts the destination in radio range.
/// Otherwise, once stretched to `th_dmax` from its predecessor, recruits the
/// in-range surveillance node closest to the believed destination position.
pub fn chain_extend(
    apex: &NodeState,
    db: &NeighborDatabase,
    dest_pos: Option<Vec2>,
    p: &ProtocolParams,
    now: f64,
) -> ChainDirective {
    let Some(links) = apex.chain else {
        return ChainDirective::None;
    };
    if apex.role != NodeRole::Prospection || links.successor.is_some() {
        return ChainDirective::None;
    }
    if let Some(d) = db.get(links.destination) {
        if fresh(d, now, p) && distance(apex.pos, d.position_at(now)) <= p.radio_range {
            return ChainDirective::Complete {
                links: ChainLinks {
                    successor: Some(links.destination),
                    ..links
                },
            };
        }
    }
    let Some(pred) = links.predecessor.and_then(|id| db.get(id)) else {
        return ChainDirective::None;
    };
    if distance(apex.pos, pred.position_at(now)) < p.force.th_dmax {
        return ChainDirective::None;
    }
    let Some(dest) = dest_pos else {
        return ChainDirective::None;
    };
    let here = apex.pos;
    match best_candidate(
        db,
        now,
        p,
        |e| distance(here, e.position_at(now)) <= p.radio_range,
        |e| distance(e.position_at(now), dest),
    ) {
        Some(target) => ChainDirective::Promote {
            target,
            to: NodeRole::Prospection,
            links: ChainLinks {
                predecessor: Some(apex.id),
                successor: None,
                ..links
            },
        },
        None => ChainDirective::None,
    }
}

/// Link upkeep for any chain member, the source included.
///
/// In order: a neighbour unheard for `link_lifetime` tears the chain down; a
/// relay whose neighbours are within `th_dmin` of each other steps out; a
/// link stretched to `th_dmax` towards a non-apex successor recruits a
/// surveillance node in range of both ends as an extra relay.
pub fn chain_maintain(
    node: &NodeState,
    db: &NeighborDatabase,
    heard: &LinkTable,
    p: &ProtocolParams,
    now: f64,
) -> ChainDirective {
    let Some(links) = node.chain else {
        return ChainDirective::None;
    };
    for id in [links.predecessor, links.successor].into_iter().flatten() {
        if !heard.is_alive(id, now, p.link_lifetime) {
            return ChainDirective::Teardown;
        }
    }
    let pred = links.predecessor.and_then(|id| db.get(id));
    let succ = links.successor.and_then(|id| db.get(id));
    if node.role == NodeRole::Relay {
        if let (Some(a), Some(b)) = (pred, succ) {
            if distance(a.position_at(now), b.position_at(now)) <= p.force.th_dmin {
                return ChainDirective::Demote { target: node.id };
            }
        }
    }
    if let Some(s) = succ {
        if s.role != NodeRole::Prospection
            && distance(node.pos, s.position_at(now)) >= p.force.th_dmax
        {
            let (here, there) = (node.pos, s.position_at(now));
            let mid = (here + there) * 0.5;
            let target = best_candidate(
                db,
                now,
                p,
                |e| {
                    distance(here, e.position_at(now)) <= p.radio_range
                        && distance(there, e.position_at(now)) <= p.radio_range
                },
                |e| distance(e.position_at(now), mid),
            );
            if let Some(target) = target {
                return ChainDirective::Promote {
                    target,
                    to: NodeRole::Relay,
                    links: ChainLinks {
                        predecessor: Some(node.id),
                        successor: Some(s.node),
                        ..links
                    },
                };
            }
        }
    }
    ChainDirective::None
}
