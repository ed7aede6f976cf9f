//! Simplified proactive link-state routing.
//!
//! Each node broadcasts a HELLO listing the nodes it currently hears. A link
//! is symmetric once the neighbour's own HELLO lists us back. Nodes
//! periodically flood a topology message with their symmetric neighbours;
//! every node rebroadcasts each (originator, sequence) pair once. Routes are
//! shortest hop count over the union of own symmetric links and the
//! advertised topology, ties going to the lower next-hop id. Everything
//! expires after the hold time, so a broken link keeps being used until its
//! information ages out.

use std::collections::BTreeMap;

use crate::model::NodeId;
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoutingParams {
    pub hello_interval: SimTime,
    pub tc_interval: SimTime,
    pub hold_time: SimTime,
}

impl Default for RoutingParams {
    fn default() -> Self {
        Self {
            hello_interval: SimTime::from_secs(2.0),
            tc_interval: SimTime::from_secs(5.0),
            hold_time: SimTime::from_secs(6.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hello {
    pub origin: NodeId,
    /// Every node heard within the hold time.
    pub heard: Vec<NodeId>,
}

impl Hello {
    pub fn payload_bytes(&self) -> usize {
        8 + 4 * self.heard.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologyControl {
    pub origin: NodeId,
    pub seq: u32,
    pub neighbors: Vec<NodeId>,
}

impl TopologyControl {
    pub fn payload_bytes(&self) -> usize {
        12 + 4 * self.neighbors.len()
    }
}

/// Destination → (next hop, hop count).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RouteTable {
    routes: BTreeMap<NodeId, (NodeId, u32)>,
}

impl RouteTable {
    pub fn next_hop(&self, dest: NodeId) -> Option<NodeId> {
        self.routes.get(&dest).map(|r| r.0)
    }

    pub fn hops(&self, dest: NodeId) -> Option<u32> {
        self.routes.get(&dest).map(|r| r.1)
    }

    pub fn len(&self) -> usize {
        self.routes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }

    /// (destination, next hop, hops) in destination order.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId, u32)> + '_ {
        self.routes.iter().map(|(&d, &(n, h))| (d, n, h))
    }
}

#[derive(Debug, Clone, Copy)]
struct LinkEntry {
    heard_at: SimTime,
    /// When a HELLO from this neighbour last listed us.
    listed_at: Option<SimTime>,
}

#[derive(Debug, Clone)]
struct TopologyEntry {
    neighbors: Vec<NodeId>,
    received: SimTime,
}

/// One node's routing state.
#[derive(Debug, Clone)]
pub struct LinkStateView {
    owner: NodeId,
    params: RoutingParams,
    links: BTreeMap<NodeId, LinkEntry>,
    topology: BTreeMap<NodeId, TopologyEntry>,
    last_seq: BTreeMap<NodeId, u32>,
    own_seq: u32,
    table: RouteTable,
    dirty: bool,
    valid_until: SimTime,
}

impl LinkStateView {
    pub fn new(owner: NodeId, params: RoutingParams) -> Self {
        Self {
            owner,
            params,
            links: BTreeMap::new(),
            topology: BTreeMap::new(),
            last_seq: BTreeMap::new(),
            own_seq: 0,
            table: RouteTable::default(),
            dirty: true,
            valid_until: SimTime::ZERO,
        }
    }

    pub fn owner(&self) -> NodeId {
        self.owner
    }

    fn alive(&self, t: SimTime, now: SimTime) -> bool {
        now < t + self.params.hold_time
    }

    fn is_symmetric(&self, e: &LinkEntry, now: SimTime) -> bool {
        self.alive(e.heard_at, now) && e.listed_at.is_some_and(|t| self.alive(t, now))
    }

    pub fn symmetric_neighbors(&self, now: SimTime) -> Vec<NodeId> {
        self.links
            .iter()
            .filter(|(_, e)| self.is_symmetric(e, now))
            .map(|(&id, _)| id)
            .collect()
    }

    pub fn is_neighbor(&self, id: NodeId, now: SimTime) -> bool {
        self.links
            .get(&id)
            .is_some_and(|e| self.is_symmetric(e, now))
    }

    pub fn make_hello(&self, now: SimTime) -> Hello {
        Hello {
            origin: self.owner,
            heard: self
                .links
                .iter()
                .filter(|(_, e)| self.alive(e.heard_at, now))
                .map(|(&id, _)| id)
                .collect(),
        }
    }

    pub fn on_hello(&mut self, hello: &Hello, now: SimTime) {
        if hello.origin == self.owner {
            return;
        }
        let before = self
            .links
            .get(&hello.origin)
            .map(|e| self.is_symmetric(e, now));
        let lists_us = hello.heard.binary_search(&self.owner).is_ok();
        let entry = self.links.entry(hello.origin).or_insert(LinkEntry {
            heard_at: now,
            listed_at: None,
        });
        entry.heard_at = now;
        entry.listed_at = if lists_us { Some(now) } else { None };
        let after = Some(self.is_symmetric(&self.links[&hello.origin], now));
        if before != after {
            self.dirty = true;
        }
    }

    pub fn make_tc(&mut self, now: SimTime) -> TopologyControl {
        self.own_seq += 1;
        TopologyControl {
            origin: self.owner,
            seq: self.own_seq,
            neighbors: self.symmetric_neighbors(now),
        }
    }

    /// Records a topology message. Returns true the first time a given
    /// (originator, sequence) is seen, i.e. when it should be rebroadcast.
    pub fn on_tc(&mut self, tc: &TopologyControl, now: SimTime) -> bool {
        if tc.origin == self.owner {
            return false;
        }
        if self.last_seq.get(&tc.origin).is_some_and(|&s| s >= tc.seq) {
            return false;
        }
        self.last_seq.insert(tc.origin, tc.seq);
        let changed = match self.topology.get(&tc.origin) {
            Some(old) => !self.alive(old.received, now) || old.neighbors != tc.neighbors,
            None => true,
        };
        self.topology.insert(
            tc.origin,
            TopologyEntry {
                neighbors: tc.neighbors.clone(),
                received: now,
            },
        );
        if changed {
            self.dirty = true;
        }
        true
    }

    /// Current routes, recomputed when the view changed or something expired.
    pub fn routes(&mut self, now: SimTime) -> &RouteTable {
        if self.dirty || now >= self.valid_until {
            self.recompute(now);
        }
        &self.table
    }

    pub fn next_hop(&mut self, dest: NodeId, now: SimTime) -> Option<NodeId> {
        self.routes(now).next_hop(dest)
    }

    fn recompute(&mut self, now: SimTime) {
        let mut valid_until = SimTime::MAX;
        let mut note = |t: SimTime| {
            let exp = t + self.params.hold_time;
            if exp > now {
                valid_until = valid_until.min(exp);
            }
        };
        let mut adjacency: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        let mut own = Vec::new();
        for (&id, e) in &self.links {
            if self.is_symmetric(e, now) {
                own.push(id);
                note(e.heard_at);
                note(e.listed_at.expect("symmetric link was listed"));
            }
        }
        adjacency.insert(self.owner, own);
        for (&orig, t) in &self.topology {
            if self.alive(t.received, now) {
                note(t.received);
                adjacency.insert(orig, t.neighbors.clone());
            }
        }

        // Breadth-first search; a node reached by several parents at the same
        // depth keeps the smallest first hop among them.
        let mut table: BTreeMap<NodeId, (NodeId, u32)> = BTreeMap::new();
        let mut frontier = vec![self.owner];
        let mut depth = 0;
        while !frontier.is_empty() {
            depth += 1;
            let mut next: BTreeMap<NodeId, NodeId> = BTreeMap::new();
            for u in &frontier {
                let Some(adj) = adjacency.get(u) else {
                    continue;
                };
                let via = if *u == self.owner {
                    None
                } else {
                    Some(table[u].0)
                };
                for &v in adj {
                    if v == self.owner || table.contains_key(&v) {
                        continue;
                    }
                    let hop = via.unwrap_or(v);
                    next.entry(v)
                        .and_modify(|h| *h = (*h).min(hop))
                        .or_insert(hop);
                }
            }
            for (&v, &hop) in &next {
                table.insert(v, (hop, depth));
            }
            frontier = next.into_keys().collect();
        }
        self.table = RouteTable { routes: table };
        self.valid_until = valid_until;
        self.dirty = false;
    }
}
