use std::rc::Rc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Scheme, SimConfig};
use crate::error::ConfigError;
use crate::force::{integrate_step, prospection_drive, total_force, ChainFrame, Neighbor};
use crate::geometry::Vec2;
use crate::mobility::{rwp_step, RwpParams};
use crate::model::{ChainLinks, NodeId, NodeRole, NodeState};
use crate::protocol::refresh_snapshot;
use crate::protocol::{
    build_beacon, chain_bootstrap, chain_extend, chain_maintain, process_beacon, wire, Beacon,
    BeaconEntry, ChainDirective, ChainFields, EndpointFields, LinkTable, NeighborDatabase,
    ProtocolParams, Selection,
};
use crate::radio::{
    in_range, CbrSource, Channel, DataPacket, Frame, FrameKind, Hello, LinkStateView, PhyParams,
    RouteTable, RoutingParams, TopologyControl, Transmission,
};
use crate::rng::{stream, Purpose};
use crate::time::SimTime;

use super::auditor::audit_chains;
use super::event::EventQueue;
use super::metrics::{ContactTracker, DropCause, RunMetrics};

const SOURCE: NodeId = NodeId(0);
const DESTINATION: NodeId = NodeId(1);

#[derive(Debug)]
struct BeaconMsg {
    beacon: Beacon,
    directive: Option<ChainDirective>,
}

#[derive(Debug, Clone)]
enum Payload {
    Beacon(Rc<BeaconMsg>),
    Hello(Rc<Hello>),
    Tc(Rc<TopologyControl>),
    Data(DataPacket),
}

#[derive(Debug, Clone, Copy)]
enum RoutingMsg {
    Hello,
    Tc,
}

#[derive(Debug)]
enum EventKind {
    MobilityTick,
    BeaconEmit(NodeId),
    RoutingTick(NodeId, RoutingMsg),
    CbrEmit,
    TransmissionEnd(usize),
    FrameDelivery {
        receiver: NodeId,
        src: NodeId,
        payload: Payload,
    },
    ChannelRecheck,
}

/// One sample of a trajectory trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub time: f64,
    pub node: u32,
    pub role: &'static str,
    pub x: f64,
    pub y: f64,
}

fn role_name(r: NodeRole) -> &'static str {
    match r {
        NodeRole::Traffic => "T",
        NodeRole::Surveillance => "S",
        NodeRole::Relay => "R",
        NodeRole::Prospection => "P",
    }
}

/// A single simulation run.
///
/// Node 0 is the traffic source, node 1 the destination and the remaining
/// nodes form the swarm.
pub struct Simulation {
    cfg: SimConfig,
    nodes: Vec<NodeState>,
    positions: Vec<Vec2>,
    protocol: Option<ProtocolParams>,
    dbs: Vec<NeighborDatabase>,
    truth: NeighborDatabase,
    heard: Vec<LinkTable>,
    hints: Vec<Option<EndpointFields>>,
    mobility_rng: Vec<ChaCha8Rng>,
    beacon_rng: Vec<ChaCha8Rng>,
    routing: Vec<LinkStateView>,
    channel: Channel<Payload>,
    in_flight: Vec<Option<Transmission<Payload>>>,
    free_slots: Vec<usize>,
    queue: EventQueue<EventKind>,
    recheck_pending: bool,
    cbr: Option<CbrSource>,
    contacts: ContactTracker,
    metrics: RunMetrics,
    now: SimTime,
    end: SimTime,
    dt: SimTime,
    frozen: bool,
    traffic_rwp: RwpParams,
    swarm_rwp: RwpParams,
    trace_every: Option<u64>,
    ticks: u64,
    trace: Vec<TraceRow>,
}

impl Simulation {
    pub fn new(cfg: &SimConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let n = cfg.n_swarm + 2;
        let positions: Vec<Vec2> = (0..n)
            .map(|i| {
                let id = NodeId(i as u32);
                match (cfg.endpoints, i) {
                    (Some(eps), 0 | 1) => eps[i],
                    // the swarm takes off from the middle of the zone
                    (_, 2..) => cfg.zone.center(),
                    _ => {
                        let mut rng = stream(cfg.seed, id, Purpose::Placement);
                        Vec2::new(
                            rng.random_range(0.0..=cfg.zone.width),
                            rng.random_range(0.0..=cfg.zone.height),
                        )
                    }
                }
            })
            .collect();
        let mut sim = Self::build(cfg, positions, false);
        if cfg.scheme.uses_beacons() {
            sim.protocol = Some(ProtocolParams {
                radio_range: cfg.radio_range,
                record_freshness: 3.0 * cfg.beacon_interval,
                link_lifetime: cfg.chain_link_lifetime(),
                force: cfg.force,
            });
        }
        sim.cbr = Some(CbrSource::new(
            SOURCE,
            DESTINATION,
            cfg.cbr_rate,
            cfg.cbr_packet,
        ));
        sim.schedule_start();
        Ok(sim)
    }

    /// Motionless nodes at `positions` running only the routing protocol.
    pub fn static_network(cfg: &SimConfig, positions: &[Vec2]) -> Result<Self, ConfigError> {
        cfg.validate()?;
        if positions.len() < 2 {
            return Err(ConfigError::Invalid(
                "a static network needs at least two nodes".into(),
            ));
        }
        let mut sim = Self::build(cfg, positions.to_vec(), true);
        sim.schedule_start();
        Ok(sim)
    }

    fn build(cfg: &SimConfig, positions: Vec<Vec2>, frozen: bool) -> Self {
        let n = positions.len();
        let nodes: Vec<NodeState> = positions
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let role = if i < 2 {
                    NodeRole::Traffic
                } else {
                    NodeRole::Surveillance
                };
                NodeState::new(NodeId(i as u32), role, p)
            })
            .collect();
        let ids = || (0..n).map(|i| NodeId(i as u32));
        let routing_params = RoutingParams {
            hello_interval: SimTime::from_secs(cfg.hello_interval),
            tc_interval: SimTime::from_secs(cfg.tc_interval),
            hold_time: SimTime::from_secs(cfg.hold_time),
        };
        let mut truth = NeighborDatabase::new(None);
        refresh_snapshot(&mut truth, &nodes, 0.0);
        Self {
            positions,
            protocol: None,
            dbs: ids().map(|id| NeighborDatabase::new(Some(id))).collect(),
            truth,
            heard: vec![LinkTable::new(); n],
            hints: vec![None; n],
            mobility_rng: ids()
                .map(|id| stream(cfg.seed, id, Purpose::Mobility))
                .collect(),
            beacon_rng: ids()
                .map(|id| stream(cfg.seed, id, Purpose::BeaconSelection))
                .collect(),
            routing: ids()
                .map(|id| LinkStateView::new(id, routing_params))
                .collect(),
            channel: Channel::new(n, cfg.radio_range, PhyParams::default()),
            in_flight: Vec::new(),
            free_slots: Vec::new(),
            queue: EventQueue::default(),
            recheck_pending: false,
            cbr: None,
            contacts: ContactTracker::new(),
            metrics: RunMetrics::default(),
            now: SimTime::ZERO,
            end: SimTime::from_secs(cfg.duration),
            dt: SimTime::from_secs(cfg.dt),
            frozen,
            traffic_rwp: cfg.traffic_rwp(),
            swarm_rwp: cfg.swarm_rwp(),
            trace_every: None,
            ticks: 0,
            trace: Vec::new(),
            nodes,
            cfg: cfg.clone(),
        }
    }

    fn schedule_start(&mut self) {
        let cfg = &self.cfg;
        for i in 0..self.nodes.len() {
            let id = NodeId(i as u32);
            let mut rng = stream(cfg.seed, id, Purpose::Phase);
            let beacon = rng.random_range(0.0..cfg.beacon_interval);
            let hello = rng.random_range(0.0..cfg.hello_interval);
            let tc = rng.random_range(0.0..cfg.tc_interval);
            if self.protocol.is_some() {
                self.queue
                    .push(SimTime::from_secs(beacon), EventKind::BeaconEmit(id));
            }
            self.queue.push(
                SimTime::from_secs(hello),
                EventKind::RoutingTick(id, RoutingMsg::Hello),
            );
            self.queue.push(
                SimTime::from_secs(tc),
                EventKind::RoutingTick(id, RoutingMsg::Tc),
            );
        }
        if self.cbr.is_some() {
            self.queue.push(SimTime::ZERO, EventKind::CbrEmit);
        }
        if !self.frozen {
            self.queue.push(self.dt, EventKind::MobilityTick);
        }
        self.observe_contacts();
    }

    /// Records every node's position each `every` mobility ticks.
    pub fn enable_trace(&mut self, every: u64) {
        self.trace_every = Some(every.max(1));
        self.record_trace();
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    /// What `node` currently knows about the other nodes.
    pub fn knowledge_of(&self, node: NodeId) -> &NeighborDatabase {
        self.knowledge(node.index())
    }

    /// Current route table of `node`.
    pub fn route_table(&mut self, node: NodeId) -> RouteTable {
        self.routing[node.index()].routes(self.now).clone()
    }

    /// Processes every event scheduled strictly before `t` (capped at the run end).
    pub fn run_until(&mut self, t: SimTime) {
        let t = t.min(self.end);
        while let Some(time) = self.queue.peek_time() {
            if time >= t {
                break;
            }
            let ev = self.queue.pop().expect("peeked");
            debug_assert!(ev.time >= self.now, "time went backwards");
            self.now = ev.time;
            self.metrics.events += 1;
            self.dispatch(ev.kind);
        }
        self.now = self.now.max(t);
    }

    /// Runs to the end and returns the metrics.
    pub fn finish(mut self) -> RunMetrics {
        self.run_until(self.end);
        self.close()
    }

    /// Like [`finish`](Self::finish), also returning the trace.
    pub fn finish_traced(mut self) -> (RunMetrics, Vec<TraceRow>) {
        self.run_until(self.end);
        let trace = std::mem::take(&mut self.trace);
        (self.close(), trace)
    }

    fn close(mut self) -> RunMetrics {
        let is_data = |p: &Payload| matches!(p, Payload::Data(_));
        let queued = self.channel.queued().filter(|f| is_data(&f.body)).count();
        let on_air = self
            .in_flight
            .iter()
            .flatten()
            .filter(|t| is_data(&t.frame.body))
            .count();
        let arriving = self
            .queue
            .iter()
            .filter(
                |e| matches!(&e.kind, EventKind::FrameDelivery { payload, .. } if is_data(payload)),
            )
            .count();
        for _ in 0..queued + on_air + arriving {
            self.metrics.record_drop(DropCause::InFlightAtEnd);
        }
        self.metrics.beacons_rejected = self.dbs.iter().map(|d| d.rejected).sum();
        self.metrics.final_positions = self.positions.clone();
        self.metrics
    }

    fn dispatch(&mut self, kind: EventKind) {
        match kind {
            EventKind::MobilityTick => self.tick(),
            EventKind::BeaconEmit(id) => self.emit_beacon(id),
            EventKind::RoutingTick(id, msg) => self.emit_routing(id, msg),
            EventKind::CbrEmit => self.emit_cbr(),
            EventKind::TransmissionEnd(slot) => self.end_transmission(slot),
            EventKind::FrameDelivery {
                receiver,
                src,
                payload,
            } => self.deliver(receiver, src, payload),
            EventKind::ChannelRecheck => self.recheck(),
        }
    }

    fn schedule(&mut self, at: SimTime, kind: EventKind) {
        if at < self.end {
            self.queue.push(at, kind);
        }
    }

    fn is_ideal(&self) -> bool {
        self.cfg.scheme == Scheme::Ideal
    }

    fn knowledge(&self, i: usize) -> &NeighborDatabase {
        if self.is_ideal() {
            &self.truth
        } else {
            &self.dbs[i]
        }
    }

    /// Believed (source, destination) positions of node `i`'s chain.
    fn endpoint_belief(&self, i: usize) -> (Option<Vec2>, Option<Vec2>) {
        let node = &self.nodes[i];
        let Some(c) = node.chain.or_else(|| {
            // a chainless source still knows who it serves
            (node.id == SOURCE).then_some(ChainLinks {
                predecessor: None,
                successor: None,
                source: SOURCE,
                destination: DESTINATION,
            })
        }) else {
            return (None, None);
        };
        let know = self.knowledge(i);
        let hint = self.hints[i];
        let locate = |id: NodeId, from_hint: Option<Vec2>| {
            if id == node.id {
                Some(node.pos)
            } else {
                know.get(id).map(|e| e.pos).or(from_hint)
            }
        };
        (
            locate(c.source, hint.map(|h| h.source_pos)),
            locate(c.destination, hint.map(|h| h.dest_pos)),
        )
    }

    fn chain_frame(&self, i: usize) -> ChainFrame {
        let c = self.nodes[i]
            .chain
            .expect("controlled node has chain links");
        let know = self.knowledge(i);
        let now = self.now.as_secs();
        let nb = |id: Option<NodeId>| {
            id.and_then(|id| know.get(id)).map(|e| Neighbor {
                id: e.node,
                pos: e.position_at(now),
            })
        };
        let (source, destination) = self.endpoint_belief(i);
        ChainFrame {
            predecessor: nb(c.predecessor),
            successor: nb(c.successor),
            source,
            destination,
        }
    }

    fn tick(&mut self) {
        self.ticks += 1;
        if !self.frozen {
            let dt = self.cfg.dt;
            for i in 0..self.nodes.len() {
                let next = {
                    let node = &self.nodes[i];
                    match node.role {
                        NodeRole::Traffic if self.cfg.static_endpoints => continue,
                        NodeRole::Traffic => {
                            rwp_step(node, dt, &mut self.mobility_rng[i], &self.traffic_rwp)
                        }
                        NodeRole::Surveillance => {
                            rwp_step(node, dt, &mut self.mobility_rng[i], &self.swarm_rwp)
                        }
                        NodeRole::Relay | NodeRole::Prospection => {
                            let frame = self.chain_frame(i);
                            let f = total_force(node, &frame, &self.cfg.force)
                                + prospection_drive(node, &frame, &self.cfg.force);
                            integrate_step(node, f, dt, self.cfg.relay_max_speed, &self.cfg.zone)
                        }
                    }
                };
                self.positions[i] = next.pos;
                self.nodes[i] = next;
            }
            if self.is_ideal() {
                refresh_snapshot(&mut self.truth, &self.nodes, self.now.as_secs());
            }
        }
        self.observe_contacts();
        if self.protocol.is_some() {
            self.metrics.auditor_violations += audit_chains(&self.nodes).len() as u64;
        }
        if self
            .trace_every
            .is_some_and(|k| self.ticks.is_multiple_of(k))
        {
            self.record_trace();
        }
        self.schedule(self.now + self.dt, EventKind::MobilityTick);
    }

    fn record_trace(&mut self) {
        let t = self.now.as_secs();
        for n in &self.nodes {
            self.trace.push(TraceRow {
                time: t,
                node: n.id.0,
                role: role_name(n.role),
                x: n.pos.x,
                y: n.pos.y,
            });
        }
    }

    fn observe_contacts(&mut self) {
        let range = self.cfg.radio_range;
        let explorers: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| self.nodes[i].role == NodeRole::Surveillance)
            .collect();
        let mut linked = Vec::new();
        for (k, &a) in explorers.iter().enumerate() {
            for &b in &explorers[k + 1..] {
                if in_range(self.positions[a], self.positions[b], range) {
                    linked.push((NodeId(a as u32), NodeId(b as u32)));
                }
            }
        }
        self.contacts
            .observe(self.now.as_secs(), &linked, &mut self.metrics.contact_log);
    }

    // ----- chain protocol -----

    fn decide(&self, i: usize, now: f64, p: &ProtocolParams) -> ChainDirective {
        let node = &self.nodes[i];
        let know = self.knowledge(i);
        let heard = &self.heard[i];
        match node.role {
            NodeRole::Traffic if node.id == SOURCE => match node.chain {
                None => chain_bootstrap(node, DESTINATION, know, p, now),
                Some(_) => chain_maintain(node, know, heard, p, now),
            },
            NodeRole::Relay => chain_maintain(node, know, heard, p, now),
            NodeRole::Prospection => match chain_maintain(node, know, heard, p, now) {
                ChainDirective::None => chain_extend(node, know, self.endpoint_belief(i).1, p, now),
                d => d,
            },
            _ => ChainDirective::None,
        }
    }

    fn emit_beacon(&mut self, id: NodeId) {
        let Some(p) = self.protocol else { return };
        self.schedule(
            self.now + SimTime::from_secs(self.cfg.beacon_interval),
            EventKind::BeaconEmit(id),
        );
        let i = id.index();
        let now = self.now.as_secs();
        if self.is_ideal() {
            refresh_snapshot(&mut self.truth, &self.nodes, now);
        }
        let mut carried = None;
        match self.decide(i, now, &p) {
            ChainDirective::None => {}
            d @ ChainDirective::Promote { .. } => carried = Some(d),
            ChainDirective::Complete { links } => self.apply_complete(id, links),
            ChainDirective::Demote { target } => self.apply_demote(target),
            ChainDirective::Teardown => {
                let src = self.nodes[i].chain.map_or(SOURCE, |c| c.source);
                self.apply_teardown(src);
            }
        }

        let node = &self.nodes[i];
        let mut own = BeaconEntry::describe(node, now);
        if let Some(c) = node.chain {
            own.chain = Some(ChainFields {
                successor: c.successor,
                predecessor: c.predecessor,
                destination: c.destination,
                insertion_requested: matches!(
                    carried,
                    Some(ChainDirective::Promote {
                        to: NodeRole::Relay,
                        ..
                    })
                ),
            });
            if let (Some(source_pos), Some(dest_pos)) = self.endpoint_belief(i) {
                own.endpoints = Some(EndpointFields {
                    source_pos,
                    dest_pos,
                });
            }
        }
        let own = wire::quantize(&own, &self.cfg.zone);
        let selection = match self.cfg.scheme {
            Scheme::Fresh => Selection::Fresh,
            _ => Selection::Random,
        };
        let know = if self.is_ideal() {
            &self.truth
        } else {
            &self.dbs[i]
        };
        let beacon = build_beacon(own, know, selection, self.cfg.cs, &mut self.beacon_rng[i]);
        let bytes = beacon.len() * wire::ENTRY_BYTES;
        let msg = Rc::new(BeaconMsg {
            beacon,
            directive: carried,
        });
        self.channel.enqueue(
            id,
            Frame::broadcast(
                FrameKind::BeaconBroadcast,
                id,
                bytes,
                self.now,
                Payload::Beacon(msg),
            ),
        );
        self.request_recheck();
    }

    fn receive_beacon(&mut self, r: NodeId, e: NodeId, msg: &BeaconMsg) {
        let now = self.now.as_secs();
        let ri = r.index();
        self.heard[ri].record(e, now);
        if !self.is_ideal() {
            // malformed beacons are counted in the database
            let _ = process_beacon(&mut self.dbs[ri], &msg.beacon, now);
        }
        if let Some(ChainDirective::Promote { target, to, links }) = msg.directive {
            if target == r {
                self.try_promote(e, r, to, links);
            }
        }
        if let (Some(c), Some(ep)) = (self.nodes[ri].chain, msg.beacon.emitter().endpoints) {
            if c.predecessor == Some(e) || c.successor == Some(e) {
                self.hints[ri] = Some(ep);
            }
        }
    }

    fn chain_mut(&mut self, id: NodeId) -> &mut ChainLinks {
        self.nodes[id.index()].chain.as_mut().expect("chain member")
    }

    fn link_heard(&mut self, a: NodeId, b: NodeId) {
        let now = self.now.as_secs();
        self.heard[a.index()].record(b, now);
        self.heard[b.index()].record(a, now);
    }

    fn try_promote(&mut self, e: NodeId, t: NodeId, to: NodeRole, links: ChainLinks) {
        let target = &self.nodes[t.index()];
        if target.role != NodeRole::Surveillance || target.chain.is_some() {
            return;
        }
        let emitter = &self.nodes[e.index()];
        let valid = match (to, emitter.role) {
            (NodeRole::Prospection, NodeRole::Traffic) => {
                e == links.source && emitter.chain.is_none()
            }
            (NodeRole::Prospection, NodeRole::Prospection) => emitter
                .chain
                .is_some_and(|c| c.successor.is_none() && c.source == links.source),
            (NodeRole::Relay, _) => {
                let s = links.successor;
                emitter.chain.is_some_and(|c| c.successor == s)
                    && s.and_then(|s| self.nodes[s.index()].chain)
                        .is_some_and(|sc| sc.predecessor == Some(e))
            }
            _ => false,
        };
        if !valid {
            return;
        }
        let node = &mut self.nodes[t.index()];
        node.set_role(to)
            .expect("surveillance node can be promoted");
        node.chain = Some(links);
        node.vel = Vec2::ZERO;
        node.waypoint = None;
        match (to, self.nodes[e.index()].role) {
            (NodeRole::Prospection, NodeRole::Traffic) => {
                self.nodes[e.index()].chain = Some(ChainLinks {
                    predecessor: None,
                    successor: Some(t),
                    ..links
                });
            }
            (NodeRole::Prospection, _) => {
                let apex = &mut self.nodes[e.index()];
                apex.set_role(NodeRole::Relay).expect("apex becomes relay");
                apex.chain.as_mut().expect("apex in chain").successor = Some(t);
            }
            _ => {
                let s = links.successor.expect("insertion has a successor");
                self.chain_mut(e).successor = Some(t);
                self.chain_mut(s).predecessor = Some(t);
                self.link_heard(t, s);
            }
        }
        self.link_heard(t, e);
        self.metrics.promotions += 1;
    }

    fn apply_complete(&mut self, e: NodeId, links: ChainLinks) {
        let d = links.destination;
        if self.nodes[d.index()].chain.is_some() {
            return;
        }
        let node = &mut self.nodes[e.index()];
        if node.role == NodeRole::Prospection {
            node.set_role(NodeRole::Relay).expect("apex becomes relay");
        }
        node.chain = Some(links);
        self.nodes[d.index()].chain = Some(ChainLinks {
            predecessor: Some(e),
            successor: None,
            ..links
        });
        self.link_heard(e, d);
        if self.metrics.chain_completion_time.is_none() {
            self.metrics.chain_completion_time = Some(self.now.as_secs());
        }
    }

    fn apply_demote(&mut self, x: NodeId) {
        let c = self.nodes[x.index()].chain.expect("demoted node in chain");
        let (Some(p), Some(s)) = (c.predecessor, c.successor) else {
            return;
        };
        self.chain_mut(p).successor = Some(s);
        self.chain_mut(s).predecessor = Some(p);
        let node = &mut self.nodes[x.index()];
        node.set_role(NodeRole::Surveillance)
            .expect("relay may step out");
        node.chain = None;
        node.waypoint = None;
        self.hints[x.index()] = None;
        self.link_heard(p, s);
        self.metrics.demotions += 1;
    }

    fn apply_teardown(&mut self, src: NodeId) {
        for (node, hint) in self.nodes.iter_mut().zip(self.hints.iter_mut()) {
            if node.chain.is_some_and(|c| c.source == src) {
                node.chain = None;
                *hint = None;
                if node.role.is_controlled() {
                    node.set_role(NodeRole::Surveillance)
                        .expect("chain member may leave");
                    node.waypoint = None;
                }
            }
        }
        self.metrics.teardowns += 1;
    }

    // ----- routing and data -----

    fn emit_routing(&mut self, id: NodeId, msg: RoutingMsg) {
        let i = id.index();
        let (payload, bytes, period) = match msg {
            RoutingMsg::Hello => {
                let h = self.routing[i].make_hello(self.now);
                let bytes = h.payload_bytes();
                (Payload::Hello(Rc::new(h)), bytes, self.cfg.hello_interval)
            }
            RoutingMsg::Tc => {
                let tc = self.routing[i].make_tc(self.now);
                let bytes = tc.payload_bytes();
                (Payload::Tc(Rc::new(tc)), bytes, self.cfg.tc_interval)
            }
        };
        self.schedule(
            self.now + SimTime::from_secs(period),
            EventKind::RoutingTick(id, msg),
        );
        self.channel.enqueue(
            id,
            Frame::broadcast(FrameKind::RoutingBroadcast, id, bytes, self.now, payload),
        );
        self.request_recheck();
    }

    fn emit_cbr(&mut self) {
        let cbr = self.cbr.as_mut().expect("cbr scheduled only with a source");
        let (packet, next) = cbr.emit();
        self.metrics.cbr_sent += 1;
        self.schedule(next, EventKind::CbrEmit);
        self.forward(packet.origin, packet);
    }

    fn forward(&mut self, at: NodeId, mut packet: DataPacket) {
        if at == packet.destination {
            self.metrics.cbr_received += 1;
            self.metrics
                .delays
                .push((self.now - packet.emitted).as_secs());
            return;
        }
        if packet.ttl == 0 {
            self.metrics.record_drop(DropCause::HopLimit);
            return;
        }
        let Some(next) = self.routing[at.index()].next_hop(packet.destination, self.now) else {
            self.metrics.record_drop(DropCause::NoRoute);
            return;
        };
        packet.ttl -= 1;
        let bytes = self.cfg.cbr_packet;
        self.channel.enqueue(
            at,
            Frame::unicast(at, next, bytes, self.now, Payload::Data(packet)),
        );
        self.request_recheck();
    }

    // ----- medium -----

    fn request_recheck(&mut self) {
        if !self.recheck_pending {
            self.recheck_pending = true;
            self.queue.push(self.now, EventKind::ChannelRecheck);
        }
    }

    fn recheck(&mut self) {
        self.recheck_pending = false;
        let started = self.channel.start_ready(self.now, &self.positions);
        for tx in started {
            let src = tx.frame.src;
            let clash = self
                .channel
                .transmitting(self.now)
                .filter(|&o| o != src)
                .filter(|o| {
                    in_range(
                        self.positions[src.index()],
                        self.positions[o.index()],
                        self.cfg.radio_range,
                    )
                })
                .count();
            self.metrics.channel_violations += clash as u64;
            self.metrics.frames_sent += 1;
            let end = tx.end;
            let slot = match self.free_slots.pop() {
                Some(s) => {
                    self.in_flight[s] = Some(tx);
                    s
                }
                None => {
                    self.in_flight.push(Some(tx));
                    self.in_flight.len() - 1
                }
            };
            // frames ending after the run are counted as in flight by `close`
            self.queue.push(end, EventKind::TransmissionEnd(slot));
        }
    }

    fn end_transmission(&mut self, slot: usize) {
        let tx = self.in_flight[slot].take().expect("live slot");
        self.free_slots.push(slot);
        let src = tx.frame.src;
        let from = self.positions[src.index()];
        let range = self.cfg.radio_range;
        let phy = *self.channel.phy();
        match tx.frame.dst {
            None => {
                for j in 0..self.nodes.len() {
                    let to = self.positions[j];
                    if j != src.index() && in_range(from, to, range) {
                        self.queue.push(
                            self.now + phy.propagation(from, to),
                            EventKind::FrameDelivery {
                                receiver: NodeId(j as u32),
                                src,
                                payload: tx.frame.body.clone(),
                            },
                        );
                    }
                }
            }
            Some(d) => {
                let to = self.positions[d.index()];
                if in_range(from, to, range) {
                    self.queue.push(
                        self.now + phy.propagation(from, to),
                        EventKind::FrameDelivery {
                            receiver: d,
                            src,
                            payload: tx.frame.body,
                        },
                    );
                } else if matches!(tx.frame.body, Payload::Data(_)) {
                    self.metrics.record_drop(DropCause::LinkBroken);
                }
            }
        }
        self.request_recheck();
    }

    fn deliver(&mut self, r: NodeId, src: NodeId, payload: Payload) {
        match payload {
            Payload::Beacon(msg) => {
                if self.protocol.is_some() {
                    self.receive_beacon(r, src, &msg);
                }
            }
            Payload::Hello(h) => self.routing[r.index()].on_hello(&h, self.now),
            Payload::Tc(tc) => {
                if self.routing[r.index()].on_tc(&tc, self.now) {
                    let bytes = tc.payload_bytes();
                    self.channel.enqueue(
                        r,
                        Frame::broadcast(
                            FrameKind::RoutingBroadcast,
                            r,
                            bytes,
                            self.now,
                            Payload::Tc(tc),
                        ),
                    );
                    self.request_recheck();
                }
            }
            Payload::Data(packet) => self.forward(r, packet),
        }
    }
}

/// Executes one seeded run.
pub fn run(cfg: &SimConfig) -> Result<RunMetrics, ConfigError> {
    Ok(Simulation::new(cfg)?.finish())
}

/// Executes one run and samples positions every `every` ticks.
pub fn run_traced(cfg: &SimConfig, every: u64) -> Result<(RunMetrics, Vec<TraceRow>), ConfigError> {
    let mut sim = Simulation::new(cfg)?;
    sim.enable_trace(every);
    Ok(sim.finish_traced())
}

/// Route tables of a motionless network after `settle` seconds of routing traffic.
pub fn static_routes(
    cfg: &SimConfig,
    positions: &[Vec2],
    settle: f64,
) -> Result<Vec<RouteTable>, ConfigError> {
    let cfg = SimConfig {
        duration: settle,
        ..cfg.clone()
    };
    let mut sim = Simulation::static_network(&cfg, positions)?;
    sim.run_until(SimTime::from_secs(settle));
    Ok((0..positions.len())
        .map(|i| sim.route_table(NodeId(i as u32)))
        .collect())
}
