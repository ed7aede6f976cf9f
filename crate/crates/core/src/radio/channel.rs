use std::collections::VecDeque;

use crate::geometry::Vec2;
use crate::model::NodeId;
use crate::time::SimTime;

use super::{airtime, in_range, Frame, PhyParams};

/// A frame on the air.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmission<B> {
    pub frame: Frame<B>,
    pub start: SimTime,
    pub end: SimTime,
}

/// Shared medium with per-node FIFO queues.
///
/// A node may start sending only while no node within radio range is
/// transmitting. Contenders are served in increasing id order, so of two
/// neighbours ready at the same instant the lower id goes first and the other
/// waits for the end of its frame. Nodes out of each other's range transmit in
/// parallel.
#[derive(Debug, Clone)]
pub struct Channel<B> {
    phy: PhyParams,
    range: f64,
    queues: Vec<VecDeque<Frame<B>>>,
    busy_until: Vec<SimTime>,
    active: Vec<NodeId>,
}

impl<B> Channel<B> {
    pub fn new(n_nodes: usize, range: f64, phy: PhyParams) -> Self {
        Self {
            phy,
            range,
            queues: (0..n_nodes).map(|_| VecDeque::new()).collect(),
            busy_until: vec![SimTime::ZERO; n_nodes],
            active: Vec::new(),
        }
    }

    pub fn phy(&self) -> &PhyParams {
        &self.phy
    }

    pub fn enqueue(&mut self, node: NodeId, frame: Frame<B>) {
        self.queues[node.index()].push_back(frame);
    }

    pub fn queue_len(&self, node: NodeId) -> usize {
        self.queues[node.index()].len()
    }

    pub fn is_transmitting(&self, node: NodeId, now: SimTime) -> bool {
        self.busy_until[node.index()] > now
    }

    /// Nodes transmitting at `now`, in start order.
    pub fn transmitting(&self, now: SimTime) -> impl Iterator<Item = NodeId> + '_ {
        self.active
            .iter()
            .copied()
            .filter(move |&id| self.is_transmitting(id, now))
    }

    /// Every frame still waiting in a queue.
    pub fn queued(&self) -> impl Iterator<Item = &Frame<B>> {
        self.queues.iter().flatten()
    }

    /// Starts every head-of-line frame that may go out at `now`.
    pub fn start_ready(&mut self, now: SimTime, positions: &[Vec2]) -> Vec<Transmission<B>> {
        let busy = &self.busy_until;
        self.active.retain(|id| busy[id.index()] > now);
        let mut started = Vec::new();
        for i in 0..self.queues.len() {
            if self.queues[i].is_empty() || self.busy_until[i] > now {
                continue;
            }
            let blocked = self
                .active
                .iter()
                .any(|j| in_range(positions[i], positions[j.index()], self.range));
            if blocked {
                continue;
            }
            let frame = self.queues[i].pop_front().expect("non-empty queue");
            let end = now + airtime(&frame, &self.phy);
            self.busy_until[i] = end;
            self.active.push(NodeId(i as u32));
            started.push(Transmission {
                frame,
                start: now,
                end,
            });
        }
        started
    }

    /// Earliest end among transmissions still on the air after `now`.
    pub fn next_release(&self, now: SimTime) -> Option<SimTime> {
        self.transmitting(now)
            .map(|id| self.busy_until[id.index()])
            .min()
    }
}
