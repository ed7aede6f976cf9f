//! Idealised radio: unit-disk links, airtime accounting, shared-medium
//! arbitration, link-state routing and the CBR application.

mod cbr;
mod channel;
pub mod routing;

pub use cbr::{CbrSource, DataPacket};
pub use channel::{Channel, Transmission};
pub use routing::{Hello, LinkStateView, RouteTable, RoutingParams, TopologyControl};

use serde::{Deserialize, Serialize};

use crate::geometry::{distance, Vec2};
use crate::model::NodeId;
use crate::time::SimTime;

/// Closed unit-disk link test.
pub fn in_range(a: Vec2, b: Vec2, range: f64) -> bool {
    distance(a, b) <= range
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FrameKind {
    BeaconBroadcast,
    RoutingBroadcast,
    DataUnicast,
}

impl FrameKind {
    pub fn is_broadcast(self) -> bool {
        self != FrameKind::DataUnicast
    }
}

/// Physical-layer constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhyParams {
    /// Rate of broadcast frames, bit/s.
    pub broadcast_rate: u64,
    /// Rate of unicast data frames, bit/s.
    pub data_rate: u64,
    /// Fixed per-frame preamble and header time, ns.
    pub overhead_ns: u64,
    /// m/s
    pub propagation_speed: f64,
}

impl Default for PhyParams {
    fn default() -> Self {
        Self {
            broadcast_rate: 1_000_000,
            data_rate: 11_000_000,
            overhead_ns: 192_000,
            propagation_speed: 3.0e8,
        }
    }
}

impl PhyParams {
    pub fn rate(&self, kind: FrameKind) -> u64 {
        if kind.is_broadcast() {
            self.broadcast_rate
        } else {
            self.data_rate
        }
    }

    /// Payload transmission time, rounded to the nearest nanosecond.
    pub fn payload_airtime(&self, kind: FrameKind, payload_bytes: usize) -> SimTime {
        let rate = self.rate(kind) as u128;
        let bits_ns = payload_bytes as u128 * 8 * 1_000_000_000;
        SimTime(((bits_ns + rate / 2) / rate) as u64)
    }

    pub fn propagation(&self, a: Vec2, b: Vec2) -> SimTime {
        SimTime::from_secs(distance(a, b) / self.propagation_speed)
    }
}

/// A frame queued for or occupying the medium. `B` is the payload content.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<B> {
    pub kind: FrameKind,
    pub src: NodeId,
    /// Next-hop receiver of a unicast frame.
    pub dst: Option<NodeId>,
    pub payload_bytes: usize,
    pub enqueue_time: SimTime,
    pub body: B,
}

impl<B> Frame<B> {
    pub fn broadcast(
        kind: FrameKind,
        src: NodeId,
        payload_bytes: usize,
        now: SimTime,
        body: B,
    ) -> Self {
        debug_assert!(kind.is_broadcast() && payload_bytes > 0);
        Self {
            kind,
            src,
            dst: None,
            payload_bytes,
            enqueue_time: now,
            body,
        }
    }

    pub fn unicast(src: NodeId, dst: NodeId, payload_bytes: usize, now: SimTime, body: B) -> Self {
        debug_assert!(payload_bytes > 0);
        Self {
            kind: FrameKind::DataUnicast,
            src,
            dst: Some(dst),
            payload_bytes,
            enqueue_time: now,
            body,
        }
    }
}

/// Total medium occupancy of `frame`: payload time plus the fixed overhead.
pub fn airtime<B>(frame: &Frame<B>, phy: &PhyParams) -> SimTime {
    phy.payload_airtime(frame.kind, frame.payload_bytes) + SimTime(phy.overhead_ns)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_boundary_is_closed() {
        let o = Vec2::ZERO;
        assert!(in_range(o, Vec2::new(99.9, 0.0), 100.0));
        assert!(in_range(o, Vec2::new(100.0, 0.0), 100.0));
        assert!(!in_range(o, Vec2::new(100.1, 0.0), 100.0));
        assert!(in_range(o, Vec2::new(60.0, 80.0), 100.0));
    }

    #[test]
    fn beacon_entry_airtime() {
        let phy = PhyParams::default();
        assert_eq!(
            phy.payload_airtime(FrameKind::BeaconBroadcast, 36),
            SimTime(288_000)
        );
        assert_eq!(
            phy.payload_airtime(FrameKind::BeaconBroadcast, 360),
            SimTime(2_880_000)
        );
        let f = Frame::broadcast(FrameKind::BeaconBroadcast, NodeId(0), 36, SimTime::ZERO, ());
        assert_eq!(airtime(&f, &phy), SimTime(480_000));
    }

    #[test]
    fn data_airtime() {
        let phy = PhyParams::default();
        // 800 bits at 11 Mb/s = 72 727.27 ns
        assert_eq!(
            phy.payload_airtime(FrameKind::DataUnicast, 100),
            SimTime(72_727)
        );
        let f = Frame::unicast(NodeId(0), NodeId(1), 100, SimTime::ZERO, ());
        assert_eq!(airtime(&f, &phy), SimTime(72_727 + 192_000));
    }

    #[test]
    fn propagation_delay() {
        let phy = PhyParams::default();
        assert_eq!(
            phy.propagation(Vec2::ZERO, Vec2::new(90.0, 0.0)),
            SimTime(300)
        );
    }
}
