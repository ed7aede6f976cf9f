use crate::model::NodeId;
use crate::time::SimTime;

/// Application payload of a CBR data frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DataPacket {
    pub seq: u64,
    pub origin: NodeId,
    pub destination: NodeId,
    pub emitted: SimTime,
    /// Remaining forwarding budget.
    pub ttl: u8,
}

/// Constant bit-rate flow starting at t = 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CbrSource {
    pub origin: NodeId,
    pub destination: NodeId,
    pub interval: SimTime,
    pub packet_bytes: usize,
    next_seq: u64,
}

pub const DEFAULT_TTL: u8 = 32;

impl CbrSource {
    pub fn new(origin: NodeId, destination: NodeId, rate_bps: f64, packet_bytes: usize) -> Self {
        Self {
            origin,
            destination,
            interval: SimTime::from_secs(packet_bytes as f64 * 8.0 / rate_bps),
            packet_bytes,
            next_seq: 0,
        }
    }

    /// Emission time of packet `seq`.
    pub fn emission_time(&self, seq: u64) -> SimTime {
        SimTime(self.interval.0 * seq)
    }

    /// Number of packets emitted strictly before `end`.
    pub fn packets_before(&self, end: SimTime) -> u64 {
        end.0.div_ceil(self.interval.0)
    }

    /// Emits the next packet and returns it with the time of the following one.
    pub fn emit(&mut self) -> (DataPacket, SimTime) {
        let seq = self.next_seq;
        self.next_seq += 1;
        let packet = DataPacket {
            seq,
            origin: self.origin,
            destination: self.destination,
            emitted: self.emission_time(seq),
            ttl: DEFAULT_TTL,
        };
        (packet, self.emission_time(self.next_seq))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_rate_gives_80ms() {
        let c = CbrSource::new(NodeId(0), NodeId(1), 10_000.0, 100);
        assert_eq!(c.interval, SimTime(80_000_000));
        assert_eq!(c.packets_before(SimTime::from_secs(1.0)), 13);
        assert_eq!(c.packets_before(SimTime::from_secs(60.0)), 750);
        assert_eq!(c.packets_before(SimTime::from_secs(600.0)), 7500);
    }

    #[test]
    fn emission_is_periodic() {
        let mut c = CbrSource::new(NodeId(0), NodeId(1), 10_000.0, 100);
        let (p0, t1) = c.emit();
        let (p1, t2) = c.emit();
        assert_eq!((p0.seq, p0.emitted), (0, SimTime::ZERO));
        assert_eq!((p1.seq, p1.emitted), (1, t1));
        assert_eq!(t2, SimTime(160_000_000));
    }
}
