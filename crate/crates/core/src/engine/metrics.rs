use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::model::NodeId;

/// Why a CBR packet never reached its destination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DropCause {
    /// No route at the node holding the packet.
    NoRoute,
    /// Next hop out of range when the frame finished.
    LinkBroken,
    /// Forwarding budget exhausted, typically in a transient loop.
    HopLimit,
    /// Still queued or on the air when the run ended.
    InFlightAtEnd,
}

/// A maximal period during which two surveillance nodes stayed in range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub a: NodeId,
    pub b: NodeId,
    pub start: f64,
    pub end: f64,
}

impl Contact {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub cbr_sent: u64,
    pub cbr_received: u64,
    /// End-to-end delay of every received packet, s.
    pub delays: Vec<f64>,
    pub drop_causes: BTreeMap<DropCause, u64>,
    /// Completed contacts; those open at the start or end of the run are left out.
    pub contact_log: Vec<Contact>,
    /// First time a chain connected source and destination, s.
    pub chain_completion_time: Option<f64>,
    pub promotions: u64,
    pub demotions: u64,
    pub teardowns: u64,
    pub auditor_violations: u64,
    /// Transmissions started while an in-range node was on the air.
    pub channel_violations: u64,
    pub beacons_rejected: u64,
    pub frames_sent: u64,
    pub events: u64,
    pub final_positions: Vec<Vec2>,
}

impl RunMetrics {
    pub fn dropped(&self) -> u64 {
        self.drop_causes.values().sum()
    }

    pub fn record_drop(&mut self, cause: DropCause) {
        *self.drop_causes.entry(cause).or_insert(0) += 1;
    }

    /// emitted = received + dropped, for every cause.
    pub fn is_conserved(&self) -> bool {
        self.cbr_sent == self.cbr_received + self.dropped()
            && self.delays.len() as u64 == self.cbr_received
    }
}

/// Delivered fraction, absent when nothing was sent.
pub fn pdr(m: &RunMetrics) -> Option<f64> {
    (m.cbr_sent > 0).then(|| m.cbr_received as f64 / m.cbr_sent as f64)
}

/// Mean end-to-end delay in seconds, absent without receptions.
pub fn mean_delay(m: &RunMetrics) -> Option<f64> {
    (!m.delays.is_empty()).then(|| m.delays.iter().sum::<f64>() / m.delays.len() as f64)
}

/// Mean contact duration in seconds, absent when no contact completed.
pub fn contact_statistics(m: &RunMetrics) -> Option<f64> {
    (!m.contact_log.is_empty()).then(|| {
        m.contact_log.iter().map(Contact::duration).sum::<f64>() / m.contact_log.len() as f64
    })
}

/// Opens and closes pairwise contacts from periodic in-range observations.
#[derive(Debug, Clone, Default)]
pub(crate) struct ContactTracker {
    /// Pair → start time; `None` marks a contact already open at the first observation.
    open: BTreeMap<(NodeId, NodeId), Option<f64>>,
    first: bool,
}

impl ContactTracker {
    pub fn new() -> Self {
        Self {
            open: BTreeMap::new(),
            first: true,
        }
    }

    /// `linked` must list the pairs currently in contact, each as (lower, higher) id.
    pub fn observe(&mut self, now: f64, linked: &[(NodeId, NodeId)], log: &mut Vec<Contact>) {
        let first = std::mem::replace(&mut self.first, false);
        let mut next = BTreeMap::new();
        for &pair in linked {
            let start = match self.open.remove(&pair) {
                Some(s) => s,
                None if first => None,
                None => Some(now),
            };
            next.insert(pair, start);
        }
        for ((a, b), start) in std::mem::replace(&mut self.open, next) {
            if let Some(start) = start {
                log.push(Contact {
                    a,
                    b,
                    start,
                    end: now,
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_delays(sent: u64, delays: &[f64]) -> RunMetrics {
        RunMetrics {
            cbr_sent: sent,
            cbr_received: delays.len() as u64,
            delays: delays.to_vec(),
            ..Default::default()
        }
    }

    #[test]
    fn pdr_examples() {
        let mut m = with_delays(750, &[]);
        m.cbr_received = 255;
        assert!((pdr(&m).unwrap() - 0.34).abs() < 1e-12);
        assert_eq!(pdr(&with_delays(10, &[])), Some(0.0));
        assert_eq!(pdr(&with_delays(2, &[0.1, 0.2])), Some(1.0));
        assert_eq!(pdr(&with_delays(0, &[])), None);
    }

    #[test]
    fn delay_examples() {
        assert!((mean_delay(&with_delays(2, &[0.001, 0.003])).unwrap() - 0.002).abs() < 1e-15);
        assert_eq!(mean_delay(&with_delays(1, &[0.007])), Some(0.007));
        assert_eq!(mean_delay(&with_delays(1, &[])), None);
    }

    #[test]
    fn contact_examples() {
        let m = RunMetrics {
            contact_log: vec![Contact {
                a: NodeId(2),
                b: NodeId(3),
                start: 10.0,
                end: 25.0,
            }],
            ..Default::default()
        };
        assert_eq!(contact_statistics(&m), Some(15.0));
        assert_eq!(contact_statistics(&RunMetrics::default()), None);
    }

    #[test]
    fn conservation_counts_every_cause() {
        let mut m = with_delays(5, &[0.1, 0.1]);
        m.record_drop(DropCause::NoRoute);
        m.record_drop(DropCause::LinkBroken);
        assert!(!m.is_conserved());
        m.record_drop(DropCause::InFlightAtEnd);
        assert!(m.is_conserved());
    }

    #[test]
    fn tracker_censors_initial_contacts() {
        let p = (NodeId(2), NodeId(3));
        let q = (NodeId(2), NodeId(4));
        let mut t = ContactTracker::new();
        let mut log = Vec::new();
        t.observe(0.0, &[p], &mut log);
        t.observe(1.0, &[p, q], &mut log);
        t.observe(2.0, &[q], &mut log);
        assert!(log.is_empty());
        t.observe(3.5, &[], &mut log);
        assert_eq!(
            log,
            vec![Contact {
                a: NodeId(2),
                b: NodeId(4),
                start: 1.0,
                end: 3.5
            }]
        );
    }
}
