//! Integer simulation clock.

use std::fmt;
use std::ops::{Add, Sub};

/// Simulation time in nanoseconds since the start of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    /// Nearest nanosecond to `s` seconds; negative inputs clamp to zero.
    pub fn from_secs(s: f64) -> SimTime {
        debug_assert!(s.is_finite());
        SimTime((s.max(0.0) * 1e9).round() as u64)
    }

    pub fn as_secs(self) -> f64 {
        self.0 as f64 * 1e-9
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_add(rhs.0))
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.9}s", self.as_secs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_seconds() {
        assert_eq!(SimTime::from_secs(0.08).0, 80_000_000);
        assert_eq!(SimTime::from_secs(192e-6).0, 192_000);
        assert_eq!(SimTime::from_secs(-1.0), SimTime::ZERO);
        assert!((SimTime(1_500_000_000).as_secs() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn arithmetic_saturates() {
        assert_eq!(SimTime(5) - SimTime(9), SimTime::ZERO);
        assert_eq!(SimTime::MAX + SimTime(1), SimTime::MAX);
    }
}
