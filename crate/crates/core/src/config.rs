//! Run configuration. Defaults reproduce the reference scenario: a 1 km²
//! zone, 15 explorers, two pedestrian traffic endpoints, 100 m radios.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::force::ForceParams;
use crate::geometry::{Vec2, Zone};
use crate::mobility::RwpParams;

/// How node knowledge is disseminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// No beacons, no chains: every node moves under random waypoint.
    RwpOnly,
    /// Beacons fill their extra slots with records picked at random.
    Random,
    /// Beacons fill their extra slots with the most recent records.
    Fresh,
    /// Positions are known exactly; beacons are still sent for their airtime.
    Ideal,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::RwpOnly,
        Scheme::Random,
        Scheme::Fresh,
        Scheme::Ideal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::RwpOnly => "rwp-only",
            Scheme::Random => "random",
            Scheme::Fresh => "fresh",
            Scheme::Ideal => "ideal",
        }
    }

    /// Whether the VFPe protocol (beacons and chains) is active.
    pub fn uses_beacons(self) -> bool {
        self != Scheme::RwpOnly
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                ConfigError::Invalid(format!(
                    "unknown scheme '{s}' (expected rwp-only, random, fresh or ideal)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub zone: Zone,
    /// Number of swarm (explorer) nodes.
    pub n_swarm: usize,
    /// Maximum number of entries per beacon.
    pub cs: usize,
    pub scheme: Scheme,
    /// s
    pub beacon_interval: f64,
    /// Integration step, s.
    pub dt: f64,
    /// Simulated time per run, s.
    pub duration: f64,
    /// m
    pub radio_range: f64,
    pub force: ForceParams,
    /// bit/s
    pub cbr_rate: f64,
    /// bytes
    pub cbr_packet: usize,
    pub seed: u64,
    /// Speed range of the traffic endpoints, m/s.
    pub traffic_speed: (f64, f64),
    /// Speed range of exploring swarm nodes, m/s.
    pub swarm_speed: (f64, f64),
    /// Speed cap of relay and prospection nodes, m/s.
    pub relay_max_speed: f64,
    /// Link-state HELLO period, s.
    pub hello_interval: f64,
    /// Link-state topology flooding period, s.
    pub tc_interval: f64,
    /// Expiry of link-state information, s.
    pub hold_time: f64,
    /// Beacon intervals without hearing a chain neighbour before the link is lost.
    pub chain_link_timeout: u32,
    /// Fixed (source, destination) placement instead of uniform draws.
    pub endpoints: Option<[Vec2; 2]>,
    /// Keeps the traffic endpoints in place.
    pub static_endpoints: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            zone: Zone::default(),
            n_swarm: 15,
            cs: 10,
            scheme: Scheme::Random,
            beacon_interval: 1.0,
            dt: 0.1,
            duration: 600.0,
            radio_range: 100.0,
            force: ForceParams::default(),
            cbr_rate: 10_000.0,
            cbr_packet: 100,
            seed: 1,
            traffic_speed: (0.25, 1.0),
            swarm_speed: (5.0, 10.0),
            relay_max_speed: 10.0,
            hello_interval: 2.0,
            tc_interval: 5.0,
            hold_time: 6.0,
            chain_link_timeout: 3,
            endpoints: None,
            static_endpoints: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError::Invalid(m));
        if self.cs < 1 {
            return fail("cs must be at least 1".into());
        }
        if !(self.zone.width > 0.0 && self.zone.height > 0.0) {
            return fail("zone must have positive extent".into());
        }
        for (name, v) in [
            ("dt", self.dt),
            ("duration", self.duration),
            ("beacon_interval", self.beacon_interval),
            ("radio_range", self.radio_range),
            ("cbr_rate", self.cbr_rate),
            ("relay_max_speed", self.relay_max_speed),
            ("hello_interval", self.hello_interval),
            ("tc_interval", self.tc_interval),
            ("hold_time", self.hold_time),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.cbr_packet == 0 {
            return fail("cbr_packet must be positive".into());
        }
        if self.chain_link_timeout == 0 {
            return fail("chain_link_timeout must be at least one interval".into());
        }
        if self.n_swarm > 60_000 {
            return fail("n_swarm exceeds the beacon id space".into());
        }
        self.force.validate()?;
        self.traffic_rwp().validate()?;
        self.swarm_rwp().validate()?;
        if let Some(eps) = self.endpoints {
            if !eps.iter().all(|p| p.is_finite() && self.zone.contains(*p)) {
                return fail("endpoints must lie inside the zone".into());
            }
        }
        Ok(())
    }

    pub fn traffic_rwp(&self) -> RwpParams {
        RwpParams::new(self.traffic_speed.0, self.traffic_speed.1, self.zone)
    }

    pub fn swarm_rwp(&self) -> RwpParams {
        RwpParams::new(self.swarm_speed.0, self.swarm_speed.1, self.zone)
    }

    /// Time between CBR packets, s.
    pub fn cbr_interval(&self) -> f64 {
        self.cbr_packet as f64 * 8.0 / self.cbr_rate
    }

    /// Age after which a chain neighbour that has not been heard is considered lost, s.
    pub fn chain_link_lifetime(&self) -> f64 {
        self.beacon_interval * self.chain_link_timeout as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_broken_values() {
        let bad = [
            SimConfig {
                cs: 0,
                ..Default::default()
            },
            SimConfig {
                dt: 0.0,
                ..Default::default()
            },
            SimConfig {
                duration: -1.0,
                ..Default::default()
            },
            SimConfig {
                swarm_speed: (0.0, 10.0),
                ..Default::default()
            },
            SimConfig {
                endpoints: Some([Vec2::new(-1.0, 0.0), Vec2::ZERO]),
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn cbr_interval_matches_rate() {
        let c = SimConfig::default();
        assert!((c.cbr_interval() - 0.08).abs() < 1e-15);
        assert!((1.0 / c.cbr_interval() - 12.5).abs() < 1e-9);
    }

    #[test]
    fn scheme_names_parse() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("smart".parse::<Scheme>().is_err());
    }

    #[test]
    fn partial_toml_uses_defaults() {
        let c: SimConfig = toml::from_str("n_swarm = 4\nscheme = \"fresh\"\n").unwrap();
        assert_eq!(c.n_swarm, 4);
        assert_eq!(c.scheme, Scheme::Fresh);
        assert_eq!(c.radio_range, 100.0);
    }
}
