//! Fixed 36-byte little-endian beacon entry encoding.
//!
//! ```text
//! offset size field
//!  0      4   node id (u32)
//!  4      1   role (0 traffic, 1 surveillance, 2 relay, 3 prospection)
//!  5      8   position x, y (f32, m)
//! 13      8   velocity x, y (f32, m/s)
//! 21      4   timestamp (u32, centiseconds, truncated)
//! 25      2   successor id (u16, 0xFFFF = none)
//! 27      2   predecessor id (u16, 0xFFFF = none)
//! 29      2   destination id (u16, 0xFFFF = none)
//! 31      1   flags: bit0 chain fields present, bit1 insertion requested,
//!             bit2 endpoint fields present
//! 32      2   source position (u8 x, u8 y on a 255-step grid over the zone)
//! 34      2   destination position (same grid)
//! ```
//!
//! A beacon is the concatenation of its entries. Absent optional fields are
//! zero-filled (ids use the 0xFFFF sentinel).

use crate::error::BeaconError;
use crate::geometry::{Vec2, Zone};
use crate::model::{NodeId, NodeRole};

use super::beacon::{Beacon, BeaconEntry, ChainFields, EndpointFields};

pub const ENTRY_BYTES: usize = 36;

const NO_ID: u16 = 0xFFFF;
const FLAG_CHAIN: u8 = 1;
const FLAG_INSERT: u8 = 2;
const FLAG_ENDPOINTS: u8 = 4;
const GRID_STEPS: f64 = 255.0;

fn short_id(id: Option<NodeId>) -> u16 {
    match id {
        Some(id) => {
            debug_assert!(
                id.0 < u32::from(NO_ID),
                "id {id} does not fit the compressed field"
            );
            id.0 as u16
        }
        None => NO_ID,
    }
}

fn long_id(raw: u16) -> Option<NodeId> {
    (raw != NO_ID).then_some(NodeId(u32::from(raw)))
}

fn grid(p: Vec2, zone: &Zone) -> [u8; 2] {
    let q = |v: f64, extent: f64| ((v / extent).clamp(0.0, 1.0) * GRID_STEPS).round() as u8;
    [q(p.x, zone.width), q(p.y, zone.height)]
}

fn ungrid(b: [u8; 2], zone: &Zone) -> Vec2 {
    Vec2::new(
        f64::from(b[0]) / GRID_STEPS * zone.width,
        f64::from(b[1]) / GRID_STEPS * zone.height,
    )
}

pub fn encode_entry(e: &BeaconEntry, zone: &Zone) -> [u8; ENTRY_BYTES] {
    let mut out = [0u8; ENTRY_BYTES];
    out[0..4].copy_from_slice(&e.node.0.to_le_bytes());
    out[4] = e.role.code();
    for (i, v) in [e.pos.x, e.pos.y, e.vel.x, e.vel.y].into_iter().enumerate() {
        let at = 5 + 4 * i;
        out[at..at + 4].copy_from_slice(&(v as f32).to_le_bytes());
    }
    let centis = (e.timestamp.max(0.0) * 100.0 + 1e-6)
        .floor()
        .min(u32::MAX as f64) as u32;
    out[21..25].copy_from_slice(&centis.to_le_bytes());
    let mut flags = 0u8;
    let (succ, pred, dest) = match e.chain {
        Some(c) => {
            flags |= FLAG_CHAIN;
            if c.insertion_requested {
                flags |= FLAG_INSERT;
            }
            (c.successor, c.predecessor, Some(c.destination))
        }
        None => (None, None, None),
    };
    out[25..27].copy_from_slice(&short_id(succ).to_le_bytes());
    out[27..29].copy_from_slice(&short_id(pred).to_le_bytes());
    out[29..31].copy_from_slice(&short_id(dest).to_le_bytes());
    if let Some(ep) = e.endpoints {
        flags |= FLAG_ENDPOINTS;
        out[32..34].copy_from_slice(&grid(ep.source_pos, zone));
        out[34..36].copy_from_slice(&grid(ep.dest_pos, zone));
    }
    out[31] = flags;
    out
}

pub fn decode_entry(b: &[u8; ENTRY_BYTES], zone: &Zone) -> Result<BeaconEntry, BeaconError> {
    let u16_at = |at: usize| u16::from_le_bytes([b[at], b[at + 1]]);
    let f32_at =
        |at: usize| f64::from(f32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]]));
    let role = NodeRole::from_code(b[4]).ok_or(BeaconError::BadRole(b[4]))?;
    let flags = b[31];
    let chain = if flags & FLAG_CHAIN != 0 {
        Some(ChainFields {
            successor: long_id(u16_at(25)),
            predecessor: long_id(u16_at(27)),
            destination: long_id(u16_at(29)).unwrap_or(NodeId(u32::from(NO_ID))),
            insertion_requested: flags & FLAG_INSERT != 0,
        })
    } else {
        None
    };
    let endpoints = (flags & FLAG_ENDPOINTS != 0).then(|| EndpointFields {
        source_pos: ungrid([b[32], b[33]], zone),
        dest_pos: ungrid([b[34], b[35]], zone),
    });
    Ok(BeaconEntry {
        node: NodeId(u32::from_le_bytes([b[0], b[1], b[2], b[3]])),
        role,
        pos: Vec2::new(f32_at(5), f32_at(9)),
        vel: Vec2::new(f32_at(13), f32_at(17)),
        timestamp: f64::from(u32::from_le_bytes([b[21], b[22], b[23], b[24]])) / 100.0,
        chain,
        endpoints,
    })
}

pub fn encode(beacon: &Beacon, zone: &Zone) -> Vec<u8> {
    beacon
        .entries()
        .iter()
        .flat_map(|e| encode_entry(e, zone))
        .collect()
}

pub fn decode(bytes: &[u8], zone: &Zone) -> Result<Beacon, BeaconError> {
    if !bytes.len().is_multiple_of(ENTRY_BYTES) {
        return Err(BeaconError::BadLength(bytes.len()));
    }
    let entries = bytes
        .chunks_exact(ENTRY_BYTES)
        .map(|c| decode_entry(c.try_into().expect("exact chunk"), zone))
        .collect::<Result<Vec<_>, _>>()?;
    Beacon::new(entries)
}

/// The entry as a receiver sees it after one encode/decode pass.
pub fn quantize(e: &BeaconEntry, zone: &Zone) -> BeaconEntry {
    decode_entry(&encode_entry(e, zone), zone).expect("encoder emits valid entries")
}
