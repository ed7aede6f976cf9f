//! The beacon protocol: multi-entry beacons, the per-node neighbour
//! database, and the chain lifecycle (bootstrap, extension, insertion,
//! redundancy removal, completion and teardown).

mod beacon;
mod chain;
mod db;
pub mod wire;

pub use beacon::{build_beacon, Beacon, BeaconEntry, ChainFields, EndpointFields, Selection};
pub use chain::{chain_bootstrap, chain_extend, chain_maintain, ChainDirective, ProtocolParams};
pub(crate) use db::refresh_snapshot;
pub use db::{ideal_snapshot, process_beacon, LinkTable, NeighborDatabase};
