//! Simulation of virtual-force relay chains formed by a UAV swarm.

pub mod config;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod force;
pub mod geometry;
pub mod mobility;
pub mod model;
pub mod protocol;
pub mod radio;
pub mod rng;
pub mod stats;
pub mod time;
