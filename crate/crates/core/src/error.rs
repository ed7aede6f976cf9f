use std::path::PathBuf;

use thiserror::Error;

use crate::model::{NodeId, NodeRole};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("line through two coincident points is undefined")]
    DegenerateLine,
    #[error("non-finite vector ({x}, {y})")]
    NonFinite { x: f64, y: f64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("illegal role transition {from:?} -> {to:?}")]
    IllegalTransition { from: NodeRole, to: NodeRole },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BeaconError {
    #[error("beacon carries no entries")]
    Empty,
    #[error("beacon lists node {0} more than once")]
    DuplicateEntry(NodeId),
    #[error("beacon length {0} is not a multiple of the entry size")]
    BadLength(usize),
    #[error("unknown role code {0}")]
    BadRole(u8),
    #[error("entry for node {0} is dated in the future")]
    FutureTimestamp(NodeId),
}

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}
