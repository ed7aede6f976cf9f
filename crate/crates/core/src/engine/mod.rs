//! Discrete-event run loop, per-run metrics and chain auditing.

mod auditor;
mod event;
mod metrics;
mod sim;

pub use auditor::{audit_chains, ChainViolation};
pub use event::{EventQueue, Scheduled};
pub use metrics::{contact_statistics, mean_delay, pdr, Contact, DropCause, RunMetrics};
pub use sim::{run, run_traced, static_routes, Simulation, TraceRow};
