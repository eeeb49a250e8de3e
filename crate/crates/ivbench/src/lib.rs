//! Benchmark harness for the `impvol` solver: solver variants by name,
//! accuracy and branch reports, latency timing, convergence slices and
//! the acceptance checks.

pub mod criteria;
pub mod latency;
pub mod registry;
pub mod report;
pub mod slices;

pub use registry::{Registry, Variant};
