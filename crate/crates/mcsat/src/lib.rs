//! File formats, experiment pipeline and benchmark harness around
//! [`mcsat_core`].
//!
//! * [`dimacs`]: DIMACS CNF parsing and canonical writing.
//! * [`formats`]: model, hints, backbone, dataset and solver-output files.
//! * [`pipeline`]: seeded instance generation and labelled dataset building.
//! * [`bench`]: the paired default-vs-hints conflict benchmark.
//!
//! The `mcsat` binary exposes all of it on the command line.

pub mod bench;
pub mod dimacs;
pub mod formats;
pub mod pipeline;

pub use mcsat_core as core;
