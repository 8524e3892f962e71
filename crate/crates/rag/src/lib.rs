//! Experiment harness and file formats for random annulus graphs.
//!
//! The numerical core lives in [`rag_core`]; this crate adds the parts that
//! need `std`: threads, files, CSV and JSON.

pub mod format;
pub mod harness;

pub use rag_core as core;
