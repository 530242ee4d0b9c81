//! Diversified top-k retrieval over directed document graphs.

pub mod api;
pub mod baseline;
pub mod bench;
pub mod corpus;
pub mod engine;
pub mod error;
pub mod pipeline;
pub mod ranking;
pub mod service;

pub use error::{Error, Result};

/// Dense internal vertex number, assigned in ingestion order.
pub type VertexId = u32;

/// `f64` with a total order, for use as a heap or map key.
#[derive(Debug, Clone, Copy, Default)]
pub struct OrdF64(pub f64);

impl PartialEq for OrdF64 {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0).is_eq()
    }
}

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
