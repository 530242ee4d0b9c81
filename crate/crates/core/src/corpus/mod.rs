//! Document collection: graph structure, term vectors, ingestion and the two
//! primitive distances.

pub(crate) mod frontier;
mod graph;
mod ingest;
mod store;
mod tfidf;
mod vector;

pub use graph::{
    compute_diameter, shortest_paths_from, DiameterEstimate, DiameterOptions, Document, DocumentGraph, RestrictionMode,
    RestrictionSet,
};
pub use ingest::{ingest_collection, ingest_records, write_collection, CollectionRecord, IngestReport};
pub use store::{load_graph, read_graph, save_graph, write_graph};
pub use tfidf::{build_tfidf, TfIdf, Vocabulary};
pub(crate) use vector::cosine_distance;
pub use vector::{text_distance, DenseVector, TermId, TermVector};

#[cfg(test)]
pub(crate) use graph::fixtures;
