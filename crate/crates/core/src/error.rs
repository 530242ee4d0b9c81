use std::io;

use thiserror::Error;

use crate::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {0} does not exist")]
    VertexNotFound(VertexId),

    #[error("no document with id {0:?}")]
    DocumentNotFound(String),

    #[error("undefined cosine: empty term vector")]
    UndefinedCosine,

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("the result set is empty")]
    EmptySet,

    #[error("vertex {0} is already in the set")]
    AlreadyInSet(VertexId),

    #[error("vertex {0} is not a source of this iterator")]
    NotASource(VertexId),

    #[error("vertex {0} is already a source of this iterator")]
    AlreadySource(VertexId),

    #[error("no admissible vertex remains")]
    NoAdmissibleVertex,

    #[error("need {needed} admissible vertices, only {available} available")]
    InsufficientVertices { needed: usize, available: usize },

    #[error("no document matches query {0:?}")]
    NoMatchingCenter(String),

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("line {line}: duplicate document id {id:?}")]
    DuplicateDocument { line: usize, id: String },

    #[error("the corpus is empty")]
    EmptyCorpus,

    #[error("{what} exceeds guard ({actual} > {limit})")]
    GuardExceeded { what: &'static str, actual: u128, limit: u128 },

    #[error("graph file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable code, shared by the HTTP API and the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::VertexNotFound(_) | Error::DocumentNotFound(_) => "DOC_NOT_FOUND",
            Error::UndefinedCosine => "UNDEFINED_COSINE",
            Error::InvalidParams(_) => "INVALID_PARAMS",
            Error::EmptySet => "EMPTY_SET",
            Error::AlreadyInSet(_) | Error::AlreadySource(_) | Error::NotASource(_) => "INVALID_SOURCE",
            Error::NoAdmissibleVertex => "NO_ADMISSIBLE_VERTEX",
            Error::InsufficientVertices { .. } => "INSUFFICIENT_VERTICES",
            Error::NoMatchingCenter(_) => "NO_MATCHING_CENTER",
            Error::Malformed { .. } | Error::DuplicateDocument { .. } | Error::EmptyCorpus => "MALFORMED_INPUT",
            Error::GuardExceeded { .. } => "GUARD_EXCEEDED",
            Error::Format(_) => "BAD_GRAPH_FILE",
            Error::Io(_) => "IO_ERROR",
            Error::Json(_) | Error::Csv(_) => "MALFORMED_INPUT",
        }
    }
}
