//! Per-release data acquisition: the ordered release registry, indexed
//! snapshots loaded from N-Triples dumps, and a SPARQL protocol client.

mod registry;
mod snapshot;
mod sparql;

pub mod queries;

pub use registry::{ReleaseDescriptor, ReleaseRegistry, ReleaseSource};
pub use snapshot::{ParseMode, Snapshot};
pub use sparql::{RetryPolicy, SparqlClient, SparqlResultSet};

use crate::rdf::MalformedLine;

/// Environment variable holding an optional bearer token for private endpoints.
pub const SPARQL_TOKEN_ENV: &str = "KBQ_SPARQL_TOKEN";

#[derive(Debug, thiserror::Error)]
pub enum AcquisitionError {
    #[error("release {0:?} is already registered")]
    DuplicateRelease(String),
    #[error("release {id:?}: date {date:?} is not an ISO-8601 calendar date")]
    UnparseableDate { id: String, date: String },
    #[error("release {0:?}: date {1} collides with an already registered release")]
    ConflictingDate(String, chrono::NaiveDate),
    #[error("unknown release {0:?}")]
    UnknownRelease(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("registry file is not valid JSON: {0}")]
    BadRegistryFile(#[from] serde_json::Error),
    #[error(transparent)]
    Parse(#[from] MalformedLine),
    #[error("endpoint returned HTTP {status}: {body}")]
    EndpointStatus { status: u16, body: String },
    #[error("endpoint request failed: {0}")]
    EndpointTransport(String),
    #[error("malformed SPARQL result: {0}")]
    MalformedResult(String),
    #[error("result has no binding for ?{0}")]
    MissingBinding(String),
    #[error("endpoint counts are inconsistent: class count {count} < subjects with values {with_values}")]
    NegativeZeroBucket { count: u64, with_values: u64 },
}
