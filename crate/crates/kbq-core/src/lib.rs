//! Quality profiling for evolving RDF knowledge bases.
//!
//! The crate covers the full pipeline: loading N-Triples release dumps or
//! querying SPARQL endpoints ([`acquisition`]), per-class summary statistics
//! ([`profile`]), completeness and growth measures across releases
//! ([`evolution`]), statistical feature extraction and rebalancing
//! ([`features`]), constraint classifiers ([`learn`]) and SHACL shape
//! emission ([`shapes`]).

pub mod acquisition;
pub mod evolution;
pub mod features;
pub mod learn;
pub mod profile;
pub mod rdf;
pub mod shapes;
pub mod synth;
