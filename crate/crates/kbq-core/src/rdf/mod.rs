//! RDF data model: terms, triples and a streaming N-Triples reader/writer.

mod ntriples;
mod term;

pub use ntriples::{
    parse_line, parse_ntriples, read_lenient, read_strict, serialize_ntriple, MalformedLine,
    NTriplesParser,
};
pub use term::{BlankNode, Iri, Literal, Term, TermError, TermKind, Triple};

/// Well-known vocabulary IRIs used across the toolchain.
pub mod vocab {
    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const RDF_LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
    pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
    pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
    pub const XSD_DATE: &str = "http://www.w3.org/2001/XMLSchema#date";
    pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
}
