use std::fmt;

use serde::{Deserialize, Serialize};

use super::vocab;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TermError {
    #[error("invalid IRI {0:?}: {1}")]
    InvalidIri(String, &'static str),
    #[error("invalid blank node label {0:?}: {1}")]
    InvalidBlankLabel(String, &'static str),
    #[error("invalid language tag {0:?}")]
    InvalidLanguageTag(String),
    #[error("literal is not a valid triple subject")]
    LiteralSubject,
    #[error("predicate must be an IRI")]
    NonIriPredicate,
}

/// An absolute IRI. Guaranteed non-empty and free of whitespace and angle brackets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Iri(String);

impl Iri {
    pub fn new(iri: impl Into<String>) -> Result<Self, TermError> {
        let iri = iri.into();
        if iri.is_empty() {
            return Err(TermError::InvalidIri(iri, "empty"));
        }
        if iri.chars().any(|c| c.is_whitespace() || c == '<' || c == '>') {
            return Err(TermError::InvalidIri(iri, "contains whitespace or angle bracket"));
        }
        Ok(Iri(iri))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Local name: the substring after the last `#` or `/`.
    pub fn local_name(&self) -> &str {
        let s = self.as_str();
        match s.rfind(['#', '/']) {
            Some(i) if i + 1 < s.len() => &s[i + 1..],
            _ => s,
        }
    }

    /// Namespace part: everything up to and including the last `#` or `/`.
    pub fn namespace(&self) -> &str {
        let s = self.as_str();
        match s.rfind(['#', '/']) {
            Some(i) if i + 1 < s.len() => &s[..=i],
            _ => "",
        }
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        self.as_str()
    }
}

/// A blank-node label, kept verbatim within one document.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlankNode(String);

impl BlankNode {
    pub fn new(label: impl Into<String>) -> Result<Self, TermError> {
        let label = label.into();
        if label.is_empty() {
            return Err(TermError::InvalidBlankLabel(label, "empty"));
        }
        let mut chars = label.chars();
        let first = chars.next().unwrap();
        if !(first.is_ascii_alphanumeric() || first == '_') {
            return Err(TermError::InvalidBlankLabel(label, "must start with letter, digit or _"));
        }
        if !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(TermError::InvalidBlankLabel(label, "allowed characters: A-Z a-z 0-9 _ -"));
        }
        Ok(BlankNode(label))
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

/// An RDF literal. Plain literals are normalized to `xsd:string` at construction,
/// language-tagged ones carry `rdf:langString` and a non-empty tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    lexical: String,
    datatype: Iri,
    language: Option<String>,
}

impl Literal {
    /// Plain literal, stored with datatype `xsd:string`.
    pub fn string(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: Iri::new(vocab::XSD_STRING).unwrap(),
            language: None,
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Self {
        Literal { lexical: lexical.into(), datatype, language: None }
    }

    pub fn lang_tagged(lexical: impl Into<String>, tag: impl Into<String>) -> Result<Self, TermError> {
        let tag = tag.into();
        if !valid_language_tag(&tag) {
            return Err(TermError::InvalidLanguageTag(tag));
        }
        Ok(Literal {
            lexical: lexical.into(),
            datatype: Iri::new(vocab::RDF_LANG_STRING).unwrap(),
            language: Some(tag),
        })
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> &Iri {
        &self.datatype
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }
}

fn valid_language_tag(tag: &str) -> bool {
    if tag.is_empty() {
        return false;
    }
    let mut parts = tag.split('-');
    let primary = parts.next().unwrap();
    if primary.is_empty() || !primary.chars().all(|c| c.is_ascii_alphabetic()) {
        return false;
    }
    parts.all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermKind {
    Iri,
    Literal,
    BlankNode,
}

impl fmt::Display for TermKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermKind::Iri => write!(f, "IRI"),
            TermKind::Literal => write!(f, "Literal"),
            TermKind::BlankNode => write!(f, "BlankNode"),
        }
    }
}

/// An RDF term: exactly one of IRI, literal or blank node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
    BlankNode(BlankNode),
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Result<Self, TermError> {
        Ok(Term::Iri(Iri::new(iri)?))
    }

    pub fn kind(&self) -> TermKind {
        match self {
            Term::Iri(_) => TermKind::Iri,
            Term::Literal(_) => TermKind::Literal,
            Term::BlankNode(_) => TermKind::BlankNode,
        }
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            _ => None,
        }
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

impl From<BlankNode> for Term {
    fn from(b: BlankNode) -> Self {
        Term::BlankNode(b)
    }
}

/// A subject-predicate-object statement. Subjects are never literals and
/// predicates are always IRIs; both are enforced at construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    subject: Term,
    predicate: Iri,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Iri, object: Term) -> Result<Self, TermError> {
        if subject.kind() == TermKind::Literal {
            return Err(TermError::LiteralSubject);
        }
        Ok(Triple { subject, predicate, object })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Iri {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub fn is_type_assertion(&self) -> bool {
        self.predicate.as_str() == vocab::RDF_TYPE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iri_rejects_whitespace_and_brackets() {
        assert!(Iri::new("http://a b").is_err());
        assert!(Iri::new("http://a<b>").is_err());
        assert!(Iri::new("").is_err());
        assert!(Iri::new("http://example.org/ok").is_ok());
    }

    #[test]
    fn plain_literal_defaults_to_xsd_string() {
        let lit = Literal::string("hi");
        assert_eq!(lit.datatype().as_str(), vocab::XSD_STRING);
        assert!(lit.language().is_none());
    }

    #[test]
    fn lang_literal_carries_rdf_lang_string() {
        let lit = Literal::lang_tagged("bonjour", "fr").unwrap();
        assert_eq!(lit.datatype().as_str(), vocab::RDF_LANG_STRING);
        assert_eq!(lit.language(), Some("fr"));
        assert!(Literal::lang_tagged("x", "").is_err());
        assert!(Literal::lang_tagged("x", "1fr").is_err());
    }

    #[test]
    fn term_kind_reports_populated_variant() {
        assert_eq!(Term::iri("http://a").unwrap().kind(), TermKind::Iri);
        assert_eq!(Term::from(Literal::lang_tagged("x", "en").unwrap()).kind(), TermKind::Literal);
        assert_eq!(Term::from(BlankNode::new("b0").unwrap()).kind(), TermKind::BlankNode);
    }

    #[test]
    fn triple_rejects_literal_subject() {
        let err = Triple::new(
            Term::from(Literal::string("s")),
            Iri::new("http://p").unwrap(),
            Term::iri("http://o").unwrap(),
        );
        assert_eq!(err.unwrap_err(), TermError::LiteralSubject);
    }

    #[test]
    fn local_name_splits_on_hash_and_slash() {
        assert_eq!(Iri::new("http://ex.org/a/Per").unwrap().local_name(), "Per");
        assert_eq!(Iri::new("http://ex.org/a#Frag").unwrap().local_name(), "Frag");
        assert_eq!(Iri::new("urn:x").unwrap().local_name(), "urn:x");
    }
}
