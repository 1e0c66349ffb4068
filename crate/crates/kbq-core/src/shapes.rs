//! Constraint assembly per class-property and deterministic SHACL Turtle
//! emission. A reader for the emitted subset supports round-trip checks.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::features::{MaxLabel, MinLabel, StringLengthSummary};
use crate::profile::ValueCount;
use crate::rdf::{vocab, TermKind};

#[derive(Debug, thiserror::Error)]
pub enum ShapeError {
    #[error("property {property:?}: {reason}")]
    InconsistentInputs { property: String, reason: String },
    #[error("parse error at offset {offset}: {reason}")]
    Parse { offset: usize, reason: String },
}

/// Induced constraints for one class-property pair. Absent fields emit no
/// facet; a set with no facets at all emits no property shape.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintSet {
    pub class: String,
    pub property: String,
    pub min_count: Option<u32>,
    pub max_count: Option<u32>,
    pub node_kind: Option<TermKind>,
    pub datatype: Option<String>,
    pub class_disjunction: Option<Vec<String>>,
    pub min_length: Option<u64>,
    pub max_length: Option<u64>,
}

impl ConstraintSet {
    pub fn is_empty(&self) -> bool {
        self.min_count.is_none()
            && self.max_count.is_none()
            && self.node_kind.is_none()
            && self.datatype.is_none()
            && self.class_disjunction.is_none()
            && self.min_length.is_none()
            && self.max_length.is_none()
    }
}

/// Per-property evidence feeding constraint induction.
#[derive(Debug, Clone, Default)]
pub struct PropertyInputs {
    pub min_label: Option<MinLabel>,
    pub max_label: Option<MaxLabel>,
    pub node_kind: Option<TermKind>,
    pub datatype_hist: BTreeMap<String, ValueCount>,
    pub object_class_hist: BTreeMap<String, ValueCount>,
    /// IRI + blank object occurrences, the coverage base for thresholding.
    pub object_total: u64,
    pub string_lengths: Option<StringLengthSummary>,
}

/// How the object-class disjunction is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassSelection {
    /// All classes tied (within 1e-9 relative) for the maximal coverage.
    MaxCoverage,
    /// All classes covering at least this share of the object occurrences.
    Threshold(f64),
}

/// Assemble constraints for every property of a class. Properties whose
/// evidence induces nothing are omitted.
pub fn induce_constraints(
    class: &str,
    inputs: &BTreeMap<String, PropertyInputs>,
    selection: ClassSelection,
) -> Result<Vec<ConstraintSet>, ShapeError> {
    let mut out = Vec::new();
    for (property, input) in inputs {
        let mut set = ConstraintSet {
            class: class.to_string(),
            property: property.clone(),
            ..ConstraintSet::default()
        };
        if matches!(input.min_label, Some(MinLabel::Min1) | Some(MinLabel::Min1Plus)) {
            set.min_count = Some(1);
        }
        if matches!(input.max_label, Some(MaxLabel::Max1)) {
            set.max_count = Some(1);
        }
        set.node_kind = input.node_kind;
        match input.node_kind {
            Some(TermKind::Literal) => {
                if input.datatype_hist.is_empty() {
                    return Err(ShapeError::InconsistentInputs {
                        property: property.clone(),
                        reason: "literal node kind with an empty datatype histogram".into(),
                    });
                }
                let datatype = majority_datatype(&input.datatype_hist);
                if datatype == vocab::XSD_STRING || datatype == vocab::RDF_LANG_STRING {
                    if let Some(lengths) = input.string_lengths {
                        set.min_length = Some(lengths.q1);
                        set.max_length = Some(lengths.q3);
                    }
                }
                set.datatype = Some(datatype);
            }
            Some(TermKind::Iri) | Some(TermKind::BlankNode) => {
                let classes = select_classes(&input.object_class_hist, input.object_total, selection);
                if !classes.is_empty() {
                    set.class_disjunction = Some(classes);
                }
            }
            None => {}
        }
        if !set.is_empty() {
            out.push(set);
        }
    }
    Ok(out)
}

fn majority_datatype(hist: &BTreeMap<String, ValueCount>) -> String {
    // ties break toward the lexicographically smaller IRI; BTreeMap order
    // makes the first maximum the smallest
    let mut best: Option<(&String, u64)> = None;
    for (dt, counts) in hist {
        if best.is_none() || counts.total > best.unwrap().1 {
            best = Some((dt, counts.total));
        }
    }
    best.expect("non-empty histogram").0.clone()
}

fn select_classes(
    hist: &BTreeMap<String, ValueCount>,
    object_total: u64,
    selection: ClassSelection,
) -> Vec<String> {
    let mut picked: Vec<(&String, u64)> = match selection {
        ClassSelection::MaxCoverage => {
            let Some(max_total) = hist.values().map(|v| v.total).max() else {
                return Vec::new();
            };
            let floor = max_total as f64 * (1.0 - 1e-9);
            hist.iter().filter(|(_, v)| v.total as f64 >= floor).map(|(c, v)| (c, v.total)).collect()
        }
        ClassSelection::Threshold(tau) => {
            if object_total == 0 {
                return Vec::new();
            }
            hist.iter()
                .filter(|(_, v)| v.total as f64 / object_total as f64 >= tau)
                .map(|(c, v)| (c, v.total))
                .collect()
        }
    };
    // strongest coverage first; exact ties keep the published listing order
    // (schema.org ahead of dbpedia.org) by falling back to descending IRI
    picked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| b.0.cmp(a.0)));
    picked.into_iter().map(|(c, _)| c.clone()).collect()
}

const WELL_KNOWN_PREFIXES: [(&str, &str); 11] = [
    ("dbo", "http://dbpedia.org/ontology/"),
    ("dbp", "http://dbpedia.org/property/"),
    ("dbr", "http://dbpedia.org/resource/"),
    ("dul", "http://www.ontologydesignpatterns.org/ont/dul/DUL.owl#"),
    ("ex", "http://example.org/shapes/"),
    ("foaf", "http://xmlns.com/foaf/0.1/"),
    ("lode", "http://linkedevents.org/ontology/"),
    ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
    ("schema", "http://schema.org/"),
    ("sh", "http://www.w3.org/ns/shacl#"),
    ("xsd", "http://www.w3.org/2001/XMLSchema#"),
];

const EX_NS: &str = "http://example.org/shapes/";

/// Node shapes keyed by target class.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ShapeDocument {
    shapes: BTreeMap<String, Vec<ConstraintSet>>,
}

impl ShapeDocument {
    pub fn new() -> Self {
        ShapeDocument::default()
    }

    /// Add one class's constraints; property shapes are kept sorted by
    /// property IRI.
    pub fn insert(&mut self, class: impl Into<String>, mut constraints: Vec<ConstraintSet>) {
        let class = class.into();
        constraints.sort_by(|a, b| a.property.cmp(&b.property));
        for c in &mut constraints {
            c.class = class.clone();
        }
        self.shapes.insert(class, constraints);
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn classes(&self) -> impl Iterator<Item = &str> {
        self.shapes.keys().map(String::as_str)
    }

    pub fn constraints(&self, class: &str) -> Option<&[ConstraintSet]> {
        self.shapes.get(class).map(Vec::as_slice)
    }

    /// Output file name for a single-class document.
    pub fn shape_filename(class_iri: &str) -> String {
        format!("{}.shapes.ttl", local_name(class_iri))
    }

    /// Serialize to Turtle. Identical documents produce identical bytes:
    /// prefixes, shapes and facets all have a fixed order.
    pub fn emit(&self) -> String {
        let mut used: Vec<(&str, &str)> = vec![
            ("sh", ns_of("sh")),
            ("xsd", ns_of("xsd")),
        ];
        if !self.shapes.is_empty() {
            used.push(("ex", EX_NS));
        }
        for (class, constraints) in &self.shapes {
            mark_prefix(&mut used, class);
            for c in constraints {
                mark_prefix(&mut used, &c.property);
                if let Some(dt) = &c.datatype {
                    mark_prefix(&mut used, dt);
                }
                for cls in c.class_disjunction.iter().flatten() {
                    mark_prefix(&mut used, cls);
                }
            }
        }
        used.sort();
        used.dedup();

        let mut out = String::new();
        for (prefix, ns) in &used {
            let _ = writeln!(out, "@prefix {prefix}: <{ns}> .");
        }

        let mut shape_names: Vec<String> = Vec::new();
        for (class, constraints) in &self.shapes {
            out.push('\n');
            let shape_name = unique_shape_name(&mut shape_names, class);
            let _ = writeln!(out, "ex:{shape_name} a sh:NodeShape ;");
            let target = render_iri(class);
            if constraints.is_empty() {
                let _ = writeln!(out, " sh:targetClass {target} .");
                continue;
            }
            let _ = writeln!(out, " sh:targetClass {target} ;");
            for (i, c) in constraints.iter().enumerate() {
                let terminator = if i + 1 == constraints.len() { "." } else { ";" };
                emit_property_shape(&mut out, c, terminator);
            }
        }
        out
    }

    /// Read a document previously produced by [`ShapeDocument::emit`].
    pub fn parse(text: &str) -> Result<Self, ShapeError> {
        parser::parse_document(text)
    }
}

fn emit_property_shape(out: &mut String, c: &ConstraintSet, terminator: &str) {
    let mut facets: Vec<String> = Vec::new();
    if let Some(n) = c.min_count {
        facets.push(format!("sh:minCount {n}"));
    }
    if let Some(n) = c.max_count {
        facets.push(format!("sh:maxCount {n}"));
    }
    if let Some(kind) = c.node_kind {
        let kind = match kind {
            TermKind::Iri => "sh:IRI",
            TermKind::Literal => "sh:Literal",
            TermKind::BlankNode => "sh:BlankNode",
        };
        facets.push(format!("sh:nodeKind {kind}"));
    }
    if let Some(dt) = &c.datatype {
        facets.push(format!("sh:datatype {}", render_iri(dt)));
    }
    if let Some(classes) = &c.class_disjunction {
        let items: Vec<String> =
            classes.iter().map(|cls| format!("[sh:class {}]", render_iri(cls))).collect();
        facets.push(format!("sh:or ( {} )", items.join(" ")));
    }
    if let Some(n) = c.min_length {
        facets.push(format!("sh:minLength {n}"));
    }
    if let Some(n) = c.max_length {
        facets.push(format!("sh:maxLength {n}"));
    }

    let path = render_iri(&c.property);
    if facets.is_empty() {
        let _ = writeln!(out, " sh:property [ sh:path {path} ] {terminator}");
        return;
    }
    let _ = writeln!(out, " sh:property [ sh:path {path} ;");
    for (i, facet) in facets.iter().enumerate() {
        if i + 1 == facets.len() {
            let _ = writeln!(out, "  {facet} ] {terminator}");
        } else {
            let _ = writeln!(out, "  {facet} ;");
        }
    }
}

fn ns_of(prefix: &str) -> &'static str {
    WELL_KNOWN_PREFIXES.iter().find(|(p, _)| *p == prefix).map(|(_, ns)| *ns).unwrap()
}

fn mark_prefix<'a>(used: &mut Vec<(&'a str, &'a str)>, iri: &str) {
    if let Some((prefix, ns)) = prefix_for(iri) {
        if !used.contains(&(prefix, ns)) {
            used.push((prefix, ns));
        }
    }
}

fn prefix_for(iri: &str) -> Option<(&'static str, &'static str)> {
    for (prefix, ns) in WELL_KNOWN_PREFIXES {
        if let Some(local) = iri.strip_prefix(ns) {
            if is_pn_local(local) {
                return Some((prefix, ns));
            }
        }
    }
    None
}

fn is_pn_local(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn render_iri(iri: &str) -> String {
    match prefix_for(iri) {
        Some((prefix, ns)) => format!("{prefix}:{}", &iri[ns.len()..]),
        None => format!("<{iri}>"),
    }
}

fn local_name(iri: &str) -> String {
    let local = match iri.rfind(['#', '/']) {
        Some(i) if i + 1 < iri.len() => &iri[i + 1..],
        _ => iri,
    };
    let mut out: String = local
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if out.is_empty() || out.chars().next().unwrap().is_ascii_digit() {
        out.insert(0, '_');
    }
    out
}

fn unique_shape_name(taken: &mut Vec<String>, class: &str) -> String {
    let base = format!("{}Shape", local_name(class));
    let mut name = base.clone();
    let mut n = 2;
    while taken.contains(&name) {
        name = format!("{base}_{n}");
        n += 1;
    }
    taken.push(name.clone());
    name
}

mod parser {
    use super::*;

    #[derive(Debug, Clone, PartialEq)]
    enum Token {
        AtPrefix,
        Pname(String),
        IriRef(String),
        Integer(u64),
        Punct(char),
    }

    struct Lexer<'a> {
        text: &'a str,
        pos: usize,
    }

    impl<'a> Lexer<'a> {
        fn tokens(mut self) -> Result<Vec<(usize, Token)>, ShapeError> {
            let mut out = Vec::new();
            while let Some(c) = self.peek() {
                match c {
                    c if c.is_whitespace() => {
                        self.bump();
                    }
                    '#' => {
                        while let Some(c) = self.bump() {
                            if c == '\n' {
                                break;
                            }
                        }
                    }
                    '<' => {
                        let start = self.pos;
                        self.bump();
                        let iri_start = self.pos;
                        while let Some(c) = self.peek() {
                            if c == '>' {
                                break;
                            }
                            self.bump();
                        }
                        if self.peek() != Some('>') {
                            return Err(err(start, "unterminated IRI"));
                        }
                        let iri = self.text[iri_start..self.pos].to_string();
                        self.bump();
                        out.push((start, Token::IriRef(iri)));
                    }
                    '@' => {
                        let start = self.pos;
                        self.bump();
                        let word = self.take_word();
                        if word != "prefix" {
                            return Err(err(start, "only @prefix is supported"));
                        }
                        out.push((start, Token::AtPrefix));
                    }
                    '[' | ']' | '(' | ')' | ';' | '.' => {
                        out.push((self.pos, Token::Punct(c)));
                        self.bump();
                    }
                    c if c.is_ascii_digit() => {
                        let start = self.pos;
                        let word = self.take_word();
                        let n = word
                            .parse::<u64>()
                            .map_err(|_| err(start, "malformed integer"))?;
                        out.push((start, Token::Integer(n)));
                    }
                    _ => {
                        let start = self.pos;
                        let word = self.take_word();
                        if word.is_empty() {
                            return Err(err(start, "unexpected character"));
                        }
                        out.push((start, Token::Pname(word.to_string())));
                    }
                }
            }
            Ok(out)
        }

        fn take_word(&mut self) -> &'a str {
            let start = self.pos;
            while let Some(c) = self.peek() {
                if c.is_whitespace() || matches!(c, '[' | ']' | '(' | ')' | ';' | '<' | '>') {
                    break;
                }
                // a bare '.' ends a statement; '.' inside a word (IRIs,
                // decimals) continues it
                if c == '.' {
                    let next = self.text[self.pos + 1..].chars().next();
                    if next.map_or(true, |n| n.is_whitespace()) {
                        break;
                    }
                }
                self.bump();
            }
            &self.text[start..self.pos]
        }

        fn peek(&self) -> Option<char> {
            self.text[self.pos..].chars().next()
        }

        fn bump(&mut self) -> Option<char> {
            let c = self.peek()?;
            self.pos += c.len_utf8();
            Some(c)
        }
    }

    fn err(offset: usize, reason: impl Into<String>) -> ShapeError {
        ShapeError::Parse { offset, reason: reason.into() }
    }

    struct Parser {
        tokens: Vec<(usize, Token)>,
        at: usize,
        prefixes: BTreeMap<String, String>,
    }

    impl Parser {
        fn peek(&self) -> Option<&Token> {
            self.tokens.get(self.at).map(|(_, t)| t)
        }

        fn offset(&self) -> usize {
            self.tokens.get(self.at).map_or(usize::MAX, |(o, _)| *o)
        }

        fn next(&mut self) -> Result<Token, ShapeError> {
            let token =
                self.tokens.get(self.at).cloned().ok_or_else(|| err(usize::MAX, "unexpected end"))?;
            self.at += 1;
            Ok(token.1)
        }

        fn expect_punct(&mut self, c: char) -> Result<(), ShapeError> {
            let offset = self.offset();
            match self.next()? {
                Token::Punct(got) if got == c => Ok(()),
                got => Err(err(offset, format!("expected {c:?}, found {got:?}"))),
            }
        }

        fn expect_keyword(&mut self, word: &str) -> Result<(), ShapeError> {
            let offset = self.offset();
            match self.next()? {
                Token::Pname(w) if w == word => Ok(()),
                got => Err(err(offset, format!("expected {word}, found {got:?}"))),
            }
        }

        fn expect_integer(&mut self) -> Result<u64, ShapeError> {
            let offset = self.offset();
            match self.next()? {
                Token::Integer(n) => Ok(n),
                got => Err(err(offset, format!("expected integer, found {got:?}"))),
            }
        }

        fn resolve(&self, offset: usize, token: Token) -> Result<String, ShapeError> {
            match token {
                Token::IriRef(iri) => Ok(iri),
                Token::Pname(name) => {
                    let (prefix, local) = name
                        .split_once(':')
                        .ok_or_else(|| err(offset, format!("expected an IRI, found {name:?}")))?;
                    let ns = self
                        .prefixes
                        .get(prefix)
                        .ok_or_else(|| err(offset, format!("undeclared prefix {prefix:?}")))?;
                    Ok(format!("{ns}{local}"))
                }
                got => Err(err(offset, format!("expected an IRI, found {got:?}"))),
            }
        }

        fn expect_iri(&mut self) -> Result<String, ShapeError> {
            let offset = self.offset();
            let token = self.next()?;
            self.resolve(offset, token)
        }
    }

    pub(super) fn parse_document(text: &str) -> Result<ShapeDocument, ShapeError> {
        let tokens = Lexer { text, pos: 0 }.tokens()?;
        let mut p = Parser { tokens, at: 0, prefixes: BTreeMap::new() };
        let mut doc = ShapeDocument::new();

        while let Some(token) = p.peek() {
            match token {
                Token::AtPrefix => {
                    p.next()?;
                    let offset = p.offset();
                    let decl = match p.next()? {
                        Token::Pname(name) => name,
                        got => return Err(err(offset, format!("expected prefix name, found {got:?}"))),
                    };
                    let prefix = decl
                        .strip_suffix(':')
                        .ok_or_else(|| err(offset, "prefix name must end with :"))?;
                    let offset = p.offset();
                    let ns = match p.next()? {
                        Token::IriRef(iri) => iri,
                        got => return Err(err(offset, format!("expected namespace IRI, found {got:?}"))),
                    };
                    p.expect_punct('.')?;
                    p.prefixes.insert(prefix.to_string(), ns);
                }
                _ => {
                    let (class, constraints) = parse_shape(&mut p)?;
                    doc.insert(class, constraints);
                }
            }
        }
        Ok(doc)
    }

    fn parse_shape(p: &mut Parser) -> Result<(String, Vec<ConstraintSet>), ShapeError> {
        // subject name is informational; the target class is the key
        let _subject = p.expect_iri()?;
        p.expect_keyword("a")?;
        let offset = p.offset();
        let kind = p.expect_iri()?;
        if kind != format!("{}NodeShape", ns_of("sh")) {
            return Err(err(offset, "expected sh:NodeShape"));
        }
        p.expect_punct(';')?;
        let offset = p.offset();
        let target_kw = p.expect_iri()?;
        if target_kw != format!("{}targetClass", ns_of("sh")) {
            return Err(err(offset, "expected sh:targetClass"));
        }
        let class = p.expect_iri()?;

        let mut constraints = Vec::new();
        loop {
            let offset = p.offset();
            match p.next()? {
                Token::Punct('.') => break,
                Token::Punct(';') => {
                    let offset = p.offset();
                    let keyword = p.expect_iri()?;
                    if keyword != format!("{}property", ns_of("sh")) {
                        return Err(err(offset, "expected sh:property"));
                    }
                    constraints.push(parse_property_shape(p, &class)?);
                }
                got => return Err(err(offset, format!("expected ; or ., found {got:?}"))),
            }
        }
        Ok((class, constraints))
    }

    fn parse_property_shape(p: &mut Parser, class: &str) -> Result<ConstraintSet, ShapeError> {
        p.expect_punct('[')?;
        let offset = p.offset();
        let path_kw = p.expect_iri()?;
        if path_kw != format!("{}path", ns_of("sh")) {
            return Err(err(offset, "property shape must start with sh:path"));
        }
        let property = p.expect_iri()?;
        let mut set = ConstraintSet {
            class: class.to_string(),
            property,
            ..ConstraintSet::default()
        };
        loop {
            let offset = p.offset();
            match p.next()? {
                Token::Punct(']') => break,
                Token::Punct(';') => {
                    let offset = p.offset();
                    let facet = p.expect_iri()?;
                    let sh = ns_of("sh");
                    match facet.strip_prefix(sh) {
                        Some("minCount") => set.min_count = Some(p.expect_integer()? as u32),
                        Some("maxCount") => set.max_count = Some(p.expect_integer()? as u32),
                        Some("minLength") => set.min_length = Some(p.expect_integer()?),
                        Some("maxLength") => set.max_length = Some(p.expect_integer()?),
                        Some("datatype") => set.datatype = Some(p.expect_iri()?),
                        Some("nodeKind") => {
                            let offset = p.offset();
                            let kind = p.expect_iri()?;
                            set.node_kind = Some(match kind.strip_prefix(sh) {
                                Some("IRI") => TermKind::Iri,
                                Some("Literal") => TermKind::Literal,
                                Some("BlankNode") => TermKind::BlankNode,
                                _ => return Err(err(offset, format!("unknown node kind {kind:?}"))),
                            });
                        }
                        Some("or") => set.class_disjunction = Some(parse_or_list(p)?),
                        _ => return Err(err(offset, format!("unsupported facet {facet:?}"))),
                    }
                }
                got => return Err(err(offset, format!("expected ; or ], found {got:?}"))),
            }
        }
        Ok(set)
    }

    fn parse_or_list(p: &mut Parser) -> Result<Vec<String>, ShapeError> {
        p.expect_punct('(')?;
        let mut classes = Vec::new();
        loop {
            match p.peek() {
                Some(Token::Punct(')')) => {
                    p.next()?;
                    break;
                }
                Some(Token::Punct('[')) => {
                    p.next()?;
                    let offset = p.offset();
                    let keyword = p.expect_iri()?;
                    if keyword != format!("{}class", ns_of("sh")) {
                        return Err(err(offset, "expected sh:class inside sh:or"));
                    }
                    classes.push(p.expect_iri()?);
                    p.expect_punct(']')?;
                }
                _ => return Err(err(p.offset(), "expected [sh:class ...] or ) in sh:or")),
            }
        }
        if classes.is_empty() {
            return Err(err(p.offset(), "sh:or needs at least one alternative"));
        }
        Ok(classes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vc(total: u64, distinct: u64) -> ValueCount {
        ValueCount { total, distinct }
    }

    #[test]
    fn death_date_gets_majority_datatype() {
        // Table-style datatype spread: xsd:date dominates at ~61%
        let mut inputs = BTreeMap::new();
        inputs.insert(
            "http://dbpedia.org/property/deathDate".to_string(),
            PropertyInputs {
                min_label: Some(MinLabel::Min0),
                max_label: Some(MaxLabel::Max1Plus),
                node_kind: Some(TermKind::Literal),
                datatype_hist: BTreeMap::from([
                    ("http://www.w3.org/2001/XMLSchema#date".to_string(), vc(39761, 26726)),
                    ("http://www.w3.org/2001/XMLSchema#integer".to_string(), vc(13543, 1758)),
                    (vocab::RDF_LANG_STRING.to_string(), vc(6388, 3512)),
                    ("http://www.w3.org/2001/XMLSchema#gMonthDay".to_string(), vc(5446, 366)),
                ]),
                ..PropertyInputs::default()
            },
        );
        let sets = induce_constraints("http://xmlns.com/foaf/0.1/Person", &inputs, ClassSelection::MaxCoverage)
            .unwrap();
        assert_eq!(sets.len(), 1);
        let set = &sets[0];
        assert_eq!(set.datatype.as_deref(), Some("http://www.w3.org/2001/XMLSchema#date"));
        assert_eq!(set.min_count, None, "MIN0 adds no cardinality facet");
        assert_eq!(set.max_count, None, "MAX1+ adds no cardinality facet");
        assert_eq!(set.min_length, None, "dates carry no string facets");
    }

    #[test]
    fn birth_place_disjunction_takes_the_tied_maximum() {
        let hist = BTreeMap::from([
            ("http://schema.org/Place".to_string(), vc(71748, 16502)),
            ("http://dbpedia.org/ontology/Place".to_string(), vc(71748, 16502)),
            ("http://dbpedia.org/ontology/PopulatedPlace".to_string(), vc(71542, 16353)),
            ("http://dbpedia.org/ontology/Settlement".to_string(), vc(41216, 14184)),
        ]);
        let mut inputs = BTreeMap::new();
        inputs.insert(
            "http://dbpedia.org/property/birthPlace".to_string(),
            PropertyInputs {
                node_kind: Some(TermKind::Iri),
                object_class_hist: hist.clone(),
                object_total: 89355,
                ..PropertyInputs::default()
            },
        );
        let sets =
            induce_constraints("http://c", &inputs, ClassSelection::MaxCoverage).unwrap();
        assert_eq!(
            sets[0].class_disjunction.as_deref().unwrap(),
            ["http://schema.org/Place", "http://dbpedia.org/ontology/Place"]
        );

        // threshold mode keeps everything above the coverage cut
        let mut inputs_tau = inputs.clone();
        inputs_tau.get_mut("http://dbpedia.org/property/birthPlace").unwrap().object_class_hist =
            hist;
        let sets = induce_constraints("http://c", &inputs_tau, ClassSelection::Threshold(0.8))
            .unwrap();
        assert_eq!(sets[0].class_disjunction.as_deref().unwrap().len(), 3);
    }

    #[test]
    fn unconstrained_property_emits_nothing() {
        let mut inputs = BTreeMap::new();
        inputs.insert(
            "http://p".to_string(),
            PropertyInputs {
                min_label: Some(MinLabel::Min0),
                max_label: Some(MaxLabel::Max1Plus),
                node_kind: None,
                ..PropertyInputs::default()
            },
        );
        let sets = induce_constraints("http://c", &inputs, ClassSelection::MaxCoverage).unwrap();
        assert!(sets.is_empty());
    }

    #[test]
    fn string_properties_get_length_facets() {
        let mut inputs = BTreeMap::new();
        inputs.insert(
            "http://foaf/name".to_string(),
            PropertyInputs {
                min_label: Some(MinLabel::Min1),
                node_kind: Some(TermKind::Literal),
                datatype_hist: BTreeMap::from([(vocab::XSD_STRING.to_string(), vc(100, 80))]),
                string_lengths: Some(StringLengthSummary { min: 1, q1: 4, q3: 18, max: 60 }),
                ..PropertyInputs::default()
            },
        );
        let sets = induce_constraints("http://c", &inputs, ClassSelection::MaxCoverage).unwrap();
        let set = &sets[0];
        assert_eq!(set.min_count, Some(1));
        assert_eq!((set.min_length, set.max_length), (Some(4), Some(18)));
    }

    #[test]
    fn literal_without_datatypes_is_inconsistent() {
        let mut inputs = BTreeMap::new();
        inputs.insert(
            "http://p".to_string(),
            PropertyInputs { node_kind: Some(TermKind::Literal), ..PropertyInputs::default() },
        );
        assert!(matches!(
            induce_constraints("http://c", &inputs, ClassSelection::MaxCoverage),
            Err(ShapeError::InconsistentInputs { .. })
        ));
    }

    #[test]
    fn empty_document_is_prefixes_only() {
        let doc = ShapeDocument::new();
        let text = doc.emit();
        assert_eq!(
            text,
            "@prefix sh: <http://www.w3.org/ns/shacl#> .\n@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n"
        );
    }

    #[test]
    fn emission_is_deterministic_and_round_trips() {
        let mut doc = ShapeDocument::new();
        doc.insert(
            "http://xmlns.com/foaf/0.1/Person",
            vec![
                ConstraintSet {
                    property: "http://dbpedia.org/ontology/birthDate".to_string(),
                    min_count: Some(1),
                    max_count: Some(1),
                    node_kind: Some(TermKind::Literal),
                    datatype: Some("http://www.w3.org/2001/XMLSchema#date".to_string()),
                    ..ConstraintSet::default()
                },
                ConstraintSet {
                    property: "http://dbpedia.org/property/birthPlace".to_string(),
                    node_kind: Some(TermKind::Iri),
                    class_disjunction: Some(vec![
                        "http://schema.org/Place".to_string(),
                        "http://dbpedia.org/ontology/Place".to_string(),
                    ]),
                    ..ConstraintSet::default()
                },
            ],
        );
        let text = doc.emit();
        assert_eq!(text, doc.emit());
        assert!(text.contains("sh:minCount 1"));
        assert!(text.contains("sh:datatype xsd:date"));
        assert!(text.contains("sh:or ( [sh:class schema:Place] [sh:class dbo:Place] )"));
        assert!(text.contains("ex:PersonShape a sh:NodeShape ;"));

        let parsed = ShapeDocument::parse(&text).unwrap();
        assert_eq!(parsed.emit(), text, "emit of parse is the identity on emitted documents");
    }

    #[test]
    fn unknown_namespaces_fall_back_to_full_iris() {
        let mut doc = ShapeDocument::new();
        doc.insert(
            "http://other.example/ns#Thing",
            vec![ConstraintSet {
                property: "http://other.example/ns#p".to_string(),
                min_count: Some(1),
                ..ConstraintSet::default()
            }],
        );
        let text = doc.emit();
        assert!(text.contains("sh:targetClass <http://other.example/ns#Thing> ;"));
        assert!(text.contains("sh:path <http://other.example/ns#p>"));
        let parsed = ShapeDocument::parse(&text).unwrap();
        assert_eq!(parsed.emit(), text);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(ShapeDocument::parse("@prefix sh: <http://x> ").is_err());
        assert!(ShapeDocument::parse("ex:A a sh:NodeShape .").is_err());
        assert!(ShapeDocument::parse("<http://a> a <http://www.w3.org/ns/shacl#NodeShape> ; <http://www.w3.org/ns/shacl#targetClass> <http://c> junk").is_err());
    }
}
