//! Streaming N-Triples (RDF 1.1) reader and writer.
//!
//! The reader processes one line at a time, so memory use is bounded by the
//! longest line rather than the file size. Unicode escapes (`\uXXXX`,
//! `\UXXXXXXXX`) are decoded at parse time; the writer re-escapes only
//! control characters, `"` and `\`.

use std::fmt::Write as _;
use std::io::BufRead;

use super::term::{BlankNode, Iri, Literal, Term, Triple};
use super::vocab;

/// A line that violates the N-Triples grammar, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct MalformedLine {
    pub line: u64,
    pub reason: String,
}

impl MalformedLine {
    fn new(line: u64, reason: impl Into<String>) -> Self {
        MalformedLine { line, reason: reason.into() }
    }
}

/// Lazy per-line parser over any buffered byte stream.
pub struct NTriplesParser<R: BufRead> {
    reader: R,
    buf: Vec<u8>,
    line: u64,
    done: bool,
}

impl<R: BufRead> NTriplesParser<R> {
    pub fn new(reader: R) -> Self {
        NTriplesParser { reader, buf: Vec::new(), line: 0, done: false }
    }
}

impl<R: BufRead> Iterator for NTriplesParser<R> {
    type Item = Result<(u64, Triple), MalformedLine>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            self.buf.clear();
            match self.reader.read_until(b'\n', &mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    self.done = true;
                    return Some(Err(MalformedLine::new(self.line + 1, format!("I/O error: {e}"))));
                }
            }
            self.line += 1;
            let text = match std::str::from_utf8(&self.buf) {
                Ok(t) => t,
                Err(_) => return Some(Err(MalformedLine::new(self.line, "invalid UTF-8"))),
            };
            let text = text.trim_end_matches(['\n', '\r']);
            let trimmed = text.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Some(parse_line(text, self.line).map(|t| (self.line, t)));
        }
    }
}

/// Parse a whole stream, returning the (line, triple) pairs or the first error.
pub fn parse_ntriples<R: BufRead>(reader: R) -> NTriplesParser<R> {
    NTriplesParser::new(reader)
}

/// Strict mode: abort on the first malformed line.
pub fn read_strict<R: BufRead>(reader: R) -> Result<Vec<Triple>, MalformedLine> {
    parse_ntriples(reader).map(|item| item.map(|(_, t)| t)).collect()
}

/// Lenient mode: skip malformed lines and record them.
pub fn read_lenient<R: BufRead>(reader: R) -> (Vec<(u64, Triple)>, Vec<MalformedLine>) {
    let mut triples = Vec::new();
    let mut errors = Vec::new();
    for item in parse_ntriples(reader) {
        match item {
            Ok(pair) => triples.push(pair),
            Err(e) => errors.push(e),
        }
    }
    (triples, errors)
}

struct Scanner<'a> {
    rest: &'a str,
    line: u64,
}

impl<'a> Scanner<'a> {
    fn err(&self, reason: impl Into<String>) -> MalformedLine {
        MalformedLine::new(self.line, reason)
    }

    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start_matches([' ', '\t']);
    }

    fn peek(&self) -> Option<char> {
        self.rest.chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.rest.chars().next()?;
        self.rest = &self.rest[c.len_utf8()..];
        Some(c)
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let end = self.rest.find(|c| !pred(c)).unwrap_or(self.rest.len());
        let (head, tail) = self.rest.split_at(end);
        self.rest = tail;
        head
    }

    fn hex_escape(&mut self, digits: usize) -> Result<char, MalformedLine> {
        if self.rest.len() < digits || !self.rest.is_char_boundary(digits) {
            return Err(self.err("truncated unicode escape"));
        }
        let (hex, tail) = self.rest.split_at(digits);
        let code = u32::from_str_radix(hex, 16)
            .map_err(|_| self.err(format!("bad unicode escape \\u{hex}")))?;
        self.rest = tail;
        char::from_u32(code).ok_or_else(|| self.err(format!("invalid code point U+{code:X}")))
    }

    fn parse_iriref(&mut self) -> Result<Iri, MalformedLine> {
        debug_assert_eq!(self.peek(), Some('<'));
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err("unterminated IRI")),
                Some('>') => break,
                Some('\\') => match self.bump() {
                    Some('u') => out.push(self.hex_escape(4)?),
                    Some('U') => out.push(self.hex_escape(8)?),
                    other => {
                        return Err(self.err(format!("invalid IRI escape \\{}", other.unwrap_or(' '))))
                    }
                },
                Some(c) => out.push(c),
            }
        }
        Iri::new(out).map_err(|e| self.err(e.to_string()))
    }

    fn parse_blank(&mut self) -> Result<BlankNode, MalformedLine> {
        debug_assert_eq!(self.peek(), Some('_'));
        self.bump();
        if self.bump() != Some(':') {
            return Err(self.err("blank node must start with _:"));
        }
        let label = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        BlankNode::new(label).map_err(|e| self.err(e.to_string()))
    }

    fn parse_literal(&mut self) -> Result<Literal, MalformedLine> {
        debug_assert_eq!(self.peek(), Some('"'));
        self.bump();
        let mut lexical = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err("unterminated string literal")),
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some('t') => lexical.push('\t'),
                    Some('b') => lexical.push('\u{8}'),
                    Some('n') => lexical.push('\n'),
                    Some('r') => lexical.push('\r'),
                    Some('f') => lexical.push('\u{c}'),
                    Some('"') => lexical.push('"'),
                    Some('\'') => lexical.push('\''),
                    Some('\\') => lexical.push('\\'),
                    Some('u') => lexical.push(self.hex_escape(4)?),
                    Some('U') => lexical.push(self.hex_escape(8)?),
                    other => {
                        return Err(self.err(format!("invalid escape \\{}", other.unwrap_or(' '))))
                    }
                },
                Some(c) => lexical.push(c),
            }
        }
        match self.peek() {
            Some('^') => {
                self.bump();
                if self.bump() != Some('^') {
                    return Err(self.err("datatype marker must be ^^"));
                }
                if self.peek() != Some('<') {
                    return Err(self.err("datatype must be an IRI"));
                }
                let datatype = self.parse_iriref()?;
                if datatype.as_str() == vocab::RDF_LANG_STRING {
                    return Err(self.err("rdf:langString literals need a language tag, not ^^"));
                }
                Ok(Literal::typed(lexical, datatype))
            }
            Some('@') => {
                self.bump();
                let tag = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                Literal::lang_tagged(lexical, tag).map_err(|e| self.err(e.to_string()))
            }
            _ => Ok(Literal::string(lexical)),
        }
    }

    fn parse_subject(&mut self) -> Result<Term, MalformedLine> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.parse_iriref()?)),
            Some('_') => Ok(Term::BlankNode(self.parse_blank()?)),
            Some('"') => Err(self.err("literal is not a valid subject")),
            Some(c) => Err(self.err(format!("unexpected character {c:?} at subject position"))),
            None => Err(self.err("missing subject")),
        }
    }

    fn parse_object(&mut self) -> Result<Term, MalformedLine> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.parse_iriref()?)),
            Some('_') => Ok(Term::BlankNode(self.parse_blank()?)),
            Some('"') => Ok(Term::Literal(self.parse_literal()?)),
            Some('.') | None => Err(self.err("missing object")),
            Some(c) => Err(self.err(format!("unexpected character {c:?} at object position"))),
        }
    }
}

/// Parse one N-Triples statement line (without the trailing newline).
pub fn parse_line(line: &str, line_no: u64) -> Result<Triple, MalformedLine> {
    let mut sc = Scanner { rest: line, line: line_no };
    sc.skip_ws();
    let subject = sc.parse_subject()?;
    sc.skip_ws();
    let predicate = match sc.peek() {
        Some('<') => sc.parse_iriref()?,
        Some('.') | None => return Err(sc.err("missing predicate")),
        Some(c) => return Err(sc.err(format!("predicate must be an IRI, found {c:?}"))),
    };
    sc.skip_ws();
    let object = sc.parse_object()?;
    sc.skip_ws();
    if sc.bump() != Some('.') {
        return Err(sc.err("statement must end with ."));
    }
    sc.skip_ws();
    match sc.peek() {
        None => {}
        Some('#') => {}
        Some(c) => return Err(sc.err(format!("trailing content {c:?} after ."))),
    }
    Triple::new(subject, predicate, object).map_err(|e| sc.err(e.to_string()))
}

fn escape_into(out: &mut String, text: &str) {
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{8}' => out.push_str("\\b"),
            '\u{c}' => out.push_str("\\f"),
            c if (c as u32) < 0x20 || c == '\u{7f}' => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
}

fn term_into(out: &mut String, term: &Term) {
    match term {
        Term::Iri(iri) => {
            out.push('<');
            escape_iri_into(out, iri.as_str());
            out.push('>');
        }
        Term::BlankNode(b) => {
            out.push_str("_:");
            out.push_str(b.label());
        }
        Term::Literal(lit) => {
            out.push('"');
            escape_into(out, lit.lexical());
            out.push('"');
            if let Some(tag) = lit.language() {
                out.push('@');
                out.push_str(tag);
            } else if lit.datatype().as_str() != vocab::XSD_STRING {
                out.push_str("^^<");
                escape_iri_into(out, lit.datatype().as_str());
                out.push('>');
            }
        }
    }
}

fn escape_iri_into(out: &mut String, iri: &str) {
    for c in iri.chars() {
        if (c as u32) < 0x20 || c == '\u{7f}' {
            let _ = write!(out, "\\u{:04X}", c as u32);
        } else {
            out.push(c);
        }
    }
}

/// Serialize one triple as a newline-terminated N-Triples statement.
/// The output re-parses to a triple equal to the input.
pub fn serialize_ntriple(triple: &Triple) -> String {
    let mut out = String::new();
    term_into(&mut out, triple.subject());
    out.push(' ');
    out.push('<');
    escape_iri_into(&mut out, triple.predicate().as_str());
    out.push('>');
    out.push(' ');
    term_into(&mut out, triple.object());
    out.push_str(" .\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn iri(s: &str) -> Term {
        Term::iri(s).unwrap()
    }

    #[test]
    fn minimal_statement() {
        let t = parse_line("<http://a> <http://b> <http://c> .", 1).unwrap();
        assert_eq!(t.subject(), &iri("http://a"));
        assert_eq!(t.predicate().as_str(), "http://b");
        assert_eq!(t.object(), &iri("http://c"));
    }

    #[test]
    fn datatyped_literal() {
        let t = parse_line(
            "<http://s> <http://p> \"1959-03-22\"^^<http://www.w3.org/2001/XMLSchema#date> .",
            1,
        )
        .unwrap();
        let lit = t.object().as_literal().unwrap();
        assert_eq!(lit.lexical(), "1959-03-22");
        assert_eq!(lit.datatype().as_str(), vocab::XSD_DATE);
    }

    #[test]
    fn missing_object_is_reported() {
        let err = parse_line("<http://s> <http://p> .", 1).unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.reason.contains("missing object"), "{}", err.reason);
    }

    #[test]
    fn comments_and_blanks_yield_nothing() {
        let input = "# header\n\n<http://a> <http://b> <http://c> .\n   \n# tail\n";
        let triples = read_strict(Cursor::new(input)).unwrap();
        assert_eq!(triples.len(), 1);
    }

    #[test]
    fn quote_is_escaped_on_output() {
        let t = Triple::new(
            iri("http://s"),
            Iri::new("http://p").unwrap(),
            Term::Literal(Literal::string("say \"hi\"\\")),
        )
        .unwrap();
        let line = serialize_ntriple(&t);
        assert_eq!(line, "<http://s> <http://p> \"say \\\"hi\\\"\\\\\" .\n");
        let back = parse_line(line.trim_end(), 1).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn unicode_escapes_decode() {
        let t = parse_line("<http://s> <http://p> \"caf\\u00E9 \\U0001F600\" .", 1).unwrap();
        assert_eq!(t.object().as_literal().unwrap().lexical(), "café 😀");
    }

    #[test]
    fn lang_tag_round_trips() {
        let line = "<http://s> <http://p> \"ville\"@fr-CA .";
        let t = parse_line(line, 1).unwrap();
        assert_eq!(serialize_ntriple(&t), format!("{line}\n"));
    }

    #[test]
    fn lenient_mode_accounts_for_every_line() {
        let input = "<http://a> <http://b> <http://c> .\nbroken\n<http://a> <http://b> \"x\" .\n";
        let (triples, errors) = read_lenient(Cursor::new(input));
        assert_eq!(triples.len(), 2);
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].line, 2);
    }

    #[test]
    fn trailing_comment_after_dot_is_allowed() {
        assert!(parse_line("<http://a> <http://b> <http://c> . # ok", 1).is_ok());
        assert!(parse_line("<http://a> <http://b> <http://c> . junk", 1).is_err());
    }

    #[test]
    fn control_characters_round_trip() {
        let t = Triple::new(
            iri("http://s"),
            Iri::new("http://p").unwrap(),
            Term::Literal(Literal::string("a\u{1}b\nc")),
        )
        .unwrap();
        let line = serialize_ntriple(&t);
        assert!(line.contains("\\u0001"));
        assert_eq!(parse_line(line.trim_end(), 1).unwrap(), t);
    }
}
