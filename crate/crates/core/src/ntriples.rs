//! Line-oriented N-Triples ingestion and export.
//!
//! Each line is `<subject> <predicate> <object> .` with `#` comments and
//! blank lines skipped. Blank node labels `_:x` are mapped into IRIs under a
//! reserved namespace.

use crate::model::{Dictionary, Term, TermKind, Triple};
use std::io::BufRead;
use thiserror::Error;

/// Namespace that absorbs blank node labels.
pub const BNODE_NS: &str = "urn:bnode:";

#[derive(Debug, Error)]
pub enum NtError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: literal subject")]
    LiteralSubject { line: usize },
    #[error("line {line}: literal property")]
    LiteralProperty { line: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Parse an N-Triples stream, assigning ids through `dict` in line order and
/// subject/property/object order within a line.
pub fn parse_ntriples(input: impl BufRead, dict: &mut Dictionary) -> Result<Vec<Triple>, NtError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if let Some(t) = parse_line(&line, i + 1, dict)? {
            out.push(t);
        }
    }
    Ok(out)
}

pub fn parse_ntriples_str(input: &str, dict: &mut Dictionary) -> Result<Vec<Triple>, NtError> {
    parse_ntriples(input.as_bytes(), dict)
}

/// Parse one line; `None` for blanks and comments.
pub fn parse_line(line: &str, lineno: usize, dict: &mut Dictionary) -> Result<Option<Triple>, NtError> {
    let (terms, _) = parse_term_line(line, lineno)?;
    Ok(terms.map(|[s, p, o]| Triple {
        s: dict.get_or_insert(&s),
        p: dict.get_or_insert(&p),
        o: dict.get_or_insert(&o),
    }))
}

/// Parse the three terms of a line without touching a dictionary.
pub fn parse_term_line(line: &str, lineno: usize) -> Result<(Option<[Term; 3]>, usize), NtError> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok((None, lineno));
    }
    let mut p = Cursor { s: trimmed.as_bytes(), pos: 0, line: lineno };
    let subject = p.term()?;
    if subject.kind == TermKind::Literal {
        return Err(NtError::LiteralSubject { line: lineno });
    }
    p.skip_ws();
    let property = p.term()?;
    if property.kind == TermKind::Literal {
        return Err(NtError::LiteralProperty { line: lineno });
    }
    p.skip_ws();
    let object = p.term()?;
    p.skip_ws();
    p.expect(b'.')?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.err("trailing content after '.'"));
    }
    Ok((Some([subject, property, object]), lineno))
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, reason: impl Into<String>) -> NtError {
        NtError::Syntax { line: self.line, reason: reason.into() }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.s.len()
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ') | Some(b'\t')) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, b: u8) -> Result<(), NtError> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {:?}", b as char)))
        }
    }

    fn term(&mut self) -> Result<Term, NtError> {
        match self.peek() {
            Some(b'<') => self.iri(),
            Some(b'"') => self.literal(),
            Some(b'_') => self.bnode(),
            Some(c) => Err(self.err(format!("unexpected {:?} at start of term", c as char))),
            None => Err(self.err("unexpected end of line")),
        }
    }

    fn iri(&mut self) -> Result<Term, NtError> {
        self.expect(b'<')?;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == b'>' {
                let text = std::str::from_utf8(&self.s[start..self.pos])
                    .map_err(|_| self.err("invalid utf-8 in IRI"))?;
                if text.is_empty() {
                    return Err(self.err("empty IRI"));
                }
                self.pos += 1;
                return Ok(Term::iri(text));
            }
            self.pos += 1;
        }
        Err(self.err("unterminated IRI"))
    }

    fn bnode(&mut self) -> Result<Term, NtError> {
        self.expect(b'_')?;
        self.expect(b':')?;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' || c == b'-' || c == b'.' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(self.err("empty blank node label"));
        }
        let label = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        Ok(Term::iri(format!("{}{}", BNODE_NS, label)))
    }

    fn literal(&mut self) -> Result<Term, NtError> {
        self.expect(b'"')?;
        let mut content = String::new();
        loop {
            match self.peek() {
                Some(b'"') => {
                    self.pos += 1;
                    break;
                }
                Some(b'\\') => {
                    self.pos += 1;
                    let esc = self.peek().ok_or_else(|| self.err("dangling escape"))?;
                    self.pos += 1;
                    match esc {
                        b't' => content.push('\t'),
                        b'n' => content.push('\n'),
                        b'r' => content.push('\r'),
                        b'"' => content.push('"'),
                        b'\\' => content.push('\\'),
                        b'u' | b'U' => {
                            let n = if esc == b'u' { 4 } else { 8 };
                            if self.pos + n > self.s.len() {
                                return Err(self.err("truncated unicode escape"));
                            }
                            let hex = std::str::from_utf8(&self.s[self.pos..self.pos + n])
                                .map_err(|_| self.err("bad unicode escape"))?;
                            let cp = u32::from_str_radix(hex, 16)
                                .map_err(|_| self.err("bad unicode escape"))?;
                            content.push(
                                char::from_u32(cp).ok_or_else(|| self.err("invalid code point"))?,
                            );
                            self.pos += n;
                        }
                        other => {
                            return Err(self.err(format!("unknown escape \\{}", other as char)))
                        }
                    }
                }
                Some(_) => {
                    // consume one utf-8 character
                    let rest = std::str::from_utf8(&self.s[self.pos..])
                        .map_err(|_| self.err("invalid utf-8 in literal"))?;
                    let c = rest.chars().next().unwrap();
                    content.push(c);
                    self.pos += c.len_utf8();
                }
                None => return Err(self.err("unterminated literal")),
            }
        }
        // optional @lang or ^^<iri> suffix
        let mut lexical = format!("\"{}\"", escape_literal(&content));
        match self.peek() {
            Some(b'@') => {
                self.pos += 1;
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == b'-' {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                if self.pos == start {
                    return Err(self.err("empty language tag"));
                }
                lexical.push('@');
                lexical.push_str(std::str::from_utf8(&self.s[start..self.pos]).unwrap());
            }
            Some(b'^') => {
                self.pos += 1;
                self.expect(b'^')?;
                let dt = self.iri()?;
                lexical.push_str("^^");
                lexical.push('<');
                lexical.push_str(&dt.lexical);
                lexical.push('>');
            }
            _ => {}
        }
        Ok(Term::literal_lexical(lexical))
    }
}

/// Canonical escaping used inside stored literal lexicals and on export.
pub fn escape_literal(content: &str) -> String {
    let mut out = String::with_capacity(content.len());
    for c in content.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

/// Render one triple as an N-Triples line (no trailing newline).
pub fn format_triple(t: &Triple, dict: &Dictionary) -> String {
    let term = |id| dict.term(id).map(|t| t.to_string()).unwrap_or_else(|| "<?>".into());
    format!("{} {} {} .", term(t.s), term(t.p), term(t.o))
}

pub fn export_ntriples(
    triples: impl Iterator<Item = Triple>,
    dict: &Dictionary,
    out: &mut impl std::io::Write,
) -> std::io::Result<()> {
    for t in triples {
        writeln!(out, "{}", format_triple(&t, dict))?;
    }
    Ok(())
}
