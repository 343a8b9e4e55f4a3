//! Core RDF value types: terms, dictionary-encoded ids, triples.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TermKind {
    Iri,
    Literal,
}

/// An RDF term. IRIs carry their text without angle brackets; literals keep
/// their full lexical form including surrounding quotes and any datatype or
/// language suffix (`"x"`, `"x"@en`, `"x"^^<iri>`). Two terms are equal iff
/// kind and lexical form are equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Term {
    pub kind: TermKind,
    pub lexical: String,
}

impl Term {
    pub fn iri(text: impl Into<String>) -> Term {
        Term { kind: TermKind::Iri, lexical: text.into() }
    }

    /// Plain literal from raw (unquoted, unescaped) content.
    pub fn literal(content: &str) -> Term {
        Term { kind: TermKind::Literal, lexical: format!("\"{}\"", content) }
    }

    /// Literal from an already quoted lexical form such as `"x"@en`.
    pub fn literal_lexical(lexical: impl Into<String>) -> Term {
        Term { kind: TermKind::Literal, lexical: lexical.into() }
    }

    pub fn is_iri(&self) -> bool {
        self.kind == TermKind::Iri
    }

    /// The comparable value of a term: the IRI text, or the content between
    /// the outer quotes of a literal (datatype/language suffix stripped).
    pub fn value_str(&self) -> &str {
        match self.kind {
            TermKind::Iri => &self.lexical,
            TermKind::Literal => {
                let s = &self.lexical;
                if let Some(rest) = s.strip_prefix('"') {
                    if let Some(end) = find_closing_quote(rest) {
                        return &rest[..end];
                    }
                }
                s
            }
        }
    }

    pub fn numeric_value(&self) -> Option<f64> {
        let v = self.value_str();
        if v.is_empty() {
            return None;
        }
        v.parse::<f64>().ok().filter(|x| x.is_finite())
    }
}

/// Index of the quote that closes a literal body, skipping escaped quotes.
fn find_closing_quote(rest: &str) -> Option<usize> {
    let bytes = rest.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'"' => return Some(i),
            _ => i += 1,
        }
    }
    None
}

/// Filter-style comparison: numeric when both values parse as numbers,
/// lexical on the value strings otherwise.
pub fn compare_values(a: &Term, b: &Term) -> std::cmp::Ordering {
    match (a.numeric_value(), b.numeric_value()) {
        (Some(x), Some(y)) => x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Equal),
        _ => a.value_str().cmp(b.value_str()),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TermKind::Iri => write!(f, "<{}>", self.lexical),
            TermKind::Literal => write!(f, "{}", self.lexical),
        }
    }
}

/// Dictionary-assigned id. 0 is reserved as "unassigned" and never maps to a
/// term; assigned ids are dense starting at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TermId(pub u64);

impl TermId {
    pub const UNASSIGNED: TermId = TermId(0);

    pub fn is_assigned(&self) -> bool {
        self.0 != 0
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Bidirectional term <-> id mapping. Ids are handed out in first-occurrence
/// order, which makes every scan of the same input reproduce the same ids.
#[derive(Debug, Clone, Default)]
pub struct Dictionary {
    forward: HashMap<Term, TermId>,
    reverse: Vec<Term>, // reverse[i] is the term for id i+1
}

impl PartialEq for Dictionary {
    fn eq(&self, other: &Self) -> bool {
        // reverse fully determines the mapping
        self.reverse == other.reverse
    }
}

impl Eq for Dictionary {}

impl Dictionary {
    pub fn new() -> Dictionary {
        Dictionary::default()
    }

    pub fn len(&self) -> usize {
        self.reverse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reverse.is_empty()
    }

    /// Id for a term, assigning the next dense id on first sight.
    pub fn get_or_insert(&mut self, term: &Term) -> TermId {
        if let Some(id) = self.forward.get(term) {
            return *id;
        }
        let id = TermId(self.reverse.len() as u64 + 1);
        self.forward.insert(term.clone(), id);
        self.reverse.push(term.clone());
        id
    }

    pub fn lookup(&self, term: &Term) -> Option<TermId> {
        self.forward.get(term).copied()
    }

    pub fn term(&self, id: TermId) -> Option<&Term> {
        if id.0 == 0 {
            return None;
        }
        self.reverse.get(id.0 as usize - 1)
    }

    /// Insert a (term, id) pair from a replicated dictionary chunk. Ids must
    /// arrive in order so density is preserved.
    pub fn insert_exact(&mut self, id: TermId, term: Term) -> Result<(), String> {
        let expect = TermId(self.reverse.len() as u64 + 1);
        if id != expect {
            return Err(format!("non-dense dictionary id {} (expected {})", id, expect));
        }
        self.forward.insert(term.clone(), id);
        self.reverse.push(term);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (TermId, &Term)> {
        self.reverse.iter().enumerate().map(|(i, t)| (TermId(i as u64 + 1), t))
    }

    /// Export as `id<TAB>kind<TAB>lexical` lines, ids ascending. Lexicals are
    /// escaped so each record stays on one line.
    pub fn export(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        for (id, term) in self.iter() {
            let kind = match term.kind {
                TermKind::Iri => "iri",
                TermKind::Literal => "literal",
            };
            writeln!(out, "{}\t{}\t{}", id, kind, escape_tsv(&term.lexical))?;
        }
        Ok(())
    }

    pub fn import(input: &str) -> Result<Dictionary, String> {
        let mut dict = Dictionary::new();
        for (lineno, line) in input.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.splitn(3, '\t');
            let (id, kind, lex) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), Some(c)) => (a, b, c),
                _ => return Err(format!("dictionary line {}: expected 3 fields", lineno + 1)),
            };
            let id: u64 = id
                .parse()
                .map_err(|_| format!("dictionary line {}: bad id {:?}", lineno + 1, id))?;
            let kind = match kind {
                "iri" => TermKind::Iri,
                "literal" => TermKind::Literal,
                other => return Err(format!("dictionary line {}: bad kind {:?}", lineno + 1, other)),
            };
            let term = Term { kind, lexical: unescape_tsv(lex) };
            dict.insert_exact(TermId(id), term)
                .map_err(|e| format!("dictionary line {}: {}", lineno + 1, e))?;
        }
        Ok(dict)
    }
}

fn escape_tsv(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape_tsv(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('t') => out.push('\t'),
                Some('n') => out.push('\n'),
                Some('r') => out.push('\r'),
                Some('\\') => out.push('\\'),
                Some(other) => out.push(other),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// A dictionary-encoded triple. Subject and property must be IRIs in the
/// owning dictionary; enforcement happens at parse/insert boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub s: TermId,
    pub p: TermId,
    pub o: TermId,
}

impl Triple {
    pub fn new(s: TermId, p: TermId, o: TermId) -> Triple {
        Triple { s, p, o }
    }
}
