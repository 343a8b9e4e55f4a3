//! Recursive-descent parser for the SPARQL subset.

use super::{CmpOp, FilterExpr, GraphPattern, PatTerm, Projection, Query, TriplePattern};
use crate::model::Term;
use crate::ntriples::escape_literal;
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";

/// Prefixes available without declaration. `db`/`ex` are the example-data
/// namespaces used by the bundled datasets and query logs.
fn default_prefixes() -> HashMap<String, String> {
    [
        ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
        ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
        ("xsd", "http://www.w3.org/2001/XMLSchema#"),
        ("db", "http://example.org/db/"),
        ("ex", "http://example.org/"),
    ]
    .into_iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {reason} (near {near:?})")]
    Syntax { offset: usize, reason: String, near: String },
    #[error("unsupported feature at offset {offset}: {feature} (near {near:?})")]
    Unsupported { offset: usize, feature: String, near: String },
    #[error("filter variable ?{var} does not occur in any triple pattern")]
    UnboundFilterVar { var: String },
    #[error("projected variable ?{var} does not occur in every UNION branch")]
    UnboundProjection { var: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Keyword(String), // uppercase
    Var(String),
    Iri(String),
    PName(String, String),
    Literal(String), // full lexical with quotes/suffix
    Number(String),
    A,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Dot,
    Star,
    Cmp(CmpOp),
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, reason: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            reason: reason.into(),
            near: self.near(),
        }
    }

    fn near(&self) -> String {
        let end = (self.pos + 16).min(self.src.len());
        let start = self.pos.min(self.src.len());
        self.src[start..end].to_string()
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn next(&mut self) -> Result<Option<(usize, Tok)>, ParseError> {
        self.skip_ws();
        if self.pos >= self.bytes.len() {
            return Ok(None);
        }
        let start = self.pos;
        let tok = match self.bytes[self.pos] {
            b'{' => {
                self.pos += 1;
                Tok::LBrace
            }
            b'}' => {
                self.pos += 1;
                Tok::RBrace
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'.' => {
                self.pos += 1;
                Tok::Dot
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'<' => {
                if self.bytes.get(self.pos + 1) == Some(&b'=') {
                    self.pos += 2;
                    Tok::Cmp(CmpOp::Le)
                } else if self
                    .bytes
                    .get(self.pos + 1)
                    .map_or(false, |c| c.is_ascii_whitespace())
                {
                    self.pos += 1;
                    Tok::Cmp(CmpOp::Lt)
                } else {
                    // IRI reference
                    let mut end = self.pos + 1;
                    while end < self.bytes.len() && self.bytes[end] != b'>' {
                        end += 1;
                    }
                    if end >= self.bytes.len() {
                        self.pos += 1;
                        Tok::Cmp(CmpOp::Lt) // lone '<' at end; comparison
                    } else {
                        let text = &self.src[self.pos + 1..end];
                        self.pos = end + 1;
                        Tok::Iri(text.to_string())
                    }
                }
            }
            b'>' => {
                if self.bytes.get(self.pos + 1) == Some(&b'=') {
                    self.pos += 2;
                    Tok::Cmp(CmpOp::Ge)
                } else {
                    self.pos += 1;
                    Tok::Cmp(CmpOp::Gt)
                }
            }
            b'=' => {
                self.pos += 1;
                Tok::Cmp(CmpOp::Eq)
            }
            b'!' => return Err(self.err("operator '!=' is not supported")),
            b'?' | b'$' => {
                self.pos += 1;
                let s = self.ident()?;
                Tok::Var(s)
            }
            b'"' => {
                let lex = self.literal()?;
                Tok::Literal(lex)
            }
            b'-' | b'0'..=b'9' => {
                let s = self.number()?;
                Tok::Number(s)
            }
            c if c.is_ascii_alphabetic() || c == b'_' || c == b':' => {
                let word = self.pname_or_word()?;
                match word {
                    PnameOrWord::Word(w) => {
                        if w == "a" {
                            Tok::A
                        } else {
                            Tok::Keyword(w.to_uppercase())
                        }
                    }
                    PnameOrWord::PName(p, l) => Tok::PName(p, l),
                }
            }
            c => return Err(self.err(format!("unexpected character {:?}", c as char))),
        };
        Ok(Some((start, tok)))
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(self.err("expected identifier"));
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn number(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        if self.bytes[self.pos] == b'-' {
            self.pos += 1;
        }
        let mut saw_digit = false;
        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            if c.is_ascii_digit() {
                saw_digit = true;
                self.pos += 1;
            } else if c == b'.' && self.bytes.get(self.pos + 1).map_or(false, |d| d.is_ascii_digit())
            {
                self.pos += 1;
            } else {
                break;
            }
        }
        if !saw_digit {
            return Err(self.err("expected number"));
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn literal(&mut self) -> Result<String, ParseError> {
        // reuse the N-Triples literal syntax, including @lang/^^<dt>
        debug_assert_eq!(self.bytes[self.pos], b'"');
        self.pos += 1;
        let mut content = String::new();
        loop {
            if self.pos >= self.bytes.len() {
                return Err(self.err("unterminated literal"));
            }
            match self.bytes[self.pos] {
                b'"' => {
                    self.pos += 1;
                    break;
                }
                b'\\' => {
                    self.pos += 1;
                    let esc = *self
                        .bytes
                        .get(self.pos)
                        .ok_or_else(|| self.err("dangling escape"))?;
                    self.pos += 1;
                    match esc {
                        b't' => content.push('\t'),
                        b'n' => content.push('\n'),
                        b'r' => content.push('\r'),
                        b'"' => content.push('"'),
                        b'\\' => content.push('\\'),
                        other => {
                            return Err(self.err(format!("unknown escape \\{}", other as char)))
                        }
                    }
                }
                _ => {
                    let rest = &self.src[self.pos..];
                    let c = rest.chars().next().unwrap();
                    content.push(c);
                    self.pos += c.len_utf8();
                }
            }
        }
        let mut lexical = format!("\"{}\"", escape_literal(&content));
        if self.bytes.get(self.pos) == Some(&b'@') {
            self.pos += 1;
            let mut tag = String::new();
            while self.pos < self.bytes.len() {
                let c = self.bytes[self.pos];
                if c.is_ascii_alphanumeric() || c == b'-' {
                    tag.push(c as char);
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if tag.is_empty() {
                return Err(self.err("empty language tag"));
            }
            lexical.push('@');
            lexical.push_str(&tag);
        } else if self.bytes.get(self.pos) == Some(&b'^') && self.bytes.get(self.pos + 1) == Some(&b'^')
        {
            self.pos += 2;
            if self.bytes.get(self.pos) != Some(&b'<') {
                return Err(self.err("expected <iri> after ^^"));
            }
            let mut end = self.pos + 1;
            while end < self.bytes.len() && self.bytes[end] != b'>' {
                end += 1;
            }
            if end >= self.bytes.len() {
                return Err(self.err("unterminated datatype IRI"));
            }
            lexical.push_str("^^<");
            lexical.push_str(&self.src[self.pos + 1..end]);
            lexical.push('>');
            self.pos = end + 1;
        }
        Ok(lexical)
    }

    fn pname_or_word(&mut self) -> Result<PnameOrWord, ParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            if c.is_ascii_alphanumeric() || c == b'_' || c == b'-' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.bytes.get(self.pos) == Some(&b':') {
            let prefix = self.src[start..self.pos].to_string();
            self.pos += 1;
            let lstart = self.pos;
            while self.pos < self.bytes.len() {
                let c = self.bytes[self.pos];
                if c.is_ascii_alphanumeric() || c == b'_' || c == b'-' || c == b'.' {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            // trailing '.' is a pattern terminator, not part of the local name
            while self.pos > lstart && self.bytes[self.pos - 1] == b'.' {
                self.pos -= 1;
            }
            let local = self.src[lstart..self.pos].to_string();
            Ok(PnameOrWord::PName(prefix, local))
        } else {
            if self.pos == start {
                return Err(self.err("expected name"));
            }
            Ok(PnameOrWord::Word(self.src[start..self.pos].to_string()))
        }
    }
}

enum PnameOrWord {
    Word(String),
    PName(String, String),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    i: usize,
    src_len: usize,
    prefixes: HashMap<String, String>,
}

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "ASK", "CONSTRUCT", "DESCRIBE", "ORDER", "LIMIT", "OFFSET", "DISTINCT", "REDUCED", "GROUP",
    "HAVING", "MINUS", "GRAPH", "SERVICE", "BIND", "VALUES", "EXISTS", "NOT", "COUNT", "SUM",
    "AVG", "REGEX",
];

impl Parser {
    fn offset(&self) -> usize {
        self.toks.get(self.i).map(|(o, _)| *o).unwrap_or(self.src_len)
    }

    fn near(&self) -> String {
        self.toks
            .get(self.i)
            .map(|(_, t)| format!("{:?}", t))
            .unwrap_or_else(|| "end of input".to_string())
    }

    fn err(&self, reason: impl Into<String>) -> ParseError {
        ParseError::Syntax { offset: self.offset(), reason: reason.into(), near: self.near() }
    }

    fn unsupported(&self, feature: impl Into<String>) -> ParseError {
        ParseError::Unsupported { offset: self.offset(), feature: feature.into(), near: self.near() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(_, t)| t)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|(_, t)| t.clone());
        if t.is_some() {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(want) {
            self.i += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {}", what)))
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if let Some(Tok::Keyword(k)) = self.peek() {
            if k == kw {
                self.i += 1;
                return true;
            }
        }
        false
    }

    fn expand(&self, prefix: &str, local: &str) -> Result<Term, ParseError> {
        match self.prefixes.get(prefix) {
            Some(ns) => Ok(Term::iri(format!("{}{}", ns, local))),
            None => Err(ParseError::Syntax {
                offset: self.offset(),
                reason: format!("undeclared prefix {:?}", prefix),
                near: format!("{}:{}", prefix, local),
            }),
        }
    }

    fn parse_query(&mut self) -> Result<Query, ParseError> {
        // PREFIX declarations
        while self.keyword("PREFIX") {
            let (prefix, _local) = match self.bump() {
                Some(Tok::PName(p, l)) if l.is_empty() => (p, l),
                Some(Tok::PName(p, l)) => {
                    return Err(ParseError::Syntax {
                        offset: self.offset(),
                        reason: "prefix declaration must end with ':'".to_string(),
                        near: format!("{}:{}", p, l),
                    })
                }
                _ => return Err(self.err("expected prefix name")),
            };
            let iri = match self.bump() {
                Some(Tok::Iri(i)) => i,
                _ => return Err(self.err("expected <iri> in PREFIX")),
            };
            self.prefixes.insert(prefix, iri);
        }
        if !self.keyword("SELECT") {
            if let Some(Tok::Keyword(k)) = self.peek() {
                if UNSUPPORTED_KEYWORDS.contains(&k.as_str()) {
                    return Err(self.unsupported(format!("{} queries", k)));
                }
            }
            return Err(self.err("expected SELECT"));
        }
        let projection = if self.peek() == Some(&Tok::Star) {
            self.i += 1;
            Projection::All
        } else {
            let mut vars = Vec::new();
            while let Some(Tok::Var(v)) = self.peek() {
                vars.push(v.clone());
                self.i += 1;
            }
            if vars.is_empty() {
                return Err(self.err("expected '*' or variables after SELECT"));
            }
            Projection::Vars(vars)
        };
        if !self.keyword("WHERE") {
            return Err(self.err("expected WHERE"));
        }
        self.expect(&Tok::LBrace, "'{'")?;

        let branches = if self.peek() == Some(&Tok::LBrace) {
            // { branch } UNION { branch } ...
            let mut branches = Vec::new();
            loop {
                self.expect(&Tok::LBrace, "'{'")?;
                branches.push(self.parse_group()?);
                self.expect(&Tok::RBrace, "'}'")?;
                if self.keyword("UNION") {
                    continue;
                }
                break;
            }
            branches
        } else {
            vec![self.parse_group()?]
        };
        self.expect(&Tok::RBrace, "'}'")?;
        if self.i != self.toks.len() {
            if let Some(Tok::Keyword(k)) = self.peek() {
                if UNSUPPORTED_KEYWORDS.contains(&k.as_str()) {
                    return Err(self.unsupported(format!("{} clause", k)));
                }
            }
            return Err(self.err("trailing content after query"));
        }

        let query = Query { projection, branches };
        check_variable_scoping(&query)?;
        Ok(query)
    }

    fn parse_group(&mut self) -> Result<GraphPattern, ParseError> {
        let mut gp = GraphPattern { required: vec![], optional: vec![], filters: vec![] };
        loop {
            match self.peek() {
                Some(Tok::RBrace) | None => break,
                Some(Tok::Keyword(k)) if k == "FILTER" => {
                    self.i += 1;
                    gp.filters.push(self.parse_filter()?);
                    // optional '.' after FILTER
                    if self.peek() == Some(&Tok::Dot) {
                        self.i += 1;
                    }
                }
                Some(Tok::Keyword(k)) if k == "OPTIONAL" => {
                    self.i += 1;
                    self.expect(&Tok::LBrace, "'{' after OPTIONAL")?;
                    let inner = self.parse_group()?;
                    if !inner.optional.is_empty() || !inner.filters.is_empty() {
                        return Err(self.unsupported("nested OPTIONAL or FILTER inside OPTIONAL"));
                    }
                    self.expect(&Tok::RBrace, "'}'")?;
                    gp.optional.extend(inner.required);
                    if self.peek() == Some(&Tok::Dot) {
                        self.i += 1;
                    }
                }
                Some(Tok::Keyword(k)) if UNSUPPORTED_KEYWORDS.contains(&k.as_str()) => {
                    return Err(self.unsupported(format!("{} in group pattern", k)));
                }
                _ => {
                    let s = self.parse_pat_term(PatPos::Subject)?;
                    let p = self.parse_pat_term(PatPos::Property)?;
                    let o = self.parse_pat_term(PatPos::Object)?;
                    gp.required.push(TriplePattern { s, p, o });
                    match self.peek() {
                        Some(Tok::Dot) => {
                            self.i += 1;
                        }
                        Some(Tok::RBrace) | None => {}
                        Some(Tok::Keyword(k))
                            if k == "FILTER" || k == "OPTIONAL" || k == "UNION" => {}
                        _ => return Err(self.err("expected '.' between triple patterns")),
                    }
                }
            }
        }
        if gp.required.is_empty() && gp.optional.is_empty() {
            return Err(self.err("empty graph pattern"));
        }
        Ok(gp)
    }

    fn parse_pat_term(&mut self, pos: PatPos) -> Result<PatTerm, ParseError> {
        let offset = self.offset();
        let near = self.near();
        let term = match self.bump() {
            Some(Tok::Var(v)) => PatTerm::Var(v),
            Some(Tok::Iri(i)) => PatTerm::Const(Term::iri(i)),
            Some(Tok::PName(p, l)) => PatTerm::Const(self.expand(&p, &l)?),
            Some(Tok::A) if pos == PatPos::Property => {
                PatTerm::Const(Term::iri(format!("{}type", RDF_TYPE)))
            }
            Some(Tok::Literal(lex)) => PatTerm::Const(Term::literal_lexical(lex)),
            Some(Tok::Number(n)) => PatTerm::Const(Term::literal(&n)),
            _ => {
                return Err(ParseError::Syntax {
                    offset,
                    reason: format!("expected term in {:?} position", pos),
                    near,
                })
            }
        };
        // property position: variable or IRI only
        if pos == PatPos::Property {
            if let PatTerm::Const(t) = &term {
                if !t.is_iri() {
                    return Err(ParseError::Syntax {
                        offset,
                        reason: "property must be an IRI or variable".to_string(),
                        near,
                    });
                }
            }
        }
        if pos == PatPos::Subject {
            if let PatTerm::Const(t) = &term {
                if !t.is_iri() {
                    return Err(ParseError::Syntax {
                        offset,
                        reason: "literal subject".to_string(),
                        near,
                    });
                }
            }
        }
        Ok(term)
    }

    fn parse_filter(&mut self) -> Result<FilterExpr, ParseError> {
        self.expect(&Tok::LParen, "'(' after FILTER")?;
        let expr = match self.bump() {
            Some(Tok::Var(var)) => {
                let op = match self.bump() {
                    Some(Tok::Cmp(op)) => op,
                    _ => return Err(self.err("expected comparison operator in FILTER")),
                };
                let value = match self.bump() {
                    Some(Tok::Number(n)) => Term::literal(&n),
                    Some(Tok::Literal(lex)) => Term::literal_lexical(lex),
                    Some(Tok::Iri(i)) => Term::iri(i),
                    Some(Tok::PName(p, l)) => self.expand(&p, &l)?,
                    _ => return Err(self.err("expected constant in FILTER comparison")),
                };
                FilterExpr::Compare { var, op, value }
            }
            Some(Tok::Keyword(k)) if k == "ISIRI" || k == "ISURI" => {
                self.expect(&Tok::LParen, "'('")?;
                let var = match self.bump() {
                    Some(Tok::Var(v)) => v,
                    _ => return Err(self.err("expected variable in isIRI()")),
                };
                self.expect(&Tok::RParen, "')'")?;
                FilterExpr::IsIri { var }
            }
            Some(Tok::Keyword(k)) if k == "ISLITERAL" => {
                self.expect(&Tok::LParen, "'('")?;
                let var = match self.bump() {
                    Some(Tok::Var(v)) => v,
                    _ => return Err(self.err("expected variable in isLiteral()")),
                };
                self.expect(&Tok::RParen, "')'")?;
                FilterExpr::IsLiteral { var }
            }
            _ => return Err(self.unsupported("FILTER expression form")),
        };
        self.expect(&Tok::RParen, "')'")?;
        Ok(expr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PatPos {
    Subject,
    Property,
    Object,
}

/// Filter variables must occur in the branch's patterns; projected variables
/// must occur in every branch.
fn check_variable_scoping(query: &Query) -> Result<(), ParseError> {
    for b in &query.branches {
        let vars: BTreeSet<String> =
            b.all_patterns().flat_map(|p| p.vars().map(|s| s.to_string())).collect();
        for f in &b.filters {
            if !vars.contains(f.var()) {
                return Err(ParseError::UnboundFilterVar { var: f.var().to_string() });
            }
        }
        if let Projection::Vars(pvars) = &query.projection {
            for v in pvars {
                if !vars.contains(v) {
                    return Err(ParseError::UnboundProjection { var: v.clone() });
                }
            }
        }
    }
    Ok(())
}

/// Parse a SPARQL query in the supported subset.
pub fn parse_sparql(text: &str) -> Result<Query, ParseError> {
    let mut lexer = Lexer { src: text, bytes: text.as_bytes(), pos: 0 };
    let mut toks = Vec::new();
    while let Some(t) = lexer.next()? {
        toks.push(t);
    }
    let mut parser =
        Parser { toks, i: 0, src_len: text.len(), prefixes: default_prefixes() };
    parser.parse_query()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> PatTerm {
        PatTerm::Const(Term::iri(s))
    }

    #[test]
    fn figure4_query_parses() {
        let q = parse_sparql(
            "SELECT ?name WHERE { ?s rdf:type db:city . ?s db:located db:Germany . ?s db:name ?name . }",
        )
        .unwrap();
        assert_eq!(q.branches.len(), 1);
        let b = &q.branches[0];
        assert_eq!(b.required.len(), 3);
        assert!(b.optional.is_empty() && b.filters.is_empty());
        assert_eq!(
            b.required[0].p,
            iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")
        );
        assert_eq!(b.required[0].o, iri("http://example.org/db/city"));
        assert_eq!(q.projection, Projection::Vars(vec!["name".to_string()]));
    }

    #[test]
    fn numeric_filter() {
        let q = parse_sparql(
            "SELECT * WHERE { ?s db:name ?c . ?s db:revenue ?r . FILTER(?r >= 1000000000) }",
        )
        .unwrap();
        assert_eq!(
            q.branches[0].filters,
            vec![FilterExpr::Compare {
                var: "r".to_string(),
                op: CmpOp::Ge,
                value: Term::literal("1000000000"),
            }]
        );
    }

    #[test]
    fn select_star_all_variable_pattern() {
        let q = parse_sparql("SELECT * WHERE { ?s ?p ?o }").unwrap();
        assert_eq!(q.projection, Projection::All);
        let pat = &q.branches[0].required[0];
        assert_eq!(pat.s, PatTerm::var("s"));
        assert_eq!(pat.p, PatTerm::var("p"));
        assert_eq!(pat.o, PatTerm::var("o"));
    }

    #[test]
    fn a_expands_to_rdf_type() {
        let q = parse_sparql("SELECT * WHERE { ?s a db:city }").unwrap();
        assert_eq!(
            q.branches[0].required[0].p,
            iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")
        );
    }

    #[test]
    fn prefix_declaration_wins() {
        let q = parse_sparql(
            "PREFIX db: <http://other.org/> SELECT * WHERE { ?s db:x ?o }",
        )
        .unwrap();
        assert_eq!(q.branches[0].required[0].p, iri("http://other.org/x"));
    }

    #[test]
    fn optional_parses() {
        let q = parse_sparql(
            "SELECT * WHERE { ?s db:name ?n . OPTIONAL { ?s db:located ?l . } }",
        )
        .unwrap();
        assert_eq!(q.branches[0].optional.len(), 1);
    }

    #[test]
    fn union_parses() {
        let q = parse_sparql(
            "SELECT ?s WHERE { { ?s db:name ?n . } UNION { ?s db:revenue ?r . } }",
        )
        .unwrap();
        assert_eq!(q.branches.len(), 2);
    }

    #[test]
    fn unsupported_features_fail_loudly() {
        for text in [
            "SELECT * WHERE { ?s ?p ?o } LIMIT 10",
            "SELECT DISTINCT ?s WHERE { ?s ?p ?o }",
            "ASK { ?s ?p ?o }",
            "SELECT * WHERE { ?s ?p ?o } ORDER BY ?s",
        ] {
            match parse_sparql(text) {
                Err(ParseError::Unsupported { .. }) => {}
                other => panic!("{:?} should be unsupported, got {:?}", text, other),
            }
        }
    }

    #[test]
    fn filter_var_must_occur() {
        let err =
            parse_sparql("SELECT * WHERE { ?s db:name ?n . FILTER(?x > 5) }").unwrap_err();
        assert_eq!(err, ParseError::UnboundFilterVar { var: "x".to_string() });
    }

    #[test]
    fn projection_must_occur_in_every_branch() {
        let err = parse_sparql(
            "SELECT ?n WHERE { { ?s db:name ?n . } UNION { ?s db:revenue ?r . } }",
        )
        .unwrap_err();
        assert_eq!(err, ParseError::UnboundProjection { var: "n".to_string() });
    }

    #[test]
    fn literal_subject_rejected() {
        assert!(parse_sparql("SELECT * WHERE { \"x\" db:p ?o }").is_err());
    }

    #[test]
    fn literal_property_rejected() {
        assert!(parse_sparql("SELECT * WHERE { ?s \"p\" ?o }").is_err());
    }
}
