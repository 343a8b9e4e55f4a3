//! Query-log file format: queries separated by a line containing only `###`,
//! each entry optionally starting with a `#x N` multiplicity line (default 1).

use super::{parse_sparql, render_query, ParseError, Query};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("entry {entry}: {source}")]
    Parse { entry: usize, source: ParseError },
    #[error("entry {entry}: bad multiplicity line {line:?}")]
    BadMultiplicity { entry: usize, line: String },
}

pub fn parse_query_log(text: &str) -> Result<Vec<(Query, u64)>, LogError> {
    let mut out = Vec::new();
    for (idx, chunk) in text.split("\n###").enumerate() {
        // the first chunk may itself start with a bare "###" line
        let chunk = chunk.strip_prefix("###").unwrap_or(chunk);
        let mut mult = 1u64;
        let mut body = String::new();
        for line in chunk.lines() {
            let trimmed = line.trim();
            if body.trim().is_empty() && trimmed.starts_with("#x") {
                let n = trimmed[2..].trim();
                mult = n.parse().map_err(|_| LogError::BadMultiplicity {
                    entry: idx + 1,
                    line: line.to_string(),
                })?;
                continue;
            }
            body.push_str(line);
            body.push('\n');
        }
        if body.trim().is_empty() {
            continue;
        }
        let query = parse_sparql(&body).map_err(|e| LogError::Parse { entry: idx + 1, source: e })?;
        out.push((query, mult.max(1)));
    }
    Ok(out)
}

pub fn render_query_log(entries: &[(Query, u64)]) -> String {
    let mut out = String::new();
    for (i, (q, mult)) in entries.iter().enumerate() {
        if i > 0 {
            out.push_str("###\n");
        }
        if *mult != 1 {
            out.push_str(&format!("#x {}\n", mult));
        }
        out.push_str(&render_query(q));
        out.push('\n');
    }
    out
}
