//! SPARQL subset frontend.
//!
//! Queries are modeled as a list of graph patterns (more than one means
//! UNION), each holding required triple patterns, optional triple patterns,
//! and filters. OPTIONAL parses for workload analysis but is rejected for
//! execution.

mod log;
mod parser;
mod render;

pub use log::{parse_query_log, render_query_log};
pub use parser::{parse_sparql, ParseError};
pub use render::render_query;

use crate::model::Term;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PatTerm {
    Var(String),
    Const(Term),
}

impl PatTerm {
    pub fn var(name: &str) -> PatTerm {
        PatTerm::Var(name.to_string())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            PatTerm::Var(v) => Some(v),
            PatTerm::Const(_) => None,
        }
    }

    pub fn as_const(&self) -> Option<&Term> {
        match self {
            PatTerm::Var(_) => None,
            PatTerm::Const(t) => Some(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TriplePattern {
    pub s: PatTerm,
    pub p: PatTerm,
    pub o: PatTerm,
}

impl TriplePattern {
    pub fn vars(&self) -> impl Iterator<Item = &str> {
        [&self.s, &self.p, &self.o].into_iter().filter_map(|t| t.as_var())
    }

    pub fn shares_var(&self, other: &TriplePattern) -> bool {
        let mine: BTreeSet<&str> = self.vars().collect();
        other.vars().any(|v| mine.contains(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    pub fn eval(&self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Eq => ord == Equal,
            CmpOp::Ge => ord != Less,
            CmpOp::Gt => ord == Greater,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FilterExpr {
    Compare { var: String, op: CmpOp, value: Term },
    IsIri { var: String },
    IsLiteral { var: String },
}

impl FilterExpr {
    pub fn var(&self) -> &str {
        match self {
            FilterExpr::Compare { var, .. } => var,
            FilterExpr::IsIri { var } => var,
            FilterExpr::IsLiteral { var } => var,
        }
    }
}

/// One basic graph pattern with its optional patterns and filters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphPattern {
    pub required: Vec<TriplePattern>,
    pub optional: Vec<TriplePattern>,
    pub filters: Vec<FilterExpr>,
}

impl GraphPattern {
    pub fn all_patterns(&self) -> impl Iterator<Item = &TriplePattern> {
        self.required.iter().chain(self.optional.iter())
    }

    /// The join graph over required patterns is connected (single pattern
    /// counts as connected).
    pub fn join_graph_connected(&self) -> bool {
        let n = self.required.len();
        if n <= 1 {
            return n == 1;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if !seen[j] && self.required[i].shares_var(&self.required[j]) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|x| x)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Projection {
    All,
    Vars(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub projection: Projection,
    pub branches: Vec<GraphPattern>,
}

impl Query {
    /// Variables projected by this query, in output column order.
    pub fn output_vars(&self) -> Vec<String> {
        match &self.projection {
            Projection::Vars(vs) => vs.clone(),
            Projection::All => {
                let mut seen = BTreeSet::new();
                let mut out = Vec::new();
                for b in &self.branches {
                    for p in b.all_patterns() {
                        for v in p.vars() {
                            if seen.insert(v.to_string()) {
                                out.push(v.to_string());
                            }
                        }
                    }
                }
                out
            }
        }
    }

    pub fn has_optional(&self) -> bool {
        self.branches.iter().any(|b| !b.optional.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Executable {
    Ok,
    Unsupported(String),
}

/// Queries may be analyzable for the workload but not executable. OPTIONAL
/// and disconnected join graphs (cross products) are rejected here.
pub fn validate_executable(query: &Query) -> Executable {
    if query.has_optional() {
        return Executable::Unsupported("OPTIONAL execution".to_string());
    }
    for (i, b) in query.branches.iter().enumerate() {
        if b.required.is_empty() {
            return Executable::Unsupported(format!("branch {} has no required patterns", i + 1));
        }
        if !b.join_graph_connected() {
            return Executable::Unsupported(format!(
                "branch {} has a disconnected join graph (cross product)",
                i + 1
            ));
        }
    }
    Executable::Ok
}
