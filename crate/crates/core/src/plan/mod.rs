//! Distributed query planning: cardinality estimation, an initial
//! cost-optimal join tree, leaf localization with binary merge-union chains,
//! home-host assignment, guarded rewrites, and the response-time cost model.

mod distribute;
mod initial;

pub use distribute::{apply_transformations, assign_home_hosts, localize};
pub use initial::initial_plan;

use crate::catalog::{Catalog, FragStats};
use crate::model::{Term, TermId};
use crate::sparql::{CmpOp, Query};
use crate::store::IndexOrder;
use crate::workload::{AnonPattern, AnonTerm};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

pub const PAGE_TUPLES: u64 = 1024;

/// Cost-model constants. Execution coefficients are per tuple; `t_page` is
/// the transfer cost of one 1024-tuple page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub t_page: f64,
    pub c_scan: f64,
    pub c_cmp: f64,
    pub c_out: f64,
    pub c_build: f64,
    pub c_probe: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel { t_page: 10_000.0, c_scan: 1.0, c_cmp: 1.0, c_out: 1.0, c_build: 2.0, c_probe: 1.0 }
    }
}

/// A pattern position in a plan: a variable or a dictionary-resolved
/// constant. Unknown constants resolve to the unassigned id and match
/// nothing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlanTerm {
    Var(String),
    Bound(TermId),
}

impl PlanTerm {
    pub fn as_var(&self) -> Option<&str> {
        match self {
            PlanTerm::Var(v) => Some(v),
            PlanTerm::Bound(_) => None,
        }
    }

    pub fn as_bound(&self) -> Option<TermId> {
        match self {
            PlanTerm::Var(_) => None,
            PlanTerm::Bound(id) => Some(*id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanPattern {
    pub s: PlanTerm,
    pub p: PlanTerm,
    pub o: PlanTerm,
}

impl PlanPattern {
    pub fn id_pattern(&self) -> crate::store::IdPattern {
        crate::store::IdPattern::new(
            self.s.as_bound(),
            self.p.as_bound(),
            self.o.as_bound(),
        )
    }

    /// Variables in subject/property/object order, deduplicated.
    pub fn vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for t in [&self.s, &self.p, &self.o] {
            if let PlanTerm::Var(v) = t {
                if !out.iter().any(|x| x == v) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    /// The anonymized form used for fragment-overlap tests.
    pub fn anon(&self, dict: &crate::model::Dictionary) -> AnonPattern {
        let conv = |t: &PlanTerm| match t {
            PlanTerm::Var(_) => AnonTerm::Omega,
            PlanTerm::Bound(id) => match dict.term(*id) {
                Some(term) => AnonTerm::Const(term.clone()),
                None => AnonTerm::Omega, // unknown id: handled by empty scans
            },
        };
        AnonPattern { s: conv(&self.s), p: conv(&self.p), o: conv(&self.o) }
    }
}

/// Filter carried with its constant value (the value may not exist in the
/// dictionary).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PlanFilter {
    Compare { var: String, op: CmpOp, value: Term },
    IsIri { var: String },
    IsLiteral { var: String },
}

impl PlanFilter {
    pub fn var(&self) -> &str {
        match self {
            PlanFilter::Compare { var, .. } => var,
            PlanFilter::IsIri { var } => var,
            PlanFilter::IsLiteral { var } => var,
        }
    }

    pub fn selectivity(&self) -> f64 {
        match self {
            PlanFilter::Compare { .. } => 1.0 / 3.0,
            _ => 0.5,
        }
    }

    pub fn eval(&self, term: &Term) -> bool {
        match self {
            PlanFilter::Compare { op, value, .. } => {
                if *op == CmpOp::Eq {
                    term == value
                } else {
                    op.eval(crate::model::compare_values(term, value))
                }
            }
            PlanFilter::IsIri { .. } => term.is_iri(),
            PlanFilter::IsLiteral { .. } => !term.is_iri(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OpKind {
    IndexScan {
        pattern: PlanPattern,
        order: IndexOrder,
        /// Relevant fragment ids backing this scan (empty means provably no
        /// matches).
        fragments: Vec<u32>,
    },
    Filter(PlanFilter),
    Project { vars: Vec<String> },
    MergeJoin { join_vars: Vec<String> },
    HashJoin { join_vars: Vec<String> },
    Bmu,
    Sort { vars: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanNode {
    pub kind: OpKind,
    pub children: Vec<PlanNode>,
    /// Output columns in order.
    pub schema: Vec<String>,
    /// Sort order of the output as a variable prefix; empty means unsorted.
    pub order: Vec<String>,
    pub excard: f64,
    /// Home host; set by localization / host assignment.
    pub hh: Option<u32>,
    /// Estimated distinct counts per output variable.
    pub distinct: HashMap<String, f64>,
}

impl PlanNode {
    pub fn home(&self) -> u32 {
        self.hh.expect("home host assigned")
    }

    pub fn iter(&self) -> PlanIter<'_> {
        PlanIter { stack: vec![self] }
    }

    /// Leaves of a BMU chain rooted here, left to right; a non-BMU node is
    /// its own single leaf.
    pub fn bmu_chain_leaves(&self) -> Vec<&PlanNode> {
        match self.kind {
            OpKind::Bmu => {
                let mut out = self.children[0].bmu_chain_leaves();
                out.extend(self.children[1].bmu_chain_leaves());
                out
            }
            _ => vec![self],
        }
    }
}

pub struct PlanIter<'a> {
    stack: Vec<&'a PlanNode>,
}

impl<'a> Iterator for PlanIter<'a> {
    type Item = &'a PlanNode;

    fn next(&mut self) -> Option<&'a PlanNode> {
        let node = self.stack.pop()?;
        for c in &node.children {
            self.stack.push(c);
        }
        Some(node)
    }
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("query not executable: {0}")]
    NotExecutable(String),
    #[error("internal planning error: {0}")]
    Internal(String),
}

// ---------------------------------------------------------------------------
// Cardinality estimation

/// Estimated matches of a pattern within one fragment's statistics.
pub fn estimate_in_fragment(pattern: &PlanPattern, st: &FragStats, share: f64) -> f64 {
    let s = pattern.s.as_bound();
    let p = pattern.p.as_bound();
    let o = pattern.o.as_bound();
    if s.map_or(false, |id| id.0 == 0)
        || p.map_or(false, |id| id.0 == 0)
        || o.map_or(false, |id| id.0 == 0)
    {
        return 0.0; // constant unknown to the dictionary
    }
    let count = st.count as f64 * share;
    if count == 0.0 {
        return 0.0;
    }
    let d_s = (st.distinct_s as f64 * share).max(1.0);
    let d_o = (st.distinct_o as f64 * share).max(1.0);
    let base = match (s, p, o) {
        (None, None, None) => count,
        (None, Some(p), None) => st.property_count(p.0).unwrap_or(0) as f64 * share,
        (None, Some(p), Some(o)) => match st.property_object_count(p.0, o.0) {
            Some(c) => c as f64 * share,
            None => {
                if st.per_property_object.len() < crate::catalog::PO_STATS_CAP {
                    0.0 // table is exhaustive: absence means no matches
                } else {
                    (st.property_count(p.0).unwrap_or(0) as f64 * share / d_o).max(0.0)
                }
            }
        },
        (Some(_), Some(p), None) => st.property_count(p.0).unwrap_or(0) as f64 * share / d_s,
        (Some(_), None, None) => count / d_s,
        (None, None, Some(_)) => count / d_o,
        (Some(_), None, Some(_)) => count / (d_s * d_o),
        (Some(_), Some(p), Some(o)) => {
            let po = match st.property_object_count(p.0, o.0) {
                Some(c) => c as f64 * share,
                None if st.per_property_object.len() < crate::catalog::PO_STATS_CAP => 0.0,
                None => st.property_count(p.0).unwrap_or(0) as f64 * share / d_o,
            };
            (po / d_s).min(1.0)
        }
    };
    base.max(0.0)
}

/// Leaf estimate across a fragment set. The remainder fragment contributes
/// `remainder_share` of its statistics (1/n per host after localization, 1
/// before).
pub fn estimate_leaf(
    pattern: &PlanPattern,
    fragments: &[u32],
    catalog: &Catalog,
    remainder_share: f64,
) -> (f64, HashMap<String, f64>) {
    let mut excard = 0.0;
    let mut d_s = 0.0;
    let mut d_p = 0.0;
    let mut d_o = 0.0;
    for id in fragments {
        if let Some(st) = catalog.stats.get(id) {
            let share = if *id == crate::fragment::REMAINDER_ID { remainder_share } else { 1.0 };
            excard += estimate_in_fragment(pattern, st, share);
            d_s += st.distinct_s as f64 * share;
            d_p += st.distinct_p as f64 * share;
            d_o += st.distinct_o as f64 * share;
        }
    }
    let mut distinct = HashMap::new();
    for (term, d) in [(&pattern.s, d_s), (&pattern.p, d_p), (&pattern.o, d_o)] {
        if let PlanTerm::Var(v) = term {
            let est = d.max(1.0).min(excard.max(1.0));
            distinct.insert(v.clone(), est);
        }
    }
    (excard, distinct)
}

/// Join estimate under the independence assumption: |L|*|R| divided by the
/// larger distinct count of each join variable.
pub fn estimate_join(
    left_excard: f64,
    right_excard: f64,
    join_vars: &[String],
    left_distinct: &HashMap<String, f64>,
    right_distinct: &HashMap<String, f64>,
) -> f64 {
    let mut out = left_excard * right_excard;
    for v in join_vars {
        let dl = left_distinct.get(v).copied().unwrap_or(1.0).max(1.0);
        let dr = right_distinct.get(v).copied().unwrap_or(1.0).max(1.0);
        out /= dl.max(dr);
    }
    out
}

/// Distinct-count map for a join output.
pub fn join_distinct(
    excard: f64,
    schema: &[String],
    join_vars: &[String],
    left: &HashMap<String, f64>,
    right: &HashMap<String, f64>,
) -> HashMap<String, f64> {
    let mut out = HashMap::new();
    for v in schema {
        let dl = left.get(v).copied();
        let dr = right.get(v).copied();
        let d = if join_vars.contains(v) {
            dl.unwrap_or(f64::MAX).min(dr.unwrap_or(f64::MAX))
        } else {
            dl.or(dr).unwrap_or(1.0)
        };
        out.insert(v.clone(), d.min(excard.max(1.0)).max(1.0));
    }
    out
}

// ---------------------------------------------------------------------------
// Cost model

/// Execution cost of one operator, excluding children and transfers.
pub fn xc(node: &PlanNode, cm: &CostModel) -> f64 {
    let child_sum: f64 = node.children.iter().map(|c| c.excard).sum();
    match &node.kind {
        OpKind::IndexScan { .. } => cm.c_scan * node.excard,
        OpKind::MergeJoin { .. } | OpKind::Bmu => cm.c_cmp * child_sum + cm.c_out * node.excard,
        OpKind::HashJoin { .. } => {
            let (a, b) = (node.children[0].excard, node.children[1].excard);
            let build = a.min(b);
            let probe = a.max(b);
            cm.c_build * build + cm.c_probe * probe + cm.c_out * node.excard
        }
        OpKind::Sort { .. } => {
            let n = node.children[0].excard;
            cm.c_cmp * n * ((n + 1.0).log2().ceil())
        }
        OpKind::Filter(_) | OpKind::Project { .. } => cm.c_out * node.excard,
    }
}

/// Transfer cost for a child feeding its parent: one page per 1024 tuples
/// when home hosts differ, zero otherwise.
pub fn tc(child: &PlanNode, parent: &PlanNode, cm: &CostModel) -> f64 {
    match (child.hh, parent.hh) {
        (Some(a), Some(b)) if a != b => cm.t_page * (child.excard / PAGE_TUPLES as f64).ceil(),
        _ => 0.0,
    }
}

/// Response-time cost: own execution cost plus the slowest child path
/// including its transfer.
pub fn cost(node: &PlanNode, cm: &CostModel) -> f64 {
    let children_max = node
        .children
        .iter()
        .map(|c| tc(c, node, cm) + cost(c, cm))
        .fold(0.0, f64::max);
    xc(node, cm) + children_max
}

// ---------------------------------------------------------------------------
// EXPLAIN

fn render_plan_term(t: &PlanTerm, catalog: &Catalog) -> String {
    match t {
        PlanTerm::Var(v) => format!("?{}", v),
        PlanTerm::Bound(id) => match catalog.dictionary.term(*id) {
            Some(term) => term.to_string(),
            None => format!("#{}", id.0),
        },
    }
}

fn op_label(node: &PlanNode, catalog: &Catalog) -> String {
    match &node.kind {
        OpKind::IndexScan { pattern, order, fragments } => {
            let frags: Vec<String> = fragments.iter().map(|f| f.to_string()).collect();
            format!(
                "IndexScan {} ({}, {}, {}) fragments=[{}]",
                order.name(),
                render_plan_term(&pattern.s, catalog),
                render_plan_term(&pattern.p, catalog),
                render_plan_term(&pattern.o, catalog),
                frags.join(",")
            )
        }
        OpKind::Filter(f) => match f {
            PlanFilter::Compare { var, op, value } => {
                format!("Filter ?{} {} {}", var, op.symbol(), value)
            }
            PlanFilter::IsIri { var } => format!("Filter isIRI(?{})", var),
            PlanFilter::IsLiteral { var } => format!("Filter isLiteral(?{})", var),
        },
        OpKind::Project { vars } => {
            let vs: Vec<String> = vars.iter().map(|v| format!("?{}", v)).collect();
            format!("Project [{}]", vs.join(" "))
        }
        OpKind::MergeJoin { join_vars } => {
            let vs: Vec<String> = join_vars.iter().map(|v| format!("?{}", v)).collect();
            format!("MergeJoin [{}]", vs.join(" "))
        }
        OpKind::HashJoin { join_vars } => {
            let vs: Vec<String> = join_vars.iter().map(|v| format!("?{}", v)).collect();
            format!("HashJoin [{}]", vs.join(" "))
        }
        OpKind::Bmu => "BMU".to_string(),
        OpKind::Sort { vars } => {
            let vs: Vec<String> = vars.iter().map(|v| format!("?{}", v)).collect();
            format!("Sort [{}]", vs.join(" "))
        }
    }
}

fn explain_into(node: &PlanNode, catalog: &Catalog, cm: &CostModel, depth: usize, out: &mut String) {
    let indent = "  ".repeat(depth);
    out.push_str(&format!(
        "{}{} [hh={} excard={} xc={}]\n",
        indent,
        op_label(node, catalog),
        node.hh.map(|h| h.to_string()).unwrap_or_else(|| "?".to_string()),
        node.excard.round() as u64,
        xc(node, cm).round() as u64,
    ));
    for c in &node.children {
        explain_into(c, catalog, cm, depth + 1, out);
    }
}

/// Stable text rendering: one op per line, two spaces per depth.
pub fn explain(plan: &PlanNode, catalog: &Catalog) -> String {
    let mut out = String::new();
    explain_into(plan, catalog, &catalog.cost_model, 0, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Full pipeline

/// Plan a query end to end against a catalog.
pub fn plan_query(query: &Query, catalog: &Catalog) -> Result<PlanNode, PlanError> {
    match crate::sparql::validate_executable(query) {
        crate::sparql::Executable::Ok => {}
        crate::sparql::Executable::Unsupported(reason) => {
            return Err(PlanError::NotExecutable(reason))
        }
    }
    let plan = initial_plan(query, catalog)?;
    let plan = localize(plan, catalog);
    let plan = assign_home_hosts(plan, catalog, &catalog.cost_model);
    let plan = apply_transformations(plan, catalog, &catalog.cost_model);
    Ok(plan)
}
