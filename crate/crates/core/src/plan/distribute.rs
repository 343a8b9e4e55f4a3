//! Distribution passes over the initial plan: replace leaves with per-host
//! scans merged by BMU chains, assign home hosts bottom-up against every
//! candidate root host, and apply cost-guarded rewrites.

use super::initial::bmu_chain;
use super::{
    cost, estimate_join, estimate_leaf, join_distinct, tc, CostModel, OpKind, PlanNode,
};
use crate::catalog::Catalog;
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// Localization

/// Replace each leaf scan by host-pinned scans over the owning hosts'
/// fragments, combining multi-host scans with a left-deep BMU chain.
/// Filters directly above a leaf follow the scan to each host.
pub fn localize(plan: PlanNode, catalog: &Catalog) -> PlanNode {
    let n_hosts = catalog.host_count().max(1);
    let node = localize_rec(plan, catalog, n_hosts);
    reannotate(node)
}

fn localize_rec(mut node: PlanNode, catalog: &Catalog, n_hosts: u32) -> PlanNode {
    node.children = node
        .children
        .into_iter()
        .map(|c| localize_rec(c, catalog, n_hosts))
        .collect();
    match &node.kind {
        OpKind::IndexScan { .. } => expand_scan(node, catalog, n_hosts),
        OpKind::Filter(_) => {
            let filter = match &node.kind {
                OpKind::Filter(f) => f.clone(),
                _ => unreachable!(),
            };
            let child = node.children.pop().unwrap();
            if matches!(child.kind, OpKind::Bmu) {
                // push the filter below the merge so it runs where the data is
                push_filter_into_chain(child, &filter)
            } else {
                super::initial::wrap_filter(child, filter)
            }
        }
        _ => node,
    }
}

fn push_filter_into_chain(chain: PlanNode, filter: &super::PlanFilter) -> PlanNode {
    match chain.kind {
        OpKind::Bmu => {
            let mut parts = Vec::new();
            for c in chain.children {
                parts.push(push_filter_into_chain(c, filter));
            }
            bmu_chain(parts)
        }
        _ => super::initial::wrap_filter(chain, filter.clone()),
    }
}

fn expand_scan(node: PlanNode, catalog: &Catalog, n_hosts: u32) -> PlanNode {
    let (pattern, order, fragments) = match &node.kind {
        OpKind::IndexScan { pattern, order, fragments } => {
            (pattern.clone(), *order, fragments.clone())
        }
        _ => unreachable!(),
    };
    let mut by_host: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for f in &fragments {
        for h in catalog.hosts_of_fragment(*f) {
            by_host.entry(h).or_default().push(*f);
        }
    }
    if by_host.is_empty() {
        // provably empty: a single pinned scan over no fragments
        let mut leaf = node;
        leaf.excard = 0.0;
        leaf.hh = Some(0);
        return leaf;
    }
    let share = 1.0 / n_hosts as f64;
    let mut scans = Vec::new();
    for (host, frags) in by_host {
        let (excard, distinct) = estimate_leaf(&pattern, &frags, catalog, share);
        scans.push(PlanNode {
            kind: OpKind::IndexScan { pattern: pattern.clone(), order, fragments: frags },
            children: vec![],
            schema: node.schema.clone(),
            order: node.order.clone(),
            excard,
            hh: Some(host),
            distinct,
        });
    }
    bmu_chain(scans)
}

/// Recompute cardinality annotations bottom-up after structural changes.
fn reannotate(mut node: PlanNode) -> PlanNode {
    node.children = node.children.into_iter().map(reannotate).collect();
    match &node.kind {
        OpKind::IndexScan { .. } => {}
        OpKind::Filter(f) => {
            let child = &node.children[0];
            node.excard = child.excard * f.selectivity();
            node.distinct = child
                .distinct
                .iter()
                .map(|(k, v)| (k.clone(), v.min(node.excard.max(1.0))))
                .collect();
        }
        OpKind::Project { vars } => {
            let child = &node.children[0];
            node.excard = child.excard;
            node.distinct = vars
                .iter()
                .filter_map(|v| child.distinct.get(v).map(|d| (v.clone(), *d)))
                .collect();
        }
        OpKind::Sort { .. } => {
            node.excard = node.children[0].excard;
            node.distinct = node.children[0].distinct.clone();
        }
        OpKind::Bmu => {
            let excard: f64 = node.children.iter().map(|c| c.excard).sum();
            node.excard = excard;
            let mut distinct = std::collections::HashMap::new();
            for v in &node.schema {
                let d: f64 = node
                    .children
                    .iter()
                    .map(|c| c.distinct.get(v).copied().unwrap_or(1.0))
                    .sum();
                distinct.insert(v.clone(), d.min(excard.max(1.0)));
            }
            node.distinct = distinct;
        }
        OpKind::MergeJoin { join_vars } | OpKind::HashJoin { join_vars } => {
            let (l, r) = (&node.children[0], &node.children[1]);
            node.excard = estimate_join(l.excard, r.excard, join_vars, &l.distinct, &r.distinct);
            node.distinct =
                join_distinct(node.excard, &node.schema, join_vars, &l.distinct, &r.distinct);
        }
    }
    node
}

// ---------------------------------------------------------------------------
// Home-host assignment

/// Bottom-up host assignment, trying every host as the candidate root and
/// keeping the cheapest plan (ties resolve to the lowest host id). BMU
/// chains and the parent of the topmost BMU receive one common host.
pub fn assign_home_hosts(plan: PlanNode, catalog: &Catalog, cm: &CostModel) -> PlanNode {
    let hosts: Vec<u32> = catalog.hosts.iter().map(|h| h.id).collect();
    let mut best: Option<(f64, PlanNode)> = None;
    for &r in hosts.iter() {
        let mut candidate = plan.clone();
        assign_rec(&mut candidate, r, cm);
        let c = cost(&candidate, cm);
        if best.as_ref().map_or(true, |(bc, _)| c < *bc) {
            best = Some((c, candidate));
        }
    }
    best.map(|(_, p)| p).unwrap_or(plan)
}

fn assign_rec(node: &mut PlanNode, root_candidate: u32, cm: &CostModel) {
    match node.kind {
        OpKind::IndexScan { .. } => {
            debug_assert!(node.hh.is_some(), "scans are pinned during localization");
        }
        OpKind::Bmu => {
            // a chain without a non-BMU parent (plan root): choose the common
            // host here
            assign_chain_leaves(node, root_candidate, cm);
            let mut candidates = chain_leaf_hosts(node);
            candidates.push(root_candidate);
            candidates.sort_unstable();
            candidates.dedup();
            let mut best: Option<(f64, u32)> = None;
            for h in candidates {
                set_chain_host(node, h);
                let c = cost(node, cm);
                if best.map_or(true, |(bc, _)| c < bc) {
                    best = Some((c, h));
                }
            }
            set_chain_host(node, best.expect("at least one candidate").1);
        }
        _ => {
            let mut candidates: Vec<u32> = vec![root_candidate];
            for child in &mut node.children {
                if matches!(child.kind, OpKind::Bmu) {
                    assign_chain_leaves(child, root_candidate, cm);
                    candidates.extend(chain_leaf_hosts(child));
                } else {
                    assign_rec(child, root_candidate, cm);
                    candidates.push(child.home());
                }
            }
            candidates.sort_unstable();
            candidates.dedup();
            let mut best: Option<(f64, u32)> = None;
            for h in candidates {
                set_node_and_chains(node, h);
                let c = cost(node, cm);
                if best.map_or(true, |(bc, _)| c < bc) {
                    best = Some((c, h));
                }
            }
            set_node_and_chains(node, best.expect("at least one candidate").1);
        }
    }
}

fn assign_chain_leaves(chain: &mut PlanNode, root_candidate: u32, cm: &CostModel) {
    for child in &mut chain.children {
        if matches!(child.kind, OpKind::Bmu) {
            assign_chain_leaves(child, root_candidate, cm);
        } else {
            assign_rec(child, root_candidate, cm);
        }
    }
}

fn chain_leaf_hosts(chain: &PlanNode) -> Vec<u32> {
    chain.bmu_chain_leaves().iter().filter_map(|n| n.hh).collect()
}

fn set_node_and_chains(node: &mut PlanNode, host: u32) {
    node.hh = Some(host);
    for child in &mut node.children {
        if matches!(child.kind, OpKind::Bmu) {
            set_chain_host(child, host);
        }
    }
}

fn set_chain_host(bmu: &mut PlanNode, host: u32) {
    bmu.hh = Some(host);
    for child in &mut bmu.children {
        if matches!(child.kind, OpKind::Bmu) {
            set_chain_host(child, host);
        }
    }
}

// ---------------------------------------------------------------------------
// Transformations

/// Cost-guarded rewrites: joins over BMU chains become per-host partial
/// joins recombined by a BMU chain, and hash joins convert to merge joins
/// when adding sorts still lowers cost. Rewrites that do not strictly lower
/// cost are discarded.
pub fn apply_transformations(plan: PlanNode, catalog: &Catalog, cm: &CostModel) -> PlanNode {
    let mut current = plan;
    for _ in 0..3 {
        let (next, changed) = rewrite_rec(current.clone(), None, cm);
        if !changed {
            return current;
        }
        current = reannotate_preserving_hosts(next);
    }
    let _ = catalog;
    current
}

fn reannotate_preserving_hosts(node: PlanNode) -> PlanNode {
    // reannotate() rebuilds excards but keeps hh fields untouched
    reannotate(node)
}

fn rewrite_rec(mut node: PlanNode, parent_hh: Option<u32>, cm: &CostModel) -> (PlanNode, bool) {
    let own_hh = node.hh;
    let mut changed = false;
    node.children = node
        .children
        .into_iter()
        .map(|c| {
            let (c2, ch) = rewrite_rec(c, own_hh, cm);
            changed |= ch;
            c2
        })
        .collect();
    if let Some(better) = try_partial_join_rewrite(&node, parent_hh, cm) {
        return (better, true);
    }
    if let Some(better) = try_hash_to_merge(&node, parent_hh, cm) {
        return (better, true);
    }
    (node, changed)
}

/// A join with a BMU-chain input becomes a BMU chain of per-pair partial
/// joins, each homed at its left part's host.
fn try_partial_join_rewrite(
    node: &PlanNode,
    parent_hh: Option<u32>,
    cm: &CostModel,
) -> Option<PlanNode> {
    let join_vars = match &node.kind {
        OpKind::MergeJoin { join_vars } | OpKind::HashJoin { join_vars } => join_vars.clone(),
        _ => return None,
    };
    let left_parts = node.children[0].bmu_chain_leaves();
    let right_parts = node.children[1].bmu_chain_leaves();
    if left_parts.len() == 1 && right_parts.len() == 1 {
        return None;
    }
    let mut partials = Vec::new();
    for a in &left_parts {
        for b in &right_parts {
            let excard = estimate_join(a.excard, b.excard, &join_vars, &a.distinct, &b.distinct);
            if excard == 0.0 {
                continue;
            }
            let distinct = join_distinct(excard, &node.schema, &join_vars, &a.distinct, &b.distinct);
            partials.push(PlanNode {
                kind: node.kind.clone(),
                children: vec![(*a).clone(), (*b).clone()],
                schema: node.schema.clone(),
                order: node.order.clone(),
                excard,
                hh: a.hh, // partial join runs where its left part lives
                distinct,
            });
        }
    }
    if partials.is_empty() {
        return None;
    }
    let mut chain = bmu_chain(partials);
    // recombination site: the right side's host when it is a single part,
    // otherwise wherever the original join ran
    let recombine_at = if right_parts.len() == 1 { right_parts[0].hh } else { node.hh };
    set_chain_host_shallow(&mut chain, recombine_at);
    let old = cost(node, cm) + edge_tc(node, parent_hh, cm);
    let new = cost(&chain, cm) + edge_tc(&chain, parent_hh, cm);
    if new < old {
        Some(chain)
    } else {
        None
    }
}

fn set_chain_host_shallow(node: &mut PlanNode, host: Option<u32>) {
    if matches!(node.kind, OpKind::Bmu) {
        node.hh = host;
        for c in &mut node.children {
            set_chain_host_shallow(c, host);
        }
    }
}

/// Hash join to merge join when sorting the inputs still wins.
fn try_hash_to_merge(node: &PlanNode, parent_hh: Option<u32>, cm: &CostModel) -> Option<PlanNode> {
    let join_vars = match &node.kind {
        OpKind::HashJoin { join_vars } => join_vars.clone(),
        _ => return None,
    };
    let key = join_vars.first()?.clone();
    let mut reordered = vec![key.clone()];
    reordered.extend(join_vars.iter().filter(|v| **v != key).cloned());
    let sorted_child = |c: &PlanNode| -> PlanNode {
        if c.order.first() == Some(&key) {
            c.clone()
        } else {
            PlanNode {
                kind: OpKind::Sort { vars: vec![key.clone()] },
                schema: c.schema.clone(),
                order: vec![key.clone()],
                excard: c.excard,
                hh: c.hh,
                distinct: c.distinct.clone(),
                children: vec![c.clone()],
            }
        }
    };
    let l = sorted_child(&node.children[0]);
    let r = sorted_child(&node.children[1]);
    let merged = PlanNode {
        kind: OpKind::MergeJoin { join_vars: reordered },
        schema: node.schema.clone(),
        order: vec![key],
        excard: node.excard,
        hh: node.hh,
        distinct: node.distinct.clone(),
        children: vec![l, r],
    };
    let old = cost(node, cm) + edge_tc(node, parent_hh, cm);
    let new = cost(&merged, cm) + edge_tc(&merged, parent_hh, cm);
    if new < old {
        Some(merged)
    } else {
        None
    }
}

fn edge_tc(node: &PlanNode, parent_hh: Option<u32>, cm: &CostModel) -> f64 {
    match (node.hh, parent_hh) {
        (Some(a), Some(b)) if a != b => {
            cm.t_page * (node.excard / super::PAGE_TUPLES as f64).ceil()
        }
        _ => 0.0,
    }
}
