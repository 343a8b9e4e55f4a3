//! Initial host-agnostic plan: dynamic programming over connected pattern
//! subsets for small queries, greedy smallest-intermediate-first beyond.

use super::{
    cost, estimate_join, estimate_leaf, join_distinct, CostModel, OpKind, PlanError, PlanFilter,
    PlanNode, PlanPattern, PlanTerm,
};
use crate::catalog::Catalog;
use crate::fragment::overlaps;
use crate::sparql::{FilterExpr, GraphPattern, PatTerm, Query};
use crate::store::{Component, IndexOrder, ALL_ORDERS};
use std::collections::{BTreeMap, BTreeSet, HashMap};

pub const DP_PATTERN_LIMIT: usize = 12;

fn to_plan_term(t: &PatTerm, catalog: &Catalog) -> PlanTerm {
    match t {
        PatTerm::Var(v) => PlanTerm::Var(v.clone()),
        PatTerm::Const(c) => PlanTerm::Bound(
            catalog.dictionary.lookup(c).unwrap_or(crate::model::TermId::UNASSIGNED),
        ),
    }
}

/// Fragments whose minterms overlap the pattern. Unknown constants make the
/// pattern unsatisfiable against current data: no fragments.
fn relevant_fragments(pattern: &PlanPattern, catalog: &Catalog) -> Vec<u32> {
    for t in [&pattern.s, &pattern.p, &pattern.o] {
        if let PlanTerm::Bound(id) = t {
            if id.0 == 0 {
                return Vec::new();
            }
        }
    }
    let anon = pattern.anon(&catalog.dictionary);
    catalog
        .fragmentation
        .fragments
        .iter()
        .filter(|f| overlaps(&catalog.fragmentation.predicates, &f.minterm, &anon))
        .map(|f| f.id)
        .collect()
}

/// Output columns of a scan through an order: unbound components in the
/// order's component sequence, deduplicated for repeated variables.
fn scan_schema(pattern: &PlanPattern, order: IndexOrder) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for c in order.components() {
        let term = match c {
            Component::Subj => &pattern.s,
            Component::Prop => &pattern.p,
            Component::Obj => &pattern.o,
        };
        if let PlanTerm::Var(v) = term {
            if !out.iter().any(|x| x == v) {
                out.push(v.clone());
            }
        }
    }
    out
}

/// Build one scan leaf with stacked filters; excard estimated from catalog
/// statistics with the remainder counted in full.
fn build_leaf(
    pattern: &PlanPattern,
    order: IndexOrder,
    filters: &[PlanFilter],
    catalog: &Catalog,
) -> PlanNode {
    let fragments = relevant_fragments(pattern, catalog);
    let (excard, distinct) = estimate_leaf(pattern, &fragments, catalog, 1.0);
    let schema = scan_schema(pattern, order);
    let node_order = schema.clone(); // index scans stream fully sorted
    let mut node = PlanNode {
        kind: OpKind::IndexScan { pattern: pattern.clone(), order, fragments },
        children: vec![],
        schema,
        order: node_order,
        excard,
        hh: None,
        distinct,
    };
    for f in filters {
        node = wrap_filter(node, f.clone());
    }
    node
}

pub(super) fn wrap_filter(child: PlanNode, filter: PlanFilter) -> PlanNode {
    let excard = child.excard * filter.selectivity();
    let mut distinct = child.distinct.clone();
    for d in distinct.values_mut() {
        *d = d.min(excard.max(1.0));
    }
    PlanNode {
        schema: child.schema.clone(),
        order: child.order.clone(),
        excard,
        hh: child.hh,
        distinct,
        kind: OpKind::Filter(filter),
        children: vec![child],
    }
}

/// Index orders compatible with the pattern, keeping one per distinct output
/// column order.
fn leaf_orders(pattern: &PlanPattern) -> Vec<IndexOrder> {
    let idp = pattern.id_pattern();
    let mut seen: BTreeSet<Vec<String>> = BTreeSet::new();
    let mut out = Vec::new();
    for order in ALL_ORDERS {
        if !idp.compatible(order) {
            continue;
        }
        let schema = scan_schema(pattern, order);
        if seen.insert(schema) {
            out.push(order);
        }
    }
    out
}

fn shared_vars(a: &PlanNode, b: &PlanNode) -> Vec<String> {
    let set: BTreeSet<&String> = a.schema.iter().collect();
    let mut out: Vec<String> =
        b.schema.iter().filter(|v| set.contains(v)).cloned().collect();
    out.sort();
    out.dedup();
    out
}

/// Join candidates for a (left, right) pair; merge join when both inputs
/// stream in the same leading shared variable, hash join always.
fn join_candidates(left: &PlanNode, right: &PlanNode) -> Vec<PlanNode> {
    let shared = shared_vars(left, right);
    if shared.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let excard = estimate_join(left.excard, right.excard, &shared, &left.distinct, &right.distinct);
    // merge join: both sorted by the same leading shared var
    if let (Some(lk), Some(rk)) = (left.order.first(), right.order.first()) {
        if lk == rk && shared.contains(lk) {
            let mut join_vars = vec![lk.clone()];
            join_vars.extend(shared.iter().filter(|v| *v != lk).cloned());
            let mut schema = left.schema.clone();
            schema.extend(right.schema.iter().filter(|v| !shared.contains(v)).cloned());
            let distinct = join_distinct(excard, &schema, &join_vars, &left.distinct, &right.distinct);
            out.push(PlanNode {
                kind: OpKind::MergeJoin { join_vars },
                children: vec![left.clone(), right.clone()],
                order: left.order.clone(),
                schema,
                excard,
                hh: None,
                distinct,
            });
        }
    }
    // hash join: children normalized to [probe, build] with the smaller
    // estimated side building (ties build right)
    let (probe, build) = if left.excard >= right.excard { (left, right) } else { (right, left) };
    let mut schema = probe.schema.clone();
    schema.extend(build.schema.iter().filter(|v| !shared.contains(v)).cloned());
    let distinct = join_distinct(excard, &schema, &shared, &probe.distinct, &build.distinct);
    out.push(PlanNode {
        kind: OpKind::HashJoin { join_vars: shared },
        children: vec![probe.clone(), build.clone()],
        order: probe.order.clone(),
        schema,
        excard,
        hh: None,
        distinct,
    });
    out
}

type CandidateSet = BTreeMap<Vec<String>, PlanNode>;

fn insert_candidate(set: &mut CandidateSet, node: PlanNode, cm: &CostModel) {
    let key = node.order.clone();
    match set.get(&key) {
        Some(existing) if cost(existing, cm) <= cost(&node, cm) => {}
        _ => {
            set.insert(key, node);
        }
    }
}

fn cheapest(set: &CandidateSet, cm: &CostModel) -> Option<&PlanNode> {
    set.values().min_by(|a, b| {
        cost(a, cm)
            .partial_cmp(&cost(b, cm))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.order.cmp(&b.order))
    })
}

/// Assign each filter to the first pattern (by position) binding its
/// variable.
fn leaf_filters(branch: &GraphPattern) -> Vec<Vec<PlanFilter>> {
    let mut out: Vec<Vec<PlanFilter>> = vec![Vec::new(); branch.required.len()];
    for f in &branch.filters {
        let var = match f {
            FilterExpr::Compare { var, .. } => var,
            FilterExpr::IsIri { var } => var,
            FilterExpr::IsLiteral { var } => var,
        };
        if let Some(idx) = branch
            .required
            .iter()
            .position(|p| p.vars().any(|v| v == var))
        {
            let plan_filter = match f {
                FilterExpr::Compare { var, op, value } => PlanFilter::Compare {
                    var: var.clone(),
                    op: *op,
                    value: value.clone(),
                },
                FilterExpr::IsIri { var } => PlanFilter::IsIri { var: var.clone() },
                FilterExpr::IsLiteral { var } => PlanFilter::IsLiteral { var: var.clone() },
            };
            out[idx].push(plan_filter);
        }
    }
    out
}

fn plan_branch(branch: &GraphPattern, catalog: &Catalog) -> Result<PlanNode, PlanError> {
    let cm = &catalog.cost_model;
    let patterns: Vec<PlanPattern> = branch
        .required
        .iter()
        .map(|p| PlanPattern {
            s: to_plan_term(&p.s, catalog),
            p: to_plan_term(&p.p, catalog),
            o: to_plan_term(&p.o, catalog),
        })
        .collect();
    let filters = leaf_filters(branch);
    let n = patterns.len();
    if n == 0 {
        return Err(PlanError::Internal("branch without required patterns".into()));
    }

    let leaf_candidates: Vec<CandidateSet> = patterns
        .iter()
        .zip(&filters)
        .map(|(pattern, fs)| {
            let mut set = CandidateSet::new();
            for order in leaf_orders(pattern) {
                insert_candidate(&mut set, build_leaf(pattern, order, fs, catalog), cm);
            }
            set
        })
        .collect();

    if n == 1 {
        return cheapest(&leaf_candidates[0], cm)
            .cloned()
            .ok_or_else(|| PlanError::Internal("no leaf candidate".into()));
    }
    if n <= DP_PATTERN_LIMIT {
        plan_dp(&leaf_candidates, cm)
    } else {
        plan_greedy(&leaf_candidates, cm)
    }
}

fn plan_dp(leaves: &[CandidateSet], cm: &CostModel) -> Result<PlanNode, PlanError> {
    let n = leaves.len();
    let full: u32 = (1 << n) - 1;
    let mut table: HashMap<u32, CandidateSet> = HashMap::new();
    for (i, cands) in leaves.iter().enumerate() {
        table.insert(1 << i, cands.clone());
    }
    let mut masks: Vec<u32> = (1..=full).filter(|m| m.count_ones() >= 2).collect();
    masks.sort_by_key(|m| m.count_ones());
    for mask in masks {
        let mut set = CandidateSet::new();
        // enumerate splits; keep the lowest set bit on the left side to halve
        // the enumeration, generating both join orientations explicitly
        let low = mask & mask.wrapping_neg();
        let mut s1 = (mask - 1) & mask;
        while s1 > 0 {
            if s1 & low != 0 {
                let s2 = mask ^ s1;
                if let (Some(a), Some(b)) = (table.get(&s1), table.get(&s2)) {
                    for pl in a.values() {
                        for pr in b.values() {
                            for cand in join_candidates(pl, pr) {
                                insert_candidate(&mut set, cand, cm);
                            }
                            for cand in join_candidates(pr, pl) {
                                insert_candidate(&mut set, cand, cm);
                            }
                        }
                    }
                }
            }
            s1 = (s1 - 1) & mask;
        }
        if !set.is_empty() {
            table.insert(mask, set);
        }
    }
    table
        .get(&full)
        .and_then(|set| cheapest(set, cm))
        .cloned()
        .ok_or_else(|| PlanError::NotExecutable("patterns do not join into one tree".into()))
}

/// Greedy fallback: repeatedly join the connected pair with the smallest
/// estimated intermediate result.
fn plan_greedy(leaves: &[CandidateSet], cm: &CostModel) -> Result<PlanNode, PlanError> {
    let mut forest: Vec<PlanNode> = leaves
        .iter()
        .map(|set| cheapest(set, cm).cloned().expect("leaf candidates"))
        .collect();
    while forest.len() > 1 {
        let mut best: Option<(usize, usize, PlanNode)> = None;
        for i in 0..forest.len() {
            for j in (i + 1)..forest.len() {
                for cand in join_candidates(&forest[i], &forest[j])
                    .into_iter()
                    .chain(join_candidates(&forest[j], &forest[i]))
                {
                    let better = match &best {
                        None => true,
                        Some((_, _, b)) => {
                            cand.excard < b.excard
                                || (cand.excard == b.excard && cost(&cand, cm) < cost(b, cm))
                        }
                    };
                    if better {
                        best = Some((i, j, cand));
                    }
                }
            }
        }
        let (i, j, joined) =
            best.ok_or_else(|| PlanError::NotExecutable("disconnected patterns".into()))?;
        forest.remove(j);
        forest.remove(i);
        forest.push(joined);
    }
    Ok(forest.pop().unwrap())
}

fn wrap_project(child: PlanNode, vars: Vec<String>) -> PlanNode {
    let mut order = Vec::new();
    for v in &child.order {
        if vars.contains(v) {
            order.push(v.clone());
        } else {
            break;
        }
    }
    let distinct = vars
        .iter()
        .filter_map(|v| child.distinct.get(v).map(|d| (v.clone(), *d)))
        .collect();
    PlanNode {
        excard: child.excard,
        hh: child.hh,
        order,
        schema: vars.clone(),
        distinct,
        kind: OpKind::Project { vars },
        children: vec![child],
    }
}

/// Left-deep BMU chain over equal-schema inputs.
pub(super) fn bmu_chain(mut parts: Vec<PlanNode>) -> PlanNode {
    assert!(!parts.is_empty());
    let mut acc = parts.remove(0);
    for next in parts {
        let excard = acc.excard + next.excard;
        let order = if acc.order == next.order { acc.order.clone() } else { Vec::new() };
        let mut distinct = HashMap::new();
        for v in &acc.schema {
            let a = acc.distinct.get(v).copied().unwrap_or(1.0);
            let b = next.distinct.get(v).copied().unwrap_or(1.0);
            distinct.insert(v.clone(), (a + b).min(excard.max(1.0)));
        }
        acc = PlanNode {
            kind: OpKind::Bmu,
            schema: acc.schema.clone(),
            order,
            excard,
            hh: None,
            distinct,
            children: vec![acc, next],
        };
    }
    acc
}

/// The host-agnostic initial plan: per-branch DP trees, projection on top,
/// UNION branches combined by a BMU chain.
pub fn initial_plan(query: &Query, catalog: &Catalog) -> Result<PlanNode, PlanError> {
    let out_vars = query.output_vars();
    let mut branch_plans = Vec::new();
    for branch in &query.branches {
        let plan = plan_branch(branch, catalog)?;
        branch_plans.push(wrap_project(plan, out_vars.clone()));
    }
    Ok(bmu_chain(branch_plans))
}

/// Worked-example catalog with the definitional fragment graph, n = 3.
/// Shared by planner tests.
#[cfg(test)]
pub(crate) fn tests_support_example_catalog() -> Catalog {
    use crate::workload::build_global_query_graph;
    let (store, dict) = crate::datagen::example_dataset();
    let ql = crate::datagen::example_query_log();
    let config =
        crate::fragment::PartitionConfig { theta: 2, fraction: 1.0, seed: 1, predicate_cap: 24 };
    let frag = crate::fragment::partition(&store, &dict, &ql, &config).unwrap();
    let g = build_global_query_graph(&ql, 2);
    let fg = crate::allocate::build_fragment_graph(&g, &frag);
    let hosts: Vec<crate::allocate::HostSpec> = (0..3)
        .map(|id| crate::allocate::HostSpec { id, capacity_bytes: u64::MAX })
        .collect();
    let allocation = crate::allocate::allocate(
        &crate::allocate::FragmentLoad::from_fragmentation(&frag),
        &fg,
        &hosts,
        100,
    )
    .unwrap();
    let stats = crate::catalog::compute_fragment_stats(&store, &dict, &frag);
    Catalog::assemble(
        frag,
        allocation,
        (0..3).map(|i| (i, String::new(), u64::MAX)).collect(),
        CostModel::default(),
        stats,
        dict,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparql::parse_sparql;

    fn example_catalog() -> Catalog {
        tests_support_example_catalog()
    }

    #[test]
    fn single_pattern_single_scan() {
        let catalog = example_catalog();
        let q = parse_sparql("SELECT * WHERE { ?s db:revenue ?r }").unwrap();
        let plan = initial_plan(&q, &catalog).unwrap();
        // Project over a single IndexScan
        assert!(matches!(plan.kind, OpKind::Project { .. }));
        assert!(matches!(plan.children[0].kind, OpKind::IndexScan { .. }));
        assert_eq!(plan.excard, 2000.0);
    }

    #[test]
    fn leaf_cardinality_from_po_stats() {
        let catalog = example_catalog();
        let q = parse_sparql("SELECT * WHERE { ?s rdf:type db:city }").unwrap();
        let plan = initial_plan(&q, &catalog).unwrap();
        assert_eq!(plan.excard, 3000.0);
    }

    #[test]
    fn unknown_constant_yields_empty_leaf() {
        let catalog = example_catalog();
        let q = parse_sparql("SELECT * WHERE { ?s db:revenue \"neverseen\" }").unwrap();
        let plan = initial_plan(&q, &catalog).unwrap();
        assert_eq!(plan.excard, 0.0);
        match &plan.children[0].kind {
            OpKind::IndexScan { fragments, .. } => assert!(fragments.is_empty()),
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn figure4_uses_merge_joins_over_sorted_scans() {
        let catalog = example_catalog();
        let plan = initial_plan(&crate::datagen::figure4_query(), &catalog).unwrap();
        let merges = plan
            .iter()
            .filter(|n| matches!(n.kind, OpKind::MergeJoin { .. }))
            .count();
        assert_eq!(merges, 2, "expected two merge joins:\n{:?}", plan);
        // both type/city and located/Germany scans use POS
        let pos_scans = plan
            .iter()
            .filter(|n| matches!(&n.kind, OpKind::IndexScan { order, .. } if *order == IndexOrder::Pos))
            .count();
        assert!(pos_scans >= 2);
    }

    #[test]
    fn dp_beats_or_matches_exhaustive_for_small_queries() {
        // cost of the DP plan is minimal among all enumerated bushy plans
        let catalog = example_catalog();
        let cm = &catalog.cost_model;
        for text in [
            "SELECT * WHERE { ?s rdf:type db:city . ?s db:located db:Germany . ?s db:name ?n . }",
            "SELECT * WHERE { ?s db:name ?n . ?s db:revenue ?r . }",
            "SELECT * WHERE { ?s rdf:type db:city . ?s db:population ?p . ?s db:name ?n . ?s db:located ?l . }",
        ] {
            let q = parse_sparql(text).unwrap();
            let branch = &q.branches[0];
            let plan = plan_branch(branch, &catalog).unwrap();
            let best = cost(&plan, cm);
            // exhaustive: recursively enumerate all trees over candidate leaves
            let patterns: Vec<PlanPattern> = branch
                .required
                .iter()
                .map(|p| PlanPattern {
                    s: to_plan_term(&p.s, &catalog),
                    p: to_plan_term(&p.p, &catalog),
                    o: to_plan_term(&p.o, &catalog),
                })
                .collect();
            let filters = leaf_filters(branch);
            let leaves: Vec<Vec<PlanNode>> = patterns
                .iter()
                .zip(&filters)
                .map(|(p, fs)| {
                    leaf_orders(p)
                        .into_iter()
                        .map(|o| build_leaf(p, o, fs, &catalog))
                        .collect()
                })
                .collect();
            let mut all_costs = Vec::new();
            enumerate_trees(&leaves, (1u32 << patterns.len()) - 1, &mut all_costs, cm);
            let min = all_costs.iter().cloned().fold(f64::MAX, f64::min);
            assert!(
                best <= min + 1e-6,
                "dp {} worse than exhaustive {} for {}",
                best,
                min,
                text
            );
        }
    }

    fn enumerate_trees(leaves: &[Vec<PlanNode>], mask: u32, out: &mut Vec<f64>, cm: &CostModel) {
        let plans = enumerate_subset(leaves, mask, cm);
        out.extend(plans.iter().map(|p| cost(p, cm)));
    }

    fn enumerate_subset(leaves: &[Vec<PlanNode>], mask: u32, cm: &CostModel) -> Vec<PlanNode> {
        if mask.count_ones() == 1 {
            let i = mask.trailing_zeros() as usize;
            return leaves[i].clone();
        }
        let mut out = Vec::new();
        let low = mask & mask.wrapping_neg();
        let mut s1 = (mask - 1) & mask;
        while s1 > 0 {
            if s1 & low != 0 {
                let s2 = mask ^ s1;
                for a in enumerate_subset(leaves, s1, cm) {
                    for b in enumerate_subset(leaves, s2, cm) {
                        out.extend(join_candidates(&a, &b));
                        out.extend(join_candidates(&b, &a));
                    }
                }
            }
            s1 = (s1 - 1) & mask;
        }
        out
    }

    #[test]
    fn union_branches_combine_via_bmu() {
        let catalog = example_catalog();
        let q = parse_sparql(
            "SELECT ?s WHERE { { ?s db:revenue ?r . } UNION { ?s db:population ?p . } }",
        )
        .unwrap();
        let plan = initial_plan(&q, &catalog).unwrap();
        assert!(matches!(plan.kind, OpKind::Bmu));
        assert_eq!(plan.excard, 5000.0);
        assert_eq!(plan.schema, vec!["s".to_string()]);
    }

    #[test]
    fn filter_fused_above_leaf() {
        let catalog = example_catalog();
        let q = parse_sparql(
            "SELECT * WHERE { ?s db:name ?c . ?s db:revenue ?r . FILTER(?r >= 1000000000) }",
        )
        .unwrap();
        let plan = initial_plan(&q, &catalog).unwrap();
        let filter = plan
            .iter()
            .find(|n| matches!(n.kind, OpKind::Filter(_)))
            .expect("filter in plan");
        assert!(matches!(filter.children[0].kind, OpKind::IndexScan { .. }));
    }
}
