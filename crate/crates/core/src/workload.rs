//! Query-load mining: constant frequency counting, normalization against a
//! threshold, anonymization of variables into a single symbol, and the
//! global query graph whose edges are weighted by join witnesses.

use crate::model::Term;
use crate::sparql::{FilterExpr, PatTerm, Query, TriplePattern};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// A query load: queries with multiplicities.
#[derive(Debug, Clone, Default)]
pub struct QueryLog {
    pub entries: Vec<(Query, u64)>,
}

impl QueryLog {
    pub fn new(entries: Vec<(Query, u64)>) -> QueryLog {
        assert!(entries.iter().all(|(_, m)| *m >= 1), "multiplicities must be positive");
        QueryLog { entries }
    }

    pub fn total_queries(&self) -> u64 {
        self.entries.iter().map(|(_, m)| m).sum()
    }
}

/// Anonymized pattern position: a kept constant or the anonymized variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AnonTerm {
    Omega,
    Const(Term),
}

impl AnonTerm {
    pub fn as_const(&self) -> Option<&Term> {
        match self {
            AnonTerm::Omega => None,
            AnonTerm::Const(t) => Some(t),
        }
    }
}

impl std::fmt::Display for AnonTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AnonTerm::Omega => write!(f, "Ω"),
            AnonTerm::Const(t) => write!(f, "{}", t),
        }
    }
}

/// A normalized, anonymized triple pattern: every variable replaced by the
/// same symbol, infrequent constants replaced by variables first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AnonPattern {
    pub s: AnonTerm,
    pub p: AnonTerm,
    pub o: AnonTerm,
}

impl std::fmt::Display for AnonPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.s, self.p, self.o)
    }
}

/// Node frequencies and witness-weighted edges over anonymized patterns.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GlobalQueryGraph {
    /// f(p): multiplicity-weighted number of queries containing the pattern.
    pub nodes: BTreeMap<AnonPattern, u64>,
    /// Unordered pattern pairs -> witness count. Self-loops keep both ends equal.
    pub edges: BTreeMap<(AnonPattern, AnonPattern), u64>,
}

impl GlobalQueryGraph {
    pub fn edge_weight(&self, a: &AnonPattern, b: &AnonPattern) -> u64 {
        let key = edge_key(a.clone(), b.clone());
        self.edges.get(&key).copied().unwrap_or(0)
    }
}

fn edge_key(a: AnonPattern, b: AnonPattern) -> (AnonPattern, AnonPattern) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Occurrences of each subject/object constant across all triple patterns
/// (optional and non-optional), weighted by query multiplicity. Property
/// constants are counted too but are never eligible for replacement.
pub fn constant_frequencies(ql: &QueryLog) -> HashMap<Term, u64> {
    let mut counts: HashMap<Term, u64> = HashMap::new();
    for (query, mult) in &ql.entries {
        for branch in &query.branches {
            for pattern in branch.all_patterns() {
                for term in [&pattern.s, &pattern.p, &pattern.o] {
                    if let PatTerm::Const(c) = term {
                        *counts.entry(c.clone()).or_insert(0) += mult;
                    }
                }
            }
        }
    }
    counts
}

fn anonymize_position(
    term: &PatTerm,
    is_property: bool,
    freqs: &HashMap<Term, u64>,
    theta: u64,
) -> AnonTerm {
    match term {
        PatTerm::Var(_) => AnonTerm::Omega,
        PatTerm::Const(c) => {
            // properties are never normalized away
            if !is_property {
                let f = freqs.get(c).copied().unwrap_or(0);
                if f < theta {
                    return AnonTerm::Omega;
                }
            }
            AnonTerm::Const(c.clone())
        }
    }
}

/// ω(p) for one pattern under the given frequency table and threshold.
pub fn anonymize_pattern(
    pattern: &TriplePattern,
    freqs: &HashMap<Term, u64>,
    theta: u64,
) -> AnonPattern {
    AnonPattern {
        s: anonymize_position(&pattern.s, false, freqs, theta),
        p: anonymize_position(&pattern.p, true, freqs, theta),
        o: anonymize_position(&pattern.o, false, freqs, theta),
    }
}

/// Φ(QL): anonymized patterns with their frequencies f(p). A pattern
/// occurring several times in one query counts once toward that query.
pub fn normalize_and_anonymize(ql: &QueryLog, theta: u64) -> BTreeMap<AnonPattern, u64> {
    assert!(theta >= 1, "theta must be >= 1");
    let freqs = constant_frequencies(ql);
    let mut phi: BTreeMap<AnonPattern, u64> = BTreeMap::new();
    for (query, mult) in &ql.entries {
        let mut in_this_query: BTreeSet<AnonPattern> = BTreeSet::new();
        for branch in &query.branches {
            for pattern in branch.all_patterns() {
                in_this_query.insert(anonymize_pattern(pattern, &freqs, theta));
            }
        }
        for p in in_this_query {
            *phi.entry(p).or_insert(0) += mult;
        }
    }
    phi
}

/// Build G(QL): nodes are Φ(QL); an edge joins two anonymized patterns when
/// some query contains pre-images that share a variable, weighted by the
/// multiplicity-weighted witness count.
pub fn build_global_query_graph(ql: &QueryLog, theta: u64) -> GlobalQueryGraph {
    let freqs = constant_frequencies(ql);
    let nodes = normalize_and_anonymize(ql, theta);
    let mut edges: BTreeMap<(AnonPattern, AnonPattern), u64> = BTreeMap::new();
    for (query, mult) in &ql.entries {
        // pairs of patterns within one query joining on a shared variable;
        // each anonymized pair counts once per query
        let mut witnessed: BTreeSet<(AnonPattern, AnonPattern)> = BTreeSet::new();
        for branch in &query.branches {
            let patterns: Vec<&TriplePattern> = branch.all_patterns().collect();
            for i in 0..patterns.len() {
                for j in (i + 1)..patterns.len() {
                    if patterns[i].shares_var(patterns[j]) {
                        let a = anonymize_pattern(patterns[i], &freqs, theta);
                        let b = anonymize_pattern(patterns[j], &freqs, theta);
                        witnessed.insert(edge_key(a, b));
                    }
                }
            }
        }
        for key in witnessed {
            *edges.entry(key).or_insert(0) += mult;
        }
    }
    GlobalQueryGraph { nodes, edges }
}

/// Filters of all queries paired with the components their variable binds,
/// used to derive comparison/function simple predicates.
pub fn collect_filters(ql: &QueryLog) -> Vec<(FilterExpr, BTreeSet<crate::store::Component>)> {
    use crate::store::Component;
    let mut out = Vec::new();
    for (query, _) in &ql.entries {
        for branch in &query.branches {
            for filter in &branch.filters {
                let var = filter.var();
                let mut positions = BTreeSet::new();
                for pattern in branch.all_patterns() {
                    if pattern.s.as_var() == Some(var) {
                        positions.insert(Component::Subj);
                    }
                    if pattern.p.as_var() == Some(var) {
                        positions.insert(Component::Prop);
                    }
                    if pattern.o.as_var() == Some(var) {
                        positions.insert(Component::Obj);
                    }
                }
                if !positions.is_empty() {
                    out.push((filter.clone(), positions));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::example_query_log;
    use crate::sparql::parse_sparql;

    fn term_iri(s: &str) -> Term {
        Term::iri(s)
    }

    const DB: &str = "http://example.org/db/";
    const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";

    fn db(n: &str) -> Term {
        term_iri(&format!("{}{}", DB, n))
    }

    #[test]
    fn example_constant_frequencies() {
        let freqs = constant_frequencies(&example_query_log());
        assert_eq!(freqs.get(&db("Germany")), Some(&3));
        assert_eq!(freqs.get(&db("city")), Some(&3));
        assert_eq!(freqs.get(&Term::literal("Apple")), Some(&10));
        assert_eq!(freqs.get(&db("USA")), Some(&1));
        assert_eq!(freqs.get(&db("company")), Some(&1));
        // properties counted too
        assert_eq!(freqs.get(&term_iri(&format!("{}type", RDF))), Some(&4));
    }

    #[test]
    fn empty_log_empty_map() {
        assert!(constant_frequencies(&QueryLog::default()).is_empty());
    }

    #[test]
    fn multiplicity_weights_counts() {
        let q = parse_sparql("SELECT * WHERE { ?s db:located db:Germany }").unwrap();
        let ql = QueryLog::new(vec![(q, 5)]);
        let freqs = constant_frequencies(&ql);
        assert_eq!(freqs.get(&db("Germany")), Some(&5));
    }

    #[test]
    fn theta2_replaces_infrequent_constants() {
        let phi = normalize_and_anonymize(&example_query_log(), 2);
        // db:USA and db:company are gone; their patterns merged into Ω forms
        let located_omega = AnonPattern {
            s: AnonTerm::Omega,
            p: AnonTerm::Const(db("located")),
            o: AnonTerm::Omega,
        };
        let type_omega = AnonPattern {
            s: AnonTerm::Omega,
            p: AnonTerm::Const(term_iri(&format!("{}type", RDF))),
            o: AnonTerm::Omega,
        };
        assert_eq!(phi.get(&located_omega), Some(&1));
        assert_eq!(phi.get(&type_omega), Some(&1));
        // kept constants
        let type_city = AnonPattern {
            s: AnonTerm::Omega,
            p: AnonTerm::Const(term_iri(&format!("{}type", RDF))),
            o: AnonTerm::Const(db("city")),
        };
        assert_eq!(phi.get(&type_city), Some(&3));
        let name_apple = AnonPattern {
            s: AnonTerm::Omega,
            p: AnonTerm::Const(db("name")),
            o: AnonTerm::Const(Term::literal("Apple")),
        };
        assert_eq!(phi.get(&name_apple), Some(&10));
        assert!(!phi.keys().any(|p| p.o.as_const() == Some(&db("USA"))));
        assert!(!phi.keys().any(|p| p.o.as_const() == Some(&db("company"))));
    }

    #[test]
    fn theta1_replaces_nothing() {
        let phi = normalize_and_anonymize(&example_query_log(), 1);
        assert!(phi.keys().any(|p| p.o.as_const() == Some(&db("USA"))));
        assert!(phi.keys().any(|p| p.o.as_const() == Some(&db("company"))));
    }

    #[test]
    fn example_graph_edge_weights() {
        let g = build_global_query_graph(&example_query_log(), 2);
        let name_apple = AnonPattern {
            s: AnonTerm::Omega,
            p: AnonTerm::Const(db("name")),
            o: AnonTerm::Const(Term::literal("Apple")),
        };
        let revenue = AnonPattern {
            s: AnonTerm::Omega,
            p: AnonTerm::Const(db("revenue")),
            o: AnonTerm::Omega,
        };
        assert_eq!(g.edge_weight(&name_apple, &revenue), 10);
        let type_city = AnonPattern {
            s: AnonTerm::Omega,
            p: AnonTerm::Const(term_iri(&format!("{}type", RDF))),
            o: AnonTerm::Const(db("city")),
        };
        let located_germany = AnonPattern {
            s: AnonTerm::Omega,
            p: AnonTerm::Const(db("located")),
            o: AnonTerm::Const(db("Germany")),
        };
        assert_eq!(g.edge_weight(&type_city, &located_germany), 2);
    }

    #[test]
    fn one_pattern_query_contributes_node_no_edges() {
        let q = parse_sparql("SELECT * WHERE { ?s db:name ?n }").unwrap();
        let g = build_global_query_graph(&QueryLog::new(vec![(q, 1)]), 2);
        assert_eq!(g.nodes.len(), 1);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn self_join_produces_self_loop() {
        let q = parse_sparql("SELECT * WHERE { ?a db:knows ?b . ?b db:knows ?c . }").unwrap();
        let g = build_global_query_graph(&QueryLog::new(vec![(q, 3)]), 2);
        assert_eq!(g.nodes.len(), 1);
        let p = g.nodes.keys().next().unwrap().clone();
        assert_eq!(g.edge_weight(&p, &p), 3);
    }

    #[test]
    fn anonymization_idempotent() {
        // applying ω to a pattern already in Ω form changes nothing
        let freqs = constant_frequencies(&example_query_log());
        let q = parse_sparql("SELECT * WHERE { ?s db:name ?n }").unwrap();
        let first = anonymize_pattern(&q.branches[0].required[0], &freqs, 2);
        let as_pattern = TriplePattern {
            s: PatTerm::Var("w".into()),
            p: match &first.p {
                AnonTerm::Const(c) => PatTerm::Const(c.clone()),
                AnonTerm::Omega => PatTerm::Var("w2".into()),
            },
            o: match &first.o {
                AnonTerm::Const(c) => PatTerm::Const(c.clone()),
                AnonTerm::Omega => PatTerm::Var("w3".into()),
            },
        };
        assert_eq!(anonymize_pattern(&as_pattern, &freqs, 2), first);
    }

    #[test]
    fn raising_theta_never_unreplaces() {
        let ql = example_query_log();
        let freqs = constant_frequencies(&ql);
        let omega_positions = |theta: u64| -> usize {
            ql.entries
                .iter()
                .flat_map(|(q, _)| q.branches.iter())
                .flat_map(|b| b.all_patterns())
                .map(|p| {
                    let a = anonymize_pattern(p, &freqs, theta);
                    [&a.s, &a.p, &a.o].iter().filter(|t| ***t == AnonTerm::Omega).count()
                })
                .sum()
        };
        let mut prev = omega_positions(1);
        for theta in 2..=12 {
            let now = omega_positions(theta);
            assert!(now >= prev, "theta {} decreased omega count", theta);
            prev = now;
        }
    }

    #[test]
    fn edge_weight_bounded_by_cooccurrence() {
        // weight of {p,r} <= multiplicity-weighted count of queries containing both
        let ql = example_query_log();
        let freqs = constant_frequencies(&ql);
        let g = build_global_query_graph(&ql, 2);
        for ((a, b), w) in &g.edges {
            let mut containing = 0;
            for (q, m) in &ql.entries {
                let pats: BTreeSet<AnonPattern> = q
                    .branches
                    .iter()
                    .flat_map(|br| br.all_patterns())
                    .map(|p| anonymize_pattern(p, &freqs, 2))
                    .collect();
                if pats.contains(a) && pats.contains(b) {
                    containing += m;
                }
            }
            assert!(w <= &containing, "edge {:?} weight {} > cooccurrence {}", (a, b), w, containing);
        }
    }
}
