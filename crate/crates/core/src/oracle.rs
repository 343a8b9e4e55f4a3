//! Centralized reference evaluator: straightforward binding propagation over
//! a single store. Deliberately independent of the plan operators; used as
//! the equivalence oracle for distributed execution and by the query
//! generator.

use crate::model::{Dictionary, TermId};
use crate::sparql::{FilterExpr, PatTerm, Projection, Query, TriplePattern};
use crate::store::{IdPattern, TripleStore};
use std::collections::HashMap;

/// One result row: ids in output-variable order.
pub type Row = Vec<TermId>;

/// Evaluate a query, returning the bag of rows over the query's output
/// variables (see [`Query::output_vars`]). Row order is unspecified.
pub fn evaluate(query: &Query, store: &TripleStore, dict: &Dictionary) -> Vec<Row> {
    let out_vars = query.output_vars();
    let mut rows = Vec::new();
    for branch in &query.branches {
        let mut bindings: Vec<HashMap<String, TermId>> = vec![HashMap::new()];
        for pattern in &branch.required {
            let mut next = Vec::new();
            for binding in &bindings {
                extend(pattern, binding, store, dict, &mut next);
            }
            bindings = next;
            if bindings.is_empty() {
                break;
            }
        }
        for f in &branch.filters {
            bindings.retain(|b| filter_passes(f, b, dict));
        }
        for b in bindings {
            rows.push(
                out_vars
                    .iter()
                    .map(|v| b.get(v).copied().unwrap_or(TermId::UNASSIGNED))
                    .collect(),
            );
        }
    }
    rows
}

fn resolve(
    term: &PatTerm,
    binding: &HashMap<String, TermId>,
    dict: &Dictionary,
) -> Result<Option<TermId>, ()> {
    match term {
        PatTerm::Var(v) => Ok(binding.get(v).copied()),
        PatTerm::Const(c) => match dict.lookup(c) {
            Some(id) => Ok(Some(id)),
            None => Err(()), // constant absent from the data: no matches
        },
    }
}

fn extend(
    pattern: &TriplePattern,
    binding: &HashMap<String, TermId>,
    store: &TripleStore,
    dict: &Dictionary,
    out: &mut Vec<HashMap<String, TermId>>,
) {
    let (s, p, o) = match (
        resolve(&pattern.s, binding, dict),
        resolve(&pattern.p, binding, dict),
        resolve(&pattern.o, binding, dict),
    ) {
        (Ok(s), Ok(p), Ok(o)) => (s, p, o),
        _ => return,
    };
    let idp = IdPattern::new(s, p, o);
    let order = idp.any_order();
    for t in store.scan(idp, order).expect("any_order is compatible") {
        let mut b = binding.clone();
        let mut ok = true;
        for (term, id) in [(&pattern.s, t.s), (&pattern.p, t.p), (&pattern.o, t.o)] {
            if let PatTerm::Var(v) = term {
                match b.get(v) {
                    Some(existing) if *existing != id => {
                        ok = false;
                        break;
                    }
                    _ => {
                        b.insert(v.clone(), id);
                    }
                }
            }
        }
        if ok {
            out.push(b);
        }
    }
}

fn filter_passes(f: &FilterExpr, binding: &HashMap<String, TermId>, dict: &Dictionary) -> bool {
    let id = match binding.get(f.var()) {
        Some(id) => *id,
        None => return false, // filter over an unbound (optional-only) variable
    };
    let term = match dict.term(id) {
        Some(t) => t,
        None => return false,
    };
    match f {
        FilterExpr::Compare { op, value, .. } => {
            if *op == crate::sparql::CmpOp::Eq {
                term == value
            } else {
                op.eval(crate::model::compare_values(term, value))
            }
        }
        FilterExpr::IsIri { .. } => term.is_iri(),
        FilterExpr::IsLiteral { .. } => !term.is_iri(),
    }
}

/// Decode rows to display strings for reporting.
pub fn decode_rows(rows: &[Row], dict: &Dictionary) -> Vec<Vec<String>> {
    rows.iter()
        .map(|row| {
            row.iter()
                .map(|id| {
                    dict.term(*id).map(|t| t.to_string()).unwrap_or_else(|| String::from("UNDEF"))
                })
                .collect()
        })
        .collect()
}

/// Canonical bag form: sorted rows, for multiset comparison.
pub fn bag(mut rows: Vec<Row>) -> Vec<Row> {
    rows.sort();
    rows
}

/// Projection sanity helper used in tests.
pub fn projected_width(query: &Query) -> usize {
    match &query.projection {
        Projection::All => query.output_vars().len(),
        Projection::Vars(vs) => vs.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen;
    use crate::sparql::parse_sparql;

    #[test]
    fn figure4_query_finds_german_cities_with_names() {
        let (store, dict) = datagen::example_dataset();
        let rows = evaluate(&datagen::figure4_query(), &store, &dict);
        // 270 cities are located in Germany, all have names
        assert_eq!(rows.len(), 270);
    }

    #[test]
    fn filter_restricts_revenue() {
        let (store, dict) = datagen::example_dataset();
        // all revenues exceed 1e9
        let q = parse_sparql(
            "SELECT * WHERE { ?s db:name ?c . ?s db:revenue ?r . FILTER(?r >= 1000000000) }",
        )
        .unwrap();
        let rows = evaluate(&q, &store, &dict);
        assert_eq!(rows.len(), 1500); // every named company
        let q2 = parse_sparql(
            "SELECT * WHERE { ?s db:name ?c . ?s db:revenue ?r . FILTER(?r < 1000000000) }",
        )
        .unwrap();
        assert_eq!(evaluate(&q2, &store, &dict).len(), 0);
    }

    #[test]
    fn union_concatenates_bags() {
        let (store, dict) = datagen::example_dataset();
        let q = parse_sparql(
            "SELECT ?s WHERE { { ?s db:revenue ?r . } UNION { ?s db:population ?p . } }",
        )
        .unwrap();
        assert_eq!(evaluate(&q, &store, &dict).len(), 5000);
    }

    #[test]
    fn apple_query() {
        let (store, dict) = datagen::example_dataset();
        let q = parse_sparql("SELECT ?r WHERE { ?s db:name \"Apple\" . ?s db:revenue ?r . }")
            .unwrap();
        let rows = evaluate(&q, &store, &dict);
        assert_eq!(rows.len(), 1);
        let decoded = decode_rows(&rows, &dict);
        assert_eq!(decoded[0][0], "\"1000001000\"");
    }

    #[test]
    fn repeated_variable_must_match() {
        let mut dict = Dictionary::new();
        let triples = crate::ntriples::parse_ntriples_str(
            "<a> <p> <a> .\n<b> <p> <c> .\n",
            &mut dict,
        )
        .unwrap();
        let store = TripleStore::from_triples(triples);
        let q = parse_sparql("SELECT * WHERE { ?x <p> ?x }").unwrap();
        assert_eq!(evaluate(&q, &store, &dict).len(), 1);
    }
}
