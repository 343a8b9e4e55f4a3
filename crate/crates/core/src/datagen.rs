//! Bundled datasets: the worked-example city/company data with its query
//! log, and a seeded synthetic generator for larger runs.

use crate::model::Dictionary;
use crate::ntriples::parse_ntriples_str;
use crate::sparql::parse_sparql;
use crate::store::TripleStore;
use crate::workload::QueryLog;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write;

pub const DB_NS: &str = "http://example.org/db/";
pub const RDF_TYPE_IRI: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// The worked-example dataset: 3000 typed cities, 2000 typed companies with
/// revenues above 1e9, 4500 names with exactly one "Apple", 300 German and
/// 1700 non-German locations, 3000 populations, 3000 filler triples under a
/// property no query mentions. 19500 triples total.
pub fn example_ntriples() -> String {
    let mut out = String::with_capacity(2 << 20);
    let city = |i: usize| format!("<{}city{}>", DB_NS, i);
    let company = |i: usize| format!("<{}company{}>", DB_NS, i);
    for i in 0..3000 {
        let _ = writeln!(out, "{} <{}> <{}city> .", city(i), RDF_TYPE_IRI, DB_NS);
    }
    for i in 0..2000 {
        let _ = writeln!(out, "{} <{}> <{}company> .", company(i), RDF_TYPE_IRI, DB_NS);
    }
    // 4500 names: every city, plus companies 0..1500; company 0 is "Apple"
    for i in 0..3000 {
        let _ = writeln!(out, "{} <{}name> \"City {}\" .", city(i), DB_NS, i);
    }
    let _ = writeln!(out, "{} <{}name> \"Apple\" .", company(0), DB_NS);
    for i in 1..1500 {
        let _ = writeln!(out, "{} <{}name> \"Company {}\" .", company(i), DB_NS, i);
    }
    // 300 located in Germany (270 cities, 30 companies)
    for i in 0..270 {
        let _ = writeln!(out, "{} <{}located> <{}Germany> .", city(i), DB_NS, DB_NS);
    }
    for i in 0..30 {
        let _ = writeln!(out, "{} <{}located> <{}Germany> .", company(i), DB_NS, DB_NS);
    }
    // 1700 located elsewhere (1630 cities, 70 companies)
    for i in 0..1630 {
        let _ = writeln!(
            out,
            "{} <{}located> <{}country{}> .",
            city(270 + i),
            DB_NS,
            DB_NS,
            i % 25
        );
    }
    for i in 0..70 {
        let _ = writeln!(
            out,
            "{} <{}located> <{}country{}> .",
            company(30 + i),
            DB_NS,
            DB_NS,
            i % 25
        );
    }
    // 3000 populations, all far below 1e9
    for i in 0..3000 {
        let _ = writeln!(out, "{} <{}population> \"{}\" .", city(i), DB_NS, 1000 + i * 13);
    }
    // 2000 revenues, all strictly above 1e9
    for i in 0..2000 {
        let _ = writeln!(
            out,
            "{} <{}revenue> \"{}\" .",
            company(i),
            DB_NS,
            1_000_000_000u64 + (i as u64 + 1) * 1000
        );
    }
    // 3000 filler triples under an unqueried property
    for i in 0..3000 {
        let _ = writeln!(
            out,
            "<{}entity{}> <{}seeAlso> <{}entity{}> .",
            DB_NS,
            i,
            DB_NS,
            DB_NS,
            (i + 1) % 3000
        );
    }
    out
}

pub fn example_dataset() -> (TripleStore, Dictionary) {
    let mut dict = Dictionary::new();
    let triples = parse_ntriples_str(&example_ntriples(), &mut dict).expect("bundled data parses");
    (TripleStore::from_triples(triples), dict)
}

/// The worked-example query load: five queries with multiplicities
/// 2, 1, 1, 1, 10.
pub fn example_query_log_text() -> String {
    let entries = [
        (2, "SELECT * WHERE { ?s rdf:type db:city . ?s db:located db:Germany . ?s db:name ?n . }"),
        (1, "SELECT * WHERE { ?s rdf:type db:city . ?s db:located db:USA . ?s db:population ?p . }"),
        (1, "SELECT * WHERE { ?s rdf:type db:company . ?s db:located db:Germany . }"),
        (1, "SELECT * WHERE { ?s db:name ?c . ?s db:revenue ?r . FILTER(?r >= 1000000000) }"),
        (10, "SELECT * WHERE { ?s db:name \"Apple\" . ?s db:revenue ?r . }"),
    ];
    let mut out = String::new();
    for (i, (mult, text)) in entries.iter().enumerate() {
        if i > 0 {
            out.push_str("###\n");
        }
        if *mult != 1 {
            let _ = writeln!(out, "#x {}", mult);
        }
        let _ = writeln!(out, "{}", text);
    }
    out
}

pub fn example_query_log() -> QueryLog {
    let entries = crate::sparql::parse_query_log(&example_query_log_text())
        .expect("bundled query log parses");
    QueryLog::new(entries)
}

/// The three-pattern query of the planning example.
pub fn figure4_query() -> crate::sparql::Query {
    parse_sparql(
        "SELECT ?name WHERE { ?s rdf:type db:city . ?s db:located db:Germany . ?s db:name ?name . }",
    )
    .unwrap()
}

/// Seeded synthetic dataset shaped for query generation: typed entities with
/// overlapping property sets, literal values, and entity-to-entity links so
/// both star and path queries find matches. Generates at least
/// `min_triples` triples.
pub fn synthetic_ntriples(min_triples: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::with_capacity(min_triples * 48);
    let n_classes = 8;
    let n_val_props = 10;
    let n_link_props = 4;
    let mut produced = 0usize;
    let mut entity = 0usize;
    while produced < min_triples {
        let e = format!("<http://example.org/e{}>", entity);
        let class = rng.gen_range(0..n_classes);
        let _ = writeln!(out, "{} <{}> <http://example.org/class{}> .", e, RDF_TYPE_IRI, class);
        produced += 1;
        // value properties co-occur within a class cluster
        let n_vals = rng.gen_range(1..=4usize);
        for _ in 0..n_vals {
            let p = (class * 2 + rng.gen_range(0..3)) % n_val_props;
            let v = rng.gen_range(0..100_000);
            let _ = writeln!(out, "{} <http://example.org/val{}> \"{}\" .", e, p, v);
            produced += 1;
        }
        // links point at nearby entities so paths resolve
        let n_links = rng.gen_range(0..=2usize);
        for _ in 0..n_links {
            let p = rng.gen_range(0..n_link_props);
            let target = if entity == 0 { 1 } else { rng.gen_range(0..entity + 1) };
            let _ = writeln!(
                out,
                "{} <http://example.org/link{}> <http://example.org/e{}> .",
                e, p, target
            );
            produced += 1;
        }
        entity += 1;
    }
    out
}

pub fn synthetic_dataset(min_triples: usize, seed: u64) -> (TripleStore, Dictionary) {
    let mut dict = Dictionary::new();
    let triples = parse_ntriples_str(&synthetic_ntriples(min_triples, seed), &mut dict)
        .expect("synthetic data parses");
    (TripleStore::from_triples(triples), dict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Term, TermId};
    use crate::store::IdPattern;

    fn id(dict: &Dictionary, term: &Term) -> Option<TermId> {
        dict.lookup(term)
    }

    #[test]
    fn example_dataset_counts() {
        let (store, dict) = example_dataset();
        assert_eq!(store.len(), 19_500);
        let type_id = id(&dict, &Term::iri(RDF_TYPE_IRI)).unwrap();
        let city = id(&dict, &Term::iri(format!("{}city", DB_NS))).unwrap();
        let company = id(&dict, &Term::iri(format!("{}company", DB_NS))).unwrap();
        assert_eq!(store.cardinality(IdPattern::new(None, Some(type_id), Some(city))), 3000);
        assert_eq!(store.cardinality(IdPattern::new(None, Some(type_id), Some(company))), 2000);
        let name = id(&dict, &Term::iri(format!("{}name", DB_NS))).unwrap();
        assert_eq!(store.cardinality(IdPattern::new(None, Some(name), None)), 4500);
        let apple = id(&dict, &Term::literal("Apple")).unwrap();
        assert_eq!(store.cardinality(IdPattern::new(None, Some(name), Some(apple))), 1);
        let located = id(&dict, &Term::iri(format!("{}located", DB_NS))).unwrap();
        let germany = id(&dict, &Term::iri(format!("{}Germany", DB_NS))).unwrap();
        assert_eq!(store.cardinality(IdPattern::new(None, Some(located), Some(germany))), 300);
        assert_eq!(store.cardinality(IdPattern::new(None, Some(located), None)), 2000);
        let population = id(&dict, &Term::iri(format!("{}population", DB_NS))).unwrap();
        assert_eq!(store.cardinality(IdPattern::new(None, Some(population), None)), 3000);
        let revenue = id(&dict, &Term::iri(format!("{}revenue", DB_NS))).unwrap();
        assert_eq!(store.cardinality(IdPattern::new(None, Some(revenue), None)), 2000);
    }

    #[test]
    fn example_revenues_above_threshold() {
        let (store, dict) = example_dataset();
        let revenue = dict.lookup(&Term::iri(format!("{}revenue", DB_NS))).unwrap();
        for t in store
            .scan(IdPattern::new(None, Some(revenue), None), crate::store::IndexOrder::Pso)
            .unwrap()
        {
            let v = dict.term(t.o).unwrap().numeric_value().unwrap();
            assert!(v > 1.0e9);
        }
        let population = dict.lookup(&Term::iri(format!("{}population", DB_NS))).unwrap();
        for t in store
            .scan(IdPattern::new(None, Some(population), None), crate::store::IndexOrder::Pso)
            .unwrap()
        {
            let v = dict.term(t.o).unwrap().numeric_value().unwrap();
            assert!(v < 1.0e9);
        }
    }

    #[test]
    fn example_log_parses_with_multiplicities() {
        let ql = example_query_log();
        let mults: Vec<u64> = ql.entries.iter().map(|(_, m)| *m).collect();
        assert_eq!(mults, vec![2, 1, 1, 1, 10]);
        assert_eq!(ql.total_queries(), 15);
    }

    #[test]
    fn synthetic_deterministic_and_sized() {
        let a = synthetic_ntriples(5000, 9);
        let b = synthetic_ntriples(5000, 9);
        assert_eq!(a, b);
        let (store, _) = synthetic_dataset(5000, 9);
        assert!(store.len() >= 5000);
    }
}
