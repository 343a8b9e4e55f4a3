//! Random query generation seeded from the data: star and path shapes built
//! from properties that actually co-occur, so every generated query has at
//! least one result.

use crate::model::{Dictionary, TermId, Triple};
use crate::sparql::{GraphPattern, PatTerm, Projection, Query, TriplePattern};
use crate::store::{IdPattern, IndexOrder, TripleStore};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub count: usize,
    pub max_star: usize,
    pub max_path: usize,
    pub seed: u64,
    /// Probability of binding a star pattern's object to its data value.
    pub bind_object_prob: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { count: 30, max_star: 6, max_path: 4, seed: 7, bind_object_prob: 0.3 }
    }
}

/// Generate queries against the store. Queries are deterministic for a
/// fixed seed and each has at least one result by construction. Shapes that
/// cannot be built from the data are skipped with a notice.
pub fn generate_queries(
    store: &TripleStore,
    dict: &Dictionary,
    cfg: &GenConfig,
) -> (Vec<Query>, Vec<String>) {
    assert!(cfg.max_star >= 1 && cfg.max_path >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let all: Vec<Triple> = store.iter().collect();
    let mut queries = Vec::new();
    let mut notices = Vec::new();
    if all.is_empty() {
        notices.push("store is empty; no queries generated".to_string());
        return (queries, notices);
    }
    let mut attempts = 0usize;
    while queries.len() < cfg.count && attempts < cfg.count * 20 {
        attempts += 1;
        let want_path = rng.gen_bool(0.4);
        let q = if want_path {
            gen_path(store, dict, &all, cfg, &mut rng)
        } else {
            gen_star(store, dict, &all, cfg, &mut rng)
        };
        match q {
            Some(q) => queries.push(q),
            None => notices.push(format!(
                "attempt {}: no co-occurring properties for a {} query; skipped",
                attempts,
                if want_path { "path" } else { "star" }
            )),
        }
    }
    (queries, notices)
}

fn term_of(dict: &Dictionary, id: TermId) -> PatTerm {
    PatTerm::Const(dict.term(id).expect("id in dictionary").clone())
}

/// Star: patterns sharing one subject variable, properties drawn from a real
/// subject's property set.
fn gen_star(
    store: &TripleStore,
    dict: &Dictionary,
    all: &[Triple],
    cfg: &GenConfig,
    rng: &mut ChaCha8Rng,
) -> Option<Query> {
    let seed_triple = all[rng.gen_range(0..all.len())];
    let subject = seed_triple.s;
    let here: Vec<Triple> = store
        .scan(IdPattern::new(Some(subject), None, None), IndexOrder::Spo)
        .ok()?
        .collect();
    let mut props: Vec<TermId> = here.iter().map(|t| t.p).collect();
    props.sort();
    props.dedup();
    props.shuffle(rng);
    let k = rng.gen_range(1..=cfg.max_star).min(props.len());
    let chosen = &props[..k];
    let mut patterns = Vec::new();
    for (i, p) in chosen.iter().enumerate() {
        let sample = here.iter().find(|t| t.p == *p).unwrap();
        let object = if rng.gen_bool(cfg.bind_object_prob) {
            term_of(dict, sample.o)
        } else {
            PatTerm::Var(format!("o{}", i))
        };
        patterns.push(TriplePattern {
            s: PatTerm::Var("x".to_string()),
            p: term_of(dict, *p),
            o: object,
        });
    }
    Some(Query {
        projection: Projection::All,
        branches: vec![GraphPattern { required: patterns, optional: vec![], filters: vec![] }],
    })
}

/// Path: each pattern's object is the next pattern's subject, following
/// actual links in the data.
fn gen_path(
    store: &TripleStore,
    dict: &Dictionary,
    all: &[Triple],
    cfg: &GenConfig,
    rng: &mut ChaCha8Rng,
) -> Option<Query> {
    // a path of length 1 is just a single-pattern query
    let target_len = rng.gen_range(1..=cfg.max_path);
    let mut start_attempts = 0;
    'outer: while start_attempts < 12 {
        start_attempts += 1;
        let mut current = all[rng.gen_range(0..all.len())];
        let mut hops = vec![current];
        while hops.len() < target_len {
            let continuations: Vec<Triple> = store
                .scan(IdPattern::new(Some(current.o), None, None), IndexOrder::Spo)
                .ok()
                .map(|it| it.collect())
                .unwrap_or_default();
            if continuations.is_empty() {
                if hops.len() == 1 && target_len > 1 {
                    continue 'outer; // dead start, retry
                }
                break;
            }
            current = continuations[rng.gen_range(0..continuations.len())];
            hops.push(current);
        }
        let patterns: Vec<TriplePattern> = hops
            .iter()
            .enumerate()
            .map(|(i, t)| TriplePattern {
                s: PatTerm::Var(format!("v{}", i)),
                p: term_of(dict, t.p),
                o: PatTerm::Var(format!("v{}", i + 1)),
            })
            .collect();
        return Some(Query {
            projection: Projection::All,
            branches: vec![GraphPattern { required: patterns, optional: vec![], filters: vec![] }],
        });
    }
    None
}
