//! In-memory triple store with all six component orderings materialized.
//!
//! Every index holds the same triple set; scans are range reads over the
//! index whose bound prefix covers the pattern's bound components.

use crate::model::{Dictionary, TermId, Triple};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

/// One of the six component orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndexOrder {
    Spo,
    Sop,
    Pso,
    Pos,
    Osp,
    Ops,
}

pub const ALL_ORDERS: [IndexOrder; 6] = [
    IndexOrder::Spo,
    IndexOrder::Sop,
    IndexOrder::Pso,
    IndexOrder::Pos,
    IndexOrder::Osp,
    IndexOrder::Ops,
];

/// Triple component, in subject/property/object terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Component {
    Subj,
    Prop,
    Obj,
}

impl IndexOrder {
    pub fn name(&self) -> &'static str {
        match self {
            IndexOrder::Spo => "SPO",
            IndexOrder::Sop => "SOP",
            IndexOrder::Pso => "PSO",
            IndexOrder::Pos => "POS",
            IndexOrder::Osp => "OSP",
            IndexOrder::Ops => "OPS",
        }
    }

    /// Component sequence of this order.
    pub fn components(&self) -> [Component; 3] {
        use Component::*;
        match self {
            IndexOrder::Spo => [Subj, Prop, Obj],
            IndexOrder::Sop => [Subj, Obj, Prop],
            IndexOrder::Pso => [Prop, Subj, Obj],
            IndexOrder::Pos => [Prop, Obj, Subj],
            IndexOrder::Osp => [Obj, Subj, Prop],
            IndexOrder::Ops => [Obj, Prop, Subj],
        }
    }

    fn permute(&self, t: &Triple) -> [u64; 3] {
        let pick = |c: Component| match c {
            Component::Subj => t.s.0,
            Component::Prop => t.p.0,
            Component::Obj => t.o.0,
        };
        let [a, b, c] = self.components();
        [pick(a), pick(b), pick(c)]
    }

    fn unpermute(&self, key: [u64; 3]) -> Triple {
        let comps = self.components();
        let mut s = 0;
        let mut p = 0;
        let mut o = 0;
        for (i, c) in comps.iter().enumerate() {
            match c {
                Component::Subj => s = key[i],
                Component::Prop => p = key[i],
                Component::Obj => o = key[i],
            }
        }
        Triple::new(TermId(s), TermId(p), TermId(o))
    }
}

/// A triple pattern over ids; `None` is a wildcard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct IdPattern {
    pub s: Option<TermId>,
    pub p: Option<TermId>,
    pub o: Option<TermId>,
}

impl IdPattern {
    pub fn new(s: Option<TermId>, p: Option<TermId>, o: Option<TermId>) -> IdPattern {
        IdPattern { s, p, o }
    }

    pub fn matches(&self, t: &Triple) -> bool {
        self.s.map_or(true, |v| v == t.s)
            && self.p.map_or(true, |v| v == t.p)
            && self.o.map_or(true, |v| v == t.o)
    }

    fn bound(&self, c: Component) -> Option<TermId> {
        match c {
            Component::Subj => self.s,
            Component::Prop => self.p,
            Component::Obj => self.o,
        }
    }

    fn bound_count(&self) -> usize {
        [self.s, self.p, self.o].iter().filter(|x| x.is_some()).count()
    }

    /// An order can serve this pattern if its bound components form a prefix
    /// of the order.
    pub fn compatible(&self, order: IndexOrder) -> bool {
        let comps = order.components();
        let n = self.bound_count();
        comps.iter().take(n).all(|c| self.bound(*c).is_some())
    }

    /// Any compatible order (used when the caller has no order preference).
    pub fn any_order(&self) -> IndexOrder {
        ALL_ORDERS
            .into_iter()
            .find(|o| self.compatible(*o))
            .expect("some order is always compatible")
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("index order {order} incompatible with bound components of pattern")]
    IncompatibleOrder { order: &'static str },
    #[error("triple uses unassigned term id")]
    UnassignedId,
}

/// Six sorted indexes plus aggregated count tables.
#[derive(Debug, Clone, Default)]
pub struct TripleStore {
    indexes: [BTreeSet<[u64; 3]>; 6],
    count_p: HashMap<u64, u64>,
    count_po: HashMap<(u64, u64), u64>,
    count_ps: HashMap<(u64, u64), u64>,
    total: u64,
}

fn order_slot(order: IndexOrder) -> usize {
    match order {
        IndexOrder::Spo => 0,
        IndexOrder::Sop => 1,
        IndexOrder::Pso => 2,
        IndexOrder::Pos => 3,
        IndexOrder::Osp => 4,
        IndexOrder::Ops => 5,
    }
}

impl TripleStore {
    pub fn new() -> TripleStore {
        TripleStore::default()
    }

    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> TripleStore {
        let mut store = TripleStore::new();
        for t in triples {
            let _ = store.insert(t);
        }
        store
    }

    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.indexes[0].contains(&IndexOrder::Spo.permute(t))
    }

    /// Insert; false if the triple was already present.
    pub fn insert(&mut self, t: Triple) -> bool {
        if !(t.s.is_assigned() && t.p.is_assigned() && t.o.is_assigned()) {
            return false;
        }
        if !self.indexes[0].insert(IndexOrder::Spo.permute(&t)) {
            return false;
        }
        for order in ALL_ORDERS.into_iter().skip(1) {
            self.indexes[order_slot(order)].insert(order.permute(&t));
        }
        *self.count_p.entry(t.p.0).or_insert(0) += 1;
        *self.count_po.entry((t.p.0, t.o.0)).or_insert(0) += 1;
        *self.count_ps.entry((t.p.0, t.s.0)).or_insert(0) += 1;
        self.total += 1;
        true
    }

    /// Delete; false if absent.
    pub fn delete(&mut self, t: &Triple) -> bool {
        if !self.indexes[0].remove(&IndexOrder::Spo.permute(t)) {
            return false;
        }
        for order in ALL_ORDERS.into_iter().skip(1) {
            self.indexes[order_slot(order)].remove(&order.permute(t));
        }
        decrement(&mut self.count_p, t.p.0);
        decrement_pair(&mut self.count_po, (t.p.0, t.o.0));
        decrement_pair(&mut self.count_ps, (t.p.0, t.s.0));
        self.total -= 1;
        true
    }

    /// All triples in SPO order.
    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.indexes[0].iter().map(|k| IndexOrder::Spo.unpermute(*k))
    }

    /// Sorted scan of a pattern through the given order. The order's bound
    /// prefix must cover the pattern's bound components.
    pub fn scan<'a>(
        &'a self,
        pattern: IdPattern,
        order: IndexOrder,
    ) -> Result<impl Iterator<Item = Triple> + 'a, StoreError> {
        if !pattern.compatible(order) {
            return Err(StoreError::IncompatibleOrder { order: order.name() });
        }
        let comps = order.components();
        let mut lo = [0u64; 3];
        let mut hi = [u64::MAX; 3];
        for (i, c) in comps.iter().enumerate() {
            if let Some(v) = pattern.bound(*c) {
                lo[i] = v.0;
                hi[i] = v.0;
            } else {
                break;
            }
        }
        Ok(self.indexes[order_slot(order)]
            .range(lo..=hi)
            .map(move |k| order.unpermute(*k)))
    }

    /// Exact number of matches for a pattern. Patterns binding (p), (p,o) or
    /// (p,s) come from the aggregated tables; everything else probes an index.
    pub fn cardinality(&self, pattern: IdPattern) -> u64 {
        match (pattern.s, pattern.p, pattern.o) {
            (None, None, None) => self.total,
            (None, Some(p), None) => self.count_p.get(&p.0).copied().unwrap_or(0),
            (None, Some(p), Some(o)) => self.count_po.get(&(p.0, o.0)).copied().unwrap_or(0),
            (Some(s), Some(p), None) => self.count_ps.get(&(p.0, s.0)).copied().unwrap_or(0),
            (Some(s), Some(p), Some(o)) => u64::from(self.contains(&Triple::new(s, p, o))),
            _ => {
                let order = pattern.any_order();
                self.scan(pattern, order).map(|it| it.count() as u64).unwrap_or(0)
            }
        }
    }

    /// Bernoulli sample: each triple kept independently with the given
    /// probability. Deterministic for a fixed seed.
    pub fn sample(&self, fraction: f64, seed: u64) -> TripleStore {
        assert!(fraction > 0.0 && fraction <= 1.0, "fraction must be in (0,1]");
        if fraction >= 1.0 {
            return self.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = TripleStore::new();
        for t in self.iter() {
            if rng.gen::<f64>() < fraction {
                out.insert(t);
            }
        }
        out
    }

    pub fn count_per_property(&self) -> &HashMap<u64, u64> {
        &self.count_p
    }

    pub fn count_per_property_object(&self) -> &HashMap<(u64, u64), u64> {
        &self.count_po
    }

    /// Export in SPO order as N-Triples.
    pub fn export(&self, dict: &Dictionary, out: &mut impl std::io::Write) -> std::io::Result<()> {
        crate::ntriples::export_ntriples(self.iter(), dict, out)
    }

    /// Internal consistency: all six indexes hold the same triple set and the
    /// aggregate tables agree with a full scan. Test support.
    pub fn check_consistency(&self) -> bool {
        let base: BTreeSet<Triple> = self.iter().collect();
        for order in ALL_ORDERS {
            let set: BTreeSet<Triple> = self.indexes[order_slot(order)]
                .iter()
                .map(|k| order.unpermute(*k))
                .collect();
            if set != base {
                return false;
            }
        }
        let mut p = HashMap::new();
        let mut po = HashMap::new();
        let mut ps = HashMap::new();
        for t in &base {
            *p.entry(t.p.0).or_insert(0u64) += 1;
            *po.entry((t.p.0, t.o.0)).or_insert(0u64) += 1;
            *ps.entry((t.p.0, t.s.0)).or_insert(0u64) += 1;
        }
        p == self.count_p
            && po == self.count_po
            && ps == self.count_ps
            && self.total == base.len() as u64
    }
}

fn decrement(map: &mut HashMap<u64, u64>, key: u64) {
    if let Some(v) = map.get_mut(&key) {
        *v -= 1;
        if *v == 0 {
            map.remove(&key);
        }
    }
}

fn decrement_pair(map: &mut HashMap<(u64, u64), u64>, key: (u64, u64)) {
    if let Some(v) = map.get_mut(&key) {
        *v -= 1;
        if *v == 0 {
            map.remove(&key);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(s: u64, p: u64, o: u64) -> Triple {
        Triple::new(TermId(s), TermId(p), TermId(o))
    }

    fn random_store(n: usize, seed: u64) -> TripleStore {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = TripleStore::new();
        for _ in 0..n {
            store.insert(t(
                rng.gen_range(1..=30),
                rng.gen_range(1..=8),
                rng.gen_range(1..=30),
            ));
        }
        store
    }

    #[test]
    fn insert_delete_round_trip() {
        let mut store = TripleStore::new();
        assert!(store.insert(t(1, 2, 3)));
        assert!(!store.insert(t(1, 2, 3)));
        assert!(store.delete(&t(1, 2, 3)));
        assert!(!store.delete(&t(1, 2, 3)));
        assert_eq!(store.len(), 0);
        assert!(store.check_consistency());
    }

    #[test]
    fn scan_pos_sorted_by_subject() {
        let mut store = TripleStore::new();
        for s in [5, 1, 9, 3] {
            store.insert(t(s, 7, 2));
        }
        store.insert(t(4, 7, 999)); // same property, different object
        let got: Vec<u64> = store
            .scan(IdPattern::new(None, Some(TermId(7)), Some(TermId(2))), IndexOrder::Pos)
            .unwrap()
            .map(|tr| tr.s.0)
            .collect();
        assert_eq!(got, vec![1, 3, 5, 9]);
    }

    #[test]
    fn full_scan_is_whole_store_in_spo() {
        let store = random_store(200, 7);
        let scanned: Vec<Triple> = store
            .scan(IdPattern::default(), IndexOrder::Spo)
            .unwrap()
            .collect();
        assert_eq!(scanned.len() as u64, store.len());
        let mut sorted = scanned.clone();
        sorted.sort();
        assert_eq!(scanned, sorted);
    }

    #[test]
    fn empty_pattern_scan() {
        let store = random_store(50, 3);
        let n = store
            .scan(IdPattern::new(None, Some(TermId(999)), None), IndexOrder::Pso)
            .unwrap()
            .count();
        assert_eq!(n, 0);
    }

    #[test]
    fn incompatible_order_rejected() {
        let store = random_store(10, 1);
        let err = store.scan(
            IdPattern::new(None, Some(TermId(1)), Some(TermId(1))),
            IndexOrder::Spo,
        );
        assert!(err.is_err());
    }

    #[test]
    fn scan_matches_brute_force_for_all_patterns_and_orders() {
        let store = random_store(600, 11);
        let all: Vec<Triple> = store.iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let pick = |rng: &mut ChaCha8Rng| -> Option<TermId> {
                if rng.gen_bool(0.5) {
                    Some(TermId(rng.gen_range(1..=30)))
                } else {
                    None
                }
            };
            let pattern = IdPattern::new(pick(&mut rng), pick(&mut rng), pick(&mut rng));
            for order in ALL_ORDERS {
                if !pattern.compatible(order) {
                    continue;
                }
                let got: BTreeSet<Triple> = store.scan(pattern, order).unwrap().collect();
                let want: BTreeSet<Triple> =
                    all.iter().filter(|t| pattern.matches(t)).copied().collect();
                assert_eq!(got, want);
                // sortedness in the order's key space
                let keys: Vec<[u64; 3]> = store
                    .scan(pattern, order)
                    .unwrap()
                    .map(|t| order.permute(&t))
                    .collect();
                let mut sorted = keys.clone();
                sorted.sort();
                assert_eq!(keys, sorted);
            }
            assert_eq!(
                store.cardinality(pattern),
                all.iter().filter(|t| pattern.matches(t)).count() as u64
            );
        }
    }

    #[test]
    fn interleaved_updates_keep_indexes_identical() {
        let mut store = TripleStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let tr = t(rng.gen_range(1..=12), rng.gen_range(1..=4), rng.gen_range(1..=12));
            if rng.gen_bool(0.6) {
                store.insert(tr);
            } else {
                store.delete(&tr);
            }
        }
        assert!(store.check_consistency());
    }

    #[test]
    fn fully_bound_cardinality() {
        let mut store = TripleStore::new();
        store.insert(t(1, 2, 3));
        assert_eq!(
            store.cardinality(IdPattern::new(Some(TermId(1)), Some(TermId(2)), Some(TermId(3)))),
            1
        );
        assert_eq!(store.cardinality(IdPattern::default()), 1);
    }

    #[test]
    fn sample_full_fraction_identical() {
        let store = random_store(100, 2);
        let sampled = store.sample(1.0, 42);
        assert_eq!(sampled.len(), store.len());
        let a: Vec<Triple> = store.iter().collect();
        let b: Vec<Triple> = sampled.iter().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_deterministic_for_seed() {
        let store = random_store(500, 8);
        let a: Vec<Triple> = store.sample(0.3, 7).iter().collect();
        let b: Vec<Triple> = store.sample(0.3, 7).iter().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_size_within_binomial_bound() {
        // 100k triples at fraction 0.1: s.d. = sqrt(n*p*(1-p)) ~= 94.9
        let mut store = TripleStore::new();
        let mut id = 1u64;
        for _ in 0..100_000 {
            store.insert(t(id, 1, id + 1));
            id += 2;
        }
        let sampled = store.sample(0.1, 123);
        let sigma = (100_000.0_f64 * 0.1 * 0.9).sqrt();
        let diff = (sampled.len() as f64 - 10_000.0).abs();
        assert!(diff <= 5.0 * sigma, "sample size {} off by {diff}", sampled.len());
        assert!(sampled.check_consistency());
    }
}
