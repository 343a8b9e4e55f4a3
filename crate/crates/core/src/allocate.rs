//! Fragment allocation: the global fragment query graph, the benefit-driven
//! greedy assignment under space constraints, remainder hash partitioning,
//! and the optimal-host-count sweep.

use crate::fragment::{overlaps, Fragmentation, REMAINDER_ID};
use crate::model::Dictionary;
use crate::workload::GlobalQueryGraph;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Fragments as nodes, join-witness weights as edges. Self-loops are kept.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FragmentQueryGraph {
    pub nodes: BTreeSet<u32>,
    weights: BTreeMap<(u32, u32), u64>,
}

impl FragmentQueryGraph {
    pub fn new(nodes: impl IntoIterator<Item = u32>) -> FragmentQueryGraph {
        FragmentQueryGraph { nodes: nodes.into_iter().collect(), weights: BTreeMap::new() }
    }

    pub fn add_weight(&mut self, a: u32, b: u32, w: u64) {
        if w == 0 {
            return;
        }
        let key = if a <= b { (a, b) } else { (b, a) };
        *self.weights.entry(key).or_insert(0) += w;
    }

    pub fn weight(&self, a: u32, b: u32) -> u64 {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.weights.get(&key).copied().unwrap_or(0)
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, u64)> + '_ {
        self.weights.iter().map(|((a, b), w)| (*a, *b, *w))
    }
}

/// G(QL, M): edge {a, b} sums the weights of all global-query-graph edges
/// {p, r} with a overlapping p and b overlapping r, either orientation, each
/// pattern edge counted once per fragment pair.
pub fn build_fragment_graph(g: &GlobalQueryGraph, frag: &Fragmentation) -> FragmentQueryGraph {
    let mut out = FragmentQueryGraph::new(frag.fragments.iter().map(|f| f.id));
    for ((p, r), w) in &g.edges {
        let a_side: Vec<u32> = frag
            .fragments
            .iter()
            .filter(|f| overlaps(&frag.predicates, &f.minterm, p))
            .map(|f| f.id)
            .collect();
        let b_side: Vec<u32> = frag
            .fragments
            .iter()
            .filter(|f| overlaps(&frag.predicates, &f.minterm, r))
            .map(|f| f.id)
            .collect();
        let mut pairs: BTreeSet<(u32, u32)> = BTreeSet::new();
        for &a in &a_side {
            for &b in &b_side {
                pairs.insert(if a <= b { (a, b) } else { (b, a) });
            }
        }
        for (a, b) in pairs {
            out.add_weight(a, b, *w);
        }
    }
    out
}

/// Host description at allocation time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HostSpec {
    pub id: u32,
    pub capacity_bytes: u64,
}

/// What the greedy needs to know about one fragment. `load` is carried
/// explicitly so fixtures can reproduce published tables verbatim.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FragmentLoad {
    pub id: u32,
    pub size: u64,
    pub load: u64,
}

impl FragmentLoad {
    pub fn from_fragmentation(frag: &Fragmentation) -> Vec<FragmentLoad> {
        frag.non_remainder()
            .iter()
            .map(|f| FragmentLoad { id: f.id, size: f.size, load: f.load() })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemainderRule {
    /// Hash function name; fixed to subject-keyed 64-bit FNV-1a.
    pub hash: String,
    pub hosts: u32,
}

pub const REMAINDER_HASH_NAME: &str = "fnv1a-subject";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    /// Non-remainder fragment -> host.
    pub assignment: BTreeMap<u32, u32>,
    pub remainder: RemainderRule,
}

impl Allocation {
    pub fn host_of(&self, fragment: u32) -> Option<u32> {
        self.assignment.get(&fragment).copied()
    }

    pub fn fragments_of(&self, host: u32) -> Vec<u32> {
        self.assignment.iter().filter(|(_, h)| **h == host).map(|(f, _)| *f).collect()
    }
}

#[derive(Debug, Error)]
pub enum AllocError {
    #[error("no feasible host for fragment {fragment}: needs {needed} bytes, best remaining {best_remaining}")]
    NoFeasibleHost { fragment: u32, needed: u64, best_remaining: u64 },
    #[error("no hosts supplied")]
    NoHosts,
}

/// Eq. 4 benefit of placing `fragment` on a host currently holding
/// `resident` with load `host_load`: (2U / (U + CL_h)) * A, where A sums
/// (w(m, m') + 1) over residents and is 1 for an empty host.
pub fn benefit(
    fragment: u32,
    resident: &[u32],
    host_load: f64,
    uniform: f64,
    graph: &FragmentQueryGraph,
) -> f64 {
    let balance = (2.0 * uniform) / (uniform + host_load);
    let affinity = if resident.is_empty() {
        1.0
    } else {
        resident.iter().map(|m| graph.weight(fragment, *m) as f64 + 1.0).sum()
    };
    balance * affinity
}

/// Greedy allocation: fragments in descending load (ties ascending id), each
/// to the feasible maximal-benefit host (ties lowest host id). The remainder
/// fragment is excluded and hash-partitioned over all hosts.
pub fn allocate(
    fragments: &[FragmentLoad],
    graph: &FragmentQueryGraph,
    hosts: &[HostSpec],
    triple_bytes: u64,
) -> Result<Allocation, AllocError> {
    if hosts.is_empty() {
        return Err(AllocError::NoHosts);
    }
    let total_load: u64 = fragments.iter().map(|f| f.load).sum();
    let uniform = total_load as f64 / hosts.len() as f64;

    let mut order: Vec<&FragmentLoad> = fragments.iter().collect();
    order.sort_by(|a, b| b.load.cmp(&a.load).then(a.id.cmp(&b.id)));

    let mut resident: BTreeMap<u32, Vec<u32>> = hosts.iter().map(|h| (h.id, Vec::new())).collect();
    let mut load: BTreeMap<u32, f64> = hosts.iter().map(|h| (h.id, 0.0)).collect();
    let mut used: BTreeMap<u32, u64> = hosts.iter().map(|h| (h.id, 0)).collect();
    let mut assignment = BTreeMap::new();

    for f in order {
        let needed = f.size.saturating_mul(triple_bytes);
        let mut best: Option<(u32, f64)> = None;
        let mut best_remaining = 0u64;
        for h in hosts {
            let remaining = h.capacity_bytes.saturating_sub(used[&h.id]);
            best_remaining = best_remaining.max(remaining);
            if remaining < needed {
                continue;
            }
            let b = benefit(f.id, &resident[&h.id], load[&h.id], uniform, graph);
            match best {
                None => best = Some((h.id, b)),
                Some((_, cur)) if b > cur => best = Some((h.id, b)),
                _ => {}
            }
        }
        let (host, _) = best.ok_or(AllocError::NoFeasibleHost {
            fragment: f.id,
            needed,
            best_remaining,
        })?;
        resident.get_mut(&host).unwrap().push(f.id);
        *load.get_mut(&host).unwrap() += f.load as f64;
        *used.get_mut(&host).unwrap() += needed;
        assignment.insert(f.id, host);
    }

    Ok(Allocation {
        assignment,
        remainder: RemainderRule {
            hash: REMAINDER_HASH_NAME.to_string(),
            hosts: hosts.len() as u32,
        },
    })
}

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Host for a remainder triple: FNV-1a of the subject's lexical form modulo
/// the host count, so star queries stay host-local.
pub fn remainder_host(subject_lexical: &str, rule: &RemainderRule) -> u32 {
    (fnv1a(subject_lexical.as_bytes()) % rule.hosts as u64) as u32
}

pub fn remainder_host_for(
    triple: &crate::model::Triple,
    rule: &RemainderRule,
    dict: &Dictionary,
) -> u32 {
    let lex = dict.term(triple.s).map(|t| t.lexical.as_str()).unwrap_or("");
    remainder_host(lex, rule)
}

/// Sweep result of the optimal-host-count search.
#[derive(Debug, Clone)]
pub struct HostSweep {
    pub best_n: u32,
    /// (n, summed estimated cost over the workload).
    pub sweep: Vec<(u32, f64)>,
}

/// Run allocation and planning for each candidate host count and return the
/// count minimizing the summed plan cost estimate over the workload
/// (multiplicity-weighted; ties pick the smallest n).
pub fn optimal_host_count(
    store: &crate::store::TripleStore,
    dict: &Dictionary,
    ql: &crate::workload::QueryLog,
    frag: &Fragmentation,
    graph: &FragmentQueryGraph,
    n_range: impl IntoIterator<Item = u32>,
    cost_model: &crate::plan::CostModel,
    capacity_per_host: u64,
    triple_bytes: u64,
) -> Result<HostSweep, String> {
    let stats = crate::catalog::compute_fragment_stats(store, dict, frag);
    let loads = FragmentLoad::from_fragmentation(frag);
    let mut sweep = Vec::new();
    let mut best: Option<(u32, f64)> = None;
    for n in n_range {
        if n == 0 {
            continue;
        }
        let hosts: Vec<HostSpec> = (0..n)
            .map(|id| HostSpec { id, capacity_bytes: capacity_per_host })
            .collect();
        let allocation =
            allocate(&loads, graph, &hosts, triple_bytes).map_err(|e| e.to_string())?;
        let catalog = crate::catalog::Catalog::assemble(
            frag.clone(),
            allocation,
            hosts.iter().map(|h| (h.id, String::new(), h.capacity_bytes)).collect(),
            cost_model.clone(),
            stats.clone(),
            dict.clone(),
        );
        let mut total = 0.0;
        for (query, mult) in &ql.entries {
            if crate::sparql::validate_executable(query) != crate::sparql::Executable::Ok {
                continue;
            }
            let plan = crate::plan::plan_query(query, &catalog).map_err(|e| e.to_string())?;
            total += crate::plan::cost(&plan, cost_model) * (*mult as f64);
        }
        sweep.push((n, total));
        match best {
            None => best = Some((n, total)),
            Some((_, cur)) if total < cur => best = Some((n, total)),
            _ => {}
        }
    }
    let (best_n, _) = best.ok_or("empty host-count range")?;
    Ok(HostSweep { best_n, sweep })
}

/// The remainder fragment id as used in graphs and catalogs.
pub fn remainder_fragment_id() -> u32 {
    REMAINDER_ID
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn table2_fixture() -> (Vec<FragmentLoad>, FragmentQueryGraph) {
        // printed (f, s, L) values, loads taken verbatim
        let loads = vec![
            FragmentLoad { id: 1, size: 2000, load: 22000 },
            FragmentLoad { id: 2, size: 4499, load: 9998 },
            FragmentLoad { id: 3, size: 3000, load: 9000 },
            FragmentLoad { id: 4, size: 3000, load: 3000 },
            FragmentLoad { id: 5, size: 2000, load: 2000 },
            FragmentLoad { id: 6, size: 1700, load: 1700 },
            FragmentLoad { id: 7, size: 300, load: 900 },
            FragmentLoad { id: 8, size: 1, load: 10 },
        ];
        let mut g = FragmentQueryGraph::new(1..=8);
        g.add_weight(1, 8, 10);
        g.add_weight(3, 7, 2);
        g.add_weight(7, 2, 2);
        g.add_weight(3, 6, 1);
        g.add_weight(6, 4, 1);
        g.add_weight(5, 7, 1);
        (loads, g)
    }

    fn ample_hosts(n: u32) -> Vec<HostSpec> {
        (0..n).map(|id| HostSpec { id, capacity_bytes: u64::MAX }).collect()
    }

    #[test]
    fn benefit_empty_host_is_exactly_two() {
        let (loads, g) = table2_fixture();
        let total: u64 = loads.iter().map(|f| f.load).sum();
        assert_eq!(total, 48608);
        let uniform = total as f64 / 3.0;
        assert!((uniform - 16202.67).abs() < 0.01);
        for f in &loads {
            let b = benefit(f.id, &[], 0.0, uniform, &g);
            assert_eq!(b, 2.0);
        }
    }

    #[test]
    fn benefit_fragment2_on_host_holding_1() {
        let (loads, g) = table2_fixture();
        let total: u64 = loads.iter().map(|f| f.load).sum();
        let uniform = total as f64 / 3.0;
        let b = benefit(2, &[1], 22000.0, uniform, &g);
        assert!((b - 0.8482).abs() < 0.0005, "got {}", b);
    }

    #[test]
    fn paper_allocation_reproduced() {
        let (loads, g) = table2_fixture();
        let alloc = allocate(&loads, &g, &ample_hosts(3), 100).unwrap();
        let mut by_host: HashMap<u32, Vec<u32>> = HashMap::new();
        for (f, h) in &alloc.assignment {
            by_host.entry(*h).or_default().push(*f);
        }
        for v in by_host.values_mut() {
            v.sort();
        }
        assert_eq!(by_host.get(&0), Some(&vec![1, 8]));
        assert_eq!(by_host.get(&1), Some(&vec![2]));
        assert_eq!(by_host.get(&2), Some(&vec![3, 4, 5, 6, 7]));
    }

    #[test]
    fn single_host_takes_everything() {
        let (loads, g) = table2_fixture();
        let alloc = allocate(&loads, &g, &ample_hosts(1), 100).unwrap();
        assert!(alloc.assignment.values().all(|h| *h == 0));
        assert_eq!(alloc.remainder.hosts, 1);
    }

    #[test]
    fn capacity_forces_next_best_host() {
        let loads = vec![
            FragmentLoad { id: 1, size: 10, load: 100 },
            FragmentLoad { id: 2, size: 10, load: 90 },
        ];
        let g = FragmentQueryGraph::new(1..=2);
        // host 0 can hold exactly one 10-triple fragment at 100 bytes each
        let hosts = vec![
            HostSpec { id: 0, capacity_bytes: 1000 },
            HostSpec { id: 1, capacity_bytes: 1000 },
        ];
        let alloc = allocate(&loads, &g, &hosts, 100).unwrap();
        assert_eq!(alloc.host_of(1), Some(0));
        assert_eq!(alloc.host_of(2), Some(1)); // host 0 is full, next best feasible
        let hosts = vec![HostSpec { id: 0, capacity_bytes: 1500 }];
        let err = allocate(&loads, &g, &hosts, 100);
        assert!(err.is_err()); // second fragment does not fit anywhere
    }

    #[test]
    fn capacity_invariant_holds_after_allocation() {
        let (loads, g) = table2_fixture();
        let hosts: Vec<HostSpec> =
            (0..3).map(|id| HostSpec { id, capacity_bytes: 800_000 }).collect();
        let alloc = allocate(&loads, &g, &hosts, 100).unwrap();
        for h in &hosts {
            let used: u64 = loads
                .iter()
                .filter(|f| alloc.host_of(f.id) == Some(h.id))
                .map(|f| f.size * 100)
                .sum();
            assert!(used <= h.capacity_bytes);
        }
    }

    #[test]
    fn deterministic_allocation() {
        let (loads, g) = table2_fixture();
        let a = allocate(&loads, &g, &ample_hosts(3), 100).unwrap();
        let b = allocate(&loads, &g, &ample_hosts(3), 100).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_edges_balance_within_max_load() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let k = rng.gen_range(2..=8usize);
            let loads: Vec<FragmentLoad> = (0..k)
                .map(|i| {
                    let l = rng.gen_range(1..=1000u64);
                    FragmentLoad { id: i as u32 + 1, size: l, load: l }
                })
                .collect();
            let g = FragmentQueryGraph::new(loads.iter().map(|f| f.id));
            let n = rng.gen_range(2..=3u32);
            let alloc = allocate(&loads, &g, &ample_hosts(n), 1).unwrap();
            let mut host_load = vec![0u64; n as usize];
            for f in &loads {
                host_load[alloc.host_of(f.id).unwrap() as usize] += f.load;
            }
            let max = *host_load.iter().max().unwrap();
            let min = *host_load.iter().min().unwrap();
            let max_item = loads.iter().map(|f| f.load).max().unwrap();
            assert!(
                max - min <= max_item,
                "spread {} > max item {} (loads {:?})",
                max - min,
                max_item,
                host_load
            );
        }
    }

    #[test]
    fn remainder_hash_subject_keyed() {
        let rule = RemainderRule { hash: REMAINDER_HASH_NAME.into(), hosts: 3 };
        let a = remainder_host("http://example.org/s1", &rule);
        let b = remainder_host("http://example.org/s1", &rule);
        assert_eq!(a, b);
        let one = RemainderRule { hash: REMAINDER_HASH_NAME.into(), hosts: 1 };
        assert_eq!(remainder_host("anything", &one), 0);
    }

    #[test]
    fn remainder_hash_balances() {
        let rule = RemainderRule { hash: REMAINDER_HASH_NAME.into(), hosts: 4 };
        let mut counts = [0u64; 4];
        for i in 0..10_000 {
            let h = remainder_host(&format!("http://example.org/subject/{}", i), &rule);
            counts[h as usize] += 1;
        }
        for c in counts {
            let dev = (c as f64 - 2500.0).abs() / 2500.0;
            assert!(dev <= 0.10, "host share {} deviates {:.3}", c, dev);
        }
    }

    #[test]
    fn fnv1a_known_vectors() {
        // standard FNV-1a 64 test vectors
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn fragment_graph_single_edge_weight_is_multiplicity() {
        use crate::sparql::parse_sparql;
        use crate::workload::{build_global_query_graph, QueryLog};
        // one query (x5), two patterns on distinct properties
        let q = parse_sparql(
            "SELECT * WHERE { ?s <http://t/pa> ?a . ?s <http://t/pb> ?b . }",
        )
        .unwrap();
        let ql = QueryLog::new(vec![(q, 5)]);
        let g = build_global_query_graph(&ql, 2);
        // two-fragment fragmentation: prop=pa and prop=pb
        let mut dict = Dictionary::new();
        let data = "<http://t/s1> <http://t/pa> <http://t/o1> .\n\
                    <http://t/s1> <http://t/pb> <http://t/o2> .\n\
                    <http://t/s2> <http://t/pc> <http://t/o3> .\n";
        let triples = crate::ntriples::parse_ntriples_str(data, &mut dict).unwrap();
        let store = crate::store::TripleStore::from_triples(triples);
        let frag = crate::fragment::by_property_fragmentation(&store, &dict, &ql, 2, 1.0, 1);
        let fg = build_fragment_graph(&g, &frag);
        let (a, b) = (frag.non_remainder()[0].id, frag.non_remainder()[1].id);
        assert_eq!(fg.weight(a, b), 5);
        // the remainder fragment holds pc and overlaps no pattern: isolated
        assert!(fg.edges().all(|(x, y, _)| x != REMAINDER_ID && y != REMAINDER_ID));
    }
}
