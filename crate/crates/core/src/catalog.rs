//! The coordinator's global catalog: fragment definitions, sizes, host
//! mappings, per-fragment statistics, cost-model constants, and the string
//! dictionary (kept in a side file referenced by `dictionary_path`).

use crate::allocate::{Allocation, RemainderRule};
use crate::fragment::{Fragment, Fragmentation, Minterm, SimplePredicate, REMAINDER_ID};
use crate::model::Dictionary;
use crate::plan::CostModel;
use crate::store::TripleStore;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;
use thiserror::Error;

pub const CATALOG_VERSION: &str = "partout-catalog/1";
pub const PO_STATS_CAP: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HostInfo {
    pub id: u32,
    pub address: String,
    pub capacity_bytes: u64,
}

/// Per-fragment statistics gathered at bootstrap/partitioning time.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragStats {
    pub count: u64,
    pub distinct_s: u64,
    pub distinct_p: u64,
    pub distinct_o: u64,
    /// (property id, count), ascending by property.
    pub per_property: Vec<(u64, u64)>,
    /// ((property, object), count), top entries by count.
    pub per_property_object: Vec<((u64, u64), u64)>,
}

impl FragStats {
    pub fn property_count(&self, p: u64) -> Option<u64> {
        self.per_property
            .binary_search_by_key(&p, |(id, _)| *id)
            .ok()
            .map(|i| self.per_property[i].1)
    }

    pub fn property_object_count(&self, p: u64, o: u64) -> Option<u64> {
        self.per_property_object
            .iter()
            .find(|((pp, oo), _)| *pp == p && *oo == o)
            .map(|(_, c)| *c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct SignedPredEntry {
    pred: SimplePredicate,
    positive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct FragmentEntry {
    id: u32,
    minterm: Vec<SignedPredEntry>,
    size: u64,
    freq: u64,
}

/// On-disk shape of the catalog.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CatalogFile {
    version: String,
    cost_model: CostModel,
    dictionary_path: String,
    fragments: Vec<FragmentEntry>,
    allocation: BTreeMap<u32, u32>,
    remainder: RemainderRule,
    hosts: Vec<HostInfo>,
    stats: BTreeMap<u32, FragStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    pub cost_model: CostModel,
    pub dictionary_path: String,
    pub fragmentation: Fragmentation,
    pub allocation: Allocation,
    pub hosts: Vec<HostInfo>,
    pub stats: BTreeMap<u32, FragStats>,
    pub dictionary: Dictionary,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad catalog json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("catalog version {found:?} unsupported (expected {expected:?})")]
    Version { found: String, expected: String },
    #[error("corrupt catalog: {0}")]
    Corrupt(String),
}

impl Catalog {
    pub fn assemble(
        fragmentation: Fragmentation,
        allocation: Allocation,
        hosts: Vec<(u32, String, u64)>,
        cost_model: CostModel,
        stats: BTreeMap<u32, FragStats>,
        dictionary: Dictionary,
    ) -> Catalog {
        Catalog {
            cost_model,
            dictionary_path: String::new(),
            fragmentation,
            allocation,
            hosts: hosts
                .into_iter()
                .map(|(id, address, capacity_bytes)| HostInfo { id, address, capacity_bytes })
                .collect(),
            stats,
            dictionary,
        }
    }

    pub fn host_count(&self) -> u32 {
        self.hosts.len() as u32
    }

    pub fn host_address(&self, id: u32) -> Option<&str> {
        self.hosts.iter().find(|h| h.id == id).map(|h| h.address.as_str())
    }

    /// Hosts holding data possibly relevant to a fragment: the mapped host,
    /// or every host for the remainder.
    pub fn hosts_of_fragment(&self, fragment: u32) -> Vec<u32> {
        if fragment == REMAINDER_ID {
            self.hosts.iter().map(|h| h.id).collect()
        } else {
            self.allocation.host_of(fragment).into_iter().collect()
        }
    }

    fn to_file(&self) -> CatalogFile {
        let fragments = self
            .fragmentation
            .fragments
            .iter()
            .map(|f| FragmentEntry {
                id: f.id,
                minterm: self
                    .fragmentation
                    .predicates
                    .iter()
                    .zip(&f.minterm.polarity)
                    .map(|(pred, positive)| SignedPredEntry {
                        pred: pred.clone(),
                        positive: *positive,
                    })
                    .collect(),
                size: f.size,
                freq: f.freq,
            })
            .collect();
        CatalogFile {
            version: CATALOG_VERSION.to_string(),
            cost_model: self.cost_model.clone(),
            dictionary_path: self.dictionary_path.clone(),
            fragments,
            allocation: self.allocation.assignment.clone(),
            remainder: self.allocation.remainder.clone(),
            hosts: self.hosts.clone(),
            stats: self.stats.clone(),
        }
    }

    fn from_file(file: CatalogFile, dictionary: Dictionary) -> Result<Catalog, CatalogError> {
        if file.version != CATALOG_VERSION {
            return Err(CatalogError::Version {
                found: file.version,
                expected: CATALOG_VERSION.to_string(),
            });
        }
        // every fragment row carries the same ordered predicate list
        let predicates: Vec<SimplePredicate> = file
            .fragments
            .first()
            .map(|f| f.minterm.iter().map(|e| e.pred.clone()).collect())
            .unwrap_or_default();
        let mut fragments = Vec::new();
        for entry in &file.fragments {
            if entry.minterm.len() != predicates.len()
                || entry.minterm.iter().zip(&predicates).any(|(e, p)| &e.pred != p)
            {
                return Err(CatalogError::Corrupt(format!(
                    "fragment {} has an inconsistent predicate list",
                    entry.id
                )));
            }
            fragments.push(Fragment {
                id: entry.id,
                minterm: Minterm {
                    polarity: entry.minterm.iter().map(|e| e.positive).collect(),
                },
                size: entry.size,
                freq: entry.freq,
            });
        }
        if fragments.last().map(|f| f.id) != Some(REMAINDER_ID) {
            return Err(CatalogError::Corrupt("remainder fragment missing or misplaced".into()));
        }
        for (fragment, host) in &file.allocation {
            if !fragments.iter().any(|f| f.id == *fragment) {
                return Err(CatalogError::Corrupt(format!("allocation maps unknown fragment {}", fragment)));
            }
            if !file.hosts.iter().any(|h| h.id == *host) {
                return Err(CatalogError::Corrupt(format!("allocation maps to unknown host {}", host)));
            }
        }
        Ok(Catalog {
            cost_model: file.cost_model,
            dictionary_path: file.dictionary_path,
            fragmentation: Fragmentation { predicates, fragments },
            allocation: Allocation { assignment: file.allocation, remainder: file.remainder },
            hosts: file.hosts,
            stats: file.stats,
            dictionary,
        })
    }

    /// Serialize the catalog to JSON and the dictionary to a side file next
    /// to it (`<path>.dict` unless `dictionary_path` is already set).
    pub fn save(&mut self, path: &Path) -> Result<(), CatalogError> {
        if self.dictionary_path.is_empty() {
            let name = path
                .file_name()
                .map(|n| format!("{}.dict", n.to_string_lossy()))
                .unwrap_or_else(|| "catalog.dict".to_string());
            self.dictionary_path = name;
        }
        let dict_path = resolve_sibling(path, &self.dictionary_path);
        let mut dict_out = Vec::new();
        self.dictionary.export(&mut dict_out)?;
        std::fs::write(&dict_path, dict_out)?;
        let json = serde_json::to_string_pretty(&self.to_file())?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Catalog, CatalogError> {
        let json = std::fs::read_to_string(path)?;
        let file: CatalogFile = serde_json::from_str(&json)?;
        let dictionary = if file.dictionary_path.is_empty() {
            Dictionary::new()
        } else {
            let dict_path = resolve_sibling(path, &file.dictionary_path);
            let text = std::fs::read_to_string(&dict_path)?;
            Dictionary::import(&text).map_err(CatalogError::Corrupt)?
        };
        Catalog::from_file(file, dictionary)
    }

    /// Serialize without touching the filesystem (wire transfer). The
    /// dictionary travels separately.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("catalog serializes")
    }

    pub fn from_json(json: &str, dictionary: Dictionary) -> Result<Catalog, CatalogError> {
        let file: CatalogFile = serde_json::from_str(json)?;
        Catalog::from_file(file, dictionary)
    }
}

fn resolve_sibling(catalog_path: &Path, name: &str) -> std::path::PathBuf {
    let p = Path::new(name);
    if p.is_absolute() {
        return p.to_path_buf();
    }
    catalog_path.parent().map(|d| d.join(p)).unwrap_or_else(|| p.to_path_buf())
}

/// Classify every triple of the store and accumulate per-fragment counts,
/// distinct counts, per-property counts, and capped (property, object)
/// counts. The remainder accumulates under id 0.
pub fn compute_fragment_stats(
    store: &TripleStore,
    dict: &Dictionary,
    frag: &Fragmentation,
) -> BTreeMap<u32, FragStats> {
    struct Acc {
        count: u64,
        s: HashSet<u64>,
        p: HashSet<u64>,
        o: HashSet<u64>,
        per_p: HashMap<u64, u64>,
        per_po: HashMap<(u64, u64), u64>,
    }
    let mut accs: HashMap<u32, Acc> = HashMap::new();
    for t in store.iter() {
        let id = crate::fragment::fragment_of(&t, frag, dict);
        let acc = accs.entry(id).or_insert_with(|| Acc {
            count: 0,
            s: HashSet::new(),
            p: HashSet::new(),
            o: HashSet::new(),
            per_p: HashMap::new(),
            per_po: HashMap::new(),
        });
        acc.count += 1;
        acc.s.insert(t.s.0);
        acc.p.insert(t.p.0);
        acc.o.insert(t.o.0);
        *acc.per_p.entry(t.p.0).or_insert(0) += 1;
        *acc.per_po.entry((t.p.0, t.o.0)).or_insert(0) += 1;
    }
    let mut out = BTreeMap::new();
    for f in &frag.fragments {
        let stats = match accs.remove(&f.id) {
            None => FragStats::default(),
            Some(acc) => {
                let mut per_property: Vec<(u64, u64)> = acc.per_p.into_iter().collect();
                per_property.sort_unstable();
                let mut per_po: Vec<((u64, u64), u64)> = acc.per_po.into_iter().collect();
                per_po.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
                per_po.truncate(PO_STATS_CAP);
                FragStats {
                    count: acc.count,
                    distinct_s: acc.s.len() as u64,
                    distinct_p: acc.p.len() as u64,
                    distinct_o: acc.o.len() as u64,
                    per_property,
                    per_property_object: per_po,
                }
            }
        };
        out.insert(f.id, stats);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocate::{allocate, build_fragment_graph, FragmentLoad, HostSpec};
    use crate::datagen;
    use crate::fragment::{partition, PartitionConfig};
    use crate::workload::build_global_query_graph;
    use tempfile::tempdir;

    fn example_catalog() -> Catalog {
        let (store, dict) = datagen::example_dataset();
        let ql = datagen::example_query_log();
        let config = PartitionConfig { theta: 2, fraction: 1.0, seed: 1, predicate_cap: 24 };
        let frag = partition(&store, &dict, &ql, &config).unwrap();
        let g = build_global_query_graph(&ql, 2);
        let fg = build_fragment_graph(&g, &frag);
        let hosts: Vec<HostSpec> =
            (0..3).map(|id| HostSpec { id, capacity_bytes: u64::MAX }).collect();
        let allocation =
            allocate(&FragmentLoad::from_fragmentation(&frag), &fg, &hosts, 100).unwrap();
        let stats = compute_fragment_stats(&store, &dict, &frag);
        Catalog::assemble(
            frag,
            allocation,
            (0..3).map(|i| (i, format!("127.0.0.1:{}", 7000 + i), u64::MAX)).collect(),
            CostModel::default(),
            stats,
            dict,
        )
    }

    #[test]
    fn stats_cover_all_fragments() {
        let cat = example_catalog();
        let total: u64 = cat.stats.values().map(|s| s.count).sum();
        assert_eq!(total, 19_500);
        // fragment sizes agree with the stats counts at fraction 1.0
        for f in &cat.fragmentation.fragments {
            assert_eq!(cat.stats[&f.id].count, f.size, "fragment {}", f.id);
        }
    }

    #[test]
    fn round_trip_bit_identical() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("catalog.json");
        let mut cat = example_catalog();
        cat.save(&path).unwrap();
        let loaded = Catalog::load(&path).unwrap();
        assert_eq!(cat, loaded);
        // saving the loaded catalog produces identical bytes
        let mut loaded2 = loaded.clone();
        let path2 = dir.path().join("catalog2.json");
        loaded2.dictionary_path = String::new();
        loaded2.save(&path2).unwrap();
        let a = std::fs::read_to_string(&path).unwrap();
        let b = std::fs::read_to_string(&path2).unwrap();
        // dictionary_path differs by file name; normalize before compare
        assert_eq!(
            a.replace("catalog.json.dict", "X"),
            b.replace("catalog2.json.dict", "X")
        );
    }

    #[test]
    fn empty_catalog_round_trips() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("empty.json");
        let frag = Fragmentation {
            predicates: vec![],
            fragments: vec![Fragment {
                id: REMAINDER_ID,
                minterm: Minterm { polarity: vec![] },
                freq: 0,
                size: 0,
            }],
        };
        let mut cat = Catalog::assemble(
            frag,
            Allocation {
                assignment: BTreeMap::new(),
                remainder: RemainderRule { hash: "fnv1a-subject".into(), hosts: 1 },
            },
            vec![(0, "127.0.0.1:7000".into(), 1000)],
            CostModel::default(),
            BTreeMap::new(),
            Dictionary::new(),
        );
        cat.save(&path).unwrap();
        let loaded = Catalog::load(&path).unwrap();
        assert_eq!(cat, loaded);
    }

    #[test]
    fn unknown_version_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("catalog.json");
        let mut cat = example_catalog();
        cat.save(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let bad = text.replace(CATALOG_VERSION, "partout-catalog/99");
        std::fs::write(&path, bad).unwrap();
        match Catalog::load(&path) {
            Err(CatalogError::Version { found, .. }) => {
                assert_eq!(found, "partout-catalog/99");
            }
            other => panic!("expected version error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn corrupt_allocation_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("catalog.json");
        let mut cat = example_catalog();
        cat.allocation.assignment.insert(999, 0);
        cat.save(&path).unwrap();
        assert!(matches!(Catalog::load(&path), Err(CatalogError::Corrupt(_))));
    }
}
