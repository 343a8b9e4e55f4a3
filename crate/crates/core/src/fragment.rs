//! Minterm fragmentation: simple predicates mined from the workload,
//! satisfiability-pruned minterm enumeration, the COM_MIN reduction driven
//! by load signatures, per-fragment statistics, and triple routing.

use crate::model::{compare_values, Dictionary, Term, Triple};
use crate::sparql::{CmpOp, FilterExpr};
use crate::store::{Component, TripleStore};
use crate::workload::{collect_filters, AnonPattern, QueryLog};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TypeFunc {
    IsIri,
    IsLiteral,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PredForm {
    Compare(CmpOp, Term),
    Func(TypeFunc),
}

/// An atomic constraint on one triple component.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SimplePredicate {
    pub component: Component,
    pub form: PredForm,
}

impl SimplePredicate {
    pub fn eq(component: Component, term: Term) -> SimplePredicate {
        SimplePredicate { component, form: PredForm::Compare(CmpOp::Eq, term) }
    }

    pub fn cmp(component: Component, op: CmpOp, term: Term) -> SimplePredicate {
        SimplePredicate { component, form: PredForm::Compare(op, term) }
    }

    fn component_rank(&self) -> u8 {
        // deterministic tie-break order: prop before obj before subj
        match self.component {
            Component::Prop => 0,
            Component::Obj => 1,
            Component::Subj => 2,
        }
    }

    pub fn eval_term(&self, term: &Term) -> bool {
        match &self.form {
            PredForm::Compare(CmpOp::Eq, c) => term == c,
            PredForm::Compare(op, c) => op.eval(compare_values(term, c)),
            PredForm::Func(TypeFunc::IsIri) => term.is_iri(),
            PredForm::Func(TypeFunc::IsLiteral) => !term.is_iri(),
        }
    }

    pub fn eval(&self, s: &Term, p: &Term, o: &Term) -> bool {
        match self.component {
            Component::Subj => self.eval_term(s),
            Component::Prop => self.eval_term(p),
            Component::Obj => self.eval_term(o),
        }
    }
}

impl fmt::Display for SimplePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let comp = match self.component {
            Component::Subj => "subj",
            Component::Prop => "prop",
            Component::Obj => "obj",
        };
        match &self.form {
            PredForm::Compare(op, t) => write!(f, "{}{}{}", comp, op.symbol(), t),
            PredForm::Func(TypeFunc::IsIri) => write!(f, "isIRI({})", comp),
            PredForm::Func(TypeFunc::IsLiteral) => write!(f, "isLiteral({})", comp),
        }
    }
}

impl PartialOrd for SimplePredicate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SimplePredicate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.component_rank()
            .cmp(&other.component_rank())
            .then_with(|| self.to_string().cmp(&other.to_string()))
    }
}

/// Polarity assignment over an ordered predicate list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Minterm {
    pub polarity: Vec<bool>,
}

impl Minterm {
    pub fn remainder(len: usize) -> Minterm {
        Minterm { polarity: vec![false; len] }
    }

    pub fn is_all_negative(&self) -> bool {
        self.polarity.iter().all(|b| !b)
    }

    pub fn satisfied_by(&self, preds: &[SimplePredicate], s: &Term, p: &Term, o: &Term) -> bool {
        self.polarity
            .iter()
            .zip(preds)
            .all(|(want, pred)| pred.eval(s, p, o) == *want)
    }

    /// Table-2 style rendering: positive predicates joined, `ζ` standing for
    /// every unmentioned predicate in negated form.
    pub fn display(&self, preds: &[SimplePredicate]) -> String {
        let mut parts: Vec<String> = self
            .polarity
            .iter()
            .zip(preds)
            .filter(|(pos, _)| **pos)
            .map(|(_, p)| p.to_string())
            .collect();
        if parts.is_empty() {
            return "ζ (remainder)".to_string();
        }
        parts.push("ζ".to_string());
        parts.join(" ∧ ")
    }
}

pub const REMAINDER_ID: u32 = 0;

/// A fragment: a minterm plus its access frequency and size. Id 0 is the
/// remainder fragment (the all-negative minterm).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragment {
    pub id: u32,
    pub minterm: Minterm,
    pub freq: u64,
    pub size: u64,
}

impl Fragment {
    pub fn load(&self) -> u64 {
        self.freq * self.size
    }

    pub fn is_remainder(&self) -> bool {
        self.id == REMAINDER_ID
    }
}

/// Ordered fragments over an ordered predicate list; non-remainder fragments
/// first (descending load), remainder last.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragmentation {
    pub predicates: Vec<SimplePredicate>,
    pub fragments: Vec<Fragment>,
}

impl Fragmentation {
    pub fn remainder(&self) -> &Fragment {
        self.fragments.last().expect("fragmentation always has a remainder")
    }

    pub fn non_remainder(&self) -> &[Fragment] {
        &self.fragments[..self.fragments.len() - 1]
    }

    pub fn fragment(&self, id: u32) -> Option<&Fragment> {
        self.fragments.iter().find(|f| f.id == id)
    }

    /// Human-readable dump: `id | minterm | freq | size | load` per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for f in &self.fragments {
            out.push_str(&format!(
                "{} | {} | {} | {} | {}\n",
                f.id,
                f.minterm.display(&self.predicates),
                f.freq,
                f.size,
                f.load()
            ));
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum FragmentError {
    #[error("predicate set too large after reduction: {got} > cap {cap}")]
    PredicateSetTooLarge { got: usize, cap: usize },
}

pub const DEFAULT_PREDICATE_CAP: usize = 24;

// ---------------------------------------------------------------------------
// Simple predicate extraction

/// Simple predicates from the anonymized patterns plus filter-derived
/// comparison/function predicates at every component where the filter
/// variable occurs. Property predicates other than IRI equality are skipped
/// (the predicate language does not admit them).
pub fn extract_simple_predicates(
    phi: &BTreeMap<AnonPattern, u64>,
    ql: &QueryLog,
) -> Vec<SimplePredicate> {
    let mut set: BTreeSet<SimplePredicate> = BTreeSet::new();
    for pattern in phi.keys() {
        for (component, term) in [
            (Component::Subj, &pattern.s),
            (Component::Prop, &pattern.p),
            (Component::Obj, &pattern.o),
        ] {
            if let Some(c) = term.as_const() {
                if component == Component::Prop && !c.is_iri() {
                    continue;
                }
                set.insert(SimplePredicate::eq(component, c.clone()));
            }
        }
    }
    for (filter, positions) in collect_filters(ql) {
        for component in positions {
            match &filter {
                FilterExpr::Compare { op, value, .. } => {
                    if component == Component::Prop && (*op != CmpOp::Eq || !value.is_iri()) {
                        continue;
                    }
                    set.insert(SimplePredicate::cmp(component, *op, value.clone()));
                }
                FilterExpr::IsIri { .. } => {
                    set.insert(SimplePredicate {
                        component,
                        form: PredForm::Func(TypeFunc::IsIri),
                    });
                }
                FilterExpr::IsLiteral { .. } => {
                    set.insert(SimplePredicate {
                        component,
                        form: PredForm::Func(TypeFunc::IsLiteral),
                    });
                }
            }
        }
    }
    set.into_iter().collect()
}

// ---------------------------------------------------------------------------
// Satisfiability

/// One signed constraint on a component.
#[derive(Debug, Clone)]
pub struct SignedPredicate<'a> {
    pub pred: &'a SimplePredicate,
    pub positive: bool,
}

/// Conservative satisfiability of a conjunction of signed predicates:
/// detects contradicting positive equalities, equality against its own
/// negation, equality violating a positive comparison, empty comparison
/// intervals, and isIRI together with isLiteral. Anything else is assumed
/// satisfiable.
pub fn satisfiable(constraints: &[SignedPredicate<'_>]) -> bool {
    for component in [Component::Subj, Component::Prop, Component::Obj] {
        let mut pos_eq: Vec<&Term> = Vec::new();
        let mut neg_eq: Vec<&Term> = Vec::new();
        let mut pos_cmp: Vec<(CmpOp, &Term)> = Vec::new();
        let mut pos_isiri = false;
        let mut pos_isliteral = false;
        for c in constraints.iter().filter(|c| c.pred.component == component) {
            match (&c.pred.form, c.positive) {
                (PredForm::Compare(CmpOp::Eq, t), true) => pos_eq.push(t),
                (PredForm::Compare(CmpOp::Eq, t), false) => neg_eq.push(t),
                (PredForm::Compare(op, t), true) => pos_cmp.push((*op, t)),
                (PredForm::Compare(_, _), false) => {}
                (PredForm::Func(TypeFunc::IsIri), true) => pos_isiri = true,
                (PredForm::Func(TypeFunc::IsLiteral), true) => pos_isliteral = true,
                (PredForm::Func(_), false) => {}
            }
        }
        if pos_isiri && pos_isliteral {
            return false;
        }
        for i in 0..pos_eq.len() {
            for j in (i + 1)..pos_eq.len() {
                if pos_eq[i] != pos_eq[j] {
                    return false;
                }
            }
        }
        for e in &pos_eq {
            if neg_eq.iter().any(|n| n == e) {
                return false;
            }
            for (op, t) in &pos_cmp {
                if !op.eval(compare_values(e, t)) {
                    return false;
                }
            }
        }
        if !interval_satisfiable(&pos_cmp) {
            return false;
        }
    }
    true
}

/// Lower/upper bound intersection over the value order, treating the domain
/// as dense.
fn interval_satisfiable(cmps: &[(CmpOp, &Term)]) -> bool {
    let mut lower: Option<(&Term, bool)> = None; // (bound, strict)
    let mut upper: Option<(&Term, bool)> = None;
    for (op, t) in cmps {
        match op {
            CmpOp::Gt | CmpOp::Ge => {
                let strict = *op == CmpOp::Gt;
                lower = Some(match lower {
                    None => (t, strict),
                    Some((cur, cur_strict)) => match compare_values(t, cur) {
                        std::cmp::Ordering::Greater => (t, strict),
                        std::cmp::Ordering::Equal => (cur, cur_strict || strict),
                        std::cmp::Ordering::Less => (cur, cur_strict),
                    },
                });
            }
            CmpOp::Lt | CmpOp::Le => {
                let strict = *op == CmpOp::Lt;
                upper = Some(match upper {
                    None => (t, strict),
                    Some((cur, cur_strict)) => match compare_values(t, cur) {
                        std::cmp::Ordering::Less => (t, strict),
                        std::cmp::Ordering::Equal => (cur, cur_strict || strict),
                        std::cmp::Ordering::Greater => (cur, cur_strict),
                    },
                });
            }
            CmpOp::Eq => unreachable!("equalities handled separately"),
        }
    }
    match (lower, upper) {
        (Some((lo, lo_strict)), Some((hi, hi_strict))) => match compare_values(lo, hi) {
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => !(lo_strict || hi_strict),
            std::cmp::Ordering::Less => true,
        },
        _ => true,
    }
}

/// Satisfiability of a full minterm over its predicate list.
pub fn minterm_satisfiable(preds: &[SimplePredicate], minterm: &Minterm) -> bool {
    let signed: Vec<SignedPredicate<'_>> = preds
        .iter()
        .zip(&minterm.polarity)
        .map(|(pred, pos)| SignedPredicate { pred, positive: *pos })
        .collect();
    satisfiable(&signed)
}

/// Logical overlap test between a minterm and an anonymized pattern: the
/// conjunction of the minterm with the pattern's positional equality
/// constraints is satisfiable. No data access.
pub fn overlaps(preds: &[SimplePredicate], minterm: &Minterm, pattern: &AnonPattern) -> bool {
    let mut signed: Vec<SignedPredicate<'_>> = preds
        .iter()
        .zip(&minterm.polarity)
        .map(|(pred, pos)| SignedPredicate { pred, positive: *pos })
        .collect();
    let mut extra: Vec<SimplePredicate> = Vec::new();
    for (component, term) in [
        (Component::Subj, &pattern.s),
        (Component::Prop, &pattern.p),
        (Component::Obj, &pattern.o),
    ] {
        if let Some(c) = term.as_const() {
            extra.push(SimplePredicate::eq(component, c.clone()));
        }
    }
    let extra_refs: Vec<SignedPredicate<'_>> = extra
        .iter()
        .map(|pred| SignedPredicate { pred, positive: true })
        .collect();
    signed.extend(extra_refs);
    satisfiable(&signed)
}

// ---------------------------------------------------------------------------
// Minterm enumeration over a sample

/// Triples decoded once for repeated predicate evaluation.
pub struct DecodedSample<'a> {
    pub terms: Vec<[&'a Term; 3]>,
}

impl<'a> DecodedSample<'a> {
    pub fn new(store: &TripleStore, dict: &'a Dictionary) -> DecodedSample<'a> {
        let terms = store
            .iter()
            .map(|t| {
                [
                    dict.term(t.s).expect("subject id in dictionary"),
                    dict.term(t.p).expect("property id in dictionary"),
                    dict.term(t.o).expect("object id in dictionary"),
                ]
            })
            .collect();
        DecodedSample { terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Minterms with their matching sample counts: recursive refinement keeping
/// branches that match at least one sample triple, plus the all-negative
/// remainder unconditionally.
pub fn generate_minterms(
    preds: &[SimplePredicate],
    sample: &DecodedSample<'_>,
    cap: usize,
) -> Result<Vec<(Minterm, u64)>, FragmentError> {
    if preds.len() > cap {
        return Err(FragmentError::PredicateSetTooLarge { got: preds.len(), cap });
    }
    let mut out: Vec<(Minterm, u64)> = Vec::new();
    let all: Vec<u32> = (0..sample.len() as u32).collect();
    refine(preds, sample, 0, &mut Vec::new(), &all, &mut out);
    // remainder present even when empty
    if !out.iter().any(|(m, _)| m.is_all_negative()) {
        out.push((Minterm::remainder(preds.len()), 0));
    }
    Ok(out)
}

fn refine(
    preds: &[SimplePredicate],
    sample: &DecodedSample<'_>,
    depth: usize,
    polarity: &mut Vec<bool>,
    matching: &[u32],
    out: &mut Vec<(Minterm, u64)>,
) {
    if depth == preds.len() {
        if !matching.is_empty() || polarity.iter().all(|b| !b) {
            out.push((Minterm { polarity: polarity.clone() }, matching.len() as u64));
        }
        return;
    }
    let pred = &preds[depth];
    let mut pos: Vec<u32> = Vec::new();
    let mut neg: Vec<u32> = Vec::new();
    for &i in matching {
        let [s, p, o] = sample.terms[i as usize];
        if pred.eval(s, p, o) {
            pos.push(i);
        } else {
            neg.push(i);
        }
    }
    let all_negative_so_far = polarity.iter().all(|b| !b);
    if !pos.is_empty() {
        polarity.push(true);
        refine(preds, sample, depth + 1, polarity, &pos, out);
        polarity.pop();
    }
    if !neg.is_empty() || all_negative_so_far {
        polarity.push(false);
        refine(preds, sample, depth + 1, polarity, &neg, out);
        polarity.pop();
    }
}

/// f(m): sum of f(p) over patterns overlapping the minterm.
pub fn minterm_frequency(
    preds: &[SimplePredicate],
    minterm: &Minterm,
    phi: &BTreeMap<AnonPattern, u64>,
) -> u64 {
    phi.iter()
        .filter(|(pattern, _)| overlaps(preds, minterm, pattern))
        .map(|(_, f)| *f)
        .sum()
}

// ---------------------------------------------------------------------------
// COM_MIN

/// Load signature of a predicate subset: the multiset of (f, s) pairs over
/// the non-empty fragments of its minterm fragmentation (raw sample counts).
fn signature(
    preds_all: &[SimplePredicate],
    mask: u32,
    sample: &DecodedSample<'_>,
    phi: &BTreeMap<AnonPattern, u64>,
) -> Vec<(u64, u64)> {
    let subset: Vec<SimplePredicate> = preds_all
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, p)| p.clone())
        .collect();
    let minterms = generate_minterms(&subset, sample, 32).expect("subset within cap");
    let mut sig: Vec<(u64, u64)> = minterms
        .iter()
        .filter(|(_, count)| *count > 0)
        .map(|(m, count)| (minterm_frequency(&subset, m, phi), *count))
        .collect();
    sig.sort_unstable();
    sig
}

fn signature_diff(a: &[(u64, u64)], b: &[(u64, u64)]) -> usize {
    // multiset symmetric difference size
    let mut counts: BTreeMap<(u64, u64), i64> = BTreeMap::new();
    for x in a {
        *counts.entry(*x).or_insert(0) += 1;
    }
    for x in b {
        *counts.entry(*x).or_insert(0) -= 1;
    }
    counts.values().map(|v| v.unsigned_abs() as usize).sum()
}

/// COM_MIN: reduce the predicate set to a complete and minimal subset.
/// Iterates add-if-signature-changes then drop-if-signature-unchanged to a
/// fixpoint, starting from the predicate whose singleton signature differs
/// most from the no-predicate signature.
pub fn com_min(
    preds: &[SimplePredicate],
    sample: &DecodedSample<'_>,
    phi: &BTreeMap<AnonPattern, u64>,
) -> Vec<SimplePredicate> {
    if preds.is_empty() {
        return Vec::new();
    }
    assert!(preds.len() <= 32, "com_min operates on at most 32 candidate predicates");
    let mut cache: HashMap<u32, Vec<(u64, u64)>> = HashMap::new();
    let mut sig = |mask: u32, cache: &mut HashMap<u32, Vec<(u64, u64)>>| -> Vec<(u64, u64)> {
        if let Some(s) = cache.get(&mask) {
            return s.clone();
        }
        let s = signature(preds, mask, sample, phi);
        cache.insert(mask, s.clone());
        s
    };

    let empty_sig = sig(0, &mut cache);
    // start predicate: largest singleton-signature difference; ties fall to
    // the predicate order (the input is already sorted)
    let mut best_idx = 0;
    let mut best_diff = 0usize;
    for i in 0..preds.len() {
        let d = signature_diff(&sig(1 << i, &mut cache), &empty_sig);
        if d > best_diff {
            best_diff = d;
            best_idx = i;
        }
    }
    let mut current: u32 = 1 << best_idx;
    let mut seen: BTreeSet<u32> = BTreeSet::new();
    seen.insert(current);

    for _round in 0..(2 * preds.len() + 2) {
        let mut changed = false;
        for i in 0..preds.len() {
            if current & (1 << i) != 0 {
                continue;
            }
            let with = current | (1 << i);
            if sig(with, &mut cache) != sig(current, &mut cache) {
                current = with;
                changed = true;
            }
        }
        for i in 0..preds.len() {
            if current & (1 << i) == 0 {
                continue;
            }
            let without = current & !(1 << i);
            if sig(without, &mut cache) == sig(current, &mut cache) {
                current = without;
                changed = true;
            }
        }
        if !changed || !seen.insert(current) {
            break;
        }
    }

    preds
        .iter()
        .enumerate()
        .filter(|(i, _)| current & (1 << i) != 0)
        .map(|(_, p)| p.clone())
        .collect()
}

// ---------------------------------------------------------------------------
// Fragment statistics and the full pipeline

/// Compute fragments with f, s, L over a sample taken with `fraction`.
/// s(m) scales the sample count to the full set; empty non-remainder
/// fragments never appear (enumeration prunes them). Fragments are ordered
/// by descending load with the remainder last; ids are assigned 1..k in that
/// order and the remainder keeps id 0.
pub fn fragment_stats(
    preds: Vec<SimplePredicate>,
    sample: &DecodedSample<'_>,
    fraction: f64,
    phi: &BTreeMap<AnonPattern, u64>,
    cap: usize,
) -> Result<Fragmentation, FragmentError> {
    let minterms = generate_minterms(&preds, sample, cap)?;
    let mut fragments: Vec<Fragment> = Vec::new();
    let mut remainder: Option<Fragment> = None;
    for (minterm, raw_count) in minterms {
        let size = ((raw_count as f64) / fraction).round().max(0.0) as u64;
        let freq = minterm_frequency(&preds, &minterm, phi);
        let frag = Fragment { id: u32::MAX, minterm, freq, size };
        if frag.minterm.is_all_negative() {
            remainder = Some(Fragment { id: REMAINDER_ID, ..frag });
        } else if frag.size > 0 {
            fragments.push(frag);
        }
    }
    fragments.sort_by(|a, b| {
        b.load()
            .cmp(&a.load())
            .then(b.size.cmp(&a.size))
            .then(a.minterm.polarity.cmp(&b.minterm.polarity))
    });
    for (i, f) in fragments.iter_mut().enumerate() {
        f.id = i as u32 + 1;
    }
    fragments.push(remainder.expect("remainder always generated"));
    Ok(Fragmentation { predicates: preds, fragments })
}

/// Routing: the unique non-remainder fragment whose minterm the triple
/// satisfies, else the remainder.
pub fn fragment_of(triple: &Triple, fragmentation: &Fragmentation, dict: &Dictionary) -> u32 {
    let s = dict.term(triple.s);
    let p = dict.term(triple.p);
    let o = dict.term(triple.o);
    let (s, p, o) = match (s, p, o) {
        (Some(s), Some(p), Some(o)) => (s, p, o),
        _ => return REMAINDER_ID,
    };
    for f in fragmentation.non_remainder() {
        if f.minterm.satisfied_by(&fragmentation.predicates, s, p, o) {
            return f.id;
        }
    }
    REMAINDER_ID
}

#[derive(Debug, Clone)]
pub struct PartitionConfig {
    pub theta: u64,
    pub fraction: f64,
    pub seed: u64,
    pub predicate_cap: usize,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig { theta: 2, fraction: 0.1, seed: 42, predicate_cap: DEFAULT_PREDICATE_CAP }
    }
}

/// The full partitioning pipeline: sample, mine the workload, extract and
/// reduce predicates, enumerate minterms, and compute statistics.
pub fn partition(
    store: &TripleStore,
    dict: &Dictionary,
    ql: &QueryLog,
    config: &PartitionConfig,
) -> Result<Fragmentation, FragmentError> {
    let sample_store = store.sample(config.fraction, config.seed);
    let sample = DecodedSample::new(&sample_store, dict);
    let phi = crate::workload::normalize_and_anonymize(ql, config.theta);
    let all_preds = extract_simple_predicates(&phi, ql);
    let reduced = com_min(&all_preds, &sample, &phi);
    if reduced.len() > config.predicate_cap {
        return Err(FragmentError::PredicateSetTooLarge {
            got: reduced.len(),
            cap: config.predicate_cap,
        });
    }
    fragment_stats(reduced, &sample, config.fraction, &phi, config.predicate_cap)
}

/// Baseline: one fragment per distinct property in the query load, plus the
/// remainder. Ignores pattern co-occurrence entirely.
pub fn by_property_fragmentation(
    store: &TripleStore,
    dict: &Dictionary,
    ql: &QueryLog,
    theta: u64,
    fraction: f64,
    seed: u64,
) -> Fragmentation {
    let mut props: BTreeSet<Term> = BTreeSet::new();
    for (query, _) in &ql.entries {
        for branch in &query.branches {
            for pattern in branch.all_patterns() {
                if let Some(c) = pattern.p.as_const() {
                    if c.is_iri() {
                        props.insert(c.clone());
                    }
                }
            }
        }
    }
    let preds: Vec<SimplePredicate> = props
        .into_iter()
        .map(|p| SimplePredicate::eq(Component::Prop, p))
        .collect();
    let sample_store = store.sample(fraction, seed);
    let sample = DecodedSample::new(&sample_store, dict);
    let phi = crate::workload::normalize_and_anonymize(ql, theta);
    // property equalities are mutually exclusive, so minterms are one
    // positive position (or none); enumeration handles that shape fine
    fragment_stats(preds, &sample, fraction, &phi, 256)
        .expect("by-property predicate sets have one fragment per property")
}
