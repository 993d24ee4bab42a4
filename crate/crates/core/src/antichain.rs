//! Antichains in the powerset lattice.
//!
//! Covers inextendibility, exhaustive enumeration of the inextendible
//! (maximal) antichains of a small lattice, the per-level `Λ` decomposition
//! used by the class-𝒞 certificates, and generators for the example families.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::histories::{bits, subsets_of_weight, Event, HistorySpace};

/// Default cap on `n` for [`enumerate_inextendible`].
pub const DEFAULT_ENUMERATION_LIMIT: usize = 5;
/// Hard cap on `n` for enumeration; the comparability graph must fit in 64 bits.
pub const MAX_ENUMERATION_LIMIT: usize = 6;

/// A family of pairwise incomparable nonempty events, kept sorted by mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Antichain {
    space: HistorySpace,
    elements: Vec<Event>,
}

/// JSON shape of an antichain file: `{"n": 4, "elements": [[1,2],[3]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AntichainFile {
    pub n: usize,
    pub elements: Vec<Vec<usize>>,
}

/// Returns true iff no two of `events` are ⊆-comparable.
pub fn is_antichain(events: &[Event]) -> Result<bool> {
    let Some(first) = events.first() else {
        return Ok(true);
    };
    let space = first.space();
    for e in events {
        space.check(*e)?;
        if e.is_empty() {
            return Err(Error::InvalidArgument(
                "the empty event cannot belong to an antichain".into(),
            ));
        }
    }
    for (i, a) in events.iter().enumerate() {
        for b in &events[i + 1..] {
            if a.comparable(b) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

impl Antichain {
    pub fn new(space: HistorySpace, events: impl IntoIterator<Item = Event>) -> Result<Self> {
        let mut elements: Vec<Event> = events.into_iter().collect();
        if elements.is_empty() {
            return Err(Error::InvalidArgument("an antichain needs at least one element".into()));
        }
        for e in &elements {
            space.check(*e)?;
        }
        elements.sort();
        if elements.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate antichain element".into()));
        }
        if !is_antichain(&elements)? {
            return Err(Error::InvalidArgument(
                "events are not pairwise incomparable".into(),
            ));
        }
        Ok(Antichain { space, elements })
    }

    pub fn from_masks(space: HistorySpace, masks: &[u32]) -> Result<Self> {
        let events = masks
            .iter()
            .map(|&m| space.event_from_mask(m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, events)
    }

    pub fn from_labels(space: HistorySpace, sets: &[&[usize]]) -> Result<Self> {
        let events = sets
            .iter()
            .map(|s| space.event(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, events)
    }

    pub fn from_file(file: &AntichainFile) -> Result<Self> {
        let space = HistorySpace::new(file.n)?;
        let events = file
            .elements
            .iter()
            .map(|s| space.event(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, events)
    }

    pub fn to_file(&self) -> AntichainFile {
        AntichainFile {
            n: self.space.n(),
            elements: self.elements.iter().map(Event::labels).collect(),
        }
    }

    pub fn space(&self) -> HistorySpace {
        self.space
    }

    pub fn elements(&self) -> &[Event] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, e: &Event) -> bool {
        self.elements.binary_search(e).is_ok()
    }

    pub fn union(&self) -> Event {
        self.elements
            .iter()
            .fold(self.space.empty(), |acc, e| acc.union(e))
    }

    /// Distinct element cardinalities, ascending.
    pub fn levels(&self) -> Vec<usize> {
        self.elements
            .iter()
            .map(Event::card)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn masks(&self) -> Vec<u32> {
        self.elements.iter().map(Event::mask).collect()
    }
}

impl Serialize for Antichain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Antichain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = AntichainFile::deserialize(d)?;
        Antichain::from_file(&file).map_err(serde::de::Error::custom)
    }
}

/// Whether `ac` is maximal; when it is not, the addable event with the
/// smallest mask is returned as a witness.
pub fn is_inextendible(space: HistorySpace, ac: &Antichain) -> Result<(bool, Option<Event>)> {
    if ac.space() != space {
        return Err(Error::SpaceMismatch(space.n(), ac.space().n()));
    }
    let witness = space
        .nonempty_events()
        .find(|e| !ac.contains(e) && ac.elements().iter().all(|a| !a.comparable(e)));
    Ok((witness.is_none(), witness))
}

/// Every inextendible antichain of nonempty events, each exactly once, in
/// lexicographic order of their sorted element masks. Limited to
/// `n ≤ DEFAULT_ENUMERATION_LIMIT`.
pub fn enumerate_inextendible(space: HistorySpace) -> Result<Vec<Antichain>> {
    enumerate_inextendible_with_limit(space, DEFAULT_ENUMERATION_LIMIT)
}

pub fn enumerate_inextendible_with_limit(
    space: HistorySpace,
    limit: usize,
) -> Result<Vec<Antichain>> {
    let limit = limit.min(MAX_ENUMERATION_LIMIT);
    if space.n() > limit {
        return Err(Error::ResourceLimit(format!(
            "antichain enumeration is limited to n <= {limit}, got n = {}",
            space.n()
        )));
    }
    // Vertex v is the event with mask v + 1. Maximal antichains are the
    // maximal cliques of the incomparability graph.
    let count = space.full_mask() as usize;
    let all: u64 = if count == 64 { u64::MAX } else { (1u64 << count) - 1 };
    let adjacency: Vec<u64> = (0..count)
        .map(|v| {
            let a = (v + 1) as u32;
            (0..count).fold(0u64, |acc, w| {
                let b = (w + 1) as u32;
                let comparable = a & !b == 0 || b & !a == 0;
                if comparable {
                    acc
                } else {
                    acc | (1 << w)
                }
            })
        })
        .collect();

    let mut cliques: Vec<Vec<u32>> = Vec::new();
    bron_kerbosch(&adjacency, 0, all, 0, &mut cliques);
    for c in &mut cliques {
        c.sort_unstable();
    }
    cliques.sort();
    cliques
        .into_iter()
        .map(|masks| {
            let events = masks
                .into_iter()
                .map(|m| space.event_from_mask(m))
                .collect::<Result<Vec<_>>>()?;
            Ok(Antichain {
                space,
                elements: events,
            })
        })
        .collect()
}

fn bron_kerbosch(adj: &[u64], r: u64, mut p: u64, mut x: u64, out: &mut Vec<Vec<u32>>) {
    if p == 0 {
        if x == 0 {
            out.push(bits64(r).map(|v| (v + 1) as u32).collect());
        }
        return;
    }
    // Tomita pivot: the vertex of P ∪ X with most neighbours in P.
    let pivot = bits64(p | x)
        .max_by_key(|&u| (adj[u] & p).count_ones())
        .expect("P ∪ X is nonempty");
    let candidates = p & !adj[pivot];
    for v in bits64(candidates) {
        let bit = 1u64 << v;
        bron_kerbosch(adj, r | bit, p & adj[v], x & adj[v], out);
        p &= !bit;
        x |= bit;
    }
}

fn bits64(mask: u64) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(b)
        }
    })
}

/// `Λ` decomposition of an antichain about a pivot level `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LambdaDecomposition {
    pub k: usize,
    pub lambda_k: Vec<Event>,
    pub lambda_lt: Vec<Event>,
    pub lambda_gt: Vec<Event>,
    /// Labels not used by any off-pivot element.
    pub gamma_tilde: Vec<usize>,
    pub p: usize,
    /// Lowest level occupied in `Λ(<k) ⊔ Λ(k)`.
    pub s0: usize,
    /// `p ≥ k − s0 + 1`, the sufficient-population condition.
    pub in_class_c: bool,
}

impl LambdaDecomposition {
    /// `r = k − s0 + 1`.
    pub fn r(&self) -> usize {
        self.k + 1 - self.s0
    }
}

/// One decomposition per occupied level of `ac`, ascending in `k`.
pub fn classify(space: HistorySpace, ac: &Antichain) -> Result<Vec<LambdaDecomposition>> {
    if ac.space() != space {
        return Err(Error::SpaceMismatch(space.n(), ac.space().n()));
    }
    Ok(ac
        .levels()
        .into_iter()
        .map(|k| decompose(space, ac, k))
        .collect())
}

/// Decomposition of `ac` about an arbitrary pivot level `k`.
pub fn decompose(space: HistorySpace, ac: &Antichain, k: usize) -> LambdaDecomposition {
    let mut lambda_k = Vec::new();
    let mut lambda_lt = Vec::new();
    let mut lambda_gt = Vec::new();
    for &e in ac.elements() {
        match e.card().cmp(&k) {
            std::cmp::Ordering::Less => lambda_lt.push(e),
            std::cmp::Ordering::Equal => lambda_k.push(e),
            std::cmp::Ordering::Greater => lambda_gt.push(e),
        }
    }
    let used = lambda_lt
        .iter()
        .chain(&lambda_gt)
        .fold(space.empty(), |acc, e| acc.union(e));
    let gamma_tilde = used.complement().labels();
    let p = gamma_tilde.len();
    let s0 = lambda_lt.iter().map(Event::card).min().unwrap_or(k);
    let in_class_c = p + s0 > k;
    LambdaDecomposition {
        k,
        lambda_k,
        lambda_lt,
        lambda_gt,
        gamma_tilde,
        p,
        s0,
        in_class_c,
    }
}

/// Families of inextendible antichains with a known quantum-cover proof.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// All events of level `k`.
    LevelK { k: usize },
    /// Two `(n−1)`-sets missing labels 1 and 2, plus every `(n−2)`-set
    /// outside their shadows.
    A1,
    /// Two `(n+1)/2`-sets meeting at label 1, plus the cross pairs.
    A2,
    /// `m` blocks of size `(n−1)/m + 1` meeting at label 1, plus every pair
    /// not inside a block.
    A3 { m: usize },
    /// Mixed family with `l`-level middle elements.
    A4 { l: usize },
}

impl GeneratorKind {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorKind::LevelK { .. } => "level_k",
            GeneratorKind::A1 => "A1",
            GeneratorKind::A2 => "A2",
            GeneratorKind::A3 { .. } => "A3",
            GeneratorKind::A4 { .. } => "A4",
        }
    }

    /// Every example-family instance (A1–A4) that exists at size `n`.
    pub fn examples_for(n: usize) -> Vec<GeneratorKind> {
        let mut kinds = Vec::new();
        if n > 3 {
            kinds.push(GeneratorKind::A1);
        }
        if n >= 5 && n % 2 == 1 {
            kinds.push(GeneratorKind::A2);
        }
        for m in 2..n {
            if (n - 1).is_multiple_of(m) && (n - 1) / m >= 2 {
                kinds.push(GeneratorKind::A3 { m });
            }
        }
        if n >= 5 {
            for l in 3..=n - 2 {
                kinds.push(GeneratorKind::A4 { l });
            }
        }
        kinds
    }
}

/// Builds an antichain of the requested family and checks that it is
/// inextendible before returning it.
pub fn generate(space: HistorySpace, kind: GeneratorKind) -> Result<Antichain> {
    let n = space.n();
    let label_set = |labels: &[usize]| space.event(labels);
    let events: Vec<Event> = match kind {
        GeneratorKind::LevelK { k } => {
            if k == 0 || k > n {
                return out_of_range("k", k, 1, n);
            }
            space.level_elements(k)?
        }
        GeneratorKind::A1 => {
            if n <= 3 {
                return Err(Error::InvalidArgument(format!("A1 needs n > 3, got {n}")));
            }
            let omega = space.omega();
            let bar1 = omega.difference(&label_set(&[1])?);
            let bar2 = omega.difference(&label_set(&[2])?);
            let mut out = vec![bar1, bar2];
            out.extend(
                space
                    .level_elements(n - 2)?
                    .into_iter()
                    .filter(|e| !e.is_subset(&bar1) && !e.is_subset(&bar2)),
            );
            out
        }
        GeneratorKind::A2 => {
            if n < 5 || n.is_multiple_of(2) {
                return Err(Error::InvalidArgument(format!(
                    "A2 needs odd n >= 5, got {n}"
                )));
            }
            let half = n.div_ceil(2);
            let first: Vec<usize> = (1..=half).collect();
            let second: Vec<usize> = std::iter::once(1).chain(half + 1..=n).collect();
            let mut out = vec![label_set(&first)?, label_set(&second)?];
            for i in 2..=half {
                for j in half + 1..=n {
                    out.push(label_set(&[i, j])?);
                }
            }
            out
        }
        GeneratorKind::A3 { m } => {
            if m < 2 || n < 2 || !(n - 1).is_multiple_of(m) || (n - 1) / m < 2 {
                return Err(Error::InvalidArgument(format!(
                    "A3 needs m >= 2 with (n-1)/m an integer >= 2, got n = {n}, m = {m}"
                )));
            }
            let l = (n - 1) / m;
            let blocks = (0..m)
                .map(|b| {
                    let labels: Vec<usize> =
                        std::iter::once(1).chain(b * l + 2..=(b + 1) * l + 1).collect();
                    label_set(&labels)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut out = blocks.clone();
            out.extend(
                space
                    .level_elements(2)?
                    .into_iter()
                    .filter(|pair| !blocks.iter().any(|b| pair.is_subset(b))),
            );
            out
        }
        GeneratorKind::A4 { l } => {
            if n < 5 || l < 3 || l > n - 2 {
                return Err(Error::InvalidArgument(format!(
                    "A4 needs n >= 5 and 3 <= l <= n-2, got n = {n}, l = {l}"
                )));
            }
            let omega = space.omega();
            let mut out = vec![
                omega.difference(&label_set(&[1, 2])?),
                omega.difference(&label_set(&[2, 3])?),
            ];
            let tail = omega.difference(&label_set(&[1, 2, 3])?).mask();
            let one_two = label_set(&[1, 2])?;
            let two_three = label_set(&[2, 3])?;
            let two = label_set(&[2])?;
            for t in subsets_of_weight(tail, l - 2) {
                let t = space.event_from_mask(t)?;
                out.push(one_two.union(&t));
                out.push(two_three.union(&t));
            }
            for t in subsets_of_weight(tail, l - 1) {
                out.push(two.union(&space.event_from_mask(t)?));
            }
            out.push(label_set(&[1, 3])?);
            out
        }
    };
    let ac = Antichain::new(space, events).map_err(|e| {
        Error::Internal(format!("{} generator produced a non-antichain: {e}", kind.name()))
    })?;
    let (maximal, witness) = is_inextendible(space, &ac)?;
    if !maximal {
        return Err(Error::Internal(format!(
            "{} generator output is extendible by {}",
            kind.name(),
            witness.expect("non-maximal antichains carry a witness")
        )));
    }
    Ok(ac)
}

/// Whether `a` and `b` coincide after some relabelling of the histories.
pub fn isomorphic(a: &Antichain, b: &Antichain) -> bool {
    if a.space() != b.space() || a.len() != b.len() {
        return false;
    }
    if a == b {
        return true;
    }
    let profile = |ac: &Antichain| {
        let mut p: Vec<usize> = ac.elements().iter().map(Event::card).collect();
        p.sort_unstable();
        p
    };
    if profile(a) != profile(b) {
        return false;
    }
    let n = a.space().n();
    let signature = |ac: &Antichain, label: usize| {
        let mut sig: Vec<usize> = ac
            .elements()
            .iter()
            .filter(|e| e.contains(label))
            .map(Event::card)
            .collect();
        sig.sort_unstable();
        sig
    };
    let sig_a: Vec<Vec<usize>> = (1..=n).map(|l| signature(a, l)).collect();
    let sig_b: Vec<Vec<usize>> = (1..=n).map(|l| signature(b, l)).collect();
    let mut count: BTreeMap<&Vec<usize>, i64> = BTreeMap::new();
    for s in &sig_a {
        *count.entry(s).or_default() += 1;
    }
    for s in &sig_b {
        *count.entry(s).or_default() -= 1;
    }
    if count.values().any(|&c| c != 0) {
        return false;
    }
    let target: BTreeSet<u32> = b.masks().into_iter().collect();
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    extend_mapping(0, a, &target, &sig_a, &sig_b, &mut image, &mut used)
}

fn extend_mapping(
    label: usize,
    a: &Antichain,
    target: &BTreeSet<u32>,
    sig_a: &[Vec<usize>],
    sig_b: &[Vec<usize>],
    image: &mut [usize],
    used: &mut [bool],
) -> bool {
    let n = image.len();
    if label == n {
        return a.masks().into_iter().all(|m| {
            let mapped = bits(m).fold(0u32, |acc, b| acc | (1 << image[b]));
            target.contains(&mapped)
        });
    }
    for cand in 0..n {
        if used[cand] || sig_a[label] != sig_b[cand] {
            continue;
        }
        image[label] = cand;
        used[cand] = true;
        if extend_mapping(label + 1, a, target, sig_a, sig_b, image, used) {
            return true;
        }
        used[cand] = false;
    }
    false
}
