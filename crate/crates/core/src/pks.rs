//! The Peres 33-ray set, its orthogonality structure and the PKS events on
//! the space of red/green colorings of the rays.
//!
//! A coloring is a 33-bit mask with green = 1. Events on coloring space are
//! predicates; the `2^33` outcomes are never materialized.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub const PERES_RAYS: usize = 33;
pub const PERES_BASES: usize = 16;

/// `a + b√2` with integer `a`, `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ZSqrt2 {
    pub a: i64,
    pub b: i64,
}

impl ZSqrt2 {
    pub const ZERO: ZSqrt2 = ZSqrt2 { a: 0, b: 0 };
    pub const ONE: ZSqrt2 = ZSqrt2 { a: 1, b: 0 };
    pub const SQRT2: ZSqrt2 = ZSqrt2 { a: 0, b: 1 };

    pub const fn new(a: i64, b: i64) -> Self {
        ZSqrt2 { a, b }
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    /// Exact sign of `a + b√2`.
    pub fn signum(&self) -> i32 {
        let (a, b) = (self.a, self.b);
        match (a.signum(), b.signum()) {
            (0, 0) => 0,
            (sa, sb) if sa >= 0 && sb >= 0 => 1,
            (sa, sb) if sa <= 0 && sb <= 0 => -1,
            // Opposite signs: compare a² with 2b².
            (sa, _) => match (a as i128 * a as i128).cmp(&(2 * b as i128 * b as i128)) {
                Ordering::Greater => sa as i32,
                _ => -sa as i32,
            },
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.a as f64 + self.b as f64 * std::f64::consts::SQRT_2
    }
}

impl Add for ZSqrt2 {
    type Output = ZSqrt2;
    fn add(self, o: ZSqrt2) -> ZSqrt2 {
        ZSqrt2::new(self.a + o.a, self.b + o.b)
    }
}

impl Mul for ZSqrt2 {
    type Output = ZSqrt2;
    fn mul(self, o: ZSqrt2) -> ZSqrt2 {
        ZSqrt2::new(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a)
    }
}

impl Neg for ZSqrt2 {
    type Output = ZSqrt2;
    fn neg(self) -> ZSqrt2 {
        ZSqrt2::new(-self.a, -self.b)
    }
}

impl fmt::Display for ZSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a, self.b) {
            (a, 0) => write!(f, "{a}"),
            (0, 1) => write!(f, "√2"),
            (0, -1) => write!(f, "-√2"),
            (0, b) => write!(f, "{b}√2"),
            (a, b) if b > 0 => write!(f, "{a}+{b}√2"),
            (a, b) => write!(f, "{a}{b}√2"),
        }
    }
}

/// A ray in 3-space with components in `Z[√2]`, stored in canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ray {
    components: [ZSqrt2; 3],
}

impl Ray {
    /// Canonical representative: the first nonzero component is positive.
    pub fn new(components: [ZSqrt2; 3]) -> Result<Self> {
        let first = components.iter().find(|c| !c.is_zero()).ok_or_else(|| {
            Error::InvalidArgument("a ray needs a nonzero component".into())
        })?;
        let components = if first.signum() < 0 {
            components.map(|c| -c)
        } else {
            components
        };
        Ok(Ray { components })
    }

    pub fn components(&self) -> [ZSqrt2; 3] {
        self.components
    }

    pub fn dot(&self, other: &Ray) -> ZSqrt2 {
        self.components
            .iter()
            .zip(other.components.iter())
            .fold(ZSqrt2::ZERO, |acc, (x, y)| acc + *x * *y)
    }

    pub fn is_orthogonal(&self, other: &Ray) -> bool {
        self.dot(other).is_zero()
    }

    pub fn to_f64(&self) -> [f64; 3] {
        self.components.map(|c| c.to_f64())
    }
}

impl fmt::Display for Ray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x, y, z] = self.components;
        write!(f, "({x},{y},{z})")
    }
}

impl Serialize for Ray {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[i64; 2]> = self.components.iter().map(|c| [c.a, c.b]).collect();
        pairs.serialize(s)
    }
}

/// The 33 Peres rays: every arrangement and sign choice of `(0,0,1)`,
/// `(0,1,1)`, `(0,1,√2)` and `(1,1,√2)`, canonicalized and deduplicated.
/// Sorted by pattern, then by numeric value, so rays 0..3 are the standard basis.
pub fn peres_rays() -> Result<Vec<Ray>> {
    let values = [
        ZSqrt2::ZERO,
        ZSqrt2::ONE,
        -ZSqrt2::ONE,
        ZSqrt2::SQRT2,
        -ZSqrt2::SQRT2,
    ];
    // Patterns as sorted absolute values: 0 < 1 < √2.
    let patterns: [[ZSqrt2; 3]; 4] = [
        [ZSqrt2::ZERO, ZSqrt2::ZERO, ZSqrt2::ONE],
        [ZSqrt2::ZERO, ZSqrt2::ONE, ZSqrt2::ONE],
        [ZSqrt2::ZERO, ZSqrt2::ONE, ZSqrt2::SQRT2],
        [ZSqrt2::ONE, ZSqrt2::ONE, ZSqrt2::SQRT2],
    ];
    let abs = |c: ZSqrt2| if c.signum() < 0 { -c } else { c };
    let mut rays = Vec::new();
    for &x in &values {
        for &y in &values {
            for &z in &values {
                let mut key = [abs(x), abs(y), abs(z)];
                key.sort_by(|p, q| p.to_f64().total_cmp(&q.to_f64()));
                if let Some(class) = patterns.iter().position(|p| *p == key) {
                    rays.push((class, Ray::new([x, y, z])?));
                }
            }
        }
    }
    rays.sort_by(|(c1, r1), (c2, r2)| {
        c1.cmp(c2).then_with(|| {
            let (v1, v2) = (r1.to_f64(), r2.to_f64());
            v1.iter()
                .zip(v2.iter())
                .map(|(a, b)| a.total_cmp(b))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
    });
    rays.dedup();
    let rays: Vec<Ray> = rays.into_iter().map(|(_, r)| r).collect();
    if rays.len() != PERES_RAYS {
        return Err(Error::Internal(format!(
            "Peres generation produced {} rays, expected {PERES_RAYS}",
            rays.len()
        )));
    }
    Ok(rays)
}

/// The rays with their orthogonal triads and orthogonal pairs, as sorted
/// index tuples into `rays`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeresStructure {
    pub rays: Vec<Ray>,
    pub bases: Vec<[usize; 3]>,
    pub pairs: Vec<[usize; 2]>,
}

pub fn orthogonal_structure(rays: &[Ray]) -> Result<PeresStructure> {
    if rays.len() > 64 {
        return Err(Error::ResourceLimit(
            "colorings are 64-bit masks; at most 64 rays".into(),
        ));
    }
    let m = rays.len();
    let mut pairs = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            if rays[i].is_orthogonal(&rays[j]) {
                pairs.push([i, j]);
            }
        }
    }
    let orth = |i: usize, j: usize| pairs.binary_search(&[i.min(j), i.max(j)]).is_ok();
    let mut bases = Vec::new();
    for &[i, j] in &pairs {
        for k in j + 1..m {
            if orth(i, k) && orth(j, k) {
                bases.push([i, j, k]);
            }
        }
    }
    Ok(PeresStructure {
        rays: rays.to_vec(),
        bases,
        pairs,
    })
}

impl PeresStructure {
    /// The Peres structure, with the ray and basis counts asserted.
    pub fn peres() -> Result<Self> {
        let s = orthogonal_structure(&peres_rays()?)?;
        if s.bases.len() != PERES_BASES {
            return Err(Error::Internal(format!(
                "found {} orthogonal bases, expected {PERES_BASES}",
                s.bases.len()
            )));
        }
        Ok(s)
    }

    pub fn ray_count(&self) -> usize {
        self.rays.len()
    }

    pub fn all_rays_mask(&self) -> u64 {
        mask_of(0..self.rays.len())
    }

    pub fn basis_mask(&self, b: usize) -> u64 {
        mask_of(self.bases[b])
    }

    pub fn pair_mask(&self, p: usize) -> u64 {
        mask_of(self.pairs[p])
    }

    pub fn ray_index(&self, ray: &Ray) -> Option<usize> {
        self.rays.iter().position(|r| r == ray)
    }

    /// Index of the basis `{(0,0,1),(0,1,0),(1,0,0)}`.
    pub fn canonical_basis(&self) -> Option<usize> {
        let unit = |i: usize| {
            let mut c = [ZSqrt2::ZERO; 3];
            c[i] = ZSqrt2::ONE;
            Ray::new(c).ok().and_then(|r| self.ray_index(&r))
        };
        let mut idx = [unit(0)?, unit(1)?, unit(2)?];
        idx.sort();
        self.bases.iter().position(|b| *b == idx)
    }

    /// Number of bases each ray belongs to.
    pub fn basis_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.rays.len()];
        for b in &self.bases {
            for &r in b {
                deg[r] += 1;
            }
        }
        deg
    }

    /// All PKS events: one `R_B` per basis followed by one `G_P` per pair.
    pub fn pks_events(&self) -> Vec<PksEvent> {
        (0..self.bases.len())
            .map(PksEvent::Red)
            .chain((0..self.pairs.len()).map(PksEvent::Green))
            .collect()
    }

    pub fn contains(&self, event: PksEvent, coloring: Coloring) -> bool {
        match event {
            PksEvent::Red(b) => coloring.0 & self.basis_mask(b) == 0,
            PksEvent::Green(p) => {
                let m = self.pair_mask(p);
                coloring.0 & m == m
            }
        }
    }

    /// A consistent coloring avoids every PKS event.
    pub fn is_consistent(&self, coloring: Coloring) -> bool {
        self.pks_events().iter().all(|e| !self.contains(*e, coloring))
    }

    pub fn event_label(&self, event: PksEvent) -> String {
        match event {
            PksEvent::Red(b) => {
                let [i, j, k] = self.bases[b];
                format!("R[{i},{j},{k}]")
            }
            PksEvent::Green(p) => {
                let [i, j] = self.pairs[p];
                format!("G[{i},{j}]")
            }
        }
    }

    fn event_mask(&self, event: PksEvent) -> u64 {
        match event {
            PksEvent::Red(b) => self.basis_mask(b),
            PksEvent::Green(p) => self.pair_mask(p),
        }
    }
}

fn mask_of(indices: impl IntoIterator<Item = usize>) -> u64 {
    indices.into_iter().fold(0u64, |m, i| m | (1 << i))
}

/// A red/green assignment to every ray; bit `i` set means ray `i` is green.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coloring(pub u64);

impl Coloring {
    pub fn is_green(&self, ray: usize) -> bool {
        self.0 >> ray & 1 == 1
    }

    pub fn green_rays(&self) -> Vec<usize> {
        (0..64).filter(|&i| self.is_green(i)).collect()
    }
}

impl Serialize for Coloring {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.green_rays().serialize(s)
    }
}

/// `Red(b)`: all three rays of basis `b` are red. `Green(p)`: both rays of
/// orthogonal pair `p` are green.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PksEvent {
    Red(usize),
    Green(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Incomparable,
    Subset,
    Superset,
    Equal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub relation: Relation,
    /// A coloring in `e1 \ e2`, when that difference is nonempty.
    pub left_only: Option<Coloring>,
    /// A coloring in `e2 \ e1`, when that difference is nonempty.
    pub right_only: Option<Coloring>,
}

/// Decides inclusion between two PKS events from their ray sets and checks
/// the separating colorings it builds.
pub fn pks_comparability(s: &PeresStructure, e1: PksEvent, e2: PksEvent) -> Result<Comparison> {
    let all = s.all_rays_mask();
    let (m1, m2) = (s.event_mask(e1), s.event_mask(e2));
    // A coloring in e \ f, or None when e ⊆ f.
    let difference = |e: PksEvent, me: u64, f: PksEvent, mf: u64| -> Option<Coloring> {
        match (e, f) {
            // R_B ⊆ R_B' iff B ⊇ B'.
            (PksEvent::Red(_), PksEvent::Red(_)) => {
                (mf & !me != 0).then_some(Coloring(all & !me))
            }
            // G_P ⊆ G_P' iff P ⊇ P'.
            (PksEvent::Green(_), PksEvent::Green(_)) => (mf & !me != 0).then_some(Coloring(me)),
            (PksEvent::Red(_), PksEvent::Green(_)) => Some(Coloring(0)),
            (PksEvent::Green(_), PksEvent::Red(_)) => Some(Coloring(all)),
        }
    };
    let left_only = difference(e1, m1, e2, m2);
    let right_only = difference(e2, m2, e1, m1);
    for (c, inside, outside) in [(left_only, e1, e2), (right_only, e2, e1)] {
        if let Some(c) = c {
            if !s.contains(inside, c) || s.contains(outside, c) {
                return Err(Error::Internal(format!(
                    "separating coloring for {} vs {} is wrong",
                    s.event_label(inside),
                    s.event_label(outside)
                )));
            }
        }
    }
    let relation = match (left_only.is_some(), right_only.is_some()) {
        (false, false) => Relation::Equal,
        (false, true) => Relation::Subset,
        (true, false) => Relation::Superset,
        (true, true) => Relation::Incomparable,
    };
    Ok(Comparison {
        relation,
        left_only,
        right_only,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub backtracks: u64,
    pub forced: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub coloring: Option<Coloring>,
    pub stats: SearchStats,
}

/// Backtracking search for a consistent coloring of the rays in `subset`.
///
/// Only bases and pairs lying wholly inside `subset` constrain the search;
/// each such basis gets exactly one green ray and no such pair is all green.
/// Rays outside `subset` are reported red.
pub fn search_consistent_coloring(s: &PeresStructure, subset: u64) -> SearchOutcome {
    let subset = subset & s.all_rays_mask();
    let bases: Vec<[usize; 3]> = s
        .bases
        .iter()
        .copied()
        .filter(|b| mask_of(*b) & !subset == 0)
        .collect();
    let m = s.ray_count();
    let mut neighbours = vec![Vec::new(); m];
    for &[i, j] in &s.pairs {
        if subset >> i & 1 == 1 && subset >> j & 1 == 1 {
            neighbours[i].push(j);
            neighbours[j].push(i);
        }
    }
    let mut in_bases = vec![Vec::new(); m];
    for (bi, b) in bases.iter().enumerate() {
        for &r in b {
            in_bases[r].push(bi);
        }
    }
    let mut order: Vec<usize> = (0..m).filter(|&r| subset >> r & 1 == 1).collect();
    order.sort_by_key(|&r| (std::cmp::Reverse(in_bases[r].len()), r));

    let search = Search {
        bases: &bases,
        neighbours: &neighbours,
        in_bases: &in_bases,
        order: &order,
    };
    let mut stats = SearchStats::default();
    let state = vec![None; m];
    let coloring = search.solve(state, &mut stats).map(|st| {
        Coloring(
            st.iter()
                .enumerate()
                .filter(|(_, v)| **v == Some(true))
                .fold(0u64, |acc, (i, _)| acc | (1 << i)),
        )
    });
    SearchOutcome { coloring, stats }
}

struct Search<'a> {
    bases: &'a [[usize; 3]],
    neighbours: &'a [Vec<usize>],
    in_bases: &'a [Vec<usize>],
    order: &'a [usize],
}

type State = Vec<Option<bool>>;

impl Search<'_> {
    fn solve(&self, state: State, stats: &mut SearchStats) -> Option<State> {
        stats.nodes += 1;
        let Some(&ray) = self.order.iter().find(|&&r| state[r].is_none()) else {
            return Some(state);
        };
        for green in [true, false] {
            let mut next = state.clone();
            if self.assign(&mut next, ray, green, stats) {
                if let Some(done) = self.solve(next, stats) {
                    return Some(done);
                }
            }
            stats.backtracks += 1;
        }
        None
    }

    /// Assigns and propagates; false on conflict.
    fn assign(&self, state: &mut State, ray: usize, green: bool, stats: &mut SearchStats) -> bool {
        let mut queue = vec![(ray, green)];
        while let Some((r, g)) = queue.pop() {
            match state[r] {
                Some(v) if v == g => continue,
                Some(_) => return false,
                None => state[r] = Some(g),
            }
            if g {
                for &o in &self.neighbours[r] {
                    match state[o] {
                        Some(true) => return false,
                        Some(false) => {}
                        None => {
                            stats.forced += 1;
                            queue.push((o, false));
                        }
                    }
                }
            } else {
                for &b in &self.in_bases[r] {
                    let basis = self.bases[b];
                    let reds = basis.iter().filter(|&&x| state[x] == Some(false)).count();
                    if reds == 3 {
                        return false;
                    }
                    if reds == 2 {
                        if let Some(&last) = basis.iter().find(|&&x| state[x].is_none()) {
                            stats.forced += 1;
                            queue.push((last, true));
                        }
                    }
                }
            }
        }
        true
    }
}

/// Every claim behind the statement that the PKS events form an antichain
/// that is not inextendible, checked mechanically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub rays: usize,
    pub bases: usize,
    pub pairs: usize,
    pub pks_events: usize,
    pub canonical_basis: [usize; 3],
    pub gamma: Coloring,
    pub gamma_tilde: Coloring,
    pub bases_in_complement: usize,
    pub pairs_in_basis: usize,
    pub gamma_events: Vec<String>,
    pub gamma_tilde_events: Vec<String>,
    pub shared_events: usize,
    pub is_antichain: bool,
    pub is_inextendible: bool,
    pub verdict: String,
    pub failures: Vec<String>,
}

impl WitnessReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn witness_check(s: &PeresStructure) -> Result<WitnessReport> {
    let mut failures = Vec::new();
    let mut claim = |ok: bool, msg: String| {
        if !ok {
            failures.push(msg);
        }
    };
    let b = s
        .canonical_basis()
        .ok_or_else(|| Error::Internal("the standard basis is missing".into()))?;
    let bm = s.basis_mask(b);
    let all = s.all_rays_mask();
    let gamma = Coloring(all & !bm);
    let gamma_tilde = Coloring(bm);
    let events = s.pks_events();

    claim(s.contains(PksEvent::Red(b), gamma), "γ is not in R_B".into());
    let pairs_outside: Vec<usize> = (0..s.pairs.len())
        .filter(|&p| s.pair_mask(p) & bm == 0)
        .collect();
    for &p in &pairs_outside {
        claim(
            s.contains(PksEvent::Green(p), gamma),
            format!("γ is not in {}", s.event_label(PksEvent::Green(p))),
        );
    }
    let bases_outside: Vec<usize> = (0..s.bases.len())
        .filter(|&c| s.basis_mask(c) & bm == 0)
        .collect();
    for &c in &bases_outside {
        claim(
            s.contains(PksEvent::Red(c), gamma_tilde),
            format!("γ̃ is not in {}", s.event_label(PksEvent::Red(c))),
        );
    }
    let pairs_inside: Vec<usize> = (0..s.pairs.len())
        .filter(|&p| s.pair_mask(p) & !bm == 0)
        .collect();
    for &p in &pairs_inside {
        claim(
            s.contains(PksEvent::Green(p), gamma_tilde),
            format!("γ̃ is not in {}", s.event_label(PksEvent::Green(p))),
        );
    }
    claim(
        bases_outside.len() == 6,
        format!("{} bases lie in B^c, expected 6", bases_outside.len()),
    );
    claim(
        pairs_inside.len() == 3,
        format!("{} orthogonal pairs lie in B, expected 3", pairs_inside.len()),
    );

    let expected_gamma: Vec<PksEvent> = std::iter::once(PksEvent::Red(b))
        .chain(pairs_outside.iter().map(|&p| PksEvent::Green(p)))
        .collect();
    let expected_tilde: Vec<PksEvent> = bases_outside
        .iter()
        .map(|&c| PksEvent::Red(c))
        .chain(pairs_inside.iter().map(|&p| PksEvent::Green(p)))
        .collect();
    let gamma_events: Vec<PksEvent> = events.iter().copied().filter(|e| s.contains(*e, gamma)).collect();
    let tilde_events: Vec<PksEvent> = events
        .iter()
        .copied()
        .filter(|e| s.contains(*e, gamma_tilde))
        .collect();
    claim(
        gamma_events == expected_gamma,
        "γ lies in PKS events beyond R_B and G_P for P ⊆ B^c".into(),
    );
    claim(
        tilde_events == expected_tilde,
        "γ̃ lies in PKS events beyond R_B' for B' ⊆ B^c and G_P for P ⊆ B".into(),
    );
    let shared = gamma_events.iter().filter(|e| tilde_events.contains(e)).count();
    claim(shared == 0, format!("{{γ, γ̃}} lies inside {shared} PKS events"));

    // Every PKS event fixes at most three rays, so it has at least 2^30
    // colorings and cannot sit inside the two-element event {γ, γ̃}.
    let min_event_size_log2 = s.ray_count() - 3;
    claim(
        min_event_size_log2 >= 2,
        "a PKS event may fit inside a two-element event".into(),
    );

    let mut is_antichain = true;
    for (i, &e1) in events.iter().enumerate() {
        for &e2 in &events[i + 1..] {
            if pks_comparability(s, e1, e2)?.relation != Relation::Incomparable {
                is_antichain = false;
                claim(
                    false,
                    format!("{} and {} are comparable", s.event_label(e1), s.event_label(e2)),
                );
            }
        }
    }
    let is_inextendible = shared != 0;
    let yes_no = |v: bool| if v { "yes" } else { "no" };
    let verdict = format!(
        "antichain: {}; inextendible: {}",
        yes_no(is_antichain),
        yes_no(is_inextendible)
    );
    let mut idx = s.bases[b];
    idx.sort();
    Ok(WitnessReport {
        rays: s.ray_count(),
        bases: s.bases.len(),
        pairs: s.pairs.len(),
        pks_events: events.len(),
        canonical_basis: idx,
        gamma,
        gamma_tilde,
        bases_in_complement: bases_outside.len(),
        pairs_in_basis: pairs_inside.len(),
        gamma_events: gamma_events.iter().map(|e| s.event_label(*e)).collect(),
        gamma_tilde_events: tilde_events.iter().map(|e| s.event_label(*e)).collect(),
        shared_events: shared,
        is_antichain,
        is_inextendible,
        verdict,
        failures,
    })
}

fn random_colorings(s: &PeresStructure, samples: usize, seed: u64) -> impl Iterator<Item = Coloring> {
    let all = s.all_rays_mask();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples).map(move |_| Coloring(rng.random::<u64>() & all))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub samples: usize,
    pub seed: u64,
    pub covered: usize,
    pub first_uncovered: Option<Coloring>,
}

/// Draws uniform colorings and counts those lying in at least one PKS event.
pub fn random_coverage(s: &PeresStructure, samples: usize, seed: u64) -> CoverageReport {
    let events = s.pks_events();
    let mut covered = 0;
    let mut first_uncovered = None;
    for c in random_colorings(s, samples, seed) {
        if events.iter().any(|e| s.contains(*e, c)) {
            covered += 1;
        } else if first_uncovered.is_none() {
            first_uncovered = Some(c);
        }
    }
    CoverageReport {
        samples,
        seed,
        covered,
        first_uncovered,
    }
}

/// Tests every claimed inclusion between PKS events against sampled
/// colorings; returns the number of violations.
pub fn sampled_comparability_violations(s: &PeresStructure, samples: usize, seed: u64) -> Result<usize> {
    let events = s.pks_events();
    let mut claims = Vec::new();
    for &e1 in &events {
        for &e2 in &events {
            match pks_comparability(s, e1, e2)?.relation {
                Relation::Subset | Relation::Equal => claims.push((e1, e2)),
                Relation::Superset => claims.push((e2, e1)),
                Relation::Incomparable => {}
            }
        }
    }
    let colorings: Vec<Coloring> = random_colorings(s, samples, seed).collect();
    Ok(claims
        .iter()
        .filter(|(small, big)| {
            colorings
                .iter()
                .any(|c| s.contains(*small, *c) && !s.contains(*big, *c))
        })
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn structure() -> PeresStructure {
        PeresStructure::peres().unwrap()
    }

    #[test]
    fn zsqrt2_sign_and_arithmetic() {
        assert_eq!(ZSqrt2::new(3, -2).signum(), 1);
        assert_eq!(ZSqrt2::new(2, -2).signum(), -1);
        assert_eq!(ZSqrt2::new(-1, 1).signum(), 1);
        assert_eq!(ZSqrt2::new(-2, 1).signum(), -1);
        assert_eq!(ZSqrt2::SQRT2 * ZSqrt2::SQRT2, ZSqrt2::new(2, 0));
        assert_eq!(ZSqrt2::new(1, 1) * ZSqrt2::new(1, -1), ZSqrt2::new(-1, 0));
    }

    #[test]
    fn canonical_rays() {
        let r = Ray::new([-ZSqrt2::ONE, ZSqrt2::ONE, -ZSqrt2::SQRT2]).unwrap();
        assert_eq!(r.components(), [ZSqrt2::ONE, -ZSqrt2::ONE, ZSqrt2::SQRT2]);
        assert_eq!(Ray::new(r.components()).unwrap(), r);
        assert!(Ray::new([ZSqrt2::ZERO; 3]).is_err());
        assert_eq!(r.to_string(), "(1,-1,√2)");
    }

    #[test]
    fn peres_counts() {
        let s = structure();
        assert_eq!(s.rays.len(), 33);
        assert_eq!(s.bases.len(), 16);
        assert_eq!(s.canonical_basis(), Some(0));
        assert_eq!(s.bases[0], [0, 1, 2]);
        let one_minus_one_root2 =
            Ray::new([ZSqrt2::ONE, -ZSqrt2::ONE, ZSqrt2::SQRT2]).unwrap();
        assert!(s.ray_index(&one_minus_one_root2).is_some());
        assert!(s.basis_degrees().iter().all(|&d| d >= 1));
        for b in &s.bases {
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                assert!(s.pairs.contains(&[b[i], b[j]]));
            }
        }
    }

    #[test]
    fn search_is_unsat_on_full_set() {
        let s = structure();
        let out = search_consistent_coloring(&s, s.all_rays_mask());
        assert!(out.coloring.is_none());
        assert!(out.stats.nodes > 0);
    }

    #[test]
    fn search_on_restricted_sets() {
        let s = structure();
        let one = search_consistent_coloring(&s, s.basis_mask(0));
        let c = one.coloring.unwrap();
        assert_eq!((c.0 & s.basis_mask(0)).count_ones(), 1);

        let disjoint = (1..s.bases.len())
            .find(|&b| s.basis_mask(b) & s.basis_mask(0) == 0)
            .unwrap();
        let m = s.basis_mask(0) | s.basis_mask(disjoint);
        let c = search_consistent_coloring(&s, m).coloring.unwrap();
        assert_eq!((c.0 & s.basis_mask(0)).count_ones(), 1);
        assert_eq!((c.0 & s.basis_mask(disjoint)).count_ones(), 1);
        for p in 0..s.pairs.len() {
            let pm = s.pair_mask(p);
            if pm & !m == 0 {
                assert_ne!(c.0 & pm, pm);
            }
        }
    }

    #[test]
    fn comparability_rules() {
        let s = structure();
        let r0 = PksEvent::Red(0);
        let r1 = PksEvent::Red(1);
        let g0 = PksEvent::Green(0);
        let g1 = PksEvent::Green(1);
        assert_eq!(pks_comparability(&s, r0, r0).unwrap().relation, Relation::Equal);
        assert_eq!(pks_comparability(&s, g1, g1).unwrap().relation, Relation::Equal);
        for (a, b) in [(r0, r1), (g0, g1), (r0, g0), (g1, r1)] {
            let c = pks_comparability(&s, a, b).unwrap();
            assert_eq!(c.relation, Relation::Incomparable);
            assert!(c.left_only.is_some() && c.right_only.is_some());
        }
    }

    #[test]
    fn witness_report() {
        let r = witness_check(&structure()).unwrap();
        assert!(r.ok(), "{:?}", r.failures);
        assert_eq!((r.rays, r.bases), (33, 16));
        assert_eq!(r.bases_in_complement, 6);
        assert_eq!(r.pairs_in_basis, 3);
        assert_eq!(r.verdict, "antichain: yes; inextendible: no");
    }

    #[test]
    fn random_colorings_are_covered() {
        let s = structure();
        let r = random_coverage(&s, 2000, 7);
        assert_eq!(r.covered, 2000);
        assert_eq!(sampled_comparability_violations(&s, 500, 7).unwrap(), 0);
    }
}
