//! Finite history spaces and their powerset lattice.
//!
//! An [`Event`] is a subset of the fine-grained histories `1..=n`, stored as
//! a bitmask. Label `i` lives in bit `i - 1`. Events order by mask value,
//! which is the canonical order used by every report in this crate.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};

/// Largest supported number of fine-grained histories.
pub const MAX_HISTORIES: usize = 24;

/// The set `Ω = {1, …, n}` of fine-grained histories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct HistorySpace {
    n: usize,
}

#[derive(Deserialize)]
struct RawSpace {
    n: usize,
}

impl TryFrom<RawSpace> for HistorySpace {
    type Error = Error;
    fn try_from(raw: RawSpace) -> Result<Self> {
        HistorySpace::new(raw.n)
    }
}

/// A subset of the histories of some [`HistorySpace`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    mask: u32,
    n: u8,
}

/// Direction of a lattice closure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

impl HistorySpace {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_HISTORIES {
            return out_of_range("n", n, 1, MAX_HISTORIES);
        }
        Ok(HistorySpace { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Mask with the low `n` bits set.
    pub fn full_mask(&self) -> u32 {
        if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        }
    }

    /// Number of events in the lattice, `2^n`.
    pub fn lattice_size(&self) -> u64 {
        1u64 << self.n
    }

    pub fn omega(&self) -> Event {
        Event {
            mask: self.full_mask(),
            n: self.n as u8,
        }
    }

    pub fn empty(&self) -> Event {
        Event {
            mask: 0,
            n: self.n as u8,
        }
    }

    pub fn event_from_mask(&self, mask: u32) -> Result<Event> {
        if mask & !self.full_mask() != 0 {
            return Err(Error::InvalidArgument(format!(
                "mask {mask:#b} uses bits beyond n = {}",
                self.n
            )));
        }
        Ok(Event {
            mask,
            n: self.n as u8,
        })
    }

    /// Builds an event from 1-based labels. Repeated labels are rejected.
    pub fn event(&self, labels: &[usize]) -> Result<Event> {
        let mut mask = 0u32;
        for &label in labels {
            if label == 0 || label > self.n {
                return out_of_range("label", label, 1, self.n);
            }
            let bit = 1u32 << (label - 1);
            if mask & bit != 0 {
                return Err(Error::InvalidArgument(format!("label {label} repeated")));
            }
            mask |= bit;
        }
        Ok(Event {
            mask,
            n: self.n as u8,
        })
    }

    pub fn singleton(&self, label: usize) -> Result<Event> {
        self.event(&[label])
    }

    /// All nonempty events, ascending by mask.
    pub fn nonempty_events(&self) -> impl Iterator<Item = Event> + '_ {
        (1..=self.full_mask()).map(move |mask| Event {
            mask,
            n: self.n as u8,
        })
    }

    /// All `C(n, k)` events of cardinality `k`, ascending by mask.
    pub fn level_elements(&self, k: usize) -> Result<Vec<Event>> {
        if k > self.n {
            return out_of_range("k", k, 0, self.n);
        }
        Ok(masks_of_weight(self.n, k)
            .map(|mask| Event {
                mask,
                n: self.n as u8,
            })
            .collect())
    }

    /// The `k`-level shadow of `a`: its `k`-subsets when `|a| > k`, its
    /// `k`-supersets when `|a| < k`.
    pub fn shadow(&self, a: Event, k: usize) -> Result<Vec<Event>> {
        self.check(a)?;
        if k == 0 || k >= self.n {
            return out_of_range("k", k, 1, self.n - 1);
        }
        let card = a.card();
        if card == k {
            return Err(Error::InvalidArgument(format!(
                "shadow on level {k} of an event already on that level"
            )));
        }
        let out = if card > k {
            subsets_of_weight(a.mask, k)
                .map(|mask| Event { mask, n: a.n })
                .collect()
        } else {
            let rest = self.full_mask() & !a.mask;
            subsets_of_weight(rest, k - card)
                .map(|extra| Event {
                    mask: a.mask | extra,
                    n: a.n,
                })
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()
        };
        Ok(out)
    }

    /// Up-closure `↑S` or down-closure `↓S` of a family of nonempty events.
    /// The empty event is never included in a down-closure.
    pub fn closure(&self, events: &[Event], direction: Direction) -> Result<BTreeSet<Event>> {
        if events.is_empty() {
            return Err(Error::InvalidArgument("closure of an empty family".into()));
        }
        let mut out = BTreeSet::new();
        for &a in events {
            self.check(a)?;
            if a.is_empty() {
                return Err(Error::InvalidArgument("closure of the empty event".into()));
            }
            match direction {
                Direction::Up => {
                    let rest = self.full_mask() & !a.mask;
                    for extra in submasks(rest) {
                        out.insert(Event {
                            mask: a.mask | extra,
                            n: a.n,
                        });
                    }
                }
                Direction::Down => {
                    for sub in submasks(a.mask).filter(|&m| m != 0) {
                        out.insert(Event { mask: sub, n: a.n });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Errors unless `a` lives in this space.
    pub fn check(&self, a: Event) -> Result<()> {
        if a.n as usize != self.n {
            return Err(Error::SpaceMismatch(self.n, a.n as usize));
        }
        Ok(())
    }
}

impl Event {
    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn space(&self) -> HistorySpace {
        HistorySpace { n: self.n as usize }
    }

    /// Cardinality, which is also the event's level in the lattice.
    pub fn card(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, label: usize) -> bool {
        label >= 1 && label <= self.n as usize && self.mask & (1 << (label - 1)) != 0
    }

    /// Ascending 1-based labels; this is the event's index set.
    pub fn labels(&self) -> Vec<usize> {
        bits(self.mask).map(|b| b + 1).collect()
    }

    pub fn is_subset(&self, other: &Event) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn is_superset(&self, other: &Event) -> bool {
        other.is_subset(self)
    }

    pub fn comparable(&self, other: &Event) -> bool {
        self.is_subset(other) || other.is_subset(self)
    }

    pub fn is_disjoint(&self, other: &Event) -> bool {
        self.mask & other.mask == 0
    }

    pub fn union(&self, other: &Event) -> Event {
        Event {
            mask: self.mask | other.mask,
            n: self.n,
        }
    }

    pub fn intersection(&self, other: &Event) -> Event {
        Event {
            mask: self.mask & other.mask,
            n: self.n,
        }
    }

    pub fn difference(&self, other: &Event) -> Event {
        Event {
            mask: self.mask & !other.mask,
            n: self.n,
        }
    }

    pub fn complement(&self) -> Event {
        Event {
            mask: self.space().full_mask() & !self.mask,
            n: self.n,
        }
    }

    /// 0/1 indicator vector over the labels.
    pub fn indicator(&self) -> Vec<u8> {
        (0..self.n as usize)
            .map(|i| ((self.mask >> i) & 1) as u8)
            .collect()
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, label) in self.labels().into_iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{label}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for Event {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.labels().serialize(s)
    }
}

/// Bit positions set in `mask`, ascending.
pub(crate) fn bits(mask: u32) -> impl Iterator<Item = usize> {
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

/// All submasks of `mask` (including 0 and `mask`), ascending.
pub(crate) fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut sub = 0u32;
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let cur = sub;
        if cur == mask {
            done = true;
        } else {
            // next submask in ascending order
            sub = (sub.wrapping_sub(mask)) & mask;
        }
        Some(cur)
    })
}

/// Submasks of `mask` with exactly `k` bits, ascending.
pub(crate) fn subsets_of_weight(mask: u32, k: usize) -> impl Iterator<Item = u32> {
    let positions: Vec<usize> = bits(mask).collect();
    masks_of_weight(positions.len(), k).map(move |m| {
        bits(m).fold(0u32, |acc, b| acc | (1 << positions[b]))
    })
}

/// All `n`-bit masks with exactly `k` bits set, ascending (Gosper's hack).
pub(crate) fn masks_of_weight(n: usize, k: usize) -> impl Iterator<Item = u32> {
    let limit: u64 = 1u64 << n;
    let mut next: Option<u64> = if k > n {
        None
    } else {
        Some((1u64 << k) - 1)
    };
    std::iter::from_fn(move || {
        let cur = next?;
        if cur >= limit && !(cur == 0 && k == 0) {
            return None;
        }
        next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            let candidate = (((r ^ cur) >> 2) / c) | r;
            (candidate < limit).then_some(candidate)
        };
        Some(cur as u32)
    })
}

/// Binomial coefficient as u64; exact for every argument used here (n ≤ 64).
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &HistorySpace, labels: &[usize]) -> Event {
        s.event(labels).unwrap()
    }

    #[test]
    fn space_bounds() {
        assert!(HistorySpace::new(0).is_err());
        assert!(HistorySpace::new(25).is_err());
        assert_eq!(HistorySpace::new(24).unwrap().full_mask(), (1 << 24) - 1);
    }

    #[test]
    fn level_elements_examples() {
        let s3 = HistorySpace::new(3).unwrap();
        assert_eq!(
            s3.level_elements(2).unwrap(),
            vec![ev(&s3, &[1, 2]), ev(&s3, &[1, 3]), ev(&s3, &[2, 3])]
        );
        let s4 = HistorySpace::new(4).unwrap();
        assert_eq!(
            s4.level_elements(1).unwrap(),
            (1..=4).map(|i| ev(&s4, &[i])).collect::<Vec<_>>()
        );
        let s5 = HistorySpace::new(5).unwrap();
        assert_eq!(s5.level_elements(2).unwrap().len(), 10);
        assert_eq!(s5.level_elements(0).unwrap(), vec![s5.empty()]);
        assert_eq!(s5.level_elements(5).unwrap(), vec![s5.omega()]);
        assert!(matches!(
            s5.level_elements(6),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn shadow_examples() {
        let s3 = HistorySpace::new(3).unwrap();
        assert_eq!(
            s3.shadow(ev(&s3, &[1, 2, 3]), 2).unwrap(),
            vec![ev(&s3, &[1, 2]), ev(&s3, &[1, 3]), ev(&s3, &[2, 3])]
        );
        assert_eq!(
            s3.shadow(ev(&s3, &[1]), 2).unwrap(),
            vec![ev(&s3, &[1, 2]), ev(&s3, &[1, 3])]
        );
        let s5 = HistorySpace::new(5).unwrap();
        assert_eq!(s5.shadow(ev(&s5, &[1, 2, 3, 4]), 2).unwrap().len(), 6);
        assert!(matches!(
            s5.shadow(ev(&s5, &[1, 2]), 2),
            Err(Error::InvalidArgument(_))
        ));
        assert!(s5.shadow(ev(&s5, &[1, 2]), 5).is_err());
    }

    #[test]
    fn closure_examples() {
        let s3 = HistorySpace::new(3).unwrap();
        let up = s3.closure(&[ev(&s3, &[1, 3])], Direction::Up).unwrap();
        assert_eq!(
            up.into_iter().collect::<Vec<_>>(),
            vec![ev(&s3, &[1, 3]), s3.omega()]
        );
        let down = s3.closure(&[s3.omega()], Direction::Down).unwrap();
        assert_eq!(down.len(), 7);
        let s2 = HistorySpace::new(2).unwrap();
        let up = s2
            .closure(&[ev(&s2, &[1]), ev(&s2, &[2])], Direction::Up)
            .unwrap();
        assert_eq!(up.len(), 3);
        assert!(s2.closure(&[], Direction::Up).is_err());
    }

    #[test]
    fn event_construction_rejects_bad_labels() {
        let s = HistorySpace::new(3).unwrap();
        assert!(s.event(&[0]).is_err());
        assert!(s.event(&[4]).is_err());
        assert!(s.event(&[1, 1]).is_err());
        assert!(s.event_from_mask(0b1000).is_err());
        let other = HistorySpace::new(4).unwrap();
        assert_eq!(
            s.check(other.omega()),
            Err(Error::SpaceMismatch(3, 4))
        );
    }

    #[test]
    fn event_serialises_as_labels() {
        let s = HistorySpace::new(3).unwrap();
        assert_eq!(serde_json::to_string(&ev(&s, &[1, 3])).unwrap(), "[1,3]");
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"n":3}"#);
        let back: HistorySpace = serde_json::from_str(r#"{"n": 3}"#).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<HistorySpace>(r#"{"n": 30}"#).is_err());
    }

    #[test]
    fn submask_iteration_is_complete() {
        let subs: Vec<u32> = submasks(0b1011).collect();
        assert_eq!(subs, vec![0, 1, 2, 3, 8, 9, 10, 11]);
        assert_eq!(masks_of_weight(4, 0).collect::<Vec<_>>(), vec![0]);
        assert_eq!(masks_of_weight(3, 3).collect::<Vec<_>>(), vec![7]);
        assert_eq!(masks_of_weight(24, 12).count() as u64, binomial(24, 12));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(24, 12), 2_704_156);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(0, 0), 1);
    }
}
