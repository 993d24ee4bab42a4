//! Preclusion and primitive preclusive coevents in the multiplicative scheme.
//!
//! A multiplicative coevent is determined by its support `a`: it is true on
//! exactly the supersets of `a`. It is preclusive when it is false on every
//! zero-measure set, i.e. when `a` is contained in no zero set. Coevents are
//! handled purely through their supports here.

use serde::Serialize;

use crate::antichain::{is_inextendible, Antichain};
use crate::error::{Error, Result};
use crate::histories::{bits, Event, HistorySpace};
use crate::measure::{DecoherenceFunctional, ExactFunctional};

/// Largest `n` for the `2^n` enumerations in this module.
pub const MAX_COEVENT_N: usize = 12;

/// Zero sets, primitive supports and the derived antichain `A' = A ⊔ M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreclusionStructure {
    pub zero_sets: Vec<Event>,
    pub ppc_supports: Antichain,
    pub derived: Antichain,
    pub m_part: Vec<Event>,
    /// Maximal precluded events, the largest zero sets.
    pub m_prime: Vec<Event>,
}

fn check_size(space: HistorySpace) -> Result<()> {
    if space.n() > MAX_COEVENT_N {
        return Err(Error::ResourceLimit(format!(
            "coevent analysis enumerates 2^n events; n = {} > {MAX_COEVENT_N}",
            space.n()
        )));
    }
    Ok(())
}

/// All nonempty events with `μ ≤ tol_zero`, ascending by mask.
pub fn zero_sets(d: &DecoherenceFunctional, tol_zero: f64) -> Result<Vec<Event>> {
    check_size(d.space())?;
    let table = d.measure_table()?;
    Ok(d.space()
        .nonempty_events()
        .filter(|e| table[e.mask() as usize] <= tol_zero)
        .collect())
}

/// All nonempty events whose measure is exactly zero.
pub fn zero_sets_exact(d: &ExactFunctional) -> Result<Vec<Event>> {
    check_size(d.space())?;
    use num_traits::Zero;
    Ok(d.space()
        .nonempty_events()
        .filter(|e| d.mu(*e).is_zero())
        .collect())
}

/// `precluded[mask]`: the event lies inside some zero set. The empty event
/// counts as precluded.
fn precluded_table(space: HistorySpace, zero_sets: &[Event]) -> Vec<bool> {
    let size = space.lattice_size() as usize;
    let mut precluded = vec![false; size];
    precluded[0] = true;
    for z in zero_sets {
        precluded[z.mask() as usize] = true;
    }
    let full = space.full_mask();
    for mask in (1..size as u32).rev() {
        if precluded[mask as usize] {
            continue;
        }
        precluded[mask as usize] =
            bits(full & !mask).any(|b| precluded[(mask | (1 << b)) as usize]);
    }
    precluded
}

/// Supports of the primitive preclusive coevents given the zero sets: the
/// minimal nonempty events contained in no zero set.
pub fn ppc_supports_from_zero_sets(space: HistorySpace, zero_sets: &[Event]) -> Result<Antichain> {
    check_size(space)?;
    for z in zero_sets {
        space.check(*z)?;
    }
    let precluded = precluded_table(space, zero_sets);
    if precluded[space.full_mask() as usize] {
        return Err(Error::NoCoevent(
            "μ(Ω) is zero, so every event is precluded".into(),
        ));
    }
    let minimal = space.nonempty_events().filter(|e| {
        let m = e.mask();
        !precluded[m as usize] && bits(m).all(|b| precluded[(m & !(1 << b)) as usize])
    });
    Antichain::new(space, minimal)
}

pub fn ppc_supports(d: &DecoherenceFunctional, tol_zero: f64) -> Result<Antichain> {
    ppc_supports_from_zero_sets(d.space(), &zero_sets(d, tol_zero)?)
}

/// Builds the full preclusion structure from a list of zero sets.
pub fn derived_from_zero_sets(
    space: HistorySpace,
    zero_sets: Vec<Event>,
) -> Result<PreclusionStructure> {
    let supports = ppc_supports_from_zero_sets(space, &zero_sets)?;
    let precluded = precluded_table(space, &zero_sets);
    let full = space.full_mask();
    // B \ (↑A \ A) = precluded events together with A itself; it is down-closed.
    let kept = |m: u32| precluded[m as usize] || supports.contains(&Event::from_space(space, m));
    let derived: Vec<Event> = space
        .nonempty_events()
        .filter(|e| {
            let m = e.mask();
            kept(m) && bits(full & !m).all(|b| !kept(m | (1 << b)))
        })
        .collect();
    let m_prime: Vec<Event> = space
        .nonempty_events()
        .filter(|e| {
            let m = e.mask();
            precluded[m as usize] && bits(full & !m).all(|b| !precluded[(m | (1 << b)) as usize])
        })
        .collect();
    let derived = Antichain::new(space, derived)
        .map_err(|e| Error::Internal(format!("derived family is not an antichain: {e}")))?;
    let m_part = derived
        .elements()
        .iter()
        .copied()
        .filter(|e| !supports.contains(e))
        .collect();
    Ok(PreclusionStructure {
        zero_sets,
        ppc_supports: supports,
        derived,
        m_part,
        m_prime,
    })
}

/// Zero sets, PPC supports, `A'` and `M` for `d`, with every structural
/// invariant checked.
pub fn derived_antichain(d: &DecoherenceFunctional, tol_zero: f64) -> Result<PreclusionStructure> {
    let s = derived_from_zero_sets(d.space(), zero_sets(d, tol_zero)?)?;
    s.check_invariants(|e| d.mu(*e) <= tol_zero)?;
    Ok(s)
}

pub fn derived_antichain_exact(d: &ExactFunctional) -> Result<PreclusionStructure> {
    use num_traits::Zero;
    let s = derived_from_zero_sets(d.space(), zero_sets_exact(d)?)?;
    s.check_invariants(|e| d.mu(*e).is_zero())?;
    Ok(s)
}

impl PreclusionStructure {
    /// Verifies the relations between `A`, `A'`, `M`, `M'` and the zero sets.
    pub fn check_invariants(&self, is_zero: impl Fn(&Event) -> bool) -> Result<()> {
        let fail = |msg: String| Err(Error::Consistency(msg));
        let space = self.derived.space();
        let supports = self.ppc_supports.elements();
        for a in supports {
            if let Some(z) = self.zero_sets.iter().find(|z| a.is_subset(z)) {
                return fail(format!("support {a} lies inside zero set {z}"));
            }
        }
        for m in &self.m_part {
            if !is_zero(m) {
                return fail(format!("M element {m} does not have zero measure"));
            }
            if !self.m_prime.contains(m) {
                return fail(format!("M element {m} is not in M'"));
            }
        }
        for m in &self.m_prime {
            if !is_zero(m) {
                return fail(format!("M' element {m} does not have zero measure"));
            }
            if !self.m_part.contains(m) && !supports.iter().any(|a| m.is_subset(a)) {
                return fail(format!("M' element {m} is neither in M nor below A"));
            }
        }
        if !is_inextendible(space, &self.derived)?.0 {
            return fail("derived antichain is extendible".into());
        }
        let derived = self.derived.elements();
        for z in &self.zero_sets {
            if !derived.iter().any(|a| z.is_subset(a)) {
                return fail(format!("zero set {z} is not below the derived antichain"));
            }
        }
        for e in space.nonempty_events() {
            let above_support = supports.iter().any(|a| a.is_subset(&e));
            if above_support && self.zero_sets.iter().any(|z| e.is_subset(z)) {
                return fail(format!("{e} is in ↑A but inside a zero set"));
            }
            if !above_support && !derived.iter().any(|a| e.is_subset(a)) {
                return fail(format!("{e} is neither in ↑A nor below A'"));
            }
        }
        Ok(())
    }
}

/// An `(n−1)`-level event of nonzero measure, which shows that the primitive
/// preclusive coevents are not the single trivial one supported on `Ω`.
/// Picks the largest measure, ties going to the smallest mask.
pub fn nontriviality(d: &DecoherenceFunctional, tol_zero: f64) -> Result<Event> {
    let space = d.space();
    let n = space.n();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "nontriviality needs at least two histories".into(),
        ));
    }
    if d.mu(space.omega()) <= tol_zero {
        return Err(Error::InvalidArgument("μ(Ω) must be positive".into()));
    }
    let mut best: Option<(Event, f64)> = None;
    for e in space.level_elements(n - 1)? {
        let mu = d.mu(e);
        if mu <= tol_zero {
            continue;
        }
        match best {
            Some((_, b)) if mu <= b + tol_zero => {}
            _ => best = Some((e, mu)),
        }
    }
    best.map(|(e, _)| e).ok_or_else(|| {
        Error::Internal("every (n-1)-level event has zero measure although μ(Ω) > 0".into())
    })
}

impl Event {
    pub(crate) fn from_space(space: HistorySpace, mask: u32) -> Event {
        space
            .event_from_mask(mask)
            .expect("mask produced inside this space")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::decide;
    use crate::measure::fixtures::*;
    use crate::measure::sample_spd;

    const TOL: f64 = 1e-9;

    fn ev(n: usize, labels: &[usize]) -> Event {
        HistorySpace::new(n).unwrap().event(labels).unwrap()
    }

    #[test]
    fn zero_set_examples() {
        assert_eq!(zero_sets(&two_slit(), TOL).unwrap(), vec![ev(2, &[1, 2])]);
        assert_eq!(
            zero_sets(&three_slit(), TOL).unwrap(),
            vec![ev(3, &[1, 2]), ev(3, &[2, 3])]
        );
        let diag = DecoherenceFunctional::diagonal(&[0.2, 0.3, 0.5]).unwrap();
        assert!(zero_sets(&diag, TOL).unwrap().is_empty());
        let exact = ExactFunctional::from_file(&three_slit_file()).unwrap();
        assert_eq!(
            zero_sets_exact(&exact).unwrap(),
            vec![ev(3, &[1, 2]), ev(3, &[2, 3])]
        );
    }

    #[test]
    fn ppc_support_examples() {
        let s = ppc_supports(&three_slit(), TOL).unwrap();
        assert_eq!(s.elements(), &[ev(3, &[1, 3])]);
        let diag = DecoherenceFunctional::diagonal(&[0.2, 0.3, 0.5]).unwrap();
        let s = ppc_supports(&diag, TOL).unwrap();
        assert_eq!(s.elements(), &[ev(3, &[1]), ev(3, &[2]), ev(3, &[3])]);
        assert!(matches!(
            ppc_supports(&two_slit(), TOL),
            Err(Error::NoCoevent(_))
        ));
    }

    #[test]
    fn derived_antichain_three_slit() {
        let s = derived_antichain(&three_slit(), TOL).unwrap();
        assert_eq!(s.ppc_supports.elements(), &[ev(3, &[1, 3])]);
        assert_eq!(s.m_part, vec![ev(3, &[1, 2]), ev(3, &[2, 3])]);
        assert_eq!(
            s.derived.elements(),
            &[ev(3, &[1, 2]), ev(3, &[1, 3]), ev(3, &[2, 3])]
        );
        assert_eq!(s.m_prime, s.m_part);
        let v = decide(s.derived.space(), s.derived.elements()).unwrap();
        assert!(v.is_cover);
    }

    #[test]
    fn derived_antichain_classical() {
        let diag = DecoherenceFunctional::diagonal(&[0.25; 4]).unwrap();
        let s = derived_antichain(&diag, TOL).unwrap();
        assert_eq!(s.ppc_supports.len(), 4);
        assert!(s.m_part.is_empty());
        assert_eq!(s.derived, s.ppc_supports);
    }

    #[test]
    fn exact_mode_matches_float_mode() {
        let exact = ExactFunctional::from_file(&three_slit_file()).unwrap();
        let a = derived_antichain_exact(&exact).unwrap();
        let b = derived_antichain(&three_slit(), TOL).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nontriviality_examples() {
        assert_eq!(nontriviality(&three_slit(), TOL).unwrap(), ev(3, &[1, 3]));
        let u = uniform_classical(4);
        let a = nontriviality(&u, TOL).unwrap();
        assert_eq!(a, ev(4, &[1, 2, 3]));
        assert!((u.mu(a) - 0.75).abs() < 1e-12);
        assert!(nontriviality(&two_slit(), TOL).is_err());
    }

    #[test]
    fn invariants_hold_on_sampled_functionals_with_zero_sets() {
        for seed in 0..40u64 {
            let n = 3 + (seed as usize % 4);
            let space = HistorySpace::new(n).unwrap();
            // Annihilate one or two pseudo-random events of size >= 2.
            let pick = |k: u64| {
                let m = seed.wrapping_mul(2654435761).wrapping_add(k * 97) % space.full_mask() as u64;
                space.event_from_mask(m as u32 + 1).unwrap()
            };
            let mut ann = vec![pick(1)];
            if seed % 2 == 0 {
                ann.push(pick(2));
            }
            let d = match sample_spd(n, n, seed, &ann, true, TOL) {
                Ok(d) => d,
                Err(Error::InfeasibleNormalization(_)) => continue,
                Err(e) => panic!("{e}"),
            };
            let s = derived_antichain(&d, TOL).unwrap();
            for z in &ann {
                assert!(s.zero_sets.contains(z));
            }
            let a = nontriviality(&d, TOL).unwrap();
            assert!(s.ppc_supports.elements().iter().any(|p| p.is_subset(&a)));
        }
    }
}
