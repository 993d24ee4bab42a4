//! Independent brute-force oracles. Their outputs are frozen here and must
//! agree with the library's algorithms.

use std::collections::BTreeSet;

use qcover::antichain::{enumerate_inextendible, is_inextendible};
use qcover::cover::{level_indicator_sum, level_sum_check};
use qcover::measure::{sample_spd, verify_identity};
use qcover::pks::{peres_rays, PeresStructure};
use qcover::{binomial, HistorySpace};

/// Maximal antichains of nonempty subsets of `{0..n}`, by checking every
/// family of events directly.
fn brute_force_antichains(n: usize) -> BTreeSet<Vec<u32>> {
    let events: Vec<u32> = (1u32..1 << n).collect();
    let comparable = |a: u32, b: u32| a & b == a || a & b == b;
    let mut found = BTreeSet::new();
    for family in 1u64..1 << events.len() {
        let members: Vec<u32> = (0..events.len())
            .filter(|i| family >> i & 1 == 1)
            .map(|i| events[i])
            .collect();
        let antichain = members
            .iter()
            .enumerate()
            .all(|(i, &a)| members[i + 1..].iter().all(|&b| !comparable(a, b)));
        if !antichain {
            continue;
        }
        let maximal = events
            .iter()
            .all(|&e| members.iter().any(|&m| comparable(e, m)));
        if maximal {
            found.insert(members);
        }
    }
    found
}

/// Maximal antichains by include/exclude recursion over events in mask
/// order; feasible one size further than the flat brute force.
fn recursive_antichains(n: usize) -> usize {
    fn rec(events: &[u32], i: usize, chosen: &mut Vec<u32>, count: &mut usize) {
        let comparable = |a: u32, b: u32| a & b == a || a & b == b;
        if i == events.len() {
            if events.iter().all(|&e| chosen.iter().any(|&m| comparable(e, m))) {
                *count += 1;
            }
            return;
        }
        let e = events[i];
        if chosen.iter().all(|&m| !comparable(e, m)) {
            chosen.push(e);
            rec(events, i + 1, chosen, count);
            chosen.pop();
        }
        rec(events, i + 1, chosen, count);
    }
    let events: Vec<u32> = (1u32..1 << n).collect();
    let mut count = 0;
    rec(&events, 0, &mut Vec::new(), &mut count);
    count
}

#[test]
fn antichain_enumeration_matches_brute_force() {
    let frozen = [1usize, 2, 6, 28];
    for n in 1..=4 {
        let space = HistorySpace::new(n).unwrap();
        let oracle = brute_force_antichains(n);
        assert_eq!(oracle.len(), frozen[n - 1], "oracle count for n = {n}");
        let ours: BTreeSet<Vec<u32>> = enumerate_inextendible(space)
            .unwrap()
            .iter()
            .map(|ac| ac.masks())
            .collect();
        assert_eq!(ours, oracle, "n = {n}");
    }
}

#[test]
fn antichain_count_n5_matches_recursive_oracle() {
    let n = 5;
    let oracle = recursive_antichains(n);
    assert_eq!(oracle, 375);
    let all = enumerate_inextendible(HistorySpace::new(n).unwrap()).unwrap();
    assert_eq!(all.len(), oracle);
    for ac in &all {
        assert!(is_inextendible(ac.space(), ac).unwrap().0);
        assert_eq!(ac.union(), ac.space().omega());
    }
}

#[test]
fn level_indicator_counts_match_direct_count() {
    for n in 1..=12usize {
        let space = HistorySpace::new(n).unwrap();
        for k in 1..=n {
            let mut counts = vec![0u64; n];
            for mask in 1u32..1 << n {
                if mask.count_ones() as usize == k {
                    for (i, c) in counts.iter_mut().enumerate() {
                        *c += u64::from(mask >> i & 1);
                    }
                }
            }
            assert_eq!(level_indicator_sum(space, k).unwrap(), counts);
            assert!(counts.iter().all(|&c| c == binomial(n - 1, k - 1)));
        }
    }
}

#[test]
fn level_sum_closed_form_matches_direct_sum() {
    for n in 3..=8 {
        for seed in 0..10 {
            let d = sample_spd(n, n, 1000 + seed, &[], true, 1e-9).unwrap();
            let space = d.space();
            let singles: f64 = (1..=n).map(|i| d.mu(space.singleton(i).unwrap())).sum();
            let mu_omega = d.mu(space.omega());
            for k in 2..n {
                let direct: f64 = space
                    .nonempty_events()
                    .filter(|e| e.card() == k)
                    .map(|e| d.mu(e))
                    .sum();
                let closed = binomial(n - 2, k - 2) as f64
                    * (mu_omega + (n - k) as f64 / (k - 1) as f64 * singles);
                assert!((direct - closed).abs() < 1e-9, "n={n} k={k}");
                let r = level_sum_check(&d, k, 1e-9).unwrap();
                assert!((r.lhs - direct).abs() < 1e-12);
                assert!(r.identity_ok && r.inequality_ok);
            }
        }
    }
}

#[test]
fn level_two_identity_holds_for_hermitian_non_positive_functionals() {
    // Diagonal entries of both signs: Hermitian but not positive.
    let d = qcover::DecoherenceFunctional::from_real(&[
        vec![1.0, 0.3, -0.2, 0.5],
        vec![0.3, -2.0, 0.7, 0.0],
        vec![-0.2, 0.7, 0.4, 1.1],
        vec![0.5, 0.0, 1.1, -0.6],
    ])
    .unwrap();
    assert!(verify_identity(&d).unwrap() < 1e-12);
}

/// Orthogonality recomputed in floating point, independent of `Z[√2]`.
#[test]
fn peres_structure_matches_float_oracle() {
    let rays: Vec<[f64; 3]> = peres_rays().unwrap().iter().map(|r| r.to_f64()).collect();
    let m = rays.len();
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let orth = |i: usize, j: usize| dot(&rays[i], &rays[j]).abs() < 1e-9;
    let mut pairs = 0;
    let mut bases = 0;
    let mut degree = vec![0usize; m];
    for i in 0..m {
        for j in i + 1..m {
            if !orth(i, j) {
                continue;
            }
            pairs += 1;
            for k in j + 1..m {
                if orth(i, k) && orth(j, k) {
                    bases += 1;
                    for r in [i, j, k] {
                        degree[r] += 1;
                    }
                }
            }
        }
    }
    assert_eq!(m, 33);
    assert_eq!(bases, 16);
    assert_eq!(pairs, 72);
    assert!(degree.iter().all(|&d| d >= 1));
    let mut histogram = degree.clone();
    histogram.sort();
    assert_eq!(histogram.iter().filter(|&&d| d == 1).count(), 24);
    assert_eq!(histogram.iter().filter(|&&d| d == 2).count(), 6);
    assert_eq!(histogram.iter().filter(|&&d| d == 4).count(), 3);

    let s = PeresStructure::peres().unwrap();
    assert_eq!(s.pairs.len(), pairs);
    assert_eq!(s.bases.len(), bases);
    assert_eq!(s.basis_degrees(), degree);
}
