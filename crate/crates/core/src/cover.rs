//! Quantum covers of `Ω`.
//!
//! A family `{O_i}` with `∪ O_i = Ω` is a quantum cover when `μ(O_i) = 0`
//! for every `i` forces `μ(Ω) = 0`. For a strongly positive functional `D`,
//! `μ(A) = 0` holds exactly when `D χ_A = 0`, so the zero conditions say that
//! `D` annihilates `span{χ_{O_i}}`. The family is therefore a cover for every
//! strongly positive `D` iff `χ_Ω` lies in that span. When it does not, the
//! orthogonal projector onto the complement of the span is a strongly
//! positive functional that vanishes on every `O_i` but not on `Ω`.
//!
//! Span membership is decided in exact rational arithmetic, so a verdict is
//! a proof rather than a numerical estimate. Witness projectors are exact
//! too and are only rounded when turned into a [`DecoherenceFunctional`].

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::antichain::{
    classify, decompose, enumerate_inextendible_with_limit, generate, is_inextendible,
    isomorphic, Antichain, AntichainFile, GeneratorKind,
};
use crate::error::{Error, Result};
use crate::histories::{bits, binomial, masks_of_weight, Event, HistorySpace};
use crate::measure::{DecoherenceFunctional, C64};
use crate::span::{self, rat, Rational, RationalMatrix};

/// Outcome of [`decide`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoverVerdict {
    pub is_cover: bool,
    pub union_is_omega: bool,
    /// Labels outside the union of the family.
    pub uncovered: Vec<usize>,
    /// Exact `c_i` with `Σ c_i χ_{O_i} = χ_Ω`, present iff `is_cover`.
    pub coefficients: Option<Vec<Rational>>,
    /// Strongly positive functional with `μ(O_i) = 0` and `μ(Ω) > 0`.
    pub witness: Option<Witness>,
}

/// A non-cover witness: the exact projector and its rounded functional.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub projector: RationalMatrix,
    /// Exact `μ(Ω) = ‖P χ_Ω‖²`.
    pub mu_omega: Rational,
    pub functional: DecoherenceFunctional,
}

#[derive(Serialize)]
struct VerdictJson<'a> {
    is_cover: bool,
    union_is_omega: bool,
    uncovered: &'a [usize],
    coefficients: Option<Vec<String>>,
    witness: Option<WitnessJson>,
}

#[derive(Serialize)]
struct WitnessJson {
    mu_omega: String,
    mu_omega_f64: f64,
    functional: crate::measure::MatrixFile,
}

impl Serialize for CoverVerdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        VerdictJson {
            is_cover: self.is_cover,
            union_is_omega: self.union_is_omega,
            uncovered: &self.uncovered,
            coefficients: self
                .coefficients
                .as_ref()
                .map(|cs| cs.iter().map(|c| c.to_string()).collect()),
            witness: self.witness.as_ref().map(|w| WitnessJson {
                mu_omega: w.mu_omega.to_string(),
                mu_omega_f64: span::to_f64(&w.mu_omega),
                functional: w.functional.to_file(),
            }),
        }
        .serialize(s)
    }
}

fn indicator(e: &Event) -> Vec<Rational> {
    e.indicator().into_iter().map(|b| rat(b as i64)).collect()
}

/// Decides whether `events` is a quantum cover of `Ω` for every strongly
/// positive decoherence functional.
pub fn decide(space: HistorySpace, events: &[Event]) -> Result<CoverVerdict> {
    if events.is_empty() {
        return Err(Error::InvalidArgument("empty covering family".into()));
    }
    for (i, e) in events.iter().enumerate() {
        space.check(*e)?;
        if e.is_empty() {
            return Err(Error::InvalidArgument(
                "the empty event cannot be a cover element".into(),
            ));
        }
        if events[..i].contains(e) {
            return Err(Error::InvalidArgument(format!("duplicate cover element {e}")));
        }
    }
    let n = space.n();
    let union = events.iter().fold(space.empty(), |acc, e| acc.union(e));
    if union != space.omega() {
        return Ok(CoverVerdict {
            is_cover: false,
            union_is_omega: false,
            uncovered: union.complement().labels(),
            coefficients: None,
            witness: None,
        });
    }
    let columns: Vec<Vec<Rational>> = events.iter().map(indicator).collect();
    let a = RationalMatrix::from_columns(n, &columns);
    let ones = vec![rat(1); n];
    if let Some(coefficients) = a.solve(&ones) {
        return Ok(CoverVerdict {
            is_cover: true,
            union_is_omega: true,
            uncovered: Vec::new(),
            coefficients: Some(coefficients),
            witness: None,
        });
    }
    let complement = a.transpose().null_space();
    let projector = span::projector(n, &complement);
    let p_ones = projector.mul_vec(&ones);
    let mu_omega = span::dot(&ones, &p_ones);
    let entries = DMatrix::from_fn(n, n, |i, j| C64::new(span::to_f64(&projector[(i, j)]), 0.0));
    let functional = DecoherenceFunctional::new(entries, 0.0)?;
    Ok(CoverVerdict {
        is_cover: false,
        union_is_omega: true,
        uncovered: Vec::new(),
        coefficients: None,
        witness: Some(Witness {
            projector,
            mu_omega,
            functional,
        }),
    })
}

/// Exact `μ(E) = χ_Eᵀ P χ_E` under a witness projector.
pub fn witness_measure(w: &Witness, e: &Event) -> Rational {
    let chi = indicator(e);
    span::dot(&chi, &w.projector.mul_vec(&chi))
}

/// Which analytic argument certifies an antichain as a quantum cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CertificateKind {
    #[serde(rename = "lemma1_level_k")]
    Lemma1LevelK,
    #[serde(rename = "lemma3_class_C")]
    Lemma3ClassC,
    #[serde(rename = "example_A1")]
    ExampleA1,
    #[serde(rename = "example_A2")]
    ExampleA2,
    #[serde(rename = "example_A3")]
    ExampleA3,
    #[serde(rename = "example_A4")]
    ExampleA4,
}

impl CertificateKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CertificateKind::Lemma1LevelK => "lemma1_level_k",
            CertificateKind::Lemma3ClassC => "lemma3_class_C",
            CertificateKind::ExampleA1 => "example_A1",
            CertificateKind::ExampleA2 => "example_A2",
            CertificateKind::ExampleA3 => "example_A3",
            CertificateKind::ExampleA4 => "example_A4",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub pivot_k: usize,
    pub s0: usize,
    pub p: usize,
    pub narrative: String,
}

/// An analytic class-𝒞 certificate for an inextendible antichain, if one
/// applies. Absence says nothing about whether `ac` is a cover.
pub fn certificate_class_c(space: HistorySpace, ac: &Antichain) -> Result<Option<Certificate>> {
    let (maximal, witness) = is_inextendible(space, ac)?;
    if !maximal {
        return Err(Error::InvalidArgument(format!(
            "antichain is extendible by {}",
            witness.expect("witness accompanies extendible antichains")
        )));
    }
    let levels = ac.levels();
    if let [k] = levels[..] {
        let d = decompose(space, ac, k);
        return Ok(Some(Certificate {
            kind: CertificateKind::Lemma1LevelK,
            pivot_k: k,
            s0: d.s0,
            p: d.p,
            narrative: format!(
                "all {} events of level {k}; summing their zero measures over the level forces μ(Ω) = 0",
                binomial(space.n(), k)
            ),
        }));
    }
    for d in classify(space, ac)? {
        if d.in_class_c {
            return Ok(Some(Certificate {
                kind: CertificateKind::Lemma3ClassC,
                pivot_k: d.k,
                s0: d.s0,
                p: d.p,
                narrative: format!(
                    "pivot k = {}: lowest level s0 = {} in Λ(<k) ⊔ Λ(k), and p = {} >= k - s0 + 1 = {} histories avoid every off-pivot element",
                    d.k,
                    d.s0,
                    d.p,
                    d.r()
                ),
            }));
        }
    }
    for kind in GeneratorKind::examples_for(space.n()) {
        let instance = generate(space, kind)?;
        if !isomorphic(ac, &instance) {
            continue;
        }
        let n = space.n();
        let (cert_kind, pivot) = match kind {
            GeneratorKind::A1 => (CertificateKind::ExampleA1, n - 2),
            GeneratorKind::A2 => (CertificateKind::ExampleA2, n.div_ceil(2)),
            GeneratorKind::A3 { m } => (CertificateKind::ExampleA3, (n - 1) / m + 1),
            GeneratorKind::A4 { l } => (CertificateKind::ExampleA4, l),
            GeneratorKind::LevelK { .. } => unreachable!("not an example family"),
        };
        let d = decompose(space, &instance, pivot);
        let params = match kind {
            GeneratorKind::A3 { m } => format!(" with m = {m}"),
            GeneratorKind::A4 { l } => format!(" with l = {l}"),
            _ => String::new(),
        };
        return Ok(Some(Certificate {
            kind: cert_kind,
            pivot_k: pivot,
            s0: d.s0,
            p: d.p,
            narrative: format!(
                "relabelling of the {} family{params} at n = {n} (pivot k = {pivot}, s0 = {}, p = {})",
                kind.name(),
                d.s0,
                d.p
            ),
        }));
    }
    Ok(None)
}

/// Per-antichain result inside a [`ScanReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanEntry {
    pub antichain: AntichainFile,
    pub is_cover: bool,
    pub certificate: Option<CertificateKind>,
}

/// Summary of a full conjecture scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub n: usize,
    pub total: usize,
    pub covers: usize,
    /// Inextendible antichains that are not quantum covers.
    pub counterexamples: Vec<AntichainFile>,
    /// Covers with no analytic certificate.
    pub uncertified: Vec<AntichainFile>,
    pub certificate_tallies: BTreeMap<String, usize>,
    /// Certified antichains whose span test failed; always empty unless a
    /// certificate is unsound.
    pub inconsistent: Vec<AntichainFile>,
    pub elapsed_ms: u64,
}

/// Runs [`decide`] and [`certificate_class_c`] on every inextendible
/// antichain of `space`. The report does not depend on `workers`.
pub fn scan(space: HistorySpace, workers: usize, limit: usize) -> Result<ScanReport> {
    let start = Instant::now();
    let antichains = enumerate_inextendible_with_limit(space, limit)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Internal(format!("worker pool: {e}")))?;
    let entries: Vec<ScanEntry> = pool.install(|| {
        antichains
            .par_iter()
            .map(|ac| -> Result<ScanEntry> {
                let verdict = decide(space, ac.elements())?;
                let cert = certificate_class_c(space, ac)?;
                Ok(ScanEntry {
                    antichain: ac.to_file(),
                    is_cover: verdict.is_cover,
                    certificate: cert.map(|c| c.kind),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut report = ScanReport {
        n: space.n(),
        total: entries.len(),
        covers: 0,
        counterexamples: Vec::new(),
        uncertified: Vec::new(),
        certificate_tallies: BTreeMap::new(),
        inconsistent: Vec::new(),
        elapsed_ms: 0,
    };
    for e in entries {
        if e.is_cover {
            report.covers += 1;
        } else {
            report.counterexamples.push(e.antichain.clone());
        }
        match e.certificate {
            Some(kind) => {
                *report
                    .certificate_tallies
                    .entry(kind.as_str().to_string())
                    .or_default() += 1;
                if !e.is_cover {
                    report.inconsistent.push(e.antichain);
                }
            }
            None if e.is_cover => report.uncertified.push(e.antichain),
            None => {}
        }
    }
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Per-label counts of `Σ_{|a|=k} χ_a`, by direct enumeration of the level.
pub fn level_indicator_sum(space: HistorySpace, k: usize) -> Result<Vec<u64>> {
    let n = space.n();
    if k == 0 || k > n {
        return crate::error::out_of_range("k", k, 1, n);
    }
    let mut counts = vec![0u64; n];
    for mask in masks_of_weight(n, k) {
        for b in bits(mask) {
            counts[b] += 1;
        }
    }
    Ok(counts)
}

/// Checks `Σ_{|a|=k} χ_a = C(n−1, k−1) χ_Ω` exactly.
pub fn lemma1_span_identity(space: HistorySpace, k: usize) -> Result<bool> {
    let expected = binomial(space.n() - 1, k - 1);
    Ok(level_indicator_sum(space, k)?
        .into_iter()
        .all(|c| c == expected))
}

/// Level-sum identity and the classical-cover inequality for level `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSum {
    pub k: usize,
    /// `Σ_{|a|=k} μ(a)`.
    pub lhs: f64,
    /// `C(n−2, k−2) [μ(Ω) + (n−k)/(k−1) Σ_i μ({i})]`.
    pub rhs_identity: f64,
    pub residual: f64,
    pub mu_omega: f64,
    pub identity_ok: bool,
    /// `lhs ≥ μ(Ω) − tol`.
    pub inequality_ok: bool,
}

pub fn level_sum_check(d: &DecoherenceFunctional, k: usize, tol: f64) -> Result<LevelSum> {
    let space = d.space();
    let n = space.n();
    if n < 3 || k < 2 || k > n - 1 {
        return crate::error::out_of_range("k", k, 2, n.saturating_sub(1));
    }
    let lhs: f64 = masks_of_weight(n, k).map(|m| d.mu_mask(m)).sum();
    let singles: f64 = (0..n).map(|i| d.mu_mask(1 << i)).sum();
    let mu_omega = d.mu(space.omega());
    let rhs_identity = binomial(n - 2, k - 2) as f64
        * (mu_omega + (n - k) as f64 / (k - 1) as f64 * singles);
    let residual = (lhs - rhs_identity).abs();
    let scale = d.scale();
    Ok(LevelSum {
        k,
        lhs,
        rhs_identity,
        residual,
        mu_omega,
        identity_ok: residual <= tol * scale * binomial(n, k) as f64,
        inequality_ok: lhs >= mu_omega - tol * scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::antichain::enumerate_inextendible;
    use crate::measure::fixtures::*;
    use crate::measure::{sample_spd, Tolerances};
    use num_rational::BigRational;
    use num_traits::Zero;

    fn space(n: usize) -> HistorySpace {
        HistorySpace::new(n).unwrap()
    }

    fn events(n: usize, sets: &[&[usize]]) -> Vec<Event> {
        sets.iter().map(|s| space(n).event(s).unwrap()).collect()
    }

    fn half() -> Rational {
        BigRational::new(1.into(), 2.into())
    }

    #[test]
    fn three_slit_pair_is_not_a_cover() {
        let fam = events(3, &[&[1, 2], &[2, 3]]);
        let v = decide(space(3), &fam).unwrap();
        assert!(v.union_is_omega && !v.is_cover);
        let w = v.witness.unwrap();
        assert_eq!(w.mu_omega, BigRational::new(1.into(), 3.into()));
        for e in &fam {
            assert!(witness_measure(&w, e).is_zero());
            assert!(w.functional.mu(*e).abs() < 1e-12);
        }
        assert!((w.functional.mu(space(3).omega()) - 1.0 / 3.0).abs() < 1e-12);
        assert!(w.functional.is_strongly_positive(1e-9));
        // Projector onto (1,-1,1)/√3.
        assert_eq!(w.projector[(0, 1)], BigRational::new((-1).into(), 3.into()));
    }

    #[test]
    fn level_two_family_is_a_cover() {
        let v = decide(space(3), &events(3, &[&[1, 2], &[1, 3], &[2, 3]])).unwrap();
        assert!(v.is_cover);
        assert_eq!(v.coefficients.unwrap(), vec![half(), half(), half()]);
        for n in 1..=5 {
            let v = decide(space(n), &[space(n).omega()]).unwrap();
            assert_eq!(v.coefficients.unwrap(), vec![rat(1)]);
        }
    }

    #[test]
    fn decide_reports_uncovered_labels_and_rejects_bad_input() {
        let v = decide(space(3), &events(3, &[&[1], &[2]])).unwrap();
        assert!(!v.union_is_omega && !v.is_cover);
        assert_eq!(v.uncovered, vec![3]);
        assert!(v.witness.is_none());
        assert!(decide(space(3), &events(3, &[&[1], &[1]])).is_err());
        assert!(decide(space(3), &[]).is_err());
        assert!(decide(space(3), &[space(3).empty()]).is_err());
        assert!(decide(space(3), &events(4, &[&[1]])).is_err());
    }

    #[test]
    fn decide_accepts_comparable_families() {
        // {1} ⊂ {1,2}: not an antichain but still a legitimate family.
        let v = decide(space(2), &events(2, &[&[1], &[1, 2]])).unwrap();
        assert!(v.is_cover);
        assert!(v.coefficients.unwrap().iter().any(|c| !c.is_zero()));
    }

    #[test]
    fn certificate_examples() {
        let level = generate(space(4), GeneratorKind::LevelK { k: 2 }).unwrap();
        let c = certificate_class_c(space(4), &level).unwrap().unwrap();
        assert_eq!((c.kind, c.pivot_k), (CertificateKind::Lemma1LevelK, 2));

        let ac = Antichain::from_labels(space(4), &[&[1, 2, 3], &[1, 4], &[2, 4], &[3, 4]]).unwrap();
        let c = certificate_class_c(space(4), &ac).unwrap().unwrap();
        assert_eq!(c.kind, CertificateKind::Lemma3ClassC);
        assert_eq!((c.pivot_k, c.s0, c.p), (2, 2, 1));

        let a1 = generate(space(5), GeneratorKind::A1).unwrap();
        let c = certificate_class_c(space(5), &a1).unwrap().unwrap();
        assert_eq!(c.kind, CertificateKind::ExampleA1);
        assert_eq!((c.pivot_k, c.p), (3, 0));

        let a2 = generate(space(5), GeneratorKind::A2).unwrap();
        let c = certificate_class_c(space(5), &a2).unwrap().unwrap();
        assert_eq!(c.kind, CertificateKind::ExampleA2);
        assert_eq!((c.pivot_k, c.s0, c.p), (3, 2, 1));

        let open = Antichain::from_labels(space(3), &[&[1], &[2]]).unwrap();
        assert!(certificate_class_c(space(3), &open).is_err());
    }

    #[test]
    fn scan_small_spaces() {
        let r2 = scan(space(2), 1, 5).unwrap();
        assert_eq!((r2.total, r2.covers), (2, 2));
        let r3 = scan(space(3), 2, 5).unwrap();
        assert_eq!(r3.total, 6);
        assert!(r3.counterexamples.is_empty() && r3.inconsistent.is_empty());
    }

    #[test]
    fn scan_is_independent_of_worker_count() {
        let mut a = scan(space(4), 1, 5).unwrap();
        let mut b = scan(space(4), 4, 5).unwrap();
        a.elapsed_ms = 0;
        b.elapsed_ms = 0;
        assert_eq!(a, b);
    }

    #[test]
    fn lemma1_identity_small() {
        for n in 1..=8 {
            for k in 1..=n {
                assert!(lemma1_span_identity(space(n), k).unwrap());
            }
        }
        assert!(level_indicator_sum(space(3), 0).is_err());
    }

    #[test]
    fn level_sum_examples() {
        // Uniform classical n = 4, k = 2: six pairs of measure 1/2 each.
        let d = uniform_classical(4);
        let r = level_sum_check(&d, 2, 1e-10).unwrap();
        assert!((r.lhs - 3.0).abs() < 1e-12);
        assert!((r.rhs_identity - 3.0).abs() < 1e-12);
        assert!(r.identity_ok && r.inequality_ok);
        assert!(level_sum_check(&d, 4, 1e-10).is_err());
        assert!(level_sum_check(&d, 1, 1e-10).is_err());

        let tol = Tolerances::default();
        for seed in 0..100 {
            let d = sample_spd(4, 1 + (seed as usize % 4), seed, &[], true, tol.zero).unwrap();
            let r = level_sum_check(&d, 2, tol.identity).unwrap();
            assert!(r.residual <= 1e-10, "seed {seed}: {}", r.residual);
            assert!(r.inequality_ok);
        }
    }

    #[test]
    fn witness_serialises_with_exact_values() {
        let v = decide(space(3), &events(3, &[&[1, 2], &[2, 3]])).unwrap();
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["witness"]["mu_omega"], "1/3");
        assert_eq!(json["coefficients"], serde_json::Value::Null);
        let v = decide(space(3), &events(3, &[&[1, 2], &[1, 3], &[2, 3]])).unwrap();
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["coefficients"], serde_json::json!(["1/2", "1/2", "1/2"]));
    }

    #[test]
    fn every_small_inextendible_antichain_covers() {
        for n in 1..=4 {
            for ac in enumerate_inextendible(space(n)).unwrap() {
                assert!(decide(space(n), ac.elements()).unwrap().is_cover, "{ac:?}");
            }
        }
    }
}
