//! Decoherence functionals and the quantum measures they induce.
//!
//! A functional is stored on the fine-grained histories as a Hermitian
//! `n × n` complex matrix; everything else is extended bilinearly:
//! `D(A, B) = Σ_{i∈A, j∈B} D_ij` and `μ(A) = D(A, A)`.

use nalgebra::{Complex, DMatrix, DVector};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histories::{bits, Event, HistorySpace};
use crate::span::{self, rat, RationalMatrix};

pub type C64 = Complex<f64>;

/// Largest `n` for which the full table of `2^n` measures is built.
pub const MAX_TABULATED: usize = 20;
/// Largest `n` for the exhaustive weak-positivity check.
pub const MAX_WEAK_POSITIVITY: usize = 12;
/// Default cap on the number of tuples examined by [`measure_level`].
pub const DEFAULT_LEVEL_BUDGET: u64 = 20_000_000;

/// Named numerical tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Hermiticity, relative to the largest entry modulus.
    pub herm: f64,
    /// Smallest admissible eigenvalue, relative to the spectral scale.
    pub psd: f64,
    /// Threshold below which a measure counts as zero.
    pub zero: f64,
    /// Algebraic identities, relative to [`DecoherenceFunctional::scale`].
    pub identity: f64,
    /// Consequences of strong positivity.
    pub derived: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            herm: 1e-9,
            psd: 1e-9,
            zero: 1e-9,
            identity: 1e-10,
            derived: 1e-7,
        }
    }
}

/// Hermitian biadditive functional on a finite history space.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceFunctional {
    space: HistorySpace,
    entries: DMatrix<C64>,
}

/// JSON matrix format: `{"n": 2, "entries": [[[re, im], ...], ...]}`.
///
/// Each component is a JSON number, or a string holding an exact rational
/// such as `"1/3"` or `"-0.25"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub entries: Vec<Vec<[Scalar; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

impl Scalar {
    pub fn to_f64(&self) -> Result<f64> {
        match self {
            Scalar::Number(x) => Ok(*x),
            Scalar::Text(s) => Ok(span::to_f64(&parse_rational(s)?)),
        }
    }

    pub fn to_rational(&self) -> Result<BigRational> {
        match self {
            Scalar::Number(x) => BigRational::from_float(*x)
                .ok_or_else(|| Error::InvalidArgument(format!("non-finite entry {x}"))),
            Scalar::Text(s) => parse_rational(s),
        }
    }
}

/// Parses `"p/q"`, an integer, or a plain decimal such as `"-0.125"`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::InvalidArgument(format!("cannot parse {text:?} as a rational"));
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: num_bigint::BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: num_bigint::BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let negative = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let numer: num_bigint::BigInt = digits.parse().map_err(|_| bad())?;
        let denom = num_bigint::BigInt::from(10u32).pow(frac.len() as u32);
        let r = BigRational::new(numer, denom);
        return Ok(if negative { -r } else { r });
    }
    let p: num_bigint::BigInt = t.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(p))
}

impl MatrixFile {
    pub fn to_matrix(&self) -> Result<DMatrix<C64>> {
        self.check_shape()?;
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, row) in self.entries.iter().enumerate() {
            for (j, [re, im]) in row.iter().enumerate() {
                m[(i, j)] = C64::new(re.to_f64()?, im.to_f64()?);
            }
        }
        Ok(m)
    }

    fn check_shape(&self) -> Result<()> {
        HistorySpace::new(self.n)?;
        if self.entries.len() != self.n || self.entries.iter().any(|r| r.len() != self.n) {
            return Err(Error::InvalidArgument(format!(
                "matrix must be {0} x {0}",
                self.n
            )));
        }
        Ok(())
    }
}

fn max_modulus(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest `|m_ij − conj(m_ji)|`.
pub fn hermitian_residual(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn is_hermitian(m: &DMatrix<C64>, tol: f64) -> bool {
    m.is_square() && hermitian_residual(m) <= tol * max_modulus(m)
}

impl DecoherenceFunctional {
    /// Wraps a matrix, rejecting it unless Hermitian within `tol_herm`
    /// (relative to its largest entry).
    pub fn new(entries: DMatrix<C64>, tol_herm: f64) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidArgument("matrix must be square".into()));
        }
        let space = HistorySpace::new(entries.nrows())?;
        if !is_hermitian(&entries, tol_herm) {
            return Err(Error::InvalidArgument(format!(
                "matrix is not Hermitian (residual {:.3e})",
                hermitian_residual(&entries)
            )));
        }
        Ok(DecoherenceFunctional { space, entries })
    }

    /// Replaces the matrix by `(M + M†) / 2`.
    pub fn hermitized(entries: DMatrix<C64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidArgument("matrix must be square".into()));
        }
        let space = HistorySpace::new(entries.nrows())?;
        let sym = (&entries + entries.adjoint()).scale(0.5);
        Ok(DecoherenceFunctional {
            space,
            entries: sym,
        })
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("matrix must be square".into()));
        }
        let m = DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0));
        Self::new(m, Tolerances::default().herm)
    }

    /// Classical functional with the given weights on the diagonal.
    pub fn diagonal(weights: &[f64]) -> Result<Self> {
        let n = weights.len();
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(weights[i], 0.0)
            } else {
                C64::zero()
            }
        });
        Self::new(m, 0.0)
    }

    /// Gram functional `D_ij = Σ_r v_r[i] · conj(v_r[j])`.
    pub fn gram(vectors: &[Vec<C64>]) -> Result<Self> {
        let n = vectors
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidArgument("no vectors".into()))?;
        if vectors.iter().any(|v| v.len() != n) {
            return Err(Error::InvalidArgument("vectors differ in length".into()));
        }
        let mut m = DMatrix::zeros(n, n);
        for v in vectors {
            let col = DVector::from_column_slice(v);
            m += &col * col.adjoint();
        }
        Self::hermitized(m)
    }

    pub fn from_file(file: &MatrixFile, hermitize: bool, tol_herm: f64) -> Result<Self> {
        let m = file.to_matrix()?;
        if hermitize {
            Self::hermitized(m)
        } else {
            Self::new(m, tol_herm)
        }
    }

    pub fn to_file(&self) -> MatrixFile {
        let n = self.n();
        MatrixFile {
            n,
            entries: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let z = self.entries[(i, j)];
                            [Scalar::Number(z.re), Scalar::Number(z.im)]
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn space(&self) -> HistorySpace {
        self.space
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    /// Upper bound on `|D(A, B)|` over all events: `max(1, Σ |D_ij|)`.
    pub fn scale(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).sum::<f64>().max(1.0)
    }

    /// `D(A, B)`, the bilinear extension to events.
    pub fn d_of(&self, a: Event, b: Event) -> Result<C64> {
        self.space.check(a)?;
        self.space.check(b)?;
        Ok(self.pair_sum(a.mask(), b.mask()))
    }

    fn pair_sum(&self, a: u32, b: u32) -> C64 {
        let mut acc = C64::zero();
        for i in bits(a) {
            for j in bits(b) {
                acc += self.entries[(i, j)];
            }
        }
        acc
    }

    /// The quantum measure `μ(A) = Re D(A, A)`.
    ///
    /// Construction guarantees Hermiticity, so the discarded imaginary part
    /// is rounding noise; [`Self::mu_checked`] verifies it explicitly.
    pub fn mu(&self, a: Event) -> f64 {
        debug_assert_eq!(a.n(), self.n());
        self.mu_mask(a.mask())
    }

    pub(crate) fn mu_mask(&self, mask: u32) -> f64 {
        let mut acc = 0.0;
        for i in bits(mask) {
            acc += self.entries[(i, i)].re;
            for j in bits(mask & !((2u32 << i) - 1)) {
                acc += 2.0 * self.entries[(i, j)].re;
            }
        }
        acc
    }

    pub fn mu_checked(&self, a: Event, tol_herm: f64) -> Result<f64> {
        let d = self.d_of(a, a)?;
        if d.im.abs() > tol_herm * self.scale() {
            return Err(Error::Consistency(format!(
                "D({a}, {a}) has imaginary part {:.3e}",
                d.im
            )));
        }
        Ok(d.re)
    }

    /// `μ` of every event, indexed by mask.
    pub fn measure_table(&self) -> Result<Vec<f64>> {
        let n = self.n();
        if n > MAX_TABULATED {
            return Err(Error::ResourceLimit(format!(
                "measure table needs n <= {MAX_TABULATED}, got {n}"
            )));
        }
        let size = 1usize << n;
        let mut table = vec![0.0; size];
        for mask in 1..size as u32 {
            let top = 31 - mask.leading_zeros() as usize;
            let rest = mask & !(1 << top);
            let cross: f64 = bits(rest).map(|j| self.entries[(top, j)].re).sum();
            table[mask as usize] =
                table[rest as usize] + self.entries[(top, top)].re + 2.0 * cross;
        }
        Ok(table)
    }

    /// `‖D χ_A‖`, which vanishes exactly when `μ(A) = 0` for PSD `D`.
    pub fn kernel_norm(&self, a: Event) -> f64 {
        let chi = DVector::from_fn(self.n(), |i, _| {
            if a.mask() & (1 << i) != 0 {
                C64::new(1.0, 0.0)
            } else {
                C64::zero()
            }
        });
        (&self.entries * chi).norm()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = self.entries.clone().symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.total_cmp(b));
        vals
    }

    /// Strong positivity: smallest eigenvalue ≥ −tol_psd · max(1, spectral radius).
    pub fn is_strongly_positive(&self, tol_psd: f64) -> bool {
        let vals = self.eigenvalues();
        let radius = vals.iter().map(|v| v.abs()).fold(1.0, f64::max);
        vals.first().copied().unwrap_or(0.0) >= -tol_psd * radius
    }
}

/// Alternating interference `I_m` of pairwise disjoint nonempty parts:
/// `Σ_{∅≠S⊆parts} (−1)^(m−|S|) μ(⊔S)`.
pub fn interference(d: &DecoherenceFunctional, parts: &[Event]) -> Result<f64> {
    if parts.len() < 2 {
        return Err(Error::InvalidArgument(
            "interference needs at least two parts".into(),
        ));
    }
    if parts.len() > 20 {
        return Err(Error::ResourceLimit("at most 20 parts".into()));
    }
    let mut seen = 0u32;
    for p in parts {
        d.space().check(*p)?;
        if p.is_empty() {
            return Err(Error::InvalidArgument("interference part is empty".into()));
        }
        if seen & p.mask() != 0 {
            return Err(Error::InvalidArgument("interference parts overlap".into()));
        }
        seen |= p.mask();
    }
    let masks: Vec<u32> = parts.iter().map(Event::mask).collect();
    Ok(interference_masks(&masks, |m| d.mu_mask(m)))
}

fn interference_masks(parts: &[u32], mu: impl Fn(u32) -> f64) -> f64 {
    let m = parts.len();
    let mut total = 0.0;
    for sel in 1u32..(1 << m) {
        let union = bits(sel).fold(0u32, |acc, b| acc | parts[b]);
        let sign = if (m - sel.count_ones() as usize).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        total += sign * mu(union);
    }
    total
}

/// Calls `visit` once per unordered family of `parts` pairwise disjoint
/// nonempty submasks of `full`.
fn for_each_disjoint_family(n: usize, parts: usize, mut visit: impl FnMut(&[u32])) {
    fn rec(label: usize, n: usize, parts: usize, cur: &mut Vec<u32>, visit: &mut dyn FnMut(&[u32])) {
        if label == n {
            if cur.len() == parts {
                visit(cur);
            }
            return;
        }
        // Leave `label` out.
        rec(label + 1, n, parts, cur, visit);
        let bit = 1u32 << label;
        for i in 0..cur.len() {
            cur[i] |= bit;
            rec(label + 1, n, parts, cur, visit);
            cur[i] &= !bit;
        }
        if cur.len() < parts {
            cur.push(bit);
            rec(label + 1, n, parts, cur, visit);
            cur.pop();
        }
    }
    let mut cur = Vec::with_capacity(parts);
    rec(0, n, parts, &mut cur, &mut visit);
}

/// Smallest `k ≤ max_k` such that `I_{k+1}` vanishes (to `tol_zero` times the
/// functional's scale) on every family of `k+1` disjoint nonempty events.
/// `None` means the level exceeds `max_k`.
pub fn measure_level(
    d: &DecoherenceFunctional,
    max_k: usize,
    tol_zero: f64,
    budget: u64,
) -> Result<Option<usize>> {
    let n = d.n();
    if max_k > n {
        return Err(Error::InvalidArgument(format!("max_k = {max_k} exceeds n = {n}")));
    }
    let table = d.measure_table()?;
    let tol = tol_zero * d.scale();
    for k in 1..=max_k {
        let parts = k + 1;
        let estimate = (parts as f64 + 1.0).powi(n as i32)
            / (1..=parts).map(|x| x as f64).product::<f64>();
        if estimate > budget as f64 {
            return Err(Error::ResourceLimit(format!(
                "about {estimate:.0} families of {parts} disjoint events exceed the budget of {budget}"
            )));
        }
        let mut vanishes = true;
        for_each_disjoint_family(n, parts, |family| {
            if vanishes && interference_masks(family, |m| table[m as usize]).abs() > tol {
                vanishes = false;
            }
        });
        if vanishes {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Largest deviation from the level-two identity
/// `μ(E) = (2 − m) Σ_i μ({i}) + Σ_{i<j} μ({i, j})` over events with `m = |E| ≥ 3`.
pub fn verify_identity(d: &DecoherenceFunctional) -> Result<f64> {
    let table = d.measure_table()?;
    let n = d.n();
    let mut worst = 0.0f64;
    for mask in 1..table.len() as u32 {
        let m = mask.count_ones() as i64;
        if m < 3 {
            continue;
        }
        let labels: Vec<usize> = bits(mask).collect();
        let singles: f64 = labels.iter().map(|&i| table[1 << i]).sum();
        let mut pairs = 0.0;
        for (a, &i) in labels.iter().enumerate() {
            for &j in &labels[a + 1..] {
                pairs += table[(1 << i) | (1 << j)];
            }
        }
        let predicted = (2 - m) as f64 * singles + pairs;
        worst = worst.max((table[mask as usize] - predicted).abs());
    }
    debug_assert!(n <= MAX_TABULATED);
    Ok(worst)
}

/// Worst violations of the strong-positivity consequences, each clamped at 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    /// Level-two identity residual.
    pub identity: f64,
    /// Largest `|I_3|` over disjoint triples.
    pub i3: f64,
    /// `μ(A⊔B) = 0 ⇒ μ(A) = μ(B)`.
    pub first: f64,
    /// `μ(A) = 0 ⇒ μ(A⊔B) = μ(B)`.
    pub second: f64,
    /// `(Re D(A,B))² ≤ μ(A) μ(B)`.
    pub cauchy_schwarz: f64,
    /// `(√μA − √μB)² ≤ μ(A⊔B) ≤ (√μA + √μB)²`.
    pub sandwich: f64,
    /// Number of disjoint pairs whose union had zero measure.
    pub zero_unions: u64,
    /// Number of zero-measure events found.
    pub zero_events: u64,
}

impl IdentityResiduals {
    pub fn merge(&mut self, other: &IdentityResiduals) {
        self.identity = self.identity.max(other.identity);
        self.i3 = self.i3.max(other.i3);
        self.first = self.first.max(other.first);
        self.second = self.second.max(other.second);
        self.cauchy_schwarz = self.cauchy_schwarz.max(other.cauchy_schwarz);
        self.sandwich = self.sandwich.max(other.sandwich);
        self.zero_unions += other.zero_unions;
        self.zero_events += other.zero_events;
    }
}

/// Evaluates every identity and inequality on all disjoint pairs and
/// triples of events. Exponential in `n` (4^n); intended for `n ≤ 10`.
pub fn identity_residuals(d: &DecoherenceFunctional, tol_zero: f64) -> Result<IdentityResiduals> {
    let n = d.n();
    if n > 10 {
        return Err(Error::ResourceLimit(format!(
            "identity residuals enumerate 4^n pairs and triples; n = {n} > 10"
        )));
    }
    let table = d.measure_table()?;
    let mut out = IdentityResiduals {
        identity: verify_identity(d)?,
        ..Default::default()
    };
    out.zero_events = table[1..].iter().filter(|&&m| m <= tol_zero).count() as u64;
    let root = |x: f64| x.max(0.0).sqrt();
    for_each_disjoint_family(n, 2, |f| {
        let (a, b) = (f[0], f[1]);
        let (ma, mb, mab) = (table[a as usize], table[b as usize], table[(a | b) as usize]);
        if mab <= tol_zero {
            out.zero_unions += 1;
            out.first = out.first.max((ma - mb).abs());
        }
        if ma <= tol_zero {
            out.second = out.second.max((mab - mb).abs());
        }
        if mb <= tol_zero {
            out.second = out.second.max((mab - ma).abs());
        }
        let re_d = 0.5 * (mab - ma - mb);
        out.cauchy_schwarz = out.cauchy_schwarz.max(re_d * re_d - ma * mb);
        let lower = (root(ma) - root(mb)).powi(2) - mab;
        let upper = mab - (root(ma) + root(mb)).powi(2);
        out.sandwich = out.sandwich.max(lower).max(upper);
    });
    for_each_disjoint_family(n, 3, |f| {
        out.i3 = out
            .i3
            .max(interference_masks(f, |m| table[m as usize]).abs());
    });
    Ok(out)
}

/// Outcome of [`identity_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentitySuite {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub residuals: IdentityResiduals,
    pub passed: bool,
}

/// Functionals used by [`identity_suite`]: sample `i` is drawn with seed
/// `seed + i`, and every odd sample has one random proper event annihilated
/// so that the zero-measure consequences are exercised.
pub fn suite_functional(n: usize, seed: u64, i: usize, tol_zero: f64) -> Result<DecoherenceFunctional> {
    let space = HistorySpace::new(n)?;
    let sample_seed = seed.wrapping_add(i as u64);
    let mut annihilate = Vec::new();
    if i % 2 == 1 && n >= 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed ^ 0x5eed_a11c);
        let mask = rng.random_range(1..space.full_mask());
        annihilate.push(space.event_from_mask(mask)?);
    }
    sample_spd(n, n, sample_seed, &annihilate, true, tol_zero)
}

/// Runs [`identity_residuals`] over `samples` seeded strongly positive
/// functionals and checks the worst residuals against `tol`: `identity` and
/// `I_3` at `tol.identity`, the zero-set consequences at `tol.derived`, and
/// the Cauchy-Schwarz and sandwich bounds at `tol.psd`.
pub fn identity_suite(n: usize, samples: usize, seed: u64, tol: &Tolerances) -> Result<IdentitySuite> {
    let mut residuals = IdentityResiduals::default();
    for i in 0..samples {
        let d = suite_functional(n, seed, i, tol.zero)?;
        residuals.merge(&identity_residuals(&d, tol.zero)?);
    }
    let passed = residuals.identity <= tol.identity
        && residuals.i3 <= tol.identity
        && residuals.first <= tol.derived
        && residuals.second <= tol.derived
        && residuals.cauchy_schwarz <= tol.psd
        && residuals.sandwich <= tol.psd;
    Ok(IdentitySuite {
        n,
        samples,
        seed,
        residuals,
        passed,
    })
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n: usize,
    pub hermitian: bool,
    pub hermitian_residual: f64,
    pub strongly_positive: bool,
    pub min_eigenvalue: Option<f64>,
    pub weakly_positive: Option<bool>,
    pub normalized: bool,
    pub mu_omega: Option<f64>,
    pub measure_level: Option<usize>,
    pub identity_residual: Option<f64>,
}

/// Checks a raw matrix for Hermiticity, strong and weak positivity,
/// normalisation and (for small `n`) its measure level.
pub fn validate(entries: &DMatrix<C64>, tol: &Tolerances) -> Result<ValidationReport> {
    if !entries.is_square() {
        return Err(Error::InvalidArgument("matrix must be square".into()));
    }
    let n = entries.nrows();
    HistorySpace::new(n)?;
    let residual = hermitian_residual(entries);
    let mut report = ValidationReport {
        n,
        hermitian: is_hermitian(entries, tol.herm),
        hermitian_residual: residual,
        strongly_positive: false,
        min_eigenvalue: None,
        weakly_positive: None,
        normalized: false,
        mu_omega: None,
        measure_level: None,
        identity_residual: None,
    };
    if !report.hermitian {
        return Ok(report);
    }
    let d = DecoherenceFunctional::new(entries.clone(), tol.herm)?;
    let vals = d.eigenvalues();
    report.min_eigenvalue = vals.first().copied();
    report.strongly_positive = d.is_strongly_positive(tol.psd);
    let mu_omega = d.mu(d.space().omega());
    report.mu_omega = Some(mu_omega);
    report.normalized = (mu_omega - 1.0).abs() <= tol.zero;
    if n <= MAX_WEAK_POSITIVITY {
        let table = d.measure_table()?;
        let floor = -tol.psd * d.scale();
        report.weakly_positive = Some(table.iter().all(|&m| m >= floor));
        report.identity_residual = Some(verify_identity(&d)?);
        report.measure_level = measure_level(&d, n.min(3), tol.zero, DEFAULT_LEVEL_BUDGET)
            .ok()
            .flatten();
    }
    Ok(report)
}

/// Seeded strongly positive functional of the given rank whose measure
/// vanishes on every event in `annihilate`.
///
/// Each of the `rank` vectors has independent standard complex Gaussian
/// entries (real and imaginary parts `N(0, 1/2)`) drawn from `ChaCha8Rng`
/// seeded with `seed`, and is projected onto the orthogonal complement of
/// the indicator vectors of `annihilate` before forming the Gram matrix.
/// With `normalize`, the result is rescaled to `μ(Ω) = 1` whenever
/// `μ(Ω) > tol_zero`.
pub fn sample_spd(
    n: usize,
    rank: usize,
    seed: u64,
    annihilate: &[Event],
    normalize: bool,
    tol_zero: f64,
) -> Result<DecoherenceFunctional> {
    let space = HistorySpace::new(n)?;
    if rank == 0 || rank > n {
        return crate::error::out_of_range("rank", rank, 1, n);
    }
    for a in annihilate {
        space.check(*a)?;
    }
    let complement = complement_projector(space, annihilate);
    if normalize
        && annihilated_span_contains_omega(space, annihilate) {
            return Err(Error::InfeasibleNormalization(
                "the annihilated events span the indicator of Ω, so μ(Ω) = 0".into(),
            ));
        }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let vectors: Vec<Vec<C64>> = (0..rank)
        .map(|_| {
            let raw = DVector::from_fn(n, |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re * scale, im * scale)
            });
            let projected = &complement * raw;
            projected.iter().copied().collect()
        })
        .collect();
    let d = DecoherenceFunctional::gram(&vectors)?;
    let mu_omega = d.mu(space.omega());
    if normalize && mu_omega > tol_zero {
        let entries = d.entries.unscale(mu_omega);
        return Ok(DecoherenceFunctional { space, entries });
    }
    Ok(d)
}

fn indicator_rationals(e: &Event) -> Vec<BigRational> {
    e.indicator().into_iter().map(|b| rat(b as i64)).collect()
}

fn annihilated_span_contains_omega(space: HistorySpace, annihilate: &[Event]) -> bool {
    if annihilate.is_empty() {
        return false;
    }
    let cols: Vec<Vec<BigRational>> = annihilate.iter().map(indicator_rationals).collect();
    let a = RationalMatrix::from_columns(space.n(), &cols);
    a.solve(&vec![rat(1); space.n()]).is_some()
}

/// `I − P`, with `P` the exact orthogonal projector onto span{χ_a}.
fn complement_projector(space: HistorySpace, annihilate: &[Event]) -> DMatrix<C64> {
    let n = space.n();
    let mut q = DMatrix::<C64>::identity(n, n);
    if annihilate.is_empty() {
        return q;
    }
    let cols: Vec<Vec<BigRational>> = annihilate.iter().map(indicator_rationals).collect();
    let a = RationalMatrix::from_columns(n, &cols);
    let pivots = a.rref().pivots;
    let basis: Vec<Vec<BigRational>> = pivots.iter().map(|&c| cols[c].clone()).collect();
    let p = span::projector(n, &basis);
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] -= C64::new(span::to_f64(&p[(i, j)]), 0.0);
        }
    }
    q
}

/// Real parts of a functional held as exact rationals, for exact
/// zero-measure detection.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactFunctional {
    space: HistorySpace,
    real: RationalMatrix,
}

impl ExactFunctional {
    pub fn from_file(file: &MatrixFile) -> Result<Self> {
        file.check_shape()?;
        let n = file.n;
        let mut real = RationalMatrix::zeros(n, n);
        for (i, row) in file.entries.iter().enumerate() {
            for (j, [re, _]) in row.iter().enumerate() {
                real[(i, j)] = re.to_rational()?;
            }
        }
        for i in 0..n {
            for j in 0..n {
                if real[(i, j)] != real[(j, i)] {
                    return Err(Error::InvalidArgument(
                        "real part is not exactly symmetric".into(),
                    ));
                }
            }
        }
        Ok(ExactFunctional {
            space: HistorySpace::new(n)?,
            real,
        })
    }

    pub fn space(&self) -> HistorySpace {
        self.space
    }

    pub fn mu(&self, a: Event) -> BigRational {
        let mut acc = BigRational::zero();
        for i in bits(a.mask()) {
            for j in bits(a.mask()) {
                acc += &self.real[(i, j)];
            }
        }
        acc
    }

    pub fn mu_f64(&self, a: Event) -> f64 {
        self.mu(a).to_f64().unwrap_or(f64::NAN)
    }
}

/// Alternating binomial sum `Σ_{l=0}^{m} (−1)^l C(m, l)`, exact.
pub fn alternating_binomial_sum(m: usize) -> i128 {
    (0..=m)
        .map(|l| {
            let c = crate::histories::binomial(m, l) as i128;
            if l % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .sum()
}

/// Fixtures used across the crate's tests and the CLI examples.
pub mod fixtures {
    use super::*;

    /// Two-slit functional `[[½, −½], [−½, ½]]`.
    pub fn two_slit() -> DecoherenceFunctional {
        DecoherenceFunctional::from_real(&[vec![0.5, -0.5], vec![-0.5, 0.5]])
            .expect("two-slit matrix is Hermitian")
    }

    /// Rank-one Gram functional of the amplitudes `(1, −1, 1)/√3`.
    pub fn three_slit() -> DecoherenceFunctional {
        let s = 1.0 / 3f64.sqrt();
        DecoherenceFunctional::gram(&[vec![
            C64::new(s, 0.0),
            C64::new(-s, 0.0),
            C64::new(s, 0.0),
        ]])
        .expect("three-slit amplitudes are well formed")
    }

    /// The same functional with exact entries `±1/3`.
    pub fn three_slit_file() -> MatrixFile {
        let e = |s: &str| [Scalar::Text(s.into()), Scalar::Number(0.0)];
        MatrixFile {
            n: 3,
            entries: vec![
                vec![e("1/3"), e("-1/3"), e("1/3")],
                vec![e("-1/3"), e("1/3"), e("-1/3")],
                vec![e("1/3"), e("-1/3"), e("1/3")],
            ],
        }
    }

    /// Uniform classical measure `1/n` on each history.
    pub fn uniform_classical(n: usize) -> DecoherenceFunctional {
        DecoherenceFunctional::diagonal(&vec![1.0 / n as f64; n]).expect("diagonal is Hermitian")
    }
}
