//! Quantum measures on finite history spaces and the quantum covers of the
//! powerset lattice.
//!
//! Events are subsets of `Ω = {1..n}` stored as bitmasks. A decoherence
//! functional `D` on `2^Ω` induces the quantum measure `μ(A) = D(A, A)`; a
//! family of events is a quantum cover when every strongly positive `D`
//! that vanishes on all of them also has `μ(Ω) = 0`.

pub mod antichain;
pub mod coevent;
pub mod cover;
pub mod error;
pub mod histories;
pub mod measure;
pub mod pks;
pub mod span;

pub use antichain::{Antichain, AntichainFile, GeneratorKind, LambdaDecomposition};
pub use coevent::PreclusionStructure;
pub use cover::{Certificate, CertificateKind, CoverVerdict, ScanReport, Witness};
pub use error::{Error, Result};
pub use histories::{binomial, Direction, Event, HistorySpace};
pub use measure::{DecoherenceFunctional, ExactFunctional, MatrixFile, Tolerances, C64};
pub use pks::{Coloring, PeresStructure, PksEvent, Ray, ZSqrt2};
pub use span::{RationalMatrix, Rational};
