use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use qcover::antichain::{self, is_antichain, is_inextendible};
use qcover::coevent::{self, PreclusionStructure};
use qcover::cover::{self, certificate_class_c};
use qcover::measure::{identity_suite, validate};
use qcover::pks::{self, PeresStructure};
use qcover::{
    Antichain, AntichainFile, DecoherenceFunctional, Event, ExactFunctional, GeneratorKind,
    HistorySpace, MatrixFile, Tolerances,
};

use crate::{AntichainAction, Cli, Command, Common, Failure, Family, PksAction, Status};

type Outcome = Result<(Value, Status), Failure>;

const DEFAULT_IDENTITY_SAMPLES: usize = 100;
const DEFAULT_PKS_SAMPLES: usize = 100_000;
const MAX_MEASURE_TABLE: usize = 12;

pub fn run(cli: &Cli) -> Outcome {
    let c = &cli.common;
    if !(c.tol_zero > 0.0 && c.tol_psd > 0.0) {
        return Err(Failure::input("tolerances must be positive"));
    }
    if c.workers == 0 {
        return Err(Failure::input("--workers must be at least 1"));
    }
    match &cli.command {
        Command::Identities => identities(c),
        Command::Validate => validate_matrix(c),
        Command::Measure { events } => measure_events(c, events),
        Command::CoverCheck => cover_check(c),
        Command::Scan { limit } => scan(c, *limit),
        Command::Coevents => coevents(c),
        Command::Antichain { action } => match action {
            AntichainAction::Enumerate { limit } => enumerate(c, *limit),
            AntichainAction::Classify => classify(c),
            AntichainAction::Generate { kind } => generate(c, *kind),
        },
        Command::Pks { action } => pks_command(c, action),
    }
}

fn tolerances(c: &Common) -> Tolerances {
    Tolerances {
        zero: c.tol_zero,
        psd: c.tol_psd,
        ..Tolerances::default()
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure {
        status: Status::Internal,
        message: format!("cannot serialize result: {e}"),
    })
}

fn require_n(c: &Common) -> Result<usize, Failure> {
    c.n.ok_or_else(|| Failure::input("--n is required"))
}

fn read_json<T: DeserializeOwned>(path: Option<&Path>, flag: &str) -> Result<T, Failure> {
    let path = path.ok_or_else(|| Failure::input(format!("--{flag} <path> is required")))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("cannot parse {}: {e}", path.display())))
}

fn matrix_file(c: &Common) -> Result<MatrixFile, Failure> {
    read_json(c.dmatrix.as_deref(), "dmatrix")
}

fn functional(c: &Common, file: &MatrixFile) -> Result<DecoherenceFunctional, Failure> {
    Ok(DecoherenceFunctional::from_file(file, c.hermitize, Tolerances::default().herm)?)
}

fn identities(c: &Common) -> Outcome {
    let n = require_n(c)?;
    let samples = c.samples.unwrap_or(DEFAULT_IDENTITY_SAMPLES);
    let report = identity_suite(n, samples, c.seed, &tolerances(c))?;
    let status = if report.passed { Status::Ok } else { Status::Internal };
    Ok((to_value(&report)?, status))
}

fn validate_matrix(c: &Common) -> Outcome {
    let file = matrix_file(c)?;
    let mut entries = file.to_matrix()?;
    if c.hermitize {
        entries = DecoherenceFunctional::hermitized(entries)?.entries().clone();
    }
    let report = validate(&entries, &tolerances(c))?;
    let status = if report.hermitian && report.strongly_positive {
        Status::Ok
    } else {
        Status::Invalid
    };
    Ok((to_value(&report)?, status))
}

fn parse_event(space: HistorySpace, text: &str) -> Result<Event, Failure> {
    let labels = text
        .split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Failure::input(format!("bad label {t:?} in event {text:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(space.event(&labels)?)
}

fn measure_events(c: &Common, texts: &[String]) -> Outcome {
    let file = matrix_file(c)?;
    let space = HistorySpace::new(file.n)?;
    let events: Vec<Event> = if texts.is_empty() {
        if space.n() > MAX_MEASURE_TABLE {
            return Err(Failure::input(format!(
                "listing all events needs n <= {MAX_MEASURE_TABLE}; pass --event"
            )));
        }
        space.nonempty_events().collect()
    } else {
        texts
            .iter()
            .map(|t| parse_event(space, t))
            .collect::<Result<_, _>>()?
    };
    let rows: Vec<Value> = if c.exact {
        let d = ExactFunctional::from_file(&file)?;
        events
            .iter()
            .map(|e| json!({"event": e, "mu": d.mu(*e).to_string(), "mu_f64": d.mu_f64(*e)}))
            .collect()
    } else {
        let d = functional(c, &file)?;
        events
            .iter()
            .map(|e| json!({"event": e, "mu": d.mu(*e)}))
            .collect()
    };
    Ok((json!({"n": space.n(), "exact": c.exact, "measures": rows}), Status::Ok))
}

fn cover_check(c: &Common) -> Outcome {
    let file: AntichainFile = read_json(c.antichain.as_deref(), "antichain")?;
    let space = HistorySpace::new(file.n)?;
    let events = file
        .elements
        .iter()
        .map(|labels| space.event(labels))
        .collect::<qcover::Result<Vec<_>>>()?;
    let verdict = cover::decide(space, &events)?;
    let antichain_ok = is_antichain(&events)?;
    let mut inextendible = None;
    let mut extension = None;
    let mut certificate = None;
    if antichain_ok {
        let ac = Antichain::new(space, events.iter().copied())?;
        let (inext, witness) = is_inextendible(space, &ac)?;
        inextendible = Some(inext);
        extension = witness;
        if inext {
            certificate = certificate_class_c(space, &ac)?;
        }
    }
    let status = if certificate.is_some() && !verdict.is_cover {
        Status::Internal
    } else if inextendible == Some(true) && !verdict.is_cover {
        Status::Counterexample
    } else {
        Status::Ok
    };
    let result = json!({
        "n": space.n(),
        "verdict": verdict,
        "is_antichain": antichain_ok,
        "inextendible": inextendible,
        "extension": extension,
        "certificate": certificate,
    });
    Ok((result, status))
}

fn scan(c: &Common, limit: Option<usize>) -> Outcome {
    let space = HistorySpace::new(require_n(c)?)?;
    let limit = limit.unwrap_or(antichain::DEFAULT_ENUMERATION_LIMIT);
    let report = cover::scan(space, c.workers, limit)?;
    let status = if !report.inconsistent.is_empty() {
        Status::Internal
    } else if !report.counterexamples.is_empty() {
        Status::Counterexample
    } else {
        Status::Ok
    };
    Ok((to_value(&report)?, status))
}

fn coevents(c: &Common) -> Outcome {
    let file = matrix_file(c)?;
    let d = functional(c, &file)?;
    let structure: PreclusionStructure = if c.exact {
        coevent::derived_antichain_exact(&ExactFunctional::from_file(&file)?)?
    } else {
        coevent::derived_antichain(&d, c.tol_zero)?
    };
    let nontrivial = if d.n() >= 2 {
        let a = coevent::nontriviality(&d, c.tol_zero)?;
        json!({"event": a, "mu": d.mu(a)})
    } else {
        Value::Null
    };
    let result = json!({
        "n": d.n(),
        "exact": c.exact,
        "structure": structure,
        "nontriviality": nontrivial,
    });
    Ok((result, Status::Ok))
}

fn enumerate(c: &Common, limit: Option<usize>) -> Outcome {
    let space = HistorySpace::new(require_n(c)?)?;
    let limit = limit.unwrap_or(antichain::DEFAULT_ENUMERATION_LIMIT);
    let all = antichain::enumerate_inextendible_with_limit(space, limit)?;
    let files: Vec<AntichainFile> = all.iter().map(Antichain::to_file).collect();
    Ok((
        json!({"n": space.n(), "count": files.len(), "antichains": files}),
        Status::Ok,
    ))
}

fn classify(c: &Common) -> Outcome {
    let file: AntichainFile = read_json(c.antichain.as_deref(), "antichain")?;
    let ac = Antichain::from_file(&file)?;
    let space = ac.space();
    let (inextendible, extension) = is_inextendible(space, &ac)?;
    let decompositions = antichain::classify(space, &ac)?;
    let certificate = if inextendible {
        certificate_class_c(space, &ac)?
    } else {
        None
    };
    let result = json!({
        "antichain": file,
        "inextendible": inextendible,
        "extension": extension,
        "levels": ac.levels(),
        "decompositions": decompositions,
        "certificate": certificate,
    });
    Ok((result, Status::Ok))
}

fn generate(c: &Common, family: Family) -> Outcome {
    let space = HistorySpace::new(require_n(c)?)?;
    let param = || c.k.ok_or_else(|| Failure::input("--k is required for this family"));
    let kind = match family {
        Family::LevelK => GeneratorKind::LevelK { k: param()? },
        Family::A1 => GeneratorKind::A1,
        Family::A2 => GeneratorKind::A2,
        Family::A3 => GeneratorKind::A3 { m: param()? },
        Family::A4 => GeneratorKind::A4 { l: param()? },
    };
    let ac = antichain::generate(space, kind)?;
    let decompositions = antichain::classify(space, &ac)?;
    let result = json!({
        "kind": kind,
        "antichain": ac.to_file(),
        "decompositions": decompositions,
    });
    Ok((result, Status::Ok))
}

fn pks_command(c: &Common, action: &PksAction) -> Outcome {
    let s = PeresStructure::peres()?;
    match action {
        PksAction::Rays => {
            let rays: Vec<Value> = s
                .rays
                .iter()
                .enumerate()
                .map(|(i, r)| json!({"index": i, "components": r, "display": r.to_string()}))
                .collect();
            Ok((json!({"count": rays.len(), "rays": rays}), Status::Ok))
        }
        PksAction::Bases => Ok((
            json!({
                "rays": s.rays.len(),
                "bases_count": s.bases.len(),
                "pairs_count": s.pairs.len(),
                "bases": s.bases,
                "pairs": s.pairs,
            }),
            Status::Ok,
        )),
        PksAction::Search => {
            let out = pks::search_consistent_coloring(&s, s.all_rays_mask());
            let status = if out.coloring.is_some() {
                Status::Counterexample
            } else {
                Status::Ok
            };
            let result = json!({
                "satisfiable": out.coloring.is_some(),
                "coloring": out.coloring,
                "stats": out.stats,
            });
            Ok((result, status))
        }
        PksAction::Witness => {
            let report = pks::witness_check(&s)?;
            let samples = c.samples.unwrap_or(DEFAULT_PKS_SAMPLES);
            let coverage = pks::random_coverage(&s, samples, c.seed);
            let status = if report.ok() && coverage.covered == coverage.samples {
                Status::Ok
            } else {
                Status::Internal
            };
            Ok((json!({"witness": report, "coverage": coverage}), status))
        }
    }
}

