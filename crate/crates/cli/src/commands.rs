use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

use trisect_core::arrangement::Tag;
use trisect_core::bridge::{self, DeperturbSite, PerturbSite};
use trisect_core::format::{self, Diagram, FormatError, Kind};
use trisect_core::heegaard::{self, Recognition};
use trisect_core::moves::{self, MoveError, MoveScript};
use trisect_core::relative::{self, CircleMatch};
use trisect_core::trisection::{self, Status};
use trisect_core::{invariants, render};

use crate::args::{Cli, Command, OutputFormat};

pub const EXIT_USAGE: u8 = 64;
pub const EXIT_PARSE: u8 = 65;
pub const EXIT_IO: u8 = 66;

#[derive(Debug, Error)]
enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {err}")]
    Parse { path: PathBuf, err: FormatError },
    #[error("{path}: {err}")]
    Io { path: PathBuf, err: std::io::Error },
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Parse { .. } => EXIT_PARSE,
            Failure::Io { .. } => EXIT_IO,
        }
    }
}

/// What a command produced: a verdict, its report, and optionally an
/// artifact (a diagram or an image).
struct Outcome {
    code: u8,
    report: Value,
    summary: String,
    artifact: Option<String>,
}

impl Outcome {
    fn new(code: u8, report: Value, summary: impl Into<String>) -> Self {
        Outcome { code, report, summary: summary.into(), artifact: None }
    }

    fn with(mut self, artifact: String) -> Self {
        self.artifact = Some(artifact);
        self
    }
}

fn status_code(s: Status) -> u8 {
    s.exit_code() as u8
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Valid => "valid",
        Status::Invalid => "invalid",
        Status::Candidate => "candidate",
    }
}

fn read(path: &Path) -> Result<Diagram, Failure> {
    let text = fs::read_to_string(path).map_err(|err| Failure::Io { path: path.to_path_buf(), err })?;
    format::parse(&text).map_err(|err| Failure::Parse { path: path.to_path_buf(), err })
}

fn read_kind(path: &Path, kinds: &[Kind]) -> Result<Diagram, Failure> {
    let d = read(path)?;
    if kinds.contains(&d.kind) {
        Ok(d)
    } else {
        Err(Failure::Usage(format!("{}: expected a {:?} file, found {:?}", path.display(), kinds, d.kind)))
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn refused(command: &str, class: &str, msg: String) -> Outcome {
    let summary = format!("refused ({class}): {msg}");
    Outcome::new(1, json!({ "command": command, "status": "invalid", "error": { "class": class, "message": msg } }), summary)
}

pub fn run(cli: &Cli) -> u8 {
    match dispatch(cli) {
        Ok(o) => match emit(cli, &o) {
            Ok(()) => o.code,
            Err(f) => {
                eprintln!("error: {f}");
                f.code()
            }
        },
        Err(f) => {
            eprintln!("error: {f}");
            f.code()
        }
    }
}

fn emit(cli: &Cli, o: &Outcome) -> Result<(), Failure> {
    let report = match cli.format {
        OutputFormat::Report => format!("{}\n", serde_json::to_string_pretty(&o.report).unwrap_or_default()),
        OutputFormat::Summary => format!("{}\n", o.summary),
    };
    let write = |path: &Path, text: &str| fs::write(path, text).map_err(|err| Failure::Io { path: path.to_path_buf(), err });
    match (&o.artifact, &cli.out) {
        (Some(a), Some(path)) => {
            write(path, a)?;
            print!("{report}");
        }
        (Some(a), None) => {
            print!("{a}");
            eprint!("{report}");
        }
        (None, Some(path)) => write(path, &report)?,
        (None, None) => print!("{report}"),
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<Outcome, Failure> {
    let budget = cli.budget;
    if budget == 0 {
        return Err(Failure::Usage("--budget must be positive".into()));
    }
    match &cli.command {
        Command::Validate { file } => validate(&read(file)?, budget),
        Command::Invariants { file } => manifold_invariants(&read_kind(file, &[Kind::Trisection, Kind::Heegaard])?, budget),
        Command::Cover { file } => {
            let d = read_kind(file, &[Kind::Trisection])?;
            match trisection::orientation_double_cover_diagram(&d.arr) {
                Ok(arr) => Ok(produced("cover", Diagram::new(Kind::Trisection, arr))),
                Err(e) => Ok(refused("cover", "cover", e.to_string())),
            }
        }
        Command::Stabilize { file, sector } => {
            let d = read_kind(file, &[Kind::Trisection])?;
            let arr = trisection::stabilize(&d.arr, *sector).map_err(|e| Failure::Usage(e.to_string()))?;
            Ok(produced("stabilize", Diagram::new(Kind::Trisection, arr)))
        }
        Command::ConnectSum { first, second } => {
            let a = read_kind(first, &[Kind::Trisection, Kind::Heegaard])?;
            let b = read_kind(second, &[a.kind])?;
            let arr = if a.kind == Kind::Trisection {
                trisection::connected_sum(&a.arr, &b.arr)
            } else {
                heegaard::connected_sum(&a.arr, &b.arr)
            };
            Ok(produced("connect-sum", Diagram::new(a.kind, arr)))
        }
        Command::Glue { first, second, matching } => {
            let a = read_kind(first, &[Kind::Relative])?;
            let b = read_kind(second, &[Kind::Relative])?;
            let m = parse_matching(matching, a.arr.surface.boundary_count())?;
            match relative::glue(&a.arr, &b.arr, &m, budget) {
                Ok(arr) => Ok(produced("glue", Diagram::new(Kind::Trisection, arr))),
                Err(e) if e.is_inconclusive() => Ok(Outcome::new(
                    2,
                    json!({ "command": "glue", "status": "inconclusive", "error": { "class": e.class(), "message": e.to_string() } }),
                    format!("inconclusive: {e}"),
                )),
                Err(e) => Ok(refused("glue", e.class(), e.to_string())),
            }
        }
        Command::Monodromy { file } => {
            let d = read_kind(file, &[Kind::Relative])?;
            match relative::monodromy(&d.arr, budget) {
                Ok(m) => {
                    let (code, verdict) = match m.identity {
                        Some(true) => (0, "identity"),
                        Some(false) => (1, "not-identity"),
                        None => (2, "unknown"),
                    };
                    let summary = format!("monodromy: {verdict} ({} arcs)", m.arcs);
                    Ok(Outcome::new(code, json!({ "command": "monodromy", "verdict": verdict, "monodromy": to_value(&m) }), summary))
                }
                Err(e) if e.is_inconclusive() => Ok(Outcome::new(
                    2,
                    json!({ "command": "monodromy", "verdict": "unknown", "error": { "class": e.class(), "message": e.to_string() } }),
                    format!("monodromy: unknown ({e})"),
                )),
                Err(e) => Ok(refused("monodromy", e.class(), e.to_string())),
            }
        }
        Command::Page { file } => {
            let d = read_kind(file, &[Kind::Relative])?;
            match relative::page_summary(&d.arr) {
                Ok(p) => {
                    let summary = format!("page: χ = {}, {} boundary, {}orientable", p.chi, p.boundary, if p.orientable { "" } else { "non-" });
                    Ok(Outcome::new(0, json!({ "command": "page", "page": to_value(&p) }), summary))
                }
                Err(e) => Ok(refused("page", "cut", e.to_string())),
            }
        }
        Command::BridgeValidate { file } => shadow(&read_kind(file, &[Kind::Shadow])?, budget, false),
        Command::BridgeInvariants { file } => shadow(&read_kind(file, &[Kind::Shadow])?, budget, true),
        Command::Perturb { file, family, arc, crossing } => {
            let d = read_kind(file, &[Kind::Shadow])?;
            let family = format::parse_family(family).map_err(|e| Failure::Usage(e.to_string()))?;
            if !matches!(family, Tag::Alpha | Tag::Beta | Tag::Gamma) {
                return Err(Failure::Usage("--family must be alpha, beta or gamma".into()));
            }
            match bridge::perturb(&d.as_shadow(), PerturbSite { family, arc: *arc, crossing: *crossing }) {
                Ok(p) => Ok(produced("perturb", Diagram::shadow(p))),
                Err(e) => Ok(refused("perturb", "illegal-site", e.to_string())),
            }
        }
        Command::Deperturb { file, marks } => {
            let d = read_kind(file, &[Kind::Shadow])?;
            match bridge::deperturb(&d.as_shadow(), DeperturbSite { marks: (marks[0], marks[1]) }) {
                Ok(p) => Ok(produced("deperturb", Diagram::shadow(p))),
                Err(e) => Ok(refused("deperturb", "not-deperturbable", e.to_string())),
            }
        }
        Command::ApplyMoves { file, script } => {
            let d = read(file)?;
            let script: MoveScript = match script {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|err| Failure::Io { path: path.clone(), err })?;
                    serde_json::from_str(&text).map_err(|e| Failure::Parse { path: path.clone(), err: e.into() })?
                }
                None => d.moves.clone().ok_or_else(|| Failure::Usage(format!("{}: no attached move script", file.display())))?,
            };
            match moves::replay(&d, &script) {
                Ok(out) => Ok(produced("apply-moves", out)),
                Err(e @ MoveError::Format(_)) => Err(Failure::Parse { path: file.clone(), err: into_format(e) }),
                Err(e) => {
                    let class = match e {
                        MoveError::InputHash { .. } => "input-hash",
                        MoveError::OutputHash { .. } => "output-hash",
                        _ => "illegal-move",
                    };
                    Ok(refused("apply-moves", class, e.to_string()))
                }
            }
        }
        Command::Render { file } => {
            let d = read(file)?;
            let svg = render::svg(&d.arr, &d.marks);
            Ok(Outcome::new(0, json!({ "command": "render", "bytes": svg.len() }), "rendered").with(svg))
        }
    }
}

fn into_format(e: MoveError) -> FormatError {
    match e {
        MoveError::Format(f) => f,
        _ => unreachable!("only format errors are converted"),
    }
}

fn produced(command: &str, d: Diagram) -> Outcome {
    let s = &*d.arr.surface;
    let report = json!({
        "command": command,
        "status": "ok",
        "kind": to_value(&d.kind),
        "euler_characteristic": s.euler_characteristic(),
        "orientable": s.is_orientable(),
        "genus": s.genus(),
        "curves": d.arr.curves.len(),
        "hash": moves::hash(&d),
    });
    let summary = format!("{command}: χ(Σ) = {}, {} curves", s.euler_characteristic(), d.arr.curves.len());
    Outcome::new(0, report, summary).with(format::serialize(&d))
}

fn parse_matching(specs: &[String], circles: usize) -> Result<Vec<CircleMatch>, Failure> {
    if specs.is_empty() {
        return Ok((0..circles).map(|i| CircleMatch { first: i, second: i, offset: 0, reflection: false }).collect());
    }
    specs
        .iter()
        .map(|s| {
            let bad = || Failure::Usage(format!("bad --match {s:?}; expected i:j[:offset[:r]]"));
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() < 2 || parts.len() > 4 {
                return Err(bad());
            }
            let num = |x: &str| x.parse::<usize>().map_err(|_| bad());
            let offset = parts.get(2).map(|x| num(x)).transpose()?.unwrap_or(0);
            let reflection = match parts.get(3) {
                None => false,
                Some(&"r") => true,
                Some(_) => return Err(bad()),
            };
            Ok(CircleMatch { first: num(parts[0])?, second: num(parts[1])?, offset, reflection })
        })
        .collect()
}

fn params_text(p: &trisection::Params) -> String {
    format!("({};{},{},{})", p.g, p.k[0], p.k[1], p.k[2])
}

/// Witness classes of a trisection report, e.g. `alpha: one-sided`.
fn witness_text(r: &trisection::Report) -> String {
    let mut parts: Vec<String> = r.structure.iter().cloned().collect();
    for f in &r.families {
        for w in &f.witnesses {
            let class = to_value(w)["witness"].as_str().unwrap_or("?").to_string();
            parts.push(format!("{}: {class}", trisect_core::format::family_name(f.family)));
        }
    }
    parts.join("; ")
}

fn validate(d: &Diagram, budget: usize) -> Result<Outcome, Failure> {
    let recog = |e: heegaard::RecognitionError| Failure::Usage(e.to_string());
    Ok(match d.kind {
        Kind::Surface => {
            let s = &*d.arr.surface;
            let report = json!({
                "command": "validate", "kind": "surface", "status": "valid",
                "euler_characteristic": s.euler_characteristic(), "orientable": s.is_orientable(),
                "boundary": s.boundary_count(), "genus": s.genus(),
            });
            Outcome::new(0, report, format!("surface: χ = {}", s.euler_characteristic()))
        }
        Kind::Heegaard => {
            let mut witnesses = Vec::new();
            for t in [Tag::Alpha, Tag::Beta] {
                witnesses.push(json!({ "family": to_value(&t), "witnesses": heegaard::validate_cut_system(&d.arr, &d.arr.family(t)) }));
            }
            let broken = witnesses.iter().any(|w| w["witnesses"].as_array().is_some_and(|a| !a.is_empty()));
            let (code, status, recognition) = if broken {
                (1, "invalid", Value::Null)
            } else {
                let r = heegaard::recognize_standard_pair(&d.arr, Tag::Alpha, Tag::Beta, budget).map_err(recog)?;
                let (code, status) = match r {
                    Recognition::Verified { .. } => (0, "valid"),
                    Recognition::Refuted(_) => (1, "invalid"),
                    Recognition::Inconclusive { .. } => (2, "candidate"),
                };
                (code, status, to_value(&r))
            };
            let report = json!({ "command": "validate", "kind": "heegaard", "status": status, "families": witnesses, "recognition": recognition });
            Outcome::new(code, report, format!("heegaard: {status}"))
        }
        Kind::Trisection => {
            let r = trisection::validate(&d.arr, budget).map_err(recog)?;
            let summary = match &r.params {
                Some(p) => format!("valid {}", params_text(p)),
                None if r.status == Status::Invalid => format!("invalid: {}", witness_text(&r)),
                None => status_name(r.status).to_string(),
            };
            let mut v = to_value(&r);
            v["command"] = json!("validate");
            v["kind"] = json!("trisection");
            Outcome::new(status_code(r.status), v, summary)
        }
        Kind::Relative => {
            let r = relative::validate_relative(&d.arr, budget).map_err(recog)?;
            let summary = match r.sector_genus {
                Some(k) => format!("{} relative (k = {},{},{})", status_name(r.status), k[0], k[1], k[2]),
                None => status_name(r.status).to_string(),
            };
            let mut v = to_value(&r);
            v["command"] = json!("validate");
            v["kind"] = json!("relative");
            Outcome::new(status_code(r.status), v, summary)
        }
        Kind::Shadow => return shadow(d, budget, false),
    })
}

fn shadow(d: &Diagram, budget: usize, invariants_only: bool) -> Result<Outcome, Failure> {
    let r = bridge::validate_shadow(&d.as_shadow(), budget).map_err(|e| Failure::Usage(e.to_string()))?;
    let params = r.parameters();
    let summary = match (&params, r.euler_characteristic) {
        (Some(p), Some(chi)) => format!("{} {p}, χ(S) = {chi}, {} component(s)", status_name(r.status), r.components.unwrap_or(0)),
        _ => status_name(r.status).to_string(),
    };
    let v = if invariants_only {
        json!({
            "command": "bridge-invariants", "status": status_name(r.status), "parameters": params,
            "b": r.b, "c": r.c, "euler_characteristic": r.euler_characteristic, "components": r.components,
        })
    } else {
        let mut v = to_value(&r);
        v["command"] = json!("bridge-validate");
        v["parameters"] = json!(params);
        v
    };
    Ok(Outcome::new(status_code(r.status), v, summary))
}

fn manifold_invariants(d: &Diagram, budget: usize) -> Result<Outcome, Failure> {
    let recog = |e: heegaard::RecognitionError| Failure::Usage(e.to_string());
    if d.kind == Kind::Heegaard {
        let curves: Vec<usize> = d.arr.family(Tag::Alpha).into_iter().chain(d.arr.family(Tag::Beta)).collect();
        let h1 = invariants::quotient_homology(&d.arr, &curves);
        let summary = format!("H₁ = {h1}");
        return Ok(Outcome::new(0, json!({ "command": "invariants", "kind": "heegaard", "h1": to_value(&h1), "h1_text": h1.to_string() }), summary));
    }
    let r = trisection::validate(&d.arr, budget).map_err(recog)?;
    let h1 = trisection::first_homology(&d.arr);
    let pi1 = trisection::fundamental_group(&d.arr);
    let chi = r.params.map(|p| p.euler_characteristic());
    let report = json!({
        "command": "invariants",
        "status": status_name(r.status),
        "params": to_value(&r.params),
        "euler_characteristic": chi,
        "orientable": d.arr.surface.is_orientable(),
        "h1": to_value(&h1),
        "h1_text": h1.to_string(),
        "pi1": to_value(&pi1),
        "pi1_text": pi1.to_string(),
    });
    let summary = match (r.params, chi) {
        (Some(p), Some(chi)) => format!("{} H₁ = {h1}, χ = {chi}", params_text(&p)),
        _ => format!("{}: H₁ = {h1}", status_name(r.status)),
    };
    Ok(Outcome::new(status_code(r.status), report, summary))
}
