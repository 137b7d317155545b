//! Move scripts: recorded sequences of diagram moves, replayable and
//! checked by hashes of the canonical serialization.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::arrangement::Tag;
use crate::bridge::{self, BridgeError, DeperturbSite, PerturbSite};
use crate::format::{self, Diagram, DiagramFile, FormatError, Kind};
use crate::heegaard::{self, SlideMove};
use crate::relative::{self, CircleMatch, RelativeError};
use crate::slide::{Band, SlideError};
use crate::trisection::{self, TrisectionError};

fn default_budget() -> usize {
    2000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Move {
    /// Slide curve `moving` of `family` over curve `over` of the same family
    /// (indices within the family). For a shadow family, `over` indexes the
    /// same-letter curves.
    Slide { family: String, moving: usize, over: usize, band: Band },
    Stabilize { sector: usize },
    ConnectSum { with: Box<DiagramFile> },
    Perturb { family: String, arc: usize, crossing: usize },
    Deperturb { marks: (usize, usize) },
    Cover,
    Glue {
        with: Box<DiagramFile>,
        matching: Vec<CircleMatch>,
        #[serde(default = "default_budget")]
        budget: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveScript {
    pub input_hash: String,
    pub moves: Vec<Move>,
    pub output_hash: String,
}

#[derive(Debug, Error)]
pub enum MoveError {
    #[error("move {index}: {msg}")]
    Illegal { index: usize, msg: String },
    #[error("input hash mismatch: recorded {recorded}, found {found}")]
    InputHash { recorded: String, found: String },
    #[error("output hash mismatch: recorded {recorded}, found {found}")]
    OutputHash { recorded: String, found: String },
    #[error(transparent)]
    Format(#[from] FormatError),
}

/// SHA-256 (hex) of the canonical serialization, ignoring any attached script.
pub fn hash(d: &Diagram) -> String {
    let mut d = d.clone();
    d.moves = None;
    d.arr.normalize();
    let digest = Sha256::digest(format::serialize(&d).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn illegal(index: usize, e: impl std::fmt::Display) -> MoveError {
    MoveError::Illegal { index, msg: e.to_string() }
}

fn need(index: usize, d: &Diagram, kinds: &[Kind]) -> Result<(), MoveError> {
    if kinds.contains(&d.kind) {
        Ok(())
    } else {
        Err(illegal(index, format!("not applicable to a {:?} diagram", d.kind)))
    }
}

/// Apply one move.
pub fn apply(d: &Diagram, mv: &Move, index: usize) -> Result<Diagram, MoveError> {
    let mut out = match mv {
        Move::Slide { family, moving, over, band } => slide(d, family, *moving, *over, band, index)?,
        Move::Stabilize { sector } => {
            need(index, d, &[Kind::Trisection])?;
            let arr = trisection::stabilize(&d.arr, *sector).map_err(|e: TrisectionError| illegal(index, e))?;
            Diagram::new(d.kind, arr)
        }
        Move::ConnectSum { with } => {
            need(index, d, &[Kind::Trisection, Kind::Heegaard])?;
            let other = format::from_file(with)?;
            if other.kind != d.kind {
                return Err(illegal(index, "connected sum of diagrams of different kinds"));
            }
            let arr = if d.kind == Kind::Trisection {
                trisection::connected_sum(&d.arr, &other.arr)
            } else {
                heegaard::connected_sum(&d.arr, &other.arr)
            };
            Diagram::new(d.kind, arr)
        }
        Move::Perturb { family, arc, crossing } => {
            need(index, d, &[Kind::Shadow])?;
            let family = format::parse_family(family)?;
            let p = bridge::perturb(&d.as_shadow(), PerturbSite { family, arc: *arc, crossing: *crossing })
                .map_err(|e: BridgeError| illegal(index, e))?;
            Diagram::shadow(p)
        }
        Move::Deperturb { marks } => {
            need(index, d, &[Kind::Shadow])?;
            let p = bridge::deperturb(&d.as_shadow(), DeperturbSite { marks: *marks }).map_err(|e| illegal(index, e))?;
            Diagram::shadow(p)
        }
        Move::Cover => {
            need(index, d, &[Kind::Trisection])?;
            let arr = trisection::orientation_double_cover_diagram(&d.arr).map_err(|e| illegal(index, e))?;
            Diagram::new(Kind::Trisection, arr)
        }
        Move::Glue { with, matching, budget } => {
            need(index, d, &[Kind::Relative])?;
            let other = format::from_file(with)?;
            let arr = relative::glue(&d.arr, &other.arr, matching, *budget).map_err(|e: RelativeError| illegal(index, e))?;
            Diagram::new(Kind::Trisection, arr)
        }
    };
    out.arr.normalize();
    Ok(out)
}

fn slide(d: &Diagram, family: &str, moving: usize, over: usize, band: &Band, index: usize) -> Result<Diagram, MoveError> {
    let tag = format::parse_family(family)?;
    match tag {
        Tag::Alpha | Tag::Beta | Tag::Gamma => {
            need(index, d, &[Kind::Heegaard, Kind::Trisection, Kind::Relative])?;
            let mv = SlideMove { family: tag, moving, over, band: band.clone() };
            let arr = heegaard::apply_slide(&d.arr, &mv, &[]).map_err(|e: SlideError| illegal(index, e))?;
            Ok(Diagram { arr, ..d.clone() })
        }
        _ => {
            need(index, d, &[Kind::Shadow])?;
            let arcs = d.arr.family(tag);
            let curves = d.arr.family(letter(tag));
            let (Some(&a), Some(&c)) = (arcs.get(moving), curves.get(over)) else {
                return Err(illegal(index, "slide index out of range"));
            };
            let s = bridge::shadow_slide(&d.as_shadow(), a, c, band).map_err(|e| illegal(index, e))?;
            Ok(Diagram { kind: Kind::Shadow, arr: s.arr, marks: s.marks, moves: None })
        }
    }
}

fn letter(t: Tag) -> Tag {
    match t {
        Tag::ShadowAlpha => Tag::Alpha,
        Tag::ShadowBeta => Tag::Beta,
        Tag::ShadowGamma => Tag::Gamma,
        t => t,
    }
}

/// Apply all moves in order.
pub fn run(d: &Diagram, moves: &[Move]) -> Result<Diagram, MoveError> {
    let mut cur = d.clone();
    cur.moves = None;
    for (i, mv) in moves.iter().enumerate() {
        cur = apply(&cur, mv, i)?;
    }
    Ok(cur)
}

/// Record a script: run the moves and store both hashes.
pub fn record(d: &Diagram, moves: Vec<Move>) -> Result<(MoveScript, Diagram), MoveError> {
    let out = run(d, &moves)?;
    Ok((MoveScript { input_hash: hash(d), moves, output_hash: hash(&out) }, out))
}

/// Replay a script on `d`, checking both recorded hashes.
pub fn replay(d: &Diagram, script: &MoveScript) -> Result<Diagram, MoveError> {
    let found = hash(d);
    if found != script.input_hash {
        return Err(MoveError::InputHash { recorded: script.input_hash.clone(), found });
    }
    let out = run(d, &script.moves)?;
    let found = hash(&out);
    if found != script.output_hash {
        return Err(MoveError::OutputHash { recorded: script.output_hash.clone(), found });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn recorded_scripts_replay() {
        let d = Diagram::new(Kind::Trisection, fixtures::klein());
        let moves = vec![Move::Stabilize { sector: 2 }, Move::Cover];
        let (script, out) = record(&d, moves).unwrap();
        assert_eq!(replay(&d, &script).unwrap(), out);
        let text = serde_json::to_string(&script).unwrap();
        let back: MoveScript = serde_json::from_str(&text).unwrap();
        assert_eq!(back, script);
    }

    #[test]
    fn tampered_hash_is_caught() {
        let d = Diagram::new(Kind::Trisection, fixtures::klein());
        let (mut script, _) = record(&d, vec![Move::Stabilize { sector: 1 }]).unwrap();
        script.output_hash = "0".repeat(64);
        assert!(matches!(replay(&d, &script), Err(MoveError::OutputHash { .. })));
        let other = Diagram::new(Kind::Trisection, fixtures::torus_s4());
        assert!(matches!(replay(&other, &script), Err(MoveError::InputHash { .. })));
    }

    #[test]
    fn kind_mismatch_is_illegal() {
        let d = Diagram::new(Kind::Trisection, fixtures::klein());
        assert!(matches!(apply(&d, &Move::Deperturb { marks: (0, 1) }, 0), Err(MoveError::Illegal { .. })));
    }
}
