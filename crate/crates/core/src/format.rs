//! On-disk diagram files (JSON).
//!
//! A file names its kind, the surface as signed edge words, and the curves
//! as chord sequences. Parsing rejects unknown fields, checks every index,
//! and reports serde errors with line and column.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrangement::{Arrangement, Curve, Port, Segment, Tag};
use crate::bridge::ShadowDiagram;
use crate::moves::MoveScript;
use crate::surface::{Side, SurfaceComplex, SurfaceError};

pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Surface,
    Heegaard,
    Trisection,
    Relative,
    Shadow,
}

impl Kind {
    fn allows(self, t: Tag) -> bool {
        match self {
            Kind::Surface => false,
            Kind::Heegaard => matches!(t, Tag::Alpha | Tag::Beta),
            Kind::Trisection | Kind::Relative => matches!(t, Tag::Alpha | Tag::Beta | Tag::Gamma),
            Kind::Shadow => !matches!(t, Tag::Aux(_)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PortFile {
    Side { side: usize, t: f64 },
    Corner { corner: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentFile {
    pub poly: usize,
    pub from: PortFile,
    pub to: PortFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    pub family: String,
    pub closed: bool,
    pub segments: Vec<SegmentFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceFile {
    /// Edge labels in id order.
    pub edges: Vec<String>,
    /// Polygon words; a leading `-` reverses a side.
    pub polygons: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramFile {
    pub version: u32,
    pub kind: Kind,
    pub surface: SurfaceFile,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<CurveFile>,
    /// Shadow diagrams only: marks as (polygon, corner).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub marks: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moves: Option<MoveScript>,
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("parse error at line {line}, column {column}: {msg}")]
    Syntax { line: usize, column: usize, msg: String },
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("unknown family {0:?}")]
    Family(String),
    #[error("family {family} not allowed in a {kind:?} file")]
    FamilyKind { family: String, kind: Kind },
    #[error("edge label {0:?} is not declared")]
    Label(String),
    #[error("duplicate edge label {0:?}")]
    DuplicateLabel(String),
    #[error("curve {curve}, segment {seg}: {msg}")]
    Segment { curve: usize, seg: usize, msg: String },
    #[error("mark {0} is not a polygon corner")]
    Mark(usize),
    #[error("marks are only allowed in shadow files")]
    Marks,
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Syntax { line: e.line(), column: e.column(), msg: e.to_string() }
    }
}

pub fn family_name(t: Tag) -> String {
    match t {
        Tag::Alpha => "alpha".into(),
        Tag::Beta => "beta".into(),
        Tag::Gamma => "gamma".into(),
        Tag::ShadowAlpha => "shadow-alpha".into(),
        Tag::ShadowBeta => "shadow-beta".into(),
        Tag::ShadowGamma => "shadow-gamma".into(),
        Tag::Aux(k) => format!("aux-{k}"),
    }
}

pub fn parse_family(s: &str) -> Result<Tag, FormatError> {
    Ok(match s {
        "alpha" => Tag::Alpha,
        "beta" => Tag::Beta,
        "gamma" => Tag::Gamma,
        "shadow-alpha" => Tag::ShadowAlpha,
        "shadow-beta" => Tag::ShadowBeta,
        "shadow-gamma" => Tag::ShadowGamma,
        _ => return Err(FormatError::Family(s.to_string())),
    })
}

/// A parsed diagram: the arrangement and, for shadow files, the marks.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagram {
    pub kind: Kind,
    pub arr: Arrangement,
    pub marks: Vec<(usize, usize)>,
    pub moves: Option<MoveScript>,
}

impl Diagram {
    pub fn new(kind: Kind, arr: Arrangement) -> Self {
        Diagram { kind, arr, marks: Vec::new(), moves: None }
    }

    pub fn shadow(d: ShadowDiagram) -> Self {
        Diagram { kind: Kind::Shadow, arr: d.arr, marks: d.marks, moves: None }
    }

    pub fn as_shadow(&self) -> ShadowDiagram {
        ShadowDiagram::new(self.arr.clone(), self.marks.clone())
    }
}

fn port_file(p: Port) -> PortFile {
    match p {
        Port::Side { side, t } => PortFile::Side { side, t },
        Port::Corner(c) => PortFile::Corner { corner: c },
    }
}

pub fn to_file(d: &Diagram) -> DiagramFile {
    let s = &*d.arr.surface;
    let labels = s.labels();
    let polygons = s
        .polygons()
        .iter()
        .map(|p| p.iter().map(|sd| format!("{}{}", if sd.reversed { "-" } else { "" }, labels[sd.edge])).collect())
        .collect();
    let curves = d
        .arr
        .curves
        .iter()
        .map(|c| CurveFile {
            family: family_name(c.tag),
            closed: c.closed,
            segments: c.segs.iter().map(|g| SegmentFile { poly: g.poly, from: port_file(g.from), to: port_file(g.to) }).collect(),
        })
        .collect();
    DiagramFile {
        version: VERSION,
        kind: d.kind,
        surface: SurfaceFile { edges: labels.to_vec(), polygons },
        curves,
        marks: d.marks.clone(),
        moves: d.moves.clone(),
    }
}

pub fn from_file(f: &DiagramFile) -> Result<Diagram, FormatError> {
    if f.version != VERSION {
        return Err(FormatError::Version(f.version));
    }
    let mut ids = BTreeMap::new();
    for (i, l) in f.surface.edges.iter().enumerate() {
        if ids.insert(l.as_str(), i).is_some() {
            return Err(FormatError::DuplicateLabel(l.clone()));
        }
    }
    let mut polys = Vec::new();
    for w in &f.surface.polygons {
        let mut p = Vec::new();
        for tok in w {
            let (reversed, name) = match tok.strip_prefix('-') {
                Some(n) => (true, n),
                None => (false, tok.as_str()),
            };
            let &edge = ids.get(name).ok_or_else(|| FormatError::Label(name.to_string()))?;
            p.push(Side { edge, reversed });
        }
        polys.push(p);
    }
    let surface = Arc::new(SurfaceComplex::from_sides(f.surface.edges.clone(), polys)?);
    let mut curves = Vec::new();
    for (ci, c) in f.curves.iter().enumerate() {
        let tag = parse_family(&c.family)?;
        if !f.kind.allows(tag) {
            return Err(FormatError::FamilyKind { family: c.family.clone(), kind: f.kind });
        }
        let mut segs = Vec::new();
        for (k, g) in c.segments.iter().enumerate() {
            let bad = |msg: &str| FormatError::Segment { curve: ci, seg: k, msg: msg.to_string() };
            if g.poly >= surface.num_polygons() {
                return Err(bad("polygon index out of range"));
            }
            let n = surface.poly_len(g.poly);
            let port = |p: PortFile| -> Result<Port, FormatError> {
                match p {
                    PortFile::Side { side, t } if side < n && t > 0.0 && t < 1.0 => Ok(Port::Side { side, t }),
                    PortFile::Corner { corner } if corner < n => Ok(Port::Corner(corner)),
                    _ => Err(bad("port out of range (sides need 0 < t < 1)")),
                }
            };
            segs.push(Segment { poly: g.poly, from: port(g.from)?, to: port(g.to)? });
        }
        if segs.is_empty() {
            return Err(FormatError::Segment { curve: ci, seg: 0, msg: "curve has no segments".into() });
        }
        curves.push(Curve { tag, closed: c.closed, segs });
    }
    if !f.marks.is_empty() && f.kind != Kind::Shadow {
        return Err(FormatError::Marks);
    }
    for (i, &(p, c)) in f.marks.iter().enumerate() {
        if p >= surface.num_polygons() || c >= surface.poly_len(p) {
            return Err(FormatError::Mark(i));
        }
    }
    Ok(Diagram { kind: f.kind, arr: Arrangement::with_curves(surface, curves), marks: f.marks.clone(), moves: f.moves.clone() })
}

pub fn parse(text: &str) -> Result<Diagram, FormatError> {
    let f: DiagramFile = serde_json::from_str(text)?;
    from_file(&f)
}

/// Pretty JSON with a trailing newline.
pub fn serialize(d: &Diagram) -> String {
    let mut s = serde_json::to_string_pretty(&to_file(d)).expect("diagram files always serialize");
    s.push('\n');
    s
}
