//! Closed trisection diagrams: validation, invariants of the 4-manifold,
//! stabilization, connected sum and the orientation double cover.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrangement::{Arrangement, Curve, CurveError, Port, Segment, Tag};
use crate::heegaard::{self, CutWitness, Recognition, RecognitionError};
use crate::homology::AbelianGroup;
use crate::invariants;
use crate::presentation::Presentation;
use crate::surface::{SurfaceComplex, DoubleCover};

pub const FAMILIES: [Tag; 3] = [Tag::Alpha, Tag::Beta, Tag::Gamma];
/// Pairs in sector order: (α,β), (β,γ), (γ,α).
pub const PAIRS: [(Tag, Tag); 3] = [(Tag::Alpha, Tag::Beta), (Tag::Beta, Tag::Gamma), (Tag::Gamma, Tag::Alpha)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub g: usize,
    /// Sector genera for (α,β), (β,γ), (γ,α).
    pub k: [usize; 3],
}

impl Params {
    /// χ(X) = 2 + g − (k₁ + k₂ + k₃).
    pub fn euler_characteristic(&self) -> i64 {
        2 + self.g as i64 - self.k.iter().sum::<usize>() as i64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Valid,
    Invalid,
    /// Structurally fine, but some pair could not be recognized in budget.
    Candidate,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Valid => 0,
            Status::Invalid => 1,
            Status::Candidate => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub family: Tag,
    pub witnesses: Vec<CutWitness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub pair: (Tag, Tag),
    pub recognition: Recognition,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure: Option<String>,
    pub families: Vec<FamilyReport>,
    pub pairs: Vec<PairReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<Params>,
}

/// Validate a closed trisection diagram: three cut systems, each pair
/// recognized as a standard Heegaard pair.
pub fn validate(arr: &Arrangement, budget: usize) -> Result<Report, RecognitionError> {
    if budget == 0 {
        return Err(RecognitionError::ZeroBudget);
    }
    // crossings within a family are reported as cut-system witnesses below
    let structural = arr.check_structure().err();
    let mut report = Report { status: Status::Invalid, structure: None, families: Vec::new(), pairs: Vec::new(), params: None };
    if let Some(e) = structural {
        report.structure = Some(e.to_string());
        return Ok(report);
    }
    for t in FAMILIES {
        report.families.push(FamilyReport { family: t, witnesses: heegaard::validate_cut_system(arr, &arr.family(t)) });
    }
    if report.families.iter().any(|f| !f.witnesses.is_empty()) {
        return Ok(report);
    }
    for (a, b) in PAIRS {
        let r = heegaard::recognize_standard_pair(arr, a, b, budget)?;
        report.pairs.push(PairReport { pair: (a, b), recognition: r });
    }
    let refuted = report.pairs.iter().any(|p| matches!(p.recognition, Recognition::Refuted(_)));
    let all = report.pairs.iter().all(|p| p.recognition.is_verified());
    report.status = if refuted {
        Status::Invalid
    } else if all {
        let mut k = [0; 3];
        for (i, p) in report.pairs.iter().enumerate() {
            if let Recognition::Verified { k: ki, .. } = p.recognition {
                k[i] = ki;
            }
        }
        report.params = Some(Params { g: arr.surface.genus().unwrap_or(0), k });
        Status::Valid
    } else {
        Status::Candidate
    };
    Ok(report)
}

fn all_curves(arr: &Arrangement) -> Vec<usize> {
    FAMILIES.iter().flat_map(|&t| arr.family(t)).collect()
}

/// π₁(X): π₁(Σ) modulo all three families, simplified.
pub fn fundamental_group(arr: &Arrangement) -> Presentation {
    invariants::quotient(arr, &all_curves(arr)).simplify().presentation
}

pub fn first_homology(arr: &Arrangement) -> AbelianGroup {
    invariants::quotient_homology(arr, &all_curves(arr))
}

/// Connected sum with the genus-one diagram of S⁴ whose parallel pair sits
/// in `sector` (1: α‖β, 2: β‖γ, 3: γ‖α).
pub fn stabilize(arr: &Arrangement, sector: usize) -> Result<Arrangement, TrisectionError> {
    let (par, dual) = match sector {
        1 => ([Tag::Alpha, Tag::Beta], Tag::Gamma),
        2 => ([Tag::Beta, Tag::Gamma], Tag::Alpha),
        3 => ([Tag::Gamma, Tag::Alpha], Tag::Beta),
        _ => return Err(TrisectionError::Sector(sector)),
    };
    let t = heegaard::torus_piece(&par, &[dual], &arr.surface);
    Ok(connected_sum(arr, &t))
}

pub fn connected_sum(a: &Arrangement, b: &Arrangement) -> Arrangement {
    let mut out = heegaard::connected_sum(a, b);
    sort_families(&mut out);
    out
}

/// Stable reorder so curves are grouped α, β, γ, then everything else.
pub fn sort_families(arr: &mut Arrangement) {
    let rank = |t: Tag| FAMILIES.iter().position(|&f| f == t).unwrap_or(3);
    arr.curves.sort_by_key(|c| rank(c.tag));
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrisectionError {
    #[error("sector must be 1, 2 or 3, got {0}")]
    Sector(usize),
    #[error("the central surface is already orientable")]
    Orientable,
    #[error("curve {0} is one-sided and has no lift")]
    OneSided(usize),
    #[error("no lift of the {0} family can be discarded to leave a cut system")]
    NoDiscard(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

fn lift_port(port: Port, n: usize, sheet: usize) -> Port {
    if sheet == 0 {
        return port;
    }
    match port {
        Port::Side { side, t } => Port::Side { side: n - 1 - side, t },
        Port::Corner(c) => Port::Corner((n - c) % n),
    }
}

/// Lift of a two-sided closed curve starting in `sheet`.
pub fn lift_curve(base: &SurfaceComplex, c: &Curve, sheet: usize) -> Result<Curve, TrisectionError> {
    if !c.closed || c.w1(base) {
        return Err(TrisectionError::OneSided(0));
    }
    let mut s = sheet;
    let mut segs = Vec::with_capacity(c.segs.len());
    for g in &c.segs {
        let n = base.poly_len(g.poly);
        segs.push(Segment { poly: 2 * g.poly + s, from: lift_port(g.from, n, s), to: lift_port(g.to, n, s) });
        if let Port::Side { side, .. } = g.to {
            if base.is_reversing(base.polygons()[g.poly][side].edge) {
                s ^= 1;
            }
        }
    }
    Ok(Curve { tag: c.tag, closed: true, segs })
}

/// Both lifts of every curve, in input order: (lift in sheet 0, lift in sheet 1).
pub fn lift_arrangement(arr: &Arrangement, cover: &DoubleCover) -> Result<Arrangement, TrisectionError> {
    let mut curves = Vec::new();
    for (ci, c) in arr.curves.iter().enumerate() {
        for sheet in 0..2 {
            curves.push(lift_curve(&arr.surface, c, sheet).map_err(|_| TrisectionError::OneSided(ci))?);
        }
    }
    Ok(Arrangement::with_curves(std::sync::Arc::new(cover.cover.clone()), curves))
}

/// The induced diagram on the orientation double cover: every curve lifts
/// to two, and per family the first lift (in input order) whose removal
/// leaves a cut system is discarded.
pub fn orientation_double_cover_diagram(arr: &Arrangement) -> Result<Arrangement, TrisectionError> {
    if arr.surface.is_orientable() {
        return Err(TrisectionError::Orientable);
    }
    let cover = arr.surface.orientation_double_cover();
    let mut base = arr.restrict(&FAMILIES);
    sort_families(&mut base);
    let lifted = lift_arrangement(&base, &cover)?;
    let mut keep = vec![true; lifted.curves.len()];
    for t in FAMILIES {
        let fam = lifted.family(t);
        let mut chosen = None;
        for &d in &fam {
            let rest: Vec<usize> = fam.iter().copied().filter(|&x| x != d).collect();
            if heegaard::validate_cut_system(&lifted, &rest).is_empty() {
                chosen = Some(d);
                break;
            }
        }
        let d = chosen.ok_or_else(|| TrisectionError::NoDiscard(t.name()))?;
        keep[d] = false;
    }
    let curves = lifted.curves.iter().zip(&keep).filter(|(_, k)| **k).map(|(c, _)| c.clone()).collect();
    let mut out = Arrangement::with_curves(lifted.surface.clone(), curves);
    out.normalize();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Klein bottle with three parallel two-sided curves.
    fn klein_diagram() -> Arrangement {
        let s = SurfaceComplex::from_words(&[vec!["a", "b", "a", "-b"]]).unwrap();
        let mut arr = Arrangement::new(s.clone());
        for (t, x) in [(Tag::Alpha, 0.25), (Tag::Beta, 0.5), (Tag::Gamma, 0.75)] {
            arr.curves.push(Curve::closed_from_crossings(&s, t, &[(1, true, x)]));
        }
        arr
    }

    #[test]
    fn klein_diagram_is_s3_twisted_s1() {
        let arr = klein_diagram();
        let r = validate(&arr, 100).unwrap();
        assert_eq!(r.status, Status::Valid, "{r:?}");
        let p = r.params.unwrap();
        assert_eq!(p, Params { g: 1, k: [1, 1, 1] });
        assert_eq!(p.euler_characteristic(), 0);
        assert_eq!(first_homology(&arr), AbelianGroup::free(1));
    }

    #[test]
    fn stabilization_arithmetic() {
        let arr = klein_diagram();
        for sector in 1..=3 {
            let st = stabilize(&arr, sector).unwrap();
            let r = validate(&st, 1000).unwrap();
            assert_eq!(r.status, Status::Valid, "{r:?}");
            let mut k = [1, 1, 1];
            k[sector - 1] += 1;
            assert_eq!(r.params.unwrap(), Params { g: 2, k });
            assert_eq!(first_homology(&st), AbelianGroup::free(1));
        }
    }

    #[test]
    fn cover_of_klein_diagram() {
        let arr = klein_diagram();
        let c = orientation_double_cover_diagram(&arr).unwrap();
        assert!(c.surface.is_orientable());
        let r = validate(&c, 100).unwrap();
        assert_eq!(r.params, Some(Params { g: 1, k: [1, 1, 1] }));
        assert_eq!(first_homology(&c), AbelianGroup::free(1));
    }
}
