//! Relative trisection diagrams on bordered surfaces: validation, sector
//! genera, the α page, cut systems of arcs, the monodromy algorithm and
//! gluing two diagrams along their boundaries.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrangement::{Arrangement, Curve, CurveError, Port, Segment, Tag};
use crate::cut::{self, CutError, Mode};
use crate::heegaard::{self, Recognition, RecognitionError};
use crate::invariants::DualPresentation;
use crate::isotopy;
use crate::presentation::{free_reduce, invert, Word};
use crate::slide::{self, SlideError};
use crate::surface::{Occ, Side, SurfaceComplex};
use crate::trisection::{self, Status, FAMILIES, PAIRS};

/// Working tags for cut-system arcs of each family.
pub const ARC_A: Tag = Tag::Aux(0);
pub const ARC_B: Tag = Tag::Aux(1);
pub const ARC_C: Tag = Tag::Aux(2);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelativeError {
    #[error("surface has no boundary")]
    Closed,
    #[error("pair ({0}, {1}) is not in standard position")]
    NotStandard(String, String),
    #[error("no cut system of arcs found ({found} of {needed})")]
    NoCutSystem { needed: usize, found: usize },
    #[error("slide search for arcs off {target} exhausted after {explored} states")]
    Exhausted { target: String, explored: usize },
    #[error("Euler characteristics {0} and {1} differ in parity")]
    Parity(i64, i64),
    #[error("boundary identification is not a bijection of boundary circles")]
    BadIdentification,
    #[error("pages differ: {0}")]
    PageMismatch(String),
    #[error("arc endpoints on matched circles differ in number ({0} vs {1})")]
    ArcCountMismatch(usize, usize),
    #[error("monodromy could not be certified trivial")]
    Monodromy,
    #[error(transparent)]
    Cut(#[from] CutError),
    #[error(transparent)]
    Slide(#[from] SlideError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Recognition(#[from] RecognitionError),
}

impl RelativeError {
    /// Short name of the failure, for reports.
    pub fn class(&self) -> &'static str {
        match self {
            RelativeError::Closed => "closed",
            RelativeError::NotStandard(..) => "not-standard",
            RelativeError::NoCutSystem { .. } => "no-cut-system",
            RelativeError::Exhausted { .. } => "exhausted",
            RelativeError::Parity(..) => "parity",
            RelativeError::BadIdentification => "bad-identification",
            RelativeError::PageMismatch(_) => "page-mismatch",
            RelativeError::ArcCountMismatch(..) => "arc-count-mismatch",
            RelativeError::Monodromy => "monodromy",
            RelativeError::Cut(_) => "cut",
            RelativeError::Slide(_) => "slide",
            RelativeError::Curve(_) => "curve",
            RelativeError::Recognition(_) => "recognition",
        }
    }

    /// Failures that a larger budget or a finer search might overcome.
    pub fn is_inconclusive(&self) -> bool {
        matches!(self, RelativeError::Exhausted { .. } | RelativeError::NoCutSystem { .. } | RelativeError::Monodromy)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "witness", rename_all = "kebab-case")]
pub enum FamilyWitness {
    SurfaceClosed,
    Cardinality { expected: usize, found: usize },
    ArcInFamily { curve: usize },
    OneSided { curve: usize },
    Inessential { curve: usize },
    NotDisjoint { a: usize, b: usize },
    Separating,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelPair {
    pub pair: (Tag, Tag),
    pub recognition: Recognition,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeReport {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure: Option<String>,
    pub n: usize,
    pub families: Vec<(Tag, Vec<FamilyWitness>)>,
    pub pairs: Vec<RelPair>,
    /// Sector genera for (α,β), (β,γ), (γ,α) once all pairs are verified.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sector_genus: Option<[i64; 3]>,
}

/// k = 1 − χ(Σ) − 2n + k′ for a pair with `n` curves per family of which
/// `parallel` are parallel after standardization.
pub fn sector_genus(chi: i64, n: usize, parallel: usize) -> i64 {
    1 - chi - 2 * n as i64 + parallel as i64
}

fn family_witnesses(arr: &Arrangement, t: Tag, n: usize) -> Vec<FamilyWitness> {
    let s = &*arr.surface;
    let fam = arr.family(t);
    let mut out = Vec::new();
    if fam.len() != n {
        out.push(FamilyWitness::Cardinality { expected: n, found: fam.len() });
    }
    for (k, &c) in fam.iter().enumerate() {
        let cur = &arr.curves[c];
        if !cur.closed {
            out.push(FamilyWitness::ArcInFamily { curve: k });
            continue;
        }
        if cur.w1(s) {
            out.push(FamilyWitness::OneSided { curve: k });
        }
        let mut probe = arr.clone();
        if isotopy::reduce(&mut probe, c).is_err() {
            out.push(FamilyWitness::Inessential { curve: k });
        }
    }
    for a in 0..fam.len() {
        for b in a + 1..fam.len() {
            if arr.crossings(fam[a], fam[b]) > 0 {
                out.push(FamilyWitness::NotDisjoint { a, b });
            }
        }
    }
    if out.is_empty() {
        match cut::refine(arr, &fam, Mode::Cut, &[]) {
            Ok(r) if cut::components(&r.surface).len() == 1 => {}
            _ => out.push(FamilyWitness::Separating),
        }
    }
    out
}

/// Validate a relative trisection diagram: equal-size families of disjoint,
/// two-sided, jointly non-separating curves, each pair slide-standard.
pub fn validate_relative(arr: &Arrangement, budget: usize) -> Result<RelativeReport, RecognitionError> {
    if budget == 0 {
        return Err(RecognitionError::ZeroBudget);
    }
    let n = arr.count(Tag::Alpha);
    let mut report = RelativeReport { status: Status::Invalid, structure: None, n, families: Vec::new(), pairs: Vec::new(), sector_genus: None };
    if let Some(e) = arr.check_structure().and_then(|_| arr.check_families()).err() {
        report.structure = Some(e.to_string());
        return Ok(report);
    }
    if arr.surface.is_closed() {
        report.families.push((Tag::Alpha, vec![FamilyWitness::SurfaceClosed]));
        return Ok(report);
    }
    for t in FAMILIES {
        report.families.push((t, family_witnesses(arr, t, n)));
    }
    if report.families.iter().any(|f| !f.1.is_empty()) {
        return Ok(report);
    }
    let mut all = true;
    let mut genus = [0i64; 3];
    for (i, (a, b)) in PAIRS.into_iter().enumerate() {
        let pair = heegaard::prepare_pair(arr, a, b)?;
        let s = heegaard::search_standard(&pair, a, b, budget);
        let recognition = match s.found {
            Some((sf, script, _)) => {
                genus[i] = sector_genus(arr.surface.euler_characteristic(), n, sf.parallel());
                Recognition::Verified { k: sf.parallel(), dual: sf.dual(), script }
            }
            None => {
                all = false;
                Recognition::Inconclusive { explored: s.explored }
            }
        };
        report.pairs.push(RelPair { pair: (a, b), recognition });
    }
    if all {
        report.status = Status::Valid;
        report.sector_genus = Some(genus);
    } else {
        report.status = Status::Candidate;
    }
    Ok(report)
}

/// The α page: Σ compressed along α.
pub fn page(arr: &Arrangement) -> Result<SurfaceComplex, CutError> {
    Ok(cut::refine(arr, &arr.family(Tag::Alpha), Mode::Compress, &[])?.surface)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PageSummary {
    pub chi: i64,
    pub orientable: bool,
    pub boundary: usize,
    pub binding: usize,
}

pub fn page_summary(arr: &Arrangement) -> Result<PageSummary, CutError> {
    let p = page(arr)?;
    Ok(PageSummary { chi: p.euler_characteristic(), orientable: p.is_orientable(), boundary: p.boundary_count(), binding: arr.surface.boundary_count() })
}

/// Whether cutting along `arcs` and compressing along family `t` leaves a
/// connected surface; returns its Euler characteristic.
fn compressed_cut(arr: &Arrangement, t: Tag, arcs: &[usize]) -> Option<i64> {
    let mut cutset = arr.family(t);
    cutset.extend_from_slice(arcs);
    let r = cut::refine(arr, &cutset, Mode::Compress, &[]).ok()?;
    (cut::components(&r.surface).len() == 1).then(|| r.surface.euler_characteristic())
}

/// A cut system of arcs for the pages of `a` and `b`: disjoint from both
/// families, cutting each compressed surface into a disk. The arcs are
/// appended to the arrangement with tag `tag`; their indices are returned.
pub fn add_cut_arcs(arr: &mut Arrangement, a: Tag, b: Tag, tag: Tag) -> Result<Vec<usize>, RelativeError> {
    let s = arr.surface.clone();
    if s.is_closed() {
        return Err(RelativeError::Closed);
    }
    let needed = (1 - compressed_cut(arr, a, &[]).ok_or(RelativeError::NoCutSystem { needed: 0, found: 0 })?).max(0) as usize;
    let mut chosen: Vec<usize> = Vec::new();
    while chosen.len() < needed {
        let obstacles = [a, b, tag];
        let reg = slide::regions(arr, &obstacles);
        let obs = slide::obstacle_params(arr, &obstacles);
        let all = arr.edge_params();
        let bgaps: Vec<(Occ, usize, usize)> = reg
            .gap_face
            .iter()
            .filter(|((o, _), _)| s.mate(*o).is_none())
            .map(|(&(o, g), &f)| (o, g, f))
            .collect();
        let cands = arc_paths(arr, &reg, &bgaps);
        let mut accepted = false;
        for (variant, (_, i, j, path)) in cands.into_iter().flat_map(|c| [(false, c.clone()), (true, c)]) {
            let (o0, g0, _) = bgaps[i];
            let (o1, g1, _) = bgaps[j];
            let mut keys: Vec<(usize, usize)> = vec![(s.side(o0).edge, g0)];
            keys.extend(path.iter().map(|st| (st.edge, st.gap)));
            keys.push((s.side(o1).edge, g1));
            let ts = spread(&keys, &obs, &all, variant);
            let start = Port::Side { side: o0.side, t: ts[0] };
            let end = Port::Side { side: o1.side, t: ts[ts.len() - 1] };
            let xs: Vec<_> = path.iter().zip(&ts[1..]).map(|(st, &t)| (st.edge, st.forward, t)).collect();
            let mut poly = o0.poly;
            let mut ok = true;
            for st in &path {
                let (x, y) = crate::arrangement::crossing_occs(&s, st.edge, st.forward);
                if x.poly != poly {
                    ok = false;
                    break;
                }
                poly = y.poly;
            }
            if !ok || poly != o1.poly {
                continue;
            }
            let arc = Curve::arc_from_crossings(&s, tag, o0.poly, start, &xs, end);
            let mut trial = arr.clone();
            trial.curves.push(arc);
            let idx = trial.curves.len() - 1;
            if trial.check_structure().is_err() {
                continue;
            }
            let mut arcs = chosen.clone();
            arcs.push(idx);
            if compressed_cut(&trial, a, &arcs).is_some() && compressed_cut(&trial, b, &arcs).is_some() {
                *arr = trial;
                chosen.push(idx);
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(RelativeError::NoCutSystem { needed, found: chosen.len() });
        }
    }
    for t in [a, b] {
        if compressed_cut(arr, t, &chosen) != Some(1) {
            return Err(RelativeError::NoCutSystem { needed, found: chosen.len() });
        }
    }
    arr.normalize();
    Ok(chosen)
}

/// Parameters for points placed in obstacle gaps `keys = (edge, gap)`,
/// spread evenly when a gap is used more than once.
fn spread(keys: &[(usize, usize)], obs: &[Vec<f64>], all: &[Vec<f64>], reverse: bool) -> Vec<f64> {
    let mut count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for k in keys {
        *count.entry(*k).or_default() += 1;
    }
    let mut used: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    keys.iter()
        .map(|&(e, g)| {
            let v = &obs[e];
            let lo = if g == 0 { 0.0 } else { v[g - 1] };
            let hi = if g == v.len() { 1.0 } else { v[g] };
            let m = count[&(e, g)];
            let r = used.entry((e, g)).or_default();
            let rank = if reverse { m - 1 - *r } else { *r };
            *r += 1;
            let mut t = lo + (hi - lo) * (rank + 1) as f64 / (m + 1) as f64;
            // step off points of curves that are not obstacles
            while all[e].iter().any(|&x| (x - t).abs() < 1e-9) {
                let next = all[e].iter().copied().filter(|&x| x > t + 1e-9).fold(hi, f64::min);
                t = 0.5 * (t + next);
            }
            t
        })
        .collect()
}

type ArcPath = (usize, usize, usize, Vec<slide::BandStep>);

/// Face walks between boundary gaps, shortest first: every walk crossing
/// each interior gap at most twice, up to a length bound.
fn arc_paths(arr: &Arrangement, reg: &slide::Regions, bgaps: &[(Occ, usize, usize)]) -> Vec<ArcPath> {
    const MAX_PATHS: usize = 4000;
    let s = &*arr.surface;
    let mut adj: Vec<Vec<(usize, slide::BandStep)>> = vec![Vec::new(); reg.faces];
    for (&(o, gap), &f) in &reg.gap_face {
        if let Some(m) = s.mate(o) {
            if let Some(&g) = reg.gap_face.get(&(m, gap)) {
                adj[f].push((g, slide::BandStep { edge: s.side(o).edge, forward: s.occ_index(o) == 0, gap }));
            }
        }
    }
    let max_len = reg.gap_face.len() / 2 + 2;
    let mut out: Vec<ArcPath> = Vec::new();
    for len in 0..=max_len {
        for (i, &(_, _, f0)) in bgaps.iter().enumerate() {
            // walks of exactly `len` steps from f0
            let mut stack: Vec<(usize, Vec<slide::BandStep>)> = vec![(f0, Vec::new())];
            while let Some((f, path)) = stack.pop() {
                if path.len() == len {
                    for (j, &(_, _, f1)) in bgaps.iter().enumerate().skip(i) {
                        if f1 == f && (len > 0 || j > i) {
                            out.push((len, i, j, path.clone()));
                        }
                    }
                    continue;
                }
                for &(g, st) in &adj[f] {
                    let used = path.iter().filter(|p| (p.edge, p.gap) == (st.edge, st.gap)).count();
                    // never step straight back through the gap just crossed
                    if used >= 2 || path.last().is_some_and(|p| (p.edge, p.gap) == (st.edge, st.gap)) {
                        continue;
                    }
                    let mut p = path.clone();
                    p.push(st);
                    stack.push((g, p));
                }
            }
            if out.len() >= MAX_PATHS {
                return out;
            }
        }
    }
    out
}

/// Slide the arcs tagged `arcs` over curves of `over` until they miss
/// `target`, best-first on the number of crossings with `target`.
pub fn clear_arcs(arr: &Arrangement, arcs: Tag, over: Tag, target: Tag, budget: usize) -> Result<(Arrangement, usize), RelativeError> {
    let mut start = arr.clone();
    let tg = start.family(target);
    for i in start.family(arcs) {
        isotopy::reduce(&mut start, i)?;
        isotopy::tighten_against(&mut start, i, &tg);
    }
    start.normalize();
    let cost = |a: &Arrangement| -> (usize, usize) {
        let (fa, ft) = (a.family(arcs), a.family(target));
        (a.crossings_between(&fa, &ft), fa.iter().map(|&i| a.curves[i].segs.len()).sum())
    };
    if cost(&start).0 == 0 {
        return Ok((start, 1));
    }
    let mut states = vec![start.clone()];
    let mut seen: HashSet<String> = HashSet::from([start.key()]);
    let mut heap = BinaryHeap::from([Reverse((cost(&start), 0usize))]);
    let mut explored = 1;
    while let Some(Reverse((_, id))) = heap.pop() {
        let cur = states[id].clone();
        let ft = cur.family(target);
        for i in cur.family(arcs) {
            for j in cur.family(over) {
                for band in slide::candidate_bands(&cur, i, j, &[over, arcs]) {
                    let Ok(mut next) = slide::slide(&cur, i, j, &band, &[over, arcs]) else { continue };
                    isotopy::tighten_against(&mut next, i, &ft);
                    next.normalize();
                    if !seen.insert(next.key()) {
                        continue;
                    }
                    explored += 1;
                    let c = cost(&next);
                    if c.0 == 0 {
                        return Ok((next, explored));
                    }
                    states.push(next);
                    heap.push(Reverse((c, states.len() - 1)));
                    if explored >= budget {
                        return Err(RelativeError::Exhausted { target: target.name(), explored });
                    }
                }
            }
        }
    }
    Err(RelativeError::Exhausted { target: target.name(), explored })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monodromy {
    /// Arrangement with α, β, γ and the chosen cut-system arcs `a`.
    #[serde(skip)]
    pub before: Option<Arrangement>,
    /// The same with the arcs replaced by their images `a′`.
    #[serde(skip)]
    pub after: Option<Arrangement>,
    pub arcs: usize,
    /// Whether every image is isotopic rel endpoints to its arc in the page;
    /// `None` when the page group could not be put in free form.
    pub identity: Option<bool>,
    pub explored: usize,
}

/// Words of the arcs tagged `tag` in π₁ of the α page, after simplification.
fn page_words(arr: &Arrangement, tag: Tag) -> Result<(SurfaceComplex, bool, Vec<Word>, crate::presentation::Presentation), CutError> {
    let arcs = arr.family(tag);
    let r = cut::refine(arr, &arr.family(Tag::Alpha), Mode::Compress, &arcs)?;
    let dp = DualPresentation::new(&r.surface);
    let simp = dp.presentation.simplify();
    let words = r.carried.iter().map(|c| simp.map_word(&dp.word(&c.crossing_word(&r.surface)))).collect();
    let free = simp.presentation.relators.is_empty();
    Ok((r.surface, free, words, simp.presentation))
}

fn endpoints(c: &Curve) -> (Port, Port, usize, usize) {
    (c.segs[0].from, c.segs[c.segs.len() - 1].to, c.segs[0].poly, c.segs[c.segs.len() - 1].poly)
}

/// The monodromy algorithm on the α page: choose arcs `a` cutting both
/// pages of (α, β) into disks, slide them over β off γ, then over γ off α,
/// and compare the images with `a` rel endpoints.
pub fn monodromy(arr: &Arrangement, budget: usize) -> Result<Monodromy, RelativeError> {
    let mut base = arr.restrict(&FAMILIES);
    isotopy::reduce_all(&mut base)?;
    if heegaard::standard_form(&base, Tag::Alpha, Tag::Beta).is_none() {
        return Err(RelativeError::NotStandard("alpha".into(), "beta".into()));
    }
    let arcs = add_cut_arcs(&mut base, Tag::Alpha, Tag::Beta, ARC_A)?;
    let before = base.clone();
    let (c, e1) = clear_arcs(&base, ARC_A, Tag::Beta, Tag::Gamma, budget)?;
    let (a2, e2) = clear_arcs(&c, ARC_A, Tag::Gamma, Tag::Alpha, budget.saturating_sub(e1).max(1))?;
    let (fa, fb) = (before.family(ARC_A), a2.family(ARC_A));
    for (&x, &y) in fa.iter().zip(&fb) {
        let (p, q) = (endpoints(&before.curves[x]), endpoints(&a2.curves[y]));
        assert_eq!((p.2, p.3), (q.2, q.3), "slides keep arc endpoints");
    }
    let (s0, free0, w0, _) = page_words(&before, ARC_A)?;
    let (s1, free1, w1, pres) = page_words(&a2, ARC_A)?;
    let identity = if s0 != s1 {
        None
    } else {
        let loops: Vec<Word> = w1.iter().zip(&w0).map(|(x, y)| free_reduce(&[x.clone(), invert(y)].concat())).collect();
        if free0 && free1 {
            Some(loops.iter().all(|w| w.is_empty()))
        } else if loops.iter().any(|w| !pres.abelian_word_is_zero(w)) {
            Some(false)
        } else {
            None
        }
    };
    Ok(Monodromy { before: Some(before), after: Some(a2), arcs: arcs.len(), identity, explored: e1 + e2 })
}

/// How a boundary circle of the first diagram is matched to one of the
/// second: `offset` rotates the second circle by that many boundary edges
/// (each multiple of the circle length adds a full turn, realized by the
/// closing chords winding once more around the seam)
/// and `reflection` reverses its direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleMatch {
    pub first: usize,
    pub second: usize,
    #[serde(default)]
    pub offset: usize,
    #[serde(default)]
    pub reflection: bool,
}

/// Side of the gluing: the diagram with its arcs `a` (tag [`ARC_A`]),
/// pushed-off copies `b` ([`ARC_B`]) and slid copies `c` ([`ARC_C`]).
fn prepare_side(arr: &Arrangement, budget: usize) -> Result<Arrangement, RelativeError> {
    let m = monodromy(arr, budget)?;
    if m.identity != Some(true) {
        return Err(RelativeError::Monodromy);
    }
    let mut base = m.before.expect("arrangement");
    let fa = base.family(ARC_A);
    for &i in &fa {
        let mut b = slide::pushoff_arc(&base, i, true)?;
        b.tag = ARC_B;
        let mut c = slide::pushoff_arc(&base, i, false)?;
        c.tag = ARC_C;
        base.curves.push(b);
        base.curves.push(c);
    }
    base.normalize();
    base.check_structure()?;
    let (out, _) = clear_arcs(&base, ARC_C, Tag::Beta, Tag::Gamma, budget)?;
    Ok(out)
}

/// Glue two relative diagrams along their boundaries. Every family gains
/// the closed curves formed by its arcs on both sides.
pub fn glue(d1: &Arrangement, d2: &Arrangement, matching: &[CircleMatch], budget: usize) -> Result<Arrangement, RelativeError> {
    let (s1, s2) = (d1.surface.clone(), d2.surface.clone());
    if s1.is_closed() || s2.is_closed() {
        return Err(RelativeError::Closed);
    }
    let (c1, c2) = (s1.euler_characteristic(), s2.euler_characteristic());
    if (c1 - c2).rem_euclid(2) != 0 {
        return Err(RelativeError::Parity(c1, c2));
    }
    let nb = s1.boundary_count();
    let bij = |f: fn(&CircleMatch) -> usize| {
        let mut v: Vec<usize> = matching.iter().map(f).collect();
        v.sort();
        v == (0..nb).collect::<Vec<_>>()
    };
    if s2.boundary_count() != nb || matching.len() != nb || !bij(|m| m.first) || !bij(|m| m.second) {
        return Err(RelativeError::BadIdentification);
    }
    let (p1, p2) = (page_summary(d1)?, page_summary(d2)?);
    if (p1.chi, p1.orientable, p1.boundary) != (p2.chi, p2.orientable, p2.boundary) {
        return Err(RelativeError::PageMismatch(format!("{p1:?} vs {p2:?}")));
    }
    let a1 = prepare_side(d1, budget)?;
    let a2 = prepare_side(d2, budget)?;
    assemble(&a1, &a2, matching)
}

/// Boundary edge → (ring polygon, ring side).
type RingSides = BTreeMap<(usize, usize), (usize, usize)>;

fn assemble(a1: &Arrangement, a2: &Arrangement, matching: &[CircleMatch]) -> Result<Arrangement, RelativeError> {
    let (s1, s2) = (&*a1.surface, &*a2.surface);
    let mut labels: Vec<String> = s1.labels().to_vec();
    let mut emap2 = Vec::new();
    for l in s2.labels() {
        let mut l2 = l.clone();
        while labels.contains(&l2) {
            l2.push('\'');
        }
        emap2.push(labels.len());
        labels.push(l2);
    }
    let np1 = s1.num_polygons();
    let mut polys: Vec<Vec<Side>> = s1.polygons().to_vec();
    for p in s2.polygons() {
        polys.push(p.iter().map(|sd| Side { edge: emap2[sd.edge], reversed: sd.reversed }).collect());
    }
    // side 0 ↔ diagram 1, side 1 ↔ diagram 2; keyed by (which, edge of that diagram)
    let mut ring_sides: RingSides = BTreeMap::new();
    let mut winding: Winding = BTreeMap::new();
    for m in matching {
        let rp = polys.len();
        let mut word = Vec::new();
        for st in &s1.boundary_circles()[m.first] {
            let sd = s1.side(st.occ);
            ring_sides.insert((0, sd.edge), (rp, word.len()));
            word.push(Side { edge: sd.edge, reversed: st.forward == sd.reversed });
        }
        let mut seam = format!("r{}", m.first);
        while labels.contains(&seam) {
            seam.push('\'');
        }
        let r = labels.len();
        labels.push(seam);
        let seam_side = word.len();
        word.push(Side { edge: r, reversed: false });
        let mut c2: Vec<_> = s2.boundary_circles()[m.second].clone();
        let len = c2.len();
        c2.rotate_left(m.offset % len);
        let steps: Vec<(usize, bool)> = if m.reflection {
            c2.iter().map(|st| (s2.side(st.occ).edge, st.forward == s2.side(st.occ).reversed)).collect()
        } else {
            c2.iter().rev().map(|st| (s2.side(st.occ).edge, st.forward != s2.side(st.occ).reversed)).collect()
        };
        for (e, rev) in steps {
            ring_sides.insert((1, e), (rp, word.len()));
            word.push(Side { edge: emap2[e], reversed: rev });
        }
        word.push(Side { edge: r, reversed: true });
        winding.insert(rp, (seam_side, word.len(), m.offset / len));
        polys.push(word);
    }
    let surface = Arc::new(SurfaceComplex::from_sides(labels, polys)?);
    let lift = |which: usize, g: &Segment| -> Segment {
        if which == 0 {
            *g
        } else {
            Segment { poly: g.poly + np1, from: g.from, to: g.to }
        }
    };
    let mut curves: Vec<Curve> = Vec::new();
    for (which, a) in [(0, a1), (1, a2)] {
        for c in a.curves.iter().filter(|c| FAMILIES.contains(&c.tag)) {
            curves.push(Curve { tag: c.tag, closed: true, segs: c.segs.iter().map(|g| lift(which, g)).collect() });
        }
    }
    let glued = Arrangement::with_curves(surface.clone(), Vec::new());
    for (f, (arc_tag, fam)) in [(ARC_A, Tag::Alpha), (ARC_B, Tag::Beta), (ARC_C, Tag::Gamma)].into_iter().enumerate() {
        curves.extend(close_arcs(&glued, [a1, a2], arc_tag, fam, (&ring_sides, &winding, f), np1)?);
    }
    let mut out = Arrangement::with_curves(surface, curves);
    trisection::sort_families(&mut out);
    out.normalize();
    out.check_structure()?;
    Ok(out)
}

/// Ring polygon → (seam side, ring length, full turns).
type Winding = BTreeMap<usize, (usize, usize, usize)>;

/// An arc endpoint on the boundary: (which diagram, arc index, at end?).
type End = (usize, usize, bool);

fn close_arcs(glued: &Arrangement, sides: [&Arrangement; 2], arc_tag: Tag, fam: Tag, ring: (&RingSides, &Winding, usize), np1: usize) -> Result<Vec<Curve>, RelativeError> {
    let (rings, winding, f) = ring;
    let [a1, a2] = sides;
    let arcs: [Vec<usize>; 2] = [a1.family(arc_tag), a2.family(arc_tag)];
    // ring endpoints per ring polygon and diagram, with ring positions
    let mut at: BTreeMap<usize, [Vec<(f64, End, usize, f64)>; 2]> = BTreeMap::new();
    for which in 0..2 {
        let s = &*sides[which].surface;
        for (k, &ci) in arcs[which].iter().enumerate() {
            let c = &sides[which].curves[ci];
            for (is_end, g, port) in [(false, c.segs[0], c.segs[0].from), (true, c.segs[c.segs.len() - 1], c.segs[c.segs.len() - 1].to)] {
                let Port::Side { side, t } = port else { return Err(RelativeError::BadIdentification) };
                let e = s.polygons()[g.poly][side].edge;
                let &(rp, rs) = rings.get(&(which, e)).ok_or(RelativeError::BadIdentification)?;
                let pos = glued.pos(rp, Port::Side { side: rs, t });
                at.entry(rp).or_insert_with(|| [Vec::new(), Vec::new()])[which].push((pos, (which, k, is_end), rs, t));
            }
        }
    }
    // nested matching inside each ring polygon
    let mut partner: BTreeMap<End, (End, Vec<Segment>)> = BTreeMap::new();
    for (&rp, lists) in &mut at {
        for l in lists.iter_mut() {
            l.sort_by(|x, y| x.0.total_cmp(&y.0));
        }
        let (l1, l2) = (&lists[0], &lists[1]);
        if l1.len() != l2.len() {
            return Err(RelativeError::ArcCountMismatch(l1.len(), l2.len()));
        }
        let m = l1.len();
        for i in 0..m {
            let (x, y) = (l1[i], l2[m - 1 - i]);
            let (seam, last, w) = winding[&rp];
            // chord i crosses the seam w times, at heights rising with each turn
            let mut ports = vec![Port::Side { side: x.2, t: x.3 }];
            for k in 0..w {
                let t = ((k * m + m - 1 - i) as f64 + 0.25 * (f + 1) as f64) / (m * w) as f64;
                ports.push(Port::Side { side: seam, t });
                ports.push(Port::Side { side: last - 1, t });
            }
            ports.push(Port::Side { side: y.2, t: y.3 });
            let segs: Vec<Segment> = ports.chunks(2).map(|p| Segment { poly: rp, from: p[0], to: p[1] }).collect();
            partner.insert(x.1, (y.1, segs.clone()));
            partner.insert(y.1, (x.1, segs.into_iter().rev().map(|g| g.reversed()).collect()));
        }
    }
    let arc_segs = |which: usize, k: usize, forward: bool| -> Vec<Segment> {
        let c = &sides[which].curves[arcs[which][k]];
        let off = if which == 0 { 0 } else { np1 };
        let mut v: Vec<Segment> = c.segs.iter().map(|g| Segment { poly: g.poly + off, from: g.from, to: g.to }).collect();
        if !forward {
            v = v.into_iter().rev().map(|g| g.reversed()).collect();
        }
        v
    };
    let mut used = [vec![false; arcs[0].len()], vec![false; arcs[1].len()]];
    let mut out = Vec::new();
    for k0 in 0..arcs[0].len() {
        if used[0][k0] {
            continue;
        }
        let mut segs = Vec::new();
        let (mut which, mut k, mut forward) = (0usize, k0, true);
        loop {
            used[which][k] = true;
            segs.extend(arc_segs(which, k, forward));
            let leave: End = (which, k, forward);
            let (next, ring) = partner.get(&leave).cloned().ok_or(RelativeError::BadIdentification)?;
            segs.extend(ring);
            // enter the partner arc at that end and run to its other end
            let (w2, k2, at_end) = next;
            if w2 == 0 && k2 == k0 && !at_end {
                break;
            }
            if used[w2][k2] {
                return Err(RelativeError::BadIdentification);
            }
            which = w2;
            k = k2;
            forward = !at_end;
        }
        out.push(Curve { tag: fam, closed: true, segs });
    }
    if used[1].iter().any(|u| !u) {
        return Err(RelativeError::BadIdentification);
    }
    Ok(out)
}

impl From<crate::surface::SurfaceError> for RelativeError {
    fn from(e: crate::surface::SurfaceError) -> Self {
        RelativeError::Cut(CutError::Surface(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::homology::AbelianGroup;

    fn single(offset: usize, reflection: bool) -> [CircleMatch; 1] {
        [CircleMatch { first: 0, second: 0, offset, reflection }]
    }

    /// n + 1 cross-caps and one hole, no curves.
    fn mobius_n(n: usize) -> Arrangement {
        let mut w: Vec<String> = Vec::new();
        for i in 0..=n {
            w.push(format!("x{i}"));
            w.push(format!("x{i}"));
        }
        w.push("d".into());
        Arrangement::new(SurfaceComplex::from_words(&[w]).unwrap())
    }

    #[test]
    fn mobius_diagram() {
        let m = fixtures::mobius();
        let r = validate_relative(&m, 10).unwrap();
        assert_eq!(r.status, Status::Valid);
        assert_eq!(r.n, 0);
        assert_eq!(r.sector_genus, Some([1, 1, 1]));
        let p = page_summary(&m).unwrap();
        assert_eq!(p, PageSummary { chi: 0, orientable: false, boundary: 1, binding: 1 });
        let mono = monodromy(&m, 100).unwrap();
        assert_eq!(mono.arcs, 1);
        assert_eq!(mono.identity, Some(true));
    }

    #[test]
    fn boundary_sums_of_mobius_bands() {
        for n in 0..4 {
            let r = validate_relative(&mobius_n(n), 10).unwrap();
            assert_eq!(r.sector_genus, Some([n as i64 + 1; 3]));
        }
    }

    #[test]
    fn punctured_klein_diagram() {
        let d = fixtures::punctured_klein();
        let r = validate_relative(&d, 100).unwrap();
        assert_eq!(r.status, Status::Valid, "{r:?}");
        assert_eq!(r.sector_genus, Some([1, 1, 1]));
    }

    #[test]
    fn rp2_disk_bundle_diagram() {
        let d = fixtures::rp2_disk_bundle();
        assert_eq!(d.surface.euler_characteristic(), -2);
        assert_eq!(d.surface.boundary_count(), 1);
        for (a, b) in PAIRS {
            let (i, j) = (d.family(a)[0], d.family(b)[0]);
            assert_eq!(d.crossings(i, j), 1);
        }
        let r = validate_relative(&d, 100).unwrap();
        assert_eq!(r.status, Status::Valid, "{r:?}");
        assert_eq!(r.sector_genus, Some([1, 1, 1]));
        // same page as the Möbius diagram, and trivial monodromy
        assert_eq!(page_summary(&d).unwrap(), page_summary(&fixtures::mobius()).unwrap());
        let mono = monodromy(&d, 1000).unwrap();
        assert_eq!(mono.identity, Some(true));
    }

    #[test]
    fn closed_surface_is_refused() {
        // one non-separating curve per family on a punctured torus
        let s = SurfaceComplex::from_words(&[vec!["a", "b", "-a", "-b", "d"]]).unwrap();
        let mut d = Arrangement::new(s.clone());
        let c = Curve::closed_from_crossings(&s, Tag::Alpha, &[(0, true, 0.5)]);
        for t in FAMILIES {
            d.curves.push(Curve { tag: t, ..c.clone() });
        }
        d.curves[1].segs = Curve::closed_from_crossings(&s, Tag::Beta, &[(0, true, 0.25)]).segs;
        d.curves[2].segs = Curve::closed_from_crossings(&s, Tag::Gamma, &[(0, true, 0.75)]).segs;
        assert_eq!(validate_relative(&d, 100).unwrap().status, Status::Valid);
        let mut closed = fixtures::klein();
        closed.curves.truncate(3);
        let r = validate_relative(&closed, 100).unwrap();
        assert_eq!(r.status, Status::Invalid);
        assert_eq!(r.families[0].1, vec![FamilyWitness::SurfaceClosed]);
    }

    #[test]
    fn gluing_parity_and_identification() {
        let m = fixtures::mobius();
        let pk = fixtures::punctured_klein();
        assert!(matches!(glue(&m, &pk, &single(0, false), 100), Err(RelativeError::Parity(0, -1))));
        let two = Arrangement::new(SurfaceComplex::from_words(&[vec!["a", "b", "-a", "c"]]).unwrap());
        assert!(matches!(glue(&m, &two, &single(0, false), 100), Err(RelativeError::BadIdentification)));
        assert!(matches!(glue(&m, &fixtures::klein(), &single(0, false), 100), Err(RelativeError::Closed)));
    }

    #[test]
    fn mobius_double_is_klein_diagram() {
        let m = fixtures::mobius();
        for reflection in [false, true] {
            let g = glue(&m, &m, &single(0, reflection), 100).unwrap();
            assert!(g.surface.is_closed());
            assert_eq!(g.surface.euler_characteristic(), 0);
            let r = trisection::validate(&g, 1000).unwrap();
            assert_eq!(r.status, Status::Valid, "{r:?}");
            assert_eq!(r.params.unwrap().k, [1, 1, 1]);
            assert_eq!(trisection::first_homology(&g), AbelianGroup::free(1));
        }
    }

    #[test]
    fn mobius_and_disk_bundle_give_rp4() {
        let g = glue(&fixtures::mobius(), &fixtures::rp2_disk_bundle(), &single(0, false), 1000).unwrap();
        assert_eq!(g.surface.euler_characteristic(), -2);
        let r = trisection::validate(&g, 5000).unwrap();
        assert_eq!(r.params, Some(trisection::Params { g: 2, k: [1, 1, 1] }));
        assert_eq!(trisection::first_homology(&g), AbelianGroup { rank: 0, torsion: vec![2] });
    }
}
