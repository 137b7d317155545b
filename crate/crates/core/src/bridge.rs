//! Bridge-trisection shadow diagrams: marked points on the central surface
//! and three families of shadow arcs joining them.
//!
//! Marks are vertices of the surface complex; shadow arcs are arcs whose
//! ends sit at corners of those vertices. Adding marks subdivides an edge.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrangement::{Arrangement, Curve, CurveError, Port, Segment, Tag};
use crate::heegaard::RecognitionError;
use crate::invariants::{self, DualPresentation};
use crate::presentation::{free_reduce, Word};
use crate::slide::{self, Band, SlideError};
use crate::surface::{EdgeId, Occ, Side, SurfaceComplex, SurfaceError};
use crate::trisection::{self, Params, Report, Status, FAMILIES};

pub const SHADOWS: [Tag; 3] = [Tag::ShadowAlpha, Tag::ShadowBeta, Tag::ShadowGamma];

/// Pairwise unions in the order (αβ, βγ, γα) with the index of the
/// component count each one records: c₁, c₃, c₂.
pub const UNIONS: [(Tag, Tag, usize); 3] = [(Tag::Alpha, Tag::Beta, 0), (Tag::Beta, Tag::Gamma, 2), (Tag::Gamma, Tag::Alpha, 1)];

/// A corner `(polygon, corner)` standing for its vertex.
pub type Corner = (usize, usize);

#[derive(Clone, Debug, PartialEq)]
pub struct ShadowDiagram {
    /// Closed families plus shadow arcs tagged `Shadow*`.
    pub arr: Arrangement,
    /// One corner per marked vertex.
    pub marks: Vec<Corner>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BridgeError {
    #[error("edge {0} is not an interior edge")]
    BoundaryEdge(EdgeId),
    #[error("cut parameters must be sorted, inside (0,1) and miss every curve point")]
    BadCuts,
    #[error("no such shadow arc or crossing: {0}")]
    BadSite(String),
    #[error("site is not a perturbed local model: {0}")]
    NotDeperturbable(String),
    #[error("curve {over} is not a closed curve of the same letter as shadow arc {arc}")]
    BadSlide { arc: usize, over: usize },
    #[error(transparent)]
    Slide(#[from] SlideError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "witness", rename_all = "kebab-case")]
pub enum BridgeWitness {
    OddMarks { count: usize },
    RepeatedMark { mark: usize },
    ArcCount { family: Tag, expected: usize, found: usize },
    ClosedShadow { family: Tag, arc: usize },
    EndOffMark { family: Tag, arc: usize },
    MarkUsage { family: Tag, mark: usize, uses: usize },
    ArcsCross { family: Tag, a: usize, b: usize },
    SelfCrossing { family: Tag, arc: usize },
    CrossesCurves { family: Tag, arc: usize },
    NotNullhomotopic { pair: (Tag, Tag), component: usize },
}

/// Outcome of the nullhomotopy test for one loop of a pairwise union.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoopCheck {
    /// Trivial in a free simplified presentation of π₁.
    Trivial,
    /// π₁ kept relators; the loop only vanishes in H₁.
    AbelianOnly,
    Nontrivial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnionReport {
    pub pair: (Tag, Tag),
    pub components: usize,
    pub loops: Vec<LoopCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BridgeReport {
    pub status: Status,
    pub base: Report,
    pub b: usize,
    /// c₁, c₂, c₃ as recorded by the unions αβ, γα, βγ.
    pub c: [usize; 3],
    pub unions: Vec<UnionReport>,
    pub witnesses: Vec<BridgeWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub euler_characteristic: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<usize>,
}

impl BridgeReport {
    /// "(g,k;b,c)" when the sector and union counts are balanced.
    pub fn parameters(&self) -> Option<String> {
        let p: Params = self.base.params?;
        let list = |v: [usize; 3]| {
            if v.iter().all(|&x| x == v[0]) { v[0].to_string() } else { v.map(|x| x.to_string()).join(",") }
        };
        let (k, c) = (list(p.k), list(self.c));
        Some(format!("({},{};{},{})", p.g, k, self.b, c))
    }
}

/// χ(S) = c₁ + c₂ + c₃ − b.
pub fn surface_euler_characteristic(b: usize, c: [usize; 3]) -> i64 {
    c.iter().sum::<usize>() as i64 - b as i64
}

impl ShadowDiagram {
    pub fn new(arr: Arrangement, marks: Vec<Corner>) -> Self {
        ShadowDiagram { arr, marks }
    }

    pub fn bridge_number(&self) -> usize {
        self.marks.len() / 2
    }

    fn mark_vertices(&self) -> Vec<usize> {
        let s = &*self.arr.surface;
        self.marks.iter().map(|&(p, c)| s.corner_vertex(p, c)).collect()
    }

    /// Mark index at each end of a shadow arc, if both ends are marks.
    fn ends(&self, ci: usize) -> Option<(usize, usize)> {
        let s = &*self.arr.surface;
        let verts = self.mark_vertices();
        let c = &self.arr.curves[ci];
        let at = |g: &Segment, p: Port| match p {
            Port::Corner(k) => verts.iter().position(|&v| v == s.corner_vertex(g.poly, k)),
            Port::Side { .. } => None,
        };
        let (g0, g1) = (c.segs[0], c.segs[c.segs.len() - 1]);
        Some((at(&g0, g0.from)?, at(&g1, g1.to)?))
    }

    /// Loops of s_a ∪ s_b as cyclic lists of (arc, traversed forward).
    fn loops(&self, a: Tag, b: Tag) -> Vec<Vec<(usize, bool)>> {
        let mut at: BTreeMap<(Tag, usize), Vec<(usize, bool)>> = BTreeMap::new();
        for t in [a, b] {
            for ci in self.arr.family(t.shadow()) {
                if let Some((x, y)) = self.ends(ci) {
                    at.entry((t, x)).or_default().push((ci, true));
                    at.entry((t, y)).or_default().push((ci, false));
                }
            }
        }
        let mut used = BTreeSet::new();
        let mut out = Vec::new();
        for start in self.arr.family(a.shadow()) {
            if used.contains(&start) || self.ends(start).is_none() {
                continue;
            }
            let mut lp = Vec::new();
            let (mut arc, mut fwd, mut fam) = (start, true, a);
            loop {
                used.insert(arc);
                lp.push((arc, fwd));
                let (x, y) = self.ends(arc).expect("checked ends");
                let here = if fwd { y } else { x };
                fam = if fam == a { b } else { a };
                let Some(&(next, nf)) = at.get(&(fam, here)).and_then(|v| v.first()) else { break };
                if next == start {
                    break;
                }
                if used.contains(&next) {
                    break;
                }
                arc = next;
                fwd = nf;
            }
            out.push(lp);
        }
        out
    }
}

fn walk_corners(s: &SurfaceComplex, from: Corner, to: Corner) -> Option<Vec<(EdgeId, i8)>> {
    if from == to {
        return Some(Vec::new());
    }
    let mut cur = (Occ { poly: from.0, side: from.1 }, true);
    let mut word = Vec::new();
    for _ in 0..4 * s.num_sides() + 4 {
        s.mate(cur.0)?;
        word.push((s.side(cur.0).edge, if s.occ_index(cur.0) == 0 { 1 } else { -1 }));
        cur = s.cross_at_vertex(cur.0, cur.1)?;
        let n = s.poly_len(cur.0.poly);
        let corner = if cur.1 { cur.0.side } else { (cur.0.side + 1) % n };
        if (cur.0.poly, corner) == to {
            return Some(word);
        }
    }
    None
}

fn end_corner(c: &Curve, at_end: bool) -> Option<Corner> {
    let g = if at_end { c.segs[c.segs.len() - 1] } else { c.segs[0] };
    match if at_end { g.to } else { g.from } {
        Port::Corner(k) => Some((g.poly, k)),
        _ => None,
    }
}

/// Edge-crossing word of a loop of shadow arcs, passing through each mark
/// by walking around the vertex.
fn loop_word(d: &ShadowDiagram, lp: &[(usize, bool)]) -> Option<Vec<(EdgeId, i8)>> {
    let s = &*d.arr.surface;
    let mut word = Vec::new();
    for (k, &(ci, fwd)) in lp.iter().enumerate() {
        let c = if fwd { d.arr.curves[ci].clone() } else { d.arr.curves[ci].reversed() };
        word.extend(c.crossing_word(s));
        let (nci, nfwd) = lp[(k + 1) % lp.len()];
        let next = if nfwd { d.arr.curves[nci].clone() } else { d.arr.curves[nci].reversed() };
        word.extend(walk_corners(s, end_corner(&c, true)?, end_corner(&next, false)?)?);
    }
    Some(word)
}

fn check_loop(d: &ShadowDiagram, a: Tag, b: Tag, lp: &[(usize, bool)]) -> LoopCheck {
    let mut curves = d.arr.family(a);
    curves.extend(d.arr.family(b));
    let dp = DualPresentation::new(&d.arr.surface);
    let Some(xs) = loop_word(d, lp) else { return LoopCheck::Nontrivial };
    let w: Word = dp.word(&xs);
    let p = invariants::quotient(&d.arr, &curves);
    if !p.abelian_word_is_zero(&w) {
        return LoopCheck::Nontrivial;
    }
    let simp = p.simplify();
    if simp.presentation.relators.is_empty() {
        if free_reduce(&simp.map_word(&w)).is_empty() {
            LoopCheck::Trivial
        } else {
            LoopCheck::Nontrivial
        }
    } else {
        LoopCheck::AbelianOnly
    }
}

fn structural_witnesses(d: &ShadowDiagram) -> Vec<BridgeWitness> {
    let mut out = Vec::new();
    let nm = d.marks.len();
    if nm % 2 == 1 {
        out.push(BridgeWitness::OddMarks { count: nm });
    }
    let verts = d.mark_vertices();
    for i in 0..nm {
        if verts[..i].contains(&verts[i]) {
            out.push(BridgeWitness::RepeatedMark { mark: i });
        }
    }
    let b = nm / 2;
    for t in SHADOWS {
        let fam = d.arr.family(t);
        if fam.len() != b {
            out.push(BridgeWitness::ArcCount { family: t, expected: b, found: fam.len() });
        }
        let mut uses = vec![0usize; nm];
        for (k, &ci) in fam.iter().enumerate() {
            if d.arr.curves[ci].closed {
                out.push(BridgeWitness::ClosedShadow { family: t, arc: k });
                continue;
            }
            match d.ends(ci) {
                Some((x, y)) => {
                    uses[x] += 1;
                    uses[y] += 1;
                }
                None => out.push(BridgeWitness::EndOffMark { family: t, arc: k }),
            }
            if d.arr.self_crossings(ci) > 0 {
                out.push(BridgeWitness::SelfCrossing { family: t, arc: k });
            }
            let same: Vec<usize> = FAMILIES.iter().filter(|f| f.shadow() == t).flat_map(|&f| d.arr.family(f)).collect();
            if d.arr.crossings_between(&[ci], &same) > 0 {
                out.push(BridgeWitness::CrossesCurves { family: t, arc: k });
            }
            for (l, &cj) in fam.iter().enumerate().skip(k + 1) {
                if d.arr.crossings(ci, cj) > 0 {
                    out.push(BridgeWitness::ArcsCross { family: t, a: k, b: l });
                }
            }
        }
        for (m, &u) in uses.iter().enumerate() {
            if u != 1 {
                out.push(BridgeWitness::MarkUsage { family: t, mark: m, uses: u });
            }
        }
    }
    out
}

/// Components of the surface: connected pieces of the graph on marks whose
/// edges are all shadow arcs.
pub fn surface_components(d: &ShadowDiagram) -> usize {
    let n = d.marks.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for t in SHADOWS {
        for ci in d.arr.family(t) {
            if let Some((x, y)) = d.ends(ci) {
                let (a, b) = (find(&mut parent, x), find(&mut parent, y));
                parent[a] = b;
            }
        }
    }
    (0..n).filter(|&x| find(&mut parent, x) == x).count()
}

/// Validate a shadow diagram: the base trisection, the shadow structure and
/// the necessary unlink condition on every loop of every pairwise union.
pub fn validate_shadow(d: &ShadowDiagram, budget: usize) -> Result<BridgeReport, RecognitionError> {
    let mut base_arr = d.arr.restrict(&FAMILIES);
    base_arr.normalize();
    let base = trisection::validate(&base_arr, budget)?;
    let mut report = BridgeReport {
        status: Status::Invalid,
        base,
        b: d.bridge_number(),
        c: [0; 3],
        unions: Vec::new(),
        witnesses: Vec::new(),
        euler_characteristic: None,
        components: None,
    };
    if let Err(e) = d.arr.check_structure() {
        report.base.structure = Some(e.to_string());
        return Ok(report);
    }
    report.witnesses = structural_witnesses(d);
    if !report.witnesses.is_empty() {
        return Ok(report);
    }
    for (a, b, idx) in UNIONS {
        let loops = d.loops(a, b);
        let checks: Vec<LoopCheck> = loops.iter().map(|lp| check_loop(d, a, b, lp)).collect();
        for (i, c) in checks.iter().enumerate() {
            if *c == LoopCheck::Nontrivial {
                report.witnesses.push(BridgeWitness::NotNullhomotopic { pair: (a, b), component: i });
            }
        }
        report.c[idx] = loops.len();
        report.unions.push(UnionReport { pair: (a, b), components: loops.len(), loops: checks });
    }
    if !report.witnesses.is_empty() {
        return Ok(report);
    }
    report.euler_characteristic = Some(surface_euler_characteristic(report.b, report.c));
    report.components = Some(surface_components(d));
    report.status = report.base.status;
    Ok(report)
}

/// Subdivide interior edge `e` at the sorted parameters `cuts`. Returns the
/// new arrangement and, per cut, a corner of the new vertex. Piece 0 keeps
/// the edge's id and label; the others are appended.
pub fn subdivide_edge(arr: &Arrangement, e: EdgeId, cuts: &[f64]) -> Result<(Arrangement, Vec<Corner>), BridgeError> {
    let s = &*arr.surface;
    if !s.is_interior(e) {
        return Err(BridgeError::BoundaryEdge(e));
    }
    let sorted = cuts.windows(2).all(|w| w[0] < w[1]);
    let params = arr.edge_params();
    if !sorted || cuts.iter().any(|&t| t <= 0.0 || t >= 1.0 || params[e].contains(&t)) {
        return Err(BridgeError::BadCuts);
    }
    let k = cuts.len();
    let mut labels = s.labels().to_vec();
    let mut pieces = vec![e];
    for i in 1..=k {
        let mut l = format!("{}_{i}", s.label(e));
        while labels.contains(&l) {
            l.push('\'');
        }
        pieces.push(labels.len());
        labels.push(l);
    }
    let mut polys = Vec::new();
    let mut first: Vec<Vec<usize>> = Vec::new();
    for p in s.polygons() {
        let mut w = Vec::new();
        let mut f = Vec::new();
        for sd in p {
            f.push(w.len());
            if sd.edge == e {
                let order: Vec<usize> = if sd.reversed { (0..=k).rev().collect() } else { (0..=k).collect() };
                w.extend(order.into_iter().map(|i| Side { edge: pieces[i], reversed: sd.reversed }));
            } else {
                w.push(*sd);
            }
        }
        polys.push(w);
        first.push(f);
    }
    let surface = Arc::new(SurfaceComplex::from_sides(labels, polys)?);
    let bounds: Vec<f64> = std::iter::once(0.0).chain(cuts.iter().copied()).chain(std::iter::once(1.0)).collect();
    let map_port = |poly: usize, p: Port| -> Port {
        match p {
            Port::Corner(c) => Port::Corner(first[poly][c]),
            Port::Side { side, t } => {
                let sd = s.polygons()[poly][side];
                if sd.edge != e {
                    return Port::Side { side: first[poly][side], t };
                }
                let i = (0..=k).find(|&i| t > bounds[i] && t < bounds[i + 1]).expect("cut misses curve points");
                let local = (t - bounds[i]) / (bounds[i + 1] - bounds[i]);
                let off = if sd.reversed { k - i } else { i };
                Port::Side { side: first[poly][side] + off, t: local }
            }
        }
    };
    let curves = arr
        .curves
        .iter()
        .map(|c| Curve {
            tag: c.tag,
            closed: c.closed,
            segs: c.segs.iter().map(|g| Segment { poly: g.poly, from: map_port(g.poly, g.from), to: map_port(g.poly, g.to) }).collect(),
        })
        .collect();
    let o = s.occurrences(e)[0];
    let rev = s.side(o).reversed;
    let corners = (1..=k).map(|i| (o.poly, first[o.poly][o.side] + if rev { k + 1 - i } else { i })).collect();
    Ok((Arrangement::with_curves(surface, curves), corners))
}

/// New index of side or corner `j` of polygon `p` after [`subdivide_edge`]
/// with `k` cuts: every earlier side of `e` gained `k` pieces.
fn shifted(old: &SurfaceComplex, e: EdgeId, k: usize, p: usize, j: usize) -> usize {
    j + k * old.polygons()[p][..j].iter().filter(|sd| sd.edge == e).count()
}

/// Corner of the vertex at cut `i` (1-based) seen from occurrence `o` of `e`.
pub(crate) fn cut_corner(old: &SurfaceComplex, e: EdgeId, k: usize, o: Occ, i: usize) -> Corner {
    let f = shifted(old, e, k, o.poly, o.side);
    (o.poly, f + if old.side(o).reversed { k + 1 - i } else { i })
}

/// Add marks on interior edge `e` at parameters `cuts`.
pub fn add_marks(d: &ShadowDiagram, e: EdgeId, cuts: &[f64]) -> Result<(ShadowDiagram, Vec<usize>), BridgeError> {
    let (arr, corners) = subdivide_edge(&d.arr, e, cuts)?;
    let old = &*d.arr.surface;
    let mut marks: Vec<Corner> = d.marks.iter().map(|&(p, c)| (p, shifted(old, e, cuts.len(), p, c))).collect();
    let first = marks.len();
    marks.extend(corners);
    Ok((ShadowDiagram { arr, marks }, (first..first + cuts.len()).collect()))
}

/// Every corner of the vertex at `m`.
fn corners_of(s: &SurfaceComplex, m: Corner) -> Vec<Corner> {
    s.vertex_corners(s.corner_vertex(m.0, m.1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbSite {
    pub family: Tag,
    /// Index within the shadow family.
    pub arc: usize,
    /// Which interior edge crossing of the arc to split at.
    pub crossing: usize,
}

/// Perturb: split a shadow arc of one family where it crosses an edge,
/// adding two marks; the other two families gain a short arc between them.
pub fn perturb(d: &ShadowDiagram, site: PerturbSite) -> Result<ShadowDiagram, BridgeError> {
    let st = site.family.shadow();
    let fam = d.arr.family(st);
    let &ci = fam.get(site.arc).ok_or_else(|| BridgeError::BadSite(format!("{} arc {}", st.name(), site.arc)))?;
    let c = &d.arr.curves[ci];
    if c.closed || site.crossing + 1 >= c.segs.len() {
        return Err(BridgeError::BadSite(format!("crossing {} of {} arc {}", site.crossing, st.name(), site.arc)));
    }
    let s = &*d.arr.surface;
    let g = c.segs[site.crossing];
    let Port::Side { side, t: t0 } = g.to else { unreachable!("interior crossing") };
    let op = Occ { poly: g.poly, side };
    let oq = s.mate(op).expect("interior crossing");
    let e = s.side(op).edge;
    let next = d.arr.edge_params()[e].iter().copied().filter(|&t| t > t0).fold(1.0, f64::min);
    let cuts = [t0, 0.5 * (t0 + next)];
    // detach the arc, subdivide at its crossing, then reattach it as two arcs
    let mut without = d.arr.clone();
    let arc = without.curves.remove(ci);
    let (mut out, _) = add_marks(&ShadowDiagram { arr: without, marks: d.marks.clone() }, e, &cuts)?;
    let (xp, yp) = (cut_corner(s, e, 2, op, 1), cut_corner(s, e, 2, op, 2));
    let (xq, yq) = (cut_corner(s, e, 2, oq, 1), cut_corner(s, e, 2, oq, 2));
    let mut a1 = remap_arc(&d.arr, &arc, e, &cuts)?;
    let mut a3 = a1.split_off(site.crossing + 1);
    let last = a1.len() - 1;
    a1[last].to = Port::Corner(xp.1);
    a3[0].from = Port::Corner(yq.1);
    let others: Vec<Tag> = SHADOWS.iter().copied().filter(|&t| t != st).collect();
    let chord = |tag: Tag, a: Corner, b: Corner| Curve { tag, closed: false, segs: vec![Segment { poly: a.0, from: Port::Corner(a.1), to: Port::Corner(b.1) }] };
    out.arr.curves.insert(ci, Curve { tag: st, closed: false, segs: a1 });
    out.arr.curves.push(Curve { tag: st, closed: false, segs: a3 });
    out.arr.curves.push(chord(others[0], xp, yp));
    out.arr.curves.push(chord(others[1], xq, yq));
    out.arr.check_structure()?;
    Ok(out)
}

/// The segments of `arc` after subdividing `e` at `cuts`, with the point at
/// `cuts[0]` (where the arc crosses) moved just off the cut.
fn remap_arc(arr: &Arrangement, arc: &Curve, e: EdgeId, cuts: &[f64]) -> Result<Vec<Segment>, BridgeError> {
    let mut shifted = arc.clone();
    let nudge = |p: Port, s: &SurfaceComplex, poly: usize| match p {
        Port::Side { side, t } if s.polygons()[poly][side].edge == e && t == cuts[0] => Port::Side { side, t: 0.5 * (cuts[0] + cuts[1]) },
        other => other,
    };
    let s = &*arr.surface;
    for g in &mut shifted.segs {
        g.from = nudge(g.from, s, g.poly);
        g.to = nudge(g.to, s, g.poly);
    }
    let lone = Arrangement::with_curves(arr.surface.clone(), vec![shifted]);
    let (sub, _) = subdivide_edge(&lone, e, cuts)?;
    Ok(sub.curves.into_iter().next().expect("one curve").segs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeperturbSite {
    /// Indices into the mark list of two marks joined by arcs of two families.
    pub marks: (usize, usize),
}

/// Inverse of [`perturb`]: remove two marks joined by short arcs of two
/// families, rejoin the third family's arcs, and merge the edge pieces.
pub fn deperturb(d: &ShadowDiagram, site: DeperturbSite) -> Result<ShadowDiagram, BridgeError> {
    let bad = |m: &str| BridgeError::NotDeperturbable(m.to_string());
    let (ix, iy) = site.marks;
    if ix == iy || ix >= d.marks.len() || iy >= d.marks.len() {
        return Err(bad("mark indices"));
    }
    if d.bridge_number() <= 1 {
        return Err(bad("bridge number is already one"));
    }
    let s = &*d.arr.surface;
    // x–y arcs of two families, and the third family's arcs at x and y
    let mut short = Vec::new();
    let mut rest: Vec<(usize, usize, bool)> = Vec::new();
    for t in SHADOWS {
        for ci in d.arr.family(t) {
            let Some((a, b)) = d.ends(ci) else { return Err(bad("arc end off the marks")) };
            if (a, b) == (ix, iy) || (a, b) == (iy, ix) {
                short.push(ci);
            } else {
                for (m, at_end) in [(a, false), (b, true)] {
                    if m == ix || m == iy {
                        rest.push((ci, m, at_end));
                    }
                }
            }
        }
    }
    if short.len() != 2 || rest.len() != 2 || short.iter().any(|&c| d.arr.curves[c].segs.len() != 1) {
        return Err(bad("marks are not joined by two single-chord arcs"));
    }
    let fam = d.arr.curves[rest[0].0].tag;
    if d.arr.curves[rest[1].0].tag != fam || rest[0].0 == rest[1].0 {
        return Err(bad("third family does not meet both marks in distinct arcs"));
    }
    let (cx, cy) = (corners_of(s, d.marks[ix]), corners_of(s, d.marks[iy]));
    if cx.len() != 2 || cy.len() != 2 {
        return Err(bad("marks are not two-valent vertices"));
    }
    // the edge between x and y, and its neighbours on either side
    let (p, c) = cx[0];
    let n = s.poly_len(p);
    let (mid, before, after) = if cy.contains(&(p, (c + 1) % n)) {
        (c, (c + n - 1) % n, (c + 1) % n)
    } else if cy.contains(&(p, (c + n - 1) % n)) {
        ((c + n - 1) % n, c, (c + n - 2) % n)
    } else {
        return Err(bad("marks are not adjacent"));
    };
    let (e0, em, e1) = (s.polygons()[p][before].edge, s.polygons()[p][mid].edge, s.polygons()[p][after].edge);
    if e0 == em || em == e1 || e0 == e1 {
        return Err(bad("edge pieces are not distinct"));
    }
    let rev = s.polygons()[p][mid].reversed;
    if s.polygons()[p][before].reversed != rev || s.polygons()[p][after].reversed != rev {
        return Err(bad("edge pieces are not coherently oriented"));
    }
    let params = d.arr.edge_params();
    if !params[em].is_empty() {
        return Err(bad("curves cross the middle piece"));
    }
    // order pieces by edge parameter: reading order unless reversed
    let (reading_first, reading_last) = if mid == (c + n - 1) % n { (after, before) } else { (before, after) };
    let (lo_side, hi_side) = if rev { (reading_last, reading_first) } else { (reading_first, reading_last) };
    let (lo, hi) = (s.polygons()[p][lo_side].edge, s.polygons()[p][hi_side].edge);
    let mut arr = merge_edges(&d.arr, [lo, em, hi], &short)?;
    // rejoin the third family's two arcs through the merged edge
    let (a, b) = if rest[0].1 == ix { (rest[0], rest[1]) } else { (rest[1], rest[0]) };
    let mut arc_a = arr.curves[a.0].clone();
    let mut arc_b = arr.curves[b.0].clone();
    if !a.2 {
        arc_a = arc_a.reversed();
    }
    if b.2 {
        arc_b = arc_b.reversed();
    }
    let la = arc_a.segs.len() - 1;
    let (Port::Side { side: sa, t: xa }, Port::Side { side: sb, .. }) = (arc_a.segs[la].to, arc_b.segs[0].from) else {
        return Err(bad("arcs do not end on the merged edge"));
    };
    let oa = Occ { poly: arc_a.segs[la].poly, side: sa };
    let ob = Occ { poly: arc_b.segs[0].poly, side: sb };
    if arr.surface.mate(oa) != Some(ob) {
        return Err(bad("arcs meet the merged edge from the same side"));
    }
    arc_b.segs[0].from = Port::Side { side: sb, t: xa };
    let keep_first = a.0.min(b.0);
    let mut joined = arc_a;
    joined.segs.extend(arc_b.segs);
    let mut curves = Vec::new();
    for (i, cv) in arr.curves.iter().enumerate() {
        if i == keep_first {
            curves.push(joined.clone());
        } else if i == a.0 || i == b.0 || short.contains(&i) {
            continue;
        } else {
            curves.push(cv.clone());
        }
    }
    arr.curves = curves;
    arr.check_structure()?;
    let marks: Vec<Corner> = remap_after_merge(&d.arr.surface, [lo, em, hi], &d.marks, [ix, iy]);
    Ok(ShadowDiagram { arr, marks })
}

/// Merge three consecutive edges `[lo, mid, hi]` (in parameter order) into
/// `lo`, removing the curves `drop` first. Corners at the two inner vertices
/// become points at parameters 1/3 and 2/3.
fn merge_edges(arr: &Arrangement, pieces: [EdgeId; 3], drop: &[usize]) -> Result<Arrangement, BridgeError> {
    let s = &*arr.surface;
    let [lo, mid, hi] = pieces;
    let mut labels = Vec::new();
    let mut id = Vec::new();
    for (e, l) in s.labels().iter().enumerate() {
        if e == mid || e == hi {
            id.push(usize::MAX);
        } else {
            id.push(labels.len());
            labels.push(l.clone());
        }
    }
    let mut polys = Vec::new();
    // per polygon: old side → (new side, piece index or none)
    let mut side_map: Vec<Vec<(usize, Option<usize>)>> = Vec::new();
    let mut corner_map: Vec<Vec<Port>> = Vec::new();
    for p in s.polygons() {
        let n = p.len();
        let mut w: Vec<Side> = Vec::new();
        let mut sm = vec![(0, None); n];
        for (j, sd) in p.iter().enumerate() {
            let piece = pieces.iter().position(|&x| x == sd.edge);
            match piece {
                None => {
                    sm[j] = (w.len(), None);
                    w.push(Side { edge: id[sd.edge], reversed: sd.reversed });
                }
                Some(i) => {
                    // the merged side is emitted at the first piece met in reading order
                    let first_in_reading = if sd.reversed { 2 } else { 0 };
                    if i == first_in_reading {
                        w.push(Side { edge: id[lo], reversed: sd.reversed });
                    }
                    sm[j] = (usize::MAX, Some(i));
                }
            }
        }
        // fill the side index of pieces: the merged side sits where its first piece was emitted
        let mut cur = 0;
        for j in 0..n {
            match sm[j] {
                (ns, None) => cur = ns + 1,
                (_, Some(i)) => {
                    let first_in_reading = if p[j].reversed { 2 } else { 0 };
                    if i == first_in_reading {
                        sm[j] = (cur, Some(i));
                        cur += 1;
                    } else if cur == 0 {
                        // the run wraps around the end of the word
                        return Err(BridgeError::NotDeperturbable("edge pieces straddle the start of a polygon".into()));
                    } else {
                        sm[j] = (cur - 1, Some(i));
                    }
                }
            }
        }
        let mut cm = Vec::new();
        for c in 0..n {
            let prev = (c + n - 1) % n;
            let here = sm[c];
            let inner = here.1.is_some() && sm[prev].1.is_some() && p[prev].edge != p[c].edge;
            if inner {
                // vertex between two pieces: the param of that cut
                let (i, j) = (sm[prev].1.unwrap(), here.1.unwrap());
                let cut = i.max(j);
                cm.push(Port::Side { side: here.0, t: cut as f64 / 3.0 });
            } else {
                cm.push(Port::Corner(here.0));
            }
        }
        polys.push(w);
        side_map.push(sm);
        corner_map.push(cm);
    }
    let surface = Arc::new(SurfaceComplex::from_sides(labels, polys)?);
    let map_port = |poly: usize, port: Port| -> Port {
        match port {
            Port::Corner(c) => corner_map[poly][c],
            Port::Side { side, t } => match side_map[poly][side] {
                (ns, None) => Port::Side { side: ns, t },
                (ns, Some(i)) => Port::Side { side: ns, t: (i as f64 + t) / 3.0 },
            },
        }
    };
    let curves = arr
        .curves
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            if drop.contains(&ci) {
                return c.clone();
            }
            Curve {
                tag: c.tag,
                closed: c.closed,
                segs: c.segs.iter().map(|g| Segment { poly: g.poly, from: map_port(g.poly, g.from), to: map_port(g.poly, g.to) }).collect(),
            }
        })
        .collect();
    Ok(Arrangement::with_curves(surface, curves))
}

fn remap_after_merge(old: &SurfaceComplex, pieces: [EdgeId; 3], marks: &[Corner], gone: [usize; 2]) -> Vec<Corner> {
    // each run of three pieces collapses to one side
    marks
        .iter()
        .enumerate()
        .filter(|(i, _)| !gone.contains(i))
        .map(|(_, &(p, c))| {
            let runs = old.polygons()[p][..c].iter().filter(|sd| pieces.contains(&sd.edge)).count();
            (p, c - 2 * (runs / 3))
        })
        .collect()
}

fn slide_tags(d: &ShadowDiagram, arc: usize, over: usize) -> Result<[Tag; 2], BridgeError> {
    let bad = BridgeError::BadSlide { arc, over };
    let (Some(a), Some(c)) = (d.arr.curves.get(arc), d.arr.curves.get(over)) else { return Err(bad) };
    if !SHADOWS.contains(&a.tag) || a.closed || !c.closed || c.tag.shadow() != a.tag {
        return Err(bad);
    }
    Ok([c.tag, a.tag])
}

/// Bands along which shadow arc `arc` can slide over curve `over` of the
/// same letter without meeting the other curves or arcs of that letter.
pub fn shadow_slide_bands(d: &ShadowDiagram, arc: usize, over: usize) -> Result<Vec<Band>, BridgeError> {
    let obstacles = slide_tags(d, arc, over)?;
    Ok(slide::candidate_bands(&d.arr, arc, over, &obstacles))
}

/// Slide a shadow arc over a same-letter curve. Marks stay put.
pub fn shadow_slide(d: &ShadowDiagram, arc: usize, over: usize, band: &Band) -> Result<ShadowDiagram, BridgeError> {
    let obstacles = slide_tags(d, arc, over)?;
    let arr = slide::slide(&d.arr, arc, over, band, &obstacles)?;
    arr.check_structure()?;
    Ok(ShadowDiagram { arr, marks: d.marks.clone() })
}

/// Marks placed on a stretch of an interior edge that no curve crosses.
#[derive(Clone, Debug)]
pub struct LocalMarks {
    pub diagram: ShadowDiagram,
    /// Per mark: its corner on the occurrence-0 side and on the other side.
    pub near: Vec<Corner>,
    pub far: Vec<Corner>,
    /// Per piece between consecutive marks: (edge, side index near, side index far).
    pub pieces: Vec<(EdgeId, Occ, Occ)>,
}

/// Put `count` new marks on the first interior edge, before its first
/// curve point.
pub fn local_marks(base: &Arrangement, count: usize) -> Result<LocalMarks, BridgeError> {
    let s = &*base.surface;
    let e = (0..s.num_edges()).find(|&e| s.is_interior(e)).ok_or(BridgeError::BoundaryEdge(0))?;
    let first = base.edge_params()[e].first().copied().unwrap_or(1.0);
    let cuts: Vec<f64> = (1..=count).map(|i| first * i as f64 / (count + 1) as f64).collect();
    let d = ShadowDiagram { arr: base.clone(), marks: Vec::new() };
    let (diagram, _) = add_marks(&d, e, &cuts)?;
    let (o0, o1) = (s.occurrences(e)[0], s.occurrences(e)[1]);
    let near: Vec<Corner> = (1..=count).map(|i| cut_corner(s, e, count, o0, i)).collect();
    let far: Vec<Corner> = (1..=count).map(|i| cut_corner(s, e, count, o1, i)).collect();
    let ns = &*diagram.arr.surface;
    let mut pieces = Vec::new();
    for i in 1..count {
        // the side between the corners of marks i-1 and i, on each side
        let side_between = |a: Corner, b: Corner| -> Occ {
            let n = ns.poly_len(a.0);
            if (a.1 + 1) % n == b.1 { Occ { poly: a.0, side: a.1 } } else { Occ { poly: a.0, side: b.1 } }
        };
        let on = side_between(near[i - 1], near[i]);
        let of = side_between(far[i - 1], far[i]);
        pieces.push((ns.side(on).edge, on, of));
    }
    Ok(LocalMarks { diagram, near, far, pieces })
}

impl LocalMarks {
    /// Direct chord between marks `i` and `j` on the near or far side.
    pub fn chord(&self, tag: Tag, i: usize, j: usize, far: bool) -> Curve {
        let (a, b) = if far { (self.far[i], self.far[j]) } else { (self.near[i], self.near[j]) };
        Curve { tag, closed: false, segs: vec![Segment { poly: a.0, from: Port::Corner(a.1), to: Port::Corner(b.1) }] }
    }

    /// Arc from mark `i` to mark `i + 1` that starts on the near side,
    /// crosses the piece between them at `t`, and ends on the far side.
    pub fn wiggle(&self, tag: Tag, i: usize, t: f64) -> Curve {
        let (_, on, of) = self.pieces[i];
        let (a, b) = (self.near[i], self.far[i + 1]);
        Curve {
            tag,
            closed: false,
            segs: vec![
                Segment { poly: a.0, from: Port::Corner(a.1), to: Port::Side { side: on.side, t } },
                Segment { poly: b.0, from: Port::Side { side: of.side, t }, to: Port::Corner(b.1) },
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn report(d: &ShadowDiagram) -> BridgeReport {
        validate_shadow(d, 5000).unwrap()
    }

    fn same(a: &ShadowDiagram, b: &ShadowDiagram) -> bool {
        let (mut a, mut b) = (a.clone(), b.clone());
        a.arr.normalize();
        b.arr.normalize();
        a == b
    }

    /// Two marks joined by one direct chord per family.
    fn disk(base: &Arrangement) -> ShadowDiagram {
        let lm = local_marks(base, 2).unwrap();
        let mut d = lm.diagram.clone();
        d.arr.curves.push(lm.chord(Tag::ShadowAlpha, 0, 1, false));
        d.arr.curves.push(lm.chord(Tag::ShadowBeta, 0, 1, true));
        d.arr.curves.push(lm.chord(Tag::ShadowGamma, 0, 1, false));
        d
    }

    #[test]
    fn projective_plane_in_rp4() {
        let r = report(&fixtures::rp2_in_rp4(2000).unwrap());
        assert_eq!(r.status, Status::Valid, "{r:?}");
        assert_eq!(r.parameters().as_deref(), Some("(2,1;2,1)"));
        assert_eq!((r.euler_characteristic, r.components), (Some(1), Some(1)));
    }

    #[test]
    fn sphere_in_twisted_bundle() {
        let r = report(&fixtures::sphere_in_s2_bundle(2000).unwrap());
        assert_eq!(r.status, Status::Valid, "{r:?}");
        assert_eq!(r.parameters().as_deref(), Some("(3,1;1,1)"));
        assert_eq!((r.euler_characteristic, r.components), (Some(2), Some(1)));
    }

    #[test]
    fn one_bridge_disk() {
        let r = report(&disk(&fixtures::klein()));
        assert_eq!(r.status, Status::Valid, "{r:?}");
        assert_eq!((r.b, r.c), (1, [1, 1, 1]));
        assert!(r.unions.iter().all(|u| u.loops == vec![LoopCheck::Trivial]));
    }

    /// Two marks; every family's arc crosses the piece between them once.
    fn wiggly(base: &Arrangement) -> ShadowDiagram {
        let lm = local_marks(base, 2).unwrap();
        let mut d = lm.diagram.clone();
        for (t, x) in [(Tag::ShadowAlpha, 0.25), (Tag::ShadowBeta, 0.5), (Tag::ShadowGamma, 0.75)] {
            d.arr.curves.push(lm.wiggle(t, 0, x));
        }
        d
    }

    #[test]
    fn components_count() {
        let base = fixtures::klein();
        let lm = local_marks(&base, 4).unwrap();
        let mut d = lm.diagram.clone();
        for (t, far) in [(Tag::ShadowAlpha, false), (Tag::ShadowBeta, true), (Tag::ShadowGamma, false)] {
            d.arr.curves.push(lm.chord(t, 0, 1, far));
            d.arr.curves.push(lm.chord(t, 2, 3, far));
        }
        let r = report(&d);
        assert_eq!(r.status, Status::Valid, "{r:?}");
        assert_eq!((r.c, r.euler_characteristic, r.components), ([2, 2, 2], Some(4), Some(2)));
        let empty = ShadowDiagram::new(base, Vec::new());
        assert_eq!(surface_components(&empty), 0);
        assert_eq!(report(&empty).euler_characteristic, Some(0));
    }

    #[test]
    fn perturb_and_deperturb() {
        let d = fixtures::sphere_in_s2_bundle(2000).unwrap();
        let p = perturb(&d, PerturbSite { family: Tag::Alpha, arc: 0, crossing: 0 }).unwrap();
        let r = report(&p);
        assert_eq!(r.status, Status::Valid, "{r:?}");
        assert!(r.parameters().unwrap().starts_with("(3,1;2,"));
        assert_eq!((r.b, r.euler_characteristic, r.components), (2, Some(2), Some(1)));
        let n = p.marks.len();
        let back = deperturb(&p, DeperturbSite { marks: (n - 2, n - 1) }).unwrap();
        assert!(same(&back, &d));
    }

    #[test]
    fn repeated_perturbation_unwinds() {
        let d = wiggly(&fixtures::klein());
        assert_eq!(report(&d).status, Status::Valid);
        let mut stack = vec![d];
        for fam in [Tag::Gamma, Tag::Alpha, Tag::Beta, Tag::Alpha] {
            let top = stack.last().unwrap();
            let arc = top.arr.family(fam.shadow()).into_iter().position(|c| top.arr.curves[c].segs.len() > 1);
            let Some(arc) = arc else { continue };
            let next = perturb(top, PerturbSite { family: fam, arc, crossing: 0 }).unwrap();
            let r = report(&next);
            assert_eq!((r.status, r.euler_characteristic), (Status::Valid, Some(2)), "{r:?}");
            stack.push(next);
        }
        assert_eq!(stack.len(), 4);
        while stack.len() > 1 {
            let top = stack.pop().unwrap();
            let n = top.marks.len();
            let back = deperturb(&top, DeperturbSite { marks: (n - 2, n - 1) }).unwrap();
            assert!(same(&back, stack.last().unwrap()));
        }
    }

    #[test]
    fn one_bridge_cannot_deperturb() {
        let d = disk(&fixtures::klein());
        assert!(matches!(deperturb(&d, DeperturbSite { marks: (0, 1) }), Err(BridgeError::NotDeperturbable(_))));
    }

    #[test]
    fn structural_witnesses_reported() {
        let mut d = fixtures::rp2_in_rp4(2000).unwrap();
        let last = d.arr.curves.len() - 1;
        d.arr.curves.remove(last);
        let r = report(&d);
        assert_eq!(r.status, Status::Invalid);
        assert!(r.witnesses.iter().any(|w| matches!(w, BridgeWitness::ArcCount { .. })), "{r:?}");
    }

    #[test]
    fn slides_keep_loop_checks() {
        let d = disk(&fixtures::klein());
        let before: Vec<_> = report(&d).unions.iter().map(|u| u.loops.clone()).collect();
        let arc = d.arr.family(Tag::ShadowAlpha)[0];
        let over = d.arr.family(Tag::Alpha)[0];
        let bands = shadow_slide_bands(&d, arc, over).unwrap();
        assert!(!bands.is_empty());
        for band in &bands {
            let s = shadow_slide(&d, arc, over, band).unwrap();
            let after: Vec<_> = report(&s).unions.iter().map(|u| u.loops.clone()).collect();
            assert_eq!(before, after);
        }
        assert!(shadow_slide_bands(&d, arc, d.arr.family(Tag::Beta)[0]).is_err());
    }
}
