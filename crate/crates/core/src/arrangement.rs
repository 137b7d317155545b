//! Curves and arcs drawn on a surface complex, as chords inside polygons.
//!
//! A curve is a sequence of segments; each segment is a chord of one polygon
//! between two ports. A port is either a point on a side, named by the edge's
//! own parameter `t ∈ (0,1)` (shared by both occurrences of the edge), or a
//! polygon corner. Two chords of a polygon cross iff their endpoints strictly
//! interleave around the polygon; chords sharing a corner only touch.

use std::cmp::Ordering;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::surface::{EdgeId, LoopWord, Occ, SurfaceComplex};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Port {
    Side { side: usize, t: f64 },
    Corner(usize),
}

impl Port {
    pub fn side(self) -> Option<(usize, f64)> {
        match self {
            Port::Side { side, t } => Some((side, t)),
            Port::Corner(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub poly: usize,
    pub from: Port,
    pub to: Port,
}

impl Segment {
    pub fn reversed(self) -> Segment {
        Segment { poly: self.poly, from: self.to, to: self.from }
    }
}

/// Which family a curve belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    Alpha,
    Beta,
    Gamma,
    ShadowAlpha,
    ShadowBeta,
    ShadowGamma,
    /// Working curves (cut-system arcs, pushoffs) owned by an algorithm.
    Aux(u16),
}

impl Tag {
    pub fn name(self) -> String {
        match self {
            Tag::Alpha => "alpha".into(),
            Tag::Beta => "beta".into(),
            Tag::Gamma => "gamma".into(),
            Tag::ShadowAlpha => "shadow_alpha".into(),
            Tag::ShadowBeta => "shadow_beta".into(),
            Tag::ShadowGamma => "shadow_gamma".into(),
            Tag::Aux(i) => format!("aux{i}"),
        }
    }
    pub fn shadow(self) -> Tag {
        match self {
            Tag::Alpha => Tag::ShadowAlpha,
            Tag::Beta => Tag::ShadowBeta,
            Tag::Gamma => Tag::ShadowGamma,
            t => t,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub tag: Tag,
    pub closed: bool,
    pub segs: Vec<Segment>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("curve {0} has no segments")]
    Empty(usize),
    #[error("curve {curve}: segment {seg} references a missing polygon, side or corner")]
    BadRef { curve: usize, seg: usize },
    #[error("curve {curve}: segment {seg} is degenerate (both ends at one point)")]
    Degenerate { curve: usize, seg: usize },
    #[error("curve {curve}: segment {seg} does not continue across the edge it left")]
    Discontinuous { curve: usize, seg: usize },
    #[error("curve {curve}: arc endpoint on an interior edge")]
    DanglingEnd { curve: usize },
    #[error("curve {curve}: closed curve ends at a corner")]
    ClosedAtCorner { curve: usize },
    #[error("curve {0} crosses itself")]
    SelfCrossing(usize),
    #[error("curves {0} and {1} meet at an edge point")]
    SharedPoint(usize, usize),
    #[error("curves {0} and {1} of one family cross")]
    FamilyCrossing(usize, usize),
    #[error("curve {0} is a closed curve required to be an arc, or vice versa")]
    WrongKind(usize),
    #[error("curve {0} is one-sided")]
    OneSided(usize),
    #[error("curve {0} bounds a disk")]
    Inessential(usize),
}

/// A surface together with every curve drawn on it.
#[derive(Clone, Debug)]
pub struct Arrangement {
    pub surface: Arc<SurfaceComplex>,
    pub curves: Vec<Curve>,
}

impl PartialEq for Arrangement {
    fn eq(&self, other: &Self) -> bool {
        *self.surface == *other.surface && self.curves == other.curves
    }
}

/// Position of a port on the boundary circle of its polygon: side `s`
/// occupies `(s, s+1)`, corner `c` sits at `c`.
pub fn port_pos(s: &SurfaceComplex, poly: usize, port: Port) -> f64 {
    match port {
        Port::Corner(c) => c as f64,
        Port::Side { side, t } => {
            let rev = s.polygons()[poly][side].reversed;
            side as f64 + if rev { 1.0 - t } else { t }
        }
    }
}

/// Whether `x` lies strictly inside the circle arc running forward from `a` to `b`.
pub fn inside(x: f64, a: f64, b: f64, n: f64) -> bool {
    let d = |u: f64, v: f64| (v - u).rem_euclid(n);
    let (dx, db) = (d(a, x), d(a, b));
    dx > 0.0 && dx < db
}

/// Whether chords `(a1,b1)` and `(a2,b2)` of an `n`-gon cross.
pub fn chords_cross(a1: f64, b1: f64, a2: f64, b2: f64, n: f64) -> bool {
    if a1 == a2 || a1 == b2 || b1 == a2 || b1 == b2 {
        return false;
    }
    inside(a2, a1, b1, n) != inside(b2, a1, b1, n)
}

impl Curve {
    pub fn new(tag: Tag, closed: bool, segs: Vec<Segment>) -> Self {
        Curve { tag, closed, segs }
    }

    /// Closed curve from its cyclic crossing sequence `(edge, forward, t)`;
    /// `forward` crosses from occurrence 0 into occurrence 1.
    pub fn closed_from_crossings(s: &SurfaceComplex, tag: Tag, xs: &[(EdgeId, bool, f64)]) -> Curve {
        let n = xs.len();
        let mut segs = Vec::with_capacity(n);
        for k in 0..n {
            let (pe, pf, pt) = xs[(k + n - 1) % n];
            let (e, f, t) = xs[k];
            let enter = crossing_occs(s, pe, pf).1;
            let exit = crossing_occs(s, e, f).0;
            assert_eq!(enter.poly, exit.poly, "crossing sequence is not continuous at {k}");
            segs.push(Segment {
                poly: enter.poly,
                from: Port::Side { side: enter.side, t: pt },
                to: Port::Side { side: exit.side, t },
            });
        }
        Curve { tag, closed: true, segs }
    }

    /// Arc from `start` (a port in `poly0`) through interior crossings to an end port.
    pub fn arc_from_crossings(
        s: &SurfaceComplex,
        tag: Tag,
        poly0: usize,
        start: Port,
        xs: &[(EdgeId, bool, f64)],
        end: Port,
    ) -> Curve {
        let mut segs = Vec::new();
        let mut poly = poly0;
        let mut from = start;
        for &(e, f, t) in xs {
            let (exit, enter) = crossing_occs(s, e, f);
            assert_eq!(exit.poly, poly, "arc crossing sequence is not continuous");
            segs.push(Segment { poly, from, to: Port::Side { side: exit.side, t } });
            poly = enter.poly;
            from = Port::Side { side: enter.side, t };
        }
        segs.push(Segment { poly, from, to: end });
        Curve { tag, closed: false, segs }
    }

    pub fn reversed(&self) -> Curve {
        let mut segs: Vec<Segment> = self.segs.iter().rev().map(|s| s.reversed()).collect();
        if self.closed && !segs.is_empty() {
            // keep the starting segment so cyclic data stays comparable
            segs.rotate_right(1);
        }
        Curve { tag: self.tag, closed: self.closed, segs }
    }

    /// `(edge, +1/-1)` for each interior crossing, in order; `+1` goes from
    /// occurrence 0 to occurrence 1.
    pub fn crossing_word(&self, s: &SurfaceComplex) -> Vec<(EdgeId, i8)> {
        let mut out = Vec::new();
        let n = self.segs.len();
        let last = if self.closed { n } else { n - 1 };
        for seg in &self.segs[..last] {
            if let Port::Side { side, .. } = seg.to {
                let o = Occ { poly: seg.poly, side };
                out.push((s.polygons()[seg.poly][side].edge, if s.occ_index(o) == 0 { 1 } else { -1 }));
            }
        }
        out
    }

    pub fn loop_word(&self) -> Option<LoopWord> {
        if !self.closed {
            return None;
        }
        let exits = self
            .segs
            .iter()
            .map(|g| match g.to {
                Port::Side { side, .. } => Some(Occ { poly: g.poly, side }),
                Port::Corner(_) => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(LoopWord { exits })
    }

    /// Number of orientation-reversing gluings crossed, mod 2.
    pub fn w1(&self, s: &SurfaceComplex) -> bool {
        self.crossing_word(s).iter().filter(|(e, _)| s.is_reversing(*e)).count() % 2 == 1
    }

    pub fn is_two_sided(&self, s: &SurfaceComplex) -> Result<bool, CurveError> {
        if !self.closed {
            return Err(CurveError::WrongKind(0));
        }
        Ok(!self.w1(s))
    }

    /// Every edge point the curve passes through or ends at.
    pub fn edge_points<'a>(&'a self, s: &'a SurfaceComplex) -> impl Iterator<Item = (EdgeId, f64)> + 'a {
        self.segs.iter().flat_map(move |g| {
            [g.from, g.to].into_iter().filter_map(move |p| match p {
                Port::Side { side, t } => Some((s.polygons()[g.poly][side].edge, t)),
                Port::Corner(_) => None,
            })
        })
    }
}

/// (exit, enter) occurrences for crossing edge `e` in direction `forward`.
pub fn crossing_occs(s: &SurfaceComplex, e: EdgeId, forward: bool) -> (Occ, Occ) {
    let o = s.occurrences(e);
    assert_eq!(o.len(), 2, "crossing a boundary edge");
    if forward {
        (o[0], o[1])
    } else {
        (o[1], o[0])
    }
}

impl Arrangement {
    pub fn new(surface: SurfaceComplex) -> Self {
        Arrangement { surface: Arc::new(surface), curves: Vec::new() }
    }

    pub fn with_curves(surface: Arc<SurfaceComplex>, curves: Vec<Curve>) -> Self {
        Arrangement { surface, curves }
    }

    pub fn family(&self, tag: Tag) -> Vec<usize> {
        (0..self.curves.len()).filter(|&i| self.curves[i].tag == tag).collect()
    }

    pub fn count(&self, tag: Tag) -> usize {
        self.curves.iter().filter(|c| c.tag == tag).count()
    }

    /// Keep only curves whose tag is in `tags`, preserving order.
    pub fn restrict(&self, tags: &[Tag]) -> Arrangement {
        Arrangement {
            surface: self.surface.clone(),
            curves: self.curves.iter().filter(|c| tags.contains(&c.tag)).cloned().collect(),
        }
    }

    pub fn pos(&self, poly: usize, port: Port) -> f64 {
        port_pos(&self.surface, poly, port)
    }

    fn seg_cross(&self, a: &Segment, b: &Segment) -> bool {
        if a.poly != b.poly {
            return false;
        }
        let n = self.surface.poly_len(a.poly) as f64;
        chords_cross(
            self.pos(a.poly, a.from),
            self.pos(a.poly, a.to),
            self.pos(b.poly, b.from),
            self.pos(b.poly, b.to),
            n,
        )
    }

    /// Drawn crossings between two distinct curves.
    pub fn crossings(&self, i: usize, j: usize) -> usize {
        let (a, b) = (&self.curves[i], &self.curves[j]);
        let mut n = 0;
        for x in &a.segs {
            for y in &b.segs {
                if self.seg_cross(x, y) {
                    n += 1;
                }
            }
        }
        n
    }

    pub fn self_crossings(&self, i: usize) -> usize {
        let c = &self.curves[i];
        let mut n = 0;
        for x in 0..c.segs.len() {
            for y in x + 1..c.segs.len() {
                if self.seg_cross(&c.segs[x], &c.segs[y]) {
                    n += 1;
                }
            }
        }
        n
    }

    /// Total drawn crossings between two sets of curves.
    pub fn crossings_between(&self, xs: &[usize], ys: &[usize]) -> usize {
        xs.iter().map(|&i| ys.iter().map(|&j| self.crossings(i, j)).sum::<usize>()).sum()
    }

    /// Check each curve's structure: references, continuity, arc endpoints.
    pub fn check_structure(&self) -> Result<(), CurveError> {
        let s = &*self.surface;
        for (ci, c) in self.curves.iter().enumerate() {
            if c.segs.is_empty() {
                return Err(CurveError::Empty(ci));
            }
            for (k, g) in c.segs.iter().enumerate() {
                if g.poly >= s.num_polygons() {
                    return Err(CurveError::BadRef { curve: ci, seg: k });
                }
                let n = s.poly_len(g.poly);
                for p in [g.from, g.to] {
                    let ok = match p {
                        Port::Side { side, t } => side < n && t > 0.0 && t < 1.0,
                        Port::Corner(cn) => cn < n,
                    };
                    if !ok {
                        return Err(CurveError::BadRef { curve: ci, seg: k });
                    }
                }
                if self.pos(g.poly, g.from) == self.pos(g.poly, g.to) {
                    return Err(CurveError::Degenerate { curve: ci, seg: k });
                }
            }
            let m = c.segs.len();
            let links = if c.closed { m } else { m - 1 };
            for k in 0..links {
                let (g, h) = (c.segs[k], c.segs[(k + 1) % m]);
                let ok = match (g.to, h.from) {
                    (Port::Side { side, t }, Port::Side { side: s2, t: t2 }) => {
                        s.mate(Occ { poly: g.poly, side }) == Some(Occ { poly: h.poly, side: s2 }) && t == t2
                    }
                    _ => false,
                };
                if !ok {
                    if c.closed && (matches!(g.to, Port::Corner(_)) || matches!(h.from, Port::Corner(_))) {
                        return Err(CurveError::ClosedAtCorner { curve: ci });
                    }
                    return Err(CurveError::Discontinuous { curve: ci, seg: (k + 1) % m });
                }
            }
            if !c.closed {
                for (g, p) in [(c.segs[0], c.segs[0].from), (c.segs[m - 1], c.segs[m - 1].to)] {
                    if let Port::Side { side, .. } = p {
                        if s.mate(Occ { poly: g.poly, side }).is_some() {
                            return Err(CurveError::DanglingEnd { curve: ci });
                        }
                    }
                }
            }
        }
        // no two crossings share an edge point (except a curve's own consecutive ports)
        let mut pts: Vec<(EdgeId, f64, usize)> = Vec::new();
        for (ci, c) in self.curves.iter().enumerate() {
            let mut own: Vec<(EdgeId, f64)> = c.edge_points(s).collect();
            own.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
            own.dedup();
            pts.extend(own.into_iter().map(|(e, t)| (e, t, ci)));
        }
        pts.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        for w in pts.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(CurveError::SharedPoint(w[0].2, w[1].2));
            }
        }
        // a closed curve passes each edge point once
        for (ci, c) in self.curves.iter().enumerate() {
            let n = c.edge_points(s).count();
            let mut own: Vec<(EdgeId, f64)> = c.edge_points(s).collect();
            own.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
            own.dedup();
            let expected = if c.closed { n / 2 } else { (n + ends_on_sides(c)) / 2 };
            if own.len() != expected {
                return Err(CurveError::SelfCrossing(ci));
            }
        }
        Ok(())
    }

    /// Every curve simple, and curves sharing a tag pairwise disjoint.
    pub fn check_families(&self) -> Result<(), CurveError> {
        for i in 0..self.curves.len() {
            if self.self_crossings(i) > 0 {
                return Err(CurveError::SelfCrossing(i));
            }
            for j in i + 1..self.curves.len() {
                if self.curves[i].tag == self.curves[j].tag && self.crossings(i, j) > 0 {
                    return Err(CurveError::FamilyCrossing(i, j));
                }
            }
        }
        Ok(())
    }

    /// Re-space edge parameters to `(i+1)/(n+1)`, preserving order, so equal
    /// configurations serialize identically.
    pub fn normalize(&mut self) {
        let ts = self.edge_params();
        let remap = |e: EdgeId, t: f64| -> f64 {
            let v = &ts[e];
            let i = v.binary_search_by(|x| x.total_cmp(&t)).expect("known parameter");
            (i + 1) as f64 / (v.len() + 1) as f64
        };
        let s = self.surface.clone();
        for c in &mut self.curves {
            for g in &mut c.segs {
                for p in [&mut g.from, &mut g.to] {
                    if let Port::Side { side, t } = p {
                        *t = remap(s.polygons()[g.poly][*side].edge, *t);
                    }
                }
            }
        }
    }

    /// Sorted distinct parameters used on each edge.
    pub fn edge_params(&self) -> Vec<Vec<f64>> {
        let s = &*self.surface;
        let mut ts: Vec<Vec<f64>> = vec![Vec::new(); s.num_edges()];
        for c in &self.curves {
            for (e, t) in c.edge_points(s) {
                ts[e].push(t);
            }
        }
        for v in &mut ts {
            v.sort_by(|a, b| a.total_cmp(b));
            v.dedup();
        }
        ts
    }

    /// Slot index of a parameter on an edge among all points of the arrangement.
    pub fn slot_of(params: &[Vec<f64>], e: EdgeId, t: f64) -> usize {
        params[e].binary_search_by(|x| x.total_cmp(&t)).expect("known parameter")
    }

    /// Segments of all curves grouped by polygon: `(curve, segment)`.
    pub fn by_polygon(&self) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new(); self.surface.num_polygons()];
        for (ci, c) in self.curves.iter().enumerate() {
            for (k, g) in c.segs.iter().enumerate() {
                out[g.poly].push((ci, k));
            }
        }
        out
    }

    /// Canonical text key of the arrangement (after normalization).
    pub fn key(&self) -> String {
        let mut a = self.clone();
        a.normalize();
        let params = a.edge_params();
        let s = &*a.surface;
        let mut out = String::new();
        for c in &a.curves {
            let mut toks: Vec<String> = c
                .segs
                .iter()
                .map(|g| {
                    let f = |p: Port| match p {
                        Port::Side { side, t } => {
                            format!("s{}:{}", side, Self::slot_of(&params, s.polygons()[g.poly][side].edge, t))
                        }
                        Port::Corner(k) => format!("c{k}"),
                    };
                    format!("{}|{}|{}", g.poly, f(g.from), f(g.to))
                })
                .collect();
            if c.closed {
                // rotate to the least segment so the starting point is irrelevant
                let m = toks.len();
                let best = (0..m).min_by(|&a, &b| toks[a..].iter().chain(&toks[..a]).cmp(toks[b..].iter().chain(&toks[..b]))).unwrap_or(0);
                toks.rotate_left(best);
            }
            out.push_str(&format!("{}{}[{}];", c.tag.name(), if c.closed { "o" } else { "-" }, toks.join(",")));
        }
        out
    }
}

fn ends_on_sides(c: &Curve) -> usize {
    let m = c.segs.len();
    usize::from(matches!(c.segs[0].from, Port::Side { .. })) + usize::from(matches!(c.segs[m - 1].to, Port::Side { .. }))
}

/// Total order on f64 used for stable sorting of parameters.
pub fn fcmp(a: f64, b: f64) -> Ordering {
    a.total_cmp(&b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn klein() -> SurfaceComplex {
        SurfaceComplex::from_words(&[vec!["a", "b", "a", "-b"]]).unwrap()
    }

    #[test]
    fn chord_crossing_rule() {
        assert!(chords_cross(0.5, 2.5, 1.5, 3.5, 4.0));
        assert!(!chords_cross(0.5, 1.5, 2.5, 3.5, 4.0));
        assert!(!chords_cross(1.0, 3.0, 1.0, 2.5, 4.0)); // shared corner
        assert!(chords_cross(3.5, 0.5, 0.2, 1.5, 4.0)); // wraps
    }

    #[test]
    fn klein_curves_sidedness() {
        let k = klein();
        let c = Curve::closed_from_crossings(&k, Tag::Alpha, &[(1, true, 0.5)]);
        assert!(c.is_two_sided(&k).unwrap());
        let d = Curve::closed_from_crossings(&k, Tag::Alpha, &[(0, true, 0.5)]);
        assert!(!d.is_two_sided(&k).unwrap());
        let mut a = Arrangement::new(k);
        a.curves.push(c);
        a.curves.push(d);
        a.check_structure().unwrap();
        assert_eq!(a.crossings(0, 1), 1);
    }

    #[test]
    fn parallel_copies_disjoint_and_normalize() {
        let k = klein();
        let mut a = Arrangement::new(k.clone());
        for t in [0.2, 0.7, 0.9] {
            a.curves.push(Curve::closed_from_crossings(&k, Tag::Alpha, &[(1, true, t)]));
        }
        a.check_structure().unwrap();
        a.check_families().unwrap();
        a.normalize();
        let ts = a.edge_params();
        assert_eq!(ts[1], vec![0.25, 0.5, 0.75]);
    }

    #[test]
    fn shared_point_rejected() {
        let k = klein();
        let mut a = Arrangement::new(k.clone());
        a.curves.push(Curve::closed_from_crossings(&k, Tag::Alpha, &[(1, true, 0.5)]));
        a.curves.push(Curve::closed_from_crossings(&k, Tag::Beta, &[(1, true, 0.5)]));
        assert!(matches!(a.check_structure(), Err(CurveError::SharedPoint(0, 1))));
    }
}
