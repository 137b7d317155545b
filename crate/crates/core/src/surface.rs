//! Compact surfaces as polygon-gluing complexes.
//!
//! A complex is a list of polygons, each a cyclic word of sides. A side names
//! an edge and whether the polygon traverses it against the edge direction.
//! Labels used twice are interior edges, labels used once are boundary edges.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type EdgeId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SurfaceError {
    #[error("complex has no polygons")]
    Empty,
    #[error("polygon {0} has no sides")]
    EmptyPolygon(usize),
    #[error("edge label `{label}` used {count} times (must be 1 or 2)")]
    LabelCount { label: String, count: usize },
    #[error("malformed side token `{0}`")]
    BadToken(String),
    #[error("complex is disconnected ({0} components)")]
    Disconnected(usize),
}

/// One side of a polygon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Side {
    pub edge: EdgeId,
    pub reversed: bool,
}

/// An edge occurrence: side `side` of polygon `poly`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Occ {
    pub poly: usize,
    pub side: usize,
}

/// A step of a boundary traversal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryStep {
    pub occ: Occ,
    /// Traversed in the polygon's reading direction.
    pub forward: bool,
}

/// One crossing of an interior edge by a walk around a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinkStep {
    pub exit: Occ,
    pub enter: Occ,
}

#[derive(Clone, Debug)]
pub struct SurfaceComplex {
    labels: Vec<String>,
    polygons: Vec<Vec<Side>>,
    occs: Vec<Vec<Occ>>,
    corner_vertex: Vec<Vec<usize>>,
    n_vertices: usize,
    chi: i64,
    flips: Option<Vec<bool>>,
    boundary: Vec<Vec<BoundaryStep>>,
    components: usize,
}

impl PartialEq for SurfaceComplex {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.polygons == other.polygons
    }
}
impl Eq for SurfaceComplex {}

pub(crate) struct Dsu(Vec<usize>);

impl Dsu {
    pub(crate) fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }
    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // keep the smaller root so numbering is stable
        if ra < rb {
            self.0[rb] = ra;
        } else {
            self.0[ra] = rb;
        }
        true
    }
}

/// Parse a side token: `a` or `-a`.
pub fn parse_token(tok: &str) -> Result<(String, bool), SurfaceError> {
    let (name, rev) = match tok.strip_prefix('-') {
        Some(rest) => (rest, true),
        None => (tok, false),
    };
    let ok = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '\'');
    if !ok {
        return Err(SurfaceError::BadToken(tok.to_string()));
    }
    Ok((name.to_string(), rev))
}

impl SurfaceComplex {
    /// Build from polygon words such as `["a", "b", "-a", "-b"]`.
    pub fn from_words<S: AsRef<str>>(words: &[Vec<S>]) -> Result<Self, SurfaceError> {
        let mut index: HashMap<String, EdgeId> = HashMap::new();
        let mut labels = Vec::new();
        let mut polygons = Vec::with_capacity(words.len());
        for w in words {
            let mut poly = Vec::with_capacity(w.len());
            for tok in w {
                let (name, reversed) = parse_token(tok.as_ref())?;
                let edge = *index.entry(name.clone()).or_insert_with(|| {
                    labels.push(name);
                    labels.len() - 1
                });
                poly.push(Side { edge, reversed });
            }
            polygons.push(poly);
        }
        Self::from_sides(labels, polygons)
    }

    /// Build from explicit edge ids; every id in `0..labels.len()` must occur once or twice.
    pub fn from_sides(labels: Vec<String>, polygons: Vec<Vec<Side>>) -> Result<Self, SurfaceError> {
        let s = Self::build(labels, polygons)?;
        if s.components != 1 {
            return Err(SurfaceError::Disconnected(s.components));
        }
        Ok(s)
    }

    /// Like [`from_sides`](Self::from_sides) but allows several components.
    pub(crate) fn build(labels: Vec<String>, polygons: Vec<Vec<Side>>) -> Result<Self, SurfaceError> {
        if polygons.is_empty() {
            return Err(SurfaceError::Empty);
        }
        let mut occs = vec![Vec::new(); labels.len()];
        for (p, poly) in polygons.iter().enumerate() {
            if poly.is_empty() {
                return Err(SurfaceError::EmptyPolygon(p));
            }
            for (i, s) in poly.iter().enumerate() {
                occs[s.edge].push(Occ { poly: p, side: i });
            }
        }
        for (e, o) in occs.iter().enumerate() {
            if o.is_empty() || o.len() > 2 {
                return Err(SurfaceError::LabelCount { label: labels[e].clone(), count: o.len() });
            }
        }

        // vertices: corners and edge endpoints (tail = 2e, head = 2e+1)
        let mut corner_base = Vec::with_capacity(polygons.len());
        let mut nc = 0;
        for poly in &polygons {
            corner_base.push(nc);
            nc += poly.len();
        }
        let ne = labels.len();
        let mut dsu = Dsu::new(2 * ne + nc);
        for (p, poly) in polygons.iter().enumerate() {
            let n = poly.len();
            for (i, s) in poly.iter().enumerate() {
                let (start, end) = endpoints(*s);
                dsu.union(2 * ne + corner_base[p] + i, start);
                dsu.union(2 * ne + corner_base[p] + (i + 1) % n, end);
            }
        }
        let mut vid = HashMap::new();
        let mut corner_vertex = Vec::with_capacity(polygons.len());
        for (p, poly) in polygons.iter().enumerate() {
            let mut cv = Vec::with_capacity(poly.len());
            for i in 0..poly.len() {
                let r = dsu.find(2 * ne + corner_base[p] + i);
                let next = vid.len();
                cv.push(*vid.entry(r).or_insert(next));
            }
            corner_vertex.push(cv);
        }
        let n_vertices = vid.len();
        let chi = n_vertices as i64 - ne as i64 + polygons.len() as i64;

        // components and orientation
        let mut comp = Dsu::new(polygons.len());
        for o in &occs {
            if o.len() == 2 {
                comp.union(o[0].poly, o[1].poly);
            }
        }
        let components = (0..polygons.len()).filter(|&p| comp.find(p) == p).count();

        let mut s = SurfaceComplex {
            labels,
            polygons,
            occs,
            corner_vertex,
            n_vertices,
            chi,
            flips: None,
            boundary: Vec::new(),
            components,
        };
        s.flips = s.orient();
        s.boundary = s.trace_boundary();
        Ok(s)
    }

    fn orient(&self) -> Option<Vec<bool>> {
        let np = self.polygons.len();
        let mut flip: Vec<Option<bool>> = vec![None; np];
        for root in 0..np {
            if flip[root].is_some() {
                continue;
            }
            flip[root] = Some(false);
            let mut stack = vec![root];
            while let Some(p) = stack.pop() {
                let fp = flip[p].unwrap();
                for (i, s) in self.polygons[p].iter().enumerate() {
                    let Some(m) = self.mate(Occ { poly: p, side: i }) else { continue };
                    let rm = self.side(m).reversed;
                    // consistent iff the two readings run opposite ways
                    let want = !(s.reversed ^ fp) ^ rm;
                    match flip[m.poly] {
                        None => {
                            flip[m.poly] = Some(want);
                            stack.push(m.poly);
                        }
                        Some(f) if f != want => return None,
                        _ => {}
                    }
                }
            }
        }
        Some(flip.into_iter().map(|f| f.unwrap()).collect())
    }

    fn trace_boundary(&self) -> Vec<Vec<BoundaryStep>> {
        let mut seen: Vec<bool> = vec![false; self.labels.len()];
        let mut circles = Vec::new();
        for e in 0..self.labels.len() {
            if self.occs[e].len() != 1 || seen[e] {
                continue;
            }
            let mut circle = Vec::new();
            let mut step = BoundaryStep { occ: self.occs[e][0], forward: true };
            loop {
                let e2 = self.side(step.occ).edge;
                if seen[e2] {
                    break;
                }
                seen[e2] = true;
                circle.push(step);
                step = self.next_boundary_step(step);
            }
            circles.push(circle);
        }
        circles
    }

    /// Walk around the vertex at the end of `step` to the next boundary side.
    fn next_boundary_step(&self, step: BoundaryStep) -> BoundaryStep {
        let n = self.polygons[step.occ.poly].len();
        let (mut occ, mut at_start) = if step.forward {
            (Occ { poly: step.occ.poly, side: (step.occ.side + 1) % n }, true)
        } else {
            (Occ { poly: step.occ.poly, side: (step.occ.side + n - 1) % n }, false)
        };
        loop {
            match self.cross_at_vertex(occ, at_start) {
                None => return BoundaryStep { occ, forward: at_start },
                Some((o, a)) => {
                    occ = o;
                    at_start = a;
                }
            }
        }
    }

    /// Leave the current corner through `occ` (the corner being the start of
    /// the side if `at_start`), and return the next side to leave through on
    /// the far side. `None` if `occ` is a boundary side.
    pub fn cross_at_vertex(&self, occ: Occ, at_start: bool) -> Option<(Occ, bool)> {
        let m = self.mate(occ)?;
        let (s0, e0) = endpoints(self.side(occ));
        let x = if at_start { s0 } else { e0 };
        let (sm, _) = endpoints(self.side(m));
        let n = self.polygons[m.poly].len();
        if x == sm {
            Some((Occ { poly: m.poly, side: (m.side + n - 1) % n }, false))
        } else {
            Some((Occ { poly: m.poly, side: (m.side + 1) % n }, true))
        }
    }

    /// The cyclic walk around the vertex at `corner` of `poly`: the interior
    /// edge crossings met, or `None` if the vertex lies on the boundary.
    pub fn vertex_link(&self, poly: usize, corner: usize) -> Option<Vec<LinkStep>> {
        let start = (Occ { poly, side: corner }, true);
        let mut cur = start;
        let mut steps = Vec::new();
        loop {
            let m = self.mate(cur.0)?;
            steps.push(LinkStep { exit: cur.0, enter: m });
            cur = self.cross_at_vertex(cur.0, cur.1)?;
            if cur == start {
                return Some(steps);
            }
            if steps.len() > 4 * self.num_sides() + 4 {
                unreachable!("vertex walk failed to close");
            }
        }
    }

    /// Every corner `(poly, corner)` belonging to vertex `v`.
    pub fn vertex_corners(&self, v: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (p, cv) in self.corner_vertex.iter().enumerate() {
            for (c, &w) in cv.iter().enumerate() {
                if w == v {
                    out.push((p, c));
                }
            }
        }
        out
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
    pub fn label(&self, e: EdgeId) -> &str {
        &self.labels[e]
    }
    pub fn edge_by_label(&self, label: &str) -> Option<EdgeId> {
        self.labels.iter().position(|l| l == label)
    }
    pub fn polygons(&self) -> &[Vec<Side>] {
        &self.polygons
    }
    pub fn num_polygons(&self) -> usize {
        self.polygons.len()
    }
    pub fn num_edges(&self) -> usize {
        self.labels.len()
    }
    pub fn num_vertices(&self) -> usize {
        self.n_vertices
    }
    pub fn num_sides(&self) -> usize {
        self.polygons.iter().map(Vec::len).sum()
    }
    pub fn poly_len(&self, p: usize) -> usize {
        self.polygons[p].len()
    }
    pub fn side(&self, o: Occ) -> Side {
        self.polygons[o.poly][o.side]
    }
    pub fn occurrences(&self, e: EdgeId) -> &[Occ] {
        &self.occs[e]
    }
    pub fn is_interior(&self, e: EdgeId) -> bool {
        self.occs[e].len() == 2
    }
    pub fn mate(&self, o: Occ) -> Option<Occ> {
        let occ = &self.occs[self.side(o).edge];
        if occ.len() != 2 {
            return None;
        }
        Some(if occ[0] == o { occ[1] } else { occ[0] })
    }
    /// Index (0 or 1) of `o` among the occurrences of its edge.
    pub fn occ_index(&self, o: Occ) -> usize {
        usize::from(self.occs[self.side(o).edge][0] != o)
    }
    /// A gluing reverses orientation when both occurrences read the edge the same way.
    pub fn is_reversing(&self, e: EdgeId) -> bool {
        let o = &self.occs[e];
        o.len() == 2 && self.side(o[0]).reversed == self.side(o[1]).reversed
    }
    pub fn corner_vertex(&self, poly: usize, corner: usize) -> usize {
        self.corner_vertex[poly][corner]
    }
    pub fn euler_characteristic(&self) -> i64 {
        self.chi
    }
    pub fn is_orientable(&self) -> bool {
        self.flips.is_some()
    }
    /// Polygon orientation flips of a consistent orientation, if any.
    pub fn orientation(&self) -> Option<&[bool]> {
        self.flips.as_deref()
    }
    pub fn boundary_circles(&self) -> &[Vec<BoundaryStep>] {
        &self.boundary
    }
    pub fn boundary_count(&self) -> usize {
        self.boundary.len()
    }
    pub fn is_closed(&self) -> bool {
        self.boundary.is_empty()
    }
    pub fn components(&self) -> usize {
        self.components
    }
    /// `(2 − χ − #∂)/2`; `None` when that is not a non-negative integer.
    pub fn genus(&self) -> Option<usize> {
        let twice = 2 - self.chi - self.boundary.len() as i64;
        (twice >= 0 && twice % 2 == 0).then_some((twice / 2) as usize)
    }
    /// Which boundary circle contains boundary edge `e`.
    pub fn boundary_circle_of(&self, e: EdgeId) -> Option<usize> {
        self.boundary
            .iter()
            .position(|c| c.iter().any(|s| self.side(s.occ).edge == e))
    }

    /// Polygon words with `-` marking reversed sides.
    pub fn to_words(&self) -> Vec<Vec<String>> {
        self.polygons
            .iter()
            .map(|p| {
                p.iter()
                    .map(|s| {
                        if s.reversed {
                            format!("-{}", self.labels[s.edge])
                        } else {
                            self.labels[s.edge].clone()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Parity of orientation-reversing gluings crossed by a loop word.
    pub fn w1(&self, word: &LoopWord) -> Result<bool, LoopError> {
        word.check(self)?;
        Ok(word
            .exits
            .iter()
            .filter(|o| self.is_reversing(self.side(**o).edge))
            .count()
            % 2
            == 1)
    }

    /// The orientation double cover. Polygon `p` lifts to `2p` (same word)
    /// and `2p + 1` (mirrored word); base edge `e` lifts to `2e` and `2e + 1`.
    pub fn orientation_double_cover(&self) -> DoubleCover {
        let mut labels = Vec::with_capacity(2 * self.labels.len());
        for l in &self.labels {
            labels.push(format!("{l}.0"));
            labels.push(format!("{l}.1"));
        }
        let mut polygons = Vec::with_capacity(2 * self.polygons.len());
        for (p, poly) in self.polygons.iter().enumerate() {
            let n = poly.len();
            for sheet in 0..2usize {
                let mut w = Vec::with_capacity(n);
                for j in 0..n {
                    let i = if sheet == 0 { j } else { n - 1 - j };
                    let o = Occ { poly: p, side: i };
                    let s = poly[i];
                    let lift = self.lift_edge(o, sheet);
                    w.push(Side { edge: lift, reversed: s.reversed ^ (sheet == 1) });
                }
                polygons.push(w);
            }
        }
        let cover = Self::build(labels, polygons).expect("cover of a valid complex is valid");
        DoubleCover { trivial: self.is_orientable(), cover }
    }

    /// Which lift of the edge at `o` bounds sheet `sheet` of `o.poly`.
    pub(crate) fn lift_edge(&self, o: Occ, sheet: usize) -> EdgeId {
        let e = self.side(o).edge;
        // occurrence 0 in sheet s uses lift s; occurrence 1 uses the lift
        // that its partner sheet was assigned
        if self.occ_index(o) == 0 || !self.is_interior(e) {
            2 * e + sheet
        } else {
            let s = if self.is_reversing(e) { sheet ^ 1 } else { sheet };
            2 * e + s
        }
    }
}

/// (start endpoint, end endpoint) of a side as edge-endpoint nodes.
fn endpoints(s: Side) -> (usize, usize) {
    let (t, h) = (2 * s.edge, 2 * s.edge + 1);
    if s.reversed {
        (h, t)
    } else {
        (t, h)
    }
}

#[derive(Clone, Debug)]
pub struct DoubleCover {
    pub cover: SurfaceComplex,
    /// The base was already orientable, so the cover is two disjoint copies.
    pub trivial: bool,
}

impl DoubleCover {
    pub fn deck_polygon(p: usize) -> usize {
        p ^ 1
    }
    pub fn project_polygon(p: usize) -> (usize, usize) {
        (p / 2, p % 2)
    }
    pub fn deck_edge(e: EdgeId) -> EdgeId {
        e ^ 1
    }
    pub fn project_edge(e: EdgeId) -> EdgeId {
        e / 2
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LoopError {
    #[error("loop word is empty")]
    Empty,
    #[error("step {0} crosses a boundary edge")]
    Boundary(usize),
    #[error("step {0} does not continue from the polygon entered before it")]
    NotIncident(usize),
}

/// A closed walk recorded by the edge occurrences it leaves through; each
/// crossing enters the mate occurrence, and the next exit must lie in the
/// polygon entered.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopWord {
    pub exits: Vec<Occ>,
}

impl LoopWord {
    pub fn check(&self, s: &SurfaceComplex) -> Result<(), LoopError> {
        if self.exits.is_empty() {
            return Err(LoopError::Empty);
        }
        let n = self.exits.len();
        for i in 0..n {
            let m = s.mate(self.exits[i]).ok_or(LoopError::Boundary(i))?;
            if m.poly != self.exits[(i + 1) % n].poly {
                return Err(LoopError::NotIncident((i + 1) % n));
            }
        }
        Ok(())
    }

    /// Concatenate two loops based in the same polygon.
    pub fn concat(&self, other: &LoopWord) -> LoopWord {
        let mut exits = self.exits.clone();
        exits.extend_from_slice(&other.exits);
        LoopWord { exits }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(words: &[&[&str]]) -> SurfaceComplex {
        let v: Vec<Vec<&str>> = words.iter().map(|x| x.to_vec()).collect();
        SurfaceComplex::from_words(&v).unwrap()
    }

    #[test]
    fn torus() {
        let s = w(&[&["a", "b", "-a", "-b"]]);
        assert_eq!(s.euler_characteristic(), 0);
        assert!(s.is_orientable());
        assert_eq!(s.genus(), Some(1));
        assert_eq!(s.num_vertices(), 1);
    }

    #[test]
    fn projective_plane_and_sphere() {
        let rp2 = w(&[&["a", "a"]]);
        assert_eq!(rp2.euler_characteristic(), 1);
        assert!(!rp2.is_orientable());
        assert_eq!(rp2.genus(), None);
        let s2 = w(&[&["a", "-a"]]);
        assert_eq!(s2.euler_characteristic(), 2);
        assert!(s2.is_orientable());
        assert_eq!(s2.genus(), Some(0));
    }

    #[test]
    fn klein_bottle() {
        let k = w(&[&["a", "b", "a", "-b"]]);
        assert_eq!(k.euler_characteristic(), 0);
        assert!(!k.is_orientable());
        assert_eq!(k.genus(), Some(1));
        assert!(k.is_reversing(0));
        assert!(!k.is_reversing(1));
    }

    #[test]
    fn mobius_band() {
        let m = w(&[&["a", "b", "a", "c"]]);
        assert_eq!(m.euler_characteristic(), 0);
        assert!(!m.is_orientable());
        assert_eq!(m.boundary_count(), 1);
        assert_eq!(m.boundary_circles()[0].len(), 2);
    }

    #[test]
    fn annulus_has_two_boundary_circles() {
        let a = w(&[&["a", "b", "-a", "c"]]);
        assert_eq!(a.euler_characteristic(), 0);
        assert!(a.is_orientable());
        assert_eq!(a.boundary_count(), 2);
        assert_eq!(a.genus(), Some(0));
    }

    #[test]
    fn bad_inputs() {
        let v = vec![vec!["a", "a", "a"]];
        assert!(matches!(SurfaceComplex::from_words(&v), Err(SurfaceError::LabelCount { .. })));
        let v = vec![vec!["a", "-a"], vec!["b", "-b"]];
        assert_eq!(SurfaceComplex::from_words(&v).unwrap_err(), SurfaceError::Disconnected(2));
        assert!(SurfaceComplex::from_words(&[vec!["-"]]).is_err());
    }

    #[test]
    fn double_covers() {
        for (word, chi) in [(vec!["a", "b", "a", "-b"], 0), (vec!["a", "a"], 2), (vec!["a", "a", "b", "b", "c", "c"], -2)] {
            let s = SurfaceComplex::from_words(&[word]).unwrap();
            let c = s.orientation_double_cover();
            assert!(!c.trivial);
            assert_eq!(c.cover.components(), 1);
            assert!(c.cover.is_orientable());
            assert_eq!(c.cover.euler_characteristic(), chi);
        }
        let t = w(&[&["a", "b", "-a", "-b"]]);
        let c = t.orientation_double_cover();
        assert!(c.trivial);
        assert_eq!(c.cover.components(), 2);
    }

    #[test]
    fn w1_on_klein_bottle() {
        let k = w(&[&["a", "b", "a", "-b"]]);
        // crossing b once: side 1 -> side 3
        let two_sided = LoopWord { exits: vec![Occ { poly: 0, side: 1 }] };
        assert!(!k.w1(&two_sided).unwrap());
        let one_sided = LoopWord { exits: vec![Occ { poly: 0, side: 0 }] };
        assert!(k.w1(&one_sided).unwrap());
        assert!(!k.w1(&one_sided.concat(&one_sided)).unwrap());
    }

    #[test]
    fn vertex_link_of_torus_vertex() {
        let s = w(&[&["a", "b", "-a", "-b"]]);
        let link = s.vertex_link(0, 0).unwrap();
        assert_eq!(link.len(), 4);
    }
}
