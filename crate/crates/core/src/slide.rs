//! Handle slides: band sums of a curve (or arc) with a parallel copy of
//! another curve of its family, along a band disjoint from the family.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrangement::{chords_cross, crossing_occs, Arrangement, Curve, CurveError, Port, Segment, Tag};
use crate::isotopy;
use crate::surface::{EdgeId, Occ};

const NUDGE: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SlideError {
    #[error("cannot slide a closed curve over itself")]
    SameCurve,
    #[error("slides go over closed curves only")]
    OverArc,
    #[error("band does not match the arrangement: {0}")]
    BadBand(&'static str),
    #[error("curve to slide over is one-sided")]
    OneSided,
    #[error("band sum is not simple or meets the family")]
    NotEmbedded,
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// One edge crossing of a band: it crosses `edge` (from occurrence 0 to 1
/// when `forward`) between the `gap-1`-th and `gap`-th obstacle points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BandStep {
    pub edge: EdgeId,
    pub forward: bool,
    pub gap: usize,
}

/// A band from segment `from_seg` of the sliding curve to segment `to_seg`
/// of the curve slid over. `*_plus` picks the side of the chord: the side
/// containing the polygon boundary running forward from the chord's start
/// to its end.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Band {
    pub from_seg: usize,
    pub from_plus: bool,
    pub to_seg: usize,
    pub to_plus: bool,
    pub path: Vec<BandStep>,
}

/// Faces of the polygons cut by the chords of the obstacle curves.
pub struct Regions {
    pub faces: usize,
    /// (curve, segment, plus side) → face
    pub chord_face: BTreeMap<(usize, usize, bool), usize>,
    /// (occurrence, gap) → face
    pub gap_face: BTreeMap<(Occ, usize), usize>,
}

/// Sorted parameters of obstacle points on each edge.
pub fn obstacle_params(arr: &Arrangement, obstacles: &[Tag]) -> Vec<Vec<f64>> {
    let s = &*arr.surface;
    let mut ts: Vec<Vec<f64>> = vec![Vec::new(); s.num_edges()];
    for c in arr.curves.iter().filter(|c| obstacles.contains(&c.tag)) {
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

pub fn regions(arr: &Arrangement, obstacles: &[Tag]) -> Regions {
    let s = &*arr.surface;
    let obs = obstacle_params(arr, obstacles);
    let mut chord_face = BTreeMap::new();
    let mut gap_face = BTreeMap::new();
    let mut faces = 0;
    let by_poly = arr.by_polygon();
    for p in 0..s.num_polygons() {
        let n = s.poly_len(p);
        let chords: Vec<(usize, usize, f64, f64)> = by_poly[p]
            .iter()
            .filter(|(c, _)| obstacles.contains(&arr.curves[*c].tag))
            .map(|&(c, k)| {
                let g = arr.curves[c].segs[k];
                (c, k, arr.pos(p, g.from), arr.pos(p, g.to))
            })
            .collect();
        let mut pos: Vec<f64> = (0..n).map(|i| i as f64).collect();
        for ch in &chords {
            pos.push(ch.2);
            pos.push(ch.3);
        }
        pos.sort_by(|a, b| a.total_cmp(b));
        pos.dedup();
        let l = pos.len();
        let node = |q: f64| pos.binary_search_by(|x| x.total_cmp(&q)).unwrap();
        let mut at: Vec<Vec<(usize, usize)>> = vec![Vec::new(); l];
        for (ci, ch) in chords.iter().enumerate() {
            let (a, b) = (node(ch.2), node(ch.3));
            at[a].push((ci, b));
            at[b].push((ci, a));
        }
        let dist = |x: usize, z: usize| (z + l - x) % l;
        let mut arc_face = vec![usize::MAX; l];
        let mut chord_used: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut starts: Vec<(Option<(usize, usize, usize)>, usize)> = (0..l).map(|k| (None, k)).collect();
        for (ci, ch) in chords.iter().enumerate() {
            let (a, b) = (node(ch.2), node(ch.3));
            starts.push((Some((ci, a, b)), 0));
            starts.push((Some((ci, b, a)), 0));
        }
        for (st, k0) in starts {
            let fresh = match st {
                None => arc_face[k0] == usize::MAX,
                Some((ci, a, _)) => !chord_used.contains_key(&(ci, a)),
            };
            if !fresh {
                continue;
            }
            let face = faces;
            faces += 1;
            let mut cur = st.ok_or(k0);
            let start = cur;
            let mut guard = 0;
            loop {
                let (x, d_in) = match cur {
                    Err(k) => {
                        arc_face[k] = face;
                        ((k + 1) % l, l)
                    }
                    Ok((ci, a, b)) => {
                        chord_used.insert((ci, a), face);
                        (b, dist(b, a))
                    }
                };
                let next = at[x]
                    .iter()
                    .filter(|(_, z)| dist(x, *z) < d_in && dist(x, *z) > 0)
                    .max_by_key(|(ch, z)| (dist(x, *z), *ch))
                    .map(|&(ch, z)| Ok((ch, x, z)))
                    .unwrap_or(Err(x));
                let same = match (next, start) {
                    (Err(a), Err(b)) => a == b,
                    (Ok((c1, a1, _)), Ok((c2, a2, _))) => c1 == c2 && a1 == a2,
                    _ => false,
                };
                if same {
                    break;
                }
                cur = next;
                guard += 1;
                assert!(guard < 4 * l + 8, "region walk failed to close");
            }
        }
        for (ci, ch) in chords.iter().enumerate() {
            let (a, b) = (node(ch.2), node(ch.3));
            // traversal to→from bounds the plus side
            chord_face.insert((ch.0, ch.1, true), chord_used[&(ci, b)]);
            chord_face.insert((ch.0, ch.1, false), chord_used[&(ci, a)]);
        }
        for k in 0..l {
            let (a, b) = (pos[k], if k + 1 == l { n as f64 } else { pos[k + 1] });
            let mid = 0.5 * (a + b);
            let side = mid.floor() as usize;
            let sd = s.polygons()[p][side];
            let frac = mid - side as f64;
            let t = if sd.reversed { 1.0 - frac } else { frac };
            let gap = obs[sd.edge].iter().filter(|&&x| x < t).count();
            gap_face.insert((Occ { poly: p, side }, gap), arc_face[k]);
        }
    }
    Regions { faces, chord_face, gap_face }
}

impl Regions {
    /// Breadth-first parents from `start` across interior-edge gaps.
    pub(crate) fn bfs(&self, arr: &Arrangement, start: usize) -> Vec<Option<(usize, BandStep)>> {
        self.bfs_avoiding(arr, start, None)
    }

    /// Breadth-first tree of faces from `start`, never crossing the gap
    /// `avoid = (edge, gap)`.
    pub(crate) fn bfs_avoiding(&self, arr: &Arrangement, start: usize, avoid: Option<(EdgeId, usize)>) -> Vec<Option<(usize, BandStep)>> {
        let s = &*arr.surface;
        let mut adj: Vec<Vec<(usize, BandStep)>> = vec![Vec::new(); self.faces];
        for (&(o, gap), &f) in &self.gap_face {
            if let Some(m) = s.mate(o) {
                if let Some(&g) = self.gap_face.get(&(m, gap)) {
                    let e = s.side(o).edge;
                    if avoid == Some((e, gap)) {
                        continue;
                    }
                    adj[f].push((g, BandStep { edge: e, forward: s.occ_index(o) == 0, gap }));
                }
            }
        }
        let mut parent: Vec<Option<(usize, BandStep)>> = vec![None; self.faces];
        let mut seen = vec![false; self.faces];
        seen[start] = true;
        let mut q = VecDeque::from([start]);
        while let Some(f) = q.pop_front() {
            for &(g, step) in &adj[f] {
                if !seen[g] {
                    seen[g] = true;
                    parent[g] = Some((f, step));
                    q.push_back(g);
                }
            }
        }
        parent
    }
}

/// Candidate bands for sliding curve `i` over curve `j`: one shortest band
/// for each pair of faces adjacent to `i` and to `j`.
pub fn candidate_bands(arr: &Arrangement, i: usize, j: usize, obstacles: &[Tag]) -> Vec<Band> {
    if i == j || !arr.curves[j].closed {
        return Vec::new();
    }
    let reg = regions(arr, obstacles);
    let firsts = |c: usize| -> Vec<(usize, usize, bool)> {
        let mut seen = BTreeMap::new();
        for k in 0..arr.curves[c].segs.len() {
            for plus in [true, false] {
                if let Some(&f) = reg.chord_face.get(&(c, k, plus)) {
                    seen.entry(f).or_insert((k, plus));
                }
            }
        }
        seen.into_iter().map(|(f, (k, p))| (f, k, p)).collect()
    };
    let (si, sj) = (firsts(i), firsts(j));
    let mut out = Vec::new();
    for &(f0, k0, p0) in &si {
        let parent = reg.bfs(arr, f0);
        for &(ft, kt, pt) in &sj {
            if ft != f0 && parent[ft].is_none() {
                continue;
            }
            let mut path = Vec::new();
            let mut f = ft;
            while f != f0 {
                let (pf, step) = parent[f].unwrap();
                path.push(step);
                f = pf;
            }
            path.reverse();
            out.push(Band { from_seg: k0, from_plus: p0, to_seg: kt, to_plus: pt, path });
        }
    }
    out
}

fn nudge(arr: &Arrangement, poly: usize, port: Port, dir: f64) -> Result<Port, SlideError> {
    match port {
        Port::Corner(_) => Err(SlideError::BadBand("pushoff through a corner")),
        Port::Side { side, t } => {
            let rev = arr.surface.polygons()[poly][side].reversed;
            let dt = if rev { -dir } else { dir } * NUDGE;
            Ok(Port::Side { side, t: t + dt })
        }
    }
}

/// A parallel copy of closed curve `j`, displaced to the given side of segment `k0`.
pub fn pushoff(arr: &Arrangement, j: usize, k0: usize, plus: bool) -> Result<Vec<Segment>, SlideError> {
    let c = &arr.curves[j];
    if !c.closed {
        return Err(SlideError::OverArc);
    }
    push_segments(arr, &c.segs, true, k0, plus)
}

/// A parallel copy of arc `j` (endpoints move along their boundary edges),
/// displaced to the given side of its first segment.
pub fn pushoff_arc(arr: &Arrangement, j: usize, plus: bool) -> Result<Curve, SlideError> {
    let c = &arr.curves[j];
    let segs = push_segments(arr, &c.segs, false, 0, plus)?;
    Ok(Curve { tag: c.tag, closed: false, segs })
}

fn push_segments(arr: &Arrangement, segs: &[Segment], closed: bool, k0: usize, plus: bool) -> Result<Vec<Segment>, SlideError> {
    let m = segs.len();
    let mut out = segs.to_vec();
    let mut dir = if plus { 1.0 } else { -1.0 };
    for step in 0..m {
        let k = (k0 + step) % m;
        let g = segs[k];
        let from = nudge(arr, g.poly, g.from, dir)?;
        let to = nudge(arr, g.poly, g.to, -dir)?;
        out[k] = Segment { poly: g.poly, from, to };
        if !closed && k + 1 == m {
            break;
        }
        let nx = segs[(k + 1) % m];
        let (Port::Side { t: t2, .. }, Port::Side { side: ns, t: nt }) = (to, nx.from) else {
            return Err(SlideError::BadBand("curve passes a corner"));
        };
        let moved = Port::Side { side: ns, t: t2 };
        dir = if arr.pos(nx.poly, moved) > arr.pos(nx.poly, Port::Side { side: ns, t: nt }) { 1.0 } else { -1.0 };
    }
    if closed {
        // the copy must come back on the side it started
        let first = out[k0].from;
        let last = out[(k0 + m - 1) % m].to;
        if first.side().map(|x| x.1) != last.side().map(|x| x.1) {
            return Err(SlideError::OneSided);
        }
    }
    Ok(out)
}

fn gap_params(obs: &[f64], gap: usize) -> Result<(f64, f64), SlideError> {
    if gap > obs.len() {
        return Err(SlideError::BadBand("gap index out of range"));
    }
    let lo = if gap == 0 { 0.0 } else { obs[gap - 1] };
    let hi = if gap == obs.len() { 1.0 } else { obs[gap] };
    Ok((lo + (hi - lo) * 0.381_966_011_250_105, lo + (hi - lo) * 0.618_033_988_749_895))
}

/// Band-sum curve `i` with a parallel copy of closed curve `j` along `band`.
/// The result replaces curve `i`; edge bigons it creates are removed.
pub fn slide(arr: &Arrangement, i: usize, j: usize, band: &Band, obstacles: &[Tag]) -> Result<Arrangement, SlideError> {
    if i == j {
        return Err(SlideError::SameCurve);
    }
    let s = arr.surface.clone();
    let (ci, cj) = (&arr.curves[i], &arr.curves[j]);
    if !cj.closed {
        return Err(SlideError::OverArc);
    }
    if band.from_seg >= ci.segs.len() || band.to_seg >= cj.segs.len() {
        return Err(SlideError::BadBand("segment index out of range"));
    }
    let obs = obstacle_params(arr, obstacles);
    let jp = pushoff(arr, j, band.to_seg, band.to_plus)?;
    let gi = ci.segs[band.from_seg];
    let (a, b) = (gi.from, gi.to);
    let p = gi.poly;
    let cross = |poly: usize, x1: Port, y1: Port, x2: Port, y2: Port| {
        let n = s.poly_len(poly) as f64;
        chords_cross(arr.pos(poly, x1), arr.pos(poly, y1), arr.pos(poly, x2), arr.pos(poly, y2), n)
    };

    let l = band.path.len();
    let mut occs = Vec::with_capacity(l);
    for st in &band.path {
        if st.edge >= s.num_edges() || !s.is_interior(st.edge) {
            return Err(SlideError::BadBand("band crosses a boundary or unknown edge"));
        }
        occs.push(crossing_occs(&s, st.edge, st.forward));
    }
    let mut poly_at = p;
    for (x, _) in &occs {
        if x.poly != poly_at {
            return Err(SlideError::BadBand("band path is not continuous"));
        }
        poly_at = occs.iter().find(|o| o.0 == *x).unwrap().1.poly;
    }
    let q = poly_at;
    if jp[band.to_seg].poly != q {
        return Err(SlideError::BadBand("band does not end at the target segment"));
    }

    // strand parameters, strand 1 leaving from `a`
    let mut s1 = Vec::with_capacity(l);
    let mut s2 = Vec::with_capacity(l);
    for (k, st) in band.path.iter().enumerate() {
        let (ta, tb) = gap_params(&obs[st.edge], st.gap)?;
        let xo = occs[k].0;
        let (pa, pb) = (Port::Side { side: xo.side, t: ta }, Port::Side { side: xo.side, t: tb });
        let (prev1, prev2, poly) = if k == 0 {
            (a, b, p)
        } else {
            let no = occs[k - 1].1;
            (Port::Side { side: no.side, t: s1[k - 1] }, Port::Side { side: no.side, t: s2[k - 1] }, no.poly)
        };
        // strand 2 runs backwards in the first polygon (towards b)
        let straight = if k == 0 { !cross(poly, prev1, pa, pb, prev2) } else { !cross(poly, prev1, pa, prev2, pb) };
        if straight {
            s1.push(ta);
            s2.push(tb);
        } else {
            s1.push(tb);
            s2.push(ta);
        }
    }
    let (in1, in2) = if l == 0 {
        (a, b)
    } else {
        let no = occs[l - 1].1;
        (Port::Side { side: no.side, t: s1[l - 1] }, Port::Side { side: no.side, t: s2[l - 1] })
    };
    let (cp, dp) = (jp[band.to_seg].from, jp[band.to_seg].to);
    let along = !cross(q, in1, dp, cp, in2); // go in1 → D′, around j′, C′ → in2
    let m = jp.len();
    let mut chain: Vec<Segment> = Vec::new();
    let (x, y) = if along { (dp, cp) } else { (cp, dp) };
    for step in 1..m {
        if along {
            chain.push(jp[(band.to_seg + step) % m]);
        } else {
            chain.push(jp[(band.to_seg + m - step) % m].reversed());
        }
    }

    let mut mid: Vec<Segment> = Vec::new();
    if l == 0 {
        mid.push(Segment { poly: p, from: a, to: x });
    } else {
        mid.push(Segment { poly: p, from: a, to: Port::Side { side: occs[0].0.side, t: s1[0] } });
        for k in 1..l {
            let (no, xo) = (occs[k - 1].1, occs[k].0);
            mid.push(Segment { poly: no.poly, from: Port::Side { side: no.side, t: s1[k - 1] }, to: Port::Side { side: xo.side, t: s1[k] } });
        }
        mid.push(Segment { poly: q, from: in1, to: x });
    }
    mid.extend(chain);
    if l == 0 {
        mid.push(Segment { poly: p, from: y, to: b });
    } else {
        mid.push(Segment { poly: q, from: y, to: in2 });
        for k in (1..l).rev() {
            let (no, xo) = (occs[k - 1].1, occs[k].0);
            mid.push(Segment { poly: no.poly, from: Port::Side { side: xo.side, t: s2[k] }, to: Port::Side { side: no.side, t: s2[k - 1] } });
        }
        mid.push(Segment { poly: p, from: Port::Side { side: occs[0].0.side, t: s2[0] }, to: b });
    }

    let k = band.from_seg;
    let segs: Vec<Segment> = if ci.closed {
        let mut v = mid;
        v.extend_from_slice(&ci.segs[k + 1..]);
        v.extend_from_slice(&ci.segs[..k]);
        v
    } else {
        let mut v = ci.segs[..k].to_vec();
        v.extend(mid);
        v.extend_from_slice(&ci.segs[k + 1..]);
        v
    };
    let mut out = arr.clone();
    out.curves[i] = Curve { tag: ci.tag, closed: ci.closed, segs };
    if out.check_structure().is_err() || out.self_crossings(i) > 0 {
        return Err(SlideError::NotEmbedded);
    }
    for o in 0..out.curves.len() {
        if o != i && obstacles.contains(&out.curves[o].tag) && out.crossings(i, o) > 0 {
            return Err(SlideError::NotEmbedded);
        }
    }
    isotopy::reduce(&mut out, i)?;
    out.normalize();
    Ok(out)
}

/// ℤ/2 chain of a closed curve: parity of crossings of each edge.
pub fn z2_chain(arr: &Arrangement, c: usize) -> Vec<u8> {
    let mut v = vec![0u8; arr.surface.num_edges()];
    for (e, _) in arr.curves[c].crossing_word(&arr.surface) {
        v[e] ^= 1;
    }
    v
}

/// Rows spanning the ℤ/2 boundaries (vertex links) of the dual complex.
pub fn z2_boundaries(arr: &Arrangement) -> Vec<Vec<u8>> {
    let s = &*arr.surface;
    let mut rows = Vec::new();
    let mut done = vec![false; s.num_vertices()];
    for p in 0..s.num_polygons() {
        for c in 0..s.poly_len(p) {
            let v = s.corner_vertex(p, c);
            if done[v] {
                continue;
            }
            done[v] = true;
            if let Some(link) = s.vertex_link(p, c) {
                let mut r = vec![0u8; s.num_edges()];
                for st in link {
                    r[s.side(st.exit).edge] ^= 1;
                }
                rows.push(r);
            }
        }
    }
    rows
}

fn rank2(rows: &[Vec<u8>]) -> usize {
    let r: Vec<Vec<i64>> = rows.iter().map(|x| x.iter().map(|&b| b as i64).collect()).collect();
    let cols = rows.first().map_or(0, Vec::len);
    crate::homology::rank_mod2(&r, cols)
}

/// Whether a ℤ/2 chain is a boundary, i.e. null in H₁(Σ; ℤ/2).
pub fn z2_is_null(arr: &Arrangement, chain: &[u8]) -> bool {
    let mut b = z2_boundaries(arr);
    let r0 = rank2(&b);
    b.push(chain.to_vec());
    rank2(&b) == r0
}

/// Dimension of the span of the given curves' classes in H₁(Σ; ℤ/2).
pub fn z2_span_rank(arr: &Arrangement, curves: &[usize]) -> usize {
    let mut b = z2_boundaries(arr);
    let r0 = rank2(&b);
    for &c in curves {
        b.push(z2_chain(arr, c));
    }
    rank2(&b) - r0
}
