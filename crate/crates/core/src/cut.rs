//! Refining a complex along disjoint curves: gluing them in as edges, cutting
//! along them, or compressing (cutting and capping with disks).

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::arrangement::{chords_cross, Arrangement, Curve, Port, Segment};
use crate::surface::{Dsu, EdgeId, Occ, Side, SurfaceComplex, SurfaceError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CutError {
    #[error("curves {0} and {1} of the cut family cross")]
    NotDisjoint(usize, usize),
    #[error("curve {0} is one-sided")]
    OneSided(usize),
    #[error("curve {0} could not be carried through the cut (it crosses the cut family)")]
    Transport(usize),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Keep the surface; the curves become edges.
    Glue,
    /// Unglue along the curves.
    Cut,
    /// Cut, then cap every boundary circle coming from a closed curve.
    Compress,
}

/// An edge of the refined complex that comes from a chord of a cut curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChordEdge {
    pub curve: usize,
    pub seg: usize,
    /// 0: the face reading the edge forward runs along the segment; 1: against.
    pub side: u8,
}

#[derive(Clone, Debug)]
pub struct Refined {
    /// May be disconnected when cutting.
    pub surface: SurfaceComplex,
    pub chord_edges: HashMap<EdgeId, ChordEdge>,
    /// `(curve, cap polygon)` for each disk added by compression.
    pub caps: Vec<(usize, usize)>,
    /// The carried curves, in the order requested.
    pub carried: Vec<Curve>,
    /// Polygon of the refined complex → original polygon (caps map to `None`).
    pub origin: Vec<Option<usize>>,
}

#[derive(Clone, Copy, Debug)]
enum Elem {
    Arc(usize),
    Chord { chord: usize, from: usize, to: usize },
}

/// Refine `arr.surface` along the curves `cut`, carrying the curves `carry`
/// (which must not cross the cut curves) into the new complex.
pub fn refine(arr: &Arrangement, cut: &[usize], mode: Mode, carry: &[usize]) -> Result<Refined, CutError> {
    let s = &*arr.surface;
    if mode != Mode::Glue {
        for &c in cut {
            if arr.curves[c].closed && arr.curves[c].w1(s) {
                return Err(CutError::OneSided(c));
            }
        }
    }
    // chords of the cut family, per polygon
    let mut chords: Vec<(usize, usize, Segment)> = Vec::new();
    for &c in cut {
        for (k, g) in arr.curves[c].segs.iter().enumerate() {
            chords.push((c, k, *g));
        }
    }
    for i in 0..chords.len() {
        for j in i + 1..chords.len() {
            let (a, b) = (chords[i].2, chords[j].2);
            if a.poly == b.poly {
                let n = s.poly_len(a.poly) as f64;
                if chords_cross(arr.pos(a.poly, a.from), arr.pos(a.poly, a.to), arr.pos(b.poly, b.from), arr.pos(b.poly, b.to), n) {
                    return Err(CutError::NotDisjoint(chords[i].0, chords[j].0));
                }
            }
        }
    }

    // cut parameters per edge and sub-edge ids
    let mut cut_ts: Vec<Vec<f64>> = vec![Vec::new(); s.num_edges()];
    for &c in cut {
        for (e, t) in arr.curves[c].edge_points(s) {
            cut_ts[e].push(t);
        }
    }
    for v in &mut cut_ts {
        v.sort_by(|a, b| a.total_cmp(b));
        v.dedup();
    }
    let mut labels: Vec<String> = Vec::new();
    let mut sub_base = Vec::with_capacity(s.num_edges());
    for e in 0..s.num_edges() {
        sub_base.push(labels.len());
        let m = cut_ts[e].len();
        if m == 0 {
            labels.push(s.label(e).to_string());
        } else {
            for j in 0..=m {
                labels.push(format!("{}.{}", s.label(e), j));
            }
        }
    }
    let chord_base = labels.len();
    let per_chord = if mode == Mode::Glue { 1 } else { 2 };
    let mut chord_edges = HashMap::new();
    for (ci, &(c, k, _)) in chords.iter().enumerate() {
        for side in 0..per_chord {
            let id = chord_base + per_chord * ci + side;
            labels.push(format!("{}{}.{}{}", arr.curves[c].tag.name(), c, k, if side == 1 { "'" } else { "" }));
            chord_edges.insert(id, ChordEdge { curve: c, seg: k, side: side as u8 });
        }
    }
    uniquify(&mut labels);

    let mut chords_in: Vec<Vec<usize>> = vec![Vec::new(); s.num_polygons()];
    for (ci, ch) in chords.iter().enumerate() {
        chords_in[ch.2.poly].push(ci);
    }

    let mut polygons: Vec<Vec<Side>> = Vec::new();
    let mut origin: Vec<Option<usize>> = Vec::new();
    // per original polygon: node positions, arc → (face, index), node → [(face, index)]
    let mut locate: Vec<PolyLocate> = Vec::with_capacity(s.num_polygons());
    for p in 0..s.num_polygons() {
        let word = &s.polygons()[p];
        let mut pos: Vec<f64> = Vec::new();
        let mut arcs: Vec<(Side, f64, f64)> = Vec::new(); // sub-edge side and its t-range
        for (i, side) in word.iter().enumerate() {
            pos.push(i as f64);
            let ts = &cut_ts[side.edge];
            let m = ts.len();
            let bounds = |j: usize| -> (f64, f64) {
                (if j == 0 { 0.0 } else { ts[j - 1] }, if j == m { 1.0 } else { ts[j] })
            };
            let order: Vec<usize> = if side.reversed { (0..=m).rev().collect() } else { (0..=m).collect() };
            for (idx, &j) in order.iter().enumerate() {
                let (lo, hi) = bounds(j);
                arcs.push((Side { edge: sub_base[side.edge] + j, reversed: side.reversed }, lo, hi));
                if idx < m {
                    let t = if side.reversed { ts[j - 1] } else { ts[j] };
                    pos.push(i as f64 + if side.reversed { 1.0 - t } else { t });
                }
            }
        }
        let l = pos.len();
        let node_of = |q: f64| pos.binary_search_by(|x| x.total_cmp(&q)).expect("cut point is a node");
        let mut at: Vec<Vec<(usize, usize)>> = vec![Vec::new(); l]; // (chord, other node)
        let mut ends: HashMap<usize, (usize, usize)> = HashMap::new();
        for &ci in &chords_in[p] {
            let g = chords[ci].2;
            let (a, b) = (node_of(arr.pos(p, g.from)), node_of(arr.pos(p, g.to)));
            at[a].push((ci, b));
            at[b].push((ci, a));
            ends.insert(ci, (a, b));
        }
        let dist = |x: usize, z: usize| (z + l - x) % l;
        let mut arc_used = vec![false; l];
        let mut chord_used: HashSet<(usize, usize)> = HashSet::new();
        let mut arc_face = vec![(0usize, 0usize); l];
        let mut node_faces: Vec<Vec<(usize, usize)>> = vec![Vec::new(); l];
        let mut starts: Vec<Elem> = (0..l).map(Elem::Arc).collect();
        for &ci in &chords_in[p] {
            let (a, b) = ends[&ci];
            starts.push(Elem::Chord { chord: ci, from: a, to: b });
            starts.push(Elem::Chord { chord: ci, from: b, to: a });
        }
        for start in starts {
            let fresh = match start {
                Elem::Arc(k) => !arc_used[k],
                Elem::Chord { chord, from, .. } => !chord_used.contains(&(chord, from)),
            };
            if !fresh {
                continue;
            }
            let face = polygons.len();
            let mut word_f: Vec<Side> = Vec::new();
            let mut cur = start;
            loop {
                let (x, d_in) = match cur {
                    Elem::Arc(k) => {
                        arc_used[k] = true;
                        arc_face[k] = (face, word_f.len());
                        node_faces[k].push((face, word_f.len()));
                        word_f.push(arcs[k].0);
                        ((k + 1) % l, l)
                    }
                    Elem::Chord { chord, from, to } => {
                        chord_used.insert((chord, from));
                        node_faces[from].push((face, word_f.len()));
                        let forward = ends[&chord].0 == from;
                        let (edge, reversed) = if per_chord == 1 {
                            (chord_base + chord, !forward)
                        } else {
                            (chord_base + 2 * chord + usize::from(!forward), false)
                        };
                        word_f.push(Side { edge, reversed });
                        (to, dist(to, from))
                    }
                };
                let next = at[x]
                    .iter()
                    .filter(|(_, z)| dist(x, *z) < d_in && dist(x, *z) > 0)
                    .max_by_key(|(ch, z)| (dist(x, *z), *ch))
                    .map(|&(ch, z)| Elem::Chord { chord: ch, from: x, to: z })
                    .unwrap_or(Elem::Arc(x));
                let same = match (next, start) {
                    (Elem::Arc(a), Elem::Arc(b)) => a == b,
                    (Elem::Chord { chord: a, from: fa, .. }, Elem::Chord { chord: b, from: fb, .. }) => a == b && fa == fb,
                    _ => false,
                };
                if same {
                    break;
                }
                cur = next;
                if word_f.len() > 4 * l + 8 {
                    unreachable!("face walk failed to close");
                }
            }
            polygons.push(word_f);
            origin.push(Some(p));
        }
        locate.push(PolyLocate { pos, arcs, arc_face, node_faces });
    }

    let mut surface = SurfaceComplex::build(labels.clone(), polygons.clone())?;
    let mut caps = Vec::new();
    if mode == Mode::Compress {
        for circle in surface.boundary_circles() {
            let owners: Vec<Option<usize>> = circle
                .iter()
                .map(|st| chord_edges.get(&surface.side(st.occ).edge).map(|ce| ce.curve))
                .collect();
            let Some(Some(c)) = owners.first().copied() else { continue };
            if !arr.curves[c].closed || owners.iter().any(|o| *o != Some(c)) {
                continue;
            }
            // the circle read backwards: reverse the order and every edge
            let cap: Vec<Side> = circle
                .iter()
                .rev()
                .map(|st| {
                    let sd = surface.side(st.occ);
                    Side { edge: sd.edge, reversed: sd.reversed != st.forward }
                })
                .collect();
            caps.push((c, polygons.len()));
            polygons.push(cap);
            origin.push(None);
        }
        surface = SurfaceComplex::build(labels, polygons)?;
    }

    let closed = cut.iter().filter(|&&c| arr.curves[c].closed).count() as i64;
    let arcs = cut.len() as i64 - closed;
    let expected = s.euler_characteristic()
        + if mode == Mode::Glue { 0 } else { arcs }
        + if mode == Mode::Compress { 2 * closed } else { 0 };
    assert_eq!(surface.euler_characteristic(), expected, "Euler characteristic bookkeeping");

    let mut carried = Vec::with_capacity(carry.len());
    for &c in carry {
        carried.push(carry_curve(&arr.curves[c], arr, &locate).ok_or(CutError::Transport(c))?);
    }
    Ok(Refined { surface, chord_edges, caps, carried, origin })
}

struct PolyLocate {
    pos: Vec<f64>,
    arcs: Vec<(Side, f64, f64)>,
    arc_face: Vec<(usize, usize)>,
    node_faces: Vec<Vec<(usize, usize)>>,
}

enum Loc {
    Arc(usize, f64),
    Node(usize),
}

fn carry_curve(c: &Curve, arr: &Arrangement, locate: &[PolyLocate]) -> Option<Curve> {
    let mut segs = Vec::with_capacity(c.segs.len());
    for g in &c.segs {
        let pl = &locate[g.poly];
        let l = pl.pos.len();
        let loc = |port: Port| -> Loc {
            let q = arr.pos(g.poly, port);
            match pl.pos.binary_search_by(|x| x.total_cmp(&q)) {
                Ok(k) => Loc::Node(k),
                Err(k) => {
                    let k = (k + l - 1) % l;
                    let t = port.side().map(|x| x.1).unwrap_or(0.5);
                    Loc::Arc(k, t)
                }
            }
        };
        let (la, lb) = (loc(g.from), loc(g.to));
        let faces_of = |lc: &Loc| -> Vec<usize> {
            match lc {
                Loc::Arc(k, _) => vec![pl.arc_face[*k].0],
                Loc::Node(k) => pl.node_faces[*k].iter().map(|x| x.0).collect(),
            }
        };
        let fa = faces_of(&la);
        let fb = faces_of(&lb);
        let face = *fa.iter().find(|f| fb.contains(f))?;
        let port_in = |lc: &Loc| -> Port {
            match lc {
                Loc::Arc(k, t) => {
                    let (_, lo, hi) = pl.arcs[*k];
                    Port::Side { side: pl.arc_face[*k].1, t: (t - lo) / (hi - lo) }
                }
                Loc::Node(k) => Port::Corner(pl.node_faces[*k].iter().find(|x| x.0 == face).unwrap().1),
            }
        };
        segs.push(Segment { poly: face, from: port_in(&la), to: port_in(&lb) });
    }
    Some(Curve { tag: c.tag, closed: c.closed, segs })
}

fn uniquify(labels: &mut [String]) {
    let mut seen = HashSet::new();
    for l in labels.iter_mut() {
        while !seen.insert(l.clone()) {
            l.push('\'');
        }
    }
}

/// Connected components of a possibly disconnected complex, each rebuilt as
/// its own complex, with the original polygon indices.
pub fn components(s: &SurfaceComplex) -> Vec<(SurfaceComplex, Vec<usize>)> {
    let np = s.num_polygons();
    let mut dsu = Dsu::new(np);
    for e in 0..s.num_edges() {
        let o = s.occurrences(e);
        if o.len() == 2 {
            dsu.union(o[0].poly, o[1].poly);
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for p in 0..np {
        let r = dsu.find(p);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => g.1.push(p),
            None => groups.push((r, vec![p])),
        }
    }
    groups
        .into_iter()
        .map(|(_, polys)| {
            let mut emap: HashMap<EdgeId, EdgeId> = HashMap::new();
            let mut labels = Vec::new();
            let words: Vec<Vec<Side>> = polys
                .iter()
                .map(|&p| {
                    s.polygons()[p]
                        .iter()
                        .map(|sd| {
                            let e = *emap.entry(sd.edge).or_insert_with(|| {
                                labels.push(s.label(sd.edge).to_string());
                                labels.len() - 1
                            });
                            Side { edge: e, reversed: sd.reversed }
                        })
                        .collect()
                })
                .collect();
            (SurfaceComplex::from_sides(labels, words).expect("component is connected"), polys)
        })
        .collect()
}

/// Which refined boundary circles of `r` come from which curve (`None` for
/// circles of the original boundary or mixed ones).
pub fn circle_owners(r: &Refined) -> Vec<Option<usize>> {
    r.surface
        .boundary_circles()
        .iter()
        .map(|circle| {
            let owners: Vec<Option<usize>> = circle
                .iter()
                .map(|st| r.chord_edges.get(&r.surface.side(st.occ).edge).map(|c| c.curve))
                .collect();
            match owners.first() {
                Some(Some(c)) if owners.iter().all(|o| *o == Some(*c)) => Some(*c),
                _ => None,
            }
        })
        .collect()
}

/// Locate the polygon of the refined complex containing boundary step `o`.
pub fn occ_component(comps: &[(SurfaceComplex, Vec<usize>)], o: Occ) -> usize {
    comps.iter().position(|(_, polys)| polys.contains(&o.poly)).expect("polygon in some component")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::Tag;

    fn arr(words: &[&[&str]]) -> Arrangement {
        let v: Vec<Vec<&str>> = words.iter().map(|x| x.to_vec()).collect();
        Arrangement::new(SurfaceComplex::from_words(&v).unwrap())
    }

    #[test]
    fn torus_cut_is_annulus_and_compress_is_sphere() {
        let mut a = arr(&[&["a", "b", "-a", "-b"]]);
        let s = a.surface.clone();
        a.curves.push(Curve::closed_from_crossings(&s, Tag::Alpha, &[(0, true, 0.5)]));
        let r = refine(&a, &[0], Mode::Cut, &[]).unwrap();
        assert_eq!(r.surface.euler_characteristic(), 0);
        assert_eq!(r.surface.boundary_count(), 2);
        assert!(r.surface.is_orientable());
        assert_eq!(r.surface.components(), 1);
        let r = refine(&a, &[0], Mode::Compress, &[]).unwrap();
        assert_eq!(r.surface.euler_characteristic(), 2);
        assert!(r.surface.is_closed());
    }

    #[test]
    fn klein_cut_along_two_sided_curve_is_annulus() {
        let mut a = arr(&[&["a", "b", "a", "-b"]]);
        let s = a.surface.clone();
        a.curves.push(Curve::closed_from_crossings(&s, Tag::Alpha, &[(1, true, 0.5)]));
        let r = refine(&a, &[0], Mode::Cut, &[]).unwrap();
        assert_eq!(r.surface.components(), 1);
        assert_eq!(r.surface.euler_characteristic(), 0);
        assert_eq!(r.surface.boundary_count(), 2);
        assert!(r.surface.is_orientable());
        // the one-sided core is refused
        a.curves[0] = Curve::closed_from_crossings(&s, Tag::Alpha, &[(0, true, 0.5)]);
        assert_eq!(refine(&a, &[0], Mode::Cut, &[]).unwrap_err(), CutError::OneSided(0));
    }

    #[test]
    fn glue_keeps_surface_and_carries_curves() {
        let mut a = arr(&[&["a", "b", "-a", "-b"]]);
        let s = a.surface.clone();
        a.curves.push(Curve::closed_from_crossings(&s, Tag::Alpha, &[(0, true, 0.3)]));
        a.curves.push(Curve::closed_from_crossings(&s, Tag::Beta, &[(0, true, 0.6)]));
        let r = refine(&a, &[0], Mode::Glue, &[1]).unwrap();
        assert_eq!(r.surface.euler_characteristic(), 0);
        assert!(r.surface.is_closed());
        let b = Arrangement::with_curves(std::sync::Arc::new(r.surface.clone()), r.carried.clone());
        b.check_structure().unwrap();
    }

    #[test]
    fn parallel_curves_cut_off_an_annulus() {
        let mut a = arr(&[&["a", "b", "-a", "-b"]]);
        let s = a.surface.clone();
        a.curves.push(Curve::closed_from_crossings(&s, Tag::Alpha, &[(0, true, 0.3)]));
        a.curves.push(Curve::closed_from_crossings(&s, Tag::Beta, &[(0, true, 0.6)]));
        let r = refine(&a, &[0, 1], Mode::Cut, &[]).unwrap();
        let comps = components(&r.surface);
        assert_eq!(comps.len(), 2);
        for (c, _) in &comps {
            assert_eq!(c.euler_characteristic(), 0);
            assert_eq!(c.boundary_count(), 2);
        }
    }

    #[test]
    fn compressing_along_long_curves_caps_each_circle() {
        // a slid α curve crosses several edges, so its circles have several sides
        let mut cur = crate::fixtures::klein();
        cur = crate::trisection::stabilize(&cur, 1).unwrap();
        let f = cur.family(Tag::Alpha);
        cur = crate::slide::candidate_bands(&cur, f[0], f[1], &[Tag::Alpha])
            .iter()
            .filter_map(|b| crate::slide::slide(&cur, f[0], f[1], b, &[Tag::Alpha]).ok())
            .max_by_key(|a| a.curves[f[0]].segs.len())
            .unwrap();
        let f = cur.family(Tag::Alpha);
        assert!(f.iter().any(|&c| cur.curves[c].segs.len() > 2));
        let r = refine(&cur, &f, Mode::Compress, &[]).unwrap();
        assert_eq!(r.surface.euler_characteristic(), cur.surface.euler_characteristic() + 4);
        assert!(r.surface.is_closed());
        assert_eq!(r.surface.components(), 1);
    }
}
