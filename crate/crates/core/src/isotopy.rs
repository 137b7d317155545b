//! Isotopies that shorten curves or remove crossings: edge bigons and strip
//! bigons. Neither ever moves a curve across a vertex of the complex, so
//! marked points stay fixed.

use crate::arrangement::{Arrangement, CurveError, Port, Segment, Tag};
use crate::surface::Occ;

/// Parameters of points on edge `e` strictly between `t1` and `t2` belonging
/// to curves whose tag is in `tags`.
fn points_between(arr: &Arrangement, e: usize, t1: f64, t2: f64, tags: &[Tag]) -> bool {
    let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
    let s = &*arr.surface;
    arr.curves
        .iter()
        .filter(|c| tags.contains(&c.tag))
        .any(|c| c.edge_points(s).any(|(e2, t)| e2 == e && t > lo && t < hi))
}

/// Remove one innermost edge bigon of curve `ci`, if any. Returns whether a
/// bigon was removed.
pub fn reduce_once(arr: &mut Arrangement, ci: usize) -> Result<bool, CurveError> {
    let s = arr.surface.clone();
    let c = &arr.curves[ci];
    let m = c.segs.len();
    for k in 0..m {
        if !c.closed && (k == 0 || k == m - 1) {
            continue;
        }
        let g = c.segs[k];
        let (Port::Side { side: s1, t: t1 }, Port::Side { side: s2, t: t2 }) = (g.from, g.to) else { continue };
        if s1 != s2 {
            continue;
        }
        let e = s.polygons()[g.poly][s1].edge;
        if points_between(arr, e, t1, t2, &[c.tag]) {
            continue;
        }
        if c.closed && m <= 2 {
            return Err(CurveError::Inessential(ci));
        }
        let prev = c.segs[(k + m - 1) % m];
        let next = c.segs[(k + 1) % m];
        debug_assert_eq!(prev.poly, next.poly);
        let merged = Segment { poly: prev.poly, from: prev.from, to: next.to };
        if arr.pos(merged.poly, merged.from) == arr.pos(merged.poly, merged.to) {
            return Err(CurveError::Inessential(ci));
        }
        let c = &mut arr.curves[ci];
        if c.closed {
            // rotate so the bigon sits in the middle, then splice
            c.segs.rotate_left((k + m - 1) % m);
            c.segs.splice(0..3, [merged]);
        } else {
            c.segs.splice(k - 1..k + 2, [merged]);
        }
        return Ok(true);
    }
    Ok(false)
}

/// Remove all edge bigons of curve `ci`.
pub fn reduce(arr: &mut Arrangement, ci: usize) -> Result<usize, CurveError> {
    let mut n = 0;
    while reduce_once(arr, ci)? {
        n += 1;
    }
    Ok(n)
}

pub fn reduce_all(arr: &mut Arrangement) -> Result<usize, CurveError> {
    let mut n = 0;
    for ci in 0..arr.curves.len() {
        n += reduce(arr, ci)?;
    }
    Ok(n)
}

/// A strip bigon: curves `i` and `j` cross in one polygon, run side by side
/// through a sequence of edges, and cross again. `steps` lists, per shared
/// edge, the segment indices of `i` and `j` that exit through it.
#[derive(Clone, Debug)]
pub struct StripBigon {
    pub i: usize,
    pub j: usize,
    pub steps: Vec<(usize, bool, usize, bool)>,
}

fn step_index(k: usize, forward: bool, m: usize, closed: bool) -> Option<usize> {
    match (forward, closed) {
        (true, true) => Some((k + 1) % m),
        (false, true) => Some((k + m - 1) % m),
        (true, false) => (k + 1 < m).then_some(k + 1),
        (false, false) => k.checked_sub(1),
    }
}

fn exit_port(seg: &Segment, dir: bool) -> Port {
    if dir {
        seg.to
    } else {
        seg.from
    }
}

/// Find a strip bigon between curves `i` and `j`.
pub fn find_strip_bigon(arr: &Arrangement, i: usize, j: usize) -> Option<StripBigon> {
    let s = &*arr.surface;
    let (ci, cj) = (&arr.curves[i], &arr.curves[j]);
    let (mi, mj) = (ci.segs.len(), cj.segs.len());
    let guard = [ci.tag, cj.tag];
    for a0 in 0..mi {
        for b0 in 0..mj {
            let (ga, gb) = (ci.segs[a0], cj.segs[b0]);
            if ga.poly != gb.poly || arr.crossings_of_segments(&ga, &gb) == 0 {
                continue;
            }
            for (di, dj) in [(true, true), (true, false), (false, true), (false, false)] {
                let (mut a, mut b) = (a0, b0);
                let mut steps = Vec::new();
                let limit = mi + mj;
                loop {
                    let (sa, sb) = (ci.segs[a], cj.segs[b]);
                    let (pa, pb) = (exit_port(&sa, di), exit_port(&sb, dj));
                    let (Port::Side { side: xa, t: ta }, Port::Side { side: xb, t: tb }) = (pa, pb) else { break };
                    if xa != xb {
                        break;
                    }
                    let occ = Occ { poly: sa.poly, side: xa };
                    if s.mate(occ).is_none() {
                        break;
                    }
                    let e = s.side(occ).edge;
                    if points_between(arr, e, ta, tb, &guard) {
                        break;
                    }
                    // both continuing segments must exist (arcs end at their anchors)
                    let (Some(na), Some(nb)) = (step_index(a, di, mi, ci.closed), step_index(b, dj, mj, cj.closed)) else {
                        break;
                    };
                    if (na, nb) == (a0, b0) {
                        break;
                    }
                    steps.push((a, di, b, dj));
                    let (ga2, gb2) = (ci.segs[na], cj.segs[nb]);
                    if arr.crossings_of_segments(&ga2, &gb2) > 0 {
                        return Some(StripBigon { i, j, steps });
                    }
                    a = na;
                    b = nb;
                    if steps.len() > limit {
                        break;
                    }
                }
            }
        }
    }
    None
}

/// Swap the two curves' points along the strip, removing both crossings.
pub fn remove_strip_bigon(arr: &mut Arrangement, sb: &StripBigon) {
    let before = arr.crossings(sb.i, sb.j);
    let saved = arr.clone();
    for &(a, di, b, dj) in &sb.steps {
        let ta = exit_t(&arr.curves[sb.i].segs[a], di);
        let tb = exit_t(&arr.curves[sb.j].segs[b], dj);
        set_crossing_t(arr, sb.i, a, di, tb);
        set_crossing_t(arr, sb.j, b, dj, ta);
    }
    if arr.crossings(sb.i, sb.j) + 2 != before {
        *arr = saved;
    }
}

fn exit_t(seg: &Segment, dir: bool) -> f64 {
    exit_port(seg, dir).side().expect("side port").1
}

/// Set the parameter of the crossing where segment `k` of curve `c` exits in
/// direction `dir` (both ports of that crossing).
fn set_crossing_t(arr: &mut Arrangement, c: usize, k: usize, dir: bool, t: f64) {
    let cur = &mut arr.curves[c];
    let m = cur.segs.len();
    let set = |p: &mut Port| {
        if let Port::Side { t: tt, .. } = p {
            *tt = t;
        }
    };
    if dir {
        set(&mut cur.segs[k].to);
        let n = (k + 1) % m;
        set(&mut cur.segs[n].from);
    } else {
        set(&mut cur.segs[k].from);
        let n = (k + m - 1) % m;
        set(&mut cur.segs[n].to);
    }
}

/// Remove strip bigons between curve `i` and every curve in `others` until
/// none remain; returns how many were removed.
pub fn tighten_against(arr: &mut Arrangement, i: usize, others: &[usize]) -> usize {
    let mut n = 0;
    loop {
        let mut progress = false;
        for &j in others {
            if j == i {
                continue;
            }
            while let Some(sb) = find_strip_bigon(arr, i, j) {
                let before = arr.crossings(i, j);
                remove_strip_bigon(arr, &sb);
                if arr.crossings(i, j) >= before {
                    break;
                }
                n += 1;
                progress = true;
            }
        }
        if !progress {
            return n;
        }
    }
}

/// Reduce both curves and remove strip bigons between them; returns the
/// resulting number of crossings.
pub fn minimal_position(arr: &mut Arrangement, i: usize, j: usize) -> Result<usize, CurveError> {
    loop {
        reduce(arr, i)?;
        reduce(arr, j)?;
        match find_strip_bigon(arr, i, j) {
            Some(sb) => {
                let before = arr.crossings(i, j);
                remove_strip_bigon(arr, &sb);
                if arr.crossings(i, j) >= before {
                    break;
                }
            }
            None => break,
        }
    }
    arr.normalize();
    Ok(arr.crossings(i, j))
}

impl Arrangement {
    pub fn crossings_of_segments(&self, a: &Segment, b: &Segment) -> usize {
        if a.poly != b.poly {
            return 0;
        }
        let n = self.surface.poly_len(a.poly) as f64;
        usize::from(crate::arrangement::chords_cross(
            self.pos(a.poly, a.from),
            self.pos(a.poly, a.to),
            self.pos(b.poly, b.from),
            self.pos(b.poly, b.to),
            n,
        ))
    }
}
