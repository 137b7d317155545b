//! Heegaard pairs on closed (possibly non-orientable) surfaces: cut-system
//! validation, algebraic invariants, standard-form detection and a bounded
//! slide search for the standard configuration.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrangement::{Arrangement, Curve, Port, Segment, Tag};
use crate::cut::{self, Mode};
use crate::homology::{rank_mod2, AbelianGroup};
use crate::invariants;
use crate::isotopy;
use crate::presentation::Presentation;
use crate::slide::{self, Band, SlideError};
use crate::surface::{Side, SurfaceComplex};

pub const DEFAULT_BUDGET: usize = 100_000;

/// Why a family fails to be a cut system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "witness", rename_all = "kebab-case")]
pub enum CutWitness {
    SurfaceNotClosed,
    OddEulerCharacteristic { chi: i64 },
    Cardinality { expected: usize, found: usize },
    ArcInFamily { curve: usize },
    SelfCrossing { curve: usize },
    NotDisjoint { a: usize, b: usize },
    OneSided { curve: usize },
    Inessential { curve: usize },
    NotPlanar { components: usize, boundary: usize, chi: i64 },
}

/// Check that `family` (indices into `arr.curves`) is a cut system of the
/// closed surface. Returns every failure found; empty means valid. Family
/// positions in witnesses are relative to `family`.
pub fn validate_cut_system(arr: &Arrangement, family: &[usize]) -> Vec<CutWitness> {
    let s = &*arr.surface;
    let mut out = Vec::new();
    if !s.is_closed() {
        out.push(CutWitness::SurfaceNotClosed);
        return out;
    }
    let Some(g) = s.genus() else {
        out.push(CutWitness::OddEulerCharacteristic { chi: s.euler_characteristic() });
        return out;
    };
    if family.len() != g {
        out.push(CutWitness::Cardinality { expected: g, found: family.len() });
    }
    for (k, &c) in family.iter().enumerate() {
        let cur = &arr.curves[c];
        if !cur.closed {
            out.push(CutWitness::ArcInFamily { curve: k });
            continue;
        }
        if arr.self_crossings(c) > 0 {
            out.push(CutWitness::SelfCrossing { curve: k });
        }
        if cur.w1(s) {
            out.push(CutWitness::OneSided { curve: k });
        }
        let mut probe = arr.clone();
        if isotopy::reduce(&mut probe, c).is_err() {
            out.push(CutWitness::Inessential { curve: k });
        }
    }
    for a in 0..family.len() {
        for b in a + 1..family.len() {
            if arr.crossings(family[a], family[b]) > 0 {
                out.push(CutWitness::NotDisjoint { a, b });
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    match cut::refine(arr, family, Mode::Cut, &[]) {
        Ok(r) => {
            let comps = cut::components(&r.surface).len();
            let bd = r.surface.boundary_count();
            let chi = r.surface.euler_characteristic();
            if comps != 1 || bd != 2 * g || chi != 2 - bd as i64 {
                out.push(CutWitness::NotPlanar { components: comps, boundary: bd, chi });
            }
        }
        Err(cut::CutError::OneSided(c)) => out.push(CutWitness::OneSided { curve: pos(family, c) }),
        Err(cut::CutError::NotDisjoint(a, b)) => out.push(CutWitness::NotDisjoint { a: pos(family, a), b: pos(family, b) }),
        Err(_) => out.push(CutWitness::NotPlanar { components: 0, boundary: 0, chi: 0 }),
    }
    out
}

fn pos(family: &[usize], c: usize) -> usize {
    family.iter().position(|&x| x == c).unwrap_or(c)
}

/// Integer presentation matrix of H₁ of the glued 3-manifold (rows: relators
/// of π₁, columns: generators) and its abelian group.
pub fn homology_presentation(arr: &Arrangement, a: Tag, b: Tag) -> (Vec<Vec<i64>>, AbelianGroup) {
    let p = pi1_raw(arr, a, b);
    let rows: Vec<Vec<i64>> = p.relators.iter().map(|r| p.exponent_sums(r)).collect();
    let g = p.abelianization();
    (rows, g)
}

fn pi1_raw(arr: &Arrangement, a: Tag, b: Tag) -> Presentation {
    let mut fam = arr.family(a);
    fam.extend(arr.family(b));
    invariants::quotient(arr, &fam)
}

/// Simplified π₁ presentation of the glued 3-manifold.
pub fn pi1_presentation(arr: &Arrangement, a: Tag, b: Tag) -> Presentation {
    pi1_raw(arr, a, b).simplify().presentation
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    Dual,
    Parallel,
}

/// A bijection between two families in which every pair is dual (one
/// crossing, disjoint from everything else) or parallel (isotopic and
/// disjoint from everything else). Indices are family positions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardForm {
    pub pairs: Vec<(usize, usize, PairKind)>,
}

impl StandardForm {
    pub fn parallel(&self) -> usize {
        self.pairs.iter().filter(|p| p.2 == PairKind::Parallel).count()
    }
    pub fn dual(&self) -> usize {
        self.pairs.iter().filter(|p| p.2 == PairKind::Dual).count()
    }
}

/// Whether two disjoint closed curves cobound an annulus.
pub fn are_parallel(arr: &Arrangement, i: usize, j: usize) -> bool {
    if arr.crossings(i, j) > 0 || !arr.curves[i].closed || !arr.curves[j].closed {
        return false;
    }
    let Ok(r) = cut::refine(arr, &[i, j], Mode::Cut, &[]) else { return false };
    let comps = cut::components(&r.surface);
    let owners = cut::circle_owners(&r);
    let circles = r.surface.boundary_circles();
    comps.iter().any(|(c, polys)| {
        if c.euler_characteristic() != 0 || c.boundary_count() != 2 || !c.is_orientable() {
            return false;
        }
        let mut own: Vec<Option<usize>> = circles
            .iter()
            .zip(&owners)
            .filter(|(circ, _)| polys.contains(&circ[0].occ.poly))
            .map(|(_, o)| *o)
            .collect();
        own.sort();
        own == [Some(i.min(j)), Some(i.max(j))]
    })
}

/// Detect the standard configuration between families `a` and `b`.
pub fn standard_form(arr: &Arrangement, a: Tag, b: Tag) -> Option<StandardForm> {
    let (fa, fb) = (arr.family(a), arr.family(b));
    if fa.len() != fb.len() {
        return None;
    }
    let m: Vec<Vec<usize>> = fa.iter().map(|&i| fb.iter().map(|&j| arr.crossings(i, j)).collect()).collect();
    let mut used = vec![false; fb.len()];
    let mut pairs = Vec::new();
    for (x, row) in m.iter().enumerate() {
        let total: usize = row.iter().sum();
        let found = if total == 1 {
            let y = row.iter().position(|&v| v == 1).unwrap();
            (m.iter().map(|r| r[y]).sum::<usize>() == 1).then_some((y, PairKind::Dual))
        } else if total == 0 {
            (0..fb.len())
                .find(|&y| !used[y] && m.iter().all(|r| r[y] == 0) && are_parallel(arr, fa[x], fb[y]))
                .map(|y| (y, PairKind::Parallel))
        } else {
            None
        };
        let (y, kind) = found?;
        if used[y] {
            return None;
        }
        used[y] = true;
        pairs.push((x, y, kind));
    }
    Some(StandardForm { pairs })
}

/// [`standard_form`], except that a pair of curves crossing neither family
/// only has to be parallel once every dual pair is destabilized. A dual
/// pair meeting once and missing every other curve splits off a
/// stabilization; isotopy across the cancelled handle is realized by slides
/// over its two curves, so the pair is still standard.
pub fn destabilized_form(arr: &Arrangement, a: Tag, b: Tag) -> Option<StandardForm> {
    if let Some(sf) = standard_form(arr, a, b) {
        return Some(sf);
    }
    let (fa, fb) = (arr.family(a), arr.family(b));
    if fa.len() != fb.len() {
        return None;
    }
    let m: Vec<Vec<usize>> = fa.iter().map(|&i| fb.iter().map(|&j| arr.crossings(i, j)).collect()).collect();
    let col = |y: usize| m.iter().map(|r| r[y]).sum::<usize>();
    let mut pairs = Vec::new();
    let (mut xs, mut duals) = (Vec::new(), Vec::new());
    for (x, row) in m.iter().enumerate() {
        match row.iter().sum::<usize>() {
            0 => xs.push(x),
            1 => {
                let y = row.iter().position(|&v| v == 1).unwrap();
                if col(y) != 1 {
                    return None;
                }
                pairs.push((x, y, PairKind::Dual));
                duals.push(fa[x]);
            }
            _ => return None,
        }
    }
    let ys: Vec<usize> = (0..fb.len()).filter(|&y| col(y) == 0).collect();
    if duals.is_empty() || xs.len() != ys.len() {
        return None;
    }
    let carry: Vec<usize> = xs.iter().map(|&x| fa[x]).chain(ys.iter().map(|&y| fb[y])).collect();
    let r = cut::refine(arr, &duals, Mode::Compress, &carry).ok()?;
    let capped = Arrangement::with_curves(Arc::new(r.surface), r.carried);
    let mut used = vec![false; ys.len()];
    for (p, &x) in xs.iter().enumerate() {
        let q = (0..ys.len()).find(|&q| !used[q] && are_parallel(&capped, p, xs.len() + q))?;
        used[q] = true;
        pairs.push((x, ys[q], PairKind::Parallel));
    }
    pairs.sort_by_key(|p| p.0);
    Some(StandardForm { pairs })
}

/// One handle slide: family member `moving` slid over member `over` (family
/// positions) along `band`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SlideMove {
    pub family: Tag,
    pub moving: usize,
    pub over: usize,
    pub band: Band,
}

/// Apply a slide, then pull the moved curve tight against the curves of the
/// other families listed in `tighten`.
pub fn apply_slide(arr: &Arrangement, mv: &SlideMove, tighten: &[Tag]) -> Result<Arrangement, SlideError> {
    let fam = arr.family(mv.family);
    let (Some(&i), Some(&j)) = (fam.get(mv.moving), fam.get(mv.over)) else {
        return Err(SlideError::BadBand("family index out of range"));
    };
    let mut out = slide::slide(arr, i, j, &mv.band, &[mv.family])?;
    let others: Vec<usize> = (0..out.curves.len()).filter(|&c| tighten.contains(&out.curves[c].tag)).collect();
    isotopy::tighten_against(&mut out, i, &others);
    out.normalize();
    Ok(out)
}

/// Pull every curve of `a` tight against every curve of `b`.
pub fn tighten_pair(arr: &mut Arrangement, a: Tag, b: Tag) -> Result<(), crate::arrangement::CurveError> {
    isotopy::reduce_all(arr)?;
    let fb = arr.family(b);
    for i in arr.family(a) {
        isotopy::tighten_against(arr, i, &fb);
    }
    arr.normalize();
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "refutation", rename_all = "kebab-case")]
pub enum Refutation {
    Torsion { group: String },
    TooManyFactors { rank: usize, genus: usize },
    NonOrientableSphere,
    Z2Rank { homology_rank: usize, z2_dimension: usize },
    SizeMismatch { a: usize, b: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Recognition {
    Verified { k: usize, dual: usize, script: Vec<SlideMove> },
    Refuted(Refutation),
    Inconclusive { explored: usize },
}

impl Recognition {
    pub fn is_verified(&self) -> bool {
        matches!(self, Recognition::Verified { .. })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecognitionError {
    #[error("budget must be positive")]
    ZeroBudget,
    #[error(transparent)]
    Curve(#[from] crate::arrangement::CurveError),
}

/// Result of the slide search.
pub struct Search {
    pub found: Option<(StandardForm, Vec<SlideMove>, Arrangement)>,
    pub explored: usize,
}

fn cost(arr: &Arrangement, a: Tag, b: Tag) -> (usize, usize) {
    let x = arr.crossings_between(&arr.family(a), &arr.family(b));
    (x, arr.curves.iter().map(|c| c.segs.len()).sum())
}

/// Best-first search over slides within each family (cost: crossings
/// between the families, then total length) for a standard configuration.
/// `arr` must already be tightened; the script is replayable with
/// [`apply_slide`] using the opposite family as tightening target.
pub fn search_standard(arr: &Arrangement, a: Tag, b: Tag, budget: usize) -> Search {
    if let Some(sf) = destabilized_form(arr, a, b) {
        return Search { found: Some((sf, Vec::new(), arr.clone())), explored: 1 };
    }
    let mut states: Vec<(Arrangement, Option<(usize, SlideMove)>)> = vec![(arr.clone(), None)];
    let mut seen: HashSet<String> = HashSet::from([arr.key()]);
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((cost(arr, a, b), 0usize, 0usize)));
    let mut explored = 1;
    while let Some(Reverse((_, depth, id))) = heap.pop() {
        let cur = states[id].0.clone();
        for (fam, other) in [(a, b), (b, a)] {
            let members = cur.family(fam);
            for (mi, &i) in members.iter().enumerate() {
                for (oj, &j) in members.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    for band in slide::candidate_bands(&cur, i, j, &[fam]) {
                        let mv = SlideMove { family: fam, moving: mi, over: oj, band };
                        let Ok(next) = apply_slide(&cur, &mv, &[other]) else { continue };
                        if !seen.insert(next.key()) {
                            continue;
                        }
                        explored += 1;
                        let c = cost(&next, a, b);
                        states.push((next, Some((id, mv))));
                        let nid = states.len() - 1;
                        if let Some(sf) = destabilized_form(&states[nid].0, a, b) {
                            let script = unwind(&states, nid);
                            return Search { found: Some((sf, script, states[nid].0.clone())), explored };
                        }
                        heap.push(Reverse((c, depth + 1, nid)));
                        if explored >= budget {
                            return Search { found: None, explored };
                        }
                    }
                }
            }
        }
    }
    Search { found: None, explored }
}

fn unwind(states: &[(Arrangement, Option<(usize, SlideMove)>)], mut id: usize) -> Vec<SlideMove> {
    let mut out = Vec::new();
    while let Some((p, mv)) = &states[id].1 {
        out.push(mv.clone());
        id = *p;
    }
    out.reverse();
    out
}

/// The pair restricted to families `a` and `b`, tightened: the starting
/// point of recognition and of script replay.
pub fn prepare_pair(arr: &Arrangement, a: Tag, b: Tag) -> Result<Arrangement, RecognitionError> {
    let mut p = arr.restrict(&[a, b]);
    tighten_pair(&mut p, a, b)?;
    Ok(p)
}

/// Three-valued recognition of the standard Heegaard diagram of
/// #ₖ S²×S¹ or #ₖ S²×̃S¹ on a closed surface.
pub fn recognize_standard_pair(arr: &Arrangement, a: Tag, b: Tag, budget: usize) -> Result<Recognition, RecognitionError> {
    if budget == 0 {
        return Err(RecognitionError::ZeroBudget);
    }
    let (na, nb) = (arr.count(a), arr.count(b));
    if na != nb {
        return Ok(Recognition::Refuted(Refutation::SizeMismatch { a: na, b: nb }));
    }
    let pair = prepare_pair(arr, a, b)?;
    let h = invariants::quotient_homology(&pair, &(0..pair.curves.len()).collect::<Vec<_>>());
    if !h.torsion.is_empty() {
        return Ok(Recognition::Refuted(Refutation::Torsion { group: h.to_string() }));
    }
    if h.rank > na {
        return Ok(Recognition::Refuted(Refutation::TooManyFactors { rank: h.rank, genus: na }));
    }
    if !pair.surface.is_orientable() && h.rank == 0 {
        return Ok(Recognition::Refuted(Refutation::NonOrientableSphere));
    }
    let (fa, fb) = (pair.family(a), pair.family(b));
    let q: Vec<Vec<i64>> = fa.iter().map(|&i| fb.iter().map(|&j| (pair.crossings(i, j) % 2) as i64).collect()).collect();
    let z2 = na - rank_mod2(&q, nb);
    if z2 != h.rank {
        return Ok(Recognition::Refuted(Refutation::Z2Rank { homology_rank: h.rank, z2_dimension: z2 }));
    }
    let s = search_standard(&pair, a, b, budget);
    Ok(match s.found {
        Some((sf, script, _)) => Recognition::Verified { k: sf.parallel(), dual: sf.dual(), script },
        None => Recognition::Inconclusive { explored: s.explored },
    })
}

/// Replay a slide script from the prepared pair.
pub fn replay(pair: &Arrangement, a: Tag, b: Tag, script: &[SlideMove]) -> Result<Arrangement, SlideError> {
    let mut cur = pair.clone();
    for mv in script {
        let other = if mv.family == a { b } else { a };
        cur = apply_slide(&cur, mv, &[other])?;
    }
    Ok(cur)
}

fn fresh_label(s: &SurfaceComplex, base: &str) -> String {
    let mut l = base.to_string();
    while s.edge_by_label(&l).is_some() {
        l.push('\'');
    }
    l
}

/// Connected sum at polygon 0, corner 0 of both arrangements: the two
/// polygon-0 words are concatenated (`a`'s first). Labels of `b` are renamed
/// on clashes; curves of `a` come first.
pub fn connected_sum(a: &Arrangement, b: &Arrangement) -> Arrangement {
    let (sa, sb) = (&*a.surface, &*b.surface);
    let mut labels: Vec<String> = sa.labels().to_vec();
    let mut bmap = Vec::with_capacity(sb.num_edges());
    for l in sb.labels() {
        let mut l2 = l.clone();
        while labels.contains(&l2) {
            l2.push('\'');
        }
        bmap.push(labels.len());
        labels.push(l2);
    }
    let na = sa.poly_len(0);
    let npa = sa.num_polygons();
    let lift_b = |sd: &Side| Side { edge: bmap[sd.edge], reversed: sd.reversed };
    let mut polys: Vec<Vec<Side>> = sa.polygons().to_vec();
    polys[0].extend(sb.polygons()[0].iter().map(lift_b));
    for p in &sb.polygons()[1..] {
        polys.push(p.iter().map(lift_b).collect());
    }
    let surface = SurfaceComplex::from_sides(labels, polys).expect("connected sum of connected complexes");
    let mut curves: Vec<Curve> = a.curves.clone();
    let mp = |p: usize| if p == 0 { 0 } else { p + npa - 1 };
    for c in &b.curves {
        let segs = c
            .segs
            .iter()
            .map(|g| {
                let sh = |port: Port| {
                    if g.poly != 0 {
                        return port;
                    }
                    match port {
                        Port::Side { side, t } => Port::Side { side: side + na, t },
                        Port::Corner(k) => Port::Corner(k + na),
                    }
                };
                Segment { poly: mp(g.poly), from: sh(g.from), to: sh(g.to) }
            })
            .collect();
        curves.push(Curve { tag: c.tag, closed: c.closed, segs });
    }
    Arrangement::with_curves(std::sync::Arc::new(surface), curves)
}

/// Torus `x y x⁻¹ y⁻¹` with one curve per tag in `on_x` crossing `x` once and
/// one per tag in `on_y` crossing `y` once. Labels avoid those of `avoid`.
pub fn torus_piece(on_x: &[Tag], on_y: &[Tag], avoid: &SurfaceComplex) -> Arrangement {
    let (x, y) = (fresh_label(avoid, "h"), fresh_label(avoid, "k"));
    let w = vec![vec![x.clone(), y.clone(), format!("-{x}"), format!("-{y}")]];
    let s = SurfaceComplex::from_words(&w).expect("torus");
    let mut arr = Arrangement::new(s.clone());
    for (edge, tags) in [(0usize, on_x), (1usize, on_y)] {
        let n = tags.len();
        for (k, &t) in tags.iter().enumerate() {
            let tt = (k + 1) as f64 / (n + 1) as f64;
            arr.curves.push(Curve::closed_from_crossings(&s, t, &[(edge, true, tt)]));
        }
    }
    arr
}

/// Stabilize a Heegaard pair: connected sum with a torus carrying a dual pair.
pub fn stabilize_heegaard(arr: &Arrangement, a: Tag, b: Tag) -> Arrangement {
    let t = torus_piece(&[a], &[b], &arr.surface);
    let mut out = connected_sum(&t, arr);
    // keep the original curves first
    let k = t.curves.len();
    out.curves.rotate_left(k);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn klein() -> Arrangement {
        Arrangement::new(SurfaceComplex::from_words(&[vec!["a", "b", "a", "-b"]]).unwrap())
    }

    #[test]
    fn klein_cut_systems() {
        let mut arr = klein();
        let s = arr.surface.clone();
        arr.curves.push(Curve::closed_from_crossings(&s, Tag::Alpha, &[(1, true, 0.5)]));
        assert!(validate_cut_system(&arr, &[0]).is_empty());
        arr.curves[0] = Curve::closed_from_crossings(&s, Tag::Alpha, &[(0, true, 0.5)]);
        assert!(validate_cut_system(&arr, &[0]).contains(&CutWitness::OneSided { curve: 0 }));
        assert_eq!(validate_cut_system(&arr, &[]), vec![CutWitness::Cardinality { expected: 1, found: 0 }]);
    }

    #[test]
    fn torus_pairs() {
        let t = SurfaceComplex::from_words(&[vec!["a", "b", "-a", "-b"]]).unwrap();
        let mut arr = Arrangement::new(t.clone());
        arr.curves.push(Curve::closed_from_crossings(&t, Tag::Alpha, &[(0, true, 0.3)]));
        arr.curves.push(Curve::closed_from_crossings(&t, Tag::Beta, &[(0, true, 0.6)]));
        assert_eq!(homology_presentation(&arr, Tag::Alpha, Tag::Beta).1, AbelianGroup::free(1));
        let r = recognize_standard_pair(&arr, Tag::Alpha, Tag::Beta, 10).unwrap();
        assert_eq!(r, Recognition::Verified { k: 1, dual: 0, script: vec![] });
        arr.curves[1] = Curve::closed_from_crossings(&t, Tag::Beta, &[(1, true, 0.6)]);
        assert!(pi1_presentation(&arr, Tag::Alpha, Tag::Beta).is_trivially_trivial());
        let r = recognize_standard_pair(&arr, Tag::Alpha, Tag::Beta, 10).unwrap();
        assert_eq!(r, Recognition::Verified { k: 0, dual: 1, script: vec![] });
    }

    #[test]
    fn klein_pair_is_twisted_s2_bundle() {
        let mut arr = klein();
        let s = arr.surface.clone();
        arr.curves.push(Curve::closed_from_crossings(&s, Tag::Alpha, &[(1, true, 0.3)]));
        arr.curves.push(Curve::closed_from_crossings(&s, Tag::Beta, &[(1, true, 0.6)]));
        assert_eq!(homology_presentation(&arr, Tag::Alpha, Tag::Beta).1, AbelianGroup::free(1));
        let r = recognize_standard_pair(&arr, Tag::Alpha, Tag::Beta, 10).unwrap();
        assert!(matches!(r, Recognition::Verified { k: 1, .. }));
    }

    #[test]
    fn stabilization_and_slides() {
        let t = SurfaceComplex::from_words(&[vec!["a", "b", "-a", "-b"]]).unwrap();
        let mut arr = Arrangement::new(t.clone());
        arr.curves.push(Curve::closed_from_crossings(&t, Tag::Alpha, &[(0, true, 0.3)]));
        arr.curves.push(Curve::closed_from_crossings(&t, Tag::Beta, &[(0, true, 0.6)]));
        let st = stabilize_heegaard(&arr, Tag::Alpha, Tag::Beta);
        assert_eq!(st.surface.euler_characteristic(), -2);
        st.check_structure().unwrap();
        st.check_families().unwrap();
        assert!(validate_cut_system(&st, &st.family(Tag::Alpha)).is_empty());
        assert!(validate_cut_system(&st, &st.family(Tag::Beta)).is_empty());
        let sf = standard_form(&st, Tag::Alpha, Tag::Beta).unwrap();
        assert_eq!((sf.parallel(), sf.dual()), (1, 1));
        // slide alpha 0 over alpha 1 and recover the standard form by search
        let fa = st.family(Tag::Alpha);
        let bands = slide::candidate_bands(&st, fa[0], fa[1], &[Tag::Alpha]);
        let mut tried = 0;
        for band in bands.into_iter().take(6) {
            let mv = SlideMove { family: Tag::Alpha, moving: 0, over: 1, band };
            let Ok(slid) = apply_slide(&st, &mv, &[Tag::Beta]) else { continue };
            tried += 1;
            assert!(validate_cut_system(&slid, &slid.family(Tag::Alpha)).is_empty());
            let r = recognize_standard_pair(&slid, Tag::Alpha, Tag::Beta, 2000).unwrap();
            let Recognition::Verified { k, script, .. } = r else { panic!("not verified: {r:?}") };
            assert_eq!(k, 1);
            let pair = prepare_pair(&slid, Tag::Alpha, Tag::Beta).unwrap();
            let end = replay(&pair, Tag::Alpha, Tag::Beta, &script).unwrap();
            assert!(standard_form(&end, Tag::Alpha, Tag::Beta).is_some());
        }
        assert!(tried > 0);
    }
}
