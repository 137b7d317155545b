//! Small hand-built diagrams used by tests, the CLI corpus and examples.

use crate::arrangement::{Arrangement, Curve, Port, Segment, Tag};
use crate::bridge::{self, ShadowDiagram};
use crate::relative::{self, CircleMatch, RelativeError};
use crate::surface::SurfaceComplex;
use crate::{heegaard, slide, trisection};

fn surface(words: &[&[&str]]) -> SurfaceComplex {
    let v: Vec<Vec<&str>> = words.iter().map(|w| w.to_vec()).collect();
    SurfaceComplex::from_words(&v).expect("fixture surface")
}

fn chords(tag: Tag, xs: &[(usize, f64, usize, f64)]) -> Curve {
    let segs = xs
        .iter()
        .map(|&(s1, t1, s2, t2)| Segment { poly: 0, from: Port::Side { side: s1, t: t1 }, to: Port::Side { side: s2, t: t2 } })
        .collect();
    Curve { tag, closed: true, segs }
}

/// Genus-0 diagram of S⁴: the sphere with empty families.
pub fn sphere() -> Arrangement {
    Arrangement::new(surface(&[&["a", "-a"]]))
}

/// Genus-1 diagram of S⁴ on the torus (α‖β, γ dual).
pub fn torus_s4() -> Arrangement {
    let s = surface(&[&["a", "b", "-a", "-b"]]);
    let mut arr = Arrangement::new(s.clone());
    arr.curves.push(Curve::closed_from_crossings(&s, Tag::Alpha, &[(0, true, 0.25)]));
    arr.curves.push(Curve::closed_from_crossings(&s, Tag::Beta, &[(0, true, 0.75)]));
    arr.curves.push(Curve::closed_from_crossings(&s, Tag::Gamma, &[(1, true, 0.5)]));
    arr
}

/// Klein bottle with three parallel two-sided curves: S³ ×̃ S¹.
pub fn klein() -> Arrangement {
    let s = surface(&[&["a", "b", "a", "-b"]]);
    let mut arr = Arrangement::new(s.clone());
    for (t, x) in [(Tag::Alpha, 0.25), (Tag::Beta, 0.5), (Tag::Gamma, 0.75)] {
        arr.curves.push(Curve::closed_from_crossings(&s, t, &[(1, true, x)]));
    }
    arr
}

/// Möbius band with empty families: a relative diagram of B³ ×̃ S¹.
pub fn mobius() -> Arrangement {
    Arrangement::new(surface(&[&["a", "b", "a", "c"]]))
}

/// Punctured Klein bottle with the core curve in all three families.
pub fn punctured_klein() -> Arrangement {
    let s = surface(&[&["a", "b", "a", "-b", "d"]]);
    let mut arr = Arrangement::new(s.clone());
    for (t, x) in [(Tag::Alpha, 0.25), (Tag::Beta, 0.5), (Tag::Gamma, 0.75)] {
        arr.curves.push(Curve::closed_from_crossings(&s, t, &[(1, true, x)]));
    }
    arr
}

/// Three cross-caps with a hole; each family is one curve through two of
/// the cross-caps and the three curves meet pairwise once.
pub fn rp2_disk_bundle() -> Arrangement {
    let mut arr = Arrangement::new(surface(&[&["x", "x", "y", "y", "z", "z", "d"]]));
    arr.curves.push(chords(Tag::Alpha, &[(1, 0.6, 2, 0.3), (3, 0.3, 0, 0.6)]));
    arr.curves.push(chords(Tag::Beta, &[(3, 0.6, 4, 0.3), (5, 0.3, 2, 0.6)]));
    arr.curves.push(chords(Tag::Gamma, &[(5, 0.6, 0, 0.3), (1, 0.3, 4, 0.6)]));
    arr
}

fn single_match() -> [CircleMatch; 1] {
    [CircleMatch { first: 0, second: 0, offset: 0, reflection: false }]
}

/// RP⁴ as the union of the two disk bundles over RP².
pub fn rp4(budget: usize) -> Result<Arrangement, RelativeError> {
    relative::glue(&mobius(), &rp2_disk_bundle(), &single_match(), budget)
}

/// The S²-bundle over RP² obtained by doubling the disk bundle.
pub fn s2_bundle_rp2(budget: usize) -> Result<Arrangement, RelativeError> {
    let d = rp2_disk_bundle();
    relative::glue(&d, &d, &single_match(), budget)
}

/// The disk bundle doubled through one extra full turn of the binding,
/// standing in for the sphere twist: the circle sum of RP⁴ with itself.
pub fn rp4_circle_sum(budget: usize) -> Result<Arrangement, RelativeError> {
    let d = rp2_disk_bundle();
    let turn = d.surface.boundary_circles()[0].len();
    relative::glue(&d, &d, &[CircleMatch { first: 0, second: 0, offset: turn, reflection: false }], budget)
}

/// S⁴ as the orientation double cover of RP⁴.
pub fn s4_from_rp4(budget: usize) -> Result<Arrangement, Box<dyn std::error::Error>> {
    Ok(trisection::orientation_double_cover_diagram(&rp4(budget)?)?)
}

/// Shadows of a projective plane: four marks on one edge, every pairwise
/// union a single loop. Parameters (b; c) = (2; 1,1,1).
pub fn rp2_shadows(base: &Arrangement) -> ShadowDiagram {
    let lm = bridge::local_marks(base, 4).expect("local marks");
    let mut d = lm.diagram.clone();
    d.arr.curves.push(lm.chord(Tag::ShadowAlpha, 0, 1, false));
    d.arr.curves.push(lm.chord(Tag::ShadowAlpha, 2, 3, false));
    d.arr.curves.push(lm.chord(Tag::ShadowBeta, 1, 2, true));
    d.arr.curves.push(lm.chord(Tag::ShadowBeta, 3, 0, true));
    d.arr.curves.push(lm.chord(Tag::ShadowGamma, 0, 2, false));
    d.arr.curves.push(lm.chord(Tag::ShadowGamma, 1, 3, true));
    d
}

/// Shadows of a sphere: two marks, one arc per family; the α arc crosses
/// the edge piece between the marks once.
pub fn sphere_shadows(base: &Arrangement) -> ShadowDiagram {
    let lm = bridge::local_marks(base, 2).expect("local marks");
    let mut d = lm.diagram.clone();
    d.arr.curves.push(lm.wiggle(Tag::ShadowAlpha, 0, 0.5));
    d.arr.curves.push(lm.chord(Tag::ShadowBeta, 0, 1, false));
    d.arr.curves.push(lm.chord(Tag::ShadowGamma, 0, 1, true));
    d
}

/// RP² in RP⁴ as a (2,1;2,1) shadow diagram.
pub fn rp2_in_rp4(budget: usize) -> Result<ShadowDiagram, RelativeError> {
    Ok(rp2_shadows(&rp4(budget)?))
}

/// A sphere in the S²-bundle over RP² as a (3,1;1,1) shadow diagram.
pub fn sphere_in_s2_bundle(budget: usize) -> Result<ShadowDiagram, RelativeError> {
    Ok(sphere_shadows(&s2_bundle_rp2(budget)?))
}

/// Grow a diagram by `stabilizations` random stabilizations and up to
/// `slides` random handle slides within a family. `pick(n)` chooses an
/// index below `n`; callers supply the randomness.
pub fn grow(seed: &Arrangement, stabilizations: usize, slides: usize, pick: &mut dyn FnMut(usize) -> usize) -> Arrangement {
    let mut arr = seed.clone();
    for _ in 0..stabilizations {
        arr = trisection::stabilize(&arr, 1 + pick(3)).expect("sector in range");
    }
    for _ in 0..slides {
        let fam = trisection::FAMILIES[pick(3)];
        let n = arr.count(fam);
        if n < 2 {
            continue;
        }
        let moving = pick(n);
        let over = (moving + 1 + pick(n - 1)) % n;
        let (i, j) = (arr.family(fam)[moving], arr.family(fam)[over]);
        let bands = slide::candidate_bands(&arr, i, j, &[fam]);
        if bands.is_empty() {
            continue;
        }
        let mv = heegaard::SlideMove { family: fam, moving, over, band: bands[pick(bands.len())].clone() };
        if let Ok(next) = heegaard::apply_slide(&arr, &mv, &[]) {
            arr = next;
        }
    }
    arr.normalize();
    arr
}
