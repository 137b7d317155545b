//! Fundamental group of a surface from its dual complex, and quotients by
//! curves (handlebodies, Heegaard splittings, trisected 4-manifolds).

use std::collections::VecDeque;

use crate::arrangement::Arrangement;
use crate::homology::AbelianGroup;
use crate::presentation::{Presentation, Word};
use crate::surface::{EdgeId, SurfaceComplex};

/// π₁(Σ) with one generator per interior edge outside a spanning tree of the
/// dual graph, and one relator per interior vertex.
#[derive(Clone, Debug)]
pub struct DualPresentation {
    pub presentation: Presentation,
    pub gen_of_edge: Vec<Option<usize>>,
}

impl DualPresentation {
    pub fn new(s: &SurfaceComplex) -> Self {
        let np = s.num_polygons();
        let mut tree = vec![false; s.num_edges()];
        let mut seen = vec![false; np];
        seen[0] = true;
        let mut q = VecDeque::from([0]);
        while let Some(p) = q.pop_front() {
            for sd in &s.polygons()[p] {
                let o = s.occurrences(sd.edge);
                if o.len() != 2 {
                    continue;
                }
                let other = if o[0].poly == p { o[1].poly } else { o[0].poly };
                if !seen[other] {
                    seen[other] = true;
                    tree[sd.edge] = true;
                    q.push_back(other);
                }
            }
        }
        let mut gen_of_edge = vec![None; s.num_edges()];
        let mut n = 0;
        for e in 0..s.num_edges() {
            if s.is_interior(e) && !tree[e] {
                gen_of_edge[e] = Some(n);
                n += 1;
            }
        }
        let mut dp = DualPresentation { presentation: Presentation::new(n, Vec::new()), gen_of_edge };
        let mut done = vec![false; s.num_vertices()];
        for p in 0..np {
            for c in 0..s.poly_len(p) {
                let v = s.corner_vertex(p, c);
                if done[v] {
                    continue;
                }
                done[v] = true;
                if let Some(link) = s.vertex_link(p, c) {
                    let w: Vec<(EdgeId, i8)> =
                        link.iter().map(|st| (s.side(st.exit).edge, if s.occ_index(st.exit) == 0 { 1 } else { -1 })).collect();
                    let r = dp.word(&w);
                    dp.presentation.relators.push(r);
                }
            }
        }
        dp
    }

    /// Group word of an edge-crossing sequence.
    pub fn word(&self, xs: &[(EdgeId, i8)]) -> Word {
        xs.iter()
            .filter_map(|&(e, sgn)| self.gen_of_edge[e].map(|g| (g as i32 + 1) * sgn as i32))
            .collect()
    }
}

/// π₁(Σ) modulo the normal closure of the given closed curves.
pub fn quotient(arr: &Arrangement, curves: &[usize]) -> Presentation {
    let dp = DualPresentation::new(&arr.surface);
    let mut p = dp.presentation.clone();
    for &c in curves {
        p.relators.push(dp.word(&arr.curves[c].crossing_word(&arr.surface)));
    }
    p
}

pub fn quotient_homology(arr: &Arrangement, curves: &[usize]) -> AbelianGroup {
    quotient(arr, curves).abelianization()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::{Curve, Tag};

    fn h1(words: &[&[&str]]) -> AbelianGroup {
        let v: Vec<Vec<&str>> = words.iter().map(|x| x.to_vec()).collect();
        let s = SurfaceComplex::from_words(&v).unwrap();
        DualPresentation::new(&s).presentation.abelianization()
    }

    #[test]
    fn surface_homology() {
        assert_eq!(h1(&[&["a", "b", "-a", "-b"]]), AbelianGroup::free(2));
        assert_eq!(h1(&[&["a", "a"]]), AbelianGroup { rank: 0, torsion: vec![2] });
        assert_eq!(h1(&[&["a", "b", "a", "-b"]]), AbelianGroup { rank: 1, torsion: vec![2] });
        assert_eq!(h1(&[&["a", "-a"]]), AbelianGroup::trivial());
        // Möbius band and annulus retract to circles
        assert_eq!(h1(&[&["a", "b", "a", "c"]]), AbelianGroup::free(1));
        assert_eq!(h1(&[&["a", "b", "-a", "c"]]), AbelianGroup::free(1));
        // two polygons: torus split in two
        assert_eq!(h1(&[&["a", "b", "c"], &["-c", "-a", "-b"]]).rank, 2);
    }

    #[test]
    fn handlebody_quotients() {
        let s = SurfaceComplex::from_words(&[vec!["a", "b", "-a", "-b"]]).unwrap();
        let mut arr = Arrangement::new(s.clone());
        arr.curves.push(Curve::closed_from_crossings(&s, Tag::Alpha, &[(0, true, 0.5)]));
        arr.curves.push(Curve::closed_from_crossings(&s, Tag::Beta, &[(1, true, 0.5)]));
        arr.curves.push(Curve::closed_from_crossings(&s, Tag::Gamma, &[(0, true, 0.25)]));
        assert_eq!(quotient_homology(&arr, &[0]), AbelianGroup::free(1));
        assert_eq!(quotient_homology(&arr, &[0, 1]), AbelianGroup::trivial());
        assert_eq!(quotient_homology(&arr, &[0, 2]), AbelianGroup::free(1));
        assert!(quotient(&arr, &[0, 1]).simplify().presentation.is_trivially_trivial());
    }
}
