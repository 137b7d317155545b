//! Finite group presentations with bounded Tietze simplification.
//!
//! Letters are nonzero `i32`: `g + 1` for generator `g`, `-(g + 1)` for its inverse.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::homology::{cokernel, AbelianGroup};

pub type Word = Vec<i32>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub generators: usize,
    pub relators: Vec<Word>,
}

/// Simplification result: the new presentation plus, for every original
/// generator, its image as a word in the new generators.
#[derive(Clone, Debug)]
pub struct Simplified {
    pub presentation: Presentation,
    pub images: Vec<Word>,
}

impl Simplified {
    pub fn map_word(&self, w: &[i32]) -> Word {
        let mut out = Vec::new();
        for &l in w {
            let img = &self.images[l.unsigned_abs() as usize - 1];
            if l > 0 {
                out.extend_from_slice(img);
            } else {
                out.extend(img.iter().rev().map(|x| -x));
            }
        }
        free_reduce(&out)
    }
}

pub fn invert(w: &[i32]) -> Word {
    w.iter().rev().map(|x| -x).collect()
}

pub fn free_reduce(w: &[i32]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

pub fn cyclic_reduce(w: &[i32]) -> Word {
    let mut v = free_reduce(w);
    while v.len() >= 2 && v[0] == -v[v.len() - 1] {
        v.pop();
        v.remove(0);
    }
    v
}

/// Least rotation of `w` or its inverse, so cyclic conjugates compare equal.
fn canonical_cyclic(w: &[i32]) -> Word {
    let mut best: Option<Word> = None;
    for cand in [w.to_vec(), invert(w)] {
        for r in 0..cand.len().max(1) {
            let mut rot = cand[r..].to_vec();
            rot.extend_from_slice(&cand[..r]);
            if best.as_ref().is_none_or(|b| rot < *b) {
                best = Some(rot);
            }
        }
    }
    best.unwrap_or_default()
}

impl Presentation {
    pub fn new(generators: usize, relators: Vec<Word>) -> Self {
        Presentation { generators, relators }
    }

    /// Abelianization via Smith normal form.
    pub fn abelianization(&self) -> AbelianGroup {
        let rows: Vec<Vec<i64>> = self.relators.iter().map(|r| self.exponent_sums(r)).collect();
        cokernel(&rows, self.generators)
    }

    pub fn exponent_sums(&self, w: &[i32]) -> Vec<i64> {
        let mut v = vec![0i64; self.generators];
        for &l in w {
            v[l.unsigned_abs() as usize - 1] += l.signum() as i64;
        }
        v
    }

    /// Whether `w` vanishes in the abelianization. The quotient by an extra
    /// relator is isomorphic to the original exactly when the relator is
    /// already zero, since finitely generated abelian groups are Hopfian.
    pub fn abelian_word_is_zero(&self, w: &[i32]) -> bool {
        let mut with = self.clone();
        with.relators.push(w.to_vec());
        with.abelianization() == self.abelianization()
    }

    /// Bounded Tietze simplification: reduce, drop duplicates, and eliminate
    /// any generator that appears exactly once in some relator.
    pub fn simplify(&self) -> Simplified {
        const MAX_LEN: usize = 20_000;
        let mut gens: Vec<usize> = (0..self.generators).collect(); // live original ids
        let mut images: Vec<Word> = (0..self.generators).map(|g| vec![g as i32 + 1]).collect();
        let mut rels: Vec<Word> = self.relators.clone();
        loop {
            let mut seen = BTreeSet::new();
            rels = rels
                .iter()
                .map(|r| cyclic_reduce(r))
                .filter(|r| !r.is_empty())
                .filter(|r| seen.insert(canonical_cyclic(r)))
                .collect();
            // pick the shortest relator containing a generator exactly once
            let mut pick: Option<(usize, i32)> = None;
            for (ri, r) in rels.iter().enumerate() {
                if pick.is_some_and(|(pi, _)| rels[pi].len() <= r.len()) {
                    continue;
                }
                for &l in r {
                    let g = l.abs();
                    if r.iter().filter(|x| x.abs() == g).count() == 1 {
                        pick = Some((ri, l));
                        break;
                    }
                }
            }
            let Some((ri, l)) = pick else { break };
            let r = rels.remove(ri);
            let pos = r.iter().position(|&x| x == l).unwrap();
            // r = u l v = 1  ⇒  l = u⁻¹ v⁻¹
            let mut rest = r[pos + 1..].to_vec();
            rest.extend_from_slice(&r[..pos]);
            let mut sol = invert(&rest);
            if l < 0 {
                sol = invert(&sol);
            }
            let g = l.abs();
            let subst = |w: &[i32]| -> Word {
                let mut out = Vec::new();
                for &x in w {
                    if x == g {
                        out.extend_from_slice(&sol);
                    } else if x == -g {
                        out.extend(invert(&sol));
                    } else {
                        out.push(x);
                    }
                }
                free_reduce(&out)
            };
            rels = rels.iter().map(|w| subst(w)).collect();
            for img in images.iter_mut() {
                *img = subst(img);
            }
            gens.retain(|&x| x as i32 + 1 != g);
            if rels.iter().map(Vec::len).sum::<usize>() > MAX_LEN {
                break;
            }
        }
        // relabel surviving generators densely
        let relabel = |w: &[i32]| -> Word {
            w.iter()
                .map(|&x| {
                    let i = gens.iter().position(|&y| y as i32 + 1 == x.abs()).expect("live generator") as i32 + 1;
                    i * x.signum()
                })
                .collect()
        };
        let mut relators: Vec<Word> = rels.iter().map(|r| canonical_cyclic(&relabel(r))).collect();
        relators.sort();
        Simplified {
            presentation: Presentation { generators: gens.len(), relators },
            images: images.iter().map(|w| relabel(w)).collect(),
        }
    }

    pub fn is_trivially_trivial(&self) -> bool {
        self.generators == 0
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |g: usize| format!("x{}", g + 1);
        let gens: Vec<String> = (0..self.generators).map(name).collect();
        let rels: Vec<String> = self
            .relators
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&l| {
                        let n = name(l.unsigned_abs() as usize - 1);
                        if l < 0 {
                            format!("{n}^-1")
                        } else {
                            n
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        write!(f, "< {} | {} >", gens.join(", "), rels.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reductions() {
        assert_eq!(free_reduce(&[1, 2, -2, -1, 3]), vec![3]);
        assert_eq!(cyclic_reduce(&[-1, 2, 3, 1]), vec![2, 3]);
    }

    #[test]
    fn simplify_eliminates() {
        // <a, b | a b> = Z
        let p = Presentation::new(2, vec![vec![1, 2]]);
        let s = p.simplify();
        assert_eq!(s.presentation.generators, 1);
        assert!(s.presentation.relators.is_empty());
        // <a | a> trivial
        let s = Presentation::new(1, vec![vec![1]]).simplify();
        assert!(s.presentation.is_trivially_trivial());
        // <a | a a> keeps its relator
        let s = Presentation::new(1, vec![vec![1, 1]]).simplify();
        assert_eq!(s.presentation.relators.len(), 1);
        assert_eq!(s.presentation.abelianization().torsion, vec![2]);
    }

    #[test]
    fn images_track_substitution() {
        // <a, b | a b^-1> : b = a, image of b is the surviving generator
        let p = Presentation::new(2, vec![vec![1, -2]]);
        let s = p.simplify();
        assert_eq!(s.presentation.generators, 1);
        assert_eq!(s.map_word(&[1, -2]), Vec::<i32>::new());
    }

    #[test]
    fn abelian_membership() {
        let p = Presentation::new(2, vec![vec![1, 1]]);
        assert!(p.abelian_word_is_zero(&[1, 1, 1, 1]));
        assert!(!p.abelian_word_is_zero(&[1]));
        assert!(!p.abelian_word_is_zero(&[2]));
        assert!(p.abelian_word_is_zero(&[1, 2, -1, -2]));
    }
}
