//! Smith normal form over the integers and finitely generated abelian groups.

use std::fmt;

use serde::{Deserialize, Serialize};

/// `ℤ^rank ⊕ ⊕ ℤ/dᵢ` with `d₁ | d₂ | …`, every `dᵢ > 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianGroup {
    pub rank: usize,
    pub torsion: Vec<u64>,
}

impl AbelianGroup {
    pub fn trivial() -> Self {
        AbelianGroup { rank: 0, torsion: Vec::new() }
    }
    pub fn free(rank: usize) -> Self {
        AbelianGroup { rank, torsion: Vec::new() }
    }
    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }
    pub fn is_free(&self) -> bool {
        self.torsion.is_empty()
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for d in &self.torsion {
            parts.push(format!("Z/{d}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Diagonal of the Smith normal form (nonzero entries only, in divisibility order).
pub fn smith_diagonal(rows: &[Vec<i64>], cols: usize) -> Vec<u64> {
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| {
            assert_eq!(r.len(), cols, "ragged matrix");
            r.iter().map(|&x| x as i128).collect()
        })
        .collect();
    let nr = m.len();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < nr.min(cols) {
        // pivot: smallest nonzero magnitude in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..nr {
            for j in t..cols {
                if m[i][j] != 0 && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        m.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let p = m[t][t];
            let mut dirty = false;
            for i in t + 1..nr {
                let q = m[i][t] / p;
                if q != 0 {
                    for j in t..cols {
                        m[i][j] -= q * m[t][j];
                    }
                }
                if m[i][t] != 0 {
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                let q = m[t][j] / p;
                if q != 0 {
                    for row in m.iter_mut().skip(t) {
                        row[j] -= q * row[t];
                    }
                }
                if m[t][j] != 0 {
                    dirty = true;
                }
            }
            if !dirty {
                // divisibility: fold in any row whose entries p fails to divide
                let bad = (t + 1..nr).find(|&i| (t + 1..cols).any(|j| m[i][j] % p != 0));
                match bad {
                    None => break,
                    Some(i) => {
                        for j in t..cols {
                            let v = m[i][j];
                            m[t][j] += v;
                        }
                        continue;
                    }
                }
            }
            // move the smallest nonzero of row t / column t into the pivot
            let mut bi = (t, t);
            for i in t..nr {
                if m[i][t] != 0 && m[i][t].abs() < m[bi.0][bi.1].abs() {
                    bi = (i, t);
                }
            }
            for j in t..cols {
                if m[t][j] != 0 && m[t][j].abs() < m[bi.0][bi.1].abs() {
                    bi = (t, j);
                }
            }
            m.swap(t, bi.0);
            for row in m.iter_mut() {
                row.swap(t, bi.1);
            }
        }
        diag.push(m[t][t].unsigned_abs() as u64);
        t += 1;
    }
    diag
}

/// Cokernel of the relation matrix (rows are relations among `cols` generators).
pub fn cokernel(rows: &[Vec<i64>], cols: usize) -> AbelianGroup {
    let d = smith_diagonal(rows, cols);
    AbelianGroup {
        rank: cols - d.len(),
        torsion: d.into_iter().filter(|&x| x > 1).collect(),
    }
}

/// Rank over ℤ/2.
pub fn rank_mod2(rows: &[Vec<i64>], cols: usize) -> usize {
    let mut m: Vec<Vec<bool>> = rows.iter().map(|r| r.iter().map(|x| x.rem_euclid(2) == 1).collect()).collect();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| m[i][c]) else { continue };
        m.swap(rank, p);
        for i in 0..m.len() {
            if i != rank && m[i][c] {
                for j in c..cols {
                    let v = m[rank][j];
                    m[i][j] ^= v;
                }
            }
        }
        rank += 1;
    }
    rank
}
