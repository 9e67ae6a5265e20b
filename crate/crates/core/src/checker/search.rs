//! Backtracking search for annihilating polynomial pairs.
//!
//! For a fixed nonzero `f = a_0 + ... + a_n x^n` with lowest nonzero
//! coefficient `a_v`, every `g = b_0 + ... + b_m x^m` with `f g = 0` satisfies
//!
//! ```text
//! a_v b_j = -(a_{v+1} b_{j-1} + ... + a_{v+j} b_0)      for j = 0..=m
//! ```
//!
//! so `b_j` ranges over a fiber of left multiplication by `a_v`. The
//! remaining convolution coefficients (degrees above `v + m`) are checked at
//! the leaves.

use std::sync::OnceLock;

use crate::ring::TableRing;

/// Inverse images of left multiplication, one lazily built index per
/// left factor.
pub struct FiberIndex<'a> {
    t: &'a TableRing,
    rows: Vec<OnceLock<Fiber>>,
}

struct Fiber {
    offsets: Vec<u32>,
    items: Vec<u16>,
}

impl<'a> FiberIndex<'a> {
    pub fn new(t: &'a TableRing) -> Self {
        FiberIndex {
            t,
            rows: (0..t.size()).map(|_| OnceLock::new()).collect(),
        }
    }

    /// `{b : a b = c}` in element order.
    pub fn fiber(&self, a: usize, c: usize) -> &[u16] {
        let fiber = self.rows[a].get_or_init(|| {
            let row = self.t.mul_row(a);
            let n = self.t.size();
            let mut offsets = vec![0u32; n + 1];
            for &v in row {
                offsets[v as usize + 1] += 1;
            }
            for i in 0..n {
                offsets[i + 1] += offsets[i];
            }
            let mut fill = offsets.clone();
            let mut items = vec![0u16; n];
            for (b, &v) in row.iter().enumerate() {
                items[fill[v as usize] as usize] = b as u16;
                fill[v as usize] += 1;
            }
            Fiber { offsets, items }
        });
        &fiber.items[fiber.offsets[c] as usize..fiber.offsets[c + 1] as usize]
    }
}

#[derive(Debug, Default, Clone)]
pub(crate) struct FOutcome {
    pub leaves: u64,
    /// `(g, i, j)`: annihilating partner and the first offending product.
    pub hit: Option<(Vec<usize>, usize, usize)>,
}

pub(crate) struct Searcher<'a> {
    pub t: &'a TableRing,
    pub fibers: &'a FiberIndex<'a>,
    pub in_target: &'a [bool],
    /// `a R` lies inside the target, so `a` never yields a violation.
    pub row_safe: &'a [bool],
    pub deg_g: usize,
}

impl Searcher<'_> {
    pub fn search(&self, f: &[usize]) -> FOutcome {
        let mut out = FOutcome::default();
        if f.iter().all(|&a| self.row_safe[a]) {
            return out;
        }
        let Some(v) = f.iter().position(|&a| a != 0) else {
            return out;
        };
        let mut g = vec![0usize; self.deg_g + 1];
        out.hit = self.extend(f, v, &mut g, 0, &mut out.leaves);
        out
    }

    fn extend(
        &self,
        f: &[usize],
        v: usize,
        g: &mut [usize],
        j: usize,
        leaves: &mut u64,
    ) -> Option<(Vec<usize>, usize, usize)> {
        let t = self.t;
        if j > self.deg_g {
            *leaves += 1;
            return self.leaf(f, v, g);
        }
        let n = f.len() - 1;
        let mut s = 0;
        for i in v + 1..=(v + j).min(n) {
            s = t.add(s, t.mul(f[i], g[j - (i - v)]));
        }
        let rhs = t.neg(s);
        for &b in self.fibers.fiber(f[v], rhs) {
            g[j] = b as usize;
            if let Some(hit) = self.extend(f, v, g, j + 1, leaves) {
                return Some(hit);
            }
        }
        g[j] = 0;
        None
    }

    fn leaf(&self, f: &[usize], v: usize, g: &[usize]) -> Option<(Vec<usize>, usize, usize)> {
        let t = self.t;
        let len_g = g.iter().rposition(|&b| b != 0)? + 1;
        let (n, m) = (f.len() - 1, self.deg_g);
        for k in v + m + 1..=n + m {
            let mut s = 0;
            for i in k - m..=n.min(k) {
                s = t.add(s, t.mul(f[i], g[k - i]));
            }
            if s != 0 {
                return None;
            }
        }
        for (i, &a) in f.iter().enumerate() {
            for (j, &b) in g[..len_g].iter().enumerate() {
                if !self.in_target[t.mul(a, b)] {
                    return Some((g[..len_g].to_vec(), i, j));
                }
            }
        }
        None
    }
}

/// Number of nonzero polynomials of degree exactly `d` over `s` elements.
pub(crate) fn count_of_degree(s: u64, d: usize) -> u64 {
    (s - 1) * s.pow(d as u32)
}

/// The `rank`-th nonzero polynomial of degree at most `max_deg`, ordered by
/// degree and then lexicographically by `(a_0, ..., a_d)`.
pub(crate) fn decode_f(s: u64, max_deg: usize, mut rank: u64) -> Vec<usize> {
    for d in 0..=max_deg {
        let count = count_of_degree(s, d);
        if rank < count {
            let lead = rank % (s - 1) + 1;
            let mut rest = rank / (s - 1);
            let mut coeffs = vec![0usize; d + 1];
            coeffs[d] = lead as usize;
            for i in (0..d).rev() {
                coeffs[i] = (rest % s) as usize;
                rest /= s;
            }
            return coeffs;
        }
        rank -= count;
    }
    panic!("rank out of range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{gf, matrix_ring, zmod};
    use crate::testutil::at;

    #[test]
    fn fibers() {
        let z4 = zmod(4).unwrap();
        let t = z4.require_table().unwrap();
        let idx = FiberIndex::new(t);
        assert_eq!(idx.fiber(2, 0), [0, 2]);
        assert_eq!(idx.fiber(2, 1), [] as [u16; 0]);
        for c in 0..4 {
            assert_eq!(idx.fiber(1, c), [c as u16]);
        }
        let m2 = matrix_ring(2, &gf(2, 1).unwrap()).unwrap().materialize(64).unwrap();
        let tm = m2.require_table().unwrap();
        let e11 = at(&m2, "[[1,0],[0,0]]");
        let fm = FiberIndex::new(tm);
        let fiber = fm.fiber(e11, e11);
        assert_eq!(fiber.len(), 4);
        assert!(fiber.iter().all(|&b| tm.mul(e11, b as usize) == e11));
    }

    #[test]
    fn canonical_f_order() {
        // over a 3-element ring: degree 0 then degree 1 with a_0 most significant
        let all: Vec<Vec<usize>> = (0..8).map(|r| decode_f(3, 1, r)).collect();
        assert_eq!(
            all,
            [vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]
        );
        assert_eq!(count_of_degree(3, 0) + count_of_degree(3, 1), 8);
    }
}
