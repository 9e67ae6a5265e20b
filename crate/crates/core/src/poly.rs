//! Polynomials over noncommutative finite rings.

use std::fmt;

use crate::error::{Error, Result};
use crate::ring::{Elem, FiniteRing, TableRing};

/// `sum_i c_i x^i` with coefficients lowest degree first. The zero polynomial
/// has no coefficients; otherwise the last coefficient is nonzero.
#[derive(Clone, Debug)]
pub struct NcPoly {
    ring: FiniteRing,
    coeffs: Vec<Elem>,
}

impl PartialEq for NcPoly {
    fn eq(&self, other: &Self) -> bool {
        self.ring.same_ring(&other.ring) && self.coeffs == other.coeffs
    }
}

impl Eq for NcPoly {}

impl NcPoly {
    pub fn new(ring: &FiniteRing, mut coeffs: Vec<Elem>) -> Result<Self> {
        if coeffs.iter().any(|c| !ring.contains(c)) {
            return Err(Error::ForeignElement { ring: ring.name().to_string() });
        }
        while coeffs.last().is_some_and(|c| ring.is_zero(c)) {
            coeffs.pop();
        }
        Ok(NcPoly { ring: ring.clone(), coeffs })
    }

    pub fn zero(ring: &FiniteRing) -> Self {
        NcPoly { ring: ring.clone(), coeffs: Vec::new() }
    }

    /// Polynomial over a table ring from element indices.
    pub fn from_indices(ring: &FiniteRing, indices: &[usize]) -> Result<Self> {
        let coeffs = indices
            .iter()
            .map(|&i| ring.element(i))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ring, coeffs)
    }

    pub fn ring(&self) -> &FiniteRing {
        &self.ring
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn same_ring(&self, other: &NcPoly) -> Result<()> {
        if self.ring.same_ring(&other.ring) {
            Ok(())
        } else {
            Err(Error::RingMismatch)
        }
    }

    pub fn add(&self, other: &NcPoly) -> Result<NcPoly> {
        self.same_ring(other)?;
        let len = self.coeffs.len().max(other.coeffs.len());
        let zero = self.ring.zero();
        let coeffs = (0..len)
            .map(|i| {
                let a = self.coeffs.get(i).unwrap_or(&zero);
                let b = other.coeffs.get(i).unwrap_or(&zero);
                self.ring.add(a, b)
            })
            .collect::<Result<Vec<_>>>()?;
        NcPoly::new(&self.ring, coeffs)
    }

    /// Product with `self` as the left factor: the coefficient of `x^k` is
    /// `sum_{i+j=k} a_i b_j`.
    pub fn mul(&self, other: &NcPoly) -> Result<NcPoly> {
        self.same_ring(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(NcPoly::zero(&self.ring));
        }
        let r = &self.ring;
        let mut out = vec![r.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = r.add(&out[i + j], &r.mul(a, b)?)?;
            }
        }
        NcPoly::new(r, out)
    }

    /// Every `(i, j, a_i b_j)`, `i`-major.
    pub fn coefficient_products(&self, other: &NcPoly) -> Result<Vec<(usize, usize, Elem)>> {
        self.same_ring(other)?;
        let mut out = Vec::with_capacity(self.coeffs.len() * other.coeffs.len());
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out.push((i, j, self.ring.mul(a, b)?));
            }
        }
        Ok(out)
    }

    pub fn labels(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| self.ring.label(c)).collect()
    }
}

impl fmt::Display for NcPoly {
    /// Nonzero terms as `label·x^i`, joined with ` + `.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !self.ring.is_zero(c))
            .map(|(i, c)| {
                let l = self.ring.label(c);
                if i == 0 {
                    l
                } else {
                    format!("{l}·x^{i}")
                }
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// Convolution of index-coded polynomials over a table ring; result is not
/// normalized (length `f.len() + g.len() - 1`).
pub fn convolve(t: &TableRing, f: &[usize], g: &[usize]) -> Vec<usize> {
    if f.is_empty() || g.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0usize; f.len() + g.len() - 1];
    for (i, &a) in f.iter().enumerate() {
        for (j, &b) in g.iter().enumerate() {
            out[i + j] = t.add(out[i + j], t.mul(a, b));
        }
    }
    out
}
