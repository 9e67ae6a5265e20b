//! Structural invariants of finite rings: nilpotents, units, idempotents,
//! center, the Jacobson radical (quasi-regularity scan plus a literal
//! maximal-left-ideal oracle), locality, abelianness, and non-nilpotency
//! certificates for elements of power-series rings.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ring::{Computed, Elem, FiniteRing, TableRing};

/// Default size limit of [`jacobson_radical_oracle`].
pub const ORACLE_CAP: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    Nilpotents,
    Units,
    Idempotents,
    Center,
    Radical,
    Ideal,
}

/// A subset of a table ring, members in element order.
#[derive(Clone, Debug)]
pub struct ElementSet {
    ring: FiniteRing,
    kind: SetKind,
    members: Vec<usize>,
    mask: Vec<bool>,
}

impl ElementSet {
    pub fn from_mask(ring: &FiniteRing, kind: SetKind, mask: Vec<bool>) -> Self {
        let members = mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect();
        ElementSet {
            ring: ring.clone(),
            kind,
            members,
            mask,
        }
    }

    pub fn from_members(ring: &FiniteRing, kind: SetKind, members: &[usize]) -> Self {
        let size = ring.size() as usize;
        let mut mask = vec![false; size];
        for &m in members {
            mask[m] = true;
        }
        Self::from_mask(ring, kind, mask)
    }

    pub fn ring(&self) -> &FiniteRing {
        &self.ring
    }

    pub fn kind(&self) -> SetKind {
        self.kind
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn contains(&self, index: usize) -> bool {
        self.mask.get(index).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        let t = self.ring.table().expect("element sets live on table rings");
        self.members.iter().map(|&i| t.label(i).to_string()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Nilpotency {
    /// Least `n >= 1` with `x^n = 0`.
    Nilpotent(u32),
    NotNilpotent,
}

impl Nilpotency {
    pub fn is_nilpotent(self) -> bool {
        matches!(self, Nilpotency::Nilpotent(_))
    }
}

/// Powers `x, x^2, ...` up to the first zero or the first repeated power
/// (inclusive).
pub fn power_trace(ring: &FiniteRing, x: &Elem) -> Result<Vec<Elem>> {
    let mut trace = Vec::new();
    let mut seen = HashSet::new();
    let mut p = x.clone();
    loop {
        trace.push(p.clone());
        if ring.is_zero(&p) || !seen.insert(p.clone()) {
            return Ok(trace);
        }
        p = ring.mul(&p, x)?;
    }
}

/// Works on computed rings too; the scan stops at zero or at the first
/// repeated power, so it takes at most `size + 1` multiplications.
pub fn is_nilpotent(ring: &FiniteRing, x: &Elem) -> Result<Nilpotency> {
    let trace = power_trace(ring, x)?;
    let last = trace.last().expect("trace is never empty");
    Ok(if ring.is_zero(last) {
        Nilpotency::Nilpotent(trace.len() as u32)
    } else {
        Nilpotency::NotNilpotent
    })
}

pub(crate) fn nilpotent_in_table(t: &TableRing, x: usize) -> bool {
    let mut seen = vec![false; t.size()];
    let mut p = x;
    loop {
        if p == 0 {
            return true;
        }
        if seen[p] {
            return false;
        }
        seen[p] = true;
        p = t.mul(p, x);
    }
}

pub fn nilpotent_mask(t: &TableRing) -> Vec<bool> {
    (0..t.size())
        .into_par_iter()
        .map(|x| nilpotent_in_table(t, x))
        .collect()
}

/// Units, found by a left-inverse scan of each row. In a finite ring a
/// one-sided inverse is two-sided; debug builds assert it.
pub fn unit_mask(t: &TableRing) -> Vec<bool> {
    let one = t.one() as u16;
    (0..t.size())
        .into_par_iter()
        .map(|x| match t.mul_row(x).iter().position(|&v| v == one) {
            Some(y) => {
                debug_assert_eq!(t.mul(y, x), t.one(), "right inverse is not a left inverse");
                true
            }
            None => false,
        })
        .collect()
}

pub fn idempotent_indices(t: &TableRing) -> Vec<usize> {
    (0..t.size()).filter(|&x| t.mul(x, x) == x).collect()
}

pub fn nilpotents(ring: &FiniteRing) -> Result<ElementSet> {
    let t = ring.require_table()?;
    Ok(ElementSet::from_mask(ring, SetKind::Nilpotents, nilpotent_mask(t)))
}

pub fn units(ring: &FiniteRing) -> Result<ElementSet> {
    let t = ring.require_table()?;
    Ok(ElementSet::from_mask(ring, SetKind::Units, unit_mask(t)))
}

pub fn idempotents(ring: &FiniteRing) -> Result<ElementSet> {
    let t = ring.require_table()?;
    Ok(ElementSet::from_members(ring, SetKind::Idempotents, &idempotent_indices(t)))
}

pub fn center(ring: &FiniteRing) -> Result<ElementSet> {
    let t = ring.require_table()?;
    let mask = (0..t.size())
        .into_par_iter()
        .map(|x| (0..t.size()).all(|y| t.mul(x, y) == t.mul(y, x)))
        .collect();
    Ok(ElementSet::from_mask(ring, SetKind::Center, mask))
}

/// `J(R) = {x : 1 - r x is a unit for every r}`.
pub fn jacobson_radical(ring: &FiniteRing) -> Result<ElementSet> {
    let t = ring.require_table()?;
    let units = unit_mask(t);
    let one = t.one();
    let mask = (0..t.size())
        .into_par_iter()
        .map(|x| (0..t.size()).all(|r| units[t.sub(one, t.mul(r, x))]))
        .collect();
    Ok(ElementSet::from_mask(ring, SetKind::Radical, mask))
}

/// Radical membership of a single element, recomputing unit status directly.
pub fn in_radical_direct(t: &TableRing, x: usize) -> bool {
    let one = t.one();
    (0..t.size()).all(|r| {
        let u = t.sub(one, t.mul(r, x));
        t.mul_row(u).iter().any(|&v| v as usize == one)
    })
}

type Bits = u64;

fn additive_closure(t: &TableRing, seeds: impl IntoIterator<Item = usize>) -> Bits {
    let mut set: Bits = 1;
    let mut members = vec![0usize];
    for y in seeds {
        let base = members.len();
        let mut c = y;
        while set & (1 << c) == 0 {
            for i in 0..base {
                let s = t.add(members[i], c);
                if set & (1 << s) == 0 {
                    set |= 1 << s;
                    members.push(s);
                }
            }
            c = t.add(c, y);
        }
    }
    set
}

fn bits_iter(b: Bits) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| b & (1 << i) != 0)
}

/// Every left ideal of a ring with at most 64 elements, as bitsets.
///
/// Left ideals are sums of principal left ideals `R x`, so the lattice is
/// generated from `{0}` by repeatedly adding principal ideals.
pub fn left_ideals(ring: &FiniteRing) -> Result<Vec<u64>> {
    let t = ring.require_table()?;
    let n = t.size();
    if n > 64 {
        return Err(Error::OracleCapExceeded { size: n, cap: 64 });
    }
    let mut principal: Vec<Bits> = (0..n)
        .map(|x| additive_closure(t, (0..n).map(|r| t.mul(r, x))))
        .collect();
    principal.sort_unstable();
    principal.dedup();
    let mut ideals: Vec<Bits> = vec![1];
    let mut known: HashSet<Bits> = ideals.iter().copied().collect();
    let mut cursor = 0;
    while cursor < ideals.len() {
        let l = ideals[cursor];
        for &p in &principal {
            if p & !l == 0 {
                continue;
            }
            let sum = additive_closure(t, bits_iter(l).chain(bits_iter(p)));
            if known.insert(sum) {
                ideals.push(sum);
            }
        }
        cursor += 1;
    }
    Ok(ideals)
}

/// The radical as the intersection of all maximal left ideals.
pub fn jacobson_radical_oracle(ring: &FiniteRing, cap: usize) -> Result<ElementSet> {
    let t = ring.require_table()?;
    let n = t.size();
    if n > cap.min(64) {
        return Err(Error::OracleCapExceeded { size: n, cap: cap.min(64) });
    }
    let full: Bits = if n == 64 { u64::MAX } else { (1 << n) - 1 };
    let proper: Vec<Bits> = left_ideals(ring)?.into_iter().filter(|&l| l != full).collect();
    let maximal = proper
        .iter()
        .filter(|&&l| !proper.iter().any(|&m| m != l && m & l == l));
    let meet = maximal.fold(full, |acc, &l| acc & l);
    let members: Vec<usize> = bits_iter(meet).collect();
    Ok(ElementSet::from_members(ring, SetKind::Radical, &members))
}

/// A non-unit outside the radical, if any; `None` means the ring is local.
pub fn non_local_witness(ring: &FiniteRing) -> Result<Option<usize>> {
    let t = ring.require_table()?;
    let units = unit_mask(t);
    let radical = jacobson_radical(ring)?;
    Ok((0..t.size()).find(|&x| !units[x] && !radical.contains(x)))
}

/// Local iff units and radical together cover the ring. The trivial ring is
/// not local.
pub fn is_local(ring: &FiniteRing) -> Result<bool> {
    if ring.size() == 1 {
        return Ok(false);
    }
    Ok(non_local_witness(ring)?.is_none())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Abelian {
    Abelian,
    /// First idempotent (in element order) that fails to commute with some
    /// element, and the first such element.
    Witness { idempotent: usize, element: usize },
}

pub fn is_abelian(ring: &FiniteRing) -> Result<Abelian> {
    let t = ring.require_table()?;
    for e in idempotent_indices(t) {
        if let Some(x) = (0..t.size()).find(|&x| t.mul(e, x) != t.mul(x, e)) {
            return Ok(Abelian::Witness { idempotent: e, element: x });
        }
    }
    Ok(Abelian::Abelian)
}

/// An element written as `sum_d t^d A_d` over a finite coefficient ring.
#[derive(Clone, Debug)]
pub struct SeriesView {
    pub coefficient_ring: FiniteRing,
    pub coefficients: Vec<Elem>,
}

/// Decomposes `x` by powers of the series variable. Handles series rings,
/// matrix rings over materialized series rings, and table rings carved out
/// of either.
pub fn series_view(ring: &FiniteRing, x: &Elem) -> Result<SeriesView> {
    if !ring.contains(x) {
        return Err(Error::ForeignElement { ring: ring.name().to_string() });
    }
    let wrong = || Error::WrongBackend(ring.name().to_string());
    match ring.structure() {
        None => {
            let origin = ring.origin().ok_or_else(wrong)?;
            let inner = &origin.elements[x.index().unwrap()];
            series_view(&origin.ambient, inner)
        }
        Some(Computed::Series { base, .. }) => Ok(SeriesView {
            coefficient_ring: base.clone(),
            coefficients: x
                .parts()
                .unwrap()
                .iter()
                .map(|&c| base.element(c as usize))
                .collect::<Result<_>>()?,
        }),
        Some(Computed::Matrix { n, base, upper }) => {
            let origin = base.origin().ok_or_else(wrong)?;
            let (k, coeff) = match origin.ambient.structure() {
                Some(Computed::Series { k, base, .. }) => (*k, base.clone()),
                _ => return Err(wrong()),
            };
            let entries: Vec<&[u32]> = x
                .parts()
                .unwrap()
                .iter()
                .map(|&e| origin.elements[e as usize].parts().unwrap())
                .collect();
            let coefficient_ring = FiniteRing::computed(
                Computed::Matrix { n: *n, base: coeff.clone(), upper: *upper },
                format!("{}({n},{})", if *upper { "t" } else { "m" }, coeff.name()),
            )?;
            let coefficients = (0..k)
                .map(|d| {
                    coefficient_ring.element_from_parts(entries.iter().map(|e| e[d]).collect())
                })
                .collect::<Result<_>>()?;
            Ok(SeriesView { coefficient_ring, coefficients })
        }
        Some(_) => Err(wrong()),
    }
}

/// Proof that a series element is not nilpotent in the untruncated ring: its
/// lowest-order coefficient `A_d` is not nilpotent, so the lowest-order term
/// `t^(d m) A_d^m` of every power survives.
#[derive(Clone, Debug, Serialize)]
pub struct NonNilpotencyCertificate {
    pub element: String,
    pub lowest_degree: usize,
    pub leading_coefficient: String,
    pub coefficient_ring: String,
    /// Powers of the leading coefficient scanned before a repeat.
    pub witness_exponent_checked: u32,
    #[serde(skip)]
    leading: Elem,
    #[serde(skip)]
    ring: FiniteRing,
}

impl NonNilpotencyCertificate {
    pub fn leading(&self) -> &Elem {
        &self.leading
    }

    pub fn coefficient_ring_handle(&self) -> &FiniteRing {
        &self.ring
    }

    /// Re-runs the power scan of the leading coefficient.
    pub fn revalidate(&self) -> bool {
        matches!(is_nilpotent(&self.ring, &self.leading), Ok(Nilpotency::NotNilpotent))
    }
}

/// `Ok(None)` is the inconclusive outcome: the leading coefficient is
/// nilpotent, which decides nothing about `x`.
pub fn series_nonnilpotency_certificate(
    ring: &FiniteRing,
    x: &Elem,
) -> Result<Option<NonNilpotencyCertificate>> {
    let view = series_view(ring, x)?;
    let cr = &view.coefficient_ring;
    let (d, lead) = view
        .coefficients
        .iter()
        .enumerate()
        .find(|(_, c)| !cr.is_zero(c))
        .ok_or_else(|| Error::InvalidParameter("zero has no non-nilpotency certificate".into()))?;
    let trace = power_trace(cr, lead)?;
    if cr.is_zero(trace.last().unwrap()) {
        return Ok(None);
    }
    Ok(Some(NonNilpotencyCertificate {
        element: ring.label(x),
        lowest_degree: d,
        leading_coefficient: cr.label(lead),
        coefficient_ring: cr.name().to_string(),
        witness_exponent_checked: trace.len() as u32,
        leading: lead.clone(),
        ring: cr.clone(),
    }))
}
