//! Ring constructions: residue rings, finite fields, matrix and triangular
//! rings, products, trivial extensions, corners, quotients, truncated power
//! series, generated subrings and the two bespoke example rings.
//!
//! Constructions that take a base ring require it to be table-backed;
//! materialize computed inputs first.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::ring::{subset_ring, Computed, Elem, FiniteRing, TableRing, MAX_CAP};
use crate::structure;

/// Renders a label for use inside a ring expression: bare when it is a
/// simple token, double-quoted otherwise.
pub fn quote_label(label: &str) -> String {
    let bare = !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '^' | '*' | '+' | '.'));
    if bare {
        label.to_string()
    } else {
        format!("\"{}\"", label.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

fn require_table(ring: &FiniteRing) -> Result<&TableRing> {
    ring.require_table()
}

/// Integers modulo `n`.
pub fn zmod(n: u64) -> Result<FiniteRing> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("zmod needs n >= 2, got {n}")));
    }
    if n as usize > MAX_CAP {
        return Err(Error::CapExceeded {
            ring: format!("zmod({n})"),
            size: n as u128,
            cap: MAX_CAP,
        });
    }
    let n = n as usize;
    let labels = (0..n).map(|i| i.to_string()).collect();
    let table = TableRing::from_fn(labels, 1, |x, y| (x + y) % n, |x, y| (x * y) % n)?;
    Ok(FiniteRing::from_table(table, format!("zmod({n})")))
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Multiplies two polynomials over F_p (coefficients lowest degree first).
fn poly_mul_mod_p(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    out
}

/// Remainder of `a` modulo the monic polynomial `m` over F_p.
fn poly_rem_monic(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (i, &c) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - (lead * c) % p) % p;
            }
        }
        r.pop();
    }
    r
}

/// Digits of `value` in base `p`, lowest first, padded to `len`.
fn digits(mut value: u64, p: u64, len: usize) -> Vec<u64> {
    (0..len)
        .map(|_| {
            let d = value % p;
            value /= p;
            d
        })
        .collect()
}

fn monic(value: u64, p: u64, degree: usize) -> Vec<u64> {
    let mut m = digits(value, p, degree);
    m.push(1);
    m
}

/// Smallest monic irreducible of the given degree over F_p, ordered by the
/// integer whose base-`p` digits are the lower coefficients.
pub fn smallest_irreducible(p: u64, degree: usize) -> Vec<u64> {
    let count = p.pow(degree as u32);
    (0..count)
        .map(|v| monic(v, p, degree))
        .find(|m| {
            (1..=degree / 2).all(|d| {
                (0..p.pow(d as u32)).all(|w| {
                    let factor = monic(w, p, d);
                    poly_rem_monic(m, &factor, p).iter().any(|&c| c != 0)
                })
            })
        })
        .expect("irreducible polynomials exist in every degree")
}

fn gf_label(coeffs: &[u64]) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| {
            let power = match i {
                0 => String::new(),
                1 => "a".to_string(),
                _ => format!("a^{i}"),
            };
            match (i, c) {
                (0, _) => c.to_string(),
                (_, 1) => power,
                _ => format!("{c}*{power}"),
            }
        })
        .collect();
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join("+")
    }
}

/// The field with `p^k` elements as `F_p[a]/(m(a))` for the smallest monic
/// irreducible `m`. Element `i` is the polynomial whose base-`p` digits are `i`.
pub fn gf(p: u64, k: u32) -> Result<FiniteRing> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("gf needs k >= 1".into()));
    }
    let size = (p as u128).checked_pow(k).ok_or(Error::SizeOverflow)?;
    let name = if k == 1 { format!("gf({p})") } else { format!("gf({p},{k})") };
    if size > MAX_CAP as u128 {
        return Err(Error::CapExceeded { ring: name, size, cap: MAX_CAP });
    }
    let (size, k) = (size as usize, k as usize);
    let modulus = smallest_irreducible(p, k);
    let elems: Vec<Vec<u64>> = (0..size as u64).map(|v| digits(v, p, k)).collect();
    let encode = |c: &[u64]| c.iter().rev().fold(0u64, |acc, &d| acc * p + d) as usize;
    let labels = elems.iter().map(|c| gf_label(c)).collect();
    let table = TableRing::from_fn(
        labels,
        1,
        |x, y| {
            let s: Vec<u64> = elems[x].iter().zip(&elems[y]).map(|(a, b)| (a + b) % p).collect();
            encode(&s)
        },
        |x, y| {
            let mut r = poly_rem_monic(&poly_mul_mod_p(&elems[x], &elems[y], p), &modulus, p);
            r.resize(k, 0);
            encode(&r)
        },
    )?;
    Ok(FiniteRing::from_table(table, name))
}

/// Ring with a single element (zero equals one).
pub fn trivial_ring() -> Result<FiniteRing> {
    let table = TableRing::from_tables(vec![0], vec![0], 0, vec!["0".to_string()])?;
    Ok(FiniteRing::from_table(table, "trivial"))
}

/// Full `n x n` matrix ring over a table ring.
pub fn matrix_ring(n: usize, base: &FiniteRing) -> Result<FiniteRing> {
    if n == 0 {
        return Err(Error::InvalidParameter("matrix size must be >= 1".into()));
    }
    require_table(base)?;
    FiniteRing::computed(
        Computed::Matrix { n, base: base.clone(), upper: false },
        format!("m({n},{})", base.name()),
    )
}

/// Upper-triangular `n x n` matrices over a table ring.
pub fn upper_triangular(n: usize, base: &FiniteRing) -> Result<FiniteRing> {
    if n == 0 {
        return Err(Error::InvalidParameter("matrix size must be >= 1".into()));
    }
    require_table(base)?;
    FiniteRing::computed(
        Computed::Matrix { n, base: base.clone(), upper: true },
        format!("t({n},{})", base.name()),
    )
}

pub fn direct_product(left: &FiniteRing, right: &FiniteRing) -> Result<FiniteRing> {
    require_table(left)?;
    require_table(right)?;
    FiniteRing::computed(
        Computed::Product { left: left.clone(), right: right.clone() },
        format!("prod({},{})", left.name(), right.name()),
    )
}

/// `T(R, R)`: pairs `(r, m)` with `(r1, m1)(r2, m2) = (r1 r2, r1 m2 + m1 r2)`.
pub fn trivial_extension(base: &FiniteRing) -> Result<FiniteRing> {
    require_table(base)?;
    FiniteRing::computed(
        Computed::TrivialExtension { base: base.clone() },
        format!("trivext({})", base.name()),
    )
}

/// The bimodule `M` of a formal triangular ring. Only `M = R = S` is supported.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BimoduleSpec {
    SameRing,
}

#[derive(Clone, Debug)]
pub struct BimoduleTriangularSpec {
    pub upper: FiniteRing,
    pub lower: FiniteRing,
    pub module: BimoduleSpec,
}

impl BimoduleTriangularSpec {
    pub fn same_ring(ring: &FiniteRing) -> Self {
        BimoduleTriangularSpec {
            upper: ring.clone(),
            lower: ring.clone(),
            module: BimoduleSpec::SameRing,
        }
    }
}

/// Formal triangular ring `[[R, M], [0, S]]` with product
/// `(r, m, s)(r', m', s') = (r r', r m' + m s', s s')`.
pub fn triangular(spec: &BimoduleTriangularSpec) -> Result<FiniteRing> {
    if !spec.upper.same_ring(&spec.lower) {
        return Err(Error::UnsupportedBimodule(format!(
            "triangular rings need R = S = M, got R = {} and S = {}",
            spec.upper.name(),
            spec.lower.name()
        )));
    }
    let base = &spec.upper;
    require_table(base)?;
    FiniteRing::computed(
        Computed::Triangular { base: base.clone() },
        format!("tri({})", base.name()),
    )
}

/// `R[t]/(t^k)`. The series variable is `t` unless the coefficient labels
/// already use it.
pub fn truncated_series(base: &FiniteRing, k: usize) -> Result<FiniteRing> {
    if k == 0 {
        return Err(Error::InvalidParameter("truncation must be >= 1".into()));
    }
    let t = require_table(base)?;
    let var = ['t', 's', 'u', 'v', 'w', 'z']
        .into_iter()
        .find(|v| t.labels().iter().all(|l| !l.contains(*v)))
        .ok_or_else(|| Error::InvalidParameter("no free series variable name".into()))?;
    FiniteRing::computed(
        Computed::Series { k, base: base.clone(), var },
        format!("series({},{k})", base.name()),
    )
}

/// `eRe` for an idempotent `e` of a table ring; identity `e`, elements in
/// ambient order.
pub fn corner(ring: &FiniteRing, e: &Elem) -> Result<FiniteRing> {
    let t = require_table(ring)?;
    if !ring.contains(e) {
        return Err(Error::ForeignElement { ring: ring.name().to_string() });
    }
    let ei = e.index().unwrap();
    if t.mul(ei, ei) != ei {
        return Err(Error::NotIdempotent(ring.label(e)));
    }
    let mut members: Vec<usize> = (0..t.size()).map(|x| t.mul(t.mul(ei, x), ei)).collect();
    members.sort_unstable();
    members.dedup();
    let position = structure::idempotent_indices(t)
        .iter()
        .position(|&i| i == ei)
        .expect("e is idempotent");
    let elems = members
        .into_iter()
        .map(|i| ring.element(i))
        .collect::<Result<Vec<_>>>()?;
    subset_ring(ring, elems, e, &format!("corner({},{position})", ring.name()), false)
}

#[derive(Clone, Debug)]
pub struct IdealSpec {
    pub generators: Vec<Elem>,
}

/// Two-sided ideal generated by `generators`, as sorted table indices.
pub fn ideal_closure(ring: &FiniteRing, generators: &[Elem]) -> Result<Vec<usize>> {
    let t = require_table(ring)?;
    let n = t.size();
    let mut member = vec![false; n];
    let mut members = vec![0usize];
    member[0] = true;
    let absorb = |y: usize, member: &mut Vec<bool>, members: &mut Vec<usize>| {
        let base = members.len();
        let mut c = y;
        while !member[c] {
            for i in 0..base {
                let s = t.add(members[i], c);
                if !member[s] {
                    member[s] = true;
                    members.push(s);
                }
            }
            c = t.add(c, y);
        }
    };
    for g in generators {
        if !ring.contains(g) {
            return Err(Error::ForeignElement { ring: ring.name().to_string() });
        }
        absorb(g.index().unwrap(), &mut member, &mut members);
    }
    let mut cursor = 0;
    while cursor < members.len() {
        let x = members[cursor];
        for r in 0..n {
            absorb(t.mul(r, x), &mut member, &mut members);
            absorb(t.mul(x, r), &mut member, &mut members);
        }
        cursor += 1;
    }
    members.sort_unstable();
    Ok(members)
}

/// A quotient ring together with the projection from the ambient ring.
#[derive(Clone, Debug)]
pub struct QuotientMap {
    pub ring: FiniteRing,
    /// Ambient index to quotient index.
    pub projection: Vec<usize>,
    /// Ambient indices of the ideal.
    pub ideal: Vec<usize>,
}

/// `R/I` with cosets labelled `{r}` by their least representative `r`.
pub fn quotient_map(ring: &FiniteRing, ideal: &IdealSpec) -> Result<QuotientMap> {
    let t = require_table(ring)?;
    let members = ideal_closure(ring, &ideal.generators)?;
    let n = t.size();
    let mut projection = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for x in 0..n {
        if projection[x] != usize::MAX {
            continue;
        }
        let id = reps.len();
        reps.push(x);
        for &i in &members {
            projection[t.add(x, i)] = id;
        }
    }
    let labels = reps.iter().map(|&r| format!("{{{}}}", t.label(r))).collect();
    let table = TableRing::from_fn(
        labels,
        projection[t.one()],
        |a, b| projection[t.add(reps[a], reps[b])],
        |a, b| projection[t.mul(reps[a], reps[b])],
    )?;
    let gens: Vec<String> = ideal
        .generators
        .iter()
        .map(|g| quote_label(&ring.label(g)))
        .collect();
    let name = if gens.is_empty() {
        format!("quot({},0)", ring.name())
    } else {
        format!("quot({},{})", ring.name(), gens.join(","))
    };
    Ok(QuotientMap {
        ring: FiniteRing::from_table(table, name),
        projection,
        ideal: members,
    })
}

pub fn quotient(ring: &FiniteRing, ideal: &IdealSpec) -> Result<FiniteRing> {
    quotient_map(ring, ideal).map(|q| q.ring)
}

/// Smallest subring of `ambient` containing `gens`, materialized as a table
/// ring whose element order is the order in which the closure found them.
///
/// The closure keeps an additive subgroup containing 1 and the generators and
/// closes it under right multiplication by each generator; that subgroup then
/// contains every product of generators and is the generated subring.
pub fn subring_generated(
    ambient: &FiniteRing,
    gens: &[Elem],
    cap: usize,
    name: &str,
) -> Result<FiniteRing> {
    let cap = cap.min(MAX_CAP);
    for g in gens {
        if !ambient.contains(g) {
            return Err(Error::ForeignElement { ring: ambient.name().to_string() });
        }
    }
    let mut members = vec![ambient.zero()];
    let mut seen: HashSet<Elem> = members.iter().cloned().collect();
    let absorb = |y: &Elem, members: &mut Vec<Elem>, seen: &mut HashSet<Elem>| -> Result<()> {
        let base = members.len();
        let mut c = y.clone();
        while !seen.contains(&c) {
            for i in 0..base {
                let s = ambient.add(&members[i], &c)?;
                if seen.insert(s.clone()) {
                    members.push(s);
                    if members.len() > cap {
                        return Err(Error::CapExceeded {
                            ring: name.to_string(),
                            size: members.len() as u128,
                            cap,
                        });
                    }
                }
            }
            c = ambient.add(&c, y)?;
        }
        Ok(())
    };
    absorb(&ambient.one(), &mut members, &mut seen)?;
    for g in gens {
        absorb(g, &mut members, &mut seen)?;
    }
    let mut cursor = 0;
    while cursor < members.len() {
        let x = members[cursor].clone();
        for g in gens {
            let y = ambient.mul(&x, g)?;
            absorb(&y, &mut members, &mut seen)?;
        }
        cursor += 1;
    }
    subset_ring(ambient, members, &ambient.one(), name, false)
}

/// The two bespoke example rings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum PaperRing {
    /// Subring of `M_3(F_2[t]/(t^k))` generated by the identity and the
    /// matrices `t^d e_ij` with `i, j` in the upper-left 2x2 block.
    E2,
    /// Series in `M_2(F_2)[t]/(t^k)` whose constant term is scalar.
    E5,
}

impl PaperRing {
    pub fn tag(self) -> &'static str {
        match self {
            PaperRing::E2 => "e2",
            PaperRing::E5 => "e5",
        }
    }
}

/// Position of a computed-ring tuple inside a materialized ring.
pub fn index_in_origin(ring: &FiniteRing, parts: &[u32]) -> Option<usize> {
    ring.origin()?
        .elements
        .iter()
        .position(|e| e.parts() == Some(parts))
}

/// Index of `t^d` in a materialized `F[t]/(t^k)`.
fn monomial_index(series: &FiniteRing, k: usize, d: usize, one: u32) -> usize {
    let mut parts = vec![0u32; k];
    parts[d] = one;
    index_in_origin(series, &parts).expect("monomial belongs to the series ring")
}

/// Matrix-unit helper: `c` at entry `(i, j)` of an `n x n` matrix, zero elsewhere.
pub fn matrix_parts(n: usize, entries: &[(usize, usize, u32)]) -> Vec<u32> {
    let mut parts = vec![0u32; n * n];
    for &(i, j, c) in entries {
        parts[i * n + j] = c;
    }
    parts
}

pub fn paper_ring(which: PaperRing, k: usize, cap: usize) -> Result<FiniteRing> {
    if k < 3 {
        return Err(Error::Precondition(format!(
            "truncation must be at least 3 so that degree-2 products survive, got {k}"
        )));
    }
    let name = format!("paper({},{k})", which.tag());
    let f2 = gf(2, 1)?;
    match which {
        PaperRing::E2 => {
            let series = truncated_series(&f2, k)?.materialize(cap.max(1 << k.min(16)))?;
            let ambient = matrix_ring(3, &series)?;
            let one_coeff = f2.require_table()?.one() as u32;
            let mut gens = vec![ambient.one()];
            for d in 1..k {
                let td = monomial_index(&series, k, d, one_coeff) as u32;
                for i in 0..2 {
                    for j in 0..2 {
                        gens.push(ambient.element_from_parts(matrix_parts(3, &[(i, j, td)]))?);
                    }
                }
            }
            subring_generated(&ambient, &gens, cap, &name)
        }
        PaperRing::E5 => {
            let m2 = matrix_ring(2, &f2)?.materialize(cap.max(16))?;
            let ambient = truncated_series(&m2, k)?;
            let base = m2.require_table()?;
            let (scalar_one, width) = (base.one() as u32, base.size() as u32);
            let count = 2u128 * (width as u128).pow(k as u32 - 1);
            if count > cap.min(MAX_CAP) as u128 {
                return Err(Error::CapExceeded { ring: name, size: count, cap });
            }
            let mut elems = Vec::with_capacity(count as usize);
            for c0 in [0u32, scalar_one] {
                for rest in 0..(width as u64).pow(k as u32 - 1) {
                    let mut parts = vec![c0];
                    let mut digits: Vec<u32> = (0..k - 1)
                        .scan(rest, |v, _| {
                            let d = (*v % width as u64) as u32;
                            *v /= width as u64;
                            Some(d)
                        })
                        .collect();
                    digits.reverse();
                    parts.extend(digits);
                    elems.push(ambient.element_from_parts(parts)?);
                }
            }
            subset_ring(&ambient, elems, &ambient.one(), &name, false)
        }
    }
}
