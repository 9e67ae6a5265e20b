//! Finite unital rings.
//!
//! A [`FiniteRing`] is either *table-backed* (addition and multiplication are
//! stored as Cayley tables over element indices) or *computed* (elements are
//! tuples of indices into table-backed component rings and arithmetic is
//! evaluated on demand). Computed rings can be far too large to enumerate;
//! set-level queries work on table rings only, so callers materialize a
//! computed ring, or a subring of it, before asking structural questions.
//!
//! Element order is deterministic: table rings use their index order, and
//! computed rings order elements lexicographically over their component
//! tuples with the first component most significant. The zero element is
//! always first.

use std::collections::HashMap;
use std::fmt;
use std::hash::{BuildHasherDefault, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default bound on the number of elements of a materialized ring.
pub const DEFAULT_CAP: usize = 4096;
/// Table indices are stored as `u16`.
pub const MAX_CAP: usize = 1 << 16;
/// Computed rings with more elements than this refuse to enumerate.
pub const ENUMERATION_LIMIT: u128 = 1 << 22;

static NEXT_RING_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingId(u64);

impl RingId {
    fn fresh() -> Self {
        RingId(NEXT_RING_ID.fetch_add(1, Ordering::Relaxed))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Repr {
    /// Position in a table ring.
    Index(u32),
    /// Component indices of a computed ring element.
    Parts(Vec<u32>),
}

/// Handle to an element of one specific ring.
///
/// Handles carry the identity of the ring that produced them, so mixing
/// elements of different rings is detected rather than silently computed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem {
    ring: RingId,
    repr: Repr,
}

impl Elem {
    pub fn repr(&self) -> &Repr {
        &self.repr
    }

    pub fn ring_id(&self) -> RingId {
        self.ring
    }

    pub fn index(&self) -> Option<usize> {
        match self.repr {
            Repr::Index(i) => Some(i as usize),
            Repr::Parts(_) => None,
        }
    }

    pub fn parts(&self) -> Option<&[u32]> {
        match &self.repr {
            Repr::Index(_) => None,
            Repr::Parts(p) => Some(p),
        }
    }
}

/// Cayley tables of a ring with at most [`MAX_CAP`] elements. Index 0 is zero.
#[derive(Clone, PartialEq, Eq)]
pub struct TableRing {
    size: usize,
    one: u16,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    labels: Vec<String>,
    label_index: HashMap<String, u16>,
}

impl fmt::Debug for TableRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TableRing")
            .field("size", &self.size)
            .field("one", &self.one)
            .finish_non_exhaustive()
    }
}

impl TableRing {
    /// Builds a table ring from row-major addition and multiplication tables.
    ///
    /// Checks shape, index range, that index 0 is an additive identity, that
    /// every element has an additive inverse and that labels are unique. Ring
    /// axioms beyond that are the business of [`ring_axiom_self_test`].
    pub fn from_tables(
        add: Vec<u16>,
        mul: Vec<u16>,
        one: usize,
        labels: Vec<String>,
    ) -> Result<Self> {
        let size = labels.len();
        if size == 0 || size > MAX_CAP {
            return Err(Error::MalformedTable(format!("invalid size {size}")));
        }
        if add.len() != size * size || mul.len() != size * size {
            return Err(Error::MalformedTable("table shape does not match size".into()));
        }
        if one >= size {
            return Err(Error::MalformedTable("identity index out of range".into()));
        }
        if add.iter().chain(mul.iter()).any(|&v| v as usize >= size) {
            return Err(Error::MalformedTable("table entry out of range".into()));
        }
        if (0..size).any(|x| add[x] as usize != x) {
            return Err(Error::MalformedTable("index 0 is not the additive identity".into()));
        }
        let mut neg = Vec::with_capacity(size);
        for x in 0..size {
            let row = &add[x * size..(x + 1) * size];
            match row.iter().position(|&v| v == 0) {
                Some(y) => neg.push(y as u16),
                None => {
                    return Err(Error::MalformedTable(format!(
                        "element {x} has no additive inverse"
                    )))
                }
            }
        }
        let mut label_index = HashMap::with_capacity(size);
        for (i, l) in labels.iter().enumerate() {
            if label_index.insert(l.clone(), i as u16).is_some() {
                return Err(Error::MalformedTable(format!("duplicate label `{l}`")));
            }
        }
        Ok(TableRing {
            size,
            one: one as u16,
            add,
            mul,
            neg,
            labels,
            label_index,
        })
    }

    /// Builds the tables by evaluating `add` and `mul` on every pair.
    pub fn from_fn(
        labels: Vec<String>,
        one: usize,
        add: impl Fn(usize, usize) -> usize + Sync,
        mul: impl Fn(usize, usize) -> usize + Sync,
    ) -> Result<Self> {
        let size = labels.len();
        let fill = |f: &(dyn Fn(usize, usize) -> usize + Sync)| {
            let mut table = vec![0u16; size * size];
            table
                .par_chunks_mut(size.max(1))
                .enumerate()
                .for_each(|(x, row)| {
                    for (y, slot) in row.iter_mut().enumerate() {
                        *slot = f(x, y) as u16;
                    }
                });
            table
        };
        let add_table = fill(&add);
        let mul_table = fill(&mul);
        Self::from_tables(add_table, mul_table, one, labels)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn zero(&self) -> usize {
        0
    }

    pub fn one(&self) -> usize {
        self.one as usize
    }

    #[inline]
    pub fn add(&self, x: usize, y: usize) -> usize {
        self.add[x * self.size + y] as usize
    }

    #[inline]
    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.mul[x * self.size + y] as usize
    }

    #[inline]
    pub fn neg(&self, x: usize) -> usize {
        self.neg[x] as usize
    }

    #[inline]
    pub fn sub(&self, x: usize, y: usize) -> usize {
        self.add(x, self.neg(y))
    }

    pub fn mul_row(&self, x: usize) -> &[u16] {
        &self.mul[x * self.size..(x + 1) * self.size]
    }

    pub fn add_table(&self) -> &[u16] {
        &self.add
    }

    pub fn mul_table(&self) -> &[u16] {
        &self.mul
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Looks up an element by its label, ignoring whitespace.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        if let Some(&i) = self.label_index.get(label) {
            return Some(i as usize);
        }
        let compact: String = label.chars().filter(|c| !c.is_whitespace()).collect();
        self.label_index.get(&compact).map(|&i| i as usize)
    }
}

/// Structured rings whose elements are tuples over table-backed components.
#[derive(Clone, Debug)]
pub enum Computed {
    /// `n x n` matrices, row-major; `upper` restricts to upper-triangular ones.
    Matrix { n: usize, base: FiniteRing, upper: bool },
    /// Truncated power series `base[t]/(t^k)`, coefficients lowest degree first.
    Series { k: usize, base: FiniteRing, var: char },
    Product { left: FiniteRing, right: FiniteRing },
    /// Pairs `(r, m)` with `(r1, m1)(r2, m2) = (r1 r2, r1 m2 + m1 r2)`.
    TrivialExtension { base: FiniteRing },
    /// Formal triangular matrices `[[r, m], [0, s]]` stored as `(r, m, s)`.
    Triangular { base: FiniteRing },
}

fn table_of(ring: &FiniteRing) -> &TableRing {
    ring.table().expect("component rings of a computed ring are table-backed")
}

impl Computed {
    pub fn arity(&self) -> usize {
        match self {
            Computed::Matrix { n, .. } => n * n,
            Computed::Series { k, .. } => *k,
            Computed::Product { .. } | Computed::TrivialExtension { .. } => 2,
            Computed::Triangular { .. } => 3,
        }
    }

    pub fn component(&self, pos: usize) -> &TableRing {
        match self {
            Computed::Matrix { base, .. }
            | Computed::Series { base, .. }
            | Computed::TrivialExtension { base }
            | Computed::Triangular { base } => table_of(base),
            Computed::Product { left, right } => {
                if pos == 0 {
                    table_of(left)
                } else {
                    table_of(right)
                }
            }
        }
    }

    /// Positions that vary over the ring; the remaining ones are always zero.
    pub fn free_positions(&self) -> Vec<usize> {
        match self {
            Computed::Matrix { n, upper: true, .. } => (0..*n)
                .flat_map(|i| (i..*n).map(move |j| i * n + j))
                .collect(),
            _ => (0..self.arity()).collect(),
        }
    }

    pub fn size(&self) -> Result<u128> {
        self.free_positions().iter().try_fold(1u128, |acc, &p| {
            acc.checked_mul(self.component(p).size() as u128)
                .ok_or(Error::SizeOverflow)
        })
    }

    pub fn contains(&self, parts: &[u32]) -> bool {
        if parts.len() != self.arity() {
            return false;
        }
        if parts
            .iter()
            .enumerate()
            .any(|(p, &v)| v as usize >= self.component(p).size())
        {
            return false;
        }
        if let Computed::Matrix { n, upper: true, .. } = self {
            for i in 0..*n {
                for j in 0..i {
                    if parts[i * n + j] != 0 {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn zero_parts(&self) -> Vec<u32> {
        vec![0; self.arity()]
    }

    pub fn one_parts(&self) -> Vec<u32> {
        let mut parts = self.zero_parts();
        match self {
            Computed::Matrix { n, base, .. } => {
                let one = table_of(base).one() as u32;
                for i in 0..*n {
                    parts[i * n + i] = one;
                }
            }
            Computed::Series { base, .. } | Computed::TrivialExtension { base } => {
                parts[0] = table_of(base).one() as u32;
            }
            Computed::Product { left, right } => {
                parts[0] = table_of(left).one() as u32;
                parts[1] = table_of(right).one() as u32;
            }
            Computed::Triangular { base } => {
                let one = table_of(base).one() as u32;
                parts[0] = one;
                parts[2] = one;
            }
        }
        parts
    }

    pub fn add_into(&self, a: &[u32], b: &[u32], out: &mut Vec<u32>) {
        out.clear();
        out.extend((0..a.len()).map(|p| {
            self.component(p).add(a[p] as usize, b[p] as usize) as u32
        }));
    }

    pub fn neg_into(&self, a: &[u32], out: &mut Vec<u32>) {
        out.clear();
        out.extend((0..a.len()).map(|p| self.component(p).neg(a[p] as usize) as u32));
    }

    pub fn mul_into(&self, a: &[u32], b: &[u32], out: &mut Vec<u32>) {
        out.clear();
        match self {
            Computed::Matrix { n, base, upper } => {
                let t = table_of(base);
                let n = *n;
                for i in 0..n {
                    for j in 0..n {
                        let mut acc = 0usize;
                        let range = if *upper { i..j + 1 } else { 0..n };
                        for l in range {
                            let prod = t.mul(a[i * n + l] as usize, b[l * n + j] as usize);
                            acc = t.add(acc, prod);
                        }
                        out.push(acc as u32);
                    }
                }
            }
            Computed::Series { k, base, .. } => {
                let t = table_of(base);
                for d in 0..*k {
                    let mut acc = 0usize;
                    for i in 0..=d {
                        acc = t.add(acc, t.mul(a[i] as usize, b[d - i] as usize));
                    }
                    out.push(acc as u32);
                }
            }
            Computed::Product { left, right } => {
                out.push(table_of(left).mul(a[0] as usize, b[0] as usize) as u32);
                out.push(table_of(right).mul(a[1] as usize, b[1] as usize) as u32);
            }
            Computed::TrivialExtension { base } => {
                let t = table_of(base);
                let (r1, m1, r2, m2) = (a[0] as usize, a[1] as usize, b[0] as usize, b[1] as usize);
                out.push(t.mul(r1, r2) as u32);
                out.push(t.add(t.mul(r1, m2), t.mul(m1, r2)) as u32);
            }
            Computed::Triangular { base } => {
                let t = table_of(base);
                let (r, m, s) = (a[0] as usize, a[1] as usize, a[2] as usize);
                let (r2, m2, s2) = (b[0] as usize, b[1] as usize, b[2] as usize);
                out.push(t.mul(r, r2) as u32);
                out.push(t.add(t.mul(r, m2), t.mul(m, s2)) as u32);
                out.push(t.mul(s, s2) as u32);
            }
        }
    }

    pub fn label(&self, parts: &[u32]) -> String {
        let lab = |p: usize| self.component(p).label(parts[p] as usize).to_string();
        match self {
            Computed::Matrix { n, .. } => {
                let rows: Vec<String> = (0..*n)
                    .map(|i| {
                        let row: Vec<String> = (0..*n).map(|j| lab(i * n + j)).collect();
                        format!("[{}]", row.join(","))
                    })
                    .collect();
                format!("[{}]", rows.join(","))
            }
            Computed::Series { k, base, var } => {
                let t = table_of(base);
                let mut terms = Vec::new();
                for (d, &c) in parts.iter().enumerate().take(*k) {
                    let c = c as usize;
                    if c == 0 {
                        continue;
                    }
                    let coeff = t.label(c);
                    let coeff = if coeff.contains(['+', '-', '*']) {
                        format!("({coeff})")
                    } else {
                        coeff.to_string()
                    };
                    let power = match d {
                        0 => String::new(),
                        1 => var.to_string(),
                        _ => format!("{var}^{d}"),
                    };
                    terms.push(match (d, c == t.one()) {
                        (0, _) => coeff,
                        (_, true) => power,
                        (_, false) => format!("{coeff}*{power}"),
                    });
                }
                if terms.is_empty() {
                    t.label(0).to_string()
                } else {
                    terms.join("+")
                }
            }
            Computed::Product { .. } | Computed::TrivialExtension { .. } => {
                format!("({},{})", lab(0), lab(1))
            }
            Computed::Triangular { base } => {
                format!("[[{},{}],[{},{}]]", lab(0), lab(1), table_of(base).label(0), lab(2))
            }
        }
    }

    /// Mixed-radix position of `parts` in the lexicographic enumeration.
    fn rank(&self, free: &[usize], parts: &[u32]) -> u128 {
        free.iter().fold(0u128, |acc, &p| {
            acc * self.component(p).size() as u128 + parts[p] as u128
        })
    }
}

/// Embedding of a table ring's elements into the ring it was carved from.
#[derive(Clone, Debug)]
pub struct Origin {
    pub ambient: FiniteRing,
    pub elements: Vec<Elem>,
}

#[derive(Debug)]
pub enum Backend {
    Table(TableRing),
    Computed(Computed),
}

#[derive(Debug)]
struct RingInner {
    id: RingId,
    backend: Backend,
    origin: Option<Origin>,
}

/// An immutable, cheaply clonable finite unital ring.
#[derive(Clone)]
pub struct FiniteRing {
    inner: Arc<RingInner>,
    name: Arc<str>,
}

impl fmt::Debug for FiniteRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteRing")
            .field("name", &self.name)
            .field("id", &self.inner.id)
            .finish_non_exhaustive()
    }
}

impl FiniteRing {
    pub fn from_table(table: TableRing, name: impl Into<String>) -> Self {
        Self::with_backend(Backend::Table(table), None, name)
    }

    pub fn from_table_with_origin(table: TableRing, origin: Origin, name: impl Into<String>) -> Self {
        Self::with_backend(Backend::Table(table), Some(origin), name)
    }

    /// Wraps a structured ring. Every component ring must be table-backed.
    pub fn computed(structure: Computed, name: impl Into<String>) -> Result<Self> {
        let components: Vec<&FiniteRing> = match &structure {
            Computed::Matrix { base, .. }
            | Computed::Series { base, .. }
            | Computed::TrivialExtension { base }
            | Computed::Triangular { base } => vec![base],
            Computed::Product { left, right } => vec![left, right],
        };
        if let Some(r) = components.iter().find(|r| !r.is_table()) {
            return Err(Error::NotMaterialized(r.name().to_string()));
        }
        structure.size()?;
        Ok(Self::with_backend(Backend::Computed(structure), None, name))
    }

    fn with_backend(backend: Backend, origin: Option<Origin>, name: impl Into<String>) -> Self {
        let name: String = name.into();
        FiniteRing {
            inner: Arc::new(RingInner {
                id: RingId::fresh(),
                backend,
                origin,
            }),
            name: name.into(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Same ring, different display name.
    pub fn renamed(&self, name: impl Into<String>) -> Self {
        let name: String = name.into();
        FiniteRing {
            inner: Arc::clone(&self.inner),
            name: name.into(),
        }
    }

    pub fn id(&self) -> RingId {
        self.inner.id
    }

    pub fn same_ring(&self, other: &FiniteRing) -> bool {
        self.inner.id == other.inner.id
    }

    pub fn backend(&self) -> &Backend {
        &self.inner.backend
    }

    pub fn table(&self) -> Option<&TableRing> {
        match &self.inner.backend {
            Backend::Table(t) => Some(t),
            Backend::Computed(_) => None,
        }
    }

    /// The table, or a `NotMaterialized` error.
    pub fn require_table(&self) -> Result<&TableRing> {
        self.table()
            .ok_or_else(|| Error::NotMaterialized(self.name().to_string()))
    }

    pub fn structure(&self) -> Option<&Computed> {
        match &self.inner.backend {
            Backend::Table(_) => None,
            Backend::Computed(c) => Some(c),
        }
    }

    pub fn is_table(&self) -> bool {
        self.table().is_some()
    }

    pub fn origin(&self) -> Option<&Origin> {
        self.inner.origin.as_ref()
    }

    pub fn size(&self) -> u128 {
        match &self.inner.backend {
            Backend::Table(t) => t.size() as u128,
            Backend::Computed(c) => c.size().expect("checked at construction"),
        }
    }

    fn wrap(&self, repr: Repr) -> Elem {
        Elem {
            ring: self.inner.id,
            repr,
        }
    }

    /// Element at a table index.
    pub fn element(&self, index: usize) -> Result<Elem> {
        match self.table() {
            Some(t) if index < t.size() => Ok(self.wrap(Repr::Index(index as u32))),
            Some(_) => Err(self.foreign()),
            None => Err(Error::NotMaterialized(self.name().to_string())),
        }
    }

    /// Element of a computed ring from its component indices.
    pub fn element_from_parts(&self, parts: Vec<u32>) -> Result<Elem> {
        match self.structure() {
            Some(c) if c.contains(&parts) => Ok(self.wrap(Repr::Parts(parts))),
            _ => Err(self.foreign()),
        }
    }

    /// Element by display label (table rings only).
    pub fn element_by_label(&self, label: &str) -> Option<Elem> {
        let t = self.table()?;
        t.index_of(label).map(|i| self.wrap(Repr::Index(i as u32)))
    }

    fn foreign(&self) -> Error {
        Error::ForeignElement {
            ring: self.name().to_string(),
        }
    }

    pub fn contains(&self, x: &Elem) -> bool {
        if x.ring != self.inner.id {
            return false;
        }
        match (&self.inner.backend, &x.repr) {
            (Backend::Table(t), Repr::Index(i)) => (*i as usize) < t.size(),
            (Backend::Computed(c), Repr::Parts(p)) => c.contains(p),
            _ => false,
        }
    }

    fn check(&self, x: &Elem) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(self.foreign())
        }
    }

    pub fn zero(&self) -> Elem {
        match &self.inner.backend {
            Backend::Table(_) => self.wrap(Repr::Index(0)),
            Backend::Computed(c) => self.wrap(Repr::Parts(c.zero_parts())),
        }
    }

    pub fn one(&self) -> Elem {
        match &self.inner.backend {
            Backend::Table(t) => self.wrap(Repr::Index(t.one() as u32)),
            Backend::Computed(c) => self.wrap(Repr::Parts(c.one_parts())),
        }
    }

    pub fn is_zero(&self, x: &Elem) -> bool {
        match &x.repr {
            Repr::Index(i) => *i == 0,
            Repr::Parts(p) => p.iter().all(|&v| v == 0),
        }
    }

    pub fn add(&self, x: &Elem, y: &Elem) -> Result<Elem> {
        self.check(x)?;
        self.check(y)?;
        Ok(match (&self.inner.backend, &x.repr, &y.repr) {
            (Backend::Table(t), Repr::Index(a), Repr::Index(b)) => {
                self.wrap(Repr::Index(t.add(*a as usize, *b as usize) as u32))
            }
            (Backend::Computed(c), Repr::Parts(a), Repr::Parts(b)) => {
                let mut out = Vec::with_capacity(a.len());
                c.add_into(a, b, &mut out);
                self.wrap(Repr::Parts(out))
            }
            _ => unreachable!("membership checked"),
        })
    }

    pub fn neg(&self, x: &Elem) -> Result<Elem> {
        self.check(x)?;
        Ok(match (&self.inner.backend, &x.repr) {
            (Backend::Table(t), Repr::Index(a)) => {
                self.wrap(Repr::Index(t.neg(*a as usize) as u32))
            }
            (Backend::Computed(c), Repr::Parts(a)) => {
                let mut out = Vec::with_capacity(a.len());
                c.neg_into(a, &mut out);
                self.wrap(Repr::Parts(out))
            }
            _ => unreachable!("membership checked"),
        })
    }

    pub fn sub(&self, x: &Elem, y: &Elem) -> Result<Elem> {
        self.add(x, &self.neg(y)?)
    }

    pub fn mul(&self, x: &Elem, y: &Elem) -> Result<Elem> {
        self.check(x)?;
        self.check(y)?;
        Ok(match (&self.inner.backend, &x.repr, &y.repr) {
            (Backend::Table(t), Repr::Index(a), Repr::Index(b)) => {
                self.wrap(Repr::Index(t.mul(*a as usize, *b as usize) as u32))
            }
            (Backend::Computed(c), Repr::Parts(a), Repr::Parts(b)) => {
                let mut out = Vec::with_capacity(a.len());
                c.mul_into(a, b, &mut out);
                self.wrap(Repr::Parts(out))
            }
            _ => unreachable!("membership checked"),
        })
    }

    pub fn pow(&self, x: &Elem, e: u32) -> Result<Elem> {
        let mut acc = self.one();
        for _ in 0..e {
            acc = self.mul(&acc, x)?;
        }
        Ok(acc)
    }

    /// Display label; panics on a foreign element.
    pub fn label(&self, x: &Elem) -> String {
        assert!(self.contains(x), "label of an element outside `{}`", self.name());
        match (&self.inner.backend, &x.repr) {
            (Backend::Table(t), Repr::Index(i)) => t.label(*i as usize).to_string(),
            (Backend::Computed(c), Repr::Parts(p)) => c.label(p),
            _ => unreachable!(),
        }
    }

    /// All elements in element order, zero first.
    pub fn elements(&self) -> Result<Vec<Elem>> {
        match &self.inner.backend {
            Backend::Table(t) => Ok((0..t.size())
                .map(|i| self.wrap(Repr::Index(i as u32)))
                .collect()),
            Backend::Computed(c) => {
                let size = c.size()?;
                if size > ENUMERATION_LIMIT {
                    return Err(Error::EnumerationUnavailable {
                        ring: self.name().to_string(),
                        size,
                    });
                }
                let free = c.free_positions();
                let radices: Vec<u32> = free.iter().map(|&p| c.component(p).size() as u32).collect();
                let mut parts = c.zero_parts();
                let mut out = Vec::with_capacity(size as usize);
                loop {
                    out.push(self.wrap(Repr::Parts(parts.clone())));
                    // increment the last free position first
                    let mut k = free.len();
                    loop {
                        if k == 0 {
                            return Ok(out);
                        }
                        k -= 1;
                        let p = free[k];
                        parts[p] += 1;
                        if parts[p] < radices[k] {
                            break;
                        }
                        parts[p] = 0;
                    }
                }
            }
        }
    }

    /// Converts to a table ring, keeping labels and element order.
    pub fn materialize(&self, cap: usize) -> Result<FiniteRing> {
        if self.is_table() {
            return Ok(self.clone());
        }
        let size = self.size();
        let cap = cap.min(MAX_CAP);
        if size > cap as u128 {
            return Err(Error::CapExceeded {
                ring: self.name().to_string(),
                size,
                cap,
            });
        }
        let elems = self.elements()?;
        let one = self.one();
        subset_ring(self, elems, &one, self.name(), true)
    }

    /// Deterministic pseudo-random element (used by sampled self-tests).
    pub fn random_element(&self, rng: &mut impl Rng) -> Elem {
        match &self.inner.backend {
            Backend::Table(t) => self.wrap(Repr::Index(rng.gen_range(0..t.size()) as u32)),
            Backend::Computed(c) => {
                let mut parts = c.zero_parts();
                for p in c.free_positions() {
                    parts[p] = rng.gen_range(0..c.component(p).size()) as u32;
                }
                self.wrap(Repr::Parts(parts))
            }
        }
    }
}

/// Ranks are already well spread; one multiply is enough mixing.
#[derive(Default)]
struct RankHasher(u64);

impl Hasher for RankHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0.rotate_left(8) ^ b as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        }
    }

    fn write_u128(&mut self, v: u128) {
        self.0 = ((v as u64) ^ ((v >> 64) as u64).rotate_left(29)).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        self.0 ^= self.0 >> 29;
    }
}

enum Lookup<'a> {
    Rank { c: &'a Computed, free: Vec<usize> },
    Map(HashMap<u128, u16, BuildHasherDefault<RankHasher>>),
}

/// Materializes `elems` (a subset of `ambient`, closed under the ring
/// operations) as a table ring with identity `one`. Elements keep the order
/// of `elems`; the first one must be zero. When `full` is set, `elems` is the
/// complete lexicographic enumeration of a computed ambient.
pub fn subset_ring(
    ambient: &FiniteRing,
    elems: Vec<Elem>,
    one: &Elem,
    name: &str,
    full: bool,
) -> Result<FiniteRing> {
    let size = elems.len();
    if size == 0 || size > MAX_CAP {
        return Err(Error::CapExceeded {
            ring: name.to_string(),
            size: size as u128,
            cap: MAX_CAP,
        });
    }
    if elems.iter().any(|e| !ambient.contains(e)) {
        return Err(ambient.foreign());
    }
    if !ambient.is_zero(&elems[0]) {
        return Err(Error::InvalidParameter("first element must be zero".into()));
    }
    let one_index = elems
        .iter()
        .position(|e| e == one)
        .ok_or(Error::NotClosed)?;
    let labels: Vec<String> = elems.iter().map(|e| ambient.label(e)).collect();

    let table = match ambient.backend() {
        Backend::Table(t) => {
            let mut local = vec![u32::MAX; t.size()];
            let idx: Vec<usize> = elems.iter().map(|e| e.index().unwrap()).collect();
            for (i, &a) in idx.iter().enumerate() {
                local[a] = i as u32;
            }
            let map = |v: usize| -> Option<usize> {
                let l = local[v];
                (l != u32::MAX).then_some(l as usize)
            };
            build_checked(
                labels,
                one_index,
                |_, x, y| map(t.add(idx[x], idx[y])),
                |_, x, y| map(t.mul(idx[x], idx[y])),
            )?
        }
        Backend::Computed(c) => {
            let parts: Vec<&[u32]> = elems.iter().map(|e| e.parts().unwrap()).collect();
            let free = c.free_positions();
            let lookup = if full {
                Lookup::Rank { c, free: free.clone() }
            } else {
                Lookup::Map(
                    parts
                        .iter()
                        .enumerate()
                        .map(|(i, p)| (c.rank(&free, p), i as u16))
                        .collect(),
                )
            };
            // off-free positions must stay zero for the rank to identify a tuple
            let find = |v: &[u32]| -> Option<usize> {
                if !c.contains(v) {
                    return None;
                }
                match &lookup {
                    Lookup::Rank { c, free } => Some(c.rank(free, v) as usize),
                    Lookup::Map(m) => m.get(&c.rank(&free, v)).map(|&i| i as usize),
                }
            };
            build_checked(
                labels,
                one_index,
                |buf, x, y| {
                    c.add_into(parts[x], parts[y], buf);
                    find(buf)
                },
                |buf, x, y| {
                    c.mul_into(parts[x], parts[y], buf);
                    find(buf)
                },
            )?
        }
    };
    Ok(FiniteRing::from_table_with_origin(
        table,
        Origin {
            ambient: ambient.clone(),
            elements: elems,
        },
        name,
    ))
}

/// Fills the tables from a few real sums and products, using
/// distributivity for the rest. Every nonzero `y` is written as
/// `parent(y) + b` with `b` in a small additive generating set, so
/// `x + y = (x + parent(y)) + b` and `x y = x parent(y) + x b`.
fn build_checked(
    labels: Vec<String>,
    one: usize,
    add: impl Fn(&mut Vec<u32>, usize, usize) -> Option<usize> + Sync,
    mul: impl Fn(&mut Vec<u32>, usize, usize) -> Option<usize> + Sync,
) -> Result<TableRing> {
    let size = labels.len();
    let mut buf = Vec::new();
    let mut real_add = |x, y| add(&mut buf, x, y).ok_or(Error::NotClosed);

    // additive spanning tree in discovery order
    let mut in_span = vec![false; size];
    in_span[0] = true;
    let mut span = vec![0usize];
    let mut gens: Vec<usize> = Vec::new();
    let mut tree: Vec<(usize, usize, usize)> = Vec::new(); // (y, parent, generator slot)
    for g in 1..size {
        if in_span[g] {
            continue;
        }
        let slot = gens.len();
        gens.push(g);
        let old = span.len();
        let mut layer: Vec<usize> = span[..old].to_vec();
        loop {
            let next = real_add(layer[0], g)?;
            if in_span[next] {
                break;
            }
            let mut fresh = Vec::with_capacity(old);
            for &p in &layer {
                let y = real_add(p, g)?;
                if in_span[y] {
                    return Err(Error::NotClosed);
                }
                in_span[y] = true;
                span.push(y);
                tree.push((y, p, slot));
                fresh.push(y);
            }
            layer = fresh;
        }
    }

    let m = gens.len();
    let add_gen: Vec<u16> = (0..size * m)
        .into_par_iter()
        .map_init(Vec::new, |buf, i| {
            add(buf, i / m, gens[i % m]).map(|v| v as u16).ok_or(Error::NotClosed)
        })
        .collect::<Result<_>>()?;
    let mul_gen: Vec<u16> = (0..size * m)
        .into_par_iter()
        .map_init(Vec::new, |buf, i| {
            mul(buf, i / m, gens[i % m]).map(|v| v as u16).ok_or(Error::NotClosed)
        })
        .collect::<Result<_>>()?;

    let mut add_table = vec![0u16; size * size];
    add_table.par_chunks_mut(size).enumerate().for_each(|(x, row)| {
        row[0] = x as u16;
        for &(y, p, slot) in &tree {
            row[y] = add_gen[row[p] as usize * m + slot];
        }
    });
    let mut mul_table = vec![0u16; size * size];
    mul_table.par_chunks_mut(size).enumerate().for_each(|(x, row)| {
        for &(y, p, slot) in &tree {
            let xb = mul_gen[x * m + slot] as usize;
            row[y] = add_table[row[p] as usize * size + xb];
        }
    });
    TableRing::from_tables(add_table, mul_table, one, labels)
}

/// Which ring law failed, with the offending elements' labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomViolation {
    pub law: &'static str,
    pub elements: Vec<String>,
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fails at ({})", self.law, self.elements.join(", "))
    }
}

/// Exhaustive triple count below which the self-test checks every triple.
pub const EXHAUSTIVE_AXIOM_LIMIT: usize = 256;
pub const SAMPLED_AXIOM_TRIPLES: usize = 100_000;

/// Checks the ring axioms: exhaustively for table rings with at most
/// [`EXHAUSTIVE_AXIOM_LIMIT`] elements, on [`SAMPLED_AXIOM_TRIPLES`]
/// deterministic pseudo-random triples otherwise.
pub fn ring_axiom_self_test(ring: &FiniteRing) -> std::result::Result<(), AxiomViolation> {
    if let Some(t) = ring.table() {
        if t.size() <= EXHAUSTIVE_AXIOM_LIMIT {
            return table_axioms_exhaustive(t);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..SAMPLED_AXIOM_TRIPLES {
        let x = ring.random_element(&mut rng);
        let y = ring.random_element(&mut rng);
        let z = ring.random_element(&mut rng);
        check_triple(ring, &x, &y, &z)?;
    }
    Ok(())
}

fn check_triple(
    ring: &FiniteRing,
    x: &Elem,
    y: &Elem,
    z: &Elem,
) -> std::result::Result<(), AxiomViolation> {
    let op = |r: Result<Elem>| r.expect("elements belong to the ring");
    let fail = |law: &'static str, es: &[&Elem]| AxiomViolation {
        law,
        elements: es.iter().map(|e| ring.label(e)).collect(),
    };
    let (zero, one) = (ring.zero(), ring.one());
    if op(ring.add(x, y)) != op(ring.add(y, x)) {
        return Err(fail("additive commutativity", &[x, y]));
    }
    if op(ring.add(&op(ring.add(x, y)), z)) != op(ring.add(x, &op(ring.add(y, z)))) {
        return Err(fail("additive associativity", &[x, y, z]));
    }
    if op(ring.add(x, &zero)) != *x || op(ring.add(x, &op(ring.neg(x)))) != zero {
        return Err(fail("additive identity/inverse", &[x]));
    }
    if op(ring.mul(&op(ring.mul(x, y)), z)) != op(ring.mul(x, &op(ring.mul(y, z)))) {
        return Err(fail("multiplicative associativity", &[x, y, z]));
    }
    if op(ring.mul(x, &one)) != *x || op(ring.mul(&one, x)) != *x {
        return Err(fail("multiplicative identity", &[x]));
    }
    if op(ring.mul(x, &op(ring.add(y, z)))) != op(ring.add(&op(ring.mul(x, y)), &op(ring.mul(x, z)))) {
        return Err(fail("left distributivity", &[x, y, z]));
    }
    if op(ring.mul(&op(ring.add(x, y)), z)) != op(ring.add(&op(ring.mul(x, z)), &op(ring.mul(y, z)))) {
        return Err(fail("right distributivity", &[x, y, z]));
    }
    Ok(())
}

fn table_axioms_exhaustive(t: &TableRing) -> std::result::Result<(), AxiomViolation> {
    let n = t.size();
    let fail = |law: &'static str, es: &[usize]| AxiomViolation {
        law,
        elements: es.iter().map(|&e| t.label(e).to_string()).collect(),
    };
    if n > 1 && t.one() == t.zero() {
        return Err(fail("zero differs from one", &[0]));
    }
    for x in 0..n {
        if t.add(x, t.neg(x)) != 0 {
            return Err(fail("additive inverse", &[x]));
        }
        if t.mul(x, t.one()) != x || t.mul(t.one(), x) != x {
            return Err(fail("multiplicative identity", &[x]));
        }
        for y in 0..n {
            if t.add(x, y) != t.add(y, x) {
                return Err(fail("additive commutativity", &[x, y]));
            }
            for z in 0..n {
                if t.add(t.add(x, y), z) != t.add(x, t.add(y, z)) {
                    return Err(fail("additive associativity", &[x, y, z]));
                }
                if t.mul(t.mul(x, y), z) != t.mul(x, t.mul(y, z)) {
                    return Err(fail("multiplicative associativity", &[x, y, z]));
                }
                if t.mul(x, t.add(y, z)) != t.add(t.mul(x, y), t.mul(x, z)) {
                    return Err(fail("left distributivity", &[x, y, z]));
                }
                if t.mul(t.add(x, y), z) != t.add(t.mul(x, z), t.mul(y, z)) {
                    return Err(fail("right distributivity", &[x, y, z]));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{gf, matrix_ring, truncated_series, upper_triangular, zmod};

    fn unit(n: usize, i: usize, j: usize) -> Vec<u32> {
        let mut parts = vec![0; n * n];
        parts[i * n + j] = 1;
        parts
    }

    #[test]
    fn zmod_arithmetic() {
        let z4 = zmod(4).unwrap();
        let e = |i| z4.element(i).unwrap();
        assert_eq!(z4.add(&e(3), &e(3)).unwrap(), e(2));
        assert_eq!(z4.mul(&e(2), &e(2)).unwrap(), e(0));
        assert_eq!(z4.neg(&e(1)).unwrap(), e(3));
        assert_eq!(z4.pow(&e(3), 0).unwrap(), e(1));
    }

    #[test]
    fn matrix_units_multiply() {
        let m2 = matrix_ring(2, &gf(2, 1).unwrap()).unwrap();
        let e12 = m2.element_from_parts(unit(2, 0, 1)).unwrap();
        let e21 = m2.element_from_parts(unit(2, 1, 0)).unwrap();
        assert_eq!(m2.mul(&e12, &e21).unwrap().parts().unwrap(), unit(2, 0, 0).as_slice());
        assert_eq!(m2.mul(&e21, &e12).unwrap().parts().unwrap(), unit(2, 1, 1).as_slice());
    }

    #[test]
    fn mixing_rings_is_an_error() {
        let a = zmod(4).unwrap();
        let b = zmod(4).unwrap();
        let x = a.element(1).unwrap();
        assert!(matches!(b.add(&x, &b.one()), Err(Error::ForeignElement { .. })));
        assert!(!b.contains(&x));
    }

    #[test]
    fn enumeration_order() {
        let z4 = zmod(4).unwrap();
        let idx: Vec<usize> = z4.elements().unwrap().iter().map(|e| e.index().unwrap()).collect();
        assert_eq!(idx, vec![0, 1, 2, 3]);
        let t2 = upper_triangular(2, &gf(2, 1).unwrap()).unwrap();
        let elems = t2.elements().unwrap();
        assert_eq!(elems.len(), 8);
        assert!(t2.is_zero(&elems[0]));
        let labels: Vec<String> = elems.iter().map(|e| t2.label(e)).collect();
        assert_eq!(labels[1], "[[0,0],[0,1]]");
        assert_eq!(labels[7], "[[1,1],[0,1]]");
    }

    #[test]
    fn materialize_sizes_and_cap() {
        let z6 = zmod(6).unwrap().materialize(4096).unwrap();
        assert_eq!(z6.size(), 6);
        let t2 = upper_triangular(2, &gf(2, 1).unwrap()).unwrap().materialize(4096).unwrap();
        assert_eq!(t2.size(), 8);
        assert!(t2.is_table());
        let series = truncated_series(&gf(2, 1).unwrap(), 3).unwrap().materialize(4096).unwrap();
        let m3 = matrix_ring(3, &series).unwrap();
        assert_eq!(m3.size(), 1 << 27);
        assert!(matches!(m3.materialize(4096), Err(Error::CapExceeded { size, .. }) if size == 1 << 27));
        assert!(matches!(m3.elements(), Err(Error::EnumerationUnavailable { .. })));
    }

    #[test]
    fn materialized_tables_agree_with_computed_arithmetic() {
        let base = zmod(4).unwrap();
        let m = matrix_ring(2, &base).unwrap();
        let table = m.materialize(4096).unwrap();
        let origin = &table.origin().unwrap().elements;
        let t = table.require_table().unwrap();
        for x in (0..t.size()).step_by(7) {
            for y in (0..t.size()).step_by(5) {
                let direct = m.mul(&origin[x], &origin[y]).unwrap();
                assert_eq!(origin[t.mul(x, y)], direct);
                let direct = m.add(&origin[x], &origin[y]).unwrap();
                assert_eq!(origin[t.add(x, y)], direct);
            }
        }
        assert_eq!(t.label(t.one()), "[[1,0],[0,1]]");
    }

    #[test]
    fn malformed_tables_rejected() {
        let labels = vec!["0".to_string(), "1".to_string()];
        let bad_zero = TableRing::from_tables(vec![1, 0, 0, 1], vec![0, 0, 0, 1], 1, labels.clone());
        assert!(bad_zero.is_err());
        let out_of_range = TableRing::from_tables(vec![0, 1, 1, 2], vec![0, 0, 0, 1], 1, labels.clone());
        assert!(out_of_range.is_err());
        let dup = vec!["0".to_string(), "0".to_string()];
        assert!(TableRing::from_tables(vec![0, 1, 1, 0], vec![0, 0, 0, 1], 1, dup).is_err());
        assert!(TableRing::from_tables(vec![0, 1, 1, 0], vec![0, 0, 0, 1], 1, labels).is_ok());
    }

    #[test]
    fn axiom_self_test_catches_broken_tables() {
        assert!(ring_axiom_self_test(&zmod(12).unwrap()).is_ok());
        assert!(ring_axiom_self_test(&gf(3, 2).unwrap()).is_ok());
        // Z/3 addition with multiplication that is not distributive
        let labels: Vec<String> = (0..3).map(|i| i.to_string()).collect();
        let add = vec![0, 1, 2, 1, 2, 0, 2, 0, 1];
        let mul = vec![0, 0, 0, 0, 1, 2, 0, 2, 1 + 1];
        let t = TableRing::from_tables(add, mul, 1, labels).unwrap();
        let broken = FiniteRing::from_table(t, "broken");
        let v = ring_axiom_self_test(&broken).unwrap_err();
        assert!(!v.elements.is_empty());
    }

    #[test]
    fn labels_resolve_ignoring_whitespace() {
        let m2 = matrix_ring(2, &gf(2, 1).unwrap()).unwrap().materialize(64).unwrap();
        let x = m2.element_by_label("[[1, 1], [0, 0]]").unwrap();
        assert_eq!(m2.label(&x), "[[1,1],[0,0]]");
        assert!(m2.element_by_label("[[2,0],[0,0]]").is_none());
    }
}
