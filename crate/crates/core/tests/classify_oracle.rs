//! Backtracking classification against naive double enumeration on every
//! small ring, all three targets and every bound up to (2, 2).

use jring_core::checker::{
    classify, verify_certificate, Bounds, SearchConfig, SearchMode, TargetKind, Verdict,
};
use jring_core::constructions::{
    direct_product, gf, quotient, trivial_extension, truncated_series, upper_triangular, zmod,
    IdealSpec,
};
use jring_core::{FiniteRing, TableRing};

fn small_rings() -> Vec<FiniteRing> {
    let f2 = gf(2, 1).unwrap();
    let mat = |r: FiniteRing| r.materialize(64).unwrap();
    let mut rings: Vec<FiniteRing> = (2..=8).map(|n| zmod(n).unwrap()).collect();
    rings.extend([gf(2, 2).unwrap(), gf(5, 1).unwrap(), gf(7, 1).unwrap(), gf(2, 3).unwrap()]);
    rings.push(mat(upper_triangular(2, &f2).unwrap()));
    rings.push(mat(trivial_extension(&f2).unwrap()));
    rings.push(mat(truncated_series(&f2, 3).unwrap()));
    rings.push(mat(direct_product(&zmod(2).unwrap(), &zmod(4).unwrap()).unwrap()));
    rings.push(mat(direct_product(&f2, &f2).unwrap()));
    let z8 = zmod(8).unwrap();
    rings.push(quotient(&z8, &IdealSpec { generators: vec![z8.element(4).unwrap()] }).unwrap());
    rings
}

/// Intersection of maximal left ideals, found among all subsets.
fn radical_by_subsets(t: &TableRing) -> Vec<bool> {
    let n = t.size();
    let is_left_ideal = |m: u32| {
        (0..n).filter(|&x| m >> x & 1 == 1).all(|x| {
            (0..n).filter(|&y| m >> y & 1 == 1).all(|y| m >> t.add(x, y) & 1 == 1)
                && (0..n).all(|r| m >> t.mul(r, x) & 1 == 1)
        })
    };
    let full = (1u32 << n) - 1;
    let proper: Vec<u32> = (0..full).filter(|&m| m & 1 == 1 && is_left_ideal(m)).collect();
    let maximal = proper.iter().filter(|&&m| !proper.iter().any(|&o| o != m && o & m == m));
    let meet = maximal.fold(full, |acc, &m| acc & m);
    (0..n).map(|x| meet >> x & 1 == 1).collect()
}

fn target_mask(t: &TableRing, kind: TargetKind) -> Vec<bool> {
    let n = t.size();
    match kind {
        TargetKind::Zero => (0..n).map(|x| x == 0).collect(),
        TargetKind::Nil => (0..n)
            .map(|x| {
                let mut p = x;
                for _ in 0..n {
                    if p == 0 {
                        return true;
                    }
                    p = t.mul(p, x);
                }
                p == 0
            })
            .collect(),
        TargetKind::Jac => radical_by_subsets(t),
    }
}

/// All coefficient tuples of length `len` with `a_0` most significant.
fn tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p| (0..n).map(move |c| [p.clone(), vec![c]].concat()))
            .collect();
    }
    out
}

type NaiveWitness = (Vec<usize>, Vec<usize>, usize, usize);

/// First violating pair with `f` in (degree, lexicographic) order and `g` in
/// lexicographic order over padded tuples.
fn naive(t: &TableRing, mask: &[bool], b: Bounds) -> Option<NaiveWitness> {
    let n = t.size();
    let gs: Vec<Vec<usize>> = tuples(n, b.deg_g + 1).into_iter().filter(|g| g.iter().any(|&c| c != 0)).collect();
    for d in 0..=b.deg_f {
        for f in tuples(n, d + 1).into_iter().filter(|f| f[d] != 0) {
            for g in &gs {
                let mut prod = vec![0; f.len() + g.len() - 1];
                for (i, &a) in f.iter().enumerate() {
                    for (j, &c) in g.iter().enumerate() {
                        prod[i + j] = t.add(prod[i + j], t.mul(a, c));
                    }
                }
                if prod.iter().any(|&c| c != 0) {
                    continue;
                }
                let len = g.iter().rposition(|&c| c != 0).unwrap() + 1;
                for i in 0..f.len() {
                    for j in 0..len {
                        if !mask[t.mul(f[i], g[j])] {
                            return Some((f.clone(), g[..len].to_vec(), i, j));
                        }
                    }
                }
            }
        }
    }
    None
}

#[test]
fn backtracking_agrees_with_double_enumeration() {
    let config = SearchConfig::default().with_workers(2);
    let mut compared = 0;
    for ring in small_rings() {
        let t = ring.require_table().unwrap();
        assert!(t.size() <= 8);
        for kind in [TargetKind::Zero, TargetKind::Nil, TargetKind::Jac] {
            let mask = target_mask(t, kind);
            for df in 0..=2 {
                for dg in 0..=2 {
                    let b = Bounds::new(df, dg);
                    let report = classify(&ring, kind, b, SearchMode::Exhaustive, &config).unwrap();
                    let expected = naive(t, &mask, b);
                    let label = |xs: &[usize]| xs.iter().map(|&x| t.label(x).to_string()).collect::<Vec<_>>();
                    match expected {
                        None => assert_eq!(report.verdict, Verdict::Verified, "{} {kind:?} {b:?}", ring.name()),
                        Some((f, g, i, j)) => {
                            assert_eq!(report.verdict, Verdict::Counterexample, "{} {kind:?} {b:?}", ring.name());
                            assert!(verify_certificate(&ring, &report).unwrap());
                            let w = report.witness.as_ref().unwrap();
                            assert_eq!((w.f.clone(), w.g.clone(), w.offending), (label(&f), label(&g), (i, j)));
                        }
                    }
                    compared += 1;
                }
            }
        }
    }
    assert!(compared > 100);
}

#[test]
fn radical_matches_subset_oracle() {
    for ring in small_rings() {
        let t = ring.require_table().unwrap();
        let j = jring_core::structure::jacobson_radical(&ring).unwrap();
        assert_eq!(j.mask(), radical_by_subsets(t).as_slice(), "{}", ring.name());
    }
}
