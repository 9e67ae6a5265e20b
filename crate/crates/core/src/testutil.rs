//! Brute-force helpers shared by unit tests.

use crate::ring::{FiniteRing, TableRing};

/// Searches for a bijection preserving addition, multiplication and one.
/// Only for small rings.
pub fn isomorphic(a: &FiniteRing, b: &FiniteRing) -> bool {
    let (ta, tb) = (a.require_table().unwrap(), b.require_table().unwrap());
    if ta.size() != tb.size() {
        return false;
    }
    let n = ta.size();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    map[0] = 0;
    used[0] = true;
    extend(ta, tb, &mut map, &mut used, 1)
}

fn consistent(ta: &TableRing, tb: &TableRing, map: &[usize], upto: usize) -> bool {
    for x in 0..upto {
        for y in 0..upto {
            for (s, t) in [(ta.add(x, y), tb.add(map[x], map[y])), (ta.mul(x, y), tb.mul(map[x], map[y]))] {
                if map[s] != usize::MAX && map[s] != t {
                    return false;
                }
                if map[s] == usize::MAX && s < upto {
                    return false;
                }
            }
        }
    }
    true
}

fn extend(ta: &TableRing, tb: &TableRing, map: &mut [usize], used: &mut [bool], x: usize) -> bool {
    let n = ta.size();
    if x == n {
        return map[ta.one()] == tb.one() && consistent(ta, tb, map, n);
    }
    for y in 0..n {
        if used[y] {
            continue;
        }
        map[x] = y;
        used[y] = true;
        if consistent(ta, tb, map, x + 1) && extend(ta, tb, map, used, x + 1) {
            return true;
        }
        used[y] = false;
        map[x] = usize::MAX;
    }
    false
}

/// Table index of a label, panicking when absent.
pub fn at(ring: &FiniteRing, label: &str) -> usize {
    ring.require_table()
        .unwrap()
        .index_of(label)
        .unwrap_or_else(|| panic!("{label} not in {}", ring.name()))
}
