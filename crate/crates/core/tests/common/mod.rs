//! Brute-force oracles. None of these go through the triple enumeration, the
//! point arithmetic tables or the pruned kernels they are compared against.
#![allow(dead_code)]

use std::collections::BTreeSet;

use pglcover::projline::ProjectiveLine;
use pglcover::{Fe, Permutation};

/// PGL₂(q) as the set of permutations induced by every nonsingular matrix,
/// evaluated through tower arithmetic.
pub fn group_by_matrices(line: &ProjectiveLine) -> BTreeSet<Permutation> {
    let t = line.tower();
    let sub: Vec<Fe> = t.elements().filter(|&z| t.in_subfield(z)).collect();
    let mut out = BTreeSet::new();
    for &a in &sub {
        for &b in &sub {
            for &c in &sub {
                for &d in &sub {
                    if let Ok(m) = line.mobius(a, b, c, d) {
                        out.insert(line.permutation(&m));
                    }
                }
            }
        }
    }
    out
}

pub fn naive_hamming(u: &[u16], v: &[u16]) -> usize {
    u.iter().zip(v).filter(|(a, b)| a != b).count()
}

/// min over the group, no early exit.
pub fn naive_distance(v: &Permutation, group: &[Permutation]) -> usize {
    group.iter().map(|g| naive_hamming(v.images(), g.images())).min().unwrap()
}

/// Every permutation of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<u16>> {
    let mut cur: Vec<u16> = (0..n as u16).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            return out;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
        out.push(cur.clone());
    }
}

/// max over all of S_{q+1} of the naive distance.
pub fn naive_covering_radius(group: &[Permutation], n: usize) -> usize {
    all_permutations(n)
        .into_iter()
        .map(|v| naive_distance(&Permutation::new(v).unwrap(), group))
        .max()
        .unwrap()
}
