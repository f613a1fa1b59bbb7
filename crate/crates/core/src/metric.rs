//! Hamming distance on permutations and distance from a permutation to the group.

use std::ops::ControlFlow;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::prime_power;
use crate::par::{self, Exec};
use crate::projline::{Group, Permutation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("permutations have different degrees ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
}

/// Number of points where `u` and `v` disagree.
pub fn hamming(u: &Permutation, v: &Permutation) -> Result<usize, MetricError> {
    if u.len() != v.len() {
        return Err(MetricError::LengthMismatch(u.len(), v.len()));
    }
    Ok(u.images().iter().zip(v.images()).filter(|(a, b)| a != b).count())
}

/// Minimum distance from a permutation to the group, with the lowest-ranked
/// group element attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceResult {
    pub distance: usize,
    pub agreements: usize,
    pub argmin_index: usize,
    /// `(g(0), g(1), g(∞))` of the minimizing element.
    pub argmin_triple: [u16; 3],
}

const SCAN_CHUNK: usize = 2048;

/// Exact `min_g d(v, g)` over all of PGL₂(q).
///
/// Each candidate is abandoned as soon as its disagreement count reaches the
/// best distance seen so far in its chunk, or exceeds the best seen in any
/// chunk. Ties go to the lowest enumeration rank regardless of partitioning.
pub fn distance_to_group(v: &Permutation, group: &Group, exec: Exec) -> Result<DistanceResult, MetricError> {
    let n = group.degree();
    if v.len() != n {
        return Err(MetricError::LengthMismatch(v.len(), n));
    }
    let target = v.images();
    let global = AtomicUsize::new(n + 1);
    let order = group.order();

    let scan_chunk = |chunk: usize| -> Option<(usize, usize)> {
        let range = chunk * SCAN_CHUNK..((chunk + 1) * SCAN_CHUNK).min(order);
        let mut local: Option<(usize, usize)> = None;
        let mut local_bound = n + 1;
        let _ = group.scan(range, |rank, g| {
            let limit = local_bound.min(global.load(Ordering::Relaxed) + 1);
            let mut disagreements = 0;
            for (a, b) in g.iter().zip(target) {
                if a != b {
                    disagreements += 1;
                    if disagreements >= limit {
                        return ControlFlow::Continue(());
                    }
                }
            }
            local_bound = disagreements;
            local = Some((disagreements, rank));
            global.fetch_min(disagreements, Ordering::Relaxed);
            if disagreements == 0 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        local
    };

    let best = par::map_reduce(exec, par::chunk_count(order, SCAN_CHUNK), None, scan_chunk, |a, b| {
        match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        }
    });
    let (distance, rank) = best.expect("the group is nonempty");
    let (a, b, c) = group.triple_of(rank);
    Ok(DistanceResult {
        distance,
        agreements: n - distance,
        argmin_index: rank,
        argmin_triple: [a.0, b.0, c.0],
    })
}

/// Covering radius of PGL₂(q) in S_{q+1}: `q - 2` for even q, `q - 3` for odd q.
pub fn expected_cr(q: u64) -> Result<u64, MetricError> {
    let (p, _) = prime_power(q).ok_or(MetricError::NotPrimePower(q))?;
    Ok(if p == 2 { q - 2 } else { q - 3 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamming_basics() {
        let v = Permutation::new(vec![3, 1, 0, 2]).unwrap();
        assert_eq!(hamming(&v, &v).unwrap(), 0);
        let swapped = Permutation::new(vec![1, 3, 0, 2]).unwrap();
        assert_eq!(hamming(&v, &swapped).unwrap(), 2);
        assert_eq!(
            hamming(&v, &Permutation::identity(3)),
            Err(MetricError::LengthMismatch(4, 3))
        );
    }

    #[test]
    fn expected_values() {
        assert_eq!(expected_cr(8).unwrap(), 6);
        assert_eq!(expected_cr(13).unwrap(), 10);
        assert_eq!(expected_cr(3).unwrap(), 0);
        assert_eq!(expected_cr(2).unwrap(), 0);
        assert_eq!(expected_cr(12), Err(MetricError::NotPrimePower(12)));
    }

    #[test]
    fn members_are_at_distance_zero() {
        let g = crate::projline::Group::for_q(7).unwrap();
        for rank in [0, 17, 335] {
            let r = distance_to_group(&g.element(rank), &g, Exec::Parallel).unwrap();
            assert_eq!(r.distance, 0);
            assert_eq!(r.argmin_index, rank);
        }
    }

    #[test]
    fn transposition_of_member_is_at_distance_two() {
        let g = crate::projline::Group::for_q(7).unwrap();
        let mut images = g.element(100).images().to_vec();
        images.swap(2, 5);
        let v = Permutation::new(images).unwrap();
        let r = distance_to_group(&v, &g, Exec::Sequential).unwrap();
        assert_eq!(r.distance, 2);
        assert_eq!(r.agreements, 6);
    }

    #[test]
    fn rejects_wrong_degree() {
        let g = crate::projline::Group::for_q(5).unwrap();
        let v = Permutation::identity(7);
        assert_eq!(
            distance_to_group(&v, &g, Exec::Sequential),
            Err(MetricError::LengthMismatch(7, 6))
        );
    }
}
