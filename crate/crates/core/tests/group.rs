mod common;

use std::collections::BTreeSet;

use pglcover::projline::{Group, ProjectiveLine, Storage};
use pglcover::{Fe, Permutation, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SMALL_Q: [u64; 7] = [2, 3, 4, 5, 7, 8, 9];

#[test]
fn triple_enumeration_matches_matrix_enumeration() {
    for q in [2u64, 3, 4, 5, 7] {
        let group = Group::for_q(q).unwrap();
        let by_matrices = common::group_by_matrices(group.line());
        let by_triples: BTreeSet<Permutation> = group.iter().collect();
        assert_eq!(by_triples.len() as u64, q * q * q - q, "q = {q}");
        assert_eq!(by_triples, by_matrices, "q = {q}");
    }
}

#[test]
fn q5_has_120_distinct_maps() {
    let line = ProjectiveLine::for_q(5).unwrap();
    let mut maps = BTreeSet::new();
    for a in line.points() {
        for b in line.points() {
            for c in line.points() {
                if let Ok(m) = line.from_triple(a, b, c) {
                    maps.insert((m.a, m.b, m.c, m.d));
                }
            }
        }
    }
    assert_eq!(maps.len(), 120);
}

#[test]
fn sharply_three_transitive() {
    for q in SMALL_Q {
        let group = Group::for_q(q).unwrap();
        let n = group.degree();
        let elems: Vec<Permutation> = group.iter().collect();
        for x in 0..n {
            for y in (0..n).filter(|&y| y != x) {
                for z in (0..n).filter(|&z| z != x && z != y) {
                    let mut hits = vec![0u8; n * n * n];
                    for g in &elems {
                        let (a, b, c) = (g.image(x) as usize, g.image(y) as usize, g.image(z) as usize);
                        hits[(a * n + b) * n + c] += 1;
                    }
                    for a in 0..n {
                        for b in 0..n {
                            for c in 0..n {
                                let expect = (a != b && b != c && a != c) as u8;
                                assert_eq!(hits[(a * n + b) * n + c], expect, "q = {q}");
                            }
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn sharp_transitivity_sampled_for_larger_q() {
    let group = Group::for_q(31).unwrap();
    let n = group.degree() as u16;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let mut pick = || -> [u16; 3] {
            loop {
                let t = [rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)];
                if t[0] != t[1] && t[1] != t[2] && t[0] != t[2] {
                    return t;
                }
            }
        };
        let (src, dst) = (pick(), pick());
        let count = group
            .iter()
            .filter(|g| src.iter().zip(&dst).all(|(&s, &d)| g.image(s as usize) == d))
            .count();
        assert_eq!(count, 1);
    }
}

#[test]
fn nonidentity_elements_fix_at_most_two_points() {
    for q in SMALL_Q {
        let group = Group::for_q(q).unwrap();
        let identities = group.iter().filter(|g| g.is_identity()).count();
        assert_eq!(identities, 1);
        assert!(group.iter().filter(|g| !g.is_identity()).all(|g| g.fix_count() <= 2), "q = {q}");
    }
}

#[test]
fn closed_under_composition() {
    for q in [7u64, 9, 16] {
        let group = Group::for_q(q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(q);
        for _ in 0..1000 {
            let g = group.element(rng.gen_range(0..group.order()));
            let h = group.element(rng.gen_range(0..group.order()));
            assert!(group.rank_of_images(g.then(&h).images()).is_some());
            assert!(group.rank_of_images(g.inverse().images()).is_some());
        }
    }
}

#[test]
fn scaling_does_not_change_the_action() {
    let line = ProjectiveLine::for_q(9).unwrap();
    let t = line.tower();
    let sub: Vec<Fe> = t.elements().filter(|&z| t.in_subfield(z)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut tested = 0;
    while tested < 200 {
        let pick = |rng: &mut ChaCha8Rng| sub[rng.gen_range(0..sub.len())];
        let (a, b, c, d) = (pick(&mut rng), pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let Ok(m) = line.mobius(a, b, c, d) else { continue };
        let lambda = sub[rng.gen_range(1..sub.len())];
        let scaled = line
            .mobius(t.mul(lambda, a), t.mul(lambda, b), t.mul(lambda, c), t.mul(lambda, d))
            .unwrap();
        assert_eq!(m, scaled);
        assert_eq!(line.permutation(&m), line.permutation(&scaled));
        tested += 1;
    }
}

#[test]
fn from_triple_hits_the_requested_points() {
    let line = ProjectiveLine::for_q(25).unwrap();
    let inf = line.infinity();
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..500 {
        let mut p = || Point(rng.gen_range(0..26));
        let (a, b, c) = (p(), p(), p());
        match line.from_triple(a, b, c) {
            Ok(m) => {
                assert_eq!(line.apply(&m, Point(0)), a);
                assert_eq!(line.apply(&m, Point(1)), b);
                assert_eq!(line.apply(&m, inf), c);
            }
            Err(_) => assert!(a == b || b == c || a == c),
        }
    }
}

#[test]
fn streamed_group_beyond_table_limit() {
    let line = ProjectiveLine::for_q(67).unwrap();
    let group = Group::new(line, Storage::Auto).unwrap();
    assert!(!group.is_materialized());
    assert_eq!(group.order(), 67 * 67 * 67 - 67);
    for rank in [0usize, 1234, group.order() - 1] {
        let g = group.element(rank);
        assert_eq!(g, group.line().permutation(&group.mobius(rank)));
        assert_eq!(group.rank_of_images(g.images()), Some(rank));
    }
}

#[test]
fn group_info_is_stable() {
    let a = Group::for_q(7).unwrap().info();
    let b = Group::new(ProjectiveLine::for_q(7).unwrap(), Storage::Streamed).unwrap().info();
    assert_eq!(a.order, 336);
    assert_eq!(a.checksum, b.checksum);
    assert!(a.materialized && !b.materialized);
}
