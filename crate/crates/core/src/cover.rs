//! Exact covering radius by exhaustive search, and a seeded distance sampler.
//!
//! d(v, G) is invariant under v ↦ g·v, and G is sharply 3-transitive, so every
//! v has a translate fixing 0, 1 and ∞. The exact search therefore only visits
//! the (q-2)! permutations fixing those three points, in lexicographic order of
//! their images on the remaining points.
//!
//! The search is a depth-first walk over those images. For each group element
//! it keeps the number of agreements with the partial assignment; as soon as
//! some element agrees on so many points that no completion can reach the
//! current maximum, the whole subtree is skipped.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{self, expected_cr, MetricError};
use crate::par::{self, Exec};
use crate::projline::{Group, Permutation, Point, ProjError};

/// Largest q the exact search accepts.
pub const MAX_EXACT_Q: u32 = 13;

/// Upper limit on `(q + 1)·|G|` for building an [`AgreementIndex`].
pub const MAX_INDEX_ENTRIES: usize = 1 << 23;

const DEFAULT_CHECKPOINT_EVERY: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum CoverError {
    #[error("exact search supports q <= {MAX_EXACT_Q}, got {0}")]
    OutOfRange(u32),
    #[error("agreement index for q = {0} exceeds the memory limit")]
    IndexTooLarge(u32),
    #[error("checkpoint is for q = {found}, not {expected}")]
    CheckpointMismatch { expected: u32, found: u32 },
    #[error("checkpoint rank {0} is not on a chunk boundary")]
    CheckpointRank(u64),
    #[error("checkpoint I/O: {0}")]
    Io(#[from] io::Error),
    #[error("checkpoint format: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Proj(#[from] ProjError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Image of the group element realizing `v(0) ↦ 0, v(1) ↦ 1, v(∞) ↦ ∞`
/// composed after `v`; the result fixes 0, 1, ∞ and has the same distance to G.
pub fn stabilize_triple(v: &Permutation, group: &Group) -> Result<Permutation, CoverError> {
    let n = group.degree();
    if v.len() != n {
        return Err(MetricError::LengthMismatch(v.len(), n).into());
    }
    let inf = n - 1;
    let (a, b, c) = (Point(v.image(0)), Point(v.image(1)), Point(v.image(inf)));
    let h = group.element(group.rank_of(a, b, c));
    Ok(v.then(&h.inverse()))
}

/// For every point x and image y, the ranks of the group elements with g(x) = y.
///
/// Sharp 3-transitivity makes every list the same length, `q(q-1)`.
pub struct AgreementIndex {
    n: usize,
    order: usize,
    list_len: usize,
    ranks: Vec<u32>,
}

impl AgreementIndex {
    pub fn new(group: &Group) -> Result<Self, CoverError> {
        let n = group.degree();
        let order = group.order();
        if n * order > MAX_INDEX_ENTRIES {
            return Err(CoverError::IndexTooLarge(group.q()));
        }
        let list_len = (n - 1) * (n - 2);
        let mut ranks = vec![0u32; n * n * list_len];
        let mut fill = vec![0usize; n * n];
        let _ = group.scan::<()>(0..order, |rank, g| {
            for (x, &y) in g.iter().enumerate() {
                let slot = x * n + y as usize;
                ranks[slot * list_len + fill[slot]] = rank as u32;
                fill[slot] += 1;
            }
            std::ops::ControlFlow::Continue(())
        });
        debug_assert!(fill.iter().all(|&f| f == list_len));
        Ok(AgreementIndex { n, order, list_len, ranks })
    }

    #[inline]
    pub fn list(&self, x: usize, y: usize) -> &[u32] {
        let slot = x * self.n + y;
        &self.ranks[slot * self.list_len..(slot + 1) * self.list_len]
    }

    /// Largest agreement count of `v` with any group element, and the lowest rank attaining it.
    pub fn max_agreement(&self, v: &[u16], counts: &mut Vec<u8>) -> (usize, usize) {
        counts.clear();
        counts.resize(self.order, 0);
        for (x, &y) in v.iter().enumerate() {
            for &r in self.list(x, y as usize) {
                counts[r as usize] += 1;
            }
        }
        let mut best = (0usize, 0usize);
        for (r, &c) in counts.iter().enumerate() {
            if c as usize > best.0 {
                best = (c as usize, r);
            }
        }
        best
    }
}

/// Agreement counts per group element plus a histogram of those counts, so
/// the current maximum is available in O(n).
struct Tally<'a> {
    index: &'a AgreementIndex,
    counts: Vec<u8>,
    hist: Vec<u32>,
}

impl<'a> Tally<'a> {
    fn new(index: &'a AgreementIndex) -> Self {
        let mut hist = vec![0u32; index.n + 1];
        hist[0] = index.order as u32;
        Tally { index, counts: vec![0; index.order], hist }
    }

    #[inline]
    fn add(&mut self, x: usize, y: usize) {
        for &r in self.index.list(x, y) {
            let c = &mut self.counts[r as usize];
            self.hist[*c as usize] -= 1;
            *c += 1;
            self.hist[*c as usize] += 1;
        }
    }

    #[inline]
    fn remove(&mut self, x: usize, y: usize) {
        for &r in self.index.list(x, y) {
            let c = &mut self.counts[r as usize];
            self.hist[*c as usize] -= 1;
            *c -= 1;
            self.hist[*c as usize] += 1;
        }
    }

    #[inline]
    fn max(&self) -> usize {
        self.hist.iter().rposition(|&h| h > 0).unwrap_or(0)
    }
}

/// Lexicographic ranking of the candidate permutations, i.e. of the image
/// sequence on the free points `2..q`.
#[derive(Debug, Clone, Copy)]
pub struct CandidateSpace {
    q: u32,
    free: usize,
}

impl CandidateSpace {
    pub fn new(q: u32) -> Self {
        CandidateSpace { q, free: q.saturating_sub(2) as usize }
    }

    /// `(q-2)!`.
    pub fn size(&self) -> u64 {
        (1..=self.free as u64).product()
    }

    pub fn unrank(&self, mut rank: u64) -> Permutation {
        let mut pool: Vec<u16> = (2..self.q as u16).collect();
        let mut images: Vec<u16> = vec![0, 1];
        for k in (0..self.free).rev() {
            let f: u64 = (1..=k as u64).product();
            let i = (rank / f) as usize;
            rank %= f;
            images.push(pool.remove(i));
        }
        images.push(self.q as u16);
        Permutation::from_images_unchecked(images)
    }

    pub fn rank(&self, v: &Permutation) -> u64 {
        let mut pool: Vec<u16> = (2..self.q as u16).collect();
        let mut rank = 0;
        for (k, x) in (0..self.free).rev().zip(2..) {
            let i = pool.iter().position(|&p| p == v.image(x)).expect("candidate fixes 0, 1, inf");
            pool.remove(i);
            rank += i as u64 * (1..=k as u64).product::<u64>();
        }
        rank
    }

    /// Length of the image prefix fixed per chunk.
    fn prefix_len(&self) -> usize {
        let mut k = 0;
        while k < self.free {
            let chunk: u64 = (1..=(self.free - k) as u64).product();
            let chunks: u64 = ((self.free - k + 1) as u64..=self.free as u64).product();
            if chunk <= 50_000 && chunks >= 64 {
                break;
            }
            k += 1;
        }
        k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Exact,
    /// Stopped at the candidate budget; the radius is a lower bound.
    Partial,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub q: u32,
    pub mode: SearchMode,
    pub covering_radius: usize,
    pub witness_of_max: Option<Permutation>,
    /// Candidates covered, whether evaluated or pruned.
    pub permutations_scanned: u64,
    /// Candidates whose distance was computed in full.
    pub leaves_evaluated: u64,
    pub total_candidates: u64,
    pub expected: u64,
    pub matches_expected: bool,
    pub wall_time_secs: f64,
}

/// Resumable state of an exact search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub q: u32,
    pub next_candidate_rank: u64,
    pub current_max: usize,
    pub witness_so_far: Option<Permutation>,
    pub leaves_evaluated: u64,
    pub elapsed: f64,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Self, CoverError> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), CoverError> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_string_pretty(self)?)?;
        fs::rename(tmp, path)?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub exec: Exec,
    /// Stop after the chunk where this many candidates have been covered.
    pub budget: Option<u64>,
    pub checkpoint: Option<PathBuf>,
    pub checkpoint_every: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { exec: Exec::Parallel, budget: None, checkpoint: None, checkpoint_every: DEFAULT_CHECKPOINT_EVERY }
    }
}

#[derive(Debug, Clone, Default)]
struct ChunkResult {
    best: Option<(usize, u64)>,
    leaves: u64,
}

fn merge_chunks(a: ChunkResult, b: ChunkResult) -> ChunkResult {
    let best = match (a.best, b.best) {
        (Some(x), Some(y)) => Some(if x.0 != y.0 { x.max(y) } else { (x.0, x.1.min(y.1)) }),
        (x, y) => x.or(y),
    };
    ChunkResult { best, leaves: a.leaves + b.leaves }
}

struct Dfs<'a> {
    tally: Tally<'a>,
    n: usize,
    q: usize,
    shared: &'a AtomicUsize,
    images: Vec<u16>,
    used: Vec<bool>,
    local: Option<usize>,
    found: Option<Vec<u16>>,
    leaves: u64,
}

impl Dfs<'_> {
    /// Smallest distance still worth exploring.
    #[inline]
    fn need(&self) -> usize {
        let shared = self.shared.load(Ordering::Relaxed);
        self.local.map_or(0, |d| d + 1).max(shared)
    }

    #[inline]
    fn pruned(&self) -> bool {
        self.n - self.tally.max() < self.need()
    }

    fn walk(&mut self, x: usize) {
        if x == self.q {
            self.leaves += 1;
            let d = self.n - self.tally.max();
            if d >= self.need() {
                self.local = Some(d);
                self.found = Some(self.images.clone());
                self.shared.fetch_max(d, Ordering::Relaxed);
            }
            return;
        }
        for y in 2..self.q {
            if self.used[y] {
                continue;
            }
            self.used[y] = true;
            self.images[x] = y as u16;
            self.tally.add(x, y);
            if !self.pruned() {
                self.walk(x + 1);
            }
            self.tally.remove(x, y);
            self.used[y] = false;
        }
    }
}

/// Exact covering radius of PGL₂(q) in S_{q+1}.
pub fn exact_covering_radius(q: u64, opts: &SearchOptions) -> Result<SearchReport, CoverError> {
    let group = Group::for_q(q)?;
    let q = group.q();
    if q > MAX_EXACT_Q {
        return Err(CoverError::OutOfRange(q));
    }
    let started = Instant::now();
    let index = AgreementIndex::new(&group)?;
    let n = group.degree();
    let space = CandidateSpace::new(q);
    let total = space.size();
    let k = space.prefix_len();
    let chunk_size: u64 = (1..=(space.free - k) as u64).product();
    let n_chunks = total / chunk_size;

    let mut acc = ChunkResult::default();
    let mut next_rank = 0u64;
    let mut prior_elapsed = 0.0;
    if let Some(path) = opts.checkpoint.as_deref().filter(|p| p.exists()) {
        let cp = Checkpoint::load(path)?;
        if cp.q != q {
            return Err(CoverError::CheckpointMismatch { expected: q, found: cp.q });
        }
        if cp.next_candidate_rank % chunk_size != 0 || cp.next_candidate_rank > total {
            return Err(CoverError::CheckpointRank(cp.next_candidate_rank));
        }
        next_rank = cp.next_candidate_rank;
        acc.best = cp.witness_so_far.as_ref().map(|w| (cp.current_max, space.rank(w)));
        acc.leaves = cp.leaves_evaluated;
        prior_elapsed = cp.elapsed;
    }

    let shared = AtomicUsize::new(acc.best.map_or(0, |b| b.0));
    let mut base = Tally::new(&index);
    for x in [0, 1, n - 1] {
        base.add(x, x);
    }

    let run_chunk = |c: u64| -> ChunkResult {
        let mut dfs = Dfs {
            tally: Tally { index: &index, counts: base.counts.clone(), hist: base.hist.clone() },
            n,
            q: q as usize,
            shared: &shared,
            images: Permutation::identity(n).images().to_vec(),
            used: vec![false; n],
            local: None,
            found: None,
            leaves: 0,
        };
        let prefix = space.unrank(c * chunk_size);
        for x in 2..2 + k {
            let y = prefix.image(x) as usize;
            dfs.used[y] = true;
            dfs.images[x] = y as u16;
            dfs.tally.add(x, y);
        }
        if !dfs.pruned() {
            dfs.walk(2 + k);
        }
        let best = dfs.local.zip(dfs.found).map(|(d, imgs)| {
            (d, space.rank(&Permutation::from_images_unchecked(imgs)))
        });
        ChunkResult { best, leaves: dfs.leaves }
    };

    let per_batch = (opts.checkpoint_every / chunk_size).max(1);
    let mut chunk = next_rank / chunk_size;
    let limit = match opts.budget {
        Some(budget) => budget.div_ceil(chunk_size).clamp(1, n_chunks),
        None => n_chunks,
    };
    while chunk < limit {
        let end = (chunk + per_batch).min(limit);
        let start = chunk;
        let batch = par::map_reduce(
            opts.exec,
            (end - start) as usize,
            ChunkResult::default(),
            |i| run_chunk(start + i as u64),
            merge_chunks,
        );
        acc = merge_chunks(acc, batch);
        chunk = end;
        if let Some(path) = &opts.checkpoint {
            Checkpoint {
                q,
                next_candidate_rank: chunk * chunk_size,
                current_max: acc.best.map_or(0, |b| b.0),
                witness_so_far: acc.best.map(|b| space.unrank(b.1)),
                leaves_evaluated: acc.leaves,
                elapsed: prior_elapsed + started.elapsed().as_secs_f64(),
            }
            .save(path)?;
        }
    }

    let (radius, witness) = match acc.best {
        Some((d, rank)) => (d, Some(space.unrank(rank))),
        None => (0, None),
    };
    let expected = expected_cr(q as u64)?;
    Ok(SearchReport {
        q,
        mode: if chunk < n_chunks { SearchMode::Partial } else { SearchMode::Exact },
        covering_radius: radius,
        witness_of_max: witness,
        permutations_scanned: (chunk * chunk_size).min(total),
        leaves_evaluated: acc.leaves,
        total_candidates: total,
        expected,
        matches_expected: radius as u64 == expected,
        wall_time_secs: prior_elapsed + started.elapsed().as_secs_f64(),
    })
}

/// Histogram of d(v, G) over uniformly random v.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleReport {
    pub q: u32,
    pub trials: u64,
    pub seed: u64,
    pub histogram: BTreeMap<usize, u64>,
    pub max_observed: usize,
    pub expected_cr: u64,
    /// Trials whose distance exceeded the expected covering radius.
    pub violations: u64,
}

impl SampleReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("distance,count\n");
        for (d, c) in &self.histogram {
            s.push_str(&format!("{d},{c}\n"));
        }
        s
    }

    pub fn to_search_report(&self, max_witness: Option<Permutation>) -> SearchReport {
        SearchReport {
            q: self.q,
            mode: SearchMode::Sampled,
            covering_radius: self.max_observed,
            witness_of_max: max_witness,
            permutations_scanned: self.trials,
            leaves_evaluated: self.trials,
            total_candidates: self.trials,
            expected: self.expected_cr,
            matches_expected: self.max_observed as u64 == self.expected_cr,
            wall_time_secs: 0.0,
        }
    }
}

const SAMPLE_CHUNK: u64 = 1024;

/// The `i`-th sampled permutation: a Fisher–Yates shuffle driven by ChaCha8
/// seeded with `seed` on stream `i`, so every trial is independent of scheduling.
pub fn sample_permutation(n: usize, seed: u64, trial: u64) -> Permutation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let mut images: Vec<u16> = (0..n as u16).collect();
    images.shuffle(&mut rng);
    Permutation::from_images_unchecked(images)
}

pub fn sample_distances(group: &Group, trials: u64, seed: u64, exec: Exec) -> Result<SampleReport, CoverError> {
    let n = group.degree();
    let index = AgreementIndex::new(group).ok();
    let n_chunks = trials.div_ceil(SAMPLE_CHUNK);
    let hist = par::map_reduce(
        exec,
        n_chunks as usize,
        vec![0u64; n + 1],
        |c| {
            let mut local = vec![0u64; n + 1];
            let mut counts = Vec::new();
            let start = c as u64 * SAMPLE_CHUNK;
            for trial in start..(start + SAMPLE_CHUNK).min(trials) {
                let v = sample_permutation(n, seed, trial);
                let d = match &index {
                    Some(ix) => n - ix.max_agreement(v.images(), &mut counts).0,
                    None => metric::distance_to_group(&v, group, Exec::Sequential)
                        .expect("degree matches")
                        .distance,
                };
                local[d] += 1;
            }
            local
        },
        |mut a, b| {
            a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            a
        },
    );
    let expected = expected_cr(group.q() as u64)?;
    let histogram: BTreeMap<usize, u64> =
        hist.iter().enumerate().filter(|(_, &c)| c > 0).map(|(d, &c)| (d, c)).collect();
    let max_observed = histogram.keys().next_back().copied().unwrap_or(0);
    let violations = histogram.range(expected as usize + 1..).map(|(_, c)| c).sum();
    Ok(SampleReport { q: group.q(), trials, seed, histogram, max_observed, expected_cr: expected, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_ranking_roundtrip() {
        let space = CandidateSpace::new(7);
        assert_eq!(space.size(), 120);
        let mut prev: Option<Permutation> = None;
        for r in 0..space.size() {
            let v = space.unrank(r);
            assert_eq!(space.rank(&v), r);
            assert_eq!((v.image(0), v.image(1), v.image(7)), (0, 1, 7));
            if let Some(p) = prev {
                assert!(p < v, "lexicographic order");
            }
            prev = Some(v);
        }
    }

    #[test]
    fn small_exact_values() {
        let opts = SearchOptions::default();
        for (q, cr) in [(2u64, 0usize), (3, 0), (4, 2), (5, 2)] {
            let r = exact_covering_radius(q, &opts).unwrap();
            assert_eq!(r.covering_radius, cr, "q = {q}");
            assert_eq!(r.mode, SearchMode::Exact);
            assert!(r.matches_expected);
        }
    }

    #[test]
    fn out_of_range_q() {
        assert!(matches!(exact_covering_radius(16, &SearchOptions::default()), Err(CoverError::OutOfRange(16))));
    }

    #[test]
    fn stabilize_member_gives_identity() {
        let g = Group::for_q(7).unwrap();
        for rank in [0, 5, 200] {
            assert!(stabilize_triple(&g.element(rank), &g).unwrap().is_identity());
        }
    }

    #[test]
    fn agreement_index_matches_scan() {
        let g = Group::for_q(5).unwrap();
        let ix = AgreementIndex::new(&g).unwrap();
        let mut counts = Vec::new();
        for trial in 0..50 {
            let v = sample_permutation(6, 3, trial);
            let (agree, rank) = ix.max_agreement(v.images(), &mut counts);
            let d = metric::distance_to_group(&v, &g, Exec::Sequential).unwrap();
            assert_eq!((6 - agree, rank), (d.distance, d.argmin_index));
        }
    }

    #[test]
    fn histogram_totals() {
        let g = Group::for_q(7).unwrap();
        let r = sample_distances(&g, 3000, 9, Exec::Parallel).unwrap();
        assert_eq!(r.histogram.values().sum::<u64>(), 3000);
        assert_eq!(r.violations, 0);
        assert!(r.max_observed <= 4);
        assert!(r.to_csv().starts_with("distance,count\n"));
    }
}
