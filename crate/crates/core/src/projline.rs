//! The projective line Ω = GF(q) ∪ {∞} and the action of PGL₂(q) on it.
//!
//! Points are numbered `0..=q`: the subfield elements in increasing field
//! index order, then ∞ as `q`. Point 0 is the field zero and point 1 the field one.

use std::fmt;
use std::ops::{ControlFlow, Range};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Fe, FieldTower, GfError};

/// Largest q for which the group is materialized as a table.
pub const MAX_STORED_Q: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProjError {
    #[error(transparent)]
    Field(#[from] GfError),
    #[error("matrix entry {0} is not in GF(q)")]
    NotInSubfield(Fe),
    #[error("matrix is singular")]
    Singular,
    #[error("points of a triple must be pairwise distinct, got ({0}, {1}, {2})")]
    RepeatedPoint(Point, Point, Point),
    #[error("point {0} is outside the projective line of size {1}")]
    PointOutOfRange(u32, u32),
    #[error("not a permutation of 0..{0}: {1}")]
    InvalidPermutation(usize, String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("group table for q = {0} exceeds the materialization limit q <= {MAX_STORED_Q}")]
    TableTooLarge(u32),
}

/// A point of Ω by index; `q` is ∞.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub u16);

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A permutation of `0..n`, stored as its image array.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u16>", into = "Vec<u16>")]
pub struct Permutation {
    images: Vec<u16>,
}

impl TryFrom<Vec<u16>> for Permutation {
    type Error = ProjError;
    fn try_from(images: Vec<u16>) -> Result<Self, ProjError> {
        Permutation::new(images)
    }
}

impl From<Permutation> for Vec<u16> {
    fn from(p: Permutation) -> Self {
        p.images
    }
}

impl Permutation {
    pub fn new(images: Vec<u16>) -> Result<Self, ProjError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            let slot = seen
                .get_mut(i as usize)
                .ok_or_else(|| ProjError::InvalidPermutation(n, format!("image {i} out of range")))?;
            if *slot {
                return Err(ProjError::InvalidPermutation(n, format!("image {i} repeated")));
            }
            *slot = true;
        }
        Ok(Permutation { images })
    }

    pub(crate) fn from_images_unchecked(images: Vec<u16>) -> Self {
        debug_assert!(Permutation::new(images.clone()).is_ok());
        Permutation { images }
    }

    pub fn identity(n: usize) -> Self {
        Permutation { images: (0..n as u16).collect() }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[u16] {
        &self.images
    }

    #[inline]
    pub fn image(&self, x: usize) -> u16 {
        self.images[x]
    }

    /// `x ↦ other(self(x))`: apply `self` first.
    pub fn then(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.len(), other.len(), "composing permutations of different degree");
        Permutation { images: self.images.iter().map(|&i| other.images[i as usize]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u16; self.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j as usize] = i as u16;
        }
        Permutation { images: inv }
    }

    pub fn fix_count(&self) -> usize {
        fix_count(&self.images)
    }

    pub fn is_identity(&self) -> bool {
        self.fix_count() == self.len()
    }

    /// One line, space-separated images.
    pub fn to_line(&self) -> String {
        let parts: Vec<String> = self.images.iter().map(|i| i.to_string()).collect();
        parts.join(" ")
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

/// Number of fixed points of an image array.
#[inline]
pub fn fix_count(images: &[u16]) -> usize {
    images.iter().enumerate().filter(|&(i, &j)| i == j as usize).count()
}

/// Parses the permutation file format: one permutation of `0..=q` per line,
/// space-separated images, with `inf` as an alias for `q`. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_permutations(text: &str, q: u32) -> Result<Vec<Permutation>, ProjError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| ProjError::Parse { line: lineno + 1, msg };
        let images = line
            .split_whitespace()
            .map(|tok| {
                if tok.eq_ignore_ascii_case("inf") {
                    return Ok(q as u16);
                }
                let v: u32 = tok.parse().map_err(|_| err(format!("bad token {tok:?}")))?;
                if v > q {
                    return Err(err(format!("point {v} exceeds q = {q}")));
                }
                Ok(v as u16)
            })
            .collect::<Result<Vec<u16>, _>>()?;
        if images.len() != q as usize + 1 {
            return Err(err(format!("expected {} images, found {}", q + 1, images.len())));
        }
        out.push(Permutation::new(images).map_err(|e| err(e.to_string()))?);
    }
    Ok(out)
}

pub fn format_permutations<'a>(perms: impl IntoIterator<Item = &'a Permutation>) -> String {
    let mut s = String::new();
    for p in perms {
        s.push_str(&p.to_line());
        s.push('\n');
    }
    s
}

/// A linear fractional map `x ↦ (ax + b)/(cx + d)` over GF(q), normalized so
/// the first nonzero entry of `(a, b, c, d)` is one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MobiusMap {
    pub a: Fe,
    pub b: Fe,
    pub c: Fe,
    pub d: Fe,
}

/// Ω with its subfield arithmetic on point indices.
#[derive(Debug, Clone)]
pub struct ProjectiveLine {
    tower: FieldTower,
    q: u32,
    elems: Vec<Fe>,
    point_of: Vec<u16>,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
}

const NOT_A_POINT: u16 = u16::MAX;

impl ProjectiveLine {
    pub fn new(tower: FieldTower) -> Self {
        let q = tower.q();
        let elems: Vec<Fe> = tower.elements().filter(|&z| tower.in_subfield(z)).collect();
        assert_eq!(elems.len(), q as usize);
        let mut point_of = vec![NOT_A_POINT; tower.size() as usize];
        for (i, z) in elems.iter().enumerate() {
            point_of[z.0 as usize] = i as u16;
        }
        let qu = q as usize;
        let mut add = vec![0u16; qu * qu];
        let mut mul = vec![0u16; qu * qu];
        for i in 0..qu {
            for j in 0..qu {
                add[i * qu + j] = point_of[tower.add(elems[i], elems[j]).0 as usize];
                mul[i * qu + j] = point_of[tower.mul(elems[i], elems[j]).0 as usize];
            }
        }
        let neg = elems.iter().map(|&z| point_of[tower.neg(z).0 as usize]).collect();
        let inv = elems
            .iter()
            .map(|&z| tower.inv(z).map(|w| point_of[w.0 as usize]).unwrap_or(NOT_A_POINT))
            .collect();
        ProjectiveLine { tower, q, elems, point_of, add, mul, neg, inv }
    }

    pub fn for_q(q: u64) -> Result<Self, ProjError> {
        Ok(Self::new(FieldTower::for_q(q)?))
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// `|Ω| = q + 1`.
    pub fn n_points(&self) -> usize {
        self.q as usize + 1
    }

    pub fn infinity(&self) -> Point {
        Point(self.q as u16)
    }

    pub fn points(&self) -> impl Iterator<Item = Point> {
        (0..=self.q as u16).map(Point)
    }

    /// The field element at a finite point, `None` for ∞.
    pub fn element(&self, x: Point) -> Option<Fe> {
        self.elems.get(x.0 as usize).copied()
    }

    /// The point of a subfield element, `None` if the element is not in GF(q).
    pub fn point_of(&self, z: Fe) -> Option<Point> {
        match self.point_of[z.0 as usize] {
            NOT_A_POINT => None,
            i => Some(Point(i)),
        }
    }

    fn check_point(&self, x: Point) -> Result<(), ProjError> {
        if x.0 as u32 > self.q {
            return Err(ProjError::PointOutOfRange(x.0 as u32, self.q + 1));
        }
        Ok(())
    }

    /// Builds a normalized map from a matrix over GF(q).
    pub fn mobius(&self, a: Fe, b: Fe, c: Fe, d: Fe) -> Result<MobiusMap, ProjError> {
        let t = &self.tower;
        for z in [a, b, c, d] {
            if !t.in_subfield(z) {
                return Err(ProjError::NotInSubfield(z));
            }
        }
        if t.sub(t.mul(a, d), t.mul(b, c)).is_zero() {
            return Err(ProjError::Singular);
        }
        let lead = [a, b, c, d].into_iter().find(|z| !z.is_zero()).expect("nonsingular");
        let s = t.inv(lead)?;
        Ok(MobiusMap { a: t.mul(a, s), b: t.mul(b, s), c: t.mul(c, s), d: t.mul(d, s) })
    }

    pub fn identity_map(&self) -> MobiusMap {
        MobiusMap { a: Fe::ONE, b: Fe::ZERO, c: Fe::ZERO, d: Fe::ONE }
    }

    /// Evaluates a map through the field tower.
    pub fn apply(&self, m: &MobiusMap, x: Point) -> Point {
        let t = &self.tower;
        let inf = self.infinity();
        let (num, den) = match self.element(x) {
            None => (m.a, m.c),
            Some(z) => (t.add(t.mul(m.a, z), m.b), t.add(t.mul(m.c, z), m.d)),
        };
        if den.is_zero() {
            return inf;
        }
        let v = t.div(num, den).expect("nonzero denominator");
        self.point_of(v).expect("map over GF(q) sends GF(q) into itself")
    }

    pub fn permutation(&self, m: &MobiusMap) -> Permutation {
        Permutation::from_images_unchecked(self.points().map(|x| self.apply(m, x).0).collect())
    }

    /// The unique normalized map sending `0 ↦ α`, `1 ↦ β`, `∞ ↦ γ`.
    pub fn from_triple(&self, alpha: Point, beta: Point, gamma: Point) -> Result<MobiusMap, ProjError> {
        for x in [alpha, beta, gamma] {
            self.check_point(x)?;
        }
        if alpha == beta || beta == gamma || alpha == gamma {
            return Err(ProjError::RepeatedPoint(alpha, beta, gamma));
        }
        let t = &self.tower;
        let hom = |x: Point| match self.element(x) {
            Some(z) => (z, Fe::ONE),
            None => (Fe::ONE, Fe::ZERO),
        };
        // Columns (a, c) ∝ γ and (b, d) ∝ α, scaled so their sum is ∝ β.
        let (ga, gc) = hom(gamma);
        let (aa, ac) = hom(alpha);
        let (ba, bc) = hom(beta);
        let det = t.sub(t.mul(ga, ac), t.mul(aa, gc));
        let lambda = t.div(t.sub(t.mul(ba, ac), t.mul(aa, bc)), det)?;
        let mu = t.div(t.sub(t.mul(ga, bc), t.mul(ba, gc)), det)?;
        self.mobius(t.mul(lambda, ga), t.mul(mu, aa), t.mul(lambda, gc), t.mul(mu, ac))
    }

    #[inline]
    fn padd(&self, x: u16, y: u16) -> u16 {
        self.add[x as usize * self.q as usize + y as usize]
    }

    #[inline]
    fn pmul(&self, x: u16, y: u16) -> u16 {
        self.mul[x as usize * self.q as usize + y as usize]
    }

    #[inline]
    fn psub(&self, x: u16, y: u16) -> u16 {
        self.padd(x, self.neg[y as usize])
    }

    #[inline]
    fn pdiv(&self, x: u16, y: u16) -> u16 {
        self.pmul(x, self.inv[y as usize])
    }

    /// Writes the images of the map `0 ↦ α, 1 ↦ β, ∞ ↦ γ` into `out`, using
    /// the point arithmetic tables. The triple must be pairwise distinct.
    pub fn triple_images(&self, alpha: u16, beta: u16, gamma: u16, out: &mut [u16]) {
        let inf = self.q as u16;
        let hom = |x: u16| if x == inf { (1u16, 0u16) } else { (x, 1u16) };
        let (ga, gc) = hom(gamma);
        let (aa, ac) = hom(alpha);
        let (ba, bc) = hom(beta);
        let det = self.psub(self.pmul(ga, ac), self.pmul(aa, gc));
        let lambda = self.pdiv(self.psub(self.pmul(ba, ac), self.pmul(aa, bc)), det);
        let mu = self.pdiv(self.psub(self.pmul(ga, bc), self.pmul(ba, gc)), det);
        let (a, b, c, d) = (self.pmul(lambda, ga), self.pmul(mu, aa), self.pmul(lambda, gc), self.pmul(mu, ac));
        for x in 0..self.q as u16 {
            let den = self.padd(self.pmul(c, x), d);
            out[x as usize] = if den == 0 {
                inf
            } else {
                self.pdiv(self.padd(self.pmul(a, x), b), den)
            };
        }
        out[inf as usize] = gamma;
    }
}

/// How the group elements are produced during iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Storage {
    /// Materialize when `q <= MAX_STORED_Q`, stream otherwise.
    Auto,
    Stored,
    Streamed,
}

/// PGL₂(q) acting on Ω, enumerated by ordered triples `(α, β, γ)` of distinct
/// points in lexicographic order; element `rank` is the map `0 ↦ α, 1 ↦ β, ∞ ↦ γ`.
#[derive(Debug, Clone)]
pub struct Group {
    line: ProjectiveLine,
    table: Option<Vec<u16>>,
}

/// Metadata export for a group enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupInfo {
    pub q: u32,
    pub degree: usize,
    pub order: usize,
    pub materialized: bool,
    /// FNV-1a 64 over every image, in enumeration order, as hex.
    pub checksum: String,
}

impl Group {
    pub fn new(line: ProjectiveLine, storage: Storage) -> Result<Self, ProjError> {
        let q = line.q();
        let store = match storage {
            Storage::Auto => q <= MAX_STORED_Q,
            Storage::Stored if q > MAX_STORED_Q => return Err(ProjError::TableTooLarge(q)),
            Storage::Stored => true,
            Storage::Streamed => false,
        };
        let mut group = Group { line, table: None };
        if store {
            let n = group.degree();
            let mut table = vec![0u16; group.order() * n];
            for (rank, chunk) in table.chunks_mut(n).enumerate() {
                let (a, b, c) = group.triple_of(rank);
                group.line.triple_images(a.0, b.0, c.0, chunk);
            }
            group.table = Some(table);
        }
        Ok(group)
    }

    pub fn for_q(q: u64) -> Result<Self, ProjError> {
        Self::new(ProjectiveLine::for_q(q)?, Storage::Auto)
    }

    pub fn line(&self) -> &ProjectiveLine {
        &self.line
    }

    pub fn tower(&self) -> &FieldTower {
        self.line.tower()
    }

    pub fn q(&self) -> u32 {
        self.line.q()
    }

    /// Number of points acted on, `q + 1`.
    pub fn degree(&self) -> usize {
        self.line.n_points()
    }

    /// `q³ - q`.
    pub fn order(&self) -> usize {
        let n = self.degree();
        n * (n - 1) * (n - 2)
    }

    pub fn is_materialized(&self) -> bool {
        self.table.is_some()
    }

    pub fn triple_of(&self, rank: usize) -> (Point, Point, Point) {
        let n = self.degree();
        let (per_a, per_b) = ((n - 1) * (n - 2), n - 2);
        let a = rank / per_a;
        let rest = rank % per_a;
        let mut b = rest / per_b;
        let mut c = rest % per_b;
        if b >= a {
            b += 1;
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if c >= lo {
            c += 1;
        }
        if c >= hi {
            c += 1;
        }
        (Point(a as u16), Point(b as u16), Point(c as u16))
    }

    pub fn rank_of(&self, alpha: Point, beta: Point, gamma: Point) -> usize {
        let n = self.degree();
        let (a, b, c) = (alpha.0 as usize, beta.0 as usize, gamma.0 as usize);
        let b_adj = b - (b > a) as usize;
        let c_adj = c - (c > a) as usize - (c > b) as usize;
        a * (n - 1) * (n - 2) + b_adj * (n - 2) + c_adj
    }

    /// Rank of the group element with the given image array, if it is one.
    pub fn rank_of_images(&self, images: &[u16]) -> Option<usize> {
        let inf = self.q() as usize;
        let (a, b, c) = (images[0], images[1], images[inf]);
        if a == b || b == c || a == c {
            return None;
        }
        let rank = self.rank_of(Point(a), Point(b), Point(c));
        let mut buf = vec![0u16; self.degree()];
        self.element_into(rank, &mut buf);
        (buf == images).then_some(rank)
    }

    pub fn element_into(&self, rank: usize, out: &mut [u16]) {
        match &self.table {
            Some(t) => {
                let n = self.degree();
                out.copy_from_slice(&t[rank * n..(rank + 1) * n]);
            }
            None => {
                let (a, b, c) = self.triple_of(rank);
                self.line.triple_images(a.0, b.0, c.0, out);
            }
        }
    }

    pub fn element(&self, rank: usize) -> Permutation {
        let mut buf = vec![0u16; self.degree()];
        self.element_into(rank, &mut buf);
        Permutation::from_images_unchecked(buf)
    }

    pub fn mobius(&self, rank: usize) -> MobiusMap {
        let (a, b, c) = self.triple_of(rank);
        self.line.from_triple(a, b, c).expect("distinct triple")
    }

    /// Visits the elements with ranks in `range`, in order, until `visit`
    /// breaks. Stored and streamed groups visit identical sequences.
    pub fn scan<B>(
        &self,
        range: Range<usize>,
        mut visit: impl FnMut(usize, &[u16]) -> ControlFlow<B>,
    ) -> ControlFlow<B> {
        let n = self.degree();
        match &self.table {
            Some(t) => {
                for rank in range {
                    visit(rank, &t[rank * n..(rank + 1) * n])?;
                }
            }
            None => {
                let mut buf = vec![0u16; n];
                for rank in range {
                    let (a, b, c) = self.triple_of(rank);
                    self.line.triple_images(a.0, b.0, c.0, &mut buf);
                    visit(rank, &buf)?;
                }
            }
        }
        ControlFlow::Continue(())
    }

    pub fn iter(&self) -> impl Iterator<Item = Permutation> + '_ {
        (0..self.order()).map(|r| self.element(r))
    }

    pub fn info(&self) -> GroupInfo {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        let _ = self.scan::<()>(0..self.order(), |_, images| {
            for &x in images {
                for byte in x.to_le_bytes() {
                    hash ^= byte as u64;
                    hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
                }
            }
            ControlFlow::Continue(())
        });
        GroupInfo {
            q: self.q(),
            degree: self.degree(),
            order: self.order(),
            materialized: self.is_materialized(),
            checksum: format!("{hash:016x}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(q: u64) -> ProjectiveLine {
        ProjectiveLine::for_q(q).unwrap()
    }

    #[test]
    fn identity_and_inversion_maps() {
        let l = line(7);
        let id = l.identity_map();
        assert!(l.points().all(|x| l.apply(&id, x) == x));
        let recip = l.mobius(Fe::ZERO, Fe::ONE, Fe::ONE, Fe::ZERO).unwrap();
        assert_eq!(l.apply(&recip, Point(0)), l.infinity());
        assert_eq!(l.apply(&recip, l.infinity()), Point(0));
        let affine = l.mobius(Fe(3), Fe(2), Fe::ZERO, Fe::ONE).unwrap();
        assert_eq!(l.apply(&affine, l.infinity()), l.infinity());
    }

    #[test]
    fn from_triple_basic_cases() {
        let l = line(5);
        let inf = l.infinity();
        assert_eq!(l.from_triple(Point(0), Point(1), inf).unwrap(), l.identity_map());
        let recip = l.mobius(Fe::ZERO, Fe::ONE, Fe::ONE, Fe::ZERO).unwrap();
        assert_eq!(l.from_triple(inf, Point(1), Point(0)).unwrap(), recip);
        assert!(matches!(
            l.from_triple(Point(2), Point(2), inf),
            Err(ProjError::RepeatedPoint(..))
        ));
        assert!(matches!(
            l.from_triple(Point(2), Point(9), inf),
            Err(ProjError::PointOutOfRange(9, 6))
        ));
    }

    #[test]
    fn mobius_rejects_bad_matrices() {
        let l = line(7);
        assert_eq!(l.mobius(Fe::ONE, Fe::ONE, Fe::ONE, Fe::ONE), Err(ProjError::Singular));
        let outside = l.tower().rho().unwrap();
        assert_eq!(
            l.mobius(outside, Fe::ZERO, Fe::ZERO, Fe::ONE),
            Err(ProjError::NotInSubfield(outside))
        );
    }

    #[test]
    fn group_orders() {
        for (q, order) in [(2u64, 6usize), (3, 24), (7, 336)] {
            assert_eq!(Group::for_q(q).unwrap().order(), order);
        }
    }

    #[test]
    fn rank_triple_roundtrip() {
        let g = Group::for_q(5).unwrap();
        for rank in 0..g.order() {
            let (a, b, c) = g.triple_of(rank);
            assert!(a != b && b != c && a != c);
            assert_eq!(g.rank_of(a, b, c), rank);
        }
    }

    #[test]
    fn table_fast_path_matches_tower_arithmetic() {
        for q in [4u64, 8, 9, 11] {
            let g = Group::for_q(q).unwrap();
            for rank in 0..g.order() {
                assert_eq!(g.element(rank), g.line().permutation(&g.mobius(rank)));
            }
        }
    }

    #[test]
    fn stored_and_streamed_agree() {
        let stored = Group::new(line(9), Storage::Stored).unwrap();
        let streamed = Group::new(line(9), Storage::Streamed).unwrap();
        assert!(stored.is_materialized() && !streamed.is_materialized());
        assert_eq!(stored.info().checksum, streamed.info().checksum);
        let mut a = Vec::new();
        let mut b = Vec::new();
        let _ = stored.scan::<()>(100..140, |r, p| {
            a.push((r, p.to_vec()));
            ControlFlow::Continue(())
        });
        let _ = streamed.scan::<()>(100..140, |r, p| {
            b.push((r, p.to_vec()));
            ControlFlow::Continue(())
        });
        assert_eq!(a, b);
    }

    #[test]
    fn stored_table_limit() {
        let big = line(67);
        assert_eq!(Group::new(big, Storage::Stored).unwrap_err(), ProjError::TableTooLarge(67));
    }

    #[test]
    fn fix_count_cases() {
        assert_eq!(Permutation::identity(8).fix_count(), 8);
        let rot = Permutation::new((0..8).map(|i| (i + 1) % 8).collect()).unwrap();
        assert_eq!(rot.fix_count(), 0);
    }

    #[test]
    fn permutation_validation_and_algebra() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
        let p = Permutation::new(vec![2, 0, 1, 3]).unwrap();
        assert!(p.then(&p.inverse()).is_identity());
        assert_eq!(p.then(&p).images(), &[1, 2, 0, 3]);
    }

    #[test]
    fn parse_file_format() {
        let text = "# witness\n0 1 inf 2\n\n3 2 1 0\n";
        let perms = parse_permutations(text, 3).unwrap();
        assert_eq!(perms.len(), 2);
        assert_eq!(perms[0].images(), &[0, 1, 3, 2]);
        assert_eq!(format_permutations(&perms), "0 1 3 2\n3 2 1 0\n");
        assert!(matches!(parse_permutations("0 1 2", 3), Err(ProjError::Parse { line: 1, .. })));
        assert!(matches!(parse_permutations("0 1 2 7", 3), Err(ProjError::Parse { .. })));
        assert!(matches!(parse_permutations("0 1 1 2", 3), Err(ProjError::Parse { .. })));
        assert!(matches!(parse_permutations("0 x 1 2", 3), Err(ProjError::Parse { .. })));
    }

    #[test]
    fn permutation_serde_validates() {
        let p: Permutation = serde_json::from_str("[1,0,2]").unwrap();
        assert_eq!(p.images(), &[1, 0, 2]);
        assert!(serde_json::from_str::<Permutation>("[1,1,2]").is_err());
    }
}
