//! The explicit far permutation for q ≡ 1 (mod 6) and its certificate.
//!
//! With ρ of order 2(q+1) and Δ = {y ∈ GF(q²) : y^{q+1} = -1}, the maps
//!
//! ```text
//! σ: Ω → Δ,  x ↦ (x + ρ)/(1 - ρx),   ∞ ↦ -1/ρ
//! τ: Δ → Ω,  y ↦ (y - ρ)/(1 + ρy),   -1/ρ ↦ ∞
//! ```
//!
//! are mutually inverse, cubing permutes Δ, and the composite
//! `x ↦ τ(σ(x)³)` agrees with every element of PGL₂(q) on at most four
//! points. Hence its distance to the group is at least q - 3.
//!
//! Everything here is checked by exhaustion; nothing is taken on faith.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Fe, FieldTower, GfError};
use crate::metric::{self, MetricError};
use crate::par::{self, Exec};
use crate::projline::{Group, MobiusMap, Permutation, Point, ProjError, ProjectiveLine};

/// Upper bound on coincidences between the witness and any group element.
pub const COINCIDENCE_BOUND: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("q = {0} is even; the construction needs odd q")]
    EvenQ(u32),
    #[error("q = {0} is not congruent to 1 mod 6")]
    NotOneModSix(u32),
    #[error("element {0} is not in the norm -1 set")]
    NotInDelta(Fe),
    /// A mathematical check failed; carries the first counterexample.
    #[error("check `{check}` failed: {detail}")]
    CheckFailed { check: &'static str, detail: String },
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Proj(#[from] ProjError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

impl WitnessError {
    /// True for failures of a mathematical claim, as opposed to bad input.
    pub fn is_check_failure(&self) -> bool {
        matches!(self, WitnessError::CheckFailed { .. })
    }
}

fn failed(check: &'static str, detail: impl Into<String>) -> WitnessError {
    WitnessError::CheckFailed { check, detail: detail.into() }
}

/// `{y : y^{q+1} = -1}` as `ρ·{z : z^{q+1} = 1}`, sorted by index.
pub fn build_delta(tower: &FieldTower, rho: Fe) -> Result<Vec<Fe>, WitnessError> {
    let q = tower.q();
    if q.is_multiple_of(2) {
        return Err(WitnessError::EvenQ(q));
    }
    // The norm-one subgroup is generated by primitive^(q-1).
    let step = (q - 1) as u64;
    let mut delta: Vec<Fe> = (0..=q as u64)
        .map(|k| tower.mul(rho, tower.antilog(step * k)))
        .collect();
    delta.sort_unstable();
    Ok(delta)
}

/// `{y : y^{q+1} = -1}` by scanning the whole field.
pub fn scan_delta(tower: &FieldTower) -> Vec<Fe> {
    let minus_one = tower.neg(Fe::ONE);
    let e = tower.q() as u64 + 1;
    tower.elements().filter(|&y| tower.pow(y, e) == minus_one).collect()
}

/// ρ, Δ and the bijections σ, τ between Ω and Δ. Defined for every odd q.
#[derive(Debug, Clone)]
pub struct Correspondence {
    line: ProjectiveLine,
    rho: Fe,
    rho_selector: usize,
    delta: Vec<Fe>,
    /// Field index → position in `delta`, `u32::MAX` outside Δ.
    delta_pos: Vec<u32>,
    /// `-1/ρ`, the image of ∞.
    sigma_inf: Fe,
}

impl Correspondence {
    pub fn new(line: ProjectiveLine, rho_selector: usize) -> Result<Self, WitnessError> {
        let tower = line.tower();
        if tower.q().is_multiple_of(2) {
            return Err(WitnessError::EvenQ(tower.q()));
        }
        let rho = tower.select_rho(rho_selector)?;
        let delta = build_delta(tower, rho)?;
        let mut delta_pos = vec![u32::MAX; tower.size() as usize];
        for (i, y) in delta.iter().enumerate() {
            delta_pos[y.0 as usize] = i as u32;
        }
        let sigma_inf = tower.neg(tower.inv(rho)?);
        Ok(Correspondence { line, rho, rho_selector, delta, delta_pos, sigma_inf })
    }

    pub fn line(&self) -> &ProjectiveLine {
        &self.line
    }

    pub fn tower(&self) -> &FieldTower {
        self.line.tower()
    }

    pub fn rho(&self) -> Fe {
        self.rho
    }

    pub fn rho_selector(&self) -> usize {
        self.rho_selector
    }

    pub fn delta(&self) -> &[Fe] {
        &self.delta
    }

    pub fn in_delta(&self, y: Fe) -> bool {
        self.delta_pos[y.0 as usize] != u32::MAX
    }

    /// Position of `y` in the sorted Δ.
    pub fn delta_index(&self, y: Fe) -> Option<usize> {
        match self.delta_pos[y.0 as usize] {
            u32::MAX => None,
            i => Some(i as usize),
        }
    }

    pub fn sigma(&self, x: Point) -> Result<Fe, WitnessError> {
        let t = self.tower();
        let y = match self.line.element(x) {
            None => self.sigma_inf,
            Some(x) => {
                let den = t.sub(Fe::ONE, t.mul(self.rho, x));
                if den.is_zero() {
                    return Err(failed("sigma-denominator", format!("1 - rho*x = 0 at point {x}")));
                }
                t.div(t.add(x, self.rho), den)?
            }
        };
        if !self.in_delta(y) {
            return Err(failed("sigma-into-delta", format!("sigma({x}) = {y} is not in Delta")));
        }
        Ok(y)
    }

    pub fn tau(&self, y: Fe) -> Result<Point, WitnessError> {
        if !self.in_delta(y) {
            return Err(WitnessError::NotInDelta(y));
        }
        if y == self.sigma_inf {
            return Ok(self.line.infinity());
        }
        let t = self.tower();
        let den = t.add(Fe::ONE, t.mul(self.rho, y));
        if den.is_zero() {
            return Err(failed("tau-denominator", format!("1 + rho*y = 0 at y = {y}")));
        }
        let x = t.div(t.sub(y, self.rho), den)?;
        self.line
            .point_of(x)
            .ok_or_else(|| failed("tau-into-subfield", format!("tau({y}) = {x} is not in GF(q)")))
    }

    pub fn cube_on_delta(&self, y: Fe) -> Result<Fe, WitnessError> {
        if !self.in_delta(y) {
            return Err(WitnessError::NotInDelta(y));
        }
        let c = self.tower().pow(y, 3);
        if !self.in_delta(c) {
            return Err(failed("cube-into-delta", format!("{y}^3 = {c} is not in Delta")));
        }
        Ok(c)
    }

    /// Whether cubing is injective on Δ.
    pub fn cube_permutes_delta(&self) -> Result<bool, WitnessError> {
        let mut seen = vec![false; self.delta.len()];
        for &y in &self.delta {
            let i = self.delta_pos[self.cube_on_delta(y)?.0 as usize] as usize;
            if seen[i] {
                return Ok(false);
            }
            seen[i] = true;
        }
        Ok(true)
    }

    /// ρ has order 2(q+1), ρ^{q+1} = -1 and ρ ∉ GF(q).
    pub fn check_rho(&self) -> Result<(), WitnessError> {
        self.tower()
            .certify_rho(self.rho)
            .map_err(|e| failed("rho", e.to_string()))
    }

    /// σ maps Ω into Δ, τ maps Δ into Ω, and they are mutually inverse.
    pub fn check_bijections(&self) -> Result<(), WitnessError> {
        let q = self.tower().q() as usize;
        if self.delta.len() != q + 1 {
            return Err(failed("delta-size", format!("|Delta| = {} != q + 1", self.delta.len())));
        }
        for x in self.line.points() {
            let back = self.tau(self.sigma(x)?)?;
            if back != x {
                return Err(failed("tau-after-sigma", format!("tau(sigma({x})) = {back}")));
            }
        }
        for &y in &self.delta {
            let back = self.sigma(self.tau(y)?)?;
            if back != y {
                return Err(failed("sigma-after-tau", format!("sigma(tau({y})) = {back}")));
            }
        }
        Ok(())
    }

    /// Cubing maps Δ into Δ, and `y = -(y³)^{(q+2)/3}` recovers every y,
    /// which makes cubing injective. Needs q ≡ 1 (mod 3).
    pub fn check_cubing(&self) -> Result<(), WitnessError> {
        let t = self.tower();
        let q = t.q();
        if q % 3 != 1 {
            return Err(WitnessError::NotOneModSix(q));
        }
        let e = (q as u64).div_ceil(3);
        for &y in &self.delta {
            let c = self.cube_on_delta(y)?;
            let recovered = t.neg(t.pow(c, e));
            if recovered != y {
                return Err(failed("cube-inverse", format!("-(({y})^3)^((q+2)/3) = {recovered}")));
            }
        }
        if !self.cube_permutes_delta()? {
            return Err(failed("cube-bijective", "cubing collides on Delta"));
        }
        Ok(())
    }
}

/// Everything needed to build and certify the witness for one q ≡ 1 (mod 6).
#[derive(Debug, Clone)]
pub struct WitnessContext {
    corr: Correspondence,
    group: Group,
    sigma_map: Vec<Fe>,
    tau_map: Vec<u16>,
    witness: Permutation,
}

impl WitnessContext {
    pub fn new(group: Group, rho_selector: usize) -> Result<Self, WitnessError> {
        let q = group.q();
        if q % 6 != 1 {
            return Err(WitnessError::NotOneModSix(q));
        }
        let corr = Correspondence::new(group.line().clone(), rho_selector)?;
        let sigma_map = corr
            .line
            .points()
            .map(|x| corr.sigma(x))
            .collect::<Result<Vec<_>, _>>()?;
        let tau_map = corr
            .delta
            .iter()
            .map(|&y| corr.tau(y).map(|p| p.0))
            .collect::<Result<Vec<_>, _>>()?;
        let images = sigma_map
            .iter()
            .map(|&y| {
                let c = corr.cube_on_delta(y)?;
                Ok(tau_map[corr.delta_pos[c.0 as usize] as usize])
            })
            .collect::<Result<Vec<u16>, WitnessError>>()?;
        let witness = Permutation::new(images)
            .map_err(|e| failed("witness-bijective", e.to_string()))?;
        Ok(WitnessContext { corr, group, sigma_map, tau_map, witness })
    }

    pub fn for_q(q: u64, rho_selector: usize) -> Result<Self, WitnessError> {
        Self::new(Group::for_q(q)?, rho_selector)
    }

    pub fn correspondence(&self) -> &Correspondence {
        &self.corr
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn q(&self) -> u32 {
        self.group.q()
    }

    pub fn rho(&self) -> Fe {
        self.corr.rho
    }

    pub fn witness(&self) -> &Permutation {
        &self.witness
    }

    /// σ as an array indexed by point.
    pub fn sigma_map(&self) -> &[Fe] {
        &self.sigma_map
    }

    /// τ as an array indexed by position in Δ.
    pub fn tau_map(&self) -> &[u16] {
        &self.tau_map
    }

    /// `|{x ∈ Ω : witness(x) = g(x)}|`, evaluating g through the tower.
    pub fn coincidence_count(&self, g: &MobiusMap) -> usize {
        let line = self.group.line();
        line.points()
            .filter(|&x| self.witness.image(x.0 as usize) == line.apply(g, x).0)
            .count()
    }

    /// `|{y ∈ Δ : y³ = σ(g(τ(y)))}|`, for a group element given by its images.
    pub fn delta_coincidence_count(&self, g: &[u16]) -> Result<usize, WitnessError> {
        let t = self.corr.tower();
        let mut count = 0;
        for (i, &y) in self.corr.delta.iter().enumerate() {
            let moved = self.sigma_map[g[self.tau_map[i] as usize] as usize];
            if t.pow(y, 3) == moved {
                count += 1;
            }
        }
        Ok(count)
    }
}

/// Result of a full certification run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub q: u32,
    pub p: u32,
    pub f: u32,
    pub rho_index: u32,
    pub rho_selector: usize,
    pub delta_size: usize,
    pub group_order: usize,
    pub lemma1: bool,
    pub lemma2: bool,
    pub lemma3: bool,
    pub max_coincidence: usize,
    pub coincidence_bound: usize,
    pub witness_distance: usize,
    pub argmin_index: usize,
    pub argmin_triple: [u16; 3],
    pub lower_bound: usize,
    pub trusted_upper_bound: usize,
    pub covering_radius: usize,
    pub conclusion: String,
    pub witness: Permutation,
}

const CERTIFY_CHUNK: usize = 4096;

/// Runs every check and computes the witness distance two ways.
///
/// The first failure aborts with its counterexample.
pub fn certify(ctx: &WitnessContext, exec: Exec) -> Result<CertificateReport, WitnessError> {
    let corr = &ctx.corr;
    let group = &ctx.group;
    let q = ctx.q() as usize;
    let n = group.degree();

    corr.check_rho()?;
    corr.check_bijections()?;
    corr.check_cubing()?;

    // Coincidences with every group element: (max, lowest rank at max, first violation).
    type Scan = (usize, usize, Option<usize>);
    let w = ctx.witness.images();
    let order = group.order();
    let scan_chunk = |chunk: usize| -> Scan {
        let range = chunk * CERTIFY_CHUNK..((chunk + 1) * CERTIFY_CHUNK).min(order);
        let mut best = (0, usize::MAX, None);
        let _ = group.scan(range, |rank, g| {
            let agree = g.iter().zip(w).filter(|(a, b)| a == b).count();
            if agree > COINCIDENCE_BOUND {
                best.2 = Some(rank);
                return ControlFlow::Break(());
            }
            if agree > best.0 {
                best.0 = agree;
                best.1 = rank;
            }
            ControlFlow::Continue(())
        });
        best
    };
    let merge = |a: Scan, b: Scan| -> Scan {
        let violation = match (a.2, b.2) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        };
        let (max, rank) = if a.0 != b.0 { if a.0 > b.0 { (a.0, a.1) } else { (b.0, b.1) } } else { (a.0, a.1.min(b.1)) };
        (max, rank, violation)
    };
    let (max_coincidence, argmax, violation) =
        par::map_reduce(exec, par::chunk_count(order, CERTIFY_CHUNK), (0, usize::MAX, None), scan_chunk, merge);
    if let Some(rank) = violation {
        let (a, b, c) = group.triple_of(rank);
        return Err(failed(
            "coincidence-bound",
            format!("group element ({a}, {b}, {c}) agrees with the witness on more than {COINCIDENCE_BOUND} points"),
        ));
    }

    let dist = metric::distance_to_group(&ctx.witness, group, exec)?;
    if dist.distance != n - max_coincidence || dist.argmin_index != argmax {
        return Err(failed(
            "distance-cross-check",
            format!(
                "distance scan gives {} at rank {}, coincidence scan gives {} at rank {}",
                dist.distance, dist.argmin_index, n - max_coincidence, argmax
            ),
        ));
    }
    let lower_bound = q - 3;
    if dist.distance < lower_bound {
        return Err(failed("distance-lower-bound", format!("d(witness, G) = {} < q - 3", dist.distance)));
    }
    let upper = q - 3;
    let covering_radius = dist.distance.max(lower_bound);
    if covering_radius > upper {
        return Err(failed(
            "trusted-upper-bound",
            format!("d(witness, G) = {} exceeds the known upper bound q - 3 = {upper}", dist.distance),
        ));
    }

    let t = corr.tower();
    Ok(CertificateReport {
        q: q as u32,
        p: t.p(),
        f: t.f(),
        rho_index: corr.rho.0,
        rho_selector: corr.rho_selector,
        delta_size: corr.delta.len(),
        group_order: order,
        lemma1: true,
        lemma2: true,
        lemma3: true,
        max_coincidence,
        coincidence_bound: COINCIDENCE_BOUND,
        witness_distance: dist.distance,
        argmin_index: dist.argmin_index,
        argmin_triple: dist.argmin_triple,
        lower_bound,
        trusted_upper_bound: upper,
        covering_radius,
        conclusion: format!(
            "covering radius of PGL(2,{q}) is {covering_radius} = q-3: witness distance {} >= q-3 and upper bound q-3",
            dist.distance
        ),
        witness: ctx.witness.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(q: u64) -> WitnessContext {
        WitnessContext::for_q(q, 0).unwrap()
    }

    #[test]
    fn sigma_and_tau_fixed_values() {
        let c = ctx(7);
        let corr = c.correspondence();
        let t = corr.tower();
        let rho = c.rho();
        assert_eq!(corr.sigma(Point(0)).unwrap(), rho);
        let minus_inv = t.neg(t.inv(rho).unwrap());
        assert_eq!(corr.sigma(corr.line().infinity()).unwrap(), minus_inv);
        assert_eq!(corr.tau(rho).unwrap(), Point(0));
        assert_eq!(corr.tau(minus_inv).unwrap(), corr.line().infinity());
        assert!(corr.in_delta(rho) && corr.in_delta(minus_inv));
    }

    #[test]
    fn tau_and_cube_reject_outside_delta() {
        let c = ctx(7);
        let corr = c.correspondence();
        assert_eq!(corr.tau(Fe::ONE), Err(WitnessError::NotInDelta(Fe::ONE)));
        assert_eq!(corr.cube_on_delta(Fe::ZERO), Err(WitnessError::NotInDelta(Fe::ZERO)));
    }

    #[test]
    fn delta_routes_agree() {
        for q in [3u64, 5, 7, 9, 11, 13, 25] {
            let t = FieldTower::for_q(q).unwrap();
            let rho = t.rho().unwrap();
            let d = build_delta(&t, rho).unwrap();
            assert_eq!(d.len() as u64, q + 1);
            assert_eq!(d, scan_delta(&t));
        }
        let t = FieldTower::for_q(8).unwrap();
        assert_eq!(build_delta(&t, Fe::ONE), Err(WitnessError::EvenQ(8)));
    }

    #[test]
    fn refuses_q_not_one_mod_six() {
        assert_eq!(WitnessContext::for_q(11, 0).unwrap_err(), WitnessError::NotOneModSix(11));
        assert_eq!(WitnessContext::for_q(9, 0).unwrap_err(), WitnessError::NotOneModSix(9));
        assert_eq!(WitnessContext::for_q(4, 0).unwrap_err(), WitnessError::NotOneModSix(4));
    }

    #[test]
    fn witness_is_a_permutation() {
        let c = ctx(13);
        let mut imgs = c.witness().images().to_vec();
        imgs.sort_unstable();
        assert_eq!(imgs, (0..14).collect::<Vec<u16>>());
    }

    #[test]
    fn certify_q7() {
        let c = ctx(7);
        let r = certify(&c, Exec::Sequential).unwrap();
        assert_eq!(r.witness_distance, 4);
        assert_eq!(r.max_coincidence, 4);
        assert_eq!(r.covering_radius, 4);
        assert!(r.lemma1 && r.lemma2 && r.lemma3);
    }

    #[test]
    fn cubing_contrast_for_two_mod_three() {
        // q = 5: gcd(3, q + 1) = 3, so cubing collapses Delta.
        let corr = Correspondence::new(ProjectiveLine::for_q(5).unwrap(), 0).unwrap();
        assert!(!corr.cube_permutes_delta().unwrap());
        assert_eq!(corr.check_cubing(), Err(WitnessError::NotOneModSix(5)));
        corr.check_bijections().unwrap();
    }
}
