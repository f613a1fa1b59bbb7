//! The field tower GF(p) ⊂ GF(q) ⊂ GF(q²).
//!
//! Only the top field GF(q²) = GF(p^{2f}) is constructed explicitly. Its
//! elements are encoded as integers in `[0, q²)`: the coefficient vector
//! `(a_0, .., a_{2f-1})` of the polynomial representative, read base `p`
//! low-degree-first. The subfield GF(q) is the fixed field of `z ↦ z^q`.
//!
//! Multiplication, inversion and powers go through discrete-log tables;
//! addition uses Zech logarithms, so every operation is a few table lookups.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported `q² = p^{2f}`.
pub const MAX_FIELD_SIZE: u64 = 1 << 20;

const NO_LOG: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field of size {p}^{degree} exceeds the supported ceiling of {max}")]
    TooLarge { p: u64, degree: u64, max: u64 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("zero has no multiplicative order")]
    ZeroOrder,
    #[error("an element of order 2(q+1) requires odd q, got q = {0}")]
    EvenCharacteristic(u32),
    #[error("no element of order 2(q+1) with selector {selector} (only {available} exist)")]
    RhoSelector { selector: usize, available: usize },
    #[error("rho = {rho} failed certification: {reason}")]
    RhoCertification { rho: u32, reason: String },
}

/// An element of GF(q²) in canonical integer encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fe(pub u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// JSON summary of a tower.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerSummary {
    pub p: u32,
    pub f: u32,
    pub q: u32,
    pub field_size: u32,
    /// Coefficients of the monic modulus, low degree first.
    pub modulus: Vec<u32>,
    pub primitive: u32,
    /// Canonical ρ; absent when q is even.
    pub rho: Option<u32>,
}

/// GF(q²) with q = p^f, plus the tables used for arithmetic.
#[derive(Clone)]
pub struct FieldTower {
    p: u32,
    f: u32,
    q: u32,
    size: u32,
    modulus: Vec<u32>,
    primitive: Fe,
    /// `exp[i] = primitive^i`, stored twice over so sums of two logs need no reduction.
    exp: Vec<u32>,
    log: Vec<u32>,
    /// `zech[l] = log(1 + primitive^l)`, or `NO_LOG` when that sum is zero.
    zech: Vec<u32>,
    neg_one_log: u32,
    order_primes: Vec<u64>,
}

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldTower")
            .field("p", &self.p)
            .field("f", &self.f)
            .field("q", &self.q)
            .field("modulus", &self.modulus)
            .field("primitive", &self.primitive)
            .finish()
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime divisors of `n` by trial division.
pub fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Splits `q` as `p^f`, or `None` if `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let primes = prime_divisors(q);
    if primes.len() != 1 {
        return None;
    }
    let p = primes[0];
    let mut f = 0;
    let mut rest = q;
    while rest > 1 {
        rest /= p;
        f += 1;
    }
    Some((p, f))
}

/// Dense polynomials over GF(p), coefficients low degree first, kept trimmed.
mod poly {
    pub type Poly = Vec<u32>;

    pub fn trim(mut a: Poly) -> Poly {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    fn inv_mod(a: u32, p: u32) -> u32 {
        let (mut r, mut base, mut e) = (1u64, a as u64 % p as u64, p as u64 - 2);
        while e > 0 {
            if e & 1 == 1 {
                r = r * base % p as u64;
            }
            base = base * base % p as u64;
            e >>= 1;
        }
        r as u32
    }

    pub fn rem(a: &[u32], m: &[u32], p: u32) -> Poly {
        let mut r = trim(a.to_vec());
        let dm = m.len() - 1;
        let lead_inv = inv_mod(m[dm], p) as u64;
        while r.len() > dm {
            let shift = r.len() - 1 - dm;
            let c = (*r.last().unwrap() as u64 * lead_inv) % p as u64;
            for (i, &mi) in m.iter().enumerate() {
                let sub = (c * mi as u64) % p as u64;
                let slot = &mut r[shift + i];
                *slot = ((*slot as u64 + p as u64 - sub) % p as u64) as u32;
            }
            r = trim(r);
        }
        r
    }

    pub fn mul_mod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Poly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        let prod: Poly = prod.into_iter().map(|c| c as u32).collect();
        rem(&prod, m, p)
    }

    pub fn pow_mod(base: &[u32], mut e: u64, m: &[u32], p: u32) -> Poly {
        let mut result = vec![1];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                result = mul_mod(&result, &b, m, p);
            }
            b = mul_mod(&b, &b, m, p);
            e >>= 1;
        }
        result
    }

    pub fn sub(a: &[u32], b: &[u32], p: u32) -> Poly {
        let n = a.len().max(b.len());
        let out = (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(out)
    }

    fn eval(a: &[u32], x: u32, p: u32) -> u32 {
        a.iter().rev().fold(0u64, |acc, &c| (acc * x as u64 + c as u64) % p as u64) as u32
    }

    pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Poly {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    /// Rabin's test: `m` (monic, degree n) is irreducible iff
    /// `x^{p^n} ≡ x (mod m)` and `gcd(x^{p^{n/r}} - x, m) = 1` for every prime `r | n`.
    pub fn is_irreducible(m: &[u32], p: u32) -> bool {
        let n = m.len() - 1;
        if n >= 2 && (0..p).any(|c| eval(m, c, p) == 0) {
            return false;
        }
        let x: Poly = vec![0, 1];
        let frobenius_iter = |k: usize| {
            let mut h = rem(&x, m, p);
            for _ in 0..k {
                h = pow_mod(&h, p as u64, m, p);
            }
            h
        };
        if sub(&frobenius_iter(n), &x, p).iter().any(|&c| c != 0) {
            return false;
        }
        for r in super::prime_divisors(n as u64) {
            let h = sub(&frobenius_iter(n / r as usize), &x, p);
            if gcd(&h, m, p).len() != 1 {
                return false;
            }
        }
        true
    }
}

impl FieldTower {
    /// Builds GF(p^{2f}) with the lexicographically smallest monic irreducible
    /// modulus (coefficients compared low degree first) and the smallest-index
    /// primitive element.
    pub fn new(p: u64, f: u32) -> Result<Self, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if f == 0 {
            return Err(GfError::ZeroDegree);
        }
        let degree = 2 * f as u64;
        let too_large = GfError::TooLarge { p, degree, max: MAX_FIELD_SIZE };
        let size = p.checked_pow(degree as u32).ok_or(too_large.clone())?;
        if size > MAX_FIELD_SIZE {
            return Err(too_large);
        }
        let p32 = p as u32;
        let n = degree as usize;
        let modulus = smallest_irreducible(p32, n);

        let size32 = size as u32;
        let order = size - 1;
        let order_primes = prime_divisors(order);
        let primitive = (2..size32)
            .find(|&z| {
                let zp = digits(z, p32, n);
                order_primes
                    .iter()
                    .all(|&r| poly::pow_mod(&zp, order / r, &modulus, p32) != [1])
            })
            .expect("the multiplicative group of a finite field is cyclic");

        let ord = order as usize;
        let mut exp = vec![0u32; 2 * ord];
        let mut log = vec![NO_LOG; size as usize];
        let step = multiplier(primitive, p32, &modulus);
        let mut cur = vec![0u32; n];
        cur[0] = 1;
        for i in 0..ord {
            let idx = undigits(&cur, p32);
            assert_eq!(log[idx as usize], NO_LOG, "primitive element repeated a power");
            log[idx as usize] = i as u32;
            exp[i] = idx;
            exp[i + ord] = idx;
            cur = step(&cur);
        }
        assert_eq!(undigits(&cur, p32), 1, "primitive^(q^2-1) != 1");

        let zech = (0..ord)
            .map(|l| {
                let e = exp[l];
                let a0 = e % p32;
                let one_plus = e - a0 + (a0 + 1) % p32;
                if one_plus == 0 {
                    NO_LOG
                } else {
                    log[one_plus as usize]
                }
            })
            .collect();
        let neg_one_log = if p == 2 { 0 } else { (ord / 2) as u32 };

        Ok(FieldTower {
            p: p32,
            f,
            q: p32.pow(f),
            size: size32,
            modulus,
            primitive: Fe(primitive),
            exp,
            log,
            zech,
            neg_one_log,
            order_primes,
        })
    }

    /// Builds the tower for a prime power `q`.
    pub fn for_q(q: u64) -> Result<Self, GfError> {
        let (p, f) = prime_power(q).ok_or(GfError::NotPrimePower(q))?;
        Self::new(p, f)
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn f(&self) -> u32 {
        self.f
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    /// `q²`, the number of elements of the top field.
    pub fn size(&self) -> u32 {
        self.size
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }
    pub fn primitive(&self) -> Fe {
        self.primitive
    }

    #[inline]
    fn group_order(&self) -> u32 {
        self.size - 1
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.size).map(Fe)
    }

    /// Discrete log base the primitive element.
    #[inline]
    pub fn log(&self, z: Fe) -> Option<u32> {
        match self.log[z.0 as usize] {
            NO_LOG => None,
            l => Some(l),
        }
    }

    #[inline]
    pub fn antilog(&self, l: u64) -> Fe {
        Fe(self.exp[(l % self.group_order() as u64) as usize])
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 {
            return b;
        }
        if b.0 == 0 {
            return a;
        }
        let n = self.group_order();
        let la = self.log[a.0 as usize];
        let lb = self.log[b.0 as usize];
        let d = if lb >= la { lb - la } else { lb + n - la };
        match self.zech[d as usize] {
            NO_LOG => Fe::ZERO,
            z => Fe(self.exp[(la + z) as usize]),
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if a.0 == 0 {
            return a;
        }
        Fe(self.exp[(self.log[a.0 as usize] + self.neg_one_log) as usize])
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        Fe(self.exp[(self.log[a.0 as usize] + self.log[b.0 as usize]) as usize])
    }

    #[inline]
    pub fn inv(&self, a: Fe) -> Result<Fe, GfError> {
        if a.0 == 0 {
            return Err(GfError::ZeroInverse);
        }
        let l = self.log[a.0 as usize];
        Ok(Fe(self.exp[(self.group_order() - l) as usize]))
    }

    #[inline]
    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return Fe::ONE;
        }
        if a.0 == 0 {
            return Fe::ZERO;
        }
        let n = self.group_order() as u64;
        let l = self.log[a.0 as usize] as u64;
        Fe(self.exp[((l * (e % n)) % n) as usize])
    }

    /// Exact multiplicative order, by stripping prime factors off `q² - 1`.
    pub fn element_order(&self, z: Fe) -> Result<u64, GfError> {
        if z.is_zero() {
            return Err(GfError::ZeroOrder);
        }
        let mut ord = self.group_order() as u64;
        for &r in &self.order_primes {
            while ord.is_multiple_of(r) && self.pow(z, ord / r) == Fe::ONE {
                ord /= r;
            }
        }
        Ok(ord)
    }

    /// Membership in GF(q): `z^q = z`.
    #[inline]
    pub fn in_subfield(&self, z: Fe) -> bool {
        self.pow(z, self.q as u64) == z
    }

    /// Elements of order `2(q+1)` in increasing index order.
    pub fn rho_candidates(&self) -> Result<Vec<Fe>, GfError> {
        let target = self.rho_order()?;
        Ok(self
            .elements()
            .skip(1)
            .filter(|&z| self.element_order(z) == Ok(target))
            .collect())
    }

    fn rho_order(&self) -> Result<u64, GfError> {
        if self.p == 2 {
            return Err(GfError::EvenCharacteristic(self.q));
        }
        Ok(2 * (self.q as u64 + 1))
    }

    /// Canonical ρ = primitive^((q²-1)/(2(q+1))), certified to have order
    /// 2(q+1), to satisfy ρ^{q+1} = -1 and to lie outside GF(q).
    pub fn rho(&self) -> Result<Fe, GfError> {
        let target = self.rho_order()?;
        let rho = self.antilog(self.group_order() as u64 / target);
        self.certify_rho(rho)?;
        Ok(rho)
    }

    /// Selector 0 is the canonical ρ; selector `k ≥ 1` is the k-th element of
    /// order 2(q+1) in index order.
    pub fn select_rho(&self, selector: usize) -> Result<Fe, GfError> {
        if selector == 0 {
            return self.rho();
        }
        let all = self.rho_candidates()?;
        let rho = *all.get(selector - 1).ok_or(GfError::RhoSelector {
            selector,
            available: all.len(),
        })?;
        self.certify_rho(rho)?;
        Ok(rho)
    }

    /// Checks the three facts about ρ that the witness construction relies on.
    pub fn certify_rho(&self, rho: Fe) -> Result<(), GfError> {
        let fail = |reason: &str| GfError::RhoCertification { rho: rho.0, reason: reason.into() };
        let target = self.rho_order()?;
        if rho.is_zero() || self.element_order(rho)? != target {
            return Err(fail("order is not 2(q+1)"));
        }
        if self.pow(rho, self.q as u64 + 1) != self.neg(Fe::ONE) {
            return Err(fail("rho^(q+1) != -1"));
        }
        if self.in_subfield(rho) {
            return Err(fail("rho lies in GF(q)"));
        }
        Ok(())
    }

    /// Base-p coefficients of `z`, low degree first.
    pub fn coefficients(&self, z: Fe) -> Vec<u32> {
        digits(z.0, self.p, 2 * self.f as usize)
    }

    pub fn from_coefficients(&self, coeffs: &[u32]) -> Fe {
        Fe(undigits(coeffs, self.p) % self.size)
    }

    /// Coefficient-wise addition; slow, but independent of the log tables.
    pub fn add_by_coefficients(&self, a: Fe, b: Fe) -> Fe {
        let n = 2 * self.f as usize;
        let (da, db) = (digits(a.0, self.p, n), digits(b.0, self.p, n));
        let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        Fe(undigits(&sum, self.p))
    }

    /// Polynomial-basis multiplication modulo the modulus; independent of the log tables.
    pub fn mul_by_coefficients(&self, a: Fe, b: Fe) -> Fe {
        let n = 2 * self.f as usize;
        let prod = poly::mul_mod(
            &poly::trim(digits(a.0, self.p, n)),
            &poly::trim(digits(b.0, self.p, n)),
            &self.modulus,
            self.p,
        );
        Fe(undigits(&prod, self.p))
    }

    /// Renders `z` as a polynomial in `x`, e.g. `3+5·x`.
    pub fn format_poly(&self, z: Fe) -> String {
        let terms: Vec<String> = self
            .coefficients(z)
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match i {
                0 => c.to_string(),
                1 => format!("{c}·x"),
                _ => format!("{c}·x^{i}"),
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }

    pub fn summary(&self) -> TowerSummary {
        TowerSummary {
            p: self.p,
            f: self.f,
            q: self.q,
            field_size: self.size,
            modulus: self.modulus.clone(),
            primitive: self.primitive.0,
            rho: self.rho().ok().map(|r| r.0),
        }
    }
}

fn digits(mut z: u32, p: u32, n: usize) -> Vec<u32> {
    let mut out = vec![0; n];
    for d in out.iter_mut() {
        *d = z % p;
        z /= p;
    }
    out
}

fn undigits(ds: &[u32], p: u32) -> u32 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Monic irreducible polynomials of degree `n` scanned with `a_0` most significant.
fn smallest_irreducible(p: u32, n: usize) -> Vec<u32> {
    let mut coeffs = vec![0u32; n];
    loop {
        let mut m = coeffs.clone();
        m.push(1);
        if poly::is_irreducible(&m, p) {
            return m;
        }
        let mut i = n;
        loop {
            assert!(i > 0, "irreducible polynomials exist in every degree");
            i -= 1;
            coeffs[i] += 1;
            if coeffs[i] < p {
                break;
            }
            coeffs[i] = 0;
        }
    }
}

/// Returns the map `v ↦ v·z` on coefficient vectors of length `n`.
fn multiplier(z: u32, p: u32, modulus: &[u32]) -> impl Fn(&[u32]) -> Vec<u32> {
    let n = modulus.len() - 1;
    let zp = poly::trim(digits(z, p, n));
    let columns: Vec<Vec<u32>> = (0..n)
        .map(|i| {
            let mut xi = vec![0u32; i + 1];
            xi[i] = 1;
            let mut c = poly::mul_mod(&xi, &zp, modulus, p);
            c.resize(n, 0);
            c
        })
        .collect();
    move |v: &[u32]| {
        let mut out = vec![0u32; n];
        for (vi, col) in v.iter().zip(&columns) {
            if *vi == 0 {
                continue;
            }
            for (o, c) in out.iter_mut().zip(col) {
                *o = (*o + vi * c) % p;
            }
        }
        out
    }
}
