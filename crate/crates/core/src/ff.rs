//! Exact arithmetic in `F_q` and its extension `F_{q^s}`.
//!
//! Elements are encoded as integers: the `F_p` coordinate vector
//! `(c_0, ..., c_{es-1})` maps to `sum c_i p^i`. Coordinate `k*e + j` is the
//! coefficient of `a^j b^k`, where `a` generates `F_q` over `F_p` and `b`
//! generates `F_{q^s}` over `F_q`. In particular an element lies in `F_q` iff
//! its encoding is `< q`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported residue field.
pub const MAX_FIELD_SIZE: u64 = 1 << 20;
/// Fields up to this size get log/antilog tables.
pub const TABLE_LIMIT: u64 = 1 << 12;

/// An element of the residue field `F_{q^s}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct ResidueElem(pub u32);

impl ResidueElem {
    pub const ZERO: ResidueElem = ResidueElem(0);
    pub const ONE: ResidueElem = ResidueElem(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for ResidueElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Parameters of the residue field tower `F_p ⊂ F_q ⊂ F_{q^s}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldParams {
    pub p: u32,
    pub e: u32,
    /// Monic irreducible of degree `e` over `F_p`, coefficients low to high.
    pub modulus: Vec<u32>,
    pub s: u32,
    /// Monic irreducible of degree `s` over `F_q`, coefficients (as `F_q`
    /// encodings) low to high.
    pub modulus_s: Vec<u32>,
}

impl FieldParams {
    /// Built-in parameters for `q` in `{2,3,4,5,7,8,9}` with the smallest
    /// irreducible `modulus_s` of degree `s`.
    pub fn standard(q: u32, s: u32) -> Result<Self> {
        let (p, e, modulus) = match q {
            2 | 3 | 5 | 7 => (q, 1, vec![0, 1]),
            4 => (2, 2, vec![1, 1, 1]),
            8 => (2, 3, vec![1, 1, 0, 1]),
            9 => (3, 2, vec![1, 0, 1]),
            _ => {
                return Err(Error::InvalidField(format!(
                    "no built-in modulus for q = {q}; supply one"
                )))
            }
        };
        if s == 0 {
            return Err(Error::InvalidField("s must be >= 1".into()));
        }
        let base = BaseField::new(p, e, modulus.clone())?;
        let modulus_s = smallest_irreducible(&base, s as usize);
        Ok(FieldParams { p, e, modulus, s, modulus_s })
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.e)
    }
}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
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

/// `F_q = F_p[a]/(modulus)` with schoolbook arithmetic on encodings.
#[derive(Clone, Debug)]
pub(crate) struct BaseField {
    p: u32,
    e: u32,
    q: u32,
    modulus: Vec<u32>,
    table: Option<Vec<u32>>,
}

impl BaseField {
    fn new(p: u32, e: u32, modulus: Vec<u32>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("p = {p} is not prime")));
        }
        if e == 0 || modulus.len() != e as usize + 1 || *modulus.last().unwrap() != 1 {
            return Err(Error::InvalidField("modulus must be monic of degree e".into()));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::InvalidField("modulus coefficients must be < p".into()));
        }
        let q64 = (p as u64).checked_pow(e).filter(|&q| q <= MAX_FIELD_SIZE);
        let q = q64.ok_or_else(|| Error::InvalidField("q too large".into()))? as u32;
        let mut bf = BaseField { p, e, q, modulus, table: None };
        if e > 1 {
            let prime = BaseField { p, e: 1, q: p, modulus: vec![0, 1], table: None };
            if !is_irreducible(&prime, &bf.modulus) {
                return Err(Error::InvalidField("modulus is reducible over F_p".into()));
            }
        }
        if q <= 64 {
            let mut t = vec![0; (q * q) as usize];
            for x in 0..q {
                for y in 0..q {
                    t[(x * q + y) as usize] = bf.mul_slow(x, y);
                }
            }
            bf.table = Some(t);
        }
        Ok(bf)
    }

    fn digits(&self, mut x: u32) -> Vec<u32> {
        let mut d = vec![0; self.e as usize];
        for c in d.iter_mut() {
            *c = x % self.p;
            x /= self.p;
        }
        d
    }

    fn undigits(&self, d: &[u32]) -> u32 {
        d.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    fn add(&self, x: u32, y: u32) -> u32 {
        if self.p == 2 {
            return x ^ y;
        }
        if self.e == 1 {
            return (x + y) % self.p;
        }
        let (a, b) = (self.digits(x), self.digits(y));
        let s: Vec<u32> = a.iter().zip(&b).map(|(u, v)| (u + v) % self.p).collect();
        self.undigits(&s)
    }

    fn neg(&self, x: u32) -> u32 {
        if self.p == 2 {
            return x;
        }
        if self.e == 1 {
            return (self.p - x) % self.p;
        }
        let a: Vec<u32> = self.digits(x).iter().map(|&u| (self.p - u) % self.p).collect();
        self.undigits(&a)
    }

    fn sub(&self, x: u32, y: u32) -> u32 {
        self.add(x, self.neg(y))
    }

    fn mul(&self, x: u32, y: u32) -> u32 {
        match &self.table {
            Some(t) => t[(x * self.q + y) as usize],
            None => self.mul_slow(x, y),
        }
    }

    fn mul_slow(&self, x: u32, y: u32) -> u32 {
        let p = self.p as u64;
        if self.e == 1 {
            return ((x as u64 * y as u64) % p) as u32;
        }
        let (a, b) = (self.digits(x), self.digits(y));
        let e = self.e as usize;
        let mut prod = vec![0u64; 2 * e - 1];
        for (i, &ai) in a.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + ai as u64 * bj as u64) % p;
            }
        }
        for k in (e..prod.len()).rev() {
            let c = prod[k];
            if c != 0 {
                for (j, &mj) in self.modulus.iter().enumerate().take(e) {
                    let idx = k - e + j;
                    prod[idx] = (prod[idx] + (p - c) * mj as u64) % p;
                }
                prod[k] = 0;
            }
        }
        let d: Vec<u32> = prod[..e].iter().map(|&c| c as u32).collect();
        self.undigits(&d)
    }

    fn pow(&self, x: u32, mut n: u64) -> u32 {
        let mut base = x;
        let mut acc = 1;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    fn inv(&self, x: u32) -> Option<u32> {
        (x != 0).then(|| self.pow(x, self.q as u64 - 2))
    }
}

// Dense polynomials over a `BaseField`, coefficients low to high.

fn poly_trim(f: &mut Vec<u32>) {
    while f.last() == Some(&0) {
        f.pop();
    }
}

fn poly_rem(k: &BaseField, a: &[u32], m: &[u32]) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let dm = m.len() - 1;
    let inv_lead = k.inv(m[dm]).expect("nonzero leading coefficient");
    while r.len() > dm {
        let top = r.len() - 1;
        let c = k.mul(r[top], inv_lead);
        for j in 0..=dm {
            let idx = top - dm + j;
            r[idx] = k.sub(r[idx], k.mul(c, m[j]));
        }
        poly_trim(&mut r);
    }
    r
}

fn poly_mulmod(k: &BaseField, a: &[u32], b: &[u32], m: &[u32]) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = k.add(prod[i + j], k.mul(x, y));
        }
    }
    poly_rem(k, &prod, m)
}

fn poly_powmod(k: &BaseField, a: &[u32], mut n: u64, m: &[u32]) -> Vec<u32> {
    let mut base = poly_rem(k, a, m);
    let mut acc = vec![1];
    while n > 0 {
        if n & 1 == 1 {
            acc = poly_mulmod(k, &acc, &base, m);
        }
        base = poly_mulmod(k, &base, &base, m);
        n >>= 1;
    }
    acc
}

fn poly_gcd(k: &BaseField, a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut x, mut y) = (a.to_vec(), b.to_vec());
    poly_trim(&mut x);
    poly_trim(&mut y);
    while !y.is_empty() {
        let r = poly_rem(k, &x, &y);
        x = y;
        y = r;
    }
    x
}

/// Rabin's irreducibility test for a monic polynomial over `k`.
fn is_irreducible(k: &BaseField, f: &[u32]) -> bool {
    let d = f.len() - 1;
    if d == 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    let q = k.q as u64;
    // x^{q^i} mod f for i = 0..=d
    let mut frob = vec![vec![0, 1]];
    for _ in 0..d {
        let last = frob.last().unwrap();
        frob.push(poly_powmod(k, last, q, f));
    }
    let x_minus = |g: &[u32]| {
        let mut h = g.to_vec();
        h.resize(h.len().max(2), 0);
        h[1] = k.sub(h[1], 1);
        poly_trim(&mut h);
        h
    };
    if !x_minus(&frob[d]).is_empty() {
        return false;
    }
    prime_factors(d as u64).into_iter().all(|r| {
        let g = poly_gcd(k, &x_minus(&frob[d / r as usize]), f);
        g.len() == 1
    })
}

fn smallest_irreducible(k: &BaseField, d: usize) -> Vec<u32> {
    if d == 1 {
        return vec![0, 1];
    }
    let q = k.q as u64;
    for code in 0..q.pow(d as u32) {
        let mut f = Vec::with_capacity(d + 1);
        let mut c = code;
        for _ in 0..d {
            f.push((c % q) as u32);
            c /= q;
        }
        f.push(1);
        if f[0] != 0 && is_irreducible(k, &f) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
}

struct FieldInner {
    params: FieldParams,
    base: BaseField,
    q: u32,
    s: u32,
    size: u32,
    tables: Option<Tables>,
}

/// The residue field `F_{q^s}`. Cheap to clone; read-only after construction.
#[derive(Clone)]
pub struct Field(Arc<FieldInner>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}", self.q(), self.s())
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.params == other.0.params
    }
}

impl Field {
    pub fn new(params: FieldParams) -> Result<Self> {
        let base = BaseField::new(params.p, params.e, params.modulus.clone())?;
        let q = base.q;
        let s = params.s;
        if s == 0 {
            return Err(Error::InvalidField("s must be >= 1".into()));
        }
        let size = (q as u64)
            .checked_pow(s)
            .filter(|&n| n <= MAX_FIELD_SIZE)
            .ok_or_else(|| Error::InvalidField(format!("q^s exceeds {MAX_FIELD_SIZE}")))?;
        let ms = &params.modulus_s;
        if ms.len() != s as usize + 1 || *ms.last().unwrap() != 1 || ms.iter().any(|&c| c >= q) {
            return Err(Error::InvalidField("modulus_s must be monic of degree s over F_q".into()));
        }
        if !is_irreducible(&base, ms) {
            return Err(Error::InvalidField("modulus_s is reducible over F_q".into()));
        }
        let mut inner = FieldInner { params, base, q, s, size: size as u32, tables: None };
        if size <= TABLE_LIMIT {
            inner.tables = Some(build_tables(&inner));
        }
        Ok(Field(Arc::new(inner)))
    }

    pub fn standard(q: u32, s: u32) -> Result<Self> {
        Field::new(FieldParams::standard(q, s)?)
    }

    pub fn params(&self) -> &FieldParams {
        &self.0.params
    }
    pub fn p(&self) -> u32 {
        self.0.base.p
    }
    pub fn q(&self) -> u32 {
        self.0.q
    }
    pub fn s(&self) -> u32 {
        self.0.s
    }
    /// Number of elements `q^s`.
    pub fn size(&self) -> u32 {
        self.0.size
    }

    pub fn zero(&self) -> ResidueElem {
        ResidueElem::ZERO
    }
    pub fn one(&self) -> ResidueElem {
        ResidueElem::ONE
    }

    /// Builds an element from its `e*s` coordinates over `F_p`.
    pub fn make(&self, coords: &[u32]) -> Result<ResidueElem> {
        let n = (self.0.params.e * self.0.s) as usize;
        if coords.len() != n {
            return Err(Error::InvalidElement(format!(
                "expected {n} coordinates, got {}",
                coords.len()
            )));
        }
        let p = self.p();
        if let Some(c) = coords.iter().find(|&&c| c >= p) {
            return Err(Error::InvalidElement(format!("coordinate {c} not reduced mod {p}")));
        }
        Ok(ResidueElem(coords.iter().rev().fold(0, |acc, &c| acc * p + c)))
    }

    pub fn coords(&self, x: ResidueElem) -> Vec<u32> {
        let n = (self.0.params.e * self.0.s) as usize;
        let p = self.p();
        let mut v = x.0;
        (0..n)
            .map(|_| {
                let c = v % p;
                v /= p;
                c
            })
            .collect()
    }

    /// Embeds an `F_q` element given by its encoding `< q`.
    pub fn from_base(&self, c: u32) -> Result<ResidueElem> {
        if c >= self.q() {
            return Err(Error::InvalidElement(format!("{c} is not an F_q encoding")));
        }
        Ok(ResidueElem(c))
    }

    pub fn is_in_base(&self, x: ResidueElem) -> bool {
        x.0 < self.q()
    }

    /// All elements in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = ResidueElem> {
        (0..self.size()).map(ResidueElem)
    }

    fn qdigits(&self, mut x: u32) -> Vec<u32> {
        let q = self.q();
        (0..self.s())
            .map(|_| {
                let d = x % q;
                x /= q;
                d
            })
            .collect()
    }

    fn unqdigits(&self, d: &[u32]) -> u32 {
        let q = self.q();
        d.iter().rev().fold(0, |acc, &c| acc * q + c)
    }

    pub fn add(&self, x: ResidueElem, y: ResidueElem) -> ResidueElem {
        if self.p() == 2 {
            return ResidueElem(x.0 ^ y.0);
        }
        if self.s() == 1 {
            return ResidueElem(self.0.base.add(x.0, y.0));
        }
        let (a, b) = (self.qdigits(x.0), self.qdigits(y.0));
        let d: Vec<u32> = a.iter().zip(&b).map(|(&u, &v)| self.0.base.add(u, v)).collect();
        ResidueElem(self.unqdigits(&d))
    }

    pub fn neg(&self, x: ResidueElem) -> ResidueElem {
        if self.p() == 2 {
            return x;
        }
        let d: Vec<u32> = self.qdigits(x.0).iter().map(|&u| self.0.base.neg(u)).collect();
        ResidueElem(self.unqdigits(&d))
    }

    pub fn sub(&self, x: ResidueElem, y: ResidueElem) -> ResidueElem {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: ResidueElem, y: ResidueElem) -> ResidueElem {
        if x.0 == 0 || y.0 == 0 {
            return ResidueElem::ZERO;
        }
        match &self.0.tables {
            Some(t) => {
                let l = t.log[x.0 as usize] + t.log[y.0 as usize];
                ResidueElem(t.exp[l as usize])
            }
            None => ResidueElem(mul_tower(&self.0, x.0, y.0)),
        }
    }

    /// Discrete log of a nonzero element when tables are present.
    #[inline]
    pub(crate) fn log(&self, x: ResidueElem) -> Option<u32> {
        self.0.tables.as_ref().map(|t| t.log[x.0 as usize])
    }

    #[inline]
    pub(crate) fn exp_log(&self, l: u32) -> ResidueElem {
        ResidueElem(self.0.tables.as_ref().expect("tables").exp[l as usize])
    }

    pub(crate) fn has_tables(&self) -> bool {
        self.0.tables.is_some()
    }

    pub fn pow(&self, x: ResidueElem, n: u64) -> ResidueElem {
        if n == 0 {
            return ResidueElem::ONE;
        }
        if x.is_zero() {
            return ResidueElem::ZERO;
        }
        if let Some(t) = &self.0.tables {
            let order = (self.size() - 1) as u64;
            let l = (t.log[x.0 as usize] as u64 * (n % order)) % order;
            return ResidueElem(t.exp[l as usize]);
        }
        let mut base = x;
        let mut acc = ResidueElem::ONE;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    pub fn inv(&self, x: ResidueElem) -> Option<ResidueElem> {
        if x.is_zero() {
            return None;
        }
        if let Some(t) = &self.0.tables {
            let order = self.size() - 1;
            let l = (order - t.log[x.0 as usize]) % order;
            return Some(ResidueElem(t.exp[l as usize]));
        }
        Some(self.pow(x, self.size() as u64 - 2))
    }

    /// `x^{q^k}`; negative `k` applies the inverse Frobenius.
    pub fn pow_q(&self, x: ResidueElem, k: i64) -> ResidueElem {
        let s = self.s() as i64;
        let k = k.rem_euclid(s) as u32;
        self.pow(x, (self.q() as u64).pow(k))
    }

    /// Canonical solution of `y^{q-1} = c`: the solution with the
    /// lexicographically smallest coordinate vector.
    pub fn root_q_minus_1(&self, c: ResidueElem) -> Result<ResidueElem> {
        if c.is_zero() {
            return Err(Error::InvalidElement("root of zero requested".into()));
        }
        let k = self.q() as u64 - 1;
        self.elements()
            .filter(|&y| !y.is_zero() && self.pow(y, k) == c)
            .min_by_key(|&y| self.coords(y))
            .ok_or(Error::NoRootInField)
    }
}

fn mul_tower(f: &FieldInner, x: u32, y: u32) -> u32 {
    let base = &f.base;
    let q = f.q;
    let s = f.s as usize;
    let dig = |mut v: u32| {
        (0..s)
            .map(|_| {
                let d = v % q;
                v /= q;
                d
            })
            .collect::<Vec<_>>()
    };
    let (a, b) = (dig(x), dig(y));
    if s == 1 {
        return base.mul(a[0], b[0]);
    }
    let mut prod = vec![0u32; 2 * s - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = base.add(prod[i + j], base.mul(ai, bj));
        }
    }
    let m = &f.params.modulus_s;
    for k in (s..prod.len()).rev() {
        let c = prod[k];
        if c != 0 {
            for j in 0..s {
                let idx = k - s + j;
                prod[idx] = base.sub(prod[idx], base.mul(c, m[j]));
            }
            prod[k] = 0;
        }
    }
    prod[..s].iter().rev().fold(0, |acc, &c| acc * q + c)
}

fn build_tables(f: &FieldInner) -> Tables {
    let size = f.size;
    let order = (size - 1) as u64;
    let slow_pow = |x: u32, mut n: u64| {
        let (mut base, mut acc) = (x, 1u32);
        while n > 0 {
            if n & 1 == 1 {
                acc = mul_tower(f, acc, base);
            }
            base = mul_tower(f, base, base);
            n >>= 1;
        }
        acc
    };
    let primes = prime_factors(order);
    let gen = (1..size)
        .find(|&g| primes.iter().all(|&l| slow_pow(g, order / l) != 1))
        .expect("multiplicative group is cyclic");
    let mut exp = vec![0u32; 2 * order as usize + 1];
    let mut log = vec![0u32; size as usize];
    let mut cur = 1u32;
    for i in 0..order as usize {
        exp[i] = cur;
        log[cur as usize] = i as u32;
        cur = mul_tower(f, cur, gen);
    }
    for i in order as usize..exp.len() {
        exp[i] = exp[i - order as usize];
    }
    Tables { exp, log }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_and_minus_one() {
        let f2 = Field::standard(2, 1).unwrap();
        assert_eq!(f2.make(&[1]).unwrap(), f2.one());
        let f3 = Field::standard(3, 1).unwrap();
        let m1 = f3.make(&[2]).unwrap();
        assert_eq!(f3.add(m1, f3.one()), f3.zero());
        assert!(f2.make(&[1, 0]).is_err());
    }

    #[test]
    fn f4_generator() {
        let f = Field::standard(2, 2).unwrap();
        assert_eq!(f.params().modulus_s, vec![1, 1, 1]);
        let g = f.make(&[0, 1]).unwrap();
        // g^2 + g + 1 = 0 and g^3 = 1
        let g2 = f.mul(g, g);
        assert_eq!(f.add(f.add(g2, g), f.one()), f.zero());
        assert_eq!(f.mul(g2, g), f.one());
        assert_eq!(f.pow_q(g, 1), f.add(g, f.one()));
        assert_eq!(f.pow_q(g, 2), g);
        assert_eq!(f.pow_q(f.pow_q(g, 1), -1), g);
    }

    #[test]
    fn frobenius_fixes_base() {
        let f = Field::standard(3, 2).unwrap();
        for c in 0..3 {
            let x = f.from_base(c).unwrap();
            assert_eq!(f.pow_q(x, 1), x);
        }
    }

    #[test]
    fn roots_q_minus_1() {
        let f2 = Field::standard(2, 1).unwrap();
        assert_eq!(f2.root_q_minus_1(f2.one()).unwrap(), f2.one());
        let f3 = Field::standard(3, 1).unwrap();
        assert_eq!(f3.root_q_minus_1(f3.one()).unwrap(), f3.one());
        let m1 = f3.neg(f3.one());
        assert_eq!(f3.root_q_minus_1(m1), Err(Error::NoRootInField));
        let f9 = Field::standard(3, 2).unwrap();
        let m1 = f9.neg(f9.one());
        let y = f9.root_q_minus_1(m1).unwrap();
        assert_eq!(f9.mul(y, y), m1);
    }

    #[test]
    fn reducible_moduli_rejected() {
        let mut p = FieldParams::standard(2, 2).unwrap();
        p.modulus_s = vec![1, 0, 1]; // (x+1)^2
        assert!(Field::new(p).is_err());
        let bad = FieldParams { p: 3, e: 2, modulus: vec![2, 0, 1], s: 1, modulus_s: vec![0, 1] };
        assert!(Field::new(bad).is_err());
    }

    #[test]
    fn schoolbook_matches_tables() {
        // 3^2 extended by degree 2 is small enough for tables; compare with
        // the tower multiplication directly.
        let f = Field::standard(9, 2).unwrap();
        assert!(f.has_tables());
        for x in (0..f.size()).step_by(7) {
            for y in (0..f.size()).step_by(5) {
                let t = f.mul(ResidueElem(x), ResidueElem(y));
                assert_eq!(t.0, mul_tower(&f.0, x, y));
            }
        }
    }

    #[test]
    fn large_field_without_tables() {
        let f = Field::standard(2, 13).unwrap();
        assert!(!f.has_tables());
        let x = ResidueElem(0x1234);
        let y = f.inv(x).unwrap();
        assert_eq!(f.mul(x, y), f.one());
        assert_eq!(f.pow_q(x, 13), x);
    }

    fn fields() -> Vec<Field> {
        vec![
            Field::standard(2, 3).unwrap(),
            Field::standard(3, 2).unwrap(),
            Field::standard(4, 2).unwrap(),
            Field::standard(5, 1).unwrap(),
            Field::standard(8, 1).unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn field_axioms(idx in 0usize..5, a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
            let f = &fields()[idx];
            let n = f.size();
            let (x, y, z) = (ResidueElem(a % n), ResidueElem(b % n), ResidueElem(c % n));
            prop_assert_eq!(f.mul(f.mul(x, y), z), f.mul(x, f.mul(y, z)));
            prop_assert_eq!(f.mul(x, f.add(y, z)), f.add(f.mul(x, y), f.mul(x, z)));
            prop_assert_eq!(f.add(x, f.neg(x)), f.zero());
            if let Some(xi) = f.inv(x) {
                prop_assert_eq!(f.mul(x, xi), f.one());
            }
            prop_assert_eq!(f.pow_q(f.add(x, y), 1), f.add(f.pow_q(x, 1), f.pow_q(y, 1)));
            prop_assert_eq!(f.pow_q(f.mul(x, y), 1), f.mul(f.pow_q(x, 1), f.pow_q(y, 1)));
            prop_assert_eq!(f.pow_q(x, f.s() as i64), x);
            if !x.is_zero() {
                if let Ok(r) = f.root_q_minus_1(x) {
                    prop_assert_eq!(f.pow(r, f.q() as u64 - 1), x);
                }
            }
        }
    }
}
