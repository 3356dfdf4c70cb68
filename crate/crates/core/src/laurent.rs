//! Truncated Laurent series in a uniformizer `u` with `u^m = 1/θ`.
//!
//! A [`LaurentElem`] stores the coefficients from its valuation up to a cap;
//! coefficients at `u`-exponents `>= cap` are unknown. Elements flagged exact
//! (polynomials in `θ`, monomials, ...) are known to all orders.
//!
//! Precision propagates as follows: sums take the minimum cap, products take
//! `min(x.val + y.cap, y.val + x.cap)`, inverses keep the relative precision.
//! Every inexact result is clamped to at most `prec` coefficients past its
//! valuation, and an exact result whose span exceeds the context's span limit
//! is demoted to `prec` coefficients.

use std::cmp::{max, min};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{Field, ResidueElem};

/// Cap value used for exact elements.
pub const EXACT_CAP: i64 = i64::MAX / 4;

/// Rational degrees (`log_q |x|`).
pub type Deg = Ratio<i64>;

/// Shared parameters of the series model.
#[derive(Debug)]
pub struct SeriesCtx {
    field: Field,
    m: u32,
    prec: i64,
}

pub type Ctx = Arc<SeriesCtx>;

impl SeriesCtx {
    pub fn new(field: Field, m: u32, prec: i64) -> Result<Ctx> {
        if m == 0 {
            return Err(Error::InvalidInput("ramification index m must be >= 1".into()));
        }
        if prec < 1 {
            return Err(Error::InvalidInput("precision must be >= 1".into()));
        }
        Ok(Arc::new(SeriesCtx { field, m, prec }))
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn prec(&self) -> i64 {
        self.prec
    }
    pub fn q(&self) -> u64 {
        self.field.q() as u64
    }
    fn span_limit(&self) -> usize {
        (8 * self.prec).max(256) as usize
    }
}

/// Same parameters, different working precision.
pub fn with_prec(ctx: &Ctx, prec: i64) -> Result<Ctx> {
    SeriesCtx::new(ctx.field.clone(), ctx.m, prec)
}

/// Element of `F_{q^s}((u))` known below `cap`.
#[derive(Clone)]
pub struct LaurentElem {
    ctx: Ctx,
    val: i64,
    coeffs: Vec<ResidueElem>,
    cap: i64,
    exact: bool,
}

fn is_inf(cap: i64) -> bool {
    cap >= EXACT_CAP / 2
}

fn cap_add(a: i64, b: i64) -> i64 {
    if is_inf(a) || is_inf(b) {
        EXACT_CAP
    } else {
        a + b
    }
}

/// Smallest `u`-exponent that can be nonzero for an element of degree `<= bound`.
pub fn cap_from_deg_bound(m: u32, bound: Deg) -> i64 {
    let x = -bound * m as i64;
    let (n, d) = (*x.numer(), *x.denom());
    n.div_euclid(d) + if n.rem_euclid(d) == 0 { 0 } else { 1 }
}

impl LaurentElem {
    fn build(ctx: &Ctx, val: i64, coeffs: Vec<ResidueElem>, cap: i64, exact: bool) -> Self {
        let mut x = LaurentElem { ctx: ctx.clone(), val, coeffs, cap, exact };
        x.normalize();
        x
    }

    fn normalize(&mut self) {
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => {
                self.coeffs.clear();
                if self.exact {
                    self.val = 0;
                    self.cap = EXACT_CAP;
                } else {
                    self.val = self.cap;
                }
                return;
            }
            Some(k) => {
                self.coeffs.drain(..k);
                self.val += k as i64;
            }
        }
        if self.exact {
            while self.coeffs.last().is_some_and(|c| c.is_zero()) {
                self.coeffs.pop();
            }
            self.cap = EXACT_CAP;
            if self.coeffs.len() > self.ctx.span_limit() {
                self.exact = false;
                self.cap = self.val + self.ctx.prec;
                self.coeffs.truncate(self.ctx.prec as usize);
            }
        } else {
            let cap = min(self.cap, self.val + self.ctx.prec);
            self.cap = cap;
            let len = (cap - self.val) as usize;
            self.coeffs.resize(len, ResidueElem::ZERO);
        }
    }

    /// Raw constructor: coefficients starting at `u^val`, known below `cap`
    /// (`None` for exact).
    pub fn from_coeffs(ctx: &Ctx, val: i64, coeffs: Vec<ResidueElem>, cap: Option<i64>) -> Self {
        match cap {
            None => Self::build(ctx, val, coeffs, EXACT_CAP, true),
            Some(c) => {
                let mut cs = coeffs;
                let keep = (c - val).max(0) as usize;
                cs.truncate(keep);
                cs.resize(keep, ResidueElem::ZERO);
                Self::build(ctx, min(val, c), cs, c, false)
            }
        }
    }

    pub fn zero(ctx: &Ctx) -> Self {
        Self::build(ctx, 0, Vec::new(), EXACT_CAP, true)
    }

    /// Zero known only below `cap`.
    pub fn zero_to(ctx: &Ctx, cap: i64) -> Self {
        Self::build(ctx, cap, Vec::new(), cap, false)
    }

    pub fn one(ctx: &Ctx) -> Self {
        Self::constant(ctx, ResidueElem::ONE)
    }

    pub fn constant(ctx: &Ctx, c: ResidueElem) -> Self {
        Self::build(ctx, 0, vec![c], EXACT_CAP, true)
    }

    /// `u^k`.
    pub fn u_pow(ctx: &Ctx, k: i64) -> Self {
        Self::build(ctx, k, vec![ResidueElem::ONE], EXACT_CAP, true)
    }

    pub fn theta(ctx: &Ctx) -> Self {
        Self::theta_pow(ctx, 1)
    }

    /// `θ^k = u^{-mk}`, any integer `k`.
    pub fn theta_pow(ctx: &Ctx, k: i64) -> Self {
        Self::u_pow(ctx, -(ctx.m as i64) * k)
    }

    /// Polynomial in `θ` with `F_q` coefficients (encodings), low to high.
    pub fn from_poly(ctx: &Ctx, coeffs: &[ResidueElem]) -> Self {
        Self::from_theta_terms(ctx, coeffs.iter().enumerate().map(|(i, &c)| (i as i64, c)))
    }

    /// Exact finite sum of `c θ^k`.
    pub fn from_theta_terms(ctx: &Ctx, terms: impl IntoIterator<Item = (i64, ResidueElem)>) -> Self {
        let terms: Vec<(i64, ResidueElem)> = terms.into_iter().collect();
        if terms.is_empty() {
            return Self::zero(ctx);
        }
        let m = ctx.m as i64;
        let lo = terms.iter().map(|&(k, _)| -m * k).min().unwrap();
        let hi = terms.iter().map(|&(k, _)| -m * k).max().unwrap();
        let mut coeffs = vec![ResidueElem::ZERO; (hi - lo + 1) as usize];
        let f = ctx.field();
        for (k, c) in terms {
            let idx = (-m * k - lo) as usize;
            coeffs[idx] = f.add(coeffs[idx], c);
        }
        Self::build(ctx, lo, coeffs, EXACT_CAP, true)
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }
    pub fn field(&self) -> &Field {
        self.ctx.field()
    }
    /// `u`-adic valuation (equals `cap` for an element zero to precision,
    /// 0 for exact zero).
    pub fn val(&self) -> i64 {
        self.val
    }
    pub fn cap(&self) -> i64 {
        self.cap
    }
    pub fn is_exact(&self) -> bool {
        self.exact
    }
    pub fn coeffs(&self) -> &[ResidueElem] {
        &self.coeffs
    }
    pub fn is_exact_zero(&self) -> bool {
        self.exact && self.coeffs.is_empty()
    }
    /// True when no known coefficient is nonzero.
    pub fn is_zero_to_precision(&self) -> bool {
        self.coeffs.is_empty()
    }
    pub fn is_nonzero(&self) -> bool {
        !self.coeffs.is_empty()
    }
    /// Number of known coefficients past the valuation.
    pub fn relprec(&self) -> i64 {
        if self.exact {
            EXACT_CAP
        } else {
            self.cap - self.val
        }
    }
    /// One past the last stored coefficient.
    fn end(&self) -> i64 {
        self.val + self.coeffs.len() as i64
    }

    /// Coefficient of `u^k`, `None` if unknown.
    pub fn coeff(&self, k: i64) -> Option<ResidueElem> {
        if k >= self.cap {
            return None;
        }
        if k < self.val || k >= self.end() {
            return Some(ResidueElem::ZERO);
        }
        Some(self.coeffs[(k - self.val) as usize])
    }

    pub fn leading_coeff(&self) -> Option<ResidueElem> {
        self.coeffs.first().copied()
    }

    /// `deg x = -val/m`; `None` if no coefficient is known nonzero.
    pub fn deg(&self) -> Option<Deg> {
        self.is_nonzero().then(|| Deg::new(-self.val, self.ctx.m as i64))
    }

    /// Lowers the cap to `cap` (no-op if already lower).
    pub fn truncate(&self, cap: i64) -> Self {
        if cap >= self.cap {
            return self.clone();
        }
        let mut cs = self.coeffs.clone();
        let keep = (cap - self.val).max(0) as usize;
        cs.truncate(keep);
        cs.resize(keep, ResidueElem::ZERO);
        Self::build(&self.ctx, min(self.val, cap), cs, cap, false)
    }

    /// Re-homes the element in another context with the same field and `m`.
    /// Keeps `u` digits past the valuation; exact zero stays exact.
    pub fn truncate_rel(&self, u: i64) -> Self {
        if self.is_exact_zero() {
            self.clone()
        } else {
            self.truncate(self.val() + u)
        }
    }

    pub fn rehome(&self, ctx: &Ctx) -> Self {
        assert_eq!(ctx.m, self.ctx.m);
        Self::build(ctx, self.val, self.coeffs.clone(), self.cap, self.exact)
    }

    pub fn scale(&self, c: ResidueElem) -> Self {
        let f = self.field();
        if c.is_zero() {
            return Self::zero(&self.ctx);
        }
        let cs = self.coeffs.iter().map(|&a| f.mul(a, c)).collect();
        Self::build(&self.ctx, self.val, cs, self.cap, self.exact)
    }

    /// Multiplication by `θ^k`.
    pub fn mul_theta_pow(&self, k: i64) -> Self {
        let shift = -(self.ctx.m as i64) * k;
        let cap = if self.exact { EXACT_CAP } else { self.cap + shift };
        Self::build(&self.ctx, self.val + shift, self.coeffs.clone(), cap, self.exact)
    }

    fn add_impl(&self, other: &Self, negate: bool) -> Self {
        let f = self.field().clone();
        let cap = min(self.cap, other.cap);
        let exact = self.exact && other.exact;
        if self.is_exact_zero() {
            return if negate { -other } else { other.clone() };
        }
        if other.is_exact_zero() {
            return self.clone();
        }
        let end = if exact { max(self.end(), other.end()) } else { cap };
        let lo = min(self.val, other.val).min(end);
        let mut out = vec![ResidueElem::ZERO; (end - lo).max(0) as usize];
        for (i, &c) in self.coeffs.iter().enumerate() {
            let k = self.val + i as i64;
            if k >= end {
                break;
            }
            out[(k - lo) as usize] = c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            let k = other.val + i as i64;
            if k >= end {
                break;
            }
            let slot = &mut out[(k - lo) as usize];
            *slot = if negate { f.sub(*slot, c) } else { f.add(*slot, c) };
        }
        Self::build(&self.ctx, lo, out, if exact { EXACT_CAP } else { cap }, exact)
    }

    fn mul_impl(&self, other: &Self) -> Self {
        let ctx = &self.ctx;
        if self.is_exact_zero() || other.is_exact_zero() {
            return Self::zero(ctx);
        }
        let val = self.val + other.val;
        let mut cap = min(cap_add(self.val, other.cap), cap_add(other.val, self.cap));
        let mut exact = is_inf(cap);
        if self.is_zero_to_precision() || other.is_zero_to_precision() {
            return Self::zero_to(ctx, cap);
        }
        let full = self.coeffs.len() + other.coeffs.len() - 1;
        if exact && full > ctx.span_limit() {
            exact = false;
            cap = val + ctx.prec;
        }
        if !exact {
            cap = min(cap, val + ctx.prec);
        }
        let len = if exact { full } else { min(full, (cap - val).max(0) as usize) };
        let mut out = vec![ResidueElem::ZERO; len];
        // iterate over the sparser factor
        let (a, b) = if nnz(&self.coeffs) <= nnz(&other.coeffs) {
            (&self.coeffs, &other.coeffs)
        } else {
            (&other.coeffs, &self.coeffs)
        };
        let f = ctx.field();
        if f.has_tables() {
            let blog: Vec<Option<u32>> =
                b.iter().map(|&y| if y.is_zero() { None } else { f.log(y) }).collect();
            for (i, &x) in a.iter().enumerate() {
                if x.is_zero() || i >= len {
                    continue;
                }
                let lx = f.log(x).unwrap();
                let top = min(b.len(), len - i);
                for (j, ly) in blog[..top].iter().enumerate() {
                    if let Some(ly) = ly {
                        let slot = &mut out[i + j];
                        *slot = f.add(*slot, f.exp_log(lx + ly));
                    }
                }
            }
        } else {
            for (i, &x) in a.iter().enumerate() {
                if x.is_zero() || i >= len {
                    continue;
                }
                let top = min(b.len(), len - i);
                for (j, &y) in b[..top].iter().enumerate() {
                    if !y.is_zero() {
                        out[i + j] = f.add(out[i + j], f.mul(x, y));
                    }
                }
            }
        }
        Self::build(ctx, val, out, if exact { EXACT_CAP } else { cap }, exact)
    }

    /// Multiplicative inverse.
    pub fn inv(&self) -> Result<Self> {
        if self.is_exact_zero() {
            return Err(Error::DivideByZero);
        }
        if self.is_zero_to_precision() {
            return Err(Error::PrecisionExhausted(format!(
                "inverting an element that is zero below u^{}",
                self.cap
            )));
        }
        let ctx = &self.ctx;
        let f = ctx.field();
        let a0inv = f.inv(self.coeffs[0]).unwrap();
        if self.exact && self.coeffs.len() == 1 {
            return Ok(Self::build(ctx, -self.val, vec![a0inv], EXACT_CAP, true));
        }
        let rel = if self.exact { ctx.prec } else { min(self.relprec(), ctx.prec) } as usize;
        let a = &self.coeffs;
        let mut b = vec![ResidueElem::ZERO; rel];
        b[0] = a0inv;
        for k in 1..rel {
            let mut acc = ResidueElem::ZERO;
            for i in 1..=min(k, a.len() - 1) {
                if !a[i].is_zero() && !b[k - i].is_zero() {
                    acc = f.add(acc, f.mul(a[i], b[k - i]));
                }
            }
            b[k] = f.neg(f.mul(a0inv, acc));
        }
        Ok(Self::build(ctx, -self.val, b, -self.val + rel as i64, false))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    /// `x^{q^k}` by the Frobenius on coefficients and exponents.
    pub fn pow_q(&self, k: u32) -> Self {
        if k == 0 || self.is_exact_zero() {
            return self.clone();
        }
        let ctx = &self.ctx;
        let f = ctx.field();
        let qk = (ctx.q() as i64).checked_pow(k).expect("q^k overflows");
        let val = self.val.checked_mul(qk).expect("valuation overflow in pow_q");
        if self.is_zero_to_precision() {
            return Self::zero_to(ctx, self.cap.saturating_mul(qk));
        }
        let (cap, exact) = if self.exact {
            let span = (self.coeffs.len() as i64 - 1) * qk + 1;
            if span as usize > ctx.span_limit() {
                (val + ctx.prec, false)
            } else {
                (EXACT_CAP, true)
            }
        } else {
            (min(self.cap.checked_mul(qk).expect("cap overflow"), val + ctx.prec), false)
        };
        let len = if exact {
            ((self.coeffs.len() as i64 - 1) * qk + 1) as usize
        } else {
            (cap - val) as usize
        };
        let mut out = vec![ResidueElem::ZERO; len];
        for (i, &c) in self.coeffs.iter().enumerate() {
            let idx = i as i64 * qk;
            if idx >= len as i64 {
                break;
            }
            out[idx as usize] = f.pow_q(c, k as i64);
        }
        Self::build(ctx, val, out, cap, exact)
    }

    /// Plain integer power by repeated squaring.
    pub fn pow(&self, mut n: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.ctx);
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            n >>= 1;
        }
        acc
    }

    /// Canonical `(q-1)`-st root: residue root chosen by
    /// [`Field::root_q_minus_1`], unit part `(1+w)^{1/(q-1)} = ∏_k (1+w^{q^k})^{-1}`.
    pub fn root_q_minus_1(&self) -> Result<Self> {
        let ctx = &self.ctx;
        let q = ctx.q() as i64;
        if q == 2 || self.is_exact_zero() {
            return Ok(self.clone());
        }
        if self.is_zero_to_precision() {
            return Err(Error::PrecisionExhausted("root of an element zero to precision".into()));
        }
        let d = q - 1;
        if self.val.rem_euclid(d) != 0 {
            let g = num_integer::gcd(self.val.abs(), d);
            return Err(Error::Ramification { required_m: ctx.m * (d / g) as u32 });
        }
        let f = ctx.field();
        let lead = self.coeffs[0];
        let r = f.root_q_minus_1(lead)?;
        let root_val = self.val / d;
        let leading = Self::build(ctx, root_val, vec![r], EXACT_CAP, true);
        if self.exact && self.coeffs.len() == 1 {
            return Ok(leading);
        }
        let unit = Self::build(
            ctx,
            0,
            self.coeffs.iter().map(|&c| f.mul(c, f.inv(lead).unwrap())).collect(),
            if self.exact { EXACT_CAP } else { self.cap - self.val },
            self.exact,
        );
        let w = &unit - &Self::one(ctx);
        let target = min(unit.cap, ctx.prec);
        let mut prod = Self::one(ctx);
        let mut wk = w;
        while wk.is_nonzero() && wk.val < target {
            let factor = (&Self::one(ctx) + &wk).inv()?;
            prod = &prod * &factor;
            wk = wk.pow_q(1);
        }
        let prod = prod.truncate(target);
        Ok(&leading * &prod)
    }

    /// Compares with `other` below the common cap.
    pub fn agrees_with(&self, other: &Self) -> bool {
        (self - other).is_zero_to_precision()
    }

    pub fn to_json(&self) -> LaurentJson {
        let f = self.field();
        LaurentJson {
            val: self.val,
            m: self.ctx.m,
            coeffs: self.coeffs.iter().map(|&c| f.coords(c)).collect(),
            cap: if self.exact { self.end() } else { self.cap },
            exact: self.exact,
        }
    }

    pub fn from_json(ctx: &Ctx, j: &LaurentJson) -> Result<Self> {
        if j.m != ctx.m {
            return Err(Error::InvalidElement(format!("m = {} does not match session m = {}", j.m, ctx.m)));
        }
        let f = ctx.field();
        let cs = j.coeffs.iter().map(|c| f.make(c)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_coeffs(ctx, j.val, cs, (!j.exact).then_some(j.cap)))
    }
}

fn nnz(v: &[ResidueElem]) -> usize {
    v.iter().filter(|c| !c.is_zero()).count()
}

/// Serialized form `{"val","m","coeffs","cap","exact"}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaurentJson {
    pub val: i64,
    pub m: u32,
    pub coeffs: Vec<Vec<u32>>,
    pub cap: i64,
    pub exact: bool,
}

impl fmt::Debug for LaurentElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shown: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .take(6)
            .map(|(i, c)| format!("{:?}u^{}", c, self.val + i as i64))
            .collect();
        if self.exact {
            write!(f, "[{}]", shown.join(" + "))
        } else {
            write!(f, "[{} + O(u^{})]", shown.join(" + "), self.cap)
        }
    }
}

impl PartialEq for LaurentElem {
    /// Structural equality (same known coefficients, cap and exactness).
    fn eq(&self, other: &Self) -> bool {
        self.val == other.val
            && self.cap == other.cap
            && self.exact == other.exact
            && self.coeffs == other.coeffs
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl<'a> $tr<&'a LaurentElem> for &'a LaurentElem {
            type Output = LaurentElem;
            fn $method(self, rhs: &'a LaurentElem) -> LaurentElem {
                $body(self, rhs)
            }
        }
        impl $tr<LaurentElem> for LaurentElem {
            type Output = LaurentElem;
            fn $method(self, rhs: LaurentElem) -> LaurentElem {
                $body(&self, &rhs)
            }
        }
        impl<'a> $tr<&'a LaurentElem> for LaurentElem {
            type Output = LaurentElem;
            fn $method(self, rhs: &'a LaurentElem) -> LaurentElem {
                $body(&self, rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a: &LaurentElem, b: &LaurentElem| a.add_impl(b, false));
forward_binop!(Sub, sub, |a: &LaurentElem, b: &LaurentElem| a.add_impl(b, true));
forward_binop!(Mul, mul, |a: &LaurentElem, b: &LaurentElem| a.mul_impl(b));

impl Neg for &LaurentElem {
    type Output = LaurentElem;
    fn neg(self) -> LaurentElem {
        let f = self.field();
        let cs = self.coeffs.iter().map(|&c| f.neg(c)).collect();
        LaurentElem::build(&self.ctx, self.val, cs, self.cap, self.exact)
    }
}

impl Neg for LaurentElem {
    type Output = LaurentElem;
    fn neg(self) -> LaurentElem {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(q: u32, s: u32, m: u32, prec: i64) -> Ctx {
        SeriesCtx::new(Field::standard(q, s).unwrap(), m, prec).unwrap()
    }

    #[test]
    fn theta_and_bracket() {
        let c = ctx(2, 1, 3, 40);
        let t = LaurentElem::theta(&c);
        assert_eq!(t.val(), -3);
        assert_eq!(t.coeffs(), &[ResidueElem::ONE]);
        let b1 = LaurentElem::theta_pow(&c, 2) - LaurentElem::theta(&c);
        assert_eq!(b1.val(), -6);
        assert!(b1.is_exact());
        assert_eq!(b1.coeff(-3), Some(ResidueElem::ONE)); // -1 = 1 in char 2
        assert_eq!(b1.coeff(-4), Some(ResidueElem::ZERO));
        assert!(LaurentElem::from_poly(&c, &[]).is_exact_zero());
        let c3 = ctx(3, 1, 1, 40);
        let b = LaurentElem::theta_pow(&c3, 3) - LaurentElem::theta(&c3);
        assert_eq!(b.coeff(-1), Some(ResidueElem(2)));
        let sq = &LaurentElem::theta(&c) * &LaurentElem::theta(&c);
        assert_eq!(sq.val(), -6);
    }

    #[test]
    fn geometric_inverse() {
        // 1 - θ^{-1} for q = 2, m = 1 inverts to 1 + u + u^2 + ...
        let c = ctx(2, 1, 1, 20);
        let x = LaurentElem::one(&c) - LaurentElem::theta_pow(&c, -1);
        let y = x.inv().unwrap();
        assert_eq!(y.val(), 0);
        assert_eq!(y.cap(), 20);
        assert!(y.coeffs().iter().all(|&c| c == ResidueElem::ONE));
        let p = &x * &y;
        assert!(p.agrees_with(&LaurentElem::one(&c)));
        assert_eq!(LaurentElem::zero(&c).inv().unwrap_err(), Error::DivideByZero);
        assert!(matches!(LaurentElem::zero_to(&c, 5).inv(), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn frobenius_power() {
        let c = ctx(2, 1, 1, 20);
        let t1 = LaurentElem::theta(&c) + LaurentElem::one(&c);
        let direct = &t1 * &t1;
        assert_eq!(t1.pow_q(1), direct);
        assert_eq!(t1.pow_q(0), t1);
        assert_eq!(LaurentElem::theta(&c).pow_q(1).val(), -2);
    }

    #[test]
    fn roots() {
        let c = ctx(2, 1, 1, 20);
        let mt = -LaurentElem::theta(&c);
        assert_eq!(mt.root_q_minus_1().unwrap(), LaurentElem::theta(&c));
        let c3 = ctx(3, 2, 2, 30);
        let mt = -LaurentElem::theta(&c3);
        let r = mt.root_q_minus_1().unwrap();
        assert_eq!(r.val(), -1);
        assert!((&r * &r).agrees_with(&mt));
        let one = LaurentElem::one(&c3);
        assert_eq!(one.root_q_minus_1().unwrap(), one);
        let c31 = ctx(3, 1, 1, 30);
        assert_eq!(
            (-LaurentElem::theta(&c31)).root_q_minus_1().unwrap_err(),
            Error::Ramification { required_m: 2 }
        );
        assert_eq!(
            (-LaurentElem::theta_pow(&c31, 2)).root_q_minus_1().unwrap_err(),
            Error::NoRootInField
        );
        // inexact unit part
        let x = (&LaurentElem::theta_pow(&c3, 2) + &LaurentElem::theta(&c3)).inv().unwrap();
        let r = x.root_q_minus_1().unwrap();
        assert!((&r * &r).agrees_with(&x));
        assert_eq!(r.relprec(), x.relprec());
    }

    #[test]
    fn precision_propagation() {
        let c = ctx(2, 1, 1, 50);
        let x = LaurentElem::from_coeffs(&c, -2, vec![ResidueElem::ONE; 4], Some(2));
        let y = LaurentElem::from_coeffs(&c, 1, vec![ResidueElem::ONE; 3], Some(4));
        assert_eq!((&x + &y).cap(), 2);
        assert_eq!((&x * &y).cap(), min(-2 + 4, 1 + 2));
        let e = LaurentElem::theta(&c);
        assert_eq!((&e * &x).cap(), 1);
        // cancellation keeps the absolute cap
        let d = &x - &x;
        assert!(d.is_zero_to_precision());
        assert_eq!(d.cap(), 2);
    }

    #[test]
    fn json_roundtrip() {
        let c = ctx(3, 2, 2, 10);
        let x = (LaurentElem::theta(&c) + LaurentElem::one(&c)).inv().unwrap();
        let j = x.to_json();
        assert_eq!(LaurentElem::from_json(&c, &j).unwrap(), x);
        let s = serde_json::to_string(&j).unwrap();
        assert!(s.starts_with("{\"val\":"));
    }

    fn arb_elem(c: Ctx) -> impl Strategy<Value = LaurentElem> {
        let size = c.field().size();
        (-6i64..6, proptest::collection::vec(0u32..size, 1..8), 4i64..16, any::<bool>()).prop_map(
            move |(val, cs, rel, exact)| {
                let cs: Vec<ResidueElem> = cs.into_iter().map(ResidueElem).collect();
                LaurentElem::from_coeffs(&c, val, cs, (!exact).then_some(val + rel))
            },
        )
    }

    proptest! {
        #[test]
        fn ultrametric_and_degree(x in arb_elem(ctx(2, 2, 2, 30)), y in arb_elem(ctx(2, 2, 2, 30))) {
            let s = &x + &y;
            if let (Some(dx), Some(dy), Some(ds)) = (x.deg(), y.deg(), s.deg()) {
                prop_assert!(ds <= dx.max(dy));
                if dx != dy {
                    prop_assert_eq!(ds, dx.max(dy));
                }
            }
            let p = &x * &y;
            if let (Some(dx), Some(dy)) = (x.deg(), y.deg()) {
                prop_assert_eq!(p.deg().unwrap(), dx + dy);
            }
        }

        #[test]
        fn pow_q_matches_repeated_multiplication(x in arb_elem(ctx(2, 2, 2, 30)), k in 0u32..3) {
            let n = 2u64.pow(k);
            let direct = x.pow(n);
            prop_assert!(x.pow_q(k).agrees_with(&direct));
        }

        #[test]
        fn inverse_contract(x in arb_elem(ctx(3, 1, 1, 30))) {
            if x.is_nonzero() {
                let y = x.inv().unwrap();
                prop_assert!((&x * &y).agrees_with(&LaurentElem::one(x.ctx())));
            }
        }

        #[test]
        fn precision_soundness(x in arb_elem(ctx(3, 2, 2, 40)), y in arb_elem(ctx(3, 2, 2, 40))) {
            // recomputing with a lower working precision agrees on the common part
            let lo = with_prec(x.ctx(), 8).unwrap();
            let (xl, yl) = (x.rehome(&lo), y.rehome(&lo));
            let hi = (&(&x * &y) + &x.pow_q(1)).root_q_minus_1();
            let low = (&(&xl * &yl) + &xl.pow_q(1)).root_q_minus_1();
            if let (Ok(h), Ok(l)) = (hi, low) {
                prop_assert!(h.cap() >= l.cap());
                prop_assert_eq!(h.truncate(l.cap()).rehome(&lo), l);
            }
        }
    }
}
