//! Drinfeld modules `φ_t = θ + A_1 τ + ... + A_r τ^r` over the series model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::ResidueElem;
use crate::laurent::{cap_from_deg_bound, Ctx, Deg, LaurentElem};
use crate::partitions::{enumerate, restrict_to_support, ShadowedPartition};
use crate::tate::{q_pow, theta_q_pow};

#[derive(Clone, Debug)]
pub struct DrinfeldModule {
    ctx: Ctx,
    a: Vec<LaurentElem>,
}

/// `[n] = θ^{q^n} - θ`.
pub fn bracket(ctx: &Ctx, n: u32) -> LaurentElem {
    &theta_q_pow(ctx, n) - &LaurentElem::theta(ctx)
}

/// Rounds up to the grid `1/den`.
fn ceil_grid(x: Deg, den: i64) -> Deg {
    let y = x * den;
    Deg::new(y.ceil().to_integer(), den)
}

impl DrinfeldModule {
    pub fn new(ctx: &Ctx, a: Vec<LaurentElem>) -> Result<Self> {
        match a.last() {
            None => Err(Error::InvalidInput("rank must be >= 1".into())),
            Some(x) if !x.is_nonzero() => Err(Error::InvalidInput("leading coefficient A_r must be nonzero".into())),
            Some(_) => {
                for (i, x) in a.iter().enumerate() {
                    if !x.is_exact_zero() && !x.is_nonzero() {
                        return Err(Error::InvalidInput(format!("A_{} has unknown degree", i + 1)));
                    }
                }
                Ok(DrinfeldModule { ctx: ctx.clone(), a })
            }
        }
    }

    /// Coefficients given as polynomials in `θ` (entries are `F_q` encodings, low degree first).
    pub fn from_polys(ctx: &Ctx, polys: &[Vec<u32>]) -> Result<Self> {
        let q = ctx.q() as u32;
        let mut a = Vec::new();
        for p in polys {
            if let Some(&bad) = p.iter().find(|&&c| c >= q) {
                return Err(Error::InvalidElement(format!("{bad} is not an element of F_{q}")));
            }
            let cs: Vec<ResidueElem> = p.iter().map(|&c| ResidueElem(c)).collect();
            a.push(LaurentElem::from_poly(ctx, &cs));
        }
        Self::new(ctx, a)
    }

    pub fn carlitz(ctx: &Ctx) -> Self {
        Self::new(ctx, vec![LaurentElem::one(ctx)]).unwrap()
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }
    /// Same module in a context with another working precision.
    pub fn rehome(&self, ctx: &Ctx) -> Self {
        DrinfeldModule { ctx: ctx.clone(), a: self.a.iter().map(|x| x.rehome(ctx)).collect() }
    }
    pub fn rank(&self) -> usize {
        self.a.len()
    }
    /// `A_i`, with `A_0 = θ`.
    pub fn coeff(&self, i: usize) -> LaurentElem {
        if i == 0 {
            LaurentElem::theta(&self.ctx)
        } else {
            self.a[i - 1].clone()
        }
    }
    pub fn coeffs(&self) -> &[LaurentElem] {
        &self.a
    }

    /// `N(φ) = {i : A_i != 0}`.
    pub fn support(&self) -> Vec<usize> {
        (1..=self.rank()).filter(|&i| self.a[i - 1].is_nonzero()).collect()
    }

    pub fn deg_coeff(&self, i: usize) -> Option<Deg> {
        self.coeff(i).deg()
    }

    /// `φ_t(x) = θ x + Σ A_i x^{q^i}`.
    pub fn phi_t(&self, x: &LaurentElem) -> LaurentElem {
        let mut acc = x.mul_theta_pow(1);
        for (i, ai) in self.a.iter().enumerate() {
            if ai.is_exact_zero() {
                continue;
            }
            acc = &acc + &(ai * &x.pow_q(i as u32 + 1));
        }
        acc
    }

    /// `φ_a(x)` for `a ∈ F_q[t]` (encodings, low degree first).
    pub fn phi_action(&self, a: &[u32], x: &LaurentElem) -> LaurentElem {
        let mut acc = LaurentElem::zero(&self.ctx);
        for &c in a.iter().rev() {
            acc = &self.phi_t(&acc) + &x.scale(ResidueElem(c));
        }
        acc
    }

    /// `A^S = ∏_i ∏_{j ∈ S_i} A_i^{q^j}`.
    pub fn a_power(&self, s: &ShadowedPartition) -> LaurentElem {
        let mut acc = LaurentElem::one(&self.ctx);
        for (i, j) in s.entries() {
            acc = &acc * &self.a[i - 1].pow_q(j as u32);
        }
        acc
    }

    /// Shadowed partitions of `n` supported on `N(φ)`.
    pub fn partitions(&self, n: usize) -> Vec<ShadowedPartition> {
        restrict_to_support(enumerate(self.rank(), n as i64), &self.support())
    }

    /// `α_n = Σ_S A^S / D_n(S)`, `D_n(S) = ∏_{i ∈ ∪S} [n-i]^{q^i}`.
    pub fn alpha_closed(&self, n: usize) -> Result<LaurentElem> {
        let mut acc = LaurentElem::zero(&self.ctx);
        for s in self.partitions(n) {
            let mut d = LaurentElem::one(&self.ctx);
            for (_, i) in s.entries() {
                d = &d * &bracket(&self.ctx, (n - i) as u32).pow_q(i as u32);
            }
            acc = &acc + &self.a_power(&s).div(&d)?;
        }
        Ok(acc)
    }

    /// `β_n = Σ_S A^S / L(S)`, `L(S) = ∏_j ∏_{i ∈ S_j} (-[i+j])`.
    pub fn beta_closed(&self, n: usize) -> Result<LaurentElem> {
        let mut acc = LaurentElem::zero(&self.ctx);
        for s in self.partitions(n) {
            let mut l = LaurentElem::one(&self.ctx);
            for (j, i) in s.entries() {
                l = &l * &(-bracket(&self.ctx, (i + j) as u32));
            }
            acc = &acc + &self.a_power(&s).div(&l)?;
        }
        Ok(acc)
    }

    /// `α_0..=α_N` from `[n] α_n = Σ_{i=1}^{n} A_i α_{n-i}^{q^i}`.
    pub fn alpha_recurrence(&self, n_max: usize) -> Result<Vec<LaurentElem>> {
        let mut alpha = vec![LaurentElem::one(&self.ctx)];
        for n in 1..=n_max {
            let mut acc = LaurentElem::zero(&self.ctx);
            for i in 1..=n.min(self.rank()) {
                if self.a[i - 1].is_exact_zero() {
                    continue;
                }
                acc = &acc + &(&self.a[i - 1] * &alpha[n - i].pow_q(i as u32));
            }
            alpha.push(acc.div(&bracket(&self.ctx, n as u32))?);
        }
        Ok(alpha)
    }

    /// `β` by triangular inversion of `exp`: `Σ_{k<=n} β_k α_{n-k}^{q^k} = [n = 0]`.
    pub fn beta_inversion(alpha: &[LaurentElem]) -> Vec<LaurentElem> {
        let ctx = alpha[0].ctx();
        let mut beta: Vec<LaurentElem> = vec![LaurentElem::one(ctx)];
        for n in 1..alpha.len() {
            let mut acc = LaurentElem::zero(ctx);
            for (k, b) in beta.iter().enumerate() {
                acc = &acc + &(b * &alpha[n - k].pow_q(k as u32));
            }
            beta.push(-acc);
        }
        beta
    }

    /// Closed forms for `n <= N`, checked against the recurrence route.
    pub fn exp_log_coeffs(&self, n_max: usize) -> Result<CoeffTable> {
        let alpha: Vec<LaurentElem> = (0..=n_max).map(|n| self.alpha_closed(n)).collect::<Result<_>>()?;
        let beta: Vec<LaurentElem> = (0..=n_max).map(|n| self.beta_closed(n)).collect::<Result<_>>()?;
        let alpha2 = self.alpha_recurrence(n_max)?;
        let beta2 = Self::beta_inversion(&alpha2);
        for n in 0..=n_max {
            if !alpha[n].agrees_with(&alpha2[n]) || !beta[n].agrees_with(&beta2[n]) {
                return Err(Error::RouteMismatch(n));
            }
        }
        Ok(CoeffTable { alpha, beta })
    }

    pub fn convergence_data(&self) -> Result<ConvergenceData> {
        let q = self.ctx.q() as i64;
        let support = self.support();
        let mut ratios = Vec::new();
        for i in 1..=self.rank() {
            ratios.push(match self.deg_coeff(i) {
                Some(d) => {
                    let qi = q.pow(i as u32);
                    Some((d - qi) / (qi - 1))
                }
                None => None,
            });
        }
        let best = support.iter().filter_map(|&i| ratios[i - 1]).max().ok_or(Error::InvalidInput("empty support".into()))?;
        let s = *support.iter().find(|&&i| ratios[i - 1] == Some(best)).unwrap();
        let strict = support.iter().all(|&i| i == s || ratios[i - 1].unwrap() < best);
        Ok(ConvergenceData { support, ratios, s, strict, logq_r: -best })
    }

    /// `exp_φ(θ z) = φ_t(exp_φ(z))` coefficientwise: `θ^{q^n} α_n = Σ_{i<=n} A_i α_{n-i}^{q^i}`.
    /// Returns the orders at which the identity fails.
    pub fn functional_equation_failures(&self, alpha: &[LaurentElem]) -> Vec<usize> {
        let mut bad = Vec::new();
        for n in 0..alpha.len() {
            let lhs = &theta_q_pow(&self.ctx, n as u32) * &alpha[n];
            let mut rhs = LaurentElem::zero(&self.ctx);
            for i in 0..=n.min(self.rank()) {
                rhs = &rhs + &(&self.coeff(i) * &alpha[n - i].pow_q(i as u32));
            }
            if !lhs.agrees_with(&rhs) {
                bad.push(n);
            }
        }
        bad
    }

    /// Degree bounds for `α_n` (see [`AlphaBounds`]).
    pub fn alpha_bounds(&self, n_max: usize) -> AlphaBounds {
        AlphaBounds::new(self, n_max)
    }

    /// `exp_φ(z)` with a certified tail, choosing the number of terms so the
    /// tail sits `rel` u-steps below `z`.
    pub fn exp_eval(&self, z: &LaurentElem, rel: i64) -> Result<LaurentElem> {
        if z.is_exact_zero() {
            return Ok(z.clone());
        }
        let dz = z.deg().ok_or(Error::PrecisionExhausted("exp argument is zero to precision".into()))?;
        let m = self.ctx.m();
        let target = z.val() + rel;
        let mut bounds = self.alpha_bounds(8);
        let mut n = 1usize;
        loop {
            if n + 2 > bounds.len() {
                bounds = self.alpha_bounds(2 * n + 8);
            }
            if let Ok(t) = bounds.tail(n, dz) {
                if cap_from_deg_bound(m, t) >= target {
                    let alpha = self.alpha_recurrence(n)?;
                    let mut acc = LaurentElem::zero(&self.ctx);
                    for (k, a) in alpha.iter().enumerate() {
                        acc = &acc + &(a * &z.pow_q(k as u32));
                    }
                    return Ok(acc.truncate(cap_from_deg_bound(m, t)));
                }
            }
            n += 1;
            if n > 60 {
                return Err(Error::NoConvergence("exp series tail did not fall below target".into()));
            }
        }
    }

    /// `log_q ‖X_φ(S;t)‖` in closed form, using reference index `i`.
    pub fn x_norm_closed_form(&self, s: &ShadowedPartition, i: usize) -> Result<Deg> {
        let q = self.ctx.q();
        let cd = self.convergence_data()?;
        let ri = cd.ratios[i - 1].ok_or(Error::InvalidInput(format!("{i} not in N(φ)")))?;
        let n = s.size() as u32;
        let qn = (q as i64).pow(n);
        let mut acc = ri * (qn - 1);
        for &k in &cd.support {
            let mu = cd.mu(i, k).unwrap();
            let qk = (q as i64).pow(k as u32);
            acc += mu * ((qk - 1) * s.weight(k, q) as i64);
        }
        Ok(acc)
    }

    /// `log_q ‖X_φ(S;t)‖ = Σ_i w(S_i)(deg A_i - q^i)`, the direct form.
    pub fn x_norm_direct(&self, s: &ShadowedPartition) -> Option<Deg> {
        let q = self.ctx.q();
        let mut acc = Deg::from_integer(0);
        for i in 1..=self.rank() {
            let w = s.weight(i, q) as i64;
            if w == 0 {
                continue;
            }
            acc += (self.deg_coeff(i)? - q_pow(&self.ctx, i as u32)) * w;
        }
        Some(acc)
    }
}

#[derive(Clone, Debug)]
pub struct CoeffTable {
    pub alpha: Vec<LaurentElem>,
    pub beta: Vec<LaurentElem>,
}

impl CoeffTable {
    /// Orders `n` at which `Σ_{k<=n} β_k α_{n-k}^{q^k} != [n = 0]`.
    pub fn compose_failures(&self) -> Vec<usize> {
        let ctx = self.alpha[0].ctx();
        let mut bad = Vec::new();
        for n in 0..self.alpha.len() {
            let mut acc = LaurentElem::zero(ctx);
            for k in 0..=n {
                acc = &acc + &(&self.beta[k] * &self.alpha[n - k].pow_q(k as u32));
            }
            let target = if n == 0 { LaurentElem::one(ctx) } else { LaurentElem::zero(ctx) };
            if !acc.agrees_with(&target) {
                bad.push(n);
            }
        }
        bad
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceData {
    pub support: Vec<usize>,
    /// `(deg A_i - q^i)/(q^i - 1)`, `None` when `A_i = 0`.
    pub ratios: Vec<Option<Deg>>,
    pub s: usize,
    pub strict: bool,
    /// `log_q R_φ = (q^s - deg A_s)/(q^s - 1)`.
    pub logq_r: Deg,
}

impl ConvergenceData {
    /// `μ_{ik}`.
    pub fn mu(&self, i: usize, k: usize) -> Option<Deg> {
        Some(self.ratios[k - 1]? - self.ratios[i - 1]?)
    }

    /// `(deg A_s - q^s)/(q^s - 1)`, the per-step norm slope of `𝓑_n`.
    pub fn slope(&self) -> Deg {
        -self.logq_r
    }
}

/// Upper bounds `deg α_n <= q^n b_n` from the recurrence, with `b_n` rounded up
/// to a fixed grid, and a tail bound for `Σ_{n>N} α_n z^{q^n}`.
#[derive(Clone, Debug)]
pub struct AlphaBounds {
    q: i64,
    r: usize,
    b: Vec<Deg>,
    horizon: usize,
}

impl AlphaBounds {
    fn new(phi: &DrinfeldModule, n_max: usize) -> Self {
        let q = phi.ctx.q() as i64;
        let den = 1024 * phi.ctx.m() as i64;
        let degs: Vec<Option<Deg>> = (1..=phi.rank()).map(|i| phi.deg_coeff(i)).collect();
        let maxdeg = degs.iter().flatten().copied().max().unwrap().max(Deg::from_integer(0));
        let mut horizon = 0usize;
        while maxdeg * 2 > Deg::from_integer(q.pow(horizon as u32)) {
            horizon += 1;
        }
        let mut b = vec![Deg::from_integer(0)];
        for n in 1..=n_max {
            let mut best: Option<Deg> = None;
            for i in 1..=n.min(phi.rank()) {
                if let Some(d) = degs[i - 1] {
                    let scaled = ceil_grid(d / scale_pow(q, n), den);
                    let v = scaled + b[n - i];
                    best = Some(best.map_or(v, |x| x.max(v)));
                }
            }
            b.push(best.map_or(Deg::from_integer(-(1 << 30)), |x| x - 1));
        }
        AlphaBounds { q, r: phi.rank(), b, horizon }
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// `deg α_n <= q^n * normalized(n)`.
    pub fn normalized(&self, n: usize) -> Deg {
        self.b[n]
    }

    /// Bound on `sup_{n > N} deg(α_n z^{q^n})` for `deg z = d`.
    pub fn tail(&self, n: usize, d: Deg) -> Result<Deg> {
        if n < self.horizon || n + 1 > self.b.len() || n == 0 {
            return Err(Error::TailNotNegligible(format!("need N >= {} for the exp tail bound", self.horizon.max(1))));
        }
        let lo = (n + 1).saturating_sub(self.r);
        let m = self.b[lo..=n].iter().copied().max().unwrap();
        let x = m - Deg::new(1, 2) + d;
        if x >= Deg::from_integer(0) {
            return Err(Error::TailNotNegligible(format!("exp tail does not decay at N = {n}")));
        }
        Ok(scale_neg(x, self.q, n as u32 + 1))
    }

    /// Like [`tail`](Self::tail) for the `t^k` coefficient of `Σ α_n u^{q^n}/(θ^{q^n} - t)`:
    /// `sup_{n>N} q^n (b_n + deg u - (k+1))`.
    pub fn agf_tail(&self, n: usize, du: Deg, k: usize) -> Result<Deg> {
        self.tail(n, du - Deg::from_integer(k as i64 + 1))
    }
}

fn scale_pow(q: i64, n: usize) -> Deg {
    Deg::from_integer(q.checked_pow(n as u32).unwrap_or(i64::MAX / 4))
}

/// `q^e x` for negative `x`, saturating toward zero (still an upper bound).
fn scale_neg(x: Deg, q: i64, e: u32) -> Deg {
    let p = (q as i128).checked_pow(e).unwrap_or(i128::MAX / 4);
    let num = (*x.numer() as i128).saturating_mul(p);
    let floor = -(1i128 << 50);
    Deg::new(num.max(floor * *x.denom() as i128) as i64, *x.denom())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::Field;
    use crate::laurent::SeriesCtx;

    fn ctx(q: u32, m: u32, prec: i64) -> Ctx {
        SeriesCtx::new(Field::standard(q, 1).unwrap(), m, prec).unwrap()
    }

    #[test]
    fn carlitz_action() {
        let c = ctx(2, 1, 40);
        let phi = DrinfeldModule::carlitz(&c);
        let th = LaurentElem::theta(&c);
        let v = phi.phi_action(&[0, 1], &th);
        let expect = &LaurentElem::theta_pow(&c, 2) + &LaurentElem::theta_pow(&c, 2);
        // θ·θ + θ^2 = 0 in characteristic 2
        assert_eq!(v, expect);
        let c3 = ctx(3, 1, 40);
        let phi = DrinfeldModule::carlitz(&c3);
        let th = LaurentElem::theta(&c3);
        assert_eq!(phi.phi_action(&[0, 1], &th), &LaurentElem::theta_pow(&c3, 2) + &LaurentElem::theta_pow(&c3, 3));
        assert_eq!(phi.phi_action(&[1], &th), th);
        assert_eq!(phi.phi_action(&[0, 0, 1], &th), phi.phi_t(&phi.phi_t(&th)));
    }

    #[test]
    fn carlitz_coefficients() {
        // α_n = 1/D_n with D_n = [n] D_{n-1}^q, β_n = 1/L_n with L_n = -[n] L_{n-1}
        for q in [2, 3] {
            let c = ctx(q, 1, 60);
            let phi = DrinfeldModule::carlitz(&c);
            let t = phi.exp_log_coeffs(5).unwrap();
            let mut d = LaurentElem::one(&c);
            let mut l = LaurentElem::one(&c);
            for n in 0..=5 {
                if n > 0 {
                    d = &bracket(&c, n) * &d.pow_q(1);
                    l = &(-bracket(&c, n)) * &l;
                }
                assert!((&t.alpha[n as usize] * &d).agrees_with(&LaurentElem::one(&c)));
                assert!((&t.beta[n as usize] * &l).agrees_with(&LaurentElem::one(&c)));
            }
            assert!(t.compose_failures().is_empty());
            assert!(phi.functional_equation_failures(&t.alpha).is_empty());
        }
    }

    #[test]
    fn convergence() {
        let c = ctx(2, 3, 40);
        let phi = DrinfeldModule::carlitz(&c);
        let cd = phi.convergence_data().unwrap();
        assert_eq!(cd.s, 1);
        assert_eq!(cd.logq_r, Deg::from_integer(2));
        assert_eq!(cd.mu(1, 1), Some(Deg::from_integer(0)));
        let phi = DrinfeldModule::from_polys(&c, &[vec![1], vec![1]]).unwrap();
        let cd = phi.convergence_data().unwrap();
        assert_eq!(cd.ratios, vec![Some(Deg::from_integer(-2)), Some(Deg::new(-4, 3))]);
        assert_eq!(cd.s, 2);
        assert!(cd.strict);
        assert_eq!(cd.logq_r, Deg::new(4, 3));
        assert!(DrinfeldModule::from_polys(&c, &[vec![1], vec![]]).is_err());
        assert!(DrinfeldModule::from_polys(&c, &[vec![2]]).is_err());
    }

    #[test]
    fn rank_two_routes_agree() {
        let c = ctx(2, 1, 80);
        let phi = DrinfeldModule::from_polys(&c, &[vec![1, 1], vec![0, 1]]).unwrap();
        let t = phi.exp_log_coeffs(5).unwrap();
        assert!(t.compose_failures().is_empty());
        assert!(phi.functional_equation_failures(&t.alpha).is_empty());
        // exp ∘ log = id gives the mirror identity Σ α_k β_{n-k}^{q^k} = [n = 0]
        for n in 1..=5usize {
            let mut acc = LaurentElem::zero(&c);
            for k in 0..=n {
                acc = &acc + &(&t.alpha[k] * &t.beta[n - k].pow_q(k as u32));
            }
            assert!(acc.is_zero_to_precision());
        }
    }

    #[test]
    fn alpha_bounds_are_sound() {
        let c = ctx(2, 1, 60);
        let phi = DrinfeldModule::from_polys(&c, &[vec![1, 1], vec![0, 0, 1]]).unwrap();
        let al = phi.alpha_recurrence(8).unwrap();
        let b = phi.alpha_bounds(8);
        for (n, a) in al.iter().enumerate() {
            let bound = b.normalized(n) * 2i64.pow(n as u32);
            assert!(a.deg().unwrap() <= bound, "n={n}");
        }
        let z = LaurentElem::theta_pow(&c, -1);
        let e = phi.exp_eval(&z, 40).unwrap();
        assert!(e.cap() >= z.val() + 40);
    }

    use proptest::prelude::*;

    fn module_spec() -> impl Strategy<Value = (u32, Vec<Vec<u32>>)> {
        prop_oneof![Just(2u32), Just(3u32)].prop_flat_map(|q| {
            let poly = proptest::collection::vec(0..q, 0..3);
            (Just(q), proptest::collection::vec(poly, 1..4), 1..q, 0usize..3).prop_map(|(q, mut a, lead, d)| {
                let mut top = vec![0; d];
                top.push(lead);
                a.push(top);
                (q, a)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn closed_forms_never_contradict_recurrences((q, a) in module_spec()) {
            let c = ctx(q, 1, 160);
            let phi = DrinfeldModule::from_polys(&c, &a).unwrap();
            let rec = phi.alpha_recurrence(4).unwrap();
            let inv = DrinfeldModule::beta_inversion(&rec);
            for n in 0..=4 {
                prop_assert!(!(&phi.alpha_closed(n).unwrap() - &rec[n]).is_nonzero(), "alpha_{}", n);
                prop_assert!(!(&phi.beta_closed(n).unwrap() - &inv[n]).is_nonzero(), "beta_{}", n);
            }
            prop_assert!(phi.functional_equation_failures(&rec).is_empty());
        }
    }
}
