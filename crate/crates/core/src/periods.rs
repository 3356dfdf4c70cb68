//! `t`-torsion, periods and quasi-periods.
//!
//! Torsion points are roots of `P(x) = φ_t(x)/x = Σ A_i x^{q^i - 1}` (`A_0 = θ`).
//! Root valuations come from the Newton polygon, leading coefficients from the
//! residual equation of each segment, and refinement uses additivity:
//! `φ_t(x) = φ_t(x - ζ)`, so `x ← x - φ_t(x)/θ` converges once `|x - ζ|` is
//! below the smallest nonzero root.

use serde::{Deserialize, Serialize};

use crate::agf::{omega_carlitz, BTable, DeformedLog};
use crate::check::IdentityCheck;
use crate::drinfeld::{bracket, DrinfeldModule};
use crate::error::{Error, Result};
use crate::ff::ResidueElem;
use crate::laurent::{cap_from_deg_bound, with_prec, Ctx, Deg, LaurentElem, LaurentJson};
use crate::tate::{q_pow, theta_q_pow, TateSeries};

const NEWTON_STEPS: usize = 400;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slope {
    /// In `u`-steps per unit exponent.
    pub slope: Deg,
    pub length: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonPolygon {
    /// `(exponent, valuation)` of every nonzero term.
    pub points: Vec<(i64, i64)>,
    pub vertices: Vec<(i64, i64)>,
    pub slopes: Vec<Slope>,
}

impl NewtonPolygon {
    /// Lower convex hull; `points` must have distinct exponents.
    pub fn new(mut points: Vec<(i64, i64)>) -> Self {
        points.sort();
        let mut hull: Vec<(i64, i64)> = Vec::new();
        for &p in &points {
            while hull.len() >= 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                let cross = (b.0 - a.0) as i128 * (p.1 - a.1) as i128 - (b.1 - a.1) as i128 * (p.0 - a.0) as i128;
                if cross <= 0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        let slopes = hull
            .windows(2)
            .map(|w| Slope { slope: Deg::new(w[1].1 - w[0].1, w[1].0 - w[0].0), length: w[1].0 - w[0].0 })
            .collect();
        NewtonPolygon { points, vertices: hull, slopes }
    }

    /// Polygon of `φ_t(x)/x` in `u`-valuations.
    pub fn of_torsion(phi: &DrinfeldModule) -> Self {
        let q = phi.ctx().q() as i64;
        let pts = (0..=phi.rank())
            .filter_map(|i| {
                let a = phi.coeff(i);
                (!a.is_exact_zero()).then(|| (q.pow(i as u32) - 1, a.val()))
            })
            .collect();
        Self::new(pts)
    }

    /// Points lying on segment `k`.
    fn on_segment(&self, k: usize) -> Vec<(i64, i64)> {
        let (a, b) = (self.vertices[k], self.vertices[k + 1]);
        self.points
            .iter()
            .copied()
            .filter(|p| p.0 >= a.0 && p.0 <= b.0 && (b.0 - a.0) as i128 * (p.1 - a.1) as i128 == (b.1 - a.1) as i128 * (p.0 - a.0) as i128)
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct TorsionBasis {
    pub zetas: Vec<LaurentElem>,
    pub in_radius: Vec<bool>,
}

impl TorsionBasis {
    /// All `F_q`-combinations `Σ c_i ζ_i`, the zero vector first.
    pub fn span(&self) -> Vec<LaurentElem> {
        let Some(z0) = self.zetas.first() else {
            return Vec::new();
        };
        span_of(z0.ctx(), &self.zetas)
    }
}

fn base_scalars(ctx: &Ctx) -> Vec<ResidueElem> {
    let f = ctx.field();
    (0..f.q()).map(|c| f.from_base(c).unwrap()).collect()
}

fn span_of(ctx: &Ctx, basis: &[LaurentElem]) -> Vec<LaurentElem> {
    let mut out = vec![LaurentElem::zero(ctx)];
    for z in basis {
        let mut next = Vec::with_capacity(out.len() * ctx.q() as usize);
        for c in base_scalars(ctx) {
            for s in &out {
                next.push(s + &z.scale(c));
            }
        }
        out = next;
    }
    out
}

fn same(a: &LaurentElem, b: &LaurentElem) -> bool {
    (a - b).is_zero_to_precision()
}

/// Nonzero roots of `Σ_{(e, _) on segment} lc_e c^{e - e_0}` in the residue field.
fn residual_roots(phi: &DrinfeldModule, seg: &[(i64, i64)]) -> Vec<ResidueElem> {
    let ctx = phi.ctx();
    let f = ctx.field();
    let q = ctx.q() as i64;
    let e0 = seg[0].0;
    let terms: Vec<(u64, ResidueElem)> = seg
        .iter()
        .map(|&(e, _)| {
            let i = (0..=phi.rank()).find(|&i| q.pow(i as u32) - 1 == e).unwrap();
            ((e - e0) as u64, phi.coeff(i).leading_coeff().unwrap())
        })
        .collect();
    f.elements()
        .filter(|c| !c.is_zero())
        .filter(|&c| terms.iter().fold(f.zero(), |acc, &(e, lc)| f.add(acc, f.mul(lc, f.pow(c, e)))).is_zero())
        .collect()
}

/// `x ← x - φ_t(x)/θ` until the residual is zero to precision.
pub fn refine_root(phi: &DrinfeldModule, x0: &LaurentElem) -> Result<LaurentElem> {
    let ctx = phi.ctx();
    let mut x = x0.truncate(x0.val() + ctx.prec());
    for _ in 0..NEWTON_STEPS {
        let r = phi.phi_t(&x);
        if r.is_zero_to_precision() {
            return Ok(x);
        }
        x = &x - &r.mul_theta_pow(-1);
    }
    Err(Error::NoConvergence("torsion refinement did not reach the working cap".into()))
}

/// All nonzero roots of `φ_t`, segment by segment.
pub fn torsion_points(phi: &DrinfeldModule) -> Result<Vec<LaurentElem>> {
    let ctx = phi.ctx();
    let m = ctx.m();
    let q = ctx.q() as i64;
    let np = NewtonPolygon::of_torsion(phi);
    let mut roots = Vec::new();
    for (k, sl) in np.slopes.iter().enumerate() {
        let lambda = -sl.slope;
        if !lambda.is_integer() {
            return Err(Error::Ramification { required_m: m * *lambda.denom() as u32 });
        }
        let seg = np.on_segment(k);
        // e_0 = q^{i_0} - 1; each residual root has multiplicity q^{i_0}
        let mult = seg[0].0 + 1;
        let needed = (sl.length / mult) as usize;
        let cs = residual_roots(phi, &seg);
        if cs.len() < needed {
            return Err(Error::ResidueSplitting { found: cs.len(), needed });
        }
        if mult > 1 {
            return Err(Error::NoConvergence(format!(
                "residual roots of the slope {} segment are {mult}-fold; refinement needs simple residues",
                sl.slope
            )));
        }
        for c in cs {
            let x0 = LaurentElem::u_pow(ctx, lambda.to_integer()).scale(c);
            roots.push(refine_root(phi, &x0)?);
        }
    }
    debug_assert!(roots.len() as i64 <= q.pow(phi.rank() as u32));
    Ok(roots)
}

/// A greedy `F_q`-basis of the `t`-torsion.
pub fn torsion_roots(phi: &DrinfeldModule) -> Result<TorsionBasis> {
    let ctx = phi.ctx();
    let roots = torsion_points(phi)?;
    let mut basis: Vec<LaurentElem> = Vec::new();
    let mut span = vec![LaurentElem::zero(ctx)];
    for z in roots {
        if span.iter().any(|s| same(s, &z)) {
            continue;
        }
        basis.push(z);
        span = span_of(ctx, &basis);
    }
    if basis.len() != phi.rank() {
        return Err(Error::NoConvergence(format!("found a torsion space of dimension {} < {}", basis.len(), phi.rank())));
    }
    let cd = phi.convergence_data()?;
    let in_radius = basis.iter().map(|z| z.deg().is_some_and(|d| d < cd.logq_r)).collect();
    Ok(TorsionBasis { zetas: basis, in_radius })
}

/// `ω = θ^ℓ 𝓛_φ(ζ;θ)` and, when `ℓ >= 1`, the check `exp_φ(ω/θ^ℓ) = ζ`.
pub fn period_from_torsion(table: &mut BTable, zeta: &LaurentElem, ell: u32, u_target: i64) -> Result<(LaurentElem, Option<IdentityCheck>)> {
    let phi = table.phi().clone();
    let ctx = phi.ctx().clone();
    let l = DeformedLog::new(table, zeta)?;
    let omega = l.at(&LaurentElem::theta(&ctx))?.mul_theta_pow(ell as i64);
    if ell == 0 || zeta.is_exact_zero() {
        return Ok((omega, None));
    }
    let back = phi.exp_eval(&omega.mul_theta_pow(-(ell as i64)), ctx.prec())?;
    let chk = IdentityCheck::scalar("exp(omega/theta^l) = zeta", &[&back], &[zeta], u_target);
    Ok((omega, Some(chk)))
}

/// `η_j = θ^ℓ/(θ^{q^j} - θ) · 𝓛^{(j)}(ζ;θ) + Σ_{m<ℓ} exp_φ(ω/θ^{m+1})^{q^j} θ^m`, `j = 1..r-1`.
pub fn quasi_periods(table: &mut BTable, zeta: &LaurentElem, omega: &LaurentElem, ell: u32) -> Result<Vec<LaurentElem>> {
    let phi = table.phi().clone();
    let ctx = phi.ctx().clone();
    let theta = LaurentElem::theta(&ctx);
    let l = DeformedLog::new(table, zeta)?;
    let mut corr = Vec::new();
    for m in 0..ell {
        corr.push(phi.exp_eval(&omega.mul_theta_pow(-(m as i64 + 1)), ctx.prec())?);
    }
    let mut out = Vec::new();
    for j in 1..phi.rank() as u32 {
        let v = l.twisted_at(j, &theta)?.mul_theta_pow(ell as i64).div(&bracket(&ctx, j))?;
        let mut acc = v;
        for (m, e) in corr.iter().enumerate() {
            acc = &acc + &e.pow_q(j).mul_theta_pow(m as i64);
        }
        out.push(acc);
    }
    Ok(out)
}

/// Bound on `deg exp_φ(z)` for `deg z = d`.
pub fn exp_deg_bound(phi: &DrinfeldModule, d: Deg) -> Result<Deg> {
    let n = 16;
    let b = phi.alpha_bounds(n);
    let mut best = d.max(b.tail(n, d)?);
    for k in 1..=n {
        best = best.max((b.normalized(k) + d) * q_pow(phi.ctx(), k as u32));
    }
    Ok(best)
}

/// `Σ_{m<M} exp_φ(ω/θ^{m+1})^{q^j} θ^m` and a bound on `deg` of the rest.
pub fn quasi_period_direct(phi: &DrinfeldModule, omega: &LaurentElem, j: u32, big_m: usize) -> Result<(LaurentElem, Deg)> {
    let ctx = phi.ctx();
    let dw = omega.deg().ok_or_else(|| Error::PrecisionExhausted("ω is zero to precision".into()))?;
    let mut acc = LaurentElem::zero(ctx);
    for m in 0..big_m {
        let e = phi.exp_eval(&omega.mul_theta_pow(-(m as i64 + 1)), ctx.prec())?;
        acc = &acc + &e.pow_q(j).mul_theta_pow(m as i64);
    }
    // later terms shrink by at least q^j - 1 >= 1 per step, so the first one bounds the rest
    let tail = exp_deg_bound(phi, dw - (big_m as i64 + 1))? * q_pow(ctx, j) + big_m as i64;
    Ok((acc, tail))
}

/// Compares `η` with the direct partial sum to the certified tail.
pub fn check_quasi_period_direct(phi: &DrinfeldModule, omega: &LaurentElem, eta: &LaurentElem, j: u32, big_m: usize) -> Result<IdentityCheck> {
    let (partial, tail) = quasi_period_direct(phi, omega, j, big_m)?;
    let cap = cap_from_deg_bound(phi.ctx().m(), tail);
    let (a, b) = (eta.truncate(cap), partial.truncate(cap));
    let target = cap - a.val().min(b.val());
    Ok(IdentityCheck::scalar("eta (shift formula) = direct partial sum", &[&a], &[&b], target))
}

/// Coefficients `b_{j,n}` (`n = 0..=n_max`) of `F_{φ,j}` from
/// `F(θz) - θF(z) = exp_φ(z)^{q^j}`: `b_{j,n} = α_{n-j}^{q^j} / [n]`.
pub fn quasi_periodic_coeffs(phi: &DrinfeldModule, j: u32, n_max: usize) -> Result<Vec<LaurentElem>> {
    let ctx = phi.ctx();
    let alpha = phi.alpha_recurrence(n_max)?;
    (0..=n_max)
        .map(|n| {
            if n == 0 || n < j as usize {
                Ok(LaurentElem::zero(ctx))
            } else {
                alpha[n - j as usize].pow_q(j).div(&bracket(ctx, n as u32))
            }
        })
        .collect()
}

/// `π̃ = θ (-θ)^{1/(q-1)} ∏_{i>=1} (1 - θ^{1-q^i})^{-1}` to the working precision.
pub fn carlitz_period(ctx: &Ctx) -> Result<LaurentElem> {
    let theta = LaurentElem::theta(ctx);
    let rho = (-theta.clone()).root_q_minus_1()?;
    let mut acc = &theta * &rho;
    let one = LaurentElem::one(ctx);
    let m = ctx.m() as i64;
    let mut i = 1;
    while m * (q_pow(ctx, i) - 1) <= ctx.prec() {
        let f = &one - &LaurentElem::theta_pow(ctx, 1 - q_pow(ctx, i));
        acc = acc.div(&f)?;
        i += 1;
    }
    Ok(acc.truncate_rel(ctx.prec()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeriodReport {
    pub ell: u32,
    pub zetas: Vec<LaurentJson>,
    pub omegas: Vec<LaurentJson>,
    /// `etas[i][j-1] = F_{φ,j}(ω_i)`.
    pub etas: Vec<Vec<LaurentJson>>,
    pub checks: Vec<IdentityCheck>,
}

impl PeriodReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Torsion basis, periods and quasi-periods at working precision `2 u_target`,
/// with the torsion roots, the `exp` round trip and the direct quasi-period
/// series (`big_m` terms) all checked.
pub fn period_report(phi: &DrinfeldModule, u_target: i64, big_m: usize) -> Result<PeriodReport> {
    let wctx = with_prec(phi.ctx(), 2 * u_target)?;
    let phi = phi.rehome(&wctx);
    let basis = torsion_roots(&phi)?;
    if let Some(i) = basis.in_radius.iter().position(|&b| !b) {
        let cd = phi.convergence_data()?;
        return Err(Error::OutsideRadius {
            deg: basis.zetas[i].deg().map_or("?".into(), |d| d.to_string()),
            radius: cd.logq_r.to_string(),
        });
    }
    let mut checks = Vec::new();
    let zero = LaurentElem::zero(&wctx);
    for (k, z) in basis.span().iter().enumerate().skip(1) {
        let terms: Vec<LaurentElem> = (0..=phi.rank()).map(|i| &phi.coeff(i) * &z.pow_q(i as u32)).collect();
        let refs: Vec<&LaurentElem> = terms.iter().collect();
        checks.push(IdentityCheck::scalar(&format!("phi_t(zeta combination {k}) = 0"), &refs, &[&zero], u_target));
    }
    let mut table = BTable::new(&phi, 1);
    let (mut omegas, mut etas) = (Vec::new(), Vec::new());
    for z in &basis.zetas {
        let (w, chk) = period_from_torsion(&mut table, z, 1, u_target)?;
        checks.extend(chk);
        let es = quasi_periods(&mut table, z, &w, 1)?;
        for (j, e) in es.iter().enumerate() {
            checks.push(check_quasi_period_direct(&phi, &w, e, j as u32 + 1, big_m)?);
        }
        omegas.push(w.truncate_rel(u_target).to_json());
        etas.push(es.iter().map(|e| e.truncate_rel(u_target).to_json()).collect());
    }
    Ok(PeriodReport {
        ell: 1,
        zetas: basis.zetas.iter().map(|z| z.truncate_rel(u_target).to_json()).collect(),
        omegas,
        etas,
        checks,
    })
}

/// `deg j(φ) = (q+1) deg A - deg B`; `None` when `A = 0`.
pub fn j_invariant_degree(phi: &DrinfeldModule) -> Result<Option<Deg>> {
    if phi.rank() != 2 {
        return Err(Error::InvalidInput(format!("the Legendre check needs rank 2, got {}", phi.rank())));
    }
    let q = phi.ctx().q() as i64;
    Ok(phi.deg_coeff(1).map(|da| da * (q + 1) - phi.deg_coeff(2).unwrap()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LegendreReport {
    /// `c ∈ F_q^×` with `ω_1η_2 - ω_2η_1 = c π̃ / (-B)^{1/(q-1)}`, `None` if not found.
    pub c: Option<u32>,
    pub legendre_value: LaurentJson,
    pub carlitz_period: LaurentJson,
    pub neg_b_root: LaurentJson,
    pub checks: Vec<IdentityCheck>,
}

impl LegendreReport {
    pub fn passed(&self) -> bool {
        self.c.is_some() && self.checks.iter().all(|c| c.passed)
    }
}

/// Series form of the row `(-t/(t-θ) 𝓛(ζ;t) + ζ, -t/(t-θ^q) 𝓛^{(1)}(ζ;t) + ζ^q)`.
fn period_row(l: &DeformedLog, zeta: &LaurentElem) -> Result<(TateSeries, TateSeries)> {
    let ctx = zeta.ctx();
    let t_prec = l.series.t_prec();
    let a = l.series.mul_t().div_linear(&LaurentElem::theta(ctx))?.neg().add(&TateSeries::constant(zeta, t_prec));
    let b = l
        .series
        .twist(1)
        .mul_t()
        .div_linear(&theta_q_pow(ctx, 1))?
        .neg()
        .add(&TateSeries::constant(&zeta.pow_q(1), t_prec));
    Ok((a, b))
}

/// The rank-2 Legendre relation for `φ_t = θ + Aτ + Bτ^2` under `deg j(φ) < q^2`.
pub fn legendre_check(phi: &DrinfeldModule, u_target: i64, t_prec: usize) -> Result<LegendreReport> {
    let q = phi.ctx().q();
    if let Some(d) = j_invariant_degree(phi)? {
        if d >= Deg::from_integer(q as i64 * q as i64) {
            return Err(Error::GateFailed { deg: d.to_string(), bound: q * q });
        }
    }
    let wctx = with_prec(phi.ctx(), 2 * u_target)?;
    let phi = phi.rehome(&wctx);
    let basis = torsion_roots(&phi)?;
    if let Some(i) = basis.in_radius.iter().position(|&b| !b) {
        return Err(Error::OutsideRadius {
            deg: basis.zetas[i].deg().map_or("?".into(), |d| d.to_string()),
            radius: phi.convergence_data()?.logq_r.to_string(),
        });
    }
    let theta = LaurentElem::theta(&wctx);
    let mut table = BTable::new(&phi, t_prec);
    let mut omegas = Vec::new();
    let mut etas = Vec::new();
    let mut rows = Vec::new();
    for z in &basis.zetas {
        let l = DeformedLog::new(&mut table, z)?;
        omegas.push(l.at(&theta)?.mul_theta_pow(1));
        etas.push(quasi_periods(&mut table, z, omegas.last().unwrap(), 1)?.remove(0));
        rows.push(period_row(&l, z)?);
    }
    let value = &(&omegas[0] * &etas[1]) - &(&omegas[1] * &etas[0]);
    let b = phi.coeff(2);
    let beta = (-b.clone()).root_q_minus_1()?;
    let pi = carlitz_period(&wctx)?;
    let ratio = (&value * &beta).div(&pi)?;
    let f = wctx.field();
    let c = (ratio.val() == 0)
        .then(|| ratio.leading_coeff())
        .flatten()
        .filter(|&c| f.is_in_base(c) && !c.is_zero());
    let mut checks = Vec::new();

    let det = rows[0].0.mul(&rows[1].1).sub(&rows[0].1.mul(&rows[1].0));
    let lhs = det.twist(1).scale(&b);
    let rhs = det.mul_linear(&theta);
    let zero = TateSeries::zero(&wctx, t_prec);
    checks.push(IdentityCheck::series("B det(P)^(1) + (t-theta) det(P) = 0", &[&lhs, &rhs], &[&zero], u_target));

    let c_el = LaurentElem::constant(&wctx, c.unwrap_or(f.one()));
    let expected_value = (&c_el * &pi).div(&beta)?;
    checks.push(IdentityCheck::scalar("w1 e2 - w2 e1 = c pi / (-B)^(1/(q-1))", &[&value], &[&expected_value], u_target));

    let omega_c = omega_carlitz(&wctx, t_prec)?;
    let beta_inv = beta.inv()?;
    let scaled = omega_c.scale(&(&c_el * &beta_inv));
    checks.push(IdentityCheck::series("det(P) = c omega_C / (-B)^(1/(q-1))", &[&det], &[&scaled], u_target));

    Ok(LegendreReport {
        c: c.map(|c| f.coords(c)[0]),
        legendre_value: value.truncate_rel(u_target).to_json(),
        carlitz_period: pi.truncate_rel(u_target).to_json(),
        neg_b_root: beta.truncate_rel(u_target).to_json(),
        checks,
    })
}
