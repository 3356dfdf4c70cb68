//! Identity checks "equal to precision".
//!
//! Each side is a sum of terms. Per `t`-coefficient, the reference valuation is
//! the smallest valuation among all terms (or the cap of a term that is zero to
//! precision), and the achieved relative precision is the residual's cap minus
//! that reference. A check passes when every residual is zero to precision and
//! the achieved precision is at least the target.

use serde::{Deserialize, Serialize};

use crate::laurent::LaurentElem;
use crate::tate::TateSeries;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiPrecision {
    /// Number of `t`-coefficients compared (0 for scalar identities).
    pub t: usize,
    /// Minimum achieved relative `u`-precision, `None` when every coefficient
    /// is exactly zero on both sides.
    pub u: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub bi_precision: BiPrecision,
    pub u_target: i64,
    /// Relative valuation of the first residual known to be nonzero.
    pub residual_valuation: Option<i64>,
    pub passed: bool,
}

fn reference(terms: &[&LaurentElem]) -> Option<i64> {
    terms
        .iter()
        .filter(|x| !x.is_exact_zero())
        .map(|x| x.val())
        .min()
}

impl IdentityCheck {
    fn from_coeffs(identity: &str, t: usize, u_target: i64, coeffs: Vec<(LaurentElem, Option<i64>)>) -> Self {
        let mut achieved: Option<i64> = None;
        let mut residual_valuation = None;
        let mut ok = true;
        for (res, refv) in coeffs {
            if res.is_exact_zero() {
                continue;
            }
            let r = refv.unwrap_or(res.val());
            if res.is_nonzero() {
                ok = false;
                residual_valuation.get_or_insert(res.val() - r);
                continue;
            }
            let a = res.cap() - r;
            achieved = Some(achieved.map_or(a, |x| x.min(a)));
        }
        let passed = ok && achieved.is_none_or(|a| a >= u_target);
        IdentityCheck {
            identity: identity.to_string(),
            bi_precision: BiPrecision { t, u: achieved },
            u_target,
            residual_valuation,
            passed,
        }
    }

    /// `Σ lhs == Σ rhs` for scalars.
    pub fn scalar(identity: &str, lhs: &[&LaurentElem], rhs: &[&LaurentElem], u_target: i64) -> Self {
        let ctx = lhs.iter().chain(rhs).next().expect("empty identity").ctx().clone();
        let mut res = LaurentElem::zero(&ctx);
        for x in lhs {
            res = &res + *x;
        }
        for x in rhs {
            res = &res - *x;
        }
        let all: Vec<&LaurentElem> = lhs.iter().chain(rhs).copied().collect();
        Self::from_coeffs(identity, 0, u_target, vec![(res, reference(&all))])
    }

    /// `Σ lhs == Σ rhs` coefficientwise in `t`, over the shortest `t_prec`.
    pub fn series(identity: &str, lhs: &[&TateSeries], rhs: &[&TateSeries], u_target: i64) -> Self {
        let t = lhs.iter().chain(rhs).map(|s| s.t_prec()).min().expect("empty identity");
        let ctx = lhs.iter().chain(rhs).next().unwrap().ctx().clone();
        let mut coeffs = Vec::with_capacity(t);
        for k in 0..t {
            let mut res = LaurentElem::zero(&ctx);
            for s in lhs {
                res = &res + s.coeff(k);
            }
            for s in rhs {
                res = &res - s.coeff(k);
            }
            let all: Vec<&LaurentElem> = lhs.iter().chain(rhs).map(|s| s.coeff(k)).collect();
            coeffs.push((res, reference(&all)));
        }
        Self::from_coeffs(identity, t, u_target, coeffs)
    }

    /// Coefficient lists compared entrywise (cleared numerators and the like).
    pub fn lists(identity: &str, lhs: &[LaurentElem], rhs: &[LaurentElem], u_target: i64) -> Self {
        let n = lhs.len().max(rhs.len());
        let ctx = lhs.iter().chain(rhs).next().map(|x| x.ctx().clone());
        let Some(ctx) = ctx else {
            return Self::from_coeffs(identity, 0, u_target, Vec::new());
        };
        let z = LaurentElem::zero(&ctx);
        let coeffs = (0..n)
            .map(|k| {
                let (a, b) = (lhs.get(k).unwrap_or(&z), rhs.get(k).unwrap_or(&z));
                (a - b, reference(&[a, b]))
            })
            .collect();
        Self::from_coeffs(identity, n, u_target, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::{Field, ResidueElem};
    use crate::laurent::SeriesCtx;

    #[test]
    fn precision_accounting() {
        let c = SeriesCtx::new(Field::standard(2, 1).unwrap(), 1, 30).unwrap();
        let x = (&LaurentElem::theta(&c) + &LaurentElem::one(&c)).inv().unwrap();
        let y = LaurentElem::from_coeffs(&c, 1, x.coeffs().to_vec(), Some(20));
        let ok = IdentityCheck::scalar("x = y", &[&x], &[&y], 19);
        assert!(ok.passed, "{ok:?}");
        assert_eq!(ok.bi_precision.u, Some(19));
        assert!(!IdentityCheck::scalar("x = y", &[&x], &[&y], 20).passed);
        let z = &y + &LaurentElem::u_pow(&c, 5).scale(ResidueElem::ONE);
        let bad = IdentityCheck::scalar("x = z", &[&x], &[&z], 1);
        assert!(!bad.passed);
        assert_eq!(bad.residual_valuation, Some(4));
        let e = LaurentElem::zero(&c);
        let triv = IdentityCheck::scalar("0 = 0", &[&e], &[&e], 100);
        assert!(triv.passed);
        assert_eq!(triv.bi_precision.u, None);
    }
}
