//! Sparse Laurent polynomials over a finite field, in several variables.
//!
//! These are the exact char-p objects backing the mod-pi reductions of the
//! multivariable coefficient ring and the residue-level phi-modules. An
//! element is a finite sum of monomials with integer (possibly negative)
//! exponents. Units of the ambient truncated ring are recognized by having a
//! unique minimal monomial in the product order; their inverses are geometric
//! series and exist only up to a stated total-degree order.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::CoreError;
use crate::fq::{FqCtx, FqElem};

/// Exact sparse Laurent polynomial over `F_q`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LaurentPoly {
    ctx: Arc<FqCtx>,
    nvars: usize,
    terms: BTreeMap<Vec<i64>, FqElem>,
}

impl LaurentPoly {
    pub fn zero(ctx: &Arc<FqCtx>, nvars: usize) -> Self {
        LaurentPoly { ctx: ctx.clone(), nvars, terms: BTreeMap::new() }
    }

    pub fn one(ctx: &Arc<FqCtx>, nvars: usize) -> Self {
        Self::monomial(ctx, vec![0; nvars], ctx.one())
    }

    pub fn var(ctx: &Arc<FqCtx>, nvars: usize, i: usize) -> Self {
        let mut exp = vec![0i64; nvars];
        exp[i] = 1;
        Self::monomial(ctx, exp, ctx.one())
    }

    pub fn monomial(ctx: &Arc<FqCtx>, exp: Vec<i64>, c: FqElem) -> Self {
        let mut s = Self::zero(ctx, exp.len());
        if !c.is_zero() {
            s.terms.insert(exp, c);
        }
        s
    }

    pub fn constant(ctx: &Arc<FqCtx>, nvars: usize, c: FqElem) -> Self {
        Self::monomial(ctx, vec![0; nvars], c)
    }

    pub fn ctx(&self) -> &Arc<FqCtx> {
        &self.ctx
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &FqElem)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.iter().next().is_some_and(|(e, c)| e.iter().all(|&x| x == 0) && c.is_one())
    }

    pub fn coeff(&self, exp: &[i64]) -> FqElem {
        self.terms.get(exp).cloned().unwrap_or_else(|| self.ctx.zero())
    }

    pub fn insert_term(&mut self, exp: Vec<i64>, c: FqElem) {
        assert_eq!(exp.len(), self.nvars);
        if c.is_zero() {
            self.terms.remove(&exp);
        } else {
            self.terms.insert(exp, c);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            let merged = out.coeff(e).add(c);
            out.insert_term(e.clone(), merged);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(&self.ctx, self.nvars);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), c.neg());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(&self.ctx, self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exp: Vec<i64> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let merged = out.coeff(&exp).add(&ca.mul(cb));
                out.insert_term(exp, merged);
            }
        }
        out
    }

    pub fn scale(&self, c: &FqElem) -> Self {
        let mut out = Self::zero(&self.ctx, self.nvars);
        for (e, co) in &self.terms {
            out.insert_term(e.clone(), co.mul(c));
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(&self.ctx, self.nvars);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Total degree of a term.
    fn total(exp: &[i64]) -> i64 {
        exp.iter().sum()
    }

    pub fn min_total_degree(&self) -> Option<i64> {
        self.terms.keys().map(|e| Self::total(e)).min()
    }

    pub fn max_total_degree(&self) -> Option<i64> {
        self.terms.keys().map(|e| Self::total(e)).max()
    }

    /// Drops every term of total degree strictly above `order`.
    pub fn truncate_above(&self, order: i64) -> Self {
        let mut out = Self::zero(&self.ctx, self.nvars);
        for (e, c) in &self.terms {
            if Self::total(e) <= order {
                out.terms.insert(e.clone(), c.clone());
            }
        }
        out
    }

    /// Equality modulo terms of total degree above `order`.
    pub fn eq_mod_degree(&self, other: &Self, order: i64) -> bool {
        self.truncate_above(order) == other.truncate_above(order)
    }

    /// The unique minimal monomial in the coordinatewise order, if one
    /// exists. Units of the ambient ring are exactly the elements with one.
    pub fn min_monomial(&self) -> Option<(&Vec<i64>, &FqElem)> {
        let mut candidates = self.terms.iter();
        let mut min = candidates.next()?;
        for t in candidates {
            if t.0.iter().zip(min.0).all(|(a, b)| a <= b) {
                min = t;
            }
        }
        // min must now be <= every term coordinatewise.
        for t in &self.terms {
            if !min.0.iter().zip(t.0).all(|(a, b)| a <= b) {
                return None;
            }
        }
        Some(min)
    }

    /// Exact inverse, available only for single monomials.
    pub fn inv_exact(&self) -> Result<Self, CoreError> {
        if self.terms.len() != 1 {
            return Err(CoreError::NotAUnit);
        }
        let (e, c) = self.terms.iter().next().unwrap();
        let exp: Vec<i64> = e.iter().map(|&x| -x).collect();
        Ok(Self::monomial(&self.ctx, exp, c.inv()?))
    }

    /// Inverse of a unit, correct modulo terms of total degree above `order`.
    ///
    /// Writes `x = c X^d (1 + n)` with `n` of positive total degree and sums
    /// the geometric series.
    pub fn inv_truncated(&self, order: i64) -> Result<Self, CoreError> {
        let (min_exp, min_c) = self.min_monomial().ok_or(CoreError::NotAUnit)?;
        let min_exp = min_exp.clone();
        let lead = Self::monomial(&self.ctx, min_exp.clone(), min_c.clone());
        let lead_inv = lead.inv_exact()?;
        let n = self.mul(&lead_inv).sub(&Self::one(&self.ctx, self.nvars));
        if n.is_zero() {
            return Ok(lead_inv);
        }
        let min_gain = n.min_total_degree().unwrap();
        if min_gain <= 0 {
            return Err(CoreError::NotAUnit);
        }
        // (1+n)^-1 = sum (-n)^k, truncated once the relevant degrees pass
        // order relative to the leading shift.
        let shift = Self::total(&min_exp);
        let rel_order = order + shift.max(0) + min_gain; // safe overshoot
        let minus_n = n.neg();
        let mut acc = Self::one(&self.ctx, self.nvars);
        let mut term = Self::one(&self.ctx, self.nvars);
        let mut k = 0i64;
        while k * min_gain <= rel_order {
            term = term.mul(&minus_n).truncate_above(rel_order);
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
            k += 1;
        }
        Ok(acc.mul(&lead_inv).truncate_above(order))
    }

    /// Ring endomorphism substituting `X_i -> X_i^{powers[i]}`.
    pub fn scale_exponents(&self, powers: &[i64]) -> Self {
        assert_eq!(powers.len(), self.nvars);
        let mut out = Self::zero(&self.ctx, self.nvars);
        for (e, c) in &self.terms {
            let exp: Vec<i64> = e.iter().zip(powers).map(|(a, p)| a * p).collect();
            let merged = out.coeff(&exp).add(c);
            out.insert_term(exp, merged);
        }
        out
    }

    /// Applies the `p^t`-power Frobenius to every coefficient.
    pub fn frobenius_coeffs(&self, t: u32) -> Self {
        let mut out = Self::zero(&self.ctx, self.nvars);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), c.frobenius(t));
        }
        out
    }

    /// Substitutes general images for each variable; negative exponents use
    /// truncated inverses at the given order.
    pub fn substitute(&self, images: &[LaurentPoly], order: i64) -> Result<Self, CoreError> {
        assert_eq!(images.len(), self.nvars);
        let nv = images.first().map_or(self.nvars, |s| s.nvars);
        let mut inv_cache: Vec<Option<LaurentPoly>> = vec![None; images.len()];
        let mut out = Self::zero(&self.ctx, nv);
        for (e, c) in &self.terms {
            let mut term = Self::constant(&self.ctx, nv, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let base = if k > 0 {
                    images[i].clone()
                } else {
                    if inv_cache[i].is_none() {
                        inv_cache[i] = Some(images[i].inv_truncated(order)?);
                    }
                    inv_cache[i].clone().unwrap()
                };
                for _ in 0..k.unsigned_abs() {
                    term = term.mul(&base).truncate_above(order);
                }
            }
            out = out.add(&term);
        }
        Ok(out.truncate_above(order))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Arc<FqCtx> {
        FqCtx::new(2, 1).unwrap()
    }

    #[test]
    fn frobenius_in_char_2() {
        let ctx = f2();
        let x = LaurentPoly::var(&ctx, 2, 0);
        let y = LaurentPoly::var(&ctx, 2, 1);
        let s = x.add(&y);
        let sq = s.mul(&s);
        // (x+y)^2 = x^2 + y^2
        assert_eq!(sq, x.pow(2).add(&y.pow(2)));
    }

    #[test]
    fn min_monomial_detects_units() {
        let ctx = f2();
        let x = LaurentPoly::var(&ctx, 2, 0);
        let y = LaurentPoly::var(&ctx, 2, 1);
        let one = LaurentPoly::one(&ctx, 2);
        // 1 + xy has minimal monomial 1 -> unit
        assert!(one.add(&x.mul(&y)).min_monomial().is_some());
        // x + y has no minimal monomial -> not a unit
        assert!(x.add(&y).min_monomial().is_none());
    }

    #[test]
    fn truncated_inverse_of_unit() {
        let ctx = f2();
        let x = LaurentPoly::var(&ctx, 1, 0);
        // u = x(1 + x): inverse = x^-1 (1 + x + x^2 + ...) truncated
        let u = x.mul(&x.add(&LaurentPoly::one(&ctx, 1)));
        let inv = u.inv_truncated(6).unwrap();
        let check = u.mul(&inv);
        assert!(check.eq_mod_degree(&LaurentPoly::one(&ctx, 1), 6));
    }

    #[test]
    fn exact_inverse_of_monomial() {
        let ctx = FqCtx::new(3, 1).unwrap();
        let x = LaurentPoly::monomial(&ctx, vec![2, -1], ctx.from_u64(2));
        let inv = x.inv_exact().unwrap();
        assert!(x.mul(&inv).is_one());
    }

    #[test]
    fn substitute_squares_variables() {
        let ctx = f2();
        let x = LaurentPoly::var(&ctx, 2, 0);
        let y = LaurentPoly::var(&ctx, 2, 1);
        let s = x.add(&y.pow(3));
        let images = vec![x.pow(2), y.pow(2)];
        let got = s.substitute(&images, 20).unwrap();
        assert_eq!(got, x.pow(2).add(&y.pow(6)));
    }
}
