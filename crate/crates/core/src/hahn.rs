//! Multivariable generalized power series with rational exponents at finite
//! support: arithmetic, the weighted norms, monomial-ideal membership, the
//! two-completions classification of described exponent families, and the
//! embedding of mod-pi integral elements.
//!
//! Exponents live in `Q_{>=0}` with power-of-q denominators; coefficients in
//! a tensor product of finite fields. Finite supports make the
//! well-orderedness condition vacuous; for symbolically described infinite
//! families it is decided from the description.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::fq::{TensorFqCtx, TensorFqElem};
use crate::residue::LaurentPoly;

/// Nonnegative rational with power-of-`q` denominator: `num / q^qden`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QExp {
    num: u64,
    qden: u32,
}

impl QExp {
    pub fn new(q: u64, num: u64, qden: u32) -> Self {
        let mut e = QExp { num, qden };
        e.normalize(q);
        e
    }

    pub fn integer(n: u64) -> Self {
        QExp { num: n, qden: 0 }
    }

    fn normalize(&mut self, q: u64) {
        while self.qden > 0 && self.num % q == 0 {
            self.num /= q;
            self.qden -= 1;
        }
        if self.num == 0 {
            self.qden = 0;
        }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn qden(&self) -> u32 {
        self.qden
    }

    /// Value as `(numerator, denominator)` over a common power of `q`.
    fn with_den(&self, q: u64, qden: u32) -> u128 {
        debug_assert!(qden >= self.qden);
        self.num as u128 * (q as u128).pow(qden - self.qden)
    }

    pub fn add(&self, other: &QExp, q: u64) -> QExp {
        let d = self.qden.max(other.qden);
        let num = self.with_den(q, d) + other.with_den(q, d);
        QExp::new(q, num as u64, d)
    }

    pub fn cmp_q(&self, other: &QExp, q: u64) -> std::cmp::Ordering {
        let d = self.qden.max(other.qden);
        self.with_den(q, d).cmp(&other.with_den(q, d))
    }

    pub fn as_f64(&self, q: u64) -> f64 {
        self.num as f64 / (q as f64).powi(self.qden as i32)
    }
}

/// Ambient data: the exponent base `q` and the coefficient algebra.
#[derive(Debug)]
pub struct HahnCtx {
    pub q: u64,
    pub coeff: Arc<TensorFqCtx>,
    pub delta: usize,
}

impl HahnCtx {
    pub fn new(q: u64, coeff: Arc<TensorFqCtx>) -> Arc<Self> {
        let delta = coeff.delta;
        Arc::new(HahnCtx { q, coeff, delta })
    }

    pub fn zero(self: &Arc<Self>) -> HahnSeries {
        HahnSeries { ctx: self.clone(), terms: BTreeMap::new() }
    }

    pub fn monomial(self: &Arc<Self>, exp: Vec<QExp>, c: TensorFqElem) -> HahnSeries {
        assert_eq!(exp.len(), self.delta);
        let mut s = self.zero();
        if !c.is_zero() {
            s.terms.insert(ExpKey::from_exps(&exp, self.q), c);
        }
        s
    }

    pub fn one(self: &Arc<Self>) -> HahnSeries {
        self.monomial(vec![QExp::integer(0); self.delta], self.coeff.one())
    }
}

/// Ordered key: exponent vector normalized to a common denominator, compared
/// lexicographically; carries the original exponents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct ExpKey {
    /// `(qden, numerators at that common denominator)`
    qden: u32,
    nums: Vec<u128>,
}

impl ExpKey {
    fn from_exps(exps: &[QExp], q: u64) -> Self {
        let qden = exps.iter().map(|e| e.qden).max().unwrap_or(0);
        let nums = exps.iter().map(|e| e.with_den(q, qden)).collect();
        ExpKey { qden, nums }
    }

    fn to_exps(&self, q: u64) -> Vec<QExp> {
        self.nums.iter().map(|&n| QExp::new(q, n as u64, self.qden)).collect()
    }
}

/// Finitely supported generalized power series.
#[derive(Clone, Debug)]
pub struct HahnSeries {
    ctx: Arc<HahnCtx>,
    terms: BTreeMap<ExpKey, TensorFqElem>,
}

impl PartialEq for HahnSeries {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl HahnSeries {
    pub fn ctx(&self) -> &Arc<HahnCtx> {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Vec<QExp>, &TensorFqElem)> {
        self.terms.iter().map(|(k, c)| (k.to_exps(self.ctx.q), c))
    }

    pub fn add(&self, other: &HahnSeries) -> HahnSeries {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            let merged = match out.terms.get(k) {
                Some(cur) => cur.add(c),
                None => c.clone(),
            };
            if merged.is_zero() {
                out.terms.remove(k);
            } else {
                out.terms.insert(k.clone(), merged);
            }
        }
        out
    }

    pub fn neg(&self) -> HahnSeries {
        let mut out = self.ctx.zero();
        for (k, c) in &self.terms {
            out.terms.insert(k.clone(), c.neg());
        }
        out
    }

    pub fn sub(&self, other: &HahnSeries) -> HahnSeries {
        self.add(&other.neg())
    }

    /// Exact convolution on finite supports.
    pub fn mul(&self, other: &HahnSeries) -> HahnSeries {
        let q = self.ctx.q;
        let mut out = self.ctx.zero();
        for (ka, ca) in &self.terms {
            let ea = ka.to_exps(q);
            for (kb, cb) in &other.terms {
                let eb = kb.to_exps(q);
                let exp: Vec<QExp> = ea.iter().zip(&eb).map(|(a, b)| a.add(b, q)).collect();
                let key = ExpKey::from_exps(&exp, q);
                let prod = ca.mul(cb);
                let merged = match out.terms.get(&key) {
                    Some(cur) => cur.add(&prod),
                    None => prod,
                };
                if merged.is_zero() {
                    out.terms.remove(&key);
                } else {
                    out.terms.insert(key, merged);
                }
            }
        }
        out
    }

    /// Weighted degree of a term: `sum c_a * gamma_a` as a rational over a
    /// power of q, returned as `(numerator, qden)`.
    fn weighted_degree(&self, key: &ExpKey, weights: &[u64]) -> (u128, u32) {
        let acc: u128 = key
            .nums
            .iter()
            .zip(weights)
            .map(|(&n, &c)| n * c as u128)
            .sum();
        (acc, key.qden)
    }

    /// The weighted valuation `min over the support of sum c_a gamma_a`,
    /// `None` for the zero series (valuation infinity).
    pub fn weighted_valuation(&self, weights: &[u64]) -> Option<(u128, u32)> {
        assert_eq!(weights.len(), self.ctx.delta);
        let q = self.ctx.q as u128;
        self.terms
            .keys()
            .map(|k| self.weighted_degree(k, weights))
            .min_by(|a, b| {
                let d = a.1.max(b.1);
                (a.0 * q.pow(d - a.1)).cmp(&(b.0 * q.pow(d - b.1)))
            })
    }

    /// The norm `e^{-min weighted degree}`; `0.0` for the zero series.
    pub fn norm(&self, weights: &[u64]) -> f64 {
        match self.weighted_valuation(weights) {
            None => 0.0,
            Some((num, qden)) => {
                let v = num as f64 / (self.ctx.q as f64).powi(qden as i32);
                (-v).exp()
            }
        }
    }

    /// Membership in the ideal generated by monomials of weighted degree at
    /// least `gamma` (given as `num / q^qden`).
    pub fn ideal_member(&self, gamma_num: u128, gamma_qden: u32, weights: &[u64]) -> bool {
        let q = self.ctx.q as u128;
        self.terms.keys().all(|k| {
            let (num, qden) = self.weighted_degree(k, weights);
            let d = qden.max(gamma_qden);
            num * q.pow(d - qden) >= gamma_num * q.pow(d - gamma_qden)
        })
    }

    /// Membership in the monomial ideal generated by `t^{g}` for `g` in
    /// `gens`: every support point must dominate some generator
    /// coordinatewise.
    pub fn monomial_ideal_member(&self, gens: &[Vec<QExp>]) -> bool {
        let q = self.ctx.q;
        self.terms.keys().all(|k| {
            let e = k.to_exps(q);
            gens.iter().any(|g| {
                g.iter().zip(&e).all(|(gi, ei)| gi.cmp_q(ei, q) != std::cmp::Ordering::Greater)
            })
        })
    }

    /// The q-power Frobenius: coefficients to the q and exponents scaled by q.
    pub fn frobenius_q(&self) -> HahnSeries {
        let q = self.ctx.q;
        let b = self.ctx.coeff.base.degree() as u32;
        let mut out = self.ctx.zero();
        for (k, c) in &self.terms {
            let exps: Vec<QExp> = k
                .to_exps(q)
                .iter()
                .map(|e| QExp::new(q, e.num * if e.qden == 0 { q } else { 1 }, e.qden.saturating_sub(if e.qden == 0 { 0 } else { 1 })))
                .collect();
            let key = ExpKey::from_exps(&exps, q);
            out.terms.insert(key, c.frobenius(b));
        }
        out
    }
}

/// Term-wise embedding of a nonnegative mod-pi integral element:
/// `X_a -> t_a`.
pub fn embed_residue(ctx: &Arc<HahnCtx>, x: &LaurentPoly) -> Result<HahnSeries, CoreError> {
    if x.nvars() != ctx.delta {
        return Err(CoreError::BadParameter("variable count mismatch".into()));
    }
    let mut out = ctx.zero();
    for (e, c) in x.terms() {
        if e.iter().any(|&d| d < 0) {
            return Err(CoreError::NotIntegral);
        }
        let exps: Vec<QExp> = e.iter().map(|&d| QExp::integer(d as u64)).collect();
        // coefficients of the residue ring land in the base field of the
        // tensor algebra
        let lifted = ctx.coeff.one().scale(c);
        let term = ctx.monomial(exps, lifted);
        out = out.add(&term);
    }
    Ok(out)
}

/// Checks that membership in the monomial ideal generated by `gens` agrees
/// on both sides of the embedding for every test element.
pub fn preimage_ideal_check(
    ctx: &Arc<HahnCtx>,
    gens: &[Vec<i64>],
    tests: &[LaurentPoly],
) -> Result<bool, CoreError> {
    let gen_exps: Vec<Vec<QExp>> = gens
        .iter()
        .map(|g| {
            g.iter()
                .map(|&d| {
                    if d < 0 {
                        Err(CoreError::NotIntegral)
                    } else {
                        Ok(QExp::integer(d as u64))
                    }
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    for x in tests {
        // Source side: every term divisible by some generator.
        let src = x.terms().all(|(e, _)| {
            gens.iter().any(|g| g.iter().zip(e).all(|(gi, ei)| gi <= ei))
        });
        let dst = embed_residue(ctx, x)?.monomial_ideal_member(&gen_exps);
        if src != dst {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Described exponent families and the two completions
// ---------------------------------------------------------------------------

/// Per-variable exponent sequence `e(n) = base + lin*n + geo*q^(sign*n)`,
/// with nonnegative rational data (arithmetic-geometric families).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarSequence {
    /// Constant part.
    pub base: f64,
    /// Arithmetic slope (per step).
    pub lin: f64,
    /// Geometric coefficient.
    pub geo: f64,
    /// Direction of the geometric part: +1 grows like q^n, -1 decays like
    /// q^{-n}, 0 absent.
    pub sign: i32,
}

impl VarSequence {
    pub fn constant(c: f64) -> Self {
        VarSequence { base: c, lin: 0.0, geo: 0.0, sign: 0 }
    }

    fn tends_to_infinity(&self) -> bool {
        self.lin > 0.0 || (self.geo > 0.0 && self.sign > 0)
    }

    fn valid(&self) -> bool {
        self.base >= 0.0 && self.lin >= 0.0 && self.geo >= 0.0 && (-1..=1).contains(&self.sign)
    }
}

/// A described family `sum_n prod_a X_a^{e_a(n)}`, or a finite support.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ExponentFamily {
    Finite,
    Sequence(Vec<VarSequence>),
}

/// Which completions the family belongs to: the `(X_1,..,X_d)`-adic one
/// (every triangular zone meets the support finitely often: total degree
/// tends to infinity) and the `X_Delta`-adic one (per-variable finiteness:
/// every variable's exponent tends to infinity).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionClass {
    pub in_x_underline_adic: bool,
    pub in_x_delta_adic: bool,
}

pub fn completion_classify(family: &ExponentFamily) -> Result<CompletionClass, CoreError> {
    match family {
        ExponentFamily::Finite => {
            Ok(CompletionClass { in_x_underline_adic: true, in_x_delta_adic: true })
        }
        ExponentFamily::Sequence(vars) => {
            if vars.is_empty() || vars.iter().any(|v| !v.valid()) {
                return Err(CoreError::Unsupported(
                    "sequence data must be nonnegative arithmetic-geometric".into(),
                ));
            }
            // Degenerate constant families repeat one monomial forever.
            if vars.iter().all(|v| v.lin == 0.0 && (v.geo == 0.0 || v.sign == 0)) {
                return Err(CoreError::Unsupported(
                    "constant exponent sequence is not a series description".into(),
                ));
            }
            let total_grows = vars.iter().any(|v| v.tends_to_infinity());
            let each_grows = vars.iter().all(|v| v.tends_to_infinity());
            Ok(CompletionClass { in_x_underline_adic: total_grows, in_x_delta_adic: each_grows })
        }
    }
}

/// Serialized form of a series: exponents as `[numerator, q-power]` pairs
/// per variable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HahnJson {
    pub q: u64,
    pub terms: Vec<(Vec<(u64, u32)>, Vec<Vec<u64>>)>,
}

impl HahnJson {
    pub fn encode(s: &HahnSeries) -> Self {
        let q = s.ctx.q;
        HahnJson {
            q,
            terms: s
                .terms()
                .map(|(exps, c)| {
                    (
                        exps.iter().map(|e| (e.num(), e.qden())).collect(),
                        c.coords().iter().map(|x| x.coords().to_vec()).collect(),
                    )
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fq::FqCtx;

    fn ctx_f2(delta: usize) -> Arc<HahnCtx> {
        let f2 = FqCtx::new(2, 1).unwrap();
        let t = TensorFqCtx::new(f2.clone(), f2, delta).unwrap();
        HahnCtx::new(2, t)
    }

    fn half(ctx: &Arc<HahnCtx>) -> QExp {
        QExp::new(ctx.q, 1, 1)
    }

    #[test]
    fn half_plus_half_is_one() {
        let ctx = ctx_f2(1);
        let t_half = ctx.monomial(vec![half(&ctx)], ctx.coeff.one());
        let prod = t_half.mul(&t_half);
        let t_one = ctx.monomial(vec![QExp::integer(1)], ctx.coeff.one());
        assert_eq!(prod, t_one);
    }

    #[test]
    fn char_two_square_is_frobenius() {
        let ctx = ctx_f2(2);
        let ta = ctx.monomial(vec![QExp::integer(1), QExp::integer(0)], ctx.coeff.one());
        let tb = ctx.monomial(vec![QExp::integer(0), QExp::integer(1)], ctx.coeff.one());
        let s = ta.add(&tb);
        let sq = s.mul(&s);
        let expect = ta.mul(&ta).add(&tb.mul(&tb));
        assert_eq!(sq, expect);
    }

    #[test]
    fn convolution_matches_naive_oracle() {
        // oracle: independent double loop over integer-scaled exponents
        let ctx = ctx_f2(2);
        let m = |a: (u64, u32), b: (u64, u32)| {
            ctx.monomial(
                vec![QExp::new(2, a.0, a.1), QExp::new(2, b.0, b.1)],
                ctx.coeff.one(),
            )
        };
        let x = m((1, 1), (0, 0)).add(&m((1, 0), (1, 1)));
        let y = m((1, 1), (1, 0)).add(&m((0, 0), (1, 1)));
        let got = x.mul(&y);
        // supports (in quarters: exponent * 4): x: {(2,0),(4,2)}, y: {(2,4),(0,2)}
        // products: (4,4),(2,2),(6,6),(4,4) -> (4,4) cancels mod 2
        let e22 = m((1, 1), (1, 1));
        let e66 = ctx.monomial(
            vec![QExp::new(2, 3, 1), QExp::new(2, 3, 1)],
            ctx.coeff.one(),
        );
        assert_eq!(got, e22.add(&e66));
    }

    #[test]
    fn norm_of_single_monomial() {
        // |t_1^{1/2} t_2| with weights (1,1) = e^{-3/2}
        let ctx = ctx_f2(2);
        let x = ctx.monomial(vec![half(&ctx), QExp::integer(1)], ctx.coeff.one());
        let v = x.weighted_valuation(&[1, 1]).unwrap();
        // 3/2 = 3 / 2^1
        assert_eq!(v, (3, 1));
        assert!((x.norm(&[1, 1]) - (-1.5f64).exp()).abs() < 1e-12);
        assert_eq!(ctx.zero().norm(&[1, 1]), 0.0);
    }

    #[test]
    fn norm_with_weights_tie() {
        // x = t_1 + t_1^{1/2} t_2^{1/4}, weights (2,4): degrees 2 and 1+1=2
        let ctx = ctx_f2(2);
        let a = ctx.monomial(vec![QExp::integer(1), QExp::integer(0)], ctx.coeff.one());
        let b = ctx.monomial(vec![half(&ctx), QExp::new(2, 1, 2)], ctx.coeff.one());
        let x = a.add(&b);
        let v = x.weighted_valuation(&[2, 4]).unwrap();
        // both terms weigh exactly 2 (a tie), so the valuation is 2
        assert_eq!(v.0, 2 * 2u128.pow(v.1));
    }

    #[test]
    fn ideal_membership_boundary() {
        let ctx = ctx_f2(2);
        let t_delta = ctx.monomial(vec![QExp::integer(1), QExp::integer(1)], ctx.coeff.one());
        // gamma = |Delta| = 2 with unit weights: in
        assert!(t_delta.ideal_member(2, 0, &[1, 1]));
        // gamma slightly larger: out (use 9/4 > 2)
        assert!(!t_delta.ideal_member(9, 2, &[1, 1]));
    }

    #[test]
    fn ideal_member_iff_norm_small() {
        let ctx = ctx_f2(2);
        let a = ctx.monomial(vec![QExp::integer(2), QExp::integer(0)], ctx.coeff.one());
        let b = ctx.monomial(vec![half(&ctx), QExp::integer(1)], ctx.coeff.one());
        let x = a.add(&b);
        for gamma in [(1u128, 0u32), (3, 1), (2, 0), (3, 0)] {
            let member = x.ideal_member(gamma.0, gamma.1, &[1, 1]);
            let bound = (-(gamma.0 as f64 / 2f64.powi(gamma.1 as i32))).exp();
            let norm = x.norm(&[1, 1]);
            assert_eq!(member, norm <= bound + 1e-12, "gamma {gamma:?}");
        }
    }

    #[test]
    fn submultiplicative_and_multiplicative_over_field() {
        let ctx = ctx_f2(2);
        let mk = |terms: &[((u64, u32), (u64, u32))]| {
            let mut acc = ctx.zero();
            for &(a, b) in terms {
                acc = acc.add(&ctx.monomial(
                    vec![QExp::new(2, a.0, a.1), QExp::new(2, b.0, b.1)],
                    ctx.coeff.one(),
                ));
            }
            acc
        };
        let xs = [
            mk(&[((1, 0), (0, 0)), ((0, 0), (1, 1))]),
            mk(&[((3, 1), (1, 0))]),
            mk(&[((1, 2), (1, 2)), ((2, 0), (0, 0)), ((0, 0), (3, 0))]),
        ];
        for x in &xs {
            for y in &xs {
                let nx = x.norm(&[1, 1]);
                let ny = y.norm(&[1, 1]);
                let nxy = x.mul(y).norm(&[1, 1]);
                assert!(nxy <= nx * ny + 1e-12);
                // F_2 coefficients form a field (delta factors collapse to
                // F_2 itself), so the norm is multiplicative here
                assert!((nxy - nx * ny).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn t_beta_adic_norm_as_weight_limit() {
        // the limit of |.|_{(n,1)} normalized recovers the minimal
        // t_1-exponent on test elements
        let ctx = ctx_f2(2);
        let x = ctx
            .monomial(vec![QExp::integer(2), QExp::integer(0)], ctx.coeff.one())
            .add(&ctx.monomial(vec![QExp::integer(3), QExp::new(2, 1, 1)], ctx.coeff.one()));
        // direct minimal t_1 exponent is 2; |.|_{(n,1)}^{1/n} converges to it
        let v = x.weighted_valuation(&[512, 1]).unwrap();
        let val = v.0 as f64 / 2f64.powi(v.1 as i32) / 512.0;
        assert!((val - 2.0).abs() < 1e-2);
    }

    #[test]
    fn norm_strictly_submultiplicative_over_non_integral_coefficients() {
        // F_4 (x)_{F_2} F_4 has zero divisors, so the norm cannot be
        // multiplicative: pick orthogonal idempotent-like elements whose
        // product vanishes.
        let f2 = FqCtx::new(2, 1).unwrap();
        let f4 = FqCtx::new(2, 2).unwrap();
        let tensor = TensorFqCtx::new(f2, f4, 2).unwrap();
        let ctx = HahnCtx::new(2, tensor.clone());
        // e = y(x)1 + 1(x)y + 1(x)1 annihilates e' = e + 1 iff e(e+1) = 0,
        // i.e. e is idempotent; search a nonzero idempotent != 1.
        let dim = tensor.g.pow(tensor.delta as u32);
        let mut idem = None;
        'outer: for mask in 1..(1u32 << dim) {
            let mut cand = ctx.coeff.zero();
            for k in 0..dim {
                if mask & (1 << k) != 0 {
                    let ks = [(k / tensor.g) as usize, (k % tensor.g) as usize];
                    cand = cand.add(&ctx.coeff.basis_elem(&ks));
                }
            }
            if cand.mul(&cand) == cand && !cand.is_zero() {
                let complement = cand.add(&ctx.coeff.one());
                if !complement.is_zero() {
                    idem = Some((cand, complement));
                    break 'outer;
                }
            }
        }
        let (e, e_compl) = idem.expect("F_4 tensor F_4 has nontrivial idempotents");
        assert!(e.mul(&e_compl).is_zero());
        let exps = vec![QExp::integer(1), QExp::integer(0)];
        let x = ctx.monomial(exps.clone(), e);
        let y = ctx.monomial(exps, e_compl);
        let prod = x.mul(&y);
        assert!(prod.is_zero());
        // strict: |xy| = 0 < |x| |y|
        assert_eq!(prod.norm(&[1, 1]), 0.0);
        assert!(x.norm(&[1, 1]) * y.norm(&[1, 1]) > 0.0);
    }

    #[test]
    fn classify_two_completions_example() {
        // sum_n X_a^{q^-n} X_b^{q^n}: in the (X_a, X_b)-adic completion but
        // not the X_Delta-adic one
        let fam = ExponentFamily::Sequence(vec![
            VarSequence { base: 0.0, lin: 0.0, geo: 1.0, sign: -1 },
            VarSequence { base: 0.0, lin: 0.0, geo: 1.0, sign: 1 },
        ]);
        let c = completion_classify(&fam).unwrap();
        assert!(c.in_x_underline_adic);
        assert!(!c.in_x_delta_adic);

        // finite support: both
        let c2 = completion_classify(&ExponentFamily::Finite).unwrap();
        assert!(c2.in_x_underline_adic && c2.in_x_delta_adic);

        // sum_n X_a^n (integer exponents growing): both
        // (single-variable family)
        let fam3 = ExponentFamily::Sequence(vec![VarSequence {
            base: 0.0,
            lin: 1.0,
            geo: 0.0,
            sign: 0,
        }]);
        let c3 = completion_classify(&fam3).unwrap();
        assert!(c3.in_x_underline_adic && c3.in_x_delta_adic);
    }

    #[test]
    fn embedding_is_ring_hom_and_frobenius_compatible() {
        let ctx = ctx_f2(2);
        let f2 = FqCtx::new(2, 1).unwrap();
        let x = LaurentPoly::var(&f2, 2, 0);
        let y = LaurentPoly::var(&f2, 2, 1);
        let a = x.add(&y.pow(2));
        let b = x.mul(&y).add(&LaurentPoly::one(&f2, 2));
        let ia = embed_residue(&ctx, &a).unwrap();
        let ib = embed_residue(&ctx, &b).unwrap();
        let iab = embed_residue(&ctx, &a.mul(&b)).unwrap();
        assert_eq!(ia.mul(&ib), iab);
        let isum = embed_residue(&ctx, &a.add(&b)).unwrap();
        assert_eq!(ia.add(&ib), isum);
        // embedding of x^q = q-th power of the embedding
        let aq = a.pow(2);
        let iaq = embed_residue(&ctx, &aq).unwrap();
        assert_eq!(iaq, ia.frobenius_q());
        // negative exponents refused
        let bad = LaurentPoly::monomial(&f2, vec![-1, 0], f2.one());
        assert!(matches!(embed_residue(&ctx, &bad), Err(CoreError::NotIntegral)));
    }

    #[test]
    fn preimage_of_monomial_ideal() {
        // ideal (t_a^2, t_b): preimage contains X_a^2 and X_b, excludes X_a
        let ctx = ctx_f2(2);
        let f2 = FqCtx::new(2, 1).unwrap();
        let xa = LaurentPoly::var(&f2, 2, 0);
        let xb = LaurentPoly::var(&f2, 2, 1);
        let gens = vec![vec![2, 0], vec![0, 1]];
        assert!(preimage_ideal_check(&ctx, &gens, &[xa.pow(2), xb.clone(), xa.clone(), xa.mul(&xb)]).unwrap());
        let a2 = embed_residue(&ctx, &xa.pow(2)).unwrap();
        let gen_exps: Vec<Vec<QExp>> = gens
            .iter()
            .map(|g| g.iter().map(|&d| QExp::integer(d as u64)).collect())
            .collect();
        assert!(a2.monomial_ideal_member(&gen_exps));
        let a1 = embed_residue(&ctx, &xa).unwrap();
        assert!(!a1.monomial_ideal_member(&gen_exps));
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use crate::fq::FqCtx;
    use proptest::prelude::*;

    fn arb_series() -> impl Strategy<Value = Vec<((u64, u32), (u64, u32))>> {
        proptest::collection::vec(
            ((0u64..12, 0u32..3), (0u64..12, 0u32..3)),
            1..5,
        )
    }

    fn build(ctx: &std::sync::Arc<HahnCtx>, terms: &[((u64, u32), (u64, u32))]) -> HahnSeries {
        let mut acc = ctx.zero();
        for &(a, b) in terms {
            acc = acc.add(&ctx.monomial(
                vec![QExp::new(2, a.0, a.1), QExp::new(2, b.0, b.1)],
                ctx.coeff.one(),
            ));
        }
        acc
    }

    proptest! {
        /// Distributivity and norm submultiplicativity on random supports.
        #[test]
        fn convolution_distributes(xs in arb_series(), ys in arb_series(), zs in arb_series()) {
            let f2 = FqCtx::new(2, 1).unwrap();
            let tensor = TensorFqCtx::new(f2.clone(), f2, 2).unwrap();
            let ctx = HahnCtx::new(2, tensor);
            let x = build(&ctx, &xs);
            let y = build(&ctx, &ys);
            let z = build(&ctx, &zs);
            let lhs = x.mul(&y.add(&z));
            let rhs = x.mul(&y).add(&x.mul(&z));
            prop_assert_eq!(lhs, rhs);
            let nxy = x.mul(&y).norm(&[1, 2]);
            prop_assert!(nxy <= x.norm(&[1, 2]) * y.norm(&[1, 2]) + 1e-12);
        }

        /// The norm-ideal dictionary: membership at gamma iff the norm is at
        /// most e^{-gamma}.
        #[test]
        fn ideal_member_iff_norm_bounded(xs in arb_series(), gnum in 0u64..20, gden in 0u32..3) {
            let f2 = FqCtx::new(2, 1).unwrap();
            let tensor = TensorFqCtx::new(f2.clone(), f2, 2).unwrap();
            let ctx = HahnCtx::new(2, tensor);
            let x = build(&ctx, &xs);
            prop_assume!(!x.is_zero());
            let member = x.ideal_member(gnum as u128, gden, &[1, 1]);
            let gamma = gnum as f64 / 2f64.powi(gden as i32);
            prop_assert_eq!(member, x.norm(&[1, 1]) <= (-gamma).exp() + 1e-12);
        }
    }
}
