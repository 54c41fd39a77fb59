//! Lubin-Tate formal group laws at finite truncation.
//!
//! From a Lubin-Tate polynomial `f` (monic of degree `q` with `f(T) = T^q +
//! pi T` modulo `(pi T^2)`) this module constructs the unique addition law
//! `F(T1,T2)` with `F = T1 + T2` mod degree 2 and `f(F) = F(f(T1), f(T2))`,
//! the endomorphisms `[a](T)` for `a` in `O_K`, and the formal inverse
//! `i = [-1]`. The construction is the classical degree-by-degree lift: at
//! total degree `d` the homogeneous correction is the defect divided by
//! `c1^d - c1` (`c1` the linear coefficient of `f`), which is exact because
//! the defect is divisible by pi and `c1^(d-1) - 1` is a unit.
//!
//! Each division costs one pi-digit, so building up to degree cap `N` at
//! output precision `m` requires the coefficients of `f` to be known modulo
//! `pi^(m + N)`; otherwise `InsufficientPrecision` is raised rather than
//! returning silently degraded output.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::padic::{PadicElement, PadicRingSpec, Valuation};
use crate::series::{Monomial, TruncatedSeries};

/// A Lubin-Tate polynomial for the fixed uniformizer of the spec.
#[derive(Clone, Debug, PartialEq)]
pub struct LubinTatePoly {
    spec: Arc<PadicRingSpec>,
    /// Coefficients `c_0..c_q`, monic.
    coeffs: Vec<PadicElement>,
}

impl LubinTatePoly {
    /// Validates the congruence conditions: zero constant term, `c_1 = pi`
    /// mod `pi^2`, `pi | c_j` for `1 < j < q`, leading coefficient 1.
    pub fn new(spec: &Arc<PadicRingSpec>, coeffs: Vec<PadicElement>) -> Result<Self, CoreError> {
        let q = spec.q() as usize;
        if coeffs.len() != q + 1 {
            return Err(CoreError::BadParameter(format!(
                "expected degree {} polynomial, got {} coefficients",
                q,
                coeffs.len()
            )));
        }
        if !coeffs[0].is_zero() {
            return Err(CoreError::BadParameter("constant term must vanish".into()));
        }
        let prec = coeffs.iter().map(|c| c.precision()).min().unwrap();
        if prec < 2 {
            return Err(CoreError::InsufficientPrecision { needed: 2, available: prec });
        }
        let pi = spec.uniformizer(prec);
        let d1 = coeffs[1].truncate(prec).sub(&pi)?;
        if d1.valuation().lower_bound() < 2 {
            return Err(CoreError::BadParameter("linear coefficient is not pi mod pi^2".into()));
        }
        for c in &coeffs[2..q] {
            if c.valuation().lower_bound() < 1 {
                return Err(CoreError::BadParameter(
                    "middle coefficients must be divisible by pi".into(),
                ));
            }
        }
        let lead = coeffs[q].truncate(prec);
        if lead != spec.one(prec) {
            return Err(CoreError::BadParameter("polynomial is not monic".into()));
        }
        Ok(LubinTatePoly { spec: spec.clone(), coeffs })
    }

    /// The default choice `f = T^q + pi T` at the given coefficient precision.
    pub fn standard(spec: &Arc<PadicRingSpec>, prec: u32) -> Result<Self, CoreError> {
        let q = spec.q() as usize;
        let mut coeffs = vec![spec.zero(prec); q + 1];
        coeffs[1] = spec.uniformizer(prec);
        coeffs[q] = spec.one(prec);
        LubinTatePoly::new(spec, coeffs)
    }

    /// The cyclotomic choice `f = (1+T)^p - 1` over `Z_p`.
    pub fn cyclotomic(spec: &Arc<PadicRingSpec>, prec: u32) -> Result<Self, CoreError> {
        if spec.f_res() != 1 || spec.e() != 1 {
            return Err(CoreError::BadParameter("cyclotomic choice needs K = Q_p".into()));
        }
        let p = spec.p();
        let mut coeffs = Vec::with_capacity(p as usize + 1);
        // binomial(p, j)
        let mut binom: u128 = 1;
        for j in 0..=p {
            let c = if j == 0 { 0 } else { binom as u64 };
            coeffs.push(spec.from_u64(c, prec));
            binom = binom * (p - j) as u128 / (j + 1) as u128;
        }
        LubinTatePoly::new(spec, coeffs)
    }

    pub fn spec(&self) -> &Arc<PadicRingSpec> {
        &self.spec
    }

    pub fn q(&self) -> u64 {
        self.spec.q()
    }

    pub fn coeffs(&self) -> &[PadicElement] {
        &self.coeffs
    }

    pub fn coeff_precision(&self) -> u32 {
        self.coeffs.iter().map(|c| c.precision()).min().unwrap()
    }

    /// As a univariate truncated series.
    pub fn as_series(&self, deg_cap: u32, prec: u32) -> TruncatedSeries {
        let mut s = TruncatedSeries::zero(&self.spec, 1, deg_cap, prec);
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() || j as u32 > deg_cap {
                continue;
            }
            let t = TruncatedSeries::var(&self.spec, 1, 0, deg_cap, prec)
                .pow(j as u32)
                .expect("same spec");
            s = s.add(&t.scale(&c.truncate(prec)).expect("same spec")).expect("same spec");
        }
        s
    }

    /// In `n` variables, the series `f(T_i)`.
    fn as_series_in_var(&self, num_vars: usize, i: usize, deg_cap: u32, prec: u32) -> TruncatedSeries {
        let mut map = vec![0usize; 1];
        map[0] = i;
        self.as_series(deg_cap, prec).embed_vars(num_vars, &map)
    }
}

/// Divides a homogeneous defect by `c1^d - c1`, exactly.
fn divide_defect(
    defect: &TruncatedSeries,
    c1: &PadicElement,
    d: u32,
) -> Result<TruncatedSeries, CoreError> {
    // c1^d - c1 = pi * u with u a unit.
    let divisor = c1.pow(d as u64).sub(c1)?;
    debug_assert_eq!(divisor.valuation(), Valuation::Finite(1));
    let unit_inv = divisor.div_pi_exact(1)?.inv()?;
    let mut out = TruncatedSeries::zero(defect.spec(), defect.num_vars(), defect.deg_cap(), defect.precision() - 1);
    for (m, c) in defect.terms() {
        let c = c.div_pi_exact(1)?.mul(&unit_inv)?;
        out = out.add(&TruncatedSeries::constant(defect.spec(), defect.num_vars(), c, defect.deg_cap(), defect.precision() - 1)
            .mul(&monomial_series(defect.spec(), defect.num_vars(), m, defect.deg_cap(), defect.precision() - 1))?)?;
    }
    Ok(out)
}

fn monomial_series(
    spec: &Arc<PadicRingSpec>,
    num_vars: usize,
    m: &Monomial,
    deg_cap: u32,
    prec: u32,
) -> TruncatedSeries {
    let mut s = TruncatedSeries::constant(spec, num_vars, spec.one(prec), deg_cap, prec);
    for (i, &e) in m.0.iter().enumerate() {
        for _ in 0..e {
            s = s.mul(&TruncatedSeries::var(spec, num_vars, i, deg_cap, prec)).expect("same spec");
        }
    }
    s
}

/// The unique addition law `F(T1,T2)` of `f`, modulo `(pi^prec, deg > cap)`.
///
/// Precision is tracked dynamically: each degree whose defect is nonzero
/// costs one pi-digit (the division by `c1^d - c1`). For the standard
/// `f = T^q + pi T` nonzero defects occur only in degrees `1 mod (q-1)`, so
/// large caps stay affordable at large `q`.
pub fn lt_add_law(f: &LubinTatePoly, deg_cap: u32, prec: u32) -> Result<TruncatedSeries, CoreError> {
    let spec = f.spec();
    let work = f.coeff_precision();
    if work <= prec {
        return Err(CoreError::InsufficientPrecision { needed: prec + 1, available: work });
    }
    let c1 = f.coeffs()[1].clone();
    let t1 = TruncatedSeries::var(spec, 2, 0, deg_cap, work);
    let t2 = TruncatedSeries::var(spec, 2, 1, deg_cap, work);
    let mut law = t1.add(&t2)?;
    let f1 = f.as_series_in_var(2, 0, deg_cap, work);
    let f2 = f.as_series_in_var(2, 1, deg_cap, work);
    let f_uni = f.as_series(deg_cap, work);
    for d in 2..=deg_cap {
        // defect E = f(F) - F(f(T1), f(T2)); its degree-d part drives the
        // correction, lower parts already vanish.
        let lhs = f_uni.compose(&[&law])?;
        let rhs = law.compose(&[&f1, &f2])?;
        let defect = lhs.sub(&rhs)?;
        debug_assert!(defect.min_degree().is_none_or(|x| x >= d));
        let e_d = defect.homogeneous_part(d);
        if e_d.is_empty() {
            continue;
        }
        if law.precision() <= prec {
            return Err(CoreError::InsufficientPrecision {
                needed: work + prec + 1 - law.precision(),
                available: work,
            });
        }
        let delta = divide_defect(&e_d, &c1, d)?;
        law = law.truncated(deg_cap, delta.precision()).add(&delta)?;
    }
    Ok(law.truncated(deg_cap, prec))
}

/// The unique endomorphism `[a](T)` with `[a] = aT` mod `T^2` and
/// `[a] o f = f o [a]`, modulo `(pi^prec, deg > cap)`.
pub fn lt_scalar(
    f: &LubinTatePoly,
    a: &PadicElement,
    deg_cap: u32,
    prec: u32,
) -> Result<TruncatedSeries, CoreError> {
    let spec = f.spec();
    let work = f.coeff_precision().min(a.precision());
    if work <= prec {
        return Err(CoreError::InsufficientPrecision { needed: prec + 1, available: work });
    }
    let c1 = f.coeffs()[1].clone();
    let t = TruncatedSeries::var(spec, 1, 0, deg_cap, work);
    let mut g = t.scale(&a.truncate(work))?;
    let f_uni = f.as_series(deg_cap, work);
    for d in 2..=deg_cap {
        // defect E = G(f) - f(G); the correction solves E + (c1^d - c1) delta = 0.
        let lhs = g.compose(&[&f_uni])?;
        let rhs = f_uni.compose(&[&g])?;
        let defect = lhs.sub(&rhs)?;
        debug_assert!(defect.min_degree().is_none_or(|x| x >= d));
        let e_d = defect.homogeneous_part(d);
        if e_d.is_empty() {
            continue;
        }
        if g.precision() <= prec {
            return Err(CoreError::InsufficientPrecision {
                needed: work + prec + 1 - g.precision(),
                available: work,
            });
        }
        let delta = divide_defect(&e_d, &c1, d)?.neg();
        g = g.truncated(deg_cap, delta.precision()).add(&delta)?;
    }
    Ok(g.truncated(deg_cap, prec))
}

/// The formal inverse series `i(T) = [-1](T)`.
pub fn lt_inverse(f: &LubinTatePoly, deg_cap: u32, prec: u32) -> Result<TruncatedSeries, CoreError> {
    let minus_one = f.spec().one(f.coeff_precision()).neg();
    lt_scalar(f, &minus_one, deg_cap, prec)
}

/// Outcome of one sample `(a, b)` in the axiom suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LtSampleCheck {
    pub add_hom: bool,
    pub mul_hom: bool,
}

/// Report of the formal `O_K`-module identities at truncation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LtAxiomReport {
    pub commutative: bool,
    pub associative: bool,
    pub zero_is_zero: bool,
    pub one_is_identity: bool,
    pub pi_is_f: bool,
    /// `[pi^2] = f o f` at the truncation.
    pub pi_square_is_f_twice: bool,
    pub samples: Vec<LtSampleCheck>,
}

impl LtAxiomReport {
    pub fn all_pass(&self) -> bool {
        self.commutative
            && self.associative
            && self.zero_is_zero
            && self.one_is_identity
            && self.pi_is_f
            && self.pi_square_is_f_twice
            && self.samples.iter().all(|s| s.add_hom && s.mul_hom)
    }
}

/// Checks commutativity and associativity of `F`, `[0] = 0`, `[1] = T`,
/// `[pi] = f`, and `[a+b] = F([a],[b])`, `[ab] = [a] o [b]` on the samples.
/// Both sides of every identity are recomputed independently through
/// `compose`, so a failure pinpoints a genuine defect at the truncation.
pub fn lt_check_axioms(
    f: &LubinTatePoly,
    deg_cap: u32,
    prec: u32,
    samples: &[(PadicElement, PadicElement)],
) -> Result<LtAxiomReport, CoreError> {
    let spec = f.spec();
    let law = lt_add_law(f, deg_cap, prec)?;
    // Commutativity: swap the two variables.
    let swapped = law.embed_vars(2, &[1, 0]);
    let commutative = law == swapped;

    // Associativity in three variables.
    let f12 = law.embed_vars(3, &[0, 1]);
    let t3 = TruncatedSeries::var(spec, 3, 2, deg_cap, prec);
    let t1 = TruncatedSeries::var(spec, 3, 0, deg_cap, prec);
    let f23 = law.embed_vars(3, &[1, 2]);
    let left = law.compose(&[&f12, &t3])?;
    let right = law.compose(&[&t1, &f23])?;
    let associative = left == right;

    let work = f.coeff_precision();
    let zero_is_zero = lt_scalar(f, &spec.zero(work), deg_cap, prec)?.is_empty();
    let t = TruncatedSeries::var(spec, 1, 0, deg_cap, prec);
    let one_is_identity = lt_scalar(f, &spec.one(work), deg_cap, prec)? == t;

    let pi_series = lt_scalar(f, &spec.uniformizer(work), deg_cap, prec)?;
    let pi_is_f = pi_series == f.as_series(deg_cap, prec);

    let pi_sq = lt_scalar(f, &spec.uniformizer(work).pow(2), deg_cap, prec)?;
    let f_twice = f.as_series(deg_cap, prec).compose(&[&f.as_series(deg_cap, prec)])?;
    let pi_square_is_f_twice = pi_sq == f_twice;

    let mut sample_reports = Vec::new();
    for (a, b) in samples {
        let ga = lt_scalar(f, a, deg_cap, prec)?;
        let gb = lt_scalar(f, b, deg_cap, prec)?;
        let sum = a.add(b)?;
        let gsum = lt_scalar(f, &sum, deg_cap, prec)?;
        let via_law = law.compose(&[&ga.embed_vars(2, &[0]), &gb.embed_vars(2, &[0])])?;
        // F([a](T), [b](T)) lives in one variable again after embedding both
        // into the first slot.
        let add_hom = gsum == via_law.embed_vars(1, &[0, 0]);

        let prod = a.mul(b)?;
        let gprod = lt_scalar(f, &prod, deg_cap, prec)?;
        let comp_ab = ga.compose(&[&gb])?;
        let comp_ba = gb.compose(&[&ga])?;
        let mul_hom = gprod == comp_ab && gprod == comp_ba;
        sample_reports.push(LtSampleCheck { add_hom, mul_hom });
    }

    Ok(LtAxiomReport {
        commutative,
        associative,
        zero_is_zero,
        one_is_identity,
        pi_is_f,
        pi_square_is_f_twice,
        samples: sample_reports,
    })
}
