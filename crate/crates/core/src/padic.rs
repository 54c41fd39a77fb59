//! Exact arithmetic in `O_K` at finite pi-adic precision.
//!
//! `K` is a finite extension of `Q_p` presented as an unramified layer of
//! residue degree `f` (defined by the same smallest-lexicographic polynomial
//! as [`crate::fq::FqCtx`]) followed by an optional Eisenstein layer of degree
//! `e`. Elements are stored in the basis `u^i pi^j` (`0 <= i < f`,
//! `0 <= j < e`) with integer coordinates; the coordinate of `u^i pi^j` is
//! canonically reduced modulo `p^ceil((m-j)/e)` for an element known modulo
//! `pi^m`. Every operation returns a canonical representative at the minimum
//! of the operand precisions, never a silently more precise one.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::fq::{FqCtx, FqElem};

/// Ring data for `O_K`.
#[derive(Debug)]
pub struct PadicRingSpec {
    p: u64,
    f_res: usize,
    /// Non-leading coefficients of the monic degree-`f_res` polynomial over
    /// `F_p` defining the unramified layer.
    unram_poly: Vec<u64>,
    /// Non-leading coefficients `c_0..c_{e-1}` of the Eisenstein polynomial,
    /// each an element of the unramified layer written in `u`-coordinates
    /// (exact nonnegative integers).
    eis: Option<Vec<Vec<u64>>>,
    /// Default working precision exponent (power of pi).
    precision_pi: u32,
    residue: Arc<FqCtx>,
}

impl PartialEq for PadicRingSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
            && self.f_res == other.f_res
            && self.unram_poly == other.unram_poly
            && self.eis == other.eis
    }
}

impl PadicRingSpec {
    /// `Z_p` at precision `p^m`.
    pub fn qp(p: u64, precision_pi: u32) -> Result<Arc<Self>, CoreError> {
        Self::unramified(p, 1, precision_pi)
    }

    /// Unramified extension of degree `f_res`, uniformizer `p`.
    pub fn unramified(p: u64, f_res: usize, precision_pi: u32) -> Result<Arc<Self>, CoreError> {
        let residue = FqCtx::new(p, f_res)?;
        let unram_poly = residue.poly().to_vec();
        let spec = PadicRingSpec { p, f_res, unram_poly, eis: None, precision_pi, residue };
        spec.check_modulus_bound()?;
        Ok(Arc::new(spec))
    }

    /// Extension with an Eisenstein layer on top of the unramified one.
    ///
    /// `eis` lists the non-leading coefficients `c_0..c_{e-1}`, each in
    /// `u`-coordinates over the unramified layer. Eisenstein means every `c_j`
    /// is divisible by `p` and `c_0` exactly once.
    pub fn eisenstein(
        p: u64,
        f_res: usize,
        eis: Vec<Vec<u64>>,
        precision_pi: u32,
    ) -> Result<Arc<Self>, CoreError> {
        let residue = FqCtx::new(p, f_res)?;
        let e = eis.len();
        if e == 0 {
            return Err(CoreError::BadParameter("empty Eisenstein polynomial".into()));
        }
        for c in &eis {
            if c.len() != f_res {
                return Err(CoreError::BadParameter(
                    "Eisenstein coefficient has wrong length over the unramified layer".into(),
                ));
            }
            if c.iter().any(|&x| x % p != 0) {
                return Err(CoreError::BadParameter(
                    "Eisenstein coefficients must be divisible by p".into(),
                ));
            }
        }
        if eis[0].iter().all(|&x| x % (p * p) == 0) {
            return Err(CoreError::BadParameter(
                "constant Eisenstein coefficient must not be divisible by p^2".into(),
            ));
        }
        let unram_poly = residue.poly().to_vec();
        let spec =
            PadicRingSpec { p, f_res, unram_poly, eis: Some(eis), precision_pi, residue };
        spec.check_modulus_bound()?;
        Ok(Arc::new(spec))
    }

    fn check_modulus_bound(&self) -> Result<(), CoreError> {
        // Coordinates are serialized as u64; keep p^W < 2^63.
        let w = self.coord_modulus_exp(self.precision_pi, 0);
        if (w as f64) * (self.p as f64).log2() >= 63.0 {
            return Err(CoreError::BadParameter(format!(
                "precision {} too large for p = {}",
                self.precision_pi, self.p
            )));
        }
        Ok(())
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn f_res(&self) -> usize {
        self.f_res
    }

    /// Ramification index `e`.
    pub fn e(&self) -> usize {
        self.eis.as_ref().map_or(1, |v| v.len())
    }

    /// `[K : Q_p] = f_res * e`.
    pub fn dim(&self) -> usize {
        self.f_res * self.e()
    }

    /// Residue field cardinality `q = p^f_res`.
    pub fn q(&self) -> u64 {
        self.p.pow(self.f_res as u32)
    }

    pub fn precision(&self) -> u32 {
        self.precision_pi
    }

    pub fn residue_field(&self) -> &Arc<FqCtx> {
        &self.residue
    }

    pub fn eis_coeffs(&self) -> Option<&Vec<Vec<u64>>> {
        self.eis.as_ref()
    }

    /// `ceil((m - j)/e)`: p-exponent to which the coordinate of `u^i pi^j` of
    /// an element known mod `pi^m` is meaningful.
    fn coord_modulus_exp(&self, m: u32, j: usize) -> u32 {
        let e = self.e() as u32;
        let j = j as u32;
        if j >= m {
            0
        } else {
            (m - j).div_ceil(e)
        }
    }

    fn p_pow(&self, w: u32) -> u128 {
        (self.p as u128).pow(w)
    }

    pub fn zero(self: &Arc<Self>, prec: u32) -> PadicElement {
        PadicElement { spec: self.clone(), prec, coords: vec![0; self.dim()] }
    }

    pub fn one(self: &Arc<Self>, prec: u32) -> PadicElement {
        self.from_u64(1, prec)
    }

    pub fn from_u64(self: &Arc<Self>, n: u64, prec: u32) -> PadicElement {
        let mut coords = vec![0u128; self.dim()];
        coords[0] = n as u128;
        PadicElement::from_raw(self.clone(), prec, coords)
    }

    pub fn from_i64(self: &Arc<Self>, n: i64, prec: u32) -> PadicElement {
        if n >= 0 {
            self.from_u64(n as u64, prec)
        } else {
            self.from_u64(n.unsigned_abs(), prec).neg()
        }
    }

    /// The fixed uniformizer: `p` when unramified, the Eisenstein root
    /// otherwise.
    pub fn uniformizer(self: &Arc<Self>, prec: u32) -> PadicElement {
        if self.e() == 1 {
            self.from_u64(self.p, prec)
        } else {
            let mut coords = vec![0u128; self.dim()];
            coords[self.f_res] = 1; // u^0 pi^1
            PadicElement::from_raw(self.clone(), prec, coords)
        }
    }

    /// Element from little-endian coordinates in the `u^i pi^j` basis
    /// (index `j*f_res + i`).
    pub fn from_coords(self: &Arc<Self>, coords: &[u64], prec: u32) -> Result<PadicElement, CoreError> {
        if coords.len() != self.dim() {
            return Err(CoreError::BadParameter(format!(
                "expected {} coordinates, got {}",
                self.dim(),
                coords.len()
            )));
        }
        Ok(PadicElement::from_raw(self.clone(), prec, coords.iter().map(|&c| c as u128).collect()))
    }

    /// Canonical lift of a residue-field element at the given precision.
    pub fn lift_residue(self: &Arc<Self>, c: &FqElem, prec: u32) -> PadicElement {
        let mut coords = vec![0u128; self.dim()];
        for (i, &ci) in c.coords().iter().enumerate() {
            coords[i] = ci as u128;
        }
        PadicElement::from_raw(self.clone(), prec, coords)
    }

    /// The element `h = p/pi` of a ramified spec, from the Eisenstein
    /// relation `pi^e + c_{e-1} pi^{e-1} + ... + c_0 = 0` with `c_0 = p*w`.
    fn p_over_pi(self: &Arc<Self>, prec: u32) -> Result<PadicElement, CoreError> {
        let f = self.f_res;
        let e = self.e();
        let eis = self.eis.as_ref().expect("ramified spec");
        let p = self.p as u128;
        let mut w_coords = vec![0u128; self.dim()];
        for i in 0..f {
            w_coords[i] = (eis[0][i] as u128) / p;
        }
        let w = PadicElement::from_raw(self.clone(), prec, w_coords);
        let w_inv = w.inv()?;
        // s = c_1 + c_2 pi + ... + c_{e-1} pi^{e-2} + pi^{e-1}
        let mut s_coords = vec![0u128; self.dim()];
        for (j, cj) in eis.iter().enumerate().skip(1) {
            for i in 0..f {
                s_coords[(j - 1) * f + i] = cj[i] as u128;
            }
        }
        s_coords[(e - 1) * f] += 1;
        let s = PadicElement::from_raw(self.clone(), prec, s_coords);
        Ok(w_inv.mul(&s)?.neg())
    }

    /// Teichmuller representative of `c` at precision `pi^m`: the unique lift
    /// with `x^q = x`.
    pub fn teichmuller_lift(self: &Arc<Self>, c: &FqElem, m: u32) -> PadicElement {
        let mut x = self.lift_residue(c, m);
        // x -> x^q gains at least one pi-digit per step.
        for _ in 0..=2 * m + 2 {
            let next = x.pow(self.q());
            if next == x {
                return x;
            }
            x = next;
        }
        x
    }
}

/// Element of `O_K` known modulo `pi^prec`.
#[derive(Clone)]
pub struct PadicElement {
    spec: Arc<PadicRingSpec>,
    prec: u32,
    coords: Vec<u128>,
}

impl PartialEq for PadicElement {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.prec == other.prec && self.coords == other.coords
    }
}

impl Eq for PadicElement {}

impl fmt::Debug for PadicElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Padic{:?}+O(pi^{})", self.coords, self.prec)
    }
}

/// Valuation of an element only known at finite precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Valuation {
    Finite(u32),
    /// Zero at working precision: valuation at least the stored precision.
    AtLeast(u32),
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }

    /// Lower bound usable in comparisons.
    pub fn lower_bound(self) -> u32 {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => v,
        }
    }
}

impl PadicElement {
    fn from_raw(spec: Arc<PadicRingSpec>, prec: u32, coords: Vec<u128>) -> Self {
        let mut el = PadicElement { spec, prec, coords };
        el.canonicalize();
        el
    }

    fn canonicalize(&mut self) {
        let f = self.spec.f_res;
        for (idx, c) in self.coords.iter_mut().enumerate() {
            let j = idx / f;
            let w = self.spec.coord_modulus_exp(self.prec, j);
            let m = self.spec.p_pow(w);
            *c %= m;
        }
    }

    pub fn spec(&self) -> &Arc<PadicRingSpec> {
        &self.spec
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn coords_u64(&self) -> Vec<u64> {
        self.coords.iter().map(|&c| c as u64).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Re-truncates to a lower precision (raising is not possible).
    pub fn truncate(&self, prec: u32) -> PadicElement {
        assert!(prec <= self.prec, "cannot gain precision by truncation");
        PadicElement::from_raw(self.spec.clone(), prec, self.coords.clone())
    }

    fn check_same_spec(&self, other: &PadicElement) -> Result<(), CoreError> {
        if self.spec == other.spec {
            Ok(())
        } else {
            Err(CoreError::SpecMismatch)
        }
    }

    pub fn add(&self, other: &PadicElement) -> Result<PadicElement, CoreError> {
        self.check_same_spec(other)?;
        let prec = self.prec.min(other.prec);
        let coords = self.coords.iter().zip(&other.coords).map(|(&a, &b)| a + b).collect();
        Ok(PadicElement::from_raw(self.spec.clone(), prec, coords))
    }

    pub fn sub(&self, other: &PadicElement) -> Result<PadicElement, CoreError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> PadicElement {
        let f = self.spec.f_res;
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                let w = self.spec.coord_modulus_exp(self.prec, idx / f);
                let m = self.spec.p_pow(w);
                (m - c % m) % m
            })
            .collect();
        PadicElement::from_raw(self.spec.clone(), self.prec, coords)
    }

    pub fn mul(&self, other: &PadicElement) -> Result<PadicElement, CoreError> {
        self.check_same_spec(other)?;
        let prec = self.prec.min(other.prec);
        let spec = &self.spec;
        let f = spec.f_res;
        let e = spec.e();
        let w = spec.coord_modulus_exp(prec, 0);
        let modulus = spec.p_pow(w);
        // rows[j] = u-coefficients of the pi^j part, u-degree already < f.
        let mut rows = vec![vec![0u128; f]; 2 * e - 1];
        let mut scratch = vec![0u128; 2 * f - 1];
        for ja in 0..e {
            for jb in 0..e {
                for s in scratch.iter_mut() {
                    *s = 0;
                }
                let mut nontrivial = false;
                for ia in 0..f {
                    let a = self.coords[ja * f + ia];
                    if a == 0 {
                        continue;
                    }
                    for ib in 0..f {
                        let b = other.coords[jb * f + ib];
                        if b == 0 {
                            continue;
                        }
                        scratch[ia + ib] = (scratch[ia + ib] + a * b % modulus) % modulus;
                        nontrivial = true;
                    }
                }
                if nontrivial {
                    reduce_u(&mut scratch, &spec.unram_poly, modulus, spec.p);
                    let row = &mut rows[ja + jb];
                    for i in 0..f {
                        row[i] = (row[i] + scratch[i]) % modulus;
                    }
                }
            }
        }
        reduce_pi(&mut rows, spec, modulus);
        let mut coords = vec![0u128; spec.dim()];
        for j in 0..e {
            for i in 0..f {
                coords[j * f + i] = rows[j][i];
            }
        }
        Ok(PadicElement::from_raw(spec.clone(), prec, coords))
    }

    pub fn pow(&self, mut n: u64) -> PadicElement {
        let mut base = self.clone();
        let mut acc = self.spec.one(self.prec);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base).expect("same spec");
            }
            base = base.mul(&base).expect("same spec");
            n >>= 1;
        }
        acc
    }

    pub fn scale_u64(&self, c: u64) -> PadicElement {
        let coords = self.coords.iter().map(|&a| a * (c as u128)).collect();
        PadicElement::from_raw(self.spec.clone(), self.prec, coords)
    }

    /// Image in the residue field `F_q`.
    pub fn residue(&self) -> FqElem {
        let f = self.spec.f_res;
        let coords: Vec<u64> =
            (0..f).map(|i| (self.coords[i] % self.spec.p as u128) as u64).collect();
        self.spec.residue.from_coords(&coords).expect("residue coords")
    }

    /// Largest `v <= prec` with `x` in `pi^v O_K`, or `AtLeast(prec)` when the
    /// element vanishes at working precision.
    pub fn valuation(&self) -> Valuation {
        let f = self.spec.f_res;
        let e = self.spec.e() as u32;
        let p = self.spec.p as u128;
        let mut best: Option<u32> = None;
        for (idx, &c) in self.coords.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let j = (idx / f) as u32;
            let mut vp = 0u32;
            let mut c = c;
            while c % p == 0 {
                c /= p;
                vp += 1;
            }
            let v = j + e * vp;
            best = Some(best.map_or(v, |b| b.min(v)));
        }
        match best {
            Some(v) if v < self.prec => Valuation::Finite(v),
            _ => Valuation::AtLeast(self.prec),
        }
    }

    /// Multiplicative inverse by Newton lifting from the residue-field
    /// inverse. Fails with `NotAUnit` on elements of positive valuation.
    pub fn inv(&self) -> Result<PadicElement, CoreError> {
        let r = self.residue();
        if r.is_zero() {
            return Err(CoreError::NotAUnit);
        }
        let r_inv = r.inv()?;
        let mut y = self.spec.lift_residue(&r_inv, self.prec);
        let two = self.spec.from_u64(2, self.prec);
        // Quadratic convergence: ceil(log2(prec)) + 1 steps.
        let steps = 64 - u64::from(self.prec.max(1)).leading_zeros() + 1;
        for _ in 0..steps {
            let t = two.sub(&self.mul(&y)?)?;
            y = y.mul(&t)?;
        }
        debug_assert!(self.mul(&y).unwrap() == self.spec.one(self.prec));
        Ok(y)
    }

    /// Exact division by `pi^k`; errors unless every coordinate supports it.
    pub fn div_pi_exact(&self, k: u32) -> Result<PadicElement, CoreError> {
        let mut out = self.clone();
        for _ in 0..k {
            out = out.div_pi_once()?;
        }
        Ok(out)
    }

    fn div_pi_once(&self) -> Result<PadicElement, CoreError> {
        let spec = &self.spec;
        let f = spec.f_res;
        let e = spec.e();
        let p = spec.p as u128;
        if self.prec == 0 {
            return Err(CoreError::InsufficientPrecision { needed: 1, available: 0 });
        }
        let mut coords = vec![0u128; spec.dim()];
        if e == 1 {
            for (i, &c) in self.coords.iter().enumerate() {
                if c % p != 0 {
                    return Err(CoreError::BadParameter("element not divisible by pi".into()));
                }
                coords[i] = c / p;
            }
            return Ok(PadicElement::from_raw(spec.clone(), self.prec - 1, coords));
        }
        // x = p*t + sum_{j>=1} pi^j y_j with t in the unramified layer; then
        // x/pi = h*t + sum_{j>=1} pi^(j-1) y_j, where p = pi*h comes from the
        // Eisenstein relation: h = -w^{-1}(c_1 + c_2 pi + ... + pi^{e-1}),
        // w = c_0/p.
        for i in 0..f {
            if self.coords[i] % p != 0 {
                return Err(CoreError::BadParameter("element not divisible by pi".into()));
            }
        }
        let mut t_coords = vec![0u128; spec.dim()];
        for i in 0..f {
            t_coords[i] = self.coords[i] / p;
        }
        let t = PadicElement::from_raw(spec.clone(), self.prec - 1, t_coords);
        for j in 1..e {
            for i in 0..f {
                coords[(j - 1) * f + i] = self.coords[j * f + i];
            }
        }
        let shifted = PadicElement::from_raw(spec.clone(), self.prec - 1, coords);
        let h = spec.p_over_pi(self.prec - 1)?;
        h.mul(&t)?.add(&shifted)
    }
}

/// Reduces a u-coefficient vector of degree up to `2f-2` modulo the defining
/// polynomial, in place; the tail is zeroed.
fn reduce_u(buf: &mut [u128], poly: &[u64], modulus: u128, _p: u64) {
    let f = poly.len();
    for k in (f..buf.len()).rev() {
        let c = buf[k];
        if c == 0 {
            continue;
        }
        buf[k] = 0;
        for (i, &m) in poly.iter().enumerate() {
            if m == 0 {
                continue;
            }
            // u^f = -poly  =>  u^k picks up (modulus - m) * c at u^(k-f+i)
            let sub = (modulus - (m as u128) % modulus) % modulus;
            buf[k - f + i] = (buf[k - f + i] + c * sub % modulus) % modulus;
        }
    }
}

/// Reduces pi-degree >= e rows via the Eisenstein relation, in place.
fn reduce_pi(rows: &mut [Vec<u128>], spec: &PadicRingSpec, modulus: u128) {
    let e = spec.e();
    if e == 1 {
        return;
    }
    let f = spec.f_res;
    let eis = spec.eis.as_ref().expect("ramified spec");
    for k in (e..rows.len()).rev() {
        if rows[k].iter().all(|&c| c == 0) {
            continue;
        }
        let top = std::mem::replace(&mut rows[k], vec![0u128; f]);
        // pi^k = pi^(k-e) * (-(c_0 + c_1 pi + ... + c_{e-1} pi^{e-1}))
        for (j, cj) in eis.iter().enumerate() {
            // multiply `top` (a u-vector) by -c_j (a u-vector), add at row k-e+j
            let mut scratch = vec![0u128; 2 * f - 1];
            for (ia, &a) in top.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (ib, &b) in cj.iter().enumerate() {
                    if b == 0 {
                        continue;
                    }
                    let nb = (modulus - (b as u128) % modulus) % modulus;
                    scratch[ia + ib] = (scratch[ia + ib] + a * nb % modulus) % modulus;
                }
            }
            reduce_u(&mut scratch, &spec.unram_poly, modulus, spec.p);
            let row = &mut rows[k - e + j];
            for i in 0..f {
                row[i] = (row[i] + scratch[i]) % modulus;
            }
        }
    }
}

/// Arithmetic dispatch used by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// `x op y` with exact precision tracking.
pub fn padic_arith(x: &PadicElement, y: &PadicElement, op: ArithOp) -> Result<PadicElement, CoreError> {
    match op {
        ArithOp::Add => x.add(y),
        ArithOp::Sub => x.sub(y),
        ArithOp::Mul => x.mul(y),
    }
}

/// Serialized form: `{"p", "f_res", "eis", "prec", "coords"}` with coords
/// little-endian in the `u^i pi^j` power basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PadicElementJson {
    pub p: u64,
    pub f_res: usize,
    pub eis: Option<Vec<Vec<u64>>>,
    pub prec: u32,
    pub coords: Vec<u64>,
}

impl PadicElementJson {
    pub fn encode(el: &PadicElement) -> Self {
        let spec = el.spec();
        PadicElementJson {
            p: spec.p(),
            f_res: spec.f_res(),
            eis: spec.eis_coeffs().cloned(),
            prec: el.precision(),
            coords: el.coords_u64(),
        }
    }

    pub fn decode(&self) -> Result<PadicElement, CoreError> {
        let spec = match &self.eis {
            None => PadicRingSpec::unramified(self.p, self.f_res, self.prec)?,
            Some(eis) => PadicRingSpec::eisenstein(self.p, self.f_res, eis.clone(), self.prec)?,
        };
        spec.from_coords(&self.coords, self.prec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_one_one_in_z2() {
        let z2 = PadicRingSpec::qp(2, 4).unwrap();
        let one = z2.one(4);
        let two = padic_arith(&one, &one, ArithOp::Add).unwrap();
        assert_eq!(two.coords_u64(), vec![2]);
    }

    #[test]
    fn pi_times_pi_prec_min() {
        let z5 = PadicRingSpec::qp(5, 4).unwrap();
        let pi = z5.uniformizer(4);
        let pi3 = z5.uniformizer(3);
        let sq = pi.mul(&pi3).unwrap();
        assert_eq!(sq.precision(), 3);
        assert_eq!(sq.coords_u64(), vec![25]);
    }

    #[test]
    fn mul_matches_integer_oracle_z3() {
        // oracle: big-integer arithmetic mod 3^5
        let z3 = PadicRingSpec::qp(3, 5).unwrap();
        let m = 3u128.pow(5);
        for a in [1u64, 7, 52, 130, 241] {
            for b in [2u64, 11, 88, 177, 200] {
                let x = z3.from_u64(a, 5);
                let y = z3.from_u64(b, 5);
                let prod = x.mul(&y).unwrap();
                assert_eq!(prod.coords_u64(), vec![((a as u128 * b as u128) % m) as u64]);
            }
        }
    }

    #[test]
    fn inv_3_mod_16() {
        // frozen from extended Euclid mod 2^4: 3 * 11 = 33 = 1 mod 16
        let z2 = PadicRingSpec::qp(2, 4).unwrap();
        let three = z2.from_u64(3, 4);
        assert_eq!(three.inv().unwrap().coords_u64(), vec![11]);
        assert!(z2.one(4).inv().unwrap() == z2.one(4));
        assert!(matches!(z2.uniformizer(4).inv(), Err(CoreError::NotAUnit)));
    }

    #[test]
    fn valuations() {
        let z3 = PadicRingSpec::qp(3, 6).unwrap();
        let pi2 = z3.uniformizer(6).pow(2);
        assert_eq!(pi2.valuation(), Valuation::Finite(2));
        assert_eq!(z3.from_u64(7, 6).valuation(), Valuation::Finite(0));
        assert_eq!(z3.zero(6).valuation(), Valuation::AtLeast(6));
    }

    #[test]
    fn eisenstein_v_of_p_is_e() {
        // pi^2 + 2 = 0, so v(2) = 2 and pi^2 = -2.
        let spec = PadicRingSpec::eisenstein(2, 1, vec![vec![2], vec![0]], 6).unwrap();
        let two = spec.from_u64(2, 6);
        assert_eq!(two.valuation(), Valuation::Finite(2));
        let pi = spec.uniformizer(6);
        assert_eq!(pi.pow(2).valuation(), Valuation::Finite(2));
        // pi^2 = -c_0 = -2
        assert_eq!(pi.pow(2), two.neg());
        // p/pi = -pi here, and (p/pi)*pi = p again
        let h = two.div_pi_exact(1).unwrap();
        assert_eq!(h.mul(&pi.truncate(5)).unwrap(), two.truncate(5));
    }

    #[test]
    fn eisenstein_mul_associative() {
        // pi^2 + 2pi + 2 = 0 over Z_2 (Eisenstein), a genuinely mixed case.
        let spec = PadicRingSpec::eisenstein(2, 1, vec![vec![2], vec![2]], 8).unwrap();
        let pi = spec.uniformizer(8);
        let a = spec.from_u64(3, 8).add(&pi).unwrap();
        let b = spec.from_u64(5, 8).add(&pi.pow(3)).unwrap();
        let c = pi.add(&spec.one(8)).unwrap();
        let lhs = a.mul(&b).unwrap().mul(&c).unwrap();
        let rhs = a.mul(&b.mul(&c).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        // distributivity
        let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
        let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn teichmuller_q4() {
        // generator g of F_4^x lifts to the unique cube root of 1 above g
        let spec = PadicRingSpec::unramified(2, 2, 3).unwrap();
        let g = spec.residue_field().gen();
        let t = spec.teichmuller_lift(&g, 3);
        assert_eq!(t.pow(4), t);
        assert_eq!(t.residue(), g);
        assert_eq!(t.pow(3), spec.one(3));
        // 0 and 1 are fixed
        assert_eq!(spec.teichmuller_lift(&spec.residue_field().zero(), 3), spec.zero(3));
        assert_eq!(spec.teichmuller_lift(&spec.residue_field().one(), 3), spec.one(3));
    }

    #[test]
    fn teichmuller_in_ramified_spec() {
        // pi^2 + 2pi + 2 = 0 over Q_2, residue field F_2: lifts of 0 and 1
        let spec = PadicRingSpec::eisenstein(2, 1, vec![vec![2], vec![2]], 6).unwrap();
        for c in spec.residue_field().all_elements() {
            let t = spec.teichmuller_lift(&c, 6);
            assert_eq!(t.pow(2), t);
            assert_eq!(t.residue(), c);
        }
    }

    #[test]
    fn teichmuller_minus_one_in_z3() {
        // c = 2 in F_3 is -1; its Teichmuller lift is exactly -1.
        let spec = PadicRingSpec::qp(3, 5).unwrap();
        let c = spec.residue_field().from_u64(2);
        let t = spec.teichmuller_lift(&c, 5);
        assert_eq!(t, spec.one(5).neg());
    }

    #[test]
    fn inv_involutive_on_units() {
        let spec = PadicRingSpec::unramified(3, 2, 5).unwrap();
        for seed in [1u64, 2, 5, 7, 11] {
            let u = spec.from_coords(&[seed % 243, (seed * 31 + 1) % 243], 5).unwrap();
            if u.residue().is_zero() {
                continue;
            }
            assert_eq!(u.inv().unwrap().inv().unwrap(), u);
        }
    }

    #[test]
    fn valuation_additive() {
        let spec = PadicRingSpec::qp(5, 8).unwrap();
        let x = spec.from_u64(50, 8); // v = 2
        let y = spec.from_u64(15, 8); // v = 1
        let xy = x.mul(&y).unwrap();
        assert_eq!(xy.valuation(), Valuation::Finite(3));
    }

    #[test]
    fn teichmuller_fixed_by_q_power_all_residues() {
        // x^q = x for every residue and every precision up to 8
        for (p, f) in [(2u64, 2usize), (3, 1), (2, 3)] {
            let spec = PadicRingSpec::unramified(p, f, 8).unwrap();
            for m in 1..=8u32 {
                for c in spec.residue_field().all_elements() {
                    let t = spec.teichmuller_lift(&c, m);
                    assert_eq!(t.pow(spec.q()), t, "p={p}, f={f}, m={m}");
                    assert_eq!(t.residue(), c);
                }
            }
        }
    }

    #[test]
    fn json_roundtrip() {
        let spec = PadicRingSpec::eisenstein(2, 2, vec![vec![2, 0], vec![0, 2]], 4).unwrap();
        let x = spec.from_coords(&[3, 1, 2, 0], 4).unwrap();
        let j = PadicElementJson::encode(&x);
        let y = j.decode().unwrap();
        assert_eq!(x, y);
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn arb_element() -> impl Strategy<Value = (u64, u64, u64)> {
        (0u64..6561, 0u64..6561, 0u64..6561)
    }

    proptest! {
        /// Ring axioms at common precision for randomized triples over Z_3.
        #[test]
        fn ring_axioms_z3((a, b, c) in arb_element()) {
            let spec = PadicRingSpec::qp(3, 8).unwrap();
            let x = spec.from_u64(a, 8);
            let y = spec.from_u64(b, 8);
            let z = spec.from_u64(c, 8);
            let assoc_l = x.mul(&y).unwrap().mul(&z).unwrap();
            let assoc_r = x.mul(&y.mul(&z).unwrap()).unwrap();
            prop_assert_eq!(assoc_l, assoc_r);
            let dist_l = x.mul(&y.add(&z).unwrap()).unwrap();
            let dist_r = x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap();
            prop_assert_eq!(dist_l, dist_r);
            let comm_a = x.add(&y).unwrap();
            let comm_b = y.add(&x).unwrap();
            prop_assert_eq!(comm_a, comm_b);
        }

        /// v(xy) = v(x) + v(y) whenever both sit below half the precision.
        #[test]
        fn valuation_additive_random((a, b) in (1u64..4096, 1u64..4096)) {
            let spec = PadicRingSpec::qp(2, 12).unwrap();
            let x = spec.from_u64(a, 12);
            let y = spec.from_u64(b, 12);
            let (Valuation::Finite(va), Valuation::Finite(vb)) = (x.valuation(), y.valuation())
            else {
                return Ok(());
            };
            prop_assume!(va < 6 && vb < 6);
            prop_assert_eq!(x.mul(&y).unwrap().valuation(), Valuation::Finite(va + vb));
        }

        /// Double inversion is the identity on units.
        #[test]
        fn inv_involutive(a in 1u64..100000) {
            let spec = PadicRingSpec::qp(5, 7).unwrap();
            let x = spec.from_u64(a, 7);
            prop_assume!(!x.residue().is_zero());
            prop_assert_eq!(x.inv().unwrap().inv().unwrap(), x);
        }
    }
}
