//! Truncated formal power series over `O_K` in 1 to 3 variables.
//!
//! A series is stored sparsely with a total-degree cap and a pi-precision;
//! every operation is correct modulo `(pi^prec, total degree > deg_cap)`.
//! Terms are kept under total-degree-then-lex order, which is also the
//! canonical serialization order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::padic::{PadicElement, PadicRingSpec};

/// Exponent vector ordered by total degree, then lexicographically.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total().cmp(&other.total()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse truncated power series.
#[derive(Clone, PartialEq, Debug)]
pub struct TruncatedSeries {
    spec: Arc<PadicRingSpec>,
    num_vars: usize,
    deg_cap: u32,
    prec: u32,
    terms: BTreeMap<Monomial, PadicElement>,
}

impl TruncatedSeries {
    pub fn zero(spec: &Arc<PadicRingSpec>, num_vars: usize, deg_cap: u32, prec: u32) -> Self {
        assert!((1..=3).contains(&num_vars), "1 to 3 variables supported");
        TruncatedSeries { spec: spec.clone(), num_vars, deg_cap, prec, terms: BTreeMap::new() }
    }

    /// The variable `T_i` (0-based).
    pub fn var(spec: &Arc<PadicRingSpec>, num_vars: usize, i: usize, deg_cap: u32, prec: u32) -> Self {
        let mut s = Self::zero(spec, num_vars, deg_cap, prec);
        let mut exp = vec![0u32; num_vars];
        exp[i] = 1;
        s.set_term(Monomial(exp), spec.one(prec));
        s
    }

    pub fn constant(spec: &Arc<PadicRingSpec>, num_vars: usize, c: PadicElement, deg_cap: u32, prec: u32) -> Self {
        let mut s = Self::zero(spec, num_vars, deg_cap, prec);
        s.set_term(Monomial(vec![0; num_vars]), c.truncate(prec.min(c.precision())));
        s
    }

    pub fn spec(&self) -> &Arc<PadicRingSpec> {
        &self.spec
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn deg_cap(&self) -> u32 {
        self.deg_cap
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &PadicElement)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: &[u32]) -> PadicElement {
        self.terms
            .get(&Monomial(exp.to_vec()))
            .cloned()
            .unwrap_or_else(|| self.spec.zero(self.prec))
    }

    fn set_term(&mut self, m: Monomial, c: PadicElement) {
        debug_assert_eq!(m.0.len(), self.num_vars);
        if m.total() <= self.deg_cap && !c.is_zero() {
            self.terms.insert(m, c);
        }
    }

    /// Re-truncates to a smaller cap and/or precision.
    pub fn truncated(&self, deg_cap: u32, prec: u32) -> Self {
        assert!(prec <= self.prec && deg_cap <= self.deg_cap);
        let mut out = Self::zero(&self.spec, self.num_vars, deg_cap, prec);
        for (m, c) in &self.terms {
            out.set_term(m.clone(), c.truncate(prec));
        }
        out
    }

    pub fn has_zero_constant_term(&self) -> bool {
        self.coeff(&vec![0; self.num_vars]).is_zero()
    }

    pub fn add(&self, other: &Self) -> Result<Self, CoreError> {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CoreError> {
        self.combine(other, true)
    }

    fn combine(&self, other: &Self, negate: bool) -> Result<Self, CoreError> {
        if self.spec != other.spec || self.num_vars != other.num_vars {
            return Err(CoreError::SpecMismatch);
        }
        let cap = self.deg_cap.min(other.deg_cap);
        let prec = self.prec.min(other.prec);
        let mut out = Self::zero(&self.spec, self.num_vars, cap, prec);
        for (m, c) in &self.terms {
            out.set_term(m.clone(), c.truncate(prec));
        }
        for (m, c) in &other.terms {
            let c = if negate { c.neg() } else { c.clone() };
            let cur = out.coeff(&m.0);
            let merged = cur.add(&c)?;
            if merged.is_zero() {
                out.terms.remove(m);
            } else {
                out.set_term(m.clone(), merged);
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(&self.spec, self.num_vars, self.deg_cap, self.prec);
        for (m, c) in &self.terms {
            out.set_term(m.clone(), c.neg());
        }
        out
    }

    pub fn scale(&self, c: &PadicElement) -> Result<Self, CoreError> {
        let prec = self.prec.min(c.precision());
        let mut out = Self::zero(&self.spec, self.num_vars, self.deg_cap, prec);
        for (m, co) in &self.terms {
            out.set_term(m.clone(), co.mul(c)?);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, CoreError> {
        if self.spec != other.spec || self.num_vars != other.num_vars {
            return Err(CoreError::SpecMismatch);
        }
        let cap = self.deg_cap.min(other.deg_cap);
        let prec = self.prec.min(other.prec);
        let mut acc: BTreeMap<Monomial, PadicElement> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            let ta = ma.total();
            if ta > cap {
                continue;
            }
            for (mb, cb) in &other.terms {
                if ta + mb.total() > cap {
                    continue;
                }
                let exp: Vec<u32> = ma.0.iter().zip(&mb.0).map(|(a, b)| a + b).collect();
                let prod = ca.mul(cb)?;
                let key = Monomial(exp);
                match acc.get_mut(&key) {
                    Some(cur) => *cur = cur.add(&prod)?,
                    None => {
                        acc.insert(key, prod);
                    }
                }
            }
        }
        let mut out = Self::zero(&self.spec, self.num_vars, cap, prec);
        for (m, c) in acc {
            out.set_term(m, c.truncate(prec));
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Result<Self, CoreError> {
        let mut acc = Self::constant(&self.spec, self.num_vars, self.spec.one(self.prec), self.deg_cap, self.prec);
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Extracts the homogeneous part of the given total degree.
    pub fn homogeneous_part(&self, degree: u32) -> Self {
        let mut out = Self::zero(&self.spec, self.num_vars, self.deg_cap, self.prec);
        for (m, c) in &self.terms {
            if m.total() == degree {
                out.set_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// Smallest total degree with a nonzero term.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.total()).min()
    }

    /// Re-embeds into a series in `new_num_vars` variables, sending variable
    /// `i` to variable `var_map[i]`.
    pub fn embed_vars(&self, new_num_vars: usize, var_map: &[usize]) -> Self {
        assert_eq!(var_map.len(), self.num_vars);
        let mut out = Self::zero(&self.spec, new_num_vars, self.deg_cap, self.prec);
        for (m, c) in &self.terms {
            let mut exp = vec![0u32; new_num_vars];
            for (i, &e) in m.0.iter().enumerate() {
                exp[var_map[i]] += e;
            }
            out.set_term(Monomial(exp), c.clone());
        }
        out
    }

    /// Substitutes `inners[i]` for variable `i`. Every inner must have zero
    /// constant term; the result is correct modulo `(pi^prec, deg > cap)`.
    pub fn compose(&self, inners: &[&TruncatedSeries]) -> Result<Self, CoreError> {
        if inners.len() != self.num_vars {
            return Err(CoreError::BadParameter(format!(
                "outer series has {} variables but {} inner series given",
                self.num_vars,
                inners.len()
            )));
        }
        let nv = inners[0].num_vars;
        let mut cap = self.deg_cap;
        let mut prec = self.prec;
        for inner in inners {
            if inner.spec != self.spec || inner.num_vars != nv {
                return Err(CoreError::SpecMismatch);
            }
            if !inner.has_zero_constant_term() {
                return Err(CoreError::NotComposable);
            }
            cap = cap.min(inner.deg_cap);
            prec = prec.min(inner.prec);
        }
        // Cache powers of each inner series.
        let one = Self::constant(&self.spec, nv, self.spec.one(prec), cap, prec);
        let mut powers: Vec<Vec<TruncatedSeries>> = inners.iter().map(|_| vec![one.clone()]).collect();
        let mut out = Self::zero(&self.spec, nv, cap, prec);
        for (m, c) in &self.terms {
            // Inner series have min degree >= 1, so exponents beyond the cap
            // contribute nothing.
            if m.total() > cap {
                continue;
            }
            let mut term = one.clone();
            for (i, &e) in m.0.iter().enumerate() {
                while powers[i].len() <= e as usize {
                    let last = powers[i].last().unwrap();
                    let next = last.mul(inners[i])?.truncated(cap, prec);
                    powers[i].push(next);
                }
                term = term.mul(&powers[i][e as usize])?;
            }
            out = out.add(&term.scale(c)?)?;
        }
        Ok(out)
    }

    /// Equality after truncating both sides to common cap and precision.
    pub fn eq_at_common_truncation(&self, other: &Self) -> bool {
        let cap = self.deg_cap.min(other.deg_cap);
        let prec = self.prec.min(other.prec);
        self.truncated(cap, prec) == other.truncated(cap, prec)
    }
}

/// Canonical serialized form: `{"vars", "cap", "prec", "terms"}` with terms
/// sorted by total degree then lexicographically, each `[exp..., coords...]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesJson {
    pub vars: usize,
    pub cap: u32,
    pub prec: u32,
    /// Each entry: exponent vector followed by the coefficient coordinates.
    pub terms: Vec<(Vec<u32>, Vec<u64>)>,
}

impl SeriesJson {
    pub fn encode(s: &TruncatedSeries) -> Self {
        SeriesJson {
            vars: s.num_vars,
            cap: s.deg_cap,
            prec: s.prec,
            terms: s.terms.iter().map(|(m, c)| (m.0.clone(), c.coords_u64())).collect(),
        }
    }

    pub fn decode(&self, spec: &Arc<PadicRingSpec>) -> Result<TruncatedSeries, CoreError> {
        let mut out = TruncatedSeries::zero(spec, self.vars, self.cap, self.prec);
        for (exp, coords) in &self.terms {
            if exp.len() != self.vars {
                return Err(CoreError::BadParameter("exponent arity mismatch".into()));
            }
            let c = spec.from_coords(coords, self.prec)?;
            out.set_term(Monomial(exp.clone()), c);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2(prec: u32) -> Arc<PadicRingSpec> {
        PadicRingSpec::qp(2, prec).unwrap()
    }

    #[test]
    fn monomial_order_total_then_lex() {
        let a = Monomial(vec![0, 2]);
        let b = Monomial(vec![1, 0]);
        let c = Monomial(vec![1, 1]);
        assert!(b < a); // total 1 < 2
        assert!(a < c); // total 2 = 2, lex [0,2] < [1,1]
    }

    #[test]
    fn compose_t_squared_into_t_plus_t2() {
        // outer T^2, inner T + T^2, cap 3: (T+T^2)^2 = T^2 + 2T^3 + (dropped)
        let spec = z2(5);
        let t = TruncatedSeries::var(&spec, 1, 0, 3, 5);
        let inner = t.add(&t.mul(&t).unwrap()).unwrap();
        let outer = TruncatedSeries::var(&spec, 1, 0, 3, 5).pow(2).unwrap();
        let got = outer.compose(&[&inner]).unwrap();
        assert_eq!(got.coeff(&[2]).coords_u64(), vec![1]);
        assert_eq!(got.coeff(&[3]).coords_u64(), vec![2]);
        assert!(got.coeff(&[1]).is_zero());
    }

    #[test]
    fn compose_identity() {
        let spec = z2(5);
        let t = TruncatedSeries::var(&spec, 1, 0, 4, 5);
        // f = T^2 + 2T composed with T is f
        let f = t.pow(2).unwrap().add(&t.scale(&spec.from_u64(2, 5)).unwrap()).unwrap();
        assert_eq!(f.compose(&[&t]).unwrap(), f);
    }

    #[test]
    fn compose_f_with_f_matches_expansion() {
        // f = T^2 + 2T over Z_2, cap 4: f(f(T)) = T^4 + 4T^3 + 6T^2 + 4T
        let spec = z2(6);
        let t = TruncatedSeries::var(&spec, 1, 0, 4, 6);
        let f = t.pow(2).unwrap().add(&t.scale(&spec.from_u64(2, 6)).unwrap()).unwrap();
        let ff = f.compose(&[&f]).unwrap();
        assert_eq!(ff.coeff(&[1]).coords_u64(), vec![4]);
        assert_eq!(ff.coeff(&[2]).coords_u64(), vec![6]);
        assert_eq!(ff.coeff(&[3]).coords_u64(), vec![4]);
        assert_eq!(ff.coeff(&[4]).coords_u64(), vec![1]);
    }

    #[test]
    fn compose_rejects_constant_term() {
        let spec = z2(4);
        let t = TruncatedSeries::var(&spec, 1, 0, 4, 4);
        let bad = t.add(&TruncatedSeries::constant(&spec, 1, spec.one(4), 4, 4)).unwrap();
        assert!(matches!(t.compose(&[&bad]), Err(CoreError::NotComposable)));
    }

    #[test]
    fn json_canonical_order() {
        let spec = z2(4);
        let t1 = TruncatedSeries::var(&spec, 2, 0, 4, 4);
        let t2 = TruncatedSeries::var(&spec, 2, 1, 4, 4);
        let s = t2.mul(&t2).unwrap().add(&t1).unwrap();
        let j = SeriesJson::encode(&s);
        assert_eq!(j.terms[0].0, vec![1, 0]);
        assert_eq!(j.terms[1].0, vec![0, 2]);
        let back = j.decode(&spec).unwrap();
        assert_eq!(back, s);
    }
}
