//! Finite free etale phi- and (phi, Gamma)-modules over the truncated
//! coefficient rings, with the finite-etale algebra presentation of the
//! Frobenius-fixed-point functor and a box-bounded fixed point solver.
//!
//! Matrix convention: the structure matrix `A` of an operator lists in row
//! `i` the coordinates of the image of the `i`-th basis vector, so on
//! coordinate columns the operator acts as `v -> transpose(A) * twist(v)`
//! where `twist` is the semilinear twist of the operator. Fixed vectors of
//! the `r`-power layer therefore satisfy `v_j^r = sum_i B[i][j] v_i` with
//! `B = A^{-1}`, which is exactly the relation family of the representing
//! algebra `R[T_1..T_d]/(T_j^r - sum_i B[i][j] T_i)`; the Jacobian of that
//! family at any zero is `B` up to sign, hence invertible.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::CoreError;
use crate::fq::{FpMatrix, FqCtx, FqElem};
use crate::multivar::{act_gamma, act_phi, MultivarLaurent, RingSpecDelta};
use crate::residue::LaurentPoly;

// ---------------------------------------------------------------------------
// Generic small-matrix helpers (no division: determinant and adjugate)
// ---------------------------------------------------------------------------

pub(crate) trait Entry: Clone {
    fn e_add(&self, other: &Self) -> Self;
    fn e_mul(&self, other: &Self) -> Self;
    fn e_neg(&self) -> Self;
    fn e_is_zero(&self) -> bool;
}

impl Entry for LaurentPoly {
    fn e_add(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn e_mul(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn e_neg(&self) -> Self {
        self.neg()
    }
    fn e_is_zero(&self) -> bool {
        self.is_zero()
    }
}

impl Entry for MultivarLaurent {
    fn e_add(&self, other: &Self) -> Self {
        self.add(other).expect("matrix entries share a spec")
    }
    fn e_mul(&self, other: &Self) -> Self {
        // Entries may roam the slack region during matrix algebra.
        self.mul_widened(other).expect("matrix entries share a spec")
    }
    fn e_neg(&self) -> Self {
        self.neg()
    }
    fn e_is_zero(&self) -> bool {
        self.is_zero()
    }
}

pub type Matrix<T> = Vec<Vec<T>>;

fn mat_mul<T: Entry>(a: &Matrix<T>, b: &Matrix<T>, zero: &T) -> Matrix<T> {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![zero.clone(); m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut acc = zero.clone();
            for t in 0..k {
                acc = acc.e_add(&a[i][t].e_mul(&b[t][j]));
            }
            out[i][j] = acc;
        }
    }
    out
}

fn mat_transpose<T: Clone>(a: &Matrix<T>) -> Matrix<T> {
    let n = a.len();
    let m = a[0].len();
    (0..m).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
}

fn mat_det<T: Entry>(a: &Matrix<T>, zero: &T) -> T {
    let n = a.len();
    match n {
        1 => a[0][0].clone(),
        _ => {
            let mut acc = zero.clone();
            for j in 0..n {
                if a[0][j].e_is_zero() {
                    continue;
                }
                let minor = minor_of(a, 0, j);
                let mut term = a[0][j].e_mul(&mat_det(&minor, zero));
                if j % 2 == 1 {
                    term = term.e_neg();
                }
                acc = acc.e_add(&term);
            }
            acc
        }
    }
}

fn minor_of<T: Clone>(a: &Matrix<T>, row: usize, col: usize) -> Matrix<T> {
    a.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| {
            r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, x)| x.clone()).collect()
        })
        .collect()
}

/// Adjugate: `adj(A) * A = det(A) * Id`.
fn mat_adjugate<T: Entry>(a: &Matrix<T>, zero: &T, one: &T) -> Matrix<T> {
    let n = a.len();
    if n == 1 {
        return vec![vec![one.clone()]];
    }
    let mut out = vec![vec![zero.clone(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor = minor_of(a, j, i);
            let mut c = mat_det(&minor, zero);
            if (i + j) % 2 == 1 {
                c = c.e_neg();
            }
            out[i][j] = c;
        }
    }
    out
}

fn mat_scale<T: Entry>(a: &Matrix<T>, c: &T) -> Matrix<T> {
    a.iter().map(|r| r.iter().map(|x| x.e_mul(c)).collect()).collect()
}

fn kronecker<T: Entry>(a: &Matrix<T>, b: &Matrix<T>, zero: &T) -> Matrix<T> {
    let n = a.len();
    let m = b.len();
    let mut out = vec![vec![zero.clone(); n * m]; n * m];
    for i1 in 0..n {
        for j1 in 0..n {
            for i2 in 0..m {
                for j2 in 0..m {
                    out[i1 * m + i2][j1 * m + j2] = a[i1][j1].e_mul(&b[i2][j2]);
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Residue-level modules
// ---------------------------------------------------------------------------

/// The truncated residue coefficient ring `F_q((X_1..X_n))`-style model:
/// exact Laurent polynomials, with truncated inverses at `trunc_order`.
#[derive(Clone, Debug)]
pub struct ResidueRing {
    pub ctx: Arc<FqCtx>,
    pub nvars: usize,
    /// Total-degree order bounding truncated inversions and comparisons.
    pub trunc_order: i64,
}

impl ResidueRing {
    pub fn new(ctx: &Arc<FqCtx>, nvars: usize, trunc_order: i64) -> Self {
        ResidueRing { ctx: ctx.clone(), nvars, trunc_order }
    }

    pub fn zero(&self) -> LaurentPoly {
        LaurentPoly::zero(&self.ctx, self.nvars)
    }

    pub fn one(&self) -> LaurentPoly {
        LaurentPoly::one(&self.ctx, self.nvars)
    }

    pub fn identity_matrix(&self, d: usize) -> Matrix<LaurentPoly> {
        (0..d)
            .map(|i| (0..d).map(|j| if i == j { self.one() } else { self.zero() }).collect())
            .collect()
    }
}

/// Semilinear operators supported at the residue level.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ResidueOp {
    /// One `q`-Frobenius step on a single variable: `X_a -> X_a^q`,
    /// coefficients fixed (they lie in `F_q`).
    PhiVar(usize),
    /// The global `r = p^t` layer: absolute Frobenius power on everything.
    PhiGlobal,
}

/// Finite free module with semilinear operator matrices at the residue level.
#[derive(Clone, Debug)]
pub struct ResidueModule {
    pub ring: ResidueRing,
    pub rank: usize,
    /// Per-variable q-Frobenius matrices.
    pub phi_mats: BTreeMap<usize, Matrix<LaurentPoly>>,
    /// The r-power layer: `(log_p r, matrix)`.
    pub phi_global: Option<(u32, Matrix<LaurentPoly>)>,
}

impl ResidueModule {
    pub fn trivial_rank_one(ring: &ResidueRing, r_log_p: u32) -> Self {
        let mut m = ResidueModule {
            ring: ring.clone(),
            rank: 1,
            phi_mats: BTreeMap::new(),
            phi_global: Some((r_log_p, vec![vec![ring.one()]])),
        };
        for v in 0..ring.nvars {
            m.phi_mats.insert(v, vec![vec![ring.one()]]);
        }
        m
    }

    /// Applies the semilinear twist of an operator to a ring element.
    pub fn twist(&self, op: &ResidueOp, x: &LaurentPoly) -> LaurentPoly {
        match op {
            ResidueOp::PhiVar(a) => {
                let q = self.ring.ctx.q() as i64;
                let mut powers = vec![1i64; self.ring.nvars];
                powers[*a] = q;
                x.scale_exponents(&powers)
            }
            ResidueOp::PhiGlobal => {
                let (t, _) = self.phi_global.as_ref().expect("global layer present");
                let r = (self.ring.ctx.p() as i64).pow(*t);
                let powers = vec![r; self.ring.nvars];
                x.scale_exponents(&powers).frobenius_coeffs(*t)
            }
        }
    }

    fn ops(&self) -> Vec<(ResidueOp, &Matrix<LaurentPoly>)> {
        let mut out: Vec<(ResidueOp, &Matrix<LaurentPoly>)> =
            self.phi_mats.iter().map(|(v, m)| (ResidueOp::PhiVar(*v), m)).collect();
        if let Some((_, m)) = &self.phi_global {
            out.push((ResidueOp::PhiGlobal, m));
        }
        out
    }

    fn twist_matrix(&self, op: &ResidueOp, m: &Matrix<LaurentPoly>) -> Matrix<LaurentPoly> {
        m.iter().map(|r| r.iter().map(|x| self.twist(op, x)).collect()).collect()
    }

    /// Structure report: etale flags per operator and pairwise compatibility.
    pub fn validate(&self) -> ModuleReport {
        let zero = self.ring.zero();
        let order = self.ring.trunc_order;
        let mut etale = Vec::new();
        for (op, m) in self.ops() {
            let det = mat_det(m, &zero);
            etale.push((format!("{op:?}"), det.min_monomial().is_some()));
        }
        let mut compat = Vec::new();
        let ops = self.ops();
        for i in 0..ops.len() {
            for j in i + 1..ops.len() {
                let (op1, m1) = &ops[i];
                let (op2, m2) = &ops[j];
                // In row storage the composite op2-after-op1 has matrix
                // tw2(A1) * A2, so commuting operators satisfy
                // tw2(A1) A2 = tw1(A2) A1.
                let lhs = mat_mul(&self.twist_matrix(op2, m1), m2, &zero);
                let rhs = mat_mul(&self.twist_matrix(op1, m2), m1, &zero);
                let ok = lhs
                    .iter()
                    .zip(&rhs)
                    .all(|(r1, r2)| r1.iter().zip(r2).all(|(a, b)| a.eq_mod_degree(b, order)));
                compat.push((format!("{op1:?}"), format!("{op2:?}"), ok));
            }
        }
        ModuleReport { etale, compat }
    }

    /// Inverse of a structure matrix via adjugate and unit determinant.
    fn invert_matrix(&self, m: &Matrix<LaurentPoly>) -> Result<Matrix<LaurentPoly>, CoreError> {
        let zero = self.ring.zero();
        let one = self.ring.one();
        let det = mat_det(m, &zero);
        let det_inv = match det.inv_exact() {
            Ok(x) => x,
            Err(_) => det
                .inv_truncated(self.ring.trunc_order)
                .map_err(|_| CoreError::NotEtale("determinant is not a unit".into()))?,
        };
        let adj = mat_adjugate(m, &zero, &one);
        Ok(mat_scale(&adj, &det_inv))
    }

    /// Tensor product: Kronecker structure matrices, operator keys matched.
    pub fn tensor(&self, other: &ResidueModule) -> Result<ResidueModule, CoreError> {
        if self.ring.ctx != other.ring.ctx || self.ring.nvars != other.ring.nvars {
            return Err(CoreError::SpecMismatch);
        }
        let zero = self.ring.zero();
        let mut phi_mats = BTreeMap::new();
        for (v, m1) in &self.phi_mats {
            let m2 = other
                .phi_mats
                .get(v)
                .ok_or_else(|| CoreError::BadParameter("operator sets differ".into()))?;
            phi_mats.insert(*v, kronecker(m1, m2, &zero));
        }
        let phi_global = match (&self.phi_global, &other.phi_global) {
            (Some((t1, m1)), Some((t2, m2))) if t1 == t2 => Some((*t1, kronecker(m1, m2, &zero))),
            (None, None) => None,
            _ => return Err(CoreError::BadParameter("global layers differ".into())),
        };
        Ok(ResidueModule { ring: self.ring.clone(), rank: self.rank * other.rank, phi_mats, phi_global })
    }

    /// Dual module: operator matrices become transposed inverses.
    pub fn dual(&self) -> Result<ResidueModule, CoreError> {
        let mut phi_mats = BTreeMap::new();
        for (v, m) in &self.phi_mats {
            phi_mats.insert(*v, mat_transpose(&self.invert_matrix(m)?));
        }
        let phi_global = match &self.phi_global {
            Some((t, m)) => Some((*t, mat_transpose(&self.invert_matrix(m)?))),
            None => None,
        };
        Ok(ResidueModule { ring: self.ring.clone(), rank: self.rank, phi_mats, phi_global })
    }

    /// Base change along a variable inclusion: entries reinterpreted in a
    /// larger variable set, etaleness re-verified.
    pub fn extend_variables(
        &self,
        target: &ResidueRing,
        var_map: &[usize],
    ) -> Result<ResidueModule, CoreError> {
        if var_map.len() != self.ring.nvars || self.ring.ctx != target.ctx {
            return Err(CoreError::BadParameter("bad variable mapping".into()));
        }
        let map_entry = |x: &LaurentPoly| -> LaurentPoly {
            let mut out = LaurentPoly::zero(&target.ctx, target.nvars);
            for (e, c) in x.terms() {
                let mut exp = vec![0i64; target.nvars];
                for (i, &ei) in e.iter().enumerate() {
                    exp[var_map[i]] += ei;
                }
                let merged = out.coeff(&exp).add(c);
                out.insert_term(exp, merged);
            }
            out
        };
        let phi_mats = self
            .phi_mats
            .iter()
            .map(|(v, m)| {
                (var_map[*v], m.iter().map(|r| r.iter().map(map_entry).collect()).collect())
            })
            .collect();
        let phi_global = self
            .phi_global
            .as_ref()
            .map(|(t, m)| (*t, m.iter().map(|r| r.iter().map(map_entry).collect()).collect()));
        let out = ResidueModule { ring: target.clone(), rank: self.rank, phi_mats, phi_global };
        let report = out.validate();
        if !report.all_etale() {
            return Err(CoreError::NotEtale("image module lost etaleness".into()));
        }
        Ok(out)
    }
}

/// Validation output: per-operator etale flags and pairwise compatibility.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ModuleReport {
    pub etale: Vec<(String, bool)>,
    pub compat: Vec<(String, String, bool)>,
}

impl ModuleReport {
    pub fn all_etale(&self) -> bool {
        self.etale.iter().all(|(_, b)| *b)
    }

    pub fn all_compatible(&self) -> bool {
        self.compat.iter().all(|(_, _, b)| *b)
    }
}

/// The finite etale algebra presentation of the fixed-point functor of the
/// `r`-layer: relations `T_j^r = sum_i B[i][j] T_i` with `B = A^{-1}`, plus
/// the Jacobian certificate (`B` itself).
#[derive(Debug, Clone)]
pub struct SdPresentation {
    pub rank: usize,
    pub r: u64,
    /// `relations[j]` lists the coefficients `(i, B[i][j])`.
    pub relations: Vec<Vec<(usize, LaurentPoly)>>,
    pub jacobian: Matrix<LaurentPoly>,
}

/// Builds the representing-algebra data from the `r`-layer matrix.
pub fn build_sd(module: &ResidueModule) -> Result<SdPresentation, CoreError> {
    let (t, a) = module
        .phi_global
        .as_ref()
        .ok_or_else(|| CoreError::BadParameter("module has no global Frobenius layer".into()))?;
    let report = module.validate();
    if !report.all_etale() {
        return Err(CoreError::NotEtale("structure matrix is not invertible".into()));
    }
    let b = module.invert_matrix(a)?;
    let d = module.rank;
    let relations = (0..d)
        .map(|j| {
            (0..d)
                .filter(|&i| !b[i][j].is_zero())
                .map(|i| (i, b[i][j].clone()))
                .collect()
        })
        .collect();
    Ok(SdPresentation {
        rank: d,
        r: module.ring.ctx.p().pow(*t),
        relations,
        jacobian: b,
    })
}

/// Evaluates the `j`-th relation `T_j^r - sum_i B[i][j] T_i` at a vector.
pub fn sd_relation_residual(
    sd: &SdPresentation,
    v: &[LaurentPoly],
    j: usize,
) -> LaurentPoly {
    let r = sd.r as u32;
    let mut acc = v[j].pow(r);
    for (i, c) in &sd.relations[j] {
        acc = acc.sub(&c.mul(&v[*i]));
    }
    acc
}

/// Exponent box for candidate supports of fixed vectors.
#[derive(Debug, Clone, Copy)]
pub struct SearchBox {
    pub lo: i64,
    pub hi: i64,
}

/// Result of the box-bounded fixed point search: an `F_r`-basis of the joint
/// fixed space of all stored operators, complete only within the box.
#[derive(Debug)]
pub struct FixedPoints {
    pub basis: Vec<Vec<LaurentPoly>>,
    pub scalar_field_log_p: u32,
    pub search_box: SearchBox,
}

/// Solves `v = transpose(A) twist(v)` for every stored operator
/// simultaneously, over supports inside the box. The twists are F_p-linear,
/// so the joint fixed space is the kernel of an F_p-matrix; an F_r-basis is
/// extracted greedily from the F_p-kernel.
pub fn fixed_points(module: &ResidueModule, search_box: SearchBox) -> Result<FixedPoints, CoreError> {
    let ring = &module.ring;
    let p = ring.ctx.p();
    let fdeg = ring.ctx.degree();
    let nv = ring.nvars;
    let d = module.rank;
    let t_log = module.phi_global.as_ref().map(|(t, _)| *t).unwrap_or(ring.ctx.degree() as u32);

    // Enumerate box monomials.
    let mut monos: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..nv {
        let mut next = Vec::new();
        for m in &monos {
            for e in search_box.lo..=search_box.hi {
                let mut m2 = m.clone();
                m2.push(e);
                next.push(m2);
            }
        }
        monos = next;
    }
    let unknowns = d * monos.len() * fdeg;

    // Image of each unknown unit vector under all the defect maps
    // v -> v - transpose(A) twist(v); rows indexed lazily.
    let fq_basis: Vec<FqElem> = (0..fdeg)
        .map(|i| {
            let mut coords = vec![0u64; fdeg];
            coords[i] = 1;
            ring.ctx.from_coords(&coords).unwrap()
        })
        .collect();
    let ops = module.ops();
    let mut row_index: BTreeMap<(usize, usize, Vec<i64>, usize), usize> = BTreeMap::new();
    let mut columns: Vec<Vec<(usize, u64)>> = Vec::with_capacity(unknowns);
    for j0 in 0..d {
        for mono in &monos {
            for b in 0..fdeg {
                let mut col: Vec<(usize, u64)> = Vec::new();
                let v_poly = LaurentPoly::monomial(&ring.ctx, mono.clone(), fq_basis[b].clone());
                for (op_idx, (op, a)) in ops.iter().enumerate() {
                    // defect_j = delta_{j j0} v - sum_i A[i][j] twist(v_i)
                    let tw = module.twist(op, &v_poly);
                    for j in 0..d {
                        let mut defect = if j == j0 { v_poly.clone() } else { ring.zero() };
                        defect = defect.sub(&a[j0][j].mul(&tw));
                        for (e, c) in defect.terms() {
                            for (slot, &cc) in c.coords().iter().enumerate() {
                                if cc == 0 {
                                    continue;
                                }
                                let key = (op_idx, j, e.clone(), slot);
                                let next = row_index.len();
                                let row = *row_index.entry(key).or_insert(next);
                                col.push((row, cc));
                            }
                        }
                    }
                }
                columns.push(col);
            }
        }
    }
    let nrows = row_index.len();
    let mut mat = FpMatrix::zero(p, nrows.max(1), unknowns);
    for (c, col) in columns.iter().enumerate() {
        for &(r, v) in col {
            let cur = mat.get(r, c);
            mat.set(r, c, (cur + v) % p);
        }
    }
    let kernel = mat.kernel_basis();

    // Convert kernel vectors to module elements.
    let to_element = |vec: &[u64]| -> Vec<LaurentPoly> {
        let mut out = vec![ring.zero(); d];
        let mut idx = 0;
        for slot in out.iter_mut() {
            for mono in &monos {
                let mut coords = vec![0u64; fdeg];
                for (bslot, cslot) in coords.iter_mut().enumerate() {
                    *cslot = vec[idx + bslot];
                }
                idx += fdeg;
                let c = ring.ctx.from_coords(&coords).unwrap();
                if !c.is_zero() {
                    let merged = slot.coeff(mono).add(&c);
                    slot.insert_term(mono.clone(), merged);
                }
            }
        }
        out
    };
    let fp_basis: Vec<Vec<LaurentPoly>> = kernel.iter().map(|v| to_element(v)).collect();

    // Extract an F_r-basis: F_r is the subfield of F_q fixed by x -> x^(p^t).
    let fr_basis_field = subfield_basis(&ring.ctx, t_log);
    let flat = |el: &Vec<LaurentPoly>| -> Vec<u64> {
        // flatten over (component, mono, coord)
        let mut out = Vec::with_capacity(unknowns);
        for slot in el {
            for mono in &monos {
                out.extend_from_slice(slot.coeff(mono).coords());
            }
        }
        out
    };
    let mut span = FpMatrix::zero(p, 0, unknowns);
    let mut basis = Vec::new();
    for el in &fp_basis {
        let v = flat(el);
        if in_row_span(&span, &v) {
            continue;
        }
        basis.push(el.clone());
        for c in &fr_basis_field {
            let scaled: Vec<LaurentPoly> = el.iter().map(|s| s.scale(c)).collect();
            let sv = flat(&scaled);
            if !in_row_span(&span, &sv) {
                let mut rows = span.rows;
                span.data.extend_from_slice(&sv);
                rows += 1;
                span = FpMatrix { p, rows, cols: unknowns, data: span.data };
                span.row_reduce();
            }
        }
    }
    Ok(FixedPoints { basis, scalar_field_log_p: t_log, search_box })
}

fn in_row_span(span: &FpMatrix, v: &[u64]) -> bool {
    if span.rows == 0 {
        return v.iter().all(|&x| x == 0);
    }
    let mut m = span.clone();
    let r0 = m.clone().rank();
    m.data.extend_from_slice(v);
    m.rows += 1;
    m.rank() == r0
}

/// Basis over F_p of the subfield of `F_q` fixed by `x -> x^(p^t)`.
pub fn subfield_basis(ctx: &Arc<FqCtx>, t: u32) -> Vec<FqElem> {
    let p = ctx.p();
    let fdeg = ctx.degree();
    let mut mat = FpMatrix::zero(p, fdeg, fdeg);
    for i in 0..fdeg {
        let mut coords = vec![0u64; fdeg];
        coords[i] = 1;
        let x = ctx.from_coords(&coords).unwrap();
        let fx = x.frobenius(t);
        for (r, (&a, &b)) in fx.coords().iter().zip(x.coords()).enumerate() {
            mat.set(r, i, (a + p - b) % p);
        }
    }
    mat.kernel_basis()
        .into_iter()
        .map(|v| ctx.from_coords(&v).unwrap())
        .collect()
}

// ---------------------------------------------------------------------------
// Integral-level modules
// ---------------------------------------------------------------------------

/// Operators available on modules over the integral ring.
#[derive(Clone, Debug)]
pub enum IntegralOp {
    Phi(Vec<u32>),
    Gamma(Vec<crate::padic::PadicElement>),
}

/// Finite free module over the truncated integral coefficient ring.
#[derive(Clone, Debug)]
pub struct IntegralModule {
    pub spec: Arc<RingSpecDelta>,
    pub rank: usize,
    pub operators: Vec<(String, IntegralOp, Matrix<MultivarLaurent>)>,
}

impl IntegralModule {
    fn twist(&self, op: &IntegralOp, x: &MultivarLaurent) -> Result<MultivarLaurent, CoreError> {
        match op {
            IntegralOp::Phi(steps) => act_phi(x, steps),
            IntegralOp::Gamma(gs) => act_gamma(x, gs),
        }
    }

    /// Etale flags (determinant reduces to a unit mod pi) and pairwise
    /// compatibility with the pi-valuation of any defect.
    pub fn validate(&self) -> Result<IntegralReport, CoreError> {
        let zero = self.spec.zero();
        let mut etale = Vec::new();
        for (name, _, m) in &self.operators {
            let det = mat_det(m, &zero);
            let unit = det.reduce_mod_pi().min_monomial().is_some();
            etale.push((name.clone(), unit));
        }
        let mut compat = Vec::new();
        for i in 0..self.operators.len() {
            for j in i + 1..self.operators.len() {
                let (n1, op1, m1) = &self.operators[i];
                let (n2, op2, m2) = &self.operators[j];
                // row storage: commuting operators satisfy
                // tw2(A1) A2 = tw1(A2) A1
                let m1_tw2 = self.twist_matrix(op2, m1)?;
                let m2_tw1 = self.twist_matrix(op1, m2)?;
                let lhs = mat_mul(&m1_tw2, m2, &zero);
                let rhs = mat_mul(&m2_tw1, m1, &zero);
                let mut defect_val: Option<u32> = None;
                let mut exact = true;
                for (r1, r2) in lhs.iter().zip(&rhs) {
                    for (a, b) in r1.iter().zip(r2) {
                        let diff = a.sub(b)?.truncate_to_window();
                        if !diff.is_zero() {
                            exact = false;
                            let v = diff
                                .terms()
                                .map(|(_, c)| c.valuation().lower_bound())
                                .min()
                                .unwrap_or(self.spec.precision());
                            defect_val = Some(defect_val.map_or(v, |cur: u32| cur.min(v)));
                        }
                    }
                }
                compat.push(CompatEntry {
                    left: n1.clone(),
                    right: n2.clone(),
                    commute: exact,
                    defect_valuation: defect_val,
                });
            }
        }
        Ok(IntegralReport { etale, compat })
    }

    fn twist_matrix(
        &self,
        op: &IntegralOp,
        m: &Matrix<MultivarLaurent>,
    ) -> Result<Matrix<MultivarLaurent>, CoreError> {
        m.iter()
            .map(|r| r.iter().map(|x| self.twist(op, x)).collect())
            .collect()
    }

    pub fn tensor(&self, other: &IntegralModule) -> Result<IntegralModule, CoreError> {
        if self.spec != other.spec || self.operators.len() != other.operators.len() {
            return Err(CoreError::SpecMismatch);
        }
        let zero = self.spec.zero();
        let operators = self
            .operators
            .iter()
            .zip(&other.operators)
            .map(|((n1, op, m1), (n2, _, m2))| {
                if n1 != n2 {
                    return Err(CoreError::BadParameter("operator sets differ".into()));
                }
                Ok((n1.clone(), op.clone(), kronecker(m1, m2, &zero)))
            })
            .collect::<Result<Vec<_>, CoreError>>()?;
        Ok(IntegralModule { spec: self.spec.clone(), rank: self.rank * other.rank, operators })
    }

    pub fn dual(&self) -> Result<IntegralModule, CoreError> {
        let zero = self.spec.zero();
        let one = self.spec.one();
        let operators = self
            .operators
            .iter()
            .map(|(n, op, m)| {
                let det = mat_det(m, &zero);
                let det_inv = det.inv().map_err(|_| CoreError::NotEtale(n.clone()))?;
                let adj = mat_adjugate(m, &zero, &one);
                let inv = mat_scale(&adj, &det_inv);
                Ok((n.clone(), op.clone(), mat_transpose(&inv)))
            })
            .collect::<Result<Vec<_>, CoreError>>()?;
        Ok(IntegralModule { spec: self.spec.clone(), rank: self.rank, operators })
    }

    /// Mod-pi reduction onto a residue module; variable phi-steps map to
    /// residue Frobenius layers when their shape allows it.
    pub fn reduce_mod_pi(&self, trunc_order: i64) -> Result<ResidueModule, CoreError> {
        let ring = ResidueRing::new(self.spec.base().residue_field(), self.spec.nvars(), trunc_order);
        let mut phi_mats = BTreeMap::new();
        let mut phi_global = None;
        for (name, op, m) in &self.operators {
            let red: Matrix<LaurentPoly> =
                m.iter().map(|r| r.iter().map(|x| x.reduce_mod_pi()).collect()).collect();
            match op {
                IntegralOp::Phi(steps) => {
                    let on: Vec<usize> =
                        steps.iter().enumerate().filter(|(_, &s)| s > 0).map(|(i, _)| i).collect();
                    if on.len() == 1 && steps[on[0]] == 1 {
                        phi_mats.insert(on[0], red);
                    } else if on.len() == self.spec.nvars() && steps.iter().all(|&s| s == 1) {
                        phi_global = Some((self.spec.base().f_res() as u32, red));
                    } else {
                        return Err(CoreError::Unsupported(format!(
                            "cannot reduce operator {name} to a residue Frobenius layer"
                        )));
                    }
                }
                IntegralOp::Gamma(_) => {
                    return Err(CoreError::Unsupported(
                        "gamma layers have no residue counterpart here".into(),
                    ))
                }
            }
        }
        Ok(ResidueModule { ring, rank: self.rank, phi_mats, phi_global })
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CompatEntry {
    pub left: String,
    pub right: String,
    pub commute: bool,
    pub defect_valuation: Option<u32>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct IntegralReport {
    pub etale: Vec<(String, bool)>,
    pub compat: Vec<CompatEntry>,
}

impl IntegralReport {
    pub fn all_etale(&self) -> bool {
        self.etale.iter().all(|(_, b)| *b)
    }
}
