//! Finite fields `F_{p^f}` with a deterministic choice of defining polynomial,
//! plus the tensor algebras `F_{q'} ⊗_{F_q} ... ⊗_{F_q} F_{q'}` used by the
//! coinduction machinery and as Hahn-series coefficients.
//!
//! The defining polynomial for `F_{p^f}` is the lexicographically smallest
//! monic irreducible of degree `f` over `F_p` (coefficients compared from the
//! constant term up), so that serialized data is reproducible across runs.

use std::fmt;
use std::sync::Arc;

use crate::error::CoreError;

/// Context for a finite field `F_{p^f}` presented as `F_p[y]/(poly)`.
#[derive(Debug, PartialEq, Eq)]
pub struct FqCtx {
    p: u64,
    f: usize,
    /// Non-leading coefficients `c_0..c_{f-1}` of the monic defining polynomial.
    poly: Vec<u64>,
}

impl FqCtx {
    /// Builds `F_{p^f}` with the smallest-lexicographic irreducible polynomial.
    pub fn new(p: u64, f: usize) -> Result<Arc<FqCtx>, CoreError> {
        if !is_prime(p) {
            return Err(CoreError::NotPrime(p));
        }
        if f == 0 {
            return Err(CoreError::BadParameter("residue degree must be >= 1".into()));
        }
        let poly = smallest_irreducible(p, f);
        Ok(Arc::new(FqCtx { p, f, poly }))
    }

    /// Builds the field from an explicit monic defining polynomial (non-leading
    /// coefficients, little-endian). Irreducibility is verified.
    pub fn with_poly(p: u64, poly: Vec<u64>) -> Result<Arc<FqCtx>, CoreError> {
        if !is_prime(p) {
            return Err(CoreError::NotPrime(p));
        }
        let f = poly.len();
        if f == 0 || poly.iter().any(|&c| c >= p) {
            return Err(CoreError::BadParameter("bad defining polynomial".into()));
        }
        if !is_irreducible(p, &poly) {
            return Err(CoreError::BadParameter("defining polynomial is reducible".into()));
        }
        Ok(Arc::new(FqCtx { p, f, poly }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.f
    }

    /// Field cardinality `q = p^f`.
    pub fn q(&self) -> u64 {
        self.p.pow(self.f as u32)
    }

    pub fn poly(&self) -> &[u64] {
        &self.poly
    }

    pub fn zero(self: &Arc<Self>) -> FqElem {
        FqElem { ctx: self.clone(), coords: vec![0; self.f] }
    }

    pub fn one(self: &Arc<Self>) -> FqElem {
        self.from_coords_unchecked({
            let mut c = vec![0; self.f];
            c[0] = 1;
            c
        })
    }

    /// The class of `y`, a generator of the field over `F_p`.
    pub fn gen(self: &Arc<Self>) -> FqElem {
        if self.f == 1 {
            // y is a root of a degree-1 polynomial: y = -c_0.
            return self.from_u64(self.p - self.poly[0] % self.p);
        }
        let mut c = vec![0; self.f];
        c[1] = 1;
        self.from_coords_unchecked(c)
    }

    pub fn from_u64(self: &Arc<Self>, n: u64) -> FqElem {
        let mut c = vec![0; self.f];
        c[0] = n % self.p;
        self.from_coords_unchecked(c)
    }

    /// Element from little-endian coordinates in the power basis of `y`.
    pub fn from_coords(self: &Arc<Self>, coords: &[u64]) -> Result<FqElem, CoreError> {
        if coords.len() != self.f {
            return Err(CoreError::BadParameter(format!(
                "expected {} coordinates, got {}",
                self.f,
                coords.len()
            )));
        }
        Ok(self.from_coords_unchecked(coords.iter().map(|&c| c % self.p).collect()))
    }

    fn from_coords_unchecked(self: &Arc<Self>, coords: Vec<u64>) -> FqElem {
        FqElem { ctx: self.clone(), coords }
    }

    /// All `q` field elements in a fixed (lexicographic coordinate) order.
    pub fn all_elements(self: &Arc<Self>) -> Vec<FqElem> {
        let mut out = Vec::with_capacity(self.q() as usize);
        let mut coords = vec![0u64; self.f];
        loop {
            out.push(self.from_coords_unchecked(coords.clone()));
            let mut i = 0;
            loop {
                if i == self.f {
                    return out;
                }
                coords[i] += 1;
                if coords[i] < self.p {
                    break;
                }
                coords[i] = 0;
                i += 1;
            }
        }
    }
}

/// Element of `F_{p^f}`, little-endian coordinates in the power basis.
#[derive(Clone)]
pub struct FqElem {
    ctx: Arc<FqCtx>,
    coords: Vec<u64>,
}

impl PartialEq for FqElem {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.p == other.ctx.p && self.ctx.poly == other.ctx.poly && self.coords == other.coords
    }
}

impl Eq for FqElem {}

impl fmt::Debug for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fq{:?}", self.coords)
    }
}

impl fmt::Display for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coords.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 if c == 1 => write!(f, "y")?,
                1 => write!(f, "{c}y")?,
                _ if c == 1 => write!(f, "y^{i}")?,
                _ => write!(f, "{c}y^{i}")?,
            }
        }
        Ok(())
    }
}

impl FqElem {
    pub fn ctx(&self) -> &Arc<FqCtx> {
        &self.ctx
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coords[0] == 1 && self.coords[1..].iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &FqElem) -> FqElem {
        let p = self.ctx.p;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| (a + b) % p)
            .collect();
        FqElem { ctx: self.ctx.clone(), coords }
    }

    pub fn sub(&self, other: &FqElem) -> FqElem {
        let p = self.ctx.p;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| (a + p - b) % p)
            .collect();
        FqElem { ctx: self.ctx.clone(), coords }
    }

    pub fn neg(&self) -> FqElem {
        let p = self.ctx.p;
        let coords = self.coords.iter().map(|&a| (p - a) % p).collect();
        FqElem { ctx: self.ctx.clone(), coords }
    }

    pub fn mul(&self, other: &FqElem) -> FqElem {
        let p = self.ctx.p;
        let f = self.ctx.f;
        // Schoolbook product, then reduce y^f via the defining polynomial.
        let mut prod = vec![0u64; 2 * f - 1];
        for (i, &a) in self.coords.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coords.iter().enumerate() {
                prod[i + j] = (prod[i + j] + a * b) % p;
            }
        }
        for k in (f..prod.len()).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for (i, &m) in self.ctx.poly.iter().enumerate() {
                // y^f = -poly, so y^k = -sum m_i y^(k-f+i)
                prod[k - f + i] = (prod[k - f + i] + c * (p - m) % p) % p;
            }
        }
        prod.truncate(f);
        FqElem { ctx: self.ctx.clone(), coords: prod }
    }

    pub fn scale(&self, c: u64) -> FqElem {
        let p = self.ctx.p;
        let c = c % p;
        let coords = self.coords.iter().map(|&a| a * c % p).collect();
        FqElem { ctx: self.ctx.clone(), coords }
    }

    pub fn pow(&self, mut n: u64) -> FqElem {
        let mut base = self.clone();
        let mut acc = self.ctx.one();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }

    /// `x^(p^t)`, the `t`-th power of the absolute Frobenius.
    pub fn frobenius(&self, t: u32) -> FqElem {
        let t = t % self.ctx.f as u32;
        let mut out = self.clone();
        for _ in 0..t {
            out = out.pow(self.ctx.p);
        }
        out
    }

    pub fn inv(&self) -> Result<FqElem, CoreError> {
        if self.is_zero() {
            return Err(CoreError::NotAUnit);
        }
        // x^(q-2) = x^-1 in F_q^x.
        Ok(self.pow(self.ctx.q() - 2))
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Polynomial helpers over F_p, little-endian coefficient vectors.
mod fp_poly {
    pub fn trim(v: &mut Vec<u64>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        trim(&mut out);
        out
    }

    /// Remainder of `a` modulo the monic polynomial with non-leading
    /// coefficients `m` (degree `m.len()`).
    pub fn rem_monic(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let deg = m.len();
        let mut r = a.to_vec();
        while r.len() > deg {
            let k = r.len() - 1;
            let c = r[k];
            r.pop();
            if c != 0 {
                for (i, &mi) in m.iter().enumerate() {
                    r[k - deg + i] = (r[k - deg + i] + c * (p - mi) % p) % p;
                }
            }
        }
        trim(&mut r);
        r
    }

    pub fn pow_mod(base: &[u64], mut n: u64, m: &[u64], p: u64) -> Vec<u64> {
        let mut b = rem_monic(base, m, p);
        let mut acc = vec![1u64];
        while n > 0 {
            if n & 1 == 1 {
                acc = rem_monic(&mul(&acc, &b, p), m, p);
            }
            b = rem_monic(&mul(&b, &b, p), m, p);
            n >>= 1;
        }
        acc
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let mut out = vec![0u64; n];
        for i in 0..n {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            out[i] = (x + p - y) % p;
        }
        trim(&mut out);
        out
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            // Make b monic, reduce a mod b.
            let lead = *b.last().unwrap();
            let lead_inv = mod_inv(lead, p);
            let monic: Vec<u64> = b.iter().map(|&c| c * lead_inv % p).collect();
            let m = &monic[..monic.len() - 1];
            let r = rem_monic(&a, m, p);
            a = b;
            b = r;
        }
        a
    }

    pub fn mod_inv(a: u64, p: u64) -> u64 {
        // Fermat; p prime.
        let mut acc = 1u64;
        let mut b = a % p;
        let mut n = p - 2;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            n >>= 1;
        }
        acc
    }
}

/// Irreducibility over F_p: `x^(p^f) = x mod g` and `gcd(x^(p^(f/l)) - x, g) = 1`
/// for every prime divisor `l` of `f`.
fn is_irreducible(p: u64, poly: &[u64]) -> bool {
    let f = poly.len() as u64;
    let x = vec![0u64, 1];
    let mut full = poly.to_vec();
    full.push(1);
    let xq = fp_poly::pow_mod(&x, p.pow(f as u32), poly, p);
    if fp_poly::sub(&xq, &x, p) != Vec::<u64>::new() {
        return false;
    }
    let mut l = 2;
    let mut rem = f;
    while l <= rem {
        if rem % l == 0 {
            let xp = fp_poly::pow_mod(&x, p.pow((f / l) as u32), poly, p);
            let d = fp_poly::gcd(&fp_poly::sub(&xp, &x, p), &full, p);
            if d.len() != 1 {
                return false;
            }
            while rem % l == 0 {
                rem /= l;
            }
        }
        l += 1;
    }
    true
}

fn smallest_irreducible(p: u64, f: usize) -> Vec<u64> {
    if f == 1 {
        return vec![0]; // y, i.e. F_p itself with y = 0
    }
    let mut coeffs = vec![0u64; f];
    loop {
        if is_irreducible(p, &coeffs) {
            return coeffs;
        }
        let mut i = 0;
        loop {
            coeffs[i] += 1;
            if coeffs[i] < p {
                break;
            }
            coeffs[i] = 0;
            i += 1;
            assert!(i < f, "no irreducible polynomial found (impossible)");
        }
    }
}

// ---------------------------------------------------------------------------
// Linear algebra over F_p
// ---------------------------------------------------------------------------

/// Dense matrix over F_p in row-major order.
#[derive(Clone, Debug)]
pub struct FpMatrix {
    pub p: u64,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

impl FpMatrix {
    pub fn zero(p: u64, rows: usize, cols: usize) -> Self {
        FpMatrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v % self.p;
    }

    /// Row echelon reduction; returns the rank and pivot columns.
    pub fn row_reduce(&mut self) -> (usize, Vec<usize>) {
        let p = self.p;
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            let Some(sel) = (row..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            for c in 0..self.cols {
                self.data.swap(row * self.cols + c, sel * self.cols + c);
            }
            let inv = fp_poly::mod_inv(self.get(row, col), p);
            for c in 0..self.cols {
                let v = self.get(row, c) * inv % p;
                self.set(row, c, v);
            }
            for r in 0..self.rows {
                if r != row && self.get(r, col) != 0 {
                    let factor = self.get(r, col);
                    for c in 0..self.cols {
                        let v = (self.get(r, c) + (p - factor) * self.get(row, c)) % p;
                        self.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
            if row == self.rows {
                break;
            }
        }
        (row, pivots)
    }

    pub fn rank(mut self) -> usize {
        self.row_reduce().0
    }

    /// Basis of the right kernel `{v : Mv = 0}`.
    pub fn kernel_basis(mut self) -> Vec<Vec<u64>> {
        let p = self.p;
        let cols = self.cols;
        let (_, pivots) = self.row_reduce();
        let mut basis = Vec::new();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        for free in 0..cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![0u64; cols];
            v[free] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                let coeff = self.get(r, free);
                if coeff != 0 {
                    v[pc] = (p - coeff) % p;
                }
            }
            basis.push(v);
        }
        basis
    }
}

// ---------------------------------------------------------------------------
// Tensor algebras of finite fields
// ---------------------------------------------------------------------------

/// The `F_q`-algebra `F_{q'} ⊗_{F_q} ... ⊗_{F_q} F_{q'}` (`delta` factors),
/// realized as `F_q[y_1..y_delta]/(h(y_i))` where `h` is the minimal
/// polynomial over `F_q` of the generator of `F_{q'}`.
#[derive(Debug)]
pub struct TensorFqCtx {
    /// Base field `F_q` in its own presentation.
    pub base: Arc<FqCtx>,
    /// Extension `F_{q'}` in its own presentation over `F_p`.
    pub ext: Arc<FqCtx>,
    /// Number of tensor factors.
    pub delta: usize,
    /// `[F_{q'} : F_q]`.
    pub g: usize,
    /// Image of the `base` generator inside `ext` (fixes the embedding).
    base_in_ext: FqElem,
    /// Minimal polynomial of `ext.gen()` over `F_q`: non-leading coefficients,
    /// as elements of `base`.
    min_poly: Vec<FqElem>,
}

impl TensorFqCtx {
    pub fn new(base: Arc<FqCtx>, ext: Arc<FqCtx>, delta: usize) -> Result<Arc<Self>, CoreError> {
        if base.p() != ext.p() {
            return Err(CoreError::BadParameter("mixed characteristics".into()));
        }
        if ext.degree() % base.degree() != 0 {
            return Err(CoreError::BadParameter("q' is not a power of q".into()));
        }
        if delta == 0 {
            return Err(CoreError::BadParameter("empty index set".into()));
        }
        let g = ext.degree() / base.degree();
        let base_in_ext = embed_subfield(&base, &ext)?;
        let min_poly = min_poly_over_subfield(&base, &ext, &base_in_ext, g)?;
        Ok(Arc::new(TensorFqCtx { base, ext, delta, g, base_in_ext, min_poly }))
    }

    /// F_p-dimension of the algebra.
    pub fn dim_fp(&self) -> usize {
        self.base.degree() * self.g.pow(self.delta as u32)
    }

    pub fn zero(self: &Arc<Self>) -> TensorFqElem {
        TensorFqElem { ctx: self.clone(), coords: vec![self.base.zero(); self.g.pow(self.delta as u32)] }
    }

    pub fn one(self: &Arc<Self>) -> TensorFqElem {
        let mut z = self.zero();
        z.coords[0] = self.base.one();
        z
    }

    /// Basis element `y^{k_1} ⊗ ... ⊗ y^{k_delta}` for `0 <= k_i < g`.
    pub fn basis_elem(self: &Arc<Self>, ks: &[usize]) -> TensorFqElem {
        assert_eq!(ks.len(), self.delta);
        assert!(ks.iter().all(|&k| k < self.g));
        let mut z = self.zero();
        z.coords[self.index_of(ks)] = self.base.one();
        z
    }

    fn index_of(&self, ks: &[usize]) -> usize {
        let mut idx = 0;
        for &k in ks {
            idx = idx * self.g + k;
        }
        idx
    }

    fn ks_of(&self, mut idx: usize) -> Vec<usize> {
        let mut ks = vec![0usize; self.delta];
        for i in (0..self.delta).rev() {
            ks[i] = idx % self.g;
            idx /= self.g;
        }
        ks
    }

    /// The embedding of the base field into the extension.
    pub fn embed_base(&self, c: &FqElem) -> FqElem {
        // c = sum c_i z^i with z = base generator; image = sum c_i w^i.
        let mut acc = self.ext.zero();
        let mut w_pow = self.ext.one();
        for &ci in c.coords() {
            if ci != 0 {
                acc = acc.add(&w_pow.scale(ci));
            }
            w_pow = w_pow.mul(&self.base_in_ext);
        }
        acc
    }

    /// Expresses an element of `ext` in the basis `1, y, .., y^{g-1}` over the
    /// base subfield. Panics if the linear algebra fails (cannot happen for a
    /// valid context).
    pub fn ext_to_base_coords(&self, x: &FqElem) -> Vec<FqElem> {
        // Solve x = sum_j c_j y^j with c_j in the embedded subfield,
        // c_j = sum_i lambda_{ji} w^i, over F_p.
        let p = self.base.p();
        let b = self.base.degree();
        let n = self.ext.degree();
        let g = self.g;
        let mut mat = FpMatrix::zero(p, n, g * b + 1);
        let y = self.ext.gen();
        let mut y_pow = self.ext.one();
        for j in 0..g {
            let mut w_pow = self.ext.one();
            for i in 0..b {
                let prod = y_pow.mul(&w_pow);
                for (row, &cc) in prod.coords().iter().enumerate() {
                    mat.set(row, j * b + i, cc);
                }
                w_pow = w_pow.mul(&self.base_in_ext);
            }
            y_pow = y_pow.mul(&y);
        }
        for (row, &cc) in x.coords().iter().enumerate() {
            mat.set(row, g * b, cc);
        }
        // Solve via kernel of [M | -x].
        let mut neg = mat.clone();
        for row in 0..n {
            let v = neg.get(row, g * b);
            neg.set(row, g * b, (p - v) % p);
        }
        let kernel = neg.kernel_basis();
        let sol = kernel
            .into_iter()
            .find(|v| v[g * b] != 0)
            .expect("extension element must decompose over the subfield basis");
        let scale = fp_poly::mod_inv(sol[g * b], p);
        (0..g)
            .map(|j| {
                let coords: Vec<u64> = (0..b).map(|i| sol[j * b + i] * scale % p).collect();
                self.base.from_coords(&coords).unwrap()
            })
            .collect()
    }

    /// F_p-coordinates of an element (basis: tensor monomials x base power basis).
    pub fn fp_coords(&self, x: &TensorFqElem) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.dim_fp());
        for c in &x.coords {
            out.extend_from_slice(c.coords());
        }
        out
    }
}

/// Element of the tensor algebra: coordinates over the base field indexed by
/// tensor monomials `y^{k_1} ⊗ ... ⊗ y^{k_delta}` in row-major order.
#[derive(Clone)]
pub struct TensorFqElem {
    ctx: Arc<TensorFqCtx>,
    coords: Vec<FqElem>,
}

impl PartialEq for TensorFqElem {
    fn eq(&self, other: &Self) -> bool {
        self.coords == other.coords
    }
}

impl Eq for TensorFqElem {}

impl fmt::Debug for TensorFqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tensor{:?}", self.coords)
    }
}

impl TensorFqElem {
    pub fn ctx(&self) -> &Arc<TensorFqCtx> {
        &self.ctx
    }

    pub fn coords(&self) -> &[FqElem] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &TensorFqElem) -> TensorFqElem {
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a.add(b)).collect();
        TensorFqElem { ctx: self.ctx.clone(), coords }
    }

    pub fn sub(&self, other: &TensorFqElem) -> TensorFqElem {
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a.sub(b)).collect();
        TensorFqElem { ctx: self.ctx.clone(), coords }
    }

    pub fn neg(&self) -> TensorFqElem {
        let coords = self.coords.iter().map(|a| a.neg()).collect();
        TensorFqElem { ctx: self.ctx.clone(), coords }
    }

    pub fn scale(&self, c: &FqElem) -> TensorFqElem {
        let coords = self.coords.iter().map(|a| a.mul(c)).collect();
        TensorFqElem { ctx: self.ctx.clone(), coords }
    }

    pub fn mul(&self, other: &TensorFqElem) -> TensorFqElem {
        let ctx = &self.ctx;
        let g = ctx.g;
        let mut acc = ctx.zero();
        for (ia, ca) in self.coords.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            let ka = ctx.ks_of(ia);
            for (ib, cb) in other.coords.iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                let kb = ctx.ks_of(ib);
                let c = ca.mul(cb);
                // Multiply the tensor monomials, reducing each variable by the
                // minimal polynomial of y over the base.
                let mut terms: Vec<(Vec<usize>, FqElem)> = vec![(vec![0; ctx.delta], c)];
                for v in 0..ctx.delta {
                    let e = ka[v] + kb[v];
                    let reduced = reduce_power(ctx, e, g);
                    let mut next = Vec::new();
                    for (ks, coef) in &terms {
                        for (j, cj) in reduced.iter().enumerate() {
                            if cj.is_zero() {
                                continue;
                            }
                            let mut ks2 = ks.clone();
                            ks2[v] = j;
                            next.push((ks2, coef.mul(cj)));
                        }
                    }
                    terms = next;
                }
                for (ks, coef) in terms {
                    let idx = ctx.index_of(&ks);
                    acc.coords[idx] = acc.coords[idx].add(&coef);
                }
            }
        }
        acc
    }

    /// Applies `x -> x^(p^t)` (the absolute Frobenius power) to the whole
    /// algebra: on coefficients and on each tensor slot.
    pub fn frobenius(&self, t: u32) -> TensorFqElem {
        let mut acc = self.clone();
        for _ in 0..t {
            acc = acc.pow_p();
        }
        acc
    }

    fn pow_p(&self) -> TensorFqElem {
        let p = self.ctx.base.p();
        let mut acc = self.ctx.zero();
        let one = self.ctx.one();
        // (sum c_k m_k)^p = sum c_k^p m_k^p
        for (i, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let ks = self.ctx.ks_of(i);
            let mut term = one.clone();
            // m_k^p = prod y_v^(k_v * p), computed via repeated mul.
            for (v, &k) in ks.iter().enumerate() {
                let e = k as u64 * p;
                let reduced = reduce_power_u64(&self.ctx, e);
                let mut next = self.ctx.zero();
                for (idx, coef) in term.coords.iter().enumerate() {
                    if coef.is_zero() {
                        continue;
                    }
                    let mut ks2 = self.ctx.ks_of(idx);
                    for (j, cj) in reduced.iter().enumerate() {
                        if cj.is_zero() {
                            continue;
                        }
                        debug_assert_eq!(ks2[v], 0);
                        ks2[v] = j;
                        let tgt = self.ctx.index_of(&ks2);
                        next.coords[tgt] = next.coords[tgt].add(&coef.mul(cj));
                        ks2[v] = 0;
                    }
                }
                term = next;
            }
            let cp = c.pow(p);
            acc = acc.add(&term.scale(&cp));
        }
        acc
    }
}

/// Coordinates of `y^e` over the base field, `0 <= e <= 2g-2`.
fn reduce_power(ctx: &Arc<TensorFqCtx>, e: usize, g: usize) -> Vec<FqElem> {
    let mut coords = vec![ctx.base.zero(); g];
    if e < g {
        coords[e] = ctx.base.one();
        return coords;
    }
    reduce_power_u64(ctx, e as u64)
}

/// Coordinates of `y^e` over the base field for arbitrary `e`.
fn reduce_power_u64(ctx: &Arc<TensorFqCtx>, e: u64) -> Vec<FqElem> {
    let g = ctx.g;
    // Repeated reduction y^g = -min_poly.
    let mut coords = vec![ctx.base.zero(); g as usize];
    if (e as usize) < g {
        coords[e as usize] = ctx.base.one();
        return coords;
    }
    // Compute y^e by square-and-multiply in the quotient.
    let mut base = vec![ctx.base.zero(); g];
    if g == 1 {
        // F_{q'} = F_q; y is a base element, value = -min_poly[0].
        let val = ctx.min_poly[0].neg();
        let mut acc = ctx.base.one();
        for _ in 0..e {
            acc = acc.mul(&val);
        }
        return vec![acc];
    }
    base[1] = ctx.base.one();
    let mut acc = vec![ctx.base.zero(); g];
    acc[0] = ctx.base.one();
    let mut n = e;
    let mut cur = base;
    while n > 0 {
        if n & 1 == 1 {
            acc = poly_mul_mod(ctx, &acc, &cur);
        }
        cur = poly_mul_mod(ctx, &cur, &cur);
        n >>= 1;
    }
    acc
}

fn poly_mul_mod(ctx: &Arc<TensorFqCtx>, a: &[FqElem], b: &[FqElem]) -> Vec<FqElem> {
    let g = ctx.g;
    let mut prod = vec![ctx.base.zero(); 2 * g - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if bj.is_zero() {
                continue;
            }
            prod[i + j] = prod[i + j].add(&ai.mul(bj));
        }
    }
    for k in (g..prod.len()).rev() {
        if prod[k].is_zero() {
            continue;
        }
        let c = prod[k].clone();
        prod[k] = ctx.base.zero();
        for (i, mi) in ctx.min_poly.iter().enumerate() {
            prod[k - g + i] = prod[k - g + i].sub(&c.mul(mi));
        }
    }
    prod.truncate(g);
    prod
}

/// Finds the lexicographically smallest root of the base field's defining
/// polynomial inside the extension, fixing the subfield embedding.
fn embed_subfield(base: &Arc<FqCtx>, ext: &Arc<FqCtx>) -> Result<FqElem, CoreError> {
    for cand in ext.all_elements() {
        // Evaluate the base defining polynomial (monic) at cand.
        let mut acc = ext.zero();
        let mut pw = ext.one();
        for &c in base.poly() {
            acc = acc.add(&pw.scale(c));
            pw = pw.mul(&cand);
        }
        acc = acc.add(&pw); // leading coefficient 1
        if acc.is_zero() {
            return Ok(cand);
        }
    }
    Err(CoreError::BadParameter("no subfield embedding found".into()))
}

/// Minimal polynomial of `ext.gen()` over the embedded copy of `base`:
/// returns non-leading coefficients as base-field elements, degree `g`.
fn min_poly_over_subfield(
    base: &Arc<FqCtx>,
    ext: &Arc<FqCtx>,
    base_in_ext: &FqElem,
    g: usize,
) -> Result<Vec<FqElem>, CoreError> {
    let p = base.p();
    let b = base.degree();
    let n = ext.degree();
    let y = ext.gen();
    // Unknowns: lambda_{ji} for j in 0..g (coefficient of y^j), i in 0..b
    // (coordinate over the embedded subfield basis w^i). Equation:
    // y^g + sum_j c_j y^j = 0.
    let mut mat = FpMatrix::zero(p, n, g * b);
    let mut rhs = vec![0u64; n];
    let mut y_pow = ext.one();
    for j in 0..g {
        let mut w_pow = ext.one();
        for i in 0..b {
            let prod = y_pow.mul(&w_pow);
            for (row, &cc) in prod.coords().iter().enumerate() {
                mat.set(row, j * b + i, cc);
            }
            w_pow = w_pow.mul(base_in_ext);
        }
        y_pow = y_pow.mul(&y);
    }
    // y_pow is now y^g.
    for (row, &cc) in y_pow.coords().iter().enumerate() {
        rhs[row] = cc;
    }
    // Solve M * lambda = -rhs via augmented kernel.
    let mut aug = FpMatrix::zero(p, n, g * b + 1);
    for r in 0..n {
        for c in 0..g * b {
            aug.set(r, c, mat.get(r, c));
        }
        aug.set(r, g * b, rhs[r]);
    }
    let kernel = aug.kernel_basis();
    let sol = kernel
        .into_iter()
        .find(|v| v[g * b] != 0)
        .ok_or_else(|| CoreError::BadParameter("no minimal polynomial found".into()))?;
    let scale = fp_poly::mod_inv(sol[g * b], p);
    Ok((0..g)
        .map(|j| {
            let coords: Vec<u64> = (0..b).map(|i| sol[j * b + i] * scale % p).collect();
            base.from_coords(&coords).unwrap()
        })
        .collect())
}
