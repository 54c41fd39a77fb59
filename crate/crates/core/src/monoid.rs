//! Monoid presentations and algorithms: left-coset representatives and
//! minimal relations of Frobenius submonoids (the subtle-finite-index
//! machinery), coinduction of finite fields across those submonoids,
//! semidirect products with identification quotients and their normal forms,
//! and the plectic/glectic elements with their actions on the multivariable
//! ring.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::fq::{FpMatrix, FqCtx, TensorFqCtx, TensorFqElem};
use crate::multivar::{act_gamma, act_phi, act_twisted_permutation, permute_vars, MultivarLaurent};
use crate::padic::PadicElement;

// ---------------------------------------------------------------------------
// Submonoids of N^Delta
// ---------------------------------------------------------------------------

/// A finitely generated submonoid of `N^Delta`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NSubmonoid {
    pub ambient_dim: usize,
    pub generators: Vec<Vec<u64>>,
}

impl NSubmonoid {
    /// The family `(f N)^Delta + (1,..,1) N`.
    pub fn canonical(f: u64, delta: usize) -> Self {
        let mut generators = Vec::new();
        for i in 0..delta {
            let mut g = vec![0u64; delta];
            g[i] = f;
            generators.push(g);
        }
        generators.push(vec![1u64; delta]);
        NSubmonoid { ambient_dim: delta, generators }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.generators.iter().any(|g| g.len() != self.ambient_dim) {
            return Err(CoreError::BadParameter("generator arity mismatch".into()));
        }
        if self.generators.iter().any(|g| g.iter().all(|&x| x == 0)) {
            return Err(CoreError::BadParameter("zero generator".into()));
        }
        Ok(())
    }

    /// Membership of `t` as a nonnegative combination of the generators.
    pub fn contains(&self, t: &[u64]) -> bool {
        let bound = t.iter().copied().max().unwrap_or(0) + 1;
        MembershipTable::build(self, bound).contains(t)
    }

    fn default_bound(&self) -> u64 {
        let fmax = self.generators.iter().flat_map(|g| g.iter()).copied().max().unwrap_or(1);
        4 * fmax * self.ambient_dim as u64
    }
}

/// Dense membership table for a submonoid over the box `[0, bound)^dim`,
/// filled by one forward dynamic-programming pass.
struct MembershipTable {
    dim: usize,
    bound: u64,
    data: Vec<bool>,
}

impl MembershipTable {
    fn build(s: &NSubmonoid, bound: u64) -> Self {
        let dim = s.ambient_dim;
        let size = (bound as usize).pow(dim as u32);
        let mut data = vec![false; size];
        data[0] = true;
        // Row-major order visits every point after all its predecessors.
        let mut point = vec![0u64; dim];
        for idx in 0..size {
            if idx > 0 {
                // increment the mixed-radix counter (last coordinate fastest)
                let mut i = dim;
                loop {
                    i -= 1;
                    point[i] += 1;
                    if point[i] < bound {
                        break;
                    }
                    point[i] = 0;
                }
                let mut member = false;
                'gens: for g in &s.generators {
                    let mut pidx = 0usize;
                    for (x, y) in point.iter().zip(g) {
                        if x < y {
                            continue 'gens;
                        }
                        pidx = pidx * bound as usize + (x - y) as usize;
                    }
                    if data[pidx] {
                        member = true;
                        break;
                    }
                }
                data[idx] = member;
            }
        }
        MembershipTable { dim, bound, data }
    }

    fn contains(&self, t: &[u64]) -> bool {
        debug_assert_eq!(t.len(), self.dim);
        if t.iter().any(|&x| x >= self.bound) {
            return false;
        }
        let mut idx = 0usize;
        for &x in t {
            idx = idx * self.bound as usize + x as usize;
        }
        self.data[idx]
    }
}

/// Representatives of the maximal left classes `t + S`, cofinal among all
/// classes.
#[derive(Debug, Clone, Serialize)]
pub struct CosetReport {
    pub representatives: Vec<Vec<u64>>,
    pub certified: bool,
}

/// Greedy sweep in total-degree order: a point starts a new class unless an
/// earlier representative already covers it; since generators have positive
/// total degree, earlier classes are never contained in later ones.
pub fn minimal_cosets(s: &NSubmonoid, bound: Option<u64>) -> Result<CosetReport, CoreError> {
    s.validate()?;
    let b = bound.unwrap_or_else(|| s.default_bound());
    let dim = s.ambient_dim;
    let mut points: Vec<Vec<u64>> = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::new();
        for p in &points {
            for e in 0..b {
                let mut q = p.clone();
                q.push(e);
                next.push(q);
            }
        }
        points = next;
    }
    points.sort_by_key(|p| (p.iter().sum::<u64>(), p.clone()));
    let table = MembershipTable::build(s, b);
    let mut reps: Vec<Vec<u64>> = Vec::new();
    for t in &points {
        let covered = reps.iter().any(|r| {
            r.iter().zip(t).all(|(a, b)| a <= b)
                && table.contains(&t.iter().zip(r).map(|(a, b)| a - b).collect::<Vec<_>>())
        });
        if !covered {
            reps.push(t.clone());
        }
    }
    // Certified when every representative sits well inside the box: any point
    // past the box reduces into it by subtracting generators.
    let fmax = s.generators.iter().flat_map(|g| g.iter()).copied().max().unwrap_or(1);
    let certified = reps.iter().all(|r| r.iter().all(|&x| x + 2 * fmax <= b));
    if !certified {
        return Err(CoreError::Inconclusive(format!(
            "coset representatives reach the search bound {b}"
        )));
    }
    Ok(CosetReport { representatives: reps, certified })
}

/// Minimal elements of the relation set
/// `R = {(k, s) : t1 + f*k + s*(1,..,1) in t2 + S}` for the canonical family,
/// Dickson-filtered. `R` is an up-set, so the minimal elements are cofinal.
#[derive(Debug, Clone, Serialize)]
pub struct RelationReport {
    /// Each entry is `(k_1..k_delta, s)`.
    pub minimal: Vec<Vec<u64>>,
    pub certified: bool,
}

pub fn minimal_relations(
    s: &NSubmonoid,
    f: u64,
    t1: &[u64],
    t2: &[u64],
    bound: Option<u64>,
) -> Result<RelationReport, CoreError> {
    s.validate()?;
    let dim = s.ambient_dim;
    if t1.len() != dim || t2.len() != dim {
        return Err(CoreError::BadParameter("representative arity mismatch".into()));
    }
    let b = bound.unwrap_or_else(|| s.default_bound());
    let tmax = t1.iter().chain(t2.iter()).copied().max().unwrap_or(0);
    let table = MembershipTable::build(s, (f + 1) * b + tmax + 2);
    // Enumerate (k, s) in the box and test membership of
    // t1 + f*k + s - t2 in S.
    let mut members: Vec<Vec<u64>> = Vec::new();
    let mut stack: Vec<Vec<u64>> = vec![vec![]];
    for _ in 0..=dim {
        let mut next = Vec::new();
        for p in &stack {
            for e in 0..=b {
                let mut q = p.clone();
                q.push(e);
                next.push(q);
            }
        }
        stack = next;
    }
    for ks in &stack {
        let (k, shift) = ks.split_at(dim);
        let sh = shift[0];
        let mut ok = true;
        let mut v = vec![0u64; dim];
        for i in 0..dim {
            let lhs = t1[i] + f * k[i] + sh;
            if lhs < t2[i] {
                ok = false;
                break;
            }
            v[i] = lhs - t2[i];
        }
        if ok && table.contains(&v) {
            members.push(ks.clone());
        }
    }
    if members.is_empty() {
        // For the canonical family, membership forces a congruence: some
        // shift s must satisfy t1_i + s = t2_i mod f for every i. When no
        // residue works the relation set is provably empty; otherwise an
        // empty box is inconclusive.
        let solvable = (0..f.max(1)).any(|s| {
            (0..dim).all(|i| (t1[i] + s) % f.max(1) == t2[i] % f.max(1))
        });
        if solvable {
            return Err(CoreError::Inconclusive(format!(
                "no relation found within the bound {b}, but the congruence admits solutions"
            )));
        }
        return Ok(RelationReport { minimal: Vec::new(), certified: true });
    }
    // Dickson-minimal filter: sweep in total-degree order, so a member is
    // minimal iff no already-kept minimal element lies below it.
    members.sort_by_key(|m| (m.iter().sum::<u64>(), m.clone()));
    let mut minimal: Vec<Vec<u64>> = Vec::new();
    for m in &members {
        if !minimal.iter().any(|o| o.iter().zip(m).all(|(a, b)| a <= b)) {
            minimal.push(m.clone());
        }
    }
    minimal.sort();
    let certified = minimal.iter().all(|m| m.iter().all(|&x| x + 2 <= b));
    if !certified {
        return Err(CoreError::Inconclusive(format!(
            "minimal relations reach the search bound {b}"
        )));
    }
    Ok(RelationReport { minimal, certified })
}

// ---------------------------------------------------------------------------
// Coinduction of finite fields
// ---------------------------------------------------------------------------

/// Decomposition of `F_{q'} (x)_{F_q} ... (x)_{F_q} F_{q'}` as a product of
/// copies of `F_{q'}` indexed by coset representatives, with the
/// Frobenius-equivariance of the evaluation map verified exactly.
#[derive(Debug)]
pub struct CoindReport {
    pub tensor_dim_fp: usize,
    /// Absolute-Frobenius exponent vectors of the coset representatives.
    pub reps: Vec<Vec<u64>>,
    pub bijective: bool,
    pub ring_hom: bool,
    pub equivariant: bool,
    /// How each acting generator permutes the product factors: one entry per
    /// variable Frobenius, then the diagonal layer.
    pub factor_action: Vec<Vec<usize>>,
    pub tensor: Arc<TensorFqCtx>,
}

impl CoindReport {
    pub fn all_pass(&self) -> bool {
        self.bijective && self.ring_hom && self.equivariant
    }
}

fn log_p(p: u64, mut x: u64) -> Option<u32> {
    let mut t = 0;
    while x > 1 {
        if x % p != 0 {
            return None;
        }
        x /= p;
        t += 1;
    }
    Some(t)
}

/// Membership of an exponent vector in the lattice `(b Z)^Delta + a(1..1)Z`.
fn in_frob_lattice(v: &[i64], b_layer: i64, a_diag: i64) -> bool {
    // v - a*s*(1..1) must be in (b Z)^Delta for some s; s matters mod b/gcd.
    let range = b_layer / gcd_i64(a_diag, b_layer);
    (0..range).any(|s| v.iter().all(|&x| (x - a_diag * s).rem_euclid(b_layer) == 0))
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd_i64(b, a % b)
    }
}

/// Builds and verifies the evaluation map
/// `x -> (psi_spe(x))_psi : tensor -> product of F_{q'}` over the coset
/// representatives of the group-completed Frobenius submonoid.
pub fn coind_finite_field(
    q: u64,
    q_prime: u64,
    r: u64,
    delta: usize,
) -> Result<CoindReport, CoreError> {
    let p = smallest_prime_factor(q);
    let a = log_p(p, r).ok_or_else(|| CoreError::BadParameter("r is not a power of p".into()))?;
    let b = log_p(p, q).ok_or_else(|| CoreError::BadParameter("q is not a power of p".into()))?;
    let bp = log_p(p, q_prime)
        .ok_or_else(|| CoreError::BadParameter("q' is not a power of p".into()))?;
    if a == 0 || b % a != 0 || bp % b != 0 {
        return Err(CoreError::BadParameter("need r | q | q'".into()));
    }
    let base = FqCtx::new(p, b as usize)?;
    let ext = FqCtx::new(p, bp as usize)?;
    let tensor = TensorFqCtx::new(base, ext.clone(), delta)?;
    let g = tensor.g;

    // Coset representatives of S^gp = (bp Z)^Delta + a(1..1)Z inside
    // T^gp = (b Z)^Delta + a(1..1)Z: exponent vectors (b k_1,..,b k_{d-1}, 0).
    let mut reps: Vec<Vec<u64>> = vec![vec![]];
    for _ in 0..delta.saturating_sub(1) {
        let mut next = Vec::new();
        for rep in &reps {
            for k in 0..g as u64 {
                let mut r2 = rep.clone();
                r2.push(b as u64 * k);
                next.push(r2);
            }
        }
        reps = next;
    }
    for rep in reps.iter_mut() {
        rep.push(0);
    }
    // Sanity: pairwise inequivalent mod S^gp.
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            let diff: Vec<i64> =
                reps[i].iter().zip(&reps[j]).map(|(x, y)| *x as i64 - *y as i64).collect();
            if in_frob_lattice(&diff, bp as i64, a as i64) {
                return Err(CoreError::BadParameter("coset representatives collide".into()));
            }
        }
    }

    // psi_spe on a tensor element for a representative psi.
    let eval = |x: &TensorFqElem, psi: &[u64]| -> crate::fq::FqElem {
        let mut acc = ext.zero();
        for (idx, c) in x.coords().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            // decode the tensor monomial exponents
            let mut ks = vec![0usize; delta];
            let mut rem = idx;
            for i in (0..delta).rev() {
                ks[i] = rem % g;
                rem /= g;
            }
            let mut term = tensor.embed_base(c).frobenius(psi[0] as u32);
            let y = ext.gen();
            for (i, &k) in ks.iter().enumerate() {
                term = term.mul(&y.pow(k as u64).frobenius(psi[i] as u32));
            }
            acc = acc.add(&term);
        }
        acc
    };

    // F_p-matrix of the full map for bijectivity.
    let dim = tensor.dim_fp();
    let mut basis_elems = Vec::with_capacity(dim);
    let bdeg = tensor.base.degree();
    for idx in 0..g.pow(delta as u32) {
        let mut ks = vec![0usize; delta];
        let mut rem = idx;
        for i in (0..delta).rev() {
            ks[i] = rem % g;
            rem /= g;
        }
        for t in 0..bdeg {
            let mut coords = vec![0u64; bdeg];
            coords[t] = 1;
            let c = tensor.base.from_coords(&coords).unwrap();
            basis_elems.push(tensor.basis_elem(&ks).scale(&c));
        }
    }
    let out_dim = reps.len() * ext.degree();
    let mut mat = FpMatrix::zero(p, out_dim, dim);
    for (col, e) in basis_elems.iter().enumerate() {
        for (ri, rep) in reps.iter().enumerate() {
            let img = eval(e, rep);
            for (slot, &cc) in img.coords().iter().enumerate() {
                mat.set(ri * ext.degree() + slot, col, cc);
            }
        }
    }
    let bijective = out_dim == dim && mat.rank() == dim;

    // Ring homomorphism on all basis pairs.
    let mut ring_hom = true;
    'hom: for x in &basis_elems {
        for y in &basis_elems {
            let lhs: Vec<_> = reps.iter().map(|rep| eval(&x.mul(y), rep)).collect();
            let rhs: Vec<_> = reps.iter().map(|rep| eval(x, rep).mul(&eval(y, rep))).collect();
            if lhs != rhs {
                ring_hom = false;
                break 'hom;
            }
        }
    }

    // Frobenius-equivariance for each generator of the acting monoid:
    // phi_{alpha,q} (exponent b e_alpha) and phi_{Delta,r} (exponent a(1..1)).
    enum Gen {
        PerSlot(usize),
        Diagonal,
    }
    let mut generators: Vec<(Gen, Vec<u64>)> = (0..delta)
        .map(|alpha| {
            let mut v = vec![0u64; delta];
            v[alpha] = b as u64;
            (Gen::PerSlot(alpha), v)
        })
        .collect();
    generators.push((Gen::Diagonal, vec![a as u64; delta]));
    let mut equivariant = true;
    let mut factor_action: Vec<Vec<usize>> = Vec::new();
    for (_, gen) in &generators {
        let mut perm = Vec::with_capacity(reps.len());
        for rep in &reps {
            let shifted: Vec<u64> = rep.iter().zip(gen).map(|(x, y)| x + y).collect();
            let (j, _) = reduce_to_rep(&shifted, &reps, bp as i64, a as i64)?;
            perm.push(j);
        }
        factor_action.push(perm);
    }
    'equi: for (kind, gen) in &generators {
        for e in &basis_elems {
            // source action: one q-Frobenius slot step, or the global
            // r-Frobenius (which also moves the coefficients)
            let src = match kind {
                Gen::PerSlot(alpha) => slot_frobenius(&tensor, e, *alpha, b),
                Gen::Diagonal => e.frobenius(a),
            };
            let lhs: Vec<_> = reps.iter().map(|rep| eval(&src, rep)).collect();
            // target action: component i reads from component j with a twist
            let mut rhs = Vec::with_capacity(reps.len());
            for rep in &reps {
                let shifted: Vec<u64> = rep.iter().zip(gen).map(|(x, y)| x + y).collect();
                let (j, tw) = reduce_to_rep(&shifted, &reps, bp as i64, a as i64)?;
                rhs.push(eval(e, &reps[j]).frobenius(tw));
            }
            if lhs != rhs {
                equivariant = false;
                break 'equi;
            }
        }
    }

    Ok(CoindReport {
        tensor_dim_fp: dim,
        reps,
        bijective,
        ring_hom,
        equivariant,
        factor_action,
        tensor,
    })
}

/// Finds the representative equivalent to `v` and the `F_{q'}`-twist of the
/// connecting lattice element.
fn reduce_to_rep(
    v: &[u64],
    reps: &[Vec<u64>],
    bp: i64,
    a: i64,
) -> Result<(usize, u32), CoreError> {
    for (j, rep) in reps.iter().enumerate() {
        let diff: Vec<i64> = v.iter().zip(rep).map(|(x, y)| *x as i64 - *y as i64).collect();
        if in_frob_lattice(&diff, bp, a) {
            // the twist is any coordinate of the difference, mod bp
            let tw = diff[0].rem_euclid(bp) as u32;
            return Ok((j, tw));
        }
    }
    Err(CoreError::BadParameter("no representative matches".into()))
}

/// Applies `p^t`-Frobenius to one tensor slot only (t must keep base-field
/// coefficients fixed, i.e. be a multiple of the base degree).
fn slot_frobenius(
    tensor: &Arc<TensorFqCtx>,
    x: &TensorFqElem,
    alpha: usize,
    t: u32,
) -> TensorFqElem {
    if t == 0 {
        return x.clone();
    }
    let g = tensor.g;
    let delta = tensor.delta;
    let mut acc = tensor.zero();
    for (idx, c) in x.coords().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mut ks = vec![0usize; delta];
        let mut rem = idx;
        for i in (0..delta).rev() {
            ks[i] = rem % g;
            rem /= g;
        }
        // y^(k p^t) in the slot alpha, re-expressed over the base.
        let y = tensor.ext.gen();
        let pw = y.pow(ks[alpha] as u64).frobenius(t);
        let coords = tensor.ext_to_base_coords(&pw);
        for (kk, cc) in coords.iter().enumerate() {
            if cc.is_zero() {
                continue;
            }
            let mut ks2 = ks.clone();
            ks2[alpha] = kk;
            let term = tensor.basis_elem(&ks2).scale(&c.mul(cc));
            acc = acc.add(&term);
        }
    }
    acc
}

fn smallest_prime_factor(n: u64) -> u64 {
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return d;
        }
        d += 1;
    }
    n
}

// ---------------------------------------------------------------------------
// Semidirect products, quotients and normal forms
// ---------------------------------------------------------------------------

/// Element of the abelian part `Phi_{P,q} x Gamma`: Frobenius exponents and
/// a unit per index.
#[derive(Debug, Clone, PartialEq)]
pub struct MPartElem {
    pub phi: Vec<u64>,
    pub units: Vec<PadicElement>,
}

impl MPartElem {
    pub fn identity(nvars: usize, one: &PadicElement) -> Self {
        MPartElem { phi: vec![0; nvars], units: vec![one.clone(); nvars] }
    }

    pub fn mul(&self, other: &MPartElem) -> Result<MPartElem, CoreError> {
        let phi = self.phi.iter().zip(&other.phi).map(|(a, b)| a + b).collect();
        let units = self
            .units
            .iter()
            .zip(&other.units)
            .map(|(a, b)| a.mul(b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MPartElem { phi, units })
    }

    /// The permutation action: new component at `perm[i]` reads the old
    /// component at `i`.
    pub fn permuted(&self, perm: &[usize]) -> MPartElem {
        let n = self.phi.len();
        let mut phi = vec![0u64; n];
        let mut units = vec![self.units[0].clone(); n];
        for i in 0..n {
            phi[perm[i]] = self.phi[i];
            units[perm[i]] = self.units[i].clone();
        }
        MPartElem { phi, units }
    }
}

/// The N part of the semidirect product: either the full symmetric group on
/// the index set, or the free monoid on one twisting generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NPartKind {
    SymmetricGroup,
    /// `N = <g>` with `g` acting through the given permutation.
    FreeMonogenic { sigma: Vec<usize> },
}

/// Identification data `(I, kappa)`: `I = <g^power>` mapped into the abelian
/// part.
#[derive(Debug, Clone)]
pub struct QuotientData {
    pub power: u64,
    pub kappa: MPartElem,
}

/// Finite presentation of `M x|_lambda N`, with an optional `~I~` quotient.
#[derive(Debug, Clone)]
pub struct SemidirectPresentation {
    pub nvars: usize,
    pub n_part: NPartKind,
    pub quotient: Option<QuotientData>,
}

impl SemidirectPresentation {
    /// Checks the identification-quotient conditions on generators: the
    /// conjugation action of `I` must be trivial (forced, since the abelian
    /// part is cancellative) and `kappa` must be invariant under the
    /// `N`-action.
    pub fn validate(&self) -> Result<(), CoreError> {
        if let NPartKind::FreeMonogenic { sigma } = &self.n_part {
            let mut seen = vec![false; self.nvars];
            if sigma.len() != self.nvars {
                return Err(CoreError::PreconditionFailed("sigma arity mismatch".into()));
            }
            for &s in sigma {
                if s >= self.nvars || seen[s] {
                    return Err(CoreError::PreconditionFailed(
                        "the twisting map is not a permutation, so lambda(I) is not made of automorphisms".into(),
                    ));
                }
                seen[s] = true;
            }
            if let Some(qd) = &self.quotient {
                // lambda(i) = sigma^power must be the identity permutation.
                let mut acc: Vec<usize> = (0..self.nvars).collect();
                for _ in 0..qd.power {
                    acc = acc.iter().map(|&i| sigma[i]).collect();
                }
                if acc != (0..self.nvars).collect::<Vec<_>>() {
                    return Err(CoreError::PreconditionFailed(
                        "lambda on the identified submonoid must act trivially".into(),
                    ));
                }
                // kappa must be N-invariant (third condition of the quotient).
                if qd.kappa.permuted(sigma) != qd.kappa {
                    return Err(CoreError::PreconditionFailed(
                        "kappa image is not invariant under the twisting action".into(),
                    ));
                }
            }
        } else if self.quotient.is_some() {
            return Err(CoreError::Unsupported(
                "identification quotients are only supported over the monogenic part".into(),
            ));
        }
        Ok(())
    }
}

/// A letter of a word in the semidirect product.
#[derive(Debug, Clone)]
pub enum WordLetter {
    M(MPartElem),
    /// `g^k` in the monogenic case; an explicit permutation otherwise.
    NPower(u64),
    NPerm(Vec<usize>),
}

/// Canonical form `(m, n)` of a word: `n` is reduced by the identification
/// `(kappa(i), 1) ~ (1, i)`, pushing `kappa` factors into the abelian part.
/// Two words are equal in the quotient iff their normal forms agree.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    pub m: MPartElem,
    pub n_power: u64,
    pub n_perm: Vec<usize>,
}

pub fn sd_normal_form(
    pres: &SemidirectPresentation,
    word: &[WordLetter],
    one: &PadicElement,
) -> Result<NormalForm, CoreError> {
    pres.validate()?;
    let mut m = MPartElem::identity(pres.nvars, one);
    let mut n_power: u64 = 0;
    let mut n_perm: Vec<usize> = (0..pres.nvars).collect();
    let perm_of_power = |k: u64| -> Vec<usize> {
        match &pres.n_part {
            NPartKind::FreeMonogenic { sigma } => {
                let mut acc: Vec<usize> = (0..pres.nvars).collect();
                for _ in 0..k {
                    acc = acc.iter().map(|&i| sigma[i]).collect();
                }
                acc
            }
            NPartKind::SymmetricGroup => (0..pres.nvars).collect(),
        }
    };
    for letter in word {
        match (letter, &pres.n_part) {
            (WordLetter::M(me), _) => {
                // (m, n)(m', 1) = (m * lambda(n)(m'), n)
                let lam = match &pres.n_part {
                    NPartKind::FreeMonogenic { .. } => me.permuted(&perm_of_power(n_power)),
                    NPartKind::SymmetricGroup => me.permuted(&n_perm),
                };
                m = m.mul(&lam)?;
            }
            (WordLetter::NPower(k), NPartKind::FreeMonogenic { .. }) => {
                n_power += k;
            }
            (WordLetter::NPerm(w), NPartKind::SymmetricGroup) => {
                // n_perm := n_perm o w
                n_perm = w.iter().map(|&i| n_perm[i]).collect();
            }
            _ => {
                return Err(CoreError::BadParameter(
                    "word letter does not match the N part of the presentation".into(),
                ))
            }
        }
    }
    if let Some(qd) = &pres.quotient {
        // (m, g^j) with j >= power rewrites to (kappa * m, g^(j-power)):
        // lambda(i) is the identity by the validated conditions.
        while n_power >= qd.power && qd.power > 0 {
            n_power -= qd.power;
            m = m.mul(&qd.kappa)?;
        }
    }
    Ok(NormalForm { m, n_power, n_perm })
}

// ---------------------------------------------------------------------------
// Plectic and glectic elements
// ---------------------------------------------------------------------------

/// Element of the plectic monoid `(Phi_{P,q} x Gamma) x| S_P`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlecticElement {
    pub phi: Vec<u64>,
    pub units: Vec<PadicElement>,
    pub perm: Vec<usize>,
}

impl PlecticElement {
    pub fn identity(nvars: usize, one: &PadicElement) -> Self {
        PlecticElement {
            phi: vec![0; nvars],
            units: vec![one.clone(); nvars],
            perm: (0..nvars).collect(),
        }
    }

    fn m_part(&self) -> MPartElem {
        MPartElem { phi: self.phi.clone(), units: self.units.clone() }
    }
}

/// Group law of the semidirect structure: the permutation pushes through the
/// abelian part of the right factor.
pub fn plectic_mul(g: &PlecticElement, h: &PlecticElement) -> Result<PlecticElement, CoreError> {
    if g.phi.len() != h.phi.len() {
        return Err(CoreError::BadParameter("index sets differ".into()));
    }
    let twisted = h.m_part().permuted(&g.perm);
    let m = g.m_part().mul(&twisted)?;
    let perm: Vec<usize> = h.perm.iter().map(|&i| g.perm[i]).collect();
    Ok(PlecticElement { phi: m.phi, units: m.units, perm })
}

/// Ring action: first permute the variables (`omega . X_t = X_{omega(t)}`),
/// then apply the unit and Frobenius layers.
pub fn plectic_act(g: &PlecticElement, x: &MultivarLaurent) -> Result<MultivarLaurent, CoreError> {
    if g.phi.len() != x.spec().nvars() {
        return Err(CoreError::BadParameter("index sets differ".into()));
    }
    let permuted = permute_vars(x, &g.perm)?;
    let steps: Vec<u32> = g.phi.iter().map(|&k| k as u32).collect();
    let with_gamma = act_gamma(&permuted, &g.units)?;
    act_phi(&with_gamma, &steps)
}

/// Weil-part descriptor of the glectic monoid: a permutation of the
/// embeddings together with the degree data `d`, subject to the cocycle rule
/// `d(sigma2 sigma1, t) = d(sigma2, sigma1 t) + d(sigma1, t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlecticElement {
    pub perm: Vec<usize>,
    pub d: Vec<u32>,
}

impl GlecticElement {
    pub fn identity(nvars: usize) -> Self {
        GlecticElement { perm: (0..nvars).collect(), d: vec![0; nvars] }
    }

    /// The arithmetic Frobenius in the unramified case `K = Q_{p^f}`:
    /// `Frob(X_i) = X_{i+1}` and `Frob(X_{f-1}) = f(X_0)`.
    pub fn unramified_frobenius(f: usize) -> Self {
        let perm = (0..f).map(|i| (i + 1) % f).collect();
        let mut d = vec![0u32; f];
        d[f - 1] = 1;
        GlecticElement { perm, d }
    }

    pub fn compose(&self, first: &GlecticElement) -> Result<GlecticElement, CoreError> {
        if self.perm.len() != first.perm.len() {
            return Err(CoreError::BadParameter("index sets differ".into()));
        }
        let n = self.perm.len();
        let perm: Vec<usize> = (0..n).map(|t| self.perm[first.perm[t]]).collect();
        let d: Vec<u32> = (0..n).map(|t| self.d[first.perm[t]] + first.d[t]).collect();
        Ok(GlecticElement { perm, d })
    }

    pub fn pow(&self, k: u32) -> Result<GlecticElement, CoreError> {
        let mut acc = GlecticElement::identity(self.perm.len());
        for _ in 0..k {
            acc = acc.compose(self)?;
        }
        Ok(acc)
    }
}

/// Checks the cocycle addition law on user-supplied composite claims: each
/// triple asserts `second o first = composite`.
pub fn validate_cocycle_claims(
    claims: &[(GlecticElement, GlecticElement, GlecticElement)],
) -> bool {
    claims
        .iter()
        .all(|(g2, g1, comp)| g2.compose(g1).is_ok_and(|c| &c == comp))
}

impl GlecticElement {
    /// Whether this descriptor is a power of the unramified arithmetic
    /// Frobenius on `f` indices; returns the exponent. Used to reject
    /// cocycle-inconsistent descriptors in the unramified desk case.
    pub fn unramified_power(&self, f: usize) -> Option<u32> {
        if self.perm.len() != f {
            return None;
        }
        let frob = GlecticElement::unramified_frobenius(f);
        let mut acc = GlecticElement::identity(f);
        // total degree grows by 1 per f steps, so the search is bounded.
        let max = (self.d.iter().sum::<u32>() + 1) * f as u32;
        for k in 0..=max {
            if &acc == self {
                return Some(k);
            }
            acc = acc.compose(&frob).expect("same arity");
        }
        None
    }
}

/// Ring action `[sigma] . X_t = f^(d(sigma,t))(X_{sigma t})`.
pub fn glectic_act(g: &GlecticElement, x: &MultivarLaurent) -> Result<MultivarLaurent, CoreError> {
    if g.perm.len() != x.spec().nvars() {
        return Err(CoreError::BadParameter("index sets differ".into()));
    }
    act_twisted_permutation(x, &g.perm, &g.d)
}

/// Element serialization shared by the CLI: `{"phi", "units", "perm", "d"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonoidElementJson {
    #[serde(default)]
    pub phi: Vec<u64>,
    /// Units as coordinate vectors over the base ring.
    #[serde(default)]
    pub units: Vec<Vec<u64>>,
    #[serde(default)]
    pub perm: Vec<usize>,
    #[serde(default)]
    pub d: Vec<u32>,
}
