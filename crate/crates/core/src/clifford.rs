//! The split Clifford algebra C(V,−V), the exterior algebra Λ(V⊕V), the
//! symbol map between them, the Fock representation on ΛV and the two traces.
//!
//! A monomial is a bit key: bits `0..n` are e_1..e_n, bits `n..2n` are
//! ê_1..ê_n, and the canonical order is the bit order.

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;
use std::ops::{Add, Mul, Neg, Sub};

use crate::endf::{Coeff, EndF};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest supported dimension of V.
pub const MAX_N: usize = 15;

/// Sign of reordering the concatenation `a·b` of two sorted monomials into
/// canonical order: true when odd.
#[inline]
pub fn reorder_parity(a: u32, b: u32) -> bool {
    let mut count = 0u32;
    let mut bb = b;
    while bb != 0 {
        let y = bb.trailing_zeros();
        count += (a >> (y + 1)).count_ones();
        bb &= bb - 1;
    }
    count & 1 == 1
}

pub fn key(n: usize, mask_e: u32, mask_ehat: u32) -> u32 {
    mask_e | (mask_ehat << n)
}

pub fn split_key(n: usize, k: u32) -> (u32, u32) {
    let low = (1u32 << n) - 1;
    (k & low, k >> n)
}

/// Product rule distinguishing the two algebras.
pub trait Kind: Clone + PartialEq + fmt::Debug {
    /// Key and sign (true = negative) of the product of two monomials, or
    /// `None` when it vanishes.
    fn product(n: usize, a: u32, b: u32) -> Option<(u32, bool)>;
    const NAME: &'static str;
}

#[derive(Clone, PartialEq, Debug)]
pub struct Cl;
#[derive(Clone, PartialEq, Debug)]
pub struct Ex;

impl Kind for Cl {
    fn product(n: usize, a: u32, b: u32) -> Option<(u32, bool)> {
        let common_e = a & b & ((1u32 << n) - 1);
        let neg = reorder_parity(a, b) ^ (common_e.count_ones() & 1 == 1);
        Some((a ^ b, neg))
    }
    const NAME: &'static str = "Clifford";
}

impl Kind for Ex {
    fn product(_n: usize, a: u32, b: u32) -> Option<(u32, bool)> {
        if a & b != 0 {
            None
        } else {
            Some((a | b, reorder_parity(a, b)))
        }
    }
    const NAME: &'static str = "Exterior";
}

/// Sparse element over `n` generator pairs with coefficients in `C`.
#[derive(Clone, PartialEq)]
pub struct Multivector<K: Kind, C: Coeff = Scalar> {
    n: usize,
    terms: BTreeMap<u32, C>,
    _kind: PhantomData<K>,
}

pub type Clifford<C = Scalar> = Multivector<Cl, C>;
pub type Exterior<C = Scalar> = Multivector<Ex, C>;
pub type CliffordElement = Clifford<Scalar>;
pub type ExteriorElement = Exterior<Scalar>;

impl<K: Kind, C: Coeff> Multivector<K, C> {
    pub fn zero(n: usize) -> Self {
        assert!(n <= MAX_N, "dimension {n} exceeds {MAX_N}");
        Multivector { n, terms: BTreeMap::new(), _kind: PhantomData }
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (u32, C)>) -> Self {
        let mut out = Self::zero(n);
        for (k, c) in terms {
            out.add_term(k, c);
        }
        out
    }

    pub fn scalar(n: usize, c: C) -> Self {
        Self::from_terms(n, [(0, c)])
    }

    pub fn monomial(n: usize, mask_e: u32, mask_ehat: u32, c: C) -> Self {
        assert!(mask_e >> n == 0 && mask_ehat >> n == 0, "generator index out of range");
        Self::from_terms(n, [(key(n, mask_e, mask_ehat), c)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<u32, C> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<u32, C> {
        self.terms
    }

    pub fn coeff(&self, k: u32) -> Option<&C> {
        self.terms.get(&k)
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

    /// Adds `c` to the coefficient of monomial `k`, dropping zeros.
    pub fn add_term(&mut self, k: u32, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&k) {
            Some(v) => {
                let s = v.add(&c);
                if s.is_zero() {
                    self.terms.remove(&k);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(k, c);
            }
        }
    }

    /// Maximal number of generators over stored monomials (0 for zero).
    pub fn filtration_degree(&self) -> usize {
        self.terms.keys().map(|k| k.count_ones() as usize).max().unwrap_or(0)
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|k| k.count_ones() % 2 == 0)
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        Self::from_terms(self.n, self.terms.iter().map(|(k, c)| (*k, c.scale(s))))
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Multivector<K, D> {
        Multivector::from_terms(self.n, self.terms.iter().map(|(k, c)| (*k, f(c))))
    }

    /// Keeps the monomials satisfying `pred`.
    pub fn filter(&self, pred: impl Fn(u32) -> bool) -> Self {
        Multivector {
            n: self.n,
            terms: self.terms.iter().filter(|(k, _)| pred(**k)).map(|(k, c)| (*k, c.clone())).collect(),
            _kind: PhantomData,
        }
    }

    /// Homogeneous part of degree exactly `k`.
    pub fn part(&self, k: usize) -> Self {
        self.filter(|m| m.count_ones() as usize == k)
    }

    /// The scalar (degree 0) coefficient.
    pub fn scalar_part(&self) -> Option<&C> {
        self.terms.get(&0)
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        if self.n != o.n {
            return Err(Error::DimensionMismatch(self.n, o.n));
        }
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(*k, c.clone());
        }
        Ok(out)
    }

    /// Product in the algebra `K`, preserving the order of coefficients.
    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        if self.n != o.n {
            return Err(Error::DimensionMismatch(self.n, o.n));
        }
        let mut out = Self::zero(self.n);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &o.terms {
                if let Some((k, neg)) = K::product(self.n, *ka, *kb) {
                    let c = ca.mul(cb);
                    out.add_term(k, if neg { c.neg() } else { c });
                }
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| c.neg())
    }

    /// Multiplies every coefficient on the left by `c`.
    pub fn left_coeff(&self, c: &C) -> Self {
        self.map_coeffs(|x| c.mul(x))
    }

    /// Multiplies every coefficient on the right by `c`.
    pub fn right_coeff(&self, c: &C) -> Self {
        self.map_coeffs(|x| x.mul(c))
    }

    /// Largest absolute coefficient difference, evaluated numerically.
    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        (self - o).terms.values().map(Coeff::max_abs).fold(0.0, f64::max)
    }
}

impl<K: Kind, C: Coeff> Add for &Multivector<K, C> {
    type Output = Multivector<K, C>;
    fn add(self, o: Self) -> Multivector<K, C> {
        self.try_add(o).expect("dimension mismatch in addition")
    }
}

impl<K: Kind, C: Coeff> Sub for &Multivector<K, C> {
    type Output = Multivector<K, C>;
    fn sub(self, o: Self) -> Multivector<K, C> {
        self.try_add(&o.neg()).expect("dimension mismatch in subtraction")
    }
}

impl<K: Kind, C: Coeff> Mul for &Multivector<K, C> {
    type Output = Multivector<K, C>;
    fn mul(self, o: Self) -> Multivector<K, C> {
        self.try_mul(o).expect("dimension mismatch in product")
    }
}

impl<K: Kind, C: Coeff> Neg for &Multivector<K, C> {
    type Output = Multivector<K, C>;
    fn neg(self) -> Multivector<K, C> {
        Multivector::neg(self)
    }
}

impl<K: Kind> Multivector<K, Scalar> {
    pub fn one(n: usize) -> Self {
        Self::scalar(n, Scalar::one())
    }

    /// Generator e_{i+1} (0-based index `i`).
    pub fn e(n: usize, i: usize) -> Self {
        Self::monomial(n, 1 << i, 0, Scalar::one())
    }

    /// Generator ê_{i+1} (0-based index `i`).
    pub fn ehat(n: usize, i: usize) -> Self {
        Self::monomial(n, 0, 1 << i, Scalar::one())
    }

    /// Converts every coefficient to the float variant.
    pub fn to_float(&self) -> Self {
        self.map_coeffs(Scalar::to_float)
    }

    /// `self ⊗ f` with values in `End F`.
    pub fn tensor(&self, f: &EndF) -> Multivector<K, EndF> {
        self.map_coeffs(|c| f.scale(c))
    }
}

/// e_1…e_n ê_1…ê_n as a single canonical monomial key.
pub fn top_key(n: usize) -> u32 {
    ((1u64 << (2 * n)) - 1) as u32
}

/// Sign and π-power of the volume element: ω = π^{n/2}(−1)^{n(n+1)/2}·top.
fn omega_factor(n: usize) -> Scalar {
    let sign = if (n * (n + 1) / 2) % 2 == 0 { 1 } else { -1 };
    &Scalar::int(sign) * &Scalar::pi_half_pow(n as i32)
}

/// The Clifford volume element ω.
pub fn omega_clifford(n: usize) -> CliffordElement {
    Clifford::from_terms(n, [(top_key(n), omega_factor(n))])
}

/// The exterior volume element ω.
pub fn omega_exterior(n: usize) -> ExteriorElement {
    Exterior::from_terms(n, [(top_key(n), omega_factor(n))])
}

/// The basis-wise symbol map.
pub fn symbol<C: Coeff>(a: &Clifford<C>) -> Exterior<C> {
    Exterior::from_terms(a.n(), a.terms().iter().map(|(k, c)| (*k, c.clone())))
}

/// Degree-`k` component of the symbol.
pub fn symbol_k<C: Coeff>(a: &Clifford<C>, k: usize) -> Result<Exterior<C>> {
    if k > 2 * a.n() {
        return Err(Error::DegreeOutOfRange { k, max: 2 * a.n() });
    }
    Ok(symbol(&a.part(k)))
}

/// Inverse of the symbol map.
pub fn quantize<C: Coeff>(a: &Exterior<C>) -> Clifford<C> {
    Clifford::from_terms(a.n(), a.terms().iter().map(|(k, c)| (*k, c.clone())))
}

/// Berezin trace: coefficient of ω, extended by the trace on coefficients.
pub fn berezin_trace<C: Coeff>(a: &Exterior<C>) -> Scalar {
    let n = a.n();
    match a.coeff(top_key(n)) {
        None => Scalar::zero(),
        Some(c) => {
            let t = c.trace();
            let sign = if (n * (n + 1) / 2) % 2 == 0 { 1 } else { -1 };
            let f = &Scalar::int_like(sign, &t) * &Scalar::pi_half_pow_like(-(n as i32), &t);
            &t * &f
        }
    }
}

/// Dense operator on ΛV in the monomial basis (subsets of {1..n} as bit masks).
#[derive(Clone, PartialEq, Debug)]
pub struct FockOperator {
    pub n: usize,
    /// Row-major `2^n × 2^n` entries.
    pub mat: Vec<Scalar>,
}

impl FockOperator {
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn zeros(n: usize) -> Self {
        FockOperator { n, mat: vec![Scalar::zero(); 1 << (2 * n)] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for s in 0..(1usize << n) {
            m.mat[s * (1 << n) + s] = Scalar::one();
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.mat[r * self.dim() + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        let d = self.dim();
        self.mat[r * d + c] = v;
    }

    /// The grading operator (−1)^N.
    pub fn parity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for s in 0..(1usize << n) {
            m.mat[s * (1 << n) + s] = Scalar::int(if s.count_ones() % 2 == 0 { 1 } else { -1 });
        }
        m
    }

    /// The number operator N.
    pub fn number(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for s in 0..(1usize << n) {
            m.mat[s * (1 << n) + s] = Scalar::int(s.count_ones() as i64);
        }
        m
    }

    pub fn matmul(&self, o: &Self) -> Self {
        assert_eq!(self.n, o.n, "Fock dimension mismatch");
        let d = self.dim();
        let mut out = Self::zeros(self.n);
        for i in 0..d {
            for k in 0..d {
                let a = &self.mat[i * d + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let b = &o.mat[k * d + j];
                    if !b.is_zero() {
                        out.mat[i * d + j] += &(a * b);
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        FockOperator { n: self.n, mat: self.mat.iter().zip(&o.mat).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        FockOperator { n: self.n, mat: self.mat.iter().map(|a| a * s).collect() }
    }

    /// Signed trace with (−1)^{form degree}.
    pub fn supertrace(&self) -> Scalar {
        let mut t = Scalar::zero();
        for s in 0..self.dim() {
            let v = self.get(s, s);
            if s.count_ones() % 2 == 0 {
                t += v;
            } else {
                t += &(-v);
            }
        }
        t
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.mat.iter().map(Scalar::to_f64).collect()
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        self.mat.iter().zip(&o.mat).map(|(a, b)| a.abs_diff(b)).fold(0.0, f64::max)
    }

    /// Λg for a linear map g of V (matrix acting on column vectors), built
    /// from minors: ⟨e_R, Λg e_S⟩ = det g[R,S].
    pub fn exterior_power(g: &[Vec<Scalar>]) -> Self {
        let n = g.len();
        let mut m = Self::zeros(n);
        for s in 0..(1usize << n) {
            for r in 0..(1usize << n) {
                if r.count_ones() != s.count_ones() {
                    continue;
                }
                let rows: Vec<usize> = (0..n).filter(|i| r >> i & 1 == 1).collect();
                let cols: Vec<usize> = (0..n).filter(|i| s >> i & 1 == 1).collect();
                let sub: Vec<Vec<Scalar>> =
                    rows.iter().map(|&i| cols.iter().map(|&j| g[i][j].clone()).collect()).collect();
                m.set(r, s, det_scalar(&sub));
            }
        }
        if g.iter().flatten().any(|x| !x.is_exact()) {
            // the empty minor is an exact 1; keep the operator in one variant
            for v in m.mat.iter_mut() {
                if !v.is_zero() {
                    *v = v.to_float();
                }
            }
        }
        m
    }
}

/// Determinant by Laplace expansion (small matrices only).
pub fn det_scalar(m: &[Vec<Scalar>]) -> Scalar {
    let k = m.len();
    if k == 0 {
        return Scalar::one();
    }
    if k == 1 {
        return m[0][0].clone();
    }
    let mut total = Scalar::zero();
    for j in 0..k {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Scalar>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = &m[0][j] * &det_scalar(&minor);
        total = if j % 2 == 0 { &total + &term } else { &total - &term };
    }
    total
}

/// Action of c(e_i) (hat = false) or ĉ(e_i) (hat = true) on basis vector `s`;
/// returns the image basis vector and whether the sign is negative.
#[inline]
fn fock_gen(i: usize, hat: bool, s: usize) -> (usize, bool) {
    let below = (s & ((1usize << i) - 1)).count_ones() & 1 == 1;
    if s >> i & 1 == 0 {
        (s | 1 << i, below)
    } else {
        // interior product; c carries a minus sign, ĉ does not
        (s & !(1 << i), below ^ !hat)
    }
}

/// Image of basis vector `s` under the operator of monomial `k`.
pub fn fock_monomial_apply(n: usize, k: u32, s: usize) -> (usize, bool) {
    let (me, mh) = split_key(n, k);
    let mut v = s;
    let mut neg = false;
    for i in (0..n).rev() {
        if mh >> i & 1 == 1 {
            let (w, sg) = fock_gen(i, true, v);
            v = w;
            neg ^= sg;
        }
    }
    for i in (0..n).rev() {
        if me >> i & 1 == 1 {
            let (w, sg) = fock_gen(i, false, v);
            v = w;
            neg ^= sg;
        }
    }
    (v, neg)
}

/// Fock representation c(e_i) = ε − ι, ĉ(e_i) = ε + ι.
pub fn fock_rep(a: &CliffordElement) -> FockOperator {
    let n = a.n();
    let mut m = FockOperator::zeros(n);
    let d = 1usize << n;
    for (k, c) in a.terms() {
        for s in 0..d {
            let (r, neg) = fock_monomial_apply(n, *k, s);
            let v = if neg { -c } else { c.clone() };
            m.mat[r * d + s] += &v;
        }
    }
    m
}

/// Inverse of the Fock representation: expands an operator in monomials
/// using Tr(c(m)ᵀ c(m')) = 2^n δ.
pub fn fock_to_clifford(op: &FockOperator) -> CliffordElement {
    let n = op.n;
    let d = 1usize << n;
    let like = op.mat.iter().find(|s| !s.is_zero()).cloned().unwrap_or_else(Scalar::one);
    let inv_d = Scalar::rational_like(1, d as i64, &like);
    let mut out = Clifford::zero(n);
    for k in 0..(1u32 << (2 * n)) {
        let mut acc = Scalar::zero();
        for s in 0..d {
            let (r, neg) = fock_monomial_apply(n, k, s);
            let v = op.get(r, s);
            if !v.is_zero() {
                acc += &(if neg { -v } else { v.clone() });
            }
        }
        out.add_term(k, &acc * &inv_d);
    }
    out
}

/// Supertrace of a single canonical monomial via the Fock representation,
/// computed without building the matrix.
pub fn supertrace_monomial(n: usize, k: u32) -> i64 {
    let (me, mh) = split_key(n, k);
    if me != mh {
        return 0;
    }
    let mut t = 0i64;
    for s in 0..(1usize << n) {
        let (r, neg) = fock_monomial_apply(n, k, s);
        debug_assert_eq!(r, s);
        let sg = if s.count_ones() % 2 == 0 { 1 } else { -1 };
        t += if neg { -sg } else { sg };
    }
    t
}

/// Supertrace, algorithm A: signed trace of the Fock matrix.
pub fn supertrace(a: &CliffordElement) -> Scalar {
    fock_rep(a).supertrace()
}

/// Supertrace, algorithm B: (4π)^{n/2}·T(σ(a)).
pub fn supertrace_via_berezin<C: Coeff>(a: &Clifford<C>) -> Scalar {
    let t = berezin_trace(&symbol(a));
    let n = a.n() as i32;
    let four_pi = &Scalar::int_like(1i64 << n, &t) * &Scalar::pi_half_pow_like(n, &t);
    &t * &four_pi
}

/// Str ⊗ Tr for `End F`-valued elements, monomial by monomial.
pub fn supertrace_coeff<C: Coeff>(a: &Clifford<C>) -> Scalar {
    let mut t = Scalar::zero();
    for (k, c) in a.terms() {
        let s = supertrace_monomial(a.n(), *k);
        if s != 0 {
            let tr = c.trace();
            t += &(&tr * &Scalar::int_like(s, &tr));
        }
    }
    t
}

/// exp of an even nilpotent element (zero scalar part), as a finite sum.
pub fn exterior_exp_nilpotent<C: Coeff>(a: &Exterior<C>, one: &C) -> Result<Exterior<C>> {
    if !a.is_even() {
        return Err(Error::OddGraded);
    }
    if a.scalar_part().is_some() {
        return Err(Error::InexactExponential);
    }
    let n = a.n();
    let mut out = Exterior::scalar(n, one.clone());
    let mut term = Exterior::scalar(n, one.clone());
    let mut k = 1i64;
    loop {
        term = &term * a;
        if term.is_zero() {
            break;
        }
        let like = one.trace();
        term = term.scale(&Scalar::rational_like(1, k, &like));
        out = &out + &term;
        k += 1;
    }
    Ok(out)
}

/// exp of an even element: Σ ν^k/k! · exp(scalar part). An exact nonzero
/// scalar part has no exact exponential and is rejected.
pub fn exterior_exp(a: &ExteriorElement) -> Result<ExteriorElement> {
    if !a.is_even() {
        return Err(Error::OddGraded);
    }
    let s = a.scalar_part().cloned().unwrap_or_else(Scalar::zero);
    let nil = a.filter(|k| k != 0);
    let like = a.terms().values().next().cloned().unwrap_or_else(Scalar::one);
    let one = Scalar::int_like(1, &like);
    let e = exterior_exp_nilpotent(&nil, &one)?;
    match s {
        Scalar::Float(x) => Ok(e.scale(&Scalar::float(x.exp()))),
        ref z if z.is_zero() => Ok(e),
        _ => Err(Error::InexactExponential),
    }
}

fn check_antisymmetric(a: &[Vec<Scalar>]) -> Result<()> {
    let n = a.len();
    for (i, row) in a.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch(row.len(), n));
        }
        for j in 0..n {
            if !(&a[i][j] + &a[j][i]).is_zero() && (a[i][j].to_f64() + a[j][i].to_f64()).abs() > 1e-14 {
                return Err(Error::NotAntisymmetric);
            }
        }
    }
    Ok(())
}

/// −λA = ½ Σ_{i<j} A_ij (c_i c_j − ĉ_i ĉ_j).
pub fn minus_lambda(a: &[Vec<Scalar>]) -> Result<CliffordElement> {
    check_antisymmetric(a)?;
    let n = a.len();
    let mut out = Clifford::zero(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let aij = &a[i][j];
            if aij.is_zero() {
                continue;
            }
            let half = &Scalar::rational_like(1, 2, aij) * aij;
            out.add_term(key(n, (1 << i) | (1 << j), 0), half.clone());
            out.add_term(key(n, 0, (1 << i) | (1 << j)), -&half);
        }
    }
    Ok(out)
}

/// exp(−λA). Exact entries: truncated series (after a zero term or 4n
/// terms), accepted only if the result is group-like. Float entries: matrix
/// exponential of the Fock image.
pub fn lambda_exp(a: &[Vec<Scalar>]) -> Result<CliffordElement> {
    let x = minus_lambda(a)?;
    let n = a.len();
    let float = a.iter().flatten().any(|s| !s.is_exact());
    if float {
        let m = fock_rep(&x.map_coeffs(|c| if c.is_exact() { c.to_float() } else { c.clone() }));
        let e = crate::linalg::expm(&m.to_f64(), m.dim());
        let op = FockOperator { n, mat: e.into_iter().map(Scalar::float).collect() };
        let mut out = fock_to_clifford(&op);
        out = out.filter(|k| out.coeff(k).map(|c| c.to_f64().abs() > 1e-300).unwrap_or(false));
        return Ok(out);
    }
    let mut out = Clifford::one(n);
    let mut term = Clifford::one(n);
    let mut terminated = false;
    for k in 1..=(4 * n.max(1)) {
        term = (&term * &x).scale(&Scalar::rational(1, k as i64));
        if term.is_zero() {
            terminated = true;
            break;
        }
        out = &out + &term;
    }
    let neg: Vec<Vec<Scalar>> = a.iter().map(|r| r.iter().map(|s| -s).collect()).collect();
    if !terminated {
        return Err(Error::SeriesNotTerminated);
    }
    let inv = {
        let y = minus_lambda(&neg)?;
        let mut o = Clifford::one(n);
        let mut t = Clifford::one(n);
        for k in 1..=(4 * n.max(1)) {
            t = (&t * &y).scale(&Scalar::rational(1, k as i64));
            if t.is_zero() {
                break;
            }
            o = &o + &t;
        }
        o
    };
    if &out * &inv != Clifford::one(n) {
        return Err(Error::SeriesNotTerminated);
    }
    Ok(out)
}

/// σ_k followed by the projection onto Λ(V_0 ⊕ V_0), V_0 = span(e_1..e_{n0}).
pub fn sigma0_projection<C: Coeff>(a: &Clifford<C>, k: usize, n0: usize) -> Result<Exterior<C>> {
    let n = a.n();
    if n0 > n {
        return Err(Error::DimensionMismatch(n0, n));
    }
    let s = symbol_k(a, k)?;
    Ok(restrict_exterior(&s, n0))
}

/// Drops monomials with an index ≥ n0 and re-keys to dimension n0.
pub fn restrict_exterior<C: Coeff>(a: &Exterior<C>, n0: usize) -> Exterior<C> {
    let n = a.n();
    let low = (1u32 << n0) - 1;
    let mut out = Exterior::zero(n0);
    for (k, c) in a.terms() {
        let (me, mh) = split_key(n, *k);
        if me & !low == 0 && mh & !low == 0 {
            out.add_term(key(n0, me, mh), c.clone());
        }
    }
    out
}

/// Embeds an element over the first `n0` indices into dimension `n`.
pub fn extend_exterior<C: Coeff>(a: &Exterior<C>, n: usize) -> Exterior<C> {
    let n0 = a.n();
    let mut out = Exterior::zero(n);
    for (k, c) in a.terms() {
        let (me, mh) = split_key(n0, *k);
        out.add_term(key(n, me, mh), c.clone());
    }
    out
}

/// Monomial name such as `e1 e3 ^ ê2`.
pub fn monomial_name(n: usize, k: u32) -> String {
    let (me, mh) = split_key(n, k);
    let es: Vec<String> = (0..n).filter(|i| me >> i & 1 == 1).map(|i| format!("e{}", i + 1)).collect();
    let hs: Vec<String> = (0..n).filter(|i| mh >> i & 1 == 1).map(|i| format!("ê{}", i + 1)).collect();
    match (es.is_empty(), hs.is_empty()) {
        (true, true) => "1".to_string(),
        (false, true) => es.join(" "),
        (true, false) => hs.join(" "),
        (false, false) => format!("{} ^ {}", es.join(" "), hs.join(" ")),
    }
}

impl<K: Kind, C: Coeff> fmt::Debug for Multivector<K, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c:?}) {}", monomial_name(self.n, *k))?;
        }
        Ok(())
    }
}

impl<K: Kind, C: Coeff> fmt::Display for Multivector<K, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    fn int(v: i64) -> Scalar {
        Scalar::int(v)
    }

    #[test]
    fn generator_squares() {
        let e1 = Clifford::e(2, 0);
        let h1 = Clifford::ehat(2, 0);
        assert_eq!(&e1 * &e1, Clifford::scalar(2, int(-1)));
        assert_eq!(&h1 * &h1, Clifford::one(2));
        assert!((&(&e1 * &h1) + &(&h1 * &e1)).is_zero());
        let e2 = Clifford::e(2, 1);
        assert!((&(&e1 * &e2) + &(&e2 * &e1)).is_zero());
    }

    #[test]
    fn wedge_examples() {
        let e1 = Exterior::e(2, 0);
        let h1 = Exterior::ehat(2, 0);
        assert!((&e1 * &e1).is_zero());
        assert_eq!(&e1 * &h1, Exterior::monomial(2, 1, 1, int(1)));
        let a = &e1 * &Exterior::e(2, 1);
        let b = &h1 * &Exterior::ehat(2, 1);
        assert_eq!(&a * &b, Exterior::monomial(2, 3, 3, int(1)));
        // odd elements anticommute
        assert_eq!(&h1 * &e1, (&e1 * &h1).neg());
    }

    #[test]
    fn symbol_examples() {
        let m = &Clifford::e(2, 0) * &Clifford::ehat(2, 1);
        assert_eq!(symbol(&m), &Exterior::e(2, 0) * &Exterior::ehat(2, 1));
        let sq = &Clifford::e(2, 0) * &Clifford::e(2, 0);
        assert_eq!(symbol_k(&sq, 0).unwrap(), Exterior::scalar(2, int(-1)));
        assert_eq!(quantize(&omega_exterior(3)), omega_clifford(3));
        assert!(quantize(&Exterior::<Scalar>::zero(2)).is_zero());
        assert!(symbol_k(&sq, 5).is_err());
    }

    #[test]
    fn fock_rep_small_cases() {
        assert_eq!(fock_rep(&Clifford::one(3)), FockOperator::identity(3));
        let m = &Clifford::e(1, 0) * &Clifford::ehat(1, 0);
        let f = fock_rep(&m);
        assert_eq!(f.get(0, 0), &int(-1));
        assert_eq!(f.get(1, 1), &int(1));
        assert!(f.get(0, 1).is_zero() && f.get(1, 0).is_zero());
    }

    #[test]
    fn fock_generators_satisfy_relations() {
        let n = 3;
        for i in 0..n {
            let c = fock_rep(&Clifford::e(n, i));
            let ch = fock_rep(&Clifford::ehat(n, i));
            assert_eq!(c.matmul(&c), FockOperator::identity(n).scale(&int(-1)));
            assert_eq!(ch.matmul(&ch), FockOperator::identity(n));
            for j in 0..n {
                let cj = fock_rep(&Clifford::ehat(n, j));
                let anti = c.matmul(&cj).add(&cj.matmul(&c));
                assert!(anti.mat.iter().all(Scalar::is_zero));
            }
        }
    }

    #[test]
    fn volume_element_acts_as_parity() {
        for n in 0..=4 {
            let expect = FockOperator::parity(n).scale(&Scalar::pi_half_pow(n as i32));
            assert_eq!(fock_rep(&omega_clifford(n)), expect, "n = {n}");
        }
    }

    #[test]
    fn supertrace_oracles() {
        for n in 1..=4 {
            assert!(supertrace(&Clifford::one(n)).is_zero());
            let four_pi = &Scalar::int(1 << n) * &Scalar::pi_half_pow(n as i32);
            assert_eq!(supertrace(&omega_clifford(n)), four_pi);
            assert_eq!(supertrace_via_berezin(&omega_clifford(n)), four_pi);
        }
        let m = &Clifford::e(1, 0) * &Clifford::ehat(1, 0);
        assert_eq!(supertrace(&m), int(-2));
        assert_eq!(supertrace_via_berezin(&m), int(-2));
    }

    #[test]
    fn berezin_examples() {
        for n in 1..=4 {
            assert_eq!(berezin_trace(&omega_exterior(n)), int(1));
            let sign = if (n * (n + 1) / 2) % 2 == 0 { 1 } else { -1 };
            let top = Exterior::from_terms(n, [(top_key(n), int(1))]);
            assert_eq!(berezin_trace(&top), &int(sign) * &Scalar::pi_half_pow(-(n as i32)));
            let low = Exterior::monomial(n, (1 << n) - 1, 0, int(3));
            assert!(berezin_trace(&low).is_zero());
        }
    }

    #[test]
    fn exterior_exp_examples() {
        assert_eq!(exterior_exp(&Exterior::zero(2)).unwrap(), Exterior::one(2));
        let w = omega_exterior(2).scale(&int(5));
        assert_eq!(exterior_exp(&w).unwrap(), &Exterior::one(2) + &w);
        assert_eq!(exterior_exp(&Exterior::e(2, 0)).unwrap_err(), Error::OddGraded);
        assert_eq!(exterior_exp(&Exterior::one(2)).unwrap_err(), Error::InexactExponential);
    }

    #[test]
    fn exterior_exp_inverts_series_log() {
        // log(1 + ν) = Σ (−1)^{k+1} ν^k / k for nilpotent ν
        let n = 3;
        let nu = &(&(&Exterior::e(n, 0) * &Exterior::ehat(n, 1)).scale(&Scalar::rational(2, 3))
            + &(&Exterior::e(n, 1) * &Exterior::e(n, 2)))
            + &(&Exterior::ehat(n, 0) * &Exterior::ehat(n, 2)).scale(&int(-4));
        let mut log = Exterior::zero(n);
        let mut pow = Exterior::one(n);
        for k in 1..=2 * n as i64 {
            pow = &pow * &nu;
            let sign = if k % 2 == 1 { 1 } else { -1 };
            log = &log + &pow.scale(&Scalar::rational(sign, k));
        }
        assert_eq!(exterior_exp(&log).unwrap(), &Exterior::one(n) + &nu);
    }

    fn float_matrix(a: &[Vec<f64>]) -> Vec<Vec<Scalar>> {
        a.iter().map(|r| r.iter().map(|&x| Scalar::float(x)).collect()).collect()
    }

    #[test]
    fn lambda_exp_rotation_matches_exterior_power() {
        let th = 0.9f64;
        let a = vec![vec![0.0, th], vec![-th, 0.0]];
        let x = lambda_exp(&float_matrix(&a)).unwrap();
        // exp(−A) with A e_j = Σ_i A_ij e_i
        let neg: Vec<f64> = a.iter().flatten().map(|v| -v).collect();
        let g = crate::linalg::expm(&neg, 2);
        let gm: Vec<Vec<Scalar>> = (0..2).map(|i| (0..2).map(|j| Scalar::float(g[i * 2 + j])).collect()).collect();
        let expect = FockOperator::exterior_power(&gm);
        assert!(fock_rep(&x).max_abs_diff(&expect) < 1e-13);
    }

    #[test]
    fn lambda_exp_basic() {
        let z = vec![vec![Scalar::zero(); 3]; 3];
        assert_eq!(lambda_exp(&z).unwrap(), Clifford::one(3));
        let bad = vec![vec![Scalar::zero(), Scalar::int(1)], vec![Scalar::int(1), Scalar::zero()]];
        assert_eq!(lambda_exp(&bad).unwrap_err(), Error::NotAntisymmetric);
        let a = vec![vec![0.0, 0.3, -0.2], vec![-0.3, 0.0, 0.5], vec![0.2, -0.5, 0.0]];
        let na: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
        let p = &lambda_exp(&float_matrix(&a)).unwrap() * &lambda_exp(&float_matrix(&na)).unwrap();
        assert!(p.max_abs_diff(&Clifford::one(3).to_float()) < 1e-12);
    }

    #[test]
    fn sigma0_examples() {
        let m = &Clifford::e(2, 0) * &Clifford::ehat(2, 1);
        assert!(sigma0_projection(&m, 2, 1).unwrap().is_zero());
        let m = &Clifford::e(2, 0) * &Clifford::ehat(2, 0);
        assert_eq!(sigma0_projection(&m, 2, 1).unwrap(), Exterior::monomial(1, 1, 1, int(1)));
        let r = rng::random_clifford(&mut rng::seeded(3), 2, 0.5);
        assert_eq!(sigma0_projection(&r, 2, 2).unwrap(), symbol_k(&r, 2).unwrap());
    }

    #[test]
    fn supertrace_kills_low_monomials_exhaustively() {
        for n in 1..=4 {
            for k in 0..(1u32 << (2 * n)) {
                let expect = if k == top_key(n) { 1 } else { 0 };
                assert_eq!(supertrace_monomial(n, k) != 0, expect == 1, "n={n} k={k:b}");
            }
        }
    }

    #[test]
    fn display_format() {
        let x = Clifford::monomial(3, 0b101, 0b010, Scalar::rational(-3, 4));
        assert_eq!(format!("{x}"), "(-3/4) e1 e3 ^ ê2");
    }

    fn lambda_block(n: usize, i: usize, j: usize, t: f64) -> Vec<Vec<Scalar>> {
        let mut a = vec![vec![Scalar::zero(); n]; n];
        a[i][j] = Scalar::float(t);
        a[j][i] = Scalar::float(-t);
        for r in a.iter_mut() {
            for c in r.iter_mut() {
                if c.is_zero() {
                    *c = Scalar::float(0.0);
                }
            }
        }
        a
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn prop_supertrace_two_ways(seed in any::<u64>(), n in 1usize..=4) {
            let a = rng::random_clifford(&mut rng::seeded(seed), n, 0.3);
            prop_assert_eq!(supertrace(&a), supertrace_via_berezin(&a));
        }

        #[test]
        fn prop_associative(seed in any::<u64>(), n in 1usize..=3) {
            let mut r = rng::seeded(seed);
            let a = rng::random_clifford(&mut r, n, 0.3);
            let b = rng::random_clifford(&mut r, n, 0.3);
            let c = rng::random_clifford(&mut r, n, 0.3);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        }

        #[test]
        fn prop_supercommutator_traceless(seed in any::<u64>(), n in 1usize..=3) {
            let mut r = rng::seeded(seed);
            let a = rng::random_clifford(&mut r, n, 0.4);
            let b = rng::random_clifford(&mut r, n, 0.4);
            let mut t = Scalar::zero();
            for (ka, ca) in a.terms() {
                for (kb, cb) in b.terms() {
                    let x = Clifford::from_terms(n, [(*ka, ca.clone())]);
                    let y = Clifford::from_terms(n, [(*kb, cb.clone())]);
                    let sign = if (ka.count_ones() * kb.count_ones()) % 2 == 1 { -1 } else { 1 };
                    let br = &(&x * &y) - &(&y * &x).scale(&Scalar::int(sign));
                    t += &supertrace(&br);
                }
            }
            prop_assert!(t.is_zero());
        }

        #[test]
        fn prop_symbol_roundtrip(seed in any::<u64>(), n in 1usize..=4) {
            let a = rng::random_clifford(&mut rng::seeded(seed), n, 0.5);
            prop_assert_eq!(quantize(&symbol(&a)), a.clone());
            prop_assert_eq!(fock_to_clifford(&fock_rep(&a)), a);
        }

        #[test]
        fn prop_commuting_rotations(s in -2.0f64..2.0, t in -2.0f64..2.0) {
            let n = 4;
            let a = lambda_block(n, 0, 1, s);
            let b = lambda_block(n, 2, 3, t);
            let sum: Vec<Vec<Scalar>> =
                a.iter().zip(&b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect()).collect();
            let lhs = &lambda_exp(&a).unwrap() * &lambda_exp(&b).unwrap();
            prop_assert!(lhs.max_abs_diff(&lambda_exp(&sum).unwrap()) < 1e-12);
        }
    }
}
