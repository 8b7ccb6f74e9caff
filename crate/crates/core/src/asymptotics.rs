//! Gaussian moments, the Taylor series of exp(−λA) and its symbol, and the
//! small-t limits of Gaussian integrals of Clifford-valued polynomials.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::clifford::{
    berezin_trace, key, sigma0_projection, split_key, supertrace, supertrace_coeff, symbol, symbol_k, Clifford,
    CliffordElement, Exterior, ExteriorElement,
};
use crate::endf::EndF;
use crate::error::{Error, Result};
use crate::rng::{self, DetRng};
use crate::scalar::Scalar;

/// Exponents over the N = n(n−1)/2 coordinates A_ij, i < j, in
/// lexicographic pair order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(slots: usize) -> Self {
        MultiIndex(vec![0; slots])
    }

    pub fn unit(slots: usize, s: usize) -> Self {
        let mut v = vec![0; slots];
        v[s] = 1;
        MultiIndex(v)
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    pub fn is_even(&self) -> bool {
        self.0.iter().all(|a| a % 2 == 0)
    }

    pub fn add(&self, o: &Self) -> Self {
        MultiIndex(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    /// `self − e_s`, if nonnegative.
    pub fn minus_unit(&self, s: usize) -> Option<Self> {
        if self.0[s] == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[s] -= 1;
        Some(MultiIndex(v))
    }

    /// `self − o`, if nonnegative in every slot.
    pub fn checked_sub(&self, o: &Self) -> Option<Self> {
        let mut v = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&o.0) {
            v.push(a.checked_sub(*b)?);
        }
        Some(MultiIndex(v))
    }

    /// α!/(α/2)! for even α.
    pub fn moment_factor(&self) -> BigInt {
        let mut num = BigInt::one();
        for &a in &self.0 {
            for k in (a / 2 + 1)..=a {
                num *= BigInt::from(k);
            }
        }
        num
    }

    /// All multi-indices with `slots` entries and total degree ≤ `d`,
    /// in lexicographic order.
    pub fn all_up_to(slots: usize, d: usize) -> Vec<MultiIndex> {
        fn rec(slots: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if cur.len() == slots {
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for a in 0..=left {
                cur.push(a as u32);
                rec(slots, left - a, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(slots, d, &mut Vec::new(), &mut out);
        out.sort();
        out
    }
}

/// Pairs (i, j), i < j, in slot order.
pub fn pair_slots(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            v.push((i, j));
        }
    }
    v
}

/// Value of (4πt)^{−N/2} ∫ exp(−|A|²/4t) A^α dA as a power of t and its
/// coefficient. Odd α give `t_power: None` and a zero coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussMoment {
    pub t_power: Option<usize>,
    pub coeff: Scalar,
}

pub fn gaussian_moment(alpha: &MultiIndex) -> GaussMoment {
    if !alpha.is_even() {
        return GaussMoment { t_power: None, coeff: Scalar::zero() };
    }
    GaussMoment {
        t_power: Some(alpha.degree() / 2),
        coeff: Scalar::from_big(BigRational::from_integer(alpha.moment_factor()), 0),
    }
}

/// lim_{t→0} t^{−deg/2} (4πt)^{−N/2} ∫ exp(−|A|²/4t) φ(A) dA from the Taylor
/// coefficients of φ, for an arbitrary nonnegative degree `deg`.
pub fn gaussian_limit_degree(taylor: &BTreeMap<MultiIndex, Scalar>, deg: usize) -> Result<Scalar> {
    let mut total = Scalar::zero();
    for (alpha, c) in taylor {
        if c.is_zero() || !alpha.is_even() {
            continue;
        }
        let d = alpha.degree();
        if d < deg {
            return Err(Error::DivergentLimit { degree: d, bound: deg });
        }
        if d == deg {
            let f = Scalar::int_like(1, c);
            let m = match f {
                Scalar::Float(_) => Scalar::float(num_traits::ToPrimitive::to_f64(&alpha.moment_factor()).unwrap()),
                _ => Scalar::from_big(BigRational::from_integer(alpha.moment_factor()), 0),
            };
            total += &(c * &m);
        }
    }
    Ok(total)
}

/// The limit with t^{−i}: Σ_{|α|=2i, α even} φ_α α!/(α/2)!.
pub fn gaussian_limit(taylor: &BTreeMap<MultiIndex, Scalar>, i: usize) -> Result<Scalar> {
    gaussian_limit_degree(taylor, 2 * i)
}

/// Taylor coefficients of Q(A) = exp(−λA) and P(A) = exp(σ₂(−λA)).
#[derive(Clone, Debug)]
pub struct SeriesQP {
    pub n: usize,
    pub degree: usize,
    pub q: BTreeMap<MultiIndex, CliffordElement>,
    pub p: BTreeMap<MultiIndex, ExteriorElement>,
}

/// L_ij = ½(c_i c_j − ĉ_i ĉ_j), so that −λA = Σ_{i<j} A_ij L_ij.
pub fn lambda_generator(n: usize, i: usize, j: usize) -> CliffordElement {
    let half = Scalar::rational(1, 2);
    Clifford::from_terms(n, [(key(n, (1 << i) | (1 << j), 0), half.clone()), (key(n, 0, (1 << i) | (1 << j)), -&half)])
}

/// Q by the recursion X^k_α = Σ_s X^{k−1}_{α−e_s} L_s with Q_α = X^{|α|}_α / |α|!;
/// P independently as Π_s σ(L_s)^{α_s}/α_s! in the commutative even algebra.
pub fn qp_series(n: usize, d: usize) -> Result<SeriesQP> {
    if d > 2 * n {
        return Err(Error::DegreeOutOfRange { k: d, max: 2 * n });
    }
    let slots = pair_slots(n);
    let ns = slots.len();
    let gens: Vec<CliffordElement> = slots.iter().map(|&(i, j)| lambda_generator(n, i, j)).collect();
    let all = MultiIndex::all_up_to(ns, d);
    // X^{|α|}_α, by increasing degree
    let mut x: BTreeMap<MultiIndex, CliffordElement> = BTreeMap::new();
    let mut by_degree = all.clone();
    by_degree.sort_by_key(|a| a.degree());
    let mut q = BTreeMap::new();
    let mut fact = BigInt::one();
    let mut last_deg = 0usize;
    for alpha in &by_degree {
        let k = alpha.degree();
        while last_deg < k {
            last_deg += 1;
            fact *= BigInt::from(last_deg);
        }
        let val = if k == 0 {
            Clifford::one(n)
        } else {
            let mut acc = Clifford::zero(n);
            for s in 0..ns {
                if let Some(prev) = alpha.minus_unit(s) {
                    if let Some(xp) = x.get(&prev) {
                        acc = &acc + &(xp * &gens[s]);
                    }
                }
            }
            acc
        };
        let inv = Scalar::from_big(BigRational::new(BigInt::one(), fact.clone()), 0);
        q.insert(alpha.clone(), val.scale(&inv));
        x.insert(alpha.clone(), val);
    }
    let sym: Vec<ExteriorElement> = gens.iter().map(symbol).collect();
    let mut powers: Vec<Vec<ExteriorElement>> = Vec::with_capacity(ns);
    for s in &sym {
        let mut v = vec![Exterior::one(n)];
        for a in 1..=d {
            let next = (&v[a - 1] * s).scale(&Scalar::rational(1, a as i64));
            v.push(next);
        }
        powers.push(v);
    }
    let mut p = BTreeMap::new();
    for alpha in &all {
        let mut acc = Exterior::one(n);
        for (s, &a) in alpha.0.iter().enumerate() {
            acc = &acc * &powers[s][a as usize];
        }
        p.insert(alpha.clone(), acc);
    }
    Ok(SeriesQP { n, degree: d, q, p })
}

impl SeriesQP {
    /// Checks P_α = σ_{2|α|} Q_α for every stored α.
    pub fn symbol_invariant_holds(&self) -> bool {
        self.q.iter().all(|(a, qa)| {
            let k = 2 * a.degree();
            let s = if k > 2 * self.n { Exterior::zero(self.n) } else { symbol(&qa.part(k)) };
            &s == self.p.get(a).unwrap()
        })
    }
}

/// Compares Σ_{α even} P_α α!/(α/2)! A^α with exp(−½ Σ_{i<j} A_ij² e_i∧e_j∧ê_i∧ê_j)
/// coefficient by coefficient through total degree `d`, and checks the
/// symbol relation between P and Q.
pub fn moment_identity_check(n: usize, d: usize) -> Result<bool> {
    let series = qp_series(n, d)?;
    if !series.symbol_invariant_holds() {
        return Ok(false);
    }
    let slots = pair_slots(n);
    let w: Vec<ExteriorElement> = slots
        .iter()
        .map(|&(i, j)| Exterior::monomial(n, (1 << i) | (1 << j), (1 << i) | (1 << j), Scalar::rational(-1, 2)))
        .collect();
    for (alpha, p) in &series.p {
        if !alpha.is_even() {
            continue;
        }
        let lhs = p.scale(&Scalar::from_big(BigRational::from_integer(alpha.moment_factor()), 0));
        let mut rhs = Exterior::one(n);
        for (s, &a) in alpha.0.iter().enumerate() {
            let b = (a / 2) as usize;
            let mut pw = Exterior::one(n);
            for k in 1..=b {
                pw = (&pw * &w[s]).scale(&Scalar::rational(1, k as i64));
            }
            rhs = &rhs * &pw;
        }
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// φ(A) = Σ_α φ_α A^α with Clifford ⊗ End F coefficients and a declared
/// filtration bound.
#[derive(Clone, Debug)]
pub struct CliffordPolynomialMap {
    pub n: usize,
    pub fiber_dim: usize,
    pub bound: usize,
    pub coeffs: BTreeMap<MultiIndex, Clifford<EndF>>,
}

impl CliffordPolynomialMap {
    pub fn constant(value: Clifford<EndF>, fiber_dim: usize, bound: usize) -> Self {
        let n = value.n();
        let slots = n * n.saturating_sub(1) / 2;
        let mut coeffs = BTreeMap::new();
        coeffs.insert(MultiIndex::zero(slots), value);
        CliffordPolynomialMap { n, fiber_dim, bound, coeffs }
    }

    pub fn slots(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    pub fn check_bound(&self) -> Result<()> {
        for c in self.coeffs.values() {
            let d = c.filtration_degree();
            if d > self.bound {
                return Err(Error::FiltrationBound { degree: d, bound: self.bound });
            }
        }
        Ok(())
    }

    pub fn at_zero(&self) -> Clifford<EndF> {
        self.coeffs.get(&MultiIndex::zero(self.slots())).cloned().unwrap_or_else(|| Clifford::zero(self.n))
    }

    /// Random φ with exact coefficients of filtration degree ≤ `bound` and
    /// Taylor degree ≤ `taylor_degree`.
    pub fn random(rng: &mut DetRng, n: usize, fiber_dim: usize, bound: usize, taylor_degree: usize) -> Self {
        let slots = n * n.saturating_sub(1) / 2;
        let mut coeffs = BTreeMap::new();
        for alpha in MultiIndex::all_up_to(slots, taylor_degree) {
            let mut c = Clifford::<EndF>::zero(n);
            for k in 0..(1u32 << (2 * n)) {
                if k.count_ones() as usize <= bound && rng::uniform(rng, 0.0, 1.0) < 0.4 {
                    let data = (0..fiber_dim * fiber_dim).map(|_| rng::small_rational(rng)).collect();
                    c.add_term(k, EndF { dim: fiber_dim, data });
                }
            }
            coeffs.insert(alpha, c);
        }
        CliffordPolynomialMap { n, fiber_dim, bound, coeffs }
    }
}

/// exp(−½ Σ_{i<j} e_i∧e_j∧ê_i∧ê_j) = exp(−¼ Σ_{i,j} e_i∧e_j∧ê_i∧ê_j), exact.
pub fn gaussian_form(n: usize) -> ExteriorElement {
    let mut x = Exterior::zero(n);
    for (i, j) in pair_slots(n) {
        x.add_term(key(n, (1 << i) | (1 << j), (1 << i) | (1 << j)), Scalar::rational(-1, 2));
    }
    crate::clifford::exterior_exp(&x).expect("nilpotent even exponent")
}

/// The Gaussian form tensored with Id_F, converted to floats when the data
/// it multiplies is float.
fn gaussian_tensor(n: usize, fiber_dim: usize, like: &Exterior<EndF>) -> Exterior<EndF> {
    let float = like.terms().values().flat_map(|c| c.data.iter()).any(|x| !x.is_exact());
    let g = gaussian_form(n);
    if float {
        g.to_float().tensor(&EndF::scalar(fiber_dim, &Scalar::float(1.0)))
    } else {
        g.tensor(&EndF::identity(fiber_dim))
    }
}

/// Product that promotes an exact factor to float when the other is float.
fn mul_promote(a: &Scalar, b: &Scalar) -> Scalar {
    if a.is_exact() == b.is_exact() || a.is_zero() || b.is_zero() {
        a * b
    } else {
        &a.to_float() * &b.to_float()
    }
}

/// T(exp(−½Σ e∧e∧ê∧ê) · σ_{4i}φ(0)), traced over End F.
pub fn asymp4_rhs(phi: &CliffordPolynomialMap, i: usize) -> Result<Scalar> {
    phi.check_bound()?;
    if 4 * i > 2 * phi.n {
        return Ok(Scalar::zero());
    }
    let s = symbol_k(&phi.at_zero(), 4 * i)?;
    let g = gaussian_tensor(phi.n, phi.fiber_dim, &s);
    Ok(berezin_trace(&(&g * &s)))
}

/// The left-hand side evaluated by brute force: Taylor coefficients of
/// A ↦ Str[φ(A) exp(−λA)] from the Q-series, then the Gaussian limit with
/// the factor (4π)^{−n/2} split off.
pub fn asymp4_lhs_oracle(phi: &CliffordPolynomialMap, i: usize) -> Result<Scalar> {
    phi.check_bound()?;
    let n = phi.n;
    if 2 * i > n {
        return Ok(Scalar::zero());
    }
    let deg = n - 2 * i;
    let series = qp_series(n, deg.min(2 * n))?;
    let id = EndF::identity(phi.fiber_dim);
    let qf: BTreeMap<&MultiIndex, Clifford<EndF>> = series.q.iter().map(|(a, q)| (a, q.tensor(&id))).collect();
    let mut psi: BTreeMap<MultiIndex, Scalar> = BTreeMap::new();
    for gamma in MultiIndex::all_up_to(phi.slots(), deg) {
        if !gamma.is_even() {
            continue;
        }
        let mut acc = Scalar::zero();
        for (alpha, pa) in &phi.coeffs {
            if let Some(beta) = gamma.checked_sub(alpha) {
                if let Some(qb) = qf.get(&beta) {
                    acc += &supertrace_coeff(&(pa * qb));
                }
            }
        }
        psi.insert(gamma, acc);
    }
    let lim = gaussian_limit_degree(&psi, deg)?;
    let norm = &Scalar::rational(1, 1 << n) * &Scalar::pi_half_pow(-(n as i32));
    Ok(&lim * &norm)
}

/// Σ_i of the termwise limits: T(exp(−½Σ e∧e∧ê∧ê) · Σ_i σ_{4i}Φ_i(0)).
pub fn power_series_limit(phis: &[CliffordPolynomialMap]) -> Result<Scalar> {
    let Some(first) = phis.first() else {
        return Ok(Scalar::zero());
    };
    let n = first.n;
    let mut sum = Exterior::<EndF>::zero(n);
    for (i, phi) in phis.iter().enumerate() {
        if phi.n != n {
            return Err(Error::DimensionMismatch(phi.n, n));
        }
        phi.check_bound()?;
        if 4 * i <= 2 * n {
            sum = &sum + &symbol_k(&phi.at_zero(), 4 * i)?;
        }
    }
    let g = gaussian_tensor(n, first.fiber_dim, &sum);
    Ok(berezin_trace(&(&g * &sum)))
}

/// Str over ΛV_1 of an element supported on the indices ≥ n0 of an
/// n-dimensional algebra.
pub fn supertrace_normal(a1: &CliffordElement, n0: usize) -> Result<Scalar> {
    let n = a1.n();
    let n1 = n - n0;
    let low = (1u32 << n0) - 1;
    let mut r = Clifford::zero(n1);
    for (k, c) in a1.terms() {
        let (me, mh) = split_key(n, *k);
        if me & low != 0 || mh & low != 0 {
            return Err(Error::SupportViolation(n0));
        }
        r.add_term(key(n1, me >> n0, mh >> n0), c.clone());
    }
    Ok(supertrace(&r))
}

/// Str_1(a_1)·T_0(exp{−¼ Σ_{i,j≤n0} e_i∧e_j∧ê_i∧ê_j} · Σ_i σ⁰_{4i}Φ_i(0)).
pub fn split_limit(a1: &CliffordElement, phis: &[CliffordPolynomialMap], n0: usize) -> Result<Scalar> {
    let n = a1.n();
    if n0 > n {
        return Err(Error::DimensionMismatch(n0, n));
    }
    let str1 = supertrace_normal(a1, n0)?;
    let Some(first) = phis.first() else {
        return Ok(Scalar::zero());
    };
    let mut sum = Exterior::<EndF>::zero(n0);
    for (i, phi) in phis.iter().enumerate() {
        if phi.n != n {
            return Err(Error::DimensionMismatch(phi.n, n));
        }
        phi.check_bound()?;
        if 4 * i <= 2 * n {
            sum = &sum + &sigma0_projection(&phi.at_zero(), 4 * i, n0)?;
        }
    }
    let g = gaussian_tensor(n0, first.fiber_dim, &sum);
    let t0 = berezin_trace(&(&g * &sum));
    Ok(mul_promote(&str1, &t0))
}

/// (4πt)^{−1/2} ∫ exp(−x²/4t) x^a dx by adaptive Simpson quadrature on
/// [−L, L], L = 40√t (the tail beyond is below double precision).
pub fn gaussian_moment_1d_quadrature(a: u32, t: f64, tol: f64) -> f64 {
    let f = |x: f64| (-x * x / (4.0 * t)).exp() * x.powi(a as i32) / (4.0 * std::f64::consts::PI * t).sqrt();
    let l = 40.0 * t.sqrt();
    adaptive_simpson(&f, -l, l, tol, 50)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    // split at fixed interior points so the integrand peak is always resolved
    let pieces = 16;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|p| {
            let lo = a + p as f64 * h;
            let hi = lo + h;
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            rec(f, lo, hi, fa, fm, fb, simpson(fa, fm, fb, lo, hi), tol / pieces as f64, depth)
        })
        .sum()
}

/// Numerical (4πt)^{−N/2} ∫ exp(−|x|²/4t) x^α dx as a product of
/// one-dimensional quadratures.
pub fn gaussian_moment_quadrature(alpha: &MultiIndex, t: f64) -> f64 {
    alpha.0.iter().map(|&a| gaussian_moment_1d_quadrature(a, t, 1e-13)).product()
}

/// Closed-form moment evaluated at t.
pub fn gaussian_moment_value(alpha: &MultiIndex, t: f64) -> f64 {
    let g = gaussian_moment(alpha);
    match g.t_power {
        None => 0.0,
        Some(p) => g.coeff.to_f64() * t.powi(p as i32),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{fock_to_clifford, omega_clifford, top_key, FockOperator};

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    #[test]
    fn moment_examples() {
        assert_eq!(gaussian_moment(&mi(&[2])), GaussMoment { t_power: Some(1), coeff: Scalar::int(2) });
        assert_eq!(gaussian_moment(&mi(&[1])).t_power, None);
        assert!(gaussian_moment(&mi(&[1])).coeff.is_zero());
        assert_eq!(gaussian_moment(&mi(&[4])), GaussMoment { t_power: Some(2), coeff: Scalar::int(12) });
    }

    #[test]
    fn moments_match_quadrature() {
        for alpha in MultiIndex::all_up_to(3, 6) {
            for t in [0.1, 1.0] {
                let exact = gaussian_moment_value(&alpha, t);
                let num = gaussian_moment_quadrature(&alpha, t);
                if alpha.is_even() {
                    assert!(((num - exact) / exact).abs() < 1e-6, "{alpha:?} {t}");
                } else {
                    assert!(num.abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn limit_examples() {
        let mut t = BTreeMap::new();
        t.insert(mi(&[0, 0]), Scalar::int(7));
        assert_eq!(gaussian_limit(&t, 0).unwrap(), Scalar::int(7));
        assert_eq!(gaussian_limit(&t, 1).unwrap_err(), Error::DivergentLimit { degree: 0, bound: 2 });
        let mut t = BTreeMap::new();
        t.insert(mi(&[2, 0]), Scalar::int(3));
        t.insert(mi(&[0, 2]), Scalar::int(5));
        t.insert(mi(&[1, 1]), Scalar::int(100));
        assert_eq!(gaussian_limit(&t, 1).unwrap(), Scalar::int(16));
    }

    #[test]
    fn q_series_low_orders() {
        let s = qp_series(3, 2).unwrap();
        assert_eq!(s.q[&mi(&[0, 0, 0])], Clifford::one(3));
        assert_eq!(s.q[&mi(&[1, 0, 0])], lambda_generator(3, 0, 1));
        assert!(s.symbol_invariant_holds());
    }

    #[test]
    fn moment_identity_small() {
        assert!(moment_identity_check(1, 2).unwrap());
        assert!(moment_identity_check(2, 4).unwrap());
        assert!(moment_identity_check(3, 6).unwrap());
    }

    #[test]
    fn asymp4_examples() {
        let id = EndF::identity(1);
        let one = CliffordPolynomialMap::constant(Clifford::one(2).tensor(&id), 1, 0);
        let expect = &Scalar::rational(1, 2) * &Scalar::pi_half_pow(-2);
        assert_eq!(asymp4_rhs(&one, 0).unwrap(), expect);
        assert_eq!(asymp4_lhs_oracle(&one, 0).unwrap(), expect);
        let zero = CliffordPolynomialMap::constant(Clifford::zero(2), 1, 4);
        assert!(asymp4_rhs(&zero, 1).unwrap().is_zero());
        let w = CliffordPolynomialMap::constant(omega_clifford(2).tensor(&id), 1, 4);
        assert_eq!(asymp4_rhs(&w, 1).unwrap(), Scalar::int(1));
        assert_eq!(asymp4_lhs_oracle(&w, 1).unwrap(), Scalar::int(1));
        let bad = CliffordPolynomialMap::constant(omega_clifford(2).tensor(&id), 1, 0);
        assert!(matches!(asymp4_rhs(&bad, 0), Err(Error::FiltrationBound { .. })));
    }

    #[test]
    fn asymp4_random_two_sides() {
        let mut r = rng::seeded(21);
        for n in [2, 3] {
            for i in 0..=n / 2 {
                for _ in 0..3 {
                    let phi = CliffordPolynomialMap::random(&mut r, n, 2, 4 * i, n - 2 * i);
                    assert_eq!(asymp4_lhs_oracle(&phi, i).unwrap(), asymp4_rhs(&phi, i).unwrap());
                }
            }
        }
    }

    #[test]
    fn power_series_examples() {
        assert!(power_series_limit(&[]).unwrap().is_zero());
        let mut r = rng::seeded(2);
        let phi = CliffordPolynomialMap::random(&mut r, 2, 1, 0, 0);
        assert_eq!(power_series_limit(std::slice::from_ref(&phi)).unwrap(), asymp4_rhs(&phi, 0).unwrap());
    }

    #[test]
    fn split_limit_examples() {
        let mut r = rng::seeded(31);
        let n = 3;
        let phis: Vec<_> = (0..2).map(|i| CliffordPolynomialMap::random(&mut r, n, 1, 4 * i, 0)).collect();
        let full = split_limit(&Clifford::one(n), &phis, n).unwrap();
        assert_eq!(full, power_series_limit(&phis).unwrap());
        // γ̃ = −I on V_1 of dimension 2, embedded at indices 1, 2
        let g = vec![vec![Scalar::int(-1), Scalar::zero()], vec![Scalar::zero(), Scalar::int(-1)]];
        let lam = fock_to_clifford(&FockOperator::exterior_power(&g));
        let embedded = Clifford::from_terms(
            n,
            lam.terms().iter().map(|(k, c)| {
                let (me, mh) = split_key(2, *k);
                (key(n, me << 1, mh << 1), c.clone())
            }),
        );
        assert_eq!(supertrace_normal(&embedded, 1).unwrap(), Scalar::int(4));
        assert!(matches!(split_limit(&Clifford::e(n, 0), &phis, 1), Err(Error::SupportViolation(1))));
        let traceless = Clifford::monomial(n, 0b010, 0, Scalar::int(1));
        assert!(split_limit(&traceless, &phis, 1).unwrap().is_zero());
        let _ = top_key(1);
    }
}
