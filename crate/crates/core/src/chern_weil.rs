//! Pfaffians over commutative even rings, Euler and transgression forms, and
//! the flat-bundle 1-forms ω(F,h) and θ(γ,F,h).
//!
//! Differential forms on the tangent model ℝ^{n0} are `Exterior` elements
//! that use only the unhatted generators (dx_i ↔ e_{i}).

use serde::{Deserialize, Serialize};

use crate::clifford::{key, Exterior, ExteriorElement};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// Even form `a + b·ḃ` with a dual parameter b, b² = 0.
#[derive(Clone, PartialEq, Debug)]
pub struct EvenForm {
    pub value: ExteriorElement,
    pub dual: ExteriorElement,
}

impl EvenForm {
    pub fn new(value: ExteriorElement) -> Self {
        let n = value.n();
        EvenForm { value, dual: Exterior::zero(n) }
    }

    pub fn with_dual(value: ExteriorElement, dual: ExteriorElement) -> Self {
        EvenForm { value, dual }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(Exterior::zero(dim))
    }

    pub fn constant(dim: usize, s: Scalar) -> Self {
        Self::new(Exterior::scalar(dim, s))
    }

    /// `c · dx_i ∧ dx_j` (0-based indices).
    pub fn two_form(dim: usize, i: usize, j: usize, c: Scalar) -> Self {
        let one = Scalar::int_like(1, &c);
        let f = &Exterior::monomial(dim, 1 << i, 0, one) * &Exterior::monomial(dim, 1 << j, 0, c);
        Self::new(f)
    }

    pub fn dim(&self) -> usize {
        self.value.n()
    }

    pub fn add(&self, o: &Self) -> Self {
        EvenForm { value: &self.value + &o.value, dual: &self.dual + &o.dual }
    }

    pub fn neg(&self) -> Self {
        EvenForm { value: self.value.neg(), dual: self.dual.neg() }
    }

    /// (a + b a′)(c + b c′) = ac + b(a′c + a c′). Valid when the non-dual
    /// parts are even, which holds for every Pfaffian argument used here.
    pub fn mul(&self, o: &Self) -> Self {
        EvenForm { value: &self.value * &o.value, dual: &(&self.dual * &o.value) + &(&self.value * &o.dual) }
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        EvenForm { value: self.value.scale(s), dual: self.dual.scale(s) }
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero() && self.dual.is_zero()
    }

    /// Coefficient of dx_1 ∧ … ∧ dx_dim in the value part.
    pub fn top_coefficient(&self) -> Scalar {
        let n = self.dim();
        self.value.coeff(key(n, (1 << n) - 1, 0)).cloned().unwrap_or_else(Scalar::zero)
    }
}

/// Antisymmetric matrix with `EvenForm` entries.
#[derive(Clone, PartialEq, Debug)]
pub struct SkewFormMatrix {
    pub entries: Vec<Vec<EvenForm>>,
    /// Dimension of the underlying form algebra.
    pub form_dim: usize,
}

impl SkewFormMatrix {
    pub fn new(entries: Vec<Vec<EvenForm>>, form_dim: usize) -> Result<Self> {
        let m = SkewFormMatrix { entries, form_dim };
        m.validate()?;
        Ok(m)
    }

    /// Scalar-entry matrix over a 0-dimensional form algebra.
    pub fn from_scalars(a: &[Vec<Scalar>]) -> Result<Self> {
        let entries = a.iter().map(|r| r.iter().map(|s| EvenForm::constant(0, s.clone())).collect()).collect();
        Self::new(entries, 0)
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    fn has_float(&self) -> bool {
        self.entries
            .iter()
            .flatten()
            .flat_map(|e| e.value.terms().values().chain(e.dual.terms().values()))
            .any(|c| !c.is_exact())
    }

    fn validate(&self) -> Result<()> {
        let k = self.size();
        for (i, row) in self.entries.iter().enumerate() {
            if row.len() != k {
                return Err(Error::DimensionMismatch(row.len(), k));
            }
            for j in 0..k {
                if row[j].dim() != self.form_dim {
                    return Err(Error::DimensionMismatch(row[j].dim(), self.form_dim));
                }
                if !self.entries[i][j].add(&self.entries[j][i]).is_zero() {
                    return Err(Error::NotAntisymmetric);
                }
            }
        }
        Ok(())
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        SkewFormMatrix {
            entries: self.entries.iter().map(|r| r.iter().map(|e| e.scale(s)).collect()).collect(),
            form_dim: self.form_dim,
        }
    }

    /// `self + b·o` with `o` stored in the dual slot.
    pub fn plus_dual(&self, o: &SkewFormMatrix) -> Result<Self> {
        if o.size() != self.size() {
            return Err(Error::DimensionMismatch(o.size(), self.size()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&o.entries)
            .map(|(r, s)| {
                r.iter().zip(s).map(|(a, b)| EvenForm::with_dual(a.value.clone(), &a.dual + &b.value)).collect()
            })
            .collect();
        Ok(SkewFormMatrix { entries, form_dim: self.form_dim })
    }
}

fn pf_rec(m: &[Vec<EvenForm>], idx: &[usize], dim: usize, one: &Scalar) -> EvenForm {
    if idx.is_empty() {
        return EvenForm::constant(dim, one.clone());
    }
    let first = idx[0];
    let mut total = EvenForm::zero(dim);
    for (pos, &j) in idx.iter().enumerate().skip(1) {
        let entry = &m[first][j];
        if entry.is_zero() {
            continue;
        }
        let rest: Vec<usize> = idx.iter().copied().filter(|&x| x != first && x != j).collect();
        let term = entry.mul(&pf_rec(m, &rest, dim, one));
        total = if pos % 2 == 1 { total.add(&term) } else { total.add(&term.neg()) };
    }
    total
}

/// Pfaffian as a signed sum over perfect matchings; 1 for 0×0, 0 for odd size.
pub fn pfaffian(m: &SkewFormMatrix) -> Result<EvenForm> {
    m.validate()?;
    let k = m.size();
    if k % 2 == 1 {
        return Ok(EvenForm::zero(m.form_dim));
    }
    if k > 8 {
        return Err(Error::InvalidInput(format!("pfaffian size {k} exceeds 8")));
    }
    let idx: Vec<usize> = (0..k).collect();
    let one = if m.has_float() { Scalar::float(1.0) } else { Scalar::one() };
    Ok(pf_rec(&m.entries, &idx, m.form_dim, &one))
}

/// (2π)^{-1}, exact.
pub fn inv_two_pi() -> Scalar {
    &Scalar::rational(1, 2) * &Scalar::pi_half_pow(-2)
}

/// (2π)^{-1} in the arithmetic of the matrix entries.
fn inv_two_pi_for(m: &SkewFormMatrix) -> Scalar {
    if m.has_float() {
        Scalar::float(0.5 / std::f64::consts::PI)
    } else {
        inv_two_pi()
    }
}

/// e = Pf(R/2π).
pub fn euler_form(r: &SkewFormMatrix) -> Result<EvenForm> {
    pfaffian(&r.scale(&inv_two_pi_for(r)))
}

/// ẽ′ = ∂_b|_{b=0} Pf((R + bṠ)/2π).
pub fn transgression_form(r: &SkewFormMatrix, sdot: &SkewFormMatrix) -> Result<ExteriorElement> {
    let m = r.plus_dual(sdot)?;
    Ok(pfaffian(&m.scale(&inv_two_pi_for(&m)))?.dual)
}

/// Curvature matrix of 2-forms Ω_{kl} = Σ_{i<j} R_{ijlk} dx_i∧dx_j from the
/// tensor R_{ijkl} = (R(e_i,e_j)e_k, e_l).
pub fn curvature_matrix(r: &[f64], n0: usize) -> SkewFormMatrix {
    let at = |i: usize, j: usize, k: usize, l: usize| r[((i * n0 + j) * n0 + k) * n0 + l];
    let mut entries = vec![vec![EvenForm::zero(n0); n0]; n0];
    for k in 0..n0 {
        for l in 0..n0 {
            let mut f = Exterior::zero(n0);
            for i in 0..n0 {
                for j in (i + 1)..n0 {
                    let c = at(i, j, l, k);
                    if c != 0.0 {
                        f = &f + &EvenForm::two_form(n0, i, j, Scalar::float(c)).value;
                    }
                }
            }
            entries[k][l] = EvenForm::new(f);
        }
    }
    SkewFormMatrix { entries, form_dim: n0 }
}

/// Antisymmetric matrix of 1-forms Ṡ_{kl} = Σ_i c_{kli} dx_i, with c_{kli}
/// stored at (k·n + l)·n + i.
pub fn one_form_matrix(c: &[f64], n: usize) -> Result<SkewFormMatrix> {
    if c.len() != n * n * n {
        return Err(Error::DimensionMismatch(c.len(), n * n * n));
    }
    let mut entries = vec![vec![EvenForm::zero(n); n]; n];
    for k in 0..n {
        for l in 0..n {
            let mut f = Exterior::zero(n);
            for i in 0..n {
                let v = c[(k * n + l) * n + i];
                if v != 0.0 {
                    f.add_term(key(n, 1 << i, 0), Scalar::float(v));
                }
            }
            entries[k][l] = EvenForm::new(f);
        }
    }
    SkewFormMatrix::new(entries, n)
}

/// Samples of a bundle metric over a chart with its first derivatives.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BundleMetricPath {
    pub fiber_dim: usize,
    /// Metric matrices, row-major, one per sample.
    pub h: Vec<Vec<f64>>,
    /// `dh[dir][sample]`: derivative of h along coordinate `dir`.
    pub dh: Vec<Vec<Vec<f64>>>,
}

/// ω(F,h)(∂_dir) = h^{-1}∂_dir h in a flat frame, per sample.
pub fn omega_flat_frame(path: &BundleMetricPath, dir: usize) -> Result<Vec<Vec<f64>>> {
    let m = path.fiber_dim;
    let d = path.dh.get(dir).ok_or_else(|| Error::InvalidInput(format!("no derivative for direction {dir}")))?;
    path.h
        .iter()
        .zip(d)
        .map(|(h, dh)| {
            let inv = linalg::inverse(h, m).ok_or(Error::Singular)?;
            Ok(linalg::matmul(&inv, dh, m))
        })
        .collect()
}

/// θ(γ,F,h) = Tr[γ^F ω] per sample.
pub fn theta_one_form(gamma_f: &[f64], omega: &[Vec<f64>], fiber_dim: usize) -> Result<Vec<f64>> {
    if gamma_f.len() != fiber_dim * fiber_dim {
        return Err(Error::DimensionMismatch(gamma_f.len(), fiber_dim * fiber_dim));
    }
    omega
        .iter()
        .map(|w| {
            if w.len() != fiber_dim * fiber_dim {
                return Err(Error::DimensionMismatch(w.len(), fiber_dim * fiber_dim));
            }
            Ok(linalg::trace(&linalg::matmul(gamma_f, w, fiber_dim), fiber_dim))
        })
        .collect()
}

/// Gauss curvature of an orthogonal surface metric E dθ² + G dφ² at (θ, φ),
/// by central differences of the supplied coefficient functions.
pub fn gauss_curvature_orthogonal(
    e: &dyn Fn(f64, f64) -> f64,
    g: &dyn Fn(f64, f64) -> f64,
    th: f64,
    ph: f64,
    step: f64,
) -> f64 {
    let root = |a: f64, b: f64| (e(a, b) * g(a, b)).sqrt();
    let g_th = |a: f64, b: f64| (g(a + step, b) - g(a - step, b)) / (2.0 * step);
    let e_ph = |a: f64, b: f64| (e(a, b + step) - e(a, b - step)) / (2.0 * step);
    let p = |a: f64, b: f64| g_th(a, b) / root(a, b);
    let q = |a: f64, b: f64| e_ph(a, b) / root(a, b);
    let dp = (p(th + step, ph) - p(th - step, ph)) / (2.0 * step);
    let dq = (q(th, ph + step) - q(th, ph - step)) / (2.0 * step);
    -(dp + dq) / (2.0 * root(th, ph))
}

/// ∫ e over the round sphere of radius `r`: curvature from the metric by
/// differences, Euler density from `euler_form`, midpoint quadrature on an
/// `nth × nph` grid in (θ, φ).
pub fn gauss_bonnet_sphere(r: f64, nth: usize, nph: usize) -> Result<f64> {
    let e = move |_t: f64, _p: f64| r * r;
    let g = move |t: f64, _p: f64| r * r * t.sin() * t.sin();
    let dth = std::f64::consts::PI / nth as f64;
    let dph = 2.0 * std::f64::consts::PI / nph as f64;
    let mut total = 0.0;
    for a in 0..nth {
        let th = (a as f64 + 0.5) * dth;
        // the metric is φ-independent, so one column suffices per θ
        let k = gauss_curvature_orthogonal(&e, &g, th, 0.0, 1e-4);
        let area = (e(th, 0.0) * g(th, 0.0)).sqrt();
        let density = euler_density_surface(k * area)?;
        total += density * dth * dph * nph as f64;
    }
    Ok(total)
}

/// Euler density coefficient for a surface with Gauss curvature `k`,
/// weighted by the area element: the curvature tensor is R_{1212} = −k·dA.
pub fn euler_density_surface(k_da: f64) -> Result<f64> {
    let mut r = vec![0.0; 16];
    let idx = |i: usize, j: usize, k: usize, l: usize| ((i * 2 + j) * 2 + k) * 2 + l;
    r[idx(0, 1, 0, 1)] = -k_da;
    r[idx(1, 0, 1, 0)] = -k_da;
    r[idx(0, 1, 1, 0)] = k_da;
    r[idx(1, 0, 0, 1)] = k_da;
    Ok(euler_form(&curvature_matrix(&r, 2))?.top_coefficient().to_f64())
}

impl SkewFormMatrix {
    /// Converts exact coefficients to floats so they combine with float data.
    pub fn scale_float(&self) -> Self {
        SkewFormMatrix {
            entries: self
                .entries
                .iter()
                .map(|r| r.iter().map(|e| EvenForm { value: e.value.to_float(), dual: e.dual.to_float() }).collect())
                .collect(),
            form_dim: self.form_dim,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: i64) -> Scalar {
        Scalar::int(v)
    }

    fn skew(vals: &[(usize, usize, i64)], k: usize) -> Vec<Vec<Scalar>> {
        let mut a = vec![vec![Scalar::zero(); k]; k];
        for &(i, j, v) in vals {
            a[i][j] = s(v);
            a[j][i] = s(-v);
        }
        a
    }

    #[test]
    fn pfaffian_two_by_two() {
        let m = SkewFormMatrix::from_scalars(&skew(&[(0, 1, 7)], 2)).unwrap();
        assert_eq!(pfaffian(&m).unwrap().top_coefficient(), s(7));
    }

    #[test]
    fn pfaffian_four_by_four_formula() {
        let a = skew(&[(0, 1, 2), (0, 2, 3), (0, 3, 5), (1, 2, 7), (1, 3, 11), (2, 3, 13)], 4);
        let m = SkewFormMatrix::from_scalars(&a).unwrap();
        // a12 a34 − a13 a24 + a14 a23
        let expect = 2 * 13 - 3 * 11 + 5 * 7;
        assert_eq!(pfaffian(&m).unwrap().top_coefficient(), s(expect));
    }

    #[test]
    fn pfaffian_empty_and_odd() {
        let m0 = SkewFormMatrix::from_scalars(&[]).unwrap();
        assert_eq!(pfaffian(&m0).unwrap().top_coefficient(), s(1));
        let m3 = SkewFormMatrix::from_scalars(&skew(&[(0, 1, 1), (1, 2, 4)], 3)).unwrap();
        assert!(pfaffian(&m3).unwrap().is_zero());
    }

    #[test]
    fn asymmetric_input_rejected() {
        let mut a = skew(&[(0, 1, 1)], 2);
        a[1][0] = s(3);
        assert_eq!(SkewFormMatrix::from_scalars(&a).unwrap_err(), Error::NotAntisymmetric);
    }

    #[test]
    fn euler_form_vanishes_for_zero_and_odd() {
        let z = SkewFormMatrix::from_scalars(&skew(&[], 2)).unwrap();
        assert!(euler_form(&z).unwrap().is_zero());
        let odd = SkewFormMatrix::from_scalars(&skew(&[(0, 2, 3)], 3)).unwrap();
        assert!(euler_form(&odd).unwrap().is_zero());
    }

    #[test]
    fn transgression_two_by_two() {
        // R = 0, Ṡ_12 = dx_1: ẽ′ = Ṡ_12 / 2π
        let zero = SkewFormMatrix::new(vec![vec![EvenForm::zero(1); 2]; 2], 1).unwrap();
        let dx = Exterior::monomial(1, 1, 0, Scalar::one());
        let sd = SkewFormMatrix::new(
            vec![vec![EvenForm::zero(1), EvenForm::new(dx.clone())], vec![EvenForm::new(dx.neg()), EvenForm::zero(1)]],
            1,
        )
        .unwrap();
        let t = transgression_form(&zero, &sd).unwrap();
        assert_eq!(t, dx.scale(&inv_two_pi()));
        let none = transgression_form(&zero, &zero).unwrap();
        assert!(none.is_zero());
    }

    #[test]
    fn gauss_bonnet_unit_sphere() {
        let v = gauss_bonnet_sphere(1.0, 2000, 1).unwrap();
        assert!((v - 2.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn omega_of_exponential_metric_is_df() {
        // rank 1, h = e^{f}, f = sin x: ω = cos x
        let xs: Vec<f64> = (0..16).map(|i| i as f64 * 0.4).collect();
        let path = BundleMetricPath {
            fiber_dim: 1,
            h: xs.iter().map(|x| vec![x.sin().exp()]).collect(),
            dh: vec![xs.iter().map(|x| vec![x.cos() * x.sin().exp()]).collect()],
        };
        let w = omega_flat_frame(&path, 0).unwrap();
        let th = theta_one_form(&[1.0], &w, 1).unwrap();
        for (x, t) in xs.iter().zip(th) {
            assert!((t - x.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_metric_has_zero_omega() {
        let path =
            BundleMetricPath { fiber_dim: 2, h: vec![vec![2.0, 0.5, 0.5, 1.0]; 3], dh: vec![vec![vec![0.0; 4]; 3]] };
        let w = omega_flat_frame(&path, 0).unwrap();
        assert!(w.iter().flatten().all(|v| *v == 0.0));
    }
}
