//! Fixed-point data, the determinant/supertrace cancellation, the integrand
//! limits I(γ,x) and I^σ(γ,x), and quadrature of the variation formulas.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{split_limit, CliffordPolynomialMap};
use crate::chern_weil::{curvature_matrix, one_form_matrix, transgression_form};
use crate::clifford::{
    det_scalar, exterior_exp_nilpotent, fock_to_clifford, key, quantize, split_key, top_key, Clifford, CliffordElement,
    Exterior, ExteriorElement, FockOperator,
};
use crate::endf::EndF;
use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::{self, DetRng};
use crate::scalar::Scalar;
use crate::transport::{transport_closed_form, PointGeometry};

/// Tolerance below which det(1 − γ̃) counts as zero.
const DEGENERACY_TOL: f64 = 1e-12;

/// Data at one point x of the fixed set M^γ, in an orthonormal frame
/// adapted to TM|_{M^γ} = TM^γ ⊕ N. Fields beyond the curvature and the
/// normal action default to zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointData {
    pub n0: usize,
    pub n1: usize,
    pub fiber_dim: usize,
    /// R^{TM^γ}_{ijkl}, n0⁴ entries.
    pub rgamma: Vec<f64>,
    /// γ̃ on the normal space, n1×n1 row-major.
    pub gamma_tilde1: Vec<f64>,
    /// γ^F at x, row-major.
    pub gamma_f: Vec<f64>,
    /// V = h^{-1}ḣ at x, row-major.
    #[serde(default)]
    pub v: Vec<f64>,
    /// g^{-1}ġ restricted to TM^γ, n0×n0.
    #[serde(default)]
    pub gdot: Vec<f64>,
    /// (∇_{e_i}ω)(e_j) at index i·n0 + j.
    #[serde(default)]
    pub domega: Vec<Vec<f64>>,
    /// θ(γ,F,h) components along e_1..e_{n0}.
    #[serde(default)]
    pub theta: Vec<f64>,
    /// Ṡ as 1-forms: coefficient of dx_i in Ṡ_{kl} at (k·n0 + l)·n0 + i.
    #[serde(default)]
    pub sdot: Vec<f64>,
    /// Full curvature of TM at x, n⁴ entries, used by the transport route;
    /// when absent the block extension of `rgamma` by zero is used.
    #[serde(default)]
    pub r_full: Option<Vec<f64>>,
    /// Quadrature weight |dx_0| of this sample.
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

fn float_rows(a: &[f64], n: usize) -> Vec<Vec<Scalar>> {
    (0..n).map(|i| (0..n).map(|j| Scalar::float(a[i * n + j])).collect()).collect()
}

impl FixedPointData {
    pub fn n(&self) -> usize {
        self.n0 + self.n1
    }

    fn r0(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n0;
        self.rgamma[((i * n + j) * n + k) * n + l]
    }

    fn fiber(&self, a: &[f64]) -> Vec<f64> {
        if a.is_empty() {
            vec![0.0; self.fiber_dim * self.fiber_dim]
        } else {
            a.to_vec()
        }
    }

    /// Shapes, curvature symmetries, orthogonality of γ̃ and absence of the
    /// eigenvalue 1.
    pub fn validate(&self) -> Result<()> {
        let (n0, n1, m2) = (self.n0, self.n1, self.fiber_dim * self.fiber_dim);
        let check = |len: usize, want: usize| {
            if len == want {
                Ok(())
            } else {
                Err(Error::DimensionMismatch(len, want))
            }
        };
        check(self.rgamma.len(), n0.pow(4))?;
        check(self.gamma_tilde1.len(), n1 * n1)?;
        check(self.gamma_f.len(), m2)?;
        for (a, want) in [(&self.v, m2), (&self.gdot, n0 * n0), (&self.theta, n0), (&self.sdot, n0.pow(3))] {
            if !a.is_empty() {
                check(a.len(), want)?;
            }
        }
        if !self.domega.is_empty() {
            check(self.domega.len(), n0 * n0)?;
            for w in &self.domega {
                check(w.len(), m2)?;
            }
        }
        if !self.weight.is_finite() {
            return Err(Error::InvalidInput("non-finite quadrature weight".into()));
        }
        let mut g = PointGeometry::zero(n0, 1);
        g.r = self.rgamma.clone();
        g.validate()?;
        if let Some(r) = &self.r_full {
            let n = self.n();
            check(r.len(), n.pow(4))?;
            let mut g = PointGeometry::zero(n, 1);
            g.r = r.clone();
            g.validate()?;
            for i in 0..n0 {
                for j in 0..n0 {
                    for k in 0..n0 {
                        for l in 0..n0 {
                            if (r[((i * n + j) * n + k) * n + l] - self.r0(i, j, k, l)).abs() > 1e-12 {
                                return Err(Error::InvalidInput("full curvature does not restrict to R^γ".into()));
                            }
                        }
                    }
                }
            }
        }
        let gt = &self.gamma_tilde1;
        for i in 0..n1 {
            for j in 0..n1 {
                let dot: f64 = (0..n1).map(|k| gt[k * n1 + i] * gt[k * n1 + j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot - want).abs() > 1e-10 {
                    return Err(Error::InvalidInput("γ̃ is not orthogonal".into()));
                }
            }
        }
        det_cancellation(&float_rows(gt, n1)).map(|_| ())
    }

    /// Tr[γ^F V].
    pub fn trace_gamma_v(&self) -> f64 {
        let m = self.fiber_dim;
        linalg::trace(&linalg::matmul(&self.gamma_f, &self.fiber(&self.v), m), m)
    }

    /// Full curvature of TM at x.
    pub fn full_curvature(&self) -> Vec<f64> {
        if let Some(r) = &self.r_full {
            return r.clone();
        }
        let (n, n0) = (self.n(), self.n0);
        let mut r = vec![0.0; n.pow(4)];
        for i in 0..n0 {
            for j in 0..n0 {
                for k in 0..n0 {
                    for l in 0..n0 {
                        r[((i * n + j) * n + k) * n + l] = self.r0(i, j, k, l);
                    }
                }
            }
        }
        r
    }

    /// Random valid data: Gauss-type curvature on TM restricted to TM^γ, γ̃ a
    /// conjugated product of plane rotations with angles in [0.3, π], random
    /// γ^F, V and the remaining tensors.
    pub fn random(rng: &mut DetRng, n0: usize, n1: usize, fiber_dim: usize) -> Self {
        let n = n0 + n1;
        let full = PointGeometry::random(rng, n, fiber_dim);
        let mut rgamma = vec![0.0; n0.pow(4)];
        for i in 0..n0 {
            for j in 0..n0 {
                for k in 0..n0 {
                    for l in 0..n0 {
                        rgamma[((i * n0 + j) * n0 + k) * n0 + l] = full.r_at(i, j, k, l);
                    }
                }
            }
        }
        let m2 = fiber_dim * fiber_dim;
        let mat = |rng: &mut DetRng| (0..m2).map(|_| rng::uniform(rng, -1.0, 1.0)).collect::<Vec<f64>>();
        let gamma_f = mat(rng);
        let v = mat(rng);
        let domega = (0..n0 * n0).map(|_| mat(rng)).collect();
        let gdot = rng::symmetric(rng, n0, 1.0).into_iter().flatten().collect();
        let theta = (0..n0).map(|_| rng::uniform(rng, -1.0, 1.0)).collect();
        let mut sdot = vec![0.0; n0.pow(3)];
        for k in 0..n0 {
            for l in (k + 1)..n0 {
                for i in 0..n0 {
                    let c = rng::uniform(rng, -1.0, 1.0);
                    sdot[(k * n0 + l) * n0 + i] = c;
                    sdot[(l * n0 + k) * n0 + i] = -c;
                }
            }
        }
        FixedPointData {
            n0,
            n1,
            fiber_dim,
            rgamma,
            gamma_tilde1: random_normal_isometry(rng, n1),
            gamma_f,
            v,
            gdot,
            domega,
            theta,
            sdot,
            r_full: Some(full.r),
            weight: 1.0,
        }
    }
}

/// Orthogonal n1×n1 matrix without eigenvalue 1: plane rotations by angles
/// in [0.3, π] (a trailing −1 for odd n1), conjugated by a random rotation.
pub fn random_normal_isometry(rng: &mut DetRng, n1: usize) -> Vec<f64> {
    let mut d = vec![0.0; n1 * n1];
    let mut i = 0;
    while i + 1 < n1 {
        let a = rng::uniform(rng, 0.3, std::f64::consts::PI);
        d[i * n1 + i] = a.cos();
        d[i * n1 + i + 1] = -a.sin();
        d[(i + 1) * n1 + i] = a.sin();
        d[(i + 1) * n1 + i + 1] = a.cos();
        i += 2;
    }
    if i < n1 {
        d[i * n1 + i] = -1.0;
    }
    let gen: Vec<f64> = rng::antisymmetric(rng, n1, 1.0).into_iter().flatten().collect();
    let q = linalg::expm(&gen, n1);
    let qt: Vec<f64> = (0..n1 * n1).map(|k| q[(k % n1) * n1 + k / n1]).collect();
    linalg::matmul(&linalg::matmul(&q, &d, n1), &qt, n1)
}

/// (Str_{ΛV_1}[Λγ̃], det(1 − γ̃)).
pub fn det_cancellation(gamma_tilde1: &[Vec<Scalar>]) -> Result<(Scalar, Scalar)> {
    let n1 = gamma_tilde1.len();
    let one_minus: Vec<Vec<Scalar>> = (0..n1)
        .map(|i| {
            (0..n1)
                .map(|j| {
                    let g = &gamma_tilde1[i][j];
                    if i == j {
                        &Scalar::int_like(1, g) - g
                    } else {
                        -g
                    }
                })
                .collect()
        })
        .collect();
    let det = det_scalar(&one_minus);
    let degenerate = match &det {
        Scalar::Float(x) => x.abs() < DEGENERACY_TOL,
        d => d.is_zero(),
    };
    if degenerate {
        return Err(Error::FixedPointDegeneracy);
    }
    Ok((FockOperator::exterior_power(gamma_tilde1).supertrace(), det))
}

/// det Q_1(0,γ) for the quadratic form v ↦ ‖(1 − γ̃)v‖² on V_1, from its
/// Gram matrix.
pub fn q1_det(gamma_tilde1: &[f64], n1: usize) -> f64 {
    let mut a = vec![0.0; n1 * n1];
    for i in 0..n1 {
        a[i * n1 + i] = 1.0;
    }
    let b: Vec<f64> = a.iter().zip(gamma_tilde1).map(|(x, g)| x - g).collect();
    let mut gram = vec![0.0; n1 * n1];
    for i in 0..n1 {
        for j in 0..n1 {
            gram[i * n1 + j] = (0..n1).map(|k| b[k * n1 + i] * b[k * n1 + j]).sum();
        }
    }
    linalg::logabsdet(&gram, n1).exp()
}

fn ext_word(n: usize, gens: &[(usize, bool)], c: f64) -> ExteriorElement {
    let mut x = Exterior::scalar(n, Scalar::float(c));
    for &(i, hat) in gens {
        let g = if hat {
            Exterior::monomial(n, 0, 1 << i, Scalar::float(1.0))
        } else {
            Exterior::monomial(n, 1 << i, 0, Scalar::float(1.0))
        };
        x = &x * &g;
    }
    x
}

/// ⅛ Σ_{ijkl} R_{ijkl} e_i∧e_j∧ê_k∧ê_l over TM^γ.
pub fn curvature_exponent(d: &FixedPointData) -> ExteriorElement {
    let n = d.n0;
    let mut x = Exterior::zero(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let r = d.r0(i, j, k, l);
                    if r != 0.0 {
                        x = &x + &ext_word(n, &[(i, false), (j, false), (k, true), (l, true)], 0.125 * r);
                    }
                }
            }
        }
    }
    x
}

fn curvature_exp(d: &FixedPointData) -> Result<ExteriorElement> {
    exterior_exp_nilpotent(&curvature_exponent(d), &Scalar::float(1.0))
}

/// I(γ,x) = Tr[γ^F V]·T_0(exp{⅛ΣR e∧e∧ê∧ê}).
pub fn integrand_i(d: &FixedPointData) -> Result<f64> {
    d.validate()?;
    let t0 = crate::clifford::berezin_trace(&curvature_exp(d)?);
    Ok(d.trace_gamma_v() * t0.to_f64())
}

/// I^σ(γ,x) = −T_0(½Σġ_{ij}e_i∧ê_j ∧ exp{⅛ΣR} ∧ ½Σ e_i∧ê_j Tr[γ^F(∇_{e_i}ω)(e_j)]).
/// The ω² part of the trace is dropped; it is −dθ, which vanishes.
pub fn integrand_i_sigma(d: &FixedPointData) -> Result<f64> {
    d.validate()?;
    let n = d.n0;
    let m = d.fiber_dim;
    let mut s = Exterior::zero(n);
    let mut w = Exterior::zero(n);
    for i in 0..n {
        for j in 0..n {
            if !d.gdot.is_empty() && d.gdot[i * n + j] != 0.0 {
                s = &s + &ext_word(n, &[(i, false), (j, true)], 0.5 * d.gdot[i * n + j]);
            }
            if !d.domega.is_empty() {
                let tr = linalg::trace(&linalg::matmul(&d.gamma_f, &d.domega[i * n + j], m), m);
                if tr != 0.0 {
                    w = &w + &ext_word(n, &[(i, false), (j, true)], 0.5 * tr);
                }
            }
        }
    }
    let prod = &(&s * &curvature_exp(d)?) * &w;
    Ok(-crate::clifford::berezin_trace(&prod).to_f64())
}

/// Density of θ(γ,F,h)∧ẽ′(TM^γ) with respect to |dx_0|.
pub fn theta_transgression_density(d: &FixedPointData) -> Result<f64> {
    d.validate()?;
    let n = d.n0;
    if n == 0 || d.theta.is_empty() || d.sdot.is_empty() {
        return Ok(0.0);
    }
    let r = curvature_matrix(&d.rgamma, n);
    let sdot = one_form_matrix(&d.sdot, n)?;
    let e_prime = transgression_form(&r, &sdot)?;
    let mut theta = Exterior::zero(n);
    for i in 0..n {
        theta.add_term(key(n, 1 << i, 0), Scalar::float(d.theta[i]));
    }
    let top = &theta * &e_prime;
    Ok(top.coeff(key(n, (1u32 << n) - 1, 0)).map(|c| c.to_f64()).unwrap_or(0.0))
}

/// ∫_{M^γ} Tr[γ^F V] e(TM^γ) by weighted summation over the samples.
pub fn rhs_variation_hf(samples: &[FixedPointData]) -> Result<f64> {
    samples.iter().map(|d| Ok(d.weight * integrand_i(d)?)).sum()
}

/// −∫_{M^γ} θ(γ,F,h)∧ẽ′(TM^γ) by weighted summation over the samples.
pub fn rhs_variation_gtm(samples: &[FixedPointData]) -> Result<f64> {
    samples.iter().map(|d| Ok(-d.weight * theta_transgression_density(d)?)).sum()
}

/// Λγ̃ as an element of the Clifford algebra of V = V_0 ⊕ V_1, supported
/// on the normal indices.
pub fn normal_exterior_power(d: &FixedPointData) -> CliffordElement {
    let (n, n0, n1) = (d.n(), d.n0, d.n1);
    let lam = fock_to_clifford(&FockOperator::exterior_power(&float_rows(&d.gamma_tilde1, n1)));
    Clifford::from_terms(
        n,
        lam.terms().iter().map(|(k, c)| {
            let (me, mh) = split_key(n1, *k);
            (key(n, me << n0, mh << n0), c.clone())
        }),
    )
}

/// The two evaluations of the fixed-point contribution.
///
/// `via_hallo`: highest symbols from the transport closed form on all of V,
/// tensored with γ^F V, fed with Λγ̃ through `split_limit`, times
/// det Q_1(0,γ)^{−1/2}. `via_prop_i`: `integrand_i` times the ratio of the
/// two sides of `det_cancellation`.
pub fn pipeline_consistency(d: &FixedPointData) -> Result<(f64, f64)> {
    d.validate()?;
    let n = d.n();
    let mut g = PointGeometry::zero(n, d.fiber_dim);
    g.r = d.full_curvature();
    let highest = transport_closed_form(&g)?;
    let gv = EndF::from_f64(d.fiber_dim, &linalg::matmul(&d.gamma_f, &d.fiber(&d.v), d.fiber_dim));
    let phis: Vec<CliffordPolynomialMap> = (0..=n / 2)
        .map(|l| {
            let part = quantize(&highest.part(4 * l)).right_coeff(&gv);
            CliffordPolynomialMap::constant(part, d.fiber_dim, 4 * l)
        })
        .collect();
    let lam = normal_exterior_power(d);
    let via_hallo = split_limit(&lam, &phis, d.n0)?.to_f64() / q1_det(&d.gamma_tilde1, d.n1).sqrt();
    let (str_side, det_side) = det_cancellation(&float_rows(&d.gamma_tilde1, d.n1))?;
    let via_prop_i = integrand_i(d)? * str_side.to_f64() / det_side.to_f64();
    Ok((via_hallo, via_prop_i))
}

/// Sample at a point of a surface with Gauss curvature density `k_da`
/// (curvature times area element), trivial line bundle, V = 1.
pub fn surface_sample(k_da: f64) -> FixedPointData {
    let mut r = vec![0.0; 16];
    let idx = |i: usize, j: usize, k: usize, l: usize| ((i * 2 + j) * 2 + k) * 2 + l;
    r[idx(0, 1, 0, 1)] = -k_da;
    r[idx(1, 0, 1, 0)] = -k_da;
    r[idx(0, 1, 1, 0)] = k_da;
    r[idx(1, 0, 0, 1)] = k_da;
    FixedPointData {
        n0: 2,
        n1: 0,
        fiber_dim: 1,
        rgamma: r,
        gamma_tilde1: vec![],
        gamma_f: vec![1.0],
        v: vec![1.0],
        gdot: vec![],
        domega: vec![],
        theta: vec![],
        sdot: vec![],
        r_full: None,
        weight: 1.0,
    }
}

/// Isolated fixed point with a given Tr[γ^F V] on a rank-1 bundle, normal
/// action −Id on an n1-dimensional normal space.
pub fn isolated_point(n1: usize, trace: f64) -> FixedPointData {
    let mut gt = vec![0.0; n1 * n1];
    for i in 0..n1 {
        gt[i * n1 + i] = -1.0;
    }
    FixedPointData {
        n0: 0,
        n1,
        fiber_dim: 1,
        rgamma: vec![],
        gamma_tilde1: gt,
        gamma_f: vec![1.0],
        v: vec![trace],
        gdot: vec![],
        domega: vec![],
        theta: vec![],
        sdot: vec![],
        r_full: None,
        weight: 1.0,
    }
}

/// ∫ I(γ,x) over the round sphere of radius `r` with Tr[γ^F V] = 1: Gauss
/// curvature from the metric by differences, midpoint rule in (θ, φ).
pub fn gauss_bonnet_via_integrand(r: f64, nth: usize) -> Result<f64> {
    let e = move |_t: f64, _p: f64| r * r;
    let g = move |t: f64, _p: f64| r * r * t.sin() * t.sin();
    let dth = std::f64::consts::PI / nth as f64;
    let mut total = 0.0;
    for a in 0..nth {
        let th = (a as f64 + 0.5) * dth;
        let k = crate::chern_weil::gauss_curvature_orthogonal(&e, &g, th, 0.0, 1e-4);
        let area = (e(th, 0.0) * g(th, 0.0)).sqrt();
        total += integrand_i(&surface_sample(k * area))? * dth * 2.0 * std::f64::consts::PI;
    }
    Ok(total)
}

/// Top Berezin key over TM^γ, re-exported for callers assembling forms.
pub fn fixed_top_key(n0: usize) -> u32 {
    top_key(n0)
}
