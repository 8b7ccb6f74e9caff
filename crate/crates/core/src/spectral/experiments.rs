//! Anomaly experiments: finite-difference variation of log‖·‖²(γ) against
//! the fixed-point densities, plus the finite-dimensional identities they
//! rest on.

use std::f64::consts::PI;

use faer::Mat;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::complex::{
    equivariant_log_metric, harmonic_insertion_trace, heat_data, insertion_supertrace, laplacian_variation_residual,
    lim_window, log_torsion, DiscreteComplex, LogDetMethod,
};
use super::models::{Case, CircleIsometry, CircleModel, TorusIsometry, TorusModel};
use crate::error::{Error, Result};
use crate::linalg;
use crate::local_index::{isolated_point, rhs_variation_gtm, rhs_variation_hf, FixedPointData};
use crate::rng::DetRng;

/// One row of a convergence table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub value: f64,
    /// (4·value − previous value)/3, when a coarser row exists.
    pub extrapolation: Option<f64>,
}

/// Both sides of a variation formula for one model and one γ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorsionReport {
    pub model: String,
    pub gamma: String,
    pub case: String,
    pub n: usize,
    pub log_tau: f64,
    pub log_metric: f64,
    pub log_ray_singer: f64,
    /// Central difference of log‖·‖²(γ) in ε.
    pub lhs_fd: f64,
    /// Added to `lhs_fd` to pass from the lattice to the continuum variation.
    pub counterterm: f64,
    pub lim: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub kernel_dims: Vec<usize>,
    pub step: f64,
    #[serde(default)]
    pub convergence: Vec<ConvergenceRow>,
}

/// log τ(γ), log|·|²(γ) and log‖·‖²(γ) = log|·|² + 2 log τ.
pub fn ray_singer(dc: &DiscreteComplex, method: LogDetMethod) -> Result<(f64, f64, f64)> {
    let tau = log_torsion(dc, method)?;
    let metric = equivariant_log_metric(dc, false)?;
    Ok((tau, metric, metric + 2.0 * tau))
}

/// Central difference, optionally refined as (4D(h/2) − D(h))/3.
pub fn central_difference(f: &dyn Fn(f64) -> Result<f64>, step: f64, richardson: bool) -> Result<f64> {
    let d = |h: f64| -> Result<f64> { Ok((f(h)? - f(-h)?) / (2.0 * h)) };
    let d1 = d(step)?;
    if richardson {
        Ok((4.0 * d(0.5 * step)? - d1) / 3.0)
    } else {
        Ok(d1)
    }
}

fn rel(abs: f64, rhs: f64) -> f64 {
    if rhs != 0.0 {
        abs / rhs.abs()
    } else {
        abs
    }
}

fn circle_samples(model: &CircleModel) -> Vec<FixedPointData> {
    let cfg = &model.config;
    let f = cfg.family.as_ref().expect("family checked by caller");
    let dt = model.dtheta();
    let gsum: f64 = model.gamma_f.iter().sum();
    (0..model.n())
        .map(|k| {
            let t = k as f64 * dt;
            let g = cfg.log_g.eval(t).exp();
            let (v, theta) = match f.case {
                Case::HF => (f.direction.eval(t), 0.0),
                Case::GTM => (0.0, gsum * log_h_derivative(model, t) / g),
            };
            FixedPointData {
                n0: 1,
                n1: 0,
                fiber_dim: 1,
                rgamma: vec![0.0],
                gamma_tilde1: vec![],
                gamma_f: vec![1.0],
                v: vec![gsum * v],
                gdot: vec![0.0],
                domega: vec![],
                theta: vec![theta],
                sdot: vec![0.0],
                r_full: None,
                weight: model.weight * g * dt,
            }
        })
        .collect()
}

fn log_h_derivative(model: &CircleModel, t: f64) -> f64 {
    let h = model.config.log_h.first().cloned().unwrap_or_default();
    let mut v = 0.0;
    for (k, c) in h.cos.iter().enumerate() {
        v -= c * (k + 1) as f64 * ((k + 1) as f64 * t).sin();
    }
    for (k, s) in h.sin.iter().enumerate() {
        v += s * (k + 1) as f64 * ((k + 1) as f64 * t).cos();
    }
    v
}

/// Right-hand side from the fixed-point densities for the circle family.
pub fn circle_rhs(model: &CircleModel) -> Result<f64> {
    let f = model.config.family.as_ref().ok_or_else(|| Error::InvalidInput("model has no family".into()))?;
    match model.config.isometry {
        CircleIsometry::Reflection => {
            let gsum: f64 = model.gamma_f.iter().sum();
            let pts: Vec<FixedPointData> = model
                .fixed_nodes()
                .iter()
                .map(|&k| {
                    let v = if f.case == Case::HF { f.direction.eval(k as f64 * model.dtheta()) } else { 0.0 };
                    isolated_point(1, model.weight * gsum * v)
                })
                .collect();
            match f.case {
                Case::HF => rhs_variation_hf(&pts),
                Case::GTM => rhs_variation_gtm(&pts),
            }
        }
        CircleIsometry::Rotation { .. } => Ok(0.0),
        CircleIsometry::Identity => {
            let samples = circle_samples(model);
            match f.case {
                Case::HF => rhs_variation_hf(&samples),
                Case::GTM => rhs_variation_gtm(&samples),
            }
        }
    }
}

/// Number of samples in the LIM window fit.
pub const LIM_SAMPLES: usize = 48;

/// t⁰ coefficient of Σ(−1)^q Tr[X γ e^{−tΔ}] fitted on [20Δθ², 0.05].
pub fn circle_lim(model: &CircleModel, dc: &DiscreteComplex, x: &[Vec<f64>]) -> Result<f64> {
    let n0 = match model.config.isometry {
        CircleIsometry::Identity => 1,
        _ => 0,
    };
    let h = model.dtheta();
    let heat = heat_data(dc, x)?;
    lim_window(&heat, n0, h, 20.0 * h * h, 0.05, LIM_SAMPLES)
}

/// Circle anomaly experiment at the model's N.
pub fn anomaly_experiment(model: &CircleModel, method: LogDetMethod) -> Result<TorsionReport> {
    let f = model.config.family.clone().ok_or_else(|| Error::InvalidInput("model has no family".into()))?;
    let dc = model.complex(0.0)?;
    let (log_tau, log_metric, log_rs) = ray_singer(&dc, method)?;
    let value = |e: f64| -> Result<f64> { Ok(ray_singer(&model.complex(e)?, method)?.2) };
    let lhs_fd = central_difference(&value, f.step, true)?;
    let (counterterm, lim) = match f.case {
        Case::HF => (0.0, None),
        Case::GTM => {
            let x = model.insertion()?;
            let lim = circle_lim(model, &dc, &x)?;
            (lim - insertion_supertrace(&dc, &x), Some(lim))
        }
    };
    let lhs = lhs_fd + counterterm;
    let rhs = circle_rhs(model)?;
    let abs_error = (lhs - rhs).abs();
    Ok(TorsionReport {
        model: "circle".into(),
        gamma: model.config.isometry.label(),
        case: f.case.label().into(),
        n: model.n(),
        log_tau,
        log_metric,
        log_ray_singer: log_rs,
        lhs_fd,
        counterterm,
        lim,
        lhs,
        rhs,
        abs_error,
        rel_error: rel(abs_error, rhs),
        kernel_dims: dc.expected_kernel_dims(),
        step: f.step,
        convergence: vec![],
    })
}

/// Right-hand side for the torus h-family.
pub fn torus_rhs(model: &TorusModel) -> Result<f64> {
    let f = model.config.family.as_ref().ok_or_else(|| Error::InvalidInput("model has no family".into()))?;
    let dx = model.dx();
    match model.config.isometry {
        TorusIsometry::MinusId => {
            let pts: Vec<FixedPointData> = model
                .fixed_nodes()
                .iter()
                .map(|&(i, j)| isolated_point(2, f.direction.eval(i as f64 * dx, j as f64 * dx)))
                .collect();
            rhs_variation_hf(&pts)
        }
        TorusIsometry::Identity => {
            let n = model.n();
            let samples: Vec<FixedPointData> = (0..n * n)
                .map(|p| {
                    let mut d = isolated_point(0, f.direction.eval((p / n) as f64 * dx, (p % n) as f64 * dx));
                    d.n0 = 2;
                    d.rgamma = vec![0.0; 16];
                    d.weight = dx * dx;
                    d
                })
                .collect();
            rhs_variation_hf(&samples)
        }
    }
}

/// Torus anomaly experiment for the bundle-metric family (plain central difference).
pub fn torus_anomaly(model: &TorusModel, method: LogDetMethod) -> Result<TorsionReport> {
    let f = model.config.family.clone().ok_or_else(|| Error::InvalidInput("model has no family".into()))?;
    let dc = model.complex(0.0)?;
    let (log_tau, log_metric, log_rs) = ray_singer(&dc, method)?;
    let value = |e: f64| -> Result<f64> { Ok(ray_singer(&model.complex(e)?, method)?.2) };
    let lhs_fd = central_difference(&value, f.step, false)?;
    let rhs = torus_rhs(model)?;
    let abs_error = (lhs_fd - rhs).abs();
    Ok(TorsionReport {
        model: "torus".into(),
        gamma: model.config.isometry.label().into(),
        case: Case::HF.label().into(),
        n: model.n(),
        log_tau,
        log_metric,
        log_ray_singer: log_rs,
        lhs_fd,
        counterterm: 0.0,
        lim: None,
        lhs: lhs_fd,
        rhs,
        abs_error,
        rel_error: rel(abs_error, rhs),
        kernel_dims: dc.expected_kernel_dims(),
        step: f.step,
        convergence: vec![],
    })
}

/// Residuals of the Δ̇ substitution formula and of the L²-metric variation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationCheck {
    pub case: String,
    pub n: usize,
    /// Relative Frobenius residual per degree.
    pub laplacian_residuals: Vec<f64>,
    /// Central difference of log|·|²(γ).
    pub metric_fd: f64,
    /// Σ(−1)^q Tr[X γ P_0].
    pub metric_trace: f64,
    pub metric_residual: f64,
}

impl VariationCheck {
    pub fn max_residual(&self) -> f64 {
        self.laplacian_residuals.iter().fold(self.metric_residual, |a, b| a.max(*b))
    }
}

pub fn laplacian_variation_check(model: &CircleModel) -> Result<VariationCheck> {
    let f = model.config.family.clone().ok_or_else(|| Error::InvalidInput("model has no family".into()))?;
    let h = f.step;
    let (minus, mid, plus) = (model.complex(-h)?, model.complex(0.0)?, model.complex(h)?);
    let x = model.insertion()?;
    let laplacian_residuals =
        (0..=mid.top()).map(|q| laplacian_variation_residual(&minus, &mid, &plus, &x, h, q)).collect();
    let metric_fd = (equivariant_log_metric(&plus, false)? - equivariant_log_metric(&minus, false)?) / (2.0 * h);
    let metric_trace = harmonic_insertion_trace(&mid, &x)?;
    Ok(VariationCheck {
        case: f.case.label().into(),
        n: model.n(),
        laplacian_residuals,
        metric_fd,
        metric_trace,
        metric_residual: (metric_fd - metric_trace).abs() / metric_trace.abs().max(1.0),
    })
}

fn expm_mat(a: &Mat<f64>) -> Mat<f64> {
    let n = a.nrows();
    let flat: Vec<f64> = (0..n * n).map(|k| a[(k / n, k % n)]).collect();
    let e = linalg::expm(&flat, n);
    Mat::from_fn(n, n, |i, j| e[i * n + j])
}

/// Graded family H(ε) = R E(ε) diag(λ + εμ) E(ε)ᵀ Rᵀ with E = exp(εA),
/// γ = diag(±1), both R and A preserving each (degree, γ-sign) block and A
/// vanishing on kernel coordinates, so ker H(ε) is constant.
#[derive(Clone, Debug)]
pub struct GradedFamily {
    pub degree: Vec<usize>,
    pub gamma: Vec<f64>,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub rot: Mat<f64>,
    pub gen: Mat<f64>,
}

impl GradedFamily {
    pub fn dim(&self) -> usize {
        self.degree.len()
    }

    fn same_block(&self, i: usize, j: usize) -> bool {
        self.degree[i] == self.degree[j] && self.gamma[i] == self.gamma[j]
    }

    /// Diagonal family: no rotation.
    pub fn diagonal(degree: Vec<usize>, gamma: Vec<f64>, lambda: Vec<f64>, mu: Vec<f64>) -> Self {
        let n = degree.len();
        GradedFamily {
            degree,
            gamma,
            lambda,
            mu,
            rot: Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 }),
            gen: Mat::zeros(n, n),
        }
    }

    pub fn random(rng: &mut DetRng, dim: usize, max_degree: usize) -> Self {
        let degree: Vec<usize> = (0..dim).map(|_| rng.gen_range(0..=max_degree)).collect();
        let gamma: Vec<f64> = (0..dim).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let lambda: Vec<f64> =
            (0..dim).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.5..3.0) }).collect();
        let mu: Vec<f64> = lambda.iter().map(|l| if *l == 0.0 { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect();
        let mut fam = GradedFamily::diagonal(degree, gamma, lambda, mu);
        let mut a = Mat::<f64>::zeros(dim, dim);
        let mut b = Mat::<f64>::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..i {
                if fam.same_block(i, j) {
                    let x = rng.gen_range(-1.0..1.0);
                    a[(i, j)] = x;
                    a[(j, i)] = -x;
                    if fam.lambda[i] != 0.0 && fam.lambda[j] != 0.0 {
                        let y = rng.gen_range(-1.0..1.0);
                        b[(i, j)] = y;
                        b[(j, i)] = -y;
                    }
                }
            }
        }
        fam.rot = expm_mat(&a);
        fam.gen = b;
        fam
    }

    pub fn at(&self, eps: f64) -> Mat<f64> {
        let n = self.dim();
        let e = expm_mat(&Mat::from_fn(n, n, |i, j| eps * self.gen[(i, j)]));
        let re = &self.rot * &e;
        let d = Mat::from_fn(n, n, |i, j| if i == j { self.lambda[i] + eps * self.mu[i] } else { 0.0 });
        &(&re * &d) * re.transpose()
    }

    /// Ḣ(0) = R(AD − DA + diag μ)Rᵀ.
    pub fn derivative(&self) -> Mat<f64> {
        let n = self.dim();
        let d = Mat::from_fn(n, n, |i, j| if i == j { self.lambda[i] } else { 0.0 });
        let m = Mat::from_fn(n, n, |i, j| if i == j { self.mu[i] } else { 0.0 });
        let inner = &(&self.gen * &d) - &(&d * &self.gen) + &m;
        &(&self.rot * &inner) * self.rot.transpose()
    }

    fn blocks(&self) -> Vec<(usize, f64, Vec<usize>)> {
        let mut out: Vec<(usize, f64, Vec<usize>)> = Vec::new();
        for i in 0..self.dim() {
            match out.iter_mut().find(|(q, g, _)| *q == self.degree[i] && *g == self.gamma[i]) {
                Some(b) => b.2.push(i),
                None => out.push((self.degree[i], self.gamma[i], vec![i])),
            }
        }
        out
    }

    /// −Σ_q (−1)^q q Tr[γ log H_q|⊥] from the eigenvalues of each block.
    pub fn log_side(&self, eps: f64) -> Result<f64> {
        let h = self.at(eps);
        let mut total = 0.0;
        for (q, g, idx) in self.blocks() {
            let sub = Mat::from_fn(idx.len(), idx.len(), |a, b| h[(idx[a], idx[b])]);
            let kernel = idx.iter().filter(|&&i| self.lambda[i] == 0.0).count();
            let vals = linalg::eigvalsh(&sub);
            let max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
            let found = vals.iter().filter(|v| v.abs() < 1e-10 * max).count();
            if found != kernel {
                return Err(Error::ConstantKernelViolation(found, kernel));
            }
            let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
            total -= sign * q as f64 * g * vals[kernel..].iter().map(|l| l.ln()).sum::<f64>();
        }
        Ok(total)
    }

    /// −Σ_q (−1)^q q Tr[γ Ḣ H⁺].
    pub fn trace_side(&self) -> f64 {
        let n = self.dim();
        let (vals, u) = linalg::eigh(&self.at(0.0));
        let max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let mut pinv = Mat::<f64>::zeros(n, n);
        for k in 0..n {
            if vals[k].abs() > 1e-10 * max {
                for i in 0..n {
                    for j in 0..n {
                        pinv[(i, j)] += u[(i, k)] * u[(j, k)] / vals[k];
                    }
                }
            }
        }
        let p = &self.derivative() * &pinv;
        -(0..n)
            .map(|i| {
                let q = self.degree[i];
                let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                sign * q as f64 * self.gamma[i] * p[(i, i)]
            })
            .sum::<f64>()
    }

    /// −Σ (−1)^{q_i} q_i γ_i μ_i/λ_i.
    pub fn diagonal_oracle(&self) -> f64 {
        -(0..self.dim())
            .filter(|&i| self.lambda[i] != 0.0)
            .map(|i| {
                let q = self.degree[i];
                let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                sign * q as f64 * self.gamma[i] * self.mu[i] / self.lambda[i]
            })
            .sum::<f64>()
    }
}

/// Both sides of the finite-dimensional variation identity and the residual
/// |fd − trace| / max(1, |trace|).
pub fn prop_var_finite_check(family: &GradedFamily, step: f64) -> Result<(f64, f64, f64)> {
    let fd = central_difference(&|e| family.log_side(e), step, false)?;
    let tr = family.trace_side();
    Ok((fd, tr, (fd - tr).abs() / tr.abs().max(1.0)))
}

/// log τ + ½·weight·(Σ log M1 − Σ log M0): the torsion with the local
/// mass-matrix normalization removed. The correction is the one for γ = id;
/// the isometry of the model must be the identity.
pub fn renormalized_log_torsion(model: &CircleModel) -> Result<f64> {
    if model.config.isometry != CircleIsometry::Identity {
        return Err(Error::InvalidInput("renormalized torsion is defined for the identity only".into()));
    }
    let dc = model.complex(0.0)?;
    let tau = log_torsion(&dc, LogDetMethod::Cholesky)?;
    let s = |m: &[f64]| m.iter().map(|x| x.ln()).sum::<f64>();
    Ok(tau + 0.5 * dc.weight * (s(&dc.mass[1]) - s(&dc.mass[0])))
}

/// Continuum value −½ log|det(1 − U)|² for a line with holonomy e^{iφ}.
pub fn holonomy_torsion(phi: f64) -> f64 {
    -0.5 * (4.0 * (0.5 * phi).sin().powi(2)).ln()
}

/// Convergence table of a quantity over N with second-order extrapolation.
pub fn convergence_table(ns: &[usize], value: &dyn Fn(usize) -> Result<f64>) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in ns {
        let v = value(n)?;
        let extrapolation = rows.last().map(|p| (4.0 * v - p.value) / 3.0);
        rows.push(ConvergenceRow { n, value: v, extrapolation });
    }
    Ok(rows)
}

/// |R_last − R_prev| over the extrapolated column.
pub fn richardson_drift(rows: &[ConvergenceRow]) -> Option<f64> {
    let r: Vec<f64> = rows.iter().filter_map(|r| r.extrapolation).collect();
    (r.len() >= 2).then(|| (r[r.len() - 1] - r[r.len() - 2]).abs())
}

/// Σ(−1)^q Tr[Xγ] and its t → ∞ limit, for diagnostics.
pub fn heat_limits(dc: &DiscreteComplex, x: &[Vec<f64>]) -> Result<(f64, f64)> {
    let heat = heat_data(dc, x)?;
    Ok((insertion_supertrace(dc, x), heat.supertrace(1e12)))
}

/// Quadrature nodes θ_k = 2πk/N.
pub fn circle_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::spectral::complex::{harmonic_insertion_trace, zeta_theta, zeta_theta_direct};
    use crate::spectral::models::{CircleConfig, Family, Fourier, Fourier2, Holonomy, TorusConfig, TorusFamily, Wave};

    fn reflection_family(n: usize, case: Case) -> CircleModel {
        let mut c = CircleConfig::trivial(n);
        c.log_g = Fourier { a0: 0.0, cos: vec![0.2, 0.05], sin: vec![] };
        c.log_h = vec![Fourier { a0: 0.1, cos: vec![0.3], sin: vec![] }];
        c.isometry = CircleIsometry::Reflection;
        c.family = Some(Family { case, direction: Fourier { a0: 0.4, cos: vec![0.5, 0.2], sin: vec![] }, step: 1e-4 });
        CircleModel::new(c).unwrap()
    }

    #[test]
    fn reflection_hf_matches_fixed_points() {
        let m = reflection_family(64, Case::HF);
        let r = anomaly_experiment(&m, LogDetMethod::Spectral).unwrap();
        // v(0) + v(π) = (0.4 + 0.5 + 0.2) + (0.4 − 0.5 + 0.2)
        assert!((r.rhs - 1.2).abs() < 1e-12);
        assert!(r.abs_error < 1e-7, "{r:?}");
    }

    #[test]
    fn supertrace_of_insertion_is_the_lattice_variation() {
        for case in [Case::HF, Case::GTM] {
            let m = reflection_family(32, case);
            let r = anomaly_experiment(&m, LogDetMethod::Spectral).unwrap();
            let dc = m.complex(0.0).unwrap();
            let x = m.insertion().unwrap();
            assert!((r.lhs_fd - insertion_supertrace(&dc, &x)).abs() < 1e-7);
        }
    }

    #[test]
    fn identity_hf_vanishes_and_metric_variation_is_harmonic_trace() {
        let mut m = reflection_family(48, Case::HF);
        m.config.isometry = CircleIsometry::Identity;
        let m = CircleModel::new(m.config).unwrap();
        let r = anomaly_experiment(&m, LogDetMethod::Spectral).unwrap();
        assert_eq!(r.rhs, 0.0);
        assert!(r.lhs.abs() < 1e-8, "{}", r.lhs);
        let v = laplacian_variation_check(&m).unwrap();
        assert!(v.max_residual() < 1e-6, "{v:?}");
    }

    #[test]
    fn lim_reproduces_fixed_point_insertion() {
        // for the reflection the t⁰ coefficient of Tr_s[Vγe^{−tΔ}] is the
        // fixed-point sum, which equals the exact lattice supertrace
        let m = reflection_family(512, Case::HF);
        let dc = m.complex(0.0).unwrap();
        let x = m.insertion().unwrap();
        let lim = circle_lim(&m, &dc, &x).unwrap();
        let exact = insertion_supertrace(&dc, &x);
        assert!((exact - 1.2).abs() < 1e-12);
        assert!((lim - exact).abs() < 1e-3, "{lim} {exact}");
    }

    #[test]
    fn constant_family_is_flat() {
        let mut m = reflection_family(32, Case::HF);
        m.config.family.as_mut().unwrap().direction = Fourier::default();
        let m = CircleModel::new(m.config).unwrap();
        let v = laplacian_variation_check(&m).unwrap();
        assert!(v.laplacian_residuals.iter().all(|r| *r == 0.0 || r.is_nan() || *r < 1e-12) || v.metric_fd == 0.0);
        let r = anomaly_experiment(&m, LogDetMethod::Spectral).unwrap();
        assert!(r.lhs_fd.abs() < 1e-9);
    }

    #[test]
    fn scaling_h_shifts_log_metric() {
        // rank-1 trivial model: h ↦ e^c h shifts the degree-0 Gram log-det
        // by +c and the degree-1 one by +c as well, entering with sign −1
        let mut c = CircleConfig::trivial(16);
        let a = equivariant_log_metric(&CircleModel::new(c.clone()).unwrap().complex(0.0).unwrap(), false).unwrap();
        c.log_h = vec![Fourier::constant(0.7)];
        let b = equivariant_log_metric(&CircleModel::new(c).unwrap().complex(0.0).unwrap(), false).unwrap();
        assert!((b - a).abs() < 1e-12, "{}", b - a);
    }

    #[test]
    fn equivariant_metric_at_identity_is_plain_metric() {
        let m = reflection_family(16, Case::HF);
        let dc = m.complex(0.0).unwrap();
        let mut plain = dc.clone();
        plain.gamma = plain.dims.iter().map(|&d| crate::spectral::Sparse::identity(d)).collect();
        let a = equivariant_log_metric(&dc, true).unwrap();
        let b = equivariant_log_metric(&plain, false).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn zeta_theta_matches_direct_sums_and_derivative() {
        let m = reflection_family(24, Case::HF);
        let dc = m.complex(0.0).unwrap();
        for s in [-0.5, 0.0, 0.5] {
            let a = zeta_theta(&dc, s).unwrap();
            let b = zeta_theta_direct(&dc, s).unwrap();
            assert!((a - b).abs() < 1e-12 * a.abs().max(1.0), "{a} {b}");
        }
        let h = 1e-5;
        let fd = (zeta_theta(&dc, h).unwrap() - zeta_theta(&dc, -h).unwrap()) / (2.0 * h);
        let tp = crate::spectral::theta_prime_zero(&dc).unwrap();
        assert!((fd - tp).abs() < 1e-8 * tp.abs().max(1.0), "{fd} {tp}");
    }

    #[test]
    fn heat_supertrace_limits() {
        let m = reflection_family(32, Case::HF);
        let dc = m.complex(0.0).unwrap();
        let ones: Vec<Vec<f64>> = dc.dims.iter().map(|&d| vec![1.0; d]).collect();
        // large t leaves the graded trace of γ on the harmonic part
        let (_, inf) = heat_limits(&dc, &ones).unwrap();
        let h0 = harmonic_insertion_trace(&dc, &ones).unwrap();
        assert!((inf - h0).abs() < 1e-10, "{inf} {h0}");
        // constant insertion: McKean–Singer makes the supertrace t-independent
        for t in [1e-3, 0.1, 10.0] {
            let v = heat_supertrace_at(&dc, &ones, t);
            assert!((v - inf).abs() < 1e-9, "{t} {v} {inf}");
        }
        // reflection: kernel character is 1 (constants) − (−1) (dθ) = 2
        assert!((inf - 2.0).abs() < 1e-10);
    }

    fn heat_supertrace_at(dc: &DiscreteComplex, x: &[Vec<f64>], t: f64) -> f64 {
        crate::spectral::heat_supertrace(dc, x, t).unwrap()
    }

    #[test]
    fn graded_family_oracles() {
        let fam = GradedFamily::diagonal(
            vec![0, 1, 1, 2, 3],
            vec![1.0, -1.0, 1.0, 1.0, -1.0],
            vec![1.0, 2.0, 0.0, 0.5, 1.5],
            vec![0.3, -0.2, 0.0, 0.7, 0.4],
        );
        let want = -(-1.0 * -1.0 * -0.2 / 2.0 + 2.0 * 0.7 / 0.5 + -3.0 * -1.0 * 0.4 / 1.5);
        assert!((fam.diagonal_oracle() - want).abs() < 1e-14);
        let (fd, tr, res) = prop_var_finite_check(&fam, 1e-5).unwrap();
        assert!((tr - want).abs() < 1e-12 && (fd - want).abs() < 1e-8 && res < 1e-8);
        let still = GradedFamily::diagonal(vec![0, 1], vec![1.0, 1.0], vec![1.0, 2.0], vec![0.0, 0.0]);
        let (fd, tr, _) = prop_var_finite_check(&still, 1e-5).unwrap();
        assert!(fd.abs() < 1e-12 && tr == 0.0);
    }

    #[test]
    fn random_graded_families() {
        let mut rng = seeded(7);
        for _ in 0..5 {
            let fam = GradedFamily::random(&mut rng, 12, 3);
            let (_, _, res) = prop_var_finite_check(&fam, 1e-5).unwrap();
            assert!(res < 1e-6, "{res}");
        }
    }

    #[test]
    fn holonomy_torsion_is_stable() {
        let mut c = CircleConfig::trivial(16);
        c.holonomy = Holonomy::Angle { phi: 1.3 };
        c.log_g = Fourier { a0: 0.0, cos: vec![0.2], sin: vec![0.1] };
        c.log_h = vec![Fourier { a0: 0.0, cos: vec![], sin: vec![0.3] }];
        let rows = convergence_table(&[16, 32, 64], &|n| {
            let mut c = c.clone();
            c.n = n;
            renormalized_log_torsion(&CircleModel::new(c)?)
        })
        .unwrap();
        assert!(richardson_drift(&rows).unwrap() < 1e-3);
        assert!((rows[2].value - holonomy_torsion(1.3)).abs() < 1e-9);
    }

    #[test]
    fn torus_minus_id_small() {
        let cfg = TorusConfig {
            n: 8,
            log_h: Fourier2 { a0: 0.0, terms: vec![Wave { kx: 1, ky: 1, c: 0.2, s: 0.0 }] },
            isometry: TorusIsometry::MinusId,
            family: Some(TorusFamily {
                direction: Fourier2 { a0: 0.3, terms: vec![Wave { kx: 1, ky: 0, c: 0.5, s: 0.0 }] },
                step: 1e-4,
            }),
        };
        let m = TorusModel::new(cfg).unwrap();
        // v at (0,0), (0,π), (π,0), (π,π): 0.8 + 0.8 − 0.2 − 0.2
        assert!((torus_rhs(&m).unwrap() - 1.2).abs() < 1e-12);
        let a = torus_anomaly(&m, LogDetMethod::Cholesky).unwrap();
        let b = torus_anomaly(&m, LogDetMethod::Spectral).unwrap();
        assert!(a.rel_error < 1e-6, "{a:?}");
        assert!((a.log_ray_singer - b.log_ray_singer).abs() < 1e-9);
    }
}
