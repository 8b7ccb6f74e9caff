//! Verification suites: each acceptance criterion as a list of checks, and
//! the per-module suites built from them.

use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    asymp4_lhs_oracle, asymp4_rhs, gaussian_moment, gaussian_moment_quadrature, gaussian_moment_value,
    moment_identity_check, CliffordPolynomialMap, MultiIndex,
};
use crate::chern_weil::{euler_density_surface, gauss_bonnet_sphere, pfaffian, SkewFormMatrix};
use crate::clifford::{
    det_scalar, omega_clifford, supertrace, supertrace_monomial, supertrace_via_berezin, top_key, Clifford,
};
use crate::error::{Error, Result};
use crate::local_index::{
    det_cancellation, gauss_bonnet_via_integrand, integrand_i, pipeline_consistency, random_normal_isometry,
    surface_sample, FixedPointData,
};
use crate::report::{Check, RunInfo, SuiteResult};
use crate::rng::{self, seeded};
use crate::scalar::Scalar;
use crate::spectral::{
    anomaly_experiment, convergence_table, laplacian_variation_check, prop_var_finite_check, renormalized_log_torsion,
    richardson_drift, torus_anomaly, Case, CircleConfig, CircleIsometry, CircleModel, Family, Fourier, Fourier2,
    GradedFamily, Holonomy, LogDetMethod, TorusConfig, TorusFamily, TorusIsometry, TorusModel, Wave,
};
use crate::transport::{
    casimir_two_ways, max_diff, step_halving_ratio, transport_closed_form, transport_ode_solve,
    transport_sigma_closed_form, PointGeometry,
};

pub const SUITES: [&str; 7] = ["algebra", "chernweil", "asymptotics", "transport", "localindex", "spectral", "all"];

/// Criterion number → suite that runs it.
pub const CRITERION_SUITE: [&str; 14] = [
    "algebra",
    "algebra",
    "algebra",
    "asymptotics",
    "asymptotics",
    "asymptotics",
    "transport",
    "localindex",
    "localindex",
    "spectral",
    "spectral",
    "spectral",
    "spectral",
    "spectral",
];

fn default_reflection_n() -> usize {
    2048
}
fn default_vanishing_n() -> usize {
    1024
}
fn default_variation_n() -> usize {
    256
}
fn default_torus_n() -> usize {
    64
}
fn default_convergence() -> Vec<usize> {
    vec![64, 128, 256]
}
fn default_families() -> usize {
    20
}

/// Sizes for the spectral suite and optional extra models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSettings {
    #[serde(default = "default_reflection_n")]
    pub reflection_n: usize,
    #[serde(default = "default_vanishing_n")]
    pub vanishing_n: usize,
    #[serde(default = "default_variation_n")]
    pub variation_n: usize,
    #[serde(default = "default_torus_n")]
    pub torus_n: usize,
    #[serde(default = "default_convergence")]
    pub convergence_n: Vec<usize>,
    #[serde(default = "default_families")]
    pub graded_families: usize,
    /// Extra circle experiments (each needs a family).
    #[serde(default)]
    pub circle_models: Vec<CircleConfig>,
    /// Extra torus experiments.
    #[serde(default)]
    pub torus_models: Vec<TorusConfig>,
}

impl Default for SpectralSettings {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    #[serde(default)]
    pub spectral: SpectralSettings,
}

impl SuiteConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("malformed suite config: {e}")))
    }
}

/// Shared inputs of every check.
#[derive(Clone, Debug)]
pub struct Context {
    pub seed: u64,
    pub tolerance_scale: f64,
    pub config: SuiteConfig,
}

impl Context {
    pub fn new(seed: u64) -> Self {
        Context { seed, tolerance_scale: 1.0, config: SuiteConfig::default() }
    }

    pub fn tol(&self, t: f64) -> f64 {
        t * self.tolerance_scale
    }

    fn rng(&self, salt: u64) -> rng::DetRng {
        seeded(self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(salt))
    }
}

fn guard(id: &str, f: impl FnOnce() -> Result<Check>) -> Check {
    f().unwrap_or_else(|e| Check::failed(id, &e))
}

fn monomial(n: usize, k: u32) -> crate::CliffordElement {
    Clifford::from_terms(n, [(k, Scalar::int(1))])
}

/// Supertrace through the Fock representation against (4π)^{n/2}·T∘σ.
pub fn supertrace_duality(ctx: &Context) -> Vec<Check> {
    let mut mono = 0;
    let mut total = 0;
    for n in 1..=4 {
        for k in 0..(1u32 << (2 * n)) {
            let a = monomial(n, k);
            total += 1;
            if supertrace(&a) != supertrace_via_berezin(&a) {
                mono += 1;
            }
        }
    }
    let mut r = ctx.rng(1);
    let mut bad = 0;
    for i in 0..200 {
        let n = 1 + i % 4;
        let a = rng::random_clifford(&mut r, n, 0.3);
        if supertrace(&a) != supertrace_via_berezin(&a) {
            bad += 1;
        }
    }
    vec![
        Check::exact("algebra.supertrace_duality.monomials", mono, format!("{total} canonical monomials, n ≤ 4")),
        Check::exact("algebra.supertrace_duality.random", bad, "200 random exact elements"),
    ]
}

/// Str vanishes below top filtration degree and Str(ω) = (4π)^{n/2}.
pub fn supertrace_vanishing(_ctx: &Context) -> Vec<Check> {
    let mut bad = 0;
    let mut omega_bad = 0;
    for n in 1..=4 {
        let top = top_key(n);
        for k in 0..(1u32 << (2 * n)) {
            let a = monomial(n, k);
            if a.filtration_degree() < 2 * n && (!supertrace(&a).is_zero() || supertrace_monomial(n, k) != 0) {
                bad += 1;
            }
            if k == top && supertrace(&a).is_zero() {
                bad += 1;
            }
        }
        let want = &Scalar::int(1i64 << n) * &Scalar::pi_half_pow(n as i32);
        if supertrace(&omega_clifford(n)) != want {
            omega_bad += 1;
        }
    }
    vec![
        Check::exact("algebra.supertrace_low_degree", bad, "all monomials of degree < 2n, n ≤ 4"),
        Check::exact("algebra.supertrace_omega", omega_bad, "Str(ω) = (4π)^{n/2}, n ≤ 4"),
    ]
}

/// The two Casimir computations as 2^n × 2^n matrices.
pub fn casimir(_ctx: &Context) -> Vec<Check> {
    let bad = (1..=4)
        .filter(|&n| {
            let (a, b) = casimir_two_ways(n);
            a != b
        })
        .count();
    vec![Check::exact("algebra.casimir", bad, "n = 1..4")]
}

/// Closed Gaussian moments against quadrature; odd moments exactly zero.
pub fn gaussian_moments(ctx: &Context) -> Vec<Check> {
    gaussian_moment_checks(ctx, 3, 6)
}

/// Moments in up to `max_slots` variables of total degree ≤ `max_degree`.
pub fn gaussian_moment_checks(ctx: &Context, max_slots: usize, max_degree: usize) -> Vec<Check> {
    let mut worst = 0.0f64;
    let mut odd_bad = 0;
    let mut count = 0;
    for slots in 1..=max_slots {
        for alpha in MultiIndex::all_up_to(slots, max_degree) {
            if !alpha.is_even() {
                if !gaussian_moment(&alpha).coeff.is_zero() {
                    odd_bad += 1;
                }
                continue;
            }
            for t in [0.1, 1.0] {
                let exact = gaussian_moment_value(&alpha, t);
                let num = gaussian_moment_quadrature(&alpha, t);
                worst = worst.max(((num - exact) / exact).abs());
                count += 1;
            }
        }
    }
    vec![
        Check::new(
            "asymptotics.gaussian_moments",
            worst,
            ctx.tol(1e-6),
            format!("{count} even moments, N ≤ {max_slots}, |α| ≤ {max_degree}"),
        ),
        Check::exact("asymptotics.gaussian_odd_moments", odd_bad, "exact zeros"),
    ]
}

/// Q/P series symbol relation and moment identity through degree 2n.
pub fn p_series(_ctx: &Context) -> Vec<Check> {
    [2, 3, 4].iter().map(|&n| p_series_check(n, 2 * n)).collect()
}

pub fn p_series_check(n: usize, degree: usize) -> Check {
    let id = format!("asymptotics.p_series.n{n}");
    guard(&id, || {
        let ok = moment_identity_check(n, degree)?;
        Ok(Check::exact(&id, usize::from(!ok), format!("total degree ≤ {degree}")))
    })
}

/// Both sides of the Gaussian limit for random homogeneous maps.
pub fn asymp4(ctx: &Context) -> Vec<Check> {
    [2, 3, 4].iter().map(|&n| asymp4_check(ctx, n, 50)).collect()
}

/// `trials` random maps per i = 0..⌊n/2⌋.
pub fn asymp4_check(ctx: &Context, n: usize, trials: usize) -> Check {
    let mut r = ctx.rng(4 + 100 * n as u64);
    let id = format!("asymptotics.asymp4.n{n}");
    guard(&id, || {
        let mut bad = 0;
        let mut count = 0;
        for i in 0..=n / 2 {
            for _ in 0..trials {
                let phi = CliffordPolynomialMap::random(&mut r, n, 1, 4 * i, n - 2 * i);
                if asymp4_lhs_oracle(&phi, i)? != asymp4_rhs(&phi, i)? {
                    bad += 1;
                }
                count += 1;
            }
        }
        Ok(Check::exact(&id, bad, format!("{count} random maps")))
    })
}

/// ODE transport at zero rotation against the closed forms, and the RK4 order.
pub fn transport_closed_forms(ctx: &Context) -> Vec<Check> {
    [2, 4].iter().flat_map(|&n| transport_checks(ctx, n, 20, 64)).collect()
}

/// Closed forms over `trials` random geometries at `steps` RK4 steps, and
/// the step-halving ratio on one more.
pub fn transport_checks(ctx: &Context, n: usize, trials: usize, steps: usize) -> Vec<Check> {
    let mut r = ctx.rng(7 + 100 * n as u64);
    let id = format!("transport.closed_form.n{n}");
    let closed = guard(&id, || {
        let mut worst = 0.0f64;
        let zero = vec![vec![0.0; n]; n];
        for _ in 0..trials {
            let g = PointGeometry::random(&mut r, n, 2);
            let st = transport_ode_solve(&g, &zero, steps)?;
            worst = worst.max(max_diff(&st.f, &transport_closed_form(&g)?));
            worst = worst.max(max_diff(&st.fsigma, &transport_sigma_closed_form(&g)?));
        }
        Ok(Check::new(&id, worst, ctx.tol(1e-10), format!("{trials} random geometries, {steps} RK4 steps")))
    });
    let id = format!("transport.rk4_order.n{n}");
    let order = guard(&id, || {
        let g = PointGeometry::random(&mut r, n, 2);
        // rotation amplitude and base step count inside the asymptotic
        // regime and well above roundoff
        let a = rng::antisymmetric(&mut r, n, 0.75);
        let ratio = step_halving_ratio(&g, &a, 16)?;
        let off = (12.0 - ratio).max(ratio - 20.0).max(0.0);
        Ok(Check::new(&id, off, 0.0, format!("step-halving ratio {ratio:.3} in [12, 20]")))
    });
    vec![closed, order]
}

/// Two routes through the fixed-point pipeline; det(1 − γ̃) cancellation.
pub fn fixed_point_pipeline(ctx: &Context) -> Vec<Check> {
    pipeline_checks(ctx, 3, 100)
}

/// `trials` samples per (n0, n1) and `rotations` normal isometries.
pub fn pipeline_checks(ctx: &Context, trials: usize, rotations: usize) -> Vec<Check> {
    let mut r = ctx.rng(8);
    let mut out = Vec::new();
    for (n0, n1) in [(2, 2), (4, 2), (2, 4)] {
        let id = format!("localindex.pipeline.{n0}_{n1}");
        out.push(guard(&id, || {
            let mut worst = 0.0f64;
            for _ in 0..trials {
                let d = FixedPointData::random(&mut r, n0, n1, 2);
                let (a, b) = pipeline_consistency(&d)?;
                worst = worst.max((a - b).abs() / (1.0 + b.abs()));
            }
            Ok(Check::new(&id, worst, ctx.tol(1e-10), format!("{trials} random fixed-point samples")))
        }));
    }
    let id = "localindex.det_cancellation";
    out.push(guard(id, || {
        let mut worst = 0.0f64;
        for i in 0..rotations {
            let n1 = if i % 2 == 0 { 2 } else { 4 };
            let g = random_normal_isometry(&mut r, n1);
            let rows: Vec<Vec<Scalar>> =
                (0..n1).map(|a| (0..n1).map(|b| Scalar::float(g[a * n1 + b])).collect()).collect();
            let (s, d) = det_cancellation(&rows)?;
            worst = worst.max((s.to_f64() - d.to_f64()).abs());
        }
        Ok(Check::new(id, worst, ctx.tol(1e-12), format!("{rotations} random normal rotations")))
    }));
    out
}

/// Integrand with unit trace against the Euler density; Gauss–Bonnet.
pub fn euler_density(ctx: &Context) -> Vec<Check> {
    let mut out = Vec::new();
    let id = "localindex.euler_density";
    out.push(guard(id, || {
        let mut r = ctx.rng(9);
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let k = rng::uniform(&mut r, -3.0, 3.0);
            worst = worst.max((integrand_i(&surface_sample(k))? - euler_density_surface(k)?).abs());
        }
        Ok(Check::new(id, worst, ctx.tol(1e-8), "50 synthetic surface samples"))
    }));
    let id = "localindex.gauss_bonnet";
    out.push(guard(id, || {
        let mut worst = 0.0f64;
        for r in [0.5, 1.0, 2.0] {
            worst = worst.max((gauss_bonnet_via_integrand(r, 2000)? - 2.0).abs());
        }
        Ok(Check::new(id, worst, ctx.tol(1e-6), "radius 0.5, 1, 2"))
    }));
    out
}

/// Chern–Weil level checks: Pf² = det, sphere Gauss–Bonnet, Euler density.
pub fn chernweil_suite(ctx: &Context) -> Vec<Check> {
    let mut out = Vec::new();
    let id = "chernweil.pfaffian_squared";
    out.push(guard(id, || {
        let mut r = ctx.rng(10);
        let mut bad = 0;
        for m in [2, 4, 6] {
            for _ in 0..5 {
                let mut a = vec![vec![Scalar::zero(); m]; m];
                for i in 0..m {
                    for j in (i + 1)..m {
                        let v = rng::small_rational(&mut r);
                        a[j][i] = -&v;
                        a[i][j] = v;
                    }
                }
                let pf = pfaffian(&SkewFormMatrix::from_scalars(&a)?)?.top_coefficient();
                if &pf * &pf != det_scalar(&a) {
                    bad += 1;
                }
            }
        }
        Ok(Check::exact(id, bad, "15 random exact matrices, size 2, 4, 6"))
    }));
    let id = "chernweil.euler_density";
    out.push(guard(id, || {
        let worst = [-1.0, 0.5, 2.0]
            .iter()
            .map(|k| euler_density_surface(*k).map(|e| (e - k / (2.0 * PI)).abs()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        Ok(Check::new(id, worst, ctx.tol(1e-14), "K·dA/2π"))
    }));
    let id = "chernweil.gauss_bonnet";
    out.push(guard(id, || {
        let mut worst = 0.0f64;
        for r in [0.5, 1.0, 2.0] {
            worst = worst.max((gauss_bonnet_sphere(r, 2000, 1)? - 2.0).abs());
        }
        Ok(Check::new(id, worst, ctx.tol(1e-6), "radius 0.5, 1, 2"))
    }));
    out
}

/// Reflection-symmetric circle family used by the spectral criteria.
pub fn circle_family(n: usize, case: Case, isometry: CircleIsometry) -> CircleConfig {
    let mut c = CircleConfig::trivial(n);
    c.log_g = Fourier { a0: 0.0, cos: vec![0.2, 0.05], sin: vec![] };
    c.log_h = vec![Fourier { a0: 0.1, cos: vec![0.3], sin: vec![] }];
    c.isometry = isometry;
    c.family = Some(Family { case, direction: Fourier { a0: 0.4, cos: vec![0.5, 0.2], sin: vec![] }, step: 1e-4 });
    c
}

/// Flat torus with a −id-invariant bundle metric and direction.
pub fn torus_family(n: usize, isometry: TorusIsometry) -> TorusConfig {
    TorusConfig {
        n,
        log_h: Fourier2 {
            a0: 0.0,
            terms: vec![Wave { kx: 1, ky: 1, c: 0.2, s: 0.0 }, Wave { kx: 2, ky: 0, c: 0.1, s: 0.0 }],
        },
        isometry,
        family: Some(TorusFamily {
            direction: Fourier2 { a0: 0.3, terms: vec![Wave { kx: 1, ky: 0, c: 0.5, s: 0.0 }] },
            step: 1e-4,
        }),
    }
}

/// Holonomy model for the convergence study.
pub fn holonomy_model(n: usize) -> CircleConfig {
    let mut c = CircleConfig::trivial(n);
    c.holonomy = Holonomy::Angle { phi: 1.3 };
    c.log_g = Fourier { a0: 0.0, cos: vec![0.2], sin: vec![0.1] };
    c.log_h = vec![Fourier { a0: 0.0, cos: vec![0.1], sin: vec![0.3] }];
    c
}

/// Δ̇ substitution residual and L²-metric variation, both cases.
pub fn laplacian_variation(ctx: &Context) -> Vec<Check> {
    let n = ctx.config.spectral.variation_n;
    [Case::GTM, Case::HF]
        .iter()
        .map(|&case| {
            let id = format!("spectral.laplacian_variation.{}", case.label());
            guard(&id, || {
                let m = CircleModel::new(circle_family(n, case, CircleIsometry::Reflection))?;
                let v = laplacian_variation_check(&m)?;
                Ok(Check::new(
                    &id,
                    v.max_residual(),
                    ctx.tol(1e-6),
                    format!(
                        "N = {n}, degree residuals {:.2e}/{:.2e}, metric {:.2e}",
                        v.laplacian_residuals[0], v.laplacian_residuals[1], v.metric_residual
                    ),
                ))
            })
        })
        .collect()
}

/// Finite-dimensional variation identity on random graded families.
pub fn graded_families(ctx: &Context) -> Vec<Check> {
    let id = "spectral.prop_var";
    vec![guard(id, || {
        let mut r = ctx.rng(11);
        let count = ctx.config.spectral.graded_families;
        let mut worst = 0.0f64;
        for i in 0..count {
            let dim = 4 + (i * 7) % 13;
            let fam = GradedFamily::random(&mut r, dim, 3);
            worst = worst.max(prop_var_finite_check(&fam, 1e-5)?.2);
        }
        Ok(Check::new(id, worst, ctx.tol(1e-6), format!("{count} families, dimension 4..16")))
    })]
}

fn report_detail(r: &crate::spectral::TorsionReport) -> String {
    // adding 0.0 turns −0 into +0
    format!("N = {}, lhs {:.6}, rhs {:.6}", r.n, r.lhs + 0.0, r.rhs + 0.0)
}

/// Relative anomaly error when |RHS| > 0.1; otherwise absolute.
pub fn anomaly_check(id: &str, r: &crate::spectral::TorsionReport, rel_tol: f64, abs_tol: f64) -> Check {
    if r.rhs.abs() > 0.1 {
        Check::new(id, r.rel_error, rel_tol, report_detail(r))
    } else {
        Check::new(id, r.abs_error, abs_tol, report_detail(r))
    }
}

/// Reflection on the circle against v(p₀) + v(p₁).
pub fn circle_reflection(ctx: &Context) -> Check {
    let id = "spectral.anomaly.circle_reflection";
    guard(id, || {
        let m =
            CircleModel::new(circle_family(ctx.config.spectral.reflection_n, Case::HF, CircleIsometry::Reflection))?;
        let r = anomaly_experiment(&m, LogDetMethod::Spectral)?;
        if r.rhs.abs() <= 0.1 {
            return Err(Error::InvalidInput("fixed-point sum too small for a relative test".into()));
        }
        Ok(anomaly_check(id, &r, ctx.tol(2e-2), 0.0))
    })
}

/// −id on the torus against the four-point sum.
pub fn torus_minus_id(ctx: &Context) -> Check {
    let id = "spectral.anomaly.torus_minus_id";
    guard(id, || {
        let m = TorusModel::new(torus_family(ctx.config.spectral.torus_n, TorusIsometry::MinusId))?;
        let r = torus_anomaly(&m, LogDetMethod::Cholesky)?;
        Ok(anomaly_check(id, &r, ctx.tol(5e-2), 0.0))
    })
}

/// Isolated fixed points on the circle and the torus.
pub fn isolated_fixed_points(ctx: &Context) -> Vec<Check> {
    vec![circle_reflection(ctx), torus_minus_id(ctx)]
}

/// Cases where the fixed-point side vanishes.
pub fn vanishing_cases(ctx: &Context) -> Vec<Check> {
    let n = ctx.config.spectral.vanishing_n;
    [
        (Case::HF, CircleIsometry::Identity),
        (Case::GTM, CircleIsometry::Identity),
        (Case::GTM, CircleIsometry::Reflection),
    ]
    .iter()
    .map(|&(case, iso)| {
        let id = format!("spectral.vanishing.{}.{}", iso.label(), case.label());
        guard(&id, || {
            let m = CircleModel::new(circle_family(n, case, iso))?;
            let r = anomaly_experiment(&m, LogDetMethod::Spectral)?;
            if r.rhs != 0.0 {
                return Err(Error::InvalidInput(format!("expected a vanishing right-hand side, got {}", r.rhs)));
            }
            Ok(Check::new(&id, r.lhs.abs(), ctx.tol(5e-3), report_detail(&r)))
        })
    })
    .collect()
}

/// Richardson drift of the renormalized holonomy torsion over N → 2N → 4N.
pub fn torsion_convergence(ctx: &Context) -> Vec<Check> {
    let id = "spectral.torsion_convergence";
    vec![guard(id, || {
        let rows = convergence_table(&ctx.config.spectral.convergence_n, &|n| {
            renormalized_log_torsion(&CircleModel::new(holonomy_model(n))?)
        })?;
        let drift =
            richardson_drift(&rows).ok_or_else(|| Error::InvalidInput("need at least three grid sizes".into()))?;
        let last = rows.last().expect("nonempty");
        Ok(Check::new(id, drift, ctx.tol(1e-3), format!("N = {}, log τ {:.10}", last.n, last.value)))
    })]
}

/// Experiments on user-supplied models.
pub fn custom_models(ctx: &Context) -> Vec<Check> {
    let s = &ctx.config.spectral;
    let mut out = Vec::new();
    for (i, c) in s.circle_models.iter().enumerate() {
        let id = format!("spectral.custom.circle{i}");
        out.push(guard(&id, || {
            let r = anomaly_experiment(&CircleModel::new(c.clone())?, LogDetMethod::Spectral)?;
            Ok(anomaly_check(&id, &r, ctx.tol(2e-2), ctx.tol(5e-3)))
        }));
    }
    for (i, c) in s.torus_models.iter().enumerate() {
        let id = format!("spectral.custom.torus{i}");
        out.push(guard(&id, || {
            let r = torus_anomaly(&TorusModel::new(c.clone())?, LogDetMethod::Cholesky)?;
            Ok(anomaly_check(&id, &r, ctx.tol(5e-2), ctx.tol(5e-3)))
        }));
    }
    out
}

/// Checks of one acceptance criterion (1-based).
pub fn criterion(k: usize, ctx: &Context) -> Vec<Check> {
    match k {
        1 => supertrace_duality(ctx),
        2 => supertrace_vanishing(ctx),
        3 => casimir(ctx),
        4 => gaussian_moments(ctx),
        5 => p_series(ctx),
        6 => asymp4(ctx),
        7 => transport_closed_forms(ctx),
        8 => fixed_point_pipeline(ctx),
        9 => euler_density(ctx),
        10 => laplacian_variation(ctx),
        11 => graded_families(ctx),
        12 => isolated_fixed_points(ctx),
        13 => vanishing_cases(ctx),
        14 => torsion_convergence(ctx),
        _ => vec![],
    }
}

fn timed(runtimes: &mut Vec<(String, u64)>, f: impl FnOnce() -> Vec<Check>) -> Vec<Check> {
    let t = Instant::now();
    let checks = f();
    let ms = t.elapsed().as_millis() as u64;
    for c in &checks {
        runtimes.push((c.id.clone(), ms));
    }
    checks
}

/// Single-threaded dense linear algebra, so reductions run in a fixed order.
pub fn deterministic_linalg() {
    faer::set_global_parallelism(faer::Par::Seq);
}

/// Runs a named suite. Returns the results and the runtime header.
pub fn run_suite(name: &str, ctx: &Context) -> Result<(Vec<SuiteResult>, RunInfo)> {
    deterministic_linalg();
    let names: Vec<&str> = match name {
        "all" => SUITES[..6].to_vec(),
        n if SUITES.contains(&n) => vec![n],
        _ => return Err(Error::InvalidInput(format!("unknown suite {name:?}; expected one of {}", SUITES.join(", ")))),
    };
    let mut run = RunInfo::default();
    let mut out = Vec::new();
    for suite in names {
        let mut checks = Vec::new();
        for k in 1..=14 {
            if CRITERION_SUITE[k - 1] == suite {
                checks.extend(timed(&mut run.runtimes_ms, || criterion(k, ctx)));
            }
        }
        if suite == "chernweil" {
            checks.extend(timed(&mut run.runtimes_ms, || chernweil_suite(ctx)));
        }
        if suite == "spectral" {
            checks.extend(timed(&mut run.runtimes_ms, || custom_models(ctx)));
        }
        out.push(SuiteResult { suite: suite.into(), seed: ctx.seed, checks });
    }
    Ok((out, run))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_a_usage_error() {
        assert!(matches!(run_suite("geometry", &Context::new(1)), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn algebra_suite_passes_and_is_deterministic() {
        let ctx = Context::new(42);
        let (a, _) = run_suite("algebra", &ctx).unwrap();
        let (b, _) = run_suite("algebra", &ctx).unwrap();
        assert!(a[0].passed(), "{:?}", a[0]);
        assert_eq!(a, b);
    }

    #[test]
    fn chernweil_suite_passes() {
        let (a, _) = run_suite("chernweil", &Context::new(3)).unwrap();
        assert!(a[0].passed(), "{:?}", a[0]);
    }

    #[test]
    fn settings_defaults_and_overrides() {
        let c = SuiteConfig::from_json(r#"{"spectral": {"reflection_n": 128}}"#).unwrap();
        assert_eq!(c.spectral.reflection_n, 128);
        assert_eq!(c.spectral.torus_n, 64);
        assert!(SuiteConfig::from_json("{").is_err());
    }

    #[test]
    fn small_spectral_checks() {
        let mut ctx = Context::new(5);
        ctx.config.spectral = SuiteConfig::from_json(
            r#"{"spectral": {"reflection_n": 128, "vanishing_n": 128, "variation_n": 32, "torus_n": 8,
                "convergence_n": [16, 32, 64], "graded_families": 4}}"#,
        )
        .unwrap()
        .spectral;
        for k in [10, 11, 12, 14] {
            for c in criterion(k, &ctx) {
                assert!(c.passed, "{c:?}");
            }
        }
    }
}
