//! Finite-difference de Rham complexes on the circle and the flat torus.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::complex::{DiscreteComplex, Sparse};
use crate::error::{Error, Result};
use crate::linalg;

/// a0 + Σ_k (cos_k cos kθ + sin_k sin kθ), k = 1, 2, …
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Fourier {
    #[serde(default)]
    pub a0: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl Fourier {
    pub fn constant(a0: f64) -> Self {
        Fourier { a0, ..Default::default() }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut v = self.a0;
        for (k, c) in self.cos.iter().enumerate() {
            v += c * ((k + 1) as f64 * t).cos();
        }
        for (k, s) in self.sin.iter().enumerate() {
            v += s * ((k + 1) as f64 * t).sin();
        }
        v
    }

    pub fn scaled_add(&self, other: &Fourier, eps: f64) -> Fourier {
        let mix = |a: &[f64], b: &[f64]| -> Vec<f64> {
            (0..a.len().max(b.len()))
                .map(|i| a.get(i).copied().unwrap_or(0.0) + eps * b.get(i).copied().unwrap_or(0.0))
                .collect()
        };
        Fourier { a0: self.a0 + eps * other.a0, cos: mix(&self.cos, &other.cos), sin: mix(&self.sin, &other.sin) }
    }
}

/// One term c cos(kx x + ky y) + s sin(kx x + ky y).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub kx: i32,
    pub ky: i32,
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub s: f64,
}

/// Trigonometric polynomial on the torus [0, 2π)².
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Fourier2 {
    #[serde(default)]
    pub a0: f64,
    #[serde(default)]
    pub terms: Vec<Wave>,
}

impl Fourier2 {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.a0
            + self
                .terms
                .iter()
                .map(|w| {
                    let p = w.kx as f64 * x + w.ky as f64 * y;
                    w.c * p.cos() + w.s * p.sin()
                })
                .sum::<f64>()
    }

    pub fn scaled_add(&self, other: &Fourier2, eps: f64) -> Fourier2 {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|w| Wave { c: eps * w.c, s: eps * w.s, ..w.clone() }));
        Fourier2 { a0: self.a0 + eps * other.a0, terms }
    }
}

/// Monodromy of the flat bundle across the seam θ = 2π.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Holonomy {
    #[default]
    Identity,
    /// e^{iφ} on a complex line, handled as the rotation R(φ) on its
    /// underlying real plane.
    Angle { phi: f64 },
    /// diag(±1) on a real bundle of the same rank.
    Signs { signs: Vec<f64> },
}

/// Isometry of the circle acting on the grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CircleIsometry {
    #[default]
    Identity,
    /// θ ↦ θ + 2πj/N.
    Rotation { j: usize },
    /// θ ↦ −θ, fixing the nodes θ = 0 and θ = π.
    Reflection,
}

impl std::str::FromStr for CircleIsometry {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "id" | "identity" => Ok(CircleIsometry::Identity),
            "reflection" => Ok(CircleIsometry::Reflection),
            _ => match s.strip_prefix("rotation:") {
                Some(j) => j
                    .parse()
                    .map(|j| CircleIsometry::Rotation { j })
                    .map_err(|_| Error::InvalidInput(format!("bad rotation step in {s:?}"))),
                None => Err(Error::InvalidInput(format!("unknown circle isometry {s:?}"))),
            },
        }
    }
}

impl CircleIsometry {
    pub fn label(&self) -> String {
        match self {
            CircleIsometry::Identity => "id".into(),
            CircleIsometry::Rotation { j } => format!("rotation:{j}"),
            CircleIsometry::Reflection => "reflection".into(),
        }
    }
}

/// Which metric the family varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    /// Bundle metric h(ε) = h·e^{εv}.
    #[serde(rename = "hF")]
    HF,
    /// Riemannian metric with length density g(ε) = g·e^{εc}.
    #[serde(rename = "gTM")]
    GTM,
}

impl std::str::FromStr for Case {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hF" | "hf" => Ok(Case::HF),
            "gTM" | "gtm" => Ok(Case::GTM),
            _ => Err(Error::InvalidInput(format!("unknown variation case {s:?}"))),
        }
    }
}

impl Case {
    pub fn label(&self) -> &'static str {
        match self {
            Case::HF => "hF",
            Case::GTM => "gTM",
        }
    }
}

fn default_step() -> f64 {
    1e-4
}

fn default_rank() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub case: Case,
    pub direction: Fourier,
    #[serde(default = "default_step")]
    pub step: f64,
}

/// Circle model: length density e^{log_g}, bundle metric diag(e^{log_h_a}),
/// holonomy, γ^F = diag(gamma_f) and an isometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleConfig {
    pub n: usize,
    #[serde(default = "default_rank")]
    pub rank: usize,
    #[serde(default)]
    pub log_g: Fourier,
    /// One entry per component, or a single entry used for all.
    #[serde(default)]
    pub log_h: Vec<Fourier>,
    #[serde(default)]
    pub holonomy: Holonomy,
    #[serde(default)]
    pub gamma_f: Vec<f64>,
    #[serde(default)]
    pub isometry: CircleIsometry,
    #[serde(default)]
    pub family: Option<Family>,
}

impl CircleConfig {
    pub fn trivial(n: usize) -> Self {
        CircleConfig {
            n,
            rank: 1,
            log_g: Fourier::default(),
            log_h: vec![],
            holonomy: Holonomy::Identity,
            gamma_f: vec![],
            isometry: CircleIsometry::Identity,
            family: None,
        }
    }
}

/// Validated circle model in real form.
#[derive(Clone, Debug)]
pub struct CircleModel {
    pub config: CircleConfig,
    /// Real fiber dimension.
    pub r: usize,
    /// Holonomy as a real r×r row-major orthogonal matrix.
    pub u: Vec<f64>,
    pub gamma_f: Vec<f64>,
    /// Per real component Fourier data of log h.
    log_h: Vec<Fourier>,
    pub weight: f64,
}

fn identity(r: usize) -> Vec<f64> {
    let mut u = vec![0.0; r * r];
    for i in 0..r {
        u[i * r + i] = 1.0;
    }
    u
}

impl CircleModel {
    pub fn new(config: CircleConfig) -> Result<Self> {
        let n = config.n;
        if n < 4 {
            return Err(Error::InvalidInput("circle model needs at least 4 nodes".into()));
        }
        if config.rank == 0 {
            return Err(Error::InvalidInput("bundle rank must be positive".into()));
        }
        let (r, u, weight) = match &config.holonomy {
            Holonomy::Identity => (config.rank, identity(config.rank), 1.0),
            Holonomy::Signs { signs } => {
                if signs.len() != config.rank || signs.iter().any(|s| s.abs() != 1.0) {
                    return Err(Error::InvalidInput("holonomy signs must be ±1, one per component".into()));
                }
                let mut u = vec![0.0; config.rank * config.rank];
                for (i, s) in signs.iter().enumerate() {
                    u[i * config.rank + i] = *s;
                }
                (config.rank, u, 1.0)
            }
            Holonomy::Angle { phi } => {
                if config.rank != 1 {
                    return Err(Error::InvalidInput("angle holonomy is defined for a complex line".into()));
                }
                let (s, c) = phi.sin_cos();
                (2, vec![c, -s, s, c], 0.5)
            }
        };
        let complex_line = matches!(config.holonomy, Holonomy::Angle { .. });
        let expand = |v: &[f64], what: &str| -> Result<Vec<f64>> {
            match v.len() {
                0 => Ok(vec![1.0; r]),
                1 => Ok(vec![v[0]; r]),
                k if k == r => Ok(v.to_vec()),
                _ => Err(Error::InvalidInput(format!("{what} has the wrong number of components"))),
            }
        };
        let gamma_f = expand(&config.gamma_f, "gamma_f")?;
        if gamma_f.iter().any(|s| s.abs() != 1.0) {
            return Err(Error::InvalidInput("gamma_f entries must be ±1".into()));
        }
        let log_h = match config.log_h.len() {
            0 => vec![Fourier::default(); r],
            1 => vec![config.log_h[0].clone(); r],
            k if k == r && !complex_line => config.log_h.clone(),
            _ => return Err(Error::InvalidInput("log_h has the wrong number of components".into())),
        };
        if complex_line && gamma_f[0] != gamma_f[1] {
            return Err(Error::InvalidInput("gamma_f must be scalar on a complex line".into()));
        }
        // γ^F and h must commute with the holonomy
        for a in 0..r {
            for b in 0..r {
                let uab = u[a * r + b];
                if uab != 0.0 && (gamma_f[a] != gamma_f[b] || log_h[a] != log_h[b]) {
                    return Err(Error::InvalidInput("holonomy does not preserve γ^F and h".into()));
                }
            }
        }
        if config.isometry == CircleIsometry::Reflection {
            if n % 2 != 0 {
                return Err(Error::InvalidInput("reflection needs an even number of nodes".into()));
            }
            if u != identity(r) {
                return Err(Error::InvalidInput("reflection is implemented for trivial holonomy".into()));
            }
        }
        if let CircleIsometry::Rotation { j } = config.isometry {
            if j == 0 || j >= n {
                return Err(Error::InvalidInput("rotation step must lie in 1..N".into()));
            }
        }
        Ok(CircleModel { config, r, u, gamma_f, log_h, weight })
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.config.n as f64
    }

    fn family_parts(&self, eps: f64) -> (Fourier, Vec<Fourier>) {
        match &self.config.family {
            Some(f) if eps != 0.0 => match f.case {
                Case::GTM => (self.config.log_g.scaled_add(&f.direction, eps), self.log_h.clone()),
                Case::HF => {
                    (self.config.log_g.clone(), self.log_h.iter().map(|h| h.scaled_add(&f.direction, eps)).collect())
                }
            },
            _ => (self.config.log_g.clone(), self.log_h.clone()),
        }
    }

    /// Node and edge masses at parameter ε.
    pub fn masses(&self, eps: f64) -> (Vec<f64>, Vec<f64>) {
        let (n, r, dt) = (self.n(), self.r, self.dtheta());
        let (lg, lh) = self.family_parts(eps);
        let mut m0 = Vec::with_capacity(n * r);
        let mut m1 = Vec::with_capacity(n * r);
        for k in 0..n {
            let t = k as f64 * dt;
            let te = t + 0.5 * dt;
            for h in lh.iter() {
                m0.push((lg.eval(t) + h.eval(t)).exp() * dt);
                m1.push((h.eval(te) - lg.eval(te)).exp() / dt);
            }
        }
        (m0, m1)
    }

    /// X = ∂_ε log M on nodes and edges for the configured family.
    pub fn insertion(&self) -> Result<Vec<Vec<f64>>> {
        let f = self.config.family.as_ref().ok_or_else(|| Error::InvalidInput("model has no family".into()))?;
        let (n, r, dt) = (self.n(), self.r, self.dtheta());
        let mut x0 = Vec::with_capacity(n * r);
        let mut x1 = Vec::with_capacity(n * r);
        let s1 = if f.case == Case::HF { 1.0 } else { -1.0 };
        for k in 0..n {
            let t = k as f64 * dt;
            for _ in 0..r {
                x0.push(f.direction.eval(t));
                x1.push(s1 * f.direction.eval(t + 0.5 * dt));
            }
        }
        Ok(vec![x0, x1])
    }

    fn d0(&self) -> Sparse {
        let (n, r) = (self.n(), self.r);
        let mut d = Sparse::new(n * r, n * r);
        for k in 0..n {
            for a in 0..r {
                let row = k * r + a;
                d.push(row, row, -1.0);
                if k + 1 < n {
                    d.push(row, row + r, 1.0);
                } else {
                    for b in 0..r {
                        d.push(row, b, self.u[a * r + b]);
                    }
                }
            }
        }
        d
    }

    /// (γu)_k = γ^F u_{k+j}, with u extended by u_{k+N} = U u_k.
    fn shift(&self, j: usize) -> Sparse {
        let (n, r) = (self.n(), self.r);
        let mut g = Sparse::new(n * r, n * r);
        for k in 0..n {
            for a in 0..r {
                let row = k * r + a;
                if k + j < n {
                    g.push(row, (k + j) * r + a, self.gamma_f[a]);
                } else {
                    for b in 0..r {
                        g.push(row, (k + j - n) * r + b, self.gamma_f[a] * self.u[a * r + b]);
                    }
                }
            }
        }
        g
    }

    fn gammas(&self) -> (Sparse, Sparse) {
        let (n, r) = (self.n(), self.r);
        match self.config.isometry {
            CircleIsometry::Identity => {
                let mut g = Sparse::new(n * r, n * r);
                for i in 0..n * r {
                    g.push(i, i, self.gamma_f[i % r]);
                }
                (g.clone(), g)
            }
            CircleIsometry::Rotation { j } => (self.shift(j), self.shift(j)),
            CircleIsometry::Reflection => {
                let mut g0 = Sparse::new(n * r, n * r);
                let mut g1 = Sparse::new(n * r, n * r);
                for k in 0..n {
                    for a in 0..r {
                        g0.push(k * r + a, ((n - k) % n) * r + a, self.gamma_f[a]);
                        g1.push(k * r + a, (n - k - 1) * r + a, -self.gamma_f[a]);
                    }
                }
                (g0, g1)
            }
        }
    }

    /// Vectors c with Uc = c.
    fn fixed_vectors(&self) -> Vec<Vec<f64>> {
        let r = self.r;
        let mut a = faer::Mat::<f64>::zeros(r, r);
        for i in 0..r {
            for j in 0..r {
                a[(i, j)] = (0..r)
                    .map(|k| {
                        let d = |x: usize, y: usize| self.u[x * r + y] - if x == y { 1.0 } else { 0.0 };
                        d(k, i) * d(k, j)
                    })
                    .sum();
            }
        }
        let (vals, vecs) = linalg::eigh(&a);
        (0..r).filter(|&i| vals[i] < 1e-12).map(|i| (0..r).map(|k| vecs[(k, i)]).collect()).collect()
    }

    /// The discrete complex at parameter ε along the family.
    pub fn complex(&self, eps: f64) -> Result<DiscreteComplex> {
        let n = self.n();
        let (m0, m1) = self.masses(eps);
        let (g0, g1) = self.gammas();
        let tile = |c: &Vec<f64>| -> Vec<f64> { (0..n).flat_map(|_| c.iter().copied()).collect() };
        let fixed = self.fixed_vectors();
        let dc = DiscreteComplex {
            dims: vec![n * self.r, n * self.r],
            d: vec![self.d0()],
            mass: vec![m0, m1],
            gamma: vec![g0, g1],
            parallel: fixed.iter().map(tile).collect(),
            cokernel: fixed.iter().map(tile).collect(),
            middle: vec![],
            weight: self.weight,
        };
        dc.validate()?;
        check_isometry(&dc)?;
        Ok(dc)
    }

    /// Fixed points of the isometry as node indices, with Σ_a γ^F_a.
    pub fn fixed_nodes(&self) -> Vec<usize> {
        match self.config.isometry {
            CircleIsometry::Reflection => vec![0, self.n() / 2],
            _ => vec![],
        }
    }
}

/// γ preserves the inner products: M at the image index equals M at the source.
pub fn check_isometry(dc: &DiscreteComplex) -> Result<()> {
    for q in 0..=dc.top() {
        let m = &dc.mass[q];
        for &(r, c, _) in &dc.gamma[q].entries {
            if (m[r] - m[c]).abs() > 1e-12 * m[r].abs().max(m[c].abs()) {
                return Err(Error::InvalidInput(format!("metric is not invariant under the isometry in degree {q}")));
            }
        }
    }
    Ok(())
}

/// Isometry of the flat torus.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TorusIsometry {
    #[default]
    Identity,
    /// (x, y) ↦ (−x, −y).
    MinusId,
}

impl std::str::FromStr for TorusIsometry {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "id" | "identity" => Ok(TorusIsometry::Identity),
            "-id" | "minusid" | "minus-id" => Ok(TorusIsometry::MinusId),
            _ => Err(Error::InvalidInput(format!("unknown torus isometry {s:?}"))),
        }
    }
}

impl TorusIsometry {
    pub fn label(&self) -> &'static str {
        match self {
            TorusIsometry::Identity => "id",
            TorusIsometry::MinusId => "-id",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusFamily {
    pub direction: Fourier2,
    #[serde(default = "default_step")]
    pub step: f64,
}

/// Flat square torus with N×N nodes and a trivial line bundle with metric e^{log_h}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusConfig {
    pub n: usize,
    #[serde(default)]
    pub log_h: Fourier2,
    #[serde(default)]
    pub isometry: TorusIsometry,
    #[serde(default)]
    pub family: Option<TorusFamily>,
}

#[derive(Clone, Debug)]
pub struct TorusModel {
    pub config: TorusConfig,
}

impl TorusModel {
    pub fn new(config: TorusConfig) -> Result<Self> {
        if config.n < 4 || config.n % 2 != 0 {
            return Err(Error::InvalidInput("torus model needs an even N ≥ 4".into()));
        }
        Ok(TorusModel { config })
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn dx(&self) -> f64 {
        2.0 * PI / self.config.n as f64
    }

    fn node(&self, i: usize, j: usize) -> usize {
        let n = self.n();
        (i % n) * n + (j % n)
    }

    fn log_h(&self, eps: f64) -> Fourier2 {
        match &self.config.family {
            Some(f) if eps != 0.0 => self.config.log_h.scaled_add(&f.direction, eps),
            _ => self.config.log_h.clone(),
        }
    }

    fn node_values(&self, f: &Fourier2) -> Vec<f64> {
        let (n, dx) = (self.n(), self.dx());
        (0..n * n).map(|p| f.eval((p / n) as f64 * dx, (p % n) as f64 * dx)).collect()
    }

    /// Node, edge and face averages of a node function (edges: mean of the
    /// two endpoints, faces: mean of the four corners).
    fn averages(&self, v: &[f64]) -> [Vec<f64>; 3] {
        let n = self.n();
        let mut e = vec![0.0; 2 * n * n];
        let mut f = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let p = self.node(i, j);
                e[p] = 0.5 * (v[p] + v[self.node(i + 1, j)]);
                e[n * n + p] = 0.5 * (v[p] + v[self.node(i, j + 1)]);
                f[p] = 0.25 * (v[p] + v[self.node(i + 1, j)] + v[self.node(i + 1, j + 1)] + v[self.node(i, j + 1)]);
            }
        }
        [v.to_vec(), e, f]
    }

    /// X = ∂_ε log M per degree for the configured family.
    pub fn insertion(&self) -> Result<Vec<Vec<f64>>> {
        let f = self.config.family.as_ref().ok_or_else(|| Error::InvalidInput("model has no family".into()))?;
        Ok(self.averages(&self.node_values(&f.direction)).to_vec())
    }

    fn gammas(&self) -> Vec<Sparse> {
        let n = self.n();
        let nn = n * n;
        match self.config.isometry {
            TorusIsometry::Identity => vec![Sparse::identity(nn), Sparse::identity(2 * nn), Sparse::identity(nn)],
            TorusIsometry::MinusId => {
                let mut g0 = Sparse::new(nn, nn);
                let mut g1 = Sparse::new(2 * nn, 2 * nn);
                let mut g2 = Sparse::new(nn, nn);
                for i in 0..n {
                    for j in 0..n {
                        let p = self.node(i, j);
                        g0.push(p, self.node(n - i, n - j), 1.0);
                        let e = self.node(2 * n - i - 1, n - j);
                        g1.push(p, e, -1.0);
                        g1.push(nn + p, nn + self.node(n - i, 2 * n - j - 1), -1.0);
                        g2.push(p, self.node(2 * n - i - 1, 2 * n - j - 1), 1.0);
                    }
                }
                vec![g0, g1, g2]
            }
        }
    }

    pub fn complex(&self, eps: f64) -> Result<DiscreteComplex> {
        let n = self.n();
        let nn = n * n;
        let dx2 = self.dx() * self.dx();
        let lh = self.averages(&self.node_values(&self.log_h(eps)));
        let mass = vec![
            lh[0].iter().map(|l| l.exp() * dx2).collect(),
            lh[1].iter().map(|l| l.exp()).collect(),
            lh[2].iter().map(|l| l.exp() / dx2).collect(),
        ];
        let mut d0 = Sparse::new(2 * nn, nn);
        let mut d1 = Sparse::new(nn, 2 * nn);
        for i in 0..n {
            for j in 0..n {
                let p = self.node(i, j);
                d0.push(p, self.node(i + 1, j), 1.0);
                d0.push(p, p, -1.0);
                d0.push(nn + p, self.node(i, j + 1), 1.0);
                d0.push(nn + p, p, -1.0);
                d1.push(p, p, 1.0);
                d1.push(p, nn + self.node(i + 1, j), 1.0);
                d1.push(p, self.node(i, j + 1), -1.0);
                d1.push(p, nn + p, -1.0);
            }
        }
        let ones = vec![1.0; nn];
        let zx: Vec<f64> = (0..2 * nn).map(|e| if e < nn { 1.0 } else { 0.0 }).collect();
        let zy: Vec<f64> = (0..2 * nn).map(|e| if e < nn { 0.0 } else { 1.0 }).collect();
        let dc = DiscreteComplex {
            dims: vec![nn, 2 * nn, nn],
            d: vec![d0, d1],
            mass,
            gamma: self.gammas(),
            parallel: vec![ones.clone()],
            cokernel: vec![ones],
            middle: vec![vec![zx, zy]],
            weight: 1.0,
        };
        dc.validate()?;
        check_isometry(&dc)?;
        Ok(dc)
    }

    /// The four nodes fixed by −id.
    pub fn fixed_nodes(&self) -> Vec<(usize, usize)> {
        match self.config.isometry {
            TorusIsometry::MinusId => {
                let h = self.n() / 2;
                vec![(0, 0), (0, h), (h, 0), (h, h)]
            }
            TorusIsometry::Identity => vec![],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::complex::{harmonic_data, theta_prime_zero_with, LogDetMethod};
    use faer::Mat;

    fn max_abs(a: &Mat<f64>) -> f64 {
        let mut m = 0.0f64;
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                m = m.max(a[(i, j)].abs());
            }
        }
        m
    }

    fn kernel_dim(a: &Mat<f64>) -> usize {
        let v = linalg::eigvalsh(a);
        let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        v.iter().filter(|x| x.abs() < 1e-10 * max).count()
    }

    fn bumpy(n: usize) -> CircleConfig {
        let mut c = CircleConfig::trivial(n);
        c.log_g = Fourier { a0: 0.1, cos: vec![0.3, -0.1], sin: vec![] };
        c.log_h = vec![Fourier { a0: 0.0, cos: vec![0.2], sin: vec![] }];
        c
    }

    #[test]
    fn trivial_kernel_is_constants() {
        for rank in [1, 2] {
            let mut c = CircleConfig::trivial(16);
            c.rank = rank;
            let dc = CircleModel::new(c).unwrap().complex(0.0).unwrap();
            assert_eq!(kernel_dim(&dc.laplacian_sym(0)), rank);
            assert_eq!(kernel_dim(&dc.laplacian_sym(1)), rank);
        }
    }

    #[test]
    fn holonomy_without_fixed_vectors_is_acyclic() {
        let mut c = CircleConfig::trivial(12);
        c.holonomy = Holonomy::Angle { phi: 1.0 };
        let m = CircleModel::new(c).unwrap();
        let dc = m.complex(0.0).unwrap();
        assert_eq!(kernel_dim(&dc.laplacian_sym(0)), 0);
        assert_eq!(kernel_dim(&dc.laplacian_sym(1)), 0);
        assert!(dc.parallel.is_empty());
        // signs: only the +1 components are parallel
        let mut c = CircleConfig::trivial(12);
        c.rank = 3;
        c.holonomy = Holonomy::Signs { signs: vec![1.0, -1.0, -1.0] };
        let dc = CircleModel::new(c).unwrap().complex(0.0).unwrap();
        assert_eq!(kernel_dim(&dc.laplacian_sym(0)), 1);
        assert_eq!(dc.parallel.len(), 1);
    }

    #[test]
    fn gamma_commutes_with_laplacian() {
        let mut cfgs = Vec::new();
        for iso in [CircleIsometry::Reflection, CircleIsometry::Rotation { j: 3 }] {
            let mut c = bumpy(12);
            c.isometry = iso;
            if let CircleIsometry::Rotation { .. } = iso {
                c.log_g = Fourier::constant(0.2);
                c.log_h = vec![Fourier::constant(-0.1)];
                c.holonomy = Holonomy::Angle { phi: 0.7 };
            }
            cfgs.push(c);
        }
        for c in cfgs {
            let dc = CircleModel::new(c).unwrap().complex(0.0).unwrap();
            let d = dc.d[0].to_dense();
            let gd = &dc.gamma[1].to_dense() * &d - &d * &dc.gamma[0].to_dense();
            assert!(max_abs(&gd) < 1e-12);
            for q in 0..2 {
                let g = dc.gamma[q].to_dense();
                let l = dc.laplacian(q);
                assert!(max_abs(&(&g * &l - &l * &g)) < 1e-12 * max_abs(&l));
            }
        }
    }

    #[test]
    fn laplacian_is_positive_and_self_adjoint() {
        let dc = CircleModel::new(bumpy(20)).unwrap().complex(0.0).unwrap();
        for q in 0..2 {
            let l = dc.laplacian(q);
            let m = &dc.mass[q];
            let sym = Mat::from_fn(l.nrows(), l.ncols(), |i, j| m[i] * l[(i, j)] - m[j] * l[(j, i)]);
            assert!(max_abs(&sym) < 1e-10 * max_abs(&l));
            let v = linalg::eigvalsh(&dc.laplacian_sym(q));
            assert!(v[0] > -1e-10 * v[v.len() - 1]);
        }
    }

    #[test]
    fn noninvariant_metric_rejected() {
        let mut c = bumpy(12);
        c.log_h = vec![Fourier { a0: 0.0, cos: vec![], sin: vec![0.2] }];
        c.isometry = CircleIsometry::Reflection;
        assert!(matches!(CircleModel::new(c).unwrap().complex(0.0), Err(Error::InvalidInput(_))));
        let mut c = CircleConfig::trivial(12);
        c.isometry = CircleIsometry::Reflection;
        c.holonomy = Holonomy::Signs { signs: vec![-1.0] };
        assert!(CircleModel::new(c).is_err());
    }

    #[test]
    fn torus_complex_is_a_complex() {
        let cfg = TorusConfig {
            n: 6,
            log_h: Fourier2 { a0: 0.0, terms: vec![Wave { kx: 1, ky: 1, c: 0.2, s: 0.0 }] },
            isometry: TorusIsometry::MinusId,
            family: None,
        };
        let dc = TorusModel::new(cfg).unwrap().complex(0.0).unwrap();
        let dd = &dc.d[1].to_dense() * &dc.d[0].to_dense();
        assert_eq!(max_abs(&dd), 0.0);
        for q in 0..2 {
            let d = dc.d[q].to_dense();
            let c = &dc.gamma[q + 1].to_dense() * &d - &d * &dc.gamma[q].to_dense();
            assert!(max_abs(&c) < 1e-14);
        }
        let dims: Vec<usize> = (0..3).map(|q| kernel_dim(&dc.laplacian_sym(q))).collect();
        assert_eq!(dims, vec![1, 2, 1]);
        // H¹ classes are odd under −id
        let hd = harmonic_data(&dc).unwrap();
        assert_eq!(hd.blocks[1].len(), 1);
        assert_eq!(hd.blocks[1][0].0, -1.0);
        // the harmonic representatives are coclosed
        for h in &hd.blocks[1][0].1 {
            let mh: Vec<f64> = h.iter().zip(&dc.mass[1]).map(|(a, b)| a * b).collect();
            let r = dc.d[0].matvec_t(&mh);
            assert!(r.iter().all(|x| x.abs() < 1e-10));
        }
    }

    #[test]
    fn cholesky_and_spectral_agree() {
        let cfg = TorusConfig {
            n: 8,
            log_h: Fourier2 {
                a0: 0.3,
                terms: vec![Wave { kx: 1, ky: 0, c: 0.2, s: 0.0 }, Wave { kx: 1, ky: 2, c: -0.1, s: 0.0 }],
            },
            isometry: TorusIsometry::MinusId,
            family: None,
        };
        let dc = TorusModel::new(cfg).unwrap().complex(0.0).unwrap();
        let a = theta_prime_zero_with(&dc, LogDetMethod::Spectral).unwrap();
        let b = theta_prime_zero_with(&dc, LogDetMethod::Cholesky).unwrap();
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "{a} {b}");
        let mut c = bumpy(16);
        c.isometry = CircleIsometry::Reflection;
        let dc = CircleModel::new(c).unwrap().complex(0.0).unwrap();
        let a = theta_prime_zero_with(&dc, LogDetMethod::Spectral).unwrap();
        let b = theta_prime_zero_with(&dc, LogDetMethod::Cholesky).unwrap();
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn config_json() {
        let s = r#"{"n": 64, "log_h": [{"cos": [0.3]}], "isometry": {"kind": "reflection"},
                    "family": {"case": "hF", "direction": {"a0": 0.5, "cos": [1.0]}}}"#;
        let c: CircleConfig = serde_json::from_str(s).unwrap();
        assert_eq!(c.isometry, CircleIsometry::Reflection);
        assert_eq!(c.family.as_ref().unwrap().step, 1e-4);
        assert_eq!(c.rank, 1);
        assert!("rotation:3".parse::<CircleIsometry>().is_ok());
        assert!("spin".parse::<CircleIsometry>().is_err());
    }
}
