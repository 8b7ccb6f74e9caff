//! Finite cochain complexes with diagonal inner products and a finite
//! isometry: equivariant torsion, zeta functions, L²-metrics on cohomology,
//! heat supertraces and the Laplacian variation identity.

use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg;

/// Eigenvalues below this fraction of the largest count as harmonic.
pub const KERNEL_REL: f64 = 1e-10;
/// Nonkernel eigenvalues below this fraction of the largest are rejected.
pub const GAP_REL: f64 = 1e-7;

/// Sparse matrix as a list of (row, col, value) triplets.
#[derive(Clone, Debug, Default)]
pub struct Sparse {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Sparse {
    pub fn new(rows: usize, cols: usize) -> Self {
        Sparse { rows, cols, entries: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Sparse { rows: n, cols: n, entries: (0..n).map(|i| (i, i, 1.0)).collect() }
    }

    pub fn push(&mut self, r: usize, c: usize, v: f64) {
        if v != 0.0 {
            self.entries.push((r, c, v));
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.cols];
        for &(r, c, v) in &self.entries {
            y[c] += v * x[r];
        }
        y
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.rows.min(self.cols)];
        for &(r, c, v) in &self.entries {
            if r == c {
                d[r] += v;
            }
        }
        d
    }

    /// Entries grouped by row.
    fn by_row(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![Vec::new(); self.rows];
        for &(r, c, v) in &self.entries {
            rows[r].push((c, v));
        }
        rows
    }

    /// Entries grouped by column.
    fn by_col(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.cols];
        for &(r, c, v) in &self.entries {
            cols[c].push((r, v));
        }
        cols
    }

    /// γ e_i = s_i e_{p(i)} with γ² = 1, if this matrix has that form.
    pub fn as_signed_involution(&self) -> Option<(Vec<usize>, Vec<f64>)> {
        if self.rows != self.cols {
            return None;
        }
        let cols = self.by_col();
        let mut perm = vec![0; self.cols];
        let mut sign = vec![0.0; self.cols];
        for (c, list) in cols.iter().enumerate() {
            if list.len() != 1 || (list[0].1.abs() - 1.0).abs() > 1e-14 {
                return None;
            }
            perm[c] = list[0].0;
            sign[c] = list[0].1.signum();
        }
        for i in 0..perm.len() {
            if perm[perm[i]] != i || sign[i] != sign[perm[i]] {
                return None;
            }
        }
        Some((perm, sign))
    }
}

/// Bᵀ diag(w) B for sparse B, dense output.
fn gram_weighted(b: &Sparse, w: &[f64]) -> Mat<f64> {
    let mut out = Mat::zeros(b.cols, b.cols);
    for (r, list) in b.by_row().iter().enumerate() {
        for &(c1, v1) in list {
            for &(c2, v2) in list {
                out[(c1, c2)] += w[r] * v1 * v2;
            }
        }
    }
    out
}

/// B diag(w) Bᵀ for sparse B, dense output.
fn gram_weighted_t(b: &Sparse, w: &[f64]) -> Mat<f64> {
    let mut out = Mat::zeros(b.rows, b.rows);
    for (c, list) in b.by_col().iter().enumerate() {
        for &(r1, v1) in list {
            for &(r2, v2) in list {
                out[(r1, r2)] += w[c] * v1 * v2;
            }
        }
    }
    out
}

fn scale_rows_cols(a: &mut Mat<f64>, s: &[f64]) {
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            a[(i, j)] *= s[i] * s[j];
        }
    }
}

/// Cochain complex C⁰ → … → C^top with diagonal inner products M_q, an
/// isometry γ_q commuting with d, and metric-independent cohomology data.
#[derive(Clone, Debug)]
pub struct DiscreteComplex {
    pub dims: Vec<usize>,
    /// d[q]: C^q → C^{q+1}.
    pub d: Vec<Sparse>,
    /// Diagonal of M_q.
    pub mass: Vec<Vec<f64>>,
    /// γ_q acting on C^q (pullback).
    pub gamma: Vec<Sparse>,
    /// Basis of ker d_0 (parallel sections).
    pub parallel: Vec<Vec<f64>>,
    /// Basis of ker d_{top−1}ᵀ, pairing with top-degree classes.
    pub cokernel: Vec<Vec<f64>>,
    /// Cocycle representatives for 0 < q < top, indexed by q − 1.
    pub middle: Vec<Vec<Vec<f64>>>,
    /// Multiplier on every logarithmic quantity (½ for a realified complex bundle).
    pub weight: f64,
}

/// How log det′ is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogDetMethod {
    /// Eigenvalues, with the kernel and gap checks.
    Spectral,
    /// Cholesky of S + ZZᵀ with Z an orthonormal kernel basis.
    Cholesky,
}

/// Restriction of a γ-invariant operator to one eigenspace of an involution.
struct Block {
    sign: f64,
    /// Columns of the orthonormal basis, each with at most two entries.
    basis: Vec<Vec<(usize, f64)>>,
}

fn involution_blocks(perm: &[usize], sign: &[f64]) -> Vec<Block> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for i in 0..perm.len() {
        let j = perm[i];
        if j == i {
            if sign[i] > 0.0 {
                plus.push(vec![(i, 1.0)]);
            } else {
                minus.push(vec![(i, 1.0)]);
            }
        } else if i < j {
            plus.push(vec![(i, h), (j, sign[i] * h)]);
            minus.push(vec![(i, h), (j, -sign[i] * h)]);
        }
    }
    vec![Block { sign: 1.0, basis: plus }, Block { sign: -1.0, basis: minus }]
}

fn project_block(a: &Mat<f64>, b: &Block) -> Mat<f64> {
    let k = b.basis.len();
    Mat::from_fn(k, k, |r, c| {
        let mut t = 0.0;
        for &(i, u) in &b.basis[r] {
            for &(j, v) in &b.basis[c] {
                t += u * v * a[(i, j)];
            }
        }
        t
    })
}

fn block_coords(v: &[f64], b: &Block) -> Vec<f64> {
    b.basis.iter().map(|col| col.iter().map(|&(i, u)| u * v[i]).sum()).collect()
}

/// Orthonormalizes (Euclidean) the given vectors, dropping dependent ones.
pub fn orthonormalize(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &out {
                let p: f64 = u.iter().zip(&w).map(|(a, b)| a * b).sum();
                w.iter_mut().zip(u).for_each(|(x, y)| *x -= p * y);
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
        if norm > 1e-9 * scale {
            out.push(w.iter().map(|x| x / norm).collect());
        }
    }
    out
}

/// The symmetric operator whose γ-twisted log det′ gives T_q, with its kernel.
pub struct TOperator {
    pub sym: Mat<f64>,
    pub kernel: Vec<Vec<f64>>,
    pub gamma: Sparse,
}

/// How a family member is compared: eigenvalue summary of one block.
#[derive(Clone, Debug, Default)]
pub struct SpectrumSummary {
    pub kernel_dim: usize,
    pub min_nonzero: f64,
    pub max: f64,
}

impl DiscreteComplex {
    pub fn top(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        let top = self.top();
        if self.d.len() != top || self.mass.len() != top + 1 || self.gamma.len() != top + 1 {
            return Err(Error::InvalidInput("complex has inconsistent degree data".into()));
        }
        for q in 0..=top {
            if self.mass[q].len() != self.dims[q] || self.mass[q].iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
                return Err(Error::InvalidInput(format!("mass matrix in degree {q} is not positive")));
            }
        }
        Ok(())
    }

    /// M_q^{-1} d_{q}ᵀ M_{q+1} (the adjoint d_q*) as a dense matrix.
    pub fn adjoint(&self, q: usize) -> Mat<f64> {
        let d = self.d[q].to_dense();
        Mat::from_fn(d.ncols(), d.nrows(), |i, j| d[(j, i)] * self.mass[q + 1][j] / self.mass[q][i])
    }

    /// Δ_q = d_{q−1}d_{q−1}* + d_q*d_q, dense, unsymmetrized.
    pub fn laplacian(&self, q: usize) -> Mat<f64> {
        let n = self.dims[q];
        let mut out = Mat::<f64>::zeros(n, n);
        if q < self.top() {
            let d = self.d[q].to_dense();
            out += &self.adjoint(q) * &d;
        }
        if q > 0 {
            let d = self.d[q - 1].to_dense();
            out += &d * &self.adjoint(q - 1);
        }
        out
    }

    /// M_q^{1/2} Δ_q M_q^{-1/2}, symmetric.
    pub fn laplacian_sym(&self, q: usize) -> Mat<f64> {
        let n = self.dims[q];
        let mut out = Mat::<f64>::zeros(n, n);
        if q < self.top() {
            let mut a = gram_weighted(&self.d[q], &self.mass[q + 1]);
            let s: Vec<f64> = self.mass[q].iter().map(|m| 1.0 / m.sqrt()).collect();
            scale_rows_cols(&mut a, &s);
            out += &a;
        }
        if q > 0 {
            let w: Vec<f64> = self.mass[q - 1].iter().map(|m| 1.0 / m).collect();
            let mut a = gram_weighted_t(&self.d[q - 1], &w);
            let s: Vec<f64> = self.mass[q].iter().map(|m| m.sqrt()).collect();
            scale_rows_cols(&mut a, &s);
            out += &a;
        }
        out
    }

    /// Operator for T_q: on C⁰ for q = 0, otherwise on C^{q+1} (valid for
    /// q + 1 = top), where its nonzero spectrum is that of d_q*d_q.
    pub fn t_operator(&self, q: usize) -> Result<TOperator> {
        let top = self.top();
        if q == 0 {
            let mut a = gram_weighted(&self.d[0], &self.mass[1]);
            let s: Vec<f64> = self.mass[0].iter().map(|m| 1.0 / m.sqrt()).collect();
            scale_rows_cols(&mut a, &s);
            let kernel = self
                .parallel
                .iter()
                .map(|z| z.iter().zip(&self.mass[0]).map(|(x, m)| x * m.sqrt()).collect())
                .collect();
            Ok(TOperator { sym: a, kernel, gamma: self.gamma[0].clone() })
        } else if q + 1 == top {
            let w: Vec<f64> = self.mass[q].iter().map(|m| 1.0 / m).collect();
            let mut a = gram_weighted_t(&self.d[q], &w);
            let s: Vec<f64> = self.mass[top].iter().map(|m| m.sqrt()).collect();
            scale_rows_cols(&mut a, &s);
            let kernel = self
                .cokernel
                .iter()
                .map(|k| k.iter().zip(&self.mass[top]).map(|(x, m)| x / m.sqrt()).collect())
                .collect();
            Ok(TOperator { sym: a, kernel, gamma: self.gamma[top].clone() })
        } else {
            Err(Error::InvalidInput(format!("T_{q} is only available for q = 0 or q = top − 1")))
        }
    }

    /// Expected harmonic dimension per degree from the cohomology data.
    pub fn expected_kernel_dims(&self) -> Vec<usize> {
        let top = self.top();
        (0..=top)
            .map(|q| {
                if q == 0 {
                    self.parallel.len()
                } else if q == top {
                    self.cokernel.len()
                } else {
                    self.middle.get(q - 1).map(|m| m.len()).unwrap_or(0)
                }
            })
            .collect()
    }
}

fn spectral_fn_trace(op: &TOperator, f: &dyn Fn(f64) -> f64, method: LogDetMethod) -> Result<(f64, SpectrumSummary)> {
    match op.gamma.as_signed_involution() {
        Some((perm, sign)) => {
            let mut total = 0.0;
            let mut summary = SpectrumSummary { kernel_dim: 0, min_nonzero: f64::INFINITY, max: 0.0 };
            for b in involution_blocks(&perm, &sign) {
                if b.basis.is_empty() {
                    continue;
                }
                let a = project_block(&op.sym, &b);
                let coords: Vec<Vec<f64>> = op
                    .kernel
                    .iter()
                    .filter_map(|z| {
                        let c = block_coords(z, &b);
                        let full = z.iter().map(|x| x * x).sum::<f64>().sqrt();
                        (c.iter().map(|x| x * x).sum::<f64>().sqrt() > 1e-9 * full).then_some(c)
                    })
                    .collect();
                let kernel = orthonormalize(&coords);
                let (v, s) = block_fn_trace(&a, &kernel, f, method)?;
                total += b.sign * v;
                summary.kernel_dim += s.kernel_dim;
                summary.min_nonzero = summary.min_nonzero.min(s.min_nonzero);
                summary.max = summary.max.max(s.max);
            }
            Ok((total, summary))
        }
        None => {
            // general γ: Σ_i f(λ_i) u_iᵀ γ u_i over the nonkernel eigenpairs
            let (vals, u) = linalg::eigh(&op.sym);
            let (kernel_dim, min_nonzero, max) = classify(&vals)?;
            let g = op.gamma.to_dense();
            let gu = &g * &u;
            let mut total = 0.0;
            for (i, &l) in vals.iter().enumerate() {
                if i < kernel_dim {
                    continue;
                }
                let w: f64 = (0..u.nrows()).map(|r| u[(r, i)] * gu[(r, i)]).sum();
                total += f(l) * w;
            }
            Ok((total, SpectrumSummary { kernel_dim, min_nonzero, max }))
        }
    }
}

/// Splits ascending eigenvalues into kernel and the rest; rejects a small gap.
fn classify(vals: &[f64]) -> Result<(usize, f64, f64)> {
    let max = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let kernel_dim = vals.iter().filter(|v| v.abs() < KERNEL_REL * max).count();
    let min_nonzero = vals.get(kernel_dim).copied().unwrap_or(f64::INFINITY);
    if min_nonzero < GAP_REL * max {
        return Err(Error::IllConditioned(min_nonzero));
    }
    Ok((kernel_dim, min_nonzero, max))
}

fn block_fn_trace(
    a: &Mat<f64>,
    kernel: &[Vec<f64>],
    f: &dyn Fn(f64) -> f64,
    method: LogDetMethod,
) -> Result<(f64, SpectrumSummary)> {
    match method {
        LogDetMethod::Spectral => {
            let vals = linalg::eigvalsh(a);
            let (kernel_dim, min_nonzero, max) = classify(&vals)?;
            if kernel_dim != kernel.len() {
                return Err(Error::ConstantKernelViolation(kernel_dim, kernel.len()));
            }
            Ok((vals[kernel_dim..].iter().map(|&l| f(l)).sum(), SpectrumSummary { kernel_dim, min_nonzero, max }))
        }
        LogDetMethod::Cholesky => {
            let mut b = a.clone();
            for z in kernel {
                for i in 0..z.len() {
                    for j in 0..z.len() {
                        b[(i, j)] += z[i] * z[j];
                    }
                }
            }
            let ld = linalg::logdet_spd(&b).ok_or(Error::ConstantKernelViolation(kernel.len() + 1, kernel.len()))?;
            Ok((ld, SpectrumSummary { kernel_dim: kernel.len(), min_nonzero: f64::NAN, max: f64::NAN }))
        }
    }
}

/// T_q = Tr[γ log(d_q*d_q)|⊥].
pub fn t_q(dc: &DiscreteComplex, q: usize, method: LogDetMethod) -> Result<f64> {
    let op = dc.t_operator(q)?;
    let (v, _) = spectral_fn_trace(&op, &|l| l.ln(), method)?;
    Ok(v)
}

/// θ′(0) = −Σ_q (−1)^q q Tr[γ log Δ_q|⊥] = Σ_q (−1)^q T_q.
pub fn theta_prime_zero_with(dc: &DiscreteComplex, method: LogDetMethod) -> Result<f64> {
    dc.validate()?;
    let mut total = 0.0;
    for q in 0..dc.top() {
        let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * t_q(dc, q, method)?;
    }
    Ok(dc.weight * total)
}

/// θ′(0) by eigenvalues, with the conditioning checks.
pub fn theta_prime_zero(dc: &DiscreteComplex) -> Result<f64> {
    theta_prime_zero_with(dc, LogDetMethod::Spectral)
}

/// θ(γ, s) = Σ_q (−1)^q q Tr[γ Δ_q^{−s}] over nonzero eigenvalues.
pub fn zeta_theta(dc: &DiscreteComplex, s: f64) -> Result<f64> {
    dc.validate()?;
    let mut total = 0.0;
    for q in 0..dc.top() {
        let sign = if q % 2 == 0 { -1.0 } else { 1.0 };
        let op = dc.t_operator(q)?;
        total += sign * spectral_fn_trace(&op, &|l| l.powf(-s), LogDetMethod::Spectral)?.0;
    }
    Ok(dc.weight * total)
}

/// θ(γ, s) straight from the eigenpairs of every Δ_q (no Hodge splitting).
pub fn zeta_theta_direct(dc: &DiscreteComplex, s: f64) -> Result<f64> {
    let mut total = 0.0;
    for q in 0..=dc.top() {
        let (vals, u) = linalg::eigh(&dc.laplacian_sym(q));
        let (kernel_dim, _, _) = classify(&vals)?;
        let g = dc.gamma[q].to_dense();
        let gu = &g * &u;
        let mut tr = 0.0;
        for i in kernel_dim..vals.len() {
            let w: f64 = (0..u.nrows()).map(|r| u[(r, i)] * gu[(r, i)]).sum();
            tr += vals[i].powf(-s) * w;
        }
        total += if q % 2 == 0 { 1.0 } else { -1.0 } * q as f64 * tr;
    }
    Ok(dc.weight * total)
}

/// log τ(γ) = −½θ′(0).
pub fn log_torsion(dc: &DiscreteComplex, method: LogDetMethod) -> Result<f64> {
    Ok(-0.5 * theta_prime_zero_with(dc, method)?)
}

/// Harmonic bases per degree, split into isotypic blocks for γ, with the
/// value χ(γ) of the block's character. Block vectors are harmonic
/// representatives of fixed, metric-independent classes.
pub struct HarmonicData {
    /// `blocks[q]` = list of (χ(γ), harmonic vectors).
    pub blocks: Vec<Vec<(f64, Vec<Vec<f64>>)>>,
}

enum GammaShape {
    Involution,
    Trivial,
}

fn gamma_shape(dc: &DiscreteComplex) -> Result<GammaShape> {
    if dc.gamma.iter().all(|g| g.as_signed_involution().is_some()) {
        Ok(GammaShape::Involution)
    } else {
        Ok(GammaShape::Trivial)
    }
}

/// Splits vectors into the ±1 eigenspaces of an involution `g`.
fn split_involution(vs: &[Vec<f64>], g: &Sparse) -> Vec<(f64, Vec<Vec<f64>>)> {
    let mut out = Vec::new();
    for s in [1.0, -1.0] {
        let proj: Vec<Vec<f64>> = vs
            .iter()
            .filter_map(|v| {
                let gv = g.matvec(v);
                let p: Vec<f64> = v.iter().zip(&gv).map(|(a, b)| 0.5 * (a + s * b)).collect();
                let norm = |x: &[f64]| x.iter().map(|y| y * y).sum::<f64>().sqrt();
                (norm(&p) > 1e-9 * norm(v)).then_some(p)
            })
            .collect();
        let basis = orthonormalize(&proj);
        if !basis.is_empty() {
            out.push((s, basis));
        }
    }
    out
}

fn transpose_sparse(g: &Sparse) -> Sparse {
    Sparse { rows: g.cols, cols: g.rows, entries: g.entries.iter().map(|&(r, c, v)| (c, r, v)).collect() }
}

fn check_fixed(vs: &[Vec<f64>], g: &Sparse) -> Result<()> {
    for v in vs {
        let gv = g.matvec(v);
        if gv.iter().zip(v).any(|(a, b)| (a - b).abs() > 1e-10) {
            return Err(Error::InvalidInput(
                "isometry acts nontrivially on cohomology; only involutions are split".into(),
            ));
        }
    }
    Ok(())
}

/// Harmonic part of a cocycle z of degree q: z − d_{q−1}x with x minimizing
/// the M_q-norm (solved on C^{q−1} with the kernel fixed by ZZᵀ).
fn harmonic_part(dc: &DiscreteComplex, q: usize, z: &[f64]) -> Result<Vec<f64>> {
    let d = &dc.d[q - 1];
    let mut a = gram_weighted(d, &dc.mass[q]);
    if q - 1 == 0 {
        for p in orthonormalize(&dc.parallel) {
            for i in 0..p.len() {
                for j in 0..p.len() {
                    a[(i, j)] += p[i] * p[j];
                }
            }
        }
    } else {
        return Err(Error::InvalidInput("harmonic projection is implemented for degree 1 only".into()));
    }
    let mz: Vec<f64> = z.iter().zip(&dc.mass[q]).map(|(x, m)| x * m).collect();
    let rhs = d.matvec_t(&mz);
    let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
    let x = linalg::solve_spd(&a, &b).ok_or(Error::Singular)?;
    let xv: Vec<f64> = (0..x.nrows()).map(|i| x[(i, 0)]).collect();
    let dx = d.matvec(&xv);
    Ok(z.iter().zip(&dx).map(|(a, b)| a - b).collect())
}

/// Harmonic representatives of the cohomology, split by γ.
pub fn harmonic_data(dc: &DiscreteComplex) -> Result<HarmonicData> {
    let top = dc.top();
    let shape = gamma_shape(dc)?;
    let split = |vs: &[Vec<f64>], g: &Sparse| -> Result<Vec<(f64, Vec<Vec<f64>>)>> {
        match shape {
            GammaShape::Involution => Ok(split_involution(vs, g)),
            GammaShape::Trivial => {
                check_fixed(vs, g)?;
                let b = orthonormalize(vs);
                Ok(if b.is_empty() { vec![] } else { vec![(1.0, b)] })
            }
        }
    };
    let mut blocks = Vec::new();
    for q in 0..=top {
        if q == 0 {
            blocks.push(split(&dc.parallel, &dc.gamma[0])?);
        } else if q == top {
            // classes are dual to the cokernel basis; harmonic forms are M^{-1}K
            let gt = transpose_sparse(&dc.gamma[top]);
            let ks = split(&dc.cokernel, &gt)?;
            blocks.push(
                ks.into_iter()
                    .map(|(s, k)| {
                        let h: Vec<Vec<f64>> =
                            k.iter().map(|v| v.iter().zip(&dc.mass[top]).map(|(x, m)| x / m).collect()).collect();
                        (s, h)
                    })
                    .collect(),
            );
        } else {
            let reps = dc.middle.get(q - 1).cloned().unwrap_or_default();
            let parts = split(&reps, &dc.gamma[q])?;
            let mut out = Vec::new();
            for (s, vs) in parts {
                let h = vs.iter().map(|z| harmonic_part(dc, q, z)).collect::<Result<Vec<_>>>()?;
                out.push((s, h));
            }
            blocks.push(out);
        }
    }
    Ok(HarmonicData { blocks })
}

fn gram(vs: &[Vec<f64>], mass: &[f64]) -> Mat<f64> {
    Mat::from_fn(vs.len(), vs.len(), |i, j| vs[i].iter().zip(&vs[j]).zip(mass).map(|((a, b), m)| a * b * m).sum())
}

/// log|·|²(γ) = Σ_q (−1)^q Σ_W χ_W(γ)/dim W · log det Gram(H^q(W)).
///
/// Degree-0 classes are parallel sections; top-degree classes are the dual
/// basis to the cokernel data (Gram matrix (KᵀM^{-1}K)^{-1}); middle classes
/// are the given cocycles. With `at_identity` the characters are evaluated
/// at 1 instead of γ.
pub fn equivariant_log_metric(dc: &DiscreteComplex, at_identity: bool) -> Result<f64> {
    dc.validate()?;
    let top = dc.top();
    let hd = harmonic_data(dc)?;
    let mut total = 0.0;
    for q in 0..=top {
        let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
        for (chi, vs) in &hd.blocks[q] {
            let chi = if at_identity { 1.0 } else { *chi };
            let ld = if q == top && q > 0 {
                // Gram of the dual classes is the inverse of KᵀM^{-1}K
                let ks: Vec<Vec<f64>> =
                    vs.iter().map(|h| h.iter().zip(&dc.mass[top]).map(|(x, m)| x * m).collect()).collect();
                let inv_m: Vec<f64> = dc.mass[top].iter().map(|m| 1.0 / m).collect();
                -linalg::logdet_spd(&gram(&ks, &inv_m)).ok_or(Error::Singular)?
            } else {
                linalg::logdet_spd(&gram(vs, &dc.mass[q])).ok_or(Error::Singular)?
            };
            total += sign * chi * ld;
        }
    }
    Ok(dc.weight * total)
}

/// Σ_q (−1)^q Tr[X_q γ_q P_0], P_0 the M-orthogonal harmonic projection.
pub fn harmonic_insertion_trace(dc: &DiscreteComplex, x: &[Vec<f64>]) -> Result<f64> {
    let top = dc.top();
    let hd = harmonic_data(dc)?;
    let mut total = 0.0;
    for q in 0..=top {
        let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
        let h: Vec<Vec<f64>> = hd.blocks[q].iter().flat_map(|(_, v)| v.clone()).collect();
        if h.is_empty() {
            continue;
        }
        let g = gram(&h, &dc.mass[q]);
        // Tr[(HᵀMH)^{-1} HᵀM X γ H]
        let k = h.len();
        let mut b = Mat::<f64>::zeros(k, k);
        for j in 0..k {
            let gh = dc.gamma[q].matvec(&h[j]);
            for i in 0..k {
                b[(i, j)] = h[i].iter().zip(&gh).enumerate().map(|(r, (a, c))| a * dc.mass[q][r] * x[q][r] * c).sum();
            }
        }
        let sol = linalg::solve_spd(&g, &b).ok_or(Error::Singular)?;
        total += sign * (0..k).map(|i| sol[(i, i)]).sum::<f64>();
    }
    Ok(dc.weight * total)
}

/// Σ_q (−1)^q Tr[X_q γ_q] (the t = 0 value of the heat supertrace).
pub fn insertion_supertrace(dc: &DiscreteComplex, x: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for q in 0..=dc.top() {
        let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
        let gd = dc.gamma[q].diagonal();
        total += sign * x[q].iter().zip(&gd).map(|(a, b)| a * b).sum::<f64>();
    }
    dc.weight * total
}

/// Eigenvalues with weights w_i = (uᵢᵀ X γ uᵢ) per degree, so that
/// Tr[X_q γ_q f(Δ_q)] = Σ_i w_i f(λ_i).
pub struct HeatData {
    pub degrees: Vec<Vec<(f64, f64)>>,
    pub weight: f64,
}

pub fn heat_data(dc: &DiscreteComplex, x: &[Vec<f64>]) -> Result<HeatData> {
    dc.validate()?;
    let mut degrees = Vec::new();
    for q in 0..=dc.top() {
        let a = dc.laplacian_sym(q);
        let mut pairs = Vec::new();
        match dc.gamma[q].as_signed_involution() {
            Some((perm, sign)) => {
                for b in involution_blocks(&perm, &sign) {
                    if b.basis.is_empty() {
                        continue;
                    }
                    let ab = project_block(&a, &b);
                    // X is diagonal and γ-invariant, so it preserves each block
                    let xb = project_block(
                        &Mat::from_fn(a.nrows(), a.nrows(), |i, j| if i == j { x[q][i] } else { 0.0 }),
                        &b,
                    );
                    let (vals, u) = linalg::eigh(&ab);
                    let xu = &xb * &u;
                    for (i, &l) in vals.iter().enumerate() {
                        let w: f64 = (0..u.nrows()).map(|r| u[(r, i)] * xu[(r, i)]).sum();
                        pairs.push((l, b.sign * w));
                    }
                }
            }
            None => {
                let (vals, u) = linalg::eigh(&a);
                let g = dc.gamma[q].to_dense();
                let xg = Mat::from_fn(g.nrows(), g.ncols(), |i, j| x[q][i] * g[(i, j)]);
                let xgu = &xg * &u;
                for (i, &l) in vals.iter().enumerate() {
                    let w: f64 = (0..u.nrows()).map(|r| u[(r, i)] * xgu[(r, i)]).sum();
                    pairs.push((l, w));
                }
            }
        }
        // harmonic eigenvalues are zero up to rounding; pin them
        let max = pairs.iter().fold(0.0f64, |m, (l, _)| m.max(l.abs()));
        for p in pairs.iter_mut() {
            if p.0.abs() < KERNEL_REL * max {
                p.0 = 0.0;
            }
        }
        degrees.push(pairs);
    }
    Ok(HeatData { degrees, weight: dc.weight })
}

impl HeatData {
    /// Σ_q (−1)^q Tr[X_q γ_q e^{−tΔ_q}].
    pub fn supertrace(&self, t: f64) -> f64 {
        let mut total = 0.0;
        for (q, pairs) in self.degrees.iter().enumerate() {
            let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * pairs.iter().map(|(l, w)| w * (-t * l.max(0.0)).exp()).sum::<f64>();
        }
        self.weight * total
    }
}

/// Σ_q (−1)^q Tr[X_q γ_q e^{−tΔ_q}] via eigendecomposition.
pub fn heat_supertrace(dc: &DiscreteComplex, x: &[Vec<f64>], t: f64) -> Result<f64> {
    Ok(heat_data(dc, x)?.supertrace(t))
}

/// t⁰ coefficient of the small-t expansion of the heat supertrace, fitted on
/// log-spaced t ∈ [t_min, t_max] by least squares with powers
/// t^{−n0/2+j} (j = 0, 1, 2), 1, and lattice terms h² t^{−n0/2−1}, h⁴ t^{−n0/2−2}.
pub fn lim_window(heat: &HeatData, n0: usize, mesh: f64, t_min: f64, t_max: f64, samples: usize) -> Result<f64> {
    use faer::linalg::solvers::SolveLstsq;
    let base = -(n0 as f64) / 2.0;
    let mut powers: Vec<(f64, f64)> = vec![(0.0, 1.0)];
    for (p, c) in
        [(base, 1.0), (base + 1.0, 1.0), (base + 2.0, 1.0), (base - 1.0, mesh * mesh), (base - 2.0, mesh.powi(4))]
    {
        if !powers.iter().any(|(q, _)| (q - p).abs() < 1e-12) {
            powers.push((p, c));
        }
    }
    let ts: Vec<f64> = (0..samples).map(|i| t_min * (t_max / t_min).powf(i as f64 / (samples - 1) as f64)).collect();
    let k = powers.len();
    if samples < 2 * k {
        return Err(Error::InvalidInput("too few samples for the window fit".into()));
    }
    // columns normalized to unit max on the window
    let norms: Vec<f64> =
        powers.iter().map(|&(p, c)| ts.iter().map(|t| (c * t.powf(p)).abs()).fold(0.0, f64::max).max(1e-300)).collect();
    let a = Mat::from_fn(samples, k, |i, j| powers[j].1 * ts[i].powf(powers[j].0) / norms[j]);
    let b = Mat::from_fn(samples, 1, |i, _| heat.supertrace(ts[i]));
    let x = a.qr().solve_lstsq(&b);
    Ok(x[(0, 0)] / norms[0])
}

/// Relative residual ‖Δ̇_fd − (−Xd*d + d*Xd − dXd* + dd*X)‖/‖Δ̇_fd‖ in degree q,
/// with Δ̇_fd a central difference between the two given family members.
pub fn laplacian_variation_residual(
    minus: &DiscreteComplex,
    mid: &DiscreteComplex,
    plus: &DiscreteComplex,
    x: &[Vec<f64>],
    step: f64,
    q: usize,
) -> f64 {
    let lp = plus.laplacian(q);
    let lm = minus.laplacian(q);
    let n = lp.nrows();
    let fd = Mat::from_fn(n, n, |i, j| (lp[(i, j)] - lm[(i, j)]) / (2.0 * step));
    let mut bracket = Mat::<f64>::zeros(n, n);
    let diag = |v: &[f64]| Mat::from_fn(v.len(), v.len(), |i, j| if i == j { v[i] } else { 0.0 });
    if q < mid.top() {
        let d = mid.d[q].to_dense();
        let ds = mid.adjoint(q);
        let xq = diag(&x[q]);
        let xq1 = diag(&x[q + 1]);
        bracket -= &xq * &ds * &d;
        bracket += &ds * &xq1 * &d;
    }
    if q > 0 {
        let d = mid.d[q - 1].to_dense();
        let ds = mid.adjoint(q - 1);
        let xq = diag(&x[q]);
        let xqm = diag(&x[q - 1]);
        bracket -= &d * &xqm * &ds;
        bracket += &d * &ds * &xq;
    }
    let diff = &fd - &bracket;
    diff.norm_l2() / fd.norm_l2().max(1e-300)
}
