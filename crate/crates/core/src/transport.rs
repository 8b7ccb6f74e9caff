//! Lichnerowicz endomorphisms E and Ẽ, the Casimir identity, the Hodge
//! variation element C, the σ-splitting and the highest-symbol transport ODEs.

use serde::{Deserialize, Serialize};

use crate::clifford::{
    fock_rep, key, reorder_parity, symbol_k, Cl, Clifford, CliffordElement, Exterior, FockOperator, Kind,
};
use crate::endf::{Coeff, EndF};
use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::{self, DetRng};
use crate::scalar::Scalar;

/// Tolerance for the symmetry checks on float input tensors.
const SYMMETRY_TOL: f64 = 1e-10;

/// Pointwise geometric data at one point, in an orthonormal frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointGeometry {
    pub n: usize,
    pub fiber_dim: usize,
    /// R_{ijkl} = (R(e_i,e_j)e_k, e_l), flattened as ((i·n + j)·n + k)·n + l.
    pub r: Vec<f64>,
    /// ω(e_i), one row-major fiber matrix per i.
    pub omega: Vec<Vec<f64>>,
    /// (∇_{e_i}ω)(e_j) at index i·n + j.
    pub domega: Vec<Vec<f64>>,
    pub scalar_curvature: f64,
    /// ((g^{-1}ġ) e_i, e_j), row-major n×n.
    pub gdot: Vec<f64>,
}

impl PointGeometry {
    pub fn zero(n: usize, fiber_dim: usize) -> Self {
        let m2 = fiber_dim * fiber_dim;
        PointGeometry {
            n,
            fiber_dim,
            r: vec![0.0; n.pow(4)],
            omega: vec![vec![0.0; m2]; n],
            domega: vec![vec![0.0; m2]; n * n],
            scalar_curvature: 0.0,
            gdot: vec![0.0; n * n],
        }
    }

    pub fn r_at(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n;
        self.r[((i * n + j) * n + k) * n + l]
    }

    /// Curvature symmetries, first Bianchi identity, symmetric ġ, shapes.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        let m2 = self.fiber_dim * self.fiber_dim;
        if self.r.len() != n.pow(4) {
            return Err(Error::DimensionMismatch(self.r.len(), n.pow(4)));
        }
        if self.omega.len() != n || self.domega.len() != n * n || self.gdot.len() != n * n {
            return Err(Error::InvalidInput("ω, ∇ω or ġ has the wrong number of entries".into()));
        }
        if self.omega.iter().chain(&self.domega).any(|m| m.len() != m2) {
            return Err(Error::InvalidInput("fiber matrix of the wrong size".into()));
        }
        let scale = self.r.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let tol = SYMMETRY_TOL * scale;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.r_at(i, j, k, l);
                        if (v + self.r_at(j, i, k, l)).abs() > tol
                            || (v + self.r_at(i, j, l, k)).abs() > tol
                            || (v - self.r_at(k, l, i, j)).abs() > tol
                        {
                            return Err(Error::InvalidInput(format!("curvature symmetry fails at {i}{j}{k}{l}")));
                        }
                        let b = v + self.r_at(j, k, i, l) + self.r_at(k, i, j, l);
                        if b.abs() > tol {
                            return Err(Error::InvalidInput(format!("Bianchi identity fails at {i}{j}{k}{l}")));
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if (self.gdot[i * n + j] - self.gdot[j * n + i]).abs() > SYMMETRY_TOL {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        Ok(())
    }

    /// Random valid geometry. The curvature is a sum of Gauss-type tensors
    /// S_ik S_jl − S_il S_jk, which satisfy every algebraic symmetry.
    pub fn random(rng: &mut DetRng, n: usize, fiber_dim: usize) -> Self {
        let mut g = Self::zero(n, fiber_dim);
        for _ in 0..2 {
            let s = rng::symmetric(rng, n, 1.0);
            let sign = if rng::uniform(rng, 0.0, 1.0) < 0.5 { -1.0 } else { 1.0 };
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            g.r[((i * n + j) * n + k) * n + l] += sign * (s[i][k] * s[j][l] - s[i][l] * s[j][k]);
                        }
                    }
                }
            }
        }
        let m2 = fiber_dim * fiber_dim;
        for w in g.omega.iter_mut().chain(g.domega.iter_mut()) {
            *w = (0..m2).map(|_| rng::uniform(rng, -1.0, 1.0)).collect();
        }
        g.scalar_curvature = rng::uniform(rng, -2.0, 2.0);
        let gd = rng::symmetric(rng, n, 1.0);
        g.gdot = gd.into_iter().flatten().collect();
        g
    }

    /// ω²(e_i,e_j) = ω(e_i)ω(e_j) − ω(e_j)ω(e_i).
    pub fn omega2(&self, i: usize, j: usize) -> Vec<f64> {
        let m = self.fiber_dim;
        let a = linalg::matmul(&self.omega[i], &self.omega[j], m);
        let b = linalg::matmul(&self.omega[j], &self.omega[i], m);
        a.iter().zip(&b).map(|(x, y)| x - y).collect()
    }

    /// (∇_{e_i}ω)(e_j) + ½ω²(e_i,e_j).
    pub fn odd_tensor(&self, i: usize, j: usize) -> Vec<f64> {
        let w2 = self.omega2(i, j);
        self.domega[i * self.n + j].iter().zip(&w2).map(|(d, w)| d + 0.5 * w).collect()
    }

    /// Geometry seen through the frame rotated by the orthogonal matrix `o`:
    /// every tensor index is contracted with `o` (T′_{i…} = Σ o_{ia}… T_{a…}).
    pub fn rotated(&self, o: &[f64]) -> PointGeometry {
        let n = self.n;
        let mut out = self.clone();
        let mut r = self.r.clone();
        for slot in 0..4 {
            let stride = n.pow(3 - slot as u32);
            let mut next = vec![0.0; r.len()];
            for (idx, v) in next.iter_mut().enumerate() {
                let digit = (idx / stride) % n;
                let base = idx - digit * stride;
                *v = (0..n).map(|a| o[digit * n + a] * r[base + a * stride]).sum();
            }
            r = next;
        }
        out.r = r;
        let m2 = self.fiber_dim * self.fiber_dim;
        for i in 0..n {
            out.omega[i] = (0..m2).map(|e| (0..n).map(|a| o[i * n + a] * self.omega[a][e]).sum()).collect();
            for j in 0..n {
                out.domega[i * n + j] = (0..m2)
                    .map(|e| {
                        let mut t = 0.0;
                        for a in 0..n {
                            for b in 0..n {
                                t += o[i * n + a] * o[j * n + b] * self.domega[a * n + b][e];
                            }
                        }
                        t
                    })
                    .collect();
            }
        }
        out
    }

    fn id(&self) -> EndF {
        EndF::scalar(self.fiber_dim, &Scalar::float(1.0))
    }

    fn mat(&self, rows: &[f64]) -> EndF {
        EndF::from_f64(self.fiber_dim, rows)
    }
}

/// Key and sign of a product of Clifford generators given as (index, hatted).
fn word(n: usize, gens: &[(usize, bool)]) -> (u32, bool) {
    let mut k = 0u32;
    let mut neg = false;
    for &(i, hat) in gens {
        let g = if hat { key(n, 0, 1 << i) } else { key(n, 1 << i, 0) };
        let (nk, s) = Cl::product(n, k, g).expect("Clifford products never vanish");
        k = nk;
        neg ^= s;
    }
    (k, neg)
}

fn push<C: Coeff>(out: &mut Clifford<C>, n: usize, gens: &[(usize, bool)], c: C) {
    let (k, neg) = word(n, gens);
    out.add_term(k, if neg { c.neg() } else { c });
}

/// −¼ Σ_{i,j} c_i c_j ĉ_i ĉ_j − ¼n², exactly.
pub fn casimir_clifford(n: usize) -> CliffordElement {
    let mut out = Clifford::scalar(n, Scalar::rational(-((n * n) as i64), 4));
    for i in 0..n {
        for j in 0..n {
            push(&mut out, n, &[(i, false), (j, false), (i, true), (j, true)], Scalar::rational(-1, 4));
        }
    }
    out
}

/// Σ_{i<j} (λE_ij)² with λE_ij = ε_i ι_j − ε_j ι_i acting on ΛV.
pub fn casimir_derivation(n: usize) -> FockOperator {
    let half = Scalar::rational(1, 2);
    let eps: Vec<FockOperator> =
        (0..n).map(|i| fock_rep(&(&Clifford::e(n, i) + &Clifford::ehat(n, i))).scale(&half)).collect();
    let iota: Vec<FockOperator> =
        (0..n).map(|i| fock_rep(&(&Clifford::ehat(n, i) - &Clifford::e(n, i))).scale(&half)).collect();
    let mut total = FockOperator::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let l = eps[i].matmul(&iota[j]).add(&eps[j].matmul(&iota[i]).scale(&Scalar::int(-1)));
            total = total.add(&l.matmul(&l));
        }
    }
    total
}

/// The Casimir operator computed from the derivation action and from the
/// Clifford formula.
pub fn casimir_two_ways(n: usize) -> (FockOperator, FockOperator) {
    (casimir_derivation(n), fock_rep(&casimir_clifford(n)))
}

/// The Lichnerowicz endomorphism E with `End F` coefficients.
pub fn lich_e(g: &PointGeometry) -> Result<Clifford<EndF>> {
    g.validate()?;
    let n = g.n;
    let id = g.id();
    let mut e = Clifford::<EndF>::zero(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let r = g.r_at(i, j, k, l);
                    if r != 0.0 {
                        let c = id.scale(&Scalar::float(-0.125 * r));
                        push(&mut e, n, &[(i, false), (j, false), (k, true), (l, true)], c);
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let w2 = g.mat(&g.omega2(i, j));
            push(&mut e, n, &[(i, false), (j, false)], w2.scale(&Scalar::float(-0.125)));
            push(&mut e, n, &[(i, true), (j, true)], w2.scale(&Scalar::float(0.125)));
        }
    }
    e = &e + &h_odd(g)?;
    let mut scalar = id.scale(&Scalar::float(0.25 * g.scalar_curvature));
    for w in &g.omega {
        let w = g.mat(w);
        scalar = scalar.add(&w.mul(&w).scale(&Scalar::float(0.25)));
    }
    e.add_term(0, scalar);
    Ok(e)
}

/// H_odd = −½ Σ_{i,j} c_i ĉ_j {(∇_{e_i}ω)(e_j) + ½ω²(e_i,e_j)}.
pub fn h_odd(g: &PointGeometry) -> Result<Clifford<EndF>> {
    let n = g.n;
    let mut out = Clifford::<EndF>::zero(n);
    for i in 0..n {
        for j in 0..n {
            let t = g.mat(&g.odd_tensor(i, j)).scale(&Scalar::float(-0.5));
            push(&mut out, n, &[(i, false), (j, true)], t);
        }
    }
    Ok(out)
}

/// Ẽ = E + (−¼ Σ c_i c_j ĉ_i ĉ_j − ¼n²).
pub fn lich_e_lifted(g: &PointGeometry) -> Result<Clifford<EndF>> {
    let cas = casimir_clifford(g.n).to_float().tensor(&g.id());
    Ok(&lich_e(g)? + &cas)
}

/// (Ẽ_ev, Ẽ_odd) with Ẽ_odd = H_odd.
pub fn split_even_odd(g: &PointGeometry) -> Result<(Clifford<EndF>, Clifford<EndF>)> {
    let full = lich_e_lifted(g)?;
    let odd = h_odd(g)?;
    Ok((&full - &odd, odd))
}

/// (σ₄Ẽ, σ₂Ẽ_odd).
pub fn sigma_symbols_e(g: &PointGeometry) -> Result<(Exterior<EndF>, Exterior<EndF>)> {
    let (ev, odd) = split_even_odd(g)?;
    Ok((symbol_k(&ev, 4)?, symbol_k(&odd, 2)?))
}

/// C = −½ Σ_{i,j} ġ_ij c_i ĉ_j for ġ = (g^{-1}ġ e_i, e_j).
pub fn hodge_c(gdot: &[Vec<Scalar>]) -> Result<CliffordElement> {
    let n = gdot.len();
    for (i, row) in gdot.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch(row.len(), n));
        }
        for j in 0..n {
            if (gdot[i][j].to_f64() - gdot[j][i].to_f64()).abs() > SYMMETRY_TOL {
                return Err(Error::NotSymmetric);
            }
        }
    }
    let mut out = Clifford::zero(n);
    for i in 0..n {
        for j in 0..n {
            let c = &gdot[i][j] * &Scalar::rational_like(-1, 2, &gdot[i][j]);
            push(&mut out, n, &[(i, false), (j, true)], c);
        }
    }
    Ok(out)
}

/// ⅛ Σ R_ijkl e_i∧e_j∧ê_k∧ê_l + ¼ Σ_{i,j} e_i∧e_j∧ê_i∧ê_j, the exponent of
/// the A = 0 transport solution.
pub fn transport_exponent(g: &PointGeometry) -> Exterior<EndF> {
    let n = g.n;
    let mut x = Exterior::<Scalar>::zero(n);
    let wedge4 = |i: usize, j: usize, k: usize, l: usize, c: f64| {
        let e = |a: usize| Exterior::monomial(n, 1 << a, 0, Scalar::float(1.0));
        let h = |a: usize| Exterior::monomial(n, 0, 1 << a, Scalar::float(1.0));
        (&(&(&e(i) * &e(j)) * &h(k)) * &h(l)).scale(&Scalar::float(c))
    };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let r = g.r_at(i, j, k, l);
                    if r != 0.0 {
                        x = &x + &wedge4(i, j, k, l, 0.125 * r);
                    }
                }
            }
            if i != j {
                x = &x + &wedge4(i, j, i, j, 0.25);
            }
        }
    }
    x.tensor(&g.id())
}

/// exp of the transport exponent: the sum of highest symbols at A = 0.
pub fn transport_closed_form(g: &PointGeometry) -> Result<Exterior<EndF>> {
    g.validate()?;
    crate::clifford::exterior_exp_nilpotent(&transport_exponent(g), &g.id())
}

/// ½ Σ_{i,j} e_i∧ê_j {(∇_{e_i}ω)(e_j) + ½ω²(e_i,e_j)}.
pub fn sigma_inhomogeneity(g: &PointGeometry) -> Exterior<EndF> {
    let n = g.n;
    let mut y = Exterior::<EndF>::zero(n);
    for i in 0..n {
        for j in 0..n {
            let t = g.mat(&g.odd_tensor(i, j)).scale(&Scalar::float(0.5));
            y.add_term(key(n, 1 << i, 1 << j), t);
        }
    }
    y
}

/// The σ-part of the highest symbols at A = 0.
pub fn transport_sigma_closed_form(g: &PointGeometry) -> Result<Exterior<EndF>> {
    Ok(&transport_closed_form(g)? * &sigma_inhomogeneity(g))
}

/// Solution of the transport system at s.
#[derive(Clone, Debug)]
pub struct TransportState {
    pub f: Exterior<EndF>,
    pub fsigma: Exterior<EndF>,
    pub s: f64,
}

/// Dense Λ(V⊕V) ⊗ End F: one fiber block per monomial key.
#[derive(Clone)]
struct Dense {
    m: usize,
    data: Vec<f64>,
}

impl Dense {
    fn zeros(n: usize, m: usize) -> Self {
        Dense { m, data: vec![0.0; (1usize << (2 * n)) * m * m] }
    }

    fn axpy(&self, a: f64, o: &Dense) -> Dense {
        Dense { m: self.m, data: self.data.iter().zip(&o.data).map(|(x, y)| x + a * y).collect() }
    }

    fn to_exterior(&self, n: usize) -> Exterior<EndF> {
        let m2 = self.m * self.m;
        Exterior::from_terms(
            n,
            self.data
                .chunks(m2)
                .enumerate()
                .filter(|(_, b)| b.iter().any(|v| *v != 0.0))
                .map(|(k, b)| (k as u32, EndF::from_f64(self.m, b))),
        )
    }
}

/// out += sign-correct Σ_terms c_k ∧ x, with fiber matrices multiplied on the left.
fn wedge_left(terms: &[(u32, Vec<f64>)], x: &Dense, out: &mut Dense, scale: f64) {
    let m = x.m;
    let m2 = m * m;
    let nkeys = x.data.len() / m2;
    for (k, c) in terms {
        for b in 0..nkeys as u32 {
            if k & b != 0 {
                continue;
            }
            let blk = &x.data[b as usize * m2..(b as usize + 1) * m2];
            if blk.iter().all(|v| *v == 0.0) {
                continue;
            }
            let s = if reorder_parity(*k, b) { -scale } else { scale };
            let dst = (k | b) as usize * m2;
            for i in 0..m {
                for l in 0..m {
                    let a = c[i * m + l];
                    if a == 0.0 {
                        continue;
                    }
                    for j in 0..m {
                        out.data[dst + i * m + j] += s * a * blk[l * m + j];
                    }
                }
            }
        }
    }
}

fn term_list(x: &Exterior<EndF>) -> Vec<(u32, Vec<f64>)> {
    x.terms().iter().map(|(k, c)| (*k, c.to_f64())).collect()
}

/// Integrates dF/ds = −σ₄Ẽ(s·tA)∧F and dF^σ/ds = −σ₄Ẽ(s·tA)∧F^σ − σ₂Ẽ(s·tA)∧F
/// from F(0) = 1⊗Id, F^σ(0) = 0 to s = 1 with `steps` classical RK4 steps.
/// The symbols at parameter s are those of the geometry rotated by exp(−s·tA);
/// `homotopy` is the deformation parameter t.
pub fn transport_ode_solve_homotopy(
    g: &PointGeometry,
    a: &[Vec<f64>],
    steps: usize,
    homotopy: f64,
) -> Result<TransportState> {
    g.validate()?;
    let n = g.n;
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(a.len(), n));
    }
    for i in 0..n {
        for j in 0..n {
            if (a[i][j] + a[j][i]).abs() > SYMMETRY_TOL {
                return Err(Error::NotAntisymmetric);
            }
        }
    }
    if steps == 0 {
        return Err(Error::InvalidInput("steps must be positive".into()));
    }
    let m = g.fiber_dim;
    let flat: Vec<f64> = a.iter().flatten().map(|v| -v * homotopy).collect();
    let symbols = |s: f64| -> Result<(Vec<(u32, Vec<f64>)>, Vec<(u32, Vec<f64>)>)> {
        let o = linalg::expm(&flat.iter().map(|v| v * s).collect::<Vec<_>>(), n);
        let (s4, s2) = sigma_symbols_e(&g.rotated(&o))?;
        Ok((term_list(&s4), term_list(&s2)))
    };
    let rhs = |sym: &(Vec<(u32, Vec<f64>)>, Vec<(u32, Vec<f64>)>), f: &Dense, fs: &Dense| {
        let mut df = Dense::zeros(n, m);
        wedge_left(&sym.0, f, &mut df, -1.0);
        let mut dfs = Dense::zeros(n, m);
        wedge_left(&sym.0, fs, &mut dfs, -1.0);
        wedge_left(&sym.1, f, &mut dfs, -1.0);
        (df, dfs)
    };
    let mut f = Dense::zeros(n, m);
    for i in 0..m {
        f.data[i * m + i] = 1.0;
    }
    let mut fs = Dense::zeros(n, m);
    let h = 1.0 / steps as f64;
    let mut sym0 = symbols(0.0)?;
    for step in 0..steps {
        let s = step as f64 * h;
        let sym_mid = symbols(s + 0.5 * h)?;
        let sym1 = symbols(s + h)?;
        let (k1f, k1s) = rhs(&sym0, &f, &fs);
        let (k2f, k2s) = rhs(&sym_mid, &f.axpy(0.5 * h, &k1f), &fs.axpy(0.5 * h, &k1s));
        let (k3f, k3s) = rhs(&sym_mid, &f.axpy(0.5 * h, &k2f), &fs.axpy(0.5 * h, &k2s));
        let (k4f, k4s) = rhs(&sym1, &f.axpy(h, &k3f), &fs.axpy(h, &k3s));
        f = f.axpy(h / 6.0, &k1f).axpy(h / 3.0, &k2f).axpy(h / 3.0, &k3f).axpy(h / 6.0, &k4f);
        fs = fs.axpy(h / 6.0, &k1s).axpy(h / 3.0, &k2s).axpy(h / 3.0, &k3s).axpy(h / 6.0, &k4s);
        sym0 = sym1;
    }
    Ok(TransportState { f: f.to_exterior(n), fsigma: fs.to_exterior(n), s: 1.0 })
}

/// [`transport_ode_solve_homotopy`] with t = 1.
pub fn transport_ode_solve(g: &PointGeometry, a: &[Vec<f64>], steps: usize) -> Result<TransportState> {
    transport_ode_solve_homotopy(g, a, steps, 1.0)
}

/// Largest coefficient distance between two `End F`-valued forms.
pub fn max_diff(a: &Exterior<EndF>, b: &Exterior<EndF>) -> f64 {
    a.max_abs_diff(b)
}

/// Step-halving ratio |F_h − F_{h/2}| / |F_{h/2} − F_{h/4}| over both
/// components, at the given base number of steps.
pub fn step_halving_ratio(g: &PointGeometry, a: &[Vec<f64>], steps: usize) -> Result<f64> {
    let s1 = transport_ode_solve(g, a, steps)?;
    let s2 = transport_ode_solve(g, a, 2 * steps)?;
    let s4 = transport_ode_solve(g, a, 4 * steps)?;
    let d12 = max_diff(&s1.f, &s2.f).max(max_diff(&s1.fsigma, &s2.fsigma));
    let d24 = max_diff(&s2.f, &s4.f).max(max_diff(&s2.fsigma, &s4.fsigma));
    Ok(d12 / d24)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{supertrace, symbol};

    fn zero_a(n: usize) -> Vec<Vec<f64>> {
        vec![vec![0.0; n]; n]
    }

    #[test]
    fn casimir_n2_matrix() {
        let (l, r) = casimir_two_ways(2);
        let expect = [0, -1, -1, 0];
        for s in 0..4 {
            for t in 0..4 {
                let v = if s == t { expect[s] } else { 0 };
                assert_eq!(l.get(s, t), &Scalar::int(v));
            }
        }
        assert_eq!(l, r);
    }

    #[test]
    fn casimir_agrees_up_to_four() {
        for n in 1..=4 {
            let (l, r) = casimir_two_ways(n);
            assert_eq!(l, r, "n = {n}");
        }
    }

    #[test]
    fn zero_geometry_gives_zero_e() {
        let g = PointGeometry::zero(3, 1);
        assert!(lich_e(&g).unwrap().is_zero());
        let lifted = lich_e_lifted(&g).unwrap();
        assert_eq!(lifted, casimir_clifford(3).to_float().tensor(&EndF::from_f64(1, &[1.0])));
    }

    #[test]
    fn scalar_curvature_term() {
        let mut g = PointGeometry::zero(2, 1);
        g.scalar_curvature = 3.0;
        let e = lich_e(&g).unwrap();
        assert_eq!(e, Clifford::scalar(2, EndF::from_f64(1, &[0.75])));
    }

    #[test]
    fn rank_one_flat_omega() {
        let mut g = PointGeometry::zero(3, 1);
        let a = [0.5, -1.0, 2.0];
        for i in 0..3 {
            g.omega[i] = vec![a[i]];
        }
        let e = lich_e(&g).unwrap();
        let expect: f64 = a.iter().map(|x| 0.25 * x * x).sum();
        assert_eq!(e, Clifford::scalar(3, EndF::from_f64(1, &[expect])));
    }

    #[test]
    fn lifted_difference_is_casimir_operator() {
        let g = PointGeometry::random(&mut rng::seeded(4), 3, 1);
        let diff = &lich_e_lifted(&g).unwrap() - &lich_e(&g).unwrap();
        let scalar_diff = Clifford::from_terms(3, diff.terms().iter().map(|(k, c)| (*k, c.get(0, 0).clone())));
        let fock = fock_rep(&scalar_diff);
        assert!(fock.max_abs_diff(&casimir_derivation(3)) < 1e-14);
    }

    #[test]
    fn filtration_degrees() {
        let g = PointGeometry::random(&mut rng::seeded(8), 4, 2);
        assert!(lich_e_lifted(&g).unwrap().filtration_degree() <= 4);
        let (ev, odd) = split_even_odd(&g).unwrap();
        assert_eq!(odd.filtration_degree(), 2);
        assert_eq!(&ev + &odd, lich_e_lifted(&g).unwrap());
    }

    #[test]
    fn symbols_of_zero_geometry() {
        let g = PointGeometry::zero(2, 1);
        let (s4, s2) = sigma_symbols_e(&g).unwrap();
        let expect = transport_exponent(&g).scale(&Scalar::float(-1.0));
        assert!(s4.max_abs_diff(&expect) == 0.0);
        assert!(s2.is_zero());
    }

    #[test]
    fn sigma2_rank_one() {
        let mut g = PointGeometry::zero(2, 1);
        g.domega = vec![vec![1.0], vec![-2.0], vec![0.5], vec![3.0]];
        let (_, s2) = sigma_symbols_e(&g).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let c = s2.coeff(key(2, 1 << i, 1 << j)).unwrap().get(0, 0).to_f64();
                assert_eq!(c, -0.5 * g.domega[i * 2 + j][0]);
            }
        }
    }

    #[test]
    fn hodge_c_examples() {
        let z = vec![vec![Scalar::zero(); 3]; 3];
        assert!(hodge_c(&z).unwrap().is_zero());
        let eps = Scalar::rational(1, 5);
        let mut d = z.clone();
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = &Scalar::int(2) * &eps;
        }
        let c = hodge_c(&d).unwrap();
        let mut expect = Clifford::zero(3);
        for i in 0..3 {
            expect = &expect + &(&Clifford::e(3, i) * &Clifford::ehat(3, i)).scale(&(-&eps));
        }
        assert_eq!(c, expect);
        assert!(supertrace(&c).is_zero());
        let s2 = symbol(&c);
        assert_eq!(s2.filtration_degree(), 2);
        let mut bad = z;
        bad[0][1] = Scalar::int(1);
        assert_eq!(hodge_c(&bad).unwrap_err(), Error::NotSymmetric);
    }

    #[test]
    fn invalid_curvature_rejected() {
        let mut g = PointGeometry::zero(2, 1);
        g.r[1] = 1.0;
        assert!(lich_e(&g).is_err());
    }

    #[test]
    fn closed_form_truncates() {
        let g = PointGeometry::random(&mut rng::seeded(1), 2, 1);
        let f = transport_closed_form(&g).unwrap();
        assert!(f.filtration_degree() <= 4);
        let flat = transport_closed_form(&PointGeometry::zero(2, 1)).unwrap();
        // exp(¼Σ e∧e∧ê∧ê) = 1 + ½ e1 e2 ê1 ê2 for n = 2
        let c = flat.coeff(key(2, 3, 3)).unwrap().get(0, 0).to_f64();
        assert_eq!(c, 0.5);
    }

    #[test]
    fn ode_matches_closed_forms_at_zero_rotation() {
        let mut r = rng::seeded(11);
        for n in [2, 4] {
            let g = PointGeometry::random(&mut r, n, 2);
            let st = transport_ode_solve(&g, &zero_a(n), 64).unwrap();
            assert!(max_diff(&st.f, &transport_closed_form(&g).unwrap()) < 1e-10);
            assert!(max_diff(&st.fsigma, &transport_sigma_closed_form(&g).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn flat_geometry_is_rotation_independent() {
        let g = PointGeometry::zero(3, 1);
        let a = rng::antisymmetric(&mut rng::seeded(2), 3, 1.0);
        let st = transport_ode_solve(&g, &a, 32).unwrap();
        assert!(max_diff(&st.f, &transport_closed_form(&g).unwrap()) < 1e-12);
    }

    #[test]
    fn homotopy_converges_to_constant_coefficients() {
        let g = PointGeometry::random(&mut rng::seeded(5), 3, 1);
        let a = rng::antisymmetric(&mut rng::seeded(6), 3, 1.0);
        let closed = transport_closed_form(&g).unwrap();
        let d1 = max_diff(&transport_ode_solve_homotopy(&g, &a, 64, 0.1).unwrap().f, &closed);
        let d2 = max_diff(&transport_ode_solve_homotopy(&g, &a, 64, 0.01).unwrap().f, &closed);
        assert!(d1 > 1e-6, "{d1}");
        assert!(d2 < 0.2 * d1, "{d1} {d2}");
    }

    #[test]
    fn fourth_order_convergence() {
        let g = PointGeometry::random(&mut rng::seeded(9), 2, 2);
        let a = rng::antisymmetric(&mut rng::seeded(10), 2, 1.5);
        let ratio = step_halving_ratio(&g, &a, 8).unwrap();
        assert!((12.0..=20.0).contains(&ratio), "{ratio}");
    }
}
