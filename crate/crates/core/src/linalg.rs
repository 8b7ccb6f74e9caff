//! Dense double-precision helpers on row-major slices, plus thin wrappers
//! over faer for symmetric eigendecompositions and Cholesky factors.

use faer::Mat;

pub fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

fn inf_norm(a: &[f64], n: usize) -> f64 {
    (0..n).map(|i| a[i * n..(i + 1) * n].iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-20 Taylor
/// polynomial; adequate for the small, well-scaled generators used here.
pub fn expm(a: &[f64], n: usize) -> Vec<f64> {
    let norm = inf_norm(a, n);
    let mut s = 0;
    while norm / f64::powi(2.0, s) > 0.25 {
        s += 1;
    }
    let scale = f64::powi(2.0, -s);
    let x: Vec<f64> = a.iter().map(|v| v * scale).collect();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        out[i * n + i] = 1.0;
    }
    let mut term = out.clone();
    for k in 1..=20 {
        term = matmul(&term, &x, n);
        let inv = 1.0 / k as f64;
        term.iter_mut().for_each(|v| *v *= inv);
        out.iter_mut().zip(&term).for_each(|(o, t)| *o += t);
    }
    for _ in 0..s {
        out = matmul(&out, &out, n);
    }
    out
}

/// Symmetric eigendecomposition: ascending eigenvalues and column
/// eigenvectors (orthonormal).
pub fn eigh(a: &Mat<f64>) -> (Vec<f64>, Mat<f64>) {
    let e = a.self_adjoint_eigen(faer::Side::Lower).expect("symmetric eigendecomposition failed");
    let s = e.S();
    let vals: Vec<f64> = (0..a.nrows()).map(|i| s[i]).collect();
    (vals, e.U().to_owned())
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn eigvalsh(a: &Mat<f64>) -> Vec<f64> {
    let mut v = a.self_adjoint_eigenvalues(faer::Side::Lower).expect("symmetric eigenvalues failed");
    v.sort_by(f64::total_cmp);
    v
}

/// log det of a symmetric positive-definite matrix via Cholesky.
pub fn logdet_spd(a: &Mat<f64>) -> Option<f64> {
    if a.nrows() == 0 {
        return Some(0.0);
    }
    let l = a.llt(faer::Side::Lower).ok()?;
    let lm = l.L();
    Some((0..a.nrows()).map(|i| 2.0 * lm[(i, i)].ln()).sum())
}

/// Solves `a x = b` for symmetric positive-definite `a`.
pub fn solve_spd(a: &Mat<f64>, b: &Mat<f64>) -> Option<Mat<f64>> {
    use faer::linalg::solvers::Solve;
    let l = a.llt(faer::Side::Lower).ok()?;
    Some(l.solve(b))
}

/// log|det| via partial-pivot LU (row-major input).
pub fn logabsdet(a: &[f64], n: usize) -> f64 {
    let mut m = a.to_vec();
    let mut total = 0.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i * n + c].abs().total_cmp(&m[j * n + c].abs())).unwrap();
        let piv = m[p * n + c];
        if piv == 0.0 {
            return f64::NEG_INFINITY;
        }
        if p != c {
            for j in 0..n {
                m.swap(p * n + j, c * n + j);
            }
        }
        total += piv.abs().ln();
        for r in (c + 1)..n {
            let f = m[r * n + c] / piv;
            if f != 0.0 {
                for j in c..n {
                    m[r * n + j] -= f * m[c * n + j];
                }
            }
        }
    }
    total
}

/// Inverse by Gauss–Jordan with partial pivoting (row-major, small sizes).
pub fn inverse(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i * n + c].abs().total_cmp(&m[j * n + c].abs()))?;
        let piv = m[p * n + c];
        if piv.abs() < 1e-300 {
            return None;
        }
        for j in 0..n {
            m.swap(p * n + j, c * n + j);
            inv.swap(p * n + j, c * n + j);
        }
        let f = 1.0 / piv;
        for j in 0..n {
            m[c * n + j] *= f;
            inv[c * n + j] *= f;
        }
        for r in 0..n {
            if r != c {
                let g = m[r * n + c];
                if g != 0.0 {
                    for j in 0..n {
                        m[r * n + j] -= g * m[c * n + j];
                        inv[r * n + j] -= g * inv[c * n + j];
                    }
                }
            }
        }
    }
    Some(inv)
}

pub fn trace(a: &[f64], n: usize) -> f64 {
    (0..n).map(|i| a[i * n + i]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_rotation() {
        let t = 0.7f64;
        let e = expm(&[0.0, -t, t, 0.0], 2);
        assert!((e[0] - t.cos()).abs() < 1e-14);
        assert!((e[2] - t.sin()).abs() < 1e-14);
    }

    #[test]
    fn logdet_matches_lu() {
        let a = Mat::<f64>::from_fn(3, 3, |i, j| if i == j { 4.0 } else { 1.0 });
        let rows: Vec<f64> = (0..9).map(|k| a[(k / 3, k % 3)]).collect();
        assert!((logdet_spd(&a).unwrap() - logabsdet(&rows, 3)).abs() < 1e-12);
    }
}
