//! Seeded random generation for reproducible property checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clifford::{Clifford, CliffordElement};
use crate::scalar::Scalar;

pub type DetRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> DetRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small nonzero-or-zero rational p/q with |p| ≤ 5, q ∈ 1..=4.
pub fn small_rational(rng: &mut DetRng) -> Scalar {
    let p: i64 = rng.gen_range(-5..=5);
    let q: i64 = rng.gen_range(1..=4);
    Scalar::rational(p, q)
}

/// Random exact Clifford element with about `density` of the 4^n monomials
/// populated by small rationals.
pub fn random_clifford(rng: &mut DetRng, n: usize, density: f64) -> CliffordElement {
    let mut out = Clifford::zero(n);
    for k in 0..(1u32 << (2 * n)) {
        if rng.gen_bool(density) {
            out.add_term(k, small_rational(rng));
        }
    }
    out
}

/// Uniform float in [lo, hi).
pub fn uniform(rng: &mut DetRng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

/// Random antisymmetric matrix with entries in [−s, s].
pub fn antisymmetric(rng: &mut DetRng, n: usize, s: f64) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.gen_range(-s..s);
            a[i][j] = v;
            a[j][i] = -v;
        }
    }
    a
}

/// Random symmetric matrix with entries in [−s, s].
pub fn symmetric(rng: &mut DetRng, n: usize, s: f64) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-s..s);
            a[i][j] = v;
            a[j][i] = v;
        }
    }
    a
}
