//! Coefficient trait for multivectors and the fiber algebra `End F`.

use std::fmt;

use crate::scalar::Scalar;

/// Ring operations needed from a multivector coefficient. Products need not
/// commute; the order of factors is always preserved.
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn scale(&self, s: &Scalar) -> Self;
    /// Trace to a scalar (identity for scalars).
    fn trace(&self) -> Scalar;
    /// The multiplicative identity of the same shape and variant.
    fn one_like(&self) -> Self;
    /// Largest absolute entry, evaluated numerically.
    fn max_abs(&self) -> f64;
}

impl Coeff for Scalar {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn scale(&self, s: &Scalar) -> Self {
        self * s
    }
    fn trace(&self) -> Scalar {
        self.clone()
    }
    fn one_like(&self) -> Self {
        Scalar::int_like(1, self)
    }
    fn max_abs(&self) -> f64 {
        self.to_f64().abs()
    }
}

/// Square matrix over `Scalar`, row-major. Real fiber endomorphisms.
#[derive(Clone, PartialEq)]
pub struct EndF {
    pub dim: usize,
    pub data: Vec<Scalar>,
}

impl EndF {
    pub fn zeros(dim: usize) -> Self {
        EndF { dim, data: vec![Scalar::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, &Scalar::one())
    }

    pub fn scalar(dim: usize, s: &Scalar) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = s.clone();
        }
        m
    }

    pub fn from_f64(dim: usize, rows: &[f64]) -> Self {
        assert_eq!(rows.len(), dim * dim, "EndF::from_f64 needs dim² entries");
        EndF { dim, data: rows.iter().map(|&x| Scalar::float(x)).collect() }
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "EndF rows must be square");
            data.extend(r);
        }
        EndF { dim, data }
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.dim + j]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(Scalar::to_f64).collect()
    }

    /// `a b − b a`.
    pub fn commutator(&self, o: &Self) -> Self {
        Coeff::add(&Coeff::mul(self, o), &Coeff::neg(&Coeff::mul(o, self)))
    }
}

impl Coeff for EndF {
    fn add(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim, "fiber dimension mismatch");
        EndF { dim: self.dim, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
    }
    fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim, "fiber dimension mismatch");
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = &self.data[i * d + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let b = &o.data[k * d + j];
                    if !b.is_zero() {
                        out.data[i * d + j] += &(a * b);
                    }
                }
            }
        }
        out
    }
    fn neg(&self) -> Self {
        EndF { dim: self.dim, data: self.data.iter().map(|a| -a).collect() }
    }
    fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }
    fn scale(&self, s: &Scalar) -> Self {
        EndF { dim: self.dim, data: self.data.iter().map(|a| a * s).collect() }
    }
    fn trace(&self) -> Scalar {
        let mut t = Scalar::zero();
        for i in 0..self.dim {
            t += &self.data[i * self.dim + i];
        }
        t
    }
    fn one_like(&self) -> Self {
        let like = self.data.iter().find(|s| !s.is_zero()).cloned().unwrap_or_else(Scalar::one);
        Self::scalar(self.dim, &Scalar::int_like(1, &like))
    }
    fn max_abs(&self) -> f64 {
        self.data.iter().map(|s| s.to_f64().abs()).fold(0.0, f64::max)
    }
}

impl fmt::Debug for EndF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.dim {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.dim {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_product_and_trace() {
        let a = EndF::from_rows(vec![vec![1.into(), 2.into()], vec![3.into(), 4.into()]]);
        let b = EndF::identity(2);
        assert_eq!(a.mul(&b), a);
        assert_eq!(a.trace(), Scalar::int(5));
        let c = a.commutator(&EndF::from_rows(vec![vec![0.into(), 1.into()], vec![0.into(), 0.into()]]));
        assert_eq!(c.trace(), Scalar::zero());
    }
}
