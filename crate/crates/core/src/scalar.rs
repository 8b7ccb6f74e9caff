//! Coefficient ring: rationals graded by half-integer powers of π, with an
//! explicit floating-point fallback.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `Exact` maps `m` to the rational coefficient of `π^{m/2}`; zero
/// coefficients are never stored. `Float` is a plain double.
#[derive(Clone, PartialEq)]
pub enum Scalar {
    Exact(BTreeMap<i32, BigRational>),
    Float(f64),
}

fn mixed() -> ! {
    panic!("exact and float scalars cannot be combined; convert with to_float() first")
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(BTreeMap::new())
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn int(v: i64) -> Self {
        Self::rational(v, 1)
    }

    pub fn rational(p: i64, q: i64) -> Self {
        Self::from_big(BigRational::new(BigInt::from(p), BigInt::from(q)), 0)
    }

    pub fn from_big(r: BigRational, m: i32) -> Self {
        let mut map = BTreeMap::new();
        if !r.is_zero() {
            map.insert(m, r);
        }
        Scalar::Exact(map)
    }

    /// `π^{m/2}` exactly.
    pub fn pi_half_pow(m: i32) -> Self {
        Self::from_big(BigRational::one(), m)
    }

    pub fn float(x: f64) -> Self {
        Scalar::Float(x)
    }

    /// An integer in the same variant as `like`.
    pub fn int_like(v: i64, like: &Scalar) -> Self {
        match like {
            Scalar::Exact(_) => Self::int(v),
            Scalar::Float(_) => Scalar::Float(v as f64),
        }
    }

    pub fn rational_like(p: i64, q: i64, like: &Scalar) -> Self {
        match like {
            Scalar::Exact(_) => Self::rational(p, q),
            Scalar::Float(_) => Scalar::Float(p as f64 / q as f64),
        }
    }

    /// `π^{m/2}` in the same variant as `like`.
    pub fn pi_half_pow_like(m: i32, like: &Scalar) -> Self {
        match like {
            Scalar::Exact(_) => Self::pi_half_pow(m),
            Scalar::Float(_) => Scalar::Float(std::f64::consts::PI.powf(m as f64 / 2.0)),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(m) => m.is_empty(),
            Scalar::Float(x) => *x == 0.0,
        }
    }

    /// Numerical value; exact scalars are evaluated in double precision.
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Float(x) => *x,
            Scalar::Exact(m) => {
                m.iter().map(|(k, r)| r.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI.powf(*k as f64 / 2.0)).sum()
            }
        }
    }

    pub fn to_float(&self) -> Scalar {
        Scalar::Float(self.to_f64())
    }

    /// Rational coefficient of `π^{m/2}` (exact variant only).
    pub fn coeff(&self, m: i32) -> Option<BigRational> {
        match self {
            Scalar::Exact(map) => Some(map.get(&m).cloned().unwrap_or_else(BigRational::zero)),
            Scalar::Float(_) => None,
        }
    }

    /// Multiplicative inverse of a single-term exact scalar or a nonzero float.
    pub fn inv(&self) -> Option<Scalar> {
        match self {
            Scalar::Float(x) if *x != 0.0 => Some(Scalar::Float(1.0 / x)),
            Scalar::Float(_) => None,
            Scalar::Exact(map) if map.len() == 1 => {
                let (m, r) = map.iter().next().unwrap();
                Some(Self::from_big(r.recip(), -m))
            }
            Scalar::Exact(_) => None,
        }
    }

    pub fn abs_diff(&self, other: &Scalar) -> f64 {
        (self.to_f64() - other.to_f64()).abs()
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

// The exact zero acts as additive identity and multiplicative annihilator for
// both variants so that sums can start from `Scalar::zero()`; every other
// mixed operation panics.
impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Float(a), Scalar::Float(b)) => Scalar::Float(a + b),
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                let mut out = a.clone();
                for (k, v) in b {
                    let e = out.entry(*k).or_insert_with(BigRational::zero);
                    *e += v;
                    if e.is_zero() {
                        out.remove(k);
                    }
                }
                Scalar::Exact(out)
            }
            (Scalar::Exact(a), f @ Scalar::Float(_)) if a.is_empty() => f.clone(),
            (f @ Scalar::Float(_), Scalar::Exact(b)) if b.is_empty() => f.clone(),
            _ => mixed(),
        }
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Float(a), Scalar::Float(b)) => Scalar::Float(a * b),
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                let mut out: BTreeMap<i32, BigRational> = BTreeMap::new();
                for (ka, va) in a {
                    for (kb, vb) in b {
                        let e = out.entry(ka + kb).or_insert_with(BigRational::zero);
                        *e += va * vb;
                    }
                }
                out.retain(|_, v| !v.is_zero());
                Scalar::Exact(out)
            }
            (Scalar::Exact(a), Scalar::Float(_)) | (Scalar::Float(_), Scalar::Exact(a)) if a.is_empty() => {
                Scalar::zero()
            }
            _ => mixed(),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Float(a) => Scalar::Float(-a),
            Scalar::Exact(a) => Scalar::Exact(a.iter().map(|(k, v)| (*k, -v)).collect()),
        }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        &self + &rhs
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        &self - &rhs
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        *self = &*self + rhs;
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::int(v)
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Float(x) => write!(f, "{x}"),
            Scalar::Exact(map) if map.is_empty() => write!(f, "0"),
            Scalar::Exact(map) => {
                let mut first = true;
                for (m, r) in map {
                    let neg = r.is_negative();
                    let body = fmt_rational(&r.abs());
                    if first {
                        if neg {
                            write!(f, "-")?;
                        }
                    } else {
                        write!(f, " {} ", if neg { "-" } else { "+" })?;
                    }
                    first = false;
                    if *m == 0 {
                        write!(f, "{body}")?;
                    } else {
                        write!(f, "{body}·π^{{{m}/2}}")?;
                    }
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// "p/q" or an integer parses exactly; anything else as a float.
impl std::str::FromStr for Scalar {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Ok(r) = t.parse::<BigRational>() {
            return Ok(Self::from_big(r, 0));
        }
        t.parse::<f64>()
            .map(Scalar::float)
            .map_err(|_| crate::error::Error::InvalidInput(format!("not a number: {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_exact_and_float() {
        assert_eq!("-3/6".parse::<Scalar>().unwrap(), Scalar::rational(-1, 2));
        assert_eq!("7".parse::<Scalar>().unwrap(), Scalar::int(7));
        assert_eq!("0.25".parse::<Scalar>().unwrap(), Scalar::float(0.25));
        assert!("x".parse::<Scalar>().is_err());
    }

    #[test]
    fn pi_grading_multiplies() {
        let a = Scalar::pi_half_pow(1);
        let b = Scalar::pi_half_pow(3);
        assert_eq!(&a * &b, Scalar::pi_half_pow(4));
    }

    #[test]
    fn cancellation_removes_entries() {
        let a = Scalar::rational(1, 3);
        let z = &a - &a;
        assert!(z.is_zero());
        assert_eq!(z, Scalar::zero());
    }

    #[test]
    fn display_format() {
        let s = &Scalar::rational(-3, 4) * &Scalar::pi_half_pow(2);
        assert_eq!(s.to_string(), "-3/4·π^{2/2}");
        assert_eq!(Scalar::int(5).to_string(), "5");
    }

    #[test]
    fn inverse_of_monomial() {
        let s = &Scalar::rational(2, 5) * &Scalar::pi_half_pow(-3);
        let inv = s.inv().unwrap();
        assert_eq!(&s * &inv, Scalar::one());
        assert!((&Scalar::one() + &Scalar::pi_half_pow(1)).inv().is_none());
    }

    #[test]
    fn float_evaluation() {
        let s = &Scalar::int(4) * &Scalar::pi_half_pow(2);
        assert!((s.to_f64() - 4.0 * std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    #[should_panic]
    fn mixing_panics() {
        let _ = &Scalar::int(1) * &Scalar::float(1.0);
    }

    #[test]
    fn exact_zero_is_neutral_for_floats() {
        assert_eq!(&Scalar::zero() + &Scalar::float(2.0), Scalar::float(2.0));
    }
}
