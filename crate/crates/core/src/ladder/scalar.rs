//! Exact scalars `u + v√2` with `u, v` Gaussian rationals.
//!
//! Every coefficient produced by expanding powers of `(a + a†)/√2` and
//! `−i(a − a†)/√2` lives in this field.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type GaussianRational = Complex<BigRational>;

/// `re + im·i + (sqrt2_re + sqrt2_im·i)·√2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    rational: GaussianRational,
    sqrt2: GaussianRational,
}

fn gzero() -> GaussianRational {
    Complex::new(BigRational::zero(), BigRational::zero())
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Scalar {
    pub fn new(rational: GaussianRational, sqrt2: GaussianRational) -> Self {
        Scalar { rational, sqrt2 }
    }

    pub fn zero() -> Self {
        Scalar::new(gzero(), gzero())
    }

    pub fn one() -> Self {
        Scalar::integer(1)
    }

    pub fn integer(n: i64) -> Self {
        Scalar::new(Complex::new(rat(n), BigRational::zero()), gzero())
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        let r = BigRational::new(BigInt::from(num), BigInt::from(den));
        Scalar::new(Complex::new(r, BigRational::zero()), gzero())
    }

    pub fn i() -> Self {
        Scalar::new(Complex::new(BigRational::zero(), BigRational::one()), gzero())
    }

    pub fn sqrt2() -> Self {
        Scalar::new(gzero(), Complex::new(BigRational::one(), BigRational::zero()))
    }

    /// `1/√2 = √2/2`.
    pub fn inv_sqrt2() -> Self {
        Scalar::new(gzero(), Complex::new(rat(1) / rat(2), BigRational::zero()))
    }

    pub fn rational_part(&self) -> &GaussianRational {
        &self.rational
    }

    pub fn sqrt2_part(&self) -> &GaussianRational {
        &self.sqrt2
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.sqrt2.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.rational.im.is_zero() && self.sqrt2.im.is_zero()
    }

    pub fn is_imaginary(&self) -> bool {
        self.rational.re.is_zero() && self.sqrt2.re.is_zero()
    }

    /// Complex conjugate (fixes `√2`).
    pub fn conj(&self) -> Self {
        Scalar::new(self.rational.conj(), self.sqrt2.conj())
    }

    pub fn scale_int(&self, n: i64) -> Self {
        let f = rat(n);
        Scalar::new(self.rational.scale(f.clone()), self.sqrt2.scale(f))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Scalar::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Multiplicative inverse, or `None` for zero. The norm `u² − 2v²`
    /// vanishes only at zero because `√2 ∉ ℚ(i)`.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let u = &self.rational;
        let v = &self.sqrt2;
        let norm = u * u - (v * v).scale(rat(2));
        let inv = Complex::new(BigRational::one(), BigRational::zero()) / norm;
        Some(Scalar::new(u * &inv, -(v * &inv)))
    }

    pub fn to_complex64(&self) -> Complex64 {
        let f = |r: &BigRational| r.to_f64().unwrap_or(f64::NAN);
        let s = std::f64::consts::SQRT_2;
        Complex64::new(
            f(&self.rational.re) + s * f(&self.sqrt2.re),
            f(&self.rational.im) + s * f(&self.sqrt2.im),
        )
    }

    /// `self·√r` for a non-negative rational `r`, with each real component
    /// `u√r + v√(2r)` rounded from exact values.
    pub fn times_sqrt(&self, r: &BigRational) -> Complex64 {
        let two_r = r * rat(2);
        let part = |u: &BigRational, v: &BigRational| {
            crate::fock::scaled_root(u, r) + crate::fock::scaled_root(v, &two_r)
        };
        Complex64::new(
            part(&self.rational.re, &self.sqrt2.re),
            part(&self.rational.im, &self.sqrt2.im),
        )
    }

    /// Real rational value, if the scalar is one.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.sqrt2.is_zero() && self.rational.im.is_zero() {
            Some(self.rational.re.clone())
        } else {
            None
        }
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::integer(n)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::new(Complex::new(r, BigRational::zero()), gzero())
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        Scalar::new(&self.rational + &rhs.rational, &self.sqrt2 + &rhs.sqrt2)
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        Scalar::new(&self.rational - &rhs.rational, &self.sqrt2 - &rhs.sqrt2)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        // (u + v√2)(s + t√2) = us + 2vt + (ut + vs)√2
        let rational = &self.rational * &rhs.rational + (&self.sqrt2 * &rhs.sqrt2).scale(rat(2));
        let sqrt2 = &self.rational * &rhs.sqrt2 + &self.sqrt2 * &rhs.rational;
        Scalar::new(rational, sqrt2)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::new(-self.rational.clone(), -self.sqrt2.clone())
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar { (&self).$m(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Renders `r·unit` as a signed term, e.g. `- 3/4√2·i`.
fn push_term(parts: &mut Vec<(bool, String)>, r: &BigRational, unit: &str) {
    if r.is_zero() {
        return;
    }
    let mag = fmt_rational(&r.abs());
    let body = match (mag.as_str(), unit) {
        ("1", "") => "1".to_string(),
        ("1", u) => u.to_string(),
        (m, "") => m.to_string(),
        (m, u) => format!("{m}{u}"),
    };
    parts.push((r.is_negative(), body));
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        push_term(&mut parts, &self.rational.re, "");
        push_term(&mut parts, &self.sqrt2.re, "√2");
        push_term(&mut parts, &self.rational.im, "i");
        push_term(&mut parts, &self.sqrt2.im, "√2·i");
        if parts.is_empty() {
            return write!(f, "0");
        }
        for (idx, (neg, body)) in parts.iter().enumerate() {
            match (idx, neg) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_squares_to_two() {
        assert_eq!(&Scalar::sqrt2() * &Scalar::sqrt2(), Scalar::integer(2));
        assert_eq!(&Scalar::inv_sqrt2() * &Scalar::sqrt2(), Scalar::one());
        assert_eq!(Scalar::inv_sqrt2().pow(2), Scalar::ratio(1, 2));
    }

    #[test]
    fn i_squares_to_minus_one() {
        assert_eq!(Scalar::i().pow(2), Scalar::integer(-1));
        assert_eq!(Scalar::i().conj(), -Scalar::i());
    }

    #[test]
    fn inverse_round_trip() {
        let z = &(&Scalar::ratio(3, 4) + &(&Scalar::sqrt2() * &Scalar::i())) + &Scalar::integer(-2);
        let inv = z.inverse().unwrap();
        assert_eq!(&z * &inv, Scalar::one());
        assert!(Scalar::zero().inverse().is_none());
    }

    #[test]
    fn float_conversion() {
        let z = &Scalar::ratio(1, 2) + &(&Scalar::sqrt2() * &Scalar::i());
        let c = z.to_complex64();
        assert!((c.re - 0.5).abs() < 1e-16);
        assert!((c.im - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn display() {
        assert_eq!(Scalar::zero().to_string(), "0");
        assert_eq!(Scalar::integer(3).to_string(), "3");
        assert_eq!(Scalar::inv_sqrt2().to_string(), "1/2√2");
        let z = &Scalar::integer(-1) - &Scalar::i().scale_int(3);
        assert_eq!(z.to_string(), "-1 - 3i");
    }
}
