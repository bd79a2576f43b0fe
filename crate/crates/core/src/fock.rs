//! Truncated matrix realizations of oscillator operators in the orthonormal
//! number basis `|n⟩ = (a†)ⁿ/√(n!) |0⟩`, `n = 0..N-1`.
//!
//! Products of truncated matrices are wrong in the bottom-right corner: the
//! truncated `a†` cannot raise `|N-1⟩`, so `(a a†)[N-1, N-1]` comes out as
//! `0` instead of `N`. Every power built here is therefore formed at an
//! enlarged dimension and cropped, which makes each returned entry an exact
//! band entry of the infinite operator.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Dense complex matrix type used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// What a [`TruncatedOperator`] realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    Annihilation,
    Creation,
    Position,
    Momentum,
    Metric,
    Number,
    Composite,
}

/// Which set of generators the matrix is written in.
///
/// The tilde generators `b = ã` and `b̄ = -ã†` obey `[b, b̄] = 1`, so their
/// matrices coincide with the standard `a`, `a†`. Only the adjoint map
/// differs between the two sectors (see [`crate::ladder`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Sector {
    #[default]
    Standard,
    Tilde,
}

/// Normalization of the number basis. Only the orthonormal convention is
/// implemented; the holomorphic `(a†)ⁿ/n! |0⟩` basis differs by the positive
/// factors `√(n!)/n!`, which leave spectra and norm signs unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BasisConvention {
    #[default]
    Orthonormal,
}

impl BasisConvention {
    pub fn note(self) -> &'static str {
        match self {
            BasisConvention::Orthonormal => {
                "orthonormal basis (a†)^n/sqrt(n!)|0>; the holomorphic (a†)^n/n!|0> basis \
                 rescales state norms by positive factors only"
            }
        }
    }
}

/// A dense `N×N` complex matrix together with what it represents.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    pub kind: OperatorKind,
    pub sector: Sector,
    pub entries: CMatrix,
}

impl TruncatedOperator {
    fn new(kind: OperatorKind, entries: CMatrix) -> Self {
        debug_assert!(entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        TruncatedOperator {
            kind,
            sector: Sector::Standard,
            entries,
        }
    }

    pub fn with_sector(mut self, sector: Sector) -> Self {
        self.sector = sector;
        self
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn convention(&self) -> BasisConvention {
        BasisConvention::Orthonormal
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidDimension(n))
    } else {
        Ok(())
    }
}

fn annihilation(n: usize) -> CMatrix {
    let mut a = CMatrix::zeros(n, n);
    for j in 1..n {
        a[(j - 1, j)] = Complex64::new((j as f64).sqrt(), 0.0);
    }
    a
}

/// Annihilation and creation matrices `(a, a†)` with `a[n-1, n] = √n`.
pub fn ladder_matrices(n: usize) -> Result<(TruncatedOperator, TruncatedOperator)> {
    check_dim(n)?;
    let a = annihilation(n);
    let ad = a.adjoint();
    Ok((
        TruncatedOperator::new(OperatorKind::Annihilation, a),
        TruncatedOperator::new(OperatorKind::Creation, ad),
    ))
}

fn position(n: usize) -> CMatrix {
    let mut x = CMatrix::zeros(n, n);
    for j in 1..n {
        let v = Complex64::new((j as f64 / 2.0).sqrt(), 0.0);
        x[(j - 1, j)] = v;
        x[(j, j - 1)] = v;
    }
    x
}

fn momentum(n: usize) -> CMatrix {
    let mut p = CMatrix::zeros(n, n);
    for j in 1..n {
        let v = (j as f64 / 2.0).sqrt();
        p[(j - 1, j)] = Complex64::new(0.0, -v);
        p[(j, j - 1)] = Complex64::new(0.0, v);
    }
    p
}

/// Position and momentum `x = (a + a†)/√2`, `p = -i(a - a†)/√2`.
pub fn canonical_matrices(n: usize) -> Result<(TruncatedOperator, TruncatedOperator)> {
    check_dim(n)?;
    Ok((
        TruncatedOperator::new(OperatorKind::Position, position(n)),
        TruncatedOperator::new(OperatorKind::Momentum, momentum(n)),
    ))
}

/// Indefinite metric `η = diag((-1)ⁿ)`.
pub fn metric_matrix(n: usize) -> Result<TruncatedOperator> {
    check_dim(n)?;
    let diag = nalgebra::DVector::from_fn(n, |j, _| Complex64::new(parity_sign(j), 0.0));
    Ok(TruncatedOperator::new(
        OperatorKind::Metric,
        CMatrix::from_diagonal(&diag),
    ))
}

/// Number operator. In the standard sector this is `a†a`; in the tilde
/// sector it is `Ñ = -ã†ã = b̄ b`, which has the same matrix.
pub fn number_matrix(n: usize, sector: Sector) -> Result<TruncatedOperator> {
    check_dim(n)?;
    let diag = nalgebra::DVector::from_fn(n, |j, _| Complex64::new(j as f64, 0.0));
    Ok(TruncatedOperator::new(OperatorKind::Number, CMatrix::from_diagonal(&diag)).with_sector(sector))
}

/// Top-left `N×N` block of the infinite matrix of `baseᵏ`, for
/// `base ∈ {Position, Momentum}`.
///
/// `(a ± a†)ᵏ` is formed exactly at dimension `N + k` in the unnormalized
/// basis `|n) = (a†)ⁿ|0⟩`, where both generators have integer entries, and
/// cropped. Each surviving entry `C` becomes `C·√(m!/n!/2ᵏ)` in the
/// orthonormal basis with a single rounding.
pub fn exact_power(base: OperatorKind, k: u32, n: usize) -> Result<TruncatedOperator> {
    check_dim(n)?;
    if k == 0 {
        return Err(Error::Unsupported("operator power must be at least 1".into()));
    }
    // x = (a + a†)/√2, p = −i(a − a†)/√2
    let (creation_sign, phase) = match base {
        OperatorKind::Position => (1, ONE),
        OperatorKind::Momentum => (-1, i_pow(3 * k)),
        other => return Err(Error::UnsupportedBase(other)),
    };
    let big = n + k as usize;
    let columns = integer_power(creation_sign, k, big, n)?;
    let two_k = BigRational::from_integer(BigInt::from(2).pow(k));
    let mut out = CMatrix::zeros(n, n);
    for (col, column) in columns.iter().enumerate() {
        for (row, &c) in column.iter().enumerate().take(n) {
            if c == 0 {
                continue;
            }
            let ratio = factorial_ratio(row, col) / &two_k;
            let magnitude = scaled_root(&BigRational::from_integer(BigInt::from(c)), &ratio);
            out[(row, col)] = phase * magnitude;
        }
    }
    let kind = if k == 1 { base } else { OperatorKind::Composite };
    Ok(TruncatedOperator::new(kind, out))
}

/// Columns `0..cols` of `(a + s·a†)ᵏ` in the unnormalized basis, truncated
/// to `dim` states. `a|m) = m|m−1)`, `a†|m) = |m+1)`.
fn integer_power(s: i128, k: u32, dim: usize, cols: usize) -> Result<Vec<Vec<i128>>> {
    let overflow = || Error::Unsupported(format!("x^{k} at dimension {dim} overflows exact integers"));
    let mut out = Vec::with_capacity(cols);
    for col in 0..cols {
        let mut v = vec![0i128; dim];
        v[col] = 1;
        for _ in 0..k {
            let mut next = vec![0i128; dim];
            for m in 0..dim {
                if v[m] == 0 {
                    continue;
                }
                if m > 0 {
                    let t = v[m].checked_mul(m as i128).ok_or_else(overflow)?;
                    next[m - 1] = next[m - 1].checked_add(t).ok_or_else(overflow)?;
                }
                if m + 1 < dim {
                    next[m + 1] = next[m + 1].checked_add(s * v[m]).ok_or_else(overflow)?;
                }
            }
            v = next;
        }
        out.push(v);
    }
    Ok(out)
}

/// `m!/n!` as an exact rational.
pub(crate) fn factorial_ratio(m: usize, n: usize) -> BigRational {
    let (hi, lo) = if m >= n { (m, n) } else { (n, m) };
    let prod = ((lo + 1)..=hi).fold(BigInt::from(1), |acc, j| acc * BigInt::from(j));
    if m >= n {
        BigRational::from_integer(prod)
    } else {
        BigRational::new(BigInt::from(1), prod)
    }
}

/// `c·√r` for exact rationals `c` and `r ≥ 0`, rounded once through
/// `sign(c)·√(c²r)`.
pub(crate) fn scaled_root(c: &BigRational, r: &BigRational) -> f64 {
    if c.is_zero() || r.is_zero() {
        return 0.0;
    }
    let mag = (c * c * r).to_f64().unwrap_or(f64::INFINITY).sqrt();
    if c.is_negative() {
        -mag
    } else {
        mag
    }
}

/// `(-1)ⁿ` as a float.
pub fn parity_sign(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `iᵏ`, computed by case analysis on `k mod 4`.
pub fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

/// Largest entrywise modulus of a matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
