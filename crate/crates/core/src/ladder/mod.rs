//! Exact normal-ordered polynomials in one pair of ladder generators.
//!
//! A monomial `c^m a^n` stands for `(a†)^m a^n` in the standard sector and for
//! `b̄^m b^n` in the tilde sector, where `b = ã` and `b̄ = −ã†`. Both pairs
//! satisfy `[annihilator, creator] = 1`, so the rewriting engine is shared;
//! the sectors differ only in [`LadderPolynomial::adjoint`].

mod scalar;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;

pub use scalar::{GaussianRational, Scalar};

use crate::error::{Error, Result};
use crate::fock::{self, CMatrix, Sector};

/// `(creation power, annihilation power)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub creation: u32,
    pub annihilation: u32,
}

impl Monomial {
    pub fn new(creation: u32, annihilation: u32) -> Self {
        Monomial {
            creation,
            annihilation,
        }
    }

    pub fn degree(self) -> u32 {
        self.creation + self.annihilation
    }

    /// `creation − annihilation`: how far the monomial raises a number state.
    pub fn net_degree(self) -> i64 {
        self.creation as i64 - self.annihilation as i64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LadderPolynomial {
    terms: BTreeMap<Monomial, Scalar>,
    sector: Sector,
}

impl LadderPolynomial {
    pub fn zero(sector: Sector) -> Self {
        LadderPolynomial {
            terms: BTreeMap::new(),
            sector,
        }
    }

    pub fn constant(value: Scalar, sector: Sector) -> Self {
        Self::monomial(0, 0, value, sector)
    }

    pub fn one(sector: Sector) -> Self {
        Self::constant(Scalar::one(), sector)
    }

    pub fn monomial(creation: u32, annihilation: u32, coeff: Scalar, sector: Sector) -> Self {
        let mut p = Self::zero(sector);
        p.add_term(Monomial::new(creation, annihilation), coeff);
        p
    }

    /// `a†` (standard) or `b̄ = −ã†` (tilde).
    pub fn creation(sector: Sector) -> Self {
        Self::monomial(1, 0, Scalar::one(), sector)
    }

    /// `a` (standard) or `b = ã` (tilde).
    pub fn annihilation(sector: Sector) -> Self {
        Self::monomial(0, 1, Scalar::one(), sector)
    }

    /// Number operator `a†a`, or `Ñ = −ã†ã = b̄b` in the tilde sector.
    pub fn number(sector: Sector) -> Self {
        Self::monomial(1, 1, Scalar::one(), sector)
    }

    /// `x = (a + a†)/√2`, or `x̃ = (b + b̄)/√2`.
    pub fn position(sector: Sector) -> Self {
        let mut p = Self::zero(sector);
        p.add_term(Monomial::new(0, 1), Scalar::inv_sqrt2());
        p.add_term(Monomial::new(1, 0), Scalar::inv_sqrt2());
        p
    }

    /// `p = −i(a − a†)/√2`, or `p̃ = −i(b − b̄)/√2`.
    pub fn momentum(sector: Sector) -> Self {
        let c = &Scalar::i() * &Scalar::inv_sqrt2();
        let mut p = Self::zero(sector);
        p.add_term(Monomial::new(0, 1), -&c);
        p.add_term(Monomial::new(1, 0), c);
        p
    }

    /// Coupling term of the oscillator per unit `ω` and `g`: `−iᵏ xᵏ`
    /// (for `k = 3` this is `i x³`, or `i x̃³` in the tilde sector).
    pub fn interaction(k: u32, sector: Sector) -> Self {
        let ik = Scalar::i().pow(k);
        Self::position(sector).pow(k).scale(&-ik)
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical `(creation, annihilation)` order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, creation: u32, annihilation: u32) -> Scalar {
        self.terms
            .get(&Monomial::new(creation, annihilation))
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&m) {
            Some(old) => &old + &coeff,
            None => coeff,
        };
        if !sum.is_zero() {
            self.terms.insert(m, sum);
        }
    }

    fn check_sector(&self, other: &Self) -> Result<()> {
        if self.sector == other.sector {
            Ok(())
        } else {
            Err(Error::SectorMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_sector(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&Scalar::integer(-1))
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        let mut out = Self::zero(self.sector);
        for (m, c) in &self.terms {
            out.add_term(*m, c * s);
        }
        out
    }

    /// Normal-ordered product `self · other`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_sector(other)?;
        let mut cache = ReorderCache::default();
        let mut out = Self::zero(self.sector);
        for (l, lc) in &self.terms {
            for (r, rc) in &other.terms {
                let coeff = lc * rc;
                // c^l.c [a^l.a c^r.c] a^r.a
                for (m, k) in cache.reorder(l.annihilation, r.creation).iter() {
                    let mono = Monomial::new(
                        l.creation + m.creation,
                        m.annihilation + r.annihilation,
                    );
                    out.add_term(mono, coeff.scale_int(*k));
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.sector);
        for _ in 0..k {
            acc = acc.multiply(self).expect("same sector");
        }
        acc
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.multiply(other)?.sub(&other.multiply(self)?)
    }

    /// Hermitian adjoint with respect to the ordinary (positive) pairing of
    /// the underlying operators.
    ///
    /// Standard sector: `(z·c^m a^n)† = z̄·c^n a^m`. Tilde sector: the adjoint
    /// of `b = ã` is `ã† = −b̄` and that of `b̄` is `−b`, which adds a factor
    /// `(−1)^(m+n)`. Either way the result is already normal ordered.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.sector);
        for (m, c) in &self.terms {
            let mut coeff = c.conj();
            if self.sector == Sector::Tilde && m.degree() % 2 == 1 {
                coeff = -coeff;
            }
            out.add_term(Monomial::new(m.annihilation, m.creation), coeff);
        }
        out
    }

    /// Splits the polynomial by net degree `d = creation − annihilation`.
    pub fn interaction_picture(&self) -> FrequencyDecomposition {
        let mut groups: BTreeMap<i64, LadderPolynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            groups
                .entry(m.net_degree())
                .or_insert_with(|| Self::zero(self.sector))
                .add_term(*m, c.clone());
        }
        FrequencyDecomposition {
            components: groups
                .into_iter()
                .rev()
                .map(|(net_degree, poly)| FrequencyComponent { net_degree, poly })
                .collect(),
        }
    }

    /// `N×N` matrix in the number basis.
    ///
    /// The generators are substituted as exact integer matrices on the
    /// unnormalized basis `|n) = c^n|0⟩` (`a|n) = n|n−1)`, `c|n) = |n+1)`) at
    /// dimension `N + degree`, composed, and cropped. Each entry
    /// `S = Σ coeff·(integer)` stays exact until the final change to the
    /// orthonormal basis, `⟨m|P|n⟩ = S·√(m!/n!)`, which rounds once.
    pub fn to_matrix(&self, n: usize) -> Result<CMatrix> {
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let big = n + self.degree() as usize;
        let mut exact: BTreeMap<(usize, usize), Scalar> = BTreeMap::new();
        for (m, c) in &self.terms {
            for col in 0..n {
                let Some((row, weight)) = apply_word(*m, col, big) else {
                    continue;
                };
                if row >= n {
                    continue;
                }
                let add = c * &Scalar::from(BigRational::from_integer(weight));
                let slot = exact.entry((row, col)).or_insert_with(Scalar::zero);
                *slot = &*slot + &add;
            }
        }
        let mut out = CMatrix::zeros(n, n);
        for ((row, col), s) in exact {
            if !s.is_zero() {
                out[(row, col)] = s.times_sqrt(&fock::factorial_ratio(row, col));
            }
        }
        Ok(out)
    }

    /// If every monomial is of the form `c^j a^j`, the coefficients
    /// `[κ₀, κ₁, …]` with `self = Σ κᵢ Nⁱ` for the number operator `N`
    /// (`Ñ` in the tilde sector).
    pub fn as_number_polynomial(&self) -> Option<Vec<Scalar>> {
        if self.terms.keys().any(|m| m.creation != m.annihilation) {
            return None;
        }
        let top = self.terms.keys().map(|m| m.creation).max().unwrap_or(0) as usize;
        let mut coeffs = vec![Scalar::zero(); top + 1];
        for (m, c) in &self.terms {
            // c^j a^j = N(N−1)…(N−j+1)
            let falling = falling_factorial(m.creation);
            for (i, f) in falling.iter().enumerate() {
                coeffs[i] = &coeffs[i] + &(c * &Scalar::from(f.clone()));
            }
        }
        while coeffs.len() > 1 && coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        Some(coeffs)
    }

    /// Float copy of the coefficients, keyed by monomial.
    pub fn numeric_terms(&self) -> Vec<(Monomial, Complex64)> {
        self.terms
            .iter()
            .map(|(m, c)| (*m, c.to_complex64()))
            .collect()
    }
}

/// Image of the unnormalized state `|col)` under `c^C a^A`, truncated to
/// `dim` states: `Some((row, weight))` or `None` when the word kills it.
fn apply_word(m: Monomial, col: usize, dim: usize) -> Option<(usize, BigInt)> {
    let mut state = col;
    let mut weight = BigInt::from(1);
    for _ in 0..m.annihilation {
        if state == 0 {
            return None;
        }
        weight *= BigInt::from(state);
        state -= 1;
    }
    for _ in 0..m.creation {
        if state + 1 >= dim {
            return None;
        }
        state += 1;
    }
    Some((state, weight))
}

/// Coefficients of `x(x−1)…(x−j+1)` in ascending powers of `x`.
fn falling_factorial(j: u32) -> Vec<BigRational> {
    let mut poly = vec![BigRational::from_integer(BigInt::from(1))];
    for i in 0..j {
        let shift = BigRational::from_integer(BigInt::from(i));
        let mut next = vec![BigRational::from_integer(BigInt::from(0)); poly.len() + 1];
        for (d, c) in poly.iter().enumerate() {
            next[d + 1] += c.clone();
            next[d] -= c * &shift;
        }
        poly = next;
    }
    poly
}

/// Memoized normal ordering of `a^p c^q`, built from the exchange rule
/// `a·cⁿ = cⁿ·a + n·cⁿ⁻¹`.
#[derive(Default)]
struct ReorderCache {
    memo: HashMap<(u32, u32), Vec<(Monomial, i64)>>,
}

impl ReorderCache {
    fn reorder(&mut self, p: u32, q: u32) -> Vec<(Monomial, i64)> {
        if p == 0 || q == 0 {
            return vec![(Monomial::new(q, p), 1)];
        }
        if let Some(hit) = self.memo.get(&(p, q)) {
            return hit.clone();
        }
        // a^p c^q = (a^(p−1) c^q)·a + q·a^(p−1) c^(q−1)
        let mut acc: BTreeMap<Monomial, i64> = BTreeMap::new();
        for (m, k) in self.reorder(p - 1, q) {
            *acc.entry(Monomial::new(m.creation, m.annihilation + 1)).or_default() += k;
        }
        for (m, k) in self.reorder(p - 1, q - 1) {
            *acc.entry(m).or_default() += q as i64 * k;
        }
        let out: Vec<_> = acc.into_iter().filter(|(_, k)| *k != 0).collect();
        self.memo.insert((p, q), out.clone());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyComponent {
    /// `d = creation − annihilation`, shared by every monomial of `poly`.
    pub net_degree: i64,
    pub poly: LadderPolynomial,
}

impl FrequencyComponent {
    /// Angular frequency of the factor `e^{i d Ω t}` picked up under free
    /// evolution with level spacing `Ω`.
    pub fn frequency(&self, level_spacing: f64) -> f64 {
        self.net_degree as f64 * level_spacing
    }

    /// Value of the time factor `e^{i d Ω t}`.
    pub fn time_factor(&self, level_spacing: f64, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.frequency(level_spacing) * t)
    }
}

/// Interaction-picture decomposition of an operator, ordered by descending
/// net degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyDecomposition {
    pub components: Vec<FrequencyComponent>,
}

impl FrequencyDecomposition {
    pub fn net_degrees(&self) -> Vec<i64> {
        self.components.iter().map(|c| c.net_degree).collect()
    }

    pub fn component(&self, d: i64) -> Option<&LadderPolynomial> {
        self.components
            .iter()
            .find(|c| c.net_degree == d)
            .map(|c| &c.poly)
    }

    /// Level spacing of `H₀ = ω(p² + x²) = ω(2N + 1)`.
    pub fn level_spacing(omega: f64) -> f64 {
        2.0 * omega
    }
}

fn superscript(n: u32) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    if n == 1 {
        return String::new();
    }
    n.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap() as usize])
        .collect()
}

fn render_monomial(m: &Monomial) -> String {
    let mut s = String::new();
    if m.creation > 0 {
        s.push('c');
        s.push_str(&superscript(m.creation));
    }
    if m.annihilation > 0 {
        s.push('a');
        s.push_str(&superscript(m.annihilation));
    }
    s
}

/// Renders with `c` for the creation generator and `a` for the annihilation
/// generator, highest `(creation, annihilation)` first: `3·c²a + 3·c`.
impl fmt::Display for LadderPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let text = c.to_string();
            let unsigned = text.strip_prefix('-').unwrap_or(&text);
            let single = !unsigned.contains(" + ") && !unsigned.contains(" - ");
            let (neg, mag) = match text.strip_prefix('-') {
                Some(rest) if single => (true, rest.to_string()),
                _ => (false, text.clone()),
            };
            let mag = if single { mag } else { format!("({mag})") };
            let mono = render_monomial(m);
            let body = match (mono.is_empty(), mag.as_str()) {
                (true, _) => mag.clone(),
                (false, "1") => mono,
                (false, _) => format!("{mag}·{mono}"),
            };
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
