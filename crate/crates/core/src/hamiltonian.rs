//! The PT-invariant oscillator `H̄ₖ = ω(p² + x² − g(ix)ᵏ)` and its
//! wrong-sign partner `Hₖ = −ω(p² + x² + gxᵏ)`, quantized with indefinite
//! metric.
//!
//! Written in the tilde operators `x̃ = −ix`, `p̃ = ip`, the wrong-sign
//! Hamiltonian reads `ω(p̃² + x̃² − g(ix̃)ᵏ)`. Expanding `x̃`, `p̃` in the tilde
//! generators `b = ã`, `b̄ = −ã†` gives the same word in `(b, b̄)` as `H̄ₖ`
//! is in `(a, a†)`, so both builders end up with identical matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{self, CMatrix, OperatorKind, Sector};
use crate::ladder::{LadderPolynomial, Scalar};

/// Which of the two Hamiltonians a spec describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SpecSector {
    #[default]
    Pt,
    WrongSignTilde,
}

/// Oscillator parameters `(ω, g, k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorSpec {
    pub omega: f64,
    pub g: f64,
    pub k: u32,
    pub sector: SpecSector,
}

impl OscillatorSpec {
    pub fn new(omega: f64, g: f64, k: u32) -> Result<Self> {
        let spec = OscillatorSpec {
            omega,
            g,
            k,
            sector: SpecSector::Pt,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Cubic oscillator with unit frequency.
    pub fn cubic(g: f64) -> Self {
        OscillatorSpec {
            omega: 1.0,
            g,
            k: 3,
            sector: SpecSector::Pt,
        }
    }

    pub fn with_g(self, g: f64) -> Self {
        OscillatorSpec { g, ..self }
    }

    pub fn with_sector(self, sector: SpecSector) -> Self {
        OscillatorSpec { sector, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "omega must be positive and finite, got {}",
                self.omega
            )));
        }
        if !self.g.is_finite() {
            return Err(Error::InvalidSpec(format!("g must be finite, got {}", self.g)));
        }
        if self.k == 0 {
            return Err(Error::InvalidSpec("k must be at least 1".into()));
        }
        Ok(())
    }

    pub fn is_odd(&self) -> bool {
        self.k % 2 == 1
    }

    /// Unperturbed level `ω(2n + 1)`.
    pub fn free_energy(&self, n: usize) -> f64 {
        self.omega * (2 * n + 1) as f64
    }
}

/// A built Hamiltonian at dimension `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    pub spec: OscillatorSpec,
    pub entries: CMatrix,
    pub pseudo_hermitian_defect: f64,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Ordinary Hermiticity defect `max|M† − M|`.
    pub fn hermitian_defect(&self) -> f64 {
        fock::max_abs(&(self.entries.adjoint() - &self.entries))
    }
}

/// `ω(p² + x² − g·iᵏ·xᵏ)` in the standard basis.
pub fn build_pt_hamiltonian(spec: &OscillatorSpec, n: usize) -> Result<HamiltonianMatrix> {
    spec.validate()?;
    let p2 = fock::exact_power(OperatorKind::Momentum, 2, n)?.entries;
    let x2 = fock::exact_power(OperatorKind::Position, 2, n)?.entries;
    let mut m = p2 + x2;
    if spec.g != 0.0 {
        let xk = fock::exact_power(OperatorKind::Position, spec.k, n)?.entries;
        m -= xk * (fock::i_pow(spec.k) * Complex64::new(spec.g, 0.0));
    }
    m *= Complex64::new(spec.omega, 0.0);
    finish(spec.with_sector(SpecSector::Pt), m)
}

/// `ω(p̃² + x̃² − g(ix̃)ᵏ)` expressed through `b = ã`, `b̄ = −ã†`.
///
/// `x̃ = (b + b̄)/√2` and `p̃ = −i(b − b̄)/√2` are expanded symbolically in the
/// tilde sector and realized by the ladder matrices.
pub fn build_wrong_sign_hamiltonian(spec: &OscillatorSpec, n: usize) -> Result<HamiltonianMatrix> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let x = LadderPolynomial::position(Sector::Tilde);
    let p = LadderPolynomial::momentum(Sector::Tilde);
    let free = p.multiply(&p)?.add(&x.multiply(&x)?)?;
    let mut m = free.to_matrix(n)?;
    if spec.g != 0.0 {
        let coupling = x.scale(&Scalar::i()).pow(spec.k);
        m -= coupling.to_matrix(n)? * Complex64::new(spec.g, 0.0);
    }
    m *= Complex64::new(spec.omega, 0.0);
    finish(spec.with_sector(SpecSector::WrongSignTilde), m)
}

fn finish(spec: OscillatorSpec, entries: CMatrix) -> Result<HamiltonianMatrix> {
    let n = entries.nrows();
    let mut h = HamiltonianMatrix {
        spec,
        entries,
        pseudo_hermitian_defect: 0.0,
    };
    h.pseudo_hermitian_defect = pseudo_hermiticity_defect_with(&h.entries, &fock::metric_matrix(n)?.entries)?;
    Ok(h)
}

/// `max|M† − ηMη|` with the metric of matching dimension.
pub fn pseudo_hermiticity_defect(m: &HamiltonianMatrix) -> f64 {
    m.pseudo_hermitian_defect
}

/// `max|M† − ηMη|` for an explicit metric.
pub fn pseudo_hermiticity_defect_with(m: &CMatrix, eta: &CMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if eta.nrows() != m.nrows() || eta.ncols() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: eta.nrows(),
        });
    }
    Ok(fock::max_abs(&(m.adjoint() - eta * m * eta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{I, ZERO};

    fn spec(omega: f64, g: f64, k: u32) -> OscillatorSpec {
        OscillatorSpec::new(omega, g, k).unwrap()
    }

    #[test]
    fn harmonic_diagonal() {
        let h = build_pt_hamiltonian(&spec(1.0, 0.0, 3), 3).unwrap();
        for (n, e) in [1.0, 3.0, 5.0].iter().enumerate() {
            assert!((h.entries[(n, n)].re - e).abs() < 1e-14);
        }
        assert!(h.entries[(0, 2)].norm() < 1e-14);
    }

    #[test]
    fn linear_coupling_entries() {
        let h = build_pt_hamiltonian(&spec(1.0, 1.0, 1), 2).unwrap();
        let expected = Complex64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2);
        assert!((h.entries[(0, 1)] - expected).norm() < 1e-14);
        assert!((h.entries[(1, 0)] - expected).norm() < 1e-14);
    }

    #[test]
    fn cubic_corner_entry() {
        let h = build_pt_hamiltonian(&spec(1.0, 1.0, 3), 4).unwrap();
        let expected = I * (3f64.sqrt() / 2.0);
        assert!((h.entries[(3, 0)] - expected).norm() < 1e-14);
    }

    #[test]
    fn correspondence_examples() {
        for (omega, g, k, n) in [(1.0, 0.5, 3, 16), (2.0, 0.1, 4, 8), (1.3, -0.7, 5, 20)] {
            let s = spec(omega, g, k);
            let pt = build_pt_hamiltonian(&s, n).unwrap();
            let ws = build_wrong_sign_hamiltonian(&s, n).unwrap();
            assert!(fock::max_abs(&(&pt.entries - &ws.entries)) < 1e-14);
            assert_eq!(ws.spec.sector, SpecSector::WrongSignTilde);
        }
    }

    #[test]
    fn wrong_sign_harmonic() {
        let h = build_wrong_sign_hamiltonian(&spec(2.5, 0.0, 1), 3).unwrap();
        for n in 0..3 {
            assert!((h.entries[(n, n)].re - 2.5 * (2 * n + 1) as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn defects() {
        let h = build_pt_hamiltonian(&spec(1.0, 1.0, 3), 32).unwrap();
        assert!(pseudo_hermiticity_defect(&h) < 1e-12);
        assert!(h.hermitian_defect() > 0.1);

        let free = build_pt_hamiltonian(&spec(1.0, 0.0, 3), 16).unwrap();
        assert_eq!(pseudo_hermiticity_defect(&free), 0.0);

        let quartic = build_pt_hamiltonian(&spec(1.0, 0.3, 2), 16).unwrap();
        assert!(pseudo_hermiticity_defect(&quartic) < 1e-12);
        assert!(quartic.hermitian_defect() < 1e-12);
    }

    #[test]
    fn defect_dimension_mismatch() {
        let h = build_pt_hamiltonian(&spec(1.0, 1.0, 3), 5).unwrap();
        let eta = fock::metric_matrix(4).unwrap().entries;
        assert_eq!(
            pseudo_hermiticity_defect_with(&h.entries, &eta).unwrap_err(),
            Error::DimensionMismatch { expected: 5, found: 4 }
        );
    }

    #[test]
    fn invalid_specs() {
        assert!(OscillatorSpec::new(0.0, 1.0, 3).is_err());
        assert!(OscillatorSpec::new(-1.0, 1.0, 3).is_err());
        assert!(OscillatorSpec::new(1.0, f64::NAN, 3).is_err());
        assert!(OscillatorSpec::new(1.0, 1.0, 0).is_err());
        assert!(build_pt_hamiltonian(&OscillatorSpec::cubic(1.0), 0).is_err());
        assert!(build_wrong_sign_hamiltonian(&OscillatorSpec::cubic(1.0), 0).is_err());
    }

    #[test]
    fn odd_k_breaks_hermiticity_by_bound() {
        // smallest nonzero x³ entry within N=6 is 3/(2√2) ≈ 1.06
        let g = 0.4;
        let h = build_pt_hamiltonian(&spec(1.5, g, 3), 6).unwrap();
        let x3 = fock::exact_power(OperatorKind::Position, 3, 6).unwrap().entries;
        let smallest = x3
            .iter()
            .map(|z| z.norm())
            .filter(|&v| v > 1e-12)
            .fold(f64::INFINITY, f64::min);
        assert!(h.hermitian_defect() >= 2.0 * g * 1.5 * smallest - 1e-12);
        assert_ne!(h.entries[(1, 0)], ZERO);
    }
}
