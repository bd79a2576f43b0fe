//! Perturbation series around the harmonic levels.
//!
//! The recursion runs in the unnormalized basis `|m) = (a†)ᵐ|0⟩`, where
//! `W = (a + a†)ᵏ` has integer entries and `H = ω[(2N + 1) + gλW]` with
//! `λ = −iᵏ/2^{k/2}`. With intermediate normalization the order-`j`
//! coefficients `φ⁽ʲ⁾` of `(gλ)ʲ` satisfy
//!
//! ```text
//! eⱼ      = [Wφ⁽ʲ⁻¹⁾]ₙ
//! φ⁽ʲ⁾ₘ  = ([Wφ⁽ʲ⁻¹⁾]ₘ − Σᵢ eᵢ φ⁽ʲ⁻ⁱ⁾ₘ) / (2n − 2m)      m ≠ n
//! ```
//!
//! so every `eⱼ` and `φ⁽ʲ⁾ₘ` is rational.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fock::{self, factorial_ratio, OperatorKind};
use crate::hamiltonian::OscillatorSpec;
use crate::ladder::Scalar;

pub const MAX_ORDER: usize = 6;
pub const MAX_NORM_ORDER: usize = 4;
pub const MAX_LEVEL: usize = 10;

type Sparse = BTreeMap<usize, BigRational>;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `(a + a†)ψ` in the unnormalized basis.
fn apply_sum(v: &Sparse) -> Sparse {
    let mut out = Sparse::new();
    for (&m, c) in v {
        if m > 0 {
            *out.entry(m - 1).or_insert_with(BigRational::zero) += c * rat(m as i64);
        }
        *out.entry(m + 1).or_insert_with(BigRational::zero) += c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn apply_w(v: &Sparse, k: u32) -> Sparse {
    (0..k).fold(v.clone(), |acc, _| apply_sum(&acc))
}

/// `λ = −iᵏ/2^{k/2}`.
fn coupling_unit(k: u32) -> Scalar {
    let ik = Scalar::i().pow(k);
    -(&ik * &Scalar::inv_sqrt2().pow(k))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSeries {
    pub spec: OscillatorSpec,
    pub level: usize,
    pub order: usize,
    /// `E⁽⁰⁾..E⁽ᵖ⁾`, coefficients of `gʲ`.
    pub energy_exact: Vec<BigRational>,
    pub energy_coeffs: Vec<f64>,
    /// Per order, nonzero coefficients on orthonormal basis states, with the
    /// `|n⟩` component `1` at order 0 and `0` above.
    pub state_coeffs: Vec<BTreeMap<usize, Complex64>>,
    raw_states: Vec<Sparse>,
    unit: Scalar,
}

impl PerturbationSeries {
    /// `Σⱼ E⁽ʲ⁾gʲ`.
    pub fn energy_at(&self, g: f64) -> f64 {
        self.energy_coeffs.iter().rev().fold(0.0, |acc, c| acc * g + c)
    }

    /// Exact `λʲ φ⁽ʲ⁾ₘ`; the orthonormal component is this times `√(m!/n!)`.
    pub fn raw_state_coeff(&self, j: usize, m: usize) -> Scalar {
        match self.raw_states.get(j).and_then(|s| s.get(&m)) {
            Some(c) => &self.unit.pow(j as u32) * &Scalar::from(c.clone()),
            None => Scalar::zero(),
        }
    }
}

/// Rayleigh–Schrödinger series for level `n` up to order `p`.
pub fn rs_series(spec: &OscillatorSpec, n: usize, p: usize) -> Result<PerturbationSeries> {
    spec.validate()?;
    if p > MAX_ORDER {
        return Err(Error::Unsupported(format!("order {p} exceeds {MAX_ORDER}")));
    }
    if n > MAX_LEVEL {
        return Err(Error::Unsupported(format!("level {n} exceeds {MAX_LEVEL}")));
    }
    let k = spec.k;
    let mut states: Vec<Sparse> = vec![Sparse::from([(n, BigRational::one())])];
    let mut e: Vec<BigRational> = vec![BigRational::zero()];
    for j in 1..=p {
        let w = apply_w(&states[j - 1], k);
        let ej = w.get(&n).cloned().unwrap_or_else(BigRational::zero);
        e.push(ej);
        let mut next = Sparse::new();
        let mut support: Vec<usize> = w.keys().copied().collect();
        for s in &states[1..j] {
            support.extend(s.keys().copied());
        }
        support.sort_unstable();
        support.dedup();
        for m in support {
            if m == n {
                continue;
            }
            let gap = rat(2 * n as i64 - 2 * m as i64);
            if gap.is_zero() {
                return Err(Error::DegenerateLevel(n));
            }
            let mut num = w.get(&m).cloned().unwrap_or_else(BigRational::zero);
            for i in 1..j {
                if let Some(c) = states[j - i].get(&m) {
                    num -= &e[i] * c;
                }
            }
            if !num.is_zero() {
                next.insert(m, num / gap);
            }
        }
        states.push(next);
    }

    let unit = coupling_unit(k);
    let omega = spec.omega;
    let mut energy_exact = Vec::with_capacity(p + 1);
    energy_exact.push(rat(2 * n as i64 + 1));
    for (j, ej) in e.iter().enumerate().skip(1) {
        let c = &unit.pow(j as u32) * &Scalar::from(ej.clone());
        let r = c.as_rational().ok_or_else(|| {
            Error::Unsupported(format!("order-{j} energy coefficient {c} is not rational"))
        })?;
        energy_exact.push(r);
    }
    let energy_coeffs = energy_exact
        .iter()
        .map(|r| omega * r.to_f64().unwrap_or(f64::NAN))
        .collect();

    let state_coeffs = states
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let lj = unit.pow(j as u32);
            s.iter()
                .map(|(&m, c)| {
                    let z = &lj * &Scalar::from(c.clone());
                    (m, z.times_sqrt(&factorial_ratio(m, n)))
                })
                .collect()
        })
        .collect();

    Ok(PerturbationSeries {
        spec: *spec,
        level: n,
        order: p,
        energy_exact,
        energy_coeffs,
        state_coeffs,
        raw_states: states,
        unit,
    })
}

/// Indefinite norm of the intermediate-normalized perturbative state as a
/// polynomial in `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormSeries {
    pub spec: OscillatorSpec,
    pub level: usize,
    pub order: usize,
    /// Coefficients of `g⁰..gᵖ`.
    pub coeffs: Vec<BigRational>,
    /// `(−1)ⁿ`.
    pub sign_prediction: i8,
    /// Series value at `spec.g`.
    pub value: f64,
    /// The value at `spec.g` has the predicted sign and magnitude > 1e−2.
    pub sign_consistent: bool,
}

impl NormSeries {
    pub fn evaluate(&self, g: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * g + c.to_f64().unwrap_or(f64::NAN))
    }
}

/// `⟨φ|η|φ⟩ = Σ_{i,j} gⁱ⁺ʲ conj(λ)ⁱλʲ Σₘ (−1)ᵐ (m!/n!) φ⁽ⁱ⁾ₘ φ⁽ʲ⁾ₘ`.
pub fn gml_norm_check(spec: &OscillatorSpec, n: usize, p: usize) -> Result<NormSeries> {
    if p > MAX_NORM_ORDER {
        return Err(Error::Unsupported(format!("norm series order {p} exceeds {MAX_NORM_ORDER}")));
    }
    let series = rs_series(spec, n, p)?;
    let unit = coupling_unit(spec.k);
    let mut coeffs = vec![BigRational::zero(); p + 1];
    for i in 0..=p {
        for j in 0..=(p - i) {
            let (a, b) = (&series.raw_states[i], &series.raw_states[j]);
            let mut s = BigRational::zero();
            for (m, x) in a {
                if let Some(y) = b.get(m) {
                    let term = x * y * factorial_ratio(*m, n);
                    if m % 2 == 0 {
                        s += term;
                    } else {
                        s -= term;
                    }
                }
            }
            if s.is_zero() {
                continue;
            }
            let phase = &unit.conj().pow(i as u32) * &unit.pow(j as u32);
            let c = (&phase * &Scalar::from(s)).as_rational().ok_or_else(|| {
                Error::Unsupported(format!("norm coefficient at orders ({i}, {j}) is not rational"))
            })?;
            coeffs[i + j] += c;
        }
    }
    let sign_prediction: i8 = if n.is_multiple_of(2) { 1 } else { -1 };
    if coeffs[0] != rat(sign_prediction as i64) {
        return Err(Error::Unsupported(format!(
            "norm series constant term {} differs from (−1)^{n}",
            coeffs[0]
        )));
    }
    let mut out = NormSeries {
        spec: *spec,
        level: n,
        order: p,
        coeffs,
        sign_prediction,
        value: 0.0,
        sign_consistent: false,
    };
    out.value = out.evaluate(spec.g);
    out.sign_consistent = out.value.abs() > 1e-2 && out.value.signum() == sign_prediction as f64;
    Ok(out)
}

/// Order-`g²` diagonal amplitude `⟨n|U_ε|n⟩` of the adiabatically switched
/// evolution, `T₂(ε) = pole_coeff/ε + finite_part + O(ε)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticAmplitude2 {
    pub spec: OscillatorSpec,
    pub level: usize,
    pub epsilon: f64,
    /// `T₂(ε)` itself.
    pub amplitude: Complex64,
    pub pole_coeff: Complex64,
    pub finite_part: Complex64,
}

/// `T₂(ε) = −g² Σₘ VₙₘVₘₙ / (2ε(ε − iΔₙₘ))` with `Δₙₘ = 2ω(n − m)` and
/// `V = −ω iᵏ xᵏ`, from the double time integral
/// `(−ig)² ∫_{−∞}^0 dt₁ ∫_{−∞}^{t₁} dt₂ e^{ε(t₁+t₂)} V(t₁)V(t₂)`.
pub fn adiabatic_diagonal_order2(spec: &OscillatorSpec, n: usize, epsilon: f64) -> Result<AdiabaticAmplitude2> {
    spec.validate()?;
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    if !spec.is_odd() {
        return Err(Error::Unsupported(format!(
            "even k = {} has a diagonal coupling and a 1/ε² term",
            spec.k
        )));
    }
    if n > MAX_LEVEL {
        return Err(Error::Unsupported(format!("level {n} exceeds {MAX_LEVEL}")));
    }
    let dim = n + spec.k as usize + 1;
    let xk = fock::exact_power(OperatorKind::Position, spec.k, dim)?.entries;
    let scale = -fock::i_pow(spec.k) * spec.omega;
    let g2 = spec.g * spec.g;
    let mut amplitude = Complex64::new(0.0, 0.0);
    let mut pole_sum = 0.0;
    let mut finite_sum = 0.0;
    for m in 0..dim {
        if m == n {
            continue;
        }
        let vv = (scale * xk[(n, m)]) * (scale * xk[(m, n)]);
        if vv == Complex64::new(0.0, 0.0) {
            continue;
        }
        let delta = 2.0 * spec.omega * (n as f64 - m as f64);
        amplitude -= vv * g2 / (Complex64::new(epsilon, -delta) * (2.0 * epsilon));
        // 1/(ε − iΔ) = i/Δ + 1/Δ² + O(ε); VV is real for odd k
        pole_sum += vv.re / delta;
        finite_sum += vv.re / (delta * delta);
    }
    Ok(AdiabaticAmplitude2 {
        spec: *spec,
        level: n,
        epsilon,
        amplitude,
        pole_coeff: Complex64::new(0.0, -0.5 * g2 * pole_sum),
        finite_part: Complex64::new(-0.5 * g2 * finite_sum, 0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn cubic_second_order() {
        let s = rs_series(&OscillatorSpec::cubic(0.0), 0, 2).unwrap();
        assert_eq!(s.energy_exact, vec![r(1, 1), r(0, 1), r(11, 16)]);
        let s = rs_series(&OscillatorSpec::cubic(0.0), 1, 2).unwrap();
        assert_eq!(s.energy_exact, vec![r(3, 1), r(0, 1), r(71, 16)]);
    }

    #[test]
    fn odd_orders_vanish() {
        for k in [1, 3, 5] {
            let spec = OscillatorSpec::new(1.0, 0.0, k).unwrap();
            for n in 0..4 {
                let s = rs_series(&spec, n, 5).unwrap();
                for j in [1, 3, 5] {
                    assert!(s.energy_exact[j].is_zero());
                }
            }
        }
    }

    #[test]
    fn linear_coupling_exact() {
        // ω(p² + x² − igx) has E = ω(2n + 1 + g²/4) exactly
        let spec = OscillatorSpec::new(1.0, 0.0, 1).unwrap();
        for n in 0..4 {
            let s = rs_series(&spec, n, 6).unwrap();
            assert_eq!(s.energy_exact[2], r(1, 4));
            assert!(s.energy_exact[3..].iter().all(|c| c.is_zero()));
        }
    }

    #[test]
    fn first_order_state() {
        let s = rs_series(&OscillatorSpec::cubic(0.0), 0, 1).unwrap();
        let c1 = s.state_coeffs[1][&1];
        let c3 = s.state_coeffs[1][&3];
        let expected1 = Complex64::new(0.0, -3.0 / (4.0 * 2f64.sqrt()));
        let expected3 = Complex64::new(0.0, -3f64.sqrt() / 12.0);
        assert!((c1 - expected1).norm() < 1e-16);
        assert!((c3 - expected3).norm() < 1e-16);
        assert!(!s.state_coeffs[1].contains_key(&0));
    }

    #[test]
    fn omega_scaling() {
        let spec = OscillatorSpec::new(2.5, 0.0, 3).unwrap();
        let s = rs_series(&spec, 0, 2).unwrap();
        assert!((s.energy_coeffs[2] - 2.5 * 11.0 / 16.0).abs() < 1e-15);
        assert!((s.energy_at(0.1) - 2.5 * (1.0 + 0.11 / 16.0)).abs() < 1e-15);
    }

    #[test]
    fn limits() {
        let spec = OscillatorSpec::cubic(0.1);
        assert!(rs_series(&spec, 0, 7).is_err());
        assert!(rs_series(&spec, 11, 2).is_err());
        assert!(gml_norm_check(&spec, 0, 5).is_err());
    }

    #[test]
    fn ground_state_norm_series() {
        let ns = gml_norm_check(&OscillatorSpec::cubic(0.3), 0, 2).unwrap();
        assert_eq!(ns.coeffs, vec![r(1, 1), r(0, 1), r(-29, 96)]);
        assert!((ns.value - (1.0 - 29.0 * 0.09 / 96.0)).abs() < 1e-15);
        assert!(ns.sign_consistent);
    }

    #[test]
    fn norm_series_at_zero_coupling() {
        for n in 0..4 {
            let ns = gml_norm_check(&OscillatorSpec::cubic(0.0), n, 4).unwrap();
            assert_eq!(ns.value, fock::parity_sign(n));
            assert!(ns.coeffs[1].is_zero() && ns.coeffs[3].is_zero());
        }
    }

    #[test]
    fn pole_matches_energy() {
        for n in 0..4 {
            let spec = OscillatorSpec::cubic(0.7);
            let a = adiabatic_diagonal_order2(&spec, n, 1e-3).unwrap();
            let e2 = rs_series(&spec, n, 2).unwrap().energy_coeffs[2];
            assert_eq!(a.pole_coeff.re, 0.0);
            assert!((a.pole_coeff.im + 0.49 * e2 / 2.0).abs() < 1e-12);
        }
        let a = adiabatic_diagonal_order2(&OscillatorSpec::cubic(1.0), 0, 0.5).unwrap();
        assert!((a.pole_coeff - Complex64::new(0.0, -11.0 / 32.0)).norm() < 1e-15);
    }

    #[test]
    fn adiabatic_zero_coupling() {
        let a = adiabatic_diagonal_order2(&OscillatorSpec::cubic(0.0), 2, 0.1).unwrap();
        assert_eq!(a.amplitude.norm(), 0.0);
        assert_eq!(a.pole_coeff.norm(), 0.0);
    }

    #[test]
    fn adiabatic_rejects_bad_input() {
        let spec = OscillatorSpec::cubic(1.0);
        assert_eq!(
            adiabatic_diagonal_order2(&spec, 0, 0.0).unwrap_err(),
            Error::InvalidEpsilon(0.0)
        );
        assert!(adiabatic_diagonal_order2(&spec, 0, -1.0).is_err());
        assert!(adiabatic_diagonal_order2(&OscillatorSpec::new(1.0, 1.0, 4).unwrap(), 0, 0.1).is_err());
    }

    #[test]
    fn laurent_remainder_is_linear() {
        let spec = OscillatorSpec::cubic(1.0);
        let rem = |eps: f64| {
            let a = adiabatic_diagonal_order2(&spec, 0, eps).unwrap();
            (a.amplitude - a.pole_coeff / eps - a.finite_part).norm()
        };
        let ratio = rem(1e-2) / rem(1e-3);
        assert!((ratio - 10.0).abs() < 0.1, "{ratio}");
    }
}
