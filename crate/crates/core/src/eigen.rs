//! Dense non-Hermitian eigensolver and truncation-convergence sweeps.
//!
//! Eigenvalues come from a complex Schur form `M = Q T Q†`. Eigenvectors are
//! recovered by back-substitution on the triangular factor and rotated back
//! with `Q`; every pair carries its residual `‖Mv − λv‖/‖v‖`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{self, CMatrix};
use crate::hamiltonian::{build_pt_hamiltonian, OscillatorSpec};

/// Dimension ladder used when none is supplied.
pub const DEFAULT_DIMS: [usize; 7] = [32, 48, 64, 96, 128, 192, 256];

/// Default convergence tolerance on successive level values.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative residual bound `‖Mv − λv‖ ≤ RESIDUAL_BOUND·‖M‖·‖v‖` for accepted pairs.
pub const RESIDUAL_BOUND: f64 = 1e-10;

/// Two eigenvalues closer than this are checked for coalescing eigenvectors.
pub const COINCIDENCE_TOL: f64 = 1e-8;

const SCHUR_EPS: f64 = f64::EPSILON;
const SCHUR_MAX_SWEEPS_PER_DIM: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: Complex64,
    /// Unit-norm coefficient vector in the number basis.
    pub vector: DVector<Complex64>,
    /// `‖Mv − λv‖ / ‖v‖`.
    pub residual: f64,
    /// Set when another eigenvalue lies within [`COINCIDENCE_TOL`] and the two
    /// eigenvectors are numerically parallel.
    pub near_defective: bool,
}

impl Eigenpair {
    /// Whether the residual satisfies the bound relative to `‖M‖`.
    pub fn accepted(&self, matrix_norm: f64) -> bool {
        self.residual <= RESIDUAL_BOUND * matrix_norm.max(1.0)
    }
}

/// Frobenius norm, used as `‖M‖` in residual bounds.
pub fn matrix_norm(m: &CMatrix) -> f64 {
    m.norm()
}

fn order(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// All eigenpairs of a general complex matrix, sorted by `(Re λ, Im λ)`.
pub fn eigen_decompose(m: &CMatrix) -> Result<Vec<Eigenpair>> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite);
    }
    let n = m.nrows();
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }

    let schur = nalgebra::linalg::Schur::try_new(m.clone(), SCHUR_EPS, SCHUR_MAX_SWEEPS_PER_DIM * n)
        .ok_or(Error::SolverFailure { dim: n })?;
    let (q, t) = schur.unpack();

    let tnorm = t.norm().max(f64::MIN_POSITIVE);
    let smin = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE);

    let mut pairs = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = DVector::<Complex64>::zeros(n);
        y[k] = fock::ONE;
        for j in (0..k).rev() {
            let mut s = fock::ZERO;
            for l in j + 1..=k {
                s += t[(j, l)] * y[l];
            }
            let mut d = t[(j, j)] - lambda;
            if d.norm() < smin {
                d = Complex64::new(smin, 0.0);
            }
            y[j] = -s / d;
            // keep the partial solution bounded
            let big = y.camax();
            if big > 1e100 {
                y /= Complex64::new(big, 0.0);
            }
        }
        let mut v = &q * y;
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::SolverFailure { dim: n });
        }
        v /= Complex64::new(norm, 0.0);
        let residual = (m * &v - &v * lambda).norm();
        pairs.push(Eigenpair {
            value: lambda,
            vector: v,
            residual,
            near_defective: false,
        });
    }

    pairs.sort_by(|a, b| order(&a.value, &b.value));
    flag_defective(&mut pairs);
    Ok(pairs)
}

fn flag_defective(pairs: &mut [Eigenpair]) {
    let n = pairs.len();
    for i in 0..n {
        for j in i + 1..n {
            // sorted by real part, so stop once real parts separate
            if pairs[j].value.re - pairs[i].value.re > COINCIDENCE_TOL {
                break;
            }
            if (pairs[j].value - pairs[i].value).norm() < COINCIDENCE_TOL {
                let overlap = pairs[i].vector.dotc(&pairs[j].vector).norm();
                if overlap > 1.0 - 1e-6 {
                    pairs[i].near_defective = true;
                    pairs[j].near_defective = true;
                }
            }
        }
    }
}

/// Number of levels of a single `N`-dimensional diagonalization eligible
/// for convergence reporting.
pub fn eligible_levels(n: usize) -> usize {
    n / 3
}

/// One tracked level across the dimension ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergedLevel {
    pub index: usize,
    /// Value at the largest dimension evaluated.
    pub value: Complex64,
    pub dims_used: Vec<usize>,
    pub values: Vec<Complex64>,
    /// `|ΔE|` between successive entries of `values`.
    pub deltas: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub spec: OscillatorSpec,
    pub tol: f64,
    pub dims_evaluated: Vec<usize>,
    pub levels: Vec<ConvergedLevel>,
}

impl Spectrum {
    pub fn all_converged(&self) -> bool {
        self.levels.iter().all(|l| l.converged)
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.levels.iter().map(|l| l.value).collect()
    }

    pub fn final_dim(&self) -> usize {
        self.dims_evaluated.last().copied().unwrap_or(0)
    }
}

/// Lowest `count` eigenvalues of `build_pt_hamiltonian(spec, n)`.
pub fn low_eigenvalues(spec: &OscillatorSpec, n: usize, count: usize) -> Result<Vec<Complex64>> {
    let h = build_pt_hamiltonian(spec, n)?;
    let pairs = eigen_decompose(&h.entries)?;
    Ok(pairs.into_iter().take(count).map(|p| p.value).collect())
}

/// [`converged_spectrum_with`] over [`DEFAULT_DIMS`].
pub fn converged_spectrum(spec: &OscillatorSpec, n_levels: usize, tol: f64) -> Result<Spectrum> {
    converged_spectrum_with(spec, n_levels, tol, &DEFAULT_DIMS)
}

/// Diagonalizes at each dimension in `dims` (in order), tracks the lowest
/// `n_levels` levels by nearest-value matching and stops as soon as all of
/// them have moved by less than `tol` between consecutive dimensions.
///
/// Failing to converge is not an error: the returned levels carry
/// `converged = false` and their delta traces.
pub fn converged_spectrum_with(
    spec: &OscillatorSpec,
    n_levels: usize,
    tol: f64,
    dims: &[usize],
) -> Result<Spectrum> {
    spec.validate()?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    if n_levels == 0 {
        return Err(Error::Unsupported("at least one level must be requested".into()));
    }
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidDimension(0));
    }

    let mut levels: Vec<ConvergedLevel> = Vec::new();
    let mut evaluated = Vec::new();

    for &dim in dims {
        let eligible = eligible_levels(dim);
        let candidates = low_eigenvalues(spec, dim, eligible)?;
        evaluated.push(dim);

        let mut taken = vec![false; candidates.len()];
        for level in levels.iter_mut() {
            if let Some(best) = nearest_free(&candidates, &taken, level.value) {
                taken[best] = true;
                let new = candidates[best];
                let delta = (new - level.value).norm();
                level.values.push(new);
                level.deltas.push(delta);
                level.dims_used.push(dim);
                level.value = new;
                level.converged = delta < tol;
            } else {
                level.converged = false;
            }
        }
        let mut free = (0..candidates.len()).filter(|&i| !taken[i]);
        while levels.len() < n_levels {
            let Some(i) = free.next() else { break };
            levels.push(ConvergedLevel {
                index: levels.len(),
                value: candidates[i],
                dims_used: vec![dim],
                values: vec![candidates[i]],
                deltas: Vec::new(),
                converged: false,
            });
        }

        if levels.len() == n_levels && levels.iter().all(|l| l.converged) {
            break;
        }
    }

    // report in ascending order of the final values; indices follow
    levels.sort_by(|a, b| order(&a.value, &b.value));
    for (i, l) in levels.iter_mut().enumerate() {
        l.index = i;
    }

    Ok(Spectrum {
        spec: *spec,
        tol,
        dims_evaluated: evaluated,
        levels,
    })
}

/// Nearest unassigned candidate; ties go to the lower index.
fn nearest_free(candidates: &[Complex64], taken: &[bool], target: Complex64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        if taken[i] {
            continue;
        }
        let d = (c - target).norm();
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelReality {
    pub index: usize,
    pub value: Complex64,
    pub imag_abs: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealityReport {
    /// `max |Im Eₙ|` over converged levels.
    pub max_imag: f64,
    pub per_level: Vec<LevelReality>,
}

pub fn reality_report(s: &Spectrum) -> Result<RealityReport> {
    let per_level: Vec<LevelReality> = s
        .levels
        .iter()
        .map(|l| LevelReality {
            index: l.index,
            value: l.value,
            imag_abs: l.value.im.abs(),
            converged: l.converged,
        })
        .collect();
    if !per_level.iter().any(|l| l.converged) {
        return Err(Error::EmptyReport);
    }
    let max_imag = per_level
        .iter()
        .filter(|l| l.converged)
        .map(|l| l.imag_abs)
        .fold(0.0, f64::max);
    Ok(RealityReport { max_imag, per_level })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_matrix() {
        let m = dmatrix![c(3.0, 0.0), c(0.0, 0.0); c(0.0, 0.0), c(1.0, 0.0)];
        let pairs = eigen_decompose(&m).unwrap();
        assert!((pairs[0].value - c(1.0, 0.0)).norm() < 1e-14);
        assert!((pairs[1].value - c(3.0, 0.0)).norm() < 1e-14);
        assert!(pairs.iter().all(|p| p.residual < 1e-14 && !p.near_defective));
    }

    #[test]
    fn rotation_generator() {
        let m = dmatrix![c(0.0, 0.0), c(1.0, 0.0); c(-1.0, 0.0), c(0.0, 0.0)];
        let pairs = eigen_decompose(&m).unwrap();
        assert!((pairs[0].value - c(0.0, -1.0)).norm() < 1e-14);
        assert!((pairs[1].value - c(0.0, 1.0)).norm() < 1e-14);
        assert!(pairs.iter().all(|p| p.residual < 1e-13));
    }

    #[test]
    fn jordan_block_flagged() {
        let m = dmatrix![c(0.0, 0.0), c(1.0, 0.0); c(0.0, 0.0), c(0.0, 0.0)];
        let pairs = eigen_decompose(&m).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!(pairs.iter().all(|p| p.value.norm() < 1e-12));
        assert!(pairs.iter().all(|p| p.near_defective));
    }

    #[test]
    fn rejects_bad_input() {
        let m = dmatrix![c(f64::NAN, 0.0), c(0.0, 0.0); c(0.0, 0.0), c(1.0, 0.0)];
        assert_eq!(eigen_decompose(&m).unwrap_err(), Error::NonFinite);
        let r = CMatrix::zeros(2, 3);
        assert!(matches!(eigen_decompose(&r), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn random_matrix_residuals() {
        // deterministic pseudo-random fill
        let n = 40;
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let m = CMatrix::from_fn(n, n, |_, _| c(next(), next()));
        let norm = matrix_norm(&m);
        let pairs = eigen_decompose(&m).unwrap();
        assert_eq!(pairs.len(), n);
        for p in &pairs {
            assert!(p.accepted(norm), "residual {}", p.residual);
        }
        let trace: Complex64 = (0..n).map(|i| m[(i, i)]).sum();
        let sum: Complex64 = pairs.iter().map(|p| p.value).sum();
        assert!((trace - sum).norm() < 1e-10);
    }

    #[test]
    fn harmonic_spectrum_exact() {
        let spec = OscillatorSpec::cubic(0.0);
        let s = converged_spectrum_with(&spec, 3, 1e-9, &[32, 64]).unwrap();
        assert!(s.all_converged());
        for (n, l) in s.levels.iter().enumerate() {
            assert!((l.value - c((2 * n + 1) as f64, 0.0)).norm() < 1e-12);
        }
        let r = reality_report(&s).unwrap();
        assert_eq!(r.max_imag, 0.0);
    }

    #[test]
    fn empty_report() {
        let spec = OscillatorSpec::cubic(0.0);
        let s = converged_spectrum_with(&spec, 2, 1e-9, &[16]).unwrap();
        assert!(!s.all_converged());
        assert_eq!(reality_report(&s).unwrap_err(), Error::EmptyReport);
    }

    #[test]
    fn linear_coupling_shift() {
        let g = 0.2;
        let spec = OscillatorSpec::new(1.0, g, 1).unwrap();
        let s = converged_spectrum(&spec, 5, 1e-9).unwrap();
        assert!(s.all_converged());
        for (n, l) in s.levels.iter().enumerate() {
            let exact = (2 * n + 1) as f64 + g * g / 4.0;
            assert!((l.value.re - exact).abs() < 1e-9, "n={n}: {}", l.value);
            assert!(l.value.im.abs() < 1e-10);
        }
    }

    #[test]
    fn invalid_arguments() {
        let spec = OscillatorSpec::cubic(0.1);
        assert_eq!(
            converged_spectrum(&spec, 3, 0.0).unwrap_err(),
            Error::InvalidTolerance(0.0)
        );
        assert!(converged_spectrum(&spec, 0, 1e-9).is_err());
        assert!(converged_spectrum_with(&spec, 2, 1e-9, &[]).is_err());
    }

    #[test]
    fn nearest_free_prefers_lower_index_on_tie() {
        let cands = [c(0.0, 1.0), c(0.0, -1.0)];
        assert_eq!(nearest_free(&cands, &[false, false], c(0.0, 0.0)), Some(0));
        assert_eq!(nearest_free(&cands, &[true, false], c(0.0, 0.0)), Some(1));
        assert_eq!(nearest_free(&cands, &[true, true], c(0.0, 0.0)), None);
    }
}
