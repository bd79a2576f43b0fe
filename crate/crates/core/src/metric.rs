//! Indefinite inner product `⟨u|η|v⟩ = Σ (−1)ⁿ ūₙ vₙ` and the norm analysis
//! of eigenstates built on it.
//!
//! For a matrix with `M† = ηMη`, taking `⟨v|η|Mv⟩` both ways gives
//! `(λ − λ̄)⟨v|η|v⟩ = 0`, so an eigenvector with non-vanishing indefinite
//! norm has a real eigenvalue, and `(λₘ − λₙ)⟨vₘ|η|vₙ⟩ = 0` makes
//! eigenvectors of distinct real eigenvalues η-orthogonal.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::eigen::{eigen_decompose, eligible_levels, matrix_norm, Eigenpair, RESIDUAL_BOUND};
use crate::error::{Error, Result};
use crate::fock::{parity_sign, CMatrix};
use crate::hamiltonian::{build_pt_hamiltonian, HamiltonianMatrix, OscillatorSpec};

/// Below this `|⟨v|η|v⟩|` (unit ordinary norm) the sign is undefined and the
/// level is flagged.
pub const NEAR_ZERO_NORM: f64 = 1e-6;

/// Sign is only assigned above this magnitude.
pub const SIGN_THRESHOLD: f64 = 1e-10;

/// Minimum eigenvalue separation for the η-orthogonality check.
pub const SEPARATION: f64 = 1e-6;

/// Default number of continuation steps from `g = 0`.
pub const CONTINUATION_STEPS: usize = 8;

/// Larger matrices are continued at this dimension and matched onto the
/// full-size spectrum only at the target coupling.
pub const CONTINUATION_DIM: usize = 96;

/// `Σₙ (−1)ⁿ conj(uₙ) vₙ`.
pub fn eta_inner(u: &DVector<Complex64>, v: &DVector<Complex64>) -> Result<Complex64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    Ok(u.iter()
        .zip(v.iter())
        .enumerate()
        .map(|(n, (a, b))| a.conj() * b * parity_sign(n))
        .sum())
}

fn eta_norm_of(v: &DVector<Complex64>) -> f64 {
    v.iter()
        .enumerate()
        .map(|(n, z)| parity_sign(n) * z.norm_sqr())
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenpairWithNorm {
    pub pair: Eigenpair,
    /// `⟨v|η|v⟩` for `‖v‖ = 1`.
    pub eta_norm: f64,
    /// `⟨v|η|v⟩ / |vₙ|²` with `n` the unperturbed index: the norm of the
    /// eigenvector rescaled to unit overlap with its parent basis state.
    pub intermediate_eta_norm: f64,
    /// `±1`, or `None` when `|eta_norm| ≤ SIGN_THRESHOLD`.
    pub sign: Option<i8>,
    /// Basis state `|n⟩` this level continues from at `g = 0`.
    pub unperturbed_index: usize,
    /// `|eta_norm| < NEAR_ZERO_NORM`.
    pub near_zero: bool,
}

impl EigenpairWithNorm {
    fn new(pair: Eigenpair, unperturbed_index: usize) -> Self {
        let eta_norm = eta_norm_of(&pair.vector);
        let parent = pair.vector[unperturbed_index].norm_sqr();
        let sign = if eta_norm.abs() > SIGN_THRESHOLD {
            Some(if eta_norm > 0.0 { 1 } else { -1 })
        } else {
            None
        };
        EigenpairWithNorm {
            eta_norm,
            intermediate_eta_norm: eta_norm / parent,
            sign,
            unperturbed_index,
            near_zero: eta_norm.abs() < NEAR_ZERO_NORM,
            pair,
        }
    }

    /// `sign = (−1)^unperturbed_index`.
    pub fn sign_matches_parity(&self) -> bool {
        self.sign == Some(parity_sign(self.unperturbed_index) as i8)
    }
}

/// Eigenpairs of `build_pt_hamiltonian(spec, n)` with their indefinite
/// norms, lowest `n_levels` by real part.
///
/// Unperturbed indices come from continuing every eligible level from
/// `g = 0` in [`CONTINUATION_STEPS`] steps, matching by nearest eigenvalue
/// against a linear prediction. A step whose matching is ambiguous is split
/// in half. Above [`CONTINUATION_DIM`] the path is followed at that size.
pub fn eigen_norms(spec: &OscillatorSpec, n_levels: usize, n: usize) -> Result<Vec<EigenpairWithNorm>> {
    spec.validate()?;
    let tracked = eligible_levels(n);
    if n_levels == 0 || n_levels > tracked {
        return Err(Error::Unsupported(format!(
            "{n_levels} levels requested but only {tracked} are eligible at N = {n}"
        )));
    }
    let checked = n_levels + 2;
    let (pairs, labels) = if n > CONTINUATION_DIM {
        let (coarse, coarse_labels) = continue_levels(spec, CONTINUATION_DIM, eligible_levels(CONTINUATION_DIM), checked)?;
        let mut predicted = vec![Complex64::new(f64::NAN, 0.0); coarse.len()];
        for (p, &l) in coarse.iter().zip(&coarse_labels) {
            predicted[l] = p.value;
        }
        let h = build_pt_hamiltonian(spec, n)?;
        let mut candidates = eigen_decompose(&h.entries)?;
        candidates.truncate(tracked);
        match match_levels(&predicted, &candidates, checked.min(predicted.len())) {
            Some(assign) => relabel(candidates, &assign),
            None => continue_levels(spec, n, tracked, checked)?,
        }
    } else {
        continue_levels(spec, n, tracked, checked)?
    };
    let mut out: Vec<EigenpairWithNorm> = pairs
        .into_iter()
        .zip(labels)
        .map(|(p, idx)| EigenpairWithNorm::new(p, idx))
        .collect();
    out.sort_by(|a, b| a.pair.value.re.total_cmp(&b.pair.value.re));
    out.truncate(n_levels);
    Ok(out)
}

/// Returns the lowest `tracked` eigenpairs at the target coupling and, for
/// each, the index of the `g = 0` level it continues.
///
/// Only the lowest `checked` labels must match unambiguously; the rest are
/// carried along so they cannot steal a candidate.
fn continue_levels(
    spec: &OscillatorSpec,
    n: usize,
    tracked: usize,
    checked: usize,
) -> Result<(Vec<Eigenpair>, Vec<usize>)> {
    let target = spec.g;
    let lowest = |g: f64| -> Result<Vec<Eigenpair>> {
        let h = build_pt_hamiltonian(&spec.with_g(g), n)?;
        let mut pairs = eigen_decompose(&h.entries)?;
        pairs.truncate(tracked);
        Ok(pairs)
    };
    if target == 0.0 {
        let pairs = lowest(0.0)?;
        let labels = (0..pairs.len()).collect();
        return Ok((pairs, labels));
    }

    // values[label] at the last two accepted couplings
    let mut prev: Vec<Complex64> = (0..tracked).map(|j| Complex64::new(spec.free_energy(j), 0.0)).collect();
    let mut prev2: Option<(f64, Vec<Complex64>)> = None;
    let mut g_prev = 0.0;
    let mut step = target / CONTINUATION_STEPS as f64;
    let mut assignment: Vec<usize> = (0..tracked).collect();
    let mut current: Vec<Eigenpair> = Vec::new();

    while (target - g_prev).abs() > 1e-15 * target.abs() {
        let remaining = target - g_prev;
        let g_next = if remaining.abs() <= step.abs() * (1.0 + 1e-12) { target } else { g_prev + step };
        let candidates = lowest(g_next)?;
        let predicted: Vec<Complex64> = match &prev2 {
            Some((g2, v2)) => prev
                .iter()
                .zip(v2)
                .map(|(p, q)| p + (p - q) * ((g_next - g_prev) / (g_prev - g2)))
                .collect(),
            None => prev.clone(),
        };
        match match_levels(&predicted, &candidates, checked) {
            Some(assign) => {
                prev2 = Some((g_prev, prev.clone()));
                prev = assign.iter().map(|&c| candidates[c].value).collect();
                g_prev = g_next;
                assignment = assign;
                current = candidates;
            }
            None => {
                if step.abs() < target.abs() * 1e-6 {
                    return Err(Error::Unsupported(format!(
                        "level continuation stalled near g = {g_prev}"
                    )));
                }
                step /= 2.0;
            }
        }
    }

    Ok(relabel(current, &assignment))
}

/// Inverts `label -> candidate` and drops unlabeled candidates.
fn relabel(candidates: Vec<Eigenpair>, assignment: &[usize]) -> (Vec<Eigenpair>, Vec<usize>) {
    let mut labels = vec![usize::MAX; candidates.len()];
    for (label, &c) in assignment.iter().enumerate() {
        labels[c] = label;
    }
    candidates
        .into_iter()
        .zip(labels)
        .filter(|(_, l)| *l != usize::MAX)
        .unzip()
}

/// One-to-one nearest matching of predicted values onto candidates, in
/// label order. `None` if some match among the first `checked` labels is
/// ambiguous (the runner-up is less than twice as far as the winner).
fn match_levels(predicted: &[Complex64], candidates: &[Eigenpair], checked: usize) -> Option<Vec<usize>> {
    let mut taken = vec![false; candidates.len()];
    let mut out = Vec::with_capacity(predicted.len());
    for (label, p) in predicted.iter().enumerate() {
        let mut dists: Vec<(usize, f64)> = candidates
            .iter()
            .enumerate()
            .filter(|(i, _)| !taken[*i])
            .map(|(i, c)| (i, (c.value - p).norm()))
            .collect();
        dists.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let (best, d0) = *dists.first()?;
        if label < checked {
            if let Some(&(_, d1)) = dists.get(1) {
                if d1 < 2.0 * d0 {
                    return None;
                }
            }
        }
        taken[best] = true;
        out.push(best);
    }
    Some(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalityReport {
    /// `max |⟨vₘ|η|vₙ⟩|` over checked pairs `m ≠ n`.
    pub defect: f64,
    pub checked: usize,
    /// Index pairs (into the input slice) skipped for clustered eigenvalues.
    pub skipped: Vec<(usize, usize)>,
}

pub fn eta_orthogonality_defect(pairs: &[EigenpairWithNorm]) -> Result<OrthogonalityReport> {
    let mut defect: f64 = 0.0;
    let mut checked = 0;
    let mut skipped = Vec::new();
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            let (a, b) = (&pairs[i].pair, &pairs[j].pair);
            if (a.value - b.value).norm() <= SEPARATION {
                skipped.push((i, j));
                continue;
            }
            defect = defect.max(eta_inner(&a.vector, &b.vector)?.norm());
            checked += 1;
        }
    }
    Ok(OrthogonalityReport {
        defect,
        checked,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalSubspace {
    pub unperturbed_indices: Vec<usize>,
    pub values: Vec<Complex64>,
    pub vectors: Vec<DVector<Complex64>>,
    /// `Gᵢⱼ = ⟨vᵢ|η|vⱼ⟩`.
    pub gram: DMatrix<Complex64>,
    /// Largest `‖Mv − λv‖/‖v‖` over the returned vectors.
    pub closure_residual: f64,
}

impl PhysicalSubspace {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Smallest eigenvalue of the Hermitian part of the Gram matrix.
    pub fn min_gram_eigenvalue(&self) -> f64 {
        if self.gram.is_empty() {
            return 0.0;
        }
        let herm = (&self.gram + self.gram.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest off-diagonal `|Gᵢⱼ|`.
    pub fn gram_off_diagonal(&self) -> f64 {
        let n = self.gram.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(self.gram[(i, j)].norm());
                }
            }
        }
        worst
    }
}

/// Keeps the positive-norm eigenvectors and checks that each is still an
/// eigenvector of `h`, so their span is invariant.
pub fn physical_projector(pairs: &[EigenpairWithNorm], h: &HamiltonianMatrix) -> Result<PhysicalSubspace> {
    if let Some(bad) = pairs.iter().find(|p| p.sign.is_none() || p.near_zero) {
        return Err(Error::UndefinedSign {
            level: bad.unperturbed_index,
            norm: bad.eta_norm,
        });
    }
    let keep: Vec<&EigenpairWithNorm> = pairs.iter().filter(|p| p.sign == Some(1)).collect();
    let bound = RESIDUAL_BOUND * matrix_norm(&h.entries).max(1.0);
    let mut closure_residual: f64 = 0.0;
    for p in &keep {
        let v = &p.pair.vector;
        if v.len() != h.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                found: v.len(),
            });
        }
        let r = residual(&h.entries, v, p.pair.value);
        if r > bound {
            return Err(Error::Unsupported(format!(
                "level {} is not closed under the Hamiltonian (residual {r:e})",
                p.unperturbed_index
            )));
        }
        closure_residual = closure_residual.max(r);
    }
    let vectors: Vec<DVector<Complex64>> = keep.iter().map(|p| p.pair.vector.clone()).collect();
    let k = vectors.len();
    let mut gram = DMatrix::<Complex64>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] = eta_inner(&vectors[i], &vectors[j])?;
        }
    }
    Ok(PhysicalSubspace {
        unperturbed_indices: keep.iter().map(|p| p.unperturbed_index).collect(),
        values: keep.iter().map(|p| p.pair.value).collect(),
        vectors,
        gram,
        closure_residual,
    })
}

fn residual(m: &CMatrix, v: &DVector<Complex64>, lambda: Complex64) -> f64 {
    (m * v - v * lambda).norm() / v.norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(n: usize, j: usize) -> DVector<Complex64> {
        let mut v = DVector::zeros(n);
        v[j] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn eta_inner_basis() {
        assert_eq!(eta_inner(&basis(3, 0), &basis(3, 0)).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(eta_inner(&basis(3, 1), &basis(3, 1)).unwrap(), Complex64::new(-1.0, 0.0));
        let u = basis(3, 0) + basis(3, 1);
        let v = basis(3, 0) - basis(3, 1);
        assert_eq!(eta_inner(&u, &v).unwrap(), Complex64::new(2.0, 0.0));
        assert!(eta_inner(&basis(3, 0), &basis(4, 0)).is_err());
    }

    #[test]
    fn free_levels_have_alternating_norms() {
        for k in [1, 3, 4] {
            let spec = OscillatorSpec::new(1.0, 0.0, k).unwrap();
            let norms = eigen_norms(&spec, 6, 24).unwrap();
            for (n, e) in norms.iter().enumerate() {
                assert_eq!(e.unperturbed_index, n);
                assert_eq!(e.eta_norm, parity_sign(n));
                assert!(e.sign_matches_parity());
            }
            let report = eta_orthogonality_defect(&norms).unwrap();
            assert_eq!(report.defect, 0.0);
            assert_eq!(report.checked, 15);
        }
    }

    #[test]
    fn cubic_small_coupling_signs() {
        let norms = eigen_norms(&OscillatorSpec::cubic(0.1), 6, 64).unwrap();
        for (n, e) in norms.iter().enumerate() {
            assert_eq!(e.unperturbed_index, n);
            assert!(e.sign_matches_parity());
            assert!(e.intermediate_eta_norm.abs() > 0.4);
            assert!(!e.near_zero);
        }
    }

    #[test]
    fn physical_subspace_at_zero_coupling() {
        let spec = OscillatorSpec::cubic(0.0);
        let h = build_pt_hamiltonian(&spec, 24).unwrap();
        let norms = eigen_norms(&spec, 6, 24).unwrap();
        let phys = physical_projector(&norms, &h).unwrap();
        assert_eq!(phys.unperturbed_indices, vec![0, 2, 4]);
        for (v, j) in phys.vectors.iter().zip([0, 2, 4]) {
            assert!((v - basis(24, j)).norm() < 1e-14);
        }
    }

    #[test]
    fn projector_refuses_undefined_sign() {
        let spec = OscillatorSpec::cubic(0.0);
        let h = build_pt_hamiltonian(&spec, 12).unwrap();
        let mut norms = eigen_norms(&spec, 3, 12).unwrap();
        norms[1].sign = None;
        norms[1].near_zero = true;
        assert!(matches!(
            physical_projector(&norms, &h),
            Err(Error::UndefinedSign { level: 1, .. })
        ));
    }

    #[test]
    fn orthogonality_skips_clusters() {
        let spec = OscillatorSpec::cubic(0.0);
        let mut norms = eigen_norms(&spec, 3, 12).unwrap();
        norms[1].pair.value = norms[0].pair.value;
        let report = eta_orthogonality_defect(&norms).unwrap();
        assert_eq!(report.skipped, vec![(0, 1)]);
        assert_eq!(report.checked, 2);
    }

    #[test]
    fn too_many_levels() {
        assert!(eigen_norms(&OscillatorSpec::cubic(0.1), 10, 12).is_err());
    }
}
