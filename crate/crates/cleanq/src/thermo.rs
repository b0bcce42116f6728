//! Gibbs states, partition functions, spectral gaps, trace distance, von
//! Neumann entropy, and the Araki-Lieb subadditivity checker.
//!
//! Entropies are in bits (base-2 logarithms), so the DQC input on `b` mixed
//! qubits has entropy exactly `b`. Hamiltonians are shifted to ground energy
//! 0 before exponentiation, which leaves the Gibbs state unchanged and keeps
//! `exp(-β H)` well scaled.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channels::{partial_trace, partial_trace_bottom};
use crate::circuits::random_density_matrix;
use crate::error::{Error, Result};
use crate::linalg::{checked_dim, hermitian_eig, trace_norm, ComplexMatrix, HERMITIAN_TOL};
use crate::registers::DensityMatrix;

/// Eigenvalues closer than this are treated as one level when measuring the
/// spectral gap.
pub const GAP_DISTINCTNESS_TOL: f64 = 1e-9;
/// Eigenvalues at or below this are dropped from entropy sums; PSD holds
/// only up to tolerance, so small negatives are clamped too.
pub const ENTROPY_EIGENVALUE_FLOOR: f64 = 1e-12;

/// Hermitian Hamiltonian on `qubits` qubits, energies dimensionless.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    qubits: usize,
    matrix: ComplexMatrix,
}

impl Hamiltonian {
    pub fn new(qubits: usize, matrix: ComplexMatrix) -> Result<Self> {
        let dim = checked_dim(qubits)?;
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "Hamiltonian on {qubits} qubits must be {dim}x{dim}, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let dev = matrix.hermiticity_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                dev,
                tol: HERMITIAN_TOL,
            });
        }
        Ok(Self { qubits, matrix })
    }

    /// Diagonal Hamiltonian from listed energies.
    pub fn diagonal(qubits: usize, energies: &[f64]) -> Result<Self> {
        let dim = checked_dim(qubits)?;
        if energies.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {dim} diagonal energies, got {}",
                energies.len()
            )));
        }
        Self::new(qubits, ComplexMatrix::from_diagonal(energies))
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum HamiltonianRepr {
    Dense { d: usize, entries: Vec<[f64; 2]> },
    Diagonal { d: usize, diagonal: Vec<f64> },
}

impl Serialize for Hamiltonian {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        HamiltonianRepr::Dense {
            d: self.qubits,
            entries: self.matrix.entries().iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Hamiltonian {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match HamiltonianRepr::deserialize(deserializer)? {
            HamiltonianRepr::Dense { d, entries } => {
                let dim = checked_dim(d).map_err(D::Error::custom)?;
                let entries = entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
                let matrix = ComplexMatrix::new(dim, dim, entries).map_err(D::Error::custom)?;
                Hamiltonian::new(d, matrix).map_err(D::Error::custom)
            }
            HamiltonianRepr::Diagonal { d, diagonal } => {
                Hamiltonian::diagonal(d, &diagonal).map_err(D::Error::custom)
            }
        }
    }
}

/// Ground energy, spectral gap, ground eigenvector, and degeneracy flag.
/// A degenerate least eigenvalue reports gap 0 with the flag set.
#[derive(Clone, Debug)]
pub struct GapInfo {
    pub ground_energy: f64,
    pub gap: f64,
    pub ground_state: Vec<Complex64>,
    pub degenerate: bool,
}

impl GapInfo {
    /// Rank-one projector onto the ground eigenvector.
    pub fn ground_projector(&self) -> Result<DensityMatrix> {
        crate::registers::pure_state(&self.ground_state)
    }
}

/// The Gibbs state `exp(-βH) / tr exp(-βH)`, computed by eigendecomposition
/// with an internal ground-energy shift.
pub fn gibbs_state(h: &Hamiltonian, beta: f64) -> Result<DensityMatrix> {
    if !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be finite, got {beta}")));
    }
    let eig = hermitian_eig(h.matrix())?;
    // Shift toward whichever end exp(-β·) would blow up from.
    let shift = if beta >= 0.0 {
        eig.eigenvalues[0]
    } else {
        *eig.eigenvalues.last().expect("non-empty spectrum")
    };
    let weights: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|l| (-beta * (l - shift)).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let dim = h.dim();
    let v = &eig.eigenvectors;
    let mut rho = ComplexMatrix::from_fn(dim, dim, |r, c| {
        (0..dim)
            .map(|k| v.get(r, k) * Complex64::new(weights[k] / z, 0.0) * v.get(c, k).conj())
            .sum()
    });
    rho.hermitian_symmetrize();
    Ok(DensityMatrix::trusted(rho))
}

/// Partition function `Σ_i exp(-β λ_i)` after the ground shift, so the
/// value lies in `[1, 2^d]` for `β ≥ 0`.
pub fn partition_function(h: &Hamiltonian, beta: f64) -> Result<f64> {
    if !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be finite, got {beta}")));
    }
    let eig = hermitian_eig(h.matrix())?;
    let ground = eig.eigenvalues[0];
    Ok(eig.eigenvalues.iter().map(|l| (-beta * (l - ground)).exp()).sum())
}

/// Ground energy and gap to the next distinct eigenvalue (distinctness
/// tolerance 1e-9).
pub fn spectral_gap(h: &Hamiltonian) -> Result<GapInfo> {
    let eig = hermitian_eig(h.matrix())?;
    let ground_energy = eig.eigenvalues[0];
    let dim = h.dim();
    let ground_state: Vec<Complex64> = (0..dim).map(|r| eig.eigenvectors.get(r, 0)).collect();
    let degenerate = dim > 1 && eig.eigenvalues[1] - ground_energy <= GAP_DISTINCTNESS_TOL;
    let gap = if degenerate {
        0.0
    } else {
        eig.eigenvalues
            .iter()
            .find(|&&l| l - ground_energy > GAP_DISTINCTNESS_TOL)
            .map(|l| l - ground_energy)
            .unwrap_or(0.0)
    };
    Ok(GapInfo {
        ground_energy,
        gap,
        ground_state,
        degenerate,
    })
}

/// The inverse temperature above which a `gamma`-gapped Hamiltonian on `d`
/// qubits has its Gibbs state within trace distance `eps_prime` of the
/// ground projector: `(d ln2 + ln((1-ε')/ε')) / γ`.
pub fn beta_threshold(d: usize, gamma: f64, eps_prime: f64) -> Result<f64> {
    if gamma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "beta_threshold needs a positive gap, got {gamma}"
        )));
    }
    if !(0.0..1.0).contains(&eps_prime) || eps_prime == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "eps_prime must lie in (0, 1), got {eps_prime}"
        )));
    }
    Ok((d as f64 * std::f64::consts::LN_2 + ((1.0 - eps_prime) / eps_prime).ln()) / gamma)
}

/// Trace distance `d(σ, σ') = ½ ‖σ − σ'‖₁`.
pub fn trace_distance(s1: &DensityMatrix, s2: &DensityMatrix) -> Result<f64> {
    if s1.dim() != s2.dim() {
        return Err(Error::DimensionMismatch(format!(
            "trace distance needs equal dimensions, got {} and {}",
            s1.dim(),
            s2.dim()
        )));
    }
    Ok(0.5 * trace_norm(&s1.matrix().sub(s2.matrix()))?)
}

/// Von Neumann entropy `−Σ λ log₂ λ` in bits, over eigenvalues above the
/// clamp floor.
pub fn von_neumann_entropy(state: &DensityMatrix) -> f64 {
    let eig = hermitian_eig(state.matrix()).expect("density matrices are Hermitian");
    eig.eigenvalues
        .iter()
        .filter(|&&l| l > ENTROPY_EIGENVALUE_FLOOR)
        .map(|&l| -l * l.log2())
        .sum()
}

/// Araki-Lieb subadditivity data for the split after the top `c` qubits:
/// returns `(H(σ), H(tr_C σ) + H(tr_D σ))`; the first never exceeds the
/// second (up to tolerance).
pub fn araki_lieb_check(state: &DensityMatrix, c: usize) -> Result<(f64, f64)> {
    let n = state.qubits();
    if c > n {
        return Err(Error::DimensionMismatch(format!(
            "cannot split {n} qubits at {c}"
        )));
    }
    let lhs = von_neumann_entropy(state);
    let on_d = partial_trace(state, c)?;
    let on_c = partial_trace_bottom(state, n - c)?;
    Ok((lhs, von_neumann_entropy(&on_d) + von_neumann_entropy(&on_c)))
}

/// Convex perturbation `σ̃ = (1-p) σ + p τ` with a seeded random `τ`, with
/// `p` chosen so the trace distance to `σ` is at most `eps`. Returns the
/// perturbed state and the actual distance; mixing keeps the output PSD
/// without any projection step.
pub fn perturb(state: &DensityMatrix, eps: f64, seed: u64) -> Result<(DensityMatrix, f64)> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in [0, 1], got {eps}"
        )));
    }
    if eps == 0.0 {
        return Ok((state.clone(), 0.0));
    }
    let tau = random_density_matrix(state.qubits(), seed)?;
    let full_distance = trace_distance(state, &tau)?;
    let p = if full_distance <= eps {
        1.0
    } else {
        eps / full_distance
    };
    let mixed = state
        .matrix()
        .scale(Complex64::new(1.0 - p, 0.0))
        .add(&tau.matrix().scale(Complex64::new(p, 0.0)));
    let perturbed = DensityMatrix::trusted(mixed);
    let actual = trace_distance(state, &perturbed)?;
    Ok((perturbed, actual))
}
