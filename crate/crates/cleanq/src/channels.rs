//! The two output channels of a DQC-k machine.
//!
//! Discarding: `E_{U,C}(σ) = tr_C U σ U†`. Measuring: `E'_{U,C}` projectively
//! measures register `C` in the computational basis, yielding outcomes
//! `(j, p_j, S_j)` with `T_j(σ) = (⟨j|_C ⊗ id_D) σ (|j⟩_C ⊗ id_D)`,
//! `p_j = tr T_j`, and `S_j = T_j / p_j`.
//!
//! The traced register is always the top `c` wires; callers with other
//! assignments conjugate by a permutation unitary first.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{trace_norm, ComplexMatrix, UnitaryMatrix};
use crate::registers::{DensityMatrix, RegisterLayout};

/// Outcomes with probability at or below this are reported without a
/// post-state: `S_j = T_j / p_j` is undefined at `p_j = 0`.
pub const ZERO_PROBABILITY_THRESHOLD: f64 = 1e-12;

/// One projective outcome on register `C`: its basis label, probability,
/// and post-measurement state on `D` (absent when the probability is
/// numerically zero).
#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    pub index: usize,
    pub probability: f64,
    pub post_state: Option<DensityMatrix>,
}

#[derive(Serialize, Deserialize)]
struct OutcomeRepr {
    j: usize,
    p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<DensityMatrix>,
}

impl Serialize for MeasurementOutcome {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        OutcomeRepr {
            j: self.index,
            p: self.probability,
            state: self.post_state.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MeasurementOutcome {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = OutcomeRepr::deserialize(deserializer)?;
        if !(0.0..=1.0 + 1e-9).contains(&repr.p) {
            return Err(D::Error::custom(format!(
                "outcome probability {} outside [0, 1]",
                repr.p
            )));
        }
        Ok(MeasurementOutcome {
            index: repr.j,
            probability: repr.p,
            post_state: repr.state,
        })
    }
}

/// `U σ U†`; preserves trace and spectrum.
pub fn apply_unitary(state: &DensityMatrix, u: &UnitaryMatrix) -> Result<DensityMatrix> {
    if u.dim() != state.dim() {
        return Err(Error::DimensionMismatch(format!(
            "unitary is {}x{} but state is {}x{}",
            u.dim(),
            u.dim(),
            state.dim(),
            state.dim()
        )));
    }
    let mut m = u.matrix().mul(state.matrix()).mul(&u.matrix().dagger());
    m.hermitian_symmetrize();
    Ok(DensityMatrix::trusted(m))
}

/// Partial trace over the top `traced` qubits of a square matrix on
/// `2^n`-dimensional space: entry `(y, y')` of the result is
/// `Σ_j m[j*D + y][j*D + y']`.
pub fn partial_trace_matrix(m: &ComplexMatrix, traced: usize) -> Result<ComplexMatrix> {
    let dim = m.rows();
    if !m.is_square() || !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!(
            "partial trace needs a square power-of-two matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = dim.trailing_zeros() as usize;
    if traced > n {
        return Err(Error::DimensionMismatch(format!(
            "cannot trace {traced} of {n} qubits"
        )));
    }
    let keep_dim = 1usize << (n - traced);
    let blocks = 1usize << traced;
    let mut out = ComplexMatrix::zeros(keep_dim, keep_dim);
    for j in 0..blocks {
        let base = j * keep_dim;
        for y in 0..keep_dim {
            for y2 in 0..keep_dim {
                let acc = out.get(y, y2) + m.get(base + y, base + y2);
                out.set(y, y2, acc);
            }
        }
    }
    Ok(out)
}

/// Partial trace over the bottom `traced` qubits: entry `(j, j')` is
/// `Σ_y m[j*F + y][j'*F + y]` with `F = 2^traced`.
pub fn partial_trace_bottom_matrix(m: &ComplexMatrix, traced: usize) -> Result<ComplexMatrix> {
    let dim = m.rows();
    if !m.is_square() || !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!(
            "partial trace needs a square power-of-two matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = dim.trailing_zeros() as usize;
    if traced > n {
        return Err(Error::DimensionMismatch(format!(
            "cannot trace {traced} of {n} qubits"
        )));
    }
    let keep_dim = 1usize << (n - traced);
    let block = 1usize << traced;
    let mut out = ComplexMatrix::zeros(keep_dim, keep_dim);
    for j in 0..keep_dim {
        for j2 in 0..keep_dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for y in 0..block {
                acc += m.get(j * block + y, j2 * block + y);
            }
            out.set(j, j2, acc);
        }
    }
    Ok(out)
}

/// Discards the top `traced` qubits of a state. `traced = 0` is the
/// identity; `traced = n` leaves the trivial one-dimensional state.
pub fn partial_trace(state: &DensityMatrix, traced: usize) -> Result<DensityMatrix> {
    let m = partial_trace_matrix(state.matrix(), traced)?;
    Ok(DensityMatrix::trusted(m))
}

/// Discards the bottom `traced` qubits of a state.
pub fn partial_trace_bottom(state: &DensityMatrix, traced: usize) -> Result<DensityMatrix> {
    let m = partial_trace_bottom_matrix(state.matrix(), traced)?;
    Ok(DensityMatrix::trusted(m))
}

fn check_channel_dims(u: &UnitaryMatrix, layout: &RegisterLayout, state: &DensityMatrix) -> Result<()> {
    let dim = layout.dim()?;
    if u.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "circuit dimension {} does not match layout dimension {}",
            u.dim(),
            dim
        )));
    }
    if state.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} does not match layout dimension {}",
            state.dim(),
            dim
        )));
    }
    Ok(())
}

/// The discarding channel `E_{U,C}(σ) = tr_C U σ U†`.
pub fn discarding_channel(
    u: &UnitaryMatrix,
    layout: &RegisterLayout,
    state: &DensityMatrix,
) -> Result<DensityMatrix> {
    check_channel_dims(u, layout, state)?;
    partial_trace(&apply_unitary(state, u)?, layout.c())
}

/// The measuring channel `E'_{U,C}`: all `2^c` outcomes of a computational
/// basis measurement of register `C` on `U σ U†`.
pub fn measuring_channel(
    u: &UnitaryMatrix,
    layout: &RegisterLayout,
    state: &DensityMatrix,
) -> Result<Vec<MeasurementOutcome>> {
    check_channel_dims(u, layout, state)?;
    let evolved = apply_unitary(state, u)?;
    let c_dim = 1usize << layout.c();
    let d_dim = 1usize << layout.d();
    let mut outcomes = Vec::with_capacity(c_dim);
    for j in 0..c_dim {
        let base = j * d_dim;
        let block = ComplexMatrix::from_fn(d_dim, d_dim, |y, y2| {
            evolved.entry(base + y, base + y2)
        });
        let p = block.trace().re;
        if p > ZERO_PROBABILITY_THRESHOLD {
            let mut normalized = block.scale(Complex64::new(1.0 / p, 0.0));
            normalized.hermitian_symmetrize();
            outcomes.push(MeasurementOutcome {
                index: j,
                probability: p,
                post_state: Some(DensityMatrix::trusted(normalized)),
            });
        } else {
            outcomes.push(MeasurementOutcome {
                index: j,
                probability: p.max(0.0),
                post_state: None,
            });
        }
    }
    Ok(outcomes)
}

/// Evaluates `(1/B) Σ_{j<C} Σ_{x<B} |u_{jD,x}|²` directly from the entries
/// of `u`. For the DQC input this equals the `(0,0)` entry of the discarding
/// channel output, and each of the `C` inner sums is a partial column norm,
/// so the value never exceeds `C/B = 2^{a-d}`.
pub fn entry00_direct(u: &UnitaryMatrix, layout: &RegisterLayout) -> Result<f64> {
    let dim = layout.dim()?;
    if u.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "circuit dimension {} does not match layout dimension {}",
            u.dim(),
            dim
        )));
    }
    let b_dim = 1usize << layout.b();
    let c_dim = 1usize << layout.c();
    let d_dim = 1usize << layout.d();
    let mut sum = 0.0;
    for j in 0..c_dim {
        let row = j * d_dim;
        for x in 0..b_dim {
            sum += u.entry(row, x).norm_sqr();
        }
    }
    Ok(sum / b_dim as f64)
}

/// Total probability of the outcomes whose post-state lies within trace
/// distance `eps_prime` of a pure `target`. The exact-synthesis case is
/// `eps_prime = 0`, implemented as trace distance at most 1e-9.
pub fn pure_outcome_probability(
    outcomes: &[MeasurementOutcome],
    target: &DensityMatrix,
    eps_prime: f64,
) -> Result<f64> {
    if !(0.0..1.0).contains(&eps_prime) {
        return Err(Error::InvalidParameter(format!(
            "eps_prime must lie in [0, 1), got {eps_prime}"
        )));
    }
    let purity = target.purity();
    if (purity - 1.0).abs() > 1e-9 {
        return Err(Error::NotPure(purity));
    }
    let mut total = 0.0;
    for outcome in outcomes {
        let Some(state) = &outcome.post_state else {
            continue;
        };
        if state.dim() != target.dim() {
            return Err(Error::DimensionMismatch(format!(
                "outcome state dimension {} does not match target dimension {}",
                state.dim(),
                target.dim()
            )));
        }
        let distance = 0.5 * trace_norm(&state.matrix().sub(target.matrix()))?;
        if distance <= eps_prime + 1e-9 {
            total += outcome.probability;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{haar_random, random_density_matrix};
    use crate::registers::{computational_zero, dqc_input, maximally_mixed, permutation_unitary, pure_state};
    use crate::thermo::von_neumann_entropy;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Kraus-operator oracle for the partial trace: `Σ_j K_j σ K_j†` with
    /// `K_j = ⟨j|_C ⊗ id_D` built explicitly as a D x N matrix.
    fn partial_trace_oracle(m: &ComplexMatrix, traced: usize) -> ComplexMatrix {
        let dim = m.rows();
        let n = dim.trailing_zeros() as usize;
        let keep = 1usize << (n - traced);
        let blocks = 1usize << traced;
        let mut out = ComplexMatrix::zeros(keep, keep);
        for j in 0..blocks {
            let mut k = ComplexMatrix::zeros(keep, dim);
            for y in 0..keep {
                k.set(y, j * keep + y, c(1.0, 0.0));
            }
            out = out.add(&k.mul(m).mul(&k.dagger()));
        }
        out
    }

    #[test]
    fn apply_unitary_identity_and_flip() {
        let layout = RegisterLayout::new(1, 1, 1, 1).unwrap();
        let rho = dqc_input(&layout).unwrap();
        let id = UnitaryMatrix::identity(4);
        assert!(apply_unitary(&rho, &id)
            .unwrap()
            .matrix()
            .max_abs_diff(rho.matrix()) == 0.0);

        let x = UnitaryMatrix::new(
            ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
                .unwrap(),
        )
        .unwrap();
        let zero = computational_zero(1).unwrap();
        let one = apply_unitary(&zero, &x).unwrap();
        assert_eq!(one.entry(1, 1), c(1.0, 0.0));
        assert_eq!(one.entry(0, 0), c(0.0, 0.0));
    }

    #[test]
    fn apply_unitary_preserves_entropy() {
        let sigma = random_density_matrix(2, 11).unwrap();
        let u = haar_random(2, 12).unwrap();
        let evolved = apply_unitary(&sigma, &u).unwrap();
        assert!((von_neumann_entropy(&sigma) - von_neumann_entropy(&evolved)).abs() <= 1e-9);
    }

    #[test]
    fn partial_trace_product_state() {
        let tau = random_density_matrix(1, 5).unwrap();
        let omega = random_density_matrix(2, 6).unwrap();
        let joint = DensityMatrix::new(tau.matrix().kron(omega.matrix()).unwrap()).unwrap();
        let back = partial_trace(&joint, 1).unwrap();
        assert!(back.matrix().max_abs_diff(omega.matrix()) <= 1e-12);
        let front = partial_trace_bottom(&joint, 2).unwrap();
        assert!(front.matrix().max_abs_diff(tau.matrix()) <= 1e-12);
    }

    #[test]
    fn partial_trace_bell_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = pure_state(&[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).unwrap();
        let reduced = partial_trace(&bell, 1).unwrap();
        assert!(reduced
            .matrix()
            .max_abs_diff(maximally_mixed(1).unwrap().matrix())
            <= 1e-12);
    }

    #[test]
    fn partial_trace_edge_counts() {
        let sigma = random_density_matrix(2, 7).unwrap();
        let same = partial_trace(&sigma, 0).unwrap();
        assert_eq!(same.matrix().max_abs_diff(sigma.matrix()), 0.0);
        let scalar = partial_trace(&sigma, 2).unwrap();
        assert_eq!(scalar.dim(), 1);
        assert!((scalar.entry(0, 0) - c(1.0, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn partial_trace_matches_kraus_oracle() {
        for n in 1..=6usize {
            let sigma = random_density_matrix(n, 40 + n as u64).unwrap();
            for traced in 0..=n {
                let fast = partial_trace_matrix(sigma.matrix(), traced).unwrap();
                let oracle = partial_trace_oracle(sigma.matrix(), traced);
                assert!(fast.max_abs_diff(&oracle) <= 1e-12);
            }
        }
    }

    #[test]
    fn discarding_identity_circuit() {
        let layout = RegisterLayout::new(1, 2, 1, 2).unwrap();
        let rho = dqc_input(&layout).unwrap();
        let out = discarding_channel(&UnitaryMatrix::identity(8), &layout, &rho).unwrap();
        assert!((out.entry(0, 0) - c(0.25, 0.0)).norm() <= 1e-12);
        assert!(out
            .matrix()
            .max_abs_diff(maximally_mixed(2).unwrap().matrix())
            <= 1e-12);
        // 1/4 is below the layout bound C/B = 1/2.
        assert!(out.entry(0, 0).re <= 0.5 + 1e-10);
    }

    #[test]
    fn discarding_swap_saturates() {
        let layout = RegisterLayout::new(1, 2, 1, 2).unwrap();
        let rho = dqc_input(&layout).unwrap();
        let swap01 = permutation_unitary(&[1, 0, 2], 3).unwrap();
        let out = discarding_channel(&swap01, &layout, &rho).unwrap();
        assert!((out.entry(0, 0) - c(0.5, 0.0)).norm() <= 1e-12);
        let expected = computational_zero(1)
            .unwrap()
            .matrix()
            .kron(maximally_mixed(1).unwrap().matrix())
            .unwrap();
        assert!(out.matrix().max_abs_diff(&expected) <= 1e-12);
    }

    #[test]
    fn discarding_preserves_trace() {
        let layout = RegisterLayout::new(1, 2, 2, 1).unwrap();
        let rho = dqc_input(&layout).unwrap();
        for seed in 0..5 {
            let u = haar_random(3, seed).unwrap();
            let out = discarding_channel(&u, &layout, &rho).unwrap();
            assert!((out.matrix().trace().re - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn measuring_swap_example() {
        let layout = RegisterLayout::new(1, 2, 1, 2).unwrap();
        let rho = dqc_input(&layout).unwrap();
        let swap01 = permutation_unitary(&[1, 0, 2], 3).unwrap();
        let outcomes = measuring_channel(&swap01, &layout, &rho).unwrap();
        assert_eq!(outcomes.len(), 2);
        let expected = computational_zero(1)
            .unwrap()
            .matrix()
            .kron(maximally_mixed(1).unwrap().matrix())
            .unwrap();
        for outcome in &outcomes {
            assert!((outcome.probability - 0.5).abs() <= 1e-12);
            let state = outcome.post_state.as_ref().unwrap();
            assert!(state.matrix().max_abs_diff(&expected) <= 1e-12);
        }
    }

    #[test]
    fn measuring_trivial_register() {
        let layout = RegisterLayout::new(1, 0, 0, 1).unwrap();
        let rho = dqc_input(&layout).unwrap();
        let outcomes = measuring_channel(&UnitaryMatrix::identity(2), &layout, &rho).unwrap();
        assert_eq!(outcomes.len(), 1);
        assert!((outcomes[0].probability - 1.0).abs() <= 1e-12);
        assert!(outcomes[0].post_state.as_ref().unwrap().is_pure(1e-10));
    }

    #[test]
    fn measuring_outcomes_mix_to_discard_output() {
        let layout = RegisterLayout::new(1, 2, 2, 1).unwrap();
        let rho = dqc_input(&layout).unwrap();
        for seed in 0..6u64 {
            let u = haar_random(3, 100 + seed).unwrap();
            let outcomes = measuring_channel(&u, &layout, &rho).unwrap();
            let total: f64 = outcomes.iter().map(|o| o.probability).sum();
            assert!((total - 1.0).abs() <= 1e-10);

            let mut mixed = ComplexMatrix::zeros(2, 2);
            for o in &outcomes {
                if let Some(state) = &o.post_state {
                    mixed = mixed.add(&state.matrix().scale(c(o.probability, 0.0)));
                }
            }
            let discard = discarding_channel(&u, &layout, &rho).unwrap();
            assert!(mixed.max_abs_diff(discard.matrix()) <= 1e-10);

            for o in &outcomes {
                if o.probability > ZERO_PROBABILITY_THRESHOLD {
                    o.post_state.as_ref().unwrap().validate().unwrap();
                }
            }
        }
    }

    #[test]
    fn entry00_direct_examples() {
        let layout = RegisterLayout::new(1, 2, 1, 2).unwrap();
        let id = UnitaryMatrix::identity(8);
        assert!((entry00_direct(&id, &layout).unwrap() - 0.25).abs() <= 1e-12);

        let swap01 = permutation_unitary(&[1, 0, 2], 3).unwrap();
        assert!((entry00_direct(&swap01, &layout).unwrap() - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn entry00_matches_channel_and_respects_bound() {
        for (a, b, cc, d) in [(1usize, 2usize, 1usize, 2usize), (1, 3, 2, 2), (0, 3, 1, 2), (2, 2, 1, 3)] {
            let layout = RegisterLayout::new(a, b, cc, d).unwrap();
            let rho = dqc_input(&layout).unwrap();
            let bound = (2.0f64).powi(a as i32 - d as i32);
            for seed in 0..8u64 {
                let u = haar_random(layout.n(), 31 * seed + 7).unwrap();
                let channel_entry = discarding_channel(&u, &layout, &rho).unwrap().entry(0, 0).re;
                let direct = entry00_direct(&u, &layout).unwrap();
                assert!((channel_entry - direct).abs() <= 1e-10);
                assert!(direct <= bound + 1e-10);
            }
        }
    }

    #[test]
    fn pure_outcome_probability_examples() {
        // SWAP forwarding on (1,2,1,2): post-states are mixed, so the exact
        // pure-outcome probability is zero.
        let layout = RegisterLayout::new(1, 2, 1, 2).unwrap();
        let rho = dqc_input(&layout).unwrap();
        let swap01 = permutation_unitary(&[1, 0, 2], 3).unwrap();
        let outcomes = measuring_channel(&swap01, &layout, &rho).unwrap();
        let target = computational_zero(2).unwrap();
        assert_eq!(
            pure_outcome_probability(&outcomes, &target, 0.0).unwrap(),
            0.0
        );

        // Clean qubit passing straight through: probability 1.
        let trivial = RegisterLayout::new(1, 0, 0, 1).unwrap();
        let rho = dqc_input(&trivial).unwrap();
        let outcomes = measuring_channel(&UnitaryMatrix::identity(2), &trivial, &rho).unwrap();
        let target = computational_zero(1).unwrap();
        assert!((pure_outcome_probability(&outcomes, &target, 0.0).unwrap() - 1.0).abs() <= 1e-12);

        // Probabilities sum to one, so the result can never exceed it.
        let layout = RegisterLayout::new(1, 2, 2, 1).unwrap();
        let rho = dqc_input(&layout).unwrap();
        let target = computational_zero(1).unwrap();
        for seed in 0..5u64 {
            let u = haar_random(3, 55 + seed).unwrap();
            let outcomes = measuring_channel(&u, &layout, &rho).unwrap();
            let p = pure_outcome_probability(&outcomes, &target, 0.3).unwrap();
            assert!(p <= 1.0 + 1e-9);
        }

        let mixed_target = maximally_mixed(1).unwrap();
        assert!(matches!(
            pure_outcome_probability(&[], &mixed_target, 0.0),
            Err(Error::NotPure(_))
        ));
    }

    #[test]
    fn outcome_json_round_trip() {
        let layout = RegisterLayout::new(1, 1, 1, 1).unwrap();
        let rho = dqc_input(&layout).unwrap();
        let outcomes = measuring_channel(&UnitaryMatrix::identity(4), &layout, &rho).unwrap();
        let json = serde_json::to_string(&outcomes).unwrap();
        let back: Vec<MeasurementOutcome> = serde_json::from_str(&json).unwrap();
        assert_eq!(back.len(), outcomes.len());
        for (x, y) in back.iter().zip(&outcomes) {
            assert_eq!(x.index, y.index);
            assert_eq!(x.probability, y.probability);
            assert_eq!(x.post_state.is_some(), y.post_state.is_some());
        }
    }
}
