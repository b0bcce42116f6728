//! Register bookkeeping and canonical state constructors.
//!
//! A machine layout splits `n` wires two ways: input registers `A` (clean,
//! `a` qubits) over `B` (maximally mixed, `b` qubits), and output registers
//! `C` (measured or discarded, `c` qubits, canonically the top wires) over
//! `D` (kept, `d` qubits), with `a + b = c + d = n`.
//!
//! Qubit 0 is the most significant bit of a basis index (top wire), so the
//! block `|j⟩_C ⊗ id_D` occupies rows `j*D .. (j+1)*D`.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{checked_dim, hermitian_eig, ComplexMatrix, UnitaryMatrix, HERMITIAN_TOL};

/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalue floor for positive semidefiniteness checks.
pub const PSD_TOL: f64 = 1e-10;

/// Register sizes `a, b, c, d` plus the wire orders mapping physical wires
/// to registers. The canonical layout has `A` on the top `a` wires and `C`
/// on the top `c` wires; non-canonical orders are normalized by conjugating
/// circuits with [`permutation_unitary`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    a: usize,
    b: usize,
    c: usize,
    d: usize,
    input_order: Vec<usize>,
    output_order: Vec<usize>,
}

impl RegisterLayout {
    /// Canonical layout: identity wire orders.
    pub fn new(a: usize, b: usize, c: usize, d: usize) -> Result<Self> {
        Self::with_orders(a, b, c, d, (0..a + b).collect(), (0..c + d).collect())
    }

    /// Layout with explicit wire orders; both must be bijections on
    /// `{0..n-1}`.
    pub fn with_orders(
        a: usize,
        b: usize,
        c: usize,
        d: usize,
        input_order: Vec<usize>,
        output_order: Vec<usize>,
    ) -> Result<Self> {
        if a + b != c + d {
            return Err(Error::InvalidLayout(format!(
                "a+b must equal c+d, got {}+{} vs {}+{}",
                a, b, c, d
            )));
        }
        let n = a + b;
        if n == 0 {
            return Err(Error::InvalidLayout("layout needs at least one qubit".into()));
        }
        check_permutation(&input_order, n)?;
        check_permutation(&output_order, n)?;
        Ok(Self {
            a,
            b,
            c,
            d,
            input_order,
            output_order,
        })
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.a + self.b
    }

    pub fn input_order(&self) -> &[usize] {
        &self.input_order
    }

    pub fn output_order(&self) -> &[usize] {
        &self.output_order
    }

    pub fn is_canonical(&self) -> bool {
        self.input_order.iter().enumerate().all(|(i, &p)| i == p)
            && self.output_order.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// Total Hilbert-space dimension `2^n`, cap-checked.
    pub fn dim(&self) -> Result<usize> {
        checked_dim(self.n())
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::InvalidPermutation(format!(
            "permutation has length {}, expected {}",
            perm.len(),
            n
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation(format!(
                "not a bijection on 0..{}",
                n
            )));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Density matrix on `qubits` qubits: Hermitian, unit trace, positive
/// semidefinite (all up to the crate tolerances).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validating constructor; checks Hermiticity, trace, and (via an
    /// eigendecomposition) positive semidefiniteness.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let state = Self::shape_checked(matrix)?;
        state.validate()?;
        Ok(state)
    }

    fn shape_checked(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotDensityMatrix(format!(
                "must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let dim = matrix.rows();
        if !dim.is_power_of_two() {
            return Err(Error::NotDensityMatrix(format!(
                "dimension {} is not a power of two",
                dim
            )));
        }
        Ok(Self {
            qubits: dim.trailing_zeros() as usize,
            matrix,
        })
    }

    /// Wraps a matrix known to satisfy the invariants by construction.
    /// Debug builds still verify the cheap (quadratic-time) checks.
    pub(crate) fn trusted(matrix: ComplexMatrix) -> Self {
        let state = Self::shape_checked(matrix).expect("trusted density matrix shape");
        debug_assert!(
            state.matrix.hermiticity_deviation() <= HERMITIAN_TOL,
            "trusted density matrix must be Hermitian"
        );
        debug_assert!(
            (state.matrix.trace().re - 1.0).abs() <= TRACE_TOL,
            "trusted density matrix must have unit trace"
        );
        state
    }

    /// Full invariant check: Hermitian and unit trace at 1e-10, eigenvalues
    /// at least -1e-10.
    pub fn validate(&self) -> Result<()> {
        let dev = self.matrix.hermiticity_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotDensityMatrix(format!(
                "Hermiticity deviation {dev:.3e} exceeds {HERMITIAN_TOL:.1e}"
            )));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::NotDensityMatrix(format!(
                "trace {}+{}i is not 1 within {TRACE_TOL:.1e}",
                tr.re, tr.im
            )));
        }
        let eig = hermitian_eig(&self.matrix)?;
        if let Some(&min) = eig
            .eigenvalues
            .first()
            .filter(|&&l| l < -PSD_TOL)
        {
            return Err(Error::NotDensityMatrix(format!(
                "negative eigenvalue {min:.3e} below -{PSD_TOL:.1e}"
            )));
        }
        Ok(())
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

    #[inline]
    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.matrix.get(r, c)
    }

    /// `tr(ρ²)`; 1 exactly for pure states, `1/2^n` for maximally mixed.
    pub fn purity(&self) -> f64 {
        let n = self.dim();
        let mut p = 0.0;
        for r in 0..n {
            for c in 0..n {
                // tr(ρ²) = Σ |ρ_{rc}|² for Hermitian ρ.
                p += self.matrix.get(r, c).norm_sqr();
            }
        }
        p
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - 1.0).abs() <= tol
    }
}

#[derive(Serialize, Deserialize)]
struct DensityMatrixRepr {
    n: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = DensityMatrixRepr {
            n: self.qubits,
            entries: self
                .matrix
                .entries()
                .iter()
                .map(|z| [z.re, z.im])
                .collect(),
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = DensityMatrixRepr::deserialize(deserializer)?;
        let dim = checked_dim(repr.n).map_err(D::Error::custom)?;
        let entries = repr
            .entries
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        let matrix = ComplexMatrix::new(dim, dim, entries).map_err(D::Error::custom)?;
        DensityMatrix::new(matrix).map_err(D::Error::custom)
    }
}

/// The DQC-k input state `|0⟩⟨0|_A ⊗ (1/2^b) id_B`: `1/B` times the
/// projector whose top-left block is a `B`-dimensional identity.
pub fn dqc_input(layout: &RegisterLayout) -> Result<DensityMatrix> {
    let dim = layout.dim()?;
    let b_dim = checked_dim(layout.b())?;
    let weight = Complex64::new(1.0 / b_dim as f64, 0.0);
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..b_dim {
        m.set(i, i, weight);
    }
    Ok(DensityMatrix::trusted(m))
}

/// Rank-one projector `|ψ⟩⟨ψ|` from a normalized amplitude vector whose
/// length is a power of two.
pub fn pure_state(amplitudes: &[Complex64]) -> Result<DensityMatrix> {
    if amplitudes.is_empty() || !amplitudes.len().is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "amplitude vector length {} is not a power of two",
            amplitudes.len()
        )));
    }
    let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
    if (norm_sqr.sqrt() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "amplitude vector norm {} is not 1 within 1e-10",
            norm_sqr.sqrt()
        )));
    }
    let dim = amplitudes.len();
    let m = ComplexMatrix::from_fn(dim, dim, |r, c| amplitudes[r] * amplitudes[c].conj());
    Ok(DensityMatrix::trusted(m))
}

/// `|0…0⟩⟨0…0|` on `qubits` qubits.
pub fn computational_zero(qubits: usize) -> Result<DensityMatrix> {
    let dim = checked_dim(qubits)?;
    let mut m = ComplexMatrix::zeros(dim, dim);
    m.set(0, 0, Complex64::new(1.0, 0.0));
    Ok(DensityMatrix::trusted(m))
}

/// The maximally mixed state `(1/2^m) id`. `m = 0` yields the trivial 1x1
/// factor so degenerate registers keep the theorem checkers total.
pub fn maximally_mixed(qubits: usize) -> Result<DensityMatrix> {
    let dim = checked_dim(qubits)?;
    let m = ComplexMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0));
    Ok(DensityMatrix::trusted(m))
}

/// Unitary realizing a wire permutation: basis state `|x_0…x_{n-1}⟩` maps to
/// the state whose bit at position `perm[i]` is `x_i`. Composition satisfies
/// `permutation_unitary(p ∘ q) = permutation_unitary(p) · permutation_unitary(q)`.
pub fn permutation_unitary(perm: &[usize], n: usize) -> Result<UnitaryMatrix> {
    check_permutation(perm, n)?;
    let dim = checked_dim(n)?;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for x in 0..dim {
        let mut y = 0usize;
        for (i, &target) in perm.iter().enumerate() {
            let bit = (x >> (n - 1 - i)) & 1;
            y |= bit << (n - 1 - target);
        }
        m.set(y, x, Complex64::new(1.0, 0.0));
    }
    Ok(UnitaryMatrix::trusted(m))
}
