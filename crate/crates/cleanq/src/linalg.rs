//! Dense complex matrix kernels.
//!
//! Row-major `Vec<Complex64>` storage, no external BLAS. Everything
//! downstream builds on the products, Kronecker products, conjugate
//! transpose, Hermitian eigendecomposition, and trace norm defined here.
//!
//! Tolerances: Hermiticity and unitarity are checked entrywise at 1e-10;
//! double precision at the supported register sizes keeps accumulated
//! error well below that.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Max-entry tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Max-entry tolerance for unitarity checks.
pub const UNITARY_TOL: f64 = 1e-10;
/// Default register cap: 12 qubits, i.e. 4096x4096 dense matrices.
pub const DEFAULT_MAX_QUBITS: u32 = 12;

static DIMENSION_CAP: AtomicUsize = AtomicUsize::new(1 << DEFAULT_MAX_QUBITS);

/// Current dense-dimension cap (matrices above this are refused).
pub fn dimension_cap() -> usize {
    DIMENSION_CAP.load(Ordering::Relaxed)
}

/// Reconfigures the dense-dimension cap to `2^max_qubits`. Intended to be
/// called once at startup; raising it trades memory for reach.
pub fn set_max_qubits(max_qubits: u32) {
    DIMENSION_CAP.store(1usize << max_qubits.min(30), Ordering::Relaxed);
}

/// `2^qubits`, refusing dimensions beyond the configured cap.
pub fn checked_dim(qubits: usize) -> Result<usize> {
    let cap = dimension_cap();
    if qubits >= usize::BITS as usize || (1usize << qubits) > cap {
        return Err(Error::DimensionCap {
            dim: 1usize.checked_shl(qubits as u32).unwrap_or(usize::MAX),
            cap,
        });
    }
    Ok(1 << qubits)
}

fn check_cap(dim: usize) -> Result<()> {
    let cap = dimension_cap();
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    Ok(())
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for c in 0..self.cols.min(8) {
                let z = self.get(r, c);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f, "{}", if self.cols > 8 { "..." } else { "" })?;
        }
        if self.rows > 8 {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting size mismatches and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(
                "matrix must have at least one row and one column".into(),
            ));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                entries.len()
            )));
        }
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFiniteEntry);
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self { rows, cols, entries }
    }

    /// Diagonal square matrix from real values.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m.entries[i * n + i] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: Complex64) {
        self.entries[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    /// Matrix product `self * rhs`. Rows of `rhs` that are exactly zero are
    /// skipped, as are exactly-zero entries of `self`; both skips are purely
    /// structural and do not change the result.
    pub fn mul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "inner dimensions must agree: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let live: Vec<bool> = (0..rhs.rows)
            .map(|k| rhs.row(k).iter().any(|z| z.re != 0.0 || z.im != 0.0))
            .collect();
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        let w = rhs.cols;
        for i in 0..self.rows {
            let dst = &mut out.entries[i * w..(i + 1) * w];
            for (k, &k_live) in live.iter().enumerate() {
                let a = self.entries[i * self.cols + k];
                if (a.re == 0.0 && a.im == 0.0) || !k_live {
                    continue;
                }
                let src = &rhs.entries[k * w..(k + 1) * w];
                for j in 0..w {
                    dst[j] += a * src[j];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(x, y)| x + y)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(x, y)| x - y)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn scale(&self, factor: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.entries[c * self.rows + r] = self.entries[r * self.cols + c].conj();
            }
        }
        out
    }

    /// Kronecker product; dimensions multiply. Refused beyond the dimension
    /// cap, which signals that the desk-scale limit was exceeded.
    pub fn kron(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        check_cap(rows)?;
        check_cap(cols)?;
        let mut out = ComplexMatrix::zeros(rows, cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self.entries[r1 * self.cols + c1];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for r2 in 0..rhs.rows {
                    let dst_row = (r1 * rhs.rows + r2) * cols + c1 * rhs.cols;
                    let src_row = r2 * rhs.cols;
                    for c2 in 0..rhs.cols {
                        out.entries[dst_row + c2] = a * rhs.entries[src_row + c2];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, rhs: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Max-entry deviation from Hermiticity (`inf` for non-square input).
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                dev = dev.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Replaces the matrix by `(M + M†)/2`. Used after floating-point
    /// conjugation pipelines whose output is Hermitian up to roundoff.
    pub fn hermitian_symmetrize(&mut self) {
        debug_assert!(self.is_square());
        let n = self.rows;
        for r in 0..n {
            let d = self.entries[r * n + r];
            self.entries[r * n + r] = Complex64::new(d.re, 0.0);
            for c in (r + 1)..n {
                let avg = (self.entries[r * n + c] + self.entries[c * n + r].conj()) * 0.5;
                self.entries[r * n + c] = avg;
                self.entries[c * n + r] = avg.conj();
            }
        }
    }

    /// Max-entry deviation of `self† self` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let product = self.dagger().mul(self);
        let mut dev: f64 = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let expected = if r == c { 1.0 } else { 0.0 };
                dev = dev.max((product.get(r, c) - expected).norm());
            }
        }
        dev
    }
}

/// Unitary matrix witness: constructing one checks `‖U†U − I‖_max ≤ 1e-10`,
/// so operations taking a [`UnitaryMatrix`] need not re-verify.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    matrix: ComplexMatrix,
}

impl UnitaryMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "unitary must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let dev = matrix.unitarity_deviation();
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary {
                dev,
                tol: UNITARY_TOL,
            });
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix that is unitary by construction (products of unitaries,
    /// permutations, orthonormalized samples). No check is performed.
    pub(crate) fn trusted(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.matrix.get(r, c)
    }

    pub fn dagger(&self) -> UnitaryMatrix {
        Self {
            matrix: self.matrix.dagger(),
        }
    }

    /// Product of unitaries, itself unitary.
    pub fn mul(&self, rhs: &UnitaryMatrix) -> UnitaryMatrix {
        Self {
            matrix: self.matrix.mul(&rhs.matrix),
        }
    }
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues ascending,
/// eigenvector columns orthonormal, `V Λ V†` reconstructs the input.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// `V Λ V†`; tests check this against the decomposed input.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        ComplexMatrix::from_fn(n, n, |r, c| {
            (0..n)
                .map(|k| v.get(r, k) * Complex64::new(self.eigenvalues[k], 0.0) * v.get(c, k).conj())
                .sum()
        })
    }
}

const MAX_JACOBI_SWEEPS: usize = 64;

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Eigenvalues are returned ascending (stable sort); degenerate subspaces may
/// come back in any orthonormal basis. Non-Hermitian input (max-entry
/// deviation above 1e-10) is rejected.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let dev = m.hermiticity_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian {
            dev,
            tol: HERMITIAN_TOL,
        });
    }

    let n = m.rows();
    let mut a: Vec<Complex64> = m.entries().to_vec();
    // Work on the exactly Hermitian average so roundoff in the input cannot
    // leak into the rotations.
    for p in 0..n {
        a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
        for q in (p + 1)..n {
            let avg = (a[p * n + q] + a[q * n + p].conj()) * 0.5;
            a[p * n + q] = avg;
            a[q * n + p] = avg.conj();
        }
    }
    let mut v: Vec<Complex64> = ComplexMatrix::identity(n).entries().to_vec();

    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let conv_tol = scale * 1e-15;

    let off_norm = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += a[p * n + q].norm_sqr();
            }
        }
        (2.0 * s).sqrt()
    };

    let mut converged = off_norm(&a) <= conv_tol;
    let mut sweeps = 0;
    while !converged {
        if sweeps >= MAX_JACOBI_SWEEPS {
            return Err(Error::EigenConvergence(sweeps));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE {
                    a[p * n + q] = Complex64::new(0.0, 0.0);
                    a[q * n + p] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                // Solve t^2 - 2 g t - 1 = 0 for the smaller-magnitude root;
                // this zeroes the (p,q) entry of R† A R.
                let g = (app - aqq) / (2.0 * mag);
                let t = if g >= 0.0 {
                    -1.0 / (g + (1.0 + g * g).sqrt())
                } else {
                    1.0 / (-g + (1.0 + g * g).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let u = apq / mag; // phase of the pivot entry

                let new_pp = app * c * c - 2.0 * s * c * mag + aqq * s * s;
                let new_qq = app * s * s + 2.0 * s * c * mag + aqq * c * c;

                // Column update: M <- M R with R = [[c, s u], [-s ū, c]].
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * c - akq * s * u.conj();
                    a[k * n + q] = akp * s * u + akq * c;
                }
                // Row update: M <- R† M.
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * c - aqk * s * u;
                    a[q * n + k] = apk * s * u.conj() + aqk * c;
                }
                a[p * n + p] = Complex64::new(new_pp, 0.0);
                a[q * n + q] = Complex64::new(new_qq, 0.0);
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);

                // Accumulate V <- V R.
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * c - vkq * s * u.conj();
                    v[k * n + q] = vkp * s * u + vkq * c;
                }
            }
        }
        sweeps += 1;
        converged = off_norm(&a) <= conv_tol;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i]
            .re
            .partial_cmp(&a[j * n + j].re)
            .expect("eigenvalues are finite")
    });

    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| v[r * n + order[c]]);

    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Trace norm (sum of absolute eigenvalues) of a Hermitian matrix.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    let eig = hermitian_eig(m)?;
    Ok(eig.eigenvalues.iter().map(|l| l.abs()).sum())
}
