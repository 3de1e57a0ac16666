//! Dense complex linear-algebra atoms: tensor products, partial traces,
//! Hermitian eigendecomposition, PSD roots and 3x3 singular values.
//!
//! Everything here is a pure function of its inputs; matrices are plain
//! row-major buffers of `Complex64` with no interior mutability.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hermiticity tolerance used before eigensolving.
pub const HERM_TOL: f64 = 1e-10;
/// Eigenvalues below this are a hard PSD violation.
pub const PSD_EIG_FLOOR: f64 = -1e-8;
/// Relative eigenvalue clamping threshold for PSD operations.
pub const PSD_CLAMP_REL: f64 = 1e-12;
/// Default relative rank cutoff for pseudo-inverse roots.
pub const RANK_TOL_DEFAULT: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Build from a row-major buffer, rejecting NaN/Inf entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::WrongDims(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = ONE;
        }
        m
    }

    /// Convenience constructor from real row slices.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let entries = rows
            .iter()
            .flat_map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)))
            .collect();
        Self { rows: r, cols: c, entries }
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
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn scale(&self, s: Complex64) -> ComplexMatrix {
        let entries = self.entries.iter().map(|a| a * s).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, entries }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    /// Entry-wise complex conjugate (no transpose).
    pub fn conj(&self) -> ComplexMatrix {
        let entries = self.entries.iter().map(|a| a.conj()).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest |m_ij - conj(m_ji)| over all entries.
    pub fn hermiticity_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    /// Hermitian part (m + m†)/2.
    pub fn hermitian_part(&self) -> ComplexMatrix {
        let adj = self.adjoint();
        self.add(&adj).scale(Complex64::new(0.5, 0.0))
    }
}

/// Ordered subsystem dimensions annotating a state or operator.
///
/// Big-endian convention throughout: the first listed subsystem is the
/// slowest-varying index of the flat vector/matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimsVector {
    dims: Vec<usize>,
}

impl DimsVector {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::WrongDims("empty dims".into()));
        }
        // Factors of dimension 1 are allowed so that tail compression can
        // report a rank-1 environment.
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::WrongDims("zero-dimensional subsystem".into()));
        }
        Ok(Self { dims: dims.to_vec() })
    }

    pub fn qubits(n: usize) -> Self {
        Self { dims: vec![2; n] }
    }

    pub fn product(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dim(&self, k: usize) -> usize {
        self.dims[k]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.dims
    }

    /// Big-endian strides: stride[k] = product of dims after k.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }
}

/// Tensor (Kronecker) product.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for ia in 0..a.rows() {
        for ja in 0..a.cols() {
            let av = a.get(ia, ja);
            if av == ZERO {
                continue;
            }
            for ib in 0..b.rows() {
                for jb in 0..b.cols() {
                    out.set(ia * b.rows() + ib, ja * b.cols() + jb, av * b.get(ib, jb));
                }
            }
        }
    }
    out
}

/// Partial trace of a square operator over the subsystems not in `keep`.
///
/// `keep` is an ordered list of distinct subsystem indices; the output
/// subsystems appear in exactly that order, so `keep = [2, 0]` also swaps.
pub fn partial_trace(m: &ComplexMatrix, dims: &DimsVector, keep: &[usize]) -> Result<ComplexMatrix> {
    if !m.is_square() || m.rows() != dims.product() {
        return Err(Error::WrongDims(format!(
            "operator is {}x{} but dims product is {}",
            m.rows(),
            m.cols(),
            dims.product()
        )));
    }
    let n_sub = dims.len();
    if keep.iter().any(|&k| k >= n_sub) {
        return Err(Error::WrongDims("keep index out of range".into()));
    }
    let mut seen = vec![false; n_sub];
    for &k in keep {
        if seen[k] {
            return Err(Error::WrongDims("duplicate keep index".into()));
        }
        seen[k] = true;
    }
    let traced: Vec<usize> = (0..n_sub).filter(|s| !seen[*s]).collect();
    let strides = dims.strides();

    let keep_dims: Vec<usize> = keep.iter().map(|&k| dims.dim(k)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims.dim(k)).collect();
    let m_out: usize = keep_dims.iter().product();

    // Map a composite index over `subs` to its offset in the full space.
    let offsets = |subs: &[usize], sub_dims: &[usize]| -> Vec<usize> {
        let total: usize = sub_dims.iter().product();
        let mut table = vec![0usize; total];
        for (flat, slot) in table.iter_mut().enumerate() {
            let mut rem = flat;
            let mut off = 0usize;
            for (pos, &s) in subs.iter().enumerate().rev() {
                let d = sub_dims[pos];
                off += (rem % d) * strides[s];
                rem /= d;
            }
            *slot = off;
        }
        table
    };
    let keep_off = offsets(keep, &keep_dims);
    let traced_off = offsets(&traced, &traced_dims);

    let mut out = ComplexMatrix::zeros(m_out, m_out);
    for i in 0..m_out {
        for j in 0..m_out {
            let mut acc = ZERO;
            for &t in &traced_off {
                acc += m.get(keep_off[i] + t, keep_off[j] + t);
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns eigenvalues sorted descending and the matching
/// orthonormal eigenvectors as columns.
///
/// The input is symmetrized as (m + m†)/2 before solving; inputs further
/// than [`HERM_TOL`] from Hermitian are rejected.
pub fn herm_eig(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::WrongDims(format!("eig needs square, got {}x{}", m.rows(), m.cols())));
    }
    let dev = m.hermiticity_deviation();
    if dev > HERM_TOL {
        return Err(Error::NotHermitian { deviation: dev, tolerance: HERM_TOL });
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += 2.0 * a.get(p, q).norm_sqr();
            }
        }
        s.sqrt()
    };

    for _sweep in 0..100 {
        if off_norm(&a) <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let abs = apq.norm();
                if abs <= 1e-300 {
                    continue;
                }
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                // Phase takes the block to real symmetric, then a classical
                // Jacobi rotation annihilates the off-diagonal entry.
                let phase = apq / abs;
                let tau = (aqq - app) / (2.0 * abs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U differs from identity in the (p,q) block:
                //   U_pp = c, U_pq = s, U_qp = -s*conj(phase), U_qq = c*conj(phase)
                let upp = Complex64::new(c, 0.0);
                let upq = Complex64::new(s, 0.0);
                let uqp = -phase.conj() * s;
                let uqq = phase.conj() * c;

                // Columns p, q of A and V (right-multiplication by U).
                for i in 0..n {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, aip * upp + aiq * uqp);
                    a.set(i, q, aip * upq + aiq * uqq);
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, vip * upp + viq * uqp);
                    v.set(i, q, vip * upq + viq * uqq);
                }
                // Rows p, q of A (left-multiplication by U†).
                for j in 0..n {
                    let apj = a.get(p, j);
                    let aqj = a.get(q, j);
                    a.set(p, j, upp.conj() * apj + uqp.conj() * aqj);
                    a.set(q, j, upq.conj() * apj + uqq.conj() * aqj);
                }
                a.set(p, q, ZERO);
                a.set(q, p, ZERO);
                let dp = a.get(p, p);
                let dq = a.get(q, q);
                a.set(p, p, Complex64::new(dp.re, 0.0));
                a.set(q, q, Complex64::new(dq.re, 0.0));
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, new_col, v.get(i, old_col));
        }
    }
    Ok((values, vectors))
}

fn psd_spectral_map<F: Fn(f64, f64) -> f64>(m: &ComplexMatrix, f: F) -> Result<ComplexMatrix> {
    let (values, vectors) = herm_eig(m)?;
    let max = values.first().copied().unwrap_or(0.0).max(0.0);
    if let Some(&min) = values.last() {
        if min < PSD_EIG_FLOOR {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
    }
    let n = m.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &lam) in values.iter().enumerate() {
        let w = f(lam, max);
        if w == 0.0 {
            continue;
        }
        for i in 0..n {
            let vik = vectors.get(i, k) * w;
            for j in 0..n {
                let v = out.get(i, j) + vik * vectors.get(j, k).conj();
                out.set(i, j, v);
            }
        }
    }
    Ok(out)
}

/// Principal square root of a positive semidefinite matrix. Eigenvalues in
/// the [-1e-8, 0) round-off band are clamped to zero.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    psd_spectral_map(m, |lam, max| {
        if lam <= PSD_CLAMP_REL * max {
            0.0
        } else {
            lam.sqrt()
        }
    })
}

/// Pseudo-inverse square root: eigenvalues at or below `rank_tol` relative to
/// the largest are treated as exact zeros.
pub fn psd_pinv_sqrt(m: &ComplexMatrix, rank_tol: f64) -> Result<ComplexMatrix> {
    psd_spectral_map(m, |lam, max| {
        if lam <= rank_tol * max.max(f64::MIN_POSITIVE) || lam <= 0.0 {
            0.0
        } else {
            1.0 / lam.sqrt()
        }
    })
}

/// Descending singular values of a real 3x3 matrix via the spectrum of LᵀL.
pub fn singular_values_3x3(l: &[[f64; 3]; 3]) -> [f64; 3] {
    // Gram matrix LᵀL, symmetric by construction.
    let mut g = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = (0..3).map(|k| l[k][i] * l[k][j]).sum();
        }
    }
    let entries: Vec<Complex64> = g
        .iter()
        .flat_map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)))
        .collect();
    let gm = ComplexMatrix { rows: 3, cols: 3, entries };
    let (values, _) = herm_eig(&gm).expect("Gram matrix is symmetric");
    [
        values[0].max(0.0).sqrt(),
        values[1].max(0.0).sqrt(),
        values[2].max(0.0).sqrt(),
    ]
}

/// The Pauli matrices (x, y, z).
pub fn paulis() -> [ComplexMatrix; 3] {
    let i = Complex64::new(0.0, 1.0);
    let sx = ComplexMatrix::new(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap();
    let sy = ComplexMatrix::new(2, 2, vec![ZERO, -i, i, ZERO]).unwrap();
    let sz = ComplexMatrix::new(2, 2, vec![ONE, ZERO, ZERO, -ONE]).unwrap();
    [sx, sy, sz]
}
