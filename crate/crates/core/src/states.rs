//! Multiqubit state construction and sampling: Haar-random pure states,
//! Hilbert-Schmidt random mixed states, symmetric purification, compression
//! of the tail subsystem into its marginal eigenbasis, and the named states
//! used by the saturation campaigns.
//!
//! Subsystem ordering is big-endian everywhere: the first listed subsystem is
//! the slowest-varying index of the flat amplitude vector.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::qlinalg::{herm_eig, partial_trace, ComplexMatrix, DimsVector};

/// Largest total dimension accepted by the samplers (10 qubits).
pub const MAX_DIM: usize = 1024;

/// Norm tolerance for pure-state construction.
pub const NORM_TOL: f64 = 1e-12;
/// Trace / Hermiticity tolerance for density-operator construction.
pub const DENSITY_TOL: f64 = 1e-10;
/// Eigenvalue weights below this are truncated by tail compression.
pub const TAIL_WEIGHT_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Unit complex vector over a tensor factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
    dims: DimsVector,
}

impl PureState {
    /// Build from amplitudes, requiring unit norm within [`NORM_TOL`].
    pub fn new(dims: DimsVector, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != dims.product() {
            return Err(Error::WrongDims(format!(
                "amplitude length {} does not match dims product {}",
                amplitudes.len(),
                dims.product()
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes, dims })
    }

    /// Build from arbitrary nonzero amplitudes, normalizing.
    pub fn normalized(dims: DimsVector, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::NotNormalized { norm });
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Self::new(dims, amplitudes)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dims(&self) -> &DimsVector {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Reinterpret the tensor structure without touching amplitudes.
    /// Adjacent factors may be fused ([2,2,2,2] -> [2,2,4]) or split.
    pub fn regroup(&self, new_dims: &[usize]) -> Result<Self> {
        let dims = DimsVector::new(new_dims)?;
        if dims.product() != self.dim() {
            return Err(Error::WrongDims(format!(
                "regroup product {} != state dimension {}",
                dims.product(),
                self.dim()
            )));
        }
        Ok(Self { amplitudes: self.amplitudes.clone(), dims })
    }

    /// |psi><psi| as a density operator.
    pub fn density(&self) -> DensityOperator {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m.set(i, j, self.amplitudes[i] * self.amplitudes[j].conj());
            }
        }
        DensityOperator::from_trusted(m, self.dims.clone())
    }

    /// Reduced density operator on the kept subsystems (in `keep` order),
    /// computed directly from the amplitudes.
    pub fn marginal(&self, keep: &[usize]) -> Result<DensityOperator> {
        let n_sub = self.dims.len();
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
        let rest: Vec<usize> = (0..n_sub).filter(|s| !seen[*s]).collect();
        let strides = self.dims.strides();
        let offsets = |subs: &[usize]| -> Vec<usize> {
            let sub_dims: Vec<usize> = subs.iter().map(|&s| self.dims.dim(s)).collect();
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
        let keep_off = offsets(keep);
        let rest_off = offsets(&rest);

        let m_out = keep_off.len();
        let mut m = ComplexMatrix::zeros(m_out, m_out);
        for i in 0..m_out {
            for j in 0..m_out {
                let mut acc = ZERO;
                for &r in &rest_off {
                    acc += self.amplitudes[keep_off[i] + r] * self.amplitudes[keep_off[j] + r].conj();
                }
                m.set(i, j, acc);
            }
        }
        let keep_dims: Vec<usize> = keep.iter().map(|&k| self.dims.dim(k)).collect();
        Ok(DensityOperator::from_trusted(m, DimsVector::new(&keep_dims)?))
    }
}

/// Positive unit-trace operator over a tensor factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    dims: DimsVector,
}

impl DensityOperator {
    /// Full validation: square, dims-consistent, Hermitian within 1e-10,
    /// eigenvalues >= -1e-10, unit trace within 1e-10.
    pub fn new(matrix: ComplexMatrix, dims: DimsVector) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() != dims.product() {
            return Err(Error::WrongDims(format!(
                "operator is {}x{} but dims product is {}",
                matrix.rows(),
                matrix.cols(),
                dims.product()
            )));
        }
        let dev = matrix.hermiticity_deviation();
        if dev > DENSITY_TOL {
            return Err(Error::NotHermitian { deviation: dev, tolerance: DENSITY_TOL });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::BadTrace { trace: tr.re });
        }
        let (values, _) = herm_eig(&matrix)?;
        if let Some(&min) = values.last() {
            if min < -DENSITY_TOL {
                return Err(Error::NotPositive { min_eigenvalue: min });
            }
        }
        Ok(Self { matrix, dims })
    }

    /// Constructor for operators that are PSD by construction (outer
    /// products, partial traces of PSD operators, Ginibre products), skipping
    /// the eigenvalue check. Debug builds still assert the cheap invariants.
    pub(crate) fn from_trusted(matrix: ComplexMatrix, dims: DimsVector) -> Self {
        debug_assert!(matrix.hermiticity_deviation() <= 1e-8);
        debug_assert!((matrix.trace().re - 1.0).abs() <= 1e-8);
        Self { matrix, dims }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &DimsVector {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Reinterpret the tensor structure (same matrix, same total dimension).
    pub fn with_dims(&self, new_dims: &[usize]) -> Result<Self> {
        let dims = DimsVector::new(new_dims)?;
        if dims.product() != self.dim() {
            return Err(Error::WrongDims(format!(
                "dims product {} != operator dimension {}",
                dims.product(),
                self.dim()
            )));
        }
        Ok(Self { matrix: self.matrix.clone(), dims })
    }

    /// Reduced operator on the kept subsystems.
    pub fn marginal(&self, keep: &[usize]) -> Result<DensityOperator> {
        let m = partial_trace(&self.matrix, &self.dims, keep)?;
        let keep_dims: Vec<usize> = keep.iter().map(|&k| self.dims.dim(k)).collect();
        Ok(DensityOperator::from_trusted(m, DimsVector::new(&keep_dims)?))
    }

    pub fn purity(&self) -> f64 {
        let m = &self.matrix;
        let n = m.rows();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (m.get(i, j) * m.get(j, i)).re;
            }
        }
        acc
    }

    /// Descending spectrum.
    pub fn eigenvalues(&self) -> Vec<f64> {
        herm_eig(&self.matrix).expect("density operator is Hermitian").0
    }

    /// Dominant eigenvector as a pure state (meaningful when purity ~ 1).
    pub fn dominant_eigenvector(&self) -> Result<PureState> {
        let (_, vectors) = herm_eig(&self.matrix)?;
        let amps: Vec<Complex64> = (0..self.dim()).map(|i| vectors.get(i, 0)).collect();
        PureState::normalized(self.dims.clone(), amps)
    }
}

/// Probability-weighted list of pure states: the decomposition currency for
/// roof constructions and ensemble capacities.
#[derive(Debug, Clone)]
pub struct Ensemble {
    members: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::BadProbabilities("empty ensemble".into()));
        }
        if members.iter().any(|(p, _)| *p < -1e-15 || !p.is_finite()) {
            return Err(Error::BadProbabilities("negative or non-finite probability".into()));
        }
        let total: f64 = members.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::BadProbabilities(format!("probabilities sum to {total}")));
        }
        let d = members[0].1.dim();
        if members.iter().any(|(_, s)| s.dim() != d) {
            return Err(Error::WrongDims("ensemble members differ in dimension".into()));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }

    /// The mixture sum_x p_x |psi_x><psi_x|.
    pub fn average(&self) -> DensityOperator {
        let d = self.members[0].1.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for (p, psi) in &self.members {
            let a = psi.amplitudes();
            for i in 0..d {
                for j in 0..d {
                    let v = m.get(i, j) + a[i] * a[j].conj() * *p;
                    m.set(i, j, v);
                }
            }
        }
        DensityOperator::from_trusted(m, self.members[0].1.dims().clone())
    }

    /// Frobenius distance between the mixture and a declared target.
    pub fn deviation_from(&self, target: &DensityOperator) -> f64 {
        self.average().matrix().sub(target.matrix()).frobenius_norm()
    }
}

/// Haar-distributed pure state: normalized standard complex Gaussian
/// amplitudes, deterministic per seed (ChaCha8 stream).
pub fn random_pure(dims: &DimsVector, seed: u64) -> Result<PureState> {
    let d = dims.product();
    if d > MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "dimension {d} exceeds the supported maximum {MAX_DIM}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let amps: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm_sq: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq > 1e-12 {
            return PureState::normalized(dims.clone(), amps);
        }
        // astronomically unlikely; redraw keeps the sampler total
    }
}

/// Hilbert-Schmidt-induced random mixed state of the given rank:
/// G G† / tr(G G†) with G a dim x rank standard complex Gaussian matrix.
pub fn random_mixed(dim: usize, rank: usize, seed: u64) -> Result<DensityOperator> {
    if rank == 0 || rank > dim {
        return Err(Error::InvalidArgument(format!("rank {rank} outside 1..={dim}")));
    }
    if dim > MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "dimension {dim} exceeds the supported maximum {MAX_DIM}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<Complex64> = (0..dim * rank)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = ZERO;
            for k in 0..rank {
                acc += g[i * rank + k] * g[j * rank + k].conj();
            }
            m.set(i, j, acc);
        }
    }
    let tr = m.trace().re;
    let m = m.scale(Complex64::new(1.0 / tr, 0.0));
    Ok(DensityOperator::from_trusted(m, DimsVector::new(&[dim])?))
}

/// Symmetric purification |r> = sum_i sqrt(lambda_i) |e_i>|e_i> on two copies,
/// built in the eigenbasis {e_i} of rho. Tracing either factor returns rho.
pub fn symmetric_purification(rho: &DensityOperator) -> Result<PureState> {
    let d = rho.dim();
    let (values, vectors) = herm_eig(rho.matrix())?;
    let mut amps = vec![ZERO; d * d];
    for (k, &lam) in values.iter().enumerate() {
        let w = lam.max(0.0).sqrt();
        if w == 0.0 {
            continue;
        }
        for a in 0..d {
            for b in 0..d {
                amps[a * d + b] += vectors.get(a, k) * vectors.get(b, k) * w;
            }
        }
    }
    PureState::normalized(DimsVector::new(&[d, d])?, amps)
}

/// Rotate the third subsystem of a pure [2, 2, T] state into the eigenbasis
/// of its marginal and truncate zero-weight directions, yielding an
/// effective environment of dimension at most 4.
///
/// All quantities local to the first two factors are unchanged (the move is
/// a local unitary on the tail).
pub fn compress_tail(psi: &PureState) -> Result<PureState> {
    let dims = psi.dims();
    if dims.len() != 3 || dims.dim(0) != 2 || dims.dim(1) != 2 {
        return Err(Error::WrongDims(format!(
            "compress_tail expects dims [2, 2, T], got {:?}",
            dims.as_slice()
        )));
    }
    let t = dims.dim(2);
    let rho_c = psi.marginal(&[2])?;
    let (values, vectors) = herm_eig(rho_c.matrix())?;
    // A pure state of a 2x2xT system has rank(rho_C) <= 4 exactly.
    let d_c = values
        .iter()
        .take(4)
        .filter(|&&lam| lam >= TAIL_WEIGHT_TOL)
        .count()
        .max(1);

    let amps_in = psi.amplitudes();
    let mut amps = vec![ZERO; 4 * d_c];
    for ab in 0..4 {
        for k in 0..d_c {
            let mut acc = ZERO;
            for tt in 0..t {
                acc += vectors.get(tt, k).conj() * amps_in[ab * t + tt];
            }
            amps[ab * d_c + k] = acc;
        }
    }
    PureState::normalized(DimsVector::new(&[2, 2, d_c])?, amps)
}

/// W state on n qubits: uniform superposition of all weight-1 strings.
pub fn w_state(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("w_state needs n >= 2, got {n}")));
    }
    if n > 10 {
        return Err(Error::InvalidArgument(format!("w_state capped at 10 qubits, got {n}")));
    }
    let d = 1usize << n;
    let amp = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut amps = vec![ZERO; d];
    for k in 0..n {
        amps[1usize << (n - 1 - k)] = amp;
    }
    PureState::new(DimsVector::qubits(n), amps)
}

/// The CKW-saturating state (|0>|0...0> + |1>|W_n>)/sqrt(2) on 1 + n qubits,
/// focus qubit first. The focus marginal is exactly I/2.
pub fn saturating_state(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("saturating_state needs n >= 2, got {n}")));
    }
    if n > 9 {
        return Err(Error::InvalidArgument(format!(
            "saturating_state capped at 9 partner qubits, got {n}"
        )));
    }
    let d = 1usize << (n + 1);
    let mut amps = vec![ZERO; d];
    let s = Complex64::new(1.0 / 2.0_f64.sqrt(), 0.0);
    amps[0] = s;
    let w_amp = s * Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    for k in 0..n {
        amps[(1usize << n) + (1usize << (n - 1 - k))] = w_amp;
    }
    PureState::new(DimsVector::qubits(n + 1), amps)
}

/// Bloch vector r_j = tr(rho sigma_j) of a single-qubit state.
pub fn bloch_vector(rho: &DensityOperator) -> Result<[f64; 3]> {
    if rho.dim() != 2 {
        return Err(Error::WrongDims(format!(
            "bloch_vector expects a qubit, got dimension {}",
            rho.dim()
        )));
    }
    let m = rho.matrix();
    let rx = 2.0 * m.get(0, 1).re;
    let ry = -2.0 * m.get(0, 1).im;
    let rz = (m.get(0, 0) - m.get(1, 1)).re;
    Ok([rx, ry, rz])
}

/// Single-qubit pure state with the given unit Bloch vector.
pub fn pure_from_bloch(r: [f64; 3]) -> PureState {
    let theta = r[2].clamp(-1.0, 1.0).acos();
    let phi = r[1].atan2(r[0]);
    let amps = vec![
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ];
    PureState::normalized(DimsVector::new(&[2]).unwrap(), amps).expect("unit Bloch vector")
}

/// Density operator (I + r.sigma)/2. The vector is clamped to the unit ball
/// to absorb round-off from affine channel arithmetic.
pub fn density_from_bloch(r: [f64; 3]) -> DensityOperator {
    let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    let scale = if norm > 1.0 { 1.0 / norm } else { 1.0 };
    let (x, y, z) = (r[0] * scale, r[1] * scale, r[2] * scale);
    let m = ComplexMatrix::new(
        2,
        2,
        vec![
            Complex64::new((1.0 + z) / 2.0, 0.0),
            Complex64::new(x / 2.0, -y / 2.0),
            Complex64::new(x / 2.0, y / 2.0),
            Complex64::new((1.0 - z) / 2.0, 0.0),
        ],
    )
    .expect("finite Bloch entries");
    DensityOperator::from_trusted(m, DimsVector::new(&[2]).unwrap())
}

/// Maximally mixed single-qubit state.
pub fn maximally_mixed_qubit() -> DensityOperator {
    density_from_bloch([0.0, 0.0, 0.0])
}
