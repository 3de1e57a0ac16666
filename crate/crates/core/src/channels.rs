//! Qubit channels in affine Bloch form, the channel-state duality, the
//! linear Holevo capacity (closed form plus a two-point ensemble oracle),
//! the one-way correlation measure, and local filtering normal forms.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::qlinalg::{
    herm_eig, kron, paulis, psd_pinv_sqrt, singular_values_3x3, ComplexMatrix, DimsVector,
    RANK_TOL_DEFAULT,
};
use crate::states::{
    bloch_vector, density_from_bloch, pure_from_bloch, symmetric_purification, DensityOperator,
    Ensemble, PureState,
};

pub type Mat3 = [[f64; 3]; 3];
pub type Vec3 = [f64; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Allowed Bloch-ball overshoot before an affine pair is rejected as
/// non-physical.
const BLOCH_BALL_TOL: f64 = 1e-8;
/// Kraus trace-preservation tolerance.
const TP_TOL: f64 = 1e-10;

/// A qubit channel as an affine Bloch pair r -> L r + l, optionally carrying
/// the Kraus operators it was built from.
///
/// Complete positivity is asserted only for Kraus-backed channels; raw
/// (L, l) pairs are accepted as affine maps.
#[derive(Debug, Clone)]
pub struct QubitChannel {
    bloch_linear: Mat3,
    bloch_shift: Vec3,
    kraus: Option<Vec<ComplexMatrix>>,
}

impl QubitChannel {
    /// Build from Kraus operators, requiring sum K†K = I within 1e-10.
    /// The (L, l) pair reproduces the Kraus action on the Pauli basis
    /// exactly: L_jk = tr(sigma_j Lambda(sigma_k))/2, l_j = tr(sigma_j Lambda(I))/2.
    pub fn from_kraus(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidArgument("empty Kraus set".into()));
        }
        for k in &kraus {
            if k.rows() != 2 || k.cols() != 2 {
                return Err(Error::WrongDims("Kraus operators must be 2x2".into()));
            }
        }
        let mut sum = ComplexMatrix::zeros(2, 2);
        for k in &kraus {
            sum = sum.add(&k.adjoint().mul(k));
        }
        let deviation = sum.sub(&ComplexMatrix::identity(2)).frobenius_norm();
        if deviation > TP_TOL {
            return Err(Error::NotTracePreserving { deviation });
        }

        let apply = |x: &ComplexMatrix| -> ComplexMatrix {
            let mut out = ComplexMatrix::zeros(2, 2);
            for k in &kraus {
                out = out.add(&k.mul(x).mul(&k.adjoint()));
            }
            out
        };
        let sigma = paulis();
        let lambda_i = apply(&ComplexMatrix::identity(2));
        let mut bloch_linear = [[0.0f64; 3]; 3];
        let mut bloch_shift = [0.0f64; 3];
        for j in 0..3 {
            bloch_shift[j] = 0.5 * sigma[j].mul(&lambda_i).trace().re;
            for (k, sk) in sigma.iter().enumerate() {
                bloch_linear[j][k] = 0.5 * sigma[j].mul(&apply(sk)).trace().re;
            }
        }
        Ok(Self { bloch_linear, bloch_shift, kraus: Some(kraus) })
    }

    /// Accept a raw affine pair without any complete-positivity check.
    pub fn from_bloch(bloch_linear: Mat3, bloch_shift: Vec3) -> Result<Self> {
        let finite = bloch_linear.iter().flatten().all(|x| x.is_finite())
            && bloch_shift.iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::NonFinite);
        }
        Ok(Self { bloch_linear, bloch_shift, kraus: None })
    }

    pub fn identity() -> Self {
        Self::from_kraus(vec![ComplexMatrix::identity(2)]).expect("identity is TP")
    }

    /// Depolarizing channel with Kraus weights {1 - 3p/4, p/4, p/4, p/4}.
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=4.0 / 3.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("depolarizing p={p} outside [0, 4/3]")));
        }
        let mut kraus = vec![ComplexMatrix::identity(2).scale(Complex64::new((1.0 - 0.75 * p).sqrt(), 0.0))];
        for s in paulis() {
            kraus.push(s.scale(Complex64::new((p / 4.0).sqrt(), 0.0)));
        }
        Self::from_kraus(kraus)
    }

    /// Amplitude damping towards |0> with strength gamma.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidArgument(format!("damping gamma={gamma} outside [0, 1]")));
        }
        let k0 = ComplexMatrix::new(
            2,
            2,
            vec![ONE, ZERO, ZERO, Complex64::new((1.0 - gamma).sqrt(), 0.0)],
        )?;
        let k1 = ComplexMatrix::new(
            2,
            2,
            vec![ZERO, Complex64::new(gamma.sqrt(), 0.0), ZERO, ZERO],
        )?;
        Self::from_kraus(vec![k0, k1])
    }

    pub fn bloch_linear(&self) -> &Mat3 {
        &self.bloch_linear
    }

    pub fn bloch_shift(&self) -> &Vec3 {
        &self.bloch_shift
    }

    pub fn kraus(&self) -> Option<&[ComplexMatrix]> {
        self.kraus.as_deref()
    }

    /// Largest singular value of the linear part.
    pub fn sigma_max(&self) -> f64 {
        singular_values_3x3(&self.bloch_linear)[0]
    }

    /// Affine action on a Bloch vector.
    pub fn map_bloch(&self, r: Vec3) -> Vec3 {
        let mut out = self.bloch_shift;
        for j in 0..3 {
            for k in 0..3 {
                out[j] += self.bloch_linear[j][k] * r[k];
            }
        }
        out
    }

    /// Apply the channel to a qubit state through the Bloch representation.
    /// Rejects affine pairs that push the state outside the Bloch ball by
    /// more than 1e-8 (a non-CP signature).
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let out = self.map_bloch(bloch_vector(rho)?);
        let norm = (out[0] * out[0] + out[1] * out[1] + out[2] * out[2]).sqrt();
        if norm > 1.0 + BLOCH_BALL_TOL {
            return Err(Error::NonPhysicalOutput { norm });
        }
        Ok(density_from_bloch(out))
    }

    /// Apply a Kraus-backed channel to the first factor of a bipartite pure
    /// state, returning (Lambda ⊗ id)(|psi><psi|).
    pub fn apply_to_first_factor(&self, psi: &PureState) -> Result<DensityOperator> {
        let kraus = self
            .kraus
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("channel has no Kraus form".into()))?;
        let dims = psi.dims();
        if dims.len() != 2 || dims.dim(0) != 2 {
            return Err(Error::WrongDims(format!(
                "expected a [2, D] pure state, got {:?}",
                dims.as_slice()
            )));
        }
        let d = dims.dim(1);
        let amps = psi.amplitudes();
        let n = 2 * d;
        let mut out = ComplexMatrix::zeros(n, n);
        for k in kraus {
            let mut phi = vec![ZERO; n];
            for ap in 0..2 {
                for b in 0..d {
                    phi[ap * d + b] = k.get(ap, 0) * amps[b] + k.get(ap, 1) * amps[d + b];
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let v = out.get(i, j) + phi[i] * phi[j].conj();
                    out.set(i, j, v);
                }
            }
        }
        DensityOperator::new(out, dims.clone())
    }
}

/// A POVM element: a PSD operator bounded by the identity.
#[derive(Debug, Clone)]
pub struct PovmElement {
    matrix: ComplexMatrix,
}

impl PovmElement {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::WrongDims("POVM element must be square".into()));
        }
        let (values, _) = herm_eig(&matrix)?;
        for &v in &values {
            if !(-1e-10..=1.0 + 1e-10).contains(&v) {
                return Err(Error::NotPositive { min_eigenvalue: v.min(1.0 - v) });
            }
        }
        Ok(Self { matrix })
    }

    /// The weighted projector q (I + m.sigma)/2 onto the +1 eigenstate of
    /// m.sigma, the family that carries two-outcome optima.
    pub fn weighted_projector(q: f64, direction: Vec3) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidArgument(format!("weight q={q} outside [0, 1]")));
        }
        let n = (direction[0].powi(2) + direction[1].powi(2) + direction[2].powi(2)).sqrt();
        if n < 1e-12 {
            return Err(Error::InvalidArgument("zero direction".into()));
        }
        let r = [direction[0] / n, direction[1] / n, direction[2] / n];
        let m = density_from_bloch(r).matrix().scale(Complex64::new(q, 0.0));
        Self::new(m)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// I - M, the complementary outcome.
    pub fn complement(&self) -> Result<Self> {
        Self::new(ComplexMatrix::identity(self.matrix.rows()).sub(&self.matrix))
    }
}

/// Linear Holevo capacity in closed form: lambda_max(LᵀL) · S2(rho).
/// Depends on the linear part only, never on the shift.
pub fn chi2_closed(ch: &QubitChannel, rho: &DensityOperator) -> Result<f64> {
    let s1 = ch.sigma_max();
    Ok(s1 * s1 * crate::measures::linear_entropy(rho)?)
}

/// Golden-angle spiral directions covering the unit sphere.
fn sphere_directions(n: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let th = golden * i as f64;
            [r * th.cos(), r * th.sin(), z]
        })
        .collect()
}

fn unit_from_angles(theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Two-point ensemble search for the linear Holevo capacity: a chord through
/// the Bloch point of `rho` meets the sphere at two pure states whose mixing
/// probabilities are fixed by the chord geometry. The best of `grid` spiral
/// directions is polished by a bounded pattern search.
///
/// Returns a lower bound on chi2 together with the achieving ensemble; the
/// value is computed by applying the channel to actual states, independent of
/// the closed form.
pub fn chi2_bruteforce(
    ch: &QubitChannel,
    rho: &DensityOperator,
    grid: usize,
    refine_iters: usize,
) -> Result<(f64, Ensemble)> {
    let r_b = bloch_vector(rho)?;
    let r_sq = r_b[0] * r_b[0] + r_b[1] * r_b[1] + r_b[2] * r_b[2];
    if 1.0 - r_sq <= 1e-12 {
        // Pure input: the only decomposition is the state itself.
        let n = r_sq.sqrt();
        let psi = pure_from_bloch([r_b[0] / n, r_b[1] / n, r_b[2] / n]);
        return Ok((0.0, Ensemble::new(vec![(1.0, psi)])?));
    }
    let out_s2 = crate::measures::linear_entropy(&ch.apply(rho)?)?;

    let chord = |dir: Vec3| -> Option<(f64, [f64; 2], [Vec3; 2])> {
        let beta = r_b[0] * dir[0] + r_b[1] * dir[1] + r_b[2] * dir[2];
        let disc = (beta * beta + 1.0 - r_sq).max(0.0);
        let sq = disc.sqrt();
        if sq < 1e-12 {
            return None;
        }
        let t_plus = -beta + sq;
        let t_minus = -beta - sq;
        let p_plus = (beta + sq) / (2.0 * sq);
        let p_minus = 1.0 - p_plus;
        let r_plus = [r_b[0] + t_plus * dir[0], r_b[1] + t_plus * dir[1], r_b[2] + t_plus * dir[2]];
        let r_minus = [
            r_b[0] + t_minus * dir[0],
            r_b[1] + t_minus * dir[1],
            r_b[2] + t_minus * dir[2],
        ];
        Some((0.0, [p_plus, p_minus], [r_plus, r_minus]))
    };
    let evaluate = |dir: Vec3| -> Result<Option<(f64, [f64; 2], [Vec3; 2])>> {
        let Some((_, ps, rs)) = chord(dir) else { return Ok(None) };
        let mut value = out_s2;
        for (p, r) in ps.iter().zip(&rs) {
            if *p < 1e-15 {
                continue;
            }
            value -= p * crate::measures::linear_entropy(&ch.apply(&density_from_bloch(*r))?)?;
        }
        Ok(Some((value, ps, rs)))
    };

    let mut best: Option<(f64, [f64; 2], [Vec3; 2])> = None;
    let mut best_angles = (0.0, 0.0);
    for dir in sphere_directions(grid.max(8)) {
        if let Some(cand) = evaluate(dir)? {
            if best.as_ref().map_or(true, |(v, _, _)| cand.0 > *v) {
                best_angles = (dir[2].clamp(-1.0, 1.0).acos(), dir[1].atan2(dir[0]));
                best = Some(cand);
            }
        }
    }
    let mut best = best.ok_or_else(|| Error::InvalidArgument("no valid chord direction".into()))?;

    let mut step = (4.0 * std::f64::consts::PI / grid.max(8) as f64).sqrt();
    let (mut theta, mut phi) = best_angles;
    for _ in 0..refine_iters {
        let mut moved = false;
        for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            if let Some(cand) = evaluate(unit_from_angles(theta + dt, phi + dp))? {
                if cand.0 > best.0 {
                    best = cand;
                    theta += dt;
                    phi += dp;
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
            if step < 1e-9 {
                break;
            }
        }
    }

    let (value, ps, rs) = best;
    let mut members = Vec::new();
    for (p, r) in ps.iter().zip(&rs) {
        if *p < 1e-14 {
            continue;
        }
        let n = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        members.push((*p, pure_from_bloch([r[0] / n, r[1] / n, r[2] / n])));
    }
    let total: f64 = members.iter().map(|(p, _)| p).sum();
    for m in &mut members {
        m.0 /= total;
    }
    Ok((value.max(0.0), Ensemble::new(members)?))
}

/// Channel-state duality: the channel whose action on half of the symmetric
/// purification of rho_B reproduces rho_AB.
///
/// The Choi operator (I ⊗ rho_B^{-1/2}) rho_AB (I ⊗ rho_B^{-1/2}) is built in
/// the eigenbasis of rho_B; its eigenvectors reshape into Kraus operators,
/// which also certify complete positivity. A rank-one marginal signals a
/// product state and yields the constant channel onto rho_A.
pub fn dual_channel_of_state(rho_ab: &DensityOperator) -> Result<(QubitChannel, DensityOperator)> {
    let dims = rho_ab.dims();
    if dims.as_slice() != [2, 2] {
        return Err(Error::WrongDims(format!(
            "duality expects a [2, 2] state, got {:?}",
            dims.as_slice()
        )));
    }
    let rho_b = rho_ab.marginal(&[1])?;
    let (b_vals, b_vecs) = herm_eig(rho_b.matrix())?;
    let rank = b_vals.iter().filter(|&&v| v > RANK_TOL_DEFAULT).count();

    if rank <= 1 {
        // Pure marginal forces rho_AB = rho_A ⊗ psi_B: the dual is the
        // constant channel onto rho_A.
        let rho_a = rho_ab.marginal(&[0])?;
        let (a_vals, a_vecs) = herm_eig(rho_a.matrix())?;
        let mut kraus = Vec::new();
        for (i, &mu) in a_vals.iter().enumerate() {
            if mu <= 1e-14 {
                continue;
            }
            let w = mu.sqrt();
            for j in 0..2 {
                let mut k = ComplexMatrix::zeros(2, 2);
                for a in 0..2 {
                    k.set(a, j, a_vecs.get(a, i) * w);
                }
                kraus.push(k);
            }
        }
        return Ok((QubitChannel::from_kraus(kraus)?, rho_b));
    }

    let w = psd_pinv_sqrt(rho_b.matrix(), RANK_TOL_DEFAULT)?;
    let iw = kron(&ComplexMatrix::identity(2), &w);
    let choi = iw.mul(rho_ab.matrix()).mul(&iw).hermitian_part();
    let (mu, vecs) = herm_eig(&choi)?;
    let mu_max = mu.first().copied().unwrap_or(0.0).max(0.0);

    let mut kraus = Vec::new();
    for (k, &m) in mu.iter().enumerate() {
        if m <= 1e-12 * mu_max {
            continue;
        }
        let scale = m.sqrt();
        // K[a][c] = sqrt(mu) sum_i (sum_b w[2a+b] conj(V[b,i])) conj(V[c,i])
        let mut op = ComplexMatrix::zeros(2, 2);
        for a in 0..2 {
            for c in 0..2 {
                let mut acc = ZERO;
                for i in 0..2 {
                    let mut col = ZERO;
                    for b in 0..2 {
                        col += vecs.get(a * 2 + b, k) * b_vecs.get(b, i).conj();
                    }
                    acc += col * b_vecs.get(c, i).conj();
                }
                op.set(a, c, acc * scale);
            }
        }
        kraus.push(op);
    }
    Ok((QubitChannel::from_kraus(kraus)?, rho_b))
}

/// Reconstruct (Lambda ⊗ id)(|r><r|) from a dual channel and the marginal it
/// was derived from, for residual checks against the original state.
pub fn reconstruct_from_dual(ch: &QubitChannel, rho_b: &DensityOperator) -> Result<DensityOperator> {
    let purification = symmetric_purification(rho_b)?;
    ch.apply_to_first_factor(&purification)
}

/// One-way correlation measure of a two-qubit state through the duality:
/// lambda_max(LᵀL) · S2(rho_B) for the dual channel's linear part.
pub fn i2_arrow(rho_ab: &DensityOperator) -> Result<f64> {
    let (ch, rho_b) = dual_channel_of_state(rho_ab)?;
    let s1 = ch.sigma_max();
    Ok((s1 * s1 * crate::measures::linear_entropy(&rho_b)?).clamp(0.0, 1.0))
}

/// Direct POVM search for the one-way correlation measure over two-outcome
/// measurements {M, I - M} with M = q (I + m.sigma)/2, parametrized by the
/// weight q and the direction m. Returns a lower bound on I2<-.
pub fn i2_arrow_povm_oracle(
    rho_ab: &DensityOperator,
    grid: usize,
    refine_iters: usize,
) -> Result<f64> {
    let dims = rho_ab.dims();
    if dims.as_slice() != [2, 2] {
        return Err(Error::WrongDims(format!(
            "POVM oracle expects a [2, 2] state, got {:?}",
            dims.as_slice()
        )));
    }
    let rho_a = rho_ab.marginal(&[0])?;
    let s2_a = crate::measures::linear_entropy(&rho_a)?;

    // Conditional operators T(M) = tr_B((I ⊗ M) rho) are linear in M;
    // precompute them for the Pauli basis.
    let m_full = rho_ab.matrix();
    let conditional = |op: &ComplexMatrix| -> [Complex64; 4] {
        let mut out = [ZERO; 4];
        for a in 0..2 {
            for ap in 0..2 {
                let mut acc = ZERO;
                for b in 0..2 {
                    for bpp in 0..2 {
                        acc += op.get(b, bpp) * m_full.get(a * 2 + bpp, ap * 2 + b);
                    }
                }
                out[a * 2 + ap] = acc;
            }
        }
        out
    };
    let t_id = conditional(&ComplexMatrix::identity(2));
    let sigma = paulis();
    let t_pauli: Vec<[Complex64; 4]> = sigma.iter().map(conditional).collect();

    let evaluate = |q: f64, dir: Vec3| -> f64 {
        let half_q = 0.5 * q.clamp(1e-9, 1.0);
        let mut a_plus = [ZERO; 4];
        for k in 0..4 {
            let mut acc = t_id[k];
            for (x, t) in dir.iter().zip(&t_pauli) {
                acc += *x * t[k];
            }
            a_plus[k] = acc * half_q;
        }
        let a_minus = [
            t_id[0] - a_plus[0],
            t_id[1] - a_plus[1],
            t_id[2] - a_plus[2],
            t_id[3] - a_plus[3],
        ];
        s2_a - crate::measures::weighted_linear_entropy_2x2(&a_plus)
            - crate::measures::weighted_linear_entropy_2x2(&a_minus)
    };

    let q_grid: Vec<f64> = (1..=20).map(|k| k as f64 / 20.0).collect();
    let mut best_v = 0.0f64;
    let mut best_q = 0.5;
    let mut best_angles = (0.0, 0.0);
    for dir in sphere_directions(grid.max(8)) {
        for &q in &q_grid {
            let v = evaluate(q, dir);
            if v > best_v {
                best_v = v;
                best_q = q;
                best_angles = (dir[2].clamp(-1.0, 1.0).acos(), dir[1].atan2(dir[0]));
            }
        }
    }

    let (mut theta, mut phi) = best_angles;
    let mut step = (4.0 * std::f64::consts::PI / grid.max(8) as f64).sqrt();
    let mut q_step = 0.05;
    for _ in 0..refine_iters {
        let mut moved = false;
        let candidates = [
            (step, 0.0, 0.0),
            (-step, 0.0, 0.0),
            (0.0, step, 0.0),
            (0.0, -step, 0.0),
            (0.0, 0.0, q_step),
            (0.0, 0.0, -q_step),
        ];
        for (dt, dp, dq) in candidates {
            let q = (best_q + dq).clamp(1e-6, 1.0);
            let v = evaluate(q, unit_from_angles(theta + dt, phi + dp));
            if v > best_v {
                best_v = v;
                best_q = q;
                theta += dt;
                phi += dp;
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
            q_step *= 0.5;
            if step < 1e-9 && q_step < 1e-9 {
                break;
            }
        }
    }

    debug_assert!(
        PovmElement::weighted_projector(best_q, unit_from_angles(theta, phi))
            .and_then(|m| m.complement())
            .is_ok(),
        "optimal POVM must be physical"
    );
    Ok(best_v.max(0.0))
}

/// Local filtering (I ⊗ B) rho (I ⊗ B)† / tr((I ⊗ B†B) rho); returns the
/// normalized state and the normalization trace.
pub fn local_filter(
    rho_ab: &DensityOperator,
    filter: &ComplexMatrix,
) -> Result<(DensityOperator, f64)> {
    if rho_ab.dims().as_slice() != [2, 2] {
        return Err(Error::WrongDims("local_filter expects a [2, 2] state".into()));
    }
    if filter.rows() != 2 || filter.cols() != 2 {
        return Err(Error::WrongDims("filter must be 2x2".into()));
    }
    let f = kron(&ComplexMatrix::identity(2), filter);
    let numerator = f.mul(rho_ab.matrix()).mul(&f.adjoint());
    let norm = numerator.trace().re;
    if norm <= 1e-12 {
        return Err(Error::VanishingNorm { trace: norm });
    }
    let filtered = numerator.scale(Complex64::new(1.0 / norm, 0.0)).hermitian_part();
    Ok((
        DensityOperator::new(filtered, DimsVector::qubits(2))?,
        norm,
    ))
}

/// Filter a full-rank state into the normal form with rho_B' = I/2, using
/// B = rho_B^{-1/2} / sqrt(2) (unit normalization). Rank-deficient marginals
/// have no normal form: the partner is pure, so tangle and I2<- both vanish.
pub fn normal_form_filter(rho_ab: &DensityOperator) -> Result<(DensityOperator, ComplexMatrix)> {
    if rho_ab.dims().as_slice() != [2, 2] {
        return Err(Error::WrongDims("normal_form_filter expects a [2, 2] state".into()));
    }
    let rho_b = rho_ab.marginal(&[1])?;
    let (values, _) = herm_eig(rho_b.matrix())?;
    if values[1] <= RANK_TOL_DEFAULT {
        return Err(Error::RankDeficientMarginal);
    }
    let b = psd_pinv_sqrt(rho_b.matrix(), RANK_TOL_DEFAULT)?
        .scale(Complex64::new(1.0 / 2.0_f64.sqrt(), 0.0));
    let (filtered, _norm) = local_filter(rho_ab, &b)?;
    Ok((filtered, b))
}

/// Haar-random Kraus-backed channel from a random Stinespring isometry into
/// a four-dimensional environment.
pub fn random_channel(seed: u64) -> QubitChannel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        // Two orthonormal columns in C^8 via Gram-Schmidt.
        let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(2);
        while cols.len() < 2 {
            let mut v: Vec<Complex64> = (0..8)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            for prev in &cols {
                let overlap: Complex64 = prev.iter().zip(&v).map(|(p, x)| p.conj() * x).sum();
                for (x, p) in v.iter_mut().zip(prev) {
                    *x -= overlap * p;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                continue;
            }
            for x in &mut v {
                *x /= norm;
            }
            cols.push(v);
        }
        // Kraus operators indexed by the environment: K_e[a][b] = V[a*4+e][b].
        let kraus: Vec<ComplexMatrix> = (0..4)
            .map(|e| {
                let mut k = ComplexMatrix::zeros(2, 2);
                for a in 0..2 {
                    for b in 0..2 {
                        k.set(a, b, cols[b][a * 4 + e]);
                    }
                }
                k
            })
            .collect();
        if let Ok(ch) = QubitChannel::from_kraus(kraus) {
            return ch;
        }
    }
}
