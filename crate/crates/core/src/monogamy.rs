//! The inequality and identity checkers: CKW residuals over multiqubit pure
//! states, the tripartite inductive step, the Koashi-Winter identity, the
//! central two-qubit lemma tau <= I2<-, the spectral lower bound on the
//! dual channel, and the lattice corollaries.

use crate::channels::{dual_channel_of_state, i2_arrow, normal_form_filter};
use crate::error::{Error, Result};
use crate::measures::{
    concurrence_two_qubit, tangle_pure_split, tangle_roof_upper, tangle_two_qubit,
};
use crate::states::{DensityOperator, PureState};

/// Residuals are considered violations below this unless a caller overrides.
pub const INEQUALITY_TOL: f64 = 1e-9;

/// One evaluated inequality instance: lhs, rhs and their difference, plus
/// bookkeeping for campaign reports.
#[derive(Debug, Clone)]
pub struct ResidualSample {
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Short descriptor of the state behind the sample, when one exists.
    pub witness: Option<String>,
    /// True when a roof upper bound stands in for the lhs, which weakens the
    /// check direction (mixed-state inductive steps).
    pub advisory: bool,
}

impl ResidualSample {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Self { seed: 0, lhs, rhs, residual: lhs - rhs, witness: None, advisory: false }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_witness(mut self, witness: impl Into<String>) -> Self {
        self.witness = Some(witness.into());
        self
    }

    fn advisory(mut self) -> Self {
        self.advisory = true;
        self
    }
}

/// CKW residual of a multiqubit pure state at the given focus:
/// lhs = S2 of the focus marginal, rhs = sum of pairwise Wootters tangles.
/// The pairwise terms use the exact closed form, never the optimizer.
pub fn ckw_residual(psi: &PureState, focus: usize) -> Result<ResidualSample> {
    let n = psi.dims().len();
    if psi.dims().as_slice().iter().any(|&d| d != 2) {
        return Err(Error::WrongDims(format!(
            "ckw_residual expects qubits only, got {:?}",
            psi.dims().as_slice()
        )));
    }
    if !(2..=10).contains(&n) {
        return Err(Error::WrongDims(format!("ckw_residual supports 2..=10 qubits, got {n}")));
    }
    if focus >= n {
        return Err(Error::WrongDims(format!("focus {focus} out of range for {n} qubits")));
    }
    let lhs = tangle_pure_split(psi, focus)?;
    let mut rhs = 0.0;
    for j in 0..n {
        if j == focus {
            continue;
        }
        rhs += tangle_two_qubit(&psi.marginal(&[focus, j])?)?;
    }
    Ok(ResidualSample::new(lhs, rhs))
}

/// Tripartite inductive step on a [2, 2, d_C] state (d_C <= 4):
/// tau(A:(BC)) >= tau(AB) + tau(AC).
///
/// For pure inputs the lhs is exact and the rhs uses a roof upper bound on
/// tau(AC), so a nonnegative residual is a conservative check. For mixed
/// inputs the lhs itself is a roof upper bound and the sample is flagged
/// advisory.
pub fn inductive_step_check(
    rho: &DensityOperator,
    restarts: usize,
    seed: u64,
) -> Result<ResidualSample> {
    let dims = rho.dims();
    if dims.len() != 3 || dims.dim(0) != 2 || dims.dim(1) != 2 || dims.dim(2) > 4 {
        return Err(Error::WrongDims(format!(
            "inductive step expects [2, 2, d<=4], got {:?}",
            dims.as_slice()
        )));
    }
    let d_c = dims.dim(2);

    let rho_ab = rho.marginal(&[0, 1])?;
    let rho_ac = rho.marginal(&[0, 2])?;
    let tau_ab = tangle_two_qubit(&rho_ab)?;
    let tau_ac = tangle_roof_upper(&rho_ac, restarts, None, 1e-6, seed)?.value;
    let rhs = tau_ab + tau_ac;

    let pure = rho.purity() >= 1.0 - 1e-10;
    let (lhs, advisory) = if pure {
        let psi = rho.dominant_eigenvector()?;
        (tangle_pure_split(&psi, 0)?, false)
    } else {
        let grouped = rho.with_dims(&[2, 2 * d_c])?;
        (
            tangle_roof_upper(&grouped, restarts, None, 1e-6, seed.wrapping_add(1))?.value,
            true,
        )
    };

    let sample = ResidualSample::new(lhs, rhs).with_seed(seed);
    Ok(if advisory { sample.advisory() } else { sample })
}

/// Koashi-Winter residual of a pure [2, 2, d_C] state:
/// S2(rho_A) - I2<-(rho_AB) - tau_roof(rho_AC).
///
/// The roof term upper-bounds tau(AC), so the residual is expected in
/// [-optimizer slack, +round-off].
pub fn koashi_winter_residual(psi: &PureState, restarts: usize, seed: u64) -> Result<f64> {
    let dims = psi.dims();
    if dims.len() != 3 || dims.dim(0) != 2 || dims.dim(1) != 2 || dims.dim(2) > 4 {
        return Err(Error::WrongDims(format!(
            "Koashi-Winter expects a pure [2, 2, d<=4] state, got {:?}",
            dims.as_slice()
        )));
    }
    let s2 = tangle_pure_split(psi, 0)?;
    let i2 = i2_arrow(&psi.marginal(&[0, 1])?)?;
    let roof = tangle_roof_upper(&psi.marginal(&[0, 2])?, restarts, None, 1e-6, seed)?.value;
    Ok(s2 - i2 - roof)
}

/// The central lemma, Eq. tau <= I2<-, both sides in closed form:
/// lhs = I2<-(rho), rhs = tangle(rho).
pub fn tau_le_i2(rho_ab: &DensityOperator) -> Result<ResidualSample> {
    let lhs = i2_arrow(rho_ab)?;
    let rhs = tangle_two_qubit(rho_ab)?;
    Ok(ResidualSample::new(lhs, rhs))
}

/// Spectral lower bound on the concurrence: after filtering to the normal
/// form, sigma_max(L) of the dual channel dominates the concurrence.
/// Rank-deficient partner marginals mean a product state, where both sides
/// vanish by the tau = 0 convention.
pub fn sigma_max_vs_concurrence(rho_ab: &DensityOperator) -> Result<ResidualSample> {
    match normal_form_filter(rho_ab) {
        Ok((filtered, _)) => {
            let (ch, _) = dual_channel_of_state(&filtered)?;
            let lhs = ch.sigma_max();
            let rhs = concurrence_two_qubit(&filtered)?;
            Ok(ResidualSample::new(lhs, rhs))
        }
        Err(Error::RankDeficientMarginal) => {
            let (ch, _) = dual_channel_of_state(rho_ab)?;
            let lhs = ch.sigma_max();
            let rhs = concurrence_two_qubit(rho_ab)?;
            Ok(ResidualSample::new(lhs, rhs).with_witness("rank-deficient marginal"))
        }
        Err(e) => Err(e),
    }
}

/// Frustration bound for a translation-invariant spin-1/2 lattice with
/// coordination number d and magnetization m: C <= (1 - m^2) / sqrt(d).
pub fn lattice_concurrence_bound(d: usize, m: f64) -> Result<f64> {
    if d < 1 {
        return Err(Error::InvalidArgument("coordination number must be >= 1".into()));
    }
    if !(-1.0..=1.0).contains(&m) || !m.is_finite() {
        return Err(Error::InvalidArgument(format!("magnetization {m} outside [-1, 1]")));
    }
    Ok((1.0 - m * m) / (d as f64).sqrt())
}

/// Upper bound on the gap between the mean-field and exact ground-state
/// energy density: exactly half the concurrence bound.
pub fn mean_field_gap_bound(d: usize, m: f64) -> Result<f64> {
    Ok(lattice_concurrence_bound(d, m)? / 2.0)
}
