//! Entanglement and entropy measures: linear entropy, the Wootters
//! concurrence/tangle closed form for two qubits, the pure-state bipartite
//! tangle, and a convex-roof optimizer producing certified tangle upper
//! bounds for mixed qubit-qudit states.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::qlinalg::{herm_eig, kron, paulis, psd_sqrt, ComplexMatrix};
use crate::states::{DensityOperator, Ensemble, PureState};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Eigenvalue weights below this do not contribute decomposition directions.
const ROOF_RANK_TOL: f64 = 1e-12;
/// Ensemble members lighter than this are dropped from the returned roof.
const ROOF_MEMBER_TOL: f64 = 1e-14;

/// Linear entropy of a qubit state: 2(1 - tr rho^2) = 4 det rho.
pub fn linear_entropy(rho: &DensityOperator) -> Result<f64> {
    if rho.dim() != 2 {
        return Err(Error::WrongDims(format!(
            "linear_entropy expects a qubit, got dimension {}",
            rho.dim()
        )));
    }
    Ok((2.0 * (1.0 - rho.purity())).clamp(0.0, 1.0))
}

/// Wootters concurrence of a two-qubit state.
///
/// The descending square roots of the spectrum of
/// rho (sy ⊗ sy) rho* (sy ⊗ sy) equal the singular values of
/// X = sqrt(rho) (sy ⊗ sy) conj(sqrt(rho)); those are read off the Hermitian
/// block embedding [[0, X], [X†, 0]], which keeps the near-zero ones at
/// machine precision instead of the 1e-8 noise a square root of an
/// eigenvalue would give. C = max(0, l1 - l2 - l3 - l4).
pub fn concurrence_two_qubit(rho: &DensityOperator) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::WrongDims(format!(
            "concurrence expects two qubits, got dimension {}",
            rho.dim()
        )));
    }
    let sy = &paulis()[1];
    let yy = kron(sy, sy);
    let root = psd_sqrt(rho.matrix())?;
    // Conjugation in the computational basis.
    let x = root.mul(&yy).mul(&root.conj());

    let mut block = ComplexMatrix::zeros(8, 8);
    for i in 0..4 {
        for j in 0..4 {
            block.set(i, 4 + j, x.get(i, j));
            block.set(4 + j, i, x.get(i, j).conj());
        }
    }
    let (values, _) = herm_eig(&block)?;
    let lam: Vec<f64> = values.iter().take(4).map(|&v| v.max(0.0)).collect();
    Ok((lam[0] - lam[1] - lam[2] - lam[3]).clamp(0.0, 1.0))
}

/// Tangle of a two-qubit state: the squared concurrence.
pub fn tangle_two_qubit(rho: &DensityOperator) -> Result<f64> {
    let c = concurrence_two_qubit(rho)?;
    Ok(c * c)
}

/// Tangle of a pure state across the bipartition focus : rest, i.e. the
/// linear entropy of the focus qubit's marginal.
pub fn tangle_pure_split(psi: &PureState, focus: usize) -> Result<f64> {
    if focus >= psi.dims().len() {
        return Err(Error::WrongDims(format!("focus {focus} out of range")));
    }
    if psi.dims().dim(focus) != 2 {
        return Err(Error::WrongDims(format!(
            "focus subsystem has dimension {}, expected 2",
            psi.dims().dim(focus)
        )));
    }
    linear_entropy(&psi.marginal(&[focus])?)
}

/// Outcome of the convex-roof search.
#[derive(Debug, Clone)]
pub struct RoofResult {
    /// Certified upper bound on the tangle: exactly the roof average of
    /// `ensemble`.
    pub value: f64,
    /// The achieving decomposition.
    pub ensemble: Ensemble,
    pub restarts_used: usize,
    /// True when the best two restarts agree within the requested tolerance.
    pub converged: bool,
}

/// 2x2 complex accumulator used by the roof objective.
type Mat2 = [Complex64; 4];

#[inline]
fn mat2_zero() -> Mat2 {
    [ZERO; 4]
}

/// Weighted linear entropy of a subnormalized 2x2 marginal:
/// p * S2(A/p) = 4 det(A)/tr(A) for tr(A) = p. Shared with the POVM and
/// ensemble optimizers in `channels`.
#[inline]
pub(crate) fn weighted_linear_entropy_2x2(a: &Mat2) -> f64 {
    weighted_s2(a)
}

#[inline]
fn weighted_s2(a: &Mat2) -> f64 {
    let tr = (a[0] + a[3]).re;
    if tr <= 1e-15 {
        return 0.0;
    }
    let det = (a[0] * a[3] - a[1] * a[2]).re;
    (4.0 * det / tr).max(0.0)
}

struct RoofProblem {
    /// Cross marginals tr_B |v~_i><v~_j| of the subnormalized eigenvectors.
    cross: Vec<Mat2>,
    rank: usize,
    members: usize,
}

impl RoofProblem {
    fn cross_at(&self, i: usize, j: usize) -> &Mat2 {
        &self.cross[i * self.rank + j]
    }

    /// Marginal accumulator for the pair of rows (x, y) of U:
    /// A_xy = sum_ij U[x,i] conj(U[y,j]) M_ij.
    fn pair_marginal(&self, u: &[Vec<Complex64>], x: usize, y: usize) -> Mat2 {
        let r = self.rank;
        let mut out = mat2_zero();
        for i in 0..r {
            let ux = u[x][i];
            if ux == ZERO {
                continue;
            }
            for j in 0..r {
                let w = ux * u[y][j].conj();
                let m = self.cross_at(i, j);
                out[0] += w * m[0];
                out[1] += w * m[1];
                out[2] += w * m[2];
                out[3] += w * m[3];
            }
        }
        out
    }

    fn objective(&self, u: &[Vec<Complex64>]) -> f64 {
        (0..self.members)
            .map(|x| weighted_s2(&self.pair_marginal(u, x, x)))
            .sum()
    }
}

/// Evaluate the two-member objective after rotating rows (x, y) by
/// G = [[c, s e^{i phi}], [-s e^{-i phi}, c]].
#[inline]
fn rotated_pair_objective(axx: &Mat2, ayy: &Mat2, axy: &Mat2, theta: f64, phi: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let (c2, s2, cs) = (c * c, s * s, c * s);
    let e = Complex64::from_polar(1.0, -phi);
    let mut ax = mat2_zero();
    let mut ay = mat2_zero();
    for k in 0..4 {
        // e^{-i phi} A_xy + (e^{-i phi} A_xy)† accumulated entrywise:
        // the adjoint of a row-major 2x2 swaps indices 1 and 2.
        let kt = [0usize, 2, 1, 3][k];
        let herm = e * axy[k] + (e * axy[kt]).conj();
        ax[k] = c2 * axx[k] + s2 * ayy[k] + cs * herm;
        ay[k] = axx[k] + ayy[k] - ax[k];
    }
    weighted_s2(&ax) + weighted_s2(&ay)
}

/// Gram-Schmidt a random complex Gaussian m x r matrix into an isometry
/// (orthonormal columns), stored row-wise.
fn random_isometry(m: usize, r: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Complex64>> {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(r);
    while cols.len() < r {
        let mut v: Vec<Complex64> = (0..m)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        for _pass in 0..2 {
            for prev in &cols {
                let overlap: Complex64 = prev.iter().zip(&v).map(|(p, x)| p.conj() * x).sum();
                for (x, p) in v.iter_mut().zip(prev) {
                    *x -= overlap * p;
                }
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
    // Transpose to rows: u[x][i] is the weight of eigenvector i in member x.
    (0..m)
        .map(|x| (0..r).map(|i| cols[i][x]).collect())
        .collect()
}

/// Convex-roof upper bound on the tangle of a qubit-qudit state.
///
/// Decompositions of cardinality m are parametrized by m x rank isometries
/// mixing the subnormalized eigenvectors of rho; each restart draws a Haar
/// isometry and descends by sweeping two-row rotations, each optimized over
/// a mixing angle and relative phase by grid search plus pattern refinement.
///
/// The returned value is recomputed as the roof average of the returned
/// ensemble, so it is an upper bound on the tangle regardless of optimizer
/// convergence. `max_members` defaults to rank^2.
pub fn tangle_roof_upper(
    rho: &DensityOperator,
    restarts: usize,
    max_members: Option<usize>,
    tol: f64,
    seed: u64,
) -> Result<RoofResult> {
    let dims = rho.dims();
    if dims.len() != 2 {
        return Err(Error::WrongDims(format!(
            "roof expects a bipartite [2, D] operator, got {:?}",
            dims.as_slice()
        )));
    }
    if dims.dim(0) != 2 {
        return Err(Error::WrongDims(format!(
            "first factor has dimension {}, expected a qubit",
            dims.dim(0)
        )));
    }
    let d = dims.dim(1);
    if d > 8 {
        return Err(Error::WrongDims(format!(
            "partner dimension {d} exceeds the supported 8 (compress the tail first)"
        )));
    }

    let (values, vectors) = herm_eig(rho.matrix())?;
    let rank = values.iter().filter(|&&lam| lam > ROOF_RANK_TOL).count().max(1);

    // Subnormalized eigenvectors sqrt(lambda_i) |v_i>.
    let dim = rho.dim();
    let sub: Vec<Vec<Complex64>> = (0..rank)
        .map(|k| {
            let w = values[k].max(0.0).sqrt();
            (0..dim).map(|i| vectors.get(i, k) * w).collect()
        })
        .collect();

    let member_state = |weights: &[Complex64]| -> Option<(f64, PureState)> {
        let mut amps = vec![ZERO; dim];
        for (i, col) in sub.iter().enumerate() {
            let w = weights[i];
            if w == ZERO {
                continue;
            }
            for (a, s) in amps.iter_mut().zip(col) {
                *a += w * s;
            }
        }
        let p: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if p < ROOF_MEMBER_TOL {
            return None;
        }
        let psi = PureState::normalized(dims.clone(), amps).ok()?;
        Some((p, psi))
    };

    let finish = |weights_per_member: Vec<Vec<Complex64>>, restarts_used, converged| -> Result<RoofResult> {
        let mut members = Vec::new();
        for w in &weights_per_member {
            if let Some(m) = member_state(w) {
                members.push(m);
            }
        }
        let total: f64 = members.iter().map(|(p, _)| p).sum();
        for m in &mut members {
            m.0 /= total;
        }
        let ensemble = Ensemble::new(members)?;
        let mut value = 0.0;
        for (p, psi) in ensemble.members() {
            value += p * tangle_pure_split(psi, 0)?;
        }
        Ok(RoofResult { value: value.max(0.0), ensemble, restarts_used, converged })
    };

    if rank == 1 {
        // Pure state: the decomposition is unique.
        let mut w = vec![ZERO; 1];
        w[0] = Complex64::new(1.0, 0.0);
        return finish(vec![w], 0, true);
    }

    let members = max_members.unwrap_or(rank * rank).clamp(rank, 32);

    // Cross marginals M_ij = tr_B |v~_i><v~_j| over the qubit factor.
    let mut cross = vec![mat2_zero(); rank * rank];
    for i in 0..rank {
        for j in 0..rank {
            let mut m = mat2_zero();
            for a in 0..2 {
                for ap in 0..2 {
                    let mut acc = ZERO;
                    for b in 0..d {
                        acc += sub[i][a * d + b] * sub[j][ap * d + b].conj();
                    }
                    m[a * 2 + ap] = acc;
                }
            }
            cross[i * rank + j] = m;
        }
    }
    let problem = RoofProblem { cross, rank, members };

    let mut restart_values: Vec<f64> = Vec::with_capacity(restarts);
    let mut best: Option<(f64, Vec<Vec<Complex64>>)> = None;

    for restart in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart as u64));
        let mut u = random_isometry(members, rank, &mut rng);
        let obj = descend(&problem, &mut u, 40);
        restart_values.push(obj);
        if best.as_ref().map_or(true, |(v, _)| obj < *v) {
            best = Some((obj, u));
        }
    }

    restart_values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let converged = restart_values.len() >= 2 && (restart_values[1] - restart_values[0]).abs() <= tol;
    let (mut best_obj, mut u) = best.expect("at least one restart ran");

    // Perturbation polish: the pair sweep can park on flat stationary sets;
    // small random pair rotations followed by a fresh descent walk off them.
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9E37_79B9_7F4A_7C15));
    for &angle in &[0.08f64, 0.03, 0.01, 0.003] {
        let mut cand = u.clone();
        for x in 0..members {
            let y = (x + 1) % members;
            let theta = angle * (rng.gen::<f64>() - 0.5) * 2.0;
            let phi = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
            let (s, c) = theta.sin_cos();
            let e_pos = Complex64::from_polar(1.0, phi);
            for i in 0..rank {
                let ux = cand[x][i];
                let uy = cand[y][i];
                cand[x][i] = c * ux + s * e_pos * uy;
                cand[y][i] = -s * e_pos.conj() * ux + c * uy;
            }
        }
        let obj = descend(&problem, &mut cand, 25);
        if obj < best_obj - 1e-15 {
            best_obj = obj;
            u = cand;
        }
    }

    finish(u, restarts.max(1), converged)
}

/// Sweep two-row rotations until a full pass stops paying.
fn descend(problem: &RoofProblem, u: &mut [Vec<Complex64>], max_sweeps: usize) -> f64 {
    let theta_grid: Vec<f64> =
        (0..=5).map(|k| k as f64 * std::f64::consts::FRAC_PI_2 / 5.0).collect();
    let phi_grid: Vec<f64> =
        (0..8).map(|k| k as f64 * 2.0 * std::f64::consts::PI / 8.0).collect();
    let members = problem.members;
    let rank = problem.rank;

    let mut obj = problem.objective(u);
    for _sweep in 0..max_sweeps {
        for x in 0..members {
            for y in (x + 1)..members {
                let axx = problem.pair_marginal(u, x, x);
                let ayy = problem.pair_marginal(u, y, y);
                let axy = problem.pair_marginal(u, x, y);
                let base = weighted_s2(&axx) + weighted_s2(&ayy);

                let mut best_t = 0.0;
                let mut best_p = 0.0;
                let mut best_v = base;
                for &t in &theta_grid {
                    for &p in &phi_grid {
                        let v = rotated_pair_objective(&axx, &ayy, &axy, t, p);
                        if v < best_v {
                            best_v = v;
                            best_t = t;
                            best_p = p;
                        }
                    }
                }
                // Bounded coordinate refinement: rounds of 1-D parabola
                // steps in theta then phi with shrinking probe width;
                // candidates are only accepted on improvement.
                let eval = |t: f64, p: f64| rotated_pair_objective(&axx, &ayy, &axy, t, p);
                let mut h = 0.08;
                for _round in 0..5 {
                    for coord in 0..2 {
                        let at = |delta: f64| {
                            if coord == 0 {
                                eval(best_t + delta, best_p)
                            } else {
                                eval(best_t, best_p + delta)
                            }
                        };
                        let vm = at(-h);
                        let vp = at(h);
                        let v0 = best_v;
                        let mut shift = 0.0;
                        let mut sv = v0;
                        if vm < sv {
                            shift = -h;
                            sv = vm;
                        }
                        if vp < sv {
                            shift = h;
                            sv = vp;
                        }
                        let curv = vm + vp - 2.0 * v0;
                        if curv > 1e-18 {
                            let vertex = (0.5 * h * (vm - vp) / curv).clamp(-3.0 * h, 3.0 * h);
                            let vv = at(vertex);
                            if vv < sv {
                                shift = vertex;
                                sv = vv;
                            }
                        }
                        if sv < best_v {
                            best_v = sv;
                            if coord == 0 {
                                best_t += shift;
                            } else {
                                best_p += shift;
                            }
                        }
                    }
                    h *= 0.12;
                }

                if best_v < base - 1e-16 {
                    let (s, c) = best_t.sin_cos();
                    let e_pos = Complex64::from_polar(1.0, best_p);
                    let e_neg = e_pos.conj();
                    for i in 0..rank {
                        let ux = u[x][i];
                        let uy = u[y][i];
                        u[x][i] = c * ux + s * e_pos * uy;
                        u[y][i] = -s * e_neg * ux + c * uy;
                    }
                }
            }
        }
        let new_obj = problem.objective(u);
        let gained = obj - new_obj;
        obj = new_obj;
        if gained <= 1e-13 {
            break;
        }
    }
    obj
}
