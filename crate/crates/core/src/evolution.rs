//! Adiabatic propagators, the full master-equation oracle and fidelity.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert_schmidt::{devectorize, vectorize, OperatorBasis};
use crate::linalg::{self, CMatrix, CVector};
use crate::lindblad::LindbladModel;
use crate::quadrature::{self, cumulative_trapezoid};
use crate::spectral::{JordanBasis, SpectralTrajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagatorKind {
    OneDimensional,
    Multiblock,
}

#[derive(Debug, Clone)]
pub struct AdiabaticPropagator {
    pub kind: PropagatorKind,
    pub t0: f64,
    pub t: f64,
    pub matrix: CMatrix,
    /// Per block: `int Lambda` (one-dimensional) or `int lambda` (multiblock).
    pub phases: Vec<Complex64>,
    /// Largest shift-constraint residual of the block coefficients.
    pub shift_residual: f64,
}

impl AdiabaticPropagator {
    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }
}

fn grid_pair(traj: &SpectralTrajectory, t0: f64, t: f64) -> Result<(usize, usize)> {
    if t < t0 {
        return Err(Error::InvalidArgument(format!(
            "t = {t} precedes t0 = {t0}"
        )));
    }
    let j0 = quadrature::grid_index(&traj.grid, t0 / traj.horizon)?;
    let j1 = quadrature::grid_index(&traj.grid, t / traj.horizon)?;
    Ok((j0, j1))
}

/// `int_t0^t Lambda_alpha dt'` for a one-dimensional block, where
/// `Lambda = lambda - <E|dD/dt>`. Trapezoid on the trajectory grid.
pub fn adiabatic_phase(
    traj: &SpectralTrajectory,
    alpha: usize,
    t0: f64,
    t: f64,
) -> Result<Complex64> {
    traj.check_block(alpha)?;
    if traj.block_len(alpha) != 1 {
        return Err(Error::WrongKind(format!(
            "block {alpha} is not one-dimensional"
        )));
    }
    let tau = traj.horizon;
    let integrand: Vec<Complex64> = (0..traj.len())
        .map(|j| traj.eigenvalue(alpha, j) * tau - traj.coupling(alpha, 0, alpha, 0, j))
        .collect();
    let cum = cumulative_trapezoid(&traj.grid, &integrand, 0);
    let a = quadrature::interpolate(&traj.grid, &cum, t0 / tau)?;
    let b = quadrature::interpolate(&traj.grid, &cum, t / tau)?;
    Ok(b - a)
}

fn require_one_dimensional(traj: &SpectralTrajectory) -> Result<()> {
    if (0..traj.num_blocks()).any(|b| traj.block_len(b) != 1) {
        return Err(Error::WrongKind(
            "trajectory has multidimensional Jordan blocks".into(),
        ));
    }
    Ok(())
}

fn one_dimensional(
    traj: &SpectralTrajectory,
    t0: f64,
    t: f64,
    inverse: bool,
) -> Result<AdiabaticPropagator> {
    require_one_dimensional(traj)?;
    let (j0, j1) = grid_pair(traj, t0, t)?;
    let (bt0, bt) = (&traj.bases[j0], &traj.bases[j1]);
    let n = bt.dim();
    let mut matrix = CMatrix::zeros(n, n);
    let mut phases = Vec::with_capacity(traj.num_blocks());
    for a in 0..traj.num_blocks() {
        let phase = adiabatic_phase(traj, a, t0, t)?;
        phases.push(phase);
        let (d, e, w) = if inverse {
            (
                &bt0.blocks[a].right[0],
                &bt.blocks[a].left[0],
                (-phase).exp(),
            )
        } else {
            (&bt.blocks[a].right[0], &bt0.blocks[a].left[0], phase.exp())
        };
        matrix += d * e.transpose() * w;
    }
    Ok(AdiabaticPropagator {
        kind: PropagatorKind::OneDimensional,
        t0,
        t,
        matrix,
        phases,
        shift_residual: 0.0,
    })
}

/// `V(t, t0) = sum_a exp(int Lambda_a) |D_a(t)><E_a(t0)|`.
pub fn propagator_1d(traj: &SpectralTrajectory, t0: f64, t: f64) -> Result<AdiabaticPropagator> {
    one_dimensional(traj, t0, t, false)
}

/// `V^-1 = sum_a exp(-int Lambda_a) |D_a(t0)><E_a(t)|`.
pub fn propagator_1d_inverse(
    traj: &SpectralTrajectory,
    t0: f64,
    t: f64,
) -> Result<AdiabaticPropagator> {
    one_dimensional(traj, t0, t, true)
}

/// Intra-block coefficients: `v` solves `dp/dt = (S - G_b) p` from the
/// identity, `v_inv` is its inverse, `S` the upper shift.
#[derive(Debug, Clone)]
pub struct BlockCoefficients {
    pub v: CMatrix,
    pub v_inv: CMatrix,
    /// `max |v_inv S v - S|`.
    pub shift_residual: f64,
    /// `max(|v v_inv - 1|, |v_inv v - 1|)`.
    pub inverse_residual: f64,
}

impl BlockCoefficients {
    pub fn check(&self, tol: f64) -> Result<()> {
        let r = self.shift_residual.max(self.inverse_residual);
        if r > tol {
            return Err(Error::Coefficient { residual: r });
        }
        Ok(())
    }
}

pub fn upper_shift(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Fundamental matrix of the intra-block equation between two grid times.
pub fn block_coefficients(
    traj: &SpectralTrajectory,
    beta: usize,
    t0: f64,
    t: f64,
) -> Result<BlockCoefficients> {
    traj.check_block(beta)?;
    let (j0, j1) = grid_pair(traj, t0, t)?;
    let n = traj.block_len(beta);
    let one = CMatrix::identity(n, n);
    if n == 1 {
        // Closed form: exp(-int <E|dD/ds> ds).
        let c: Vec<Complex64> = (0..traj.len())
            .map(|j| traj.coupling(beta, 0, beta, 0, j))
            .collect();
        let cum = cumulative_trapezoid(&traj.grid, &c, j0);
        let v = CMatrix::from_element(1, 1, (-cum[j1]).exp());
        let v_inv = CMatrix::from_element(1, 1, cum[j1].exp());
        return Ok(BlockCoefficients {
            v,
            v_inv,
            shift_residual: 0.0,
            inverse_residual: 0.0,
        });
    }
    let shift = upper_shift(n);
    let tau = traj.horizon;
    let gen_at = |j: usize| &shift * Complex64::new(tau, 0.0) - traj.block_coupling(beta, j);
    let mut v = one.clone();
    for j in j0..j1 {
        let (a0, a1) = (gen_at(j), gen_at(j + 1));
        let h = traj.grid[j + 1] - traj.grid[j];
        let size = linalg::spectral_norm(&a0).max(linalg::spectral_norm(&a1));
        let steps = ((h * size / 0.02).ceil() as usize).max(1);
        let dh = h / steps as f64;
        let at = |u: f64| &a0 * Complex64::new(1.0 - u, 0.0) + &a1 * Complex64::new(u, 0.0);
        for i in 0..steps {
            let u0 = i as f64 / steps as f64;
            let um = (i as f64 + 0.5) / steps as f64;
            let u1 = (i + 1) as f64 / steps as f64;
            let (b0, bm, b1) = (at(u0), at(um), at(u1));
            let k1 = &b0 * &v;
            let k2 = &bm * (&v + k1.scale(0.5 * dh));
            let k3 = &bm * (&v + k2.scale(0.5 * dh));
            let k4 = &b1 * (&v + k3.scale(dh));
            v += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dh / 6.0);
        }
    }
    let v_inv = v.clone().try_inverse().ok_or(Error::Coefficient {
        residual: f64::INFINITY,
    })?;
    let shift_residual = linalg::max_abs(&(&v_inv * &shift * &v - &shift));
    let inverse_residual =
        linalg::max_abs(&(&v * &v_inv - &one)).max(linalg::max_abs(&(&v_inv * &v - &one)));
    Ok(BlockCoefficients {
        v,
        v_inv,
        shift_residual,
        inverse_residual,
    })
}

fn multiblock(
    traj: &SpectralTrajectory,
    t0: f64,
    t: f64,
    inverse: bool,
) -> Result<AdiabaticPropagator> {
    let (j0, j1) = grid_pair(traj, t0, t)?;
    let (bt0, bt) = (&traj.bases[j0], &traj.bases[j1]);
    let n = bt.dim();
    let tau = traj.horizon;
    let mut matrix = CMatrix::zeros(n, n);
    let mut phases = Vec::new();
    let mut shift_residual = 0.0f64;
    for b in 0..traj.num_blocks() {
        let lam: Vec<Complex64> = traj.eigenvalue_path(b).iter().map(|z| z * tau).collect();
        let phase = cumulative_trapezoid(&traj.grid, &lam, j0)[j1];
        phases.push(phase);
        let coef = block_coefficients(traj, b, t0, t)?;
        shift_residual = shift_residual.max(coef.shift_residual);
        let (right, left, w, c) = if inverse {
            (
                &bt0.blocks[b].right,
                &bt.blocks[b].left,
                (-phase).exp(),
                &coef.v_inv,
            )
        } else {
            (
                &bt.blocks[b].right,
                &bt0.blocks[b].left,
                phase.exp(),
                &coef.v,
            )
        };
        for (i, d) in right.iter().enumerate() {
            for (k, e) in left.iter().enumerate() {
                matrix += d * e.transpose() * (w * c[(i, k)]);
            }
        }
    }
    Ok(AdiabaticPropagator {
        kind: PropagatorKind::Multiblock,
        t0,
        t,
        matrix,
        phases,
        shift_residual,
    })
}

/// `V = sum_b exp(int lambda_b) sum_nm v_nm |D^n_b(t)><E^m_b(t0)|`.
pub fn propagator_multiblock(
    traj: &SpectralTrajectory,
    t0: f64,
    t: f64,
) -> Result<AdiabaticPropagator> {
    multiblock(traj, t0, t, false)
}

/// `V^-1 = sum_b exp(-int lambda_b) sum_nm v_inv_nm |D^n_b(t0)><E^m_b(t)|`.
pub fn propagator_multiblock_inverse(
    traj: &SpectralTrajectory,
    t0: f64,
    t: f64,
) -> Result<AdiabaticPropagator> {
    multiblock(traj, t0, t, true)
}

/// `V^-1 L V` expressed in the frozen basis at `t0`. Diagonal (block
/// diagonal in Jordan form) when the evolution is adiabatic.
pub fn frozen_generator(
    l: &CMatrix,
    forward: &AdiabaticPropagator,
    inverse: &AdiabaticPropagator,
    frozen: &JordanBasis,
) -> CMatrix {
    frozen.left_matrix() * &inverse.matrix * l * &forward.matrix * frozen.right_matrix()
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Accept when halving the step moves the endpoint by less than this.
    pub tol: f64,
    /// Upper bound on RK4 steps per output interval.
    pub max_substeps: usize,
    /// Initial step as a fraction of `1 / |L|`.
    pub initial_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_substeps: 1 << 20,
            initial_step: 0.2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MasterSolution {
    pub times: Vec<f64>,
    pub vectors: Vec<CVector>,
    pub substeps: usize,
    /// Endpoint change on the last halving.
    pub error_estimate: f64,
}

impl MasterSolution {
    pub fn state(&self, j: usize, basis: &OperatorBasis) -> Result<CMatrix> {
        let cv =
            crate::hilbert_schmidt::CoherenceVector::new(self.vectors[j].clone(), basis.dim())?;
        devectorize(&cv, basis)
    }

    pub fn final_vector(&self) -> &CVector {
        self.vectors.last().unwrap()
    }
}

/// Classic RK4 for `dy/dt = L(t) y` with a fixed number of steps per
/// output interval.
pub fn integrate_linear<F>(
    gen: F,
    y0: &CVector,
    times: &[f64],
    substeps: usize,
) -> Result<Vec<CVector>>
where
    F: Fn(f64) -> Result<CMatrix>,
{
    let mut y = y0.clone();
    let mut out = vec![y.clone()];
    for w in times.windows(2) {
        let h = (w[1] - w[0]) / substeps as f64;
        let mut l0 = gen(w[0])?;
        for i in 0..substeps {
            let t = w[0] + h * i as f64;
            let t1 = if i + 1 == substeps { w[1] } else { t + h };
            let lm = gen(t + 0.5 * h)?;
            let l1 = gen(t1)?;
            let k1 = &l0 * &y;
            let k2 = &lm * (&y + k1.scale(0.5 * h));
            let k3 = &lm * (&y + k2.scale(0.5 * h));
            let k4 = &l1 * (&y + k3.scale(h));
            y += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
            l0 = l1;
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// Integrate the master equation from `rho0` through the output `times`,
/// doubling the step count until the endpoint is converged.
pub fn solve_master(
    model: &LindbladModel,
    basis: &OperatorBasis,
    rho0: &CMatrix,
    times: &[f64],
    opts: SolverOptions,
) -> Result<MasterSolution> {
    linalg::validate_density(rho0, 1e-10)?;
    quadrature::check_grid(times, 2)?;
    let y0 = vectorize(rho0, basis)?.components;
    let gen = |t: f64| model.superoperator(t, basis).map(|s| s.matrix);
    let scale = linalg::spectral_norm(&gen(times[0])?)
        .max(linalg::spectral_norm(&gen(times[times.len() - 1])?));
    let widest = times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let mut substeps = if scale > 0.0 {
        ((widest * scale / opts.initial_step).ceil() as usize).max(1)
    } else {
        1
    };
    let mut prev = integrate_linear(gen, &y0, times, substeps)?;
    loop {
        if substeps * 2 > opts.max_substeps {
            return Err(Error::Integration(format!(
                "no convergence with {substeps} steps per interval; the problem may be stiff, \
                 reduce the maximum step or raise max_substeps"
            )));
        }
        substeps *= 2;
        let next = integrate_linear(gen, &y0, times, substeps)?;
        let change = (next.last().unwrap() - prev.last().unwrap()).camax();
        if change < opts.tol {
            return Ok(MasterSolution {
                times: times.to_vec(),
                vectors: next,
                substeps,
                error_estimate: change,
            });
        }
        prev = next;
    }
}

/// `tr sqrt(sqrt(rho) sigma sqrt(rho))`.
pub fn fidelity(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch {
            expected: rho.nrows(),
            found: sigma.nrows(),
        });
    }
    linalg::validate_density(rho, 1e-10)?;
    linalg::validate_density(sigma, 1e-10)?;
    let sr = linalg::psd_sqrt(rho);
    let inner = &sr * sigma * &sr;
    let (vals, _) = linalg::hermitian_eig(&inner);
    let f: f64 = vals.iter().map(|&x| x.max(0.0).sqrt()).sum();
    Ok(f.clamp(0.0, 1.0))
}

pub fn infidelity(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    Ok(1.0 - fidelity(rho, sigma)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub tau: f64,
    pub infidelity: f64,
}

/// Infidelity of the full evolution against a target for each `tau`,
/// computed in parallel and returned in `tau_grid` order.
pub fn infidelity_curve<M, T>(
    model_at: M,
    rho0: &CMatrix,
    target_at: T,
    tau_grid: &[f64],
    basis: &OperatorBasis,
) -> Result<Vec<CurvePoint>>
where
    M: Fn(f64) -> Result<LindbladModel> + Sync,
    T: Fn(f64) -> CMatrix + Sync,
{
    tau_grid
        .par_iter()
        .map(|&tau| {
            let model = model_at(tau)?;
            let sol = solve_master(&model, basis, rho0, &[0.0, tau], SolverOptions::default())?;
            let rho = sol.state(1, basis)?;
            let rho = (&rho + rho.adjoint()).scale(0.5);
            Ok(CurvePoint {
                tau,
                infidelity: infidelity(&rho, &target_at(tau))?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert_schmidt::pauli_basis;
    use crate::linalg::{max_abs, re, sigma_x, sigma_z};
    use crate::models::{deutsch_analytic_basis, DeutschParams};
    use crate::quadrature::linspace;

    fn deutsch_traj(gamma0: f64, tau: f64) -> (DeutschParams, SpectralTrajectory) {
        let p = DeutschParams {
            omega: 1.0,
            gamma0,
            f0: 0,
            f1: 1,
            tau,
        };
        let tr = SpectralTrajectory::from_fn(linspace(0.0, 1.0, 201), tau, |s| {
            deutsch_analytic_basis(&p, s * tau)
        })
        .unwrap();
        (p, tr)
    }

    #[test]
    fn deutsch_phases() {
        let (_, tr) = deutsch_traj(0.1, 20.0);
        assert!(adiabatic_phase(&tr, 0, 0.0, 20.0).unwrap().norm() < 1e-14);
        let p1 = adiabatic_phase(&tr, 1, 2.0, 12.0).unwrap();
        assert!((p1 - re(-2.0 * 0.1 * 10.0)).norm() < 1e-12);
        assert!(adiabatic_phase(&tr, 1, 0.0, 25.0).is_err());
    }

    #[test]
    fn deutsch_propagator_maps_plus_state_to_adiabatic_state() {
        let (p, tr) = deutsch_traj(0.1, 20.0);
        let v = propagator_1d(&tr, 0.0, 10.0).unwrap();
        let out = v.apply(&CVector::from_vec(vec![re(1.0), re(1.0), re(0.0), re(0.0)]));
        let (gc, gs) = p.field(10.0);
        let d = (-2.0f64).exp();
        let want = CVector::from_vec(vec![re(1.0), re(d * gc), re(-d * gs), re(0.0)]);
        assert!((out - want).camax() < 1e-12);
    }

    #[test]
    fn propagators_invert_and_start_at_identity() {
        let (_, tr) = deutsch_traj(0.3, 20.0);
        let v = propagator_1d(&tr, 4.0, 16.0).unwrap();
        let vi = propagator_1d_inverse(&tr, 4.0, 16.0).unwrap();
        let one = CMatrix::identity(4, 4);
        assert!(max_abs(&(&v.matrix * &vi.matrix - &one)) < 1e-10);
        assert!(max_abs(&(&vi.matrix * &v.matrix - &one)) < 1e-10);
        let id = propagator_1d(&tr, 8.0, 8.0).unwrap();
        assert!(max_abs(&(id.matrix - &one)) < 1e-12);
        let mb = propagator_multiblock(&tr, 4.0, 16.0).unwrap();
        assert!(max_abs(&(mb.matrix - &v.matrix)) < 1e-12);
        assert!(propagator_1d(&tr, 16.0, 4.0).is_err());
        assert!(matches!(
            propagator_1d(&tr, 0.0, 10.05),
            Err(Error::OffGrid { .. })
        ));
    }

    #[test]
    fn two_block_coefficients_without_coupling_are_exponential_of_shift() {
        use crate::spectral::{JordanBasis, JordanBlockChain};
        let e = |i: usize| CVector::from_fn(3, |j, _| re(if i == j { 1.0 } else { 0.0 }));
        let basis = JordanBasis::new(vec![
            JordanBlockChain {
                eigenvalue: re(-1.0),
                right: vec![e(0), e(1)],
                left: vec![e(0), e(1)],
            },
            JordanBlockChain {
                eigenvalue: re(-2.0),
                right: vec![e(2)],
                left: vec![e(2)],
            },
        ]);
        let tr =
            SpectralTrajectory::from_bases(linspace(0.0, 1.0, 11), 5.0, vec![basis; 11]).unwrap();
        let c = block_coefficients(&tr, 0, 1.0, 4.0).unwrap();
        let want = CMatrix::from_row_slice(2, 2, &[re(1.0), re(3.0), re(0.0), re(1.0)]);
        assert!(max_abs(&(&c.v - want)) < 1e-12);
        assert!(c.check(1e-12).is_ok());
        assert!(propagator_1d(&tr, 0.0, 1.0).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let zero = CMatrix::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), re(0.0)]);
        let one = CMatrix::from_row_slice(2, 2, &[re(0.0), re(0.0), re(0.0), re(1.0)]);
        let mixed = CMatrix::identity(2, 2).scale(0.5);
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-12);
        assert!((fidelity(&mixed, &zero).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        let bad = CMatrix::from_row_slice(2, 2, &[re(1.5), re(0.0), re(0.0), re(-0.5)]);
        assert!(matches!(fidelity(&bad, &zero), Err(Error::InvalidState(_))));
    }

    #[test]
    fn free_evolution_is_constant() {
        let m = LindbladModel::new(2, 3.0, |_| CMatrix::zeros(2, 2)).unwrap();
        let b = pauli_basis(1);
        let rho = crate::models::deutsch_initial_state();
        let sol = solve_master(&m, &b, &rho, &[0.0, 1.0, 3.0], SolverOptions::default()).unwrap();
        assert!(max_abs(&(sol.state(2, &b).unwrap() - rho)) < 1e-15);
    }

    #[test]
    fn pure_dephasing_decays_transverse_component() {
        let g = 0.3;
        let m = LindbladModel::new(2, 4.0, |_| CMatrix::zeros(2, 2))
            .unwrap()
            .with_jump(move |_| sigma_z().scale(f64::sqrt(g)));
        let b = pauli_basis(1);
        let sol = solve_master(
            &m,
            &b,
            &crate::models::deutsch_initial_state(),
            &linspace(0.0, 4.0, 5),
            SolverOptions::default(),
        )
        .unwrap();
        for (t, v) in sol.times.iter().zip(&sol.vectors) {
            assert!((v[1].re - (-2.0 * g * t).exp()).abs() < 1e-8);
            assert!((v[0] - re(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn noiseless_slow_deutsch_follows_ground_state() {
        let p = DeutschParams {
            omega: 1.0,
            gamma0: 0.0,
            f0: 0,
            f1: 1,
            tau: 400.0,
        };
        let m = crate::models::deutsch_model(&p).unwrap();
        let b = pauli_basis(1);
        let sol = solve_master(
            &m,
            &b,
            &crate::models::deutsch_initial_state(),
            &[0.0, p.tau],
            SolverOptions::default(),
        )
        .unwrap();
        let rho = sol.state(1, &b).unwrap();
        let target = (CMatrix::identity(2, 2) - sigma_x()).scale(0.5);
        assert!(infidelity(&rho, &target).unwrap() < 1e-4);
    }

    #[test]
    fn non_density_initial_state_is_rejected() {
        let m = LindbladModel::new(2, 1.0, |_| sigma_z()).unwrap();
        let r = solve_master(
            &m,
            &pauli_basis(1),
            &CMatrix::identity(2, 2),
            &[0.0, 1.0],
            SolverOptions::default(),
        );
        assert!(r.is_err());
    }
}
