//! Heat and entropy rates along adiabatic trajectories and the
//! equilibrium relation `dS = beta dQ`.
//!
//! Rates use the Hilbert-space dimension `D` as prefactor, so that
//! `(1/D) <h| L |r> = tr(H L[rho])` for `<h|_j = tr(H sigma_j)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::{solve_master, SolverOptions};
use crate::hilbert_schmidt::OperatorBasis;
use crate::linalg::{self, CMatrix, CVector};
use crate::lindblad::{LindbladModel, Superoperator};
use crate::spectral::{decompose, DecomposeOptions, JordanBasis};

pub const LOG_FLOOR: f64 = 1e-14;

/// A state `sum c_i exp(phi_i) |D_i>` over the flattened Jordan basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticExpansion {
    pub coefficients: Vec<Complex64>,
    /// Accumulated `int lambda~` per basis vector.
    pub phases: Vec<Complex64>,
}

impl AdiabaticExpansion {
    /// Coefficients `c_i = <E_i|r>` with zero phases.
    pub fn from_vector(basis: &JordanBasis, r: &CVector) -> Self {
        let c = basis.left_matrix() * r;
        let n = c.len();
        Self {
            coefficients: c.iter().copied().collect(),
            phases: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    fn weights(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.coefficients
            .iter()
            .zip(&self.phases)
            .map(|(c, p)| c * p.exp())
    }

    pub fn vector(&self, basis: &JordanBasis) -> Result<CVector> {
        let d = basis.right_matrix();
        self.check(d.ncols())?;
        let w = CVector::from_iterator(d.ncols(), self.weights());
        Ok(d * w)
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.coefficients.len() != n || self.phases.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.coefficients.len(),
            });
        }
        Ok(())
    }
}

/// `<h|_j = tr(H sigma_j)`.
pub fn h_vector(h: &CMatrix, basis: &OperatorBasis) -> Result<CVector> {
    basis.dual_components(h)
}

/// `<rho_log|_j = tr(log(rho) sigma_j)`, natural logarithm.
pub fn rho_log_vector(rho: &CMatrix, basis: &OperatorBasis) -> Result<CVector> {
    let (vals, _) = linalg::hermitian_eig(rho);
    if let Some(&low) = vals.iter().find(|&&x| x < LOG_FLOOR) {
        return Err(Error::LogDomain { eigenvalue: low });
    }
    basis.dual_components(&linalg::hermitian_fn(rho, f64::ln))
}

/// `(1/D) sum_i c_i e^(phi_i) <left| L |D_i>`.
fn rate(
    jordan: &JordanBasis,
    l: &Superoperator,
    expansion: &AdiabaticExpansion,
    left: &CVector,
    dim: usize,
) -> Result<f64> {
    let r = expansion.vector(jordan)?;
    if left.len() != r.len() || l.dim() != r.len() {
        return Err(Error::DimensionMismatch {
            expected: r.len(),
            found: left.len(),
        });
    }
    let z = left.dot(&(&l.matrix * r)) / dim as f64;
    Ok(z.re)
}

pub fn heat_rate(
    jordan: &JordanBasis,
    l: &Superoperator,
    expansion: &AdiabaticExpansion,
    h: &CVector,
    dim: usize,
) -> Result<f64> {
    rate(jordan, l, expansion, h, dim)
}

pub fn entropy_rate(
    jordan: &JordanBasis,
    l: &Superoperator,
    expansion: &AdiabaticExpansion,
    rho_log: &CVector,
    dim: usize,
) -> Result<f64> {
    Ok(-rate(jordan, l, expansion, rho_log, dim)?)
}

/// Jump operators `sqrt(k_ij) |j><i|` between eigenstates of `h` with
/// detailed-balance rates `k_ij = rate exp(-beta (E_j - E_i) / 2)`.
pub fn thermal_jumps(h: &CMatrix, beta: f64, rate: f64) -> Vec<CMatrix> {
    let (vals, vecs) = linalg::hermitian_eig(h);
    let n = vals.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let k = rate * (-0.5 * beta * (vals[j] - vals[i])).exp();
            let op = vecs.column(j) * vecs.column(i).adjoint();
            out.push(op.scale(k.sqrt()));
        }
    }
    out
}

/// Lindbladian whose instantaneous steady state is the Gibbs state of
/// `h_path(t)`.
pub fn thermal_model<F>(
    h_path: F,
    dim: usize,
    beta: f64,
    rate: f64,
    horizon: f64,
) -> Result<LindbladModel>
where
    F: Fn(f64) -> CMatrix + Send + Sync + Clone + 'static,
{
    let mut model = LindbladModel::new(dim, horizon, h_path.clone())?;
    for idx in 0..dim * (dim - 1) {
        let h = h_path.clone();
        model = model.with_jump(move |t| thermal_jumps(&h(t), beta, rate).swap_remove(idx));
    }
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoSample {
    pub t: f64,
    pub dq_rate: f64,
    pub ds_rate: f64,
    pub beta: f64,
    /// `|dS - beta dQ|`.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct EquilibriumReport {
    pub samples: Vec<ThermoSample>,
    pub max_residual: f64,
    /// `max residual / max |dQ|`, zero when no heat flows.
    pub relative_residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ThermoOptions {
    /// Overall scale of the thermalizing rates.
    pub relax_rate: f64,
}

impl Default for ThermoOptions {
    fn default() -> Self {
        Self { relax_rate: 0.5 }
    }
}

/// Relax a system from the Gibbs state of `h_path(times[0])` under a
/// thermalizing generator and evaluate both rates at every time. The
/// entropy rate uses `log` of the instantaneous Gibbs state, the state the
/// dynamics relaxes towards.
pub fn equilibrium_check<F>(
    h_path: F,
    basis: &OperatorBasis,
    beta: f64,
    times: &[f64],
    opts: ThermoOptions,
) -> Result<EquilibriumReport>
where
    F: Fn(f64) -> CMatrix + Send + Sync + Clone + 'static,
{
    crate::quadrature::check_grid(times, 2)?;
    if times[0] < 0.0 {
        return Err(Error::InvalidArgument(
            "times must start at or after 0".into(),
        ));
    }
    let dim = basis.dim();
    let horizon = times[times.len() - 1];
    let model = thermal_model(h_path.clone(), dim, beta, opts.relax_rate, horizon)?;
    let rho0 = linalg::gibbs_state(&h_path(times[0]), beta)?;
    let sol = solve_master(&model, basis, &rho0, times, SolverOptions::default())?;

    let mut samples = Vec::with_capacity(times.len());
    for (j, &t) in times.iter().enumerate() {
        let h = model.hamiltonian(t)?;
        let l = model.superoperator(t, basis)?;
        let jordan = decompose(&l, DecomposeOptions::default())?;
        let expansion = AdiabaticExpansion::from_vector(&jordan, &sol.vectors[j]);
        let gibbs = linalg::gibbs_state(&h, beta)?;
        let dq = heat_rate(&jordan, &l, &expansion, &h_vector(&h, basis)?, dim)?;
        let ds = entropy_rate(
            &jordan,
            &l,
            &expansion,
            &rho_log_vector(&gibbs, basis)?,
            dim,
        )?;
        if !(dq.is_finite() && ds.is_finite()) {
            return Err(Error::Integration(format!("non-finite rates at t = {t}")));
        }
        samples.push(ThermoSample {
            t,
            dq_rate: dq,
            ds_rate: ds,
            beta,
            residual: (ds - beta * dq).abs(),
        });
    }
    let max_residual = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
    let max_dq = samples.iter().map(|s| s.dq_rate.abs()).fold(0.0, f64::max);
    let relative_residual = if max_dq > 0.0 {
        max_residual / max_dq
    } else {
        0.0
    };
    Ok(EquilibriumReport {
        samples,
        max_residual,
        relative_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert_schmidt::{gell_mann_basis, pauli_basis, vectorize};
    use crate::linalg::{c, re, sigma_x, sigma_z};
    use crate::quadrature::linspace;
    use proptest::prelude::*;

    fn ramp(t: f64) -> CMatrix {
        sigma_z().scale(0.5 * (1.0 + 0.3 * t)) + sigma_x().scale(0.1 * t)
    }

    #[test]
    fn h_vector_of_qubit_field() {
        let h = h_vector(&sigma_z().scale(0.5 * 1.7), &pauli_basis(1)).unwrap();
        let want = [0.0, 0.0, 0.0, 1.7];
        for (a, b) in h.iter().zip(want) {
            assert!((a - re(b)).norm() < 1e-15);
        }
        assert_eq!(
            h_vector(&CMatrix::zeros(2, 2), &pauli_basis(1))
                .unwrap()
                .camax(),
            0.0
        );
    }

    #[test]
    fn log_of_maximally_mixed_state() {
        let v = rho_log_vector(&CMatrix::identity(2, 2).scale(0.5), &pauli_basis(1)).unwrap();
        assert!((v[0] - re(-2.0 * 2f64.ln())).norm() < 1e-14);
        assert!(v.rows(1, 3).camax() < 1e-15);
    }

    #[test]
    fn pure_state_log_fails() {
        let r = rho_log_vector(&crate::models::deutsch_initial_state(), &pauli_basis(1));
        assert!(matches!(r, Err(Error::LogDomain { .. })));
    }

    #[test]
    fn gibbs_identity_for_qutrit() {
        let b = gell_mann_basis(3);
        let h = b.element(1).scale(0.4) + b.element(8).scale(-0.7) + b.element(4).scale(0.2);
        let beta = 1.3;
        let l = rho_log_vector(&linalg::gibbs_state(&h, beta).unwrap(), &b).unwrap();
        let hv = h_vector(&h, &b).unwrap();
        for j in 1..9 {
            assert!((l[j] + hv[j] * beta).norm() < 1e-10);
        }
    }

    #[test]
    fn steady_state_rates_vanish() {
        let b = pauli_basis(1);
        let h = sigma_z().scale(0.8);
        let jumps = thermal_jumps(&h, 2.0, 0.3);
        let l = Superoperator::from_operators(&h, &jumps, &b).unwrap();
        let jordan = decompose(&l, DecomposeOptions::default()).unwrap();
        let gibbs = linalg::gibbs_state(&h, 2.0).unwrap();
        let e =
            AdiabaticExpansion::from_vector(&jordan, &vectorize(&gibbs, &b).unwrap().components);
        let dq = heat_rate(&jordan, &l, &e, &h_vector(&h, &b).unwrap(), 2).unwrap();
        let ds = entropy_rate(&jordan, &l, &e, &rho_log_vector(&gibbs, &b).unwrap(), 2).unwrap();
        assert!(dq.abs() < 1e-14 && ds.abs() < 1e-14);
    }

    #[test]
    fn expansion_dimension_mismatch() {
        let b = pauli_basis(1);
        let l = Superoperator::from_operators(&sigma_z(), &[sigma_x()], &b).unwrap();
        let jordan = decompose(&l, DecomposeOptions::default()).unwrap();
        let e = AdiabaticExpansion {
            coefficients: vec![re(1.0)],
            phases: vec![re(0.0)],
        };
        assert!(heat_rate(&jordan, &l, &e, &CVector::zeros(4), 2).is_err());
    }

    #[test]
    fn ramp_satisfies_equilibrium_relation() {
        let r = equilibrium_check(
            ramp,
            &pauli_basis(1),
            1.0,
            &linspace(0.0, 5.0, 21),
            ThermoOptions::default(),
        )
        .unwrap();
        assert!(r.relative_residual < 1e-6, "{}", r.relative_residual);
        assert!(r.samples.iter().skip(1).all(|s| s.dq_rate.abs() > 0.0));
    }

    #[test]
    fn constant_hamiltonian_and_infinite_temperature_give_zero() {
        let c0 = equilibrium_check(
            |_| sigma_z().scale(0.5),
            &pauli_basis(1),
            1.0,
            &linspace(0.0, 2.0, 5),
            ThermoOptions::default(),
        )
        .unwrap();
        assert!(c0.max_residual < 1e-12 && c0.relative_residual < 1e-6);
        let hot = equilibrium_check(
            ramp,
            &pauli_basis(1),
            0.0,
            &linspace(0.0, 2.0, 5),
            ThermoOptions::default(),
        )
        .unwrap();
        assert!(hot.max_residual < 1e-14);
        assert_eq!(hot.relative_residual, 0.0);
    }

    #[test]
    fn thermal_generator_fixes_gibbs_state() {
        let b = gell_mann_basis(3);
        let h = b.element(3).scale(0.5) + b.element(8).scale(0.2);
        let jumps = thermal_jumps(&h, 0.7, 1.0);
        let g = linalg::gibbs_state(&h, 0.7).unwrap();
        let out = crate::lindblad::apply_generator(&h, &jumps, &g);
        assert!(linalg::max_abs(&out) < 1e-13);
    }

    fn arb_state() -> impl Strategy<Value = CMatrix> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4).prop_map(|v| {
            let a = CMatrix::from_iterator(2, 2, v.into_iter().map(|(x, y)| c(x, y)));
            let p = &a * a.adjoint() + CMatrix::identity(2, 2).scale(1e-2);
            let t = linalg::trace(&p).re;
            p.unscale(t)
        })
    }

    proptest! {
        #[test]
        fn heat_rate_is_energy_flow(rho in arb_state(), beta in 0.0f64..3.0) {
            let b = pauli_basis(1);
            let h = ramp(1.3);
            let jumps = thermal_jumps(&h, beta, 0.4);
            let l = Superoperator::from_operators(&h, &jumps, &b).unwrap();
            let jordan = decompose(&l, DecomposeOptions::default()).unwrap();
            let e = AdiabaticExpansion::from_vector(&jordan, &vectorize(&rho, &b).unwrap().components);
            let dq = heat_rate(&jordan, &l, &e, &h_vector(&h, &b).unwrap(), 2).unwrap();
            let direct = linalg::trace(&(&h * crate::lindblad::apply_generator(&h, &jumps, &rho))).re;
            prop_assert!((dq - direct).abs() < 1e-8);
        }

        #[test]
        fn gibbs_identity(beta in 0.0f64..4.0, a in -1.0f64..1.0, bz in -1.0f64..1.0) {
            let b = pauli_basis(1);
            let h = sigma_x().scale(a) + sigma_z().scale(bz);
            let l = rho_log_vector(&linalg::gibbs_state(&h, beta).unwrap(), &b).unwrap();
            let hv = h_vector(&h, &b).unwrap();
            for j in 1..4 {
                prop_assert!((l[j] + hv[j] * beta).norm() < 1e-10);
            }
        }
    }
}
