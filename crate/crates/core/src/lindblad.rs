//! Time-dependent Lindblad generators and their superoperator matrices.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hilbert_schmidt::OperatorBasis;
use crate::linalg::{self, CMatrix, I};

/// A matrix-valued function of physical time.
pub type OperatorPath = Arc<dyn Fn(f64) -> CMatrix + Send + Sync>;

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone)]
pub struct LindbladModel {
    dim: usize,
    horizon: f64,
    hamiltonian: OperatorPath,
    jumps: Vec<OperatorPath>,
}

impl fmt::Debug for LindbladModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LindbladModel")
            .field("dim", &self.dim)
            .field("horizon", &self.horizon)
            .field("jumps", &self.jumps.len())
            .finish()
    }
}

impl LindbladModel {
    pub fn new(
        dim: usize,
        horizon: f64,
        hamiltonian: impl Fn(f64) -> CMatrix + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter(
                "Hilbert dimension must be positive".into(),
            ));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Parameter(format!(
                "horizon {horizon} must be positive and finite"
            )));
        }
        Ok(Self {
            dim,
            horizon,
            hamiltonian: Arc::new(hamiltonian),
            jumps: Vec::new(),
        })
    }

    pub fn with_jump(mut self, op: impl Fn(f64) -> CMatrix + Send + Sync + 'static) -> Self {
        self.jumps.push(Arc::new(op));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn num_jumps(&self) -> usize {
        self.jumps.len()
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let slack = 1e-12 * self.horizon;
        if !(t >= -slack && t <= self.horizon + slack) {
            return Err(Error::OutOfDomain {
                t,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    fn checked(&self, m: CMatrix) -> Result<CMatrix> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.nrows(),
            });
        }
        Ok(m)
    }

    pub fn hamiltonian(&self, t: f64) -> Result<CMatrix> {
        self.check_time(t)?;
        let h = self.checked((self.hamiltonian)(t))?;
        let deviation = linalg::hermiticity_defect(&h);
        if deviation > HERMITIAN_TOL * (1.0 + linalg::max_abs(&h)) {
            return Err(Error::NonHermitian { t, deviation });
        }
        Ok(h)
    }

    pub fn jump_operators(&self, t: f64) -> Result<Vec<CMatrix>> {
        self.check_time(t)?;
        self.jumps.iter().map(|j| self.checked(j(t))).collect()
    }

    /// `L_t[x] = -i[H, x] + sum_j (G x G^dagger - {G^dagger G, x}/2)`.
    pub fn generator_action(&self, t: f64, x: &CMatrix) -> Result<CMatrix> {
        let x = self.checked(x.clone())?;
        let h = self.hamiltonian(t)?;
        let jumps = self.jump_operators(t)?;
        Ok(apply_generator(&h, &jumps, &x))
    }

    /// Matrix of the generator in `basis` at time `t`.
    pub fn superoperator(&self, t: f64, basis: &OperatorBasis) -> Result<Superoperator> {
        if basis.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: basis.dim(),
            });
        }
        let h = self.hamiltonian(t)?;
        let jumps = self.jump_operators(t)?;
        let mut s = Superoperator::from_operators(&h, &jumps, basis)?;
        s.time = Some(t);
        Ok(s)
    }
}

pub fn apply_generator(h: &CMatrix, jumps: &[CMatrix], x: &CMatrix) -> CMatrix {
    let mut out = (h * x - x * h) * (-I);
    for g in jumps {
        let gd = g.adjoint();
        let gdg = &gd * g;
        out += g * x * &gd - (&gdg * x + x * &gdg).scale(0.5);
    }
    out
}

/// The generator as a matrix on coherence vectors,
/// `M_ki = (1/D) tr(sigma_k^dagger L[sigma_i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    pub matrix: CMatrix,
    pub time: Option<f64>,
}

impl Superoperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidArgument(
                "superoperator matrix must be square".into(),
            ));
        }
        Ok(Self { matrix, time: None })
    }

    pub fn from_operators(h: &CMatrix, jumps: &[CMatrix], basis: &OperatorBasis) -> Result<Self> {
        let n = basis.len();
        let d = basis.dim() as f64;
        let mut matrix = CMatrix::zeros(n, n);
        for (i, s) in basis.elements().iter().enumerate() {
            let col = basis.components(&apply_generator(h, jumps, s))?;
            matrix.set_column(i, &col.unscale(d));
        }
        Ok(Self { matrix, time: None })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert_schmidt::{gell_mann_basis, pauli_basis, vectorize};
    use crate::linalg::{c, re, sigma_x, sigma_z};
    use proptest::prelude::*;

    fn dephasing_qubit(gamma: f64) -> LindbladModel {
        LindbladModel::new(2, 1.0, |t| sigma_x().scale(0.5 + t))
            .unwrap()
            .with_jump(move |_| sigma_z().scale(gamma.sqrt()))
    }

    #[test]
    fn trace_row_vanishes() {
        let m = dephasing_qubit(0.3);
        let s = m.superoperator(0.4, &pauli_basis(1)).unwrap();
        for j in 0..4 {
            assert!(s.matrix[(0, j)].norm() < 1e-15);
        }
    }

    #[test]
    fn pure_dephasing_damps_transverse_components() {
        let m = LindbladModel::new(2, 1.0, |_| CMatrix::zeros(2, 2))
            .unwrap()
            .with_jump(|_| sigma_z().scale(0.5f64.sqrt()));
        let s = m.superoperator(0.0, &pauli_basis(1)).unwrap();
        assert!((s.matrix[(1, 1)] - re(-1.0)).norm() < 1e-15);
        assert!((s.matrix[(2, 2)] - re(-1.0)).norm() < 1e-15);
        assert!(s.matrix[(3, 3)].norm() < 1e-15);
    }

    #[test]
    fn time_outside_horizon_fails() {
        let m = dephasing_qubit(0.1);
        assert!(matches!(m.hamiltonian(1.5), Err(Error::OutOfDomain { .. })));
        assert!(m.hamiltonian(-0.1).is_err());
    }

    #[test]
    fn non_hermitian_hamiltonian_fails() {
        let m = LindbladModel::new(2, 1.0, |_| {
            CMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(0.0), re(0.0)])
        })
        .unwrap();
        assert!(matches!(
            m.hamiltonian(0.5),
            Err(Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn wrong_jump_dimension_fails() {
        let m = LindbladModel::new(2, 1.0, |_| sigma_z())
            .unwrap()
            .with_jump(|_| linalg::identity(3));
        assert!(m.superoperator(0.0, &pauli_basis(1)).is_err());
    }

    fn arb_state(dim: usize) -> impl Strategy<Value = CMatrix> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
            let a = CMatrix::from_iterator(dim, dim, v.into_iter().map(|(x, y)| c(x, y)));
            let p = &a * a.adjoint() + linalg::identity(dim).scale(1e-3);
            let t = linalg::trace(&p);
            p.unscale(t.re)
        })
    }

    proptest! {
        #[test]
        fn matrix_reproduces_generator(rho in arb_state(2), t in 0.0f64..1.0) {
            let m = dephasing_qubit(0.2);
            let b = pauli_basis(1);
            let s = m.superoperator(t, &b).unwrap();
            let lhs = &s.matrix * vectorize(&rho, &b).unwrap().components;
            let rhs = vectorize(&m.generator_action(t, &rho).unwrap(), &b).unwrap().components;
            prop_assert!((lhs - rhs).camax() < 1e-12);
        }

        #[test]
        fn generator_preserves_trace_and_hermiticity(rho in arb_state(3), t in 0.0f64..1.0) {
            let m = LindbladModel::new(3, 1.0, move |t| {
                let b = gell_mann_basis(3);
                b.element(1).scale(t) + b.element(8).scale(0.3)
            })
            .unwrap()
            .with_jump(|_| gell_mann_basis(3).element(3).clone());
            let out = m.generator_action(t, &rho).unwrap();
            prop_assert!(linalg::trace(&out).norm() < 1e-12);
            prop_assert!(linalg::hermiticity_defect(&out) < 1e-12);
        }
    }
}
