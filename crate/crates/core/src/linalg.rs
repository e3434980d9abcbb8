//! Small dense complex linear-algebra helpers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)])
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[re(0.0), -I, I, re(0.0)])
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), re(-1.0)])
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().sum()
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues ascending.
pub fn hermitian_eig(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(m.nrows(), m.ncols());
    for (j, &i) in idx.iter().enumerate() {
        vecs.set_column(j, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Apply a scalar function to a Hermitian matrix through its eigenbasis.
pub fn hermitian_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = hermitian_eig(m);
    let d = CVector::from_iterator(vals.len(), vals.iter().map(|&x| re(f(x))));
    &vecs * CMatrix::from_diagonal(&d) * vecs.adjoint()
}

/// Square root of a positive semidefinite matrix, clipping small negative
/// eigenvalues produced by roundoff.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    hermitian_fn(m, |x| x.max(0.0).sqrt())
}

/// Check that `rho` is a density matrix within `tol`.
pub fn validate_density(rho: &CMatrix, tol: f64) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::InvalidState("matrix is not square".into()));
    }
    let herm = hermiticity_defect(rho);
    if herm > tol {
        return Err(Error::InvalidState(format!(
            "not Hermitian (defect {herm:e})"
        )));
    }
    let tr = trace(rho);
    if (tr - re(1.0)).norm() > 1e-8 {
        return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
    }
    let (vals, _) = hermitian_eig(rho);
    if vals[0] < -tol {
        return Err(Error::InvalidState(format!(
            "negative eigenvalue {:e}",
            vals[0]
        )));
    }
    Ok(())
}

/// Pure state projector |psi><psi| (normalizes `psi`).
pub fn projector(psi: &CVector) -> CMatrix {
    let n = psi.norm();
    let v = psi.unscale(n);
    &v * v.adjoint()
}

/// Spectral norm via SVD.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Gibbs state exp(-beta H)/Z computed with a shifted spectrum.
pub fn gibbs_state(h: &CMatrix, beta: f64) -> Result<CMatrix> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::Parameter(format!(
            "inverse temperature {beta} must be finite and >= 0"
        )));
    }
    let herm = hermiticity_defect(h);
    if herm > 1e-10 {
        return Err(Error::NonHermitian {
            t: f64::NAN,
            deviation: herm,
        });
    }
    let (vals, _) = hermitian_eig(h);
    let e0 = vals[0];
    let z: f64 = vals.iter().map(|&e| (-beta * (e - e0)).exp()).sum();
    Ok(hermitian_fn(h, |e| (-beta * (e - e0)).exp() / z))
}
