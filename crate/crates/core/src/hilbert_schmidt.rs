//! Operator bases and the coherence-vector representation.
//!
//! A basis `{sigma_n}` of `D x D` matrices has `sigma_0 = 1` and
//! `tr(sigma_n sigma_m^dagger) = D delta_nm`. A density matrix is then
//! `rho = (1/D) sum_n r_n sigma_n` with `r_n = tr(rho sigma_n^dagger)`.

use crate::error::{Error, Result};
use crate::linalg::{self, re, CMatrix, CVector};
use num_complex::Complex64;

const ORTHO_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<CMatrix>,
}

impl OperatorBasis {
    /// Validate and wrap a list of `D^2` matrices.
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidBasis("empty basis".into()))?;
        let dim = first.nrows();
        if elements.len() != dim * dim {
            return Err(Error::InvalidBasis(format!(
                "{} elements for Hilbert dimension {dim}, need {}",
                elements.len(),
                dim * dim
            )));
        }
        for e in &elements {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.nrows(),
                });
            }
        }
        if linalg::max_abs(&(first - linalg::identity(dim))) > ORTHO_TOL {
            return Err(Error::InvalidBasis(
                "first element is not the identity".into(),
            ));
        }
        let d = dim as f64;
        for (n, a) in elements.iter().enumerate() {
            for (m, b) in elements.iter().enumerate().skip(n) {
                let g = linalg::trace(&(a * b.adjoint()));
                let want = if n == m { d } else { 0.0 };
                if (g - re(want)).norm() > ORTHO_TOL * d {
                    return Err(Error::InvalidBasis(format!(
                        "tr(s{n} s{m}^dagger) = {g}, expected {want}"
                    )));
                }
            }
        }
        Ok(Self { dim, elements })
    }

    /// Hilbert-space dimension `D`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of basis elements, `D^2`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn element(&self, n: usize) -> &CMatrix {
        &self.elements[n]
    }

    fn check_dim(&self, m: &CMatrix) -> Result<()> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.nrows(),
            });
        }
        Ok(())
    }

    /// Components `tr(x sigma_n^dagger)`.
    pub fn components(&self, x: &CMatrix) -> Result<CVector> {
        self.check_dim(x)?;
        Ok(CVector::from_iterator(
            self.len(),
            self.elements.iter().map(|s| trace_product_adjoint(x, s)),
        ))
    }

    /// Left-vector components `tr(a sigma_n)`. Paired with a coherence
    /// vector `r` by the plain product, `sum_n l_n r_n / D = tr(a rho)`.
    pub fn dual_components(&self, a: &CMatrix) -> Result<CVector> {
        self.check_dim(a)?;
        Ok(CVector::from_iterator(
            self.len(),
            self.elements.iter().map(|s| linalg::trace(&(a * s))),
        ))
    }

    /// Inverse of [`components`](Self::components).
    pub fn assemble(&self, v: &CVector) -> Result<CMatrix> {
        if v.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: v.len(),
            });
        }
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (s, &a) in self.elements.iter().zip(v.iter()) {
            out += s.scale(1.0) * a;
        }
        Ok(out.unscale(self.dim as f64))
    }
}

/// tr(x y^dagger) without forming the product.
fn trace_product_adjoint(x: &CMatrix, y: &CMatrix) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b.conj()).sum()
}

/// Tensor-product Pauli basis for `n_qubits` qubits. Single-qubit order is
/// `{1, X, Y, Z}`; multi-qubit index `sum_q d_q 4^(n-1-q)` with qubit 0 most
/// significant.
pub fn pauli_basis(n_qubits: usize) -> OperatorBasis {
    assert!(n_qubits >= 1, "need at least one qubit");
    let single = [
        linalg::identity(2),
        linalg::sigma_x(),
        linalg::sigma_y(),
        linalg::sigma_z(),
    ];
    let mut elements = vec![linalg::identity(1)];
    for _ in 0..n_qubits {
        elements = elements
            .iter()
            .flat_map(|a| single.iter().map(move |b| linalg::kron(a, b)))
            .collect();
    }
    OperatorBasis {
        dim: 1 << n_qubits,
        elements,
    }
}

/// Generalized Gell-Mann basis for any `D >= 2`, scaled to `tr(s s) = D`.
pub fn gell_mann_basis(dim: usize) -> OperatorBasis {
    assert!(dim >= 2, "dimension must be at least 2");
    let scale = (dim as f64 / 2.0).sqrt();
    let unit = |j: usize, k: usize, v: Complex64| {
        let mut m = CMatrix::zeros(dim, dim);
        m[(j, k)] = v;
        m
    };
    let mut elements = vec![linalg::identity(dim)];
    for j in 0..dim {
        for k in j + 1..dim {
            let sym = unit(j, k, re(1.0)) + unit(k, j, re(1.0));
            let asym = unit(j, k, -linalg::I) + unit(k, j, linalg::I);
            elements.push(sym.scale(scale));
            elements.push(asym.scale(scale));
        }
    }
    for l in 1..dim {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(dim, dim);
        for j in 0..l {
            m[(j, j)] = re(norm);
        }
        m[(l, l)] = re(-(l as f64) * norm);
        elements.push(m.scale(scale));
    }
    OperatorBasis { dim, elements }
}

/// A density matrix expressed in an operator basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceVector {
    pub components: CVector,
    pub dim: usize,
}

impl CoherenceVector {
    pub fn new(components: CVector, dim: usize) -> Result<Self> {
        if components.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: components.len(),
            });
        }
        Ok(Self { components, dim })
    }

    /// `(1/D) tr(a^dagger b)` expressed through components.
    pub fn hs_inner(&self, other: &Self) -> Complex64 {
        let d = self.dim as f64;
        self.components.dotc(&other.components) / (d * d)
    }

    /// Trace of the represented matrix, `r_0 / D`.
    pub fn trace(&self) -> Complex64 {
        self.components[0] / self.dim as f64
    }
}

/// Expand a density matrix in `basis`.
pub fn vectorize(rho: &CMatrix, basis: &OperatorBasis) -> Result<CoherenceVector> {
    let components = basis.components(rho)?;
    Ok(CoherenceVector {
        components,
        dim: basis.dim(),
    })
}

/// Rebuild the matrix from a coherence vector.
pub fn devectorize(v: &CoherenceVector, basis: &OperatorBasis) -> Result<CMatrix> {
    if v.dim != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: v.dim,
        });
    }
    basis.assemble(&v.components)
}

/// Hilbert-Schmidt inner product `(1/D) tr(a^dagger b)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Result<Complex64> {
    if a.shape() != b.shape() || !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    Ok(trace_product_adjoint(b, a) / a.nrows() as f64)
}
