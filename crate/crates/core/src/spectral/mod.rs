//! Jordan decomposition of superoperators and its tracking along a path.
//!
//! A block with eigenvalue `lambda` is a chain of right vectors
//! `D^1 .. D^N` with `L D^1 = lambda D^1`, `L D^n = D^(n-1) + lambda D^n`,
//! and left vectors `E^1 .. E^N` with `E^n L = E^(n+1) + lambda E^n`.
//! Left vectors are paired with right vectors by the plain (unconjugated)
//! product, and `E^m_a D^n_b = delta_ab delta_mn`.

mod decompose;
mod tracking;

pub use decompose::{decompose, default_cluster_tol, DecomposeOptions};
pub use tracking::{track_path, track_spectrum, SpectralTrajectory, TrackOptions};

use num_complex::Complex64;

use crate::linalg::{CMatrix, CVector};

#[derive(Debug, Clone, PartialEq)]
pub struct JordanBlockChain {
    pub eigenvalue: Complex64,
    /// `D^1` (the eigenvector) first.
    pub right: Vec<CVector>,
    /// `E^N` (the left eigenvector) last.
    pub left: Vec<CVector>,
}

impl JordanBlockChain {
    pub fn len(&self) -> usize {
        self.right.len()
    }

    pub fn is_empty(&self) -> bool {
        self.right.is_empty()
    }

    /// Multiply right vectors by `z` and left vectors by `1/z`.
    pub fn rescale(&mut self, z: Complex64) {
        for d in &mut self.right {
            *d *= z;
        }
        let inv = z.inv();
        for e in &mut self.left {
            *e *= inv;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JordanBasis {
    pub blocks: Vec<JordanBlockChain>,
}

impl JordanBasis {
    pub fn new(blocks: Vec<JordanBlockChain>) -> Self {
        Self { blocks }
    }

    /// Dimension of the underlying space.
    pub fn dim(&self) -> usize {
        self.blocks.first().map_or(0, |b| b.right[0].len())
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.blocks.iter().map(|b| b.eigenvalue).collect()
    }

    /// Start of each block in the flattened (block, chain index) ordering.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.blocks
            .iter()
            .map(|b| {
                let o = acc;
                acc += b.len();
                o
            })
            .collect()
    }

    /// All right vectors as columns.
    pub fn right_matrix(&self) -> CMatrix {
        let cols: Vec<CVector> = self
            .blocks
            .iter()
            .flat_map(|b| b.right.iter().cloned())
            .collect();
        CMatrix::from_columns(&cols)
    }

    /// All left vectors as rows.
    pub fn left_matrix(&self) -> CMatrix {
        let rows: Vec<_> = self
            .blocks
            .iter()
            .flat_map(|b| b.left.iter().map(|e| e.transpose()))
            .collect();
        CMatrix::from_rows(&rows)
    }

    /// Block-diagonal Jordan matrix in the flattened ordering.
    pub fn jordan_matrix(&self) -> CMatrix {
        let n: usize = self.blocks.iter().map(JordanBlockChain::len).sum();
        let mut j = CMatrix::zeros(n, n);
        for (b, o) in self.blocks.iter().zip(self.offsets()) {
            for k in 0..b.len() {
                j[(o + k, o + k)] = b.eigenvalue;
                if k + 1 < b.len() {
                    j[(o + k, o + k + 1)] = Complex64::new(1.0, 0.0);
                }
            }
        }
        j
    }

    /// `max |E D - 1|`.
    pub fn biorthogonality_defect(&self) -> f64 {
        let g = self.left_matrix() * self.right_matrix();
        crate::linalg::max_abs(&(g - CMatrix::identity(self.dim(), self.dim())))
    }

    /// `max |sum D E - 1|`.
    pub fn completeness_defect(&self) -> f64 {
        let p = self.right_matrix() * self.left_matrix();
        crate::linalg::max_abs(&(p - CMatrix::identity(self.dim(), self.dim())))
    }
}

/// Largest violation of the right and left chain relations.
pub fn left_right_residual(l: &CMatrix, basis: &JordanBasis) -> f64 {
    let mut worst = 0.0f64;
    for b in &basis.blocks {
        let n = b.len();
        for k in 0..n {
            let mut r = l * &b.right[k] - &b.right[k] * b.eigenvalue;
            if k > 0 {
                r -= &b.right[k - 1];
            }
            worst = worst.max(r.camax());
            let mut e = (b.left[k].transpose() * l).transpose() - &b.left[k] * b.eigenvalue;
            if k + 1 < n {
                e -= &b.left[k + 1];
            }
            worst = worst.max(e.camax());
        }
    }
    worst
}
