//! Continuous tracking of the Jordan basis along a scheduled path.

use num_complex::Complex64;
use rayon::prelude::*;

use super::decompose::{decompose_matrix, default_cluster_tol};
use super::{DecomposeOptions, JordanBasis};
use crate::error::{Error, Result};
use crate::hilbert_schmidt::OperatorBasis;
use crate::linalg::CMatrix;
use crate::lindblad::LindbladModel;
use crate::quadrature::{self, derivative_weights};

/// Jordan bases on a grid of rescaled times `s = t / horizon`, with the
/// couplings `<E^k_b(s) | dD^n_a/ds (s)>`.
#[derive(Debug, Clone)]
pub struct SpectralTrajectory {
    pub grid: Vec<f64>,
    pub horizon: f64,
    pub bases: Vec<JordanBasis>,
    /// Row `(b, k)`, column `(a, n)` in the flattened block ordering.
    pub couplings: Vec<CMatrix>,
    offsets: Vec<usize>,
    lens: Vec<usize>,
}

impl SpectralTrajectory {
    /// Wrap precomputed, gauge-continuous bases. Couplings come from
    /// finite differences of the right vectors.
    pub fn from_bases(grid: Vec<f64>, horizon: f64, bases: Vec<JordanBasis>) -> Result<Self> {
        quadrature::check_grid(&grid, 3)?;
        if bases.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: bases.len(),
            });
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Parameter(format!(
                "horizon {horizon} must be positive"
            )));
        }
        let lens: Vec<usize> = bases[0].blocks.iter().map(|b| b.len()).collect();
        for (b, &s) in bases.iter().zip(&grid) {
            if b.blocks.iter().map(|x| x.len()).ne(lens.iter().copied()) {
                return Err(Error::Crossing { s });
            }
        }
        let offsets = bases[0].offsets();
        let rights: Vec<CMatrix> = bases.iter().map(JordanBasis::right_matrix).collect();
        let couplings = (0..grid.len())
            .map(|j| {
                let mut dp = CMatrix::zeros(rights[0].nrows(), rights[0].ncols());
                for (i, w) in derivative_weights(&grid, j) {
                    dp += &rights[i] * Complex64::new(w, 0.0);
                }
                bases[j].left_matrix() * dp
            })
            .collect();
        Ok(Self {
            grid,
            horizon,
            bases,
            couplings,
            offsets,
            lens,
        })
    }

    /// Evaluate `basis_at(s)` on the grid (in parallel) and wrap the result.
    pub fn from_fn<F>(grid: Vec<f64>, horizon: f64, basis_at: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<JordanBasis> + Sync,
    {
        let bases = grid
            .par_iter()
            .map(|&s| basis_at(s))
            .collect::<Result<Vec<_>>>()?;
        Self::from_bases(grid, horizon, bases)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    /// The same path run over a different total time.
    pub fn with_horizon(&self, horizon: f64) -> Self {
        Self {
            horizon,
            ..self.clone()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn num_blocks(&self) -> usize {
        self.lens.len()
    }

    pub fn block_len(&self, block: usize) -> usize {
        self.lens[block]
    }

    pub fn offset(&self, block: usize) -> usize {
        self.offsets[block]
    }

    pub fn time(&self, j: usize) -> f64 {
        self.horizon * self.grid[j]
    }

    pub fn eigenvalue(&self, block: usize, j: usize) -> Complex64 {
        self.bases[j].blocks[block].eigenvalue
    }

    pub fn eigenvalue_path(&self, block: usize) -> Vec<Complex64> {
        self.bases
            .iter()
            .map(|b| b.blocks[block].eigenvalue)
            .collect()
    }

    /// `<E^k_beta | dD^n_alpha / ds>` at grid index `j` (chain indices from 0).
    pub fn coupling(&self, beta: usize, k: usize, alpha: usize, n: usize, j: usize) -> Complex64 {
        self.couplings[j][(self.offsets[beta] + k, self.offsets[alpha] + n)]
    }

    /// The `N_beta x N_beta` diagonal coupling block of `beta` at index `j`.
    pub fn block_coupling(&self, beta: usize, j: usize) -> CMatrix {
        let (o, n) = (self.offsets[beta], self.lens[beta]);
        self.couplings[j].view((o, o), (n, n)).into_owned()
    }

    pub(crate) fn check_block(&self, block: usize) -> Result<()> {
        if block >= self.num_blocks() {
            return Err(Error::InvalidArgument(format!(
                "block {block} out of range ({} blocks)",
                self.num_blocks()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TrackOptions {
    pub cluster_tol: Option<f64>,
}

/// Decompose the model's generator on a grid of `s` in `[0, 1]` and link the
/// bases continuously. Fails on block-structure changes, eigenvalue
/// crossings or ambiguous matches.
pub fn track_spectrum(
    model: &LindbladModel,
    basis: &OperatorBasis,
    grid: &[f64],
    opts: TrackOptions,
) -> Result<SpectralTrajectory> {
    let tau = model.horizon();
    track_path(
        grid,
        tau,
        |s| Ok(model.superoperator(tau * s, basis)?.matrix),
        opts,
    )
}

/// Same as [`track_spectrum`] for an arbitrary matrix path `s -> L(s)`.
pub fn track_path<F>(
    grid: &[f64],
    horizon: f64,
    path: F,
    opts: TrackOptions,
) -> Result<SpectralTrajectory>
where
    F: Fn(f64) -> Result<CMatrix> + Sync,
{
    quadrature::check_grid(grid, 3)?;
    let raw = grid
        .par_iter()
        .map(|&s| {
            let l = path(s)?;
            let tol = opts.cluster_tol.unwrap_or_else(|| default_cluster_tol(&l));
            let b = decompose_matrix(
                &l,
                DecomposeOptions {
                    cluster_tol: Some(tol),
                },
            )?;
            Ok((b, tol))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut bases: Vec<JordanBasis> = Vec::with_capacity(raw.len());
    for (j, (mut cur, tol)) in raw.into_iter().enumerate() {
        if let Some(prev) = bases.last() {
            cur = link(prev, cur, grid[j])?;
        }
        check_separated(&cur, tol, grid[j])?;
        bases.push(cur);
    }
    SpectralTrajectory::from_bases(grid.to_vec(), horizon, bases)
}

fn check_separated(b: &JordanBasis, tol: f64, s: f64) -> Result<()> {
    let ev = b.eigenvalues();
    for i in 0..ev.len() {
        for j in i + 1..ev.len() {
            if (ev[i] - ev[j]).norm() <= tol {
                return Err(Error::Crossing { s });
            }
        }
    }
    Ok(())
}

/// Reorder and re-phase `cur` to continue `prev`.
fn link(prev: &JordanBasis, cur: JordanBasis, s: f64) -> Result<JordanBasis> {
    if prev.num_blocks() != cur.num_blocks() {
        return Err(Error::Crossing { s });
    }
    let overlap = |a: usize, b: usize| -> f64 {
        let (pa, cb) = (&prev.blocks[a], &cur.blocks[b]);
        if pa.len() != cb.len() {
            return 0.0;
        }
        let sum: Complex64 = pa.left.iter().zip(&cb.right).map(|(e, d)| e.dot(d)).sum();
        sum.norm() / pa.len() as f64
    };
    let mut used = vec![false; cur.num_blocks()];
    let mut order = Vec::with_capacity(cur.num_blocks());
    for a in 0..prev.num_blocks() {
        let mut scores: Vec<(f64, usize)> = (0..cur.num_blocks())
            .filter(|&b| !used[b])
            .map(|b| (overlap(a, b), b))
            .collect();
        scores.sort_by(|x, y| y.0.total_cmp(&x.0));
        let (best, b) = scores[0];
        let second = scores.get(1).map_or(0.0, |x| x.0);
        if best < 0.3 || second > 0.9 * best {
            return Err(Error::Tracking {
                s,
                detail: format!("block {a}: best overlap {best:.3e}, runner-up {second:.3e}"),
            });
        }
        used[b] = true;
        order.push(b);
    }
    let mut slots: Vec<Option<_>> = cur.blocks.into_iter().map(Some).collect();
    let blocks = order
        .into_iter()
        .zip(&prev.blocks)
        .map(|(b, p)| {
            let mut blk = slots[b].take().unwrap();
            let z = p.right[0].dotc(&blk.right[0]);
            if z.norm() > 0.0 {
                blk.rescale(z.conj() / z.norm());
            }
            blk
        })
        .collect();
    Ok(JordanBasis::new(blocks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert_schmidt::pauli_basis;
    use crate::linalg::{sigma_x, sigma_z};
    use crate::quadrature::linspace;

    #[test]
    fn constant_model_has_zero_couplings() {
        let m = LindbladModel::new(2, 5.0, |_| sigma_x().scale(0.7))
            .unwrap()
            .with_jump(|_| sigma_z().scale(0.3));
        let tr = track_spectrum(
            &m,
            &pauli_basis(1),
            &linspace(0.0, 1.0, 11),
            TrackOptions::default(),
        )
        .unwrap();
        for c in &tr.couplings {
            assert!(crate::linalg::max_abs(c) < 1e-12);
        }
        assert_eq!(tr.num_blocks(), 4);
    }

    #[test]
    fn rotating_field_tracks_continuously() {
        let m = LindbladModel::new(2, 1.0, |t| {
            (sigma_x().scale((3.0 * t).cos()) + sigma_z().scale((3.0 * t).sin())).scale(0.5)
        })
        .unwrap()
        .with_jump(|_| sigma_z().scale(0.2));
        let tr = track_spectrum(
            &m,
            &pauli_basis(1),
            &linspace(0.0, 1.0, 101),
            TrackOptions::default(),
        )
        .unwrap();
        for j in 1..tr.len() {
            for b in 0..tr.num_blocks() {
                let step =
                    (&tr.bases[j].blocks[b].right[0] - &tr.bases[j - 1].blocks[b].right[0]).camax();
                assert!(step < 0.1, "jump {step} at {j}");
            }
        }
    }

    #[test]
    fn degenerate_spectrum_is_a_crossing() {
        // No dissipation: the two coherence eigenvalues are distinct but the
        // two zero eigenvalues coincide.
        let m = LindbladModel::new(2, 1.0, |_| sigma_z()).unwrap();
        let r = track_spectrum(
            &m,
            &pauli_basis(1),
            &linspace(0.0, 1.0, 5),
            TrackOptions::default(),
        );
        assert!(matches!(r, Err(Error::Crossing { .. })));
    }
}
