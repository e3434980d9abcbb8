//! Numerical Jordan decomposition.
//!
//! Complex Schur form, eigenvalue clustering, per-cluster reordering and
//! Sylvester decoupling, then Jordan chains of the nilpotent part of each
//! cluster from nested null spaces.

use nalgebra::linalg::Schur;
use num_complex::Complex64;

use super::{JordanBasis, JordanBlockChain};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::lindblad::Superoperator;

/// Singular values within this ratio of a rank threshold make the Jordan
/// structure ambiguous. Narrowed for loose cluster tolerances.
fn ambiguity_window(tol: f64, scale: f64) -> f64 {
    (scale / tol).powf(0.25).min(100.0)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DecomposeOptions {
    /// Eigenvalues closer than this are treated as one cluster. Defaults to
    /// [`default_cluster_tol`].
    pub cluster_tol: Option<f64>,
}

pub fn default_cluster_tol(l: &CMatrix) -> f64 {
    1e-7 * l.norm()
}

/// Jordan basis of `l`. Blocks are ordered by real part descending, then
/// imaginary part ascending.
pub fn decompose(l: &Superoperator, opts: DecomposeOptions) -> Result<JordanBasis> {
    decompose_matrix(&l.matrix, opts)
}

pub(crate) fn decompose_matrix(l: &CMatrix, opts: DecomposeOptions) -> Result<JordanBasis> {
    if !l.is_square() || l.nrows() == 0 {
        return Err(Error::InvalidArgument(
            "decompose needs a non-empty square matrix".into(),
        ));
    }
    if l.iter().any(|z| !z.is_finite()) {
        return Err(Error::InvalidArgument(
            "matrix has non-finite entries".into(),
        ));
    }
    let n = l.nrows();
    let scale = l.norm();
    if scale == 0.0 {
        let zero = Complex64::new(0.0, 0.0);
        let blocks = (0..n)
            .map(|i| {
                let e = CVector::from_fn(n, |j, _| {
                    if i == j {
                        Complex64::new(1.0, 0.0)
                    } else {
                        zero
                    }
                });
                JordanBlockChain {
                    eigenvalue: zero,
                    right: vec![e.clone()],
                    left: vec![e],
                }
            })
            .collect();
        return Ok(JordanBasis::new(blocks));
    }
    let tol = opts.cluster_tol.unwrap_or_else(|| default_cluster_tol(l));

    let (q, t) = schur_form(l)?;
    let diag: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let clusters = cluster_indices(&diag, tol);

    let mut chains = Vec::new();
    for members in clusters {
        let (mut tc, mut qc) = (t.clone(), q.clone());
        move_to_top(&mut tc, &mut qc, &members);
        let m = members.len();
        let x = solve_sylvester(&tc, m);

        let z = qc.columns(0, m).into_owned();
        let mut top = CMatrix::zeros(m, n);
        top.view_mut((0, 0), (m, m)).fill_with_identity();
        if m < n {
            top.view_mut((0, m), (m, n - m)).copy_from(&(-&x));
        }
        let w = top * qc.adjoint();

        let t11 = tc.view((0, 0), (m, m)).into_owned();
        let mean = (0..m).map(|i| t11[(i, i)]).sum::<Complex64>() / m as f64;
        let nil = &t11 - CMatrix::identity(m, m) * mean;
        let cluster_chains = nilpotent_chains(&nil, tol, scale, mean)?;

        let cols: Vec<CVector> = cluster_chains.iter().flatten().cloned().collect();
        let xm = CMatrix::from_columns(&cols);
        let xinv = xm
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Decomposition {
                eigenvalue: mean,
                detail: "singular chain matrix".into(),
            })?;
        let d = &z * &xm;
        let e = xinv * &w;
        let mut col = 0;
        for chain in &cluster_chains {
            let len = chain.len();
            let right = (col..col + len).map(|j| d.column(j).into_owned()).collect();
            let left = (col..col + len).map(|j| e.row(j).transpose()).collect();
            col += len;
            let mut block = JordanBlockChain {
                eigenvalue: mean,
                right,
                left,
            };
            normalize_chain(&mut block);
            chains.push(block);
        }
    }
    order_blocks(&mut chains, tol);
    Ok(JordanBasis::new(chains))
}

/// Unit eigenvector with its largest component real and positive.
fn normalize_chain(block: &mut JordanBlockChain) {
    let d1 = &block.right[0];
    let norm = d1.norm();
    let big = d1.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let pivot = d1
        .iter()
        .find(|z| z.norm() >= big * (1.0 - 1e-9))
        .copied()
        .unwrap();
    let z = pivot.conj() / (pivot.norm() * norm);
    block.rescale(z);
}

/// Group by real part (descending, within `tol`), then imaginary part.
pub(crate) fn order_blocks(blocks: &mut Vec<JordanBlockChain>, tol: f64) {
    blocks.sort_by(|a, b| b.eigenvalue.re.total_cmp(&a.eigenvalue.re));
    let mut out = Vec::with_capacity(blocks.len());
    let mut group: Vec<JordanBlockChain> = Vec::new();
    for b in blocks.drain(..) {
        if let Some(last) = group.last() {
            if (last.eigenvalue.re - b.eigenvalue.re).abs() > tol {
                group.sort_by(|x, y| x.eigenvalue.im.total_cmp(&y.eigenvalue.im));
                out.append(&mut group);
            }
        }
        group.push(b);
    }
    group.sort_by(|x, y| x.eigenvalue.im.total_cmp(&y.eigenvalue.im));
    out.append(&mut group);
    *blocks = out;
}

fn schur_form(l: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = l.nrows();
    let schur = Schur::try_new(l.clone(), f64::EPSILON, 100 * n.max(10)).ok_or_else(|| {
        Error::Decomposition {
            eigenvalue: Complex64::new(f64::NAN, f64::NAN),
            detail: "Schur iteration did not converge".into(),
        }
    })?;
    let (mut q, mut t) = schur.unpack();
    // Finish any 2x2 bumps left on the subdiagonal.
    let small = 1e-14 * l.norm();
    for k in 0..n.saturating_sub(1) {
        if t[(k + 1, k)].norm() > small {
            split_2x2(&mut t, &mut q, k);
        }
        t[(k + 1, k)] = Complex64::new(0.0, 0.0);
    }
    for j in 0..n {
        for i in j + 2..n {
            t[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    Ok((q, t))
}

fn split_2x2(t: &mut CMatrix, q: &mut CMatrix, k: usize) {
    let (a, b, c, d) = (t[(k, k)], t[(k, k + 1)], t[(k + 1, k)], t[(k + 1, k + 1)]);
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * (a - d) * 0.25 + b * c).sqrt();
    let mu = half_tr + disc;
    let v = if (mu - a).norm() + b.norm() >= (mu - d).norm() + c.norm() {
        (b, mu - a)
    } else {
        (mu - d, c)
    };
    apply_givens(t, q, k, v);
}

/// Rotate rows/columns `k, k+1` so the new first basis vector is along `x`.
fn apply_givens(t: &mut CMatrix, q: &mut CMatrix, k: usize, x: (Complex64, Complex64)) {
    let r = (x.0.norm_sqr() + x.1.norm_sqr()).sqrt();
    let (g11, g21) = (x.0 / r, x.1 / r);
    let (g12, g22) = (-g21.conj(), g11.conj());
    let n = t.nrows();
    for j in 0..n {
        let (u, v) = (t[(k, j)], t[(k + 1, j)]);
        t[(k, j)] = g11.conj() * u + g21.conj() * v;
        t[(k + 1, j)] = g12.conj() * u + g22.conj() * v;
    }
    for i in 0..n {
        let (u, v) = (t[(i, k)], t[(i, k + 1)]);
        t[(i, k)] = u * g11 + v * g21;
        t[(i, k + 1)] = u * g12 + v * g22;
        let (u, v) = (q[(i, k)], q[(i, k + 1)]);
        q[(i, k)] = u * g11 + v * g21;
        q[(i, k + 1)] = u * g12 + v * g22;
    }
}

/// Swap the adjacent diagonal entries `k` and `k+1` of an upper triangular `t`.
fn swap_adjacent(t: &mut CMatrix, q: &mut CMatrix, k: usize) {
    let (a, b, c) = (t[(k, k)], t[(k + 1, k + 1)], t[(k, k + 1)]);
    apply_givens(t, q, k, (c, b - a));
    t[(k + 1, k)] = Complex64::new(0.0, 0.0);
}

fn move_to_top(t: &mut CMatrix, q: &mut CMatrix, members: &[usize]) {
    let n = t.nrows();
    let mut is_member = vec![false; n];
    for &i in members {
        is_member[i] = true;
    }
    for p in 0..members.len() {
        let mut pos = (p..n).find(|&i| is_member[i]).unwrap();
        while pos > p {
            swap_adjacent(t, q, pos - 1);
            is_member.swap(pos - 1, pos);
            pos -= 1;
        }
    }
}

/// Single-linkage clusters of `vals` at distance `tol`, each sorted.
fn cluster_indices(vals: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let n = vals.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (vals[i] - vals[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_of[r] == usize::MAX {
            root_of[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_of[r]].push(i);
    }
    groups
}

/// Solve `T11 X - X T22 = -T12` for the leading `m x m` block of `t`.
fn solve_sylvester(t: &CMatrix, m: usize) -> CMatrix {
    let n = t.nrows();
    let r = n - m;
    let mut x = CMatrix::zeros(m, r);
    for j in 0..r {
        let mu = t[(m + j, m + j)];
        let mut rhs: CVector = -t.column(m + j).rows(0, m).into_owned();
        for i in 0..j {
            rhs += x.column(i) * t[(m + i, m + j)];
        }
        for row in (0..m).rev() {
            let mut acc = rhs[row];
            for col in row + 1..m {
                acc -= t[(row, col)] * x[(col, j)];
            }
            x[(row, j)] = acc / (t[(row, row)] - mu);
        }
    }
    x
}

struct Svd {
    u: CMatrix,
    sigma: Vec<f64>,
    v: CMatrix,
}

/// SVD with singular values sorted descending.
fn svd(a: &CMatrix) -> Svd {
    let s = a.clone().svd(true, true);
    let (u0, vt0) = (s.u.unwrap(), s.v_t.unwrap());
    let mut idx: Vec<usize> = (0..s.singular_values.len()).collect();
    idx.sort_by(|&i, &j| s.singular_values[j].total_cmp(&s.singular_values[i]));
    let sigma = idx.iter().map(|&i| s.singular_values[i]).collect();
    let u = CMatrix::from_columns(
        &idx.iter()
            .map(|&i| u0.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    let v = CMatrix::from_columns(
        &idx.iter()
            .map(|&i| vt0.row(i).adjoint())
            .collect::<Vec<_>>(),
    );
    Svd { u, sigma, v }
}

/// Orthonormal basis for the span of `cols`.
fn orthonormal_span(cols: &[CVector], m: usize) -> Vec<CVector> {
    if cols.is_empty() {
        return Vec::new();
    }
    let a = CMatrix::from_columns(cols);
    let s = svd(&a);
    let cut = s.sigma.first().copied().unwrap_or(0.0) * 1e-10;
    (0..s.sigma.len().min(m))
        .filter(|&i| s.sigma[i] > cut)
        .map(|i| s.u.column(i).into_owned())
        .collect()
}

/// Jordan chains of a (numerically) nilpotent `nil`, each chain listed from
/// the eigenvector up.
fn nilpotent_chains(
    nil: &CMatrix,
    tol: f64,
    scale: f64,
    lambda: Complex64,
) -> Result<Vec<Vec<CVector>>> {
    let m = nil.nrows();
    let ambiguous = |detail: String| Error::Decomposition {
        eigenvalue: lambda,
        detail,
    };
    let window = ambiguity_window(tol, scale);

    // Null spaces of N^k, k = 1..p.
    let mut kernels: Vec<Vec<CVector>> = vec![Vec::new()];
    // Perturbing N by e moves the singular values of N^k by about
    // k |N|^(k-1) e, which sets the rank threshold.
    let nil_norm = crate::linalg::spectral_norm(nil).max(tol);
    let mut power = CMatrix::identity(m, m);
    for k in 1..=m {
        power = nil * power;
        let thr = tol * k as f64 * nil_norm.powi(k as i32 - 1);
        let s = svd(&power);
        if let Some(&bad) = s
            .sigma
            .iter()
            .find(|&&x| x > thr / window && x < thr * window)
        {
            return Err(ambiguous(format!(
                "singular value {bad:e} of N^{k} near rank threshold {thr:e}"
            )));
        }
        let null: Vec<CVector> = (0..m)
            .filter(|&i| s.sigma[i] <= thr)
            .map(|i| s.v.column(i).into_owned())
            .collect();
        if null.len() < kernels[k - 1].len() {
            return Err(ambiguous("null spaces of N^k are not nested".into()));
        }
        let full = null.len() == m;
        kernels.push(null);
        if full {
            break;
        }
    }
    let p = kernels.len() - 1;
    if kernels[p].len() != m {
        return Err(ambiguous(
            "cluster is not nilpotent within tolerance".into(),
        ));
    }

    // Chains stored top-first while building.
    let mut chains: Vec<Vec<CVector>> = Vec::new();
    for k in (1..=p).rev() {
        let existing: Vec<CVector> = chains
            .iter()
            .filter(|c| c.len() > k)
            .map(|c| c[c.len() - k].clone())
            .collect();
        let new_dirs = kernels[k].len() - kernels[k - 1].len();
        if new_dirs < existing.len() {
            return Err(ambiguous("inconsistent Jordan structure".into()));
        }
        let count = new_dirs - existing.len();
        if count == 0 {
            continue;
        }
        let mut span = kernels[k - 1].clone();
        span.extend(existing);
        let basis = orthonormal_span(&span, m);
        let kk = CMatrix::from_columns(&kernels[k]);
        let mut r = kk.clone();
        for b in &basis {
            let coef = b.adjoint() * &kk;
            r -= b * coef;
        }
        let s = svd(&r);
        if s.sigma[count - 1] < 1e-6 || s.sigma.get(count).is_some_and(|&x| x > 1e-6) {
            return Err(ambiguous(format!(
                "cannot separate {count} new chain(s) at level {k}"
            )));
        }
        for i in 0..count {
            let mut chain = vec![s.u.column(i).into_owned()];
            for _ in 1..k {
                let next = nil * chain.last().unwrap();
                chain.push(next);
            }
            chains.push(chain);
        }
    }
    for c in &mut chains {
        c.reverse();
    }
    chains.sort_by_key(|c| std::cmp::Reverse(c.len()));
    Ok(chains)
}
