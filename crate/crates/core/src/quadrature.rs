//! Grid derivatives and cumulative integrals on possibly nonuniform grids.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Validate a strictly increasing grid with at least `min_len` points.
pub fn check_grid(grid: &[f64], min_len: usize) -> Result<()> {
    if grid.len() < min_len {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least {min_len} points, got {}",
            grid.len()
        )));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "grid must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Finite-difference weights for the first derivative at grid index `j`.
/// Uses the five nearest points (fewer on short grids), centered where
/// possible; fourth order on smooth data.
pub fn derivative_weights(grid: &[f64], j: usize) -> Vec<(usize, f64)> {
    let n = grid.len();
    let width = n.min(5);
    let lo = j.saturating_sub(width / 2).min(n - width);
    let nodes = &grid[lo..lo + width];
    fornberg_first_derivative(grid[j], nodes)
        .into_iter()
        .enumerate()
        .map(|(i, w)| (lo + i, w))
        .collect()
}

/// Fornberg's recursion for first-derivative weights at `z`.
fn fornberg_first_derivative(z: f64, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    // c[i][k]: weight of node i for the k-th derivative, k = 0, 1.
    let mut c = vec![[0.0f64; 2]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

pub fn derivative(grid: &[f64], f: &[Complex64]) -> Vec<Complex64> {
    (0..grid.len())
        .map(|j| {
            derivative_weights(grid, j)
                .iter()
                .map(|&(i, w)| f[i] * w)
                .sum()
        })
        .collect()
}

/// Cumulative trapezoid integral starting at index `start` (zero there and
/// before it).
pub fn cumulative_trapezoid(grid: &[f64], f: &[Complex64], start: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for j in start + 1..grid.len() {
        out[j] = out[j - 1] + (f[j] + f[j - 1]) * (0.5 * (grid[j] - grid[j - 1]));
    }
    out
}

/// Locate `s` in the grid: `Ok(j)` for a grid point within `tol`, otherwise
/// the interval index `j` with `grid[j] < s < grid[j + 1]`.
pub fn locate(grid: &[f64], s: f64) -> Result<std::result::Result<usize, usize>> {
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let tol = 1e-12 * (hi - lo).abs().max(1.0);
    if !(s >= lo - tol && s <= hi + tol) {
        return Err(Error::OutsideGrid { s, lo, hi });
    }
    let j = grid.partition_point(|&x| x < s - tol);
    if j < grid.len() && (grid[j] - s).abs() <= tol {
        return Ok(Ok(j));
    }
    Ok(Err(j - 1))
}

/// Grid index of `s`, which must be a grid point.
pub fn grid_index(grid: &[f64], s: f64) -> Result<usize> {
    locate(grid, s)?.map_err(|_| Error::OffGrid { s })
}

/// Piecewise-linear interpolation of samples `f` at `s`.
pub fn interpolate(grid: &[f64], f: &[Complex64], s: f64) -> Result<Complex64> {
    Ok(match locate(grid, s)? {
        Ok(j) => f[j],
        Err(j) => {
            let w = (s - grid[j]) / (grid[j + 1] - grid[j]);
            f[j] * (1.0 - w) + f[j + 1] * w
        }
    })
}

/// `n` evenly spaced points on `[a, b]`, endpoints exact.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn derivative_exact_for_quartics_on_nonuniform_grid() {
        let grid = [0.0f64, 0.1, 0.35, 0.4, 0.8, 1.0, 1.3];
        let f: Vec<_> = grid
            .iter()
            .map(|&x| cx(x.powi(4) - 3.0 * x * x - x + 2.0))
            .collect();
        let d = derivative(&grid, &f);
        for (x, v) in grid.iter().zip(d) {
            assert!((v.re - (4.0 * x.powi(3) - 6.0 * x - 1.0)).abs() < 1e-11);
        }
    }

    #[test]
    fn short_grids_use_all_points() {
        let grid = [0.0, 0.5, 1.5];
        let f: Vec<_> = grid.iter().map(|&x| cx(x * x)).collect();
        let d = derivative(&grid, &f);
        assert!((d[2].re - 3.0).abs() < 1e-13);
    }

    #[test]
    fn trapezoid_exact_for_linear() {
        let grid = linspace(0.0, 2.0, 7);
        let f: Vec<_> = grid.iter().map(|&x| cx(2.0 * x + 1.0)).collect();
        let i = cumulative_trapezoid(&grid, &f, 0);
        assert!((i[6].re - 6.0).abs() < 1e-14);
        let partial = cumulative_trapezoid(&grid, &f, 3);
        assert_eq!(partial[3], cx(0.0));
        assert!((partial[6].re - (6.0 - 2.0)).abs() < 1e-14);
    }

    #[test]
    fn locate_points_and_intervals() {
        let g = linspace(0.0, 1.0, 5);
        assert_eq!(locate(&g, 0.5).unwrap(), Ok(2));
        assert_eq!(locate(&g, 0.6).unwrap(), Err(2));
        assert_eq!(locate(&g, 1.0).unwrap(), Ok(4));
        assert!(locate(&g, 1.1).is_err());
        assert!(grid_index(&g, 0.3).is_err());
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(check_grid(&[0.0, 1.0], 3).is_err());
        assert!(check_grid(&[0.0, 1.0, 1.0], 3).is_err());
        assert!(check_grid(&[0.0, 0.5, 1.0], 3).is_ok());
    }
}
