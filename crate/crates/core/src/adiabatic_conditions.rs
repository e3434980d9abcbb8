//! Adiabaticity conditions between pairs of Jordan blocks.
//!
//! For a source block `alpha`, a target block `beta` and a chain position
//! `k` of `beta`, with `G(s) = lambda_alpha(s) - lambda_beta(s)`:
//!
//! ```text
//! F(s)     = sum_n w_n(s) exp(-int_s0^s <E^k_b|dD^k_b>) <E^k_b | dD^n_a/ds>
//! Xi1(s)   = |F(s) exp(tau int_s0^s G) / (tau G(s))|
//! Xi2(s)   = |(1/tau) d/ds[F/G] exp(tau int_s0^s G)|
//! ```
//!
//! Small `max(Xi1, Xi2)` for the relevant pairs means adiabatic dynamics.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{self, cumulative_trapezoid, derivative};
use crate::spectral::SpectralTrajectory;

/// Optional weight `w_n(s)` on the source chain; defaults to 1.
pub type Weight<'a> = &'a (dyn Fn(usize, f64) -> Complex64 + Sync);

fn check_pair(traj: &SpectralTrajectory, alpha: usize, beta: usize, k: usize) -> Result<()> {
    traj.check_block(alpha)?;
    traj.check_block(beta)?;
    if alpha == beta {
        return Err(Error::InvalidArgument(
            "source and target blocks must differ".into(),
        ));
    }
    if k >= traj.block_len(beta) {
        return Err(Error::InvalidArgument(format!(
            "chain index {k} out of range for block {beta} of length {}",
            traj.block_len(beta)
        )));
    }
    Ok(())
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::Parameter(format!("tau = {tau} must be positive")));
    }
    Ok(())
}

/// `F` on the grid points from `s0` on.
pub fn f_tilde_profile(
    traj: &SpectralTrajectory,
    alpha: usize,
    beta: usize,
    k: usize,
    s0: f64,
    weight: Option<Weight>,
) -> Result<Vec<Complex64>> {
    check_pair(traj, alpha, beta, k)?;
    let j0 = quadrature::grid_index(&traj.grid, s0)?;
    let diag: Vec<Complex64> = (0..traj.len())
        .map(|j| traj.coupling(beta, k, beta, k, j))
        .collect();
    let phase = cumulative_trapezoid(&traj.grid, &diag, j0);
    Ok((j0..traj.len())
        .map(|j| {
            let s = traj.grid[j];
            let sum: Complex64 = (0..traj.block_len(alpha))
                .map(|n| {
                    let w = weight.map_or(Complex64::new(1.0, 0.0), |f| f(n, s));
                    w * traj.coupling(beta, k, alpha, n, j)
                })
                .sum();
            sum * (-phase[j]).exp()
        })
        .collect())
}

/// `F(s)` for any `s` in `[s0, 1]`, linearly interpolated between grid points.
pub fn f_tilde(
    traj: &SpectralTrajectory,
    alpha: usize,
    beta: usize,
    k: usize,
    s: f64,
    s0: f64,
) -> Result<Complex64> {
    let prof = f_tilde_profile(traj, alpha, beta, k, s0, None)?;
    let j0 = quadrature::grid_index(&traj.grid, s0)?;
    if s < s0 {
        return Err(Error::OutsideGrid {
            s,
            lo: s0,
            hi: traj.grid[traj.len() - 1],
        });
    }
    quadrature::interpolate(&traj.grid[j0..], &prof, s)
}

/// Gap `lambda_alpha - lambda_beta` along the grid.
pub fn gap(traj: &SpectralTrajectory, alpha: usize, beta: usize) -> Vec<Complex64> {
    (0..traj.len())
        .map(|j| traj.eigenvalue(alpha, j) - traj.eigenvalue(beta, j))
        .collect()
}

fn degenerate_points(traj: &SpectralTrajectory, g: &[Complex64]) -> Vec<f64> {
    let scale = traj
        .bases
        .iter()
        .flat_map(|b| b.blocks.iter().map(|x| x.eigenvalue.norm()))
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    g.iter()
        .zip(&traj.grid)
        .filter(|(z, _)| z.norm() <= 1e-12 * scale)
        .map(|(_, &s)| s)
        .collect()
}

/// `Xi1`, `Xi2` and their ingredients on the grid (from `s0 = 0`).
#[derive(Debug, Clone)]
pub struct XiProfile {
    pub alpha: usize,
    pub beta: usize,
    pub k: usize,
    pub tau: f64,
    pub s: Vec<f64>,
    pub f_tilde: Vec<Complex64>,
    pub gap: Vec<Complex64>,
    /// `tau Re int_0^s G`.
    pub log_growth: Vec<f64>,
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
}

impl XiProfile {
    pub fn xi1_max(&self) -> f64 {
        self.xi1.iter().copied().fold(0.0, f64::max)
    }

    pub fn xi2_max(&self) -> f64 {
        self.xi2.iter().copied().fold(0.0, f64::max)
    }

    /// `max_s max(Xi1, Xi2)` over `s >= s0` for reference point `s0` at
    /// grid index `j0`.
    pub fn max_from(&self, j0: usize, diag_phase: Complex64) -> (f64, f64) {
        // Moving s0 rescales both profiles by |exp(int_0^s0 C_kk)| exp(-tau Re int_0^s0 G).
        let factor = (diag_phase.re - self.log_growth[j0]).exp();
        let m1 = self.xi1[j0..].iter().copied().fold(0.0, f64::max) * factor;
        let m2 = self.xi2[j0..].iter().copied().fold(0.0, f64::max) * factor;
        (m1, m2)
    }
}

pub fn xi_profile(
    traj: &SpectralTrajectory,
    alpha: usize,
    beta: usize,
    k: usize,
    tau: f64,
    weight: Option<Weight>,
) -> Result<XiProfile> {
    check_tau(tau)?;
    let f = f_tilde_profile(traj, alpha, beta, k, traj.grid[0], weight)?;
    let g = gap(traj, alpha, beta);
    let bad = degenerate_points(traj, &g);
    if !bad.is_empty() {
        return Err(Error::GapDegenerate {
            alpha,
            beta,
            s: bad,
        });
    }
    let grid = &traj.grid;
    let log_growth: Vec<f64> = cumulative_trapezoid(grid, &g, 0)
        .iter()
        .map(|z| tau * z.re)
        .collect();
    let ratio: Vec<Complex64> = f.iter().zip(&g).map(|(a, b)| a / b).collect();
    let dratio = derivative(grid, &ratio);
    let xi1 = (0..grid.len())
        .map(|j| (ratio[j].norm() / tau) * log_growth[j].exp())
        .collect();
    let xi2 = (0..grid.len())
        .map(|j| (dratio[j].norm() / tau) * log_growth[j].exp())
        .collect();
    Ok(XiProfile {
        alpha,
        beta,
        k,
        tau,
        s: grid.clone(),
        f_tilde: f,
        gap: g,
        log_growth,
        xi1,
        xi2,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    pub alpha: usize,
    pub beta: usize,
    /// Chain position in `beta`, from 0.
    pub k: usize,
    pub xi1_max: f64,
    pub xi2_max: f64,
    pub xi_max: f64,
    /// `max_s G(s)` when the integral oracle was requested.
    pub g_max: Option<f64>,
    /// False when the source block is absent from the initial state.
    pub relevant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcludedPair {
    pub alpha: usize,
    pub beta: usize,
    pub s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticityReport {
    pub tau: f64,
    pub pairs: Vec<PairReport>,
    /// Pairs whose gap vanishes somewhere on the grid.
    pub excluded: Vec<ExcludedPair>,
}

impl AdiabaticityReport {
    /// `(max Xi1, max Xi2, max Xi)` over all targets of source `alpha`.
    pub fn source_max(&self, alpha: usize) -> (f64, f64, f64) {
        self.pairs
            .iter()
            .filter(|p| p.alpha == alpha)
            .fold((0.0, 0.0, 0.0), |acc, p| {
                (
                    acc.0.max(p.xi1_max),
                    acc.1.max(p.xi2_max),
                    acc.2.max(p.xi_max),
                )
            })
    }

    /// Largest `Xi` over pairs that matter for the initial state.
    pub fn relevant_max(&self) -> f64 {
        self.pairs
            .iter()
            .filter(|p| p.relevant)
            .map(|p| p.xi_max)
            .fold(0.0, f64::max)
    }

    pub fn pair(&self, alpha: usize, beta: usize, k: usize) -> Option<&PairReport> {
        self.pairs
            .iter()
            .find(|p| p.alpha == alpha && p.beta == beta && p.k == k)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ConditionOptions {
    /// Blocks present in the initial state; `None` marks every pair relevant.
    pub support: Option<Vec<usize>>,
    /// Maximize over every grid reference point `s0` instead of `s0 = 0`.
    pub exhaustive_s0: bool,
    /// Also evaluate the integral oracle `G`.
    pub with_oracle: bool,
}

/// Evaluate the conditions for every ordered pair of distinct blocks.
pub fn xi_max(
    traj: &SpectralTrajectory,
    tau: f64,
    opts: &ConditionOptions,
) -> Result<AdiabaticityReport> {
    check_tau(tau)?;
    let mut pairs = Vec::new();
    let mut excluded = Vec::new();
    for alpha in 0..traj.num_blocks() {
        for beta in 0..traj.num_blocks() {
            if alpha == beta {
                continue;
            }
            for k in 0..traj.block_len(beta) {
                let prof = match xi_profile(traj, alpha, beta, k, tau, None) {
                    Ok(p) => p,
                    Err(Error::GapDegenerate { s, .. }) => {
                        if k == 0 {
                            excluded.push(ExcludedPair { alpha, beta, s });
                        }
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let (xi1_max, xi2_max) = if opts.exhaustive_s0 {
                    let diag: Vec<Complex64> = (0..traj.len())
                        .map(|j| traj.coupling(beta, k, beta, k, j))
                        .collect();
                    let phase = cumulative_trapezoid(&traj.grid, &diag, 0);
                    (0..traj.len()).fold((0.0f64, 0.0f64), |acc, j0| {
                        let (a, b) = prof.max_from(j0, phase[j0]);
                        (acc.0.max(a), acc.1.max(b))
                    })
                } else {
                    (prof.xi1_max(), prof.xi2_max())
                };
                let g_max = if opts.with_oracle {
                    let o = g_oracle(traj, alpha, beta, k, tau)?;
                    Some(o.g.iter().copied().fold(0.0, f64::max))
                } else {
                    None
                };
                let relevant = opts.support.as_ref().is_none_or(|s| s.contains(&alpha));
                pairs.push(PairReport {
                    alpha,
                    beta,
                    k,
                    xi1_max,
                    xi2_max,
                    xi_max: xi1_max.max(xi2_max),
                    g_max,
                    relevant,
                });
            }
        }
    }
    Ok(AdiabaticityReport {
        tau,
        pairs,
        excluded,
    })
}

/// The integral `G(s) = |int_0^s F(s') exp(tau int_0^s' G) ds'|` and the
/// bound `Xi1(s) + Xi1(0) + int_0^s Xi2`.
#[derive(Debug, Clone)]
pub struct OracleProfile {
    pub s: Vec<f64>,
    pub g: Vec<f64>,
    pub bound: Vec<f64>,
}

/// `(int_0^1 e^(d u) du, int_0^1 u e^(d u) du)`.
fn exp_moments(d: Complex64) -> (Complex64, Complex64) {
    if d.norm() < 0.1 {
        let (mut e1, mut e2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let mut pow_over_fact = Complex64::new(1.0, 0.0);
        for m in 0..16 {
            e1 += pow_over_fact / (m + 1) as f64;
            e2 += pow_over_fact / (m + 2) as f64;
            pow_over_fact *= d / (m + 1) as f64;
        }
        (e1, e2)
    } else {
        let ed = d.exp();
        ((ed - 1.0) / d, (ed * (d - 1.0) + 1.0) / (d * d))
    }
}

/// Evaluate the oracle with a product rule that is exact for linear `F`
/// and linear exponent on each grid interval.
pub fn g_oracle(
    traj: &SpectralTrajectory,
    alpha: usize,
    beta: usize,
    k: usize,
    tau: f64,
) -> Result<OracleProfile> {
    let prof = xi_profile(traj, alpha, beta, k, tau, None)?;
    let grid = &traj.grid;
    let phi: Vec<Complex64> = cumulative_trapezoid(grid, &prof.gap, 0)
        .iter()
        .map(|z| z * tau)
        .collect();
    let f = &prof.f_tilde;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut g = vec![0.0; grid.len()];
    for j in 0..grid.len() - 1 {
        let h = grid[j + 1] - grid[j];
        let (e1, e2) = exp_moments(phi[j + 1] - phi[j]);
        acc += phi[j].exp() * h * (f[j] * e1 + (f[j + 1] - f[j]) * e2);
        g[j + 1] = acc.norm();
    }
    let xi2: Vec<Complex64> = prof.xi2.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let tail = cumulative_trapezoid(grid, &xi2, 0);
    let bound = (0..grid.len())
        .map(|j| prof.xi1[j] + prof.xi1[0] + tail[j].re)
        .collect();
    Ok(OracleProfile {
        s: grid.clone(),
        g,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{deutsch_analytic_basis, DeutschParams};
    use crate::quadrature::linspace;
    use std::f64::consts::PI;

    fn deutsch_traj(gamma0: f64, n: usize) -> (DeutschParams, SpectralTrajectory) {
        let p = DeutschParams {
            omega: 1.0,
            gamma0,
            f0: 0,
            f1: 1,
            tau: 1.0,
        };
        let tr = SpectralTrajectory::from_fn(linspace(0.0, 1.0, n), 1.0, |s| {
            deutsch_analytic_basis(&p, s)
        })
        .unwrap();
        (p, tr)
    }

    #[test]
    fn deutsch_f_tilde_is_constant() {
        let (p, tr) = deutsch_traj(0.1, 201);
        let delta = (1.0 - p.gamma0 * p.gamma0).sqrt();
        let want = PI * 2.0 * p.omega / (4.0 * delta);
        let f = f_tilde_profile(&tr, 1, 2, 0, 0.0, None).unwrap();
        for z in f {
            assert!(
                (z.norm() - want).abs() < 1e-7 * want,
                "{} vs {want}",
                z.norm()
            );
        }
    }

    #[test]
    fn weight_scales_f_tilde() {
        let (_, tr) = deutsch_traj(0.1, 51);
        let w = |_: usize, _: f64| Complex64::new(0.0, 2.0);
        let a = f_tilde_profile(&tr, 1, 2, 0, 0.0, None).unwrap();
        let b = f_tilde_profile(&tr, 1, 2, 0, 0.0, Some(&w)).unwrap();
        assert!((b[10] - a[10] * Complex64::new(0.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn interpolated_f_tilde_and_ranges() {
        let (_, tr) = deutsch_traj(0.1, 51);
        assert!(f_tilde(&tr, 1, 2, 0, 0.505, 0.0).is_ok());
        assert!(f_tilde(&tr, 1, 2, 0, 1.5, 0.0).is_err());
        assert!(f_tilde(&tr, 1, 2, 0, 0.1, 0.5).is_err());
        assert!(f_tilde_profile(&tr, 1, 1, 0, 0.0, None).is_err());
        assert!(f_tilde_profile(&tr, 1, 2, 1, 0.0, None).is_err());
    }

    #[test]
    fn deutsch_xi1_peaks_at_start_and_scales_as_inverse_tau() {
        let (_, tr) = deutsch_traj(0.1, 401);
        let a = xi_profile(&tr, 1, 2, 0, 10.0, None).unwrap();
        let b = xi_profile(&tr, 1, 2, 0, 20.0, None).unwrap();
        assert!((a.xi1_max() - a.xi1[0]).abs() < 1e-12);
        assert!((a.xi1[0] / b.xi1[0] - 2.0).abs() < 1e-8);
        // Only finite-difference noise drives Xi2 here.
        assert!(a.xi2_max() < 1e-4 * a.xi1_max());
    }

    #[test]
    fn trivial_pairs_vanish_and_support_marks_relevance() {
        let (_, tr) = deutsch_traj(0.1, 101);
        let opts = ConditionOptions {
            support: Some(vec![0, 1]),
            ..Default::default()
        };
        let r = xi_max(&tr, 10.0, &opts).unwrap();
        assert_eq!(r.pairs.len(), 12);
        for (a, b) in [(0, 1), (1, 0), (2, 0), (0, 3)] {
            assert!(r.pair(a, b, 0).unwrap().xi_max < 1e-12);
        }
        assert!(r.pair(1, 2, 0).unwrap().relevant);
        assert!(!r.pair(2, 1, 0).unwrap().relevant);
        assert!(r.relevant_max() > 0.0);
    }

    #[test]
    fn exhaustive_s0_is_no_smaller() {
        let (_, tr) = deutsch_traj(0.2, 101);
        let a = xi_max(&tr, 10.0, &ConditionOptions::default()).unwrap();
        let b = xi_max(
            &tr,
            10.0,
            &ConditionOptions {
                exhaustive_s0: true,
                ..Default::default()
            },
        )
        .unwrap();
        for (x, y) in a.pairs.iter().zip(&b.pairs) {
            assert!(y.xi_max >= x.xi_max * (1.0 - 1e-12));
        }
    }

    #[test]
    fn oracle_matches_closed_form_for_constant_integrand() {
        let (_, tr) = deutsch_traj(0.1, 2001);
        let tau = 30.0;
        let o = g_oracle(&tr, 1, 2, 0, tau).unwrap();
        let prof = xi_profile(&tr, 1, 2, 0, tau, None).unwrap();
        let (f, g) = (prof.f_tilde[0], prof.gap[0]);
        for (j, &s) in o.s.iter().enumerate() {
            let exact = (f / (g * tau) * ((g * tau * s).exp() - 1.0)).norm();
            assert!((o.g[j] - exact).abs() < 1e-9 * exact.max(1e-3));
            assert!(o.g[j] <= o.bound[j] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn exp_moments_agree_across_branches() {
        for d in [
            Complex64::new(0.099, 0.0),
            Complex64::new(0.0, 0.0999),
            Complex64::new(-0.07, 0.07),
        ] {
            let (a1, a2) = exp_moments(d);
            let ed = d.exp();
            let b1 = (ed - 1.0) / d;
            let b2 = (ed * (d - 1.0) + 1.0) / (d * d);
            assert!((a1 - b1).norm() < 1e-13 && (a2 - b2).norm() < 1e-12);
        }
    }
}
