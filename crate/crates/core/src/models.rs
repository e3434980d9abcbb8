//! Concrete models: a dephasing two-level oracle algorithm and a dephased
//! two-level avoided crossing, with closed-form generators and spectra.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, re, CMatrix, CVector};
use crate::lindblad::LindbladModel;
use crate::spectral::{JordanBasis, JordanBlockChain, SpectralTrajectory};

pub use crate::linalg::gibbs_state;

fn vec4(v: [Complex64; 4]) -> CVector {
    CVector::from_row_slice(&v)
}

fn block(eigenvalue: Complex64, right: CVector, left: CVector) -> JordanBlockChain {
    JordanBlockChain {
        eigenvalue,
        right: vec![right],
        left: vec![left],
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Parameter(format!(
            "{name} = {x} must be positive and finite"
        )));
    }
    Ok(())
}

fn non_negative(name: &str, x: f64) -> Result<()> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Parameter(format!(
            "{name} = {x} must be non-negative and finite"
        )));
    }
    Ok(())
}

/// Two-level oracle algorithm with a rotating driving field and dephasing
/// at constant rate `gamma0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeutschParams {
    pub omega: f64,
    pub gamma0: f64,
    pub f0: u8,
    pub f1: u8,
    pub tau: f64,
}

impl DeutschParams {
    pub fn validate(&self) -> Result<()> {
        positive("omega", self.omega)?;
        positive("tau", self.tau)?;
        non_negative("gamma0", self.gamma0)?;
        if self.f0 > 1 || self.f1 > 1 {
            return Err(Error::Parameter(format!(
                "oracle bits ({}, {}) must be 0 or 1",
                self.f0, self.f1
            )));
        }
        Ok(())
    }

    /// `1 - (-1)^(f0 + f1)`: 0 for a constant oracle, 2 for a balanced one.
    pub fn oracle_exponent(&self) -> f64 {
        if (self.f0 + self.f1).is_multiple_of(2) {
            0.0
        } else {
            2.0
        }
    }

    /// Rotation sense of the field, `(-1)^f0`.
    fn orientation(&self) -> f64 {
        if self.f0 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `(g_c, g_s)` at physical time `t`.
    pub fn field(&self, t: f64) -> (f64, f64) {
        let phase = PI * self.oracle_exponent() * t / (2.0 * self.tau);
        (phase.cos(), self.orientation() * phase.sin())
    }

    /// `-(omega/2)(g_c X - g_s Y)`.
    pub fn hamiltonian(&self, t: f64) -> CMatrix {
        let (gc, gs) = self.field(t);
        (linalg::sigma_x().scale(gc) - linalg::sigma_y().scale(gs)).scale(-0.5 * self.omega)
    }

    /// The same Hamiltonian built as `U H0 U^dagger` with
    /// `U = exp(i pi t/(2 tau) O_f)` and `O_f = diag((-1)^f0, (-1)^f1)`.
    pub fn hamiltonian_from_oracle(&self, t: f64) -> CMatrix {
        let phi = FRAC_PI_2 * t / self.tau;
        let sign = |b: u8| if b == 0 { 1.0 } else { -1.0 };
        let u = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::from_polar(1.0, phi * sign(self.f0)),
            Complex64::from_polar(1.0, phi * sign(self.f1)),
        ]));
        let h0 = linalg::sigma_x().scale(-0.5 * self.omega);
        &u * h0 * u.adjoint()
    }
}

pub fn deutsch_model(p: &DeutschParams) -> Result<LindbladModel> {
    p.validate()?;
    let q = *p;
    let g = p.gamma0.sqrt();
    Ok(
        LindbladModel::new(2, p.tau, move |t| q.hamiltonian_from_oracle(t))?
            .with_jump(move |_| linalg::sigma_z().scale(g)),
    )
}

/// `|+><+|`, the ground state of the initial Hamiltonian.
pub fn deutsch_initial_state() -> CMatrix {
    CMatrix::from_element(2, 2, re(0.5))
}

/// Closed-form generator matrix in the Pauli basis.
pub fn deutsch_superoperator(p: &DeutschParams, t: f64) -> CMatrix {
    let (gc, gs) = p.field(t);
    let (w, g) = (p.omega, p.gamma0);
    CMatrix::from_row_slice(
        4,
        4,
        &[
            [0.0, 0.0, 0.0, 0.0],
            [0.0, -2.0 * g, 0.0, w * gs],
            [0.0, 0.0, -2.0 * g, w * gc],
            [0.0, -w * gs, -w * gc, 0.0],
        ]
        .concat()
        .into_iter()
        .map(re)
        .collect::<Vec<_>>(),
    )
}

/// Closed-form Jordan basis. Blocks: `0`, `-2 gamma`, `-gamma - s`,
/// `-gamma + s` with `s = sqrt(gamma^2 - omega^2)` (principal branch).
/// Fails where the last two coincide (`gamma = omega`).
pub fn deutsch_analytic_basis(p: &DeutschParams, t: f64) -> Result<JordanBasis> {
    p.validate()?;
    let (gc, gs) = p.field(t);
    let (w, g) = (p.omega, p.gamma0);
    let sr = re(g * g - w * w).sqrt();
    if sr.norm() <= 1e-9 * w {
        return Err(Error::SpectrumDegenerate { t });
    }
    let dp = re(g) + sr;
    let dm = re(g) - sr;
    let z = re(0.0);
    let one = re(1.0);
    let k = (sr * 2.0).inv();
    Ok(JordanBasis::new(vec![
        block(z, vec4([one, z, z, z]), vec4([one, z, z, z])),
        block(
            re(-2.0 * g),
            vec4([z, re(-gc), re(gs), z]),
            vec4([z, re(-gc), re(gs), z]),
        ),
        block(
            -dp,
            vec4([z, dp * gs / w, dp * gc / w, one]),
            vec4([z, re(w * gs), re(w * gc), -dm]) * k,
        ),
        block(
            -dm,
            vec4([z, dm * gs / w, dm * gc / w, one]),
            vec4([z, re(-w * gs), re(-w * gc), dp]) * k,
        ),
    ]))
}

/// Closed-form bases on a grid of `s = t / tau`.
pub fn deutsch_trajectory(p: &DeutschParams, grid: Vec<f64>) -> Result<SpectralTrajectory> {
    let q = *p;
    SpectralTrajectory::from_fn(grid, p.tau, move |s| deutsch_analytic_basis(&q, s * q.tau))
}

/// Adiabatic solution `(1/2)[1 + e^(-2 gamma t)(g_c X - g_s Y)]`.
pub fn deutsch_adiabatic_state(p: &DeutschParams, t: f64) -> CMatrix {
    let (gc, gs) = p.field(t);
    let decay = (-2.0 * p.gamma0 * t).exp();
    let bloch = linalg::sigma_x().scale(gc) - linalg::sigma_y().scale(gs);
    (linalg::identity(2) + bloch.scale(decay)).scale(0.5)
}

/// Adiabatic state at the end of the schedule.
pub fn deutsch_target(p: &DeutschParams) -> CMatrix {
    deutsch_adiabatic_state(p, p.tau)
}

/// Schedule of the transverse field `Delta(s)` of the avoided crossing.
#[derive(Clone, Default)]
pub enum SweepProfile {
    /// `Delta(s) = tan(theta_final) omega0 s`.
    #[default]
    Linear,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for SweepProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear => write!(f, "Linear"),
            Self::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Two-level avoided crossing `H = (omega0 Z + Delta(t) X)/2` with
/// `sqrt(gamma0) Y` dephasing.
#[derive(Debug, Clone)]
pub struct LandauZenerParams {
    pub omega0: f64,
    pub theta_final: f64,
    pub gamma0: f64,
    pub tau: f64,
    pub profile: SweepProfile,
}

impl LandauZenerParams {
    pub fn new(omega0: f64, theta_final: f64, gamma0: f64, tau: f64) -> Self {
        Self {
            omega0,
            theta_final,
            gamma0,
            tau,
            profile: SweepProfile::Linear,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("omega0", self.omega0)?;
        positive("tau", self.tau)?;
        non_negative("gamma0", self.gamma0)?;
        if !(0.0..FRAC_PI_2).contains(&self.theta_final) {
            return Err(Error::Parameter(format!(
                "theta_final = {} must lie in [0, pi/2)",
                self.theta_final
            )));
        }
        Ok(())
    }

    pub fn delta(&self, t: f64) -> f64 {
        let s = t / self.tau;
        match &self.profile {
            SweepProfile::Linear => self.theta_final.tan() * self.omega0 * s,
            SweepProfile::Custom(f) => f(s),
        }
    }

    /// Mixing angle `arctan(Delta / omega0)`.
    pub fn theta(&self, t: f64) -> f64 {
        (self.delta(t) / self.omega0).atan()
    }

    pub fn hamiltonian(&self, t: f64) -> CMatrix {
        (linalg::sigma_z().scale(self.omega0) + linalg::sigma_x().scale(self.delta(t))).scale(0.5)
    }
}

pub fn landau_zener_model(p: &LandauZenerParams) -> Result<LindbladModel> {
    p.validate()?;
    let q = p.clone();
    let g = p.gamma0.sqrt();
    Ok(LindbladModel::new(2, p.tau, move |t| q.hamiltonian(t))?
        .with_jump(move |_| linalg::sigma_y().scale(g)))
}

/// Ground state `|1><1|` of the initial Hamiltonian.
pub fn landau_zener_initial_state() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[re(0.0), re(0.0), re(0.0), re(1.0)])
}

/// Closed-form generator matrix in the Pauli basis.
pub fn landau_zener_superoperator(p: &LandauZenerParams, t: f64) -> CMatrix {
    let (w, g, d) = (p.omega0, p.gamma0, p.delta(t));
    CMatrix::from_row_slice(
        4,
        4,
        &[
            [0.0, 0.0, 0.0, 0.0],
            [0.0, -2.0 * g, -w, 0.0],
            [0.0, w, 0.0, -d],
            [0.0, 0.0, d, -2.0 * g],
        ]
        .concat()
        .into_iter()
        .map(re)
        .collect::<Vec<_>>(),
    )
}

/// Closed-form Jordan basis. Blocks: `0`, `-2 gamma`,
/// `-gamma - kappa/cos(theta)`, `-gamma + kappa/cos(theta)` with
/// `kappa = sqrt(gamma^2 cos^2(theta) - omega0^2)`. Fails at `kappa = 0`.
pub fn landau_zener_analytic_basis(p: &LandauZenerParams, t: f64) -> Result<JordanBasis> {
    p.validate()?;
    let th = p.theta(t);
    let (st, ct) = th.sin_cos();
    let (w, g) = (p.omega0, p.gamma0);
    let kappa = re(g * g * ct * ct - w * w).sqrt();
    if kappa.norm() <= 1e-9 * w {
        return Err(Error::SpectrumDegenerate { t });
    }
    let z = re(0.0);
    let one = re(1.0);
    let kp = one + kappa.inv() * (ct * g);
    let km = one - kappa.inv() * (ct * g);
    let d1 = vec4([z, re(st), z, re(ct)]);
    Ok(JordanBasis::new(vec![
        block(z, vec4([one, z, z, z]), vec4([one, z, z, z])),
        block(re(-2.0 * g), d1.clone(), d1),
        block(
            re(-g) - kappa / ct,
            vec4([z, re(-ct), (re(g * ct) - kappa) / w, re(st)]),
            vec4([z, -kp * ct, -kappa.inv() * w, kp * st]).scale(0.5),
        ),
        block(
            re(-g) + kappa / ct,
            vec4([z, re(-ct), (re(g * ct) + kappa) / w, re(st)]),
            vec4([z, -km * ct, kappa.inv() * w, km * st]).scale(0.5),
        ),
    ]))
}

/// Closed-form bases on a grid of `s = t / tau`.
pub fn landau_zener_trajectory(
    p: &LandauZenerParams,
    grid: Vec<f64>,
) -> Result<SpectralTrajectory> {
    SpectralTrajectory::from_fn(grid, p.tau, |s| landau_zener_analytic_basis(p, s * p.tau))
}

/// Adiabatic solution `(1/2)[1 - e^(-2 gamma t)(sin(theta) X + cos(theta) Z)]`.
pub fn landau_zener_adiabatic_state(p: &LandauZenerParams, t: f64) -> CMatrix {
    let (st, ct) = p.theta(t).sin_cos();
    let decay = (-2.0 * p.gamma0 * t).exp();
    let bloch = linalg::sigma_x().scale(st) + linalg::sigma_z().scale(ct);
    (linalg::identity(2) - bloch.scale(decay)).scale(0.5)
}

pub fn landau_zener_target(p: &LandauZenerParams) -> CMatrix {
    landau_zener_adiabatic_state(p, p.tau)
}

/// Pure state helper for tests and callers.
pub fn ket(amplitudes: &[Complex64]) -> CVector {
    CVector::from_row_slice(amplitudes)
}
