//! Fixtures shared by the benchmarks.

use oqs_adiabatic::models::{deutsch_trajectory, DeutschParams};
use oqs_adiabatic::quadrature::linspace;
use oqs_adiabatic::SpectralTrajectory;

pub fn deutsch(gamma0: f64, tau: f64) -> DeutschParams {
    DeutschParams {
        omega: 1.0,
        gamma0,
        f0: 0,
        f1: 1,
        tau,
    }
}

pub fn deutsch_path(points: usize) -> SpectralTrajectory {
    deutsch_trajectory(&deutsch(0.1, 1.0), linspace(0.0, 1.0, points)).expect("closed-form path")
}
