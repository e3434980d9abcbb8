use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Deutsch,
    LandauZener,
    Thermo,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Deutsch => "deutsch",
            Self::LandauZener => "landau_zener",
            Self::Thermo => "thermo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralSource {
    /// Closed-form bases of the built-in models.
    #[default]
    Analytic,
    /// Numerical decomposition and tracking.
    Numeric,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TauScan {
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        points: usize,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoSection {
    pub beta: f64,
    #[serde(default = "one")]
    pub omega_start: f64,
    #[serde(default = "one")]
    pub omega_end: f64,
    #[serde(default)]
    pub transverse: f64,
    #[serde(default = "ten")]
    pub horizon: f64,
    #[serde(default = "forty_one")]
    pub points: usize,
    #[serde(default = "half")]
    pub relax_rate: f64,
}

fn one() -> f64 {
    1.0
}
fn ten() -> f64 {
    10.0
}
fn half() -> f64 {
    0.5
}
fn forty_one() -> usize {
    41
}
fn default_grid() -> usize {
    401
}
fn default_theta() -> f64 {
    2.0 * PI / 5.0
}

/// On-disk form, before validation.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: ModelKind,
    #[serde(default = "one")]
    omega: f64,
    gamma0_over_omega: Option<OneOrMany>,
    #[serde(default)]
    f0: u8,
    #[serde(default = "one_u8")]
    f1: u8,
    #[serde(default = "default_theta")]
    theta_final: f64,
    #[serde(alias = "tau_grid")]
    tau_scan: Option<TauScan>,
    #[serde(default = "default_grid")]
    grid_points: usize,
    #[serde(default)]
    seed: u64,
    output_path: Option<PathBuf>,
    #[serde(default)]
    spectral_source: SpectralSource,
    thermo: Option<ThermoSection>,
}

fn one_u8() -> u8 {
    1
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub omega: f64,
    pub gammas: Vec<f64>,
    pub f0: u8,
    pub f1: u8,
    pub theta_final: f64,
    /// Values of `omega tau`, ascending.
    pub tau_scan: Vec<f64>,
    pub grid_points: usize,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub spectral_source: SpectralSource,
    pub thermo: Option<ThermoSection>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let raw: RawConfig = toml::from_str(text)?;
        let tau_scan = match raw.tau_scan {
            None => Vec::new(),
            Some(TauScan::List(v)) => v,
            Some(TauScan::Range {
                start,
                stop,
                points,
            }) => {
                if points < 2 {
                    bail!("tau_scan.points must be at least 2");
                }
                oqs_adiabatic::quadrature::linspace(start, stop, points)
            }
        };
        let gammas = match raw.gamma0_over_omega {
            None => Vec::new(),
            Some(OneOrMany::One(g)) => vec![g],
            Some(OneOrMany::Many(v)) => v,
        };
        let cfg = Self {
            model: raw.model,
            omega: raw.omega,
            gammas,
            f0: raw.f0,
            f1: raw.f1,
            theta_final: raw.theta_final,
            tau_scan,
            grid_points: raw.grid_points,
            seed: raw.seed,
            output_path: raw.output_path,
            spectral_source: raw.spectral_source,
            thermo: raw.thermo,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> anyhow::Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            bail!("omega must be positive, got {}", self.omega);
        }
        if self.f0 > 1 || self.f1 > 1 {
            bail!("f0 and f1 must be 0 or 1");
        }
        if !(0.0..PI / 2.0).contains(&self.theta_final) {
            bail!(
                "theta_final must lie in [0, pi/2), got {}",
                self.theta_final
            );
        }
        if self.grid_points < 51 {
            bail!("grid_points must be at least 51, got {}", self.grid_points);
        }
        if let Some(&g) = self.gammas.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            bail!("gamma0_over_omega entries must be non-negative, got {g}");
        }
        if self.tau_scan.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            bail!("tau_scan entries must be positive");
        }
        if self.tau_scan.windows(2).any(|w| w[1] <= w[0]) {
            bail!("tau_scan must be strictly ascending");
        }
        if let Some(t) = &self.thermo {
            if !(t.beta.is_finite() && t.beta >= 0.0) {
                bail!("thermo.beta must be non-negative");
            }
            if !(t.horizon.is_finite() && t.horizon > 0.0) || t.points < 2 {
                bail!("thermo.horizon must be positive and thermo.points at least 2");
            }
            if !(t.relax_rate.is_finite() && t.relax_rate > 0.0) {
                bail!("thermo.relax_rate must be positive");
            }
        }
        Ok(())
    }

    /// Checks shared by the commands that scan `gamma0` and `omega tau`.
    pub fn require_scan(&self, needs_tau: bool) -> anyhow::Result<()> {
        if self.model == ModelKind::Thermo {
            bail!("model = \"thermo\" only supports the thermo command");
        }
        if self.gammas.is_empty() {
            bail!("gamma0_over_omega is missing or empty");
        }
        if needs_tau && self.tau_scan.is_empty() {
            bail!("tau_scan is missing or empty");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_form_expands() {
        let c = ExperimentConfig::parse(
            "model = \"deutsch\"\ngamma0_over_omega = 0.1\ntau_scan = { start = 1.0, stop = 5.0, points = 5 }\n",
        )
        .unwrap();
        assert_eq!(c.tau_scan, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(c.gammas, vec![0.1]);
        assert_eq!(c.grid_points, 401);
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "model = \"deutsch\"\ntau_scan = [3.0, 2.0]\n",
            "model = \"deutsch\"\ngrid_points = 10\n",
            "model = \"deutsch\"\ntypo = 1\n",
            "model = \"qaoa\"\n",
        ] {
            assert!(ExperimentConfig::parse(text).is_err(), "{text}");
        }
    }
}
