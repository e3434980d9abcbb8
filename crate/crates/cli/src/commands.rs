use oqs_adiabatic::adiabatic_conditions::{xi_max, AdiabaticityReport, ConditionOptions};
use oqs_adiabatic::evolution::{infidelity, solve_master, SolverOptions};
use oqs_adiabatic::hilbert_schmidt::{pauli_basis, vectorize};
use oqs_adiabatic::linalg::{sigma_x, sigma_z};
use oqs_adiabatic::models::*;
use oqs_adiabatic::quadrature::linspace;
use oqs_adiabatic::spectral::{left_right_residual, track_spectrum, TrackOptions};
use oqs_adiabatic::thermo::{equilibrium_check, ThermoOptions};
use oqs_adiabatic::{CMatrix, CVector, Complex64, LindbladModel, SpectralTrajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ModelKind, SpectralSource};
use crate::table::{num, status, Row, Table};

type Outcome<T> = std::result::Result<T, String>;

/// Model-specific pieces for one value of `gamma0 / omega` and `tau`.
struct Instance {
    model: LindbladModel,
    rho0: CMatrix,
    target: CMatrix,
}

fn instance(cfg: &ExperimentConfig, g: f64, tau: f64) -> oqs_adiabatic::Result<Instance> {
    match cfg.model {
        ModelKind::Deutsch => {
            let p = deutsch_params(cfg, g, tau);
            Ok(Instance {
                model: deutsch_model(&p)?,
                rho0: deutsch_initial_state(),
                target: deutsch_target(&p),
            })
        }
        ModelKind::LandauZener => {
            let p = lz_params(cfg, g, tau);
            Ok(Instance {
                model: landau_zener_model(&p)?,
                rho0: landau_zener_initial_state(),
                target: landau_zener_target(&p),
            })
        }
        ModelKind::Thermo => unreachable!("rejected by require_scan"),
    }
}

fn deutsch_params(cfg: &ExperimentConfig, g: f64, tau: f64) -> DeutschParams {
    DeutschParams {
        omega: cfg.omega,
        gamma0: g * cfg.omega,
        f0: cfg.f0,
        f1: cfg.f1,
        tau,
    }
}

fn lz_params(cfg: &ExperimentConfig, g: f64, tau: f64) -> LandauZenerParams {
    LandauZenerParams::new(cfg.omega, cfg.theta_final, g * cfg.omega, tau)
}

fn grid(cfg: &ExperimentConfig) -> Vec<f64> {
    linspace(0.0, 1.0, cfg.grid_points)
}

/// Spectral path in `s` with unit horizon; conditions rescale by `tau`.
fn trajectory(
    cfg: &ExperimentConfig,
    g: f64,
    source: SpectralSource,
) -> oqs_adiabatic::Result<SpectralTrajectory> {
    match source {
        SpectralSource::Analytic => match cfg.model {
            ModelKind::Deutsch => deutsch_trajectory(&deutsch_params(cfg, g, 1.0), grid(cfg)),
            _ => landau_zener_trajectory(&lz_params(cfg, g, 1.0), grid(cfg)),
        },
        SpectralSource::Numeric => {
            let inst = instance(cfg, g, 1.0)?;
            track_spectrum(
                &inst.model,
                &pauli_basis(1),
                &grid(cfg),
                TrackOptions::default(),
            )
        }
    }
}

/// Blocks carrying weight in the initial state.
fn support(traj: &SpectralTrajectory, rho0: &CMatrix) -> oqs_adiabatic::Result<Vec<usize>> {
    let r0 = vectorize(rho0, &pauli_basis(1))?.components;
    let c = traj.bases[0].left_matrix() * r0;
    Ok((0..traj.num_blocks())
        .filter(|&b| {
            let o = traj.offset(b);
            (o..o + traj.block_len(b)).any(|i| c[i].norm() > 1e-12)
        })
        .collect())
}

fn relevant_maxima(report: &AdiabaticityReport) -> (f64, f64, f64) {
    report
        .pairs
        .iter()
        .filter(|p| p.relevant)
        .fold((0.0f64, 0.0f64, 0.0f64), |acc, p| {
            (
                acc.0.max(p.xi1_max),
                acc.1.max(p.xi2_max),
                acc.2.max(p.xi_max),
            )
        })
}

fn trajectories(cfg: &ExperimentConfig) -> Vec<Outcome<SpectralTrajectory>> {
    cfg.gammas
        .par_iter()
        .map(|&g| trajectory(cfg, g, cfg.spectral_source).map_err(|e| e.to_string()))
        .collect()
}

fn jobs(cfg: &ExperimentConfig) -> Vec<(usize, f64)> {
    (0..cfg.gammas.len())
        .flat_map(|i| cfg.tau_scan.iter().map(move |&wt| (i, wt)))
        .collect()
}

fn meta(cfg: &ExperimentConfig, g: f64) -> Vec<String> {
    vec![
        cfg.model.name().into(),
        num(g),
        num(cfg.omega),
        cfg.f0.to_string(),
        cfg.f1.to_string(),
        num(cfg.theta_final),
        cfg.grid_points.to_string(),
    ]
}

const META: [&str; 7] = [
    "model",
    "gamma0_over_omega",
    "omega",
    "f0",
    "f1",
    "theta_final",
    "grid_points",
];

fn header(extra: &[&str]) -> Table {
    let cols: Vec<&str> = META.iter().chain(extra).copied().collect();
    Table::new(&cols)
}

pub fn sweep(cfg: &ExperimentConfig) -> Table {
    let mut table = header(&[
        "omega_tau",
        "infidelity",
        "xi1_max",
        "xi2_max",
        "xi_max",
        "status",
    ]);
    let trajs = trajectories(cfg);
    let basis = pauli_basis(1);
    table.rows = jobs(cfg)
        .par_iter()
        .map(|&(i, wt)| {
            let g = cfg.gammas[i];
            let tau = wt / cfg.omega;
            let run = || -> Outcome<(f64, (f64, f64, f64))> {
                let inst = instance(cfg, g, tau).map_err(|e| e.to_string())?;
                let sol = solve_master(
                    &inst.model,
                    &basis,
                    &inst.rho0,
                    &[0.0, tau],
                    SolverOptions::default(),
                )
                .map_err(|e| e.to_string())?;
                let rho = sol.state(1, &basis).map_err(|e| e.to_string())?;
                let rho = (&rho + rho.adjoint()).scale(0.5);
                let inf = infidelity(&rho, &inst.target).map_err(|e| e.to_string())?;
                let traj = trajs[i].as_ref().map_err(|e| format!("spectrum: {e}"))?;
                let opts = ConditionOptions {
                    support: Some(support(traj, &inst.rho0).map_err(|e| e.to_string())?),
                    ..Default::default()
                };
                let report = xi_max(traj, tau, &opts).map_err(|e| e.to_string())?;
                Ok((inf, relevant_maxima(&report)))
            };
            let result = run();
            let ok = result.is_ok();
            let (inf, (x1, x2, x)) = result
                .clone()
                .unwrap_or((f64::NAN, (f64::NAN, f64::NAN, f64::NAN)));
            let mut cells = meta(cfg, g);
            cells.extend([
                num(wt),
                num(inf),
                num(x1),
                num(x2),
                num(x),
                status(&result.map(|_| ())),
            ]);
            Row { ok, cells }
        })
        .collect();
    table
}

pub fn conditions(cfg: &ExperimentConfig) -> Table {
    let mut table = header(&[
        "omega_tau",
        "alpha",
        "beta",
        "k",
        "xi1_max",
        "xi2_max",
        "xi_max",
        "g_max",
        "relevant",
        "status",
    ]);
    let trajs = trajectories(cfg);
    let per_job: Vec<Vec<Row>> = jobs(cfg)
        .par_iter()
        .map(|&(i, wt)| {
            let g = cfg.gammas[i];
            let tau = wt / cfg.omega;
            let failed = |e: String| {
                let mut cells = meta(cfg, g);
                cells.extend([num(wt), String::new(), String::new(), String::new()]);
                cells.extend([f64::NAN; 4].map(num));
                cells.extend([String::new(), status(&Err(e))]);
                vec![Row { cells, ok: false }]
            };
            let traj = match &trajs[i] {
                Ok(t) => t,
                Err(e) => return failed(format!("spectrum: {e}")),
            };
            let inst = match instance(cfg, g, tau) {
                Ok(x) => x,
                Err(e) => return failed(e.to_string()),
            };
            let opts = ConditionOptions {
                support: support(traj, &inst.rho0).ok(),
                with_oracle: true,
                ..Default::default()
            };
            let report = match xi_max(traj, tau, &opts) {
                Ok(r) => r,
                Err(e) => return failed(e.to_string()),
            };
            let mut rows: Vec<Row> = report
                .pairs
                .iter()
                .map(|p| {
                    let mut cells = meta(cfg, g);
                    cells.extend([
                        num(wt),
                        p.alpha.to_string(),
                        p.beta.to_string(),
                        p.k.to_string(),
                        num(p.xi1_max),
                        num(p.xi2_max),
                        num(p.xi_max),
                        num(p.g_max.unwrap_or(f64::NAN)),
                        p.relevant.to_string(),
                        "ok".into(),
                    ]);
                    Row { cells, ok: true }
                })
                .collect();
            for ex in &report.excluded {
                let mut cells = meta(cfg, g);
                cells.extend([
                    num(wt),
                    ex.alpha.to_string(),
                    ex.beta.to_string(),
                    "0".into(),
                ]);
                cells.extend([f64::NAN; 4].map(num));
                let first = ex.s.first().copied().unwrap_or(f64::NAN);
                cells.extend([
                    String::new(),
                    format!(
                        "excluded: gap vanishes at {} grid points from s = {first}",
                        ex.s.len()
                    ),
                ]);
                rows.push(Row { cells, ok: true });
            }
            rows
        })
        .collect();
    table.rows = per_job.into_iter().flatten().collect();
    table
}

/// Mixing seed and row index so parallel rows draw independent streams.
fn row_rng(seed: u64, row: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row as u64);
    rng
}

pub fn spectrum(cfg: &ExperimentConfig) -> Table {
    let n = 4;
    let mut cols: Vec<String> = vec!["s".into(), "block_sizes".into()];
    for i in 0..n {
        cols.push(format!("lambda{i}_re"));
        cols.push(format!("lambda{i}_im"));
    }
    cols.extend(["residual".into(), "random_residual".into(), "status".into()]);
    let extra: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut table = header(&extra);
    let basis = pauli_basis(1);
    let per_gamma: Vec<Vec<Row>> = cfg
        .gammas
        .par_iter()
        .enumerate()
        .map(|(gi, &g)| {
            let traj = instance(cfg, g, 1.0).and_then(|inst| {
                track_spectrum(&inst.model, &basis, &grid(cfg), TrackOptions::default())
                    .map(|t| (inst, t))
            });
            let (inst, traj) = match traj {
                Ok(x) => x,
                Err(e) => {
                    let mut cells = meta(cfg, g);
                    cells.extend([String::new(), String::new()]);
                    cells.extend(std::iter::repeat_n(num(f64::NAN), 2 * n + 2));
                    cells.push(status(&Err(e.to_string())));
                    return vec![Row { cells, ok: false }];
                }
            };
            (0..traj.len())
                .map(|j| {
                    let s = traj.grid[j];
                    let b = &traj.bases[j];
                    let l = inst.model.superoperator(s, &basis).map(|x| x.matrix);
                    let mut cells = meta(cfg, g);
                    let sizes: Vec<String> = b.blocks.iter().map(|x| x.len().to_string()).collect();
                    cells.extend([num(s), sizes.join(";")]);
                    for blk in &b.blocks {
                        for _ in 0..blk.len() {
                            cells.extend([num(blk.eigenvalue.re), num(blk.eigenvalue.im)]);
                        }
                    }
                    match l {
                        Ok(l) => {
                            let scale = l.norm().max(f64::MIN_POSITIVE);
                            let mut rng = row_rng(cfg.seed, gi * traj.len() + j);
                            let x = CVector::from_fn(n, |_, _| {
                                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                            });
                            let rebuilt = b.right_matrix() * b.jordan_matrix() * b.left_matrix();
                            let rr = (&l * &x - rebuilt * &x).norm() / (x.norm() * scale);
                            cells.extend([num(left_right_residual(&l, b)), num(rr), "ok".into()]);
                            Row { cells, ok: true }
                        }
                        Err(e) => {
                            cells.extend([
                                num(f64::NAN),
                                num(f64::NAN),
                                status(&Err(e.to_string())),
                            ]);
                            Row { cells, ok: false }
                        }
                    }
                })
                .collect()
        })
        .collect();
    table.rows = per_gamma.into_iter().flatten().collect();
    table
}

pub fn thermo(cfg: &ExperimentConfig) -> anyhow::Result<Table> {
    let Some(t) = cfg.thermo.clone() else {
        anyhow::bail!("the thermo command needs a [thermo] section");
    };
    let mut table = Table::new(&[
        "model",
        "beta",
        "omega_start",
        "omega_end",
        "transverse",
        "relax_rate",
        "t",
        "omega_t",
        "dq_rate",
        "ds_rate",
        "residual",
        "relative_residual",
        "status",
    ]);
    let omega_at = move |x: f64| t.omega_start + (t.omega_end - t.omega_start) * x / t.horizon;
    let h_path =
        move |x: f64| sigma_z().scale(0.5 * omega_at(x)) + sigma_x().scale(0.5 * t.transverse);
    let times = linspace(0.0, t.horizon, t.points);
    let prefix = |tt: f64| {
        vec![
            "thermo".to_string(),
            num(t.beta),
            num(t.omega_start),
            num(t.omega_end),
            num(t.transverse),
            num(t.relax_rate),
            num(tt),
            num(omega_at(tt)),
        ]
    };
    match equilibrium_check(
        h_path,
        &pauli_basis(1),
        t.beta,
        &times,
        ThermoOptions {
            relax_rate: t.relax_rate,
        },
    ) {
        Ok(report) => {
            for smp in &report.samples {
                let mut cells = prefix(smp.t);
                cells.extend([
                    num(smp.dq_rate),
                    num(smp.ds_rate),
                    num(smp.residual),
                    num(report.relative_residual),
                    "ok".into(),
                ]);
                table.rows.push(Row { cells, ok: true });
            }
        }
        Err(e) => {
            let mut cells = prefix(f64::NAN);
            cells.extend([f64::NAN; 4].map(num));
            cells.push(status(&Err(e.to_string())));
            table.rows.push(Row { cells, ok: false });
        }
    }
    Ok(table)
}
