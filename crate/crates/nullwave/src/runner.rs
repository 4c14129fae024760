//! Experiment driver: builds the grid and data a configuration describes,
//! executes the run, and reduces it to report rows plus a list of violated
//! invariants. Failures are collected rather than returned as errors so a
//! sweep always produces its full report before the exit code is decided.

use crate::cauchy::{self, CauchySource};
use crate::config::{build_grid, DataKind, ExperimentConfig, Problem};
use crate::datagen::{
    RandomCauchyData, RandomConeData, RandomConeWData, RandomPlaneData, RandomPlaneWData, ZeroData,
};
use crate::error::Result;
use crate::estimate::BalanceTally;
use crate::grid::{Geometry, GridSpec};
use crate::nullcone::{self, ConeSource, ConeWSource};
use crate::nullplane::{self, PlaneSource, PlaneWSource};
use crate::oracle::{CauchyWave, DipoleWave, IngoingPulse, PlaneWave, Profile};
use crate::report::{ConvergenceRow, ReportRow};
use std::f64::consts::TAU;

pub struct RunOutcome {
    pub row: ReportRow,
    /// violated invariants; empty on a clean run
    pub failures: Vec<String>,
    /// refinement metric: balance-defect magnitude, or the worst
    /// constraint residual for Cauchy runs
    pub metric: f64,
}

/// Margin undershoot allowed at a given resolution. The balance defect is
/// second order in the spacings relative to the data scale; the floor
/// covers identically-zero data.
pub fn margin_tolerance(cfg: &ExperimentConfig, grid: &GridSpec, scale: f64) -> f64 {
    let h = grid.max_spacing().max(grid.du());
    cfg.tol_margin * h * h * scale + 1e-12
}

/// Transverse travelling wave on the lowest x harmonic of the slab.
pub fn plane_oracle(cfg: &ExperimentConfig) -> PlaneWave {
    PlaneWave { kx: TAU / cfg.lx, ky: 0.0, kz: 0.0, amp: 1.0 }
}

/// Radial pulse centred so the wedge sees its full support.
pub fn cone_pulse(cfg: &ExperimentConfig) -> IngoingPulse {
    IngoingPulse {
        profile: Profile::Gaussian {
            amp: 1.0,
            center: 2.0 * cfg.r0 + 0.6 * cfg.t_final,
            width: 0.35 * cfg.t_final,
        },
    }
}

/// Axis-symmetric dipole with its burst inside the run window.
pub fn cone_dipole(cfg: &ExperimentConfig) -> DipoleWave {
    DipoleWave {
        profile: Profile::Gaussian {
            amp: 1.0,
            center: 0.44 * cfg.t_final,
            width: 0.22 * cfg.t_final,
        },
        tilted: false,
    }
}

pub fn cauchy_oracle(cfg: &ExperimentConfig) -> CauchyWave {
    CauchyWave { k: [TAU / cfg.lx, 0.0, TAU / cfg.lz], amp: 1.0 }
}

fn tally_row(
    cfg: &ExperimentConfig,
    grid: &GridSpec,
    seed: u64,
    problem: &'static str,
    tally: &BalanceTally,
    c: f64,
) -> ReportRow {
    ReportRow {
        problem,
        n: [grid.n_march, cfg.n[1], cfg.n[2], cfg.n[3]],
        order: cfg.order,
        t_final: grid.t_final,
        lhs_norm: tally.norm_final,
        data_norm_char: tally.flux_initial,
        data_norm_transverse: tally.flux_bound_in,
        volume_source: tally.volume,
        rhs_bound: tally.estimate_rhs(),
        margin: tally.margin(),
        balance_residual: tally.residual(),
        c,
        ct: c * grid.t_final,
        seed,
    }
}

fn check_margin(
    cfg: &ExperimentConfig,
    grid: &GridSpec,
    tally: &BalanceTally,
    failures: &mut Vec<String>,
) {
    let scale = tally.flux_initial + 2.0 * tally.flux_bound_in;
    let tol = margin_tolerance(cfg, grid, scale);
    if tally.margin() < -tol {
        failures.push(format!(
            "estimate margin {:.6e} fell below the -{:.3e} allowance",
            tally.margin(),
            tol
        ));
    }
}

/// Run the configured problem once with the given seed (random data only
/// consults the seed; the other kinds ignore it).
pub fn single_run(cfg: &ExperimentConfig, seed: u64) -> Result<RunOutcome> {
    let grid = build_grid(cfg)?;
    let mut failures = Vec::new();

    let (row, metric) = match cfg.problem {
        Problem::NullPlane => {
            let src: Box<dyn PlaneSource> = match cfg.data {
                DataKind::Zero => Box::new(ZeroData),
                DataKind::Random => {
                    Box::new(RandomPlaneData::new(seed, cfg.lx, cfg.ly, cfg.t_final))
                }
                DataKind::Oracle => Box::new(plane_oracle(cfg)),
                DataKind::Dipole => unreachable!("dipole data is cone-only"),
            };
            let run = nullplane::run_scalar(&grid, src.as_ref())?;
            check_margin(cfg, &grid, &run.tally, &mut failures);
            (
                tally_row(cfg, &grid, seed, "nullplane", &run.tally, 0.0),
                run.tally.residual().abs(),
            )
        }
        Problem::NullPlaneDeriv => {
            let src: Box<dyn PlaneWSource> = match cfg.data {
                DataKind::Zero => Box::new(ZeroData),
                DataKind::Random => {
                    Box::new(RandomPlaneWData::new(seed, cfg.lx, cfg.ly, cfg.t_final))
                }
                DataKind::Oracle => Box::new(plane_oracle(cfg)),
                DataKind::Dipole => unreachable!("dipole data is cone-only"),
            };
            let run = nullplane::run_derivative(&grid, src.as_ref())?;
            check_margin(cfg, &grid, &run.tally, &mut failures);
            (
                tally_row(cfg, &grid, seed, "nullplane_deriv", &run.tally, 0.0),
                run.tally.residual().abs(),
            )
        }
        Problem::NullCone => {
            let src: Box<dyn ConeSource> = match cfg.data {
                DataKind::Zero => Box::new(ZeroData),
                DataKind::Random => {
                    Box::new(RandomConeData::new(seed, cfg.r0, cfg.r0 + cfg.t_final))
                }
                DataKind::Oracle => Box::new(cone_pulse(cfg)),
                DataKind::Dipole => Box::new(cone_dipole(cfg)),
            };
            let run = nullcone::run_scalar(&grid, src.as_ref())?;
            check_margin(cfg, &grid, &run.tally, &mut failures);
            if run.volume_integrand_max > 0.0 {
                failures.push(format!(
                    "dissipative volume integrand reached {:+.6e}",
                    run.volume_integrand_max
                ));
            }
            (
                tally_row(cfg, &grid, seed, "nullcone", &run.tally, 0.0),
                run.tally.residual().abs(),
            )
        }
        Problem::NullConeDeriv => {
            let src: Box<dyn ConeWSource> = match cfg.data {
                DataKind::Zero => Box::new(ZeroData),
                DataKind::Random => {
                    Box::new(RandomConeWData::new(seed, cfg.r0, cfg.r0 + cfg.t_final))
                }
                DataKind::Oracle => Box::new(cone_pulse(cfg)),
                DataKind::Dipole => Box::new(cone_dipole(cfg)),
            };
            let run = nullcone::run_derivative(&grid, src.as_ref())?;
            check_margin(cfg, &grid, &run.tally, &mut failures);
            (
                tally_row(cfg, &grid, seed, "nullcone_deriv", &run.tally, run.bound),
                run.tally.residual().abs(),
            )
        }
        Problem::Cauchy => {
            let src: Box<dyn CauchySource> = match cfg.data {
                DataKind::Zero => Box::new(ZeroData),
                DataKind::Random => {
                    Box::new(RandomCauchyData::new(seed, cfg.lx, cfg.ly, cfg.lz))
                }
                DataKind::Oracle => Box::new(cauchy_oracle(cfg)),
                DataKind::Dipole => unreachable!("dipole data is cone-only"),
            };
            let run = cauchy::run_cauchy(&grid, src.as_ref())?;
            let norm0 = run.norm_series[0];
            let norm_t = *run.norm_series.last().expect("series never empty");
            // growth allowance e^t with unit constant from the
            // undifferentiated term; conservation quality is reported
            // separately as the balance residual
            let bound = grid.t_final.exp() * norm0;
            let tol = margin_tolerance(cfg, &grid, norm0);
            if norm_t > bound + tol {
                failures.push(format!(
                    "norm {:.6e} broke the growth bound {:.6e}",
                    norm_t, bound
                ));
            }
            for (k, name) in ["x", "y", "z"].iter().enumerate() {
                if run.constraints_final[k] > 10.0 * run.constraints_initial[k] + 1e-12 {
                    failures.push(format!(
                        "{name}-constraint grew from {:.3e} to {:.3e}",
                        run.constraints_initial[k], run.constraints_final[k]
                    ));
                }
            }
            let row = ReportRow {
                problem: "cauchy",
                n: [grid.n_march, cfg.n[1], cfg.n[2], cfg.n[3]],
                order: cfg.order,
                t_final: grid.t_final,
                lhs_norm: norm_t,
                data_norm_char: norm0,
                data_norm_transverse: 0.0,
                volume_source: 0.0,
                rhs_bound: bound,
                margin: bound - norm_t,
                balance_residual: norm_t - norm0,
                c: 1.0,
                ct: grid.t_final,
                seed,
            };
            let worst = run
                .constraints_final
                .iter()
                .fold(0.0_f64, |a, &b| a.max(b));
            (row, worst)
        }
    };

    Ok(RunOutcome { row, failures, metric })
}

/// `count` runs over consecutive seeds starting at the configured one.
pub fn sweep(cfg: &ExperimentConfig) -> Result<(Vec<ReportRow>, Vec<String>)> {
    let mut rows = Vec::with_capacity(cfg.count);
    let mut failures = Vec::new();
    for k in 0..cfg.count {
        let seed = cfg.seed + k as u64;
        let out = single_run(cfg, seed)?;
        for f in out.failures {
            failures.push(format!("run {k} (seed {seed}): {f}"));
        }
        rows.push(out.row);
    }
    Ok((rows, failures))
}

pub struct StudyOutcome {
    pub levels: Vec<ConvergenceRow>,
    pub rows: Vec<ReportRow>,
    pub failures: Vec<String>,
}

/// Scale every axis with the level, keeping the configured aspect ratio
/// anchored on the slab axis. An automatic step count stays automatic.
fn level_shape(cfg: &ExperimentConfig, n: usize) -> [usize; 4] {
    let base = cfg.n[1];
    let scaled = |a: usize| ((a * n + base / 2) / base).max(2);
    [
        if cfg.n[0] == 0 { 0 } else { scaled(cfg.n[0]) },
        n,
        scaled(cfg.n[2]),
        scaled(cfg.n[3]),
    ]
}

/// One run per refinement level; consecutive metric ratios must land in
/// the configured window.
pub fn refinement_study(cfg: &ExperimentConfig) -> Result<StudyOutcome> {
    let mut levels = Vec::new();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &n in &cfg.levels {
        let mut scaled = cfg.clone();
        scaled.n = level_shape(cfg, n);
        let out = single_run(&scaled, cfg.seed)?;
        levels.push(ConvergenceRow { resolution: n, residual: out.metric });
        rows.push(out.row);
        failures.extend(out.failures);
    }
    for w in levels.windows(2) {
        let ratio = w[0].residual / w[1].residual;
        if !(ratio >= cfg.ratio_lo && ratio <= cfg.ratio_hi) {
            failures.push(format!(
                "residual ratio {:.3} from N = {} to N = {} is outside [{}, {}]",
                ratio, w[0].resolution, w[1].resolution, cfg.ratio_lo, cfg.ratio_hi
            ));
        }
    }
    Ok(StudyOutcome { levels, rows, failures })
}

/// Coupling bound of the configured cone. The maximum sits on the inner
/// tube, so the duration never enters.
pub fn coupling_bound(cfg: &ExperimentConfig) -> Result<f64> {
    let probe = GridSpec::new(
        Geometry::Cone { r0: cfg.r0 },
        cfg.t_final,
        [cfg.n[1], cfg.n[2], cfg.n[3]],
        None,
        cfg.order,
        cfg.cfl,
        cfg.dissipation,
    )?;
    Ok(nullcone::dtilde_bound(&probe))
}

/// Shrink the duration until the growth exponent c T stays at or below
/// one half; returns the bound c.
pub fn cap_duration(cfg: &mut ExperimentConfig) -> Result<f64> {
    let c = coupling_bound(cfg)?;
    if c * cfg.t_final > 0.5 {
        cfg.t_final = 0.5 / c;
    }
    Ok(c)
}

/// The derivative-system counterpart of a scalar problem.
pub fn to_derivative(p: Problem) -> Option<Problem> {
    match p {
        Problem::NullPlane | Problem::NullPlaneDeriv => Some(Problem::NullPlaneDeriv),
        Problem::NullCone | Problem::NullConeDeriv => Some(Problem::NullConeDeriv),
        Problem::Cauchy => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn cfg_of(sets: &[&str]) -> ExperimentConfig {
        let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
        parse_config(None, &sets).unwrap()
    }

    #[test]
    fn zero_plane_run_is_all_zero() {
        let cfg = cfg_of(&["data=zero", "n_z=8", "n_x=8", "n_y=8", "t_final=0.5"]);
        let out = single_run(&cfg, 1).unwrap();
        assert!(out.failures.is_empty(), "{:?}", out.failures);
        assert_eq!(out.row.lhs_norm, 0.0);
        assert_eq!(out.row.margin, 0.0);
        assert_eq!(out.metric, 0.0);
    }

    #[test]
    fn random_runs_hold_their_margins() {
        for problem in ["nullplane", "nullplane_deriv", "nullcone", "nullcone_deriv"] {
            let cfg = cfg_of(&[
                &format!("problem={problem}"),
                "n_z=8",
                "n_x=8",
                "n_y=8",
                "t_final=0.5",
            ]);
            let out = single_run(&cfg, 3).unwrap();
            assert!(out.failures.is_empty(), "{problem}: {:?}", out.failures);
            assert!(out.row.lhs_norm > 0.0, "{problem} produced an empty run");
            assert!(out.row.margin > 0.0, "{problem} margin = {}", out.row.margin);
        }
    }

    #[test]
    fn cauchy_random_run_is_clean() {
        let cfg = cfg_of(&["problem=cauchy", "t_final=0.5"]);
        let out = single_run(&cfg, 5).unwrap();
        assert!(out.failures.is_empty(), "{:?}", out.failures);
        assert!(out.row.margin > 0.0, "margin {}", out.row.margin);
        assert!(out.metric > 0.0 && out.metric < 1.0, "constraint {}", out.metric);
    }

    #[test]
    fn cauchy_constraint_metric_converges() {
        let mut residuals = Vec::new();
        for n in [8, 16] {
            let cfg = cfg_of(&[
                "problem=cauchy",
                "data=oracle",
                &format!("n_z={n}"),
                &format!("n_x={n}"),
                &format!("n_y={n}"),
                "t_final=0.5",
            ]);
            residuals.push(single_run(&cfg, 1).unwrap().metric);
        }
        let ratio = residuals[0] / residuals[1];
        assert!(ratio > 2.8 && ratio < 5.5, "ratio {ratio} from {residuals:?}");
    }

    #[test]
    fn plane_oracle_study_converges() {
        let cfg = cfg_of(&["data=oracle", "levels=16,32", "t_final=0.5"]);
        let study = refinement_study(&cfg).unwrap();
        assert!(study.failures.is_empty(), "{:?}", study.failures);
        let ratio = study.levels[0].residual / study.levels[1].residual;
        assert!(ratio > 2.8 && ratio < 5.2, "ratio {ratio}");
    }

    #[test]
    fn sweep_reports_every_seed() {
        let cfg = cfg_of(&["count=3", "seed=11", "n_z=8", "n_x=8", "n_y=8", "t_final=0.5"]);
        let (rows, failures) = sweep(&cfg).unwrap();
        assert!(failures.is_empty(), "{failures:?}");
        let seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, vec![11, 12, 13]);
        assert!(rows.windows(2).all(|w| w[0].lhs_norm != w[1].lhs_norm));
    }

    #[test]
    fn level_shape_keeps_aspect() {
        let cfg = cfg_of(&["problem=nullcone", "n_r=16", "n_s=12", "n_phi=12"]);
        assert_eq!(level_shape(&cfg, 32), [0, 32, 24, 24]);
        let explicit = cfg_of(&["n_u=32", "n_z=16"]);
        assert_eq!(level_shape(&explicit, 32), [64, 32, 32, 32]);
    }

    #[test]
    fn capped_duration_bounds_the_exponent() {
        let mut cfg = cfg_of(&["problem=nullcone_deriv", "n_r=16", "n_s=12", "n_phi=12"]);
        let c = cap_duration(&mut cfg).unwrap();
        assert!((c - 33.0 / 23.0_f64.sqrt()).abs() < 1e-12);
        assert!(c * cfg.t_final <= 0.5 + 1e-12);
        let out = single_run(&cfg, 2).unwrap();
        assert!(out.failures.is_empty(), "{:?}", out.failures);
        assert!((out.row.ct - c * cfg.t_final).abs() < 1e-12);
    }
}
