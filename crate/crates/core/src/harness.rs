//! Experiment orchestration: initial data, coupled and limit runs, epsilon
//! sweeps and their outputs.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, InitialProfile};
use crate::entropy::{
    entropy_inequality_audit, entropy_report, maxwellian_relative_entropy, moment_state,
    relative_pressure, relative_pressure_tilde, AuditRecord, EntropyReport,
};
use crate::error::{Error, Result};
use crate::fluid::{ns_step_exchange, sound_speed};
use crate::grid::{FluidState, KineticState, PhaseGrid, TwoPhaseState};
use crate::io::{self, ConvergenceRow, StateFile};
use crate::kinetic::kinetic_step;
use crate::limit::{
    picard_solve, to_symhyp, two_phase_step_report, IterationReport, PicardConfig,
};
use crate::moments::{compute_moments, maxwellian, maxwellian_norm};

/// Macroscopic initial fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileFields {
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub n: Vec<f64>,
    pub v: Vec<f64>,
}

fn wave_rho(s: f64) -> f64 {
    1.0 + 0.1 * (PI * s).sin().powi(2)
}

fn wave_u(s: f64) -> f64 {
    if (s - 0.5).abs() < 0.25 {
        0.1 * (2.0 * PI * (s - 0.5)).cos().powi(2)
    } else {
        0.0
    }
}

/// Largest `|u|, |v|` allowed at a wall for the order-zero compatibility
/// check of file-supplied data, after quadratic extrapolation from the first
/// three cells.
pub const CUSTOM_WALL_TOLERANCE: f64 = 1e-4;

fn wall_extrapolate(f: &[f64]) -> (f64, f64) {
    let k = f.len();
    if k < 3 {
        return (f[0], f[k - 1]);
    }
    // quadratic through the centres at 1/2, 3/2, 5/2 cell widths, evaluated at 0
    let left = (15.0 * f[0] - 10.0 * f[1] + 3.0 * f[2]) / 8.0;
    let right = (15.0 * f[k - 1] - 10.0 * f[k - 2] + 3.0 * f[k - 3]) / 8.0;
    (left, right)
}

pub fn profile_fields(cfg: &ExperimentConfig, grid: &PhaseGrid) -> Result<ProfileFields> {
    let nx = grid.nx;
    let s: Vec<f64> = grid
        .x_centers()
        .iter()
        .map(|x| (x - grid.x_lo) / grid.length())
        .collect();
    let fields = match &cfg.initial_profile {
        InitialProfile::Equilibrium => ProfileFields {
            rho: vec![1.0; nx],
            u: vec![0.0; nx],
            n: vec![1.0; nx],
            v: vec![0.0; nx],
        },
        InitialProfile::LocalMaxwellianWave => {
            for w in [0.0, 1.0] {
                if wave_u(w) != 0.0 {
                    return Err(Error::Config("wave profile violates u = 0 at a wall".into()));
                }
            }
            ProfileFields {
                rho: s.iter().map(|&s| wave_rho(s)).collect(),
                u: s.iter().map(|&s| wave_u(s)).collect(),
                n: vec![1.0; nx],
                v: vec![0.0; nx],
            }
        }
        InitialProfile::Custom { path } => {
            let st = io::read_state(path)?;
            let get = |name: &str| -> Result<Vec<f64>> {
                let f = st
                    .get(name)
                    .ok_or_else(|| Error::Config(format!("{} lacks field {name}", path.display())))?;
                if f.len() != nx {
                    return Err(Error::Config(format!(
                        "field {name} has {} cells, grid has {nx}",
                        f.len()
                    )));
                }
                Ok(f.to_vec())
            };
            let p = ProfileFields {
                rho: get("rho")?,
                u: get("u")?,
                n: get("n")?,
                v: get("v")?,
            };
            for (name, f) in [("u", &p.u), ("v", &p.v)] {
                let (l, r) = wall_extrapolate(f);
                if l.abs().max(r.abs()) > CUSTOM_WALL_TOLERANCE {
                    return Err(Error::Config(format!(
                        "custom {name} does not vanish at the walls ({l:e}, {r:e})"
                    )));
                }
            }
            p
        }
    };
    if fields.rho.iter().chain(&fields.n).any(|&x| !(x > 0.0)) {
        return Err(Error::Config("initial densities must be positive".into()));
    }
    Ok(fields)
}

/// Initial data of both systems, built so the coupled data sit exactly on
/// the local Maxwellian of the limit data.
#[derive(Debug, Clone)]
pub struct WellPrepared {
    pub kinetic: KineticState,
    pub fluid: FluidState,
    pub limit: TwoPhaseState,
    /// Entropy gap with the kinetic entropy taken literally; for Maxwellian
    /// data this is `-(d/2) log(2 pi) * mass` plus quadrature error.
    pub h1_literal: f64,
    /// Entropy gap after adding the Maxwellian normalization
    /// `(d/2) log(2 pi) rho` to the macroscopic side.
    pub h1_residual: f64,
    /// Velocity and relative-pressure gap between the moments of the kinetic
    /// data and the limit data.
    pub h2_residual: f64,
}

pub fn make_well_prepared(cfg: &ExperimentConfig) -> Result<WellPrepared> {
    let grid = cfg.grid()?;
    let p = profile_fields(cfg, &grid)?;
    let kinetic = maxwellian(&p.rho, &p.u, &grid);
    let fluid = FluidState::new(p.n.clone(), p.v.clone(), cfg.gamma)?;
    let limit = TwoPhaseState::new(p.rho.clone(), p.u.clone(), fluid.clone())?;
    let s = cfg.scaling(cfg.eps_list[0])?;

    let mut kin = 0.0;
    for i in 0..grid.nx {
        for (j, &fj) in kinetic.column(&grid, i).iter().enumerate() {
            if fj > 0.0 {
                kin += fj * (1.0 + fj.ln() + 0.5 * grid.xi(j).powi(2));
            }
        }
    }
    kin *= grid.dx * grid.dv;
    let mac = grid.quad_x(
        &(0..grid.nx)
            .map(|i| p.rho[i] * (1.0 + p.rho[i].ln() + 0.5 * p.u[i] * p.u[i]))
            .collect::<Vec<_>>(),
    );
    let h1_literal = kin - mac;
    let h1_residual = h1_literal - maxwellian_norm(grid.dim).ln() * grid.quad_x(&p.rho);

    let m = compute_moments(&kinetic, &grid, &s);
    let mut h2 = 0.0;
    for i in 0..grid.nx {
        h2 += m.rho[i] * (m.u[i] - p.u[i]).powi(2)
            + relative_pressure(m.rho[i], p.rho[i])?
            + relative_pressure_tilde(p.n[i], p.n[i], cfg.gamma)?;
    }
    Ok(WellPrepared {
        kinetic,
        fluid,
        limit,
        h1_literal,
        h1_residual,
        h2_residual: h2 * grid.dx,
    })
}

/// Fixed time stepping shared by every run of one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
    /// Steps between consecutive samples.
    pub stride: usize,
}

impl TimeGrid {
    pub fn samples(&self) -> usize {
        self.steps / self.stride
    }
}

/// Derive `dt` from the CFL limits of every substep at the initial data,
/// shrunk so that an integer number of steps fits each sampling interval.
pub fn time_grid(cfg: &ExperimentConfig, wp: &WellPrepared) -> Result<TimeGrid> {
    let grid = cfg.grid()?;
    let raw = match cfg.dt {
        Some(dt) => dt,
        None => {
            let fl = &wp.fluid;
            let vmax = fl.v.iter().chain(&wp.limit.u).fold(0.0f64, |a, b| a.max(b.abs()));
            let cmax = fl.n.iter().map(|&n| sound_speed(n, fl.gamma)).fold(0.0, f64::max);
            // headroom for speeds growing during the run
            let transport = grid.dx / grid.xi(grid.nv - 1);
            let drag = grid.dv / (grid.v_max + vmax + 1.0);
            let fluid = grid.dx / (1.25 * (vmax + cmax));
            let euler = grid.dx / (1.25 * (vmax + 1.0));
            cfg.cfl * transport.min(drag).min(fluid).min(euler)
        }
    };
    let interval = cfg.t_final / cfg.samples as f64;
    let stride = (interval / raw).ceil().max(1.0) as usize;
    Ok(TimeGrid {
        dt: interval / stride as f64,
        steps: stride * cfg.samples,
        stride,
    })
}

/// Mass and flux bookkeeping of a coupled run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledBooks {
    pub kinetic_mass0: f64,
    pub kinetic_mass: f64,
    pub fluid_mass0: f64,
    pub fluid_mass: f64,
    /// Largest per-step `|mass_after - mass_before + boundary_flux|`.
    pub max_step_defect: f64,
    /// Largest instantaneous wall mass flux seen at either wall.
    pub max_wall_flux: f64,
    /// Largest `|dP_kinetic + dP_fluid|` of a drag substep.
    pub max_exchange_defect: f64,
    pub max_truncation_leak: f64,
}

#[derive(Debug, Clone)]
pub struct CoupledRun {
    pub eps: f64,
    pub time: TimeGrid,
    pub reports: Vec<EntropyReport>,
    /// Per sample `int |rho_eps - rho|`, `int |n_eps - n|` against the limit.
    pub l1_rho: Vec<f64>,
    pub l1_n: Vec<f64>,
    pub audit: AuditRecord,
    pub books: CoupledBooks,
    /// `int int |f(T) - M_{rho, u}(T)|` with the limit moments, when given.
    pub f_to_m_l1: Option<f64>,
    pub min_ck_margin: f64,
    pub h1_residual: f64,
    pub h2_residual: f64,
    pub kinetic: KineticState,
    pub fluid: FluidState,
}

fn solver_error(step: usize, err: Error, dump: Option<PathBuf>) -> Error {
    Error::Solver {
        step,
        dump,
        source: Box::new(err),
    }
}

fn dump_coupled(dir: Option<&Path>, step: usize, f: &KineticState, fl: &FluidState, grid: &PhaseGrid) -> Option<PathBuf> {
    let dir = dir?;
    let path = dir.join(format!("failure_step{step}_kinetic.bin"));
    write_kinetic(&path, f, grid).ok()?;
    write_fluid(&dir.join(format!("failure_step{step}_fluid.bin")), fl).ok()?;
    Some(path)
}

/// Coupled kinetic-fluid run for one `eps`. When `limit` is given, its
/// samples must share this configuration's time grid.
pub fn run_coupled(
    cfg: &ExperimentConfig,
    eps: f64,
    limit: Option<&LimitRun>,
    dump_dir: Option<&Path>,
) -> Result<CoupledRun> {
    let grid = cfg.grid()?;
    let s = cfg.scaling(eps)?;
    let bc = cfg.boundary_kernel(&grid)?;
    let wp = make_well_prepared(cfg)?;
    let time = time_grid(cfg, &wp)?;
    if let Some(l) = limit {
        if l.time != time || l.samples.len() != time.samples() + 1 {
            return Err(Error::Argument("limit run uses a different time grid".into()));
        }
    }
    let mut f = wp.kinetic.clone();
    let mut fl = wp.fluid.clone();
    let mut books = CoupledBooks {
        kinetic_mass0: f.mass(&grid),
        kinetic_mass: 0.0,
        fluid_mass0: fl.mass(&grid),
        fluid_mass: 0.0,
        max_step_defect: 0.0,
        max_wall_flux: 0.0,
        max_exchange_defect: 0.0,
        max_truncation_leak: super::kinetic::velocity_edge_mass(&f, &grid),
    };
    let mut reports = Vec::with_capacity(time.samples() + 1);
    let mut l1_rho = Vec::new();
    let mut l1_n = Vec::new();
    let mut min_ck_margin = f64::INFINITY;
    let mut sample = |k: usize, f: &KineticState, fl: &FluidState| -> Result<()> {
        let lim = limit.map(|l| &l.samples[k]);
        let r = entropy_report(f, fl, lim, &grid, &s)?;
        min_ck_margin = min_ck_margin.min(r.ck_margin);
        if let Some(l) = lim {
            let m = compute_moments(f, &grid, &s);
            l1_rho.push(grid.l1_x(&m.rho, &l.rho)?);
            l1_n.push(grid.l1_x(&fl.n, &l.fluid.n)?);
        }
        reports.push(r);
        Ok(())
    };
    sample(0, &f, &fl)?;
    for step in 1..=time.steps {
        let (f_new, rep) = kinetic_step(&f, &fl, time.dt, &grid, &s, &bc)
            .map_err(|e| solver_error(step, e, dump_coupled(dump_dir, step, &f, &fl, &grid)))?;
        let m = compute_moments(&f_new, &grid, &s);
        let (mut fl_new, (dpk, dpf)) = ns_step_exchange(&fl, &m.rho, &m.u, time.dt, &grid)
            .map_err(|e| solver_error(step, e, dump_coupled(dump_dir, step, &f_new, &fl, &grid)))?;
        fl_new.t = f_new.t;
        books.max_step_defect = books.max_step_defect.max(rep.conservation_defect().abs());
        books.max_wall_flux = books
            .max_wall_flux
            .max(rep.peak_flux_rate[0])
            .max(rep.peak_flux_rate[1]);
        books.max_exchange_defect = books.max_exchange_defect.max((dpk + dpf).abs());
        books.max_truncation_leak = books.max_truncation_leak.max(rep.truncation_leak);
        f = f_new;
        fl = fl_new;
        if step % time.stride == 0 {
            sample(step / time.stride, &f, &fl)?;
        }
    }
    books.kinetic_mass = f.mass(&grid);
    books.fluid_mass = fl.mass(&grid);
    let audit = entropy_inequality_audit(&reports, books.kinetic_mass0, eps, grid.dim)?;
    let f_to_m_l1 = match limit {
        Some(l) => {
            let last = l.samples.last().expect("samples");
            Some(maxwellian_relative_entropy(&f, &last.rho, &last.u, &grid)?.l1)
        }
        None => None,
    };
    Ok(CoupledRun {
        eps,
        time,
        reports,
        l1_rho,
        l1_n,
        audit,
        books,
        f_to_m_l1,
        min_ck_margin,
        h1_residual: wp.h1_residual,
        h2_residual: wp.h2_residual,
        kinetic: f,
        fluid: fl,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitMode {
    Direct,
    Picard,
}

#[derive(Debug, Clone)]
pub struct LimitRun {
    pub mode: LimitMode,
    pub time: TimeGrid,
    /// States at the sample times, `time.samples() + 1` of them.
    pub samples: Vec<TwoPhaseState>,
    pub rho_mass0: f64,
    pub rho_mass: f64,
    pub n_mass0: f64,
    pub n_mass: f64,
    pub min_one_plus_h: f64,
    pub max_exchange_defect: f64,
    pub iterations: Vec<IterationReport>,
}

pub fn run_limit(cfg: &ExperimentConfig, mode: LimitMode, dump_dir: Option<&Path>) -> Result<LimitRun> {
    let grid = cfg.grid()?;
    let wp = make_well_prepared(cfg)?;
    let time = time_grid(cfg, &wp)?;
    let st0 = wp.limit;
    let mut samples = vec![st0.clone()];
    let mut iterations = Vec::new();
    let mut max_exchange_defect: f64 = 0.0;
    match mode {
        LimitMode::Direct => {
            let mut st = st0.clone();
            for step in 1..=time.steps {
                let (next, ex) = two_phase_step_report(&st, time.dt, &grid).map_err(|e| {
                    let dump = dump_dir.and_then(|d| {
                        let p = d.join(format!("failure_step{step}_limit.bin"));
                        write_two_phase(&p, &st).ok().map(|_| p)
                    });
                    solver_error(step, e, dump)
                })?;
                max_exchange_defect = max_exchange_defect.max((ex.dp_fluid + ex.dp_particles).abs());
                st = next;
                if step % time.stride == 0 {
                    samples.push(st.clone());
                }
            }
        }
        LimitMode::Picard => {
            let pc = PicardConfig {
                grid,
                dt: time.dt,
                steps: time.steps,
            };
            let (it, reps) = picard_solve(&to_symhyp(&st0)?, &pc, cfg.picard_iterations)
                .map_err(|e| solver_error(0, e, None))?;
            iterations = reps;
            for k in 1..=time.samples() {
                samples.push(crate::limit::from_symhyp(&it.path[k * time.stride])?);
            }
        }
    }
    let last = samples.last().expect("samples");
    let min_one_plus_h = samples
        .iter()
        .flat_map(|s| s.fluid.n.iter())
        .fold(f64::INFINITY, |a, &n| a.min(n));
    Ok(LimitRun {
        mode,
        time,
        rho_mass0: grid.quad_x(&st0.rho),
        rho_mass: grid.quad_x(&last.rho),
        n_mass0: st0.fluid.mass(&grid),
        n_mass: last.fluid.mass(&grid),
        min_one_plus_h,
        max_exchange_defect,
        iterations,
        samples,
    })
}

/// Least-squares fit of `log y = slope log x + b`; `None` when fewer than two
/// positive points remain or all `x` coincide.
pub fn fit_log_log(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// `sup_H` values at or below this count as zero for the slope fit.
pub const DEGENERATE_H: f64 = 1e-14;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub eps: f64,
    pub audit: AuditRecord,
    pub books: CoupledBooks,
    pub min_ck_margin: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceResult {
    pub rows: Vec<ConvergenceRow>,
    /// Fitted exponent of `sup_H ~ eps^slope`; `None` when degenerate.
    pub slope: Option<f64>,
    /// `exp(b)` of the same fit.
    pub prefactor: Option<f64>,
    pub degenerate: bool,
    /// `sup_H` strictly decreases as `eps` decreases.
    pub monotone: bool,
    /// Consecutive ratios of `f_to_M_l1` along the descending `eps_list`.
    pub f_to_m_ratios: Vec<f64>,
    pub min_ck_margin: f64,
    pub runs: Vec<RunSummary>,
    pub limit_rho_mass_drift: f64,
    pub time: TimeGrid,
}

pub fn run_convergence(cfg: &ExperimentConfig, dump_dir: Option<&Path>) -> Result<ConvergenceResult> {
    if cfg.eps_list.len() < 3 {
        return Err(Error::Config("a convergence sweep needs at least three eps values".into()));
    }
    let limit = run_limit(cfg, LimitMode::Direct, dump_dir)?;
    let results: Vec<Result<(CoupledRun, f64)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .eps_list
            .iter()
            .map(|&eps| {
                let limit = &limit;
                scope.spawn(move || {
                    let t0 = Instant::now();
                    run_coupled(cfg, eps, Some(limit), dump_dir).map(|r| (r, t0.elapsed().as_secs_f64()))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread panicked"))
            .collect()
    });
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for r in results {
        let (run, seconds) = r?;
        let sup = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
        let hs: Vec<f64> = run.reports.iter().map(|r| r.h.unwrap_or(0.0)).collect();
        rows.push(ConvergenceRow {
            eps: run.eps,
            sup_h: sup(&hs),
            sup_l1_rho: sup(&run.l1_rho),
            sup_l1_n: sup(&run.l1_n),
            f_to_m_l1: run.f_to_m_l1.unwrap_or(f64::NAN),
        });
        runs.push(RunSummary {
            eps: run.eps,
            audit: run.audit,
            books: run.books,
            min_ck_margin: run.min_ck_margin,
            seconds,
        });
    }
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let sup_h: Vec<f64> = rows.iter().map(|r| r.sup_h).collect();
    let degenerate = sup_h.iter().any(|&h| h <= DEGENERATE_H);
    let fit = if degenerate { None } else { fit_log_log(&eps, &sup_h) };
    let monotone = !degenerate && sup_h.windows(2).all(|w| w[1] < w[0]);
    let f_to_m_ratios = rows.windows(2).map(|w| w[1].f_to_m_l1 / w[0].f_to_m_l1).collect();
    let min_ck_margin = runs.iter().map(|r| r.min_ck_margin).fold(f64::INFINITY, f64::min);
    Ok(ConvergenceResult {
        rows,
        slope: fit.map(|f| f.0),
        prefactor: fit.map(|f| f.1.exp()),
        degenerate,
        monotone,
        f_to_m_ratios,
        min_ck_margin,
        runs,
        limit_rho_mass_drift: (limit.rho_mass - limit.rho_mass0).abs(),
        time: limit.time,
    })
}

pub fn write_kinetic(path: &Path, f: &KineticState, grid: &PhaseGrid) -> Result<()> {
    io::write_state(
        path,
        &StateFile {
            fields: vec![("f".into(), f.f.clone())],
            field_shape: vec![grid.nx, grid.nv],
            t: f.t,
        },
    )
}

pub fn write_fluid(path: &Path, fl: &FluidState) -> Result<()> {
    io::write_state(
        path,
        &StateFile {
            fields: vec![("n".into(), fl.n.clone()), ("v".into(), fl.v.clone())],
            field_shape: vec![fl.n.len()],
            t: fl.t,
        },
    )
}

pub fn write_two_phase(path: &Path, st: &TwoPhaseState) -> Result<()> {
    io::write_state(
        path,
        &StateFile {
            fields: vec![
                ("rho".into(), st.rho.clone()),
                ("u".into(), st.u.clone()),
                ("n".into(), st.fluid.n.clone()),
                ("v".into(), st.fluid.v.clone()),
            ],
            field_shape: vec![st.nx()],
            t: st.t,
        },
    )
}

/// Entropy history written by a coupled run and read back by the audit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropySeries {
    pub eps: f64,
    pub dim: usize,
    pub kinetic_mass0: f64,
    pub reports: Vec<EntropyReport>,
}

pub const ENTROPY_SERIES_FILE: &str = "entropy_series.json";

#[derive(Debug, Clone, Serialize)]
pub struct CoupledMetadata<'a> {
    pub config: &'a ExperimentConfig,
    pub eps: f64,
    pub time: TimeGrid,
    pub seconds: f64,
    pub audit: AuditRecord,
    pub books: CoupledBooks,
    pub h1_residual: f64,
    pub h2_residual: f64,
    pub min_ck_margin: f64,
    pub f_to_m_l1: Option<f64>,
}

pub fn emit_coupled(dir: &Path, cfg: &ExperimentConfig, run: &CoupledRun, seconds: f64) -> Result<()> {
    let grid = cfg.grid()?;
    io::write_json(
        &dir.join(ENTROPY_SERIES_FILE),
        &EntropySeries {
            eps: run.eps,
            dim: grid.dim,
            kinetic_mass0: run.books.kinetic_mass0,
            reports: run.reports.clone(),
        },
    )?;
    write_kinetic(&dir.join("kinetic_final.bin"), &run.kinetic, &grid)?;
    write_fluid(&dir.join("fluid_final.bin"), &run.fluid)?;
    io::write_json(
        &dir.join("metadata.json"),
        &CoupledMetadata {
            config: cfg,
            eps: run.eps,
            time: run.time,
            seconds,
            audit: run.audit,
            books: run.books,
            h1_residual: run.h1_residual,
            h2_residual: run.h2_residual,
            min_ck_margin: run.min_ck_margin,
            f_to_m_l1: run.f_to_m_l1,
        },
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitMetadata<'a> {
    pub config: &'a ExperimentConfig,
    pub mode: LimitMode,
    pub time: TimeGrid,
    pub seconds: f64,
    pub rho_mass0: f64,
    pub rho_mass: f64,
    pub n_mass0: f64,
    pub n_mass: f64,
    pub min_one_plus_h: f64,
    pub max_exchange_defect: f64,
    pub iterations: &'a [IterationReport],
}

pub fn emit_limit(dir: &Path, cfg: &ExperimentConfig, run: &LimitRun, seconds: f64) -> Result<()> {
    write_two_phase(&dir.join("limit_final.bin"), run.samples.last().expect("samples"))?;
    io::write_json(
        &dir.join("metadata.json"),
        &LimitMetadata {
            config: cfg,
            mode: run.mode,
            time: run.time,
            seconds,
            rho_mass0: run.rho_mass0,
            rho_mass: run.rho_mass,
            n_mass0: run.n_mass0,
            n_mass: run.n_mass,
            min_one_plus_h: run.min_one_plus_h,
            max_exchange_defect: run.max_exchange_defect,
            iterations: &run.iterations,
        },
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceMetadata<'a> {
    pub config: &'a ExperimentConfig,
    pub seconds: f64,
    pub result: &'a ConvergenceResult,
}

pub fn emit_convergence(dir: &Path, cfg: &ExperimentConfig, res: &ConvergenceResult, seconds: f64) -> Result<()> {
    io::write_convergence_csv(&dir.join("convergence.csv"), &res.rows)?;
    io::write_json(
        &dir.join("convergence.json"),
        &ConvergenceMetadata {
            config: cfg,
            seconds,
            result: res,
        },
    )
}

/// Re-run the entropy audit on a directory written by [`emit_coupled`].
pub fn check_entropy(dir: &Path) -> Result<AuditRecord> {
    let series: EntropySeries = io::read_json(&dir.join(ENTROPY_SERIES_FILE))?;
    entropy_inequality_audit(&series.reports, series.kinetic_mass0, series.eps, series.dim)
}

/// Moment state of a coupled run's final data.
pub fn final_moments(cfg: &ExperimentConfig, run: &CoupledRun) -> Result<TwoPhaseState> {
    moment_state(&run.kinetic, &run.fluid, &cfg.grid()?, &cfg.scaling(run.eps)?)
}
