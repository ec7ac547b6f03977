//! The two-phase limit model: isothermal Euler particles with kinematic walls
//! coupled by drag to the isentropic Navier-Stokes gas.
//!
//! Two solve modes are provided. The direct mode is a Strang-split finite
//! volume scheme. The Picard mode rewrites the system in the variables
//! `g = log rho`, `h = n - 1` and solves a linearized problem over the whole
//! time horizon per iterate, so successive iterates can be compared.

use crate::error::{Error, Result};
use crate::fluid::{ns_step_exchange, sound_speed, viscous_solve};
use crate::grid::{check_len, l2_distance, FluidState, PhaseGrid, TwoPhaseState};

/// Switches used by tests to isolate parts of [`euler_step_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerHooks {
    pub transport: bool,
    pub drag: bool,
}

impl Default for EulerHooks {
    fn default() -> Self {
        Self {
            transport: true,
            drag: true,
        }
    }
}

/// Largest stable `dt` for the Euler phase at unit CFL number.
pub fn euler_max_stable_dt(u: &[f64], grid: &PhaseGrid) -> f64 {
    grid.dx / u.iter().map(|x| x.abs() + 1.0).fold(0.0, f64::max)
}

pub fn euler_step(
    rho: &[f64],
    u: &[f64],
    coupling_v: &[f64],
    dt: f64,
    grid: &PhaseGrid,
) -> Result<(Vec<f64>, Vec<f64>)> {
    euler_step_with(rho, u, coupling_v, dt, grid, EulerHooks::default())
}

/// Rusanov update of `(rho, rho u)` with pressure `rho` and mirrored wall
/// ghosts, followed by the drag `u' = v - u` integrated exactly with `v`
/// frozen.
pub fn euler_step_with(
    rho: &[f64],
    u: &[f64],
    coupling_v: &[f64],
    dt: f64,
    grid: &PhaseGrid,
    hooks: EulerHooks,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let nx = grid.nx;
    grid.check_x(rho)?;
    grid.check_x(u)?;
    grid.check_x(coupling_v)?;
    if let Some(cell) = rho.iter().position(|&r| !(r > 0.0)) {
        return Err(Error::Vacuum {
            stage: "euler",
            cell,
            value: rho[cell],
        });
    }
    let (mut r_new, mut u_new) = (rho.to_vec(), u.to_vec());
    if hooks.transport {
        let cfl = dt / euler_max_stable_dt(u, grid);
        if cfl > 1.0 + 1e-12 {
            return Err(Error::Cfl {
                stage: "euler",
                number: cfl,
                limit: 1.0,
            });
        }
        let state = |i: isize| -> (f64, f64) {
            if i < 0 {
                (rho[0], -u[0])
            } else if i as usize >= nx {
                (rho[nx - 1], -u[nx - 1])
            } else {
                (rho[i as usize], u[i as usize])
            }
        };
        let mut fr = vec![0.0; nx + 1];
        let mut fm = vec![0.0; nx + 1];
        for k in 0..=nx {
            let (rl, ul) = state(k as isize - 1);
            let (rr, ur) = state(k as isize);
            let a = ul.abs().max(ur.abs()) + 1.0;
            let (ml, mr) = (rl * ul, rr * ur);
            fr[k] = 0.5 * (ml + mr) - 0.5 * a * (rr - rl);
            fm[k] = 0.5 * (ml * ul + rl + mr * ur + rr) - 0.5 * a * (mr - ml);
        }
        let lam = dt / grid.dx;
        for i in 0..nx {
            r_new[i] = rho[i] - lam * (fr[i + 1] - fr[i]);
            let m = rho[i] * u[i] - lam * (fm[i + 1] - fm[i]);
            if !(r_new[i] > 0.0) {
                return Err(Error::Vacuum {
                    stage: "euler",
                    cell: i,
                    value: r_new[i],
                });
            }
            u_new[i] = m / r_new[i];
        }
    }
    if hooks.drag {
        let decay = (-dt).exp();
        for (ui, vi) in u_new.iter_mut().zip(coupling_v) {
            *ui = vi + (*ui - vi) * decay;
        }
    }
    Ok((r_new, u_new))
}

/// Momentum handed between the phases in one [`two_phase_step_report`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExchangeReport {
    pub dp_particles: f64,
    pub dp_fluid: f64,
}

pub fn two_phase_step(st: &TwoPhaseState, dt: f64, grid: &PhaseGrid) -> Result<TwoPhaseState> {
    two_phase_step_report(st, dt, grid).map(|(s, _)| s)
}

/// Strang step: Euler(dt/2), Navier-Stokes(dt) with drag toward the particle
/// velocity, Euler(dt/2). The report carries the fluid-side drag exchange and
/// its negative.
pub fn two_phase_step_report(
    st: &TwoPhaseState,
    dt: f64,
    grid: &PhaseGrid,
) -> Result<(TwoPhaseState, ExchangeReport)> {
    let (r1, u1) = euler_step(&st.rho, &st.u, &st.fluid.v, 0.5 * dt, grid)?;
    let (fluid, (dp_particles, dp_fluid)) = ns_step_exchange(&st.fluid, &r1, &u1, dt, grid)?;
    let (rho, u) = euler_step(&r1, &u1, &fluid.v, 0.5 * dt, grid)?;
    let t = st.t + dt;
    let mut fluid = fluid;
    fluid.t = t;
    Ok((
        TwoPhaseState { rho, u, fluid, t },
        ExchangeReport {
            dp_particles,
            dp_fluid,
        },
    ))
}

/// Limit-system fields in the variables `g = log rho`, `h = n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymHypState {
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub gamma: f64,
    pub t: f64,
}

impl SymHypState {
    /// The fluid pair `(h, v)`.
    pub fn eta(&self) -> (&[f64], &[f64]) {
        (&self.h, &self.v)
    }

    fn sq_distance(&self, other: &SymHypState, grid: &PhaseGrid) -> Result<f64> {
        let mut s = 0.0;
        for (a, b) in [
            (&self.g, &other.g),
            (&self.u, &other.u),
            (&self.h, &other.h),
            (&self.v, &other.v),
        ] {
            s += l2_distance(a, b, grid.dx)?.powi(2);
        }
        Ok(s)
    }
}

pub fn to_symhyp(st: &TwoPhaseState) -> Result<SymHypState> {
    if let Some(cell) = st.rho.iter().position(|&r| !(r > 0.0)) {
        return Err(Error::Positivity {
            stage: "to_symhyp",
            cell,
            value: st.rho[cell],
        });
    }
    if let Some(cell) = st.fluid.n.iter().position(|&n| !(n > 0.0)) {
        return Err(Error::Positivity {
            stage: "to_symhyp",
            cell,
            value: st.fluid.n[cell],
        });
    }
    Ok(SymHypState {
        g: st.rho.iter().map(|r| r.ln()).collect(),
        h: st.fluid.n.iter().map(|n| n - 1.0).collect(),
        u: st.u.clone(),
        v: st.fluid.v.clone(),
        gamma: st.fluid.gamma,
        t: st.t,
    })
}

pub fn from_symhyp(sh: &SymHypState) -> Result<TwoPhaseState> {
    if let Some(cell) = sh.h.iter().position(|&h| !(1.0 + h > 0.0)) {
        return Err(Error::Positivity {
            stage: "from_symhyp",
            cell,
            value: 1.0 + sh.h[cell],
        });
    }
    let mut fluid = FluidState::new(
        sh.h.iter().map(|h| 1.0 + h).collect(),
        sh.v.clone(),
        sh.gamma,
    )?;
    fluid.t = sh.t;
    let mut st = TwoPhaseState::new(sh.g.iter().map(|g| g.exp()).collect(), sh.u.clone(), fluid)?;
    st.t = sh.t;
    Ok(st)
}

/// Time grid shared by all Picard iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardConfig {
    pub grid: PhaseGrid,
    pub dt: f64,
    pub steps: usize,
}

impl PicardConfig {
    pub fn new(grid: PhaseGrid, t_final: f64, dt: f64) -> Result<Self> {
        if !(t_final > 0.0 && dt > 0.0) {
            return Err(Error::Argument(format!(
                "t_final={t_final} and dt={dt} must be positive"
            )));
        }
        let steps = (t_final / dt).round().max(1.0) as usize;
        Ok(Self {
            grid,
            dt: t_final / steps as f64,
            steps,
        })
    }
}

/// One Picard iterate: the full space-time path, `steps + 1` levels.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardIterate {
    pub m: usize,
    pub path: Vec<SymHypState>,
    cauchy: Option<f64>,
}

impl PicardIterate {
    /// Iterate zero: the initial data held constant in time.
    pub fn initial(data: &SymHypState, cfg: &PicardConfig) -> Result<Self> {
        let grid = &cfg.grid;
        for f in [&data.g, &data.h, &data.u, &data.v] {
            grid.check_x(f)?;
        }
        if let Some(cell) = data.h.iter().position(|&h| !(1.0 + h > 0.0)) {
            return Err(Error::Positivity {
                stage: "picard",
                cell,
                value: 1.0 + data.h[cell],
            });
        }
        let path = (0..=cfg.steps)
            .map(|k| SymHypState {
                t: data.t + k as f64 * cfg.dt,
                ..data.clone()
            })
            .collect();
        Ok(Self {
            m: 0,
            path,
            cauchy: None,
        })
    }

    pub fn last(&self) -> &SymHypState {
        self.path.last().expect("nonempty path")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IterationReport {
    /// Index of the iterate just produced.
    pub m: usize,
    /// `sup_t` of the squared L2 distance to the previous iterate, summed over
    /// `g, u, h, v`.
    pub cauchy_l2: f64,
    /// `cauchy_l2(m) / cauchy_l2(m-1)`; NaN for the first iterate.
    pub contraction_ratio: f64,
}

/// Upwind update of two fields advected by a frozen 2x2 system with real
/// eigen-decomposition, given left and right ghost values.
fn split_upwind(
    a: &[f64],
    b: &[f64],
    ghost_l: (f64, f64),
    ghost_r: (f64, f64),
    lam: f64,
    plus: impl Fn(usize) -> [[f64; 2]; 2],
    minus: impl Fn(usize) -> [[f64; 2]; 2],
) -> (Vec<f64>, Vec<f64>) {
    let nx = a.len();
    let at = |i: isize| -> (f64, f64) {
        if i < 0 {
            ghost_l
        } else if i as usize >= nx {
            ghost_r
        } else {
            (a[i as usize], b[i as usize])
        }
    };
    let mut na = a.to_vec();
    let mut nb = b.to_vec();
    for i in 0..nx {
        let ii = i as isize;
        let (a0, b0) = at(ii);
        let (al, bl) = at(ii - 1);
        let (ar, br) = at(ii + 1);
        let p = plus(i);
        let m = minus(i);
        let (dla, dlb) = (a0 - al, b0 - bl);
        let (dra, drb) = (ar - a0, br - b0);
        na[i] -= lam * (p[0][0] * dla + p[0][1] * dlb + m[0][0] * dra + m[0][1] * drb);
        nb[i] -= lam * (p[1][0] * dla + p[1][1] * dlb + m[1][0] * dra + m[1][1] * drb);
    }
    (na, nb)
}

/// Positive and negative parts of `[[v, n], [c^2/n, v]]`, whose eigenvalues
/// are `v +- c`.
fn fluid_split(v: f64, n: f64, c: f64) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    // eigenvectors (n, +-c); B^{+-} = R diag(l^{+-}) R^{-1}
    let l1 = v + c;
    let l2 = v - c;
    let part = |f: fn(f64) -> f64| {
        let (p1, p2) = (f(l1), f(l2));
        let s = 0.5 * (p1 + p2);
        let d = 0.5 * (p1 - p2);
        [[s, d * n / c], [d * c / n, s]]
    };
    (part(|x| x.max(0.0)), part(|x| x.min(0.0)))
}

/// Produce iterate `m + 1` from iterate `m` over the whole horizon.
///
/// With coefficients frozen at iterate `m`, the gas pair `(h, v)` is advanced
/// first (upwind flux-vector splitting, explicit drag source, implicit
/// viscosity), then the particle pair `(g, u)` by upwinding the
/// characteristic fields `u +- g` with the new gas velocity in the drag term.
pub fn picard_iterate(
    prev: &PicardIterate,
    cfg: &PicardConfig,
) -> Result<(PicardIterate, IterationReport)> {
    let grid = &cfg.grid;
    let nx = grid.nx;
    let dt = cfg.dt;
    let lam = dt / grid.dx;
    if prev.path.len() != cfg.steps + 1 {
        return Err(Error::Shape {
            expected: cfg.steps + 1,
            got: prev.path.len(),
        });
    }
    let mut path = Vec::with_capacity(cfg.steps + 1);
    path.push(prev.path[0].clone());
    for k in 0..cfg.steps {
        let old = &prev.path[k];
        let cur = &path[k];
        let gamma = cur.gamma;
        let c: Vec<f64> = old.h.iter().map(|h| sound_speed(1.0 + h, gamma)).collect();
        let mut speed: f64 = 0.0;
        for i in 0..nx {
            speed = speed
                .max(old.v[i].abs() + c[i])
                .max(old.u[i].abs() + 1.0);
        }
        if lam * speed > 1.0 + 1e-12 {
            return Err(Error::Cfl {
                stage: "picard",
                number: lam * speed,
                limit: 1.0,
            });
        }
        let splits: Vec<_> = (0..nx)
            .map(|i| fluid_split(old.v[i], 1.0 + old.h[i], c[i]))
            .collect();
        let (h_new, mut v_star) = split_upwind(
            &cur.h,
            &cur.v,
            (cur.h[0], -cur.v[0]),
            (cur.h[nx - 1], -cur.v[nx - 1]),
            lam,
            |i| splits[i].0,
            |i| splits[i].1,
        );
        for i in 0..nx {
            v_star[i] += dt * old.g[i].exp() * (old.u[i] - old.v[i]) / (1.0 + old.h[i]);
        }
        let n_old: Vec<f64> = old.h.iter().map(|h| 1.0 + h).collect();
        let v_new = viscous_solve(&n_old, &v_star, dt, grid)?;
        if let Some(cell) = h_new.iter().position(|&h| !(1.0 + h > 0.0)) {
            return Err(Error::Positivity {
                stage: "picard",
                cell,
                value: 1.0 + h_new[cell],
            });
        }

        let wp: Vec<f64> = (0..nx).map(|i| cur.u[i] + cur.g[i]).collect();
        let wm: Vec<f64> = (0..nx).map(|i| cur.u[i] - cur.g[i]).collect();
        let upwind = |w: &[f64], gl: f64, gr: f64, sign: f64| -> Vec<f64> {
            (0..nx)
                .map(|i| {
                    let s = old.u[i] + sign;
                    let l = if i == 0 { gl } else { w[i - 1] };
                    let r = if i == nx - 1 { gr } else { w[i + 1] };
                    w[i] - lam * (s.max(0.0) * (w[i] - l) + s.min(0.0) * (r - w[i]))
                })
                .collect()
        };
        // mirrored g and negated u swap the two fields at the wall
        let wp_new = upwind(&wp, -wm[0], -wm[nx - 1], 1.0);
        let wm_new = upwind(&wm, -wp[0], -wp[nx - 1], -1.0);
        let mut g_new = vec![0.0; nx];
        let mut u_new = vec![0.0; nx];
        for i in 0..nx {
            g_new[i] = 0.5 * (wp_new[i] - wm_new[i]);
            u_new[i] = 0.5 * (wp_new[i] + wm_new[i]) + dt * (v_new[i] - cur.u[i]);
        }
        path.push(SymHypState {
            g: g_new,
            h: h_new,
            u: u_new,
            v: v_new,
            gamma,
            t: cur.t + dt,
        });
    }
    let mut cauchy: f64 = 0.0;
    for (a, b) in path.iter().zip(&prev.path) {
        cauchy = cauchy.max(a.sq_distance(b, grid)?);
    }
    let report = IterationReport {
        m: prev.m + 1,
        cauchy_l2: cauchy,
        contraction_ratio: prev.cauchy.map_or(f64::NAN, |c| cauchy / c),
    };
    Ok((
        PicardIterate {
            m: prev.m + 1,
            path,
            cauchy: Some(cauchy),
        },
        report,
    ))
}

/// Run `iterations` Picard steps from the initial data.
pub fn picard_solve(
    data: &SymHypState,
    cfg: &PicardConfig,
    iterations: usize,
) -> Result<(PicardIterate, Vec<IterationReport>)> {
    let mut it = PicardIterate::initial(data, cfg)?;
    let mut reports = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let (next, rep) = picard_iterate(&it, cfg)?;
        reports.push(rep);
        it = next;
    }
    Ok((it, reports))
}

/// `sup_t` of the L2 distance between a Picard path and a direct trajectory
/// sampled on the same time levels.
pub fn path_distance(path: &[SymHypState], direct: &[TwoPhaseState], grid: &PhaseGrid) -> Result<f64> {
    if path.len() != direct.len() {
        return Err(Error::Shape {
            expected: path.len(),
            got: direct.len(),
        });
    }
    let mut worst: f64 = 0.0;
    for (p, d) in path.iter().zip(direct) {
        worst = worst.max(p.sq_distance(&to_symhyp(d)?, grid)?.sqrt());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityReport {
    pub min_one_plus_h: f64,
    /// Largest relative gap between `1 + h` along a characteristic and the
    /// prediction `(1 + h0) exp(-int d_x v dt)`.
    pub max_deviation: f64,
}

fn interp(field: &[f64], grid: &PhaseGrid, x: f64) -> f64 {
    let s = ((x - grid.x_lo) / grid.dx - 0.5).clamp(0.0, (grid.nx - 1) as f64);
    let i = (s.floor() as usize).min(grid.nx.saturating_sub(2));
    let w = s - i as f64;
    if grid.nx == 1 {
        return field[0];
    }
    (1.0 - w) * field[i] + w * field[i + 1]
}

fn derivative(v: &[f64], grid: &PhaseGrid) -> Vec<f64> {
    let nx = v.len();
    (0..nx)
        .map(|i| {
            let (l, r, span) = match i {
                0 => (v[0], v[1], 1.0),
                _ if i == nx - 1 => (v[nx - 2], v[nx - 1], 1.0),
                _ => (v[i - 1], v[i + 1], 2.0),
            };
            (r - l) / (span * grid.dx)
        })
        .collect()
}

/// Compare `1 + h` along forward characteristics of `v` with the closed-form
/// solution of the continuity equation along them.
///
/// Characteristics start at the cell centres listed in `starts` and are
/// integrated with Heun's method on the sampled fields, `dt` apart.
pub fn density_positivity_check(
    h_path: &[Vec<f64>],
    v_path: &[Vec<f64>],
    dt: f64,
    grid: &PhaseGrid,
    starts: &[usize],
) -> Result<PositivityReport> {
    if h_path.len() != v_path.len() || h_path.is_empty() {
        return Err(Error::Shape {
            expected: h_path.len(),
            got: v_path.len(),
        });
    }
    for (h, v) in h_path.iter().zip(v_path) {
        grid.check_x(h)?;
        grid.check_x(v)?;
    }
    if grid.nx < 2 {
        return Err(Error::Argument("need at least two cells".into()));
    }
    let min_one_plus_h = h_path
        .iter()
        .flatten()
        .map(|h| 1.0 + h)
        .fold(f64::INFINITY, f64::min);
    let dvs: Vec<Vec<f64>> = v_path.iter().map(|v| derivative(v, grid)).collect();
    let mut max_deviation: f64 = 0.0;
    for &i0 in starts {
        let mut x = grid.x(i0);
        let base = 1.0 + h_path[0][i0];
        let mut int_div = 0.0;
        for k in 0..h_path.len() - 1 {
            let v0 = interp(&v_path[k], grid, x);
            let d0 = interp(&dvs[k], grid, x);
            let xp = x + dt * v0;
            let v1 = interp(&v_path[k + 1], grid, xp);
            let d1 = interp(&dvs[k + 1], grid, xp);
            x += 0.5 * dt * (v0 + v1);
            int_div += 0.5 * dt * (d0 + d1);
            let predicted = base * (-int_div).exp();
            let actual = 1.0 + interp(&h_path[k + 1], grid, x);
            max_deviation = max_deviation.max((actual - predicted).abs() / predicted);
        }
    }
    Ok(PositivityReport {
        min_one_plus_h,
        max_deviation,
    })
}

/// Conservative upwind solve of `d_t n + d_x(n v) = 0` with a prescribed
/// velocity `v(x, t)` evaluated at cell faces; ghost densities copy the
/// wall cell. Returns the sampled `h = n - 1` and `v` at cell centres.
pub fn advect_density(
    h0: &[f64],
    velocity: impl Fn(f64, f64) -> f64,
    dt: f64,
    steps: usize,
    grid: &PhaseGrid,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    grid.check_x(h0)?;
    let nx = grid.nx;
    let mut n: Vec<f64> = h0.iter().map(|h| 1.0 + h).collect();
    let centres = grid.x_centers();
    let sample_v = |t: f64| centres.iter().map(|&x| velocity(x, t)).collect::<Vec<_>>();
    let mut h_path = vec![h0.to_vec()];
    let mut v_path = vec![sample_v(0.0)];
    let lam = dt / grid.dx;
    for k in 0..steps {
        let t = k as f64 * dt;
        let mut flux = vec![0.0; nx + 1];
        for (f, face) in flux.iter_mut().enumerate() {
            let a = velocity(grid.x_lo + f as f64 * grid.dx, t);
            if (a * lam).abs() > 1.0 + 1e-12 {
                return Err(Error::Cfl {
                    stage: "advect_density",
                    number: (a * lam).abs(),
                    limit: 1.0,
                });
            }
            let left = n[f.saturating_sub(1)];
            let right = n[f.min(nx - 1)];
            *face = a.max(0.0) * left + a.min(0.0) * right;
        }
        for i in 0..nx {
            n[i] -= lam * (flux[i + 1] - flux[i]);
        }
        if let Some(cell) = n.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::Positivity {
                stage: "advect_density",
                cell,
                value: n[cell],
            });
        }
        h_path.push(n.iter().map(|x| x - 1.0).collect());
        v_path.push(sample_v(t + dt));
    }
    Ok((h_path, v_path))
}

/// Check a limit state for the order-zero wall compatibility used by the
/// solvers: particle and gas velocities both vanish in the wall cells up to
/// the given tolerance. Returns the largest wall velocity seen.
pub fn wall_velocity(st: &TwoPhaseState) -> Result<f64> {
    let nx = st.nx();
    check_len(&st.u, nx)?;
    Ok([st.u[0], st.u[nx - 1], st.fluid.v[0], st.fluid.v[nx - 1]]
        .iter()
        .fold(0.0f64, |a, b| a.max(b.abs())))
}
