//! Isentropic compressible Navier-Stokes on the slab with no-slip walls and
//! a drag source from the particle phase.

use crate::error::{Error, Result};
use crate::grid::{check_len, solve_tridiagonal, FluidState, PhaseGrid};

/// Densities at or below this value abort the fluid solver.
pub const N_FLOOR: f64 = 1e-10;

pub fn pressure(n: &[f64], gamma: f64) -> Result<Vec<f64>> {
    n.iter()
        .enumerate()
        .map(|(i, &x)| {
            if x > 0.0 {
                Ok(x.powf(gamma))
            } else {
                Err(Error::Vacuum {
                    stage: "pressure",
                    cell: i,
                    value: x,
                })
            }
        })
        .collect()
}

/// `dp/dn = gamma n^{gamma-1}`.
pub fn pressure_derivative(n: f64, gamma: f64) -> f64 {
    gamma * n.powf(gamma - 1.0)
}

pub fn sound_speed(n: f64, gamma: f64) -> f64 {
    pressure_derivative(n, gamma).sqrt()
}

/// Largest stable `dt` for the hyperbolic part at unit CFL number.
pub fn max_stable_dt(fl: &FluidState, grid: &PhaseGrid) -> f64 {
    let speed = fl
        .n
        .iter()
        .zip(&fl.v)
        .map(|(&n, &v)| v.abs() + sound_speed(n, fl.gamma))
        .fold(0.0, f64::max);
    grid.dx / speed
}

/// `int n v^2/2 + n^gamma/(gamma-1) dx`.
pub fn fluid_energy(fl: &FluidState, grid: &PhaseGrid) -> f64 {
    let g = fl.gamma;
    grid.quad_x(
        &fl.n
            .iter()
            .zip(&fl.v)
            .map(|(&n, &v)| 0.5 * n * v * v + n.powf(g) / (g - 1.0))
            .collect::<Vec<_>>(),
    )
}

/// Discrete `int |d_x v|^2 dx` with the no-slip wall values `v = 0`
/// imposed half a cell outside the first and last centre.
pub fn grad_v_sq(v: &[f64], grid: &PhaseGrid) -> f64 {
    let nx = v.len();
    if nx == 0 {
        return 0.0;
    }
    let interior: f64 = v.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    (interior + 2.0 * (v[0] * v[0] + v[nx - 1] * v[nx - 1])) / grid.dx
}

fn check_floor(n: &[f64]) -> Result<()> {
    match n.iter().position(|&x| !(x > N_FLOOR)) {
        Some(cell) => Err(Error::Vacuum {
            stage: "navier-stokes",
            cell,
            value: n[cell],
        }),
        None => Ok(()),
    }
}

fn rusanov(fl: &FluidState, dt: f64, grid: &PhaseGrid) -> Result<(Vec<f64>, Vec<f64>)> {
    check_floor(&fl.n)?;
    let nx = grid.nx;
    let g = fl.gamma;
    let mut speed: f64 = 0.0;
    for (&n, &v) in fl.n.iter().zip(&fl.v) {
        speed = speed.max(v.abs() + sound_speed(n, g));
    }
    let cfl = dt * speed / grid.dx;
    if cfl > 1.0 + 1e-12 {
        return Err(Error::Cfl {
            stage: "navier-stokes",
            number: cfl,
            limit: 1.0,
        });
    }
    // states with wall ghosts: density mirrored, velocity negated
    let state = |i: isize| -> (f64, f64) {
        if i < 0 {
            (fl.n[0], -fl.v[0])
        } else if i as usize >= nx {
            (fl.n[nx - 1], -fl.v[nx - 1])
        } else {
            (fl.n[i as usize], fl.v[i as usize])
        }
    };
    let mut fn_ = vec![0.0; nx + 1];
    let mut fm = vec![0.0; nx + 1];
    for k in 0..=nx {
        let (nl, vl) = state(k as isize - 1);
        let (nr, vr) = state(k as isize);
        let a = (vl.abs() + sound_speed(nl, g)).max(vr.abs() + sound_speed(nr, g));
        let (ml, mr) = (nl * vl, nr * vr);
        fn_[k] = 0.5 * (ml + mr) - 0.5 * a * (nr - nl);
        fm[k] = 0.5 * (ml * vl + nl.powf(g) + mr * vr + nr.powf(g)) - 0.5 * a * (mr - ml);
    }
    let lam = dt / grid.dx;
    let mut n = vec![0.0; nx];
    let mut m = vec![0.0; nx];
    for i in 0..nx {
        n[i] = fl.n[i] - lam * (fn_[i + 1] - fn_[i]);
        m[i] = fl.n[i] * fl.v[i] - lam * (fm[i + 1] - fm[i]);
    }
    check_floor(&n)?;
    Ok((n, m))
}

/// Implicit `n (v - v*) / dt = d_xx v` with `v = 0` at both walls.
pub(crate) fn viscous_solve(n: &[f64], v_star: &[f64], dt: f64, grid: &PhaseGrid) -> Result<Vec<f64>> {
    let nx = n.len();
    let k = dt / (grid.dx * grid.dx);
    let mut lower = vec![-k; nx];
    let mut upper = vec![-k; nx];
    let mut diag = vec![0.0; nx];
    let mut rhs = vec![0.0; nx];
    for i in 0..nx {
        let walls = (i == 0) as usize + (i == nx - 1) as usize;
        // an interior neighbour contributes k, a wall ghost -v contributes 2k
        diag[i] = n[i] + 2.0 * k + k * walls as f64;
        rhs[i] = n[i] * v_star[i];
    }
    lower[0] = 0.0;
    upper[nx - 1] = 0.0;
    let mut v = vec![0.0; nx];
    solve_tridiagonal(&lower, &diag, &upper, &rhs, &mut v)?;
    Ok(v)
}

/// Implicit drag `n (v_new - v) = dt rho (u - v_new)`.
pub fn drag_relax(n: &[f64], v: &[f64], drag_rho: &[f64], drag_u: &[f64], dt: f64) -> Vec<f64> {
    (0..n.len())
        .map(|i| v[i] + dt * drag_rho[i] * (drag_u[i] - v[i]) / (n[i] + dt * drag_rho[i]))
        .collect()
}

/// One step of the fluid equations: Rusanov update of `(n, n v)`, implicit
/// viscosity, then implicit drag towards `drag_u` with weight `drag_rho`.
pub fn ns_step(
    fl: &FluidState,
    drag_rho: &[f64],
    drag_u: &[f64],
    dt: f64,
    grid: &PhaseGrid,
) -> Result<FluidState> {
    ns_step_exchange(fl, drag_rho, drag_u, dt, grid).map(|(f, _)| f)
}

/// [`ns_step`] together with the [`momentum_exchange`] of its drag substep.
pub fn ns_step_exchange(
    fl: &FluidState,
    drag_rho: &[f64],
    drag_u: &[f64],
    dt: f64,
    grid: &PhaseGrid,
) -> Result<(FluidState, (f64, f64))> {
    grid.check_x(&fl.n)?;
    grid.check_x(&fl.v)?;
    check_len(drag_rho, grid.nx)?;
    check_len(drag_u, grid.nx)?;
    let (n, m) = rusanov(fl, dt, grid)?;
    let v_star: Vec<f64> = m.iter().zip(&n).map(|(m, n)| m / n).collect();
    let v_visc = viscous_solve(&n, &v_star, fl.mu * dt, grid)?;
    let exchange = momentum_exchange(drag_rho, drag_u, &n, &v_visc, dt, grid)?;
    let v = drag_relax(&n, &v_visc, drag_rho, drag_u, dt);
    Ok((
        FluidState {
            n,
            v,
            gamma: fl.gamma,
            mu: fl.mu,
            t: fl.t + dt,
        },
        exchange,
    ))
}

/// Momentum moved by the implicit drag substep applied to `(n, v)`:
/// `(dP_kinetic, dP_fluid)` with `dP_kinetic = -dP_fluid`.
pub fn momentum_exchange(
    drag_rho: &[f64],
    drag_u: &[f64],
    n: &[f64],
    v: &[f64],
    dt: f64,
    grid: &PhaseGrid,
) -> Result<(f64, f64)> {
    for a in [drag_rho, drag_u, n, v] {
        check_len(a, grid.nx)?;
    }
    let v_new = drag_relax(n, v, drag_rho, drag_u, dt);
    let dp_fluid = grid.dx
        * (0..grid.nx)
            .map(|i| n[i] * (v_new[i] - v[i]))
            .sum::<f64>();
    Ok((-dp_fluid, dp_fluid))
}
