//! Split time stepping of the scaled Vlasov-Fokker-Planck equation.
//!
//! One step is the Strang sequence
//! transport(dt/2) -> drag(dt/2) -> Fokker-Planck(dt) -> drag(dt/2) -> transport(dt/2).
//! Transport and drag are explicit conservative upwind schemes; the
//! Fokker-Planck substep is a backward-Euler solve of an exponentially fitted
//! flux whose null space is the discrete Maxwellian.

use crate::error::{Error, Result};
use crate::grid::{solve_tridiagonal, FluidState, KineticState, PhaseGrid, ScalingParams};
use crate::moments::{bulk_velocity, maxwellian_norm, truncate_velocity};

/// Specular image `xi - 2 (xi . r) r` of a velocity in any dimension.
pub fn reflect(xi: &[f64], normal: &[f64]) -> Vec<f64> {
    debug_assert_eq!(xi.len(), normal.len());
    let dot: f64 = xi.iter().zip(normal).map(|(a, b)| a * b).sum();
    xi.iter().zip(normal).map(|(a, r)| a - 2.0 * dot * r).collect()
}

/// Wall scattering rule for the incoming half of the trace.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryKernel {
    Specular,
    /// Re-emission of the outgoing mass flux with a wall Maxwellian of the
    /// given temperature.
    Diffuse { wall_temperature: f64 },
    /// Prescribed incoming profile over the full velocity grid; only the
    /// entries pointing into the domain are used.
    Dirichlet { g: Vec<f64> },
}

impl BoundaryKernel {
    pub fn diffuse(grid: &PhaseGrid, wall_temperature: f64) -> Result<Self> {
        if !(wall_temperature > 0.0) {
            return Err(Error::Argument(format!(
                "wall temperature {wall_temperature} must be positive"
            )));
        }
        let k = Self::Diffuse { wall_temperature };
        let checks = k.diffuse_checks(grid).expect("diffuse kernel");
        if checks.normalization_defect > 1e-12 || checks.maxwellian_defect > 1e-12 {
            return Err(Error::Argument(format!(
                "diffuse kernel fails its discrete conditions: {checks:?}"
            )));
        }
        Ok(k)
    }

    pub fn dirichlet(grid: &PhaseGrid, g: Vec<f64>) -> Result<Self> {
        crate::grid::check_len(&g, grid.nv)?;
        if g.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::Argument("Dirichlet profile must be nonnegative".into()));
        }
        Ok(Self::Dirichlet { g })
    }

    /// Fill `ghost` (length nv) with the incoming trace at `wall` given the
    /// outgoing trace `trace` taken from the wall cell.
    fn incoming(&self, grid: &PhaseGrid, wall: usize, trace: &[f64], ghost: &mut [f64]) {
        let r = grid.wall_normal(wall);
        ghost.iter_mut().for_each(|g| *g = 0.0);
        match self {
            BoundaryKernel::Specular => {
                for j in 0..grid.nv {
                    if grid.xi(j) * r < 0.0 {
                        ghost[j] = trace[grid.mirror(j)];
                    }
                }
            }
            BoundaryKernel::Diffuse { wall_temperature } => {
                let w = wall_weights(grid, *wall_temperature);
                let mut out_flux = 0.0;
                let mut norm = 0.0;
                for j in 0..grid.nv {
                    let c = grid.xi(j) * r;
                    if c > 0.0 {
                        out_flux += c * trace[j];
                    } else {
                        norm += -c * w[j];
                    }
                }
                for j in 0..grid.nv {
                    if grid.xi(j) * r < 0.0 {
                        ghost[j] = out_flux * w[j] / norm;
                    }
                }
            }
            BoundaryKernel::Dirichlet { g } => {
                for j in 0..grid.nv {
                    if grid.xi(j) * r < 0.0 {
                        ghost[j] = g[j];
                    }
                }
            }
        }
    }

    /// Discrete scattering-kernel conditions for the diffuse kernel: each
    /// outgoing velocity is re-emitted with unit total flux, and the wall
    /// Maxwellian is reproduced. `None` for the other kernels.
    pub fn diffuse_checks(&self, grid: &PhaseGrid) -> Option<DiffuseChecks> {
        let BoundaryKernel::Diffuse { wall_temperature } = self else {
            return None;
        };
        let w = wall_weights(grid, *wall_temperature);
        let mut normalization_defect: f64 = 0.0;
        let mut maxwellian_defect: f64 = 0.0;
        let mut min_entry = f64::INFINITY;
        for wall in 0..2 {
            let r = grid.wall_normal(wall);
            // kernel row for a unit outgoing flux from one velocity: B(xi, xi') |xi.r| summed
            let mut trace = vec![0.0; grid.nv];
            let mut ghost = vec![0.0; grid.nv];
            for jp in 0..grid.nv {
                let c = grid.xi(jp) * r;
                if c <= 0.0 {
                    continue;
                }
                trace.iter_mut().for_each(|t| *t = 0.0);
                trace[jp] = 1.0 / c;
                self.incoming(grid, wall, &trace, &mut ghost);
                let emitted: f64 = (0..grid.nv)
                    .filter(|&j| grid.xi(j) * r < 0.0)
                    .map(|j| -grid.xi(j) * r * ghost[j])
                    .sum();
                normalization_defect = normalization_defect.max((emitted - 1.0).abs());
                min_entry = min_entry.min(ghost.iter().copied().fold(f64::INFINITY, f64::min));
            }
            self.incoming(grid, wall, &w, &mut ghost);
            for j in 0..grid.nv {
                if grid.xi(j) * r < 0.0 {
                    maxwellian_defect =
                        maxwellian_defect.max((ghost[j] - w[j]).abs() / w[j].max(1e-300));
                }
            }
        }
        Some(DiffuseChecks {
            normalization_defect,
            maxwellian_defect,
            min_entry,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffuseChecks {
    /// max over outgoing velocities of |emitted flux - 1|
    pub normalization_defect: f64,
    /// max relative deviation of the re-emitted wall Maxwellian
    pub maxwellian_defect: f64,
    pub min_entry: f64,
}

fn wall_weights(grid: &PhaseGrid, temperature: f64) -> Vec<f64> {
    let norm = maxwellian_norm(grid.dim) / temperature.sqrt();
    (0..grid.nv)
        .map(|j| norm * (-grid.xi(j).powi(2) / (2.0 * temperature)).exp())
        .collect()
}

/// Bookkeeping for one kinetic step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KineticStepReport {
    pub mass_before: f64,
    pub mass_after: f64,
    /// Time-integrated outward mass flux `int dt int (xi . r) gamma f dxi`
    /// through the left and right wall.
    pub wall_flux: [f64; 2],
    /// Largest instantaneous `|int (xi . r) gamma f dxi|` seen at each wall.
    pub peak_flux_rate: [f64; 2],
    /// Mass held in the two outermost velocity cells after the step.
    pub truncation_leak: f64,
}

impl KineticStepReport {
    /// Net mass that left through both walls.
    pub fn boundary_flux(&self) -> f64 {
        self.wall_flux[0] + self.wall_flux[1]
    }

    /// `mass_after - mass_before + boundary_flux`; zero up to rounding.
    pub fn conservation_defect(&self) -> f64 {
        self.mass_after - self.mass_before + self.boundary_flux()
    }

    fn absorb(&mut self, other: &KineticStepReport) {
        for w in 0..2 {
            self.wall_flux[w] += other.wall_flux[w];
            self.peak_flux_rate[w] = self.peak_flux_rate[w].max(other.peak_flux_rate[w]);
        }
    }
}

/// Mass in the outermost velocity cells, the part of `f` closest to the
/// velocity cut-off.
pub fn velocity_edge_mass(f: &KineticState, grid: &PhaseGrid) -> f64 {
    let last = grid.nv - 1;
    grid.dx
        * grid.dv
        * (0..grid.nx)
            .map(|i| f.f[grid.idx(i, 0)] + f.f[grid.idx(i, last)])
            .sum::<f64>()
}

/// Free transport `d_t f + xi d_x f = 0` by first-order upwinding with wall
/// ghosts supplied by `bc`.
pub fn transport_step(
    f: &KineticState,
    grid: &PhaseGrid,
    dt: f64,
    bc: &BoundaryKernel,
) -> Result<(KineticState, KineticStepReport)> {
    grid.check_phase(&f.f)?;
    let cfl = dt * grid.xi(grid.nv - 1) / grid.dx;
    if cfl > 1.0 + 1e-12 {
        return Err(Error::Cfl {
            stage: "transport",
            number: cfl,
            limit: 1.0,
        });
    }
    let (nx, nv) = (grid.nx, grid.nv);
    let mut ghost = [vec![0.0; nv], vec![0.0; nv]];
    bc.incoming(grid, 0, f.column(grid, 0), &mut ghost[0]);
    bc.incoming(grid, 1, f.column(grid, nx - 1), &mut ghost[1]);

    let mut report = KineticStepReport {
        mass_before: f.mass(grid),
        ..Default::default()
    };
    for wall in 0..2 {
        let r = grid.wall_normal(wall);
        let cell = if wall == 0 { 0 } else { nx - 1 };
        let trace = f.column(grid, cell);
        // pair xi with -xi so the specular sum cancels exactly
        let mut rate = 0.0;
        for j in nv / 2..nv {
            let m = grid.mirror(j);
            let gamma = |k: usize| {
                if grid.xi(k) * r > 0.0 {
                    trace[k]
                } else {
                    ghost[wall][k]
                }
            };
            rate += r * grid.xi(j) * gamma(j) + r * grid.xi(m) * gamma(m);
        }
        rate *= grid.dv;
        report.wall_flux[wall] = dt * rate;
        report.peak_flux_rate[wall] = rate.abs();
    }

    let lam = dt / grid.dx;
    let mut out = f.f.clone();
    for j in 0..nv {
        let c = grid.xi(j);
        let at = |i: isize| -> f64 {
            if i < 0 {
                ghost[0][j]
            } else if i as usize >= nx {
                ghost[1][j]
            } else {
                f.f[grid.idx(i as usize, j)]
            }
        };
        for i in 0..nx {
            let ii = i as isize;
            let diff = if c > 0.0 {
                at(ii) - at(ii - 1)
            } else {
                at(ii + 1) - at(ii)
            };
            out[grid.idx(i, j)] -= lam * c * diff;
        }
    }
    let next = KineticState { f: out, t: f.t + dt };
    report.mass_after = next.mass(grid);
    report.truncation_leak = velocity_edge_mass(&next, grid);
    Ok((next, report))
}

/// Velocity drift `d_t f + d_xi((w - xi) f) = 0` with `w = chi_lambda(v)`,
/// zero flux at `+-v_max`.
pub fn drag_step(
    f: &KineticState,
    fluid_v: &[f64],
    dt: f64,
    grid: &PhaseGrid,
    s: &ScalingParams,
) -> Result<KineticState> {
    grid.check_phase(&f.f)?;
    grid.check_x(fluid_v)?;
    let w = truncate_velocity(fluid_v, s.chi_lambda);
    let wmax = w.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let cfl = dt * (wmax + grid.v_max) / grid.dv;
    if cfl > 1.0 + 1e-12 {
        return Err(Error::Cfl {
            stage: "drag",
            number: cfl,
            limit: 1.0,
        });
    }
    let nv = grid.nv;
    let lam = dt / grid.dv;
    let mut out = f.f.clone();
    let mut flux = vec![0.0; nv + 1];
    for i in 0..grid.nx {
        let col = f.column(grid, i);
        flux[0] = 0.0;
        flux[nv] = 0.0;
        for j in 0..nv - 1 {
            let a = w[i] - grid.xi_face(j);
            flux[j + 1] = a.max(0.0) * col[j] + a.min(0.0) * col[j + 1];
        }
        for j in 0..nv {
            out[grid.idx(i, j)] -= lam * (flux[j + 1] - flux[j]);
        }
    }
    Ok(KineticState { f: out, t: f.t })
}

/// Backward-Euler step of `d_t f = (1/eps) d_xi(d_xi f - (u - xi) f)` with
/// `u` frozen.
///
/// The face flux is `(e^{th} f_{j+1} - e^{-th} f_j) / dv` with
/// `th = dv (xi_{j+1/2} - u) / 2`, which vanishes identically on the
/// discrete Maxwellian centred at `u`. The system matrix is an M-matrix with
/// zero column sums, so the solve preserves positivity and per-cell mass.
pub fn fokker_planck_step(
    f: &KineticState,
    u: &[f64],
    dt: f64,
    grid: &PhaseGrid,
    s: &ScalingParams,
) -> Result<KineticState> {
    grid.check_phase(&f.f)?;
    grid.check_x(u)?;
    if !(dt > 0.0) {
        return Err(Error::Argument(format!("dt={dt} must be positive")));
    }
    let u = truncate_velocity(u, s.chi_lambda);
    let nv = grid.nv;
    let kappa = dt / (s.eps * grid.dv * grid.dv);
    let mut lower = vec![0.0; nv];
    let mut diag = vec![0.0; nv];
    let mut upper = vec![0.0; nv];
    let mut out = vec![0.0; f.f.len()];
    for i in 0..grid.nx {
        // e^{+th}, e^{-th} per interior face
        let mut ep = vec![0.0; nv - 1];
        let mut em = vec![0.0; nv - 1];
        for j in 0..nv - 1 {
            let th = 0.5 * grid.dv * (grid.xi_face(j) - u[i]);
            ep[j] = th.exp();
            em[j] = (-th).exp();
        }
        for j in 0..nv {
            let mut d = 1.0;
            if j + 1 < nv {
                d += kappa * em[j];
                upper[j] = -kappa * ep[j];
            } else {
                upper[j] = 0.0;
            }
            if j > 0 {
                d += kappa * ep[j - 1];
                lower[j] = -kappa * em[j - 1];
            } else {
                lower[j] = 0.0;
            }
            diag[j] = d;
        }
        solve_tridiagonal(
            &lower,
            &diag,
            &upper,
            f.column(grid, i),
            &mut out[i * nv..(i + 1) * nv],
        )?;
    }
    Ok(KineticState { f: out, t: f.t })
}

/// One Strang-split step of the full kinetic equation with the fluid
/// velocity frozen.
pub fn kinetic_step(
    f: &KineticState,
    fluid: &FluidState,
    dt: f64,
    grid: &PhaseGrid,
    s: &ScalingParams,
    bc: &BoundaryKernel,
) -> Result<(KineticState, KineticStepReport)> {
    let mass_before = f.mass(grid);
    let half = 0.5 * dt;
    let (f1, r1) = transport_step(f, grid, half, bc)?;
    let f2 = drag_step(&f1, &fluid.v, half, grid, s)?;
    let u = bulk_velocity(&f2, grid, s.vel_floor);
    let f3 = fokker_planck_step(&f2, &u, dt, grid, s)?;
    let f4 = drag_step(&f3, &fluid.v, half, grid, s)?;
    let (mut f5, r2) = transport_step(&f4, grid, half, bc)?;
    f5.t = f.t + dt;
    let mut report = KineticStepReport {
        mass_before,
        mass_after: f5.mass(grid),
        truncation_leak: r2.truncation_leak,
        ..Default::default()
    };
    report.absorb(&r1);
    report.absorb(&r2);
    Ok((f5, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{compute_moments, maxwellian};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_f(grid: &PhaseGrid, seed: u64) -> KineticState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        KineticState {
            f: (0..grid.phase_len()).map(|_| rng.gen_range(0.0..1.0)).collect(),
            t: 0.0,
        }
    }

    #[test]
    fn reflect_examples() {
        assert_eq!(reflect(&[1.0, 2.0], &[1.0, 0.0]), vec![-1.0, 2.0]);
        assert_eq!(reflect(&[2.0], &[1.0]), vec![-2.0]);
        let xi = [0.3, -1.7, 2.2];
        let r = [0.0, 0.6, 0.8];
        let once = reflect(&xi, &r);
        let twice = reflect(&once, &r);
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        assert!((norm(&once) - norm(&xi)).abs() < 1e-12);
        for k in 0..3 {
            assert!((twice[k] - xi[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn even_homogeneous_state_is_fixed_by_specular_transport() {
        let g = PhaseGrid::new(8, 16, 0.0, 1.0, 4.0).unwrap();
        let mut f = KineticState::zeros(&g);
        for i in 0..g.nx {
            for j in 0..g.nv {
                f.f[g.idx(i, j)] = (-g.xi(j).powi(2)).exp() + 0.1;
            }
        }
        let (next, rep) = transport_step(&f, &g, 0.01, &BoundaryKernel::Specular).unwrap();
        assert_eq!(next.f, f.f);
        assert_eq!(rep.wall_flux, [0.0, 0.0]);
    }

    #[test]
    fn unit_cfl_pulse_shifts_one_cell() {
        // two velocities +-1 so dt xi / dx = 1 for the positive one
        let g = PhaseGrid::new(10, 2, 0.0, 1.0, 2.0).unwrap();
        let mut f = KineticState::zeros(&g);
        f.f[g.idx(4, 1)] = 1.0;
        let (next, _) = transport_step(&f, &g, 0.1, &BoundaryKernel::Specular).unwrap();
        for i in 0..g.nx {
            let expect = if i == 5 { 1.0 } else { 0.0 };
            assert!((next.f[g.idx(i, 1)] - expect).abs() < 1e-15);
            assert_eq!(next.f[g.idx(i, 0)], 0.0);
        }
    }

    #[test]
    fn transport_cfl_error() {
        let g = PhaseGrid::new(10, 4, 0.0, 1.0, 2.0).unwrap();
        let f = KineticState::zeros(&g);
        assert!(matches!(
            transport_step(&f, &g, 0.07, &BoundaryKernel::Specular),
            Err(Error::Cfl { .. })
        ));
    }

    #[test]
    fn specular_mass_conserved_and_zero_flux() {
        let g = PhaseGrid::new(16, 16, 0.0, 1.0, 4.0).unwrap();
        let mut f = random_f(&g, 7);
        let m0 = f.mass(&g);
        for _ in 0..200 {
            let (next, rep) = transport_step(&f, &g, 0.015, &BoundaryKernel::Specular).unwrap();
            assert!(rep.peak_flux_rate[0] <= 1e-12 && rep.peak_flux_rate[1] <= 1e-12);
            assert!(next.min() >= -1e-14);
            f = next;
        }
        assert!((f.mass(&g) - m0).abs() < 1e-12);
    }

    #[test]
    fn diffuse_kernel_conditions_and_conservation() {
        let g = PhaseGrid::new(12, 24, 0.0, 1.0, 6.0).unwrap();
        let k = BoundaryKernel::diffuse(&g, 1.3).unwrap();
        let c = k.diffuse_checks(&g).unwrap();
        assert!(c.normalization_defect < 1e-12, "{c:?}");
        assert!(c.maxwellian_defect < 1e-12, "{c:?}");
        assert!(c.min_entry >= 0.0);
        let mut f = random_f(&g, 3);
        let m0 = f.mass(&g);
        for _ in 0..50 {
            let (next, rep) = transport_step(&f, &g, 0.01, &k).unwrap();
            assert!(rep.boundary_flux().abs() < 1e-13);
            f = next;
        }
        assert!((f.mass(&g) - m0).abs() < 1e-12);
        assert!(BoundaryKernel::diffuse(&g, -1.0).is_err());
    }

    #[test]
    fn dirichlet_mass_change_matches_flux() {
        let g = PhaseGrid::new(10, 8, 0.0, 1.0, 2.0).unwrap();
        let k = BoundaryKernel::dirichlet(&g, vec![0.5; 8]).unwrap();
        let f = random_f(&g, 11);
        let (_, rep) = transport_step(&f, &g, 0.02, &k).unwrap();
        assert!(rep.conservation_defect().abs() < 1e-14);
        assert!(rep.boundary_flux().abs() > 1e-6);
        assert!(BoundaryKernel::dirichlet(&g, vec![0.5; 7]).is_err());
    }

    #[test]
    fn drag_moves_pulse_toward_fluid_velocity() {
        let g = PhaseGrid::new(1, 64, 0.0, 1.0, 4.0).unwrap();
        let s = ScalingParams::new(1.0).unwrap();
        let mut f = KineticState::zeros(&g);
        let j0 = 48; // xi > 0
        f.f[j0] = 1.0;
        let xi0 = g.xi(j0);
        let mean = |f: &KineticState| {
            let m = compute_moments(f, &g, &s);
            m.u[0]
        };
        let mut cur = f;
        for _ in 0..20 {
            cur = drag_step(&cur, &[-1.0], 0.01, &g, &s).unwrap();
        }
        assert!(mean(&cur) < xi0);
        let mut cur = KineticState::zeros(&g);
        cur.f[10] = 1.0;
        let xi1 = g.xi(10);
        for _ in 0..20 {
            cur = drag_step(&cur, &[1.0], 0.01, &g, &s).unwrap();
        }
        assert!(mean(&cur) > xi1);
    }

    #[test]
    fn drag_preserves_evenness_and_mass() {
        let g = PhaseGrid::new(3, 32, 0.0, 1.0, 4.0).unwrap();
        let s = ScalingParams::new(1.0).unwrap();
        let mut f = random_f(&g, 5);
        for i in 0..g.nx {
            for j in 0..g.nv / 2 {
                f.f[g.idx(i, g.mirror(j))] = f.f[g.idx(i, j)];
            }
        }
        let m0 = f.mass(&g);
        let mut cur = f;
        for _ in 0..30 {
            cur = drag_step(&cur, &[0.0; 3], 0.02, &g, &s).unwrap();
        }
        for i in 0..g.nx {
            for j in 0..g.nv {
                let a = cur.f[g.idx(i, j)];
                let b = cur.f[g.idx(i, g.mirror(j))];
                assert!((a - b).abs() < 1e-14);
            }
        }
        assert!((cur.mass(&g) - m0).abs() < 1e-12);
        assert!(cur.min() >= -1e-14);
        assert!(matches!(
            drag_step(&cur, &[0.0; 3], 0.1, &g, &s),
            Err(Error::Cfl { .. })
        ));
    }

    #[test]
    fn fokker_planck_maxwellian_stationary() {
        let g = PhaseGrid::new(4, 64, 0.0, 1.0, 8.0).unwrap();
        let rho = [0.5, 1.0, 1.5, 2.0];
        let u = [-0.7, 0.0, 0.31, 1.1];
        let m = maxwellian(&rho, &u, &g);
        for eps in [1.0, 0.1, 0.01] {
            let s = ScalingParams::new(eps).unwrap();
            let next = fokker_planck_step(&m, &u, 0.01, &g, &s).unwrap();
            let err = m
                .f
                .iter()
                .zip(&next.f)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-10, "eps {eps}: {err}");
        }
    }

    #[test]
    fn fokker_planck_conserves_mass_and_positivity() {
        let g = PhaseGrid::new(5, 32, 0.0, 1.0, 6.0).unwrap();
        let s = ScalingParams::new(0.05).unwrap();
        let f = random_f(&g, 9);
        let u = bulk_velocity(&f, &g, s.vel_floor);
        let next = fokker_planck_step(&f, &u, 0.1, &g, &s).unwrap();
        let before = compute_moments(&f, &g, &s);
        let after = compute_moments(&next, &g, &s);
        for i in 0..g.nx {
            assert!((before.rho[i] - after.rho[i]).abs() < 1e-12);
        }
        assert!(next.min() >= 0.0);
    }

    #[test]
    fn kinetic_step_conserves_mass_with_specular_walls() {
        let g = PhaseGrid::new(16, 32, 0.0, 1.0, 6.0).unwrap();
        let s = ScalingParams::new(0.1).unwrap();
        let fluid = FluidState::new(
            vec![1.0; 16],
            g.x_centers().iter().map(|x| 0.3 * (std::f64::consts::PI * x).sin()).collect(),
            2.0,
        )
        .unwrap();
        let mut f = random_f(&g, 21);
        let m0 = f.mass(&g);
        for _ in 0..40 {
            let (next, rep) =
                kinetic_step(&f, &fluid, 0.005, &g, &s, &BoundaryKernel::Specular).unwrap();
            assert!(rep.peak_flux_rate.iter().all(|r| *r <= 1e-12));
            assert!(next.min() >= -1e-14);
            f = next;
        }
        assert!((f.mass(&g) - m0).abs() < 1e-12);
    }
}
