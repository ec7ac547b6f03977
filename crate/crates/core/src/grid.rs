//! Phase-space grid, state containers, quadrature and discrete norms.
//!
//! Fields on the phase grid are stored row-major in space: entry `(i, j)`
//! (spatial cell `i`, velocity cell `j`) lives at `i * nv + j`. All
//! reductions run in index order so results do not depend on scheduling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform cell-centred discretization of `[x_lo, x_hi] x [-v_max, v_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub nx: usize,
    pub nv: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub v_max: f64,
    pub dx: f64,
    pub dv: f64,
    pub dim: usize,
}

impl PhaseGrid {
    pub fn new(nx: usize, nv: usize, x_lo: f64, x_hi: f64, v_max: f64) -> Result<Self> {
        if nx == 0 || nv == 0 {
            return Err(Error::Grid(format!("nx={nx} and nv={nv} must be positive")));
        }
        if !nv.is_multiple_of(2) {
            return Err(Error::Grid(format!("nv={nv} must be even")));
        }
        if !(x_hi > x_lo) || !x_lo.is_finite() || !x_hi.is_finite() {
            return Err(Error::Grid(format!("empty domain [{x_lo}, {x_hi}]")));
        }
        if !(v_max > 0.0) || !v_max.is_finite() {
            return Err(Error::Grid(format!("v_max={v_max} must be positive")));
        }
        Ok(Self {
            nx,
            nv,
            x_lo,
            x_hi,
            v_max,
            dx: (x_hi - x_lo) / nx as f64,
            dv: 2.0 * v_max / nv as f64,
            dim: 1,
        })
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_lo + (i as f64 + 0.5) * self.dx
    }

    /// Velocity at the centre of cell `j`. Exactly odd under [`Self::mirror`].
    #[inline]
    pub fn xi(&self, j: usize) -> f64 {
        let half = self.nv / 2;
        if j >= half {
            ((j - half) as f64 + 0.5) * self.dv
        } else {
            -(((half - 1 - j) as f64 + 0.5) * self.dv)
        }
    }

    /// Velocity at the face between cells `j` and `j + 1`.
    #[inline]
    pub fn xi_face(&self, j: usize) -> f64 {
        (j as f64 + 1.0 - (self.nv / 2) as f64) * self.dv
    }

    /// Index of the velocity cell holding `-xi(j)`.
    #[inline]
    pub fn mirror(&self, j: usize) -> usize {
        self.nv - 1 - j
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.nv + j
    }

    pub fn phase_len(&self) -> usize {
        self.nx * self.nv
    }

    pub fn length(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    /// Outward unit normal at the left (`0`) and right (`1`) wall.
    pub fn wall_normal(&self, wall: usize) -> f64 {
        if wall == 0 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn x_centers(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn xi_centers(&self) -> Vec<f64> {
        (0..self.nv).map(|j| self.xi(j)).collect()
    }

    /// Midpoint rule over velocity: `dv * sum(field)`.
    pub fn quad_v(&self, field: &[f64]) -> f64 {
        debug_assert_eq!(field.len(), self.nv);
        self.dv * field.iter().sum::<f64>()
    }

    /// Midpoint rule over space: `dx * sum(field)`.
    pub fn quad_x(&self, field: &[f64]) -> f64 {
        debug_assert_eq!(field.len(), self.nx);
        self.dx * field.iter().sum::<f64>()
    }

    /// Midpoint rule over phase space.
    pub fn quad_phase(&self, field: &[f64]) -> f64 {
        debug_assert_eq!(field.len(), self.phase_len());
        self.dx * self.dv * field.iter().sum::<f64>()
    }

    /// Check a spatial field has `nx` entries.
    pub fn check_x(&self, field: &[f64]) -> Result<()> {
        check_len(field, self.nx)
    }

    pub fn check_phase(&self, field: &[f64]) -> Result<()> {
        check_len(field, self.phase_len())
    }

    pub fn l1_x(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.check_x(a)?;
        l1_distance(a, b, self.dx)
    }

    pub fn l2_x(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.check_x(a)?;
        l2_distance(a, b, self.dx)
    }

    pub fn l1_phase(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.check_phase(a)?;
        l1_distance(a, b, self.dx * self.dv)
    }
}

pub(crate) fn check_len(field: &[f64], expected: usize) -> Result<()> {
    if field.len() != expected {
        return Err(Error::Shape {
            expected,
            got: field.len(),
        });
    }
    Ok(())
}

/// Weighted discrete L1 norm of `a - b`.
pub fn l1_distance(a: &[f64], b: &[f64], weight: f64) -> Result<f64> {
    check_len(b, a.len())?;
    Ok(weight * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

/// Weighted discrete L2 norm of `a - b`.
pub fn l2_distance(a: &[f64], b: &[f64], weight: f64) -> Result<f64> {
    check_len(b, a.len())?;
    let ss: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((weight * ss).sqrt())
}

/// Nonnegative distribution on the phase grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticState {
    pub f: Vec<f64>,
    pub t: f64,
}

impl KineticState {
    pub fn zeros(grid: &PhaseGrid) -> Self {
        Self {
            f: vec![0.0; grid.phase_len()],
            t: 0.0,
        }
    }

    /// Velocity column at spatial cell `i`.
    pub fn column(&self, grid: &PhaseGrid, i: usize) -> &[f64] {
        &self.f[i * grid.nv..(i + 1) * grid.nv]
    }

    pub fn mass(&self, grid: &PhaseGrid) -> f64 {
        grid.quad_phase(&self.f)
    }

    pub fn min(&self) -> f64 {
        self.f.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Isentropic viscous gas with pressure `n^gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidState {
    pub n: Vec<f64>,
    pub v: Vec<f64>,
    pub gamma: f64,
    pub mu: f64,
    pub t: f64,
}

impl FluidState {
    pub fn new(n: Vec<f64>, v: Vec<f64>, gamma: f64) -> Result<Self> {
        check_len(&v, n.len())?;
        if !(gamma > 1.0) {
            return Err(Error::Argument(format!("gamma={gamma} must exceed 1")));
        }
        if let Some((cell, &value)) = n.iter().enumerate().find(|(_, &x)| !(x > 0.0)) {
            return Err(Error::Vacuum {
                stage: "fluid state",
                cell,
                value,
            });
        }
        Ok(Self {
            n,
            v,
            gamma,
            mu: 1.0,
            t: 0.0,
        })
    }

    pub fn mass(&self, grid: &PhaseGrid) -> f64 {
        grid.quad_x(&self.n)
    }

    pub fn momentum(&self, grid: &PhaseGrid) -> f64 {
        grid.dx * self.n.iter().zip(&self.v).map(|(n, v)| n * v).sum::<f64>()
    }
}

/// Fields of the two-phase limit system: particles `(rho, u)` and gas `(n, v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPhaseState {
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub fluid: FluidState,
    pub t: f64,
}

impl TwoPhaseState {
    pub fn new(rho: Vec<f64>, u: Vec<f64>, fluid: FluidState) -> Result<Self> {
        check_len(&rho, fluid.n.len())?;
        check_len(&u, fluid.n.len())?;
        if let Some((cell, &value)) = rho.iter().enumerate().find(|(_, &x)| !(x > 0.0)) {
            return Err(Error::Vacuum {
                stage: "two-phase state",
                cell,
                value,
            });
        }
        let t = fluid.t;
        Ok(Self { rho, u, fluid, t })
    }

    pub fn nx(&self) -> usize {
        self.rho.len()
    }
}

/// Scaling `sigma = alpha = 1/eps` plus the two regularization devices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub eps: f64,
    /// Floor in `u = rho u / (rho + vel_floor)`.
    pub vel_floor: f64,
    /// Threshold of the velocity cut-off `v 1_{|v| <= lambda}`.
    pub chi_lambda: f64,
}

impl ScalingParams {
    pub const DEFAULT_VEL_FLOOR: f64 = 1e-12;

    pub fn new(eps: f64) -> Result<Self> {
        Self::with_regularization(eps, Self::DEFAULT_VEL_FLOOR, f64::INFINITY)
    }

    pub fn with_regularization(eps: f64, vel_floor: f64, chi_lambda: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Argument(format!("eps={eps} must be positive")));
        }
        if !(vel_floor >= 0.0) {
            return Err(Error::Argument(format!("vel_floor={vel_floor} must be >= 0")));
        }
        if !(chi_lambda > 0.0) {
            return Err(Error::Argument(format!("lambda={chi_lambda} must be > 0")));
        }
        Ok(Self {
            eps,
            vel_floor,
            chi_lambda,
        })
    }
}

/// Solve a tridiagonal system by the Thomas algorithm.
///
/// `lower[0]` and `upper[n-1]` are ignored. Intended for the diagonally
/// dominant systems produced by the implicit substeps.
pub(crate) fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
    out: &mut [f64],
) -> Result<()> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::Singular { row: 0 });
    }
    c[0] = if n > 1 { upper[0] / denom } else { 0.0 };
    d[0] = rhs[0] / denom;
    for k in 1..n {
        denom = diag[k] - lower[k] * c[k - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Singular { row: k });
        }
        c[k] = if k + 1 < n { upper[k] / denom } else { 0.0 };
        d[k] = (rhs[k] - lower[k] * d[k - 1]) / denom;
    }
    out[n - 1] = d[n - 1];
    for k in (0..n - 1).rev() {
        out[k] = d[k] - c[k] * out[k + 1];
    }
    Ok(())
}
