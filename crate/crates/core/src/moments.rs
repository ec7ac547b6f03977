//! Velocity moments and local Maxwellians.

use crate::grid::{KineticState, PhaseGrid, ScalingParams};

/// `(2 pi)^{-d/2}` for the grid dimension.
pub fn maxwellian_norm(dim: usize) -> f64 {
    (2.0 * std::f64::consts::PI).powf(-(dim as f64) / 2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub rho: Vec<f64>,
    pub mom: Vec<f64>,
    /// Regularized bulk velocity `mom / (rho + vel_floor)`.
    pub u: Vec<f64>,
    /// Second central moment with respect to `u`.
    pub stress: Vec<f64>,
    pub kin_energy: Vec<f64>,
}

pub fn compute_moments(f: &KineticState, grid: &PhaseGrid, s: &ScalingParams) -> MomentSet {
    let nx = grid.nx;
    let mut out = MomentSet {
        rho: vec![0.0; nx],
        mom: vec![0.0; nx],
        u: vec![0.0; nx],
        stress: vec![0.0; nx],
        kin_energy: vec![0.0; nx],
    };
    let xi = grid.xi_centers();
    for i in 0..nx {
        let col = f.column(grid, i);
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (fj, x) in col.iter().zip(&xi) {
            m0 += fj;
            m1 += x * fj;
            m2 += x * x * fj;
        }
        let rho = grid.dv * m0;
        let mom = grid.dv * m1;
        let denom = rho + s.vel_floor;
        let u = if denom > 0.0 { mom / denom } else { 0.0 };
        let stress = grid.dv
            * col
                .iter()
                .zip(&xi)
                .map(|(fj, x)| (x - u) * (x - u) * fj)
                .sum::<f64>();
        out.rho[i] = rho;
        out.mom[i] = mom;
        out.u[i] = u;
        out.stress[i] = stress;
        out.kin_energy[i] = 0.5 * grid.dv * m2;
    }
    out
}

/// Bulk velocity per spatial cell, regularized as in [`compute_moments`].
pub fn bulk_velocity(f: &KineticState, grid: &PhaseGrid, vel_floor: f64) -> Vec<f64> {
    (0..grid.nx)
        .map(|i| {
            let col = f.column(grid, i);
            let mut m0 = 0.0;
            let mut m1 = 0.0;
            for (j, fj) in col.iter().enumerate() {
                m0 += fj;
                m1 += grid.xi(j) * fj;
            }
            let denom = grid.dv * m0 + vel_floor;
            if denom > 0.0 {
                grid.dv * m1 / denom
            } else {
                0.0
            }
        })
        .collect()
}

/// Pointwise `rho (2 pi)^{-d/2} exp(-|xi - u|^2 / 2)` at the cell centres.
pub fn maxwellian(rho: &[f64], u: &[f64], grid: &PhaseGrid) -> KineticState {
    let norm = maxwellian_norm(grid.dim);
    let mut f = vec![0.0; grid.phase_len()];
    for i in 0..grid.nx {
        if rho[i] == 0.0 {
            continue;
        }
        for j in 0..grid.nv {
            let c = grid.xi(j) - u[i];
            f[grid.idx(i, j)] = rho[i] * norm * (-0.5 * c * c).exp();
        }
    }
    KineticState { f, t: 0.0 }
}

/// `v 1_{|v| <= lambda}` applied entrywise.
pub fn truncate_velocity(u: &[f64], lambda: f64) -> Vec<f64> {
    u.iter()
        .map(|&x| if x.abs() <= lambda { x } else { 0.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(nv: usize, v_max: f64) -> PhaseGrid {
        PhaseGrid::new(3, nv, 0.0, 1.0, v_max).unwrap()
    }

    #[test]
    fn maxwellian_peak() {
        let g = PhaseGrid::new(1, 2, 0.0, 1.0, 1e-9).unwrap();
        // xi centres are +-v_max/2, essentially zero
        let m = maxwellian(&[1.0], &[0.0], &g);
        assert!((m.f[0] - 0.398_942_280_401_432_7).abs() < 1e-12);
        let g = grid(8, 4.0);
        let m = maxwellian(&[0.0, 1.0, 0.0], &[0.3, 0.0, 0.0], &g);
        assert!(m.column(&g, 0).iter().all(|&x| x == 0.0));
        assert!(m.column(&g, 2).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn zero_distribution() {
        let g = grid(16, 4.0);
        let m = compute_moments(&KineticState::zeros(&g), &g, &ScalingParams::new(1.0).unwrap());
        for v in [&m.rho, &m.mom, &m.u, &m.stress, &m.kin_energy] {
            assert!(v.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn maxwellian_moments_recovered() {
        let s = ScalingParams::with_regularization(1.0, 0.0, f64::INFINITY).unwrap();
        let g = grid(256, 10.0);
        let rho = [0.5, 1.0, 2.0];
        let u = [-1.2, 0.0, 0.7];
        let m = compute_moments(&maxwellian(&rho, &u, &g), &g, &s);
        for i in 0..3 {
            // Gaussian moments: rho, rho u, rho
            assert!((m.rho[i] - rho[i]).abs() < 1e-9 * rho[i]);
            assert!((m.mom[i] - rho[i] * u[i]).abs() < 1e-9);
            assert!((m.stress[i] - rho[i]).abs() < 1e-9);
            assert!((m.kin_energy[i] - 0.5 * rho[i] * (1.0 + u[i] * u[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn maxwellian_moment_error_decays_at_least_second_order() {
        let s = ScalingParams::with_regularization(1.0, 0.0, f64::INFINITY).unwrap();
        let rho = [1.3];
        let u = [0.37];
        let mut errs = Vec::new();
        for nv in [6usize, 12, 24] {
            let g = PhaseGrid::new(1, nv, 0.0, 1.0, 9.0).unwrap();
            let m = compute_moments(&maxwellian(&rho, &u, &g), &g, &s);
            let e = (m.rho[0] - rho[0]).abs()
                + (m.mom[0] - rho[0] * u[0]).abs()
                + (m.stress[0] - rho[0]).abs();
            errs.push(e.max(1e-15));
        }
        for w in errs.windows(2) {
            if w[0] > 1e-13 {
                let order = (w[0] / w[1]).log2();
                assert!(order >= 1.9, "order {order} from {errs:?}");
            }
        }
        assert!(errs[0] > 1e-6, "coarsest level should resolve an error: {errs:?}");
    }

    #[test]
    fn shift_by_grid_multiple() {
        let g = PhaseGrid::new(1, 32, 0.0, 1.0, 8.0).unwrap();
        let s = ScalingParams::new(1.0).unwrap();
        let base: Vec<f64> = (0..32)
            .map(|j| if (8..20).contains(&j) { 1.0 + j as f64 * 0.1 } else { 0.0 })
            .collect();
        let k = 3;
        let mut shifted = vec![0.0; 32];
        shifted[k..].copy_from_slice(&base[..32 - k]);
        let a = k as f64 * g.dv;
        let mb = compute_moments(&KineticState { f: base, t: 0.0 }, &g, &s);
        let ms = compute_moments(&KineticState { f: shifted, t: 0.0 }, &g, &s);
        assert!((ms.mom[0] - (mb.rho[0] * a + mb.mom[0])).abs() < 1e-12);
    }

    #[test]
    fn truncation() {
        assert_eq!(truncate_velocity(&[0.5], 1.0), vec![0.5]);
        assert_eq!(truncate_velocity(&[2.0], 1.0), vec![0.0]);
        assert_eq!(truncate_velocity(&[-2.0, 1.0], 1.0), vec![0.0, 1.0]);
    }

    proptest! {
        #[test]
        fn truncation_idempotent(u in prop::collection::vec(-5.0f64..5.0, 10), lam in 0.1f64..4.0) {
            let once = truncate_velocity(&u, lam);
            prop_assert_eq!(truncate_velocity(&once, lam), once);
        }

        #[test]
        fn moments_linear(a in prop::collection::vec(0.0f64..2.0, 48),
                          b in prop::collection::vec(0.0f64..2.0, 48),
                          c in 0.0f64..3.0) {
            let g = grid(16, 4.0);
            let s = ScalingParams::with_regularization(1.0, 0.0, f64::INFINITY).unwrap();
            let ma = compute_moments(&KineticState { f: a.clone(), t: 0.0 }, &g, &s);
            let mb = compute_moments(&KineticState { f: b.clone(), t: 0.0 }, &g, &s);
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| c * x + y).collect();
            let ms = compute_moments(&KineticState { f: sum, t: 0.0 }, &g, &s);
            for i in 0..3 {
                prop_assert!((ms.rho[i] - (c * ma.rho[i] + mb.rho[i])).abs() < 1e-10);
                prop_assert!((ms.mom[i] - (c * ma.mom[i] + mb.mom[i])).abs() < 1e-10);
                prop_assert!((ms.kin_energy[i] - (c * ma.kin_energy[i] + mb.kin_energy[i])).abs() < 1e-10);
            }
        }

        #[test]
        fn stress_galilean(a in prop::collection::vec(0.01f64..2.0, 48)) {
            let g = grid(16, 4.0);
            let s = ScalingParams::with_regularization(1.0, 0.0, f64::INFINITY).unwrap();
            let m = compute_moments(&KineticState { f: a, t: 0.0 }, &g, &s);
            for i in 0..3 {
                let second = 2.0 * m.kin_energy[i];
                let alt = second - m.rho[i] * m.u[i] * m.u[i];
                prop_assert!((m.stress[i] - alt).abs() < 1e-10 * (1.0 + second));
                prop_assert!(m.stress[i] >= 0.0);
            }
        }
    }
}
