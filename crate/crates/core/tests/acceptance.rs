//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vfpns::entropy::{check_pressure_bounds, relative_entropy};
use vfpns::harness::{self, LimitMode};
use vfpns::kinetic::fokker_planck_step;
use vfpns::limit::{
    advect_density, density_positivity_check, path_distance, picard_solve, to_symhyp,
    two_phase_step, PicardConfig,
};
use vfpns::moments::maxwellian;
use vfpns::{ExperimentConfig, FluidState, PhaseGrid, ScalingParams, TwoPhaseState};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn wave_config(n: usize, eps_list: &str, t_final: f64) -> ExperimentConfig {
    ExperimentConfig::from_json_str(&format!(
        r#"{{"nx": {n}, "nv": {n}, "eps_list": {eps_list}, "t_final": {t_final},
            "cfl": 0.4, "initial_profile": "local_maxwellian_wave"}}"#
    ))
    .expect("config")
}

struct FirstRun {
    coupled: harness::CoupledRun,
    direct: harness::LimitRun,
    picard: harness::LimitRun,
    seconds: f64,
}

fn first_run() -> FirstRun {
    let cfg = wave_config(64, "[0.5]", 1.0);
    let t0 = Instant::now();
    let coupled = harness::run_coupled(&cfg, 0.5, None, None).expect("coupled run");
    let seconds = t0.elapsed().as_secs_f64();
    FirstRun {
        coupled,
        direct: harness::run_limit(&cfg, LimitMode::Direct, None).expect("direct limit run"),
        picard: harness::run_limit(&cfg, LimitMode::Picard, None).expect("picard limit run"),
        seconds,
    }
}

fn entropy_inequality(r: &FirstRun) -> Outcome {
    let a = &r.coupled.audit;
    outcome(
        a.passed && r.seconds < 60.0,
        format!(
            "slack {:.3e}, min D1 {:.3e}, min D2 {:.3e}, {:.2} s",
            a.slack, a.min_d1, a.min_d2, r.seconds
        ),
    )
}

fn conservation(r: &FirstRun) -> Outcome {
    let b = &r.coupled.books;
    let kin = (b.kinetic_mass - b.kinetic_mass0).abs();
    let fl = (b.fluid_mass - b.fluid_mass0).abs();
    let lim = (r.direct.rho_mass - r.direct.rho_mass0).abs();
    let lim_n = (r.direct.n_mass - r.direct.n_mass0).abs();
    let exch = b.max_exchange_defect.max(r.direct.max_exchange_defect);
    outcome(
        kin <= 1e-10 && fl <= 1e-10 && lim <= 1e-10 && lim_n <= 1e-10 && exch <= 1e-12,
        format!(
            "kinetic {kin:.2e}, fluid {fl:.2e}, limit rho {lim:.2e}, limit n {lim_n:.2e}, exchange {exch:.2e}"
        ),
    )
}

fn specular_flux(r: &FirstRun) -> Outcome {
    let w = r.coupled.books.max_wall_flux;
    outcome(w <= 1e-12, format!("max wall mass flux {w:.2e}"))
}

fn maxwellian_stationarity() -> Outcome {
    let grid = PhaseGrid::new(32, 64, 0.0, 1.0, 8.0).unwrap();
    let xs = grid.x_centers();
    let rho: Vec<f64> = xs.iter().map(|x| 1.0 + 0.3 * (2.0 * PI * x).sin()).collect();
    let u: Vec<f64> = xs.iter().map(|x| 0.8 * (PI * x).cos()).collect();
    let m = maxwellian(&rho, &u, &grid);
    let mut worst: f64 = 0.0;
    for eps in [1.0, 0.1, 0.01] {
        let s = ScalingParams::new(eps).unwrap();
        for dt in [1e-3, 1e-2] {
            let out = fokker_planck_step(&m, &u, dt, &grid, &s).unwrap();
            for (a, b) in out.f.iter().zip(&m.f) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    outcome(worst <= 1e-10, format!("max per-step change {worst:.2e}"))
}

fn pressure_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let t0 = Instant::now();
    let (mut worst_p, mut worst_case) = (f64::INFINITY, f64::INFINITY);
    let mut literal_failures = 0;
    for _ in 0..10_000 {
        let gamma = rng.gen_range(1.05..3.0);
        let y_min = rng.gen_range(0.1..1.0);
        let y_max = y_min * rng.gen_range(1.0..5.0);
        let y = rng.gen_range(y_min..=y_max);
        let x = (rng.gen_range(-4.0f64..4.0)).exp() * y;
        let b = check_pressure_bounds(x, y, gamma, y_min, y_max).unwrap();
        worst_p = worst_p.min(b.p_margin);
        worst_case = worst_case.min(b.case_split_margin);
        if b.case_split_literal_margin < -1e-12 {
            literal_failures += 1;
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        worst_p >= -1e-12 && worst_case >= -1e-12 && secs < 1.0,
        format!(
            "min P margin {worst_p:.2e}, min case-split margin {worst_case:.2e}, \
             verbatim constants fail at {literal_failures}/10000, {secs:.3} s"
        ),
    )
}

/// `E(U)` in conserved variables `(rho, rho u, n, n v)`.
fn entropy_conserved(w: [f64; 4], gamma: f64) -> f64 {
    let [rho, m, n, q] = w;
    m * m / (2.0 * rho) + rho * rho.ln() + q * q / (2.0 * n) + n.powf(gamma) / (gamma - 1.0)
}

fn entropy_gradient(w: [f64; 4], gamma: f64) -> [f64; 4] {
    let [rho, m, n, q] = w;
    let (u, v) = (m / rho, q / n);
    [
        -0.5 * u * u + rho.ln() + 1.0,
        u,
        -0.5 * v * v + gamma / (gamma - 1.0) * n.powf(gamma - 1.0),
        v,
    ]
}

fn bregman_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let grid = PhaseGrid::new(8, 2, 0.0, 1.0, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..1_000 {
        let gamma = rng.gen_range(1.1..3.0);
        let mut state = || {
            let rho: Vec<f64> = (0..8).map(|_| rng.gen_range(0.2..3.0)).collect();
            let u: Vec<f64> = (0..8).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let n: Vec<f64> = (0..8).map(|_| rng.gen_range(0.2..3.0)).collect();
            let v: Vec<f64> = (0..8).map(|_| rng.gen_range(-2.0..2.0)).collect();
            TwoPhaseState::new(rho, u, FluidState::new(n, v, gamma).unwrap()).unwrap()
        };
        let bar = state();
        let refr = state();
        let mut oracle = 0.0;
        for i in 0..8 {
            let wb = [bar.rho[i], bar.rho[i] * bar.u[i], bar.fluid.n[i], bar.fluid.n[i] * bar.fluid.v[i]];
            let wr = [refr.rho[i], refr.rho[i] * refr.u[i], refr.fluid.n[i], refr.fluid.n[i] * refr.fluid.v[i]];
            let g = entropy_gradient(wr, gamma);
            let lin: f64 = (0..4).map(|k| g[k] * (wb[k] - wr[k])).sum();
            oracle += entropy_conserved(wb, gamma) - entropy_conserved(wr, gamma) - lin;
        }
        oracle *= grid.dx;
        let h = relative_entropy(&bar, &refr, &grid).unwrap();
        worst = worst.max((h - oracle).abs());
    }
    outcome(worst <= 1e-12, format!("max |H - Bregman| {worst:.2e}"))
}

fn convergence() -> (Outcome, Outcome) {
    let cfg = wave_config(128, "[0.4, 0.2, 0.1, 0.05]", 0.5);
    let t0 = Instant::now();
    let res = harness::run_convergence(&cfg, None).expect("convergence sweep");
    let secs = t0.elapsed().as_secs_f64();
    let sup_h: Vec<String> = res.rows.iter().map(|r| format!("{:.3e}", r.sup_h)).collect();
    let slope = res.slope.unwrap_or(f64::NAN);
    let rate = outcome(
        slope >= 0.4 && res.monotone && secs < 600.0,
        format!(
            "slope {slope:.3}, monotone {}, sup_H [{}], {secs:.1} s",
            res.monotone,
            sup_h.join(", ")
        ),
    );
    let ratios: Vec<String> = res.f_to_m_ratios.iter().map(|r| format!("{r:.3}")).collect();
    let max_ratio = res.f_to_m_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let maxw = outcome(
        max_ratio <= 0.9 && res.min_ck_margin >= 0.0,
        format!(
            "f-to-M ratios [{}], min CK margin {:.3e}",
            ratios.join(", "),
            res.min_ck_margin
        ),
    );
    (rate, maxw)
}

fn small_limit_data(grid: &PhaseGrid, amp: f64) -> TwoPhaseState {
    let xs = grid.x_centers();
    let rho = xs.iter().map(|x| 1.0 + amp * (PI * x).cos()).collect();
    let u = xs.iter().map(|x| amp * (PI * x).sin().powi(2) * (2.0 * PI * x).sin()).collect();
    let n = xs.iter().map(|x| 1.0 - amp * (2.0 * PI * x).cos()).collect();
    let v = xs.iter().map(|x| -amp * (PI * x).sin().powi(2)).collect();
    TwoPhaseState::new(rho, u, FluidState::new(n, v, 2.0).unwrap()).unwrap()
}

fn picard_contraction() -> (Outcome, f64) {
    let grid = PhaseGrid::new(128, 2, 0.0, 1.0, 1.0).unwrap();
    let data = small_limit_data(&grid, 0.05);
    let dt = 0.25 * grid.dx;
    let cfg = PicardConfig::new(grid, 0.25, dt).unwrap();
    let (it, reps) = picard_solve(&to_symhyp(&data).unwrap(), &cfg, 10).unwrap();
    let by_m = |m: usize| reps.iter().find(|r| r.m == m).map(|r| r.cauchy_l2).unwrap();
    let contracts = (2..=8).all(|m| by_m(m + 1) <= 0.9 * by_m(m));
    let mut direct = vec![data.clone()];
    for _ in 0..cfg.steps {
        direct.push(two_phase_step(direct.last().unwrap(), cfg.dt, &grid).unwrap());
    }
    let dist = path_distance(&it.path, &direct, &grid).unwrap();
    let tol = 10.0 * (cfg.dt + grid.dx);
    let min_h = it
        .path
        .iter()
        .flat_map(|s| s.h.iter())
        .fold(f64::INFINITY, |a, &h| a.min(1.0 + h));
    let cauchy: Vec<String> = (2..=9).map(|m| format!("{:.1e}", by_m(m))).collect();
    (
        outcome(
            contracts && dist <= tol,
            format!(
                "cauchy m=2..9 [{}], distance to direct {dist:.3e} (tolerance {tol:.3e})",
                cauchy.join(", ")
            ),
        ),
        min_h,
    )
}

fn positivity(r: &FirstRun, picard_min: f64) -> Outcome {
    let grid = PhaseGrid::new(400, 2, 0.0, 1.0, 1.0).unwrap();
    let h0: Vec<f64> = grid
        .x_centers()
        .iter()
        .map(|x| 0.05 * (-((x - 0.5) / 0.15).powi(2)).exp())
        .collect();
    let dt = 0.5 * grid.dx;
    let steps = (1.0 / dt).round() as usize;
    let (hp, vp) = advect_density(&h0, |x, _| -(x - 0.5), dt, steps, &grid).unwrap();
    let starts: Vec<usize> = (140..260).collect();
    let rep = density_positivity_check(&hp, &vp, dt, &grid, &starts).unwrap();
    let coupled_min = r.coupled.fluid.n.iter().copied().fold(f64::INFINITY, f64::min);
    let min_all = rep
        .min_one_plus_h
        .min(r.direct.min_one_plus_h)
        .min(r.picard.min_one_plus_h)
        .min(coupled_min)
        .min(picard_min);
    outcome(
        min_all > 0.0 && rep.max_deviation <= 0.05,
        format!(
            "min(1+h) {min_all:.4} over all runs, compression deviation {:.3}%",
            100.0 * rep.max_deviation
        ),
    )
}

fn main() {
    let r = first_run();
    let (picard, picard_min) = picard_contraction();
    let (rate, maxw) = convergence();
    let results = [
        ("entropy inequality", entropy_inequality(&r)),
        ("conservation", conservation(&r)),
        ("specular zero flux", specular_flux(&r)),
        ("Maxwellian stationarity", maxwellian_stationarity()),
        ("relative-pressure bounds", pressure_bounds()),
        ("relative-entropy Bregman identity", bregman_identity()),
        ("hydrodynamic rate", rate),
        ("kinetic to Maxwellian convergence", maxw),
        ("Picard contraction", picard),
        ("density positivity", positivity(&r, picard_min)),
    ];
    let mut failed = 0;
    for (k, (name, o)) in results.iter().enumerate() {
        println!(
            "{} criterion {:2} ({name}): {}",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!("{}/{} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
