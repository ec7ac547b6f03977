use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use vfpns::config::SolverMode;
use vfpns::harness::{self, LimitMode};
use vfpns::{Error, ExperimentConfig, Result};

#[derive(Parser)]
#[command(name = "vfpns", version, about = "Kinetic-fluid solver and hydrodynamic-limit diagnostics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Direct,
    Picard,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the coupled kinetic-fluid system for one eps.
    SimulateKinetic {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Output directory; defaults to the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the two-phase limit system.
    SimulateLimit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "direct")]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep `eps_list` against one limit run and write the convergence table.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run whatever `solver_mode` in the config asks for.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-audit the entropy series of a finished coupled run.
    CheckEntropy {
        #[arg(long)]
        run: PathBuf,
    },
}

enum Outcome {
    Ok,
    AuditFailed,
}

fn load(path: &Path, out: Option<PathBuf>) -> Result<(ExperimentConfig, PathBuf)> {
    let cfg = ExperimentConfig::load(path)?;
    let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
    std::fs::create_dir_all(&dir)?;
    Ok((cfg, dir))
}

fn coupled(cfg: &ExperimentConfig, eps: f64, dir: &Path) -> Result<Outcome> {
    let t0 = Instant::now();
    let run = harness::run_coupled(cfg, eps, None, Some(dir))?;
    let secs = t0.elapsed().as_secs_f64();
    harness::emit_coupled(dir, cfg, &run, secs)?;
    let b = &run.books;
    println!(
        "eps={eps} steps={} dt={:.3e} mass drift={:.3e} wall flux={:.3e} time={secs:.2}s",
        run.time.steps,
        run.time.dt,
        (b.kinetic_mass - b.kinetic_mass0).abs(),
        b.max_wall_flux
    );
    if b.max_truncation_leak > cfg.leak_tolerance {
        eprintln!(
            "warning: {:.3e} mass reached the velocity cutoff (tolerance {:.1e})",
            b.max_truncation_leak, cfg.leak_tolerance
        );
    }
    report_audit(&run.audit)
}

fn report_audit(a: &vfpns::entropy::AuditRecord) -> Result<Outcome> {
    println!(
        "entropy audit: slack={:.3e} dimensional={:.3e} min D1={:.3e} min D2={:.3e} -> {}",
        a.slack,
        a.slack_dimensional,
        a.min_d1,
        a.min_d2,
        if a.passed { "pass" } else { "FAIL" }
    );
    Ok(if a.passed { Outcome::Ok } else { Outcome::AuditFailed })
}

fn limit(cfg: &ExperimentConfig, mode: LimitMode, dir: &Path) -> Result<Outcome> {
    let t0 = Instant::now();
    let run = harness::run_limit(cfg, mode, Some(dir))?;
    let secs = t0.elapsed().as_secs_f64();
    harness::emit_limit(dir, cfg, &run, secs)?;
    println!(
        "{mode:?}: steps={} dt={:.3e} rho mass drift={:.3e} min n={:.6} time={secs:.2}s",
        run.time.steps,
        run.time.dt,
        (run.rho_mass - run.rho_mass0).abs(),
        run.min_one_plus_h
    );
    for it in &run.iterations {
        println!("  iterate {:2}: cauchy={:.3e} ratio={:.3e}", it.m, it.cauchy_l2, it.contraction_ratio);
    }
    Ok(Outcome::Ok)
}

fn converge(cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome> {
    let t0 = Instant::now();
    let res = harness::run_convergence(cfg, Some(dir))?;
    let secs = t0.elapsed().as_secs_f64();
    harness::emit_convergence(dir, cfg, &res, secs)?;
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "eps", "sup_H", "L1 rho", "L1 n", "f-M L1");
    for r in &res.rows {
        println!(
            "{:>8} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            r.eps, r.sup_h, r.sup_l1_rho, r.sup_l1_n, r.f_to_m_l1
        );
    }
    match res.slope {
        Some(s) => println!("slope={s:.3} monotone={}", res.monotone),
        None => println!("degenerate sweep: sup_H vanishes, no slope fitted"),
    }
    let failed = res.runs.iter().filter(|r| !r.audit.passed).count();
    if failed > 0 {
        eprintln!("{failed} run(s) failed the entropy audit");
        return Ok(Outcome::AuditFailed);
    }
    Ok(Outcome::Ok)
}

fn dispatch(cmd: Cmd) -> Result<Outcome> {
    match cmd {
        Cmd::SimulateKinetic { config, eps, out } => {
            let (cfg, dir) = load(&config, out)?;
            if !(eps > 0.0) {
                return Err(Error::Config(format!("eps={eps} must be positive")));
            }
            coupled(&cfg, eps, &dir)
        }
        Cmd::SimulateLimit { config, mode, out } => {
            let (cfg, dir) = load(&config, out)?;
            let mode = match mode {
                Mode::Direct => LimitMode::Direct,
                Mode::Picard => LimitMode::Picard,
            };
            limit(&cfg, mode, &dir)
        }
        Cmd::Converge { config, out } => {
            let (cfg, dir) = load(&config, out)?;
            converge(&cfg, &dir)
        }
        Cmd::Run { config, out } => {
            let (cfg, dir) = load(&config, out)?;
            match cfg.solver_mode {
                SolverMode::LimitDirect => limit(&cfg, LimitMode::Direct, &dir),
                SolverMode::LimitPicard => limit(&cfg, LimitMode::Picard, &dir),
                SolverMode::Coupled if cfg.eps_list.len() >= 3 => converge(&cfg, &dir),
                SolverMode::Coupled => {
                    let mut outcome = Outcome::Ok;
                    for &eps in &cfg.eps_list {
                        let sub = dir.join(format!("eps_{eps}"));
                        std::fs::create_dir_all(&sub)?;
                        if let Outcome::AuditFailed = coupled(&cfg, eps, &sub)? {
                            outcome = Outcome::AuditFailed;
                        }
                    }
                    Ok(outcome)
                }
            }
        }
        Cmd::CheckEntropy { run } => report_audit(&harness::check_entropy(&run)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::AuditFailed) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_solver_failure() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
