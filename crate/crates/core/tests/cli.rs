use std::fs;
use std::path::Path;
use std::process::Command;

use vfpns::harness::EntropySeries;
use vfpns::io;

const SMALL: &str = r#"{"nx": 16, "nv": 24, "eps_list": [0.4, 0.2, 0.1], "t_final": 0.05,
    "samples": 4, "initial_profile": "local_maxwellian_wave"}"#;

fn vfpns(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_vfpns")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn kinetic_run_then_entropy_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("run");
    let run = out.to_str().unwrap();
    let (code, stdout, _) = vfpns(&["simulate-kinetic", "--config", &cfg, "--eps", "0.4", "--out", run]);
    assert_eq!(code, 0, "{stdout}");
    for f in ["entropy_series.json", "kinetic_final.bin", "kinetic_final.json", "fluid_final.bin", "metadata.json"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    assert_eq!(vfpns(&["check-entropy", "--run", run]).0, 0);

    // an entropy that grows far beyond the allowed slack must fail the audit
    let path = out.join("entropy_series.json");
    let mut series: EntropySeries = io::read_json(&path).unwrap();
    let last = series.reports.last_mut().unwrap();
    last.f += 10.0 + last.f.abs();
    io::write_json(&path, &series).unwrap();
    let (code, stdout, _) = vfpns(&["check-entropy", "--run", run]);
    assert_eq!(code, 3, "{stdout}");
    assert!(stdout.contains("FAIL"));
}

#[test]
fn converge_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("sweep");
    let (code, stdout, stderr) = vfpns(&["converge", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    let rows = io::read_convergence_csv(&out.join("convergence.csv")).unwrap();
    assert_eq!(rows.iter().map(|r| r.eps).collect::<Vec<_>>(), vec![0.4, 0.2, 0.1]);
    let text = fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert!(text.starts_with("eps,sup_H,sup_L1_rho,sup_L1_n,f_to_M_l1\n"));
    assert!(out.join("convergence.json").exists());
}

#[test]
fn limit_modes_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    for mode in ["direct", "picard"] {
        let out = dir.path().join(mode);
        let (code, stdout, _) =
            vfpns(&["simulate-limit", "--config", &cfg, "--mode", mode, "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert!(out.join("limit_final.bin").exists());
        assert_eq!(stdout.contains("iterate"), mode == "picard");
    }
}

#[test]
fn exit_codes_for_bad_input_and_solver_failure() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), &SMALL.replace("[0.4, 0.2, 0.1]", "[0.1, 0.4]"));
    let out = dir.path().join("o");
    let o = out.to_str().unwrap();
    let (code, _, stderr) = vfpns(&["simulate-kinetic", "--config", &bad, "--eps", "0.4", "--out", o]);
    assert_eq!(code, 1);
    assert!(stderr.contains("descending"));

    // a step far beyond the transport CFL limit
    let unstable = write_config(dir.path(), &SMALL.replace("\"samples\": 4", "\"samples\": 1, \"dt\": 0.05"));
    let (code, _, stderr) = vfpns(&["simulate-kinetic", "--config", &unstable, "--eps", "0.4", "--out", o]);
    assert_eq!(code, 2, "{stderr}");
    assert!(stderr.contains("CFL"));
    assert!(out.join("failure_step1_kinetic.bin").exists());

    assert_eq!(vfpns(&["check-entropy", "--run", dir.path().join("none").to_str().unwrap()]).0, 1);
}
