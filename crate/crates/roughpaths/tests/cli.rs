//! End-to-end tests of the command-line binary: exit codes, configuration
//! precedence, artifact round-trips, and byte-level determinism of the
//! reproduction suite.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_roughpaths"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn usage_errors_exit_with_2() {
    // Out-of-range p from a flag.
    let out = run(&["lift", "--input", "x.csv", "--p", "3.5"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("[2, 3)"), "{}", stderr(&out));

    // Unknown subcommand and missing required parameter (clap).
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));

    // Missing required parameter detected after config merging.
    let out = run(&["lift", "--p", "2.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("input"), "{}", stderr(&out));

    // Unknown suite name.
    assert_eq!(run(&["run-all", "bogus"]).status.code(), Some(2));
}

#[test]
fn config_file_merges_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("probe.conf");
    fs::write(
        &conf,
        "# demo configuration\n\
         driver = brownian:35,128,1,8.0\n\
         field = sin\n\
         y0 = 0.5\n\
         p = 2.5\n\
         levels = 3\n",
    )
    .unwrap();
    let outdir = dir.path().join("a");

    // All parameters from the file.
    let out = run(&[
        "uniqueness-probe",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table = fs::read_to_string(outdir.join("probe.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 3, "header plus one row per level");

    // A flag overrides the file's level count.
    let outdir2 = dir.path().join("b");
    let out = run(&[
        "uniqueness-probe",
        "--config",
        conf.to_str().unwrap(),
        "--levels",
        "2",
        "--out",
        outdir2.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table = fs::read_to_string(outdir2.join("probe.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 2);
}

#[test]
fn unknown_config_keys_are_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "p = 2.5\ninput = x.csv\nwibble = 3\n").unwrap();
    let out = run(&["lift", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("wibble"), "{err}");
    assert!(err.contains("valid keys"), "{err}");

    // Out-of-range p coming from the file is also a usage error.
    let conf2 = dir.path().join("range.conf");
    fs::write(&conf2, "p = 3.5\ninput = x.csv\n").unwrap();
    let out = run(&["lift", "--config", conf2.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("[2, 3)"), "{}", stderr(&out));
}

#[test]
fn lift_pvar_and_rde_artifacts_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let outdir = dir.path().join("arts");

    // Solve along a brownian driver, then grade its trajectory and rebuild
    // a lift from scratch out of the written CSVs.
    let out = run(&[
        "solve-rde",
        "--driver",
        "brownian:3,256,1",
        "--field",
        "sin",
        "--y0",
        "0.9",
        "--p",
        "2.5",
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let traj = outdir.join("trajectory.csv");
    let out = run(&["pvar", "--input", traj.to_str().unwrap(), "--p", "2.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("p-variation seminorm"), "{}", stdout(&out));

    // The trajectory is a scalar series, so it can be lifted in turn; the
    // lift then feeds the two-index variation path.
    let out = run(&[
        "lift",
        "--input",
        traj.to_str().unwrap(),
        "--p",
        "2.5",
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let lifted = outdir.join("lift.csv");
    let out = run(&[
        "pvar",
        "--input",
        lifted.to_str().unwrap(),
        "--p",
        "2.5",
        "--two-index",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(outdir.join("scaling.csv").exists());
}

#[test]
fn heat_energy_feeds_the_bound_checker() {
    let dir = tempfile::tempdir().unwrap();
    let outdir = dir.path().join("heat");

    // Pure diffusion decays, so the zero-control certificate holds.
    let out = run(&[
        "solve-heat",
        "--nx", "32",
        "--dt", "0.0004",
        "--T", "0.04",
        "--nu", "1",
        "--V", "0.0",
        "--driver", "brownian:1",
        "--p", "2.5",
        "--out", outdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let energy = outdir.join("energy.csv");
    assert!(energy.exists());
    assert!(outdir.join("snapshots.csv").exists());

    let out = run(&[
        "gronwall-check",
        "--g", energy.to_str().unwrap(),
        "--omega1", "zero",
        "--omega2", "zero",
        "--C", "1.0",
        "--L", "1.0",
        "--kappa", "1.0",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("certificate holds"), "{}", stdout(&out));

    // With transport on, the energy is not monotone, so the zero-control
    // hypothesis fails and the command signals it through the exit code.
    let outdir2 = dir.path().join("heat2");
    let out = run(&[
        "solve-heat",
        "--nx", "32",
        "--dt", "0.0004",
        "--T", "0.04",
        "--nu", "1",
        "--V", "1.0",
        "--driver", "brownian:1",
        "--p", "2.5",
        "--out", outdir2.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = run(&[
        "gronwall-check",
        "--g", outdir2.join("energy.csv").to_str().unwrap(),
        "--omega1", "zero",
        "--omega2", "zero",
        "--C", "1.0",
        "--L", "1.0",
        "--kappa", "1.0",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
    assert!(stdout(&out).contains("FAILS"), "{}", stdout(&out));

    // energy-check performs the full pipeline in one command.
    let out = run(&[
        "energy-check",
        "--nx", "32",
        "--dt", "0.0004",
        "--T", "0.04",
        "--nu", "1",
        "--V", "1.0",
        "--driver", "brownian:1",
        "--p", "2.5",
        "--C", "fit",
        "--out", outdir2.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("energy certificate holds"), "{}", stdout(&out));
    assert!(outdir2.join("certificate.txt").exists());
}

#[test]
fn seed_flag_overrides_the_driver_spec() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let base = [
        "solve-rde", "--field", "sin", "--y0", "0.9", "--p", "2.5",
    ];
    let out = run(&[&base[..], &["--driver", "brownian:9,64,1", "--out", a.to_str().unwrap()]].concat());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = run(&[
        &base[..],
        &["--driver", "brownian:3,64,1", "--seed", "9", "--out", b.to_str().unwrap()],
    ]
    .concat());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let ta = fs::read(a.join("trajectory.csv")).unwrap();
    let tb = fs::read(b.join("trajectory.csv")).unwrap();
    assert_eq!(ta, tb, "--seed must replace the spec seed exactly");
}

fn dir_bytes(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                files.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn run_all_smoke_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for target in [&a, &b] {
        let out = run(&["run-all", "smoke", "--out", target.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}\n{}", stdout(&out), stderr(&out));
        assert!(stdout(&out).contains("all criteria passed"), "{}", stdout(&out));
    }
    let fa = dir_bytes(&a);
    let fb = dir_bytes(&b);
    assert!(!fa.is_empty());
    assert_eq!(
        fa.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
        fb.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>()
    );
    for ((name, bytes_a), (_, bytes_b)) in fa.iter().zip(fb.iter()) {
        assert_eq!(bytes_a, bytes_b, "{name} differs between identical runs");
    }
    // The persisted summary carries no timings, keeping it reproducible.
    let summary = fs::read_to_string(a.join("summary.txt")).unwrap();
    assert!(!summary.contains('['), "{summary}");
}
