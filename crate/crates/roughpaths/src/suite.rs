//! The reproduce-all experiment suites.
//!
//! Each numbered experiment packages one headline guarantee of the library —
//! lift exactness, oracle equivalence, certificate validity, convergence
//! orders, scheme agreement, energy bounds, determinism — as a deterministic
//! runner with a hard runtime budget.  The smoke suite exercises every
//! command-line-visible capability on small sizes and persists its outputs,
//! which doubles as the fixture for the byte-identity experiment.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::Result;
use crate::gronwall::{alpha, saturating_family, verify, GronwallParams};
use crate::heat::{
    build_transport_driver, driver_control, energy_bound_check, solve_heat, CSpec, GridScale,
};
use crate::io;
use crate::num::{empirical_order, u01};
use crate::rde::{
    ode_oracle, remainder_scaling_report, solve_step2, VectorField,
};
use crate::reflected::{
    complementarity_defect, skorokhod_map_1d, solve_reflected_step2, uniqueness_probe,
};
use crate::rough::{
    brownian_sample_lift, lift_piecewise_linear, sup_distance, uniform_grid, SampledPath,
};
use crate::variation::{control_from_pvar, pvar_path, pvar_path_exhaustive};

/// Outcome of one numbered experiment.
#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
    pub seconds: f64,
}

impl CriterionReport {
    fn line(&self, with_seconds: bool) -> String {
        let verdict = if self.passed { "pass" } else { "FAIL" };
        let timing = if with_seconds {
            format!("  [{:.2}s]", self.seconds)
        } else {
            String::new()
        };
        format!(
            "{:>2}  {}  {:<28} {}{}",
            self.id, verdict, self.name, self.details, timing
        )
    }
}

/// Renders the report table.  Timings are optional so that persisted
/// summaries stay byte-identical across runs.
pub fn summary_table(reports: &[CriterionReport], with_seconds: bool) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&r.line(with_seconds));
        out.push('\n');
    }
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.id.to_string())
        .collect();
    if failed.is_empty() {
        out.push_str("all criteria passed\n");
    } else {
        let _ = writeln!(out, "FAILED criteria: {}", failed.join(", "));
    }
    out
}

fn finish(
    id: usize,
    name: &'static str,
    started: Instant,
    budget: f64,
    passed: bool,
    mut details: String,
) -> CriterionReport {
    let seconds = started.elapsed().as_secs_f64();
    let in_budget = seconds < budget;
    if !in_budget {
        let _ = write!(details, "; over {budget}s budget");
    }
    CriterionReport {
        id,
        name,
        passed: passed && in_budget,
        details,
        seconds,
    }
}

fn uniform_in(rng: &mut ChaCha12Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * u01(rng)
}

/// Experiment 1: algebraic exactness of lift construction.  Fifty random
/// piecewise-linear lifts across dimensions 1-3 and up to 512 segments must
/// satisfy the interval-splitting identity and the level-2 symmetry identity
/// to 1e-10 relative.
pub fn criterion_1() -> Result<CriterionReport> {
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xC1);
    let mut worst_chen = 0.0_f64;
    let mut worst_geo = 0.0_f64;
    for trial in 0..50 {
        let d = 1 + trial % 3;
        let segments = 2 + (u01(&mut rng) * 510.0) as usize;
        let times = uniform_grid(0.0, 1.0, segments);
        let mut vals = Vec::with_capacity((segments + 1) * d);
        for _ in 0..(segments + 1) * d {
            vals.push(uniform_in(&mut rng, -1.0, 1.0));
        }
        let path = SampledPath::new(times, vals, d)?;
        let x = lift_piecewise_linear(&path, 2.5)?;
        worst_chen = worst_chen.max(x.max_relative_chen_defect());
        worst_geo = worst_geo.max(x.max_relative_geometricity_defect());
    }
    let passed = worst_chen <= 1e-10 && worst_geo <= 1e-10;
    let details = format!(
        "50 lifts, max split defect {worst_chen:.2e}, max symmetry defect {worst_geo:.2e} (tol 1e-10)"
    );
    Ok(finish(1, "lift exactness", started, 10.0, passed, details))
}

/// Experiment 2: the dynamic-programming p-variation equals exhaustive
/// partition enumeration on 200 random paths with at most 12 points, for
/// p in {1, 1.5, 2, 2.5}, to 1e-12 relative.
pub fn criterion_2() -> Result<CriterionReport> {
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xC2);
    let ps = [1.0, 1.5, 2.0, 2.5];
    let mut worst = 0.0_f64;
    for trial in 0..200 {
        let d = 1 + trial % 3;
        let n = 2 + (u01(&mut rng) * 11.0) as usize;
        let times = uniform_grid(0.0, 1.0, n - 1);
        let mut vals = Vec::with_capacity(n * d);
        for _ in 0..n * d {
            vals.push(uniform_in(&mut rng, -1.0, 1.0));
        }
        let path = SampledPath::new(times, vals, d)?;
        let p = ps[trial % ps.len()];
        let (s, t) = (0.0, 1.0);
        let dp = pvar_path(&path, p, s, t)?;
        let brute = pvar_path_exhaustive(&path, p, s, t)?;
        worst = worst.max((dp - brute).abs() / (1.0 + brute.abs()));
    }
    let passed = worst <= 1e-12;
    let details =
        format!("200 paths x 4 exponents, max relative gap {worst:.2e} (tol 1e-12)");
    Ok(finish(2, "p-variation oracle", started, 30.0, passed, details))
}

/// Experiment 3: on 100 synthetic families built to saturate the growth
/// hypothesis, the certified bound always dominates sup G, and the weight
/// constant at (C, L, kappa) = (1, 1, 1) equals 1/(2e^2) to 1e-15.
pub fn criterion_3() -> Result<CriterionReport> {
    let started = Instant::now();
    let mut violations = 0usize;
    let mut tightest = f64::NEG_INFINITY;
    for seed in 0..100u64 {
        let n = 8 + (seed as usize * 7) % 33;
        let fam = saturating_family(seed, n)?;
        let cert = verify(&fam.g, &fam.omega1, &fam.omega2, &fam.params, 1e-10)?;
        if !(cert.holds && cert.sup_g <= cert.bound) {
            violations += 1;
        }
        tightest = tightest.max(cert.hypothesis.worst_defect);
    }
    let reference = GronwallParams {
        kappa: 1.0,
        c: 1.0,
        level: 1.0,
    };
    let exact = 1.0 / (2.0 * std::f64::consts::E * std::f64::consts::E);
    let alpha_gap = (alpha(&reference) - exact).abs();
    let passed = violations == 0 && alpha_gap <= 1e-15;
    let details = format!(
        "100 families, {violations} bound violations, tightest defect {tightest:.1e}, alpha(1,1,1) gap {alpha_gap:.1e}"
    );
    Ok(finish(3, "a-priori bound validity", started, 30.0, passed, details))
}

/// Experiment 4: second-order convergence of the one-step scheme.  The
/// exponential case (f(y)=y, x_t=t, T=1) is graded against e; the sine-field
/// case against a Runge-Kutta resolution of the same piecewise-linear driver.
/// Both orders must reach 1.9 over five mesh halvings.
pub fn criterion_4() -> Result<CriterionReport> {
    let started = Instant::now();
    let meshes = [4usize, 8, 16, 32, 64];
    let mut hs = Vec::new();
    let mut errs_exp = Vec::new();
    let mut errs_sin = Vec::new();
    let linear_field = VectorField::linear_1d();
    let sin_field = VectorField::sin_1d();
    for &n in &meshes {
        let times = uniform_grid(0.0, 1.0, n);
        let path = SampledPath::new(times.clone(), times.clone(), 1)?;
        let x = lift_piecewise_linear(&path, 2.0)?;
        let y = solve_step2(&linear_field, &x, &[1.0])?;
        errs_exp.push((y.component(n, 0) - std::f64::consts::E).abs());

        let driver = SampledPath::from_fn(times, 1, |t| vec![(3.0 * t).sin()])?;
        let xs = lift_piecewise_linear(&driver, 2.0)?;
        let ys = solve_step2(&sin_field, &xs, &[0.9])?;
        let reference = ode_oracle(&sin_field, &driver, &[0.9], 256)?;
        errs_sin.push((ys.component(n, 0) - reference.component(n, 0)).abs());
        hs.push(1.0 / n as f64);
    }
    let order_exp = empirical_order(&hs, &errs_exp);
    let order_sin = empirical_order(&hs, &errs_sin);
    let passed = order_exp >= 1.9 && order_sin >= 1.9;
    let details = format!(
        "orders: exponential {order_exp:.3}, sine vs Runge-Kutta {order_sin:.3} (need >= 1.9)"
    );
    Ok(finish(4, "scheme convergence", started, 20.0, passed, details))
}

/// Experiment 5: the solution remainder tracks omega^{3/p} uniformly across
/// dyadic window depths 1-6 on a Brownian sine-field run with 2^14 steps;
/// the ratio spread (max/min over depths) must stay at or below 50.
pub fn criterion_5() -> Result<CriterionReport> {
    let started = Instant::now();
    let (_, x) = brownian_sample_lift(6, 1 << 14, 1, 1.0, 2.5)?;
    let field = VectorField::sin_1d();
    let y = solve_step2(&field, &x, &[0.9])?;
    let report = remainder_scaling_report(&field, &x, &y, 6)?;
    let depths = report.rows.len();
    let passed = depths == 6 && report.spread <= 50.0;
    let details = format!(
        "{depths} depths, ratio spread {:.2} (tol 50)",
        report.spread
    );
    Ok(finish(5, "remainder scaling", started, 60.0, passed, details))
}

/// Experiment 6: the projection scheme converges to the closed-form
/// reflected ramp (1-2t)+ with order >= 0.9 over five mesh halvings, and the
/// complementarity mass stays below 10h at every level.
pub fn criterion_6() -> Result<CriterionReport> {
    let started = Instant::now();
    let field = VectorField::constant_1d(1.0);
    let t_end = 0.96;
    // The reflected ramp (1-2t)+ is piecewise linear with its kink at 0.5, so
    // the independent oracle is the direct boundary-pushing map applied to the
    // free ramp sampled exactly at its knots; sup_distance then grades the
    // scheme on the union grid, where the kink is never a scheme grid point.
    let free = SampledPath::new(vec![0.0, 0.5, t_end], vec![1.0, 0.0, 1.0 - 2.0 * t_end], 1)?;
    let (oracle, _) = skorokhod_map_1d(&free)?;
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    let mut comp_ok = true;
    let mut worst_comp_ratio = 0.0_f64;
    for level in 0..6 {
        let n = 32usize << level;
        let times = uniform_grid(0.0, t_end, n);
        let path = SampledPath::from_fn(times, 1, |t| vec![-2.0 * t])?;
        let x = lift_piecewise_linear(&path, 2.0)?;
        let sol = solve_reflected_step2(&field, &x, 1.0, None)?;
        let h = t_end / n as f64;
        let comp = complementarity_defect(&sol.y, &sol.m)?;
        worst_comp_ratio = worst_comp_ratio.max(comp / h);
        comp_ok &= comp <= 10.0 * h;
        hs.push(h);
        errs.push(sup_distance(&sol.y, &oracle)?);
    }
    let order = empirical_order(&hs, &errs);
    let passed = order >= 0.9 && comp_ok;
    let details = format!(
        "order {order:.3} (need >= 0.9), worst complementarity {worst_comp_ratio:.2}h (tol 10h)"
    );
    Ok(finish(6, "reflected ramp oracle", started, 10.0, passed, details))
}

fn probe_trend(rows: &[crate::reflected::ProbeRow]) -> (bool, String) {
    let d: Vec<f64> = rows.iter().map(|r| r.distance).collect();
    let trend = d.windows(2).all(|w| w[1] <= 1.2 * w[0]);
    let collapse = d[d.len() - 1] <= 0.2 * d[0];
    let desc = d
        .iter()
        .map(|v| format!("{v:.3e}"))
        .collect::<Vec<_>>()
        .join(" -> ");
    (trend && collapse, desc)
}

/// Experiment 7: the projection and penalized (epsilon = sqrt(h)) schemes
/// agree increasingly as the mesh refines — each level at most 1.2x the
/// previous distance and the finest at most 0.2x the coarsest — on a smooth
/// ramp driver and on a fixed-seed Brownian driver.
pub fn criterion_7() -> Result<CriterionReport> {
    let started = Instant::now();
    let ramp_field = VectorField::constant_1d(1.0);
    let times = uniform_grid(0.0, 6.4, 32);
    let ramp = SampledPath::from_fn(times, 1, |t| vec![-2.0 * t])?;
    let ramp_lift = lift_piecewise_linear(&ramp, 2.0)?;
    let smooth_rows = uniqueness_probe(&ramp_field, &ramp_lift, 1.0, 5)?;
    let (smooth_ok, smooth_desc) = probe_trend(&smooth_rows);

    let (_, bx) = brownian_sample_lift(35, 128, 1, 8.0, 2.5)?;
    let rough_rows = uniqueness_probe(&VectorField::sin_1d(), &bx, 0.5, 5)?;
    let (rough_ok, rough_desc) = probe_trend(&rough_rows);

    let passed = smooth_ok && rough_ok;
    let details =
        format!("smooth [{smooth_desc}] ok={smooth_ok}; Brownian [{rough_desc}] ok={rough_ok}");
    Ok(finish(7, "scheme agreement probe", started, 120.0, passed, details))
}

struct HeatRun {
    gd: crate::heat::GridDriver,
    traj: crate::heat::RPDETrajectory,
}

fn heat_run(seed: u64, v_const: f64) -> Result<HeatRun> {
    let scale = GridScale::new(128)?;
    let dx = scale.dx();
    let dt = 0.4 * dx * dx;
    let steps = (0.5 / dt).round() as usize;
    let (_, x) = brownian_sample_lift(seed, steps, 1, 0.5, 2.5)?;
    let gd = build_transport_driver(&scale, &[vec![v_const; 128]], x)?;
    let u0: Vec<f64> = scale
        .points()
        .iter()
        .map(|&xp| (2.0 * std::f64::consts::PI * xp).sin())
        .collect();
    let traj = solve_heat(&gd, &u0, 1.0, 160, false)?;
    Ok(HeatRun { gd, traj })
}

/// Experiment 8: the energy certificate of the rough transport-heat run.
/// The growth constant fitted on a calibration seed must certify a disjoint
/// validation seed (hypothesis holds and sup G <= bound), and the noise-free
/// control run must give exactly bound = 2 ||u0||^2 with nonincreasing G.
pub fn criterion_8() -> Result<CriterionReport> {
    let started = Instant::now();
    let p = 2.5;
    let cal = heat_run(1, 1.0)?;
    let cal_ctrl = driver_control(&cal.gd, &cal.traj.snapshot_idx, p)?;
    let fitted = energy_bound_check(&cal.traj, &cal_ctrl.omega, p, CSpec::Fit, None, 1e-9)?;

    let val = heat_run(2, 1.0)?;
    let val_ctrl = driver_control(&val.gd, &val.traj.snapshot_idx, p)?;
    let check = energy_bound_check(
        &val.traj,
        &val_ctrl.omega,
        p,
        CSpec::Value(fitted.c_used),
        Some(fitted.l_used),
        1e-9,
    )?;
    let val_ok = check.certificate.holds && check.certificate.sup_g <= check.certificate.bound;

    let quiet = heat_run(1, 0.0)?;
    let quiet_ctrl = driver_control(&quiet.gd, &quiet.traj.snapshot_idx, p)?;
    let quiet_check = energy_bound_check(
        &quiet.traj,
        &quiet_ctrl.omega,
        p,
        CSpec::Value(1.0),
        None,
        1e-9,
    )?;
    let g0 = quiet.traj.energy[0];
    let exact_bound =
        (quiet_check.certificate.bound - 2.0 * g0).abs() <= 1e-12 * (1.0 + 2.0 * g0);
    // Once the datum has decayed to the energy's floating-point floor, true
    // per-window decrements (~1e-20) sit far below the rounding of the
    // accumulated integrals, so monotonicity is graded with an allowance
    // nine orders below the run's genuine early-time decrements.
    let monotone = quiet
        .traj
        .energy
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-13 * (1.0 + w[0]));
    let quiet_ok = quiet_check.certificate.holds && exact_bound && monotone;

    let passed = val_ok && quiet_ok;
    let details = format!(
        "fit C {:.3e} L {:.3e}; validation defect {:+.1e}, supG {:.4} <= bound {:.1}; noise-free bound gap {:.1e}, G monotone {monotone}",
        fitted.c_used,
        fitted.l_used,
        check.certificate.hypothesis.worst_defect,
        check.certificate.sup_g,
        check.certificate.bound,
        (quiet_check.certificate.bound - 2.0 * g0).abs()
    );
    Ok(finish(8, "energy certificate", started, 120.0, passed, details))
}

/// Experiment 9: byte-identity of the full artifact set across two fresh
/// runs in separate directories.
pub fn criterion_9(work_dir: &Path) -> Result<CriterionReport> {
    let started = Instant::now();
    let dir_a = work_dir.join("run_a");
    let dir_b = work_dir.join("run_b");
    smoke_artifacts(&dir_a)?;
    smoke_artifacts(&dir_b)?;
    let (mismatch, count) = compare_dirs(&dir_a, &dir_b)?;
    let passed = mismatch.is_empty();
    let details = if passed {
        format!("{count} artifacts byte-identical across two runs")
    } else {
        format!("artifacts differ: {}", mismatch.join(", "))
    };
    Ok(finish(9, "output determinism", started, 120.0, passed, details))
}

fn sorted_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn compare_dirs(a: &Path, b: &Path) -> Result<(Vec<String>, usize)> {
    let fa = sorted_files(a)?;
    let fb = sorted_files(b)?;
    let names = |fs: &[PathBuf]| -> Vec<String> {
        fs.iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect()
    };
    let (na, nb) = (names(&fa), names(&fb));
    if na != nb {
        return Ok((vec![format!("file sets differ: {na:?} vs {nb:?}")], 0));
    }
    let mut mismatch = Vec::new();
    for (pa, pb) in fa.iter().zip(&fb) {
        if fs::read(pa)? != fs::read(pb)? {
            mismatch.push(na[fa.iter().position(|p| p == pa).unwrap()].clone());
        }
    }
    Ok((mismatch, fa.len()))
}

/// Writes one deterministic artifact per command-line capability into `dir`:
/// a sampled path and its lift, a variation control, a free and a reflected
/// trajectory, a remainder-scaling table, a scheme-agreement probe, both
/// certificate blocks, and the heat run's snapshots and energy trace.
pub fn smoke_artifacts(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;

    let (bpath, blift) = brownian_sample_lift(2, 64, 2, 1.0, 2.5)?;
    io::write_text(&dir.join("path.csv"), &io::path_csv(&bpath))?;
    io::write_text(&dir.join("lift.csv"), &io::rough_csv(&blift))?;
    let ctrl = control_from_pvar(&bpath, 2.5)?;
    io::write_text(&dir.join("control.csv"), &io::control_csv(&ctrl))?;

    let (_, x1) = brownian_sample_lift(3, 256, 1, 1.0, 2.5)?;
    let field = VectorField::sin_1d();
    let y = solve_step2(&field, &x1, &[0.9])?;
    io::write_text(&dir.join("trajectory.csv"), &io::trajectory_csv(&y))?;
    let scaling = remainder_scaling_report(&field, &x1, &y, 4)?;
    let rows: Vec<(usize, f64)> = scaling
        .rows
        .iter()
        .map(|r| (r.depth, r.max_ratio))
        .collect();
    io::write_text(&dir.join("scaling.csv"), &io::scaling_csv(&rows))?;

    let ramp_field = VectorField::constant_1d(1.0);
    let ramp = SampledPath::from_fn(uniform_grid(0.0, 0.96, 64), 1, |t| vec![-2.0 * t])?;
    let ramp_lift = lift_piecewise_linear(&ramp, 2.0)?;
    let reflected = solve_reflected_step2(&ramp_field, &ramp_lift, 1.0, None)?;
    io::write_text(
        &dir.join("reflected.csv"),
        &io::reflected_csv(&reflected.y, &reflected.m)?,
    )?;
    let probe = uniqueness_probe(&ramp_field, &ramp_lift, 1.0, 4)?;
    io::write_text(&dir.join("probe.csv"), &io::probe_csv(&probe))?;

    let fam = saturating_family(3, 24)?;
    let cert = verify(&fam.g, &fam.omega1, &fam.omega2, &fam.params, 1e-10)?;
    io::write_text(
        &dir.join("gronwall_certificate.txt"),
        &io::certificate_block(&cert),
    )?;

    let scale = GridScale::new(32)?;
    let dx = scale.dx();
    let dt = 0.4 * dx * dx;
    let steps = (0.05 / dt).round() as usize;
    let (_, hx) = brownian_sample_lift(1, steps, 1, 0.05, 2.5)?;
    let gd = build_transport_driver(&scale, &[vec![1.0; 32]], hx)?;
    let u0: Vec<f64> = scale
        .points()
        .iter()
        .map(|&xp| (2.0 * std::f64::consts::PI * xp).sin())
        .collect();
    let traj = solve_heat(&gd, &u0, 1.0, 8, false)?;
    io::write_text(
        &dir.join("snapshots.csv"),
        &io::snapshots_csv(&traj.times, &traj.u)?,
    )?;
    io::write_text(
        &dir.join("energy.csv"),
        &io::energy_csv(&traj.times, &traj.energy)?,
    )?;
    let hc = driver_control(&gd, &traj.snapshot_idx, 2.5)?;
    let heat_cert = energy_bound_check(&traj, &hc.omega, 2.5, CSpec::Fit, None, 1e-9)?;
    io::write_text(
        &dir.join("heat_certificate.txt"),
        &io::certificate_block(&heat_cert.certificate),
    )?;
    Ok(())
}

/// The quick suite: writes the artifact set and re-checks one cheap sanity
/// property per capability.  Passes in well under a minute.
pub fn run_smoke(out_dir: &Path) -> Result<Vec<CriterionReport>> {
    let started = Instant::now();
    smoke_artifacts(out_dir)?;

    let mut reports = Vec::new();
    let mut add = |id: usize, name: &'static str, passed: bool, details: String| {
        reports.push(CriterionReport {
            id,
            name,
            passed,
            details,
            seconds: 0.0,
        });
    };

    let lift = io::read_rough_csv(&out_dir.join("lift.csv"), 2.5)?;
    let chen = lift.max_relative_chen_defect();
    add(1, "lift round-trip", chen <= 1e-10, format!("split defect {chen:.1e}"));

    let ctrl = io::read_control_csv(&out_dir.join("control.csv"))?;
    let gap = crate::variation::check_superadditive(&ctrl);
    add(2, "control round-trip", gap <= 1e-12, format!("superadditivity slack {gap:.1e}"));

    let cert_text = fs::read_to_string(out_dir.join("gronwall_certificate.txt"))?;
    let holds = cert_text.contains("\"holds\": true");
    add(3, "a-priori certificate", holds, "synthetic family certified".into());

    let traj = io::read_path_csv(&out_dir.join("path.csv"))?;
    add(
        4,
        "trajectory artifacts",
        traj.len() == 65,
        format!("{} sampled states", traj.len()),
    );

    let heat_text = fs::read_to_string(out_dir.join("heat_certificate.txt"))?;
    let heat_holds = heat_text.contains("\"holds\": true");
    add(5, "energy certificate", heat_holds, "calibrated heat run certified".into());

    let elapsed = started.elapsed().as_secs_f64();
    if let Some(first) = reports.first_mut() {
        first.seconds = elapsed;
    }
    let table = summary_table(&reports, false);
    io::write_text(&out_dir.join("summary.txt"), &table)?;
    Ok(reports)
}

/// The full suite: all nine numbered experiments, with the determinism
/// experiment writing its two runs under `out_dir`.  The summary table is
/// persisted without timings so it is itself a deterministic artifact.
pub fn run_acceptance(out_dir: &Path) -> Result<Vec<CriterionReport>> {
    fs::create_dir_all(out_dir)?;
    let reports = vec![
        criterion_1()?,
        criterion_2()?,
        criterion_3()?,
        criterion_4()?,
        criterion_5()?,
        criterion_6()?,
        criterion_7()?,
        criterion_8()?,
        criterion_9(out_dir)?,
    ];
    io::write_text(&out_dir.join("summary.txt"), &summary_table(&reports, false))?;
    Ok(reports)
}
