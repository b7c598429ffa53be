//! CSV persistence for paths, rough paths, controls, trajectories, and the
//! report tables emitted by the command-line interface.
//!
//! Every float is written in scientific notation with 17 significant digits,
//! which round-trips any finite `f64` exactly; a written file parsed back
//! therefore reproduces the original object bit for bit.  Each format has a
//! string-level builder (easy to test and to compare byte-wise) and file
//! wrappers.  Malformed input is reported as [`Error::Data`] with the
//! offending line number.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gronwall::GronwallCertificate;
use crate::reflected::ProbeRow;
use crate::rough::{RoughPath, SampledPath};
use crate::variation::Control;

/// Formats a float with 17 significant digits, the smallest count that
/// round-trips every finite `f64` exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(field: &str, line_no: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::Data(format!("line {line_no}: bad float {field:?}: {e}")))
}

/// Non-blank lines of a CSV body, each with its 1-based line number.
fn csv_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect()
}

fn expect_header(got: &str, want: &str) -> Result<()> {
    if got != want {
        return Err(Error::Data(format!(
            "expected header {want:?}, found {got:?}"
        )));
    }
    Ok(())
}

fn expect_fields(fields: &[&str], want: usize, line_no: usize) -> Result<()> {
    if fields.len() != want {
        return Err(Error::Data(format!(
            "line {line_no}: expected {want} fields, found {}",
            fields.len()
        )));
    }
    Ok(())
}

fn data_err<T>(context: &str, e: Error) -> Result<T> {
    Err(Error::Data(format!("{context}: {e}")))
}

// ---------------------------------------------------------------------------
// Sampled paths: `t,x_1,..,x_d`.
// ---------------------------------------------------------------------------

fn path_header(d: usize, value_name: &str) -> String {
    let mut h = String::from("t");
    for a in 1..=d {
        let _ = write!(h, ",{value_name}_{a}");
    }
    h
}

fn labeled_path_csv(x: &SampledPath, value_name: &str) -> String {
    let d = x.dim();
    let mut out = path_header(d, value_name);
    out.push('\n');
    for k in 0..x.len() {
        let _ = write!(out, "{}", fmt_f64(x.times()[k]));
        for a in 0..d {
            let _ = write!(out, ",{}", fmt_f64(x.component(k, a)));
        }
        out.push('\n');
    }
    out
}

/// `t,x_1,..,x_d` with one row per grid point.
pub fn path_csv(x: &SampledPath) -> String {
    labeled_path_csv(x, "x")
}

/// A solution trajectory, same layout as [`path_csv`] but with `y` columns.
pub fn trajectory_csv(y: &SampledPath) -> String {
    labeled_path_csv(y, "y")
}

pub(crate) fn parse_labeled_path_csv(text: &str, value_name: &str) -> Result<SampledPath> {
    let lines = csv_lines(text);
    let (_, header) = *lines
        .first()
        .ok_or_else(|| Error::Data("empty path csv".into()))?;
    let cols = header.split(',').count();
    if cols < 2 {
        return Err(Error::Data(format!(
            "path header needs t and at least one value column, found {header:?}"
        )));
    }
    let d = cols - 1;
    expect_header(header, &path_header(d, value_name))?;
    let mut times = Vec::with_capacity(lines.len() - 1);
    let mut vals = Vec::with_capacity((lines.len() - 1) * d);
    for &(line_no, line) in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        expect_fields(&fields, cols, line_no)?;
        times.push(parse_f64(fields[0], line_no)?);
        for f in &fields[1..] {
            vals.push(parse_f64(f, line_no)?);
        }
    }
    match SampledPath::new(times, vals, d) {
        Ok(p) => Ok(p),
        Err(e) => data_err("path csv", e),
    }
}

/// Parses [`path_csv`] output.
pub fn parse_path_csv(text: &str) -> Result<SampledPath> {
    parse_labeled_path_csv(text, "x")
}

/// Parses [`trajectory_csv`] output.
pub fn parse_trajectory_csv(text: &str) -> Result<SampledPath> {
    parse_labeled_path_csv(text, "y")
}

// ---------------------------------------------------------------------------
// Rough paths: `s,t,X1_1..X1_d,X2_11..X2_dd`, anchored at the base time.
// ---------------------------------------------------------------------------

fn rough_header(d: usize) -> String {
    let mut h = String::from("s,t");
    for a in 1..=d {
        let _ = write!(h, ",X1_{a}");
    }
    for a in 1..=d {
        for b in 1..=d {
            let _ = write!(h, ",X2_{a}{b}");
        }
    }
    h
}

/// Rows `(t0, t_k, X¹_{t0,tk}, X²_{t0,tk})` for `k = 1..n-1`, level 2 in
/// row-major order.  Anchoring every row at the base time keeps the file an
/// exact image of the lift's internal state, so parsing it back is lossless.
pub fn rough_csv(x: &RoughPath) -> String {
    let d = x.dim();
    let n = x.len();
    let t0 = x.times()[0];
    let mut out = rough_header(d);
    out.push('\n');
    let mut l1 = vec![0.0; d];
    let mut l2 = vec![0.0; d * d];
    for k in 1..n {
        let _ = write!(out, "{},{}", fmt_f64(t0), fmt_f64(x.times()[k]));
        x.level1_into(0, k, &mut l1);
        x.level2_into(0, k, &mut l2);
        for v in l1.iter().chain(l2.iter()) {
            let _ = write!(out, ",{}", fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

/// Parses [`rough_csv`] output.  The file does not store the variation scale,
/// so the caller supplies `p`.
pub fn parse_rough_csv(text: &str, p: f64) -> Result<RoughPath> {
    let lines = csv_lines(text);
    let (_, header) = *lines
        .first()
        .ok_or_else(|| Error::Data("empty rough-path csv".into()))?;
    let cols = header.split(',').count();
    let d = (1..=64)
        .find(|d| 2 + d + d * d == cols)
        .ok_or_else(|| Error::Data(format!(
            "rough-path csv has {cols} columns; expected 2 + d + d^2 for some dimension d"
        )))?;
    expect_header(header, &rough_header(d))?;
    if lines.len() < 2 {
        return Err(Error::Data("rough-path csv has no data rows".into()));
    }
    let mut t0 = f64::NAN;
    let mut times = vec![0.0; 1];
    let mut s1 = vec![0.0; d];
    let mut q2 = vec![0.0; d * d];
    for (row, &(line_no, line)) in lines[1..].iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        expect_fields(&fields, cols, line_no)?;
        let s = parse_f64(fields[0], line_no)?;
        if row == 0 {
            t0 = s;
            times[0] = s;
        } else if s.to_bits() != t0.to_bits() {
            return Err(Error::Data(format!(
                "line {line_no}: anchored rows must share the base time {t0}, found {s}"
            )));
        }
        times.push(parse_f64(fields[1], line_no)?);
        for f in &fields[2..] {
            let v = parse_f64(f, line_no)?;
            if s1.len() < times.len() * d {
                s1.push(v);
            } else {
                q2.push(v);
            }
        }
    }
    match RoughPath::from_anchored(times, d, p, s1, q2) {
        Ok(x) => Ok(x),
        Err(e) => data_err("rough-path csv", e),
    }
}

// ---------------------------------------------------------------------------
// Controls: `s,t,omega` over every grid pair `s < t`.
// ---------------------------------------------------------------------------

/// `s,t,omega` rows for every grid pair `s < t`, outer index first.
pub fn control_csv(c: &Control) -> String {
    let n = c.len();
    let mut out = String::from("s,t,omega\n");
    for i in 0..n {
        for j in (i + 1)..n {
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_f64(c.times()[i]),
                fmt_f64(c.times()[j]),
                fmt_f64(c.value_idx(i, j))
            );
        }
    }
    out
}

/// Parses [`control_csv`] output: the grid is recovered as the union of the
/// row times and every pair `s < t` must be present exactly once.
pub fn parse_control_csv(text: &str) -> Result<Control> {
    let lines = csv_lines(text);
    let (_, header) = *lines
        .first()
        .ok_or_else(|| Error::Data("empty control csv".into()))?;
    expect_header(header, "s,t,omega")?;
    let mut rows = Vec::with_capacity(lines.len() - 1);
    let mut times: Vec<f64> = Vec::new();
    for &(line_no, line) in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        expect_fields(&fields, 3, line_no)?;
        let s = parse_f64(fields[0], line_no)?;
        let t = parse_f64(fields[1], line_no)?;
        let w = parse_f64(fields[2], line_no)?;
        if !(s.is_finite() && t.is_finite()) {
            return Err(Error::Data(format!("line {line_no}: non-finite time")));
        }
        rows.push((s, t, w, line_no));
        times.push(s);
        times.push(t);
    }
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    times.dedup();
    let n = times.len();
    if n < 2 {
        return Err(Error::Data("control csv covers fewer than two times".into()));
    }
    let idx = |t: f64| times.partition_point(|&v| v < t);
    let mut table = vec![f64::NAN; n * n];
    for (s, t, w, line_no) in rows {
        let (i, j) = (idx(s), idx(t));
        if i >= j {
            return Err(Error::Data(format!("line {line_no}: need s < t")));
        }
        if !table[i * n + j].is_nan() {
            return Err(Error::Data(format!("line {line_no}: duplicate pair ({s}, {t})")));
        }
        table[i * n + j] = w;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if table[i * n + j].is_nan() {
                return Err(Error::Data(format!(
                    "control csv is missing the pair ({}, {})",
                    times[i], times[j]
                )));
            }
        }
    }
    match Control::from_fn(Arc::new(times.clone()), |i, j| {
        if i == j {
            0.0
        } else {
            table[i * n + j]
        }
    }) {
        Ok(c) => Ok(c),
        Err(e) => data_err("control csv", e),
    }
}

// ---------------------------------------------------------------------------
// Report tables.
// ---------------------------------------------------------------------------

/// `h,sup_distance` rows of a scheme-agreement probe.
pub fn probe_csv(rows: &[ProbeRow]) -> String {
    let mut out = String::from("h,sup_distance\n");
    for r in rows {
        let _ = writeln!(out, "{},{}", fmt_f64(r.h), fmt_f64(r.distance));
    }
    out
}

/// `depth,sup_ratio` rows of a remainder-scaling report.
pub fn scaling_csv(rows: &[(usize, f64)]) -> String {
    let mut out = String::from("depth,sup_ratio\n");
    for (depth, ratio) in rows {
        let _ = writeln!(out, "{depth},{}", fmt_f64(*ratio));
    }
    out
}

/// `t,y,m` rows of a reflected trajectory with its boundary measure.
pub fn reflected_csv(y: &SampledPath, m: &SampledPath) -> Result<String> {
    if y.dim() != 1 || m.dim() != 1 || y.times() != m.times() {
        return Err(Error::Mismatch(
            "reflected output needs scalar y and m on the same grid".into(),
        ));
    }
    let mut out = String::from("t,y,m\n");
    for k in 0..y.len() {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_f64(y.times()[k]),
            fmt_f64(y.component(k, 0)),
            fmt_f64(m.component(k, 0))
        );
    }
    Ok(out)
}

/// `t,G` rows of an energy functional along a run.
pub fn energy_csv(times: &[f64], g: &[f64]) -> Result<String> {
    if times.len() != g.len() {
        return Err(Error::Mismatch(format!(
            "{} times against {} energy values",
            times.len(),
            g.len()
        )));
    }
    let mut out = String::from("t,G\n");
    for (t, v) in times.iter().zip(g) {
        let _ = writeln!(out, "{},{}", fmt_f64(*t), fmt_f64(*v));
    }
    Ok(out)
}

/// Parses [`energy_csv`] output back into `(times, values)`.
pub fn parse_energy_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let lines = csv_lines(text);
    let (_, header) = *lines
        .first()
        .ok_or_else(|| Error::Data("empty energy csv".into()))?;
    expect_header(header, "t,G")?;
    let mut times = Vec::with_capacity(lines.len() - 1);
    let mut vals = Vec::with_capacity(lines.len() - 1);
    for &(line_no, line) in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        expect_fields(&fields, 2, line_no)?;
        times.push(parse_f64(fields[0], line_no)?);
        vals.push(parse_f64(fields[1], line_no)?);
    }
    Ok((times, vals))
}

/// `t,u_1..u_nx` rows of solution snapshots on a periodic grid.
pub fn snapshots_csv(times: &[f64], u: &[Vec<f64>]) -> Result<String> {
    if times.len() != u.len() || u.is_empty() {
        return Err(Error::Mismatch(format!(
            "{} times against {} snapshots",
            times.len(),
            u.len()
        )));
    }
    let n_x = u[0].len();
    let mut out = path_header(n_x, "u");
    out.push('\n');
    for (t, row) in times.iter().zip(u) {
        if row.len() != n_x {
            return Err(Error::Mismatch("ragged snapshot rows".into()));
        }
        let _ = write!(out, "{}", fmt_f64(*t));
        for v in row {
            let _ = write!(out, ",{}", fmt_f64(*v));
        }
        out.push('\n');
    }
    Ok(out)
}

/// The plain-text certificate block printed by the verification commands.
pub fn certificate_block(cert: &GronwallCertificate) -> String {
    format!(
        "{{\n  \"alpha\": {},\n  \"bound\": {},\n  \"sup_g\": {},\n  \"worst_defect\": {},\n  \"admissible_pairs\": {},\n  \"skipped_pairs\": {},\n  \"step_regular\": {},\n  \"holds\": {}\n}}\n",
        fmt_f64(cert.alpha),
        fmt_f64(cert.bound),
        fmt_f64(cert.sup_g),
        fmt_f64(cert.hypothesis.worst_defect),
        cert.hypothesis.admissible_pairs,
        cert.hypothesis.skipped_pairs,
        cert.step_regular,
        cert.holds
    )
}

// ---------------------------------------------------------------------------
// File wrappers.
// ---------------------------------------------------------------------------

/// Writes a string to a file, creating parent directories as needed.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn write_path_csv(path: &Path, x: &SampledPath) -> Result<()> {
    write_text(path, &path_csv(x))
}

pub fn read_path_csv(path: &Path) -> Result<SampledPath> {
    parse_path_csv(&fs::read_to_string(path)?)
}

pub fn write_rough_csv(path: &Path, x: &RoughPath) -> Result<()> {
    write_text(path, &rough_csv(x))
}

pub fn read_rough_csv(path: &Path, p: f64) -> Result<RoughPath> {
    parse_rough_csv(&fs::read_to_string(path)?, p)
}

pub fn write_control_csv(path: &Path, c: &Control) -> Result<()> {
    write_text(path, &control_csv(c))
}

pub fn read_control_csv(path: &Path) -> Result<Control> {
    parse_control_csv(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rough::{brownian_sample_lift, lift_piecewise_linear, uniform_grid};
    use crate::variation::{check_superadditive, control_from_pvar};

    fn wiggle(n: usize, d: usize) -> SampledPath {
        let times = uniform_grid(0.0, 1.0, n - 1);
        SampledPath::from_fn(times, d, |t| {
            (0..d)
                .map(|a| (3.0 * t + a as f64).sin() + t / (1.0 + a as f64))
                .collect()
        })
        .unwrap()
    }

    #[test]
    fn float_formatting_round_trips_awkward_values() {
        for &v in &[
            0.0,
            -0.0,
            1.0 / 3.0,
            -2.5e-308,
            1.7976931348623157e308,
            6.02e23,
            -1.0 + f64::EPSILON,
            f64::MIN_POSITIVE,
        ] {
            let back: f64 = fmt_f64(v).parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "value {v}");
        }
    }

    #[test]
    fn path_csv_round_trips_bitwise() {
        let x = wiggle(17, 3);
        let text = path_csv(&x);
        assert!(text.starts_with("t,x_1,x_2,x_3\n"));
        let back = parse_path_csv(&text).unwrap();
        assert_eq!(back.dim(), 3);
        assert_eq!(back.times(), x.times());
        for k in 0..x.len() {
            assert_eq!(back.value(k), x.value(k));
        }
        assert_eq!(path_csv(&back), text);
    }

    #[test]
    fn rough_csv_round_trips_bitwise() {
        let (_, x) = brownian_sample_lift(11, 64, 2, 1.0, 2.5).unwrap();
        let text = rough_csv(&x);
        assert!(text.starts_with("s,t,X1_1,X1_2,X2_11,X2_12,X2_21,X2_22\n"));
        let back = parse_rough_csv(&text, 2.5).unwrap();
        assert_eq!(back.times(), x.times());
        assert_eq!(back.dim(), x.dim());
        let n = x.len();
        for i in 0..n {
            for j in i..n {
                assert_eq!(back.level1_idx(i, j), x.level1_idx(i, j), "level1 ({i},{j})");
                assert_eq!(back.level2_idx(i, j), x.level2_idx(i, j), "level2 ({i},{j})");
            }
        }
        assert_eq!(rough_csv(&back), text);
    }

    #[test]
    fn rough_csv_round_trips_a_piecewise_linear_lift() {
        let x = lift_piecewise_linear(&wiggle(9, 1), 2.0).unwrap();
        let back = parse_rough_csv(&rough_csv(&x), 2.0).unwrap();
        for i in 0..x.len() {
            for j in i..x.len() {
                assert_eq!(back.level2_idx(i, j), x.level2_idx(i, j));
            }
        }
    }

    #[test]
    fn control_csv_round_trips_bitwise() {
        let c = control_from_pvar(&wiggle(9, 2), 2.0).unwrap();
        let text = control_csv(&c);
        let back = parse_control_csv(&text).unwrap();
        assert_eq!(back.times(), c.times());
        for i in 0..c.len() {
            for j in i..c.len() {
                assert_eq!(back.value_idx(i, j).to_bits(), c.value_idx(i, j).to_bits());
            }
        }
        assert!(check_superadditive(&back) <= 1e-12);
        assert_eq!(control_csv(&back), text);
    }

    #[test]
    fn malformed_input_is_a_data_error() {
        let cases = [
            ("", "empty"),
            ("wrong,header\n0,1\n", "header"),
            ("t,x_1\n0.0\n", "field count"),
            ("t,x_1\n0.0,oops\n", "bad float"),
            ("t,x_1\n1.0,0.0\n0.5,0.0\n", "non-increasing grid"),
        ];
        for (text, what) in cases {
            match parse_path_csv(text) {
                Err(Error::Data(_)) => {}
                other => panic!("{what}: expected a data error, got {other:?}"),
            }
        }
        let rough_bad = "s,t,X1_1,X2_11\n0.0,1.0,1.0,0.5\n0.25,2.0,2.0,2.0\n";
        match parse_rough_csv(rough_bad, 2.0) {
            Err(Error::Data(msg)) => assert!(msg.contains("base time"), "{msg}"),
            other => panic!("expected a data error, got {other:?}"),
        }
        let ctrl_missing = "s,t,omega\n0.0,1.0,1.0\n1.0,2.0,1.0\n";
        match parse_control_csv(ctrl_missing) {
            Err(Error::Data(msg)) => assert!(msg.contains("missing"), "{msg}"),
            other => panic!("expected a data error, got {other:?}"),
        }
    }

    #[test]
    fn report_tables_have_the_documented_layout() {
        let rows = vec![
            ProbeRow { h: 0.5, distance: 0.25, stability_warning: true },
            ProbeRow { h: 0.25, distance: 0.0625, stability_warning: false },
        ];
        let text = probe_csv(&rows);
        assert_eq!(
            text,
            "h,sup_distance\n5.0000000000000000e-1,2.5000000000000000e-1\n2.5000000000000000e-1,6.2500000000000000e-2\n"
        );
        assert_eq!(
            scaling_csv(&[(1, 0.5)]),
            "depth,sup_ratio\n1,5.0000000000000000e-1\n"
        );
        let times = [0.0, 1.0];
        assert_eq!(
            energy_csv(&times, &[2.0, 1.0]).unwrap(),
            "t,G\n0.0000000000000000e0,2.0000000000000000e0\n1.0000000000000000e0,1.0000000000000000e0\n"
        );
        let snaps = snapshots_csv(&times, &[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert!(snaps.starts_with("t,u_1,u_2\n"));
        assert_eq!(snaps.lines().count(), 3);
    }

    #[test]
    fn trajectory_and_reflected_layouts() {
        let y = SampledPath::new(vec![0.0, 1.0], vec![1.0, 2.0], 1).unwrap();
        let m = SampledPath::new(vec![0.0, 1.0], vec![0.0, 0.5], 1).unwrap();
        let text = reflected_csv(&y, &m).unwrap();
        assert!(text.starts_with("t,y,m\n"));
        assert_eq!(text.lines().count(), 3);
        let t2 = trajectory_csv(&y);
        assert!(t2.starts_with("t,y_1\n"));
        assert_eq!(parse_trajectory_csv(&t2).unwrap().value(1), y.value(1));
    }

    #[test]
    fn file_round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("x.csv");
        let x = wiggle(5, 2);
        write_path_csv(&file, &x).unwrap();
        let back = read_path_csv(&file).unwrap();
        assert_eq!(back.times(), x.times());
        assert_eq!(back.value(4), x.value(4));
    }
}
