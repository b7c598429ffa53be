//! Rough differential equations driven by step-2 rough paths.
//!
//! For `dy = f(y) dX` with `y` in `R^N` and a d-dimensional driver, one step
//! of the second-order scheme is
//!
//! ```text
//!   y_{k+1} = y_k + Σ_i f_i(y_k) X¹[i] + Σ_{i,j} f2_{ij}(y_k) X²[j][i],
//!   f2_{ij} := f′_i f_j   (componentwise  f2_{ij}^a = Σ_b ∂_b f_i^a f_j^b),
//! ```
//!
//! where `X²[j][i] = ∫ δx^j dx^i`: pairing `f2_{ij}` with the transposed
//! entry is what a Taylor expansion of the flow produces (the coefficient of
//! `∫ δx^i dx^j` is `f′_j f_i`). For `f(y) = y` against `x_t = t` this gives
//! the familiar `y_{k+1} = y_k (1 + h + h²/2)`.
//!
//! The local remainder of a candidate solution path,
//!
//! ```text
//!   y♮_st = δy_st - f(y_s) X¹_st - Σ f2_{ij}(y_s) X²_st[j][i],
//! ```
//!
//! should scale like `ω(s,t)^{3/p}` in the canonical control of the driver;
//! [`remainder_scaling_report`] measures that exponent over dyadic intervals.
//! [`ode_oracle`] integrates the same field against the piecewise-linear
//! driver with classical fourth-order Runge-Kutta and is the reference the
//! rough solver is compared against for smooth drivers.

use rand_chacha::ChaCha12Rng;
use rand_core::SeedableRng;

use crate::error::{Error, Result};
use crate::num::{norm2, u01};
use crate::rough::{RoughPath, SampledPath};
use crate::variation::rough_control_value;

/// A driving vector field `f: R^N -> R^{N x d}` with its Jacobian.
///
/// Layouts (row-major): `f(y)[a*d + i]` is the coefficient of `dx^i` in
/// `dy^a`; the Jacobian fills `df(y)[(a*d + i)*N + b] = ∂ f_i^a / ∂ y^b`.
pub struct VectorField {
    state_dim: usize,
    driver_dim: usize,
    f: Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
    df: Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
}

impl VectorField {
    pub fn new(
        state_dim: usize,
        driver_dim: usize,
        f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        df: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Result<Self> {
        if state_dim == 0 || driver_dim == 0 {
            return Err(Error::ParamRange {
                name: "dimensions",
                expected: ">= 1",
                got: format!("state {state_dim}, driver {driver_dim}"),
            });
        }
        Ok(Self {
            state_dim,
            driver_dim,
            f: Box::new(f),
            df: Box::new(df),
        })
    }

    /// Scalar equation `dy = c dx`.
    pub fn constant_1d(c: f64) -> Self {
        Self::new(1, 1, move |_, out| out[0] = c, |_, out| out[0] = 0.0).unwrap()
    }

    /// Scalar equation `dy = y dx` (exponential flow).
    pub fn linear_1d() -> Self {
        Self::new(1, 1, |y, out| out[0] = y[0], |_, out| out[0] = 1.0).unwrap()
    }

    /// Scalar equation `dy = sin(y) dx`.
    pub fn sin_1d() -> Self {
        Self::new(
            1,
            1,
            |y, out| out[0] = y[0].sin(),
            |y, out| out[0] = y[0].cos(),
        )
        .unwrap()
    }

    /// Linear system `dy = A y dx` for a scalar driver; `a` is `N x N`
    /// row-major.
    pub fn linear_matrix(state_dim: usize, a: Vec<f64>) -> Result<Self> {
        if a.len() != state_dim * state_dim {
            return Err(Error::Mismatch(format!(
                "matrix has {} entries, expected {}",
                a.len(),
                state_dim * state_dim
            )));
        }
        let a2 = a.clone();
        Self::new(
            state_dim,
            1,
            move |y, out| {
                for r in 0..state_dim {
                    out[r] = (0..state_dim).map(|c| a[r * state_dim + c] * y[c]).sum();
                }
            },
            move |_, out| out.copy_from_slice(&a2),
        )
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn driver_dim(&self) -> usize {
        self.driver_dim
    }

    /// Fills `out` (length `N*d`) with `f(y)`.
    pub fn eval_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.state_dim);
        debug_assert_eq!(out.len(), self.state_dim * self.driver_dim);
        (self.f)(y, out);
    }

    /// Fills `out` (length `N*d*N`) with the Jacobian.
    pub fn jacobian_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.state_dim * self.driver_dim * self.state_dim);
        (self.df)(y, out);
    }

    /// Fills `out` (length `d*d*N`) with `f2_{ij} = f′_i f_j`:
    /// `out[(i*d + j)*N + a] = Σ_b df[(a*d + i)*N + b] f[b*d + j]`.
    /// `fbuf` and `dfbuf` are scratch of sizes `N*d` and `N*d*N`.
    pub fn f2_into(&self, y: &[f64], fbuf: &mut [f64], dfbuf: &mut [f64], out: &mut [f64]) {
        let (n, d) = (self.state_dim, self.driver_dim);
        self.eval_into(y, fbuf);
        self.jacobian_into(y, dfbuf);
        for i in 0..d {
            for j in 0..d {
                for a in 0..n {
                    let mut s = 0.0;
                    for b in 0..n {
                        s += dfbuf[(a * d + i) * n + b] * fbuf[b * d + j];
                    }
                    out[(i * d + j) * n + a] = s;
                }
            }
        }
    }

    /// Compares the supplied Jacobian against central finite differences of
    /// `f` at `samples` random points of the box `[lo, hi]^N`; returns the
    /// largest relative discrepancy.
    pub fn derivative_check(&self, lo: f64, hi: f64, samples: usize, seed: u64) -> f64 {
        let (n, d) = (self.state_dim, self.driver_dim);
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut y = vec![0.0; n];
        let mut fp = vec![0.0; n * d];
        let mut fm = vec![0.0; n * d];
        let mut jac = vec![0.0; n * d * n];
        let mut worst = 0.0_f64;
        for _ in 0..samples {
            for v in y.iter_mut() {
                *v = lo + (hi - lo) * u01(&mut rng);
            }
            self.jacobian_into(&y, &mut jac);
            for b in 0..n {
                let eps = 1e-6 * (1.0 + y[b].abs());
                let keep = y[b];
                y[b] = keep + eps;
                self.eval_into(&y, &mut fp);
                y[b] = keep - eps;
                self.eval_into(&y, &mut fm);
                y[b] = keep;
                for ai in 0..n * d {
                    let fd = (fp[ai] - fm[ai]) / (2.0 * eps);
                    let err = (fd - jac[ai * n + b]).abs() / (1.0 + jac[ai * n + b].abs());
                    worst = worst.max(err);
                }
            }
        }
        worst
    }

    /// Sampled sup bounds of `|f|`, `|f′|`, `|f2|` over the box `[lo, hi]^N`
    /// (Frobenius norms at `samples` random points).
    pub fn sampled_bounds(&self, lo: f64, hi: f64, samples: usize, seed: u64) -> FieldBounds {
        let (n, d) = (self.state_dim, self.driver_dim);
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut y = vec![0.0; n];
        let mut fbuf = vec![0.0; n * d];
        let mut dfbuf = vec![0.0; n * d * n];
        let mut f2buf = vec![0.0; d * d * n];
        let mut out = FieldBounds {
            f_sup: 0.0,
            df_sup: 0.0,
            f2_sup: 0.0,
        };
        for _ in 0..samples {
            for v in y.iter_mut() {
                *v = lo + (hi - lo) * u01(&mut rng);
            }
            self.f2_into(&y, &mut fbuf, &mut dfbuf, &mut f2buf);
            out.f_sup = out.f_sup.max(norm2(&fbuf));
            out.df_sup = out.df_sup.max(norm2(&dfbuf));
            out.f2_sup = out.f2_sup.max(norm2(&f2buf));
        }
        out
    }
}

/// Sampled sup norms of a field and its derived quantities.
#[derive(Clone, Copy, Debug)]
pub struct FieldBounds {
    pub f_sup: f64,
    pub df_sup: f64,
    pub f2_sup: f64,
}

fn check_compatible(field: &VectorField, x: &RoughPath, y0: &[f64]) -> Result<()> {
    if field.driver_dim() != x.dim() {
        return Err(Error::Mismatch(format!(
            "field expects a {}-dimensional driver, rough path has {}",
            field.driver_dim(),
            x.dim()
        )));
    }
    if y0.len() != field.state_dim() {
        return Err(Error::Mismatch(format!(
            "initial state has {} components, field has {}",
            y0.len(),
            field.state_dim()
        )));
    }
    Ok(())
}

/// Marches the second-order scheme across the driver's grid; the returned
/// path shares the driver's times.
pub fn solve_step2(field: &VectorField, x: &RoughPath, y0: &[f64]) -> Result<SampledPath> {
    check_compatible(field, x, y0)?;
    let (n, d) = (field.state_dim(), field.driver_dim());
    let steps = x.len() - 1;
    let mut vals = vec![0.0; (steps + 1) * n];
    vals[..n].copy_from_slice(y0);
    let mut fbuf = vec![0.0; n * d];
    let mut dfbuf = vec![0.0; n * d * n];
    let mut f2buf = vec![0.0; d * d * n];
    let mut x1 = vec![0.0; d];
    let mut x2 = vec![0.0; d * d];
    for k in 0..steps {
        x.level1_into(k, k + 1, &mut x1);
        x.level2_into(k, k + 1, &mut x2);
        let (prev, next) = vals.split_at_mut((k + 1) * n);
        let yk = &prev[k * n..];
        field.f2_into(yk, &mut fbuf, &mut dfbuf, &mut f2buf);
        for a in 0..n {
            let mut inc = 0.0;
            for i in 0..d {
                inc += fbuf[a * d + i] * x1[i];
                for j in 0..d {
                    inc += f2buf[(i * d + j) * n + a] * x2[j * d + i];
                }
            }
            next[a] = yk[a] + inc;
        }
    }
    SampledPath::new(x.times().to_vec(), vals, n)
}

/// Local remainder `y♮_st` of a candidate solution at grid times `s <= t`.
pub fn remainder(
    field: &VectorField,
    x: &RoughPath,
    y: &SampledPath,
    s: f64,
    t: f64,
) -> Result<Vec<f64>> {
    check_compatible(field, x, y.value(0))?;
    if y.times() != x.times() {
        return Err(Error::Mismatch(
            "solution and driver live on different grids".into(),
        ));
    }
    let i = x.index_of(s)?;
    let j = x.index_of(t)?;
    if i > j {
        return Err(Error::BadInterval { s, t });
    }
    Ok(remainder_idx(field, x, y, i, j))
}

fn remainder_idx(
    field: &VectorField,
    x: &RoughPath,
    y: &SampledPath,
    i: usize,
    j: usize,
) -> Vec<f64> {
    let (n, d) = (field.state_dim(), field.driver_dim());
    let mut fbuf = vec![0.0; n * d];
    let mut dfbuf = vec![0.0; n * d * n];
    let mut f2buf = vec![0.0; d * d * n];
    let mut x1 = vec![0.0; d];
    let mut x2 = vec![0.0; d * d];
    x.level1_into(i, j, &mut x1);
    x.level2_into(i, j, &mut x2);
    let ys = y.value(i);
    field.f2_into(ys, &mut fbuf, &mut dfbuf, &mut f2buf);
    let yt = y.value(j);
    (0..n)
        .map(|a| {
            let mut v = yt[a] - ys[a];
            for i2 in 0..d {
                v -= fbuf[a * d + i2] * x1[i2];
                for j2 in 0..d {
                    v -= f2buf[(i2 * d + j2) * n + a] * x2[j2 * d + i2];
                }
            }
            v
        })
        .collect()
}

/// Remainder-to-control ratios on one dyadic level.
#[derive(Clone, Copy, Debug)]
pub struct ScalingRow {
    pub depth: usize,
    pub pairs: usize,
    /// `max over pairs of |y♮_st| / ω(s,t)^{3/p}`.
    pub max_ratio: f64,
}

/// Remainder scaling over dyadic refinements of the grid.
#[derive(Clone, Debug)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Largest over smallest nonzero per-depth max ratio; near 1 means the
    /// remainder tracks `ω^{3/p}` across scales.
    pub spread: f64,
}

/// Measures `|y♮_st| / ω(s,t)^{3/p}` over the dyadic intervals of depth
/// `1..=max_depth` (depths beyond divisibility of the step count stop the
/// scan). `ω` is the canonical control of the driver restricted to `[s,t]`.
pub fn remainder_scaling_report(
    field: &VectorField,
    x: &RoughPath,
    y: &SampledPath,
    max_depth: usize,
) -> Result<ScalingReport> {
    check_compatible(field, x, y.value(0))?;
    if y.times() != x.times() {
        return Err(Error::Mismatch(
            "solution and driver live on different grids".into(),
        ));
    }
    let steps = x.len() - 1;
    let exponent = 3.0 / x.p();
    let mut rows = Vec::new();
    for depth in 1..=max_depth {
        let pieces = 1usize << depth;
        if steps % pieces != 0 {
            break;
        }
        let width = steps / pieces;
        let mut max_ratio = 0.0_f64;
        for k in 0..pieces {
            let (i, j) = (k * width, (k + 1) * width);
            let rem = norm2(&remainder_idx(field, x, y, i, j));
            let omega = rough_control_value(x, i, j);
            if omega == 0.0 {
                if rem > 1e-13 {
                    return Err(Error::DegenerateControl {
                        s: x.times()[i],
                        t: x.times()[j],
                        remainder: rem,
                    });
                }
                continue;
            }
            max_ratio = max_ratio.max(rem / omega.powf(exponent));
        }
        rows.push(ScalingRow {
            depth,
            pairs: pieces,
            max_ratio,
        });
    }
    let nonzero: Vec<f64> = rows
        .iter()
        .map(|r| r.max_ratio)
        .filter(|&r| r > 0.0)
        .collect();
    let spread = match (
        nonzero.iter().cloned().fold(f64::INFINITY, f64::min),
        nonzero.iter().cloned().fold(0.0, f64::max),
    ) {
        (lo, hi) if lo.is_finite() && lo > 0.0 => hi / lo,
        _ => 1.0,
    };
    Ok(ScalingReport { rows, spread })
}

/// Classical RK4 on `dy/dt = f(y) · (δx/h)` segment by segment along the
/// piecewise-linear interpolation of the driver, with `substeps` Runge-Kutta
/// steps per segment. Independent of the rough stepping above.
pub fn ode_oracle(
    field: &VectorField,
    x: &SampledPath,
    y0: &[f64],
    substeps: usize,
) -> Result<SampledPath> {
    if field.driver_dim() != x.dim() {
        return Err(Error::Mismatch(format!(
            "field expects a {}-dimensional driver, path has {}",
            field.driver_dim(),
            x.dim()
        )));
    }
    if y0.len() != field.state_dim() {
        return Err(Error::Mismatch(format!(
            "initial state has {} components, field has {}",
            y0.len(),
            field.state_dim()
        )));
    }
    if substeps == 0 {
        return Err(Error::ParamRange {
            name: "substeps",
            expected: ">= 1",
            got: substeps.to_string(),
        });
    }
    let (n, d) = (field.state_dim(), field.driver_dim());
    let mut vals = vec![0.0; x.len() * n];
    vals[..n].copy_from_slice(y0);
    let mut slope = vec![0.0; d];
    let mut fbuf = vec![0.0; n * d];
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut stage = vec![0.0; n];
    let drift = |y: &[f64], slope: &[f64], fbuf: &mut [f64], out: &mut [f64]| {
        (field.f)(y, fbuf);
        for a in 0..n {
            out[a] = (0..d).map(|i| fbuf[a * d + i] * slope[i]).sum();
        }
    };
    for seg in 0..x.len() - 1 {
        let h_seg = x.times()[seg + 1] - x.times()[seg];
        for i in 0..d {
            slope[i] = (x.component(seg + 1, i) - x.component(seg, i)) / h_seg;
        }
        let h = h_seg / substeps as f64;
        for _ in 0..substeps {
            drift(&y, &slope, &mut fbuf, &mut k1);
            for a in 0..n {
                stage[a] = y[a] + 0.5 * h * k1[a];
            }
            drift(&stage, &slope, &mut fbuf, &mut k2);
            for a in 0..n {
                stage[a] = y[a] + 0.5 * h * k2[a];
            }
            drift(&stage, &slope, &mut fbuf, &mut k3);
            for a in 0..n {
                stage[a] = y[a] + h * k3[a];
            }
            drift(&stage, &slope, &mut fbuf, &mut k4);
            for a in 0..n {
                y[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
            }
        }
        vals[(seg + 1) * n..(seg + 2) * n].copy_from_slice(&y);
    }
    SampledPath::new(x.times().to_vec(), vals, n)
}
