//! One-dimensional reflected rough differential equations.
//!
//! The constrained problem keeps the state nonnegative by adding a
//! nondecreasing reflection term `m` that acts only when the state is at the
//! boundary (`y_t dm_t = 0`). Two independent discretizations are provided:
//!
//! * a projection scheme: one free step, then clamp at 0, with the clamp
//!   residue recorded as `δm`;
//! * a penalization scheme: the free step plus the stiff drift
//!   `(h/ε) max(-y, 0)`, which pushes the state back without ever clamping.
//!
//! The two schemes converge to the same limit when the problem has a unique
//! solution; [`uniqueness_probe`] tabulates their sup-distance under mesh
//! refinement as the empirical shadow of that uniqueness. For a given path
//! `ξ` (no dynamics), the reflection is the classical running-max formula
//! implemented by [`skorokhod_map_1d`], which serves as the exact oracle.

use crate::error::{Error, Result};
use crate::rde::VectorField;
use crate::rough::{RoughPath, SampledPath};

/// Reflection of a given scalar path at 0: `m_t = max(0, sup_{s<=t}(-ξ_s))`
/// and `y = ξ + m`, evaluated over grid points. Requires `ξ_0 >= 0`.
pub fn skorokhod_map_1d(xi: &SampledPath) -> Result<(SampledPath, SampledPath)> {
    if xi.dim() != 1 {
        return Err(Error::Mismatch(format!(
            "reflection map is one-dimensional, path has {} components",
            xi.dim()
        )));
    }
    if xi.component(0, 0) < 0.0 {
        return Err(Error::ParamRange {
            name: "xi_0",
            expected: ">= 0",
            got: format!("{}", xi.component(0, 0)),
        });
    }
    let n = xi.len();
    let mut m = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut running = 0.0_f64;
    for k in 0..n {
        running = running.max(-xi.component(k, 0));
        m[k] = running;
        y[k] = xi.component(k, 0) + running;
    }
    Ok((
        SampledPath::new(xi.times().to_vec(), y, 1)?,
        SampledPath::new(xi.times().to_vec(), m, 1)?,
    ))
}

/// Projection-scheme output: nonnegative state and its nondecreasing
/// reflection term on the solve grid.
pub struct ReflectedSolution {
    pub y: SampledPath,
    pub m: SampledPath,
}

/// Penalization-scheme output. The state may dip below 0 (the penalty acts
/// through a boundary layer of depth ~`ε` rather than clamping); `m`
/// accumulates the penalty displacements.
pub struct PenalizedSolution {
    pub y: SampledPath,
    pub m: SampledPath,
    /// Set when some step has `h/ε > 1`: the penalty is stiff for the step
    /// size and the state relaxes oscillating instead of monotonically.
    pub stability_warning: bool,
}

fn check_scalar_reflected(field: &VectorField, x: &RoughPath, y0: f64) -> Result<()> {
    if field.state_dim() != 1 {
        return Err(Error::Mismatch(format!(
            "reflection at 0 needs a scalar state, field has {}",
            field.state_dim()
        )));
    }
    if field.driver_dim() != x.dim() {
        return Err(Error::Mismatch(format!(
            "field expects a {}-dimensional driver, rough path has {}",
            field.driver_dim(),
            x.dim()
        )));
    }
    if !(y0.is_finite() && y0 > 0.0) {
        return Err(Error::ParamRange {
            name: "y_in",
            expected: "> 0",
            got: format!("{y0}"),
        });
    }
    Ok(())
}

fn restricted(x: &RoughPath, subgrid: Option<&[usize]>) -> Result<Option<RoughPath>> {
    subgrid.map(|idx| x.restrict(idx)).transpose()
}

/// One free second-order step of the scalar equation from `y`, returning the
/// unclamped value `z`.
fn free_step(
    field: &VectorField,
    x: &RoughPath,
    k: usize,
    y: f64,
    bufs: &mut StepBufs,
) -> f64 {
    let d = field.driver_dim();
    x.level1_into(k, k + 1, &mut bufs.x1);
    x.level2_into(k, k + 1, &mut bufs.x2);
    field.f2_into(&[y], &mut bufs.f, &mut bufs.df, &mut bufs.f2);
    let mut z = y;
    for i in 0..d {
        z += bufs.f[i] * bufs.x1[i];
        for j in 0..d {
            z += bufs.f2[i * d + j] * bufs.x2[j * d + i];
        }
    }
    z
}

struct StepBufs {
    x1: Vec<f64>,
    x2: Vec<f64>,
    f: Vec<f64>,
    df: Vec<f64>,
    f2: Vec<f64>,
}

impl StepBufs {
    fn new(d: usize) -> Self {
        Self {
            x1: vec![0.0; d],
            x2: vec![0.0; d * d],
            f: vec![0.0; d],
            df: vec![0.0; d],
            f2: vec![0.0; d * d],
        }
    }
}

/// Projection scheme: `z = y_k + f(y_k)X¹ + f2(y_k)X²`, then
/// `y_{k+1} = max(z, 0)` with `δm = y_{k+1} - z`. By construction `y >= 0`,
/// `m` is nondecreasing with `m_0 = 0`, and `y·δm = 0` holds at the clamped
/// endpoint; complementarity against the left endpoint is measured, not
/// assumed. `subgrid` restricts the driver to a subset of its grid indices
/// before solving.
pub fn solve_reflected_step2(
    field: &VectorField,
    x: &RoughPath,
    y0: f64,
    subgrid: Option<&[usize]>,
) -> Result<ReflectedSolution> {
    check_scalar_reflected(field, x, y0)?;
    let owned = restricted(x, subgrid)?;
    let x = owned.as_ref().unwrap_or(x);
    let n = x.len();
    let mut y = vec![0.0; n];
    let mut m = vec![0.0; n];
    y[0] = y0;
    let mut bufs = StepBufs::new(field.driver_dim());
    for k in 0..n - 1 {
        let z = free_step(field, x, k, y[k], &mut bufs);
        y[k + 1] = z.max(0.0);
        m[k + 1] = m[k] + (y[k + 1] - z);
    }
    Ok(ReflectedSolution {
        y: SampledPath::new(x.times().to_vec(), y, 1)?,
        m: SampledPath::new(x.times().to_vec(), m, 1)?,
    })
}

/// Penalization scheme: the free step plus `(h/ε) max(-y_k, 0)`. With
/// `ε = sqrt(h)` (the default, `epsilon = None`) the state tracks the
/// projection solution up to a boundary layer of depth about
/// `ε · |inward drift|`. Flags stiffness (`h/ε > 1`) instead of failing.
pub fn solve_reflected_penalized(
    field: &VectorField,
    x: &RoughPath,
    y0: f64,
    epsilon: Option<f64>,
    subgrid: Option<&[usize]>,
) -> Result<PenalizedSolution> {
    check_scalar_reflected(field, x, y0)?;
    let owned = restricted(x, subgrid)?;
    let x = owned.as_ref().unwrap_or(x);
    let n = x.len();
    let mean_h = (x.times()[n - 1] - x.times()[0]) / (n - 1) as f64;
    let eps = epsilon.unwrap_or_else(|| mean_h.sqrt());
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::ParamRange {
            name: "epsilon",
            expected: "> 0",
            got: format!("{eps}"),
        });
    }
    let mut y = vec![0.0; n];
    let mut m = vec![0.0; n];
    y[0] = y0;
    let mut warning = false;
    let mut bufs = StepBufs::new(field.driver_dim());
    for k in 0..n - 1 {
        let h = x.times()[k + 1] - x.times()[k];
        if h / eps > 1.0 {
            warning = true;
        }
        let z = free_step(field, x, k, y[k], &mut bufs);
        let lift = (h / eps) * (-y[k]).max(0.0);
        y[k + 1] = z + lift;
        m[k + 1] = m[k] + lift;
    }
    Ok(PenalizedSolution {
        y: SampledPath::new(x.times().to_vec(), y, 1)?,
        m: SampledPath::new(x.times().to_vec(), m, 1)?,
        stability_warning: warning,
    })
}

/// Riemann-sum complementarity defect `Σ_k y_{t_k} (m_{t_{k+1}} - m_{t_k})`;
/// near zero when `m` grows only where `y` sits at the boundary.
pub fn complementarity_defect(y: &SampledPath, m: &SampledPath) -> Result<f64> {
    if y.dim() != 1 || m.dim() != 1 || y.times() != m.times() {
        return Err(Error::Mismatch(
            "state and reflection must be scalar paths on one grid".into(),
        ));
    }
    Ok((0..y.len() - 1)
        .map(|k| y.component(k, 0) * (m.component(k + 1, 0) - m.component(k, 0)))
        .sum())
}

/// Local remainder of a candidate reflected solution:
/// `y♮_st = δy_st - f(y_s)X¹ - f2(y_s)X² - δm_st`. Zero on consecutive pairs
/// for both schemes by construction.
pub fn reflected_remainder(
    field: &VectorField,
    x: &RoughPath,
    y: &SampledPath,
    m: &SampledPath,
    s: f64,
    t: f64,
) -> Result<f64> {
    check_scalar_reflected(field, x, 1.0)?;
    if y.times() != x.times() || m.times() != x.times() {
        return Err(Error::Mismatch(
            "solution and driver live on different grids".into(),
        ));
    }
    let i = x.index_of(s)?;
    let j = x.index_of(t)?;
    if i > j {
        return Err(Error::BadInterval { s, t });
    }
    let d = field.driver_dim();
    let mut bufs = StepBufs::new(d);
    x.level1_into(i, j, &mut bufs.x1);
    x.level2_into(i, j, &mut bufs.x2);
    field.f2_into(&[y.component(i, 0)], &mut bufs.f, &mut bufs.df, &mut bufs.f2);
    let mut v = y.component(j, 0) - y.component(i, 0) - (m.component(j, 0) - m.component(i, 0));
    for a in 0..d {
        v -= bufs.f[a] * bufs.x1[a];
        for b in 0..d {
            v -= bufs.f2[a * d + b] * bufs.x2[b * d + a];
        }
    }
    Ok(v)
}

/// One mesh level of the uniqueness probe.
#[derive(Clone, Copy, Debug)]
pub struct ProbeRow {
    /// Mean step of the level's grid.
    pub h: f64,
    /// Sup-distance between the projection and penalized states.
    pub distance: f64,
    /// Stiffness flag of the penalized run at this level.
    pub stability_warning: bool,
}

/// Solves the reflected problem with both schemes (penalization at
/// `ε = sqrt(h)`) on dyadically refined subgrids of the driver, coarsest
/// first, and tabulates their sup-distance. `levels >= 2`; the driver's step
/// count must be divisible by `2^(levels-1)`.
pub fn uniqueness_probe(
    field: &VectorField,
    x: &RoughPath,
    y0: f64,
    levels: usize,
) -> Result<Vec<ProbeRow>> {
    if levels < 2 {
        return Err(Error::ParamRange {
            name: "levels",
            expected: ">= 2",
            got: levels.to_string(),
        });
    }
    let steps = x.len() - 1;
    let coarsest = 1usize << (levels - 1);
    if steps % coarsest != 0 {
        return Err(Error::Mismatch(format!(
            "{steps} steps cannot be refined dyadically over {levels} levels"
        )));
    }
    let mut rows = Vec::with_capacity(levels);
    for level in 0..levels {
        let stride = coarsest >> level;
        let idx: Vec<usize> = (0..=steps / stride).map(|k| k * stride).collect();
        let proj = solve_reflected_step2(field, x, y0, Some(&idx))?;
        let pen = solve_reflected_penalized(field, x, y0, None, Some(&idx))?;
        let distance = crate::rough::sup_distance(&proj.y, &pen.y)?;
        rows.push(ProbeRow {
            h: (x.times()[steps] - x.times()[0]) / (steps / stride) as f64,
            distance,
            stability_warning: pen.stability_warning,
        });
    }
    Ok(rows)
}
