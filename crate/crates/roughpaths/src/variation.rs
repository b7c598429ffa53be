//! p-variation over grid partitions, superadditive controls, and greedy
//! interval partitions.
//!
//! For a path sampled at grid times, the p-variation over `[s, t]` is
//!
//! ```text
//!   ‖x‖_{p-var;[s,t]} = ( sup_P Σ_k |x_{u_{k+1}} - x_{u_k}|^p )^{1/p}
//! ```
//!
//! with the supremum over partitions `P = {s = u_0 < ... < u_m = t}` drawn
//! from the grid. The inner supremum (without the `1/p` root) is
//! superadditive in `(s, t)` and is the canonical control associated with
//! the path. Two-index maps get the same treatment with `|g_{u_k u_{k+1}}|`
//! in place of the increment.
//!
//! The supremum is computed by dynamic programming over right endpoints:
//! `best[j] = max_{i < j} best[i] + w(i, j)` where `w` is the powered edge
//! weight. A brute-force enumeration over all partitions (exponential, small
//! grids only) serves as an independent oracle.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::num::{norm2, pow_p};
use crate::rough::{Increment2, RoughPath, SampledPath};

/// Sup over partitions of `[from, to]` of the partition sum of `w`, computed
/// by dynamic programming; `row[j - from]` is the value for `[from, j]`.
fn dp_row(from: usize, to: usize, mut w: impl FnMut(usize, usize) -> f64) -> Vec<f64> {
    let len = to - from + 1;
    let mut row = vec![0.0; len];
    for j in 1..len {
        let mut best = f64::NEG_INFINITY;
        for i in 0..j {
            let cand = row[i] + w(from + i, from + j);
            if cand > best {
                best = cand;
            }
        }
        row[j] = best;
    }
    row
}

fn dp_sup_sum(from: usize, to: usize, w: impl FnMut(usize, usize) -> f64) -> f64 {
    if from == to {
        return 0.0;
    }
    *dp_row(from, to, w).last().unwrap()
}

/// Brute force over all `2^(to-from-1)` partitions; independent of the
/// dynamic program. Limited to 22 grid points.
fn exhaustive_sup_sum(from: usize, to: usize, mut w: impl FnMut(usize, usize) -> f64) -> Result<f64> {
    let interior = to - from;
    if interior > 21 {
        return Err(Error::Mismatch(
            "exhaustive p-variation is limited to 22 grid points".into(),
        ));
    }
    if interior == 0 {
        return Ok(0.0);
    }
    let interior = interior - 1;
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1u32 << interior) {
        let mut sum = 0.0;
        let mut prev = from;
        for b in 0..interior {
            if mask & (1 << b) != 0 {
                let here = from + 1 + b as usize;
                sum += w(prev, here);
                prev = here;
            }
        }
        sum += w(prev, to);
        if sum > best {
            best = sum;
        }
    }
    Ok(best)
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::ParamRange {
            name: "p",
            expected: ">= 1",
            got: format!("{p}"),
        });
    }
    Ok(())
}

fn path_range(x: &SampledPath, s: f64, t: f64) -> Result<(usize, usize)> {
    let i = x.index_of(s)?;
    let j = x.index_of(t)?;
    if i > j {
        return Err(Error::BadInterval { s, t });
    }
    Ok((i, j))
}

fn path_weight<'a>(x: &'a SampledPath, p: f64) -> impl FnMut(usize, usize) -> f64 + 'a {
    let d = x.dim();
    move |i, j| {
        let (a, b) = (x.value(i), x.value(j));
        let mut s = 0.0;
        for c in 0..d {
            let e = b[c] - a[c];
            s += e * e;
        }
        pow_p(s.sqrt(), p)
    }
}

/// p-variation of a sampled path over grid times `[s, t]`.
pub fn pvar_path(x: &SampledPath, p: f64, s: f64, t: f64) -> Result<f64> {
    Ok(pvar_path_power(x, p, s, t)?.powf(1.0 / p))
}

/// The powered supremum `sup_P Σ |δx|^p` (no `1/p` root); this is the value
/// of the canonical control of the path.
pub fn pvar_path_power(x: &SampledPath, p: f64, s: f64, t: f64) -> Result<f64> {
    check_p(p)?;
    let (i, j) = path_range(x, s, t)?;
    Ok(dp_sup_sum(i, j, path_weight(x, p)))
}

/// Brute-force p-variation over all partitions (oracle; small grids only).
pub fn pvar_path_exhaustive(x: &SampledPath, p: f64, s: f64, t: f64) -> Result<f64> {
    check_p(p)?;
    let (i, j) = path_range(x, s, t)?;
    Ok(exhaustive_sup_sum(i, j, path_weight(x, p))?.powf(1.0 / p))
}

fn increment2_weight<'a>(g: &'a Increment2, q: f64) -> impl FnMut(usize, usize) -> f64 + 'a {
    move |i, j| pow_p(norm2(g.get_idx(i, j)), q)
}

fn increment2_range(g: &Increment2, s: f64, t: f64) -> Result<(usize, usize)> {
    let i = crate::num::grid_index(g.times(), s).ok_or(Error::OffGrid { t: s })?;
    let j = crate::num::grid_index(g.times(), t).ok_or(Error::OffGrid { t })?;
    if i > j {
        return Err(Error::BadInterval { s, t });
    }
    Ok((i, j))
}

/// q-variation of a two-index map over grid times `[s, t]`:
/// `(sup_P Σ |g_{u_k u_{k+1}}|^q)^{1/q}`.
pub fn pvar_2index(g: &Increment2, q: f64, s: f64, t: f64) -> Result<f64> {
    Ok(pvar_2index_power(g, q, s, t)?.powf(1.0 / q))
}

/// The powered supremum for a two-index map (no root).
pub fn pvar_2index_power(g: &Increment2, q: f64, s: f64, t: f64) -> Result<f64> {
    check_p(q)?;
    let (i, j) = increment2_range(g, s, t)?;
    Ok(dp_sup_sum(i, j, increment2_weight(g, q)))
}

/// Brute-force q-variation of a two-index map (oracle; small grids only).
pub fn pvar_2index_exhaustive(g: &Increment2, q: f64, s: f64, t: f64) -> Result<f64> {
    check_p(q)?;
    let (i, j) = increment2_range(g, s, t)?;
    Ok(exhaustive_sup_sum(i, j, increment2_weight(g, q))?.powf(1.0 / q))
}

/// Canonical control of a step-2 rough path over grid indices `[i, j]`:
/// `ω_X(i,j) = sup_P Σ |X¹|^p + sup_P Σ |X²|^{p/2}` with `p = x.p()`.
/// Computed fresh on the index range, O((j-i)²).
pub fn rough_control_value(x: &RoughPath, i: usize, j: usize) -> f64 {
    let d = x.dim();
    let p = x.p();
    let mut b1 = vec![0.0; d];
    let v1 = dp_sup_sum(i, j, |a, b| {
        x.level1_into(a, b, &mut b1);
        pow_p(norm2(&b1), p)
    });
    let mut b2 = vec![0.0; d * d];
    let v2 = dp_sup_sum(i, j, |a, b| {
        x.level2_into(a, b, &mut b2);
        pow_p(norm2(&b2), p / 2.0)
    });
    v1 + v2
}

/// A nonnegative two-index map on a grid, zero on the diagonal, intended to
/// be superadditive. Stored densely over all pairs.
#[derive(Clone, Debug)]
pub struct Control {
    times: Arc<Vec<f64>>,
    vals: Vec<f64>, // upper-triangular by pair index
}

impl Control {
    /// Tabulates `f(i, j)` over all grid pairs. Values must be finite,
    /// nonnegative, and zero on the diagonal; superadditivity is the
    /// caller's claim and can be audited with [`check_superadditive`].
    pub fn from_fn(times: Arc<Vec<f64>>, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let n = times.len();
        if n < 2 {
            return Err(Error::BadGrid);
        }
        let mut vals = vec![0.0; n * (n + 1) / 2];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                if !v.is_finite() || v < 0.0 || (i == j && v != 0.0) {
                    return Err(Error::Mismatch(format!(
                        "control value at ({i}, {j}) is {v}; need finite, >= 0, 0 on the diagonal"
                    )));
                }
                vals[pair_index(i, j, n)] = v;
            }
        }
        Ok(Self { times, vals })
    }

    /// Superadditive envelope of a raw nonnegative two-index map: the sup
    /// over partitions of the partition sum of `raw`. Always `>= raw`, always
    /// superadditive, and equal to `raw` when `raw` already was. O(n³).
    pub fn envelope(times: Arc<Vec<f64>>, mut raw: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let n = times.len();
        if n < 2 {
            return Err(Error::BadGrid);
        }
        let mut vals = vec![0.0; n * (n + 1) / 2];
        for i in 0..n {
            let row = dp_row(i, n - 1, |a, b| {
                let v = raw(a, b);
                debug_assert!(v.is_finite() && v >= 0.0, "raw control value {v} at ({a}, {b})");
                v
            });
            for j in i..n {
                vals[pair_index(i, j, n)] = row[j - i];
            }
        }
        Ok(Self { times, vals })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value_idx(&self, i: usize, j: usize) -> f64 {
        assert!(i <= j && j < self.times.len());
        self.vals[pair_index(i, j, self.times.len())]
    }

    pub fn value(&self, s: f64, t: f64) -> Result<f64> {
        let i = crate::num::grid_index(&self.times, s).ok_or(Error::OffGrid { t: s })?;
        let j = crate::num::grid_index(&self.times, t).ok_or(Error::OffGrid { t })?;
        if i > j {
            return Err(Error::BadInterval { s, t });
        }
        Ok(self.value_idx(i, j))
    }

    /// Value over the whole grid span.
    pub fn total(&self) -> f64 {
        self.value_idx(0, self.times.len() - 1)
    }
}

#[inline]
fn pair_index(i: usize, j: usize, n: usize) -> usize {
    i * (2 * n - i + 1) / 2 + (j - i)
}

/// Canonical control of a sampled path: `ω(s,t) = sup_P Σ |δx|^p`.
pub fn control_from_pvar(x: &SampledPath, p: f64) -> Result<Control> {
    check_p(p)?;
    let times = x.times_arc();
    let n = times.len();
    let mut w = path_weight(x, p);
    let mut vals = vec![0.0; n * (n + 1) / 2];
    for i in 0..n {
        let row = dp_row(i, n - 1, &mut w);
        for j in i..n {
            vals[pair_index(i, j, n)] = row[j - i];
        }
    }
    Ok(Control { times, vals })
}

/// Canonical control of a two-index map: `ω(s,t) = sup_P Σ |g|^q`.
pub fn control_from_pvar_2index(g: &Increment2, q: f64) -> Result<Control> {
    check_p(q)?;
    let times = Arc::new(g.times().to_vec());
    let n = times.len();
    let mut w = increment2_weight(g, q);
    let mut vals = vec![0.0; n * (n + 1) / 2];
    for i in 0..n {
        let row = dp_row(i, n - 1, &mut w);
        for j in i..n {
            vals[pair_index(i, j, n)] = row[j - i];
        }
    }
    Ok(Control { times, vals })
}

/// Canonical control of a rough path over its full grid (dense table; meant
/// for modest grids).
pub fn control_from_rough(x: &RoughPath) -> Result<Control> {
    let times = x.times_arc();
    let n = times.len();
    let d = x.dim();
    let p = x.p();
    let mut b1 = vec![0.0; d];
    let mut b2 = vec![0.0; d * d];
    let mut vals = vec![0.0; n * (n + 1) / 2];
    for i in 0..n {
        let row1 = dp_row(i, n - 1, |a, b| {
            x.level1_into(a, b, &mut b1);
            pow_p(norm2(&b1), p)
        });
        let row2 = dp_row(i, n - 1, |a, b| {
            x.level2_into(a, b, &mut b2);
            pow_p(norm2(&b2), p / 2.0)
        });
        for j in i..n {
            vals[pair_index(i, j, n)] = row1[j - i] + row2[j - i];
        }
    }
    Ok(Control { times, vals })
}

/// Largest relative superadditivity violation
/// `(ω(s,u) + ω(u,t) - ω(s,t)) / (1 + ω(s,t))` over all grid triples;
/// nonpositive values are clamped to zero.
pub fn check_superadditive(c: &Control) -> f64 {
    let n = c.len();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for k in (i + 1)..n {
            let left = c.value_idx(i, k);
            for j in (k + 1)..n {
                let v = (left + c.value_idx(k, j) - c.value_idx(i, j)) / (1.0 + c.value_idx(i, j));
                if v > worst {
                    worst = v;
                }
            }
        }
    }
    worst
}

/// One interval of a greedy partition.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyInterval {
    pub from: usize,
    pub to: usize,
    pub omega: f64,
    /// A single grid step already exceeding the level; such an interval is
    /// taken anyway so the partition always terminates.
    pub degenerate: bool,
}

/// Partitions the grid span greedily: each interval is extended right as
/// long as `ω(from, to) <= level`. Single steps above the level are flagged
/// degenerate rather than looping forever.
pub fn greedy_partition(c: &Control, level: f64) -> Result<Vec<GreedyInterval>> {
    if !(level.is_finite() && level > 0.0) {
        return Err(Error::ParamRange {
            name: "level",
            expected: "> 0",
            got: format!("{level}"),
        });
    }
    let n = c.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n - 1 {
        if c.value_idx(i, i + 1) > level {
            out.push(GreedyInterval {
                from: i,
                to: i + 1,
                omega: c.value_idx(i, i + 1),
                degenerate: true,
            });
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j + 1 < n && c.value_idx(i, j + 1) <= level {
            j += 1;
        }
        out.push(GreedyInterval {
            from: i,
            to: j,
            omega: c.value_idx(i, j),
            degenerate: false,
        });
        i = j;
    }
    Ok(out)
}
