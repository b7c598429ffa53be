//! Small numeric helpers shared across modules.

use rand_core::RngCore;

/// Uniform draw in `[0, 1)` using the top 53 bits of the stream, so results
/// depend only on the raw generator output.
pub(crate) fn u01<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Kahan compensated accumulator. Long lifts (up to ~1e6 steps) sum many
/// near-cancelling terms; plain summation loses the Chen identity at the
/// 1e-10 scale the checks demand.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub(crate) fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}

/// x^p for x >= 0 with exact fast paths for the exponents the experiments
/// use in inner loops (`powf` dominates the O(n^2) variation sweeps).
#[inline]
pub(crate) fn pow_p(x: f64, p: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x * x
    } else if p == 1.5 {
        x * x.sqrt()
    } else if p == 2.5 {
        x * x * x.sqrt()
    } else if p == 1.25 {
        x * x.sqrt().sqrt()
    } else {
        x.powf(p)
    }
}

/// Euclidean norm of a slice.
#[inline]
pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Exact lookup of `t` in a strictly increasing grid. Returns `None` when
/// `t` is not a grid point; callers turn that into a domain error.
pub(crate) fn grid_index(times: &[f64], t: f64) -> Option<usize> {
    times
        .binary_search_by(|probe| probe.partial_cmp(&t).expect("finite grid times"))
        .ok()
}

/// Least-squares slope of log2(err) against log2(h): the empirical
/// convergence order of an error table. Errors at rounding level are floored
/// so a vanishing entry reports a large (not undefined) order.
pub fn empirical_order(hs: &[f64], errs: &[f64]) -> f64 {
    assert_eq!(hs.len(), errs.len());
    assert!(hs.len() >= 2, "order fit needs at least two levels");
    let floor = 1e-300;
    let xs: Vec<f64> = hs.iter().map(|h| h.log2()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.max(floor).log2()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_beats_plain_sum() {
        let mut k = Kahan::default();
        let mut plain = 0.0_f64;
        // 1 + many tiny terms that plain summation drops entirely.
        k.add(1.0);
        plain += 1.0;
        for _ in 0..1_000_000 {
            k.add(1e-17);
            plain += 1e-17;
        }
        let exact = 1.0 + 1e-11;
        assert!((k.value() - exact).abs() < 1e-15);
        assert!((plain - exact).abs() > 1e-12);
    }

    #[test]
    fn pow_p_fast_paths_match_powf() {
        for &p in &[1.0, 1.25, 1.5, 2.0, 2.5] {
            for &x in &[0.0, 1e-8, 0.3, 1.0, 7.5] {
                let got = pow_p(x, p);
                let want = f64::powf(x, p);
                assert!((got - want).abs() <= 1e-13 * (1.0 + want.abs()));
            }
        }
    }

    #[test]
    fn order_fit_recovers_exact_slope() {
        let hs = [0.1, 0.05, 0.025, 0.0125];
        let errs: Vec<f64> = hs.iter().map(|h| 3.0 * h * h).collect();
        assert!((empirical_order(&hs, &errs) - 2.0).abs() < 1e-12);
    }
}
