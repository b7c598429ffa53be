//! Convergence study for the two-term one-step scheme: against a closed
//! form for the exponential equation, and against a high-resolution
//! Runge-Kutta oracle for a nonlinear field, the error on dyadic meshes
//! shrinks at second order.

use roughpaths::rde::{ode_oracle, solve_step2, VectorField};
use roughpaths::rough::{lift_piecewise_linear, uniform_grid, SampledPath};
use roughpaths::{empirical_order, Result};

fn run_study(
    name: &str,
    field: &VectorField,
    driver: impl Fn(f64) -> Vec<f64>,
    y0: f64,
    reference: impl Fn(&SampledPath) -> Result<f64>,
) -> Result<()> {
    println!("{name}:");
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    for n in [4usize, 8, 16, 32, 64, 128] {
        let path = SampledPath::from_fn(uniform_grid(0.0, 1.0, n), 1, &driver)?;
        let x = lift_piecewise_linear(&path, 2.5)?;
        let y = solve_step2(field, &x, &[y0])?;
        let err = (y.component(n, 0) - reference(&path)?).abs();
        println!("  n = {n:<4} h = {:<10.3e} endpoint error = {err:.6e}", 1.0 / n as f64);
        hs.push(1.0 / n as f64);
        errs.push(err);
    }
    println!("  empirical order: {:.3}\n", empirical_order(&hs, &errs));
    Ok(())
}

fn main() -> Result<()> {
    // dy = y dx along x_t = t has the exact solution e^t.
    run_study(
        "linear field along the identity driver (exact: e)",
        &VectorField::linear_1d(),
        |t| vec![t],
        1.0,
        |_| Ok(std::f64::consts::E),
    )?;

    // dy = sin(y) dx along a smooth oscillation, referenced against RK4
    // with 4096 substeps per segment on the same driver.
    let field = VectorField::sin_1d();
    run_study(
        "sine field along sin(3t) (reference: high-resolution RK4)",
        &field,
        |t| vec![(3.0 * t).sin()],
        0.9,
        |path| {
            let z = ode_oracle(&VectorField::sin_1d(), path, &[0.9], 4096)?;
            Ok(z.component(z.len() - 1, 0))
        },
    )?;
    Ok(())
}
