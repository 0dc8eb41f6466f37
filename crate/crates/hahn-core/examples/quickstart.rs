//! Minimal tour: build parameters, differentiate, integrate, check a
//! trajectory, and solve the quadratic model problem.

use hahn_core::{
    default_h0, el_residual, hahn_derivative, hahn_integral, leitmann_affine_solve, parse,
    BoundaryConditions, HahnParams, Lagrangian, RealFn, VarSet,
};

fn main() -> hahn_core::Result<()> {
    let params = HahnParams::new(0.5, 1.0)?;
    println!("fixed point w0 = {}", params.omega0());

    // The symmetric difference quotient of t^2 at t = 4 evaluates f at the
    // shifted points 3 and 6: (9 - 36) / (3 - 6) = 9.
    let square = RealFn::from_fn(|t| t * t);
    let d = hahn_derivative(&params, &square, 4.0, default_h0(&params))?;
    println!("D[t^2](4) = {d}");

    // The integral of 1 over [2, 6] telescopes to (b - w0) - (a - w0) = 4.
    let one = RealFn::from_expr(parse("1", VarSet::only_t())?)?;
    let s = hahn_integral(&params, &one, 2.0, 6.0, 1e-10, 10_000)?;
    println!(
        "integral = {} after {} terms (converged: {})",
        s.value, s.terms_used, s.converged
    );

    // The straight line is stationary for the arclength functional.
    let arclength = Lagrangian::from_expr(parse("sqrt(1+v^2)", VarSet::tuv())?);
    let line = RealFn::from_fn(|t| t);
    let bc_line = BoundaryConditions::new(2.0, 6.0, 2.0, 6.0)?;
    let report = el_residual(&params, &arclength, &line, &bc_line, 8, 1e-6)?;
    println!("arclength EL residual = {:e}", report.max_abs_residual);

    // Direct method for L = v^2 + q u + t v with y(2) = 0, y(6) = 4.
    let bc = BoundaryConditions::new(2.0, 6.0, 0.0, 4.0)?;
    let sol = leitmann_affine_solve(&params, &bc, 12)?;
    println!("minimizer y(t) = {}*t + {}", sol.c, sol.d);
    Ok(())
}
