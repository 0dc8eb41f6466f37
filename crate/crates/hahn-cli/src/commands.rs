//! Subcommand implementations. Each one builds a `Report` and picks the
//! process exit code; real errors propagate as `Failure` with the exit
//! code contract: 2 input, 3 evaluation, 4 non-convergence under
//! `--strict`, 5 verification failure.

use hahn_core::{
    action, default_h0, el_residual, first_variation, ftc_check, hahn_derivative, hahn_integral,
    ibp_residual, joint_convexity_check, leitmann_affine_solve, leitmann_lagrangian,
    on_common_orbit, parse, BoundaryConditions, GapSample, HahnError, HahnParams, IbpVariant,
    Lagrangian, LatticeTableFn, RealFn, VarSet,
};

use crate::cli::Command;
use crate::config::RunConfig;
use crate::report::{Cell, Report, Table};

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<HahnError> for Failure {
    fn from(e: HahnError) -> Failure {
        Failure {
            code: if e.is_input_error() { 2 } else { 3 },
            message: e.to_string(),
        }
    }
}

pub fn dispatch(cfg: &RunConfig, command: Command) -> Result<(Report, u8), Failure> {
    let params = HahnParams::new(cfg.q, cfg.omega)?;
    match command {
        Command::Deriv { expr, at } => cmd_deriv(cfg, &params, &expr, at),
        Command::Integrate {
            expr,
            table,
            from,
            to,
        } => cmd_integrate(cfg, &params, expr.as_deref(), table.as_deref(), from, to),
        Command::ElCheck {
            lagrangian,
            trajectory,
            tol_el,
            alpha,
            beta,
        } => cmd_el_check(
            cfg,
            &params,
            &lagrangian,
            &trajectory,
            tol_el.unwrap_or(1e-6),
            alpha,
            beta,
        ),
        Command::FirstVariation {
            lagrangian,
            trajectory,
            eta,
        } => cmd_first_variation(cfg, &params, &lagrangian, &trajectory, &eta),
        Command::Leitmann { alpha, beta } => cmd_leitmann(cfg, &params, alpha, beta),
        Command::Convexity {
            lagrangian,
            u_min,
            u_max,
            v_min,
            v_max,
            grid,
            t_samples,
        } => cmd_convexity(
            cfg,
            &params,
            &lagrangian,
            (u_min, u_max),
            (v_min, v_max),
            grid,
            t_samples,
        ),
        Command::Verify => cmd_verify(cfg, &params),
    }
}

/// Every report opens with the run parameters, so output files are
/// self-describing.
fn echo(cfg: &RunConfig, params: &HahnParams) -> Vec<(&'static str, Cell)> {
    vec![
        ("q", Cell::Float(params.q())),
        ("omega", Cell::Float(params.omega())),
        ("omega0", Cell::Float(params.omega0())),
        ("a", Cell::Float(cfg.a)),
        ("b", Cell::Float(cfg.b)),
        ("depth", Cell::Int(cfg.depth as u64)),
    ]
}

fn parse_fn_of_t(source: &str) -> Result<RealFn, Failure> {
    Ok(RealFn::from_expr(parse(source, VarSet::only_t())?)?)
}

fn parse_lagrangian(source: &str) -> Result<Lagrangian, Failure> {
    Ok(Lagrangian::from_expr(parse(source, VarSet::tuv())?))
}

fn cmd_deriv(
    cfg: &RunConfig,
    params: &HahnParams,
    expr: &str,
    at: f64,
) -> Result<(Report, u8), Failure> {
    let f = parse_fn_of_t(expr)?;
    let value = hahn_derivative(params, &f, at, default_h0(params))?;
    let mut scalars = echo(cfg, params);
    scalars.extend([
        ("at", Cell::Float(at)),
        ("value", Cell::Float(value)),
        ("sigma_at", Cell::Float(params.sigma(at))),
        ("sigma_inv_at", Cell::Float(params.sigma_inv(at))),
        (
            "fixed_point_fallback",
            Cell::Bool(params.is_fixed_point(at)),
        ),
    ]);
    Ok((
        Report {
            command: "deriv",
            scalars,
            table: None,
        },
        0,
    ))
}

fn cmd_integrate(
    cfg: &RunConfig,
    params: &HahnParams,
    expr: Option<&str>,
    table: Option<&str>,
    from: Option<f64>,
    to: Option<f64>,
) -> Result<(Report, u8), Failure> {
    let f = match (expr, table) {
        (Some(e), None) => parse_fn_of_t(e)?,
        (None, Some(spec)) => RealFn::table(LatticeTableFn::parse_spec(spec, 0.0)?),
        _ => {
            return Err(Failure {
                code: 2,
                message: "integrate needs exactly one of --expr or --table".into(),
            });
        }
    };
    let from = from.unwrap_or(cfg.a);
    let to = to.unwrap_or(cfg.b);
    let result = hahn_integral(params, &f, from, to, cfg.tol, cfg.max_terms)?;

    let mut scalars = echo(cfg, params);
    scalars.extend([
        ("from", Cell::Float(from)),
        ("to", Cell::Float(to)),
        ("tol", Cell::Float(cfg.tol)),
        ("max_terms", Cell::Int(cfg.max_terms as u64)),
        ("value", Cell::Float(result.value)),
        ("terms_used", Cell::Int(result.terms_used as u64)),
        (
            "last_term_magnitude",
            Cell::Float(result.last_term_magnitude),
        ),
        ("tail_bound", Cell::Float(result.tail_bound)),
        ("converged", Cell::Bool(result.converged)),
    ]);
    let code = if cfg.strict && !result.converged {
        4
    } else {
        0
    };
    Ok((
        Report {
            command: "integrate",
            scalars,
            table: None,
        },
        code,
    ))
}

fn cmd_el_check(
    cfg: &RunConfig,
    params: &HahnParams,
    lagrangian: &str,
    trajectory: &str,
    tol_el: f64,
    alpha: Option<f64>,
    beta: Option<f64>,
) -> Result<(Report, u8), Failure> {
    let lag = parse_lagrangian(lagrangian)?;
    let y = parse_fn_of_t(trajectory)?;
    let alpha = match alpha {
        Some(x) => x,
        None => y.eval(cfg.a, params)?,
    };
    let beta = match beta {
        Some(x) => x,
        None => y.eval(cfg.b, params)?,
    };
    let bc = BoundaryConditions::new(cfg.a, cfg.b, alpha, beta)?;

    if !on_common_orbit(params, cfg.a, cfg.b, 4 * cfg.depth.max(8)) {
        eprintln!(
            "warning: a = {} and b = {} do not lie on a common sigma orbit; \
             the sufficiency theorem hypothesis does not apply to this interval",
            cfg.a, cfg.b
        );
    }

    let rep = el_residual(params, &lag, &y, &bc, cfg.depth, tol_el)?;

    let rows: Vec<Vec<Cell>> = rep
        .points
        .iter()
        .zip(&rep.residuals)
        .map(|(&point, residual)| {
            vec![
                Cell::Float(point),
                residual.map_or(Cell::Missing, Cell::Float),
                Cell::Bool(residual.is_some()),
            ]
        })
        .collect();

    let mut scalars = echo(cfg, params);
    scalars.extend([
        ("alpha", Cell::Float(alpha)),
        ("beta", Cell::Float(beta)),
        ("tol_el", Cell::Float(tol_el)),
        ("max_abs_residual", Cell::Float(rep.max_abs_residual)),
        ("passed", Cell::Bool(rep.passed)),
    ]);
    let code = if rep.passed { 0 } else { 5 };
    Ok((
        Report {
            command: "el-check",
            scalars,
            table: Some(Table {
                name: "points",
                columns: vec!["point", "residual", "converged"],
                rows,
            }),
        },
        code,
    ))
}

fn cmd_first_variation(
    cfg: &RunConfig,
    params: &HahnParams,
    lagrangian: &str,
    trajectory: &str,
    eta: &str,
) -> Result<(Report, u8), Failure> {
    let lag = parse_lagrangian(lagrangian)?;
    let y = parse_fn_of_t(trajectory)?;
    let eta = parse_fn_of_t(eta)?;
    let bc = BoundaryConditions::new(cfg.a, cfg.b, y.eval(cfg.a, params)?, y.eval(cfg.b, params)?)?;
    let value = first_variation(params, &lag, &y, &eta, &bc, cfg.tol)?;

    let mut scalars = echo(cfg, params);
    scalars.extend([("tol", Cell::Float(cfg.tol)), ("value", Cell::Float(value))]);
    Ok((
        Report {
            command: "first-variation",
            scalars,
            table: None,
        },
        0,
    ))
}

fn cmd_leitmann(
    cfg: &RunConfig,
    params: &HahnParams,
    alpha: f64,
    beta: f64,
) -> Result<(Report, u8), Failure> {
    let bc = BoundaryConditions::new(cfg.a, cfg.b, alpha, beta)?;
    let lag = leitmann_lagrangian(params);
    let sol = leitmann_affine_solve(params, &bc, cfg.depth)?;
    let act = action(params, &lag, &sol.minimizer, &bc, cfg.tol)?;
    let cross = el_residual(params, &lag, &sol.minimizer, &bc, cfg.depth, 1e-8)?;

    let mut scalars = echo(cfg, params);
    scalars.extend([
        ("alpha", Cell::Float(alpha)),
        ("beta", Cell::Float(beta)),
        ("c", Cell::Float(sol.c)),
        ("d", Cell::Float(sol.d)),
        (
            "minimizer",
            Cell::Text(format!("y(t) = {}*t + {}", sol.c, sol.d)),
        ),
        ("action", Cell::Float(act.value)),
        ("action_converged", Cell::Bool(act.converged)),
        ("gauge_residual", Cell::Float(sol.gauge_residual)),
        ("el_max_abs_residual", Cell::Float(cross.max_abs_residual)),
        ("el_passed", Cell::Bool(cross.passed)),
    ]);
    Ok((
        Report {
            command: "leitmann",
            scalars,
            table: None,
        },
        0,
    ))
}

fn cmd_convexity(
    cfg: &RunConfig,
    params: &HahnParams,
    lagrangian: &str,
    u_range: (f64, f64),
    v_range: (f64, f64),
    grid: u32,
    t_samples: u32,
) -> Result<(Report, u8), Failure> {
    let lag = parse_lagrangian(lagrangian)?;
    let ts: Vec<f64> = if t_samples <= 1 {
        vec![cfg.a]
    } else {
        (0..t_samples)
            .map(|i| cfg.a + (cfg.b - cfg.a) * (i as f64) / ((t_samples - 1) as f64))
            .collect()
    };
    let rep = joint_convexity_check(params, &lag, &ts, u_range, v_range, grid)?;

    let witness_row = |kind: &str, sample: &GapSample| {
        vec![
            Cell::Text(kind.into()),
            Cell::Float(sample.t),
            Cell::Float(sample.u),
            Cell::Float(sample.v),
            Cell::Float(sample.du),
            Cell::Float(sample.dv),
            Cell::Float(sample.gap),
        ]
    };
    let mut rows = Vec::new();
    if let Some(s) = &rep.worst_convex_violation {
        rows.push(witness_row("against-convexity", s));
    }
    if let Some(s) = &rep.worst_concave_violation {
        rows.push(witness_row("against-concavity", s));
    }

    let mut scalars = echo(cfg, params);
    scalars.extend([
        ("u_min", Cell::Float(u_range.0)),
        ("u_max", Cell::Float(u_range.1)),
        ("v_min", Cell::Float(v_range.0)),
        ("v_max", Cell::Float(v_range.1)),
        ("grid", Cell::Int(grid as u64)),
        ("verdict", Cell::Text(rep.verdict.label().into())),
        ("samples_tested", Cell::Int(rep.samples_tested)),
        ("samples_failed", Cell::Int(rep.samples_failed)),
    ]);
    Ok((
        Report {
            command: "convexity",
            scalars,
            table: Some(Table {
                name: "witnesses",
                columns: vec!["kind", "t", "u", "v", "du", "dv", "gap"],
                rows,
            }),
        },
        0,
    ))
}

struct Suite {
    name: &'static str,
    worst: f64,
    threshold: f64,
}

impl Suite {
    fn passed(&self) -> bool {
        self.worst.is_finite() && self.worst < self.threshold
    }
}

fn centered_poly(w0: f64, span: f64, c: [f64; 6]) -> RealFn {
    RealFn::from_fn(move |t| {
        let x = (t - w0) / span;
        c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
    })
}

/// Identity suites over built-in polynomial test functions at the
/// configured parameters. Thresholds are frozen: series-backed identities
/// at 1e-8 absolute, pointwise operator identities at 1e-10 relative.
fn cmd_verify(cfg: &RunConfig, params: &HahnParams) -> Result<(Report, u8), Failure> {
    let w0 = params.omega0();
    let q = params.q();
    let m = w0.abs().max(1.0);
    let h0 = default_h0(params);

    let interval_span = (cfg.a - w0).abs().max((cfg.b - w0).abs()).max(1.0);
    let f_interval = centered_poly(w0, interval_span, [0.9, 0.6, 0.45, 0.3, 0.2, 0.12]);
    let f_cubic = centered_poly(w0, interval_span, [0.8, 0.5, 0.3, 0.2, 0.0, 0.0]);
    let g_cubic = centered_poly(w0, interval_span, [1.5, 0.45, 0.35, 0.15, 0.0, 0.0]);

    let mut suites = Vec::new();

    let ftc = ftc_check(params, &f_interval, cfg.a, cfg.b, cfg.depth, 1e-8)?;
    suites.push(Suite {
        name: "ftc",
        worst: ftc.max_derivative_residual.max(ftc.antiderivative_residual),
        threshold: 1e-8,
    });

    for (name, variant) in [
        ("ibp-sigma-inv", IbpVariant::SigmaInv),
        ("ibp-shifted", IbpVariant::Shifted),
    ] {
        let residual = ibp_residual(params, &f_cubic, &g_cubic, cfg.a, cfg.b, variant, cfg.tol)?;
        suites.push(Suite {
            name,
            worst: residual,
            threshold: 1e-8,
        });
    }

    // Pointwise identities, sampled above the fixed point where positive
    // coefficients keep every quantity bounded away from zero.
    let span = 2.0 * m;
    let f = centered_poly(w0, span, [0.9, 0.75, 0.6, 0.55, 0.7, 0.65]);
    let g = centered_poly(w0, span, [1.7, 0.55, 0.8, 0.45, 0.6, 0.5]);
    let points: Vec<f64> = [0.3, 0.65, 1.0, 1.4, 1.9]
        .iter()
        .map(|r| w0 + r * m)
        .collect();

    let (mut product, mut quotient, mut composition, mut gap_lemma) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &t in &points {
        let df = hahn_derivative(params, &f, t, h0)?;
        let dg = hahn_derivative(params, &g, t, h0)?;
        let (st, sit) = (params.sigma(t), params.sigma_inv(t));
        let (fs, fsi) = (f.eval(st, params)?, f.eval(sit, params)?);
        let (gs, gsi) = (g.eval(st, params)?, g.eval(sit, params)?);

        let prod = {
            let (f, g, p) = (f.clone(), g.clone(), *params);
            RealFn::from_fn(move |x| {
                f.eval(x, &p).unwrap_or(f64::NAN) * g.eval(x, &p).unwrap_or(f64::NAN)
            })
        };
        let lhs = hahn_derivative(params, &prod, t, h0)?;
        let rhs = df * gs + fsi * dg;
        product = product.max((lhs - rhs).abs() / ((df * gs).abs() + (fsi * dg).abs()));

        let quot = {
            let (f, g, p) = (f.clone(), g.clone(), *params);
            RealFn::from_fn(move |x| {
                f.eval(x, &p).unwrap_or(f64::NAN) / g.eval(x, &p).unwrap_or(f64::NAN)
            })
        };
        let dq = hahn_derivative(params, &quot, t, h0)?;
        let lhs_q = dq * gs * gsi;
        let back = (lhs_q - (gsi * df - fsi * dg)).abs() / ((gsi * df).abs() + (fsi * dg).abs());
        let fwd = (lhs_q - (gs * df - fs * dg)).abs() / ((gs * df).abs() + (fs * dg).abs());
        quotient = quotient.max(back.max(fwd));

        let shifted = {
            let (f, p) = (f.clone(), *params);
            RealFn::from_fn(move |x| f.eval(p.sigma(x), &p).unwrap_or(f64::NAN))
        };
        let lhs_c = hahn_derivative(params, &shifted, t, h0)?;
        let rhs_c = q * hahn_derivative(params, &f, st, h0)?;
        composition = composition.max((lhs_c - rhs_c).abs() / lhs_c.abs().max(rhs_c.abs()));

        // sigma^{n+1} - sigma^{n-1} = q^n (sigma - sigma^{-1}); n capped so
        // the left side keeps f64 significance.
        let d = (t - w0).abs();
        let mut n = 1;
        while n <= 12 && q.powi(n - 1) * d >= 1e-4 * m {
            let lhs_g = params.sigma_pow(n + 1, t) - params.sigma_pow(n - 1, t);
            let rhs_g = q.powi(n) * (st - sit);
            gap_lemma = gap_lemma.max((lhs_g - rhs_g).abs() / rhs_g.abs());
            n += 1;
        }
    }
    for (name, worst) in [
        ("product-rule", product),
        ("quotient-rule", quotient),
        ("composition", composition),
        ("gap-lemma", gap_lemma),
    ] {
        suites.push(Suite {
            name,
            worst,
            threshold: 1e-10,
        });
    }

    let all_passed = suites.iter().all(Suite::passed);
    let rows: Vec<Vec<Cell>> = suites
        .iter()
        .map(|s| {
            vec![
                Cell::Text(s.name.into()),
                Cell::Float(s.worst),
                Cell::Float(s.threshold),
                Cell::Bool(s.passed()),
            ]
        })
        .collect();

    let mut scalars = echo(cfg, params);
    scalars.push(("passed", Cell::Bool(all_passed)));
    Ok((
        Report {
            command: "verify",
            scalars,
            table: Some(Table {
                name: "suites",
                columns: vec!["suite", "worst_residual", "threshold", "passed"],
                rows,
            }),
        },
        if all_passed { 0 } else { 5 },
    ))
}
