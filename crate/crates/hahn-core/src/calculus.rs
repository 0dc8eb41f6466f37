//! The symmetric difference operator, its series-defined antiderivative,
//! and the checks built on them (fundamental theorem, integration by
//! parts, lattice norms).
//!
//! For parameters (q, omega) with shift s(t) = q*t + omega and fixed point
//! w0, the operator is
//!
//! ```text
//! Df(t) = (f(s(t)) - f(s^-1(t))) / (s(t) - s^-1(t)),    t != w0,
//! ```
//!
//! extended at w0 by a Richardson-extrapolated central difference, which
//! matches f'(w0) for differentiable f. The integral from the fixed point
//! is the series
//!
//! ```text
//! I(x) = (s^-1(x) - s(x)) * sum_{n>=0} q^(2n+1) f(s^(2n+1)(x)),
//! ```
//!
//! whose samples walk the odd orbit of x down toward w0, and
//! integrals over [a, b] difference two such series.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use crate::error::{HahnError, Result};
use crate::function::RealFn;
use crate::lattice::{build_interval, HahnParams};

/// Default truncation tolerance for integral series.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default cap on series terms before giving up.
pub const DEFAULT_MAX_TERMS: u32 = 10_000;

/// Default base step for the classical-derivative fallback at the fixed
/// point: 1e-4 scaled by the magnitude of the fixed point.
pub fn default_h0(params: &HahnParams) -> f64 {
    1e-4 * params.omega0().abs().max(1.0)
}

/// Outcome of a truncated series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: u32,
    pub last_term_magnitude: f64,
    /// Geometric bound on the dropped tail; zero when the series
    /// terminated exactly (finitely supported integrand).
    pub tail_bound: f64,
    pub converged: bool,
}

impl SeriesResult {
    fn exact_zero() -> SeriesResult {
        SeriesResult {
            value: 0.0,
            terms_used: 0,
            last_term_magnitude: 0.0,
            tail_bound: 0.0,
            converged: true,
        }
    }
}

fn check_h0(h0: f64) -> Result<()> {
    if !(h0 > 0.0) || !h0.is_finite() {
        return Err(HahnError::InvalidParams(format!(
            "derivative fallback step must be positive and finite, got {h0}"
        )));
    }
    Ok(())
}

/// Difference quotient over fallible point evaluations. Shared by the
/// public operator and by internal code that differentiates composite
/// quantities (antiderivatives, momenta) directly.
pub(crate) fn hahn_derivative_impl(
    params: &HahnParams,
    f: &dyn Fn(f64) -> Result<f64>,
    t: f64,
    h0: f64,
) -> Result<f64> {
    if !t.is_finite() {
        return Err(HahnError::InvalidParams(format!(
            "derivative abscissa must be finite, got {t}"
        )));
    }
    check_h0(h0)?;
    let value = if params.is_fixed_point(t) {
        // Central difference with one Richardson step: error O(h0^4).
        let w0 = params.omega0();
        let quot = |h: f64| -> Result<f64> { Ok((f(w0 + h)? - f(w0 - h)?) / (2.0 * h)) };
        let coarse = quot(h0)?;
        let fine = quot(h0 / 2.0)?;
        (4.0 * fine - coarse) / 3.0
    } else {
        let num = f(params.sigma(t))? - f(params.sigma_inv(t))?;
        num / params.sigma_gap(t)
    };
    if !value.is_finite() {
        return Err(HahnError::NonFinite(format!(
            "derivative is non-finite at t = {t}"
        )));
    }
    Ok(value)
}

/// The symmetric difference operator Df at t, with classical fallback
/// step h0 used only when t is the fixed point.
pub fn hahn_derivative(params: &HahnParams, f: &RealFn, t: f64, h0: f64) -> Result<f64> {
    hahn_derivative_impl(params, &|z| f.eval(z, params), t, h0)
}

/// Df as a function, for feeding derivatives back into integrals.
/// Pointwise failures surface as non-finite evaluation errors.
pub fn derivative_fn(params: &HahnParams, f: &RealFn, h0: f64) -> RealFn {
    let params = *params;
    let f = f.clone();
    RealFn::from_fn(move |t| {
        hahn_derivative_impl(&params, &|z| f.eval(z, &params), t, h0).unwrap_or(f64::NAN)
    })
}

/// Series integral from the fixed point to x.
///
/// Truncation stops once three consecutive terms (prefactor included) fall
/// below `tol` in magnitude, or exactly when the integrand is a table whose
/// support the remaining orbit can no longer meet; in the latter case any
/// nonzero default contributes its closed-form geometric tail and the
/// result is exact, reported with zero `tail_bound`.
pub fn hahn_integral_from_fixed_point(
    params: &HahnParams,
    f: &RealFn,
    x: f64,
    tol: f64,
    max_terms: u32,
) -> Result<SeriesResult> {
    if !x.is_finite() {
        return Err(HahnError::InvalidParams(format!(
            "integral endpoint must be finite, got {x}"
        )));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(HahnError::InvalidParams(format!(
            "series tolerance must be positive and finite, got {tol}"
        )));
    }
    if max_terms == 0 {
        return Err(HahnError::InvalidParams(
            "max_terms must be at least 1".into(),
        ));
    }
    if params.is_fixed_point(x) {
        return Ok(SeriesResult::exact_zero());
    }

    let q = params.q();
    let prefactor = params.sigma_inv(x) - params.sigma(x);
    let table = match f {
        RealFn::Table(t) => Some(t),
        _ => None,
    };

    let mut sum = 0.0;
    let mut small_run = 0u32;
    let mut last_mag = f64::INFINITY;
    let mut n = 0u32;
    while n < max_terms {
        let point = params.sigma_pow(2 * n as i32 + 1, x);
        let weight = prefactor * q.powi(2 * n as i32 + 1);
        let term = weight * f.eval(point, params)?;
        if !term.is_finite() {
            return Err(HahnError::NonFinite(format!(
                "series term is non-finite at orbit point {point}"
            )));
        }
        sum += term;
        last_mag = term.abs();
        n += 1;

        if let Some(table) = table {
            if !table.support_strictly_inside(params.omega0(), point) {
                // Every remaining sample reads the table default, so the
                // rest of the series is an exact geometric tail.
                let d = table.default_value();
                if d != 0.0 {
                    let tail_start = q.powi(2 * n as i32 + 1);
                    sum += prefactor * d * tail_start / (1.0 - q * q);
                }
                return Ok(SeriesResult {
                    value: sum,
                    terms_used: n,
                    last_term_magnitude: 0.0,
                    tail_bound: 0.0,
                    converged: true,
                });
            }
        }

        if last_mag < tol {
            small_run += 1;
            if small_run >= 3 {
                break;
            }
        } else {
            small_run = 0;
        }
    }

    let converged = small_run >= 3;
    if !sum.is_finite() {
        return Err(HahnError::NonFinite(format!(
            "series value is non-finite integrating to x = {x}"
        )));
    }
    Ok(SeriesResult {
        value: sum,
        terms_used: n,
        last_term_magnitude: last_mag,
        tail_bound: last_mag * q * q / (1.0 - q * q),
        converged,
    })
}

/// Integral over [a, b] as the difference of two fixed-point series.
pub fn hahn_integral(
    params: &HahnParams,
    f: &RealFn,
    a: f64,
    b: f64,
    tol: f64,
    max_terms: u32,
) -> Result<SeriesResult> {
    if !a.is_finite() || !b.is_finite() {
        return Err(HahnError::InvalidParams(format!(
            "integral endpoints must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(SeriesResult::exact_zero());
    }
    let fa = hahn_integral_from_fixed_point(params, f, a, tol, max_terms)?;
    let fb = hahn_integral_from_fixed_point(params, f, b, tol, max_terms)?;
    Ok(SeriesResult {
        value: fb.value - fa.value,
        terms_used: fa.terms_used + fb.terms_used,
        last_term_magnitude: fa.last_term_magnitude.max(fb.last_term_magnitude),
        tail_bound: fa.tail_bound + fb.tail_bound,
        converged: fa.converged && fb.converged,
    })
}

/// Outcome of a fundamental-theorem verification over a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct FtcReport {
    /// max over lattice points of |D[I(f)](x) - f(x)|.
    pub max_derivative_residual: f64,
    /// Lattice point realizing the max, when any point succeeded.
    pub worst_point: Option<f64>,
    /// |integral of Df over [a, b] - (f(b) - f(a))|.
    pub antiderivative_residual: f64,
    /// Lattice points where a sub-series failed to converge or an
    /// evaluation failed; excluded from the residual maximum.
    pub non_converged_points: Vec<f64>,
    pub tol: f64,
    pub passed: bool,
}

/// Verify both directions of the fundamental theorem on the lattice of
/// [a, b] at the given depth.
///
/// Differentiating the antiderivative divides out the shift gap at each
/// lattice point, so the inner series runs at a tolerance shrunk by that
/// gap (factor 100 spare) to keep truncation error below `tol` after the
/// division.
pub fn ftc_check(
    params: &HahnParams,
    f: &RealFn,
    a: f64,
    b: f64,
    depth: u32,
    tol: f64,
) -> Result<FtcReport> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(HahnError::InvalidParams(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    let interval = build_interval(params, a, b, depth)?;
    let h0 = default_h0(params);

    let mut max_res = 0.0f64;
    let mut worst_point = None;
    let mut non_converged = Vec::new();
    for &x in interval.points() {
        let scale = if params.is_fixed_point(x) {
            h0
        } else {
            params.sigma_gap(x).abs()
        };
        let inner_tol = (tol * scale * 1e-2).max(1e-300);
        let flag = Arc::new(AtomicBool::new(false));
        let antiderivative = {
            let params = *params;
            let f = f.clone();
            let flag = Arc::clone(&flag);
            RealFn::from_fn(move |z| {
                match hahn_integral_from_fixed_point(&params, &f, z, inner_tol, DEFAULT_MAX_TERMS) {
                    Ok(r) => {
                        if !r.converged {
                            flag.store(true, Ordering::Relaxed);
                        }
                        r.value
                    }
                    Err(_) => f64::NAN,
                }
            })
        };
        let derivative = hahn_derivative(params, &antiderivative, x, h0);
        let sample = f.eval(x, params);
        match (derivative, sample) {
            (Ok(d), Ok(fx)) if !flag.load(Ordering::Relaxed) => {
                let res = (d - fx).abs();
                if res > max_res || worst_point.is_none() {
                    max_res = res;
                    worst_point = Some(x);
                }
            }
            _ => non_converged.push(x),
        }
    }

    let df = derivative_fn(params, f, h0);
    let integral = hahn_integral(
        params,
        &df,
        a,
        b,
        (tol * 1e-2).max(1e-300),
        DEFAULT_MAX_TERMS,
    )?;
    if !integral.converged {
        return Err(HahnError::Domain(format!(
            "integral of the derivative did not converge within {DEFAULT_MAX_TERMS} terms"
        )));
    }
    let anti_res = (integral.value - (f.eval(b, params)? - f.eval(a, params)?)).abs();

    let passed = non_converged.is_empty() && max_res <= tol && anti_res <= tol;
    Ok(FtcReport {
        max_derivative_residual: max_res,
        worst_point,
        antiderivative_residual: anti_res,
        non_converged_points: non_converged,
        tol,
        passed,
    })
}

/// Which integration-by-parts identity to verify.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IbpVariant {
    /// int f(s^-1 t) Dg = [fg] - int Df * g(s t)
    SigmaInv,
    /// int f Dg = [f(s t) g(t)] - q * int Df(s t) * g(s t)
    Shifted,
}

/// Absolute residual of the chosen integration-by-parts identity for the
/// pair (f, g) on [a, b]. Sub-integrals that fail to converge are reported
/// as errors rather than silently folded into the residual.
pub fn ibp_residual(
    params: &HahnParams,
    f: &RealFn,
    g: &RealFn,
    a: f64,
    b: f64,
    variant: IbpVariant,
    tol: f64,
) -> Result<f64> {
    let h0 = default_h0(params);
    let p = *params;
    let df = derivative_fn(params, f, h0);
    let dg = derivative_fn(params, g, h0);

    let (lhs_fn, boundary, rhs_fn, rhs_scale) = match variant {
        IbpVariant::SigmaInv => {
            let lhs = {
                let (f, dg) = (f.clone(), dg.clone());
                RealFn::from_fn(move |t| {
                    let fv = f.eval(p.sigma_inv(t), &p).unwrap_or(f64::NAN);
                    let dgv = dg.eval(t, &p).unwrap_or(f64::NAN);
                    fv * dgv
                })
            };
            let boundary =
                f.eval(b, params)? * g.eval(b, params)? - f.eval(a, params)? * g.eval(a, params)?;
            let rhs = {
                let (df, g) = (df.clone(), g.clone());
                RealFn::from_fn(move |t| {
                    let dfv = df.eval(t, &p).unwrap_or(f64::NAN);
                    let gv = g.eval(p.sigma(t), &p).unwrap_or(f64::NAN);
                    dfv * gv
                })
            };
            (lhs, boundary, rhs, 1.0)
        }
        IbpVariant::Shifted => {
            let lhs = {
                let (f, dg) = (f.clone(), dg.clone());
                RealFn::from_fn(move |t| {
                    let fv = f.eval(t, &p).unwrap_or(f64::NAN);
                    let dgv = dg.eval(t, &p).unwrap_or(f64::NAN);
                    fv * dgv
                })
            };
            let boundary = f.eval(params.sigma(b), params)? * g.eval(b, params)?
                - f.eval(params.sigma(a), params)? * g.eval(a, params)?;
            let rhs = {
                let (df, g) = (df.clone(), g.clone());
                RealFn::from_fn(move |t| {
                    let st = p.sigma(t);
                    let dfv = df.eval(st, &p).unwrap_or(f64::NAN);
                    let gv = g.eval(st, &p).unwrap_or(f64::NAN);
                    dfv * gv
                })
            };
            (lhs, boundary, rhs, params.q())
        }
    };

    let series_tol = (tol * 1e-2).max(1e-300);
    let lhs = hahn_integral(params, &lhs_fn, a, b, series_tol, DEFAULT_MAX_TERMS)?;
    let rhs = hahn_integral(params, &rhs_fn, a, b, series_tol, DEFAULT_MAX_TERMS)?;
    if !lhs.converged || !rhs.converged {
        return Err(HahnError::Domain(
            "integration-by-parts sub-integral did not converge".into(),
        ));
    }
    Ok((lhs.value - (boundary - rhs_scale * rhs.value)).abs())
}

/// Lattice norm: sup of |y| over the interval lattice, plus, for r = 1,
/// the sup of |Dy|.
pub fn norm_r(params: &HahnParams, y: &RealFn, a: f64, b: f64, r: u32, depth: u32) -> Result<f64> {
    if r > 1 {
        return Err(HahnError::InvalidParams(format!(
            "norm order must be 0 or 1, got {r}"
        )));
    }
    let interval = build_interval(params, a, b, depth)?;
    let h0 = default_h0(params);
    let mut norm = 0.0f64;
    let mut sup0 = 0.0f64;
    for &x in interval.points() {
        sup0 = sup0.max(y.eval(x, params)?.abs());
    }
    norm += sup0;
    if r == 1 {
        let mut sup1 = 0.0f64;
        for &x in interval.points() {
            sup1 = sup1.max(hahn_derivative(params, y, x, h0)?.abs());
        }
        norm += sup1;
    }
    Ok(norm)
}
