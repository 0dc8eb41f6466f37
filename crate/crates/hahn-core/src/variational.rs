//! Variational toolkit: Lagrangians L(t, u, v), Euler-Lagrange residuals
//! on interval lattices, first variations, joint-convexity sampling as a
//! sufficiency check, a fundamental-lemma oracle, and the direct
//! (gauge-term) method for the quadratic model problem.
//!
//! Throughout, u stands for the shifted trajectory value y(s(t)) and v for
//! the derivative Dy(t). A trajectory y is stationary when the residual
//!
//! ```text
//! R(t) = L_u(t, y(s t), Dy(t)) - D[ tau -> L_v(s tau, y(s^2 tau), Dy(s tau)) ](t)
//! ```
//!
//! vanishes on the interval lattice.

use std::sync::Arc;

use crate::calculus::{
    default_h0, hahn_derivative, hahn_derivative_impl, hahn_integral, SeriesResult,
    DEFAULT_MAX_TERMS,
};
use crate::error::{HahnError, Result};
use crate::expr::{self, Bindings, Expr};
use crate::function::RealFn;
use crate::lattice::{build_interval, HahnParams};
use crate::util::same_point;

/// Boundary deviation below which a perturbation counts as admissible.
pub const ADMISSIBILITY_TOL: f64 = 1e-9;

/// Convexity gap violations smaller than this are attributed to roundoff.
pub const CONVEXITY_GAP_TOL: f64 = 1e-9;

type TernaryHost = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Ternary {
    Host(TernaryHost),
    Parsed(Arc<Expr>),
}

impl Ternary {
    fn eval(&self, t: f64, u: f64, v: f64, params: &HahnParams) -> Result<f64> {
        match self {
            Ternary::Host(f) => {
                let y = f(t, u, v);
                if !y.is_finite() {
                    return Err(HahnError::NonFinite(format!(
                        "Lagrangian value is non-finite at (t, u, v) = ({t}, {u}, {v})"
                    )));
                }
                Ok(y)
            }
            Ternary::Parsed(e) => expr::eval(e, &Bindings::tuv(t, u, v), params),
        }
    }
}

/// A Lagrangian L(t, u, v) with optional analytic partials in u and v.
/// Missing partials fall back to central differences with step
/// `fd_step * max(1, |x|)` in the differentiated variable.
#[derive(Clone)]
pub struct Lagrangian {
    l: Ternary,
    du: Option<Ternary>,
    dv: Option<Ternary>,
    fd_step: f64,
}

impl std::fmt::Debug for Lagrangian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Lagrangian")
            .field("analytic_du", &self.du.is_some())
            .field("analytic_dv", &self.dv.is_some())
            .field("fd_step", &self.fd_step)
            .finish()
    }
}

impl Lagrangian {
    pub fn from_fn(l: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Lagrangian {
        Lagrangian {
            l: Ternary::Host(Arc::new(l)),
            du: None,
            dv: None,
            fd_step: 1e-6,
        }
    }

    /// Wrap a parsed expression over t, u, v.
    pub fn from_expr(expr: Expr) -> Lagrangian {
        Lagrangian {
            l: Ternary::Parsed(Arc::new(expr)),
            du: None,
            dv: None,
            fd_step: 1e-6,
        }
    }

    pub fn with_partial_u(
        mut self,
        du: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Lagrangian {
        self.du = Some(Ternary::Host(Arc::new(du)));
        self
    }

    pub fn with_partial_v(
        mut self,
        dv: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Lagrangian {
        self.dv = Some(Ternary::Host(Arc::new(dv)));
        self
    }

    pub fn with_fd_step(mut self, fd_step: f64) -> Result<Lagrangian> {
        if !(fd_step > 0.0) || !fd_step.is_finite() {
            return Err(HahnError::InvalidParams(format!(
                "finite-difference step must be positive and finite, got {fd_step}"
            )));
        }
        self.fd_step = fd_step;
        Ok(self)
    }

    pub fn eval(&self, t: f64, u: f64, v: f64, params: &HahnParams) -> Result<f64> {
        self.l.eval(t, u, v, params)
    }

    /// dL/du, analytic when provided.
    pub fn partial_u(&self, t: f64, u: f64, v: f64, params: &HahnParams) -> Result<f64> {
        match &self.du {
            Some(d) => d.eval(t, u, v, params),
            None => {
                let h = self.fd_step * u.abs().max(1.0);
                Ok(
                    (self.l.eval(t, u + h, v, params)? - self.l.eval(t, u - h, v, params)?)
                        / (2.0 * h),
                )
            }
        }
    }

    /// dL/dv, analytic when provided.
    pub fn partial_v(&self, t: f64, u: f64, v: f64, params: &HahnParams) -> Result<f64> {
        match &self.dv {
            Some(d) => d.eval(t, u, v, params),
            None => {
                let h = self.fd_step * v.abs().max(1.0);
                Ok(
                    (self.l.eval(t, u, v + h, params)? - self.l.eval(t, u, v - h, params)?)
                        / (2.0 * h),
                )
            }
        }
    }
}

/// Endpoint constraints y(a) = alpha, y(b) = beta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConditions {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl BoundaryConditions {
    pub fn new(a: f64, b: f64, alpha: f64, beta: f64) -> Result<BoundaryConditions> {
        for (name, x) in [("a", a), ("b", b), ("alpha", alpha), ("beta", beta)] {
            if !x.is_finite() {
                return Err(HahnError::InvalidParams(format!(
                    "boundary value {name} must be finite, got {x}"
                )));
            }
        }
        if !(a < b) {
            return Err(HahnError::InvalidInterval(format!(
                "boundary interval needs a < b, got a = {a}, b = {b}"
            )));
        }
        Ok(BoundaryConditions { a, b, alpha, beta })
    }
}

/// Euler-Lagrange residuals over an interval lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct ElReport {
    /// Lattice points, ascending.
    pub points: Vec<f64>,
    /// Residual per point; `None` where a sub-computation failed.
    pub residuals: Vec<Option<f64>>,
    /// Max |residual| over the points that evaluated.
    pub max_abs_residual: f64,
    /// Points excluded from the maximum.
    pub non_converged_points: Vec<f64>,
    pub tol: f64,
    /// True when every point evaluated and the maximum is within `tol`.
    pub passed: bool,
}

/// Pointwise Euler-Lagrange residual of the trajectory y over the lattice
/// of [bc.a, bc.b] at the given depth.
///
/// The trajectory must be evaluatable slightly beyond the lattice hull:
/// the momentum term is differentiated through the shift, which touches
/// y at s^2 of the topmost lattice point.
pub fn el_residual(
    params: &HahnParams,
    lagrangian: &Lagrangian,
    y: &RealFn,
    bc: &BoundaryConditions,
    depth: u32,
    tol: f64,
) -> Result<ElReport> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(HahnError::InvalidParams(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    let interval = build_interval(params, bc.a, bc.b, depth)?;
    let h0 = default_h0(params);
    // The momentum below is itself a difference quotient, so its values
    // carry roundoff of order eps/|s(tau) - w0|. Differentiating it at the
    // fixed point with the standard 1e-4-scaled step would amplify that
    // noise by another 1/h; a 1e-2-scaled step balances the amplification
    // against Richardson truncation.
    let h_outer = 1e-2 * params.omega0().abs().max(1.0);

    let momentum = |tau: f64| -> Result<f64> {
        let st = params.sigma(tau);
        let u = y.eval(params.sigma_pow(2, tau), params)?;
        let v = hahn_derivative(params, y, st, h0)?;
        lagrangian.partial_v(st, u, v, params)
    };

    let mut residuals = Vec::with_capacity(interval.points().len());
    let mut non_converged = Vec::new();
    let mut max_abs = 0.0f64;
    let mut any_ok = false;
    for &t in interval.points() {
        let residual_at = || -> Result<f64> {
            let u = y.eval(params.sigma(t), params)?;
            let v = hahn_derivative(params, y, t, h0)?;
            let lhs = lagrangian.partial_u(t, u, v, params)?;
            let rhs = hahn_derivative_impl(params, &momentum, t, h_outer)?;
            Ok(lhs - rhs)
        };
        match residual_at() {
            Ok(r) => {
                residuals.push(Some(r));
                max_abs = max_abs.max(r.abs());
                any_ok = true;
            }
            Err(_) => {
                residuals.push(None);
                non_converged.push(t);
            }
        }
    }
    if !any_ok {
        max_abs = f64::NAN;
    }
    let passed = non_converged.is_empty() && max_abs <= tol;
    Ok(ElReport {
        points: interval.points().to_vec(),
        residuals,
        max_abs_residual: max_abs,
        non_converged_points: non_converged,
        tol,
        passed,
    })
}

fn check_admissible(params: &HahnParams, eta: &RealFn, bc: &BoundaryConditions) -> Result<()> {
    let ea = eta.eval(bc.a, params)?;
    let eb = eta.eval(bc.b, params)?;
    if ea.abs() > ADMISSIBILITY_TOL || eb.abs() > ADMISSIBILITY_TOL {
        return Err(HahnError::NotAdmissible(format!(
            "perturbation must vanish at the endpoints: eta({}) = {ea}, eta({}) = {eb}",
            bc.a, bc.b
        )));
    }
    Ok(())
}

/// Action integral of the trajectory: integral over [a, b] of
/// L(t, y(s t), Dy(t)).
pub fn action(
    params: &HahnParams,
    lagrangian: &Lagrangian,
    y: &RealFn,
    bc: &BoundaryConditions,
    tol: f64,
) -> Result<SeriesResult> {
    let h0 = default_h0(params);
    let integrand = {
        let params = *params;
        let lagrangian = lagrangian.clone();
        let y = y.clone();
        RealFn::from_fn(move |t| {
            let compute = || -> Result<f64> {
                let u = y.eval(params.sigma(t), &params)?;
                let v = hahn_derivative(&params, &y, t, h0)?;
                lagrangian.eval(t, u, v, &params)
            };
            compute().unwrap_or(f64::NAN)
        })
    };
    hahn_integral(params, &integrand, bc.a, bc.b, tol, DEFAULT_MAX_TERMS)
}

/// First variation of the action at y in the admissible direction eta:
/// integral of L_u * eta(s t) + L_v * D eta(t).
pub fn first_variation(
    params: &HahnParams,
    lagrangian: &Lagrangian,
    y: &RealFn,
    eta: &RealFn,
    bc: &BoundaryConditions,
    tol: f64,
) -> Result<f64> {
    check_admissible(params, eta, bc)?;
    let h0 = default_h0(params);
    let integrand = {
        let params = *params;
        let lagrangian = lagrangian.clone();
        let y = y.clone();
        let eta = eta.clone();
        RealFn::from_fn(move |t| {
            let compute = || -> Result<f64> {
                let u = y.eval(params.sigma(t), &params)?;
                let v = hahn_derivative(&params, &y, t, h0)?;
                let du = lagrangian.partial_u(t, u, v, &params)?;
                let dv = lagrangian.partial_v(t, u, v, &params)?;
                let es = eta.eval(params.sigma(t), &params)?;
                let de = hahn_derivative(&params, &eta, t, h0)?;
                Ok(du * es + dv * de)
            };
            compute().unwrap_or(f64::NAN)
        })
    };
    let r = hahn_integral(params, &integrand, bc.a, bc.b, tol, DEFAULT_MAX_TERMS)?;
    if !r.converged {
        return Err(HahnError::Domain(
            "first-variation integral did not converge".into(),
        ));
    }
    Ok(r.value)
}

/// Independent check value for the first variation: the symmetric
/// difference quotient (A(y + eps*eta) - A(y - eps*eta)) / (2 eps) of the
/// action along the perturbation direction.
pub fn action_difference_quotient(
    params: &HahnParams,
    lagrangian: &Lagrangian,
    y: &RealFn,
    eta: &RealFn,
    bc: &BoundaryConditions,
    eps: f64,
    tol: f64,
) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(HahnError::InvalidParams(format!(
            "difference-quotient step must be positive and finite, got {eps}"
        )));
    }
    check_admissible(params, eta, bc)?;
    let plus = RealFn::scaled_sum(1.0, y, eps, eta, params);
    let minus = RealFn::scaled_sum(1.0, y, -eps, eta, params);
    let ap = action(params, lagrangian, &plus, bc, tol)?;
    let am = action(params, lagrangian, &minus, bc, tol)?;
    if !ap.converged || !am.converged {
        return Err(HahnError::Domain("action integral did not converge".into()));
    }
    Ok((ap.value - am.value) / (2.0 * eps))
}

/// Verdict of the sampled joint-convexity test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convexity {
    Convex,
    Concave,
    Neither,
    Inconclusive,
}

impl Convexity {
    pub fn label(self) -> &'static str {
        match self {
            Convexity::Convex => "CONVEX",
            Convexity::Concave => "CONCAVE",
            Convexity::Neither => "NEITHER",
            Convexity::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// One sampled first-order gap L(t, u+du, v+dv) - L(t, u, v) - (L_u du + L_v dv).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSample {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub du: f64,
    pub dv: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub verdict: Convexity,
    /// Most negative gap seen (evidence against convexity).
    pub worst_convex_violation: Option<GapSample>,
    /// Most positive gap seen (evidence against concavity).
    pub worst_concave_violation: Option<GapSample>,
    pub samples_tested: u64,
    pub samples_failed: u64,
}

/// Sample the first-order gap of L over a (u, v) box at the given t
/// values. Convexity of L jointly in (u, v) for each fixed t is the
/// sufficiency hypothesis for minimizers; the verdict is based on the gap
/// sign pattern. Violations within [`CONVEXITY_GAP_TOL`] relative to the
/// magnitude of the quantities being compared are forgiven, so the
/// finite-difference noise in the sampled partials cannot flip a verdict.
/// Affine Lagrangians satisfy both sign conditions and report as convex.
/// More than 1% failed evaluations yields `Inconclusive`.
pub fn joint_convexity_check(
    params: &HahnParams,
    lagrangian: &Lagrangian,
    t_samples: &[f64],
    u_range: (f64, f64),
    v_range: (f64, f64),
    grid: u32,
) -> Result<ConvexityReport> {
    if t_samples.is_empty() {
        return Err(HahnError::InvalidParams(
            "convexity check needs at least one t sample".into(),
        ));
    }
    if grid < 2 {
        return Err(HahnError::InvalidParams(format!(
            "convexity grid must be at least 2, got {grid}"
        )));
    }
    for (name, (lo, hi)) in [("u", u_range), ("v", v_range)] {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(HahnError::InvalidParams(format!(
                "invalid {name} range [{lo}, {hi}]"
            )));
        }
    }

    let us = linspace(u_range.0, u_range.1, grid);
    let vs = linspace(v_range.0, v_range.1, grid);

    let mut tested = 0u64;
    let mut failed = 0u64;
    // Track the worst gaps normalized by the size of the quantities that
    // were subtracted, so cancellation noise on large values does not read
    // as a violation. The stored samples keep the raw gap.
    let mut min_gap: Option<(f64, GapSample)> = None;
    let mut max_gap: Option<(f64, GapSample)> = None;

    for &t in t_samples {
        for &u in &us {
            for &v in &vs {
                let base = (|| -> Result<(f64, f64, f64)> {
                    Ok((
                        lagrangian.eval(t, u, v, params)?,
                        lagrangian.partial_u(t, u, v, params)?,
                        lagrangian.partial_v(t, u, v, params)?,
                    ))
                })();
                for &u2 in &us {
                    for &v2 in &vs {
                        if u2 == u && v2 == v {
                            continue;
                        }
                        tested += 1;
                        let (l0, du, dv) = match &base {
                            Ok(triple) => *triple,
                            Err(_) => {
                                failed += 1;
                                continue;
                            }
                        };
                        let l1 = match lagrangian.eval(t, u2, v2, params) {
                            Ok(l1) => l1,
                            Err(_) => {
                                failed += 1;
                                continue;
                            }
                        };
                        let gap = l1 - l0 - (du * (u2 - u) + dv * (v2 - v));
                        let scale = 1.0_f64
                            .max(l0.abs())
                            .max(l1.abs())
                            .max((du * (u2 - u)).abs())
                            .max((dv * (v2 - v)).abs());
                        let normalized = gap / scale;
                        let sample = GapSample {
                            t,
                            u,
                            v,
                            du: u2 - u,
                            dv: v2 - v,
                            gap,
                        };
                        if min_gap.is_none_or(|(n, _)| normalized < n) {
                            min_gap = Some((normalized, sample));
                        }
                        if max_gap.is_none_or(|(n, _)| normalized > n) {
                            max_gap = Some((normalized, sample));
                        }
                    }
                }
            }
        }
    }

    let verdict = if tested == 0 || failed * 100 > tested {
        Convexity::Inconclusive
    } else {
        let convex_ok = min_gap.is_none_or(|(n, _)| n >= -CONVEXITY_GAP_TOL);
        let concave_ok = max_gap.is_none_or(|(n, _)| n <= CONVEXITY_GAP_TOL);
        match (convex_ok, concave_ok) {
            (true, _) => Convexity::Convex,
            (false, true) => Convexity::Concave,
            (false, false) => Convexity::Neither,
        }
    };
    Ok(ConvexityReport {
        verdict,
        worst_convex_violation: min_gap.map(|(_, s)| s),
        worst_concave_violation: max_gap.map(|(_, s)| s),
        samples_tested: tested,
        samples_failed: failed,
    })
}

fn linspace(lo: f64, hi: f64, n: u32) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|i| lo + (hi - lo) * (i as f64) / ((n - 1) as f64))
        .collect()
}

/// Outcome of the fundamental-lemma probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LemmaVerdict {
    /// Every probe integral vanished and f vanishes at the fixed point.
    ZeroFunction,
    /// A lattice point (or the fixed point) where f is provably nonzero;
    /// `evidence` is the nonvanishing probe integral, or the sample value
    /// itself when `point` is the fixed point.
    Witness { point: f64, evidence: f64 },
}

/// Probe whether f vanishes on the interval lattice in the sense of the
/// fundamental lemma: for each lattice point p = s^(2k+1) of an endpoint,
/// pair f against the single-point perturbation h supported at s^(2k+2)
/// of that endpoint with value f(p), and integrate f(t) h(s t) over
/// [a, b]. A nonvanishing integral certifies f(p) != 0. The fixed point
/// is not reachable this way and is sampled directly.
pub fn fundamental_lemma_oracle(
    params: &HahnParams,
    f: &RealFn,
    bc: &BoundaryConditions,
    depth: u32,
    tol: f64,
) -> Result<LemmaVerdict> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(HahnError::InvalidParams(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    let series_tol = (tol * 1e-2).max(1e-300);
    for endpoint in [bc.a, bc.b] {
        if params.is_fixed_point(endpoint) {
            continue;
        }
        for k in 0..=depth {
            let p = params.sigma_pow(2 * k as i32 + 1, endpoint);
            let fp = f.eval(p, params)?;
            let integrand = {
                let params = *params;
                let f = f.clone();
                // h lives at s(p), so f(t) h(s t) is nonzero only at
                // t = p; comparing t against p directly keeps the match
                // exact on the probing endpoint's own orbit.
                RealFn::from_fn(move |t| {
                    if fp != 0.0 && same_point(t, p) {
                        f.eval(t, &params).unwrap_or(f64::NAN) * fp
                    } else {
                        0.0
                    }
                })
            };
            let r = hahn_integral(
                params,
                &integrand,
                bc.a,
                bc.b,
                series_tol,
                DEFAULT_MAX_TERMS,
            )?;
            if r.value.abs() > tol {
                return Ok(LemmaVerdict::Witness {
                    point: p,
                    evidence: r.value,
                });
            }
        }
    }
    let at_fixed = f.eval(params.omega0(), params)?;
    if at_fixed.abs() > tol {
        return Ok(LemmaVerdict::Witness {
            point: params.omega0(),
            evidence: at_fixed,
        });
    }
    Ok(LemmaVerdict::ZeroFunction)
}

/// Quadratic model Lagrangian L(t, u, v) = v^2 + q u + t v with analytic
/// partials.
pub fn leitmann_lagrangian(params: &HahnParams) -> Lagrangian {
    let q = params.q();
    Lagrangian::from_fn(move |t, u, v| v * v + q * u + t * v)
        .with_partial_u(move |_, _, _| q)
        .with_partial_v(|t, _, v| 2.0 * v + t)
}

/// Reference Lagrangian Lbar(t, u, v) = v^2 for the gauge comparison.
pub fn leitmann_reference_lagrangian() -> Lagrangian {
    Lagrangian::from_fn(|_, _, v| v * v)
        .with_partial_u(|_, _, _| 0.0)
        .with_partial_v(|_, _, v| 2.0 * v)
}

/// Gauge term G(tau) linking the model Lagrangian to its reference:
/// pointwise, L(t, y(s t), Dy(t)) - Lbar(t, ybar(s t), Dybar(t)) = DG(t)
/// for y = ybar + c t + d.
pub fn leitmann_gauge_value(
    params: &HahnParams,
    c: f64,
    d: f64,
    tau: f64,
    ybar_at_tau: f64,
) -> f64 {
    let st = params.sigma(tau);
    2.0 * c * ybar_at_tau + (c * c + params.q() * d) * tau + st * ybar_at_tau + c * st * tau
}

/// Solution of the model problem by the direct method.
#[derive(Debug, Clone)]
pub struct LeitmannSolution {
    /// Slope of the affine minimizer.
    pub c: f64,
    /// Intercept of the affine minimizer.
    pub d: f64,
    pub minimizer: RealFn,
    /// Max over the lattice of the pointwise gauge identity residual,
    /// computed against the zero reference trajectory.
    pub gauge_residual: f64,
}

/// Max over the interval lattice of
/// |L(t, y^s, Dy) - Lbar(t, ybar^s, Dybar) - DG(t)| for y = ybar + c t + d.
pub fn leitmann_gauge_residual(
    params: &HahnParams,
    bc: &BoundaryConditions,
    c: f64,
    d: f64,
    ybar: &RealFn,
    depth: u32,
) -> Result<f64> {
    let interval = build_interval(params, bc.a, bc.b, depth)?;
    let h0 = default_h0(params);
    let lag = leitmann_lagrangian(params);
    let reference = leitmann_reference_lagrangian();
    let y = {
        let ybar = ybar.clone();
        let params = *params;
        RealFn::from_fn(move |t| {
            ybar.eval(t, &params)
                .map(|yb| yb + c * t + d)
                .unwrap_or(f64::NAN)
        })
    };
    let gauge = |tau: f64| -> Result<f64> {
        let yb = ybar.eval(tau, params)?;
        Ok(leitmann_gauge_value(params, c, d, tau, yb))
    };

    let mut max_res = 0.0f64;
    for &t in interval.points() {
        let st = params.sigma(t);
        let lhs = lag.eval(
            t,
            y.eval(st, params)?,
            hahn_derivative(params, &y, t, h0)?,
            params,
        )?;
        let ref_term = reference.eval(
            t,
            ybar.eval(st, params)?,
            hahn_derivative(params, ybar, t, h0)?,
            params,
        )?;
        let dg = hahn_derivative_impl(params, &gauge, t, h0)?;
        max_res = max_res.max((lhs - ref_term - dg).abs());
    }
    Ok(max_res)
}

/// Solve the model problem for the boundary data in `bc`: the affine
/// trajectory through both endpoints, plus the gauge-identity residual
/// certifying the reduction to the reference problem.
pub fn leitmann_affine_solve(
    params: &HahnParams,
    bc: &BoundaryConditions,
    depth: u32,
) -> Result<LeitmannSolution> {
    let c = (bc.alpha - bc.beta) / (bc.a - bc.b);
    let d = (bc.a * bc.beta - bc.b * bc.alpha) / (bc.a - bc.b);
    if !c.is_finite() || !d.is_finite() {
        return Err(HahnError::InvalidParams(format!(
            "affine solve produced non-finite coefficients c = {c}, d = {d}"
        )));
    }
    let minimizer = RealFn::from_fn(move |t| c * t + d);
    let gauge_residual = leitmann_gauge_residual(params, bc, c, d, &RealFn::constant(0.0), depth)?;
    Ok(LeitmannSolution {
        c,
        d,
        minimizer,
        gauge_residual,
    })
}

/// True when a and b lie on a common even shift orbit (or either is the
/// fixed point), which is the regime where lattice sufficiency arguments
/// telescope cleanly. Comparison is up to a 1e-9 relative tolerance.
pub fn on_common_orbit(params: &HahnParams, a: f64, b: f64, max_steps: u32) -> bool {
    if params.is_fixed_point(a) || params.is_fixed_point(b) {
        return true;
    }
    let w0 = params.omega0();
    let (da, db) = (a - w0, b - w0);
    if da * db < 0.0 {
        return false;
    }
    let (inner, outer) = if da.abs() <= db.abs() { (a, b) } else { (b, a) };
    let inner_gap = (inner - w0).abs();
    let mut p = outer;
    for _ in 0..=max_steps {
        if (p - inner).abs() <= 1e-9 * inner.abs().max(1.0) {
            return true;
        }
        if (p - w0).abs() < inner_gap {
            return false;
        }
        p = params.sigma_pow(2, p);
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::PiecewiseLinear;

    fn dyadic() -> HahnParams {
        HahnParams::new(0.5, 1.0).unwrap()
    }

    fn sqrt_length_lagrangian() -> Lagrangian {
        Lagrangian::from_fn(|_t, _u, v| (1.0 + v * v).sqrt())
    }

    #[test]
    fn affine_trajectory_is_stationary_for_length() {
        let p = dyadic();
        let bc = BoundaryConditions::new(2.0, 6.0, 2.0, 6.0).unwrap();
        let y = RealFn::from_fn(|t| t);
        let report = el_residual(&p, &sqrt_length_lagrangian(), &y, &bc, 8, 1e-8).unwrap();
        assert!(
            report.passed,
            "max residual {} non-converged {:?}",
            report.max_abs_residual, report.non_converged_points
        );
        assert_eq!(report.points.len(), report.residuals.len());
    }

    #[test]
    fn curved_trajectory_is_not_stationary_for_length() {
        let p = dyadic();
        let bc = BoundaryConditions::new(2.0, 6.0, 4.0, 36.0).unwrap();
        let y = RealFn::from_fn(|t| t * t);
        let report = el_residual(&p, &sqrt_length_lagrangian(), &y, &bc, 6, 1e-8).unwrap();
        assert!(!report.passed);
        assert!(report.max_abs_residual > 1e-3);
    }

    #[test]
    fn el_reports_failing_points_instead_of_erroring() {
        let p = dyadic();
        let bc = BoundaryConditions::new(2.0, 6.0, 0.0, 0.0).unwrap();
        // Blows up at t = 3 = s(4), which the shifted evaluations at the
        // lattice points 4 and 2.5 both touch.
        let y = RealFn::from_fn(|t| 1.0 / (t - 3.0));
        let report =
            el_residual(&p, &Lagrangian::from_fn(|_, _, v| v * v), &y, &bc, 6, 1e-8).unwrap();
        assert!(!report.non_converged_points.is_empty());
        assert!(!report.passed);
        // Points away from the singularity still evaluate.
        assert!(report.residuals.iter().any(Option::is_some));
    }

    #[test]
    fn first_variation_is_boundary_term_for_kinetic_lagrangian() {
        // For L = v^2 and y = t: deltaA = 2 int D eta = 2 (eta(b) - eta(a)) = 0
        // for any admissible eta.
        let p = dyadic();
        let bc = BoundaryConditions::new(2.0, 6.0, 2.0, 6.0).unwrap();
        let lag = leitmann_reference_lagrangian();
        let y = RealFn::from_fn(|t| t);
        let eta = PiecewiseLinear::new([(2.0, 0.0), (4.0, 1.0), (6.0, 0.0)])
            .unwrap()
            .real_fn();
        let fv = first_variation(&p, &lag, &y, &eta, &bc, 1e-12).unwrap();
        assert!(fv.abs() < 1e-9, "first variation: {fv}");
    }

    #[test]
    fn first_variation_matches_action_difference_quotient() {
        let p = dyadic();
        let bc = BoundaryConditions::new(2.0, 6.0, 0.0, 0.0).unwrap();
        let lag = leitmann_lagrangian(&p);
        let y = RealFn::from_fn(|t| 0.25 * t * t - t);
        let eta = PiecewiseLinear::new([(2.0, 0.0), (3.0, 0.5), (5.0, -0.25), (6.0, 0.0)])
            .unwrap()
            .real_fn();
        let fv = first_variation(&p, &lag, &y, &eta, &bc, 1e-12).unwrap();
        let fd = action_difference_quotient(&p, &lag, &y, &eta, &bc, 1e-5, 1e-12).unwrap();
        assert!((fv - fd).abs() < 1e-6, "variation {fv} vs quotient {fd}");
    }

    #[test]
    fn inadmissible_perturbations_are_rejected() {
        let p = dyadic();
        let bc = BoundaryConditions::new(2.0, 6.0, 0.0, 0.0).unwrap();
        let lag = leitmann_reference_lagrangian();
        let y = RealFn::from_fn(|t| t);
        let eta = RealFn::constant(0.5);
        assert!(matches!(
            first_variation(&p, &lag, &y, &eta, &bc, 1e-10),
            Err(HahnError::NotAdmissible(_))
        ));
    }

    #[test]
    fn convexity_verdicts() {
        let p = dyadic();
        let ts = [2.5, 3.0, 4.0];
        let range = (-2.0, 2.0);

        let convex =
            joint_convexity_check(&p, &sqrt_length_lagrangian(), &ts, range, range, 6).unwrap();
        assert_eq!(convex.verdict, Convexity::Convex);

        let model =
            joint_convexity_check(&p, &leitmann_lagrangian(&p), &ts, range, range, 6).unwrap();
        assert_eq!(model.verdict, Convexity::Convex);

        let concave = joint_convexity_check(
            &p,
            &Lagrangian::from_fn(|_, _, v| -v * v),
            &ts,
            range,
            range,
            6,
        )
        .unwrap();
        assert_eq!(concave.verdict, Convexity::Concave);

        let saddle = joint_convexity_check(
            &p,
            &Lagrangian::from_fn(|_, u, v| v * v - u * u),
            &ts,
            range,
            range,
            6,
        )
        .unwrap();
        assert_eq!(saddle.verdict, Convexity::Neither);
        assert!(saddle.worst_convex_violation.unwrap().gap < -CONVEXITY_GAP_TOL);
        assert!(saddle.worst_concave_violation.unwrap().gap > CONVEXITY_GAP_TOL);

        // Affine Lagrangians satisfy both inequalities and label as convex.
        let affine = joint_convexity_check(
            &p,
            &Lagrangian::from_fn(|t, u, v| 2.0 * u - 3.0 * v + t),
            &ts,
            range,
            range,
            6,
        )
        .unwrap();
        assert_eq!(affine.verdict, Convexity::Convex);
    }

    #[test]
    fn convexity_inconclusive_on_widespread_failures() {
        let p = dyadic();
        let report = joint_convexity_check(
            &p,
            &Lagrangian::from_fn(|_, u, _| u.sqrt()),
            &[3.0],
            (-1.0, 1.0),
            (-1.0, 1.0),
            4,
        )
        .unwrap();
        assert_eq!(report.verdict, Convexity::Inconclusive);
        assert!(report.samples_failed > 0);
    }

    #[test]
    fn lemma_oracle_accepts_zero_function() {
        let p = dyadic();
        let bc = BoundaryConditions::new(2.0, 6.0, 0.0, 0.0).unwrap();
        let verdict = fundamental_lemma_oracle(&p, &RealFn::constant(0.0), &bc, 8, 1e-10).unwrap();
        assert_eq!(verdict, LemmaVerdict::ZeroFunction);
    }

    #[test]
    fn lemma_oracle_finds_witness_on_first_orbit_point() {
        let p = dyadic();
        let bc = BoundaryConditions::new(2.0, 6.0, 0.0, 0.0).unwrap();
        let w0 = p.omega0();
        let f = RealFn::from_fn(move |t| t - w0);
        match fundamental_lemma_oracle(&p, &f, &bc, 8, 1e-10).unwrap() {
            LemmaVerdict::Witness { point, evidence } => {
                assert_eq!(point, 4.0);
                // Probe integral: (s^-1(6) - s(6)) * q * f(4)^2 = 6 * 0.5 * 4.
                assert!((evidence - 12.0).abs() < 1e-9, "evidence {evidence}");
            }
            other => panic!("expected witness, got {other:?}"),
        }
    }

    #[test]
    fn lemma_oracle_samples_the_fixed_point_directly() {
        let p = dyadic();
        let bc = BoundaryConditions::new(2.0, 6.0, 0.0, 0.0).unwrap();
        // Zero on every lattice point, nonzero exactly at the fixed point.
        let f = RealFn::from_fn(|t| if same_point(t, 2.0) { 1.0 } else { 0.0 });
        match fundamental_lemma_oracle(&p, &f, &bc, 8, 1e-10).unwrap() {
            LemmaVerdict::Witness { point, evidence } => {
                assert_eq!(point, 2.0);
                assert_eq!(evidence, 1.0);
            }
            other => panic!("expected fixed-point witness, got {other:?}"),
        }
    }

    #[test]
    fn leitmann_solves_model_boundary_data() {
        let p = dyadic();
        let bc = BoundaryConditions::new(2.0, 6.0, 0.0, 4.0).unwrap();
        let sol = leitmann_affine_solve(&p, &bc, 8).unwrap();
        assert_eq!(sol.c, 1.0);
        assert_eq!(sol.d, -2.0);
        assert_eq!(sol.minimizer.eval(2.0, &p).unwrap(), 0.0);
        assert_eq!(sol.minimizer.eval(6.0, &p).unwrap(), 4.0);
        assert!(
            sol.gauge_residual < 1e-9,
            "gauge residual {}",
            sol.gauge_residual
        );
    }

    #[test]
    fn leitmann_handles_decreasing_data() {
        let p = HahnParams::new(0.5, 1.0).unwrap();
        let bc = BoundaryConditions::new(0.0, 1.0, 1.0, 0.0).unwrap();
        let sol = leitmann_affine_solve(&p, &bc, 6).unwrap();
        assert_eq!(sol.c, -1.0);
        assert_eq!(sol.d, 1.0);
        assert!(sol.gauge_residual < 1e-9);
    }

    #[test]
    fn gauge_identity_holds_for_nonzero_reference() {
        let p = dyadic();
        let bc = BoundaryConditions::new(2.0, 6.0, 1.0, 3.0).unwrap();
        let ybar = RealFn::from_fn(|t| 0.125 * (t - 2.0) * (6.0 - t));
        let res = leitmann_gauge_residual(&p, &bc, 0.5, 0.0, &ybar, 6).unwrap();
        assert!(res < 1e-8, "gauge residual {res}");
    }

    #[test]
    fn common_orbit_detection() {
        let p = dyadic();
        // s^4(6) = 2.25 shares the even orbit of 6.
        assert!(on_common_orbit(&p, 2.25, 6.0, 32));
        assert!(!on_common_orbit(&p, 2.26, 6.0, 32));
        // The fixed point is on every orbit closure.
        assert!(on_common_orbit(&p, 2.0, 6.0, 32));
        // Opposite sides of the fixed point never meet.
        assert!(!on_common_orbit(&p, 1.0, 6.0, 32));
    }

    #[test]
    fn lagrangian_fd_partials_match_analytic() {
        let p = dyadic();
        let analytic = leitmann_lagrangian(&p);
        let q = p.q();
        let numeric = Lagrangian::from_fn(move |t, u, v| v * v + q * u + t * v);
        for (t, u, v) in [(2.5, 1.0, -0.5), (4.0, -2.0, 3.0), (6.0, 0.0, 0.0)] {
            let (a_u, n_u) = (
                analytic.partial_u(t, u, v, &p).unwrap(),
                numeric.partial_u(t, u, v, &p).unwrap(),
            );
            let (a_v, n_v) = (
                analytic.partial_v(t, u, v, &p).unwrap(),
                numeric.partial_v(t, u, v, &p).unwrap(),
            );
            assert!((a_u - n_u).abs() < 1e-9, "du: {a_u} vs {n_u}");
            assert!((a_v - n_v).abs() < 1e-9, "dv: {a_v} vs {n_v}");
        }
    }
}
