//! Real-valued functions of one variable, in the forms the engine meets
//! them: host closures, parsed expressions in `t`, finitely supported
//! lattice tables, and piecewise-linear interpolants for perturbations.

use std::fmt;
use std::sync::Arc;

use crate::error::{HahnError, Result};
use crate::expr::{self, Bindings, Expr, Var};
use crate::lattice::HahnParams;
use crate::util::same_point;

/// A real function f: R -> R that evaluation code can call uniformly.
///
/// The table variant is public so the series integrator can recognize
/// finitely supported integrands and terminate exactly once the remaining
/// orbit can no longer meet the support.
#[derive(Clone)]
pub enum RealFn {
    /// Host closure. A NaN or infinite return value surfaces as a
    /// non-finite evaluation error.
    Host(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// Parsed expression over the single variable `t`.
    Parsed(Arc<Expr>),
    /// Finitely supported function on lattice points.
    Table(LatticeTableFn),
}

impl RealFn {
    pub fn from_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> RealFn {
        RealFn::Host(Arc::new(f))
    }

    /// Wrap a parsed expression. The expression may reference `t` and the
    /// named constants only.
    pub fn from_expr(expr: Expr) -> Result<RealFn> {
        for var in [Var::U, Var::V] {
            if expr::uses_var(&expr, var) {
                return Err(HahnError::InvalidParams(format!(
                    "function of t must not reference `{}`",
                    var.name()
                )));
            }
        }
        Ok(RealFn::Parsed(Arc::new(expr)))
    }

    pub fn table(table: LatticeTableFn) -> RealFn {
        RealFn::Table(table)
    }

    /// Constant function.
    pub fn constant(c: f64) -> RealFn {
        RealFn::from_fn(move |_| c)
    }

    pub fn eval(&self, t: f64, params: &HahnParams) -> Result<f64> {
        match self {
            RealFn::Host(f) => {
                let y = f(t);
                if !y.is_finite() {
                    return Err(HahnError::NonFinite(format!(
                        "function evaluated to a non-finite value at t = {t}"
                    )));
                }
                Ok(y)
            }
            RealFn::Parsed(expr) => expr::eval(expr, &Bindings::t(t), params),
            RealFn::Table(table) => Ok(table.lookup(t)),
        }
    }

    /// alpha*f + beta*g as a new function. Evaluation failures of either
    /// operand propagate as non-finite errors.
    pub fn scaled_sum(
        alpha: f64,
        f: &RealFn,
        beta: f64,
        g: &RealFn,
        params: &HahnParams,
    ) -> RealFn {
        let f = f.clone();
        let g = g.clone();
        let params = *params;
        RealFn::from_fn(move |t| {
            let fv = f.eval(t, &params).unwrap_or(f64::NAN);
            let gv = g.eval(t, &params).unwrap_or(f64::NAN);
            alpha * fv + beta * gv
        })
    }
}

impl fmt::Debug for RealFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealFn::Host(_) => f.write_str("RealFn::Host(..)"),
            RealFn::Parsed(e) => write!(f, "RealFn::Parsed(`{e}`)"),
            RealFn::Table(t) => write!(f, "RealFn::Table({t:?})"),
        }
    }
}

/// Finitely supported function: an explicit point -> value map plus a
/// default for everything off the support. Lookups match points to within
/// 4 ulp, absorbing roundoff drift in computed orbit coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeTableFn {
    /// Sorted by point, keys pairwise distinct beyond the 4-ulp tolerance.
    entries: Vec<(f64, f64)>,
    default: f64,
}

impl LatticeTableFn {
    pub fn new(
        entries: impl IntoIterator<Item = (f64, f64)>,
        default: f64,
    ) -> Result<LatticeTableFn> {
        let mut entries: Vec<(f64, f64)> = entries.into_iter().collect();
        if !default.is_finite() {
            return Err(HahnError::InvalidParams(format!(
                "table default must be finite, got {default}"
            )));
        }
        for &(p, v) in &entries {
            if !p.is_finite() || !v.is_finite() {
                return Err(HahnError::InvalidParams(format!(
                    "table entry ({p}, {v}) must be finite"
                )));
            }
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in entries.windows(2) {
            if same_point(pair[0].0, pair[1].0) {
                return Err(HahnError::InvalidParams(format!(
                    "table points {} and {} coincide",
                    pair[0].0, pair[1].0
                )));
            }
        }
        Ok(LatticeTableFn { entries, default })
    }

    /// Parse a `point:value,point:value,...` spec. Numbers accept the same
    /// forms as expression literals, including scientific notation.
    /// Whitespace around numbers and separators is ignored.
    pub fn parse_spec(spec: &str, default: f64) -> Result<LatticeTableFn> {
        fn parse_number(field: &str, base: usize, what: &str) -> Result<f64> {
            let trimmed = field.trim();
            if trimmed.is_empty() {
                return Err(HahnError::Parse {
                    offset: base,
                    message: format!("empty {what} in table entry"),
                });
            }
            let offset = base + (trimmed.as_ptr() as usize - field.as_ptr() as usize);
            let value: f64 = trimmed.parse().map_err(|_| HahnError::Parse {
                offset,
                message: format!("invalid {what} `{trimmed}` in table entry"),
            })?;
            if !value.is_finite() {
                return Err(HahnError::Parse {
                    offset,
                    message: format!("{what} `{trimmed}` is out of range"),
                });
            }
            Ok(value)
        }

        if spec.trim().is_empty() {
            return Err(HahnError::Parse {
                offset: 0,
                message: "empty table spec".into(),
            });
        }
        let mut entries = Vec::new();
        let mut base = 0;
        for field in spec.split(',') {
            let colon = field.find(':').ok_or_else(|| HahnError::Parse {
                offset: base,
                message: format!("table entry `{}` is missing `:`", field.trim()),
            })?;
            let point = parse_number(&field[..colon], base, "point")?;
            let value = parse_number(&field[colon + 1..], base + colon + 1, "value")?;
            entries.push((point, value));
            base += field.len() + 1;
        }
        LatticeTableFn::new(entries, default).map_err(|e| match e {
            HahnError::InvalidParams(message) => HahnError::Parse { offset: 0, message },
            other => other,
        })
    }

    /// Value at `x`: the entry whose point matches within 4 ulp, or the
    /// default.
    pub fn lookup(&self, x: f64) -> f64 {
        let idx = self.entries.partition_point(|&(p, _)| p < x);
        for probe in [idx.wrapping_sub(1), idx] {
            if let Some(&(p, v)) = self.entries.get(probe) {
                if same_point(p, x) {
                    return v;
                }
            }
        }
        self.default
    }

    /// Support points in ascending order.
    pub fn support(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|&(p, _)| p)
    }

    pub fn default_value(&self) -> f64 {
        self.default
    }

    /// True if some support point lies strictly between `fixed_point` and
    /// `x` (same side, strictly closer to the fixed point than `x`, and not
    /// coinciding with `x`). When false, the forward orbit of `x` can never
    /// meet the support again.
    pub fn support_strictly_inside(&self, fixed_point: f64, x: f64) -> bool {
        let dx = x - fixed_point;
        self.entries.iter().any(|&(p, _)| {
            let dp = p - fixed_point;
            dp * dx > 0.0 && dp.abs() < dx.abs() && !same_point(p, x)
        })
    }
}

/// Continuous piecewise-linear interpolant through sorted nodes, constant
/// beyond the first and last node. Used to build admissible perturbations
/// (hat functions) with prescribed lattice values.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    nodes: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(nodes: impl IntoIterator<Item = (f64, f64)>) -> Result<PiecewiseLinear> {
        let mut nodes: Vec<(f64, f64)> = nodes.into_iter().collect();
        if nodes.is_empty() {
            return Err(HahnError::InvalidParams(
                "piecewise-linear interpolant needs at least one node".into(),
            ));
        }
        for &(x, y) in &nodes {
            if !x.is_finite() || !y.is_finite() {
                return Err(HahnError::InvalidParams(format!(
                    "interpolation node ({x}, {y}) must be finite"
                )));
            }
        }
        nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in nodes.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(HahnError::InvalidParams(format!(
                    "duplicate interpolation node at {}",
                    pair[0].0
                )));
            }
        }
        Ok(PiecewiseLinear { nodes })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if x <= self.nodes[0].0 {
            return self.nodes[0].1;
        }
        if x >= self.nodes[n - 1].0 {
            return self.nodes[n - 1].1;
        }
        let idx = self.nodes.partition_point(|&(p, _)| p <= x);
        let (x0, y0) = self.nodes[idx - 1];
        let (x1, y1) = self.nodes[idx];
        y0 + (y1 - y0) * ((x - x0) / (x1 - x0))
    }

    pub fn real_fn(self) -> RealFn {
        RealFn::from_fn(move |x| self.eval(x))
    }
}
