//! A small arithmetic expression language for integrands f(t) and
//! Lagrangians L(t,u,v).
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := atom ('^' exponent)?
//! exponent := (number | '(' expr ')') ('^' exponent)?
//! atom     := number | constant | variable | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Precedence is `^` > unary `-` > `*` `/` > `+` `-`, with `^`
//! right-associative. An exponent must be a numeric literal or a
//! parenthesized expression (chains like `2^3^2` stay legal because each
//! link obeys the same rule); anything else, e.g. `2^-3`, is a syntax error.
//!
//! Variables are `t`, `u`, `v`, gated by the [`VarSet`] passed to [`parse`].
//! The constants `q`, `omega`, `omega0` resolve from [`HahnParams`] at
//! evaluation time; `pi` and `e` are the usual mathematical constants.
//! There are deliberately no conditionals: piecewise functions are expressed
//! through lattice tables, not the grammar.

mod parser;

use std::fmt;

use crate::error::{HahnError, Result};
use crate::lattice::HahnParams;

/// Variable names the grammar knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    U,
    V,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::U => "u",
            Var::V => "v",
        }
    }
}

/// Built-in named constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Q,
    Omega,
    Omega0,
    Pi,
    E,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Q => "q",
            Builtin::Omega => "omega",
            Builtin::Omega0 => "omega0",
            Builtin::Pi => "pi",
            Builtin::E => "e",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Abs,
    Exp,
    Log,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }
}

/// Abstract syntax tree of a parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Literal(f64),
    Var(Var),
    Const(Builtin),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// The set of variable names an expression is allowed to reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarSet {
    t: bool,
    u: bool,
    v: bool,
}

impl VarSet {
    /// Only `t`: integrands and trajectories.
    pub fn only_t() -> VarSet {
        VarSet {
            t: true,
            u: false,
            v: false,
        }
    }

    /// `t`, `u`, `v`: Lagrangians.
    pub fn tuv() -> VarSet {
        VarSet {
            t: true,
            u: true,
            v: true,
        }
    }

    pub fn contains(&self, var: Var) -> bool {
        match var {
            Var::T => self.t,
            Var::U => self.u,
            Var::V => self.v,
        }
    }
}

/// Parse `source` against the allowed variable set.
///
/// Errors carry the byte offset of the offending token; identifiers outside
/// `allowed_vars` and the built-in names are reported with the identifier
/// itself.
pub fn parse(source: &str, allowed_vars: VarSet) -> Result<Expr> {
    parser::parse(source, allowed_vars)
}

/// Variable bindings for evaluation. Unbound variables that an expression
/// actually references raise a domain error.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bindings {
    pub t: Option<f64>,
    pub u: Option<f64>,
    pub v: Option<f64>,
}

impl Bindings {
    pub fn t(t: f64) -> Bindings {
        Bindings {
            t: Some(t),
            u: None,
            v: None,
        }
    }

    pub fn tuv(t: f64, u: f64, v: f64) -> Bindings {
        Bindings {
            t: Some(t),
            u: Some(u),
            v: Some(v),
        }
    }

    pub fn get(&self, var: Var) -> Option<f64> {
        match var {
            Var::T => self.t,
            Var::U => self.u,
            Var::V => self.v,
        }
    }

    pub fn set(&mut self, var: Var, value: f64) {
        match var {
            Var::T => self.t = Some(value),
            Var::U => self.u = Some(value),
            Var::V => self.v = Some(value),
        }
    }
}

/// Recursive evaluation. `q`, `omega`, `omega0` resolve from `params`.
pub fn eval(expr: &Expr, bindings: &Bindings, params: &HahnParams) -> Result<f64> {
    let value = match expr {
        Expr::Literal(x) => *x,
        Expr::Var(var) => bindings
            .get(*var)
            .ok_or_else(|| HahnError::Domain(format!("unbound variable `{}`", var.name())))?,
        Expr::Const(c) => match c {
            Builtin::Q => params.q(),
            Builtin::Omega => params.omega(),
            Builtin::Omega0 => params.omega0(),
            Builtin::Pi => std::f64::consts::PI,
            Builtin::E => std::f64::consts::E,
        },
        Expr::Neg(inner) => -eval(inner, bindings, params)?,
        Expr::Binary(op, lhs, rhs) => {
            let l = eval(lhs, bindings, params)?;
            let r = eval(rhs, bindings, params)?;
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => {
                    if r == 0.0 {
                        return Err(HahnError::Domain(format!("division by zero in `{expr}`")));
                    }
                    l / r
                }
                BinOp::Pow => l.powf(r),
            }
        }
        Expr::Call(func, arg) => {
            let x = eval(arg, bindings, params)?;
            match func {
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(HahnError::Domain(format!(
                            "sqrt of negative value {x} in `{expr}`"
                        )));
                    }
                    x.sqrt()
                }
                Func::Abs => x.abs(),
                Func::Exp => x.exp(),
                Func::Log => {
                    if x <= 0.0 {
                        return Err(HahnError::Domain(format!(
                            "log of non-positive value {x} in `{expr}`"
                        )));
                    }
                    x.ln()
                }
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
            }
        }
    };
    if !value.is_finite() {
        return Err(HahnError::NonFinite(format!(
            "`{expr}` evaluated to a non-finite value"
        )));
    }
    Ok(value)
}

/// True if `expr` references `var` anywhere.
pub fn uses_var(expr: &Expr, var: Var) -> bool {
    match expr {
        Expr::Literal(_) | Expr::Const(_) => false,
        Expr::Var(v) => *v == var,
        Expr::Neg(inner) => uses_var(inner, var),
        Expr::Binary(_, l, r) => uses_var(l, var) || uses_var(r, var),
        Expr::Call(_, arg) => uses_var(arg, var),
    }
}

/// Central-difference partial derivative of an expression with respect to
/// `u` or `v`, with a fixed step h.
///
/// The engine-wide default step for an O(1)-scaled problem is
/// [`default_fd_step`]; callers pass an explicit h here.
#[derive(Debug, Clone)]
pub struct PartialFn {
    expr: Expr,
    var: Var,
    h: f64,
}

/// Scale-aware default finite-difference step at abscissa `x`:
/// 1e-6 · max(1, |x|), balancing truncation against roundoff in f64.
pub fn default_fd_step(x: f64) -> f64 {
    1e-6 * x.abs().max(1.0)
}

/// Build the central-difference evaluator (E(var+h) − E(var−h)) / (2h).
pub fn partial(expr: &Expr, var: Var, h: f64) -> Result<PartialFn> {
    if var == Var::T {
        return Err(HahnError::InvalidParams(
            "partial derivatives are taken with respect to u or v only".into(),
        ));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(HahnError::InvalidParams(format!(
            "finite-difference step must be positive and finite, got {h}"
        )));
    }
    Ok(PartialFn {
        expr: expr.clone(),
        var,
        h,
    })
}

impl PartialFn {
    pub fn eval(&self, bindings: &Bindings, params: &HahnParams) -> Result<f64> {
        let x = bindings
            .get(self.var)
            .ok_or_else(|| HahnError::Domain(format!("unbound variable `{}`", self.var.name())))?;
        let mut hi = *bindings;
        hi.set(self.var, x + self.h);
        let mut lo = *bindings;
        lo.set(self.var, x - self.h);
        let num = eval(&self.expr, &hi, params)? - eval(&self.expr, &lo, params)?;
        Ok(num / (2.0 * self.h))
    }
}

// Pretty-printing: minimal parentheses, canonical spacing ("a + b", "a*b",
// "a^b"). The printed form of a parsed expression reparses to a structurally
// identical tree; to keep that property, a nested right operand of the same
// precedence level and any exponent that is not a nonnegative literal or a
// power chain are parenthesized.

fn precedence(expr: &Expr) -> u8 {
    match expr {
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Binary(BinOp::Pow, ..) => 4,
        Expr::Literal(_) | Expr::Var(_) | Expr::Const(_) | Expr::Call(..) => 5,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn group(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
            write!(f, "(")?;
            write!(f, "{e}")?;
            write!(f, ")")
        }
        fn child(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
            if precedence(e) < min_prec {
                group(f, e)
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Literal(x) => {
                if x.is_sign_negative() || !x.is_finite() {
                    write!(f, "({x})")
                } else {
                    write!(f, "{x}")
                }
            }
            Expr::Var(v) => write!(f, "{}", v.name()),
            Expr::Const(c) => write!(f, "{}", c.name()),
            Expr::Neg(inner) => {
                write!(f, "-")?;
                child(f, inner, 3)
            }
            Expr::Binary(op, l, r) => {
                let (sym, prec) = match op {
                    BinOp::Add => (" + ", 1),
                    BinOp::Sub => (" - ", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                    BinOp::Pow => ("^", 4),
                };
                if *op == BinOp::Pow {
                    // Base must be an atom; exponent must stay a literal,
                    // a parenthesized group, or a nested power chain. A chain
                    // stays bare only when its own head prints as one of the
                    // first two forms; a bare identifier head would not parse
                    // back as an exponent.
                    child(f, l, 5)?;
                    write!(f, "{sym}")?;
                    match r.as_ref() {
                        Expr::Literal(x) if x.is_finite() && !x.is_sign_negative() => {
                            write!(f, "{x}")
                        }
                        Expr::Binary(BinOp::Pow, head, _)
                            if !matches!(
                                head.as_ref(),
                                Expr::Var(_) | Expr::Const(_) | Expr::Call(..)
                            ) =>
                        {
                            write!(f, "{r}")
                        }
                        other => group(f, other),
                    }
                } else {
                    child(f, l, prec)?;
                    write!(f, "{sym}")?;
                    // Right operand of a left-associative operator keeps its
                    // parentheses at equal precedence.
                    child(f, r, prec + 1)
                }
            }
            Expr::Call(func, arg) => {
                write!(f, "{}(", func.name())?;
                write!(f, "{arg}")?;
                write!(f, ")")
            }
        }
    }
}
