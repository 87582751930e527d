//! Resolved expressions over a network state.
//!
//! Expressions are produced by the model elaborator with every identifier
//! already mapped to a variable slot, a component location or a constant.
//! All values are `f64`; predicates evaluate to `1.0` / `0.0` and any
//! nonzero number is truthy.

use std::fmt;

use rand::{Rng, RngCore};
use thiserror::Error;

/// Index of a variable cell in the flat valuation vector.
pub type Slot = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("domain error: {func}({arg})")]
    Domain { func: &'static str, arg: f64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("index {index} out of bounds for dimension of size {len}")]
    IndexOutOfBounds { index: i64, len: usize },
    #[error("random() evaluated outside of an update")]
    RandomOutsideUpdate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
    Imply,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Imply => "imply",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne
        )
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or | BinOp::Imply)
    }

    /// Binding strength used by the pretty printers; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Imply => 1,
            BinOp::Or => 2,
            BinOp::And => 3,
            BinOp::Eq | BinOp::Ne => 4,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 5,
            BinOp::Add | BinOp::Sub => 6,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 7,
        }
    }

    /// The comparison obtained by logically negating `self`.
    fn negated(self) -> BinOp {
        match self {
            BinOp::Lt => BinOp::Ge,
            BinOp::Le => BinOp::Gt,
            BinOp::Gt => BinOp::Le,
            BinOp::Ge => BinOp::Lt,
            BinOp::Eq => BinOp::Ne,
            BinOp::Ne => BinOp::Eq,
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Sin,
    Cos,
    Tan,
    Log,
    Exp,
    Sqrt,
    Abs,
    Pow,
    Min,
    Max,
    Floor,
    Ceil,
}

impl Builtin {
    pub fn from_name(name: &str) -> Option<Builtin> {
        Some(match name {
            "sin" => Builtin::Sin,
            "cos" => Builtin::Cos,
            "tan" => Builtin::Tan,
            "log" | "ln" => Builtin::Log,
            "exp" => Builtin::Exp,
            "sqrt" => Builtin::Sqrt,
            "abs" | "fabs" => Builtin::Abs,
            "pow" => Builtin::Pow,
            "min" | "fmin" => Builtin::Min,
            "max" | "fmax" => Builtin::Max,
            "floor" => Builtin::Floor,
            "ceil" => Builtin::Ceil,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Sin => "sin",
            Builtin::Cos => "cos",
            Builtin::Tan => "tan",
            Builtin::Log => "log",
            Builtin::Exp => "exp",
            Builtin::Sqrt => "sqrt",
            Builtin::Abs => "abs",
            Builtin::Pow => "pow",
            Builtin::Min => "min",
            Builtin::Max => "max",
            Builtin::Floor => "floor",
            Builtin::Ceil => "ceil",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Builtin::Pow | Builtin::Min | Builtin::Max => 2,
            _ => 1,
        }
    }

    fn apply(self, args: &[f64]) -> Result<f64, EvalError> {
        let x = args[0];
        Ok(match self {
            Builtin::Sin => x.sin(),
            Builtin::Cos => x.cos(),
            Builtin::Tan => x.tan(),
            Builtin::Log => {
                if x <= 0.0 {
                    return Err(EvalError::Domain { func: "log", arg: x });
                }
                x.ln()
            }
            Builtin::Exp => x.exp(),
            Builtin::Sqrt => {
                if x < 0.0 {
                    return Err(EvalError::Domain { func: "sqrt", arg: x });
                }
                x.sqrt()
            }
            Builtin::Abs => x.abs(),
            Builtin::Pow => x.powf(args[1]),
            Builtin::Min => x.min(args[1]),
            Builtin::Max => x.max(args[1]),
            Builtin::Floor => x.floor(),
            Builtin::Ceil => x.ceil(),
        })
    }
}

/// A resolved expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Bool(bool),
    /// Global elapsed time.
    Time,
    Var(Slot),
    /// Array cell with a runtime index; `dims` are the array extents.
    Elem {
        base: Slot,
        dims: Vec<usize>,
        index: Vec<Expr>,
    },
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Cond(Box<Expr>, Box<Expr>, Box<Expr>),
    Call(Builtin, Vec<Expr>),
    /// Uniform draw from `[0, b)`.
    Random(Box<Expr>),
    /// Holds when `component` currently sits in `location`.
    At { component: usize, location: usize },
}

/// The part of a state an expression may read.
#[derive(Debug, Clone, Copy)]
pub struct Env<'a> {
    pub vars: &'a [f64],
    pub locations: &'a [usize],
    pub time: f64,
}

/// Value of an expression, typed by its syntactic shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Num(f64),
    Bool(bool),
}

impl Value {
    pub fn as_f64(self) -> f64 {
        match self {
            Value::Num(x) => x,
            Value::Bool(b) => f64::from(u8::from(b)),
        }
    }

    pub fn truthy(self) -> bool {
        match self {
            Value::Num(x) => x != 0.0,
            Value::Bool(b) => b,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(x) => write!(f, "{x}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// A closed window `[lo, hi]` of future delays, `hi` possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub const ALWAYS: Window = Window {
        lo: 0.0,
        hi: f64::INFINITY,
    };

    fn intersect(self, other: Window) -> Option<Window> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Window { lo, hi })
    }

    fn hull(self, other: Window) -> Window {
        Window {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }
}

fn truth(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

impl Expr {
    pub fn num(x: f64) -> Expr {
        Expr::Num(x)
    }

    pub fn var(slot: Slot) -> Expr {
        Expr::Var(slot)
    }

    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Bin(op, Box::new(lhs), Box::new(rhs))
    }

    /// True when the expression denotes a predicate rather than a number.
    pub fn is_predicate(&self) -> bool {
        match self {
            Expr::Bool(_) | Expr::Not(_) | Expr::At { .. } => true,
            Expr::Bin(op, _, _) => op.is_comparison() || op.is_logical(),
            Expr::Cond(_, a, b) => a.is_predicate() && b.is_predicate(),
            _ => false,
        }
    }

    pub fn contains_random(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e, Expr::Random(_)));
        found
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Num(_) | Expr::Bool(_) | Expr::Time | Expr::Var(_) | Expr::At { .. } => {}
            Expr::Elem { index, .. } => index.iter().for_each(|e| e.visit(f)),
            Expr::Neg(e) | Expr::Not(e) | Expr::Random(e) => e.visit(f),
            Expr::Bin(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Cond(c, a, b) => {
                c.visit(f);
                a.visit(f);
                b.visit(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|e| e.visit(f)),
        }
    }

    /// Evaluates without a random source; `random` yields an error.
    pub fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        self.eval_inner(env, &mut None)
    }

    /// Evaluates with a random source available for `random(b)`.
    pub fn eval_with(&self, env: &Env, rng: &mut dyn RngCore) -> Result<f64, EvalError> {
        self.eval_inner(env, &mut Some(rng))
    }

    /// Typed evaluation.
    pub fn value(&self, env: &Env, rng: Option<&mut dyn RngCore>) -> Result<Value, EvalError> {
        let mut rng = rng;
        let x = self.eval_inner(env, &mut rng)?;
        Ok(if self.is_predicate() {
            Value::Bool(x != 0.0)
        } else {
            Value::Num(x)
        })
    }

    pub fn holds(&self, env: &Env) -> Result<bool, EvalError> {
        Ok(self.eval(env)? != 0.0)
    }

    /// The variable cell an assignable expression denotes, if any.
    pub fn cell(&self, env: &Env) -> Result<Option<Slot>, EvalError> {
        match self {
            Expr::Var(s) => Ok(Some(*s)),
            Expr::Elem { base, dims, index } => {
                let mut offset = 0usize;
                for (dim, ix) in dims.iter().zip(index) {
                    let i = ix.eval(env)?.round() as i64;
                    if i < 0 || i as usize >= *dim {
                        return Err(EvalError::IndexOutOfBounds { index: i, len: *dim });
                    }
                    offset = offset * dim + i as usize;
                }
                Ok(Some(base + offset))
            }
            _ => Ok(None),
        }
    }

    fn eval_inner(&self, env: &Env, rng: &mut Option<&mut dyn RngCore>) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Num(x) => *x,
            Expr::Bool(b) => truth(*b),
            Expr::Time => env.time,
            Expr::Var(slot) => env.vars[*slot],
            Expr::Elem { base, dims, index } => {
                let mut offset = 0usize;
                for (dim, ix) in dims.iter().zip(index) {
                    let i = ix.eval_inner(env, rng)?;
                    let i = i.round() as i64;
                    if i < 0 || i as usize >= *dim {
                        return Err(EvalError::IndexOutOfBounds { index: i, len: *dim });
                    }
                    offset = offset * dim + i as usize;
                }
                env.vars[base + offset]
            }
            Expr::Neg(e) => -e.eval_inner(env, rng)?,
            Expr::Not(e) => truth(e.eval_inner(env, rng)? == 0.0),
            Expr::Bin(op, a, b) => {
                let x = a.eval_inner(env, rng)?;
                match op {
                    BinOp::And if x == 0.0 => return Ok(0.0),
                    BinOp::Or if x != 0.0 => return Ok(1.0),
                    BinOp::Imply if x == 0.0 => return Ok(1.0),
                    _ => {}
                }
                let y = b.eval_inner(env, rng)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        x / y
                    }
                    BinOp::Mod => {
                        if y == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        x % y
                    }
                    BinOp::Lt => truth(x < y),
                    BinOp::Le => truth(x <= y),
                    BinOp::Gt => truth(x > y),
                    BinOp::Ge => truth(x >= y),
                    BinOp::Eq => truth(x == y),
                    BinOp::Ne => truth(x != y),
                    BinOp::And | BinOp::Or | BinOp::Imply => truth(y != 0.0),
                }
            }
            Expr::Cond(c, a, b) => {
                if c.eval_inner(env, rng)? != 0.0 {
                    a.eval_inner(env, rng)?
                } else {
                    b.eval_inner(env, rng)?
                }
            }
            Expr::Call(f, args) => {
                let mut vals = [0.0; 2];
                for (v, a) in vals.iter_mut().zip(args) {
                    *v = a.eval_inner(env, rng)?;
                }
                f.apply(&vals[..args.len()])?
            }
            Expr::Random(b) => {
                let bound = b.eval_inner(env, rng)?;
                match rng {
                    Some(r) => bound * r.random::<f64>(),
                    None => return Err(EvalError::RandomOutsideUpdate),
                }
            }
            Expr::At {
                component,
                location,
            } => truth(env.locations[*component] == *location),
        })
    }

    /// Signed, scale-relative satisfaction margin of a predicate:
    /// nonnegative when (approximately) satisfied. Comparisons use
    /// `(rhs - lhs) / max(1, |lhs|, |rhs|)`; connectives use min/max.
    pub fn margin(&self, env: &Env) -> Result<f64, EvalError> {
        self.margin_signed(env, false)
    }

    fn margin_signed(&self, env: &Env, negate: bool) -> Result<f64, EvalError> {
        match self {
            Expr::Not(e) => e.margin_signed(env, !negate),
            Expr::Bin(op, a, b) if op.is_logical() => {
                let (op, a_neg) = match op {
                    BinOp::Imply => (BinOp::Or, !negate),
                    other => (*other, negate),
                };
                let x = a.margin_signed(env, a_neg)?;
                let y = b.margin_signed(env, negate)?;
                let conj = matches!(op, BinOp::And) != negate;
                Ok(if conj { x.min(y) } else { x.max(y) })
            }
            Expr::Bin(op, a, b) if op.is_comparison() => {
                let op = if negate { op.negated() } else { *op };
                let x = a.eval(env)?;
                let y = b.eval(env)?;
                let scale = 1f64.max(x.abs()).max(y.abs());
                Ok(match op {
                    BinOp::Lt | BinOp::Le => (y - x) / scale,
                    BinOp::Gt | BinOp::Ge => (x - y) / scale,
                    BinOp::Eq => -(x - y).abs() / scale,
                    _ => {
                        if x != y {
                            f64::INFINITY
                        } else {
                            f64::NEG_INFINITY
                        }
                    }
                })
            }
            Expr::Cond(c, a, b) => {
                if c.holds(env)? {
                    a.margin_signed(env, negate)
                } else {
                    b.margin_signed(env, negate)
                }
            }
            other => {
                let t = other.holds(env)? != negate;
                Ok(if t { f64::INFINITY } else { f64::NEG_INFINITY })
            }
        }
    }

    /// Like [`Expr::holds`], but accepts comparisons violated by at most
    /// `tol` relative margin.
    pub fn holds_within(&self, env: &Env, tol: f64) -> Result<bool, EvalError> {
        if self.holds(env)? {
            return Ok(true);
        }
        Ok(self.margin(env)? >= -tol)
    }

    /// Window of delays during which the predicate holds when every
    /// comparison is extrapolated linearly through its values at delay 0
    /// (`now`) and at delay `h` (`later`). Disjunctions are approximated by
    /// their convex hull. Returns `None` when the predicate never holds.
    pub fn window(&self, now: &Env, later: &Env, h: f64) -> Result<Option<Window>, EvalError> {
        self.window_signed(now, later, h, false)
    }

    fn window_signed(
        &self,
        now: &Env,
        later: &Env,
        h: f64,
        negate: bool,
    ) -> Result<Option<Window>, EvalError> {
        match self {
            Expr::Not(e) => e.window_signed(now, later, h, !negate),
            Expr::Bin(op, a, b) if op.is_logical() => {
                let (op, a_neg) = match op {
                    BinOp::Imply => (BinOp::Or, !negate),
                    other => (*other, negate),
                };
                let x = a.window_signed(now, later, h, a_neg)?;
                let y = b.window_signed(now, later, h, negate)?;
                let conj = matches!(op, BinOp::And) != negate;
                Ok(if conj {
                    match (x, y) {
                        (Some(x), Some(y)) => x.intersect(y),
                        _ => None,
                    }
                } else {
                    match (x, y) {
                        (Some(x), Some(y)) => Some(x.hull(y)),
                        (x, None) => x,
                        (None, y) => y,
                    }
                })
            }
            Expr::Bin(op, a, b) if op.is_comparison() => {
                let op = if negate { op.negated() } else { *op };
                let d0 = b.eval(now)? - a.eval(now)?;
                let d1 = b.eval(later)? - a.eval(later)?;
                let slope = (d1 - d0) / h;
                Ok(comparison_window(op, d0, slope))
            }
            Expr::Cond(c, a, b) => {
                if c.holds(now)? {
                    a.window_signed(now, later, h, negate)
                } else {
                    b.window_signed(now, later, h, negate)
                }
            }
            other => Ok((other.holds(now)? != negate).then_some(Window::ALWAYS)),
        }
    }
}

/// Satisfaction window of `rhs - lhs = d0 + slope * t` against `op`.
fn comparison_window(op: BinOp, d0: f64, slope: f64) -> Option<Window> {
    // Normalize to "g(t) = sign * (d0 + slope t) >= 0" (or > 0).
    let (g0, gs, strict) = match op {
        BinOp::Le => (d0, slope, false),
        BinOp::Lt => (d0, slope, true),
        BinOp::Ge => (-d0, -slope, false),
        BinOp::Gt => (-d0, -slope, true),
        BinOp::Eq => {
            return if d0 == 0.0 {
                Some(if slope == 0.0 {
                    Window::ALWAYS
                } else {
                    Window { lo: 0.0, hi: 0.0 }
                })
            } else if slope != 0.0 && -d0 / slope > 0.0 {
                let t = -d0 / slope;
                Some(Window { lo: t, hi: t })
            } else {
                None
            };
        }
        _ => {
            return if d0 != 0.0 || slope != 0.0 {
                Some(Window::ALWAYS)
            } else {
                None
            };
        }
    };
    let sat_now = if strict { g0 > 0.0 } else { g0 >= 0.0 };
    if gs == 0.0 || !gs.is_finite() {
        return sat_now.then_some(Window::ALWAYS);
    }
    let root = -g0 / gs;
    if gs > 0.0 {
        Some(Window {
            lo: if sat_now { 0.0 } else { root.max(0.0) },
            hi: f64::INFINITY,
        })
    } else if sat_now {
        Some(Window {
            lo: 0.0,
            hi: root.max(0.0),
        })
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn env(vars: &[f64]) -> Env<'_> {
        Env {
            vars,
            locations: &[],
            time: 0.0,
        }
    }

    fn parabola() -> Expr {
        // -9.81/2*d*d + 5.9*d + 10 with d in slot 0
        let d = || Expr::Var(0);
        let a = Expr::bin(
            BinOp::Mul,
            Expr::bin(
                BinOp::Mul,
                Expr::bin(BinOp::Div, Expr::Neg(Box::new(Expr::Num(9.81))), Expr::Num(2.0)),
                d(),
            ),
            d(),
        );
        let b = Expr::bin(BinOp::Mul, Expr::Num(5.9), d());
        Expr::bin(BinOp::Add, Expr::bin(BinOp::Add, a, b), Expr::Num(10.0))
    }

    #[test]
    fn parabola_constant_term() {
        assert_eq!(parabola().eval(&env(&[0.0])).unwrap(), 10.0);
    }

    #[test]
    fn parabola_hits_floor_near_2_15() {
        let y = parabola().eval(&env(&[2.15])).unwrap();
        assert!(y.abs() < 0.05, "y(2.15) = {y}");
    }

    #[test]
    fn builtin_identities() {
        let e = Expr::bin(
            BinOp::Add,
            Expr::Call(Builtin::Sqrt, vec![Expr::Num(4.0)]),
            Expr::Call(Builtin::Exp, vec![Expr::Num(0.0)]),
        );
        assert_eq!(e.eval(&env(&[])).unwrap(), 3.0);
        assert_eq!(e.value(&env(&[]), None).unwrap(), Value::Num(3.0));
    }

    #[test]
    fn domain_errors() {
        let log = Expr::Call(Builtin::Log, vec![Expr::Num(-1.0)]);
        assert!(matches!(log.eval(&env(&[])), Err(EvalError::Domain { func: "log", .. })));
        let sqrt = Expr::Call(Builtin::Sqrt, vec![Expr::Num(-4.0)]);
        assert!(matches!(sqrt.eval(&env(&[])), Err(EvalError::Domain { func: "sqrt", .. })));
        let div = Expr::bin(BinOp::Div, Expr::Num(1.0), Expr::Var(0));
        assert_eq!(div.eval(&env(&[0.0])), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn random_needs_a_stream() {
        let r = Expr::Random(Box::new(Expr::Num(3.0)));
        assert_eq!(r.eval(&env(&[])), Err(EvalError::RandomOutsideUpdate));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let x = r.eval_with(&env(&[]), &mut rng).unwrap();
            assert!((0.0..3.0).contains(&x));
        }
    }

    #[test]
    fn array_index_bounds() {
        let e = Expr::Elem {
            base: 1,
            dims: vec![2, 2],
            index: vec![Expr::Num(1.0), Expr::Var(0)],
        };
        let vars = [0.0, 10.0, 11.0, 12.0, 13.0];
        assert_eq!(e.eval(&env(&vars)).unwrap(), 12.0);
        let vars = [2.0, 10.0, 11.0, 12.0, 13.0];
        assert!(matches!(
            e.eval(&env(&vars)),
            Err(EvalError::IndexOutOfBounds { index: 2, len: 2 })
        ));
    }

    #[test]
    fn comparisons_are_predicates() {
        let e = Expr::bin(BinOp::Le, Expr::Var(0), Expr::Num(4.0));
        assert_eq!(e.value(&env(&[3.0]), None).unwrap(), Value::Bool(true));
        assert_eq!(e.value(&env(&[5.0]), None).unwrap(), Value::Bool(false));
    }

    #[test]
    fn margins_follow_connectives() {
        let le = Expr::bin(BinOp::Le, Expr::Var(0), Expr::Num(0.0));
        let lt = Expr::bin(BinOp::Lt, Expr::Var(1), Expr::Num(0.0));
        let both = Expr::bin(BinOp::And, le.clone(), lt);
        assert!(both.margin(&env(&[1e-12, -1.0])).unwrap() < 0.0);
        assert!(both.holds_within(&env(&[1e-12, -1.0]), 1e-9).unwrap());
        assert!(!both.holds_within(&env(&[1e-3, -1.0]), 1e-9).unwrap());
        let not = Expr::Not(Box::new(le));
        assert!(not.margin(&env(&[2.0, 0.0])).unwrap() > 0.0);
    }

    #[test]
    fn linear_windows() {
        // x <= 4 with x = 1 now and 1.5 after h = 0.5: rate 1, exits at 3.
        let inv = Expr::bin(BinOp::Le, Expr::Var(0), Expr::Num(4.0));
        let w = inv.window(&env(&[1.0]), &env(&[1.5]), 0.5).unwrap().unwrap();
        assert_eq!(w, Window { lo: 0.0, hi: 3.0 });
        // x >= 2 entered after one time unit.
        let g = Expr::bin(BinOp::Ge, Expr::Var(0), Expr::Num(2.0));
        let w = g.window(&env(&[1.0]), &env(&[1.5]), 0.5).unwrap().unwrap();
        assert_eq!(w, Window { lo: 1.0, hi: f64::INFINITY });
        // both: [1, 3]
        let w = Expr::bin(BinOp::And, g.clone(), inv)
            .window(&env(&[1.0]), &env(&[1.5]), 0.5)
            .unwrap()
            .unwrap();
        assert_eq!(w, Window { lo: 1.0, hi: 3.0 });
        // a receding guard never holds
        assert!(g.window(&env(&[1.0]), &env(&[0.5]), 0.5).unwrap().is_none());
    }
}
