//! Path formula monitoring over sampled runs.
//!
//! Each atom is observed through its satisfaction margin at every sample;
//! between samples the margin is interpolated linearly, which is exact for
//! Euler trajectories. The set of times at which a subformula holds is a
//! union of closed intervals, computed bottom-up.

use std::ops::ControlFlow;

use thiserror::Error;

use crate::engine::{Observer, Run, Termination};
use crate::expr::{Env, EvalError, Expr};
use crate::model::State;
use crate::query::{Formula, Observable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonitorError {
    #[error("atom `{0}` refers to expressions that were not observed")]
    UnknownAtom(String),
    #[error("`{0}` is only allowed at the top of a path formula")]
    NestedTemporal(&'static str),
    #[error("until bound must be finite and nonnegative, got {0}")]
    BadBound(f64),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    Satisfied(f64),
    Violated(f64),
    /// The run stopped before the formula could be decided.
    Inconclusive,
}

impl Verdict {
    pub fn is_satisfied(self) -> bool {
        matches!(self, Verdict::Satisfied(_))
    }
}

/// Closed time interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Sorted, disjoint closed intervals.
pub type IntervalSet = Vec<Interval>;

fn push_merge(out: &mut IntervalSet, iv: Interval) {
    match out.last_mut() {
        Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
        _ => out.push(iv),
    }
}

fn normalize(mut v: Vec<Interval>) -> IntervalSet {
    v.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut out = Vec::with_capacity(v.len());
    for iv in v {
        push_merge(&mut out, iv);
    }
    out
}

pub fn union(a: &[Interval], b: &[Interval]) -> IntervalSet {
    normalize(a.iter().chain(b).copied().collect())
}

pub fn intersection(a: &[Interval], b: &[Interval]) -> IntervalSet {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let lo = a[i].lo.max(b[j].lo);
        let hi = a[i].hi.min(b[j].hi);
        if lo <= hi {
            out.push(Interval { lo, hi });
        }
        if a[i].hi < b[j].hi {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Closure of the complement within `[start, end]`.
pub fn complement(a: &[Interval], start: f64, end: f64) -> IntervalSet {
    let mut out = Vec::new();
    let mut from = start;
    for iv in a {
        if iv.lo > from {
            out.push(Interval { lo: from, hi: iv.lo });
        }
        from = from.max(iv.hi);
    }
    if from < end {
        out.push(Interval { lo: from, hi: end });
    }
    out
}

/// Times `t` such that `b` holds at some `t' in [t, t + bound]` and `a`
/// holds throughout `[t, t']`.
pub fn until(a: &[Interval], b: &[Interval], bound: f64) -> IntervalSet {
    let mut parts: Vec<Interval> = b.to_vec();
    let mut j0 = 0;
    for i in a {
        while j0 < b.len() && b[j0].hi < i.lo {
            j0 += 1;
        }
        for j in &b[j0..] {
            if j.lo > i.hi {
                break;
            }
            let k_lo = i.lo.max(j.lo);
            let k_hi = i.hi.min(j.hi);
            parts.push(Interval {
                lo: i.lo.max(k_lo - bound),
                hi: k_hi,
            });
        }
    }
    normalize(parts)
}

/// Where a sampled, linearly interpolated margin is positive.
pub fn positive(times: &[f64], margins: &[f64]) -> IntervalSet {
    let mut out = Vec::new();
    let Some(&m0) = margins.first() else {
        return out;
    };
    let mut open = (m0 > 0.0).then_some(times[0]);
    for i in 1..times.len() {
        let (t0, t1, a, b) = (times[i - 1], times[i], margins[i - 1], margins[i]);
        let cross = if t1 > t0 {
            t0 + (t1 - t0) * (a / (a - b))
        } else {
            t0
        };
        if a > 0.0 && b <= 0.0 {
            let s = open.take().unwrap_or(t0);
            push_merge(&mut out, Interval { lo: s, hi: cross });
        } else if a <= 0.0 && b > 0.0 {
            open = Some(cross);
        }
    }
    if let (Some(s), Some(&end)) = (open, times.last()) {
        push_merge(&mut out, Interval { lo: s, hi: end });
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Atom { index: usize, negated: bool },
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Until(Box<Node>, Box<Node>, f64),
    /// Complement of an until formula.
    NotUntil(Box<Node>),
}

#[derive(Debug, Clone, PartialEq)]
enum Top {
    Eventually(Node),
    /// Holds the negated body: any witness is a violation.
    Always(Node),
    Now(Node),
}

/// A compiled path formula: a list of atoms and a tree over them.
#[derive(Debug, Clone, PartialEq)]
pub struct PathFormula {
    atoms: Vec<Expr>,
    top: Top,
}

impl PathFormula {
    pub fn compile(f: &Formula) -> Result<PathFormula, MonitorError> {
        let mut atoms = Vec::new();
        let top = match f {
            Formula::Eventually(g) => Top::Eventually(nnf(g, false, &mut atoms)?),
            Formula::Always(g) => Top::Always(nnf(g, true, &mut atoms)?),
            g => Top::Now(nnf(g, false, &mut atoms)?),
        };
        Ok(PathFormula { atoms, top })
    }

    /// A pattern whose matches are the starts of its satisfaction
    /// intervals. A leading `true U[<=b]` is dropped.
    pub fn pattern(f: &Formula) -> Result<PathFormula, MonitorError> {
        let mut f = f;
        while let Formula::Until(a, b, _) = f {
            if **a == Formula::State(Expr::Bool(true)) {
                f = b;
            } else {
                break;
            }
        }
        match f {
            Formula::Eventually(_) => Err(MonitorError::NestedTemporal("<>")),
            Formula::Always(_) => Err(MonitorError::NestedTemporal("[]")),
            g => PathFormula::compile(g),
        }
    }

    pub fn atoms(&self) -> &[Expr] {
        &self.atoms
    }

    /// Evaluates the formula on a trace.
    pub fn check(&self, trace: &Trace) -> Verdict {
        let end = trace.times.last().copied().unwrap_or(0.0);
        match &self.top {
            Top::Eventually(n) => match self.sat(n, trace).first() {
                Some(iv) => Verdict::Satisfied(iv.lo),
                None if trace.complete => Verdict::Violated(end),
                None => Verdict::Inconclusive,
            },
            Top::Always(n) => match self.sat(n, trace).first() {
                Some(iv) => Verdict::Violated(iv.lo),
                None if trace.complete => Verdict::Satisfied(end),
                None => Verdict::Inconclusive,
            },
            Top::Now(n) => {
                let start = trace.times.first().copied().unwrap_or(0.0);
                match self.sat(n, trace).first() {
                    Some(iv) if iv.lo <= start => Verdict::Satisfied(start),
                    _ if trace.times.is_empty() => Verdict::Inconclusive,
                    _ => Verdict::Violated(start),
                }
            }
        }
    }

    /// Times at which the formula body holds (for `[]`, the negated body).
    pub fn satisfaction(&self, trace: &Trace) -> IntervalSet {
        match &self.top {
            Top::Eventually(n) | Top::Always(n) | Top::Now(n) => self.sat(n, trace),
        }
    }

    fn sat(&self, n: &Node, trace: &Trace) -> IntervalSet {
        match n {
            Node::Atom { index, negated } => {
                let m = &trace.margins[*index];
                if *negated {
                    let neg: Vec<f64> = m.iter().map(|x| -x).collect();
                    positive(&trace.times, &neg)
                } else {
                    positive(&trace.times, m)
                }
            }
            Node::And(a, b) => intersection(&self.sat(a, trace), &self.sat(b, trace)),
            Node::Or(a, b) => union(&self.sat(a, trace), &self.sat(b, trace)),
            Node::Until(a, b, bound) => until(&self.sat(a, trace), &self.sat(b, trace), *bound),
            Node::NotUntil(u) => {
                let start = trace.times.first().copied().unwrap_or(0.0);
                let end = trace.times.last().copied().unwrap_or(0.0);
                complement(&self.sat(u, trace), start, end)
            }
        }
    }

    /// Whether a single sample already decides the formula.
    fn decided_by(&self, margins: &[f64]) -> bool {
        match &self.top {
            Top::Eventually(n) | Top::Always(n) => holds_at(n, margins).unwrap_or(false),
            Top::Now(n) => holds_at(n, margins).is_some(),
        }
    }

    /// Compiles the formula and evaluates it on a recorded run whose
    /// columns must cover every atom.
    pub fn check_run(&self, run: &Run) -> Result<Verdict, MonitorError> {
        Ok(self.check(&self.trace_of(run)?))
    }

    /// Margins of the atoms along a recorded run.
    pub fn trace_of(&self, run: &Run) -> Result<Trace, MonitorError> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| substitute(a, &run.columns).ok_or_else(|| MonitorError::UnknownAtom(format!("{a:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let mut trace = Trace::new(atoms.len());
        for (t, row) in run.times.iter().zip(&run.values) {
            let env = Env {
                vars: row,
                locations: &[],
                time: *t,
            };
            trace.times.push(*t);
            for (k, a) in atoms.iter().enumerate() {
                trace.margins[k].push(atom_margin(a, &env)?);
            }
        }
        trace.complete = run.termination == Termination::Bound;
        Ok(trace)
    }
}

/// Pointwise truth of an until-free node; `None` for until formulas.
fn holds_at(n: &Node, margins: &[f64]) -> Option<bool> {
    match n {
        Node::Atom { index, negated } => {
            let m = margins[*index];
            Some(if *negated { m < 0.0 } else { m > 0.0 })
        }
        Node::And(a, b) => Some(holds_at(a, margins)? && holds_at(b, margins)?),
        Node::Or(a, b) => Some(holds_at(a, margins)? || holds_at(b, margins)?),
        Node::Until(..) | Node::NotUntil(_) => None,
    }
}

fn nnf(f: &Formula, neg: bool, atoms: &mut Vec<Expr>) -> Result<Node, MonitorError> {
    Ok(match f {
        Formula::State(e) => {
            let index = match atoms.iter().position(|a| a == e) {
                Some(i) => i,
                None => {
                    atoms.push(e.clone());
                    atoms.len() - 1
                }
            };
            Node::Atom {
                index,
                negated: neg,
            }
        }
        Formula::Not(g) => nnf(g, !neg, atoms)?,
        Formula::And(a, b) | Formula::Or(a, b) => {
            let x = Box::new(nnf(a, neg, atoms)?);
            let y = Box::new(nnf(b, neg, atoms)?);
            if matches!(f, Formula::And(..)) != neg {
                Node::And(x, y)
            } else {
                Node::Or(x, y)
            }
        }
        Formula::Until(a, b, bound) => {
            if !(bound.is_finite() && *bound >= 0.0) {
                return Err(MonitorError::BadBound(*bound));
            }
            let u = Node::Until(
                Box::new(nnf(a, false, atoms)?),
                Box::new(nnf(b, false, atoms)?),
                *bound,
            );
            if neg {
                Node::NotUntil(Box::new(u))
            } else {
                u
            }
        }
        Formula::Eventually(_) => return Err(MonitorError::NestedTemporal("<>")),
        Formula::Always(_) => return Err(MonitorError::NestedTemporal("[]")),
    })
}

/// Rewrites `e` over the columns of a run: column `k` becomes variable `k`.
fn substitute(e: &Expr, cols: &[Observable]) -> Option<Expr> {
    if let Some(k) = cols.iter().position(|c| &c.expr == e) {
        return Some(Expr::Var(k));
    }
    Some(match e {
        Expr::Num(_) | Expr::Bool(_) | Expr::Time => e.clone(),
        Expr::Var(_) | Expr::Elem { .. } | Expr::At { .. } | Expr::Random(_) => return None,
        Expr::Neg(a) => Expr::Neg(Box::new(substitute(a, cols)?)),
        Expr::Not(a) => Expr::Not(Box::new(substitute(a, cols)?)),
        Expr::Bin(op, a, b) => Expr::bin(*op, substitute(a, cols)?, substitute(b, cols)?),
        Expr::Cond(c, a, b) => Expr::Cond(
            Box::new(substitute(c, cols)?),
            Box::new(substitute(a, cols)?),
            Box::new(substitute(b, cols)?),
        ),
        Expr::Call(f, args) => Expr::Call(
            *f,
            args.iter().map(|a| substitute(a, cols)).collect::<Option<_>>()?,
        ),
    })
}

/// Margin of an atom, positive exactly when it holds. Boolean atoms get
/// unit margins; a zero margin takes the sign of the atom's truth value.
fn atom_margin(atom: &Expr, env: &Env) -> Result<f64, EvalError> {
    let m = atom.margin(env)?;
    let m = if m.is_infinite() { m.signum() } else { m };
    Ok(match (atom.holds(env)?, m > 0.0, m < 0.0) {
        (true, true, _) | (false, _, true) => m,
        (true, false, _) => f64::MIN_POSITIVE,
        (false, _, false) => -f64::MIN_POSITIVE,
    })
}

/// Atom margins sampled along a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub times: Vec<f64>,
    /// `margins[atom][sample]`.
    pub margins: Vec<Vec<f64>>,
    /// The run reached its bound.
    pub complete: bool,
}

impl Trace {
    pub fn new(atoms: usize) -> Trace {
        Trace {
            times: Vec::new(),
            margins: vec![Vec::new(); atoms],
            complete: false,
        }
    }

    /// A one-atom trace from explicit samples.
    pub fn from_samples(times: Vec<f64>, margins: Vec<f64>) -> Trace {
        Trace {
            times,
            margins: vec![margins],
            complete: true,
        }
    }
}

/// Observer that builds the trace of a formula online and stops the run
/// as soon as the verdict is known.
pub struct TraceMonitor<'a> {
    formula: &'a PathFormula,
    pub trace: Trace,
    early_stop: bool,
    scratch: Vec<f64>,
}

impl<'a> TraceMonitor<'a> {
    pub fn new(formula: &'a PathFormula) -> TraceMonitor<'a> {
        TraceMonitor {
            formula,
            trace: Trace::new(formula.atoms.len()),
            early_stop: true,
            scratch: vec![0.0; formula.atoms.len()],
        }
    }

    /// Records the full run even when the verdict is known early.
    pub fn without_early_stop(mut self) -> Self {
        self.early_stop = false;
        self
    }

    pub fn verdict(&self) -> Verdict {
        self.formula.check(&self.trace)
    }
}

impl Observer for TraceMonitor<'_> {
    fn sample(&mut self, state: &State) -> Result<ControlFlow<()>, EvalError> {
        let env = state.env();
        for (k, a) in self.formula.atoms.iter().enumerate() {
            self.scratch[k] = atom_margin(a, &env)?;
        }
        self.trace.times.push(state.time);
        for (k, m) in self.scratch.iter().enumerate() {
            self.trace.margins[k].push(*m);
        }
        if self.early_stop && self.formula.decided_by(&self.scratch) {
            return Ok(ControlFlow::Break(()));
        }
        Ok(ControlFlow::Continue(()))
    }
}

/// `signal > hi && true U[<=window] signal <= lo`: a rise above `hi`
/// followed by a fall below `lo` within `window` time units.
pub fn peak_pattern(signal: Expr, hi: f64, lo: f64, window: f64) -> Formula {
    use crate::expr::BinOp;
    Formula::and(
        Formula::State(Expr::bin(BinOp::Gt, signal.clone(), Expr::Num(hi))),
        Formula::until(
            Formula::State(Expr::Bool(true)),
            Formula::State(Expr::bin(BinOp::Le, signal, Expr::Num(lo))),
            window,
        ),
    )
}

/// Gaps between the starts of consecutive matches of `pattern`.
pub fn peak_distance(pattern: &PathFormula, trace: &Trace) -> Vec<f64> {
    let starts: Vec<f64> = pattern.satisfaction(trace).iter().map(|iv| iv.lo).collect();
    starts.windows(2).map(|w| w[1] - w[0]).collect()
}
