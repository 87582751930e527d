//! Syntax trees for model files and queries, with a pretty printer whose
//! output parses back to the same tree.

use std::fmt::{self, Display, Formatter, Write as _};

use crate::expr::BinOp;

use super::Pos;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ast {
    Num(f64),
    Bool(bool),
    Name(String),
    Index(String, Vec<Ast>),
    Call(String, Vec<Ast>),
    /// `Room(0).Init`, `Heater.On`, `Heater.x`
    Member(Box<Ast>, String),
    Unary(UnaryOp, Box<Ast>),
    Binary(BinOp, Box<Ast>, Box<Ast>),
    Cond(Box<Ast>, Box<Ast>, Box<Ast>),
}

impl Ast {
    pub fn bin(op: BinOp, a: Ast, b: Ast) -> Ast {
        Ast::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn name(s: &str) -> Ast {
        Ast::Name(s.to_string())
    }

    /// Precedence of the outermost operator; atoms bind tightest.
    fn precedence(&self) -> u8 {
        match self {
            Ast::Cond(..) => 0,
            Ast::Binary(op, ..) => op.precedence(),
            Ast::Unary(..) => 8,
            _ => 9,
        }
    }

    fn fmt_operand(&self, f: &mut Formatter<'_>, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

fn comma_list<T: Display>(f: &mut Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl Display for Ast {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Ast::Num(x) => write!(f, "{x}"),
            Ast::Bool(b) => write!(f, "{b}"),
            Ast::Name(s) => f.write_str(s),
            Ast::Index(s, ix) => {
                f.write_str(s)?;
                for i in ix {
                    write!(f, "[{i}]")?;
                }
                Ok(())
            }
            Ast::Call(s, args) => {
                write!(f, "{s}(")?;
                comma_list(f, args)?;
                f.write_str(")")
            }
            Ast::Member(base, m) => write!(f, "{base}.{m}"),
            Ast::Unary(op, e) => {
                f.write_str(match op {
                    UnaryOp::Neg => "-",
                    UnaryOp::Not => "!",
                })?;
                e.fmt_operand(f, e.precedence() < 8)
            }
            Ast::Binary(op, a, b) => {
                let p = op.precedence();
                a.fmt_operand(f, a.precedence() < p)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_operand(f, b.precedence() <= p)
            }
            Ast::Cond(c, a, b) => {
                c.fmt_operand(f, c.precedence() == 0)?;
                f.write_str(" ? ")?;
                a.fmt_operand(f, a.precedence() == 0)?;
                write!(f, " : {b}")
            }
        }
    }
}

/// Array initializer: a scalar or a nested brace list.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Scalar(Ast),
    List(Vec<Init>),
}

impl Display for Init {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Init::Scalar(a) => write!(f, "{a}"),
            Init::List(xs) => {
                f.write_str("{")?;
                comma_list(f, xs)?;
                f.write_str("}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarType {
    Int,
    Double,
    Clock,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decl {
    Const {
        name: String,
        dims: Vec<usize>,
        init: Init,
        pos: Pos,
    },
    Var {
        ty: VarType,
        name: String,
        dims: Vec<usize>,
        init: Option<Init>,
        pos: Pos,
    },
    Chan {
        name: String,
        dims: Vec<usize>,
        urgent: bool,
        pos: Pos,
    },
    Func {
        name: String,
        params: Vec<String>,
        body: Ast,
        pos: Pos,
    },
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Const { name, .. }
            | Decl::Var { name, .. }
            | Decl::Chan { name, .. }
            | Decl::Func { name, .. } => name,
        }
    }

    pub fn pos(&self) -> Pos {
        match self {
            Decl::Const { pos, .. }
            | Decl::Var { pos, .. }
            | Decl::Chan { pos, .. }
            | Decl::Func { pos, .. } => *pos,
        }
    }
}

fn dims_str(dims: &[usize]) -> String {
    dims.iter().map(|d| format!("[{d}]")).collect()
}

impl Display for Decl {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Decl::Const { name, dims, init, .. } => {
                write!(f, "const {name}{} = {init};", dims_str(dims))
            }
            Decl::Var {
                ty, name, dims, init, ..
            } => {
                let kw = match ty {
                    VarType::Int => "int",
                    VarType::Double => "double",
                    VarType::Clock => "clock",
                };
                write!(f, "{kw} {name}{}", dims_str(dims))?;
                if let Some(i) = init {
                    write!(f, " = {i}")?;
                }
                f.write_str(";")
            }
            Decl::Chan {
                name, dims, urgent, ..
            } => {
                if *urgent {
                    f.write_str("urgent ")?;
                }
                write!(f, "broadcast chan {name}{};", dims_str(dims))
            }
            Decl::Func {
                name, params, body, ..
            } => {
                write!(f, "fn {name}({}) = {body};", params.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocationAst {
    pub name: String,
    pub initial: bool,
    pub invariant: Option<Ast>,
    pub rates: Vec<(Ast, Ast)>,
    pub exit_rate: Option<Ast>,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Send,
    Receive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncAst {
    pub channel: Ast,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchAst {
    /// `None` for the single-target edge form.
    pub weight: Option<Ast>,
    pub target: String,
    pub updates: Vec<(Ast, Ast)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeAst {
    pub source: String,
    pub guard: Option<Ast>,
    pub sync: Option<SyncAst>,
    pub urgent: bool,
    pub branches: Vec<BranchAst>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub name: String,
    pub params: Vec<String>,
    pub locals: Vec<Decl>,
    pub locations: Vec<LocationAst>,
    pub edges: Vec<EdgeAst>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub template: String,
    pub args: Vec<Ast>,
    pub pos: Pos,
}

impl Instance {
    /// Display name of the component, e.g. `Heater` or `Room(0)`.
    pub fn display_name(&self) -> String {
        if self.args.is_empty() {
            self.template.clone()
        } else {
            let args: Vec<String> = self.args.iter().map(ToString::to_string).collect();
            format!("{}({})", self.template, args.join(", "))
        }
    }
}

/// A parsed model file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelDocument {
    pub decls: Vec<Decl>,
    pub templates: Vec<Template>,
    pub system: Vec<Instance>,
}

fn write_updates(out: &mut String, ups: &[(Ast, Ast)], indent: &str) {
    if ups.is_empty() {
        return;
    }
    let body: Vec<String> = ups.iter().map(|(l, r)| format!("{l} = {r}")).collect();
    let _ = writeln!(out, "{indent}update {};", body.join(", "));
}

impl Display for ModelDocument {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for d in &self.decls {
            let _ = writeln!(out, "{d}");
        }
        for t in &self.templates {
            let _ = writeln!(out, "\ntemplate {}({}) {{", t.name, t.params.join(", "));
            for d in &t.locals {
                let _ = writeln!(out, "  {d}");
            }
            for l in &t.locations {
                let _ = write!(out, "  location {}", l.name);
                if l.initial {
                    out.push_str(" initial");
                }
                out.push_str(" {\n");
                if let Some(inv) = &l.invariant {
                    let _ = writeln!(out, "    invariant {inv};");
                }
                for (v, r) in &l.rates {
                    let _ = writeln!(out, "    {v}' = {r};");
                }
                if let Some(r) = &l.exit_rate {
                    let _ = writeln!(out, "    rate {r};");
                }
                out.push_str("  }\n");
            }
            for e in &t.edges {
                let single = e.branches.len() == 1 && e.branches[0].weight.is_none();
                if single {
                    let _ = writeln!(out, "  edge {} -> {} {{", e.source, e.branches[0].target);
                } else {
                    let _ = writeln!(out, "  edge {} {{", e.source);
                }
                if e.urgent {
                    out.push_str("    urgent;\n");
                }
                if let Some(g) = &e.guard {
                    let _ = writeln!(out, "    guard {g};");
                }
                if let Some(s) = &e.sync {
                    let d = match s.direction {
                        Direction::Send => '!',
                        Direction::Receive => '?',
                    };
                    let _ = writeln!(out, "    sync {}{d};", s.channel);
                }
                if single {
                    write_updates(&mut out, &e.branches[0].updates, "    ");
                } else {
                    for b in &e.branches {
                        let w = b.weight.clone().unwrap_or(Ast::Num(1.0));
                        let _ = writeln!(out, "    branch {w} -> {} {{", b.target);
                        write_updates(&mut out, &b.updates, "      ");
                        out.push_str("    }\n");
                    }
                }
                out.push_str("  }\n");
            }
            out.push_str("}\n");
        }
        if !self.system.is_empty() {
            let names: Vec<String> = self
                .system
                .iter()
                .map(|i| format!("{}({})", i.template, join(&i.args)))
                .collect();
            let _ = writeln!(out, "\nsystem {};", names.join(", "));
        }
        f.write_str(&out)
    }
}

fn join(xs: &[Ast]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

// ---------------------------------------------------------------- queries

#[derive(Debug, Clone, PartialEq)]
pub enum BoundAst {
    /// `[<=T]`
    Time(f64),
    /// `[#<=K]`
    Steps(u64),
    /// `[x<=C]`
    Cost(Ast, f64),
}

impl Display for BoundAst {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            BoundAst::Time(t) => write!(f, "<={t}"),
            BoundAst::Steps(k) => write!(f, "#<={k}"),
            BoundAst::Cost(x, c) => write!(f, "{x}<={c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathAst {
    Atom(Ast),
    Not(Box<PathAst>),
    And(Box<PathAst>, Box<PathAst>),
    Or(Box<PathAst>, Box<PathAst>),
    Eventually(Box<PathAst>),
    Always(Box<PathAst>),
    Until(Box<PathAst>, Box<PathAst>, f64),
}

impl PathAst {
    pub fn is_temporal(&self) -> bool {
        match self {
            PathAst::Atom(_) => false,
            PathAst::Not(p) => p.is_temporal(),
            PathAst::And(a, b) | PathAst::Or(a, b) => a.is_temporal() || b.is_temporal(),
            PathAst::Eventually(_) | PathAst::Always(_) | PathAst::Until(..) => true,
        }
    }

    /// Folds temporal-free subformulas into a single state predicate.
    pub fn normalize(self) -> PathAst {
        match self {
            PathAst::Atom(a) => PathAst::Atom(a),
            PathAst::Not(p) => match p.normalize() {
                PathAst::Atom(a) => PathAst::Atom(Ast::Unary(UnaryOp::Not, Box::new(a))),
                p => PathAst::Not(Box::new(p)),
            },
            PathAst::And(a, b) => match (a.normalize(), b.normalize()) {
                (PathAst::Atom(x), PathAst::Atom(y)) => PathAst::Atom(Ast::bin(BinOp::And, x, y)),
                (x, y) => PathAst::And(Box::new(x), Box::new(y)),
            },
            PathAst::Or(a, b) => match (a.normalize(), b.normalize()) {
                (PathAst::Atom(x), PathAst::Atom(y)) => PathAst::Atom(Ast::bin(BinOp::Or, x, y)),
                (x, y) => PathAst::Or(Box::new(x), Box::new(y)),
            },
            PathAst::Eventually(p) => PathAst::Eventually(Box::new(p.normalize())),
            PathAst::Always(p) => PathAst::Always(Box::new(p.normalize())),
            PathAst::Until(a, b, t) => {
                PathAst::Until(Box::new(a.normalize()), Box::new(b.normalize()), t)
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            PathAst::Eventually(_) | PathAst::Always(_) => 0,
            PathAst::Or(..) => 2,
            PathAst::And(..) => 3,
            PathAst::Until(..) => 4,
            PathAst::Not(_) => 5,
            PathAst::Atom(a) => match a {
                Ast::Cond(..) => 0,
                Ast::Binary(BinOp::Imply, ..) => 0,
                Ast::Binary(BinOp::Or, ..) => 2,
                Ast::Binary(BinOp::And, ..) => 3,
                _ => 6,
            },
        }
    }

    fn fmt_operand(&self, f: &mut Formatter<'_>, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl Display for PathAst {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            PathAst::Atom(a) => write!(f, "{a}"),
            PathAst::Eventually(p) => write!(f, "<> {p}"),
            PathAst::Always(p) => write!(f, "[] {p}"),
            PathAst::Not(p) => {
                f.write_str("!")?;
                p.fmt_operand(f, p.precedence() < 5)
            }
            PathAst::And(a, b) | PathAst::Or(a, b) => {
                let (p, sym) = if matches!(self, PathAst::And(..)) {
                    (3, "&&")
                } else {
                    (2, "||")
                };
                a.fmt_operand(f, a.precedence() < p)?;
                write!(f, " {sym} ")?;
                b.fmt_operand(f, b.precedence() <= p)
            }
            PathAst::Until(a, b, t) => {
                a.fmt_operand(f, a.precedence() <= 4)?;
                write!(f, " U[<={t}] ")?;
                b.fmt_operand(f, b.precedence() < 4)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Ge,
    Le,
}

impl Display for Relation {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Ge => ">=",
            Relation::Le => "<=",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Query {
    Simulate {
        runs: u64,
        bound: BoundAst,
        observables: Vec<Ast>,
    },
    ProbEstimate {
        bound: BoundAst,
        formula: PathAst,
    },
    ProbHypothesis {
        bound: BoundAst,
        formula: PathAst,
        relation: Relation,
        threshold: f64,
    },
    ProbCompare {
        left: (BoundAst, PathAst),
        relation: Relation,
        right: (BoundAst, PathAst),
    },
    ValueEstimate {
        bound: BoundAst,
        runs: u64,
        extremum: Extremum,
        expr: Ast,
    },
    /// Gaps between consecutive detections of a peak pattern, measured
    /// on an auxiliary clock.
    MonitorDistance {
        bound: BoundAst,
        runs: u64,
        clock: String,
        formula: PathAst,
    },
}

impl Display for Query {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Query::Simulate {
                runs,
                bound,
                observables,
            } => {
                write!(f, "simulate {runs} [{bound}] {{")?;
                comma_list(f, observables)?;
                f.write_str("}")
            }
            Query::ProbEstimate { bound, formula } => write!(f, "Pr[{bound}]({formula})"),
            Query::ProbHypothesis {
                bound,
                formula,
                relation,
                threshold,
            } => write!(f, "Pr[{bound}]({formula}) {relation} {threshold}"),
            Query::ProbCompare {
                left,
                relation,
                right,
            } => write!(
                f,
                "Pr[{}]({}) {relation} Pr[{}]({})",
                left.0, left.1, right.0, right.1
            ),
            Query::ValueEstimate {
                bound,
                runs,
                extremum,
                expr,
            } => {
                let ext = match extremum {
                    Extremum::Max => "max",
                    Extremum::Min => "min",
                };
                write!(f, "E[{bound}; {runs}]({ext}: {expr})")
            }
            Query::MonitorDistance {
                bound,
                runs,
                clock,
                formula,
            } => write!(f, "distance[{bound}; {runs}]({clock}: {formula})"),
        }
    }
}
