//! Name resolution, template instantiation and query binding.

use std::collections::{BTreeSet, HashMap};

use crate::expr::{BinOp, Builtin, Env, Expr, Slot};
use crate::model::{
    compose, Assign, Branch, ChannelId, Declarations, Edge, HybridAutomaton, Location, Network,
    Sync, VarKind,
};
use crate::query::{Bound, BoundQuery, Formula, Observable};

use super::ast::*;
use super::{parse_expr, parse_query, parser, DslError, Pos};

const MAX_INLINE_DEPTH: u32 = 32;

#[derive(Debug, Clone)]
enum Sym {
    Const { dims: Vec<usize>, values: Vec<f64> },
    Var { base: Slot, dims: Vec<usize> },
    Chan { base: ChannelId, dims: Vec<usize> },
    Func { params: Vec<String>, body: Ast },
    /// A function parameter bound to its argument.
    Arg(Expr),
}

#[derive(Debug, Clone)]
struct ComponentSym {
    template: String,
    args: Vec<f64>,
    locations: Vec<String>,
    locals: HashMap<String, Sym>,
}

#[derive(Debug, Clone, Default)]
struct Symbols {
    globals: HashMap<String, Sym>,
    components: Vec<ComponentSym>,
}

type Frame = HashMap<String, Sym>;

fn unresolved(pos: Pos, name: impl Into<String>) -> DslError {
    DslError::UnresolvedIdentifier {
        pos,
        name: name.into(),
    }
}

fn type_err(pos: Pos, msg: impl Into<String>) -> DslError {
    DslError::Type {
        pos,
        msg: msg.into(),
    }
}

fn is_const(e: &Expr) -> bool {
    matches!(e, Expr::Num(_) | Expr::Bool(_))
}

fn const_value(e: &Expr) -> Option<f64> {
    match e {
        Expr::Num(x) => Some(*x),
        Expr::Bool(b) => Some(f64::from(u8::from(*b))),
        _ => None,
    }
}

/// Evaluates an expression whose leaves are all literals.
fn fold(e: Expr, pos: Pos) -> Result<Expr, DslError> {
    let foldable = match &e {
        Expr::Neg(a) | Expr::Not(a) => is_const(a),
        Expr::Bin(_, a, b) => is_const(a) && is_const(b),
        Expr::Cond(c, a, b) => is_const(c) && is_const(a) && is_const(b),
        Expr::Call(_, args) => args.iter().all(is_const),
        _ => false,
    };
    if !foldable {
        return Ok(e);
    }
    let env = Env {
        vars: &[],
        locations: &[],
        time: 0.0,
    };
    let v = e
        .value(&env, None)
        .map_err(|err| type_err(pos, format!("in constant expression: {err}")))?;
    Ok(match v {
        crate::expr::Value::Num(x) => Expr::Num(x),
        crate::expr::Value::Bool(b) => Expr::Bool(b),
    })
}

fn flat_offset(dims: &[usize], ix: &[f64], pos: Pos, name: &str) -> Result<usize, DslError> {
    if ix.len() != dims.len() {
        return Err(type_err(
            pos,
            format!("`{name}` has {} dimension(s), indexed with {}", dims.len(), ix.len()),
        ));
    }
    let mut off = 0;
    for (&d, &i) in dims.iter().zip(ix) {
        if i.fract() != 0.0 || i < 0.0 || i >= d as f64 {
            return Err(type_err(pos, format!("index {i} out of bounds for `{name}`")));
        }
        off = off * d + i as usize;
    }
    Ok(off)
}

fn cell_names(name: &str, dims: &[usize]) -> Vec<String> {
    let mut names = vec![name.to_string()];
    for &d in dims {
        names = names
            .into_iter()
            .flat_map(|n| (0..d).map(move |i| format!("{n}[{i}]")))
            .collect();
    }
    names
}

fn cells(dims: &[usize]) -> usize {
    dims.iter().product()
}

struct Lower<'a> {
    syms: &'a Symbols,
    pos: Pos,
    allow_random: bool,
}

impl Lower<'_> {
    fn lookup<'f>(&self, frames: &[&'f Frame], name: &str) -> Option<&'f Sym> {
        frames.iter().rev().find_map(|f| f.get(name))
    }

    fn expr(&self, a: &Ast, frames: &[&Frame], depth: u32) -> Result<Expr, DslError> {
        let pos = self.pos;
        let e = match a {
            Ast::Num(x) => Expr::Num(*x),
            Ast::Bool(b) => Expr::Bool(*b),
            Ast::Name(n) => match self.lookup(frames, n) {
                Some(Sym::Const { dims, values }) if dims.is_empty() => Expr::Num(values[0]),
                Some(Sym::Var { base, dims }) if dims.is_empty() => Expr::Var(*base),
                Some(Sym::Arg(e)) => e.clone(),
                Some(Sym::Const { .. } | Sym::Var { .. }) => {
                    return Err(type_err(pos, format!("array `{n}` used without an index")))
                }
                Some(Sym::Chan { .. }) => {
                    return Err(type_err(pos, format!("channel `{n}` used as a value")))
                }
                Some(Sym::Func { .. }) => {
                    return Err(type_err(pos, format!("function `{n}` used without a call")))
                }
                None if n == "time" => Expr::Time,
                None => return Err(unresolved(pos, n.as_str())),
            },
            Ast::Index(n, ix) => {
                let ix = ix
                    .iter()
                    .map(|i| self.expr(i, frames, depth))
                    .collect::<Result<Vec<_>, _>>()?;
                let consts: Option<Vec<f64>> = ix.iter().map(const_value).collect();
                match self.lookup(frames, n) {
                    Some(Sym::Const { dims, values }) => {
                        let Some(c) = consts else {
                            return Err(type_err(
                                pos,
                                format!("constant array `{n}` needs constant indices"),
                            ));
                        };
                        Expr::Num(values[flat_offset(dims, &c, pos, n)?])
                    }
                    Some(Sym::Var { base, dims }) => match consts {
                        Some(c) => Expr::Var(base + flat_offset(dims, &c, pos, n)?),
                        None if ix.len() == dims.len() => Expr::Elem {
                            base: *base,
                            dims: dims.clone(),
                            index: ix,
                        },
                        None => {
                            return Err(type_err(
                                pos,
                                format!("`{n}` has {} dimension(s)", dims.len()),
                            ))
                        }
                    },
                    Some(_) => return Err(type_err(pos, format!("`{n}` cannot be indexed"))),
                    None => return Err(unresolved(pos, n.as_str())),
                }
            }
            Ast::Call(n, args) => {
                if n == "random" {
                    if args.len() != 1 {
                        return Err(type_err(pos, "random() takes one argument"));
                    }
                    if !self.allow_random {
                        return Err(type_err(pos, "random() is only allowed in updates"));
                    }
                    let b = self.expr(&args[0], frames, depth)?;
                    return Ok(Expr::Random(Box::new(b)));
                }
                let lowered = args
                    .iter()
                    .map(|x| self.expr(x, frames, depth))
                    .collect::<Result<Vec<_>, _>>()?;
                if let Some(Sym::Func { params, body }) = self.lookup(frames, n) {
                    if params.len() != args.len() {
                        return Err(type_err(
                            pos,
                            format!("`{n}` expects {} argument(s), got {}", params.len(), args.len()),
                        ));
                    }
                    if depth >= MAX_INLINE_DEPTH {
                        return Err(type_err(pos, format!("function `{n}` is recursive")));
                    }
                    let frame: Frame = params
                        .iter()
                        .cloned()
                        .zip(lowered.into_iter().map(Sym::Arg))
                        .collect();
                    return self.expr(body, &[&self.syms.globals, &frame], depth + 1);
                }
                let Some(f) = Builtin::from_name(n) else {
                    return Err(unresolved(pos, n.as_str()));
                };
                if f.arity() != args.len() {
                    return Err(type_err(
                        pos,
                        format!("`{n}` expects {} argument(s), got {}", f.arity(), args.len()),
                    ));
                }
                Expr::Call(f, lowered)
            }
            Ast::Member(base, m) => {
                let (j, c) = self.component(base)?;
                if let Some(l) = c.locations.iter().position(|l| l == m) {
                    return Ok(Expr::At {
                        component: j,
                        location: l,
                    });
                }
                if c.locals.contains_key(m) {
                    return self.expr(&Ast::Name(m.clone()), &[&c.locals], depth);
                }
                return Err(unresolved(pos, format!("{base}.{m}")));
            }
            Ast::Unary(UnaryOp::Neg, a) => Expr::Neg(Box::new(self.expr(a, frames, depth)?)),
            Ast::Unary(UnaryOp::Not, a) => Expr::Not(Box::new(self.expr(a, frames, depth)?)),
            Ast::Binary(op, a, b) => Expr::bin(
                *op,
                self.expr(a, frames, depth)?,
                self.expr(b, frames, depth)?,
            ),
            Ast::Cond(c, a, b) => Expr::Cond(
                Box::new(self.expr(c, frames, depth)?),
                Box::new(self.expr(a, frames, depth)?),
                Box::new(self.expr(b, frames, depth)?),
            ),
        };
        fold(e, pos)
    }

    /// Resolves `Heater` or `Room(0)` to a component.
    fn component(&self, base: &Ast) -> Result<(usize, &ComponentSym), DslError> {
        let (name, args) = match base {
            Ast::Name(n) => (n, Vec::new()),
            Ast::Call(n, args) => {
                let mut vals = Vec::new();
                for a in args {
                    let e = self.expr(a, &[&self.syms.globals], 0)?;
                    match const_value(&e) {
                        Some(v) => vals.push(v),
                        None => {
                            return Err(type_err(self.pos, "component arguments must be constant"))
                        }
                    }
                }
                (n, vals)
            }
            _ => return Err(type_err(self.pos, format!("`{base}` is not a component"))),
        };
        self.syms
            .components
            .iter()
            .enumerate()
            .find(|(_, c)| &c.template == name && c.args == args)
            .ok_or_else(|| unresolved(self.pos, base.to_string()))
    }

    fn constant(&self, a: &Ast, frames: &[&Frame]) -> Result<f64, DslError> {
        let e = self.expr(a, frames, 0)?;
        const_value(&e).ok_or_else(|| type_err(self.pos, format!("`{a}` is not constant")))
    }

    /// An assignable variable cell.
    fn lvalue(&self, a: &Ast, frames: &[&Frame]) -> Result<Expr, DslError> {
        let name = match a {
            Ast::Name(n) | Ast::Index(n, _) => n,
            _ => return Err(type_err(self.pos, format!("cannot assign to `{a}`"))),
        };
        match self.lookup(frames, name) {
            Some(Sym::Var { .. }) => self.expr(a, frames, 0),
            Some(_) => Err(type_err(self.pos, format!("cannot assign to `{name}`"))),
            None => Err(unresolved(self.pos, name.as_str())),
        }
    }

    fn channel(&self, a: &Ast, frames: &[&Frame]) -> Result<ChannelId, DslError> {
        let (name, ix) = match a {
            Ast::Name(n) => (n, &[][..]),
            Ast::Index(n, ix) => (n, &ix[..]),
            _ => return Err(type_err(self.pos, format!("`{a}` is not a channel"))),
        };
        match self.lookup(frames, name) {
            Some(Sym::Chan { base, dims }) => {
                let c = ix
                    .iter()
                    .map(|i| self.constant(i, frames))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(base + flat_offset(dims, &c, self.pos, name)?)
            }
            Some(_) => Err(type_err(self.pos, format!("`{name}` is not a channel"))),
            None => Err(unresolved(self.pos, name.as_str())),
        }
    }

    fn init_values(
        &self,
        init: Option<&Init>,
        dims: &[usize],
        frames: &[&Frame],
    ) -> Result<Vec<f64>, DslError> {
        let n = cells(dims);
        match init {
            None => Ok(vec![0.0; n]),
            Some(Init::Scalar(a)) => Ok(vec![self.constant(a, frames)?; n]),
            Some(Init::List(items)) => {
                let Some((&d, rest)) = dims.split_first() else {
                    return Err(type_err(self.pos, "brace initializer for a scalar"));
                };
                if items.len() != d {
                    return Err(type_err(
                        self.pos,
                        format!("initializer has {} element(s), expected {d}", items.len()),
                    ));
                }
                let mut out = Vec::with_capacity(n);
                for it in items {
                    out.extend(self.init_values(Some(it), rest, frames)?);
                }
                Ok(out)
            }
        }
    }
}

fn insert(frame: &mut Frame, name: &str, sym: Sym, pos: Pos) -> Result<(), DslError> {
    if name == "time" {
        return Err(type_err(pos, "`time` is reserved"));
    }
    if frame.contains_key(name) {
        return Err(DslError::DuplicateDeclaration {
            pos,
            name: name.to_string(),
        });
    }
    frame.insert(name.to_string(), sym);
    Ok(())
}

struct Built {
    decls: Declarations,
    components: Vec<HybridAutomaton>,
    symbols: Symbols,
}

fn declare_var(
    decls: &mut Declarations,
    prefix: &str,
    ty: VarType,
    name: &str,
    dims: &[usize],
    values: Vec<f64>,
) -> Sym {
    let kind = match ty {
        VarType::Clock => VarKind::Clock,
        VarType::Int | VarType::Double => VarKind::Discrete,
    };
    let mut base = None;
    for (cell, v) in cell_names(name, dims).into_iter().zip(values) {
        let slot = decls.add_var(format!("{prefix}{cell}"), kind, v);
        base.get_or_insert(slot);
    }
    Sym::Var {
        base: base.unwrap_or(decls.vars.len()),
        dims: dims.to_vec(),
    }
}

fn build(doc: &ModelDocument) -> Result<Built, DslError> {
    let mut decls = Declarations::default();
    let mut syms = Symbols::default();

    for d in &doc.decls {
        let pos = d.pos();
        let sym = {
            let lw = Lower {
                syms: &syms,
                pos,
                allow_random: false,
            };
            let frames = [&syms.globals];
            match d {
                Decl::Const { dims, init, .. } => Sym::Const {
                    dims: dims.clone(),
                    values: lw.init_values(Some(init), dims, &frames)?,
                },
                Decl::Var {
                    ty,
                    name,
                    dims,
                    init,
                    ..
                } => {
                    let values = lw.init_values(init.as_ref(), dims, &frames)?;
                    declare_var(&mut decls, "", *ty, name, dims, values)
                }
                Decl::Chan {
                    name, dims, urgent, ..
                } => {
                    let mut base = None;
                    for cell in cell_names(name, dims) {
                        base.get_or_insert(decls.add_channel(cell, *urgent));
                    }
                    Sym::Chan {
                        base: base.unwrap_or(decls.channels.len()),
                        dims: dims.clone(),
                    }
                }
                Decl::Func { params, body, .. } => {
                    let mut seen = BTreeSet::new();
                    for p in params {
                        if !seen.insert(p) {
                            return Err(DslError::DuplicateDeclaration {
                                pos,
                                name: p.clone(),
                            });
                        }
                    }
                    Sym::Func {
                        params: params.clone(),
                        body: body.clone(),
                    }
                }
            }
        };
        insert(&mut syms.globals, d.name(), sym, pos)?;
    }

    // Function bodies may only use globals and their parameters; check once.
    for d in &doc.decls {
        if let Decl::Func {
            params, body, pos, ..
        } = d
        {
            let frame: Frame = params
                .iter()
                .map(|p| (p.clone(), Sym::Arg(Expr::Num(1.0))))
                .collect();
            let lw = Lower {
                syms: &syms,
                pos: *pos,
                allow_random: true,
            };
            match lw.expr(body, &[&syms.globals, &frame], 0) {
                Err(DslError::Type { msg, .. }) if msg.starts_with("in constant") => {}
                r => {
                    r?;
                }
            }
        }
    }

    let mut templates: HashMap<&str, &Template> = HashMap::new();
    for t in &doc.templates {
        if templates.insert(&t.name, t).is_some() {
            return Err(DslError::DuplicateDeclaration {
                pos: t.pos,
                name: t.name.clone(),
            });
        }
    }

    // Pass 1: register every component with its locals and locations.
    let mut names = Vec::new();
    for inst in &doc.system {
        let pos = inst.pos;
        let t = templates
            .get(inst.template.as_str())
            .ok_or_else(|| unresolved(pos, inst.template.as_str()))?;
        if t.params.len() != inst.args.len() {
            return Err(type_err(
                pos,
                format!(
                    "template `{}` expects {} argument(s), got {}",
                    t.name,
                    t.params.len(),
                    inst.args.len()
                ),
            ));
        }
        let lw = Lower {
            syms: &syms,
            pos,
            allow_random: false,
        };
        let args = inst
            .args
            .iter()
            .map(|a| lw.constant(a, &[&syms.globals]))
            .collect::<Result<Vec<_>, _>>()?;
        if syms
            .components
            .iter()
            .any(|c| c.template == inst.template && c.args == args)
        {
            return Err(DslError::DuplicateDeclaration {
                pos,
                name: inst.display_name(),
            });
        }
        let display = inst.display_name();
        let mut locals = Frame::new();
        for (p, v) in t.params.iter().zip(&args) {
            insert(
                &mut locals,
                p,
                Sym::Const {
                    dims: vec![],
                    values: vec![*v],
                },
                t.pos,
            )?;
        }
        for d in &t.locals {
            if let Decl::Var {
                ty,
                name,
                dims,
                init,
                pos,
            } = d
            {
                let lw = Lower {
                    syms: &syms,
                    pos: *pos,
                    allow_random: false,
                };
                let values = lw.init_values(init.as_ref(), dims, &[&syms.globals, &locals])?;
                let sym = declare_var(&mut decls, &format!("{display}."), *ty, name, dims, values);
                insert(&mut locals, name, sym, *pos)?;
            }
        }
        let mut locations = Vec::new();
        for l in &t.locations {
            if locations.contains(&l.name) {
                return Err(DslError::DuplicateDeclaration {
                    pos: l.pos,
                    name: l.name.clone(),
                });
            }
            locations.push(l.name.clone());
        }
        if locations.is_empty() {
            return Err(type_err(t.pos, format!("template `{}` has no locations", t.name)));
        }
        syms.components.push(ComponentSym {
            template: inst.template.clone(),
            args,
            locations,
            locals,
        });
        names.push(display);
    }

    // Pass 2: lower locations and edges.
    let mut components = Vec::new();
    for (j, inst) in doc.system.iter().enumerate() {
        let t = templates[inst.template.as_str()];
        let comp = &syms.components[j];
        let frames = [&syms.globals, &comp.locals];
        let loc_index = |name: &str, pos: Pos| {
            comp.locations
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| unresolved(pos, name))
        };
        let mut clocks: BTreeSet<Slot> = BTreeSet::new();
        let mut own = |target: &Expr, decls: &Declarations| match target {
            Expr::Var(s) if decls.vars[*s].kind == VarKind::Clock => {
                clocks.insert(*s);
            }
            Expr::Elem { base, dims, .. } => {
                for s in *base..*base + cells(dims) {
                    if decls.vars[s].kind == VarKind::Clock {
                        clocks.insert(s);
                    }
                }
            }
            _ => {}
        };

        let initials: Vec<usize> = t
            .locations
            .iter()
            .enumerate()
            .filter(|(_, l)| l.initial)
            .map(|(i, _)| i)
            .collect();
        if initials.len() > 1 {
            return Err(type_err(
                t.locations[initials[1]].pos,
                "more than one initial location",
            ));
        }

        let mut locations = Vec::new();
        for l in &t.locations {
            let lw = Lower {
                syms: &syms,
                pos: l.pos,
                allow_random: false,
            };
            let mut loc = Location::new(l.name.clone());
            loc.invariant = l
                .invariant
                .as_ref()
                .map(|e| lw.expr(e, &frames, 0))
                .transpose()?;
            for (target, rate) in &l.rates {
                let slot = match lw.lvalue(target, &frames)? {
                    Expr::Var(s) => s,
                    _ => {
                        return Err(type_err(
                            l.pos,
                            format!("rate target `{target}` needs constant indices"),
                        ))
                    }
                };
                if decls.vars[slot].kind != VarKind::Clock {
                    return Err(type_err(
                        l.pos,
                        format!("`{target}` is not a clock and cannot have a rate"),
                    ));
                }
                if loc.rates.iter().any(|(s, _)| *s == slot) {
                    return Err(DslError::DuplicateDeclaration {
                        pos: l.pos,
                        name: format!("{target}'"),
                    });
                }
                own(&Expr::Var(slot), &decls);
                loc.rates.push((slot, lw.expr(rate, &frames, 0)?));
            }
            loc.exit_rate = l
                .exit_rate
                .as_ref()
                .map(|e| lw.expr(e, &frames, 0))
                .transpose()?;
            locations.push(loc);
        }

        let mut edges = Vec::new();
        for e in &t.edges {
            let lw = Lower {
                syms: &syms,
                pos: e.pos,
                allow_random: false,
            };
            let source = loc_index(&e.source, e.pos)?;
            let guard = e
                .guard
                .as_ref()
                .map(|g| lw.expr(g, &frames, 0))
                .transpose()?;
            let (sync, urgent_chan) = match &e.sync {
                None => (Sync::Internal, false),
                Some(s) => {
                    let ch = lw.channel(&s.channel, &frames)?;
                    match s.direction {
                        Direction::Send => (Sync::Output(ch), decls.channels[ch].urgent),
                        Direction::Receive => (Sync::Input(ch), false),
                    }
                }
            };
            if urgent_chan && e.branches.len() > 1 {
                return Err(type_err(
                    e.pos,
                    "output on an urgent channel cannot carry branch probabilities",
                ));
            }
            let upd = Lower {
                syms: &syms,
                pos: e.pos,
                allow_random: true,
            };
            let mut branches = Vec::new();
            for b in &e.branches {
                let weight = match &b.weight {
                    Some(w) => lw.expr(w, &frames, 0)?,
                    None => Expr::Num(1.0),
                };
                if const_value(&weight).is_some_and(|w| w < 0.0) {
                    return Err(type_err(e.pos, "negative branch weight"));
                }
                let mut updates = Vec::new();
                for (l, r) in &b.updates {
                    let target = lw.lvalue(l, &frames)?;
                    own(&target, &decls);
                    updates.push(Assign {
                        target,
                        value: upd.expr(r, &frames, 0)?,
                    });
                }
                branches.push(Branch {
                    weight,
                    updates,
                    target: loc_index(&b.target, e.pos)?,
                });
            }
            edges.push(Edge {
                source,
                guard,
                sync,
                branches,
                implicit: false,
                urgent: e.urgent || urgent_chan,
            });
        }

        components.push(HybridAutomaton {
            name: names[j].clone(),
            locations,
            initial: initials.first().copied().unwrap_or(0),
            clocks: clocks.into_iter().collect(),
            edges,
        });
    }

    for c in &mut components {
        add_input_loops(c, decls.channels.len());
    }

    Ok(Built {
        decls,
        components,
        symbols: syms,
    })
}

/// Makes a component input-enabled: for every channel it does not output
/// and every location, a stay-put edge enabled exactly when no explicit
/// input edge on that channel is.
fn add_input_loops(c: &mut HybridAutomaton, channels: usize) {
    let outputs = c.outputs();
    let mut extra = Vec::new();
    for ch in (0..channels).filter(|ch| !outputs.contains(ch)) {
        for l in 0..c.locations.len() {
            let explicit: Vec<&Edge> = c
                .edges
                .iter()
                .filter(|e| e.source == l && e.sync == Sync::Input(ch))
                .collect();
            if explicit.iter().any(|e| e.guard.is_none()) {
                continue;
            }
            let guard = explicit
                .iter()
                .filter_map(|e| e.guard.clone())
                .reduce(|a, b| Expr::bin(BinOp::Or, a, b))
                .map(|g| Expr::Not(Box::new(g)));
            extra.push(Edge {
                source: l,
                guard,
                sync: Sync::Input(ch),
                branches: vec![Branch {
                    weight: Expr::Num(1.0),
                    updates: Vec::new(),
                    target: l,
                }],
                implicit: true,
                urgent: false,
            });
        }
    }
    c.edges.extend(extra);
}

/// Checks identifier resolution only; structural errors surface later.
pub(super) fn resolve(doc: &ModelDocument) -> Result<(), DslError> {
    match build(doc) {
        Ok(_) => Ok(()),
        Err(e @ (DslError::UnresolvedIdentifier { .. } | DslError::DuplicateDeclaration { .. })) => {
            Err(e)
        }
        Err(_) => Ok(()),
    }
}

/// Instantiates the templates of a document and composes the network.
pub fn elaborate(doc: &ModelDocument) -> Result<Network, DslError> {
    let b = build(doc)?;
    Ok(compose(b.decls, b.components)?)
}

/// An elaborated model together with the symbol table needed to resolve
/// queries against it.
#[derive(Debug, Clone)]
pub struct Model {
    pub document: ModelDocument,
    pub network: Network,
    symbols: Symbols,
}

impl Model {
    pub fn parse(text: &str) -> Result<Model, DslError> {
        let mut p = parser::Parser::new(text)?;
        let doc = p.model()?;
        Model::from_document(doc)
    }

    pub fn from_document(document: ModelDocument) -> Result<Model, DslError> {
        let b = build(&document)?;
        let network = compose(b.decls, b.components)?;
        Ok(Model {
            document,
            network,
            symbols: b.symbols,
        })
    }

    fn lower(&self, pos: Pos) -> Lower<'_> {
        Lower {
            syms: &self.symbols,
            pos,
            allow_random: false,
        }
    }

    /// Resolves an expression over global names, `time` and
    /// `Component.location` / `Component.local` references.
    pub fn resolve_expr(&self, a: &Ast) -> Result<Expr, DslError> {
        self.lower(Pos::default())
            .expr(a, &[&self.symbols.globals], 0)
    }

    pub fn expr(&self, text: &str) -> Result<Expr, DslError> {
        self.resolve_expr(&parse_expr(text)?)
    }

    /// Parses and binds a query.
    pub fn query(&self, text: &str) -> Result<BoundQuery, DslError> {
        self.bind(&parse_query(text)?)
    }

    /// Slot of a scalar variable or array cell by its declared name, e.g.
    /// `y`, `T[1]` or `Room(0).x`.
    pub fn slot(&self, name: &str) -> Option<Slot> {
        self.network.decls.vars.iter().position(|v| v.name == name)
    }

    fn bound(&self, b: &BoundAst) -> Result<Bound, DslError> {
        let bad = |msg: &str| DslError::BadBound {
            pos: Pos::default(),
            msg: msg.to_string(),
        };
        Ok(match b {
            BoundAst::Time(t) if t.is_finite() && *t >= 0.0 => Bound::Time(*t),
            BoundAst::Time(_) => return Err(bad("time bound must be finite and nonnegative")),
            BoundAst::Steps(k) => Bound::Steps(*k),
            BoundAst::Cost(x, c) => {
                let lw = self.lower(Pos::default());
                match lw.lvalue(x, &[&self.symbols.globals]) {
                    Ok(Expr::Var(slot)) if c.is_finite() => Bound::Cost { slot, limit: *c },
                    Ok(_) => return Err(bad("cost bound needs a scalar variable and a finite limit")),
                    Err(e) => return Err(e),
                }
            }
        })
    }

    fn formula(&self, p: &PathAst, top: bool) -> Result<Formula, DslError> {
        let nested = |op: &str| {
            type_err(
                Pos::default(),
                format!("`{op}` is only allowed at the top of a path formula"),
            )
        };
        Ok(match p {
            PathAst::Atom(a) => Formula::State(self.resolve_expr(a)?),
            PathAst::Not(a) => Formula::not(self.formula(a, false)?),
            PathAst::And(a, b) => Formula::and(self.formula(a, false)?, self.formula(b, false)?),
            PathAst::Or(a, b) => Formula::or(self.formula(a, false)?, self.formula(b, false)?),
            PathAst::Until(a, b, t) => {
                if !(t.is_finite() && *t >= 0.0) {
                    return Err(DslError::BadBound {
                        pos: Pos::default(),
                        msg: "until bound must be finite and nonnegative".into(),
                    });
                }
                Formula::until(self.formula(a, false)?, self.formula(b, false)?, *t)
            }
            PathAst::Eventually(a) if top => Formula::eventually(self.formula(a, false)?),
            PathAst::Always(a) if top => Formula::always(self.formula(a, false)?),
            PathAst::Eventually(_) => return Err(nested("<>")),
            PathAst::Always(_) => return Err(nested("[]")),
        })
    }

    fn observable(&self, a: &Ast) -> Result<Observable, DslError> {
        Ok(Observable {
            name: a.to_string(),
            expr: self.resolve_expr(a)?,
        })
    }

    /// Resolves every identifier of a parsed query.
    pub fn bind(&self, q: &Query) -> Result<BoundQuery, DslError> {
        Ok(match q {
            Query::Simulate {
                runs,
                bound,
                observables,
            } => BoundQuery::Simulate {
                runs: (*runs).max(1),
                bound: self.bound(bound)?,
                observables: observables
                    .iter()
                    .map(|o| self.observable(o))
                    .collect::<Result<_, _>>()?,
            },
            Query::ProbEstimate { bound, formula } => BoundQuery::Probability {
                bound: self.bound(bound)?,
                formula: self.formula(formula, true)?,
            },
            Query::ProbHypothesis {
                bound,
                formula,
                relation,
                threshold,
            } => BoundQuery::Hypothesis {
                bound: self.bound(bound)?,
                formula: self.formula(formula, true)?,
                relation: *relation,
                threshold: *threshold,
            },
            Query::ProbCompare {
                left,
                relation,
                right,
            } => BoundQuery::Compare {
                left: (self.bound(&left.0)?, self.formula(&left.1, true)?),
                relation: *relation,
                right: (self.bound(&right.0)?, self.formula(&right.1, true)?),
            },
            Query::ValueEstimate {
                bound,
                runs,
                extremum,
                expr,
            } => BoundQuery::Value {
                bound: self.bound(bound)?,
                runs: *runs,
                extremum: *extremum,
                observable: self.observable(expr)?,
            },
            Query::MonitorDistance {
                bound,
                runs,
                clock,
                formula,
            } => BoundQuery::Distance {
                bound: self.bound(bound)?,
                runs: *runs,
                clock: clock.clone(),
                pattern: self.formula(formula, false)?,
            },
        })
    }
}
