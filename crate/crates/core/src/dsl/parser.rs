use crate::expr::BinOp;

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::{DslError, Pos};

const KEYWORDS: &[&str] = &[
    "const", "int", "double", "clock", "chan", "broadcast", "urgent", "fn", "template",
    "location", "initial", "invariant", "rate", "edge", "guard", "sync", "update", "branch",
    "system", "true", "false", "and", "or", "not", "imply",
];

pub(crate) struct Parser {
    toks: Vec<Token>,
    i: usize,
}

type PResult<T> = Result<T, DslError>;

impl Parser {
    pub(crate) fn new(src: &str) -> PResult<Parser> {
        Ok(Parser {
            toks: lex(src)?,
            i: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let j = (self.i + k).min(self.toks.len() - 1);
        &self.toks[j].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.i].tok.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(DslError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn unexpected<T>(&self, what: &str) -> PResult<T> {
        self.err(format!("expected {what}, found {}", self.peek()))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.unexpected(&t.to_string())
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.advance();
                Ok(s)
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn number(&mut self) -> PResult<f64> {
        match *self.peek() {
            Tok::Num(x) => {
                self.advance();
                Ok(x)
            }
            _ => self.unexpected("number"),
        }
    }

    fn natural(&mut self) -> PResult<u64> {
        let x = self.number()?;
        if x.fract() != 0.0 || x < 0.0 || x > u64::MAX as f64 {
            return self.err(format!("expected a nonnegative integer, found `{x}`"));
        }
        Ok(x as u64)
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    // ----------------------------------------------------------- expressions

    pub(crate) fn expr(&mut self) -> PResult<Ast> {
        let c = self.imply()?;
        if self.eat(&Tok::Question) {
            let a = self.expr()?;
            self.expect(Tok::Colon)?;
            let b = self.expr()?;
            return Ok(Ast::Cond(Box::new(c), Box::new(a), Box::new(b)));
        }
        Ok(c)
    }

    fn imply(&mut self) -> PResult<Ast> {
        let mut a = self.or()?;
        while self.eat_kw("imply") {
            let b = self.or()?;
            a = Ast::bin(BinOp::Imply, a, b);
        }
        Ok(a)
    }

    fn or(&mut self) -> PResult<Ast> {
        let mut a = self.and()?;
        while self.eat(&Tok::OrOr) || self.eat_kw("or") {
            let b = self.and()?;
            a = Ast::bin(BinOp::Or, a, b);
        }
        Ok(a)
    }

    fn and(&mut self) -> PResult<Ast> {
        let mut a = self.equality()?;
        while self.eat(&Tok::AndAnd) || self.eat_kw("and") {
            let b = self.equality()?;
            a = Ast::bin(BinOp::And, a, b);
        }
        Ok(a)
    }

    fn equality(&mut self) -> PResult<Ast> {
        let mut a = self.relational()?;
        loop {
            let op = match self.peek() {
                Tok::EqEq => BinOp::Eq,
                Tok::Ne => BinOp::Ne,
                _ => return Ok(a),
            };
            self.advance();
            let b = self.relational()?;
            a = Ast::bin(op, a, b);
        }
    }

    fn relational(&mut self) -> PResult<Ast> {
        let mut a = self.additive()?;
        loop {
            let op = match self.peek() {
                Tok::Lt => BinOp::Lt,
                Tok::Le => BinOp::Le,
                Tok::Gt => BinOp::Gt,
                Tok::Ge => BinOp::Ge,
                _ => return Ok(a),
            };
            self.advance();
            let b = self.additive()?;
            a = Ast::bin(op, a, b);
        }
    }

    fn additive(&mut self) -> PResult<Ast> {
        let mut a = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(a),
            };
            self.advance();
            let b = self.multiplicative()?;
            a = Ast::bin(op, a, b);
        }
    }

    fn multiplicative(&mut self) -> PResult<Ast> {
        let mut a = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Mod,
                _ => return Ok(a),
            };
            self.advance();
            let b = self.unary()?;
            a = Ast::bin(op, a, b);
        }
    }

    fn unary(&mut self) -> PResult<Ast> {
        if self.eat(&Tok::Minus) {
            return Ok(Ast::Unary(UnaryOp::Neg, Box::new(self.unary()?)));
        }
        if self.eat(&Tok::Plus) {
            return self.unary();
        }
        if self.eat(&Tok::Bang) || self.eat_kw("not") {
            return Ok(Ast::Unary(UnaryOp::Not, Box::new(self.unary()?)));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Ast> {
        let base = match self.peek().clone() {
            Tok::Num(x) => {
                self.advance();
                Ast::Num(x)
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                e
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.advance();
                Ast::Bool(s == "true")
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                if self.eat(&Tok::LParen) {
                    let mut args = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            args.push(self.expr()?);
                            if self.eat(&Tok::RParen) {
                                break;
                            }
                            self.expect(Tok::Comma)?;
                        }
                    }
                    Ast::Call(name, args)
                } else if self.peek() == &Tok::LBracket {
                    let mut ix = Vec::new();
                    while self.eat(&Tok::LBracket) {
                        ix.push(self.expr()?);
                        self.expect(Tok::RBracket)?;
                    }
                    Ast::Index(name, ix)
                } else {
                    Ast::Name(name)
                }
            }
            _ => return self.unexpected("expression"),
        };
        if matches!(base, Ast::Name(_) | Ast::Call(..)) && self.peek() == &Tok::Dot {
            self.advance();
            let m = self.ident()?;
            return Ok(Ast::Member(Box::new(base), m));
        }
        Ok(base)
    }

    // ---------------------------------------------------------------- model

    pub(crate) fn model(&mut self) -> PResult<ModelDocument> {
        let mut doc = ModelDocument::default();
        if self.at_eof() {
            return self.err("empty model");
        }
        while !self.at_eof() {
            if self.is_kw("template") {
                doc.templates.push(self.template()?);
            } else if self.is_kw("system") {
                if !doc.system.is_empty() {
                    return self.err("duplicate `system` line");
                }
                doc.system = self.system()?;
            } else {
                doc.decls.extend(self.decl(true)?);
            }
        }
        if doc.system.is_empty() {
            return self.err("missing `system` line");
        }
        Ok(doc)
    }

    fn dims(&mut self) -> PResult<Vec<usize>> {
        let mut dims = Vec::new();
        while self.eat(&Tok::LBracket) {
            let n = self.natural()?;
            if n == 0 {
                return self.err("array dimension must be positive");
            }
            dims.push(n as usize);
            self.expect(Tok::RBracket)?;
        }
        Ok(dims)
    }

    fn init(&mut self) -> PResult<Init> {
        if self.eat(&Tok::LBrace) {
            let mut items = Vec::new();
            loop {
                items.push(self.init()?);
                if self.eat(&Tok::RBrace) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
            Ok(Init::List(items))
        } else {
            Ok(Init::Scalar(self.expr()?))
        }
    }

    /// One declaration statement; may declare several names.
    fn decl(&mut self, global: bool) -> PResult<Vec<Decl>> {
        let pos = self.pos();
        let mut out = Vec::new();
        if self.eat_kw("const") {
            // optional type word
            let _ = self.eat_kw("int") || self.eat_kw("double");
            loop {
                let pos = self.pos();
                let name = self.ident()?;
                let dims = self.dims()?;
                self.expect(Tok::Assign)?;
                let init = self.init()?;
                out.push(Decl::Const {
                    name,
                    dims,
                    init,
                    pos,
                });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        } else if self.is_kw("int") || self.is_kw("double") || self.is_kw("clock") {
            let ty = match self.advance() {
                Tok::Ident(s) if s == "int" => VarType::Int,
                Tok::Ident(s) if s == "double" => VarType::Double,
                _ => VarType::Clock,
            };
            loop {
                let pos = self.pos();
                let name = self.ident()?;
                let dims = self.dims()?;
                let init = if self.eat(&Tok::Assign) {
                    Some(self.init()?)
                } else {
                    None
                };
                out.push(Decl::Var {
                    ty,
                    name,
                    dims,
                    init,
                    pos,
                });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        } else if global && (self.is_kw("urgent") || self.is_kw("broadcast") || self.is_kw("chan")) {
            let urgent = self.eat_kw("urgent");
            let _ = self.eat_kw("broadcast");
            self.expect_kw("chan")?;
            loop {
                let pos = self.pos();
                let name = self.ident()?;
                let dims = self.dims()?;
                out.push(Decl::Chan {
                    name,
                    dims,
                    urgent,
                    pos,
                });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        } else if global && self.eat_kw("fn") {
            let name = self.ident()?;
            self.expect(Tok::LParen)?;
            let mut params = Vec::new();
            if !self.eat(&Tok::RParen) {
                loop {
                    params.push(self.ident()?);
                    if self.eat(&Tok::RParen) {
                        break;
                    }
                    self.expect(Tok::Comma)?;
                }
            }
            self.expect(Tok::Assign)?;
            let body = self.expr()?;
            out.push(Decl::Func {
                name,
                params,
                body,
                pos,
            });
        } else {
            return self.unexpected("declaration");
        }
        self.expect(Tok::Semi)?;
        Ok(out)
    }

    fn template(&mut self) -> PResult<Template> {
        let pos = self.pos();
        self.expect_kw("template")?;
        let name = self.ident()?;
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            loop {
                // optional type word before a parameter
                let _ = self.eat_kw("int") || self.eat_kw("double") || self.eat_kw("const");
                params.push(self.ident()?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        self.expect(Tok::LBrace)?;
        let mut t = Template {
            name,
            params,
            locals: Vec::new(),
            locations: Vec::new(),
            edges: Vec::new(),
            pos,
        };
        while !self.eat(&Tok::RBrace) {
            if self.is_kw("location") {
                t.locations.push(self.location()?);
            } else if self.is_kw("edge") {
                t.edges.push(self.edge()?);
            } else if self.is_kw("int") || self.is_kw("double") || self.is_kw("clock") {
                t.locals.extend(self.decl(false)?);
            } else {
                return self.unexpected("`location`, `edge` or a local declaration");
            }
        }
        Ok(t)
    }

    fn location(&mut self) -> PResult<LocationAst> {
        let pos = self.pos();
        self.expect_kw("location")?;
        let name = self.ident()?;
        let initial = self.eat_kw("initial");
        let mut loc = LocationAst {
            name,
            initial,
            invariant: None,
            rates: Vec::new(),
            exit_rate: None,
            pos,
        };
        if self.eat(&Tok::Semi) {
            return Ok(loc);
        }
        self.expect(Tok::LBrace)?;
        while !self.eat(&Tok::RBrace) {
            if self.eat_kw("invariant") {
                let e = self.expr()?;
                loc.invariant = Some(match loc.invariant.take() {
                    Some(prev) => Ast::bin(BinOp::And, prev, e),
                    None => e,
                });
            } else if self.eat_kw("rate") {
                if loc.exit_rate.is_some() {
                    return self.err("duplicate exit rate");
                }
                loc.exit_rate = Some(self.expr()?);
            } else {
                let target = self.lvalue()?;
                self.expect(Tok::Prime)?;
                self.expect(Tok::Assign)?;
                let e = self.expr()?;
                loc.rates.push((target, e));
            }
            self.expect(Tok::Semi)?;
        }
        Ok(loc)
    }

    fn lvalue(&mut self) -> PResult<Ast> {
        let name = self.ident()?;
        if self.peek() == &Tok::LBracket {
            let mut ix = Vec::new();
            while self.eat(&Tok::LBracket) {
                ix.push(self.expr()?);
                self.expect(Tok::RBracket)?;
            }
            Ok(Ast::Index(name, ix))
        } else {
            Ok(Ast::Name(name))
        }
    }

    fn updates(&mut self) -> PResult<Vec<(Ast, Ast)>> {
        let mut ups = Vec::new();
        loop {
            let l = self.lvalue()?;
            self.expect(Tok::Assign)?;
            let r = self.expr()?;
            ups.push((l, r));
            if !self.eat(&Tok::Comma) {
                return Ok(ups);
            }
        }
    }

    fn edge(&mut self) -> PResult<EdgeAst> {
        let pos = self.pos();
        self.expect_kw("edge")?;
        let source = self.ident()?;
        let single_target = if self.eat(&Tok::Arrow) {
            Some(self.ident()?)
        } else {
            None
        };
        let mut e = EdgeAst {
            source,
            guard: None,
            sync: None,
            urgent: false,
            branches: Vec::new(),
            pos,
        };
        let mut updates = Vec::new();
        if single_target.is_some() && self.eat(&Tok::Semi) {
            e.branches.push(BranchAst {
                weight: None,
                target: single_target.unwrap_or_default(),
                updates,
            });
            return Ok(e);
        }
        self.expect(Tok::LBrace)?;
        while !self.eat(&Tok::RBrace) {
            if self.eat_kw("urgent") {
                e.urgent = true;
            } else if self.eat_kw("guard") {
                if e.guard.is_some() {
                    return self.err("duplicate guard");
                }
                e.guard = Some(self.expr()?);
            } else if self.eat_kw("sync") {
                if e.sync.is_some() {
                    return self.err("duplicate sync");
                }
                let channel = self.lvalue()?;
                let direction = match self.peek() {
                    Tok::Bang => Direction::Send,
                    Tok::Question => Direction::Receive,
                    _ => return self.unexpected("`!` or `?`"),
                };
                self.advance();
                e.sync = Some(SyncAst { channel, direction });
            } else if self.eat_kw("update") {
                if single_target.is_none() {
                    return self.err("updates of a branching edge belong inside its branches");
                }
                updates.extend(self.updates()?);
            } else if self.eat_kw("branch") {
                if single_target.is_some() {
                    return self.err("an edge with a target cannot have branches");
                }
                let weight = self.expr()?;
                self.expect(Tok::Arrow)?;
                let target = self.ident()?;
                let mut ups = Vec::new();
                if !self.eat(&Tok::Semi) {
                    self.expect(Tok::LBrace)?;
                    while !self.eat(&Tok::RBrace) {
                        self.expect_kw("update")?;
                        ups.extend(self.updates()?);
                        self.expect(Tok::Semi)?;
                    }
                }
                e.branches.push(BranchAst {
                    weight: Some(weight),
                    target,
                    updates: ups,
                });
                continue;
            } else {
                return self.unexpected("`guard`, `sync`, `update`, `branch` or `urgent`");
            }
            self.expect(Tok::Semi)?;
        }
        match single_target {
            Some(target) => e.branches.push(BranchAst {
                weight: None,
                target,
                updates,
            }),
            None if e.branches.is_empty() => {
                return Err(DslError::Syntax {
                    pos,
                    msg: "edge has neither a target nor branches".into(),
                })
            }
            None => {}
        }
        Ok(e)
    }

    fn system(&mut self) -> PResult<Vec<Instance>> {
        self.expect_kw("system")?;
        let mut out = Vec::new();
        loop {
            let pos = self.pos();
            let template = self.ident()?;
            let mut args = Vec::new();
            if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
                loop {
                    args.push(self.expr()?);
                    if self.eat(&Tok::RParen) {
                        break;
                    }
                    self.expect(Tok::Comma)?;
                }
            }
            out.push(Instance {
                template,
                args,
                pos,
            });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::Semi)?;
        Ok(out)
    }

    // -------------------------------------------------------------- queries

    pub(crate) fn query(&mut self) -> PResult<Query> {
        let q = if self.eat_kw("simulate") {
            let runs = if matches!(self.peek(), Tok::Num(_)) {
                self.natural()?
            } else {
                1
            };
            self.expect(Tok::LBracket)?;
            let bound = self.bound()?;
            self.expect(Tok::RBracket)?;
            self.expect(Tok::LBrace)?;
            let mut observables = Vec::new();
            if !self.eat(&Tok::RBrace) {
                loop {
                    observables.push(self.expr()?);
                    if self.eat(&Tok::RBrace) {
                        break;
                    }
                    self.expect(Tok::Comma)?;
                }
            }
            Query::Simulate {
                runs,
                bound,
                observables,
            }
        } else if self.is_kw("Pr") {
            let (bound, formula) = self.probability()?;
            let relation = match self.peek() {
                Tok::Ge => Some(Relation::Ge),
                Tok::Le => Some(Relation::Le),
                Tok::Eof => None,
                _ => return self.unexpected("`>=`, `<=` or end of query"),
            };
            match relation {
                None => Query::ProbEstimate { bound, formula },
                Some(relation) => {
                    self.advance();
                    if self.is_kw("Pr") {
                        let right = self.probability()?;
                        Query::ProbCompare {
                            left: (bound, formula),
                            relation,
                            right,
                        }
                    } else {
                        let threshold = self.number()?;
                        if !(0.0..=1.0).contains(&threshold) {
                            return self.err("probability threshold must lie in [0, 1]");
                        }
                        Query::ProbHypothesis {
                            bound,
                            formula,
                            relation,
                            threshold,
                        }
                    }
                }
            }
        } else if self.eat_kw("E") {
            let (bound, runs) = self.bound_with_runs()?;
            self.expect(Tok::LParen)?;
            let extremum = if self.eat_kw("max") {
                Extremum::Max
            } else if self.eat_kw("min") {
                Extremum::Min
            } else {
                return self.unexpected("`max` or `min`");
            };
            self.expect(Tok::Colon)?;
            let expr = self.expr()?;
            self.expect(Tok::RParen)?;
            Query::ValueEstimate {
                bound,
                runs,
                extremum,
                expr,
            }
        } else if self.eat_kw("distance") {
            let (bound, runs) = self.bound_with_runs()?;
            self.expect(Tok::LParen)?;
            let clock = self.ident()?;
            self.expect(Tok::Colon)?;
            let formula = self.path_formula()?;
            self.expect(Tok::RParen)?;
            Query::MonitorDistance {
                bound,
                runs,
                clock,
                formula,
            }
        } else {
            return self.unexpected("`simulate`, `Pr`, `E` or `distance`");
        };
        if !self.at_eof() {
            return self.unexpected("end of query");
        }
        Ok(q)
    }

    fn probability(&mut self) -> PResult<(BoundAst, PathAst)> {
        self.expect_kw("Pr")?;
        self.expect(Tok::LBracket)?;
        let bound = self.bound()?;
        self.expect(Tok::RBracket)?;
        self.expect(Tok::LParen)?;
        if self.peek() == &Tok::RParen {
            return self.unexpected("path formula");
        }
        let f = self.path_formula()?;
        self.expect(Tok::RParen)?;
        Ok((bound, f))
    }

    fn bound_with_runs(&mut self) -> PResult<(BoundAst, u64)> {
        self.expect(Tok::LBracket)?;
        let bound = self.bound()?;
        self.expect(Tok::Semi)?;
        let runs = self.natural()?;
        if runs == 0 {
            return self.err("number of runs must be positive");
        }
        self.expect(Tok::RBracket)?;
        Ok((bound, runs))
    }

    fn bound(&mut self) -> PResult<BoundAst> {
        let pos = self.pos();
        let bad = |msg: &str| DslError::BadBound {
            pos,
            msg: msg.to_string(),
        };
        let b = if self.eat(&Tok::Le) {
            let t = self.number().map_err(|_| bad("time bound needs a number"))?;
            BoundAst::Time(t)
        } else if self.eat(&Tok::Hash) {
            if !self.eat(&Tok::Le) {
                return Err(bad("expected `#<=K`"));
            }
            let k = self.natural().map_err(|_| bad("step bound needs an integer"))?;
            BoundAst::Steps(k)
        } else if matches!(self.peek(), Tok::Ident(_)) {
            let x = self.lvalue().map_err(|_| bad("malformed cost bound"))?;
            if !self.eat(&Tok::Le) {
                return Err(bad("expected `x<=C`"));
            }
            let c = self.number().map_err(|_| bad("cost bound needs a number"))?;
            BoundAst::Cost(x, c)
        } else {
            return Err(bad("expected `<=T`, `#<=K` or `x<=C`"));
        };
        Ok(b)
    }

    pub(crate) fn path_formula(&mut self) -> PResult<PathAst> {
        let f = if self.eat(&Tok::Diamond) {
            PathAst::Eventually(Box::new(self.path_or()?))
        } else if self.peek() == &Tok::LBracket && self.peek_at(1) == &Tok::RBracket {
            self.advance();
            self.advance();
            PathAst::Always(Box::new(self.path_or()?))
        } else {
            self.path_or()?
        };
        Ok(f.normalize())
    }

    fn path_or(&mut self) -> PResult<PathAst> {
        let mut a = self.path_and()?;
        while self.eat(&Tok::OrOr) || self.eat(&Tok::Pipe) || self.eat_kw("or") {
            let b = self.path_and()?;
            a = PathAst::Or(Box::new(a), Box::new(b));
        }
        Ok(a)
    }

    fn path_and(&mut self) -> PResult<PathAst> {
        let mut a = self.path_until()?;
        while self.eat(&Tok::AndAnd) || self.eat(&Tok::Amp) || self.eat_kw("and") {
            let b = self.path_until()?;
            a = PathAst::And(Box::new(a), Box::new(b));
        }
        Ok(a)
    }

    fn path_until(&mut self) -> PResult<PathAst> {
        let a = self.path_unary()?;
        if self.is_kw("U") && self.peek_at(1) == &Tok::LBracket {
            self.advance();
            self.advance();
            let pos = self.pos();
            if !self.eat(&Tok::Le) {
                return Err(DslError::BadBound {
                    pos,
                    msg: "until bound must read `U[<=b]`".into(),
                });
            }
            let b = self.number()?;
            self.expect(Tok::RBracket)?;
            let rhs = self.path_until()?;
            return Ok(PathAst::Until(Box::new(a), Box::new(rhs), b));
        }
        Ok(a)
    }

    fn path_unary(&mut self) -> PResult<PathAst> {
        if self.eat(&Tok::Bang) || self.eat_kw("not") {
            return Ok(PathAst::Not(Box::new(self.path_unary()?)));
        }
        if self.peek() == &Tok::LParen {
            let save = self.i;
            self.advance();
            if let Ok(f) = self.path_or() {
                if self.eat(&Tok::RParen) && !self.continues_expression() {
                    return Ok(f);
                }
            }
            self.i = save;
        }
        Ok(PathAst::Atom(self.equality()?))
    }

    /// True when the next token would extend an arithmetic or comparison
    /// expression, meaning a parenthesized group was an operand.
    fn continues_expression(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Plus
                | Tok::Minus
                | Tok::Star
                | Tok::Slash
                | Tok::Percent
                | Tok::Lt
                | Tok::Le
                | Tok::Gt
                | Tok::Ge
                | Tok::EqEq
                | Tok::Ne
                | Tok::Question
        ) || self.is_kw("imply")
    }

    pub(crate) fn finish(&self) -> PResult<()> {
        if self.at_eof() {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }
}
