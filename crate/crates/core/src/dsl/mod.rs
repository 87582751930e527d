//! Textual model and query language.
//!
//! A model file holds global declarations, automaton templates and a
//! `system` line instantiating them:
//!
//! ```text
//! const rate_hit = 2.5;
//! broadcast chan hit;
//! template Player {
//!   location Idle initial { rate rate_hit; }
//!   edge Idle -> Idle { sync hit!; }
//! }
//! system Player;
//! ```

use std::fmt;

use thiserror::Error;

use crate::model::ComposeError;

pub mod ast;
mod elaborate;
pub mod lexer;
mod parser;

pub use ast::{ModelDocument, PathAst, Query};
pub use elaborate::{elaborate, Model};

/// Source position, 1-based.
///
/// Positions never take part in AST equality, so a pretty-printed and
/// re-parsed tree compares equal to the original.
#[derive(Debug, Clone, Copy, Default, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Pos) -> bool {
        true
    }
}

impl Pos {
    /// `"line:col: "`, or nothing for positions that are not known.
    fn prefix(&self) -> String {
        if self.line == 0 {
            String::new()
        } else {
            format!("{self}: ")
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DslError {
    #[error("{}syntax error: {msg}", pos.prefix())]
    Syntax { pos: Pos, msg: String },
    #[error("{}unresolved identifier `{name}`", pos.prefix())]
    UnresolvedIdentifier { pos: Pos, name: String },
    #[error("{}duplicate declaration of `{name}`", pos.prefix())]
    DuplicateDeclaration { pos: Pos, name: String },
    #[error("{}type error: {msg}", pos.prefix())]
    Type { pos: Pos, msg: String },
    #[error("{}malformed bound: {msg}", pos.prefix())]
    BadBound { pos: Pos, msg: String },
    #[error(transparent)]
    Compose(#[from] ComposeError),
}

impl DslError {
    pub fn pos(&self) -> Option<Pos> {
        match self {
            DslError::Syntax { pos, .. }
            | DslError::UnresolvedIdentifier { pos, .. }
            | DslError::DuplicateDeclaration { pos, .. }
            | DslError::Type { pos, .. }
            | DslError::BadBound { pos, .. } => Some(*pos),
            DslError::Compose(_) => None,
        }
    }
}

/// Parses a model and checks that every identifier resolves.
pub fn parse_model(text: &str) -> Result<ModelDocument, DslError> {
    let mut p = parser::Parser::new(text)?;
    let doc = p.model()?;
    elaborate::resolve(&doc)?;
    Ok(doc)
}

/// Parses a query without resolving its identifiers; see [`Model::bind`].
pub fn parse_query(text: &str) -> Result<Query, DslError> {
    let mut p = parser::Parser::new(text)?;
    p.query()
}

/// Parses a single expression.
pub fn parse_expr(text: &str) -> Result<ast::Ast, DslError> {
    let mut p = parser::Parser::new(text)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Splits a query file into queries: one per line, `//` starts a comment.
pub fn query_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, l)| {
            let l = l.split("//").next().unwrap_or("").trim();
            (!l.is_empty()).then_some((i + 1, l))
        })
        .collect()
}
