//! Queries with every identifier resolved against a model.

use std::fmt;

use crate::dsl::ast::{Extremum, Relation};
use crate::expr::{Expr, Slot};

/// How long a run lasts.
#[derive(Debug, Clone, PartialEq)]
pub enum Bound {
    /// Until global time reaches the limit.
    Time(f64),
    /// Until this many discrete transitions have been taken.
    Steps(u64),
    /// Until the variable in `slot` first reaches `limit`.
    Cost { slot: Slot, limit: f64 },
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Time(t) => write!(f, "<={t}"),
            Bound::Steps(k) => write!(f, "#<={k}"),
            Bound::Cost { slot, limit } => write!(f, "${slot}<={limit}"),
        }
    }
}

/// A named expression recorded along a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    pub name: String,
    pub expr: Expr,
}

/// Path formula over state predicates.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    State(Expr),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
    Until(Box<Formula>, Box<Formula>, f64),
}

impl Formula {
    pub fn state(e: Expr) -> Formula {
        Formula::State(e)
    }

    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn eventually(a: Formula) -> Formula {
        Formula::Eventually(Box::new(a))
    }

    pub fn always(a: Formula) -> Formula {
        Formula::Always(Box::new(a))
    }

    pub fn until(a: Formula, b: Formula, bound: f64) -> Formula {
        Formula::Until(Box::new(a), Box::new(b), bound)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundQuery {
    Simulate {
        runs: u64,
        bound: Bound,
        observables: Vec<Observable>,
    },
    Probability {
        bound: Bound,
        formula: Formula,
    },
    Hypothesis {
        bound: Bound,
        formula: Formula,
        relation: Relation,
        threshold: f64,
    },
    Compare {
        left: (Bound, Formula),
        relation: Relation,
        right: (Bound, Formula),
    },
    Value {
        bound: Bound,
        runs: u64,
        extremum: Extremum,
        observable: Observable,
    },
    /// Gaps between consecutive matches of a pattern, measured in time.
    Distance {
        bound: Bound,
        runs: u64,
        clock: String,
        pattern: Formula,
    },
}
