//! Hybrid automata, their composition into closed networks, and states.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::expr::{Env, EvalError, Expr, Slot};

pub type ChannelId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComposeError {
    #[error("network has no components")]
    Empty,
    #[error("continuous variable `{var}` is shared by components {first} and {second}")]
    SharedVariable {
        var: String,
        first: String,
        second: String,
    },
    #[error("action `{action}` is output by both {first} and {second}")]
    OutputClash {
        action: String,
        first: String,
        second: String,
    },
    #[error("action `{0}` is not output by any component")]
    UncoveredAction(String),
    #[error("component {component} uses action `{action}` both as input and output")]
    InputOutputOverlap { component: String, action: String },
    #[error("component {component} gives a rate to `{var}`, which it does not own")]
    ForeignRate { component: String, var: String },
    #[error("component {component} has a malformed structure: {reason}")]
    Malformed { component: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Clock,
    Discrete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub kind: VarKind,
    pub initial: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Channel {
    pub name: String,
    pub urgent: bool,
}

/// Global declarations shared by all components: the flat variable table
/// and the channel alphabet.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Declarations {
    pub vars: Vec<VarDecl>,
    pub channels: Vec<Channel>,
}

impl Declarations {
    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, initial: f64) -> Slot {
        self.vars.push(VarDecl {
            name: name.into(),
            kind,
            initial,
        });
        self.vars.len() - 1
    }

    pub fn add_channel(&mut self, name: impl Into<String>, urgent: bool) -> ChannelId {
        self.channels.push(Channel {
            name: name.into(),
            urgent,
        });
        self.channels.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sync {
    Output(ChannelId),
    Input(ChannelId),
    /// Private output not visible to other components.
    Internal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assign {
    pub target: Expr,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub weight: Expr,
    pub updates: Vec<Assign>,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub guard: Option<Expr>,
    pub sync: Sync,
    pub branches: Vec<Branch>,
    /// Stay-put loop added to make a component input-enabled.
    pub implicit: bool,
    /// Fires as soon as its guard holds.
    pub urgent: bool,
}

impl Edge {
    pub fn is_output(&self) -> bool {
        !matches!(self.sync, Sync::Input(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub name: String,
    pub invariant: Option<Expr>,
    /// Explicit derivatives; clocks not listed advance at rate 1.
    pub rates: Vec<(Slot, Expr)>,
    /// Exit rate used when the invariant does not bound the delay.
    pub exit_rate: Option<Expr>,
}

impl Location {
    pub fn new(name: impl Into<String>) -> Location {
        Location {
            name: name.into(),
            invariant: None,
            rates: Vec::new(),
            exit_rate: None,
        }
    }
}

/// A single hybrid automaton.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridAutomaton {
    pub name: String,
    pub locations: Vec<Location>,
    pub initial: usize,
    /// Continuous variables owned by this component.
    pub clocks: Vec<Slot>,
    pub edges: Vec<Edge>,
}

impl HybridAutomaton {
    pub fn outputs(&self) -> BTreeSet<ChannelId> {
        self.edges
            .iter()
            .filter_map(|e| match e.sync {
                Sync::Output(c) => Some(c),
                _ => None,
            })
            .collect()
    }

    pub fn inputs(&self) -> BTreeSet<ChannelId> {
        self.edges
            .iter()
            .filter_map(|e| match e.sync {
                Sync::Input(c) => Some(c),
                _ => None,
            })
            .collect()
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.name == name)
    }

    fn validate(&self, decls: &Declarations) -> Result<(), ComposeError> {
        let bad = |reason: String| ComposeError::Malformed {
            component: self.name.clone(),
            reason,
        };
        if self.initial >= self.locations.len() {
            return Err(bad("initial location out of range".into()));
        }
        for e in &self.edges {
            if e.source >= self.locations.len() {
                return Err(bad("edge source out of range".into()));
            }
            if e.branches.is_empty() {
                return Err(bad("edge without branches".into()));
            }
            if e.branches.iter().any(|b| b.target >= self.locations.len()) {
                return Err(bad("edge target out of range".into()));
            }
            if e.guard.as_ref().is_some_and(Expr::contains_random) {
                return Err(bad("random() in a guard".into()));
            }
        }
        for l in &self.locations {
            if l.invariant.as_ref().is_some_and(Expr::contains_random)
                || l.rates.iter().any(|(_, r)| r.contains_random())
            {
                return Err(bad(format!("random() in location {}", l.name)));
            }
        }
        if let Some(&c) = self.outputs().intersection(&self.inputs()).next() {
            return Err(ComposeError::InputOutputOverlap {
                component: self.name.clone(),
                action: decls.channels[c].name.clone(),
            });
        }
        let own: BTreeSet<Slot> = self.clocks.iter().copied().collect();
        for l in &self.locations {
            for (slot, _) in &l.rates {
                if !own.contains(slot) {
                    return Err(ComposeError::ForeignRate {
                        component: self.name.clone(),
                        var: decls.vars[*slot].name.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Per-location edge lookup tables, precomputed at composition.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeIndex {
    /// `outputs[loc]`: output and internal edges leaving `loc`.
    pub outputs: Vec<Vec<usize>>,
    /// `urgent[loc]`: the urgent subset of `outputs[loc]`.
    pub urgent: Vec<Vec<usize>>,
    /// `inputs[loc][channel]`: input edges on `channel` leaving `loc`.
    pub inputs: Vec<BTreeMap<ChannelId, Vec<usize>>>,
}

/// A closed network of composable hybrid automata.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub decls: Declarations,
    pub components: Vec<HybridAutomaton>,
    /// `owner[channel]` is the unique component outputting it.
    pub owner: Vec<usize>,
    /// `clock_owner[slot]` for continuous variables that have an owner.
    pub clock_owner: Vec<Option<usize>>,
    pub edge_index: Vec<EdgeIndex>,
}

/// Validates composability and builds the network (parallel composition
/// under broadcast synchronization).
pub fn compose(
    decls: Declarations,
    components: Vec<HybridAutomaton>,
) -> Result<Network, ComposeError> {
    if components.is_empty() {
        return Err(ComposeError::Empty);
    }
    for c in &components {
        c.validate(&decls)?;
    }

    let mut clock_owner: Vec<Option<usize>> = vec![None; decls.vars.len()];
    for (j, c) in components.iter().enumerate() {
        for &slot in &c.clocks {
            if let Some(k) = clock_owner[slot] {
                if k != j {
                    return Err(ComposeError::SharedVariable {
                        var: decls.vars[slot].name.clone(),
                        first: components[k].name.clone(),
                        second: c.name.clone(),
                    });
                }
            }
            clock_owner[slot] = Some(j);
        }
    }

    let mut owner: Vec<Option<usize>> = vec![None; decls.channels.len()];
    for (j, c) in components.iter().enumerate() {
        for a in c.outputs() {
            if let Some(k) = owner[a] {
                return Err(ComposeError::OutputClash {
                    action: decls.channels[a].name.clone(),
                    first: components[k].name.clone(),
                    second: c.name.clone(),
                });
            }
            owner[a] = Some(j);
        }
    }
    let owner = owner
        .into_iter()
        .enumerate()
        .map(|(a, o)| o.ok_or_else(|| ComposeError::UncoveredAction(decls.channels[a].name.clone())))
        .collect::<Result<Vec<_>, _>>()?;

    let edge_index = components
        .iter()
        .map(|c| {
            let n = c.locations.len();
            let mut idx = EdgeIndex {
                outputs: vec![Vec::new(); n],
                urgent: vec![Vec::new(); n],
                inputs: vec![BTreeMap::new(); n],
            };
            for (i, e) in c.edges.iter().enumerate() {
                match e.sync {
                    Sync::Input(ch) => idx.inputs[e.source].entry(ch).or_default().push(i),
                    Sync::Output(_) | Sync::Internal => {
                        idx.outputs[e.source].push(i);
                        if e.urgent {
                            idx.urgent[e.source].push(i);
                        }
                    }
                }
            }
            idx
        })
        .collect();

    Ok(Network {
        decls,
        components,
        owner,
        clock_owner,
        edge_index,
    })
}

/// A network state: one location per component plus a global valuation.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub locations: Vec<usize>,
    pub vars: Vec<f64>,
    pub time: f64,
}

impl State {
    pub fn env(&self) -> Env<'_> {
        Env {
            vars: &self.vars,
            locations: &self.locations,
            time: self.time,
        }
    }
}

impl Network {
    pub fn initial_state(&self) -> State {
        State {
            locations: self.components.iter().map(|c| c.initial).collect(),
            vars: self.decls.vars.iter().map(|v| v.initial).collect(),
            time: 0.0,
        }
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    pub fn channel_index(&self, name: &str) -> Option<ChannelId> {
        self.decls.channels.iter().position(|c| c.name == name)
    }

    /// Current derivative of every variable: the owner's explicit rate in
    /// its current location, 1 for other clocks and 0 for discrete variables.
    pub fn rates(&self, state: &State) -> Result<Vec<f64>, EvalError> {
        let mut out: Vec<f64> = self
            .decls
            .vars
            .iter()
            .map(|v| match v.kind {
                VarKind::Clock => 1.0,
                VarKind::Discrete => 0.0,
            })
            .collect();
        self.rates_into(state, &mut out)?;
        Ok(out)
    }

    /// Overwrites `out` with explicit rates; `out` must already hold the
    /// defaults (see [`Network::default_rates`]).
    pub fn rates_into(&self, state: &State, out: &mut [f64]) -> Result<(), EvalError> {
        let env = state.env();
        for (j, c) in self.components.iter().enumerate() {
            for (slot, rate) in &c.locations[state.locations[j]].rates {
                out[*slot] = rate.eval(&env)?;
            }
        }
        Ok(())
    }

    pub fn default_rates(&self) -> Vec<f64> {
        self.decls
            .vars
            .iter()
            .map(|v| match v.kind {
                VarKind::Clock => 1.0,
                VarKind::Discrete => 0.0,
            })
            .collect()
    }

    /// Slots whose default rate is overridden by some location, so
    /// [`Network::rates_into`] needs a reset before reuse.
    pub fn rated_slots(&self) -> Vec<Slot> {
        let mut s: BTreeSet<Slot> = BTreeSet::new();
        for c in &self.components {
            for l in &c.locations {
                s.extend(l.rates.iter().map(|(slot, _)| *slot));
            }
        }
        s.into_iter().collect()
    }

    /// The conjunction of the components' current location invariants.
    pub fn invariant_holds(&self, state: &State) -> Result<bool, EvalError> {
        let env = state.env();
        for (j, c) in self.components.iter().enumerate() {
            if let Some(inv) = &c.locations[state.locations[j]].invariant {
                if !inv.holds(&env)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}
