//! Random run generation.
//!
//! Every component samples a delay from its [`DelayDistribution`] and an
//! integrator pseudo-component proposes the fixed step `dt`; the smallest
//! delay wins. Continuous variables advance by an Euler step over the
//! winning delay, then everybody races again. Re-racing after each step is
//! exact for exponential delays (memorylessness) and for uniform delays
//! (a uniform delay conditioned on not having fired yet is uniform on the
//! remaining window).

use std::ops::ControlFlow;

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::expr::{Env, EvalError, Slot};
use crate::model::{Network, State, Sync};
use crate::query::{Bound, Observable};

mod distribution;

pub use distribution::{argmin_uniform, DelayDistribution};

/// Relative slack when checking a guard at a localized crossing.
pub const GUARD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("at time {time}: {source}")]
    Eval { time: f64, source: EvalError },
    #[error("at time {time}: `{var}` is not finite")]
    NonFinite { var: String, time: f64 },
    #[error("at time {time}: invariant of {component}.{location} is violated")]
    InvariantAlreadyViolated {
        component: String,
        location: String,
        time: f64,
    },
    #[error("at time {time}: branch weights of an edge of {component} do not sum to a positive number")]
    BadWeights { component: String, time: f64 },
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Integrator step.
    pub dt: f64,
    /// Transitions allowed without time advancing before a run is aborted.
    pub zeno_cap: u64,
    /// Time advance that counts as progress for the Zeno check.
    pub zeno_epsilon: f64,
    /// Time limit for runs bounded by steps or cost.
    pub time_cap: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.01,
            zeno_cap: 10_000,
            zeno_epsilon: 1e-9,
            time_cap: 1e6,
        }
    }
}

impl SimConfig {
    pub fn with_dt(dt: f64) -> SimConfig {
        SimConfig {
            dt,
            ..SimConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    Integrator,
    Component(usize),
}

/// Result of one race.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaceOutcome {
    pub winner: Winner,
    pub delay: f64,
    /// Output edge the winner takes, if any guard holds after the delay.
    pub edge: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The bound was reached.
    Bound,
    /// Too many transitions without time advancing.
    ZenoAbort,
    /// An observer asked to stop.
    EarlyStop,
    /// A step or cost bound was not reached before the time cap.
    TimeCap,
}

/// A discrete transition as seen by observers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub component: usize,
    pub sync: Sync,
}

/// Receives the states of a run as it is generated.
pub trait Observer {
    /// Called at time 0, after every integrator step, and before and after
    /// every discrete transition.
    fn sample(&mut self, state: &State) -> Result<ControlFlow<()>, EvalError>;

    fn event(&mut self, _event: &Event) {}
}

/// Observer that ignores everything.
pub struct NoObserver;

impl Observer for NoObserver {
    fn sample(&mut self, _: &State) -> Result<ControlFlow<()>, EvalError> {
        Ok(ControlFlow::Continue(()))
    }
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub termination: Termination,
    pub transitions: u64,
    pub end_time: f64,
    pub state: State,
}

/// A recorded event with names resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct RunEvent {
    pub time: f64,
    pub action: String,
    pub component: String,
}

/// A bounded run: sampled observables plus discrete events.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub columns: Vec<Observable>,
    pub times: Vec<f64>,
    /// One row per sample, one value per column.
    pub values: Vec<Vec<f64>>,
    pub events: Vec<RunEvent>,
    pub termination: Termination,
}

impl Run {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c.name == name)?;
        Some(self.values.iter().map(|r| r[i]).collect())
    }
}

/// Records observables at every sample.
pub struct Recorder<'a> {
    network: &'a Network,
    columns: &'a [Observable],
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    events: Vec<RunEvent>,
}

impl<'a> Recorder<'a> {
    pub fn new(network: &'a Network, columns: &'a [Observable]) -> Recorder<'a> {
        Recorder {
            network,
            columns,
            times: Vec::new(),
            values: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn finish(self, termination: Termination) -> Run {
        Run {
            columns: self.columns.to_vec(),
            times: self.times,
            values: self.values,
            events: self.events,
            termination,
        }
    }
}

impl Observer for Recorder<'_> {
    fn sample(&mut self, state: &State) -> Result<ControlFlow<()>, EvalError> {
        let env = state.env();
        let row = self
            .columns
            .iter()
            .map(|c| c.expr.eval(&env))
            .collect::<Result<Vec<_>, _>>()?;
        self.times.push(state.time);
        self.values.push(row);
        Ok(ControlFlow::Continue(()))
    }

    fn event(&mut self, e: &Event) {
        self.events.push(RunEvent {
            time: e.time,
            action: action_name(self.network, e.sync),
            component: self.network.components[e.component].name.clone(),
        });
    }
}

pub fn action_name(network: &Network, sync: Sync) -> String {
    match sync {
        Sync::Output(c) | Sync::Input(c) => network.decls.channels[c].name.clone(),
        Sync::Internal => "tau".to_string(),
    }
}

/// Pointwise `x + dt * r`.
pub fn euler_step(vars: &mut [f64], rates: &[f64], dt: f64) {
    for (x, r) in vars.iter_mut().zip(rates) {
        if *r != 0.0 {
            *x += dt * r;
        }
    }
}

/// Generates runs of a network.
#[derive(Debug, Clone)]
pub struct Simulator<'n> {
    network: &'n Network,
    config: SimConfig,
    defaults: Vec<f64>,
}

/// Per-race scratch state.
struct Scratch {
    rates: Vec<f64>,
    later: Vec<f64>,
    delays: Vec<f64>,
    dists: Vec<DelayDistribution>,
}

impl<'n> Simulator<'n> {
    pub fn new(network: &'n Network, config: SimConfig) -> Result<Simulator<'n>, EngineError> {
        if !(config.dt > 0.0 && config.dt.is_finite()) {
            return Err(EngineError::InvalidStep(config.dt));
        }
        Ok(Simulator {
            network,
            config,
            defaults: network.default_rates(),
        })
    }

    pub fn network(&self) -> &'n Network {
        self.network
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    fn scratch(&self) -> Scratch {
        let n = self.network.decls.vars.len();
        Scratch {
            rates: vec![0.0; n],
            later: vec![0.0; n],
            delays: vec![0.0; self.network.components.len() + 1],
            dists: vec![DelayDistribution::Never; self.network.components.len()],
        }
    }

    fn eval_err(time: f64) -> impl Fn(EvalError) -> EngineError {
        move |source| EngineError::Eval { time, source }
    }

    /// Current derivatives of all variables.
    pub fn rates(&self, state: &State) -> Result<Vec<f64>, EngineError> {
        self.network.rates(state).map_err(Self::eval_err(state.time))
    }

    /// The delay distribution of component `j` in `state`, given the
    /// valuation `later` extrapolated over the horizon `h` under the
    /// current rates.
    pub fn delay_distribution(
        &self,
        j: usize,
        state: &State,
        later: &[f64],
        h: f64,
        max_rate: f64,
    ) -> Result<DelayDistribution, EngineError> {
        let err = Self::eval_err(state.time);
        let net = self.network;
        let comp = &net.components[j];
        let l = state.locations[j];
        let idx = &net.edge_index[j];
        let now = state.env();
        let then = Env {
            vars: later,
            locations: &state.locations,
            time: state.time + h,
        };

        // Urgent edges fire as soon as their guard holds.
        let mut urgent_at = f64::INFINITY;
        for &e in &idx.urgent[l] {
            let t = match &comp.edges[e].guard {
                None => 0.0,
                Some(g) if g.holds_within(&now, GUARD_TOLERANCE).map_err(&err)? => 0.0,
                Some(g) => match g.window(&now, &then, h).map_err(&err)? {
                    Some(w) => w.lo,
                    None => f64::INFINITY,
                },
            };
            urgent_at = urgent_at.min(t);
        }
        if urgent_at <= h {
            return Ok(DelayDistribution::Dirac(urgent_at));
        }

        // Earliest delay after which some output guard may hold.
        let mut lower = f64::INFINITY;
        for &e in &idx.outputs[l] {
            let edge = &comp.edges[e];
            if edge.urgent {
                continue;
            }
            let t = match &edge.guard {
                None => 0.0,
                Some(g) if g.holds(&now).map_err(&err)? => 0.0,
                Some(g) => match g.window(&now, &then, h).map_err(&err)? {
                    Some(w) => w.lo,
                    None => f64::INFINITY,
                },
            };
            lower = lower.min(t);
        }

        let loc = &comp.locations[l];
        let mut exit = f64::INFINITY;
        if let Some(inv) = &loc.invariant {
            let tol = h * max_rate.max(1.0);
            if !inv.holds_within(&now, tol).map_err(&err)? {
                return Err(EngineError::InvariantAlreadyViolated {
                    component: comp.name.clone(),
                    location: loc.name.clone(),
                    time: state.time,
                });
            }
            exit = match inv.window(&now, &then, h).map_err(&err)? {
                Some(w) if w.lo <= 0.0 => w.hi,
                _ => 0.0,
            };
        }

        if lower.is_infinite() {
            return Ok(DelayDistribution::Never);
        }
        if exit.is_finite() {
            return Ok(DelayDistribution::Uniform {
                lo: lower.min(exit),
                hi: exit,
            });
        }
        if let Some(rate) = &loc.exit_rate {
            let r = rate.eval(&now).map_err(&err)?;
            if !r.is_finite() {
                return Err(EngineError::NonFinite {
                    var: format!("exit rate of {}.{}", comp.name, loc.name),
                    time: state.time,
                });
            }
            if r > 0.0 {
                return Ok(DelayDistribution::Exponential {
                    rate: r,
                    offset: lower,
                });
            }
        }
        Ok(DelayDistribution::Never)
    }

    /// Output edges of `j` enabled in `env`; only urgent ones if `urgent`.
    fn enabled_outputs(
        &self,
        j: usize,
        env: &Env,
        urgent: bool,
    ) -> Result<Vec<usize>, EvalError> {
        let comp = &self.network.components[j];
        let l = env.locations[j];
        let list = if urgent {
            &self.network.edge_index[j].urgent[l]
        } else {
            &self.network.edge_index[j].outputs[l]
        };
        let mut out = Vec::new();
        for &e in list {
            let ok = match &comp.edges[e].guard {
                None => true,
                Some(g) => g.holds_within(env, GUARD_TOLERANCE)?,
            };
            if ok {
                out.push(e);
            }
        }
        Ok(out)
    }

    fn race_with(
        &self,
        state: &State,
        h: f64,
        s: &mut Scratch,
        rng: &mut dyn RngCore,
    ) -> Result<RaceOutcome, EngineError> {
        let n = self.network.components.len();
        s.later.copy_from_slice(&state.vars);
        euler_step(&mut s.later, &s.rates, h);
        let max_rate = s.rates.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        for j in 0..n {
            s.dists[j] = self.delay_distribution(j, state, &s.later, h, max_rate)?;
            s.delays[j] = s.dists[j].sample(rng);
        }
        s.delays[n] = h;
        let w = argmin_uniform(&s.delays, rng).unwrap_or(n);
        let delay = s.delays[w];
        if w == n {
            return Ok(RaceOutcome {
                winner: Winner::Integrator,
                delay,
                edge: None,
            });
        }
        // Guards are checked in the state reached after the delay.
        s.later.copy_from_slice(&state.vars);
        euler_step(&mut s.later, &s.rates, delay);
        let env = Env {
            vars: &s.later,
            locations: &state.locations,
            time: state.time + delay,
        };
        let urgent = matches!(s.dists[w], DelayDistribution::Dirac(_))
            && !self.network.edge_index[w].urgent[state.locations[w]].is_empty();
        let mut enabled = self
            .enabled_outputs(w, &env, urgent)
            .map_err(Self::eval_err(env.time))?;
        if enabled.is_empty() && urgent {
            enabled = self
                .enabled_outputs(w, &env, false)
                .map_err(Self::eval_err(env.time))?;
        }
        let edge = match enabled.len() {
            0 => None,
            1 => Some(enabled[0]),
            k => Some(enabled[rng.random_range(0..k)]),
        };
        Ok(RaceOutcome {
            winner: Winner::Component(w),
            delay,
            edge,
        })
    }

    /// One race from `state` with a positive, finite integrator step `h`.
    pub fn race(
        &self,
        state: &State,
        h: f64,
        rng: &mut dyn RngCore,
    ) -> Result<RaceOutcome, EngineError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(EngineError::InvalidStep(h));
        }
        let mut s = self.scratch();
        s.rates = self.rates(state)?;
        self.race_with(state, h, &mut s, rng)
    }

    /// Advances `state` by the outcome's delay and performs the winner's
    /// transition, if any. Returns the fired event.
    pub fn fire(
        &self,
        state: &mut State,
        outcome: &RaceOutcome,
        rng: &mut dyn RngCore,
    ) -> Result<Option<Event>, EngineError> {
        let rates = self.rates(state)?;
        self.advance(state, &rates, outcome.delay)?;
        self.transition(state, outcome, rng)
    }

    fn advance(&self, state: &mut State, rates: &[f64], d: f64) -> Result<(), EngineError> {
        euler_step(&mut state.vars, rates, d);
        state.time += d;
        self.check_finite(state)
    }

    fn check_finite(&self, state: &State) -> Result<(), EngineError> {
        if let Some(i) = state.vars.iter().position(|x| !x.is_finite()) {
            return Err(EngineError::NonFinite {
                var: self.network.decls.vars[i].name.clone(),
                time: state.time,
            });
        }
        Ok(())
    }

    fn pick_branch(
        &self,
        j: usize,
        edge: usize,
        env: &Env,
        rng: &mut dyn RngCore,
    ) -> Result<usize, EngineError> {
        let comp = &self.network.components[j];
        let branches = &comp.edges[edge].branches;
        if branches.len() == 1 {
            return Ok(0);
        }
        let weights = branches
            .iter()
            .map(|b| b.weight.eval(env))
            .collect::<Result<Vec<_>, _>>()
            .map_err(Self::eval_err(env.time))?;
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) || weights.iter().any(|w| *w < 0.0) {
            return Err(EngineError::BadWeights {
                component: comp.name.clone(),
                time: env.time,
            });
        }
        let mut u = rng.random::<f64>() * total;
        for (i, w) in weights.iter().enumerate() {
            if u < *w {
                return Ok(i);
            }
            u -= w;
        }
        Ok(weights.iter().rposition(|w| *w > 0.0).unwrap_or(0))
    }

    fn transition(
        &self,
        state: &mut State,
        outcome: &RaceOutcome,
        rng: &mut dyn RngCore,
    ) -> Result<Option<Event>, EngineError> {
        let (Winner::Component(j), Some(edge)) = (outcome.winner, outcome.edge) else {
            return Ok(None);
        };
        let net = self.network;
        let time = state.time;
        let err = Self::eval_err(time);
        let sync = net.components[j].edges[edge].sync;

        // (component, edge, branch), sender first, receivers in order.
        let mut moves: Vec<(usize, usize, usize)> = Vec::new();
        {
            let env = state.env();
            moves.push((j, edge, self.pick_branch(j, edge, &env, rng)?));
            if let Sync::Output(ch) = sync {
                for k in (0..net.components.len()).filter(|&k| k != j) {
                    let comp = &net.components[k];
                    let Some(cands) = net.edge_index[k].inputs[state.locations[k]].get(&ch) else {
                        continue;
                    };
                    let mut enabled = Vec::new();
                    for &e in cands {
                        let ed = &comp.edges[e];
                        if ed.implicit {
                            continue;
                        }
                        let ok = match &ed.guard {
                            None => true,
                            Some(g) => g.holds_within(&env, GUARD_TOLERANCE).map_err(&err)?,
                        };
                        if ok {
                            enabled.push(e);
                        }
                    }
                    let e = match enabled.len() {
                        0 => continue,
                        1 => enabled[0],
                        n => enabled[rng.random_range(0..n)],
                    };
                    moves.push((k, e, self.pick_branch(k, e, &env, rng)?));
                }
            }
        }

        for &(k, e, b) in &moves {
            let branch = &net.components[k].edges[e].branches[b];
            for a in &branch.updates {
                let env = state.env();
                let value = a.value.eval_with(&env, rng).map_err(&err)?;
                let slot: Option<Slot> = a.target.cell(&env).map_err(&err)?;
                if let Some(slot) = slot {
                    state.vars[slot] = value;
                }
            }
        }
        for &(k, e, b) in &moves {
            state.locations[k] = net.components[k].edges[e].branches[b].target;
        }
        self.check_finite(state)?;
        Ok(Some(Event {
            time,
            component: j,
            sync,
        }))
    }

    /// Generates one run until `bound`, feeding every sample to `observer`.
    pub fn simulate(
        &self,
        bound: &Bound,
        rng: &mut dyn RngCore,
        observer: &mut dyn Observer,
    ) -> Result<Outcome, EngineError> {
        let mut state = self.network.initial_state();
        let mut s = self.scratch();
        let mut transitions = 0u64;
        let mut zeno_anchor = 0.0;
        let mut zeno_count = 0u64;
        let eps = 1e-12;

        macro_rules! sample {
            () => {
                if observer
                    .sample(&state)
                    .map_err(Self::eval_err(state.time))?
                    .is_break()
                {
                    return Ok(self.outcome(Termination::EarlyStop, transitions, state));
                }
            };
        }
        self.check_finite(&state)?;
        sample!();

        loop {
            let mut h = self.config.dt;
            match *bound {
                Bound::Time(t) => {
                    let left = t - state.time;
                    if left <= eps * t.max(1.0) {
                        return Ok(self.outcome(Termination::Bound, transitions, state));
                    }
                    h = h.min(left);
                }
                Bound::Steps(k) => {
                    if transitions >= k {
                        return Ok(self.outcome(Termination::Bound, transitions, state));
                    }
                }
                Bound::Cost { slot, limit } => {
                    if state.vars[slot] >= limit {
                        return Ok(self.outcome(Termination::Bound, transitions, state));
                    }
                }
            }
            if !matches!(bound, Bound::Time(_)) && state.time >= self.config.time_cap {
                return Ok(self.outcome(Termination::TimeCap, transitions, state));
            }

            s.rates.copy_from_slice(&self.defaults);
            self.network
                .rates_into(&state, &mut s.rates)
                .map_err(Self::eval_err(state.time))?;
            let outcome = self.race_with(&state, h, &mut s, rng)?;

            // A cost bound may be reached within the delay.
            if let Bound::Cost { slot, limit } = *bound {
                let r = s.rates[slot];
                if r > 0.0 {
                    let dc = (limit - state.vars[slot]) / r;
                    if dc < outcome.delay {
                        self.advance(&mut state, &s.rates, dc)?;
                        state.vars[slot] = limit;
                        sample!();
                        return Ok(self.outcome(Termination::Bound, transitions, state));
                    }
                }
            }

            let rates = std::mem::take(&mut s.rates);
            let res = self.advance(&mut state, &rates, outcome.delay);
            s.rates = rates;
            res?;
            if let (Bound::Time(t), Winner::Integrator) = (bound, outcome.winner) {
                if (state.time - t).abs() <= eps * t.max(1.0) {
                    state.time = *t;
                }
            }

            if outcome.winner == Winner::Integrator {
                sample!();
                continue;
            }

            if state.time - zeno_anchor < self.config.zeno_epsilon {
                zeno_count += 1;
                if zeno_count > self.config.zeno_cap {
                    return Ok(self.outcome(Termination::ZenoAbort, transitions, state));
                }
            } else {
                zeno_anchor = state.time;
                zeno_count = 1;
            }

            if outcome.edge.is_none() {
                sample!();
                continue;
            }
            sample!();
            if let Some(ev) = self.transition(&mut state, &outcome, rng)? {
                transitions += 1;
                observer.event(&ev);
            }
            sample!();
        }
    }

    fn outcome(&self, termination: Termination, transitions: u64, state: State) -> Outcome {
        Outcome {
            termination,
            transitions,
            end_time: state.time,
            state,
        }
    }

    /// Generates one run and records `columns` along it.
    pub fn record(
        &self,
        bound: &Bound,
        columns: &[Observable],
        rng: &mut dyn RngCore,
    ) -> Result<Run, EngineError> {
        let mut rec = Recorder::new(self.network, columns);
        let out = self.simulate(bound, rng, &mut rec)?;
        Ok(rec.finish(out.termination))
    }
}
