//! Statistical model checking: probability estimation, sequential
//! hypothesis testing, comparison of probabilities and value estimation.
//!
//! Run `i` of a query always uses random stream `i` of the seed, so
//! results do not depend on the number of workers. Sequential tests
//! consume runs in index order.

use std::fmt;
use std::ops::ControlFlow;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dsl::ast::{Extremum, Relation};
use crate::engine::{EngineError, Observer, Run, SimConfig, Simulator, Termination};
use crate::expr::{EvalError, Expr};
use crate::model::{Network, State};
use crate::monitor::{peak_distance, MonitorError, PathFormula, TraceMonitor};
use crate::output::{default_width, histogram, Histogram, OutputError};
use crate::query::{Bound, BoundQuery, Formula, Observable};
use crate::rng::run_rng;

#[derive(Debug, Error)]
pub enum SmcError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("invalid parameter: {0}")]
    Params(String),
    #[error("no decision after {0} runs")]
    MaxRunsExceeded(u64),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

/// Statistical and execution parameters shared by all queries.
#[derive(Debug, Clone)]
pub struct SmcConfig {
    pub sim: SimConfig,
    pub seed: u64,
    pub workers: usize,
    /// Half-width of estimated intervals.
    pub eps: f64,
    /// Probability of a wrong interval, or of a false rejection.
    pub alpha: f64,
    /// Probability of a false acceptance.
    pub beta: f64,
    /// Half-width of the indifference region of tests.
    pub delta: f64,
    /// Cap on runs (rounds for comparisons) of sequential tests.
    pub max_runs: u64,
    /// Histogram bucket width; chosen from the data when absent.
    pub hist_width: Option<f64>,
    /// Set to stop early; the result is then marked incomplete.
    pub cancel: Option<Arc<AtomicBool>>,
}

impl Default for SmcConfig {
    fn default() -> Self {
        SmcConfig {
            sim: SimConfig::default(),
            seed: 0,
            workers: 1,
            eps: 0.05,
            alpha: 0.05,
            beta: 0.05,
            delta: 0.01,
            max_runs: 1_000_000,
            hist_width: None,
            cancel: None,
        }
    }
}

impl SmcConfig {
    pub fn validate(&self) -> Result<(), SmcError> {
        let unit = |name: &str, x: f64| {
            if x > 0.0 && x < 1.0 {
                Ok(())
            } else {
                Err(SmcError::Params(format!("{name} must lie in (0, 1), got {x}")))
            }
        };
        unit("eps", self.eps)?;
        unit("alpha", self.alpha)?;
        unit("beta", self.beta)?;
        unit("delta", self.delta)?;
        if self.workers == 0 {
            return Err(SmcError::Params("at least one worker is needed".into()));
        }
        if self.max_runs == 0 {
            return Err(SmcError::Params("max runs must be positive".into()));
        }
        if let Some(w) = self.hist_width {
            if !(w > 0.0 && w.is_finite()) {
                return Err(SmcError::Params(format!("histogram width must be positive, got {w}")));
            }
        }
        Ok(())
    }
}

/// Runs needed for an interval of half-width `eps` holding with
/// probability `1 - alpha` (Chernoff-Hoeffding).
pub fn required_runs(eps: f64, alpha: f64) -> u64 {
    ((2.0 / alpha).ln() / (2.0 * eps * eps)).ceil() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Accept,
    Reject,
    /// The run cap was reached without a decision.
    Indifferent,
    /// Cancelled before a decision.
    Undecided,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Accept => "accept",
            Decision::Reject => "reject",
            Decision::Indifferent => "indifferent",
            Decision::Undecided => "undecided",
        })
    }
}

/// Wald's sequential probability ratio test of `p >= theta + delta`
/// against `p <= theta - delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sprt {
    llr: f64,
    ln_a: f64,
    ln_b: f64,
    on_success: f64,
    on_failure: f64,
    runs: u64,
}

impl Sprt {
    pub fn new(theta: f64, delta: f64, alpha: f64, beta: f64) -> Result<Sprt, SmcError> {
        let (p0, p1) = (theta + delta, theta - delta);
        if !(p1 > 0.0 && p0 < 1.0 && delta > 0.0) {
            return Err(SmcError::Params(format!(
                "indifference region [{p1}, {p0}] must lie strictly inside (0, 1)"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0) {
            return Err(SmcError::Params("alpha and beta must lie in (0, 1)".into()));
        }
        Ok(Sprt {
            llr: 0.0,
            ln_a: ((1.0 - beta) / alpha).ln(),
            ln_b: (beta / (1.0 - alpha)).ln(),
            on_success: (p1 / p0).ln(),
            on_failure: ((1.0 - p1) / (1.0 - p0)).ln(),
            runs: 0,
        })
    }

    /// Rejection and acceptance thresholds `(A, B)` on the likelihood ratio.
    pub fn thresholds(&self) -> (f64, f64) {
        (self.ln_a.exp(), self.ln_b.exp())
    }

    /// Log likelihood ratio of `theta - delta` to `theta + delta` so far.
    pub fn log_ratio(&self) -> f64 {
        self.llr
    }

    pub fn runs(&self) -> u64 {
        self.runs
    }

    /// Adds one outcome; returns the decision once reached.
    pub fn observe(&mut self, success: bool) -> Option<Decision> {
        self.runs += 1;
        self.llr += if success {
            self.on_success
        } else {
            self.on_failure
        };
        if self.llr <= self.ln_b {
            Some(Decision::Accept)
        } else if self.llr >= self.ln_a {
            Some(Decision::Reject)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Interval {
        lo: f64,
        hi: f64,
        estimate: f64,
        successes: u64,
    },
    Verdict {
        verdict: Decision,
    },
    Value {
        extremum: String,
        mean: f64,
        histogram: Histogram,
    },
    Distance {
        gaps: u64,
        mean: Option<f64>,
        mode: Option<f64>,
        histogram: Option<Histogram>,
    },
}

/// Outcome of a statistical query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatResult {
    pub query: String,
    #[serde(flatten)]
    pub payload: Payload,
    /// Simulated runs.
    pub runs: u64,
    pub seed: u64,
    /// False when the query was cancelled before finishing.
    pub complete: bool,
    /// Runs aborted for taking too many instantaneous transitions.
    pub zeno_aborts: u64,
    /// Seconds; kept out of serialized summaries so they are reproducible.
    #[serde(skip)]
    pub wall_time: f64,
}

impl StatResult {
    /// Whether a hypothesis or comparison was rejected.
    pub fn rejected(&self) -> bool {
        matches!(
            self.payload,
            Payload::Verdict {
                verdict: Decision::Reject
            }
        )
    }
}

impl fmt::Display for StatResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.payload {
            Payload::Interval {
                lo, hi, estimate, ..
            } => write!(f, "interval=[{lo},{hi}] estimate={estimate}")?,
            Payload::Verdict { verdict } => write!(f, "verdict={verdict}")?,
            Payload::Value {
                extremum, mean, ..
            } => write!(f, "{extremum}_mean={mean}")?,
            Payload::Distance { gaps, mean, mode, .. } => {
                write!(f, "gaps={gaps}")?;
                if let (Some(mean), Some(mode)) = (mean, mode) {
                    write!(f, " mean={mean} mode={mode}")?;
                }
            }
        }
        write!(f, " runs={} seed={}", self.runs, self.seed)?;
        if self.zeno_aborts > 0 {
            write!(f, " zeno_aborts={}", self.zeno_aborts)?;
        }
        if !self.complete {
            f.write_str(" incomplete")?;
        }
        Ok(())
    }
}

/// Worker pool plus cancellation flag.
struct Exec<'c> {
    pool: rayon::ThreadPool,
    workers: usize,
    cancel: Option<&'c AtomicBool>,
}

enum Stop {
    Decided,
    Exhausted,
    Cancelled,
}

impl<'c> Exec<'c> {
    fn new(cfg: &'c SmcConfig) -> Result<Exec<'c>, SmcError> {
        cfg.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| SmcError::Pool(e.to_string()))?;
        Ok(Exec {
            pool,
            workers: cfg.workers,
            cancel: cfg.cancel.as_deref(),
        })
    }

    fn cancelled(&self) -> bool {
        self.cancel.is_some_and(|c| c.load(Ordering::Relaxed))
    }

    /// Runs `f` on indices `0..n`; results come back in index order. The
    /// flag is false if the pool was cancelled part way.
    fn fixed<T, F>(&self, n: u64, f: F) -> Result<(Vec<T>, bool), SmcError>
    where
        T: Send,
        F: Fn(u64) -> Result<T, SmcError> + Sync,
    {
        let out: Vec<Option<Result<T, SmcError>>> = self.pool.install(|| {
            (0..n)
                .into_par_iter()
                .map(|i| (!self.cancelled()).then(|| f(i)))
                .collect()
        });
        let mut values = Vec::with_capacity(out.len());
        let mut complete = true;
        for r in out {
            match r {
                Some(r) => values.push(r?),
                None => complete = false,
            }
        }
        Ok((values, complete))
    }

    /// Feeds `consume` the results of `f(0), f(1), ...` in order until it
    /// breaks or `max` results were consumed. Runs are generated in
    /// parallel batches; results past the decision are discarded.
    fn sequential<T, F, C>(&self, max: u64, f: F, mut consume: C) -> Result<(u64, Stop), SmcError>
    where
        T: Send,
        F: Fn(u64) -> Result<T, SmcError> + Sync,
        C: FnMut(T) -> ControlFlow<()>,
    {
        let batch = (self.workers as u64 * 4).max(8);
        let mut consumed = 0;
        while consumed < max {
            if self.cancelled() {
                return Ok((consumed, Stop::Cancelled));
            }
            let end = (consumed + batch).min(max);
            let out: Vec<Result<T, SmcError>> =
                self.pool.install(|| (consumed..end).into_par_iter().map(&f).collect());
            for r in out {
                consumed += 1;
                if consume(r?).is_break() {
                    return Ok((consumed, Stop::Decided));
                }
            }
        }
        Ok((consumed, Stop::Exhausted))
    }
}

/// Satisfaction of one run; the second flag reports a Zeno abort, which
/// counts as not satisfied.
fn probability_run(
    sim: &Simulator,
    bound: &Bound,
    formula: &PathFormula,
    seed: u64,
    stream: u64,
) -> Result<(bool, bool), SmcError> {
    let mut rng = run_rng(seed, stream);
    let mut mon = TraceMonitor::new(formula);
    let out = sim.simulate(bound, &mut rng, &mut mon)?;
    if out.termination == Termination::ZenoAbort {
        return Ok((false, true));
    }
    mon.trace.complete = out.termination == Termination::Bound;
    Ok((mon.verdict().is_satisfied(), false))
}

fn finish(payload: Payload, runs: u64, cfg: &SmcConfig, complete: bool, zeno: u64, start: Instant) -> StatResult {
    StatResult {
        query: String::new(),
        payload,
        runs,
        seed: cfg.seed,
        complete,
        zeno_aborts: zeno,
        wall_time: start.elapsed().as_secs_f64(),
    }
}

/// Estimates `Pr[bound](formula)` to within `eps` with confidence
/// `1 - alpha`.
pub fn estimate_probability(
    network: &Network,
    bound: &Bound,
    formula: &Formula,
    cfg: &SmcConfig,
) -> Result<StatResult, SmcError> {
    let start = Instant::now();
    let exec = Exec::new(cfg)?;
    let sim = Simulator::new(network, cfg.sim)?;
    let pf = PathFormula::compile(formula)?;
    let n = required_runs(cfg.eps, cfg.alpha);
    let (outcomes, complete) = exec.fixed(n, |i| probability_run(&sim, bound, &pf, cfg.seed, i))?;
    let runs = outcomes.len() as u64;
    let successes = outcomes.iter().filter(|o| o.0).count() as u64;
    let zeno = outcomes.iter().filter(|o| o.1).count() as u64;
    let estimate = if runs == 0 {
        0.0
    } else {
        successes as f64 / runs as f64
    };
    let payload = Payload::Interval {
        lo: (estimate - cfg.eps).max(0.0),
        hi: (estimate + cfg.eps).min(1.0),
        estimate,
        successes,
    };
    Ok(finish(payload, runs, cfg, complete, zeno, start))
}

/// Tests `Pr[bound](formula) relation theta` with an SPRT.
pub fn hypothesis(
    network: &Network,
    bound: &Bound,
    formula: &Formula,
    relation: Relation,
    theta: f64,
    cfg: &SmcConfig,
) -> Result<StatResult, SmcError> {
    let start = Instant::now();
    let exec = Exec::new(cfg)?;
    let sim = Simulator::new(network, cfg.sim)?;
    let pf = PathFormula::compile(formula)?;
    // `p <= theta` is `1 - p >= 1 - theta` on negated outcomes.
    let flip = relation == Relation::Le;
    let theta = if flip { 1.0 - theta } else { theta };
    let mut sprt = Sprt::new(theta, cfg.delta, cfg.alpha, cfg.beta)?;
    let mut decision = Decision::Undecided;
    let mut zeno = 0;
    let (runs, stop) = exec.sequential(
        cfg.max_runs,
        |i| probability_run(&sim, bound, &pf, cfg.seed, i),
        |(sat, z)| {
            zeno += u64::from(z);
            match sprt.observe(sat != flip) {
                Some(d) => {
                    decision = d;
                    ControlFlow::Break(())
                }
                None => ControlFlow::Continue(()),
            }
        },
    )?;
    match stop {
        Stop::Exhausted => Err(SmcError::MaxRunsExceeded(runs)),
        Stop::Decided | Stop::Cancelled => Ok(finish(
            Payload::Verdict { verdict: decision },
            runs,
            cfg,
            matches!(stop, Stop::Decided),
            zeno,
            start,
        )),
    }
}

/// Tests `Pr[left] relation Pr[right]` without estimating either side:
/// paired runs whose outcomes differ are fed to an SPRT on the chance
/// that the left one is the success. Identical sides share their runs,
/// so every round ties and the cap is reached ("indifferent").
pub fn compare(
    network: &Network,
    left: (&Bound, &Formula),
    relation: Relation,
    right: (&Bound, &Formula),
    cfg: &SmcConfig,
) -> Result<StatResult, SmcError> {
    let start = Instant::now();
    let exec = Exec::new(cfg)?;
    let sim = Simulator::new(network, cfg.sim)?;
    let (left, right) = match relation {
        Relation::Ge => (left, right),
        Relation::Le => (right, left),
    };
    let same = left == right;
    let lf = PathFormula::compile(left.1)?;
    let rf = PathFormula::compile(right.1)?;
    let mut sprt = Sprt::new(0.5, cfg.delta, cfg.alpha, cfg.beta)?;
    let mut decision = Decision::Undecided;
    let mut zeno = 0;
    let (rounds, stop) = exec.sequential(
        cfg.max_runs,
        |r| {
            let a = probability_run(&sim, left.0, &lf, cfg.seed, 2 * r)?;
            let b = if same {
                a
            } else {
                probability_run(&sim, right.0, &rf, cfg.seed, 2 * r + 1)?
            };
            Ok((a, b))
        },
        |(a, b)| {
            zeno += u64::from(a.1) + u64::from(b.1 && !same);
            if a.0 == b.0 {
                return ControlFlow::Continue(());
            }
            match sprt.observe(a.0) {
                Some(d) => {
                    decision = d;
                    ControlFlow::Break(())
                }
                None => ControlFlow::Continue(()),
            }
        },
    )?;
    let verdict = match stop {
        Stop::Exhausted => Decision::Indifferent,
        _ => decision,
    };
    let runs = if same { rounds } else { 2 * rounds };
    Ok(finish(
        Payload::Verdict { verdict },
        runs,
        cfg,
        !matches!(stop, Stop::Cancelled),
        zeno,
        start,
    ))
}

/// Tracks the running extremum of an expression.
struct ExtremumObserver<'e> {
    expr: &'e Expr,
    max: bool,
    best: f64,
}

impl Observer for ExtremumObserver<'_> {
    fn sample(&mut self, state: &State) -> Result<ControlFlow<()>, EvalError> {
        let v = self.expr.eval(&state.env())?;
        self.best = if self.max {
            self.best.max(v)
        } else {
            self.best.min(v)
        };
        Ok(ControlFlow::Continue(()))
    }
}

/// Per-run extremum of `observable` over `runs` runs.
pub fn extrema(
    network: &Network,
    bound: &Bound,
    runs: u64,
    extremum: Extremum,
    observable: &Expr,
    cfg: &SmcConfig,
) -> Result<(Vec<f64>, bool, u64), SmcError> {
    let exec = Exec::new(cfg)?;
    let sim = Simulator::new(network, cfg.sim)?;
    let max = extremum == Extremum::Max;
    let (out, complete) = exec.fixed(runs, |i| {
        let mut obs = ExtremumObserver {
            expr: observable,
            max,
            best: if max {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            },
        };
        let mut rng = run_rng(cfg.seed, i);
        let out = sim.simulate(bound, &mut rng, &mut obs)?;
        Ok((obs.best, out.termination == Termination::ZenoAbort))
    })?;
    let zeno = out.iter().filter(|o| o.1).count() as u64;
    Ok((out.into_iter().map(|o| o.0).collect(), complete, zeno))
}

/// Mean and histogram of the per-run extremum of `observable`.
pub fn estimate_value(
    network: &Network,
    bound: &Bound,
    runs: u64,
    extremum: Extremum,
    observable: &Expr,
    cfg: &SmcConfig,
) -> Result<StatResult, SmcError> {
    let start = Instant::now();
    if runs == 0 {
        return Err(SmcError::Params("value estimation needs at least one run".into()));
    }
    let (values, complete, zeno) = extrema(network, bound, runs, extremum, observable, cfg)?;
    if values.is_empty() {
        return Err(SmcError::Output(OutputError::EmptySamples));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let width = cfg.hist_width.unwrap_or_else(|| default_width(&values));
    let payload = Payload::Value {
        extremum: match extremum {
            Extremum::Max => "max".into(),
            Extremum::Min => "min".into(),
        },
        mean,
        histogram: histogram(&values, width)?,
    };
    Ok(finish(payload, values.len() as u64, cfg, complete, zeno, start))
}

/// Gaps between consecutive matches of a peak pattern over `runs` runs,
/// in run order.
pub fn distances(
    network: &Network,
    bound: &Bound,
    runs: u64,
    pattern: &Formula,
    cfg: &SmcConfig,
) -> Result<(Vec<f64>, bool, u64), SmcError> {
    let exec = Exec::new(cfg)?;
    let sim = Simulator::new(network, cfg.sim)?;
    let pf = PathFormula::pattern(pattern)?;
    let (out, complete) = exec.fixed(runs, |i| {
        let mut mon = TraceMonitor::new(&pf).without_early_stop();
        let mut rng = run_rng(cfg.seed, i);
        let out = sim.simulate(bound, &mut rng, &mut mon)?;
        Ok((peak_distance(&pf, &mon.trace), out.termination == Termination::ZenoAbort))
    })?;
    let zeno = out.iter().filter(|o| o.1).count() as u64;
    Ok((out.into_iter().flat_map(|o| o.0).collect(), complete, zeno))
}

/// Histogram of peak gaps; the mode is the median of the fullest bucket.
pub fn estimate_distance(
    network: &Network,
    bound: &Bound,
    runs: u64,
    pattern: &Formula,
    cfg: &SmcConfig,
) -> Result<StatResult, SmcError> {
    let start = Instant::now();
    let (mut gaps, complete, zeno) = distances(network, bound, runs, pattern, cfg)?;
    let payload = if gaps.is_empty() {
        Payload::Distance {
            gaps: 0,
            mean: None,
            mode: None,
            histogram: None,
        }
    } else {
        let width = cfg.hist_width.unwrap_or_else(|| default_width(&gaps));
        let h = histogram(&gaps, width)?;
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        gaps.sort_by(f64::total_cmp);
        let lo = h.bucket_start(h.peak());
        let hi = lo + h.width;
        let bucket: Vec<f64> = gaps.iter().copied().filter(|g| *g >= lo && *g < hi).collect();
        let mode = bucket.get(bucket.len() / 2).copied().unwrap_or(lo);
        Payload::Distance {
            gaps: gaps.len() as u64,
            mean: Some(mean),
            mode: Some(mode),
            histogram: Some(h),
        }
    };
    Ok(finish(payload, runs, cfg, complete, zeno, start))
}

/// Records `runs` runs.
pub fn simulate(
    network: &Network,
    bound: &Bound,
    runs: u64,
    observables: &[Observable],
    cfg: &SmcConfig,
) -> Result<(Vec<Run>, bool), SmcError> {
    let exec = Exec::new(cfg)?;
    let sim = Simulator::new(network, cfg.sim)?;
    exec.fixed(runs, |i| {
        let mut rng = run_rng(cfg.seed, i);
        Ok(sim.record(bound, observables, &mut rng)?)
    })
}

#[derive(Debug, Clone)]
pub enum QueryOutput {
    Runs { runs: Vec<Run>, complete: bool },
    Stat(StatResult),
}

/// Executes any bound query.
pub fn execute(network: &Network, query: &BoundQuery, cfg: &SmcConfig) -> Result<QueryOutput, SmcError> {
    Ok(match query {
        BoundQuery::Simulate {
            runs,
            bound,
            observables,
        } => {
            let (runs, complete) = simulate(network, bound, *runs, observables, cfg)?;
            QueryOutput::Runs { runs, complete }
        }
        BoundQuery::Probability { bound, formula } => {
            QueryOutput::Stat(estimate_probability(network, bound, formula, cfg)?)
        }
        BoundQuery::Hypothesis {
            bound,
            formula,
            relation,
            threshold,
        } => QueryOutput::Stat(hypothesis(network, bound, formula, *relation, *threshold, cfg)?),
        BoundQuery::Compare {
            left,
            relation,
            right,
        } => QueryOutput::Stat(compare(
            network,
            (&left.0, &left.1),
            *relation,
            (&right.0, &right.1),
            cfg,
        )?),
        BoundQuery::Value {
            bound,
            runs,
            extremum,
            observable,
        } => QueryOutput::Stat(estimate_value(network, bound, *runs, *extremum, &observable.expr, cfg)?),
        BoundQuery::Distance {
            bound,
            runs,
            pattern,
            ..
        } => QueryOutput::Stat(estimate_distance(network, bound, *runs, pattern, cfg)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::Model;
    use rand::Rng;

    const COIN: &str = "
        template Coin {
            location Start initial { rate 1; }
            location A;
            location B;
            edge Start { branch 3 -> A; branch 7 -> B; }
        }
        system Coin;
    ";

    #[test]
    fn run_counts() {
        assert_eq!(required_runs(0.05, 0.05), 738);
        assert_eq!(required_runs(0.005, 0.05), 73778);
        assert_eq!(required_runs(0.1, 0.05), 185);
        let mut last = u64::MAX;
        for k in 1..20 {
            let n = required_runs(0.01 * f64::from(k), 0.05);
            assert!(n <= last);
            last = n;
        }
    }

    #[test]
    fn wald_thresholds() {
        let s = Sprt::new(0.5, 0.01, 0.05, 0.05).unwrap();
        let (a, b) = s.thresholds();
        assert!((a - 19.0).abs() < 1e-12);
        assert!((b - 1.0 / 19.0).abs() < 1e-12);
        assert!(Sprt::new(0.995, 0.01, 0.05, 0.05).is_err());
    }

    #[test]
    fn all_successes_accept_after_the_formula_count() {
        let mut s = Sprt::new(0.5, 0.01, 0.05, 0.05).unwrap();
        let expected = (19f64.ln() / (0.51f64 / 0.49).ln()).ceil() as u64;
        let mut n = 0;
        loop {
            n += 1;
            if let Some(d) = s.observe(true) {
                assert_eq!(d, Decision::Accept);
                break;
            }
        }
        assert_eq!(n, expected);
    }

    #[test]
    fn sprt_error_rates() {
        let (theta, delta) = (0.5, 0.05);
        let mut false_rejections = 0;
        let mut false_acceptances = 0;
        for rep in 0..200 {
            let mut rng = run_rng(77, rep);
            let mut hi = Sprt::new(theta, delta, 0.05, 0.05).unwrap();
            let d = loop {
                if let Some(d) = hi.observe(rng.random::<f64>() < theta + 2.0 * delta) {
                    break d;
                }
            };
            false_rejections += u32::from(d == Decision::Reject);
            let mut lo = Sprt::new(theta, delta, 0.05, 0.05).unwrap();
            let d = loop {
                if let Some(d) = lo.observe(rng.random::<f64>() < theta - 2.0 * delta) {
                    break d;
                }
            };
            false_acceptances += u32::from(d == Decision::Accept);
        }
        assert!(f64::from(false_rejections) / 200.0 <= 0.08);
        assert!(f64::from(false_acceptances) / 200.0 <= 0.08);
    }

    #[test]
    fn trivially_true_formula() {
        let m = Model::parse(COIN).unwrap();
        let BoundQuery::Probability { bound, formula } = m.query("Pr[<=1](<> true)").unwrap() else {
            panic!()
        };
        let r = estimate_probability(&m.network, &bound, &formula, &SmcConfig::default()).unwrap();
        assert_eq!(r.runs, 738);
        assert_eq!(
            r.payload,
            Payload::Interval {
                lo: 0.95,
                hi: 1.0,
                estimate: 1.0,
                successes: 738
            }
        );
    }

    #[test]
    fn workers_do_not_change_results() {
        let m = Model::parse(COIN).unwrap();
        let q = m.query("Pr[<=10](<> Coin.B)").unwrap();
        let one = SmcConfig {
            seed: 9,
            ..SmcConfig::default()
        };
        let four = SmcConfig {
            workers: 4,
            ..one.clone()
        };
        let QueryOutput::Stat(a) = execute(&m.network, &q, &one).unwrap() else { panic!() };
        let QueryOutput::Stat(b) = execute(&m.network, &q, &four).unwrap() else { panic!() };
        assert_eq!(a, StatResult { wall_time: a.wall_time, ..b });
    }

    #[test]
    fn comparing_a_property_with_itself_is_indifferent() {
        let m = Model::parse(COIN).unwrap();
        let q = m.query("Pr[<=10](<> Coin.B) >= Pr[<=10](<> Coin.B)").unwrap();
        let cfg = SmcConfig {
            max_runs: 200,
            ..SmcConfig::default()
        };
        let QueryOutput::Stat(r) = execute(&m.network, &q, &cfg).unwrap() else { panic!() };
        assert_eq!(r.payload, Payload::Verdict { verdict: Decision::Indifferent });
        assert_eq!(r.runs, 200);
    }

    #[test]
    fn comparison_prefers_the_likelier_branch() {
        let m = Model::parse(COIN).unwrap();
        let cfg = SmcConfig::default();
        let q = m.query("Pr[<=10](<> Coin.B) >= Pr[<=10](<> Coin.A)").unwrap();
        let QueryOutput::Stat(r) = execute(&m.network, &q, &cfg).unwrap() else { panic!() };
        assert_eq!(r.payload, Payload::Verdict { verdict: Decision::Accept });
        let q = m.query("Pr[<=10](<> Coin.B) <= Pr[<=10](<> Coin.A)").unwrap();
        let QueryOutput::Stat(r) = execute(&m.network, &q, &cfg).unwrap() else { panic!() };
        assert!(r.rejected());
    }

    #[test]
    fn hypothesis_on_known_branch_probability() {
        let m = Model::parse(COIN).unwrap();
        let cfg = SmcConfig::default();
        let q = m.query("Pr[<=10](<> Coin.B) >= 0.6").unwrap();
        let QueryOutput::Stat(r) = execute(&m.network, &q, &cfg).unwrap() else { panic!() };
        assert_eq!(r.payload, Payload::Verdict { verdict: Decision::Accept });
        let q = m.query("Pr[<=10](<> Coin.B) <= 0.6").unwrap();
        let QueryOutput::Stat(r) = execute(&m.network, &q, &cfg).unwrap() else { panic!() };
        assert!(r.rejected());
    }

    #[test]
    fn value_of_a_constant() {
        let m = Model::parse(COIN).unwrap();
        let q = m.query("E[<=3; 10](max: 5)").unwrap();
        let QueryOutput::Stat(r) = execute(&m.network, &q, &SmcConfig::default()).unwrap() else {
            panic!()
        };
        let Payload::Value { mean, histogram, .. } = r.payload else { panic!() };
        assert_eq!(mean, 5.0);
        assert_eq!(histogram.counts, vec![10]);
    }

    #[test]
    fn cancelled_queries_are_incomplete() {
        let m = Model::parse(COIN).unwrap();
        let q = m.query("Pr[<=10](<> Coin.B)").unwrap();
        let cfg = SmcConfig {
            cancel: Some(Arc::new(AtomicBool::new(true))),
            ..SmcConfig::default()
        };
        let QueryOutput::Stat(r) = execute(&m.network, &q, &cfg).unwrap() else { panic!() };
        assert!(!r.complete);
        assert!(r.to_string().ends_with("incomplete"));
    }
}
