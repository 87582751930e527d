use shasmc::dsl::Model;
use shasmc::engine::{EngineError, Run, SimConfig, Simulator, Termination};
use shasmc::models;
use shasmc::query::{Bound, BoundQuery};
use shasmc::rng::run_rng;

/// Runs the `simulate` query `q` once with the given seed and step.
fn record(m: &Model, q: &str, dt: f64, seed: u64) -> Result<Run, EngineError> {
    let BoundQuery::Simulate { bound, observables, .. } = m.query(q).unwrap() else {
        panic!("not a simulate query: {q}");
    };
    let sim = Simulator::new(&m.network, SimConfig::with_dt(dt))?;
    sim.record(&bound, &observables, &mut run_rng(seed, 0))
}

#[test]
fn urgent_edges_fire_at_once() {
    let m = Model::parse(
        "clock x;
         template P { location A initial { x' = 0; } location B { x' = 1; }
           edge A -> B { urgent; update x = 5; } }
         system P;",
    )
    .unwrap();
    let r = record(&m, "simulate 1 [<=1] {x}", 0.1, 0).unwrap();
    assert_eq!(r.events.len(), 1);
    assert_eq!(r.events[0].time, 0.0);
    assert_eq!(r.events[0].action, "tau");
    let x = r.column("x").unwrap();
    assert!((x.last().unwrap() - 6.0).abs() < 1e-9);
}

#[test]
fn invariant_bounds_a_uniform_delay() {
    let m = Model::parse(
        "template P { clock c; location A initial { invariant c <= 2; } location B;
           edge A -> B { } }
         system P;",
    )
    .unwrap();
    let n = 2000;
    let mut sum = 0.0;
    for seed in 0..n {
        let r = record(&m, "simulate 1 [<=3] {P.c}", 0.01, seed).unwrap();
        assert_eq!(r.events.len(), 1);
        let t = r.events[0].time;
        assert!((0.0..=2.0 + 1e-9).contains(&t), "{t}");
        sum += t;
    }
    // Uniform on [0, 2]: mean 1, standard error 0.58 / sqrt(n).
    let mean = sum / n as f64;
    assert!((mean - 1.0).abs() < 0.05, "{mean}");
}

#[test]
fn branch_weights_set_frequencies() {
    let m = Model::parse(
        "template Coin { location Start initial { rate 1; } location A; location B;
           edge Start { branch 3 -> A; branch 7 -> B; } }
         system Coin;",
    )
    .unwrap();
    let a = m.expr("Coin.A").unwrap();
    let sim = Simulator::new(&m.network, SimConfig::default()).unwrap();
    let n = 4000;
    let mut hits = 0;
    for seed in 0..n {
        let mut rng = run_rng(seed, 0);
        let out = sim
            .simulate(&Bound::Steps(1), &mut rng, &mut shasmc::engine::NoObserver)
            .unwrap();
        assert_eq!(out.termination, Termination::Bound);
        if a.eval(&out.state.env()).unwrap() != 0.0 {
            hits += 1;
        }
    }
    let p = hits as f64 / n as f64;
    // Standard error is about 0.0072.
    assert!((p - 0.3).abs() < 0.03, "{p}");
}

#[test]
fn broadcasts_reach_ready_receivers_only() {
    let m = Model::parse(
        "int got = 0;
         broadcast chan a;
         template S { location L initial { rate 1; } edge L -> L { sync a!; } }
         template R { location Ready initial; location Done;
           edge Ready -> Done { sync a?; update got = got + 1; } }
         system S, R;",
    )
    .unwrap();
    let r = record(&m, "simulate 1 [#<=5] {got}", 0.1, 3).unwrap();
    assert_eq!(r.termination, Termination::Bound);
    // Every send is one event; only the first one moves the receiver.
    assert_eq!(r.events.len(), 5);
    assert!(r.events.iter().all(|e| e.action == "a" && e.component == "S"));
    assert_eq!(*r.column("got").unwrap().last().unwrap(), 1.0);
}

#[test]
fn zeno_loops_are_aborted() {
    let m = Model::parse(
        "int n = 0;
         template P { location L initial; edge L -> L { urgent; update n = n + 1; } }
         system P;",
    )
    .unwrap();
    let BoundQuery::Simulate { bound, observables, .. } = m.query("simulate 1 [<=1] {n}").unwrap() else {
        unreachable!()
    };
    let cfg = SimConfig {
        zeno_cap: 50,
        ..SimConfig::default()
    };
    let sim = Simulator::new(&m.network, cfg).unwrap();
    let r = sim.record(&bound, &observables, &mut run_rng(0, 0)).unwrap();
    assert_eq!(r.termination, Termination::ZenoAbort);
    assert_eq!(*r.column("n").unwrap().last().unwrap(), 50.0);
    assert!(r.times.iter().all(|t| *t == 0.0));
}

#[test]
fn zero_step_bound_samples_the_initial_state() {
    let m = Model::parse(models::BALL).unwrap();
    let r = record(&m, "simulate 1 [#<=0] {x, y}", 0.01, 0).unwrap();
    assert_eq!(r.times, vec![0.0]);
    assert_eq!(r.values, vec![vec![10.0, 10.0]]);
    assert!(r.events.is_empty());
}

#[test]
fn step_bound_counts_transitions() {
    let m = Model::parse(models::BALL).unwrap();
    let r = record(&m, "simulate 1 [#<=4] {y}", 0.01, 1).unwrap();
    assert_eq!(r.termination, Termination::Bound);
    assert_eq!(r.events.len(), 4);
}

#[test]
fn cost_bound_stops_at_the_limit() {
    let m = Model::parse(
        "clock c;
         template P { location L initial { c' = 2; } }
         system P;",
    )
    .unwrap();
    let r = record(&m, "simulate 1 [c<=3] {c}", 0.1, 0).unwrap();
    assert_eq!(r.termination, Termination::Bound);
    assert_eq!(*r.column("c").unwrap().last().unwrap(), 3.0);
    assert!((r.times.last().unwrap() - 1.5).abs() < 1e-9);
}

#[test]
fn time_bound_is_hit_exactly() {
    let m = Model::parse(models::BALL).unwrap();
    let r = record(&m, "simulate 1 [<=1] {y}", 0.1, 0).unwrap();
    assert_eq!(*r.times.last().unwrap(), 1.0);
    assert!(r.times.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn violated_initial_invariant_is_an_error() {
    let m = Model::parse(
        "clock c = 5;
         template P { location L initial { invariant c <= 1; } edge L -> L { } }
         system P;",
    )
    .unwrap();
    let e = record(&m, "simulate 1 [<=1] {c}", 0.1, 0).unwrap_err();
    assert!(matches!(e, EngineError::InvariantAlreadyViolated { .. }), "{e}");
}

#[test]
fn step_must_be_positive() {
    let m = Model::parse(models::BALL).unwrap();
    assert!(matches!(
        Simulator::new(&m.network, SimConfig::with_dt(0.0)),
        Err(EngineError::InvalidStep(_))
    ));
    let sim = Simulator::new(&m.network, SimConfig::default()).unwrap();
    let s = m.network.initial_state();
    assert!(sim.race(&s, f64::INFINITY, &mut run_rng(0, 0)).is_err());
}

#[test]
fn runs_are_determined_by_seed_and_index() {
    let m = Model::parse(models::ROOMS).unwrap();
    let q = "simulate 1 [<=30] {T[0], T[1]}";
    let a = record(&m, q, 0.05, 9).unwrap();
    let b = record(&m, q, 0.05, 9).unwrap();
    let c = record(&m, q, 0.05, 10).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
