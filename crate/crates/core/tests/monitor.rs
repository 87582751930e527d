use shasmc::dsl::Model;
use shasmc::engine::{SimConfig, Simulator, Termination};
use shasmc::models;
use shasmc::monitor::{MonitorError, PathFormula, TraceMonitor, Verdict};
use shasmc::query::{Bound, BoundQuery, Formula};
use shasmc::rng::run_rng;

fn probability(m: &Model, q: &str) -> (Bound, Formula) {
    match m.query(q).unwrap() {
        BoundQuery::Probability { bound, formula } => (bound, formula),
        other => panic!("{other:?}"),
    }
}

#[test]
fn recorded_and_online_verdicts_agree() {
    let m = Model::parse(models::BALL).unwrap();
    let (bound, formula) = probability(&m, "Pr[<=20](<> time>=12 && y>=4)");
    let pf = PathFormula::compile(&formula).unwrap();
    let BoundQuery::Simulate { observables, .. } = m.query("simulate 1 [<=20] {y}").unwrap() else {
        unreachable!()
    };
    let sim = Simulator::new(&m.network, SimConfig::default()).unwrap();
    let mut satisfied = 0;
    for seed in 0..40 {
        let run = sim.record(&bound, &observables, &mut run_rng(seed, 0)).unwrap();
        let offline = pf.check_run(&run).unwrap();
        let mut mon = TraceMonitor::new(&pf).without_early_stop();
        let out = sim.simulate(&bound, &mut run_rng(seed, 0), &mut mon).unwrap();
        mon.trace.complete = out.termination == Termination::Bound;
        assert_eq!(offline, mon.verdict(), "seed {seed}");
        if let Verdict::Satisfied(t) = offline {
            assert!(t >= 12.0);
            satisfied += 1;
        }
    }
    assert!(satisfied > 0 && satisfied < 40, "{satisfied}");
}

#[test]
fn early_stop_keeps_the_verdict() {
    let m = Model::parse(models::BALL).unwrap();
    let (bound, formula) = probability(&m, "Pr[<=20]([] y >= 0)");
    let pf = PathFormula::compile(&formula).unwrap();
    let sim = Simulator::new(&m.network, SimConfig::default()).unwrap();
    for seed in 0..20 {
        let mut full = TraceMonitor::new(&pf).without_early_stop();
        let out = sim.simulate(&bound, &mut run_rng(seed, 0), &mut full).unwrap();
        full.trace.complete = out.termination == Termination::Bound;
        let mut short = TraceMonitor::new(&pf);
        let out = sim.simulate(&bound, &mut run_rng(seed, 0), &mut short).unwrap();
        short.trace.complete = out.termination == Termination::Bound;
        assert_eq!(full.verdict().is_satisfied(), short.verdict().is_satisfied());
        assert!(short.trace.times.len() <= full.trace.times.len());
    }
}

#[test]
fn unobserved_atoms_are_reported() {
    let m = Model::parse(models::BALL).unwrap();
    let (bound, formula) = probability(&m, "Pr[<=5](<> x >= 4)");
    let pf = PathFormula::compile(&formula).unwrap();
    let BoundQuery::Simulate { observables, .. } = m.query("simulate 1 [<=5] {y}").unwrap() else {
        unreachable!()
    };
    let sim = Simulator::new(&m.network, SimConfig::default()).unwrap();
    let run = sim.record(&bound, &observables, &mut run_rng(0, 0)).unwrap();
    assert!(matches!(pf.check_run(&run), Err(MonitorError::UnknownAtom(_))));
}
