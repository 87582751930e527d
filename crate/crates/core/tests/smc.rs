use shasmc::dsl::Model;
use shasmc::engine::SimConfig;
use shasmc::models;
use shasmc::smc::{execute, required_runs, Decision, Payload, QueryOutput, SmcConfig, SmcError, StatResult};

const COIN: &str = "template Coin { location Start initial { rate 10; } location A; location B;
    edge Start { branch 3 -> A; branch 7 -> B; } }
  system Coin;";

fn stat(model: &str, q: &str, cfg: &SmcConfig) -> StatResult {
    let m = Model::parse(model).unwrap();
    match execute(&m.network, &m.query(q).unwrap(), cfg).unwrap() {
        QueryOutput::Stat(r) => r,
        QueryOutput::Runs { .. } => panic!("{q} is a simulate query"),
    }
}

fn seeded(seed: u64) -> SmcConfig {
    SmcConfig {
        seed,
        ..SmcConfig::default()
    }
}

fn verdict(r: &StatResult) -> Decision {
    match r.payload {
        Payload::Verdict { verdict } => verdict,
        ref p => panic!("{p:?}"),
    }
}

#[test]
fn interval_estimate_uses_the_hoeffding_count() {
    let r = stat(COIN, "Pr[<=5](<> Coin.A)", &seeded(3));
    assert_eq!(r.runs, required_runs(0.05, 0.05));
    let Payload::Interval { lo, hi, estimate, successes } = r.payload else {
        panic!()
    };
    assert_eq!(estimate, successes as f64 / r.runs as f64);
    assert!((hi - lo - 0.1).abs() < 1e-12);
    assert!(lo <= 0.3 && 0.3 <= hi, "[{lo}, {hi}]");
}

#[test]
fn initial_maximum_is_the_initial_value() {
    let r = stat(models::BALL, "E[<=0; 10](max: y)", &seeded(0));
    let Payload::Value { mean, histogram, .. } = r.payload else {
        panic!()
    };
    assert_eq!(mean, 10.0);
    assert_eq!(histogram.counts, vec![10]);
    assert_eq!(r.runs, 10);
}

#[test]
fn stochastic_oscillator_peak_is_near_the_deterministic_one() {
    // Euler steps must be small for the stiff dynamics to stay bounded.
    let cfg = SmcConfig {
        sim: SimConfig::with_dt(0.0005),
        ..SmcConfig::default()
    };
    let det = stat(models::OSCILLATOR, "E[<=75; 1](max: A)", &cfg);
    let sto = stat(models::OSCILLATOR_STOCHASTIC, "E[<=75; 20](max: X[A])", &SmcConfig::default());
    let (Payload::Value { mean: d, .. }, Payload::Value { mean: s, .. }) = (det.payload, sto.payload) else {
        panic!()
    };
    assert!(((s - d) / d).abs() < 0.1, "stochastic {s} vs deterministic {d}");
}

#[test]
fn comparison_finds_the_likelier_outcome() {
    let q = "Pr[<=2](<> Coin.B) >= Pr[<=2](<> Coin.A)";
    let accepted = (0..100)
        .filter(|s| verdict(&stat(COIN, q, &seeded(*s))) == Decision::Accept)
        .count();
    assert!(accepted >= 99, "{accepted}");
    let r = stat(COIN, "Pr[<=2](<> Coin.B) <= Pr[<=2](<> Coin.A)", &seeded(0));
    assert_eq!(verdict(&r), Decision::Reject);
    assert!(r.rejected());
}

#[test]
fn tests_reject_outside_the_indifference_region() {
    let cfg = |seed| SmcConfig {
        seed,
        delta: 0.02,
        ..SmcConfig::default()
    };
    // The true probability is 0.3, two half-widths away from each threshold.
    for q in ["Pr[<=5](<> Coin.A) >= 0.34", "Pr[<=5](<> Coin.A) <= 0.26"] {
        let rejected = (0..100).filter(|s| stat(COIN, q, &cfg(*s)).rejected()).count();
        assert!(rejected >= 90, "{q}: {rejected}");
    }
    for q in ["Pr[<=5](<> Coin.A) >= 0.26", "Pr[<=5](<> Coin.A) <= 0.34"] {
        let accepted = (0..100)
            .filter(|s| verdict(&stat(COIN, q, &cfg(*s))) == Decision::Accept)
            .count();
        assert!(accepted >= 90, "{q}: {accepted}");
    }
}

#[test]
fn results_do_not_depend_on_workers() {
    for q in [
        "Pr[<=20](<> time>=12 && y>=4)",
        "Pr[<=20](<> time>=12 && y>=4) >= 0.45",
        "E[<=10; 30](max: y)",
    ] {
        let one = stat(models::BALL, q, &seeded(4));
        let four = stat(
            models::BALL,
            q,
            &SmcConfig {
                workers: 4,
                ..seeded(4)
            },
        );
        assert_eq!(one, StatResult { wall_time: one.wall_time, ..four }, "{q}");
    }
}

#[test]
fn run_cap_is_reported() {
    let cfg = SmcConfig {
        max_runs: 10,
        ..seeded(0)
    };
    let m = Model::parse(COIN).unwrap();
    let q = m.query("Pr[<=5](<> Coin.A) >= 0.3").unwrap();
    assert!(matches!(execute(&m.network, &q, &cfg), Err(SmcError::MaxRunsExceeded(10))));
}

#[test]
fn bad_parameters_are_rejected() {
    let m = Model::parse(COIN).unwrap();
    let q = m.query("Pr[<=5](<> Coin.A)").unwrap();
    let cfg = SmcConfig {
        eps: 0.0,
        ..SmcConfig::default()
    };
    assert!(matches!(execute(&m.network, &q, &cfg), Err(SmcError::Params(_))));
    let q = m.query("Pr[<=5](<> Coin.A) >= 0.995").unwrap();
    assert!(matches!(execute(&m.network, &q, &SmcConfig::default()), Err(SmcError::Params(_))));
}
