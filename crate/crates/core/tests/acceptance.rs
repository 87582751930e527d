//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test --test acceptance`.

use std::time::Instant;

use shasmc::dsl::Model;
use shasmc::engine::{SimConfig, Simulator, Winner};
use shasmc::models;
use shasmc::monitor::{peak_distance, peak_pattern, PathFormula, TraceMonitor};
use shasmc::query::{Bound, Observable};
use shasmc::rng::run_rng;
use shasmc::smc::{
    execute, extrema, required_runs, Decision, Payload, QueryOutput, SmcConfig, Sprt, StatResult,
};

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn stat(model: &Model, query: &str, cfg: &SmcConfig) -> StatResult {
    let q = model.query(query).expect("query");
    match execute(&model.network, &q, cfg).expect("query runs") {
        QueryOutput::Stat(r) => r,
        QueryOutput::Runs { .. } => panic!("not a statistical query"),
    }
}

fn estimate(r: &StatResult) -> f64 {
    match r.payload {
        Payload::Interval { estimate, .. } => estimate,
        _ => panic!("not an interval"),
    }
}

fn verdict(r: &StatResult) -> Decision {
    match r.payload {
        Payload::Verdict { verdict } => verdict,
        _ => panic!("not a verdict"),
    }
}

fn run_count_formula() -> Check {
    let a = required_runs(0.05, 0.05);
    let b = required_runs(0.005, 0.05);
    ensure(a == 738 && b == 73778, format!("N(0.05)={a}, N(0.005)={b}"))
}

fn ball_probability() -> Check {
    let m = Model::parse(models::BALL).unwrap();
    let cfg = SmcConfig {
        seed: 1,
        ..SmcConfig::default()
    };
    let r = stat(&m, "Pr[<=20](<> time>=12 and y>=4)", &cfg);
    let p = estimate(&r);
    ensure(
        (0.39..=0.60).contains(&p) && r.runs == 738,
        format!("estimate {p:.4} over {} runs", r.runs),
    )
}

fn ball_mechanics() -> Check {
    let m = Model::parse(
        "clock y = 10, vy = 5.9;
         template Ball { location Fly initial { y' = vy; vy' = -9.81; } }
         system Ball;",
    )
    .unwrap();
    let sim = Simulator::new(&m.network, SimConfig::with_dt(1e-4)).unwrap();
    let out = sim
        .simulate(&Bound::Time(2.15), &mut run_rng(0, 0), &mut shasmc::engine::NoObserver)
        .unwrap();
    let y = out.state.vars[0];

    let m = Model::parse(
        "clock y = 10, vy = 5.9;
         urgent broadcast chan floor;
         template Ball {
           location Fly initial { y' = vy; vy' = -9.81; }
           edge Fly -> Fly { guard y <= 0 && vy < 0; sync floor!; update y = 0, vy = -0.9 * vy; }
         }
         system Ball;",
    )
    .unwrap();
    let sim = Simulator::new(&m.network, SimConfig::with_dt(1e-4)).unwrap();
    let cols = [Observable {
        name: "vy".into(),
        expr: m.expr("vy").unwrap(),
    }];
    let run = sim.record(&Bound::Time(2.2), &cols, &mut run_rng(0, 0)).unwrap();
    let bounce = run.events.first().map(|e| e.time).unwrap_or(f64::NAN);
    let after = run
        .times
        .iter()
        .zip(&run.values)
        .rev()
        .find(|(t, _)| **t == bounce)
        .map(|(_, v)| v[0])
        .unwrap_or(f64::NAN);
    ensure(
        y.abs() < 0.02 && (after - 13.67).abs() <= 0.05,
        format!("y(2.15)={y:.4}, vy after bounce at t={bounce:.4} is {after:.4}"),
    )
}

fn room_estimates() -> Check {
    let m = Model::parse(models::ROOMS).unwrap();
    let cfg = SmcConfig {
        seed: 1,
        ..SmcConfig::default()
    };
    let p0 = estimate(&stat(&m, "Pr[<=100]([] Room(0).Init || T[0] <= 20)", &cfg));
    let p1 = estimate(&stat(&m, "Pr[<=100]([] Room(1).Init || T[1] >= 7)", &cfg));
    ensure(
        (0.40..=0.60).contains(&p0) && (0.60..=0.80).contains(&p1),
        format!("room 0: {p0:.4}, room 1: {p1:.4}"),
    )
}

fn room_comparison() -> Check {
    let m = Model::parse(models::ROOMS).unwrap();
    let cfg = SmcConfig {
        seed: 1,
        ..SmcConfig::default()
    };
    let r = stat(
        &m,
        "Pr[<=100]([] Room(1).Init || T[1] >= 7) >= Pr[<=100]([] Room(0).Init || T[0] <= 20)",
        &cfg,
    );
    ensure(
        verdict(&r) == Decision::Accept,
        format!("{} after {} runs", verdict(&r), r.runs),
    )
}

fn race_law() -> Check {
    let m = Model::parse(
        "broadcast chan a, b;
         template P { location L initial { rate 2; } edge L -> L { sync a!; } }
         template Q { location L initial { rate 3; } edge L -> L { sync b!; } }
         system P, Q;",
    )
    .unwrap();
    let sim = Simulator::new(&m.network, SimConfig::default()).unwrap();
    let s = m.network.initial_state();
    let mut rng = run_rng(6, 0);
    let n = 100_000;
    let mut wins = 0;
    for _ in 0..n {
        // A huge step keeps the integrator out of the race.
        if sim.race(&s, 1e9, &mut rng).unwrap().winner == Winner::Component(0) {
            wins += 1;
        }
    }
    let f = f64::from(wins) / f64::from(n);
    ensure((f - 0.4).abs() <= 0.01, format!("rate-2 component wins {f:.4}"))
}

fn euler_order() -> Check {
    let m = Model::parse(
        "clock y = 10, vy = 5.9;
         template Ball { location Fly initial { y' = vy; vy' = -9.81; } }
         system Ball;",
    )
    .unwrap();
    let exact = 10.0 + 5.9 * 2.0 - 9.81 * 2.0;
    let err = |dt: f64| {
        let sim = Simulator::new(&m.network, SimConfig::with_dt(dt)).unwrap();
        let out = sim
            .simulate(&Bound::Time(2.0), &mut run_rng(0, 0), &mut shasmc::engine::NoObserver)
            .unwrap();
        (out.state.vars[0] - exact).abs()
    };
    let e: Vec<f64> = [0.01, 0.005, 0.0025].iter().map(|dt| err(*dt)).collect();
    let r1 = e[0] / e[1];
    let r2 = e[1] / e[2];
    ensure(
        (r1 - 2.0).abs() <= 0.2 && (r2 - 2.0).abs() <= 0.2,
        format!("errors {e:?}, ratios {r1:.4} and {r2:.4}"),
    )
}

const COIN: &str = "
    template Coin {
        location Start initial { rate 1; }
        location Heads;
        location Tails;
        edge Start { branch 3 -> Heads; branch 7 -> Tails; }
    }
    system Coin;
";

fn interval_coverage() -> Check {
    let m = Model::parse(COIN).unwrap();
    let mut hits = 0;
    for rep in 0..200 {
        let cfg = SmcConfig {
            seed: 1000 + rep,
            ..SmcConfig::default()
        };
        let r = stat(&m, "Pr[<=10](<> Coin.Tails)", &cfg);
        if let Payload::Interval { lo, hi, .. } = r.payload {
            hits += u32::from(lo <= 0.7 && 0.7 <= hi);
        }
    }
    let c = f64::from(hits) / 200.0;
    ensure(c >= 0.90, format!("coverage {c:.3}"))
}

fn sprt_errors() -> Check {
    let s = Sprt::new(0.5, 0.01, 0.05, 0.05).unwrap();
    let (a, b) = s.thresholds();
    // p = 13/25 = 0.52 = theta + 2 delta.
    let m = Model::parse(
        "template Coin {
             location Start initial { rate 1; }
             location Heads;
             location Tails;
             edge Start { branch 13 -> Heads; branch 12 -> Tails; }
         }
         system Coin;",
    )
    .unwrap();
    let mut rejections = 0;
    for rep in 0..200 {
        let cfg = SmcConfig {
            seed: 5000 + rep,
            ..SmcConfig::default()
        };
        let r = stat(&m, "Pr[<=10](<> Coin.Heads) >= 0.5", &cfg);
        rejections += u32::from(verdict(&r) == Decision::Reject);
    }
    let f = f64::from(rejections) / 200.0;
    ensure(
        (a - 19.0).abs() < 1e-9 && (b - 1.0 / 19.0).abs() < 1e-12 && f <= 0.08,
        format!("A={a:.6}, B={b:.6}, false rejections {f:.3}"),
    )
}

fn oscillator_period() -> Check {
    let m = Model::parse(models::OSCILLATOR).unwrap();
    let cfg = SmcConfig {
        sim: SimConfig::with_dt(0.0005),
        hist_width: Some(0.5),
        ..SmcConfig::default()
    };
    let r = stat(&m, "distance[<=300; 3](x: A > 1100 && true U[<=5] A <= 1000)", &cfg);
    let Payload::Distance { mode, gaps, .. } = r.payload else {
        return Err("no distance payload".into());
    };
    let mode = mode.unwrap_or(f64::NAN);

    // Same measurement through the monitor directly.
    let sim = Simulator::new(&m.network, cfg.sim).unwrap();
    let pat = PathFormula::pattern(&peak_pattern(m.expr("A").unwrap(), 1100.0, 1000.0, 5.0)).unwrap();
    let mut mon = TraceMonitor::new(&pat).without_early_stop();
    sim.simulate(&Bound::Time(300.0), &mut run_rng(0, 0), &mut mon).unwrap();
    let direct = peak_distance(&pat, &mon.trace);

    let sm = Model::parse(models::OSCILLATOR_STOCHASTIC).unwrap();
    let scfg = SmcConfig {
        seed: 3,
        ..SmcConfig::default()
    };
    let (peaks, _, _) = extrema(
        &sm.network,
        &Bound::Time(50.0),
        4,
        shasmc::dsl::ast::Extremum::Max,
        &sm.expr("X[A]").unwrap(),
        &scfg,
    )
    .unwrap();
    let mean = peaks.iter().sum::<f64>() / peaks.len() as f64;
    let var = peaks.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (peaks.len() - 1) as f64;
    ensure(
        (mode - 24.2).abs() <= 1.5 && direct.len() >= 5 && var > 0.0,
        format!(
            "mode {mode:.3} over {gaps} gaps; stochastic max A {peaks:?}, variance {var:.1}"
        ),
    )
}

fn reproducibility() -> Check {
    let ball = Model::parse(models::BALL).unwrap();
    let osc = Model::parse(models::OSCILLATOR_STOCHASTIC).unwrap();
    let cfg = |workers| SmcConfig {
        seed: 42,
        workers,
        ..SmcConfig::default()
    };
    let summary = |m: &Model, q: &str, w| serde_json::to_string(&stat(m, q, &cfg(w))).unwrap();
    let queries = [
        (&ball, "Pr[<=20](<> time>=12 and y>=4)"),
        (&ball, "Pr[<=20](<> time>=12 and y>=4) >= 0.45"),
        (&osc, "E[<=20; 8](max: X[A])"),
    ];
    for (m, q) in queries {
        let a = summary(m, q, 1);
        let b = summary(m, q, 1);
        let c = summary(m, q, 4);
        if a != b || a != c {
            return Err(format!("`{q}` differs: {a} / {b} / {c}"));
        }
    }
    Ok("identical summaries across repeats and 1 vs 4 workers".into())
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("run-count formula", run_count_formula),
        ("ball probability", ball_probability),
        ("ball mechanics", ball_mechanics),
        ("two-room estimates", room_estimates),
        ("two-room comparison", room_comparison),
        ("race-winner law", race_law),
        ("euler order", euler_order),
        ("interval coverage", interval_coverage),
        ("sprt thresholds and errors", sprt_errors),
        ("oscillator period", oscillator_period),
        ("reproducibility", reproducibility),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let res = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(d) => println!("[{:2}] PASS {name}: {d} ({secs:.2}s)", i + 1),
            Err(d) => {
                failed += 1;
                println!("[{:2}] FAIL {name}: {d} ({secs:.2}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
