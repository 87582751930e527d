//! Checks path formulas against a hand-made signal, without any model.

use shasmc::engine::{Run, Termination};
use shasmc::expr::{BinOp, Expr};
use shasmc::monitor::{peak_distance, peak_pattern, PathFormula};
use shasmc::query::{Formula, Observable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A sine wave of period 2, sampled every 0.01.
    let s = Expr::Var(0);
    let times: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.01).collect();
    let run = Run {
        columns: vec![Observable {
            name: "s".into(),
            expr: s.clone(),
        }],
        values: times.iter().map(|t| vec![(std::f64::consts::PI * t).sin()]).collect(),
        times,
        events: Vec::new(),
        termination: Termination::Bound,
    };

    let above = Formula::State(Expr::bin(BinOp::Gt, s.clone(), Expr::Num(0.9)));
    let pf = PathFormula::compile(&Formula::eventually(above))?;
    println!("<> s > 0.9: {:?}", pf.check_run(&run)?);
    let trace = pf.trace_of(&run)?;
    for iv in pf.satisfaction(&trace).iter().take(3) {
        println!("  s > 0.9 on [{:.3}, {:.3}]", iv.lo, iv.hi);
    }

    // A rise above 0.9 followed by a drop below -0.9 within 1.5 time units.
    let pattern = PathFormula::pattern(&peak_pattern(s, 0.9, -0.9, 1.5))?;
    println!("peak gaps: {:?}", peak_distance(&pattern, &pattern.trace_of(&run)?));
    Ok(())
}
