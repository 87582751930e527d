//! Two exponential components race; the faster one wins in proportion to
//! its rate.

use shasmc::dsl::Model;
use shasmc::engine::{SimConfig, Simulator, Winner};
use shasmc::rng::run_rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = Model::parse(
        "broadcast chan a, b;
         template P { location L initial { rate 2; } edge L -> L { sync a!; } }
         template Q { location L initial { rate 3; } edge L -> L { sync b!; } }
         system P, Q;",
    )?;
    let sim = Simulator::new(&m.network, SimConfig::default())?;
    let s = m.network.initial_state();
    let mut rng = run_rng(0, 0);
    let n = 100_000;
    let (mut p, mut delay) = (0, 0.0);
    for _ in 0..n {
        // With a huge integrator step only the components compete.
        let o = sim.race(&s, 1e9, &mut rng)?;
        if o.winner == Winner::Component(0) {
            p += 1;
        }
        delay += o.delay;
    }
    println!("P wins {:.4} of races (expected 0.4)", p as f64 / n as f64);
    println!("mean delay {:.4} (expected 0.2)", delay / n as f64);
    Ok(())
}
