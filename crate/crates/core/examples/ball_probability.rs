//! Estimates the probability that the ball is still high late in the game.

use shasmc::dsl::Model;
use shasmc::models;
use shasmc::query::BoundQuery;
use shasmc::smc::{estimate_probability, required_runs, SmcConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = Model::parse(models::BALL)?;
    let BoundQuery::Probability { bound, formula } = m.query("Pr[<=20](<> time>=12 && y>=4)")? else {
        unreachable!()
    };
    let cfg = SmcConfig {
        seed: 1,
        workers: 4,
        ..SmcConfig::default()
    };
    println!("{} runs for eps={} alpha={}", required_runs(cfg.eps, cfg.alpha), cfg.eps, cfg.alpha);
    let r = estimate_probability(&m.network, &bound, &formula, &cfg)?;
    println!("{r}");
    Ok(())
}
