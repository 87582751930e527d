//! Period of the deterministic oscillator, measured as the gap between
//! consecutive activator peaks.

use shasmc::dsl::Model;
use shasmc::engine::SimConfig;
use shasmc::models;
use shasmc::smc::{execute, QueryOutput, SmcConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = Model::parse(models::OSCILLATOR)?;
    // The dynamics are stiff: larger Euler steps blow up.
    let cfg = SmcConfig {
        sim: SimConfig::with_dt(0.0005),
        hist_width: Some(0.5),
        ..SmcConfig::default()
    };
    let q = m.query("distance[<=300; 1](x: A > 1100 && true U[<=5] A <= 1000)")?;
    if let QueryOutput::Stat(r) = execute(&m.network, &q, &cfg)? {
        println!("{r}");
    }
    Ok(())
}
