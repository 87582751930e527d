//! Compares how likely each room is to stay within its comfort limit.

use shasmc::dsl::Model;
use shasmc::models;
use shasmc::smc::{execute, QueryOutput, SmcConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = Model::parse(models::ROOMS)?;
    let cfg = SmcConfig {
        workers: 4,
        ..SmcConfig::default()
    };
    for q in [
        "Pr[<=100]([] Room(0).Init || T[0] <= 20)",
        "Pr[<=100]([] Room(1).Init || T[1] >= 7)",
        "Pr[<=100]([] Room(1).Init || T[1] >= 7) >= Pr[<=100]([] Room(0).Init || T[0] <= 20)",
    ] {
        if let QueryOutput::Stat(r) = execute(&m.network, &m.query(q)?, &cfg)? {
            println!("{q}\n  {r}");
        }
    }
    Ok(())
}
