//! Parses a small model from text, prints it back and runs a few queries.

use shasmc::dsl::Model;
use shasmc::smc::{execute, QueryOutput, SmcConfig};

const TANK: &str = "
// A tank fills at a random rate and is drained when it gets full.
clock level;
double fill = 2;
int drains = 0;

template Tank {
  location Filling initial { level' = fill; invariant level <= 10; }
  location Draining { level' = -5; }
  edge Filling -> Draining { guard level >= 10; update drains = drains + 1; }
  edge Draining -> Filling { urgent; guard level <= 0; update level = 0, fill = 1 + random(2); }
}

system Tank;
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = Model::parse(TANK)?;
    println!("{}", m.document);
    let cfg = SmcConfig::default();
    for q in ["Pr[<=20](<> drains >= 3)", "E[<=50; 100](max: drains)", "Pr[<=20]([] level <= 10)"] {
        if let QueryOutput::Stat(r) = execute(&m.network, &m.query(q)?, &cfg)? {
            println!("{q}: {r}");
        }
    }
    Ok(())
}
