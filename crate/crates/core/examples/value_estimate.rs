//! Distribution of the largest activator count in the stochastic oscillator,
//! written as a histogram.

use shasmc::dsl::Model;
use shasmc::models;
use shasmc::output::write_histogram_csv;
use shasmc::smc::{execute, Payload, QueryOutput, SmcConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = Model::parse(models::OSCILLATOR_STOCHASTIC)?;
    let cfg = SmcConfig {
        workers: 4,
        hist_width: Some(50.0),
        ..SmcConfig::default()
    };
    let QueryOutput::Stat(r) = execute(&m.network, &m.query("E[<=50; 40](max: X[A])")?, &cfg)? else {
        unreachable!()
    };
    println!("{r}");
    if let Payload::Value { histogram, .. } = &r.payload {
        for (i, c) in histogram.counts.iter().enumerate() {
            println!("{:>8.0} {}", histogram.bucket_start(i), "#".repeat(*c as usize));
        }
        let path = std::env::temp_dir().join("shasmc-max-a.hist.csv");
        write_histogram_csv(histogram, &path, false)?;
        println!("{}", path.display());
    }
    Ok(())
}
