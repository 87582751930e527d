//! Records two runs of the two-room heating model and writes them as CSV.

use shasmc::dsl::Model;
use shasmc::models;
use shasmc::output::{events_path, write_run_csv};
use shasmc::smc::{execute, QueryOutput, SmcConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = Model::parse(models::ROOMS)?;
    let q = m.query("simulate 2 [<=100] {T[0], T[1]}")?;
    let QueryOutput::Runs { runs, .. } = execute(&m.network, &q, &SmcConfig::default())? else {
        unreachable!()
    };
    let dir = std::env::temp_dir().join("shasmc-rooms");
    for (i, run) in runs.iter().enumerate() {
        let path = dir.join(format!("run{i}.csv"));
        write_run_csv(run, &path)?;
        let t0 = run.column("T[0]").unwrap();
        let t1 = run.column("T[1]").unwrap();
        println!(
            "run {i}: {} samples, {} events, final T = ({:.2}, {:.2})",
            run.times.len(),
            run.events.len(),
            t0.last().unwrap(),
            t1.last().unwrap()
        );
        println!("  {} and {}", path.display(), events_path(&path).display());
    }
    Ok(())
}
