//! The file-based workflow behind the `probit-da` binary, end to end in a
//! scratch directory: write a data CSV, prior CSVs and a JSON config, then
//! `run`, `check` and `compare`.
//!
//! The same steps from a shell:
//!
//! ```bash
//! probit-da run --config run.json
//! probit-da check --config run.json
//! probit-da compare --output cmp out_acda out_haar
//! ```

use std::error::Error;
use std::fs;

use probit_da::cli::{self, RunConfig};
use probit_da::datasets::synthetic_lupus;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let root = dir.path();
    fs::write(root.join("data.csv"), cli::data_to_csv(&synthetic_lupus()))?;
    fs::write(root.join("q.csv"), "0.1,0,0\n0,0.1,0\n0,0,0.1\n")?;
    fs::write(root.join("v.csv"), "0\n0\n0\n")?;

    let mut outputs = Vec::new();
    for algorithm in ["acda", "haar_pxda"] {
        let config = serde_json::json!({
            "data_path": "data.csv",
            "add_intercept": true,
            "prior": { "type": "proper_normal", "q_path": "q.csv", "v_path": "v.csv" },
            "sampler": { "algorithm": algorithm, "iterations": 21000, "burnin": 1000, "seed": 1 },
            "output_dir": format!("out_{algorithm}"),
            "chains": 2
        });
        let path = root.join(format!("{algorithm}.json"));
        fs::write(&path, serde_json::to_string_pretty(&config)?)?;
        let cfg = RunConfig::load(&path)?;
        let run = cli::run(&cfg)?;
        println!("{algorithm}: wrote {} files", run.files.len());
        outputs.push(cfg.output_dir.clone());
        if algorithm == "acda" {
            let report = cli::check(&cfg)?;
            println!("check: rho = {:?}, trace class = {:?}", report.rho.value(), report.trace_class.value().map(|t| t.verdict));
        }
    }

    let cmp = cli::compare(&outputs, &[], &root.join("cmp"), 20)?;
    for c in &cmp.coordinates {
        println!("beta_{}: lag-1 order {:?}", c.coordinate + 1, c.lag1_order);
    }
    let mut files: Vec<String> = fs::read_dir(root.join("cmp"))?
        .map(|e| e.map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect::<Result<_, _>>()?;
    files.sort();
    println!("compare wrote: {}", files.join(", "));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
