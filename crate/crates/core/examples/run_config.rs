//! Driving the experiment harness from code: parse a config file, layer
//! overrides on top, validate, run and render. The `gppa` binary does the
//! same from the command line.
//!
//!     cargo run --release --example run_config [config] [key=value ...]

use gppa::harness::{self, Experiment, Format, RunConfig};

fn main() -> gppa::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/delta_resonance.conf").into());
    let text = std::fs::read_to_string(&path).map_err(|e| gppa::GppaError::Invalid(format!("{path}: {e}")))?;

    // the experiment name is also a key in the file
    let name = text
        .lines()
        .filter_map(|l| l.split('#').next()?.split_once('='))
        .find(|(k, _)| k.trim() == "experiment")
        .map(|(_, v)| v.trim().to_string())
        .unwrap_or_else(|| "delta_resonance".into());
    let experiment: Experiment = name.parse()?;

    let mut cfg = RunConfig::parse(experiment, &text)?;
    let sets: Vec<String> = args.collect();
    cfg.apply_sets(&sets)?;

    let problems = harness::validate(&cfg);
    if !problems.is_empty() {
        for p in &problems {
            eprintln!("invalid: {p}");
        }
        std::process::exit(2);
    }

    let table = harness::run(&cfg)?;
    print!("{}", harness::render(&cfg, &table));

    cfg.format = Format::Json;
    eprintln!("{} rows; as JSON the first row is:", table.rows.len());
    let json = harness::render(&cfg, &table);
    let v: serde_json::Value = serde_json::from_str(&json).expect("json");
    eprintln!("{}", v[0]);
    Ok(())
}
