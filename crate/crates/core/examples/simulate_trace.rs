//! One run at α = 1/3, written as a CSV trace to stdout.
//!
//! `cargo run --release --example simulate_trace > trace.csv`

use std::io;

use bfw::cli::{write_trace_csv, CsvHeader, SCHEMA_VERSION};
use bfw::engine::GENERATOR_IDENTITY;
use bfw::{Engine, EngineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = EngineConfig::new(1.0 / 3.0, 100_000, 7).with_sample_every(2_000);
    let header = CsvHeader {
        schema_version: SCHEMA_VERSION.into(),
        kind: "trace".into(),
        generator_identity: GENERATOR_IDENTITY.into(),
        seeds: vec![config.seed],
        config: serde_json::to_value(&config)?,
    };
    let out = Engine::run(config)?;
    eprintln!(
        "t = {}, u = {}, k = {}, {} records",
        out.engine.t(),
        out.engine.u(),
        out.engine.k(),
        out.trace.len()
    );
    write_trace_csv(io::stdout().lock(), &header, &out.trace, 10)?;
    Ok(())
}
