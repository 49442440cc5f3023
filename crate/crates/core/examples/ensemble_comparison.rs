//! Ensemble means against theory, one column per alpha.
//!
//! `cargo run --release --example ensemble_comparison -- [nodes] [instances]`

use std::io;

use bfw::cli::write_comparison_csv;
use bfw::ensemble::compare_with_theory;
use bfw::theory::{predict, TheoryOptions};
use bfw::{run_ensemble, EnsembleConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let nodes = args.next().map_or(Ok(100_000), |s| s.parse())?;
    let instances = args.next().map_or(Ok(20), |s| s.parse())?;
    let alphas = vec![1.0 / 2.0, 1.0 / 3.0, 1.0 / 4.0, 1.0 / 5.0];
    let summary = run_ensemble(&EnsembleConfig::new(alphas.clone(), nodes, instances, 0))?;
    let opts = TheoryOptions::default();
    let predictions = alphas.iter().map(|&a| predict(a, &opts)).collect::<Result<Vec<_>, _>>()?;
    let rows = compare_with_theory(&summary, &predictions)?;
    write_comparison_csv(io::stdout().lock(), &rows)?;
    Ok(())
}
