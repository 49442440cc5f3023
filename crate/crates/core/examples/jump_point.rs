//! The jump at α = 1/2: the two smallest giants merge into the new largest.

use bfw::observables::detect_jump;
use bfw::{Engine, EngineConfig};

fn main() -> bfw::Result<()> {
    let n = 100_000;
    for seed in 0..5 {
        let out = Engine::run(EngineConfig::new(0.5, n, seed))?;
        match detect_jump(&out.trace, n) {
            Some(j) => println!(
                "seed {seed}: u = {} {:.5} + {:.5} -> {:.5} (jump {:.4}) two smallest: {} others unchanged: {}",
                j.u_at_jump,
                j.before_sizes.0,
                j.before_sizes.1,
                j.after_size,
                j.delta_cmax,
                j.merges_two_smallest,
                j.others_unchanged
            ),
            None => println!("seed {seed}: no jump"),
        }
    }
    Ok(())
}
