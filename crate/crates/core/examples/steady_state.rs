//! Detects the multi-giant steady state of single runs at several α.

use bfw::ensemble::DEFAULT_P2_TOLERANCE;
use bfw::observables::{detect_steady_state, SteadyCriteria};
use bfw::{Engine, EngineConfig};

fn main() -> bfw::Result<()> {
    let n = 100_000;
    for alpha in [0.45, 0.3, 0.22, 0.18] {
        let out = Engine::run(EngineConfig::new(alpha, n, 1))?;
        let criteria = SteadyCriteria {
            p2_tolerance: DEFAULT_P2_TOLERANCE,
            ..SteadyCriteria::exact(alpha, n as u64 / 10)
        };
        match detect_steady_state(&out.trace, criteria) {
            Some(r) => println!(
                "alpha {alpha:<5} m = {} fractions {:.4?} sum C^2 = {:.4} x = {:.4} from u = {}",
                r.m,
                r.fractions,
                r.fractions.iter().map(|c| c * c).sum::<f64>(),
                r.x,
                r.detected_at_u
            ),
            None => println!("alpha {alpha:<5} no steady state"),
        }
    }
    Ok(())
}
