//! Steady-state theory for m = 1..5 under both choices of the two-giant bound.

use bfw::theory::{alpha_upper, predict_with_m, TheoryOptions};

fn main() -> bfw::Result<()> {
    for empirical in [false, true] {
        let opts = TheoryOptions {
            empirical_alpha2: empirical,
            ..Default::default()
        };
        println!("empirical alpha_2: {empirical}");
        for m in 1..=5 {
            let p = predict_with_m(m, alpha_upper(m, empirical), &opts)?;
            match p.infeasible_level {
                None => println!("  m = {m} alpha_m = {:.4} x_m = {:.6} C = {:.4?}", p.alpha_m, p.x_m, p.fractions),
                Some(level) => println!(
                    "  m = {m} alpha_m = {:.4} x_m = {:.6} sizes infeasible from level {level}",
                    p.alpha_m, p.x_m
                ),
            }
        }
    }
    Ok(())
}
