//! Modal number of giants against the predicted staircase.

use bfw::ensemble::staircase_scan;

fn main() -> bfw::Result<()> {
    let alphas: Vec<f64> = (0..=16).map(|i| 0.15 + 0.05 * i as f64).collect();
    for p in staircase_scan(&alphas, 50_000, 8, 3)? {
        println!(
            "alpha {:.2} predicted {} modal {:?} agreement {:.2} undetected {}",
            p.alpha, p.predicted_m, p.modal_m, p.agreement, p.histogram.undetected
        );
    }
    Ok(())
}
