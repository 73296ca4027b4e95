//! Transition probabilities of the driven oscillator: resummed series,
//! fourth-order perturbation theory and the exact displaced-state result.
//!
//!     cargo run --release --example dho_probabilities

use gppa::dho::{probability_exact, DhoExpansion};

fn main() -> gppa::Result<()> {
    let pairs = [(1, 0), (2, 0), (2, 1), (2, 2)];
    // one expansion, rescaled to every a
    let exp = DhoExpansion::for_pairs(5.0, 1.0, false, &pairs, 12)?;
    for &(n, m) in &pairs {
        println!("P_{n}{m}:    a      gppa           apt4           exact");
        for i in 1..=10 {
            let a = 0.1 * i as f64;
            println!(
                "       {a:.1}  {:.6e}  {:+.6e}  {:.6e}",
                exp.p_gppa(n, m, a)?,
                exp.p_apt4(n, m, a)?,
                probability_exact(a, n, m)
            );
        }
    }
    Ok(())
}
