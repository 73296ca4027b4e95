//! Termination of the resummed amplitude series for the oscillator:
//! X_nm has exactly min(n, m) + 1 nonzero orders, at r = |n − m| + 2j.
//!
//!     cargo run --release --example dho_series

use gppa::dho::DhoExpansion;

fn main() -> gppa::Result<()> {
    let top = 4;
    let pairs: Vec<(usize, usize)> = (0..=top).flat_map(|n| (0..=top).map(move |m| (n, m))).collect();
    let exp = DhoExpansion::for_pairs(5.0, 1.0, false, &pairs, 12)?;
    let a = 0.6;
    for &(n, m) in &pairs {
        let s = exp.series(n, m, a)?;
        let orders: Vec<String> = s
            .terms
            .iter()
            .filter(|(_, z)| z.norm() > 0.0)
            .map(|(r, _)| r.to_string())
            .collect();
        println!(
            "X_{n}{m}: {} terms (expected {}) at r = {}   |X|^2 = {:.6e}",
            s.nonzero_terms(),
            n.min(m) + 1,
            orders.join(","),
            s.total.norm_sqr()
        );
    }
    Ok(())
}
