//! Fano resonance of the driven delta barrier: the self-consistent
//! resonance energy above the first sideband, the channel decomposition of
//! Im δε, and |T_kk| around the resonance.
//!
//!     cargo run --release --example delta_resonance [g0]

use gppa::delta::{b_coefficients, resonance_locate, DeltaConfig};
use std::f64::consts::PI;

fn main() -> gppa::Result<()> {
    let g0: f64 = std::env::args().nth(1).map(|s| s.parse().expect("g0")).unwrap_or(1.0);
    let cfg = DeltaConfig { g0, ..DeltaConfig::default() };
    let ch = b_coefficients(&cfg)?;
    let r = resonance_locate(&ch, 1, 0.05, 11)?;

    println!("g0 = {g0}, eps0 = {}", cfg.eps0());
    println!("eps_res = {:.8}  (k = {:.6}, {:?} after {} iterations)", r.eps_res, r.k, r.method, r.iterations);
    println!("delta eps = {:+.6e} {:+.6e}i", r.re_de, r.im_de);
    println!("gamma_k (resonant term) = {:+.6e} {:+.6e}i", r.gamma_k.re, r.gamma_k.im);
    println!("Im gamma_k / (k/2pi) = {:.4}", r.gamma_k.im / (r.k / (2.0 * PI)));
    println!("\nIm delta eps by channel:");
    for (nu, v) in &r.im_terms {
        println!("  nu = {nu:+}: {v:.6e}");
    }
    println!("dominance of nu = -1: {:.2}", r.dominance());
    println!("\n  eps          |T_kk|");
    for (e, t) in &r.tkk_profile.samples {
        println!("  {e:.6}  {t:.6e}");
    }
    Ok(())
}
