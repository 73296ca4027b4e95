//! Resummed |T_kk| against the exact Floquet |t₀|² on a common grid below
//! the first sideband threshold. Both dip where the bound state, shifted
//! up by one quantum, meets the continuum.
//!
//!     cargo run --release --example compare_profiles

use gppa::delta::{b_coefficients, resonance_locate, transmission_ratio, DeltaConfig};
use gppa::floquet::{elastic_profile, DEFAULT_N_SIDE};

fn main() -> gppa::Result<()> {
    let cfg = DeltaConfig::default();
    let grid: Vec<f64> = (0..100).map(|j| (j as f64 + 0.5) / 100.0).collect();
    let ch = b_coefficients(&cfg)?;
    let gppa = transmission_ratio(&ch, &grid)?;
    let floq = elastic_profile(cfg.g0, &grid, DEFAULT_N_SIDE)?;
    println!("  eps     |T_kk|        |t0|^2");
    for (g, f) in gppa.samples.iter().zip(&floq.samples).step_by(5) {
        println!("  {:.3}  {:.6e}  {:.6e}", g.0, g.1, f.1);
    }
    let r = resonance_locate(&ch, 1, 0.05, 3)?;
    let (gm, fm) = (gppa.argmin().unwrap(), floq.argmin().unwrap());
    println!("\nresonance eps_res = {:.6}", r.eps_res);
    println!("|T_kk| minimum at {:.3} ({:.3e})", gm.0, gm.1);
    println!("|t0|^2 minimum at {:.3} ({:.3e})", fm.0, fm.1);
    Ok(())
}
