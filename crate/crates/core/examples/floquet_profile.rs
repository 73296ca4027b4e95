//! Exact elastic transmission of the driven delta barrier from sideband
//! matching, with flux conservation and truncation stability.
//!
//!     cargo run --release --example floquet_profile

use gppa::floquet::{solve_sidebands, SidebandSystem, Barrier, Incidence, DEFAULT_N_SIDE};

fn main() -> gppa::Result<()> {
    let g0 = 1.0;
    println!("  eps    |t0|^2        flux-1      n_side");
    for i in 0..20 {
        let eps = 0.025 + 0.05 * i as f64;
        let s = solve_sidebands(eps, g0, DEFAULT_N_SIDE)?;
        println!("  {eps:.3}  {:.8}  {:+.1e}  {}", s.elastic(), s.flux() - 1.0, s.n_side);
    }
    // raw truncations near the transmission zero
    println!("\nn_side  |t0|^2 at eps = 0.985");
    for n in [2, 4, 8, 16, 32] {
        let s = SidebandSystem::new(0.985, g0, n, Barrier::Driven, Incidence::Left)?.solve()?;
        println!("{n:>6}  {:.12e}", s.elastic());
    }
    Ok(())
}
