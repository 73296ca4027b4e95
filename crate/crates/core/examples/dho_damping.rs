//! Ground-state damping of the driven oscillator. The loop exponent 2Tγ₀
//! is purely imaginary and equals a²/2; the second-order term is also
//! checked against a direct double-time integral.
//!
//!     cargo run --release --example dho_damping

use gppa::dho::{g_for_alpha, gamma2_double_time, loop_exponent, PolyDriving};

fn main() -> gppa::Result<()> {
    let (sigma, omega) = (5.0, 1.0);
    println!("    a   2T gamma0 (im)     a^2/2          re            double-time (im)");
    for a in [0.1, 0.25, 0.5, 0.75, 1.0] {
        let driving = PolyDriving::infinite(g_for_alpha(a, sigma, omega), sigma, omega)?;
        let e = loop_exponent(&driving, 0, &[], 8)?;
        let d = gamma2_double_time(&driving, 0, 48)?;
        println!("{a:>5.2}  {:.12}  {:.12}  {:+.2e}  {:.12}", e.im, 0.5 * a * a, e.re, d.im);
    }
    Ok(())
}
