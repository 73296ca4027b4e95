//! Periodically driven two-level system. The second-order loop factor from
//! the Fourier route is compared with direct time ordering over windows of
//! growing length (they differ by a boundary term of order 1/T). Then the
//! exact path series of the transition amplitude, which stops at r = 1.
//!
//!     cargo run --release --example two_level

use gppa::engine::{gamma_order, renormalized_series, DysonSolver, SeriesMode, SpectralSum};
use gppa::spectral::{fourier_coefficients, FourierWindow, MeanEnergy, StateIndex};
use gppa::two_level::TwoLevel;
use std::collections::BTreeSet;

fn main() -> gppa::Result<()> {
    let omega = 0.4;
    let model = TwoLevel::harmonic(1.0, 0.3, omega);
    let period = 2.0 * std::f64::consts::PI / omega;
    let states = vec![StateIndex::Discrete(0), StateIndex::Discrete(1)];
    let pairs = [(states[0], states[1]), (states[1], states[0])];
    let none = BTreeSet::new();

    println!("periods  gamma2 Fourier     gamma2 time-ordered            T*|diff|");
    for p in [1.0, 2.0, 4.0, 8.0] {
        let t_half = p * period;
        let window = (-t_half, t_half);
        let means = MeanEnergy::compute(&model, &states, window)?;
        let table = fourier_coefficients(&model, &pairs, &means, FourierWindow::new(t_half), 128, None)?;
        let f = SpectralSum::new(&table, &means, states.clone()).order(states[0], 2, &none)?;
        let solver = DysonSolver::new(&model, states.clone(), window).with_steps(8000);
        let d = gamma_order(&solver, states[0], 2, &none)?;
        println!(
            "{:>7}  {:+.6e}     {:+.6e} {:+.2e}i   {:.3e}",
            2.0 * p,
            f.re,
            d.re,
            d.im,
            t_half * (f - d).norm()
        );
    }

    let window = (-period, period);
    let solver = DysonSolver::new(&model, states.clone(), window).with_steps(4000);
    let s = renormalized_series(&solver, states[1], states[0], 6, SeriesMode::Exact)?;
    println!("\nexact path series for X_10 over two periods:");
    for (r, z) in &s.terms {
        println!("  r = {r}: {:+.6e} {:+.6e}i", z.re, z.im);
    }
    println!("nonzero terms: {}", s.nonzero_terms());
    Ok(())
}
