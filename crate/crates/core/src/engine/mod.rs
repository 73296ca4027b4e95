//! Loop resummation: gamma factors, life-times, geometric phase propagators
//! and renormalized transition-amplitude series.

mod continuum;
mod dyson;
mod series;
mod spectral_sum;

pub use continuum::{
    energy_correction, gamma2_bound, gamma_resummed, ContinuumChannel, ResummedGamma,
    DEFAULT_RESONANCE_WINDOW,
};
pub use dyson::{log_series, ratio_series, DysonOrders, DysonSolver, NormalizedOrders};
pub use series::{assemble_state, renormalized_series, series_from_ratio, AmplitudeSeries, SeriesMode};
pub use spectral_sum::SpectralSum;

use crate::spectral::{InstantModel, StateIndex};
use crate::{GppaError, Result, C64};
use std::collections::BTreeSet;

/// Imaginary parts below this count as zero when deciding τ = ∞.
pub const LIFETIME_TOL: f64 = 1e-14;

/// Anything that yields the order-by-order loop factors γ_n^{(r)}.
pub trait GammaSource {
    /// γ_n^{(r)} for r = 2..=r_max; element 0 is r = 2.
    fn gamma_orders(
        &self,
        n: StateIndex,
        excluded: &BTreeSet<StateIndex>,
        r_max: usize,
    ) -> Result<Vec<C64>>;

    /// Interval (t_i, t_f) over which γ is accumulated.
    fn window(&self) -> (f64, f64);

    /// Base frequency of the Fourier convention (π/T).
    fn omega(&self) -> f64 {
        std::f64::consts::PI * 2.0 / (self.window().1 - self.window().0)
    }
}

/// Complex γ_n (or a truncated γ_n^{[...]}) with its orders.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaFactor {
    pub state: StateIndex,
    pub excluded: BTreeSet<StateIndex>,
    pub by_order: Vec<(usize, C64)>,
    pub value: C64,
    pub window: (f64, f64),
    pub omega: f64,
}

impl GammaFactor {
    pub fn zero(state: StateIndex, window: (f64, f64)) -> Self {
        GammaFactor {
            state,
            excluded: BTreeSet::new(),
            by_order: Vec::new(),
            value: C64::new(0.0, 0.0),
            window,
            omega: std::f64::consts::PI * 2.0 / (window.1 - window.0),
        }
    }

    /// (t_f − t_i)·γ, the finite exponent 2Tγ of a pulse.
    pub fn exponent(&self) -> C64 {
        self.value * (self.window.1 - self.window.0)
    }

    pub fn order(&self, r: usize) -> Option<C64> {
        self.by_order.iter().find(|(q, _)| *q == r).map(|&(_, v)| v)
    }
}

/// γ_n^{(r)} on its own.
pub fn gamma_order<S: GammaSource + ?Sized>(
    source: &S,
    n: StateIndex,
    r: usize,
    excluded: &BTreeSet<StateIndex>,
) -> Result<C64> {
    if r < 2 {
        return Err(GppaError::Invalid(format!("gamma order must be >= 2, got {r}")));
    }
    Ok(source.gamma_orders(n, excluded, r)?[r - 2])
}

/// γ_n summed over 2 ≤ r ≤ r_max.
pub fn gamma_total<S: GammaSource + ?Sized>(
    source: &S,
    n: StateIndex,
    excluded: &BTreeSet<StateIndex>,
    r_max: usize,
) -> Result<GammaFactor> {
    if r_max < 2 {
        return Err(GppaError::Invalid(format!("r_max must be >= 2, got {r_max}")));
    }
    if excluded.contains(&n) {
        return Err(GppaError::Invalid(format!("state {n} cannot exclude itself")));
    }
    let orders = source.gamma_orders(n, excluded, r_max)?;
    let by_order: Vec<(usize, C64)> = orders.iter().enumerate().map(|(i, &g)| (i + 2, g)).collect();
    Ok(GammaFactor {
        state: n,
        excluded: excluded.clone(),
        value: orders.iter().sum(),
        by_order,
        window: source.window(),
        omega: source.omega(),
    })
}

/// Infinite or finite life-time τ = 1/(2 Im γ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tau {
    Finite(f64),
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lifetime {
    pub tau: Tau,
    pub gamma_im: f64,
}

pub fn lifetime(gamma: &GammaFactor) -> Result<Lifetime> {
    let im = gamma.value.im;
    if im < -LIFETIME_TOL {
        return Err(GppaError::Invalid(format!(
            "Im gamma = {im:e} < 0 for state {}: |X|^2 would exceed 1",
            gamma.state
        )));
    }
    let tau = if im <= LIFETIME_TOL { Tau::Infinite } else { Tau::Finite(0.5 / im) };
    Ok(Lifetime { tau, gamma_im: im.max(0.0) })
}

/// X_nn(t_f, t_i) = e^{i(t_f − t_i)γ}.
pub fn survival_amplitude(gamma: &GammaFactor, t_i: f64, t_f: f64) -> Result<C64> {
    let z = C64::i() * gamma.value * (t_f - t_i);
    if !z.re.is_finite() || z.re > 700.0 {
        return Err(GppaError::Overflow(format!("exponent {z} too large")));
    }
    Ok(z.exp())
}

/// Dressed diagonal evolution between two flips.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagatorFactor {
    pub state: StateIndex,
    pub excluded: BTreeSet<StateIndex>,
    /// Exponent density δ (the γ of the truncated loop factor).
    pub delta: C64,
    pub interval: (f64, f64),
    /// ∫ Ē_n dτ over the interval.
    pub phase: f64,
}

impl PropagatorFactor {
    pub fn new<M: InstantModel + ?Sized>(
        model: &M,
        gamma: &GammaFactor,
        ta: f64,
        tb: f64,
    ) -> Result<Self> {
        let phase = if tb > ta { model.phase_integral(gamma.state, ta, tb)? } else { 0.0 };
        Ok(PropagatorFactor {
            state: gamma.state,
            excluded: gamma.excluded.clone(),
            delta: gamma.value,
            interval: (ta, tb),
            phase,
        })
    }

    /// Loop factor e^{i(t_b − t_a)δ}; magnitude never above one for Im δ ≥ 0.
    pub fn loop_factor(&self) -> C64 {
        (C64::i() * self.delta * (self.interval.1 - self.interval.0)).exp()
    }
}

/// Δ = i θ(t_b − t_a) e^{i∫Ē} e^{i(t_b − t_a)δ}.
pub fn geometric_propagator(factor: &PropagatorFactor) -> C64 {
    let (ta, tb) = factor.interval;
    if tb < ta {
        return C64::new(0.0, 0.0);
    }
    C64::i() * C64::from_polar(1.0, factor.phase) * factor.loop_factor()
}
