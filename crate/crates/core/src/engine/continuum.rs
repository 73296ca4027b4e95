//! A discrete state coupled to a continuum: energy corrections with the
//! −i0 prescription and the (optionally dressed) second-order γ of a
//! continuum state.

use crate::quadrature::{principal_value, Rule};
use crate::{GppaError, Result, C64};
use std::f64::consts::PI;

/// Dressing activates when |bare denominator| ≤ this multiple of |δε|.
pub const DEFAULT_RESONANCE_WINDOW: f64 = 3.0;

/// Couplings B_{dk}(ν) between one discrete state d and continuum states
/// k with energy k²/2 and measure `measure()·dk`.
pub trait ContinuumChannel: Sync {
    fn rule(&self) -> &Rule;
    fn k_max(&self) -> f64;
    fn measure(&self) -> f64;
    fn nu_max(&self) -> usize;
    /// Base frequency ω of the sidebands.
    fn omega(&self) -> f64;
    /// 1/(2T) of the Fourier convention.
    fn inverse_span(&self) -> f64;
    /// B_{dk}(ν) at an arbitrary momentum.
    fn coupling(&self, k: f64, nu: i64) -> C64;
    /// B_{dk}(ν) at grid node `i` (cached by implementors).
    fn coupling_at_node(&self, i: usize, nu: i64) -> C64;
}

/// ∫_0^K dk f(k) / (k²/2 − c − i0), with `f` sampled at the grid nodes and
/// callable anywhere.
fn resolvent<C: ContinuumChannel + ?Sized, F: Fn(f64) -> f64>(
    ch: &C,
    nodes_f: &[C64],
    f: F,
    c: f64,
) -> Result<C64> {
    let rule = ch.rule();
    if c <= 0.0 {
        let v: C64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .zip(nodes_f)
            .map(|((&k, &w), &fk)| fk * w / (0.5 * k * k - c))
            .sum();
        return Ok(v);
    }
    let k0 = (2.0 * c).sqrt();
    let (lo, hi) = (rule.nodes[0], rule.nodes[rule.len() - 1]);
    if !(k0 > lo && k0 < hi) {
        return Err(GppaError::GridTooCoarse(format!(
            "root k0 = {k0} not bracketed by grid [{lo}, {hi}]"
        )));
    }
    // 1/(k²/2 − c) = [2/(k + k0)] / (k − k0)
    let g_nodes: Vec<C64> = rule
        .nodes
        .iter()
        .zip(nodes_f)
        .map(|(&k, &fk)| fk * (2.0 / (k + k0)))
        .collect();
    let g = |k: f64| C64::new(2.0 * f(k) / (k + k0), 0.0);
    let pv = principal_value(rule, ch.k_max(), k0, &g_nodes, g)?;
    Ok(pv + C64::new(0.0, PI * f(k0) / k0))
}

/// δε(ν₁) for a continuum state of energy `eps_state`: the bound–continuum–
/// bound correction Σ_{ν₂} measure ∫dk' |B_{dk'}(ν₂)|² / (ε_{k'} − ε + ω(ν₁ + ν₂) − i0).
pub fn energy_correction<C: ContinuumChannel + ?Sized>(
    ch: &C,
    eps_state: f64,
    nu1: i64,
) -> Result<C64> {
    let nm = ch.nu_max() as i64;
    let mut total = C64::new(0.0, 0.0);
    for nu2 in -nm..=nm {
        let nodes_f: Vec<C64> = (0..ch.rule().len())
            .map(|i| C64::new(ch.coupling_at_node(i, nu2).norm_sqr(), 0.0))
            .collect();
        if nodes_f.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            continue;
        }
        let c = eps_state - ch.omega() * (nu1 + nu2) as f64;
        total += resolvent(ch, &nodes_f, |k| ch.coupling(k, nu2).norm_sqr(), c)?;
    }
    Ok(total * ch.measure())
}

/// Second-order γ of continuum state k through the discrete state, term by
/// term in ν: (1/2T) B_{kd}(ν) B_{dk}(−ν) / (ε_d − ε_k + ων).
fn bound_terms<C: ContinuumChannel + ?Sized>(ch: &C, eps_d: f64, k: f64) -> Vec<(i64, f64, f64)> {
    let nm = ch.nu_max() as i64;
    let eps_k = 0.5 * k * k;
    (-nm..=nm)
        .map(|nu| {
            // B_{kd}(ν) = conj(B_{dk}(−ν))
            let num = ch.coupling(k, -nu).norm_sqr() * ch.inverse_span();
            (nu, num, eps_d - eps_k + ch.omega() * nu as f64)
        })
        .collect()
}

/// Bare second-order γ_k through the discrete state.
pub fn gamma2_bound<C: ContinuumChannel + ?Sized>(ch: &C, eps_d: f64, k: f64, pole_tol: f64) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for (_, num, den) in bound_terms(ch, eps_d, k) {
        if num == 0.0 {
            continue;
        }
        if den.abs() < pole_tol {
            return Err(GppaError::UnresolvedPole { state: format!("k={k}"), denominator: den });
        }
        acc += C64::new(num / den, 0.0);
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResummedGamma {
    pub total: C64,
    /// The term at the resonant sideband ν*.
    pub first: C64,
    pub nu_res: i64,
    pub energy_correction: C64,
    pub dressed: bool,
}

/// γ_k with the resonant denominator dressed by δε when
/// |ε_d − ε_k + ων*| ≤ `window`·|δε(ν*)|; otherwise identical to
/// [`gamma2_bound`].
pub fn gamma_resummed<C: ContinuumChannel + ?Sized>(
    ch: &C,
    eps_d: f64,
    k: f64,
    window: f64,
    pole_tol: f64,
) -> Result<ResummedGamma> {
    let eps_k = 0.5 * k * k;
    let nu_res = ((eps_k - eps_d) / ch.omega()).round() as i64;
    let de = if nu_res >= 1 && nu_res <= ch.nu_max() as i64 {
        energy_correction(ch, eps_k, nu_res)?
    } else {
        C64::new(0.0, 0.0)
    };
    let mut total = C64::new(0.0, 0.0);
    let mut first = C64::new(0.0, 0.0);
    let mut dressed = false;
    for (nu, num, den) in bound_terms(ch, eps_d, k) {
        if num == 0.0 {
            continue;
        }
        let term = if nu == nu_res && de != C64::new(0.0, 0.0) && den.abs() <= window * de.norm() {
            dressed = true;
            C64::new(num, 0.0) / (C64::new(den, 0.0) - de)
        } else {
            if den.abs() < pole_tol {
                return Err(GppaError::UnresolvedPole { state: format!("k={k}"), denominator: den });
            }
            C64::new(num / den, 0.0)
        };
        if nu == nu_res {
            first = term;
        }
        total += term;
    }
    Ok(ResummedGamma { total, first, nu_res, energy_correction: de, dressed })
}
