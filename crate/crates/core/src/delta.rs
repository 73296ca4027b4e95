//! The periodically driven delta barrier H = p²/2 − g₀ δ(x) sin t.
//!
//! During the attractive half period the instantaneous spectrum holds one
//! bound state ψ₀ = √κ e^{−κ|x|}, κ = g₀ sin t. Even scattering states
//! cos(k|x| + δ_k), tan δ_k = κ/k, are normalized to π δ(k − k'), so the
//! continuum measure is dk/π. Odd states never see the barrier.

use crate::engine::{energy_correction, gamma_resummed, ContinuumChannel, ResummedGamma};
use crate::quadrature::{gauss_legendre, Rule};
use crate::spectral::{FourierTable, FourierWindow, InstantModel, StateIndex};
use crate::{GppaError, Result, C64};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

pub const FIXED_POINT_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 100;
pub const DAMPING: f64 = 0.5;
/// Channels must stay open this far above ε₀ + nu_max.
pub const CHANNEL_MARGIN: f64 = 1.0;
const POLE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaConfig {
    pub g0: f64,
    pub k_max: f64,
    /// Gauss–Legendre nodes on (0, k_max].
    pub nodes: usize,
    pub nu_max: usize,
    /// Number of periods N, T = πN.
    pub periods: usize,
    /// Nodes of the time quadrature over the attractive half period.
    pub tau_nodes: usize,
    pub resonance_window: f64,
    /// Put the continuum–continuum term of γ_k into the ratio instead of the
    /// resonant bound term.
    pub retain_continuum_term: bool,
}

impl Default for DeltaConfig {
    fn default() -> Self {
        DeltaConfig {
            g0: 1.0,
            k_max: 12.0,
            nodes: 400,
            nu_max: 8,
            periods: 50,
            tau_nodes: 96,
            resonance_window: crate::engine::DEFAULT_RESONANCE_WINDOW,
            retain_continuum_term: false,
        }
    }
}

impl DeltaConfig {
    pub fn eps0(&self) -> f64 {
        -0.25 * self.g0 * self.g0
    }

    /// 2T = 2πN.
    pub fn span(&self) -> f64 {
        2.0 * PI * self.periods as f64
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.g0.is_finite() && self.g0 >= 0.0) {
            errs.push(format!("g0 must be finite and >= 0 (got {})", self.g0));
        }
        if !(self.k_max.is_finite() && self.k_max > 0.0) {
            errs.push(format!("k_max must be positive (got {})", self.k_max));
        } else if 0.5 * self.k_max * self.k_max < self.eps0() + self.nu_max as f64 + CHANNEL_MARGIN {
            errs.push(format!(
                "k_max = {} leaves channels up to nu_max = {} unrepresented (need k_max^2/2 >= {})",
                self.k_max,
                self.nu_max,
                self.eps0() + self.nu_max as f64 + CHANNEL_MARGIN
            ));
        }
        if self.nodes < 8 {
            errs.push(format!("nodes must be >= 8 (got {})", self.nodes));
        }
        if self.tau_nodes < 8 {
            errs.push(format!("tau_nodes must be >= 8 (got {})", self.tau_nodes));
        }
        if self.nu_max == 0 {
            errs.push("nu_max must be >= 1".into());
        }
        if self.periods == 0 {
            errs.push("periods must be >= 1".into());
        }
        if !(self.resonance_window.is_finite() && self.resonance_window > 0.0) {
            errs.push(format!("resonance_window must be positive (got {})", self.resonance_window));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(GppaError::Validation(errs))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaModel {
    pub g0: f64,
}

impl DeltaModel {
    pub fn new(g0: f64) -> Self {
        DeltaModel { g0 }
    }

    pub fn kappa(&self, t: f64) -> f64 {
        self.g0 * t.sin()
    }

    /// E₀(t) = −κ²/2 while the barrier is attractive.
    pub fn bound_energy(&self, t: f64) -> Option<f64> {
        let k = self.kappa(t);
        (k > 0.0).then(|| -0.5 * k * k)
    }

    /// Φ₀k(t) = −2i g₀ cos t √κ k / (k² + κ²)^{3/2}; zero without a bound state.
    pub fn bound_flip(&self, k: f64, t: f64) -> C64 {
        let kap = self.kappa(t);
        if kap <= 0.0 {
            return C64::new(0.0, 0.0);
        }
        let v = -2.0 * self.g0 * t.cos() * kap.sqrt() * k / (k * k + kap * kap).powf(1.5);
        C64::new(0.0, v)
    }

    /// Φ_{k'k}(t) between even scattering states, k' ≠ k.
    pub fn continuum_flip(&self, kp: f64, k: f64, t: f64) -> C64 {
        let kap = self.kappa(t);
        let cp = kp / (kp * kp + kap * kap).sqrt();
        let c = k / (k * k + kap * kap).sqrt();
        let v = -self.g0 * t.cos() * cp * c / (0.5 * (k * k - kp * kp));
        C64::new(0.0, v)
    }

    /// ∫ E₀ dt in closed form; the interval must lie in one attractive half period.
    fn bound_phase(&self, ta: f64, tb: f64) -> Result<f64> {
        let base = (ta / (2.0 * PI)).floor() * 2.0 * PI;
        let inside = |t: f64| t >= base - 1e-12 && t <= base + PI + 1e-12;
        if !(inside(ta) && inside(tb)) {
            return Err(GppaError::Invalid(format!(
                "bound state absent on part of [{ta}, {tb}]"
            )));
        }
        let prim = |t: f64| -0.25 * self.g0 * self.g0 * ((t - base) - 0.5 * (2.0 * (t - base)).sin());
        Ok(prim(tb) - prim(ta))
    }
}

impl InstantModel for DeltaModel {
    fn energy(&self, n: StateIndex, t: f64) -> Result<f64> {
        match n {
            StateIndex::Discrete(0) => self
                .bound_energy(t)
                .ok_or_else(|| GppaError::Invalid(format!("no bound state at t = {t}"))),
            StateIndex::Continuum(k) => Ok(0.5 * k * k),
            other => Err(GppaError::Invalid(format!("state {other} not in the delta spectrum"))),
        }
    }

    fn flip(&self, n: StateIndex, m: StateIndex, t: f64) -> Result<C64> {
        match (n, m) {
            (StateIndex::Discrete(0), StateIndex::Continuum(k)) => Ok(self.bound_flip(k, t)),
            (StateIndex::Continuum(k), StateIndex::Discrete(0)) => Ok(-self.bound_flip(k, t)),
            (StateIndex::Continuum(kp), StateIndex::Continuum(k)) => {
                if kp == k {
                    Err(GppaError::Degenerate { n: n.to_string(), m: m.to_string(), t, gap: 0.0 })
                } else {
                    Ok(self.continuum_flip(kp, k, t))
                }
            }
            _ => Err(GppaError::Invalid(format!("no flip between {n} and {m}"))),
        }
    }

    fn period(&self) -> Option<f64> {
        Some(2.0 * PI)
    }

    fn couples(&self, n: StateIndex, m: StateIndex) -> bool {
        n != m && !(n.is_discrete() && m.is_discrete())
    }

    fn phase_integral(&self, n: StateIndex, ta: f64, tb: f64) -> Result<f64> {
        match n {
            StateIndex::Discrete(0) => self.bound_phase(ta, tb),
            StateIndex::Continuum(k) => Ok(0.5 * k * k * (tb - ta)),
            other => Err(GppaError::Invalid(format!("state {other} not in the delta spectrum"))),
        }
    }

    fn averaging_window(&self, n: StateIndex, window: (f64, f64)) -> (f64, f64) {
        if n.is_discrete() {
            (0.0, PI)
        } else {
            window
        }
    }
}

/// Rule on [0, π] through τ = (π/2)(1 − cos θ), which clusters nodes at
/// both ends of the attractive window where low-k flips are sharp.
fn half_period_rule(n: usize) -> Rule {
    let (x, w) = gauss_legendre(n);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (x, w) in x.iter().zip(&w) {
        let th = 0.5 * PI * (x + 1.0);
        nodes.push(0.5 * PI * (1.0 - th.cos()));
        weights.push(0.5 * PI * th.sin() * 0.5 * PI * w);
    }
    Rule { nodes, weights }
}

/// Bound–continuum coefficients B₀k(ν) on the momentum grid.
#[derive(Clone, Debug)]
pub struct DeltaChannel {
    pub cfg: DeltaConfig,
    pub model: DeltaModel,
    rule: Rule,
    tau: Rule,
    /// table[i][ν + nu_max] = B₀k(ν) at node i.
    table: Vec<Vec<C64>>,
}

impl DeltaChannel {
    pub fn nodes(&self) -> &[f64] {
        &self.rule.nodes
    }

    /// B₀k(ν) for ν = −nu_max..=nu_max from one pass over the time nodes.
    pub fn coefficients(&self, k: f64) -> Vec<C64> {
        let nm = self.cfg.nu_max as i64;
        let g2 = self.model.g0 * self.model.g0;
        let mut out = vec![C64::new(0.0, 0.0); 2 * self.cfg.nu_max + 1];
        for (&t, &w) in self.tau.nodes.iter().zip(&self.tau.weights) {
            let f = self.model.bound_flip(k, t) * C64::from_polar(w / (2.0 * PI).sqrt(), g2 / 8.0 * (2.0 * t).sin());
            for (j, nu) in (-nm..=nm).enumerate() {
                out[j] += f * C64::from_polar(1.0, nu as f64 * t);
            }
        }
        out
    }

    /// B₀k(ν) and B_k0(ν) for the node grid as a Fourier table with T = π.
    pub fn table(&self) -> FourierTable {
        let mut t = FourierTable::empty(FourierWindow::new(PI), self.cfg.nu_max);
        for (k, b) in self.rule.nodes.iter().zip(&self.table) {
            t.insert(StateIndex::Discrete(0), StateIndex::Continuum(*k), b.clone());
        }
        t
    }

    /// Node spacing near k.
    fn spacing(&self, k: f64) -> f64 {
        let n = &self.rule.nodes;
        let i = n.partition_point(|&x| x < k).clamp(1, n.len() - 1);
        n[i] - n[i - 1]
    }
}

impl ContinuumChannel for DeltaChannel {
    fn rule(&self) -> &Rule {
        &self.rule
    }
    fn k_max(&self) -> f64 {
        self.cfg.k_max
    }
    fn measure(&self) -> f64 {
        1.0 / PI
    }
    fn nu_max(&self) -> usize {
        self.cfg.nu_max
    }
    fn omega(&self) -> f64 {
        1.0
    }
    fn inverse_span(&self) -> f64 {
        1.0 / (2.0 * PI)
    }
    fn coupling(&self, k: f64, nu: i64) -> C64 {
        if nu.unsigned_abs() as usize > self.cfg.nu_max {
            return C64::new(0.0, 0.0);
        }
        let g2 = self.model.g0 * self.model.g0;
        self.tau
            .nodes
            .iter()
            .zip(&self.tau.weights)
            .map(|(&t, &w)| {
                self.model.bound_flip(k, t) * C64::from_polar(w / (2.0 * PI).sqrt(), g2 / 8.0 * (2.0 * t).sin() + nu as f64 * t)
            })
            .sum()
    }
    fn coupling_at_node(&self, i: usize, nu: i64) -> C64 {
        if nu.unsigned_abs() as usize > self.cfg.nu_max {
            return C64::new(0.0, 0.0);
        }
        self.table[i][(nu + self.cfg.nu_max as i64) as usize]
    }
}

pub fn b_coefficients(cfg: &DeltaConfig) -> Result<DeltaChannel> {
    cfg.validate()?;
    let model = DeltaModel::new(cfg.g0);
    let rule = Rule::gauss(0.0, cfg.k_max, cfg.nodes);
    let tau = half_period_rule(cfg.tau_nodes);
    let mut ch = DeltaChannel { cfg: cfg.clone(), model, rule, tau, table: Vec::new() };
    ch.table = ch.rule.nodes.par_iter().map(|&k| ch.coefficients(k)).collect();
    Ok(ch)
}

/// B_{k'k}(ν) = ∫_{−π}^{π} dτ/√(2π) Φ_{k'k}(τ) e^{iντ} for ν = −nu_max..=nu_max.
pub fn continuum_coefficients(model: &DeltaModel, kp: f64, k: f64, nu_max: usize) -> Vec<C64> {
    let rule = Rule::gauss(-PI, PI, 64);
    let nm = nu_max as i64;
    (-nm..=nm)
        .map(|nu| {
            rule.integrate_c(|t| model.continuum_flip(kp, k, t) * C64::from_polar(1.0 / (2.0 * PI).sqrt(), nu as f64 * t))
        })
        .collect()
}

/// The continuum–continuum term of γ_k,
/// (1/π) Σ_ν ∫dk' |B_{k'k}(−ν)|² / (ε_{k'} − ε_k + ν − i0),
/// on the node grid with the diagonal band |k' − k| < 2dk and the same band
/// around the pole removed. Diagnostic only: the term belongs to γ_k^{[0]}.
pub fn continuum_term(ch: &DeltaChannel, k: f64) -> C64 {
    let nm = ch.cfg.nu_max as i64;
    let eps_k = 0.5 * k * k;
    let band = 2.0 * ch.spacing(k);
    let coeffs: Vec<Vec<C64>> = ch
        .rule
        .nodes
        .par_iter()
        .map(|&kp| {
            if (kp - k).abs() < band {
                Vec::new()
            } else {
                continuum_coefficients(&ch.model, kp, k, ch.cfg.nu_max)
            }
        })
        .collect();
    let mut total = C64::new(0.0, 0.0);
    for nu in -nm..=nm {
        // B_{k'k}(−ν) sits at index −ν + nm
        let j = (nm - nu) as usize;
        let c = eps_k - nu as f64;
        let k0 = if c > 0.0 { Some((2.0 * c).sqrt()) } else { None };
        for ((&kp, &w), b) in ch.rule.nodes.iter().zip(&ch.rule.weights).zip(&coeffs) {
            if b.is_empty() || k0.is_some_and(|k0| (kp - k0).abs() < band) {
                continue;
            }
            total += C64::new(w * b[j].norm_sqr() / (0.5 * kp * kp - c), 0.0);
        }
        if let Some(k0) = k0 {
            if (k0 - k).abs() >= band && k0 < ch.cfg.k_max {
                let b = continuum_coefficients(&ch.model, k0, k, ch.cfg.nu_max)[j];
                total += C64::new(0.0, PI * b.norm_sqr() / k0);
            }
        }
    }
    total / PI
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProfileSource {
    GppaRatio,
    FloquetElastic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransmissionProfile {
    /// (ε_k, value)
    pub samples: Vec<(f64, f64)>,
    pub source: ProfileSource,
    pub params: DeltaConfig,
}

impl TransmissionProfile {
    pub fn argmin(&self) -> Option<(f64, f64)> {
        self.samples.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransmissionPoint {
    pub eps: f64,
    pub gamma: ResummedGamma,
    /// γ_k − γ_k^{[0]} as entered in the exponent.
    pub exponent_gamma: C64,
    pub ratio: f64,
}

/// |T_kk| = |exp(i 2T (γ_k − γ_k^{[0]}))| at one incoming energy.
pub fn transmission_point(ch: &DeltaChannel, eps: f64) -> Result<TransmissionPoint> {
    if !(eps > 0.0) {
        return Err(GppaError::Invalid(format!("incoming energy must be positive (got {eps})")));
    }
    let k = (2.0 * eps).sqrt();
    if k >= ch.cfg.k_max {
        return Err(GppaError::Invalid(format!("k = {k} outside the grid (k_max = {})", ch.cfg.k_max)));
    }
    let gamma = gamma_resummed(ch, ch.cfg.eps0(), k, ch.cfg.resonance_window, POLE_TOL)?;
    let exponent_gamma = if ch.cfg.retain_continuum_term {
        gamma.total - gamma.first + continuum_term(ch, k)
    } else {
        gamma.total
    };
    let ratio = (-ch.cfg.span() * exponent_gamma.im).exp();
    Ok(TransmissionPoint { eps, gamma, exponent_gamma, ratio })
}

pub fn transmission_ratio(ch: &DeltaChannel, eps_grid: &[f64]) -> Result<TransmissionProfile> {
    let samples = eps_grid
        .par_iter()
        .map(|&e| transmission_point(ch, e).map(|p| (e, p.ratio)))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransmissionProfile { samples, source: ProfileSource::GppaRatio, params: ch.cfg.clone() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FixedPointMethod {
    DampedIteration,
    Illinois,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceReport {
    pub n: usize,
    pub eps_res: f64,
    pub k: f64,
    pub re_de: f64,
    pub im_de: f64,
    /// The resonant (first) term of γ_k.
    pub gamma_k: C64,
    /// All bound-state terms of γ_k.
    pub gamma_total: C64,
    pub iterations: usize,
    pub method: FixedPointMethod,
    /// (ν, contribution) to Im δε from each open channel.
    pub im_terms: Vec<(i64, f64)>,
    pub tkk_profile: TransmissionProfile,
}

impl ResonanceReport {
    /// Ratio of the ν = −n contribution to the rest of Im δε.
    pub fn dominance(&self) -> f64 {
        let lead = self.im_terms.iter().find(|(nu, _)| *nu == -(self.n as i64)).map(|t| t.1).unwrap_or(0.0);
        let rest: f64 = self.im_terms.iter().filter(|(nu, _)| *nu != -(self.n as i64)).map(|t| t.1).sum();
        lead / rest
    }
}

/// Contributions |B₀k₀(ν)|²/k₀ of each open channel to Im δε₀k(n).
pub fn im_correction_terms(ch: &DeltaChannel, eps: f64, n: usize) -> Vec<(i64, f64)> {
    let nm = ch.cfg.nu_max as i64;
    (-nm..=nm)
        .filter_map(|nu| {
            let c = eps - (n as i64 + nu) as f64;
            if c <= 0.0 {
                return None;
            }
            let k0 = (2.0 * c).sqrt();
            Some((nu, ch.coupling(k0, nu).norm_sqr() / k0))
        })
        .collect()
}

/// Re δε₀k(n) evaluated at incoming energy ε.
fn re_correction(ch: &DeltaChannel, eps: f64, n: usize) -> Result<f64> {
    Ok(energy_correction(ch, eps, n as i64)?.re)
}

/// F(ε) = ε₀ + n − Re δε(ε) − ε; its zero cancels the real part of the
/// dressed resonant denominator.
fn residual(ch: &DeltaChannel, eps: f64, n: usize) -> Result<f64> {
    Ok(ch.cfg.eps0() + n as f64 - re_correction(ch, eps, n)? - eps)
}

fn damped_iteration(ch: &DeltaChannel, n: usize) -> Option<(f64, usize)> {
    let mut eps = ch.cfg.eps0() + n as f64;
    let mut last_step = f64::INFINITY;
    let mut growth = 0;
    for it in 1..=MAX_ITERATIONS {
        let target = ch.cfg.eps0() + n as f64 - re_correction(ch, eps, n).ok()?;
        let next = (1.0 - DAMPING) * eps + DAMPING * target;
        let step = (next - eps).abs();
        if !(next > 0.0) || !next.is_finite() {
            return None;
        }
        eps = next;
        if step < FIXED_POINT_TOL {
            return Some((eps, it));
        }
        if step > last_step {
            growth += 1;
            if growth >= 3 {
                return None;
            }
        } else {
            growth = 0;
        }
        last_step = step;
    }
    None
}

/// Scan outward from ε₀ + n for the nearest sign change of F, then refine it
/// with the Illinois variant of regula falsi.
fn bracketed_root(ch: &DeltaChannel, n: usize) -> Result<(f64, usize)> {
    let centre = ch.cfg.eps0() + n as f64;
    let h = 0.01;
    let eval = |e: f64| -> Option<f64> {
        if e <= 0.0 {
            return None;
        }
        residual(ch, e, n).ok()
    };
    let mut bracket = None;
    let mut prev_up = eval(centre).map(|f| (centre, f));
    let mut prev_dn = prev_up;
    'scan: for j in 1..=100 {
        for (dir, prev) in [(1.0, &mut prev_up), (-1.0, &mut prev_dn)] {
            let e = centre + dir * h * j as f64;
            let cur = eval(e).map(|f| (e, f));
            if let (Some(p), Some(c)) = (*prev, cur) {
                if p.1 == 0.0 {
                    return Ok((p.0, 0));
                }
                if p.1.signum() != c.1.signum() {
                    bracket = Some(if p.0 < c.0 { (p, c) } else { (c, p) });
                    break 'scan;
                }
            }
            *prev = cur;
        }
    }
    let ((mut a, mut fa), (mut b, mut fb)) =
        bracket.ok_or_else(|| GppaError::NoFixedPoint(format!("no sign change of the resonance condition near {centre}")))?;
    let mut side = 0;
    for it in 1..=MAX_ITERATIONS {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = residual(ch, c, n)?;
        if fc.abs() < FIXED_POINT_TOL || (b - a).abs() < FIXED_POINT_TOL {
            return Ok((c, it));
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
    }
    Err(GppaError::NoFixedPoint(format!("Illinois search did not converge in [{a}, {b}]")))
}

/// Resonant incoming energy ε_k = ε₀ + n − Re δε₀k(n) with a profile of
/// |T_kk| in ±`half_width` around it.
pub fn resonance_locate(ch: &DeltaChannel, n: usize, half_width: f64, points: usize) -> Result<ResonanceReport> {
    if n == 0 {
        return Err(GppaError::Invalid("sideband n must be >= 1".into()));
    }
    let (eps, iterations, method) = match damped_iteration(ch, n) {
        Some((e, it)) => (e, it, FixedPointMethod::DampedIteration),
        None => {
            let (e, it) = bracketed_root(ch, n)?;
            (e, it, FixedPointMethod::Illinois)
        }
    };
    let f = residual(ch, eps, n)?;
    if f.abs() > 1e-8 {
        return Err(GppaError::NoFixedPoint(format!("residual {f:e} at eps = {eps}")));
    }
    let k = (2.0 * eps).sqrt();
    let de = energy_correction(ch, eps, n as i64)?;
    let point = transmission_point(ch, eps)?;
    let grid: Vec<f64> = (0..points)
        .map(|i| eps - half_width + 2.0 * half_width * i as f64 / (points.max(2) - 1) as f64)
        .filter(|&e| e > 0.0)
        .collect();
    let tkk_profile = transmission_ratio(ch, &grid)?;
    Ok(ResonanceReport {
        n,
        eps_res: eps,
        k,
        re_de: de.re,
        im_de: de.im,
        gamma_k: point.gamma.first,
        gamma_total: point.gamma.total,
        iterations,
        method,
        im_terms: im_correction_terms(ch, eps, n),
        tkk_profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(g0: f64) -> DeltaConfig {
        DeltaConfig { g0, nodes: 200, ..DeltaConfig::default() }
    }

    #[test]
    fn bound_state_at_quarter_period() {
        let m = DeltaModel::new(1.3);
        let e = m.energy(StateIndex::Discrete(0), PI / 2.0).unwrap();
        // −ψ''/2 − g δ ψ = E ψ with ψ = √κ e^{−κ|x|}: jump −κ = −g ⇒ E = −κ²/2
        assert!((e + 0.5 * 1.3 * 1.3).abs() < 1e-15);
        assert!(m.energy(StateIndex::Discrete(0), 4.0).is_err());
        assert_eq!(m.bound_flip(1.0, 4.0), C64::new(0.0, 0.0));
    }

    #[test]
    fn bound_phase_matches_quadrature() {
        let m = DeltaModel::new(0.8);
        let num = crate::quadrature::adaptive(|t| m.bound_energy(t).unwrap_or(0.0) + 0.16, 0.0, 1.1, 1e-13).unwrap();
        let closed = m.phase_integral(StateIndex::Discrete(0), 0.0, 1.1).unwrap() + 0.16 * 1.1;
        assert!((num - closed).abs() < 1e-12);
        // ∫(E₀ − ε₀) from 0 reproduces g² sin 2τ / 8
        assert!((closed - 0.64 / 8.0 * (2.2f64).sin()).abs() < 1e-12);
    }

    #[test]
    fn coefficients_vanish_without_driving() {
        let ch = b_coefficients(&small(0.0)).unwrap();
        assert!(ch.table.iter().flatten().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn mapped_rule_matches_adaptive_quadrature() {
        let ch = b_coefficients(&small(1.0)).unwrap();
        let m = ch.model;
        for &k in &[0.3, 1.4, 3.0] {
            for nu in [-2i64, 1, 3] {
                let f = |t: f64| m.bound_flip(k, t) * C64::from_polar(1.0 / (2.0 * PI).sqrt(), (2.0 * t).sin() / 8.0 + nu as f64 * t);
                // √τ endpoint behaviour: substitute τ = u² and τ = π − u²
                let half = (0.5 * PI).sqrt();
                let reference = Rule::composite(0.0, half, 400, 16).integrate_c(|u| (f(u * u) + f(PI - u * u)) * (2.0 * u));
                let d = (ch.coupling(k, nu) - reference).norm();
                assert!(d < 1e-8, "k={k} nu={nu} diff {d:e}");
            }
        }
    }
}
