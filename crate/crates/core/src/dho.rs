//! Driven harmonic oscillator H = p²/2 + Ω²x²/2 + x·J(t) under a
//! polychromatic Gaussian driving J(t) = g·⟨sin ωt⟩, ω ~ N(Ω, σ²).

use crate::engine::{series_from_ratio, AmplitudeSeries, DysonOrders, DysonSolver, NormalizedOrders};
use crate::quadrature::Rule;
use crate::spectral::{InstantModel, StateIndex};
use crate::{GppaError, Result, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

/// Pulse half-window in units of 1/σ; the envelope is e^{−40} at the edge.
/// RK4 steps over the pulse window (before the two Richardson refinements).
pub const DEFAULT_STEPS: usize = 2000;

pub const WINDOW_SIGMAS: f64 = 9.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pulses {
    Infinite,
    Finite(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolyDriving {
    pub g: f64,
    pub sigma: f64,
    pub omega: f64,
    pub pulses: Pulses,
    pub seed: u64,
    /// Set when σ < 5Ω was accepted explicitly.
    pub forced: bool,
    freqs: Vec<f64>,
}

impl PolyDriving {
    /// N → ∞ driving J(t) = g e^{−σ²t²/2} sin Ωt.
    pub fn infinite(g: f64, sigma: f64, omega: f64) -> Result<Self> {
        Self::build(g, sigma, omega, Pulses::Infinite, 0, false)
    }

    /// `n` pulses with frequencies drawn from N(Ω, σ²) by a seeded ChaCha stream.
    pub fn finite(g: f64, sigma: f64, omega: f64, n: usize, seed: u64) -> Result<Self> {
        Self::build(g, sigma, omega, Pulses::Finite(n), seed, false)
    }

    /// Accept σ < 5Ω; results outside σ ≫ Ω are not covered by the closed forms.
    pub fn forced(mut self) -> Self {
        self.forced = true;
        self
    }

    pub fn with_force(g: f64, sigma: f64, omega: f64) -> Result<Self> {
        Self::build(g, sigma, omega, Pulses::Infinite, 0, true)
    }

    fn build(g: f64, sigma: f64, omega: f64, pulses: Pulses, seed: u64, forced: bool) -> Result<Self> {
        if !(sigma > 0.0 && omega > 0.0 && g.is_finite()) {
            return Err(GppaError::Invalid(format!("need sigma > 0, Omega > 0, finite g (got {sigma}, {omega}, {g})")));
        }
        if sigma < 5.0 * omega && !forced {
            return Err(GppaError::Invalid(format!(
                "sigma/Omega below 5 ({}); pass force to override",
                sigma / omega
            )));
        }
        let freqs = match pulses {
            Pulses::Infinite => Vec::new(),
            Pulses::Finite(0) => return Err(GppaError::Invalid("finite driving needs N >= 1".into())),
            Pulses::Finite(n) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let dist = Normal::new(omega, sigma).map_err(|e| GppaError::Invalid(e.to_string()))?;
                (0..n).map(|_| dist.sample(&mut rng)).collect()
            }
        };
        Ok(PolyDriving { g, sigma, omega, pulses, seed, forced, freqs })
    }

    pub fn with_g(&self, g: f64) -> Self {
        PolyDriving { g, ..self.clone() }
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.freqs
    }

    pub fn j(&self, t: f64) -> f64 {
        match self.pulses {
            Pulses::Infinite => self.g * (-0.5 * self.sigma * self.sigma * t * t).exp() * (self.omega * t).sin(),
            Pulses::Finite(n) => self.g / n as f64 * self.freqs.iter().map(|w| (w * t).sin()).sum::<f64>(),
        }
    }

    pub fn j_dot(&self, t: f64) -> f64 {
        match self.pulses {
            Pulses::Infinite => {
                let s2 = self.sigma * self.sigma;
                self.g
                    * (-0.5 * s2 * t * t).exp()
                    * (self.omega * (self.omega * t).cos() - s2 * t * (self.omega * t).sin())
            }
            Pulses::Finite(n) => self.g / n as f64 * self.freqs.iter().map(|w| w * (w * t).cos()).sum::<f64>(),
        }
    }

    /// Half-width T of the integration window.
    pub fn t_half(&self) -> f64 {
        WINDOW_SIGMAS / self.sigma
    }

    /// Windowed transform of the sampled driving over [−W, W]: the mean over
    /// pulses and its Monte-Carlo standard error (imaginary parts; the
    /// transform of a sum of sines is purely imaginary).
    pub fn sampled_transform(&self, k: f64, w: f64) -> Result<(f64, f64)> {
        let Pulses::Finite(n) = self.pulses else {
            return Err(GppaError::Invalid("sampled transform needs finite-N driving".into()));
        };
        let sinc = |x: f64| if x.abs() < 1e-12 { w } else { (x * w).sin() / x };
        let vals: Vec<f64> = self
            .freqs
            .iter()
            .map(|&om| self.g * (sinc(om - k) - sinc(om + k)) / (2.0 * PI).sqrt())
            .collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n.max(2) - 1) as f64;
        Ok((mean, (var / n as f64).sqrt()))
    }
}

/// J̃(k) = (g/2iσ)[e^{−(k+Ω)²/2σ²} − e^{−(k−Ω)²/2σ²}], the (2π)^{−1/2} transform of J.
pub fn j_tilde(driving: &PolyDriving, k: f64) -> Result<C64> {
    if driving.pulses != Pulses::Infinite {
        return Err(GppaError::Invalid("closed-form transform needs infinite-N driving".into()));
    }
    let s2 = 2.0 * driving.sigma * driving.sigma;
    let d = (-(k + driving.omega).powi(2) / s2).exp() - (-(k - driving.omega).powi(2) / s2).exp();
    Ok(C64::new(0.0, -driving.g * d / (2.0 * driving.sigma)))
}

/// a = (π/Ω)^{1/2} |J̃(Ω)|.
pub fn alpha_parameter(driving: &PolyDriving) -> Result<f64> {
    Ok((PI / driving.omega).sqrt() * j_tilde(driving, driving.omega)?.norm())
}

/// Coupling g that produces expansion parameter `a`.
pub fn g_for_alpha(a: f64, sigma: f64, omega: f64) -> f64 {
    let s2 = 2.0 * sigma * sigma;
    let unit = (1.0 - (-(2.0 * omega).powi(2) / s2).exp()) / (2.0 * sigma) * (PI / omega).sqrt();
    a / unit
}

/// f(n, a²) = 1 − 2na² + (n/2)(3n − 1)a⁴.
pub fn f_polynomial(n: usize, a2: f64) -> f64 {
    let n = n as f64;
    1.0 - 2.0 * n * a2 + 0.5 * n * (3.0 * n - 1.0) * a2 * a2
}

/// Generalized Laguerre polynomial L_n^{(α)}(x).
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let (mut l0, mut l1) = (1.0, 1.0 + alpha - x);
    if n == 0 {
        return l0;
    }
    for k in 1..n {
        let k = k as f64;
        let l2 = ((2.0 * k + 1.0 + alpha - x) * l1 - (k + alpha) * l0) / (k + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// ⟨n|D(β)|m⟩ for real β.
pub fn displaced_overlap(n: usize, m: usize, beta: f64) -> f64 {
    let (hi, lo, sign) = if n >= m { (n, m, 1.0) } else { (m, n, if (m - n) % 2 == 0 { 1.0 } else { -1.0 }) };
    let ratio: f64 = (lo + 1..=hi).map(|k| 1.0 / k as f64).product::<f64>().sqrt();
    sign * ratio * beta.powi((hi - lo) as i32) * (-0.5 * beta * beta).exp() * laguerre(lo, (hi - lo) as f64, beta * beta)
}

/// Exact forced-oscillator probability |⟨n|D|m⟩|² with |β|² = a².
pub fn probability_exact(a: f64, n: usize, m: usize) -> f64 {
    displaced_overlap(n, m, a).powi(2)
}

pub fn probabilities_exact(a: f64, pairs: &[(usize, usize)]) -> Vec<f64> {
    pairs.iter().map(|&(n, m)| probability_exact(a, n, m)).collect()
}

/// Instantaneous number states of the oscillator, displaced by −J/Ω².
#[derive(Clone, Debug)]
pub struct DhoModel {
    pub driving: PolyDriving,
}

impl DhoModel {
    pub fn new(driving: PolyDriving) -> Self {
        DhoModel { driving }
    }

    fn level(n: StateIndex) -> Result<usize> {
        match n {
            StateIndex::Discrete(n) => Ok(n),
            _ => Err(GppaError::Invalid("oscillator has no continuum".into())),
        }
    }

    /// A_nm with Φ_nm = i A_nm J̇.
    pub fn a_matrix(&self, n: usize, m: usize) -> f64 {
        let om = self.driving.omega;
        let pre = 1.0 / (om * (2.0 * om).sqrt());
        if m == n + 1 {
            pre * ((n + 1) as f64).sqrt()
        } else if n == m + 1 {
            -pre * (n as f64).sqrt()
        } else {
            0.0
        }
    }

    fn beta(&self, t: f64) -> f64 {
        -self.driving.j(t) / (2f64.sqrt() * self.driving.omega.powf(1.5))
    }

    pub fn window(&self) -> (f64, f64) {
        let t = self.driving.t_half();
        (-t, t)
    }

    pub fn basis(size: usize) -> Vec<StateIndex> {
        (0..size).map(StateIndex::Discrete).collect()
    }
}

impl InstantModel for DhoModel {
    fn energy(&self, n: StateIndex, t: f64) -> Result<f64> {
        let n = Self::level(n)?;
        let om = self.driving.omega;
        Ok((n as f64 + 0.5) * om - self.driving.j(t).powi(2) / (2.0 * om * om))
    }

    fn flip(&self, n: StateIndex, m: StateIndex, t: f64) -> Result<C64> {
        let a = self.a_matrix(Self::level(n)?, Self::level(m)?);
        if a == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        Ok(C64::new(0.0, a * self.driving.j_dot(t)))
    }

    fn overlap(&self, n: StateIndex, t: f64, m: StateIndex, s: f64) -> Option<C64> {
        let (n, m) = (Self::level(n).ok()?, Self::level(m).ok()?);
        Some(C64::new(displaced_overlap(n, m, self.beta(s) - self.beta(t)), 0.0))
    }

    fn period(&self) -> Option<f64> {
        None
    }

    fn couples(&self, n: StateIndex, m: StateIndex) -> bool {
        match (n, m) {
            (StateIndex::Discrete(a), StateIndex::Discrete(b)) => a.abs_diff(b) == 1,
            _ => false,
        }
    }

    fn time_scale(&self) -> f64 {
        1.0 / self.driving.sigma
    }

    fn phase_difference(&self, n: StateIndex, m: StateIndex, ta: f64, tb: f64) -> Result<f64> {
        let (n, m) = (Self::level(n)?, Self::level(m)?);
        Ok((n as f64 - m as f64) * self.driving.omega * (tb - ta))
    }
}

/// 2T γ_n^{(2)} as the direct double-time integral
/// i Σ_{n₁} ∫∫_{t₁<t₂} φ_{n n₁}(t₂) φ_{n₁ n}(t₁), by nested Gauss-Legendre panels.
pub fn gamma2_double_time(driving: &PolyDriving, n: usize, panels: usize) -> Result<C64> {
    let model = DhoModel::new(driving.clone());
    let (ti, tf) = model.window();
    let outer = Rule::composite(ti, tf, panels, 16);
    let mut total = C64::new(0.0, 0.0);
    let neighbours: Vec<usize> = [n.checked_sub(1), Some(n + 1)].into_iter().flatten().collect();
    let phi = |a: usize, b: usize, t: f64| -> C64 {
        let f = C64::new(0.0, model.a_matrix(a, b) * driving.j_dot(t));
        f * C64::from_polar(1.0, (a as f64 - b as f64) * driving.omega * (t - ti))
    };
    for &n1 in &neighbours {
        let s: C64 = outer
            .nodes
            .par_iter()
            .zip(&outer.weights)
            .map(|(&t2, &w2)| {
                let inner = Rule::composite(ti, t2, panels, 16);
                let i1: C64 = inner.integrate_c(|t1| phi(n1, n, t1));
                phi(n, n1, t2) * i1 * w2
            })
            .sum();
        total += s;
    }
    Ok(C64::i() * total)
}

/// Expansion of the oscillator at a reference coupling, rescalable to any
/// expansion parameter a (order r scales as a^r): normalized amplitudes
/// X_nm / X_00, the cumulants of every requested level, and bare Dyson
/// orders up to fourth order for the APT baseline.
#[derive(Clone, Debug)]
pub struct DhoExpansion {
    pub driving: PolyDriving,
    pub a_ref: f64,
    pub r_max: usize,
    pub window: (f64, f64),
    ratios: NormalizedOrders,
    logs: BTreeMap<usize, Vec<C64>>,
    bare: BTreeMap<usize, DysonOrders>,
}

impl DhoExpansion {
    /// Orders up to `r_max` starting from each level in `initials`; `top`
    /// is the highest level whose amplitudes are requested.
    pub fn new(sigma: f64, omega: f64, forced: bool, initials: &[usize], top: usize, r_max: usize, steps: usize) -> Result<Self> {
        let a_ref = 1.0;
        let g = g_for_alpha(a_ref, sigma, omega);
        let driving = if forced { PolyDriving::with_force(g, sigma, omega)? } else { PolyDriving::infinite(g, sigma, omega)? };
        let model = DhoModel::new(driving.clone());
        let size = top + r_max / 2 + 3;
        let solver = DysonSolver::new(&model, DhoModel::basis(size), model.window()).with_steps(steps);
        let mut starts: BTreeSet<usize> = initials.iter().copied().collect();
        starts.insert(0);
        let list: Vec<usize> = starts.into_iter().collect();
        let idx: Vec<StateIndex> = list.iter().map(|&m| StateIndex::Discrete(m)).collect();
        let none = BTreeSet::new();
        let (ratios, rest) = rayon::join(
            || solver.normalized(StateIndex::Discrete(0), &idx, &none, r_max),
            || {
                list.par_iter()
                    .map(|&m| {
                        let log = solver.normalized(StateIndex::Discrete(m), &[], &none, r_max)?.log;
                        let bare = solver.orders(StateIndex::Discrete(m), &none, 4)?;
                        Ok((m, log, bare))
                    })
                    .collect::<Vec<Result<_>>>()
            },
        );
        let mut logs = BTreeMap::new();
        let mut bare = BTreeMap::new();
        for item in rest {
            let (m, l, b) = item?;
            logs.insert(m, l);
            bare.insert(m, b);
        }
        Ok(DhoExpansion { driving, a_ref, r_max, window: model.window(), ratios: ratios?, logs, bare })
    }

    /// Expansion covering every (n, m) in `pairs` at the default step count.
    pub fn for_pairs(sigma: f64, omega: f64, forced: bool, pairs: &[(usize, usize)], r_max: usize) -> Result<Self> {
        let top = pairs.iter().map(|&(n, m)| n.max(m)).max().unwrap_or(0);
        let mut initials: Vec<usize> = pairs.iter().flat_map(|&(n, m)| [n, m]).collect();
        initials.sort_unstable();
        initials.dedup();
        Self::new(sigma, omega, forced, &initials, top, r_max, DEFAULT_STEPS)
    }

    fn scale(&self, v: &[C64], a: f64) -> Vec<C64> {
        let s = a / self.a_ref;
        v.iter().enumerate().map(|(r, z)| z * s.powi(r as i32)).collect()
    }

    fn missing(m: usize) -> GppaError {
        GppaError::Invalid(format!("expansion lacks level {m}"))
    }

    /// Bare Dyson orders X^{(r)}_{nm}, r = 0..=4.
    pub fn orders_at(&self, n: usize, m: usize, a: f64) -> Result<Vec<C64>> {
        let o = self.bare.get(&m).ok_or_else(|| Self::missing(m))?;
        Ok(self.scale(&o.series(StateIndex::Discrete(n)), a))
    }

    /// [λ^r](X_nm / X_00) for r = 0..=r_max.
    pub fn ratio_at(&self, n: usize, m: usize, a: f64) -> Result<Vec<C64>> {
        let y = self
            .ratios
            .ratio(StateIndex::Discrete(n), StateIndex::Discrete(m))
            .ok_or_else(|| Self::missing(m))?;
        Ok(self.scale(&y, a))
    }

    /// 2Tγ_n^{(r)} for r = 2..=r_max.
    pub fn gamma_exponents(&self, n: usize, a: f64) -> Result<Vec<C64>> {
        let b = self.scale(self.logs.get(&n).ok_or_else(|| Self::missing(n))?, a);
        Ok(b[2..].iter().map(|z| -C64::i() * z).collect())
    }

    pub fn series(&self, n: usize, m: usize, a: f64) -> Result<AmplitudeSeries> {
        let y = self.ratio_at(n, m, a)?;
        let log = self.scale(&self.logs[&0], a);
        Ok(series_from_ratio((StateIndex::Discrete(n), StateIndex::Discrete(m)), &y, &log, self.r_max))
    }

    /// P_nn = f(n, a²)e^{−a²}; P_nm = |X_nm^R|².
    pub fn p_gppa(&self, n: usize, m: usize, a: f64) -> Result<f64> {
        if n == m {
            return Ok(f_polynomial(n, a * a) * (-a * a).exp());
        }
        Ok(self.series(n, m, a)?.total.norm_sqr())
    }

    /// Order-4 truncation Σ_{r+s≤4} X^{(r)} conj X^{(s)} of the bare expansion.
    pub fn p_apt4(&self, n: usize, m: usize, a: f64) -> Result<f64> {
        let x = self.orders_at(n, m, a)?;
        let mut p = 0.0;
        for r in 0..=4 {
            for s in 0..=(4 - r) {
                p += (x[r] * x[s].conj()).re;
            }
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairRow {
    pub n: usize,
    pub m: usize,
    pub gppa: f64,
    pub apt4: f64,
    pub exact: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DhoResult {
    pub a: f64,
    pub rows: Vec<PairRow>,
    pub f_values: Vec<(usize, f64)>,
}

fn expansion_for(driving: &PolyDriving, pairs: &[(usize, usize)], r_max: usize) -> Result<DhoExpansion> {
    DhoExpansion::for_pairs(driving.sigma, driving.omega, driving.forced, pairs, r_max)
}

/// GPPA probabilities for the requested pairs; APT4 and exact columns filled too.
pub fn probabilities(driving: &PolyDriving, pairs: &[(usize, usize)], r_max: usize) -> Result<DhoResult> {
    let a = alpha_parameter(driving)?;
    let exp = expansion_for(driving, pairs, r_max.max(4))?;
    let rows = pairs
        .iter()
        .map(|&(n, m)| {
            Ok(PairRow {
                n,
                m,
                gppa: exp.p_gppa(n, m, a)?,
                apt4: exp.p_apt4(n, m, a)?,
                exact: probability_exact(a, n, m),
            })
        })
        .collect::<Result<_>>()?;
    let mut levels: Vec<usize> = pairs.iter().flat_map(|&(n, m)| [n, m]).collect();
    levels.sort_unstable();
    levels.dedup();
    Ok(DhoResult { a, rows, f_values: levels.into_iter().map(|n| (n, f_polynomial(n, a * a))).collect() })
}

pub fn probabilities_gppa(driving: &PolyDriving, pairs: &[(usize, usize)], r_max: usize) -> Result<Vec<f64>> {
    Ok(probabilities(driving, pairs, r_max)?.rows.iter().map(|r| r.gppa).collect())
}

pub fn probabilities_apt4(driving: &PolyDriving, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
    Ok(probabilities(driving, pairs, 4)?.rows.iter().map(|r| r.apt4).collect())
}

/// Time-ordered gamma source for the oscillator at its actual coupling.
pub fn loop_solver(model: &DhoModel, size: usize, steps: usize) -> DysonSolver<'_, DhoModel> {
    DysonSolver::new(model, DhoModel::basis(size), model.window()).with_steps(steps)
}

/// Convenience: γ_n^{[excluded]} summed to r_max, as the exponent 2Tγ.
pub fn loop_exponent(driving: &PolyDriving, n: usize, excluded: &[usize], r_max: usize) -> Result<C64> {
    let model = DhoModel::new(driving.clone());
    let solver = loop_solver(&model, n + r_max / 2 + 3, DEFAULT_STEPS);
    let ex: BTreeSet<StateIndex> = excluded.iter().map(|&e| StateIndex::Discrete(e)).collect();
    let g = crate::engine::gamma_total(&solver, StateIndex::Discrete(n), &ex, r_max)?;
    Ok(g.exponent())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::finite_difference_flip;

    #[test]
    fn laguerre_values() {
        assert_eq!(laguerre(0, 2.0, 0.3), 1.0);
        assert!((laguerre(2, 0.0, 0.5) - (1.0 - 1.0 + 0.125)).abs() < 1e-15);
        assert!((laguerre(1, 3.0, 0.5) - 3.5).abs() < 1e-15);
    }

    #[test]
    fn poisson_column() {
        let a: f64 = 0.7;
        for n in 0..6 {
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            let p = (-a * a).exp() * a.powi(2 * n as i32) / fact;
            assert!((probability_exact(a, n, 0) - p).abs() < 1e-15);
        }
    }

    #[test]
    fn f_polynomial_values() {
        assert_eq!(f_polynomial(0, 0.4), 1.0);
        assert!((f_polynomial(2, 0.01) - 0.9605).abs() < 1e-15);
        let x = 0.3;
        assert!((f_polynomial(1, x) - (1.0 - 2.0 * x + x * x)).abs() < 1e-15);
    }

    #[test]
    fn transform_properties() {
        let d = PolyDriving::infinite(2.0, 5.0, 1.0).unwrap();
        assert_eq!(j_tilde(&d, 0.0).unwrap().norm(), 0.0);
        let p = j_tilde(&d, 0.7).unwrap();
        let q = j_tilde(&d, -0.7).unwrap();
        assert!((p + q).norm() < 1e-15);
        let mag = j_tilde(&d, 1.0).unwrap().norm();
        let approx = 2.0 / 10.0 * (1.0 - (-2.0f64 / 25.0).exp());
        assert!((mag - approx).abs() < 1e-15);
        assert!(PolyDriving::infinite(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn alpha_inverse() {
        for &a in &[0.0, 0.1, 0.5, 1.0] {
            let g = g_for_alpha(a, 5.0, 1.0);
            let d = PolyDriving::infinite(g, 5.0, 1.0).unwrap();
            assert!((alpha_parameter(&d).unwrap() - a).abs() < 1e-14);
        }
    }

    #[test]
    fn flips_match_displaced_overlaps() {
        let d = PolyDriving::infinite(g_for_alpha(0.5, 5.0, 1.0), 5.0, 1.0).unwrap();
        let m = DhoModel::new(d);
        for &t in &[-0.2, 0.05, 0.3] {
            for (n, k) in [(0, 1), (1, 0), (2, 3), (3, 2), (1, 3)] {
                let (n, k) = (StateIndex::Discrete(n), StateIndex::Discrete(k));
                let a = m.flip(n, k, t).unwrap();
                let b = finite_difference_flip(&m, n, k, t).unwrap();
                assert!((a - b).norm() < 1e-6 * (1.0 + a.norm()), "{a} {b}");
            }
        }
    }
}
