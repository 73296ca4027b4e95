//! Instantaneous spectra, flip amplitudes, phase dressing and Fourier tables.

use crate::quadrature::{adaptive, Rule};
use crate::{GppaError, Result, C64};
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

/// Gap below which two instantaneous levels count as crossing.
pub const CROSSING_TOL: f64 = 1e-9;

/// Label of an instantaneous eigenstate.
#[derive(Clone, Copy, Debug)]
pub enum StateIndex {
    Discrete(usize),
    /// Continuum momentum; equality is exact bit identity on the grid.
    Continuum(f64),
}

impl StateIndex {
    pub fn continuum(k: f64) -> Result<Self> {
        if k.is_finite() && k > 0.0 {
            Ok(StateIndex::Continuum(k))
        } else {
            Err(GppaError::Invalid(format!("continuum momentum must be > 0, got {k}")))
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, StateIndex::Discrete(_))
    }
}

impl PartialEq for StateIndex {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for StateIndex {}

impl Ord for StateIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        use StateIndex::*;
        match (self, other) {
            (Discrete(a), Discrete(b)) => a.cmp(b),
            (Discrete(_), Continuum(_)) => Ordering::Less,
            (Continuum(_), Discrete(_)) => Ordering::Greater,
            (Continuum(a), Continuum(b)) => a.total_cmp(b),
        }
    }
}
impl PartialOrd for StateIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Hash for StateIndex {
    fn hash<H: Hasher>(&self, h: &mut H) {
        match self {
            StateIndex::Discrete(n) => (0u8, *n as u64).hash(h),
            StateIndex::Continuum(k) => (1u8, k.to_bits()).hash(h),
        }
    }
}

impl fmt::Display for StateIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateIndex::Discrete(n) => write!(f, "{n}"),
            StateIndex::Continuum(k) => write!(f, "k={k}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Units {
    pub hbar: f64,
    pub mass: f64,
    pub frequency: f64,
}

impl Default for Units {
    fn default() -> Self {
        Units { hbar: 1.0, mass: 1.0, frequency: 1.0 }
    }
}

/// A driven system described through its instantaneous eigenbasis.
pub trait InstantModel: Sync {
    fn energy(&self, n: StateIndex, t: f64) -> Result<f64>;

    /// Diagonal geometric term ⟨n|i∂t|n⟩; zero for real eigenbases.
    fn berry(&self, _n: StateIndex, _t: f64) -> f64 {
        0.0
    }

    fn renormalized_energy(&self, n: StateIndex, t: f64) -> Result<f64> {
        Ok(self.energy(n, t)? - self.berry(n, t))
    }

    /// Off-diagonal flip Φ_nm(t). The default differentiates `overlap`.
    fn flip(&self, n: StateIndex, m: StateIndex, t: f64) -> Result<C64> {
        finite_difference_flip(self, n, m, t)
    }

    /// ⟨n_t|m_s⟩ between eigenstates at two times, when available.
    fn overlap(&self, _n: StateIndex, _t: f64, _m: StateIndex, _s: f64) -> Option<C64> {
        None
    }

    fn period(&self) -> Option<f64>;

    /// Whether Φ_nm can be nonzero at all; lets solvers skip structural zeros.
    fn couples(&self, _n: StateIndex, _m: StateIndex) -> bool {
        true
    }

    /// Characteristic time used to size finite-difference steps.
    fn time_scale(&self) -> f64 {
        self.period().unwrap_or(1.0)
    }

    fn units(&self) -> Units {
        Units::default()
    }

    /// ∫_{ta}^{tb} Ē_n dτ.
    fn phase_integral(&self, n: StateIndex, ta: f64, tb: f64) -> Result<f64> {
        let f = |t: f64| self.renormalized_energy(n, t).unwrap_or(f64::NAN);
        let v = adaptive(f, ta, tb, 1e-12)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(GppaError::Invalid(format!("energy of {n} undefined on [{ta}, {tb}]")))
        }
    }

    /// ∫ (Ē_n − Ē_m) dτ; models with equally spaced levels override this.
    fn phase_difference(&self, n: StateIndex, m: StateIndex, ta: f64, tb: f64) -> Result<f64> {
        Ok(self.phase_integral(n, ta, tb)? - self.phase_integral(m, ta, tb)?)
    }

    /// Interval over which ε_n is averaged; defaults to the full window.
    fn averaging_window(&self, _n: StateIndex, window: (f64, f64)) -> (f64, f64) {
        window
    }
}

/// Φ_nm = i⟨n_t|∂t m_t⟩ by a centered difference of `overlap`, one Richardson step.
pub fn finite_difference_flip<M: InstantModel + ?Sized>(
    model: &M,
    n: StateIndex,
    m: StateIndex,
    t: f64,
) -> Result<C64> {
    let h = 1e-5 * model.time_scale();
    let d = |h: f64| -> Result<C64> {
        let p = model.overlap(n, t, m, t + h);
        let q = model.overlap(n, t, m, t - h);
        match (p, q) {
            (Some(p), Some(q)) => Ok((p - q) / (2.0 * h)),
            _ => Err(GppaError::Invalid("model provides neither flips nor overlaps".into())),
        }
    };
    let coarse = d(h)?;
    let fine = d(0.5 * h)?;
    Ok(C64::i() * (fine * 4.0 - coarse) / 3.0)
}

/// Φ_nm(t) with the precondition checks: n ≠ m and no level crossing.
pub fn flip_amplitude<M: InstantModel + ?Sized>(
    model: &M,
    n: StateIndex,
    m: StateIndex,
    t: f64,
) -> Result<C64> {
    if n == m {
        return Err(GppaError::Invalid(format!("flip requires n != m (both {n})")));
    }
    let gap = (model.energy(m, t)? - model.energy(n, t)?).abs();
    if gap < CROSSING_TOL {
        return Err(GppaError::Degenerate {
            n: n.to_string(),
            m: m.to_string(),
            t,
            gap,
        });
    }
    model.flip(n, m, t)
}

/// φ_nm(t) = e^{i∫Ē_n} Φ_nm e^{−i∫Ē_m}, phases integrated from `t_i`.
pub fn phase_dressed_flip<M: InstantModel + ?Sized>(
    model: &M,
    n: StateIndex,
    m: StateIndex,
    t: f64,
    t_i: f64,
) -> Result<C64> {
    let f = flip_amplitude(model, n, m, t)?;
    if f == C64::new(0.0, 0.0) {
        return Ok(f);
    }
    let dphi = model.phase_difference(n, m, t_i, t)? / model.units().hbar;
    Ok(f * C64::from_polar(1.0, dphi))
}

/// Time averages ε_n of Ē_n over a window, plus the phase origin t_i.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanEnergy {
    pub epsilon: BTreeMap<StateIndex, f64>,
    pub window: (f64, f64),
    pub origin: f64,
}

impl MeanEnergy {
    pub fn compute<M: InstantModel + ?Sized>(
        model: &M,
        states: &[StateIndex],
        window: (f64, f64),
    ) -> Result<Self> {
        if !(window.1 > window.0) {
            return Err(GppaError::Invalid(format!("empty window {window:?}")));
        }
        let epsilon = states
            .iter()
            .map(|&n| {
                let (a, b) = model.averaging_window(n, window);
                Ok((n, model.phase_integral(n, a, b)? / (b - a)))
            })
            .collect::<Result<_>>()?;
        Ok(MeanEnergy { epsilon, window, origin: window.0 })
    }

    pub fn with_origin(mut self, origin: f64) -> Self {
        self.origin = origin;
        self
    }

    pub fn get(&self, n: StateIndex) -> Result<f64> {
        self.epsilon
            .get(&n)
            .copied()
            .ok_or_else(|| GppaError::Invalid(format!("no mean energy for state {n}")))
    }
}

/// Φ̃_nm(t) = e^{−iε_n t} φ_nm(t) e^{iε_m t}.
pub fn shifted_flip<M: InstantModel + ?Sized>(
    model: &M,
    n: StateIndex,
    m: StateIndex,
    t: f64,
    means: &MeanEnergy,
) -> Result<C64> {
    let phi = phase_dressed_flip(model, n, m, t, means.origin)?;
    let hbar = model.units().hbar;
    let de = (means.get(n)? - means.get(m)?) / hbar;
    Ok(phi * C64::from_polar(1.0, -de * t))
}

/// Window [−T, T] with base frequency ω.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierWindow {
    pub t_half: f64,
    pub omega: f64,
}

impl FourierWindow {
    /// The natural choice ω = π/T.
    pub fn new(t_half: f64) -> Self {
        FourierWindow { t_half, omega: std::f64::consts::PI / t_half }
    }
}

/// B_nm(ν) for |ν| ≤ nu_max with the 1/√(2T) prefactor.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierTable {
    pub t_half: f64,
    pub omega: f64,
    pub nu_max: usize,
    pub coeffs: BTreeMap<(StateIndex, StateIndex), Vec<C64>>,
}

impl FourierTable {
    pub fn empty(window: FourierWindow, nu_max: usize) -> Self {
        FourierTable {
            t_half: window.t_half,
            omega: window.omega,
            nu_max,
            coeffs: BTreeMap::new(),
        }
    }

    /// Store B_nm and its conjugate partner B_mn(−ν) = conj(B_nm(ν)).
    pub fn insert(&mut self, n: StateIndex, m: StateIndex, b: Vec<C64>) {
        assert_eq!(b.len(), 2 * self.nu_max + 1);
        let conj: Vec<C64> = b.iter().rev().map(|z| z.conj()).collect();
        self.coeffs.insert((m, n), conj);
        self.coeffs.insert((n, m), b);
    }

    pub fn get(&self, n: StateIndex, m: StateIndex, nu: i64) -> Option<C64> {
        if nu.unsigned_abs() as usize > self.nu_max {
            return Some(C64::new(0.0, 0.0));
        }
        self.coeffs
            .get(&(n, m))
            .map(|v| v[(nu + self.nu_max as i64) as usize])
    }

    pub fn nus(&self) -> impl Iterator<Item = i64> {
        let m = self.nu_max as i64;
        -m..=m
    }

    /// Φ̃_nm(t) = (1/√(2T)) Σ_ν B_nm(ν) e^{−iωνt}.
    pub fn reconstruct(&self, n: StateIndex, m: StateIndex, t: f64) -> Option<C64> {
        let b = self.coeffs.get(&(n, m))?;
        let s: C64 = self
            .nus()
            .zip(b)
            .map(|(nu, z)| z * C64::from_polar(1.0, -self.omega * nu as f64 * t))
            .sum();
        Some(s / (2.0 * self.t_half).sqrt())
    }
}

/// Fourier coefficients of Φ̃ for the requested pairs.
///
/// Periodic models use the trapezoid rule with `samples` points over the
/// window (default 4·(nu_max + 1), at least 64); the window must span a whole
/// number of periods. Other models use composite Gauss-Legendre panels,
/// doubled until the table changes by less than 1e-10.
pub fn fourier_coefficients<M: InstantModel + ?Sized>(
    model: &M,
    pairs: &[(StateIndex, StateIndex)],
    means: &MeanEnergy,
    window: FourierWindow,
    nu_max: usize,
    samples: Option<usize>,
) -> Result<FourierTable> {
    let t = window.t_half;
    if !(t > 0.0) {
        return Err(GppaError::Invalid("window half-width must be positive".into()));
    }
    if (means.window.0 + t).abs() > 1e-9 * t || (means.window.1 - t).abs() > 1e-9 * t {
        return Err(GppaError::WindowMismatch(format!(
            "means over {:?}, transform over [-{t}, {t}]",
            means.window
        )));
    }
    let nus: Vec<i64> = (-(nu_max as i64)..=nu_max as i64).collect();
    let norm = 1.0 / (2.0 * t).sqrt();
    let rows: Vec<Result<Vec<C64>>> = match model.period() {
        Some(p) => {
            let cycles = 2.0 * t / p;
            if (cycles - cycles.round()).abs() > 1e-9 || cycles.round() < 1.0 {
                return Err(GppaError::WindowMismatch(format!(
                    "2T = {} is not a multiple of the period {p}",
                    2.0 * t
                )));
            }
            let m = samples.unwrap_or((4 * (nu_max + 1)).max(64));
            if m <= 2 * nu_max {
                return Err(GppaError::Aliasing { samples: m, nu_max });
            }
            let h = 2.0 * t / m as f64;
            pairs
                .par_iter()
                .map(|&(a, b)| {
                    let vals: Vec<(f64, C64)> = (0..m)
                        .map(|j| {
                            let tj = -t + j as f64 * h;
                            shifted_flip(model, a, b, tj, means).map(|v| (tj, v))
                        })
                        .collect::<Result<_>>()?;
                    Ok(nus
                        .iter()
                        .map(|&nu| {
                            let w = window.omega * nu as f64;
                            vals.iter()
                                .map(|&(tj, v)| v * C64::from_polar(1.0, w * tj))
                                .sum::<C64>()
                                * (h * norm)
                        })
                        .collect())
                })
                .collect()
        }
        None => pairs
            .par_iter()
            .map(|&(a, b)| {
                let eval = |panels: usize| -> Result<Vec<C64>> {
                    let rule = Rule::composite(-t, t, panels, 16);
                    let vals: Vec<C64> = rule
                        .nodes
                        .iter()
                        .map(|&x| shifted_flip(model, a, b, x, means))
                        .collect::<Result<_>>()?;
                    Ok(nus
                        .iter()
                        .map(|&nu| {
                            let w = window.omega * nu as f64;
                            rule.nodes
                                .iter()
                                .zip(&rule.weights)
                                .zip(&vals)
                                .map(|((&x, &wt), &v)| v * C64::from_polar(wt, w * x))
                                .sum::<C64>()
                                * norm
                        })
                        .collect())
                };
                let mut panels = 16;
                let mut prev = eval(panels)?;
                loop {
                    panels *= 2;
                    let next = eval(panels)?;
                    let scale = next.iter().map(|z| z.norm()).fold(1.0, f64::max);
                    let diff = next
                        .iter()
                        .zip(&prev)
                        .map(|(x, y)| (x - y).norm())
                        .fold(0.0, f64::max);
                    if diff < 1e-10 * scale {
                        return Ok(next);
                    }
                    if panels > 1 << 13 {
                        return Err(GppaError::NoConvergence(format!(
                            "B_{a},{b} did not settle"
                        )));
                    }
                    prev = next;
                }
            })
            .collect(),
    };
    let mut table = FourierTable::empty(window, nu_max);
    for (&(a, b), row) in pairs.iter().zip(rows) {
        table.insert(a, b, row?);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Static;
    impl InstantModel for Static {
        fn energy(&self, n: StateIndex, _t: f64) -> Result<f64> {
            match n {
                StateIndex::Discrete(n) => Ok(n as f64),
                StateIndex::Continuum(k) => Ok(k * k / 2.0),
            }
        }
        fn flip(&self, _n: StateIndex, _m: StateIndex, _t: f64) -> Result<C64> {
            Ok(C64::new(0.0, 0.0))
        }
        fn period(&self) -> Option<f64> {
            None
        }
    }

    #[test]
    fn continuum_identity_is_bitwise() {
        let a = StateIndex::continuum(0.5).unwrap();
        let b = StateIndex::continuum(0.5 + 1e-16).unwrap();
        assert_eq!(a, StateIndex::Continuum(0.5));
        assert_ne!(StateIndex::Continuum(0.1 + 0.2), StateIndex::Continuum(0.3));
        assert!(b >= a);
        assert!(StateIndex::continuum(0.0).is_err());
        assert!(StateIndex::continuum(f64::NAN).is_err());
    }

    #[test]
    fn static_model_has_no_flips() {
        let m = Static;
        let f = flip_amplitude(&m, StateIndex::Discrete(0), StateIndex::Discrete(1), 0.3).unwrap();
        assert_eq!(f, C64::new(0.0, 0.0));
        assert!(flip_amplitude(&m, StateIndex::Discrete(1), StateIndex::Discrete(1), 0.3).is_err());
    }

    #[test]
    fn degenerate_levels_are_rejected() {
        let m = Static;
        let e = flip_amplitude(&m, StateIndex::Discrete(0), StateIndex::Continuum(1e-300), 0.0);
        assert!(matches!(e, Err(GppaError::Degenerate { .. })));
    }

    #[test]
    fn constant_flip_transform() {
        struct Const;
        impl InstantModel for Const {
            fn energy(&self, n: StateIndex, _t: f64) -> Result<f64> {
                Ok(if n == StateIndex::Discrete(0) { 0.0 } else { 1.0 })
            }
            fn flip(&self, n: StateIndex, _m: StateIndex, _t: f64) -> Result<C64> {
                Ok(if n == StateIndex::Discrete(0) { C64::new(0.3, 0.2) } else { C64::new(0.3, -0.2) })
            }
            fn period(&self) -> Option<f64> {
                Some(2.0)
            }
            fn phase_difference(&self, _: StateIndex, _: StateIndex, _: f64, _: f64) -> Result<f64> {
                Ok(0.0)
            }
        }
        let s = [StateIndex::Discrete(0), StateIndex::Discrete(1)];
        let mut means = MeanEnergy::compute(&Const, &s, (-1.0, 1.0)).unwrap();
        // Equal means so Φ̃ is the bare constant.
        means.epsilon.insert(s[1], 0.0);
        let tab = fourier_coefficients(&Const, &[(s[0], s[1])], &means, FourierWindow::new(1.0), 4, None).unwrap();
        let b0 = tab.get(s[0], s[1], 0).unwrap();
        assert!((b0 - C64::new(0.3, 0.2) * 2f64.sqrt()).norm() < 1e-14);
        for nu in [1, -1, 3] {
            assert!(tab.get(s[0], s[1], nu).unwrap().norm() < 1e-14);
        }
        let back = tab.get(s[1], s[0], 0).unwrap();
        assert!((back - b0.conj()).norm() < 1e-15);
    }
}
