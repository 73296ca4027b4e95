//! Exact sideband matching for a delta barrier U(t)δ(x), the reference
//! for the elastic transmission of the driven barrier.
//!
//! Channel n carries energy ε + n. A wave e^{−i(ε+n)t} on either side is
//! matched at x = 0 by continuity and the jump ψ'(0⁺) − ψ'(0⁻) = 2U(t)ψ(0).

use crate::delta::{DeltaConfig, ProfileSource, TransmissionProfile};
use crate::{GppaError, Result, C64};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::collections::BTreeMap;

pub const DEFAULT_N_SIDE: usize = 12;
pub const MAX_N_SIDE: usize = 192;
pub const STABILITY_TOL: f64 = 1e-8;
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Channels with |k_n| below this are treated as sitting on a threshold.
pub const THRESHOLD_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Barrier {
    /// U(t) = −g₀ sin t.
    Driven,
    /// U(t) = −g₀, the static attractive delta.
    Static,
}

impl Barrier {
    /// Fourier modes u_q of U(t) = Σ_q u_q e^{−iqt}.
    fn modes(self, g0: f64) -> Vec<(i64, C64)> {
        match self {
            Barrier::Driven => vec![(-1, C64::new(0.0, 0.5 * g0)), (1, C64::new(0.0, -0.5 * g0))],
            Barrier::Static => vec![(0, C64::new(-g0, 0.0))],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Incidence {
    Left,
    Right,
}

/// k_n = √(2(ε + n)) with Im k_n ≥ 0 on closed channels.
pub fn channel_momentum(e: f64) -> C64 {
    if e > 0.0 {
        C64::new((2.0 * e).sqrt(), 0.0)
    } else {
        C64::new(0.0, (-2.0 * e).sqrt())
    }
}

#[derive(Clone, Debug)]
pub struct SidebandSystem {
    pub eps: f64,
    pub g0: f64,
    pub n_side: usize,
    pub barrier: Barrier,
    pub k: Vec<C64>,
    pub incidence: Incidence,
    /// Unknowns ordered (t_{−N..N}, r_{−N..N}).
    pub matrix: DMatrix<C64>,
    pub rhs: DVector<C64>,
}

impl SidebandSystem {
    pub fn new(eps: f64, g0: f64, n_side: usize, barrier: Barrier, incidence: Incidence) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(GppaError::Invalid(format!("eps must be positive (got {eps})")));
        }
        if n_side < 2 {
            return Err(GppaError::Invalid(format!("n_side must be >= 2 (got {n_side})")));
        }
        if !(g0.is_finite() && g0 >= 0.0) {
            return Err(GppaError::Invalid(format!("g0 must be finite and >= 0 (got {g0})")));
        }
        let ns = n_side as i64;
        let m = 2 * n_side + 1;
        let k: Vec<C64> = (-ns..=ns).map(|n| channel_momentum(eps + n as f64)).collect();
        if let Some(i) = k.iter().position(|z| z.norm() < THRESHOLD_TOL) {
            return Err(GppaError::Singular(format!("channel {} at threshold (eps = {eps})", i as i64 - ns)));
        }
        let i = C64::new(0.0, 1.0);
        let mut a = DMatrix::<C64>::zeros(2 * m, 2 * m);
        let mut b = DVector::<C64>::zeros(2 * m);
        let modes = barrier.modes(g0);
        let c = n_side;
        // ψ(0) is the transmitted amplitude on the far side
        for row in 0..m {
            let kn = k[row];
            match incidence {
                Incidence::Left => {
                    // δ + r − t = 0
                    a[(row, row)] = C64::new(-1.0, 0.0);
                    a[(row, m + row)] = C64::new(1.0, 0.0);
                    // ik t + ik r − 2Σ u_q t_{n−q} = ik₀ δ
                    a[(m + row, row)] += i * kn;
                    a[(m + row, m + row)] += i * kn;
                }
                Incidence::Right => {
                    // t − δ − r = 0
                    a[(row, row)] = C64::new(1.0, 0.0);
                    a[(row, m + row)] = C64::new(-1.0, 0.0);
                    // ik t + ik r − 2Σ u_q t_{n−q} = ik₀ δ
                    a[(m + row, row)] += i * kn;
                    a[(m + row, m + row)] += i * kn;
                }
            }
            for &(q, u) in &modes {
                let col = row as i64 - q;
                if col >= 0 && (col as usize) < m {
                    a[(m + row, col as usize)] -= u * 2.0;
                }
            }
        }
        match incidence {
            Incidence::Left => b[c] = C64::new(-1.0, 0.0),
            Incidence::Right => b[c] = C64::new(1.0, 0.0),
        }
        b[m + c] = i * k[c];
        Ok(SidebandSystem { eps, g0, n_side, barrier, k, incidence, matrix: a, rhs: b })
    }

    pub fn solve(&self) -> Result<Scattering> {
        let lu = self.matrix.clone().lu();
        let x = lu
            .solve(&self.rhs)
            .ok_or_else(|| GppaError::Singular(format!("matching system singular at eps = {}", self.eps)))?;
        let res = (&self.matrix * &x - &self.rhs).norm();
        let scale = self.matrix.norm() * x.norm() + self.rhs.norm();
        if !(res <= RESIDUAL_TOL * scale) {
            return Err(GppaError::Singular(format!("residual {res:e} at eps = {}", self.eps)));
        }
        let m = 2 * self.n_side + 1;
        let ns = self.n_side as i64;
        let mut t = BTreeMap::new();
        let mut r = BTreeMap::new();
        for (j, n) in (-ns..=ns).enumerate() {
            t.insert(n, x[j]);
            r.insert(n, x[m + j]);
        }
        Ok(Scattering { eps: self.eps, n_side: self.n_side, k: self.k.clone(), t, r })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scattering {
    pub eps: f64,
    pub n_side: usize,
    pub k: Vec<C64>,
    pub t: BTreeMap<i64, C64>,
    pub r: BTreeMap<i64, C64>,
}

impl Scattering {
    pub fn t0(&self) -> C64 {
        self.t[&0]
    }

    /// |t₀|², the elastic transmission.
    pub fn elastic(&self) -> f64 {
        self.t0().norm_sqr()
    }

    /// Σ_open (k_n/k₀)(|t_n|² + |r_n|²).
    pub fn flux(&self) -> f64 {
        let ns = self.n_side as i64;
        let k0 = self.k[self.n_side].re;
        (-ns..=ns)
            .zip(&self.k)
            .filter(|(_, k)| k.im == 0.0)
            .map(|(n, k)| k.re / k0 * (self.t[&n].norm_sqr() + self.r[&n].norm_sqr()))
            .sum()
    }
}

/// Solve with channel truncation doubled from `n_side` until |t₀|² moves
/// by less than [`STABILITY_TOL`].
pub fn solve_converged(eps: f64, g0: f64, n_side: usize, barrier: Barrier, incidence: Incidence) -> Result<Scattering> {
    let mut cur = SidebandSystem::new(eps, g0, n_side, barrier, incidence)?.solve()?;
    let mut n = n_side;
    while 2 * n <= MAX_N_SIDE {
        n *= 2;
        let next = SidebandSystem::new(eps, g0, n, barrier, incidence)?.solve()?;
        let change = (next.elastic() - cur.elastic()).abs();
        cur = next;
        if change < STABILITY_TOL {
            return Ok(cur);
        }
    }
    Err(GppaError::NoConvergence(format!("|t0|^2 not stable up to n_side = {MAX_N_SIDE} at eps = {eps}")))
}

/// Left-incidence amplitudes of the driven barrier.
pub fn solve_sidebands(eps: f64, g0: f64, n_side: usize) -> Result<Scattering> {
    solve_converged(eps, g0, n_side, Barrier::Driven, Incidence::Left)
}

/// |t₀(ε)|² of the driven barrier on a grid.
pub fn elastic_profile(g0: f64, eps_grid: &[f64], n_side: usize) -> Result<TransmissionProfile> {
    let samples = eps_grid
        .par_iter()
        .map(|&e| solve_sidebands(e, g0, n_side).map(|s| (e, s.elastic())))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransmissionProfile {
        samples,
        source: ProfileSource::FloquetElastic,
        params: DeltaConfig { g0, ..DeltaConfig::default() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_propagation_without_barrier() {
        let s = solve_sidebands(0.7, 0.0, 4).unwrap();
        assert!((s.t0() - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(s.t.iter().filter(|(n, _)| **n != 0).all(|(_, z)| z.norm() < 1e-14));
        assert!(s.r.values().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn static_delta_transmission() {
        for (e, g) in [(0.3, 1.0), (1.7, 0.4)] {
            let s = solve_converged(e, g, 4, Barrier::Static, Incidence::Left).unwrap();
            let k2 = 2.0 * e;
            assert!((s.elastic() - k2 / (k2 + g * g)).abs() < 1e-12);
        }
    }

    #[test]
    fn driven_flux_and_reciprocity() {
        let l = solve_sidebands(0.8, 1.0, DEFAULT_N_SIDE).unwrap();
        assert!((l.flux() - 1.0).abs() < 1e-8);
        let r = solve_converged(0.8, 1.0, DEFAULT_N_SIDE, Barrier::Driven, Incidence::Right).unwrap();
        assert!((l.t0().norm() - r.t0().norm()).abs() < 1e-10);
    }
}
