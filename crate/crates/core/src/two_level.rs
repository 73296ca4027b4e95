//! Driven two-level system H = ½[Δσ_z + V(t)σ_x], used as a generic test
//! model: real eigenvectors, closed-form flips and overlaps.

use crate::spectral::{InstantModel, StateIndex};
use crate::{GppaError, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Drive {
    /// V(t) = A cos(ω₀t), periodic.
    Harmonic { amplitude: f64, omega: f64 },
    /// V(t) = v·t, a Landau-Zener style sweep of the coupling.
    Sweep { rate: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevel {
    pub delta: f64,
    pub drive: Drive,
}

impl TwoLevel {
    pub fn harmonic(delta: f64, amplitude: f64, omega: f64) -> Self {
        TwoLevel { delta, drive: Drive::Harmonic { amplitude, omega } }
    }

    fn v(&self, t: f64) -> (f64, f64) {
        match self.drive {
            Drive::Harmonic { amplitude, omega } => {
                (amplitude * (omega * t).cos(), -amplitude * omega * (omega * t).sin())
            }
            Drive::Sweep { rate } => (rate * t, rate),
        }
    }

    /// Mixing angle θ with tan θ = V/Δ.
    fn angle(&self, t: f64) -> f64 {
        self.v(t).0.atan2(self.delta)
    }

    fn vector(&self, n: StateIndex, t: f64) -> Result<[f64; 2]> {
        let h = 0.5 * self.angle(t);
        match n {
            StateIndex::Discrete(0) => Ok([-h.sin(), h.cos()]),
            StateIndex::Discrete(1) => Ok([h.cos(), h.sin()]),
            _ => Err(GppaError::Invalid(format!("two-level model has no state {n}"))),
        }
    }
}

impl InstantModel for TwoLevel {
    fn energy(&self, n: StateIndex, t: f64) -> Result<f64> {
        let r = self.delta.hypot(self.v(t).0);
        match n {
            StateIndex::Discrete(0) => Ok(-0.5 * r),
            StateIndex::Discrete(1) => Ok(0.5 * r),
            _ => Err(GppaError::Invalid(format!("two-level model has no state {n}"))),
        }
    }

    fn flip(&self, n: StateIndex, m: StateIndex, t: f64) -> Result<C64> {
        let (v, vdot) = self.v(t);
        let thetadot = vdot * self.delta / (self.delta * self.delta + v * v);
        match (n, m) {
            (StateIndex::Discrete(0), StateIndex::Discrete(1)) => Ok(C64::new(0.0, 0.5 * thetadot)),
            (StateIndex::Discrete(1), StateIndex::Discrete(0)) => Ok(C64::new(0.0, -0.5 * thetadot)),
            _ => Ok(C64::new(0.0, 0.0)),
        }
    }

    fn overlap(&self, n: StateIndex, t: f64, m: StateIndex, s: f64) -> Option<C64> {
        let a = self.vector(n, t).ok()?;
        let b = self.vector(m, s).ok()?;
        Some(C64::new(a[0] * b[0] + a[1] * b[1], 0.0))
    }

    fn period(&self) -> Option<f64> {
        match self.drive {
            Drive::Harmonic { omega, .. } => Some(2.0 * std::f64::consts::PI / omega),
            Drive::Sweep { .. } => None,
        }
    }

    fn couples(&self, n: StateIndex, m: StateIndex) -> bool {
        n != m
    }
}
