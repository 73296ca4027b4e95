//! Time-ordered route: Dyson orders of the restricted propagator and their
//! logarithmic cumulants.

use super::GammaSource;
use crate::quadrature::rk4_richardson;
use crate::spectral::{InstantModel, StateIndex, CROSSING_TOL};
use crate::{GppaError, Result, C64};
use std::collections::BTreeSet;

/// Integrates dv_r/dt = iφ(t) v_{r−1} in a truncated instantaneous basis.
pub struct DysonSolver<'a, M: InstantModel + ?Sized> {
    pub model: &'a M,
    pub basis: Vec<StateIndex>,
    pub window: (f64, f64),
    pub steps: usize,
}

/// X^{(r)}_{n, initial}(t_f, t_i) for r = 0..=r_max over the allowed states.
#[derive(Clone, Debug)]
pub struct DysonOrders {
    pub states: Vec<StateIndex>,
    pub initial: StateIndex,
    pub orders: Vec<Vec<C64>>,
}

impl DysonOrders {
    pub fn get(&self, n: StateIndex, r: usize) -> C64 {
        match self.states.iter().position(|&s| s == n) {
            Some(i) if r < self.orders.len() => self.orders[r][i],
            _ => C64::new(0.0, 0.0),
        }
    }

    /// Orders of one element as a power series in the coupling.
    pub fn series(&self, n: StateIndex) -> Vec<C64> {
        (0..self.orders.len()).map(|r| self.get(n, r)).collect()
    }
}

impl<'a, M: InstantModel + ?Sized> DysonSolver<'a, M> {
    pub fn new(model: &'a M, basis: Vec<StateIndex>, window: (f64, f64)) -> Self {
        DysonSolver { model, basis, window, steps: 2000 }
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    fn allowed(&self, initial: StateIndex, excluded: &BTreeSet<StateIndex>) -> Result<Vec<StateIndex>> {
        if !self.basis.contains(&initial) {
            return Err(GppaError::Invalid(format!("state {initial} not in basis")));
        }
        if excluded.contains(&initial) {
            return Err(GppaError::Invalid(format!("state {initial} is excluded")));
        }
        Ok(self.basis.iter().copied().filter(|s| !excluded.contains(s)).collect())
    }

    pub(crate) fn edges(&self, states: &[StateIndex]) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for (a, &sa) in states.iter().enumerate() {
            for (b, &sb) in states.iter().enumerate() {
                if a != b && self.model.couples(sa, sb) {
                    e.push((a, b));
                }
            }
        }
        e
    }

    pub(crate) fn check_gaps(&self, states: &[StateIndex]) -> Result<()> {
        let (t0, t1) = self.window;
        for j in 0..=32 {
            let t = t0 + (t1 - t0) * j as f64 / 32.0;
            for (a, &sa) in states.iter().enumerate() {
                for &sb in &states[a + 1..] {
                    let gap = (self.model.energy(sa, t)? - self.model.energy(sb, t)?).abs();
                    if gap < CROSSING_TOL {
                        return Err(GppaError::Degenerate {
                            n: sa.to_string(),
                            m: sb.to_string(),
                            t,
                            gap,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// φ(t) applied along the coupling graph, given integrated phases.
    pub(crate) fn apply_phi(
        &self,
        states: &[StateIndex],
        edges: &[(usize, usize)],
        t: f64,
        phases: &[C64],
    ) -> Vec<(usize, usize, C64)> {
        edges
            .iter()
            .map(|&(a, b)| {
                let f = self.model.flip(states[a], states[b], t).unwrap_or(C64::new(f64::NAN, 0.0));
                let ph = if f == C64::new(0.0, 0.0) {
                    C64::new(1.0, 0.0)
                } else {
                    C64::from_polar(1.0, phases[a].re - phases[b].re)
                };
                (a, b, f * ph)
            })
            .collect()
    }

    pub(crate) fn energies(&self, states: &[StateIndex], t: f64) -> Vec<C64> {
        states
            .iter()
            .map(|&s| C64::new(self.model.renormalized_energy(s, t).unwrap_or(f64::NAN), 0.0))
            .collect()
    }

    /// Dyson orders r = 0..=r_max of the propagator restricted to the basis
    /// minus `excluded`, started in `initial`.
    pub fn orders(
        &self,
        initial: StateIndex,
        excluded: &BTreeSet<StateIndex>,
        r_max: usize,
    ) -> Result<DysonOrders> {
        let states = self.allowed(initial, excluded)?;
        self.check_gaps(&states)?;
        let s = states.len();
        let edges = self.edges(&states);
        let i0 = states.iter().position(|&x| x == initial).unwrap();
        let rhs = |t: f64, y: &[C64]| -> Vec<C64> {
            let mut dy = vec![C64::new(0.0, 0.0); y.len()];
            dy[..s].copy_from_slice(&self.energies(&states, t));
            let phi = self.apply_phi(&states, &edges, t, &y[..s]);
            for r in 1..=r_max {
                let out = s * r;
                for &(a, b, p) in &phi {
                    let prev = if r == 1 {
                        if b == i0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
                    } else {
                        y[s * (r - 1) + b]
                    };
                    dy[out + a] += C64::i() * p * prev;
                }
            }
            dy
        };
        let y0 = vec![C64::new(0.0, 0.0); s * (r_max + 1)];
        let y = rk4_richardson(&rhs, self.window.0, self.window.1, self.steps, &y0);
        if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(GppaError::NoConvergence("Dyson hierarchy produced non-finite values".into()));
        }
        let mut orders = vec![vec![C64::new(0.0, 0.0); s]];
        orders[0][i0] = C64::new(1.0, 0.0);
        for r in 1..=r_max {
            orders.push(y[s * r..s * (r + 1)].to_vec());
        }
        Ok(DysonOrders { states, initial, orders })
    }

    /// Full (non-perturbative) column X_{·, initial}(t_f, t_i) of the restricted
    /// propagator; `scale` multiplies every flip.
    pub fn propagate(
        &self,
        initial: StateIndex,
        excluded: &BTreeSet<StateIndex>,
        scale: f64,
    ) -> Result<(Vec<StateIndex>, Vec<C64>)> {
        let states = self.allowed(initial, excluded)?;
        let s = states.len();
        let edges = self.edges(&states);
        let i0 = states.iter().position(|&x| x == initial).unwrap();
        let rhs = |t: f64, y: &[C64]| -> Vec<C64> {
            let mut dy = vec![C64::new(0.0, 0.0); y.len()];
            dy[..s].copy_from_slice(&self.energies(&states, t));
            for (a, b, p) in self.apply_phi(&states, &edges, t, &y[..s]) {
                dy[s + a] += C64::i() * p * scale * y[s + b];
            }
            dy
        };
        let mut y0 = vec![C64::new(0.0, 0.0); 2 * s];
        y0[s + i0] = C64::new(1.0, 0.0);
        let y = rk4_richardson(&rhs, self.window.0, self.window.1, self.steps, &y0);
        Ok((states, y[s..].to_vec()))
    }
}

/// Orders of ln X_rr and of the normalized columns X_nm / X_rr for a
/// reference state r, integrated directly so no large orders cancel.
#[derive(Clone, Debug)]
pub struct NormalizedOrders {
    pub states: Vec<StateIndex>,
    pub reference: StateIndex,
    /// [λ^q] ln X_rr for q = 0..=r_max.
    pub log: Vec<C64>,
    /// For each requested initial state m: [λ^q](X_{·m}/X_rr), q = 0..=r_max.
    pub columns: Vec<(StateIndex, Vec<Vec<C64>>)>,
}

impl NormalizedOrders {
    pub fn ratio(&self, n: StateIndex, m: StateIndex) -> Option<Vec<C64>> {
        let i = self.states.iter().position(|&s| s == n)?;
        let (_, col) = self.columns.iter().find(|(c, _)| *c == m)?;
        Some(col.iter().map(|v| v[i]).collect())
    }
}

impl<'a, M: InstantModel + ?Sized> DysonSolver<'a, M> {
    /// Log-derivative hierarchy. With Y = X_{·r}/X_rr and s = Σ_j φ_rj Y_j:
    /// d ln X_rr/dt = i s and dZ/dt = iφZ − iZs for each normalized column Z.
    pub fn normalized(
        &self,
        reference: StateIndex,
        initials: &[StateIndex],
        excluded: &BTreeSet<StateIndex>,
        r_max: usize,
    ) -> Result<NormalizedOrders> {
        let states = self.allowed(reference, excluded)?;
        self.check_gaps(&states)?;
        let s = states.len();
        let edges = self.edges(&states);
        let iref = states.iter().position(|&x| x == reference).unwrap();
        let mut cols = vec![reference];
        for &m in initials {
            if !states.contains(&m) {
                return Err(GppaError::Invalid(format!("state {m} not available")));
            }
            if !cols.contains(&m) {
                cols.push(m);
            }
        }
        let ic: Vec<usize> = cols.iter().map(|c| states.iter().position(|x| x == c).unwrap()).collect();
        let nc = cols.len();
        let rr = r_max;
        // layout: phases | log[1..=R] | column c, order q in 1..=R
        let log_off = s;
        let col_off = |c: usize, q: usize| s + rr + (c * rr + (q - 1)) * s;
        let len = s + rr + nc * rr * s;
        let zero = C64::new(0.0, 0.0);
        let rhs = |t: f64, y: &[C64]| -> Vec<C64> {
            let mut dy = vec![zero; len];
            dy[..s].copy_from_slice(&self.energies(&states, t));
            let phi = self.apply_phi(&states, &edges, t, &y[..s]);
            let get = |c: usize, q: usize, n: usize| -> C64 {
                if q == 0 {
                    if n == ic[c] { C64::new(1.0, 0.0) } else { zero }
                } else {
                    y[col_off(c, q) + n]
                }
            };
            // s^{(q)} from the reference column
            let sq: Vec<C64> = (0..rr)
                .map(|q| {
                    phi.iter()
                        .filter(|&&(a, _, _)| a == iref)
                        .map(|&(_, b, p)| p * get(0, q, b))
                        .sum()
                })
                .collect();
            for q in 1..=rr {
                dy[log_off + q - 1] = C64::i() * sq[q - 1];
            }
            for c in 0..nc {
                for q in 1..=rr {
                    let o = col_off(c, q);
                    for &(a, b, p) in &phi {
                        dy[o + a] += C64::i() * p * get(c, q - 1, b);
                    }
                    for n in 0..s {
                        let mut acc = zero;
                        for p in 0..q {
                            let z = get(c, p, n);
                            if z != zero {
                                acc += z * sq[q - 1 - p];
                            }
                        }
                        dy[o + n] -= C64::i() * acc;
                    }
                }
            }
            dy
        };
        let y0 = vec![zero; len];
        let y = rk4_richardson(&rhs, self.window.0, self.window.1, self.steps, &y0);
        if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(GppaError::NoConvergence("log-derivative hierarchy produced non-finite values".into()));
        }
        let mut log = vec![zero; rr + 1];
        log[1..].copy_from_slice(&y[log_off..log_off + rr]);
        let columns = (0..nc)
            .map(|c| {
                let mut v = vec![vec![zero; s]];
                v[0][ic[c]] = C64::new(1.0, 0.0);
                for q in 1..=rr {
                    v.push(y[col_off(c, q)..col_off(c, q) + s].to_vec());
                }
                (cols[c], v)
            })
            .collect();
        Ok(NormalizedOrders { states, reference, log, columns })
    }
}

impl<M: InstantModel + ?Sized> GammaSource for DysonSolver<'_, M> {
    fn gamma_orders(
        &self,
        n: StateIndex,
        excluded: &BTreeSet<StateIndex>,
        r_max: usize,
    ) -> Result<Vec<C64>> {
        let b = self.normalized(n, &[], excluded, r_max)?.log;
        let span = self.window.1 - self.window.0;
        Ok((2..=r_max).map(|r| -C64::i() * b[r] / span).collect())
    }

    fn window(&self) -> (f64, f64) {
        self.window
    }
}

/// Coefficients of ln(d(λ)) for a power series with d_0 = 1.
pub fn log_series(d: &[C64]) -> Vec<C64> {
    let mut b = vec![C64::new(0.0, 0.0); d.len()];
    for r in 1..d.len() {
        let mut acc = d[r];
        for k in 1..r {
            acc -= b[k] * d[r - k] * (k as f64 / r as f64);
        }
        b[r] = acc;
    }
    b
}

/// Coefficients of x(λ)/d(λ) for d_0 = 1.
pub fn ratio_series(x: &[C64], d: &[C64]) -> Vec<C64> {
    let mut y = vec![C64::new(0.0, 0.0); x.len()];
    for r in 0..x.len() {
        let mut acc = x[r];
        for k in 1..=r.min(d.len() - 1) {
            acc -= d[k] * y[r - k];
        }
        y[r] = acc;
    }
    y
}
