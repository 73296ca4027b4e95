//! Frequency-domain route: γ_n^{(r)} from Fourier coefficients with the
//! Kronecker constraint Σν = 0, for periodic or windowed discrete models.

use super::GammaSource;
use crate::spectral::{FourierTable, MeanEnergy, StateIndex};
use crate::{GppaError, Result, C64};
use std::collections::BTreeSet;

pub struct SpectralSum<'a> {
    pub table: &'a FourierTable,
    pub means: &'a MeanEnergy,
    /// Discrete states available as intermediates.
    pub states: Vec<StateIndex>,
    pub pole_tol: f64,
}

impl<'a> SpectralSum<'a> {
    pub fn new(table: &'a FourierTable, means: &'a MeanEnergy, states: Vec<StateIndex>) -> Self {
        SpectralSum { table, means, states, pole_tol: 1e-12 }
    }

    fn coeff(&self, a: StateIndex, b: StateIndex, nu: i64) -> Result<C64> {
        self.table
            .get(a, b, nu)
            .ok_or_else(|| GppaError::Invalid(format!("Fourier table lacks pair ({a}, {b})")))
    }

    /// γ_n^{(r)} with the (−1)^r / (2T)^{r/2} prefactor.
    pub fn order(&self, n: StateIndex, r: usize, excluded: &BTreeSet<StateIndex>) -> Result<C64> {
        let inter: Vec<StateIndex> = self
            .states
            .iter()
            .copied()
            .filter(|s| *s != n && !excluded.contains(s))
            .collect();
        let eps_n = self.means.get(n)?;
        let mut eps = Vec::with_capacity(inter.len());
        for &s in &inter {
            eps.push(self.means.get(s)?);
        }
        let mut total = C64::new(0.0, 0.0);
        let mut path = vec![0usize; r - 1];
        self.paths(n, r, &inter, &eps, eps_n, 0, &mut path, &mut total)?;
        let pre = if r % 2 == 0 { 1.0 } else { -1.0 } / (2.0 * self.table.t_half).powf(r as f64 / 2.0);
        Ok(total * pre)
    }

    #[allow(clippy::too_many_arguments)]
    fn paths(
        &self,
        n: StateIndex,
        r: usize,
        inter: &[StateIndex],
        eps: &[f64],
        eps_n: f64,
        depth: usize,
        path: &mut Vec<usize>,
        total: &mut C64,
    ) -> Result<()> {
        if depth == r - 1 {
            *total += self.path_sum(n, inter, eps, eps_n, path)?;
            return Ok(());
        }
        for i in 0..inter.len() {
            if depth > 0 && path[depth - 1] == i {
                continue;
            }
            path[depth] = i;
            self.paths(n, r, inter, eps, eps_n, depth + 1, path, total)?;
        }
        Ok(())
    }

    /// Σ over ν_2..ν_r (ν_1 fixed by Σν = 0) for one intermediate path.
    fn path_sum(
        &self,
        n: StateIndex,
        inter: &[StateIndex],
        eps: &[f64],
        eps_n: f64,
        path: &[usize],
    ) -> Result<C64> {
        let r = path.len() + 1;
        let seq: Vec<StateIndex> = std::iter::once(n)
            .chain(path.iter().map(|&i| inter[i]))
            .chain(std::iter::once(n))
            .collect();
        let nm = self.table.nu_max as i64;
        let mut rows = Vec::with_capacity(r);
        for j in 1..=r {
            let row: Vec<C64> = (-nm..=nm)
                .map(|nu| self.coeff(seq[j - 1], seq[j], nu))
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        // Walk j = r, r−1, ..., 2 carrying S_j = Σ_{l ≥ j} ν_l and the partial product.
        let mut acc = C64::new(0.0, 0.0);
        self.walk(r, 0, C64::new(1.0, 0.0), &rows, path, eps, eps_n, n, &mut acc)?;
        Ok(acc)
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        &self,
        j: usize,
        s: i64,
        prod: C64,
        rows: &[Vec<C64>],
        path: &[usize],
        eps: &[f64],
        eps_n: f64,
        n: StateIndex,
        acc: &mut C64,
    ) -> Result<()> {
        let nm = self.table.nu_max as i64;
        if j == 1 {
            let nu1 = -s;
            if nu1.abs() <= nm {
                *acc += prod * rows[0][(nu1 + nm) as usize];
            }
            return Ok(());
        }
        for nu in -nm..=nm {
            let b = rows[j - 1][(nu + nm) as usize];
            if b == C64::new(0.0, 0.0) {
                continue;
            }
            let sj = s + nu;
            // Denominator attached to the intermediate s_{j−1}.
            let den = eps[path[j - 2]] - eps_n - self.table.omega * sj as f64;
            if den.abs() < self.pole_tol {
                return Err(GppaError::UnresolvedPole { state: n.to_string(), denominator: den });
            }
            self.walk(j - 1, sj, prod * b / den, rows, path, eps, eps_n, n, acc)?;
        }
        Ok(())
    }
}

impl GammaSource for SpectralSum<'_> {
    fn gamma_orders(
        &self,
        n: StateIndex,
        excluded: &BTreeSet<StateIndex>,
        r_max: usize,
    ) -> Result<Vec<C64>> {
        (2..=r_max).map(|r| self.order(n, r, excluded)).collect()
    }

    fn window(&self) -> (f64, f64) {
        (-self.table.t_half, self.table.t_half)
    }

    fn omega(&self) -> f64 {
        self.table.omega
    }
}
