//! Renormalized transition amplitudes X_nm as series of resummed terms.

use super::dyson::DysonSolver;
use super::{survival_amplitude, GammaFactor};
use crate::quadrature::rk4_richardson;
use crate::spectral::{InstantModel, StateIndex};
use crate::{GppaError, Result, C64};
use std::collections::BTreeSet;

/// Relative size below which a term counts as an exact cancellation.
pub const ZERO_TERM_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesMode {
    /// Reference-state damping factored out of the whole amplitude; the
    /// remaining series is the coupling expansion of X_nm / X_00.
    Asymptotic,
    /// Self-avoiding path decomposition with dressed diagonal factors,
    /// grouped by path length.
    Exact,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeSeries {
    pub target: (StateIndex, StateIndex),
    /// (r, X^{(r)R}); cancelled orders are stored as exact zeros.
    pub terms: Vec<(usize, C64)>,
    pub truncation_r: usize,
    pub total: C64,
    pub mode: SeriesMode,
    pub warning: Option<String>,
}

impl AmplitudeSeries {
    pub fn nonzero_terms(&self) -> usize {
        self.terms.iter().filter(|(_, z)| *z != C64::new(0.0, 0.0)).count()
    }

    fn finish(target: (StateIndex, StateIndex), terms: Vec<(usize, C64)>, r_max: usize, mode: SeriesMode) -> Self {
        let total: C64 = terms.iter().map(|(_, z)| z).sum();
        let last = terms.iter().rev().find(|(_, z)| z.norm() > 0.0);
        let warning = match last {
            Some(&(r, z)) if r == r_max && total.norm() > 0.0 && z.norm() > 1e-6 * total.norm() => Some(format!(
                "last retained order r = {r} carries {:.3e} of the total",
                z.norm() / total.norm()
            )),
            _ => None,
        };
        AmplitudeSeries { target, terms, truncation_r: r_max, total, mode, warning }
    }
}

/// Renormalized series for X_{n m}(t_f, t_i) up to order `r_max`.
pub fn renormalized_series<M: InstantModel + ?Sized>(
    solver: &DysonSolver<'_, M>,
    n: StateIndex,
    m: StateIndex,
    r_max: usize,
    mode: SeriesMode,
) -> Result<AmplitudeSeries> {
    match mode {
        SeriesMode::Asymptotic => asymptotic(solver, n, m, r_max),
        SeriesMode::Exact => exact(solver, n, m, r_max),
    }
}

fn asymptotic<M: InstantModel + ?Sized>(
    solver: &DysonSolver<'_, M>,
    n: StateIndex,
    m: StateIndex,
    r_max: usize,
) -> Result<AmplitudeSeries> {
    let reference = *solver
        .basis
        .first()
        .ok_or_else(|| GppaError::Invalid("empty basis".into()))?;
    let norm = solver.normalized(reference, &[m], &BTreeSet::new(), r_max)?;
    let y = norm
        .ratio(n, m)
        .ok_or_else(|| GppaError::Invalid(format!("state {n} not in basis")))?;
    Ok(series_from_ratio((n, m), &y, &norm.log, r_max))
}

/// Asymptotic series X^{(r)R} = e^{i2Tγ_ref}·y_r from the orders y_r of
/// X_nm / X_ref,ref and b_q of ln X_ref,ref. Orders below `ZERO_TERM_TOL`
/// relative to the largest |y_q|·ρ^{r−q} are stored as exact zeros, with
/// ρ = √(−2 Re b_2) the norm of the first-order amplitudes leaving the
/// reference state.
pub fn series_from_ratio(target: (StateIndex, StateIndex), y: &[C64], log: &[C64], r_max: usize) -> AmplitudeSeries {
    let damping = log.iter().skip(2).sum::<C64>().exp();
    let rho = log.get(2).map(|b| (2.0 * b.re.abs()).sqrt()).unwrap_or(0.0).max(1e-300);
    let terms = (0..=r_max)
        .map(|r| {
            let scale = (0..r).map(|q| y[q].norm() * rho.powi((r - q) as i32)).fold(0.0, f64::max);
            let keep = y[r] != C64::new(0.0, 0.0) && (r == 0 || scale == 0.0 || y[r].norm() > ZERO_TERM_TOL * scale);
            (r, if keep { damping * y[r] } else { C64::new(0.0, 0.0) })
        })
        .collect();
    AmplitudeSeries::finish(target, terms, r_max, SeriesMode::Asymptotic)
}

/// Self-avoiding paths m → n on the coupling graph with at most `r_max` flips.
fn paths<M: InstantModel + ?Sized>(
    model: &M,
    basis: &[StateIndex],
    m: StateIndex,
    n: StateIndex,
    r_max: usize,
) -> Vec<Vec<StateIndex>> {
    fn rec<M: InstantModel + ?Sized>(
        model: &M,
        basis: &[StateIndex],
        n: StateIndex,
        r_max: usize,
        cur: &mut Vec<StateIndex>,
        out: &mut Vec<Vec<StateIndex>>,
    ) {
        let last = *cur.last().unwrap();
        if last == n {
            out.push(cur.clone());
            return;
        }
        if cur.len() > r_max {
            return;
        }
        for &s in basis {
            if !cur.contains(&s) && model.couples(s, last) {
                cur.push(s);
                rec(model, basis, n, r_max, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(model, basis, n, r_max, &mut vec![m], &mut out);
    out
}

fn exact<M: InstantModel + ?Sized>(
    solver: &DysonSolver<'_, M>,
    n: StateIndex,
    m: StateIndex,
    r_max: usize,
) -> Result<AmplitudeSeries> {
    let basis = &solver.basis;
    if !basis.contains(&n) || !basis.contains(&m) {
        return Err(GppaError::Invalid(format!("({n}, {m}) not in basis")));
    }
    solver.check_gaps(basis)?;
    let mut by_r = vec![C64::new(0.0, 0.0); r_max + 1];
    for path in paths(solver.model, basis, m, n, r_max) {
        let r = path.len() - 1;
        by_r[r] += path_term(solver, &path)?;
    }
    let terms = by_r.into_iter().enumerate().collect();
    Ok(AmplitudeSeries::finish((n, m), terms, r_max, SeriesMode::Exact))
}

/// One path s_0 → … → s_L: chained stages, stage j propagating in the basis
/// with s_0..s_{j−1} removed and fed by the previous stage through φ_{s_j s_{j−1}}.
fn path_term<M: InstantModel + ?Sized>(solver: &DysonSolver<'_, M>, path: &[StateIndex]) -> Result<C64> {
    let basis = &solver.basis;
    let nb = basis.len();
    let stages: Vec<Vec<StateIndex>> = (0..path.len())
        .map(|j| basis.iter().copied().filter(|s| !path[..j].contains(s)).collect())
        .collect();
    let edges: Vec<Vec<(usize, usize)>> = stages.iter().map(|st| solver.edges(st)).collect();
    let offsets: Vec<usize> = stages
        .iter()
        .scan(nb, |acc, st| {
            let o = *acc;
            *acc += st.len();
            Some(o)
        })
        .collect();
    let pos = |j: usize, s: StateIndex| stages[j].iter().position(|&x| x == s).unwrap();
    let full_edges = solver.edges(basis);
    let rhs = |t: f64, y: &[C64]| -> Vec<C64> {
        let mut dy = vec![C64::new(0.0, 0.0); y.len()];
        dy[..nb].copy_from_slice(&solver.energies(basis, t));
        let phases = &y[..nb];
        let phi = solver.apply_phi(basis, &full_edges, t, phases);
        let lookup = |a: StateIndex, b: StateIndex| -> C64 {
            let ia = basis.iter().position(|&x| x == a).unwrap();
            let ib = basis.iter().position(|&x| x == b).unwrap();
            phi.iter()
                .find(|&&(p, q, _)| p == ia && q == ib)
                .map(|&(_, _, v)| v)
                .unwrap_or(C64::new(0.0, 0.0))
        };
        for (j, st) in stages.iter().enumerate() {
            let o = offsets[j];
            for &(a, b) in &edges[j] {
                dy[o + a] += C64::i() * lookup(st[a], st[b]) * y[o + b];
            }
            if j > 0 {
                let src = y[offsets[j - 1] + pos(j - 1, path[j - 1])];
                dy[o + pos(j, path[j])] += C64::i() * lookup(path[j], path[j - 1]) * src;
            }
        }
        dy
    };
    let total: usize = nb + stages.iter().map(|s| s.len()).sum::<usize>();
    let mut y0 = vec![C64::new(0.0, 0.0); total];
    y0[offsets[0] + pos(0, path[0])] = C64::new(1.0, 0.0);
    let y = rk4_richardson(&rhs, solver.window.0, solver.window.1, solver.steps, &y0);
    let last = path.len() - 1;
    Ok(y[offsets[last] + pos(last, path[last])])
}

/// Coefficients of the evolved state at the end of `gamma0`'s window:
/// (0, X_00 e^{−i∫Ē_0}) followed by (n, X_n0 e^{−i∫Ē_n}).
pub fn assemble_state<M: InstantModel + ?Sized>(
    model: &M,
    series: &[AmplitudeSeries],
    gamma0: &GammaFactor,
) -> Result<Vec<(StateIndex, C64)>> {
    let (ti, tf) = gamma0.window;
    let phase = |s: StateIndex| -> Result<C64> { Ok(C64::from_polar(1.0, -model.phase_integral(s, ti, tf)?)) };
    let mut out = vec![(gamma0.state, survival_amplitude(gamma0, ti, tf)? * phase(gamma0.state)?)];
    for s in series {
        let (n, m) = s.target;
        if m != gamma0.state {
            return Err(GppaError::Invalid(format!("series ({n}, {m}) does not start in {}", gamma0.state)));
        }
        out.push((n, s.total * phase(n)?));
    }
    Ok(out)
}
