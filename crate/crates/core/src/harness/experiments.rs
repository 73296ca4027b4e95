use super::table::{Cell, Table};
use super::{Experiment, RunConfig};
use crate::delta::{b_coefficients, resonance_locate, transmission_point, transmission_ratio};
use crate::dho::{probability_exact, DhoExpansion};
use crate::engine::LIFETIME_TOL;
use crate::floquet::{elastic_profile, solve_sidebands};
use crate::Result;
use rayon::prelude::*;

/// Run one experiment, expanding a sweep if configured. Rows come out in
/// sweep order whatever the thread count.
pub fn run_experiment(cfg: &RunConfig) -> Result<Table> {
    let sweep = match &cfg.sweep {
        // the oscillator expansion is built once and rescaled to every a
        Some(s) if !(s.name == "a" && cfg.experiment.is_dho()) => s.clone(),
        _ => return single(cfg),
    };
    let mut merged: Option<Table> = None;
    for x in sweep.values() {
        let mut c = cfg.clone();
        c.sweep = None;
        c.set(&sweep.name, &format!("{x:?}")).map_err(crate::GppaError::Invalid)?;
        let t = single(&c)?;
        let prefix = t.column(&sweep.name).is_none();
        let m = merged.get_or_insert_with(|| {
            let mut cols: Vec<&str> = Vec::new();
            if prefix {
                cols.push(&sweep.name);
            }
            cols.extend(t.columns.iter().map(String::as_str));
            Table::new(&t.schema, &cols)
        });
        for row in t.rows {
            let mut r = Vec::with_capacity(row.len() + 1);
            if prefix {
                r.push(Cell::Float(x));
            }
            r.extend(row);
            m.push(r);
        }
        for (k, v) in t.notes {
            m.note(&format!("{k}[{}={x:?}]", sweep.name), v);
        }
    }
    Ok(merged.expect("sweep has at least two points"))
}

fn single(cfg: &RunConfig) -> Result<Table> {
    match cfg.experiment {
        Experiment::DhoProbabilities => dho_probabilities(cfg),
        Experiment::DhoLifetime => dho_lifetime(cfg),
        Experiment::DeltaResonance => delta_resonance(cfg),
        Experiment::DeltaProfile => delta_profile(cfg),
        Experiment::FloquetProfile => floquet_profile(cfg),
        Experiment::CompareProfiles => compare_profiles(cfg),
    }
}

fn a_values(cfg: &RunConfig) -> Vec<f64> {
    match &cfg.sweep {
        Some(s) if s.name == "a" => s.values(),
        _ => vec![cfg.a],
    }
}

fn dho_probabilities(cfg: &RunConfig) -> Result<Table> {
    let exp = DhoExpansion::for_pairs(cfg.sigma, cfg.omega, cfg.force, &cfg.pairs, cfg.r_max)?;
    let mut t = Table::new("dho_probabilities/v1", &["a", "n", "m", "p_gppa", "p_apt4", "p_exact", "terms"]);
    for &(n, m) in &cfg.pairs {
        let needed = n.abs_diff(m) + 2 * n.min(m);
        if needed > cfg.r_max {
            t.note("warning", format!("series for ({n},{m}) needs r = {needed}, truncated at r_max = {}", cfg.r_max));
        }
    }
    let blocks = a_values(cfg)
        .par_iter()
        .map(|&a| {
            cfg.pairs
                .iter()
                .map(|&(n, m)| {
                    let s = exp.series(n, m, a)?;
                    Ok(vec![
                        a.into(),
                        n.into(),
                        m.into(),
                        exp.p_gppa(n, m, a)?.into(),
                        exp.p_apt4(n, m, a)?.into(),
                        probability_exact(a, n, m).into(),
                        s.nonzero_terms().into(),
                    ])
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    blocks.into_iter().flatten().for_each(|r| t.push(r));
    Ok(t)
}

fn dho_lifetime(cfg: &RunConfig) -> Result<Table> {
    let diag: Vec<(usize, usize)> = cfg.levels.iter().map(|&n| (n, n)).collect();
    let exp = DhoExpansion::for_pairs(cfg.sigma, cfg.omega, cfg.force, &diag, cfg.r_max)?;
    let span = exp.window.1 - exp.window.0;
    let mut t = Table::new(
        "dho_lifetime/v1",
        &["a", "n", "gamma2_im", "gamma4_im", "exponent_re", "exponent_im", "closed_form_im", "tau"],
    );
    t.note("span_2t", format!("{span:?}"));
    let blocks = a_values(cfg)
        .par_iter()
        .map(|&a| {
            cfg.levels
                .iter()
                .map(|&n| {
                    // g[r − 2] = 2Tγ^(r)
                    let g = exp.gamma_exponents(n, a)?;
                    let total: crate::C64 = g.iter().sum();
                    let nf = n as f64;
                    let closed = (nf + 0.5) * a * a + 0.25 * nf * (nf + 1.0) * a.powi(4);
                    let tau = if total.im > LIFETIME_TOL { span / (2.0 * total.im) } else { f64::INFINITY };
                    Ok(vec![
                        a.into(),
                        n.into(),
                        g[0].im.into(),
                        g.get(2).map(|z| z.im).unwrap_or(0.0).into(),
                        total.re.into(),
                        total.im.into(),
                        closed.into(),
                        tau.into(),
                    ])
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    blocks.into_iter().flatten().for_each(|r| t.push(r));
    Ok(t)
}

fn delta_resonance(cfg: &RunConfig) -> Result<Table> {
    let ch = b_coefficients(&cfg.delta)?;
    let r = resonance_locate(&ch, cfg.sideband, 0.05, 21)?;
    let tkk = transmission_point(&ch, r.eps_res)?.ratio;
    let mut t = Table::new(
        "delta_resonance/v1",
        &[
            "g0", "n", "eps_res", "k", "re_de", "im_de", "gamma_re", "gamma_im", "gamma_over_k2pi", "tkk", "dominance",
            "iterations", "method",
        ],
    );
    let k2pi = r.k / (2.0 * std::f64::consts::PI);
    t.push(vec![
        cfg.delta.g0.into(),
        r.n.into(),
        r.eps_res.into(),
        r.k.into(),
        r.re_de.into(),
        r.im_de.into(),
        r.gamma_k.re.into(),
        r.gamma_k.im.into(),
        (r.gamma_k.im / k2pi).into(),
        tkk.into(),
        r.dominance().into(),
        r.iterations.into(),
        format!("{:?}", r.method).as_str().into(),
    ]);
    Ok(t)
}

fn delta_profile(cfg: &RunConfig) -> Result<Table> {
    let ch = b_coefficients(&cfg.delta)?;
    let points = cfg
        .eps_grid()
        .par_iter()
        .map(|&e| transmission_point(&ch, e))
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new("delta_profile/v1", &["eps", "tkk", "gamma_re", "gamma_im", "dressed"]);
    for p in points {
        t.push(vec![
            p.eps.into(),
            p.ratio.into(),
            p.exponent_gamma.re.into(),
            p.exponent_gamma.im.into(),
            (p.gamma.dressed as usize).into(),
        ]);
    }
    Ok(t)
}

fn floquet_profile(cfg: &RunConfig) -> Result<Table> {
    let sols = cfg
        .eps_grid()
        .par_iter()
        .map(|&e| solve_sidebands(e, cfg.delta.g0, cfg.n_side))
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new("floquet_profile/v1", &["eps", "t0_sq", "flux", "n_side"]);
    for s in sols {
        t.push(vec![s.eps.into(), s.elastic().into(), s.flux().into(), s.n_side.into()]);
    }
    Ok(t)
}

fn compare_profiles(cfg: &RunConfig) -> Result<Table> {
    let grid = cfg.eps_grid();
    let ch = b_coefficients(&cfg.delta)?;
    let (gppa, floq) = rayon::join(|| transmission_ratio(&ch, &grid), || elastic_profile(cfg.delta.g0, &grid, cfg.n_side));
    let (gppa, floq) = (gppa?, floq?);
    let mut t = Table::new("compare_profiles/v1", &["eps", "tkk_gppa", "t0_sq_floquet"]);
    for (g, f) in gppa.samples.iter().zip(&floq.samples) {
        t.push(vec![g.0.into(), g.1.into(), f.1.into()]);
    }
    if cfg.delta.g0 > 0.0 {
        let r = resonance_locate(&ch, cfg.sideband, 0.05, 3)?;
        t.note("eps_res", format!("{:?}", r.eps_res));
    }
    if let (Some(g), Some(f)) = (gppa.argmin(), floq.argmin()) {
        t.note("gppa_min_eps", format!("{:?}", g.0));
        t.note("floquet_min_eps", format!("{:?}", f.0));
        t.note("floquet_min_value", format!("{:?}", f.1));
    }
    t.note("grid_spacing", format!("{:?}", (cfg.eps_stop - cfg.eps_start) / (cfg.eps_count - 1) as f64));
    Ok(t)
}
