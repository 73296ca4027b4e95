use gppa::delta::{b_coefficients, transmission_point, DeltaConfig, DeltaModel};
use gppa::dho::{DhoModel, PolyDriving};
use gppa::engine::{gamma_total, lifetime, DysonSolver, Tau};
use gppa::floquet::{solve_sidebands, Barrier, Incidence, SidebandSystem};
use gppa::spectral::{fourier_coefficients, shifted_flip, FourierWindow, InstantModel, MeanEnergy, StateIndex};
use gppa::two_level::TwoLevel;
use gppa::C64;
use proptest::prelude::*;
use std::collections::BTreeSet;

fn d(n: usize) -> StateIndex {
    StateIndex::Discrete(n)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn dho_flips_are_hermitian(g in 0.1f64..5.0, t in -1.8f64..1.8, n in 0usize..6) {
        let model = DhoModel::new(PolyDriving::infinite(g, 5.0, 1.0).unwrap());
        let f = model.flip(d(n), d(n + 1), t).unwrap();
        let b = model.flip(d(n + 1), d(n), t).unwrap();
        prop_assert!((b - f.conj()).norm() <= 1e-12 * f.norm().max(1.0));
    }

    #[test]
    fn delta_flips_are_hermitian(g0 in 0.2f64..2.0, t in 0.05f64..3.1, k in 0.1f64..5.0, dk in 0.05f64..2.0) {
        let m = DeltaModel::new(g0);
        let (a, b) = (StateIndex::continuum(k).unwrap(), StateIndex::continuum(k + dk).unwrap());
        for (x, y) in [(d(0), a), (a, b)] {
            let f = m.flip(x, y, t).unwrap();
            let r = m.flip(y, x, t).unwrap();
            prop_assert!((r - f.conj()).norm() <= 1e-12 * f.norm().max(1.0));
        }
    }

    #[test]
    fn two_level_flips_are_hermitian(delta in 0.3f64..2.0, amp in 0.0f64..2.0, w in 0.1f64..1.0, t in -10.0f64..10.0) {
        let m = TwoLevel::harmonic(delta, amp, w);
        let f = m.flip(d(0), d(1), t).unwrap();
        let b = m.flip(d(1), d(0), t).unwrap();
        prop_assert!((b - f.conj()).norm() <= 1e-12 * f.norm().max(1.0));
    }

    #[test]
    fn floquet_conserves_flux(eps in 0.02f64..3.0, g0 in 0.0f64..2.0) {
        // keep away from channel thresholds
        prop_assume!((eps - eps.round()).abs() > 1e-3);
        let s = solve_sidebands(eps, g0, 8).unwrap();
        prop_assert!((s.flux() - 1.0).abs() <= 1e-8, "flux {}", s.flux());
        prop_assert!(s.elastic() <= 1.0 + 1e-9);
    }

    #[test]
    fn floquet_truncation_doubling_is_stable(eps in 0.02f64..2.0, g0 in 0.1f64..1.5) {
        prop_assume!((eps - eps.round()).abs() > 1e-3);
        let s = solve_sidebands(eps, g0, 8).unwrap();
        let twice = SidebandSystem::new(eps, g0, 2 * s.n_side, Barrier::Driven, Incidence::Left)
            .unwrap()
            .solve()
            .unwrap();
        prop_assert!((twice.elastic() - s.elastic()).abs() <= 1e-8);
    }

    #[test]
    fn floquet_left_right_transmission_agree(eps in 0.05f64..2.0, g0 in 0.1f64..1.5) {
        prop_assume!((eps - eps.round()).abs() > 1e-3);
        let l = solve_sidebands(eps, g0, 8).unwrap();
        let r = gppa::floquet::solve_converged(eps, g0, 8, Barrier::Driven, Incidence::Right).unwrap();
        prop_assert!((l.elastic() - r.elastic()).abs() <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn fourier_round_trip(delta in 0.5f64..2.0, amp in 0.05f64..0.8, w in 0.3f64..0.8, s in 0.0f64..1.0) {
        let m = TwoLevel::harmonic(delta, amp, w);
        let t_half = 2.0 * std::f64::consts::PI / w;
        let states = [d(0), d(1)];
        let means = MeanEnergy::compute(&m, &states, (-t_half, t_half)).unwrap();
        let pairs = [(d(0), d(1)), (d(1), d(0))];
        let table = fourier_coefficients(&m, &pairs, &means, FourierWindow::new(t_half), 128, None).unwrap();
        for j in 0..64 {
            let t = -t_half + 2.0 * t_half * (j as f64 + s) / 64.0;
            for &(a, b) in &pairs {
                let direct = shifted_flip(&m, a, b, t, &means).unwrap();
                let back = table.reconstruct(a, b, t).unwrap();
                prop_assert!((back - direct).norm() <= 1e-8, "t = {t}: {back} vs {direct}");
            }
        }
    }

    #[test]
    fn two_level_loop_factor_decays(delta in 0.5f64..2.0, amp in 0.05f64..0.5) {
        let m = TwoLevel::harmonic(delta, amp, 0.4);
        let t = 2.0 * std::f64::consts::PI / 0.4;
        let solver = DysonSolver::new(&m, vec![d(0), d(1)], (-t, t)).with_steps(1000);
        let g = gamma_total(&solver, d(0), &BTreeSet::new(), 4).unwrap();
        // |X_00|² ≤ 1 to the accuracy of the integration
        prop_assert!(g.value.im >= -1e-9, "Im gamma = {}", g.value.im);
    }
}

#[test]
fn zero_driving_is_the_identity() {
    let model = DhoModel::new(PolyDriving::infinite(0.0, 5.0, 1.0).unwrap());
    let solver = DysonSolver::new(&model, DhoModel::basis(5), model.window()).with_steps(100);
    for n in 0..3 {
        let orders = solver.orders(d(n), &BTreeSet::new(), 4).unwrap();
        for m in 0..5 {
            let want = if m == n { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            assert_eq!(orders.series(d(m)).iter().sum::<C64>(), want);
        }
        let g = gamma_total(&solver, d(n), &BTreeSet::new(), 6).unwrap();
        assert_eq!(g.value, C64::new(0.0, 0.0));
        assert_eq!(lifetime(&g).unwrap().tau, Tau::Infinite);
    }
    let ch = b_coefficients(&DeltaConfig { g0: 0.0, ..DeltaConfig::default() }).unwrap();
    for e in [0.05, 0.5, 0.95] {
        assert_eq!(transmission_point(&ch, e).unwrap().ratio, 1.0);
    }
    let s = solve_sidebands(0.4, 0.0, 4).unwrap();
    assert_eq!(s.elastic(), 1.0);
}
