use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use mirrornoise::analytic::{
    photocurrent_variance_mirror, photocurrent_variance_open, variance_at, variance_e1,
    variance_e1_raw, variance_e2, variance_e2_raw, Port,
};
use mirrornoise::config::{sql_baseline, OpenPortWeights, OpticalConfig, VacuumWeights};
use mirrornoise::modes::{self, BeamSplitter, CoherentProductState, LinearFieldForm};
use mirrornoise::scan::{find_extrema, period_average};

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

prop_compose! {
    fn weights()(v_b2 in 0.0..4.0, v_1sq in 0.0..4.0, v_2sq in 0.0..4.0) -> VacuumWeights {
        VacuumWeights { v_b2, v_1sq, v_2sq }
    }
}

prop_compose! {
    fn config()(
        t in 0.0..=1.0,
        w in weights(),
        kz1 in 0.0..4.0 * PI,
        kz2 in 0.0..4.0 * PI,
        a in 0.0..6.0,
        theta in -PI..PI,
        e in 0.1..3.0,
        big in 0.0..2.0,
    ) -> OpticalConfig {
        let mut c = OpticalConfig::default().with_transmittance(t).with_weights(w);
        c.alpha = Complex64::from_polar(a, theta);
        c.field_unit = e;
        c.big_z1 = big;
        c.big_z2 = 2.0 - big;
        c.with_phase_z1(kz1).with_phase_z2(kz2)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn raw_and_decomposed_forms_agree(cfg in config()) {
        let scale = sql_baseline(&cfg).max(cfg.field_unit * cfg.field_unit);
        prop_assert!((variance_e1_raw(&cfg) - variance_e1(&cfg).total).abs() <= 1e-12 * scale);
        prop_assert!((variance_e2_raw(&cfg) - variance_e2(&cfg).total).abs() <= 1e-12 * scale);
    }

    #[test]
    fn traveling_parts_conserve_the_reference(cfg in config()) {
        prop_assume!(cfg.transmittance > 1e-6 && cfg.transmittance < 1.0 - 1e-6);
        let sql = sql_baseline(&cfg);
        prop_assert!(close(variance_e1(&cfg).traveling / cfg.transmittance, sql, 1e-12));
        prop_assert!(close(variance_e2(&cfg).traveling / cfg.reflectance(), sql, 1e-12));
    }

    #[test]
    fn variance_ignores_carrier_phase_and_clock(cfg in config(), theta in -PI..PI, omega in 0.1..10.0) {
        let mut other = cfg;
        other.alpha = Complex64::from_polar(cfg.alpha.norm(), theta);
        other.omega = omega;
        prop_assert_eq!(variance_e1(&cfg), variance_e1(&other));
        prop_assert_eq!(variance_e2(&cfg), variance_e2(&other));
    }

    #[test]
    fn built_forms_match_closed_forms(cfg in config(), t in 0.0..10.0) {
        let state = modes::config_state(&cfg);
        let e1 = modes::variance(&modes::build_field_e1(&cfg, t), &state);
        let e2 = modes::variance(&modes::build_field_e2(&cfg, t), &state);
        let scale = cfg.field_unit * cfg.field_unit;
        prop_assert!((e1 - variance_e1(&cfg).total).abs() <= 1e-12 * scale.max(e1));
        prop_assert!((e2 - variance_e2(&cfg).total).abs() <= 1e-12 * scale.max(e2));
    }

    #[test]
    fn form_variance_is_time_invariant(cfg in config(), t1 in 0.0..10.0, t2 in 0.0..10.0) {
        let state = modes::config_state(&cfg);
        let a = modes::variance(&modes::build_field_e1(&cfg, t1), &state);
        let b = modes::variance(&modes::build_field_e1(&cfg, t2), &state);
        prop_assert!(close(a, b, 1e-12) || (a - b).abs() < 1e-15);
    }

    #[test]
    fn variance_is_displacement_invariant(cfg in config(), shift_re in -5.0..5.0, shift_im in -5.0..5.0) {
        let state = modes::config_state(&cfg);
        let shifted = state.with_amplitudes_scaled(Complex64::new(shift_re, shift_im));
        let mut moved = CoherentProductState::new();
        for (m, s) in shifted.iter() {
            moved.set(m.clone(), s.amplitude + Complex64::new(shift_im, -shift_re), s.weight).unwrap();
        }
        let form = modes::build_field_e1(&cfg, 0.3);
        let v = modes::variance(&form, &state);
        prop_assert!(close(v, modes::variance(&form, &shifted), 1e-13) || v == 0.0);
        prop_assert!(close(v, modes::variance(&form, &moved), 1e-13) || v == 0.0);
    }

    #[test]
    fn variance_is_nonnegative_and_vanishes_without_vacuum(cfg in config()) {
        prop_assert!(variance_e1(&cfg).total >= 0.0);
        prop_assert!(variance_e2(&cfg).total >= 0.0);
        let silent = cfg.with_weights(VacuumWeights::uniform(0.0));
        let state = modes::config_state(&silent);
        prop_assert_eq!(modes::variance(&modes::build_field_e1(&silent, 0.0), &state), 0.0);
        prop_assert_eq!(variance_e2(&silent).total, 0.0);
    }

    #[test]
    fn splitter_preserves_photon_number_and_form_norm(
        t in 0.0..=1.0,
        a in (-3.0..3.0, -3.0..3.0),
        b in (-3.0..3.0, -3.0..3.0),
        c in (-3.0..3.0, -3.0..3.0),
        d in (-3.0..3.0, -3.0..3.0),
    ) {
        let bs = BeamSplitter::standard(t).unwrap();
        let state = CoherentProductState::new()
            .with("b", Complex64::new(a.0, a.1), 1.0).unwrap()
            .with("c", Complex64::new(b.0, b.1), 1.0).unwrap();
        let out = bs.transform_state(&state).unwrap();
        prop_assert!(close(out.photon_number(), state.photon_number(), 1e-12) || state.photon_number() < 1e-300);

        let form = LinearFieldForm::new()
            .with("a1", Complex64::new(c.0, c.1))
            .with("a2", Complex64::new(d.0, d.1));
        let back = bs.pull_back(&form).unwrap();
        prop_assert!(close(back.norm_sqr(), form.norm_sqr(), 1e-12) || form.norm_sqr() < 1e-300);
    }

    #[test]
    fn splitter_commutes_with_moments(t in 0.0..=1.0, re in -3.0..3.0, im in -3.0..3.0, w1 in 0.0..3.0, w2 in 0.0..3.0) {
        // Measuring a1 after transforming the state equals measuring the
        // pulled-back form on the original state.
        let bs = BeamSplitter::standard(t).unwrap();
        let state = CoherentProductState::new()
            .with("b", Complex64::new(re, im), w1).unwrap()
            .with("c", Complex64::new(0.0, 0.0), w2).unwrap();
        let form = LinearFieldForm::new().with("a1", Complex64::new(0.0, 1.0));
        let direct = modes::mean(&form, &bs.transform_state(&state).unwrap());
        let pulled = modes::mean(&bs.pull_back(&form).unwrap(), &state);
        prop_assert!((direct - pulled).abs() < 1e-12);
    }

    #[test]
    fn reference_level_ignores_transmittance_for_equal_weights(t1 in 0.0..=1.0, t2 in 0.0..=1.0, w in 0.0..5.0, e in 0.1..3.0) {
        let mut a = OpticalConfig::default().with_transmittance(t1).with_weights(VacuumWeights::uniform(w));
        a.field_unit = e;
        let b = a.with_transmittance(t2);
        prop_assert!((sql_baseline(&a) - sql_baseline(&b)).abs() <= 1e-14 * sql_baseline(&a).max(1.0));
        let mut unit = a;
        unit.field_unit = 1.0;
        prop_assert!(close(sql_baseline(&a), e * e * sql_baseline(&unit), 1e-14) || w == 0.0);
    }

    #[test]
    fn open_port_has_no_position_dependence(t in 0.05..0.95, z1 in -2.0..2.0, z2 in -2.0..2.0, a in 0.1..5.0) {
        let state = modes::open_port_state(Complex64::new(a, 0.0), &OpenPortWeights::default()).unwrap();
        let f1 = modes::photocurrent_form_open(t, 0.0, 1.0, 2.0 * PI, z1).unwrap();
        let f2 = modes::photocurrent_form_open(t, 0.0, 1.0, 2.0 * PI, z2).unwrap();
        let v1 = modes::photocurrent_variance(&f1, &state);
        prop_assert!(close(v1, modes::photocurrent_variance(&f2, &state), 1e-12));
        prop_assert!(close(v1, photocurrent_variance_open(a * a, t, &OpenPortWeights::default()), 1e-12));

        // whereas the mirror version moves with the probe
        let mut cfg = OpticalConfig::default().with_transmittance(t);
        cfg.alpha = Complex64::new(a, 0.0);
        let node = photocurrent_variance_mirror(&cfg.with_phase_z1(0.0)).total;
        let anti = photocurrent_variance_mirror(&cfg.with_phase_z1(PI / 2.0)).total;
        prop_assert!(anti > node);
    }

    #[test]
    fn mirror_photocurrent_form_matches_formula(cfg in config()) {
        let state = modes::config_state(&cfg);
        let form = modes::photocurrent_form_mirror(&cfg, 0.2);
        let v = modes::photocurrent_variance(&form, &state);
        let want = photocurrent_variance_mirror(&cfg).total;
        prop_assert!((v - want).abs() <= 1e-12 * want.max(1e-12));
    }
}

#[test]
fn node_minimum_and_antinode_maximum() {
    for t in [0.1, 0.3, 0.5, 0.9] {
        let cfg = OpticalConfig::default().with_transmittance(t);
        let sql = sql_baseline(&cfg);
        let ex = find_extrema(&cfg, Port::A1, 0.0, 2.0).unwrap();
        assert_eq!(ex.nodes.len(), 5);
        assert_eq!(ex.antinodes.len(), 4);
        for p in &ex.grid {
            let want = if ex.nodes.contains(&p.z) {
                t * sql
            } else {
                t * sql + 2.0 * (1.0 - t)
            };
            assert!((p.report.total - want).abs() < 1e-12, "T={t} z={}", p.z);
        }
        for &z in &ex.nodes {
            let r = variance_at(&cfg, Port::A1, z);
            assert!(r.sub_sql && r.total < sql);
        }
    }
}

#[test]
fn standing_term_averages_to_half() {
    for t in [0.2, 0.5, 0.8] {
        let cfg = OpticalConfig::default()
            .with_transmittance(t)
            .with_weights(VacuumWeights { v_b2: 1.0, v_1sq: 1.7, v_2sq: 0.6 });
        let avg = period_average(&cfg, Port::A1, 4096);
        assert!((avg - (1.0 - t) * 1.7).abs() < 1e-12);
    }
}
