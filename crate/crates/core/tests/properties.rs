use num_complex::Complex64;
use proptest::prelude::*;

use polariton_core::propagator::{read_checkpoint, write_checkpoint};
use polariton_core::scenario::{apply_override, preset_names, preset_toml};
use polariton_core::{FieldState, Grid, NoiseSpectrum, Scenario, ScenarioConfig, Statistics};

fn preset() -> impl Strategy<Value = Scenario> {
    prop::sample::select(preset_names()).prop_map(|n| Scenario::preset(n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bogoliubov_transformation_is_symplectic(s in preset(), kf in 0.0f64..1.0, tf in 0.0f64..3.0) {
        let k = kf * s.physics.default_k_max();
        let t = tf * s.transit_time();
        let (mu, nu) = s.physics.mu_nu(k, t);
        let scale = mu.norm_sqr().max(1.0);
        prop_assert!((mu.norm_sqr() - nu.norm_sqr() - 1.0).abs() < 1e-10 * scale);
    }

    #[test]
    fn squeezing_never_exceeds_shot_noise(s in preset(), kf in 0.0f64..1.0, tf in 0.0f64..2.0) {
        let k = kf * s.physics.default_k_max();
        let t = tf * s.transit_time();
        let (_, nu) = s.physics.mu_nu(k, t);
        let g = s.physics.squeezing_spectrum(k, t);
        if nu.norm() == 0.0 {
            prop_assert!((g - 1.0).abs() < 1e-12);
        } else {
            prop_assert!(g < 1.0);
        }
    }

    #[test]
    fn growth_exactly_where_interaction_beats_dispersion(s in preset(), kf in 0.0f64..1.0) {
        let p = &s.physics;
        let k = kf * p.default_k_max();
        let w0 = p.omega0(k);
        let b = p.cw.n_p * p.u_k(k);
        let unstable = 2.0 * b.abs() > w0.abs() && b * w0 < 0.0;
        prop_assert_eq!(p.growth_rate(k) > 0.0, unstable);
        prop_assert_eq!(p.signed_frequency(k).is_err(), unstable);
    }

    #[test]
    fn occupation_never_drops_below_initial(s in preset(), kf in 0.0f64..1.0, tf in 0.0f64..2.0) {
        let k = kf * s.physics.default_k_max();
        let t = tf * s.transit_time();
        for stats in [Statistics::Classical, Statistics::Quantum] {
            let n = s.physics.mode_occupation(k, t, &s.noise, stats);
            prop_assert!(n >= s.noise.n_k(k) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn kernel_transform_is_even(s in preset(), k in 0.0f64..1e5) {
        let u = s.potential;
        prop_assert_eq!(u.kernel_ft(k), u.kernel_ft(-k));
        prop_assert_eq!(u.envelope_ft(k), u.envelope_ft(-k));
    }

    #[test]
    fn grid_modes_round_trip(log_n in 8u32..14, m in -100_000i64..100_000) {
        let grid = Grid::new(1 << log_n, 0.1).unwrap();
        match grid.index_of_mode(m) {
            Some(i) => {
                prop_assert_eq!(grid.mode_number(i), m);
                prop_assert_eq!(grid.nearest_index(grid.k(i)), Some(i));
            }
            None => prop_assert!(m.unsigned_abs() >= (grid.n() / 2) as u64),
        }
    }

    #[test]
    fn checkpoints_round_trip_bitwise(seed in any::<u64>(), t in 0.0f64..1e-3) {
        let grid = Grid::new(256, 0.05).unwrap();
        let mut state = FieldState { psi: vec![Complex64::new(1.5, -0.25); 256], t, grid };
        state.seed_noise(&NoiseSpectrum::new(3.0, 2000.0).unwrap(), seed);
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &state).unwrap();
        let back = read_checkpoint(buf.as_slice()).unwrap();
        prop_assert_eq!(back, state);
    }

    #[test]
    fn numeric_overrides_survive_round_trip(n0 in 0.0f64..100.0, kappa in 0.0f64..1e10) {
        let mut doc: toml::Table = preset_toml("instability").unwrap().parse().unwrap();
        apply_override(&mut doc, &format!("noise.n0={n0:e}")).unwrap();
        apply_override(&mut doc, &format!("decoherence.kappa={kappa:e}")).unwrap();
        let cfg: ScenarioConfig = doc.try_into().unwrap();
        prop_assert_eq!(cfg.noise.n0, n0);
        prop_assert_eq!(cfg.decoherence.kappa, kappa);
        let text = cfg.to_toml_string().unwrap();
        prop_assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), cfg);
    }
}
