use std::sync::OnceLock;

use gkdv_core::config::RunConfig;
use gkdv_core::fit::linear_fit;
use gkdv_core::linop::compute_spectrum;
use gkdv_core::modulation::tube_distance;
use gkdv_core::series::build_series;
use gkdv_core::{Grid, SolitonContext, SpectralData};
use proptest::prelude::*;

fn ctx() -> SolitonContext {
    SolitonContext::new(6).unwrap()
}

fn spectral() -> &'static SpectralData {
    static SD: OnceLock<SpectralData> = OnceLock::new();
    SD.get_or_init(|| compute_spectrum(&ctx(), Grid::new(30.0, 512).unwrap(), Default::default()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn functionals_are_translation_invariant(a in -10.0..10.0f64) {
        let c = ctx();
        let g = Grid::new(40.0, 1024).unwrap();
        let f0 = c.functionals(&c.sample_q(&g));
        let f1 = c.functionals(&c.sample_q_translate(&g, a));
        prop_assert!((f0.mass - f1.mass).abs() <= 1e-12 * f0.mass);
        prop_assert!((f0.energy - f1.energy).abs() <= 1e-10 * f0.energy.abs());
    }

    #[test]
    fn compressed_solitons_keep_mass_and_lower_energy(lambda in 0.85..1.2f64) {
        prop_assume!((lambda - 1.0f64).abs() > 1e-3);
        let c = ctx();
        let g = Grid::new(40.0, 2048).unwrap();
        let q = c.sample_q(&g);
        let u = g.sample(|x| lambda * c.q(lambda * lambda * x));
        let (fq, fu) = (c.functionals(&q), c.functionals(&u));
        prop_assert!((fu.mass / fq.mass - 1.0).abs() < 1e-10);
        prop_assert!(fu.energy < fq.energy);
    }

    #[test]
    fn tube_distance_vanishes_on_translates(y in -6.0..6.0f64) {
        let c = ctx();
        let g = Grid::new(40.0, 1024).unwrap();
        let (d, center) = tube_distance(&c.sample_q_translate(&g, y), &c);
        prop_assert!(d < 1e-8, "distance {d:e}");
        prop_assert!((center - y).abs() < 1e-8, "center {center} vs {y}");
    }

    #[test]
    fn series_is_homogeneous_in_the_amplitude(a in 0.1..3.0f64, negative in any::<bool>()) {
        let sd = spectral();
        let a = if negative { -a } else { a };
        let sa = build_series(a, 3, sd).unwrap();
        let s1 = build_series(a.signum(), 3, sd).unwrap();
        for j in 1..=3u32 {
            let za = sa.v.coefficient(j).unwrap();
            let z1 = s1.v.coefficient(j).unwrap().scale(a.abs().powi(j as i32));
            prop_assert!((za - &z1).l2_norm() <= 1e-10 * z1.l2_norm());
        }
    }

    #[test]
    fn line_fit_recovers_exact_lines(slope in -5.0..5.0f64, icpt in -3.0..3.0f64, n in 3usize..40) {
        let xs: Vec<f64> = (0..n).map(|i| 0.3 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| slope * x + icpt).collect();
        let fit = linear_fit(&xs, &ys).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-10);
        prop_assert!(fit.residual < 1e-10);
    }

    #[test]
    fn interpolation_to_a_finer_grid_and_back_is_exact(c in -3.0..3.0f64, w in 1.0..3.0f64) {
        let coarse = Grid::new(20.0, 256).unwrap();
        let fine = Grid::new(20.0, 1024).unwrap();
        let u = coarse.sample(|x| (-(x - c) * (x - c) / w).exp());
        let back = u.interpolate_to(&fine).interpolate_to(&coarse);
        prop_assert!((&back - &u).max_abs() < 1e-12);
    }

    #[test]
    fn config_round_trip_is_idempotent(
        p in 2u32..12,
        l in 5.0..80.0f64,
        log_n in 5u32..12,
        dt in proptest::option::of(1e-6..1e-2f64),
        amp in proptest::option::of(-3.0..3.0f64),
        k in proptest::option::of(1u32..8),
        n_list in proptest::option::of(proptest::collection::vec(1u32..100, 1..5)),
        plots in any::<bool>(),
    ) {
        let mut cfg = RunConfig::default();
        cfg.profiles.p = p;
        cfg.grid.half_length = l;
        cfg.grid.n_points = 1 << log_n;
        cfg.evolve.dt = dt;
        cfg.experiments.amplitude = amp;
        cfg.experiments.k_max = k;
        cfg.experiments.n_list = n_list;
        cfg.output.plots = plots;
        let text = cfg.to_text().unwrap();
        let parsed = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(&parsed, &cfg);
        prop_assert_eq!(parsed.to_text().unwrap(), text);
    }
}
