//! Cross-module invariants as property tests.

use std::sync::Arc;

use proptest::prelude::*;

use bilevel_core::bilevel::{self, GridTransform, ParamGrid};
use bilevel_core::io::{read_signal, write_signal};
use bilevel_core::mosco;
use bilevel_core::regularizers::{eval_exponent, BaseRegularizer, DoubleIntegrand};
use bilevel_core::solvers::{self, SolverConfig};
use bilevel_core::spectral::{self, SpectralData};
use bilevel_core::{ExtendedParam, FamilySpec, Grid, GridSignal, TrainingSet};

fn signal(values: Vec<f64>) -> GridSignal {
    let g = Grid::interval(0.0, 1.0, values.len()).unwrap();
    GridSignal::new(&g, values).unwrap()
}

fn values(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, len)
}

fn dist_sq(u: &GridSignal, v: &GridSignal) -> f64 {
    u.values().iter().zip(v.values()).map(|(a, b)| (a - b).powi(2)).sum::<f64>() * u.grid().h()
}

fn mean(u: &GridSignal) -> f64 {
    u.values().iter().sum::<f64>() / u.len() as f64
}

fn tv(u: &GridSignal) -> f64 {
    u.values().windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

fn lip(u: &GridSignal) -> f64 {
    u.values().windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max) / u.grid().h()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn tv_reconstruction_keeps_mean_and_beats_simple_candidates(v in values(2..80), w in 1e-4f64..2.0) {
        let eta = signal(v);
        let r = solvers::solve_tv(w, &eta).unwrap();
        let u = &r.minimizer;
        prop_assert!((mean(u) - mean(&eta)).abs() <= 1e-9);
        prop_assert!(tv(u) <= tv(&eta) + 1e-9);
        let obj = |x: &GridSignal| dist_sq(x, &eta) + w * tv(x);
        let flat = GridSignal::constant(eta.grid(), mean(&eta));
        let tol = 1e-9 * (1.0 + obj(&eta));
        prop_assert!(obj(u) <= obj(&eta) + tol);
        prop_assert!(obj(u) <= obj(&flat) + tol);
        prop_assert!((r.objective - obj(u)).abs() <= tol);
    }

    #[test]
    fn lipschitz_reconstruction_beats_simple_candidates(v in values(2..40), a in 1e-3f64..0.5) {
        let eta = signal(v);
        let r = solvers::solve_lipschitz(a, &eta).unwrap();
        let u = &r.minimizer;
        let obj = |x: &GridSignal| dist_sq(x, &eta) + a * lip(x);
        let flat = GridSignal::constant(eta.grid(), mean(&eta));
        let tol = 1e-7 * (1.0 + obj(&eta));
        prop_assert!(obj(u) <= obj(&eta) + tol, "{} > {}", obj(u), obj(&eta));
        prop_assert!(obj(u) <= obj(&flat) + tol);
        prop_assert!(lip(u) <= lip(&eta) * (1.0 + 1e-9) + 1e-9);
    }

    #[test]
    fn quadratic_weight_upper_value_matches_shrinkage(
        c in values(4..40),
        noise in values(4..40),
        a in 1e-3f64..1e3,
    ) {
        let n = c.len().min(noise.len());
        let clean = signal(c[..n].to_vec());
        let noisy = signal(c[..n].iter().zip(&noise).map(|(x, e)| x + 0.1 * e).collect());
        let oracle = dist_sq(&noisy.scale(1.0 / (1.0 + a)), &clean);
        let t = TrainingSet::single(clean, noisy).unwrap();
        let fam = FamilySpec::Weight { base: BaseRegularizer::QuadraticL2 };
        let got = bilevel::extended_upper(&fam, ExtendedParam::Interior(a), &t, &SolverConfig::default()).unwrap().i_bar;
        prop_assert!((got - oracle).abs() <= 1e-12 * (1.0 + oracle));
    }

    #[test]
    fn exponent_family_is_monotone_in_p(v in values(2..24), p in 1.0f64..20.0, dq in 0.0f64..40.0) {
        let u = signal(v);
        let f = DoubleIntegrand::abs_diff(1.0).unwrap();
        let lo = eval_exponent(ExtendedParam::Interior(p), &f, &u).unwrap();
        let hi = eval_exponent(ExtendedParam::Interior(p + dq), &f, &u).unwrap();
        let top = eval_exponent(ExtendedParam::UpperEdge, &f, &u).unwrap();
        prop_assert!(lo <= hi + mosco::MONOTONICITY_SLACK * hi.max(1.0));
        prop_assert!(hi <= top + mosco::MONOTONICITY_SLACK * top.max(1.0));
    }

    #[test]
    fn learned_s_is_no_worse_than_any_probe(
        seed in any::<u64>(),
        mu in 0.005f64..0.3,
        probe in 0.0f64..=1.0,
    ) {
        use rand::{Rng, SeedableRng};
        let g = Grid::interval(0.0, std::f64::consts::PI, 32).unwrap();
        let basis = Arc::new(spectral::build_basis(&g, 12).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = basis.eigenvalues().iter().map(|l| rng.gen_range(-1.0..1.0) / l).collect();
        let n: Vec<f64> = c.iter().map(|x| x + 0.05 * rng.gen_range(-1.0..1.0)).collect();
        let data = SpectralData::from_coeffs(&basis, vec![(c, n)]).unwrap();
        let best = spectral::learn_s_data(&data, mu);
        prop_assert!((0.0..=1.0).contains(&best.s_hat));
        prop_assert!(best.value <= data.upper_value(probe, mu) + 1e-12);
        prop_assert!(best.value <= data.upper_value(0.0, mu));
        prop_assert!(best.value <= data.upper_value(1.0, mu));
    }

    #[test]
    fn param_grid_points_are_sorted_and_in_range(lo in 1e-4f64..1.0, span in 1.01f64..1e3, count in 2usize..30) {
        for tr in [GridTransform::Linear, GridTransform::Log, GridTransform::Reciprocal] {
            let pg = ParamGrid::new(tr, lo, lo * span, count);
            let pts = pg.points();
            prop_assert_eq!(pts.len(), count);
            prop_assert_eq!(pts[0], lo);
            prop_assert_eq!(pts[count - 1], lo * span);
            prop_assert!(pts.windows(2).all(|w| w[0] < w[1]));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn learn_reports_the_smallest_sample(v in values(8..40)) {
        let clean = signal(v.iter().map(|x| (x * 3.0).sin()).collect());
        let noisy = signal(clean.values().iter().zip(&v).map(|(c, e)| c + 0.1 * e).collect());
        let t = TrainingSet::single(clean, noisy).unwrap();
        let fam = FamilySpec::Weight { base: BaseRegularizer::Tv };
        let rep = bilevel::learn(&fam, &t, &ParamGrid::new(GridTransform::Log, 1e-4, 1.0, 8), 5, &SolverConfig::default()).unwrap();
        let min = rep.samples.iter().filter_map(|s| s.i_bar).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(rep.min_value, min);
        prop_assert_eq!(rep.interior, rep.argmin.is_interior());
        prop_assert!(rep.samples.windows(2).all(|w| w[0].param.cmp_order(&w[1].param).is_lt()));
    }

    #[test]
    fn csv_round_trip(v in values(1..60)) {
        let u = signal(v);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("u.csv");
        write_signal(&u, &p).unwrap();
        let back = read_signal(&p, Some(u.grid())).unwrap();
        for (a, b) in u.values().iter().zip(back.values()) {
            prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1e-300) + 1e-300);
        }
    }
}
