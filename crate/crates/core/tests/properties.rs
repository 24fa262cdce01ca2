//! Structural invariants checked on random inputs.

use kpzlab::excursion::{excursion_area, local_time, ExcursionPath};
use kpzlab::fredholm::laplace_rhs_beta2_with_order;
use kpzlab::matrix::{householder_tridiagonalize, lanczos_e1, sample_goe_gue};
use kpzlab::replicas::run_replicas;
use kpzlab::special::airy_kernel;
use kpzlab::stats::{empirical_laplace, ks_two_sample};
use kpzlab::tridiag::{eigenvalues, eigenvalues_above, spectral_at_e1, TridiagonalSym};
use kpzlab::{Beta, SeedSpec};
use proptest::prelude::*;

fn tridiag() -> impl Strategy<Value = TridiagonalSym> {
    (2usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(-3.0f64..3.0, n),
            prop::collection::vec(0.05f64..2.0, n - 1),
        )
            .prop_map(|(d, e)| TridiagonalSym::new(d, e).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectral_measure_is_a_probability_measure(t in tridiag()) {
        let s = spectral_at_e1(&t).unwrap();
        prop_assert!(s.weights.iter().all(|&w| w >= 0.0));
        prop_assert!((s.total_weight() - 1.0).abs() < 1e-12);
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn spectral_moments_reproduce_powers(t in tridiag()) {
        let s = spectral_at_e1(&t).unwrap();
        let direct = t.e1_power_moments(8);
        for (k, d) in direct.iter().enumerate() {
            let m = s.moment(k as i32);
            prop_assert!((m - d).abs() <= 1e-10 * d.abs().max(1.0), "k={} {} vs {}", k, m, d);
        }
    }

    #[test]
    fn bisection_matches_ql(t in tridiag(), q in 0.0f64..1.0) {
        let all = eigenvalues(&t).unwrap();
        let level = all[all.len() - 1] + q * (all[0] - all[all.len() - 1]);
        let above = eigenvalues_above(&t, level);
        let want: Vec<f64> = all.iter().cloned().filter(|&x| x > level).collect();
        // eigenvalues within rounding of the level may fall on either side
        prop_assert!((above.len() as i64 - want.len() as i64).abs() <= 1);
        for (a, b) in above.iter().zip(&all) {
            prop_assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn reductions_keep_low_moments(seed in any::<u64>(), complex in any::<bool>()) {
        let beta = if complex { Beta::Two } else { Beta::One };
        let m = sample_goe_gue(16, beta, &mut SeedSpec::new(seed, 0).stream()).unwrap();
        let want = m.e1_power_moments(8);
        for t in [householder_tridiagonalize(&m).unwrap(), lanczos_e1(&m, 5).unwrap()] {
            let got = t.e1_power_moments(8);
            for k in 0..=8 {
                prop_assert!((got[k] - want[k]).abs() <= 1e-9 * want[k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn airy_kernel_is_symmetric(x in -12.0f64..8.0, y in -12.0f64..8.0) {
        prop_assert_eq!(airy_kernel(x, y).unwrap(), airy_kernel(y, x).unwrap());
    }

    #[test]
    fn seeds_replay(master in any::<u64>(), stream in any::<u64>()) {
        let a: Vec<f64> = { let mut s = SeedSpec::new(master, stream).stream(); (0..8).map(|_| s.gaussian()).collect() };
        let b: Vec<f64> = { let mut s = SeedSpec::new(master, stream).stream(); (0..8).map(|_| s.gaussian()).collect() };
        prop_assert_eq!(a, b);
    }

    #[test]
    fn local_time_partitions_time(
        inner in prop::collection::vec(0.0f64..3.0, 99..400),
        width in 0.005f64..0.3,
    ) {
        let mut v = vec![0.0];
        v.extend(inner);
        v.push(0.0);
        let p = ExcursionPath::new(2.0, v).unwrap();
        let lt = local_time(&p, width).unwrap();
        prop_assert!((lt.total_time() - 2.0).abs() < 1e-10);
        prop_assert!((lt.first_moment() - excursion_area(&p)).abs() <= 2.0 * width * 2.0);
    }

    #[test]
    fn ks_statistic_is_symmetric_and_bounded(
        x in prop::collection::vec(-5.0f64..5.0, 1..60),
        y in prop::collection::vec(-5.0f64..5.0, 1..60),
    ) {
        let a = ks_two_sample(&x, &y).unwrap();
        let b = ks_two_sample(&y, &x).unwrap();
        prop_assert_eq!(a.d, b.d);
        prop_assert!((0.0..=1.0).contains(&a.d));
        prop_assert!((0.0..=1.0).contains(&a.p));
        prop_assert_eq!(ks_two_sample(&x, &x).unwrap().d, 0.0);
    }

    #[test]
    fn empirical_laplace_bands_bracket_and_start_at_one(
        xs in prop::collection::vec(0.0f64..5.0, 5..80),
        seed in any::<u64>(),
    ) {
        let pts = empirical_laplace(&xs, &[0.0, 0.5, 2.0], 50, 0.9, SeedSpec::new(seed, 0), 1).unwrap();
        prop_assert_eq!(pts[0].mean, 1.0);
        prop_assert_eq!(pts[0].lower, 1.0);
        prop_assert_eq!(pts[0].upper, 1.0);
        for p in &pts {
            prop_assert!(p.lower <= p.upper);
            prop_assert!(p.mean > 0.0 && p.mean <= 1.0);
        }
    }

    #[test]
    fn replicas_do_not_depend_on_workers(reps in 0usize..50, workers in 1usize..5, seed in any::<u64>()) {
        let f = |r: u64| SeedSpec::new(seed, r).stream().gaussian().to_bits();
        prop_assert_eq!(run_replicas(reps, 1, f), run_replicas(reps, workers, f));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn beta2_laplace_is_a_laplace_transform(u in 0.0f64..10.0, du in 0.01f64..2.0) {
        let a = laplace_rhs_beta2_with_order(u, 1.0, 80).unwrap();
        let b = laplace_rhs_beta2_with_order(u + du, 1.0, 80).unwrap();
        prop_assert!(a > 0.0 && a <= 1.0 + 1e-12);
        prop_assert!(b < a);
    }
}
