use std::f64::consts::TAU;

use equidist_core::discrepancy::{
    angular_mean_stat, erdos_turan_check, radial_mean_stat, sector_count, sector_tally,
    AnnulusSpec, SectorSpec,
};
use equidist_core::ensembles::{
    galois_stable_ensemble, kummer_ensemble, HeightMode, OrbitEnsemble,
};
use equidist_core::equidist::{
    cell_estimate_check, choose_offset, circle_integral, mean_deviation_check,
    mean_deviation_decomposition, select_embeddings, test_function_library, TestFunction,
};
use equidist_core::heights::HeightSummary;
use equidist_core::rootfind::{self, ComplexPolynomial, RootOptions};
use equidist_core::zpoly::IntPolynomial;
use equidist_core::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn point() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, 0.0..TAU).prop_map(|(l, a)| Complex64::from_polar(l.exp(), a))
}

fn point_set(max: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(point(), 1..=max)
}

fn random_ensemble(max_sets: usize, card: usize) -> impl Strategy<Value = OrbitEnsemble> {
    (1..=max_sets, 0.0..1.0f64)
        .prop_flat_map(move |(k, m)| {
            (
                prop::collection::vec(prop::collection::vec(point(), card), k),
                Just(m),
            )
        })
        .prop_map(move |(sets, m)| {
            let w = vec![1.0 / sets.len() as f64; sets.len()];
            OrbitEnsemble::new(
                "random",
                sets,
                Vec::new(),
                w,
                HeightSummary::from_mean(card, m, m * card as f64),
                HeightMode::Exact,
            )
            .unwrap()
        })
}

/// Kummer ensembles and Galois orbits of `x^n - c`.
fn generated_ensemble() -> impl Strategy<Value = OrbitEnsemble> {
    prop_oneof![
        (
            prop::sample::select(vec![3u64, 4, 5, 7, 9, 11, 13, 16, 31, 101]),
            1usize..=6
        )
            .prop_map(|(m, n)| kummer_ensemble(m, n).unwrap()),
        (2usize..=40, 2i64..=9).prop_map(|(n, c)| {
            let mut v = vec![0; n + 1];
            v[0] = -c;
            v[n] = 1;
            galois_stable_ensemble(&IntPolynomial::from_i64(&v)).unwrap()
        }),
    ]
}

fn near_edge(z: Complex64, s: &SectorSpec) -> bool {
    let gap = |a: f64| {
        let d = (z.arg() - a).rem_euclid(TAU);
        d.min(TAU - d)
    };
    gap(s.start_angle()) < 1e-9 || gap(s.start_angle() + s.theta()) < 1e-9
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn partition_counts_are_exact(ens in random_ensemble(6, 40)) {
        for n in 2..=64usize {
            let part = choose_offset(&ens, n).unwrap();
            for set in ens.conjugate_sets() {
                let total: usize = (0..n).map(|j| sector_count(set, &part.cell(j))).sum();
                prop_assert_eq!(total, set.len());
                prop_assert_eq!(part.cell_counts(set).iter().sum::<usize>(), set.len());
                for z in set {
                    prop_assert!(part.distance_to_cut(*z) >= 1e-9);
                }
            }
        }
    }

    #[test]
    fn sector_count_is_rotation_invariant(
        pts in point_set(60),
        start in 0.0..TAU,
        theta in 0.0..TAU,
        rot in -10.0..10.0f64,
    ) {
        let s = SectorSpec::new(start, theta).unwrap();
        let turned = SectorSpec::new(start + rot, theta).unwrap();
        let w = Complex64::from_polar(1.0, rot);
        let moved: Vec<Complex64> = pts.iter().map(|z| z * w).collect();
        let slack = pts.iter().filter(|z| near_edge(**z, &s)).count();
        let a = sector_count(&pts, &s) as i64;
        let b = sector_count(&moved, &turned) as i64;
        prop_assert!((a - b).unsigned_abs() as usize <= slack);
    }

    #[test]
    fn mean_statistics_hold(ens in generated_ensemble(), r in 1.01..3.0f64, start in 0.0..TAU, theta in 0.0..TAU) {
        prop_assert!(radial_mean_stat(&ens, &AnnulusSpec::new(r).unwrap()).holds);
        prop_assert!(angular_mean_stat(&ens, &SectorSpec::new(start, theta).unwrap()).holds);
    }

    #[test]
    fn cell_estimate_holds_on_the_circle(
        angles in prop::collection::vec(0.0..TAU, 1..80),
        r in 1.05..3.0f64,
        t0 in -1.0..1.0f64,
        width in 0.001..0.5f64,
    ) {
        let pts: Vec<Complex64> = angles.iter().map(|a| Complex64::from_polar(1.0, *a)).collect();
        for f in test_function_library(r) {
            let rep = cell_estimate_check(&f, &pts, r, t0, t0 + width).unwrap();
            prop_assert!(rep.holds, "{} {:?}", f.label, rep);
        }
    }

    #[test]
    fn cell_estimate_with_radial_spread_holds_anywhere(
        pts in point_set(80),
        r in 1.05..3.0f64,
        t0 in -1.0..1.0f64,
        width in 0.001..0.5f64,
    ) {
        for f in test_function_library(r) {
            let rep = cell_estimate_check(&f, &pts, r, t0, t0 + width).unwrap();
            let wide = rep.param("bound_with_radial_spread").unwrap().as_f64().unwrap();
            prop_assert!(rep.statistic <= wide, "{} {:?}", f.label, rep);
        }
    }

    #[test]
    fn trig_polynomials_integrate_exactly(
        coeffs in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..15),
        c0 in -5.0..5.0f64,
    ) {
        let cs = coeffs.clone();
        let f = TestFunction::new("trig", 2.0, 0.0, 0.0, move |z| {
            let mut v = c0;
            for (k, (a, b)) in cs.iter().enumerate() {
                let w = z.powu(k as u32 + 1);
                v += a * w.re + b * w.im;
            }
            Complex64::new(v, 0.0)
        });
        let got = circle_integral(&f, 16).unwrap();
        prop_assert!((got.re - c0).abs() < 1e-12 && got.im.abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mean_deviation_holds_for_library(ens in generated_ensemble(), r in prop::sample::select(vec![1.1, 1.5, 2.0]), n in 2usize..=8) {
        for f in test_function_library(r) {
            let rep = mean_deviation_check(&ens, &f, r, n, 4096).unwrap();
            prop_assert!(rep.holds, "{} {} {:?}", ens.label(), f.label, rep);
        }
    }

    #[test]
    fn decomposition_bounds_the_deviation(ens in generated_ensemble(), r in prop::sample::select(vec![1.1, 1.5]), n in 2usize..=8) {
        let annulus = AnnulusSpec::new(r).unwrap();
        let part = choose_offset(&ens, n).unwrap();
        for f in test_function_library(r) {
            for row in mean_deviation_decomposition(&ens, &f, &annulus, &part, 4096).unwrap() {
                prop_assert!(row.consistent(), "{} {:?}", f.label, row);
            }
        }
    }

    #[test]
    fn selection_keeps_enough(ens in generated_ensemble(), r in 1.05..2.0f64, n in 2usize..=6, eps in 0.05..0.95f64) {
        let s = select_embeddings(&ens, r, n, eps, 1).unwrap();
        prop_assert!(s.selected.len() as f64 >= (1.0 - eps) * ens.len() as f64 - 1e-12);
        prop_assert!(s.report.holds);
    }
}

#[test]
fn erdos_turan_on_ten_thousand_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checks = 0;
    while checks < 10_240 {
        let d = rng.gen_range(1..=60);
        let mut c: Vec<i64> = (0..=d).map(|_| rng.gen_range(-20..=20)).collect();
        for i in [0, d] {
            if c[i] == 0 {
                c[i] = 1;
            }
        }
        let p = IntPolynomial::from_i64(&c);
        let roots = rootfind::int_roots_with_multiplicity(&p, &RootOptions::default()).unwrap();
        let q = ComplexPolynomial::from_int(&p).unwrap();
        for _ in 0..16 {
            let s = SectorSpec::new(rng.gen_range(0.0..TAU), rng.gen_range(0.0..=TAU)).unwrap();
            let rep = erdos_turan_check(&q, &s, Some(&roots)).unwrap();
            assert!(rep.holds, "{p} {rep:?}");
            checks += 1;
        }
    }
}

#[test]
fn tally_matches_count() {
    let e = kummer_ensemble(13, 4).unwrap();
    let s = SectorSpec::new(0.7, 2.0).unwrap();
    for (set, radii) in e.conjugate_sets().iter().zip(e.radii()) {
        assert_eq!(sector_tally(set, radii, &s).count, sector_count(set, &s));
    }
}
