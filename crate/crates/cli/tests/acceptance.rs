//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line to
//! stderr, bypassing the test harness capture, and then asserts.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::process::Command;
use std::time::Instant;

use equidist_core::auxpoly::short_multiple;
use equidist_core::discrepancy::{
    angular_mean_stat, erdos_turan_check, et_fuzz, radial_mean_stat, sector_count, AnnulusSpec,
    EtFuzzConfig, SectorSpec,
};
use equidist_core::ensembles::{
    self, galois_stable_ensemble, kummer_ensemble, HeightMode, OrbitEnsemble,
};
use equidist_core::equidist::{
    choose_offset, default_partition_count, mean_deviation_check, select_embeddings,
    test_function_library,
};
use equidist_core::heights::{mahler_jensen, mahler_measure, HeightSummary};
use equidist_core::rootfind::{self, ComplexPolynomial, RootOptions};
use equidist_core::zpoly::{self, IntPolynomial};
use equidist_core::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(id: u32, ok: bool, detail: impl AsRef<str>) {
    let status = if ok { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "criterion {id}: {status} ({})", detail.as_ref());
}

fn x_pow_minus(n: usize, c: i64) -> IntPolynomial {
    let mut v = vec![0; n + 1];
    v[0] = -c;
    v[n] = 1;
    IntPolynomial::from_i64(&v)
}

#[test]
fn criterion_1_erdos_turan_suite() {
    let t = Instant::now();
    let summary = et_fuzz(&EtFuzzConfig::default()).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let fuzz_ok = summary.violations == 0 && summary.checks == 16_000 && secs < 60.0;

    let mut cyclo_ok = true;
    let mut worst_stat: f64 = 0.0;
    for d in 4..=512usize {
        let p = IntPolynomial::x_pow_minus_one(d);
        let roots = rootfind::int_roots_with_multiplicity(&p, &RootOptions::default()).unwrap();
        let q = ComplexPolynomial::from_int(&p).unwrap();
        let expect = 256.0 * d as f64 * 2f64.ln();
        for k in 0..16 {
            let s = SectorSpec::new(TAU * k as f64 / 16.0, PI / 2.0).unwrap();
            let rep = erdos_turan_check(&q, &s, Some(&roots)).unwrap();
            worst_stat = worst_stat.max(rep.statistic);
            if rep.statistic > 1.0 || (rep.bound - expect).abs() > 1e-9 * expect || !rep.holds {
                cyclo_ok = false;
            }
        }
    }
    let ok = fuzz_ok && cyclo_ok;
    verdict(
        1,
        ok,
        format!(
            "{} checks, {} violations, worst ratio {:.3e}, {secs:.1}s; x^D-1 worst statistic {worst_stat:.3}",
            summary.checks, summary.violations, summary.worst_ratio
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_2_mahler_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let (mut compared, mut skipped, mut worst) = (0usize, 0usize, 0.0f64);
    while compared + skipped < 200 {
        let d = rng.gen_range(1..=50);
        let mut c: Vec<i64> = (0..=d).map(|_| rng.gen_range(-30..=30)).collect();
        for i in [0, d] {
            while c[i] == 0 {
                c[i] = rng.gen_range(-30..=30);
            }
        }
        let (_, p) = zpoly::content_primitive(&IntPolynomial::from_i64(&c)).unwrap();
        let roots = rootfind::int_roots_with_multiplicity(&p, &RootOptions::default()).unwrap();
        if roots.points.iter().any(|z| (z.norm() - 1.0).abs() <= 1e-3) {
            skipped += 1;
            continue;
        }
        let m = mahler_measure(&p).unwrap();
        let j = mahler_jensen(&p, 1 << 14).unwrap();
        worst = worst.max((m - j).abs() / m);
        compared += 1;
    }
    let random_ok = worst <= 1e-6;

    let golden = IntPolynomial::from_i64(&[-1, -1, 1]);
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let g_roots = mahler_measure(&golden).unwrap();
    let g_jensen = mahler_jensen(&golden, 4096).unwrap();
    let golden_ok = (g_roots - 1.618_033_988_7).abs() <= 1e-9
        && (g_jensen - 1.618_033_988_7).abs() <= 1e-9
        && (g_roots - phi).abs() < 1e-12;

    let lehmer = IntPolynomial::from_i64(&[1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1]);
    let l_roots = mahler_measure(&lehmer).unwrap();
    // Eight roots on the circle make the quadrature error O(1/nodes).
    let l_jensen = mahler_jensen(&lehmer, 1 << 26).unwrap();
    let lehmer_ok =
        (l_roots - 1.176_280_82).abs() <= 1e-7 && (l_jensen - 1.176_280_82).abs() <= 1e-7;

    let ok = random_ok && golden_ok && lehmer_ok;
    verdict(
        2,
        ok,
        format!(
            "{compared} compared, {skipped} skipped, worst rel {worst:.2e}; golden {g_roots:.12}/{g_jensen:.12}; Lehmer {l_roots:.10}/{l_jensen:.10}"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_3_radial_bound() {
    let mut failures = Vec::new();
    for n in 4..=512usize {
        let ens = galois_stable_ensemble(&x_pow_minus(n, 2)).unwrap();
        let modulus = 2f64.powf(1.0 / n as f64);
        for r in [1.05, 1.1, 1.5, 2.0] {
            let rep = radial_mean_stat(&ens, &AnnulusSpec::new(r).unwrap());
            let expect_stat = if modulus > r { n as f64 } else { 0.0 };
            let expect_bound = 2.0 * 2f64.ln() / f64::ln(r);
            let ok = rep.holds
                && rep.statistic == expect_stat
                && (rep.bound - expect_bound).abs() <= 1e-10 * expect_bound;
            if !ok {
                failures.push((n, r, rep.statistic, rep.bound));
            }
        }
    }
    let ok = failures.is_empty();
    verdict(
        3,
        ok,
        format!(
            "509 x 4 cases, {} mismatches {:?}",
            failures.len(),
            failures.first()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_4_angular_bound() {
    let bundled = ensembles::bundled().unwrap();
    let mut checks = 0usize;
    let mut failing = Vec::new();
    for ens in &bundled {
        for theta in [PI / 3.0, PI / 2.0, PI, TAU] {
            for k in 0..16 {
                let s = SectorSpec::new(TAU * k as f64 / 16.0, theta).unwrap();
                checks += 1;
                if !angular_mean_stat(ens, &s).holds {
                    failing.push(ens.label().to_string());
                }
            }
        }
    }

    // Brute-force sector counts for the trend.
    let sector = SectorSpec::new(0.0, PI / 3.0).unwrap();
    let mut per_point = Vec::new();
    for m in [101u64, 257, 1009] {
        let ens = kummer_ensemble(m, 8).unwrap();
        let expected = sector.theta() * ens.card_s() as f64 / TAU;
        let mut brute = 0.0;
        for (set, w) in ens.conjugate_sets().iter().zip(ens.weights()) {
            let count = set
                .iter()
                .filter(|z| (z.arg() - sector.start_angle()).rem_euclid(TAU) < sector.theta())
                .count();
            brute += w * (count as f64 - expected).abs();
        }
        let rep = angular_mean_stat(&ens, &sector);
        assert!((rep.statistic - brute).abs() < 1e-9, "m={m}");
        per_point.push(brute / ens.card_s() as f64);
    }
    let trend_ok = per_point.windows(2).all(|w| w[1] <= 1.1 * w[0]);
    let ok = failing.is_empty() && trend_ok;
    verdict(
        4,
        ok,
        format!(
            "{checks} sector checks on {} ensembles, {} failing; statistic/card_S for m=101,257,1009: {:.5} {:.5} {:.5}",
            bundled.len(),
            failing.len(),
            per_point[0],
            per_point[1],
            per_point[2]
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_5_mean_equidistribution() {
    let t = Instant::now();
    let bundled = ensembles::bundled().unwrap();
    let mut checks = 0usize;
    let mut failing = Vec::new();
    for ens in &bundled {
        for r in [1.1, 1.5] {
            let library = test_function_library(r);
            for n in [2, 4, default_partition_count(ens.h_s())] {
                for f in &library {
                    let rep = mean_deviation_check(ens, f, r, n, 4096).unwrap();
                    checks += 1;
                    if !rep.holds {
                        failing.push(format!("{} {} r={r} N={n}", ens.label(), f.label));
                    }
                }
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let ok = failing.is_empty() && secs < 120.0;
    verdict(
        5,
        ok,
        format!(
            "{checks} (ensemble, f, r, N) checks, {} failing, {secs:.1}s {:?}",
            failing.len(),
            failing.first()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_6_embedding_selection() {
    let (m, n, r, eps) = (257u64, 16usize, 1.2, 0.25);
    let ens = kummer_ensemble(m, n).unwrap();
    // Moduli from the closed form, independent of the ensemble's points.
    let expected: Vec<u64> = ensembles::units_mod(m)
        .into_iter()
        .filter(|&a| (2.0 * (PI * a as f64 / m as f64).sin()).powf(1.0 / n as f64) < 1.0 / r)
        .collect();
    let nc = default_partition_count(ens.h_s());
    let sel = select_embeddings(&ens, r, nc, eps, 1).unwrap();
    let fraction = sel.selected.len() as f64 / ens.len() as f64;
    let match_ok = sel.failing_radial == expected;
    let fraction_ok = fraction >= 0.75;
    let ok = match_ok && fraction_ok;
    verdict(
        6,
        ok,
        format!(
            "residues below 1/r {expected:?}, failing radial {:?}, radial threshold {:.2} vs card_S {}, selected fraction {fraction:.3}",
            sel.failing_radial,
            sel.radial_threshold,
            ens.card_s()
        ),
    );
    assert!(fraction_ok);
    assert!(match_ok);
}

#[test]
fn criterion_7_short_multiples() {
    let sm = short_multiple(&zpoly::cyclotomic(105), 106).unwrap();
    let cyclo_ok = sm.f == IntPolynomial::x_pow_minus_one(105) && sm.achieved_height == 0.0;

    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let mut cases = 0;
    let mut bad = Vec::new();
    while cases < 50 {
        let d = rng.gen_range(1..=8);
        let mut c: Vec<i64> = (0..=d).map(|_| rng.gen_range(-9..=9)).collect();
        for i in [0, d] {
            while c[i] == 0 {
                c[i] = rng.gen_range(-9..=9);
            }
        }
        let p = IntPolynomial::from_i64(&c);
        let (content, _) = zpoly::content_primitive(&p).unwrap();
        if !content.is_one() || !zpoly::is_squarefree(&p) {
            continue;
        }
        let l = d + rng.gen_range(1..=12);
        let f = short_multiple(&p, l).unwrap().f;
        let fd = f.leading().cloned().unwrap_or_default();
        if zpoly::poly_divexact(&f, &p).is_err() || f.coeff(0).is_zero() || fd.is_zero() {
            bad.push(p.to_string());
        }
        cases += 1;
    }
    let ok = cyclo_ok && bad.is_empty();
    verdict(
        7,
        ok,
        format!(
            "Phi_105 -> {}, height {}; {cases} random cases, {} bad",
            sm.f,
            sm.achieved_height,
            bad.len()
        ),
    );
    assert!(ok);
}

fn random_ensemble(rng: &mut ChaCha8Rng) -> OrbitEnsemble {
    let sets = rng.gen_range(1..=8);
    let card = rng.gen_range(1..=60);
    // Some ensembles put every point on a lattice of angles to force
    // coinciding arguments.
    let lattice = rng.gen_bool(0.3).then(|| rng.gen_range(1..=64));
    let points: Vec<Vec<Complex64>> = (0..sets)
        .map(|_| {
            (0..card)
                .map(|_| {
                    let a = match lattice {
                        Some(q) => TAU * rng.gen_range(0..q) as f64 / q as f64,
                        None => rng.gen_range(0.0..TAU),
                    };
                    Complex64::from_polar(rng.gen_range(-1.0..1.0f64).exp(), a)
                })
                .collect()
        })
        .collect();
    OrbitEnsemble::new(
        "random",
        points,
        Vec::new(),
        vec![1.0 / sets as f64; sets],
        HeightSummary::from_mean(card, 0.1, 0.1 * card as f64),
        HeightMode::Exact,
    )
    .unwrap()
}

#[test]
fn criterion_8_partition_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(80);
    let (mut cases, mut bad_sum, mut bad_gap) = (0usize, 0usize, 0usize);
    for _ in 0..100 {
        let ens = random_ensemble(&mut rng);
        for n in 2..=64usize {
            let part = choose_offset(&ens, n).unwrap();
            for set in ens.conjugate_sets() {
                let total: usize = (0..n).map(|j| sector_count(set, &part.cell(j))).sum();
                if total != set.len() {
                    bad_sum += 1;
                }
                // Distance from each argument to the nearest cut, computed
                // directly from the cut positions.
                for z in set {
                    let w = TAU / n as f64;
                    let rel = (z.arg() - part.offset()).rem_euclid(TAU);
                    let k = (rel / w).round();
                    if (rel - k * w).abs() < 1e-9 {
                        bad_gap += 1;
                    }
                }
            }
            cases += 1;
        }
    }
    let ok = bad_sum == 0 && bad_gap == 0;
    verdict(
        8,
        ok,
        format!(
            "{cases} (ensemble, N) cases, {bad_sum} count mismatches, {bad_gap} points near a cut"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_9_determinism() {
    let dir = std::env::temp_dir().join(format!("equidist-accept-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let run = |name: &str, threads: Option<&str>| {
        let out = dir.join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_equidist"));
        cmd.args([
            "analyze", "--poly", "x^64-2", "--r", "1.2", "--N", "auto", "--seed", "7", "--out",
        ])
        .arg(&out);
        if let Some(t) = threads {
            cmd.env("EQ_THREADS", t);
        }
        let status = cmd.status().unwrap();
        (status.code(), std::fs::read(&out).unwrap())
    };
    let (c1, a) = run("a.json", None);
    let (c2, b) = run("b.json", None);
    let (c3, c) = run("c.json", Some("1"));
    let ok = c1 == Some(0) && c2 == Some(0) && c3 == Some(0) && a == b && a == c && !a.is_empty();
    verdict(
        9,
        ok,
        format!(
            "{} bytes, exit codes {c1:?} {c2:?} {c3:?}, single-thread run identical: {}",
            a.len(),
            a == c
        ),
    );
    let _ = std::fs::remove_dir_all(&dir);
    assert!(ok);
}
