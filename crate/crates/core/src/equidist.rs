//! Test-function integrals against the empirical measures of an ensemble and
//! the uniform measure on the unit circle, the sector partition `Δ_j(x)`,
//! per-cell estimates, the mean equidistribution bound and embedding
//! selection.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discrepancy::{annulus_outside_count, AnnulusSpec, DiscrepancyReport, SectorSpec};
use crate::ensembles::OrbitEnsemble;
use crate::{par, Error, Result};

/// Fixed irrational offset of the periodic quadrature nodes.
const NODE_OFFSET: f64 = 0.618_033_988_749_894_9;

/// Absolute allowance for floating-point error in quadrature-based checks,
/// scaled by the size of the declared constants.
pub const NUMERIC_SLACK: f64 = 1e-12;

pub const DEFAULT_NODES: usize = 4096;

type Evaluator = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// A function on `C*` with declared Lipschitz constant and sup norm on the
/// annulus `A_r`. Outside `A_r` it may be anything.
#[derive(Clone)]
pub struct TestFunction {
    eval: Evaluator,
    pub lip_r: f64,
    pub sup_r: f64,
    pub r: f64,
    pub label: String,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("label", &self.label)
            .field("r", &self.r)
            .field("lip_r", &self.lip_r)
            .field("sup_r", &self.sup_r)
            .finish()
    }
}

impl TestFunction {
    pub fn new<F>(label: impl Into<String>, r: f64, lip_r: f64, sup_r: f64, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        TestFunction {
            eval: Arc::new(f),
            lip_r,
            sup_r,
            r,
            label: label.into(),
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    pub fn constant(c: Complex64, r: f64) -> Self {
        Self::new(format!("const({c})"), r, 0.0, c.norm(), move |_| c)
    }

    pub fn re_power(k: u32, r: f64) -> Self {
        let (lip, sup) = power_constants(k, r);
        Self::new(format!("Re z^{k}"), r, lip, sup, move |z| {
            Complex64::new(z.powu(k).re, 0.0)
        })
    }

    pub fn im_power(k: u32, r: f64) -> Self {
        let (lip, sup) = power_constants(k, r);
        Self::new(format!("Im z^{k}"), r, lip, sup, move |z| {
            Complex64::new(z.powu(k).im, 0.0)
        })
    }

    /// `log|z|`: Lipschitz constant `r` and sup `log r` on `A_r`.
    pub fn log_abs(r: f64) -> Self {
        Self::new("log|z|", r, r, r.ln(), |z| {
            Complex64::new(z.norm().ln(), 0.0)
        })
    }

    /// Distance to the unit circle, `||z| - 1|`.
    pub fn circle_distance(r: f64) -> Self {
        Self::new("dist(z, S^1)", r, 1.0, r - 1.0, |z| {
            Complex64::new((z.norm() - 1.0).abs(), 0.0)
        })
    }

    /// Zero on `A_r` and `1/|z|` outside: unbounded near the origin and
    /// discontinuous across both boundary circles.
    pub fn outside_only(r: f64) -> Self {
        Self::new("outside 1/|z|", r, 0.0, 0.0, move |z| {
            let a = z.norm();
            if a >= 1.0 / r && a <= r {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0 / a, 0.0)
            }
        })
    }

    /// Samples `A_r` and confirms the declared constants bound the observed
    /// values and difference quotients.
    pub fn spot_check(&self, samples: usize, seed: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = self.r;
        let sample = |rng: &mut ChaCha8Rng| {
            let rho = (rng.gen_range(-1.0..=1.0) * r.ln()).exp();
            Complex64::from_polar(rho, rng.gen_range(0.0..TAU))
        };
        let tol = |v: f64| v * (1.0 + 1e-9) + 1e-12;
        for _ in 0..samples {
            let x = sample(&mut rng);
            let y = if rng.gen::<bool>() {
                sample(&mut rng)
            } else {
                // Nearby partner, clamped back into the annulus.
                let d = Complex64::new(rng.gen_range(-1e-3..1e-3), rng.gen_range(-1e-3..1e-3));
                let w = x + d;
                let a = w.norm().clamp(1.0 / r, r);
                Complex64::from_polar(a, w.arg())
            };
            let fx = self.eval(x);
            if fx.norm() > tol(self.sup_r) {
                return false;
            }
            if (fx - self.eval(y)).norm() > tol(self.lip_r * (x - y).norm()) {
                return false;
            }
        }
        true
    }
}

fn power_constants(k: u32, r: f64) -> (f64, f64) {
    (k as f64 * r.powi(k as i32 - 1), r.powi(k as i32))
}

/// Re/Im z^k for k = 1..8, log|z|, distance to the circle and the
/// outside-only function, all with constants declared for `A_r`.
pub fn test_function_library(r: f64) -> Vec<TestFunction> {
    let mut out = Vec::new();
    for k in 1..=8 {
        out.push(TestFunction::re_power(k, r));
        out.push(TestFunction::im_power(k, r));
    }
    out.push(TestFunction::log_abs(r));
    out.push(TestFunction::circle_distance(r));
    out.push(TestFunction::outside_only(r));
    out
}

/// `∫_0^1 f(e^{2πit}) dt` by the periodic trapezoid rule at `nodes` shifted
/// nodes.
pub fn circle_integral(f: &TestFunction, nodes: usize) -> Result<Complex64> {
    if nodes < 16 {
        return Err(Error::InvalidParameter(format!(
            "need at least 16 nodes, got {nodes}"
        )));
    }
    let vals = par::map_range(nodes, |j| {
        let t = (j as f64 + NODE_OFFSET) / nodes as f64;
        f.eval(Complex64::from_polar(1.0, TAU * t))
    });
    Ok(vals.into_iter().sum::<Complex64>() / nodes as f64)
}

/// `∫_{t0}^{t1} f(e^{2πit}) dt` by composite Gauss–Legendre.
pub fn arc_integral(f: &TestFunction, t0: f64, t1: f64, panels: usize) -> Complex64 {
    let (xs, ws) = gauss_legendre_20();
    let panels = panels.max(1);
    let h = (t1 - t0) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let a = t0 + h * p as f64;
        let mid = a + h / 2.0;
        let mut s = Complex64::new(0.0, 0.0);
        for (x, w) in xs.iter().zip(ws.iter()) {
            let t = mid + h / 2.0 * x;
            s += f.eval(Complex64::from_polar(1.0, TAU * t)) * *w;
        }
        acc += s * (h / 2.0);
    }
    acc
}

/// 20-point Gauss–Legendre nodes and weights on [-1, 1].
fn gauss_legendre_20() -> ([f64; 20], [f64; 20]) {
    const N: usize = 20;
    let mut xs = [0.0; N];
    let mut ws = [0.0; N];
    for i in 0..N {
        let mut x = (PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=N {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = x;
        ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

/// `∫ f dμ_T`, the mean of `f` over `points`.
pub fn measure_integral(f: &TestFunction, points: &[Complex64]) -> Result<Complex64> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("empty point set".into()));
    }
    Ok(points.iter().map(|z| f.eval(*z)).sum::<Complex64>() / points.len() as f64)
}

/// The partition of the plane into `n` sectors `Δ_j(x)` of angle `2π/n`
/// starting at `offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionSpec {
    n: usize,
    offset: f64,
}

impl PartitionSpec {
    pub fn new(n: usize, offset: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "partition needs N >= 2, got {n}"
            )));
        }
        if !offset.is_finite() {
            return Err(Error::InvalidParameter("offset must be finite".into()));
        }
        Ok(PartitionSpec { n, offset })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn cell_width(&self) -> f64 {
        TAU / self.n as f64
    }

    /// The half-open sector `Δ_j`.
    pub fn cell(&self, j: usize) -> SectorSpec {
        SectorSpec::new(
            self.offset + self.cell_width() * j as f64,
            self.cell_width(),
        )
        .expect("cell width is within [0, 2π]")
    }

    /// Index of the unique cell containing `z`.
    pub fn cell_index(&self, z: Complex64) -> usize {
        let rel = (z.arg() - self.offset).rem_euclid(TAU);
        ((rel / self.cell_width()) as usize).min(self.n - 1)
    }

    /// Points per cell; sums to `points.len()` by construction.
    pub fn cell_counts(&self, points: &[Complex64]) -> Vec<usize> {
        let mut counts = vec![0; self.n];
        for z in points {
            counts[self.cell_index(*z)] += 1;
        }
        counts
    }

    /// Angular distance from `z` to the nearest cut.
    pub fn distance_to_cut(&self, z: Complex64) -> f64 {
        let w = self.cell_width();
        let rel = (z.arg() - self.offset).rem_euclid(w);
        rel.min(w - rel)
    }
}

/// Default number of cells, `max(2, floor(h_S^{-1/4}))`.
pub fn default_partition_count(h_s: f64) -> usize {
    let n = h_s.powf(-0.25).floor();
    if n.is_finite() && n >= 2.0 {
        n as usize
    } else {
        2
    }
}

/// Picks the cut offset at the middle of the widest gap between point
/// arguments reduced mod `2π/N`, so no cut passes within 1e-9 of a point.
pub fn choose_offset(ens: &OrbitEnsemble, n: usize) -> Result<PartitionSpec> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "partition needs N >= 2, got {n}"
        )));
    }
    let cell = TAU / n as f64;
    let mut args: Vec<f64> = ens
        .all_points()
        .map(|z| {
            let a = z.arg().rem_euclid(cell);
            if a >= cell {
                0.0
            } else {
                a
            }
        })
        .collect();
    args.sort_by(|a, b| a.total_cmp(b));
    let (mut best_gap, mut best_mid) = (0.0, 0.0);
    for w in args.windows(2) {
        let g = w[1] - w[0];
        if g > best_gap {
            best_gap = g;
            best_mid = w[0] + g / 2.0;
        }
    }
    let first = args[0];
    let last = args[args.len() - 1];
    let wrap = first + cell - last;
    if wrap > best_gap {
        best_gap = wrap;
        best_mid = (last + wrap / 2.0).rem_euclid(cell);
    }
    if best_gap < 2e-9 {
        return Err(Error::NoGap(n));
    }
    PartitionSpec::new(n, best_mid)
}

/// Per-window estimate: `|mean_{T∩V} f - ∫_{t0}^{t1} f|` against
/// `2rπθ² Lip + sup · | |T∩V|/|T| - θ |`, for the real part of `f` and the
/// closed window `V = {ρ e^{2πit}: ρ ∈ [1/r, r], t ∈ [t0, t1]}`.
///
/// The verdict uses that bound. It is guaranteed when the points lie on the
/// unit circle; points at different moduli inside `V` can exceed it by up to
/// `Lip θ (r - 1/r)`, and the sum of both is reported as
/// `bound_with_radial_spread`.
pub fn cell_estimate_check(
    f: &TestFunction,
    points: &[Complex64],
    r: f64,
    t0: f64,
    t1: f64,
) -> Result<DiscrepancyReport> {
    let theta = t1 - t0;
    if !(theta > 0.0 && theta <= 0.5) {
        return Err(Error::BadWindow(theta));
    }
    let annulus = AnnulusSpec::new(r)?;
    if points.is_empty() {
        return Err(Error::InvalidParameter("empty point set".into()));
    }
    let in_window = |z: &Complex64| {
        let t = z.arg() / TAU;
        let rel = (t - t0).rem_euclid(1.0);
        annulus.contains(*z) && rel <= theta
    };
    let mut inside = 0usize;
    let mut sum = 0.0;
    for z in points.iter().filter(|z| in_window(z)) {
        inside += 1;
        sum += f.eval(*z).re;
    }
    let card = points.len() as f64;
    let integral = arc_integral(f, t0, t1, 64).re;
    let statistic = (sum / card - integral).abs();
    let fraction_gap = (inside as f64 / card - theta).abs();
    let theoretical = 2.0 * r * PI * theta * theta * f.lip_r + f.sup_r * fraction_gap;
    let slack = NUMERIC_SLACK * (1.0 + f.sup_r + f.lip_r);
    let radial = f.lip_r * theta * (r - 1.0 / r);
    Ok(DiscrepancyReport::new(statistic, theoretical + slack)
        .with_param("check", "cell_estimate")
        .with_param("function", f.label.clone())
        .with_param("r", r)
        .with_param("t0", t0)
        .with_param("t1", t1)
        .with_param("points_in_window", inside)
        .with_param("bound_theoretical", theoretical)
        .with_param("numerical_slack", slack)
        .with_param("radial_spread_term", radial)
        .with_param("bound_with_radial_spread", theoretical + radial + slack))
}

/// Largest `|f|` over ensemble points outside `A_r` (0 if there are none).
pub fn outside_sup(f: &TestFunction, ens: &OrbitEnsemble, annulus: &AnnulusSpec) -> f64 {
    ens.all_points()
        .filter(|z| !annulus.contains(**z))
        .map(|z| f.eval(*z).norm())
        .fold(0.0, f64::max)
}

/// Weighted mean of `|∫ f dμ_{σ(S)} - ∫ f dλ|` against
/// `4rπ Lip/N + (‖f‖_{∞,S,r} + 2‖f‖_{∞,r}) 2m(S)/log r + 2N ‖f‖_{∞,r} h(S)`.
pub fn mean_deviation_check(
    ens: &OrbitEnsemble,
    f: &TestFunction,
    r: f64,
    n: usize,
    nodes: usize,
) -> Result<DiscrepancyReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("N must be >= 2, got {n}")));
    }
    let annulus = AnnulusSpec::new(r)?;
    let circle = circle_integral(f, nodes)?;
    let devs = par::map(ens.conjugate_sets(), |set| {
        measure_integral(f, set).map(|m| (m - circle).norm())
    });
    let mut statistic = 0.0;
    for (d, w) in devs.into_iter().zip(ens.weights()) {
        statistic += w * d?;
    }
    let f_outside = outside_sup(f, ens, &annulus);
    let nf = n as f64;
    let first = 4.0 * r * PI * f.lip_r / nf;
    let second = (f_outside + 2.0 * f.sup_r) * 2.0 * ens.m_s() / r.ln();
    let third = 2.0 * nf * f.sup_r * ens.h_s();
    let theoretical = first + second + third;
    let slack = NUMERIC_SLACK * (1.0 + f.sup_r + f_outside + f.lip_r);
    Ok(DiscrepancyReport::new(statistic, theoretical + slack)
        .with_param("check", "mean_deviation")
        .with_param("function", f.label.clone())
        .with_param("label", ens.label())
        .with_param("r", r)
        .with_param("N", n)
        .with_param("nodes", nodes)
        .with_param("lip_r", f.lip_r)
        .with_param("sup_r", f.sup_r)
        .with_param("sup_outside", f_outside)
        .with_param("m_S", ens.m_s())
        .with_param("h_S", ens.h_s())
        .with_param("term_lipschitz", first)
        .with_param("term_radial", second)
        .with_param("term_angular", third)
        .with_param("bound_theoretical", theoretical)
        .with_param("numerical_slack", slack))
}

/// Per-set split of the deviation into the part carried by points outside
/// `A_r` and the per-cell window estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub set_id: u64,
    /// `|∫ f dμ_{σ(S)} - ∫ f dλ|`
    pub deviation: f64,
    /// `|σ(S) \ A_r| / |S| · ‖f‖_{∞,S,r}`
    pub outside_term: f64,
    /// `Σ_j |(1/|S|) Σ_{Δ_j ∩ A_r} f - ∫_{Δ_j} f dλ|`
    pub cell_terms: f64,
}

impl Decomposition {
    pub fn consistent(&self) -> bool {
        self.deviation
            <= self.outside_term + self.cell_terms + NUMERIC_SLACK * (1.0 + self.deviation)
    }
}

pub fn mean_deviation_decomposition(
    ens: &OrbitEnsemble,
    f: &TestFunction,
    annulus: &AnnulusSpec,
    partition: &PartitionSpec,
    nodes: usize,
) -> Result<Vec<Decomposition>> {
    let circle = circle_integral(f, nodes)?;
    let f_outside = outside_sup(f, ens, annulus);
    let n = partition.n();
    let cell_integrals: Vec<Complex64> = (0..n)
        .map(|j| {
            let t0 = (partition.offset() + partition.cell_width() * j as f64) / TAU;
            arc_integral(f, t0, t0 + 1.0 / n as f64, 8)
        })
        .collect();
    let rows = par::map_range(ens.len(), |k| {
        let set = &ens.conjugate_sets()[k];
        let card = set.len() as f64;
        let mean = set.iter().map(|z| f.eval(*z)).sum::<Complex64>() / card;
        let outside = annulus_outside_count(set, annulus) as f64;
        let mut sums = vec![Complex64::new(0.0, 0.0); n];
        for z in set.iter().filter(|z| annulus.contains(**z)) {
            sums[partition.cell_index(*z)] += f.eval(*z);
        }
        let cell_terms = sums
            .iter()
            .zip(&cell_integrals)
            .map(|(s, i)| (s / card - i).norm())
            .sum();
        Decomposition {
            set_id: ens.set_ids()[k],
            deviation: (mean - circle).norm(),
            outside_term: outside / card * f_outside,
            cell_terms,
        }
    });
    Ok(rows)
}

/// One row of the per-cell CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub set_id: u64,
    pub cell: usize,
    pub count: usize,
    pub expected: f64,
    pub deviation: f64,
}

pub fn cell_breakdown(ens: &OrbitEnsemble, partition: &PartitionSpec) -> Vec<CellRow> {
    let expected = ens.card_s() as f64 / partition.n() as f64;
    let mut rows = Vec::new();
    for (k, set) in ens.conjugate_sets().iter().enumerate() {
        for (j, c) in partition.cell_counts(set).into_iter().enumerate() {
            rows.push(CellRow {
                set_id: ens.set_ids()[k],
                cell: j,
                count: c,
                expected,
                deviation: c as f64 - expected,
            });
        }
    }
    rows
}

/// Outcome of [`select_embeddings`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Indices into the ensemble's set list.
    pub selected: Vec<usize>,
    /// Set ids failing the radial threshold.
    pub failing_radial: Vec<u64>,
    /// Set ids failing the angular threshold in some cell.
    pub failing_angular: Vec<u64>,
    /// Set ids with at least one point outside `A_r`.
    pub outside_annulus: Vec<u64>,
    pub radial_threshold: f64,
    pub angular_threshold: f64,
    pub partition: PartitionSpec,
    pub report: DiscrepancyReport,
}

/// Keeps the sets with `|σ(S) \ A_r| <= 4 d |S| m(S) / (ε log r)` and
/// `| |σ(S) ∩ Δ_j| - |S|/N | <= 2 N d |S| h(S) / ε` for every cell, where `d`
/// is the degree of the base field. The report holds when the kept fraction
/// is at least `1 - ε`.
pub fn select_embeddings(
    ens: &OrbitEnsemble,
    r: f64,
    n: usize,
    eps: f64,
    deg_k: usize,
) -> Result<Selection> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be in (0,1), got {eps}"
        )));
    }
    if deg_k == 0 {
        return Err(Error::InvalidParameter("degK must be positive".into()));
    }
    let annulus = AnnulusSpec::new(r)?;
    let partition = choose_offset(ens, n)?;
    select_with_partition(ens, &annulus, &partition, eps, deg_k)
}

pub fn select_with_partition(
    ens: &OrbitEnsemble,
    annulus: &AnnulusSpec,
    partition: &PartitionSpec,
    eps: f64,
    deg_k: usize,
) -> Result<Selection> {
    let card = ens.card_s() as f64;
    let d = deg_k as f64;
    let nf = partition.n() as f64;
    let radial_threshold = 4.0 * d * card * ens.m_s() / (eps * annulus.r().ln());
    let angular_threshold = 2.0 * nf * d * card * ens.h_s() / eps;
    let expected = card / nf;
    let verdicts = par::map(ens.conjugate_sets(), |set| {
        let outside = annulus_outside_count(set, annulus);
        let worst = partition
            .cell_counts(set)
            .into_iter()
            .map(|c| (c as f64 - expected).abs())
            .fold(0.0, f64::max);
        (
            outside,
            outside as f64 <= radial_threshold,
            worst <= angular_threshold,
        )
    });
    let mut sel = Selection {
        selected: Vec::new(),
        failing_radial: Vec::new(),
        failing_angular: Vec::new(),
        outside_annulus: Vec::new(),
        radial_threshold,
        angular_threshold,
        partition: *partition,
        report: DiscrepancyReport::new(0.0, eps),
    };
    for (k, (outside, radial_ok, angular_ok)) in verdicts.into_iter().enumerate() {
        let id = ens.set_ids()[k];
        if outside > 0 {
            sel.outside_annulus.push(id);
        }
        if !radial_ok {
            sel.failing_radial.push(id);
        }
        if !angular_ok {
            sel.failing_angular.push(id);
        }
        if radial_ok && angular_ok {
            sel.selected.push(k);
        }
    }
    let total = ens.len() as f64;
    let fraction = sel.selected.len() as f64 / total;
    sel.report = DiscrepancyReport::new(1.0 - fraction, eps)
        .with_param("check", "select_embeddings")
        .with_param("label", ens.label())
        .with_param("r", annulus.r())
        .with_param("N", partition.n())
        .with_param("offset_x", partition.offset())
        .with_param("eps", eps)
        .with_param("degK", deg_k)
        .with_param("selected", sel.selected.len())
        .with_param("sets", ens.len())
        .with_param("selected_fraction", fraction)
        .with_param("radial_threshold", radial_threshold)
        .with_param("angular_threshold", angular_threshold)
        .with_param("failing_radial", sel.failing_radial.clone())
        .with_param("failing_angular", sel.failing_angular.clone())
        .with_param("outside_annulus", sel.outside_annulus.clone());
    Ok(sel)
}
