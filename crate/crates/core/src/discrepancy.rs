//! Annulus and sector counts and the three finite-level inequalities:
//! the radial mean bound, the angular mean bound, and Erdős–Turán.
//!
//! Sectors are closed at their start ray and open at their end ray, so the
//! cells of any partition of the circle count every point exactly once.
//! Points whose inclusion disk straddles a region boundary are still counted
//! by their centre, and the straddle is reported in `boundary_warnings`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ensembles::OrbitEnsemble;
use crate::rootfind::{self, ComplexPolynomial, RootOptions, RootSet};
use crate::zpoly::IntPolynomial;
use crate::{par, Error, Result};

/// Closed annulus `1/r <= |z| <= r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSpec {
    r: f64,
}

impl AnnulusSpec {
    pub fn new(r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "annulus needs r > 1, got {r}"
            )));
        }
        Ok(AnnulusSpec { r })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let a = z.norm();
        a >= 1.0 / self.r && a <= self.r
    }

    /// True when a disk of radius `rad` around `z` meets either boundary
    /// circle.
    pub fn straddles(&self, z: Complex64, rad: f64) -> bool {
        let a = z.norm();
        (a - self.r).abs() <= rad || (a - 1.0 / self.r).abs() <= rad
    }
}

/// Sector of opening `theta` starting at `start_angle`: arguments in
/// `[start, start + theta)` mod 2π. `theta = 2π` is the whole plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorSpec {
    start_angle: f64,
    theta: f64,
}

impl SectorSpec {
    pub fn new(start_angle: f64, theta: f64) -> Result<Self> {
        if !start_angle.is_finite() || !(0.0..=TAU).contains(&theta) {
            return Err(Error::InvalidParameter(format!(
                "sector needs finite start and theta in [0, 2π], got ({start_angle}, {theta})"
            )));
        }
        Ok(SectorSpec {
            start_angle: start_angle.rem_euclid(TAU),
            theta,
        })
    }

    pub fn start_angle(&self) -> f64 {
        self.start_angle
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn is_full(&self) -> bool {
        self.theta >= TAU
    }

    /// Angle of `z` measured from the start ray, in `[0, 2π]`.
    fn relative_angle(&self, z: Complex64) -> f64 {
        (z.arg() - self.start_angle).rem_euclid(TAU)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.is_full() || self.relative_angle(z) < self.theta
    }

    /// True when a disk of radius `rad` around `z` crosses the start or end
    /// ray.
    pub fn straddles(&self, z: Complex64, rad: f64) -> bool {
        if self.is_full() {
            return false;
        }
        let rel = self.relative_angle(z);
        let to_start = rel.min(TAU - rel);
        let d_end = (rel - self.theta).abs();
        let to_end = d_end.min(TAU - d_end);
        let norm = z.norm();
        let dist = |ang: f64| {
            if ang >= PI / 2.0 {
                norm
            } else {
                norm * ang.sin()
            }
        };
        dist(to_start) <= rad || dist(to_end) <= rad
    }
}

/// Outcome of one inequality check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub statistic: f64,
    pub bound: f64,
    pub margin: f64,
    pub holds: bool,
    pub boundary_warnings: usize,
    pub params: BTreeMap<String, Value>,
}

impl DiscrepancyReport {
    pub fn new(statistic: f64, bound: f64) -> Self {
        DiscrepancyReport {
            statistic,
            bound,
            margin: bound - statistic,
            holds: statistic <= bound,
            boundary_warnings: 0,
            params: BTreeMap::new(),
        }
    }

    pub fn with_warnings(mut self, n: usize) -> Self {
        self.boundary_warnings = n;
        self
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn param(&self, key: &str) -> Option<&Value> {
        self.params.get(key)
    }
}

/// A count together with the number of boundary straddles seen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub count: usize,
    pub boundary_warnings: usize,
}

pub fn sector_count(points: &[Complex64], sector: &SectorSpec) -> usize {
    points.iter().filter(|z| sector.contains(**z)).count()
}

pub fn sector_tally(points: &[Complex64], radii: &[f64], sector: &SectorSpec) -> Tally {
    let mut t = Tally::default();
    for (i, z) in points.iter().enumerate() {
        if sector.contains(*z) {
            t.count += 1;
        }
        if radii.get(i).is_some_and(|&r| sector.straddles(*z, r)) {
            t.boundary_warnings += 1;
        }
    }
    t
}

/// Points with `|z| < 1/r` or `|z| > r`.
pub fn annulus_outside_count(points: &[Complex64], annulus: &AnnulusSpec) -> usize {
    points.iter().filter(|z| !annulus.contains(**z)).count()
}

pub fn annulus_tally(points: &[Complex64], radii: &[f64], annulus: &AnnulusSpec) -> Tally {
    let mut t = Tally::default();
    for (i, z) in points.iter().enumerate() {
        if !annulus.contains(*z) {
            t.count += 1;
        }
        if radii.get(i).is_some_and(|&r| annulus.straddles(*z, r)) {
            t.boundary_warnings += 1;
        }
    }
    t
}

/// Weighted mean of `|σ(S) \ A_r|` against `2 |S| m(S) / log r`.
pub fn radial_mean_stat(ens: &OrbitEnsemble, annulus: &AnnulusSpec) -> DiscrepancyReport {
    let tallies = par::map_range(ens.len(), |k| {
        annulus_tally(&ens.conjugate_sets()[k], &ens.radii()[k], annulus)
    });
    let mut statistic = 0.0;
    let mut warnings = 0;
    for (t, w) in tallies.iter().zip(ens.weights()) {
        statistic += w * t.count as f64;
        warnings += t.boundary_warnings;
    }
    let card = ens.card_s() as f64;
    let bound = 2.0 * card * ens.m_s() / annulus.r().ln();
    DiscrepancyReport::new(statistic, bound)
        .with_warnings(warnings)
        .with_param("check", "radial_mean")
        .with_param("r", annulus.r())
        .with_param("card_S", ens.card_s())
        .with_param("m_S", ens.m_s())
        .with_param("m_S_mode", format!("{:?}", ens.mode()).to_lowercase())
        .with_param("label", ens.label())
}

/// Weighted mean of `| |σ(S) ∩ Δ| - θ|S|/2π |` against `|S| h(S)`.
///
/// The bound exceeds `|S|` unless `|S|` is astronomically large, so the
/// report also carries `statistic_per_point`, the observable that shrinks as
/// the sets equidistribute.
pub fn angular_mean_stat(ens: &OrbitEnsemble, sector: &SectorSpec) -> DiscrepancyReport {
    let card = ens.card_s() as f64;
    let expected = sector.theta() * card / TAU;
    let tallies = par::map_range(ens.len(), |k| {
        sector_tally(&ens.conjugate_sets()[k], &ens.radii()[k], sector)
    });
    let mut statistic = 0.0;
    let mut warnings = 0;
    for (t, w) in tallies.iter().zip(ens.weights()) {
        statistic += w * (t.count as f64 - expected).abs();
        warnings += t.boundary_warnings;
    }
    if sector.is_full() {
        statistic = 0.0;
    }
    let bound = card * ens.h_s();
    DiscrepancyReport::new(statistic, bound)
        .with_warnings(warnings)
        .with_param("check", "angular_mean")
        .with_param("start_angle", sector.start_angle())
        .with_param("theta", sector.theta())
        .with_param("card_S", ens.card_s())
        .with_param("h_S", ens.h_s())
        .with_param("statistic_per_point", statistic / card)
        .with_param("label", ens.label())
}

/// Erdős–Turán: `(Z_Δ - θD/2π)^2 <= 256 D log(L(q) / sqrt|q_D q_0|)`.
///
/// Roots are counted with multiplicity; pass `precomputed` when they are
/// already known (for instance from
/// [`rootfind::int_roots_with_multiplicity`]).
pub fn erdos_turan_check(
    q: &ComplexPolynomial,
    sector: &SectorSpec,
    precomputed: Option<&RootSet>,
) -> Result<DiscrepancyReport> {
    let c = q.coeffs();
    let d = q.degree();
    if c[0] == Complex64::new(0.0, 0.0) || c[d] == Complex64::new(0.0, 0.0) {
        return Err(Error::VanishingEndCoefficient);
    }
    let owned;
    let roots = match precomputed {
        Some(r) => r,
        None => {
            owned = rootfind::roots_with(q, &RootOptions::default())?;
            &owned
        }
    };
    let t = sector_tally(&roots.points, &roots.radii, sector);
    let df = d as f64;
    let dev = if sector.is_full() {
        0.0
    } else {
        t.count as f64 - sector.theta() * df / TAU
    };
    let ratio = q.length() / (c[d].norm() * c[0].norm()).sqrt();
    let bound = 256.0 * df * ratio.ln();
    Ok(DiscrepancyReport::new(dev * dev, bound)
        .with_warnings(t.boundary_warnings)
        .with_param("check", "erdos_turan")
        .with_param("degree", d)
        .with_param("zeros_in_sector", t.count)
        .with_param("start_angle", sector.start_angle())
        .with_param("theta", sector.theta())
        .with_param("length_ratio", ratio))
}

/// Random polynomial with every coefficient in `{-1, +1}`.
pub fn littlewood<R: Rng>(degree: usize, rng: &mut R) -> IntPolynomial {
    let c: Vec<i64> = (0..=degree)
        .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
        .collect();
    IntPolynomial::from_i64(&c)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtFuzzConfig {
    pub count: usize,
    pub degree: usize,
    pub seed: u64,
    pub starts: usize,
    pub theta: f64,
    pub roots: RootOptions,
}

impl Default for EtFuzzConfig {
    fn default() -> Self {
        EtFuzzConfig {
            count: 1000,
            degree: 100,
            seed: 7,
            starts: 16,
            theta: PI / 2.0,
            roots: RootOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtFuzzSummary {
    pub polynomials: usize,
    pub checks: usize,
    pub violations: usize,
    /// Largest `statistic / bound` over all checks.
    pub worst_ratio: f64,
    pub boundary_warnings: usize,
    /// Indices of polynomials with at least one violated check.
    pub violating: Vec<usize>,
}

/// Erdős–Turán checks on seeded Littlewood polynomials. Polynomial `i` is
/// drawn from its own ChaCha stream, so results do not depend on the worker
/// count.
pub fn et_fuzz(cfg: &EtFuzzConfig) -> Result<EtFuzzSummary> {
    let sectors: Vec<SectorSpec> = (0..cfg.starts)
        .map(|k| SectorSpec::new(TAU * k as f64 / cfg.starts as f64, cfg.theta))
        .collect::<Result<_>>()?;
    let per_poly = par::map_range(cfg.count, |i| -> Result<Vec<DiscrepancyReport>> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);
        let p = littlewood(cfg.degree, &mut rng);
        let roots = rootfind::int_roots_with_multiplicity(&p, &cfg.roots)?;
        let q = ComplexPolynomial::from_int(&p)?;
        sectors
            .iter()
            .map(|s| erdos_turan_check(&q, s, Some(&roots)))
            .collect()
    });
    let mut summary = EtFuzzSummary {
        polynomials: cfg.count,
        checks: 0,
        violations: 0,
        worst_ratio: 0.0,
        boundary_warnings: 0,
        violating: Vec::new(),
    };
    for (i, reports) in per_poly.into_iter().enumerate() {
        let reports = reports?;
        let mut bad = false;
        for r in reports {
            summary.checks += 1;
            summary.boundary_warnings += r.boundary_warnings;
            summary.worst_ratio = summary.worst_ratio.max(r.statistic / r.bound);
            if !r.holds {
                summary.violations += 1;
                bad = true;
            }
        }
        if bad {
            summary.violating.push(i);
        }
    }
    Ok(summary)
}
