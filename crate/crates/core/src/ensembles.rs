//! Weighted families of conjugate point sets.
//!
//! An [`OrbitEnsemble`] stands in for the family of images `σ(S)` of a finite
//! set `S` under the complex embeddings of the field it generates: a list of
//! point sets of common cardinality, each with a positive weight, together
//! with the mean height of `S`. Means over embeddings become weighted sums
//! over the list.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::heights::{self, HeightSummary};
use crate::rootfind::RootOptions;
use crate::zpoly::{self, IntPolynomial};
use crate::{Error, Result};

/// Relative radius attached to points computed from closed forms.
const ANALYTIC_RADIUS: f64 = 8.0 * f64::EPSILON;

/// How the mean height of an ensemble was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeightMode {
    /// Computed from the defining polynomial or its exact roots.
    Exact,
    /// An upper bound; downstream bounds stay valid since they are monotone
    /// in `m_S`.
    Bound,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitEnsemble {
    conjugate_sets: Vec<Vec<Complex64>>,
    radii: Vec<Vec<f64>>,
    weights: Vec<f64>,
    set_ids: Vec<u64>,
    card_s: usize,
    heights: HeightSummary,
    mode: HeightMode,
    label: String,
}

impl OrbitEnsemble {
    /// Validating constructor. `radii` may be empty, in which case every
    /// point gets a zero radius.
    pub fn new(
        label: impl Into<String>,
        conjugate_sets: Vec<Vec<Complex64>>,
        radii: Vec<Vec<f64>>,
        weights: Vec<f64>,
        heights: HeightSummary,
        mode: HeightMode,
    ) -> Result<Self> {
        let card_s = heights.card_s;
        let radii = if radii.is_empty() {
            conjugate_sets.iter().map(|s| vec![0.0; s.len()]).collect()
        } else {
            radii
        };
        let set_ids = (0..conjugate_sets.len() as u64).collect();
        let ens = OrbitEnsemble {
            conjugate_sets,
            radii,
            weights,
            set_ids,
            card_s,
            heights,
            mode,
            label: label.into(),
        };
        ens.validate()?;
        Ok(ens)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvariantViolation(msg));
        if self.card_s == 0 {
            return bad("card_S must be positive".into());
        }
        if self.conjugate_sets.is_empty() {
            return bad("ensemble has no conjugate sets".into());
        }
        if self.weights.len() != self.conjugate_sets.len() {
            return bad(format!(
                "{} weights for {} sets",
                self.weights.len(),
                self.conjugate_sets.len()
            ));
        }
        if self.radii.len() != self.conjugate_sets.len() {
            return bad("radii do not match the sets".into());
        }
        for (k, set) in self.conjugate_sets.iter().enumerate() {
            if set.len() != self.card_s {
                return bad(format!(
                    "set {k} has {} points, expected card_S = {}",
                    set.len(),
                    self.card_s
                ));
            }
            if self.radii[k].len() != set.len() {
                return bad(format!("set {k} radii length mismatch"));
            }
            for z in set {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return bad(format!("set {k} contains a non-finite point"));
                }
                if *z == Complex64::new(0.0, 0.0) {
                    return bad(format!("set {k} contains 0"));
                }
            }
        }
        if self.weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return bad("weights must be positive".into());
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return bad(format!("weights sum to {total}, not 1"));
        }
        let m = self.heights.m_s;
        if !(m.is_finite() && m >= 0.0) {
            return bad(format!("m_S = {m} must be finite and non-negative"));
        }
        Ok(())
    }

    pub fn with_set_ids(mut self, ids: Vec<u64>) -> Result<Self> {
        if ids.len() != self.conjugate_sets.len() {
            return Err(Error::InvariantViolation("set id count mismatch".into()));
        }
        self.set_ids = ids;
        Ok(self)
    }

    pub fn conjugate_sets(&self) -> &[Vec<Complex64>] {
        &self.conjugate_sets
    }

    pub fn radii(&self) -> &[Vec<f64>] {
        &self.radii
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// External identifier of each set (the residue `a` for Kummer families).
    pub fn set_ids(&self) -> &[u64] {
        &self.set_ids
    }

    pub fn card_s(&self) -> usize {
        self.card_s
    }

    pub fn heights(&self) -> &HeightSummary {
        &self.heights
    }

    pub fn m_s(&self) -> f64 {
        self.heights.m_s
    }

    pub fn h_s(&self) -> f64 {
        self.heights.h_s
    }

    pub fn mode(&self) -> HeightMode {
        self.mode
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.conjugate_sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conjugate_sets.is_empty()
    }

    /// Every point of every set, in order.
    pub fn all_points(&self) -> impl Iterator<Item = &Complex64> {
        self.conjugate_sets.iter().flatten()
    }

    pub fn to_file(&self) -> EnsembleFile {
        EnsembleFile {
            label: self.label.clone(),
            card_s: self.card_s,
            m_s: self.heights.m_s,
            m_s_mode: self.mode,
            sets: self
                .conjugate_sets
                .iter()
                .map(|s| s.iter().map(|z| PointJson { re: z.re, im: z.im }).collect())
                .collect(),
            weights: self.weights.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("ensemble serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: EnsembleFile =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        file.into_ensemble()
    }
}

/// On-disk ensemble layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleFile {
    pub label: String,
    #[serde(rename = "card_S")]
    pub card_s: usize,
    #[serde(rename = "m_S")]
    pub m_s: f64,
    #[serde(rename = "m_S_mode")]
    pub m_s_mode: HeightMode,
    pub sets: Vec<Vec<PointJson>>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointJson {
    pub re: f64,
    pub im: f64,
}

impl EnsembleFile {
    pub fn into_ensemble(self) -> Result<OrbitEnsemble> {
        if self.card_s == 0 {
            return Err(Error::InvariantViolation("card_S must be positive".into()));
        }
        // Sum of heights over S, the log Mahler measure when S is a full
        // Galois orbit.
        let mahler_log = self.m_s * self.card_s as f64;
        let heights = HeightSummary::from_mean(self.card_s, self.m_s, mahler_log);
        let sets = self
            .sets
            .into_iter()
            .map(|s| s.into_iter().map(|p| Complex64::new(p.re, p.im)).collect())
            .collect();
        OrbitEnsemble::new(
            self.label,
            sets,
            Vec::new(),
            self.weights,
            heights,
            self.m_s_mode,
        )
    }
}

/// Reads and validates an ensemble file.
pub fn load_ensemble(path: impl AsRef<Path>) -> Result<OrbitEnsemble> {
    let text = std::fs::read_to_string(path)?;
    OrbitEnsemble::from_json(&text)
}

/// The full root set of `p` as a single set of weight 1.
pub fn galois_stable_ensemble(p: &IntPolynomial) -> Result<OrbitEnsemble> {
    galois_stable_ensemble_with(p, &RootOptions::default())
}

pub fn galois_stable_ensemble_with(p: &IntPolynomial, opts: &RootOptions) -> Result<OrbitEnsemble> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if p.coeff(0) == num_bigint::BigInt::from(0) {
        return Err(Error::ZeroIsRoot);
    }
    let (roots, heights) = heights::mean_height_with_options(p, opts)?;
    OrbitEnsemble::new(
        format!("galois({p})"),
        vec![roots.points],
        vec![roots.radii],
        vec![1.0],
        heights,
        HeightMode::Exact,
    )
}

/// Residues in `1..m` coprime to `m`.
pub fn units_mod(m: u64) -> Vec<u64> {
    (1..m).filter(|a| a.gcd(&m) == 1).collect()
}

/// `S_a = { n-th roots of 1 - e^{2πia/m} }` for every unit `a` mod `m`,
/// uniformly weighted, with the exact mean height.
pub fn kummer_ensemble(m: u64, n: usize) -> Result<OrbitEnsemble> {
    kummer_ensemble_with(m, n, HeightMode::Exact)
}

pub fn kummer_ensemble_with(m: u64, n: usize, mode: HeightMode) -> Result<OrbitEnsemble> {
    if m < 3 {
        return Err(Error::InvalidParameter(format!(
            "kummer family needs m >= 3, got {m}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("kummer family needs n >= 1".into()));
    }
    let residues = units_mod(m);
    let phi = residues.len();
    let nf = n as f64;
    let mut sets = Vec::with_capacity(phi);
    let mut radii = Vec::with_capacity(phi);
    for &a in &residues {
        let t = PI * a as f64 / m as f64;
        // 1 - e^{2it} = 2 sin(t) e^{i(t - π/2)}
        let modulus = (2.0 * t.sin()).powf(1.0 / nf);
        let arg = t - PI / 2.0;
        let set: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(modulus, (arg + 2.0 * PI * j as f64) / nf))
            .collect();
        radii.push(vec![ANALYTIC_RADIUS * modulus.max(1.0); n]);
        sets.push(set);
    }
    let (log_m, mut heights) = match mode {
        HeightMode::Exact => {
            // Roots of Φ_m(1 - x) are exactly 1 - ζ^a, and its leading
            // coefficient is ±1.
            let log_m: f64 = residues
                .iter()
                .map(|&a| (2.0 * (PI * a as f64 / m as f64).sin()).ln().max(0.0))
                .sum();
            (
                log_m,
                HeightSummary::from_mean(n, log_m / (phi as f64 * nf), log_m),
            )
        }
        HeightMode::Bound => {
            let log_m = phi as f64 * std::f64::consts::LN_2;
            let mut h = HeightSummary::from_mean(n, std::f64::consts::LN_2 / nf, log_m);
            h.warnings.push("m_S is the upper bound log(2)/n".into());
            (log_m, h)
        }
    };
    heights.mahler_log = log_m;
    let weights = vec![1.0 / phi as f64; phi];
    OrbitEnsemble::new(
        format!("kummer(m={m},n={n})"),
        sets,
        radii,
        weights,
        heights,
        mode,
    )?
    .with_set_ids(residues)
}

/// Defining polynomial `Φ_m(1 - x^n)` of the Kummer family.
pub fn kummer_polynomial(m: u64, n: usize) -> IntPolynomial {
    zpoly::compose_shift_power(&zpoly::cyclotomic(m), n)
}

/// The ensembles exercised by the acceptance checks and the CLI.
pub fn bundled() -> Result<Vec<OrbitEnsemble>> {
    let lehmer = IntPolynomial::from_i64(&[1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1]);
    let mut out = vec![
        galois_stable_ensemble(&IntPolynomial::x_pow_minus_one(8))?,
        galois_stable_ensemble(&IntPolynomial::x_pow_minus_one(64))?,
        galois_stable_ensemble(&IntPolynomial::from_i64(&[-2, 0, 0, 0, 0, 1]))?,
        galois_stable_ensemble(&x_pow_minus_two(64))?,
        galois_stable_ensemble(&zpoly::cyclotomic(105))?,
        galois_stable_ensemble(&lehmer)?,
        galois_stable_ensemble(&kummer_polynomial(7, 3))?,
    ];
    for (m, n) in [(4, 1), (7, 2), (5, 3), (101, 8), (257, 16)] {
        out.push(kummer_ensemble(m, n)?);
    }
    Ok(out)
}

fn x_pow_minus_two(n: usize) -> IntPolynomial {
    let mut c = vec![0i64; n + 1];
    c[0] = -2;
    c[n] = 1;
    IntPolynomial::from_i64(&c)
}
