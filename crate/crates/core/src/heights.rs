//! Mahler measures, mean Weil heights and the bound factors built from them.
//!
//! All logarithms are natural.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::rootfind::{self, RootOptions, RootSet};
use crate::zpoly::{self, IntPolynomial};
use crate::{par, Error, Result};

/// Fixed irrational offset of the Jensen quadrature nodes.
const NODE_OFFSET: f64 = 0.414_213_562_373_095_1;

/// Distance to the unit circle below which a root is flagged.
pub const NEAR_CIRCLE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightSummary {
    #[serde(rename = "card_S")]
    pub card_s: usize,
    #[serde(rename = "m_S")]
    pub m_s: f64,
    #[serde(rename = "h_S")]
    pub h_s: f64,
    pub mahler_log: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl HeightSummary {
    /// Summary for a set of `card_s` points with mean height `m_s`.
    pub fn from_mean(card_s: usize, m_s: f64, mahler_log: f64) -> Self {
        HeightSummary {
            card_s,
            m_s,
            h_s: h_factor(m_s, card_s),
            mahler_log,
            warnings: Vec::new(),
        }
    }
}

/// `24 (m + log(2c)/c)^{1/3}`.
pub fn h_factor(m_s: f64, card_s: usize) -> f64 {
    let c = card_s as f64;
    24.0 * (m_s + (2.0 * c).ln() / c).cbrt()
}

/// Mahler measure of the primitive part of `p`, multiplicities included.
pub fn mahler_measure(p: &IntPolynomial) -> Result<f64> {
    Ok(log_mahler_measure(p)?.exp())
}

/// `log M(p)` of the primitive part of `p`.
pub fn log_mahler_measure(p: &IntPolynomial) -> Result<f64> {
    let (_, prim) = zpoly::content_primitive(p)?;
    let lead = prim.leading().expect("nonzero").abs();
    if prim.is_constant() {
        return Err(Error::ConstantPolynomial);
    }
    let mut log_m = log_abs_bigint(&lead);
    for (layer, mult) in rootfind::int_roots(&prim, &RootOptions::default())? {
        log_m += mult as f64 * log_plus_sum(&layer.points);
    }
    Ok(log_m)
}

fn log_abs_bigint(c: &num_bigint::BigInt) -> f64 {
    let bits = c.bits() as i64;
    let shift = (bits - 64).max(0);
    zpoly::bigint_to_f64_scaled(c, shift).abs().ln() + shift as f64 * std::f64::consts::LN_2
}

fn log_plus_sum(points: &[Complex64]) -> f64 {
    points.iter().map(|z| z.norm().ln().max(0.0)).sum()
}

/// `exp` of the periodic trapezoid average of `log|p(e^{2πit})|`.
///
/// Independent of root finding, so it serves as an oracle for
/// [`mahler_measure`]. The content of `p` is included.
pub fn mahler_jensen(p: &IntPolynomial, nodes: usize) -> Result<f64> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if nodes == 0 {
        return Err(Error::InvalidParameter("nodes must be positive".into()));
    }
    let bits = p.max_bits() as i64;
    let shift = (bits - 64).max(0);
    let coeffs: Vec<f64> = p
        .coeffs()
        .iter()
        .map(|c| zpoly::bigint_to_f64_scaled(c, shift))
        .collect();
    const CHUNK: usize = 4096;
    let chunks = nodes.div_ceil(CHUNK);
    let partial = par::map_range(chunks, |c| {
        let mut acc = 0.0;
        for j in c * CHUNK..((c + 1) * CHUNK).min(nodes) {
            let t = (j as f64 + NODE_OFFSET) / nodes as f64;
            let z = Complex64::from_polar(1.0, 2.0 * PI * t);
            let v = coeffs
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
            let a = v.norm();
            if a < f64::MIN_POSITIVE {
                return None;
            }
            acc += a.ln();
        }
        Some(acc)
    });
    let mut sum = 0.0;
    for s in partial {
        sum += s.ok_or(Error::NodeOnRoot)?;
    }
    Ok((sum / nodes as f64 + shift as f64 * std::f64::consts::LN_2).exp())
}

/// Mean height of the full root set of a primitive squarefree `p`:
/// `m_S = log M(p) / deg p`.
pub fn mean_height(p: &IntPolynomial) -> Result<HeightSummary> {
    let (_, summary) = mean_height_with_roots(p)?;
    Ok(summary)
}

/// As [`mean_height`], also returning the root set it was computed from.
pub fn mean_height_with_roots(p: &IntPolynomial) -> Result<(RootSet, HeightSummary)> {
    mean_height_with_options(p, &RootOptions::default())
}

pub fn mean_height_with_options(
    p: &IntPolynomial,
    opts: &RootOptions,
) -> Result<(RootSet, HeightSummary)> {
    let degree = p.degree().ok_or(Error::ZeroPolynomial)?;
    if degree == 0 {
        return Err(Error::ConstantPolynomial);
    }
    let (content, _) = zpoly::content_primitive(p)?;
    if !content.is_one() {
        return Err(Error::NotPrimitive(content.to_string()));
    }
    if !zpoly::is_squarefree(p) {
        return Err(Error::NotSquarefree);
    }
    let cp = rootfind::ComplexPolynomial::from_int(p)?;
    let roots = rootfind::roots_with(&cp, opts)?;
    let summary = summary_from_roots(p, &roots);
    Ok((roots, summary))
}

fn summary_from_roots(p: &IntPolynomial, roots: &RootSet) -> HeightSummary {
    let degree = roots.source_degree;
    let lead = p.leading().expect("nonzero").abs();
    let mahler_log = log_abs_bigint(&lead) + log_plus_sum(&roots.points);
    let mut s = HeightSummary::from_mean(degree, mahler_log / degree as f64, mahler_log);
    let near = roots
        .points
        .iter()
        .filter(|z| (z.norm() - 1.0).abs() <= NEAR_CIRCLE)
        .count();
    if near > 0 {
        s.warnings.push(format!(
            "{near} roots within {NEAR_CIRCLE:e} of the unit circle"
        ));
    }
    s
}

/// Absolute Siegel bound on the height of a nonzero polynomial of degree
/// `< degree_bound` vanishing on a set of `card_s` points with mean height
/// `m_s`.
pub fn siegel_bound(card_s: usize, m_s: f64, degree_bound: usize) -> Result<f64> {
    if degree_bound <= card_s {
        return Err(Error::DegreeTooSmall {
            degree: degree_bound,
            needed: card_s,
        });
    }
    let l1 = (degree_bound + 1) as f64;
    let c = card_s as f64;
    Ok(c / (l1 - c) * (1.5 * l1.ln() + l1 * m_s) + l1.ln() / 2.0)
}
