//! Low-height integer multiples of a polynomial, found by exact LLL reduction
//! of the lattice of its multiples, and the auxiliary-polynomial route to the
//! angular discrepancy bound.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::discrepancy::{erdos_turan_check, sector_count, DiscrepancyReport, SectorSpec};
use crate::heights::{mean_height, siegel_bound};
use crate::rootfind::{self, ComplexPolynomial, RootOptions};
use crate::zpoly::{self, IntPolynomial};
use crate::{Error, Result};

pub const DEFAULT_DELTA: f64 = 0.99;

/// Integer row vectors of a common dimension, constant term first when they
/// hold polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBasis {
    #[serde(with = "rows_as_strings")]
    rows: Vec<Vec<BigInt>>,
}

mod rows_as_strings {
    use num_bigint::BigInt;
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(rows: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Vec<String>> = rows
            .iter()
            .map(|r| r.iter().map(|c| c.to_string()).collect())
            .collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<BigInt>>, D::Error> {
        let v: Vec<Vec<String>> = Vec::deserialize(d)?;
        v.into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|c| c.parse::<BigInt>().map_err(D::Error::custom))
                    .collect()
            })
            .collect()
    }
}

impl LatticeBasis {
    pub fn new(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("empty basis".into()));
        }
        let dim = rows[0].len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter(
                "rows must share a positive dimension".into(),
            ));
        }
        Ok(LatticeBasis { rows })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&c| BigInt::from(c)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn dimension(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row_polynomial(&self, i: usize) -> IntPolynomial {
        IntPolynomial::new(self.rows[i].clone())
    }

    /// Gram matrix `B Bᵀ`.
    pub fn gram(&self) -> Vec<Vec<BigInt>> {
        self.rows
            .iter()
            .map(|a| self.rows.iter().map(|b| dot(a, b)).collect())
            .collect()
    }
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_sq(a: &[BigInt]) -> BigInt {
    dot(a, a)
}

/// Rows `x^i p` for `i = 0..L-1-deg p`, padded to dimension `L`.
pub fn multiples_lattice(p: &IntPolynomial, l: usize) -> Result<LatticeBasis> {
    let d = p.degree().ok_or(Error::ZeroPolynomial)?;
    if d == 0 {
        return Err(Error::ConstantPolynomial);
    }
    if l <= d {
        return Err(Error::DegreeTooSmall {
            degree: l,
            needed: d + 1,
        });
    }
    let rows = (0..l - d)
        .map(|i| {
            let mut r = vec![BigInt::zero(); l];
            for (j, c) in p.coeffs().iter().enumerate() {
                r[i + j] = c.clone();
            }
            r
        })
        .collect();
    LatticeBasis::new(rows)
}

/// LLL reduction with parameter `delta`, in exact integer arithmetic.
pub fn lll_reduce(basis: &LatticeBasis, delta: f64) -> Result<LatticeBasis> {
    Ok(lll_reduce_with_transform(basis, delta)?.0)
}

/// As [`lll_reduce`], also returning the unimodular `H` with
/// `reduced = H · basis`.
pub fn lll_reduce_with_transform(
    basis: &LatticeBasis,
    delta: f64,
) -> Result<(LatticeBasis, Vec<Vec<BigInt>>)> {
    if !(delta > 0.25 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must be in (1/4, 1), got {delta}"
        )));
    }
    let den: i64 = 1_000_000;
    let num = BigInt::from((delta * den as f64).round() as i64);
    let den = BigInt::from(den);
    let mut state = Lll::new(basis.rows.clone());
    state.run(&num, &den)?;
    Ok((LatticeBasis { rows: state.b }, state.h))
}

/// Integral LLL: Gram–Schmidt data kept as the integers
/// `d_i = det Gram(b_1..b_i)` and `λ_{ij} = d_j μ_{ij}`.
/// Indices below are 1-based to match the `d_0 = 1` convention.
struct Lll {
    b: Vec<Vec<BigInt>>,
    h: Vec<Vec<BigInt>>,
    d: Vec<BigInt>,
    lambda: Vec<Vec<BigInt>>,
}

impl Lll {
    fn new(b: Vec<Vec<BigInt>>) -> Self {
        let n = b.len();
        let h = (0..n)
            .map(|i| (0..n).map(|j| BigInt::from(u8::from(i == j))).collect())
            .collect();
        Lll {
            b,
            h,
            d: vec![BigInt::zero(); n + 1],
            lambda: vec![vec![BigInt::zero(); n + 1]; n + 1],
        }
    }

    fn run(&mut self, num: &BigInt, den: &BigInt) -> Result<()> {
        let n = self.b.len();
        self.d[0] = BigInt::from(1);
        self.d[1] = norm_sq(&self.b[0]);
        if self.d[1].is_zero() {
            return Err(Error::InvalidParameter("basis rows are dependent".into()));
        }
        let (mut k, mut kmax) = (2usize, 1usize);
        while k <= n {
            if k > kmax {
                kmax = k;
                self.incorporate(k)?;
            }
            self.reduce(k, k - 1);
            let lam = &self.lambda[k][k - 1];
            let lhs = den * &self.d[k] * &self.d[k - 2];
            let rhs = num * &self.d[k - 1] * &self.d[k - 1] - den * lam * lam;
            if lhs < rhs {
                self.swap(k, kmax);
                k = (k - 1).max(2);
            } else {
                for l in (1..k - 1).rev() {
                    self.reduce(k, l);
                }
                k += 1;
            }
        }
        Ok(())
    }

    fn incorporate(&mut self, k: usize) -> Result<()> {
        for j in 1..=k {
            let mut u = dot(&self.b[k - 1], &self.b[j - 1]);
            for i in 1..j {
                u = (&self.d[i] * &u - &self.lambda[k][i] * &self.lambda[j][i]) / &self.d[i - 1];
            }
            if j < k {
                self.lambda[k][j] = u;
            } else {
                if u.is_zero() {
                    return Err(Error::InvalidParameter("basis rows are dependent".into()));
                }
                self.d[k] = u;
            }
        }
        Ok(())
    }

    fn reduce(&mut self, k: usize, l: usize) {
        let two_lam: BigInt = &self.lambda[k][l] * 2;
        if two_lam.abs() <= self.d[l] {
            return;
        }
        // Nearest integer to λ/d.
        let dl = &self.d[l];
        let q = (two_lam + dl).div_floor(&(dl * 2));
        let (bl, hl) = (self.b[l - 1].clone(), self.h[l - 1].clone());
        for (x, y) in self.b[k - 1].iter_mut().zip(&bl) {
            *x -= &q * y;
        }
        for (x, y) in self.h[k - 1].iter_mut().zip(&hl) {
            *x -= &q * y;
        }
        self.lambda[k][l] -= &q * &self.d[l];
        for i in 1..l {
            let t = &q * &self.lambda[l][i];
            self.lambda[k][i] -= t;
        }
    }

    fn swap(&mut self, k: usize, kmax: usize) {
        self.b.swap(k - 1, k - 2);
        self.h.swap(k - 1, k - 2);
        for j in 1..k - 1 {
            let t = std::mem::take(&mut self.lambda[k][j]);
            self.lambda[k][j] = std::mem::replace(&mut self.lambda[k - 1][j], t);
        }
        let lam = self.lambda[k][k - 1].clone();
        let bb = (&self.d[k - 2] * &self.d[k] + &lam * &lam) / &self.d[k - 1];
        for i in k + 1..=kmax {
            let t = self.lambda[i][k].clone();
            let new_k = (&self.d[k] * &self.lambda[i][k - 1] - &lam * &t) / &self.d[k - 1];
            let new_km1 = (&bb * &t + &lam * &new_k) / &self.d[k];
            self.lambda[i][k] = new_k;
            self.lambda[i][k - 1] = new_km1;
        }
        self.d[k - 1] = bb;
    }
}

/// A short multiple of `p` and how its height compares with the Siegel bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortMultiple {
    pub f: IntPolynomial,
    /// `log max|f_i| - log content(f)`.
    pub achieved_height: f64,
    /// Siegel bound for `card_S = deg p` and degree `< L`; advisory only.
    pub siegel_rhs: f64,
    pub lattice_dimension: usize,
}

/// Shortest vector of the reduced multiples lattice, with trailing powers of
/// `x` removed and a positive leading coefficient.
pub fn short_multiple(p: &IntPolynomial, l: usize) -> Result<ShortMultiple> {
    let d = p.degree().ok_or(Error::ZeroPolynomial)?;
    if p.coeff(0).is_zero() {
        return Err(Error::ZeroIsRoot);
    }
    let lattice = multiples_lattice(p, l)?;
    let reduced = lll_reduce(&lattice, DEFAULT_DELTA)?;
    let best = (0..reduced.rank())
        .min_by_key(|&i| norm_sq(&reduced.rows()[i]))
        .expect("nonempty basis");
    let f = reduced
        .row_polynomial(best)
        .strip_x_powers()
        .with_positive_leading();
    zpoly::poly_divexact(&f, p)?;
    let (content, _) = zpoly::content_primitive(&f)?;
    let achieved_height = log_abs(&f.max_abs_coeff()) - log_abs(&content);
    let m_s = mean_height(p)?.m_s;
    Ok(ShortMultiple {
        f,
        achieved_height,
        siegel_rhs: siegel_bound(d, m_s, l)?,
        lattice_dimension: l,
    })
}

fn log_abs(c: &BigInt) -> f64 {
    let bits = c.bits() as i64;
    let shift = (bits - 64).max(0);
    zpoly::bigint_to_f64_scaled(c, shift).abs().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Degree budget `max(deg p + 1, floor((1 + h_S/6) deg p))`.
pub fn default_lattice_degree(deg: usize, h_s: f64) -> usize {
    let l = ((1.0 + h_s / 6.0) * deg as f64).floor() as usize;
    l.max(deg + 1)
}

/// Bounds the sector discrepancy of the roots of `p` through a short
/// multiple `F`: `|Z_p - θ deg p/2π| <= (D - deg p) + |Z_F - θD/2π| +
/// θ(D - deg p)/2π` where `D = deg F`. Holds when that inequality and the
/// Erdős–Turán check on `F` both hold.
pub fn angular_via_auxpoly(p: &IntPolynomial, sector: &SectorSpec) -> Result<DiscrepancyReport> {
    let deg = p.degree().ok_or(Error::ZeroPolynomial)?;
    if deg < 2 {
        return Err(Error::InvalidParameter(format!(
            "need deg p >= 2, got {deg}"
        )));
    }
    let heights = mean_height(p)?;
    let l = default_lattice_degree(deg, heights.h_s);
    let unfloored = ((1.0 + heights.h_s / 6.0) * deg as f64).floor() as usize;
    let sm = short_multiple(p, l)?;
    let big_d = sm.f.degree().expect("nonzero multiple");
    let opts = RootOptions::default();

    let f_roots = rootfind::int_roots_with_multiplicity(&sm.f, &opts)?;
    let f_complex = ComplexPolynomial::from_int(&sm.f)?;
    let et = erdos_turan_check(&f_complex, sector, Some(&f_roots))?;

    let p_roots = rootfind::roots_with(&ComplexPolynomial::from_int(p)?, &opts)?;
    let theta = sector.theta();
    let z_p = if sector.is_full() {
        deg
    } else {
        sector_count(&p_roots.points, sector)
    };
    let z_f = if sector.is_full() {
        big_d
    } else {
        sector_count(&f_roots.points, sector)
    };
    let statistic = (z_p as f64 - theta * deg as f64 / TAU).abs();
    let extra = (big_d - deg) as f64;
    let f_dev = (z_f as f64 - theta * big_d as f64 / TAU).abs();
    let bound = extra + f_dev + theta * extra / TAU;
    let via_et = extra + et.bound.max(0.0).sqrt() + theta * extra / TAU;

    let mut report = DiscrepancyReport::new(statistic, bound)
        .with_warnings(et.boundary_warnings)
        .with_param("check", "angular_via_auxpoly")
        .with_param("polynomial", p.to_string())
        .with_param("auxiliary", sm.f.to_string())
        .with_param("deg_p", deg)
        .with_param("deg_F", big_d)
        .with_param("L", l)
        .with_param("L_unfloored", unfloored)
        .with_param("L_floor_applied", l != unfloored)
        .with_param("h_S", heights.h_s)
        .with_param("m_S", heights.m_s)
        .with_param("achieved_height", sm.achieved_height)
        .with_param("siegel_rhs", sm.siegel_rhs)
        .with_param("zeros_p", z_p)
        .with_param("zeros_F", z_f)
        .with_param("et_statistic", et.statistic)
        .with_param("et_bound", et.bound)
        .with_param("et_holds", et.holds)
        .with_param("bound_via_et", via_et)
        .with_param("start_angle", sector.start_angle())
        .with_param("theta", theta);
    report.holds = report.holds && et.holds;
    report.margin = report.bound - report.statistic;
    Ok(report)
}
