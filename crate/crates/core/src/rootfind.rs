//! Simultaneous root finding with residual-based inclusion radii.
//!
//! Roots are located with the Aberth–Ehrlich iteration (Jacobi form, so every
//! candidate is updated from the previous sweep and the sweep parallelises),
//! then polished with Newton steps. Each returned point `z` carries the radius
//! `D·|p(z)/p'(z)|`, which bounds the distance to some true root. Disks that
//! overlap are reported as a cluster instead of being returned.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::zpoly::{self, IntPolynomial};
use crate::{par, Error, Result};

/// Fractional angular offset of the initial circles (golden ratio conjugate).
const ANGLE_OFFSET: f64 = 0.618_033_988_749_894_9;

/// Coefficients above this bit length trigger a shared power-of-two rescale.
const SCALE_BITS: u64 = 900;
const SCALE_DEGREE: usize = 1 << 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexPolynomial {
    coeffs: Vec<Complex64>,
    /// The stored coefficients equal the original ones times `2^-scale_exp`.
    scale_exp: i64,
}

impl ComplexPolynomial {
    /// Builds a polynomial, dropping trailing zero coefficients.
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self> {
        while coeffs
            .last()
            .is_some_and(|c| *c == Complex64::new(0.0, 0.0))
        {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(Error::ZeroPolynomial);
        }
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(ComplexPolynomial {
            coeffs,
            scale_exp: 0,
        })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Converts an integer polynomial. Large inputs are divided by a shared
    /// power of two so every coefficient fits in `f64`; the roots are
    /// unchanged.
    pub fn from_int(p: &IntPolynomial) -> Result<Self> {
        if p.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let bits = p.max_bits();
        let shift = if bits > SCALE_BITS || p.coeffs().len() > SCALE_DEGREE {
            bits as i64 - 64
        } else {
            0
        };
        let coeffs = p
            .coeffs()
            .iter()
            .map(|c| Complex64::new(zpoly::bigint_to_f64_scaled(c, shift), 0.0))
            .collect();
        let mut out = Self::new(coeffs)?;
        out.scale_exp = shift;
        Ok(out)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn scale_exp(&self) -> i64 {
        self.scale_exp
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs[self.degree()]
    }

    /// Length `Σ|q_i|`.
    pub fn length(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    /// `p(z)` and `p'(z)` by Horner's rule.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        eval_with_derivative(self, z)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// Newton correction `p(z)/p'(z)` together with the scaled residual
    /// `|p(z)| / (Σ|p_i| · max(1,|z|)^D)`. For `|z| > 1` the reversed
    /// polynomial is evaluated at `1/z`, which avoids overflow.
    fn newton_ratio(&self, z: Complex64, length: f64) -> (Complex64, f64) {
        let d = self.degree() as f64;
        if z.norm() <= 1.0 {
            let (v, dv) = eval_with_derivative(self, z);
            (v / dv, v.norm() / length)
        } else {
            let w = z.inv();
            let mut q = Complex64::new(0.0, 0.0);
            let mut dq = Complex64::new(0.0, 0.0);
            for c in &self.coeffs {
                dq = dq * w + q;
                q = q * w + c;
            }
            // p'/p = w (D - w q'/q)
            let ratio = q / (w * (q * d - w * dq));
            (ratio, q.norm() / length)
        }
    }
}

/// Root approximations with per-root inclusion radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub points: Vec<Complex64>,
    pub radii: Vec<f64>,
    pub source_degree: usize,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Writes `re,im,radius` rows with a header.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "re,im,radius")?;
        for (z, r) in self.points.iter().zip(&self.radii) {
            writeln!(w, "{:e},{:e},{:e}", z.re, z.im, r)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub polish_steps: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            tol: 1e-13,
            max_iters: 200,
            polish_steps: 3,
        }
    }
}

/// `1 + max_{i<D} |p_i|/|p_D|`.
pub fn cauchy_bound(p: &ComplexPolynomial) -> Result<f64> {
    let d = p.degree();
    if d == 0 {
        return Err(Error::ConstantPolynomial);
    }
    let lead = p.leading().norm();
    let m = p.coeffs[..d]
        .iter()
        .map(|c| c.norm() / lead)
        .fold(0.0, f64::max);
    Ok(1.0 + m)
}

pub fn eval_with_derivative(p: &ComplexPolynomial, z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut dv = Complex64::new(0.0, 0.0);
    for c in p.coeffs.iter().rev() {
        dv = dv * z + v;
        v = v * z + c;
    }
    (v, dv)
}

/// All roots of `p` with inclusion radii. The input should be squarefree.
pub fn roots(p: &ComplexPolynomial, tol: f64, max_iters: usize) -> Result<RootSet> {
    roots_with(
        p,
        &RootOptions {
            tol,
            max_iters,
            ..RootOptions::default()
        },
    )
}

pub fn roots_with(p: &ComplexPolynomial, opts: &RootOptions) -> Result<RootSet> {
    let degree = p.degree();
    if degree == 0 {
        return Err(Error::ConstantPolynomial);
    }
    // Exact zero roots are split off: x^v * q(x).
    let v = p
        .coeffs
        .iter()
        .take_while(|c| **c == Complex64::new(0.0, 0.0))
        .count();
    if v > 1 {
        return Err(Error::ClusterDetected(0, 1));
    }
    let mut points = Vec::with_capacity(degree);
    let mut radii = Vec::with_capacity(degree);
    if v == 1 {
        points.push(Complex64::new(0.0, 0.0));
        radii.push(0.0);
    }
    if degree > v {
        let q = ComplexPolynomial {
            coeffs: p.coeffs[v..].to_vec(),
            scale_exp: p.scale_exp,
        };
        let (zs, rs) = aberth(&q, opts)?;
        points.extend(zs);
        radii.extend(rs);
    }
    check_separation(&points, &radii)?;
    Ok(RootSet {
        points,
        radii,
        source_degree: degree,
    })
}

fn aberth(p: &ComplexPolynomial, opts: &RootOptions) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let d = p.degree();
    let length = p.length();
    if d == 1 {
        let z = -p.coeffs[0] / p.coeffs[1];
        let (ratio, _) = p.newton_ratio(z, length);
        let r = ratio.norm();
        return Ok((vec![z], vec![r]));
    }
    // Horner rounding puts a floor of about 2 D eps under the residual.
    let tol = opts.tol.max(4.0 * d as f64 * f64::EPSILON);
    let mut z = initial_points(p);
    let mut done = vec![false; d];
    let mut converged = false;
    for _ in 0..opts.max_iters {
        let snapshot = &z;
        let steps = par::map_range(d, |i| {
            if done[i] {
                return (snapshot[i], true);
            }
            let zi = snapshot[i];
            let (ratio, res) = p.newton_ratio(zi, length);
            if res <= tol || ratio == Complex64::new(0.0, 0.0) {
                return (zi, true);
            }
            let mut s = Complex64::new(0.0, 0.0);
            for (j, zj) in snapshot.iter().enumerate() {
                if j != i {
                    let diff = zi - zj;
                    if diff != Complex64::new(0.0, 0.0) {
                        s += diff.inv();
                    }
                }
            }
            // p'/p underflows to zero where p' does.
            let log_deriv = if ratio.is_finite() {
                ratio.inv()
            } else {
                Complex64::new(0.0, 0.0)
            };
            let w = (log_deriv - s).inv();
            let next = zi - w;
            let small = w.norm() <= tol * next.norm().max(f64::MIN_POSITIVE);
            (next, small)
        });
        let mut all = true;
        for (i, (zi, ok)) in steps.into_iter().enumerate() {
            if !zi.re.is_finite() || !zi.im.is_finite() {
                return Err(Error::NoConvergence(opts.max_iters));
            }
            z[i] = zi;
            done[i] = ok;
            all &= ok;
        }
        if all {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(opts.max_iters));
    }
    let out = par::map(&z, |&zi| {
        let mut zi = zi;
        let (mut ratio, mut res) = p.newton_ratio(zi, length);
        for _ in 0..opts.polish_steps {
            if ratio == Complex64::new(0.0, 0.0) {
                break;
            }
            let cand = zi - ratio;
            let (r2, res2) = p.newton_ratio(cand, length);
            if res2 > res {
                break;
            }
            zi = cand;
            ratio = r2;
            res = res2;
        }
        (zi, d as f64 * ratio.norm())
    });
    Ok(out.into_iter().unzip())
}

/// Starting points on circles read off the upper convex hull of
/// `(i, log|p_i|)`, equally spaced with a fixed irrational angular offset.
fn initial_points(p: &ComplexPolynomial) -> Vec<Complex64> {
    let d = p.degree();
    let logs: Vec<f64> = p
        .coeffs
        .iter()
        .map(|c| {
            let a = c.norm();
            if a > 0.0 {
                a.ln()
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..=d {
        if logs[i] == f64::NEG_INFINITY {
            continue;
        }
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b - a) as f64 * (logs[i] - logs[a]) - (i - a) as f64 * (logs[b] - logs[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = Vec::with_capacity(d);
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let k = b - a;
        let radius = ((logs[a] - logs[b]) / k as f64).exp();
        for j in 0..k {
            let angle = 2.0 * PI * (j as f64 + ANGLE_OFFSET) / k as f64 + out.len() as f64;
            out.push(Complex64::from_polar(radius, angle));
        }
    }
    out
}

fn check_separation(points: &[Complex64], radii: &[f64]) -> Result<()> {
    if let Some(i) = radii.iter().position(|r| !r.is_finite()) {
        return Err(Error::ClusterDetected(i, i));
    }
    let n = points.len();
    let clash = par::map_range(n, |i| {
        (i + 1..n).find(|&j| (points[i] - points[j]).norm() <= 2.0 * (radii[i] + radii[j]))
    });
    match clash
        .into_iter()
        .enumerate()
        .find_map(|(i, j)| j.map(|j| (i, j)))
    {
        Some((i, j)) => Err(Error::ClusterDetected(i, j)),
        None => Ok(()),
    }
}

/// Roots of an integer polynomial, grouped by squarefree layer with the
/// layer's multiplicity. Zero roots are included.
pub fn int_roots(p: &IntPolynomial, opts: &RootOptions) -> Result<Vec<(RootSet, usize)>> {
    let layers = zpoly::squarefree_decomposition(p)?;
    layers
        .into_iter()
        .map(|(f, mult)| {
            let cp = ComplexPolynomial::from_int(&f)?;
            Ok((roots_with(&cp, opts)?, mult))
        })
        .collect()
}

/// Roots of an integer polynomial listed with multiplicity. Tries the
/// polynomial directly first and falls back to the squarefree layers when
/// the direct attempt finds a cluster.
pub fn int_roots_with_multiplicity(p: &IntPolynomial, opts: &RootOptions) -> Result<RootSet> {
    let degree = p.degree().ok_or(Error::ZeroPolynomial)?;
    if degree == 0 {
        return Err(Error::ConstantPolynomial);
    }
    let direct = ComplexPolynomial::from_int(p).and_then(|cp| roots_with(&cp, opts));
    match direct {
        Ok(rs) => Ok(rs),
        Err(Error::ClusterDetected(..)) | Err(Error::NoConvergence(_)) => {
            let mut points = Vec::with_capacity(degree);
            let mut radii = Vec::with_capacity(degree);
            for (layer, mult) in int_roots(p, opts)? {
                for _ in 0..mult {
                    points.extend_from_slice(&layer.points);
                    radii.extend_from_slice(&layer.radii);
                }
            }
            Ok(RootSet {
                points,
                radii,
                source_degree: degree,
            })
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(c: &[f64]) -> ComplexPolynomial {
        ComplexPolynomial::from_real(c).unwrap()
    }

    #[test]
    fn binomials_with_points_thrown_near_zero() {
        for (d, c) in [(145usize, 2i64), (199, 1), (329, 2), (512, 1)] {
            let mut v = vec![0; d + 1];
            v[0] = -c;
            v[d] = 1;
            let rs =
                int_roots_with_multiplicity(&IntPolynomial::from_i64(&v), &RootOptions::default())
                    .unwrap();
            let modulus = (c as f64).powf(1.0 / d as f64);
            assert_eq!(rs.len(), d);
            assert!(rs.points.iter().all(|z| (z.norm() - modulus).abs() < 1e-12));
        }
    }

    fn sorted_re(rs: &RootSet) -> Vec<f64> {
        let mut v: Vec<f64> = rs.points.iter().map(|z| z.re).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn cauchy_examples() {
        assert_eq!(cauchy_bound(&real(&[-2.0, 1.0])).unwrap(), 3.0);
        assert_eq!(cauchy_bound(&real(&[1.0, 0.0, 1.0])).unwrap(), 2.0);
        assert_eq!(cauchy_bound(&real(&[0.0, 0.0, 0.0, 1.0])).unwrap(), 1.0);
        assert_eq!(cauchy_bound(&real(&[4.0])), Err(Error::ConstantPolynomial));
    }

    #[test]
    fn eval_examples() {
        let (v, dv) = eval_with_derivative(&real(&[-1.0, 0.0, 1.0]), Complex64::new(2.0, 0.0));
        assert_eq!(
            (v, dv),
            (Complex64::new(3.0, 0.0), Complex64::new(4.0, 0.0))
        );
        let (v, dv) = eval_with_derivative(&real(&[0.0, 0.0, 0.0, 1.0]), Complex64::i());
        assert!((v - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((dv - Complex64::new(-3.0, 0.0)).norm() < 1e-15);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let (v, _) = eval_with_derivative(&real(&[-1.0, -1.0, 1.0]), Complex64::new(phi, 0.0));
        assert!(v.norm() < 1e-14);
    }

    #[test]
    fn roots_of_small_examples() {
        let rs = roots(&real(&[-1.0, 0.0, 1.0]), 1e-13, 200).unwrap();
        let v = sorted_re(&rs);
        assert!((v[0] + 1.0).abs() < 1e-12 && (v[1] - 1.0).abs() < 1e-12);
        assert!(rs.radii.iter().all(|&r| r < 1e-12));

        let rs = roots(&real(&[-1.0, 0.0, 0.0, 0.0, 1.0]), 1e-13, 200).unwrap();
        for k in 0..4 {
            let w = Complex64::from_polar(1.0, PI * k as f64 / 2.0);
            assert!(rs.points.iter().any(|z| (z - w).norm() < 1e-12));
        }

        // Quadratic formula oracle.
        let rs = roots(&real(&[-1.0, -1.0, 1.0]), 1e-13, 200).unwrap();
        let v = sorted_re(&rs);
        let s5 = 5f64.sqrt();
        assert!((v[0] - (1.0 - s5) / 2.0).abs() < 1e-12);
        assert!((v[1] - (1.0 + s5) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn double_root_is_a_cluster() {
        let err = roots(&real(&[1.0, -2.0, 1.0]), 1e-13, 200).unwrap_err();
        assert!(matches!(
            err,
            Error::ClusterDetected(..) | Error::NoConvergence(_)
        ));
        let err = roots(&real(&[0.0, 0.0, 1.0, 1.0]), 1e-13, 200).unwrap_err();
        assert!(matches!(err, Error::ClusterDetected(..)));
    }

    #[test]
    fn constant_is_rejected() {
        assert_eq!(
            roots(&real(&[3.0]), 1e-13, 200),
            Err(Error::ConstantPolynomial)
        );
    }

    #[test]
    fn int_roots_handle_multiplicity() {
        // (x-2)^2 (x^2+1)
        let f = IntPolynomial::from_i64(&[4, -4, 5, -4, 1]);
        let rs = int_roots_with_multiplicity(&f, &RootOptions::default()).unwrap();
        assert_eq!(rs.len(), 4);
        let twos = rs
            .points
            .iter()
            .filter(|z| (*z - Complex64::new(2.0, 0.0)).norm() < 1e-9)
            .count();
        assert_eq!(twos, 2);
    }

    #[test]
    fn huge_coefficients_are_scaled() {
        // 2^3000 (x^2 - 2): coefficients overflow f64 without rescaling.
        let f =
            IntPolynomial::from_i64(&[-2, 0, 1]).scale(&(num_bigint::BigInt::from(1) << 3000usize));
        let cp = ComplexPolynomial::from_int(&f).unwrap();
        assert!(cp.scale_exp() > 0);
        let rs = roots_with(&cp, &RootOptions::default()).unwrap();
        let v = sorted_re(&rs);
        assert!((v[1] - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn csv_has_header() {
        let rs = roots(&real(&[-1.0, 1.0]), 1e-13, 200).unwrap();
        let mut buf = Vec::new();
        rs.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("re,im,radius"));
        let row: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(row.len(), 3);
        assert_eq!((row[0], row[1].abs()), (1.0, 0.0));
    }
}
