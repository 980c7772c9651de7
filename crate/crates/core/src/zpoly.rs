//! Exact arithmetic on integer-coefficient univariate polynomials.
//!
//! Coefficients are arbitrary-precision integers stored constant term first.
//! The zero polynomial is the empty coefficient vector; every constructor and
//! operation returns the canonical form with no trailing zeros.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPolynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    /// `c * x^k`
    pub fn monomial(c: BigInt, k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// `x^k - 1`
    pub fn x_pow_minus_one(k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[0] = -BigInt::one();
        coeffs[k] += BigInt::one();
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Multiplies by `x^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        IntPolynomial { coeffs }
    }

    /// Number of trailing factors of `x`, i.e. the index of the first nonzero
    /// coefficient.
    pub fn x_valuation(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    /// Removes every factor of `x`, so that the constant term is nonzero.
    pub fn strip_x_powers(&self) -> Self {
        let v = self.x_valuation();
        Self::new(self.coeffs[v..].to_vec())
    }

    /// Multiplies by -1 if needed so that the leading coefficient is positive.
    pub fn with_positive_leading(self) -> Self {
        match self.leading() {
            Some(l) if l.is_negative() => -self,
            _ => self,
        }
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = poly_mul(&base, &base);
            }
        }
        acc
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coeff(&self) -> BigInt {
        self.coeffs
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_default()
    }

    /// Squared Euclidean norm of the coefficient vector.
    pub fn norm_sq(&self) -> BigInt {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Largest bit length among the coefficients.
    pub fn max_bits(&self) -> u64 {
        self.coeffs.iter().map(|c| c.bits()).max().unwrap_or(0)
    }
}

pub fn poly_add(a: &IntPolynomial, b: &IntPolynomial) -> IntPolynomial {
    let n = a.coeffs.len().max(b.coeffs.len());
    IntPolynomial::new((0..n).map(|i| a.coeff(i) + b.coeff(i)).collect())
}

pub fn poly_sub(a: &IntPolynomial, b: &IntPolynomial) -> IntPolynomial {
    let n = a.coeffs.len().max(b.coeffs.len());
    IntPolynomial::new((0..n).map(|i| a.coeff(i) - b.coeff(i)).collect())
}

/// Exact product (schoolbook).
pub fn poly_mul(a: &IntPolynomial, b: &IntPolynomial) -> IntPolynomial {
    if a.is_zero() || b.is_zero() {
        return IntPolynomial::zero();
    }
    let mut out = vec![BigInt::zero(); a.coeffs.len() + b.coeffs.len() - 1];
    for (i, x) in a.coeffs.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.coeffs.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    IntPolynomial::new(out)
}

/// Exact quotient `a / b` over the integers.
///
/// Fails with [`Error::NotDivisible`] if the remainder is nonzero or some
/// quotient coefficient is not an integer.
pub fn poly_divexact(a: &IntPolynomial, b: &IntPolynomial) -> Result<IntPolynomial> {
    let db = b.degree().ok_or(Error::ZeroPolynomial)?;
    let Some(da) = a.degree() else {
        return Ok(IntPolynomial::zero());
    };
    if da < db {
        return Err(Error::NotDivisible);
    }
    let lead = &b.coeffs[db];
    let mut rem = a.coeffs.clone();
    let mut quot = vec![BigInt::zero(); da - db + 1];
    for k in (0..=da - db).rev() {
        let top = &rem[k + db];
        if top.is_zero() {
            continue;
        }
        let (q, r) = top.div_rem(lead);
        if !r.is_zero() {
            return Err(Error::NotDivisible);
        }
        for (j, bc) in b.coeffs.iter().enumerate() {
            if !bc.is_zero() {
                rem[k + j] -= &q * bc;
            }
        }
        quot[k] = q;
    }
    if rem.iter().any(|c| !c.is_zero()) {
        return Err(Error::NotDivisible);
    }
    Ok(IntPolynomial::new(quot))
}

/// Remainder of `c * a` by `b` for a nonzero integer `c` dividing a power of
/// `lc(b)`. Each step scales only by the cofactor of the gcd of the leading terms.
pub fn pseudo_rem(a: &IntPolynomial, b: &IntPolynomial) -> Result<IntPolynomial> {
    let db = b.degree().ok_or(Error::ZeroPolynomial)?;
    let lead = &b.coeffs[db];
    let mut r = a.coeffs.clone();
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let top = r[dr].clone();
        let g = top.gcd(lead);
        let mul_r = lead / &g;
        let mul_b = &top / &g;
        if !mul_r.is_one() {
            for c in r.iter_mut() {
                *c *= &mul_r;
            }
        }
        let off = dr - db;
        for (j, bc) in b.coeffs.iter().enumerate() {
            r[off + j] -= &mul_b * bc;
        }
        while r.last().is_some_and(Zero::is_zero) {
            r.pop();
        }
    }
    Ok(IntPolynomial::new(r))
}

/// Content (positive gcd of the coefficients) and primitive part.
pub fn content_primitive(p: &IntPolynomial) -> Result<(BigInt, IntPolynomial)> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let content = p.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    let prim = IntPolynomial::new(p.coeffs.iter().map(|c| c / &content).collect());
    Ok((content, prim))
}

fn primitive(p: &IntPolynomial) -> IntPolynomial {
    content_primitive(p).map(|(_, q)| q).unwrap_or_default()
}

/// Greatest common divisor over `Z[x]`, normalised to a positive leading
/// coefficient. Uses the primitive-part Euclidean remainder sequence.
pub fn poly_gcd(a: &IntPolynomial, b: &IntPolynomial) -> IntPolynomial {
    if a.is_zero() {
        return b.clone().with_positive_leading();
    }
    if b.is_zero() {
        return a.clone().with_positive_leading();
    }
    let (ca, mut pa) = content_primitive(a).expect("nonzero");
    let (cb, mut pb) = content_primitive(b).expect("nonzero");
    let c = ca.gcd(&cb);
    if pa.degree() < pb.degree() {
        std::mem::swap(&mut pa, &mut pb);
    }
    loop {
        if pb.is_constant() {
            return IntPolynomial::constant(c);
        }
        let r = pseudo_rem(&pa, &pb).expect("nonzero divisor");
        if r.is_zero() {
            return pb.scale(&c).with_positive_leading();
        }
        pa = pb;
        pb = primitive(&r);
    }
}

/// True when `gcd(p, p')` is constant.
pub fn is_squarefree(p: &IntPolynomial) -> bool {
    match p.degree() {
        None => false,
        Some(0) => true,
        Some(_) => poly_gcd(p, &p.derivative()).is_constant(),
    }
}

/// Primitive squarefree polynomial with the same roots as `p`.
pub fn squarefree_part(p: &IntPolynomial) -> Result<IntPolynomial> {
    let (_, prim) = content_primitive(p)?;
    if prim.is_constant() {
        return Ok(prim.with_positive_leading());
    }
    let g = poly_gcd(&prim, &prim.derivative());
    let q = poly_divexact(&prim, &primitive(&g))?;
    Ok(primitive(&q).with_positive_leading())
}

/// Squarefree decomposition `p = c * prod a_i^i` (Yun). Returns the
/// nonconstant primitive factors `a_i` together with their multiplicity `i`.
pub fn squarefree_decomposition(p: &IntPolynomial) -> Result<Vec<(IntPolynomial, usize)>> {
    let (_, prim) = content_primitive(p)?;
    if prim.is_constant() {
        return Ok(Vec::new());
    }
    let dp = prim.derivative();
    let a0 = poly_gcd(&prim, &dp);
    let a0 = primitive(&a0);
    let mut b = poly_divexact(&prim, &a0)?;
    let mut c = poly_divexact(&dp, &a0)?;
    let mut d = poly_sub(&c, &b.derivative());
    let mut out = Vec::new();
    let mut mult = 1;
    while !b.is_constant() {
        let a = if d.is_zero() {
            primitive(&b)
        } else {
            primitive(&poly_gcd(&b, &d))
        };
        let next_b = poly_divexact(&b, &a)?;
        c = poly_divexact(&d, &a)?;
        if !a.is_constant() {
            out.push((a.with_positive_leading(), mult));
        }
        b = next_b;
        d = poly_sub(&c, &b.derivative());
        mult += 1;
    }
    Ok(out)
}

/// The `m`-th cyclotomic polynomial, by dividing `x^m - 1` by `Φ_d` for the
/// proper divisors `d` of `m`.
pub fn cyclotomic(m: u64) -> IntPolynomial {
    assert!(m >= 1, "cyclotomic index must be positive");
    let mut cache = HashMap::new();
    cyclotomic_cached(m, &mut cache)
}

fn cyclotomic_cached(m: u64, cache: &mut HashMap<u64, IntPolynomial>) -> IntPolynomial {
    if let Some(p) = cache.get(&m) {
        return p.clone();
    }
    let mut p = IntPolynomial::x_pow_minus_one(m as usize);
    for d in divisors(m) {
        if d == m {
            continue;
        }
        let phi_d = cyclotomic_cached(d, cache);
        p = poly_divexact(&p, &phi_d).expect("cyclotomic cascade divides exactly");
    }
    cache.insert(m, p.clone());
    p
}

/// Positive divisors of `m` in increasing order.
pub fn divisors(m: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= m {
        if m.is_multiple_of(d) {
            small.push(d);
            if d * d != m {
                large.push(m / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// `p(1 - x^n)`, exact.
pub fn compose_shift_power(p: &IntPolynomial, n: usize) -> IntPolynomial {
    assert!(n >= 1, "exponent must be positive");
    // Horner in (1 - y), then y -> x^n.
    let one_minus_y = IntPolynomial::from_i64(&[1, -1]);
    let mut acc = IntPolynomial::zero();
    for c in p.coeffs.iter().rev() {
        acc = poly_add(
            &poly_mul(&acc, &one_minus_y),
            &IntPolynomial::constant(c.clone()),
        );
    }
    if n == 1 || acc.is_zero() {
        return acc;
    }
    let deg = acc.degree().unwrap_or(0);
    let mut coeffs = vec![BigInt::zero(); deg * n + 1];
    for (i, c) in acc.coeffs.into_iter().enumerate() {
        coeffs[i * n] = c;
    }
    IntPolynomial::new(coeffs)
}

/// Converts a big integer to `f64 * 2^-shift` without overflowing when the
/// integer itself is far outside the `f64` range.
pub fn bigint_to_f64_scaled(c: &BigInt, shift: i64) -> f64 {
    let bits = c.bits() as i64;
    if bits <= 1000 {
        return ldexp(c.to_f64().unwrap_or(0.0), -shift);
    }
    let drop = bits - 64;
    let top: BigInt = c >> drop as usize;
    ldexp(top.to_f64().unwrap_or(0.0), drop - shift)
}

/// `x * 2^e`, applied in steps that never overflow the intermediate factor.
pub fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

impl Add for &IntPolynomial {
    type Output = IntPolynomial;
    fn add(self, rhs: Self) -> IntPolynomial {
        poly_add(self, rhs)
    }
}

impl Sub for &IntPolynomial {
    type Output = IntPolynomial;
    fn sub(self, rhs: Self) -> IntPolynomial {
        poly_sub(self, rhs)
    }
}

impl Mul for &IntPolynomial {
    type Output = IntPolynomial;
    fn mul(self, rhs: Self) -> IntPolynomial {
        poly_mul(self, rhs)
    }
}

impl Neg for IntPolynomial {
    type Output = IntPolynomial;
    fn neg(self) -> IntPolynomial {
        IntPolynomial {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl fmt::Debug for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntPolynomial({self})")
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let unit = mag.is_one();
            match i {
                0 => write!(f, "{mag}")?,
                1 if unit => write!(f, "x")?,
                1 => write!(f, "{mag}*x")?,
                _ if unit => write!(f, "x^{i}")?,
                _ => write!(f, "{mag}*x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for IntPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        strings.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let strings = Vec::<String>::deserialize(d)?;
        let coeffs = strings
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(D::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(IntPolynomial::new(coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64(c)
    }

    #[test]
    fn mul_examples() {
        assert_eq!(poly_mul(&p(&[1, 1]), &p(&[-1, 1])), p(&[-1, 0, 1]));
        let a = p(&[3, -2, 7]);
        assert_eq!(poly_mul(&a, &IntPolynomial::one()), a);
        // (x^2 + x + 1)(x - 1) = x^3 - 1, expanded by hand.
        assert_eq!(poly_mul(&cyclotomic(3), &p(&[-1, 1])), p(&[-1, 0, 0, 1]));
    }

    #[test]
    fn divexact_examples() {
        assert_eq!(
            poly_divexact(&p(&[-1, 0, 1]), &p(&[-1, 1])).unwrap(),
            p(&[1, 1])
        );
        assert_eq!(
            poly_divexact(&p(&[1, 0, 1]), &p(&[-1, 1])),
            Err(Error::NotDivisible)
        );
        // Integral remainder zero but fractional quotient.
        assert_eq!(
            poly_divexact(&p(&[2, 1]), &p(&[1, 2])),
            Err(Error::NotDivisible)
        );
        assert_eq!(
            poly_divexact(&p(&[1]), &IntPolynomial::zero()),
            Err(Error::ZeroPolynomial)
        );
    }

    #[test]
    fn divexact_cyclotomic_105_cofactor() {
        // Oracle: the cofactor is the product of Φ_d over the proper divisors.
        let phi = cyclotomic(105);
        let cof = poly_divexact(&IntPolynomial::x_pow_minus_one(105), &phi).unwrap();
        assert_eq!(cof.degree(), Some(57));
        let mut prod = IntPolynomial::one();
        for d in [1, 3, 5, 7, 15, 21, 35] {
            prod = poly_mul(&prod, &cyclotomic(d));
        }
        assert_eq!(cof, prod);
        assert_eq!(poly_mul(&cof, &phi), IntPolynomial::x_pow_minus_one(105));
    }

    #[test]
    fn content_examples() {
        let (c, q) = content_primitive(&p(&[2, 4, 6])).unwrap();
        assert_eq!((c, q), (BigInt::from(2), p(&[1, 2, 3])));
        let (c, q) = content_primitive(&p(&[-1, -1, 1])).unwrap();
        assert_eq!((c, q), (BigInt::from(1), p(&[-1, -1, 1])));
        let (c, q) = content_primitive(&p(&[-10, 0, 0, 15])).unwrap();
        assert_eq!((c, q), (BigInt::from(5), p(&[-2, 0, 0, 3])));
        assert_eq!(
            content_primitive(&IntPolynomial::zero()),
            Err(Error::ZeroPolynomial)
        );
    }

    #[test]
    fn squarefree_examples() {
        assert_eq!(squarefree_part(&p(&[1, -2, 1])).unwrap(), p(&[-1, 1]));
        assert_eq!(
            squarefree_part(&p(&[0, -1, 0, 1])).unwrap(),
            p(&[0, -1, 0, 1])
        );
        // (x^2+1)^2 (x-2) -> (x^2+1)(x-2) = x^3 - 2x^2 + x - 2
        let f = poly_mul(&p(&[1, 0, 1]).pow(2), &p(&[-2, 1]));
        assert_eq!(squarefree_part(&f).unwrap(), p(&[-2, 1, -2, 1]));
        assert_eq!(
            squarefree_part(&IntPolynomial::zero()),
            Err(Error::ZeroPolynomial)
        );
    }

    #[test]
    fn yun_recovers_multiplicities() {
        let a = p(&[1, 0, 1]);
        let b = p(&[-2, 1]);
        let c = p(&[1, 1, 1]);
        let f = poly_mul(&poly_mul(&a, &b.pow(2)), &c.pow(3)).scale(&BigInt::from(6));
        let dec = squarefree_decomposition(&f).unwrap();
        assert_eq!(dec, vec![(a, 1), (b, 2), (c, 3)]);
    }

    #[test]
    fn cyclotomic_examples() {
        assert_eq!(cyclotomic(1), p(&[-1, 1]));
        assert_eq!(cyclotomic(3), p(&[1, 1, 1]));
        let c105 = cyclotomic(105);
        assert_eq!(c105.degree(), Some(48));
        assert_eq!(c105.coeff(7), BigInt::from(-2));
    }

    #[test]
    fn compose_examples() {
        assert_eq!(compose_shift_power(&p(&[0, 1]), 1), p(&[1, -1]));
        assert_eq!(compose_shift_power(&cyclotomic(3), 1), p(&[3, -3, 1]));
        assert_eq!(compose_shift_power(&cyclotomic(3), 2), p(&[3, 0, -3, 0, 1]));
    }

    #[test]
    fn json_round_trip_uses_strings() {
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        let f = IntPolynomial::new(vec![BigInt::from(-3), BigInt::zero(), big]);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"["-3","0","123456789012345678901234567890"]"#);
        let back: IntPolynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn display_format() {
        assert_eq!(p(&[-2, 0, 3, -1]).to_string(), "-x^3 + 3*x^2 - 2");
        assert_eq!(IntPolynomial::zero().to_string(), "0");
    }

    #[test]
    fn scaled_conversion_of_huge_integers() {
        let big = BigInt::from(3) << 2000usize;
        let v = bigint_to_f64_scaled(&big, 2000);
        assert!((v - 3.0).abs() < 1e-12);
        assert_eq!(bigint_to_f64_scaled(&BigInt::from(5), 0), 5.0);
    }
}
