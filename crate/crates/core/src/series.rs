//! Truncated formal power series with exact rational coefficients.
//!
//! A [`FormalSeries`] is a series in `w = q^(1/g)` where `g` is its grain.
//! Coefficients are known exactly for every exponent up to and including
//! the truncation order; beyond that they are unknown. Arithmetic tracks
//! the order pessimistically so a result never claims a coefficient that
//! its operands could not determine.
//!
//! Eta quotients and the weight-4 Eisenstein series live here too, since
//! both are just particular exact expansions.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalSeries {
    grain: u32,
    /// Exponent of `coeffs[0]`. Every exponent below it has coefficient zero.
    offset: i64,
    coeffs: Vec<BigRational>,
    /// Largest exponent whose coefficient is known.
    order: i64,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn known_len(offset: i64, order: i64) -> usize {
    if order < offset {
        0
    } else {
        (order - offset + 1) as usize
    }
}

/// Product of two coefficient vectors, keeping the first `len` entries.
fn mul_trunc(a: &[BigRational], b: &[BigRational], len: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); len];
    for (i, ai) in a.iter().enumerate().take(len) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(len - i) {
            if !bj.is_zero() {
                out[i + j] += ai * bj;
            }
        }
    }
    out
}

/// Inverse of a unit power series `a[0] + a[1] x + ...`, first `len` terms.
fn inv_trunc(a: &[BigRational], len: usize) -> Vec<BigRational> {
    let inv0 = a[0].recip();
    let mut out: Vec<BigRational> = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    out.push(inv0.clone());
    for n in 1..len {
        let mut acc = BigRational::zero();
        for i in 1..=n.min(a.len() - 1) {
            if !a[i].is_zero() {
                acc += &a[i] * &out[n - i];
            }
        }
        out.push(-acc * &inv0);
    }
    out
}

impl FormalSeries {
    /// Builds a series from coefficients starting at exponent `offset`,
    /// known through exponent `order`. Missing entries up to `order` are
    /// exact zeros (the input is treated as a polynomial); surplus entries
    /// beyond `order` are dropped.
    pub fn from_coeffs(grain: u32, offset: i64, mut coeffs: Vec<BigRational>, order: i64) -> Self {
        assert!(grain > 0, "grain must be positive");
        coeffs.resize(known_len(offset, order), BigRational::zero());
        let mut s = FormalSeries {
            grain,
            offset,
            coeffs,
            order,
        };
        s.normalize();
        s
    }

    pub fn from_integers(grain: u32, offset: i64, coeffs: &[i64], order: i64) -> Self {
        Self::from_coeffs(grain, offset, coeffs.iter().map(|&c| rat(c)).collect(), order)
    }

    pub fn zero(grain: u32, order: i64) -> Self {
        Self::from_coeffs(grain, 0, Vec::new(), order)
    }

    pub fn one(grain: u32, order: i64) -> Self {
        Self::monomial(grain, 0, BigRational::one(), order)
    }

    /// The series variable `w` itself.
    pub fn var(grain: u32, order: i64) -> Self {
        Self::monomial(grain, 1, BigRational::one(), order)
    }

    pub fn monomial(grain: u32, exponent: i64, coeff: BigRational, order: i64) -> Self {
        Self::from_coeffs(grain, exponent, vec![coeff], order)
    }

    pub fn grain(&self) -> u32 {
        self.grain
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    /// Lowest exponent with a known nonzero coefficient.
    pub fn valuation(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.offset)
        }
    }

    /// Coefficient of `w^exponent`, or `None` past the truncation order.
    pub fn coeff(&self, exponent: i64) -> Option<BigRational> {
        if exponent > self.order {
            None
        } else if exponent < self.offset {
            Some(BigRational::zero())
        } else {
            Some(self.coeffs[(exponent - self.offset) as usize].clone())
        }
    }

    /// Known `(exponent, coefficient)` pairs from `from` through the order.
    pub fn terms_from(&self, from: i64) -> Vec<(i64, BigRational)> {
        (from..=self.order)
            .map(|e| (e, self.coeff(e).unwrap_or_default()))
            .collect()
    }

    fn normalize(&mut self) {
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.offset += lead as i64;
        }
        if self.coeffs.is_empty() {
            self.offset = self.order + 1;
        }
    }

    /// Dense coefficients for exponents `from..=to`, zero below the offset.
    fn window(&self, from: i64, to: i64) -> Vec<BigRational> {
        (from..=to)
            .map(|e| {
                if e < self.offset || e > self.order {
                    BigRational::zero()
                } else {
                    self.coeffs[(e - self.offset) as usize].clone()
                }
            })
            .collect()
    }

    pub fn truncate(&self, order: i64) -> Self {
        let order = order.min(self.order);
        let coeffs = self.window(self.offset, order);
        Self::from_coeffs(self.grain, self.offset, coeffs, order)
    }

    /// Re-expresses the series at another grain. Refining (new grain a
    /// multiple of the old) always works; coarsening requires every nonzero
    /// exponent to be divisible by the ratio.
    pub fn to_grain(&self, grain: u32) -> Result<Self> {
        if grain == self.grain {
            return Ok(self.clone());
        }
        if grain % self.grain == 0 {
            let f = (grain / self.grain) as i64;
            let order = (self.order + 1) * f - 1;
            let offset = self.offset * f;
            let mut coeffs = vec![BigRational::zero(); known_len(offset, order)];
            for (i, c) in self.coeffs.iter().enumerate() {
                coeffs[i * f as usize] = c.clone();
            }
            return Ok(Self::from_coeffs(grain, offset, coeffs, order));
        }
        if self.grain % grain == 0 {
            let f = (self.grain / grain) as i64;
            for (i, c) in self.coeffs.iter().enumerate() {
                if !c.is_zero() && (self.offset + i as i64).rem_euclid(f) != 0 {
                    return Err(Error::GrainMismatch(self.grain, grain));
                }
            }
            let order = self.order.div_euclid(f);
            let offset = -(-self.offset).div_euclid(f);
            let coeffs = (offset..=order)
                .map(|e| self.coeff(e * f).unwrap_or_default())
                .collect();
            return Ok(Self::from_coeffs(grain, offset, coeffs, order));
        }
        Err(Error::GrainMismatch(self.grain, grain))
    }

    fn common(&self, other: &Self) -> Result<(Self, Self)> {
        let g = self.grain.lcm(&other.grain);
        Ok((self.to_grain(g)?, other.to_grain(g)?))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.common(other)?;
        let order = a.order.min(b.order);
        let offset = a.offset.min(b.offset);
        let coeffs = a
            .window(offset, order)
            .into_iter()
            .zip(b.window(offset, order))
            .map(|(x, y)| x + y)
            .collect();
        Ok(Self::from_coeffs(a.grain, offset, coeffs, order))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&rat(-1))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let coeffs = self.coeffs.iter().map(|x| x * c).collect();
        Self::from_coeffs(self.grain, self.offset, coeffs, self.order)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.common(other)?;
        let order = (a.order + b.offset).min(b.order + a.offset);
        let offset = a.offset + b.offset;
        let len = known_len(offset, order);
        let coeffs = mul_trunc(&a.coeffs, &b.coeffs, len);
        Ok(Self::from_coeffs(a.grain, offset, coeffs, order))
    }

    /// Multiplicative inverse. The result keeps the operand's relative
    /// precision: `w^v (a0 + ...)` known through `N` inverts to a series
    /// known through `N - 2v`.
    pub fn inverse(&self) -> Result<Self> {
        let v = self.valuation().ok_or(Error::NotInvertible)?;
        let len = self.coeffs.len();
        let coeffs = inv_trunc(&self.coeffs, len);
        Ok(Self::from_coeffs(
            self.grain,
            -v,
            coeffs,
            -v + len as i64 - 1,
        ))
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        if e < 0 {
            return self.inverse()?.pow(-e);
        }
        let v = self.valuation().ok_or(Error::NotInvertible);
        if e == 0 {
            let rel = match v {
                Ok(v) => self.order - v,
                Err(_) => self.order,
            };
            return Ok(Self::one(self.grain, rel));
        }
        let mut result: Option<Self> = None;
        let mut base = self.clone();
        let mut n = e;
        while n > 0 {
            if n & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.mul(&base)?,
                });
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result.expect("e > 0"))
    }

    /// Applies `q d/dq`, which scales the coefficient of `w^n` by `n/g`.
    pub fn theta(&self) -> Self {
        let g = rat(self.grain as i64);
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * rat(self.offset + i as i64) / &g)
            .collect();
        Self::from_coeffs(self.grain, self.offset, coeffs, self.order)
    }

    /// Substitutes `inner` for the variable of `self`.
    ///
    /// `self` is read as a power series in an abstract variable; the result
    /// is expressed in the variable and grain of `inner`, which must have
    /// positive valuation.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if self.offset < 0 || inner.offset < 1 || inner.order < 1 {
            return Err(Error::CompositionPrecondition);
        }
        let v = inner.offset;
        let n_max = self.order;
        let mut cap = v * (n_max + 1) - 1;
        if let Some(first) = (1..=n_max).find(|&n| !self.coeff(n).unwrap_or_default().is_zero()) {
            cap = cap.min(inner.order + (first - 1) * v);
        }
        let len = (cap + 1) as usize;
        let u = inner.window(0, cap);
        let mut acc = vec![BigRational::zero(); len];
        acc[0] = self.coeff(0).unwrap_or_default();
        let mut power = vec![BigRational::zero(); len];
        power[0] = BigRational::one();
        for n in 1..=n_max {
            if n * v > cap {
                break;
            }
            power = mul_trunc(&power, &u, len);
            let a = self.coeff(n).unwrap_or_default();
            if a.is_zero() {
                continue;
            }
            for (slot, p) in acc.iter_mut().zip(&power) {
                if !p.is_zero() {
                    *slot += &a * p;
                }
            }
        }
        Ok(Self::from_coeffs(inner.grain, 0, acc, cap))
    }

    /// Compositional inverse: the series `r` with `self(r(w)) = w`.
    pub fn reversion(&self) -> Result<Self> {
        let zero_const = self.coeff(0).map(|c| c.is_zero()).unwrap_or(false);
        let a1 = self.coeff(1).unwrap_or_default();
        if !zero_const || self.offset < 1 || a1.is_zero() {
            return Err(Error::ReversionPrecondition);
        }
        let n_max = self.order;
        // h(z) = s(z)/z, known through z^(N-1); phi = 1/h.
        let h = self.window(1, n_max);
        let len = n_max as usize;
        let phi = inv_trunc(&h, len);
        let mut coeffs = vec![BigRational::zero(); len + 1];
        let mut power = vec![BigRational::zero(); len];
        power[0] = BigRational::one();
        for n in 1..=len {
            power = mul_trunc(&power, &phi, len);
            coeffs[n] = &power[n - 1] / rat(n as i64);
        }
        Ok(Self::from_coeffs(self.grain, 0, coeffs, n_max))
    }

    /// Exact structural equality of the coefficients both operands know.
    /// Returns the first exponent where they differ.
    pub fn first_mismatch(&self, other: &Self) -> Result<Option<i64>> {
        let (a, b) = self.common(other)?;
        let order = a.order.min(b.order);
        let from = a.offset.min(b.offset).min(order + 1);
        Ok((from..=order).find(|&e| a.coeff(e) != b.coeff(e)))
    }

    /// Numeric value at a complex point of the series variable.
    pub fn eval(&self, w: num_complex::Complex64) -> num_complex::Complex64 {
        use num_traits::ToPrimitive;
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * w + c.to_f64().unwrap_or(f64::NAN);
        }
        acc * w.powi(self.offset as i32)
    }
}

impl fmt::Display for FormalSeries {
    /// Renders as `c0 + c1·q^(a1) + ... + O(q^(a))` with `q`-exponents as
    /// reduced fractions.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.grain as i64;
        let exp = |e: i64| {
            let r = Ratio::new(e, g);
            if r.is_integer() {
                format!("{}", r.to_integer())
            } else {
                format!("{}/{}", r.numer(), r.denom())
            }
        };
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = self.offset + i as i64;
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            if e == 0 {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "q^({})", exp(e))?;
            } else {
                write!(f, "{a}·q^({})", exp(e))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(q^({}))", exp(self.order + 1))
    }
}

/// A product `∏ η(jτ)^e` described by its `(j, e)` factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtaQuotientSpec {
    pub factors: Vec<(u32, i32)>,
}

impl EtaQuotientSpec {
    pub fn new(factors: &[(u32, i32)]) -> Self {
        EtaQuotientSpec {
            factors: factors.to_vec(),
        }
    }

    /// Exponent of the leading power of `q`, `Σ j·e / 24`.
    pub fn leading_exponent(&self) -> Ratio<i64> {
        let num: i64 = self.factors.iter().map(|&(j, e)| j as i64 * e as i64).sum();
        Ratio::new(num, 24)
    }

    /// Leading exponent measured in `w = q^(1/grain)`.
    pub fn leading_exponent_at(&self, grain: u32) -> Result<i64> {
        let l = self.leading_exponent() * Ratio::from_integer(grain as i64);
        if l.is_integer() {
            Ok(l.to_integer())
        } else {
            Err(Error::NonIntegralExponent {
                numer: *l.numer(),
                denom: *l.denom(),
                grain,
            })
        }
    }
}

/// Integer coefficients of `∏_j ∏_{n≥1} (1 - q^{jn})^{e_j}` through `q^m`.
pub(crate) fn eta_product_integers(spec: &EtaQuotientSpec, m: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::zero(); m + 1];
    c[0] = BigInt::one();
    for &(j, e) in &spec.factors {
        let j = j as usize;
        let mut stride = j;
        while stride <= m {
            for _ in 0..e.unsigned_abs() {
                if e > 0 {
                    for i in (stride..=m).rev() {
                        let t = c[i - stride].clone();
                        c[i] -= t;
                    }
                } else {
                    for i in stride..=m {
                        let t = c[i - stride].clone();
                        c[i] += t;
                    }
                }
            }
            stride += j;
        }
    }
    c
}

/// Exact expansion of an eta quotient in `w = q^(1/grain)` through `w^order`.
pub fn eta_quotient_expansion(spec: &EtaQuotientSpec, grain: u32, order: i64) -> Result<FormalSeries> {
    let lead = spec.leading_exponent_at(grain)?;
    let g = grain as i64;
    if order < lead {
        return Ok(FormalSeries::from_coeffs(grain, lead, Vec::new(), order));
    }
    let m = ((order - lead) / g) as usize;
    let ints = eta_product_integers(spec, m);
    let mut coeffs = vec![BigRational::zero(); (order - lead + 1) as usize];
    for (i, c) in ints.into_iter().enumerate() {
        coeffs[i * grain as usize] = BigRational::from_integer(c);
    }
    Ok(FormalSeries::from_coeffs(grain, lead, coeffs, order))
}

/// Sum of cubes of the divisors of `n`.
pub fn sigma3(n: u64) -> u64 {
    assert!(n >= 1, "sigma3 is defined for n >= 1");
    let mut s = 0u64;
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            s += d.pow(3);
            let e = n / d;
            if e != d {
                s += e.pow(3);
            }
        }
        d += 1;
    }
    s
}

/// `E4(q^scale) = 1 + 240 Σ σ3(n) q^(scale·n)` through `q^order`.
pub fn e4_scaled(scale: u32, order: i64) -> FormalSeries {
    let len = order.max(-1) + 1;
    let mut coeffs = vec![BigRational::zero(); len as usize];
    if len > 0 {
        coeffs[0] = BigRational::one();
    }
    let s = scale as i64;
    let mut n = 1;
    while n * s <= order {
        coeffs[(n * s) as usize] = rat(240 * sigma3(n as u64) as i64);
        n += 1;
    }
    FormalSeries::from_coeffs(1, 0, coeffs, order)
}

/// `E4(q) = 1 + 240 Σ σ3(n) qⁿ` through `q^order`.
pub fn e4_expansion(order: i64) -> FormalSeries {
    e4_scaled(1, order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(s: &FormalSeries, from: i64, to: i64) -> Vec<i64> {
        use num_traits::ToPrimitive;
        (from..=to)
            .map(|e| {
                let c = s.coeff(e).expect("within order");
                assert!(c.is_integer(), "coefficient {c} at {e} not integral");
                c.to_integer().to_i64().unwrap()
            })
            .collect()
    }

    #[test]
    fn geometric_inverse() {
        let one_minus_w = FormalSeries::from_integers(1, 0, &[1, -1], 12);
        let geo = one_minus_w.pow(-1).unwrap();
        assert_eq!(ints(&geo, 0, 12), vec![1; 13]);
        let prod = one_minus_w.mul(&geo).unwrap();
        assert_eq!(prod, FormalSeries::one(1, 12));
    }

    #[test]
    fn euler_pentagonal_signs() {
        let prod = eta_product_integers(&EtaQuotientSpec::new(&[(1, 1)]), 12);
        let expected: [i64; 13] = [1, -1, -1, 0, 0, 1, 0, 1, 0, 0, 0, 0, -1];
        let got: Vec<i64> = prod.iter().map(|c| c.try_into().unwrap()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn reversion_of_identity_and_quadratic() {
        let w = FormalSeries::var(1, 8);
        assert_eq!(w.reversion().unwrap(), w);
        let s = FormalSeries::from_integers(1, 1, &[1, 1], 8);
        let r = s.reversion().unwrap();
        // Catalan numbers with alternating signs.
        assert_eq!(ints(&r, 1, 6), vec![1, -1, 2, -5, 14, -42]);
        assert_eq!(s.compose(&r).unwrap().first_mismatch(&FormalSeries::var(1, 8)).unwrap(), None);
    }

    #[test]
    fn reversion_rejects_bad_input() {
        let constant = FormalSeries::from_integers(1, 0, &[1, 1], 5);
        assert!(matches!(constant.reversion(), Err(Error::ReversionPrecondition)));
        let no_linear = FormalSeries::from_integers(1, 2, &[1], 5);
        assert!(matches!(no_linear.reversion(), Err(Error::ReversionPrecondition)));
    }

    #[test]
    fn inverse_of_zero_fails() {
        let z = FormalSeries::zero(1, 5);
        assert!(matches!(z.inverse(), Err(Error::NotInvertible)));
        assert!(matches!(z.pow(-2), Err(Error::NotInvertible)));
    }

    #[test]
    fn truncation_order_propagates() {
        let a = FormalSeries::from_integers(1, 0, &[1, 2, 3], 10);
        let b = FormalSeries::from_integers(1, 1, &[1, 1], 4);
        assert_eq!(a.add(&b).unwrap().order(), 4);
        // (1 + ...)(w + ...): known through min(10 + 1, 4 + 0)
        assert_eq!(a.mul(&b).unwrap().order(), 4);
        assert_eq!(b.mul(&b).unwrap().order(), 5);
        assert!(a.mul(&b).unwrap().coeff(5).is_none());
        // w^{-1} known through 4 - 2 = 2
        assert_eq!(b.inverse().unwrap().order(), 2);
    }

    #[test]
    fn grain_conversion() {
        let q = FormalSeries::from_integers(1, 0, &[1, 3, 5], 2);
        let w = q.to_grain(2).unwrap();
        assert_eq!(w.order(), 5);
        assert_eq!(w.coeff(2), Some(rat(3)));
        assert_eq!(w.coeff(3), Some(rat(0)));
        assert_eq!(w.to_grain(1).unwrap(), q);
        let odd = FormalSeries::var(2, 4);
        assert!(matches!(odd.to_grain(1), Err(Error::GrainMismatch(2, 1))));
        assert!(matches!(odd.to_grain(3), Err(Error::GrainMismatch(2, 3))));
        // mixed grains meet at the lcm
        let sum = odd.add(&FormalSeries::var(3, 4)).unwrap();
        assert_eq!(sum.grain(), 6);
        assert_eq!(sum.coeff(3), Some(rat(1)));
        assert_eq!(sum.coeff(2), Some(rat(1)));
    }

    #[test]
    fn eta_leading_exponents() {
        let p_t = EtaQuotientSpec::new(&[(1, 6), (6, 6), (2, -6), (3, -6)]);
        let s = eta_quotient_expansion(&p_t, 2, 7).unwrap();
        assert_eq!(ints(&s, 0, 7), vec![0, 1, 0, -6, 0, 15, 0, -20]);

        let g_p = EtaQuotientSpec::new(&[(1, 1), (2, 1), (3, 1), (6, 1)]);
        assert_eq!(eta_quotient_expansion(&g_p, 2, 5).unwrap().valuation(), Some(1));
        assert!(matches!(
            eta_quotient_expansion(&g_p, 1, 5),
            Err(Error::NonIntegralExponent { numer: 1, denom: 2, grain: 1 })
        ));

        let q_t = EtaQuotientSpec::new(&[(3, 4), (12, 8), (2, 12), (1, -4), (4, -8), (6, -12)]);
        assert_eq!(q_t.leading_exponent(), Ratio::from_integer(1));
        let s = eta_quotient_expansion(&q_t, 1, 4).unwrap();
        assert_eq!(s.valuation(), Some(1));
        assert_eq!(s.coeff(1), Some(rat(1)));
    }

    #[test]
    fn sigma3_values() {
        assert_eq!(sigma3(1), 1);
        assert_eq!(sigma3(2), 9);
        assert_eq!(sigma3(6), 252);
        assert_eq!(sigma3(10), 1134);
    }

    #[test]
    fn sigma3_multiplicative() {
        for m in 1..=1000u64 {
            for n in 1..=1000 / m {
                if m.gcd(&n) == 1 {
                    assert_eq!(sigma3(m * n), sigma3(m) * sigma3(n), "m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn e4_coefficients() {
        let e4 = e4_expansion(10);
        assert_eq!(e4.coeff(0), Some(rat(1)));
        assert_eq!(e4.coeff(4), Some(rat(240 * 73)));
        assert_eq!(e4.coeff(10), Some(rat(240 * 1134)));
        let e4_2 = e4_scaled(2, 6);
        assert_eq!(ints(&e4_2, 0, 6), vec![1, 0, 240, 0, 2160, 0, 6720]);
    }

    #[test]
    fn single_eta_matches_euler_product() {
        // η(τ) at grain 24 is w ∏(1 - w^{24 n}); compare with the product
        // expanded by repeated multiplication of explicit factors.
        let eta = eta_quotient_expansion(&EtaQuotientSpec::new(&[(1, 1)]), 24, 1 + 24 * 50).unwrap();
        let mut direct = FormalSeries::one(1, 50);
        for n in 1..=50 {
            let mut c = vec![0i64; n + 1];
            c[0] = 1;
            c[n] = -1;
            direct = direct.mul(&FormalSeries::from_integers(1, 0, &c, 50)).unwrap();
        }
        let shifted = direct
            .to_grain(24)
            .unwrap()
            .mul(&FormalSeries::var(24, 24 * 51))
            .unwrap();
        assert!(shifted.order() >= eta.order());
        assert_eq!(eta.first_mismatch(&shifted).unwrap(), None);
    }

    #[test]
    fn theta_scales_by_exponent_over_grain() {
        let s = FormalSeries::from_integers(2, -1, &[1, 0, 4], 3);
        let d = s.theta();
        assert_eq!(d.coeff(-1), Some(Ratio::new(BigInt::from(-1), BigInt::from(2))));
        assert_eq!(d.coeff(1), Some(rat(2)));
    }

    #[test]
    fn display_uses_q_exponents() {
        let s = FormalSeries::from_integers(2, -1, &[-1, 0, 4], 1);
        assert_eq!(s.to_string(), "-q^(-1/2) + 4·q^(1/2) + O(q^(1))");
    }
}
