//! Direct numerical Mahler measure over the torus, independent of the
//! modular machinery.
//!
//! The polynomial is viewed as a quadratic in `Z` with coefficients in
//! `X, Y`; Jensen's formula integrates out `Z` exactly and the remaining
//! `(x, y)` torus is handled by a midpoint rule.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use log::warn;
use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mahler::{MeasureResult, Method};
use crate::modular::Family;

pub type Exponent = (i32, i32, i32);

/// A Laurent polynomial in `X, Y, Z` with rational coefficients. `Z` is the
/// variable eliminated by Jensen's formula.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPoly3 {
    terms: Vec<(Exponent, Ratio<i64>)>,
}

impl LaurentPoly3 {
    /// Combines like terms and drops zero coefficients.
    pub fn new(terms: impl IntoIterator<Item = (Exponent, Ratio<i64>)>) -> Self {
        let mut merged: Vec<(Exponent, Ratio<i64>)> = Vec::new();
        for (e, c) in terms {
            match merged.iter_mut().find(|(f, _)| *f == e) {
                Some((_, d)) => *d += c,
                None => merged.push((e, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        merged.sort_by_key(|(e, _)| *e);
        LaurentPoly3 { terms: merged }
    }

    pub fn terms(&self) -> &[(Exponent, Ratio<i64>)] {
        &self.terms
    }

    pub fn constant_term(&self) -> Ratio<i64> {
        self.terms
            .iter()
            .find(|(e, _)| *e == (0, 0, 0))
            .map(|(_, c)| *c)
            .unwrap_or_else(Ratio::zero)
    }

    pub fn scale(&self, c: Ratio<i64>) -> Self {
        Self::new(self.terms.iter().map(|&(e, d)| (e, d * c)))
    }

    /// `X → 1/X`.
    pub fn invert_x(&self) -> Self {
        Self::new(self.terms.iter().map(|&((i, j, l), c)| ((-i, j, l), c)))
    }

    /// Span of `Z`-exponents, i.e. the degree after clearing denominators.
    pub fn z_degree(&self) -> u32 {
        let lo = self.terms.iter().map(|((_, _, l), _)| *l).min().unwrap_or(0);
        let hi = self.terms.iter().map(|((_, _, l), _)| *l).max().unwrap_or(0);
        (hi - lo) as u32
    }

    fn z_min(&self) -> i32 {
        self.terms.iter().map(|((_, _, l), _)| *l).min().unwrap_or(0)
    }

    /// Coefficients `[a, b, c]` of `a Z² + b Z + c` (after multiplying by
    /// `Z^{-min l}`) at the point `(x, y)`.
    pub fn fiber_coeffs(&self, x: Complex64, y: Complex64) -> Result<[Complex64; 3]> {
        if self.z_degree() > 2 {
            return Err(Error::Domain(format!(
                "Z-degree {} exceeds 2; Jensen reduction needs a quadratic fiber",
                self.z_degree()
            )));
        }
        let lo = self.z_min();
        let mut out = [Complex64::zero(); 3];
        for &((i, j, l), c) in &self.terms {
            let c = c.to_f64().unwrap_or(f64::NAN);
            out[2 - (l - lo) as usize] += x.powi(i) * y.powi(j) * c;
        }
        Ok(out)
    }

    /// Parses one `coef i j l` term per line; `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("line {}: expected `coef i j l`, got `{line}`", no + 1));
            if fields.len() != 4 {
                return Err(bad());
            }
            let coef = parse_rational(fields[0]).map_err(|_| bad())?;
            let exp: Vec<i32> = fields[1..]
                .iter()
                .map(|f| f.parse::<i32>().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            terms.push(((exp[0], exp[1], exp[2]), coef));
        }
        Ok(Self::new(terms))
    }
}

impl fmt::Display for LaurentPoly3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ((i, j, l), c) in &self.terms {
            writeln!(f, "{c} {i} {j} {l}")?;
        }
        Ok(())
    }
}

impl FromStr for LaurentPoly3 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_text(s)
    }
}

/// Parses `n`, `a/b`, or a finite decimal such as `-6.25` into an exact
/// rational.
pub fn parse_rational(s: &str) -> Result<Ratio<i64>> {
    let s = s.trim();
    let bad = || Error::Parse(format!("`{s}` is not a rational number"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 15 {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole: i64 = match whole.trim_start_matches(['-', '+']) {
            "" => 0,
            w => w.parse().map_err(|_| bad())?,
        };
        let scale = 10i64.pow(frac.len() as u32);
        let magnitude = whole
            .checked_mul(scale)
            .and_then(|w| w.checked_add(frac.parse::<i64>().ok()?))
            .ok_or_else(bad)?;
        let n = if negative { -magnitude } else { magnitude };
        return Ok(Ratio::new(n, scale));
    }
    Ok(Ratio::from_integer(s.parse().map_err(|_| bad())?))
}

/// The family polynomial at parameter `k`.
pub fn parse_family(family: Family, k: Ratio<i64>) -> LaurentPoly3 {
    let one = Ratio::from_integer(1);
    let monomials: &[Exponent] = match family {
        Family::P => &[(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)],
        Family::Q => &[
            (1, 0, 0),
            (-1, 0, 0),
            (0, 1, 0),
            (0, -1, 0),
            (0, 0, 1),
            (0, 0, -1),
            (1, 1, 0),
            (-1, -1, 0),
            (0, 1, 1),
            (0, -1, -1),
            (1, 1, 1),
            (-1, -1, -1),
        ],
    };
    LaurentPoly3::new(
        monomials
            .iter()
            .map(|&e| (e, one))
            .chain(std::iter::once(((0, 0, 0), -k))),
    )
}

/// `log|lead| + Σ_roots log max(|z|, 1)` for the `Z`-fiber over `(x, y)`.
pub fn jensen_fiber(p: &LaurentPoly3, x: Complex64, y: Complex64) -> Result<f64> {
    let [a, b, c] = p.fiber_coeffs(x, y)?;
    jensen_quadratic(a, b, c)
}

fn jensen_quadratic(a: Complex64, b: Complex64, c: Complex64) -> Result<f64> {
    if !a.is_zero() {
        let disc = (b * b - a * c * 4.0).sqrt();
        // pick the sign that avoids cancellation, then use the root product
        let s = if (b.conj() * disc).re >= 0.0 { b + disc } else { b - disc };
        let (z1, z2) = if s.is_zero() {
            (Complex64::zero(), Complex64::zero())
        } else {
            (-s / (a * 2.0), c * 2.0 / -s)
        };
        Ok(a.norm().ln() + z1.norm().max(1.0).ln() + z2.norm().max(1.0).ln())
    } else if !b.is_zero() {
        Ok(b.norm().ln() + (c / b).norm().max(1.0).ln())
    } else if !c.is_zero() {
        Ok(c.norm().ln())
    } else {
        Err(Error::ZeroFiber)
    }
}

/// Midpoint-rule average of `jensen_fiber` on an `n × n` grid, plus the
/// number of skipped zero fibers.
fn torus_average(p: &LaurentPoly3, n: usize) -> Result<(f64, usize)> {
    let node = |a: usize| {
        let theta = 2.0 * PI * (a as f64 + 0.5) / n as f64;
        Complex64::from_polar(1.0, theta)
    };
    let rows: Vec<Result<(f64, usize)>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let x = node(a);
            let mut sum = 0.0;
            let mut skipped = 0;
            for b in 0..n {
                match jensen_fiber(p, x, node(b)) {
                    Ok(v) => sum += v,
                    Err(Error::ZeroFiber) => skipped += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok((sum, skipped))
        })
        .collect();
    let mut total = 0.0;
    let mut skipped = 0;
    for row in rows {
        let (s, k) = row?;
        total += s;
        skipped += k;
    }
    Ok((total / (n * n) as f64, skipped))
}

pub fn mahler_torus(p: &LaurentPoly3, n: usize) -> Result<MeasureResult> {
    if n < 64 || !n.is_power_of_two() {
        return Err(Error::Domain(format!("grid size {n} must be a power of two ≥ 64")));
    }
    if p.terms().is_empty() {
        return Err(Error::ZeroFiber);
    }
    let (fine, skipped) = torus_average(p, n)?;
    let (coarse, _) = torus_average(p, n / 2)?;
    if skipped > 0 {
        warn!("skipped {skipped} identically-zero fibers on the {n}×{n} grid");
    }
    Ok(MeasureResult {
        value: fine,
        method: Method::Oracle,
        terms_used: (n * n) as u64,
        error_estimate: (fine - coarse).abs(),
    })
}
