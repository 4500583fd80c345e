//! Mahler measures from the q-series and from the large-`k` expansion, and
//! the integer sequences `a_m`, `v_n` behind the period `G`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modular::{
    g_series, hauptmodul_series, invert_hauptmodul, k_to_t, Family, FamilySpec, TauPoint, LEVELS,
};
use crate::series::{sigma3, FormalSeries};

/// Residual accepted when inverting the Hauptmodul for a given `k`.
pub const INVERSION_EPS: f64 = 1e-11;

/// Hard cap on q-series terms; `σ₃(n)` stays within `u64` well past this.
const QSERIES_MAX_TERMS: u64 = 1_000_000;
const KSERIES_MAX_TERMS: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Qseries,
    Kseries,
    Lattice,
    Hecke,
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Qseries => "qseries",
            Method::Kseries => "kseries",
            Method::Lattice => "lattice",
            Method::Hecke => "hecke",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Method::Qseries, Method::Kseries, Method::Lattice, Method::Hecke, Method::Oracle]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown method `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasureResult {
    pub value: f64,
    pub method: Method,
    pub terms_used: u64,
    pub error_estimate: f64,
}

/// `Re{-Aπiτ + Σ σ₃(n) Σ_j c_j q^{jn}/(jn)}`.
pub fn mahler_qseries(f: &FamilySpec, at: &TauPoint, eps: f64) -> Result<MeasureResult> {
    let q = at.q;
    let x = q.norm();
    if !(x < 1.0) {
        return Err(Error::Domain(format!("|q| = {x} is not below 1")));
    }
    let c_abs: f64 = f.eisenstein_coeffs.iter().map(|c| c.abs() as f64).sum();
    let mut sum = -Complex64::i() * PI * at.tau * f.tau_prefactor as f64;
    let mut qn = Complex64::new(1.0, 0.0);
    let mut n = 0u64;
    loop {
        n += 1;
        if n > QSERIES_MAX_TERMS {
            return Err(Error::Domain(format!("|q| = {x} too close to 1 for the q-series")));
        }
        qn *= q;
        let s3 = sigma3(n) as f64;
        let mut inner = Complex64::zero();
        for (&j, &c) in LEVELS.iter().zip(&f.eisenstein_coeffs) {
            inner += qn.powu(j) * (c as f64 / (j as f64 * n as f64));
        }
        sum += inner * s3;
        let bound = s3 * c_abs * x.powi(n as i32) / n as f64;
        if n > 10 && bound < eps {
            break;
        }
    }
    let tail = c_abs * sigma3(n) as f64 * x.powi(n as i32) / ((1.0 - x).powi(4) * n as f64);
    Ok(MeasureResult {
        value: sum.re,
        method: Method::Qseries,
        terms_used: n,
        error_estimate: tail,
    })
}

/// Convenience wrapper: `k → t → τ → m` through the q-series.
pub fn mahler_qseries_at_k(f: &FamilySpec, k: f64, eps: f64) -> Result<(TauPoint, MeasureResult)> {
    let t = k_to_t(f, Complex64::new(k, 0.0))?;
    let at = invert_hauptmodul(f, t, INVERSION_EPS)?;
    let m = mahler_qseries(f, &at, eps)?;
    Ok((at, m))
}

/// `log k − Σ_{m≥1} a_m / (2m k^{2m})` for family P and `k > 6`.
pub fn mahler_kseries(f: &FamilySpec, k: f64, eps: f64) -> Result<MeasureResult> {
    if f.family != Family::P {
        return Err(Error::Domain("the k-series is only available for family P".into()));
    }
    if !(k > 6.0) || !k.is_finite() {
        return Err(Error::Domain(format!("k-series needs k > 6, got {k}")));
    }
    let k2 = k * k;
    let mut value = k.ln();
    // x_m = a_m / k^{2m}, advanced by the exact ratio a_m / a_{m-1}
    let mut prev = BigInt::one();
    let mut x = 1.0;
    let mut m = 0u64;
    let omitted = loop {
        m += 1;
        if m > KSERIES_MAX_TERMS {
            return Err(Error::Domain(format!("k-series did not converge at k = {k}")));
        }
        let a = walk_coefficient_a(m);
        let ratio = BigRational::new(a.clone(), prev).to_f64().unwrap_or(f64::INFINITY);
        prev = a;
        x *= ratio / k2;
        let term = x / (2.0 * m as f64);
        if term < eps {
            break term;
        }
        value -= term;
    };
    Ok(MeasureResult {
        value,
        method: Method::Kseries,
        terms_used: m - 1,
        error_estimate: omitted / (1.0 - 36.0 / k2),
    })
}

/// `a_m = Σ_{p+q+r=m} (2m)!/(p!q!r!)²`, the number of closed `2m`-step walks
/// on the cubic lattice, computed as `C(2m,m) Σ_p C(m,p)² C(2(m−p), m−p)`.
pub fn walk_coefficient_a(m: u64) -> BigInt {
    let m_big = BigInt::from(m);
    let inner: BigInt = (0..=m)
        .map(|p| {
            let c = binomial(m_big.clone(), BigInt::from(p));
            let r = m - p;
            &c * &c * binomial(BigInt::from(2 * r), BigInt::from(r))
        })
        .sum();
    binomial(BigInt::from(2 * m), m_big) * inner
}

fn multinomial_sq_sum4(m: u64) -> BigInt {
    // Σ_{p+q+r+s=m} (m!/(p!q!r!s!))²
    let fact: Vec<BigInt> = std::iter::successors(Some(BigInt::one()), {
        let mut i = 0u64;
        move |f: &BigInt| {
            i += 1;
            Some(f * BigInt::from(i))
        }
    })
    .take(m as usize + 1)
    .collect();
    let mut acc = BigInt::zero();
    for p in 0..=m {
        for q in 0..=m - p {
            for r in 0..=m - p - q {
                let s = m - p - q - r;
                let denom = &fact[p as usize] * &fact[q as usize] * &fact[r as usize] * &fact[s as usize];
                let c = &fact[m as usize] / denom;
                acc += &c * &c;
            }
        }
    }
    acc
}

/// Coefficients `v_n` of `G` as a series in the Hauptmodul.
pub fn apery_v(f: &FamilySpec, n: u64) -> Result<BigInt> {
    match f.family {
        Family::P => {
            let n_big = BigInt::from(n);
            Ok((0..=n)
                .map(|k| {
                    let a = binomial(n_big.clone(), BigInt::from(k));
                    let b = binomial(BigInt::from(n + k), BigInt::from(k));
                    &a * &a * &b * &b
                })
                .sum())
        }
        Family::Q => {
            if n == 0 {
                return Err(Error::Domain("family Q coefficients start at n = 1".into()));
            }
            Ok((0..n)
                .map(|m| {
                    let c = binomial(BigInt::from(n + m), BigInt::from(2 * m + 1)) * multinomial_sq_sum4(m);
                    if m % 2 == 0 {
                        c
                    } else {
                        -c
                    }
                })
                .sum())
        }
    }
}

/// Result of [`series_identity_check`]: the first exponent (in the series
/// variable) at which each identity fails, if any.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    /// `G = Σ v_n t^{...}` after substituting the Hauptmodul expansion.
    pub g_vs_v: Option<i64>,
    /// `Σ a_m k^{-2m-1} = Σ v_n t^{2n+1}` under `k = t + 1/t` (family P only).
    pub a_vs_v: Option<i64>,
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        self.g_vs_v.is_none() && self.a_vs_v.is_none()
    }

    pub fn first_mismatch(&self) -> Option<i64> {
        match (self.g_vs_v, self.a_vs_v) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

pub fn series_identity_check(f: &FamilySpec, order: i64) -> Result<IdentityCheck> {
    let count = match f.family {
        Family::P => order / 2 + 1,
        Family::Q => order + 1,
    };
    let v = (0..count)
        .map(|n| match f.family {
            Family::Q if n == 0 => Ok(BigInt::zero()),
            _ => apery_v(f, n as u64),
        })
        .collect::<Result<Vec<_>>>()?;
    series_identity_check_with(f, order, &v)
}

/// As [`series_identity_check`], with explicit `v_0, v_1, …` (for family Q,
/// `v_0` is ignored).
pub fn series_identity_check_with(f: &FamilySpec, order: i64, v: &[BigInt]) -> Result<IdentityCheck> {
    if order < 5 {
        return Err(Error::Domain(format!("identity check needs order ≥ 5, got {order}")));
    }
    // V(x) as an abstract power series
    let mut vc = vec![BigRational::zero(); order as usize + 1];
    for (n, vn) in v.iter().enumerate() {
        let e = match f.family {
            Family::P => 2 * n + 1,
            Family::Q if n == 0 => continue,
            Family::Q => n,
        };
        if e <= order as usize {
            vc[e] = BigRational::from_integer(vn.clone());
        }
    }
    let v_series = FormalSeries::from_coeffs(1, 0, vc, order);

    let t = hauptmodul_series(f, order)?;
    let g = g_series(f, order)?;
    let g_vs_v = g.first_mismatch(&v_series.compose(&t)?)?;

    let a_vs_v = match f.family {
        Family::Q => None,
        Family::P => {
            // 1/k = x/(1 + x²) with x = t
            let one_plus = FormalSeries::from_integers(1, 0, &[1, 0, 1], order);
            let u = FormalSeries::var(1, order).mul(&one_plus.inverse()?)?;
            let mut ac = vec![BigRational::zero(); order as usize + 1];
            for m in 0..=(order as u64 - 1) / 2 {
                ac[2 * m as usize + 1] = BigRational::from_integer(walk_coefficient_a(m));
            }
            let a_series = FormalSeries::from_coeffs(1, 0, ac, order);
            a_series.compose(&u)?.first_mismatch(&v_series)?
        }
    };
    Ok(IdentityCheck { g_vs_v, a_vs_v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::{paper_tau_fixture, Fixture, TauSource};

    #[test]
    fn a_small_values() {
        let got: Vec<BigInt> = (0..6).map(walk_coefficient_a).collect();
        let want = [1, 6, 90, 1860, 44730, 1172556].map(BigInt::from);
        assert_eq!(got, want);
    }

    #[test]
    fn v_small_values() {
        let p = FamilySpec::p();
        let got: Vec<BigInt> = (0..5).map(|n| apery_v(&p, n).unwrap()).collect();
        assert_eq!(got, [1, 5, 73, 1445, 33001].map(BigInt::from));
        let q = FamilySpec::q();
        assert_eq!(apery_v(&q, 1).unwrap(), BigInt::from(1));
        assert_eq!(apery_v(&q, 2).unwrap(), BigInt::from(-2));
        assert!(apery_v(&q, 0).is_err());
    }

    #[test]
    fn q_inner_sum_reduces_to_single_sum() {
        for m in 0..8u64 {
            let single: BigInt = (0..=m)
                .map(|a| {
                    let c = binomial(BigInt::from(m), BigInt::from(a));
                    &c * &c
                        * binomial(BigInt::from(2 * a), BigInt::from(a))
                        * binomial(BigInt::from(2 * (m - a)), BigInt::from(m - a))
                })
                .sum();
            assert_eq!(multinomial_sq_sum4(m), single, "m = {m}");
        }
    }

    #[test]
    fn identities_hold_to_order_20() {
        assert!(series_identity_check(&FamilySpec::p(), 20).unwrap().holds());
        assert!(series_identity_check(&FamilySpec::q(), 20).unwrap().holds());
    }

    #[test]
    fn corrupted_v1_fails_at_exponent_3() {
        let p = FamilySpec::p();
        let mut v: Vec<BigInt> = (0..=10).map(|n| apery_v(&p, n).unwrap()).collect();
        v[1] = BigInt::from(4);
        let check = series_identity_check_with(&p, 20, &v).unwrap();
        assert!(!check.holds());
        assert_eq!(check.first_mismatch(), Some(3));
    }

    #[test]
    fn identity_order_precondition() {
        assert!(series_identity_check(&FamilySpec::p(), 4).is_err());
    }

    #[test]
    fn qseries_p0_is_d3() {
        let m = mahler_qseries(&FamilySpec::p(), &paper_tau_fixture(Fixture::P0), 1e-15).unwrap();
        assert!((m.value - 0.323_065_947_219_450_5).abs() < 1e-12, "{}", m.value);
        assert!(m.terms_used > 10);
    }

    #[test]
    fn qseries_deep_cusp_is_prefactor() {
        let y = 8.0;
        let at = TauPoint::new(Complex64::new(0.0, y), TauSource::PaperFixture).unwrap();
        let m = mahler_qseries(&FamilySpec::p(), &at, 1e-16).unwrap();
        assert!((m.value - PI * y).abs() < 1e-12);
    }

    #[test]
    fn qseries_rejects_outer_q() {
        let at = TauPoint {
            tau: Complex64::new(0.0, 1.0),
            q: Complex64::new(1.0, 0.0),
            source: TauSource::PaperFixture,
        };
        assert!(mahler_qseries(&FamilySpec::p(), &at, 1e-12).is_err());
    }

    #[test]
    fn kseries_large_k() {
        let k = 1e6;
        let m = mahler_kseries(&FamilySpec::p(), k, 1e-30).unwrap();
        // the subtraction leaves ~3 significant digits at this scale
        assert!(((k.ln() - m.value) / 3e-12 - 1.0).abs() < 2e-3);
    }

    #[test]
    fn kseries_k7() {
        let m = mahler_kseries(&FamilySpec::p(), 7.0, 1e-14).unwrap();
        assert!((m.value - 1.870_879_080_285_151).abs() < 1e-11, "{}", m.value);
    }

    #[test]
    fn kseries_domain() {
        assert!(mahler_kseries(&FamilySpec::p(), 6.0, 1e-12).is_err());
        assert!(mahler_kseries(&FamilySpec::q(), 10.0, 1e-12).is_err());
    }

    #[test]
    fn method_round_trip() {
        for m in [Method::Qseries, Method::Kseries, Method::Lattice, Method::Hecke, Method::Oracle] {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
    }
}
