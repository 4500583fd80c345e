//! Modular data for the two families: Hauptmoduls, the holomorphic period
//! `G`, the weight-4 Eisenstein combinations, and the `k ↔ t ↔ τ` dictionary.
//!
//! Family P is `X + 1/X + Y + 1/Y + Z + 1/Z - k` with `k = t + 1/t` and
//! `t = (η(τ)η(6τ)/(η(2τ)η(3τ)))^6`, a series in `q^(1/2)`. Family Q adds
//! `XY, ZY, XYZ` and their inverses, with `k = -(t + 1/t) - 2` and an eta
//! quotient of level 12 that is a series in `q`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::{e4_scaled, eta_quotient_expansion, EtaQuotientSpec, FormalSeries};

/// Scales `j` of the four Eisenstein/eta levels, in the order used by
/// [`FamilySpec::eisenstein_coeffs`].
pub const LEVELS: [u32; 4] = [1, 2, 3, 6];

/// Factors below this magnitude are dropped from numeric eta products.
const PRODUCT_CUTOFF: f64 = 1e-30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    P,
    Q,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::P => write!(f, "P"),
            Family::Q => write!(f, "Q"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P" | "p" => Ok(Family::P),
            "Q" | "q" => Ok(Family::Q),
            other => Err(Error::Parse(format!("unknown family `{other}`"))),
        }
    }
}

/// Everything that distinguishes family P from family Q.
#[derive(Clone, Debug)]
pub struct FamilySpec {
    pub family: Family,
    /// `A` in the leading `-Aπiτ` term of the q-series.
    pub tau_prefactor: i64,
    /// `c_j` for `j ∈ {1,2,3,6}`; the weight-4 form is `Σ c_j E4(q^j) / 240`.
    pub eisenstein_coeffs: [i64; 4],
    pub hauptmodul: EtaQuotientSpec,
    pub g_form: EtaQuotientSpec,
    /// Series variable is `w = q^(1/grain)`.
    pub grain: u32,
}

impl FamilySpec {
    pub fn p() -> Self {
        FamilySpec {
            family: Family::P,
            tau_prefactor: 1,
            eisenstein_coeffs: [4, -16, 36, -144],
            hauptmodul: EtaQuotientSpec::new(&[(1, 6), (6, 6), (2, -6), (3, -6)]),
            g_form: EtaQuotientSpec::new(&[(1, 1), (2, 1), (3, 1), (6, 1)]),
            grain: 2,
        }
    }

    pub fn q() -> Self {
        FamilySpec {
            family: Family::Q,
            tau_prefactor: 2,
            eisenstein_coeffs: [-2, 32, 18, -288],
            hauptmodul: EtaQuotientSpec::new(&[(3, 4), (12, 8), (2, 12), (1, -4), (4, -8), (6, -12)]),
            g_form: EtaQuotientSpec::new(&[(2, 4), (6, 4), (1, -2), (3, -2)]),
            grain: 1,
        }
    }

    pub fn of(family: Family) -> Self {
        match family {
            Family::P => Self::p(),
            Family::Q => Self::q(),
        }
    }

    /// `c_j / 240` as exact rationals.
    pub fn eisenstein_weights(&self) -> [BigRational; 4] {
        self.eisenstein_coeffs
            .map(|c| BigRational::new(BigInt::from(c), BigInt::from(240)))
    }

    pub fn k_from_t(&self, t: Complex64) -> Complex64 {
        let s = t + t.inv();
        match self.family {
            Family::P => s,
            Family::Q => -s - 2.0,
        }
    }

    /// Finite parameters where the fiber degenerates.
    pub fn singular_values(&self) -> &'static [f64] {
        match self.family {
            Family::P => &[-6.0, -2.0, 2.0, 6.0],
            Family::Q => &[-4.0, 0.0, 12.0],
        }
    }

    pub fn singular_label(&self) -> &'static str {
        match self.family {
            Family::P => "{-6, -2, 2, 6, ∞}",
            Family::Q => "{-4, 0, 12, ∞}",
        }
    }

    pub fn check_regular(&self, k: Complex64) -> Result<()> {
        let singular = !k.is_finite() || (k.im == 0.0 && self.singular_values().contains(&k.re));
        if singular {
            let k = if k.is_finite() {
                format_k(k)
            } else {
                "∞".to_string()
            };
            return Err(Error::SingularParameter {
                family: self.family,
                k,
                singular: self.singular_label(),
            });
        }
        Ok(())
    }
}

fn format_k(k: Complex64) -> String {
    if k.im == 0.0 {
        format!("{}", k.re)
    } else {
        format!("{k}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauSource {
    PaperFixture,
    InvertedFromK,
}

/// A point of the upper half plane together with its nome `q = e^{2πiτ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TauPoint {
    pub tau: Complex64,
    pub q: Complex64,
    pub source: TauSource,
}

impl TauPoint {
    pub fn new(tau: Complex64, source: TauSource) -> Result<Self> {
        if !(tau.im > 0.0) {
            return Err(Error::Domain(format!("Im τ = {} is not positive", tau.im)));
        }
        Ok(TauPoint {
            tau,
            q: nome(tau, 1),
            source,
        })
    }

    /// `e^{2πiτ/grain}`, the grain-th root of `q` consistent with `τ`.
    pub fn nome_root(&self, grain: u32) -> Complex64 {
        nome(self.tau, grain)
    }
}

fn nome(tau: Complex64, grain: u32) -> Complex64 {
    (Complex64::i() * 2.0 * PI * tau / grain as f64).exp()
}

/// `∏_j ∏_{n≥1} (1 - q^{jn})^{e_j}` evaluated at a complex `q` with `|q| < 1`.
pub fn eta_product_at(spec: &EtaQuotientSpec, q: Complex64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for &(j, e) in &spec.factors {
        let qj = q.powu(j);
        let mut p = qj;
        let mut factor = Complex64::new(1.0, 0.0);
        while p.norm() >= PRODUCT_CUTOFF {
            factor *= Complex64::new(1.0, 0.0) - p;
            p *= qj;
        }
        acc *= factor.powi(e);
    }
    acc
}

/// The eta quotient as a function of `w = q^(1/grain)`.
pub fn eval_in_grain(spec: &EtaQuotientSpec, grain: u32, w: Complex64) -> Result<Complex64> {
    let lead = spec.leading_exponent_at(grain)?;
    Ok(w.powi(lead as i32) * eta_product_at(spec, w.powu(grain)))
}

/// The eta quotient at a point of the upper half plane.
pub fn eval_at_tau(spec: &EtaQuotientSpec, tau: Complex64) -> Complex64 {
    let lead = spec.leading_exponent();
    let lead = *lead.numer() as f64 / *lead.denom() as f64;
    let prefactor = (Complex64::i() * 2.0 * PI * tau * lead).exp();
    prefactor * eta_product_at(spec, nome(tau, 1))
}

/// Exact expansion of the Hauptmodul `t` in `w = q^(1/grain)`.
pub fn hauptmodul_series(f: &FamilySpec, order: i64) -> Result<FormalSeries> {
    eta_quotient_expansion(&f.hauptmodul, f.grain, order)
}

/// Exact expansion of the holomorphic Picard–Fuchs solution `G`.
pub fn g_series(f: &FamilySpec, order: i64) -> Result<FormalSeries> {
    eta_quotient_expansion(&f.g_form, f.grain, order)
}

/// `Σ_j c_j E4(q^j) / 240` through `q^order`.
pub fn weight4_eisenstein_side(f: &FamilySpec, order: i64) -> FormalSeries {
    let mut acc = FormalSeries::zero(1, order);
    for (level, weight) in LEVELS.iter().zip(f.eisenstein_weights()) {
        let term = e4_scaled(*level, order).scale(&weight);
        acc = acc.add(&term).expect("same grain");
    }
    acc
}

/// `-G · (q dt/dq)/t · (1 - t²)/t` from the eta expansions, through `q^order`.
pub fn weight4_eta_side(f: &FamilySpec, order: i64) -> Result<FormalSeries> {
    let w_order = f.grain as i64 * order + 2;
    let t = hauptmodul_series(f, w_order)?;
    let g = g_series(f, w_order)?;
    let t_inv = t.inverse()?;
    let dlog = t.theta().mul(&t_inv)?;
    let tail = t_inv.sub(&t)?;
    let lhs = g.mul(&dlog)?.mul(&tail)?.neg();
    let lhs = lhs.to_grain(1).map_err(|_| Error::IdentityMismatch {
        exponent: -1,
        detail: "eta side has fractional q-exponents".into(),
    })?;
    debug_assert!(lhs.order() >= order);
    Ok(lhs.truncate(order))
}

/// The weight-4 form `Σ c_j E4(q^j)/240`, after checking that it agrees
/// exactly with the eta-side expression through `q^order`.
pub fn weight4_combination(f: &FamilySpec, order: i64) -> Result<FormalSeries> {
    let eis = weight4_eisenstein_side(f, order);
    let eta = weight4_eta_side(f, order)?;
    if let Some(e) = eis.first_mismatch(&eta)? {
        return Err(Error::IdentityMismatch {
            exponent: e,
            detail: format!(
                "Eisenstein side {} vs eta side {}",
                eis.coeff(e).unwrap_or_default(),
                eta.coeff(e).unwrap_or_default()
            ),
        });
    }
    Ok(eis)
}

/// Solves the family's `k(t)` relation for the root with `|t| ≤ 1`.
///
/// On the unit circle both roots qualify; the one with nonnegative
/// imaginary part is returned.
pub fn k_to_t(f: &FamilySpec, k: Complex64) -> Result<Complex64> {
    if !k.is_finite() {
        return Err(Error::SingularParameter {
            family: f.family,
            k: "∞".into(),
            singular: f.singular_label(),
        });
    }
    let s = match f.family {
        Family::P => k,
        Family::Q => -(k + 2.0),
    };
    let disc = (s * s - 4.0).sqrt();
    let plus = (s + disc) * 0.5;
    let minus = (s - disc) * 0.5;
    let big = if plus.norm() >= minus.norm() { plus } else { minus };
    let t = big.inv();
    if (t.norm() - 1.0).abs() < 1e-12 && t.im < 0.0 {
        return Ok(big);
    }
    Ok(t)
}

/// Seed and Newton parameters for [`invert_hauptmodul`].
const SEED_ORDER: i64 = 20;
const NEWTON_MAX_ITER: usize = 100;
/// Polar grid of Newton seeds in the `w`-disk, and how many of the best
/// grid points are refined.
const SEED_RADII: usize = 40;
const SEED_ANGLES: usize = 96;
const SEED_KEEP: usize = 24;
const SEED_MAX_RADIUS: f64 = 0.9;
/// Roots closer to the boundary are rejected: `t` has cusps on `|w| = 1`
/// and tends to its cusp values there, which Newton would happily chase.
const ACCEPT_MAX_RADIUS: f64 = 0.95;

fn newton_in_grain(f: &FamilySpec, t_target: Complex64, mut w: Complex64) -> Result<Complex64> {
    let residual_at = |w: Complex64| -> Result<Complex64> {
        Ok(eval_in_grain(&f.hauptmodul, f.grain, w)? - t_target)
    };
    for _ in 0..NEWTON_MAX_ITER {
        if !(w.norm() < 1.0) {
            break;
        }
        let r = residual_at(w)?;
        let h = 1e-7 * w.norm().max(f64::MIN_POSITIVE);
        let slope = (residual_at(w + h)? - residual_at(w - h)?) / (2.0 * h);
        if slope.norm() == 0.0 || !slope.is_finite() {
            break;
        }
        let step = r / slope;
        w -= step;
        if step.norm() <= 1e-16 * w.norm() {
            break;
        }
    }
    Ok(w)
}

/// All preimages `q` of `t_target` found from the reversion seed and a
/// polar grid of seeds, each certified by re-evaluating the eta quotient to
/// within `eps`. Returns the certified `w`-values (one per distinct `q`)
/// and the smallest residual seen.
fn hauptmodul_preimages(f: &FamilySpec, t_target: Complex64, eps: f64) -> Result<(Vec<Complex64>, f64)> {
    let t_at = |w: Complex64| eval_in_grain(&f.hauptmodul, f.grain, w);
    let mut seeds = vec![hauptmodul_series(f, SEED_ORDER)?.reversion()?.eval(t_target)];
    let mut grid = Vec::with_capacity(SEED_RADII * SEED_ANGLES);
    for i in 0..SEED_RADII {
        let r = SEED_MAX_RADIUS * (i as f64 + 0.5) / SEED_RADII as f64;
        for j in 0..SEED_ANGLES {
            let w = Complex64::from_polar(r, 2.0 * PI * (j as f64 + 0.5) / SEED_ANGLES as f64);
            grid.push(((t_at(w)? - t_target).norm(), w));
        }
    }
    grid.sort_by(|a, b| a.0.total_cmp(&b.0));
    seeds.extend(grid.iter().take(SEED_KEEP).map(|&(_, w)| w));

    let mut best = f64::INFINITY;
    let mut found: Vec<Complex64> = Vec::new();
    for seed in seeds {
        let w = newton_in_grain(f, t_target, seed)?;
        if !(w.norm() <= ACCEPT_MAX_RADIUS) || w.norm() == 0.0 {
            continue;
        }
        let residual = (t_at(w)? - t_target).norm();
        best = best.min(residual);
        let q = w.powu(f.grain);
        if residual <= eps && !found.iter().any(|v| (v.powu(f.grain) - q).norm() <= 1e-9) {
            found.push(w);
        }
    }
    Ok((found, best))
}

/// Finds `τ` with `t(τ) = t_target`, certified by re-evaluating the eta
/// quotient to within `eps`.
///
/// `t` takes each value at many points of the disk. Among the preimages
/// found, the one nearest the cusp (smallest `|q|`, i.e. largest `Im τ`) is
/// returned, with `Im q ≥ 0` breaking the tie between conjugates. For `t`
/// small this is the branch given by series reversion.
pub fn invert_hauptmodul(f: &FamilySpec, t_target: Complex64, eps: f64) -> Result<TauPoint> {
    let (found, best) = hauptmodul_preimages(f, t_target, eps)?;
    let q_of = |w: &Complex64| w.powu(f.grain);
    let nearest = found
        .iter()
        .map(|w| q_of(w).norm())
        .fold(f64::INFINITY, f64::min);
    let w = found
        .iter()
        .filter(|w| q_of(w).norm() <= nearest * (1.0 + 1e-9))
        .max_by(|a, b| {
            let (qa, qb) = (q_of(a), q_of(b));
            qa.im.total_cmp(&qb.im).then(qa.re.total_cmp(&qb.re))
        })
        .copied()
        .ok_or(Error::InversionFailed { residual: best, eps })?;
    let tau = w.ln() * f.grain as f64 / (Complex64::i() * 2.0 * PI);
    TauPoint::new(tau, TauSource::InvertedFromK)
}

/// Quadratic points at which the measures are known in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fixture {
    P0,
    P2,
    P3,
    P6,
    Q0,
    Q12,
    Qm6,
    Qm36,
}

impl Fixture {
    pub const ALL: [Fixture; 8] = [
        Fixture::P0,
        Fixture::P2,
        Fixture::P3,
        Fixture::P6,
        Fixture::Q0,
        Fixture::Q12,
        Fixture::Qm6,
        Fixture::Qm36,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Fixture::P0 => "P0",
            Fixture::P2 => "P2",
            Fixture::P3 => "P3",
            Fixture::P6 => "P6",
            Fixture::Q0 => "Q0",
            Fixture::Q12 => "Q12",
            Fixture::Qm6 => "Qm6",
            Fixture::Qm36 => "Qm36",
        }
    }

    pub fn family(self) -> Family {
        match self {
            Fixture::P0 | Fixture::P2 | Fixture::P3 | Fixture::P6 => Family::P,
            _ => Family::Q,
        }
    }

    pub fn k(self) -> i64 {
        match self {
            Fixture::P0 | Fixture::Q0 => 0,
            Fixture::P2 => 2,
            Fixture::P3 => 3,
            Fixture::P6 => 6,
            Fixture::Q12 => 12,
            Fixture::Qm6 => -6,
            Fixture::Qm36 => -36,
        }
    }

    pub fn tau(self) -> Complex64 {
        let s3 = 3f64.sqrt();
        match self {
            Fixture::P0 => Complex64::new(-0.5, s3 / 6.0),
            Fixture::P2 => Complex64::new(-1.0 / 3.0, 2f64.sqrt() / 6.0),
            Fixture::P3 => Complex64::new(-0.25, 15f64.sqrt() / 12.0),
            Fixture::P6 => Complex64::new(0.0, 1.0 / 6f64.sqrt()),
            Fixture::Q0 => Complex64::new(0.25, s3 / 12.0),
            Fixture::Q12 => Complex64::new(0.5, s3 / 6.0),
            Fixture::Qm6 => Complex64::new(0.0, s3 / 6.0),
            Fixture::Qm36 => Complex64::new(0.0, s3 / 3.0),
        }
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Fixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Fixture::ALL
            .into_iter()
            .find(|fx| fx.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownCase(s.to_string()))
    }
}

pub fn paper_tau_fixture(case: Fixture) -> TauPoint {
    TauPoint::new(case.tau(), TauSource::PaperFixture).expect("fixtures lie in the upper half plane")
}
