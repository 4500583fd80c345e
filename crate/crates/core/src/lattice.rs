//! Eisenstein–Kronecker lattice sums, binary-quadratic-form sums and the
//! L-value identities they encode.
//!
//! Every sum runs over `(m, κ) ≠ (0, 0)` in the square `max(|m|, |κ|) ≤ R`,
//! accumulated shell by shell (the shell of radius `r` has `8r` points).
//! Shells are evaluated in parallel and reduced in a fixed order, so results
//! do not depend on the worker count.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mahler::{mahler_qseries, MeasureResult, Method};
use crate::modular::{paper_tau_fixture, FamilySpec, Fixture, TauPoint, LEVELS};

/// `a m² + b mκ + c κ²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub const fn new(a: i64, b: i64, c: i64) -> Self {
        QuadForm { a, b, c }
    }

    pub fn eval(&self, m: i64, k: i64) -> f64 {
        (self.a * m * m + self.b * m * k + self.c * k * k) as f64
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a > 0 && 4 * self.a * self.c - self.b * self.b > 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Numerator {
    One,
    Form(QuadForm),
}

impl Numerator {
    fn degree(&self) -> u32 {
        match self {
            Numerator::One => 0,
            Numerator::Form(_) => 2,
        }
    }

    fn eval(&self, m: i64, k: i64) -> f64 {
        match self {
            Numerator::One => 1.0,
            Numerator::Form(q) => q.eval(m, k),
        }
    }
}

/// `weight · numerator / denominator^exponent`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SumTerm {
    pub weight: Ratio<i64>,
    pub numerator: Numerator,
    pub denominator: QuadForm,
    pub exponent: u32,
}

impl SumTerm {
    pub fn new(weight: Ratio<i64>, numerator: Numerator, denominator: QuadForm, exponent: u32) -> Self {
        SumTerm {
            weight,
            numerator,
            denominator,
            exponent,
        }
    }
}

/// `prefactor · Σ' Σ_terms term(m, κ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadFormSumSpec {
    terms: Vec<SumTerm>,
    weights: Vec<f64>,
    prefactor: f64,
}

impl QuadFormSumSpec {
    pub fn new(terms: Vec<SumTerm>, prefactor: f64) -> Result<Self> {
        for t in &terms {
            if !t.denominator.is_positive_definite() {
                return Err(Error::Domain(format!(
                    "denominator {:?} is not positive definite",
                    t.denominator
                )));
            }
            if t.exponent < 2 || 2 * t.exponent < t.numerator.degree() + 4 {
                return Err(Error::Domain(format!(
                    "term {:?} is not absolutely convergent",
                    t
                )));
            }
        }
        let weights = terms.iter().map(|t| t.weight.to_f64().unwrap_or(f64::NAN)).collect();
        Ok(QuadFormSumSpec {
            terms,
            weights,
            prefactor,
        })
    }

    pub fn terms(&self) -> &[SumTerm] {
        &self.terms
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    fn summand(&self, m: i64, k: i64) -> f64 {
        self.terms
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| w * t.numerator.eval(m, k) / t.denominator.eval(m, k).powi(t.exponent as i32))
            .sum()
    }
}

/// A truncated lattice sum and its tail estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeSum {
    pub value: f64,
    pub error_estimate: f64,
    pub points: u64,
}

/// Per-shell sums of `f` over `max(|m|,|κ|) = r` for `r = 1..=radius`.
fn shell_sums<T, F>(radius: u32, f: F) -> Vec<T>
where
    T: Send + Default + std::ops::AddAssign,
    F: Fn(i64, i64) -> T + Sync,
{
    (1..=radius as i64)
        .into_par_iter()
        .map(|r| {
            let mut acc = T::default();
            for m in -r..=r {
                acc += f(m, r);
                acc += f(m, -r);
            }
            for k in -r + 1..r {
                acc += f(r, k);
                acc += f(-r, k);
            }
            acc
        })
        .collect()
}

/// Sums per-shell values and estimates the tail from the last shell and
/// from the Richardson difference `S(R) − S(R/2)` of an `O(R⁻²)` tail.
fn reduce_shells(shells: &[f64]) -> (f64, f64) {
    let radius = shells.len();
    // large shells first: they are the small ones
    let total: f64 = shells.iter().rev().sum();
    let half: f64 = shells[..radius / 2].iter().rev().sum();
    let last = shells.last().copied().unwrap_or(0.0).abs();
    let err = (last * radius as f64 / 2.0).max((total - half).abs() / 3.0);
    (total, err)
}

fn points_in(radius: u32) -> u64 {
    let side = 2 * radius as u64 + 1;
    side * side - 1
}

pub fn form_sum(spec: &QuadFormSumSpec, radius: u32) -> Result<LatticeSum> {
    if radius < 2 {
        return Err(Error::Domain(format!("radius {radius} is too small")));
    }
    let shells = shell_sums(radius, |m, k| spec.summand(m, k));
    let (total, err) = reduce_shells(&shells);
    Ok(LatticeSum {
        value: spec.prefactor * total,
        error_estimate: spec.prefactor.abs() * err,
        points: points_in(radius),
    })
}

/// [`kronecker_sum`] output: the measure, plus the imaginary part of the
/// complex bracket before the real part is taken.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KroneckerSum {
    pub measure: MeasureResult,
    pub imag: f64,
}

#[derive(Default)]
struct C64(Complex64);

impl std::ops::AddAssign for C64 {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

/// `Im τ/(8π³) Σ' Σ_j μ_j (2/((jmτ+κ)³(jmτ̄+κ)) + 1/|jmτ+κ|⁴)` with level
/// multipliers `μ_j = −c_j`; the measure is the real part.
pub fn kronecker_sum(f: &FamilySpec, at: &TauPoint, radius: u32) -> Result<KroneckerSum> {
    let tau = at.tau;
    if !(tau.im > 0.0) {
        return Err(Error::Domain(format!("Im τ = {} is not positive", tau.im)));
    }
    if radius < 10 {
        return Err(Error::Domain(format!("radius {radius} is below 10")));
    }
    let mults: Vec<(f64, f64)> = LEVELS
        .iter()
        .zip(&f.eisenstein_coeffs)
        .map(|(&j, &c)| (j as f64, -c as f64))
        .collect();
    let shells = shell_sums(radius, |m, k| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(j, mu) in &mults {
            let z = tau * (j * m as f64) + k as f64;
            let n = z.norm_sqr();
            acc += (z.conj() * z.conj() * 2.0 / (n * n * n) + 1.0 / (n * n)) * mu;
        }
        C64(acc)
    });
    let re: Vec<f64> = shells.iter().map(|c| c.0.re).collect();
    let (total, err) = reduce_shells(&re);
    let imag: f64 = shells.iter().rev().map(|c| c.0.im).sum();
    let pre = tau.im / (8.0 * PI.powi(3));
    Ok(KroneckerSum {
        measure: MeasureResult {
            value: pre * total,
            method: Method::Lattice,
            terms_used: points_in(radius),
            error_estimate: pre * err,
        },
        imag: pre * imag,
    })
}

/// Block size at which [`dirichlet_l_chi_minus3`] stops.
const L_BLOCK_CUTOFF: f64 = 1e-15;

/// `L(χ₋₃, s) = Σ χ₋₃(n)/nˢ`, summed in blocks `(3b+1)^{-s} − (3b+2)^{-s}`
/// with a midpoint-rule estimate of the remaining blocks added on.
pub fn dirichlet_l_chi_minus3(s: u32) -> Result<f64> {
    if s < 2 {
        return Err(Error::Domain(format!("L(χ₋₃, s) needs s ≥ 2, got {s}")));
    }
    let s = s as i32;
    let mut sum = 0.0;
    let mut b = 0u64;
    loop {
        let x = 3.0 * b as f64;
        let block = (x + 1.0).powi(-s) - (x + 2.0).powi(-s);
        sum += block;
        if block < L_BLOCK_CUTOFF {
            break;
        }
        b += 1;
    }
    // Σ_{b' > b} f(b') ≈ ∫_{b+1/2}^∞ f, where ∫_X^∞ (3y+a)^{-s} dy = (3X+a)^{1-s} / (3(s-1))
    let x = 3.0 * (b as f64 + 0.5);
    let tail = ((x + 1.0).powi(1 - s) - (x + 2.0).powi(1 - s)) / (3.0 * (s - 1) as f64);
    Ok(sum + tail)
}

fn form(a: i64, b: i64, c: i64) -> QuadForm {
    QuadForm::new(a, b, c)
}

fn term(w: (i64, i64), num: Numerator, den: QuadForm, s: u32) -> SumTerm {
    SumTerm::new(Ratio::new(w.0, w.1), num, den, s)
}

/// The explicit form-sum representation of a closed-form case.
pub fn hecke_spec(case: Fixture) -> Result<QuadFormSumSpec> {
    use Numerator::{Form, One};
    let pi3 = PI.powi(3);
    let (terms, pre) = match case {
        Fixture::P0 => (
            vec![
                term((4, 1), One, form(1, 0, 3), 2),
                term((-1, 1), One, form(1, 1, 1), 2),
            ],
            3.0 * 3f64.sqrt() / (2.0 * pi3),
        ),
        Fixture::P2 => (
            vec![term((1, 2), Form(form(1, 0, -2)), form(1, 0, 2), 3)],
            16.0 * 2f64.sqrt() / pi3,
        ),
        Fixture::P3 => (
            vec![
                term((1, 4), Form(form(2, 2, -7)), form(1, 1, 4), 3),
                term((-1, 4), Form(form(1, 8, 1)), form(2, 1, 2), 3),
            ],
            15.0 * 15f64.sqrt() / (2.0 * pi3),
        ),
        Fixture::P6 => (
            vec![
                term((1, 2), Form(form(1, 0, -6)), form(1, 0, 6), 3),
                term((1, 2), Form(form(-2, 0, 3)), form(2, 0, 3), 3),
            ],
            24.0 * 6f64.sqrt() / pi3,
        ),
        Fixture::Q0 | Fixture::Q12 => (
            vec![term((1, 2), Form(form(-3, 0, 1)), form(3, 0, 1), 3)],
            12.0 * 3f64.sqrt() / pi3,
        ),
        other => return Err(Error::UnknownCase(other.label().to_string())),
    };
    QuadFormSumSpec::new(terms, pre)
}

/// A closed-form case evaluated through its quadratic-form sum.
pub fn hecke_measure(case: Fixture, radius: u32) -> Result<MeasureResult> {
    let sum = form_sum(&hecke_spec(case)?, radius)?;
    let scale = if case == Fixture::Q12 { 4.0 } else { 1.0 };
    Ok(MeasureResult {
        value: scale * sum.value,
        method: Method::Hecke,
        terms_used: sum.points,
        error_estimate: scale * sum.error_estimate,
    })
}

/// `Σ' (2m² + 2mκ − κ²)/(m² + mκ + κ²)³`, which vanishes.
pub fn sebbar_spec() -> QuadFormSumSpec {
    QuadFormSumSpec::new(
        vec![term((1, 1), Numerator::Form(form(2, 2, -1)), form(1, 1, 1), 3)],
        1.0,
    )
    .expect("valid spec")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoydPath {
    /// q-series at the three τ fixtures.
    Fast,
    /// Kronecker sums at the three τ fixtures.
    Slow,
}

/// `2m(Q₋₃₆) − 4m(Q₋₆) − m(Q₀)`.
pub fn boyd_relation_residual(radius: u32, path: BoydPath) -> Result<f64> {
    if radius < 100 {
        return Err(Error::Domain(format!("radius {radius} is below 100")));
    }
    let q = FamilySpec::q();
    let m = |fx: Fixture| -> Result<f64> {
        let at = paper_tau_fixture(fx);
        Ok(match path {
            BoydPath::Fast => mahler_qseries(&q, &at, 1e-16)?.value,
            BoydPath::Slow => kronecker_sum(&q, &at, radius)?.measure.value,
        })
    };
    Ok(2.0 * m(Fixture::Qm36)? - 4.0 * m(Fixture::Qm6)? - m(Fixture::Q0)?)
}

/// Both sides of the `Q₀` lattice identity as printed, and the combination
/// `9·lhs − 8·rhs` that the relation actually forces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theorem42 {
    pub lhs: LatticeSum,
    pub rhs: LatticeSum,
    pub weighted_residual: f64,
}

pub fn theorem42_lhs_spec() -> QuadFormSumSpec {
    QuadFormSumSpec::new(
        vec![term((1, 1), Numerator::Form(form(1, 0, -3)), form(1, 0, 3), 3)],
        1.0,
    )
    .expect("valid spec")
}

pub fn theorem42_rhs_spec() -> QuadFormSumSpec {
    QuadFormSumSpec::new(
        vec![
            term((1, 1), Numerator::Form(form(4, 0, -3)), form(4, 0, 3), 3),
            term((-1, 1), Numerator::Form(form(12, 0, -1)), form(12, 0, 1), 3),
        ],
        1.0,
    )
    .expect("valid spec")
}

pub fn theorem42_check(radius: u32) -> Result<Theorem42> {
    if radius < 100 {
        return Err(Error::Domain(format!("radius {radius} is below 100")));
    }
    let lhs = form_sum(&theorem42_lhs_spec(), radius)?;
    let rhs = form_sum(&theorem42_rhs_spec(), radius)?;
    Ok(Theorem42 {
        lhs,
        rhs,
        weighted_residual: 9.0 * lhs.value - 8.0 * rhs.value,
    })
}
