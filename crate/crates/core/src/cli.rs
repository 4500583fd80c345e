//! Command-line front end.
//!
//! Exit codes: 0 success, 2 domain error (singular or out-of-range
//! parameter, unknown case), 3 numerical failure or failed verification,
//! 4 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{
    boyd_relation_residual, dirichlet_l_chi_minus3, form_sum, hecke_measure, kronecker_sum, sebbar_spec,
    theorem42_check, BoydPath,
};
use crate::mahler::{
    mahler_kseries, mahler_qseries, series_identity_check, MeasureResult, Method, INVERSION_EPS,
};
use crate::modular::{
    g_series, hauptmodul_series, invert_hauptmodul, k_to_t, paper_tau_fixture, weight4_combination,
    weight4_eisenstein_side, weight4_eta_side, Family, FamilySpec, Fixture,
};
use crate::oracle::{mahler_torus, parse_family, parse_rational, LaurentPoly3};
use crate::series::{e4_expansion, FormalSeries};

const EXIT_VERIFY_FAILED: i32 = 3;
const EXIT_USAGE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "k3-mahler", version, about = "Mahler measures of the P_k and Q_k K3 families")]
struct Cli {
    /// Worker threads for lattice sums and torus integration.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute a Mahler measure by one or more methods.
    Measure(MeasureArgs),
    /// Print exact series coefficients.
    Series(SeriesArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Tabulate m over a range of k, as CSV.
    Table(TableArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    #[value(name = "P", alias = "p")]
    P,
    #[value(name = "Q", alias = "q")]
    Q,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::P => Family::P,
            FamilyArg::Q => Family::Q,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Qseries,
    Kseries,
    Lattice,
    Hecke,
    Oracle,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Qseries => Method::Qseries,
            MethodArg::Kseries => Method::Kseries,
            MethodArg::Lattice => Method::Lattice,
            MethodArg::Hecke => Method::Hecke,
            MethodArg::Oracle => Method::Oracle,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Human,
    Json,
    Csv,
}

#[derive(clap::Args, Debug)]
#[command(group(ArgGroup::new("point").required(true).args(["k", "fixture", "poly"])))]
struct MeasureArgs {
    #[arg(long, value_enum, required_unless_present_any = ["poly", "fixture"])]
    family: Option<FamilyArg>,
    /// Parameter k as an integer, fraction or decimal.
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    /// Closed-form point label: P0 P2 P3 P6 Q0 Q12 Qm6 Qm36.
    #[arg(long)]
    fixture: Option<String>,
    /// Polynomial file with one `coef i j l` term per line (oracle only).
    #[arg(long)]
    poly: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "qseries")]
    method: Vec<MethodArg>,
    #[arg(long, default_value_t = 1e-10)]
    eps: f64,
    #[arg(long, default_value_t = 400)]
    radius: u32,
    #[arg(long, default_value_t = 1024)]
    grid: usize,
    #[arg(long, value_enum, default_value = "human")]
    output: Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Which {
    Hauptmodul,
    #[value(name = "G", alias = "g")]
    G,
    Weight4,
    #[value(name = "E4", alias = "e4")]
    E4,
}

#[derive(clap::Args, Debug)]
struct SeriesArgs {
    #[arg(long, value_enum)]
    which: Which,
    #[arg(long, value_enum, default_value = "P")]
    family: FamilyArg,
    /// Highest exponent printed, in the series variable.
    #[arg(long)]
    order: i64,
    #[arg(long, value_enum, default_value = "human")]
    output: Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Paper,
    Boyd,
    Sebbar,
    Theorem42,
    Identities,
}

#[derive(clap::Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    #[arg(long, default_value_t = 600)]
    radius: u32,
    #[arg(long, default_value_t = 1e-10)]
    eps: f64,
    #[arg(long, value_enum, default_value = "human")]
    output: Output,
}

#[derive(clap::Args, Debug)]
struct TableArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// `start:stop:step`, each an integer, fraction or decimal.
    #[arg(long, allow_hyphen_values = true)]
    range: String,
    #[arg(long, value_enum, default_value = "qseries")]
    method: MethodArg,
    #[arg(long, default_value_t = 1e-10)]
    eps: f64,
    #[arg(long, default_value_t = 400)]
    radius: u32,
    #[arg(long, default_value_t = 1024)]
    grid: usize,
    #[arg(long, value_enum, default_value = "csv")]
    output: Output,
}

/// Parses `args` (including the program name), runs the command, and
/// returns the process exit code. Results go to `out`, diagnostics to
/// standard error.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::debug!("thread pool already configured: {e}");
        }
    }
    let result = match cli.command {
        Command::Measure(a) => cmd_measure(&a, out),
        Command::Series(a) => cmd_series(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Table(a) => cmd_table(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::InversionFailed { .. }) {
                eprintln!("hint: pass --fixture to start from a known τ");
            }
            e.exit_code()
        }
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Domain(format!("cannot write output: {e}"))
}

/// One measure row; field order is the JSON schema.
#[derive(Debug, Serialize)]
struct Row {
    method: Method,
    family: Option<Family>,
    k: Option<f64>,
    tau: Option<[f64; 2]>,
    value: f64,
    error: f64,
    terms: u64,
}

enum Point {
    Fixture(Fixture),
    K(Ratio<i64>),
    Poly(LaurentPoly3),
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn cmd_measure(a: &MeasureArgs, out: &mut dyn Write) -> Result<i32> {
    let family = a.family.map(Family::from);
    let point = if let Some(label) = &a.fixture {
        let fx: Fixture = label.parse()?;
        if let Some(f) = family {
            if f != fx.family() {
                return Err(Error::Domain(format!("fixture {fx} belongs to family {}", fx.family())));
            }
        }
        Point::Fixture(fx)
    } else if let Some(k) = &a.k {
        let k = parse_rational(k)?;
        let f = family.expect("clap requires --family without --poly");
        FamilySpec::of(f).check_regular(Complex64::new(ratio_f64(k), 0.0))?;
        Point::K(k)
    } else {
        let path = a.poly.as_ref().expect("clap requires one of --k, --fixture, --poly");
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Point::Poly(LaurentPoly3::from_text(&text)?)
    };
    let family = match &point {
        Point::Fixture(fx) => Some(fx.family()),
        _ => family,
    };

    let mut rows = Vec::new();
    for &m in &a.method {
        rows.push(measure_one(m.into(), family, &point, a)?);
    }
    write_rows(&rows, a.output, out).map_err(io_err)?;
    Ok(0)
}

fn measure_one(method: Method, family: Option<Family>, point: &Point, a: &MeasureArgs) -> Result<Row> {
    let k = match point {
        Point::Fixture(fx) => Some(Ratio::from_integer(fx.k())),
        Point::K(k) => Some(*k),
        Point::Poly(_) => None,
    };
    let row = |m: MeasureResult, tau: Option<Complex64>| Row {
        method: m.method,
        family,
        k: k.map(ratio_f64),
        tau: tau.map(|t| [t.re, t.im]),
        value: m.value,
        error: m.error_estimate,
        terms: m.terms_used,
    };
    if let Point::Poly(p) = point {
        if method != Method::Oracle {
            return Err(Error::Domain("--poly is only supported with --method oracle".into()));
        }
        return Ok(row(mahler_torus(p, a.grid)?, None));
    }
    let f = FamilySpec::of(family.expect("family is known for --k and --fixture"));
    let k = k.expect("k is known for --k and --fixture");
    let fixture = match point {
        Point::Fixture(fx) => Some(*fx),
        _ => None,
    };
    let tau_point = || match fixture {
        Some(fx) => Ok(paper_tau_fixture(fx)),
        None => {
            let t = k_to_t(&f, Complex64::new(ratio_f64(k), 0.0))?;
            invert_hauptmodul(&f, t, INVERSION_EPS)
        }
    };
    let fixture_tau = fixture.map(|fx| fx.tau());
    Ok(match method {
        Method::Qseries => {
            let at = tau_point()?;
            row(mahler_qseries(&f, &at, a.eps)?, Some(at.tau))
        }
        Method::Lattice => {
            let at = tau_point()?;
            row(kronecker_sum(&f, &at, a.radius)?.measure, Some(at.tau))
        }
        Method::Kseries => row(mahler_kseries(&f, ratio_f64(k), a.eps)?, fixture_tau),
        Method::Hecke => {
            let fx = fixture.ok_or_else(|| Error::Domain("--method hecke needs --fixture".into()))?;
            row(hecke_measure(fx, a.radius)?, fixture_tau)
        }
        Method::Oracle => row(mahler_torus(&parse_family(f.family, k), a.grid)?, fixture_tau),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_rows(rows: &[Row], output: Output, out: &mut dyn Write) -> std::io::Result<()> {
    match output {
        Output::Json => {
            for r in rows {
                writeln!(out, "{}", serde_json::to_string(r).expect("rows serialize"))?;
            }
        }
        Output::Csv => {
            writeln!(out, "method,family,k,tau_re,tau_im,value,M,error,terms")?;
            for r in rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.method,
                    r.family.map(|f| f.to_string()).unwrap_or_default(),
                    fmt_opt(r.k),
                    fmt_opt(r.tau.map(|t| t[0])),
                    fmt_opt(r.tau.map(|t| t[1])),
                    r.value,
                    r.value.exp(),
                    format!("{:e}", r.error),
                    r.terms
                )?;
            }
        }
        Output::Human => {
            for r in rows {
                let family = r.family.map(|f| f.to_string()).unwrap_or_else(|| "-".into());
                let k = r.k.map(|k| format!(" k={k}")).unwrap_or_default();
                let tau = r
                    .tau
                    .map(|t| format!(" tau={}{:+}i", t[0], t[1]))
                    .unwrap_or_default();
                writeln!(
                    out,
                    "{:<8} {family}{k}{tau}\n  m = {}\n  M = {}\n  error ≤ {:e}  ({} terms)",
                    r.method,
                    r.value,
                    r.value.exp(),
                    r.error,
                    r.terms
                )?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SeriesReport<'a> {
    which: &'a str,
    family: Option<Family>,
    grain: u32,
    order: i64,
    coefficients: Vec<(i64, String)>,
}

fn cmd_series(a: &SeriesArgs, out: &mut dyn Write) -> Result<i32> {
    if a.order < 0 {
        return Err(Error::Domain(format!("order {} is negative", a.order)));
    }
    let f = FamilySpec::of(a.family.into());
    let (name, family, s): (&str, Option<Family>, FormalSeries) = match a.which {
        Which::Hauptmodul => ("hauptmodul", Some(f.family), hauptmodul_series(&f, a.order)?),
        Which::G => ("G", Some(f.family), g_series(&f, a.order)?),
        Which::Weight4 => ("weight4", Some(f.family), weight4_combination(&f, a.order)?),
        Which::E4 => ("E4", None, e4_expansion(a.order)),
    };
    let start = s.valuation().unwrap_or(0);
    let coefficients: Vec<(i64, String)> = (start..=a.order)
        .map(|e| {
            let c = s.coeff(e).unwrap_or_else(BigRational::zero);
            (e, c.to_string())
        })
        .collect();
    match a.output {
        Output::Json => {
            let report = SeriesReport {
                which: name,
                family,
                grain: s.grain(),
                order: a.order,
                coefficients,
            };
            writeln!(out, "{}", serde_json::to_string(&report).expect("report serializes")).map_err(io_err)?;
        }
        Output::Human | Output::Csv => {
            let g = s.grain();
            let var = if g == 1 { "q".to_string() } else { format!("q^(1/{g})") };
            writeln!(out, "# {name}: exponent of w = {var}, coefficient").map_err(io_err)?;
            for (e, c) in coefficients {
                writeln!(out, "{e} {c}").map_err(io_err)?;
            }
        }
    }
    Ok(0)
}

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    value: f64,
    tolerance: f64,
    pass: bool,
}

impl Check {
    fn within(name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value: deviation,
            tolerance,
            pass: deviation.abs() <= tolerance,
        }
    }

    fn exact(name: impl Into<String>, ok: bool) -> Self {
        Check {
            name: name.into(),
            value: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            pass: ok,
        }
    }
}

/// `M(X + 1/X + Y + 1/Y + Z + 1/Z)`, equivalently `M(1 + x + y)`.
pub const M_P0: f64 = 1.381_356_444_518_497_8;

fn verify_checks(a: &VerifyArgs) -> Result<Vec<Check>> {
    let p = FamilySpec::p();
    let q = FamilySpec::q();
    let qs = |f: &FamilySpec, fx: Fixture| -> Result<f64> {
        Ok(mahler_qseries(f, &paper_tau_fixture(fx), a.eps.min(1e-15))?.value)
    };
    Ok(match a.suite {
        Suite::Sebbar => {
            let s = form_sum(&sebbar_spec(), a.radius)?;
            vec![Check::within("sebbar zero sum", s.value, 1e-4)]
        }
        Suite::Boyd => vec![
            Check::within("boyd relation (q-series)", boyd_relation_residual(a.radius.max(100), BoydPath::Fast)?, 1e-6),
            Check::within(
                "boyd relation (lattice)",
                boyd_relation_residual(a.radius.max(100), BoydPath::Slow)?,
                1e-3,
            ),
        ],
        Suite::Theorem42 => {
            let t = theorem42_check(a.radius.max(100))?;
            let combined = t.lhs.error_estimate + t.rhs.error_estimate;
            vec![
                Check::within("theorem42 lhs = rhs", t.lhs.value - t.rhs.value, 1e-4),
                Check::within("theorem42 9·lhs = 8·rhs", t.weighted_residual, (9.0 * combined).max(1e-4)),
                Check::within(
                    "theorem42 lhs vs q-series at Q0",
                    t.lhs.value - 2.0 * qs(&q, Fixture::Q0)? * PI3 / (12.0 * 3f64.sqrt()),
                    combined.max(1e-4),
                ),
            ]
        }
        Suite::Identities => {
            let mut v = Vec::new();
            for f in [&p, &q] {
                let c = series_identity_check(f, 20)?;
                v.push(Check::exact(format!("series identity {} order 20", f.family), c.holds()));
                let eis = weight4_eisenstein_side(f, 30);
                let eta = weight4_eta_side(f, 30)?;
                v.push(Check::exact(
                    format!("weight-4 identity {} order 30", f.family),
                    eis.first_mismatch(&eta)?.is_none(),
                ));
            }
            v
        }
        Suite::Paper => {
            let p0 = qs(&p, Fixture::P0)?;
            let l = dirichlet_l_chi_minus3(2)?;
            let mut v = vec![
                Check::within("M(P0) q-series", p0.exp() - M_P0, 1e-10),
                Check::within(
                    "M(P0) L-value",
                    (3.0 * 3f64.sqrt() / (4.0 * std::f64::consts::PI) * l).exp() - M_P0,
                    1e-10,
                ),
                Check::within("m(Q12) - 4m(Q0)", qs(&q, Fixture::Q12)? - 4.0 * qs(&q, Fixture::Q0)?, 1e-8),
            ];
            for fx in [Fixture::P6, Fixture::P2, Fixture::P3] {
                let h = hecke_measure(fx, a.radius)?.value;
                v.push(Check::within(format!("hecke {fx} vs q-series"), h - qs(&p, fx)?, 1e-4));
            }
            v
        }
    })
}

const PI3: f64 = std::f64::consts::PI * std::f64::consts::PI * std::f64::consts::PI;

#[derive(Serialize)]
struct VerifyReport<'a> {
    suite: &'a str,
    pass: bool,
    checks: &'a [Check],
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let checks = verify_checks(a)?;
    let pass = checks.iter().all(|c| c.pass);
    let suite = a.suite.to_possible_value().expect("no skipped variants").get_name().to_string();
    match a.output {
        Output::Json => {
            let report = VerifyReport {
                suite: &suite,
                pass,
                checks: &checks,
            };
            writeln!(out, "{}", serde_json::to_string(&report).expect("report serializes")).map_err(io_err)?;
        }
        Output::Human | Output::Csv => {
            for c in &checks {
                let tag = if c.pass { "PASS" } else { "FAIL" };
                writeln!(out, "{tag} {}: {:e} (tolerance {:e})", c.name, c.value, c.tolerance).map_err(io_err)?;
            }
        }
    }
    Ok(if pass { 0 } else { EXIT_VERIFY_FAILED })
}

fn parse_range(s: &str) -> Result<Vec<Ratio<i64>>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("range `{s}` is not start:stop:step")));
    }
    let (start, stop, step) = (parse_rational(parts[0])?, parse_rational(parts[1])?, parse_rational(parts[2])?);
    if step <= Ratio::zero() {
        return Err(Error::Parse(format!("range step {step} must be positive")));
    }
    if stop < start {
        return Err(Error::Parse(format!("range stop {stop} is below start {start}")));
    }
    let count = ((stop - start) / step).floor().to_integer() + 1;
    if count > 100_000 {
        return Err(Error::Parse(format!("range `{s}` has {count} points")));
    }
    Ok((0..count).map(|i| start + step * i).collect())
}

#[derive(Serialize)]
struct TableRow {
    k: f64,
    m: Option<f64>,
    #[serde(rename = "M")]
    big_m: Option<f64>,
    err: String,
    method: Method,
}

fn table_row(f: &FamilySpec, k: Ratio<i64>, method: Method, a: &TableArgs) -> Result<MeasureResult> {
    let kf = ratio_f64(k);
    f.check_regular(Complex64::new(kf, 0.0))?;
    match method {
        Method::Qseries | Method::Lattice => {
            let t = k_to_t(f, Complex64::new(kf, 0.0))?;
            let at = invert_hauptmodul(f, t, INVERSION_EPS)?;
            if method == Method::Qseries {
                mahler_qseries(f, &at, a.eps)
            } else {
                Ok(kronecker_sum(f, &at, a.radius)?.measure)
            }
        }
        Method::Kseries => mahler_kseries(f, kf, a.eps),
        Method::Oracle => mahler_torus(&parse_family(f.family, k), a.grid),
        Method::Hecke => unreachable!("rejected before tabulating"),
    }
}

fn cmd_table(a: &TableArgs, out: &mut dyn Write) -> Result<i32> {
    let ks = parse_range(&a.range)?;
    let method: Method = a.method.into();
    if method == Method::Hecke {
        return Err(Error::Domain("hecke values exist only at fixtures; use measure --fixture".into()));
    }
    let f = FamilySpec::of(a.family.into());
    let mut rows = Vec::with_capacity(ks.len());
    for k in ks {
        let row = match table_row(&f, k, method, a) {
            Ok(m) => TableRow {
                k: ratio_f64(k),
                m: Some(m.value),
                big_m: Some(m.value.exp()),
                err: format!("{:e}", m.error_estimate),
                method,
            },
            Err(e) => {
                let reason = match e {
                    Error::SingularParameter { .. } => "singular",
                    Error::InversionFailed { .. } => "inversion",
                    Error::Domain(_) => "domain",
                    Error::ZeroFiber => "zero-fiber",
                    _ => return Err(e),
                };
                log::info!("k = {k}: {e}");
                TableRow {
                    k: ratio_f64(k),
                    m: None,
                    big_m: None,
                    err: format!("NaN-{reason}"),
                    method,
                }
            }
        };
        rows.push(row);
    }
    match a.output {
        Output::Json => {
            for r in &rows {
                writeln!(out, "{}", serde_json::to_string(r).expect("rows serialize")).map_err(io_err)?;
            }
        }
        Output::Csv | Output::Human => {
            writeln!(out, "k,m,M,err,method").map_err(io_err)?;
            for r in &rows {
                let nan = || "NaN".to_string();
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.k,
                    r.m.map(|v| v.to_string()).unwrap_or_else(nan),
                    r.big_m.map(|v| v.to_string()).unwrap_or_else(nan),
                    r.err,
                    r.method
                )
                .map_err(io_err)?;
            }
        }
    }
    Ok(0)
}
