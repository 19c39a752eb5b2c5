//! `wpv` — exact Weil–Petersson volume polynomials from the boundary-length
//! recursion, with intersection-number extraction, growth constants, and
//! the engine's verification suites.
//!
//! Exit codes: 0 success, 1 check failure (or computation error), 2 usage
//! error (including invalid signatures and malformed arguments).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::{BigInt, One, Signed, ToPrimitive};
use rayon::prelude::*;

use wpv_core::exactalg::{rat, ratio};
use wpv_core::growth::{growth, CurveClass};
use wpv_core::intersect::{check_virasoro_suite, mixed_number, tau_bracket};
use wpv_core::kernel::f_poly;
use wpv_core::mcshane::{verify_torus_identity, TorusPoint};
use wpv_core::quadrature::f_kernel_quadrature;
use wpv_core::recursion::is_stable;
use wpv_core::zograf::crosscheck;
use wpv_core::{CheckReport, GradedPoly, Monomial, Rational, RecursionCache, Slot, VolumePoly};

#[derive(Parser)]
#[command(name = "wpv", version, about = "Exact Weil-Petersson volume polynomials and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Output format for polynomials and numbers.
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    format: Format,
    /// Volume-cache file (overrides WPV_CACHE and the default data dir).
    #[arg(long, global = true, value_name = "PATH")]
    cache: Option<PathBuf>,
    /// Worker threads for parallelizable check suites.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Print cache statistics to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    Json,
    Latex,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the volume polynomial V_{g,n}(b1,...,bn).
    Volume {
        #[arg(short = 'g', value_name = "GENUS")]
        g: u32,
        #[arg(short = 'n', value_name = "BOUNDARIES")]
        n: u32,
        /// Substitute exact rational boundary lengths b1,b2,... (e.g. 1/2,3).
        #[arg(long, value_name = "b1,b2,...")]
        eval: Option<String>,
    },
    /// Intersection number <tau_{a1} ... tau_{an}> with the genus inferred
    /// from the exponents.
    Tau {
        /// Comma-separated exponents a1,a2,...
        exponents: String,
    },
    /// Mixed psi/symplectic-class number at explicit genus (carries its
    /// pi-power normalization).
    Mixed {
        #[arg(short = 'g', value_name = "GENUS")]
        g: u32,
        /// Comma-separated psi exponents a1,a2,...
        exponents: String,
    },
    /// Level-set volume, count polynomial P(L), and growth constant c(gamma)
    /// for a simple closed curve class.
    Growth {
        /// Ambient surface signature, e.g. 2,0
        #[arg(long, value_name = "g,n")]
        ambient: String,
        /// Curve type: "nonsep" or "sep:G1:I1" (I1 a comma list of boundary
        /// labels carried by the genus-G1 piece, possibly empty).
        #[arg(long, value_name = "nonsep|sep:g1:I1")]
        curve: String,
    },
    /// Verification suites (exit 1 when a suite fails).
    Check {
        #[command(subcommand)]
        suite: CheckCmd,
    },
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Compare cusped volumes against the independent genus-0/1 recursions.
    Zograf {
        #[arg(long, default_value_t = 8)]
        max_n0: u32,
        #[arg(long, default_value_t = 6)]
        max_n1: u32,
    },
    /// String/dilaton/bracket-recursion/coefficient-recursion identities,
    /// exhaustive over all signatures with 2g-2+n <= max-dim.
    Virasoro {
        #[arg(long, default_value_t = 5)]
        max_dim: u32,
    },
    /// Closed-form kernel moments against adaptive quadrature.
    Kernel {
        #[arg(long, default_value_t = 6)]
        max_k: u32,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Simple-geodesic identity on a once-punctured torus given by traces.
    Mcshane {
        #[arg(long, value_name = "x,y,z")]
        trace: String,
        #[arg(long, default_value_t = 25)]
        depth: u32,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Homogeneity/positivity/symmetry of every volume up to a complexity.
    Invariants {
        #[arg(long, default_value_t = 6)]
        max_complexity: u32,
    },
}

#[derive(Debug)]
enum AppError {
    /// Bad input from the user: exit 2.
    Usage(String),
    /// Computation failed or a check did not pass: exit 1.
    Failed(String),
}

impl AppError {
    fn usage(e: impl ToString) -> Self {
        AppError::Usage(e.to_string())
    }
    fn failed(e: impl ToString) -> Self {
        AppError::Failed(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.common.jobs {
        // Best effort; a pool may already exist in tests.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match run(&cli.command, &cli.common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Runs the command against a cache loaded per the resolution order
/// (--cache, then WPV_CACHE, then the user data dir) and persists any newly
/// computed volumes. Returns whether checks passed.
fn run(command: &Command, common: &Common) -> Result<bool, AppError> {
    let cache_path = resolve_cache_path(common.cache.as_deref());
    let (cache, loaded) = open_cache(cache_path.as_deref());

    let ok = dispatch(command, common, &cache)?;

    let computed = cache.computed_count();
    if common.verbose > 0 {
        eprintln!("cache: loaded {loaded} volumes, computed {computed} new");
    }
    if computed > 0 {
        if let Some(path) = cache_path.as_deref() {
            if let Err(e) = cache.save(path) {
                eprintln!("warning: could not write cache {}: {e}", path.display());
            }
        }
    }
    Ok(ok)
}

fn resolve_cache_path(flag: Option<&Path>) -> Option<PathBuf> {
    if let Some(p) = flag {
        return Some(p.to_path_buf());
    }
    if let Ok(p) = std::env::var("WPV_CACHE") {
        if !p.is_empty() {
            return Some(PathBuf::from(p));
        }
    }
    if let Ok(x) = std::env::var("XDG_DATA_HOME") {
        if !x.is_empty() {
            return Some(PathBuf::from(x).join("wpv").join("volumes.json"));
        }
    }
    std::env::var("HOME")
        .ok()
        .filter(|h| !h.is_empty())
        .map(|h| PathBuf::from(h).join(".local/share/wpv/volumes.json"))
}

fn open_cache(path: Option<&Path>) -> (RecursionCache, usize) {
    if let Some(p) = path {
        if p.exists() {
            match RecursionCache::load(p) {
                Ok(cache) => {
                    let loaded = cache.entry_count();
                    return (cache, loaded);
                }
                Err(e) => {
                    eprintln!(
                        "warning: ignoring unusable cache {}: {e}; recomputing",
                        p.display()
                    );
                }
            }
        }
    }
    (RecursionCache::new(), 0)
}

fn dispatch(command: &Command, common: &Common, cache: &RecursionCache) -> Result<bool, AppError> {
    match command {
        Command::Volume { g, n, eval } => {
            cmd_volume(*g, *n, eval.as_deref(), common.format, cache)?;
            Ok(true)
        }
        Command::Tau { exponents } => {
            let a = parse_u32_list(exponents)?;
            if a.is_empty() {
                return Err(AppError::Usage("at least one exponent required".into()));
            }
            let value = tau_bracket(&a, cache).map_err(AppError::failed)?;
            println!("{}", render_rational(&value, common.format));
            Ok(true)
        }
        Command::Mixed { g, exponents } => {
            let a = parse_u32_list(exponents)?;
            if a.is_empty() {
                return Err(AppError::Usage("at least one exponent required".into()));
            }
            let value = mixed_number(*g, &a, cache).map_err(AppError::usage)?;
            println!("{}", render_poly(&value, common.format));
            Ok(true)
        }
        Command::Growth { ambient, curve } => {
            cmd_growth(ambient, curve, common.format, cache)?;
            Ok(true)
        }
        Command::Check { suite } => cmd_check(suite, cache),
    }
}

fn cmd_volume(
    g: u32,
    n: u32,
    eval: Option<&str>,
    format: Format,
    cache: &RecursionCache,
) -> Result<(), AppError> {
    let vol = cache.volume(g, n).map_err(AppError::usage)?;
    match eval {
        None => match format {
            Format::Plain => println!("{}", vol.poly()),
            Format::Latex => println!("{}", latex_poly(vol.poly())),
            Format::Json => println!(
                "{}",
                serde_json::to_string(&vol.to_repr()).map_err(AppError::failed)?
            ),
        },
        Some(list) => {
            let values = parse_rational_list(list)?;
            if values.len() != n as usize {
                return Err(AppError::Usage(format!(
                    "--eval expects {n} lengths, got {}",
                    values.len()
                )));
            }
            let map: BTreeMap<Slot, Rational> = values
                .iter()
                .enumerate()
                .map(|(i, v)| (Slot::B(i as u32 + 1), v.clone()))
                .collect();
            let substituted = vol.poly().substitute(&map).map_err(AppError::failed)?;
            let approx = substituted.evaluate_f64(&BTreeMap::new(), 30);
            match format {
                Format::Plain => println!("{substituted} ≈ {approx}"),
                Format::Latex => println!("{}", latex_poly(&substituted)),
                Format::Json => {
                    let body = serde_json::json!({
                        "g": g,
                        "n": n,
                        "eval": values.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                        "pi_poly": substituted.to_term_reprs(),
                        "approx": approx,
                    });
                    println!("{body}");
                }
            }
        }
    }
    Ok(())
}

fn cmd_growth(
    ambient: &str,
    curve: &str,
    format: Format,
    cache: &RecursionCache,
) -> Result<(), AppError> {
    let (g, n) = parse_signature(ambient)?;
    let class = parse_curve(g, n, curve)?;
    let result = growth(&class, cache).map_err(AppError::failed)?;
    let c = result.c_gamma.coeff(&Monomial::one());
    match format {
        Format::Json => {
            let body = serde_json::json!({
                "ambient": {"g": g, "n": n},
                "level_poly": result.level_poly.to_term_reprs(),
                "count_poly": result.count_poly.to_term_reprs(),
                "exponent": result.exponent,
                "c_gamma": c.to_string(),
                "symmetric": result.symmetric,
            });
            println!("{body}");
        }
        _ => {
            let render = |p: &GradedPoly| match format {
                Format::Latex => latex_poly(p),
                _ => p.to_string(),
            };
            println!("level volume (even part in x): {}", render(&result.level_poly));
            println!("count polynomial P (in x = L): {}", render(&result.count_poly));
            println!(
                "leading term: {} * L^{}",
                render_rational(&c, format),
                result.exponent
            );
            println!("c(gamma) = {}", render_rational(&c, format));
            println!(
                "symmetric pieces: {}",
                if result.symmetric { "yes" } else { "no" }
            );
        }
    }
    Ok(())
}

fn cmd_check(suite: &CheckCmd, cache: &RecursionCache) -> Result<bool, AppError> {
    match suite {
        CheckCmd::Zograf { max_n0, max_n1 } => {
            let report = crosscheck(*max_n0, *max_n1, cache).map_err(AppError::failed)?;
            println!("{report}");
            Ok(report.passed())
        }
        CheckCmd::Virasoro { max_dim } => {
            let reports = check_virasoro_suite(*max_dim, cache).map_err(AppError::failed)?;
            let mut ok = true;
            for r in &reports {
                println!("{r}");
                ok &= r.passed();
            }
            Ok(ok)
        }
        CheckCmd::Kernel { max_k, tol } => {
            let mut report = CheckReport::new("kernel");
            for k in 0..=*max_k {
                let poly = f_poly(k);
                for b in [ratio(1, 2), rat(1), rat(2)] {
                    let mut values = BTreeMap::new();
                    values.insert(Slot::X, b.clone());
                    let exact = poly.evaluate_f64(&values, 30);
                    let numeric = f_kernel_quadrature(k, b.to_f64().unwrap());
                    let rel = ((exact - numeric) / exact).abs();
                    println!("k={k}  b={b}  rel_error={rel:.3e}");
                    if rel <= *tol {
                        report.record_pass();
                    } else {
                        report.record_fail(format!("k={k} b={b}: rel error {rel:e}"));
                    }
                }
            }
            println!("{report}");
            Ok(report.passed())
        }
        CheckCmd::Mcshane { trace, depth, tol } => {
            let t = parse_f64_list(trace)?;
            if t.len() != 3 {
                return Err(AppError::Usage("--trace expects x,y,z".into()));
            }
            let point = TorusPoint::new(t[0], t[1], t[2]).map_err(AppError::usage)?;
            let report = verify_torus_identity(&point, *depth, *tol);
            println!("{report}");
            Ok(report.passed())
        }
        CheckCmd::Invariants { max_complexity } => {
            let mut signatures = Vec::new();
            for g in 0..=(max_complexity + 1) / 2 {
                for n in 1..=(max_complexity + 2).saturating_sub(2 * g) {
                    if is_stable(g, n) {
                        signatures.push((g, n));
                    }
                }
            }
            let failures: Vec<String> = signatures
                .par_iter()
                .map(|&(g, n)| -> Result<Vec<String>, String> {
                    let vol = cache.volume(g, n).map_err(|e| e.to_string())?;
                    Ok(vol
                        .check_invariants()
                        .into_iter()
                        .map(|v| format!("V({g},{n}): {v}"))
                        .collect())
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(AppError::failed)?
                .into_iter()
                .flatten()
                .collect();
            let mut report = CheckReport::new("invariants");
            report.total = signatures.len() as u64;
            report.failures = failures;
            println!("{report}");
            Ok(report.passed())
        }
    }
}

// ---------- argument parsing ----------

fn parse_u32_list(s: &str) -> Result<Vec<u32>, AppError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<u32>()
                .map_err(|e| AppError::Usage(format!("bad exponent {p:?}: {e}")))
        })
        .collect()
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, AppError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| AppError::Usage(format!("bad number {p:?}: {e}")))
        })
        .collect()
}

fn parse_rational_list(s: &str) -> Result<Vec<Rational>, AppError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<Rational>()
                .map_err(|e| AppError::Usage(format!("bad rational {p:?} (use p or p/q): {e}")))
        })
        .collect()
}

fn parse_signature(s: &str) -> Result<(u32, u32), AppError> {
    let parts = parse_u32_list(s)?;
    if parts.len() != 2 {
        return Err(AppError::Usage(format!("--ambient expects g,n; got {s:?}")));
    }
    Ok((parts[0], parts[1]))
}

fn parse_curve(g: u32, n: u32, s: &str) -> Result<CurveClass, AppError> {
    if s == "nonsep" {
        return CurveClass::non_separating(g, n).map_err(AppError::usage);
    }
    let mut it = s.splitn(3, ':');
    if it.next() != Some("sep") {
        return Err(AppError::Usage(format!(
            "--curve must be \"nonsep\" or \"sep:g1:I1\"; got {s:?}"
        )));
    }
    let g1 = it
        .next()
        .ok_or_else(|| AppError::Usage("sep needs a piece genus: sep:g1:I1".into()))?
        .parse::<u32>()
        .map_err(|e| AppError::Usage(format!("bad piece genus: {e}")))?;
    let set1 = match it.next() {
        None | Some("") => Vec::new(),
        Some(rest) => parse_u32_list(rest)?,
    };
    CurveClass::separating(g, n, g1, set1.into_iter().collect()).map_err(AppError::usage)
}

// ---------- rendering ----------

fn render_rational(r: &Rational, format: Format) -> String {
    match format {
        Format::Plain => r.to_string(),
        Format::Json => format!("{{\"value\":\"{r}\"}}"),
        Format::Latex => latex_rational(r),
    }
}

fn latex_rational(r: &Rational) -> String {
    let sign = if r.is_negative() { "-" } else { "" };
    let (p, q) = (r.numer().abs(), r.denom().clone());
    if q.is_one() {
        format!("{sign}{p}")
    } else {
        format!("{sign}\\frac{{{p}}}{{{q}}}")
    }
}

fn latex_exponent(base: &str, e: u32) -> String {
    if e < 10 {
        format!("{base}^{e}")
    } else {
        format!("{base}^{{{e}}}")
    }
}

fn latex_monomial(m: &Monomial) -> String {
    let mut out = String::new();
    if m.pi2_exp() > 0 {
        out.push_str(&latex_exponent("\\pi", 2 * m.pi2_exp()));
    }
    for (slot, e) in m.var_exps() {
        let base = match slot {
            Slot::B(i) if i < 10 => format!("b_{i}"),
            Slot::B(i) => format!("b_{{{i}}}"),
            Slot::X => "x".to_string(),
            Slot::Y => "y".to_string(),
        };
        out.push_str(&latex_exponent(&base, 2 * e));
    }
    out
}

/// Deterministic LaTeX rendering: decreasing π power, then monomial order;
/// \frac for non-unit denominators with a unit numerator absorbed into the
/// monomial (π²/12 → `\frac{\pi^2}{12}`), integer coefficients juxtaposed
/// (2π² → `2\pi^2`).
fn latex_poly(p: &GradedPoly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut items: Vec<(&Monomial, &Rational)> = p.terms().collect();
    items.sort_by(|(a, _), (b, _)| b.pi2_exp().cmp(&a.pi2_exp()).then_with(|| a.cmp(b)));
    let mut out = String::new();
    for (idx, (m, c)) in items.into_iter().enumerate() {
        if c.is_negative() {
            out.push('-');
        } else if idx > 0 {
            out.push('+');
        }
        let p_abs: BigInt = c.numer().abs();
        let q = c.denom();
        let mono = latex_monomial(m);
        let piece = if q.is_one() {
            if mono.is_empty() {
                p_abs.to_string()
            } else if p_abs.is_one() {
                mono
            } else {
                format!("{p_abs}{mono}")
            }
        } else {
            let top = if mono.is_empty() {
                p_abs.to_string()
            } else if p_abs.is_one() {
                mono
            } else {
                format!("{p_abs}{mono}")
            };
            format!("\\frac{{{top}}}{{{q}}}")
        };
        out.push_str(&piece);
    }
    out
}

fn render_poly(p: &GradedPoly, format: Format) -> String {
    match format {
        Format::Plain => p.to_string(),
        Format::Latex => latex_poly(p),
        Format::Json => serde_json::json!({ "terms": p.to_term_reprs() }).to_string(),
    }
}

// Referenced from integration tests to guarantee schema round-trips.
#[allow(dead_code)]
fn volume_schema_roundtrip(v: &VolumePoly) -> VolumePoly {
    VolumePoly::from_repr(&v.to_repr()).expect("schema must round-trip")
}
