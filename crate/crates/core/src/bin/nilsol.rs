use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_rational::Rational64;
use serde::Serialize;
use serde_json::{json, Value};

use nilsol::counting::{sol_brute, sol_fast, CyclicFunction};
use nilsol::error::{Error, Result};
use nilsol::extremal::{self, Annealing, Degeneracy, Mode, SearchBudget};
use nilsol::forms::LinearFormSystem;
use nilsol::gowers::{gowers_definitional_of, gowers_norm, gowers_norm_definitional, gowers_norm_of};
use nilsol::harness::{self, Quantity, ScanConfig, ScanMode};
use nilsol::io;
use nilsol::nil::{enumerate_characters, shared};
use nilsol::periodic::{build_periodic_irrational, level_one_sums, vertical_sum, vertical_tolerance, verify_periodicity_range};

#[derive(Parser)]
#[command(name = "nilsol", version, about = "Solution measures, Gowers norms, extremal sets and periodic nilsequences")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Directory that also receives the output file(s).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Wall-clock budget for searches; exhaustion exits with code 2.
    #[arg(long = "budget-ms", global = true)]
    budget_ms: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Normalized solution count of a system on a set or on functions.
    Sol {
        #[arg(long)]
        system: String,
        #[arg(long, conflicts_with = "functions")]
        set: Option<PathBuf>,
        /// One function CSV per form, comma separated.
        #[arg(long, value_delimiter = ',')]
        functions: Vec<PathBuf>,
        /// Use the Fourier path over the kernel presentation.
        #[arg(long)]
        fast: bool,
    },
    /// Gowers U^d norm of a set indicator or a function.
    Gowers {
        #[arg(long, conflicts_with = "function")]
        set: Option<PathBuf>,
        #[arg(long)]
        function: Option<PathBuf>,
        #[arg(long)]
        d: u32,
        /// Subtract the mean first (balanced function).
        #[arg(long)]
        centered: bool,
        /// Evaluate the defining average directly.
        #[arg(long)]
        definitional: bool,
    },
    /// Minimum of Sol over sets of density at least alpha.
    MinSol(ExtremalArgs),
    /// Maximum of Sol over sets of density at most alpha.
    MaxSol(ExtremalArgs),
    /// Largest density of a set free of nontrivial solutions.
    MaxFree {
        #[arg(long, conflicts_with = "system")]
        family: Option<PathBuf>,
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        n: u64,
        #[arg(long, conflicts_with = "heuristic")]
        exact: bool,
        #[arg(long)]
        heuristic: bool,
        #[arg(long, default_value_t = 200)]
        iterations: u64,
        /// Only forbid solutions with pairwise distinct values.
        #[arg(long)]
        weak: bool,
    },
    /// Explicit solution-free sets.
    #[command(subcommand)]
    Construct(Construct),
    /// Kernel presentation of the image of a system.
    Kernelize {
        #[arg(long)]
        system: String,
    },
    #[command(subcommand)]
    Nil(Nil),
    /// Extremal quantity across a range of moduli, written as CSV and SVG.
    Scan {
        #[arg(long)]
        system: String,
        #[arg(long, value_parser = Quantity::parse)]
        quantity: Quantity,
        #[arg(long, default_value = "0")]
        alpha: String,
        /// Comma-separated moduli and ranges, e.g. `5-40,53,101`.
        #[arg(long)]
        moduli: String,
        #[arg(long)]
        primes_only: bool,
        #[arg(long)]
        heuristic: bool,
        #[arg(long, default_value_t = 20_000)]
        iterations: u64,
        #[arg(long)]
        weak: bool,
    },
    /// Run a scripted acceptance experiment by id or number.
    Reproduce {
        id: String,
    },
}

#[derive(Args)]
struct ExtremalArgs {
    #[arg(long)]
    system: String,
    /// Decimal or `p/q`.
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    n: u64,
    #[arg(long, conflicts_with = "heuristic")]
    exact: bool,
    #[arg(long)]
    heuristic: bool,
    #[arg(long, default_value_t = 20_000)]
    iterations: u64,
}

#[derive(Subcommand)]
enum Construct {
    /// `{x : x^d mod p near floor(p / k^d)}`, free of `(x, kx)`.
    Weyl {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        d: u32,
    },
    /// Union of alternate points on the cycles of `x -> kx`.
    Mult {
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
        #[arg(long)]
        p: u64,
    },
    /// Densest solution-free interval.
    Interval {
        #[arg(long)]
        system: String,
        #[arg(long)]
        n: u64,
    },
    /// Exact free density of `(x, kx)` at prime p, optionally with m(alpha).
    Pair {
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        alpha: Option<String>,
    },
}

#[derive(Subcommand)]
enum Nil {
    /// q-periodic, A-irrational polynomial sequence.
    BuildPeriodic {
        #[arg(long)]
        model: String,
        #[arg(long)]
        q: u64,
        #[arg(long = "A")]
        a: u64,
        #[arg(long, value_enum, default_value_t = Verify::Quick)]
        verify: Verify,
    },
    /// Nontrivial level characters of bounded complexity.
    Characters {
        #[arg(long)]
        model: String,
        #[arg(long)]
        level: usize,
        #[arg(long = "A")]
        a: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Verify {
    None,
    Quick,
    Full,
}

/// A file path, or `Nap` for k-term progressions, or `pair:K` for `(n1, K n1)`.
fn load_system(spec: &str) -> Result<LinearFormSystem> {
    if let Some(k) = spec.strip_suffix("ap").and_then(|k| k.parse::<usize>().ok()) {
        if k >= 1 {
            return Ok(LinearFormSystem::arithmetic_progression(k));
        }
    }
    if let Some(k) = spec.strip_prefix("pair:") {
        let k = k.parse().map_err(|_| Error::Parse(format!("bad multiplier in '{spec}'")))?;
        return Ok(LinearFormSystem::dependent_pair(k));
    }
    io::read_system(Path::new(spec))
}

/// Nonnegative decimal or `p/q`, kept exact.
fn parse_rational(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let bad = || Error::Parse(format!("expected a nonnegative decimal or p/q, got '{s}'"));
    if let Some((p, q)) = s.split_once('/') {
        let (p, q): (u32, u32) = (p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?);
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(p.into(), q.into()));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 12 || !frac.bytes().all(|c| c.is_ascii_digit()) || !int.bytes().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let numer: i64 = if digits.is_empty() { return Err(bad()) } else { digits.parse().map_err(|_| bad())? };
    Ok(Rational64::new(numer, 10i64.pow(frac.len() as u32)))
}

fn parse_moduli(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || Error::Parse(format!("bad modulus or range '{part}'"));
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

fn budget(g: &Global) -> SearchBudget {
    g.budget_ms.map_or_else(SearchBudget::default, SearchBudget::with_time_ms)
}

fn extremal_mode(g: &Global, a: &ExtremalArgs) -> Mode {
    if a.heuristic {
        let b = budget(g);
        Mode::Heuristic {
            seed: g.seed,
            schedule: Annealing {
                deadline: b.deadline,
                ..Annealing::new(a.iterations)
            },
        }
    } else {
        Mode::Exact(budget(g))
    }
}

/// Result payload plus the stem used when writing under `--out`.
struct Output {
    stem: &'static str,
    json: Value,
    /// Rows for `--format csv`; defaults to one row of the top-level scalars.
    csv: Option<String>,
    extra: Vec<(String, String)>,
}

impl Output {
    fn new(stem: &'static str, value: impl Serialize) -> Result<Self> {
        Ok(Output {
            stem,
            json: serde_json::to_value(value)?,
            csv: None,
            extra: Vec::new(),
        })
    }
}

fn scalar_csv(v: &Value) -> Result<String> {
    let Value::Object(map) = v else {
        return Err(Error::Parse("result has no tabular form; use --format json".into()));
    };
    let cells: Vec<(&String, String)> = map
        .iter()
        .filter_map(|(k, v)| match v {
            Value::String(s) => Some((k, s.clone())),
            Value::Number(_) | Value::Bool(_) => Some((k, v.to_string())),
            Value::Object(o) => o.get("exact").and_then(Value::as_str).map(|s| (k, s.to_string())),
            _ => None,
        })
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(cells.iter().map(|c| c.0.as_str())).map_err(|e| Error::Parse(e.to_string()))?;
    w.write_record(cells.iter().map(|c| c.1.as_str())).map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(w.into_inner().map_err(|e| Error::Parse(e.to_string()))?).map_err(|e| Error::Parse(e.to_string()))
}

fn run(cli: &Cli) -> Result<Output> {
    let g = &cli.global;
    match &cli.command {
        Command::Sol { system, set, functions, fast } => {
            let system = load_system(system)?;
            let fs: Vec<CyclicFunction> = match set {
                Some(path) => vec![CyclicFunction::indicator(&io::read_set(path)?); system.num_forms()],
                None if functions.len() == system.num_forms() => {
                    functions.iter().map(|p| io::read_function(p)).collect::<Result<_>>()?
                }
                None => {
                    return Err(Error::Parse(format!(
                        "pass --set or exactly {} function files",
                        system.num_forms()
                    )))
                }
            };
            let (value, exact, method) = if *fast {
                let kp = system.kernelize()?;
                (sol_fast(&fs, &system, &kp)?, None, "fourier")
            } else {
                let r = sol_brute(&fs, &system)?;
                (r.value, r.exact, "brute")
            };
            Output::new(
                "sol",
                json!({
                    "count": exact.map(|e| e.0.to_string()),
                    "total": exact.map(|e| e.1.to_string()),
                    "value": value.re,
                    "valueIm": value.im,
                    "method": method,
                }),
            )
        }
        Command::Gowers { set, function, d, centered, definitional } => {
            let f = match (set, function) {
                (Some(p), _) => CyclicFunction::indicator(&io::read_set(p)?),
                (None, Some(p)) => io::read_function(p)?,
                (None, None) => return Err(Error::Parse("pass --set or --function".into())),
            };
            let norm = match (*centered, *definitional) {
                (false, false) => gowers_norm(&f, *d)?,
                (false, true) => gowers_norm_definitional(&f, *d)?,
                (true, definitional) => {
                    let mean = f.values().iter().sum::<Complex64>() / f.modulus() as f64;
                    let balanced: Vec<Complex64> = f.values().iter().map(|v| v - mean).collect();
                    if definitional {
                        gowers_definitional_of(&balanced, *d)?
                    } else {
                        gowers_norm_of(&balanced, *d)?
                    }
                }
            };
            Output::new(
                "gowers",
                json!({ "N": f.modulus(), "d": d, "norm": norm, "method": if *definitional { "definitional" } else { "fourier" } }),
            )
        }
        Command::MinSol(a) | Command::MaxSol(a) => {
            let system = load_system(&a.system)?;
            let alpha = parse_rational(&a.alpha)?;
            let mode = extremal_mode(g, a);
            if matches!(cli.command, Command::MinSol(_)) {
                Output::new("min-sol", extremal::min_sol(&system, alpha, a.n, &mode)?)
            } else {
                Output::new("max-sol", extremal::max_sol(&system, alpha, a.n, &mode)?)
            }
        }
        Command::MaxFree { family, system, n, heuristic, iterations, weak, .. } => {
            let family = match (family, system) {
                (Some(p), _) => io::read_family(p)?,
                (None, Some(s)) => vec![load_system(s)?],
                (None, None) => return Err(Error::Parse("pass --family or --system".into())),
            };
            let degeneracy = if *weak { Degeneracy::Weak } else { Degeneracy::Strict };
            let result = if *heuristic {
                extremal::max_free_density_heuristic(&family, *n, degeneracy, g.seed, *iterations)?
            } else {
                extremal::max_free_density_exact(&family, *n, degeneracy, &budget(g))?
            };
            Output::new("max-free", result)
        }
        Command::Construct(c) => {
            let (stem, result) = match c {
                Construct::Weyl { p, k, d } => {
                    let set = extremal::weyl_set(*p, *k, *d)?;
                    ("construct-weyl", extremal::certify_free(&[LinearFormSystem::dependent_pair(*k as i64)], set, Degeneracy::Strict)?)
                }
                Construct::Mult { k, p } => {
                    let set = extremal::multiplicative_free_set(*k, *p)?;
                    ("construct-mult", extremal::certify_free(&[LinearFormSystem::dependent_pair(*k)], set, Degeneracy::Strict)?)
                }
                Construct::Interval { system, n } => {
                    let system = load_system(system)?;
                    let set = extremal::interval_free_set(&system, *n)?
                        .ok_or_else(|| Error::Precondition("no solution-free interval found".into()))?;
                    ("construct-interval", extremal::certify_free(&[system], set, Degeneracy::Strict)?)
                }
                Construct::Pair { k, p, alpha } => {
                    let alpha = alpha.as_deref().map(parse_rational).transpose()?;
                    let pair = extremal::dependent_pair_exact(*k, *p, alpha)?;
                    let fmt = |q: &Rational64| format!("{}/{}", q.numer(), q.denom());
                    let mut out = Output::new(
                        "construct-pair",
                        json!({
                            "k": pair.k,
                            "p": pair.p,
                            "order": pair.order,
                            "d": { "exact": fmt(&pair.d), "decimal": extremal::rational_f64(&pair.d) },
                            "freeSet": pair.free_set,
                            "minSol": pair.min_sol.as_ref().map(|(a, m, s)| json!({
                                "alpha": fmt(a),
                                "value": { "exact": fmt(m), "decimal": extremal::rational_f64(m) },
                                "certificate": s,
                            })),
                        }),
                    )?;
                    out.extra.push(("construct-pair.set.txt".into(), io::format_set(&pair.free_set)));
                    return Ok(out);
                }
            };
            let mut out = Output::new(stem, &result)?;
            out.extra.push((format!("{stem}.set.txt"), io::format_set(&result.certificate)));
            Ok(out)
        }
        Command::Kernelize { system } => {
            let system = load_system(system)?;
            Output::new("kernelize", system.kernelize()?)
        }
        Command::Nil(Nil::Characters { model, level, a }) => {
            let model = io::load_model(model)?;
            Output::new("characters", enumerate_characters(&model, *level, *a)?)
        }
        Command::Nil(Nil::BuildPeriodic { model, q, a, verify }) => {
            let model = shared(io::load_model(model)?);
            let built = build_periodic_irrational(model, *q, *a, g.seed)?;
            let p = &built.sequence;
            let mut report = json!({
                "taylor": p.to_report()?,
                "stages": built.stages,
                "periodic": built.periodic,
                "irrational": built.irrational,
            });
            if *verify == Verify::Full {
                let sums = level_one_sums(p, *q, *a)?;
                let vertical = vertical_sum(p, *q).ok();
                report["verification"] = json!({
                    "periodicOn0To2q": verify_periodicity_range(p, *q, 0, 2 * *q as i64)?,
                    "levelOneSums": sums.iter().map(|(xi, s)| json!({ "k": xi.k, "sum": s })).collect::<Vec<_>>(),
                    "allLevelOneSumsZero": sums.iter().all(|(_, s)| s.exact_zero == Some(true)),
                    "verticalSum": vertical,
                    "verticalTolerance": vertical_tolerance(*q),
                });
            }
            Output::new("build-periodic", report)
        }
        Command::Scan { system, quantity, alpha, moduli, primes_only, heuristic, iterations, weak } => {
            let system = load_system(system)?;
            let mut moduli = parse_moduli(moduli)?;
            if *primes_only {
                moduli.retain(|&n| nilsol::arith::is_prime(n));
            }
            let cfg = ScanConfig {
                system,
                quantity: *quantity,
                alpha: parse_rational(alpha)?,
                moduli,
                mode: if *heuristic { ScanMode::Heuristic { iterations: *iterations } } else { ScanMode::Exact },
                seed: g.seed,
                budget_ms: g.budget_ms,
                degeneracy: if *weak { Degeneracy::Weak } else { Degeneracy::Strict },
            };
            let rows = harness::scan_convergence(&cfg)?;
            let title = format!("{} of {} (alpha = {alpha})", quantity.tag(), cfg.system.name().unwrap_or("system"));
            let mut out = Output::new("scan", &rows)?;
            out.csv = Some(harness::scan_csv(&rows)?);
            out.extra.push(("scan.svg".into(), harness::scan_svg(&rows, &title)));
            Ok(out)
        }
        Command::Reproduce { id } => {
            let report = harness::reproduce(id)?;
            let mut out = Output::new("reproduce", &report)?;
            let mut text = report.summary_line();
            text.push('\n');
            out.csv = Some(text);
            if !report.passed {
                eprintln!("{}", report.summary_line());
                print_output(g, &out)?;
                return Err(Error::Precondition(format!("criterion {} failed", report.id)));
            }
            Ok(out)
        }
    }
}

fn render(g: &Global, out: &Output) -> Result<String> {
    Ok(match g.format {
        Format::Json => serde_json::to_string_pretty(&out.json)? + "\n",
        Format::Csv => match &out.csv {
            Some(c) => c.clone(),
            None => scalar_csv(&out.json)?,
        },
    })
}

fn print_output(g: &Global, out: &Output) -> Result<()> {
    let text = render(g, out)?;
    print!("{text}");
    if let Some(dir) = &g.out {
        std::fs::create_dir_all(dir)?;
        let ext = if g.format == Format::Json { "json" } else { "csv" };
        std::fs::write(dir.join(format!("{}.{ext}", out.stem)), &text)?;
        for (name, body) in &out.extra {
            std::fs::write(dir.join(name), body)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|out| print_output(&cli.global, &out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_budget() { 2 } else { 1 })
        }
    }
}
