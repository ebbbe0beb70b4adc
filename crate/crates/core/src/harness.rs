//! Convergence scans over moduli and the scripted acceptance experiments.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use num_rational::Rational64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{is_prime, multiplicative_order, smallest_prime_factor};
use crate::counting::{complement_sol, count_sets, is_free, sol_brute, sol_fast, sol_set, CyclicFunction, SubsetOfZN};
use crate::error::{Error, Result};
use crate::extremal::{self, rational_f64, Annealing, Degeneracy, SearchBudget};
use crate::forms::LinearFormSystem;
use crate::gowers::{gowers_norm, gowers_norm_definitional, gowers_norm_of, gvn_check, random_round, rng};
use crate::nil::checks;
use crate::nil::{is_irrational, shared, FilteredNilmanifoldModel, ModelRef};
use crate::periodic::{build_periodic_irrational, level_one_sums, vertical_sum, vertical_tolerance, verify_periodicity_range};

/// The quantity computed per modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Quantity {
    /// `m(alpha, N)`
    #[serde(rename = "m")]
    MinSol,
    /// `M(alpha, N)`
    #[serde(rename = "M")]
    MaxSol,
    /// `d(Z/N)`
    #[serde(rename = "d")]
    FreeDensity,
}

impl Quantity {
    pub fn tag(self) -> &'static str {
        match self {
            Quantity::MinSol => "m",
            Quantity::MaxSol => "M",
            Quantity::FreeDensity => "d",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "m" => Ok(Quantity::MinSol),
            "M" => Ok(Quantity::MaxSol),
            "d" => Ok(Quantity::FreeDensity),
            _ => Err(Error::Parse(format!("quantity must be m, M or d, got '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanMode {
    Exact,
    Heuristic { iterations: u64 },
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub system: LinearFormSystem,
    pub quantity: Quantity,
    pub alpha: Rational64,
    pub moduli: Vec<u64>,
    pub mode: ScanMode,
    pub seed: u64,
    /// Per-modulus time limit; an exhausted modulus is recorded as skipped.
    pub budget_ms: Option<u64>,
    pub degeneracy: Degeneracy,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ScanRecord {
    #[serde(rename = "N")]
    pub n: u64,
    pub is_prime: bool,
    pub smallest_prime_factor: u64,
    pub quantity: Quantity,
    /// `None` when the modulus was skipped.
    pub value: Option<f64>,
    pub exact: Option<String>,
    pub method: String,
    pub seed: u64,
    pub elapsed_ms: u64,
}

/// `(n1, k n1)` systems get the cycle formula for `d` at prime moduli.
fn dependent_pair_multiplier(system: &LinearFormSystem) -> Option<i64> {
    match system.forms() {
        [a, b] if a.as_slice() == [1] && b.len() == 1 => Some(b[0]),
        _ => None,
    }
}

fn scan_one(cfg: &ScanConfig, n: u64) -> Result<(Rational64, &'static str)> {
    let budget = cfg.budget_ms.map_or_else(SearchBudget::default, SearchBudget::with_time_ms);
    let annealing = |iterations| Annealing {
        deadline: budget.deadline,
        ..Annealing::new(iterations)
    };
    let family = std::slice::from_ref(&cfg.system);
    Ok(match (cfg.quantity, cfg.mode) {
        (Quantity::MinSol, ScanMode::Exact) => (extremal::min_sol_exact(&cfg.system, cfg.alpha, n, &budget)?.value, "exact"),
        (Quantity::MaxSol, ScanMode::Exact) => (extremal::max_sol_exact(&cfg.system, cfg.alpha, n, &budget)?.value, "exact"),
        (Quantity::MinSol, ScanMode::Heuristic { iterations }) => (
            extremal::min_sol_heuristic(&cfg.system, cfg.alpha, n, cfg.seed, &annealing(iterations))?.value,
            "heuristic",
        ),
        (Quantity::MaxSol, ScanMode::Heuristic { iterations }) => (
            extremal::max_sol_heuristic(&cfg.system, cfg.alpha, n, cfg.seed, &annealing(iterations))?.value,
            "heuristic",
        ),
        (Quantity::FreeDensity, ScanMode::Exact) => match dependent_pair_multiplier(&cfg.system) {
            Some(k) if is_prime(n) && k.rem_euclid(n as i64) != 0 && k.unsigned_abs() >= 2 && cfg.degeneracy == Degeneracy::Strict => {
                (extremal::dependent_pair_exact(k, n, None)?.d, "cycle")
            }
            _ => (extremal::max_free_density_exact(family, n, cfg.degeneracy, &budget)?.value, "exact"),
        },
        (Quantity::FreeDensity, ScanMode::Heuristic { iterations }) => (
            extremal::max_free_density_heuristic(family, n, cfg.degeneracy, cfg.seed, iterations)?.value,
            "heuristic",
        ),
    })
}

/// Runs the configured computation at every modulus; rows come back sorted by
/// `N`, and a modulus that exhausts its budget is kept as a skipped row.
pub fn scan_convergence(cfg: &ScanConfig) -> Result<Vec<ScanRecord>> {
    let mut moduli = cfg.moduli.clone();
    moduli.sort_unstable();
    moduli.dedup();
    let rows: Vec<Result<ScanRecord>> = moduli
        .par_iter()
        .map(|&n| {
            let start = Instant::now();
            let outcome = scan_one(cfg, n);
            let elapsed_ms = start.elapsed().as_millis() as u64;
            let (value, exact, method) = match outcome {
                Ok((v, method)) => (Some(rational_f64(&v)), Some(format!("{}/{}", v.numer(), v.denom())), method.to_string()),
                Err(e) if e.is_budget() => (None, None, "skipped".to_string()),
                Err(e) => return Err(e),
            };
            Ok(ScanRecord {
                n,
                is_prime: is_prime(n),
                smallest_prime_factor: smallest_prime_factor(n),
                quantity: cfg.quantity,
                value,
                exact,
                method,
                seed: cfg.seed,
                elapsed_ms,
            })
        })
        .collect();
    rows.into_iter().collect()
}

pub const CSV_HEADER: [&str; 8] = ["N", "isPrime", "p1", "quantity", "value", "method", "seed", "elapsedMs"];

pub fn scan_csv(records: &[ScanRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.n.to_string(),
            r.is_prime.to_string(),
            r.smallest_prime_factor.to_string(),
            r.quantity.tag().to_string(),
            r.value.map_or_else(String::new, |v| format!("{v:.12}")),
            r.method.clone(),
            r.seed.to_string(),
            r.elapsed_ms.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

/// Self-contained line plot: primes as filled circles, composites as hollow
/// squares; skipped rows are omitted.
pub fn scan_svg(records: &[ScanRecord], title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 50.0;
    let pts: Vec<(&ScanRecord, f64)> = records.iter().filter_map(|r| r.value.map(|v| (r, v))).collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r#"<path d="M{M} {M} V{} H{}" stroke="black" fill="none"/>"#,
        H - M,
        W - M
    );
    if !pts.is_empty() {
        let (nmin, nmax) = (pts[0].0.n as f64, pts[pts.len() - 1].0.n as f64);
        let vmin = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let vmax = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let (vlo, vhi) = if vmax - vmin < 1e-12 { (vmin - 0.5, vmax + 0.5) } else { (vmin, vmax) };
        let x = |n: f64| if nmax > nmin { M + (n - nmin) / (nmax - nmin) * (W - 2.0 * M) } else { W / 2.0 };
        let y = |v: f64| H - M - (v - vlo) / (vhi - vlo) * (H - 2.0 * M);
        let path: Vec<String> = pts.iter().map(|(r, v)| format!("{:.2},{:.2}", x(r.n as f64), y(*v))).collect();
        let _ = writeln!(svg, r#"<polyline points="{}" stroke="steelblue" fill="none"/>"#, path.join(" "));
        for (r, v) in &pts {
            let (cx, cy) = (x(r.n as f64), y(*v));
            if r.is_prime {
                let _ = writeln!(svg, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="crimson"><title>N={} value={v:.6}</title></circle>"#, r.n);
            } else {
                let _ = writeln!(
                    svg,
                    r#"<rect x="{:.2}" y="{:.2}" width="8" height="8" fill="white" stroke="gray"><title>N={} value={v:.6}</title></rect>"#,
                    cx - 4.0,
                    cy - 4.0,
                    r.n
                );
            }
        }
        for (v, label) in [(vlo, vlo), (vhi, vhi)] {
            let _ = writeln!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end">{label:.4}</text>"#, M - 4.0, y(v) + 4.0);
        }
        for n in [nmin, nmax] {
            let _ = writeln!(svg, r#"<text x="{:.2}" y="{}" text-anchor="middle">{n}</text>"#, x(n), H - M + 16.0);
        }
    }
    let _ = writeln!(svg, r#"<circle cx="{}" cy="40" r="4" fill="crimson"/><text x="{}" y="44">prime N</text>"#, W - 150.0, W - 140.0);
    let _ = writeln!(
        svg,
        r#"<rect x="{}" y="52" width="8" height="8" fill="white" stroke="gray"/><text x="{}" y="60">composite N</text>"#,
        W - 154.0,
        W - 140.0
    );
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `<stem>.csv` and `<stem>.svg` into `dir`.
pub fn write_scan(records: &[ScanRecord], dir: &Path, stem: &str, title: &str) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let svg_path = dir.join(format!("{stem}.svg"));
    std::fs::write(&csv_path, scan_csv(records)?)?;
    std::fs::write(&svg_path, scan_svg(records, title))?;
    Ok((csv_path, svg_path))
}

/// One verified claim inside a criterion.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CriterionReport {
    pub id: String,
    pub criterion: u8,
    pub title: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub elapsed_ms: u64,
    pub limit_ms: u64,
}

impl CriterionReport {
    /// One line: `PASS [ 6] weyl  Weyl set ... (812 ms / 60000 ms)`.
    pub fn summary_line(&self) -> String {
        format!(
            "{} [{:>2}] {:<20} {} ({} ms / limit {} ms)",
            if self.passed { "PASS" } else { "FAIL" },
            self.criterion,
            self.id,
            self.title,
            self.elapsed_ms,
            self.limit_ms
        )
    }
}

struct Experiment {
    id: &'static str,
    criterion: u8,
    title: &'static str,
    limit_ms: u64,
    run: fn() -> Result<Vec<Check>>,
}

const EXPERIMENTS: &[Experiment] = &[
    Experiment { id: "oracle-equivalence", criterion: 1, title: "Fourier and brute-force solution counts agree", limit_ms: 30_000, run: oracle_equivalence },
    Experiment { id: "complement-identity", criterion: 2, title: "3AP complement identity, exact", limit_ms: 10_000, run: complement_identity },
    Experiment { id: "gvn", criterion: 3, title: "generalized von Neumann inequality", limit_ms: 120_000, run: gvn_both },
    Experiment { id: "gvn-3ap", criterion: 3, title: "von Neumann inequality, 3AP with U^2 on Z/53", limit_ms: 120_000, run: gvn_3ap },
    Experiment { id: "gvn-4ap", criterion: 3, title: "von Neumann inequality, 4AP with U^3 on Z/31", limit_ms: 120_000, run: gvn_4ap },
    Experiment { id: "gowers-oracle", criterion: 4, title: "Gowers norms agree with the definition", limit_ms: 60_000, run: gowers_oracle },
    Experiment { id: "extremal-exact", criterion: 5, title: "exact extremal values against exhaustion", limit_ms: 300_000, run: extremal_exact },
    Experiment { id: "weyl", criterion: 6, title: "Weyl sets at p = 1009 and 10007", limit_ms: 60_000, run: weyl_both },
    Experiment { id: "weyl-1009", criterion: 6, title: "Weyl set at p = 1009", limit_ms: 60_000, run: weyl_1009 },
    Experiment { id: "weyl-10007", criterion: 6, title: "Weyl set at p = 10007", limit_ms: 60_000, run: weyl_10007 },
    Experiment { id: "dependent-pair", criterion: 7, title: "dependent pair densities via cycles", limit_ms: 60_000, run: dependent_pair },
    Experiment { id: "rounding", criterion: 8, title: "random rounding is Gowers-close", limit_ms: 300_000, run: rounding },
    Experiment { id: "periodic", criterion: 9, title: "periodic irrational constructions", limit_ms: 30_000, run: periodic_both },
    Experiment { id: "periodic-heisenberg", criterion: 9, title: "periodic irrational sequence, Heisenberg q = 227", limit_ms: 30_000, run: periodic_heisenberg },
    Experiment { id: "periodic-torus", criterion: 9, title: "periodic irrational sequence, torus q = 37", limit_ms: 30_000, run: periodic_torus },
    Experiment { id: "factorization", criterion: 10, title: "Taylor coefficient factorization", limit_ms: 10_000, run: factorization },
    Experiment { id: "kernelize", criterion: 11, title: "kernel presentations reproduce images", limit_ms: 30_000, run: kernelize },
    Experiment { id: "taylor-calculus", criterion: 12, title: "Taylor expansion, scaling, Newton, shifted", limit_ms: 60_000, run: taylor_calculus },
];

/// Ids accepted by [`reproduce`], criterion-level ids first.
pub fn criterion_ids() -> Vec<&'static str> {
    EXPERIMENTS.iter().map(|e| e.id).collect()
}

/// The id that covers all of criterion `k` (1..=12).
pub fn criterion_id(k: u8) -> Option<&'static str> {
    EXPERIMENTS.iter().find(|e| e.criterion == k).map(|e| e.id)
}

/// Runs a scripted experiment by id (or by criterion number) and compares it
/// against the stored tolerances and its time limit.
pub fn reproduce(id: &str) -> Result<CriterionReport> {
    let exp = EXPERIMENTS
        .iter()
        .find(|e| e.id == id)
        .or_else(|| id.parse::<u8>().ok().and_then(criterion_id).and_then(|cid| EXPERIMENTS.iter().find(|e| e.id == cid)))
        .ok_or_else(|| Error::UnknownCriterion {
            id: id.to_string(),
            valid: criterion_ids().join(", "),
        })?;
    let start = Instant::now();
    let checks = match (exp.run)() {
        Ok(c) => c,
        Err(e) => vec![check("run", false, e.to_string())],
    };
    let elapsed_ms = start.elapsed().as_millis() as u64;
    let mut checks = checks;
    checks.push(check(
        "runtime",
        elapsed_ms <= exp.limit_ms,
        format!("{elapsed_ms} ms of {} ms", exp.limit_ms),
    ));
    Ok(CriterionReport {
        id: exp.id.to_string(),
        criterion: exp.criterion,
        title: exp.title.to_string(),
        passed: checks.iter().all(|c| c.passed),
        checks,
        elapsed_ms,
        limit_ms: exp.limit_ms,
    })
}

fn random_complex_function(r: &mut impl Rng, n: u64) -> CyclicFunction {
    let values = (0..n)
        .map(|_| Complex64::from_polar(r.gen::<f64>(), r.gen::<f64>() * std::f64::consts::TAU))
        .collect();
    CyclicFunction::new(values).expect("values lie in the unit disc")
}

fn random_unit_interval_function(r: &mut impl Rng, n: u64) -> CyclicFunction {
    let values: Vec<f64> = (0..n).map(|_| r.gen::<f64>()).collect();
    CyclicFunction::from_real(&values).expect("values lie in [0,1]")
}

/// The system whose image is the kernel of `x + y - 3z`.
pub fn kernel_x_plus_y_minus_3z() -> LinearFormSystem {
    LinearFormSystem::new(vec![vec![1, 0], vec![-1, 3], vec![0, 1]])
        .expect("valid forms")
        .with_name("x+y-3z=0")
}

fn oracle_equivalence() -> Result<Vec<Check>> {
    let systems = [
        LinearFormSystem::arithmetic_progression(3),
        LinearFormSystem::arithmetic_progression(4),
        kernel_x_plus_y_minus_3z(),
        LinearFormSystem::dependent_pair(2),
    ];
    let kps = systems.iter().map(LinearFormSystem::kernelize).collect::<Result<Vec<_>>>()?;
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let which = i % systems.len();
        let n = if (i / systems.len()).is_multiple_of(2) { 53 } else { 101 };
        let fs: Vec<CyclicFunction> = (0..systems[which].num_forms()).map(|_| random_complex_function(&mut r, n)).collect();
        let brute = sol_brute(&fs, &systems[which])?.value;
        let fast = sol_fast(&fs, &systems[which], &kps[which])?;
        worst = worst.max((brute - fast).norm());
    }
    Ok(vec![check("max |fast - brute| <= 1e-9 over 200 instances", worst <= 1e-9, format!("{worst:.3e}"))])
}

fn complement_identity() -> Result<Vec<Check>> {
    let mut r = rng(2);
    let mut failures = 0;
    let mut trials = 0;
    for n in (5..=101u64).step_by(2) {
        for _ in 0..50 {
            let p: f64 = r.gen();
            let mask: Vec<bool> = (0..n).map(|_| r.gen::<f64>() < p).collect();
            let set = SubsetOfZN::from_mask(&mask);
            let alpha = set.density();
            let (sa, sc) = complement_sol(&set)?;
            let one = Rational64::from_integer(1);
            let three = Rational64::from_integer(3);
            if sa + sc != one - three * alpha + three * alpha * alpha {
                failures += 1;
            }
            trials += 1;
        }
    }
    Ok(vec![check(
        "Sol(A) + Sol(A^c) = 1 - 3a + 3a^2 exactly",
        failures == 0,
        format!("{failures} failures in {trials} sets"),
    )])
}

fn gvn_trials(system: LinearFormSystem, n: u64, s: u32, seed: u64) -> Result<Check> {
    let mut r = rng(seed);
    let mut worst_ratio = 0.0f64;
    let mut failures = 0;
    for trial in 0..100 {
        let f = random_unit_interval_function(&mut r, n);
        // every other trial compares f with a small perturbation of itself
        let g = if trial % 2 == 0 {
            random_unit_interval_function(&mut r, n)
        } else {
            let vals: Vec<f64> = f
                .real_values()
                .unwrap()
                .iter()
                .map(|&v| (v + r.gen_range(-0.05..0.05)).clamp(0.0, 1.0))
                .collect();
            CyclicFunction::from_real(&vals)?
        };
        let rep = gvn_check(&f, &g, &system, s)?;
        if !rep.passed {
            failures += 1;
        }
        if rep.rhs > 0.0 {
            worst_ratio = worst_ratio.max(rep.lhs / rep.rhs);
        }
    }
    Ok(check(
        format!("{} on Z/{n} with U^{}: inequality in 100 trials", system.name().unwrap_or("system"), s + 1),
        failures == 0,
        format!("{failures} failures; largest lhs/rhs = {worst_ratio:.4}"),
    ))
}

fn gvn_3ap() -> Result<Vec<Check>> {
    Ok(vec![gvn_trials(LinearFormSystem::arithmetic_progression(3), 53, 1, 3)?])
}

fn gvn_4ap() -> Result<Vec<Check>> {
    Ok(vec![gvn_trials(LinearFormSystem::arithmetic_progression(4), 31, 2, 4)?])
}

fn gvn_both() -> Result<Vec<Check>> {
    let mut c = gvn_3ap()?;
    c.extend(gvn_4ap()?);
    Ok(c)
}

fn gowers_oracle() -> Result<Vec<Check>> {
    let mut r = rng(5);
    let mut worst = 0.0f64;
    for n in 1..=20u64 {
        for d in 1..=4u32 {
            for _ in 0..20 {
                let f = random_complex_function(&mut r, n);
                worst = worst.max((gowers_norm(&f, d)? - gowers_norm_definitional(&f, d)?).abs());
            }
        }
    }
    Ok(vec![check("|fast - definitional| <= 1e-9 for N <= 20, d <= 4", worst <= 1e-9, format!("{worst:.3e}"))])
}

/// Sol of every subset of Z/N, by brute-force counting.
fn exhaustive_sols(system: &LinearFormSystem, n: u64) -> Result<Vec<(usize, Rational64)>> {
    (0u64..1 << n)
        .map(|bits| {
            let mask: Vec<bool> = (0..n).map(|x| bits >> x & 1 == 1).collect();
            let masks: Vec<&[bool]> = vec![&mask; system.num_forms()];
            let (c, total) = count_sets(&masks, system, u128::MAX)?;
            Ok((bits.count_ones() as usize, Rational64::new(c as i64, total as i64)))
        })
        .collect()
}

fn exhaustive_free_density(system: &LinearFormSystem, n: u64) -> Result<Rational64> {
    let mut best = 0;
    for bits in 0u64..1 << n {
        let mask: Vec<bool> = (0..n).map(|x| bits >> x & 1 == 1).collect();
        if bits.count_ones() > best && is_free(&mask, system, u128::MAX)? {
            best = bits.count_ones();
        }
    }
    Ok(Rational64::new(best as i64, n as i64))
}

fn extremal_exact() -> Result<Vec<Check>> {
    let ap = LinearFormSystem::arithmetic_progression(3);
    let budget = SearchBudget::default();
    let mut checks = Vec::new();
    let m = extremal::min_sol_exact(&ap, Rational64::new(2, 5), 5, &budget)?;
    checks.push(check("m_3AP(2/5, 5) = 2/25", m.value == Rational64::new(2, 25), format!("{}", m.value)));

    let mut mismatches = Vec::new();
    let mut cases = 0;
    for n in 1..=13u64 {
        let sols = exhaustive_sols(&ap, n)?;
        for alpha in [Rational64::new(1, 5), Rational64::new(2, 5), Rational64::new(3, 5)] {
            let s = crate::arith::ceil_mul(&alpha, n) as usize;
            let oracle = sols.iter().filter(|(size, _)| *size >= s).map(|(_, v)| *v).min().unwrap();
            let got = extremal::min_sol_exact(&ap, alpha, n, &budget)?;
            cases += 1;
            if got.value != oracle || sol_set(&got.certificate, &ap)? != got.value || got.certificate.len() < s {
                mismatches.push(format!("N={n} alpha={alpha}: {} vs {oracle}", got.value));
            }
        }
    }
    checks.push(check(
        "minSolExact = exhaustive minimum, N <= 13, alpha in {1/5, 2/5, 3/5}",
        mismatches.is_empty(),
        if mismatches.is_empty() { format!("{cases} cases agree") } else { mismatches.join("; ") },
    ));

    let pair = LinearFormSystem::dependent_pair(2);
    for (n, expected) in [(5u64, Rational64::new(2, 5)), (7, Rational64::new(2, 7))] {
        let got = extremal::max_free_density_exact(std::slice::from_ref(&pair), n, Degeneracy::Strict, &budget)?;
        let oracle = exhaustive_free_density(&pair, n)?;
        checks.push(check(
            format!("d_(n1,2n1)(Z/{n}) = {expected}"),
            got.value == expected && oracle == expected,
            format!("solver {}, exhaustion {oracle}", got.value),
        ));
    }
    Ok(checks)
}

/// `(density, U^2 norm of 1_A - alpha)` with freeness and density checks.
fn weyl_at(p: u64, u2_limit: f64) -> Result<(Vec<Check>, f64)> {
    let set = extremal::weyl_set(p, 2, 2)?;
    let sol = sol_set(&set, &LinearFormSystem::dependent_pair(2))?;
    let density = rational_f64(&set.density());
    let alpha = density;
    let centered: Vec<Complex64> = set.mask().iter().map(|&b| Complex64::new(f64::from(u8::from(b)) - alpha, 0.0)).collect();
    let u2 = gowers_norm_of(&centered, 2)?;
    Ok((
        vec![
            check(format!("p={p}: Sol = 0 exactly"), sol == Rational64::from_integer(0), format!("{sol}")),
            check(
                format!("p={p}: |density - 1/32| <= 0.02"),
                (density - 1.0 / 32.0).abs() <= 0.02,
                format!("density {density:.5}"),
            ),
            check(format!("p={p}: U^2 deviation <= {u2_limit}"), u2 <= u2_limit, format!("{u2:.5}")),
        ],
        u2,
    ))
}

fn weyl_1009() -> Result<Vec<Check>> {
    Ok(weyl_at(1009, 0.3)?.0)
}

fn weyl_10007() -> Result<Vec<Check>> {
    Ok(weyl_at(10007, 0.2)?.0)
}

fn weyl_both() -> Result<Vec<Check>> {
    let (mut checks, small) = weyl_at(1009, 0.3)?;
    let (more, large) = weyl_at(10007, 0.2)?;
    checks.extend(more);
    checks.push(check("U^2 deviation decreases from p=1009 to p=10007", large < small, format!("{small:.5} -> {large:.5}")));
    Ok(checks)
}

fn dependent_pair() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let system = LinearFormSystem::dependent_pair(2);
    for (p, expected) in [(5u64, Rational64::new(2, 5)), (7, Rational64::new(2, 7))] {
        let d = extremal::dependent_pair_exact(2, p, None)?.d;
        let oracle = exhaustive_free_density(&system, p)?;
        checks.push(check(format!("d(Z/{p}) = {expected}"), d == expected && oracle == expected, format!("cycles {d}, exhaustion {oracle}")));
    }
    let p = 101;
    let pair = extremal::dependent_pair_exact(2, p, None)?;
    let ord = pair.order as f64;
    let gap = (rational_f64(&pair.d) - 0.5).abs();
    checks.push(check(
        "d(Z/101) = 50/101 within 1/ord + 1/p of 1/2",
        pair.d == Rational64::new(50, 101) && gap <= 1.0 / ord + 1.0 / p as f64,
        format!("d = {}, ord = {ord}, |d - 1/2| = {gap:.5}", pair.d),
    ));
    let p = 1009;
    let res = extremal::dependent_pair_exact(2, p, Some(Rational64::new(3, 4)))?;
    let ord = multiplicative_order(2, p).unwrap() as f64;
    let (_, m, cert) = res.min_sol.expect("alpha was given");
    let mf = rational_f64(&m);
    let upper = 0.5 + 2.0 / ord + 2.0 / p as f64;
    let recount = sol_set(&cert, &system)?;
    checks.push(check(
        "m(3/4, 1009) in [1/2, 1/2 + 2/ord + 2/1009]",
        (0.5..=upper).contains(&mf) && recount == m,
        format!("m = {m} = {mf:.5}, ord = {ord}, upper {upper:.5}"),
    ));
    Ok(checks)
}

fn rounding() -> Result<Vec<Check>> {
    let n = 4093u64;
    let mut r = rng(8);
    let mut functions = vec![CyclicFunction::from_real(&vec![0.5; n as usize])?];
    for _ in 0..10 {
        functions.push(random_unit_interval_function(&mut r, n));
    }
    let mut checks = Vec::new();
    for d in [2u32, 3] {
        let limit = 5.0 * (n as f64).powf(-1.0 / f64::from(1u32 << d));
        let mut worst = 0.0f64;
        for (fi, f) in functions.iter().enumerate() {
            let mut norms = Vec::with_capacity(11);
            for seed in 0..11u64 {
                let set = random_round(f, 1000 * fi as u64 + seed)?;
                let diff = CyclicFunction::indicator(&set).difference(f)?;
                norms.push(gowers_norm_of(&diff, d)?);
            }
            norms.sort_by(f64::total_cmp);
            worst = worst.max(norms[5]);
        }
        checks.push(check(
            format!("U^{d}: median over 11 seeds <= 5 N^(-1/{})", 1u32 << d),
            worst <= limit,
            format!("largest median {worst:.5}, limit {limit:.5}"),
        ));
    }
    Ok(checks)
}

fn periodic_checks(model: ModelRef, q: u64, a: u64, seed: u64, vertical: bool) -> Result<Vec<Check>> {
    let name = model.name().to_string();
    let built = build_periodic_irrational(model, q, a, seed)?;
    let p = &built.sequence;
    let mut checks = vec![
        check(format!("{name}: q-periodic mod Gamma on [0, 2q]"), verify_periodicity_range(p, q, 0, 2 * q as i64)?, ""),
        check(format!("{name}: {a}-irrational"), is_irrational(p, a)?.irrational, ""),
    ];
    let sums = level_one_sums(p, q, a)?;
    let nonzero = sums.iter().filter(|(_, s)| s.exact_zero != Some(true)).count();
    checks.push(check(
        format!("{name}: level-1 character sums exactly 0"),
        nonzero == 0 && !sums.is_empty(),
        format!("{} characters, {nonzero} not exactly zero", sums.len()),
    ));
    if vertical {
        let v = vertical_sum(p, q)?;
        let tol = vertical_tolerance(q);
        checks.push(check(format!("{name}: vertical sum <= 2/sqrt(q)"), v <= tol, format!("{v:.5} vs {tol:.5}")));
    }
    Ok(checks)
}

fn periodic_heisenberg() -> Result<Vec<Check>> {
    periodic_checks(shared(FilteredNilmanifoldModel::heisenberg_lcs()), 227, 3, 7, true)
}

fn periodic_torus() -> Result<Vec<Check>> {
    periodic_checks(shared(FilteredNilmanifoldModel::torus(2, 2)?), 37, 2, 7, false)
}

fn periodic_both() -> Result<Vec<Check>> {
    let mut c = periodic_heisenberg()?;
    c.extend(periodic_torus()?);
    Ok(c)
}

fn builtin_models() -> Result<Vec<ModelRef>> {
    Ok(vec![
        shared(FilteredNilmanifoldModel::heisenberg_lcs()),
        shared(FilteredNilmanifoldModel::heisenberg_deg3()),
        shared(FilteredNilmanifoldModel::torus(2, 2)?),
    ])
}

fn model_name(model: &ModelRef) -> String {
    model.name().to_string()
}

fn factorization() -> Result<Vec<Check>> {
    let (a, q) = (3u64, 227u64);
    let mut checks = Vec::new();
    let mut r = rng(10);
    for model in builtin_models()? {
        let levels: Vec<usize> = (1..=model.degree())
            .filter(|&i| crate::nil::enumerate_characters(&model, i, a).is_ok_and(|c| !c.is_empty()))
            .collect();
        let mut ok = 0;
        for j in 0..20 {
            let i = levels[j % levels.len()];
            let (g, _) = checks::plant_non_irrational(&model, i, a, q, &mut r)?.expect("level has characters");
            if checks::factorization_holds(&model, i, &g, a, q)? {
                ok += 1;
            }
        }
        checks.push(check(format!("{}: 20 planted coefficients factor", model_name(&model)), ok == 20, format!("{ok}/20, levels {levels:?}")));
    }
    Ok(checks)
}

fn kernelize() -> Result<Vec<Check>> {
    let systems = [
        LinearFormSystem::arithmetic_progression(3),
        LinearFormSystem::new(vec![vec![1, 0], vec![1, 2]])?.with_name("(n1,n1+2n2)"),
        LinearFormSystem::arithmetic_progression(4),
        LinearFormSystem::dependent_pair(2),
        kernel_x_plus_y_minus_3z(),
    ];
    let mut checks = Vec::new();
    let ap = systems[0].kernelize()?;
    let row = ap.matrix.first().cloned().unwrap_or_default();
    checks.push(check(
        "3AP kernel is x - 2y + z",
        ap.rank() == 1 && (row == vec![1, -2, 1] || row == vec![-1, 2, -1]),
        format!("{:?}", ap.matrix),
    ));
    let two = systems[1].kernelize()?;
    checks.push(check("(n1, n1+2n2) has bad modulus 2", two.bad_modulus == 2, format!("{}", two.bad_modulus)));
    for system in &systems {
        let kp = system.kernelize()?;
        let mut tested = 0;
        let mut bad = Vec::new();
        for n in 2..=30u64 {
            if !kp.is_compatible(n) {
                continue;
            }
            tested += 1;
            if system.image_mod(n, u128::MAX)? != kp.kernel_mod(n, u128::MAX)? {
                bad.push(n);
            }
        }
        checks.push(check(
            format!("{}: image = kernel for coprime N <= 30", system.name().unwrap_or("system")),
            bad.is_empty(),
            format!("{tested} moduli, mismatches {bad:?}"),
        ));
    }
    Ok(checks)
}

fn taylor_calculus() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut r = rng(12);
    for model in builtin_models()? {
        let name = model_name(&model);
        let round_trips = (0..100)
            .map(|_| checks::expand_eval_round_trip(&checks::random_sequence(&model, &mut r, 9)))
            .collect::<Result<Vec<bool>>>()?;
        let ok = round_trips.iter().filter(|&&b| b).count();
        checks.push(check(format!("{name}: expand(eval) round trip"), ok == 100, format!("{ok}/100")));

        let mut scaling = 0;
        let mut shifted = 0;
        let mut newton = 0;
        for _ in 0..50 {
            let p = checks::random_sequence(&model, &mut r, 9);
            let q = r.gen_range(2..10);
            scaling += usize::from(checks::scaling_holds(&p, q)?);
            shifted += usize::from(checks::shifted_taylor_holds(&p, q, &mut r)?);
            let integral = checks::sequence_integral_on_multiples(&model, q, &mut r, 5)?;
            newton += usize::from(checks::newton_holds(&integral, q)?);
        }
        checks.push(check(format!("{name}: scaling congruence"), scaling == 50, format!("{scaling}/50")));
        checks.push(check(format!("{name}: differenced coefficients drop a level"), shifted == 50, format!("{shifted}/50")));
        checks.push(check(format!("{name}: Newton congruence"), newton == 50, format!("{newton}/50")));
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ap_config(moduli: Vec<u64>) -> ScanConfig {
        ScanConfig {
            system: LinearFormSystem::arithmetic_progression(3),
            quantity: Quantity::MinSol,
            alpha: Rational64::new(2, 5),
            moduli,
            mode: ScanMode::Exact,
            seed: 0,
            budget_ms: None,
            degeneracy: Degeneracy::Strict,
        }
    }

    #[test]
    fn scan_small_moduli() {
        let rows = scan_convergence(&ap_config(vec![13, 5, 11, 7])).unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![5, 7, 11, 13]);
        assert_eq!(rows[0].exact.as_deref(), Some("2/25"));
        let csv = scan_csv(&rows).unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.lines().nth(1).unwrap().starts_with("5,true,5,m,0.080000000000,exact,0,"));
        assert!(scan_svg(&rows, "3AP").contains("<circle"));
    }

    #[test]
    fn empty_scan_is_header_only() {
        let rows = scan_convergence(&ap_config(vec![])).unwrap();
        assert_eq!(scan_csv(&rows).unwrap(), "N,isPrime,p1,quantity,value,method,seed,elapsedMs\n");
    }

    #[test]
    fn scans_are_deterministic() {
        let mut cfg = ap_config(vec![31, 33, 35]);
        cfg.mode = ScanMode::Heuristic { iterations: 2000 };
        cfg.seed = 4;
        let strip = |rows: Vec<ScanRecord>| rows.into_iter().map(|r| (r.n, r.exact, r.method)).collect::<Vec<_>>();
        assert_eq!(strip(scan_convergence(&cfg).unwrap()), strip(scan_convergence(&cfg).unwrap()));
    }

    #[test]
    fn dependent_pair_scan_uses_cycles() {
        let cfg = ScanConfig {
            system: LinearFormSystem::dependent_pair(2),
            quantity: Quantity::FreeDensity,
            moduli: vec![5, 7, 9, 31],
            ..ap_config(vec![])
        };
        let rows = scan_convergence(&cfg).unwrap();
        assert_eq!(rows[0].exact.as_deref(), Some("2/5"));
        assert_eq!(rows[0].method, "cycle");
        assert_eq!(rows[2].method, "exact");
    }

    #[test]
    fn budget_exhaustion_skips_row() {
        let mut cfg = ap_config(vec![5, 60]);
        cfg.alpha = Rational64::new(1, 2);
        cfg.budget_ms = Some(1);
        let rows = scan_convergence(&cfg).unwrap();
        assert_eq!(rows[1].method, "skipped");
        assert!(rows[1].value.is_none());
    }

    #[test]
    fn unknown_criterion_lists_ids() {
        let err = reproduce("no-such").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("weyl-1009") && msg.contains("gvn-3ap"));
    }

    #[test]
    fn every_criterion_has_an_id() {
        for k in 1..=12 {
            assert!(criterion_id(k).is_some());
        }
    }
}
