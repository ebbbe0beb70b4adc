//! Extremal quantities over Z/N: minimum and maximum solution counts at a
//! given density, maximum free densities, and explicit free-set constructions.
//!
//! Every result carries a certificate that is re-counted by brute force before
//! it is returned.

use std::collections::HashMap;
use std::time::Instant;

use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::arith::{ceil_mul, floor_mul, is_prime, multiplicative_order, pow_mod};
use crate::counting::{count_sets, is_free, iteration_count, walk_slice, SubsetOfZN, DEFAULT_BRUTE_CAP};
use crate::error::{Error, Result};
use crate::forms::LinearFormSystem;
use crate::gowers::rng;

/// Cap on `N^D` when enumerating configurations.
pub const CONFIGURATION_CAP: u128 = 50_000_000;
/// Default node budget for the exact searches.
pub const DEFAULT_NODE_BUDGET: u64 = 500_000_000;
/// Largest interval denominator tried by [`interval_free_set`].
pub const MAX_INTERVAL_DENOMINATOR: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Heuristic,
    Construction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum BoundKind {
    Equals,
    UpperBound,
    LowerBound,
}

/// Outcome of re-counting a certificate by brute force.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verification {
    pub verified: bool,
    /// Sol of the certificate under each system, as "p/q".
    pub recounted: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtremalResult {
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational64,
    pub certificate: SubsetOfZN,
    pub method: Method,
    pub bound_kind: BoundKind,
    pub verification: Verification,
}

fn ser_rational<S: serde::Serializer>(q: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("Rational", 2)?;
    st.serialize_field("exact", &format!("{}/{}", q.numer(), q.denom()))?;
    st.serialize_field("decimal", &rational_f64(q))?;
    st.end()
}

pub fn rational_f64(q: &Rational64) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

impl ExtremalResult {
    pub fn value_f64(&self) -> f64 {
        rational_f64(&self.value)
    }
}

/// Limits for the exact searches.
#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    pub max_nodes: u64,
    pub deadline: Option<Instant>,
    /// Milliseconds reported if the deadline fires.
    pub ms: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_nodes: DEFAULT_NODE_BUDGET,
            deadline: None,
            ms: 0,
        }
    }
}

impl SearchBudget {
    pub fn with_time_ms(ms: u64) -> Self {
        SearchBudget {
            deadline: Some(Instant::now() + std::time::Duration::from_millis(ms)),
            ms,
            ..Self::default()
        }
    }

    fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

struct Meter<'a> {
    budget: &'a SearchBudget,
    nodes: u64,
    what: &'static str,
}

impl Meter<'_> {
    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes {
            return Err(Error::budget(self.what, self.nodes as u128, self.budget.max_nodes as u128));
        }
        if self.nodes.is_multiple_of(4096) && self.budget.expired() {
            return Err(Error::Timeout {
                what: self.what.into(),
                ms: self.budget.ms,
            });
        }
        Ok(())
    }
}

/// Distinct element sets `{psi_1(n), ..., psi_t(n)}` with their multiplicities
/// over `n in (Z/N)^D`, plus the total `N^D`.
#[derive(Clone, Debug)]
pub struct Configurations {
    pub modulus: u64,
    pub total: u128,
    /// Sorted distinct elements and the number of `n` producing them.
    pub sets: Vec<(Vec<u32>, u64)>,
}

impl Configurations {
    pub fn enumerate(system: &LinearFormSystem, n: u64, cap: u128) -> Result<Self> {
        if n == 0 || n > u32::MAX as u64 {
            return Err(Error::Precondition(format!("modulus {n} out of range")));
        }
        let total = iteration_count(n, system.num_vars(), cap)?;
        let coeffs = system.reduced_forms(n);
        let mut weights: HashMap<Vec<u32>, u64> = HashMap::new();
        let mut key: Vec<u32> = Vec::with_capacity(system.num_forms());
        for first in 0..n {
            walk_slice(&coeffs, n, first, |vals| {
                key.clear();
                key.extend(vals.iter().map(|&v| v as u32));
                key.sort_unstable();
                key.dedup();
                *weights.entry(key.clone()).or_insert(0) += 1;
            });
        }
        let mut sets: Vec<(Vec<u32>, u64)> = weights.into_iter().collect();
        sets.sort();
        Ok(Configurations { modulus: n, total, sets })
    }

    /// Weighted count of configurations inside `mask`.
    pub fn count(&self, mask: &[bool]) -> u64 {
        self.sets
            .iter()
            .filter(|(s, _)| s.iter().all(|&x| mask[x as usize]))
            .map(|(_, w)| w)
            .sum()
    }

    fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.modulus as usize];
        for (c, (s, _)) in self.sets.iter().enumerate() {
            for &x in s {
                inc[x as usize].push(c);
            }
        }
        inc
    }
}

fn check_alpha(alpha: &Rational64) -> Result<()> {
    if *alpha < Rational64::from_integer(0) || *alpha > Rational64::from_integer(1) {
        return Err(Error::Precondition(format!("alpha = {alpha} outside [0, 1]")));
    }
    Ok(())
}

fn verify_value(
    set: &SubsetOfZN,
    system: &LinearFormSystem,
    value: Rational64,
) -> Result<Verification> {
    let mask = set.mask();
    let masks: Vec<&[bool]> = vec![&mask; system.num_forms()];
    let (c, total) = count_sets(&masks, system, DEFAULT_BRUTE_CAP)?;
    let recount = Rational64::new(c as i64, total as i64);
    Ok(Verification {
        verified: recount == value,
        recounted: vec![format!("{}/{}", recount.numer(), recount.denom())],
    })
}

fn finish(
    set: SubsetOfZN,
    system: &LinearFormSystem,
    count: u64,
    total: u128,
    method: Method,
    bound_kind: BoundKind,
) -> Result<ExtremalResult> {
    let value = Rational64::new(count as i64, total as i64);
    let verification = verify_value(&set, system, value)?;
    if !verification.verified {
        return Err(Error::Internal(format!(
            "certificate recount {:?} disagrees with solver value {value}",
            verification.recounted
        )));
    }
    Ok(ExtremalResult {
        value,
        certificate: set,
        method,
        bound_kind,
        verification,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Goal {
    Min,
    Max,
}

/// Depth-first search over membership of 0, 1, ..., N-1. Configurations are
/// filed under their largest element, so they are settled when it is decided.
struct SubsetSearch<'a> {
    n: usize,
    goal: Goal,
    closing: Vec<Vec<usize>>,
    configs: &'a Configurations,
    mask: Vec<bool>,
    /// Configurations still able to lie inside the set (no excluded member).
    alive: u64,
    killed_by: Vec<Vec<usize>>,
    dead: Vec<u32>,
    best: Option<(u64, Vec<bool>)>,
}

impl<'a> SubsetSearch<'a> {
    fn new(configs: &'a Configurations, goal: Goal) -> Self {
        let n = configs.modulus as usize;
        let mut closing = vec![Vec::new(); n];
        for (c, (s, _)) in configs.sets.iter().enumerate() {
            closing[*s.last().unwrap() as usize].push(c);
        }
        SubsetSearch {
            n,
            goal,
            closing,
            configs,
            mask: vec![false; n],
            alive: configs.sets.iter().map(|(_, w)| w).sum(),
            killed_by: configs.incidence(),
            dead: vec![0; configs.sets.len()],
            best: None,
        }
    }

    fn improves(&self, value: u64) -> bool {
        match (&self.best, self.goal) {
            (None, _) => true,
            (Some((b, _)), Goal::Min) => value < *b,
            (Some((b, _)), Goal::Max) => value > *b,
        }
    }

    /// Searches sets of exactly `size` elements.
    fn run(&mut self, size: usize, meter: &mut Meter) -> Result<()> {
        self.visit(0, 0, size, 0, meter)
    }

    fn visit(&mut self, x: usize, chosen: usize, size: usize, partial: u64, meter: &mut Meter) -> Result<()> {
        meter.tick()?;
        match self.goal {
            Goal::Min if !self.improves(partial) => return Ok(()),
            Goal::Max if !self.improves(self.alive) => return Ok(()),
            _ => {}
        }
        if x == self.n {
            if chosen == size {
                self.best = Some((partial, self.mask.clone()));
            }
            return Ok(());
        }
        let remaining = self.n - x;
        if chosen < size {
            self.mask[x] = true;
            let closed: u64 = self.closing[x]
                .iter()
                .filter(|&&c| self.dead[c] == 0)
                .map(|&c| self.configs.sets[c].1)
                .sum();
            self.visit(x + 1, chosen + 1, size, partial + closed, meter)?;
            self.mask[x] = false;
        }
        if size - chosen < remaining {
            for &c in &self.killed_by[x] {
                if self.dead[c] == 0 {
                    self.alive -= self.configs.sets[c].1;
                }
                self.dead[c] += 1;
            }
            let r = self.visit(x + 1, chosen, size, partial, meter);
            for &c in &self.killed_by[x] {
                self.dead[c] -= 1;
                if self.dead[c] == 0 {
                    self.alive += self.configs.sets[c].1;
                }
            }
            r?;
        }
        Ok(())
    }
}

fn trivial_result(system: &LinearFormSystem, n: u64, full: bool, bound_kind: BoundKind) -> Result<ExtremalResult> {
    let (set, count) = if full {
        (SubsetOfZN::full(n), 1)
    } else {
        (SubsetOfZN::empty(n), 0)
    };
    finish(set, system, count, 1, Method::Exact, bound_kind)
}

/// Exact `min { Sol(A) : |A| >= alpha N }` by branch and bound over every
/// admissible size.
pub fn min_sol_exact(
    system: &LinearFormSystem,
    alpha: Rational64,
    n: u64,
    budget: &SearchBudget,
) -> Result<ExtremalResult> {
    check_alpha(&alpha)?;
    let s = ceil_mul(&alpha, n) as usize;
    if s == 0 {
        return trivial_result(system, n, false, BoundKind::Equals);
    }
    let configs = Configurations::enumerate(system, n, CONFIGURATION_CAP)?;
    let mut search = SubsetSearch::new(&configs, Goal::Min);
    let mut meter = Meter {
        budget,
        nodes: 0,
        what: "exact minimum search",
    };
    for size in s..=n as usize {
        search.run(size, &mut meter)?;
    }
    let (count, mask) = search.best.expect("size N is always feasible");
    finish(SubsetOfZN::from_mask(&mask), system, count, configs.total, Method::Exact, BoundKind::Equals)
}

/// Exact `max { Sol(A) : |A| <= alpha N }` by branch and bound over every
/// admissible size.
pub fn max_sol_exact(
    system: &LinearFormSystem,
    alpha: Rational64,
    n: u64,
    budget: &SearchBudget,
) -> Result<ExtremalResult> {
    check_alpha(&alpha)?;
    let s = floor_mul(&alpha, n) as usize;
    if s == 0 {
        return trivial_result(system, n, false, BoundKind::Equals);
    }
    let configs = Configurations::enumerate(system, n, CONFIGURATION_CAP)?;
    let mut search = SubsetSearch::new(&configs, Goal::Max);
    let mut meter = Meter {
        budget,
        nodes: 0,
        what: "exact maximum search",
    };
    for size in (0..=s).rev() {
        search.run(size, &mut meter)?;
    }
    let (count, mask) = search.best.expect("the empty set is always feasible");
    finish(SubsetOfZN::from_mask(&mask), system, count, configs.total, Method::Exact, BoundKind::Equals)
}

/// Annealing parameters: temperature `t0 * decay^iter` in units of one
/// configuration weight.
#[derive(Clone, Copy, Debug)]
pub struct Annealing {
    pub iterations: u64,
    pub t0: f64,
    pub decay: f64,
    pub deadline: Option<Instant>,
}

impl Annealing {
    pub fn new(iterations: u64) -> Self {
        Annealing {
            iterations,
            t0: 2.0,
            decay: 0.9995,
            deadline: None,
        }
    }
}

/// Swap-move annealing over subsets of a fixed size. Each configuration tracks
/// how many of its members are missing from the set, so a swap costs the
/// degrees of the two elements involved.
struct Annealer<'a> {
    configs: &'a Configurations,
    inc: Vec<Vec<usize>>,
    missing: Vec<u32>,
    mask: Vec<bool>,
    count: u64,
}

impl<'a> Annealer<'a> {
    fn new(configs: &'a Configurations, mask: Vec<bool>) -> Self {
        let missing: Vec<u32> = configs
            .sets
            .iter()
            .map(|(s, _)| s.iter().filter(|&&x| !mask[x as usize]).count() as u32)
            .collect();
        let count = configs
            .sets
            .iter()
            .zip(&missing)
            .filter(|(_, &m)| m == 0)
            .map(|((_, w), _)| w)
            .sum();
        Annealer {
            configs,
            inc: configs.incidence(),
            missing,
            mask,
            count,
        }
    }

    fn remove(&mut self, x: usize) {
        self.mask[x] = false;
        for &c in &self.inc[x] {
            if self.missing[c] == 0 {
                self.count -= self.configs.sets[c].1;
            }
            self.missing[c] += 1;
        }
    }

    fn insert(&mut self, x: usize) {
        self.mask[x] = true;
        for &c in &self.inc[x] {
            self.missing[c] -= 1;
            if self.missing[c] == 0 {
                self.count += self.configs.sets[c].1;
            }
        }
    }

    /// Best-so-far swap annealing; `sign` is +1 to minimize and -1 to maximize.
    fn run(&mut self, schedule: &Annealing, sign: f64, seed: u64) -> (u64, Vec<bool>) {
        let mut r = rng(seed ^ 0x5eed_a11e);
        let mut best = (self.count, self.mask.clone());
        let n = self.mask.len();
        let size = self.mask.iter().filter(|&&b| b).count();
        if size == 0 || size == n {
            return best;
        }
        let mut members: Vec<usize> = (0..n).filter(|&x| self.mask[x]).collect();
        let mut others: Vec<usize> = (0..n).filter(|&x| !self.mask[x]).collect();
        let mut temp = schedule.t0;
        for iter in 0..schedule.iterations {
            if iter % 1024 == 0 && schedule.deadline.is_some_and(|d| Instant::now() >= d) {
                break;
            }
            let i = r.gen_range(0..members.len());
            let j = r.gen_range(0..others.len());
            let (u, v) = (members[i], others[j]);
            let before = self.count as f64;
            self.remove(u);
            self.insert(v);
            let delta = sign * (self.count as f64 - before);
            let accept = delta <= 0.0 || r.gen::<f64>() < (-delta / temp.max(1e-12)).exp();
            if accept {
                members[i] = v;
                others[j] = u;
                let better = match sign > 0.0 {
                    true => self.count < best.0,
                    false => self.count > best.0,
                };
                if better {
                    best = (self.count, self.mask.clone());
                }
            } else {
                self.remove(v);
                self.insert(u);
            }
            temp *= schedule.decay;
        }
        best
    }
}

fn random_mask(n: usize, size: usize, seed: u64) -> Vec<bool> {
    let mut r = rng(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut r);
    let mut mask = vec![false; n];
    for &x in &idx[..size] {
        mask[x] = true;
    }
    mask
}

/// Seeded annealing upper bound on `min { Sol(A) : |A| >= alpha N }`, searching
/// sets of size exactly `ceil(alpha N)`.
pub fn min_sol_heuristic(
    system: &LinearFormSystem,
    alpha: Rational64,
    n: u64,
    seed: u64,
    schedule: &Annealing,
) -> Result<ExtremalResult> {
    anneal(system, alpha, n, seed, schedule, Goal::Min)
}

/// Seeded annealing lower bound on `max { Sol(A) : |A| <= alpha N }`.
pub fn max_sol_heuristic(
    system: &LinearFormSystem,
    alpha: Rational64,
    n: u64,
    seed: u64,
    schedule: &Annealing,
) -> Result<ExtremalResult> {
    anneal(system, alpha, n, seed, schedule, Goal::Max)
}

fn anneal(
    system: &LinearFormSystem,
    alpha: Rational64,
    n: u64,
    seed: u64,
    schedule: &Annealing,
    goal: Goal,
) -> Result<ExtremalResult> {
    check_alpha(&alpha)?;
    let (size, bound) = match goal {
        Goal::Min => (ceil_mul(&alpha, n) as usize, BoundKind::UpperBound),
        Goal::Max => (floor_mul(&alpha, n) as usize, BoundKind::LowerBound),
    };
    let configs = Configurations::enumerate(system, n, CONFIGURATION_CAP)?;
    let mut annealer = Annealer::new(&configs, random_mask(n as usize, size, seed));
    let sign = if goal == Goal::Min { 1.0 } else { -1.0 };
    let (count, mask) = annealer.run(schedule, sign, seed);
    finish(SubsetOfZN::from_mask(&mask), system, count, configs.total, Method::Heuristic, bound)
}

/// Either search strategy, for callers choosing at run time.
#[derive(Clone, Copy, Debug)]
pub enum Mode {
    Exact(SearchBudget),
    Heuristic { seed: u64, schedule: Annealing },
}

pub fn min_sol(system: &LinearFormSystem, alpha: Rational64, n: u64, mode: &Mode) -> Result<ExtremalResult> {
    match mode {
        Mode::Exact(b) => min_sol_exact(system, alpha, n, b),
        Mode::Heuristic { seed, schedule } => min_sol_heuristic(system, alpha, n, *seed, schedule),
    }
}

pub fn max_sol(system: &LinearFormSystem, alpha: Rational64, n: u64, mode: &Mode) -> Result<ExtremalResult> {
    match mode {
        Mode::Exact(b) => max_sol_exact(system, alpha, n, b),
        Mode::Heuristic { seed, schedule } => max_sol_heuristic(system, alpha, n, *seed, schedule),
    }
}

/// Which configurations count as forbidden.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Degeneracy {
    /// Every configuration in the image, constant tuples included.
    #[default]
    Strict,
    /// Constant tuples are allowed.
    Weak,
}

/// The forbidden-configuration hypergraph of a family on Z/N.
pub fn forbidden_hypergraph(
    family: &[LinearFormSystem],
    n: u64,
    degeneracy: Degeneracy,
) -> Result<Vec<Vec<u32>>> {
    let mut edges: Vec<Vec<u32>> = Vec::new();
    for system in family {
        let configs = Configurations::enumerate(system, n, CONFIGURATION_CAP)?;
        edges.extend(
            configs
                .sets
                .into_iter()
                .map(|(s, _)| s)
                .filter(|s| degeneracy == Degeneracy::Strict || s.len() > 1),
        );
    }
    edges.sort();
    edges.dedup();
    Ok(edges)
}

/// Number of `n` with all `psi_i(n)` in the set, skipping constant tuples
/// when `degeneracy` is weak.
fn forbidden_count(mask: &[bool], system: &LinearFormSystem, degeneracy: Degeneracy) -> Result<u128> {
    let n = mask.len() as u64;
    iteration_count(n, system.num_vars(), DEFAULT_BRUTE_CAP)?;
    let coeffs = system.reduced_forms(n);
    let mut hits = 0u128;
    for first in 0..n {
        walk_slice(&coeffs, n, first, |vals| {
            let constant = vals.iter().all(|&v| v == vals[0]);
            if vals.iter().all(|&v| mask[v as usize]) && !(constant && degeneracy == Degeneracy::Weak) {
                hits += 1;
            }
        });
    }
    Ok(hits)
}

/// Wraps a constructed set as a free-density lower bound after recounting it.
pub fn certify_free(family: &[LinearFormSystem], set: SubsetOfZN, degeneracy: Degeneracy) -> Result<ExtremalResult> {
    free_result(family, set, degeneracy, Method::Construction, BoundKind::LowerBound)
}

fn free_result(
    family: &[LinearFormSystem],
    set: SubsetOfZN,
    degeneracy: Degeneracy,
    method: Method,
    bound_kind: BoundKind,
) -> Result<ExtremalResult> {
    let mask = set.mask();
    let mut recounted = Vec::with_capacity(family.len());
    let mut verified = true;
    for system in family {
        let hits = forbidden_count(&mask, system, degeneracy)?;
        verified &= hits == 0;
        let total = iteration_count(mask.len() as u64, system.num_vars(), DEFAULT_BRUTE_CAP)?;
        recounted.push(format!("{hits}/{total}"));
    }
    if !verified {
        return Err(Error::Internal(format!("certificate is not free: {recounted:?}")));
    }
    Ok(ExtremalResult {
        value: set.density(),
        certificate: set,
        method,
        bound_kind,
        verification: Verification { verified, recounted },
    })
}

/// Exact maximum independent set of a hypergraph on `0..n` by branch and bound
/// with component splitting and a disjoint-edge packing bound.
pub fn max_independent_set(n: usize, edges: &[Vec<u32>], budget: &SearchBudget) -> Result<Vec<u32>> {
    let mut meter = Meter {
        budget,
        nodes: 0,
        what: "maximum independent set search",
    };
    let verts: Vec<u32> = (0..n as u32).collect();
    let mut set = mis(verts, edges.to_vec(), -1, &mut meter)?.expect("the empty set is independent");
    set.sort_unstable();
    Ok(set)
}

/// Largest independent set strictly bigger than `floor`, if any.
fn mis(
    mut verts: Vec<u32>,
    mut edges: Vec<Vec<u32>>,
    floor: i64,
    meter: &mut Meter,
) -> Result<Option<Vec<u32>>> {
    meter.tick()?;
    // forced exclusions from singleton edges
    loop {
        if edges.iter().any(|e| e.is_empty()) {
            return Ok(None);
        }
        let mut out: Vec<u32> = edges.iter().filter(|e| e.len() == 1).map(|e| e[0]).collect();
        if out.is_empty() {
            break;
        }
        out.sort_unstable();
        out.dedup();
        verts.retain(|v| out.binary_search(v).is_err());
        edges.retain(|e| e.iter().all(|v| out.binary_search(v).is_err()));
    }
    let mut degree: HashMap<u32, usize> = HashMap::new();
    for e in &edges {
        for &v in e {
            *degree.entry(v).or_insert(0) += 1;
        }
    }
    let (mut chosen, verts): (Vec<u32>, Vec<u32>) = verts.into_iter().partition(|v| !degree.contains_key(v));
    let base = chosen.len() as i64;
    if verts.is_empty() {
        return Ok((base > floor).then_some(chosen));
    }

    let components = split_components(&verts, &edges);
    if components.len() > 1 {
        for (cv, ce) in components {
            let part = mis(cv, ce, -1, meter)?.expect("the empty set is independent");
            chosen.extend(part);
        }
        return Ok((chosen.len() as i64 > floor).then_some(chosen));
    }

    if base + verts.len() as i64 - packing(&edges) <= floor {
        return Ok(None);
    }

    let &v = verts
        .iter()
        .max_by_key(|&&v| (degree[&v], std::cmp::Reverse(v)))
        .unwrap();
    let rest: Vec<u32> = verts.iter().copied().filter(|&u| u != v).collect();

    let with: Vec<Vec<u32>> = edges
        .iter()
        .map(|e| e.iter().copied().filter(|&u| u != v).collect())
        .collect();
    let mut best = mis(rest.clone(), with, floor - base - 1, meter)?.map(|mut s| {
        s.push(v);
        s
    });
    let floor_out = best.as_ref().map_or(floor - base, |s| s.len() as i64);
    let without: Vec<Vec<u32>> = edges.into_iter().filter(|e| !e.contains(&v)).collect();
    if let Some(s) = mis(rest, without, floor_out, meter)? {
        best = Some(s);
    }
    Ok(best.map(|mut s| {
        s.extend(chosen);
        s
    }))
}

/// Lower bound on the number of vertices any independent set must omit.
fn packing(edges: &[Vec<u32>]) -> i64 {
    let mut order: Vec<&Vec<u32>> = edges.iter().collect();
    order.sort_by_key(|e| e.len());
    let mut used: std::collections::HashSet<u32> = std::collections::HashSet::new();
    let mut count = 0;
    for e in order {
        if e.iter().all(|v| !used.contains(v)) {
            used.extend(e.iter().copied());
            count += 1;
        }
    }
    count
}

fn split_components(verts: &[u32], edges: &[Vec<u32>]) -> Vec<(Vec<u32>, Vec<Vec<u32>>)> {
    let index: HashMap<u32, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut parent: Vec<usize> = (0..verts.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in edges {
        let a = find(&mut parent, index[&e[0]]);
        for v in &e[1..] {
            let b = find(&mut parent, index[v]);
            parent[b] = a;
        }
    }
    let mut groups: HashMap<usize, usize> = HashMap::new();
    let mut out: Vec<(Vec<u32>, Vec<Vec<u32>>)> = Vec::new();
    for (i, &v) in verts.iter().enumerate() {
        let root = find(&mut parent, i);
        let g = *groups.entry(root).or_insert_with(|| {
            out.push((Vec::new(), Vec::new()));
            out.len() - 1
        });
        out[g].0.push(v);
    }
    for e in edges {
        let root = find(&mut parent, index[&e[0]]);
        out[groups[&root]].1.push(e.clone());
    }
    out
}

/// Exact `d_F(Z/N)`: the largest density of a set free of every system in
/// the family.
pub fn max_free_density_exact(
    family: &[LinearFormSystem],
    n: u64,
    degeneracy: Degeneracy,
    budget: &SearchBudget,
) -> Result<ExtremalResult> {
    let edges = forbidden_hypergraph(family, n, degeneracy)?;
    let set = max_independent_set(n as usize, &edges, budget)?;
    let set = SubsetOfZN::new(n, set.into_iter().map(u64::from).collect())?;
    free_result(family, set, degeneracy, Method::Exact, BoundKind::Equals)
}

/// Randomized greedy lower bound on `d_F(Z/N)`: the best of `iterations`
/// maximal free sets built in random orders.
pub fn max_free_density_heuristic(
    family: &[LinearFormSystem],
    n: u64,
    degeneracy: Degeneracy,
    seed: u64,
    iterations: u64,
) -> Result<ExtremalResult> {
    let edges = forbidden_hypergraph(family, n, degeneracy)?;
    let mut inc: Vec<Vec<usize>> = vec![Vec::new(); n as usize];
    for (i, e) in edges.iter().enumerate() {
        for &v in e {
            inc[v as usize].push(i);
        }
    }
    let mut r = rng(seed);
    let mut order: Vec<usize> = (0..n as usize).collect();
    let mut best: Vec<bool> = vec![false; n as usize];
    let mut best_len = 0;
    for _ in 0..iterations.max(1) {
        order.shuffle(&mut r);
        let mut mask = vec![false; n as usize];
        // a vertex may join unless it would complete an edge
        let mut missing: Vec<usize> = edges.iter().map(Vec::len).collect();
        let mut len = 0;
        for &v in &order {
            if inc[v].iter().any(|&e| missing[e] == 1) {
                continue;
            }
            mask[v] = true;
            len += 1;
            for &e in &inc[v] {
                missing[e] -= 1;
            }
        }
        if len > best_len {
            best_len = len;
            best = mask;
        }
    }
    free_result(family, SubsetOfZN::from_mask(&best), degeneracy, Method::Heuristic, BoundKind::LowerBound)
}

/// Exact answers for the system `(x, kx)` on Z/p.
#[derive(Clone, Debug, PartialEq)]
pub struct DependentPair {
    pub k: i64,
    pub p: u64,
    /// Cycle length of `x -> kx` on the units.
    pub order: u64,
    pub d: Rational64,
    pub free_set: SubsetOfZN,
    /// `(alpha, m(alpha), minimizer)` when requested.
    pub min_sol: Option<(Rational64, Rational64, SubsetOfZN)>,
}

/// Cycles of `x -> kx` on `(Z/p)^x`, each listed in orbit order from its
/// smallest element.
pub fn multiplier_cycles(k: i64, p: u64) -> Vec<Vec<u64>> {
    let k = k.rem_euclid(p as i64) as u64;
    let mut seen = vec![false; p as usize];
    let mut cycles = Vec::new();
    for y in 1..p {
        if seen[y as usize] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut x = y;
        while !seen[x as usize] {
            seen[x as usize] = true;
            cycle.push(x);
            x = ((x as u128 * k as u128) % p as u128) as u64;
        }
        cycles.push(cycle);
    }
    cycles
}

/// Fewest pairs `(x, kx)` inside a cycle of length `len` holding `j` chosen points.
fn cycle_cost(len: usize, j: usize) -> usize {
    if j == len {
        len
    } else {
        (2 * j).saturating_sub(len)
    }
}

/// Points of a cycle in orbit order realizing [`cycle_cost`]: alternate first,
/// then fill gaps.
fn cycle_choice(cycle: &[u64], j: usize) -> Vec<u64> {
    let len = cycle.len();
    let alternate: Vec<usize> = (0..len / 2).map(|i| 2 * i + 1).collect();
    let gaps = (0..len).filter(|i| !alternate.contains(i));
    alternate
        .iter()
        .copied()
        .chain(gaps)
        .take(j)
        .map(|i| cycle[i])
        .collect()
}

/// `d` and optionally `m(alpha)` for `(x, kx)` on Z/p, from the cycle structure
/// of multiplication by `k`.
pub fn dependent_pair_exact(k: i64, p: u64, alpha: Option<Rational64>) -> Result<DependentPair> {
    if !is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    if k.unsigned_abs() < 2 || (k.rem_euclid(p as i64)) == 0 {
        return Err(Error::Precondition(format!("need |k| >= 2 and gcd(k, {p}) = 1, got k = {k}")));
    }
    let order = multiplicative_order(k, p).expect("k is a unit");
    let cycles = multiplier_cycles(k, p);
    let mut members: Vec<u64> = cycles
        .iter()
        .flat_map(|c| cycle_choice(c, c.len() / 2))
        .collect();
    members.sort_unstable();
    let free_set = SubsetOfZN::new(p, members)?;
    let d = Rational64::new(free_set.len() as i64, p as i64);
    let system = LinearFormSystem::dependent_pair(k);
    if sol_count(&free_set, &system)? != 0 {
        return Err(Error::Internal("cycle construction is not free".into()));
    }

    let min_sol = match alpha {
        None => None,
        Some(alpha) => {
            check_alpha(&alpha)?;
            let target = ceil_mul(&alpha, p) as usize;
            Some(dependent_pair_min(&cycles, p, target, &system)?)
                .map(|(cost, set)| (alpha, Rational64::new(cost as i64, p as i64), set))
        }
    };
    Ok(DependentPair {
        k,
        p,
        order,
        d,
        free_set,
        min_sol,
    })
}

fn sol_count(set: &SubsetOfZN, system: &LinearFormSystem) -> Result<u128> {
    let mask = set.mask();
    Ok(count_sets(&[&mask, &mask], system, DEFAULT_BRUTE_CAP)?.0)
}

/// Knapsack over cycles (and the fixed point 0, costing 1) for the fewest
/// pairs among sets of at least `target` points.
fn dependent_pair_min(
    cycles: &[Vec<u64>],
    p: u64,
    target: usize,
    system: &LinearFormSystem,
) -> Result<(usize, SubsetOfZN)> {
    const INF: usize = usize::MAX / 2;
    let p = p as usize;
    // items: the zero point, then each cycle
    let lens: Vec<usize> = std::iter::once(1).chain(cycles.iter().map(Vec::len)).collect();
    let mut table: Vec<Vec<usize>> = vec![vec![INF; p + 1]];
    table[0][0] = 0;
    for &len in &lens {
        let prev = table.last().unwrap();
        let mut next = vec![INF; p + 1];
        for (size, &c) in prev.iter().enumerate() {
            if c == INF {
                continue;
            }
            for j in 0..=len.min(p - size) {
                let v = c + cycle_cost(len, j);
                if v < next[size + j] {
                    next[size + j] = v;
                }
            }
        }
        table.push(next);
    }
    let last = table.last().unwrap();
    let (size, &cost) = last
        .iter()
        .enumerate()
        .skip(target)
        .min_by_key(|&(s, &c)| (c, s))
        .expect("target <= p");
    // walk back through the table to recover the counts per item
    let mut members = Vec::new();
    let mut rem = size;
    for item in (0..lens.len()).rev() {
        let len = lens[item];
        let here = table[item + 1][rem];
        let j = (0..=len.min(rem))
            .find(|&j| table[item][rem - j] != INF && table[item][rem - j] + cycle_cost(len, j) == here)
            .expect("table is consistent");
        if item == 0 {
            if j == 1 {
                members.push(0);
            }
        } else {
            members.extend(cycle_choice(&cycles[item - 1], j));
        }
        rem -= j;
    }
    members.sort_unstable();
    let set = SubsetOfZN::new(p as u64, members)?;
    let recount = sol_count(&set, system)?;
    if recount != cost as u128 {
        return Err(Error::Internal(format!("minimizer recount {recount} differs from {cost}")));
    }
    Ok((cost, set))
}

/// `{x : x^d mod p in I}` with `I = [c - delta p, c + delta p]`,
/// `c = floor(p / k^d)` and `delta = 1 / (4 k^{2d})`; verified free of `(x, kx)`.
pub fn weyl_set(p: u64, k: u64, d: u32) -> Result<SubsetOfZN> {
    if !is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    if k < 2 || d < 2 {
        return Err(Error::Precondition(format!("need k >= 2 and d >= 2, got k = {k}, d = {d}")));
    }
    let kd = (k as u128)
        .checked_pow(d)
        .filter(|&v| v.checked_mul(v).is_some_and(|v| v.checked_mul(4 * p as u128).is_some()))
        .ok_or_else(|| Error::Precondition("k^d too large".into()))?;
    let scale = 4 * kd * kd; // 1 / delta
    let c = p as u128 / kd;
    // |x^d - c| <= delta p  <=>  |x^d - c| * scale <= p
    // separation: c - delta p must exceed k^d delta p, else I meets k^d I mod p
    if c * scale <= (kd + 1) * p as u128 {
        return Err(Error::Precondition(format!(
            "interval degenerate for p = {p}, k = {k}, d = {d}: need p much larger than k^d"
        )));
    }
    let members: Vec<u64> = (0..p)
        .filter(|&x| {
            let r = pow_mod(x, d as u64, p) as u128;
            r.abs_diff(c) * scale <= p as u128
        })
        .collect();
    let set = SubsetOfZN::new(p, members)?;
    if sol_count(&set, &LinearFormSystem::dependent_pair(k as i64))? != 0 {
        return Err(Error::Internal("Weyl set is not free".into()));
    }
    Ok(set)
}

/// Union over cosets `y H` of `H = <k>` of `y {k^2, k^4, ..., k^{2 floor(n/2)}}`;
/// for `k = -1 mod p` the interval `{1, ..., (p-1)/2}`. Verified free of `(x, kx)`.
pub fn multiplicative_free_set(k: i64, p: u64) -> Result<SubsetOfZN> {
    if !is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    let kr = k.rem_euclid(p as i64) as u64;
    if kr == 0 || kr == 1 {
        return Err(Error::Precondition(format!("k = {k} is 0 or 1 mod {p}")));
    }
    let members: Vec<u64> = if kr == p - 1 {
        (1..=(p - 1) / 2).collect()
    } else {
        let n = multiplicative_order(k, p).unwrap();
        let mut seen = vec![false; p as usize];
        let mut out = Vec::new();
        for y in 1..p {
            if seen[y as usize] {
                continue;
            }
            let mut x = y;
            for j in 0..n {
                seen[x as usize] = true;
                if j % 2 == 0 && j >= 2 || (j == 0 && n.is_multiple_of(2) && n >= 2) {
                    out.push(x);
                }
                x = ((x as u128 * kr as u128) % p as u128) as u64;
            }
        }
        out.sort_unstable();
        out
    };
    let set = SubsetOfZN::new(p, members)?;
    if sol_count(&set, &LinearFormSystem::dependent_pair(k))? != 0 {
        return Err(Error::Internal("multiplicative construction is not free".into()));
    }
    Ok(set)
}

/// The densest interval `[aN/D, bN/D)` with `D <= 64` that is verified free of
/// a non-invariant system; `Ok(None)` when no such interval exists.
pub fn interval_free_set(system: &LinearFormSystem, n: u64) -> Result<Option<SubsetOfZN>> {
    if system.is_invariant() {
        return Err(Error::Precondition("interval construction needs a non-invariant system".into()));
    }
    iteration_count(n, system.num_vars(), DEFAULT_BRUTE_CAP)?;
    // the integers in [aN/D, bN/D) are ceil(aN/D) .. ceil(bN/D)
    let mut candidates: Vec<(u64, u64)> = Vec::new();
    for den in 1..=MAX_INTERVAL_DENOMINATOR {
        for a in 0..den {
            for b in a + 1..=den {
                let (start, end) = ((a * n).div_ceil(den), (b * n).div_ceil(den));
                if start < end {
                    candidates.push((start, end));
                }
            }
        }
    }
    candidates.sort_by_key(|&(s, e)| (std::cmp::Reverse(e - s), s));
    candidates.dedup();
    for (start, end) in candidates {
        let mask: Vec<bool> = (0..n).map(|x| start <= x && x < end).collect();
        if is_free(&mask, system, DEFAULT_BRUTE_CAP)? {
            let set = SubsetOfZN::from_mask(&mask);
            let masks: Vec<&[bool]> = vec![&mask; system.num_forms()];
            if count_sets(&masks, system, DEFAULT_BRUTE_CAP)?.0 != 0 {
                return Err(Error::Internal("interval recount is nonzero".into()));
            }
            return Ok(Some(set));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::sol_set;

    fn ap3() -> LinearFormSystem {
        LinearFormSystem::arithmetic_progression(3)
    }

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    /// Every subset of Z/N, as a bit pattern.
    fn subsets(n: u64) -> impl Iterator<Item = SubsetOfZN> {
        (0u64..1 << n).map(move |bits| SubsetOfZN::from_mask(&(0..n).map(|x| bits >> x & 1 == 1).collect::<Vec<_>>()))
    }

    fn oracle_min(system: &LinearFormSystem, alpha: Rational64, n: u64) -> Rational64 {
        let s = ceil_mul(&alpha, n) as usize;
        subsets(n)
            .filter(|a| a.len() >= s)
            .map(|a| sol_set(&a, system).unwrap())
            .min()
            .unwrap()
    }

    fn oracle_max(system: &LinearFormSystem, alpha: Rational64, n: u64) -> Rational64 {
        let s = floor_mul(&alpha, n) as usize;
        subsets(n)
            .filter(|a| a.len() <= s)
            .map(|a| sol_set(&a, system).unwrap())
            .max()
            .unwrap()
    }

    fn oracle_free(system: &LinearFormSystem, n: u64) -> Rational64 {
        subsets(n)
            .filter(|a| sol_set(a, system).unwrap() == r(0, 1))
            .map(|a| a.density())
            .max()
            .unwrap()
    }

    #[test]
    fn three_ap_at_five() {
        let res = min_sol_exact(&ap3(), r(2, 5), 5, &SearchBudget::default()).unwrap();
        assert_eq!(res.value, r(2, 25));
        assert_eq!(res.certificate.len(), 2);
        assert!(res.verification.verified);
        assert_eq!(res.bound_kind, BoundKind::Equals);
    }

    #[test]
    fn trivial_densities() {
        let b = SearchBudget::default();
        let zero = min_sol_exact(&ap3(), r(0, 1), 7, &b).unwrap();
        assert_eq!(zero.value, r(0, 1));
        assert!(zero.certificate.is_empty());
        assert_eq!(min_sol_exact(&ap3(), r(1, 1), 7, &b).unwrap().value, r(1, 1));
        assert_eq!(max_sol_exact(&ap3(), r(1, 1), 7, &b).unwrap().value, r(1, 1));
        let h = min_sol_heuristic(&ap3(), r(1, 1), 7, 1, &Annealing::new(100)).unwrap();
        assert_eq!(h.value, r(1, 1));
    }

    #[test]
    fn exact_matches_exhaustion() {
        let systems = [ap3(), LinearFormSystem::dependent_pair(2), LinearFormSystem::arithmetic_progression(4)];
        for system in &systems {
            for n in 3..=9 {
                for alpha in [r(1, 5), r(2, 5), r(3, 5)] {
                    let b = SearchBudget::default();
                    assert_eq!(min_sol_exact(system, alpha, n, &b).unwrap().value, oracle_min(system, alpha, n));
                    assert_eq!(max_sol_exact(system, alpha, n, &b).unwrap().value, oracle_max(system, alpha, n));
                }
            }
        }
    }

    #[test]
    fn heuristic_bounds_exact() {
        for n in [7u64, 10, 11] {
            for alpha in [r(1, 5), r(2, 5), r(3, 5)] {
                let b = SearchBudget::default();
                let exact_min = min_sol_exact(&ap3(), alpha, n, &b).unwrap().value;
                let exact_max = max_sol_exact(&ap3(), alpha, n, &b).unwrap().value;
                let sched = Annealing::new(20_000);
                let hmin = min_sol_heuristic(&ap3(), alpha, n, 5, &sched).unwrap();
                let hmax = max_sol_heuristic(&ap3(), alpha, n, 5, &sched).unwrap();
                assert_eq!(hmin.value, exact_min, "min n={n} alpha={alpha}");
                assert_eq!(hmax.value, exact_max, "max n={n} alpha={alpha}");
                assert_eq!(hmin.bound_kind, BoundKind::UpperBound);
            }
        }
    }

    #[test]
    fn heuristic_monotone_in_budget() {
        let mut last = None;
        for iters in [50u64, 100, 200, 400, 800, 1600] {
            let v = min_sol_heuristic(&ap3(), r(2, 5), 61, 9, &Annealing::new(iters)).unwrap().value;
            if let Some(prev) = last {
                assert!(v <= prev);
            }
            last = Some(v);
        }
    }

    #[test]
    fn heuristic_is_deterministic() {
        let a = min_sol_heuristic(&ap3(), r(1, 3), 41, 4, &Annealing::new(3000)).unwrap();
        let b = min_sol_heuristic(&ap3(), r(1, 3), 41, 4, &Annealing::new(3000)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn doubling_free_density() {
        let fam = [LinearFormSystem::dependent_pair(2)];
        let b = SearchBudget::default();
        assert_eq!(max_free_density_exact(&fam, 5, Degeneracy::Strict, &b).unwrap().value, r(2, 5));
        assert_eq!(max_free_density_exact(&fam, 7, Degeneracy::Strict, &b).unwrap().value, r(2, 7));
        for n in 2..=12 {
            let exact = max_free_density_exact(&fam, n, Degeneracy::Strict, &b).unwrap();
            assert_eq!(exact.value, oracle_free(&fam[0], n), "n={n}");
        }
    }

    #[test]
    fn family_and_degeneracy() {
        let b = SearchBudget::default();
        let none = max_free_density_exact(&[], 9, Degeneracy::Strict, &b).unwrap();
        assert_eq!(none.value, r(1, 1));
        assert_eq!(none.certificate, SubsetOfZN::full(9));
        // strictly, every point is a constant progression
        assert_eq!(max_free_density_exact(&[ap3()], 9, Degeneracy::Strict, &b).unwrap().value, r(0, 1));
        // weakly, {0,1,3,4} is the largest 3AP-free set mod 9
        let weak = max_free_density_exact(&[ap3()], 9, Degeneracy::Weak, &b).unwrap();
        assert_eq!(weak.value, r(4, 9));
        let fam = [ap3(), LinearFormSystem::dependent_pair(2)];
        let both = max_free_density_exact(&fam, 11, Degeneracy::Weak, &b).unwrap();
        let single = max_free_density_exact(&fam[..1], 11, Degeneracy::Weak, &b).unwrap();
        assert!(both.value <= single.value);
        let h = max_free_density_heuristic(&fam, 11, Degeneracy::Weak, 2, 200).unwrap();
        assert!(h.value <= both.value);
        assert_eq!(h.bound_kind, BoundKind::LowerBound);
    }

    #[test]
    fn dependent_pair_matches_search() {
        let b = SearchBudget::default();
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
            for k in [2i64, 3, -1, -2] {
                if k.rem_euclid(p as i64) == 0 {
                    continue;
                }
                if k.unsigned_abs() < 2 {
                    continue;
                }
                let pair = dependent_pair_exact(k, p, None).unwrap();
                let search = max_free_density_exact(&[LinearFormSystem::dependent_pair(k)], p, Degeneracy::Strict, &b).unwrap();
                assert_eq!(pair.d, search.value, "k={k} p={p}");
                let n = pair.order as i64;
                assert_eq!(pair.d, r((p as i64 - 1) / n * (n / 2), p as i64));
            }
        }
        assert_eq!(dependent_pair_exact(2, 5, None).unwrap().d, r(2, 5));
        assert_eq!(dependent_pair_exact(2, 7, None).unwrap().d, r(2, 7));
        assert!(dependent_pair_exact(2, 9, None).is_err());
    }

    #[test]
    fn dependent_pair_minimum_matches_search() {
        let system = LinearFormSystem::dependent_pair(2);
        for p in [5u64, 7, 11, 13] {
            for alpha in [r(1, 5), r(1, 2), r(3, 4), r(1, 1)] {
                let pair = dependent_pair_exact(2, p, Some(alpha)).unwrap();
                let (_, m, set) = pair.min_sol.unwrap();
                assert_eq!(m, oracle_min(&system, alpha, p), "p={p} alpha={alpha}");
                assert_eq!(sol_set(&set, &system).unwrap(), m);
            }
        }
    }

    #[test]
    fn pigeonhole_floor() {
        for p in [101u64, 211, 1009] {
            for alpha in [r(3, 5), r(3, 4), r(9, 10)] {
                let (_, m, _) = dependent_pair_exact(2, p, Some(alpha)).unwrap().min_sol.unwrap();
                let floor = 2.0 * rational_f64(&alpha) - 1.0 - 2.0 / p as f64;
                assert!(rational_f64(&m) >= floor);
            }
        }
    }

    #[test]
    fn multiplicative_examples() {
        assert_eq!(multiplicative_free_set(2, 7).unwrap().density(), r(2, 7));
        assert_eq!(multiplicative_free_set(2, 5).unwrap().density(), r(2, 5));
        let half = multiplicative_free_set(-1, 13).unwrap();
        assert_eq!(half.members(), &(1..=6).collect::<Vec<u64>>()[..]);
        for p in [11u64, 101, 1009] {
            let n = multiplicative_order(3, p).unwrap() as i64;
            let set = multiplicative_free_set(3, p).unwrap();
            assert_eq!(set.density(), r((n / 2) * ((p as i64 - 1) / n), p as i64));
        }
        assert!(multiplicative_free_set(1, 7).is_err());
        assert!(multiplicative_free_set(7, 7).is_err());
        assert!(multiplicative_free_set(2, 8).is_err());
    }

    #[test]
    fn weyl_at_1009() {
        let set = weyl_set(1009, 2, 2).unwrap();
        assert!((rational_f64(&set.density()) - 1.0 / 32.0).abs() <= 0.02);
        assert_eq!(sol_set(&set, &LinearFormSystem::dependent_pair(2)).unwrap(), r(0, 1));
        assert!(weyl_set(3, 2, 2).is_err());
        assert!(weyl_set(101, 2, 2).is_ok());
        assert!(weyl_set(1000, 2, 2).is_err());
    }

    #[test]
    fn interval_sets() {
        let kernel = LinearFormSystem::new(vec![vec![1, 0], vec![-1, 3], vec![0, 1]]).unwrap();
        let set = interval_free_set(&kernel, 101).unwrap().unwrap();
        assert!(!set.is_empty());
        assert_eq!(sol_set(&set, &kernel).unwrap(), r(0, 1));
        let pair = interval_free_set(&LinearFormSystem::dependent_pair(2), 101).unwrap().unwrap();
        assert!(rational_f64(&pair.density()) >= 0.24);
        assert!(pair.density() < multiplicative_free_set(2, 101).unwrap().density());
        assert!(interval_free_set(&ap3(), 101).is_err());
    }

    #[test]
    fn hypergraph_mis_on_cycles() {
        // a 9-cycle holds 4 independent vertices
        let edges: Vec<Vec<u32>> = (0..9u32).map(|i| vec![i.min((i + 1) % 9), i.max((i + 1) % 9)]).collect();
        assert_eq!(max_independent_set(9, &edges, &SearchBudget::default()).unwrap().len(), 4);
        // a 100-cycle splits into paths after the first branch
        let edges: Vec<Vec<u32>> = (0..100u32).map(|i| vec![i.min((i + 1) % 100), i.max((i + 1) % 100)]).collect();
        assert_eq!(max_independent_set(100, &edges, &SearchBudget::default()).unwrap().len(), 50);
    }

    #[test]
    fn node_budget_is_enforced() {
        let b = SearchBudget {
            max_nodes: 10,
            ..SearchBudget::default()
        };
        let err = min_sol_exact(&ap3(), r(1, 2), 13, &b).unwrap_err();
        assert!(err.is_budget());
    }
}
